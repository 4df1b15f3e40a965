//! TOML defaults. Every key mirrors a flag; a flag given on the command line wins.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub json: Option<bool>,
    #[serde(default)]
    pub solve: SolveSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub polytope: PolytopeSection,
    #[serde(default)]
    pub symplectic: SymplecticSection,
    #[serde(default)]
    pub family: FamilySection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub n: Option<usize>,
    pub weights: Option<String>,
    pub starts: Option<usize>,
    pub max_iterations: Option<usize>,
    pub fourier: Option<bool>,
    pub fourier_perturbed: Option<usize>,
    pub fourier_perturbation: Option<f64>,
    pub nullity_tolerance: Option<f64>,
    pub cluster_tolerance: Option<f64>,
    pub step_damping: Option<f64>,
    pub modulus_range: Option<(f64, f64)>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub matrix: Option<PathBuf>,
    pub weights: Option<String>,
    pub mub: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeSection {
    pub n: Option<usize>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymplecticSection {
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySection {
    pub records: Option<PathBuf>,
    pub weights: Option<String>,
    pub cluster_tolerance: Option<f64>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::usage(format!("bad config {}: {e}", path.display())))
}
