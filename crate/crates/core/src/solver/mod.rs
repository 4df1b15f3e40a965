//! Critical points of the potential on the gauge slice.
//!
//! The slice fixes the first row and column of `g` to 1, which removes the
//! two-sided diagonal torus action and leaves `(n-1)^2` free complex
//! coordinates. Newton runs on the holomorphic system "free gradient
//! components vanish", with each equation multiplied by its coordinate
//! (`x_v * dF/dx_v = lambda - x_v ghat`). The rescaled system has the same
//! zeros away from the coordinate hyperplanes, but its merit function is scale
//! free, so iterates cannot fake convergence by running off to infinity where
//! the raw gradient decays.

mod cluster;
mod family;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_modulus_range, fourier_matrix, random_gaussian, random_torus_entry, singular_spectrum,
    solve, ComplexMatrix, SpectrumReport, Svd, C64,
};
use crate::potential::{
    critical_residual, potential_power, slice_derivatives, GaugeSlicePoint, WeightMatrix,
};
use crate::rng::seeded;

pub use cluster::{canonical_key_of, canonicalize, CanonicalKey};
pub use family::{family_probe, DirectionTrace, FamilyReport, FamilyStatus};

/// Smallest accepted backtracking factor.
pub const STEP_FLOOR: f64 = 1.0 / (1u64 << 20) as f64;
/// Iterates with a free entry below this modulus are rejected.
pub const ENTRY_FLOOR: f64 = 1e-8;
/// Iterates with a free entry above this modulus are treated as escaping to infinity.
pub const ENTRY_CEILING: f64 = 1e8;
/// Relative cutoff of the minimum-norm fallback solve used when the Jacobian is singular.
const PSEUDO_INVERSE_CUTOFF: f64 = 1e-12;
/// Armijo constant of the backtracking line search.
const SUFFICIENT_DECREASE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    /// Backtracking factor in (0, 1).
    pub step_damping: f64,
    /// Relative singular-value threshold for Hessian nullity.
    pub nullity_tolerance: f64,
    pub cluster_tolerance: f64,
    pub modulus_range: (f64, f64),
    /// Start 0 is the Fourier matrix itself.
    pub fourier_start: bool,
    /// Number of starts drawn as random perturbations of the Fourier matrix.
    pub fourier_perturbed: usize,
    /// Log-scale size of those perturbations.
    pub fourier_perturbation: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            starts: 100,
            seed: 1,
            max_iterations: 200,
            residual_tolerance: 1e-11,
            step_damping: 0.5,
            nullity_tolerance: 1e-6,
            cluster_tolerance: 1e-6,
            modulus_range: (0.5, 2.0),
            fourier_start: false,
            fourier_perturbed: 0,
            fourier_perturbation: 0.05,
        }
    }
}

impl SolveConfig {
    /// Default budget for `n`: 5000 starts with Fourier seeding for `n >= 6`.
    pub fn for_dimension(n: usize) -> Self {
        let mut cfg = Self::default();
        if n >= 6 {
            cfg.starts = 5000;
            cfg.fourier_start = true;
            cfg.fourier_perturbed = 50;
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.starts == 0 {
            return bad("starts must be positive".into());
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        for (name, v) in [
            ("residual_tolerance", self.residual_tolerance),
            ("nullity_tolerance", self.nullity_tolerance),
            ("cluster_tolerance", self.cluster_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.step_damping > 0.0 && self.step_damping < 1.0) {
            return bad(format!(
                "step_damping must lie in (0,1), got {}",
                self.step_damping
            ));
        }
        if !(self.fourier_perturbation >= 0.0 && self.fourier_perturbation.is_finite()) {
            return bad("fourier_perturbation must be non-negative".into());
        }
        check_modulus_range(self.modulus_range)
    }
}

/// A converged critical point together with its local invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointRecord {
    pub slice_point: GaugeSlicePoint,
    /// Norm of the critical residual at the point.
    pub residual_norm: f64,
    /// `E^n`; present for uniform weights only.
    pub potential_power: Option<C64>,
    pub hessian_spectrum: SpectrumReport,
    pub nullity: usize,
    pub basin_count: usize,
    pub iterations: usize,
    pub canonical_key: CanonicalKey,
}

impl CriticalPointRecord {
    pub fn n(&self) -> usize {
        self.slice_point.n()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        self.slice_point.embed()
    }
}

/// Moves `g` to the gauge slice: `g'_ij = g_ij g_11 / (g_i1 g_1j)`.
pub fn regauge(g: &ComplexMatrix) -> Result<GaugeSlicePoint> {
    let n = g.n();
    for t in 0..n {
        for (row, col) in [(0, t), (t, 0)] {
            if g[(row, col)] == C64::new(0.0, 0.0) {
                return Err(Error::ZeroEntry { row, col });
            }
        }
    }
    let corner = g[(0, 0)];
    let free = (1..n)
        .flat_map(|i| (1..n).map(move |j| (i, j)))
        .map(|(i, j)| g[(i, j)] * corner / (g[(i, 0)] * g[(0, j)]))
        .collect();
    GaugeSlicePoint::new(n, free)
}

/// Rescaled system `s_v = x_v dF/dx_v` and its Jacobian `diag(x) H + diag(grad)`.
fn scaled_system(p: &GaugeSlicePoint, w: &WeightMatrix) -> Result<(Vec<C64>, ComplexMatrix)> {
    let (grad, hess) = slice_derivatives(p, w, true)?;
    let hess = hess.expect("hessian requested");
    let x = p.free();
    let s = x.iter().zip(&grad).map(|(xv, gv)| xv * gv).collect();
    let mut jac = hess;
    let dim = x.len();
    for r in 0..dim {
        for c in 0..dim {
            jac[(r, c)] *= x[r];
        }
        jac[(r, r)] += grad[r];
    }
    Ok((s, jac))
}

fn scaled_norm(p: &GaugeSlicePoint, w: &WeightMatrix) -> Result<f64> {
    let grad = slice_derivatives(p, w, false)?.0;
    Ok(p.free()
        .iter()
        .zip(&grad)
        .map(|(x, g)| (x * g).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

fn trial_point(n: usize, x: &[C64], dx: &[C64], t: f64) -> Option<GaugeSlicePoint> {
    let free: Vec<C64> = x.iter().zip(dx).map(|(a, d)| a + d * t).collect();
    let in_domain = free
        .iter()
        .all(|z| z.norm() > ENTRY_FLOOR && z.norm() < ENTRY_CEILING);
    if !in_domain {
        return None;
    }
    GaugeSlicePoint::new(n, free).ok()
}

fn newton_step(s: &[C64], jac: &ComplexMatrix) -> Vec<C64> {
    let rhs: Vec<C64> = s.iter().map(|z| -z).collect();
    solve(jac, &rhs).unwrap_or_else(|_| Svd::of(jac).solve_min_norm(&rhs, PSEUDO_INVERSE_CUTOFF))
}

fn no_convergence(iterations: usize, residual: f64, reason: &str) -> Error {
    Error::NoConvergence {
        iterations,
        residual,
        reason: reason.to_string(),
    }
}

/// Damped Newton from `start`; returns the converged point and the iteration count.
pub(crate) fn newton_iterate(
    start: &GaugeSlicePoint,
    w: &WeightMatrix,
    cfg: &SolveConfig,
) -> Result<(GaugeSlicePoint, usize)> {
    let n = start.n();
    w.require_square(n)?;
    let mut point = start.clone();
    let mut residual = f64::INFINITY;
    for iteration in 0..=cfg.max_iterations {
        let g = point.embed();
        residual = critical_residual(&g, w)?.norm;
        if residual < cfg.residual_tolerance {
            return Ok((point, iteration));
        }
        if iteration == cfg.max_iterations {
            break;
        }
        let (s, jac) = scaled_system(&point, w).map_err(|e| match e {
            Error::SingularMatrix { .. } => {
                no_convergence(iteration, residual, "reached the singularity floor")
            }
            other => other,
        })?;
        let merit = s.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let dx = newton_step(&s, &jac);
        let mut t = 1.0;
        let mut accepted = None;
        while t >= STEP_FLOOR {
            if let Some(trial) = trial_point(n, point.free(), &dx, t) {
                if let Ok(m) = scaled_norm(&trial, w) {
                    if m < (1.0 - SUFFICIENT_DECREASE * t) * merit {
                        accepted = Some(trial);
                        break;
                    }
                }
            }
            t *= cfg.step_damping;
        }
        match accepted {
            Some(next) => point = next,
            None => return Err(no_convergence(iteration, residual, "step collapse")),
        }
    }
    Err(no_convergence(
        cfg.max_iterations,
        residual,
        "iteration limit",
    ))
}

/// Builds the record for a converged point.
pub fn record_at(
    point: GaugeSlicePoint,
    w: &WeightMatrix,
    cfg: &SolveConfig,
    iterations: usize,
) -> Result<CriticalPointRecord> {
    let g = point.embed();
    let residual_norm = critical_residual(&g, w)?.norm;
    let potential_power = if w.is_uniform() {
        Some(potential_power(&g)?)
    } else {
        None
    };
    let (_, hess) = slice_derivatives(&point, w, true)?;
    let hessian_spectrum = if point.dim() == 0 {
        SpectrumReport::from_values(Vec::new(), cfg.nullity_tolerance)
    } else {
        singular_spectrum(&hess.expect("hessian requested"), cfg.nullity_tolerance)?
    };
    let canonical_key = canonical_key_of(&g, cfg.cluster_tolerance)?;
    Ok(CriticalPointRecord {
        nullity: hessian_spectrum.nullity,
        slice_point: point,
        residual_norm,
        potential_power,
        hessian_spectrum,
        basin_count: 1,
        iterations,
        canonical_key,
    })
}

/// Damped complex Newton on the slice; the record carries the Hessian spectrum at the solution.
pub fn newton_solve(
    start: &GaugeSlicePoint,
    w: &WeightMatrix,
    cfg: &SolveConfig,
) -> Result<CriticalPointRecord> {
    let (point, iterations) = newton_iterate(start, w, cfg)?;
    record_at(point, w, cfg, iterations)
}

/// How multi-start work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Parallel when the `parallel` feature is enabled, sequential otherwise.
    #[default]
    Auto,
    Sequential,
    Parallel,
}

impl Execution {
    fn is_parallel(self) -> bool {
        match self {
            Execution::Sequential => false,
            Execution::Auto | Execution::Parallel => cfg!(feature = "parallel"),
        }
    }
}

/// Starting point number `index` of a multi-start run.
pub fn start_point(n: usize, cfg: &SolveConfig, index: usize) -> Result<GaugeSlicePoint> {
    let mut rng = seeded(cfg.seed, index as u64);
    let fourier_seeds = usize::from(cfg.fourier_start) + cfg.fourier_perturbed;
    let free: Vec<C64> = if index < fourier_seeds {
        let base = regauge(&fourier_matrix(n))?;
        let exact = cfg.fourier_start && index == 0;
        base.free()
            .iter()
            .map(|&z| {
                if exact {
                    z
                } else {
                    z * (random_gaussian(&mut rng) * cfg.fourier_perturbation).exp()
                }
            })
            .collect()
    } else {
        (0..(n - 1) * (n - 1))
            .map(|_| random_torus_entry(&mut rng, cfg.modulus_range))
            .collect()
    };
    GaugeSlicePoint::new(n, free)
}

/// Clustered result of a multi-start run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartOutcome {
    pub n: usize,
    pub attempted: usize,
    pub converged: usize,
    /// One representative per canonical key, ordered by key.
    pub clusters: Vec<CriticalPointRecord>,
}

pub fn multistart(n: usize, w: &WeightMatrix, cfg: &SolveConfig) -> Result<MultistartOutcome> {
    multistart_with(n, w, cfg, Execution::Auto)
}

/// Runs `cfg.starts` seeded solves and clusters them by canonical key.
///
/// Each start is a pure function of `(cfg.seed, index)`, and results are
/// reduced in index order, so the outcome does not depend on scheduling.
pub fn multistart_with(
    n: usize,
    w: &WeightMatrix,
    cfg: &SolveConfig,
    execution: Execution,
) -> Result<MultistartOutcome> {
    cfg.validate()?;
    if n < 1 {
        return Err(Error::InvalidConfig("n must be positive".into()));
    }
    w.require_square(n)?;
    if !w.validate().is_valid() {
        return Err(Error::InvalidConfig(
            "weight matrix violates its constraints".into(),
        ));
    }
    let run = |index: usize| -> Option<CriticalPointRecord> {
        let start = start_point(n, cfg, index).ok()?;
        newton_solve(&start, w, cfg).ok()
    };
    let results: Vec<Option<CriticalPointRecord>> = if execution.is_parallel() {
        par_map(cfg.starts, run)
    } else {
        (0..cfg.starts).map(run).collect()
    };

    let converged = results.iter().flatten().count();
    let mut clusters: std::collections::BTreeMap<CanonicalKey, CriticalPointRecord> =
        Default::default();
    for record in results.into_iter().flatten() {
        clusters
            .entry(record.canonical_key.clone())
            .and_modify(|r| r.basin_count += 1)
            .or_insert(record);
    }
    Ok(MultistartOutcome {
        n,
        attempted: cfg.starts,
        converged,
        clusters: clusters.into_values().collect(),
    })
}

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..count).map(f).collect()
}
