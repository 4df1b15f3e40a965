use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use unbiased_core::birkhoff::{polytope_report, reflexive_check};
use unbiased_core::solver::{
    family_probe, multistart, CriticalPointRecord, FamilyReport, SolveConfig,
};
use unbiased_core::symplectic::{
    integrable_survey, pullback_survey, rank_k_lemma_battery, LemmaBattery, PullbackSurvey,
};
use unbiased_core::verify::{check_mub, check_unbiased_pair, CheckReport};
use unbiased_core::{ComplexMatrix, WeightMatrix};

use crate::args::{FamilyArgs, PolytopeArgs, SolveArgs, SymplecticArgs, VerifyArgs};
use crate::config::{
    FamilySection, PolytopeSection, SolveSection, SymplecticSection, VerifySection,
};
use crate::{Failure, Outcome, EXIT_NO_CONVERGENCE, EXIT_VERIFICATION};

pub struct Global {
    pub seed: u64,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub json: bool,
}

const VERIFY_TOLERANCE: f64 = 1e-10;
const SYMPLECTIC_TOLERANCE: f64 = 1e-8;
const SYMPLECTIC_TRIALS: usize = 100;
const SYMPLECTIC_POINTS: usize = 20;

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

/// `uniform:<n>` and inline JSON are parsed directly; anything else is a file path.
fn weights(spec: Option<String>, n: usize) -> Result<WeightMatrix, Failure> {
    let w = match spec {
        None => WeightMatrix::uniform(n),
        Some(s) if s.trim_start().starts_with("uniform:") || s.trim_start().starts_with('{') => {
            WeightMatrix::parse(&s)?
        }
        Some(path) => WeightMatrix::parse(&read(Path::new(&path))?)?,
    };
    if w.rows() != n || w.cols() != n {
        return Err(Failure::usage(format!(
            "weights are {}x{}, expected {n}x{n}",
            w.rows(),
            w.cols()
        )));
    }
    Ok(w)
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::usage(format!("missing --{flag}")))
}

pub fn solve(global: &Global, a: SolveArgs, f: SolveSection) -> Result<Outcome, Failure> {
    let n = required(a.n.or(f.n), "n")?;
    if n == 0 {
        return Err(Failure::usage("--n must be positive"));
    }
    let mut cfg = SolveConfig::for_dimension(n);
    cfg.seed = global.seed;
    if let Some(v) = a.starts.or(f.starts) {
        cfg.starts = v;
    }
    if let Some(v) = a.max_iterations.or(f.max_iterations) {
        cfg.max_iterations = v;
    }
    if let Some(v) = global.tol {
        cfg.residual_tolerance = v;
    }
    if a.fourier || f.fourier.unwrap_or(false) {
        cfg.fourier_start = true;
    }
    if let Some(v) = a.fourier_perturbed.or(f.fourier_perturbed) {
        cfg.fourier_perturbed = v;
    }
    if let Some(v) = f.fourier_perturbation {
        cfg.fourier_perturbation = v;
    }
    if let Some(v) = a.nullity_tolerance.or(f.nullity_tolerance) {
        cfg.nullity_tolerance = v;
    }
    if let Some(v) = a.cluster_tolerance.or(f.cluster_tolerance) {
        cfg.cluster_tolerance = v;
    }
    if let Some(v) = f.step_damping {
        cfg.step_damping = v;
    }
    if let Some(v) = f.modulus_range {
        cfg.modulus_range = v;
    }
    cfg.validate()?;
    let w = weights(a.weights.or(f.weights), n)?;
    let outcome = multistart(n, &w, &cfg)?;

    let footer_tol = 100.0 * cfg.residual_tolerance;
    let mut passing = 0;
    for r in &outcome.clusters {
        if check_unbiased_pair(&r.matrix(), &w, footer_tol)?.passed {
            passing += 1;
        }
    }

    let mut table = String::new();
    let plural = if outcome.clusters.len() == 1 { "" } else { "s" };
    let _ = writeln!(
        table,
        "n = {n}: {} starts, {} converged, {} cluster{plural}",
        outcome.attempted,
        outcome.converged,
        outcome.clusters.len()
    );
    let _ = writeln!(
        table,
        "{:>7} {:>7} {:>7} {:>14} {:>10}",
        "cluster", "nullity", "basin", "|E^n|", "residual"
    );
    for (id, r) in outcome.clusters.iter().enumerate() {
        let e = r
            .potential_power
            .map_or("-".to_string(), |e| format!("{:.6e}", e.norm()));
        let _ = writeln!(
            table,
            "{id:>7} {:>7} {:>7} {e:>14} {:>10.2e}",
            r.nullity, r.basin_count, r.residual_norm
        );
    }
    let _ = writeln!(
        table,
        "verification at {footer_tol:.0e}: {passing}/{} clusters pass",
        outcome.clusters.len()
    );

    if let Some(path) = a.csv.or(f.csv) {
        let mut csv = String::from("n,nullity,basin_count,abs_potential_power\n");
        for r in &outcome.clusters {
            let e = r
                .potential_power
                .map_or(String::new(), |e| format!("{:e}", e.norm()));
            let _ = writeln!(csv, "{n},{},{},{e}", r.nullity, r.basin_count);
        }
        write(&path, &csv)?;
    }

    let code = if outcome.clusters.is_empty() {
        let _ = writeln!(table, "no start converged");
        EXIT_NO_CONVERGENCE
    } else if passing < outcome.clusters.len() {
        EXIT_VERIFICATION
    } else {
        0
    };
    Ok(Outcome {
        json: to_json(&outcome.clusters)?,
        table,
        code,
    })
}

#[derive(Serialize)]
struct VerifyOutput {
    unbiased: CheckReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    mub: Option<CheckReport>,
}

fn describe(name: &str, report: &CheckReport, table: &mut String) {
    let _ = writeln!(
        table,
        "{name}: {}",
        if report.passed { "passed" } else { "FAILED" }
    );
    for v in &report.violations {
        let _ = writeln!(
            table,
            "  {} {:?}: deviation {:.3e}",
            v.relation, v.indices, v.deviation
        );
    }
}

pub fn verify(global: &Global, a: VerifyArgs, f: VerifySection) -> Result<Outcome, Failure> {
    let path = required(a.matrix.or(f.matrix), "matrix")?;
    let g: ComplexMatrix = serde_json::from_str(&read(&path)?)
        .map_err(|e| Failure::usage(format!("cannot parse matrix {}: {e}", path.display())))?;
    let w = weights(a.weights.or(f.weights), g.n())?;
    let tol = global.tol.unwrap_or(VERIFY_TOLERANCE);
    let unbiased = check_unbiased_pair(&g, &w, tol)?;
    let mub = (a.mub || f.mub.unwrap_or(false)).then(|| check_mub(&g, tol));
    let mut table = String::new();
    describe("unbiased", &unbiased, &mut table);
    if let Some(m) = &mub {
        describe("mub", m, &mut table);
    }
    let passed = unbiased.passed && mub.as_ref().is_none_or(|m| m.passed);
    Ok(Outcome {
        json: to_json(&VerifyOutput { unbiased, mub })?,
        table,
        code: if passed { 0 } else { EXIT_VERIFICATION },
    })
}

pub fn polytope(_global: &Global, a: PolytopeArgs, f: PolytopeSection) -> Result<Outcome, Failure> {
    let n = required(a.n.or(f.n), "n")?;
    if n < 2 {
        return Err(Failure::usage("--n must be at least 2"));
    }
    let report = polytope_report(n)?;
    if let Some(path) = a.csv.or(f.csv) {
        write(&path, &reflexive_check(n)?.to_csv())?;
    }
    let opt = |v: Option<String>| v.unwrap_or_else(|| "not computed".into());
    let mut table = String::new();
    let _ = writeln!(table, "Birkhoff polytope, n = {n}");
    let _ = writeln!(table, "  dimension       {}", report.dimension);
    let _ = writeln!(table, "  vertices        {}", report.vertex_count);
    let _ = writeln!(table, "  facets          {}", report.facet_count);
    let _ = writeln!(
        table,
        "  lattice points  {}",
        opt(report.lattice_point_count.map(|c| c.to_string()))
    );
    let _ = writeln!(table, "  reflexive       {}", report.reflexive);
    let _ = writeln!(
        table,
        "  terminal        {}",
        opt(report.terminal.map(|t| t.to_string()))
    );
    let _ = writeln!(
        table,
        "  newton = vertices {}",
        opt(report.newton_matches_vertices.map(|t| t.to_string()))
    );
    let _ = writeln!(table, "  toric           {:?}", report.toric_identification);
    let certified = report.reflexive && report.terminal == Some(true);
    Ok(Outcome {
        json: to_json(&report)?,
        table,
        code: if certified { 0 } else { EXIT_VERIFICATION },
    })
}

#[derive(Serialize)]
struct SymplecticOutput {
    pullback: PullbackSurvey,
    lemma: Vec<LemmaBattery>,
    integrable: CheckReport,
}

pub fn symplectic(
    global: &Global,
    a: SymplecticArgs,
    f: SymplecticSection,
) -> Result<Outcome, Failure> {
    let n = required(a.n.or(f.n), "n")?;
    let trials = a.trials.or(f.trials).unwrap_or(SYMPLECTIC_TRIALS);
    let points = a.points.or(f.points).unwrap_or(SYMPLECTIC_POINTS);
    if n == 0 || trials == 0 || points == 0 {
        return Err(Failure::usage(
            "--n, --trials and --points must be positive",
        ));
    }
    let tol = global.tol.unwrap_or(SYMPLECTIC_TOLERANCE);
    let pullback = pullback_survey(n, points, trials, global.seed, tol)?;
    let lemma = (1..=n)
        .map(|k| rank_k_lemma_battery(n, k, trials, global.seed, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let integrable = integrable_survey(n, trials, global.seed)?;

    let counterexamples: usize = lemma.iter().map(|b| b.counterexamples).sum();
    let mut table = String::new();
    let _ = writeln!(
        table,
        "pullback: {points} points x {trials} pairs, max deviation {:.3e} ({})",
        pullback.max_deviation,
        if pullback.passed { "ok" } else { "FAILED" }
    );
    for b in &lemma {
        let _ = writeln!(
            table,
            "lemma k = {}: {} instances, {} orthogonal, {} counterexamples",
            b.k, b.instances, b.orthogonal_observed, b.counterexamples
        );
    }
    let _ = writeln!(
        table,
        "integrable: {} ({} nonzero brackets)",
        if integrable.passed { "ok" } else { "FAILED" },
        integrable.violations.len()
    );
    let passed = pullback.passed && counterexamples == 0 && integrable.passed;
    Ok(Outcome {
        json: to_json(&SymplecticOutput {
            pullback,
            lemma,
            integrable,
        })?,
        table,
        code: if passed { 0 } else { EXIT_VERIFICATION },
    })
}

#[derive(Serialize)]
struct FamilyEntry {
    cluster: usize,
    n: usize,
    report: FamilyReport,
}

pub fn family(global: &Global, a: FamilyArgs, f: FamilySection) -> Result<Outcome, Failure> {
    let path = required(a.records.or(f.records), "records")?;
    let records: Vec<CriticalPointRecord> = serde_json::from_str(&read(&path)?)
        .map_err(|e| Failure::usage(format!("cannot parse records {}: {e}", path.display())))?;
    let spec = a.weights.or(f.weights);
    let mut cfg = SolveConfig::default();
    if let Some(t) = global.tol {
        cfg.residual_tolerance = t;
    }
    if let Some(t) = a.cluster_tolerance.or(f.cluster_tolerance) {
        cfg.cluster_tolerance = t;
    }
    cfg.validate()?;
    let mut entries = Vec::with_capacity(records.len());
    for (cluster, r) in records.iter().enumerate() {
        let w = weights(spec.clone(), r.n())?;
        entries.push(FamilyEntry {
            cluster,
            n: r.n(),
            report: family_probe(r, &w, &cfg)?,
        });
    }
    let mut table = String::new();
    let _ = writeln!(
        table,
        "{:>7} {:>3} {:>7} {:>9}  status",
        "cluster", "n", "nullity", "traceable"
    );
    for e in &entries {
        let _ = writeln!(
            table,
            "{:>7} {:>3} {:>7} {:>9}  {:?}",
            e.cluster, e.n, e.report.nullity, e.report.traceable, e.report.status
        );
    }
    Ok(Outcome {
        json: to_json(&entries)?,
        table,
        code: 0,
    })
}
