//! Acceptance gate. Runs every criterion at its stated tolerance and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use unbiased_core::birkhoff::{
    facet_enumerate, lattice_points_brute_force, lattice_points_enumerate, newton_polytope_of_e,
    reflexive_check, terminal_check,
};
use unbiased_core::linalg::{fourier_matrix, invert, ComplexMatrix, C64};
use unbiased_core::potential::{critical_residual, WeightMatrix};
use unbiased_core::solver::{
    family_probe, multistart, multistart_with, regauge, Execution, FamilyStatus, SolveConfig,
};
use unbiased_core::symplectic::{integrable_survey, pullback_survey, rank_k_lemma_battery};
use unbiased_core::verify::{
    check_psi_pushforward, check_unbiased_pair, projectors_from_transition, ProjectorSystem,
};

struct Verdict {
    passed: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Verdict {
    Verdict {
        passed: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Verdict {
    Verdict {
        passed: false,
        detail: detail.into(),
    }
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// n = 2 by hand: `E = z - 1/z` has `dE/dz = 1 + 1/z^2 = 0` at `z = +-i`, the
/// gauge-fixed entry is `x = z^2 = -1` and `E^2 = (2i)^2 = -4`.
fn criterion_1() -> Verdict {
    let z = C64::new(0.0, 1.0);
    let x_oracle = z * z;
    let e2_oracle = (z - 1.0 / z).powu(2);
    let cfg = SolveConfig {
        starts: 100,
        seed: 1,
        ..SolveConfig::default()
    };
    let out = multistart(2, &WeightMatrix::uniform(2), &cfg).expect("valid config");
    if out.clusters.len() != 1 {
        return fail(format!("{} clusters, expected 1", out.clusters.len()));
    }
    let r = &out.clusters[0];
    let x = r.slice_point.free()[0];
    let e2 = r.potential_power.expect("uniform weights");
    verdict(
        (x - x_oracle).norm() < 1e-10 && (e2 - e2_oracle).norm() < 1e-10 && r.nullity == 0,
        format!(
            "1 cluster, x = {x:.12}, E^2 = {e2:.12}, nullity {}",
            r.nullity
        ),
    )
}

/// Closed-form oracle: `g^-1 = g^H / n`, so `g_ji ghat_ij = |g_ji|^2 / n = 1/n`.
fn criterion_2() -> Verdict {
    let mut worst_residual: f64 = 0.0;
    for n in 2..=8 {
        let g = fourier_matrix(n);
        let w = WeightMatrix::uniform(n);
        let inv_oracle = g.adjoint().scale(C64::new(1.0 / n as f64, 0.0));
        let inv = invert(&g).expect("Fourier is invertible");
        if (&inv - &inv_oracle).max_abs() > 1e-12 {
            return fail(format!("n = {n}: inverse differs from g^H/n"));
        }
        for i in 0..n {
            for j in 0..n {
                let t = g[(j, i)] * inv_oracle[(i, j)];
                if (t - C64::new(1.0 / n as f64, 0.0)).norm() > 1e-12 {
                    return fail(format!("n = {n}: oracle trace ({i},{j}) = {t}"));
                }
            }
        }
        let res = critical_residual(&g, &w).expect("nonzero entries").norm;
        worst_residual = worst_residual.max(res);
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(res < 1e-11) {
            return fail(format!("n = {n}: residual {res:e}"));
        }
        let report = check_unbiased_pair(&g, &w, 1e-10).expect("valid input");
        if !report.passed {
            return fail(format!("n = {n}: {:?}", report.violations.first()));
        }
    }
    pass(format!("n = 2..8, worst residual {worst_residual:.1e}"))
}

fn criterion_3() -> Verdict {
    let mut details = Vec::new();
    let mut ok = true;
    for n in [3, 5] {
        let cfg = SolveConfig {
            starts: 2000,
            seed: 1,
            nullity_tolerance: 1e-6,
            ..SolveConfig::default()
        };
        let out = multistart(n, &WeightMatrix::uniform(n), &cfg).expect("valid config");
        let degenerate = out.clusters.iter().filter(|r| r.nullity != 0).count();
        ok &= degenerate == 0 && !out.clusters.is_empty();
        details.push(format!(
            "n = {n}: {} converged of {}, {} clusters, {degenerate} with nullity > 0",
            out.converged,
            out.attempted,
            out.clusters.len()
        ));
    }
    verdict(ok, details.join("; "))
}

fn criterion_4() -> Verdict {
    let w = WeightMatrix::uniform(4);
    let cfg = SolveConfig {
        starts: 200,
        seed: 1,
        ..SolveConfig::default()
    };
    let out = multistart(4, &w, &cfg).expect("valid config");
    let candidates = out.clusters.iter().filter(|r| r.nullity >= 1).count();
    for r in out.clusters.iter().filter(|r| r.nullity >= 1) {
        let report = family_probe(r, &w, &cfg).expect("probe runs");
        if report.status == FamilyStatus::Confirmed {
            let d = report
                .directions
                .iter()
                .find(|d| d.reconverged)
                .expect("confirmed");
            return pass(format!(
                "{candidates} clusters with nullity >= 1; nullity {}, {} traceable, re-converged at distance {:.2e}",
                report.nullity, report.traceable, d.distance
            ));
        }
    }
    fail(format!(
        "{candidates} clusters with nullity >= 1, none traceable"
    ))
}

/// Multi-start with Fourier seeding for `n`, escalating the budget up to 5000 starts.
fn family_search(n: usize, min_nullity: usize) -> Verdict {
    let w = WeightMatrix::uniform(n);
    let mut last = String::new();
    for starts in [1000, 5000] {
        let cfg = SolveConfig {
            starts,
            ..SolveConfig::for_dimension(n)
        };
        let out = multistart(n, &w, &cfg).expect("valid config");
        let best = out.clusters.iter().map(|r| r.nullity).max().unwrap_or(0);
        let hits = out
            .clusters
            .iter()
            .filter(|r| r.nullity >= min_nullity)
            .count();
        last = format!(
            "{starts} starts, {} converged, {} clusters, max nullity {best}",
            out.converged,
            out.clusters.len()
        );
        if hits > 0 {
            let probe = out
                .clusters
                .iter()
                .find(|r| r.nullity >= min_nullity)
                .map(|r| family_probe(r, &w, &cfg).expect("probe runs"))
                .expect("hit exists");
            return pass(format!(
                "{last}; {hits} clusters with nullity >= {min_nullity}, first has {} traceable directions",
                probe.traceable
            ));
        }
    }
    fail(format!("not reached, increase budget ({last})"))
}

fn criterion_7() -> Verdict {
    let mut details = Vec::new();
    let mut ok = true;
    for n in [2, 3, 4] {
        let s = pullback_survey(n, 20, 100, 1000 + n as u64, 1e-8).expect("valid points");
        ok &= s.passed && s.max_deviation < 1e-8;
        details.push(format!("n = {n}: {:.1e}", s.max_deviation));
    }
    verdict(
        ok,
        format!(
            "max deviation over 20 points x 100 pairs: {}",
            details.join(", ")
        ),
    )
}

fn criterion_8() -> Verdict {
    let mut counterexamples = 0;
    let mut both_directions = true;
    let mut cases = 0;
    for n in 1..=6 {
        for k in 1..=n {
            let b =
                rank_k_lemma_battery(n, k, 1000, 17 * n as u64 + k as u64, 1e-8).expect("valid k");
            counterexamples += b.counterexamples;
            if k >= 2 {
                both_directions &= b.orthogonal_observed > 0 && b.non_orthogonal_observed > 0;
            }
            cases += 1;
        }
    }
    verdict(
        counterexamples == 0 && both_directions,
        format!("{cases} (n, k) cases x 1000 instances, {counterexamples} counterexamples, both sides observed: {both_directions}"),
    )
}

fn criterion_9() -> Verdict {
    for n in 1..=6 {
        let qs: Vec<ComplexMatrix> = (0..n).map(|i| ComplexMatrix::unit(n, i, i)).collect();
        for a in &qs {
            for b in &qs {
                let commutator = &(a * b) - &(b * a);
                if commutator
                    .entries()
                    .iter()
                    .any(|z| z.re != 0.0 || z.im != 0.0)
                {
                    return fail(format!("n = {n}: nonzero diagonal commutator"));
                }
            }
        }
        let report = integrable_survey(n, 50, n as u64).expect("valid samples");
        if !report.passed {
            return fail(format!(
                "n = {n}: {} nonzero brackets",
                report.violations.len()
            ));
        }
    }
    pass("n = 1..6, 50 orbit samples each, all brackets exactly 0")
}

fn criterion_10() -> Verdict {
    let mut checks = 0;
    for n in 2..=8 {
        let g = fourier_matrix(n);
        let w = WeightMatrix::uniform(n);
        let full = projectors_from_transition(&g, 1e-9).expect("invertible");
        for k in 1..=n {
            let sub = ProjectorSystem::new(full.members[..k].to_vec(), 1e-9, true)
                .expect("same dimension");
            let rows = w.top_rows(k).expect("k <= n");
            let report = check_psi_pushforward(&sub, &rows, 1e-9).expect("shapes agree");
            if !report.passed {
                return fail(format!("n = {n}, k = {k}: {:?}", report.violations.first()));
            }
            checks += 1;
        }
    }
    pass(format!(
        "{checks} systems (n = 2..8, k = 1..n) pass at 1e-9"
    ))
}

fn criterion_11() -> Verdict {
    let mut notes = Vec::new();
    for n in 2..=4 {
        let facets = facet_enumerate(n).expect("within guard").len();
        let expected_facets = if n == 2 { 2 } else { n * n };
        let reflexive = reflexive_check(n).expect("within guard").reflexive;
        let terminal = terminal_check(n).expect("within guard");
        let points = lattice_points_enumerate(n).expect("within guard");
        let brute = lattice_points_brute_force(n).expect("within guard");
        let newton = newton_polytope_of_e(n)
            .expect("within guard")
            .matches_vertices;
        if !(reflexive
            && terminal
            && facets == expected_facets
            && points.len() == factorial(n) + 1
            && points == brute
            && newton)
        {
            return fail(format!(
                "n = {n}: reflexive {reflexive}, terminal {terminal}, facets {facets}, points {}, newton {newton}",
                points.len()
            ));
        }
        notes.push(format!("n = {n}: {facets} facets, {} points", points.len()));
    }
    let five = lattice_points_enumerate(5).expect("within guard").len();
    verdict(
        five == factorial(5) + 1,
        format!("{}; n = 5: {five} points", notes.join("; ")),
    )
}

fn criterion_12() -> Verdict {
    let mut worst = [0.0f64; 3];
    for seed in 0..40u64 {
        let n = 2 + (seed % 4) as usize;
        let p = common::random_slice_point(n, seed);
        let w = common::random_weights(n, seed, 0.2);
        worst[0] = worst[0].max(common::gradient_fd_error(&p.embed(), &w, 1e-6));
        worst[1] = worst[1].max(common::hessian_symmetry_error(&p, &w));
        worst[2] = worst[2].max(common::hessian_jacobian_error(&p, &w, 1e-6));
        let again = regauge(&p.embed()).expect("slice point");
        if again != p {
            return fail(format!("regauge not idempotent at seed {seed}"));
        }
    }
    let cfg = SolveConfig {
        starts: 60,
        seed: 5,
        ..SolveConfig::default()
    };
    let w = WeightMatrix::uniform(4);
    let runs: Vec<String> = [Execution::Auto, Execution::Auto, Execution::Sequential]
        .into_iter()
        .map(|e| {
            serde_json::to_string_pretty(
                &multistart_with(4, &w, &cfg, e)
                    .expect("valid config")
                    .clusters,
            )
            .unwrap()
        })
        .collect();
    let deterministic = runs[0] == runs[1] && runs[0] == runs[2];
    verdict(
        worst[0] < 1e-6 && worst[1] < 1e-10 && worst[2] < 1e-6 && deterministic,
        format!(
            "gradient fd {:.1e}, symmetry {:.1e}, jacobian {:.1e}, regauge exact, byte-identical JSON {deterministic}",
            worst[0], worst[1], worst[2]
        ),
    )
}

type Criterion = (&'static str, Duration, Box<dyn Fn() -> Verdict>);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (
            "n=2 exact reproduction",
            Duration::from_secs(1),
            Box::new(criterion_1),
        ),
        (
            "Fourier criticality",
            Duration::from_secs(1),
            Box::new(criterion_2),
        ),
        (
            "finiteness for n=3,5",
            Duration::from_secs(600),
            Box::new(criterion_3),
        ),
        (
            "family for n=4",
            Duration::from_secs(300),
            Box::new(criterion_4),
        ),
        (
            "family for n=6 (nullity >= 4)",
            Duration::from_secs(1800),
            Box::new(|| family_search(6, 4)),
        ),
        (
            "family for n=7 (nullity >= 1)",
            Duration::from_secs(1800),
            Box::new(|| family_search(7, 1)),
        ),
        (
            "symplectic pullback",
            Duration::from_secs(60),
            Box::new(criterion_7),
        ),
        (
            "rank-k lemma",
            Duration::from_secs(60),
            Box::new(criterion_8),
        ),
        (
            "KKS commutation",
            Duration::from_secs(1),
            Box::new(criterion_9),
        ),
        (
            "psi relations",
            Duration::from_secs(1),
            Box::new(criterion_10),
        ),
        (
            "Birkhoff certificates",
            Duration::from_secs(60),
            Box::new(criterion_11),
        ),
        (
            "property suites",
            Duration::from_secs(60),
            Box::new(criterion_12),
        ),
    ];
    let mut failures = 0;
    for (index, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let passed = v.passed && in_time;
        if !passed {
            failures += 1;
        }
        let timing = if in_time { "" } else { " [over time budget]" };
        println!(
            "{} {:>2} {name}: {} ({:.2} s){timing}",
            if passed { "PASS" } else { "FAIL" },
            index + 1,
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
