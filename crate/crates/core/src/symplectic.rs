//! Moment maps, the cotangent embedding `(g, A) -> (r_1, .., r_n)` and the
//! pointwise comparison of the two symplectic forms it relates.
//!
//! Two-forms are evaluated as antisymmetrized pairings on explicit tangent
//! vectors. A cotangent point satisfies the torus moment constraint
//! `diag(A g) = 0`; tangent vectors satisfy its linearization
//! `diag(dA g + A dg) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    invert, numeric_rank, random_gaussian, random_gaussian_matrix, singular_values, ComplexMatrix,
    Svd, C64, ZERO,
};
use crate::potential::{hessian_slice, WeightMatrix};
use crate::rng::{seeded, StreamRng};
use crate::solver::{par_map, CriticalPointRecord};
use crate::verify::CheckReport;

/// Bound on `|diag(A g)|`, relative to `max(1, |A| |g|)` in Frobenius norm.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-12;
/// Largest accepted condition number of `1 + g A`.
pub const MAX_CONDITION: f64 = 1e6;
/// Condition bound used when sampling random points, well inside [`MAX_CONDITION`].
const SAMPLE_CONDITION: f64 = 1e3;

/// `Sum p_i - P`.
pub fn moment_sum(ps: &[ComplexMatrix], p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = p.n();
    if let Some(m) = ps.iter().find(|m| m.n() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.n(),
        });
    }
    Ok(ps.iter().fold(-p, |acc, m| &acc + m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaSides {
    /// The sum is idempotent of numeric rank `k`.
    pub sum_is_projector: bool,
    pub pairwise_orthogonal: bool,
}

/// Evaluates both sides of the rank-k lemma independently.
///
/// Deviations are relative: `|S^2 - S| <= tol |S|^2` for the sum and
/// `|p_a p_b| <= tol |p_a| |p_b|` for each ordered pair.
pub fn rank_k_lemma_check(ps: &[ComplexMatrix], tol: f64) -> Result<LemmaSides> {
    let Some(first) = ps.first() else {
        return Ok(LemmaSides {
            sum_is_projector: true,
            pairwise_orthogonal: true,
        });
    };
    let n = first.n();
    let s = moment_sum(ps, &ComplexMatrix::zeros(n))?;
    let s_norm = s.op_norm();
    let idempotent = (&(&s * &s) - &s).op_norm() <= tol * s_norm.max(1.0).powi(2);
    let sum_is_projector = idempotent && numeric_rank(&s, tol) == ps.len();
    let norms: Vec<f64> = ps.iter().map(ComplexMatrix::op_norm).collect();
    let pairwise_orthogonal = (0..ps.len()).all(|a| {
        (0..ps.len()).all(|b| a == b || (&ps[a] * &ps[b]).op_norm() <= tol * norms[a] * norms[b])
    });
    Ok(LemmaSides {
        sum_is_projector,
        pairwise_orthogonal,
    })
}

/// Rank-one idempotent `u v^T / (v^T u)` with Gaussian `u`, `v`.
pub fn random_rank_one_idempotent(n: usize, rng: &mut StreamRng) -> ComplexMatrix {
    loop {
        let u: Vec<C64> = (0..n).map(|_| random_gaussian(rng)).collect();
        let v: Vec<C64> = (0..n).map(|_| random_gaussian(rng)).collect();
        let pairing: C64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        let scale = u.iter().map(|z| z.norm_sqr()).sum::<f64>()
            * v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        // reject nearly isotropic pairs, whose idempotent has a huge norm
        if pairing.norm_sqr() > 1e-2 * scale {
            return ComplexMatrix::from_fn(n, |i, j| u[i] * v[j] / pairing);
        }
    }
}

/// Random invertible matrix with condition number at most `max_condition`.
fn random_conditioned(n: usize, rng: &mut StreamRng, max_condition: f64) -> ComplexMatrix {
    loop {
        let g = random_gaussian_matrix(n, rng);
        if condition(&g) <= max_condition {
            return g;
        }
    }
}

fn condition(m: &ComplexMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// `k` pairwise orthogonal rank-one idempotents `h e_ii h^-1`.
pub fn random_orthogonal_tuple(n: usize, k: usize, rng: &mut StreamRng) -> Vec<ComplexMatrix> {
    let h = random_conditioned(n, rng, SAMPLE_CONDITION);
    let hinv = invert(&h).expect("conditioned sample is invertible");
    (0..k.min(n))
        .map(|i| ComplexMatrix::from_fn(n, |r, c| h[(r, i)] * hinv[(i, c)]))
        .collect()
}

/// Adds `c_i conj(g_{., i})` to row `i` of `x` so that `diag(x g)` drops by `d`.
///
/// This is the minimum-norm change of `x` achieving the shift; it exists
/// whenever every column of `g` is nonzero.
fn cancel_diagonal(x: &mut ComplexMatrix, g: &ComplexMatrix, d: &[C64]) {
    let n = g.n();
    for i in 0..n {
        let col_norm: f64 = (0..n).map(|k| g[(k, i)].norm_sqr()).sum();
        let c = -d[i] / col_norm;
        for k in 0..n {
            x[(i, k)] += c * g[(k, i)].conj();
        }
    }
}

fn diag_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Vec<C64> {
    let n = a.n();
    (0..n)
        .map(|i| (0..n).map(|k| a[(i, k)] * b[(k, i)]).sum())
        .collect()
}

/// A point `(g, A)` of the cotangent bundle on the zero fiber of the torus moment map.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentPoint {
    g: ComplexMatrix,
    a: ComplexMatrix,
}

impl CotangentPoint {
    pub fn new(g: ComplexMatrix, a: ComplexMatrix) -> Result<Self> {
        if a.n() != g.n() {
            return Err(Error::DimensionMismatch {
                expected: g.n(),
                got: a.n(),
            });
        }
        invert(&g)?;
        let bound = CONSTRAINT_TOLERANCE * (a.frobenius_norm() * g.frobenius_norm()).max(1.0);
        if let Some((i, d)) = diag_of_product(&a, &g)
            .into_iter()
            .enumerate()
            .find(|(_, d)| d.norm() > bound)
        {
            return Err(Error::Precondition(format!(
                "diag(A g) must vanish; entry {i} has modulus {:e}",
                d.norm()
            )));
        }
        Ok(Self { g, a })
    }

    /// Random point with Gaussian `g`, `A` projected onto the constraint, and
    /// `cond(g)`, `cond(1 + g A)` at most 1e3.
    pub fn random(n: usize, rng: &mut StreamRng) -> Self {
        loop {
            let g = random_conditioned(n, rng, SAMPLE_CONDITION);
            let mut a = random_gaussian_matrix(n, rng);
            let d = diag_of_product(&a, &g);
            cancel_diagonal(&mut a, &g, &d);
            let m = &ComplexMatrix::identity(n) + &(&g * &a);
            if condition(&m) <= SAMPLE_CONDITION {
                return Self { g, a };
            }
        }
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn g(&self) -> &ComplexMatrix {
        &self.g
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    /// The torus action `(g t^-1, t A)` for invertible diagonal `t`.
    pub fn act(&self, t: &[C64]) -> Result<Self> {
        let n = self.n();
        if t.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: t.len(),
            });
        }
        if let Some(i) = t.iter().position(|z| *z == ZERO) {
            return Err(Error::ZeroEntry { row: i, col: i });
        }
        let g = ComplexMatrix::from_fn(n, |i, j| self.g[(i, j)] / t[j]);
        let a = ComplexMatrix::from_fn(n, |i, j| t[i] * self.a[(i, j)]);
        Ok(Self { g, a })
    }
}

/// A tangent vector `(dg, dA)` at a cotangent point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPair {
    pub dg: ComplexMatrix,
    pub da: ComplexMatrix,
}

impl TangentPair {
    pub fn zero(n: usize) -> Self {
        Self {
            dg: ComplexMatrix::zeros(n),
            da: ComplexMatrix::zeros(n),
        }
    }

    /// Adjusts `da` by the minimum-norm change making the pair tangent to the constraint at `pt`.
    pub fn constrained(pt: &CotangentPoint, dg: ComplexMatrix, mut da: ComplexMatrix) -> Self {
        let d: Vec<C64> = diag_of_product(&da, &pt.g)
            .into_iter()
            .zip(diag_of_product(&pt.a, &dg))
            .map(|(x, y)| x + y)
            .collect();
        cancel_diagonal(&mut da, &pt.g, &d);
        Self { dg, da }
    }

    /// Random constraint tangent of unit Frobenius norm.
    pub fn random(pt: &CotangentPoint, rng: &mut StreamRng) -> Self {
        let n = pt.n();
        let dg = random_gaussian_matrix(n, rng);
        let da = random_gaussian_matrix(n, rng);
        let t = Self::constrained(pt, dg, da);
        let norm = t.dg.frobenius_norm().hypot(t.da.frobenius_norm());
        let s = C64::new(1.0 / norm, 0.0);
        Self {
            dg: t.dg.scale(s),
            da: t.da.scale(s),
        }
    }

    /// `|diag(dA g + A dg)|_inf` at `pt`.
    pub fn constraint_defect(&self, pt: &CotangentPoint) -> f64 {
        diag_of_product(&self.da, &pt.g)
            .into_iter()
            .zip(diag_of_product(&pt.a, &self.dg))
            .map(|(x, y)| (x + y).norm())
            .fold(0.0, f64::max)
    }
}

struct Embedding {
    ghat: ComplexMatrix,
    /// `1 + g A`.
    m: ComplexMatrix,
    /// `p_i = g q_i g^-1`.
    ps: Vec<ComplexMatrix>,
}

fn embedding(pt: &CotangentPoint) -> Result<Embedding> {
    let n = pt.n();
    let ghat = invert(&pt.g)?;
    let m = &ComplexMatrix::identity(n) + &(&pt.g * &pt.a);
    let cond = condition(&m);
    if cond > MAX_CONDITION {
        return Err(Error::SingularMatrix {
            pivot: 1.0 / cond,
            floor: 1.0 / MAX_CONDITION,
        });
    }
    let ps = (0..n)
        .map(|i| ComplexMatrix::from_fn(n, |r, c| pt.g[(r, i)] * ghat[(i, c)]))
        .collect();
    Ok(Embedding { ghat, m, ps })
}

/// `r_i = g q_i g^-1 (1 + g A)`.
pub fn phi_embed(pt: &CotangentPoint) -> Result<Vec<ComplexMatrix>> {
    let e = embedding(pt)?;
    Ok(e.ps.iter().map(|p| p * &e.m).collect())
}

/// Directional derivatives `dr_i = dp_i (1 + g A) + p_i (dg A + g dA)` with
/// `dp_i = dg q_i g^-1 - p_i dg g^-1`.
pub fn phi_differential(pt: &CotangentPoint, t: &TangentPair) -> Result<Vec<ComplexMatrix>> {
    let n = pt.n();
    let e = embedding(pt)?;
    let dm = &(&t.dg * &pt.a) + &(&pt.g * &t.da);
    let dg_ghat = &t.dg * &e.ghat;
    Ok(e.ps
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let dg_q_ghat = ComplexMatrix::from_fn(n, |r, c| t.dg[(r, i)] * e.ghat[(i, c)]);
            let dp = &dg_q_ghat - &(p * &dg_ghat);
            &(&dp * &e.m) + &(p * &dm)
        })
        .collect())
}

fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    diag_of_product(a, b).into_iter().sum()
}

/// `Tr(dA_1 dg_2) - Tr(dA_2 dg_1)`.
pub fn omega_x(t1: &TangentPair, t2: &TangentPair) -> C64 {
    trace_of_product(&t1.da, &t2.dg) - trace_of_product(&t2.da, &t1.dg)
}

/// `Sum_i Tr(r_i d1r_i d2r_i) - Tr(r_i d2r_i d1r_i)`.
pub fn omega_y(
    rs: &[ComplexMatrix],
    drs1: &[ComplexMatrix],
    drs2: &[ComplexMatrix],
) -> Result<C64> {
    if drs1.len() != rs.len() || drs2.len() != rs.len() {
        return Err(Error::DimensionMismatch {
            expected: rs.len(),
            got: drs1.len().min(drs2.len()),
        });
    }
    let mut total = ZERO;
    for ((r, d1), d2) in rs.iter().zip(drs1).zip(drs2) {
        let n = r.n();
        if d1.n() != n || d2.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: d1.n().min(d2.n()),
            });
        }
        total += trace_of_product(&(r * d1), d2) - trace_of_product(&(r * d2), d1);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullbackReport {
    pub max_deviation: f64,
    pub trials: usize,
    pub seed: u64,
    #[serde(skip)]
    pub passed: bool,
}

/// Compares `omega_x` with `omega_y` pulled back along the embedding on
/// `trials` random unit tangent pairs; trial `t` draws from stream `t` of `seed`.
pub fn pullback_symplectic_check(
    pt: &CotangentPoint,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<PullbackReport> {
    let rs = phi_embed(pt)?;
    let deviations = par_map(trials, |trial| -> Result<f64> {
        let mut rng = seeded(seed, trial as u64);
        let t1 = TangentPair::random(pt, &mut rng);
        let t2 = TangentPair::random(pt, &mut rng);
        let d1 = phi_differential(pt, &t1)?;
        let d2 = phi_differential(pt, &t2)?;
        Ok((omega_x(&t1, &t2) - omega_y(&rs, &d1, &d2)?).norm())
    });
    let mut max_deviation: f64 = 0.0;
    for d in deviations {
        max_deviation = max_deviation.max(d?);
    }
    Ok(PullbackReport {
        max_deviation,
        trials,
        seed,
        passed: max_deviation < tol,
    })
}

/// Kirillov-Kostant-Souriau bracket of the linear functions `Tr(p M)`, `Tr(p N)` at `p`: `Tr(p [M, N])`.
pub fn kks_bracket(p: &ComplexMatrix, m: &ComplexMatrix, n: &ComplexMatrix) -> Result<C64> {
    let dim = p.n();
    if let Some(bad) = [m, n].into_iter().find(|x| x.n() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.n(),
        });
    }
    let commutator = &(m * n) - &(n * m);
    Ok(trace_of_product(p, &commutator))
}

/// Bracket on the product of orbits: `Sum_f Tr(p_f [M_f, N_f])`, where a function
/// that does not depend on factor `f` has `None` there.
pub fn product_kks_bracket(
    ps: &[ComplexMatrix],
    ms: &[Option<&ComplexMatrix>],
    ns: &[Option<&ComplexMatrix>],
) -> Result<C64> {
    let mut total = ZERO;
    for (f, p) in ps.iter().enumerate() {
        if let (Some(Some(m)), Some(Some(n))) = (ms.get(f), ns.get(f)) {
            total += kks_bracket(p, m, n)?;
        }
    }
    Ok(total)
}

/// Checks that the brackets of the functions `Tr(p observable_j)` vanish
/// exactly at every sample, both on one factor and across distinct factors
/// of the product (the samples taken as the factors).
pub fn integrable_commute_check(
    p_samples: &[ComplexMatrix],
    observables: &[ComplexMatrix],
) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let mut record = |relation: &str, indices: Vec<usize>, value: C64| {
        if value != ZERO {
            report.passed = false;
            report.violations.push(crate::verify::Violation {
                relation: relation.to_string(),
                indices,
                deviation: value.norm(),
            });
        }
    };
    for (s, p) in p_samples.iter().enumerate() {
        for (j, m) in observables.iter().enumerate() {
            for (l, n) in observables.iter().enumerate().skip(j + 1) {
                record("kks", vec![s, j, l], kks_bracket(p, m, n)?);
            }
        }
    }
    let factors = p_samples.len();
    for a in 0..factors {
        for b in 0..factors {
            if a == b {
                continue;
            }
            for (j, m) in observables.iter().enumerate() {
                for (l, n) in observables.iter().enumerate() {
                    let mut ms = vec![None; factors];
                    let mut ns = vec![None; factors];
                    ms[a] = Some(m);
                    ns[b] = Some(n);
                    record(
                        "kks_cross",
                        vec![a, b, j, l],
                        product_kks_bracket(p_samples, &ms, &ns)?,
                    );
                }
            }
        }
    }
    Ok(report)
}

/// Outcome of many independent rank-k lemma instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaBattery {
    pub n: usize,
    pub k: usize,
    pub instances: usize,
    /// Instances where the two sides of the lemma disagree.
    pub counterexamples: usize,
    pub orthogonal_observed: usize,
    pub non_orthogonal_observed: usize,
}

/// Runs `instances` lemma checks on `k`-tuples of rank-one idempotents in dimension `n`.
/// Even instances are orthogonal tuples, odd ones independent random idempotents;
/// instance `i` draws from stream `i` of `seed`.
pub fn rank_k_lemma_battery(
    n: usize,
    k: usize,
    instances: usize,
    seed: u64,
    tol: f64,
) -> Result<LemmaBattery> {
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let sides = par_map(instances, |i| {
        let mut rng = seeded(seed, i as u64);
        let tuple = if i % 2 == 0 {
            random_orthogonal_tuple(n, k, &mut rng)
        } else {
            (0..k)
                .map(|_| random_rank_one_idempotent(n, &mut rng))
                .collect()
        };
        rank_k_lemma_check(&tuple, tol)
    });
    let mut battery = LemmaBattery {
        n,
        k,
        instances,
        counterexamples: 0,
        orthogonal_observed: 0,
        non_orthogonal_observed: 0,
    };
    for s in sides {
        let s = s?;
        if s.sum_is_projector != s.pairwise_orthogonal {
            battery.counterexamples += 1;
        }
        if s.pairwise_orthogonal {
            battery.orthogonal_observed += 1;
        } else {
            battery.non_orthogonal_observed += 1;
        }
    }
    Ok(battery)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullbackSurvey {
    pub n: usize,
    pub points: Vec<PullbackReport>,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Pullback checks at `points` random valid points. Point `p` is drawn from
/// stream `p` of `seed` and its tangent pairs use seed `seed + p + 1`.
pub fn pullback_survey(
    n: usize,
    points: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<PullbackSurvey> {
    let reports = (0..points)
        .map(|p| {
            let mut rng = seeded(seed, p as u64);
            let pt = CotangentPoint::random(n, &mut rng);
            pullback_symplectic_check(&pt, trials, seed.wrapping_add(p as u64 + 1), tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = reports.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    Ok(PullbackSurvey {
        n,
        passed: reports.iter().all(|r| r.passed),
        points: reports,
        max_deviation,
    })
}

/// Integrable-system check at `samples` random rank-one idempotents against the coordinate projectors.
pub fn integrable_survey(n: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = seeded(seed, 0);
    let ps: Vec<ComplexMatrix> = (0..samples)
        .map(|_| random_rank_one_idempotent(n, &mut rng))
        .collect();
    let qs: Vec<ComplexMatrix> = (0..n).map(|i| ComplexMatrix::unit(n, i, i)).collect();
    integrable_commute_check(&ps, &qs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitFormEvidence {
    pub nullity: usize,
    pub pairs: usize,
    /// Largest `|omega|` over pairs of unit null directions; zero when fewer than two exist.
    pub max_magnitude: f64,
}

/// Evaluates the orbit form `Sum_i Tr(p_i [dp_i, dp_i'])` on pairs of Hessian
/// null directions at a critical point, pushed to the projectors `p_i = g q_i g^-1`.
///
/// Evidence only: null directions approximate tangents of the critical set.
pub fn orbit_form_on_null_directions(
    record: &CriticalPointRecord,
    w: &WeightMatrix,
) -> Result<OrbitFormEvidence> {
    let base = &record.slice_point;
    let n = base.n();
    let nullity = record.nullity;
    let pt = CotangentPoint::new(base.embed(), ComplexMatrix::zeros(n))?;
    let rs = phi_embed(&pt)?;
    let mut tangents = Vec::with_capacity(nullity);
    if nullity > 0 {
        let svd = Svd::of(&hessian_slice(base, w)?);
        for k in 0..nullity {
            let v = svd.right_vector(base.dim() - 1 - k);
            let mut dg = ComplexMatrix::zeros(n);
            for (idx, z) in v.iter().enumerate() {
                dg[base.coordinate(idx)] = *z;
            }
            let t = TangentPair {
                dg,
                da: ComplexMatrix::zeros(n),
            };
            tangents.push(phi_differential(&pt, &t)?);
        }
    }
    let mut pairs = 0;
    let mut max_magnitude: f64 = 0.0;
    for a in 0..tangents.len() {
        for b in a + 1..tangents.len() {
            pairs += 1;
            max_magnitude = max_magnitude.max(omega_y(&rs, &tangents[a], &tangents[b])?.norm());
        }
    }
    Ok(OrbitFormEvidence {
        nullity,
        pairs,
        max_magnitude,
    })
}
