//! The potential `F(g) = sum_ij lambda_ij log g_ji - log det g` and its derivatives.
//!
//! Index convention: the gradient matrix `A` has `a_ij = dF/dg_ji`. Note the
//! transposition between `(ij)` on `A` / `lambda` and `(ji)` on `g`. With
//! `p_i = g q_i g^-1` one has `Tr(p_i q_j) = g_ji * ghat_ij`, where `ghat = g^-1`,
//! so `a_ij = (lambda_ij - Tr(p_i q_j)) / g_ji`.
//!
//! Critical points are located from the rational expressions only (gradient,
//! critical residual, Hessian). The logarithmic value itself is branch
//! dependent and is only used for reporting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det, invert, ComplexMatrix, C64, ONE, ZERO};

/// Tolerance for the row/column sum constraints on weights.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Unbiasedness targets `lambda_ij`, `k` rows by `n` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    k: usize,
    n: usize,
    entries: Vec<C64>,
}

impl WeightMatrix {
    pub fn new(k: usize, n: usize, entries: Vec<C64>) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::InvalidConfig(
                "weight matrix dimensions must be positive".into(),
            ));
        }
        if entries.len() != k * n {
            return Err(Error::DimensionMismatch {
                expected: k * n,
                got: entries.len(),
            });
        }
        if let Some(index) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { k, n, entries })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let k = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0)))
            .collect();
        Self::new(k, n, entries)
    }

    /// All entries `1/n`: the mutually-unbiased case.
    pub fn uniform(n: usize) -> Self {
        Self {
            k: n,
            n,
            entries: vec![C64::new(1.0 / n as f64, 0.0); n * n],
        }
    }

    /// Parses `"uniform:<n>"` or an inline JSON weight literal.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("uniform:") {
            let n: usize = rest
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad uniform weight shorthand '{spec}'")))?;
            if n == 0 {
                return Err(Error::InvalidConfig("uniform weights need n >= 1".into()));
            }
            return Ok(Self::uniform(n));
        }
        let lit: WeightLiteral = serde_json::from_str(spec)?;
        Self::try_from(lit)
    }

    pub fn rows(&self) -> usize {
        self.k
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn is_square(&self) -> bool {
        self.k == self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    /// First `k` rows as a new weight matrix.
    pub fn top_rows(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k {
            return Err(Error::InvalidConfig(format!(
                "cannot take {k} rows of {}",
                self.k
            )));
        }
        Self::new(k, self.n, self.entries[..k * self.n].to_vec())
    }

    /// Column sums `lambda_j = sum_i lambda_ij`.
    pub fn column_sums(&self) -> Vec<C64> {
        (0..self.n)
            .map(|j| (0..self.k).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn row_sums(&self) -> Vec<C64> {
        (0..self.k)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).sum())
            .collect()
    }

    pub fn is_uniform(&self) -> bool {
        let u = C64::new(1.0 / self.n as f64, 0.0);
        self.is_square() && self.entries.iter().all(|&z| z == u)
    }

    /// Checks nonzero entries and the sum constraints.
    ///
    /// Row sums `sum_j lambda_ij = 1` are required (forced by `Tr p_i = 1`).
    /// Column sums are required when `k = n`; for `k < n` their deviations are
    /// recorded in `notes` without invalidating the weights.
    pub fn validate(&self) -> WeightReport {
        let mut report = WeightReport::default();
        for i in 0..self.k {
            for j in 0..self.n {
                if self.get(i, j) == ZERO {
                    report.violations.push(WeightViolation {
                        constraint: WeightConstraint::NonzeroEntry,
                        index: vec![i, j],
                        deviation: 0.0,
                    });
                }
            }
        }
        for (i, s) in self.row_sums().into_iter().enumerate() {
            let deviation = (s - ONE).norm();
            if deviation > WEIGHT_SUM_TOLERANCE {
                report.violations.push(WeightViolation {
                    constraint: WeightConstraint::RowSum,
                    index: vec![i],
                    deviation,
                });
            }
        }
        for (j, s) in self.column_sums().into_iter().enumerate() {
            let deviation = (s - ONE).norm();
            if deviation > WEIGHT_SUM_TOLERANCE {
                let v = WeightViolation {
                    constraint: WeightConstraint::ColumnSum,
                    index: vec![j],
                    deviation,
                };
                if self.is_square() {
                    report.violations.push(v);
                } else {
                    report.notes.push(v);
                }
            }
        }
        report
    }

    pub(crate) fn require_square(&self, n: usize) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Precondition(format!(
                "square weight matrix required, got {}x{}",
                self.k, self.n
            )));
        }
        if self.n != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.n,
            });
        }
        Ok(())
    }
}

/// JSON form `{ "k": int, "n": int, "re": [...], "im": [...] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightLiteral {
    pub k: usize,
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl TryFrom<WeightLiteral> for WeightMatrix {
    type Error = Error;
    fn try_from(lit: WeightLiteral) -> Result<Self> {
        if lit.re.len() != lit.im.len() {
            return Err(Error::DimensionMismatch {
                expected: lit.re.len(),
                got: lit.im.len(),
            });
        }
        let entries = lit
            .re
            .iter()
            .zip(&lit.im)
            .map(|(&r, &i)| C64::new(r, i))
            .collect();
        WeightMatrix::new(lit.k, lit.n, entries)
    }
}

impl From<&WeightMatrix> for WeightLiteral {
    fn from(w: &WeightMatrix) -> Self {
        Self {
            k: w.k,
            n: w.n,
            re: w.entries.iter().map(|z| z.re).collect(),
            im: w.entries.iter().map(|z| z.im).collect(),
        }
    }
}

impl Serialize for WeightMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WeightLiteral::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        WeightMatrix::try_from(WeightLiteral::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightConstraint {
    NonzeroEntry,
    RowSum,
    ColumnSum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightViolation {
    pub constraint: WeightConstraint,
    /// Zero-based `[i, j]` for entries, `[i]` for row sums, `[j]` for column sums.
    pub index: Vec<usize>,
    pub deviation: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub violations: Vec<WeightViolation>,
    /// Column-sum deviations for `k < n`, reported but not enforced.
    pub notes: Vec<WeightViolation>,
}

impl WeightReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Point of the gauge slice: first row and column of `g` are all 1, the
/// remaining `(n-1)^2` entries are free and stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeSlicePoint {
    n: usize,
    free: Vec<C64>,
}

impl GaugeSlicePoint {
    pub fn new(n: usize, free: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "slice dimension must be positive".into(),
            ));
        }
        let m = n - 1;
        if free.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                got: free.len(),
            });
        }
        if let Some(index) = free
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        if let Some(k) = free.iter().position(|&z| z == ZERO) {
            return Err(Error::ZeroEntry {
                row: k / m + 1,
                col: k % m + 1,
            });
        }
        Ok(Self { n, free })
    }

    /// Reads a matrix already normalised to the slice.
    pub fn from_matrix(g: &ComplexMatrix) -> Result<Self> {
        let n = g.n();
        for t in 0..n {
            if g[(0, t)] != ONE || g[(t, 0)] != ONE {
                return Err(Error::Precondition(
                    "matrix is not on the gauge slice (first row/column must be 1)".into(),
                ));
            }
        }
        let free = (1..n)
            .flat_map(|i| (1..n).map(move |j| (i, j)))
            .map(|(i, j)| g[(i, j)])
            .collect();
        Self::new(n, free)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn free(&self) -> &[C64] {
        &self.free
    }

    /// Number of free coordinates, `(n-1)^2`.
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    pub fn embed(&self) -> ComplexMatrix {
        let n = self.n;
        ComplexMatrix::from_fn(n, |i, j| {
            if i == 0 || j == 0 {
                ONE
            } else {
                self.free[(i - 1) * (n - 1) + (j - 1)]
            }
        })
    }

    /// Index of free coordinate `g_ab` (`1 <= a, b < n`).
    pub fn index_of(&self, a: usize, b: usize) -> usize {
        (a - 1) * (self.n - 1) + (b - 1)
    }

    pub fn coordinate(&self, v: usize) -> (usize, usize) {
        (v / (self.n - 1) + 1, v % (self.n - 1) + 1)
    }
}

impl Serialize for GaugeSlicePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SliceLiteral {
            n: self.n,
            re: self.free.iter().map(|z| z.re).collect(),
            im: self.free.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaugeSlicePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let lit = SliceLiteral::deserialize(d)?;
        if lit.re.len() != lit.im.len() {
            return Err(serde::de::Error::custom("re/im length mismatch"));
        }
        let free = lit
            .re
            .iter()
            .zip(&lit.im)
            .map(|(&r, &i)| C64::new(r, i))
            .collect();
        GaugeSlicePoint::new(lit.n, free).map_err(serde::de::Error::custom)
    }
}

/// Free entries of a slice point, `{ "n": int, "re": [...], "im": [...] }` of length `(n-1)^2`.
#[derive(Serialize, Deserialize)]
struct SliceLiteral {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// The matrix `A` with `a_ij = dF/dg_ji`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMatrix {
    a: ComplexMatrix,
}

impl GradientMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.a
    }

    /// `dF/dg_ij`, i.e. `a_ji`.
    pub fn d_dg(&self, i: usize, j: usize) -> C64 {
        self.a[(j, i)]
    }

    pub fn max_abs(&self) -> f64 {
        self.a.max_abs()
    }
}

fn require_nonzero_entries(g: &ComplexMatrix) -> Result<()> {
    match g.first_zero_entry() {
        Some((row, col)) => Err(Error::ZeroEntry { row, col }),
        None => Ok(()),
    }
}

/// `a_ij = lambda_ij / g_ji - ghat_ij` (note `g_ji`, transposed).
pub fn grad_f(g: &ComplexMatrix, w: &WeightMatrix) -> Result<GradientMatrix> {
    w.require_square(g.n())?;
    require_nonzero_entries(g)?;
    let ghat = invert(g)?;
    let a = ComplexMatrix::from_fn(g.n(), |i, j| w.get(i, j) / g[(j, i)] - ghat[(i, j)]);
    Ok(GradientMatrix { a })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualEquation {
    pub i: usize,
    pub k: usize,
    pub value: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalResidual {
    pub norm: f64,
    pub per_equation: Vec<ResidualEquation>,
}

/// Values of `sum_j lambda_jk g_ij / g_kj` for all ordered pairs `i != k`.
pub fn critical_residual(g: &ComplexMatrix, w: &WeightMatrix) -> Result<CriticalResidual> {
    w.require_square(g.n())?;
    require_nonzero_entries(g)?;
    let n = g.n();
    let mut per_equation = Vec::with_capacity(n * n.saturating_sub(1));
    for i in 0..n {
        for k in 0..n {
            if i == k {
                continue;
            }
            let value = (0..n).map(|j| w.get(j, k) * g[(i, j)] / g[(k, j)]).sum();
            per_equation.push(ResidualEquation { i, k, value });
        }
    }
    let norm = per_equation
        .iter()
        .map(|e| e.value.norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(CriticalResidual { norm, per_equation })
}

/// `E^n = det(g)^n / prod_ij g_ij` for uniform weights: the single-valued power of `E`.
pub fn potential_power(g: &ComplexMatrix) -> Result<C64> {
    require_nonzero_entries(g)?;
    let n = g.n();
    let d = det(g);
    let prod: C64 = g.entries().iter().product();
    Ok(d.powu(n as u32) / prod)
}

/// `sum_ij lambda_ij log g_ji - log det g` on principal branches. Branch dependent.
pub fn log_potential(g: &ComplexMatrix, w: &WeightMatrix) -> Result<C64> {
    w.require_square(g.n())?;
    require_nonzero_entries(g)?;
    invert(g)?;
    let n = g.n();
    let mut s = ZERO;
    for i in 0..n {
        for j in 0..n {
            s += w.get(i, j) * g[(j, i)].ln();
        }
    }
    Ok(s - det(g).ln())
}

/// Gradient components `dF/dg_ab` for the free slice coordinates, in slice order.
pub fn slice_gradient(p: &GaugeSlicePoint, w: &WeightMatrix) -> Result<Vec<C64>> {
    Ok(slice_derivatives(p, w, false)?.0)
}

/// Complex Hessian of `F` in the free slice coordinates:
/// `d2F/dg_ab dg_cd = -lambda_ba delta / g_ab^2 + ghat_bc ghat_da`.
pub fn hessian_slice(p: &GaugeSlicePoint, w: &WeightMatrix) -> Result<ComplexMatrix> {
    Ok(slice_derivatives(p, w, true)?.1.expect("hessian requested"))
}

/// Gradient and (optionally) Hessian on the slice from a single inversion.
pub(crate) fn slice_derivatives(
    p: &GaugeSlicePoint,
    w: &WeightMatrix,
    with_hessian: bool,
) -> Result<(Vec<C64>, Option<ComplexMatrix>)> {
    let n = p.n();
    w.require_square(n)?;
    let g = p.embed();
    let ghat = invert(&g)?;
    let dim = p.dim();
    let coords: Vec<(usize, usize)> = (0..dim).map(|v| p.coordinate(v)).collect();
    // dF/dg_ab = lambda_ba / g_ab - ghat_ba
    let grad = coords
        .iter()
        .map(|&(a, b)| w.get(b, a) / g[(a, b)] - ghat[(b, a)])
        .collect();
    let hess = with_hessian.then(|| {
        ComplexMatrix::from_fn(dim, |r, c| {
            let (a, b) = coords[r];
            let (cc, d) = coords[c];
            let mut v = ghat[(b, cc)] * ghat[(d, a)];
            if r == c {
                v -= w.get(b, a) / (g[(a, b)] * g[(a, b)]);
            }
            v
        })
    });
    Ok((grad, hess))
}

/// Exact Hessian of `F` in logarithmic coordinates `y_ij = log g_ij` over all
/// `n^2` entries (index `i*n + j`). Entry `((ij),(kl))` is
/// `g_ij ghat_jk g_kl ghat_li`, and the diagonal is `t^2 - t` with
/// `t = g_ij ghat_ji`. It does not depend on the weights and is invariant
/// under the two-sided torus action; row/column relabelings permute it.
pub fn log_coordinate_hessian(g: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = g.n();
    let ghat = invert(g)?;
    Ok(ComplexMatrix::from_fn(n * n, |r, c| {
        let (i, j) = (r / n, r % n);
        let (k, l) = (c / n, c % n);
        if r == c {
            let t = g[(i, j)] * ghat[(j, i)];
            t * t - t
        } else {
            g[(i, j)] * ghat[(j, k)] * g[(k, l)] * ghat[(l, i)]
        }
    }))
}
