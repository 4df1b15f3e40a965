//! Dense complex linear algebra for small square matrices.
//!
//! Matrices are stored row-major. Determinants, inverses and linear solves use
//! LU factorisation with partial pivoting; singular values come from the
//! nalgebra SVD.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{seeded, StreamRng};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Relative pivot floor for LU: a pivot below `floor * max row norm` is singular.
pub const DEFAULT_PIVOT_FLOOR: f64 = 1e-12;

/// Singular values below this absolute level make the whole matrix numerically zero.
pub const SPECTRUM_ABSOLUTE_FLOOR: f64 = 1e-300;

/// Dense n x n complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and non-finite values.
    pub fn new(n: usize, data: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "matrix dimension must be positive".into(),
            ));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        if let Some(index) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { n, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            data.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self::new(n, data)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { ONE } else { ZERO })
    }

    /// Matrix unit with a single 1 at `(row, col)`.
    pub fn unit(n: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(n);
        m[(row, col)] = ONE;
        m
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        singular_values(self).first().copied().unwrap_or(0.0)
    }

    pub fn min_entry_modulus(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Row and column of the first exactly-zero entry, if any.
    pub fn first_zero_entry(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|z| *z == ZERO)
            .map(|k| (k / self.n, k % self.n))
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn check_same_dim(&self, other: &Self) {
        assert_eq!(self.n, other.n, "matrix dimension mismatch");
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        ComplexMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        ComplexMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale(-ONE)
    }
}

/// JSON literal `{ "n": int, "re": [row-major], "im": [row-major] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixLiteral {
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&ComplexMatrix> for MatrixLiteral {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            n: m.n,
            re: m.data.iter().map(|z| z.re).collect(),
            im: m.data.iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<MatrixLiteral> for ComplexMatrix {
    type Error = Error;
    fn try_from(lit: MatrixLiteral) -> Result<Self> {
        if lit.re.len() != lit.im.len() {
            return Err(Error::DimensionMismatch {
                expected: lit.re.len(),
                got: lit.im.len(),
            });
        }
        let data = lit
            .re
            .iter()
            .zip(&lit.im)
            .map(|(&r, &i)| C64::new(r, i))
            .collect();
        ComplexMatrix::new(lit.n, data)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixLiteral::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let lit = MatrixLiteral::deserialize(d)?;
        ComplexMatrix::try_from(lit).map_err(serde::de::Error::custom)
    }
}

/// LU factorisation with partial pivoting, `P A = L U` packed in one buffer.
struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
    swaps: usize,
}

/// Factorises `a`; `None` when some pivot falls below `floor`.
fn lu_factor(a: &ComplexMatrix, floor: f64) -> std::result::Result<Lu, f64> {
    let n = a.n;
    let mut lu = a.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    for k in 0..n {
        let (p, pivot_mag) =
            (k..n)
                .map(|r| (r, lu[r * n + k].norm()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pivot_mag <= floor || pivot_mag == 0.0 {
            return Err(pivot_mag);
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            swaps += 1;
        }
        let pivot = lu[k * n + k];
        for r in k + 1..n {
            let factor = lu[r * n + k] / pivot;
            lu[r * n + k] = factor;
            if factor != ZERO {
                for j in k + 1..n {
                    let u = lu[k * n + j];
                    lu[r * n + j] -= factor * u;
                }
            }
        }
    }
    Ok(Lu { n, lu, perm, swaps })
}

impl Lu {
    #[allow(clippy::needless_range_loop)]
    fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    fn det(&self) -> C64 {
        let d: C64 = (0..self.n).map(|i| self.lu[i * self.n + i]).product();
        if self.swaps % 2 == 1 {
            -d
        } else {
            d
        }
    }
}

fn max_row_norm(a: &ComplexMatrix) -> f64 {
    (0..a.n)
        .map(|i| a.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

fn absolute_floor(a: &ComplexMatrix, relative: f64) -> f64 {
    relative * max_row_norm(a)
}

/// Determinant by pivoted elimination. Returns exactly 0 when elimination hits a zero column.
pub fn det(m: &ComplexMatrix) -> C64 {
    match lu_factor(m, 0.0) {
        Ok(lu) => lu.det(),
        Err(_) => ZERO,
    }
}

/// Inverse with the default pivot floor.
pub fn invert(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    invert_with_floor(m, DEFAULT_PIVOT_FLOOR)
}

/// Inverse; fails with `SingularMatrix` when a pivot drops below `relative_floor * max row norm`.
pub fn invert_with_floor(m: &ComplexMatrix, relative_floor: f64) -> Result<ComplexMatrix> {
    let floor = absolute_floor(m, relative_floor);
    let lu = lu_factor(m, floor).map_err(|pivot| Error::SingularMatrix { pivot, floor })?;
    let n = m.n;
    let mut inv = ComplexMatrix::zeros(n);
    let mut e = vec![ZERO; n];
    for j in 0..n {
        e.iter_mut().for_each(|z| *z = ZERO);
        e[j] = ONE;
        let col = lu.solve(&e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Ok(inv)
}

/// Solves `a x = b`.
pub fn solve(a: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>> {
    if b.len() != a.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            got: b.len(),
        });
    }
    let floor = absolute_floor(a, DEFAULT_PIVOT_FLOOR);
    let lu = lu_factor(a, floor).map_err(|pivot| Error::SingularMatrix { pivot, floor })?;
    Ok(lu.solve(b))
}

/// Singular values, sorted descending.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Full SVD `m = U diag(s) V^H` with singular values sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub values: Vec<f64>,
    /// Columns are the left singular vectors.
    pub u: ComplexMatrix,
    /// Columns are the right singular vectors.
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn of(m: &ComplexMatrix) -> Self {
        let n = m.n;
        let svd = m.to_nalgebra().svd(true, true);
        let u = svd.u.expect("left singular vectors requested");
        let v_t = svd.v_t.expect("right singular vectors requested");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let values = order.iter().map(|&k| svd.singular_values[k]).collect();
        let u_sorted = ComplexMatrix::from_fn(n, |i, j| u[(i, order[j])]);
        let v_sorted = ComplexMatrix::from_fn(n, |i, j| v_t[(order[j], i)].conj());
        Self {
            values,
            u: u_sorted,
            v: v_sorted,
        }
    }

    /// Right singular vector `k` (unit norm).
    pub fn right_vector(&self, k: usize) -> Vec<C64> {
        (0..self.v.n).map(|i| self.v[(i, k)]).collect()
    }

    /// Minimum-norm least-squares solution, discarding singular values below
    /// `relative_cutoff * largest`.
    pub fn solve_min_norm(&self, b: &[C64], relative_cutoff: f64) -> Vec<C64> {
        let n = self.u.n;
        let cutoff = relative_cutoff * self.values.first().copied().unwrap_or(0.0);
        let mut x = vec![ZERO; n];
        for (k, &s) in self.values.iter().enumerate() {
            if s <= cutoff || s == 0.0 {
                continue;
            }
            let coeff: C64 = (0..n).map(|i| self.u[(i, k)].conj() * b[i]).sum::<C64>() / s;
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += coeff * self.v[(i, k)];
            }
        }
        x
    }
}

/// Numeric rank report over the singular values of a square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub values: Vec<f64>,
    pub rank: usize,
    pub nullity: usize,
    pub tolerance_used: f64,
}

impl SpectrumReport {
    /// Classifies descending singular values: values below `tol * largest` are null.
    pub fn from_values(values: Vec<f64>, tol: f64) -> Self {
        let n = values.len();
        let largest = values.first().copied().unwrap_or(0.0);
        let nullity = if largest < SPECTRUM_ABSOLUTE_FLOOR {
            n
        } else {
            values.iter().filter(|&&s| s < tol * largest).count()
        };
        Self {
            values,
            rank: n - nullity,
            nullity,
            tolerance_used: tol,
        }
    }
}

pub fn singular_spectrum(m: &ComplexMatrix, tol: f64) -> Result<SpectrumReport> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN is rejected too
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "spectrum tolerance must be positive, got {tol}"
        )));
    }
    Ok(SpectrumReport::from_values(singular_values(m), tol))
}

pub fn numeric_rank(m: &ComplexMatrix, tol: f64) -> usize {
    SpectrumReport::from_values(singular_values(m), tol).rank
}

/// `g_jk = exp(2 pi i jk / n)` for `j, k = 0..n-1`.
pub fn fourier_matrix(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |j, k| {
        // reduce jk mod n first so the angle stays small and the phases exact at quarter turns
        let e = (j * k) % n;
        root_of_unity(e, n)
    })
}

fn root_of_unity(e: usize, n: usize) -> C64 {
    if (4 * e).is_multiple_of(n) {
        match 4 * e / n {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    } else {
        C64::from_polar(1.0, 2.0 * PI * e as f64 / n as f64)
    }
}

/// Random point of the torus `(C*)^{n^2}`: uniform phase, log-uniform modulus in `[low, high]`.
pub fn random_torus_matrix(
    n: usize,
    seed: u64,
    modulus_range: (f64, f64),
) -> Result<ComplexMatrix> {
    check_modulus_range(modulus_range)?;
    let mut rng = seeded(seed, 0);
    Ok(random_torus_matrix_from(n, &mut rng, modulus_range))
}

pub(crate) fn check_modulus_range((low, high): (f64, f64)) -> Result<()> {
    if !(low > 0.0 && low <= high && high.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "modulus range must satisfy 0 < low <= high, got ({low}, {high})"
        )));
    }
    Ok(())
}

pub(crate) fn random_torus_entry(rng: &mut StreamRng, (low, high): (f64, f64)) -> C64 {
    let (ll, lh) = (low.ln(), high.ln());
    let t: f64 = rng.random();
    let modulus = (ll + t * (lh - ll)).exp().clamp(low, high);
    let phase: f64 = rng.random::<f64>() * 2.0 * PI;
    C64::from_polar(modulus, phase)
}

pub(crate) fn random_torus_matrix_from(
    n: usize,
    rng: &mut StreamRng,
    range: (f64, f64),
) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| random_torus_entry(rng, range))
}

/// Matrix with independent standard complex Gaussian-like entries (Box-Muller).
pub(crate) fn random_gaussian_matrix(n: usize, rng: &mut StreamRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| random_gaussian(rng))
}

pub(crate) fn random_gaussian(rng: &mut StreamRng) -> C64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    C64::from_polar(r / 2f64.sqrt(), 2.0 * PI * u2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn hadamard2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]]).unwrap()
    }

    fn ones(n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |_, _| ONE)
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(det(&ComplexMatrix::identity(3)), ONE);
        assert!((det(&hadamard2()) - c(-2.0)).norm() < 1e-15);
        assert_eq!(det(&ones(3)), ZERO);
    }

    #[test]
    fn inverse_examples() {
        let id = ComplexMatrix::identity(4);
        assert_eq!(invert(&id).unwrap(), id);
        let inv = invert(&hadamard2()).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, -0.5]]).unwrap();
        assert!((&inv - &expected).max_abs() < 1e-15);
        match invert(&ones(3)) {
            Err(Error::SingularMatrix { pivot, .. }) => assert!(pivot < 1e-12),
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
    }

    #[test]
    fn spectrum_examples() {
        let r = singular_spectrum(&ComplexMatrix::identity(4), 1e-8).unwrap();
        assert_eq!((r.rank, r.nullity), (4, 0));

        let p = ComplexMatrix::diagonal(&[ONE, ZERO, ZERO]);
        let r = singular_spectrum(&p, 1e-8).unwrap();
        assert_eq!((r.rank, r.nullity), (1, 2));

        let r = singular_spectrum(&ones(2), 1e-8).unwrap();
        assert_eq!(r.rank, 1);
        assert!((r.values[0] - 2.0).abs() < 1e-14 && r.values[1].abs() < 1e-14);

        let r = singular_spectrum(&ComplexMatrix::zeros(3), 1e-8).unwrap();
        assert_eq!(r.nullity, 3);
        assert!(singular_spectrum(&ones(2), 0.0).is_err());
    }

    #[test]
    fn fourier_examples() {
        assert_eq!(fourier_matrix(1), ComplexMatrix::identity(1));
        assert_eq!(fourier_matrix(2), hadamard2());
        assert_eq!(fourier_matrix(4)[(1, 1)], C64::new(0.0, 1.0));
    }

    #[test]
    fn fourier_is_scaled_unitary() {
        for n in 1..=16 {
            let f = fourier_matrix(n);
            assert!(f.entries().iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
            let gram = (&f * &f.adjoint()).scale(c(1.0 / n as f64));
            assert!(
                (&gram - &ComplexMatrix::identity(n)).max_abs() < 1e-12,
                "n = {n}"
            );
        }
    }

    #[test]
    fn torus_samples() {
        let a = random_torus_matrix(3, 7, (0.5, 2.0)).unwrap();
        let b = random_torus_matrix(3, 7, (0.5, 2.0)).unwrap();
        let other = random_torus_matrix(3, 8, (0.5, 2.0)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
        assert!(a.entries().iter().all(|z| (0.5..=2.0).contains(&z.norm())));
        assert!(random_torus_matrix(3, 7, (2.0, 0.5)).is_err());
        assert!(random_torus_matrix(3, 7, (0.0, 1.0)).is_err());
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(
            ComplexMatrix::new(2, vec![ONE; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ComplexMatrix::new(1, vec![C64::new(f64::NAN, 0.0)]),
            Err(Error::NonFinite { index: 0 })
        ));
    }

    #[test]
    fn literal_round_trip() {
        let f = fourier_matrix(3);
        let json = serde_json::to_string(&f).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert!(
            serde_json::from_str::<ComplexMatrix>(r#"{"n":2,"re":[1,2,3],"im":[0,0,0]}"#).is_err()
        );
    }

    #[test]
    fn conjugated_coordinate_projector_has_rank_one() {
        let g = random_torus_matrix(5, 11, (0.5, 2.0)).unwrap();
        let gi = invert(&g).unwrap();
        for i in 0..5 {
            let p = &(&g * &ComplexMatrix::unit(5, i, i)) * &gi;
            assert_eq!(numeric_rank(&p, 1e-8), 1);
        }
    }

    #[test]
    fn min_norm_solve_recovers_range_component() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        let x = Svd::of(&a).solve_min_norm(&[c(2.0), c(2.0)], 1e-10);
        assert!((x[0] - ONE).norm() < 1e-12 && (x[1] - ONE).norm() < 1e-12);
    }
}
