//! Independent oracles shared by the property and acceptance suites.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use unbiased_core::linalg::{random_torus_matrix, ComplexMatrix, C64};
use unbiased_core::potential::{
    grad_f, hessian_slice, log_potential, slice_gradient, GaugeSlicePoint, WeightMatrix,
};
use unbiased_core::rng::seeded;
use unbiased_core::solver::regauge;

pub fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
    random_torus_matrix(n, seed, (0.5, 2.0)).expect("valid range")
}

pub fn random_slice_point(n: usize, seed: u64) -> GaugeSlicePoint {
    regauge(&random_matrix(n, seed)).expect("torus entries are nonzero")
}

/// `1/n` plus a random complex perturbation with zero row and column sums.
pub fn random_weights(n: usize, seed: u64, size: f64) -> WeightMatrix {
    let mut rng = seeded(seed, 1 << 40);
    let m: Vec<C64> = (0..n * n)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let at = |i: usize, j: usize| m[i * n + j];
    let nf = n as f64;
    let row: Vec<C64> = (0..n)
        .map(|i| (0..n).map(|j| at(i, j)).sum::<C64>() / nf)
        .collect();
    let col: Vec<C64> = (0..n)
        .map(|j| (0..n).map(|i| at(i, j)).sum::<C64>() / nf)
        .collect();
    let mean: C64 = row.iter().sum::<C64>() / nf;
    let entries = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            C64::new(1.0 / nf, 0.0) + (at(i, j) - row[i] - col[j] + mean) * size
        })
        .collect();
    WeightMatrix::new(n, n, entries).expect("square weights")
}

/// Imaginary part reduced to `(-pi, pi]`, undoing branch jumps of the logarithm.
fn unwrap_log_difference(z: C64) -> C64 {
    let im = (z.im + PI).rem_euclid(2.0 * PI) - PI;
    C64::new(z.re, im)
}

/// Largest `|analytic - central difference|` of `dF/dg_ij` over all entries.
pub fn gradient_fd_error(g: &ComplexMatrix, w: &WeightMatrix, h: f64) -> f64 {
    let a = grad_f(g, w).expect("gradient defined");
    let n = g.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut plus = g.clone();
            let mut minus = g.clone();
            plus[(i, j)] += h;
            minus[(i, j)] -= h;
            let diff = log_potential(&plus, w).unwrap() - log_potential(&minus, w).unwrap();
            let fd = unwrap_log_difference(diff) / (2.0 * h);
            worst = worst.max((fd - a.d_dg(i, j)).norm());
        }
    }
    worst
}

/// Largest `|H - central difference of the slice gradient|`, relative to `max(1, |H|)`.
pub fn hessian_jacobian_error(p: &GaugeSlicePoint, w: &WeightMatrix, h: f64) -> f64 {
    let hess = hessian_slice(p, w).expect("hessian defined");
    let dim = p.dim();
    let scale = hess.max_abs().max(1.0);
    let mut worst: f64 = 0.0;
    for c in 0..dim {
        let shifted = |s: f64| {
            let mut free = p.free().to_vec();
            free[c] += s;
            slice_gradient(&GaugeSlicePoint::new(p.n(), free).unwrap(), w).unwrap()
        };
        let (plus, minus) = (shifted(h), shifted(-h));
        for r in 0..dim {
            let fd = (plus[r] - minus[r]) / (2.0 * h);
            worst = worst.max((fd - hess[(r, c)]).norm() / scale);
        }
    }
    worst
}

/// `|H - H^T|_max`, relative to `max(1, |H|)`.
pub fn hessian_symmetry_error(p: &GaugeSlicePoint, w: &WeightMatrix) -> f64 {
    let hess = hessian_slice(p, w).expect("hessian defined");
    (&hess - &hess.transpose()).max_abs() / hess.max_abs().max(1.0)
}

pub fn permuted(g: &ComplexMatrix, rows: &[usize], cols: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(g.n(), |i, j| g[(rows[i], cols[j])])
}
