//! Canonical keys for critical points modulo relabeling symmetry.
//!
//! Solutions related by permuting rows, permuting columns and regauging are
//! the same unbiased pair with relabeled projectors. The key is built from
//! quantities that are invariant under all three operations:
//!
//! * `(E^n)^2`, since `E^n` only changes sign under odd permutations;
//! * the singular values of the log-coordinate Hessian over all `n^2` entries,
//!   which relabelings permute and the torus action leaves unchanged;
//! * the multiset of `|log|g_ij g_kl / (g_il g_kj)||` over all 2x2 cross ratios.
//!
//! Each value is rounded to a multiple of the cluster tolerance.

use serde::{Deserialize, Serialize};

use super::CriticalPointRecord;
use crate::error::Result;
use crate::linalg::{singular_values, ComplexMatrix};
use crate::potential::{log_coordinate_hessian, potential_power};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalKey(pub Vec<i64>);

fn quantize(v: f64, tol: f64) -> i64 {
    let q = (v / tol).round();
    q.clamp(i64::MIN as f64, i64::MAX as f64) as i64
}

pub fn canonicalize(record: &CriticalPointRecord, cluster_tolerance: f64) -> Result<CanonicalKey> {
    canonical_key_of(&record.matrix(), cluster_tolerance)
}

pub fn canonical_key_of(g: &ComplexMatrix, cluster_tolerance: f64) -> Result<CanonicalKey> {
    let n = g.n();
    let mut key = Vec::new();

    let e = potential_power(g)?;
    let e2 = e * e;
    if e2.norm() > 0.0 {
        key.push(quantize(e2.norm().ln(), cluster_tolerance));
        let phase = e2.arg();
        key.push(quantize(phase.cos(), cluster_tolerance));
        key.push(quantize(phase.sin(), cluster_tolerance));
    } else {
        key.extend([i64::MIN, 0, 0]);
    }

    let spectrum = singular_values(&log_coordinate_hessian(g)?);
    key.extend(spectrum.iter().map(|&s| quantize(s, cluster_tolerance)));

    let mut ratios = Vec::new();
    for i in 0..n {
        for k in i + 1..n {
            for j in 0..n {
                for l in j + 1..n {
                    let cr = g[(i, j)] * g[(k, l)] / (g[(i, l)] * g[(k, j)]);
                    ratios.push(quantize(cr.norm().ln().abs(), cluster_tolerance));
                }
            }
        }
    }
    ratios.sort_unstable();
    key.extend(ratios);
    Ok(CanonicalKey(key))
}
