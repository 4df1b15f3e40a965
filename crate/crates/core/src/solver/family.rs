//! Evidence for positive-dimensional families of critical points.
//!
//! The Hessian nullity at a critical point bounds the local dimension of the
//! critical set from above. To tell a genuine family from an accidental
//! degeneracy, each null direction is followed a short way (predictor) and the
//! point is pulled back onto the critical set by minimum-norm Gauss-Newton
//! (corrector). A direction counts as traceable when the corrected point is a
//! critical point at distance at least `10 * cluster_tolerance` from the base.

use serde::{Deserialize, Serialize};

use super::{scaled_system, CriticalPointRecord, SolveConfig, ENTRY_CEILING, ENTRY_FLOOR};
use crate::error::Result;
use crate::linalg::{Svd, C64};
use crate::potential::{critical_residual, hessian_slice, GaugeSlicePoint, WeightMatrix};

/// Predictor step, relative to the largest free entry.
const PREDICTOR_STEP: f64 = 1e-2;
const CORRECTOR_ITERATIONS: usize = 60;
const CORRECTOR_CUTOFF: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyStatus {
    /// Nullity 0: an isolated nondegenerate critical point.
    NoNullDirections,
    /// At least one null direction re-converged away from the base point.
    Confirmed,
    /// Nullity is positive but no null direction could be traced.
    UnconfirmedDegeneracy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionTrace {
    pub direction: usize,
    pub reconverged: bool,
    /// Euclidean distance of the corrected point from the base, in slice coordinates.
    pub distance: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    /// Hessian nullity: the estimated local family dimension.
    pub nullity: usize,
    pub traceable: usize,
    pub directions: Vec<DirectionTrace>,
    pub status: FamilyStatus,
}

/// Follows each Hessian null direction of `record` and reports which ones re-converge.
pub fn family_probe(
    record: &CriticalPointRecord,
    w: &WeightMatrix,
    cfg: &SolveConfig,
) -> Result<FamilyReport> {
    let base = &record.slice_point;
    let n = base.n();
    let nullity = record.nullity;
    let mut directions = Vec::with_capacity(nullity);
    if nullity > 0 {
        let svd = Svd::of(&hessian_slice(base, w)?);
        let dim = base.dim();
        let scale = base.free().iter().map(|z| z.norm()).fold(1.0, f64::max);
        let h = (PREDICTOR_STEP * scale).max(1e3 * cfg.cluster_tolerance);
        for k in 0..nullity {
            let v = svd.right_vector(dim - 1 - k);
            let mut best = DirectionTrace {
                direction: k,
                reconverged: false,
                distance: 0.0,
                residual: f64::INFINITY,
            };
            for sign in [1.0, -1.0] {
                let predicted: Vec<C64> = base
                    .free()
                    .iter()
                    .zip(&v)
                    .map(|(x, d)| x + d * (sign * h))
                    .collect();
                let Ok(start) = GaugeSlicePoint::new(n, predicted) else {
                    continue;
                };
                if let Some((point, residual)) = correct(start, w, cfg) {
                    let distance = base
                        .free()
                        .iter()
                        .zip(point.free())
                        .map(|(a, b)| (a - b).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    let trace = DirectionTrace {
                        direction: k,
                        reconverged: distance >= 10.0 * cfg.cluster_tolerance,
                        distance,
                        residual,
                    };
                    let done = trace.reconverged;
                    if done || !best.reconverged && trace.distance > best.distance {
                        best = trace;
                    }
                    if done {
                        break;
                    }
                }
            }
            directions.push(best);
        }
    }
    let traceable = directions.iter().filter(|d| d.reconverged).count();
    let status = match (nullity, traceable) {
        (0, _) => FamilyStatus::NoNullDirections,
        (_, 0) => FamilyStatus::UnconfirmedDegeneracy,
        _ => FamilyStatus::Confirmed,
    };
    Ok(FamilyReport {
        nullity,
        traceable,
        directions,
        status,
    })
}

/// Minimum-norm Gauss-Newton onto the critical set; `None` if it does not converge.
fn correct(
    start: GaugeSlicePoint,
    w: &WeightMatrix,
    cfg: &SolveConfig,
) -> Option<(GaugeSlicePoint, f64)> {
    let n = start.n();
    let mut point = start;
    for _ in 0..CORRECTOR_ITERATIONS {
        let residual = critical_residual(&point.embed(), w).ok()?.norm;
        if residual < cfg.residual_tolerance {
            return Some((point, residual));
        }
        let (s, jac) = scaled_system(&point, w).ok()?;
        let rhs: Vec<C64> = s.iter().map(|z| -z).collect();
        let dx = Svd::of(&jac).solve_min_norm(&rhs, CORRECTOR_CUTOFF);
        let next: Vec<C64> = point.free().iter().zip(&dx).map(|(a, d)| a + d).collect();
        if next
            .iter()
            .any(|z| z.norm() < ENTRY_FLOOR || z.norm() > ENTRY_CEILING)
        {
            return None;
        }
        point = GaugeSlicePoint::new(n, next).ok()?;
    }
    let residual = critical_residual(&point.embed(), w).ok()?.norm;
    (residual < cfg.residual_tolerance).then_some((point, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{newton_solve, record_at};

    #[test]
    fn two_by_two_has_no_family() {
        let w = WeightMatrix::uniform(2);
        let cfg = SolveConfig::default();
        let start = GaugeSlicePoint::new(2, vec![C64::new(-0.7, 0.2)]).unwrap();
        let r = newton_solve(&start, &w, &cfg).unwrap();
        let report = family_probe(&r, &w, &cfg).unwrap();
        assert_eq!(report.nullity, 0);
        assert!(report.directions.is_empty());
        assert_eq!(report.status, FamilyStatus::NoNullDirections);
    }

    #[test]
    fn forced_nullity_on_isolated_point_is_unconfirmed() {
        // isolated point with a record that claims a null direction
        let w = WeightMatrix::uniform(2);
        let cfg = SolveConfig::default();
        let p = GaugeSlicePoint::new(2, vec![C64::new(-1.0, 0.0)]).unwrap();
        let mut r = record_at(p, &w, &cfg, 0).unwrap();
        r.nullity = 1;
        let report = family_probe(&r, &w, &cfg).unwrap();
        assert_eq!(report.traceable, 0);
        assert_eq!(report.status, FamilyStatus::UnconfirmedDegeneracy);
    }

    #[test]
    fn four_by_four_family_is_traceable() {
        // a generic member of the one-parameter family through the 4x4 Fourier matrix
        let a = C64::from_polar(1.0, 0.7);
        let one = C64::new(1.0, 0.0);
        let g = crate::linalg::ComplexMatrix::new(
            4,
            vec![
                one, one, one, one, one, -one, one, -one, one, a, -one, -a, one, -a, -one, a,
            ],
        )
        .unwrap();
        let w = WeightMatrix::uniform(4);
        let cfg = SolveConfig::default();
        let p = crate::solver::regauge(&g).unwrap();
        let r = record_at(p, &w, &cfg, 0).unwrap();
        assert_eq!(r.nullity, 1);
        let report = family_probe(&r, &w, &cfg).unwrap();
        assert_eq!(report.traceable, 1);
        assert_eq!(report.status, FamilyStatus::Confirmed);
    }
}
