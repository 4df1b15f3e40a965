//! Certificates for projector systems and their representations.
//!
//! Every check produces a [`CheckReport`] listing the violated relations with
//! their deviations. Matrix deviations are measured in the spectral norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{invert, numeric_rank, ComplexMatrix, C64};
use crate::potential::WeightMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub relation: String,
    pub indices: Vec<usize>,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl Default for CheckReport {
    fn default() -> Self {
        Self {
            passed: true,
            violations: Vec::new(),
        }
    }
}

impl CheckReport {
    fn check(&mut self, relation: &str, indices: &[usize], deviation: f64, bound: f64) {
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN deviations fail
        if !(deviation <= bound) {
            self.violations.push(Violation {
                relation: relation.to_string(),
                indices: indices.to_vec(),
                deviation,
            });
            self.passed = false;
        }
    }

    fn merge(&mut self, other: CheckReport) {
        self.passed &= other.passed;
        self.violations.extend(other.violations);
    }

    pub fn has(&self, relation: &str) -> bool {
        self.violations.iter().any(|v| v.relation == relation)
    }
}

/// An ordered list of projectors with their certification tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSystem {
    pub members: Vec<ComplexMatrix>,
    pub tolerance: f64,
    /// Members are declared pairwise orthogonal.
    pub orthogonal: bool,
    /// Index of the rank-k aggregate projector, the only member allowed rank > 1.
    pub aggregate: Option<usize>,
}

impl ProjectorSystem {
    pub fn new(members: Vec<ComplexMatrix>, tolerance: f64, orthogonal: bool) -> Result<Self> {
        let n = members.first().map_or(0, ComplexMatrix::n);
        if let Some(m) = members.iter().find(|m| m.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.n(),
            });
        }
        Ok(Self {
            members,
            tolerance,
            orthogonal,
            aggregate: None,
        })
    }

    /// Coordinate projectors `q_i = e_ii`.
    pub fn coordinate(n: usize, tolerance: f64) -> Self {
        Self {
            members: (0..n).map(|i| ComplexMatrix::unit(n, i, i)).collect(),
            tolerance,
            orthogonal: true,
            aggregate: None,
        }
    }

    pub fn n(&self) -> usize {
        self.members.first().map_or(0, ComplexMatrix::n)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn sum(&self) -> ComplexMatrix {
        let n = self.n();
        self.members
            .iter()
            .fold(ComplexMatrix::zeros(n), |acc, m| &acc + m)
    }

    /// Idempotency, rank one (except the aggregate) and declared orthogonality.
    pub fn certify(&self) -> CheckReport {
        let tol = self.tolerance;
        let mut report = CheckReport::default();
        for (a, m) in self.members.iter().enumerate() {
            report.check("idempotent", &[a], (&(m * m) - m).op_norm(), tol);
            if self.aggregate != Some(a) {
                let rank = numeric_rank(m, tol.max(1e-12));
                report.check("rank_one", &[a], rank.abs_diff(1) as f64, 0.0);
            }
        }
        if self.orthogonal {
            for a in 0..self.members.len() {
                for b in a + 1..self.members.len() {
                    let (ma, mb) = (&self.members[a], &self.members[b]);
                    report.check("orthogonal", &[a, b], (ma * mb).op_norm(), tol);
                    report.check("orthogonal", &[b, a], (mb * ma).op_norm(), tol);
                }
            }
        }
        report
    }
}

/// `p_i = g q_i g^-1` for the coordinate projectors `q_i`.
pub fn projectors_from_transition(g: &ComplexMatrix, tolerance: f64) -> Result<ProjectorSystem> {
    let ghat = invert(g)?;
    let n = g.n();
    let members = (0..n)
        .map(|i| ComplexMatrix::from_fn(n, |r, c| g[(r, i)] * ghat[(i, c)]))
        .collect();
    Ok(ProjectorSystem {
        members,
        tolerance,
        orthogonal: true,
        aggregate: None,
    })
}

/// Checks that `{g q_i g^-1}` and `{q_j}` are unbiased with weights `lambda_ij`:
/// `|Tr(p_i q_j) - lambda_ij| <= tol` and `||p_i q_j p_i - lambda_ij p_i|| <= tol * n`,
/// plus the projector-system invariants of the `p_i`.
pub fn check_unbiased_pair(g: &ComplexMatrix, w: &WeightMatrix, tol: f64) -> Result<CheckReport> {
    let n = g.n();
    w.require_square(n)?;
    if let Some((row, col)) = g.first_zero_entry() {
        return Err(Error::ZeroEntry { row, col });
    }
    let ps = projectors_from_transition(g, tol)?;
    let mut report = ps.certify();
    for (i, p) in ps.members.iter().enumerate() {
        for j in 0..n {
            let lambda = w.get(i, j);
            // Tr(p_i q_j) is the (j, j) entry of p_i
            report.check("trace", &[i, j], (p[(j, j)] - lambda).norm(), tol);
            let q = ComplexMatrix::unit(n, j, j);
            let pqp = &(p * &q) * p;
            report.check(
                "pqp",
                &[i, j],
                (&pqp - &p.scale(lambda)).op_norm(),
                tol * n as f64,
            );
        }
    }
    Ok(report)
}

/// Simply laced graph with nonzero weights on its edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<(usize, usize, C64)>,
}

impl GraphSpec {
    pub fn new(vertices: Vec<String>, edges: Vec<(usize, usize, C64)>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for &(a, b, weight) in &edges {
            if a >= vertices.len() || b >= vertices.len() {
                return Err(Error::InvalidConfig(format!(
                    "edge ({a}, {b}) references a missing vertex"
                )));
            }
            if a == b {
                return Err(Error::InvalidConfig(format!("self-loop at vertex {a}")));
            }
            if weight == C64::new(0.0, 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "edge ({a}, {b}) has zero weight"
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidConfig(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(Self { vertices, edges })
    }

    /// Full bipartite graph between `k` vertices `p1..pk` and `n` vertices `q1..qn`
    /// with edge weights `lambda_ij`.
    pub fn full_bipartite(w: &WeightMatrix) -> Self {
        let (k, n) = (w.rows(), w.cols());
        let vertices = (0..k)
            .map(|i| format!("p{}", i + 1))
            .chain((0..n).map(|j| format!("q{}", j + 1)))
            .collect();
        let edges = (0..k)
            .flat_map(|i| (0..n).map(move |j| (i, k + j)))
            .map(|(a, b)| (a, b, w.get(a, b - k)))
            .collect();
        Self { vertices, edges }
    }

    fn weight(&self, a: usize, b: usize) -> Option<C64> {
        self.edges
            .iter()
            .find(|&&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a))
            .map(|e| e.2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphCheck {
    pub report: CheckReport,
    /// Common numeric rank of the generators, when they agree.
    pub rank: Option<usize>,
}

/// Verifies the defining relations of the graph algebra on an assignment of
/// matrices to vertices (in vertex order): `x^2 = x`; `x_a x_b x_a = lambda x_a`
/// on edges; `x_a x_b = 0` on non-edges.
pub fn check_graph_representation(
    graph: &GraphSpec,
    assignment: &[ComplexMatrix],
    tol: f64,
) -> Result<GraphCheck> {
    if assignment.len() != graph.vertices.len() {
        return Err(Error::DimensionMismatch {
            expected: graph.vertices.len(),
            got: assignment.len(),
        });
    }
    let n = assignment.first().map_or(0, ComplexMatrix::n);
    if let Some(m) = assignment.iter().find(|m| m.n() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.n(),
        });
    }
    let mut report = CheckReport::default();
    for (a, x) in assignment.iter().enumerate() {
        report.check("idempotent", &[a], (&(x * x) - x).op_norm(), tol);
    }
    for a in 0..assignment.len() {
        for b in 0..assignment.len() {
            if a == b {
                continue;
            }
            let (xa, xb) = (&assignment[a], &assignment[b]);
            match graph.weight(a, b) {
                Some(lambda) => {
                    let xaxbxa = &(xa * xb) * xa;
                    report.check(
                        "edge",
                        &[a, b],
                        (&xaxbxa - &xa.scale(lambda)).op_norm(),
                        tol,
                    );
                }
                None => report.check("non_edge", &[a, b], (xa * xb).op_norm(), tol),
            }
        }
    }
    let ranks: Vec<usize> = assignment
        .iter()
        .map(|m| numeric_rank(m, tol.max(1e-12)))
        .collect();
    let rank = ranks
        .first()
        .copied()
        .filter(|r| ranks.iter().all(|x| x == r));
    Ok(GraphCheck { report, rank })
}

/// Admissible representation of the algebra generated by a complete orthogonal
/// rank-one system `q_i` and an idempotent `P` with `q_i P q_i = lambda_i q_i`.
pub fn check_admissible_a_representation(
    qs: &ProjectorSystem,
    p: &ComplexMatrix,
    lambda_bar: &[C64],
    k: usize,
    tol: f64,
) -> Result<CheckReport> {
    let n = p.n();
    if qs.len() != n || lambda_bar.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: qs.len().min(lambda_bar.len()),
        });
    }
    let mut report = CheckReport::default();
    report.check("P_idempotent", &[], (&(p * p) - p).op_norm(), tol);
    let rank = numeric_rank(p, tol.max(1e-12));
    report.check("P_rank", &[rank], rank.abs_diff(k) as f64, 0.0);
    let mut q_system = qs.clone();
    q_system.tolerance = tol;
    q_system.orthogonal = true;
    report.merge(q_system.certify());
    for (i, q) in qs.members.iter().enumerate() {
        let qpq = &(q * p) * q;
        report.check("qPq", &[i], (&qpq - &q.scale(lambda_bar[i])).op_norm(), tol);
    }
    Ok(report)
}

/// Pushes a system of `k` rank-one projectors forward along `q_i -> q_i`,
/// `P -> sum p_i`, and checks the admissible relations with `lambda_j = sum_i lambda_ij`.
pub fn check_psi_pushforward(
    ps: &ProjectorSystem,
    w: &WeightMatrix,
    tol: f64,
) -> Result<CheckReport> {
    let n = ps.n();
    if w.rows() != ps.len() || w.cols() != n {
        return Err(Error::Precondition(format!(
            "weights must be {}x{}, got {}x{}",
            ps.len(),
            n,
            w.rows(),
            w.cols()
        )));
    }
    let aggregate = ps.sum();
    let lambda = w.column_sums();
    check_admissible_a_representation(
        &ProjectorSystem::coordinate(n, tol),
        &aggregate,
        &lambda,
        ps.len(),
        tol,
    )
}

/// Hermitian specialization: `g^H g = n I` and `|g_ij| = 1` for all entries.
pub fn check_mub(g: &ComplexMatrix, tol: f64) -> CheckReport {
    let n = g.n();
    let mut report = CheckReport::default();
    let gram = &g.adjoint() * g;
    let target = ComplexMatrix::identity(n).scale(C64::new(n as f64, 0.0));
    report.check(
        "scaled_unitary",
        &[],
        (&gram - &target).op_norm(),
        tol * n as f64,
    );
    for i in 0..n {
        for j in 0..n {
            report.check(
                "unimodular",
                &[i, j],
                (g[(i, j)].norm_sqr() - 1.0).abs(),
                tol,
            );
        }
    }
    report
}
