//! Exact lattice certificates for the Birkhoff polytope.
//!
//! Points are stored in shifted coordinates `l = n lambda - 1`, in which the
//! center of the polytope is the origin, permutation matrices have entries
//! `n - 1` on their support and `-1` elsewhere, and the facet inequalities are
//! `l_ij >= -1`. The ambient lattice `N` consists of integer matrices with zero
//! row and column sums whose entries are all congruent modulo `n`; this is the
//! image of the lattice generated by integer matrices and the center.
//!
//! All arithmetic is exact integer arithmetic.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::par_map;

pub const MAX_VERTEX_N: usize = 8;
pub const MAX_LATTICE_N: usize = 5;
pub const MAX_NEWTON_N: usize = 7;
pub const MAX_CERTIFY_N: usize = 6;

fn guard(n: usize, max: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidConfig("dimension must be positive".into()));
    }
    if n > max {
        return Err(Error::SizeGuard { n, max });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticeMatrixPoint {
    pub n: usize,
    /// Row-major `l_ij`.
    pub entries: Vec<i64>,
}

impl LatticeMatrixPoint {
    pub fn new(n: usize, entries: Vec<i64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        Ok(Self { n, entries })
    }

    /// The point for a permutation matrix with `sigma[i]` the column of the 1 in row `i`.
    pub fn from_permutation(sigma: &[usize]) -> Self {
        let n = sigma.len();
        let m = n as i64;
        let entries = (0..n * n)
            .map(|idx| if sigma[idx / n] == idx % n { m - 1 } else { -1 })
            .collect();
        Self { n, entries }
    }

    pub fn origin(n: usize) -> Self {
        Self {
            n,
            entries: vec![0; n * n],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn row_sums(&self) -> Vec<i64> {
        self.entries
            .chunks(self.n)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<i64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j)).sum())
            .collect()
    }

    /// Zero row and column sums, and every entry congruent to the first modulo `n`.
    pub fn in_lattice(&self) -> bool {
        let m = self.n as i64;
        let r = self.entries[0].rem_euclid(m);
        self.row_sums()
            .iter()
            .chain(&self.col_sums())
            .all(|&s| s == 0)
            && self.entries.iter().all(|e| e.rem_euclid(m) == r)
    }

    /// In the lattice and inside the polytope (`l_ij >= -1`).
    pub fn satisfies_invariants(&self) -> bool {
        self.in_lattice() && self.entries.iter().all(|&e| e >= -1)
    }
}

/// Permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n)
            .rev()
            .find(|&j| current[j] > current[i - 1])
            .expect("pivot has a successor");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// `+1` for even permutations, `-1` for odd, by inversion count.
pub fn permutation_sign(sigma: &[usize]) -> i64 {
    let inversions = (0..sigma.len())
        .flat_map(|a| (a + 1..sigma.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| sigma[a] > sigma[b])
        .count();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn permutation_vertices(n: usize) -> Result<Vec<LatticeMatrixPoint>> {
    guard(n, MAX_VERTEX_N)?;
    Ok(permutations(n)
        .iter()
        .map(|s| LatticeMatrixPoint::from_permutation(s))
        .collect())
}

/// Checks that each permutation matrix `P_s` is the unique maximizer of
/// `<P_s, .>` over all permutation matrices, which certifies it as a vertex.
pub fn certify_vertices(n: usize) -> Result<bool> {
    guard(n, MAX_CERTIFY_N)?;
    let perms = permutations(n);
    let ok = par_map(perms.len(), |a| {
        perms.iter().enumerate().all(|(b, tau)| {
            let overlap = perms[a].iter().zip(tau).filter(|(x, y)| x == y).count();
            if a == b {
                overlap == n
            } else {
                overlap < n
            }
        })
    });
    Ok(ok.into_iter().all(|x| x))
}

/// The facet functional `l -> l_ij`, with facet value `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FacetFunctional {
    pub i: usize,
    pub j: usize,
}

impl FacetFunctional {
    pub fn eval(&self, p: &LatticeMatrixPoint) -> i64 {
        p.get(self.i, self.j)
    }
}

/// The distinct facet functionals `l_ij`, two being identified when they agree
/// on every vertex (and hence on the affine span of the polytope).
pub fn facet_enumerate(n: usize) -> Result<Vec<FacetFunctional>> {
    guard(n, MAX_VERTEX_N)?;
    if n < 2 {
        return Err(Error::InvalidConfig("facets need n >= 2".into()));
    }
    let vertices = permutation_vertices(n)?;
    let mut seen: BTreeMap<Vec<i64>, FacetFunctional> = BTreeMap::new();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let f = FacetFunctional { i, j };
            let values: Vec<i64> = vertices.iter().map(|v| f.eval(v)).collect();
            if seen.insert(values, f).is_none() {
                out.push(f);
            }
        }
    }
    Ok(out)
}

/// Rank of an integer matrix by fraction-free Gaussian elimination.
pub fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev: i128 = 1;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            for k in c + 1..cols {
                m[r][k] = (m[r][k] * m[rank][c] - m[rank][k] * m[r][c]) / prev;
            }
            m[r][c] = 0;
        }
        prev = m[rank][c];
        rank += 1;
    }
    rank
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetCertificate {
    pub facet: FacetFunctional,
    /// Vertices on which the functional attains `-1`.
    pub vertices_on_facet: usize,
    /// Dimension of the affine span of those vertices.
    pub dimension: usize,
}

/// Vertex count and affine dimension of each facet, by exact rank.
pub fn facet_certificates(n: usize) -> Result<Vec<FacetCertificate>> {
    guard(n, MAX_LATTICE_N)?;
    let vertices = permutation_vertices(n)?;
    facet_enumerate(n)?
        .into_iter()
        .map(|facet| {
            let on: Vec<&LatticeMatrixPoint> =
                vertices.iter().filter(|v| facet.eval(v) == -1).collect();
            let base = &on[0].entries;
            let diffs: Vec<Vec<i64>> = on[1..]
                .iter()
                .map(|v| v.entries.iter().zip(base).map(|(a, b)| a - b).collect())
                .collect();
            Ok(FacetCertificate {
                facet,
                vertices_on_facet: on.len(),
                dimension: integer_rank(&diffs),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflexiveCertificate {
    pub n: usize,
    pub reflexive: bool,
    pub facets: Vec<FacetFunctional>,
    /// `table[f][v]`: facet functional `f` evaluated on vertex `v` (lexicographic permutation order).
    pub table: Vec<Vec<i64>>,
}

impl ReflexiveCertificate {
    pub fn to_csv(&self) -> String {
        let vertices = permutations(self.n);
        let mut out = String::from("facet");
        for s in &vertices {
            let label: Vec<String> = s.iter().map(|x| (x + 1).to_string()).collect();
            out.push_str(&format!(",sigma={}", label.join("")));
        }
        out.push('\n');
        for (f, row) in self.facets.iter().zip(&self.table) {
            out.push_str(&format!("l{}{}", f.i + 1, f.j + 1));
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Every facet functional is integral on the lattice with minimum exactly `-1`
/// over the vertices, so the dual polytope has integral vertices.
pub fn reflexive_check(n: usize) -> Result<ReflexiveCertificate> {
    let facets = facet_enumerate(n)?;
    let vertices = permutation_vertices(n)?;
    let m = n as i64;
    let table: Vec<Vec<i64>> = facets
        .iter()
        .map(|f| vertices.iter().map(|v| f.eval(v)).collect())
        .collect();
    let reflexive = table
        .iter()
        .all(|row| row.iter().min() == Some(&-1) && row.iter().all(|&x| x == -1 || x == m - 1));
    Ok(ReflexiveCertificate {
        n,
        reflexive,
        facets,
        table,
    })
}

/// Doubly stochastic `n lambda` matrices with entries in `allowed` (values in `0..=n`).
fn stochastic_grid(n: usize, allowed: &[i64]) -> Vec<Vec<i64>> {
    let m = n as i64;
    let mut rows = Vec::new();
    let mut current = Vec::with_capacity(n);
    fn compositions(
        n: usize,
        left: i64,
        allowed: &[i64],
        current: &mut Vec<i64>,
        rows: &mut Vec<Vec<i64>>,
    ) {
        if current.len() == n {
            if left == 0 {
                rows.push(current.clone());
            }
            return;
        }
        for &a in allowed {
            if a <= left {
                current.push(a);
                compositions(n, left - a, allowed, current, rows);
                current.pop();
            }
        }
    }
    compositions(n, m, allowed, &mut current, &mut rows);

    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut cols = vec![0i64; n];
    fn stack(
        n: usize,
        rows: &[Vec<i64>],
        chosen: &mut Vec<usize>,
        cols: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        let m = n as i64;
        if chosen.len() == n {
            if cols.iter().all(|&c| c == m) {
                out.push(
                    chosen
                        .iter()
                        .flat_map(|&r| rows[r].iter().copied())
                        .collect(),
                );
            }
            return;
        }
        for (r, row) in rows.iter().enumerate() {
            if row.iter().zip(cols.iter()).all(|(a, c)| a + c <= m) {
                for (c, a) in cols.iter_mut().zip(row) {
                    *c += a;
                }
                chosen.push(r);
                stack(n, rows, chosen, cols, out);
                chosen.pop();
                for (c, a) in cols.iter_mut().zip(row) {
                    *c -= a;
                }
            }
        }
    }
    stack(n, &rows, &mut chosen, &mut cols, &mut out);
    out
}

fn to_lattice(n: usize, scaled: Vec<i64>) -> LatticeMatrixPoint {
    LatticeMatrixPoint {
        n,
        entries: scaled.into_iter().map(|x| x - 1).collect(),
    }
}

/// Lattice points of the polytope, one residue class at a time.
///
/// In class `k`, every `n lambda_ij` is congruent to `k` mod `n` and lies in
/// `[0, n]`: for `k = 0` the entries are 0 or 1 in `lambda`, giving the
/// permutation matrices; for `k > 0` the only admissible entry is `k / n` and
/// the row sums force `k = 1`, the center. Points are returned sorted.
pub fn lattice_points_enumerate(n: usize) -> Result<Vec<LatticeMatrixPoint>> {
    guard(n, MAX_LATTICE_N)?;
    let m = n as i64;
    let classes = par_map(n, |k| {
        let k = k as i64;
        let allowed: Vec<i64> = (0..=m).filter(|v| v.rem_euclid(m) == k).collect();
        stochastic_grid(n, &allowed)
    });
    let mut points: Vec<LatticeMatrixPoint> = classes
        .into_iter()
        .flatten()
        .map(|s| to_lattice(n, s))
        .collect();
    points.sort();
    Ok(points)
}

/// Independent enumeration over every grid `n lambda_ij in 0..=n`, keeping points
/// of the lattice. Exponential; intended for `n <= 4`.
pub fn lattice_points_brute_force(n: usize) -> Result<Vec<LatticeMatrixPoint>> {
    guard(n, 4)?;
    let m = n as i64;
    let all: Vec<i64> = (0..=m).collect();
    let mut points: Vec<LatticeMatrixPoint> = stochastic_grid(n, &all)
        .into_iter()
        .map(|s| to_lattice(n, s))
        .filter(LatticeMatrixPoint::in_lattice)
        .collect();
    points.sort();
    Ok(points)
}

/// The points are exactly the vertices plus the center, and the center is interior.
pub fn terminal_check_points(n: usize, points: &[LatticeMatrixPoint]) -> Result<bool> {
    let expected: BTreeSet<LatticeMatrixPoint> = permutation_vertices(n)?
        .into_iter()
        .chain(std::iter::once(LatticeMatrixPoint::origin(n)))
        .collect();
    let found: BTreeSet<LatticeMatrixPoint> = points.iter().cloned().collect();
    let center_interior = facet_enumerate(n)?
        .iter()
        .all(|f| f.eval(&LatticeMatrixPoint::origin(n)) > -1);
    Ok(found.len() == points.len() && found == expected && center_interior)
}

pub fn terminal_check(n: usize) -> Result<bool> {
    terminal_check_points(n, &lattice_points_enumerate(n)?)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignedMonomial {
    /// 0/1 exponent of each `g_ij`, row-major.
    pub exponents: Vec<u8>,
    pub coefficient: i64,
}

/// `det g` as a polynomial in the entries, by Laplace expansion along the first row.
pub fn determinant_monomials(n: usize) -> Result<Vec<SignedMonomial>> {
    guard(n, MAX_NEWTON_N)?;
    fn expand(
        n: usize,
        row: usize,
        cols: &[usize],
        exps: &mut Vec<u8>,
        sign: i64,
        out: &mut BTreeMap<Vec<u8>, i64>,
    ) {
        if cols.is_empty() {
            *out.entry(exps.clone()).or_insert(0) += sign;
            return;
        }
        for (pos, &c) in cols.iter().enumerate() {
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let s = if pos % 2 == 0 { sign } else { -sign };
            exps[row * n + c] += 1;
            expand(n, row + 1, &rest, exps, s, out);
            exps[row * n + c] -= 1;
        }
    }
    let mut terms = BTreeMap::new();
    let cols: Vec<usize> = (0..n).collect();
    expand(n, 0, &cols, &mut vec![0; n * n], 1, &mut terms);
    Ok(terms
        .into_iter()
        .filter(|&(_, c)| c != 0)
        .map(|(exponents, coefficient)| SignedMonomial {
            exponents,
            coefficient,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonMatch {
    pub point: LatticeMatrixPoint,
    pub coefficient: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonPolytope {
    pub monomials: Vec<NewtonMatch>,
    /// The shifted exponents are exactly the permutation vertices, with coefficient the permutation sign.
    pub matches_vertices: bool,
}

/// Exponents of `E^n = det(g)^n / prod g_ij`, shifted to `l = n e - 1`.
pub fn newton_polytope_of_e(n: usize) -> Result<NewtonPolytope> {
    let m = n as i64;
    let monomials: Vec<NewtonMatch> = determinant_monomials(n)?
        .into_iter()
        .map(|t| NewtonMatch {
            point: LatticeMatrixPoint {
                n,
                entries: t.exponents.iter().map(|&e| m * e as i64 - 1).collect(),
            },
            coefficient: t.coefficient,
        })
        .collect();
    let expected: BTreeMap<LatticeMatrixPoint, i64> = permutations(n)
        .iter()
        .map(|s| (LatticeMatrixPoint::from_permutation(s), permutation_sign(s)))
        .collect();
    let found: BTreeMap<LatticeMatrixPoint, i64> = monomials
        .iter()
        .map(|t| (t.point.clone(), t.coefficient))
        .collect();
    let matches_vertices = found.len() == monomials.len() && found == expected;
    Ok(NewtonPolytope {
        monomials,
        matches_vertices,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToricIdentification {
    /// The polytope is a primitive segment `[-v, v]`: the projective line.
    ProjectiveLine,
    /// The polytope is the free sum of two unimodular triangles splitting the
    /// lattice, so its face fan is the fan of a product of two projective planes.
    ProductOfProjectivePlanes,
    NotCertified,
}

/// Covolume of the lattice in top-left `(n-1) x (n-1)` block coordinates:
/// the index of "all entries congruent mod n" in `Z^((n-1)^2)` is `n^((n-1)^2) / n`.
fn lattice_covolume(n: usize) -> i128 {
    (n as i128).pow(((n - 1) * (n - 1)) as u32) / n as i128
}

fn block(p: &LatticeMatrixPoint) -> Vec<i64> {
    let n = p.n;
    (0..n - 1)
        .flat_map(|i| (0..n - 1).map(move |j| p.get(i, j)))
        .collect()
}

fn det_i128(rows: &[Vec<i64>]) -> i128 {
    let k = rows.len();
    if k == 0 {
        return 1;
    }
    (0..k)
        .map(|c| {
            let minor: Vec<Vec<i64>> = rows[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != c)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let s = if c % 2 == 0 { 1 } else { -1 };
            s * rows[0][c] as i128 * det_i128(&minor)
        })
        .sum()
}

/// Attempts the toric identification of the face fan for `n = 2` and `n = 3`.
pub fn toric_identification(n: usize) -> Result<ToricIdentification> {
    let vertices = permutation_vertices(n)?;
    match n {
        2 => {
            let (a, b) = (&vertices[0], &vertices[1]);
            let opposite = a.entries.iter().zip(&b.entries).all(|(x, y)| x == &-y);
            // generator of the rank-one lattice is the matrix with l_11 = 1
            let primitive = a.get(0, 0).abs() == 1;
            Ok(if opposite && primitive && a.in_lattice() {
                ToricIdentification::ProjectiveLine
            } else {
                ToricIdentification::NotCertified
            })
        }
        3 => {
            let perms = permutations(3);
            let (even, odd): (Vec<_>, Vec<_>) = perms
                .iter()
                .zip(&vertices)
                .partition(|(s, _)| permutation_sign(s) == 1);
            let sums_to_zero = |half: &[(&Vec<usize>, &LatticeMatrixPoint)]| {
                (0..9).all(|idx| half.iter().map(|(_, v)| v.entries[idx]).sum::<i64>() == 0)
            };
            if !sums_to_zero(&even) || !sums_to_zero(&odd) {
                return Ok(ToricIdentification::NotCertified);
            }
            let basis = [even[0].1, even[1].1, odd[0].1, odd[1].1];
            let rows: Vec<Vec<i64>> = basis.iter().map(|v| block(v)).collect();
            let unimodular = basis.iter().all(|v| v.in_lattice())
                && det_i128(&rows).abs() == lattice_covolume(3);
            Ok(if unimodular {
                ToricIdentification::ProductOfProjectivePlanes
            } else {
                ToricIdentification::NotCertified
            })
        }
        _ => Ok(ToricIdentification::NotCertified),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeReport {
    pub n: usize,
    pub vertex_count: usize,
    pub facet_count: usize,
    pub dimension: usize,
    pub reflexive: bool,
    /// `None` beyond the enumeration guard.
    pub lattice_point_count: Option<usize>,
    pub terminal: Option<bool>,
    pub newton_matches_vertices: Option<bool>,
    pub toric_identification: ToricIdentification,
}

pub fn polytope_report(n: usize) -> Result<PolytopeReport> {
    let vertices = permutation_vertices(n)?;
    let facets = if n >= 2 { facet_enumerate(n)?.len() } else { 0 };
    let reflexive = n >= 2 && reflexive_check(n)?.reflexive;
    let (lattice_point_count, terminal) = if n <= MAX_LATTICE_N {
        let points = lattice_points_enumerate(n)?;
        (
            Some(points.len()),
            Some(n >= 2 && terminal_check_points(n, &points)?),
        )
    } else {
        (None, None)
    };
    let newton_matches_vertices = if n <= MAX_NEWTON_N {
        Some(newton_polytope_of_e(n)?.matches_vertices)
    } else {
        None
    };
    Ok(PolytopeReport {
        n,
        vertex_count: vertices.len(),
        facet_count: facets,
        dimension: (n - 1) * (n - 1),
        reflexive,
        lattice_point_count,
        terminal,
        newton_matches_vertices,
        toric_identification: toric_identification(n)?,
    })
}
