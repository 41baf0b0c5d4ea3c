//! Lie algebras by structure constants, split as `g = k ⊕ m`, and the test for
//! an open cone of elements of `k` whose adjoint action on `m` is invertible.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::matrix::{QMatrix, QVector};
use crate::par;
use crate::poly::Subsets;
use crate::rational::{self, q, Q};

/// `[e_i, e_j] = Σ_k c[i][j][k] e_k`, with `k_basis ∪ m_basis` a partition of the indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PresentationDoc", into = "PresentationDoc")]
pub struct LieAlgebraPresentation {
    dim: usize,
    c: Vec<Vec<Vec<Q>>>,
    k_basis: Vec<usize>,
    m_basis: Vec<usize>,
}

/// Triplets `[i, j, k, "p/q"]`; a triplet also sets `c[j][i][k] = −value`
/// unless `(j, i, k)` is listed itself.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PresentationDoc {
    dim: usize,
    c: Vec<(usize, usize, usize, Triplet)>,
    k_basis: Vec<usize>,
    m_basis: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct Triplet(#[serde(with = "rational::serde_q")] Q);

impl TryFrom<PresentationDoc> for LieAlgebraPresentation {
    type Error = Error;
    fn try_from(doc: PresentationDoc) -> Result<Self> {
        let n = doc.dim;
        let mut c = vec![vec![vec![Q::zero(); n]; n]; n];
        let mut given = vec![vec![vec![false; n]; n]; n];
        for (i, j, k, _) in &doc.c {
            if *i >= n || *j >= n || *k >= n {
                return Err(Error::InvalidPresentation(format!("index out of range in ({i}, {j}, {k})")));
            }
            given[*i][*j][*k] = true;
        }
        for (i, j, k, Triplet(v)) in doc.c {
            c[i][j][k] = v.clone();
            if !given[j][i][k] {
                c[j][i][k] = -v;
            }
        }
        LieAlgebraPresentation::new(n, c, doc.k_basis, doc.m_basis)
    }
}

impl From<LieAlgebraPresentation> for PresentationDoc {
    fn from(g: LieAlgebraPresentation) -> Self {
        let n = g.dim;
        let mut c = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = &g.c[i][j][k];
                    let paired = j < i && g.c[j][i][k] == -v;
                    if !v.is_zero() && !paired {
                        c.push((i, j, k, Triplet(v.clone())));
                    }
                }
            }
        }
        PresentationDoc {
            dim: n,
            c,
            k_basis: g.k_basis,
            m_basis: g.m_basis,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

impl LieAlgebraPresentation {
    /// Checks shapes and that the two index sets partition `0..dim`; the
    /// algebraic identities are left to [`validate`].
    pub fn new(dim: usize, c: Vec<Vec<Vec<Q>>>, k_basis: Vec<usize>, m_basis: Vec<usize>) -> Result<Self> {
        if c.len() != dim || c.iter().any(|r| r.len() != dim || r.iter().any(|s| s.len() != dim)) {
            return Err(Error::InvalidPresentation("structure constants must be dim × dim × dim".into()));
        }
        let mut seen = vec![false; dim];
        for &i in k_basis.iter().chain(&m_basis) {
            if i >= dim || seen[i] {
                return Err(Error::InvalidPresentation("k_basis and m_basis must partition the basis".into()));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidPresentation("k_basis and m_basis must partition the basis".into()));
        }
        Ok(LieAlgebraPresentation { dim, c, k_basis, m_basis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k_basis(&self) -> &[usize] {
        &self.k_basis
    }

    pub fn m_basis(&self) -> &[usize] {
        &self.m_basis
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> &Q {
        &self.c[i][j][k]
    }

    pub fn bracket(&self, x: &[Q], y: &[Q]) -> QVector {
        let n = self.dim;
        let mut out = vec![Q::zero(); n];
        for (i, xi) in x.iter().enumerate().take(n) {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate().take(n) {
                if yj.is_zero() {
                    continue;
                }
                let s = xi * yj;
                for (k, o) in out.iter_mut().enumerate() {
                    if !self.c[i][j][k].is_zero() {
                        *o += &s * &self.c[i][j][k];
                    }
                }
            }
        }
        out
    }

    /// Embeds coordinates on `k` into the full algebra.
    pub fn k_vector(&self, coords: &[Q]) -> QVector {
        let mut v = vec![Q::zero(); self.dim];
        for (&i, x) in self.k_basis.iter().zip(coords) {
            v[i] = x.clone();
        }
        v
    }
}

/// Antisymmetry, the Jacobi identity and invariance of the split, all exact.
pub fn validate(g: &LieAlgebraPresentation) -> Validation {
    let n = g.dim;
    let mut diagnostics = Vec::new();
    'anti: for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if g.c[i][j][k] != -g.c[j][i][k].clone() {
                    diagnostics.push(format!("antisymmetry fails at ({i}, {j}, {k})"));
                    break 'anti;
                }
            }
        }
    }
    let e = |i: usize| crate::matrix::unit_vector(n, i);
    'jacobi: for t in Subsets::new(n, 3) {
        let (x, y, z) = (e(t[0]), e(t[1]), e(t[2]));
        let a = g.bracket(&x, &g.bracket(&y, &z));
        let b = g.bracket(&y, &g.bracket(&z, &x));
        let c = g.bracket(&z, &g.bracket(&x, &y));
        if a.iter().zip(&b).zip(&c).any(|((a, b), c)| !(a + b + c).is_zero()) {
            diagnostics.push(format!("Jacobi identity fails on ({}, {}, {})", t[0], t[1], t[2]));
            break 'jacobi;
        }
    }
    let in_k = |v: &[Q]| g.m_basis.iter().all(|&i| v[i].is_zero());
    let in_m = |v: &[Q]| g.k_basis.iter().all(|&i| v[i].is_zero());
    for &a in &g.k_basis {
        for &b in &g.k_basis {
            if !in_k(&g.bracket(&e(a), &e(b))) {
                diagnostics.push(format!("[e{a}, e{b}] leaves k"));
            }
        }
        for &b in &g.m_basis {
            if !in_m(&g.bracket(&e(a), &e(b))) {
                diagnostics.push(format!("[e{a}, e{b}] leaves m"));
            }
        }
    }
    Validation {
        ok: diagnostics.is_empty(),
        diagnostics,
    }
}

/// Matrix of `ad_v` on `m`, in the order of `m_basis`, for `v` supported on `k`.
pub fn ad_matrix(g: &LieAlgebraPresentation, v: &[Q]) -> Result<QMatrix> {
    if g.k_basis.is_empty() {
        return Err(Error::InvalidSplit("k is empty".into()));
    }
    crate::error::check_dim(g.dim, v.len())?;
    if g.m_basis.iter().any(|&i| !v[i].is_zero()) {
        return Err(Error::InvalidSplit("v is not supported on k".into()));
    }
    let d = g.m_basis.len();
    let mut out = QMatrix::zeros(d, d);
    for (col, &b) in g.m_basis.iter().enumerate() {
        let img = g.bracket(v, &crate::matrix::unit_vector(g.dim, b));
        if g.k_basis.iter().any(|&i| !img[i].is_zero()) {
            return Err(Error::InvalidSplit(format!("[v, e{b}] leaves m")));
        }
        for (row, &a) in g.m_basis.iter().enumerate() {
            out[(row, col)] = img[a].clone();
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeDecision {
    pub open_cone: bool,
    /// A grid point of `k` where `det(ad_v|m) ≠ 0`.
    #[serde(with = "rational::serde_q::vec")]
    pub witness: Vec<Q>,
    pub grid_points: usize,
    pub note: Option<String>,
}

/// Whether `v ↦ det(ad_v|m)` is not identically zero on `k`. The determinant
/// has degree at most `dim m` in each variable, so it vanishes identically iff
/// it vanishes on the grid `{0, …, dim m}^{dim k}`.
pub fn has_open_precompact_cone(g: &LieAlgebraPresentation, config: &Config) -> Result<ConeDecision> {
    let v = validate(g);
    if !v.ok {
        return Err(Error::InvalidPresentation(v.diagnostics.join("; ")));
    }
    let dm = g.m_basis.len();
    let dk = g.k_basis.len();
    if dm == 0 {
        return Ok(ConeDecision {
            open_cone: true,
            witness: vec![Q::zero(); dk],
            grid_points: 0,
            note: Some("trivial complement".into()),
        });
    }
    if dk == 0 {
        return Ok(ConeDecision {
            open_cone: false,
            witness: Vec::new(),
            grid_points: 0,
            note: Some("k is zero, so ad vanishes on m".into()),
        });
    }
    let points = grid(dk, dm);
    let dets = par::map(config.execution, &points, |p| {
        ad_matrix(g, &g.k_vector(p)).map(|m| !m.det().is_zero())
    });
    let mut witness = None;
    for (p, d) in points.iter().zip(dets) {
        if d? {
            witness = Some(p.clone());
            break;
        }
    }
    Ok(ConeDecision {
        open_cone: witness.is_some(),
        witness: witness.unwrap_or_default(),
        grid_points: points.len(),
        note: None,
    })
}

/// `{0, …, deg}^dims` in lexicographic order.
fn grid(dims: usize, deg: usize) -> Vec<QVector> {
    let mut out = vec![Vec::new()];
    for _ in 0..dims {
        out = out
            .into_iter()
            .flat_map(|p: QVector| {
                (0..=deg as i64).map(move |x| {
                    let mut p = p.clone();
                    p.push(q(x));
                    p
                })
            })
            .collect();
    }
    out
}

/// Re-expresses the algebra in the basis whose `m` part is `e'_b = Σ_a t[a][b] e_{m_a}`.
pub fn change_m_basis(g: &LieAlgebraPresentation, t: &QMatrix) -> Result<LieAlgebraPresentation> {
    let d = g.m_basis.len();
    crate::error::check_dim(d, t.rows())?;
    crate::error::check_dim(d, t.cols())?;
    let n = g.dim;
    let mut b = QMatrix::identity(n);
    for (ci, &bi) in g.m_basis.iter().enumerate() {
        b[(bi, bi)] = Q::zero();
        for (ri, &ai) in g.m_basis.iter().enumerate() {
            b[(ai, bi)] = t[(ri, ci)].clone();
        }
    }
    change_basis(g, &b)
}

/// `c'_{ij}^k = Σ (B⁻¹)_{kr} c_{pq}^r B_{pi} B_{qj}` for new basis vectors the columns of `B`.
pub fn change_basis(g: &LieAlgebraPresentation, b: &QMatrix) -> Result<LieAlgebraPresentation> {
    let n = g.dim;
    crate::error::check_dim(n, b.rows())?;
    let binv = b.inverse().ok_or(Error::NotInvertible)?;
    let cols = b.columns();
    let mut c = vec![vec![vec![Q::zero(); n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            let br = g.bracket(&cols[i], &cols[j]);
            let coords = binv.mul_vec(&br);
            c[i][j] = coords;
        }
    }
    LieAlgebraPresentation::new(n, c, g.k_basis.clone(), g.m_basis.clone())
}

/// Standard presentations used in tests and examples.
pub mod library {
    use super::*;

    fn build(dim: usize, brackets: &[(usize, usize, usize, i64)], k: &[usize]) -> LieAlgebraPresentation {
        let mut c = vec![vec![vec![Q::zero(); dim]; dim]; dim];
        for &(i, j, l, v) in brackets {
            c[i][j][l] = q(v);
            c[j][i][l] = q(-v);
        }
        let m: Vec<usize> = (0..dim).filter(|i| !k.contains(i)).collect();
        LieAlgebraPresentation::new(dim, c, k.to_vec(), m).unwrap()
    }

    /// `[x, y] = z`.
    pub fn heis3() -> LieAlgebraPresentation {
        build(3, &[(0, 1, 2, 1)], &[])
    }

    /// `[x_i, y_i] = z` for `i = 1, 2`.
    pub fn heis5() -> LieAlgebraPresentation {
        build(5, &[(0, 2, 4, 1), (1, 3, 4, 1)], &[])
    }

    pub fn abelian(d: usize) -> LieAlgebraPresentation {
        build(d, &[], &[])
    }

    /// Euclidean motions of the plane: `[J, X] = Y`, `[J, Y] = −X`, with `k = span(J)`.
    pub fn e2() -> LieAlgebraPresentation {
        build(3, &[(0, 1, 2, 1), (0, 2, 1, -1)], &[0])
    }

    /// `[e0, e1] = e2`, `[e0, e2] = e3`.
    pub fn filiform4() -> LieAlgebraPresentation {
        build(4, &[(0, 1, 2, 1), (0, 2, 3, 1)], &[])
    }
}
