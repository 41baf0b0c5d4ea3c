//! Rational and integral isometries of a form, torus isometries `(A, τ)`,
//! bounded exhaustive search of `O(q, ℤ)` and congruence subgroups.

use std::ops::Deref;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{check_dim, Error, Result};
use crate::forms::QForm;
use crate::matrix::{QMatrix, QVector};
use crate::par;
use crate::poly::{char_poly, strip_cyclotomic};
use crate::rational::{self, serde_q, Q};

/// An invertible rational matrix `A` with `AᵀGA = G`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearIsometry {
    a: QMatrix,
    q: QForm,
}

impl LinearIsometry {
    pub fn new(a: QMatrix, q: QForm) -> Result<Self> {
        if !check_isometry(&a, &q)? {
            return Err(Error::NotIsometry);
        }
        Ok(LinearIsometry { a, q })
    }

    pub fn identity(q: &QForm) -> Self {
        LinearIsometry {
            a: QMatrix::identity(q.dim()),
            q: q.clone(),
        }
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.a
    }

    pub fn form(&self) -> &QForm {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn compose(&self, other: &LinearIsometry) -> Result<LinearIsometry> {
        if self.q != other.q {
            return Err(Error::FormMismatch);
        }
        Ok(LinearIsometry {
            a: self.a.mul(&other.a),
            q: self.q.clone(),
        })
    }

    pub fn inverse(&self) -> LinearIsometry {
        // G⁻¹AᵀG is the inverse of an isometry; cheaper than elimination.
        let g = self.q.gram();
        let inv = g.inverse().map(|gi| gi.mul(&self.a.transpose()).mul(g));
        LinearIsometry {
            a: inv.unwrap_or_else(|| self.a.inverse().expect("isometries are invertible")),
            q: self.q.clone(),
        }
    }

    pub fn pow(&self, k: u64) -> LinearIsometry {
        LinearIsometry {
            a: self.a.pow(k),
            q: self.q.clone(),
        }
    }
}

/// An element of `O(q, ℤ)`: an integer isometry with determinant `±1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "IsometryDoc", into = "IsometryDoc")]
pub struct LatticeIsometry {
    linear: LinearIsometry,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IsometryDoc {
    #[serde(rename = "A", with = "serde_q::vec_vec")]
    a: Vec<Vec<Q>>,
    q: QForm,
}

impl TryFrom<IsometryDoc> for LatticeIsometry {
    type Error = Error;
    fn try_from(doc: IsometryDoc) -> Result<Self> {
        LatticeIsometry::new(QMatrix::from_rows(doc.a)?, doc.q)
    }
}

impl From<LatticeIsometry> for IsometryDoc {
    fn from(a: LatticeIsometry) -> Self {
        IsometryDoc {
            a: a.linear.a.to_rows(),
            q: a.linear.q,
        }
    }
}

impl Deref for LatticeIsometry {
    type Target = LinearIsometry;
    fn deref(&self) -> &LinearIsometry {
        &self.linear
    }
}

impl LatticeIsometry {
    pub fn new(a: QMatrix, q: QForm) -> Result<Self> {
        if !a.is_integral() {
            return Err(Error::NotIsometry);
        }
        let linear = LinearIsometry::new(a, q)?;
        if !linear.a.det().abs().is_one() {
            return Err(Error::NotIsometry);
        }
        Ok(LatticeIsometry { linear })
    }

    pub fn from_i64<R: AsRef<[i64]>>(rows: &[R], q: &QForm) -> Result<Self> {
        Self::new(QMatrix::from_i64(rows), q.clone())
    }

    pub fn identity(q: &QForm) -> Self {
        LatticeIsometry {
            linear: LinearIsometry::identity(q),
        }
    }

    pub fn linear(&self) -> &LinearIsometry {
        &self.linear
    }

    pub fn compose(&self, other: &LatticeIsometry) -> Result<LatticeIsometry> {
        Ok(LatticeIsometry {
            linear: self.linear.compose(&other.linear)?,
        })
    }

    pub fn inverse(&self) -> LatticeIsometry {
        LatticeIsometry {
            linear: self.linear.inverse(),
        }
    }

    pub fn pow(&self, k: u64) -> LatticeIsometry {
        LatticeIsometry {
            linear: self.linear.pow(k),
        }
    }
}

/// `AᵀGA = G` for a square matrix of matching size.
pub fn check_isometry(a: &QMatrix, q: &QForm) -> Result<bool> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: a.cols(),
        });
    }
    check_dim(q.dim(), a.rows())?;
    Ok(a.transpose().mul(q.gram()).mul(a) == *q.gram())
}

/// `(A, τ)` acting on `ℝⁿ/ℤⁿ` by `x ↦ Ax + τ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TorusDoc", into = "TorusDoc")]
pub struct TorusIsometry {
    linear: LatticeIsometry,
    tau: QVector,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TorusDoc {
    #[serde(rename = "A", with = "serde_q::vec_vec")]
    a: Vec<Vec<Q>>,
    #[serde(default, with = "serde_q::vec")]
    tau: Vec<Q>,
    q: QForm,
}

impl TryFrom<TorusDoc> for TorusIsometry {
    type Error = Error;
    fn try_from(doc: TorusDoc) -> Result<Self> {
        let a = LatticeIsometry::new(QMatrix::from_rows(doc.a)?, doc.q)?;
        let tau = if doc.tau.is_empty() {
            vec![Q::zero(); a.dim()]
        } else {
            doc.tau
        };
        TorusIsometry::new(a, tau)
    }
}

impl From<TorusIsometry> for TorusDoc {
    fn from(f: TorusIsometry) -> Self {
        TorusDoc {
            a: f.linear.matrix().to_rows(),
            tau: f.tau,
            q: f.linear.form().clone(),
        }
    }
}

pub fn reduce_mod_one(v: &[Q]) -> QVector {
    v.iter().map(rational::mod_one).collect()
}

impl TorusIsometry {
    pub fn new(linear: LatticeIsometry, tau: QVector) -> Result<Self> {
        check_dim(linear.dim(), tau.len())?;
        Ok(TorusIsometry {
            tau: reduce_mod_one(&tau),
            linear,
        })
    }

    pub fn identity(q: &QForm) -> Self {
        TorusIsometry {
            linear: LatticeIsometry::identity(q),
            tau: vec![Q::zero(); q.dim()],
        }
    }

    pub fn translation(q: &QForm, tau: QVector) -> Result<Self> {
        Self::new(LatticeIsometry::identity(q), tau)
    }

    pub fn linear(&self) -> &LatticeIsometry {
        &self.linear
    }

    pub fn tau(&self) -> &[Q] {
        &self.tau
    }

    /// `(A_f A_g, τ_f + A_f τ_g)`
    pub fn compose(&self, g: &TorusIsometry) -> Result<TorusIsometry> {
        let linear = self.linear.compose(&g.linear)?;
        let shifted = self.linear.matrix().mul_vec(&g.tau);
        let tau = crate::matrix::vadd(&self.tau, &shifted);
        TorusIsometry::new(linear, tau)
    }

    /// `(A⁻¹, −A⁻¹τ)`
    pub fn invert(&self) -> TorusIsometry {
        let inv = self.linear.inverse();
        let tau: QVector = inv.matrix().mul_vec(&self.tau).iter().map(|x| -x).collect();
        TorusIsometry {
            tau: reduce_mod_one(&tau),
            linear: inv,
        }
    }

    pub fn apply(&self, x: &[Q]) -> QVector {
        let ax = self.linear.matrix().mul_vec(x);
        reduce_mod_one(&crate::matrix::vadd(&ax, &self.tau))
    }

    pub fn pow(&self, k: u64) -> TorusIsometry {
        let mut acc = TorusIsometry::identity(self.linear.form());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base).unwrap();
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base).unwrap();
            }
        }
        acc
    }
}

/// Every integer `A` with entries in `[-M, M]` and `AᵀGA = G`, ordered
/// lexicographically by columns (first column first, each column compared
/// entrywise).
pub fn brute_search(q: &QForm, bound: u32, config: &Config) -> Result<Vec<LatticeIsometry>> {
    let n = q.dim();
    if !q.is_nondegenerate() {
        return Err(Error::DegenerateForm);
    }
    let side = 2 * bound as u128 + 1;
    let needed = side.checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > config.search_budget as u128 {
        return Err(Error::BudgetExceeded {
            needed,
            budget: config.search_budget as u128,
        });
    }
    let g = integer_gram(q)?;
    let m = bound as i64;

    // Candidate columns for each distinct diagonal value, in lexicographic order.
    let mut cands: Vec<Vec<Vec<i64>>> = Vec::with_capacity(n);
    for j in 0..n {
        if let Some(prev) = (0..j).find(|&i| g[i][i] == g[j][j]) {
            let c = cands[prev].clone();
            cands.push(c);
            continue;
        }
        let mut list = Vec::new();
        let mut v = vec![-m; n];
        loop {
            if quad(&g, &v, &v) == g[j][j] as i128 {
                list.push(v.clone());
            }
            if !next_vector(&mut v, m) {
                break;
            }
        }
        cands.push(list);
    }

    let firsts: Vec<Vec<i64>> = cands[0].clone();
    let chunks = par::map(config.execution, &firsts, |c0| {
        let mut out = Vec::new();
        let mut cols = vec![c0.clone()];
        extend(&g, &cands, &mut cols, &mut out);
        out
    });
    chunks
        .into_iter()
        .flatten()
        .map(|cols| {
            let a = QMatrix::from_columns(
                n,
                &cols
                    .iter()
                    .map(|c| c.iter().map(|&x| rational::q(x)).collect())
                    .collect::<Vec<_>>(),
            );
            LatticeIsometry::new(a, q.clone())
        })
        .collect()
}

fn extend(g: &[Vec<i64>], cands: &[Vec<Vec<i64>>], cols: &mut Vec<Vec<i64>>, out: &mut Vec<Vec<Vec<i64>>>) {
    let j = cols.len();
    if j == g.len() {
        out.push(cols.clone());
        return;
    }
    for v in &cands[j] {
        if (0..j).all(|i| quad(g, &cols[i], v) == g[i][j] as i128) {
            cols.push(v.clone());
            extend(g, cands, cols, out);
            cols.pop();
        }
    }
}

fn quad(g: &[Vec<i64>], u: &[i64], v: &[i64]) -> i128 {
    let mut s = 0i128;
    for (i, ui) in u.iter().enumerate() {
        if *ui == 0 {
            continue;
        }
        for (j, vj) in v.iter().enumerate() {
            s += *ui as i128 * g[i][j] as i128 * *vj as i128;
        }
    }
    s
}

fn next_vector(v: &mut [i64], m: i64) -> bool {
    for i in (0..v.len()).rev() {
        if v[i] < m {
            v[i] += 1;
            return true;
        }
        v[i] = -m;
    }
    false
}

/// Gram matrix scaled to coprime integers; isometries of `cG` and `G` coincide.
fn integer_gram(q: &QForm) -> Result<Vec<Vec<i64>>> {
    let l = rational::lcm_denominators(q.gram().entries());
    let scaled = q.gram().scale(&Q::from_integer(l));
    let g = scaled
        .entries()
        .iter()
        .fold(BigInt::zero(), |acc, x| acc.gcd(x.numer()));
    let n = q.dim();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (scaled[(i, j)].numer() / &g)
                        .to_i64()
                        .ok_or(Error::Overflow("Gram entries"))
                })
                .collect()
        })
        .collect()
}

/// `A ≡ I (mod m)` entrywise.
pub fn congruence_kernel_member(a: &LatticeIsometry, m: i64) -> Result<bool> {
    if m < 3 {
        return Err(Error::InvalidModulus(m));
    }
    let m = BigInt::from(m);
    let id = QMatrix::identity(a.dim());
    Ok(a.matrix()
        .sub(&id)
        .entries()
        .iter()
        .all(|x| (x.to_integer() % &m).is_zero()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementOrder {
    Finite(u64),
    InfiniteWithinCap,
}

/// Least `k ≤ cap` with `Aᵏ = I`.
///
/// A finite-order integer matrix is semisimple with root-of-unity eigenvalues,
/// so its order is the lcm of the cyclotomic indices in its characteristic
/// polynomial; only that candidate needs an exact power check.
pub fn element_order(a: &LinearIsometry, cap: u64) -> ElementOrder {
    let p = char_poly(a.matrix());
    let (cyc, rest) = strip_cyclotomic(&p);
    if rest.degree() > 0 {
        return ElementOrder::InfiniteWithinCap;
    }
    let order = cyc.iter().fold(1u64, |acc, &(k, _)| acc.lcm(&k));
    if order <= cap && a.matrix().pow(order).is_identity() {
        ElementOrder::Finite(order)
    } else {
        ElementOrder::InfiniteWithinCap
    }
}
