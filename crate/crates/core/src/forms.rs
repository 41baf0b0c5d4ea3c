//! Symmetric rational bilinear forms: signature, the Lorentz predicate and orthogonal complements.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::matrix::{dot, QMatrix, QVector, Subspace};
use crate::rational::{serde_q, Q};
use num_traits::{Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

impl Signature {
    pub fn dim(&self) -> usize {
        self.n_plus + self.n_minus + self.n_zero
    }
}

/// A symmetric bilinear form given by its Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FormDoc", into = "FormDoc")]
pub struct QForm {
    gram: QMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormDoc {
    #[serde(default)]
    dim: Option<usize>,
    #[serde(with = "serde_q::vec_vec")]
    gram: Vec<Vec<Q>>,
}

impl TryFrom<FormDoc> for QForm {
    type Error = Error;
    fn try_from(doc: FormDoc) -> Result<Self> {
        let gram = QMatrix::from_rows(doc.gram)?;
        if let Some(d) = doc.dim {
            check_dim(d, gram.rows())?;
        }
        QForm::new(gram)
    }
}

impl From<QForm> for FormDoc {
    fn from(q: QForm) -> Self {
        FormDoc {
            dim: Some(q.dim()),
            gram: q.gram.to_rows(),
        }
    }
}

impl QForm {
    pub fn new(gram: QMatrix) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::InvalidForm(format!(
                "Gram matrix is {}x{}",
                gram.rows(),
                gram.cols()
            )));
        }
        if gram.rows() == 0 {
            return Err(Error::InvalidForm("empty Gram matrix".into()));
        }
        if !gram.is_symmetric() {
            return Err(Error::InvalidForm("Gram matrix is not symmetric".into()));
        }
        Ok(QForm { gram })
    }

    /// Panics on non-symmetric input; meant for literals.
    pub fn from_i64<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        Self::new(QMatrix::from_i64(rows)).expect("symmetric Gram literal")
    }

    pub fn diag(entries: &[i64]) -> Self {
        Self::new(QMatrix::diag(
            &entries.iter().map(|&x| crate::rational::q(x)).collect::<Vec<_>>(),
        ))
        .unwrap()
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &QMatrix {
        &self.gram
    }

    pub fn into_gram(self) -> QMatrix {
        self.gram
    }

    pub fn is_integral(&self) -> bool {
        self.gram.is_integral()
    }

    pub fn inner(&self, u: &[Q], v: &[Q]) -> Result<Q> {
        check_dim(self.dim(), u.len())?;
        check_dim(self.dim(), v.len())?;
        Ok(dot(u, &self.gram.mul_vec(v)))
    }

    pub fn norm(&self, u: &[Q]) -> Result<Q> {
        self.inner(u, u)
    }

    pub fn signature(&self) -> Signature {
        congruence_signature(&self.gram)
    }

    pub fn is_lorentz(&self) -> bool {
        let s = self.signature();
        s.n_minus == 1 && s.n_zero == 0 && s.n_plus + 1 == self.dim()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.signature().n_plus == self.dim()
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.gram.det().is_zero()
    }

    /// `{v : q(v, s) = 0 for all s in span}`.
    pub fn orthogonal_complement(&self, span: &[QVector]) -> Result<Subspace> {
        for s in span {
            check_dim(self.dim(), s.len())?;
        }
        if !self.is_nondegenerate() {
            return Err(Error::DegenerateForm);
        }
        Ok(self.orthogonal_complement_unchecked(span))
    }

    /// Complement without the nondegeneracy requirement.
    pub fn orthogonal_complement_unchecked(&self, span: &[QVector]) -> Subspace {
        let n = self.dim();
        if span.is_empty() {
            return Subspace::full(n);
        }
        let rows: Vec<QVector> = span.iter().map(|s| self.gram.mul_vec(s)).collect();
        let m = QMatrix::from_rows(rows).unwrap();
        Subspace::span(n, &m.kernel())
    }

    /// Gram matrix of the restriction to the span of `basis` (columns of `P`: `PᵀGP`).
    pub fn restrict(&self, basis: &[QVector]) -> Result<QForm> {
        for b in basis {
            check_dim(self.dim(), b.len())?;
        }
        let p = QMatrix::from_columns(self.dim(), basis);
        QForm::new(p.transpose().mul(&self.gram).mul(&p))
    }

    /// `AᵀGA`
    pub fn pullback(&self, a: &QMatrix) -> Result<QForm> {
        check_dim(self.dim(), a.rows())?;
        QForm::new(a.transpose().mul(&self.gram).mul(a))
    }

    pub fn direct_sum(&self, other: &QForm) -> QForm {
        QForm {
            gram: QMatrix::block_diag(&[&self.gram, &other.gram]),
        }
    }

    pub fn scale(&self, c: &Q) -> QForm {
        QForm {
            gram: self.gram.scale(c),
        }
    }
}

/// Signature of a symmetric matrix; errors on non-symmetric input.
pub fn signature(gram: &QMatrix) -> Result<Signature> {
    Ok(QForm::new(gram.clone())?.signature())
}

/// Counts signs on the diagonal of a symmetric congruence reduction `PᵀGP = D`.
fn congruence_signature(g: &QMatrix) -> Signature {
    let n = g.rows();
    let mut m = g.clone();
    let mut sig = Signature { n_plus: 0, n_minus: 0, n_zero: 0 };
    let mut k = 0;
    while k < n {
        if let Some(p) = (k..n).find(|&i| !m[(i, i)].is_zero()) {
            swap_sym(&mut m, k, p);
        } else {
            let off = (k..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).find(|&(i, j)| !m[(i, j)].is_zero());
            let Some((i, j)) = off else {
                sig.n_zero += n - k;
                break;
            };
            // e_i <- e_i + e_j turns the zero diagonal entry into 2 m_ij.
            add_sym(&mut m, i, j, &Q::from_integer(1.into()));
            swap_sym(&mut m, k, i);
        }
        let pivot = m[(k, k)].clone();
        for r in k + 1..n {
            if !m[(r, k)].is_zero() {
                let f = -(&m[(r, k)] / &pivot);
                add_sym(&mut m, r, k, &f);
            }
        }
        if pivot.is_positive() {
            sig.n_plus += 1;
        } else {
            sig.n_minus += 1;
        }
        k += 1;
    }
    sig
}

fn swap_sym(m: &mut QMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    let n = m.rows();
    for j in 0..n {
        let t = m[(a, j)].clone();
        m[(a, j)] = m[(b, j)].clone();
        m[(b, j)] = t;
    }
    for i in 0..n {
        let t = m[(i, a)].clone();
        m[(i, a)] = m[(i, b)].clone();
        m[(i, b)] = t;
    }
}

/// Congruence by the elementary matrix `e_dst <- e_dst + f e_src`.
fn add_sym(m: &mut QMatrix, dst: usize, src: usize, f: &Q) {
    let n = m.rows();
    for j in 0..n {
        let v = &m[(src, j)] * f;
        m[(dst, j)] += v;
    }
    for i in 0..n {
        let v = &m[(i, src)] * f;
        m[(i, dst)] += v;
    }
}
