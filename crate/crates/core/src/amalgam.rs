//! Pointwise Lorentz metric on the quotient of `X × Y` by a diagonal circle
//! action: `g_X ⊕ g_Y|B^⊥` on the transversal `V_X ⊕ B^⊥`.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::forms::QForm;
use crate::matrix::{vis_zero, QMatrix, QVector};
use crate::rational::{self, serde_q, Q};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FrameDoc", into = "FrameDoc")]
pub struct PointFrame {
    gx: QForm,
    gy: QForm,
    a_vec: QVector,
    b_vec: QVector,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameDoc {
    #[serde(rename = "gX")]
    gx: QForm,
    #[serde(rename = "gY")]
    gy: QForm,
    #[serde(rename = "A", with = "serde_q::vec")]
    a: Vec<Q>,
    #[serde(rename = "B", with = "serde_q::vec")]
    b: Vec<Q>,
}

impl TryFrom<FrameDoc> for PointFrame {
    type Error = Error;
    fn try_from(d: FrameDoc) -> Result<Self> {
        PointFrame::new(d.gx, d.gy, d.a, d.b)
    }
}

impl From<PointFrame> for FrameDoc {
    fn from(f: PointFrame) -> Self {
        FrameDoc {
            gx: f.gx,
            gy: f.gy,
            a: f.a_vec,
            b: f.b_vec,
        }
    }
}

impl PointFrame {
    pub fn new(gx: QForm, gy: QForm, a_vec: QVector, b_vec: QVector) -> Result<Self> {
        check_dim(gx.dim(), a_vec.len())?;
        check_dim(gy.dim(), b_vec.len())?;
        if gx.dim() < 2 || !gx.is_lorentz() {
            return Err(Error::UnsupportedSignature);
        }
        if !gy.is_positive_definite() {
            return Err(Error::InvalidForm("gY must be positive definite".into()));
        }
        if vis_zero(&a_vec) || vis_zero(&b_vec) {
            return Err(Error::DegenerateFiber);
        }
        Ok(PointFrame { gx, gy, a_vec, b_vec })
    }

    pub fn gx(&self) -> &QForm {
        &self.gx
    }

    pub fn gy(&self) -> &QForm {
        &self.gy
    }

    pub fn a_vec(&self) -> &[Q] {
        &self.a_vec
    }

    pub fn b_vec(&self) -> &[Q] {
        &self.b_vec
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Amalgam {
    pub form: QForm,
    /// Basis of `B^⊥ ⊂ V_Y` used for the last `b − 1` coordinates.
    #[serde(with = "serde_q::vec_vec")]
    pub b_perp: Vec<QVector>,
}

/// The form `g_X ⊕ g_Y|B^⊥` on `V_X ⊕ B^⊥`, of dimension `a + b − 1`.
pub fn amalgamated_metric(f: &PointFrame) -> Result<Amalgam> {
    metric_for(&f.gx, &f.gy, &f.b_vec).map(|(form, b_perp)| Amalgam { form, b_perp })
}

fn metric_for(gx: &QForm, gy: &QForm, b: &[Q]) -> Result<(QForm, Vec<QVector>)> {
    if vis_zero(b) {
        return Err(Error::DegenerateFiber);
    }
    let perp = gy.orthogonal_complement(&[b.to_vec()])?;
    let b_perp = perp.basis().to_vec();
    let form = if b_perp.is_empty() {
        gx.clone()
    } else {
        gx.direct_sum(&gy.restrict(&b_perp)?)
    };
    Ok((form, b_perp))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub agrees: bool,
    /// Largest entry of `Tᵀ g' T − g`, where `T` identifies the transversals.
    pub residual: f64,
}

pub const INDEPENDENCE_TOL: f64 = 1e-12;

/// Compares the metric built from `(g_X, g_Y, A, B)` with the one built from
/// the transported fiber directions `(φA, ψB)`, after identifying
/// `V_X ⊕ B^⊥ → V_X ⊕ (ψB)^⊥` by `(φ, ψ)`. `φ`, `ψ` must be isometries
/// preserving the fiber lines.
pub fn representative_independence_check(f: &PointFrame, phi: &QMatrix, psi: &QMatrix) -> Result<IndependenceReport> {
    check_dim(f.gx.dim(), phi.rows())?;
    check_dim(f.gy.dim(), psi.rows())?;
    let preserves = |m: &QMatrix, g: &QForm| m.is_square() && m.transpose().mul(g.gram()).mul(m) == *g.gram();
    if !preserves(phi, &f.gx) || !preserves(psi, &f.gy) {
        return Err(Error::NotIsometry);
    }
    let a2 = phi.mul_vec(&f.a_vec);
    let b2 = psi.mul_vec(&f.b_vec);
    if !parallel(&a2, &f.a_vec) || !parallel(&b2, &f.b_vec) {
        return Err(Error::NotIsometry);
    }
    let (g1, perp1) = metric_for(&f.gx, &f.gy, &f.b_vec)?;
    let (g2, perp2) = metric_for(&f.gx, &f.gy, &b2)?;
    // T = φ ⊕ C with ψ·perp1 = perp2·C.
    let a = f.gx.dim();
    let k = perp1.len();
    let mut t = QMatrix::zeros(a + k, a + k);
    for i in 0..a {
        for j in 0..a {
            t[(i, j)] = phi[(i, j)].clone();
        }
    }
    if k > 0 {
        let p2 = QMatrix::from_columns(f.gy.dim(), &perp2);
        for (j, v) in perp1.iter().enumerate() {
            let image = psi.mul_vec(v);
            let coords = solve_in_span(&p2, &image).ok_or(Error::NotIsometry)?;
            for (i, c) in coords.into_iter().enumerate() {
                t[(a + i, a + j)] = c;
            }
        }
    }
    let pulled = t.transpose().mul(g2.gram()).mul(&t);
    let diff = pulled.sub(g1.gram());
    let residual = diff.entries().iter().map(|x| rational::to_f64(&x.abs())).fold(0.0, f64::max);
    Ok(IndependenceReport {
        agrees: residual <= INDEPENDENCE_TOL,
        residual,
    })
}

fn parallel(u: &[Q], v: &[Q]) -> bool {
    (0..u.len()).all(|i| (i..u.len()).all(|j| &u[i] * &v[j] == &u[j] * &v[i]))
}

/// Coordinates of `v` in the column span of `p`, if it lies there.
fn solve_in_span(p: &QMatrix, v: &[Q]) -> Option<QVector> {
    let pt = p.transpose();
    let x = pt.mul(p).solve(&pt.mul_vec(v))?;
    (p.mul_vec(&x) == v).then_some(x)
}

/// Cayley transform `(I − S)⁻¹(I + S)` with `S = G⁻¹K`, an isometry of `G`
/// for skew `K`; it fixes `ker K`. Returns `None` when `I − S` is singular.
pub fn cayley_isometry(g: &QForm, k: &QMatrix) -> Option<QMatrix> {
    let n = g.dim();
    if k.rows() != n || k.transpose() != k.neg() {
        return None;
    }
    let s = g.gram().inverse()?.mul(k);
    let id = QMatrix::identity(n);
    Some(id.sub(&s).inverse()?.mul(&id.add(&s)))
}

/// The skew matrix `Σ c_ij (u_i u_jᵀ − u_j u_iᵀ)` over pairs of a basis `u` of
/// `b`'s Euclidean annihilator, so that `K b = 0`. Feeding it to
/// [`cayley_isometry`] gives isometries fixing `b`.
pub fn skew_fixing(b: &[Q], coeffs: &[Q]) -> QMatrix {
    let n = b.len();
    let ann = QMatrix::from_rows(vec![b.to_vec()]).unwrap().kernel();
    let mut k = QMatrix::zeros(n, n);
    let mut idx = 0;
    for i in 0..ann.len() {
        for j in (i + 1)..ann.len() {
            let c = match coeffs.get(idx) {
                Some(c) => c.clone(),
                None => Q::zero(),
            };
            idx += 1;
            if c.is_zero() {
                continue;
            }
            for r in 0..n {
                for s in 0..n {
                    let x = &ann[i][r] * &ann[j][s] - &ann[j][r] * &ann[i][s];
                    k[(r, s)] += &c * x;
                }
            }
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, q};

    fn frame() -> PointFrame {
        PointFrame::new(QForm::diag(&[-1, 1]), QForm::diag(&[1, 1]), vec![q(1), q(0)], vec![q(1), q(0)]).unwrap()
    }

    #[test]
    fn plane_fixture() {
        let m = amalgamated_metric(&frame()).unwrap();
        assert_eq!(m.form, QForm::diag(&[-1, 1, 1]));
        assert_eq!(m.b_perp, vec![vec![q(0), q(1)]]);
    }

    #[test]
    fn circle_factor() {
        let f = PointFrame::new(QForm::diag(&[-1, 1]), QForm::diag(&[3]), vec![q(1), q(1)], vec![q(2)]).unwrap();
        assert_eq!(amalgamated_metric(&f).unwrap().form, QForm::diag(&[-1, 1]));
    }

    #[test]
    fn scaling_b() {
        let f = PointFrame::new(QForm::diag(&[-1, 1]), QForm::diag(&[1, 1]), vec![q(1), q(0)], vec![q(-7), q(0)]).unwrap();
        assert_eq!(amalgamated_metric(&f).unwrap().form, amalgamated_metric(&frame()).unwrap().form);
    }

    #[test]
    fn degenerate_fiber() {
        let e = PointFrame::new(QForm::diag(&[-1, 1]), QForm::diag(&[1, 1]), vec![q(1), q(0)], vec![q(0), q(0)]);
        assert_eq!(e.unwrap_err(), Error::DegenerateFiber);
    }

    #[test]
    fn independence() {
        let f = frame();
        let id2 = QMatrix::identity(2);
        assert!(representative_independence_check(&f, &id2, &id2).unwrap().agrees);
        let gy = QForm::diag(&[1, 1, 1]);
        let f3 = PointFrame::new(QForm::diag(&[-1, 1]), gy.clone(), vec![q(1), q(0)], vec![q(1), q(0), q(0)]).unwrap();
        let rot = QMatrix::from_rows(vec![
            vec![q(1), q(0), q(0)],
            vec![q(0), frac(3, 5), frac(-4, 5)],
            vec![q(0), frac(4, 5), frac(3, 5)],
        ])
        .unwrap();
        let phi = QMatrix::diag(&[q(1), q(-1)]);
        let r = representative_independence_check(&f3, &phi, &rot).unwrap();
        assert!(r.agrees);
        assert_eq!(r.residual, 0.0);
        let bad = QMatrix::diag(&[q(1), q(2), q(1)]);
        assert_eq!(representative_independence_check(&f3, &phi, &bad).unwrap_err(), Error::NotIsometry);
    }

    #[test]
    fn cayley_rotations_fix_b() {
        let gy = QForm::from_i64(&[[2, 1, 0], [1, 2, 0], [0, 0, 1]]);
        let b = vec![q(1), q(-1), q(2)];
        let psi = cayley_isometry(&gy, &skew_fixing(&b, &[frac(1, 3)])).unwrap();
        assert_eq!(psi.transpose().mul(gy.gram()).mul(&psi), *gy.gram());
        assert_eq!(psi.mul_vec(&b), b);
        assert!(!psi.is_identity());
        let f = PointFrame::new(QForm::diag(&[-1, 1]), gy, vec![q(0), q(1)], b).unwrap();
        assert!(representative_independence_check(&f, &QMatrix::identity(2), &psi).unwrap().agrees);
    }
}
