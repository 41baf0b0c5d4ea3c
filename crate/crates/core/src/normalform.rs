//! Eigen-structure of hyperbolic isometries and rational invariant flags of
//! parabolic ones.

use nalgebra::{DMatrix, DVector};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::QForm;
use crate::isometries::LinearIsometry;
use crate::matrix::{primitive, unit_vector, vis_zero, vscale, QMatrix, QVector, Subspace};
use crate::poly::{self, char_poly, isolate_real_roots, refine_root, Poly, RootInterval};
use crate::rational::{self, frac, q, Q};
use crate::spectral::{classify_linear, IsoType};

/// A real algebraic number: a root of `min_poly` inside `interval`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraicReal {
    pub min_poly: Poly,
    pub interval: RootInterval,
}

impl AlgebraicReal {
    pub fn value(&self) -> f64 {
        if self.interval.lo == self.interval.hi {
            rational::to_f64(&self.interval.lo)
        } else {
            self.interval.midpoint_f64()
        }
    }

    pub fn exact(&self) -> Option<Q> {
        (self.min_poly.degree() == 1).then(|| -self.min_poly.coeff(0) / self.min_poly.coeff(1))
    }
}

#[derive(Clone, Debug)]
pub struct HyperbolicData {
    /// The real eigenvalue of modulus greater than one.
    pub lambda: AlgebraicReal,
    /// Unit eigenvectors for `λ` and `λ⁻¹`.
    pub v_plus: Vec<f64>,
    pub v_minus: Vec<f64>,
    /// `V_λ ⊕ V_{λ⁻¹}` and its complement, exactly, when `λ` has degree at most two.
    pub e_lambda: Option<Subspace>,
    pub e_perp_exact: Option<Subspace>,
    /// Orthonormal (Euclidean) basis of the `q`-complement of `E_λ`.
    pub e_perp: Vec<Vec<f64>>,
    /// Largest eigenvector residual `‖Av − μv‖`.
    pub residual: f64,
}

pub const EIGEN_RESIDUAL: f64 = 1e-10;

pub fn hyperbolic_split(a: &LinearIsometry) -> Result<HyperbolicData> {
    let class = classify_linear(a)?;
    if class != IsoType::Hyperbolic {
        return Err(Error::WrongClass(format!("{class:?}, expected Hyperbolic")));
    }
    let am = a.matrix();
    let lambda = expanding_eigenvalue(am)?;
    let lv = lambda.value();
    let af = am.to_f64();
    let (v_plus, r1) = float_eigenvector(&af, lv);
    let (v_minus, r2) = float_eigenvector(&af, 1.0 / lv);
    let residual = r1.max(r2);
    if residual > EIGEN_RESIDUAL {
        return Err(Error::NoConvergence(0));
    }

    let g = a.form().gram();
    let exact_poly = match lambda.exact() {
        Some(l) => Some(Poly::linear(&l).mul(&Poly::linear(&l.recip()))),
        None if lambda.min_poly.degree() == 2 => Some(lambda.min_poly.clone()),
        None => None,
    };
    let e_lambda = exact_poly.map(|p| crate::matrix::kernel_space(&p.eval_matrix(am)));
    let e_perp_exact = match &e_lambda {
        Some(e) => Some(a.form().orthogonal_complement(e.basis())?),
        None => None,
    };
    let gf = g.to_f64();
    let e_perp = match &e_perp_exact {
        Some(s) => orthonormalize(&s.basis().iter().map(|v| crate::matrix::vto_f64(v)).collect::<Vec<_>>()),
        None => {
            let rows = vec![mat_vec(&gf, &v_plus), mat_vec(&gf, &v_minus)];
            float_kernel(&rows, am.rows())
        }
    };
    Ok(HyperbolicData {
        lambda,
        v_plus,
        v_minus,
        e_lambda,
        e_perp_exact,
        e_perp,
        residual,
    })
}

/// The real eigenvalue of largest modulus off the unit circle.
pub fn expanding_eigenvalue(a: &QMatrix) -> Result<AlgebraicReal> {
    let f = poly::factor(&char_poly(a));
    let mut best: Option<AlgebraicReal> = None;
    for (factor, _) in &f.factors {
        if poly::all_roots_on_unit_circle(factor) {
            continue;
        }
        for iv in isolate_real_roots(factor) {
            let iv = separate_from_unit(factor, iv);
            let outside = iv.lo > Q::one() || iv.hi < -Q::one();
            if !outside {
                continue;
            }
            let iv = refine_root(factor, &iv, &frac(1, 1 << 60));
            let cand = AlgebraicReal { min_poly: factor.monic(), interval: iv };
            if best.as_ref().is_none_or(|b| cand.value().abs() > b.value().abs()) {
                best = Some(cand);
            }
        }
    }
    best.ok_or_else(|| Error::WrongClass("no real eigenvalue off the unit circle".into()))
}

/// Refines until the interval lies strictly outside or inside `[-1, 1]`.
fn separate_from_unit(p: &Poly, mut iv: RootInterval) -> RootInterval {
    let one = Q::one();
    loop {
        let outside = iv.lo > one || iv.hi < -one.clone();
        let inside = iv.lo >= -one.clone() && iv.hi <= one;
        if outside || inside || iv.lo == iv.hi {
            return iv;
        }
        let w = iv.width() / q(2);
        iv = refine_root(p, &iv, &w);
    }
}

fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(v)).iter().copied().collect()
}

fn normalize_line(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let lead = v.iter().copied().find(|x| x.abs() > 1e-12 * norm).unwrap_or(1.0);
    let s = lead.signum() / norm;
    for x in v.iter_mut() {
        *x *= s;
    }
}

/// Unit null vector of `A − μI` (smallest singular direction) and its residual.
fn float_eigenvector(a: &DMatrix<f64>, mu: f64) -> (Vec<f64>, f64) {
    let n = a.nrows();
    let m = a - DMatrix::identity(n, n) * mu;
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
        .unwrap();
    let mut v: Vec<f64> = vt.row(k).iter().copied().collect();
    normalize_line(&mut v);
    let r = (&m * DVector::from_column_slice(&v)).norm();
    (v, r)
}

/// Orthonormal basis of `{x : row · x = 0 for every row}`.
pub fn float_kernel(rows: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, r) in rows.iter().enumerate() {
        for j in 0..n {
            m[(i, j)] = r[j];
        }
    }
    let scale = m.norm().max(1.0);
    let svd = m.svd(false, true);
    let vt = svd.v_t.unwrap();
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= 1e-10 * scale)
        .map(|(k, _)| vt.row(k).iter().copied().collect())
        .collect()
}

pub fn orthonormalize(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for u in &out {
            let d: f64 = w.iter().zip(u).map(|(a, b)| a * b).sum();
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= d * ui;
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            out.push(w.iter().map(|x| x / norm).collect());
        }
    }
    out
}

pub fn float_form(q: &QForm, u: &[f64], v: &[f64]) -> f64 {
    let g = q.gram().to_f64();
    let gv = mat_vec(&g, v);
    u.iter().zip(&gv).map(|(a, b)| a * b).sum()
}

/// Rational invariant flag `L1 ⊂ P2 ⊂ K3` of a parabolic isometry, for `A^m` unipotent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParabolicFlag {
    pub m: u64,
    pub l1: Subspace,
    pub p2: Subspace,
    pub k3: Subspace,
    pub fix: Subspace,
}

/// Least `m` making `A^m` unipotent: the lcm of the cyclotomic orders present.
pub fn unipotent_power(a: &QMatrix) -> Result<u64> {
    let p = char_poly(a);
    let (cyc, rest) = poly::strip_cyclotomic(&p);
    if rest.degree() > 0 {
        return Err(Error::WrongClass("eigenvalues off the unit circle".into()));
    }
    Ok(cyc.iter().fold(1u64, |acc, &(k, _)| acc.lcm(&k)))
}

pub fn parabolic_flag(a: &LinearIsometry) -> Result<ParabolicFlag> {
    let class = classify_linear(a)?;
    if class != IsoType::Parabolic {
        return Err(Error::WrongClass(format!("{class:?}, expected Parabolic")));
    }
    let am = a.matrix();
    let n = am.rows();
    let m = unipotent_power(am)?;
    let nil = am.pow(m).sub(&QMatrix::identity(n));
    let nil2 = nil.mul(&nil);
    let l1 = crate::matrix::image_space(&nil2);
    let p2 = crate::matrix::image_space(&nil);
    let fix = crate::matrix::kernel_space(&nil);
    if l1.dim() != 1 || p2.dim() != 2 || !nil2.mul(&nil).is_zero() {
        return Err(Error::UnsupportedSignature);
    }
    let w = third_vector(&nil2);
    let mut k3_basis = p2.basis().to_vec();
    k3_basis.push(w);
    let k3 = Subspace::span(n, &k3_basis);
    Ok(ParabolicFlag { m, l1, p2, k3, fix })
}

/// First standard basis vector not killed by `N²`.
fn third_vector(nil2: &QMatrix) -> QVector {
    let n = nil2.rows();
    (0..n)
        .map(|i| unit_vector(n, i))
        .find(|e| !vis_zero(&nil2.mul_vec(e)))
        .expect("N² is nonzero")
}

/// The normal-form block `[[1, t, −t²/2], [0, 1, t], [0, 0, 1]]`.
pub fn normal_block(t: &Q) -> QMatrix {
    let mut b = QMatrix::identity(3);
    b[(0, 1)] = t.clone();
    b[(1, 2)] = t.clone();
    b[(0, 2)] = -(t * t) / q(2);
    b
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParabolicParameter {
    pub m: u64,
    pub t: Q,
    /// Columns `e1, e2, e3, f_1, …` with `P⁻¹ A^m P = block(t) ⊕ I`.
    pub basis: QMatrix,
}

/// Normal-form parameter of a parabolic isometry with its certificate basis.
///
/// With `w` the first standard basis vector outside `ker N²` (`N = A^m − I`),
/// write `N²w = c·e1` for `e1` primitive integral and `c > 0`. When `c` is a
/// rational square, `e3 = w` and `t = √c`; otherwise `e3 = c·w` and `t = c`.
/// The remaining adapted vectors follow from `N e3 = t e2 − (t²/2) e1`.
pub fn parabolic_parameter(a: &LinearIsometry) -> Result<ParabolicParameter> {
    let flag = parabolic_flag(a)?;
    let am = a.matrix();
    let n = am.rows();
    let nil = am.pow(flag.m).sub(&QMatrix::identity(n));
    let nil2 = nil.mul(&nil);
    let w = third_vector(&nil2);
    let v = nil2.mul_vec(&w);
    let e1 = primitive(&v);
    let idx = e1.iter().position(|x| !x.is_zero()).unwrap();
    let c = &v[idx] / &e1[idx];
    let (e3, t) = match rational_sqrt(&c) {
        Some(r) => (w, r),
        None => (vscale(&w, &c), c.clone()),
    };
    let t2 = &t * &t;
    let ne3 = nil.mul_vec(&e3);
    let e2: QVector = ne3
        .iter()
        .zip(&e1)
        .map(|(x, y)| (x + y * &t2 / q(2)) / &t)
        .collect();
    let mut cols = vec![e1.clone(), e2, e3];
    let mut span = Subspace::span(n, &[e1]);
    for f in flag.fix.basis() {
        if !span.contains(f) {
            span = span.sum(&Subspace::span(n, std::slice::from_ref(f)));
            cols.push(f.clone());
        }
    }
    let p = QMatrix::from_columns(n, &cols);
    let expected = QMatrix::block_diag(&[&normal_block(&t), &QMatrix::identity(n - 3)]);
    let pinv = p.inverse().ok_or(Error::UnsupportedSignature)?;
    if pinv.mul(&am.pow(flag.m)).mul(&p) != expected {
        return Err(Error::UnsupportedSignature);
    }
    Ok(ParabolicParameter { m: flag.m, t, basis: p })
}

/// Square root of a non-negative rational, when rational.
pub fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| Q::new(n, d))
}

/// Eigenline data in a serializable shape.
#[derive(Serialize)]
pub struct HyperbolicReport {
    pub lambda: f64,
    pub lambda_poly: Vec<String>,
    pub lambda_interval: [String; 2],
    pub v_plus: Vec<f64>,
    pub v_minus: Vec<f64>,
    pub e_perp: Vec<Vec<f64>>,
}

impl From<&HyperbolicData> for HyperbolicReport {
    fn from(h: &HyperbolicData) -> Self {
        HyperbolicReport {
            lambda: h.lambda.value(),
            lambda_poly: h.lambda.min_poly.coeffs().iter().map(rational::fmt_q).collect(),
            lambda_interval: [rational::fmt_q(&h.lambda.interval.lo), rational::fmt_q(&h.lambda.interval.hi)],
            v_plus: h.v_plus.clone(),
            v_minus: h.v_minus.clone(),
            e_perp: h.e_perp.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isometries::LatticeIsometry;

    fn par_form() -> QForm {
        QForm::from_i64(&[[0, 0, -2], [0, 2, -1], [-2, -1, 2]])
    }

    fn shift() -> LatticeIsometry {
        LatticeIsometry::from_i64(&[[1, 1, 0], [0, 1, 1], [0, 0, 1]], &par_form()).unwrap()
    }

    #[test]
    fn cat_map_split() {
        let qf = QForm::from_i64(&[[-2, 1], [1, 2]]);
        let a = LatticeIsometry::from_i64(&[[2, 1], [1, 1]], &qf).unwrap();
        let h = hyperbolic_split(&a).unwrap();
        let golden = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((h.lambda.value() - golden).abs() < 1e-12);
        let s5 = 5f64.sqrt();
        let vp = [1.0, (s5 - 1.0) / 2.0];
        let vm = [1.0, -(s5 + 1.0) / 2.0];
        let cross = |u: &[f64], v: &[f64]| (u[0] * v[1] - u[1] * v[0]).abs();
        assert!(cross(&h.v_plus, &vp) < 1e-10);
        assert!(cross(&h.v_minus, &vm) < 1e-10);
        assert!(float_form(&qf, &h.v_plus, &h.v_plus).abs() < 1e-10);
        assert!(float_form(&qf, &h.v_minus, &h.v_minus).abs() < 1e-10);
        assert_eq!(h.e_lambda.as_ref().unwrap().dim(), 2);
        assert!(h.e_perp.is_empty());
    }

    #[test]
    fn block_split_has_definite_complement() {
        let qf = QForm::from_i64(&[[-2, 1], [1, 2]]).direct_sum(&QForm::diag(&[1, 1]));
        let a = QMatrix::block_diag(&[&QMatrix::from_i64(&[[2, 1], [1, 1]]), &QMatrix::identity(2)]);
        let a = LatticeIsometry::new(a, qf.clone()).unwrap();
        let h = hyperbolic_split(&a).unwrap();
        let perp = h.e_perp_exact.unwrap();
        assert_eq!(perp, Subspace::span(4, &[unit_vector(4, 2), unit_vector(4, 3)]));
        assert!(qf.restrict(perp.basis()).unwrap().is_positive_definite());
    }

    #[test]
    fn wrong_class() {
        assert!(matches!(hyperbolic_split(&shift()), Err(Error::WrongClass(_))));
        let qf = QForm::from_i64(&[[-2, 1], [1, 2]]);
        let a = LatticeIsometry::from_i64(&[[2, 1], [1, 1]], &qf).unwrap();
        assert!(matches!(parabolic_flag(&a), Err(Error::WrongClass(_))));
    }

    #[test]
    fn shift_flag() {
        let f = parabolic_flag(&shift()).unwrap();
        assert_eq!(f.m, 1);
        assert_eq!(f.l1, Subspace::span(3, &[unit_vector(3, 0)]));
        assert_eq!(f.p2, Subspace::span(3, &[unit_vector(3, 0), unit_vector(3, 1)]));
        assert_eq!(f.k3, Subspace::full(3));
        assert_eq!(f.fix, f.l1);
    }

    #[test]
    fn padded_shift_flag() {
        let qf = par_form().direct_sum(&QForm::diag(&[1, 1]));
        let a = QMatrix::block_diag(&[shift().matrix(), &QMatrix::identity(2)]);
        let a = LatticeIsometry::new(a, qf).unwrap();
        let f = parabolic_flag(&a).unwrap();
        assert_eq!(f.fix, Subspace::span(5, &[unit_vector(5, 0), unit_vector(5, 3), unit_vector(5, 4)]));
        let p = parabolic_parameter(&a).unwrap();
        assert_eq!(p.t, q(1));
    }

    #[test]
    fn parameters() {
        assert_eq!(parabolic_parameter(&shift()).unwrap().t, q(1));
        assert_eq!(parabolic_parameter(&shift().pow(2)).unwrap().t, q(2));
        let t1 = normal_block(&q(1));
        let qf = QForm::from_i64(&[[0, 0, -1], [0, 1, -1], [-1, -1, 0]]);
        assert!(qf.is_lorentz());
        let a = LinearIsometry::new(t1, qf).unwrap();
        let p = parabolic_parameter(&a).unwrap();
        assert_eq!(p.t, q(1));
    }

    #[test]
    fn elliptic_twist_power() {
        // (-1) ⊕ shift-like block: the least unipotent power is 2.
        let qf = par_form().direct_sum(&QForm::diag(&[1]));
        let a = QMatrix::block_diag(&[&shift().matrix().clone(), &QMatrix::from_i64(&[[-1]])]);
        let a = LatticeIsometry::new(a, qf).unwrap();
        let f = parabolic_flag(&a).unwrap();
        assert_eq!(f.m, 2);
        assert_eq!(parabolic_parameter(&a).unwrap().t, q(2));
    }
}
