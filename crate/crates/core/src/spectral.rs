//! Characteristic polynomials, the Jordan–Chevalley split, the
//! elliptic/parabolic/hyperbolic trichotomy and the non-escaping test for
//! induced linear representations.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::isometries::{LatticeIsometry, LinearIsometry};
use crate::matrix::{vis_zero, QMatrix, QVector, Subspace};
use crate::poly::{self, all_roots_on_unit_circle, Poly};
use crate::rational::Q;

pub use crate::poly::char_poly;

/// `A = S·U = U·S` with `S` semisimple and `U` unipotent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JordanChevalley {
    pub s: QMatrix,
    pub u: QMatrix,
}

/// Newton iteration `S ← S − s(S)·s′(S)⁻¹` on the squarefree part `s` of the
/// characteristic polynomial, started at `A`.
pub fn jordan_chevalley(a: &QMatrix) -> Result<JordanChevalley> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.rows(), found: a.cols() });
    }
    let Some(a_inv) = a.inverse() else {
        return Err(Error::NotInvertible);
    };
    let sf = char_poly(a).squarefree_part();
    let dsf = sf.derivative();
    let mut s = a.clone();
    loop {
        let v = sf.eval_matrix(&s);
        if v.is_zero() {
            break;
        }
        let d = dsf.eval_matrix(&s).inverse().expect("s' is invertible at S");
        s = s.sub(&v.mul(&d));
    }
    // U = S⁻¹A; S is a polynomial in A, so S⁻¹ = A⁻¹ · (A S⁻¹) commutes as well.
    let u = match s.inverse() {
        Some(si) => si.mul(a),
        None => a_inv.mul(a),
    };
    Ok(JordanChevalley { s, u })
}

/// True iff the minimal polynomial of `a` is squarefree.
pub fn is_semisimple(a: &QMatrix) -> bool {
    char_poly(a).squarefree_part().eval_matrix(a).is_zero()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IsoType {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// Trichotomy for `A ∈ O(q, ℤ)`; any irreducible non-cyclotomic factor of the
/// characteristic polynomial has a root off the unit circle by Kronecker's theorem.
pub fn classify(a: &LatticeIsometry) -> Result<IsoType> {
    if !a.form().is_lorentz() {
        return Err(Error::UnsupportedSignature);
    }
    let (_, rest) = poly::strip_cyclotomic(&char_poly(a.matrix()));
    Ok(if rest.degree() > 0 {
        IsoType::Hyperbolic
    } else if is_semisimple(a.matrix()) {
        IsoType::Elliptic
    } else {
        IsoType::Parabolic
    })
}

/// Trichotomy for a rational isometry, via an exact unit-circle test on each
/// irreducible factor.
pub fn classify_linear(a: &LinearIsometry) -> Result<IsoType> {
    if !a.form().is_lorentz() {
        return Err(Error::UnsupportedSignature);
    }
    let p = char_poly(a.matrix());
    Ok(if unit_circle_part(&p).degree() < p.degree() {
        IsoType::Hyperbolic
    } else if is_semisimple(a.matrix()) {
        IsoType::Elliptic
    } else {
        IsoType::Parabolic
    })
}

/// Trichotomy by spectrum alone, for matrices whose preserved form is not known.
pub fn classify_matrix(a: &QMatrix) -> IsoType {
    let p = char_poly(a);
    if unit_circle_part(&p).degree() < p.degree() {
        IsoType::Hyperbolic
    } else if is_semisimple(a) {
        IsoType::Elliptic
    } else {
        IsoType::Parabolic
    }
}

/// Product, with multiplicity, of the irreducible factors of `p` whose roots
/// all have modulus one (monic).
pub fn unit_circle_part(p: &Poly) -> Poly {
    if p.is_integral() && p.is_monic() {
        let (_, rest) = poly::strip_cyclotomic(p);
        return p.exact_div(&rest).unwrap().monic();
    }
    let f = poly::factor(p);
    f.factors
        .iter()
        .filter(|(g, _)| all_roots_on_unit_circle(g))
        .fold(Poly::one(), |acc, (g, m)| acc.mul(&g.pow(*m)))
        .monic()
}

pub fn sym_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Upper-triangle coordinates `(b_ij)_{i ≤ j}` in row-major order.
pub fn sym_coords(b: &QMatrix) -> QVector {
    let n = b.rows();
    let mut v = Vec::with_capacity(sym_dim(n));
    for i in 0..n {
        for j in i..n {
            v.push(b[(i, j)].clone());
        }
    }
    v
}

pub fn sym_matrix(n: usize, coords: &[Q]) -> QMatrix {
    let mut b = QMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            b[(i, j)] = coords[k].clone();
            b[(j, i)] = coords[k].clone();
            k += 1;
        }
    }
    b
}

/// Matrix of `B ↦ A⁻ᵀ·B·A⁻¹` on symmetric matrices in upper-triangle coordinates.
pub fn sym_action(a: &QMatrix) -> Result<QMatrix> {
    let n = a.rows();
    check_dim(n, a.cols())?;
    let inv = a.inverse().ok_or(Error::NotInvertible)?;
    let inv_t = inv.transpose();
    let dim = sym_dim(n);
    let mut cols = Vec::with_capacity(dim);
    let mut unit = vec![Q::zero(); dim];
    for k in 0..dim {
        unit[k] = Q::from_integer(1.into());
        let b = sym_matrix(n, &unit);
        cols.push(sym_coords(&inv_t.mul(&b).mul(&inv)));
        unit[k] = Q::zero();
    }
    Ok(QMatrix::from_columns(dim, &cols))
}

/// Basis of the symmetric matrices `B` with `gᵀBg = B` for every generator.
pub fn invariant_forms(gens: &[QMatrix]) -> Result<Vec<QMatrix>> {
    let Some(first) = gens.first() else {
        return Ok(Vec::new());
    };
    let n = first.rows();
    let dim = sym_dim(n);
    let mut rows = Vec::new();
    for g in gens {
        check_dim(n, g.rows())?;
        let m = sym_action(g)?.sub(&QMatrix::identity(dim));
        rows.extend(m.to_rows());
    }
    let stacked = QMatrix::from_rows(rows)?;
    Ok(stacked.kernel().iter().map(|v| sym_matrix(n, v)).collect())
}

/// Plücker coordinates of the span of `vectors`, indexed by increasing `d`-subsets.
pub fn plucker(vectors: &[QVector]) -> Result<QVector> {
    let Some(first) = vectors.first() else {
        return Err(Error::UnsupportedRep("empty plane".into()));
    };
    let n = first.len();
    let d = vectors.len();
    let m = QMatrix::from_columns(n, vectors);
    let cols: Vec<usize> = (0..d).collect();
    Ok(poly::Subsets::new(n, d)
        .map(|rows| m.submatrix(&rows, &cols).det())
        .collect())
}

/// `Λᵈ A` on Plücker coordinates.
pub fn grassmann_action(a: &QMatrix, d: usize) -> QMatrix {
    let n = a.rows();
    let subsets: Vec<Vec<usize>> = poly::Subsets::new(n, d).collect();
    let k = subsets.len();
    let mut out = QMatrix::zeros(k, k);
    for (i, rows) in subsets.iter().enumerate() {
        for (j, cols) in subsets.iter().enumerate() {
            out[(i, j)] = a.submatrix(rows, cols).det();
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rep {
    Identity,
    Sym,
    Grassmann(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RepPoint {
    Vector(QVector),
    /// A symmetric matrix, for the `Sym` representation.
    Form(QMatrix),
    /// A `d`-plane given by a basis, for `Grassmann(d)`.
    Plane(Vec<QVector>),
}

/// Matrix of `A` acting in the representation `rep`.
pub fn rep_matrix(a: &QMatrix, rep: Rep) -> Result<QMatrix> {
    match rep {
        Rep::Identity => Ok(a.clone()),
        Rep::Sym => sym_action(a),
        Rep::Grassmann(d) if d >= 1 && d <= a.rows() => Ok(grassmann_action(a, d)),
        Rep::Grassmann(d) => Err(Error::UnsupportedRep(format!("Grassmannian of {d}-planes in dimension {}", a.rows()))),
    }
}

/// Whether `p` is fixed by the hyperbolic and unipotent parts of `A^F`.
///
/// For vector representations: `U^F p = p` and `p ∈ ker c(A^F)` where `c`
/// collects the unit-circle factors of the characteristic polynomial of `A^F`.
/// For Grassmannians the same test is projective: `U^F w = w` for the Plücker
/// vector `w`, and all eigenvalues of `A^F` on the cyclic span of `w` share one modulus.
pub fn is_nonescaping(a: &QMatrix, rep: Rep, p: &RepPoint) -> Result<bool> {
    let n = a.rows();
    check_dim(n, a.cols())?;
    let vec = match (rep, p) {
        (Rep::Identity, RepPoint::Vector(v)) => {
            check_dim(n, v.len())?;
            v.clone()
        }
        (Rep::Sym, RepPoint::Form(b)) => {
            check_dim(n, b.rows())?;
            if !b.is_symmetric() {
                return Err(Error::InvalidForm("point is not symmetric".into()));
            }
            sym_coords(b)
        }
        (Rep::Sym, RepPoint::Vector(v)) => {
            check_dim(sym_dim(n), v.len())?;
            v.clone()
        }
        (Rep::Grassmann(d), RepPoint::Plane(basis)) => {
            check_dim(d, basis.len())?;
            for b in basis {
                check_dim(n, b.len())?;
            }
            let w = plucker(basis)?;
            if vis_zero(&w) {
                return Err(Error::UnsupportedRep("plane basis is degenerate".into()));
            }
            return grassmann_nonescaping(a, d, &w);
        }
        _ => return Err(Error::UnsupportedRep(format!("{rep:?} with {p:?}"))),
    };
    if vis_zero(&vec) {
        return Ok(true);
    }
    let jc = jordan_chevalley(a)?;
    let af = rep_matrix(a, rep)?;
    let uf = rep_matrix(&jc.u, rep)?;
    if uf.mul_vec(&vec) != vec {
        return Ok(false);
    }
    let c = unit_circle_part(&char_poly(&af));
    Ok(vis_zero(&c.eval_matrix(&af).mul_vec(&vec)))
}

fn grassmann_nonescaping(a: &QMatrix, d: usize, w: &[Q]) -> Result<bool> {
    let jc = jordan_chevalley(a)?;
    let af = grassmann_action(a, d);
    let uf = grassmann_action(&jc.u, d);
    if uf.mul_vec(w) != w {
        return Ok(false);
    }
    let (mu, _) = krylov_min_poly(&af, w);
    let k = mu.degree();
    let c0 = mu.coeff(0);
    if c0.is_zero() {
        return Err(Error::NotInvertible);
    }
    // Roots of mu are the eigenvalues present in w; they share a modulus r iff
    // every root of mu, raised to the k-th power, has modulus |c0| = r^k.
    let comp = companion(&mu);
    let b = comp.pow(k as u64).scale(&c0.abs().recip());
    Ok(all_roots_on_unit_circle(&char_poly(&b)))
}

/// Minimal polynomial of `v` under `a` (monic) and the Krylov basis `v, av, …`.
pub fn krylov_min_poly(a: &QMatrix, v: &[Q]) -> (Poly, Vec<QVector>) {
    let n = a.rows();
    let mut basis: Vec<QVector> = vec![v.to_vec()];
    loop {
        let next = a.mul_vec(basis.last().unwrap());
        let span = Subspace::span(n, &basis);
        if span.contains(&next) {
            // Solve next = sum c_i basis_i.
            let m = QMatrix::from_columns(n, &basis);
            let mt = m.transpose();
            let gram = mt.mul(&m);
            let rhs = mt.mul_vec(&next);
            let c = gram.solve(&rhs).expect("Krylov basis is independent");
            let mut coeffs: Vec<Q> = c.iter().map(|x| -x.clone()).collect();
            coeffs.push(Q::from_integer(1.into()));
            return (Poly::new(coeffs), basis);
        }
        basis.push(next);
    }
}

/// Companion matrix acting on the basis `1, x, …, x^(k−1)` of `ℚ[x]/(p)`.
pub fn companion(p: &Poly) -> QMatrix {
    let p = p.monic();
    let k = p.degree();
    let mut c = QMatrix::zeros(k, k);
    for i in 0..k {
        if i + 1 < k {
            c[(i + 1, i)] = Q::from_integer(1.into());
        }
        c[(i, k - 1)] = -p.coeff(i);
    }
    c
}
