//! Invariant Lorentz forms: averaging along one isometry, the splitting of a
//! non-elementary group into unbounded and bounded parts, and the group-invariant form.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::config::Config;
use crate::error::{check_dim, Error, Result};
use crate::forms::{QForm, Signature};
use crate::matrix::{image_space, kernel_space, vto_f64, QMatrix, QVector, Subspace};
use crate::poly::{self, char_poly, circle_counts};
use crate::rational::{self, q, Q};
use crate::spectral::{
    classify_matrix, companion, is_nonescaping, jordan_chevalley, krylov_min_poly, sym_action,
    sym_coords, sym_matrix, unit_circle_part, IsoType, Rep, RepPoint,
};

#[derive(Clone, Debug, Serialize)]
pub struct AverageResult {
    /// The averaged form, in floating point.
    pub qbar: Vec<Vec<f64>>,
    /// The same form exactly, when an exact path applied.
    #[serde(skip)]
    pub exact_form: Option<QMatrix>,
    /// `‖A^F q̄ − q̄‖_∞`
    pub residual: f64,
    pub terms_used: usize,
    pub exact: bool,
    pub signature: Signature,
}

impl AverageResult {
    pub fn is_lorentz(&self) -> bool {
        let s = self.signature;
        s.n_minus == 1 && s.n_zero == 0
    }
}

/// Weights for the numeric orbit mean.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weights {
    /// Plain Cesàro means `(1/N) Σ_{k<N}`.
    Uniform,
    /// Bump-weighted means with weight `exp(−1/(t(1−t)))` at `t = (k + ½)/N`;
    /// these converge faster than any power of `N` for quasi-periodic orbits.
    Smooth,
}

/// Average of `q0` along the powers of `A` acting on forms by `B ↦ A⁻ᵀBA⁻¹`.
///
/// The hyperbolic and unipotent parts of `A` must fix `q0`, so every term of
/// the orbit equals the corresponding term of the elliptic part. When that part
/// has finite order `m` the finite mean over one period is returned exactly;
/// otherwise an exact period of the orbit is looked for, and failing that a
/// numeric weighted mean is taken.
pub fn average_form(a: &QMatrix, q0: &QForm, config: &Config) -> Result<AverageResult> {
    let n = q0.dim();
    check_dim(n, a.rows())?;
    if !q0.is_lorentz() {
        return Err(Error::UnsupportedSignature);
    }
    if !is_nonescaping(a, Rep::Sym, &RepPoint::Form(q0.gram().clone()))? {
        return Err(Error::NotRecurrent);
    }
    let af = sym_action(a)?;
    let x0 = sym_coords(q0.gram());
    if let Some(m) = elliptic_order(a) {
        if m as usize <= config.max_steps {
            let terms = orbit(&af, &x0, m as usize);
            return Ok(exact_result(n, &af, mean(&terms), m as usize));
        }
    }
    if let Some(terms) = closed_orbit(&af, &x0, config.order_cap as usize) {
        let len = terms.len();
        return Ok(exact_result(n, &af, mean(&terms), len));
    }
    numeric_average(a, q0, Weights::Smooth, config.tol, config.n_max)
}

/// Order of the elliptic part of `A`, when it is finite and readable from
/// the characteristic polynomial: every unit-circle root is a root of unity,
/// and the real eigenvalues off the circle contribute a sign.
pub fn elliptic_order(a: &QMatrix) -> Option<u64> {
    let f = poly::factor(&char_poly(a));
    let mut order = 1u64;
    for (g, _) in &f.factors {
        if let Some(k) = poly::cyclotomic_index(g) {
            order = order.lcm(&k);
            continue;
        }
        let on_circle = circle_counts(g).map_or(0, |c| c.on_circle);
        if on_circle > 0 {
            return None;
        }
        let real = poly::count_real_roots(g, &poly::Ext::NegInf, &poly::Ext::PosInf);
        if real != g.degree() {
            return None;
        }
        let negative = poly::count_real_roots(g, &poly::Ext::NegInf, &poly::Ext::Finite(Q::zero()));
        if negative > 0 {
            order = order.lcm(&2);
        }
    }
    Some(order)
}

fn orbit(af: &QMatrix, x0: &[Q], len: usize) -> Vec<QVector> {
    let mut out = Vec::with_capacity(len);
    let mut x = x0.to_vec();
    for _ in 0..len {
        let next = af.mul_vec(&x);
        out.push(x);
        x = next;
    }
    out
}

/// The orbit of `x0` up to its first return, if it returns within `cap` steps.
fn closed_orbit(af: &QMatrix, x0: &[Q], cap: usize) -> Option<Vec<QVector>> {
    let mut out = vec![x0.to_vec()];
    let mut x = af.mul_vec(x0);
    while out.len() <= cap {
        if x == x0 {
            return Some(out);
        }
        let next = af.mul_vec(&x);
        out.push(x);
        x = next;
    }
    None
}

fn mean(terms: &[QVector]) -> QVector {
    let k = q(terms.len() as i64);
    let mut acc = vec![Q::zero(); terms[0].len()];
    for t in terms {
        for (a, b) in acc.iter_mut().zip(t) {
            *a += b;
        }
    }
    acc.into_iter().map(|x| x / &k).collect()
}

fn exact_result(n: usize, af: &QMatrix, coords: QVector, terms: usize) -> AverageResult {
    let image = af.mul_vec(&coords);
    let residual = image
        .iter()
        .zip(&coords)
        .map(|(a, b)| rational::to_f64(&(a - b).abs()))
        .fold(0.0, f64::max);
    let form = sym_matrix(n, &coords);
    let signature = QForm::new(form.clone()).map(|f| f.signature()).unwrap_or(Signature {
        n_plus: 0,
        n_minus: 0,
        n_zero: n,
    });
    AverageResult {
        qbar: to_rows_f64(&form),
        exact_form: Some(form),
        residual,
        terms_used: terms,
        exact: true,
        signature,
    }
}

fn to_rows_f64(m: &QMatrix) -> Vec<Vec<f64>> {
    m.to_rows().iter().map(|r| vto_f64(r)).collect()
}

/// Numeric orbit mean, iterated on the cyclic subspace of `q0` where the
/// action is bounded. Stops once the `N`- and `2N`-term means agree within `tol`.
pub fn numeric_average(a: &QMatrix, q0: &QForm, weights: Weights, tol: f64, n_max: usize) -> Result<AverageResult> {
    let n = q0.dim();
    let af = sym_action(a)?;
    let x0 = sym_coords(q0.gram());
    let (mu, basis) = krylov_min_poly(&af, &x0);
    let comp = companion(&mu).to_f64();
    let d = basis.len();
    let kb: Vec<Vec<f64>> = basis.iter().map(|v| vto_f64(v)).collect();
    let coords_mean = |terms: usize| -> Vec<f64> {
        let mut c = vec![0.0; d];
        c[0] = 1.0;
        let mut acc = vec![0.0; d];
        let mut total = 0.0;
        for k in 0..terms {
            let w = match weights {
                Weights::Uniform => 1.0,
                Weights::Smooth => {
                    let t = (k as f64 + 0.5) / terms as f64;
                    (-1.0 / (t * (1.0 - t))).exp()
                }
            };
            total += w;
            for i in 0..d {
                acc[i] += w * c[i];
            }
            let next: Vec<f64> = (0..d).map(|i| (0..d).map(|j| comp[(i, j)] * c[j]).sum()).collect();
            c = next;
        }
        acc.iter().map(|x| x / total).collect()
    };
    let to_sym = |c: &[f64]| -> Vec<f64> {
        let len = kb[0].len();
        (0..len).map(|r| (0..d).map(|i| c[i] * kb[i][r]).sum()).collect()
    };
    let mut terms = 64.min(n_max.max(1));
    let mut prev = to_sym(&coords_mean(terms));
    loop {
        let next_terms = terms * 2;
        if next_terms > n_max {
            return Err(Error::NoConvergence(n_max));
        }
        let cur = to_sym(&coords_mean(next_terms));
        let diff = prev.iter().zip(&cur).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        terms = next_terms;
        prev = cur;
        if diff < tol {
            break;
        }
    }
    let aff = af.to_f64();
    let v = nalgebra::DVector::from_column_slice(&prev);
    let residual = (&aff * &v - &v).amax();
    let form = float_sym_matrix(n, &prev);
    Ok(AverageResult {
        signature: float_signature(&form, 10.0 * tol),
        qbar: (0..n).map(|i| (0..n).map(|j| form[(i, j)]).collect()).collect(),
        exact_form: None,
        residual,
        terms_used: terms,
        exact: false,
    })
}

fn float_sym_matrix(n: usize, coords: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = coords[k];
            m[(j, i)] = coords[k];
            k += 1;
        }
    }
    m
}

/// Eigenvalue signs with a margin: eigenvalues within `margin · max(1, ‖m‖)`
/// of zero count as undecided zeros.
pub fn float_signature(m: &DMatrix<f64>, margin: f64) -> Signature {
    let scale = m.norm().max(1.0);
    let eig = m.clone().symmetric_eigen();
    let mut s = Signature { n_plus: 0, n_minus: 0, n_zero: 0 };
    for &e in eig.eigenvalues.iter() {
        if e.abs() <= margin * scale {
            s.n_zero += 1;
        } else if e > 0.0 {
            s.n_plus += 1;
        } else {
            s.n_minus += 1;
        }
    }
    s
}

/// `(image on A, image on B, last letter, length)` of a word on the DFS stack.
type WordFrame = (DMatrix<f64>, Option<DMatrix<f64>>, usize, usize);

#[derive(Clone, Debug, Serialize)]
pub struct GrowthWitness {
    /// Number of reduced words sampled (letters: generators and inverses).
    pub words: usize,
    pub max_word_length: usize,
    /// Largest Frobenius norm of a sampled word restricted to `A` resp. `B`.
    pub max_norm_a: f64,
    pub max_norm_b: f64,
    /// Size of the restricted group on `B` when it closes up within the budget.
    pub b_group_order: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct SplitResult {
    pub a_space: Subspace,
    pub b_space: Subspace,
    pub witnesses: GrowthWitness,
}

/// The unbounded core of an element: generalized eigenspaces off the unit
/// circle for hyperbolic elements, the minimal nondegenerate flag space of
/// the unipotent part for parabolic ones.
fn core(g: &QMatrix) -> Result<(Subspace, Option<QVector>)> {
    let n = g.rows();
    match classify_matrix(g) {
        IsoType::Elliptic => Ok((Subspace::zero(n), None)),
        IsoType::Hyperbolic => {
            let p = char_poly(g);
            let off = p.exact_div(&unit_circle_part(&p)).unwrap();
            Ok((kernel_space(&off.eval_matrix(g)), None))
        }
        IsoType::Parabolic => {
            let jc = jordan_chevalley(g)?;
            let nil = jc.u.sub(&QMatrix::identity(n));
            let nil2 = nil.mul(&nil);
            let w = (0..n)
                .map(|i| crate::matrix::unit_vector(n, i))
                .find(|e| !crate::matrix::vis_zero(&nil2.mul_vec(e)));
            Ok((image_space(&nil), w))
        }
    }
}

/// Smallest subspace containing `s` and invariant under every matrix in `gens`.
fn invariant_closure(s: Subspace, gens: &[QMatrix]) -> Subspace {
    let mut cur = s;
    loop {
        let mut next = cur.clone();
        for g in gens {
            next = next.sum(&cur.image(g));
        }
        if next.dim() == cur.dim() {
            return cur;
        }
        cur = next;
    }
}

fn words_up_to(gens: &[QMatrix], len: usize) -> Vec<QMatrix> {
    let mut out: Vec<QMatrix> = gens.to_vec();
    let mut frontier: Vec<QMatrix> = gens.to_vec();
    for _ in 1..len {
        let mut next = Vec::new();
        for w in &frontier {
            for g in gens {
                next.push(w.mul(g));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn nonelementary_split(gens: &[QMatrix], q0: &QForm, config: &Config) -> Result<SplitResult> {
    let n = q0.dim();
    if gens.is_empty() {
        return Err(Error::Elementary);
    }
    for g in gens {
        check_dim(n, g.rows())?;
        check_dim(n, g.cols())?;
        if !is_nonescaping(g, Rep::Sym, &RepPoint::Form(q0.gram().clone()))? {
            return Err(Error::NotRecurrent);
        }
    }
    if gens.iter().all(|g| classify_matrix(g) == IsoType::Elliptic) {
        return Err(Error::Elementary);
    }
    let mut closure_gens: Vec<QMatrix> = gens.to_vec();
    for g in gens {
        closure_gens.push(g.inverse().ok_or(Error::NotInvertible)?);
    }

    // Cores of short words; longer words only add growth statistics.
    let mut cores = Subspace::zero(n);
    let mut extra: Vec<QVector> = Vec::new();
    for w in words_up_to(gens, config.word_budget.clamp(1, 2)) {
        let (c, third) = core(&w)?;
        cores = cores.sum(&c);
        extra.extend(third);
    }
    let mut a_space = invariant_closure(cores, &closure_gens);
    if !q0.restrict(a_space.basis())?.is_nondegenerate() {
        // A degenerate flag space is completed by the third flag vectors.
        a_space = invariant_closure(a_space.sum(&Subspace::span(n, &extra)), &closure_gens);
    }
    let qa = q0.restrict(a_space.basis())?;
    if a_space.dim() < 2 || !qa.is_lorentz() {
        return Err(Error::Inconclusive("invariant core is not timelike".into()));
    }
    let b_space = q0.orthogonal_complement(a_space.basis())?;
    if b_space.dim() > 0 {
        if !q0.restrict(b_space.basis())?.is_positive_definite() {
            return Err(Error::Inconclusive("complement of the core is not spacelike".into()));
        }
        if !closure_gens.iter().all(|g| b_space.is_invariant(g)) {
            return Err(Error::Inconclusive("complement of the core is not invariant".into()));
        }
    }
    let witnesses = growth(gens, &a_space, &b_space, config)?;
    Ok(SplitResult { a_space, b_space, witnesses })
}

/// Matrix of `g` on an invariant subspace, in the subspace's canonical basis.
pub fn restrict_to(g: &QMatrix, s: &Subspace) -> QMatrix {
    let p = s.basis_matrix();
    let pt = p.transpose();
    let gram_inv = pt.mul(&p).inverse().expect("basis is independent");
    gram_inv.mul(&pt).mul(g).mul(&p)
}

fn growth(gens: &[QMatrix], a: &Subspace, b: &Subspace, config: &Config) -> Result<GrowthWitness> {
    let mut letters_a = Vec::new();
    let mut letters_b = Vec::new();
    for g in gens {
        let gi = g.inverse().ok_or(Error::NotInvertible)?;
        for m in [g, &gi] {
            letters_a.push(restrict_to(m, a).to_f64());
            letters_b.push((b.dim() > 0).then(|| restrict_to(m, b).to_f64()));
        }
    }
    let len = config.word_budget.max(1);
    let mut words = 0usize;
    let mut max_a = 0.0f64;
    let mut max_b = 0.0f64;
    // Depth-first over reduced words: letter 2i and 2i+1 are mutually inverse.
    let mut stack: Vec<WordFrame> = Vec::new();
    for (i, la) in letters_a.iter().enumerate() {
        stack.push((la.clone(), letters_b[i].clone(), i, 1));
    }
    while let Some((ma, mb, last, depth)) = stack.pop() {
        words += 1;
        max_a = max_a.max(ma.norm());
        if let Some(m) = &mb {
            max_b = max_b.max(m.norm());
        }
        if depth == len {
            continue;
        }
        for (i, la) in letters_a.iter().enumerate() {
            if i ^ 1 == last {
                continue;
            }
            let nb = match (&mb, &letters_b[i]) {
                (Some(x), Some(y)) => Some(x * y),
                _ => None,
            };
            stack.push((&ma * la, nb, i, depth + 1));
        }
    }
    let b_group_order = if b.dim() == 0 {
        Some(1)
    } else {
        let restricted: Vec<QMatrix> = gens.iter().map(|g| restrict_to(g, b)).collect();
        finite_closure(&restricted, len).map(|s| s.len())
    };
    Ok(GrowthWitness {
        words,
        max_word_length: len,
        max_norm_a: max_a,
        max_norm_b: max_b,
        b_group_order,
    })
}

/// The group generated by `gens`, if breadth-first closure finishes within `depth` rounds.
fn finite_closure(gens: &[QMatrix], depth: usize) -> Option<Vec<QMatrix>> {
    let k = gens[0].rows();
    let id = QMatrix::identity(k);
    let mut seen: HashSet<QMatrix> = HashSet::from([id.clone()]);
    let mut all = vec![id.clone()];
    let mut frontier = vec![id];
    for _ in 0..=depth {
        let mut next = Vec::new();
        for w in &frontier {
            for g in gens {
                let x = w.mul(g);
                if seen.insert(x.clone()) {
                    all.push(x.clone());
                    next.push(x);
                }
            }
        }
        if next.is_empty() {
            return Some(all);
        }
        frontier = next;
    }
    None
}

/// Invariant form `q0|A + δ`, where `δ` is the mean of the orbit of `q0|B`
/// under the group generated by `gens`.
pub fn group_invariant_form(gens: &[QMatrix], q0: &QForm, config: &Config) -> Result<QForm> {
    let split = nonelementary_split(gens, q0, config)?;
    let n = q0.dim();
    let a = &split.a_space;
    let b = &split.b_space;
    let qa = q0.restrict(a.basis())?;
    let delta = if b.dim() == 0 {
        None
    } else {
        let qb = q0.restrict(b.basis())?;
        let restricted: Vec<QMatrix> = gens.iter().map(|g| restrict_to(g, b)).collect();
        let actions = restricted.iter().map(sym_action).collect::<Result<Vec<_>>>()?;
        let orbit = form_orbit(&actions, &sym_coords(qb.gram()), config.word_budget.max(1))
            .ok_or_else(|| Error::MeasureNotSupported("orbit of the bounded part does not close up".into()))?;
        let d = QForm::new(sym_matrix(b.dim(), &mean(&orbit)))?;
        if !d.is_positive_definite() {
            return Err(Error::MeasureNotSupported("orbit mean is not positive definite".into()));
        }
        Some(d)
    };
    // Reassemble in the adapted basis P = [A | B] and return to standard coordinates.
    let mut cols = a.basis().to_vec();
    cols.extend(b.basis().iter().cloned());
    let p = QMatrix::from_columns(n, &cols);
    let block = match &delta {
        Some(d) => QMatrix::block_diag(&[qa.gram(), d.gram()]),
        None => qa.gram().clone(),
    };
    let pinv = p.inverse().ok_or(Error::DegenerateForm)?;
    let qbar = QForm::new(pinv.transpose().mul(&block).mul(&pinv))?;
    for g in gens {
        if g.transpose().mul(qbar.gram()).mul(g) != *qbar.gram() {
            return Err(Error::MeasureNotSupported("assembled form is not invariant".into()));
        }
    }
    Ok(qbar)
}

/// Distinct points of the orbit of `x0`, if it closes within `depth` rounds.
fn form_orbit(actions: &[QMatrix], x0: &[Q], depth: usize) -> Option<Vec<QVector>> {
    let mut seen: HashSet<QVector> = HashSet::from([x0.to_vec()]);
    let mut all = vec![x0.to_vec()];
    let mut frontier = vec![x0.to_vec()];
    for _ in 0..=depth {
        let mut next = Vec::new();
        for x in &frontier {
            for m in actions {
                let y = m.mul_vec(x);
                if seen.insert(y.clone()) {
                    all.push(y.clone());
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            return Some(all);
        }
        frontier = next;
    }
    None
}

/// Whether `aᵀ form a = form`.
pub fn is_invariant(a: &QMatrix, form: &QMatrix) -> bool {
    a.transpose().mul(form).mul(a) == *form
}
