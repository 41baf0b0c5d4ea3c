//! Univariate polynomials over the rationals: arithmetic, Sturm sequences,
//! cyclotomic detection, the unit-circle test and factorization over the integers.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use nalgebra::Complex;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::matrix::QMatrix;
use crate::rational::{self, q, Q};

/// Coefficients in ascending order, with no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<Q>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let a = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let show_coeff = !a.is_one() || i == 0;
            if show_coeff {
                write!(f, "{}", rational::fmt_q(&a))?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| q(c)).collect())
    }

    pub fn from_bigint(coeffs: &[BigInt]) -> Self {
        Self::new(coeffs.iter().map(|c| Q::from_integer(c.clone())).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::new(vec![c])
    }

    pub fn x() -> Self {
        Self::monomial(1)
    }

    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Q::zero(); k + 1];
        c[k] = Q::one();
        Poly { coeffs: c }
    }

    /// `x - r`
    pub fn linear(r: &Q) -> Self {
        Self::new(vec![-r.clone(), Q::one()])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.lead().is_one()
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        self.is_integral()
            .then(|| self.coeffs.iter().map(|c| c.to_integer()).collect())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Q::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    c[i + j] += a * b;
                }
            }
        }
        Poly::new(c)
    }

    pub fn scale(&self, s: &Q) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Q::one())
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Quotient and remainder; panics on a zero divisor.
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        let lead_inv = d.lead().recip();
        if r.len() < d.coeffs.len() {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![Q::zero(); r.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &r[i + dd] * &lead_inv;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[i + j] -= &c * dc;
                }
            }
            quot[i] = c;
        }
        r.truncate(dd);
        (Poly::new(quot), Poly::new(r))
    }

    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        let (quot, r) = self.divrem(d);
        r.is_zero().then_some(quot)
    }

    pub fn divides(&self, other: &Poly) -> bool {
        other.divrem(self).1.is_zero()
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.lead().recip())
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r.primitive_or_monic();
        }
        a.monic()
    }

    // Keeps rational coefficients small during Euclid.
    fn primitive_or_monic(&self) -> Poly {
        if self.is_zero() {
            self.clone()
        } else {
            self.primitive_part()
        }
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * q(i as i64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + rational::to_f64(c))
    }

    pub fn eval_complex(&self, z: Complex<f64>) -> Complex<f64> {
        self.coeffs.iter().rev().fold(Complex::new(0.0, 0.0), |acc, c| {
            acc * z + Complex::new(rational::to_f64(c), 0.0)
        })
    }

    /// Horner evaluation at a square matrix.
    pub fn eval_matrix(&self, a: &QMatrix) -> QMatrix {
        let n = a.rows();
        let mut acc = QMatrix::zeros(n, n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(a).add(&QMatrix::scalar(n, c));
        }
        acc
    }

    /// Integer primitive part with positive leading coefficient.
    pub fn primitive_part(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let l = rational::lcm_denominators(&self.coeffs);
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * Q::from_integer(l.clone())).to_integer())
            .collect();
        let mut g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if ints.last().unwrap().is_negative() {
            g = -g;
        }
        Poly::from_bigint(&ints.iter().map(|x| x / &g).collect::<Vec<_>>())
    }

    /// `x^deg p(1/x)`
    pub fn reversed(&self) -> Poly {
        let mut c = self.coeffs.clone();
        c.reverse();
        Poly::new(c)
    }

    /// Palindromic (`+1`) or antipalindromic (`-1`) coefficient sequence, if either.
    pub fn reciprocity(&self) -> Option<i8> {
        if self.is_zero() || self.coeffs[0].is_zero() {
            return None;
        }
        let r = self.reversed();
        if r == *self {
            Some(1)
        } else if r == self.neg() {
            Some(-1)
        } else {
            None
        }
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == 0
    }

    /// Product of the distinct irreducible factors, made monic.
    pub fn squarefree_part(&self) -> Poly {
        if self.degree() == 0 {
            return Poly::one();
        }
        self.exact_div(&self.gcd(&self.derivative())).unwrap().monic()
    }

    /// Yun's algorithm: `self = lead * prod_i a_i^i` with monic squarefree, coprime `a_i`.
    /// Returns `(a_i, i)` for the nontrivial `a_i`.
    pub fn squarefree_decomposition(&self) -> Vec<(Poly, u32)> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        let f = self.monic();
        let d = f.derivative();
        let mut a = f.gcd(&d);
        let mut b = f.exact_div(&a).unwrap();
        let mut c = d.exact_div(&a).unwrap();
        let mut i = 1;
        loop {
            let dd = c.sub(&b.derivative());
            if b.degree() == 0 {
                break;
            }
            a = b.gcd(&dd);
            if a.degree() > 0 {
                out.push((a.clone(), i));
            }
            b = b.exact_div(&a).unwrap();
            c = dd.exact_div(&a).unwrap();
            i += 1;
        }
        out
    }

    /// Complex roots in double precision by Aberth–Ehrlich iteration.
    pub fn complex_roots(&self) -> Vec<Complex<f64>> {
        let d = self.degree();
        if d == 0 {
            return Vec::new();
        }
        let monic = self.monic();
        let c: Vec<f64> = monic.coeffs.iter().map(rational::to_f64).collect();
        let eval = |z: Complex<f64>| {
            let mut p = Complex::new(0.0, 0.0);
            let mut dp = Complex::new(0.0, 0.0);
            for &ck in c.iter().rev() {
                dp = dp * z + p;
                p = p * z + ck;
            }
            (p, dp)
        };
        let radius = 1.0 + c[..d].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut z: Vec<Complex<f64>> = (0..d)
            .map(|k| Complex::from_polar(0.5 * radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / d as f64 + 0.4))
            .collect();
        for _ in 0..2000 {
            let mut moved = 0.0f64;
            for i in 0..d {
                let (p, dp) = eval(z[i]);
                if p.norm() == 0.0 {
                    continue;
                }
                let ratio = p / dp;
                let repulsion: Complex<f64> = (0..d)
                    .filter(|&j| j != i)
                    .map(|j| Complex::new(1.0, 0.0) / (z[i] - z[j]))
                    .sum();
                let step = ratio / (Complex::new(1.0, 0.0) - ratio * repulsion);
                if step.re.is_finite() && step.im.is_finite() {
                    z[i] -= step;
                    moved = moved.max(step.norm() / z[i].norm().max(1.0));
                }
            }
            if moved < 1e-15 {
                break;
            }
        }
        z
    }
}

pub fn euler_phi(mut k: u64) -> u64 {
    let mut result = k;
    let mut p = 2;
    while p * p <= k {
        if k.is_multiple_of(p) {
            while k.is_multiple_of(p) {
                k /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if k > 1 {
        result -= result / k;
    }
    result
}

fn mobius(mut k: u64) -> i8 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= k {
        if k.is_multiple_of(p) {
            k /= p;
            if k.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if k > 1 {
        sign = -sign;
    }
    sign
}

/// The `k`-th cyclotomic polynomial, via the Möbius product over divisors.
pub fn cyclotomic(k: u64) -> Poly {
    static CACHE: OnceLock<Mutex<HashMap<u64, Poly>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&k) {
        return p.clone();
    }
    let mut num = Poly::one();
    let mut den = Poly::one();
    for d in 1..=k {
        if !k.is_multiple_of(d) {
            continue;
        }
        let xd = Poly::monomial(d as usize).sub(&Poly::one());
        match mobius(k / d) {
            1 => num = num.mul(&xd),
            -1 => den = den.mul(&xd),
            _ => {}
        }
    }
    let p = num.exact_div(&den).expect("cyclotomic quotient is exact");
    cache.lock().unwrap().insert(k, p.clone());
    p
}

/// Indices `k` with `phi(k) <= d`, ascending; complete since `phi(k) >= sqrt(k/2)`.
pub fn cyclotomic_indices_up_to_degree(d: usize) -> impl Iterator<Item = u64> {
    let d = d as u64;
    (1..=2 * d * d + 2).filter(move |&k| euler_phi(k) <= d)
}

/// `Some(k)` when `p` is (a nonzero rational multiple of) the cyclotomic polynomial `Φ_k`.
pub fn cyclotomic_index(p: &Poly) -> Option<u64> {
    let d = p.degree();
    if d == 0 {
        return None;
    }
    let m = p.monic();
    cyclotomic_indices_up_to_degree(d)
        .filter(|&k| euler_phi(k) == d as u64)
        .find(|&k| cyclotomic(k) == m)
}

/// Divides out every cyclotomic factor. Returns `(k, multiplicity)` pairs in
/// increasing `k` and the cofactor.
pub fn strip_cyclotomic(p: &Poly) -> (Vec<(u64, u32)>, Poly) {
    let mut rest = p.clone();
    let mut found = Vec::new();
    for k in cyclotomic_indices_up_to_degree(p.degree()) {
        if euler_phi(k) as usize > rest.degree() {
            continue;
        }
        let phi = cyclotomic(k);
        let mut mult = 0;
        while let Some(quot) = rest.exact_div(&phi) {
            rest = quot;
            mult += 1;
        }
        if mult > 0 {
            found.push((k, mult));
        }
    }
    (found, rest)
}

/// Sturm sequence of `p` (assumed squarefree for root counting).
pub fn sturm_sequence(p: &Poly) -> Vec<Poly> {
    let mut seq = vec![p.clone(), p.derivative()];
    loop {
        let n = seq.len();
        if seq[n - 1].is_zero() {
            seq.pop();
            break;
        }
        let r = seq[n - 2].divrem(&seq[n - 1]).1;
        if r.is_zero() {
            break;
        }
        // Positive rescaling keeps the sign pattern intact.
        let r = r.neg();
        let scale = rational::lcm_denominators(r.coeffs());
        seq.push(r.scale(&Q::from_integer(scale)));
    }
    seq
}

fn sign_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0;
    let mut changes = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

fn sign_of(x: &Q) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Value of `x` in the extended reals used for Sturm counts.
#[derive(Clone, Debug)]
pub enum Ext {
    NegInf,
    Finite(Q),
    PosInf,
}

fn variations(seq: &[Poly], at: &Ext) -> usize {
    sign_changes(seq.iter().map(|p| match at {
        Ext::Finite(x) => sign_of(&p.eval(x)),
        Ext::PosInf => sign_of(&p.lead()),
        Ext::NegInf => {
            let s = sign_of(&p.lead());
            if p.degree() % 2 == 0 {
                s
            } else {
                -s
            }
        }
    }))
}

/// Number of distinct real roots of `p` in the half-open interval `(a, b]`.
pub fn count_real_roots(p: &Poly, a: &Ext, b: &Ext) -> usize {
    if p.degree() == 0 {
        return 0;
    }
    let sf = p.squarefree_part();
    let seq = sturm_sequence(&sf);
    variations(&seq, a).saturating_sub(variations(&seq, b))
}

/// Isolating interval of a real root: `lo < root <= hi`, or `lo == hi == root`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: Q,
    pub hi: Q,
}

impl RootInterval {
    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn midpoint_f64(&self) -> f64 {
        (rational::to_f64(&self.lo) + rational::to_f64(&self.hi)) / 2.0
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        rational::to_f64(&self.lo) <= x && x <= rational::to_f64(&self.hi)
    }
}

/// Cauchy bound: every root has absolute value below the returned power of two.
fn root_bound(p: &Poly) -> Q {
    let lead = p.lead().abs();
    let m = p.coeffs[..p.degree()]
        .iter()
        .map(|c| c.abs() / &lead)
        .max()
        .unwrap_or_else(Q::zero);
    let bound = m + Q::one();
    let mut b = Q::one();
    while b <= bound {
        b *= q(2);
    }
    b
}

/// Disjoint isolating intervals for every distinct real root, in increasing order.
pub fn isolate_real_roots(p: &Poly) -> Vec<RootInterval> {
    if p.degree() == 0 {
        return Vec::new();
    }
    let sf = p.squarefree_part();
    let seq = sturm_sequence(&sf);
    let b = root_bound(&sf);
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b)];
    while let Some((lo, hi)) = stack.pop() {
        let n = variations(&seq, &Ext::Finite(lo.clone()))
            .saturating_sub(variations(&seq, &Ext::Finite(hi.clone())));
        match n {
            0 => {}
            1 => {
                if sf.eval(&hi).is_zero() {
                    out.push(RootInterval { lo: hi.clone(), hi });
                } else {
                    out.push(RootInterval { lo, hi });
                }
            }
            _ => {
                let mid = (&lo + &hi) / q(2);
                stack.push((mid.clone(), hi));
                stack.push((lo, mid));
            }
        }
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    out
}

/// Bisects an isolating interval of `p` until its width is at most `width`.
pub fn refine_root(p: &Poly, iv: &RootInterval, width: &Q) -> RootInterval {
    let sf = p.squarefree_part();
    let seq = sturm_sequence(&sf);
    let mut iv = iv.clone();
    while iv.lo != iv.hi && iv.width() > *width {
        let mid = (&iv.lo + &iv.hi) / q(2);
        if sf.eval(&mid).is_zero() {
            return RootInterval { lo: mid.clone(), hi: mid };
        }
        let left = variations(&seq, &Ext::Finite(iv.lo.clone()))
            .saturating_sub(variations(&seq, &Ext::Finite(mid.clone())));
        if left == 1 {
            iv.hi = mid;
        } else {
            iv.lo = mid;
        }
    }
    iv
}

/// The polynomial `T` with `p(x) = x^m T(x + 1/x)` for palindromic `p` of even degree `2m`.
pub fn trace_polynomial(p: &Poly) -> Option<Poly> {
    let d = p.degree();
    if d % 2 == 1 || p.reciprocity() != Some(1) {
        return None;
    }
    let m = d / 2;
    // Dickson polynomials D_k(y) = y D_{k-1} - D_{k-2}, D_0 = 2, D_1 = y.
    let mut dk = vec![Poly::constant(q(2)), Poly::x()];
    for k in 2..=m {
        let next = Poly::x().mul(&dk[k - 1]).sub(&dk[k - 2]);
        dk.push(next);
    }
    let mut t = Poly::constant(p.coeff(m));
    for (k, d) in dk.iter().enumerate().skip(1) {
        t = t.add(&d.scale(&p.coeff(m + k)));
    }
    Some(t)
}

/// Location of the roots of a polynomial relative to the unit circle, counted
/// with multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircleCounts {
    pub on_circle: usize,
    pub real_off_circle: usize,
    pub complex_off_circle: usize,
}

/// Exact root census relative to the unit circle for a palindromic or
/// antipalindromic polynomial; `None` otherwise.
pub fn circle_counts(p: &Poly) -> Option<CircleCounts> {
    p.reciprocity()?;
    let mut rest = p.clone();
    let mut on = 0;
    for r in [q(1), q(-1)] {
        let lin = Poly::linear(&r);
        while let Some(quot) = rest.exact_div(&lin) {
            rest = quot;
            on += 1;
        }
    }
    if rest.degree() == 0 {
        return Some(CircleCounts { on_circle: on, real_off_circle: 0, complex_off_circle: 0 });
    }
    let t = trace_polynomial(&rest)?;
    let mut real_off = 0;
    let mut complex_off = 0;
    for (factor, mult) in squarefree_factors_with_mult(&t) {
        let inside = count_real_roots(&factor, &Ext::Finite(q(-2)), &Ext::Finite(q(2)))
            - usize::from(factor.eval(&q(2)).is_zero());
        let real = count_real_roots(&factor, &Ext::NegInf, &Ext::PosInf);
        let mult = mult as usize;
        // Each root y of T accounts for two roots x of p.
        on += 2 * inside * mult;
        real_off += 2 * (real - inside) * mult;
        complex_off += 2 * (factor.degree() - real) * mult;
    }
    Some(CircleCounts { on_circle: on, real_off_circle: real_off, complex_off_circle: complex_off })
}

fn squarefree_factors_with_mult(p: &Poly) -> Vec<(Poly, u32)> {
    p.squarefree_decomposition()
}

/// True iff every root of the nonzero polynomial `p` has modulus one.
pub fn all_roots_on_unit_circle(p: &Poly) -> bool {
    if p.degree() == 0 {
        return true;
    }
    match circle_counts(p) {
        Some(c) => c.on_circle == p.degree(),
        None => false,
    }
}

/// Factorization over the integers: `content * prod factor_i^mult_i`, factors
/// primitive with positive leading coefficient, sorted by degree then coefficients.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub content: Q,
    pub factors: Vec<(Poly, u32)>,
}

impl Factorization {
    pub fn expand(&self) -> Poly {
        let mut acc = Poly::constant(self.content.clone());
        for (f, m) in &self.factors {
            acc = acc.mul(&f.pow(*m));
        }
        acc
    }
}

/// Factors a nonzero rational polynomial into irreducibles over the integers.
///
/// Cyclotomic factors are divided out exactly; the remaining squarefree parts
/// are split by proposing integer factors from subsets of their numerical
/// roots and confirming each proposal by exact division.
pub fn factor(p: &Poly) -> Factorization {
    assert!(!p.is_zero(), "cannot factor the zero polynomial");
    let prim = p.primitive_part();
    let content = p.lead() / prim.lead();
    let mut factors: Vec<(Poly, u32)> = Vec::new();
    let mut push = |f: Poly, m: u32| {
        if let Some(entry) = factors.iter_mut().find(|(g, _)| *g == f) {
            entry.1 += m;
        } else {
            factors.push((f, m));
        }
    };
    for (sf, mult) in prim.squarefree_decomposition() {
        let sf = sf.primitive_part();
        let (cyc, rest) = strip_cyclotomic(&sf);
        for (k, m) in cyc {
            push(cyclotomic(k), m * mult);
        }
        for f in split_squarefree(&rest.primitive_part()) {
            push(f, mult);
        }
    }
    factors.sort_by(|(a, _), (b, _)| {
        a.degree()
            .cmp(&b.degree())
            .then_with(|| a.coeffs().cmp(b.coeffs()))
    });
    Factorization { content, factors }
}

fn split_squarefree(f: &Poly) -> Vec<Poly> {
    let mut out = Vec::new();
    let mut work = vec![f.clone()];
    while let Some(g) = work.pop() {
        if g.degree() == 0 {
            continue;
        }
        if g.degree() == 1 {
            out.push(g);
            continue;
        }
        match find_factor(&g) {
            Some(h) => {
                let rest = g.exact_div(&h).unwrap().primitive_part();
                work.push(h);
                work.push(rest);
            }
            None => out.push(g),
        }
    }
    out
}

/// Mignotte bound on the coefficients of any integer factor of `f`.
fn mignotte_bound(f: &Poly) -> f64 {
    let norm: f64 = f
        .coeffs()
        .iter()
        .map(|c| rational::to_f64(c).powi(2))
        .sum::<f64>()
        .sqrt();
    let d = f.degree() as i32;
    let binom_max = (0..=d).map(|k| binom(d as u64, k as u64)).fold(0.0, f64::max);
    binom_max * norm
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// A proper factor of the squarefree primitive integer polynomial `f`, if any.
fn find_factor(f: &Poly) -> Option<Poly> {
    let d = f.degree();
    let roots = f.complex_roots();
    if roots.len() != d {
        return None;
    }
    let lead = rational::to_f64(&f.lead());
    let bound = mignotte_bound(f);
    // Bitmask of roots paired with their conjugates; subsets must be conjugation closed.
    let conj: Vec<usize> = (0..d)
        .map(|i| {
            (0..d)
                .min_by(|&a, &b| {
                    let da = (roots[a] - roots[i].conj()).norm();
                    let db = (roots[b] - roots[i].conj()).norm();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap()
        })
        .collect();
    for size in 1..=d / 2 {
        for subset in Subsets::new(d, size) {
            if subset.iter().any(|&i| !subset.contains(&conj[i])) {
                continue;
            }
            if let Some(cand) = candidate(&roots, &subset, lead, bound) {
                if cand.degree() > 0 && cand.degree() < d && cand.divides(f) {
                    return Some(cand);
                }
            }
        }
    }
    None
}

fn candidate(roots: &[Complex<f64>], subset: &[usize], lead: f64, bound: f64) -> Option<Poly> {
    let mut c = vec![Complex::new(lead, 0.0)];
    for &i in subset {
        let r = roots[i];
        let mut next = vec![Complex::new(0.0, 0.0); c.len() + 1];
        for (k, ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= ck * r;
        }
        c = next;
    }
    let mut ints = Vec::with_capacity(c.len());
    for z in &c {
        let tol = 1e-6 * z.norm().max(1.0);
        let rounded = z.re.round();
        if z.im.abs() > tol || (z.re - rounded).abs() > tol.max(1e-3) || rounded.abs() > bound.max(1.0) * lead.abs() {
            return None;
        }
        ints.push(BigInt::from(rounded.to_i64()?));
    }
    Some(Poly::from_bigint(&ints).primitive_part())
}

/// Lexicographic `k`-subsets of `0..n`.
pub(crate) struct Subsets {
    n: usize,
    cur: Option<Vec<usize>>,
}

impl Subsets {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Subsets {
            n,
            cur: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.cur.take()?;
        let k = cur.len();
        let mut next = cur.clone();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.cur = Some(next);
                return Some(cur);
            }
        }
        Some(cur)
    }
}

/// Characteristic polynomial `det(xI - A)` and the adjugate coefficients
/// `M_1..M_n` of `adj(xI - A) = sum_k M_k x^(n-k)`, by Faddeev–LeVerrier.
pub fn faddeev_leverrier(a: &QMatrix) -> (Poly, Vec<QMatrix>) {
    let n = a.rows();
    let mut coeffs = vec![Q::zero(); n + 1];
    coeffs[n] = Q::one();
    let mut ms = Vec::with_capacity(n);
    let mut m = QMatrix::identity(n);
    for k in 1..=n {
        if k > 1 {
            m = a.mul(ms.last().unwrap()).add(&QMatrix::scalar(n, &coeffs[n - k + 1]));
        }
        let am = a.mul(&m);
        coeffs[n - k] = -am.trace() / q(k as i64);
        ms.push(m.clone());
    }
    (Poly::new(coeffs), ms)
}

pub fn char_poly(a: &QMatrix) -> Poly {
    faddeev_leverrier(a).0
}
