//! Exact spectral tags for characteristic polynomials of integral isometries.

use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::forms::QForm;
use crate::isometries::{brute_search, LatticeIsometry};
use crate::poly::{self, circle_counts, cyclotomic_index, isolate_real_roots, refine_root, Poly, RootInterval};
use crate::rational::{self, serde_q, Q};
use crate::spectral::{char_poly, classify, IsoType};
use num_traits::{One, Signed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FactorTag {
    Cyclotomic(u64),
    Salem,
    ReciprocalQuadraticUnit,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TaggedFactor {
    #[serde(serialize_with = "ser_poly")]
    pub factor: Poly,
    pub multiplicity: u32,
    pub tag: FactorTag,
    /// Root counts: on the circle, real off it, complex off it.
    pub on_circle: usize,
    pub real_off_circle: usize,
    pub complex_off_circle: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Interval {
    #[serde(with = "serde_q")]
    pub lo: Q,
    #[serde(with = "serde_q")]
    pub hi: Q,
}

impl From<RootInterval> for Interval {
    fn from(r: RootInterval) -> Self {
        Interval { lo: r.lo, hi: r.hi }
    }
}

impl Interval {
    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        rational::to_f64(&self.lo) <= x && x <= rational::to_f64(&self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolyClassification {
    pub factors: Vec<TaggedFactor>,
    /// Largest real root, when some factor is not cyclotomic and has real roots.
    pub leading: Option<Interval>,
}

impl PolyClassification {
    pub fn expand(&self) -> Poly {
        self.factors
            .iter()
            .fold(Poly::one(), |acc, f| acc.mul(&f.factor.pow(f.multiplicity)))
    }

    pub fn has_noncyclotomic(&self) -> bool {
        self.factors
            .iter()
            .any(|f| !matches!(f.tag, FactorTag::Cyclotomic(_)))
    }
}

fn ser_poly<S: serde::Serializer>(p: &Poly, s: S) -> std::result::Result<S::Ok, S::Error> {
    let c: Vec<String> = p.coeffs().iter().map(rational::fmt_q).collect();
    serde::Serialize::serialize(&c, s)
}

/// Width to which the leading root is refined.
pub const LEADING_WIDTH_LOG2: u32 = 40;

pub fn classify_charpoly(p: &Poly) -> Result<PolyClassification> {
    if p.degree() == 0 || !p.is_integral() || !p.is_monic() || p.coeff(0).abs() != Q::one() {
        return Err(Error::NotUnitPolynomial);
    }
    let f = poly::factor(p);
    let mut factors = Vec::new();
    let mut leading: Option<RootInterval> = None;
    let width = Q::new(1.into(), num_bigint::BigInt::one() << LEADING_WIDTH_LOG2);
    for (g, mult) in &f.factors {
        let g = g.monic();
        let counts = circle_counts(&g).ok_or(Error::NotUnitPolynomial)?;
        let tag = tag_factor(&g, &counts);
        if !matches!(tag, FactorTag::Cyclotomic(_)) {
            if let Some(top) = isolate_real_roots(&g).into_iter().last() {
                let top = refine_root(&g, &top, &width);
                if leading.as_ref().is_none_or(|l| top.lo > l.hi) {
                    leading = Some(top);
                }
            }
        }
        factors.push(TaggedFactor {
            factor: g,
            multiplicity: *mult,
            tag,
            on_circle: counts.on_circle,
            real_off_circle: counts.real_off_circle,
            complex_off_circle: counts.complex_off_circle,
        });
    }
    Ok(PolyClassification {
        factors,
        leading: leading.map(Interval::from),
    })
}

fn tag_factor(g: &Poly, counts: &poly::CircleCounts) -> FactorTag {
    if let Some(k) = cyclotomic_index(g) {
        return FactorTag::Cyclotomic(k);
    }
    let reciprocal = g.reciprocity() == Some(1);
    if reciprocal && g.degree() == 2 && counts.real_off_circle == 2 {
        return FactorTag::ReciprocalQuadraticUnit;
    }
    if reciprocal
        && g.degree() >= 4
        && counts.real_off_circle == 2
        && counts.complex_off_circle == 0
        && counts.on_circle == g.degree() - 2
        && has_root_above_one(g)
    {
        return FactorTag::Salem;
    }
    FactorTag::Other
}

/// A Salem factor's real roots are `λ > 1 > 1/λ > 0`; the negative analogue is not Salem.
fn has_root_above_one(g: &Poly) -> bool {
    poly::count_real_roots(g, &poly::Ext::Finite(Q::one()), &poly::Ext::PosInf) == 1
}

/// Hyperbolic elements among `brute_search(q, M)`, in search order, each with its classification.
pub fn salem_scan(q: &QForm, bound: u32, config: &Config) -> Result<Vec<(LatticeIsometry, PolyClassification)>> {
    let mut out = Vec::new();
    for a in brute_search(q, bound, config)? {
        if classify(&a)? == IsoType::Hyperbolic {
            let c = classify_charpoly(&char_poly(a.matrix()))?;
            out.push((a, c));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::QMatrix;

    #[test]
    fn linear_factor() {
        let c = classify_charpoly(&Poly::from_i64(&[-1, 1])).unwrap();
        assert_eq!(c.factors[0].tag, FactorTag::Cyclotomic(1));
        assert_eq!(c.leading, None);
    }

    #[test]
    fn cat_quadratic() {
        let c = classify_charpoly(&Poly::from_i64(&[1, -3, 1])).unwrap();
        assert_eq!(c.factors.len(), 1);
        assert_eq!(c.factors[0].tag, FactorTag::ReciprocalQuadraticUnit);
        let l = c.leading.unwrap();
        let phi2 = (3.0 + 5f64.sqrt()) / 2.0;
        assert!(l.contains_f64(phi2));
        assert!(rational::to_f64(&l.width()) < 1e-9);
        assert!(rational::to_f64(&l.lo) > 2.61 && rational::to_f64(&l.hi) < 2.62);
    }

    #[test]
    fn lehmer_like_quartic() {
        let c = classify_charpoly(&Poly::from_i64(&[1, -1, -1, -1, 1])).unwrap();
        let f = &c.factors[0];
        assert_eq!(f.tag, FactorTag::Salem);
        assert_eq!((f.on_circle, f.real_off_circle), (2, 2));
        let l = c.leading.unwrap();
        assert!(rational::to_f64(&l.lo) > 1.72 && rational::to_f64(&l.hi) < 1.73);
    }

    #[test]
    fn phi12() {
        let c = classify_charpoly(&Poly::from_i64(&[1, 0, -1, 0, 1])).unwrap();
        assert_eq!(c.factors[0].tag, FactorTag::Cyclotomic(12));
    }

    #[test]
    fn product_is_exact() {
        let p = Poly::from_i64(&[1, -3, 1]).mul(&Poly::from_i64(&[1, 1])).mul(&Poly::from_i64(&[1, 1]));
        let c = classify_charpoly(&p).unwrap();
        assert_eq!(c.expand(), p);
    }

    #[test]
    fn rejects_non_units() {
        assert_eq!(classify_charpoly(&Poly::from_i64(&[2, 0, 1])).unwrap_err(), Error::NotUnitPolynomial);
        assert_eq!(classify_charpoly(&Poly::from_i64(&[1, 2])).unwrap_err(), Error::NotUnitPolynomial);
    }

    #[test]
    fn negative_quadratic_unit() {
        // Roots −0.38 and −2.6; the quadratic tag does not look at signs.
        let c = classify_charpoly(&Poly::from_i64(&[1, 3, 1])).unwrap();
        assert_eq!(c.factors[0].tag, FactorTag::ReciprocalQuadraticUnit);
    }

    #[test]
    fn scans() {
        let cfg = Config::default();
        assert!(salem_scan(&QForm::diag(&[-1, 1]), 2, &cfg).unwrap().is_empty());
        let cat = QMatrix::from_i64(&[[2, 1], [1, 1]]);
        let found = salem_scan(&QForm::from_i64(&[[-2, 1], [1, 2]]), 2, &cfg).unwrap();
        assert!(found
            .iter()
            .any(|(a, c)| *a.matrix() == cat && c.factors[0].tag == FactorTag::ReciprocalQuadraticUnit));
    }

    #[test]
    fn salem_fixture() {
        let q = QForm::from_i64(&[[2, 0, 1, 3], [0, 2, 0, 1], [1, 0, 2, 0], [3, 1, 0, 2]]);
        assert!(q.is_lorentz());
        let cm = QMatrix::from_i64(&[[0, 0, 0, -1], [1, 0, 0, 1], [0, 1, 0, 1], [0, 0, 1, 1]]);
        let a = LatticeIsometry::new(cm.clone(), q.clone()).unwrap();
        let c = classify_charpoly(&char_poly(a.matrix())).unwrap();
        assert_eq!(c.factors[0].tag, FactorTag::Salem);
        let found = salem_scan(&q, 1, &Config::default()).unwrap();
        assert!(found.iter().any(|(b, c)| *b.matrix() == cm && c.factors[0].tag == FactorTag::Salem));
    }
}
