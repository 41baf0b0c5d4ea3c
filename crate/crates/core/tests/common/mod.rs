//! Fixtures, strategies and property checks shared by the property suite and the acceptance run.
#![allow(dead_code)]

use std::sync::OnceLock;

use lorentz_core::dynamics::gauss_equivariance;
use lorentz_core::isometries::brute_search;
use lorentz_core::poly::char_poly;
use lorentz_core::rational::frac;
use lorentz_core::spectral::{is_semisimple, jordan_chevalley};
use lorentz_core::{Config, LatticeIsometry, Poly, QForm, QMatrix, TorusIsometry, TorusPoint};
use num_traits::Zero;
use proptest::prelude::*;

pub fn cat_form() -> QForm {
    QForm::from_i64(&[[-2, 1], [1, 2]])
}

pub fn cat() -> QMatrix {
    QMatrix::from_i64(&[[2, 1], [1, 1]])
}

pub fn parabolic_form() -> QForm {
    QForm::from_i64(&[[0, 0, -2], [0, 2, -1], [-2, -1, 2]])
}

pub fn shift() -> QMatrix {
    QMatrix::from_i64(&[[1, 1, 0], [0, 1, 1], [0, 0, 1]])
}

pub fn rotation() -> QMatrix {
    QMatrix::from_i64(&[[0, -1], [1, 0]])
}

/// Pools of lattice isometries to build random words from.
pub fn pools() -> &'static [(QForm, Vec<LatticeIsometry>)] {
    static POOLS: OnceLock<Vec<(QForm, Vec<LatticeIsometry>)>> = OnceLock::new();
    POOLS.get_or_init(|| {
        let cfg = Config::default();
        [(cat_form(), 2), (parabolic_form(), 1), (QForm::diag(&[-1, 1, 1]), 1)]
            .into_iter()
            .map(|(q, m)| {
                let pool = brute_search(&q, m, &cfg).unwrap();
                (q, pool)
            })
            .collect()
    })
}

/// A random word in one pool, with a random translation part.
#[derive(Clone, Debug)]
pub struct WordSpec {
    pub pool: usize,
    pub letters: Vec<usize>,
    pub tau: Vec<(i64, i64)>,
}

impl WordSpec {
    pub fn lattice(&self) -> LatticeIsometry {
        let (q, pool) = &pools()[self.pool];
        self.letters
            .iter()
            .fold(LatticeIsometry::identity(q), |acc, &i| acc.compose(&pool[i % pool.len()]).unwrap())
    }

    pub fn torus(&self) -> TorusIsometry {
        let a = self.lattice();
        let n = a.dim();
        let tau = self.tau.iter().take(n).map(|&(p, d)| frac(p, d)).collect();
        TorusIsometry::new(a, tau).unwrap()
    }

    pub fn dim(&self) -> usize {
        pools()[self.pool].0.dim()
    }
}

pub fn word() -> impl Strategy<Value = WordSpec> {
    (
        0..3usize,
        prop::collection::vec(0..10_000usize, 1..=4),
        prop::collection::vec((-20i64..20, 1i64..12), 3),
    )
        .prop_map(|(pool, letters, tau)| WordSpec { pool, letters, tau })
}

pub fn point(n: usize) -> impl Strategy<Value = TorusPoint> {
    prop::collection::vec((-30i64..30, 1i64..15), n)
        .prop_map(|v| TorusPoint::new(v.into_iter().map(|(p, d)| frac(p, d)).collect()))
}

/// `(P, G)` with `G` a symmetric integer matrix and `P` integer and invertible.
pub fn sylvester_case() -> impl Strategy<Value = (QMatrix, QMatrix)> {
    (2..=4usize).prop_flat_map(|n| {
        (
            prop::collection::vec(-3i64..=3, n * n),
            prop::collection::vec(-4i64..=4, n * (n + 1) / 2),
        )
            .prop_map(move |(p, g)| (square(n, &p), symmetric(n, &g)))
            .prop_filter("P invertible", |(p, _)| !p.det().is_zero())
    })
}

pub fn square(n: usize, entries: &[i64]) -> QMatrix {
    let rows: Vec<Vec<i64>> = entries.chunks(n).map(|c| c.to_vec()).collect();
    QMatrix::from_i64(&rows)
}

#[allow(clippy::needless_range_loop)]
pub fn symmetric(n: usize, upper: &[i64]) -> QMatrix {
    let mut rows = vec![vec![0i64; n]; n];
    let mut entries = upper.iter();
    for i in 0..n {
        for j in i..n {
            let x = *entries.next().unwrap();
            rows[i][j] = x;
            rows[j][i] = x;
        }
    }
    QMatrix::from_i64(&rows)
}

/// `P J P⁻¹` with `J` a direct sum of Jordan blocks with eigenvalues in `{±1, ±2, 3}`.
pub fn jordan_case() -> impl Strategy<Value = QMatrix> {
    (2..=4usize).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::sample::select(vec![-2i64, -1, 1, 2, 3]), n),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(-2i64..=2, n * n),
        )
            .prop_filter_map("P invertible", move |(eig, chain, p)| {
                let mut j = vec![vec![0i64; n]; n];
                for i in 0..n {
                    j[i][i] = eig[i];
                    // Chain to the next slot only within one eigenvalue.
                    if i + 1 < n && chain[i] && eig[i + 1] == eig[i] {
                        j[i][i + 1] = 1;
                    }
                }
                let p = square(n, &p);
                let pinv = p.inverse()?;
                Some(p.mul(&QMatrix::from_i64(&j)).mul(&pinv))
            })
    })
}

pub fn check_sylvester(p: &QMatrix, g: &QMatrix) -> Result<(), String> {
    let before = QForm::new(g.clone()).unwrap().signature();
    let after = QForm::new(p.transpose().mul(g).mul(p)).unwrap().signature();
    if before == after {
        Ok(())
    } else {
        Err(format!("signature {before:?} became {after:?}"))
    }
}

pub fn check_group_axioms(f: &TorusIsometry, g: &TorusIsometry, h: &TorusIsometry, x: &TorusPoint) -> Result<(), String> {
    let id = TorusIsometry::identity(f.linear().form());
    let assoc_l = f.compose(g).unwrap().compose(h).unwrap();
    let assoc_r = f.compose(&g.compose(h).unwrap()).unwrap();
    if assoc_l != assoc_r {
        return Err("composition is not associative".into());
    }
    if f.compose(&id).unwrap() != *f || id.compose(f).unwrap() != *f {
        return Err("identity is not neutral".into());
    }
    if f.compose(&f.invert()).unwrap() != id || f.invert().compose(f).unwrap() != id {
        return Err("inverse fails".into());
    }
    let fg = f.compose(g).unwrap();
    if fg.apply(x.coords()) != f.apply(&g.apply(x.coords())) {
        return Err("composition does not act as f∘g".into());
    }
    Ok(())
}

/// `xⁿ p(1/x) = p(0) p(x)` for the characteristic polynomial of an isometry.
pub fn check_reciprocity(a: &QMatrix) -> Result<(), String> {
    let p = char_poly(a);
    let rev = Poly::new(p.coeffs().iter().rev().cloned().collect());
    let scaled = p.mul(&Poly::constant(p.coeff(0)));
    if rev == scaled {
        Ok(())
    } else {
        Err(format!("{p:?} is not reciprocal"))
    }
}

pub fn check_jordan_chevalley(a: &QMatrix) -> Result<(), String> {
    let jc = jordan_chevalley(a).map_err(|e| e.to_string())?;
    let n = a.rows();
    if jc.s.mul(&jc.u) != *a {
        return Err("A ≠ SU".into());
    }
    if jc.s.mul(&jc.u) != jc.u.mul(&jc.s) {
        return Err("SU ≠ US".into());
    }
    if !jc.u.sub(&QMatrix::identity(n)).pow(n as u64).is_zero() {
        return Err("U is not unipotent".into());
    }
    if !is_semisimple(&jc.s) {
        return Err("minimal polynomial of S is not squarefree".into());
    }
    Ok(())
}

pub fn check_gauss(f: &TorusIsometry, p: &TorusPoint) -> Result<(), String> {
    match gauss_equivariance(f, p) {
        Ok(true) => Ok(()),
        Ok(false) => Err("G at f(p) is not the pullback of G at p".into()),
        Err(e) => Err(e.to_string()),
    }
}
