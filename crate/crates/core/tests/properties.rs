mod common;

use common::*;
use lorentz_core::forms::QForm;
use lorentz_core::rational::frac;
use lorentz_core::spectral::classify_matrix;
use lorentz_core::{Poly, QMatrix};
use proptest::prelude::*;

fn jc_input() -> impl Strategy<Value = QMatrix> {
    prop_oneof![jordan_case(), word().prop_map(|w| w.lattice().matrix().clone())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sylvester((p, g) in sylvester_case()) {
        check_sylvester(&p, &g).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn semidirect_group_axioms(f in word(), g in word(), h in word(), x in point(3)) {
        // Words from different pools live on different tori; reuse f's pool.
        let g = WordSpec { pool: f.pool, ..g };
        let h = WordSpec { pool: f.pool, ..h };
        let x = lorentz_core::TorusPoint::new(x.coords()[..f.dim()].to_vec());
        check_group_axioms(&f.torus(), &g.torus(), &h.torus(), &x).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn reciprocal_char_polys(w in word()) {
        check_reciprocity(w.lattice().matrix()).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn jordan_chevalley_contract(a in jc_input()) {
        check_jordan_chevalley(&a).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn gauss_equivariance(w in word(), x in point(3)) {
        let x = lorentz_core::TorusPoint::new(x.coords()[..w.dim()].to_vec());
        check_gauss(&w.torus(), &x).map_err(TestCaseError::fail)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn classification_is_conjugation_invariant(w in word(), p in prop::collection::vec(-2i64..=2, 9)) {
        let a = w.lattice().matrix().clone();
        let n = a.rows();
        let p = square(n, &p[..n * n]);
        prop_assume!(p.inverse().is_some());
        let b = p.inverse().unwrap().mul(&a).mul(&p);
        prop_assert_eq!(classify_matrix(&a), classify_matrix(&b));
    }

    #[test]
    fn isometries_preserve_their_form(w in word()) {
        let a = w.lattice();
        let g = a.form().gram();
        prop_assert_eq!(&a.matrix().transpose().mul(g).mul(a.matrix()), g);
        prop_assert!(a.matrix().det() == frac(1, 1) || a.matrix().det() == frac(-1, 1));
    }

    #[test]
    fn powers_keep_type(w in word(), k in 1u64..5) {
        let a = w.lattice();
        let t = classify_matrix(a.matrix());
        let tk = classify_matrix(a.pow(k).matrix());
        prop_assert_eq!(t, tk);
    }

    #[test]
    fn direct_sum_signature(a in prop::collection::vec(-3i64..=3, 3), b in prop::collection::vec(-3i64..=3, 3)) {
        let f = QForm::new(symmetric(2, &a)).unwrap();
        let g = QForm::new(symmetric(2, &b)).unwrap();
        let s = f.direct_sum(&g).signature();
        let (sf, sg) = (f.signature(), g.signature());
        prop_assert_eq!(s.n_plus, sf.n_plus + sg.n_plus);
        prop_assert_eq!(s.n_minus, sf.n_minus + sg.n_minus);
        prop_assert_eq!(s.n_zero, sf.n_zero + sg.n_zero);
    }

    #[test]
    fn char_poly_is_monic(w in word()) {
        let p: Poly = lorentz_core::poly::char_poly(w.lattice().matrix());
        prop_assert!(p.is_monic());
    }
}
