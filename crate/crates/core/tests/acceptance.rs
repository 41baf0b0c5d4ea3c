//! Acceptance run: one PASS/FAIL line per criterion; exits non-zero if any fail.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use lorentz_core::amalgam::{amalgamated_metric, cayley_isometry, representative_independence_check, skew_fixing, PointFrame};
use lorentz_core::dynamics::{stable_bundles, verify_as_sampling, Schedule};
use lorentz_core::invariants::{average_form, group_invariant_form, nonelementary_split, numeric_average, Weights};
use lorentz_core::isometries::{brute_search, check_isometry, congruence_kernel_member, element_order, ElementOrder};
use lorentz_core::liecone::{change_m_basis, has_open_precompact_cone, library, LieAlgebraPresentation};
use lorentz_core::matrix::unit_vector;
use lorentz_core::normalform::parabolic_flag;
use lorentz_core::par;
use lorentz_core::poly::char_poly;
use lorentz_core::rational::{frac, q, to_f64};
use lorentz_core::salem::{classify_charpoly, FactorTag};
use lorentz_core::spectral::{classify, invariant_forms, IsoType};
use lorentz_core::{Config, Execution, LatticeIsometry, Poly, QForm, QMatrix, Signature, Subspace, TorusPoint, Q};
use num_traits::Zero;
use proptest::test_runner::{Config as PropConfig, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn golden_square() -> f64 {
    (3.0 + 5f64.sqrt()) / 2.0
}

fn cat_map() -> Outcome {
    let qf = cat_form();
    ensure!(check_isometry(&cat(), &qf).map_err(|e| e.to_string())?, "AᵀGA ≠ G");
    let a = LatticeIsometry::new(cat(), qf).map_err(|e| e.to_string())?;
    ensure!(classify(&a).unwrap() == IsoType::Hyperbolic, "not hyperbolic");
    let p = char_poly(a.matrix());
    ensure!(p == Poly::from_i64(&[1, -3, 1]), "char poly {p:?}");
    let c = classify_charpoly(&p).map_err(|e| e.to_string())?;
    ensure!(c.factors.len() == 1 && c.factors[0].tag == FactorTag::ReciprocalQuadraticUnit, "tags {:?}", c.factors);
    let l = c.leading.ok_or("no leading root")?;
    let (lo, hi) = (to_f64(&l.lo), to_f64(&l.hi));
    ensure!(lo <= golden_square() + 1e-15 && golden_square() - 1e-15 <= hi, "[{lo}, {hi}] misses λ");
    ensure!(hi - lo <= 1e-9, "interval width {}", hi - lo);
    Ok(())
}

fn parabolic() -> Outcome {
    let forms = invariant_forms(&[shift()]).map_err(|e| e.to_string())?;
    let target = parabolic_form();
    // The fixture form must lie in the solver's space of invariant forms.
    let coords: Vec<Vec<Q>> = forms.iter().map(|f| f.entries().to_vec()).collect();
    let basis = QMatrix::from_columns(9, &coords);
    let found = basis.transpose().mul(&basis).solve(&basis.transpose().mul_vec(target.gram().entries()));
    ensure!(found.is_some_and(|x| basis.mul_vec(&x) == target.gram().entries()), "form not in the invariant space");
    let sig = target.signature();
    ensure!(sig == Signature { n_plus: 2, n_minus: 1, n_zero: 0 }, "signature {sig:?}");
    let a = LatticeIsometry::new(shift(), target.clone()).map_err(|e| e.to_string())?;
    let flag = parabolic_flag(a.linear()).map_err(|e| e.to_string())?;
    let e = |i| unit_vector(3, i);
    ensure!(flag.m == 1, "m = {}", flag.m);
    ensure!(flag.l1 == Subspace::span(3, &[e(0)]), "L1 = {:?}", flag.l1);
    ensure!(flag.p2 == Subspace::span(3, &[e(0), e(1)]), "P2 = {:?}", flag.p2);
    let s = stable_bundles(&a).map_err(|e| e.to_string())?;
    let ex = s.exact.as_ref().ok_or("no exact bundles")?;
    ensure!(ex.sas == Subspace::span(3, &[e(0)]), "SAS = {:?}", ex.sas);
    ensure!(target.norm(&ex.sas.basis()[0]).unwrap().is_zero(), "SAS not lightlike");
    ensure!(ex.as_space == Subspace::span(3, &[e(0), e(1)]), "AS = {:?}", ex.as_space);
    ensure!(ex.as_space == target.orthogonal_complement(ex.sas.basis()).unwrap(), "AS ≠ SAS^⊥");
    Ok(())
}

fn block_fixture() -> (QMatrix, QForm) {
    let a = QMatrix::block_diag(&[&cat(), &rotation()]);
    let q0 = cat_form().direct_sum(&QForm::diag(&[2, 1]));
    (a, q0)
}

fn averaging() -> Outcome {
    let (a, q0) = block_fixture();
    let r = average_form(&a, &q0, &Config::default()).map_err(|e| e.to_string())?;
    let expected = cat_form().direct_sum(&QForm::new(QMatrix::diag(&[frac(3, 2), frac(3, 2)])).unwrap());
    ensure!(r.exact && r.terms_used == 4, "exact = {}, terms = {}", r.exact, r.terms_used);
    let exact = r.exact_form.as_ref().ok_or("no exact form")?;
    ensure!(exact == expected.gram(), "averaged form {exact:?}");
    ensure!(r.residual == 0.0, "residual {}", r.residual);
    ensure!(r.is_lorentz(), "signature {:?}", r.signature);
    let block = exact.submatrix(&[0, 1], &[0, 1]);
    ensure!(block == *cat_form().gram(), "E_λ block differs from q0");
    let cesaro = numeric_average(&a, &q0, Weights::Uniform, 1e-12, 1 << 20).map_err(|e| e.to_string())?;
    let err = max_diff(&cesaro.qbar, &exact.to_f64());
    ensure!(err <= 1e-10, "Cesàro path differs by {err}");
    Ok(())
}

fn max_diff(a: &[Vec<f64>], b: &nalgebra::DMatrix<f64>) -> f64 {
    let mut m: f64 = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            m = m.max((x - b[(i, j)]).abs());
        }
    }
    m
}

fn group_pipeline() -> Outcome {
    let g1 = QMatrix::block_diag(&[&cat(), &QMatrix::identity(2)]);
    let g2 = QMatrix::block_diag(&[&QMatrix::identity(2), &rotation()]);
    let (_, q0) = block_fixture();
    let cfg = Config::default();
    let gens = [g1, g2];
    let split = nonelementary_split(&gens, &q0, &cfg).map_err(|e| e.to_string())?;
    let form = group_invariant_form(&gens, &q0, &cfg).map_err(|e| e.to_string())?;
    let a_basis = split.a_space.basis();
    let b_basis = split.b_space.basis();
    ensure!(a_basis.len() == 2 && b_basis.len() == 2, "dims {} + {}", a_basis.len(), b_basis.len());
    let pair = |f: &QForm, u: &[Q], v: &[Q]| to_f64(&f.inner(u, v).unwrap());
    for u in a_basis {
        for v in a_basis {
            ensure!((pair(&form, u, v) - pair(&q0, u, v)).abs() <= 1e-12, "A×A block differs");
        }
        for v in b_basis {
            ensure!(pair(&form, u, v).abs() <= 1e-12, "mixed block nonzero");
        }
    }
    let on_b = form.restrict(b_basis).map_err(|e| e.to_string())?;
    ensure!(on_b.is_positive_definite(), "not positive definite on B");
    for g in &gens {
        ensure!(g.transpose().mul(form.gram()).mul(g) == *form.gram(), "not invariant");
    }
    Ok(())
}

/// 20 vectors: 10 in AS, 10 with a large component off it.
fn grid(basis: &[Vec<f64>], normal: &[f64], rng: &mut ChaCha8Rng) -> Vec<(Vec<f64>, bool)> {
    let n = normal.len();
    let mut out = Vec::with_capacity(20);
    for k in 0..20 {
        let mut v = vec![0.0; n];
        for b in basis {
            let c: f64 = rng.random_range(-1.0..1.0);
            for i in 0..n {
                v[i] += c * b[i];
            }
        }
        let inside = k < 10;
        if !inside {
            let s: f64 = rng.random_range(1.0..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            for i in 0..n {
                v[i] += s * normal[i];
            }
        }
        if v.iter().all(|x| x.abs() < 1e-3) {
            v = basis[0].clone();
        }
        out.push((v, inside));
    }
    out
}

fn oracle_agreement() -> Outcome {
    let cfg = Config::default();
    let schedule = Schedule::from_config(&cfg, 200);
    let mut elements = Vec::new();
    for qf in [cat_form(), parabolic_form()] {
        for a in brute_search(&qf, 2, &cfg).map_err(|e| e.to_string())? {
            if classify(&a).unwrap() != IsoType::Elliptic {
                elements.push(a);
            }
        }
    }
    ensure!(!elements.is_empty(), "no non-elliptic elements found");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut jobs = Vec::new();
    for a in &elements {
        let s = stable_bundles(a).map_err(|e| e.to_string())?;
        let gram = a.form().gram().to_f64();
        let z = nalgebra::DVector::from_vec(s.z.clone());
        let gz = &gram * z;
        let normal: Vec<f64> = (gz.clone() / gz.norm()).iter().copied().collect();
        for (v, inside) in grid(&s.as_basis, &normal, &mut rng) {
            ensure!(s.as_contains(&v, 1e-9) == inside, "grid vector misplaced");
            jobs.push((a.matrix().clone(), v, inside));
        }
    }
    let results = par::map(Execution::Parallel, &jobs, |(a, v, inside)| {
        verify_as_sampling(a, v, &schedule).map(|b| b == *inside)
    });
    let mut disagree = 0;
    for r in results {
        if !r.map_err(|e| e.to_string())? {
            disagree += 1;
        }
    }
    ensure!(disagree == 0, "{disagree} of {} disagree over {} elements", jobs.len(), elements.len());
    println!("    {} elements, {} vectors", elements.len(), jobs.len());
    Ok(())
}

fn sign_matrices() -> Vec<QMatrix> {
    [[1, 1], [1, -1], [-1, 1], [-1, -1]]
        .iter()
        .map(|d| QMatrix::diag(&[q(d[0]), q(d[1])]))
        .collect()
}

fn search_sets() -> Result<Vec<Vec<LatticeIsometry>>, String> {
    let cfg = Config::default();
    let e = |r: lorentz_core::Result<Vec<LatticeIsometry>>| r.map_err(|e| e.to_string());
    Ok(vec![
        e(brute_search(&QForm::diag(&[-1, 1]), 1, &cfg))?,
        e(brute_search(&QForm::diag(&[-1, 1]), 2, &cfg))?,
        e(brute_search(&cat_form(), 2, &cfg))?,
    ])
}

fn exhaustive_search() -> Outcome {
    let sets = search_sets()?;
    let mut signs = sign_matrices();
    signs.sort_by_key(|m| format!("{m:?}"));
    for found in &sets[..2] {
        let mut got: Vec<QMatrix> = found.iter().map(|a| a.matrix().clone()).collect();
        got.sort_by_key(|m| format!("{m:?}"));
        ensure!(got == signs, "diag(−1,1) search returned {} elements", got.len());
    }
    let cat_inv = cat().inverse().unwrap();
    ensure!(sets[2].iter().any(|a| *a.matrix() == cat()), "cat map missing");
    ensure!(sets[2].iter().any(|a| *a.matrix() == cat_inv), "cat inverse missing");
    Ok(())
}

fn torsion_free() -> Outcome {
    let mut checked = 0;
    for set in search_sets()? {
        for a in set {
            if a.matrix().is_identity() {
                continue;
            }
            if let ElementOrder::Finite(_) = element_order(a.linear(), 1000) {
                checked += 1;
                ensure!(!congruence_kernel_member(&a, 3).unwrap(), "{:?} lies in the level-3 kernel", a.matrix());
            }
        }
    }
    ensure!(checked > 0, "no finite-order elements");
    println!("    {checked} finite-order elements checked");
    Ok(())
}

fn salem() -> Outcome {
    let c = classify_charpoly(&Poly::from_i64(&[1, -1, -1, -1, 1])).map_err(|e| e.to_string())?;
    let f = &c.factors[0];
    ensure!(c.factors.len() == 1 && f.tag == FactorTag::Salem, "tags {:?}", c.factors);
    ensure!(f.real_off_circle == 2 && f.on_circle == 2 && f.complex_off_circle == 0, "counts {f:?}");
    let c = classify_charpoly(&Poly::from_i64(&[1, 0, -1, 0, 1])).map_err(|e| e.to_string())?;
    ensure!(c.factors.len() == 1 && c.factors[0].tag == FactorTag::Cyclotomic(12), "Φ12 tags {:?}", c.factors);
    Ok(())
}

fn random_invertible(n: usize, rng: &mut ChaCha8Rng) -> QMatrix {
    loop {
        let rows: Vec<Vec<Q>> = (0..n)
            .map(|_| (0..n).map(|_| frac(rng.random_range(-4..=4), rng.random_range(1..=5))).collect())
            .collect();
        let m = QMatrix::from_rows(rows).unwrap();
        if !m.det().is_zero() {
            return m;
        }
    }
}

fn lie_cone() -> Outcome {
    let cfg = Config::default();
    let cases: [(&str, LieAlgebraPresentation, bool); 4] = [
        ("heis3", library::heis3(), false),
        ("heis5", library::heis5(), false),
        ("abelian3", library::abelian(3), false),
        ("e2", library::e2(), true),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (name, g, expected) in cases {
        let d = has_open_precompact_cone(&g, &cfg).map_err(|e| e.to_string())?;
        ensure!(d.open_cone == expected, "{name}: {}", d.open_cone);
        for _ in 0..10 {
            let t = random_invertible(g.m_basis().len(), &mut rng);
            let h = change_m_basis(&g, &t).map_err(|e| e.to_string())?;
            let d = has_open_precompact_cone(&h, &cfg).map_err(|e| e.to_string())?;
            ensure!(d.open_cone == expected, "{name} after a basis change: {}", d.open_cone);
        }
    }
    Ok(())
}

/// A random isometry of `g` preserving the line through `v`: `±` a Cayley
/// rotation fixing `v`, optionally followed by a reflection in a vector `g`-orthogonal to `v`.
fn line_isometry(g: &QForm, v: &[Q], rng: &mut ChaCha8Rng) -> QMatrix {
    let n = g.dim();
    let coeffs: Vec<Q> = (0..n * n).map(|_| frac(rng.random_range(-3..=3), rng.random_range(1..=4))).collect();
    let mut m = cayley_isometry(g, &skew_fixing(v, &coeffs)).unwrap_or_else(|| QMatrix::identity(n));
    if rng.random_bool(0.5) {
        let perp = g.orthogonal_complement(&[v.to_vec()]).unwrap();
        let mut u = vec![Q::zero(); n];
        for b in perp.basis() {
            let c = q(rng.random_range(-2..=2));
            for i in 0..n {
                u[i] += &c * &b[i];
            }
        }
        let uu = g.norm(&u).unwrap();
        if !uu.is_zero() {
            // x ↦ x − 2 g(x, u)/g(u, u) u
            let gu = g.gram().mul_vec(&u);
            let mut r = QMatrix::identity(n);
            for i in 0..n {
                for j in 0..n {
                    r[(i, j)] -= q(2) * &u[i] * &gu[j] / &uu;
                }
            }
            m = r.mul(&m);
        }
    }
    if rng.random_bool(0.5) {
        m = m.neg();
    }
    m
}

fn random_lorentz(a: usize, rng: &mut ChaCha8Rng) -> QForm {
    let d: Vec<Q> = (0..a).map(|i| q(if i == 0 { -1 } else { 1 })).collect();
    let d = QMatrix::diag(&d);
    loop {
        let p = QMatrix::from_rows((0..a).map(|_| (0..a).map(|_| q(rng.random_range(-2..=2))).collect()).collect()).unwrap();
        if !p.det().is_zero() {
            return QForm::new(p.transpose().mul(&d).mul(&p)).unwrap();
        }
    }
}

fn random_positive(b: usize, rng: &mut ChaCha8Rng) -> QForm {
    let m = QMatrix::from_rows((0..b).map(|_| (0..b).map(|_| q(rng.random_range(-2..=2))).collect()).collect()).unwrap();
    QForm::new(m.transpose().mul(&m).add(&QMatrix::identity(b))).unwrap()
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<Q> {
    loop {
        let v: Vec<Q> = (0..n).map(|_| q(rng.random_range(-3..=3))).collect();
        if v.iter().any(|x| !x.is_zero()) {
            return v;
        }
    }
}

fn amalgamation() -> Outcome {
    let plane = PointFrame::new(QForm::diag(&[-1, 1]), QForm::diag(&[1, 1]), vec![q(1), q(0)], vec![q(1), q(0)]).unwrap();
    let m = amalgamated_metric(&plane).map_err(|e| e.to_string())?;
    ensure!(m.form == QForm::diag(&[-1, 1, 1]), "plane fixture gave {:?}", m.form);
    let tilted = PointFrame::new(
        QForm::diag(&[-1, 1, 1]),
        QForm::from_i64(&[[2, 1, 0], [1, 2, 0], [0, 0, 1]]),
        vec![q(2), q(1), q(0)],
        vec![q(1), q(-1), q(2)],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for f in [&plane, &tilted] {
        for _ in 0..50 {
            let phi = line_isometry(f.gx(), f.a_vec(), &mut rng);
            let psi = line_isometry(f.gy(), f.b_vec(), &mut rng);
            let r = representative_independence_check(f, &phi, &psi).map_err(|e| e.to_string())?;
            ensure!(r.agrees && r.residual <= 1e-12, "residual {}", r.residual);
        }
    }
    for _ in 0..100 {
        let a = rng.random_range(2..=4);
        let b = rng.random_range(1..=4);
        let f = PointFrame::new(
            random_lorentz(a, &mut rng),
            random_positive(b, &mut rng),
            random_vector(a, &mut rng),
            random_vector(b, &mut rng),
        )
        .map_err(|e| e.to_string())?;
        let s = amalgamated_metric(&f).map_err(|e| e.to_string())?.form.signature();
        ensure!(s == Signature { n_plus: a + b - 2, n_minus: 1, n_zero: 0 }, "signature {s:?} for a = {a}, b = {b}");
    }
    Ok(())
}

fn property_suites() -> Outcome {
    let cfg = PropConfig { cases: 1000, failure_persistence: None, ..PropConfig::default() };
    let fail = |e: String| TestCaseError::fail(e);
    let mut runner = TestRunner::new(cfg.clone());
    runner
        .run(&sylvester_case(), |(p, g)| check_sylvester(&p, &g).map_err(fail))
        .map_err(|e| format!("Sylvester: {e}"))?;
    let mut runner = TestRunner::new(cfg.clone());
    runner
        .run(&(word(), word(), word(), point(3)), |(f, g, h, x)| {
            let g = WordSpec { pool: f.pool, ..g };
            let h = WordSpec { pool: f.pool, ..h };
            let x = TorusPoint::new(x.coords()[..f.dim()].to_vec());
            check_group_axioms(&f.torus(), &g.torus(), &h.torus(), &x).map_err(fail)
        })
        .map_err(|e| format!("group axioms: {e}"))?;
    let mut runner = TestRunner::new(cfg.clone());
    runner
        .run(&word(), |w| check_reciprocity(w.lattice().matrix()).map_err(fail))
        .map_err(|e| format!("reciprocity: {e}"))?;
    let mut runner = TestRunner::new(cfg.clone());
    runner
        .run(&jordan_case(), |a| check_jordan_chevalley(&a).map_err(fail))
        .map_err(|e| format!("Jordan-Chevalley: {e}"))?;
    let mut runner = TestRunner::new(cfg.clone());
    runner
        .run(&word(), |w| check_jordan_chevalley(w.lattice().matrix()).map_err(fail))
        .map_err(|e| format!("Jordan-Chevalley on isometries: {e}"))?;
    let mut runner = TestRunner::new(cfg);
    runner
        .run(&(word(), point(3)), |(w, x)| {
            let x = TorusPoint::new(x.coords()[..w.dim()].to_vec());
            check_gauss(&w.torus(), &x).map_err(fail)
        })
        .map_err(|e| format!("Gauss map: {e}"))?;
    Ok(())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("cat map", cat_map, Some(Duration::from_secs(1))),
        ("parabolic flag and bundles", parabolic, Some(Duration::from_secs(1))),
        ("averaging", averaging, Some(Duration::from_secs(1))),
        ("group pipeline", group_pipeline, None),
        ("AS sampling oracle", oracle_agreement, Some(Duration::from_secs(30))),
        ("exhaustive search", exhaustive_search, Some(Duration::from_secs(5))),
        ("congruence torsion-freeness", torsion_free, None),
        ("Salem exactness", salem, Some(Duration::from_secs(1))),
        ("Lie cone", lie_cone, None),
        ("amalgamated metric", amalgamation, None),
        ("property suites", property_suites, None),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| match limit {
            Some(l) if elapsed > *l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
            _ => Ok(()),
        });
        match outcome {
            Ok(()) => println!("PASS {:>2} {name} ({elapsed:.2?})", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({elapsed:.2?}): {e}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
