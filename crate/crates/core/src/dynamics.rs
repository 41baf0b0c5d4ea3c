//! Dynamics of affine isometries of flat Lorentz tori: exact orbits, the
//! approximately stable hyperplane and its lightlike line, a sampling oracle
//! for approximate stability, and the (constant) Gauss map.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{check_dim, Error, Result};
use crate::forms::QForm;
use crate::isometries::{reduce_mod_one, LatticeIsometry, TorusIsometry};
use crate::matrix::{kernel_space, vto_f64, QMatrix, QVector, Subspace};
use crate::normalform::{float_kernel, hyperbolic_split, parabolic_flag};
use crate::rational::{self, fmt_q, serde_q, Q};
use crate::spectral::{classify, IsoType};

/// A point of `ℝⁿ/ℤⁿ`, coordinates in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusPoint {
    #[serde(with = "serde_q::vec")]
    coords: QVector,
}

impl TorusPoint {
    pub fn new(coords: QVector) -> Self {
        TorusPoint { coords: reduce_mod_one(&coords) }
    }

    pub fn origin(n: usize) -> Self {
        TorusPoint { coords: vec![Q::zero(); n] }
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Sup-distance on the torus.
    pub fn distance(&self, other: &TorusPoint) -> Q {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| rational::circle_dist(&(a - b)))
            .max()
            .unwrap_or_else(Q::zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitStats {
    /// Smallest `d(x_k, x_0)` over `1 ≤ k ≤ N` and the first `k` attaining it.
    #[serde(with = "serde_q")]
    pub min_return_distance: Q,
    pub min_return_time: usize,
    /// First exact return, if any.
    pub period: Option<usize>,
    pub steps: usize,
    /// Set when `N` exceeded the step budget and the orbit was cut short.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub points: Vec<TorusPoint>,
    pub stats: OrbitStats,
}

impl Orbit {
    /// One row per step: `k,x_1,…,x_n`, rationals as `p/q`.
    pub fn to_csv(&self) -> String {
        let n = self.points.first().map_or(0, TorusPoint::dim);
        let mut out = String::from("k");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for (k, p) in self.points.iter().enumerate() {
            out.push_str(&k.to_string());
            for c in p.coords() {
                out.push(',');
                out.push_str(&fmt_q(c));
            }
            out.push('\n');
        }
        out
    }
}

/// `x_k = f^k(x_0)` for `k = 0..=N`, by exact rational iteration.
pub fn iterate_orbit(f: &TorusIsometry, x0: &TorusPoint, steps: usize, config: &Config) -> Result<Orbit> {
    check_dim(f.linear().dim(), x0.dim())?;
    let truncated = steps > config.max_steps;
    let steps = steps.min(config.max_steps);
    let mut points = Vec::with_capacity(steps + 1);
    points.push(x0.clone());
    let mut best: Option<(Q, usize)> = None;
    let mut period = None;
    let mut x = x0.clone();
    for k in 1..=steps {
        x = TorusPoint { coords: f.apply(&x.coords) };
        let d = x.distance(x0);
        if best.as_ref().is_none_or(|(b, _)| d < *b) {
            best = Some((d.clone(), k));
        }
        if period.is_none() && d.is_zero() {
            period = Some(k);
        }
        points.push(x.clone());
    }
    let (min_return_distance, min_return_time) = best.unwrap_or((Q::zero(), 0));
    Ok(Orbit {
        points,
        stats: OrbitStats {
            min_return_distance,
            min_return_time,
            period,
            steps,
            truncated,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactStable {
    pub sas: Subspace,
    pub as_space: Subspace,
}

/// Stable bundles of a non-elliptic toral isometry, which are constant on the torus.
#[derive(Clone, Debug, Serialize)]
pub struct StableData {
    pub class: IsoType,
    /// Lightlike vector `Z` spanning SAS.
    pub z: Vec<f64>,
    /// Euclidean-orthonormal basis of AS.
    pub as_basis: Vec<Vec<f64>>,
    /// Eigenvalue of `A` on `Z`.
    pub mu: f64,
    #[serde(skip)]
    pub exact: Option<ExactStable>,
    #[serde(skip)]
    gram: Vec<Vec<f64>>,
}

impl StableData {
    /// Membership in `AS = Z^⊥`, up to the relative tolerance `tol`.
    pub fn as_contains(&self, v: &[f64], tol: f64) -> bool {
        let gz: Vec<f64> = self.gram.iter().map(|r| r.iter().zip(&self.z).map(|(a, b)| a * b).sum()).collect();
        let ip: f64 = gz.iter().zip(v).map(|(a, b)| a * b).sum();
        ip.abs() <= tol * norm(&gz) * norm(v).max(f64::MIN_POSITIVE)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn stable_bundles(a: &LatticeIsometry) -> Result<StableData> {
    let class = classify(a)?;
    let q = a.form();
    let am = a.matrix();
    let n = a.dim();
    let gram: Vec<Vec<f64>> = q.gram().to_rows().iter().map(|r| vto_f64(r)).collect();
    match class {
        IsoType::Elliptic => Err(Error::BoundedPowers),
        IsoType::Hyperbolic => {
            let h = hyperbolic_split(a.linear())?;
            let lambda = h.lambda.value();
            let exact = match h.lambda.exact() {
                Some(l) => {
                    let sas = kernel_space(&am.sub(&QMatrix::scalar(n, &l.recip())));
                    let as_space = q.orthogonal_complement(sas.basis())?;
                    Some(ExactStable { sas, as_space })
                }
                None => None,
            };
            let z = h.v_minus;
            let gz: Vec<f64> = gram.iter().map(|r| r.iter().zip(&z).map(|(a, b)| a * b).sum()).collect();
            let as_basis = float_kernel(&[gz], n);
            Ok(StableData {
                class,
                z,
                as_basis,
                mu: 1.0 / lambda,
                exact,
                gram,
            })
        }
        IsoType::Parabolic => {
            let flag = parabolic_flag(a.linear())?;
            let zq = flag.l1.basis()[0].clone();
            let az = am.mul_vec(&zq);
            let mu = ratio(&az, &zq);
            let as_space = q.orthogonal_complement(flag.l1.basis())?;
            let as_basis = crate::normalform::orthonormalize(
                &as_space.basis().iter().map(|v| vto_f64(v)).collect::<Vec<_>>(),
            );
            Ok(StableData {
                class,
                z: vto_f64(&zq),
                as_basis,
                mu: rational::to_f64(&mu),
                exact: Some(ExactStable { sas: flag.l1, as_space }),
                gram,
            })
        }
    }
}

/// `μ` with `u = μ v`, for `v ≠ 0` known to be parallel to `u`.
fn ratio(u: &[Q], v: &[Q]) -> Q {
    let i = v.iter().position(|x| !x.is_zero()).expect("nonzero vector");
    &u[i] / &v[i]
}

/// Radius schedule `δ(n) = c/√n` and the bound `B₀ = 10³‖v‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub c: f64,
    pub n_max: usize,
}

impl Schedule {
    pub fn from_config(config: &Config, n_max: usize) -> Self {
        Schedule { c: config.oracle_c, n_max }
    }

    /// Sampled times: every `n ≤ 8`, then roughly geometric up to `n_max`.
    pub fn times(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut n = 1usize;
        while n < self.n_max {
            out.push(n);
            n = if n < 8 { n + 1 } else { n + n.div_ceil(2) };
        }
        out.push(self.n_max.max(1));
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleReport {
    pub bounded: bool,
    /// Per sampled `n`: an upper bound on `min_{‖w‖ ≤ δ(n)} ‖Aⁿ(v + w)‖`.
    pub minima: Vec<(usize, f64)>,
}

pub const B0_FACTOR: f64 = 1e3;

/// Empirical test of approximate stability of `v`: whether
/// `min_{‖w‖ ≤ δ(n)} ‖Aⁿ(v + w)‖` stays below `B₀` along the schedule.
pub fn verify_as_sampling(a: &QMatrix, v: &[f64], schedule: &Schedule) -> Result<bool> {
    Ok(as_sampling_report(a, v, schedule)?.bounded)
}

/// The ball-constrained least-squares problem is solved in exact arithmetic:
/// for `P = MᵀM` the minimizer on the sphere is `w(μ) = −(P + μI)⁻¹Pv`, and a
/// bisection on `log μ` brackets the optimum between a feasible value (upper
/// bound) and the Lagrangian dual value (lower bound).
pub fn as_sampling_report(a: &QMatrix, v: &[f64], schedule: &Schedule) -> Result<SampleReport> {
    let n = a.rows();
    check_dim(n, v.len())?;
    let vq: QVector = v.iter().map(|&x| rational::from_f64(x)).collect();
    let (vnum, vden) = integer_parts(&vq);
    let b0 = B0_FACTOR * norm(v);
    let b0_sq = rational::from_f64(b0 * b0);
    let c = rational::from_f64(schedule.c);
    let (a_num, a_den) = integer_parts(a.entries());
    let a_num = to_square(&a_num, n);
    let mut minima = Vec::new();
    let mut power = identity_int(n);
    let mut power_den = BigInt::one();
    let mut reached = 0usize;
    for t in schedule.times() {
        while reached < t {
            power = mat_mul_int(&a_num, &power);
            power_den *= &a_den;
            reached += 1;
        }
        let delta_sq = &c * &c / Q::from_integer(BigInt::from(t));
        let problem = BallProblem {
            m: &power,
            m_den: &power_den,
            v: &vnum,
            v_den: &vden,
        };
        let (upper, lower) = problem.bracket(&delta_sq, &b0_sq);
        minima.push((t, upper.to_f64().sqrt()));
        let bound = Frac::from_q(&b0_sq);
        if bound.lt(&lower) || bound.lt(&upper) {
            return Ok(SampleReport { bounded: false, minima });
        }
    }
    Ok(SampleReport { bounded: true, minima })
}

/// Integer numerators over a common denominator.
fn integer_parts(xs: &[Q]) -> (Vec<BigInt>, BigInt) {
    let d = rational::lcm_denominators(xs);
    let nums = xs.iter().map(|x| (x * Q::from_integer(d.clone())).to_integer()).collect();
    (nums, d)
}

fn to_square(entries: &[BigInt], n: usize) -> Vec<Vec<BigInt>> {
    entries.chunks(n).map(|r| r.to_vec()).collect()
}

fn identity_int(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

fn mat_mul_int(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(BigInt::zero(), |acc, k| acc + &a[i][k] * &b[k][j]))
                .collect()
        })
        .collect()
}

fn mat_vec_int(a: &[Vec<BigInt>], v: &[BigInt]) -> Vec<BigInt> {
    a.iter().map(|r| r.iter().zip(v).fold(BigInt::zero(), |acc, (x, y)| acc + x * y)).collect()
}

fn norm_sq_int(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |acc, x| acc + x * x)
}

/// Unreduced nonnegative fraction; comparisons cross-multiply, which is far
/// cheaper than gcd reduction at these sizes.
#[derive(Clone, Debug)]
struct Frac {
    num: BigInt,
    den: BigInt,
}

impl Frac {
    fn new(num: BigInt, den: BigInt) -> Self {
        Frac { num, den }
    }

    fn from_q(x: &Q) -> Self {
        Frac::new(x.numer().clone(), x.denom().clone())
    }

    fn lt(&self, o: &Frac) -> bool {
        &self.num * &o.den < &o.num * &self.den
    }

    fn to_f64(&self) -> f64 {
        // Shift both parts into f64 range before dividing.
        let shift = self.num.bits().max(self.den.bits()).saturating_sub(900);
        let n: f64 = num_traits::ToPrimitive::to_f64(&(&self.num >> shift)).unwrap_or(f64::INFINITY);
        let d: f64 = num_traits::ToPrimitive::to_f64(&(&self.den >> shift)).unwrap_or(f64::INFINITY);
        if d == 0.0 {
            f64::INFINITY
        } else {
            n / d
        }
    }
}

/// `min_{‖w‖² ≤ δ²} ‖M(v + w)‖²` with `M = m / m_den` and `v = v / v_den`.
struct BallProblem<'a> {
    m: &'a [Vec<BigInt>],
    m_den: &'a BigInt,
    v: &'a [BigInt],
    v_den: &'a BigInt,
}

struct Step {
    feasible: bool,
    value: Frac,
    dual: Frac,
}

impl BallProblem<'_> {
    /// Solves `(P + 2^e I) x = P v` for the scaled integer system, where the
    /// true multiplier is `μ = 2^e / m_den²`, and evaluates `w = −x`.
    fn step(&self, p: &[Vec<BigInt>], pv: &[BigInt], e: i64, delta_sq: &Q) -> Step {
        let (k, r, scale) = if e >= 0 {
            let s = BigInt::one() << e as usize;
            let mut k = p.to_vec();
            for (i, row) in k.iter_mut().enumerate() {
                row[i] += &s;
            }
            (k, pv.to_vec(), BigInt::one())
        } else {
            let s = BigInt::one() << (-e) as usize;
            let mut k: Vec<Vec<BigInt>> = p.iter().map(|r| r.iter().map(|x| x * &s).collect()).collect();
            for (i, row) in k.iter_mut().enumerate() {
                row[i] += BigInt::one();
            }
            (k, pv.iter().map(|x| x * &s).collect(), s)
        };
        let (nums, den) = crate::matrix::bareiss_solve(&k, &r).expect("P + μI is positive definite");
        // w = −nums/dd with dd = den·v_den, and v + w = (v·den − nums)/dd.
        let dd = &den * self.v_den;
        let dd_sq = &dd * &dd;
        let md_sq = self.m_den * self.m_den;
        let n2 = norm_sq_int(&nums);
        let (cn, cd) = (delta_sq.numer(), delta_sq.denom());
        let feasible = &n2 * cd <= cn * &dd_sq;
        let x: Vec<BigInt> = self.v.iter().zip(&nums).map(|(a, b)| a * &den - b).collect();
        let f_num = norm_sq_int(&mat_vec_int(self.m, &x));
        let value = Frac::new(f_num.clone(), &dd_sq * &md_sq);
        // dual = f + μ(‖w‖² − δ²), over the denominator md²·dd²·cd·2^{max(−e,0)}.
        let slack = &n2 * cd - cn * &dd_sq;
        let (num, den) = if e >= 0 {
            (&f_num * cd + (slack << e as usize), &md_sq * &dd_sq * cd)
        } else {
            (&f_num * cd * &scale + slack, &md_sq * &dd_sq * cd * &scale)
        };
        let dual = if num.sign() == num_bigint::Sign::Minus {
            Frac::new(BigInt::zero(), BigInt::one())
        } else {
            Frac::new(num, den)
        };
        Step { feasible, value, dual }
    }

    /// Brackets the minimum to within a factor-two step of the multiplier,
    /// stopping early once the lower end exceeds `bound`. Returns `(upper, lower)`.
    fn bracket(&self, delta_sq: &Q, bound: &Q) -> (Frac, Frac) {
        let n = self.v.len();
        let zero = Frac::new(BigInt::zero(), BigInt::one());
        let (cn, cd) = (delta_sq.numer(), delta_sq.denom());
        if norm_sq_int(self.v) * cd <= cn * (self.v_den * self.v_den) {
            return (zero.clone(), zero);
        }
        let bound = Frac::from_q(bound);
        let md_sq = self.m_den * self.m_den;
        let mt: Vec<Vec<BigInt>> = (0..n).map(|i| (0..n).map(|j| self.m[j][i].clone()).collect()).collect();
        let p = mat_mul_int(&mt, self.m);
        let pv = mat_vec_int(&p, self.v);
        let mv = mat_vec_int(self.m, self.v);
        let mut upper = Frac::new(norm_sq_int(&mv), &md_sq * self.v_den * self.v_den);
        let mut lower = zero;
        // Feasible upper end: ‖w‖ ≤ ‖P‖‖v‖/μ, from bit lengths since P overflows f64.
        let p_bits = p.iter().flatten().map(|x| x.bits()).max().unwrap_or(0) as i64 + n as i64;
        let v_bits = (norm_sq_int(self.v).bits() as i64 - 2 * self.v_den.bits() as i64 + 2) / 2;
        let d_bits = (cd.bits() as i64 - cn.bits() as i64 + 2) / 2;
        let mut hi = (p_bits + v_bits + d_bits).max(0) + 2;
        // Walk down until infeasible.
        let mut lo = hi;
        let mut gap = 64i64;
        loop {
            lo -= gap;
            gap *= 2;
            let st = self.step(&p, &pv, lo, delta_sq);
            if lower.lt(&st.dual) {
                lower = st.dual;
            }
            if st.feasible {
                if st.value.lt(&upper) {
                    upper = st.value;
                }
                hi = lo;
            } else {
                break;
            }
            if lo < -65536 {
                return (upper, lower);
            }
        }
        while hi - lo > 1 && !bound.lt(&lower) {
            let e = (lo + hi).div_euclid(2);
            let st = self.step(&p, &pv, e, delta_sq);
            if lower.lt(&st.dual) {
                lower = st.dual;
            }
            if st.feasible {
                if st.value.lt(&upper) {
                    upper = st.value;
                }
                hi = e;
            } else {
                lo = e;
            }
        }
        (upper, lower)
    }
}

/// Gauss map of the flat torus: the Killing fields are the translations, whose
/// pairwise products are constant, so `G_p = q` everywhere.
pub fn gauss_form(q: &QForm, p: &TorusPoint) -> Result<QForm> {
    check_dim(q.dim(), p.dim())?;
    Ok(q.clone())
}

/// `G_{Φ(p)} = G_p(Ad_Φ ·, Ad_Φ ·)` for `Φ = (A, τ)`, where `Ad_Φ` acts on translations by `A`.
pub fn gauss_equivariance(f: &TorusIsometry, p: &TorusPoint) -> Result<bool> {
    let q = f.linear().form();
    let image = TorusPoint { coords: f.apply(p.coords()) };
    let lhs = gauss_form(q, &image)?;
    let rhs = gauss_form(q, p)?.pullback(f.linear().matrix())?;
    Ok(lhs == rhs)
}

/// Sign-normalized copy of `v`: first significant entry positive.
pub fn sign_normalize(v: &[f64]) -> Vec<f64> {
    let s = v.iter().find(|x| x.abs() > 1e-12).map_or(1.0, |x| x.signum());
    v.iter().map(|x| x * s).collect()
}
