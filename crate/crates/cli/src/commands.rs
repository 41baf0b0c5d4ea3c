//! One runner per subcommand: parse the input document, call the library, render.

use std::io::Read as _;

use lorentz_core::amalgam::{self, PointFrame};
use lorentz_core::dynamics::{self, TorusPoint};
use lorentz_core::forms::QForm;
use lorentz_core::invariants;
use lorentz_core::isometries::{self, ElementOrder, LatticeIsometry, LinearIsometry, TorusIsometry};
use lorentz_core::liecone::{self, LieAlgebraPresentation};
use lorentz_core::matrix::{QMatrix, Subspace};
use lorentz_core::normalform::{self, HyperbolicReport};
use lorentz_core::poly::{char_poly, Poly};
use lorentz_core::rational::{fmt_q, q, serde_q, Q};
use lorentz_core::salem;
use lorentz_core::spectral::{self, IsoType};
use lorentz_core::{Config, Error};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::output::render;
use crate::{Common, Failure};

pub type Runner = fn(&Common, &Config, Value) -> Result<String, Failure>;

/// Inline when the argument looks like JSON, a file path otherwise, standard input when absent.
pub fn read_input(arg: &Option<String>) -> Result<Value, Failure> {
    let text = match arg {
        Some(s) if s.trim_start().starts_with(['{', '[']) => s.clone(),
        Some(path) => std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{path}: {e}")))?,
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::input(format!("stdin: {e}")))?;
            s
        }
    };
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("input: {e}")))
}

fn parse<T: DeserializeOwned>(v: Value) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| Failure::input(e.to_string()))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("library types serialize")
}

fn strs(v: &[Q]) -> Vec<String> {
    v.iter().map(fmt_q).collect()
}

fn matrix_json(m: &QMatrix) -> Value {
    json!(m.to_rows().iter().map(|r| strs(r)).collect::<Vec<_>>())
}

fn subspace_json(s: &Subspace) -> Value {
    json!(s.basis().iter().map(|r| strs(r)).collect::<Vec<_>>())
}

fn poly_json(p: &Poly) -> Value {
    json!(strs(p.coeffs()))
}

fn form_json(f: &QForm) -> Value {
    to_value(f)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapDoc {
    #[serde(rename = "A", with = "serde_q::vec_vec")]
    a: Vec<Vec<Q>>,
    #[serde(default, with = "serde_q::vec")]
    tau: Vec<Q>,
    q: QForm,
}

impl MapDoc {
    fn matrix(&self) -> Result<QMatrix, Failure> {
        Ok(QMatrix::from_rows(self.a.clone())?)
    }

    fn linear(&self) -> Result<LinearIsometry, Failure> {
        Ok(LinearIsometry::new(self.matrix()?, self.q.clone())?)
    }

    fn lattice(&self) -> Result<LatticeIsometry, Failure> {
        Ok(LatticeIsometry::new(self.matrix()?, self.q.clone())?)
    }

    fn torus(&self) -> Result<TorusIsometry, Failure> {
        let a = self.lattice()?;
        let tau = if self.tau.is_empty() {
            vec![q(0); a.dim()]
        } else {
            self.tau.clone()
        };
        Ok(TorusIsometry::new(a, tau)?)
    }
}

/// Type, characteristic polynomial, order of elliptic elements and, with
/// `--modulus`, membership in the congruence kernel.
pub fn classify(common: &Common, config: &Config, input: Value) -> Result<String, Failure> {
    let doc: MapDoc = parse(input)?;
    let lin = doc.linear()?;
    let class = spectral::classify_linear(&lin)?;
    let mut out = json!({
        "type": class,
        "char_poly": poly_json(&char_poly(lin.matrix())),
    });
    if class == IsoType::Elliptic {
        out["order"] = match isometries::element_order(&lin, config.order_cap) {
            ElementOrder::Finite(k) => json!(k),
            ElementOrder::InfiniteWithinCap => Value::Null,
        };
    }
    if let Some(m) = common.modulus {
        let lat = doc.lattice()?;
        out["congruence_kernel_member"] = json!(isometries::congruence_kernel_member(&lat, m)?);
    }
    Ok(render(&out))
}

fn need_bound(common: &Common) -> Result<u32, Failure> {
    common.bound.ok_or_else(|| Failure::input("--bound is required"))
}

pub fn search(common: &Common, config: &Config, input: Value) -> Result<String, Failure> {
    let form: QForm = parse(input)?;
    let found = isometries::brute_search(&form, need_bound(common)?, config)?;
    let mut elements = Vec::with_capacity(found.len());
    for a in &found {
        elements.push(json!({"A": matrix_json(a.matrix()), "type": spectral::classify(a)?}));
    }
    Ok(render(&json!({"count": found.len(), "elements": elements})))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InvariantDoc {
    #[serde(default, rename = "A", with = "opt_matrix")]
    a: Option<Vec<Vec<Q>>>,
    #[serde(default, with = "matrices")]
    generators: Vec<Vec<Vec<Q>>>,
    #[serde(default)]
    q0: Option<QForm>,
}

mod opt_matrix {
    use super::*;
    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Vec<Vec<Q>>>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "serde_q::vec_vec")] Vec<Vec<Q>>);
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

mod matrices {
    use super::*;
    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<Vec<Vec<Q>>>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "serde_q::vec_vec")] Vec<Vec<Q>>);
        Ok(Vec::<W>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

/// Largest coefficient tried when looking for a Lorentz combination.
const COMBO_RANGE: i64 = 2;
/// Beyond this many basis forms the combination search is skipped.
const COMBO_MAX_BASIS: usize = 6;

/// Without `q0`: a basis of the invariant forms and the first Lorentz member found
/// among small integer combinations. With `q0`: the averaged form for a single
/// generator, the group form and its `A ⊕ B` split for several.
pub fn invariant_form(_: &Common, config: &Config, input: Value) -> Result<String, Failure> {
    let doc: InvariantDoc = parse(input)?;
    let mut gens = Vec::new();
    if let Some(a) = doc.a {
        gens.push(QMatrix::from_rows(a)?);
    }
    for g in doc.generators {
        gens.push(QMatrix::from_rows(g)?);
    }
    if gens.is_empty() {
        return Err(Failure::input("need \"A\" or \"generators\""));
    }
    let out = match doc.q0 {
        None => {
            let basis = spectral::invariant_forms(&gens)?;
            let lorentz = lorentz_combination(&basis);
            json!({
                "basis": basis.iter().map(matrix_json).collect::<Vec<_>>(),
                "lorentz": lorentz.as_ref().map(|(c, f)| json!({"coefficients": strs(c), "form": form_json(f)})),
            })
        }
        Some(q0) if gens.len() == 1 => {
            let r = invariants::average_form(&gens[0], &q0, config)?;
            let mut v = to_value(&r);
            if let Some(e) = &r.exact_form {
                v["exact_form"] = matrix_json(e);
            }
            v
        }
        Some(q0) => {
            let split = invariants::nonelementary_split(&gens, &q0, config)?;
            let form = invariants::group_invariant_form(&gens, &q0, config)?;
            json!({
                "form": form_json(&form),
                "signature": form.signature(),
                "a_space": subspace_json(&split.a_space),
                "b_space": subspace_json(&split.b_space),
                "witnesses": to_value(&split.witnesses),
            })
        }
    };
    Ok(render(&out))
}

/// Coefficient vectors in `[-R, R]^k`, nonzero, in order of increasing L1 norm.
fn lorentz_combination(basis: &[QMatrix]) -> Option<(Vec<Q>, QForm)> {
    let k = basis.len();
    if k == 0 || k > COMBO_MAX_BASIS {
        return None;
    }
    let side = (2 * COMBO_RANGE + 1) as usize;
    let mut combos: Vec<Vec<i64>> = (0..side.pow(k as u32))
        .map(|mut idx| {
            (0..k)
                .map(|_| {
                    let c = (idx % side) as i64 - COMBO_RANGE;
                    idx /= side;
                    c
                })
                .collect()
        })
        .filter(|c: &Vec<i64>| c.iter().any(|&x| x != 0))
        .collect();
    combos.sort_by_key(|c| (c.iter().map(|x| x.abs()).sum::<i64>(), c.clone()));
    let n = basis[0].rows();
    combos.into_iter().find_map(|c| {
        let m = basis
            .iter()
            .zip(&c)
            .fold(QMatrix::zeros(n, n), |acc, (b, &x)| acc.add(&b.scale(&q(x))));
        let f = QForm::new(m).ok()?;
        f.is_lorentz().then(|| (c.into_iter().map(q).collect(), f))
    })
}

pub fn flag(_: &Common, _: &Config, input: Value) -> Result<String, Failure> {
    let doc: MapDoc = parse(input)?;
    let lin = doc.linear()?;
    let out = match spectral::classify_linear(&lin)? {
        IsoType::Parabolic => {
            let f = normalform::parabolic_flag(&lin)?;
            let p = normalform::parabolic_parameter(&lin)?;
            json!({
                "type": IsoType::Parabolic,
                "m": f.m,
                "L1": subspace_json(&f.l1),
                "P2": subspace_json(&f.p2),
                "K3": subspace_json(&f.k3),
                "fixed": subspace_json(&f.fix),
                "t": fmt_q(&p.t),
                "basis": matrix_json(&p.basis),
            })
        }
        IsoType::Hyperbolic => {
            let h = normalform::hyperbolic_split(&lin)?;
            let mut v = to_value(&HyperbolicReport::from(&h));
            v["type"] = json!(IsoType::Hyperbolic);
            v
        }
        IsoType::Elliptic => return Err(Error::WrongClass("Elliptic has no flag".into()).into()),
    };
    Ok(render(&out))
}

pub fn stable(_: &Common, _: &Config, input: Value) -> Result<String, Failure> {
    let doc: MapDoc = parse(input)?;
    let s = dynamics::stable_bundles(&doc.lattice()?)?;
    let mut v = to_value(&s);
    if let Some(e) = &s.exact {
        v["SAS"] = subspace_json(&e.sas);
        v["AS"] = subspace_json(&e.as_space);
    }
    Ok(render(&v))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyDoc {
    #[serde(with = "serde_q::vec")]
    poly: Vec<Q>,
}

/// `{"poly": [c0, c1, …]}` (constant term first) is classified directly; a form
/// document with `--bound` scans the hyperbolic elements of the search.
pub fn salem_scan(common: &Common, config: &Config, input: Value) -> Result<String, Failure> {
    if input.get("poly").is_some() {
        let doc: PolyDoc = parse(input)?;
        let c = salem::classify_charpoly(&Poly::new(doc.poly))?;
        return Ok(render(&to_value(&c)));
    }
    let form: QForm = parse(input)?;
    let found = salem::salem_scan(&form, need_bound(common)?, config)?;
    let elements: Vec<Value> = found
        .iter()
        .map(|(a, c)| json!({"A": matrix_json(a.matrix()), "classification": to_value(c)}))
        .collect();
    Ok(render(&json!({"count": elements.len(), "elements": elements})))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrbitDoc {
    map: MapDoc,
    #[serde(default, with = "serde_q::vec")]
    x0: Vec<Q>,
}

const DEFAULT_STEPS: usize = 100;

/// CSV to the output; statistics JSON to `--stats` when given.
pub fn orbit(common: &Common, config: &Config, input: Value) -> Result<String, Failure> {
    let doc: OrbitDoc = parse(input)?;
    let f = doc.map.torus()?;
    let x0 = if doc.x0.is_empty() {
        TorusPoint::origin(f.linear().dim())
    } else {
        TorusPoint::new(doc.x0)
    };
    let orbit = dynamics::iterate_orbit(&f, &x0, common.steps.unwrap_or(DEFAULT_STEPS), config)?;
    if let Some(path) = &common.stats {
        crate::output::write_atomic(path, &render(&to_value(&orbit.stats))).map_err(|e| Failure {
            tag: "Io".into(),
            message: format!("{}: {e}", path.display()),
            code: 1,
        })?;
    }
    Ok(orbit.to_csv())
}

pub fn cone(_: &Common, config: &Config, input: Value) -> Result<String, Failure> {
    let g: LieAlgebraPresentation = parse(input)?;
    let d = liecone::has_open_precompact_cone(&g, config)?;
    Ok(render(&to_value(&d)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AmalgamDoc {
    #[serde(rename = "gX")]
    gx: QForm,
    #[serde(rename = "gY")]
    gy: QForm,
    #[serde(rename = "A", with = "serde_q::vec")]
    a: Vec<Q>,
    #[serde(rename = "B", with = "serde_q::vec")]
    b: Vec<Q>,
    #[serde(default, with = "opt_matrix")]
    phi: Option<Vec<Vec<Q>>>,
    #[serde(default, with = "opt_matrix")]
    psi: Option<Vec<Vec<Q>>>,
}

/// The amalgamated form; with `phi` and `psi`, also the independence check.
pub fn amalgam(_: &Common, _: &Config, input: Value) -> Result<String, Failure> {
    let doc: AmalgamDoc = parse(input)?;
    let frame = PointFrame::new(doc.gx, doc.gy, doc.a, doc.b)?;
    let m = amalgam::amalgamated_metric(&frame)?;
    let mut out = json!({
        "form": form_json(&m.form),
        "signature": m.form.signature(),
        "b_perp": json!(m.b_perp.iter().map(|r| strs(r)).collect::<Vec<_>>()),
    });
    match (doc.phi, doc.psi) {
        (Some(phi), Some(psi)) => {
            let r = amalgam::representative_independence_check(
                &frame,
                &QMatrix::from_rows(phi)?,
                &QMatrix::from_rows(psi)?,
            )?;
            out["independence"] = to_value(&r);
        }
        (None, None) => {}
        _ => return Err(Failure::input("\"phi\" and \"psi\" go together")),
    }
    Ok(render(&out))
}
