use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use iwlab_core::coeff::TruncatedLocalRing;
use iwlab_core::euler::{self, EulerInstance, InstanceJson, NormLift, TowerShape};
use iwlab_core::group::{ElemJson, GroupRingElem};
use iwlab_core::iwasawa::{self, ElementaryModule, Poly, PolyIdeal, PolyIdealJson, Specialized};
use iwlab_core::kolyvagin::{kolyvagin_d, PrimeFactor, SnProjector};
use iwlab_core::module::{self, base_change, BaseDescriptor, FPModule, ModuleJson, RingMap};
use iwlab_core::suites::{all_suites, find_suite, SuiteReport};

use crate::{EulerCommand, Global, IdealCommand, Outcome};

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        let mut msg = e.to_string();
        if let Some(at) = msg.rfind(" at line ") {
            msg.truncate(at);
        }
        let what = if e.is_data() { "invalid input" } else { "malformed JSON" };
        anyhow!("{what} in {} at line {}, column {}: {msg}", path.display(), e.line(), e.column())
    })
}

fn ok(json: Value, text: String) -> Result<Outcome> {
    Ok(Outcome { json, text, violation: false })
}

fn list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

fn ideal_text(gens: &[GroupRingElem]) -> String {
    if gens.is_empty() {
        "(0)".into()
    } else {
        format!("({})", list(gens))
    }
}

fn read_module(path: &Path) -> Result<FPModule> {
    Ok(FPModule::from_json(&read_json::<ModuleJson>(path)?)?)
}

pub fn fitt(g: &Global, input: &Path, i: usize) -> Result<Outcome> {
    let mut m = read_module(input)?;
    if let Some(k) = g.precision {
        m = base_change(&m, &RingMap::Precision(m.base().with_precision(k)?))?;
    }
    let ideal = module::fitting_ideal(&m, i);
    let text = format!("Fitt_{i} = {}", ideal_text(&ideal.canonical_gens()));
    ok(json!({ "i": i, "ideal": ideal.to_json() }), text)
}

/// An entry is a bare integer or a group-ring element.
#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Int(i64),
    Elem(ElemJson),
}

#[derive(Deserialize)]
struct MatrixJson {
    base: BaseDescriptor,
    rows: Vec<Vec<Entry>>,
}

pub fn howell(input: &Path) -> Result<Outcome> {
    let mj: MatrixJson = read_json(input)?;
    let base = mj.base.build()?;
    let ncols = mj.rows.first().map_or(0, Vec::len);
    if mj.rows.iter().any(|r| r.len() != ncols) {
        bail!("matrix rows have different lengths");
    }
    let rows = mj
        .rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|e| match e {
                    Entry::Int(n) => Ok(base.int(*n)),
                    Entry::Elem(x) => GroupRingElem::from_json(&base, x),
                })
                .collect::<iwlab_core::Result<Vec<_>>>()
        })
        .collect::<iwlab_core::Result<Vec<_>>>()?;
    let h = module::r_span(&base, ncols, &rows);
    let text = h.rows().iter().map(|r| format!("{r:?}")).collect::<Vec<_>>().join("\n");
    ok(json!({ "howell": h.to_json(), "log_size": h.log_size() }), text)
}

pub fn bidual(g: &Global, input: &Path, i: usize) -> Result<Outcome> {
    let m = read_module(input)?;
    let bd = module::bidual_cap(&m, i)?;
    let mut report = json!({
        "i": i,
        "bidual": bd.module().to_json(),
        "abelian_invariants": bd.module().abelian_invariants(),
        "xi_injective": bd.injective,
        "xi_surjective": bd.surjective,
    });
    let mut text = format!(
        "∩^{i} M has invariants {:?}; ξ injective {}, surjective {}",
        bd.module().abelian_invariants(),
        bd.injective,
        bd.surjective
    );
    let mut violation = false;
    if let Some(nu) = g.precision {
        let r = module::bidual_reduction_check(&m, nu, i)?;
        violation = !r.isomorphic();
        text += &format!(
            "\nmod p^{nu}: isomorphic {}, natural map an isomorphism {}",
            r.isomorphic(),
            r.natural_isomorphism()
        );
        report["reduction"] = json!({
            "precision": nu,
            "isomorphic": r.isomorphic(),
            "natural_isomorphism": r.natural_isomorphism(),
            "details": r,
        });
    }
    Ok(Outcome { json: report, text, violation })
}

#[derive(Deserialize)]
struct FactorJson {
    factor: usize,
    /// Exponent vector of the chosen generator.
    sigma: Vec<i64>,
}

#[derive(Deserialize)]
struct KolyvaginJson {
    base: BaseDescriptor,
    primes: Vec<FactorJson>,
    #[serde(default)]
    element: Option<ElemJson>,
}

pub fn kolyvagin(input: &Path) -> Result<Outcome> {
    let kj: KolyvaginJson = read_json(input)?;
    let base = kj.base.build()?;
    let primes = kj
        .primes
        .iter()
        .map(|f| Ok(PrimeFactor { factor: f.factor, sigma: base.group().index_of(&f.sigma)? }))
        .collect::<iwlab_core::Result<Vec<_>>>()?;
    let d = kolyvagin_d(&base, &primes)?;
    let mut report = json!({ "d_n": d.to_json() });
    let mut text = format!("D_n = {d}");
    if let Some(x) = &kj.element {
        let mut sigmas = vec![usize::MAX; base.group().rank()];
        for pf in &primes {
            sigmas[pf.factor] = pf.sigma;
        }
        if sigmas.contains(&usize::MAX) {
            bail!("s_n needs a generator for every cyclic factor");
        }
        let sn = SnProjector::new(&base, &sigmas)?;
        let image = sn.canonical(&sn.apply(&GroupRingElem::from_json(&base, x)?)?);
        text += &format!("\ns_n(x) = {image}");
        report["s_n"] = json!({ "image": image.to_json() });
    }
    ok(report, text)
}

fn read_instance(path: &Path) -> Result<EulerInstance> {
    Ok(EulerInstance::from_json(&read_json::<InstanceJson>(path)?)?)
}

fn layer_or_top(inst: &EulerInstance, layer: Option<Vec<u32>>) -> Vec<u32> {
    layer.unwrap_or_else(|| inst.tower.top_layer())
}

fn precision_for(g: &Global, inst: &EulerInstance) -> u32 {
    g.precision.unwrap_or_else(|| inst.tower.ring().precision())
}

pub fn euler(g: &Global, cmd: EulerCommand) -> Result<Outcome> {
    match cmd {
        EulerCommand::Gen { p, delta, gamma, primes } => {
            let mut shape = TowerShape::new(p, g.precision.unwrap_or(1), gamma, primes);
            shape.delta = delta;
            let inst = euler::seeded_instance(&shape, g.seed)?;
            let text = format!("{} classes over {} layers", inst.classes.len(), inst.tower.layers().len());
            ok(serde_json::to_value(inst.to_json())?, text)
        }
        EulerCommand::Check { input } => {
            let inst = read_instance(&input)?;
            let rep = euler::check_axioms(&inst)?;
            let mut text = format!("{} edges, {} violations", rep.edges, rep.violations.len());
            for v in &rep.violations {
                text += &format!("\n{}: {}", serde_json::to_string(&v.edge)?, v.reason);
            }
            Ok(Outcome { json: serde_json::to_value(&rep)?, text, violation: !rep.passed() })
        }
        EulerCommand::Derive { input, layer, n } => {
            let inst = read_instance(&input)?;
            let layer = layer_or_top(&inst, layer);
            let idx = n.iter().map(|l| inst.tower.prime_index(l)).collect::<iwlab_core::Result<Vec<_>>>()?;
            let k = euler::derive(&inst, &layer, &idx, precision_for(g, &inst), &NormLift::Plain)?;
            let text = format!("κ({}) at layer {:?} = {}", list(&k.n), k.layer, k.coords);
            ok(
                json!({
                    "layer": k.layer,
                    "n": k.n,
                    "precision": k.precision,
                    "value": k.value.to_json(),
                    "coords": k.coords.to_json(),
                    "sigmas": k.sigmas,
                    "cross_checked": k.cross_checked,
                }),
                text,
            )
        }
        EulerCommand::Ideals { input, layer, i } => {
            let inst = read_instance(&input)?;
            let layer = layer_or_top(&inst, layer);
            let prec = precision_for(g, &inst);
            let range = match i {
                Some(i) => i..=i,
                None => 0..=inst.tower.primes().len(),
            };
            let mut out = Vec::new();
            let mut text = Vec::new();
            for i in range {
                let c = euler::c_ideal(&inst, &layer, prec, i)?;
                let moduli: Vec<Vec<String>> = c.moduli.iter().map(|m| inst.tower.labels(m)).collect();
                text.push(format!("C_{i} = {}", ideal_text(&c.ideal.canonical_gens())));
                out.push(json!({ "i": i, "ideal": c.ideal.to_json(), "moduli": moduli }));
            }
            ok(json!({ "layer": layer, "precision": prec, "ideals": out }), text.join("\n"))
        }
        EulerCommand::Compat { input, factor, unit, layer, i } => {
            let inst = read_instance(&input)?;
            let layer = layer_or_top(&inst, layer);
            let u = inst.tower.ring().from_int(unit);
            let rep = euler::specialization_compat_check(&inst, factor, &u, &layer, precision_for(g, &inst), i)?;
            let text = rep
                .cases
                .iter()
                .map(|c| format!("i={} contained {} equal {:?}", c.i, c.contained, c.equal))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Outcome { json: serde_json::to_value(&rep)?, text, violation: !rep.passed() })
        }
    }
}

#[derive(Deserialize)]
struct PairJson {
    left: PolyIdealJson,
    right: PolyIdealJson,
}

#[derive(Deserialize)]
struct SlopeJson {
    p: u64,
    #[serde(rename = "N")]
    precision: u32,
    /// Coefficients, lowest degree first.
    divisors: Vec<Vec<i64>>,
    prime: Vec<i64>,
}

fn specialized_json(s: &Specialized) -> Value {
    json!({ "survivor": s.survivor, "ideal": s.ideal.to_json() })
}

pub fn ideal(cmd: IdealCommand) -> Result<Outcome> {
    match cmd {
        IdealCommand::Compare { input } => {
            let pair: PairJson = read_json(&input)?;
            let (l, r) = (PolyIdeal::from_json(&pair.left)?, PolyIdeal::from_json(&pair.right)?);
            let fwd = iwasawa::precedes(&l, &r)?;
            let back = iwasawa::precedes(&r, &l)?;
            let text = format!("left ≺ right: {}\nright ≺ left: {}\nequivalent: {}", fwd.holds, back.holds, fwd.holds && back.holds);
            ok(
                json!({
                    "left_precedes_right": fwd,
                    "right_precedes_left": back,
                    "equivalent": fwd.holds && back.holds,
                }),
                text,
            )
        }
        IdealCommand::Specialize { input, a1, a2, unit } => {
            let i = PolyIdeal::from_json(&read_json(&input)?)?;
            let s = iwasawa::specialize(&i, a1, a2, &i.ring().from_int(unit))?;
            let text = format!("{:?} survives; {} generators", s.survivor, s.ideal.to_json().gens.len());
            ok(specialized_json(&s), text)
        }
        IdealCommand::Goodprime { input, max_abs, units } => {
            let pair: PairJson = read_json(&input)?;
            let (l, r) = (PolyIdeal::from_json(&pair.left)?, PolyIdeal::from_json(&pair.right)?);
            let units: Vec<_> = units.iter().map(|&u| l.ring().from_int(u)).collect();
            let found = iwasawa::find_good_specialization(&l, &r, max_abs, &units)?;
            let heights = [found.left.ideal.height_at_least_two()?, found.right.ideal.height_at_least_two()?];
            let c = &found.found;
            let text = format!("(a1, a2, u) = ({}, {}, {:?}); {} rejected", c.a1, c.a2, c.u, found.rejected.len());
            ok(
                json!({
                    "found": found.found,
                    "rejected": found.rejected,
                    "left": specialized_json(&found.left),
                    "right": specialized_json(&found.right),
                    "height_at_least_two": heights,
                }),
                text,
            )
        }
        IdealCommand::Slope { input, i, n_max } => {
            let sj: SlopeJson = read_json(&input)?;
            let ring = TruncatedLocalRing::integers(sj.p, sj.precision)?;
            let divisors = sj.divisors.iter().map(|d| Poly::from_ints(&ring, d)).collect();
            let e = ElementaryModule::new(&ring, divisors)?;
            let rep = iwasawa::slope_check(&e, i, &Poly::from_ints(&ring, &sj.prime), n_max)?;
            let values: Vec<u32> = rep.values.iter().map(|v| v.1).collect();
            let text = format!("C(n) = {values:?}; ord = {}; slope {:?}", rep.valuation, rep.slope);
            ok(serde_json::to_value(&rep)?, text)
        }
    }
}

pub fn selftest(g: &Global, names: &[String]) -> Result<Outcome> {
    let suites = if names.is_empty() {
        all_suites()
    } else {
        names.iter().map(|n| find_suite(n).ok_or_else(|| anyhow!("unknown suite {n}"))).collect::<Result<Vec<_>>>()?
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(g.jobs.unwrap_or(0)).build()?;
    let reports: Vec<SuiteReport> = pool.install(|| suites.par_iter().map(|s| s.run(g.seed)).collect());
    let text = reports.iter().map(SuiteReport::text_line).collect::<Vec<_>>().join("\n");
    let violation = reports.iter().any(|r| !r.passed());
    Ok(Outcome { json: serde_json::to_value(&reports)?, text, violation })
}
