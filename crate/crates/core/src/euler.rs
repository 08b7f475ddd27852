//! Synthetic Euler-system towers over `R[G_top]`, `G_top = Δ × Γ × ∏ H_ℓ`.
//!
//! Cohomology at the layer `(F, n)` is modelled by the coinduced module:
//! classes are elements of `R[G_top]`, restriction is the identity and
//! corestriction is multiplication by a relative norm. A layer `F` is a
//! vector of levels, one per `Γ`-factor; `Γ_F` is generated by
//! `γ_j^{p^{f_j}}` and the class `c(F, n)` is fixed by
//! `Fix(F, n) = Γ_F × ∏_{ℓ ∤ n} H_ℓ`. `H^1(F)` is identified with
//! `R_F = R[Δ × Γ/Γ_F]` through `x = N_{Fix(F,1)} · y`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::coeff::{Ring, RingDescriptor, RingElem, TruncatedLocalRing};
use crate::error::{Error, Result};
use crate::group::{howell_solve, Base, Character, ElemJson, EvalHom, FinAbGroup, GroupHom, GroupRing, GroupRingElem};
use crate::kolyvagin::{kolyvagin_d, PrimeFactor};
use crate::module::{extend_scalars, hom_module, subsets, FPModule, IdealGens, RingMap};
use crate::zmod;

/// Levels of a layer, one per `Γ`-factor.
pub type Layer = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeData {
    pub label: String,
    /// `#H_ℓ`, a power of `p`.
    pub order: u64,
    /// `σ_ℓ` as an exponent of the standard generator of `H_ℓ`.
    pub sigma: u64,
    /// Exponents of `Fr_ℓ` over all factors of `G_top`.
    pub frobenius: Vec<i64>,
    pub norm: RingElem,
    pub rho: RingElem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeJson {
    pub label: String,
    pub order: u64,
    #[serde(default = "one_u64")]
    pub sigma: u64,
    pub frobenius: Vec<i64>,
    pub norm: Vec<i64>,
    pub rho: Vec<i64>,
}

fn one_u64() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerJson {
    pub ring: RingDescriptor,
    #[serde(default)]
    pub delta: Vec<u64>,
    #[serde(default)]
    pub psi: Vec<u64>,
    #[serde(default)]
    pub gamma: Vec<u64>,
    #[serde(default)]
    pub primes: Vec<PrimeJson>,
}

#[derive(Debug, Clone)]
pub struct TowerSpec {
    ring: Ring,
    delta: FinAbGroup,
    psi: Vec<u64>,
    character: Option<Character>,
    gamma: Vec<u64>,
    primes: Vec<PrimeData>,
    base: Base,
}

fn log_p(p: u64, mut m: u64) -> Option<u32> {
    let mut k = 0;
    while m > 1 {
        if !m.is_multiple_of(p) {
            return None;
        }
        m /= p;
        k += 1;
    }
    Some(k)
}

impl TowerSpec {
    pub fn new(
        ring: &Ring,
        delta: FinAbGroup,
        psi: Vec<u64>,
        gamma: Vec<u64>,
        primes: Vec<PrimeData>,
    ) -> Result<Self> {
        let p = ring.p();
        if (delta.order() as u64).is_multiple_of(p) {
            return Err(Error::OrderDivisibleByP(delta.order() as u64));
        }
        for &g in &gamma {
            if log_p(p, g).is_none() {
                return Err(Error::InvalidGroup(format!("Γ-factor of order {g} is not a power of {p}")));
            }
        }
        let character = if delta.order() > 1 {
            let ks = if psi.is_empty() { vec![0; delta.rank()] } else { psi.clone() };
            Some(Character::from_exponents(ring, &delta, &ks)?)
        } else {
            None
        };
        let mut orders: Vec<u64> = delta.cyclic_orders().to_vec();
        orders.extend(&gamma);
        orders.extend(primes.iter().map(|l| l.order));
        let group = FinAbGroup::new(orders)?;
        let rank = group.rank();
        let first_h = delta.rank() + gamma.len();
        for (idx, l) in primes.iter().enumerate() {
            if l.order < p || log_p(p, l.order).is_none() {
                return Err(Error::InvalidGroup(format!("#H for {} must be a power of {p} above 1", l.label)));
            }
            if l.sigma % p == 0 {
                return Err(Error::NonGenerator(format!("σ exponent {} for {}", l.sigma, l.label)));
            }
            if l.frobenius.len() != rank {
                return Err(Error::DimensionMismatch(format!(
                    "Frobenius of {} has {} exponents, G_top has {rank} factors",
                    l.label,
                    l.frobenius.len()
                )));
            }
            if l.frobenius[first_h + idx].rem_euclid(l.order as i64) != 0 {
                return Err(Error::InvalidGroup(format!("Frobenius of {} involves its own inertia group", l.label)));
            }
            if l.norm.ring() != ring || l.rho.ring() != ring || !l.norm.is_unit() || !l.rho.is_unit() {
                return Err(Error::NonUnit(0));
            }
            if primes[..idx].iter().any(|o| o.label == l.label) {
                return Err(Error::Input(format!("prime label {} used twice", l.label)));
            }
        }
        let base = GroupRing::new(Arc::clone(ring), group);
        Ok(TowerSpec { ring: Arc::clone(ring), delta, psi, character, gamma, primes, base })
    }

    pub fn from_json(json: &TowerJson) -> Result<Self> {
        let ring = TruncatedLocalRing::from_descriptor(&json.ring)?;
        let delta = FinAbGroup::new(json.delta.clone())?;
        let primes = json
            .primes
            .iter()
            .map(|l| {
                Ok(PrimeData {
                    label: l.label.clone(),
                    order: l.order,
                    sigma: l.sigma,
                    frobenius: l.frobenius.clone(),
                    norm: ring.from_signed(&l.norm)?,
                    rho: ring.from_signed(&l.rho)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&ring, delta, json.psi.clone(), json.gamma.clone(), primes)
    }

    pub fn to_json(&self) -> TowerJson {
        TowerJson {
            ring: self.ring.descriptor(),
            delta: self.delta.cyclic_orders().to_vec(),
            psi: self.psi.clone(),
            gamma: self.gamma.clone(),
            primes: self
                .primes
                .iter()
                .map(|l| PrimeJson {
                    label: l.label.clone(),
                    order: l.order,
                    sigma: l.sigma,
                    frobenius: l.frobenius.clone(),
                    norm: l.norm.to_json_coords(),
                    rho: l.rho.to_json_coords(),
                })
                .collect(),
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn base(&self) -> &Base {
        &self.base
    }

    pub fn delta(&self) -> &FinAbGroup {
        &self.delta
    }

    pub fn character(&self) -> Option<&Character> {
        self.character.as_ref()
    }

    pub fn gamma(&self) -> &[u64] {
        &self.gamma
    }

    pub fn primes(&self) -> &[PrimeData] {
        &self.primes
    }

    pub fn gamma_factor(&self, j: usize) -> usize {
        self.delta.rank() + j
    }

    pub fn h_factor(&self, l: usize) -> usize {
        self.delta.rank() + self.gamma.len() + l
    }

    fn element(&self, exps: &[i64]) -> usize {
        self.base.group().index_of(exps).expect("exponent vector of the right length")
    }

    fn unit_vector(&self, factor: usize, e: i64) -> usize {
        let mut exps = vec![0; self.base.group().rank()];
        exps[factor] = e;
        self.element(&exps)
    }

    pub fn sigma(&self, l: usize) -> usize {
        self.unit_vector(self.h_factor(l), self.primes[l].sigma as i64)
    }

    pub fn frobenius(&self, l: usize) -> usize {
        self.element(&self.primes[l].frobenius)
    }

    pub fn labels(&self, n: &[usize]) -> Vec<String> {
        n.iter().map(|&l| self.primes[l].label.clone()).collect()
    }

    pub fn prime_index(&self, label: &str) -> Result<usize> {
        self.primes
            .iter()
            .position(|l| l.label == label)
            .ok_or_else(|| Error::Input(format!("unknown prime {label}")))
    }

    pub fn max_level(&self, j: usize) -> u32 {
        log_p(self.ring.p(), self.gamma[j]).unwrap_or(0)
    }

    pub fn top_layer(&self) -> Layer {
        (0..self.gamma.len()).map(|j| self.max_level(j)).collect()
    }

    /// All layers, lexicographically.
    pub fn layers(&self) -> Vec<Layer> {
        let mut out = vec![Vec::new()];
        for j in 0..self.gamma.len() {
            out = out
                .into_iter()
                .flat_map(|l: Layer| {
                    (0..=self.max_level(j)).map(move |f| {
                        let mut l2 = l.clone();
                        l2.push(f);
                        l2
                    })
                })
                .collect();
        }
        out
    }

    fn check_layer(&self, layer: &[u32]) -> Result<()> {
        if layer.len() != self.gamma.len() || layer.iter().enumerate().any(|(j, &f)| f > self.max_level(j)) {
            return Err(Error::Input(format!("layer {layer:?} is not in the tower")));
        }
        Ok(())
    }

    /// `I_ℓ ⊆ π^N O` and `#H_ℓ ≡ 0 mod π^N`.
    pub fn admissible(&self, l: usize, precision: u32) -> Result<()> {
        let d = &self.primes[l];
        let one = self.ring.one();
        let reason = if (&d.norm - &one).valuation() < precision {
            Some("N(l) - 1 is not divisible by π^N")
        } else if (&(&d.norm.inv_unit()? * &d.rho) - &one).valuation() < precision {
            Some("N(l)^-1 ρ(Fr) - 1 is not divisible by π^N")
        } else if self.ring.from_int(d.order as i64).valuation() < precision {
            Some("#H is not divisible by π^N")
        } else {
            None
        };
        match reason {
            Some(r) => Err(Error::InadmissiblePrime(d.label.clone(), r.into())),
            None => Ok(()),
        }
    }

    /// `Fr_ℓ` is trivial on `Δ` and lies in `Γ_F` on the `Γ`-part.
    pub fn splits_in(&self, l: usize, layer: &[u32]) -> bool {
        let fr = &self.primes[l].frobenius;
        let p = self.ring.p() as i64;
        let dr = self.delta.rank();
        fr[..dr].iter().zip(self.delta.cyclic_orders()).all(|(&e, &m)| e.rem_euclid(m as i64) == 0)
            && layer.iter().enumerate().all(|(j, &f)| fr[dr + j].rem_euclid(p.pow(f)) == 0)
    }

    /// Each prime's Frobenius is trivial on the inertia groups of the
    /// primes before it (tower order).
    pub fn well_ordered(&self, n: &[usize]) -> bool {
        let mut sorted = n.to_vec();
        sorted.sort_unstable();
        sorted.iter().enumerate().all(|(i, &l)| {
            sorted[..i].iter().all(|&k| {
                self.primes[l].frobenius[self.h_factor(k)].rem_euclid(self.primes[k].order as i64) == 0
            })
        })
    }

    /// `P_ℓ = 1 - N(ℓ)^{-1} ρ(Fr_ℓ) Fr_ℓ^{-1}`.
    pub fn euler_factor(&self, l: usize) -> Result<GroupRingElem> {
        let d = &self.primes[l];
        let c = &d.norm.inv_unit()? * &d.rho;
        let g = self.base.group().inv(self.frobenius(l));
        Ok(&self.base.one() - &self.base.group_elem(g).scale(&c))
    }

    /// Generators of `Fix(F, n)`.
    pub fn fix_generators(&self, layer: &[u32], n: &[usize]) -> Vec<usize> {
        let p = self.ring.p() as i64;
        let mut gens: Vec<usize> =
            layer.iter().enumerate().map(|(j, &f)| self.unit_vector(self.gamma_factor(j), p.pow(f))).collect();
        gens.extend((0..self.primes.len()).filter(|l| !n.contains(l)).map(|l| self.sigma(l)));
        gens
    }

    /// `Σ` over representatives of `Γ_lo / Γ_hi` (`lo ≤ hi` levelwise).
    pub fn corestriction(&self, hi: &[u32], lo: &[u32]) -> Result<GroupRingElem> {
        let p = self.ring.p() as i64;
        let mut acc = self.base.one();
        for j in 0..self.gamma.len() {
            if lo[j] > hi[j] {
                return Err(Error::Input(format!("layer {lo:?} does not lie below {hi:?}")));
            }
            let mut s = self.base.zero();
            for k in 0..p.pow(hi[j] - lo[j]) {
                s = &s + &self.base.group_elem(self.unit_vector(self.gamma_factor(j), p.pow(lo[j]) * k));
            }
            acc = &acc * &s;
        }
        Ok(acc)
    }

    /// `R_{F,N} = O/π^N [Δ × Γ/Γ_F]`.
    pub fn layer_base(&self, layer: &[u32], precision: u32) -> Result<Base> {
        let p = self.ring.p();
        let mut orders = self.delta.cyclic_orders().to_vec();
        orders.extend(layer.iter().map(|&f| p.pow(f)));
        Ok(GroupRing::new(self.ring.with_precision(precision)?, FinAbGroup::new(orders)?))
    }

    /// `G_top` index of the coset representative of an element of `Δ × Γ/Γ_F`.
    fn representative(&self, layer_group: &FinAbGroup, idx: usize) -> usize {
        let mut exps: Vec<i64> = layer_group.exponents(idx).iter().map(|&e| e as i64).collect();
        exps.resize(self.base.group().rank(), 0);
        self.element(&exps)
    }

    /// The same tower with one more prime appended (and a zero exponent for
    /// its inertia group in every existing Frobenius).
    pub fn padded(&self, extra: PrimeData) -> Result<Self> {
        let mut primes = self.primes.clone();
        for l in primes.iter_mut() {
            l.frobenius.push(0);
        }
        primes.push(extra);
        Self::new(&self.ring, self.delta.clone(), self.psi.clone(), self.gamma.clone(), primes)
    }

    /// Embed an element of `R[G_top]` into the padded tower's group ring.
    pub fn embed_into_padded(&self, x: &GroupRingElem, padded: &TowerSpec) -> Result<GroupRingElem> {
        let g = self.base.group();
        let images: Vec<usize> = (0..g.rank()).map(|j| padded.base.group().generator(j)).collect();
        let src = GroupRing::new(Arc::clone(x.ring()), g.clone());
        let dst = GroupRing::new(Arc::clone(x.ring()), padded.base.group().clone());
        let x = x.reduce_into(&src)?;
        GroupHom::new(&src, &dst, images)?.apply(&x)
    }

    /// The same tower over an unramified extension `O'` of `O = Z/p^N`.
    pub fn extend_scalars(&self, target: &Ring) -> Result<Self> {
        let lift = |e: &RingElem| -> Result<RingElem> {
            if e.ring().degree() != 1 || target.p() != self.ring.p() || target.precision() != self.ring.precision() {
                return Err(Error::IncompatibleMap("scalar extension needs Z/p^N -> O'/p^N".into()));
            }
            Ok(target.from_int(e.coeffs()[0] as i64))
        };
        let primes = self
            .primes
            .iter()
            .map(|l| Ok(PrimeData { norm: lift(&l.norm)?, rho: lift(&l.rho)?, ..l.clone() }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(target, self.delta.clone(), self.psi.clone(), self.gamma.clone(), primes)
    }
}

// ---- instances -------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Universal,
    UserSupplied,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassKey {
    pub layer: Layer,
    /// Sorted prime indices.
    pub n: Vec<usize>,
}

impl ClassKey {
    pub fn new(layer: Layer, mut n: Vec<usize>) -> Self {
        n.sort_unstable();
        ClassKey { layer, n }
    }
}

#[derive(Debug, Clone)]
pub struct EulerInstance {
    pub tower: TowerSpec,
    pub seed: GroupRingElem,
    pub classes: BTreeMap<ClassKey, GroupRingElem>,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassJson {
    pub layer: Layer,
    pub n: Vec<String>,
    pub value: ElemJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub tower: TowerJson,
    pub seed: ElemJson,
    pub classes: Vec<ClassJson>,
    pub model: Model,
}

fn all_moduli(r: usize) -> Vec<Vec<usize>> {
    (0..=r).flat_map(|k| subsets(r, k)).collect()
}

/// `c(F, n) = N_{Fix(F,n)} · ∏_{ℓ | n} P_ℓ · u` for every layer and every
/// squarefree `n`.
pub fn generate_universal(tower: &TowerSpec, seed: &GroupRingElem) -> Result<EulerInstance> {
    let base = tower.base();
    if !GroupRing::same(base, seed.base()) {
        return Err(Error::GroupMismatch);
    }
    let mut factors = Vec::new();
    for l in 0..tower.primes.len() {
        tower.admissible(l, tower.ring.precision())?;
        let pl = tower.euler_factor(l)?;
        if pl.is_zero() {
            return Err(Error::InadmissiblePrime(tower.primes[l].label.clone(), "Euler factor vanishes".into()));
        }
        factors.push(pl);
    }
    let mut classes = BTreeMap::new();
    for n in all_moduli(tower.primes.len()) {
        let v = n.iter().fold(seed.clone(), |acc, &l| &acc * &factors[l]);
        for layer in tower.layers() {
            let norm = base.norm_element(&tower.fix_generators(&layer, &n))?;
            classes.insert(ClassKey::new(layer, n.clone()), &norm * &v);
        }
    }
    Ok(EulerInstance { tower: tower.clone(), seed: seed.clone(), classes, model: Model::Universal })
}

impl EulerInstance {
    pub fn from_json(json: &InstanceJson) -> Result<Self> {
        let tower = TowerSpec::from_json(&json.tower)?;
        let seed = GroupRingElem::from_json(tower.base(), &json.seed)?;
        let mut classes = BTreeMap::new();
        for c in &json.classes {
            tower.check_layer(&c.layer)?;
            let n = c.n.iter().map(|s| tower.prime_index(s)).collect::<Result<Vec<_>>>()?;
            let key = ClassKey::new(c.layer.clone(), n);
            if classes.insert(key, GroupRingElem::from_json(tower.base(), &c.value)?).is_some() {
                return Err(Error::Input(format!("class for layer {:?}, n {:?} given twice", c.layer, c.n)));
            }
        }
        Ok(EulerInstance { tower, seed, classes, model: json.model })
    }

    pub fn to_json(&self) -> InstanceJson {
        InstanceJson {
            tower: self.tower.to_json(),
            seed: self.seed.to_json(),
            classes: self
                .classes
                .iter()
                .map(|(k, v)| ClassJson { layer: k.layer.clone(), n: self.tower.labels(&k.n), value: v.to_json() })
                .collect(),
            model: self.model,
        }
    }

    pub fn class(&self, layer: &[u32], n: &[usize]) -> Result<&GroupRingElem> {
        let key = ClassKey::new(layer.to_vec(), n.to_vec());
        self.classes
            .get(&key)
            .ok_or_else(|| Error::Input(format!("no class at layer {layer:?}, n {:?}", self.tower.labels(n))))
    }

    /// Copy with `1` added to one coordinate of one class.
    pub fn corrupted(&self, key: &ClassKey, g: usize) -> Result<EulerInstance> {
        let mut out = self.clone();
        out.model = Model::UserSupplied;
        let c = out.classes.get_mut(key).ok_or_else(|| Error::Input("no such class".into()))?;
        let bump = self.tower.base.group_elem(g);
        *c = &*c + &bump;
        Ok(out)
    }
}

// ---- axioms ----------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Edge {
    /// `Cor_{upper → lower} c(upper, n) = c(lower, n)`.
    Layer { lower: Layer, upper: Layer, n: Vec<String> },
    /// `N_{H_ℓ} c(F, nℓ) = P_ℓ c(F, n)`.
    Prime { layer: Layer, n: Vec<String>, prime: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub edge: Edge,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub edges: usize,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn edges_of(tower: &TowerSpec) -> Vec<(Edge, ClassKey, ClassKey)> {
    let mut out = Vec::new();
    let r = tower.primes.len();
    for n in all_moduli(r) {
        for layer in tower.layers() {
            for j in 0..layer.len() {
                if layer[j] < tower.max_level(j) {
                    let mut upper = layer.clone();
                    upper[j] += 1;
                    out.push((
                        Edge::Layer { lower: layer.clone(), upper: upper.clone(), n: tower.labels(&n) },
                        ClassKey::new(upper, n.clone()),
                        ClassKey::new(layer.clone(), n.clone()),
                    ));
                }
            }
            for l in (0..r).filter(|l| !n.contains(l)) {
                let mut nl = n.clone();
                nl.push(l);
                out.push((
                    Edge::Prime { layer: layer.clone(), n: tower.labels(&n), prime: tower.primes[l].label.clone() },
                    ClassKey::new(layer.clone(), nl),
                    ClassKey::new(layer.clone(), n.clone()),
                ));
            }
        }
    }
    out
}

/// ES1 on covering layers and ES2 on every `n → nℓ`, edge by edge.
pub fn check_axioms(inst: &EulerInstance) -> Result<AxiomReport> {
    let tower = &inst.tower;
    let base = tower.base();
    let mut violations = Vec::new();
    let mut factors = Vec::new();
    for l in 0..tower.primes.len() {
        factors.push(tower.euler_factor(l)?);
    }
    let edges = edges_of(tower);
    for (edge, upper, lower) in &edges {
        let (Some(cu), Some(cl)) = (inst.classes.get(upper), inst.classes.get(lower)) else {
            violations.push(Violation { edge: edge.clone(), reason: "missing class".into() });
            continue;
        };
        let (lhs, rhs) = match edge {
            Edge::Layer { .. } => (&tower.corestriction(&upper.layer, &lower.layer)? * cu, cl.clone()),
            Edge::Prime { prime, .. } => {
                let l = tower.prime_index(prime)?;
                let nh = base.norm_element(&[tower.sigma(l)])?;
                (&nh * cu, &factors[l] * cl)
            }
        };
        if lhs != rhs {
            violations.push(Violation { edge: edge.clone(), reason: "identity fails".into() });
        }
    }
    violations.sort_by(|a, b| a.edge.cmp(&b.edge));
    Ok(AxiomReport { edges: edges.len(), violations })
}

/// Edges whose identity involves the class at `key`.
pub fn incident_edges(tower: &TowerSpec, key: &ClassKey) -> Vec<Edge> {
    let mut out: Vec<Edge> =
        edges_of(tower).into_iter().filter(|(_, u, l)| u == key || l == key).map(|(e, _, _)| e).collect();
    out.sort();
    out
}

// ---- derivatives -----------------------------------------------------------------

/// Lift `Ñ_F = Σ_δ δ·h_δ` of the norm of `Δ`, with `h_δ ∈ H_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormLift {
    Plain,
    /// One `G_top` element of `H_n` per element of `Δ`.
    Shifted(Vec<usize>),
}

impl NormLift {
    /// A random lift inside `H_n`.
    pub fn random<R: Rng>(tower: &TowerSpec, n: &[usize], rng: &mut R) -> NormLift {
        let g = tower.base().group();
        let shifts = (0..tower.delta.order())
            .map(|_| {
                n.iter().fold(g.identity(), |acc, &l| {
                    let k = rng.gen_range(0..tower.primes[l].order) as i64;
                    g.op(acc, g.pow(tower.sigma(l), k))
                })
            })
            .collect();
        NormLift::Shifted(shifts)
    }

    fn element(&self, tower: &TowerSpec, base: &Base, n: &[usize]) -> Result<GroupRingElem> {
        let g = base.group();
        let h_n = g.subgroup(&n.iter().map(|&l| tower.sigma(l)).collect::<Vec<_>>())?;
        let mut acc = base.zero();
        for d in 0..tower.delta.order() {
            let delta = tower.representative(&tower.delta, d);
            let shift = match self {
                NormLift::Plain => g.identity(),
                NormLift::Shifted(s) => {
                    let h = *s.get(d).ok_or_else(|| Error::DimensionMismatch("one shift per element of Δ".into()))?;
                    if !h_n.contains(&h) {
                        return Err(Error::Input("norm lift leaves H_n".into()));
                    }
                    h
                }
            };
            acc = &acc + &base.group_elem(g.op(delta, shift));
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone)]
pub struct DerivedKappa {
    pub layer: Layer,
    pub n: Vec<String>,
    pub precision: u32,
    /// `Ñ_F D_n c(F, n)` mod `π^N`, fixed by `Fix(F, 1)`.
    pub value: GroupRingElem,
    /// The class in `R_{F,N}`: `value = N_{Fix(F,1)} · coords`.
    pub coords: GroupRingElem,
    /// `(label, σ exponent)` for every prime of `n`.
    pub sigmas: Vec<(String, u64)>,
    /// Whether the preimage was also confirmed by the general solver.
    pub cross_checked: bool,
}

const CROSS_CHECK_DIM: usize = 243;

pub fn derive(inst: &EulerInstance, layer: &[u32], n: &[usize], precision: u32, lift: &NormLift) -> Result<DerivedKappa> {
    let tower = &inst.tower;
    tower.check_layer(layer)?;
    if precision == 0 || precision > tower.ring.precision() {
        return Err(Error::BadPrecision { requested: precision, available: tower.ring.precision() });
    }
    let mut n = n.to_vec();
    n.sort_unstable();
    n.dedup();
    for &l in &n {
        if l >= tower.primes.len() {
            return Err(Error::Input(format!("prime index {l} out of range")));
        }
        tower.admissible(l, precision)?;
        if !tower.splits_in(l, layer) {
            return Err(Error::InadmissiblePrime(
                tower.primes[l].label.clone(),
                format!("Frobenius is not trivial in the layer {layer:?}"),
            ));
        }
    }
    let base = tower.base.with_precision(precision)?;
    let c = inst.class(layer, &n)?.reduce_into(&base)?;
    let pfs: Vec<PrimeFactor> =
        n.iter().map(|&l| PrimeFactor { factor: tower.h_factor(l), sigma: tower.sigma(l) }).collect();
    let d = kolyvagin_d(&base, &pfs)?;
    let x = &(&lift.element(tower, &base, &n)? * &d) * &c;
    for &l in &n {
        if !x.is_fixed_by(tower.sigma(l)) {
            return Err(Error::InvarianceFailure(tower.primes[l].label.clone()));
        }
    }
    let fix = tower.fix_generators(layer, &[]);
    if fix.iter().any(|&g| !x.is_fixed_by(g)) {
        return Err(Error::PreimageInconsistent);
    }
    // coordinates at coset representatives of Fix(F,1)
    let rf = tower.layer_base(layer, precision)?;
    let lg = rf.group().clone();
    let dd = base.ring().degree();
    let mut flat = vec![0; rf.dim()];
    let mut embedded = base.zero();
    for idx in 0..lg.order() {
        let rep = tower.representative(&lg, idx);
        let c = x.coeff(rep);
        flat[idx * dd..(idx + 1) * dd].copy_from_slice(c.coeffs());
        embedded = &embedded + &base.group_elem(rep).scale(&c);
    }
    let norm = base.norm_element(&fix)?;
    if &norm * &embedded != x {
        return Err(Error::PreimageInconsistent);
    }
    let cross_checked = base.dim() <= CROSS_CHECK_DIM;
    if cross_checked {
        let sol = howell_solve(&base, &[vec![norm.clone()]], std::slice::from_ref(&x))?;
        let ok = sol.solvable
            && sol.particular.as_ref().is_some_and(|p| {
                // the two preimages agree modulo the kernel of N_Fix
                let diff = &p[0] - &embedded;
                (&norm * &diff).is_zero()
            });
        if !ok {
            return Err(Error::InconsistentSystem("restriction preimage".into()));
        }
    }
    Ok(DerivedKappa {
        layer: layer.to_vec(),
        n: tower.labels(&n),
        precision,
        value: x,
        coords: rf.elem_from_flat(flat),
        sigmas: n.iter().map(|&l| (tower.primes[l].label.clone(), tower.primes[l].sigma)).collect(),
        cross_checked,
    })
}

/// `{ f(κ) : f ∈ Hom_{R_F}(H^1(F), R_F) }`.
pub fn kappa_ideal(inst: &EulerInstance, layer: &[u32], precision: u32, n: &[usize]) -> Result<IdealGens> {
    let kappa = derive(inst, layer, n, precision, &NormLift::Plain)?;
    let rf = Arc::clone(kappa.coords.base());
    let h1 = FPModule::free(&rf, 1);
    let hom = hom_module(&h1)?;
    let t = hom.functionals.len();
    let gens = (0..t)
        .map(|k| {
            let mut f = vec![rf.zero(); t];
            f[k] = rf.one();
            hom.evaluate(&f, std::slice::from_ref(&kappa.coords))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IdealGens::new(&rf, gens))
}

/// Moduli `n` that are well ordered, with every prime admissible at `(F, N)`.
pub fn admissible_moduli(tower: &TowerSpec, layer: &[u32], precision: u32, max_primes: usize) -> Vec<Vec<usize>> {
    let good: Vec<usize> = (0..tower.primes.len())
        .filter(|&l| tower.admissible(l, precision).is_ok() && tower.splits_in(l, layer))
        .collect();
    let mut out = Vec::new();
    for k in 0..=max_primes.min(good.len()) {
        for s in subsets(good.len(), k) {
            let n: Vec<usize> = s.iter().map(|&i| good[i]).collect();
            if tower.well_ordered(&n) {
                out.push(n);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CIdeal {
    pub ideal: IdealGens,
    pub moduli: Vec<Vec<usize>>,
}

/// `C_{i,F,N}`: sum of the `κ`-ideals over admissible well-ordered `n`
/// with at most `i` primes.
pub fn c_ideal(inst: &EulerInstance, layer: &[u32], precision: u32, i: usize) -> Result<CIdeal> {
    let tower = &inst.tower;
    tower.check_layer(layer)?;
    let rf = tower.layer_base(layer, precision)?;
    let moduli = admissible_moduli(tower, layer, precision, i);
    let mut ideal = IdealGens::zero(&rf);
    for n in &moduli {
        ideal = ideal.sum(&kappa_ideal(inst, layer, precision, n)?);
    }
    Ok(CIdeal { ideal, moduli })
}

/// Compare `C_i` over `O' = O[x]/(poly)` with `O'·C_i` over `O`.
pub fn scalar_extension_check(inst: &EulerInstance, layer: &[u32], precision: u32, i: usize, poly: &[i64]) -> Result<bool> {
    let ring = &inst.tower.ring;
    let ext = TruncatedLocalRing::new(ring.p(), ring.precision(), poly, false)?;
    let tower2 = inst.tower.extend_scalars(&ext)?;
    let seed2 = extend_scalars(&inst.seed, tower2.base())?;
    let inst2 = match inst.model {
        Model::Universal => generate_universal(&tower2, &seed2)?,
        Model::UserSupplied => {
            let classes = inst
                .classes
                .iter()
                .map(|(k, v)| Ok((k.clone(), extend_scalars(v, tower2.base())?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            EulerInstance { tower: tower2.clone(), seed: seed2, classes, model: Model::UserSupplied }
        }
    };
    let down = c_ideal(inst, layer, precision, i)?.ideal;
    let up = c_ideal(&inst2, layer, precision, i)?.ideal;
    let extended = down.map(&RingMap::Extend(Arc::clone(up.base())))?;
    Ok(extended == up)
}

// ---- lifting functionals ----------------------------------------------------------

/// `f(y) = value · y` on `H^1(F) ≅ R_{F,N}`.
#[derive(Debug, Clone)]
pub struct Functional {
    pub layer: Layer,
    pub precision: u32,
    pub value: GroupRingElem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftCase {
    /// Given `f_2` upstairs, find `f_1` with `f_1 ∘ Cor = pr ∘ f_2`.
    Descend,
    /// Given `g_1` downstairs, find `g_2` with `pr ∘ g_2 = g_1 ∘ Cor`.
    Ascend,
}

#[derive(Debug, Clone)]
pub struct Lift {
    pub functional: Functional,
    /// Commutation confirmed on every `R`-basis element of `H^1(F_2)`.
    pub verified: bool,
}

/// `R_{F2,N2} -> R_{F1,N1}`; in the coordinates of `H^1` this is also
/// the corestriction.
fn projection(tower: &TowerSpec, hi: (&[u32], u32), lo: (&[u32], u32)) -> Result<(Base, Base, Base, GroupHom)> {
    let src = tower.layer_base(hi.0, hi.1)?;
    let mid = tower.layer_base(hi.0, lo.1)?;
    let dst = tower.layer_base(lo.0, lo.1)?;
    let g = mid.group();
    let images = (0..g.rank()).map(|j| dst.group().generator(j)).collect();
    let hom = GroupHom::new(&mid, &dst, images)?;
    Ok((src, mid, dst, hom))
}

fn project(x: &GroupRingElem, mid: &Base, hom: &GroupHom) -> Result<GroupRingElem> {
    hom.apply(&x.reduce_into(mid)?)
}

pub fn lift_functional(
    tower: &TowerSpec,
    f: &Functional,
    target_layer: &[u32],
    target_precision: u32,
    case: LiftCase,
) -> Result<Lift> {
    tower.check_layer(&f.layer)?;
    tower.check_layer(target_layer)?;
    let ((l2, n2), (l1, n1)) = match case {
        LiftCase::Descend => ((&f.layer[..], f.precision), (target_layer, target_precision)),
        LiftCase::Ascend => ((target_layer, target_precision), (&f.layer[..], f.precision)),
    };
    if n1 > n2 || l1.iter().zip(l2).any(|(a, b)| a > b) {
        return Err(Error::Precondition("need F1 ⊆ F2 and N1 ≤ N2".into()));
    }
    let (r2, mid, r1, hom) = projection(tower, (l2, n2), (l1, n1))?;
    let basis2 = r2.basis();
    let value = match case {
        LiftCase::Descend => {
            let a = f.value.reduce_into(&r2)?;
            // b · pr(e_g) = pr(a · e_g) for all g, solved over R_{F1,N1}
            let rows: Vec<Vec<GroupRingElem>> =
                basis2.iter().map(|e| Ok(vec![project(e, &mid, &hom)?])).collect::<Result<_>>()?;
            let rhs: Vec<GroupRingElem> = basis2.iter().map(|e| project(&(&a * e), &mid, &hom)).collect::<Result<_>>()?;
            let sol = howell_solve(&r1, &rows, &rhs)?;
            let b = sol.particular.ok_or_else(|| Error::InconsistentSystem("descending functional".into()))?;
            b[0].clone()
        }
        LiftCase::Ascend => {
            let b = f.value.reduce_into(&r1)?;
            solve_projection_preimage(&r2, &mid, &r1, &hom, &b)?
        }
    };
    let verified = basis2.iter().all(|e| {
        let (lhs, rhs) = match case {
            LiftCase::Descend => (
                project(e, &mid, &hom).map(|pe| &value * &pe),
                project(&(&f.value.reduce_into(&r2).expect("checked") * e), &mid, &hom),
            ),
            LiftCase::Ascend => (
                project(&(&value * e), &mid, &hom),
                project(e, &mid, &hom).map(|pe| &f.value.reduce_into(&r1).expect("checked") * &pe),
            ),
        };
        matches!((lhs, rhs), (Ok(a), Ok(b)) if a == b)
    });
    let layer = match case {
        LiftCase::Descend => l1.to_vec(),
        LiftCase::Ascend => l2.to_vec(),
    };
    let precision = match case {
        LiftCase::Descend => n1,
        LiftCase::Ascend => n2,
    };
    Ok(Lift { functional: Functional { layer, precision, value }, verified })
}

/// Some `a ∈ R_{F2,N2}` with `pr(a) = b`, by linear algebra over `Z/p^{M2}`.
fn solve_projection_preimage(r2: &Base, mid: &Base, r1: &Base, hom: &GroupHom, b: &GroupRingElem) -> Result<GroupRingElem> {
    let m = r2.modulus();
    let basis2 = r2.basis();
    let ncols = r1.dim();
    let mut rows: Vec<Vec<u64>> =
        basis2.iter().map(|e| Ok(project(e, mid, hom)?.into_coeffs())).collect::<Result<_>>()?;
    let n_unknowns = rows.len();
    // equality downstairs only holds modulo the coordinate moduli of R_{F1,N1}
    let d = r1.ring().degree();
    for g in 0..r1.group().order() {
        for (k, &e) in r1.ring().coord_exp().iter().enumerate() {
            let mut row = vec![0; ncols];
            row[g * d + k] = m.pow_p(e);
            rows.push(row);
        }
    }
    let sol = zmod::solve_left(m, &rows, ncols, Some(b.coeffs()));
    let x = sol.solution.ok_or_else(|| Error::InconsistentSystem("ascending functional".into()))?;
    let mut acc = r2.zero();
    for (e, &c) in basis2.iter().zip(&x[..n_unknowns]) {
        acc = &acc + &e.scale(&r2.ring().from_int(c as i64));
    }
    Ok(acc)
}

// ---- specialization compatibility -------------------------------------------------

/// The instance with `Γ`-factor `j` collapsed by `γ_j ↦ u`: Frobenius
/// exponents lose that factor and `ρ'(Fr) = ρ(Fr) u^{-e_j(Fr)}`, so that the
/// twisted Euler factors are the images of the old ones.
pub fn twisted_tower(tower: &TowerSpec, j: usize, u: &RingElem) -> Result<TowerSpec> {
    let gf = tower.gamma_factor(j);
    let mut gamma = tower.gamma.clone();
    gamma.remove(j);
    let primes = tower
        .primes
        .iter()
        .map(|l| {
            let e = l.frobenius[gf];
            let mut frobenius = l.frobenius.clone();
            frobenius.remove(gf);
            Ok(PrimeData { rho: &l.rho * &u.pow_signed(-e)?, frobenius, ..l.clone() })
        })
        .collect::<Result<Vec<_>>>()?;
    TowerSpec::new(&tower.ring, tower.delta.clone(), tower.psi.clone(), gamma, primes)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompatCase {
    pub i: usize,
    pub contained: bool,
    /// Set when the admissible moduli agree above and below and `u = 1`.
    pub equal: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompatReport {
    pub factor: usize,
    pub unit: Vec<i64>,
    pub layer: Layer,
    pub cases: Vec<CompatCase>,
}

impl CompatReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.contained && c.equal != Some(false))
    }
}

/// `ev_u(C_i) ⊆ C_i(twist)` for `i ≤ i_max`, at the layer `F` and precision `N`.
pub fn specialization_compat_check(
    inst: &EulerInstance,
    j: usize,
    u: &RingElem,
    layer: &[u32],
    precision: u32,
    i_max: usize,
) -> Result<CompatReport> {
    let tower = &inst.tower;
    tower.check_layer(layer)?;
    if tower.gamma.is_empty() {
        let cases = (0..=i_max).map(|i| CompatCase { i, contained: true, equal: Some(true) }).collect();
        return Ok(CompatReport { factor: j, unit: u.to_json_coords(), layer: layer.to_vec(), cases });
    }
    if j >= tower.gamma.len() {
        return Err(Error::Input(format!("no Γ-factor {j}")));
    }
    let top_eval = EvalHom::new(tower.base(), tower.gamma_factor(j), u)?;
    let down_tower = twisted_tower(tower, j, u)?;
    let down = generate_universal(&down_tower, &top_eval.apply(&inst.seed)?)?;
    let mut down_layer = layer.to_vec();
    down_layer.remove(j);
    let rf = tower.layer_base(layer, precision)?;
    let eval = EvalHom::new(&rf, tower.delta.rank() + j, &u.reduce_precision(precision)?)?;
    let mut cases = Vec::new();
    for i in 0..=i_max {
        let up = c_ideal(inst, layer, precision, i)?;
        let dn = c_ideal(&down, &down_layer, precision, i)?;
        let image = up.ideal.map(&RingMap::Eval(eval.clone()))?;
        let contained = dn.ideal.contains_ideal(&image);
        let equal = (u.is_one() && up.moduli == dn.moduli).then(|| image == dn.ideal);
        cases.push(CompatCase { i, contained, equal });
    }
    Ok(CompatReport { factor: j, unit: u.to_json_coords(), layer: layer.to_vec(), cases })
}

// ---- random towers -----------------------------------------------------------------

/// Shape of a random tower.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerShape {
    pub p: u64,
    pub precision: u32,
    pub delta: Vec<u64>,
    pub gamma: Vec<u64>,
    pub prime_orders: Vec<u64>,
    /// Frobenius exponents on `Γ`-factor `j` are multiples of `gamma_step[j]`.
    pub gamma_step: Vec<i64>,
}

impl TowerShape {
    pub fn new(p: u64, precision: u32, gamma: Vec<u64>, prime_orders: Vec<u64>) -> Self {
        let gamma_step = vec![1; gamma.len()];
        TowerShape { p, precision, delta: Vec::new(), gamma, prime_orders, gamma_step }
    }
}

/// Random admissible tower: `N(ℓ) ≡ 1`, `N(ℓ)^{-1}ρ ≡ 1` mod `p^N`,
/// Frobenius trivial on `Δ` and on its own inertia group.
pub fn random_tower<R: Rng>(shape: &TowerShape, rng: &mut R) -> Result<TowerSpec> {
    let ring = TruncatedLocalRing::integers(shape.p, shape.precision)?;
    let delta = FinAbGroup::new(shape.delta.clone())?;
    let pn = (shape.p as i64).pow(shape.precision);
    let rank = delta.rank() + shape.gamma.len() + shape.prime_orders.len();
    let first_h = delta.rank() + shape.gamma.len();
    let step = |j: usize| shape.gamma_step.get(j).copied().unwrap_or(1).max(1);
    let gamma_room = shape.gamma.iter().enumerate().any(|(j, &g)| g as i64 / step(j) > 1);
    if shape.prime_orders.len() == 1 && !gamma_room {
        // N(ℓ)^{-1}ρ ≡ 1 at this precision, so Fr = 1 would kill the Euler factor
        return Err(Error::Precondition("no room for a nontrivial Frobenius".into()));
    }
    let mut primes = Vec::new();
    for (idx, &order) in shape.prime_orders.iter().enumerate() {
        let norm = ring.from_int(1 + pn * rng.gen_range(0..shape.p as i64));
        let rho = &norm * &ring.from_int(1 + pn * rng.gen_range(0..shape.p as i64));
        let frobenius = loop {
            let mut fr = vec![0i64; rank];
            for (j, &g) in shape.gamma.iter().enumerate() {
                fr[delta.rank() + j] = step(j) * rng.gen_range(0..(g as i64 / step(j)).max(1));
            }
            for (k, &o) in shape.prime_orders.iter().enumerate() {
                if k != idx {
                    fr[first_h + k] = rng.gen_range(0..o as i64);
                }
            }
            // P_ℓ vanishes only for Fr = 1 with trivial scalar
            if fr.iter().any(|&e| e != 0) || !(&norm.inv_unit()? * &rho).is_one() {
                break fr;
            }
        };
        let sigma = loop {
            let s = rng.gen_range(1..order);
            if s % shape.p != 0 {
                break s;
            }
        };
        primes.push(PrimeData { label: format!("l{}", idx + 1), order, sigma, frobenius, norm, rho });
    }
    TowerSpec::new(&ring, delta, Vec::new(), shape.gamma.clone(), primes)
}

/// Tower, seed and universal classes, all drawn from one 64-bit seed.
pub fn seeded_instance(shape: &TowerShape, seed: u64) -> Result<EulerInstance> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let tower = random_tower(shape, &mut rng)?;
    let u = random_seed(&tower, &mut rng);
    generate_universal(&tower, &u)
}

/// A seed with small random coefficients on a few group elements.
pub fn random_seed<R: Rng>(tower: &TowerSpec, rng: &mut R) -> GroupRingElem {
    let base = tower.base();
    let mut u = base.one();
    for _ in 0..rng.gen_range(0..3) {
        let g = rng.gen_range(0..base.group().order());
        u = &u + &base.group_elem(g).scale_int(rng.gen_range(1..base.ring().p() as i64));
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_prime_tower() -> TowerSpec {
        // Γ of order 3, one prime with Fr = γ, N(ℓ) = 4, ρ = 1, over Z/3
        let ring = TruncatedLocalRing::integers(3, 1).unwrap();
        let prime = PrimeData {
            label: "l".into(),
            order: 3,
            sigma: 1,
            frobenius: vec![1, 0],
            norm: ring.from_int(4),
            rho: ring.one(),
        };
        TowerSpec::new(&ring, FinAbGroup::trivial(), vec![], vec![3], vec![prime]).unwrap()
    }

    #[test]
    fn trivial_tower_class() {
        let ring = TruncatedLocalRing::integers(3, 2).unwrap();
        let t = TowerSpec::new(&ring, FinAbGroup::trivial(), vec![], vec![9], vec![]).unwrap();
        let u = t.base().one();
        let inst = generate_universal(&t, &u).unwrap();
        let c = inst.class(&[0], &[]).unwrap();
        assert_eq!(c, &t.base().norm_element(&[t.base().group().generator(0)]).unwrap());
        assert!(check_axioms(&inst).unwrap().passed());
    }

    #[test]
    fn euler_factor_example() {
        let t = one_prime_tower();
        let b = t.base();
        let tau = b.group().generator(0);
        let expected = &b.one() - &b.group_elem(b.group().pow(tau, 2));
        assert_eq!(t.euler_factor(0).unwrap(), expected);
        let inst = generate_universal(&t, &b.one()).unwrap();
        // expand both sides of the prime edge by hand at the bottom layer
        let nh = b.norm_element(&[t.sigma(0)]).unwrap();
        let lhs = &nh * inst.class(&[0], &[0]).unwrap();
        let rhs = &expected * inst.class(&[0], &[]).unwrap();
        assert_eq!(lhs, rhs);
        assert!(check_axioms(&inst).unwrap().passed());
    }

    #[test]
    fn corruption_hits_incident_edges() {
        let t = one_prime_tower();
        let inst = generate_universal(&t, &t.base().one()).unwrap();
        for key in inst.classes.keys() {
            let bad = inst.corrupted(key, 0).unwrap();
            let report = check_axioms(&bad).unwrap();
            let failed: Vec<Edge> = report.violations.iter().map(|v| v.edge.clone()).collect();
            assert_eq!(failed, incident_edges(&t, key));
        }
    }

    #[test]
    fn derivative_examples() {
        let t = one_prime_tower();
        let inst = generate_universal(&t, &t.base().one()).unwrap();
        // n = 1: κ is the class itself
        let k0 = derive(&inst, &[0], &[], 1, &NormLift::Plain).unwrap();
        assert_eq!(&k0.value, inst.class(&[0], &[]).unwrap());
        // Fr = γ is not in Γ_F for the layer of level 1
        assert!(matches!(derive(&inst, &[1], &[0], 1, &NormLift::Plain), Err(Error::InadmissiblePrime(..))));
        let k1 = derive(&inst, &[0], &[0], 1, &NormLift::Plain).unwrap();
        assert!(k1.value.is_fixed_by(t.sigma(0)));
        assert!(k1.cross_checked);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let other = derive(&inst, &[0], &[0], 1, &NormLift::random(&t, &[0], &mut rng)).unwrap();
        assert_eq!(other.coords, k1.coords);
    }

    #[test]
    fn corrupted_class_breaks_invariance() {
        let t = one_prime_tower();
        let inst = generate_universal(&t, &t.base().one()).unwrap();
        let bad = inst.corrupted(&ClassKey::new(vec![0], vec![0]), 0).unwrap();
        assert!(matches!(
            derive(&bad, &[0], &[0], 1, &NormLift::Plain),
            Err(Error::InvarianceFailure(_)) | Err(Error::PreimageInconsistent)
        ));
    }

    #[test]
    fn ideals_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let t = random_tower(&TowerShape::new(3, 1, vec![3], vec![3, 3]), &mut rng).unwrap();
            let inst = generate_universal(&t, &random_seed(&t, &mut rng)).unwrap();
            let c: Vec<IdealGens> = (0..=3).map(|i| c_ideal(&inst, &[0], 1, i).unwrap().ideal).collect();
            for w in c.windows(2) {
                assert!(w[1].contains_ideal(&w[0]));
            }
            assert_eq!(c[2], c[3]);
        }
    }

    #[test]
    fn trivial_tower_ideal_is_unit() {
        let ring = TruncatedLocalRing::integers(3, 2).unwrap();
        let t = TowerSpec::new(&ring, FinAbGroup::trivial(), vec![], vec![9], vec![]).unwrap();
        let inst = generate_universal(&t, &t.base().one()).unwrap();
        assert!(c_ideal(&inst, &[0], 2, 0).unwrap().ideal.is_unit_ideal());
        // a seed divisible by 3 gives (3)
        let inst3 = generate_universal(&t, &t.base().int(3)).unwrap();
        let c = c_ideal(&inst3, &[0], 2, 0).unwrap().ideal;
        assert!(!c.is_unit_ideal() && c.contains(&c.base().int(3)));
    }

    #[test]
    fn functional_lifts() {
        let ring = TruncatedLocalRing::integers(3, 2).unwrap();
        let t = TowerSpec::new(&ring, FinAbGroup::trivial(), vec![], vec![9], vec![]).unwrap();
        let r2 = t.layer_base(&[1], 2).unwrap();
        let f2 = Functional { layer: vec![1], precision: 2, value: &r2.group_elem(1) + &r2.int(2) };
        let down = lift_functional(&t, &f2, &[0], 1, LiftCase::Descend).unwrap();
        assert!(down.verified);
        let same = lift_functional(&t, &f2, &[1], 2, LiftCase::Descend).unwrap();
        assert_eq!(same.functional.value, f2.value);
        let r1 = t.layer_base(&[0], 1).unwrap();
        let g1 = Functional { layer: vec![0], precision: 1, value: r1.int(2) };
        let up = lift_functional(&t, &g1, &[2], 2, LiftCase::Ascend).unwrap();
        assert!(up.verified);
    }

    #[test]
    fn compat_on_collapsed_layer() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_tower(&TowerShape::new(3, 1, vec![3, 3], vec![3]), &mut rng).unwrap();
        let inst = generate_universal(&t, &random_seed(&t, &mut rng)).unwrap();
        let ring = t.ring();
        let r = specialization_compat_check(&inst, 1, &ring.one(), &[1, 1], 1, 1).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn json_round_trip() {
        let t = one_prime_tower();
        let inst = generate_universal(&t, &t.base().one()).unwrap();
        let json = serde_json::to_string(&inst.to_json()).unwrap();
        let back = EulerInstance::from_json(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.classes, inst.classes);
        assert!(check_axioms(&back).unwrap().passed());
    }
}
