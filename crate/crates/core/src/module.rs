//! Finitely presented modules over group rings: Fitting ideals, Hom, base
//! change, exterior powers and exterior biduals.
//!
//! A module with `n` generators is `R^n / (R-span of the relation rows)`.
//! Every comparison goes through Howell forms of the flattening
//! `R^n ≅ (Z/p^M)^{n·dim}`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeff::{RingDescriptor, TruncatedLocalRing};
use crate::error::{Error, Result};
use crate::group::{Base, ElemJson, EvalHom, FinAbGroup, GroupHom, GroupRing, GroupRingElem};
use crate::zmod::{self, HowellForm};

type Vector = Vec<GroupRingElem>;

/// JSON shape `{"ring": {...}, "group": {"cyclic_orders": [...]}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseDescriptor {
    pub ring: RingDescriptor,
    #[serde(default = "trivial_group")]
    pub group: FinAbGroup,
}

fn trivial_group() -> FinAbGroup {
    FinAbGroup::trivial()
}

impl BaseDescriptor {
    pub fn build(&self) -> Result<Base> {
        Ok(GroupRing::new(TruncatedLocalRing::from_descriptor(&self.ring)?, self.group.clone()))
    }

    pub fn of(base: &Base) -> Self {
        BaseDescriptor { ring: base.ring().descriptor(), group: base.group().clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleJson {
    pub base: BaseDescriptor,
    pub n_gens: usize,
    #[serde(default)]
    pub relations: Vec<Vec<ElemJson>>,
}

/// Flatten a vector of group-ring elements.
pub fn flatten(v: &[GroupRingElem]) -> Vec<u64> {
    v.iter().flat_map(|e| e.coeffs().iter().copied()).collect()
}

/// Split a flat vector back into `n` group-ring elements.
pub fn unflatten(base: &Base, flat: &[u64]) -> Vector {
    flat.chunks(base.dim()).map(|c| base.elem_from_flat(c.to_vec())).collect()
}

/// Howell form of the `R`-submodule of `R^n` spanned by `vectors`.
pub fn r_span(base: &Base, n: usize, vectors: &[Vector]) -> HowellForm {
    let dim = base.dim();
    let mut rows = Vec::new();
    for t in base.torsion_rows() {
        for j in 0..n {
            let mut row = vec![0; n * dim];
            row[j * dim..(j + 1) * dim].copy_from_slice(&t);
            rows.push(row);
        }
    }
    let basis = base.basis();
    for v in vectors {
        for b in &basis {
            let scaled: Vector = v.iter().map(|x| b * x).collect();
            rows.push(flatten(&scaled));
        }
    }
    HowellForm::new(base.modulus(), n * dim, rows)
}

/// Pick `R`-module generators among flat candidate vectors, greedily.
fn r_generators(base: &Base, n: usize, candidates: &[Vec<u64>]) -> Vec<Vector> {
    let mut chosen: Vec<Vector> = Vec::new();
    let mut span = r_span(base, n, &chosen);
    for c in candidates {
        if !span.contains(c) {
            chosen.push(unflatten(base, c));
            span = r_span(base, n, &chosen);
        }
    }
    chosen
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FPModule {
    base: Base,
    n_gens: usize,
    relations: Vec<Vector>,
}

impl FPModule {
    pub fn new(base: &Base, n_gens: usize, relations: Vec<Vector>) -> Result<Self> {
        for (i, row) in relations.iter().enumerate() {
            if row.len() != n_gens {
                return Err(Error::DimensionMismatch(format!(
                    "relation {i} has {} entries, expected {n_gens}",
                    row.len()
                )));
            }
            if row.iter().any(|e| !GroupRing::same(base, e.base())) {
                return Err(Error::GroupMismatch);
            }
        }
        Ok(FPModule { base: Arc::clone(base), n_gens, relations })
    }

    pub fn free(base: &Base, rank: usize) -> Self {
        FPModule { base: Arc::clone(base), n_gens: rank, relations: Vec::new() }
    }

    /// `R / (gens)`.
    pub fn cyclic(base: &Base, gens: &[GroupRingElem]) -> Result<Self> {
        Self::new(base, 1, gens.iter().map(|g| vec![g.clone()]).collect())
    }

    pub fn from_json(json: &ModuleJson) -> Result<Self> {
        let base = json.base.build()?;
        let relations = json
            .relations
            .iter()
            .map(|row| row.iter().map(|e| GroupRingElem::from_json(&base, e)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(&base, json.n_gens, relations)
    }

    pub fn to_json(&self) -> ModuleJson {
        ModuleJson {
            base: BaseDescriptor::of(&self.base),
            n_gens: self.n_gens,
            relations: self.relations.iter().map(|r| r.iter().map(|e| e.to_json()).collect()).collect(),
        }
    }

    pub fn base(&self) -> &Base {
        &self.base
    }

    pub fn n_gens(&self) -> usize {
        self.n_gens
    }

    pub fn relations(&self) -> &[Vector] {
        &self.relations
    }

    /// Howell form of the relation submodule of `R^n`.
    pub fn relation_span(&self) -> HowellForm {
        r_span(&self.base, self.n_gens, &self.relations)
    }

    /// Whether two vectors of `R^n` define the same element of the module.
    pub fn same_element(&self, a: &[GroupRingElem], b: &[GroupRingElem]) -> bool {
        let diff: Vector = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.relation_span().contains(&flatten(&diff))
    }

    /// Append zero rows until there are at least `m` relations.
    pub fn padded(&self, m: usize) -> Self {
        let mut out = self.clone();
        while out.relations.len() < m {
            out.relations.push(vec![self.base.zero(); self.n_gens]);
        }
        out
    }

    /// `M / (R-span of the given elements)`.
    pub fn quotient_by(&self, elements: &[Vector]) -> Result<Self> {
        let mut rel = self.relations.clone();
        rel.extend(elements.iter().cloned());
        Self::new(&self.base, self.n_gens, rel)
    }

    pub fn direct_sum(&self, other: &FPModule) -> Result<Self> {
        if !GroupRing::same(&self.base, &other.base) {
            return Err(Error::GroupMismatch);
        }
        let n = self.n_gens + other.n_gens;
        let zero = self.base.zero();
        let mut rel = Vec::new();
        for r in &self.relations {
            let mut row = r.clone();
            row.resize(n, zero.clone());
            rel.push(row);
        }
        for r in &other.relations {
            let mut row = vec![zero.clone(); self.n_gens];
            row.extend(r.iter().cloned());
            rel.push(row);
        }
        Self::new(&self.base, n, rel)
    }

    /// Exponents of the cyclic factors of the underlying `Z/p^M`-module.
    pub fn abelian_invariants(&self) -> Vec<u32> {
        let span = self.relation_span();
        zmod::quotient_invariants(self.base.modulus(), span.rows(), self.n_gens * self.base.dim())
    }

    /// Underlying abelian group free over `Z/p^M`.
    pub fn underlying_is_free(&self) -> bool {
        let m = self.base.modulus().exp();
        self.abelian_invariants().iter().all(|&e| e == m)
    }

    /// `log_p` of the number of elements.
    pub fn log_order(&self) -> u32 {
        self.abelian_invariants().iter().sum()
    }
}

/// Ideal of `R[G]` as emitted: canonical generators plus the Howell form of
/// the flattened span they generate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdealJson {
    pub base: BaseDescriptor,
    pub gens: Vec<ElemJson>,
    pub unit: bool,
    pub howell_canonical: zmod::HowellJson,
}

/// An ideal of `R[G]` with its canonical Howell form.
#[derive(Debug, Clone)]
pub struct IdealGens {
    base: Base,
    gens: Vec<GroupRingElem>,
    howell: HowellForm,
}

impl PartialEq for IdealGens {
    fn eq(&self, other: &Self) -> bool {
        GroupRing::same(&self.base, &other.base) && self.howell == other.howell
    }
}

impl Eq for IdealGens {}

impl IdealGens {
    pub fn new(base: &Base, gens: Vec<GroupRingElem>) -> Self {
        let gens: Vec<GroupRingElem> = gens.into_iter().filter(|g| !g.is_zero()).collect();
        let howell = base.ideal_span(&gens);
        IdealGens { base: Arc::clone(base), gens, howell }
    }

    pub fn unit(base: &Base) -> Self {
        Self::new(base, vec![base.one()])
    }

    pub fn zero(base: &Base) -> Self {
        Self::new(base, Vec::new())
    }

    pub fn base(&self) -> &Base {
        &self.base
    }

    pub fn gens(&self) -> &[GroupRingElem] {
        &self.gens
    }

    pub fn howell(&self) -> &HowellForm {
        &self.howell
    }

    /// Canonical generators: the Howell rows as group-ring elements.
    pub fn canonical_gens(&self) -> Vec<GroupRingElem> {
        self.howell.rows().iter().map(|r| self.base.elem_from_flat(r.clone())).collect()
    }

    pub fn to_json(&self) -> IdealJson {
        IdealJson {
            base: BaseDescriptor::of(&self.base),
            gens: self.canonical_gens().iter().map(GroupRingElem::to_json).collect(),
            unit: self.is_unit_ideal(),
            howell_canonical: self.howell.to_json(),
        }
    }

    pub fn contains(&self, x: &GroupRingElem) -> bool {
        self.howell.contains(x.coeffs())
    }

    pub fn contains_ideal(&self, other: &IdealGens) -> bool {
        self.howell.contains_span(&other.howell)
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.howell.is_full()
    }

    pub fn is_zero(&self) -> bool {
        self.howell.is_zero()
    }

    pub fn sum(&self, other: &IdealGens) -> IdealGens {
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        IdealGens::new(&self.base, gens)
    }

    pub fn product(&self, other: &IdealGens) -> IdealGens {
        let gens = self.gens.iter().flat_map(|a| other.gens.iter().map(move |b| a * b)).collect();
        IdealGens::new(&self.base, gens)
    }

    /// Ideal generated by the images of the generators.
    pub fn map(&self, phi: &RingMap) -> Result<IdealGens> {
        if let RingMap::Idempotent(e) = phi {
            let f = &self.base.one() - e;
            let gens = self.gens.iter().map(|g| e * g).chain(std::iter::once(f)).collect();
            return Ok(IdealGens::new(&self.base, gens));
        }
        let target = phi.target(&self.base)?;
        let gens = self.gens.iter().map(|g| phi.apply(g)).collect::<Result<Vec<_>>>()?;
        Ok(IdealGens::new(&target, gens))
    }
}

/// Ring maps used for base change.
#[derive(Debug, Clone)]
pub enum RingMap {
    /// Truncation to a lower precision (the target base).
    Precision(Base),
    /// Map induced by a group homomorphism.
    Group(GroupHom),
    /// `γ ↦ u` on one cyclic factor.
    Eval(EvalHom),
    /// `M ↦ M/(1-e)M` for an idempotent `e` of `R[G]`.
    Idempotent(GroupRingElem),
    /// Scalar extension to a larger unramified coefficient ring (the target base).
    Extend(Base),
}

impl RingMap {
    pub fn target(&self, src: &Base) -> Result<Base> {
        match self {
            RingMap::Precision(t) | RingMap::Extend(t) => Ok(Arc::clone(t)),
            RingMap::Group(h) => {
                if !GroupRing::same(h.src(), src) {
                    return Err(Error::IncompatibleMap("group map has a different source".into()));
                }
                Ok(Arc::clone(h.dst()))
            }
            RingMap::Eval(ev) => Ok(Arc::clone(ev.dst())),
            RingMap::Idempotent(e) => {
                if !GroupRing::same(e.base(), src) {
                    return Err(Error::IncompatibleMap("idempotent lives in a different ring".into()));
                }
                if &(e * e) != e {
                    return Err(Error::IncompatibleMap("element is not idempotent".into()));
                }
                Ok(Arc::clone(src))
            }
        }
    }

    pub fn apply(&self, x: &GroupRingElem) -> Result<GroupRingElem> {
        match self {
            RingMap::Precision(t) => x.reduce_into(t),
            RingMap::Group(h) => h.apply(x),
            RingMap::Eval(ev) => ev.apply(x),
            RingMap::Idempotent(_) => Ok(x.clone()),
            RingMap::Extend(t) => extend_scalars(x, t),
        }
    }
}

/// Embed `R[G]` into `R'[G]` where `R'` is an unramified extension of `R`
/// at the same precision.
pub fn extend_scalars(x: &GroupRingElem, target: &Base) -> Result<GroupRingElem> {
    let (src, dst) = (x.ring(), target.ring());
    if src.p() != dst.p()
        || src.precision() != dst.precision()
        || src.is_ramified()
        || dst.is_ramified()
        || src.degree() != 1
        || x.base().group() != target.group()
    {
        return Err(Error::IncompatibleMap("scalar extension needs Z/p^N -> unramified O'/p^N".into()));
    }
    let d = dst.degree();
    let mut flat = vec![0; target.dim()];
    for (g, &c) in x.coeffs().iter().enumerate() {
        flat[g * d] = c;
    }
    Ok(target.elem_from_flat(flat))
}

/// `M ⊗ S` for a ring map `R -> S`.
pub fn base_change(m: &FPModule, phi: &RingMap) -> Result<FPModule> {
    let target = phi.target(&m.base)?;
    let mut rel: Vec<Vector> = m
        .relations
        .iter()
        .map(|row| row.iter().map(|x| phi.apply(x)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    if let RingMap::Idempotent(e) = phi {
        let f = &m.base.one() - e;
        for j in 0..m.n_gens {
            let mut row = vec![m.base.zero(); m.n_gens];
            row[j] = f.clone();
            rel.push(row);
        }
    }
    FPModule::new(&target, m.n_gens, rel)
}

/// Ideal generated by the `(n-i)`-minors of the relation matrix.
pub fn fitting_ideal(m: &FPModule, i: usize) -> IdealGens {
    let n = m.n_gens;
    let base = &m.base;
    if i >= n {
        return IdealGens::unit(base);
    }
    let k = n - i;
    let rows = m.relations.len();
    if rows < k {
        return IdealGens::zero(base);
    }
    let mut minors = MinorCache::new(&m.relations);
    let mut gens: Vec<GroupRingElem> = Vec::new();
    let mut since_check = 0;
    for rset in subsets(rows, k) {
        for cset in subsets(n, k) {
            let det = minors.minor(&rset, &cset);
            if det.is_zero() || gens.contains(&det) {
                continue;
            }
            gens.push(det);
            since_check += 1;
            if since_check >= 24 {
                since_check = 0;
                if base.ideal_span(&gens).is_full() {
                    return IdealGens::new(base, gens);
                }
            }
        }
    }
    IdealGens::new(base, gens)
}

/// All `k`-subsets of `0..n`, lexicographic.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            if n - x < k - cur.len() {
                break;
            }
            cur.push(x);
            rec(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Division-free determinants of square submatrices by Laplace expansion
/// along the last chosen row, memoized on `(row mask, column mask)`.
struct MinorCache<'a> {
    a: &'a [Vector],
    memo: HashMap<(u64, u64), GroupRingElem>,
}

impl<'a> MinorCache<'a> {
    fn new(a: &'a [Vector]) -> Self {
        assert!(a.len() <= 64 && a.first().map_or(0, |r| r.len()) <= 64, "matrix too large for minor masks");
        MinorCache { a, memo: HashMap::new() }
    }

    fn minor(&mut self, rows: &[usize], cols: &[usize]) -> GroupRingElem {
        let rmask = rows.iter().fold(0u64, |m, &r| m | 1 << r);
        let cmask = cols.iter().fold(0u64, |m, &c| m | 1 << c);
        self.minor_mask(rmask, cmask)
    }

    fn minor_mask(&mut self, rmask: u64, cmask: u64) -> GroupRingElem {
        if let Some(v) = self.memo.get(&(rmask, cmask)) {
            return v.clone();
        }
        let base = self.a[0][0].base().clone();
        let value = if rmask == 0 {
            base.one()
        } else {
            let last = 63 - rmask.leading_zeros() as usize;
            let t = rmask.count_ones() as usize;
            let rest = rmask & !(1 << last);
            let mut acc = base.zero();
            let mut pos = 0;
            for c in 0..64 {
                if cmask & (1 << c) == 0 {
                    continue;
                }
                let entry = &self.a[last][c];
                if !entry.is_zero() {
                    let sub = self.minor_mask(rest, cmask & !(1 << c));
                    let term = entry * &sub;
                    acc = if (t - 1 + pos).is_multiple_of(2) { &acc + &term } else { &acc - &term };
                }
                pos += 1;
            }
            acc
        };
        self.memo.insert((rmask, cmask), value.clone());
        value
    }
}

/// `Hom_R(M, R)` with a chosen generating set of functionals.
#[derive(Debug, Clone)]
pub struct HomModule {
    /// Presentation of `Hom_R(M, R)` on the chosen generators.
    pub module: FPModule,
    /// Generator `t` sends the `j`-th generator of `M` to `functionals[t][j]`.
    pub functionals: Vec<Vector>,
    source_gens: usize,
}

impl HomModule {
    /// Value of `Σ c_t f_t` on the element `Σ x_j e_j` of `M`.
    pub fn evaluate(&self, f: &[GroupRingElem], x: &[GroupRingElem]) -> Result<GroupRingElem> {
        if f.len() != self.functionals.len() || x.len() != self.source_gens {
            return Err(Error::DimensionMismatch("functional or element has the wrong length".into()));
        }
        let base = self.module.base();
        let mut acc = base.zero();
        for (c, ft) in f.iter().zip(&self.functionals) {
            for (v, xj) in ft.iter().zip(x) {
                acc = &acc + &(c * &(v * xj));
            }
        }
        Ok(acc)
    }

    /// The functional `Σ c_t f_t` as its vector of values on generators.
    pub fn values(&self, f: &[GroupRingElem]) -> Vector {
        let base = self.module.base();
        (0..self.source_gens)
            .map(|j| f.iter().zip(&self.functionals).fold(base.zero(), |acc, (c, ft)| &acc + &(c * &ft[j])))
            .collect()
    }
}

/// Submodule `{ y ∈ R^n : Σ_j a_ij y_j = 0 for all rows i }`, as R-generators.
fn annihilated_vectors(base: &Base, n: usize, rows: &[Vector]) -> Result<Vec<Vector>> {
    if rows.is_empty() {
        return Ok((0..n)
            .map(|j| {
                let mut v = vec![base.zero(); n];
                v[j] = base.one();
                v
            })
            .collect());
    }
    let zeros = vec![base.zero(); rows.len()];
    let sol = crate::group::howell_solve(base, rows, &zeros)?;
    Ok(r_generators(base, n, sol.kernel_howell.rows()))
}

/// Relations among vectors `v_1..v_k` of `R^n`: `{ c ∈ R^k : Σ c_t v_t = 0 }`.
fn syzygies(base: &Base, vectors: &[Vector], n: usize) -> Result<Vec<Vector>> {
    let k = vectors.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    // rows indexed by coordinates of R^n, columns by the vectors
    let a: Vec<Vector> = (0..n).map(|j| vectors.iter().map(|v| v[j].clone()).collect()).collect();
    if n == 0 {
        return annihilated_vectors(base, k, &[]);
    }
    annihilated_vectors(base, k, &a)
}

pub fn hom_module(m: &FPModule) -> Result<HomModule> {
    let base = &m.base;
    let functionals = annihilated_vectors(base, m.n_gens, &m.relations)?;
    let rel = syzygies(base, &functionals, m.n_gens)?;
    let module = FPModule::new(base, functionals.len(), rel)?;
    Ok(HomModule { module, functionals, source_gens: m.n_gens })
}

/// A functional `F` on `M` with `F(x) = v`, extending `r x ↦ r v` from the
/// cyclic submodule `R x`. The extension exists whenever the map is well
/// defined because `R` is self-injective.
pub fn extend_functional(m: &FPModule, x: &[GroupRingElem], v: &GroupRingElem) -> Result<Vector> {
    let base = &m.base;
    if x.len() != m.n_gens {
        return Err(Error::DimensionMismatch("element has the wrong length".into()));
    }
    let hom = hom_module(m)?;
    let row: Vec<GroupRingElem> = hom
        .functionals
        .iter()
        .map(|f| f.iter().zip(x).fold(base.zero(), |acc, (a, b)| &acc + &(a * b)))
        .collect();
    if row.is_empty() {
        return if v.is_zero() { Ok(vec![base.zero(); m.n_gens]) } else { Err(Error::InconsistentSystem("no functionals".into())) };
    }
    let sol = crate::group::howell_solve(base, &[row], std::slice::from_ref(v))?;
    let c = sol.particular.ok_or_else(|| Error::InconsistentSystem("map on R·x is not well defined".into()))?;
    Ok(hom.values(&c))
}

fn insertion_sign(j: usize, t: &[usize]) -> i64 {
    if t.iter().filter(|&&x| x < j).count() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `∧^i M` on the generators `e_S`, `S` an `i`-subset in lexicographic order.
pub fn exterior_power(m: &FPModule, i: usize) -> Result<FPModule> {
    let base = &m.base;
    let n = m.n_gens;
    let sets = subsets(n, i);
    let index: HashMap<Vec<usize>, usize> = sets.iter().cloned().enumerate().map(|(k, s)| (s, k)).collect();
    let mut rel = Vec::new();
    if i > 0 {
        for row in &m.relations {
            for t in subsets(n, i - 1) {
                let mut out = vec![base.zero(); sets.len()];
                let mut nonzero = false;
                for (j, a) in row.iter().enumerate() {
                    if a.is_zero() || t.contains(&j) {
                        continue;
                    }
                    let mut s = t.clone();
                    s.push(j);
                    s.sort_unstable();
                    let k = index[&s];
                    out[k] = &out[k] + &a.scale_int(insertion_sign(j, &t));
                    nonzero = true;
                }
                if nonzero {
                    rel.push(out);
                }
            }
        }
    }
    FPModule::new(base, sets.len(), rel)
}

fn det_small(mat: &[Vector]) -> GroupRingElem {
    let k = mat.len();
    let base = mat.first().map(|r| r[0].base().clone());
    match base {
        None => panic!("empty determinant has no base ring"),
        Some(base) => {
            if k == 0 {
                return base.one();
            }
            let mut cache = MinorCache::new(mat);
            let all: Vec<usize> = (0..k).collect();
            cache.minor(&all, &all)
        }
    }
}

/// `∩^i M = Hom(∧^i Hom(M, R), R)` together with `ξ^i: ∧^i M -> ∩^i M`.
#[derive(Debug, Clone)]
pub struct Bidual {
    pub hom: HomModule,
    pub wedge_hom: FPModule,
    pub cap: HomModule,
    /// Image of `e_T` (T an `i`-subset of the generators of `M`) as values on
    /// the generators `f_S` of `∧^i Hom(M, R)`.
    pub xi_images: Vec<Vector>,
    pub injective: bool,
    pub surjective: bool,
}

impl Bidual {
    pub fn module(&self) -> &FPModule {
        &self.cap.module
    }

    /// Values of the `∩^i M` generators on the `f_S`.
    pub fn cap_functionals(&self) -> &[Vector] {
        &self.cap.functionals
    }
}

pub fn bidual_cap(m: &FPModule, i: usize) -> Result<Bidual> {
    let base = &m.base;
    let hom = hom_module(m)?;
    let wedge_hom = exterior_power(&hom.module, i)?;
    let cap = hom_module(&wedge_hom)?;
    let k = hom.functionals.len();
    let fsets = subsets(k, i);
    let esets = subsets(m.n_gens, i);
    let xi_images: Vec<Vector> = esets
        .iter()
        .map(|t| {
            fsets
                .iter()
                .map(|s| {
                    if i == 0 {
                        return base.one();
                    }
                    let mat: Vec<Vector> =
                        s.iter().map(|&a| t.iter().map(|&b| hom.functionals[a][b].clone()).collect()).collect();
                    det_small(&mat)
                })
                .collect()
        })
        .collect();
    let width = fsets.len();
    let cap_span = r_span(base, width, &cap.functionals);
    let image_span = r_span(base, width, &xi_images);
    let surjective = image_span == cap_span;
    // kernel of R^{esets} -> R^{fsets} versus the relations of ∧^i M
    let wedge_m = exterior_power(m, i)?;
    let injective = if esets.is_empty() {
        true
    } else {
        let a: Vec<Vector> = (0..width).map(|s| xi_images.iter().map(|v| v[s].clone()).collect()).collect();
        let ker = if width == 0 {
            annihilated_vectors(base, esets.len(), &[])?
        } else {
            annihilated_vectors(base, esets.len(), &a)?
        };
        let ker_span = r_span(base, esets.len(), &ker);
        wedge_m.relation_span().contains_span(&ker_span)
    };
    Ok(Bidual { hom, wedge_hom, cap, xi_images, injective, surjective })
}

/// Outcome of comparing `(∩^{i+1} M) ⊗ R/p^ν` with `∩^{i+1}(M ⊗ R/p^ν)`.
///
/// Both sides are compared as `R/p^ν`-modules through their graded
/// invariants. The reduction map itself is tracked separately: it is an
/// isomorphism only when `∧^{i+1} Hom(M, R)` is free over `Z/p^N` (or
/// `ν = N`), which is recorded in `wedge_dual_free`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BidualReduction {
    pub hom_surjective: bool,
    pub maps_into: bool,
    pub surjective: bool,
    pub injective: bool,
    pub wedge_dual_free: bool,
    /// Abelian invariants of `X / I^k X` for `k = 0, 1, …`, `I` the
    /// augmentation ideal.
    pub reduced_invariants: Vec<Vec<u32>>,
    pub direct_invariants: Vec<Vec<u32>>,
}

impl BidualReduction {
    pub fn isomorphic(&self) -> bool {
        self.hom_surjective && self.reduced_invariants == self.direct_invariants
    }

    /// Whether the reduction map between the two sides is an isomorphism.
    pub fn natural_isomorphism(&self) -> bool {
        self.maps_into && self.surjective && self.injective
    }
}

/// Abelian invariants of `M / I^k M` for `k = 0..=depth` (`I^0 M = 0`).
pub fn graded_invariants(m: &FPModule, depth: usize) -> Result<Vec<Vec<u32>>> {
    let base = &m.base;
    let g = base.group();
    let aug: Vec<GroupRingElem> = (0..g.rank()).map(|j| &base.group_elem(g.generator(j)) - &base.one()).collect();
    let mut out = vec![m.abelian_invariants()];
    let mut power = vec![base.one()];
    for _ in 0..depth {
        power = power.iter().flat_map(|x| aug.iter().map(move |a| x * a)).filter(|x| !x.is_zero()).collect();
        let mut extra = Vec::new();
        for x in &power {
            for t in 0..m.n_gens {
                let mut v = vec![base.zero(); m.n_gens];
                v[t] = x.clone();
                extra.push(v);
            }
        }
        out.push(m.quotient_by(&extra)?.abelian_invariants());
    }
    Ok(out)
}

pub fn bidual_reduction_check(m: &FPModule, nu: u32, i: usize) -> Result<BidualReduction> {
    if !m.underlying_is_free() {
        return Err(Error::UnderlyingNotFree);
    }
    let base = &m.base;
    let small = base.with_precision(nu)?;
    let red = |x: &GroupRingElem| x.reduce_into(&small);
    let red_vec = |v: &Vector| v.iter().map(red).collect::<Result<Vec<_>>>();
    let m_bar = base_change(m, &RingMap::Precision(Arc::clone(&small)))?;

    // Hom(M, R) -> Hom(M̄, R̄)
    let hom = hom_module(m)?;
    let hom_bar = hom_module(&m_bar)?;
    let reduced_funcs = hom.functionals.iter().map(red_vec).collect::<Result<Vec<_>>>()?;
    let hom_surjective =
        r_span(&small, m.n_gens, &reduced_funcs) == r_span(&small, m.n_gens, &hom_bar.functionals);

    // upstairs bidual, then reduce its presentation
    let up = bidual_cap(m, i + 1)?;
    let cap_up_bar = base_change(up.module(), &RingMap::Precision(Arc::clone(&small)))?;

    // downstairs bidual built on the reduced Hom generators
    let k = reduced_funcs.len();
    let hom_bar_rel = syzygies(&small, &reduced_funcs, m.n_gens)?;
    let hom_bar_mod = FPModule::new(&small, k, hom_bar_rel)?;
    let wedge_bar = exterior_power(&hom_bar_mod, i + 1)?;
    let cap_bar = hom_module(&wedge_bar)?;
    let width = wedge_bar.n_gens();

    let phis = up.cap_functionals().iter().map(red_vec).collect::<Result<Vec<_>>>()?;
    let maps_into = phis.iter().all(|phi| {
        wedge_bar.relations().iter().all(|row| {
            row.iter().zip(phi).fold(small.zero(), |acc, (a, b)| &acc + &(a * b)).is_zero()
        })
    });
    let surjective = r_span(&small, width, &phis) == r_span(&small, width, &cap_bar.functionals);
    let injective = {
        let a: Vec<Vector> = (0..width).map(|s| phis.iter().map(|v| v[s].clone()).collect()).collect();
        let ker = annihilated_vectors(&small, phis.len(), &a)?;
        let ker_span = r_span(&small, phis.len(), &ker);
        ker_span == cap_up_bar.relation_span()
    };
    let depth = base.group().order().min(4);
    Ok(BidualReduction {
        hom_surjective,
        maps_into,
        surjective,
        injective,
        wedge_dual_free: up.wedge_hom.underlying_is_free(),
        reduced_invariants: graded_invariants(&cap_up_bar, depth)?,
        direct_invariants: graded_invariants(&cap_bar.module, depth)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(p: u64, n: u32, orders: Vec<u64>) -> Base {
        GroupRing::new(TruncatedLocalRing::integers(p, n).unwrap(), FinAbGroup::new(orders).unwrap())
    }

    fn diag(b: &Base, entries: &[GroupRingElem]) -> FPModule {
        let n = entries.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { entries[i].clone() } else { b.zero() }).collect())
            .collect();
        FPModule::new(b, n, rows).unwrap()
    }

    #[test]
    fn functionals_extend_from_cyclic_submodules() {
        let b = base(3, 2, vec![3]);
        let s = b.group_elem(1);
        let m = diag(&b, &[b.zero(), b.int(3)]).direct_sum(&FPModule::cyclic(&b, &[&s - &b.one()]).unwrap()).unwrap();
        let x = vec![b.int(3), &s + &b.one(), b.int(2)];
        // x ↦ 3: well defined since ann(x) kills 3
        let f = extend_functional(&m, &x, &b.int(3)).unwrap();
        let value = f.iter().zip(&x).fold(b.zero(), |acc, (a, c)| &acc + &(a * c));
        assert_eq!(value, b.int(3));
        // e_2 has annihilator (3), so e_2 ↦ 1 is not well defined
        let e2 = vec![b.zero(), b.one(), b.zero()];
        assert!(extend_functional(&m, &e2, &b.one()).is_err());
    }

    #[test]
    fn fitting_of_diag_three_three() {
        let b = base(3, 2, vec![]);
        let m = diag(&b, &[b.int(3), b.int(3)]);
        assert!(fitting_ideal(&m, 0).is_zero());
        assert_eq!(fitting_ideal(&m, 1), IdealGens::new(&b, vec![b.int(3)]));
        assert!(fitting_ideal(&m, 2).is_unit_ideal());
    }

    #[test]
    fn fitting_of_cyclic_module() {
        let b = base(3, 2, vec![3]);
        let sm1 = &b.group_elem(1) - &b.one();
        let m = FPModule::cyclic(&b, &[sm1.clone(), b.int(3)]).unwrap();
        assert_eq!(fitting_ideal(&m, 0), IdealGens::new(&b, vec![sm1, b.int(3)]));
        assert!(fitting_ideal(&m, 1).is_unit_ideal());
    }

    #[test]
    fn base_change_examples() {
        let b = base(3, 2, vec![]);
        let m = diag(&b, &[b.int(3), b.int(3)]);
        let small = b.with_precision(1).unwrap();
        let mb = base_change(&m, &RingMap::Precision(small)).unwrap();
        assert!(fitting_ideal(&mb, 1).is_zero());

        let g = base(3, 2, vec![3]);
        let sm1 = &g.group_elem(1) - &g.one();
        let q = GroupHom::kill_factors(&g, &[0]).unwrap();
        assert!(q.apply(&sm1).unwrap().is_zero());
    }

    #[test]
    fn hom_of_free_and_torsion() {
        let b = base(3, 2, vec![]);
        let free = FPModule::free(&b, 2);
        let h = hom_module(&free).unwrap();
        assert_eq!(h.module.abelian_invariants(), vec![2, 2]);
        let f = vec![b.int(2), b.int(5)];
        let x = vec![b.int(4), b.int(1)];
        let val = h.evaluate(&f, &x).unwrap();
        let values = h.values(&f);
        assert_eq!(val, &(&values[0] * &x[0]) + &(&values[1] * &x[1]));

        let tors = FPModule::cyclic(&b, &[b.int(3)]).unwrap();
        let h = hom_module(&tors).unwrap();
        assert_eq!(h.module.abelian_invariants(), vec![1]);
        assert_eq!(h.functionals, vec![vec![b.int(3)]]);
    }

    #[test]
    fn biduals_over_z9() {
        let b = base(3, 2, vec![]);
        let free = FPModule::free(&b, 2);
        let bd = bidual_cap(&free, 2).unwrap();
        assert_eq!(bd.module().abelian_invariants(), vec![2]);
        assert!(bd.injective && bd.surjective);

        let m = FPModule::free(&b, 1).direct_sum(&FPModule::cyclic(&b, &[b.int(3)]).unwrap()).unwrap();
        let one = bidual_cap(&m, 1).unwrap();
        assert_eq!(one.module().abelian_invariants(), vec![1, 2]);
        assert!(one.injective);
        let two = bidual_cap(&m, 2).unwrap();
        assert_eq!(two.module().abelian_invariants(), vec![1]);
    }

    #[test]
    fn reduction_check_free_and_guard() {
        let b = base(3, 3, vec![3]);
        let free = FPModule::free(&b, 2);
        let rep = bidual_reduction_check(&free, 2, 0).unwrap();
        assert!(rep.isomorphic() && rep.natural_isomorphism() && rep.wedge_dual_free, "{rep:?}");
        let tors = FPModule::cyclic(&b, &[b.int(3)]).unwrap();
        assert_eq!(bidual_reduction_check(&tors, 2, 0).unwrap_err(), Error::UnderlyingNotFree);
    }

    #[test]
    fn exterior_power_of_free_module() {
        let b = base(3, 2, vec![3]);
        for r in 0..=3 {
            for i in 0..=3 {
                let bd = bidual_cap(&FPModule::free(&b, r), i).unwrap();
                assert!(bd.injective && bd.surjective, "rank {r}, i {i}");
            }
        }
    }
}
