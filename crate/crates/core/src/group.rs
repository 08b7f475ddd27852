//! Finite abelian groups and their group rings over a truncated local ring.
//!
//! Group elements are exponent vectors `(e_1, …, e_r)` with `0 <= e_i < m_i`,
//! stored as a mixed-radix index. A group-ring element keeps a dense
//! coefficient vector of length `d·#G` (index `g·d + k` holds the `x^k`
//! coordinate of the coefficient of `g`), which doubles as its flattening
//! to the underlying `Z/p^M`-module.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeff::{Ring, RingElem, TruncatedLocalRing};
use crate::error::{Error, Result};
use crate::zmod::{self, HowellForm};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinAbGroup {
    cyclic_orders: Vec<u64>,
}

impl FinAbGroup {
    pub fn new(cyclic_orders: Vec<u64>) -> Result<Self> {
        if cyclic_orders.contains(&0) {
            return Err(Error::InvalidGroup("cyclic orders must be positive".into()));
        }
        let order = cyclic_orders.iter().try_fold(1u64, |acc, &m| acc.checked_mul(m));
        match order {
            Some(n) if n <= 1 << 20 => Ok(FinAbGroup { cyclic_orders }),
            _ => Err(Error::InvalidGroup("group too large".into())),
        }
    }

    pub fn trivial() -> Self {
        FinAbGroup { cyclic_orders: Vec::new() }
    }

    pub fn cyclic(m: u64) -> Result<Self> {
        Self::new(vec![m])
    }

    pub fn cyclic_orders(&self) -> &[u64] {
        &self.cyclic_orders
    }

    pub fn rank(&self) -> usize {
        self.cyclic_orders.len()
    }

    pub fn order(&self) -> usize {
        self.cyclic_orders.iter().product::<u64>() as usize
    }

    /// Exponent vector to index. Exponents are reduced, negatives allowed.
    pub fn index_of(&self, exps: &[i64]) -> Result<usize> {
        if exps.len() != self.rank() {
            return Err(Error::InvalidGroup(format!(
                "element {exps:?} has {} components, group rank is {}",
                exps.len(),
                self.rank()
            )));
        }
        let mut idx = 0usize;
        for (&e, &m) in exps.iter().zip(&self.cyclic_orders).rev() {
            idx = idx * m as usize + e.rem_euclid(m as i64) as usize;
        }
        Ok(idx)
    }

    pub fn exponents(&self, mut idx: usize) -> Vec<u64> {
        self.cyclic_orders
            .iter()
            .map(|&m| {
                let e = idx as u64 % m;
                idx /= m as usize;
                e
            })
            .collect()
    }

    pub fn identity(&self) -> usize {
        0
    }

    /// Generator of the `j`-th cyclic factor.
    pub fn generator(&self, j: usize) -> usize {
        let stride: u64 = self.cyclic_orders[..j].iter().product();
        if self.cyclic_orders[j] == 1 {
            0
        } else {
            stride as usize
        }
    }

    pub fn op(&self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (a, b);
        let mut idx = 0usize;
        let mut stride = 1usize;
        for &m in &self.cyclic_orders {
            let m = m as usize;
            let s = (a % m + b % m) % m;
            idx += s * stride;
            stride *= m;
            a /= m;
            b /= m;
        }
        idx
    }

    pub fn inv(&self, a: usize) -> usize {
        let mut a = a;
        let mut idx = 0usize;
        let mut stride = 1usize;
        for &m in &self.cyclic_orders {
            let m = m as usize;
            let e = a % m;
            idx += ((m - e) % m) * stride;
            stride *= m;
            a /= m;
        }
        idx
    }

    pub fn pow(&self, a: usize, k: i64) -> usize {
        let exps: Vec<i64> = self.exponents(a).iter().map(|&e| e as i64 * k).collect();
        self.index_of(&exps).expect("rank preserved")
    }

    pub fn element_order(&self, a: usize) -> u64 {
        self.exponents(a)
            .iter()
            .zip(&self.cyclic_orders)
            .map(|(&e, &m)| m / crate::coeff::gcd(e, m))
            .fold(1, lcm)
    }

    /// Elements of the subgroup generated by `gens`, ascending.
    pub fn subgroup(&self, gens: &[usize]) -> Result<Vec<usize>> {
        let n = self.order();
        if let Some(&g) = gens.iter().find(|&&g| g >= n) {
            return Err(Error::InvalidGroup(format!("generator index {g} outside the group")));
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0usize];
        while let Some(x) = stack.pop() {
            for &g in gens {
                let y = self.op(x, g);
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        Ok((0..n).filter(|&i| seen[i]).collect())
    }

    pub fn product(&self, other: &FinAbGroup) -> FinAbGroup {
        let mut orders = self.cyclic_orders.clone();
        orders.extend_from_slice(&other.cyclic_orders);
        FinAbGroup { cyclic_orders: orders }
    }

    /// The group with the listed factors removed.
    pub fn drop_factors(&self, factors: &[usize]) -> FinAbGroup {
        FinAbGroup {
            cyclic_orders: self
                .cyclic_orders
                .iter()
                .enumerate()
                .filter(|(j, _)| !factors.contains(j))
                .map(|(_, &m)| m)
                .collect(),
        }
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / crate::coeff::gcd(a, b) * b
}

/// `R[G]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupRing {
    ring: Ring,
    group: FinAbGroup,
}

pub type Base = Arc<GroupRing>;

impl GroupRing {
    pub fn new(ring: Ring, group: FinAbGroup) -> Base {
        Arc::new(GroupRing { ring, group })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    /// Rank of the flattening over `Z/p^M`.
    pub fn dim(&self) -> usize {
        self.ring.degree() * self.group.order()
    }

    pub fn modulus(&self) -> zmod::PrimePowerModulus {
        self.ring.modulus()
    }

    /// Relations `p^{m_k} e_{g,k}` cutting `(Z/p^M)^dim` down to `R[G]`.
    /// Empty for unramified rings.
    pub fn torsion_rows(&self) -> Vec<Vec<u64>> {
        let d = self.ring.degree();
        let m = self.modulus();
        let mut out = Vec::new();
        for (k, &e) in self.ring.coord_exp().iter().enumerate() {
            if e < m.exp() {
                for g in 0..self.group.order() {
                    let mut v = vec![0; self.dim()];
                    v[g * d + k] = m.pow_p(e);
                    out.push(v);
                }
            }
        }
        out
    }

    /// `Z/p^M`-basis of `R[G]`: `x^k g`.
    pub fn basis(self: &Arc<Self>) -> Vec<GroupRingElem> {
        (0..self.dim())
            .map(|i| {
                let mut v = vec![0; self.dim()];
                v[i] = 1;
                self.elem_from_flat(v)
            })
            .collect()
    }

    pub fn zero(self: &Arc<Self>) -> GroupRingElem {
        GroupRingElem { base: Arc::clone(self), coeffs: vec![0; self.dim()] }
    }

    pub fn one(self: &Arc<Self>) -> GroupRingElem {
        self.group_elem(0)
    }

    pub fn group_elem(self: &Arc<Self>, g: usize) -> GroupRingElem {
        let mut e = self.zero();
        e.coeffs[g * self.ring.degree()] = 1 % self.ring.modulus().modulus();
        self.ring.normalize(&mut e.coeffs[g * self.ring.degree()..(g + 1) * self.ring.degree()]);
        e
    }

    pub fn scalar(self: &Arc<Self>, c: &RingElem) -> GroupRingElem {
        let mut e = self.zero();
        e.coeffs[..self.ring.degree()].copy_from_slice(c.coeffs());
        e
    }

    pub fn int(self: &Arc<Self>, n: i64) -> GroupRingElem {
        self.scalar(&self.ring.from_int(n))
    }

    /// Element from a flat coefficient vector, normalizing each coordinate.
    pub fn elem_from_flat(self: &Arc<Self>, mut coeffs: Vec<u64>) -> GroupRingElem {
        assert_eq!(coeffs.len(), self.dim());
        let d = self.ring.degree();
        for chunk in coeffs.chunks_mut(d) {
            self.ring.normalize(chunk);
        }
        GroupRingElem { base: Arc::clone(self), coeffs }
    }

    /// `Σ c_g g` from `(exponents, coefficient coordinates)` pairs.
    pub fn from_terms(self: &Arc<Self>, terms: &[(Vec<i64>, Vec<i64>)]) -> Result<GroupRingElem> {
        let mut e = self.zero();
        for (g, c) in terms {
            let gi = self.group.index_of(g)?;
            let c = self.ring.from_signed(c)?;
            e = &e + &(&self.group_elem(gi) * &self.scalar(&c));
        }
        Ok(e)
    }

    /// `Σ_{h ∈ H} h` for the subgroup generated by `gens`.
    pub fn norm_element(self: &Arc<Self>, gens: &[usize]) -> Result<GroupRingElem> {
        let mut e = self.zero();
        for h in self.group.subgroup(gens)? {
            e.add_ring_coeff(h, &self.ring.int_coeffs(1));
        }
        Ok(e)
    }

    /// Generators `h - 1` of the augmentation ideal of the subgroup.
    pub fn augmentation_generators(self: &Arc<Self>, gens: &[usize]) -> Result<Vec<GroupRingElem>> {
        self.group.subgroup(gens)?;
        Ok(gens.iter().map(|&h| &self.group_elem(h) - &self.one()).collect())
    }

    /// Howell form of the ideal generated by `gens`, as a span in the
    /// flattening (torsion rows included).
    pub fn ideal_span(self: &Arc<Self>, gens: &[GroupRingElem]) -> HowellForm {
        let mut rows = self.torsion_rows();
        let basis = self.basis();
        for g in gens {
            for b in &basis {
                rows.push((b * g).coeffs);
            }
        }
        HowellForm::new(self.modulus(), self.dim(), rows)
    }

    /// Howell form of the `Z/p^M`-span of `elems` (no ideal closure).
    pub fn additive_span(self: &Arc<Self>, elems: &[GroupRingElem]) -> HowellForm {
        let mut rows = self.torsion_rows();
        rows.extend(elems.iter().map(|e| e.coeffs.clone()));
        HowellForm::new(self.modulus(), self.dim(), rows)
    }

    /// Same group over a lower-precision copy of the ring.
    pub fn with_precision(&self, precision: u32) -> Result<Base> {
        Ok(GroupRing::new(self.ring.with_precision(precision)?, self.group.clone()))
    }

    pub fn same(a: &Base, b: &Base) -> bool {
        Arc::ptr_eq(a, b) || a == b
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupRingElem {
    base: Base,
    coeffs: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub g: Vec<i64>,
    pub c: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ElemJson {
    pub terms: Vec<TermJson>,
}

impl GroupRingElem {
    pub fn base(&self) -> &Base {
        &self.base
    }

    pub fn ring(&self) -> &Ring {
        &self.base.ring
    }

    /// Flattened coordinates.
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    fn d(&self) -> usize {
        self.base.ring.degree()
    }

    pub fn coeff(&self, g: usize) -> RingElem {
        let d = self.d();
        self.base.ring.elem(self.coeffs[g * d..(g + 1) * d].to_vec())
    }

    fn coeff_slice(&self, g: usize) -> &[u64] {
        let d = self.d();
        &self.coeffs[g * d..(g + 1) * d]
    }

    fn add_ring_coeff(&mut self, g: usize, c: &[u64]) {
        let d = self.d();
        let ring = Arc::clone(&self.base.ring);
        ring.add_assign_coeffs(&mut self.coeffs[g * d..(g + 1) * d], c);
    }

    /// Group elements with nonzero coefficient, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.base.group.order()).filter(|&g| self.coeff_slice(g).iter().any(|&c| c != 0)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn augmentation(&self) -> RingElem {
        let ring = &self.base.ring;
        let mut acc = ring.zero_coeffs();
        for g in 0..self.base.group.order() {
            ring.add_assign_coeffs(&mut acc, self.coeff_slice(g));
        }
        ring.elem(acc)
    }

    fn check(&self, other: &GroupRingElem) -> Result<()> {
        if GroupRing::same(&self.base, &other.base) {
            Ok(())
        } else {
            Err(Error::GroupMismatch)
        }
    }

    pub fn try_add(&self, other: &GroupRingElem) -> Result<GroupRingElem> {
        self.check(other)?;
        let ring = &self.base.ring;
        let d = self.d();
        let mut out = self.coeffs.clone();
        for (a, b) in out.chunks_mut(d).zip(other.coeffs.chunks(d)) {
            ring.add_assign_coeffs(a, b);
        }
        Ok(GroupRingElem { base: Arc::clone(&self.base), coeffs: out })
    }

    pub fn try_sub(&self, other: &GroupRingElem) -> Result<GroupRingElem> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> GroupRingElem {
        let ring = &self.base.ring;
        let coeffs = self.coeffs.chunks(self.d()).flat_map(|c| ring.neg_coeffs(c)).collect();
        GroupRingElem { base: Arc::clone(&self.base), coeffs }
    }

    pub fn try_mul(&self, other: &GroupRingElem) -> Result<GroupRingElem> {
        self.check(other)?;
        let ring = &self.base.ring;
        let group = &self.base.group;
        let d = self.d();
        let n = group.order();
        let sa: Vec<usize> = self.support();
        let sb: Vec<usize> = other.support();
        let mut out = vec![0u64; self.coeffs.len()];
        if d == 1 {
            let m = ring.modulus().modulus();
            for &g in &sa {
                let a = self.coeffs[g];
                for &h in &sb {
                    let gh = group.op(g, h);
                    out[gh] = zmod::addmod(out[gh], zmod::mulmod(a, other.coeffs[h], m), m);
                }
            }
        } else {
            for &g in &sa {
                for &h in &sb {
                    let gh = group.op(g, h);
                    let prod = ring.mul_coeffs(self.coeff_slice(g), other.coeff_slice(h));
                    ring.add_assign_coeffs(&mut out[gh * d..(gh + 1) * d], &prod);
                }
            }
        }
        debug_assert_eq!(out.len(), n * d);
        Ok(GroupRingElem { base: Arc::clone(&self.base), coeffs: out })
    }

    pub fn scale(&self, c: &RingElem) -> GroupRingElem {
        let ring = &self.base.ring;
        let coeffs = self.coeffs.chunks(self.d()).flat_map(|x| ring.mul_coeffs(x, c.coeffs())).collect();
        GroupRingElem { base: Arc::clone(&self.base), coeffs }
    }

    pub fn scale_int(&self, n: i64) -> GroupRingElem {
        self.scale(&self.base.ring.from_int(n))
    }

    pub fn pow(&self, mut e: u64) -> GroupRingElem {
        let mut acc = self.base.one();
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            e >>= 1;
        }
        acc
    }

    /// Image under `g ↦ g^{-1}`.
    pub fn involution(&self) -> GroupRingElem {
        let group = &self.base.group;
        let mut out = self.base.zero();
        for g in self.support() {
            out.add_ring_coeff(group.inv(g), self.coeff_slice(g));
        }
        out
    }

    /// Truncate coefficients into a lower-precision copy of the base.
    pub fn reduce_into(&self, target: &Base) -> Result<GroupRingElem> {
        if target.group != self.base.group || !self.base.ring.is_reduction_target(&target.ring) {
            return Err(Error::IncompatibleMap("target is not a precision reduction".into()));
        }
        Ok(target.elem_from_flat(self.coeffs.clone()))
    }

    /// Whether the element is fixed by multiplication by `g`.
    pub fn is_fixed_by(&self, g: usize) -> bool {
        &self.base.group_elem(g) * self == *self
    }

    pub fn to_json(&self) -> ElemJson {
        let group = &self.base.group;
        let terms = self
            .support()
            .into_iter()
            .map(|g| TermJson {
                g: group.exponents(g).into_iter().map(|e| e as i64).collect(),
                c: self.coeff(g).to_json_coords(),
            })
            .collect();
        ElemJson { terms }
    }

    pub fn from_json(base: &Base, json: &ElemJson) -> Result<GroupRingElem> {
        let terms: Vec<(Vec<i64>, Vec<i64>)> = json.terms.iter().map(|t| (t.g.clone(), t.c.clone())).collect();
        base.from_terms(&terms)
    }
}

impl fmt::Debug for GroupRingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GroupRingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let group = &self.base.group;
        let parts: Vec<String> = self
            .support()
            .into_iter()
            .map(|g| {
                let c = self.coeff(g);
                if g == 0 {
                    format!("{c}")
                } else {
                    format!("({c})g{:?}", group.exponents(g))
                }
            })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

macro_rules! gr_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl std::ops::$trait<&GroupRingElem> for &GroupRingElem {
            type Output = GroupRingElem;
            fn $method(self, rhs: &GroupRingElem) -> GroupRingElem {
                self.$try(rhs).expect("group ring mismatch in arithmetic")
            }
        }
        impl std::ops::$trait<GroupRingElem> for GroupRingElem {
            type Output = GroupRingElem;
            fn $method(self, rhs: GroupRingElem) -> GroupRingElem {
                (&self).$method(&rhs)
            }
        }
    };
}

gr_binop!(Add, add, try_add);
gr_binop!(Sub, sub, try_sub);
gr_binop!(Mul, mul, try_mul);

impl std::ops::Neg for &GroupRingElem {
    type Output = GroupRingElem;
    fn neg(self) -> GroupRingElem {
        GroupRingElem::neg(self)
    }
}

/// Group homomorphism `G -> G'` given by the images of the factor generators,
/// extended linearly to `R[G] -> R[G']`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupHom {
    src: Base,
    dst: Base,
    images: Vec<usize>,
    table: Vec<usize>,
}

impl GroupHom {
    pub fn new(src: &Base, dst: &Base, images: Vec<usize>) -> Result<Self> {
        let (g, h) = (&src.group, &dst.group);
        if src.ring != dst.ring {
            return Err(Error::IncompatibleMap("group ring maps keep the coefficient ring".into()));
        }
        if images.len() != g.rank() || images.iter().any(|&x| x >= h.order()) {
            return Err(Error::IncompatibleMap("one image per cyclic factor required".into()));
        }
        for (j, &img) in images.iter().enumerate() {
            if h.pow(img, g.cyclic_orders()[j] as i64) != 0 {
                return Err(Error::IncompatibleMap(format!("image of generator {j} has the wrong order")));
            }
        }
        let table = (0..g.order())
            .map(|idx| {
                g.exponents(idx)
                    .iter()
                    .zip(&images)
                    .fold(0, |acc, (&e, &img)| h.op(acc, h.pow(img, e as i64)))
            })
            .collect();
        Ok(GroupHom { src: Arc::clone(src), dst: Arc::clone(dst), images, table })
    }

    /// Projection killing the listed factors; `dst` must be the group with
    /// those factors dropped (same order of the others).
    pub fn kill_factors(src: &Base, factors: &[usize]) -> Result<Self> {
        let g = &src.group;
        let dst = GroupRing::new(Arc::clone(&src.ring), g.drop_factors(factors));
        let mut images = Vec::new();
        let mut next = 0;
        for j in 0..g.rank() {
            if factors.contains(&j) {
                images.push(0);
            } else {
                images.push(dst.group.generator(next));
                next += 1;
            }
        }
        Self::new(src, &dst, images)
    }

    /// Endomorphism of `R[G]` sending the listed factors to 1.
    pub fn kill_factors_in_place(src: &Base, factors: &[usize]) -> Result<Self> {
        let g = &src.group;
        let images = (0..g.rank()).map(|j| if factors.contains(&j) { 0 } else { g.generator(j) }).collect();
        Self::new(src, src, images)
    }

    pub fn src(&self) -> &Base {
        &self.src
    }

    pub fn dst(&self) -> &Base {
        &self.dst
    }

    pub fn map_index(&self, g: usize) -> usize {
        self.table[g]
    }

    pub fn apply(&self, x: &GroupRingElem) -> Result<GroupRingElem> {
        if !GroupRing::same(&self.src, &x.base) {
            return Err(Error::GroupMismatch);
        }
        let mut out = self.dst.zero();
        for g in x.support() {
            out.add_ring_coeff(self.table[g], x.coeff_slice(g));
        }
        Ok(out)
    }
}

/// The algebra map `R[C × G'] -> R[G']`, `γ ↦ u`, where `C` is one cyclic
/// factor of the source group.
#[derive(Debug, Clone)]
pub struct EvalHom {
    src: Base,
    dst: Base,
    factor: usize,
    u: RingElem,
    proj: GroupHom,
}

impl EvalHom {
    pub fn new(src: &Base, factor: usize, u: &RingElem) -> Result<Self> {
        if factor >= src.group.rank() {
            return Err(Error::InvalidGroup(format!("no cyclic factor {factor}")));
        }
        if u.ring() != &src.ring {
            return Err(Error::RingMismatch);
        }
        if (u - &src.ring.one()).valuation() == 0 {
            return Err(Error::NotOneModPi);
        }
        let m = src.group.cyclic_orders()[factor];
        if !u.pow(m).is_one() {
            return Err(Error::IllDefinedEvaluation(format!("u^{m} != 1 at this precision")));
        }
        let proj = GroupHom::kill_factors(src, &[factor])?;
        Ok(EvalHom { src: Arc::clone(src), dst: Arc::clone(proj.dst()), factor, u: u.clone(), proj })
    }

    pub fn dst(&self) -> &Base {
        &self.dst
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn unit(&self) -> &RingElem {
        &self.u
    }

    pub fn apply(&self, x: &GroupRingElem) -> Result<GroupRingElem> {
        if !GroupRing::same(&self.src, &x.base) {
            return Err(Error::GroupMismatch);
        }
        let g = &self.src.group;
        let m = g.cyclic_orders()[self.factor];
        let powers: Vec<RingElem> = (0..m).map(|k| self.u.pow(k)).collect();
        let mut out = self.dst.zero();
        for idx in x.support() {
            let e = g.exponents(idx)[self.factor] as usize;
            let c = self.src.ring.mul_coeffs(x.coeff_slice(idx), powers[e].coeffs());
            out.add_ring_coeff(self.proj.map_index(idx), &c);
        }
        Ok(out)
    }
}

/// A character of the full group of a group ring, with values of order prime to `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Character {
    group: FinAbGroup,
    values: Vec<RingElem>,
}

impl Character {
    pub fn new(group: FinAbGroup, values: Vec<RingElem>) -> Result<Self> {
        if values.len() != group.rank() {
            return Err(Error::InvalidGroup("one character value per cyclic factor".into()));
        }
        for (v, &m) in values.iter().zip(group.cyclic_orders()) {
            if !v.pow(m).is_one() {
                return Err(Error::InvalidGroup(format!("character value {v} has order not dividing {m}")));
            }
        }
        Ok(Character { group, values })
    }

    /// `ψ(g_j) = ζ_j^{k_j}` with `ζ_j` the first primitive `m_j`-th root in
    /// the ring's canonical order.
    pub fn from_exponents(ring: &Ring, group: &FinAbGroup, ks: &[u64]) -> Result<Self> {
        let p = ring.p();
        let order = group.order() as u64;
        if order.is_multiple_of(p) {
            return Err(Error::OrderNotCoprime(order));
        }
        if ks.len() != group.rank() {
            return Err(Error::InvalidGroup("one exponent per cyclic factor".into()));
        }
        let mut values = Vec::new();
        for (&k, &m) in ks.iter().zip(group.cyclic_orders()) {
            values.push(primitive_root(ring, m)?.pow(k % m));
        }
        Self::new(group.clone(), values)
    }

    /// Every character, in exponent order.
    pub fn all(ring: &Ring, group: &FinAbGroup) -> Result<Vec<Self>> {
        (0..group.order())
            .map(|idx| Self::from_exponents(ring, group, &group.exponents(idx)))
            .collect()
    }

    pub fn value(&self, g: usize) -> RingElem {
        let exps = self.group.exponents(g);
        exps.iter()
            .zip(&self.values)
            .fold(self.values_ring().one(), |acc, (&e, v)| &acc * &v.pow(e))
    }

    fn values_ring(&self) -> Ring {
        self.values.first().map(|v| Arc::clone(v.ring())).unwrap_or_else(|| {
            TruncatedLocalRing::integers(2, 1).expect("Z/2 is a valid ring")
        })
    }

    /// `e_ψ = |Δ|^{-1} Σ ψ(δ) δ^{-1}` in `R[Δ]`.
    pub fn idempotent(&self, base: &Base) -> Result<GroupRingElem> {
        if base.group != self.group {
            return Err(Error::GroupMismatch);
        }
        let ring = &base.ring;
        let order = self.group.order() as u64;
        if order.is_multiple_of(ring.p()) {
            return Err(Error::OrderNotCoprime(order));
        }
        let inv = ring.from_int(order as i64).inv_unit()?;
        let mut e = base.zero();
        for g in 0..order as usize {
            let c = &self.value_in(ring, g) * &inv;
            e.add_ring_coeff(self.group.inv(g), c.coeffs());
        }
        Ok(e)
    }

    fn value_in(&self, ring: &Ring, g: usize) -> RingElem {
        if self.values.is_empty() {
            return ring.one();
        }
        let v = self.value(g);
        if v.ring() == ring {
            v
        } else {
            ring.elem(v.coeffs().to_vec())
        }
    }
}

fn primitive_root(ring: &Ring, m: u64) -> Result<RingElem> {
    if m == 1 {
        return Ok(ring.one());
    }
    let roots = ring.roots_of_unity(m)?;
    if (roots.len() as u64) < m {
        return Err(Error::MissingRoots);
    }
    roots
        .into_iter()
        .find(|z| (1..m).filter(|k| m.is_multiple_of(*k)).all(|k| !z.pow(k).is_one()))
        .ok_or(Error::MissingRoots)
}

/// Solution set of `A x = b` over `R[G]`.
#[derive(Debug, Clone)]
pub struct RgSolution {
    pub solvable: bool,
    /// Canonical particular solution: the kernel-reduced representative.
    pub particular: Option<Vec<GroupRingElem>>,
    /// `Z/p^M`-generators of the kernel, from its Howell form.
    pub kernel: Vec<Vec<GroupRingElem>>,
    /// Howell form of the kernel in the flattening of `R[G]^cols`.
    pub kernel_howell: HowellForm,
}

/// Solve `A x = b` with `A` an `rows × cols` matrix over `R[G]`.
pub fn howell_solve(base: &Base, a: &[Vec<GroupRingElem>], b: &[GroupRingElem]) -> Result<RgSolution> {
    let rows = a.len();
    if b.len() != rows {
        return Err(Error::DimensionMismatch(format!("{rows} equations but {} right-hand sides", b.len())));
    }
    let cols = a.first().map_or(0, |r| r.len());
    if a.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch("ragged matrix".into()));
    }
    for e in a.iter().flatten().chain(b) {
        if !GroupRing::same(base, &e.base) {
            return Err(Error::GroupMismatch);
        }
    }
    let dim = base.dim();
    let m = base.modulus();
    let basis = base.basis();
    let tors = base.torsion_rows();
    // unknowns: basis coordinates of each x_j, then torsion of the x_j,
    // then torsion of the target
    let mut gens: Vec<Vec<u64>> = Vec::new();
    for j in 0..cols {
        for e in &basis {
            let mut row = Vec::with_capacity(rows * dim);
            for ai in a {
                row.extend_from_slice((&ai[j] * e).coeffs());
            }
            gens.push(row);
        }
    }
    let n_x = gens.len();
    for _ in 0..cols {
        for _ in &tors {
            gens.push(vec![0; rows * dim]);
        }
    }
    for i in 0..rows {
        for t in &tors {
            let mut row = vec![0; rows * dim];
            row[i * dim..(i + 1) * dim].copy_from_slice(t);
            gens.push(row);
        }
    }
    let rhs: Vec<u64> = b.iter().flat_map(|e| e.coeffs.iter().copied()).collect();
    let solved = zmod::solve_left(m, &gens, rows * dim, Some(&rhs));
    // the kernel on the x-part: projections of kernel vectors plus x-torsion
    let mut krows: Vec<Vec<u64>> = solved.kernel.rows().iter().map(|k| k[..n_x].to_vec()).collect();
    for j in 0..cols {
        for t in &tors {
            let mut row = vec![0; n_x];
            row[j * dim..(j + 1) * dim].copy_from_slice(t);
            krows.push(row);
        }
    }
    let kernel_howell = zmod::HowellForm::new(m, n_x, krows);
    let split = |flat: &[u64]| -> Vec<GroupRingElem> {
        (0..cols).map(|j| base.elem_from_flat(flat[j * dim..(j + 1) * dim].to_vec())).collect()
    };
    let particular = solved.solution.map(|x| {
        let canon = kernel_howell.reduce(&x[..n_x]);
        split(&canon)
    });
    let kernel = kernel_howell.rows().iter().map(|r| split(r)).collect();
    Ok(RgSolution { solvable: particular.is_some(), particular, kernel, kernel_howell })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn base(p: u64, n: u32, orders: Vec<u64>) -> Base {
        GroupRing::new(TruncatedLocalRing::integers(p, n).unwrap(), FinAbGroup::new(orders).unwrap())
    }

    #[test]
    fn norm_and_augmentation() {
        let b = base(3, 2, vec![3]);
        let n = b.norm_element(&[1]).unwrap();
        assert_eq!(n.support(), vec![0, 1, 2]);
        assert_eq!(n.augmentation(), b.ring().from_int(3));
        assert!(b.norm_element(&[7]).is_err());
    }

    #[test]
    fn idempotents_over_z9() {
        let r = TruncatedLocalRing::integers(3, 2).unwrap();
        let g = FinAbGroup::cyclic(2).unwrap();
        let b = GroupRing::new(Arc::clone(&r), g.clone());
        let triv = Character::from_exponents(&r, &g, &[0]).unwrap().idempotent(&b).unwrap();
        assert_eq!(triv, b.from_terms(&[(vec![0], vec![5]), (vec![1], vec![5])]).unwrap());
        let sign = Character::from_exponents(&r, &g, &[1]).unwrap().idempotent(&b).unwrap();
        assert_eq!(sign, b.from_terms(&[(vec![0], vec![5]), (vec![1], vec![-5])]).unwrap());
        assert_eq!(&sign * &sign, sign);
        assert!((&sign * &triv).is_zero());
        // Z/9 has no primitive fourth root of unity
        let c4 = FinAbGroup::cyclic(4).unwrap();
        assert_eq!(Character::from_exponents(&r, &c4, &[1]).unwrap_err(), Error::MissingRoots);
        let c3 = FinAbGroup::cyclic(3).unwrap();
        assert_eq!(Character::from_exponents(&r, &c3, &[1]).unwrap_err(), Error::OrderNotCoprime(3));
    }

    #[test]
    fn idempotents_sum_to_one_over_z25() {
        let r = TruncatedLocalRing::integers(5, 2).unwrap();
        let g = FinAbGroup::new(vec![2, 2]).unwrap();
        let b = GroupRing::new(Arc::clone(&r), g.clone());
        let es: Vec<_> = Character::all(&r, &g).unwrap().iter().map(|c| c.idempotent(&b).unwrap()).collect();
        let sum = es.iter().fold(b.zero(), |acc, e| &acc + e);
        assert_eq!(sum, b.one());
        for (i, e) in es.iter().enumerate() {
            assert_eq!(&(e * e), e);
            for f in &es[i + 1..] {
                assert!((e * f).is_zero());
            }
        }
        for chi in Character::all(&r, &g).unwrap() {
            let e = chi.idempotent(&b).unwrap();
            for d in 0..g.order() {
                assert_eq!(&b.group_elem(d) * &e, e.scale(&chi.value(d)));
            }
        }
    }

    #[test]
    fn evaluation_map() {
        let b = base(3, 2, vec![3]);
        let r = b.ring();
        let ev1 = EvalHom::new(&b, 0, &r.one()).unwrap();
        assert_eq!(ev1.apply(&b.group_elem(1)).unwrap(), ev1.dst().one());
        assert_eq!(ev1.apply(&b.norm_element(&[1]).unwrap()).unwrap(), ev1.dst().int(3));
        let ev4 = EvalHom::new(&b, 0, &r.from_int(4)).unwrap();
        assert_eq!(ev4.apply(&b.group_elem(2)).unwrap(), ev4.dst().int(7));
        assert_eq!(EvalHom::new(&b, 0, &r.from_int(2)).unwrap_err(), Error::NotOneModPi);
        // 1 + 3 has order 3 mod 9 but not mod 27 when the factor has order 3
        let b27 = base(3, 3, vec![3]);
        assert!(matches!(
            EvalHom::new(&b27, 0, &b27.ring().from_int(4)),
            Err(Error::IllDefinedEvaluation(_))
        ));
    }

    #[test]
    fn howell_solve_two_mod_four() {
        let b = base(2, 2, vec![]);
        let s = howell_solve(&b, &[vec![b.int(2)]], &[b.int(2)]).unwrap();
        assert!(s.solvable);
        assert_eq!(s.particular.unwrap(), vec![b.int(1)]);
        assert_eq!(s.kernel, vec![vec![b.int(2)]]);
        let s = howell_solve(&b, &[vec![b.int(2)]], &[b.int(1)]).unwrap();
        assert!(!s.solvable);
        assert!(howell_solve(&b, &[vec![b.int(2)]], &[]).is_err());
    }

    fn arb_elem(b: Base) -> impl Strategy<Value = GroupRingElem> {
        let dim = b.dim();
        proptest::collection::vec(0u64..9, dim).prop_map(move |v| b.elem_from_flat(v))
    }

    proptest! {
        #[test]
        fn augmentation_kills_augmentation_ideal(x in arb_elem(base(3, 2, vec![3]))) {
            let b = x.base().clone();
            let y = &(&b.group_elem(1) - &b.one()) * &x;
            prop_assert!(y.augmentation().is_zero());
        }

        #[test]
        fn evaluation_is_multiplicative(x in arb_elem(base(3, 2, vec![3, 2])), y in arb_elem(base(3, 2, vec![3, 2]))) {
            let b = x.base().clone();
            let ev = EvalHom::new(&b, 0, &b.ring().from_int(4)).unwrap();
            let y = b.elem_from_flat(y.into_coeffs());
            prop_assert_eq!(ev.apply(&(&x * &y)).unwrap(), &ev.apply(&x).unwrap() * &ev.apply(&y).unwrap());
            prop_assert!(ev.apply(&(&b.group_elem(1) - &b.scalar(&b.ring().from_int(4)))).unwrap().is_zero());
        }

        #[test]
        fn solve_resubstitutes(entries in proptest::collection::vec(proptest::collection::vec(0u64..9, 3), 9),
                               rhs in proptest::collection::vec(proptest::collection::vec(0u64..9, 3), 3)) {
            let b = base(3, 2, vec![3]);
            let a: Vec<Vec<GroupRingElem>> = entries.chunks(3)
                .map(|row| row.iter().map(|v| b.elem_from_flat(v.clone())).collect())
                .collect();
            let rhs: Vec<GroupRingElem> = rhs.into_iter().map(|v| b.elem_from_flat(v)).collect();
            let s = howell_solve(&b, &a, &rhs).unwrap();
            let apply = |x: &[GroupRingElem]| -> Vec<GroupRingElem> {
                a.iter().map(|row| row.iter().zip(x).fold(b.zero(), |acc, (aij, xj)| &acc + &(aij * xj))).collect()
            };
            if let Some(x) = &s.particular {
                prop_assert_eq!(apply(x), rhs.clone());
            }
            for k in &s.kernel {
                prop_assert!(apply(k).iter().all(|e| e.is_zero()));
            }
            // a right-hand side built from a known x is always solvable
            let x0 = vec![b.group_elem(1), b.int(2), b.zero()];
            prop_assert!(howell_solve(&b, &a, &apply(&x0)).unwrap().solvable);
        }
    }
}
