//! Truncated local rings `O / π^N O` for an unramified or Eisenstein extension
//! `O` of `Z_p`.
//!
//! Elements are stored in the power basis `1, x, …, x^{d-1}` of `Z_p[x]/(f)`.
//! Coordinate `k` is reduced modulo `p^{m_k}` where `m_k = ⌈(N - k)/e⌉`
//! (`e = 1` unramified, `e = d` ramified), which is exactly the lattice
//! `π^N O` in that basis. In the unramified case every `m_k` equals `N`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zmod::{self, PrimePowerModulus};

/// Largest working modulus `p^M` accepted; keeps products inside `u128`.
const MAX_MODULUS: u64 = 1 << 60;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncatedLocalRing {
    p: u64,
    precision: u32,
    /// Monic defining polynomial, lowest degree first, coefficients mod `p^M`.
    poly: Vec<u64>,
    ramified: bool,
    degree: usize,
    work: PrimePowerModulus,
    coord_exp: Vec<u32>,
    coord_mod: Vec<u64>,
}

/// JSON shape `{"p": 3, "N": 2, "poly": [1], "ramified": false}`.
///
/// `poly` lists the defining polynomial lowest degree first; the one-element
/// list `[1]` is shorthand for `Z_p` itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingDescriptor {
    pub p: u64,
    #[serde(rename = "N")]
    pub precision: u32,
    #[serde(default = "default_poly")]
    pub poly: Vec<i64>,
    #[serde(default)]
    pub ramified: bool,
}

fn default_poly() -> Vec<i64> {
    vec![1]
}

pub type Ring = Arc<TruncatedLocalRing>;

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn ceil_div(a: u32, b: u32) -> u32 {
    a.div_ceil(b)
}

impl TruncatedLocalRing {
    /// `Z / p^N`.
    pub fn integers(p: u64, precision: u32) -> Result<Ring> {
        Self::new(p, precision, &[1], false)
    }

    pub fn new(p: u64, precision: u32, poly: &[i64], ramified: bool) -> Result<Ring> {
        Self::build(p, precision, poly, ramified).map(Arc::new)
    }

    pub fn from_descriptor(desc: &RingDescriptor) -> Result<Ring> {
        Self::new(desc.p, desc.precision, &desc.poly, desc.ramified)
    }

    fn build(p: u64, precision: u32, poly: &[i64], ramified: bool) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidRing(format!("{p} is not prime")));
        }
        if precision == 0 {
            return Err(Error::InvalidRing("precision must be positive".into()));
        }
        let poly: Vec<i64> = if poly == [1] { vec![0, 1] } else { poly.to_vec() };
        if poly.len() < 2 {
            return Err(Error::InvalidRing("defining polynomial must have degree >= 1".into()));
        }
        if *poly.last().unwrap() != 1 {
            return Err(Error::InvalidRing("defining polynomial must be monic".into()));
        }
        let degree = poly.len() - 1;
        let e = if ramified { degree as u32 } else { 1 };
        let exp = ceil_div(precision, e);
        let modulus = p
            .checked_pow(exp)
            .filter(|&m| m <= MAX_MODULUS)
            .ok_or_else(|| Error::InvalidRing(format!("p^{exp} exceeds the supported modulus")))?;
        let work = PrimePowerModulus::new(p, exp);
        let coord_exp: Vec<u32> = (0..degree as u32)
            .map(|k| if ramified { ceil_div(precision.saturating_sub(k), e) } else { precision })
            .collect();
        let coord_mod = coord_exp.iter().map(|&m| p.pow(m)).collect();
        let reduced: Vec<u64> = poly.iter().map(|&c| c.rem_euclid(modulus as i64) as u64).collect();

        if ramified {
            let pi = p as i64;
            let lower_ok = poly[..degree].iter().all(|c| c.rem_euclid(pi) == 0);
            let const_ok = poly[0].rem_euclid(pi * pi) != 0;
            if !(lower_ok && const_ok) {
                return Err(Error::InvalidRing("ramified ring needs an Eisenstein polynomial".into()));
            }
        } else {
            let residue: Vec<u64> = poly.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
            if !irreducible_mod_p(&residue, p)? {
                return Err(Error::InvalidRing("defining polynomial is reducible mod p".into()));
            }
        }

        Ok(TruncatedLocalRing {
            p,
            precision,
            poly: reduced,
            ramified,
            degree,
            work,
            coord_exp,
            coord_mod,
        })
    }

    pub fn descriptor(&self) -> RingDescriptor {
        let poly = if self.degree == 1 && self.poly[0] == 0 {
            vec![1]
        } else {
            self.poly.iter().map(|&c| c as i64).collect()
        };
        RingDescriptor { p: self.p, precision: self.precision, poly, ramified: self.ramified }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_ramified(&self) -> bool {
        self.ramified
    }

    pub fn ramification_index(&self) -> u32 {
        if self.ramified {
            self.degree as u32
        } else {
            1
        }
    }

    /// The working modulus `p^M` over which the additive group is presented.
    pub fn modulus(&self) -> PrimePowerModulus {
        self.work
    }

    /// Coordinate `k` is defined modulo `p^{coord_exp[k]}`.
    pub fn coord_exp(&self) -> &[u32] {
        &self.coord_exp
    }

    /// Size of the residue field.
    pub fn residue_field_size(&self) -> u64 {
        if self.ramified {
            self.p
        } else {
            self.p.pow(self.degree as u32)
        }
    }

    /// `log_p` of the number of elements.
    pub fn log_size(&self) -> u32 {
        self.coord_exp.iter().sum()
    }

    /// Same extension at a lower precision.
    pub fn with_precision(&self, precision: u32) -> Result<Ring> {
        if precision == 0 || precision > self.precision {
            return Err(Error::BadPrecision { requested: precision, available: self.precision });
        }
        let poly: Vec<i64> = self.poly.iter().map(|&c| c as i64).collect();
        Self::new(self.p, precision, &poly, self.ramified)
    }

    // ---- slice-level arithmetic -------------------------------------------------

    pub fn zero_coeffs(&self) -> Vec<u64> {
        vec![0; self.degree]
    }

    pub fn int_coeffs(&self, n: i64) -> Vec<u64> {
        let mut v = self.zero_coeffs();
        v[0] = n.rem_euclid(self.coord_mod[0] as i64) as u64;
        v
    }

    pub fn normalize(&self, v: &mut [u64]) {
        for (c, &m) in v.iter_mut().zip(&self.coord_mod) {
            *c %= m;
        }
    }

    pub fn is_zero_coeffs(&self, a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add_coeffs(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .zip(&self.coord_mod)
            .map(|((&x, &y), &m)| {
                let s = x + y;
                if s >= m {
                    s - m
                } else {
                    s
                }
            })
            .collect()
    }

    pub fn add_assign_coeffs(&self, a: &mut [u64], b: &[u64]) {
        for ((x, &y), &m) in a.iter_mut().zip(b).zip(&self.coord_mod) {
            let s = *x + y;
            *x = if s >= m { s - m } else { s };
        }
    }

    pub fn sub_coeffs(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .zip(&self.coord_mod)
            .map(|((&x, &y), &m)| if x >= y { x - y } else { x + m - y })
            .collect()
    }

    pub fn neg_coeffs(&self, a: &[u64]) -> Vec<u64> {
        a.iter().zip(&self.coord_mod).map(|(&x, &m)| if x == 0 { 0 } else { m - x }).collect()
    }

    pub fn mul_coeffs(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let m = self.work.modulus();
        if self.degree == 1 {
            return vec![zmod::mulmod(a[0], b[0], self.coord_mod[0])];
        }
        let d = self.degree;
        let mut prod = vec![0u64; 2 * d - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                prod[i + j] = zmod::addmod(prod[i + j], zmod::mulmod(x, y, m), m);
            }
        }
        // x^d = -(f_0 + f_1 x + ... + f_{d-1} x^{d-1})
        for k in (d..2 * d - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for j in 0..d {
                let t = zmod::mulmod(c, self.poly[j], m);
                prod[k - d + j] = zmod::submod(prod[k - d + j], t, m);
            }
        }
        prod.truncate(d);
        self.normalize(&mut prod);
        prod
    }

    pub fn pow_coeffs(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let mut base = a.to_vec();
        let mut acc = self.int_coeffs(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_coeffs(&acc, &base);
            }
            base = self.mul_coeffs(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Multiply by an integer.
    pub fn scale_coeffs(&self, a: &[u64], n: i64) -> Vec<u64> {
        let s = self.int_coeffs(n);
        if self.degree == 1 {
            return self.mul_coeffs(a, &s);
        }
        let m = self.work.modulus();
        let k = s[0];
        let mut v: Vec<u64> = a.iter().map(|&x| zmod::mulmod(x, k, m)).collect();
        self.normalize(&mut v);
        v
    }

    /// π-adic valuation, `N` for the zero element.
    pub fn valuation_coeffs(&self, a: &[u64]) -> u32 {
        let e = self.ramification_index();
        let mut best = self.precision;
        for (k, &c) in a.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let shift = if self.ramified { k as u32 } else { 0 };
            let v = shift + e * self.work.valuation(c);
            best = best.min(v);
        }
        best
    }

    pub fn inv_coeffs(&self, a: &[u64]) -> Result<Vec<u64>> {
        let v = self.valuation_coeffs(a);
        if v > 0 {
            return Err(Error::NonUnit(v));
        }
        let one = self.int_coeffs(1);
        if self.degree == 1 {
            return Ok(vec![self.work.unit_inv(a[0])]);
        }
        // inverse modulo π from the residue field, then Newton steps x <- x(2 - a x)
        let q = self.residue_field_size();
        let mut x = self.pow_coeffs(a, q - 2);
        let two = self.int_coeffs(2);
        for _ in 0..64 {
            let ax = self.mul_coeffs(a, &x);
            if ax == one {
                return Ok(x);
            }
            x = self.mul_coeffs(&x, &self.sub_coeffs(&two, &ax));
        }
        unreachable!("Newton inversion failed to converge on a unit")
    }

    /// The uniformizer: `p` when unramified, `x` when ramified.
    pub fn uniformizer_coeffs(&self) -> Vec<u64> {
        if self.ramified && self.degree > 1 {
            let mut v = self.zero_coeffs();
            v[1] = 1 % self.coord_mod[1];
            v
        } else if self.ramified {
            // degree one Eisenstein: x = -f_0
            let mut v = self.zero_coeffs();
            v[0] = (self.coord_mod[0] - self.poly[0] % self.coord_mod[0]) % self.coord_mod[0];
            v
        } else {
            self.int_coeffs(self.p as i64)
        }
    }

    // ---- element-level API --------------------------------------------------------

    pub fn elem(self: &Arc<Self>, coeffs: Vec<u64>) -> RingElem {
        let mut coeffs = coeffs;
        coeffs.resize(self.degree, 0);
        self.normalize(&mut coeffs);
        RingElem { ring: Arc::clone(self), coeffs }
    }

    pub fn from_int(self: &Arc<Self>, n: i64) -> RingElem {
        RingElem { ring: Arc::clone(self), coeffs: self.int_coeffs(n) }
    }

    /// Element from signed power-basis coordinates.
    pub fn from_signed(self: &Arc<Self>, coords: &[i64]) -> Result<RingElem> {
        if coords.len() > self.degree {
            return Err(Error::Input(format!(
                "element has {} coordinates, ring degree is {}",
                coords.len(),
                self.degree
            )));
        }
        let mut v = self.zero_coeffs();
        for (k, &c) in coords.iter().enumerate() {
            v[k] = c.rem_euclid(self.coord_mod[k] as i64) as u64;
        }
        Ok(RingElem { ring: Arc::clone(self), coeffs: v })
    }

    pub fn zero(self: &Arc<Self>) -> RingElem {
        self.from_int(0)
    }

    pub fn one(self: &Arc<Self>) -> RingElem {
        self.from_int(1)
    }

    pub fn uniformizer(self: &Arc<Self>) -> RingElem {
        RingElem { ring: Arc::clone(self), coeffs: self.uniformizer_coeffs() }
    }

    /// Generator `x` of the power basis.
    pub fn generator(self: &Arc<Self>) -> RingElem {
        if self.degree == 1 {
            let c = (self.coord_mod[0] - self.poly[0] % self.coord_mod[0]) % self.coord_mod[0];
            return RingElem { ring: Arc::clone(self), coeffs: vec![c] };
        }
        let mut v = self.zero_coeffs();
        v[1] = 1;
        self.normalize(&mut v);
        RingElem { ring: Arc::clone(self), coeffs: v }
    }

    /// Every element, in coordinate order. Intended for small rings.
    pub fn elements(self: &Arc<Self>) -> Vec<RingElem> {
        let mut out = vec![self.zero_coeffs()];
        for k in 0..self.degree {
            let m = self.coord_mod[k];
            let mut next = Vec::with_capacity(out.len() * m as usize);
            for c in 0..m {
                for v in &out {
                    let mut w = v.clone();
                    w[k] = c;
                    next.push(w);
                }
            }
            out = next;
        }
        out.into_iter().map(|c| RingElem { ring: Arc::clone(self), coeffs: c }).collect()
    }

    /// All `z` with `z^order = 1`, as Teichmüller lifts of residue-field roots.
    pub fn roots_of_unity(self: &Arc<Self>, order: u64) -> Result<Vec<RingElem>> {
        if order == 0 || order.is_multiple_of(self.p) {
            return Err(Error::OrderDivisibleByP(order));
        }
        let q = self.residue_field_size();
        let one = self.int_coeffs(1);
        let mut roots = std::collections::BTreeSet::new();
        for rep in self.residue_representatives() {
            if self.valuation_coeffs(&rep) > 0 {
                continue;
            }
            let mut w = rep;
            for _ in 0..=self.precision + 1 {
                let next = self.pow_coeffs(&w, q);
                if next == w {
                    break;
                }
                w = next;
            }
            if self.pow_coeffs(&w, order) == one {
                roots.insert(w);
            }
        }
        let expected = gcd(order, q - 1);
        let roots: Vec<RingElem> =
            roots.into_iter().map(|c| RingElem { ring: Arc::clone(self), coeffs: c }).collect();
        debug_assert_eq!(roots.len() as u64, expected);
        Ok(roots)
    }

    fn residue_representatives(&self) -> Vec<Vec<u64>> {
        let width = if self.ramified { 1 } else { self.degree };
        let mut out = vec![self.zero_coeffs()];
        for k in 0..width {
            let mut next = Vec::new();
            for c in 0..self.p {
                for v in &out {
                    let mut w = v.clone();
                    w[k] = c % self.coord_mod[k];
                    next.push(w);
                }
            }
            out = next;
        }
        out
    }

    /// Ring homomorphism to a lower precision.
    pub fn reduce_coeffs_to(&self, a: &[u64], target: &TruncatedLocalRing) -> Vec<u64> {
        let mut v = a.to_vec();
        target.normalize(&mut v);
        v
    }

    /// Whether `other` is this ring at some precision `<=` ours.
    pub fn is_reduction_target(&self, other: &TruncatedLocalRing) -> bool {
        self.p == other.p
            && self.ramified == other.ramified
            && self.degree == other.degree
            && other.precision <= self.precision
            && self
                .poly
                .iter()
                .zip(&other.poly)
                .all(|(&a, &b)| a % other.work.modulus() == b)
    }
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Irreducibility over `F_p` by searching for monic factors of degree `<= d/2`.
fn irreducible_mod_p(f: &[u64], p: u64) -> Result<bool> {
    let d = f.len() - 1;
    if d == 1 {
        return Ok(true);
    }
    for k in 1..=d / 2 {
        let count = p.checked_pow(k as u32).filter(|&c| c <= 1_000_000).ok_or_else(|| {
            Error::InvalidRing("irreducibility search too large".into())
        })?;
        for idx in 0..count {
            let mut g = Vec::with_capacity(k + 1);
            let mut t = idx;
            for _ in 0..k {
                g.push(t % p);
                t /= p;
            }
            g.push(1);
            if poly_rem_mod_p(f, &g, p).iter().all(|&c| c == 0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn poly_rem_mod_p(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    let mut r = f.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let lead = *r.last().unwrap() % p;
        let shift = r.len() - 1 - dg;
        for (j, &gj) in g.iter().enumerate() {
            r[shift + j] = (r[shift + j] + p * p - lead * gj % p) % p;
        }
        r.pop();
    }
    r
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingElem {
    ring: Ring,
    coeffs: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingOp {
    Add,
    Sub,
    Mul,
}

impl RingElem {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    fn same_ring(&self, other: &RingElem) -> bool {
        Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring
    }

    /// Checked ring operation.
    pub fn arith(&self, other: &RingElem, op: RingOp) -> Result<RingElem> {
        if !self.same_ring(other) {
            return Err(Error::RingMismatch);
        }
        let r = &self.ring;
        let coeffs = match op {
            RingOp::Add => r.add_coeffs(&self.coeffs, &other.coeffs),
            RingOp::Sub => r.sub_coeffs(&self.coeffs, &other.coeffs),
            RingOp::Mul => r.mul_coeffs(&self.coeffs, &other.coeffs),
        };
        Ok(RingElem { ring: Arc::clone(r), coeffs })
    }

    pub fn is_zero(&self) -> bool {
        self.ring.is_zero_coeffs(&self.coeffs)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == self.ring.int_coeffs(1)
    }

    pub fn valuation(&self) -> u32 {
        self.ring.valuation_coeffs(&self.coeffs)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == 0
    }

    pub fn inv_unit(&self) -> Result<RingElem> {
        Ok(RingElem { ring: Arc::clone(&self.ring), coeffs: self.ring.inv_coeffs(&self.coeffs)? })
    }

    pub fn pow(&self, e: u64) -> RingElem {
        RingElem { ring: Arc::clone(&self.ring), coeffs: self.ring.pow_coeffs(&self.coeffs, e) }
    }

    /// Power with a signed exponent; negative exponents need a unit.
    pub fn pow_signed(&self, e: i64) -> Result<RingElem> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inv_unit()?.pow(e.unsigned_abs()))
        }
    }

    pub fn scale(&self, n: i64) -> RingElem {
        RingElem { ring: Arc::clone(&self.ring), coeffs: self.ring.scale_coeffs(&self.coeffs, n) }
    }

    /// Image under truncation `O/π^N -> O/π^{N'}`.
    pub fn reduce_precision(&self, precision: u32) -> Result<RingElem> {
        let target = self.ring.with_precision(precision)?;
        Ok(self.reduce_into(&target))
    }

    /// Image in an already constructed lower-precision copy of the ring.
    pub fn reduce_into(&self, target: &Ring) -> RingElem {
        debug_assert!(self.ring.is_reduction_target(target));
        RingElem { ring: Arc::clone(target), coeffs: self.ring.reduce_coeffs_to(&self.coeffs, target) }
    }

    /// Canonical signed-free coordinates for serialization.
    pub fn to_json_coords(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.coeffs.iter().map(|&c| c as i64).collect();
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
        v
    }
}

impl fmt::Debug for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.len() == 1 {
            return write!(f, "{}", self.coeffs[0]);
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(k, &c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}x"),
                _ => format!("{c}x^{k}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join("+"))
        }
    }
}

macro_rules! ring_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl std::ops::$trait<&RingElem> for &RingElem {
            type Output = RingElem;
            fn $method(self, rhs: &RingElem) -> RingElem {
                self.arith(rhs, $op).expect("ring mismatch in arithmetic")
            }
        }
        impl std::ops::$trait<RingElem> for RingElem {
            type Output = RingElem;
            fn $method(self, rhs: RingElem) -> RingElem {
                (&self).$method(&rhs)
            }
        }
    };
}

ring_binop!(Add, add, RingOp::Add);
ring_binop!(Sub, sub, RingOp::Sub);
ring_binop!(Mul, mul, RingOp::Mul);

impl std::ops::Neg for &RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        RingElem { ring: Arc::clone(&self.ring), coeffs: self.ring.neg_coeffs(&self.coeffs) }
    }
}
