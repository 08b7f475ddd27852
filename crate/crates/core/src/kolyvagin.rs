//! Kolyvagin operators `D_n` and the projector `s_n` on `R[H]/I_H J`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{Base, GroupHom, GroupRingElem};
use crate::zmod::HowellForm;

/// A cyclic factor `j` of the ambient group together with its declared
/// generator `σ` (a group element index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeFactor {
    pub factor: usize,
    pub sigma: usize,
}

fn check_generator(base: &Base, pf: PrimeFactor) -> Result<u64> {
    let g = base.group();
    if pf.factor >= g.rank() || pf.sigma >= g.order() {
        return Err(Error::NonGenerator(format!("σ index {} for factor {}", pf.sigma, pf.factor)));
    }
    let m = g.cyclic_orders()[pf.factor];
    let exps = g.exponents(pf.sigma);
    let outside = exps.iter().enumerate().any(|(j, &e)| j != pf.factor && e != 0);
    if outside || g.element_order(pf.sigma) != m {
        return Err(Error::NonGenerator(format!("{:?} in factor {} of order {m}", exps, pf.factor)));
    }
    Ok(m)
}

/// `D_σ = Σ_{i=1}^{m-1} i σ^i` for one prime.
pub fn kolyvagin_single(base: &Base, pf: PrimeFactor) -> Result<GroupRingElem> {
    let m = check_generator(base, pf)?;
    let g = base.group();
    let mut d = base.zero();
    for i in 1..m {
        d = &d + &base.group_elem(g.pow(pf.sigma, i as i64)).scale_int(i as i64);
    }
    Ok(d)
}

/// `D_n = ∏_ℓ D_ℓ`; the factors must be distinct.
pub fn kolyvagin_d(base: &Base, primes: &[PrimeFactor]) -> Result<GroupRingElem> {
    for (i, a) in primes.iter().enumerate() {
        if primes[i + 1..].iter().any(|b| b.factor == a.factor) {
            return Err(Error::NonGenerator(format!("factor {} listed twice", a.factor)));
        }
    }
    primes.iter().try_fold(base.one(), |acc, &pf| Ok(&acc * &kolyvagin_single(base, pf)?))
}

/// `s_n = Σ_{d|n} (-1)^{ε(n/d)} π_d` on `R[H]/I_H J`, with `H = ∏_j H_j`
/// the whole group of `base` and `J = ∏_j I(H_j) R[H]`.
#[derive(Debug, Clone)]
pub struct SnProjector {
    base: Base,
    primes: Vec<PrimeFactor>,
    relations: HowellForm,
    j_span: HowellForm,
    projections: Vec<(i64, GroupHom)>,
}

impl SnProjector {
    pub fn new(base: &Base, sigmas: &[usize]) -> Result<Self> {
        let g = base.group();
        if sigmas.len() != g.rank() {
            return Err(Error::MalformedQuotient(format!(
                "{} generators given for a group with {} factors",
                sigmas.len(),
                g.rank()
            )));
        }
        let primes: Vec<PrimeFactor> =
            sigmas.iter().enumerate().map(|(factor, &sigma)| PrimeFactor { factor, sigma }).collect();
        for &pf in &primes {
            check_generator(base, pf).map_err(|e| Error::MalformedQuotient(e.to_string()))?;
        }
        let j_gen = primes.iter().fold(base.one(), |acc, pf| &acc * &(&base.group_elem(pf.sigma) - &base.one()));
        let rel_gens: Vec<GroupRingElem> =
            primes.iter().map(|pf| &(&base.group_elem(pf.sigma) - &base.one()) * &j_gen).collect();
        let relations = base.ideal_span(&rel_gens);
        let j_span = base.ideal_span(&[j_gen]).sum(&relations);
        let r = primes.len();
        let mut projections = Vec::new();
        for mask in 0u32..(1 << r) {
            let killed: Vec<usize> = (0..r).filter(|j| mask & (1 << j) == 0).collect();
            let sign = if killed.len().is_multiple_of(2) { 1 } else { -1 };
            projections.push((sign, GroupHom::kill_factors_in_place(base, &killed)?));
        }
        Ok(SnProjector { base: Arc::clone(base), primes, relations, j_span, projections })
    }

    pub fn base(&self) -> &Base {
        &self.base
    }

    pub fn primes(&self) -> &[PrimeFactor] {
        &self.primes
    }

    /// `∏_j (σ_j - 1)`.
    pub fn j_generator(&self) -> GroupRingElem {
        let b = &self.base;
        self.primes.iter().fold(b.one(), |acc, pf| &acc * &(&b.group_elem(pf.sigma) - &b.one()))
    }

    /// Howell form of `I_H J` in the flattening of `R[H]`.
    pub fn relations(&self) -> &HowellForm {
        &self.relations
    }

    /// Howell form of `J` (which contains `I_H J`).
    pub fn j_span(&self) -> &HowellForm {
        &self.j_span
    }

    /// Canonical representative of the class of `x` in `R[H]/I_H J`.
    pub fn canonical(&self, x: &GroupRingElem) -> GroupRingElem {
        self.base.elem_from_flat(self.relations.reduce(x.coeffs()))
    }

    pub fn congruent(&self, x: &GroupRingElem, y: &GroupRingElem) -> bool {
        self.canonical(x) == self.canonical(y)
    }

    pub fn apply(&self, x: &GroupRingElem) -> Result<GroupRingElem> {
        let mut acc = self.base.zero();
        for (sign, proj) in &self.projections {
            acc = &acc + &proj.apply(x)?.scale_int(*sign);
        }
        Ok(self.canonical(&acc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::TruncatedLocalRing;
    use crate::group::{FinAbGroup, GroupRing};

    fn base(p: u64, n: u32, orders: Vec<u64>) -> Base {
        GroupRing::new(TruncatedLocalRing::integers(p, n).unwrap(), FinAbGroup::new(orders).unwrap())
    }

    #[test]
    fn d_for_order_three() {
        let b = base(3, 2, vec![3]);
        let d = kolyvagin_d(&b, &[PrimeFactor { factor: 0, sigma: 1 }]).unwrap();
        assert_eq!(d, b.from_terms(&[(vec![1], vec![1]), (vec![2], vec![2])]).unwrap());
        let sigma_minus_one = &b.group_elem(1) - &b.one();
        assert_eq!(&sigma_minus_one * &d, &b.int(3) - &b.norm_element(&[1]).unwrap());
    }

    #[test]
    fn rejects_non_generators() {
        let b = base(3, 2, vec![9]);
        assert!(matches!(kolyvagin_d(&b, &[PrimeFactor { factor: 0, sigma: 3 }]), Err(Error::NonGenerator(_))));
        let b2 = base(3, 2, vec![3, 3]);
        // (1, 1) is not inside the first factor
        assert!(kolyvagin_d(&b2, &[PrimeFactor { factor: 0, sigma: 4 }]).is_err());
    }

    #[test]
    fn two_prime_operator_expands() {
        let b = base(3, 2, vec![3, 3]);
        let g = b.group();
        let d = kolyvagin_d(
            &b,
            &[PrimeFactor { factor: 0, sigma: g.generator(0) }, PrimeFactor { factor: 1, sigma: g.generator(1) }],
        )
        .unwrap();
        assert_eq!(d.support().len(), 4);
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let idx = g.index_of(&[i, j]).unwrap();
            assert_eq!(d.coeff(idx), b.ring().from_int(i * j));
        }
    }

    #[test]
    fn sn_on_one_prime() {
        let b = base(3, 2, vec![3]);
        let s = SnProjector::new(&b, &[1]).unwrap();
        let sm1 = &b.group_elem(1) - &b.one();
        assert!(s.congruent(&s.apply(&sm1).unwrap(), &sm1));
        assert!(s.apply(&b.one()).unwrap().is_zero());
        assert!(matches!(SnProjector::new(&b, &[]), Err(Error::MalformedQuotient(_))));
    }
}
