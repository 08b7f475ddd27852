use proptest::prelude::*;

use iwlab_core::coeff::{Ring, TruncatedLocalRing};
use iwlab_core::iwasawa::{self, ElementaryModule, HeightOnePrime, Poly, PolyIdeal};

fn z(p: u64, n: u32) -> Ring {
    TruncatedLocalRing::integers(p, n).unwrap()
}

/// Thirty ideals of `Z/81[[T]]`: principal products of `3`, `T`, `T+3`
/// and a few two-generator ideals.
fn pool(r: &Ring) -> Vec<(String, PolyIdeal)> {
    let t = Poly::var(r);
    let g = Poly::from_ints(r, &[3, 1]);
    let mut out = Vec::new();
    for a in 0..=1u32 {
        for b in 0..=2u32 {
            for c in 0..=1u32 {
                let f = Poly::from_ints(r, &[3i64.pow(a)]).mul(&t.pow(b)).mul(&g.pow(c));
                out.push((format!("3^{a} T^{b} (T+3)^{c}"), PolyIdeal::one_var(r, vec![f], 16).unwrap()));
            }
        }
    }
    let two: [(&str, &[&[i64]]); 18] = [
        ("(T^2, 3T)", &[&[0, 0, 1], &[0, 3]]),
        ("(3, T)", &[&[3], &[0, 1]]),
        ("(9, T^2)", &[&[9], &[0, 0, 1]]),
        ("(9, 3T, T^2)", &[&[9], &[0, 3], &[0, 0, 1]]),
        ("(T^3, 3T^2)", &[&[0, 0, 0, 1], &[0, 0, 3]]),
        ("(T^2, 9T)", &[&[0, 0, 1], &[0, 9]]),
        ("(3T, T^2+3T)", &[&[0, 3], &[0, 3, 1]]),
        ("(T+3, 9)", &[&[3, 1], &[9]]),
        ("(T^2+3T, 3T+9)", &[&[0, 3, 1], &[9, 3]]),
        ("(3T, 9)", &[&[0, 3], &[9]]),
        ("(T, 27)", &[&[0, 1], &[27]]),
        ("(T^2, 27)", &[&[0, 0, 1], &[27]]),
        ("(3T^2, 9T)", &[&[0, 0, 3], &[0, 9]]),
        ("(T^2, 3)", &[&[0, 0, 1], &[3]]),
        ("(T^2+3, 9)", &[&[3, 0, 1], &[9]]),
        ("(T^2+3, 3T)", &[&[3, 0, 1], &[0, 3]]),
        ("(1)", &[&[1]]),
        ("(T^3)", &[&[0, 0, 0, 1]]),
    ];
    for (name, gens) in two {
        out.push((name.to_string(), PolyIdeal::from_int_polys(r, gens, 16).unwrap()));
    }
    out
}

#[test]
fn precedes_is_a_preorder_and_equivalence_is_an_equivalence() {
    let r = z(3, 4);
    let ideals = pool(&r);
    assert_eq!(ideals.len(), 30);
    let n = ideals.len();
    let rel: Vec<Vec<bool>> = ideals
        .iter()
        .map(|(_, a)| ideals.iter().map(|(_, b)| iwasawa::precedes(a, b).unwrap().holds).collect())
        .collect();
    for x in 0..n {
        assert!(rel[x][x], "{} ≺ itself fails", ideals[x].0);
        for y in 0..n {
            let eq = iwasawa::equivalent(&ideals[x].1, &ideals[y].1).unwrap();
            assert_eq!(eq, rel[x][y] && rel[y][x], "{} ∼ {}", ideals[x].0, ideals[y].0);
            for w in 0..n {
                if rel[x][y] && rel[y][w] {
                    assert!(rel[x][w], "{} ≺ {} ≺ {} but not {} ≺ {}", ideals[x].0, ideals[y].0, ideals[w].0, ideals[x].0, ideals[w].0);
                }
            }
        }
    }
}

#[test]
fn containment_implies_precedes_with_certificate() {
    let r = z(3, 4);
    let ideals = pool(&r);
    for (na, a) in &ideals {
        for (nb, b) in &ideals {
            if a.contained_in(b).unwrap() {
                let c = iwasawa::precedes(a, b).unwrap();
                assert!(c.holds && c.via_containment, "{na} ⊆ {nb}");
                assert!(c.certificate.as_ref().is_some_and(|x| x.verified), "{na} ⊆ {nb}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// `E = [π^μ g^a h, g^b]` with `b ≤ a` and total degree at most three.
    /// The root of `h` sits at distance exactly `p` from that of `g`, so
    /// `h` contributes a constant from `n = 1` on.
    #[test]
    fn slope_equals_order_at_the_prime(root in 0i64..3, a in 1u32..=3, b in 0u32..=3, mu in 0u32..=1, extra in any::<bool>()) {
        let b = b.min(a);
        // two cubics already give C(6) = 36, the most precision 37 shows
        let mu = if a + b == 6 { 0 } else { mu };
        let r = z(3, 37);
        let g = Poly::from_ints(&r, &[-3 * root, 1]);
        let h = if extra && a < 3 { Poly::from_ints(&r, &[3 - 3 * root, 1]) } else { Poly::one(&r) };
        let top = Poly::from_ints(&r, &[3i64.pow(mu)]).mul(&g.pow(a)).mul(&h);
        let e = ElementaryModule::new(&r, vec![top, g.pow(b)]).unwrap();
        let prime = HeightOnePrime::distinguished(g.clone()).unwrap();
        for i in 0..=1 {
            let rep = iwasawa::slope_check(&e, i, &g, 6).unwrap();
            let fitt = iwasawa::elementary_fitting(&e, i, 0).unwrap();
            prop_assert_eq!(rep.valuation, iwasawa::valuation_at_prime(&fitt, &prime).unwrap());
            prop_assert_eq!(rep.slope, Some(rep.valuation as i64), "i = {}", i);
            prop_assert!(rep.slope_matches && rep.offset_constant);
        }
    }
}

/// A factor whose root is `p^2`-close to the reference root adds a transient:
/// the first differences are off, the tail runs at slope `ord`.
#[test]
fn close_roots_only_delay_the_slope() {
    let r = z(3, 24);
    let t = Poly::var(&r);
    let e = ElementaryModule::new(&r, vec![t.mul(&Poly::from_ints(&r, &[9, 1]))]).unwrap();
    let rep = iwasawa::slope_check(&e, 0, &t, 6).unwrap();
    let values: Vec<u32> = rep.values.iter().map(|v| v.1).collect();
    assert_eq!(values, vec![2, 4, 5, 6, 7, 8]);
    assert_eq!(rep.valuation, 1);
    assert!(!rep.slope_matches && !rep.offset_constant);
    assert!(values[1..].windows(2).all(|w| w[1] - w[0] == rep.valuation));
}
