use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use iwlab_core::coeff::TruncatedLocalRing;
use iwlab_core::group::{Base, FinAbGroup, GroupRing, GroupRingElem};
use iwlab_core::module::{fitting_ideal, hom_module, subsets, FPModule, IdealGens};
use iwlab_core::zmod::HowellForm;

fn base(p: u64, n: u32, orders: Vec<u64>) -> Base {
    GroupRing::new(TruncatedLocalRing::integers(p, n).unwrap(), FinAbGroup::new(orders).unwrap())
}

fn elem(b: &Base, rng: &mut ChaCha8Rng) -> GroupRingElem {
    match rng.gen_range(0..4) {
        0 => b.zero(),
        1 => {
            let m = b.modulus().modulus();
            b.elem_from_flat((0..b.dim()).map(|_| rng.gen_range(0..m)).collect())
        }
        _ => b.group_elem(rng.gen_range(0..b.group().order())).scale_int(rng.gen_range(-3..4)),
    }
}

fn rows(b: &Base, rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Vec<GroupRingElem>> {
    (0..m).map(|_| (0..n).map(|_| elem(b, rng)).collect()).collect()
}

fn module(b: &Base, seed: u64, max_gens: usize) -> FPModule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_gens);
    let m = rng.gen_range(0..=n + 1);
    FPModule::new(b, n, rows(b, &mut rng, m, n)).unwrap()
}

fn det(mat: &[Vec<GroupRingElem>], b: &Base) -> GroupRingElem {
    if mat.is_empty() {
        return b.one();
    }
    let mut acc = b.zero();
    for c in 0..mat.len() {
        let minor: Vec<Vec<GroupRingElem>> =
            mat[1..].iter().map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, x)| x.clone()).collect()).collect();
        let term = &mat[0][c] * &det(&minor, b);
        acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// All `(n - i)`-minors of the relation matrix, with no shortcuts.
fn minors_ideal(m: &FPModule, i: usize) -> IdealGens {
    let b = m.base();
    let n = m.n_gens();
    if i >= n {
        return IdealGens::unit(b);
    }
    let rel = m.relations();
    let mut gens = Vec::new();
    for rs in subsets(rel.len(), n - i) {
        for cs in subsets(n, n - i) {
            let mat: Vec<Vec<GroupRingElem>> = rs.iter().map(|&r| cs.iter().map(|&c| rel[r][c].clone()).collect()).collect();
            gens.push(det(&mat, b));
        }
    }
    IdealGens::new(b, gens)
}

fn z9_c3() -> Base {
    base(3, 2, vec![3])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fitting_ideals_increase(seed in any::<u64>()) {
        let m = module(&z9_c3(), seed, 3);
        for i in 0..=m.n_gens() {
            let (a, b) = (fitting_ideal(&m, i), fitting_ideal(&m, i + 1));
            prop_assert!(b.contains_ideal(&a), "Fitt_{} not inside Fitt_{}", i, i + 1);
        }
        prop_assert!(fitting_ideal(&m, m.n_gens()).is_unit_ideal());
    }

    #[test]
    fn fitting_ideals_match_all_minors(seed in any::<u64>()) {
        let m = module(&base(2, 2, vec![2, 2]), seed, 3);
        for i in 0..=m.n_gens() {
            prop_assert_eq!(fitting_ideal(&m, i), minors_ideal(&m, i));
        }
    }

    #[test]
    fn direct_sum_formula(s1 in any::<u64>(), s2 in any::<u64>()) {
        let b = z9_c3();
        let (m1, m2) = (module(&b, s1, 2), module(&b, s2, 2));
        let sum = m1.direct_sum(&m2).unwrap();
        for i in 0..=sum.n_gens() {
            let expected = (0..=i).fold(IdealGens::zero(&b), |acc, a| {
                acc.sum(&minors_ideal(&m1, a).product(&minors_ideal(&m2, i - a)))
            });
            prop_assert_eq!(fitting_ideal(&sum, i), expected, "i = {}", i);
        }
    }

    #[test]
    fn presentation_independence(seed in any::<u64>(), ops in 1usize..6, pad in 0usize..3) {
        let b = z9_c3();
        let m = module(&b, seed, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let n = m.n_gens();
        let mut rel: Vec<Vec<GroupRingElem>> = m.relations().to_vec();
        for _ in 0..ops {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let c = elem(&b, &mut rng);
            match rng.gen_range(0..4) {
                // change of generators
                0 if i != j => {
                    for row in rel.iter_mut() {
                        let v = &row[j] * &c;
                        row[i] = &row[i] + &v;
                    }
                }
                // row operation among relations
                1 if rel.len() > 1 => {
                    let (r, s) = (rng.gen_range(0..rel.len()), rng.gen_range(0..rel.len()));
                    if r != s {
                        let add: Vec<GroupRingElem> = rel[s].iter().map(|x| &c * x).collect();
                        for (x, y) in rel[r].iter_mut().zip(add) {
                            *x = &*x + &y;
                        }
                    }
                }
                // redundant relation
                2 if !rel.is_empty() => {
                    let s = rng.gen_range(0..rel.len());
                    let extra = rel[s].iter().map(|x| &c * x).collect();
                    rel.push(extra);
                }
                // unit rescaling of a generator (g is a unit of R[G])
                _ => {
                    let g = b.group_elem(rng.gen_range(0..b.group().order()));
                    for row in rel.iter_mut() {
                        row[i] = &row[i] * &g;
                    }
                }
            }
        }
        let other = FPModule::new(&b, n, rel).unwrap().padded(m.relations().len() + pad);
        for i in 0..=n {
            prop_assert_eq!(fitting_ideal(&m, i), fitting_ideal(&other, i), "i = {}", i);
        }
    }

    #[test]
    fn evaluation_is_bilinear(seed in any::<u64>()) {
        let b = z9_c3();
        let m = module(&b, seed, 2);
        let hom = hom_module(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(7));
        let k = hom.functionals.len();
        let n = m.n_gens();
        let f: Vec<_> = (0..k).map(|_| elem(&b, &mut rng)).collect();
        let g: Vec<_> = (0..k).map(|_| elem(&b, &mut rng)).collect();
        let x: Vec<_> = (0..n).map(|_| elem(&b, &mut rng)).collect();
        let y: Vec<_> = (0..n).map(|_| elem(&b, &mut rng)).collect();
        let c = elem(&b, &mut rng);
        let add = |u: &[GroupRingElem], v: &[GroupRingElem]| u.iter().zip(v).map(|(a, b)| a + b).collect::<Vec<_>>();
        let scale = |u: &[GroupRingElem]| u.iter().map(|a| &c * a).collect::<Vec<_>>();
        let ev = |f: &[GroupRingElem], x: &[GroupRingElem]| hom.evaluate(f, x).unwrap();
        prop_assert_eq!(ev(&add(&f, &g), &x), &ev(&f, &x) + &ev(&g, &x));
        prop_assert_eq!(ev(&f, &add(&x, &y)), &ev(&f, &x) + &ev(&f, &y));
        prop_assert_eq!(ev(&scale(&f), &x), &c * &ev(&f, &x));
        prop_assert_eq!(ev(&f, &scale(&x)), &c * &ev(&f, &x));
    }

    #[test]
    fn functionals_vanish_on_relations(seed in any::<u64>()) {
        let b = z9_c3();
        let m = module(&b, seed, 3);
        let hom = hom_module(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(!seed);
        let f: Vec<_> = (0..hom.functionals.len()).map(|_| elem(&b, &mut rng)).collect();
        for r in m.relations() {
            prop_assert!(hom.evaluate(&f, r).unwrap().is_zero());
        }
    }

    #[test]
    fn howell_form_is_idempotent(seed in any::<u64>(), ncols in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let md = iwlab_core::zmod::PrimePowerModulus::new(3, 3);
        let mut rows: Vec<Vec<u64>> = (0..rng.gen_range(0..6)).map(|_| (0..ncols).map(|_| rng.gen_range(0..27)).collect()).collect();
        let h = HowellForm::new(md, ncols, rows.clone());
        prop_assert_eq!(&HowellForm::new(md, ncols, h.rows().to_vec()), &h);
        rows.reverse();
        prop_assert_eq!(&HowellForm::new(md, ncols, rows), &h);
    }
}

#[test]
fn free_modules_have_free_biduals() {
    for b in [z9_c3(), base(3, 3, vec![]), base(2, 2, vec![2])] {
        for r in 0..=3 {
            for i in 0..=r {
                let bd = iwlab_core::module::bidual_cap(&FPModule::free(&b, r), i).unwrap();
                assert!(bd.injective && bd.surjective, "rank {r}, i = {i}");
            }
        }
    }
}
