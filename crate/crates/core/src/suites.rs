//! Seeded lemma suites. Each suite checks one statement on generated data
//! and reports the number of cases together with a reproducer for every
//! failure.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coeff::{Ring, TruncatedLocalRing};
use crate::error::Result;
use crate::euler::{
    self, check_axioms, derive, generate_universal, incident_edges, EulerInstance, Functional, LiftCase,
    NormLift, PrimeData, TowerShape, TowerSpec,
};
use crate::group::{Base, EvalHom, FinAbGroup, GroupHom, GroupRing, GroupRingElem};
use crate::iwasawa::{self, Candidate, ElementaryModule, HeightOnePrime, Poly, Poly2, PolyIdeal};
use crate::kolyvagin::{kolyvagin_d, kolyvagin_single, PrimeFactor, SnProjector};
use crate::module::{self, base_change, bidual_cap, fitting_ideal, FPModule, IdealGens, RingMap};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub case: String,
    pub message: String,
    pub reproducer: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub paper_anchor: String,
    pub cases: u64,
    pub failures: Vec<Failure>,
    pub seed: u64,
    pub wall_ms: u64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn text_line(&self) -> String {
        format!(
            "{} {} [{}] cases={} failures={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.paper_anchor,
            self.cases,
            self.failures.len()
        )
    }
}

/// Case counter and failure log shared by the suites.
#[derive(Debug, Default)]
pub struct Cases {
    pub cases: u64,
    pub failures: Vec<Failure>,
}

impl Cases {
    pub fn check(&mut self, case: impl Into<String>, ok: bool, message: &str, reproducer: impl FnOnce() -> Value) {
        self.cases += 1;
        if !ok {
            self.failures.push(Failure { case: case.into(), message: message.into(), reproducer: reproducer() });
        }
    }

    /// Like `check`, but a library error also counts as a failure.
    pub fn check_result(
        &mut self,
        case: impl Into<String>,
        outcome: Result<bool>,
        message: &str,
        reproducer: impl FnOnce() -> Value,
    ) {
        match outcome {
            Ok(ok) => self.check(case, ok, message, reproducer),
            Err(e) => self.check(case, false, &format!("{message}: {e}"), reproducer),
        }
    }
}

type SuiteFn = fn(&mut ChaCha8Rng, &mut Cases) -> Result<()>;

#[derive(Clone, Copy)]
pub struct Suite {
    pub name: &'static str,
    pub anchor: &'static str,
    run: SuiteFn,
}

impl std::fmt::Debug for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} [{}]", self.name, self.anchor)
    }
}

impl Suite {
    /// Run with its own RNG stream, so that the outcome does not depend on
    /// which other suites run or in what order.
    pub fn run(&self, seed: u64) -> SuiteReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id(self.name));
        let mut cases = Cases::default();
        let start = Instant::now();
        if let Err(e) = (self.run)(&mut rng, &mut cases) {
            cases.failures.push(Failure { case: "setup".into(), message: e.to_string(), reproducer: json!({"seed": seed}) });
        }
        SuiteReport {
            suite: self.name.into(),
            paper_anchor: self.anchor.into(),
            cases: cases.cases,
            failures: cases.failures,
            seed,
            wall_ms: start.elapsed().as_millis() as u64,
        }
    }
}

fn stream_id(name: &str) -> u64 {
    // FNV-1a; only needs to be stable across runs
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

pub fn all_suites() -> Vec<Suite> {
    macro_rules! s {
        ($name:expr, $anchor:expr, $f:expr) => {
            Suite { name: $name, anchor: $anchor, run: $f }
        };
    }
    vec![
        s!("telescoping", "Dn", telescoping),
        s!("fitting-quotient", "lemFittquot", fitting_quotient),
        s!("fitting-base-change", "remFitt", fitting_base_change),
        s!("hom-reduction", "lemhomsurj", hom_reduction),
        s!("bidual-reduction", "corEPBmodp", bidual_reduction),
        s!("bidual-free", "defEPB", bidual_free),
        s!("sn-projector", "lemsnDn(i)", sn_projector),
        s!("sn-identity", "lemsnDn(ii)", sn_identity),
        s!("euler-axioms", "defES", euler_axioms),
        s!("derivative-invariance", "lemDninv", derivative_invariance),
        s!("derivative-independence", "defKD", derivative_independence),
        s!("finite-singular", "kappalfs", finite_singular),
        s!("c-ideal-chain", "theideal0", c_ideal_chain),
        s!("c-ideal-projection", "theideal1", c_ideal_projection),
        s!("functional-lifting", "liftinghom", functional_lifting),
        s!("scalar-extension", "lemOO'", scalar_extension),
        s!("specialization-two-var", "lemredCi", specialization_two_var),
        s!("specialization-one-var", "lemredCitodvr", specialization_one_var),
        s!("specialization-equality", "corC_iIm", specialization_equality),
        s!("elementary-fitting", "thmonevar", elementary_fitting_orders),
        s!("slope", "lemasymineq", slope),
        s!("codim-two", "lemforlemforred", codim_two),
        s!("good-specialization", "lemforred", good_specialization),
        s!("ideal-relations", "secintro", ideal_relations),
    ]
}

pub fn find_suite(name: &str) -> Option<Suite> {
    all_suites().into_iter().find(|s| s.name == name || s.anchor == name)
}

// ---- helpers ---------------------------------------------------------------------

fn zp(p: u64, n: u32) -> Result<Ring> {
    TruncatedLocalRing::integers(p, n)
}

fn base(p: u64, n: u32, orders: Vec<u64>) -> Result<Base> {
    Ok(GroupRing::new(zp(p, n)?, FinAbGroup::new(orders)?))
}

fn random_elem(b: &Base, rng: &mut ChaCha8Rng) -> GroupRingElem {
    let m = b.modulus().modulus();
    b.elem_from_flat((0..b.dim()).map(|_| rng.gen_range(0..m)).collect())
}

/// Mostly sparse elements, so that random matrices have interesting minors.
fn sparse_elem(b: &Base, rng: &mut ChaCha8Rng) -> GroupRingElem {
    match rng.gen_range(0..4) {
        0 => b.zero(),
        1 => random_elem(b, rng),
        _ => {
            let g = rng.gen_range(0..b.group().order());
            b.group_elem(g).scale_int(rng.gen_range(-3..4))
        }
    }
}

fn module_json(m: &FPModule) -> Value {
    serde_json::to_value(m.to_json()).unwrap_or(Value::Null)
}

fn random_module(b: &Base, rng: &mut ChaCha8Rng, max_gens: usize, max_rels: usize) -> Result<FPModule> {
    let n = rng.gen_range(1..=max_gens);
    let m = rng.gen_range(0..=max_rels);
    let rows = (0..m).map(|_| (0..n).map(|_| sparse_elem(b, rng)).collect()).collect();
    FPModule::new(b, n, rows)
}

/// Laplace expansion along the first row.
fn det_laplace(mat: &[Vec<GroupRingElem>], b: &Base) -> GroupRingElem {
    let k = mat.len();
    if k == 0 {
        return b.one();
    }
    let mut acc = b.zero();
    for c in 0..k {
        if mat[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<GroupRingElem>> = mat[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = &mat[0][c] * &det_laplace(&minor, b);
        acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// Fitting ideal straight from all `(n-i)`-minors.
fn fitting_by_minors(b: &Base, n: usize, rows: &[Vec<GroupRingElem>], i: usize) -> IdealGens {
    if i >= n {
        return IdealGens::unit(b);
    }
    let k = n - i;
    let mut gens = Vec::new();
    for rs in module::subsets(rows.len(), k) {
        for cs in module::subsets(n, k) {
            let mat: Vec<Vec<GroupRingElem>> =
                rs.iter().map(|&r| cs.iter().map(|&c| rows[r][c].clone()).collect()).collect();
            gens.push(det_laplace(&mat, b));
        }
    }
    IdealGens::new(b, gens)
}

/// `P · diag(d) · Q` with `P`, `Q` products of random elementary matrices.
fn pdq_module(b: &Base, diag: &[GroupRingElem], rng: &mut ChaCha8Rng) -> Result<FPModule> {
    let n = diag.len();
    let mut rows: Vec<Vec<GroupRingElem>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { diag[i].clone() } else { b.zero() }).collect())
        .collect();
    let g = b.group().order();
    for _ in 0..2 * n {
        if n < 2 {
            break;
        }
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i == j {
            continue;
        }
        let c = sparse_elem(b, rng);
        // row operation (P) then column operation (Q)
        let add: Vec<GroupRingElem> = rows[j].iter().map(|x| &c * x).collect();
        for (x, y) in rows[i].iter_mut().zip(add) {
            *x = &*x + &y;
        }
        let c = sparse_elem(b, rng);
        for row in rows.iter_mut() {
            let v = &row[j] * &c;
            row[i] = &row[i] + &v;
        }
    }
    for row in rows.iter_mut() {
        let unit = b.group_elem(rng.gen_range(0..g));
        for x in row.iter_mut() {
            *x = &*x * &unit;
        }
    }
    FPModule::new(b, n, rows)
}

fn instance_json(inst: &EulerInstance) -> Value {
    serde_json::to_value(inst.to_json()).unwrap_or(Value::Null)
}

fn universal<R: Rng>(shape: &TowerShape, rng: &mut R) -> Result<EulerInstance> {
    let tower = euler::random_tower(shape, rng)?;
    let seed = euler::random_seed(&tower, rng);
    generate_universal(&tower, &seed)
}

/// Shapes whose top group has at most 243 elements.
fn small_shapes() -> Vec<TowerShape> {
    let mut out = Vec::new();
    for gamma in [vec![], vec![3], vec![9], vec![3, 3]] {
        for primes in [vec![3], vec![9], vec![3, 3]] {
            out.push(TowerShape::new(3, 1, gamma.clone(), primes));
        }
    }
    for gamma in [vec![], vec![3]] {
        for primes in [vec![9], vec![9, 9]] {
            out.push(TowerShape::new(3, 2, gamma.clone(), primes));
        }
    }
    // a lone prime needs some Γ-factor to carry its Frobenius
    out.retain(|s| !(s.gamma.is_empty() && s.prime_orders.len() == 1));
    out
}

fn pick<'a, T>(v: &'a [T], rng: &mut ChaCha8Rng) -> &'a T {
    &v[rng.gen_range(0..v.len())]
}

// ---- Kolyvagin operators ----------------------------------------------------------

fn telescoping(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let _ = rng;
    for ring in [zp(10007, 1)?, zp(3, 4)?] {
        for m in 2..=27u64 {
            let b = GroupRing::new(Arc::clone(&ring), FinAbGroup::cyclic(m)?);
            let g = b.group();
            for k in (1..m).filter(|k| gcd(*k, m) == 1) {
                let sigma = g.pow(g.generator(0), k as i64);
                let d = kolyvagin_single(&b, PrimeFactor { factor: 0, sigma })?;
                let lhs = &(&b.group_elem(sigma) - &b.one()) * &d;
                // (m - 1) at the identity and -1 elsewhere
                let mut expected = b.zero();
                for h in 0..g.order() {
                    let c = if h == g.identity() { m as i64 - 1 } else { -1 };
                    expected = &expected + &b.group_elem(h).scale_int(c);
                }
                out.check(format!("p={} m={m} sigma^{k}", ring.p()), lhs == expected, "(σ-1)D ≠ #H - N", || {
                    json!({"p": ring.p(), "precision": ring.precision(), "order": m, "sigma_exponent": k})
                });
            }
        }
        for a in 2..=9u64 {
            for bo in 2..=9u64 {
                let b = GroupRing::new(Arc::clone(&ring), FinAbGroup::new(vec![a, bo])?);
                let g = b.group();
                for k in (1..a).filter(|k| gcd(*k, a) == 1) {
                    let s1 = g.pow(g.generator(0), k as i64);
                    let s2 = g.generator(1);
                    let pf = [PrimeFactor { factor: 0, sigma: s1 }, PrimeFactor { factor: 1, sigma: s2 }];
                    let dn = kolyvagin_d(&b, &pf)?;
                    for (l, (pl, other)) in [(pf[0], pf[1]), (pf[1], pf[0])].into_iter().enumerate() {
                        let order = [a, bo][l];
                        let lhs = &(&b.group_elem(pl.sigma) - &b.one()) * &dn;
                        let norm = (0..order).fold(b.zero(), |acc, i| &acc + &b.group_elem(g.pow(pl.sigma, i as i64)));
                        let rhs = &(&b.int(order as i64) - &norm) * &kolyvagin_single(&b, other)?;
                        out.check(
                            format!("p={} orders=({a},{bo}) sigma1^{k} prime {l}", ring.p()),
                            lhs == rhs,
                            "(σ_ℓ-1)D_n ≠ (#H_ℓ - N)D_{n/ℓ}",
                            || json!({"p": ring.p(), "orders": [a, bo], "sigma_exponents": [k, 1], "prime": l}),
                        );
                    }
                }
            }
        }
    }
    Ok(())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Every choice of generators for the groups with at most two cyclic
/// factors of order 3 or 9.
fn sn_configs() -> Vec<(Vec<u64>, Vec<u64>)> {
    let gens = |m: u64| (1..m).filter(move |k| k % 3 != 0).collect::<Vec<_>>();
    let mut out = vec![(vec![], vec![])];
    for a in [3u64, 9] {
        for k in gens(a) {
            out.push((vec![a], vec![k]));
        }
        for b in [3u64, 9] {
            for k in gens(a) {
                for l in gens(b) {
                    out.push((vec![a, b], vec![k, l]));
                }
            }
        }
    }
    out
}

fn sn_projector_for(orders: &[u64], exps: &[u64]) -> Result<SnProjector> {
    let b = base(3, 3, orders.to_vec())?;
    let g = b.group().clone();
    let sigmas: Vec<usize> = exps.iter().enumerate().map(|(j, &k)| g.pow(g.generator(j), k as i64)).collect();
    SnProjector::new(&b, &sigmas)
}

fn sn_projector(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let _ = rng;
    for (orders, exps) in sn_configs() {
        let s = sn_projector_for(&orders, &exps)?;
        let b = s.base().clone();
        let j = s.j_generator();
        let repro = || json!({"p": 3, "precision": 3, "orders": orders, "sigma_exponents": exps});
        let mut idem = true;
        let mut image = true;
        let mut identity = true;
        for x in b.basis() {
            let sx = s.apply(&x)?;
            idem &= s.congruent(&s.apply(&sx)?, &sx);
            image &= s.j_span().contains(sx.coeffs());
            let y = &x * &j;
            identity &= s.congruent(&s.apply(&y)?, &y);
        }
        let tag = format!("orders={orders:?} sigmas={exps:?}");
        out.check(format!("{tag} idempotent"), idem, "s_n ∘ s_n ≠ s_n", repro);
        out.check(format!("{tag} image"), image, "image of s_n leaves J", repro);
        out.check(format!("{tag} identity"), identity, "s_n is not the identity on J", repro);
    }
    Ok(())
}

fn sn_identity(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let _ = rng;
    for (orders, exps) in sn_configs() {
        let s = sn_projector_for(&orders, &exps)?;
        let b = s.base().clone();
        let g = b.group().clone();
        let j = s.j_generator();
        let sign = if orders.len() % 2 == 0 { 1 } else { -1 };
        let sig: Vec<usize> = s.primes().iter().map(|p| p.sigma).collect();
        let pfs = s.primes().to_vec();
        let dn = kolyvagin_d(&b, &pfs)?;
        // walk H by exponents in the σ_j, where the coefficient of D_n is ∏ k_j
        let total: u64 = orders.iter().product();
        for idx in 0..total {
            let mut rest = idx;
            let ks: Vec<u64> = orders
                .iter()
                .map(|&m| {
                    let k = rest % m;
                    rest /= m;
                    k
                })
                .collect();
            let h = ks.iter().zip(&sig).fold(g.identity(), |acc, (&k, &s)| g.op(acc, g.pow(s, k as i64)));
            let coeff: i64 = ks.iter().map(|&k| k as i64).product();
            let lhs = s.apply(&b.group_elem(g.inv(h)))?;
            let rhs = j.scale_int(sign * coeff);
            let tag = format!("orders={orders:?} sigmas={exps:?} k={ks:?}");
            let repro = || json!({"orders": orders, "sigma_exponents": exps, "k": ks});
            out.check(tag.clone(), s.congruent(&lhs, &rhs), "s_n(σ^-1) ≢ ±(D_n)_σ ∏(σ_j-1)", repro);
            out.check(format!("{tag} D_n"), dn.coeff(h) == b.ring().from_int(coeff), "D_n coefficient", repro);
        }
    }
    Ok(())
}


// ---- Fitting ideals ---------------------------------------------------------------

fn fitting_quotient(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let b = base(3, 2, vec![3])?;
    for t in 0..200 {
        let m = random_module(&b, rng, 3, 3)?;
        let s = rng.gen_range(1..=2usize);
        let xs: Vec<Vec<GroupRingElem>> = (0..s).map(|_| (0..m.n_gens()).map(|_| sparse_elem(&b, rng)).collect()).collect();
        let mut quot_rows = m.relations().to_vec();
        quot_rows.extend(xs.iter().cloned());
        let f0 = fitting_by_minors(&b, m.n_gens(), &quot_rows, 0);
        let fs = fitting_by_minors(&b, m.n_gens(), m.relations(), s);
        let repro = || json!({"module": module_json(&m), "s": s, "elements": xs.iter().map(|v| v.iter().map(|x| x.to_json()).collect::<Vec<_>>()).collect::<Vec<_>>()});
        out.check(format!("module {t}"), fs.contains_ideal(&f0), "Fitt_0(M/M') ⊄ Fitt_s(M)", repro);
        // the library minors agree with the naive expansion
        let lib = fitting_ideal(&m.quotient_by(&xs)?, 0);
        out.check(format!("module {t} library"), lib == f0, "fitting_ideal differs from the minor expansion", repro);
    }
    Ok(())
}

fn fitting_base_change(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let b = base(3, 2, vec![2, 3])?;
    let g = b.group().clone();
    let tau = g.generator(0);
    let half = b.ring().from_int(2).inv_unit()?;
    // idempotent of the sign character of the order-2 factor
    let e = (&b.one() - &b.group_elem(tau)).scale(&half);
    let maps = [
        ("quotient", RingMap::Group(GroupHom::kill_factors(&b, &[1])?)),
        ("precision", RingMap::Precision(b.with_precision(1)?)),
        ("idempotent", RingMap::Idempotent(e)),
        ("eval", RingMap::Eval(EvalHom::new(&b, 1, &b.ring().from_int(4))?)),
    ];
    for t in 0..100 {
        let m = random_module(&b, rng, 3, 3)?;
        for (name, phi) in &maps {
            let mm = base_change(&m, phi)?;
            for i in 0..=m.n_gens() {
                let lhs = fitting_ideal(&mm, i);
                let rhs = fitting_ideal(&m, i).map(phi)?;
                out.check(format!("module {t} {name} i={i}"), lhs == rhs, "Fitt_i(M ⊗ S) ≠ Fitt_i(M)S", || {
                    json!({"module": module_json(&m), "map": name, "i": i})
                });
            }
        }
    }
    Ok(())
}

/// 50 modules `⊕ R/(d)` over `Z/27[Z/3]`, `d ∈ {0, σ-1, N, 1}`, presented
/// through random `P`, `Q`.
fn free_underlying_modules(rng: &mut ChaCha8Rng) -> Result<Vec<FPModule>> {
    let b = base(3, 3, vec![3])?;
    let sigma = b.group().generator(0);
    let choices = [b.zero(), &b.group_elem(sigma) - &b.one(), b.norm_element(&[sigma])?, b.one()];
    (0..50)
        .map(|_| {
            let n = rng.gen_range(1..=3);
            let diag: Vec<GroupRingElem> = (0..n).map(|_| pick(&choices, rng).clone()).collect();
            pdq_module(&b, &diag, rng)
        })
        .collect()
}

fn hom_reduction(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    for (t, m) in free_underlying_modules(rng)?.iter().enumerate() {
        out.check(format!("module {t} free"), m.underlying_is_free(), "underlying group is not free", || module_json(m));
        for nu in 1..=2 {
            let r = module::bidual_reduction_check(m, nu, 0).map(|r| r.hom_surjective);
            out.check_result(format!("module {t} nu={nu}"), r, "Hom(M,R) -> Hom(M/p^ν, R/p^ν) not onto", || {
                json!({"module": module_json(m), "nu": nu})
            });
        }
    }
    Ok(())
}

fn bidual_reduction(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    for (t, m) in free_underlying_modules(rng)?.iter().enumerate() {
        let top = m.base().ring().precision();
        for i in 0..=1 {
            let nu = rng.gen_range(1..=2);
            let tag = format!("module {t} i={i} nu={nu}");
            let repro = |r: Option<&module::BidualReduction>| json!({"module": module_json(m), "nu": nu, "i": i, "report": r});
            match module::bidual_reduction_check(m, nu, i) {
                Ok(r) => {
                    out.check(tag.clone(), r.isomorphic(), "the two sides are not isomorphic", || repro(Some(&r)));
                    // the reduction map is an isomorphism exactly when ∧^{i+1} Hom(M, R) is free
                    let predicted = nu == top || r.wedge_dual_free;
                    out.check(format!("{tag} natural map"), r.natural_isomorphism() == predicted, "reduction map verdict contradicts the duality count", || repro(Some(&r)));
                }
                Err(e) => out.check(tag, false, &e.to_string(), || repro(None)),
            }
        }
    }
    Ok(())
}

fn bidual_free(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    for (p, n, orders) in [(3, 2, vec![3]), (3, 3, vec![]), (2, 2, vec![2]), (5, 1, vec![5])] {
        let b = base(p, n, orders.clone())?;
        for r in 0..=3 {
            for i in 0..=r {
                let bd = bidual_cap(&FPModule::free(&b, r), i)?;
                let rank = module::subsets(r, i).len();
                let ok = bd.injective && bd.surjective && bd.module().abelian_invariants() == vec![n; rank * b.group().order()];
                out.check(format!("p={p} N={n} G={orders:?} rank {r} i={i}"), ok, "∧^i R^r -> ∩^i R^r is not an isomorphism", || {
                    json!({"p": p, "precision": n, "group": orders, "rank": r, "i": i})
                });
            }
        }
    }
    // free modules in disguise: R^r presented through P · 1 · Q plus zero rows
    let b = base(3, 2, vec![3])?;
    for t in 0..10 {
        let r = rng.gen_range(1..=2);
        let m = pdq_module(&b, &vec![b.zero(); r], rng)?;
        let i = rng.gen_range(0..=r);
        let bd = bidual_cap(&m, i)?;
        out.check(format!("disguised {t} i={i}"), bd.injective && bd.surjective, "ξ is not an isomorphism", || {
            json!({"module": module_json(&m), "i": i})
        });
    }
    Ok(())
}

// ---- Euler systems ----------------------------------------------------------------

fn euler_axioms(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let mut instances = Vec::new();
    for shape in small_shapes() {
        instances.push((format!("grid {:?}/{:?} N={}", shape.gamma, shape.prime_orders, shape.precision), universal(&shape, rng)?));
    }
    let shapes = small_shapes();
    for k in 0..20 {
        let shape = pick(&shapes, rng).clone();
        instances.push((format!("random {k}"), universal(&shape, rng)?));
    }
    for (tag, inst) in &instances {
        let rep = check_axioms(inst)?;
        out.check(tag.clone(), rep.passed(), "generated instance violates the axioms", || instance_json(inst));
        let order = inst.tower.base().group().order();
        for key in inst.classes.keys() {
            let positions: Vec<usize> =
                if order <= 27 { (0..order).collect() } else { (0..2).map(|_| rng.gen_range(0..order)).collect() };
            let expected = incident_edges(&inst.tower, key);
            for g in positions {
                let bad = inst.corrupted(key, g)?;
                let got: Vec<_> = check_axioms(&bad)?.violations.into_iter().map(|v| v.edge).collect();
                out.check(format!("{tag} corrupt {:?}/{:?} at {g}", key.layer, key.n), got == expected, "violations differ from the incident edges", || {
                    json!({"instance": instance_json(&bad), "layer": key.layer, "n": inst.tower.labels(&key.n), "position": g})
                });
            }
        }
    }
    Ok(())
}

/// Admissible `(layer, n)` pairs of an instance at its full precision.
fn derivable(inst: &EulerInstance) -> Vec<(Vec<u32>, Vec<usize>)> {
    let t = &inst.tower;
    let n = t.ring().precision();
    t.layers().into_iter().flat_map(|layer| euler::admissible_moduli(t, &layer, n, 2).into_iter().map(move |m| (layer.clone(), m))).collect()
}

fn derivative_invariance(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let shapes = small_shapes();
    for t in 0..20 {
        let inst = universal(pick(&shapes, rng), rng)?;
        let tower = &inst.tower;
        for (layer, n) in derivable(&inst) {
            let lift = NormLift::random(tower, &n, rng);
            let r = derive(&inst, &layer, &n, tower.ring().precision(), &lift)
                .map(|k| n.iter().all(|&l| k.value.is_fixed_by(tower.sigma(l))));
            out.check_result(format!("instance {t} layer {layer:?} n {:?}", tower.labels(&n)), r, "derivative is not H_n-invariant", || {
                json!({"instance": instance_json(&inst), "layer": layer, "n": tower.labels(&n)})
            });
        }
    }
    Ok(())
}

fn padding_prime(tower: &TowerSpec) -> PrimeData {
    let ring = tower.ring();
    let rank = tower.base().group().rank() + 1;
    let mut frobenius = vec![0; rank];
    // any nontrivial Frobenius keeps the Euler factor nonzero
    if tower.primes().is_empty() {
        frobenius[tower.delta().rank()] = 1;
    } else {
        frobenius[tower.h_factor(0)] = 1;
    }
    PrimeData {
        label: "pad".into(),
        order: ring.p().pow(ring.precision()),
        sigma: 1,
        frobenius,
        norm: ring.one(),
        rho: ring.one(),
    }
}

fn derivative_independence(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let shapes: Vec<TowerShape> = small_shapes().into_iter().filter(|s| s.prime_orders.len() == 1 || s.precision == 1).collect();
    for t in 0..50 {
        let inst = universal(pick(&shapes, rng), rng)?;
        let tower = &inst.tower;
        let prec = tower.ring().precision();
        let padded = tower.padded(padding_prime(tower))?;
        let pad_inst = generate_universal(&padded, &tower.embed_into_padded(&inst.seed, &padded)?)?;
        for (layer, n) in derivable(&inst) {
            let tag = format!("instance {t} layer {layer:?} n {:?}", tower.labels(&n));
            let repro = || json!({"instance": instance_json(&inst), "layer": layer, "n": tower.labels(&n)});
            let plain = match derive(&inst, &layer, &n, prec, &NormLift::Plain) {
                Ok(k) => k,
                Err(e) => {
                    out.check(tag, false, &format!("derivative failed: {e}"), repro);
                    continue;
                }
            };
            let lift = NormLift::random(tower, &n, rng);
            let r = derive(&inst, &layer, &n, prec, &lift).map(|k| k.coords == plain.coords);
            out.check_result(format!("{tag} lift"), r, "κ depends on the norm lift", repro);
            let r = derive(&pad_inst, &layer, &n, prec, &NormLift::Plain).map(|k| k.coords.coeffs() == plain.coords.coeffs());
            out.check_result(format!("{tag} padding"), r, "κ depends on the tower padding", repro);
        }
    }
    Ok(())
}

fn finite_singular(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let shapes = small_shapes();
    for t in 0..20 {
        let inst = universal(pick(&shapes, rng), rng)?;
        let tower = &inst.tower;
        let b = tower.base();
        let pf = |l: usize| PrimeFactor { factor: tower.h_factor(l), sigma: tower.sigma(l) };
        for (key, c) in &inst.classes {
            for (pos, &l) in key.n.iter().enumerate() {
                let mut rest = key.n.clone();
                rest.remove(pos);
                let dn = kolyvagin_d(b, &key.n.iter().map(|&k| pf(k)).collect::<Vec<_>>())?;
                let drest = kolyvagin_d(b, &rest.iter().map(|&k| pf(k)).collect::<Vec<_>>())?;
                let lhs = &(&(&b.group_elem(tower.sigma(l)) - &b.one()) * &dn) * c;
                let lower = inst.class(&key.layer, &rest)?;
                let rhs = &(&drest * c).scale_int(tower.primes()[l].order as i64)
                    - &(&(&drest * &tower.euler_factor(l)?) * lower);
                out.check(format!("instance {t} layer {:?} n {:?} at {}", key.layer, tower.labels(&key.n), tower.primes()[l].label), lhs == rhs, "finite-singular relation fails", || {
                    json!({"instance": instance_json(&inst), "layer": key.layer, "n": tower.labels(&key.n), "prime": tower.primes()[l].label})
                });
            }
        }
    }
    Ok(())
}

fn c_ideal_chain(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let shapes = small_shapes();
    for t in 0..15 {
        let inst = universal(pick(&shapes, rng), rng)?;
        let tower = &inst.tower;
        let prec = tower.ring().precision();
        let r = tower.primes().len();
        let repro = || instance_json(&inst);
        for layer in tower.layers() {
            let cs = (0..=r + 1).map(|i| euler::c_ideal(&inst, &layer, prec, i)).collect::<Result<Vec<_>>>()?;
            for i in 0..=r {
                out.check(format!("instance {t} layer {layer:?} C_{i} ⊆ C_{}", i + 1), cs[i + 1].ideal.contains_ideal(&cs[i].ideal), "C_i is not monotone", repro);
            }
            out.check(format!("instance {t} layer {layer:?} stable"), cs[r].ideal == cs[r + 1].ideal, "C_i does not stabilise", repro);
            for n in &cs[r].moduli {
                let k = euler::kappa_ideal(&inst, &layer, prec, n)?;
                out.check(format!("instance {t} layer {layer:?} κ({:?})", tower.labels(n)), cs[n.len()].ideal.contains_ideal(&k), "κ-ideal escapes C_{ε(n)}", repro);
            }
        }
    }
    Ok(())
}

/// Projection `R_{F2,N2} -> R_{F1,N1}` as two ring maps.
fn projection_maps(tower: &TowerSpec, hi: (&[u32], u32), lo: (&[u32], u32)) -> Result<(RingMap, RingMap)> {
    let mid = tower.layer_base(hi.0, lo.1)?;
    let dst = tower.layer_base(lo.0, lo.1)?;
    let images = (0..mid.group().rank()).map(|j| dst.group().generator(j)).collect();
    Ok((RingMap::Precision(Arc::clone(&mid)), RingMap::Group(GroupHom::new(&mid, &dst, images)?)))
}

fn random_sublayer(layer: &[u32], rng: &mut ChaCha8Rng) -> Vec<u32> {
    layer.iter().map(|&f| rng.gen_range(0..=f)).collect()
}

fn c_ideal_projection(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let shapes: Vec<TowerShape> = small_shapes().into_iter().filter(|s| !s.gamma.is_empty()).collect();
    for t in 0..15 {
        let inst = universal(pick(&shapes, rng), rng)?;
        let tower = &inst.tower;
        let top = tower.ring().precision();
        for hi in tower.layers() {
            let lo = random_sublayer(&hi, rng);
            let n2 = top;
            let n1 = rng.gen_range(1..=top);
            let (red, proj) = projection_maps(tower, (&hi, n2), (&lo, n1))?;
            for i in 0..=2 {
                let up = euler::c_ideal(&inst, &hi, n2, i)?.ideal;
                let down = euler::c_ideal(&inst, &lo, n1, i)?.ideal;
                let image = up.map(&red)?.map(&proj)?;
                out.check(format!("instance {t} {hi:?}/{n2} -> {lo:?}/{n1} i={i}"), down.contains_ideal(&image), "pr(C_{F2,N2}) ⊄ C_{F1,N1}", || {
                    json!({"instance": instance_json(&inst), "upper": [hi, n2], "lower": [lo, n1], "i": i})
                });
            }
        }
    }
    Ok(())
}

fn functional_lifting(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let shapes = [
        TowerShape::new(3, 2, vec![9], vec![9]),
        TowerShape::new(3, 2, vec![3, 3], vec![9]),
        TowerShape::new(3, 1, vec![9], vec![3]),
    ];
    for t in 0..30 {
        let shape = pick(&shapes, rng).clone();
        let tower = euler::random_tower(&shape, rng)?;
        let top = tower.ring().precision();
        let layers = tower.layers();
        let f2 = pick(&layers, rng).clone();
        let f1 = random_sublayer(&f2, rng);
        let n2 = top;
        let n1 = rng.gen_range(1..=top);
        let (red, proj) = projection_maps(&tower, (&f2, n2), (&f1, n1))?;
        let r2 = tower.layer_base(&f2, n2)?;
        let r1 = tower.layer_base(&f1, n1)?;
        let pr = |x: &GroupRingElem| red.apply(x).and_then(|y| proj.apply(&y));
        let repro = || json!({"tower": serde_json::to_value(tower.to_json()).unwrap_or(Value::Null), "upper": [f2, n2], "lower": [f1, n1]});

        let a = random_elem(&r2, rng);
        let lift = euler::lift_functional(&tower, &Functional { layer: f2.clone(), precision: n2, value: a.clone() }, &f1, n1, LiftCase::Descend)?;
        let b = lift.functional.value.clone();
        let ok = r2.basis().iter().all(|e| matches!((pr(&(&a * e)), pr(e)), (Ok(x), Ok(y)) if x == &b * &y));
        out.check(format!("tower {t} descend"), ok && lift.verified, "f_1 ∘ Cor ≠ pr ∘ f_2", repro);

        let c = random_elem(&r1, rng);
        let lift = euler::lift_functional(&tower, &Functional { layer: f1.clone(), precision: n1, value: c.clone() }, &f2, n2, LiftCase::Ascend)?;
        let d = lift.functional.value.clone();
        let ok = r2.basis().iter().all(|e| matches!((pr(&(&d * e)), pr(e)), (Ok(x), Ok(y)) if x == &c * &y));
        out.check(format!("tower {t} ascend"), ok && lift.verified, "pr ∘ g_2 ≠ g_1 ∘ Cor", repro);
    }
    Ok(())
}

fn scalar_extension(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let shapes = [
        TowerShape::new(3, 1, vec![3], vec![3]),
        TowerShape::new(3, 1, vec![], vec![3, 3]),
        TowerShape::new(3, 2, vec![3], vec![9]),
    ];
    for t in 0..8 {
        let inst = universal(pick(&shapes, rng), rng)?;
        let prec = inst.tower.ring().precision();
        for layer in inst.tower.layers() {
            for i in 0..=2 {
                let r = euler::scalar_extension_check(&inst, &layer, prec, i, &[1, 0, 1]);
                out.check_result(format!("instance {t} layer {layer:?} i={i}"), r, "C_i(O') ≠ O'·C_i(O)", || {
                    json!({"instance": instance_json(&inst), "layer": layer, "i": i, "poly": [1, 0, 1]})
                });
            }
        }
    }
    Ok(())
}

/// Towers for the specialization checks. Modulo 9 the `Γ`-exponents of
/// Frobenius are multiples of 3, so that `u = 4` keeps twisted primes admissible.
fn compat_shapes(two_var: bool) -> Vec<TowerShape> {
    let gammas: Vec<Vec<u64>> = if two_var { vec![vec![3, 3], vec![9, 3]] } else { vec![vec![3], vec![9]] };
    let mut out = Vec::new();
    for gamma in &gammas {
        for primes in [vec![3], vec![3, 3]] {
            out.push(TowerShape::new(3, 1, gamma.clone(), primes));
        }
    }
    let mut s = TowerShape::new(3, 2, gammas[1].clone(), vec![9]);
    s.gamma_step = vec![3; s.gamma.len()];
    out.push(s);
    out
}

/// An instance with a `Γ`-factor whose collapse leaves every Frobenius nontrivial.
/// The scalar `N(ℓ)^{-1}ρ` is 1 on these towers, so otherwise an Euler factor dies.
fn collapsible(shapes: &[TowerShape], rng: &mut ChaCha8Rng) -> Result<(EulerInstance, usize)> {
    for _ in 0..200 {
        let inst = universal(pick(shapes, rng), rng)?;
        let off = inst.tower.delta().rank();
        let ok: Vec<usize> = (0..inst.tower.gamma().len())
            .filter(|&j| inst.tower.primes().iter().all(|l| l.frobenius.iter().enumerate().any(|(k, &e)| k != off + j && e != 0)))
            .collect();
        if !ok.is_empty() {
            let j = *pick(&ok, rng);
            return Ok((inst, j));
        }
    }
    Err(crate::Error::Precondition("no collapsible factor found".into()))
}

/// `u^{p^level} ≡ 1`, so evaluation at `u` is defined on that layer.
fn unit_fits(tower: &TowerSpec, u: i64, level: u32) -> bool {
    let m = tower.ring().modulus();
    let mut x = m.reduce_i64(u);
    for _ in 0..level {
        x = (0..m.p()).fold(1, |acc, _| m.mul(acc, x));
    }
    x == m.reduce_i64(1)
}

fn compat_suite(rng: &mut ChaCha8Rng, out: &mut Cases, two_var: bool, count: usize, units: &[i64]) -> Result<()> {
    let shapes = compat_shapes(two_var);
    for t in 0..count {
        let (inst, j) = collapsible(&shapes, rng)?;
        let tower = &inst.tower;
        let layers = tower.layers();
        let layer = pick(&layers, rng).clone();
        let ok_units: Vec<i64> = units.iter().copied().filter(|&u| unit_fits(tower, u, layer[j])).collect();
        let u = tower.ring().from_int(*pick(&ok_units, rng));
        let prec = tower.ring().precision();
        let r = euler::specialization_compat_check(&inst, j, &u, &layer, prec, 2);
        let tag = format!("instance {t} factor {j} u={} layer {layer:?}", u);
        match r {
            Ok(rep) => {
                let repro = || json!({"instance": instance_json(&inst), "factor": j, "unit": u.to_json_coords(), "layer": layer, "report": rep});
                out.check(tag, rep.passed(), "ev_u(C_i) ⊄ C_i after specialization", repro);
            }
            Err(e) => out.check(tag, false, &format!("check failed: {e}"), || instance_json(&inst)),
        }
    }
    Ok(())
}

fn specialization_two_var(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    compat_suite(rng, out, true, 30, &[1, 4])
}

fn specialization_one_var(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    compat_suite(rng, out, false, 20, &[1, 4])
}

fn specialization_equality(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let mut shapes = compat_shapes(true);
    shapes.extend(compat_shapes(false));
    let mut decided = 0;
    for t in 0..20 {
        let (inst, j) = collapsible(&shapes, rng)?;
        let tower = &inst.tower;
        let layer = tower.top_layer();
        let rep = euler::specialization_compat_check(&inst, j, &tower.ring().one(), &layer, tower.ring().precision(), 2)?;
        for c in &rep.cases {
            if let Some(eq) = c.equal {
                decided += 1;
                out.check(format!("instance {t} factor {j} i={}", c.i), eq, "ev_1(C_i) ≠ C_i of the specialization", || {
                    json!({"instance": instance_json(&inst), "factor": j, "layer": layer, "i": c.i})
                });
            }
        }
    }
    out.check("some cases decided", decided > 0, "no case had matching moduli", || json!({}));
    Ok(())
}

// ---- Iwasawa side -----------------------------------------------------------------

fn elementary_fitting_orders(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let r = zp(3, 8)?;
    let t_var = Poly::var(&r);
    let g = Poly::from_ints(&r, &[3, 1]);
    let primes = [(HeightOnePrime::distinguished(t_var.clone())?, 0usize), (HeightOnePrime::distinguished(g.clone())?, 1usize)];
    for case in 0..30 {
        let k = rng.gen_range(1..=3);
        // exponents of (T, T + 3) in each divisor, weakly decreasing down the chain
        let mut exps: Vec<[u32; 2]> = (0..k).map(|_| [rng.gen_range(0..=2), rng.gen_range(0..=1)]).collect();
        for c in 0..2 {
            let mut col: Vec<u32> = exps.iter().map(|e| e[c]).collect();
            col.sort_unstable_by(|a, b| b.cmp(a));
            for (e, v) in exps.iter_mut().zip(col) {
                e[c] = v;
            }
        }
        let divisors: Vec<Poly> = exps.iter().map(|e| t_var.pow(e[0]).mul(&g.pow(e[1]))).collect();
        let em = ElementaryModule::new(&r, divisors)?;
        out.check(format!("case {case} chain"), em.is_chain(), "generated divisors are not a chain", || json!({"exponents": exps}));
        for i in 0..=k {
            let fitt = iwasawa::elementary_fitting(&em, i, 16)?;
            for (prime, c) in &primes {
                let mut col: Vec<u32> = exps.iter().map(|e| e[*c]).collect();
                col.sort_unstable();
                let expected: u32 = col.iter().take(k - i).sum();
                let got = iwasawa::valuation_at_prime(&fitt, prime);
                out.check_result(format!("case {case} i={i} at {}", prime.label()), got.map(|v| v == expected), "ord of Fitt_i is not the sum of the smallest exponents", || {
                    json!({"exponents": exps, "i": i, "prime": prime.label(), "expected": expected})
                });
            }
        }
    }
    Ok(())
}

fn slope(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let r = zp(3, 24)?;
    let t = Poly::var(&r);
    let e = ElementaryModule::new(&r, vec![t.pow(2), t.scale(&r.from_int(3))])?;
    for (i, expect) in [(0usize, (1..=6).map(|n| 3 * n + 1).collect::<Vec<u32>>()), (1, (1..=6).map(|n| n + 1).collect())] {
        let rep = iwasawa::slope_check(&e, i, &t, 6)?;
        let values: Vec<u32> = rep.values.iter().map(|v| v.1).collect();
        out.check(format!("fixture i={i}"), values == expect && rep.slope_matches && rep.offset_constant, "C(n) differs from the expected line", || {
            json!({"divisors": ["T^2", "3T"], "i": i, "report": rep})
        });
    }
    // (a + b)·5 + μ stays below 37
    let r = zp(3, 37)?;
    for case in 0..20 {
        let c = 3 * rng.gen_range(0..3i64);
        let g = Poly::from_ints(&r, &[-c, 1]);
        let a = rng.gen_range(1..=3);
        let b = rng.gen_range(0..=a);
        let mu = rng.gen_range(0..=1u32);
        let pi = Poly::from_ints(&r, &[3i64.pow(mu)]);
        let em = ElementaryModule::new(&r, vec![g.pow(a).mul(&pi), g.pow(b)])?;
        for i in 0..=1 {
            let rep = iwasawa::slope_check(&em, i, &g, 5);
            let ok = rep.as_ref().map(|r| r.slope_matches && r.offset_constant).map_err(Clone::clone);
            out.check_result(format!("case {case} i={i}"), ok, "slope differs from the order at the prime", || {
                json!({"root": c, "exponents": [a, b], "mu": mu, "i": i})
            });
        }
    }
    Ok(())
}

fn codim_two(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let _ = rng;
    let pairs: Vec<(i64, i64)> = iwasawa::candidate_pairs(2).into_iter().filter(|&(a, b)| a % 3 != 0 || b % 3 != 0).collect();
    let spans = pairs.iter().map(|&(a, b)| iwasawa::codim_two_span(3, a, b, 8)).collect::<Result<Vec<_>>>()?;
    for (x, sx) in pairs.iter().zip(&spans) {
        for (y, sy) in pairs.iter().zip(&spans) {
            let equal = sx == sy;
            let prop = iwasawa::proportional_by_unit(3, *x, *y);
            out.check(format!("{x:?} vs {y:?}"), equal == prop, "ideal equality disagrees with unit proportionality", || {
                json!({"left": [x.0, x.1], "right": [y.0, y.1], "equal": equal, "proportional": prop})
            });
        }
    }
    Ok(())
}

fn two_var_ideal(r: &Ring, gens: &[&[((usize, usize), i64)]]) -> Result<PolyIdeal> {
    let gens = gens.iter().map(|g| Poly2::new(r, g.iter().map(|&(k, c)| (k, r.int_coeffs(c))))).collect();
    PolyIdeal::two_var(r, gens, 10)
}

fn good_specialization(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let r = zp(3, 3)?;
    let units = [r.one(), r.from_int(4)];
    let i = two_var_ideal(&r, &[&[((0, 0), 3)], &[((1, 0), 1)]])?;
    let j = two_var_ideal(&r, &[&[((0, 0), 3)], &[((0, 1), 1)]])?;
    let found = iwasawa::find_good_specialization(&i, &j, 2, &units)?;
    out.check("fixture (p,S),(p,T)", found.found == Candidate { a1: 1, a2: 1, u: vec![1] }, "finder did not return (1,1,1)", || {
        json!({"found": found.found})
    });
    let rejected = |a1, a2| found.rejected.iter().any(|x| x.candidate.a1 == a1 && x.candidate.a2 == a2);
    out.check("fixture rejects (1,0) and (0,1)", rejected(1, 0) && rejected(0, 1), "axis pairs were not rejected", || {
        json!({"rejected": found.rejected})
    });
    let heights = found.left.ideal.height_at_least_two().and_then(|a| Ok(a && found.right.ideal.height_at_least_two()?));
    out.check_result("fixture images", heights, "specialized images fail the height test", || json!({"found": found.found}));
    // ideals (p, S + aT) and (p, T + bS)
    for case in 0..10 {
        let a = rng.gen_range(-2..=2i64);
        let b = rng.gen_range(-2..=2i64);
        let i = two_var_ideal(&r, &[&[((0, 0), 3)], &[((1, 0), 1), ((0, 1), a)]])?;
        let j = two_var_ideal(&r, &[&[((0, 0), 3)], &[((0, 1), 1), ((1, 0), b)]])?;
        let res = iwasawa::find_good_specialization(&i, &j, 3, &units).and_then(|f| {
            Ok(f.left.ideal.height_at_least_two()? && f.right.ideal.height_at_least_two()?)
        });
        out.check_result(format!("pool {case} a={a} b={b}"), res, "no good specialization with certified images", || json!({"a": a, "b": b}));
    }
    Ok(())
}

fn ideal_relations(rng: &mut ChaCha8Rng, out: &mut Cases) -> Result<()> {
    let r = zp(3, 2)?;
    let i = PolyIdeal::from_int_polys(&r, &[&[0, 0, 1], &[0, 3]], 12)?;
    let t = PolyIdeal::from_int_polys(&r, &[&[0, 1]], 12)?;
    let t2 = PolyIdeal::from_int_polys(&r, &[&[0, 0, 1]], 12)?;
    let fwd = iwasawa::precedes(&i, &t)?;
    let back = iwasawa::precedes(&t, &i)?;
    let certified = |c: &iwasawa::Comparison| c.certificate.as_ref().is_some_and(|x| x.verified);
    out.check("(T^2,3T) ∼ (T)", fwd.holds && back.holds && certified(&fwd) && certified(&back), "fixture relation", || {
        json!({"forward": fwd, "backward": back})
    });
    let no = iwasawa::precedes(&t, &t2)?;
    out.check("(T) ⊀ (T^2)", !no.holds, "(T) ≺ (T^2) should fail", || json!({"comparison": no}));

    // principal ideals 3^a T^b (T+3)^c: ≺ is exponentwise ≥
    let r = zp(3, 4)?;
    let var = Poly::var(&r);
    let g = Poly::from_ints(&r, &[3, 1]);
    let gen = |e: [u32; 3]| Poly::from_ints(&r, &[3i64.pow(e[0])]).mul(&var.pow(e[1])).mul(&g.pow(e[2]));
    let pool: Vec<[u32; 3]> = (0..30).map(|_| [rng.gen_range(0..=1), rng.gen_range(0..=2), rng.gen_range(0..=1)]).collect();
    for (k, w) in pool.windows(2).enumerate() {
        let (x, y) = (w[0], w[1]);
        let ix = PolyIdeal::one_var(&r, vec![gen(x)], 16)?;
        let iy = PolyIdeal::one_var(&r, vec![gen(y)], 16)?;
        let expected = (0..3).all(|c| x[c] >= y[c]);
        let got = iwasawa::precedes(&ix, &iy);
        let ok = got.as_ref().map(|c| c.holds == expected && (!c.holds || certified(c))).map_err(Clone::clone);
        out.check_result(format!("pool {k}: {x:?} ≺ {y:?}"), ok, "≺ disagrees with the exponent comparison", || {
            json!({"left": x, "right": y, "expected": expected})
        });
        let refl = iwasawa::precedes(&ix, &ix).map(|c| c.holds);
        out.check_result(format!("pool {k}: reflexive"), refl, "I ≺ I fails", || json!({"ideal": x}));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn registry_is_unique_and_covers_anchors() {
        let suites = all_suites();
        let names: BTreeSet<_> = suites.iter().map(|s| s.name).collect();
        let anchors: BTreeSet<_> = suites.iter().map(|s| s.anchor).collect();
        assert_eq!(names.len(), suites.len());
        for a in ["Dn", "lemFittquot", "lemsnDn(i)", "lemsnDn(ii)", "lemredCi", "lemforred", "theideal1", "kappalfs"] {
            assert!(anchors.contains(a), "{a}");
        }
        assert!(find_suite("lemOO'").is_some());
    }

    #[test]
    fn empty_report_shape() {
        let rep = SuiteReport { suite: "x".into(), paper_anchor: "Dn".into(), cases: 0, failures: vec![], seed: 1, wall_ms: 0 };
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["cases"], 0);
        assert_eq!(v["failures"], json!([]));
        assert!(rep.text_line().starts_with("PASS"));
    }

    #[test]
    fn failures_carry_reproducers() {
        let mut c = Cases::default();
        c.check("a", true, "unused", || json!(null));
        c.check("b", false, "broken", || json!({"x": 1}));
        assert_eq!(c.cases, 2);
        assert_eq!(c.failures[0].reproducer, json!({"x": 1}));
    }

    #[test]
    fn telescoping_suite_passes() {
        let rep = find_suite("telescoping").unwrap().run(1);
        assert!(rep.passed(), "{:?}", rep.failures.first());
        assert!(rep.cases > 100);
    }
}
