//! Acceptance criteria, one PASS/FAIL line each. Every criterion runs the
//! matching self-test suites at a fixed seed and enforces its time budget;
//! the last three also re-check their fixtures through the public API.

use std::time::{Duration, Instant};

use iwlab_core::coeff::TruncatedLocalRing;
use iwlab_core::iwasawa::{self, Candidate, ElementaryModule, Poly, Poly2, PolyIdeal};
use iwlab_core::suites::{find_suite, SuiteReport};

const SEED: u64 = 42;

struct Outcome {
    ok: bool,
    detail: String,
}

fn run_suites(names: &[&str]) -> (bool, Vec<SuiteReport>) {
    let reports: Vec<SuiteReport> = names
        .iter()
        .map(|n| find_suite(n).unwrap_or_else(|| panic!("unknown suite {n}")).run(SEED))
        .collect();
    let ok = reports.iter().all(|r| r.passed() && r.cases > 0);
    (ok, reports)
}

fn summary(reports: &[SuiteReport]) -> String {
    reports
        .iter()
        .map(|r| {
            let mut s = format!("{} cases={} failures={}", r.suite, r.cases, r.failures.len());
            if let Some(f) = r.failures.first() {
                s += &format!(" first: {} ({})", f.case, f.message);
            }
            s
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn suites_only(names: &[&str]) -> Outcome {
    let (ok, reports) = run_suites(names);
    Outcome { ok, detail: summary(&reports) }
}

fn slope_fixture() -> Outcome {
    let (ok, reports) = run_suites(&["slope"]);
    let mut detail = summary(&reports);
    let r = TruncatedLocalRing::integers(3, 24).unwrap();
    let t = Poly::var(&r);
    let e = ElementaryModule::new(&r, vec![t.pow(2), t.scale(&r.from_int(3))]).unwrap();
    let mut direct = true;
    for (i, slope, offset) in [(0, 3u32, 1u32), (1, 1, 1)] {
        let rep = iwasawa::slope_check(&e, i, &t, 6).unwrap();
        let expect: Vec<(u32, u32)> = (1..=6).map(|n| (n, slope * n + offset)).collect();
        let good = rep.values == expect && rep.valuation == slope && rep.slope_matches && rep.offset_constant;
        detail += &format!("; i={i} C(n)={:?} ord={}", rep.values.iter().map(|v| v.1).collect::<Vec<_>>(), rep.valuation);
        direct &= good;
    }
    Outcome { ok: ok && direct, detail }
}

fn good_specialization_fixture() -> Outcome {
    let (ok, reports) = run_suites(&["good-specialization"]);
    let mut detail = summary(&reports);
    let r = TruncatedLocalRing::integers(3, 3).unwrap();
    let lin = |k: (usize, usize)| Poly2::new(&r, [(k, r.int_coeffs(1))]);
    let p = Poly2::new(&r, [((0, 0), r.int_coeffs(3))]);
    let i = PolyIdeal::two_var(&r, vec![p.clone(), lin((1, 0))], 10).unwrap();
    let j = PolyIdeal::two_var(&r, vec![p, lin((0, 1))], 10).unwrap();
    let found = iwasawa::find_good_specialization(&i, &j, 2, &[r.one(), r.from_int(4)]).unwrap();
    let rejected = |a1, a2| found.rejected.iter().any(|x| x.candidate.a1 == a1 && x.candidate.a2 == a2);
    let heights = found.left.ideal.height_at_least_two().unwrap() && found.right.ideal.height_at_least_two().unwrap();
    let direct = found.found == Candidate { a1: 1, a2: 1, u: vec![1] } && rejected(1, 0) && rejected(0, 1) && heights;
    detail += &format!("; found ({},{},{:?}) rejected={} heights_ok={heights}", found.found.a1, found.found.a2, found.found.u, found.rejected.len());
    Outcome { ok: ok && direct, detail }
}

fn ideal_relation_fixture() -> Outcome {
    let (ok, reports) = run_suites(&["ideal-relations"]);
    let mut detail = summary(&reports);
    let r = TruncatedLocalRing::integers(3, 2).unwrap();
    let i = PolyIdeal::from_int_polys(&r, &[&[0, 0, 1], &[0, 3]], 12).unwrap();
    let t = PolyIdeal::from_int_polys(&r, &[&[0, 1]], 12).unwrap();
    let t2 = PolyIdeal::from_int_polys(&r, &[&[0, 0, 1]], 12).unwrap();
    let fwd = iwasawa::precedes(&i, &t).unwrap();
    let back = iwasawa::precedes(&t, &i).unwrap();
    let no = iwasawa::precedes(&t, &t2).unwrap();
    let cert = |c: &iwasawa::Comparison| c.certificate.as_ref().is_some_and(|x| x.verified);
    let direct = fwd.holds && back.holds && cert(&fwd) && cert(&back) && !no.holds && iwasawa::equivalent(&i, &t).unwrap();
    detail += &format!(
        "; (T^2,3T)≺(T)={} (T)≺(T^2,3T)={} certificates={} (T)≺(T^2)={}",
        fwd.holds,
        back.holds,
        cert(&fwd) && cert(&back),
        no.holds
    );
    Outcome { ok: ok && direct, detail }
}

#[test]
fn acceptance() {
    type Check = Box<dyn Fn() -> Outcome>;
    let criteria: Vec<(&str, u64, Check)> = vec![
        ("1 telescoping identity", 1, Box::new(|| suites_only(&["telescoping"]))),
        ("2 Fitting ideal of a quotient", 30, Box::new(|| suites_only(&["fitting-quotient"]))),
        ("3 Fitting ideals commute with base change", 30, Box::new(|| suites_only(&["fitting-base-change"]))),
        ("4 bidual reduction and Hom surjectivity", 60, Box::new(|| suites_only(&["bidual-reduction", "hom-reduction"]))),
        ("5 s_n projector and D_n identity", 30, Box::new(|| suites_only(&["sn-projector", "sn-identity"]))),
        ("6 Euler axioms and corruption edges", 60, Box::new(|| suites_only(&["euler-axioms"]))),
        ("7 derivative well-definedness", 60, Box::new(|| suites_only(&["derivative-independence", "derivative-invariance"]))),
        ("8 weak specialization compatibility", 120, Box::new(|| suites_only(&["specialization-two-var", "specialization-one-var"]))),
        ("9 slope of C(n)", 5, Box::new(slope_fixture)),
        ("10 good specialization search", 5, Box::new(good_specialization_fixture)),
        ("11 ideal relation fixture", 5, Box::new(ideal_relation_fixture)),
    ];
    let mut failed = Vec::new();
    for (name, budget, check) in &criteria {
        let start = Instant::now();
        let out = check();
        let took = start.elapsed();
        let in_time = took < Duration::from_secs(*budget);
        let ok = out.ok && in_time;
        println!(
            "{} criterion {name}: {} [{} ms, budget {} s{}]",
            if ok { "PASS" } else { "FAIL" },
            out.detail,
            took.as_millis(),
            budget,
            if in_time { "" } else { ", over budget" }
        );
        if !ok {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
