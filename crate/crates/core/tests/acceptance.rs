//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any is red. Runs without the libtest harness, so the lines are
//! always visible.

use std::time::{Duration, Instant};

use metalift::selftest::{
    example_group, gamma_cross_oracle, identity_oracles, lemma_suite, modular_suite, orbit_balance_suite,
    round_trip_suite, small_group, t_alpha_oracle, worked_example_lift, worked_example_table, SuiteReport, Tally,
};

struct Line {
    id: u32,
    title: &'static str,
    ok: bool,
    elapsed: Duration,
    detail: String,
}

fn summarize(reports: &[&SuiteReport]) -> (bool, String) {
    let ok = reports.iter().all(|r| r.passed);
    let mut parts = Vec::new();
    for r in reports {
        parts.push(format!("{}: {} cases", r.name, r.cases));
        parts.extend(r.notes.iter().cloned());
        parts.extend(r.failures.iter().map(|f| format!("FAILED {f}")));
    }
    (ok, parts.join("; "))
}

fn within(limit: Duration, elapsed: Duration) -> (bool, String) {
    (elapsed <= limit, format!("runtime {:.2?} (limit {:?})", elapsed, limit))
}

fn main() {
    let mut lines = Vec::new();
    let mut tally = Tally::default();

    // 1
    let t = Instant::now();
    let r = worked_example_table();
    let el = t.elapsed();
    let (ok, detail) = summarize(&[&r]);
    let (fast, rt) = within(Duration::from_secs(1), el);
    lines.push(Line { id: 1, title: "worked-example verdict table", ok: ok && fast, elapsed: el, detail: format!("{detail}; {rt}") });

    // 2
    let t = Instant::now();
    let r = worked_example_lift(8, &mut tally);
    let el = t.elapsed();
    let (ok, detail) = summarize(&[&r]);
    let (fast, rt) = within(Duration::from_secs(10), el);
    lines.push(Line { id: 2, title: "lift of V(1,2)+V(3,2) at N=8, e=2", ok: ok && fast, elapsed: el, detail: format!("{detail}; {rt}") });

    // 3
    let t = Instant::now();
    let r = round_trip_suite(&[small_group(), example_group()], 3, 6, None, &mut tally);
    let el = t.elapsed();
    let (ok, detail) = summarize(&[&r]);
    let (fast, rt) = within(Duration::from_secs(300), el);
    lines.push(Line { id: 3, title: "exhaustive round trip, s<=3, kappa<=6", ok: ok && fast, elapsed: el, detail: format!("{detail}; {rt}") });

    // 4
    let t = Instant::now();
    let r = gamma_cross_oracle(0x6a, 300, 6, &mut tally);
    let el = t.elapsed();
    let (ok, detail) = summarize(&[&r]);
    lines.push(Line { id: 4, title: "recursive vs closed-form Gamma, 300 plans", ok: ok && r.cases >= 300, elapsed: el, detail });

    // 5
    let t = Instant::now();
    let r = t_alpha_oracle(0x75, 200);
    let el = t.elapsed();
    let (ok, detail) = summarize(&[&r]);
    lines.push(Line { id: 5, title: "T^alpha formula, 200 trials", ok, elapsed: el, detail });

    // 6
    let t = Instant::now();
    let ids = identity_oracles(0x1d, 1000);
    let lem = lemma_suite(&tally);
    let el = t.elapsed();
    let (ok, detail) = summarize(&[&ids, &lem]);
    lines.push(Line { id: 6, title: "identity oracles and structural lemmas", ok, elapsed: el, detail });

    // 7
    let t = Instant::now();
    let r = modular_suite(9);
    let el = t.elapsed();
    let (ok, detail) = summarize(&[&r]);
    lines.push(Line { id: 7, title: "modular suite", ok, elapsed: el, detail });

    // 8
    let t = Instant::now();
    let r = orbit_balance_suite(&tally);
    let el = t.elapsed();
    let (ok, detail) = summarize(&[&r]);
    lines.push(Line { id: 8, title: "orbit balance", ok, elapsed: el, detail });

    for l in &lines {
        println!(
            "{} criterion {}: {} [{:.2?}] -- {}",
            if l.ok { "PASS" } else { "FAIL" },
            l.id,
            l.title,
            l.elapsed,
            l.detail
        );
    }
    let red: Vec<u32> = lines.iter().filter(|l| !l.ok).map(|l| l.id).collect();
    if !red.is_empty() {
        eprintln!("criteria failing: {red:?}");
        std::process::exit(1);
    }
    println!("all {} criteria pass", lines.len());
}
