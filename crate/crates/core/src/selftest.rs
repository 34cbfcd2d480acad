//! Seeded check suites shared by `metalift selftest` and the acceptance
//! tests. Each suite returns a [`SuiteReport`]; none of them panics on a
//! failed check.

use std::collections::HashSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::Ring;
use crate::builder::{
    build_gamma_closed_form, build_gamma_recursive, build_t, lift_in, structural_lemmas, PrecisionSpec, CHECK_FINAL_EQ,
    CHECK_ZERO_GAMMA,
};
use crate::decide::{
    assign_eigenvalues, decide_lift, edge, orbit_balance_check, a_flag, Chain, DecideOptions, LiftPlan,
};
use crate::error::Result;
use crate::group::{mul_mod, GroupParams};
use crate::local::RingContext;
use crate::matrix::{mat_pow, Matrix};
use crate::modular::{
    build_summand, decompose, from_uniserial, module_of, to_uniserial, verify_kg_relations, Decomposition,
    ModularContext, SummandSpec,
};
use crate::symfun::{abll_identity_check, bidiagonal, sum_prod_identity_check, t_alpha_matrix};

const MAX_LOGGED: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub cases: u64,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

struct Suite {
    name: String,
    cases: u64,
    failed: u64,
    failures: Vec<String>,
    notes: Vec<String>,
    start: Instant,
}

impl Suite {
    fn new(name: &str) -> Self {
        Suite {
            name: name.to_string(),
            cases: 0,
            failed: 0,
            failures: Vec::new(),
            notes: Vec::new(),
            start: Instant::now(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < MAX_LOGGED {
                self.failures.push(what());
            }
        }
    }

    fn result<T>(&mut self, r: Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(false, || format!("{}: {e}", what()));
                None
            }
        }
    }

    fn finish(self) -> SuiteReport {
        let mut failures = self.failures;
        if self.failed as usize > failures.len() {
            failures.push(format!("... {} failures in total", self.failed));
        }
        SuiteReport {
            name: self.name,
            passed: self.failed == 0 && self.cases > 0,
            cases: self.cases,
            failures,
            notes: self.notes,
            elapsed_ms: self.start.elapsed().as_millis(),
        }
    }
}

/// Structural-lemma and orbit-balance observations collected while other
/// suites build lifts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub lemma_chains: u64,
    pub lemma_failures: Vec<String>,
    pub plans_checked: u64,
    pub balance_failures: Vec<String>,
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        self.lemma_chains += other.lemma_chains;
        self.lemma_failures.extend(other.lemma_failures);
        self.plans_checked += other.plans_checked;
        self.balance_failures.extend(other.balance_failures);
    }

    fn balance(&mut self, plan: &LiftPlan, params: &GroupParams, label: &str) {
        self.plans_checked += 1;
        match orbit_balance_check(plan, params) {
            Ok(true) => {}
            Ok(false) => self.balance_failures.push(format!("{label}: unbalanced")),
            Err(e) => self.balance_failures.push(format!("{label}: {e}")),
        }
    }
}

pub fn example_group() -> GroupParams {
    GroupParams::new(5, 2, 4, 7).expect("valid")
}

pub fn small_group() -> GroupParams {
    GroupParams::new(3, 2, 2, 8).expect("valid")
}

fn bound(params: &GroupParams) -> Result<ModularContext> {
    ModularContext::new(params)
}

fn dec(v: &[(u64, u64)]) -> Decomposition {
    Decomposition(v.iter().map(|&(epsilon, kappa)| SummandSpec { epsilon, kappa }).collect())
}

// ---------------------------------------------------------------- oracles

/// Unpruned brute force: every set partition, every ordering of every block.
pub fn brute_force_liftable(dec: &Decomposition, params: &GroupParams, a0: u64, strict: bool) -> bool {
    let nodes = &dec.0;
    let s = nodes.len();
    let (q, m) = (params.q, params.m);
    let chain_ok = |order: &[usize]| -> Option<u64> {
        let sum: u64 = order.iter().map(|&i| nodes[i].kappa).sum();
        let r = sum % m;
        let linked = order.windows(2).all(|w| edge(&nodes[w[0]], &nodes[w[1]], a0, m));
        (sum <= q && (m == 1 || r <= 1) && linked).then_some(r)
    };
    // every block must admit some ordering; collect the achievable residues
    let block_residues = |block: &[usize]| -> HashSet<u64> {
        let mut out = HashSet::new();
        let mut perm = block.to_vec();
        permutations(&mut perm, 0, &mut |p| {
            if let Some(r) = chain_ok(p) {
                out.insert(r);
            }
        });
        out
    };
    let mut labels = vec![0usize; s];
    let mut found = s == 0;
    set_partitions(&mut labels, 0, 0, &mut |labels, nblocks| {
        if found {
            return;
        }
        let mut common: Option<HashSet<u64>> = None;
        for b in 0..nblocks {
            let block: Vec<usize> = (0..s).filter(|&i| labels[i] == b).collect();
            let rs = block_residues(&block);
            if rs.is_empty() {
                return;
            }
            common = Some(match common {
                None => rs,
                Some(c) => c.intersection(&rs).copied().collect(),
            });
        }
        if !strict || common.is_none_or(|c| !c.is_empty()) {
            found = true;
        }
    });
    found
}

fn set_partitions(labels: &mut Vec<usize>, i: usize, nblocks: usize, f: &mut dyn FnMut(&[usize], usize)) {
    if i == labels.len() {
        f(labels, nblocks);
        return;
    }
    for b in 0..=nblocks {
        labels[i] = b;
        set_partitions(labels, i + 1, nblocks.max(b + 1), f);
    }
}

fn permutations(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

/// `C(n, k) mod p` by Pascal's triangle.
pub fn binomial_table_mod(n: u64, kmax: usize, p: u64) -> Vec<u64> {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![1u64; row.len() + 1];
        for k in 1..row.len() {
            next[k] = (row[k - 1] + row[k]) % p;
        }
        next.truncate(kmax + 1);
        row = next;
    }
    (0..=kmax).map(|k| row.get(k).copied().unwrap_or(0) % p).collect()
}

/// All multisets of at most `max_s` summands with `kappa <= max_kappa`.
pub fn all_decompositions(params: &GroupParams, max_s: usize, max_kappa: u64) -> Vec<Decomposition> {
    let types: Vec<SummandSpec> = (1..=max_kappa.min(params.q))
        .flat_map(|kappa| (0..params.m).map(move |epsilon| SummandSpec { epsilon, kappa }))
        .collect();
    let mut out = vec![Decomposition::default()];
    let mut frontier: Vec<(usize, Vec<SummandSpec>)> = vec![(0, Vec::new())];
    for _ in 0..max_s {
        let mut next = Vec::new();
        for (from, v) in &frontier {
            for (i, t) in types.iter().enumerate().skip(*from) {
                let mut w = v.clone();
                w.push(*t);
                out.push(Decomposition(w.clone()));
                next.push((i, w));
            }
        }
        frontier = next;
    }
    out
}

// ---------------------------------------------------------------- suites

/// Verdicts on single summands and on the three worked pairs.
pub fn worked_example_table() -> SuiteReport {
    let mut s = Suite::new("worked-example verdicts");
    let g = example_group();
    let Some(ctx) = s.result(bound(&g), || "field".into()) else {
        return s.finish();
    };
    let a0 = ctx.a0();
    let yes = [1u64, 4, 5, 8, 9, 12, 13, 16, 17, 20, 21, 24, 25];
    for eps in 0..4 {
        for kappa in 1..=25 {
            let got = decide_lift(&dec(&[(eps, kappa)]), &ctx.params, a0, DecideOptions::default()).is_liftable();
            s.check(got == yes.contains(&kappa), || format!("V({eps},{kappa}): got {got}"));
        }
    }
    let pairs: [(&[(u64, u64)], bool); 3] = [
        (&[(1, 2), (3, 2)], true),
        (&[(1, 2), (1, 2)], false),
        (&[(0, 21), ((21 * a0) % 4, 23)], false),
    ];
    for (v, want) in pairs {
        let got = decide_lift(&dec(v), &ctx.params, a0, DecideOptions::default()).is_liftable();
        s.check(got == want, || format!("{}: got {got}", dec(v)));
    }
    s.finish()
}

/// Full lift of `V(1,2) + V(3,2)` with `e = 2` and the given `N`.
pub fn worked_example_lift(n: u32, tally: &mut Tally) -> SuiteReport {
    let mut s = Suite::new("worked-example lift");
    let g = example_group();
    let Some(ring) = s.result(RingContext::new(&g, n, 2), || "ring".into()) else {
        return s.finish();
    };
    let input = dec(&[(1, 2), (3, 2)]);
    let d = decide_lift(&input, &ring.params, 1, DecideOptions::default());
    let Some(plan) = d.plan() else {
        s.check(false, || "refused".into());
        return s.finish();
    };
    let Some(out) = s.result(lift_in(plan, &ring, PrecisionSpec::default()), || "lift".into()) else {
        return s.finish();
    };
    s.check(out.pair.plan.exponents() == vec![1, 7, 24, 18], || format!("exponents {:?}", out.pair.plan.exponents()));
    for c in &out.report.checks {
        s.check(c.passed, || format!("{}: {:?}", c.name, c.detail));
        s.check(c.precision >= 32, || format!("{} only at precision {}", c.name, c.precision));
    }
    s.check(out.report.gamma_order == Some(4), || format!("Gamma order {:?}", out.report.gamma_order));
    s.check(out.reduced == input.canonical(4), || format!("reduced to {}", out.reduced));
    s.check(!out.escalated, || "needed precision escalation".into());
    record_lemmas(tally, &out.report, "worked example");
    tally.balance(&out.pair.plan, &ring.params, "worked example");
    s.notes.push(format!(
        "N = {}, prec_cap = {}, min check precision = {}",
        ring.n,
        ring.prec_cap,
        out.report.min_precision()
    ));
    s.finish()
}

fn record_lemmas(tally: &mut Tally, report: &crate::builder::VerificationReport, label: &str) {
    tally.lemma_chains += report.full_orbit_chains as u64;
    for name in [CHECK_ZERO_GAMMA, CHECK_FINAL_EQ] {
        if let Some(c) = report.check(name) {
            if !c.passed {
                tally.lemma_failures.push(format!("{label}: {name} {:?}", c.detail));
            }
        }
    }
}

/// Decide against the brute-force oracle, and lift every positive case.
/// With `sample = Some((seed, k))` only `k` random decompositions per group
/// are taken.
pub fn round_trip_suite(
    groups: &[GroupParams],
    max_s: usize,
    max_kappa: u64,
    sample: Option<(u64, usize)>,
    tally: &mut Tally,
) -> SuiteReport {
    let mut s = Suite::new("decide/lift/reduce round trip");
    let mut lifted = 0u64;
    let mut refused = 0u64;
    for g in groups {
        let Some(ctx) = s.result(bound(g), || format!("field for {g:?}")) else {
            continue;
        };
        let Some(ring) = s.result(RingContext::new(&ctx.params, crate::local::default_precision(g, 2, 64), 2), || "ring".into())
        else {
            continue;
        };
        let a0 = ctx.a0();
        let mut all = all_decompositions(g, max_s, max_kappa);
        if let Some((seed, k)) = sample {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ g.q);
            all.shuffle(&mut rng);
            all.truncate(k);
        }
        for d in all {
            let label = format!("q={} m={} {}", g.q, g.m, d);
            let decision = decide_lift(&d, &ctx.params, a0, DecideOptions::default());
            let oracle = brute_force_liftable(&d, &ctx.params, a0, false);
            s.check(decision.is_liftable() == oracle, || format!("{label}: decide {} oracle {oracle}", decision.is_liftable()));
            let Some(plan) = decision.plan() else {
                refused += 1;
                continue;
            };
            s.check(plan.validate(&ctx.params, a0).is_ok(), || format!("{label}: witness does not re-validate"));
            match lift_in(plan, &ring, PrecisionSpec::default()) {
                Ok(out) => {
                    lifted += 1;
                    s.check(out.reduced == d.canonical(g.m), || format!("{label}: reduced to {}", out.reduced));
                    record_lemmas(tally, &out.report, &label);
                    tally.balance(&out.pair.plan, &ctx.params, &label);
                }
                Err(e) => s.check(false, || format!("{label}: {e}")),
            }
        }
    }
    s.notes.push(format!("{lifted} lifted and verified, {refused} refused"));
    s.finish()
}

/// A random valid single chain of dimension `<= max_d` with randomly rotated
/// orbits, so exponents vary beyond the canonical assignment.
pub fn random_chain_plan<R: Rng>(rng: &mut R, params: &GroupParams, a0: u64, max_d: u64) -> LiftPlan {
    let (q, m) = (params.q, params.m);
    let dims: Vec<u64> = (1..=max_d.min(q)).filter(|d| m == 1 || d % m <= 1).collect();
    let d = *dims.choose(rng).expect("d = 1 always qualifies");
    // random composition of d
    let mut kappas = Vec::new();
    let mut left = d;
    while left > 0 {
        let k = rng.gen_range(1..=left);
        kappas.push(k);
        left -= k;
    }
    let mut eps = rng.gen_range(0..m);
    let mut summands = Vec::new();
    for &k in &kappas {
        summands.push(SummandSpec { epsilon: eps, kappa: k });
        eps = (eps + mul_mod(a0, k % m, m)) % m;
    }
    let flag = a_flag(d, q, m);
    let mut orbits: Vec<Vec<u64>> = Vec::new();
    let mut seen = HashSet::new();
    for c in 1..q {
        if seen.insert(c) {
            let o = params.alpha_orbit(c);
            seen.extend(o.iter().copied());
            orbits.push(o);
        }
    }
    orbits.shuffle(rng);
    let mut exps = Vec::new();
    for o in orbits.iter().take(((d - flag as u64) / m) as usize) {
        let r = rng.gen_range(0..o.len());
        exps.extend(o[r..].iter().chain(&o[..r]).copied());
    }
    if flag == 1 {
        exps.push(0);
    }
    LiftPlan {
        decomposition: Decomposition(summands.clone()),
        chains: vec![Chain {
            members: (0..summands.len()).collect(),
            summands,
            a_flag: flag,
            exponents: exps,
        }],
        strict_uniform_a: false,
    }
}

pub fn cross_oracle_groups() -> Vec<GroupParams> {
    [(5, 2, 4, 7), (3, 2, 2, 8), (7, 1, 3, 2), (13, 1, 4, 5), (3, 3, 2, 26), (2, 3, 1, 1)]
        .iter()
        .map(|&(p, h, m, a)| GroupParams::new(p, h, m, a).expect("valid"))
        .collect()
}

/// Recursive versus closed-form `Gamma` on random single chains.
pub fn gamma_cross_oracle(seed: u64, trials: usize, max_d: u64, tally: &mut Tally) -> SuiteReport {
    let mut s = Suite::new("Gamma: recursion vs closed form");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rings: Vec<RingContext> = cross_oracle_groups()
        .iter()
        .filter_map(|g| RingContext::new(g, crate::local::default_precision(g, 2, 48), 2).ok())
        .collect();
    for trial in 0..trials {
        let ring = &rings[rng.gen_range(0..rings.len())];
        let a0 = ring.params.a0().unwrap_or(0);
        let plan = random_chain_plan(&mut rng, &ring.params, a0, max_d);
        let label = format!("trial {trial} (q={}, m={}) {:?}", ring.params.q, ring.params.m, plan.chains[0].exponents);
        if let Err(e) = plan.validate(&ring.params, a0) {
            s.check(false, || format!("{label}: {e}"));
            continue;
        }
        let Some(t) = s.result(build_t(&plan, ring), || label.clone()) else { continue };
        let eps = [plan.chains[0].epsilon()];
        let Some(rec) = s.result(build_gamma_recursive(&t, &eps, ring), || format!("{label}: recursive")) else {
            continue;
        };
        let Some(closed) = s.result(build_gamma_closed_form(&t, &eps, ring), || format!("{label}: closed form")) else {
            continue;
        };
        let mut mismatch = None;
        for i in 0..t.rows {
            for j in 0..t.rows {
                let eq = ring.equal_at(rec.get(i, j), closed.get(i, j));
                if !eq.equal && mismatch.is_none() {
                    mismatch = Some((i + 1, j + 1));
                }
            }
        }
        s.check(mismatch.is_none(), || format!("{label}: entry {mismatch:?} differs"));
        // the structural lemmas on whole-orbit chains
        if t.rows >= 2 && plan.chains[0].a_flag == 0 {
            let ta = mat_pow(ring, &t, ring.params.alpha);
            let lem = structural_lemmas(ring, &t, &rec, &ta);
            tally.lemma_chains += 1;
            if !(lem.zero_gamma && lem.final_equation) {
                tally.lemma_failures.push(format!("{label}: {lem:?}"));
            }
        }
    }
    s.finish()
}

/// `t^(alpha)` formula against repeated multiplication, and its reduction
/// against binomial coefficients.
pub fn t_alpha_oracle(seed: u64, trials: usize) -> SuiteReport {
    let mut s = Suite::new("T^alpha formula vs matrix power");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rings: Vec<RingContext> = [(5u64, 2u32, 4u64, 7u64), (3, 2, 2, 8), (7, 1, 3, 2)]
        .iter()
        .filter_map(|&(p, h, m, a)| {
            let g = GroupParams::new(p, h, m, a).ok()?;
            RingContext::new(&g, 3, 2).ok()
        })
        .collect();
    for trial in 0..trials {
        let ring = &rings[trial % rings.len()];
        let d = rng.gen_range(1..=6usize);
        let alpha = rng.gen_range(1..=50u64);
        let cap = ring.prec_cap;
        let lambdas: Vec<_> = (0..d).map(|_| ring.random_element(&mut rng, cap)).collect();
        let subdiag: Vec<_> = (0..d.saturating_sub(1)).map(|_| ring.random_element(&mut rng, cap)).collect();
        let t = bidiagonal(ring, &lambdas, &subdiag);
        let Some(formula) = s.result(t_alpha_matrix(ring, alpha, &lambdas, &subdiag), || format!("trial {trial}")) else {
            continue;
        };
        let mut power = Matrix::identity(ring, d);
        for _ in 0..alpha {
            power = ring.mat_mul(&power, &t);
        }
        let same = (0..d).all(|i| (0..d).all(|j| ring.equal_at(formula.get(i, j), power.get(i, j)).equal));
        s.check(same, || format!("trial {trial}: d={d} alpha={alpha}"));

        // unit subdiagonal, eigenvalues zeta_q^c: reduction is binomial
        let lam1: Vec<_> = (0..d).map(|_| ring.zeta_q(rng.gen_range(0..ring.params.q) as i64)).collect();
        let ones = vec![ring.one(); d.saturating_sub(1)];
        let Some(f1) = s.result(t_alpha_matrix(ring, alpha, &lam1, &ones), || format!("trial {trial}")) else {
            continue;
        };
        let binom = binomial_table_mod(alpha, d, ring.p);
        let red = ring.reduce_matrix(&f1);
        let k = &ring.field;
        let ok = (0..d).all(|i| {
            (0..d).all(|j| {
                let want = if i >= j { binom[i - j] } else { 0 };
                *red.get(i, j) == k.embed(want)
            })
        });
        s.check(ok, || format!("trial {trial}: reduction is not binomial (alpha={alpha})"));
    }
    s.finish()
}

/// Sum-product and window identities on random elements of `R_N`.
pub fn identity_oracles(seed: u64, trials: usize) -> SuiteReport {
    let mut s = Suite::new("sum-product and window identities");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rings: Vec<RingContext> = [(5u64, 2u32, 4u64, 7u64), (3, 2, 2, 8), (2, 3, 1, 1)]
        .iter()
        .filter_map(|&(p, h, m, a)| RingContext::new(&GroupParams::new(p, h, m, a).ok()?, 3, 2).ok())
        .collect();
    let mut zero_cases = 0;
    for trial in 0..trials {
        let ring = &rings[trial % rings.len()];
        let cap = ring.prec_cap;
        let n = rng.gen_range(2..=7usize);
        let xs: Vec<_> = (0..n).map(|_| ring.random_element(&mut rng, cap)).collect();
        let z = if trial % 4 == 0 {
            zero_cases += 1;
            xs[n - 1].clone()
        } else {
            ring.random_element(&mut rng, cap)
        };
        let r = sum_prod_identity_check(ring, &z, &xs);
        s.check(matches!(r, Ok(true)), || format!("sum-product trial {trial}: {r:?}"));

        let len = rng.gen_range(1..=7usize);
        let lambdas: Vec<_> = (0..len).map(|_| ring.random_element(&mut rng, cap)).collect();
        let mut idx: Vec<usize> = (0..4).map(|_| rng.gen_range(1..=len)).collect();
        idx.sort();
        let la = ring.random_element(&mut rng, cap);
        let lb = ring.random_element(&mut rng, cap);
        let r = abll_identity_check(ring, &la, &lb, idx[0], idx[1], idx[2], idx[3], &lambdas);
        s.check(matches!(r, Ok(true)), || format!("window trial {trial} {idx:?}: {r:?}"));
    }
    s.notes.push(format!("{zero_cases} instances with z = x_n"));
    s.finish()
}

/// Relations for every summand, decomposition of every small direct sum,
/// uniserial bijection.
pub fn modular_suite(max_total_dim: u64) -> SuiteReport {
    let mut s = Suite::new("modular representations");
    for g in [example_group(), small_group()] {
        let Some(ctx) = s.result(bound(&g), || "field".into()) else { continue };
        for eps in 0..g.m {
            for kappa in 1..=g.q {
                let spec = SummandSpec { epsilon: eps, kappa };
                let Some(v) = s.result(build_summand(&ctx, spec), || spec.to_string()) else { continue };
                let rel = verify_kg_relations(&ctx, &v);
                s.check(matches!(&rel, Ok(r) if r.all_hold()), || format!("{spec}: {rel:?}"));
            }
        }
    }
    let g = small_group();
    if let Some(ctx) = s.result(bound(&g), || "field".into()) {
        let mut count = 0;
        for d in all_decompositions(&g, max_total_dim as usize, max_total_dim) {
            if d.dimension() > max_total_dim {
                continue;
            }
            count += 1;
            let Some(module) = s.result(module_of(&ctx, &d), || d.to_string()) else { continue };
            let got = decompose(&ctx, &module);
            s.check(matches!(&got, Ok(x) if *x == d.canonical(g.m)), || format!("{d}: decomposed to {got:?}"));
        }
        s.notes.push(format!("{count} multisets of total dimension <= {max_total_dim}"));
    }
    let g = example_group();
    for ell in 0..g.m {
        for mu in 1..=g.q {
            let back = from_uniserial(&g, ell, mu).and_then(|sp| to_uniserial(&g, sp));
            s.check(matches!(back, Ok(x) if x == (ell, mu)), || format!("U({ell},{mu}): {back:?}"));
        }
    }
    s.finish()
}

/// Eigenvalue multiplicities constant along orbits for every plan seen,
/// plus the projective chain.
pub fn orbit_balance_suite(tally: &Tally) -> SuiteReport {
    let mut s = Suite::new("orbit balance");
    s.cases = tally.plans_checked;
    for f in &tally.balance_failures {
        s.check(false, || f.clone());
    }
    let g = example_group();
    for eps in 0..4 {
        let d = decide_lift(&dec(&[(eps, 25)]), &g, 1, DecideOptions::default());
        let Some(plan) = d.plan() else {
            s.check(false, || format!("V({eps},25) refused"));
            continue;
        };
        let Some(plan) = s.result(assign_eigenvalues(plan, &g), || "assign".into()) else { continue };
        let r = orbit_balance_check(&plan, &g);
        s.check(matches!(r, Ok(true)), || format!("V({eps},25): {r:?}"));
        let zeros = plan.exponents().iter().filter(|&&c| c == 0).count() as u64;
        let moving = plan.dimension() - zeros;
        s.check(moving == 24 && moving.is_multiple_of(4), || format!("dim - dim^(C_q) = {moving}"));
    }
    s.notes.push(format!("{} plans from the other suites", tally.plans_checked));
    s.finish()
}

/// Structural lemmas on every whole-orbit chain seen by the other suites.
pub fn lemma_suite(tally: &Tally) -> SuiteReport {
    let mut s = Suite::new("structural lemmas on whole-orbit chains");
    s.cases = tally.lemma_chains;
    for f in &tally.lemma_failures {
        s.check(false, || f.clone());
    }
    s.notes.push(format!("{} chains", tally.lemma_chains));
    s.finish()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelftestSummary {
    pub seed: u64,
    pub trials: usize,
    pub suites: Vec<SuiteReport>,
}

impl SelftestSummary {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

/// The quick battery behind `metalift selftest`: every suite, with random
/// sampling where the acceptance tests are exhaustive.
pub fn run_selftest(seed: u64, trials: usize) -> SelftestSummary {
    let mut tally = Tally::default();
    let mut suites = vec![worked_example_table()];
    suites.push(worked_example_lift(8, &mut tally));
    let mut t = Tally::default();
    suites.push(round_trip_suite(&[small_group(), example_group()], 3, 6, Some((seed, trials.max(1))), &mut t));
    tally.merge(t);
    suites.push(gamma_cross_oracle(seed, trials, 6, &mut tally));
    suites.push(t_alpha_oracle(seed.wrapping_add(1), trials));
    suites.push(identity_oracles(seed.wrapping_add(2), trials));
    suites.push(modular_suite(6));
    suites.push(lemma_suite(&tally));
    suites.push(orbit_balance_suite(&tally));
    SelftestSummary { seed, trials, suites }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_enumeration_counts() {
        let mut labels = vec![0; 5];
        let mut n = 0;
        set_partitions(&mut labels, 0, 0, &mut |_, _| n += 1);
        assert_eq!(n, 52);
        let mut v = vec![0, 1, 2, 3];
        let mut k = 0;
        permutations(&mut v, 0, &mut |_| k += 1);
        assert_eq!(k, 24);
    }

    #[test]
    fn pascal_mod_p() {
        assert_eq!(binomial_table_mod(7, 7, 5), vec![1, 2, 1, 0, 0, 1, 2, 1]);
        assert_eq!(binomial_table_mod(3, 5, 5), vec![1, 3, 3, 1, 0, 0]);
    }

    #[test]
    fn multiset_counts() {
        let g = small_group();
        // 2 * 3 = 6 types; multisets of size <= 2: 1 + 6 + 21
        assert_eq!(all_decompositions(&g, 2, 3).len(), 28);
    }

    #[test]
    fn oracle_matches_worked_examples() {
        let g = example_group();
        assert!(brute_force_liftable(&dec(&[(1, 2), (3, 2)]), &g, 1, false));
        assert!(!brute_force_liftable(&dec(&[(1, 2), (1, 2)]), &g, 1, false));
        assert!(!brute_force_liftable(&dec(&[(0, 21), (1, 23)]), &g, 1, false));
        assert!(brute_force_liftable(&dec(&[]), &g, 1, false));
    }

    #[test]
    fn random_plans_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in cross_oracle_groups() {
            let ctx = ModularContext::new(&g).unwrap();
            for _ in 0..20 {
                let p = random_chain_plan(&mut rng, &ctx.params, ctx.a0(), 6);
                p.validate(&ctx.params, ctx.a0()).unwrap();
            }
        }
    }
}
