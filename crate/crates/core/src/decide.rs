//! Liftability as a chain-partition problem.
//!
//! A decomposition lifts iff its summands can be split into ordered chains
//! `V(eps_1, kappa_1) -> V(eps_2, kappa_2) -> ...` with
//!
//! * (a) `sum kappa <= q`,
//! * (b) `sum kappa = 0 or 1 (mod m)`,
//! * (c) `eps_{j+1} = eps_j + a0 * kappa_j (mod m)` between neighbours.
//!
//! The search is exhaustive backtracking; a refusal is returned together with
//! what was searched.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{mul_mod, GroupParams};
use crate::modular::{Decomposition, SummandSpec};

/// Subdiagonal entry of the lifted `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subdiag {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "t")]
    T,
}

impl fmt::Display for Subdiag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subdiag::Zero => "0",
            Subdiag::One => "1",
            Subdiag::T => "t",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    /// Indices into the plan's (canonically sorted) decomposition.
    pub members: Vec<usize>,
    pub summands: Vec<SummandSpec>,
    /// `1` iff the eigenvalue `1` (exponent 0) occurs in the lift of this chain.
    pub a_flag: u8,
    /// Exponents `c_i` of `zeta_q` on the diagonal; empty until assigned.
    #[serde(default)]
    pub exponents: Vec<u64>,
}

impl Chain {
    pub fn dimension(&self) -> u64 {
        self.summands.iter().map(|s| s.kappa).sum()
    }

    /// `eps` of the first summand; `Gamma E_1 = zeta_m^eps E_1` on this block.
    pub fn epsilon(&self) -> u64 {
        self.summands[0].epsilon
    }

    /// Within-chain subdiagonal: `t` after each summand but the last, `1` elsewhere.
    pub fn subdiag(&self) -> Vec<Subdiag> {
        let d = self.dimension() as usize;
        let mut out = vec![Subdiag::One; d.saturating_sub(1)];
        for pos in self.split_positions() {
            out[pos - 1] = Subdiag::T;
        }
        out
    }

    /// `kappa_1, kappa_1 + kappa_2, ...` (1-based positions of `t`).
    pub fn split_positions(&self) -> Vec<usize> {
        let mut acc = 0usize;
        let mut out = Vec::new();
        for s in &self.summands[..self.summands.len().saturating_sub(1)] {
            acc += s.kappa as usize;
            out.push(acc);
        }
        out
    }

    /// Reduction predicted from the split points alone:
    /// `V(eps + a0 * (partial kappa sum), next kappa)`.
    pub fn predicted(&self, a0: u64, m: u64) -> Vec<SummandSpec> {
        let mut eps = self.epsilon() % m;
        let mut out = Vec::new();
        for s in &self.summands {
            out.push(SummandSpec {
                epsilon: eps,
                kappa: s.kappa,
            });
            eps = (eps + a0 % m * (s.kappa % m)) % m;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftPlan {
    /// Input decomposition in canonical order (`kappa` desc, `eps` asc).
    pub decomposition: Decomposition,
    pub chains: Vec<Chain>,
    pub strict_uniform_a: bool,
}

impl LiftPlan {
    pub fn dimension(&self) -> u64 {
        self.chains.iter().map(Chain::dimension).sum()
    }

    pub fn is_assigned(&self) -> bool {
        self.chains
            .iter()
            .all(|c| c.exponents.len() as u64 == c.dimension())
    }

    /// Full subdiagonal of `T`, with `0` between chains.
    pub fn subdiagonal(&self) -> Vec<Subdiag> {
        let mut out = Vec::new();
        for (k, c) in self.chains.iter().enumerate() {
            if k > 0 {
                out.push(Subdiag::Zero);
            }
            out.extend(c.subdiag());
        }
        out
    }

    pub fn exponents(&self) -> Vec<u64> {
        self.chains.iter().flat_map(|c| c.exponents.iter().copied()).collect()
    }

    /// `(start, size)` of each chain block along the diagonal.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        let mut start = 0;
        self.chains
            .iter()
            .map(|c| {
                let d = c.dimension() as usize;
                let b = (start, d);
                start += d;
                b
            })
            .collect()
    }

    pub fn predicted_decomposition(&self, a0: u64, m: u64) -> Decomposition {
        Decomposition(self.chains.iter().flat_map(|c| c.predicted(a0, m)).collect()).canonical(m)
    }

    /// Re-checks (a), (b), (c) and the partition property without trusting the search.
    pub fn validate(&self, params: &GroupParams, a0: u64) -> Result<()> {
        let (q, m) = (params.q, params.m);
        let n = self.decomposition.0.len();
        let mut seen = vec![false; n];
        let mut flags = HashSet::new();
        for (k, c) in self.chains.iter().enumerate() {
            if c.members.is_empty() || c.members.len() != c.summands.len() {
                return Err(Error::InvalidPlan(format!("chain {k} is empty or inconsistent")));
            }
            for (&i, s) in c.members.iter().zip(&c.summands) {
                if i >= n || seen[i] {
                    return Err(Error::InvalidPlan(format!("summand index {i} repeated or out of range")));
                }
                seen[i] = true;
                if self.decomposition.0[i] != *s {
                    return Err(Error::InvalidPlan(format!("chain {k} misquotes summand {i}")));
                }
            }
            let d = c.dimension();
            if d > q {
                return Err(Error::InvalidPlan(format!("chain {k}: dimension {d} > q = {q}")));
            }
            if m > 1 && d % m > 1 {
                return Err(Error::InvalidPlan(format!("chain {k}: dimension {d} = {} mod {m}", d % m)));
            }
            if c.a_flag != a_flag(d, q, m) {
                return Err(Error::InvalidPlan(format!("chain {k}: wrong a_flag")));
            }
            flags.insert(d % m);
            for w in c.summands.windows(2) {
                if !edge(&w[0], &w[1], a0, m) {
                    return Err(Error::InvalidPlan(format!("chain {k}: {} -> {} breaks the successor rule", w[0], w[1])));
                }
            }
            if !c.exponents.is_empty() {
                if c.exponents.len() as u64 != d {
                    return Err(Error::InvalidPlan(format!("chain {k}: {} exponents for dimension {d}", c.exponents.len())));
                }
                let distinct: HashSet<u64> = c.exponents.iter().copied().collect();
                if distinct.len() != c.exponents.len() {
                    return Err(Error::InvalidPlan(format!("chain {k}: repeated eigenvalue")));
                }
                if distinct.contains(&0) != (c.a_flag == 1) {
                    return Err(Error::InvalidPlan(format!("chain {k}: eigenvalue 1 present iff a_flag = 1 violated")));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidPlan("some summand is in no chain".into()));
        }
        if self.strict_uniform_a && flags.len() > 1 {
            return Err(Error::InvalidPlan("chains disagree on the residue of their dimension".into()));
        }
        Ok(())
    }
}

/// Exponent 0 is used iff `d = 1 mod m`; for the trivial quotient `m = 1`
/// only a chain of full length `q` needs it.
pub fn a_flag(d: u64, q: u64, m: u64) -> u8 {
    if m == 1 {
        (d == q) as u8
    } else {
        (d % m == 1) as u8
    }
}

/// Successor rule `eps_j = eps_i + a0 kappa_i (mod m)`.
pub fn edge(from: &SummandSpec, to: &SummandSpec, a0: u64, m: u64) -> bool {
    (from.epsilon % m + mul_mod(a0 % m, from.kappa % m, m)) % m == to.epsilon % m
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainGraph {
    pub nodes: Vec<SummandSpec>,
    pub edges: Vec<(usize, usize)>,
}

impl ChainGraph {
    pub fn new(dec: &Decomposition, a0: u64, m: u64) -> Self {
        let nodes = dec.0.clone();
        let mut edges = Vec::new();
        for (i, a) in nodes.iter().enumerate() {
            for (j, b) in nodes.iter().enumerate() {
                if i != j && edge(a, b, a0, m) {
                    edges.push((i, j));
                }
            }
        }
        ChainGraph { nodes, edges }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefusalCertificate {
    pub s: usize,
    pub graph: ChainGraph,
    pub states_explored: u64,
    /// `s! * Bell(s)`, an upper bound on ordered chain partitions; decimal.
    pub search_bound: String,
    pub strict_uniform_a: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Decision {
    Liftable(LiftPlan),
    NotLiftable(RefusalCertificate),
}

impl Decision {
    pub fn is_liftable(&self) -> bool {
        matches!(self, Decision::Liftable(_))
    }

    pub fn plan(&self) -> Option<&LiftPlan> {
        match self {
            Decision::Liftable(p) => Some(p),
            Decision::NotLiftable(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecideOptions {
    /// Require every chain to have the same `sum kappa mod m`.
    pub strict_uniform_a: bool,
}

pub fn bell(n: usize) -> Option<u128> {
    // Bell triangle
    let mut row: Vec<u128> = vec![1];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for v in &row {
            let x = next.last().unwrap().checked_add(*v)?;
            next.push(x);
        }
        row = next;
    }
    Some(row[0])
}

fn search_bound(s: usize) -> String {
    let fact = (1..=s as u128).try_fold(1u128, |a, b| a.checked_mul(b));
    match (fact, bell(s)) {
        (Some(f), Some(b)) => f.checked_mul(b).map_or_else(|| "> 2^128".into(), |v| v.to_string()),
        _ => "> 2^128".into(),
    }
}

struct Search<'a> {
    nodes: &'a [SummandSpec],
    q: u64,
    m: u64,
    a0: u64,
    strict: bool,
    failed: HashSet<(Vec<u64>, Option<u64>)>,
    states: u64,
}

fn set(mask: &mut [u64], i: usize, v: bool) {
    if v {
        mask[i / 64] |= 1 << (i % 64);
    } else {
        mask[i / 64] &= !(1 << (i % 64));
    }
}

fn get(mask: &[u64], i: usize) -> bool {
    mask[i / 64] >> (i % 64) & 1 == 1
}

impl Search<'_> {
    fn closes(&self, sum: u64, residue: Option<u64>) -> bool {
        let r = sum % self.m;
        (self.m == 1 || r <= 1) && residue.is_none_or(|want| want == r)
    }

    /// First unused node of each spec, in index order. Summands with equal
    /// specs are interchangeable, so one representative suffices.
    fn candidates(&self, used: &[u64]) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for i in 0..self.nodes.len() {
            if !get(used, i) && !out.iter().any(|&j| self.nodes[j] == self.nodes[i]) {
                out.push(i);
            }
        }
        out
    }

    fn solve(&mut self, used: &mut Vec<u64>, residue: Option<u64>, chains: &mut Vec<Vec<usize>>) -> bool {
        let Some(anchor) = (0..self.nodes.len()).find(|&i| !get(used, i)) else {
            return true;
        };
        let key = (used.clone(), residue);
        if self.failed.contains(&key) {
            return false;
        }
        self.states += 1;
        for start in self.candidates(used) {
            let mut path = vec![start];
            set(used, start, true);
            let found = self.extend(used, &mut path, self.nodes[start].kappa, anchor, residue, chains);
            set(used, start, false);
            if found {
                return true;
            }
        }
        self.failed.insert(key);
        false
    }

    fn extend(
        &mut self,
        used: &mut Vec<u64>,
        path: &mut Vec<usize>,
        sum: u64,
        anchor: usize,
        residue: Option<u64>,
        chains: &mut Vec<Vec<usize>>,
    ) -> bool {
        self.states += 1;
        if path.contains(&anchor) && self.closes(sum, residue) {
            let r = sum % self.m;
            chains.push(path.clone());
            let next = if self.strict { Some(r) } else { None };
            if self.solve(used, next, chains) {
                return true;
            }
            chains.pop();
        }
        let last = self.nodes[*path.last().unwrap()];
        for next in self.candidates(used) {
            let spec = self.nodes[next];
            if sum + spec.kappa > self.q || !edge(&last, &spec, self.a0, self.m) {
                continue;
            }
            set(used, next, true);
            path.push(next);
            let found = self.extend(used, path, sum + spec.kappa, anchor, residue, chains);
            path.pop();
            set(used, next, false);
            if found {
                return true;
            }
        }
        false
    }
}

/// Exhaustive search for a chain partition. Total: every input yields a
/// plan or a certificate.
pub fn decide_lift(dec: &Decomposition, params: &GroupParams, a0: u64, opts: DecideOptions) -> Decision {
    let (q, m) = (params.q, params.m);
    let canon = dec.canonical(m);
    let nodes = &canon.0;
    let s = nodes.len();
    let mut search = Search {
        nodes,
        q,
        m,
        a0: a0 % m,
        strict: opts.strict_uniform_a,
        failed: HashSet::new(),
        states: 0,
    };
    let mut used = vec![0u64; s.div_ceil(64).max(1)];
    let mut chains = Vec::new();
    let bad = nodes.iter().find(|n| n.kappa == 0 || n.kappa > q);
    if bad.is_none() && search.solve(&mut used, None, &mut chains) {
        let chains = chains
            .into_iter()
            .map(|members| {
                let summands: Vec<SummandSpec> = members.iter().map(|&i| nodes[i]).collect();
                let d = summands.iter().map(|s| s.kappa).sum();
                Chain {
                    members,
                    summands,
                    a_flag: a_flag(d, q, m),
                    exponents: Vec::new(),
                }
            })
            .collect();
        return Decision::Liftable(LiftPlan {
            decomposition: canon,
            chains,
            strict_uniform_a: opts.strict_uniform_a,
        });
    }
    let reason = match bad {
        Some(b) => format!("summand {b} has kappa outside 1..={q}"),
        None => format!(
            "no partition into chains with sum <= {q}, sum = 0 or 1 mod {m}{}, and the successor rule",
            if opts.strict_uniform_a { " (same residue for all chains)" } else { "" }
        ),
    };
    Decision::NotLiftable(RefusalCertificate {
        s,
        graph: ChainGraph::new(&canon, a0, m),
        states_explored: search.states,
        search_bound: search_bound(s),
        strict_uniform_a: opts.strict_uniform_a,
        reason,
    })
}

/// Distinct `alpha`-orbits in `Z/q`, ordered by smallest representative.
fn nonzero_orbits(params: &GroupParams) -> impl Iterator<Item = Vec<u64>> + '_ {
    let mut covered = HashSet::new();
    (1..params.q).filter_map(move |c| {
        if covered.contains(&c) {
            return None;
        }
        let orbit = params.alpha_orbit(c);
        covered.extend(orbit.iter().copied());
        Some(orbit)
    })
}

/// Diagonal exponents per chain: `(d - a_flag) / m` orbits laid out as
/// `c, c alpha, ..., c alpha^(m-1)`, then `0` if `a_flag = 1`.
pub fn assign_eigenvalues(plan: &LiftPlan, params: &GroupParams) -> Result<LiftPlan> {
    params.require_faithful("eigenvalue orbits of size m need a faithful action")?;
    let m = params.m;
    let mut out = plan.clone();
    for (k, chain) in out.chains.iter_mut().enumerate() {
        let d = chain.dimension();
        let flag = chain.a_flag as u64;
        if !(d - flag).is_multiple_of(m) {
            return Err(Error::InvalidPlan(format!("chain {k}: dimension {d} is not 0 or 1 mod {m}")));
        }
        let need = ((d - flag) / m) as usize;
        let mut exps: Vec<u64> = Vec::with_capacity(d as usize);
        for orbit in nonzero_orbits(params).take(need) {
            if orbit.len() as u64 != m {
                return Err(Error::Internal(format!("orbit of {} has size {}", orbit[0], orbit.len())));
            }
            exps.extend(orbit);
        }
        if exps.len() != need * m as usize {
            return Err(Error::InvalidPlan(format!("chain {k}: only {} orbits available", exps.len() as u64 / m)));
        }
        if flag == 1 {
            exps.push(0);
        }
        chain.exponents = exps;
    }
    Ok(out)
}

/// Multiplicities constant along each `alpha`-orbit, and `m` divides
/// `dim - mult(0)`.
pub fn orbit_balance_check(plan: &LiftPlan, params: &GroupParams) -> Result<bool> {
    params.require_faithful("orbit balance presumes ord(alpha) = m at every level")?;
    if !plan.is_assigned() {
        return Err(Error::InvalidPlan("eigenvalues have not been assigned".into()));
    }
    let q = params.q;
    let mut mult = vec![0u64; q as usize];
    for c in plan.exponents() {
        mult[(c % q) as usize] += 1;
    }
    let balanced = (1..q).all(|c| mult[c as usize] == mult[mul_mod(c, params.alpha, q) as usize]);
    let moving = plan.dimension() - mult[0];
    Ok(balanced && moving.is_multiple_of(params.m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> GroupParams {
        GroupParams::new(5, 2, 4, 7).unwrap()
    }

    fn dec(v: &[(i64, u64)]) -> Decomposition {
        Decomposition(v.iter().map(|&(e, k)| SummandSpec::new(e, k)).collect())
    }

    fn decide(v: &[(i64, u64)]) -> Decision {
        decide_lift(&dec(v), &g(), 1, DecideOptions::default())
    }

    #[test]
    fn single_summands() {
        let yes = [1, 4, 5, 8, 9, 12, 13, 16, 17, 20, 21, 24, 25];
        for eps in 0..4 {
            for k in 1..=25u64 {
                assert_eq!(decide(&[(eps, k)]).is_liftable(), yes.contains(&k), "({eps},{k})");
            }
        }
    }

    #[test]
    fn worked_example_pairs() {
        let d = decide(&[(1, 2), (3, 2)]);
        let plan = d.plan().unwrap();
        assert_eq!(plan.chains.len(), 1);
        assert_eq!(plan.chains[0].summands, vec![SummandSpec::new(1, 2), SummandSpec::new(3, 2)]);
        assert_eq!(plan.subdiagonal(), vec![Subdiag::One, Subdiag::T, Subdiag::One]);
        assert!(!decide(&[(1, 2), (1, 2)]).is_liftable());
        // eps2 = eps1 + 21 a0
        assert!(!decide(&[(0, 21), (1, 23)]).is_liftable());
        match decide(&[(0, 21), (1, 23)]) {
            Decision::NotLiftable(c) => {
                assert_eq!(c.s, 2);
                assert_eq!(c.search_bound, "4");
                assert!(c.graph.edges.contains(&(1, 0)) || c.graph.edges.contains(&(0, 1)));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn projective_eigenvalues() {
        let p = g();
        let plan = assign_eigenvalues(decide(&[(2, 25)]).plan().unwrap(), &p).unwrap();
        let mut e = plan.chains[0].exponents.clone();
        assert_eq!(plan.chains[0].a_flag, 1);
        assert_eq!(*e.last().unwrap(), 0);
        e.sort();
        assert_eq!(e, (0..25).collect::<Vec<_>>());
        assert!(orbit_balance_check(&plan, &p).unwrap());
        plan.validate(&p, 1).unwrap();
    }

    #[test]
    fn worked_example_exponents() {
        let p = g();
        let plan = assign_eigenvalues(decide(&[(1, 2), (3, 2)]).plan().unwrap(), &p).unwrap();
        assert_eq!(plan.chains[0].exponents, vec![1, 7, 24, 18]);
        assert!(orbit_balance_check(&plan, &p).unwrap());
        let single = assign_eigenvalues(decide(&[(3, 1)]).plan().unwrap(), &p).unwrap();
        assert_eq!(single.chains[0].exponents, vec![0]);
    }

    #[test]
    fn strict_mode_is_more_conservative() {
        let v = dec(&[(0, 1), (0, 4)]);
        assert!(decide_lift(&v, &g(), 1, DecideOptions::default()).is_liftable());
        // 4 + 1 = 5 would also do as one chain if the successor rule allowed it
        let strict = decide_lift(&v, &g(), 1, DecideOptions { strict_uniform_a: true });
        let relaxed_chains = decide_lift(&v, &g(), 1, DecideOptions::default()).plan().unwrap().chains.len();
        assert!(relaxed_chains >= 1);
        if let Some(p) = strict.plan() {
            let res: HashSet<u64> = p.chains.iter().map(|c| c.dimension() % 4).collect();
            assert_eq!(res.len(), 1);
        }
    }

    #[test]
    fn empty_decomposition_lifts() {
        let d = decide(&[]);
        assert!(d.plan().unwrap().chains.is_empty());
    }

    #[test]
    fn nonfaithful_refuses_assignment() {
        let p = GroupParams::new(5, 2, 4, 1).unwrap();
        let plan = decide_lift(&dec(&[(0, 1)]), &p, 0, DecideOptions::default());
        assert!(matches!(assign_eigenvalues(plan.plan().unwrap(), &p), Err(Error::NotFaithful(_))));
    }

    #[test]
    fn bell_numbers() {
        let b: Vec<u128> = (0..8).map(|n| bell(n).unwrap()).collect();
        assert_eq!(b, vec![1, 1, 2, 5, 15, 52, 203, 877]);
        assert_eq!(search_bound(3), "30");
    }
}
