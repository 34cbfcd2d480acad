//! The characteristic-zero lift `(T, Gamma)` of a chain plan, its
//! verification at tracked precision, and its reduction back to the residue
//! field.
//!
//! `T` is lower bidiagonal with `zeta_q`-power eigenvalues; `Gamma` is
//! determined column by column from `Gamma E_1 = zeta_m^eps E_1` and
//! `Gamma T = T^alpha Gamma`.

use serde::{Deserialize, Serialize};

use crate::algebra::Ring;
use crate::decide::{assign_eigenvalues, decide_lift, DecideOptions, Decision, LiftPlan, RefusalCertificate, Subdiag};
use crate::error::{Error, Result};
use crate::field::ResidueMatrix;
use crate::group::{gcd, lcm, pow_mod, GroupParams};
use crate::local::{default_precision, LocalElement, LocalMatrix, RingContext, Valuation};
use crate::matrix::{mat_pow, Matrix};
use crate::modular::{decompose, verify_kg_relations, Decomposition, KModule, ModularContext};
use crate::symfun::{bracket_diff, enumerate_mu_sequences, l_value, t_alpha_matrix};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftPair {
    #[serde(rename = "T")]
    pub t: LocalMatrix,
    #[serde(rename = "Gamma")]
    pub gamma: LocalMatrix,
    pub epsilon_per_block: Vec<u64>,
    pub plan: LiftPlan,
}

/// Diagonal blocks of `T`: maximal runs without an exactly-zero subdiagonal entry.
pub fn blocks_of(ring: &RingContext, t: &LocalMatrix) -> Vec<(usize, usize)> {
    let d = t.rows;
    let mut out = Vec::new();
    let mut start = 0;
    for i in 0..d {
        if i + 1 == d || ring.is_exact_zero(t.get(i + 1, i)) {
            out.push((start, i + 1 - start));
            start = i + 1;
        }
    }
    out
}

/// `k` with `a = t^k`; only `1` and pure powers of the uniformizer are accepted.
fn t_exponent(ring: &RingContext, a: &LocalElement, pos: usize) -> Result<u32> {
    if ring.equal(a, &ring.one()) {
        return Ok(0);
    }
    match ring.valuation(a) {
        Valuation::Exact(k) if k > 0 && ring.equal(a, &ring.t_pow(k)) => Ok(k),
        _ => Err(Error::UnsupportedSubdiagonal(pos)),
    }
}

pub fn build_t(plan: &LiftPlan, ring: &RingContext) -> Result<LocalMatrix> {
    if !plan.is_assigned() {
        return Err(Error::InvalidPlan("eigenvalues have not been assigned".into()));
    }
    let d = plan.dimension() as usize;
    let mut t = Matrix::zeros(ring, d, d);
    for (i, &c) in plan.exponents().iter().enumerate() {
        t.set(i, i, ring.zeta_q(c as i64));
    }
    for (i, a) in plan.subdiagonal().iter().enumerate() {
        let v = match a {
            Subdiag::Zero => continue,
            Subdiag::One => ring.one(),
            Subdiag::T => ring.t(),
        };
        t.set(i + 1, i, v);
    }
    Ok(t)
}

struct Block {
    start: usize,
    lambdas: Vec<LocalElement>,
    subdiag: Vec<LocalElement>,
    shifts: Vec<u32>,
}

fn split_blocks(ring: &RingContext, t: &LocalMatrix, eps: &[u64]) -> Result<Vec<Block>> {
    if !t.is_square() {
        return Err(Error::Dimension("T is not square".into()));
    }
    let layout = blocks_of(ring, t);
    if layout.len() != eps.len() {
        return Err(Error::Dimension(format!(
            "T has {} blocks but {} epsilons were given",
            layout.len(),
            eps.len()
        )));
    }
    layout
        .into_iter()
        .map(|(start, size)| {
            let lambdas = (0..size).map(|i| t.get(start + i, start + i).clone()).collect();
            let subdiag: Vec<LocalElement> =
                (0..size.saturating_sub(1)).map(|i| t.get(start + i + 1, start + i).clone()).collect();
            let shifts = subdiag
                .iter()
                .enumerate()
                .map(|(i, a)| t_exponent(ring, a, start + i + 1))
                .collect::<Result<Vec<_>>>()?;
            Ok(Block {
                start,
                lambdas,
                subdiag,
                shifts,
            })
        })
        .collect()
}

fn divide_checked(ring: &RingContext, z: &LocalElement, k: u32, row: usize, column: usize) -> Result<LocalElement> {
    if k == 0 {
        return Ok(z.clone());
    }
    match ring.valuation(z) {
        Valuation::Exact(v) if v < k => Err(Error::Divisibility {
            column,
            row,
            valuation: v,
            required: k,
        }),
        Valuation::AtLeast(p) if p <= k => Err(Error::PrecisionExhausted(format!(
            "entry ({row}, {column}) known only to precision {p}, cannot divide by t^{k}"
        ))),
        _ => ring.divide_by_t_pow(z, k),
    }
}

fn embed_block(ring: &RingContext, d: usize, blocks: &[(usize, LocalMatrix)]) -> LocalMatrix {
    let mut g = Matrix::zeros(ring, d, d);
    for (start, b) in blocks {
        for i in 0..b.rows {
            for j in 0..b.cols {
                g.set(start + i, start + j, b.get(i, j).clone());
            }
        }
    }
    g
}

/// Column recursion `Gamma E_{i+1} = (T^alpha - lambda_i) Gamma E_i / a_i`, per block.
pub fn build_gamma_recursive(t: &LocalMatrix, epsilon_per_block: &[u64], ring: &RingContext) -> Result<LocalMatrix> {
    let alpha = ring.params.alpha;
    let mut out = Vec::new();
    for (blk, &eps) in split_blocks(ring, t, epsilon_per_block)?.iter().zip(epsilon_per_block) {
        let d = blk.lambdas.len();
        let ta = t_alpha_matrix(ring, alpha, &blk.lambdas, &blk.subdiag)?;
        let mut g = Matrix::zeros(ring, d, d);
        let mut col = vec![ring.zero(); d];
        col[0] = ring.zeta_m_pow(eps as i64);
        g.set_column(0, &col);
        for i in 1..d {
            let image = crate::matrix::mat_vec(ring, &ta, &col);
            let lam = &blk.lambdas[i - 1];
            col = image
                .iter()
                .zip(&col)
                .enumerate()
                .map(|(r, (x, c))| {
                    let v = ring.sub(x, &ring.mul(lam, c));
                    divide_checked(ring, &v, blk.shifts[i - 1], blk.start + r + 1, blk.start + i + 1)
                })
                .collect::<Result<Vec<_>>>()?;
            g.set_column(i, &col);
        }
        out.push((blk.start, g));
    }
    Ok(embed_block(ring, t.rows, &out))
}

/// Explicit sum over `mu`-sequences and interleaved index sequences.
pub fn build_gamma_closed_form(t: &LocalMatrix, epsilon_per_block: &[u64], ring: &RingContext) -> Result<LocalMatrix> {
    let alpha = ring.params.alpha;
    let mut out = Vec::new();
    for (blk, &eps) in split_blocks(ring, t, epsilon_per_block)?.iter().zip(epsilon_per_block) {
        let d = blk.lambdas.len();
        let lam = &blk.lambdas;
        let lam_alpha: Vec<LocalElement> = lam.iter().map(|l| ring.pow(l, alpha)).collect();
        let z_eps = ring.zeta_m_pow(eps as i64);
        let mut g = Matrix::zeros(ring, d, d);
        for mu in 1..=d {
            let seqs = if mu == 1 {
                vec![vec![1]]
            } else {
                enumerate_mu_sequences(mu)?.into_iter().map(|s| s.0).collect()
            };
            for i in 1..=d {
                let mut total = ring.zero();
                for seq in &seqs {
                    let s = seq.len();
                    if s > i {
                        continue;
                    }
                    let mut coeff = ring.one();
                    for nu in 1..s {
                        let (hi, lo) = (seq[nu - 1], seq[nu]);
                        let gap = hi - lo;
                        coeff = ring.mul(&coeff, &l_value(ring, alpha as i64 - gap as i64, lam, lo, gap));
                    }
                    if ring.is_zero(&coeff) {
                        continue;
                    }
                    // B_nu(lo, hi) = [lambda_{mu_nu}^alpha - lambda_x]_lo^hi
                    let bracket = |nu: usize, lo: usize, hi: usize| {
                        bracket_diff(ring, &lam_alpha[seq[nu] - 1], lam, lo, hi)
                    };
                    // D_s(j) = B_s(1, j-1); D_nu(j) = sum_{j' < j} B_nu(j'+1, j-1) D_{nu+1}(j')
                    let mut dp: Vec<LocalElement> = (0..=i)
                        .map(|j| if j == 0 { ring.zero() } else { bracket(s - 1, 1, j - 1) })
                        .collect();
                    for nu in (0..s - 1).rev() {
                        let prev = dp;
                        dp = (0..=i)
                            .map(|j| {
                                let mut acc = ring.zero();
                                for jp in 1..j {
                                    if ring.is_exact_zero(&prev[jp]) {
                                        continue;
                                    }
                                    acc = ring.add(&acc, &ring.mul(&bracket(nu, jp + 1, j - 1), &prev[jp]));
                                }
                                acc
                            })
                            .collect();
                    }
                    total = ring.add(&total, &ring.mul(&coeff, &dp[i]));
                }
                total = ring.mul(&total, &z_eps);
                // [a]_1^{mu-1} / [a]_1^{i-1}
                let entry = if i > mu {
                    let k: u32 = blk.shifts[mu - 1..i - 1].iter().sum();
                    divide_checked(ring, &total, k, blk.start + mu, blk.start + i)?
                } else if mu > i {
                    let k: u32 = blk.shifts[i - 1..mu - 1].iter().sum();
                    ring.mul(&total, &ring.t_pow(k))
                } else {
                    total
                };
                g.set(mu - 1, i - 1, entry);
            }
        }
        out.push((blk.start, g));
    }
    Ok(embed_block(ring, t.rows, &out))
}

pub fn build_lift(plan: &LiftPlan, ring: &RingContext) -> Result<LiftPair> {
    let plan = if plan.is_assigned() {
        plan.clone()
    } else {
        assign_eigenvalues(plan, &ring.params)?
    };
    plan.validate(&ring.params, ring.params.a0()?)?;
    let t = build_t(&plan, ring)?;
    let eps: Vec<u64> = plan.chains.iter().map(|c| c.epsilon()).collect();
    let gamma = build_gamma_recursive(&t, &eps, ring)?;
    Ok(LiftPair {
        t,
        gamma,
        epsilon_per_block: eps,
        plan,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Smallest precision at which the compared quantities were known.
    pub precision: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub gamma_order: Option<u64>,
    pub predicted_gamma_order: u64,
    pub t_order: Option<u64>,
    /// Chains with `m | d` on which the two structural lemmas were checked.
    pub full_orbit_chains: usize,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn min_precision(&self) -> u32 {
        self.checks.iter().map(|c| c.precision).min().unwrap_or(0)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

struct Comparison {
    equal: bool,
    precision: u32,
    detail: Option<String>,
}

fn compare(ring: &RingContext, a: &LocalMatrix, b: &LocalMatrix) -> Comparison {
    let mut precision = ring.prec_cap;
    let mut detail = None;
    for i in 0..a.rows {
        for j in 0..a.cols {
            let diff = ring.sub(a.get(i, j), b.get(i, j));
            precision = precision.min(diff.prec);
            if detail.is_none() {
                if let Valuation::Exact(v) = ring.valuation(&diff) {
                    detail = Some(format!(
                        "entry ({}, {}) differs: valuation {v} below precision {}",
                        i + 1,
                        j + 1,
                        diff.prec
                    ));
                }
            }
        }
    }
    Comparison {
        equal: detail.is_none(),
        precision,
        detail,
    }
}

fn is_identity(ring: &RingContext, a: &LocalMatrix) -> bool {
    compare(ring, a, &Matrix::identity(ring, a.rows)).equal
}

/// Least divisor `k` of `n` with `a^k = Id`, provided `a^n = Id`.
fn order_dividing(ring: &RingContext, a: &LocalMatrix, n: u64) -> Option<u64> {
    (1..=n)
        .filter(|k| n.is_multiple_of(*k))
        .find(|&k| is_identity(ring, &mat_pow(ring, a, k)))
}

/// `lcm(ord zeta_m^eps, least j with c alpha^j = c for every exponent)`.
pub fn predicted_block_order(params: &GroupParams, eps: u64, exponents: &[u64]) -> u64 {
    let (q, m) = (params.q, params.m);
    let sigma_part = m / gcd(m, eps % m);
    let tau_part = (1..=m)
        .find(|&j| {
            let aj = pow_mod(params.alpha, j, q);
            exponents.iter().all(|&c| (c as u128 * aj as u128 % q as u128) as u64 == c % q)
        })
        .unwrap_or(m);
    lcm(sigma_part, tau_part)
}

struct Recorder {
    checks: Vec<Check>,
    cap: u32,
}

impl Recorder {
    fn push(&mut self, name: &str, block: usize, passed: bool, precision: u32, detail: Option<String>) {
        let detail = detail.map(|d| format!("block {}: {d}", block + 1));
        match self.checks.iter_mut().find(|c| c.name == name) {
            Some(c) => {
                c.passed &= passed;
                c.precision = c.precision.min(precision);
                if c.detail.is_none() {
                    c.detail = detail;
                }
            }
            None => self.checks.push(Check {
                name: name.to_string(),
                passed,
                precision,
                detail,
            }),
        }
    }

    fn cmp(&mut self, name: &str, block: usize, c: Comparison) {
        self.push(name, block, c.equal, c.precision, c.detail);
    }

    fn flag(&mut self, name: &str, block: usize, passed: bool, detail: impl FnOnce() -> String) {
        let cap = self.cap;
        self.push(name, block, passed, cap, (!passed).then(detail));
    }
}

pub const CHECK_T_Q: &str = "T^q = Id";
pub const CHECK_GAMMA_M: &str = "Gamma^m = Id";
pub const CHECK_GAMMA_ORDER: &str = "Gamma order";
pub const CHECK_CONJ: &str = "Gamma T = T^alpha Gamma";
pub const CHECK_CONJ_POWERS: &str = "Gamma^k T = T^(alpha^k) Gamma^k";
pub const CHECK_LOWER: &str = "Gamma lower triangular mod m_R";
pub const CHECK_ZERO_GAMMA: &str = "gamma_(mu,d) = 0 for mu <= d-2";
pub const CHECK_FINAL_EQ: &str = "final equation";
pub const CHECK_SEPARATION: &str = "v(lambda_i - lambda_j) > v(a_nu)";
pub const CHECK_T_ORDER: &str = "T order = max eigenvalue order";
pub const CHECK_BLOCKS: &str = "block structure";
pub const CHECK_REDUCED_T: &str = "reduced T is Jordan";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaCheck {
    /// `gamma_(mu,d)` indistinguishable from zero for `mu <= d - 2`.
    pub zero_gamma: bool,
    /// `(lambda_d - lambda_d^alpha) gamma_(d,d) = t^(alpha)_(d,d-1) gamma_(d-1,d)`.
    pub final_equation: bool,
    pub precision: u32,
}

/// The two identities about the last column of one chain block; `ta` is `T^alpha`.
pub fn structural_lemmas(ring: &RingContext, t: &LocalMatrix, g: &LocalMatrix, ta: &LocalMatrix) -> LemmaCheck {
    let size = t.rows;
    let last = size - 1;
    let alpha = ring.params.alpha;
    let mut precision = ring.prec_cap;
    let mut zero_gamma = true;
    for mu in 0..size.saturating_sub(2) {
        let z = g.get(mu, last);
        precision = precision.min(z.prec);
        zero_gamma &= ring.is_zero(z);
    }
    let final_equation = if size >= 2 {
        let lam_d = t.get(last, last);
        let lhs = ring.mul(&ring.sub(lam_d, &ring.pow(lam_d, alpha)), g.get(last, last));
        let rhs = ring.mul(ta.get(last, last - 1), g.get(last - 1, last));
        let eq = ring.equal_at(&lhs, &rhs);
        precision = precision.min(eq.precision);
        eq.equal
    } else {
        true
    };
    LemmaCheck {
        zero_gamma,
        final_equation,
        precision,
    }
}

pub fn verify_lift(pair: &LiftPair, ring: &RingContext) -> Result<VerificationReport> {
    let params = &ring.params;
    let (q, m, alpha) = (params.q, params.m, params.alpha);
    let plan = &pair.plan;
    let d = plan.dimension() as usize;
    if pair.t.rows != d || pair.gamma.rows != d || !pair.t.is_square() || !pair.gamma.is_square() {
        return Err(Error::Dimension("T and Gamma must be square of the plan's dimension".into()));
    }
    let mut rec = Recorder {
        checks: Vec::new(),
        cap: ring.prec_cap,
    };
    let layout = plan.blocks();

    // Everything off the chain blocks must vanish identically.
    let mut off_block_ok = true;
    for (b, &(start, size)) in layout.iter().enumerate() {
        for i in start..start + size {
            for j in 0..d {
                if (j < start || j >= start + size)
                    && (!ring.is_exact_zero(pair.t.get(i, j)) || !ring.is_exact_zero(pair.gamma.get(i, j)))
                {
                    off_block_ok = false;
                    rec.flag(CHECK_BLOCKS, b, false, || format!("nonzero entry ({}, {}) outside the block", i + 1, j + 1));
                }
            }
        }
    }
    if off_block_ok {
        rec.flag(CHECK_BLOCKS, 0, true, String::new);
    }

    let mut gamma_order = Some(1u64);
    let mut predicted_order = 1u64;
    let mut t_order = Some(1u64);
    let mut full_orbit = 0;
    let expected_reduced_t = {
        let k = &ring.field;
        let sub = plan.subdiagonal();
        Matrix::from_fn(d, d, |i, j| {
            if i == j || (i == j + 1 && sub[j] == Subdiag::One) {
                k.embed(1)
            } else {
                k.embed(0)
            }
        })
    };
    if ring.reduce_matrix(&pair.t) != expected_reduced_t {
        rec.flag(CHECK_REDUCED_T, 0, false, || "reduction of T is not the predicted Jordan form".into());
    } else {
        rec.flag(CHECK_REDUCED_T, 0, true, String::new);
    }

    for (b, (&(start, size), chain)) in layout.iter().zip(&plan.chains).enumerate() {
        let t = pair.t.block(start, start + size);
        let g = pair.gamma.block(start, start + size);
        let id = Matrix::identity(ring, size);

        // (i)
        rec.cmp(CHECK_T_Q, b, compare(ring, &mat_pow(ring, &t, q), &id));
        let predicted_t = chain
            .exponents
            .iter()
            .map(|&c| q / gcd(q, c))
            .max()
            .unwrap_or(1);
        let to = order_dividing(ring, &t, q);
        rec.flag(CHECK_T_ORDER, b, to == Some(predicted_t), || {
            format!("order {to:?}, largest eigenvalue order {predicted_t}")
        });
        t_order = match (t_order, to) {
            (Some(a), Some(o)) => Some(lcm(a, o)),
            _ => None,
        };

        // (ii)
        rec.cmp(CHECK_GAMMA_M, b, compare(ring, &mat_pow(ring, &g, m), &id));
        let go = order_dividing(ring, &g, m);
        let pred = predicted_block_order(params, chain.epsilon(), &chain.exponents);
        rec.flag(CHECK_GAMMA_ORDER, b, go == Some(pred), || format!("order {go:?}, predicted {pred}"));
        gamma_order = match (gamma_order, go) {
            (Some(a), Some(o)) => Some(lcm(a, o)),
            _ => None,
        };
        predicted_order = lcm(predicted_order, pred);

        // (iii) and its iterates
        let ta = mat_pow(ring, &t, alpha);
        rec.cmp(CHECK_CONJ, b, compare(ring, &ring.mat_mul(&g, &t), &ring.mat_mul(&ta, &g)));
        let mut gk = g.clone();
        for k in 1..=m {
            let tk = mat_pow(ring, &t, pow_mod(alpha, k, q));
            rec.cmp(CHECK_CONJ_POWERS, b, compare(ring, &ring.mat_mul(&gk, &t), &ring.mat_mul(&tk, &gk)));
            if k < m {
                gk = ring.mat_mul(&gk, &g);
            }
        }

        // (iv)
        let reduced = ring.reduce_matrix(&g);
        let mut lower = true;
        let mut lower_prec = ring.prec_cap;
        for i in 0..size {
            for j in i + 1..size {
                lower_prec = lower_prec.min(g.get(i, j).prec);
                if !ring.field.is_zero(reduced.get(i, j)) {
                    lower = false;
                }
            }
        }
        rec.push(CHECK_LOWER, b, lower, lower_prec, (!lower).then(|| "upper entry is a unit".to_string()));

        // separation of eigenvalues against the subdiagonal
        let max_a = (0..size.saturating_sub(1))
            .map(|i| ring.valuation(t.get(i + 1, i)).bound())
            .max()
            .unwrap_or(0);
        let mut min_gap = u32::MAX;
        for i in 0..size {
            for j in i + 1..size {
                min_gap = min_gap.min(ring.valuation(&ring.sub(t.get(i, i), t.get(j, j))).bound());
            }
        }
        rec.flag(CHECK_SEPARATION, b, size < 2 || min_gap > max_a, || {
            format!("min v(lambda_i - lambda_j) = {min_gap}, max v(a) = {max_a}")
        });

        // (v) on chains made of whole orbits
        if size >= 2 && chain.a_flag == 0 {
            full_orbit += 1;
            let lem = structural_lemmas(ring, &t, &g, &ta);
            rec.push(
                CHECK_ZERO_GAMMA,
                b,
                lem.zero_gamma,
                lem.precision,
                (!lem.zero_gamma).then(|| "nonzero entry above the last two in the last column".to_string()),
            );
            rec.push(CHECK_FINAL_EQ, b, lem.final_equation, lem.precision, (!lem.final_equation).then(|| "sides differ".to_string()));
        }
    }

    if m > 1 && predicted_order != m {
        // informational: order below m only happens for all-trivial eigenvalues
        rec.flag(CHECK_GAMMA_ORDER, 0, gamma_order == Some(predicted_order), || {
            format!("order {gamma_order:?}, predicted {predicted_order}")
        });
    }

    Ok(VerificationReport {
        checks: rec.checks,
        gamma_order,
        predicted_gamma_order: predicted_order,
        t_order,
        full_orbit_chains: full_orbit,
    })
}

pub fn modular_context(ring: &RingContext) -> ModularContext {
    ModularContext {
        params: ring.params.clone(),
        field: ring.field.clone(),
    }
}

pub fn reduced_module(pair: &LiftPair, ring: &RingContext) -> KModule {
    let tau: ResidueMatrix = ring.reduce_matrix(&pair.t);
    let sigma: ResidueMatrix = ring.reduce_matrix(&pair.gamma);
    KModule {
        dimension: tau.rows,
        tau,
        sigma,
    }
}

/// Reduces mod `m_R`, decomposes, and insists on the decomposition the
/// plan predicts.
pub fn reduce_lift(pair: &LiftPair, ring: &RingContext) -> Result<Decomposition> {
    let ctx = modular_context(ring);
    let module = reduced_module(pair, ring);
    let rel = verify_kg_relations(&ctx, &module)?;
    if !rel.all_hold() {
        return Err(Error::RelationViolation(format!("reduced pair fails the group relations: {rel:?}")));
    }
    let computed = decompose(&ctx, &module)?;
    let predicted = pair.plan.predicted_decomposition(ctx.a0(), ctx.params.m);
    if computed != predicted {
        return Err(Error::ReductionMismatch {
            computed: computed.to_string(),
            predicted: predicted.to_string(),
        });
    }
    Ok(computed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionSpec {
    /// `None` picks the smallest `N` with `prec_cap >= min_prec`.
    pub n: Option<u32>,
    pub e: usize,
    pub min_prec: u32,
}

impl Default for PrecisionSpec {
    fn default() -> Self {
        PrecisionSpec {
            n: None,
            e: 2,
            min_prec: 64,
        }
    }
}

impl PrecisionSpec {
    pub fn resolve(&self, params: &GroupParams) -> u32 {
        self.n.unwrap_or_else(|| default_precision(params, self.e, self.min_prec))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftOutcome {
    pub pair: LiftPair,
    pub report: VerificationReport,
    pub reduced: Decomposition,
    pub n: u32,
    pub e: usize,
    pub escalated: bool,
}

fn attempt(plan: &LiftPlan, ring: &RingContext) -> Result<(LiftPair, VerificationReport, Decomposition)> {
    let pair = build_lift(plan, ring)?;
    let report = verify_lift(&pair, ring)?;
    if !report.all_passed() {
        let f = report.failures();
        return Err(Error::Verification(
            f.iter()
                .map(|c| format!("{} ({})", c.name, c.detail.clone().unwrap_or_default()))
                .collect::<Vec<_>>()
                .join("; "),
        ));
    }
    let reduced = reduce_lift(&pair, ring)?;
    Ok((pair, report, reduced))
}

/// Builds, verifies and reduces; on a precision-related failure retries once
/// with `N` doubled.
pub fn lift_with_escalation(plan: &LiftPlan, params: &GroupParams, precision: PrecisionSpec) -> Result<LiftOutcome> {
    let n = precision.resolve(params);
    let ring = RingContext::new(params, n, precision.e)?;
    lift_in(plan, &ring, precision)
}

/// Like [`lift_with_escalation`] but reuses an existing ring for the first attempt.
pub fn lift_in(plan: &LiftPlan, ring: &RingContext, precision: PrecisionSpec) -> Result<LiftOutcome> {
    match attempt(plan, ring) {
        Ok((pair, report, reduced)) => Ok(LiftOutcome {
            pair,
            report,
            reduced,
            n: ring.n,
            e: ring.e,
            escalated: false,
        }),
        Err(err) if err.is_precision_related() || matches!(err, Error::Verification(_)) => {
            let bigger = RingContext::new(&ring.params, ring.n * 2, precision.e).map_err(|_| err.clone())?;
            let (pair, report, reduced) = attempt(plan, &bigger)?;
            Ok(LiftOutcome {
                pair,
                report,
                reduced,
                n: bigger.n,
                e: bigger.e,
                escalated: true,
            })
        }
        Err(err) => Err(err),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundTrip {
    pub input: Decomposition,
    pub liftable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refusal: Option<RefusalCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<LiftOutcome>,
    /// Reduction equals the input multiset (eps mod m).
    pub matches_input: bool,
}

/// decide -> build -> verify -> reduce -> compare.
pub fn round_trip(dec: &Decomposition, ring: &RingContext, opts: DecideOptions, precision: PrecisionSpec) -> Result<RoundTrip> {
    let params = &ring.params;
    let input = dec.canonical(params.m);
    match decide_lift(dec, params, params.a0()?, opts) {
        Decision::NotLiftable(cert) => Ok(RoundTrip {
            input,
            liftable: false,
            refusal: Some(cert),
            outcome: None,
            matches_input: false,
        }),
        Decision::Liftable(plan) => {
            let outcome = lift_in(&plan, ring, precision)?;
            let matches_input = outcome.reduced == input;
            Ok(RoundTrip {
                input,
                liftable: true,
                refusal: None,
                outcome: Some(outcome),
                matches_input,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::SummandSpec;

    fn ring(p: u64, h: u32, m: u64, a: u64, n: u32) -> RingContext {
        RingContext::new(&GroupParams::new(p, h, m, a).unwrap(), n, 2).unwrap()
    }

    fn plan_for(ring: &RingContext, v: &[(i64, u64)]) -> LiftPlan {
        let dec = Decomposition(v.iter().map(|&(e, k)| SummandSpec::new(e, k)).collect());
        let d = decide_lift(&dec, &ring.params, ring.params.a0().unwrap(), DecideOptions::default());
        assign_eigenvalues(d.plan().expect("liftable"), &ring.params).unwrap()
    }

    #[test]
    fn worked_example() {
        let r = ring(5, 2, 4, 7, 8);
        let plan = plan_for(&r, &[(1, 2), (3, 2)]);
        let pair = build_lift(&plan, &r).unwrap();
        assert!(r.equal(pair.t.get(2, 1), &r.t()));
        assert!(r.equal(pair.t.get(1, 1), &r.zeta_q(7)));
        let report = verify_lift(&pair, &r).unwrap();
        assert!(report.all_passed(), "{:?}", report.failures());
        assert!(report.min_precision() >= 32);
        assert_eq!(report.gamma_order, Some(4));
        assert_eq!(report.full_orbit_chains, 1);
        let red = reduce_lift(&pair, &r).unwrap();
        assert_eq!(red, Decomposition(vec![SummandSpec::new(1, 2), SummandSpec::new(3, 2)]));
        let closed = build_gamma_closed_form(&pair.t, &pair.epsilon_per_block, &r).unwrap();
        assert_eq!(compare(&r, &closed, &pair.gamma).detail, None);
    }

    #[test]
    fn one_dimensional_blocks() {
        let r = ring(5, 2, 4, 7, 3);
        let plan = plan_for(&r, &[(2, 1), (0, 1)]);
        let pair = build_lift(&plan, &r).unwrap();
        let report = verify_lift(&pair, &r).unwrap();
        assert!(report.all_passed(), "{:?}", report.failures());
        assert_eq!(report.gamma_order, Some(2));
        assert_eq!(report.predicted_gamma_order, 2);
    }

    #[test]
    fn trivial_quotient() {
        let r = ring(3, 2, 1, 1, 4);
        let plan = plan_for(&r, &[(0, 3), (0, 9)]);
        let pair = build_lift(&plan, &r).unwrap();
        let report = verify_lift(&pair, &r).unwrap();
        assert!(report.all_passed(), "{:?}", report.failures());
        assert!(is_identity(&r, &pair.gamma));
    }

    #[test]
    fn all_splits_chain() {
        // m one-dimensional summands eps, eps + a0, ... chained by t's
        let r = ring(5, 2, 4, 7, 3);
        let summands: Vec<SummandSpec> = (0..4).map(|e| SummandSpec::new(e, 1)).collect();
        let plan = LiftPlan {
            decomposition: Decomposition(summands.clone()),
            chains: vec![crate::decide::Chain {
                members: vec![0, 1, 2, 3],
                summands,
                a_flag: 0,
                exponents: Vec::new(),
            }],
            strict_uniform_a: false,
        };
        plan.validate(&r.params, 1).unwrap();
        let plan = assign_eigenvalues(&plan, &r.params).unwrap();
        assert!(plan.subdiagonal().iter().all(|s| *s == Subdiag::T));
        let pair = build_lift(&plan, &r).unwrap();
        let report = verify_lift(&pair, &r).unwrap();
        assert!(report.all_passed(), "{:?}", report.failures());
        assert_eq!(reduce_lift(&pair, &r).unwrap().0.len(), 4);
    }

    #[test]
    fn perturbed_subdiagonal_is_caught() {
        let r = ring(5, 2, 4, 7, 4);
        let plan = plan_for(&r, &[(1, 2), (3, 2)]);
        let mut pair = build_lift(&plan, &r).unwrap();
        pair.t.set(2, 1, r.one());
        let report = verify_lift(&pair, &r).unwrap();
        assert!(!report.all_passed());
        assert!(!report.check(CHECK_REDUCED_T).unwrap().passed);
    }

    #[test]
    fn projective_summand() {
        let r = ring(5, 2, 4, 7, 2);
        let plan = plan_for(&r, &[(3, 25)]);
        let out = lift_in(&plan, &r, PrecisionSpec::default()).unwrap();
        assert_eq!(out.reduced, Decomposition(vec![SummandSpec::new(3, 25)]));
    }

    #[test]
    fn refusal_round_trip() {
        let r = ring(5, 2, 4, 7, 2);
        let dec = Decomposition(vec![SummandSpec::new(1, 2), SummandSpec::new(1, 2)]);
        let rt = round_trip(&dec, &r, DecideOptions::default(), PrecisionSpec::default()).unwrap();
        assert!(!rt.liftable);
    }
}
