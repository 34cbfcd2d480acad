//! Indecomposable modules `V_alpha(eps, kappa)` over the residue field and
//! the decomposition of arbitrary `(tau, sigma)` pairs into them.
//!
//! `V_alpha(eps, kappa)` has basis `e_i = (tau - 1)^(i-1) e` where
//! `sigma e = zeta_m^eps e`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::Ring;
use crate::error::{Error, Result};
use crate::field::{bind_zeta_m, FieldContext, FieldElement, ResidueMatrix};
use crate::group::GroupParams;
use crate::matrix::{self, mat_equal, mat_pow, mat_sub, mat_vec, rref, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SummandSpec {
    pub epsilon: u64,
    pub kappa: u64,
}

impl SummandSpec {
    pub fn new(epsilon: i64, kappa: u64) -> Self {
        SummandSpec {
            epsilon: epsilon as u64,
            kappa,
        }
    }

    pub fn normalized(self, m: u64) -> Self {
        SummandSpec {
            epsilon: self.epsilon % m,
            kappa: self.kappa,
        }
    }

    pub fn validate(&self, params: &GroupParams) -> Result<()> {
        if self.kappa == 0 || self.kappa > params.q {
            return Err(Error::InvalidSummand(format!(
                "kappa = {} must lie in 1..={}",
                self.kappa, params.q
            )));
        }
        Ok(())
    }
}

impl fmt::Display for SummandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V({},{})", self.epsilon, self.kappa)
    }
}

/// An ordered multiset of summands.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Decomposition(pub Vec<SummandSpec>);

impl Decomposition {
    /// Compact `eps:kappa` list, e.g. `"1:2, 3:2"`. Negative epsilons are
    /// reduced mod `m`.
    pub fn parse(text: &str, params: &GroupParams) -> Result<Self> {
        let mut out = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let bad = || Error::Parse(format!("summand {part:?} is not eps:kappa"));
            let (e, k) = part.split_once(':').ok_or_else(bad)?;
            let eps: i64 = e.trim().parse().map_err(|_| bad())?;
            let kappa: u64 = k.trim().parse().map_err(|_| bad())?;
            let spec = SummandSpec::new(eps.rem_euclid(params.m as i64), kappa);
            spec.validate(params)?;
            out.push(spec);
        }
        Ok(Decomposition(out))
    }

    pub fn dimension(&self) -> u64 {
        self.0.iter().map(|s| s.kappa).sum()
    }

    /// Epsilons reduced mod `m`, sorted by `(kappa desc, epsilon asc)`.
    pub fn canonical(&self, m: u64) -> Decomposition {
        let mut v: Vec<SummandSpec> = self.0.iter().map(|s| s.normalized(m)).collect();
        v.sort_by_key(|s| (std::cmp::Reverse(s.kappa), s.epsilon));
        Decomposition(v)
    }

    pub fn same_multiset(&self, other: &Decomposition, m: u64) -> bool {
        self.canonical(m) == other.canonical(m)
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KModule {
    pub dimension: usize,
    pub tau: ResidueMatrix,
    pub sigma: ResidueMatrix,
}

/// Group parameters with `a0` bound, plus the residue field.
#[derive(Debug, Clone)]
pub struct ModularContext {
    pub params: GroupParams,
    pub field: FieldContext,
}

impl ModularContext {
    pub fn new(params: &GroupParams) -> Result<Self> {
        let (params, field) = bind_zeta_m(params)?;
        Ok(ModularContext { params, field })
    }

    pub fn alpha(&self) -> FieldElement {
        self.field.embed(self.params.alpha)
    }

    pub fn a0(&self) -> u64 {
        self.params.a0().expect("bound at construction")
    }
}

/// `Id + (ones on the subdiagonal)`.
pub fn jordan_block(field: &FieldContext, kappa: usize) -> ResidueMatrix {
    Matrix::from_fn(kappa, kappa, |i, j| {
        if i == j || i == j + 1 {
            field.one()
        } else {
            field.zero()
        }
    })
}

pub fn build_summand(ctx: &ModularContext, spec: SummandSpec) -> Result<KModule> {
    spec.validate(&ctx.params)?;
    let k = &ctx.field;
    let kappa = spec.kappa as usize;
    let tau = jordan_block(k, kappa);
    let n = mat_sub(k, &mat_pow(k, &tau, ctx.params.alpha), &Matrix::identity(k, kappa));
    let mut sigma = Matrix::zeros(k, kappa, kappa);
    let mut col = vec![k.zero(); kappa];
    col[0] = k.zeta_pow(spec.epsilon as i64);
    for i in 0..kappa {
        sigma.set_column(i, &col);
        col = mat_vec(k, &n, &col);
    }
    Ok(KModule {
        dimension: kappa,
        tau,
        sigma,
    })
}

fn binomial_mod(n: u64, kmax: usize, p: u64) -> Vec<u64> {
    // C(n, k) mod p for k <= kmax via the multiplicative recurrence over Z,
    // carried out with Lucas' theorem to stay exact.
    (0..=kmax)
        .map(|k| {
            let (mut nn, mut kk, mut acc) = (n, k as u64, 1u64);
            while kk > 0 || nn > 0 {
                let (ni, ki) = (nn % p, kk % p);
                if ki > ni {
                    return 0;
                }
                let mut c = 1u128;
                for j in 0..ki {
                    c = c * (ni - j) as u128 / (j + 1) as u128;
                }
                acc = (acc as u128 * (c % p as u128) % p as u128) as u64;
                nn /= p;
                kk /= p;
            }
            acc
        })
        .collect()
}

/// `sigma` from the explicit binomial matrix `A = tau^alpha - 1`,
/// `A_{ij} = C(alpha, i - j)` below the diagonal; kept as a cross-check of
/// [`build_summand`].
pub fn sigma_from_binomials(ctx: &ModularContext, spec: SummandSpec) -> Result<ResidueMatrix> {
    spec.validate(&ctx.params)?;
    let k = &ctx.field;
    let kappa = spec.kappa as usize;
    let binom = binomial_mod(ctx.params.alpha, kappa, ctx.params.p);
    let a = Matrix::from_fn(kappa, kappa, |i, j| {
        if i > j {
            k.embed(binom[i - j])
        } else {
            k.zero()
        }
    });
    let mut sigma = Matrix::zeros(k, kappa, kappa);
    let mut power = Matrix::identity(k, kappa);
    let z = k.zeta_pow(spec.epsilon as i64);
    for i in 0..kappa {
        let col: Vec<FieldElement> = power.column(0).iter().map(|v| k.mul(&z, v)).collect();
        sigma.set_column(i, &col);
        power = k.mat_mul(&a, &power);
    }
    Ok(sigma)
}

pub fn direct_sum(ctx: &ModularContext, modules: &[KModule]) -> KModule {
    let k = &ctx.field;
    let taus: Vec<ResidueMatrix> = modules.iter().map(|m| m.tau.clone()).collect();
    let sigmas: Vec<ResidueMatrix> = modules.iter().map(|m| m.sigma.clone()).collect();
    KModule {
        dimension: modules.iter().map(|m| m.dimension).sum(),
        tau: matrix::direct_sum(k, &taus),
        sigma: matrix::direct_sum(k, &sigmas),
    }
}

pub fn module_of(ctx: &ModularContext, dec: &Decomposition) -> Result<KModule> {
    let parts = dec
        .0
        .iter()
        .map(|s| build_summand(ctx, *s))
        .collect::<Result<Vec<_>>>()?;
    Ok(direct_sum(ctx, &parts))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationReport {
    pub tau_q_is_identity: bool,
    pub sigma_m_is_identity: bool,
    pub conjugation_holds: bool,
    /// Least divisor `k` of `q` with `tau^k = Id`, when `tau^q = Id`.
    pub tau_order: Option<u64>,
    /// Least divisor `k` of `m` with `sigma^k = Id`, when `sigma^m = Id`.
    pub sigma_order: Option<u64>,
}

impl RelationReport {
    pub fn all_hold(&self) -> bool {
        self.tau_q_is_identity && self.sigma_m_is_identity && self.conjugation_holds
    }
}

fn least_identity_power(k: &FieldContext, a: &ResidueMatrix, n: u64) -> Option<u64> {
    let id = Matrix::identity(k, a.rows);
    if !mat_equal(k, &mat_pow(k, a, n), &id) {
        return None;
    }
    (1..=n)
        .filter(|d| n.is_multiple_of(*d))
        .find(|&d| mat_equal(k, &mat_pow(k, a, d), &id))
}

pub fn verify_kg_relations(ctx: &ModularContext, module: &KModule) -> Result<RelationReport> {
    let k = &ctx.field;
    let d = module.dimension;
    if module.tau.rows != d || module.tau.cols != d || module.sigma.rows != d || module.sigma.cols != d {
        return Err(Error::Dimension("module matrices do not match its dimension".into()));
    }
    let tau_order = least_identity_power(k, &module.tau, ctx.params.q);
    let sigma_order = least_identity_power(k, &module.sigma, ctx.params.m);
    let lhs = k.mat_mul(&module.sigma, &module.tau);
    let rhs = k.mat_mul(&mat_pow(k, &module.tau, ctx.params.alpha), &module.sigma);
    Ok(RelationReport {
        tau_q_is_identity: tau_order.is_some(),
        sigma_m_is_identity: sigma_order.is_some(),
        conjugation_holds: mat_equal(k, &lhs, &rhs),
        tau_order,
        sigma_order,
    })
}

/// `V_alpha(lambda, kappa) = U_{lambda + kappa, kappa}`.
pub fn to_uniserial(params: &GroupParams, spec: SummandSpec) -> Result<(u64, u64)> {
    spec.validate(params)?;
    Ok(((spec.epsilon % params.m + spec.kappa % params.m) % params.m, spec.kappa))
}

pub fn from_uniserial(params: &GroupParams, ell: u64, mu: u64) -> Result<SummandSpec> {
    if ell >= params.m || mu == 0 || mu > params.q {
        return Err(Error::InvalidSummand(format!(
            "(ell, mu) = ({ell}, {mu}) outside [0, {}) x [1, {}]",
            params.m, params.q
        )));
    }
    let m = params.m;
    Ok(SummandSpec {
        epsilon: (ell + m - mu % m) % m,
        kappa: mu,
    })
}

fn is_zero_vec(k: &FieldContext, v: &[FieldElement]) -> bool {
    v.iter().all(|x| k.is_zero(x))
}

/// Splits off one maximal-length uniserial summand at a time.
pub fn decompose(ctx: &ModularContext, module: &KModule) -> Result<Decomposition> {
    let k = &ctx.field;
    let mut tau = module.tau.clone();
    let mut sigma = module.sigma.clone();
    let mut out = Vec::new();
    while tau.rows > 0 {
        let n = tau.rows;
        let nil = mat_sub(k, &tau, &Matrix::identity(k, n));
        // nilpotency index: least kappa with nil^kappa = 0
        let mut powers = vec![Matrix::identity(k, n)];
        loop {
            let last = powers.last().unwrap();
            if matrix::is_zero_matrix(k, last) {
                break;
            }
            if powers.len() > n {
                return Err(Error::RelationViolation("tau - 1 is not nilpotent".into()));
            }
            powers.push(k.mat_mul(&nil, last));
        }
        let kappa1 = powers.len() - 1;
        let top = &powers[kappa1 - 1];

        let mut chosen = None;
        'search: for j in 0..ctx.params.m {
            let lam = k.zeta_pow(j as i64);
            for v in k.eigenspace_basis(&sigma, &lam) {
                if !is_zero_vec(k, &mat_vec(k, top, &v)) {
                    chosen = Some((j, v));
                    break 'search;
                }
            }
        }
        let (eps, v) = chosen.ok_or_else(|| {
            Error::RelationViolation(
                "no sigma-eigenvector escapes the kernel of (tau - 1)^(kappa - 1)".into(),
            )
        })?;
        out.push(SummandSpec {
            epsilon: eps,
            kappa: kappa1 as u64,
        });

        // quotient by W = span{ nil^i v }
        let mut w_rows = Matrix::from_fn(kappa1, n, |i, c| mat_vec(k, &powers[i], &v)[c].clone());
        let pivots = rref(k, &mut w_rows);
        if pivots.len() != kappa1 {
            return Err(Error::Internal("cyclic vectors are dependent".into()));
        }
        let comp: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let reduce = |mut u: Vec<FieldElement>| -> Vec<FieldElement> {
            for (r, &pc) in pivots.iter().enumerate() {
                if k.is_zero(&u[pc]) {
                    continue;
                }
                let factor = u[pc].clone();
                for c in 0..n {
                    let val = k.sub(&u[c], &k.mul(&factor, w_rows.get(r, c)));
                    u[c] = val;
                }
            }
            u
        };
        let induced = |a: &ResidueMatrix| -> ResidueMatrix {
            let mut out = Matrix::zeros(k, comp.len(), comp.len());
            for (j, &cj) in comp.iter().enumerate() {
                let img = reduce(a.column(cj));
                for (i, &ci) in comp.iter().enumerate() {
                    out.set(i, j, img[ci].clone());
                }
            }
            out
        };
        let new_tau = induced(&tau);
        let new_sigma = induced(&sigma);
        tau = new_tau;
        sigma = new_sigma;
    }
    Ok(Decomposition(out).canonical(ctx.params.m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, h: u32, m: u64, a: u64) -> ModularContext {
        ModularContext::new(&GroupParams::new(p, h, m, a).unwrap()).unwrap()
    }

    #[test]
    fn parse_compact() {
        let g = GroupParams::new(5, 2, 4, 7).unwrap();
        let d = Decomposition::parse("1:2, -1:2", &g).unwrap();
        assert_eq!(d.0, vec![SummandSpec::new(1, 2), SummandSpec::new(3, 2)]);
        assert!(matches!(Decomposition::parse("1:0", &g), Err(Error::InvalidSummand(_))));
        assert!(matches!(Decomposition::parse("1-2", &g), Err(Error::Parse(_))));
        assert_eq!(Decomposition::parse("", &g).unwrap().0.len(), 0);
    }

    #[test]
    fn one_dimensional() {
        let c = ctx(5, 2, 4, 7);
        let v = build_summand(&c, SummandSpec::new(3, 1)).unwrap();
        assert_eq!(v.tau.data, vec![vec![1]]);
        assert_eq!(v.sigma.data, vec![c.field.zeta_pow(3)]);
    }

    #[test]
    fn sigma_diagonal_worked_example() {
        let c = ctx(5, 2, 4, 7);
        let v = build_summand(&c, SummandSpec::new(1, 2)).unwrap();
        assert_eq!(v.sigma.get(0, 0), &vec![2]);
        assert_eq!(v.sigma.get(1, 1), &vec![4]);
        assert_eq!(v.sigma.get(0, 1), &vec![0]);
    }

    #[test]
    fn sigma_diagonal_rule_and_binomial_cross_check() {
        let c = ctx(5, 2, 4, 7);
        let alpha = c.alpha();
        for eps in 0..4 {
            for kappa in [1u64, 2, 5, 9, 25] {
                let spec = SummandSpec::new(eps, kappa);
                let v = build_summand(&c, spec).unwrap();
                for i in 0..kappa as usize {
                    let expected = c.field.mul(&c.field.pow(&alpha, i as u64), &c.field.zeta_pow(eps));
                    assert_eq!(v.sigma.get(i, i), &expected);
                }
                assert_eq!(v.sigma, sigma_from_binomials(&c, spec).unwrap());
                assert!(verify_kg_relations(&c, &v).unwrap().all_hold());
            }
        }
    }

    #[test]
    fn projective_jordan_block() {
        let c = ctx(5, 2, 4, 7);
        let v = build_summand(&c, SummandSpec::new(0, 25)).unwrap();
        let n = mat_sub(&c.field, &v.tau, &Matrix::identity(&c.field, 25));
        assert!(!matrix::is_zero_matrix(&c.field, &mat_pow(&c.field, &n, 24)));
        assert!(matrix::is_zero_matrix(&c.field, &mat_pow(&c.field, &n, 25)));
        assert!(build_summand(&c, SummandSpec::new(0, 26)).is_err());
    }

    #[test]
    fn worked_example_sum() {
        let c = ctx(5, 2, 4, 7);
        let dec = Decomposition(vec![SummandSpec::new(1, 2), SummandSpec::new(3, 2)]);
        let m = module_of(&c, &dec).unwrap();
        assert_eq!(m.dimension, 4);
        assert!(verify_kg_relations(&c, &m).unwrap().all_hold());
        assert_eq!(decompose(&c, &m).unwrap(), dec.canonical(4));
    }

    #[test]
    fn degenerate_and_perturbed() {
        let c = ctx(5, 2, 4, 7);
        let mut v = build_summand(&c, SummandSpec::new(0, 2)).unwrap();
        v.tau = Matrix::identity(&c.field, 2);
        let rep = verify_kg_relations(&c, &v).unwrap();
        assert!(rep.tau_q_is_identity);
        assert!(rep.conjugation_holds);
        assert_eq!(rep.tau_order, Some(1));
        let d = decompose(&c, &v).unwrap();
        assert_eq!(d.0.len(), 2);
        assert!(d.0.iter().all(|s| s.kappa == 1));

        let mut w = build_summand(&c, SummandSpec::new(1, 2)).unwrap();
        w.sigma.set(1, 1, vec![2]);
        let rep = verify_kg_relations(&c, &w).unwrap();
        assert!(!rep.conjugation_holds);
    }

    #[test]
    fn empty_module() {
        let c = ctx(3, 2, 2, 8);
        let m = direct_sum(&c, &[]);
        assert_eq!(decompose(&c, &m).unwrap(), Decomposition::default());
    }

    #[test]
    fn uniserial_translation() {
        let g = GroupParams::new(5, 2, 4, 7).unwrap();
        assert_eq!(to_uniserial(&g, SummandSpec::new(1, 2)).unwrap(), (3, 2));
        for ell in 0..4 {
            for mu in 1..=25 {
                let s = from_uniserial(&g, ell, mu).unwrap();
                assert_eq!(to_uniserial(&g, s).unwrap(), (ell, mu));
            }
        }
        assert!(from_uniserial(&g, 4, 1).is_err());
        assert!(from_uniserial(&g, 0, 26).is_err());
    }

    #[test]
    fn single_summands_roundtrip_small_group() {
        let c = ctx(3, 2, 2, 8);
        for eps in 0..2 {
            for kappa in 1..=9 {
                let s = SummandSpec::new(eps, kappa);
                let v = build_summand(&c, s).unwrap();
                assert_eq!(decompose(&c, &v).unwrap(), Decomposition(vec![s]));
            }
        }
    }

    #[test]
    fn extension_field_summands() {
        // F_25 with zeta_3
        let c = ctx(5, 1, 3, 1);
        let dec = Decomposition(vec![SummandSpec::new(2, 3), SummandSpec::new(1, 1), SummandSpec::new(2, 1)]);
        let m = module_of(&c, &dec).unwrap();
        assert!(verify_kg_relations(&c, &m).unwrap().all_hold());
        assert_eq!(decompose(&c, &m).unwrap(), dec.canonical(3));
    }
}
