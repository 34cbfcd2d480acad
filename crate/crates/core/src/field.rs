//! The residue field `F_{p^f}` with a designated primitive `m`-th root of
//! unity, and linear algebra over it.
//!
//! The field is `F_p[Y]/(g)` where `g` is one irreducible factor of the
//! `m`-th cyclotomic polynomial modulo `p`; `zeta_m` is the class of `Y`.

use serde::{Deserialize, Serialize};

use crate::algebra::{inv_mod, Field, Ring};
use crate::error::{Error, Result};
use crate::group::GroupParams;
use crate::matrix::{kernel_basis, Matrix};

/// Coefficients (constant term first) of an element of `F_{p^f}`, length `f`.
pub type FieldElement = Vec<u64>;

pub type ResidueMatrix = Matrix<FieldElement>;

/// Dense polynomials over `F_p`, constant term first, no trailing zeros.
pub mod fp {
    use crate::algebra::inv_mod;

    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn deg(a: &[u64]) -> Option<usize> {
        a.iter().rposition(|&c| c != 0)
    }

    pub fn add(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        trim((0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % p)
            .collect())
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        trim((0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
            .collect())
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u128; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u128 * y as u128) % p as u128;
            }
        }
        trim(out.into_iter().map(|c| c as u64).collect())
    }

    /// Quotient and remainder; `b` must be nonzero.
    pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let db = deg(b).expect("division by zero polynomial");
        let lead_inv = inv_mod(b[db], p).expect("leading coefficient is a unit");
        let mut r = trim(a.to_vec());
        if r.len() <= db {
            return (Vec::new(), r);
        }
        let mut q = vec![0u64; r.len() - db];
        while let Some(dr) = deg(&r) {
            if dr < db {
                break;
            }
            let c = (r[dr] as u128 * lead_inv as u128 % p as u128) as u64;
            q[dr - db] = c;
            for (i, &bi) in b[..=db].iter().enumerate() {
                let sub = (c as u128 * bi as u128 % p as u128) as u64;
                r[dr - db + i] = (r[dr - db + i] + p - sub) % p;
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    pub fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        divrem(a, b, p).1
    }

    pub fn monic(a: &[u64], p: u64) -> Vec<u64> {
        let a = trim(a.to_vec());
        match a.last() {
            None => a,
            Some(&lc) => {
                let inv = inv_mod(lc, p).expect("unit");
                a.iter().map(|&c| (c as u128 * inv as u128 % p as u128) as u64).collect()
            }
        }
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut x = trim(a.to_vec());
        let mut y = trim(b.to_vec());
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        monic(&x, p)
    }

    pub fn mulmod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
        rem(&mul(a, b, p), modulus, p)
    }

    pub fn powmod(a: &[u64], mut e: u128, modulus: &[u64], p: u64) -> Vec<u64> {
        let mut base = rem(a, modulus, p);
        let mut acc = rem(&[1], modulus, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(&acc, &base, modulus, p);
            }
            e >>= 1;
            if e > 0 {
                base = mulmod(&base, &base, modulus, p);
            }
        }
        acc
    }

    /// `Y^n - 1` modulo `p`.
    pub fn x_pow_minus_one(n: usize, p: u64) -> Vec<u64> {
        let mut v = vec![0u64; n + 1];
        v[0] = p - 1;
        v[n] = 1;
        trim(v)
    }

    /// The `m`-th cyclotomic polynomial modulo `p`, as `(Y^m - 1) / prod_{d | m, d < m} Phi_d`.
    pub fn cyclotomic(m: usize, p: u64) -> Vec<u64> {
        let mut num = x_pow_minus_one(m, p);
        for d in 1..m {
            if m.is_multiple_of(d) {
                let (q, r) = divrem(&num, &cyclotomic(d, p), p);
                debug_assert!(r.is_empty());
                num = q;
            }
        }
        num
    }

    /// All monic polynomials of degree `< n` with at least degree 1, in a fixed
    /// order: by degree, then by coefficients read as base-`p` digits.
    pub fn candidates(n: usize, p: u64) -> impl Iterator<Item = Vec<u64>> {
        (1..n).flat_map(move |d| {
            let count = (p as u128).saturating_pow(d as u32).min(1 << 20) as u64;
            (0..count).map(move |mut k| {
                let mut v = vec![0u64; d + 1];
                for c in v.iter_mut().take(d) {
                    *c = k % p;
                    k /= p;
                }
                v[d] = 1;
                v
            })
        })
    }

    /// Equal-degree factorization of a squarefree product of irreducibles of
    /// degree `f`. Deterministic: splitting elements come from [`candidates`].
    pub fn equal_degree_factors(poly: &[u64], f: usize, p: u64) -> Vec<Vec<u64>> {
        let poly = monic(poly, p);
        let n = deg(&poly).unwrap_or(0);
        if n == f || n == 0 {
            return vec![poly];
        }
        let field_size = (p as u128).pow(f as u32);
        for a in candidates(n, p) {
            let b = if p == 2 {
                // trace map a + a^2 + ... + a^(2^(f-1))
                let mut acc = Vec::new();
                let mut cur = rem(&a, &poly, p);
                for _ in 0..f {
                    acc = add(&acc, &cur, p);
                    cur = mulmod(&cur, &cur, &poly, p);
                }
                acc
            } else {
                sub(&powmod(&a, (field_size - 1) / 2, &poly, p), &[1], p)
            };
            let g = gcd(&poly, &b, p);
            let dg = deg(&g).unwrap_or(0);
            if dg > 0 && dg < n {
                let (h, _) = divrem(&poly, &g, p);
                let mut out = equal_degree_factors(&g, f, p);
                out.extend(equal_degree_factors(&h, f, p));
                return out;
            }
        }
        unreachable!("no splitting element found for a reducible polynomial")
    }
}

/// Sort key that makes the chosen factor `g` deterministic: compare the
/// tuples `(-g_0, -g_1, ...) mod p` lexicographically. For `f = 1` this picks
/// `g = Y - r` with `r` the least primitive `m`-th root of unity.
fn factor_key(g: &[u64], p: u64) -> Vec<u64> {
    g.iter().map(|&c| (p - c) % p).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldContext {
    pub p: u64,
    pub f: usize,
    pub m: u64,
    /// Monic, degree `f`, constant term first.
    pub modulus_poly: Vec<u64>,
    pub zeta_m: FieldElement,
}

impl FieldContext {
    pub fn new(params: &GroupParams) -> Result<Self> {
        let p = params.p;
        let f = params.f as usize;
        let m = params.m as usize;
        if (p as f64).powi(f as i32) >= 2f64.powi(62) {
            return Err(Error::InvalidGroup(format!(
                "residue field F_{p}^{f} is too large for this implementation"
            )));
        }
        let phi = fp::cyclotomic(m, p);
        let mut factors = fp::equal_degree_factors(&phi, f, p);
        factors.sort_by_key(|g| factor_key(g, p));
        let g = factors.into_iter().next().expect("at least one factor");
        if fp::deg(&g) != Some(f) {
            return Err(Error::Internal("cyclotomic factor of unexpected degree".into()));
        }
        let mut zeta = vec![0u64; f];
        if f == 1 {
            zeta[0] = (p - g[0]) % p;
        } else {
            zeta[1] = 1;
        }
        let ctx = FieldContext {
            p,
            f,
            m: params.m,
            modulus_poly: g,
            zeta_m: zeta,
        };
        debug_assert_eq!(ctx.multiplicative_order(&ctx.zeta_m), Some(params.m));
        Ok(ctx)
    }

    pub fn size(&self) -> u128 {
        (self.p as u128).pow(self.f as u32)
    }

    pub fn embed(&self, c: u64) -> FieldElement {
        let mut v = vec![0u64; self.f];
        v[0] = c % self.p;
        v
    }

    pub fn from_poly(&self, poly: &[u64]) -> FieldElement {
        let reduced = fp::rem(
            &poly.iter().map(|c| c % self.p).collect::<Vec<_>>(),
            &self.modulus_poly,
            self.p,
        );
        let mut v = vec![0u64; self.f];
        v[..reduced.len()].copy_from_slice(&reduced);
        v
    }

    pub fn zeta_pow(&self, j: i64) -> FieldElement {
        self.pow(&self.zeta_m, j.rem_euclid(self.m as i64) as u64)
    }

    /// `None` for zero.
    pub fn multiplicative_order(&self, a: &FieldElement) -> Option<u64> {
        if self.is_zero(a) {
            return None;
        }
        let one = self.one();
        let mut cur = a.clone();
        let mut k = 1u64;
        while cur != one {
            cur = self.mul(&cur, a);
            k += 1;
        }
        Some(k)
    }

    /// Exponent `j` with `zeta_m^j = value`, if any, by scanning `[0, m)`.
    pub fn log_zeta(&self, value: &FieldElement) -> Option<u64> {
        let mut cur = self.one();
        for j in 0..self.m {
            if &cur == value {
                return Some(j);
            }
            cur = self.mul(&cur, &self.zeta_m);
        }
        None
    }

    /// Kernel of `M - eigenvalue * Id`.
    pub fn eigenspace_basis(&self, m: &ResidueMatrix, eigenvalue: &FieldElement) -> Vec<Vec<FieldElement>> {
        eigenspace_basis(self, m, eigenvalue)
    }
}

/// `a0` with `zeta_m^a0 = alpha mod p`.
pub fn discrete_log_a0(ctx: &FieldContext, alpha: u64) -> Result<u64> {
    ctx.log_zeta(&ctx.embed(alpha)).ok_or(Error::NoDiscreteLog { alpha })
}

pub fn make_field(params: &GroupParams) -> Result<FieldContext> {
    FieldContext::new(params)
}

/// Builds the residue field and returns the parameters with `a0` bound.
pub fn bind_zeta_m(params: &GroupParams) -> Result<(GroupParams, FieldContext)> {
    let ctx = FieldContext::new(params)?;
    let a0 = discrete_log_a0(&ctx, params.alpha)?;
    Ok((params.clone().with_a0(a0), ctx))
}

pub fn eigenspace_basis(
    ctx: &FieldContext,
    m: &ResidueMatrix,
    eigenvalue: &FieldElement,
) -> Vec<Vec<FieldElement>> {
    let shifted = Matrix::from_fn(m.rows, m.cols, |i, j| {
        if i == j {
            ctx.sub(m.get(i, j), eigenvalue)
        } else {
            m.get(i, j).clone()
        }
    });
    kernel_basis(ctx, &shifted)
}

impl Ring for FieldContext {
    type Elem = FieldElement;

    fn zero(&self) -> FieldElement {
        vec![0; self.f]
    }
    fn one(&self) -> FieldElement {
        self.embed(1)
    }
    fn from_int(&self, n: i64) -> FieldElement {
        self.embed(n.rem_euclid(self.p as i64) as u64)
    }
    fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }
    fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        a.iter().zip(b).map(|(x, y)| (x + self.p - y) % self.p).collect()
    }
    fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        if self.f == 1 {
            return vec![(a[0] as u128 * b[0] as u128 % self.p as u128) as u64];
        }
        self.from_poly(&fp::mul(&fp::trim(a.clone()), &fp::trim(b.clone()), self.p))
    }
    fn neg(&self, a: &FieldElement) -> FieldElement {
        a.iter().map(|x| (self.p - x) % self.p).collect()
    }
    fn is_zero(&self, a: &FieldElement) -> bool {
        a.iter().all(|&c| c == 0)
    }
    fn is_exact_zero(&self, a: &FieldElement) -> bool {
        self.is_zero(a)
    }
}

impl Field for FieldContext {
    fn inv(&self, a: &FieldElement) -> Option<FieldElement> {
        if self.is_zero(a) {
            return None;
        }
        if self.f == 1 {
            return inv_mod(a[0], self.p).map(|x| vec![x]);
        }
        let n = self.size() - 2;
        let mut base = a.clone();
        let mut acc = self.one();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            base = self.mul(&base, &base);
        }
        Some(acc)
    }
}
