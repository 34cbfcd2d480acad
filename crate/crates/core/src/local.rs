//! A fixed-precision model of the ramified local ring
//!
//! ```text
//!   R' = (Z/p^N)[y]/(g_hat) [x]/(Phi_q(x)) [t]/(t^e - (1 - x))
//! ```
//!
//! `x` is a primitive `q`-th root of unity, `y` a primitive `m`-th root of
//! unity lifting the residue-field generator, and `t` a uniformizer with
//! `t^e = 1 - x`. With the valuation normalized by `w(t) = 1` we get
//! `w(1 - x) = e` and `w(p) = e * phi(q)`. Since `t` is Eisenstein over the
//! unramified ring `(Z/p^N)[y]/(g_hat)`, reducing coefficients mod `p^N` is
//! the same as working modulo `t^(N e phi(q))`; that exponent is `prec_cap`.

use serde::{Deserialize, Serialize};

use crate::algebra::{inv_mod, Field, Ring};
use crate::error::{Error, Result};
use crate::field::{bind_zeta_m, FieldContext, FieldElement};
use crate::group::{prime_divisors, GroupParams};
use crate::matrix::Matrix;

pub type LocalMatrix = Matrix<LocalElement>;

/// A coset `z + (t^prec)`. Coefficients are indexed `(a * phi + b) * e + c`
/// for the monomial `y^a x^b t^c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalElement {
    pub prec: u32,
    pub coeffs: Vec<u64>,
}

/// Result of a valuation query. `AtLeast(prec)` is the "indistinguishable
/// from zero" sentinel: the element vanishes to its full known precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Valuation {
    Exact(u32),
    AtLeast(u32),
}

impl Valuation {
    pub fn exact(self) -> Option<u32> {
        match self {
            Valuation::Exact(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }

    /// A lower bound that is always sound.
    pub fn bound(self) -> u32 {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }

    pub fn is_indistinguishable(self) -> bool {
        matches!(self, Valuation::AtLeast(_))
    }
}

/// Equality of two elements together with the precision at which it was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionEquality {
    pub equal: bool,
    pub precision: u32,
}

#[derive(Debug, Clone)]
pub struct RingContext {
    pub params: GroupParams,
    pub field: FieldContext,
    pub n: u32,
    pub e: usize,
    pub f: usize,
    pub phi: usize,
    pub p: u64,
    /// `p^N`.
    pub modulus: u64,
    pub prec_cap: u32,
    /// Monic of degree `f`, constant term first.
    pub g_hat: Vec<u64>,
    /// `u = (1 - x)^phi / p` as an `x`-polynomial.
    pub u: Vec<u64>,
    pub u_inv: Vec<u64>,
    /// `(1 - x)^(phi - 1) * u_inv`, so that `(1 - x) * w0 = p`.
    w0: Vec<u64>,
    /// Exponents `j p^(h-1)`, `0 <= j <= p - 2`, with `x^phi = -sum x^(exponent)`.
    phi_terms: Vec<usize>,
    /// `s_basis[k * phi + b]`: coefficient of `s^k` in `x^b = (1 - s)^b`.
    s_basis: Vec<u64>,
    /// `y` reduced into the carrier (a constant when `f = 1`).
    y_poly: Vec<u64>,
}

#[inline]
fn addm(a: u64, b: u64, m: u64) -> u64 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

#[inline]
fn subm(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + m - b
    }
}

#[inline]
fn mulm(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn vp(mut v: u64, p: u64, cap: u32) -> u32 {
    if v == 0 {
        return cap;
    }
    let mut k = 0;
    while v.is_multiple_of(p) && k < cap {
        v /= p;
        k += 1;
    }
    k
}

/// Polynomials in `x` modulo `Phi_q` and an integer modulus.
struct XRing<'a> {
    phi: usize,
    terms: &'a [usize],
    modulus: u64,
}

impl XRing<'_> {
    fn reduce(&self, mut w: Vec<u64>) -> Vec<u64> {
        let m = self.modulus;
        for b in (self.phi..w.len()).rev() {
            let v = w[b];
            if v == 0 {
                continue;
            }
            w[b] = 0;
            for &s in self.terms {
                let idx = b - self.phi + s;
                w[idx] = subm(w[idx], v, m);
            }
        }
        w.truncate(self.phi);
        w.resize(self.phi, 0);
        w
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let m = self.modulus;
        let mut w = vec![0u64; a.len() + b.len()];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                w[i + j] = addm(w[i + j], mulm(x, y, m), m);
            }
        }
        self.reduce(w)
    }

    fn constant(&self, c: u64) -> Vec<u64> {
        let mut v = vec![0u64; self.phi];
        v[0] = c % self.modulus;
        v
    }
}

/// `(Z/M)[Y]/(G)` for a monic `G`.
struct WRing<'a> {
    g: &'a [u64],
    modulus: u64,
}

impl WRing<'_> {
    fn deg(&self) -> usize {
        self.g.len() - 1
    }

    fn reduce(&self, mut w: Vec<u64>) -> Vec<u64> {
        let m = self.modulus;
        let f = self.deg();
        for a in (f..w.len()).rev() {
            let v = w[a];
            if v == 0 {
                continue;
            }
            w[a] = 0;
            for k in 0..f {
                w[a - f + k] = subm(w[a - f + k], mulm(self.g[k], v, m), m);
            }
        }
        w.truncate(f);
        w.resize(f, 0);
        w
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let m = self.modulus;
        let mut w = vec![0u64; a.len() + b.len()];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                w[i + j] = addm(w[i + j], mulm(x, y, m), m);
            }
        }
        self.reduce(w)
    }

    fn pow(&self, a: &[u64], mut n: u64) -> Vec<u64> {
        let mut acc = self.constant(1);
        let mut base = a.to_vec();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    fn constant(&self, c: u64) -> Vec<u64> {
        let mut v = vec![0u64; self.deg()];
        v[0] = c % self.modulus;
        v
    }

    fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| subm(x, y, self.modulus)).collect()
    }

    /// Newton inverse starting from the residue-field inverse.
    fn inv(&self, a: &[u64], field: &FieldContext) -> Result<Vec<u64>> {
        let residue = field.from_poly(a);
        let z0 = field
            .inv(&residue)
            .ok_or_else(|| Error::Internal("Newton inverse of a non-unit".into()))?;
        let mut z: Vec<u64> = z0;
        let one = self.constant(1);
        let two = self.constant(2);
        for _ in 0..64 {
            if self.mul(a, &z) == one {
                return Ok(z);
            }
            z = self.mul(&z, &self.sub(&two, &self.mul(a, &z)));
        }
        Err(Error::Internal("Newton inverse did not converge".into()))
    }
}

/// Largest admissible `p^(N+1)`; keeps every intermediate product in `u128`.
const MODULUS_BOUND: u128 = 1 << 62;

/// Smallest `N >= 2` with `N e phi(q) >= min_prec`.
pub fn default_precision(params: &GroupParams, e: usize, min_prec: u32) -> u32 {
    let per = (e as u64 * params.phi_q()) as u32;
    min_prec.div_ceil(per).max(2)
}

impl RingContext {
    pub fn new(params: &GroupParams, n: u32, e: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidPrecision(format!("N = {n} must be at least 2")));
        }
        if e < 2 {
            return Err(Error::InvalidPrecision(format!(
                "ramification index e = {e} must be at least 2"
            )));
        }
        let p = params.p;
        if (p as u128).checked_pow(n + 1).is_none_or(|v| v >= MODULUS_BOUND) {
            return Err(Error::InvalidPrecision(format!(
                "p^(N+1) = {p}^{} exceeds 2^62",
                n + 1
            )));
        }
        let phi = params.phi_q() as usize;
        let prec_cap = (n as u64 * e as u64 * phi as u64)
            .try_into()
            .map_err(|_| Error::InvalidPrecision("precision cap overflows u32".into()))?;
        let (params, field) = if params.is_bound() {
            (params.clone(), FieldContext::new(params)?)
        } else {
            bind_zeta_m(params)?
        };
        let f = field.f;
        let modulus = p.pow(n);

        let g_hat = hensel_lift_modulus(&field, params.m, modulus)?;
        let y_poly = if f == 1 {
            vec![(modulus - g_hat[0]) % modulus]
        } else {
            let mut v = vec![0u64; f];
            v[1] = 1;
            v
        };

        let ph1 = p.pow(params.h - 1) as usize;
        let phi_terms: Vec<usize> = (0..(p as usize - 1)).map(|j| j * ph1).collect();

        // u = (1 - x)^phi / p, computed one p-adic digit deeper and divided exactly.
        let wide = XRing {
            phi,
            terms: &phi_terms,
            modulus: modulus * p,
        };
        let mut one_minus_x_wide = wide.constant(1);
        if phi > 1 {
            one_minus_x_wide[1] = wide.modulus - 1;
        } else {
            // x = -1 when q = 2
            one_minus_x_wide[0] = 2 % wide.modulus;
        }
        let mut pw = wide.constant(1);
        for _ in 0..phi {
            pw = wide.mul(&pw, &one_minus_x_wide);
        }
        if pw.iter().any(|c| c % p != 0) {
            return Err(Error::Internal(
                "(1 - x)^phi(q) is not divisible by p coefficientwise".into(),
            ));
        }
        let u: Vec<u64> = pw.iter().map(|c| c / p).collect();

        let xr = XRing {
            phi,
            terms: &phi_terms,
            modulus,
        };
        let u1 = u.iter().fold(0u64, |acc, &c| addm(acc, c % p, p)) % p;
        let mut z = xr.constant(inv_mod(u1, p).ok_or_else(|| {
            Error::Internal("u is not a unit".into())
        })?);
        let one = xr.constant(1);
        let two = xr.constant(2);
        let mut converged = false;
        for _ in 0..64 {
            let uz = xr.mul(&u, &z);
            if uz == one {
                converged = true;
                break;
            }
            let corr: Vec<u64> = two.iter().zip(&uz).map(|(&a, &b)| subm(a, b, modulus)).collect();
            z = xr.mul(&z, &corr);
        }
        if !converged {
            return Err(Error::Internal("Newton iteration for u^-1 did not converge".into()));
        }
        let u_inv = z;

        let one_minus_x: Vec<u64> = one_minus_x_wide.iter().map(|c| c % modulus).collect();
        let mut w0 = u_inv.clone();
        for _ in 1..phi {
            w0 = xr.mul(&w0, &one_minus_x);
        }
        if xr.mul(&w0, &one_minus_x) != xr.constant(p) {
            return Err(Error::Internal("(1 - x) * w0 != p".into()));
        }

        let mut binom = vec![vec![0u64; phi + 1]; phi + 1];
        for b in 0..=phi {
            binom[b][0] = 1;
            for k in 1..=b {
                binom[b][k] = addm(binom[b - 1][k - 1], binom[b - 1][k], modulus);
            }
        }
        let mut s_basis = vec![0u64; phi * phi];
        for k in 0..phi {
            for b in k..phi {
                let c = binom[b][k];
                s_basis[k * phi + b] = if k % 2 == 0 { c } else { (modulus - c) % modulus };
            }
        }

        let ctx = RingContext {
            params,
            field,
            n,
            e,
            f,
            phi,
            p,
            modulus,
            prec_cap,
            g_hat,
            u,
            u_inv,
            w0,
            phi_terms,
            s_basis,
            y_poly,
        };
        ctx.check_roots_of_unity()?;
        Ok(ctx)
    }

    /// Context with the default `e = 2` and the smallest `N` reaching
    /// `prec_cap >= 64`.
    pub fn with_defaults(params: &GroupParams) -> Result<Self> {
        Self::new(params, default_precision(params, 2, 64), 2)
    }

    fn check_roots_of_unity(&self) -> Result<()> {
        let q = self.params.q;
        let x = self.zeta_q(1);
        if !self.is_one(&self.pow(&x, q)) || self.is_one(&self.pow(&x, q / self.p)) {
            return Err(Error::Internal("x does not have order q".into()));
        }
        let m = self.params.m;
        let y = self.y();
        if !self.is_one(&self.pow(&y, m)) {
            return Err(Error::Internal("y^m != 1 in the carrier".into()));
        }
        for l in prime_divisors(m) {
            if self.is_one(&self.pow(&y, m / l)) {
                return Err(Error::Internal("y does not have order m".into()));
            }
        }
        Ok(())
    }

    fn is_one(&self, z: &LocalElement) -> bool {
        self.equal(z, &self.one())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.f * self.phi * self.e
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.phi + b) * self.e + c
    }

    pub fn element(&self, coeffs: Vec<u64>, prec: u32) -> Result<LocalElement> {
        if coeffs.len() != self.len() {
            return Err(Error::Dimension(format!(
                "element has {} coefficients, context expects {}",
                coeffs.len(),
                self.len()
            )));
        }
        if prec == 0 || prec > self.prec_cap {
            return Err(Error::InvalidPrecision(format!(
                "precision {prec} outside 1..={}",
                self.prec_cap
            )));
        }
        if coeffs.iter().any(|&c| c >= self.modulus) {
            return Err(Error::Parse(format!("coefficient not reduced modulo {}", self.modulus)));
        }
        Ok(LocalElement { prec, coeffs })
    }

    fn exact(&self, coeffs: Vec<u64>) -> LocalElement {
        LocalElement {
            prec: self.prec_cap,
            coeffs,
        }
    }

    /// Embeds a polynomial in `y` with `Z/p^N` coefficients, at full precision.
    fn from_y_poly(&self, poly: &[u64]) -> LocalElement {
        let mut z = vec![0u64; self.len()];
        for (a, &c) in poly.iter().enumerate().take(self.f) {
            z[self.index(a, 0, 0)] = c % self.modulus;
        }
        self.exact(z)
    }

    /// Embeds an `x`-polynomial (length `phi`) at full precision.
    fn from_x_poly(&self, poly: &[u64]) -> LocalElement {
        let mut z = vec![0u64; self.len()];
        for (b, &c) in poly.iter().enumerate() {
            z[self.index(0, b, 0)] = c % self.modulus;
        }
        self.exact(z)
    }

    fn xring(&self) -> XRing<'_> {
        XRing {
            phi: self.phi,
            terms: &self.phi_terms,
            modulus: self.modulus,
        }
    }

    /// The uniformizer `t`.
    pub fn t(&self) -> LocalElement {
        let mut z = vec![0u64; self.len()];
        z[self.index(0, 0, 1)] = 1;
        self.exact(z)
    }

    pub fn t_pow(&self, k: u32) -> LocalElement {
        self.pow(&self.t(), k as u64)
    }

    /// `y`, the designated primitive `m`-th root of unity lifting `zeta_m`.
    pub fn y(&self) -> LocalElement {
        self.from_y_poly(&self.y_poly)
    }

    pub fn zeta_m_pow(&self, j: i64) -> LocalElement {
        self.pow(&self.y(), j.rem_euclid(self.params.m as i64) as u64)
    }

    /// `x^(exponent mod q)`.
    pub fn zeta_q(&self, exponent: i64) -> LocalElement {
        let k = exponent.rem_euclid(self.params.q as i64) as usize;
        let mut w = vec![0u64; k.max(self.phi) + 1];
        w[k] = 1;
        self.from_x_poly(&self.xring().reduce(w))
    }

    pub fn one_minus_x(&self) -> LocalElement {
        self.sub(&self.one(), &self.zeta_q(1))
    }

    /// Same representative with its precision lowered to `prec`.
    pub fn with_prec(&self, z: &LocalElement, prec: u32) -> LocalElement {
        LocalElement {
            prec: prec.min(z.prec),
            coeffs: z.coeffs.clone(),
        }
    }

    /// Raw product of representatives, no precision bookkeeping.
    pub fn mul_raw(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let (f, phi, e, m) = (self.f, self.phi, self.e, self.modulus);
        let na: Vec<(usize, usize, usize, u64)> = self.nonzero_terms(a);
        let nb: Vec<(usize, usize, usize, u64)> = self.nonzero_terms(b);
        let (ya, xb, tc) = (2 * f - 1, 2 * phi, 2 * e - 1);
        let widx = |a: usize, b: usize, c: usize| (a * xb + b) * tc + c;
        let mut acc = vec![0u128; ya * xb * tc];
        let reduce_each = m >= 1 << 40;
        for &(a1, b1, c1, v1) in &na {
            for &(a2, b2, c2, v2) in &nb {
                let prod = v1 as u128 * v2 as u128;
                let slot = &mut acc[widx(a1 + a2, b1 + b2, c1 + c2)];
                *slot += if reduce_each { prod % m as u128 } else { prod };
            }
        }
        let mut w: Vec<u64> = acc.into_iter().map(|v| (v % m as u128) as u64).collect();

        // t^c = t^(c-e) (1 - x) for c >= e
        for a in 0..ya {
            for b in 0..(xb - 1) {
                for c in (e..tc).rev() {
                    let v = w[widx(a, b, c)];
                    if v == 0 {
                        continue;
                    }
                    w[widx(a, b, c)] = 0;
                    let lo = widx(a, b, c - e);
                    w[lo] = addm(w[lo], v, m);
                    let hi = widx(a, b + 1, c - e);
                    w[hi] = subm(w[hi], v, m);
                }
            }
        }
        // x^phi = -sum_j x^(j p^(h-1))
        for a in 0..ya {
            for b in (phi..xb).rev() {
                for c in 0..e {
                    let v = w[widx(a, b, c)];
                    if v == 0 {
                        continue;
                    }
                    w[widx(a, b, c)] = 0;
                    for &s in &self.phi_terms {
                        let i = widx(a, b - phi + s, c);
                        w[i] = subm(w[i], v, m);
                    }
                }
            }
        }
        // y^f = -sum_k g_hat_k y^k
        for a in (f..ya).rev() {
            for b in 0..phi {
                for c in 0..e {
                    let v = w[widx(a, b, c)];
                    if v == 0 {
                        continue;
                    }
                    w[widx(a, b, c)] = 0;
                    for k in 0..f {
                        let i = widx(a - f + k, b, c);
                        w[i] = subm(w[i], mulm(self.g_hat[k], v, m), m);
                    }
                }
            }
        }
        let mut out = vec![0u64; self.len()];
        for a in 0..f {
            for b in 0..phi {
                for c in 0..e {
                    out[self.index(a, b, c)] = w[widx(a, b, c)];
                }
            }
        }
        out
    }

    fn nonzero_terms(&self, z: &[u64]) -> Vec<(usize, usize, usize, u64)> {
        let mut out = Vec::new();
        for a in 0..self.f {
            for b in 0..self.phi {
                for c in 0..self.e {
                    let v = z[self.index(a, b, c)];
                    if v != 0 {
                        out.push((a, b, c, v));
                    }
                }
            }
        }
        out
    }

    /// Product with caller-supplied valuation lower bounds for the factors.
    pub fn mul_with_bounds(&self, a: &LocalElement, wa: u32, b: &LocalElement, wb: u32) -> LocalElement {
        let prec = if a.prec == self.prec_cap && b.prec == self.prec_cap {
            self.prec_cap
        } else {
            (a.prec.saturating_add(wb)).min(b.prec.saturating_add(wa)).min(self.prec_cap)
        };
        LocalElement {
            prec,
            coeffs: self.mul_raw(&a.coeffs, &b.coeffs),
        }
    }

    /// Valuation by the closed formula: in the basis `y^a s^k t^c` with
    /// `s = 1 - x` the monomials have pairwise distinct valuations modulo
    /// `e phi`, so `w = min e (phi v_p(coeff) + k) + c`.
    pub fn valuation(&self, z: &LocalElement) -> Valuation {
        let (phi, e, m) = (self.phi, self.e, self.modulus);
        let mut best = u64::MAX;
        let mut slice = vec![0u64; phi];
        for c in 0..e {
            if c as u64 >= best {
                break;
            }
            for a in 0..self.f {
                let mut any = false;
                for b in 0..phi {
                    slice[b] = z.coeffs[self.index(a, b, c)];
                    any |= slice[b] != 0;
                }
                if !any {
                    continue;
                }
                for k in 0..phi {
                    let base = (e * k + c) as u64;
                    if base >= best {
                        break;
                    }
                    let mut acc: u128 = 0;
                    for b in k..phi {
                        let sv = self.s_basis[k * phi + b];
                        if sv != 0 && slice[b] != 0 {
                            acc += sv as u128 * slice[b] as u128;
                            if acc >= 1 << 126 {
                                acc %= m as u128;
                            }
                        }
                    }
                    let dk = (acc % m as u128) as u64;
                    let v = vp(dk, self.p, self.n) as u64;
                    let w = (e as u64) * (phi as u64 * v + k as u64) + c as u64;
                    best = best.min(w);
                }
            }
        }
        if best >= z.prec as u64 {
            Valuation::AtLeast(z.prec)
        } else {
            Valuation::Exact(best as u32)
        }
    }

    /// Reference valuation: strip factors of `t` until the residue is nonzero.
    pub fn valuation_by_division(&self, z: &LocalElement) -> Valuation {
        let mut cur = z.clone();
        let mut v = 0u32;
        loop {
            if !self.field.is_zero(&self.reduce(&cur)) {
                return Valuation::Exact(v);
            }
            if v + 1 >= z.prec {
                return Valuation::AtLeast(z.prec);
            }
            match self.divide_by_t(&cur) {
                Ok(next) => cur = next,
                Err(_) => return Valuation::AtLeast(z.prec),
            }
            v += 1;
        }
    }

    /// Residue map: `t -> 0`, `x -> 1`, coefficients mod `p`, `y -> zeta_m`.
    pub fn reduce(&self, z: &LocalElement) -> FieldElement {
        let p = self.p;
        let mut poly = vec![0u64; self.f];
        for (a, slot) in poly.iter_mut().enumerate() {
            let mut s = 0u64;
            for b in 0..self.phi {
                s = (s + z.coeffs[self.index(a, b, 0)] % p) % p;
            }
            *slot = s;
        }
        if self.f == 1 {
            // y was already specialized to its constant root
            return poly;
        }
        self.field.from_poly(&poly)
    }

    pub fn reduce_matrix(&self, m: &LocalMatrix) -> Matrix<FieldElement> {
        m.map(|z| self.reduce(z))
    }

    /// Exact division by the uniformizer; precision drops by one.
    pub fn divide_by_t(&self, z: &LocalElement) -> Result<LocalElement> {
        if z.prec <= 1 {
            return Err(Error::PrecisionExhausted(
                "cannot divide an element known to precision 1 by t".into(),
            ));
        }
        let (f, phi, e, m, p) = (self.f, self.phi, self.e, self.modulus, self.p);
        let mut out = vec![0u64; self.len()];
        for a in 0..f {
            for b in 0..phi {
                for c in 1..e {
                    out[self.index(a, b, c - 1)] = z.coeffs[self.index(a, b, c)];
                }
            }
        }
        for a in 0..f {
            // c0 = (x - 1) quot + rem by synthetic division
            let c0: Vec<u64> = (0..phi).map(|b| z.coeffs[self.index(a, b, 0)]).collect();
            let mut quot = vec![0u64; phi.saturating_sub(1)];
            let mut carry = 0u64;
            for b in (0..phi).rev() {
                let v = addm(c0[b], carry, m);
                if b == 0 {
                    carry = v;
                } else {
                    quot[b - 1] = v;
                    carry = v;
                }
            }
            let rem = carry;
            if !rem.is_multiple_of(p) {
                return Err(Error::NotDivisible);
            }
            let r = rem / p;
            // c0 / (1 - x) = -quot + (rem / p) * w0
            for b in 0..phi {
                let qb = if b < quot.len() { quot[b] } else { 0 };
                let val = subm(mulm(r, self.w0[b], m), qb, m);
                out[self.index(a, b, e - 1)] = val;
            }
        }
        Ok(LocalElement {
            prec: z.prec - 1,
            coeffs: out,
        })
    }

    pub fn divide_by_t_pow(&self, z: &LocalElement, k: u32) -> Result<LocalElement> {
        let mut cur = z.clone();
        for _ in 0..k {
            cur = self.divide_by_t(&cur)?;
        }
        Ok(cur)
    }

    pub fn equal_at(&self, a: &LocalElement, b: &LocalElement) -> PrecisionEquality {
        let d = self.sub(a, b);
        PrecisionEquality {
            equal: self.valuation(&d).is_indistinguishable(),
            precision: d.prec,
        }
    }

    /// Checks a context-shape match before arithmetic.
    pub fn check_shape(&self, z: &LocalElement) -> Result<()> {
        if z.coeffs.len() != self.len() || z.prec == 0 || z.prec > self.prec_cap {
            return Err(Error::Dimension("element does not belong to this ring context".into()));
        }
        Ok(())
    }

    /// Valuation bounds for every entry of a matrix.
    pub fn valuation_bounds(&self, a: &LocalMatrix) -> Vec<u32> {
        a.data
            .iter()
            .map(|z| {
                if z.prec == self.prec_cap && z.coeffs.iter().all(|&c| c == 0) {
                    self.prec_cap
                } else {
                    self.valuation(z).bound()
                }
            })
            .collect()
    }

    /// Elementwise minimum precision of a matrix.
    pub fn matrix_precision(&self, a: &LocalMatrix) -> u32 {
        a.data.iter().map(|z| z.prec).min().unwrap_or(self.prec_cap)
    }

    /// Uniformly random coefficients at the given precision (test helper).
    pub fn random_element<R: rand::Rng>(&self, rng: &mut R, prec: u32) -> LocalElement {
        LocalElement {
            prec,
            coeffs: (0..self.len()).map(|_| rng.gen_range(0..self.modulus)).collect(),
        }
    }

    /// Random element of valuation at least `min_val`, at full precision.
    pub fn random_element_with_valuation<R: rand::Rng>(&self, rng: &mut R, min_val: u32) -> LocalElement {
        let z = self.random_element(rng, self.prec_cap);
        let tk = self.t_pow(min_val);
        self.mul(&z, &tk)
    }
}

/// Hensel-lifts the residue-field modulus so that its roots are genuine
/// `m`-th roots of unity modulo `modulus`.
fn hensel_lift_modulus(field: &FieldContext, m: u64, modulus: u64) -> Result<Vec<u64>> {
    let f = field.f;
    let g_lift: Vec<u64> = field.modulus_poly.clone();
    let w = WRing {
        g: &g_lift,
        modulus,
    };
    let mut r = if f == 1 {
        vec![field.zeta_m[0]]
    } else {
        let mut v = vec![0u64; f];
        v[1] = 1;
        v
    };
    let one = w.constant(1);
    let mm = w.constant(m % modulus);
    let mut converged = false;
    for _ in 0..64 {
        let rm = w.pow(&r, m);
        if rm == one {
            converged = true;
            break;
        }
        let fval = w.sub(&rm, &one);
        let deriv = w.mul(&mm, &w.pow(&r, m - 1));
        let dinv = w.inv(&deriv, field)?;
        r = w.sub(&r, &w.mul(&fval, &dinv));
    }
    if !converged {
        return Err(Error::Internal("Hensel lift of zeta_m did not converge".into()));
    }

    // g_hat = prod_i (Z - r^(p^i)), coefficients in W
    let mut poly: Vec<Vec<u64>> = vec![w.constant(1)];
    let mut conj = r.clone();
    for _ in 0..f {
        let mut next = vec![w.constant(0); poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k + 1] = c
                .iter()
                .zip(&next[k + 1])
                .map(|(&a, &b)| addm(a, b, modulus))
                .collect();
            let prod = w.mul(c, &conj);
            next[k] = w.sub(&next[k], &prod);
        }
        poly = next;
        conj = w.pow(&conj, field.p);
    }
    let mut g_hat = Vec::with_capacity(f + 1);
    for c in &poly {
        if c.iter().skip(1).any(|&v| v != 0) {
            return Err(Error::Internal("lifted modulus has non-rational coefficients".into()));
        }
        g_hat.push(c[0]);
    }
    if g_hat.iter().zip(&field.modulus_poly).any(|(&a, &b)| a % field.p != b) {
        return Err(Error::Internal("lifted modulus does not reduce to g".into()));
    }
    // g_hat | Y^m - 1 modulo p^N
    let mut rem = vec![0u64; m as usize + 1];
    rem[0] = modulus - 1;
    rem[m as usize] = 1;
    for a in (f..rem.len()).rev() {
        let v = rem[a];
        if v == 0 {
            continue;
        }
        for k in 0..=f {
            rem[a - f + k] = subm(rem[a - f + k], mulm(g_hat[k], v, modulus), modulus);
        }
    }
    if rem.iter().any(|&v| v != 0) {
        return Err(Error::Internal("lifted modulus does not divide Y^m - 1".into()));
    }
    Ok(g_hat)
}

impl Ring for RingContext {
    type Elem = LocalElement;

    fn zero(&self) -> LocalElement {
        self.exact(vec![0; self.len()])
    }
    fn one(&self) -> LocalElement {
        self.from_int(1)
    }
    fn from_int(&self, n: i64) -> LocalElement {
        let mut z = vec![0u64; self.len()];
        z[0] = (n as i128).rem_euclid(self.modulus as i128) as u64;
        self.exact(z)
    }
    fn add(&self, a: &LocalElement, b: &LocalElement) -> LocalElement {
        LocalElement {
            prec: a.prec.min(b.prec),
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| addm(x, y, self.modulus))
                .collect(),
        }
    }
    fn sub(&self, a: &LocalElement, b: &LocalElement) -> LocalElement {
        LocalElement {
            prec: a.prec.min(b.prec),
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| subm(x, y, self.modulus))
                .collect(),
        }
    }
    fn mul(&self, a: &LocalElement, b: &LocalElement) -> LocalElement {
        if a.prec == self.prec_cap && b.prec == self.prec_cap {
            return self.exact(self.mul_raw(&a.coeffs, &b.coeffs));
        }
        let wa = self.valuation(a).bound();
        let wb = self.valuation(b).bound();
        self.mul_with_bounds(a, wa, b, wb)
    }
    fn neg(&self, a: &LocalElement) -> LocalElement {
        LocalElement {
            prec: a.prec,
            coeffs: a.coeffs.iter().map(|&x| subm(0, x, self.modulus)).collect(),
        }
    }
    fn is_zero(&self, a: &LocalElement) -> bool {
        self.valuation(a).is_indistinguishable()
    }
    fn is_exact_zero(&self, a: &LocalElement) -> bool {
        a.prec == self.prec_cap && a.coeffs.iter().all(|&c| c == 0)
    }

    fn mat_mul(&self, a: &LocalMatrix, b: &LocalMatrix) -> LocalMatrix {
        assert_eq!(a.cols, b.rows, "matrix product dimension mismatch");
        let va = self.valuation_bounds(a);
        let vb = self.valuation_bounds(b);
        let mut out = Matrix::zeros(self, a.rows, b.cols);
        for i in 0..a.rows {
            for j in 0..b.cols {
                let mut acc: Option<LocalElement> = None;
                for k in 0..a.cols {
                    let (x, y) = (a.get(i, k), b.get(k, j));
                    if self.is_exact_zero(x) || self.is_exact_zero(y) {
                        continue;
                    }
                    let prod = self.mul_with_bounds(x, va[i * a.cols + k], y, vb[k * b.cols + j]);
                    acc = Some(match acc {
                        None => prod,
                        Some(s) => self.add(&s, &prod),
                    });
                }
                if let Some(s) = acc {
                    out.set(i, j, s);
                }
            }
        }
        out
    }
}

/// Builds a context, validating `N` and `e`.
pub fn make_ring(params: &GroupParams, n: u32, e: usize) -> Result<RingContext> {
    RingContext::new(params, n, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng as _, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ring(p: u64, h: u32, m: u64, a: u64, n: u32, e: usize) -> RingContext {
        RingContext::new(&GroupParams::new(p, h, m, a).unwrap(), n, e).unwrap()
    }

    #[test]
    fn worked_example_context() {
        let r = ring(5, 2, 4, 7, 8, 2);
        assert_eq!(r.phi, 20);
        assert_eq!(r.prec_cap, 320);
        assert_eq!(r.reduce(&r.y()), vec![2]);
    }

    #[test]
    fn small_context_u_is_minus_x() {
        let r = ring(3, 1, 2, 2, 4, 2);
        assert_eq!(r.phi, 2);
        assert_eq!(r.prec_cap, 16);
        // u = (1 - x)^2 / 3 = -x modulo x^2 + x + 1
        assert_eq!(r.u, vec![0, 81 - 1]);
        let uu = r.xring().mul(&r.u, &r.u_inv);
        assert_eq!(uu, vec![1, 0]);
    }

    #[test]
    fn valuation_of_p_and_basics() {
        for r in [ring(5, 2, 4, 7, 4, 2), ring(3, 2, 2, 8, 6, 3), ring(2, 2, 1, 1, 8, 2)] {
            let w = r.valuation(&r.from_int(r.p as i64));
            assert_eq!(w, Valuation::Exact((r.e * r.phi) as u32));
            assert_eq!(r.valuation(&r.one()), Valuation::Exact(0));
            assert_eq!(r.valuation(&r.one_minus_x()), Valuation::Exact(r.e as u32));
            assert_eq!(r.valuation(&r.t()), Valuation::Exact(1));
            assert!(r.valuation(&r.zero()).is_indistinguishable());
            let rel = r.sub(&r.one_minus_x(), &r.t_pow(r.e as u32));
            assert!(r.is_zero(&rel));
        }
    }

    #[test]
    fn cyclotomic_differences() {
        let r = ring(5, 2, 4, 7, 4, 2);
        // order-25 difference
        let d1 = r.sub(&r.zeta_q(3), &r.zeta_q(4));
        assert_eq!(r.valuation(&d1), Valuation::Exact(2));
        assert_eq!(r.valuation_by_division(&d1), Valuation::Exact(2));
        // order-5 difference
        let d2 = r.sub(&r.zeta_q(3), &r.zeta_q(8));
        assert_eq!(r.valuation(&d2), Valuation::Exact(10));
        assert_eq!(r.valuation_by_division(&d2), Valuation::Exact(10));
    }

    #[test]
    fn zeta_q_order() {
        let r = ring(3, 1, 2, 2, 4, 2);
        assert_eq!(r.zeta_q(0), r.one());
        assert_eq!(r.zeta_q(3), r.one());
        // x^2 = -1 - x
        let x2 = r.zeta_q(2);
        let expect = r.sub(&r.neg(&r.one()), &r.zeta_q(1));
        assert_eq!(x2, expect);
    }

    #[test]
    fn divide_by_t_examples() {
        let r = ring(5, 2, 4, 7, 4, 2);
        let one = r.divide_by_t(&r.t()).unwrap();
        assert!(r.equal_at(&one, &r.one()).equal);
        assert_eq!(one.prec, r.prec_cap - 1);
        let s = r.divide_by_t(&r.t_pow(2)).unwrap();
        assert!(r.equal_at(&s, &r.t()).equal);
        let s = r.divide_by_t(&r.t_pow(3)).unwrap();
        assert!(r.equal_at(&s, &r.one_minus_x()).equal);
        let v = r.divide_by_t(&r.one_minus_x()).unwrap();
        assert_eq!(r.valuation(&v), Valuation::Exact(1));
        assert_eq!(r.divide_by_t(&r.one()), Err(Error::NotDivisible));
    }

    #[test]
    fn divide_then_multiply_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for r in [ring(5, 2, 4, 7, 3, 2), ring(3, 2, 2, 8, 5, 3), ring(5, 1, 3, 1, 4, 2)] {
            for _ in 0..100 {
                let z = r.random_element_with_valuation(&mut rng, 1);
                let drop = rng.gen_range(0..5);
                let z = r.with_prec(&z, r.prec_cap - drop);
                let q = r.divide_by_t(&z).unwrap();
                let back = r.mul(&r.t(), &q);
                let eq = r.equal_at(&back, &z);
                assert!(eq.equal);
                assert_eq!(eq.precision, z.prec);
            }
        }
    }

    #[test]
    fn valuation_formula_matches_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for r in [ring(5, 2, 4, 7, 2, 2), ring(3, 2, 2, 8, 3, 3), ring(5, 1, 3, 1, 3, 2), ring(2, 3, 1, 1, 4, 2)] {
            for _ in 0..60 {
                let k = rng.gen_range(0..r.prec_cap / 2);
                let z = r.random_element_with_valuation(&mut rng, k);
                let drop = rng.gen_range(0..3);
                let z = r.with_prec(&z, r.prec_cap - drop);
                assert_eq!(r.valuation(&z), r.valuation_by_division(&z));
            }
        }
    }

    #[test]
    fn multiplicativity_of_valuation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = ring(5, 2, 4, 7, 3, 2);
        for _ in 0..100 {
            let (ka, kb) = (rng.gen_range(0..20), rng.gen_range(0..20));
            let a = r.random_element_with_valuation(&mut rng, ka);
            let b = r.random_element_with_valuation(&mut rng, kb);
            let (va, vb) = (r.valuation(&a), r.valuation(&b));
            let vab = r.valuation(&r.mul(&a, &b));
            if let (Some(x), Some(y)) = (va.exact(), vb.exact()) {
                if x + y < r.prec_cap {
                    assert_eq!(vab, Valuation::Exact(x + y));
                }
            }
            let vs = r.valuation(&r.add(&a, &b)).bound();
            assert!(vs >= va.bound().min(vb.bound()));
        }
    }

    #[test]
    fn precision_propagation() {
        let r = ring(5, 2, 4, 7, 3, 2);
        let a = r.with_prec(&r.one(), 50);
        let t3 = r.t_pow(3);
        let prod = r.mul(&a, &t3);
        assert_eq!(prod.prec, 53);
        let z = r.with_prec(&r.zero(), 40);
        assert_eq!(r.mul(&z, &a).prec, 40);
        assert_eq!(r.mul(&z, &t3).prec, 43);
        assert_eq!(r.add(&a, &z).prec, 40);
    }

    #[test]
    fn y_is_root_of_unity_in_extension() {
        let r = ring(5, 1, 3, 1, 3, 2);
        assert_eq!(r.f, 2);
        let y = r.y();
        assert!(r.equal_at(&r.pow(&y, 3), &r.one()).equal);
        assert!(!r.equal_at(&y, &r.one()).equal);
        assert_eq!(r.reduce(&y), r.field.zeta_m);
    }

    #[test]
    fn rejects_bad_precision() {
        let g = GroupParams::new(5, 2, 4, 7).unwrap();
        assert!(RingContext::new(&g, 1, 2).is_err());
        assert!(RingContext::new(&g, 4, 1).is_err());
        assert!(RingContext::new(&g, 40, 2).is_err());
    }

    #[test]
    fn default_precision_reaches_64() {
        let g = GroupParams::new(3, 2, 2, 8).unwrap();
        let r = RingContext::with_defaults(&g).unwrap();
        assert!(r.prec_cap >= 64);
    }
}
