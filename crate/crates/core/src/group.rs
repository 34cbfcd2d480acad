//! Integer arithmetic attached to the metacyclic group
//! `G = <sigma, tau | tau^q = 1, sigma^m = 1, sigma tau sigma^-1 = tau^alpha>`
//! with `q = p^h` and `gcd(p, m) = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest prime accepted by [`is_prime`]'s trial division.
pub const MAX_PRIME: u64 = 1 << 32;

/// Upper bound on `q = p^h`.
pub const MAX_Q: u64 = 1 << 24;

/// Validated parameters of `C_q ⋊ C_m`. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupParams {
    pub p: u64,
    pub h: u32,
    pub q: u64,
    pub m: u64,
    /// Normalized into `[1, q-1]`.
    pub alpha: u64,
    /// `(p^i, ord_{p^i}(alpha))` for `i = 1..=h`.
    pub ord_table: Vec<(u64, u64)>,
    pub m_prime: u64,
    /// Multiplicative order of `p` modulo `m`; degree of the residue field.
    pub f: u32,
    /// `ord_{p^i}(alpha) = m` for every `i`.
    pub faithful: bool,
    a0: Option<u64>,
}

/// Deterministic trial division; valid for `n < MAX_PRIME`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

pub(crate) fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        exp >>= 1;
    }
    acc
}

/// Least `o >= 1` with `alpha^o ≡ 1 (mod modulus)`, by direct iteration.
/// `None` when `alpha` is not a unit modulo `modulus`.
pub fn ord_mod(alpha: u64, modulus: u64) -> Option<u64> {
    if modulus == 1 {
        return Some(1);
    }
    if gcd(alpha % modulus, modulus) != 1 {
        return None;
    }
    let a = alpha % modulus;
    let mut acc = a;
    let mut o = 1u64;
    while acc != 1 {
        acc = mul_mod(acc, a, modulus);
        o += 1;
        if o > modulus {
            return None;
        }
    }
    Some(o)
}

/// Distinct prime divisors of `n`.
pub fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Euler's totient of `p^h`.
pub fn phi_prime_power(p: u64, h: u32) -> u64 {
    p.pow(h - 1) * (p - 1)
}

impl GroupParams {
    pub fn new(p: u64, h: u32, m: u64, alpha: u64) -> Result<Self> {
        if p >= MAX_PRIME || !is_prime(p) {
            return Err(Error::InvalidGroup(format!("p = {p} is not a prime below 2^32")));
        }
        if h == 0 {
            return Err(Error::InvalidGroup("h must be positive".into()));
        }
        if m == 0 {
            return Err(Error::InvalidGroup("m must be positive".into()));
        }
        let q = p
            .checked_pow(h)
            .filter(|&q| q <= MAX_Q)
            .ok_or_else(|| Error::InvalidGroup(format!("q = {p}^{h} exceeds {MAX_Q}")))?;
        if gcd(p, m) != 1 {
            return Err(Error::InvalidGroup(format!("gcd(p, m) = gcd({p}, {m}) != 1")));
        }
        let alpha = alpha % q;
        if alpha == 0 || gcd(alpha, p) != 1 {
            return Err(Error::InvalidGroup(format!("alpha must be a unit modulo {q}")));
        }
        if pow_mod(alpha, m, q) != 1 {
            return Err(Error::InvalidGroup(format!(
                "alpha^m = {alpha}^{m} is not 1 modulo {q}"
            )));
        }

        let mut ord_table = Vec::with_capacity(h as usize);
        let mut pi = 1u64;
        for _ in 0..h {
            pi *= p;
            let o = ord_mod(alpha, pi).expect("alpha is a unit");
            ord_table.push((pi, o));
        }
        let ord_q = ord_table.last().unwrap().1;
        if !m.is_multiple_of(ord_q) {
            return Err(Error::Internal("ord_q(alpha) does not divide m".into()));
        }
        let faithful = ord_table.iter().all(|&(_, o)| o == m);
        let f = ord_mod(p, m).expect("gcd(p, m) = 1") as u32;

        Ok(GroupParams {
            p,
            h,
            q,
            m,
            alpha,
            ord_table,
            m_prime: m / ord_q,
            f,
            faithful,
            a0: None,
        })
    }

    /// `ord_{p^i}(alpha)`.
    pub fn ord(&self, i: u32) -> Option<u64> {
        if i == 0 {
            return Some(1);
        }
        self.ord_table.get(i as usize - 1).map(|&(_, o)| o)
    }

    pub fn phi_q(&self) -> u64 {
        phi_prime_power(self.p, self.h)
    }

    pub fn a0(&self) -> Result<u64> {
        self.a0.ok_or(Error::A0Unbound)
    }

    pub fn with_a0(mut self, a0: u64) -> Self {
        self.a0 = Some(a0 % self.m);
        self
    }

    pub fn is_bound(&self) -> bool {
        self.a0.is_some()
    }

    pub fn require_faithful(&self, what: &str) -> Result<()> {
        if self.faithful {
            Ok(())
        } else {
            Err(Error::NotFaithful(what.to_string()))
        }
    }

    /// Orbit of `c` under multiplication by `alpha` modulo `q`, starting at `c`.
    pub fn alpha_orbit(&self, c: u64) -> Vec<u64> {
        let start = c % self.q;
        let mut orbit = vec![start];
        let mut cur = mul_mod(start, self.alpha, self.q);
        while cur != start {
            orbit.push(cur);
            cur = mul_mod(cur, self.alpha, self.q);
        }
        orbit
    }
}

/// `m' = m / ord_{p^h}(alpha)`, the index of `<tau>` in the centralizer of `tau`
/// divided into `m`.
pub fn centralizer_quotient(params: &GroupParams) -> u64 {
    params.m_prime
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_group() {
        let g = GroupParams::new(5, 2, 4, 7).unwrap();
        assert_eq!(g.q, 25);
        assert_eq!(g.ord_table, vec![(5, 4), (25, 4)]);
        assert_eq!(centralizer_quotient(&g), 1);
        assert!(g.faithful);
        assert_eq!(g.f, 1);
    }

    #[test]
    fn trivial_alpha() {
        let g = GroupParams::new(5, 2, 4, 1).unwrap();
        assert_eq!(g.ord_table, vec![(5, 1), (25, 1)]);
        assert_eq!(g.m_prime, 4);
        assert!(!g.faithful);
    }

    #[test]
    fn minus_one_mod_nine() {
        // powers of 8: mod 3 -> 2, 1; mod 9 -> 8, 1
        let g = GroupParams::new(3, 2, 2, 8).unwrap();
        assert_eq!(g.ord_table, vec![(3, 2), (9, 2)]);
        assert_eq!(centralizer_quotient(&g), 1);
        assert!(g.faithful);
    }

    #[test]
    fn ord_mod_examples() {
        assert_eq!(ord_mod(7, 25), Some(4));
        assert_eq!(ord_mod(1, 25), Some(1));
        // 2, 4, 8, 7, 5, 1
        assert_eq!(ord_mod(2, 9), Some(6));
        assert_eq!(ord_mod(5, 25), None);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(GroupParams::new(4, 2, 3, 1).is_err());
        assert!(GroupParams::new(5, 2, 5, 1).is_err());
        assert!(GroupParams::new(5, 2, 4, 5).is_err());
        // 2^4 = 16 = 16 mod 25
        assert!(GroupParams::new(5, 2, 4, 2).is_err());
        assert!(GroupParams::new(5, 0, 4, 1).is_err());
    }

    #[test]
    fn alpha_normalized() {
        let g = GroupParams::new(5, 2, 4, 32).unwrap();
        assert_eq!(g.alpha, 7);
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(65_521));
        assert!(!is_prime(65_521 * 3));
    }

    #[test]
    fn orbit_of_one_under_seven() {
        let g = GroupParams::new(5, 2, 4, 7).unwrap();
        assert_eq!(g.alpha_orbit(1), vec![1, 7, 24, 18]);
        assert_eq!(g.alpha_orbit(0), vec![0]);
    }

    #[test]
    fn ord_table_properties() {
        for &(p, h, m, a) in &[(5u64, 2u32, 4u64, 7u64), (3, 2, 2, 8), (5, 2, 4, 1), (7, 2, 3, 18)] {
            let g = GroupParams::new(p, h, m, a).unwrap();
            for (i, &(pi, o)) in g.ord_table.iter().enumerate() {
                assert_eq!(pow_mod(g.alpha, o, pi), 1);
                for smaller in 1..o {
                    assert_ne!(pow_mod(g.alpha, smaller, pi), 1);
                }
                for &(_, oj) in &g.ord_table[..i] {
                    assert_eq!(o % oj, 0);
                }
            }
            assert_eq!((p - 1) % g.ord(1).unwrap(), 0);
            assert_eq!(g.m_prime * g.ord(h).unwrap(), m);
        }
    }
}
