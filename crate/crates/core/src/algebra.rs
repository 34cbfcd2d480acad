//! Minimal ring abstraction shared by the residue field, the local ring and
//! the test-only integer rings. Elements are plain values; the context that
//! knows the modulus is passed explicitly.

use std::fmt::Debug;

use crate::matrix::Matrix;

pub trait Ring {
    type Elem: Clone + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, n: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;

    /// For rings with tracked precision this means "indistinguishable from zero".
    fn is_zero(&self, a: &Self::Elem) -> bool;

    /// Exactly zero in a way that lets products be skipped without changing
    /// any result, precision included.
    fn is_exact_zero(&self, a: &Self::Elem) -> bool {
        let _ = a;
        false
    }

    fn equal(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.is_zero(&self.sub(a, b))
    }

    fn pow(&self, a: &Self::Elem, mut n: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
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

    fn mat_mul(&self, a: &Matrix<Self::Elem>, b: &Matrix<Self::Elem>) -> Matrix<Self::Elem>
    where
        Self: Sized,
    {
        crate::matrix::generic_mul(self, a, b)
    }
}

pub trait Field: Ring {
    /// `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
}

/// `Z/nZ` for `n < 2^63`, used by tests and as the scalar ring of `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zmod {
    pub n: u64,
}

impl Zmod {
    pub fn new(n: u64) -> Self {
        assert!((2..(1 << 63)).contains(&n));
        Zmod { n }
    }
}

impl Ring for Zmod {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn from_int(&self, k: i64) -> u64 {
        k.rem_euclid(self.n as i64) as u64
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.n {
            s - self.n
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.n - b
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.n as u128) as u64
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.n - a
        }
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn is_exact_zero(&self, a: &u64) -> bool {
        *a == 0
    }
}

/// Inverts units of `Z/nZ`; only a field when `n` is prime.
impl Field for Zmod {
    fn inv(&self, a: &u64) -> Option<u64> {
        inv_mod(*a, self.n)
    }
}

/// Inverse of `a` modulo `n` by the extended Euclidean algorithm.
pub fn inv_mod(a: u64, n: u64) -> Option<u64> {
    let (mut r0, mut r1) = (n as i128, (a % n) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(n as i128) as u64)
}

/// Arbitrary integers, truncated to `i128`; overflow panics in debug builds.
#[derive(Debug, Clone, Copy, Default)]
pub struct Integers;

impl Ring for Integers {
    type Elem = i128;

    fn zero(&self) -> i128 {
        0
    }
    fn one(&self) -> i128 {
        1
    }
    fn from_int(&self, n: i64) -> i128 {
        n as i128
    }
    fn add(&self, a: &i128, b: &i128) -> i128 {
        a.checked_add(*b).expect("integer overflow")
    }
    fn sub(&self, a: &i128, b: &i128) -> i128 {
        a.checked_sub(*b).expect("integer overflow")
    }
    fn mul(&self, a: &i128, b: &i128) -> i128 {
        a.checked_mul(*b).expect("integer overflow")
    }
    fn neg(&self, a: &i128) -> i128 {
        -a
    }
    fn is_zero(&self, a: &i128) -> bool {
        *a == 0
    }
    fn is_exact_zero(&self, a: &i128) -> bool {
        *a == 0
    }
}

/// Product `prod_{x in xs} f(x)` with the empty-product convention.
pub fn product<R: Ring, I: IntoIterator<Item = R::Elem>>(ring: &R, xs: I) -> R::Elem {
    xs.into_iter().fold(ring.one(), |acc, x| ring.mul(&acc, &x))
}

pub fn sum<R: Ring, I: IntoIterator<Item = R::Elem>>(ring: &R, xs: I) -> R::Elem {
    xs.into_iter().fold(ring.zero(), |acc, x| ring.add(&acc, &x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zmod_basics() {
        let r = Zmod::new(25);
        assert_eq!(r.from_int(-1), 24);
        assert_eq!(r.pow(&7, 4), 1);
        assert_eq!(r.mul(&24, &24), 1);
        assert_eq!(r.sub(&3, &4), 24);
        assert_eq!(r.neg(&0), 0);
        assert_eq!(inv_mod(7, 25), Some(18));
        assert_eq!(inv_mod(5, 25), None);
    }

    #[test]
    fn empty_product_is_one() {
        let r = Integers;
        assert_eq!(product(&r, std::iter::empty()), 1);
        assert_eq!(sum(&r, std::iter::empty()), 0);
        assert_eq!(product(&r, vec![2, 3, 7]), 42);
    }
}
