//! Complete homogeneous symmetric polynomials, product brackets and the two
//! telescoping identities behind the construction of `Gamma`.
//!
//! All indices are 1-based to match the usual matrix notation: `lambdas[0]`
//! is `lambda_1`, `subdiag[0]` is `a_1`.

use serde::{Deserialize, Serialize};

use crate::algebra::Ring;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// `h_k(values)` by the recurrence `h_k(x_1..x_j) = h_k(x_1..x_{j-1}) + x_j h_{k-1}(x_1..x_j)`.
/// Negative `k` gives zero, `k = 0` gives one.
pub fn complete_homogeneous<R: Ring>(ring: &R, k: i64, values: &[R::Elem]) -> R::Elem {
    if k < 0 {
        return ring.zero();
    }
    let k = k as usize;
    let mut dp = vec![ring.zero(); k + 1];
    dp[0] = ring.one();
    for x in values {
        for j in 1..=k {
            let add = ring.mul(x, &dp[j - 1]);
            dp[j] = ring.add(&dp[j], &add);
        }
    }
    if values.is_empty() && k > 0 {
        return ring.zero();
    }
    dp.swap_remove(k)
}

/// `[z - lambda_x]_i^j = prod_{x=i}^{j} (z - lambda_x)`; one when `i > j`.
pub fn bracket_diff<R: Ring>(ring: &R, z: &R::Elem, lambdas: &[R::Elem], i: usize, j: usize) -> R::Elem {
    let mut acc = ring.one();
    if i > j {
        return acc;
    }
    for x in i..=j {
        acc = ring.mul(&acc, &ring.sub(z, &lambdas[x - 1]));
    }
    acc
}

/// `[a]_i^j = prod_{x=i}^{j} a_x`; one when `i > j`.
pub fn bracket_a<R: Ring>(ring: &R, subdiag: &[R::Elem], i: usize, j: usize) -> R::Elem {
    let mut acc = ring.one();
    if i > j {
        return acc;
    }
    for x in i..=j {
        acc = ring.mul(&acc, &subdiag[x - 1]);
    }
    acc
}

/// `A(i, j) = a_i a_{i+1} ... a_{i+j}`, zero for `j < 0`.
pub fn a_product<R: Ring>(ring: &R, subdiag: &[R::Elem], i: usize, j: i64) -> R::Elem {
    if j < 0 {
        return ring.zero();
    }
    bracket_a(ring, subdiag, i, i + j as usize)
}

/// `L(kappa, j, nu) = h_kappa(lambda_j, ..., lambda_{j+nu})`.
pub fn l_value<R: Ring>(ring: &R, kappa: i64, lambdas: &[R::Elem], j: usize, nu: usize) -> R::Elem {
    complete_homogeneous(ring, kappa, &lambdas[j - 1..j + nu])
}

/// Entry `(i, j)` of `T^alpha` for the lower bidiagonal `T` with diagonal
/// `lambdas` and subdiagonal `subdiag`.
pub fn t_alpha_entry<R: Ring>(
    ring: &R,
    i: usize,
    j: usize,
    alpha: u64,
    lambdas: &[R::Elem],
    subdiag: &[R::Elem],
) -> Result<R::Elem> {
    let d = lambdas.len();
    if subdiag.len() + 1 != d.max(1) {
        return Err(Error::Dimension(format!(
            "{} eigenvalues need {} subdiagonal entries, got {}",
            d,
            d.saturating_sub(1),
            subdiag.len()
        )));
    }
    if i == 0 || j == 0 || i > d || j > d {
        return Err(Error::Index(format!("({i}, {j}) outside 1..={d}")));
    }
    Ok(if i == j {
        ring.pow(&lambdas[i - 1], alpha)
    } else if j > i {
        ring.zero()
    } else {
        let gap = (i - j) as i64;
        let a = a_product(ring, subdiag, j, gap - 1);
        let l = l_value(ring, alpha as i64 - gap, lambdas, j, i - j);
        ring.mul(&a, &l)
    })
}

pub fn t_alpha_matrix<R: Ring>(
    ring: &R,
    alpha: u64,
    lambdas: &[R::Elem],
    subdiag: &[R::Elem],
) -> Result<Matrix<R::Elem>> {
    let d = lambdas.len();
    let mut out = Matrix::zeros(ring, d, d);
    for i in 1..=d {
        for j in 1..=i {
            out.set(i - 1, j - 1, t_alpha_entry(ring, i, j, alpha, lambdas, subdiag)?);
        }
    }
    Ok(out)
}

/// Lower bidiagonal matrix with the given diagonal and subdiagonal.
pub fn bidiagonal<R: Ring>(ring: &R, lambdas: &[R::Elem], subdiag: &[R::Elem]) -> Matrix<R::Elem> {
    let d = lambdas.len();
    let mut t = Matrix::zeros(ring, d, d);
    for i in 0..d {
        t.set(i, i, lambdas[i].clone());
        if i + 1 < d {
            t.set(i + 1, i, subdiag[i].clone());
        }
    }
    t
}

/// `S_n = sum_{y=1}^n prod_{nu=y+1}^n (x_1 - x_nu) prod_{mu=1}^{y-1} (z - x_mu)`
/// against `prod_{nu=2}^n (z - x_nu)`.
pub fn sum_prod_identity_check<R: Ring>(ring: &R, z: &R::Elem, xs: &[R::Elem]) -> Result<bool> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::Dimension("sum-product identity needs at least two values".into()));
    }
    let x1 = &xs[0];
    let mut s = ring.zero();
    for y in 1..=n {
        let left = bracket_diff(ring, x1, xs, y + 1, n);
        let right = bracket_diff(ring, z, xs, 1, y - 1);
        s = ring.add(&s, &ring.mul(&left, &right));
    }
    let expected = bracket_diff(ring, z, xs, 2, n);
    Ok(ring.equal(&s, &expected))
}

/// Multiplied-through form of the window identity
///
/// ```text
/// (la - lb) * sum_{l<=y<=L} [la - lx]_A^{y-1} [lb - lx]_{y+1}^B
///   = [la - lx]_A^{l-1} [lb - lx]_{L+1}^B ([la - lx]_l^L - [lb - lx]_l^L)
/// ```
///
/// It telescopes for any `A <= l <= L <= B`, so the one-term window is accepted.
#[allow(clippy::too_many_arguments)]
pub fn abll_identity_check<R: Ring>(
    ring: &R,
    lam_a: &R::Elem,
    lam_b: &R::Elem,
    big_a: usize,
    l: usize,
    big_l: usize,
    big_b: usize,
    lambdas: &[R::Elem],
) -> Result<bool> {
    if !(1 <= big_a && big_a <= l && l <= big_l && big_l <= big_b && big_b <= lambdas.len()) {
        return Err(Error::Index(format!(
            "need 1 <= A <= l <= L <= B <= {}, got A={big_a} l={l} L={big_l} B={big_b}",
            lambdas.len()
        )));
    }
    let mut lhs = ring.zero();
    for y in l..=big_l {
        let left = bracket_diff(ring, lam_a, lambdas, big_a, y - 1);
        let right = bracket_diff(ring, lam_b, lambdas, y + 1, big_b);
        lhs = ring.add(&lhs, &ring.mul(&left, &right));
    }
    let lhs = ring.mul(&ring.sub(lam_a, lam_b), &lhs);
    let outer = ring.mul(
        &bracket_diff(ring, lam_a, lambdas, big_a, l - 1),
        &bracket_diff(ring, lam_b, lambdas, big_l + 1, big_b),
    );
    let inner = ring.sub(
        &bracket_diff(ring, lam_a, lambdas, l, big_l),
        &bracket_diff(ring, lam_b, lambdas, l, big_l),
    );
    Ok(ring.equal(&lhs, &ring.mul(&outer, &inner)))
}

/// A strictly decreasing sequence `mu = mu_1 > mu_2 > ... > mu_s = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuSequence(pub Vec<usize>);

impl MuSequence {
    /// The interior entries together with the final 1, increasing, as in
    /// the usual listing `(1), (1,2), (1,3), ...`.
    pub fn display_part(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.0[1..].to_vec();
        v.reverse();
        v
    }
}

/// All `2^(mu-2)` sequences, ordered by the bitmask of the interior subset
/// (bit `i` selects the value `i + 2`).
pub fn enumerate_mu_sequences(mu: usize) -> Result<Vec<MuSequence>> {
    if mu < 2 {
        return Err(Error::Index(format!("mu = {mu} must be at least 2")));
    }
    let interior = mu - 2;
    if interior >= usize::BITS as usize - 1 {
        return Err(Error::Index(format!("mu = {mu} is too large to enumerate")));
    }
    Ok((0..1usize << interior)
        .map(|mask| {
            let mut seq = vec![mu];
            for i in (0..interior).rev() {
                if mask >> i & 1 == 1 {
                    seq.push(i + 2);
                }
            }
            seq.push(1);
            MuSequence(seq)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Integers;
    use crate::matrix::mat_pow;

    fn binom(n: i128, k: i128) -> i128 {
        if k < 0 || k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn h_of_ones_is_binomial() {
        let r = Integers;
        for n in 1..6usize {
            for k in 0..7i64 {
                let ones = vec![1i128; n];
                assert_eq!(
                    complete_homogeneous(&r, k, &ones),
                    binom(n as i128 - 1 + k as i128, n as i128 - 1)
                );
            }
        }
        assert_eq!(complete_homogeneous(&r, 0, &[]), 1);
        assert_eq!(complete_homogeneous(&r, 2, &[]), 0);
        assert_eq!(complete_homogeneous(&r, -1, &[3]), 0);
    }

    #[test]
    fn brackets_empty_product() {
        let r = Integers;
        let l = vec![2i128, 3, 5];
        assert_eq!(bracket_diff(&r, &7, &l, 3, 2), 1);
        assert_eq!(bracket_diff(&r, &7, &l, 1, 3), 5 * 4 * 2);
        assert_eq!(bracket_a(&r, &[2, 3], 2, 1), 1);
        assert_eq!(a_product(&r, &[2, 3], 1, -1), 0);
        assert_eq!(a_product(&r, &[2, 3], 1, 1), 6);
    }

    #[test]
    fn t_alpha_agrees_with_power_over_integers() {
        let r = Integers;
        let lambdas = vec![2i128, -1, 3, 1];
        let sub = vec![1i128, 2, -1];
        let t = bidiagonal(&r, &lambdas, &sub);
        for alpha in 1..8u64 {
            let closed = t_alpha_matrix(&r, alpha, &lambdas, &sub).unwrap();
            assert_eq!(closed, mat_pow(&r, &t, alpha));
        }
    }

    #[test]
    fn t_alpha_with_unit_subdiagonal_is_binomial() {
        let r = Integers;
        let d = 5;
        let lambdas = vec![1i128; d];
        let sub = vec![1i128; d - 1];
        for alpha in 1..10u64 {
            for i in 1..=d {
                for j in 1..=i {
                    let v = t_alpha_entry(&r, i, j, alpha, &lambdas, &sub).unwrap();
                    assert_eq!(v, binom(alpha as i128, (i - j) as i128));
                }
            }
        }
    }

    #[test]
    fn t_alpha_rejects_bad_indices() {
        let r = Integers;
        assert!(t_alpha_entry(&r, 0, 1, 2, &[1, 1], &[1]).is_err());
        assert!(t_alpha_entry(&r, 3, 1, 2, &[1, 1], &[1]).is_err());
        assert!(t_alpha_entry(&r, 1, 1, 2, &[1, 1], &[]).is_err());
    }

    #[test]
    fn sum_prod_small_cases() {
        let r = Integers;
        assert!(sum_prod_identity_check(&r, &10, &[3, 7]).unwrap());
        let xs = vec![4i128, -2, 9, 5, 11];
        assert!(sum_prod_identity_check(&r, &17, &xs).unwrap());
        assert!(sum_prod_identity_check(&r, &11, &xs).unwrap());
        assert!(sum_prod_identity_check(&r, &0, &[1]).is_err());
    }

    #[test]
    fn abll_small_cases() {
        let r = Integers;
        let l = vec![3i128, -4, 7, 2, 9, -6];
        for a_ in 1..=6 {
            for l_ in a_..=6 {
                for ll in l_..=6 {
                    for b_ in ll..=6 {
                        assert!(abll_identity_check(&r, &5, &-8, a_, l_, ll, b_, &l).unwrap());
                    }
                }
            }
        }
        assert!(abll_identity_check(&r, &5, &-8, 3, 2, 4, 5, &l).is_err());
    }

    #[test]
    fn mu_sequences_for_five() {
        let seqs = enumerate_mu_sequences(5).unwrap();
        let shown: Vec<Vec<usize>> = seqs.iter().map(MuSequence::display_part).collect();
        assert_eq!(
            shown,
            vec![
                vec![1],
                vec![1, 2],
                vec![1, 3],
                vec![1, 2, 3],
                vec![1, 4],
                vec![1, 2, 4],
                vec![1, 3, 4],
                vec![1, 2, 3, 4]
            ]
        );
        assert_eq!(seqs[3].0, vec![5, 3, 2, 1]);
        assert_eq!(enumerate_mu_sequences(2).unwrap(), vec![MuSequence(vec![2, 1])]);
        assert_eq!(enumerate_mu_sequences(7).unwrap().len(), 32);
        assert!(enumerate_mu_sequences(1).is_err());
    }
}
