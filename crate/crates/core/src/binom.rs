//! Binomial coefficients modulo a prime.
//!
//! Everything here rests on Lucas' theorem: writing `n` and `k` in base `p`,
//! `C(n, k) ≡ Π C(n_i, k_i) (mod p)`, and the product vanishes exactly when some
//! digit of `k` exceeds the matching digit of `n`. The difference operator in
//! [`crate::polyfun`] expands `(x + a)^n` through [`LucasTable::support`], which
//! only ever visits the non-vanishing terms.

use thiserror::Error;

use crate::field::is_prime;

/// Default ceiling for [`nonzero_support`].
pub const DEFAULT_SUPPORT_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BinomError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("n = {n} exceeds the support bound {bound}")]
    BoundExceeded { n: u64, bound: u64 },
}

/// Base-`p` expansion of a non-negative integer, least significant digit first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasePDigits {
    pub value: u64,
    pub p: u64,
    pub digits: Vec<u64>,
}

impl BasePDigits {
    pub fn new(value: u64, p: u64) -> Self {
        assert!(p >= 2, "base must be at least 2");
        let mut digits = Vec::new();
        let mut rest = value;
        while rest > 0 {
            digits.push(rest % p);
            rest /= p;
        }
        BasePDigits { value, p, digits }
    }

    /// Digit at position `i`, zero beyond the most significant digit.
    pub fn digit(&self, i: usize) -> u64 {
        self.digits.get(i).copied().unwrap_or(0)
    }

    /// `true` iff every digit of `other` is at most the matching digit of `self`.
    pub fn dominates(&self, other: &BasePDigits) -> bool {
        debug_assert_eq!(self.p, other.p);
        (0..self.digits.len().max(other.digits.len())).all(|i| other.digit(i) <= self.digit(i))
    }
}

/// Factorial tables mod `p` giving O(1) small binomials `C(a, b)` for `a, b < p`.
#[derive(Debug, Clone)]
pub struct LucasTable {
    p: u64,
    fact: Vec<u64>,
    inv_fact: Vec<u64>,
}

impl LucasTable {
    pub fn new(p: u64) -> Result<Self, BinomError> {
        if !is_prime(p) {
            return Err(BinomError::NotPrime(p));
        }
        let n = p as usize;
        let mut fact = vec![1u64; n];
        for i in 1..n {
            fact[i] = fact[i - 1] * i as u64 % p;
        }
        let mut inv_fact = vec![1u64; n];
        inv_fact[n - 1] = pow_mod(fact[n - 1], p - 2, p);
        for i in (1..n).rev() {
            inv_fact[i - 1] = inv_fact[i] * i as u64 % p;
        }
        Ok(LucasTable { p, fact, inv_fact })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `C(a, b) mod p` for single digits.
    #[inline]
    fn small(&self, a: u64, b: u64) -> u64 {
        if b > a {
            return 0;
        }
        let (a, b) = (a as usize, b as usize);
        self.fact[a] * self.inv_fact[b] % self.p * self.inv_fact[a - b] % self.p
    }

    /// `C(n, k) mod p`; zero when `k > n`.
    pub fn binom(&self, n: u64, k: u64) -> u64 {
        if k > n {
            return 0;
        }
        let (mut n, mut k) = (n, k);
        let mut acc = 1u64;
        while k > 0 {
            let (ni, ki) = (n % self.p, k % self.p);
            if ki > ni {
                return 0;
            }
            acc = acc * self.small(ni, ki) % self.p;
            n /= self.p;
            k /= self.p;
        }
        acc
    }

    /// Every `k` in `[0, n]` with `C(n, k) ≢ 0 (mod p)`, in increasing order,
    /// paired with the residue.
    ///
    /// Enumerates the digit-dominated `k` directly, so the cost is the size of
    /// the support rather than `n`.
    pub fn support(&self, n: u64) -> Vec<(u64, u64)> {
        let nd = BasePDigits::new(n, self.p);
        let width = nd.digits.len();
        let mut place = Vec::with_capacity(width);
        let mut pw = 1u64;
        for _ in 0..width {
            place.push(pw);
            pw = pw.saturating_mul(self.p);
        }
        let mut out = Vec::new();
        let mut kd = vec![0u64; width];
        loop {
            let k: u64 = kd.iter().zip(&place).map(|(d, w)| d * w).sum();
            let residue = kd
                .iter()
                .zip(&nd.digits)
                .fold(1u64, |acc, (&ki, &ni)| acc * self.small(ni, ki) % self.p);
            out.push((k, residue));
            // mixed-radix increment, digit i ranges over [0, n_i]
            let mut i = 0;
            loop {
                if i == width {
                    return out;
                }
                if kd[i] < nd.digits[i] {
                    kd[i] += 1;
                    break;
                }
                kd[i] = 0;
                i += 1;
            }
        }
    }

    /// Per-digit breakdown of a Lucas evaluation.
    pub fn explain(&self, n: u64, k: u64) -> LucasBreakdown {
        let nd = BasePDigits::new(n, self.p);
        let kd = BasePDigits::new(k, self.p);
        let width = nd.digits.len().max(kd.digits.len());
        let factors = (0..width)
            .map(|i| DigitFactor {
                position: i,
                n_digit: nd.digit(i),
                k_digit: kd.digit(i),
                value: self.small(nd.digit(i), kd.digit(i)),
            })
            .collect();
        LucasBreakdown {
            n,
            k,
            p: self.p,
            dominated: nd.dominates(&kd),
            factors,
            residue: self.binom(n, k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct DigitFactor {
    pub position: usize,
    pub n_digit: u64,
    pub k_digit: u64,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct LucasBreakdown {
    pub n: u64,
    pub k: u64,
    pub p: u64,
    pub dominated: bool,
    pub factors: Vec<DigitFactor>,
    pub residue: u64,
}

/// `C(n, k) mod p` for prime `p`.
///
/// Panics if `p` is not prime.
pub fn binom_mod_p(n: u64, k: u64, p: u64) -> u64 {
    LucasTable::new(p)
        .unwrap_or_else(|e| panic!("binom_mod_p: {e}"))
        .binom(n, k)
}

/// The set `{k : C(n, k) ≢ 0 (mod p)}` in increasing order, with `n` capped
/// at [`DEFAULT_SUPPORT_BOUND`].
pub fn nonzero_support(n: u64, p: u64) -> Result<Vec<u64>, BinomError> {
    nonzero_support_bounded(n, p, DEFAULT_SUPPORT_BOUND)
}

pub fn nonzero_support_bounded(n: u64, p: u64, bound: u64) -> Result<Vec<u64>, BinomError> {
    if n > bound {
        return Err(BinomError::BoundExceeded { n, bound });
    }
    let table = LucasTable::new(p)?;
    Ok(table.support(n).into_iter().map(|(k, _)| k).collect())
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        assert_eq!(binom_mod_p(6, 2, 5), 0);
        assert_eq!(binom_mod_p(6, 1, 5), 1);
        assert_eq!(binom_mod_p(25, 7, 5), 0);
        assert_eq!(binom_mod_p(10, 3, 7), 120 % 7);
        assert_eq!(binom_mod_p(3, 5, 5), 0);
    }

    #[test]
    fn zero_conventions() {
        let t = LucasTable::new(7).unwrap();
        assert_eq!(t.binom(0, 0), 1);
        for n in 0..100 {
            assert_eq!(t.binom(n, 0), 1);
            assert_eq!(t.binom(n, n), 1);
        }
    }

    #[test]
    fn support_of_prime_power_shapes() {
        assert_eq!(nonzero_support(25, 5).unwrap(), vec![0, 25]);
        assert_eq!(nonzero_support(26, 5).unwrap(), vec![0, 1, 25, 26]);
        assert_eq!(nonzero_support(27, 5).unwrap(), vec![0, 1, 2, 25, 26, 27]);
        assert_eq!(nonzero_support(0, 3).unwrap(), vec![0]);
    }

    #[test]
    fn support_bound_and_prime_checks() {
        assert_eq!(
            nonzero_support(1_000_001, 5),
            Err(BinomError::BoundExceeded {
                n: 1_000_001,
                bound: 1_000_000
            })
        );
        assert_eq!(nonzero_support(10, 4), Err(BinomError::NotPrime(4)));
    }

    #[test]
    fn support_matches_lucas_filter() {
        let t = LucasTable::new(3).unwrap();
        for n in 0..300 {
            let brute: Vec<(u64, u64)> = (0..=n)
                .map(|k| (k, t.binom(n, k)))
                .filter(|&(_, v)| v != 0)
                .collect();
            assert_eq!(t.support(n), brute, "n = {n}");
        }
    }

    #[test]
    fn explain_reports_domination() {
        let t = LucasTable::new(5).unwrap();
        let b = t.explain(6, 2);
        assert!(!b.dominated);
        assert_eq!(b.residue, 0);
        assert_eq!(b.factors.len(), 2);
        let b = t.explain(25, 25);
        assert!(b.dominated);
        assert_eq!(b.residue, 1);
    }

    #[test]
    fn digits_round_trip() {
        for v in [0u64, 1, 4, 5, 124, 125, 9999] {
            let d = BasePDigits::new(v, 5);
            let back: u64 = d.digits.iter().rev().fold(0, |acc, &x| acc * 5 + x);
            assert_eq!(back, v);
            assert!(d.digits.iter().all(|&x| x < 5));
        }
    }
}
