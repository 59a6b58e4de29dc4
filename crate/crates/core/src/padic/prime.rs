use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::ExtInt;

/// Exact element of `Q ∩ Q_p`.
///
/// Elements are plain reduced fractions; the prime is carried separately as
/// a [`Prime`] context, and the p-adic valuation is read off the numerator
/// and denominator exactly.
pub type PAdicRational = BigRational;

/// A rational prime `p`, the shared context of every p-adic computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u64) -> Result<Prime> {
        if p < 2 || p > u32::MAX as u64 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Prime(p as u32))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn big(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// `p^k` as an integer.
    pub fn pow(self, k: u32) -> BigInt {
        num_traits::pow(self.big(), k as usize)
    }

    /// `p^e` as a rational, for any sign of `e`.
    pub fn pow_rat(self, e: i64) -> BigRational {
        let m = self.pow(e.unsigned_abs() as u32);
        if e >= 0 {
            BigRational::from_integer(m)
        } else {
            BigRational::new(BigInt::one(), m)
        }
    }

    /// `v_p(n)`, with `v_p(0) = +inf`.
    pub fn valuation_int(self, n: &BigInt) -> ExtInt {
        if n.is_zero() {
            return ExtInt::PosInf;
        }
        let p = self.big();
        let mut m = n.clone();
        let mut v = 0i64;
        loop {
            let (q, r) = m.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            m = q;
            v += 1;
        }
        ExtInt::Finite(v)
    }

    /// Exact p-adic valuation of a rational; `+inf` for zero.
    pub fn valuation(self, x: &BigRational) -> ExtInt {
        if x.is_zero() {
            return ExtInt::PosInf;
        }
        let vn = self.valuation_int(x.numer());
        let vd = self.valuation_int(x.denom());
        vn - vd
    }

    /// Exponent `e` with `|x| = p^e`; `-inf` for zero.
    pub fn norm_exponent(self, x: &BigRational) -> ExtInt {
        -self.valuation(x)
    }

    /// Residue of a p-integral rational modulo `p^k`, in `[0, p^k)`.
    ///
    /// Returns `None` when `x` has negative valuation.
    pub fn residue(self, x: &BigRational, k: u32) -> Option<BigInt> {
        let modulus = self.pow(k);
        if k == 0 {
            return Some(BigInt::zero());
        }
        let den = x.denom();
        let den_inv = mod_inverse(&den.mod_floor(&modulus), &modulus)?;
        Some((x.numer() * den_inv).mod_floor(&modulus))
    }

    /// Canonical representative of `x + p^(-t) Z_p`: the finite base-p
    /// expansion of `x` with every digit of exponent `>= -t` removed.
    pub fn canonical_key(self, x: &BigRational, t: i64) -> BigRational {
        let v = match self.valuation(x) {
            ExtInt::Finite(v) => v,
            _ => return BigRational::zero(),
        };
        let shift = (-v).max(0);
        let digits = shift - t;
        if digits <= 0 {
            return BigRational::zero();
        }
        let scaled = x * self.pow_rat(shift);
        let r = self
            .residue(&scaled, digits as u32)
            .expect("scaled value is p-integral");
        BigRational::new(r, self.pow(shift as u32))
    }

    /// Whether `|x - y| <= p^t`.
    pub fn within(self, x: &BigRational, y: &BigRational, t: i64) -> bool {
        self.valuation(&(x - y)) >= -t
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 4 {
        return n >= 2;
    }
    if n.is_multiple_of(2) {
        return false;
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

/// Inverse of `a` modulo `m`, when it exists.
fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// Formats a rational compactly: `n` or `n/d`.
pub fn fmt_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn valuation_examples() {
        let p7 = Prime::new(7).unwrap();
        assert_eq!(p7.valuation(&q(98, 3)), ExtInt::Finite(2));
        assert_eq!(p7.valuation(&q(0, 1)), ExtInt::PosInf);
        let p3 = Prime::new(3).unwrap();
        assert_eq!(p3.valuation(&q(5, 9)), ExtInt::Finite(-2));
        assert_eq!(p3.norm_exponent(&q(5, 9)), ExtInt::Finite(2));
    }

    #[test]
    fn rejects_composites() {
        assert!(Prime::new(1).is_err());
        assert!(Prime::new(9).is_err());
        assert!(Prime::new(2).is_ok());
        assert!(Prime::new(65537).is_ok());
    }

    #[test]
    fn residues_of_fractions() {
        let p7 = Prime::new(7).unwrap();
        // 1/2 mod 49: 2 * 25 = 50 = 1 mod 49
        assert_eq!(p7.residue(&q(1, 2), 2), Some(BigInt::from(25)));
        assert_eq!(p7.residue(&q(-1, 1), 1), Some(BigInt::from(6)));
        assert_eq!(p7.residue(&q(1, 7), 1), None);
    }

    #[test]
    fn canonical_keys_truncate_expansions() {
        let p3 = Prime::new(3).unwrap();
        assert_eq!(p3.canonical_key(&q(31, 1), -2), q(4, 1));
        assert_eq!(p3.canonical_key(&q(-1, 1), -2), q(8, 1));
        // 1/3 + 2 + 3 at level -1 keeps exponents -1 and 0
        assert_eq!(p3.canonical_key(&q(16, 3), -1), q(7, 3));
        assert_eq!(p3.canonical_key(&q(1, 3), 2), q(0, 1));
        assert_eq!(p3.canonical_key(&q(5, 1), 0), q(0, 1));
    }
}
