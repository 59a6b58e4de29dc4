use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::padic::{fmt_rational, ExtInt, Prime};

/// Univariate polynomial with exact rational coefficients, lowest degree first.
///
/// The coefficient vector never carries trailing zeros, so the zero
/// polynomial is the empty vector and has degree `-1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Polynomial::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Polynomial::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Polynomial::from_ints(&[0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Horner evaluation.
    pub fn eval(&self, a: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * a + c;
        }
        acc
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// `G(x) = F(x + a)`, via repeated synthetic division.
    pub fn taylor_shift(&self, a: &BigRational) -> Polynomial {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = &c[j + 1] * a;
                c[j] += t;
            }
        }
        Polynomial::new(c)
    }

    /// `F(scale * x + shift)`.
    pub fn compose_affine(&self, scale: &BigRational, shift: &BigRational) -> Polynomial {
        let shifted = self.taylor_shift(shift);
        let mut factor = BigRational::one();
        let mut out = Vec::with_capacity(shifted.coeffs.len());
        for c in shifted.coeffs {
            out.push(c * &factor);
            factor *= scale;
        }
        Polynomial::new(out)
    }

    /// Euclidean division over `Q`. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Polynomial) -> (Polynomial, Polynomial) {
        let lead = divisor.leading().expect("division by the zero polynomial");
        let dd = divisor.degree();
        let mut rem = self.coeffs.clone();
        if self.degree() < dd {
            return (Polynomial::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); (self.degree() - dd + 1) as usize];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd as usize] / lead;
            if !c.is_zero() {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    let t = &c * d;
                    rem[k + j] -= t;
                }
            }
            quot[k] = c;
        }
        (Polynomial::new(quot), Polynomial::new(rem))
    }

    /// Monic copy; the zero polynomial stays zero.
    pub fn monic(&self) -> Polynomial {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => Polynomial::zero(),
        }
    }

    /// Monic greatest common divisor over `Q`.
    pub fn gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r.monic();
        }
        x.monic()
    }

    /// Minimum coefficient valuation (`+inf` for the zero polynomial).
    pub fn min_valuation(&self, p: Prime) -> ExtInt {
        self.coeffs
            .iter()
            .map(|c| p.valuation(c))
            .min()
            .unwrap_or(ExtInt::PosInf)
    }

    pub fn is_integral(&self, p: Prime) -> bool {
        self.min_valuation(p) >= 0
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let show_coeff = i == 0 || !abs.is_one();
            if show_coeff {
                let s = fmt_rational(&abs);
                if i > 0 && !abs.denom().is_one() {
                    write!(f, "({s})")?;
                } else {
                    f.write_str(&s)?;
                }
            }
            match i {
                0 => {}
                1 => f.write_str("x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn evaluation_and_derivative() {
        let f = Polynomial::from_ints(&[-1, 0, 1]);
        assert_eq!(f.eval(&q(2)), q(3));
        let g = Polynomial::from_ints(&[0, 1, 1, 2]);
        assert_eq!(g.derivative(), Polynomial::from_ints(&[1, 2, 6]));
        assert_eq!(Polynomial::zero().degree(), -1);
        assert_eq!(Polynomial::zero().derivative(), Polynomial::zero());
    }

    #[test]
    fn taylor_shift_is_binomial() {
        let sq = Polynomial::from_ints(&[0, 0, 1]);
        assert_eq!(sq.taylor_shift(&q(1)), Polynomial::from_ints(&[1, 2, 1]));
        let cube = Polynomial::from_ints(&[0, 0, 0, 1]);
        assert_eq!(
            cube.taylor_shift(&q(-2)),
            Polynomial::from_ints(&[-8, 12, -6, 1])
        );
    }

    #[test]
    fn compose_affine_matches_evaluation() {
        let f = Polynomial::from_ints(&[3, -1, 0, 2]);
        let s = BigRational::new(1.into(), 3.into());
        let g = f.compose_affine(&q(9), &s);
        for x in -3..4 {
            assert_eq!(g.eval(&q(x)), f.eval(&(q(9) * q(x) + &s)));
        }
    }

    #[test]
    fn gcd_and_division() {
        let a = &Polynomial::from_ints(&[-1, 0, 1]) * &Polynomial::from_ints(&[2, 1]);
        let b = &Polynomial::from_ints(&[1, 1]) * &Polynomial::from_ints(&[5, 0, 1]);
        assert_eq!(Polynomial::gcd(&a, &b), Polynomial::from_ints(&[1, 1]));
        let (quo, rem) = a.div_rem(&Polynomial::from_ints(&[1, 1]));
        assert!(rem.is_zero());
        assert_eq!(quo, Polynomial::from_ints(&[-2, 1, 1]));
        let coprime = Polynomial::gcd(&Polynomial::from_ints(&[-1, 0, 1]), &Polynomial::x());
        assert_eq!(coprime, Polynomial::from_ints(&[1]));
    }

    #[test]
    fn display() {
        let f = Polynomial::from_ints(&[1, -1, 0, 1]);
        assert_eq!(f.to_string(), "x^3 - x + 1");
        assert_eq!(Polynomial::from_ints(&[0, -2]).to_string(), "-2x");
    }
}
