use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::padic::{ExtInt, Polynomial, Prime};

/// A rational map `f = P/Q` over `Q_p` in normal form.
///
/// `P` and `Q` are coprime, have integer coefficients with no common integer
/// factor, and `Q` has a positive leading coefficient. The decomposition
/// `f = p^alpha * P1/Q1` has unit leading coefficients in `P1` and `Q1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMap {
    prime: Prime,
    num: Polynomial,
    den: Polynomial,
    alpha: i64,
    num_unit: Polynomial,
    den_unit: Polynomial,
}

/// Builds the normal form of `P_raw / Q_raw`.
pub fn normalize_map(prime: Prime, p_raw: &Polynomial, q_raw: &Polynomial) -> Result<RationalMap> {
    if q_raw.is_zero() {
        return Err(Error::ZeroDenominator { offset: None });
    }
    let g = Polynomial::gcd(p_raw, q_raw);
    let (mut num, _) = p_raw.div_rem(&g);
    let (mut den, _) = q_raw.div_rem(&g);

    // clear denominators, then strip the integer content
    let all = num.coeffs().iter().chain(den.coeffs());
    let lcm = all.clone().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let content = all
        .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
        .fold(BigInt::zero(), |acc, c| acc.gcd(&c));
    let mut factor = BigRational::new(lcm, content);
    if den.leading().is_some_and(|l| l.is_negative()) {
        factor = -factor;
    }
    num = num.scale(&factor);
    den = den.scale(&factor);

    let lead_val = |poly: &Polynomial| -> i64 {
        poly.leading()
            .map(|l| prime.valuation(l).expect_finite("leading coefficient"))
            .unwrap_or(0)
    };
    let vp = lead_val(&num);
    let vq = lead_val(&den);
    let num_unit = num.scale(&prime.pow_rat(-vp));
    let den_unit = den.scale(&prime.pow_rat(-vq));
    let alpha = if num.is_zero() { 0 } else { vp - vq };

    Ok(RationalMap {
        prime,
        num,
        den,
        alpha,
        num_unit,
        den_unit,
    })
}

impl RationalMap {
    pub fn new(prime: Prime, num: &Polynomial, den: &Polynomial) -> Result<Self> {
        normalize_map(prime, num, den)
    }

    /// The polynomial map `F`, i.e. `F / 1`.
    pub fn polynomial(prime: Prime, f: &Polynomial) -> Self {
        normalize_map(prime, f, &Polynomial::from_ints(&[1])).expect("nonzero denominator")
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// Integral numerator `P`.
    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    /// Integral denominator `Q`.
    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn alpha(&self) -> i64 {
        self.alpha
    }

    /// `P1`: the numerator divided by the p-power of its leading coefficient.
    pub fn num_unit(&self) -> &Polynomial {
        &self.num_unit
    }

    pub fn den_unit(&self) -> &Polynomial {
        &self.den_unit
    }

    /// `m = deg P1`.
    pub fn m(&self) -> i64 {
        self.num_unit.degree()
    }

    /// `n = deg Q1`.
    pub fn n(&self) -> i64 {
        self.den_unit.degree()
    }

    /// `f(a)`, or `None` at a pole.
    pub fn eval(&self, a: &BigRational) -> Option<BigRational> {
        let q = self.den.eval(a);
        if q.is_zero() {
            return None;
        }
        Some(self.num.eval(a) / q)
    }

    /// `T1 = P'Q - PQ'`, the numerator of `f'` over `Q^2`.
    pub fn derivative_numerator(&self) -> Polynomial {
        &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative())
    }

    /// `f'(a)`, or `None` at a pole.
    pub fn derivative_at(&self, a: &BigRational) -> Option<BigRational> {
        let q = self.den.eval(a);
        if q.is_zero() {
            return None;
        }
        Some(self.derivative_numerator().eval(a) / (&q * &q))
    }

    /// Norm exponent of `f'(a)`: `|f'(a)| = p^e`.
    pub fn derivative_norm_exponent(&self, a: &BigRational) -> Option<ExtInt> {
        self.derivative_at(a).map(|d| self.prime.norm_exponent(&d))
    }

    /// Conjugate `g(y) = p^k f(p^-k y)`, so that `g` on `p^k X` mirrors `f` on `X`.
    pub fn conjugate_by_power(&self, k: i64) -> RationalMap {
        let p = self.prime;
        let zero = BigRational::zero();
        let num = self
            .num
            .compose_affine(&p.pow_rat(-k), &zero)
            .scale(&p.pow_rat(k));
        let den = self.den.compose_affine(&p.pow_rat(-k), &zero);
        normalize_map(p, &num, &den).expect("conjugation keeps a nonzero denominator")
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == 0 && self.den.coeff(0).is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn normal_forms_of_reference_maps() {
        let f = normalize_map(
            p(7),
            &Polynomial::from_ints(&[-1, 0, 1]),
            &Polynomial::from_ints(&[0, 1]),
        )
        .unwrap();
        assert_eq!((f.alpha(), f.m(), f.n()), (0, 2, 1));

        let g = normalize_map(
            p(3),
            &Polynomial::from_ints(&[1, 0, 2, 1, 1]),
            &Polynomial::from_ints(&[1, -1, 0, 1]),
        )
        .unwrap();
        assert_eq!((g.alpha(), g.m(), g.n()), (0, 4, 3));

        let h = normalize_map(
            p(5),
            &Polynomial::from_ints(&[0, 5]),
            &Polynomial::from_ints(&[1]),
        )
        .unwrap();
        assert_eq!((h.alpha(), h.m(), h.n()), (1, 1, 0));
        assert_eq!(h.num_unit(), &Polynomial::from_ints(&[0, 1]));
    }

    #[test]
    fn common_factors_and_denominators_are_cleared() {
        // (x^2 - 1)/(2x + 2) = (x - 1)/2
        let f = normalize_map(
            p(3),
            &Polynomial::from_ints(&[-1, 0, 1]),
            &Polynomial::from_ints(&[2, 2]),
        )
        .unwrap();
        assert_eq!(f.num(), &Polynomial::from_ints(&[-1, 1]));
        assert_eq!(f.den(), &Polynomial::from_ints(&[2]));

        // (x^2 - 1/27)/x over Q_3 -> (27x^2 - 1)/(27x), alpha 0
        let third = BigRational::new((-1).into(), 27.into());
        let num = Polynomial::new(vec![third, BigRational::zero(), BigRational::one()]);
        let f = normalize_map(p(3), &num, &Polynomial::x()).unwrap();
        assert_eq!(f.num(), &Polynomial::from_ints(&[-1, 0, 27]));
        assert_eq!(f.alpha(), 0);
        assert_eq!(
            f.num_unit().coeff(0),
            BigRational::new((-1).into(), 27.into())
        );
    }

    #[test]
    fn zero_denominator_is_rejected() {
        let err = normalize_map(p(7), &Polynomial::x(), &Polynomial::zero()).unwrap_err();
        assert!(matches!(err, Error::ZeroDenominator { .. }));
    }

    #[test]
    fn derivative_numerator_matches_quotient_rule() {
        let f = normalize_map(
            p(3),
            &Polynomial::from_ints(&[0, 1, 1, 2]),
            &Polynomial::from_ints(&[1, 0, 1]),
        )
        .unwrap();
        assert_eq!(
            f.derivative_numerator(),
            Polynomial::from_ints(&[1, 2, 5, 0, 2])
        );
    }

    #[test]
    fn conjugation_scales_points() {
        let f = normalize_map(
            p(3),
            &Polynomial::from_ints(&[1, 0, 1]),
            &Polynomial::from_ints(&[2, 1]),
        )
        .unwrap();
        let g = f.conjugate_by_power(2);
        let x = BigRational::new(5.into(), 3.into());
        let y = &x * p(3).pow_rat(2);
        let lhs = g.eval(&y).unwrap();
        let rhs = f.eval(&x).unwrap() * p(3).pow_rat(2);
        assert_eq!(lhs, rhs);
    }
}
