use num_integer::Integer;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::padic::{ExtInt, Polynomial, Prime};

/// Newton iterations allowed before giving up; quadratic convergence needs
/// far fewer for any realistic precision.
const MAX_NEWTON_STEPS: usize = 256;

/// A root of `F` produced by [`hensel_lift`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HenselResult {
    /// Integer approximation of the root with `|F(root)| <= p^-precision`.
    pub root: BigRational,
    /// `t` with `|root - seed| <= p^t`; `-inf` when the seed is an exact root.
    pub bound_exponent: ExtInt,
    pub precision: u32,
}

/// Lifts `seed` to a root of `F` modulo `p^precision` by Newton iteration.
///
/// Requires integral `F` and `seed` with `|F(seed)| < |F'(seed)|^2`. Each
/// step is reduced modulo a working precision wide enough that truncation
/// never moves the iterate out of the Hensel ball.
pub fn hensel_lift(
    prime: Prime,
    f: &Polynomial,
    seed: &BigRational,
    precision: u32,
) -> Result<HenselResult> {
    if !f.is_integral(prime) || prime.valuation(seed) < 0 {
        return Err(Error::NotIntegral);
    }
    let df = f.derivative();
    let w0 = prime.valuation(&f.eval(seed));
    let e = prime.valuation(&df.eval(seed));
    let passes = match e {
        ExtInt::Finite(e) => w0 > ExtInt::Finite(2 * e),
        _ => false,
    };
    if !passes {
        return Err(Error::HenselPreconditionFailed {
            value_exponent: -w0,
            derivative_exponent: -e,
        });
    }
    let e = e.expect_finite("derivative valuation");
    let bound_exponent = -(w0 - ExtInt::Finite(e));
    if w0 >= precision as i64 {
        return Ok(HenselResult {
            root: seed.clone(),
            bound_exponent,
            precision,
        });
    }

    let working = precision as i64 + 2 * e + 1;
    let modulus = prime.pow(working as u32);
    let reduce = |x: &BigRational| -> BigRational {
        let r = prime
            .residue(x, working as u32)
            .expect("Newton iterates stay p-integral");
        BigRational::from_integer(r.mod_floor(&modulus))
    };

    let mut a = reduce(seed);
    for _ in 0..MAX_NEWTON_STEPS {
        let fa = f.eval(&a);
        if prime.valuation(&fa) >= precision as i64 {
            return Ok(HenselResult {
                root: a,
                bound_exponent,
                precision,
            });
        }
        let step = fa / df.eval(&a);
        a = reduce(&(&a - step));
    }
    unreachable!("Newton iteration failed to converge inside the Hensel ball")
}

/// Largest level `t` such that `|F|` is constant on `B_{p^t}(center)`, certified
/// through the Taylor coefficients `g_i` of `F` at `center`:
/// `v(g_0) < v(g_i) - i*t` for all `i >= 1`.
///
/// Returns `+inf` for a nonzero constant and `-inf` when `F(center) = 0`.
pub fn norm_constant_exponent(prime: Prime, f: &Polynomial, center: &BigRational) -> ExtInt {
    let g = f.taylor_shift(center);
    let v0 = match g.coeffs().first().map(|c| prime.valuation(c)) {
        Some(ExtInt::Finite(v)) => v,
        _ => return ExtInt::NegInf,
    };
    let mut best = ExtInt::PosInf;
    for (i, c) in g.coeffs().iter().enumerate().skip(1) {
        if let ExtInt::Finite(vi) = prime.valuation(c) {
            let i = i as i64;
            let t = Integer::div_ceil(&(vi - v0), &i) - 1;
            best = best.min(ExtInt::Finite(t));
        }
    }
    best
}

/// Upper bound on the norm exponent of `F(center + u)` over `|u| <= p^t`:
/// `max_i (|g_i| p^{i t})` from the Taylor coefficients at `center`.
pub fn norm_upper_bound(prime: Prime, taylor: &Polynomial, t: i64) -> ExtInt {
    taylor
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| prime.norm_exponent(c) + t * i as i64)
        .max()
        .unwrap_or(ExtInt::NegInf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn lifts_sqrt_two_mod_49() {
        // brute force: the square roots of 2 mod 49 are 10 and 39; 10 = 3 mod 7
        let roots: Vec<i64> = (0..49).filter(|x| (x * x - 2) % 49 == 0).collect();
        assert_eq!(roots, vec![10, 39]);
        let f = Polynomial::from_ints(&[-2, 0, 1]);
        let r = hensel_lift(p(7), &f, &q(3), 2).unwrap();
        let res = p(7).residue(&r.root, 2).unwrap();
        assert_eq!(res, BigInt::from(10));
        assert_eq!(r.bound_exponent, ExtInt::Finite(-1));
    }

    #[test]
    fn linear_polynomial_is_exact() {
        let f = Polynomial::from_ints(&[-5, 1]);
        let r = hensel_lift(p(7), &f, &q(5), 10).unwrap();
        assert_eq!(r.root, q(5));
        assert_eq!(r.bound_exponent, ExtInt::NegInf);
    }

    #[test]
    fn precondition_failure_reports_norms() {
        // x^2 - 3 at 1: |F(1)| = |-2| = 1 = |F'(1)|^2
        let f = Polynomial::from_ints(&[-3, 0, 1]);
        let err = hensel_lift(p(7), &f, &q(1), 4).unwrap_err();
        match err {
            Error::HenselPreconditionFailed {
                value_exponent,
                derivative_exponent,
            } => {
                assert_eq!(value_exponent, ExtInt::Finite(0));
                assert_eq!(derivative_exponent, ExtInt::Finite(0));
            }
            other => panic!("unexpected {other:?}"),
        }
        // every residue seed mod 7 for x^2 - 3 fails: 3 is not a square mod 7
        for s in 0..7 {
            assert!(hensel_lift(p(7), &f, &q(s), 4).is_err());
        }
    }

    #[test]
    fn non_integral_inputs_are_rejected() {
        let f = Polynomial::new(vec![BigRational::new(1.into(), 7.into()), q(1)]);
        assert!(matches!(
            hensel_lift(p(7), &f, &q(0), 3),
            Err(Error::NotIntegral)
        ));
    }

    #[test]
    fn norm_constant_examples() {
        let f = Polynomial::from_ints(&[1, 0, 1]);
        assert_eq!(norm_constant_exponent(p(7), &f, &q(2)), ExtInt::Finite(-1));
        // oracle: v(F) = 0 on every residue of B_{7^-1}(2) mod 49
        for j in 0..7 {
            let x = 2 + 7 * j;
            assert_ne!((x * x + 1) % 7, 0);
        }
        assert_eq!(
            norm_constant_exponent(p(5), &Polynomial::from_ints(&[4]), &q(1)),
            ExtInt::PosInf
        );
        assert_eq!(
            norm_constant_exponent(p(3), &Polynomial::x(), &q(0)),
            ExtInt::NegInf
        );
    }
}
