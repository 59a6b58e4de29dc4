use num_integer::Integer;
use num_rational::BigRational;

use crate::digraph::SubsidiaryEdgeData;
use crate::padic::{ExtInt, Polynomial, Prime, RationalMap};

/// Least `s >= 0` such that `P(p^s x + a) - (p^s y + b) Q(p^s x + a)` has
/// p-integral coefficients, or `None` if its constant term `P(a) - b Q(a)`
/// is not integral (no `s` helps then).
///
/// Read off the `s = 0` expansion: the coefficient of a monomial of total
/// degree `d` is multiplied by `p^(s d)`, so each needs `s d >= -v(c)`.
pub fn s_exponent(
    prime: Prime,
    num: &Polynomial,
    den: &Polynomial,
    a: &BigRational,
    b: &BigRational,
) -> Option<i64> {
    let pa = num.taylor_shift(a);
    let qa = den.taylor_shift(a);
    if prime.valuation(&(pa.coeff(0) - b * qa.coeff(0))) < 0 {
        return None;
    }
    let need = |c: BigRational, degree: i64| -> i64 {
        match prime.valuation(&c) {
            ExtInt::Finite(v) if v < 0 => Integer::div_ceil(&-v, &degree),
            _ => 0,
        }
    };
    let deg = pa.degree().max(qa.degree()).max(0) as usize;
    let mut s = 0;
    for i in 0..=deg {
        if i >= 1 {
            s = s.max(need(pa.coeff(i) - b * qa.coeff(i), i as i64));
        }
        s = s.max(need(-qa.coeff(i), i as i64 + 1));
    }
    Some(s)
}

/// The subsidiary test for the edge from the ball with representative `a`
/// to the ball with representative `b`, at level `t` below the scaling
/// level `l`. `map` must have integral `P`, `Q` and `f'(a) != 0`.
///
/// The second bound is compared non-strictly (`p^t <= p^l |f'(a)|`), which
/// is what makes `G*` agree with `G` at the scaling level for isometries;
/// the other three are strict.
pub fn edge_data(
    map: &RationalMap,
    a: &BigRational,
    b: &BigRational,
    t: i64,
    l: i64,
) -> Option<SubsidiaryEdgeData> {
    let p = map.prime();
    let s = s_exponent(p, map.num(), map.den(), a, b)?;
    let q = map.den().eval(a);
    let dq = map.den().derivative().eval(a);
    let vq = p.valuation(&q).expect_finite("Q root-free");
    let e = map
        .derivative_norm_exponent(a)
        .expect("Q root-free")
        .expect_finite("f' root-free");
    let third = match p.valuation(&dq) {
        ExtInt::Finite(vdq) => ExtInt::Finite(-vq + e + vdq),
        _ => ExtInt::PosInf,
    };
    let bounds = [
        ExtInt::Finite(-s),
        ExtInt::Finite(l + e),
        third,
        ExtInt::Finite(-2 * s - vq + 2 * e),
    ];
    let passes = bounds[0] > t && bounds[1] >= t && bounds[2] > t && bounds[3] > t;
    Some(SubsidiaryEdgeData {
        s_exponent: s,
        bound_exponents: bounds,
        passes,
    })
}
