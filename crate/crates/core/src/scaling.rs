//! Local scaling: lower bounds `b(F)` for root-free polynomials, the uniform
//! scaling radius `r = p^l`, and the per-ball scalars `|f'(a)|`.
//!
//! Every routine works on a domain inside `Z_p`. A domain reaching outside
//! is first moved inside by the conjugation `y = p^k x`, which preserves the
//! ratios `|f(x) - f(y)| / |x - y|` and shifts every level by `k`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::domain::{Ball, CompactDomain, DEFAULT_BALL_CAP};
use crate::error::{Error, Result};
use crate::padic::{
    norm_constant_exponent, norm_upper_bound, ExtInt, Polynomial, Prime, RationalMap,
};

/// Limits shared by the descending searches of the analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnalysisOptions {
    /// Levels a descent may go below its starting level.
    pub depth_cap: u32,
    /// Extra levels checked below a candidate intrinsic level.
    pub margin: u32,
    /// Largest number of balls a single level may hold.
    pub ball_cap: usize,
    /// Levels scanned by the level-by-level checks that have no finite
    /// certificate.
    pub scan_depth: u32,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            depth_cap: 32,
            margin: 2,
            ball_cap: DEFAULT_BALL_CAP,
            scan_depth: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// `|f'| = 1` throughout.
    LocallyIsometric,
    /// `|f'| <= 1` throughout.
    Locally1Lipschitz,
    /// `f'` root-free with `max |f'| = p^bound_exponent > 1`.
    BoundedScaling { bound_exponent: i64 },
    /// `f'` has a root in the domain and `max |f'| = p^rho_exponent > 1`.
    LocallyRhoLipschitz { rho_exponent: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingReport {
    /// `l` with `r = p^l`; `None` when `f'` is not certified root-free.
    pub radius_exponent: Option<i64>,
    /// Exponent of `b(Q)`, measured in the integral frame.
    pub b_q_exponent: i64,
    /// Exponent of `b(T1)`, measured in the integral frame.
    pub b_t1_exponent: Option<i64>,
    pub classification: Classification,
    pub derivative_root_free: bool,
    /// Exponent of `|f'|` on each ball where it is certified constant. When
    /// `f'` is root-free these are exactly the level-`l` balls.
    pub scalar_profile: BTreeMap<Ball, i64>,
    /// Exponent of `max |f'|` over the domain (`-inf` for a constant map).
    pub max_scalar_exponent: ExtInt,
    /// Why `f'` could not be certified root-free, when it could not.
    pub derivative_obstruction: Option<Error>,
    /// `k >= 0` with the domain inside `B_{p^k}(0)`; levels in the integral
    /// frame are shifted down by `k`.
    pub frame_shift: i64,
}

impl ScalingReport {
    pub fn is_isometric(&self) -> bool {
        self.classification == Classification::LocallyIsometric
    }

    pub fn is_1_lipschitz(&self) -> bool {
        self.max_scalar_exponent <= 0
    }
}

/// `f` and `X` moved into `Z_p` by `y = p^k x`.
struct Frame {
    shift: i64,
    map: RationalMap,
    domain: CompactDomain,
}

impl Frame {
    fn new(f: &RationalMap, x: &CompactDomain) -> Result<Frame> {
        if x.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let shift = x.integral_frame_shift();
        Ok(Frame {
            shift,
            map: if shift == 0 {
                f.clone()
            } else {
                f.conjugate_by_power(shift)
            },
            domain: x.scaled(shift),
        })
    }

    fn unscale(&self, b: &Ball) -> Ball {
        b.scaled(self.map.prime(), -self.shift)
    }

    fn unscale_error(&self, e: Error) -> Error {
        match e {
            Error::RootCertified { ball } => Error::RootCertified {
                ball: self.unscale(&ball),
            },
            Error::DepthCapExceeded { level, suspect } => Error::DepthCapExceeded {
                level: level + self.shift,
                suspect: suspect.map(|b| self.unscale(&b)),
            },
            other => other,
        }
    }
}

/// Exponent `e` with `|F(x)| >= p^e` on `X`, by the descending residue test.
///
/// Starting at level `min(s, -1)` for the base level `s` of `X`, the balls
/// where `F(a) = 0 mod p^-t` are refined until none is left; the bound is
/// then `p^(t+1)`. Domains outside `Z_p` are rescaled first and the
/// exponent translated back.
pub fn lower_bound_bf(f: &Polynomial, x: &CompactDomain, opts: &AnalysisOptions) -> Result<i64> {
    if x.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let p = x.prime();
    let k = x.integral_frame_shift();
    let y = x.scaled(k);
    let moved = f.compose_affine(&p.pow_rat(-k), &BigRational::zero());
    if moved.is_zero() {
        return Err(Error::RootCertified {
            ball: x.balls()[0].clone(),
        });
    }
    match integral_bound(p, &moved, &y, opts) {
        Ok(b) => Ok(b),
        Err(e) => Err(match e {
            Error::RootCertified { ball } => Error::RootCertified {
                ball: ball.scaled(p, -k),
            },
            Error::DepthCapExceeded { level, suspect } => Error::DepthCapExceeded {
                level: level + k,
                suspect: suspect.map(|b| b.scaled(p, -k)),
            },
            other => other,
        }),
    }
}

/// `F / gcd(F, F')` scaled to content 1: same roots as `F`, all simple, so
/// Hensel's test eventually certifies each of them.
fn squarefree_part(p: Prime, f: &Polynomial) -> Polynomial {
    let g = Polynomial::gcd(f, &f.derivative());
    let sq = if g.degree() > 0 {
        f.div_rem(&g).0
    } else {
        f.clone()
    };
    match sq.min_valuation(p) {
        ExtInt::Finite(v) => sq.scale(&p.pow_rat(-v)),
        _ => sq,
    }
}

/// The descent for nonzero `F` on `X ⊆ Z_p`. Only failing balls are refined;
/// a passing ball passes at every finer level too.
///
/// With `F = p^k F0` and `F0` primitive, the test `v(F(a)) >= -t` is
/// `v(F0(a)) >= -s` at the threshold level `s = t + k`. The test at `s` is
/// exact on any partition at level `<= s`, so balls are split only once `s`
/// reaches the domain's own level and a large content costs no extra balls.
fn integral_bound(
    p: Prime,
    f: &Polynomial,
    x: &CompactDomain,
    opts: &AnalysisOptions,
) -> Result<i64> {
    let k = f.min_valuation(p).expect_finite("nonzero F");
    let f0 = f.scale(&p.pow_rat(-k));
    let sq = squarefree_part(p, &f0);
    let dsq = sq.derivative();
    let start = x.base_level().min(-1);
    // thresholds s >= 0 fail everywhere since F0 is integral
    let mut s = (start + k).min(-1);
    let mut level = start.min(s);
    let mut pending = x.decompose_capped(level, opts.ball_cap)?;
    loop {
        let mut failing = Vec::new();
        for b in pending {
            let a = b.key();
            let w = p.valuation(&f0.eval(a));
            if w < -s {
                continue;
            }
            let root_ball = match (p.valuation(&sq.eval(a)), p.valuation(&dsq.eval(a))) {
                (ExtInt::PosInf, _) => Some(b.clone()),
                (ExtInt::Finite(w), ExtInt::Finite(e)) if w > 2 * e => {
                    Some(Ball::new(p, a, e - w)).filter(|r| x.contains_ball(r))
                }
                _ => None,
            };
            if let Some(ball) = root_ball {
                return Err(Error::RootCertified { ball });
            }
            failing.push(b);
        }
        if failing.is_empty() {
            return Ok(s - k + 1);
        }
        if start - level >= opts.depth_cap as i64 {
            return Err(Error::DepthCapExceeded {
                level: s - k,
                suspect: failing.into_iter().next(),
            });
        }
        s -= 1;
        if s < level {
            if failing.len().saturating_mul(p.get() as usize) > opts.ball_cap {
                return Err(Error::TooManyBalls {
                    count: (failing.len() as u64 * p.get() as u64).to_string(),
                    cap: opts.ball_cap,
                });
            }
            pending = failing.iter().flat_map(|b| b.children(p)).collect();
            level = s;
        } else {
            pending = failing;
        }
    }
}

/// Full scaling analysis: `b(Q)`, `b(T1)`, the radius and the scalar profile.
///
/// Fails only when `Q` has a root in `X` or the searches hit their caps; a
/// root of `f'` is recorded in the report instead.
pub fn analyze(
    f: &RationalMap,
    x: &CompactDomain,
    opts: &AnalysisOptions,
) -> Result<ScalingReport> {
    let frame = Frame::new(f, x)?;
    let p = f.prime();
    let g = &frame.map;
    let y = &frame.domain;

    let b_q = integral_bound(p, g.den(), y, opts).map_err(|e| match frame.unscale_error(e) {
        Error::RootCertified { ball } => Error::PoleInDomain { ball },
        other => other,
    })?;

    let t1 = g.derivative_numerator();
    let b_t1 = if t1.is_zero() {
        Err(Error::DerivativeRootInDomain { ball: None })
    } else {
        integral_bound(p, &t1, y, opts).map_err(|e| match frame.unscale_error(e) {
            Error::RootCertified { ball } => Error::DerivativeRootInDomain { ball: Some(ball) },
            other => other,
        })
    };

    let scalar = |a: &BigRational| -> ExtInt {
        let q = g.den().eval(a);
        p.norm_exponent(&t1.eval(a)) + 2 * p.valuation(&q).expect_finite("Q root-free")
    };

    match b_t1 {
        Ok(b_t1) => {
            let l = b_q.min(b_t1) - 1;
            let mut profile = BTreeMap::new();
            for ball in y.decompose_capped(l, opts.ball_cap)? {
                let e = scalar(ball.key()).expect_finite("T1 root-free");
                profile.insert(frame.unscale(&ball), e);
            }
            let max = profile.values().copied().max().expect("nonempty domain");
            let classification = if profile.values().all(|&e| e == 0) {
                Classification::LocallyIsometric
            } else if max <= 0 {
                Classification::Locally1Lipschitz
            } else {
                Classification::BoundedScaling {
                    bound_exponent: max,
                }
            };
            Ok(ScalingReport {
                radius_exponent: Some(l + frame.shift),
                b_q_exponent: b_q,
                b_t1_exponent: Some(b_t1),
                classification,
                derivative_root_free: true,
                scalar_profile: profile,
                max_scalar_exponent: ExtInt::Finite(max),
                derivative_obstruction: None,
                frame_shift: frame.shift,
            })
        }
        Err(obstruction) => {
            let (max, profile) = if t1.is_zero() {
                (ExtInt::NegInf, BTreeMap::new())
            } else {
                max_scalar(&frame, &t1, b_q - 1, opts)?
            };
            let classification = match max {
                ExtInt::Finite(e) if e > 0 => {
                    Classification::LocallyRhoLipschitz { rho_exponent: e }
                }
                _ => Classification::Locally1Lipschitz,
            };
            Ok(ScalingReport {
                radius_exponent: None,
                b_q_exponent: b_q,
                b_t1_exponent: None,
                classification,
                derivative_root_free: false,
                scalar_profile: profile,
                max_scalar_exponent: max,
                derivative_obstruction: Some(obstruction),
                frame_shift: frame.shift,
            })
        }
    }
}

/// Branch and bound for `max |f'|` when `T1` may vanish: balls whose Taylor
/// upper bound cannot beat the best exact value are dropped, balls with
/// certified constant `|T1|` are settled, the rest are split.
fn max_scalar(
    frame: &Frame,
    t1: &Polynomial,
    q_level: i64,
    opts: &AnalysisOptions,
) -> Result<(ExtInt, BTreeMap<Ball, i64>)> {
    let p = frame.map.prime();
    let q = frame.map.den();
    let mut best = ExtInt::NegInf;
    let mut profile = BTreeMap::new();
    let mut pending = frame.domain.decompose_capped(q_level, opts.ball_cap)?;
    let mut t = q_level;
    while !pending.is_empty() {
        let mut next = Vec::new();
        for ball in pending {
            let a = ball.key();
            let qv = p.valuation(&q.eval(a)).expect_finite("Q root-free");
            let exact = p.norm_exponent(&t1.eval(a)) + 2 * qv;
            best = best.max(exact);
            if norm_constant_exponent(p, t1, a) >= t {
                profile.insert(
                    frame.unscale(&ball),
                    exact.expect_finite("constant nonzero"),
                );
            } else {
                next.push(ball);
            }
        }
        next.retain(|b| {
            let qv = p.valuation(&q.eval(b.key())).expect_finite("Q root-free");
            norm_upper_bound(p, &t1.taylor_shift(b.key()), t) + 2 * qv > best
        });
        if next.is_empty() {
            break;
        }
        if q_level - t >= opts.depth_cap as i64 {
            return Err(Error::DepthCapExceeded {
                level: t + frame.shift,
                suspect: next.first().map(|b| frame.unscale(b)),
            });
        }
        pending = next.iter().flat_map(|b| b.children(p)).collect();
        t -= 1;
    }
    Ok((best, profile))
}

/// The uniform radius exponent `l = min(b(Q), b(T1)) - 1` with its profile.
pub fn scaling_radius(
    f: &RationalMap,
    x: &CompactDomain,
    opts: &AnalysisOptions,
) -> Result<ScalingReport> {
    let report = analyze(f, x, opts)?;
    match report.derivative_obstruction {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

/// Classification of the local scaling behavior of `f` on `X`.
pub fn classify(
    f: &RationalMap,
    x: &CompactDomain,
    opts: &AnalysisOptions,
) -> Result<ScalingReport> {
    analyze(f, x, opts)
}

/// Coarsest level `t` at which every ball of `X` satisfies
/// `|f(x) - f(y)| <= |x - y|`, so that balls map into balls of the same level.
///
/// Equals the scaling radius when `f'` is root-free. Otherwise it is found by
/// bounding the divided difference `T(x, y) = (P(x)Q(y) - P(y)Q(x)) / (x - y)`
/// through its Taylor coefficients at each representative.
pub fn lipschitz_level(
    f: &RationalMap,
    x: &CompactDomain,
    report: &ScalingReport,
    opts: &AnalysisOptions,
) -> Result<i64> {
    if let ExtInt::Finite(e) = report.max_scalar_exponent {
        if e > 0 {
            return Err(Error::NotLocally1Lipschitz { max_exponent: e });
        }
    }
    if let Some(l) = report.radius_exponent {
        return Ok(l);
    }
    let frame = Frame::new(f, x)?;
    let p = f.prime();
    let (num, den) = (frame.map.num(), frame.map.den());
    let start = report.b_q_exponent - 1;
    let mut t = start;
    let mut pending = frame.domain.decompose_capped(start, opts.ball_cap)?;
    loop {
        let failing: Vec<Ball> = pending
            .into_iter()
            .filter(|b| !divided_difference_bounded(p, num, den, b.key(), t))
            .collect();
        if failing.is_empty() {
            return Ok(t + frame.shift);
        }
        if start - t >= opts.depth_cap as i64 {
            return Err(Error::DepthCapExceeded {
                level: t + frame.shift,
                suspect: failing.first().map(|b| frame.unscale(b)),
            });
        }
        pending = failing.iter().flat_map(|b| b.children(p)).collect();
        t -= 1;
    }
}

/// `max |T(a+u, a+w)| <= |Q(a)|^2` for `|u|, |w| <= p^t`, with `|Q|` constant
/// on the ball. Uses the identity
/// `(u^i w^j - u^j w^i) / (u - w) = (uw)^j * sum_k u^k w^(i-j-1-k)`.
fn divided_difference_bounded(
    p: Prime,
    num: &Polynomial,
    den: &Polynomial,
    a: &BigRational,
    t: i64,
) -> bool {
    if norm_constant_exponent(p, den, a) < t {
        return false;
    }
    let pa = num.taylor_shift(a);
    let qa = den.taylor_shift(a);
    let limit = -2 * p.valuation(&qa.coeff(0)).expect_finite("Q root-free");
    let deg = pa.degree().max(qa.degree()).max(0) as usize;
    for i in 1..=deg {
        for j in 0..i {
            let c = pa.coeff(i) * qa.coeff(j) - pa.coeff(j) * qa.coeff(i);
            if p.norm_exponent(&c) + t * (i + j - 1) as i64 > limit {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn opts() -> AnalysisOptions {
        AnalysisOptions::default()
    }

    fn two_balls() -> CompactDomain {
        let p7 = p(7);
        CompactDomain::ball(p7, &q(2), -1).union(&CompactDomain::ball(p7, &q(5), -1))
    }

    #[test]
    fn bf_examples() {
        let x = two_balls();
        assert_eq!(
            lower_bound_bf(&Polynomial::from_ints(&[1, 0, 1]), &x, &opts()).unwrap(),
            0
        );
        assert_eq!(lower_bound_bf(&Polynomial::x(), &x, &opts()).unwrap(), 0);
        let z3 = CompactDomain::integers(p(3));
        assert_eq!(
            lower_bound_bf(&Polynomial::from_ints(&[1, 0, 1]), &z3, &opts()).unwrap(),
            0
        );
        // x on Z_3 \ 3Z_3 needs no refinement; 9x^2 + 3 is bounded by 1/3
        let units = z3.difference(&CompactDomain::ball(p(3), &q(0), -1));
        assert_eq!(
            lower_bound_bf(&Polynomial::from_ints(&[3, 0, 9]), &units, &opts()).unwrap(),
            -1
        );
        // a content of 2 on a fine domain: the test at level -3 already passes
        let fine = CompactDomain::ball(p(2), &q(0), -3);
        assert_eq!(
            lower_bound_bf(&Polynomial::constant(q(2)), &fine, &opts()).unwrap(),
            -2
        );
        assert_eq!(
            lower_bound_bf(&Polynomial::constant(q(1 << 20)), &fine, &opts()).unwrap(),
            -20
        );
    }

    #[test]
    fn radius_shrinks_with_the_content_of_the_derivative() {
        // f' = 2(3 - x - 3x^2), and f(0) - f(2) has valuation 3, not 2
        let f = RationalMap::polynomial(p(2), &Polynomial::from_ints(&[0, 6, -1, -2]));
        let r = scaling_radius(&f, &CompactDomain::integers(p(2)), &opts()).unwrap();
        assert_eq!(r.b_t1_exponent, Some(-1));
        assert_eq!(r.radius_exponent, Some(-2));
    }

    #[test]
    fn bf_certifies_roots() {
        let z7 = CompactDomain::integers(p(7));
        let err = lower_bound_bf(&Polynomial::from_ints(&[-2, 0, 1]), &z7, &opts()).unwrap_err();
        assert!(matches!(err, Error::RootCertified { .. }));
        let err = lower_bound_bf(&Polynomial::x(), &z7, &opts()).unwrap_err();
        assert!(matches!(err, Error::RootCertified { .. }));
    }

    #[test]
    fn bf_double_root_and_depth_cap() {
        // (x^2 - 7)^2: the double roots are certified through the squarefree part
        let z3 = CompactDomain::integers(p(3));
        let err =
            lower_bound_bf(&Polynomial::from_ints(&[49, 0, -14, 0, 1]), &z3, &opts()).unwrap_err();
        assert!(matches!(err, Error::RootCertified { .. }));

        // x^2 - 7 * 3^10: two roots 3^-5 apart need more levels than the cap
        // (certified at level -6 from the representative 3^5)
        let small = AnalysisOptions {
            depth_cap: 4,
            ..opts()
        };
        let err =
            lower_bound_bf(&Polynomial::from_ints(&[-413_343, 0, 1]), &z3, &small).unwrap_err();
        match err {
            Error::DepthCapExceeded { level, suspect } => {
                assert_eq!(level, -5);
                assert_eq!(suspect.unwrap().level(), -5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn radius_of_reference_maps() {
        let f =
            RationalMap::new(p(7), &Polynomial::from_ints(&[-1, 0, 1]), &Polynomial::x()).unwrap();
        let r = scaling_radius(&f, &two_balls(), &opts()).unwrap();
        assert_eq!(r.radius_exponent, Some(-1));
        assert_eq!(r.classification, Classification::LocallyIsometric);

        let f = RationalMap::new(
            p(3),
            &Polynomial::from_ints(&[0, 1, 1, 2]),
            &Polynomial::from_ints(&[1, 0, 1]),
        )
        .unwrap();
        let z3 = CompactDomain::integers(p(3));
        let x = z3
            .difference(&CompactDomain::ball(p(3), &q(4), -2))
            .difference(&CompactDomain::ball(p(3), &q(5), -2));
        let r = scaling_radius(&f, &x, &opts()).unwrap();
        assert_eq!(r.radius_exponent, Some(-2));
        // on all of Z_3 the derivative has a root near 5
        assert!(matches!(
            scaling_radius(&f, &z3, &opts()),
            Err(Error::DerivativeRootInDomain { .. })
        ));
        assert_eq!(r.classification, Classification::Locally1Lipschitz);

        let f = RationalMap::new(
            p(3),
            &Polynomial::from_ints(&[1, 0, 2, 1, 1]),
            &Polynomial::from_ints(&[1, -1, 0, 1]),
        )
        .unwrap();
        let r = scaling_radius(&f, &CompactDomain::integers(p(3)), &opts()).unwrap();
        assert_eq!(r.radius_exponent, Some(-1));
    }

    #[test]
    fn linear_contraction_is_not_isometric() {
        let f = RationalMap::polynomial(p(3), &Polynomial::from_ints(&[0, 3]));
        let r = classify(&f, &CompactDomain::integers(p(3)), &opts()).unwrap();
        assert_eq!(r.classification, Classification::Locally1Lipschitz);
        assert!(r.scalar_profile.values().all(|&e| e == -1));
    }

    #[test]
    fn expanding_map_reports_bound() {
        let f = RationalMap::polynomial(
            p(3),
            &Polynomial::from_ints(&[0, 1]).scale(&BigRational::new(1.into(), 3.into())),
        );
        let r = classify(&f, &CompactDomain::integers(p(3)), &opts()).unwrap();
        assert_eq!(
            r.classification,
            Classification::BoundedScaling { bound_exponent: 1 }
        );
    }

    #[test]
    fn derivative_root_and_pole() {
        let z3 = CompactDomain::integers(p(3));
        let sq = RationalMap::polynomial(p(3), &Polynomial::from_ints(&[0, 0, 1]));
        let r = classify(&sq, &z3, &opts()).unwrap();
        assert!(!r.derivative_root_free);
        assert_eq!(r.max_scalar_exponent, ExtInt::Finite(0));
        assert_eq!(r.classification, Classification::Locally1Lipschitz);
        assert!(matches!(
            scaling_radius(&sq, &z3, &opts()),
            Err(Error::DerivativeRootInDomain { .. })
        ));
        // |x^2 - y^2| = |x - y||x + y|; the search starts at level -1
        assert_eq!(lipschitz_level(&sq, &z3, &r, &opts()).unwrap(), -1);

        let inv = RationalMap::new(p(3), &Polynomial::from_ints(&[1]), &Polynomial::x()).unwrap();
        assert!(matches!(
            classify(&inv, &z3, &opts()),
            Err(Error::PoleInDomain { .. })
        ));
    }

    #[test]
    fn domains_outside_the_integers() {
        // f(x) = x + 1 on B_{3}(0): isometric, radius taken from the conjugate
        let f = RationalMap::polynomial(p(3), &Polynomial::from_ints(&[1, 1]));
        let x = CompactDomain::ball(p(3), &q(0), 1);
        let r = scaling_radius(&f, &x, &opts()).unwrap();
        assert_eq!(r.frame_shift, 1);
        assert_eq!(r.classification, Classification::LocallyIsometric);
        assert_eq!(r.radius_exponent, Some(0));
        assert!(r.scalar_profile.keys().all(|b| b.level() == 0));
    }
}
