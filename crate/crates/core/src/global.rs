//! Rational maps on all of `Q_p`: the degree gate, the radius `N` beyond
//! which `f` behaves like its leading terms, the reduction of invertible
//! isometry and measure preservation to a compact ball, and explicit
//! witnesses that no rational map is minimal or ergodic on `Q_p`.

use num_rational::BigRational;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::digraph::{Dynamics, MpVerdict};
use crate::domain::{Ball, CompactDomain};
use crate::error::{Error, Result};
use crate::padic::{ExtInt, Polynomial, Prime, RationalMap};
use crate::scaling::{lower_bound_bf, AnalysisOptions};

/// How far root-freeness of the unit denominator `Q1` on `Q_p` was settled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RootFreeness {
    /// `|Q1(x)| >= p^lower_bound_exponent` on all of `Q_p`.
    Proven {
        lower_bound_exponent: i64,
    },
    RootFound {
        ball: Ball,
    },
    /// The descent near a suspected root reached its depth cap.
    Unresolved {
        level: i64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalGateReport {
    pub alpha: i64,
    pub m: i64,
    pub n: i64,
    /// `alpha = 0` and `m = n + 1`: necessary for measure preservation and
    /// for invertible local isometry on `Q_p`.
    pub gate_passed: bool,
    /// `|P1(x)| = |x|^m` and `|Q1(x)| = |x|^n` once `|x| >= p^n0`.
    pub n0_exponent: i64,
    /// `N`: additionally `|P2(x)| = |Q2(x)| = |x|^n'` for `|x| >= p^N`,
    /// where `f' = p^alpha' P2/Q2`. Only computed when the gate passes.
    pub n_exponent: Option<i64>,
    /// `l0` with `|Q1(x)| >= p^-l0` on `Q_p`, when root-freeness is proven.
    pub l0_exponent: Option<i64>,
    pub root_freeness: RootFreeness,
}

/// `N(F)`: the least positive `N` with `p^N > |c_i|` for every non-leading
/// coefficient, so that `|F(x)| = |c_s||x|^s` whenever `|x| >= p^N`.
pub fn leading_term_radius(prime: Prime, f: &Polynomial) -> i64 {
    let s = f.degree().max(0) as usize;
    f.coeffs()[..s.min(f.coeffs().len())]
        .iter()
        .filter_map(|c| prime.norm_exponent(c).finite())
        .map(|e| e + 1)
        .max()
        .unwrap_or(1)
        .max(1)
}

fn unit_leading(prime: Prime, f: &Polynomial) -> Polynomial {
    match f.leading() {
        Some(l) => f.scale(
            &prime.pow_rat(
                -prime
                    .valuation(l)
                    .expect_finite("nonzero leading coefficient"),
            ),
        ),
        None => Polynomial::zero(),
    }
}

/// `P2`, `Q2` with unit leading coefficients, from `f' = (P1'Q1 - P1Q1') / Q1^2`
/// after removing the common factor.
pub fn derivative_parts(f: &RationalMap) -> (Polynomial, Polynomial) {
    let p = f.prime();
    let (p1, q1) = (f.num_unit(), f.den_unit());
    let t = &(&p1.derivative() * q1) - &(p1 * &q1.derivative());
    let q2 = q1 * q1;
    if t.is_zero() {
        return (Polynomial::zero(), unit_leading(p, &q2));
    }
    let g = Polynomial::gcd(&t, &q2);
    let (t, _) = t.div_rem(&g);
    let (q2, _) = q2.div_rem(&g);
    (unit_leading(p, &t), unit_leading(p, &q2))
}

/// Certifies that `Q1` has no root in `Q_p`: outside `B_{p^(N-1)}(0)` its
/// leading term dominates, inside the descent bound applies.
pub fn certify_root_free(f: &RationalMap, opts: &AnalysisOptions) -> Result<RootFreeness> {
    let p = f.prime();
    let q1 = f.den_unit();
    if q1.degree() == 0 {
        return Ok(RootFreeness::Proven {
            lower_bound_exponent: p.norm_exponent(&q1.coeff(0)).expect_finite("nonzero"),
        });
    }
    let n = leading_term_radius(p, q1);
    let ball = CompactDomain::ball(p, &BigRational::zero(), n - 1);
    match lower_bound_bf(q1, &ball, opts) {
        Ok(b) => Ok(RootFreeness::Proven {
            lower_bound_exponent: b.min(n * q1.degree()),
        }),
        Err(Error::RootCertified { ball }) => Ok(RootFreeness::RootFound { ball }),
        Err(Error::DepthCapExceeded { level, .. }) => Ok(RootFreeness::Unresolved { level }),
        Err(e) => Err(e),
    }
}

/// The degree gate with `N0`, root-freeness of `Q1`, and `N` when it passes.
pub fn degree_gate(f: &RationalMap, opts: &AnalysisOptions) -> Result<GlobalGateReport> {
    let p = f.prime();
    let (alpha, m, n) = (f.alpha(), f.m(), f.n());
    let gate_passed = alpha == 0 && m == n + 1;
    let n0 = leading_term_radius(p, f.num_unit()).max(leading_term_radius(p, f.den_unit()));
    let root_freeness = certify_root_free(f, opts)?;
    let l0_exponent = match root_freeness {
        RootFreeness::Proven {
            lower_bound_exponent,
        } => Some(-lower_bound_exponent),
        _ => None,
    };
    let n_exponent = gate_passed.then(|| {
        let (p2, q2) = derivative_parts(f);
        n0.max(leading_term_radius(p, &p2))
            .max(leading_term_radius(p, &q2))
    });
    Ok(GlobalGateReport {
        alpha,
        m,
        n,
        gate_passed,
        n0_exponent: n0,
        n_exponent,
        l0_exponent,
        root_freeness,
    })
}

/// `N` for a map passing the gate.
pub fn compute_n(f: &RationalMap, opts: &AnalysisOptions) -> Result<i64> {
    let gate = degree_gate(f, opts)?;
    gate.n_exponent.ok_or(Error::GateFailed {
        alpha: gate.alpha,
        m: gate.m,
        n: gate.n,
    })
}

/// Which condition settled a negative global answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GlobalFailure {
    Gate,
    /// `f(B_{p^(N-1)}(0))` is not inside the ball.
    NotForwardInvariant {
        escaping: Ball,
    },
    NotLocallyIsometric,
    /// Some level digraph on the ball is not a union of cycles.
    NotMeasurePreservingOnBall {
        level: i64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GlobalAnswer {
    Yes,
    No(GlobalFailure),
    Undecided,
}

impl GlobalAnswer {
    /// `Some(true)` for yes, `Some(false)` for any failure, `None` if undecided.
    pub fn decision(&self) -> Option<bool> {
        match self {
            GlobalAnswer::Yes => Some(true),
            GlobalAnswer::No(_) => Some(false),
            GlobalAnswer::Undecided => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalReport {
    pub gate: GlobalGateReport,
    /// Level `N - 1` of the compact ball the question reduces to.
    pub ball_level: Option<i64>,
    pub answer: GlobalAnswer,
}

fn require_root_free(gate: &GlobalGateReport) -> Result<()> {
    match &gate.root_freeness {
        RootFreeness::Proven { .. } => Ok(()),
        RootFreeness::RootFound { ball } => Err(Error::PoleInQp {
            ball: Some(ball.clone()),
        }),
        RootFreeness::Unresolved { level } => Err(Error::RootFreenessUnresolved { level: *level }),
    }
}

/// Either the ball level with its analysis, or an answer reached early.
type Reduction = std::result::Result<(i64, Dynamics), GlobalAnswer>;

/// Shared reduction: gate, `N`, and the analysis on `B_{p^(N-1)}(0)` with
/// forward invariance checked. `Err(answer)` short-circuits.
fn reduce_to_ball(
    f: &RationalMap,
    opts: &AnalysisOptions,
) -> Result<(GlobalGateReport, Reduction)> {
    let gate = degree_gate(f, opts)?;
    require_root_free(&gate)?;
    let Some(n) = gate.n_exponent else {
        return Ok((gate, Err(GlobalAnswer::No(GlobalFailure::Gate))));
    };
    let ball = CompactDomain::ball(f.prime(), &BigRational::zero(), n - 1);
    let dy = match Dynamics::new(f, &ball, *opts) {
        Ok(dy) => dy,
        Err(Error::NotLocally1Lipschitz { .. }) => {
            return Ok((
                gate,
                Err(GlobalAnswer::No(GlobalFailure::NotLocallyIsometric)),
            ))
        }
        Err(e) => return Err(e),
    };
    match dy.digraph(dy.top_level()) {
        Ok(_) => Ok((gate, Ok((n - 1, dy)))),
        Err(Error::NotForwardInvariant { escaping }) => Ok((
            gate,
            Err(GlobalAnswer::No(GlobalFailure::NotForwardInvariant {
                escaping: escaping[0].clone(),
            })),
        )),
        Err(e) => Err(e),
    }
}

fn mp_answer(v: MpVerdict) -> GlobalAnswer {
    match v {
        MpVerdict::MeasurePreserving { .. } => GlobalAnswer::Yes,
        MpVerdict::NotMeasurePreserving(w) => {
            GlobalAnswer::No(GlobalFailure::NotMeasurePreservingOnBall { level: w.level })
        }
        MpVerdict::Undecided { .. } => GlobalAnswer::Undecided,
    }
}

/// Whether `f` is an invertible local isometry of `Q_p`: the gate, then
/// forward invariance of `B_{p^(N-1)}(0)`, local isometry there, and the
/// cycle criterion on the ball.
pub fn global_inv_iso_check(f: &RationalMap, opts: &AnalysisOptions) -> Result<GlobalReport> {
    let (gate, reduced) = reduce_to_ball(f, opts)?;
    let (level, dy) = match reduced {
        Ok(r) => r,
        Err(answer) => {
            let ball_level = gate.n_exponent.map(|n| n - 1);
            return Ok(GlobalReport {
                gate,
                ball_level,
                answer,
            });
        }
    };
    let report = dy.report();
    let answer = if report.is_isometric() {
        mp_answer(dy.mp_check()?)
    } else if report.derivative_root_free
        || matches!(
            report.derivative_obstruction,
            Some(Error::DerivativeRootInDomain { .. })
        )
    {
        GlobalAnswer::No(GlobalFailure::NotLocallyIsometric)
    } else {
        GlobalAnswer::Undecided
    };
    Ok(GlobalReport {
        gate,
        ball_level: Some(level),
        answer,
    })
}

/// Whether `f` preserves the Haar measure of `Q_p`: the gate, forward
/// invariance of `B_{p^(N-1)}(0)`, and measure preservation on the ball.
/// For maps that are not locally 1-Lipschitz on the ball the cycle
/// criterion does not apply and the answer is `Undecided`.
pub fn global_mp_check(f: &RationalMap, opts: &AnalysisOptions) -> Result<GlobalReport> {
    let gate = degree_gate(f, opts)?;
    require_root_free(&gate)?;
    let Some(n) = gate.n_exponent else {
        return Ok(GlobalReport {
            gate,
            ball_level: None,
            answer: GlobalAnswer::No(GlobalFailure::Gate),
        });
    };
    let ball = CompactDomain::ball(f.prime(), &BigRational::zero(), n - 1);
    let dy = match Dynamics::new(f, &ball, *opts) {
        Ok(dy) => dy,
        Err(Error::NotLocally1Lipschitz { .. }) => {
            return Ok(GlobalReport {
                gate,
                ball_level: Some(n - 1),
                answer: GlobalAnswer::Undecided,
            })
        }
        Err(e) => return Err(e),
    };
    let answer = match dy.digraph(dy.top_level()) {
        Ok(_) => mp_answer(dy.mp_check()?),
        Err(Error::NotForwardInvariant { escaping }) => {
            GlobalAnswer::No(GlobalFailure::NotForwardInvariant {
                escaping: escaping[0].clone(),
            })
        }
        Err(e) => return Err(e),
    };
    Ok(GlobalReport {
        gate,
        ball_level: Some(n - 1),
        answer,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Goal {
    Minimality,
    Ergodicity,
}

/// Shape of an obstruction region; `level` refers to [`ObstructionWitness::level`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessKind {
    /// `f(B_{p^level}(0)) ⊆ B_{p^level}(0)`: a proper closed invariant set.
    InvariantBall,
    /// `f` maps `{|x| >= p^level}` into itself, so those orbits never
    /// enter `B_{p^(level-1)}(0)`.
    EscapingRegion,
    /// `f(S_{p^level}(0)) ⊆ S_{p^level}(0)`: an invariant set of positive
    /// measure whose complement also has positive measure.
    InvariantSphere,
    /// `f(B_{p^level}(0)) ⊆ B_{p^(level-1)}(0)`: the preimage of the smaller
    /// ball has at least `p` times its measure.
    ContractingBall,
    /// `|x| > p^level` implies `|f(x)| > p^(level+1)`: the preimage of
    /// `B_{p^(level+1)}(0)` lies in a ball of `1/p` its measure.
    ExpandingRegion,
}

/// Which branch of the case analysis on `(alpha, m, n)` produced the witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObstructionCase {
    /// `m <= n`, or `m = n + 1` with `alpha > 0`: `|f(x)| <= |x|` far out.
    Shrinking,
    /// `m > n` with `alpha <= 0`: `|f(x)| >= |x|` far out.
    NonShrinking,
    /// `m - n >= 2` with `alpha > 0`: `|f(x)| >= |x|` beyond a larger radius.
    EventuallyExpanding,
    /// The gate passes: spheres far out are invariant.
    GatePassed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionWitness {
    pub goal: Goal,
    pub kind: WitnessKind,
    pub case: ObstructionCase,
    pub level: i64,
    /// Radii used in the construction.
    pub n0_exponent: i64,
    pub n_exponent: i64,
    pub l1_exponent: Option<i64>,
}

/// Smallest `N >= start` where `-alpha + slope * N`, the exponent of
/// `|f(x)| / |x|` on `|x| = p^N`, satisfies `ok`. Callers pick `ok` so the
/// search terminates (the exponent is monotone in `N`).
fn first_radius(start: i64, alpha: i64, slope: i64, ok: impl Fn(i64) -> bool) -> i64 {
    let mut n = start;
    while !ok(-alpha + slope * n) {
        n += 1;
    }
    n
}

/// `l1` with `|f(x)| <= p^l1` whenever `|x| < p^N`:
/// `-alpha + l0 + max_i (N i - v(a_i))` over the coefficients of `P1`.
fn inner_bound(f: &RationalMap, n: i64, l0: i64) -> i64 {
    let p = f.prime();
    let top = f
        .num_unit()
        .coeffs()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| p.valuation(c).finite().map(|v| n * i as i64 - v))
        .max()
        .unwrap_or(i64::MIN / 4);
    -f.alpha() + l0 + top
}

/// An explicit region showing that `f` is not minimal (resp. not ergodic) on `Q_p`.
pub fn global_obstruction(
    f: &RationalMap,
    goal: Goal,
    opts: &AnalysisOptions,
) -> Result<ObstructionWitness> {
    let gate = degree_gate(f, opts)?;
    let (alpha, m, n) = (gate.alpha, gate.m, gate.n);
    let n0 = gate.n0_exponent;
    let slope = m - n - 1;
    let l0 = || -> Result<i64> {
        require_root_free(&gate)?;
        Ok(gate.l0_exponent.expect("proven root-free"))
    };
    let witness = |kind, case, level, n_exponent, l1_exponent| ObstructionWitness {
        goal,
        kind,
        case,
        level,
        n0_exponent: n0,
        n_exponent,
        l1_exponent,
    };
    let shrinking = m <= n || (m == n + 1 && alpha > 0);

    match goal {
        Goal::Minimality => {
            if shrinking {
                // |f(x)| <= |x| once |x| >= p^N
                let big_n = first_radius(n0, alpha, slope, |e| e <= 0);
                let l1 = inner_bound(f, big_n, l0()?);
                Ok(witness(
                    WitnessKind::InvariantBall,
                    ObstructionCase::Shrinking,
                    l1,
                    big_n,
                    Some(l1),
                ))
            } else if alpha <= 0 {
                Ok(witness(
                    WitnessKind::EscapingRegion,
                    ObstructionCase::NonShrinking,
                    n0,
                    n0,
                    None,
                ))
            } else {
                let big_n = first_radius(n0, alpha, slope, |e| e >= 0);
                Ok(witness(
                    WitnessKind::EscapingRegion,
                    ObstructionCase::EventuallyExpanding,
                    big_n,
                    big_n,
                    None,
                ))
            }
        }
        Goal::Ergodicity => {
            if let Some(big_n) = gate.n_exponent {
                return Ok(witness(
                    WitnessKind::InvariantSphere,
                    ObstructionCase::GatePassed,
                    big_n,
                    big_n,
                    None,
                ));
            }
            if shrinking {
                // strictly |f(x)| < |x| once |x| >= p^N
                let big_n = first_radius(n0, alpha, slope, |e| e < 0);
                let l1 = inner_bound(f, big_n, l0()?);
                let n1 = big_n.max(l1);
                Ok(witness(
                    WitnessKind::ContractingBall,
                    ObstructionCase::Shrinking,
                    n1 + 1,
                    big_n,
                    Some(l1),
                ))
            } else {
                // strictly |f(x)| > |x| once |x| >= p^N
                let big_n = first_radius(n0, alpha, slope, |e| e > 0);
                let case = if alpha > 0 {
                    ObstructionCase::EventuallyExpanding
                } else {
                    ObstructionCase::NonShrinking
                };
                Ok(witness(
                    WitnessKind::ExpandingRegion,
                    case,
                    big_n,
                    big_n,
                    None,
                ))
            }
        }
    }
}

/// Outcome of checking a witness at sampled points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessCheck {
    pub samples: usize,
    /// First sampled point violating the witness property, if any.
    pub counterexample: Option<BigRational>,
}

impl WitnessCheck {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Random points `x` with `|x| <= p^outer`, given to `p`-adic digits down to
/// exponent `-depth - 1`; with `exact` the top digit is nonzero, so `|x| = p^outer`.
fn sample_points(
    p: Prime,
    outer: i64,
    depth: i64,
    exact: bool,
    count: usize,
    rng: &mut StdRng,
) -> Vec<BigRational> {
    let digits = (outer - depth).max(1);
    (0..count)
        .map(|_| {
            let mut x = BigRational::zero();
            for k in 0..digits {
                let lo = if exact && k == 0 { 1 } else { 0 };
                let d: u32 = rng.gen_range(lo..p.get());
                x += p.pow_rat(-outer + k) * BigRational::from_integer(d.into());
            }
            x
        })
        .collect()
}

/// Property of `(x, |f(x)| exponent)` that a sample must satisfy.
type SampleCheck = Box<dyn Fn(&BigRational, ExtInt) -> bool>;

/// Checks the witness property at sampled points given to `depth` (points
/// are exact rationals, so every check is exact).
pub fn verify_witness(
    f: &RationalMap,
    w: &ObstructionWitness,
    depth: i64,
    samples: usize,
    seed: u64,
) -> WitnessCheck {
    let p = f.prime();
    let mut rng = StdRng::seed_from_u64(seed);
    let norm = |x: &BigRational| p.norm_exponent(x);
    let (points, check): (Vec<BigRational>, SampleCheck) = match w.kind {
        WitnessKind::InvariantBall => {
            let lvl = w.level;
            let mut pts = sample_points(p, lvl, depth.min(lvl), false, samples, &mut rng);
            pts.push(BigRational::zero());
            (pts, Box::new(move |_, fx| fx <= lvl))
        }
        WitnessKind::ContractingBall => {
            let lvl = w.level;
            let mut pts = sample_points(p, lvl, depth.min(lvl), false, samples, &mut rng);
            pts.push(BigRational::zero());
            (pts, Box::new(move |_, fx| fx < lvl))
        }
        WitnessKind::EscapingRegion
        | WitnessKind::InvariantSphere
        | WitnessKind::ExpandingRegion => {
            let mut pts = Vec::new();
            let shells = if w.kind == WitnessKind::InvariantSphere {
                1
            } else {
                3
            };
            for j in 0..shells {
                let radius = w.level + j + i64::from(w.kind == WitnessKind::ExpandingRegion);
                pts.extend(sample_points(
                    p,
                    radius,
                    depth.min(radius),
                    true,
                    samples / shells as usize + 1,
                    &mut rng,
                ));
            }
            let lvl = w.level;
            let check: SampleCheck = match w.kind {
                WitnessKind::EscapingRegion => Box::new(move |_, fx| fx >= lvl),
                WitnessKind::InvariantSphere => Box::new(move |_, fx| fx == lvl),
                _ => Box::new(move |_, fx| fx > lvl + 1),
            };
            (pts, check)
        }
    };
    let mut counterexample = None;
    for x in &points {
        let ok = match f.eval(x) {
            Some(fx) => check(x, norm(&fx)),
            None => false,
        };
        if !ok {
            counterexample = Some(x.clone());
            break;
        }
    }
    WitnessCheck {
        samples: points.len(),
        counterexample,
    }
}
