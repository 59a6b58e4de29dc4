use thiserror::Error;

use crate::domain::Ball;
use crate::padic::ExtInt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn opt_ball(b: &Option<Ball>) -> String {
    b.as_ref()
        .map_or_else(|| "unknown ball".to_string(), Ball::to_string)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("zero denominator{}", .offset.map(|o| format!(" at byte {o}")).unwrap_or_default())]
    ZeroDenominator { offset: Option<usize> },

    #[error("polynomial and seed must have p-integral coefficients")]
    NotIntegral,

    #[error(
        "Hensel condition |F(a)| < |F'(a)|^2 fails: |F(a)| = p^{value_exponent}, |F'(a)| = p^{derivative_exponent}"
    )]
    HenselPreconditionFailed {
        value_exponent: ExtInt,
        derivative_exponent: ExtInt,
    },

    #[error("level {level} is coarser than the admissible level {max}")]
    LevelTooCoarse { level: i64, max: i64 },

    #[error("decomposition needs {count} balls, above the cap of {cap}")]
    TooManyBalls { count: String, cap: usize },

    #[error("point is not in the domain (nearest ball at distance p^{distance_exponent})")]
    NotInDomain { distance_exponent: i64 },

    #[error("the domain is empty")]
    EmptyDomain,

    #[error("descent stopped at level {level} without a certificate; possible root near {}", opt_ball(.suspect))]
    DepthCapExceeded { level: i64, suspect: Option<Ball> },

    #[error("the polynomial has a certified root in {ball}")]
    RootCertified { ball: Ball },

    #[error("the denominator vanishes in {ball}: the map has a pole in the domain")]
    PoleInDomain { ball: Ball },

    #[error("the derivative has a root in {}: the map is not locally scaling there", opt_ball(.ball))]
    DerivativeRootInDomain { ball: Option<Ball> },

    #[error("the map is not locally 1-Lipschitz on the domain (max |f'| = p^{max_exponent})")]
    NotLocally1Lipschitz { max_exponent: i64 },

    #[error("the map does not send the domain into itself: {} ball(s) escape, first {}", .escaping.len(), .escaping[0])]
    NotForwardInvariant { escaping: Vec<Ball> },

    #[error("the rescaled edge identity has a non-integral constant term at {ball}")]
    ConstantTermNotIntegral { ball: Ball },

    #[error("level {level} lies above the intrinsic level {intrinsic}")]
    LevelAboveIntrinsic { level: i64, intrinsic: i64 },

    #[error("depth {depth} must be at or below the digraph level {level}")]
    InvalidDepth { depth: i64, level: i64 },

    #[error("the map fails the degree gate (alpha = {alpha}, m = {m}, n = {n}): it cannot preserve measure on Q_p")]
    GateFailed { alpha: i64, m: i64, n: i64 },

    #[error("the denominator has a root in Q_p{}: the map is not defined on all of Q_p", .ball.as_ref().map(|b| format!(" (in {b})")).unwrap_or_default())]
    PoleInQp { ball: Option<Ball> },

    #[error("the denominator may have a root in Q_p; root search stopped at level {level}")]
    RootFreenessUnresolved { level: i64 },

    #[error("invalid digraph document: {0}")]
    InvalidDigraph(String),

    #[error("bijection check failed on edge {source_ball} -> {target}: {detail}")]
    BijectionFailed {
        source_ball: Box<Ball>,
        target: Box<Ball>,
        detail: String,
    },
}
