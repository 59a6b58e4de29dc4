//! Shared fixtures for the benchmarks.

use padyn_core::parse::{parse_compact_domain, parse_map, parse_polynomial};
use padyn_core::{CompactDomain, Polynomial, Prime, RationalMap};

fn prime(p: u64) -> Prime {
    Prime::new(p).expect("fixture primes are prime")
}

/// `(x^2 - 1)/x` on two 7-adic balls; three cycles at level -2.
pub fn seven_adic() -> (RationalMap, CompactDomain) {
    let p = prime(7);
    (
        parse_map("(x^2 - 1)/x", p).unwrap(),
        parse_compact_domain("B(2,-1) + B(5,-1)", p).unwrap(),
    )
}

/// A 2-adic polynomial that is an isometry on Z_2, for deep levels.
pub fn two_adic_isometry() -> (RationalMap, CompactDomain) {
    let p = prime(2);
    (
        parse_map("1 + x + 2x^2", p).unwrap(),
        CompactDomain::integers(p),
    )
}

/// Inputs for the `b(F)` descent on Z_7: two simple roots, the same roots doubled,
/// and a root-free polynomial.
pub fn bf_inputs() -> Vec<(&'static str, Polynomial, CompactDomain)> {
    let z = CompactDomain::integers(prime(7));
    [
        ("simple-roots", "x^2 - 2"),
        ("double-roots", "(x^2 - 2)^2"),
        ("root-free", "x^2 - 3"),
    ]
    .into_iter()
    .map(|(name, f)| (name, parse_polynomial(f).unwrap(), z.clone()))
    .collect()
}
