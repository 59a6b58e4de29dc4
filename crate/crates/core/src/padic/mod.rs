//! Exact p-adic arithmetic on `Q`: valuations, ball keys, polynomials,
//! rational maps in normal form, and Hensel lifting.

mod ext;
mod hensel;
mod map;
mod poly;
mod prime;

pub use ext::ExtInt;
pub use hensel::{hensel_lift, norm_constant_exponent, norm_upper_bound, HenselResult};
pub use map::{normalize_map, RationalMap};
pub use poly::Polynomial;
pub use prime::{fmt_rational, PAdicRational, Prime};
