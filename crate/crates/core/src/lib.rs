//! Measure-preservation, ergodicity and minimality of rational maps on
//! compact open subsets of `Q_p` and on `Q_p` itself.

pub mod digraph;
pub mod domain;
pub mod error;
pub mod global;
pub mod padic;
pub mod parse;
pub mod scaling;

pub use digraph::{CycleDecomposition, Dynamics, LevelDigraph, SubsidiaryEdgeData};
pub use domain::{Ball, CompactDomain, RepresentativeSystem};
pub use error::{Error, Result};
pub use global::{GlobalAnswer, GlobalReport, Goal, ObstructionWitness, WitnessKind};
pub use padic::{ExtInt, HenselResult, PAdicRational, Polynomial, Prime, RationalMap};
pub use parse::{parse_domain, parse_map, DomainSpec};
pub use scaling::{AnalysisOptions, Classification, ScalingReport};
