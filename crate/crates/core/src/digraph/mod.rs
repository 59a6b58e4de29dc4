//! Level digraphs `G(f, p^t)`, subsidiary digraphs `G*(f, p^t)`, and the
//! measure-preservation and ergodicity analyses built on them.

mod analysis;
mod export;
mod graph;
mod subsidiary;

use num_rational::BigRational;

pub use analysis::{
    union_verdict, BijectionReport, ComponentRoute, ComponentSelection, ComponentVerdict,
    ErgodicVerdict, IntrinsicLevel, MpVerdict, MpWitness,
};
pub use export::{from_json, to_dot, to_json, DigraphJson, EdgeJson, VertexJson};
pub use graph::{CycleDecomposition, LevelDigraph, SubsidiaryEdgeData};
pub use subsidiary::{edge_data, s_exponent};

use crate::domain::{Ball, CompactDomain};
use crate::error::{Error, Result};
use crate::padic::RationalMap;
use crate::scaling::{self, AnalysisOptions, ScalingReport};

/// A locally 1-Lipschitz map on a compact domain together with its scaling
/// analysis. All digraph operations go through this value so the analysis
/// runs once.
#[derive(Clone, Debug)]
pub struct Dynamics {
    map: RationalMap,
    domain: CompactDomain,
    opts: AnalysisOptions,
    report: ScalingReport,
    level: i64,
    /// `f` conjugated into the integral frame used by the subsidiary test.
    framed: RationalMap,
}

impl Dynamics {
    /// Runs the scaling analysis; fails unless `f` is locally 1-Lipschitz on `X`.
    pub fn new(f: &RationalMap, x: &CompactDomain, opts: AnalysisOptions) -> Result<Self> {
        let report = scaling::analyze(f, x, &opts)?;
        let level = scaling::lipschitz_level(f, x, &report, &opts)?;
        let framed = if report.frame_shift == 0 {
            f.clone()
        } else {
            f.conjugate_by_power(report.frame_shift)
        };
        Ok(Dynamics {
            map: f.clone(),
            domain: x.clone(),
            opts,
            report,
            level,
            framed,
        })
    }

    pub fn map(&self) -> &RationalMap {
        &self.map
    }

    pub fn domain(&self) -> &CompactDomain {
        &self.domain
    }

    pub fn options(&self) -> &AnalysisOptions {
        &self.opts
    }

    pub fn report(&self) -> &ScalingReport {
        &self.report
    }

    /// Coarsest level at which digraphs can be built: the scaling radius
    /// exponent when `f'` is root-free.
    pub fn top_level(&self) -> i64 {
        self.level
    }

    /// The scaling radius exponent `l`; fails when `f'` may vanish on `X`.
    pub fn radius_exponent(&self) -> Result<i64> {
        match (
            &self.report.radius_exponent,
            &self.report.derivative_obstruction,
        ) {
            (Some(l), _) => Ok(*l),
            (None, Some(e)) => Err(e.clone()),
            (None, None) => Err(Error::DerivativeRootInDomain { ball: None }),
        }
    }

    /// `G(f, p^t)` for `t` at or below [`Self::top_level`].
    pub fn digraph(&self, t: i64) -> Result<LevelDigraph> {
        if t > self.level {
            return Err(Error::LevelTooCoarse {
                level: t,
                max: self.level,
            });
        }
        let p = self.map.prime();
        let vertices = self.domain.decompose_capped(t, self.opts.ball_cap)?;
        let mut edges = Vec::with_capacity(vertices.len());
        let mut escaping = Vec::new();
        for v in &vertices {
            let y = self
                .map
                .eval(v.key())
                .ok_or_else(|| Error::PoleInDomain { ball: v.clone() })?;
            let target = Ball::new(p, &y, t);
            match vertices.binary_search(&target) {
                Ok(j) => edges.push(j),
                Err(_) => {
                    escaping.push(v.clone());
                    edges.push(usize::MAX);
                }
            }
        }
        if !escaping.is_empty() {
            return Err(Error::NotForwardInvariant { escaping });
        }
        Ok(LevelDigraph {
            prime: p,
            level: t,
            vertices,
            edges,
            subsidiary: None,
        })
    }

    /// `G(f, p^t)` with the subsidiary test run on every edge.
    pub fn subsidiary(&self, t: i64) -> Result<LevelDigraph> {
        let l = self.radius_exponent()?;
        let mut g = self.digraph(t)?;
        let p = self.map.prime();
        let k = self.report.frame_shift;
        let scale = p.pow_rat(k);
        let lift = |b: &Ball| -> BigRational { b.key() * &scale };
        let mut data = Vec::with_capacity(g.len());
        for (i, v) in g.vertices.iter().enumerate() {
            let target = &g.vertices[g.edges[i]];
            let d = edge_data(&self.framed, &lift(v), &lift(target), t - k, l - k)
                .ok_or_else(|| Error::ConstantTermNotIntegral { ball: v.clone() })?;
            data.push(d);
        }
        g.subsidiary = Some(data);
        Ok(g)
    }
}

/// `G(f, p^t)` with default options.
pub fn build_digraph(f: &RationalMap, x: &CompactDomain, t: i64) -> Result<LevelDigraph> {
    Dynamics::new(f, x, AnalysisOptions::default())?.digraph(t)
}

/// `G(f, p^t)` with subsidiary data, default options.
pub fn build_subsidiary(f: &RationalMap, x: &CompactDomain, t: i64) -> Result<LevelDigraph> {
    Dynamics::new(f, x, AnalysisOptions::default())?.subsidiary(t)
}

pub fn cycle_decomposition(g: &LevelDigraph) -> CycleDecomposition {
    g.cycles()
}
