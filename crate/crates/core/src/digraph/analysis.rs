use std::cell::{OnceCell, RefCell};
use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::digraph::{CycleDecomposition, Dynamics, LevelDigraph};
use crate::domain::{Ball, CompactDomain};
use crate::error::{Error, Result};
use crate::padic::{hensel_lift, ExtInt, Polynomial};

/// Largest number of target points [`Dynamics::verify_bijection`] lifts.
const SAMPLE_CAP: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntrinsicLevel {
    /// Largest level `t` with `G = G*` there and at every checked level below.
    pub level: i64,
    /// Deepest level at which `G = G*` was confirmed.
    pub verified_down_to: i64,
}

/// A level whose digraph is not a union of cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MpWitness {
    pub level: i64,
    /// A ball receiving two or more edges: its preimage has measure at
    /// least twice its own.
    pub crowded: Ball,
    pub preimages: Vec<Ball>,
    /// A ball receiving no edge: its preimage is empty.
    pub missed: Ball,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MpVerdict {
    /// Decided from the digraphs down to one level below the intrinsic level.
    MeasurePreserving {
        intrinsic_level: i64,
    },
    NotMeasurePreserving(MpWitness),
    /// Every scanned level was a union of cycles, but no finite certificate
    /// applies (`f'` may vanish on the domain).
    Undecided {
        checked_down_to: i64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ErgodicVerdict {
    NotErgodic {
        level: i64,
        cycle_count: usize,
        tail_count: usize,
    },
    /// Every digraph from the top level down to `depth` is a single cycle.
    SingleCycleToDepth { depth: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComponentVerdict {
    MeasurePreserving,
    /// The component's balls stop being a union of cycles at `level`.
    NotMeasurePreserving {
        level: i64,
    },
    Undecided {
        checked_down_to: i64,
    },
}

/// How a component verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentRoute {
    /// `f` is a local isometry and the level is at or below the intrinsic
    /// level: every cycle is measure-preserving.
    IsometricCycles,
    /// The cycle's balls were tested one level finer, at `level`.
    RefinedCycles { level: i64 },
    /// The level lies above the intrinsic level; the restriction to the
    /// component was analyzed on its own.
    DirectCheck,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentSelection {
    pub level: i64,
    /// The cycle's balls in cycle order.
    pub cycle: Vec<Ball>,
    /// Union of the cycle's balls.
    pub domain: CompactDomain,
    pub verdict: ComponentVerdict,
    pub route: ComponentRoute,
}

/// Verdict for the union of several components: measure-preserving exactly
/// when every part is.
pub fn union_verdict(parts: &[&ComponentSelection]) -> ComponentVerdict {
    let mut undecided = None;
    for c in parts {
        match c.verdict {
            ComponentVerdict::NotMeasurePreserving { .. } => return c.verdict.clone(),
            ComponentVerdict::Undecided { .. } => undecided = Some(c.verdict.clone()),
            ComponentVerdict::MeasurePreserving => {}
        }
    }
    undecided.unwrap_or(ComponentVerdict::MeasurePreserving)
}

/// Outcome of a successful bijection check on one edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BijectionReport {
    pub source: Ball,
    pub target: Ball,
    /// Exponent of `|f'(a)|` at the source representative.
    pub scalar_exponent: i64,
    /// Every sampled target point has a preimage within `p^radius_exponent`
    /// of the source representative.
    pub radius_exponent: i64,
    pub samples: usize,
}

fn witness(g: &LevelDigraph, d: &CycleDecomposition) -> Option<MpWitness> {
    let crowded = d.in_degrees.iter().position(|&k| k >= 2)?;
    let missed = d.in_degrees.iter().position(|&k| k == 0)?;
    Some(MpWitness {
        level: g.level,
        crowded: g.vertices[crowded].clone(),
        preimages: g
            .preimages(crowded)
            .into_iter()
            .map(|i| g.vertices[i].clone())
            .collect(),
        missed: g.vertices[missed].clone(),
    })
}

impl Dynamics {
    /// The intrinsic level `t0`: the largest `t <= l` with `G* = G` at `t`
    /// and at the `margin` levels below it.
    pub fn intrinsic_level(&self) -> Result<IntrinsicLevel> {
        let l = self.radius_exponent()?;
        let margin = self.opts.margin as i64;
        let deepest = l - self.opts.depth_cap as i64;
        let cache: RefCell<BTreeMap<i64, bool>> = RefCell::new(BTreeMap::new());
        let full = |t: i64| -> Result<bool> {
            if let Some(&v) = cache.borrow().get(&t) {
                return Ok(v);
            }
            let v = self.subsidiary(t)?.subsidiary_is_full() == Some(true);
            cache.borrow_mut().insert(t, v);
            Ok(v)
        };
        let mut t = l;
        while t >= deepest {
            if full(t)? {
                let mut ok = true;
                for k in 1..=margin {
                    if !full(t - k)? {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    return Ok(IntrinsicLevel {
                        level: t,
                        verified_down_to: t - margin,
                    });
                }
            }
            t -= 1;
        }
        let g = self.subsidiary(deepest)?;
        let suspect = g
            .subsidiary
            .as_ref()
            .and_then(|d| d.iter().position(|e| !e.passes))
            .map(|i| g.vertices[i].clone());
        Err(Error::DepthCapExceeded {
            level: deepest,
            suspect,
        })
    }

    /// Whether `f` preserves the Haar measure on `X`.
    ///
    /// With `f'` root-free this is decided: the digraphs from the scaling
    /// level down to one below the intrinsic level are unions of cycles
    /// exactly when `f` is measure-preserving. Otherwise levels are scanned
    /// to the configured depth and a clean scan is `Undecided`.
    pub fn mp_check(&self) -> Result<MpVerdict> {
        if self.report.derivative_root_free {
            let l = self.radius_exponent()?;
            let t0 = self.intrinsic_level()?.level;
            for t in (t0 - 1..=l).rev() {
                let g = self.digraph(t)?;
                if let Some(w) = witness(&g, &g.cycles()) {
                    return Ok(MpVerdict::NotMeasurePreserving(w));
                }
            }
            return Ok(MpVerdict::MeasurePreserving {
                intrinsic_level: t0,
            });
        }
        let top = self.level;
        let mut checked = top;
        for t in (top - self.opts.scan_depth as i64..=top).rev() {
            if self.domain.count_at(t) > self.opts.ball_cap.into() {
                break;
            }
            let g = self.digraph(t)?;
            if let Some(w) = witness(&g, &g.cycles()) {
                return Ok(MpVerdict::NotMeasurePreserving(w));
            }
            checked = t;
        }
        Ok(MpVerdict::Undecided {
            checked_down_to: checked,
        })
    }

    /// Scans levels from the top level down to `depth` for a digraph that is
    /// not a single cycle. A clean scan is only evidence of ergodicity.
    pub fn ergodic_check(&self, depth: i64) -> Result<ErgodicVerdict> {
        if depth > self.level {
            return Err(Error::InvalidDepth {
                depth,
                level: self.level,
            });
        }
        for t in (depth..=self.level).rev() {
            let d = self.digraph(t)?.cycles();
            if !d.is_single_cycle() {
                return Ok(ErgodicVerdict::NotErgodic {
                    level: t,
                    cycle_count: d.cycles.len(),
                    tail_count: d.tail_vertices.len(),
                });
            }
        }
        Ok(ErgodicVerdict::SingleCycleToDepth { depth })
    }

    /// One component per cycle of `G(f, p^t)`, each with a verdict on
    /// whether `f` restricted to the cycle's balls is measure-preserving.
    pub fn components(&self, t: i64) -> Result<Vec<ComponentSelection>> {
        let g = self.digraph(t)?;
        let d = g.cycles();
        let t0 = if self.report.derivative_root_free {
            Some(self.intrinsic_level()?.level)
        } else {
            None
        };
        let isometric = self.report.is_isometric();
        let finer = match t0 {
            Some(t0) if t <= t0 && !isometric => Some(self.digraph(t - 1)?),
            _ => None,
        };
        let p = self.map.prime();
        let mut out = Vec::with_capacity(d.cycles.len());
        for cycle in &d.cycles {
            let balls: Vec<Ball> = cycle.iter().map(|&i| g.vertices[i].clone()).collect();
            let domain = CompactDomain::from_balls(p, balls.iter().cloned());
            let (verdict, route) = match (t0, &finer) {
                (Some(t0), _) if t <= t0 && isometric => (
                    ComponentVerdict::MeasurePreserving,
                    ComponentRoute::IsometricCycles,
                ),
                (Some(_), Some(fine)) => {
                    let members: BTreeSet<&Ball> = balls.iter().collect();
                    let inside: Vec<usize> = (0..fine.len())
                        .filter(|&i| members.contains(&fine.vertices[i].ancestor(p, t)))
                        .collect();
                    let mut indeg: BTreeMap<usize, usize> =
                        inside.iter().map(|&i| (i, 0)).collect();
                    for &i in &inside {
                        *indeg.entry(fine.edges[i]).or_default() += 1;
                    }
                    let verdict = if indeg.values().all(|&k| k == 1) {
                        ComponentVerdict::MeasurePreserving
                    } else {
                        ComponentVerdict::NotMeasurePreserving { level: t - 1 }
                    };
                    (verdict, ComponentRoute::RefinedCycles { level: t - 1 })
                }
                _ => {
                    let sub = Dynamics::new(&self.map, &domain, self.opts)?;
                    let verdict = match sub.mp_check()? {
                        MpVerdict::MeasurePreserving { .. } => ComponentVerdict::MeasurePreserving,
                        MpVerdict::NotMeasurePreserving(w) => {
                            ComponentVerdict::NotMeasurePreserving { level: w.level }
                        }
                        MpVerdict::Undecided { checked_down_to } => {
                            ComponentVerdict::Undecided { checked_down_to }
                        }
                    };
                    (verdict, ComponentRoute::DirectCheck)
                }
            };
            out.push(ComponentSelection {
                level: t,
                cycle: balls,
                domain,
                verdict,
                route,
            });
        }
        Ok(out)
    }

    /// Checks that `f` maps `B(a, p^t / |f'(a)|)` onto the successor ball of
    /// `source` by lifting sampled target points back with Hensel's lemma.
    ///
    /// Targets are the level-`sample_depth` sub-balls of the successor (a
    /// deterministic random subset beyond 4096 of them). Injectivity follows
    /// from the scaling identity once the source ball lies within the
    /// scaling radius.
    pub fn verify_bijection(&self, source: &Ball, sample_depth: i64) -> Result<BijectionReport> {
        let l = self.radius_exponent()?;
        let t = source.level();
        if sample_depth > t {
            return Err(Error::InvalidDepth {
                depth: sample_depth,
                level: t,
            });
        }
        let g = self.digraph(t)?;
        let target = g.successor(source).cloned().ok_or(Error::NotInDomain {
            distance_exponent: t,
        })?;
        let p = self.map.prime();
        let k = self.report.frame_shift;
        let scale = p.pow_rat(k);
        let a = source.key() * &scale;
        let e = self
            .framed
            .derivative_norm_exponent(&a)
            .and_then(ExtInt::finite)
            .expect("f' root-free");
        let radius = t - e;
        let fail = |detail: String| Error::BijectionFailed {
            source_ball: Box::new(source.clone()),
            target: Box::new(target.clone()),
            detail,
        };
        if radius > l {
            return Err(fail(format!(
                "source ball radius p^{radius} exceeds the scaling radius p^{l}"
            )));
        }

        let depth = (t - sample_depth) as u32;
        let step = p.pow_rat(-(t - k));
        let points: Vec<BigRational> = if p.pow(depth) <= SAMPLE_CAP.into() {
            target
                .descendants(p, sample_depth)
                .iter()
                .map(|b| b.key() * &scale)
                .collect()
        } else {
            let mut rng = StdRng::seed_from_u64(0);
            (0..SAMPLE_CAP)
                .map(|_| {
                    let mut offset = BigRational::zero();
                    let mut unit = step.clone();
                    for _ in 0..depth {
                        let digit: u32 = rng.gen_range(0..p.get());
                        offset += &unit * BigRational::from_integer(digit.into());
                        unit *= p.pow_rat(-1);
                    }
                    target.key() * &scale + offset
                })
                .collect()
        };

        let t0 = OnceCell::new();
        for b in &points {
            let ok = match self.lift_preimage(&a, b, radius - k)? {
                true => true,
                false => {
                    // at or below the intrinsic level the ancestor edge passes
                    // the subsidiary test and maps onto the ancestor target
                    let t0 =
                        *t0.get_or_init(|| self.intrinsic_level().map_or(i64::MIN, |i| i.level));
                    if t <= t0 {
                        let a0 = p.canonical_key(source.key(), t0) * &scale;
                        self.lift_approximate(&a0, &a, b, radius - k)?
                    } else {
                        false
                    }
                }
            };
            if !ok {
                return Err(fail(format!(
                    "no preimage of {} within p^{radius} of the source representative",
                    crate::padic::fmt_rational(&(b / &scale))
                )));
            }
        }
        Ok(BijectionReport {
            source: source.clone(),
            target,
            scalar_exponent: e,
            radius_exponent: radius,
            samples: points.len(),
        })
    }

    /// `F(x) = P(p^s x + a) - b Q(p^s x + a)` with the least `s` making it
    /// integral, or `None` if its constant term is not integral.
    fn rescaled_equation(&self, a: &BigRational, b: &BigRational) -> Option<(Polynomial, i64)> {
        let p = self.map.prime();
        let num = self.framed.num().taylor_shift(a);
        let den = self.framed.den().taylor_shift(a);
        let h = &num - &den.scale(b);
        if p.valuation(&h.coeff(0)) < 0 {
            return None;
        }
        let s = h
            .coeffs()
            .iter()
            .enumerate()
            .skip(1)
            .filter_map(|(i, c)| match p.valuation(c) {
                ExtInt::Finite(v) if v < 0 => {
                    Some(num_integer::Integer::div_ceil(&-v, &(i as i64)))
                }
                _ => None,
            })
            .max()
            .unwrap_or(0);
        Some((h.compose_affine(&p.pow_rat(s), &BigRational::zero()), s))
    }

    /// Hensel from seed `a`: the certified root lies within `p^radius` of `a`.
    fn lift_preimage(&self, a: &BigRational, b: &BigRational, radius: i64) -> Result<bool> {
        let Some((f, s)) = self.rescaled_equation(a, b) else {
            return Ok(false);
        };
        match hensel_lift(self.map.prime(), &f, &BigRational::zero(), 12) {
            Ok(r) => Ok(r.bound_exponent - s <= radius),
            Err(Error::HenselPreconditionFailed { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Hensel from the coarser seed `a0`, then locates the approximate root
    /// relative to `a`. The approximation error is far below `p^radius`.
    fn lift_approximate(
        &self,
        a0: &BigRational,
        a: &BigRational,
        b: &BigRational,
        radius: i64,
    ) -> Result<bool> {
        let p = self.map.prime();
        let Some((f, s)) = self.rescaled_equation(a0, b) else {
            return Ok(false);
        };
        let precision = (s - radius).max(0) as u32 + 16;
        match hensel_lift(p, &f, &BigRational::zero(), precision) {
            Ok(r) => {
                let root = &r.root * p.pow_rat(s) + a0;
                Ok(p.within(&root, a, radius))
            }
            Err(Error::HenselPreconditionFailed { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }
}
