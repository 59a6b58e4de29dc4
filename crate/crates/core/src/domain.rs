//! Closed balls of `Q_p`, compact open domains as finite disjoint unions of
//! balls, and the nested systems of canonical representatives.
//!
//! A ball `B_{p^t}(c)` is stored with its canonical key: the finite base-p
//! expansion of `c` truncated below exponent `-t`. Keys give equality,
//! hashing and refinement directly, and because the key of a ball is also
//! the key of one of its children, representative sets are nested across
//! levels.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::{fmt_rational, ExtInt, Prime};

/// Default cap on the number of balls a single decomposition may produce.
pub const DEFAULT_BALL_CAP: usize = 1_000_000;

/// Closed ball `B_{p^level}(key)` with a canonical center key.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ball {
    level: i64,
    key: BigRational,
}

impl Ball {
    pub fn new(prime: Prime, center: &BigRational, level: i64) -> Ball {
        Ball {
            level,
            key: prime.canonical_key(center, level),
        }
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    /// Canonical center; also the representative point of the ball.
    pub fn key(&self) -> &BigRational {
        &self.key
    }

    /// Haar measure is `p^level`.
    pub fn measure_exponent(&self) -> i64 {
        self.level
    }

    pub fn contains_point(&self, prime: Prime, x: &BigRational) -> bool {
        prime.within(x, &self.key, self.level)
    }

    /// Whether `other` is a sub-ball of `self`.
    pub fn contains(&self, prime: Prime, other: &Ball) -> bool {
        other.level <= self.level && self.contains_point(prime, &other.key)
    }

    /// The ball at the coarser level `level` containing this one.
    pub fn ancestor(&self, prime: Prime, level: i64) -> Ball {
        debug_assert!(level >= self.level);
        Ball::new(prime, &self.key, level)
    }

    /// The `p` sub-balls one level down, in key order.
    pub fn children(&self, prime: Prime) -> Vec<Ball> {
        self.descendants(prime, self.level - 1)
    }

    /// All sub-balls at level `level <= self.level`, in key order.
    pub fn descendants(&self, prime: Prime, level: i64) -> Vec<Ball> {
        let depth = (self.level - level) as u32;
        let step = prime.pow_rat(-self.level);
        let count = prime
            .pow(depth)
            .to_u64()
            .expect("descendant count fits u64");
        let mut out: Vec<Ball> = (0..count)
            .map(|j| Ball {
                level,
                key: &self.key + &step * BigRational::from_integer(BigInt::from(j)),
            })
            .collect();
        out.sort();
        out
    }

    /// Image of the ball under `x -> p^k x`.
    pub fn scaled(&self, prime: Prime, k: i64) -> Ball {
        Ball::new(prime, &(&self.key * prime.pow_rat(k)), self.level - k)
    }
}

impl PartialOrd for Ball {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ball {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .cmp(&other.key)
            .then_with(|| other.level.cmp(&self.level))
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B({}, {})", fmt_rational(&self.key), self.level)
    }
}

/// Compact open subset of `Q_p`: a finite union of pairwise disjoint balls.
///
/// Balls are kept maximal (no complete set of `p` siblings survives) and in
/// key order, so two equal sets have equal representations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompactDomain {
    prime: Prime,
    balls: Vec<Ball>,
}

impl CompactDomain {
    pub fn empty(prime: Prime) -> Self {
        CompactDomain {
            prime,
            balls: Vec::new(),
        }
    }

    /// `Z_p`.
    pub fn integers(prime: Prime) -> Self {
        Self::ball(prime, &BigRational::zero(), 0)
    }

    pub fn ball(prime: Prime, center: &BigRational, level: i64) -> Self {
        CompactDomain {
            prime,
            balls: vec![Ball::new(prime, center, level)],
        }
    }

    /// Union of arbitrary (possibly overlapping) balls.
    pub fn from_balls(prime: Prime, balls: impl IntoIterator<Item = Ball>) -> Self {
        let mut out = Self::empty(prime);
        for b in balls {
            out.insert(b);
        }
        out.normalize();
        out
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    /// Coarsest level `s` at which the domain is a union of level-`s` balls.
    pub fn base_level(&self) -> i64 {
        self.balls.iter().map(Ball::level).min().unwrap_or(0)
    }

    /// `mu(X) = sum p^{t_i}`, exactly.
    pub fn measure(&self) -> BigRational {
        self.balls
            .iter()
            .map(|b| self.prime.pow_rat(b.level))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// `m(t) = mu(X) / p^t`.
    pub fn count_at(&self, t: i64) -> BigInt {
        (self.measure() / self.prime.pow_rat(t)).to_integer()
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.balls.iter().any(|b| b.contains_point(self.prime, x))
    }

    pub fn contains_ball(&self, ball: &Ball) -> bool {
        self.balls.iter().any(|b| b.contains(self.prime, ball))
    }

    pub fn union(&self, other: &CompactDomain) -> CompactDomain {
        let mut out = self.clone();
        for b in &other.balls {
            out.insert(b.clone());
        }
        out.normalize();
        out
    }

    pub fn difference(&self, other: &CompactDomain) -> CompactDomain {
        let p = self.prime;
        let mut balls = self.balls.clone();
        for hole in &other.balls {
            balls = balls
                .into_iter()
                .flat_map(|d| subtract_ball(p, d, hole))
                .collect();
        }
        let mut out = CompactDomain { prime: p, balls };
        out.normalize();
        out
    }

    /// Image under `x -> p^k x`.
    pub fn scaled(&self, k: i64) -> CompactDomain {
        let mut out = CompactDomain {
            prime: self.prime,
            balls: self.balls.iter().map(|b| b.scaled(self.prime, k)).collect(),
        };
        out.normalize();
        out
    }

    /// Smallest `k >= 0` with `X ⊆ B_{p^k}(0)`.
    pub fn integral_frame_shift(&self) -> i64 {
        self.balls
            .iter()
            .map(|b| {
                let kv = match self.prime.valuation(&b.key) {
                    ExtInt::Finite(v) => -v,
                    _ => i64::MIN,
                };
                b.level.max(kv)
            })
            .max()
            .unwrap_or(0)
            .max(0)
    }

    /// The level-`t` balls of `X` in key order, capped at [`DEFAULT_BALL_CAP`].
    pub fn decompose(&self, t: i64) -> Result<Vec<Ball>> {
        self.decompose_capped(t, DEFAULT_BALL_CAP)
    }

    pub fn decompose_capped(&self, t: i64, cap: usize) -> Result<Vec<Ball>> {
        let base = self.base_level();
        if t > base {
            return Err(Error::LevelTooCoarse {
                level: t,
                max: base,
            });
        }
        let count = self.count_at(t);
        if count > BigInt::from(cap) {
            return Err(Error::TooManyBalls {
                count: count.to_string(),
                cap,
            });
        }
        let mut out: Vec<Ball> = self
            .balls
            .iter()
            .flat_map(|b| b.descendants(self.prime, t))
            .collect();
        out.sort();
        Ok(out)
    }

    pub fn representatives(&self, t: i64) -> Result<RepresentativeSystem> {
        let points = self
            .decompose(t)?
            .into_iter()
            .map(|b| {
                let k = b.key.clone();
                (b, k)
            })
            .collect();
        Ok(RepresentativeSystem { level: t, points })
    }

    /// The level-`t` ball of `X` containing `x`.
    pub fn locate(&self, x: &BigRational, t: i64) -> Result<Ball> {
        let base = self.base_level();
        if t > base {
            return Err(Error::LevelTooCoarse {
                level: t,
                max: base,
            });
        }
        if self.contains(x) {
            return Ok(Ball::new(self.prime, x, t));
        }
        let distance_exponent = self
            .balls
            .iter()
            .filter_map(|b| self.prime.norm_exponent(&(x - &b.key)).finite())
            .min()
            .unwrap_or(i64::MAX);
        Err(Error::NotInDomain { distance_exponent })
    }

    fn insert(&mut self, ball: Ball) {
        let p = self.prime;
        if self.balls.iter().any(|b| b.contains(p, &ball)) {
            return;
        }
        self.balls.retain(|b| !ball.contains(p, b));
        self.balls.push(ball);
    }

    /// Merges complete sibling sets bottom-up and sorts.
    fn normalize(&mut self) {
        let p = self.prime;
        loop {
            let mut groups: BTreeMap<Ball, usize> = BTreeMap::new();
            for b in &self.balls {
                *groups.entry(b.ancestor(p, b.level + 1)).or_default() += 1;
            }
            let full: Vec<Ball> = groups
                .into_iter()
                .filter(|(_, n)| *n as u64 == p.get() as u64)
                .map(|(parent, _)| parent)
                .collect();
            if full.is_empty() {
                break;
            }
            for parent in full {
                self.balls
                    .retain(|b| !(b.level == parent.level - 1 && parent.contains(p, b)));
                self.balls.push(parent);
            }
        }
        self.balls.sort();
    }
}

fn subtract_ball(p: Prime, d: Ball, hole: &Ball) -> Vec<Ball> {
    if hole.contains(p, &d) {
        return Vec::new();
    }
    if !d.contains(p, hole) {
        return vec![d];
    }
    let mut out = Vec::new();
    let mut cur = d;
    while cur.level > hole.level {
        let mut next = None;
        for c in cur.children(p) {
            if c.contains(p, hole) {
                next = Some(c);
            } else {
                out.push(c);
            }
        }
        cur = next.expect("one child contains the hole");
    }
    out
}

impl fmt::Display for CompactDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.balls.is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<String> = self.balls.iter().map(Ball::to_string).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// One canonical representative per level-`t` ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentativeSystem {
    pub level: i64,
    pub points: BTreeMap<Ball, BigRational>,
}

impl RepresentativeSystem {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &BigRational> {
        self.points.values()
    }
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

    fn keys(balls: &[Ball]) -> Vec<i64> {
        balls
            .iter()
            .map(|b| b.key().to_integer().try_into().unwrap())
            .collect()
    }

    fn example_33(p7: Prime) -> CompactDomain {
        CompactDomain::ball(p7, &q(2), -1).union(&CompactDomain::ball(p7, &q(5), -1))
    }

    #[test]
    fn decompose_two_balls_mod_49() {
        let p7 = p(7);
        let x = example_33(p7);
        let balls = x.decompose(-2).unwrap();
        assert_eq!(balls.len(), 14);
        let mut got = keys(&balls);
        got.sort();
        let mut want = vec![2, 9, 16, 23, 30, 37, 44, 5, 12, 19, 26, 33, 40, 47];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn decompose_integers_and_punctured_domain() {
        let p3 = p(3);
        let z3 = CompactDomain::integers(p3);
        assert_eq!(keys(&z3.decompose(-1).unwrap()), vec![0, 1, 2]);
        let x = z3
            .difference(&CompactDomain::ball(p3, &q(4), -2))
            .difference(&CompactDomain::ball(p3, &q(5), -2));
        assert_eq!(x.base_level(), -2);
        assert_eq!(keys(&x.decompose(-2).unwrap()), vec![0, 1, 2, 3, 6, 7, 8]);
        // sibling balls 0, 3, 6 are merged back into B(0, -1)
        assert!(x.balls().contains(&Ball::new(p3, &q(0), -1)));
        assert!(matches!(
            x.decompose(-1),
            Err(Error::LevelTooCoarse { level: -1, max: -2 })
        ));
    }

    #[test]
    fn representatives_are_nested() {
        let p3 = p(3);
        let z3 = CompactDomain::integers(p3);
        let s3 = z3.representatives(-3).unwrap();
        let pts: Vec<BigRational> = s3.points().cloned().collect();
        assert_eq!(pts, (0..27).map(q).collect::<Vec<_>>());
        let s2 = z3.representatives(-2).unwrap();
        for a in s2.points() {
            assert!(pts.contains(a));
        }
        let single = CompactDomain::ball(p(7), &q(2), -1)
            .representatives(-1)
            .unwrap();
        assert_eq!(single.points().cloned().collect::<Vec<_>>(), vec![q(2)]);
        assert_eq!(Ball::new(p3, &q(0), -1).ancestor(p3, -1).key(), &q(0));
    }

    #[test]
    fn locate_examples() {
        let p7 = p(7);
        let x = example_33(p7);
        assert_eq!(x.locate(&q(51), -2).unwrap(), Ball::new(p7, &q(2), -2));
        assert_eq!(x.locate(&q(47), -2).unwrap().key(), &q(47));
        assert!(matches!(
            x.locate(&q(3), -2),
            Err(Error::NotInDomain {
                distance_exponent: 0
            })
        ));
    }

    #[test]
    fn empty_difference_and_measure() {
        let p3 = p(3);
        let z3 = CompactDomain::integers(p3);
        assert!(z3.difference(&z3).is_empty());
        let x = example_33(p(7));
        assert_eq!(x.measure(), BigRational::new(2.into(), 7.into()));
        assert_eq!(x.count_at(-3), BigInt::from(98));
    }

    #[test]
    fn decomposition_cap() {
        let z2 = CompactDomain::integers(p(2));
        assert!(matches!(
            z2.decompose_capped(-5, 16),
            Err(Error::TooManyBalls { .. })
        ));
    }

    #[test]
    fn non_integral_balls() {
        let p3 = p(3);
        let b = CompactDomain::ball(p3, &BigRational::new(1.into(), 3.into()), -1);
        assert_eq!(b.integral_frame_shift(), 1);
        let scaled = b.scaled(1);
        assert_eq!(scaled.balls(), &[Ball::new(p3, &q(1), -2)]);
        assert_eq!(CompactDomain::ball(p3, &q(0), 2).integral_frame_shift(), 2);
        assert_eq!(CompactDomain::integers(p3).integral_frame_shift(), 0);
    }
}
