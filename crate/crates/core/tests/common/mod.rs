//! Brute-force oracles over residues mod p^k, independent of the library's
//! ball and digraph code.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::rngs::StdRng;
use rand::Rng;

use padyn_core::{Polynomial, Prime, RationalMap};

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn map(p: u64, num: &[i64], den: &[i64]) -> RationalMap {
    let p = Prime::new(p).unwrap();
    RationalMap::new(p, &Polynomial::from_ints(num), &Polynomial::from_ints(den)).unwrap()
}

/// `v_p(x)`, or `None` for zero.
pub fn val(p: u64, x: &BigRational) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let count = |mut n: BigInt| {
        let mut k = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            k += 1;
        }
        k
    };
    Some(count(x.numer().clone()) - count(x.denom().clone()))
}

/// `x mod p^k` for p-integral `x`, via an inverse of the denominator from
/// the extended gcd.
pub fn residue(p: u64, x: &BigRational, k: u32) -> Option<u64> {
    let m = BigInt::from(p).pow(k);
    let d = x.denom().mod_floor(&m);
    let e = d.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    let r = (x.numer() * e.x).mod_floor(&m);
    r.to_u64()
}

/// Functional graph of `f` on `Z/p^k`, one entry per residue, or `None`
/// if some residue maps outside `Z_p` or to a pole.
pub fn residue_images(f: &RationalMap, k: u32) -> Option<Vec<u64>> {
    let p = f.prime().get() as u64;
    let n = p.pow(k);
    (0..n)
        .map(|r| {
            let y = f.eval(&rat(r as i64))?;
            residue(p, &y, k)
        })
        .collect()
}

/// Edges of the level `-t` graph read off from finer residues:
/// every residue of a class must land in one class, else `None`.
pub fn brute_level_graph(p: u64, images: &[u64], t: u32) -> Option<Vec<u64>> {
    let coarse = p.pow(t);
    let mut edges = vec![u64::MAX; coarse as usize];
    for (r, &y) in images.iter().enumerate() {
        let (a, b) = (r as u64 % coarse, y % coarse);
        let slot = &mut edges[a as usize];
        if *slot == u64::MAX {
            *slot = b;
        } else if *slot != b {
            return None;
        }
    }
    Some(edges)
}

/// Whether every level `-t` class has preimage measure `p^-t`, counting
/// residues mod `p^k`.
pub fn preimage_measures_exact(p: u64, images: &[u64], k: u32, t: u32) -> bool {
    let coarse = p.pow(t);
    let mut count = vec![0u64; coarse as usize];
    for &y in images {
        count[(y % coarse) as usize] += 1;
    }
    count.iter().all(|&c| c == p.pow(k - t))
}

/// Random polynomial with coefficients in `[-bound, bound]` and degree at most `deg`.
pub fn random_poly(rng: &mut StdRng, deg: usize, bound: i64) -> Polynomial {
    let d = rng.gen_range(0..=deg);
    let coeffs: Vec<i64> = (0..=d).map(|_| rng.gen_range(-bound..=bound)).collect();
    Polynomial::from_ints(&coeffs)
}

/// Random integer with `digits` base-p digits, i.e. uniform in `[0, p^digits)`.
pub fn random_digits(rng: &mut StdRng, p: u64, digits: u32) -> BigInt {
    let mut x = BigInt::zero();
    for _ in 0..digits {
        x = x * p + rng.gen_range(0..p);
    }
    x
}
