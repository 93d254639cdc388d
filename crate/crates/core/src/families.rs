//! The nested hierarchy of beacon-period set families F1 ⊃ F2 ⊃ F3 ⊃ F4,
//! GCD normalization, the randomized samplers used by the experiment
//! campaigns, and the uniform configuration distribution.
//!
//! - F1: any finite set of positive integers.
//! - F2: `max(B) = LCM(B)`.
//! - F3: every element is a multiple of each smaller element.
//! - F4: all elements are `k·c^e` for a common base `c` and coefficient `k`.
//!
//! All samplers draw uniform integers from the stated ranges in the order
//! documented on each function, so a fixed seed reproduces the same sets on
//! any platform.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::model::{enumerate_configurations, BpSet, ConfigProbabilityMap, ModelError};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("sampler exhausted {0} attempts without a valid draw")]
    SamplingExhausted(u32),
}

/// The most specific family containing a BP set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FamilyTag {
    F1,
    F2,
    F3,
    F4,
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyTag::F1 => "F1",
            FamilyTag::F2 => "F2",
            FamilyTag::F3 => "F3",
            FamilyTag::F4 => "F4",
        };
        f.write_str(s)
    }
}

/// Divides a raw period set by its GCD; returns the normalized set and the
/// factored-out divisor. A schedule for the normalized set is equivalent to
/// one for the original set with the slot length scaled by the divisor.
pub fn gcd_normalize(raw: &[u64]) -> Result<(BpSet, u64), ModelError> {
    let bp = BpSet::new(raw)?;
    let (normalized, d) = bp.normalized();
    Ok((normalized, d))
}

pub fn is_f2(bp: &BpSet) -> bool {
    bp.max_period() == bp.lcm()
}

pub fn is_f3(bp: &BpSet) -> bool {
    bp.periods().windows(2).all(|w| w[1] % w[0] == 0)
}

pub fn is_f4(bp: &BpSet) -> bool {
    // Dividing k·c^{e_i} by the GCD k·c^{e_min} leaves {c^{e_i - e_min}}:
    // the smallest element becomes 1 and the rest powers of one base.
    let (normalized, _) = bp.normalized();
    let p = normalized.periods();
    if p[0] != 1 {
        return false;
    }
    if p.len() == 1 {
        return true;
    }
    let base = primitive_base(p[1]);
    p[1..].iter().all(|&b| is_power_of(b, base))
}

/// Returns the deepest family tag whose predicate holds.
pub fn classify(bp: &BpSet) -> FamilyTag {
    if is_f2(bp) {
        if is_f3(bp) {
            if is_f4(bp) {
                return FamilyTag::F4;
            }
            return FamilyTag::F3;
        }
        return FamilyTag::F2;
    }
    FamilyTag::F1
}

/// Smallest integer `p > 1` such that `n` is a power of `p`.
fn primitive_base(n: u64) -> u64 {
    debug_assert!(n >= 2);
    let factors = factorize(n);
    let g = factors
        .iter()
        .fold(0u32, |acc, &(_, e)| num_integer::gcd(acc, e));
    factors
        .iter()
        .map(|&(p, e)| p.pow(e / g))
        .product()
}

fn is_power_of(mut n: u64, base: u64) -> bool {
    debug_assert!(base >= 2);
    while n % base == 0 {
        n /= base;
    }
    n == 1
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

/// Knobs for the F1 sampler. Defaults follow the numeric study; the
/// simulation study uses larger periods.
#[derive(Debug, Clone, Copy)]
pub struct F1SamplerConfig {
    pub size_range: (u32, u32),
    pub value_range: (u64, u64),
}

impl F1SamplerConfig {
    /// Numeric-study preset: sizes 3..=6, periods 1..=10.
    pub fn numeric() -> Self {
        F1SamplerConfig {
            size_range: (3, 6),
            value_range: (1, 10),
        }
    }

    /// Simulation-study preset: cardinality capped at 6, periods up to 128.
    pub fn simulation() -> Self {
        F1SamplerConfig {
            size_range: (3, 6),
            value_range: (1, 128),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct F2SamplerConfig {
    pub max_lcm: (u64, u64),
    pub card_range: (u32, u32),
    pub max_attempts: u32,
}

impl F2SamplerConfig {
    /// Numeric-study preset: LCM drawn from 1..=256, cardinality 3..=8.
    pub fn numeric() -> Self {
        F2SamplerConfig {
            max_lcm: (1, 256),
            card_range: (3, 8),
            max_attempts: 1000,
        }
    }

    /// Simulation-study preset: periods up to 128, cardinality capped at 6.
    pub fn simulation() -> Self {
        F2SamplerConfig {
            max_lcm: (1, 128),
            card_range: (3, 6),
            max_attempts: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct F3SamplerConfig {
    pub size_range: (u32, u32),
    pub factor_range: (u64, u64),
    /// Whole-set rejection cap on `max(B)`; `None` accepts any chain.
    pub max_period: Option<u64>,
}

impl F3SamplerConfig {
    /// Numeric-study preset: sizes 2..=6, chain factors 2..=16, uncapped.
    pub fn numeric() -> Self {
        F3SamplerConfig {
            size_range: (2, 6),
            factor_range: (2, 16),
            max_period: None,
        }
    }
}

/// Draws an F1 set: size uniform from `size_range`, then that many periods
/// uniform from `value_range` (in that order), duplicates merged, the
/// result divided by its GCD. Whole draws with fewer than `size_range.0`
/// distinct periods are discarded and redrawn.
pub fn sample_f1<R: Rng>(rng: &mut R, cfg: &F1SamplerConfig) -> BpSet {
    loop {
        let size = rng.random_range(cfg.size_range.0..=cfg.size_range.1);
        let raw: Vec<u64> = (0..size)
            .map(|_| rng.random_range(cfg.value_range.0..=cfg.value_range.1))
            .collect();
        let bp = BpSet::new(&raw).expect("nonempty positive draw").normalized().0;
        if bp.len() >= cfg.size_range.0 as usize {
            return bp;
        }
    }
}

/// Draws an F2 set: a target LCM `m` uniform from `max_lcm`, a cardinality
/// `k` uniform from `card_range`, then `k-1` distinct divisors of `m`
/// besides `m` itself (uniform index draws into the shrinking candidate
/// list). Draws whose GCD is not 1, or where `m` has too few divisors, are
/// rejected; the whole procedure retries up to `max_attempts` times.
pub fn sample_f2<R: Rng>(rng: &mut R, cfg: &F2SamplerConfig) -> Result<BpSet, FamilyError> {
    for _ in 0..cfg.max_attempts {
        let m = rng.random_range(cfg.max_lcm.0..=cfg.max_lcm.1);
        let k = rng.random_range(cfg.card_range.0..=cfg.card_range.1) as usize;
        let mut candidates = divisors(m);
        if candidates.len() < k {
            continue;
        }
        candidates.pop(); // m itself is always included
        let mut picked = vec![m];
        for _ in 0..k - 1 {
            let i = rng.random_range(0..candidates.len());
            picked.push(candidates.swap_remove(i));
        }
        let g = picked.iter().fold(0u64, |acc, &b| num_integer::gcd(acc, b));
        if g != 1 {
            continue;
        }
        let bp = BpSet::new(&picked).expect("nonempty positive draw");
        debug_assert!(is_f2(&bp));
        return Ok(bp);
    }
    Err(FamilyError::SamplingExhausted(cfg.max_attempts))
}

/// Draws an F3 set as a divisor chain `{1, x₁, x₁x₂, …}`: size uniform from
/// `size_range`, then the chain factors uniform from `factor_range` (in
/// that order). Chains exceeding `max_period` are redrawn whole.
pub fn sample_f3<R: Rng>(rng: &mut R, cfg: &F3SamplerConfig) -> BpSet {
    loop {
        let size = rng.random_range(cfg.size_range.0..=cfg.size_range.1);
        let mut chain = vec![1u64];
        let mut b = 1u64;
        for _ in 1..size {
            b *= rng.random_range(cfg.factor_range.0..=cfg.factor_range.1);
            chain.push(b);
        }
        if let Some(cap) = cfg.max_period {
            if b > cap {
                continue;
            }
        }
        let bp = BpSet::new(&chain).expect("nonempty positive draw");
        debug_assert!(is_f3(&bp));
        return bp;
    }
}

/// The uniform configuration distribution `P_κ = 1/(b_κ·|B|·|C|)`, stored
/// exactly as integer weights `LCM(B)/b_κ` over the common denominator
/// `LCM(B)·|B|·|C|`.
pub fn uniform_probabilities(
    bp: &BpSet,
    num_channels: u32,
) -> Result<ConfigProbabilityMap, ModelError> {
    let lcm = bp.lcm() as u128;
    let denom = lcm * bp.len() as u128 * num_channels as u128;
    let weights: HashMap<_, _> = enumerate_configurations(bp, num_channels)?
        .into_iter()
        .map(|k| (k, lcm / k.period as u128))
        .collect();
    ConfigProbabilityMap::from_weights(bp, num_channels, weights, denom)
}
