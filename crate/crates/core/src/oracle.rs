//! Independent ground truth for `E[max]`: exhaustive enumeration of the
//! product space and seeded Monte Carlo.
//!
//! Neither path touches CDFs or survival integrals, so agreement with
//! [`dist::expected_max`](crate::dist::expected_max) is a real check.
//!
//! # Monte Carlo generator
//!
//! Uniforms come from SplitMix64 used as a counter-based generator: the
//! `k`-th output for a seed is `mix(seed + k * 0x9E3779B97F4A7C15)` (wrapping),
//! where `mix` is the SplitMix64 finalizer
//!
//! ```text
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z =  z ^ (z >> 31)
//! ```
//!
//! and the uniform is `(out >> 11) * 2^-53`. Sample `s` of member `i` in an
//! `n`-member assembly uses counter `k = s * n + i + 1`. Each member is drawn
//! by inverse CDF: the smallest atom whose cumulative mass exceeds the
//! uniform.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Assembly, Error, Rational, Result};

/// Default cap on the number of enumerated outcomes.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_2: u64 = 0x94D0_49BB_1331_11EB;

/// Result of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(samples)`.
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// `|mean - exact| <= k * stderr`.
    pub fn within(&self, exact: f64, k: f64) -> bool {
        (self.mean - exact).abs() <= k * self.stderr
    }
}

/// Exact `E[max]` by summing `(prod masses) * max(values)` over every outcome.
pub fn enumerate_expected_max(a: &Assembly) -> Result<Rational> {
    enumerate_expected_max_with_cap(a, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_expected_max_with_cap(a: &Assembly, cap: u128) -> Result<Rational> {
    let outcomes = a
        .members()
        .iter()
        .try_fold(1u128, |acc, d| acc.checked_mul(d.len() as u128))
        .unwrap_or(u128::MAX);
    if outcomes > cap {
        return Err(Error::CapExceeded {
            what: "enumerated outcomes",
            count: outcomes,
            cap,
        });
    }

    // Integer form: values over one common denominator, each member's masses
    // over its own.
    let value_den = a
        .members()
        .iter()
        .flat_map(|d| d.values())
        .fold(BigInt::one(), |l, v| l.lcm(v.denom()));
    let mut mass_den_total = BigInt::one();
    let mut table: Vec<Vec<(BigInt, BigInt)>> = Vec::with_capacity(a.n());
    for d in a.members() {
        let mass_den = d
            .atoms()
            .iter()
            .fold(BigInt::one(), |l, (_, m)| l.lcm(m.denom()));
        table.push(
            d.atoms()
                .iter()
                .map(|(v, m)| {
                    (
                        v.numer() * (&value_den / v.denom()),
                        m.numer() * (&mass_den / m.denom()),
                    )
                })
                .collect(),
        );
        mass_den_total *= mass_den;
    }

    let mut total = BigInt::zero();
    walk(&table, 0, &BigInt::one(), &BigInt::zero(), &mut total);
    Ok(Rational::new(total, value_den * mass_den_total))
}

fn walk(
    table: &[Vec<(BigInt, BigInt)>],
    level: usize,
    weight: &BigInt,
    running_max: &BigInt,
    total: &mut BigInt,
) {
    if level + 1 == table.len() {
        let inner: BigInt = table[level]
            .iter()
            .map(|(v, w)| w * running_max.max(v))
            .sum();
        *total += weight * inner;
        return;
    }
    for (v, w) in &table[level] {
        walk(table, level + 1, &(weight * w), running_max.max(v), total);
    }
}

#[inline]
fn splitmix_output(seed: u64, counter: u64) -> u64 {
    let mut z = seed.wrapping_add(counter.wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(MIX_1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_2);
    z ^ (z >> 31)
}

/// Uniform on `[0, 1)` for a given seed and counter.
pub fn uniform(seed: u64, counter: u64) -> f64 {
    (splitmix_output(seed, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

struct Sampler {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Sampler {
    fn new(d: &crate::FiniteDistribution) -> Self {
        let mut acc = Rational::zero();
        let mut values = Vec::with_capacity(d.len());
        let mut cumulative = Vec::with_capacity(d.len());
        for (v, m) in d.atoms() {
            acc += m;
            values.push(v.to_f64().unwrap_or(f64::INFINITY));
            cumulative.push(acc.to_f64().unwrap_or(1.0));
        }
        Self { values, cumulative }
    }

    fn draw(&self, u: f64) -> f64 {
        let k = self.cumulative.partition_point(|c| *c <= u);
        self.values[k.min(self.values.len() - 1)]
    }
}

/// Monte Carlo estimate of `E[max]`; bit-identical for equal inputs.
pub fn mc_expected_max(a: &Assembly, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo needs at least 2 samples, got {samples}"
        )));
    }
    let samplers: Vec<Sampler> = a.members().iter().map(Sampler::new).collect();
    let n = samplers.len() as u64;
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for s in 0..samples {
        let base = s.wrapping_mul(n);
        let x = samplers
            .iter()
            .zip(0u64..)
            .map(|(sm, i)| sm.draw(uniform(seed, base.wrapping_add(i + 1))))
            .fold(0.0f64, f64::max);
        let k = (s + 1) as f64;
        let delta = x - mean;
        mean += delta / k;
        m2 += delta * (x - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok(McEstimate {
        mean,
        stderr: (var / samples as f64).sqrt(),
        samples,
        seed,
    })
}
