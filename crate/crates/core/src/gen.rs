//! Seeded random assemblies for property checks and benchmarks.

use num_bigint::BigInt;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Assembly, FiniteDistribution, Rational};

/// Shape of the generated distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub max_atoms: usize,
    /// Masses are `k / D` with `D <= max_mass_den`.
    pub max_mass_den: u32,
    /// Values are drawn from `{ j / value_den : 0 <= j <= value_steps }`.
    pub value_den: u32,
    pub value_steps: u32,
}

impl Default for Shape {
    fn default() -> Self {
        Self {
            max_atoms: 6,
            max_mass_den: 64,
            value_den: 4,
            value_steps: 40,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random masses: a composition of a random denominator into `k` positive parts.
pub fn random_masses(rng: &mut impl Rng, k: usize, max_den: u32) -> Vec<Rational> {
    assert!(
        k >= 1 && k as u32 <= max_den,
        "cannot split {max_den} into {k} parts"
    );
    let den = rng.random_range(k as u32..=max_den);
    let mut cuts: Vec<u32> = sample(rng, den as usize - 1, k - 1)
        .into_iter()
        .map(|c| c as u32 + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(den);
    let mut prev = 0;
    cuts.into_iter()
        .map(|c| {
            let part = c - prev;
            prev = c;
            Rational::new(BigInt::from(part), BigInt::from(den))
        })
        .collect()
}

pub fn random_distribution(rng: &mut impl Rng, shape: &Shape) -> FiniteDistribution {
    let grid = shape.value_steps as usize + 1;
    let k = rng.random_range(1..=shape.max_atoms.min(grid).min(shape.max_mass_den as usize));
    let masses = random_masses(rng, k, shape.max_mass_den);
    let atoms = sample(rng, grid, k)
        .into_iter()
        .zip(masses)
        .map(|(j, m)| {
            (
                Rational::new(BigInt::from(j), BigInt::from(shape.value_den)),
                m,
            )
        })
        .collect();
    FiniteDistribution::new(atoms).expect("generated distribution is valid")
}

pub fn random_assembly(rng: &mut impl Rng, n: usize, shape: &Shape) -> Assembly {
    Assembly::new((0..n).map(|_| random_distribution(rng, shape)).collect()).expect("n >= 1")
}

/// Two-point members on `{0, b}` with random masses at zero.
pub fn random_two_point(rng: &mut impl Rng, n: usize, b: &Rational, max_den: u32) -> Assembly {
    let members = (0..n)
        .map(|_| {
            let den = rng.random_range(2..=max_den);
            let k = rng.random_range(1..den);
            FiniteDistribution::two_point(Rational::new(k.into(), den.into()), b.clone())
                .expect("valid two-point law")
        })
        .collect();
    Assembly::new(members).expect("n >= 1")
}
