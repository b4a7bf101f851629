//! Finite discrete non-negative distributions, assemblies of them, and the
//! exact integrals that give expected maxima.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::step::{merged_grid, SurvivalStep};
use crate::{Error, Rational, Result, DEFAULT_ATOM_CAP};

/// Which one-sided value of a CDF to evaluate at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `F(x-)`: mass strictly below `x`.
    Left,
    /// `F(x)`: mass at or below `x`.
    Right,
}

/// Non-negative rational atoms with positive rational masses summing to one.
///
/// Atoms are kept sorted by value with no duplicates, so two distributions are
/// equal exactly when they are the same law.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteDistribution {
    atoms: Vec<(Rational, Rational)>,
}

impl FiniteDistribution {
    /// Builds a distribution from `(value, mass)` pairs in any order. Pairs
    /// with equal values are merged.
    pub fn new(atoms: Vec<(Rational, Rational)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let mut total = Rational::zero();
        for (v, m) in &atoms {
            if v.is_negative() {
                return Err(Error::NegativeValue(v.clone()));
            }
            if !m.is_positive() {
                return Err(Error::NonPositiveMass(m.clone()));
            }
            total += m;
        }
        if !total.is_one() {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self {
            atoms: merge_sorted(atoms),
        })
    }

    /// Like [`new`](Self::new) but rescales positive weights to sum to one.
    pub fn from_weights(atoms: Vec<(Rational, Rational)>) -> Result<Self> {
        let total: Rational = atoms.iter().map(|(_, w)| w.clone()).sum();
        if !total.is_positive() {
            return Err(Error::NonPositiveMass(total));
        }
        Self::new(atoms.into_iter().map(|(v, w)| (v, w / &total)).collect())
    }

    pub fn point(value: Rational) -> Result<Self> {
        Self::new(vec![(value, Rational::one())])
    }

    /// Mass `p0` at zero and `1 - p0` at `value`.
    pub fn two_point(p0: Rational, value: Rational) -> Result<Self> {
        let mut atoms = Vec::with_capacity(2);
        if p0.is_positive() {
            atoms.push((Rational::zero(), p0.clone()));
        }
        let rest = Rational::one() - p0;
        if rest.is_positive() {
            atoms.push((value, rest));
        }
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[(Rational, Rational)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = &Rational> {
        self.atoms.iter().map(|(v, _)| v)
    }

    pub fn min_value(&self) -> &Rational {
        &self.atoms[0].0
    }

    pub fn max_value(&self) -> &Rational {
        &self.atoms[self.atoms.len() - 1].0
    }

    pub fn is_point_mass(&self) -> bool {
        self.atoms.len() == 1
    }

    pub fn cdf(&self, x: &Rational, side: Side) -> Rational {
        self.atoms
            .iter()
            .take_while(|(v, _)| match side {
                Side::Right => v <= x,
                Side::Left => v < x,
            })
            .map(|(_, m)| m.clone())
            .sum()
    }

    pub fn expected_value(&self) -> Rational {
        self.atoms.iter().map(|(v, m)| v * m).sum()
    }

    /// Total mass on atoms satisfying `pred`.
    pub fn mass_where(&self, mut pred: impl FnMut(&Rational) -> bool) -> Rational {
        self.atoms
            .iter()
            .filter(|(v, _)| pred(v))
            .map(|(_, m)| m.clone())
            .sum()
    }

    /// `E[X | lo <= X <= hi]`, or `None` when that event has no mass.
    pub fn conditional_mean(&self, lo: &Rational, hi: &Rational) -> Option<Rational> {
        let inside = self.atoms.iter().filter(|(v, _)| v >= lo && v <= hi);
        let (mass, moment) = inside.fold((Rational::zero(), Rational::zero()), |(m, s), (v, p)| {
            (m + p, s + v * p)
        });
        mass.is_positive().then(|| moment / mass)
    }

    pub fn step(&self) -> SurvivalStep {
        SurvivalStep::from_distribution(self)
    }
}

fn merge_sorted(mut atoms: Vec<(Rational, Rational)>) -> Vec<(Rational, Rational)> {
    atoms.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(atoms.len());
    for (v, m) in atoms {
        match out.last_mut() {
            Some((lv, lm)) if *lv == v => *lm += m,
            _ => out.push((v, m)),
        }
    }
    out
}

impl fmt::Display for FiniteDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, m)) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}:{m}")?;
        }
        f.write_str("}")
    }
}

/// `n` independent non-negative variables. `n` is both the member count and
/// the exponent in every `M_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assembly {
    members: Vec<FiniteDistribution>,
}

impl Assembly {
    pub fn new(members: Vec<FiniteDistribution>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyAssembly);
        }
        Ok(Self { members })
    }

    /// The similar assembly: `n` copies of `d`.
    pub fn copies(d: &FiniteDistribution, n: usize) -> Result<Self> {
        Self::new(vec![d.clone(); n])
    }

    pub fn n(&self) -> usize {
        self.members.len()
    }

    /// `n` as the exponent type used by the power-based operations.
    pub fn exponent(&self) -> u32 {
        u32::try_from(self.members.len()).expect("assembly size fits in u32")
    }

    pub fn members(&self) -> &[FiniteDistribution] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &FiniteDistribution {
        &self.members[i]
    }

    pub fn into_members(self) -> Vec<FiniteDistribution> {
        self.members
    }

    /// Copy with member `i` replaced.
    pub fn with_member(&self, i: usize, d: FiniteDistribution) -> Self {
        let mut members = self.members.clone();
        members[i] = d;
        Self { members }
    }

    /// Law of `max_{k != i} X_k`; a point mass at zero when `n == 1`.
    pub fn max_of_others(&self, i: usize) -> FiniteDistribution {
        let others: Vec<SurvivalStep> = self
            .members
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, d)| d.step())
            .collect();
        if others.is_empty() {
            return FiniteDistribution::point(Rational::zero()).expect("point mass");
        }
        SurvivalStep::product(&others).to_distribution()
    }

    /// Sorted union of all member supports.
    pub fn merged_support(&self) -> Vec<Rational> {
        let per_member: Vec<Vec<Rational>> = self
            .members
            .iter()
            .map(|d| d.values().cloned().collect())
            .collect();
        merged_grid(per_member.iter().map(Vec::as_slice))
    }

    /// Largest support point over all members.
    pub fn support_max(&self) -> Rational {
        self.members
            .iter()
            .map(|d| d.max_value().clone())
            .max()
            .expect("non-empty assembly")
    }

    pub fn is_similar(&self) -> bool {
        self.members.windows(2).all(|w| w[0] == w[1])
    }
}

/// `F(x)` or `F(x-)`.
pub fn cdf(d: &FiniteDistribution, x: &Rational, side: Side) -> Rational {
    d.cdf(x, side)
}

pub fn expected_value(d: &FiniteDistribution) -> Rational {
    d.expected_value()
}

/// Exact `E[max_i X_i]` as the survival integral of the product CDF.
pub fn expected_max(a: &Assembly) -> Rational {
    expected_max_of(a.members())
}

/// Exact `E[max]` of independent variables with the given laws (any count).
pub fn expected_max_of<'a>(members: impl IntoIterator<Item = &'a FiniteDistribution>) -> Rational {
    let steps: Vec<SurvivalStep> = members.into_iter().map(FiniteDistribution::step).collect();
    SurvivalStep::product(&steps).survival_integral()
}

/// `M = E[max of n independent copies of d]`.
///
/// # Panics
/// If `n == 0`.
pub fn similar_max_mean(d: &FiniteDistribution, n: u32) -> Rational {
    assert!(n >= 1, "similar_max_mean needs n >= 1");
    d.step().pow(n).survival_integral()
}

/// `M_1, ..., M_n` of an assembly.
pub fn m_list(a: &Assembly) -> Vec<Rational> {
    let n = a.exponent();
    a.members().iter().map(|d| similar_max_mean(d, n)).collect()
}

/// Equally weighted mixture of the members.
pub fn mixture(a: &Assembly) -> FiniteDistribution {
    let n = Rational::from_integer(BigInt::from(a.n()));
    let atoms = a
        .members()
        .iter()
        .flat_map(|d| d.atoms().iter().map(|(v, m)| (v.clone(), m / &n)))
        .collect();
    FiniteDistribution::new(atoms).expect("mixture of valid distributions is valid")
}

/// A CDF on `[0, inf)` that can be evaluated exactly from both sides.
pub trait CdfEvaluator {
    /// `F(x)`.
    fn cdf(&self, x: &Rational) -> Rational;
    /// `F(x-)`; continuous laws return `cdf(x)`.
    fn cdf_left(&self, x: &Rational) -> Rational;
}

impl CdfEvaluator for FiniteDistribution {
    fn cdf(&self, x: &Rational) -> Rational {
        FiniteDistribution::cdf(self, x, Side::Right)
    }

    fn cdf_left(&self, x: &Rational) -> Rational {
        FiniteDistribution::cdf(self, x, Side::Left)
    }
}

impl CdfEvaluator for SurvivalStep {
    fn cdf(&self, x: &Rational) -> Rational {
        self.value_at(x)
    }

    fn cdf_left(&self, x: &Rational) -> Rational {
        self.left_limit(x)
    }
}

/// Uniform law on `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct UniformCdf {
    lo: Rational,
    hi: Rational,
}

impl UniformCdf {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo.is_negative() || lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "uniform support [{lo}, {hi}] must satisfy 0 <= lo < hi"
            )));
        }
        Ok(Self { lo, hi })
    }
}

impl CdfEvaluator for UniformCdf {
    fn cdf(&self, x: &Rational) -> Rational {
        if *x <= self.lo {
            Rational::zero()
        } else if *x >= self.hi {
            Rational::one()
        } else {
            (x - &self.lo) / (&self.hi - &self.lo)
        }
    }

    fn cdf_left(&self, x: &Rational) -> Rational {
        self.cdf(x)
    }
}

/// Adapter for a continuous CDF given as a closure.
pub struct ContinuousCdf<F>(pub F);

impl<F: Fn(&Rational) -> Rational> CdfEvaluator for ContinuousCdf<F> {
    fn cdf(&self, x: &Rational) -> Rational {
        (self.0)(x)
    }

    fn cdf_left(&self, x: &Rational) -> Rational {
        (self.0)(x)
    }
}

/// Dyadic lower approximation of a law on `[0, inf)`: the cell
/// `[(l-1)/2^m, l/2^m)` collapses onto its left end for `l = 1..=m*2^m` and
/// everything at or above `m` collapses onto `m`.
pub fn discretize(f: &impl CdfEvaluator, m: u32) -> Result<FiniteDistribution> {
    discretize_with_cap(f, m, DEFAULT_ATOM_CAP)
}

pub fn discretize_with_cap(
    f: &impl CdfEvaluator,
    m: u32,
    cap: usize,
) -> Result<FiniteDistribution> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "discretization level m must be >= 1".into(),
        ));
    }
    let cells = 1u128
        .checked_shl(m)
        .filter(|_| m < 120)
        .and_then(|s| s.checked_mul(u128::from(m)))
        .unwrap_or(u128::MAX);
    if cells.saturating_add(1) > cap as u128 {
        return Err(Error::CapExceeded {
            what: "discretization atoms",
            count: cells.saturating_add(1),
            cap: cap as u128,
        });
    }
    let cells = cells as u64;
    let scale = Rational::from_integer(BigInt::one() << m);
    let mut atoms = Vec::new();
    let mut below = f.cdf_left(&Rational::zero());
    if !below.is_zero() {
        return Err(Error::Precondition(format!(
            "CDF places mass {below} below zero"
        )));
    }
    for l in 1..=cells {
        let right = Rational::from_integer(BigInt::from(l)) / &scale;
        let upto = f.cdf_left(&right);
        let mass = &upto - &below;
        if mass.is_negative() {
            return Err(Error::Precondition("CDF evaluator is not monotone".into()));
        }
        if mass.is_positive() {
            atoms.push((Rational::from_integer(BigInt::from(l - 1)) / &scale, mass));
        }
        below = upto;
    }
    let tail = Rational::one() - &below;
    if tail.is_negative() {
        return Err(Error::Precondition(format!("CDF exceeds one ({below})")));
    }
    if tail.is_positive() {
        atoms.push((Rational::from_integer(BigInt::from(m)), tail));
    }
    FiniteDistribution::new(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{int, rat};

    fn d(atoms: &[(Rational, Rational)]) -> FiniteDistribution {
        FiniteDistribution::new(atoms.to_vec()).unwrap()
    }

    fn coin() -> FiniteDistribution {
        d(&[(int(0), rat(1, 2)), (int(1), rat(1, 2))])
    }

    #[test]
    fn constructor_rejects_invalid() {
        assert_eq!(
            FiniteDistribution::new(vec![]),
            Err(Error::EmptyDistribution)
        );
        assert!(matches!(
            FiniteDistribution::new(vec![(int(-1), int(1))]),
            Err(Error::NegativeValue(_))
        ));
        assert!(matches!(
            FiniteDistribution::new(vec![(int(1), int(0)), (int(2), int(1))]),
            Err(Error::NonPositiveMass(_))
        ));
        assert_eq!(
            FiniteDistribution::new(vec![(int(1), rat(9, 10))]),
            Err(Error::NotNormalized(rat(9, 10)))
        );
    }

    #[test]
    fn constructor_merges_and_sorts() {
        let x = d(&[
            (int(2), rat(1, 4)),
            (int(0), rat(1, 2)),
            (int(2), rat(1, 4)),
        ]);
        assert_eq!(x.atoms(), &[(int(0), rat(1, 2)), (int(2), rat(1, 2))]);
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(coin().cdf(&int(0), Side::Right), rat(1, 2));
        assert_eq!(coin().cdf(&int(1), Side::Left), rat(1, 2));
        let three = d(&[
            (int(0), rat(1, 3)),
            (int(2), rat(1, 3)),
            (int(5), rat(1, 3)),
        ]);
        assert_eq!(three.cdf(&int(3), Side::Right), rat(2, 3));
    }

    #[test]
    fn expected_value_examples() {
        assert_eq!(coin().expected_value(), rat(1, 2));
        assert_eq!(
            FiniteDistribution::point(int(3)).unwrap().expected_value(),
            int(3)
        );
        let x = d(&[
            (int(0), rat(1, 4)),
            (int(2), rat(1, 4)),
            (int(4), rat(1, 2)),
        ]);
        assert_eq!(x.expected_value(), rat(5, 2));
    }

    #[test]
    fn expected_max_examples() {
        let five = Assembly::new(vec![FiniteDistribution::point(int(5)).unwrap()]).unwrap();
        assert_eq!(expected_max(&five), int(5));
        assert_eq!(
            expected_max(&Assembly::copies(&coin(), 2).unwrap()),
            rat(3, 4)
        );
        let a = Assembly::new(vec![
            FiniteDistribution::point(int(2)).unwrap(),
            d(&[(int(0), rat(1, 2)), (int(3), rat(1, 2))]),
        ])
        .unwrap();
        assert_eq!(expected_max(&a), rat(5, 2));
    }

    #[test]
    fn similar_max_mean_examples() {
        // b (1 - p^n) for the two-point law on {0, b}
        assert_eq!(similar_max_mean(&coin(), 2), rat(3, 4));
        let p = rat(2, 5);
        let b = rat(7, 3);
        let two = FiniteDistribution::two_point(p.clone(), b.clone()).unwrap();
        for n in 1..6u32 {
            let want = &b * (int(1) - num_traits::pow(p.clone(), n as usize));
            assert_eq!(similar_max_mean(&two, n), want);
        }
        assert_eq!(
            similar_max_mean(&FiniteDistribution::point(rat(7, 2)).unwrap(), 4),
            rat(7, 2)
        );
        let three = d(&[
            (int(0), rat(1, 3)),
            (int(1), rat(1, 3)),
            (int(2), rat(1, 3)),
        ]);
        assert_eq!(similar_max_mean(&three, 2), rat(13, 9));
    }

    #[test]
    fn mixture_examples() {
        let twice = Assembly::copies(&coin(), 2).unwrap();
        assert_eq!(mixture(&twice), coin());
        let ends = Assembly::new(vec![
            FiniteDistribution::point(int(0)).unwrap(),
            FiniteDistribution::point(int(1)).unwrap(),
        ])
        .unwrap();
        assert_eq!(mixture(&ends), coin());
        let a =
            Assembly::new(vec![coin(), d(&[(int(0), rat(1, 4)), (int(2), rat(3, 4))])]).unwrap();
        assert_eq!(
            mixture(&a),
            d(&[
                (int(0), rat(3, 8)),
                (int(1), rat(1, 4)),
                (int(2), rat(3, 8))
            ])
        );
    }

    #[test]
    fn discretize_examples() {
        let three = FiniteDistribution::point(int(3)).unwrap();
        assert_eq!(
            discretize(&three, 2).unwrap(),
            FiniteDistribution::point(int(2)).unwrap()
        );
        let half = FiniteDistribution::point(rat(1, 2)).unwrap();
        assert_eq!(discretize(&half, 3).unwrap(), half);
        let u = UniformCdf::new(int(0), int(1)).unwrap();
        assert_eq!(
            discretize(&u, 1).unwrap(),
            d(&[(int(0), rat(1, 2)), (rat(1, 2), rat(1, 2))])
        );
    }

    #[test]
    fn discretize_respects_cap_and_level() {
        let u = UniformCdf::new(int(0), int(1)).unwrap();
        assert!(matches!(discretize(&u, 16), Err(Error::CapExceeded { .. })));
        assert!(matches!(
            discretize(&u, 200),
            Err(Error::CapExceeded { .. })
        ));
        assert!(matches!(discretize(&u, 0), Err(Error::InvalidArgument(_))));
        assert!(discretize_with_cap(&u, 3, 24).is_err());
        assert!(discretize_with_cap(&u, 3, 25).is_ok());
    }

    #[test]
    fn discretize_grid_atoms_use_left_limits() {
        // an atom on a grid point stays in its own cell
        let x = d(&[(rat(1, 4), rat(1, 2)), (int(1), rat(1, 2))]);
        assert_eq!(discretize(&x, 2).unwrap(), x);
    }

    #[test]
    fn max_of_others_and_support() {
        let a = Assembly::new(vec![
            coin(),
            coin(),
            FiniteDistribution::point(rat(1, 2)).unwrap(),
        ])
        .unwrap();
        assert_eq!(
            a.max_of_others(2),
            d(&[(int(0), rat(1, 4)), (int(1), rat(3, 4))])
        );
        assert_eq!(a.merged_support(), vec![int(0), rat(1, 2), int(1)]);
        assert_eq!(a.support_max(), int(1));
        let single = Assembly::new(vec![coin()]).unwrap();
        assert_eq!(
            single.max_of_others(0),
            FiniteDistribution::point(int(0)).unwrap()
        );
    }
}
