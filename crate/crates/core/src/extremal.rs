//! Two-point assemblies whose expected maximum comes within a chosen distance
//! of the upper bound `M̄ + (n-1)/n * max M`.
//!
//! `X_n` is the constant `M_n = max M`; every other `X_k` is `0` with
//! probability `p_k` and `x_k = M_k / (1 - p_k^n)` otherwise, so each similar
//! assembly still performs at exactly `M_k`. Pushing `p_k` to one sends `x_k`
//! off to infinity and `E[X_(n)]` up to the bound, which is never reached.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::bounds::mean_bounds;
use crate::dist::{self, Assembly, FiniteDistribution};
use crate::{Error, Rational, Result};

/// Rounds of geometric tightening before giving up.
pub const MAX_ROUNDS: usize = 60;

/// Target performances and how close to the bound to get.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalSpec {
    m_list: Vec<Rational>,
    closeness: Rational,
    p_schedule: Option<Vec<Rational>>,
}

impl ExtremalSpec {
    /// `m_list` must be positive and ascending; its last entry is the maximum.
    pub fn new(m_list: Vec<Rational>, closeness: Rational) -> Result<Self> {
        if m_list.is_empty() {
            return Err(Error::InvalidArgument("empty M list".into()));
        }
        if let Some(bad) = m_list.iter().find(|m| !m.is_positive()) {
            return Err(Error::InvalidArgument(format!(
                "target M must be positive, got {bad}"
            )));
        }
        if m_list.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(
                "target M list must be ascending".into(),
            ));
        }
        if !closeness.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "closeness must be positive, got {closeness}"
            )));
        }
        Ok(Self {
            m_list,
            closeness,
            p_schedule: None,
        })
    }

    /// `n` copies of the same target.
    pub fn equal(n: usize, m: Rational, closeness: Rational) -> Result<Self> {
        Self::new(vec![m; n], closeness)
    }

    /// Fixes `p_1..p_{n-1}` instead of searching.
    pub fn with_schedule(mut self, p: Vec<Rational>) -> Result<Self> {
        if p.len() + 1 != self.m_list.len() {
            return Err(Error::InvalidArgument(format!(
                "schedule needs {} entries, got {}",
                self.m_list.len() - 1,
                p.len()
            )));
        }
        if let Some(bad) = p
            .iter()
            .find(|p| !p.is_positive() || **p >= Rational::one())
        {
            return Err(Error::InvalidArgument(format!(
                "p must lie in (0, 1), got {bad}"
            )));
        }
        self.p_schedule = Some(p);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.m_list.len()
    }

    pub fn m_list(&self) -> &[Rational] {
        &self.m_list
    }

    pub fn closeness(&self) -> &Rational {
        &self.closeness
    }
}

/// A built assembly and its certified distance to the bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremal {
    pub assembly: Assembly,
    pub p: Vec<Rational>,
    pub gap: Rational,
    /// Base `delta` of the accepted round; `None` for explicit schedules.
    pub delta: Option<Rational>,
    /// Gap after each tightening round that satisfied the ordering.
    pub history: Vec<(Rational, Rational)>,
}

impl Extremal {
    /// `E[X_(n)] / max M`.
    pub fn theta(&self) -> Rational {
        dist::expected_max(&self.assembly) / self.assembly.member(self.assembly.n() - 1).max_value()
    }
}

fn assemble(m_list: &[Rational], p: &[Rational]) -> Result<Option<Assembly>> {
    let n = m_list.len();
    let top = &m_list[n - 1];
    let mut xs = Vec::with_capacity(n - 1);
    for (m, p) in m_list.iter().zip(p) {
        xs.push(m / (Rational::one() - num_traits::pow(p.clone(), n)));
    }
    // peel from the largest index down, as the construction does
    for k in (0..xs.len()).rev() {
        let floor = if k == 0 { top } else { &xs[k - 1] };
        if xs[k] <= *floor {
            return Ok(None);
        }
    }
    let mut members = Vec::with_capacity(n);
    for (x, p) in xs.into_iter().zip(p) {
        members.push(FiniteDistribution::two_point(p.clone(), x)?);
    }
    members.push(FiniteDistribution::point(top.clone())?);
    Assembly::new(members).map(Some)
}

pub fn build(spec: &ExtremalSpec) -> Result<Extremal> {
    let n = spec.n();
    if let Some(p) = &spec.p_schedule {
        let assembly = assemble(&spec.m_list, p)?.ok_or_else(|| {
            Error::Precondition(format!(
                "schedule violates {} < x_1 < ... < x_(n-1)",
                spec.m_list[n - 1]
            ))
        })?;
        let g = gap(&assembly)?;
        if g > spec.closeness {
            return Err(Error::Precondition(format!(
                "schedule reaches gap {g}, above the requested {}",
                spec.closeness
            )));
        }
        return Ok(Extremal {
            assembly,
            p: p.clone(),
            gap: g,
            delta: None,
            history: Vec::new(),
        });
    }

    let mut delta = Rational::new(BigInt::one(), BigInt::from(2));
    let tenth = Rational::new(BigInt::one(), BigInt::from(10));
    let mut history = Vec::new();
    for _ in 0..MAX_ROUNDS {
        let p = staggered_schedule(n, &delta);
        if p.iter().all(|p| p.is_positive()) {
            if let Some(assembly) = assemble(&spec.m_list, &p)? {
                let g = gap(&assembly)?;
                history.push((delta.clone(), g.clone()));
                if g <= spec.closeness {
                    return Ok(Extremal {
                        assembly,
                        p,
                        gap: g,
                        delta: Some(delta),
                        history,
                    });
                }
            }
        }
        delta *= &tenth;
    }
    Err(Error::CapExceeded {
        what: "extremal tightening rounds",
        count: MAX_ROUNDS as u128 + 1,
        cap: MAX_ROUNDS as u128,
    })
}

/// `p_k = 1 - delta (1 + (n - k) / 1000)` for `k = 1..n-1`.
///
/// `1 - p_k` shrinks with `k`, so `x_1 < ... < x_(n-1)` even for equal targets.
pub fn staggered_schedule(n: usize, delta: &Rational) -> Vec<Rational> {
    let stagger = Rational::new(BigInt::one(), BigInt::from(1000));
    (1..n)
        .map(|k| {
            let spread = Rational::from_integer(BigInt::from(n - k)) * &stagger;
            Rational::one() - delta * (Rational::one() + spread)
        })
        .collect()
}

/// `2 - 1/n`.
pub fn theta_sup(n: usize) -> Rational {
    assert!(n >= 1, "theta_sup needs n >= 1");
    Rational::from_integer(BigInt::from(2)) - Rational::new(BigInt::one(), BigInt::from(n))
}

/// Exact distance from `E[X_(n)]` to the upper bound; never negative.
pub fn gap(a: &Assembly) -> Result<Rational> {
    let (_, upper) = mean_bounds(&dist::m_list(a), a.n())?;
    let g = upper - dist::expected_max(a);
    if g < Rational::zero() {
        return Err(Error::InvariantBreach(format!(
            "E[max] exceeds the upper bound by {}",
            -g
        )));
    }
    Ok(g)
}
