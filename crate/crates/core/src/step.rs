//! Piecewise-constant, right-continuous CDFs on `[0, inf)`.
//!
//! Products, powers and averages of the CDFs of finite distributions are all
//! step functions on the merged support, so the expected maximum reduces to a
//! finite sum over the plateaus.

use num_traits::{One, Signed, Zero};

use crate::{Error, FiniteDistribution, Rational, Result};

/// A right-continuous step CDF in canonical form.
///
/// The function is `0` before `breakpoints[0]` and equals `plateaus[j]` on
/// `[breakpoints[j], breakpoints[j + 1])`; the last plateau is `1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurvivalStep {
    breakpoints: Vec<Rational>,
    plateaus: Vec<Rational>,
}

impl SurvivalStep {
    /// Validating constructor. Redundant breakpoints (plateau equal to the
    /// previous one) are dropped.
    pub fn new(breakpoints: Vec<Rational>, plateaus: Vec<Rational>) -> Result<Self> {
        if breakpoints.len() != plateaus.len() {
            return Err(Error::InvalidArgument(format!(
                "{} breakpoints but {} plateaus",
                breakpoints.len(),
                plateaus.len()
            )));
        }
        if breakpoints.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if breakpoints[0].is_negative() {
            return Err(Error::NegativeValue(breakpoints[0].clone()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        let mut prev = Rational::zero();
        for p in &plateaus {
            if *p < prev {
                return Err(Error::InvalidArgument(
                    "plateaus must be non-decreasing".into(),
                ));
            }
            prev = p.clone();
        }
        if !plateaus.last().is_some_and(One::is_one) {
            return Err(Error::InvalidArgument("final plateau must equal 1".into()));
        }
        Ok(Self::canonical(breakpoints, plateaus))
    }

    fn canonical(breakpoints: Vec<Rational>, plateaus: Vec<Rational>) -> Self {
        let mut bps = Vec::with_capacity(breakpoints.len());
        let mut pls: Vec<Rational> = Vec::with_capacity(plateaus.len());
        for (b, p) in breakpoints.into_iter().zip(plateaus) {
            let prev = pls.last().cloned().unwrap_or_else(Rational::zero);
            if p != prev {
                bps.push(b);
                pls.push(p);
            }
        }
        Self {
            breakpoints: bps,
            plateaus: pls,
        }
    }

    /// The CDF of a finite distribution.
    pub fn from_distribution(d: &FiniteDistribution) -> Self {
        let mut acc = Rational::zero();
        let mut bps = Vec::with_capacity(d.len());
        let mut pls = Vec::with_capacity(d.len());
        for (v, m) in d.atoms() {
            acc += m;
            bps.push(v.clone());
            pls.push(acc.clone());
        }
        Self {
            breakpoints: bps,
            plateaus: pls,
        }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn plateaus(&self) -> &[Rational] {
        &self.plateaus
    }

    /// Right-continuous value `S(x)`.
    pub fn value_at(&self, x: &Rational) -> Rational {
        let k = self.breakpoints.partition_point(|b| b <= x);
        if k == 0 {
            Rational::zero()
        } else {
            self.plateaus[k - 1].clone()
        }
    }

    /// Left limit `S(x-)`.
    pub fn left_limit(&self, x: &Rational) -> Rational {
        let k = self.breakpoints.partition_point(|b| b < x);
        if k == 0 {
            Rational::zero()
        } else {
            self.plateaus[k - 1].clone()
        }
    }

    /// Values at each point of an ascending grid, by a single sweep.
    pub fn on_grid(&self, grid: &[Rational]) -> Vec<Rational> {
        let mut out = Vec::with_capacity(grid.len());
        let mut k = 0;
        let mut current = Rational::zero();
        for x in grid {
            while k < self.breakpoints.len() && self.breakpoints[k] <= *x {
                current = self.plateaus[k].clone();
                k += 1;
            }
            out.push(current.clone());
        }
        out
    }

    fn from_grid(grid: Vec<Rational>, values: Vec<Rational>) -> Self {
        Self::canonical(grid, values)
    }

    /// Pointwise product: the CDF of the maximum of independent variables.
    pub fn product<'a>(steps: impl IntoIterator<Item = &'a SurvivalStep>) -> Self {
        let steps: Vec<&SurvivalStep> = steps.into_iter().collect();
        let grid = merged_grid(steps.iter().map(|s| s.breakpoints.as_slice()));
        let mut values = vec![Rational::one(); grid.len()];
        for s in &steps {
            for (acc, v) in values.iter_mut().zip(s.on_grid(&grid)) {
                *acc *= v;
            }
        }
        Self::from_grid(grid, values)
    }

    /// Pointwise arithmetic mean.
    pub fn mean<'a>(steps: impl IntoIterator<Item = &'a SurvivalStep>) -> Self {
        let steps: Vec<&SurvivalStep> = steps.into_iter().collect();
        let grid = merged_grid(steps.iter().map(|s| s.breakpoints.as_slice()));
        let mut values = vec![Rational::zero(); grid.len()];
        for s in &steps {
            for (acc, v) in values.iter_mut().zip(s.on_grid(&grid)) {
                *acc += v;
            }
        }
        let n = Rational::from_integer(steps.len().into());
        let values = values.into_iter().map(|v| v / &n).collect();
        Self::from_grid(grid, values)
    }

    /// Pointwise `S^n`: the CDF of the maximum of `n` independent copies.
    pub fn pow(&self, n: u32) -> Self {
        let values = self
            .plateaus
            .iter()
            .map(|p| num_traits::pow(p.clone(), n as usize))
            .collect();
        Self::from_grid(self.breakpoints.clone(), values)
    }

    /// `int_0^inf (1 - S(x)) dx`, the mean of the law with this CDF.
    pub fn survival_integral(&self) -> Rational {
        let mut total = Rational::zero();
        let mut prev_x = Rational::zero();
        let mut prev_s = Rational::zero();
        for (x, s) in self.breakpoints.iter().zip(&self.plateaus) {
            total += (x - &prev_x) * (Rational::one() - &prev_s);
            prev_x = x.clone();
            prev_s = s.clone();
        }
        total
    }

    /// `int_lo^hi S(x)^n dx` for `0 <= lo <= hi`.
    pub fn integral_of_power(&self, lo: &Rational, hi: &Rational, n: u32) -> Rational {
        let mut total = Rational::zero();
        let mut x = lo.clone();
        let mut k = self.breakpoints.partition_point(|b| b <= lo);
        let mut level = if k == 0 {
            Rational::zero()
        } else {
            self.plateaus[k - 1].clone()
        };
        while x < *hi {
            let next = if k < self.breakpoints.len() && self.breakpoints[k] < *hi {
                self.breakpoints[k].clone()
            } else {
                hi.clone()
            };
            total += (&next - &x) * num_traits::pow(level.clone(), n as usize);
            x = next;
            if k < self.breakpoints.len() && self.breakpoints[k] == x {
                level = self.plateaus[k].clone();
                k += 1;
            }
        }
        total
    }

    /// The distribution whose CDF this is.
    pub fn to_distribution(&self) -> FiniteDistribution {
        let mut prev = Rational::zero();
        let mut atoms = Vec::with_capacity(self.breakpoints.len());
        for (x, s) in self.breakpoints.iter().zip(&self.plateaus) {
            atoms.push((x.clone(), s - &prev));
            prev = s.clone();
        }
        FiniteDistribution::new(atoms).expect("canonical step CDF yields a valid distribution")
    }
}

/// Sorted union of several ascending point sets.
pub fn merged_grid<'a>(sets: impl IntoIterator<Item = &'a [Rational]>) -> Vec<Rational> {
    let mut grid: Vec<Rational> = sets.into_iter().flatten().cloned().collect();
    grid.sort();
    grid.dedup();
    grid
}
