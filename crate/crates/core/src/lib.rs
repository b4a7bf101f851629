//! Exact computation and verification of the expected maximum of independent
//! non-negative random variables ("n-assemblies").
//!
//! Every probability and value is an exact rational. The crate computes
//! `E[max(X_1, ..., X_n)]` by integrating the survival function of the
//! product CDF, the similar-assembly performances `M_i = E[max of n copies
//! of X_i]`, the bound chain relating the two, the M-preserving distribution
//! surgeries that push `E[max]` up or down, and explicit two-point
//! assemblies that approach the upper bound.
//!
//! Quantities that need n-th roots are returned as [`Enclosure`]s: exact
//! rational brackets of guaranteed width.
//!
//! ```
//! use mixbound::{dist, Assembly, FiniteDistribution, rat};
//!
//! let coin = FiniteDistribution::new(vec![(rat(0, 1), rat(1, 2)), (rat(1, 1), rat(1, 2))]).unwrap();
//! let a = Assembly::new(vec![coin.clone(), coin]).unwrap();
//! assert_eq!(dist::expected_max(&a), rat(3, 4));
//! ```

pub mod bounds;
pub mod dist;
pub mod enclosure;
mod error;
pub mod extremal;
pub mod gen;
pub mod oracle;
pub mod step;
pub mod transforms;

pub use bounds::{BoundReport, ChainChecks};
pub use dist::{Assembly, CdfEvaluator, FiniteDistribution, Side};
pub use enclosure::Enclosure;
pub use error::{Error, Result};
pub use extremal::ExtremalSpec;
pub use oracle::McEstimate;
pub use step::SurvivalStep;
pub use transforms::{Direction, TransformOutcome};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational used for every value and probability.
pub type Rational = BigRational;

/// Default width for n-th root enclosures.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Cap on the number of atoms a single constructed distribution may carry.
pub const DEFAULT_ATOM_CAP: usize = 1_000_000;

/// Shorthand for `num/den` as a [`Rational`].
///
/// # Panics
/// If `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as a [`Rational`].
pub fn int(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}
