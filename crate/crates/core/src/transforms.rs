//! M-preserving surgeries on distributions.
//!
//! [`coalesce`] and [`reduce_pair`] replace atoms of one variable `X` so that
//! `E[max of n copies of X]` is unchanged while `E[X v Y]` does not decrease
//! for an independent companion `Y`. [`down_project`] pushes every member's
//! mass on an interval onto its endpoints, keeping each `M_i` and not
//! increasing `E[X_(n)]`.
//!
//! Every call certifies itself: the change in the objective is computed both
//! from a closed form and by direct integration, and M-preservation is
//! re-checked exactly. A mismatch is an [`Error::InvariantBreach`].

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::dist::{self, expected_max_of, similar_max_mean, Assembly, FiniteDistribution, Side};
use crate::enclosure::{bits_for_tol, nth_root};
use crate::{Enclosure, Error, Rational, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increased,
    Decreased,
    Unchanged,
}

impl Direction {
    fn of(delta: &Rational, radius: &Rational) -> Self {
        if *delta > *radius {
            Direction::Increased
        } else if *delta < -radius.clone() {
            Direction::Decreased
        } else {
            Direction::Unchanged
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Increased => "increased",
            Direction::Decreased => "decreased",
            Direction::Unchanged => "unchanged",
        })
    }
}

/// A transformed distribution or assembly with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformOutcome<T> {
    pub result: T,
    /// New minus old `M` per affected variable; all zero for exact transforms.
    pub m_residual: Vec<Rational>,
    /// Change of the objective (`E[X v Y]` or `E[X_(n)]`).
    pub e_delta: Rational,
    pub direction: Direction,
    /// Zero for exact transforms; the caller tolerance for root-based ones.
    pub radius: Rational,
}

/// Single-atom replacement produced by [`coalesce`].
#[derive(Debug, Clone, PartialEq)]
pub struct Coalesced {
    pub outcome: TransformOutcome<FiniteDistribution>,
    /// Where the interval's mass now sits.
    pub atom: Rational,
    /// `E[X | a <= X <= b]`, a lower bound for `atom`.
    pub conditional_mean: Rational,
}

fn pow(q: &Rational, n: u32) -> Rational {
    num_traits::pow(q.clone(), n as usize)
}

fn replace_region(
    d: &FiniteDistribution,
    inside: impl Fn(&Rational) -> bool,
    new_atoms: Vec<(Rational, Rational)>,
) -> Result<FiniteDistribution> {
    let mut atoms: Vec<(Rational, Rational)> = d
        .atoms()
        .iter()
        .filter(|(v, _)| !inside(v))
        .cloned()
        .collect();
    atoms.extend(new_atoms.into_iter().filter(|(_, m)| m.is_positive()));
    FiniteDistribution::new(atoms)
}

/// Merges all of `d`'s atoms in `[a, b]` into one atom that keeps
/// `E[max of n copies]` fixed. Requires the companion to have no mass in the
/// open interval `(a, b)`.
pub fn coalesce(
    d: &FiniteDistribution,
    a: &Rational,
    b: &Rational,
    companion: &FiniteDistribution,
    n: u32,
) -> Result<Coalesced> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if a.is_negative() || a > b {
        return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}]")));
    }
    if companion.mass_where(|v| v > a && v < b).is_positive() {
        return Err(Error::Precondition(format!(
            "companion has mass in ({a}, {b})"
        )));
    }
    let p = d.mass_where(|v| v >= a && v <= b);
    if p.is_zero() {
        return Err(Error::Precondition(format!(
            "distribution has zero mass in [{a}, {b}]"
        )));
    }

    let f = d.step();
    let below = pow(&f.left_limit(a), n);
    let upto = pow(&f.value_at(b), n);
    let contribution = b * &upto - a * &below - f.integral_of_power(a, b, n);
    let x = contribution / (&upto - &below);
    let cond = d.conditional_mean(a, b).expect("positive mass in [a, b]");
    if x < *a || x > *b || x < cond {
        return Err(Error::InvariantBreach(format!(
            "coalesced atom {x} outside [{cond}, {b}]"
        )));
    }

    let result = replace_region(d, |v| v >= a && v <= b, vec![(x.clone(), p.clone())])?;
    let residual = similar_max_mean(&result, n) - similar_max_mean(d, n);
    if !residual.is_zero() {
        return Err(Error::InvariantBreach(format!(
            "coalesce moved M by {residual}"
        )));
    }
    let closed = &p * companion.cdf(a, Side::Right) * (&x - &cond);
    let direct = expected_max_of([&result, companion]) - expected_max_of([d, companion]);
    if closed != direct {
        return Err(Error::InvariantBreach(format!(
            "coalesce certificate {closed} disagrees with direct change {direct}"
        )));
    }
    Ok(Coalesced {
        outcome: TransformOutcome {
            result,
            m_residual: vec![residual],
            direction: Direction::of(&direct, &Rational::zero()),
            e_delta: direct,
            radius: Rational::zero(),
        },
        atom: x,
        conditional_mean: cond,
    })
}

/// Which end of the admissible segment [`reduce_pair`] moved to.
#[derive(Debug, Clone, PartialEq)]
pub enum Reduction {
    /// Slope negative: the lower atom moved down to `u`, the upper one up to
    /// `partner`. Either `u` is the left end of the interval or `partner` is
    /// the right end.
    Spread { u: Rational, partner: Rational },
    /// Slope non-negative: both atoms merged at `omega`.
    Merge {
        omega: Rational,
        /// Right slope of the objective at the merge point.
        slope_at_merge: Rational,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduced {
    pub outcome: TransformOutcome<FiniteDistribution>,
    pub lambda: Rational,
    /// `p G(a) - q lambda G(b-)`.
    pub slope_at_a: Rational,
    pub reduction: Reduction,
    /// Whether the objective strictly increased.
    pub strict: bool,
}

/// Replaces the two atoms `a < b` that carry all of `d`'s mass in `(l, r)`
/// by at most one atom inside `(l, r)`, keeping `E[max of n copies]` fixed.
///
/// Moving the lower atom to `u` and the upper one to
/// `V(u) = b - lambda (u - a)` preserves `M` while `u <= V(u)` and
/// `l <= u`, `V(u) <= r`. The objective is convex in `u`, so its maximum
/// over that segment sits at an end: the lower end when the right slope at
/// `a` is negative, the merge point `omega = V(omega)` otherwise.
pub fn reduce_pair(
    d: &FiniteDistribution,
    l: &Rational,
    r: &Rational,
    companion: &FiniteDistribution,
    n: u32,
) -> Result<Reduced> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if l.is_negative() || l >= r {
        return Err(Error::InvalidArgument(format!("bad interval ({l}, {r})")));
    }
    let inside: Vec<&(Rational, Rational)> =
        d.atoms().iter().filter(|(v, _)| v > l && v < r).collect();
    if inside.len() != 2 {
        return Err(Error::Precondition(format!(
            "mass in ({l}, {r}) must sit on exactly two atoms, found {}",
            inside.len()
        )));
    }
    let (a, p) = inside[0].clone();
    let (b, q) = inside[1].clone();

    let f = d.step();
    let fl = pow(&f.value_at(l), n);
    let fa = pow(&f.value_at(&a), n);
    let fb = pow(&f.value_at(&b), n);
    let denom = &fb - &fa;
    if denom.is_zero() {
        return Err(Error::InvariantBreach("F(b)^n = F(a)^n with q > 0".into()));
    }
    let lambda = (&fa - &fl) / denom;
    let g = companion.step();
    let slope_at_a = &p * g.value_at(&a) - &q * &lambda * g.left_limit(&b);
    let partner_of = |u: &Rational| &b - &lambda * (u - &a);

    let reduction = if slope_at_a.is_negative() {
        let reach = &a - (r - &b) / &lambda;
        let u = if reach > *l { reach } else { l.clone() };
        Reduction::Spread {
            partner: partner_of(&u),
            u,
        }
    } else {
        let omega = (&b + &lambda * &a) / (Rational::one() + &lambda);
        let slope_at_merge = &p * g.value_at(&omega) - &q * &lambda * g.left_limit(&omega);
        if slope_at_a.is_zero() && slope_at_merge.is_negative() {
            return Err(Error::InvariantBreach(format!(
                "slope at merge point {omega} is {slope_at_merge} < 0"
            )));
        }
        Reduction::Merge {
            omega,
            slope_at_merge,
        }
    };

    let new_atoms = match &reduction {
        Reduction::Spread { u, partner } => {
            vec![(u.clone(), p.clone()), (partner.clone(), q.clone())]
        }
        Reduction::Merge { omega, .. } => vec![(omega.clone(), &p + &q)],
    };
    let result = replace_region(d, |v| v > l && v < r, new_atoms)?;
    if result
        .atoms()
        .iter()
        .filter(|(v, _)| v > l && v < r)
        .count()
        > 1
    {
        return Err(Error::InvariantBreach(
            "reduce left two atoms inside".into(),
        ));
    }

    let residual = similar_max_mean(&result, n) - similar_max_mean(d, n);
    if !residual.is_zero() {
        return Err(Error::InvariantBreach(format!(
            "reduce moved M by {residual}"
        )));
    }
    let vee = |c: &Rational| {
        expected_max_of([
            &FiniteDistribution::point(c.clone()).expect("point"),
            companion,
        ])
    };
    let phi_at = |u: &Rational, v: &Rational| &p * vee(u) + &q * vee(v);
    let closed = match &reduction {
        Reduction::Spread { u, partner } => phi_at(u, partner),
        Reduction::Merge { omega, .. } => phi_at(omega, omega),
    } - phi_at(&a, &b);
    let direct = expected_max_of([&result, companion]) - expected_max_of([d, companion]);
    if closed != direct {
        return Err(Error::InvariantBreach(format!(
            "reduce certificate {closed} disagrees with direct change {direct}"
        )));
    }
    if direct.is_negative() {
        return Err(Error::InvariantBreach(format!(
            "reduce decreased E[X v Y] by {direct}"
        )));
    }
    Ok(Reduced {
        strict: direct.is_positive(),
        outcome: TransformOutcome {
            result,
            m_residual: vec![residual],
            direction: Direction::of(&direct, &Rational::zero()),
            e_delta: direct,
            radius: Rational::zero(),
        },
        lambda,
        slope_at_a,
        reduction,
    })
}

/// `u p + v (1 - p) / (1 - p^n)`, extended by continuity to `u + v/n` at
/// `p = 1`. Non-decreasing in `p` on `[0, 1]` when `v < u`.
///
/// # Panics
/// If `p` is outside `[0, 1]` or `n == 0`.
pub fn phi(u: &Rational, v: &Rational, p: &Rational, n: u32) -> Rational {
    assert!(n >= 1, "phi needs n >= 1");
    assert!(
        !p.is_negative() && *p <= Rational::one(),
        "phi needs p in [0, 1], got {p}"
    );
    if p.is_one() {
        return u + v / Rational::from_integer(BigInt::from(n));
    }
    u * p + v * (Rational::one() - p) / (Rational::one() - pow(p, n))
}

/// Result of [`down_project`].
#[derive(Debug, Clone, PartialEq)]
pub struct DownProjected {
    pub outcome: TransformOutcome<Assembly>,
    /// Share of each member's interval mass sent to `lo`; `None` for members
    /// with no mass in the interval.
    pub alphas: Vec<Option<Enclosure>>,
}

/// Replaces every member's mass on `[lo, hi]` by atoms at `lo` and `hi`,
/// each member keeping its `M_i` (to within `tol`).
///
/// The `lo` share solves `(F(lo-) + p alpha)^n = (1/(hi-lo)) int_lo^hi F^n`.
pub fn down_project(a: &Assembly, lo: &Rational, hi: &Rational, tol: f64) -> Result<DownProjected> {
    if lo.is_negative() || lo >= hi {
        return Err(Error::InvalidArgument(format!("bad interval [{lo}, {hi}]")));
    }
    let tol_q = Rational::from_float(tol)
        .filter(|t| t.is_positive())
        .ok_or_else(|| Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))?;
    if let Some(i) = a
        .members()
        .iter()
        .position(|d| d.cdf(hi, Side::Right).is_zero())
    {
        return Err(Error::Precondition(format!(
            "member {} has P[X <= {hi}] = 0",
            i + 1
        )));
    }
    let n = a.exponent();
    let width = hi - lo;
    let spread = (&width * Rational::from_integer(BigInt::from(n)))
        .ceil()
        .to_integer();
    let bits = bits_for_tol(tol)? + spread.bits() as u32;

    let mut members = Vec::with_capacity(a.n());
    let mut alphas = Vec::with_capacity(a.n());
    let mut residuals = Vec::with_capacity(a.n());
    for (i, d) in a.members().iter().enumerate() {
        let f = d.step();
        let below = f.left_limit(lo);
        let upto = f.value_at(hi);
        let p = &upto - &below;
        if p.is_zero() {
            members.push(d.clone());
            alphas.push(None);
            residuals.push(Rational::zero());
            continue;
        }
        let target = f.integral_of_power(lo, hi, n) / &width;
        let root = nth_root(&target, n, bits)
            .clamp_to(&below, &upto)
            .ok_or_else(|| {
                Error::InvariantBreach(format!("member {}: lo share outside [0, 1]", i + 1))
            })?;
        let level = if root.is_exact() {
            root.lo().clone()
        } else {
            root.mid()
        };
        let result = replace_region(
            d,
            |v| v >= lo && v <= hi,
            vec![(lo.clone(), &level - &below), (hi.clone(), &upto - &level)],
        )?;
        let residual = similar_max_mean(&result, n) - similar_max_mean(d, n);
        if residual.abs() > tol_q {
            return Err(Error::InvariantBreach(format!(
                "member {}: M moved by {residual}, beyond tolerance",
                i + 1
            )));
        }
        alphas.push(Some(Enclosure::new(
            (root.lo() - &below) / &p,
            (root.hi() - &below) / &p,
        )));
        residuals.push(residual);
        members.push(result);
    }

    let result = Assembly::new(members)?;
    let e_delta = dist::expected_max(&result) - dist::expected_max(a);
    if e_delta > tol_q {
        return Err(Error::InvariantBreach(format!(
            "down-projection increased E[max] by {e_delta}"
        )));
    }
    Ok(DownProjected {
        outcome: TransformOutcome {
            result,
            m_residual: residuals,
            direction: Direction::of(&e_delta, &tol_q),
            e_delta,
            radius: tol_q,
        },
        alphas,
    })
}
