//! Exact rational brackets for quantities that need n-th roots.
//!
//! Roots are bracketed by bisection over dyadic rationals `r / 2^s`, so every
//! endpoint is an exact rational and the true value is guaranteed to lie
//! inside. Perfect powers are detected first and come back degenerate
//! (`lo == hi`).

use std::fmt;
use std::ops::{Add, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Rational, Result};

/// Closed interval `[lo, hi]` of rationals known to contain a real value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    lo: Rational,
    hi: Rational,
}

impl Enclosure {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "enclosure endpoints out of order");
        Self { lo, hi }
    }

    pub fn exact(v: Rational) -> Self {
        Self {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn radius(&self) -> Rational {
        self.width() / Rational::from_integer(2.into())
    }

    pub fn mid(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid().to_f64().unwrap_or(f64::NAN)
    }

    pub fn radius_f64(&self) -> f64 {
        self.radius().to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn contains(&self, v: &Rational) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    /// `[c - hi, c - lo]`.
    pub fn subtracted_from(&self, c: &Rational) -> Self {
        Self {
            lo: c - &self.hi,
            hi: c - &self.lo,
        }
    }

    /// Multiplication by a non-negative rational.
    pub fn scale(&self, c: &Rational) -> Self {
        assert!(!c.is_negative(), "scale factor must be non-negative");
        Self {
            lo: &self.lo * c,
            hi: &self.hi * c,
        }
    }

    /// Intersection with `[lo, hi]`; `None` when disjoint.
    pub fn clamp_to(&self, lo: &Rational, hi: &Rational) -> Option<Self> {
        let l = (&self.lo).max(lo).clone();
        let h = (&self.hi).min(hi).clone();
        (l <= h).then_some(Self { lo: l, hi: h })
    }
}

impl Add for &Enclosure {
    type Output = Enclosure;
    fn add(self, rhs: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
        }
    }
}

impl Sub for &Enclosure {
    type Output = Enclosure;
    fn sub(self, rhs: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo - &rhs.hi,
            hi: &self.hi - &rhs.lo,
        }
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.15} ± {:.3e}", self.mid_f64(), self.radius_f64())
    }
}

/// Smallest `s >= 1` with `2^-s <= tol`.
pub fn bits_for_tol(tol: f64) -> Result<u32> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be a positive finite number, got {tol}"
        )));
    }
    let tol = Rational::from_float(tol).expect("finite float");
    let mut s = 1u32;
    let mut step = Rational::new(BigInt::one(), BigInt::from(2));
    while step > tol {
        s += 1;
        step /= Rational::from_integer(2.into());
        if s > 4096 {
            return Err(Error::InvalidArgument("tolerance too small".into()));
        }
    }
    Ok(s)
}

/// `floor(N^(1/n))` for `N >= 0` by bisection on integers.
pub fn int_nth_root_floor(value: &BigInt, n: u32) -> BigInt {
    assert!(n >= 1, "root order must be >= 1");
    assert!(value.sign() != Sign::Minus, "root of a negative integer");
    if n == 1 || value.is_zero() || value.is_one() {
        return value.clone();
    }
    // invariant: lo^n <= value < hi^n
    let mut lo = BigInt::zero();
    let mut hi = BigInt::one() << (value.bits() / u64::from(n) + 1);
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) >> 1;
        if num_traits::pow(mid.clone(), n as usize) <= *value {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn exact_root(v: &BigInt, n: u32) -> Option<BigInt> {
    let r = int_nth_root_floor(v, n);
    (num_traits::pow(r.clone(), n as usize) == *v).then_some(r)
}

/// Encloses `q^(1/n)` for `q >= 0` with width at most `2^-bits`.
pub fn nth_root(q: &Rational, n: u32, bits: u32) -> Enclosure {
    assert!(!q.is_negative(), "root of a negative rational");
    assert!(n >= 1, "root order must be >= 1");
    if n == 1 {
        return Enclosure::exact(q.clone());
    }
    if let (Some(a), Some(b)) = (exact_root(q.numer(), n), exact_root(q.denom(), n)) {
        return Enclosure::exact(Rational::new(a, b));
    }
    let shift = u64::from(bits) * u64::from(n);
    let scaled: BigInt = (q.numer() << shift) / q.denom();
    let r = int_nth_root_floor(&scaled, n);
    let den = BigInt::one() << bits;
    Enclosure::new(
        Rational::new(r.clone(), den.clone()),
        Rational::new(r + 1, den),
    )
}

/// Encloses `q^(1/n)` with width at most `tol`.
pub fn nth_root_tol(q: &Rational, n: u32, tol: f64) -> Result<Enclosure> {
    Ok(nth_root(q, n, bits_for_tol(tol)?))
}
