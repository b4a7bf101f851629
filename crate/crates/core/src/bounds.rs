//! The bound chain around `E[max]`.
//!
//! For an assembly with similar-assembly performances `M_1..M_n`:
//!
//! ```text
//! M̄ <= E[Z^(n)] <= E[X_(n)] <= M̄ + (n-1)/n * max M_i
//! ```
//!
//! where `Z` is the equally weighted mixture of the members. For members
//! bounded by `b`, `b - prod (b - M_i)^(1/n)` is an M-only lower bound
//! between `M̄` and `E[X_(n)]`. Rational comparisons are exact; anything
//! involving an n-th root is an [`Enclosure`].

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::dist::{self, Assembly};
use crate::enclosure::{bits_for_tol, nth_root};
use crate::{Enclosure, Error, Rational, Result};

/// `(M̄, M̄ + (n-1)/n * max M)`.
pub fn mean_bounds(m_list: &[Rational], n: usize) -> Result<(Rational, Rational)> {
    if m_list.is_empty() {
        return Err(Error::InvalidArgument("empty M list".into()));
    }
    if m_list.len() != n {
        return Err(Error::InvalidArgument(format!(
            "M list has {} entries, expected n = {n}",
            m_list.len()
        )));
    }
    grouped_bounds(m_list, n, 1)
}

/// Bounds for `k` similar `m`-assemblies (`n = k*m`):
/// `(M̄, M̄ + (k-1)/k * max M)`.
pub fn grouped_bounds(m_list: &[Rational], k: usize, m: usize) -> Result<(Rational, Rational)> {
    if m_list.is_empty() {
        return Err(Error::InvalidArgument("empty M list".into()));
    }
    if k == 0 || m == 0 || k.checked_mul(m) != Some(m_list.len()) {
        return Err(Error::InvalidArgument(format!(
            "k*m = {k}*{m} does not match {} entries",
            m_list.len()
        )));
    }
    if let Some(bad) = m_list.iter().find(|v| v.is_negative()) {
        return Err(Error::InvalidArgument(format!("negative M value {bad}")));
    }
    let m_bar = mean(m_list);
    let m_max = m_list.iter().max().expect("non-empty").clone();
    let k = Rational::from_integer(BigInt::from(k));
    let upper = &m_bar + (&k - Rational::one()) / &k * m_max;
    Ok((m_bar, upper))
}

fn mean(xs: &[Rational]) -> Rational {
    xs.iter().cloned().sum::<Rational>() / Rational::from_integer(BigInt::from(xs.len()))
}

/// `E[Z^(n)]`: the expected max of `n` copies of the equally weighted mixture.
pub fn sen_lower(a: &Assembly) -> Rational {
    dist::similar_max_mean(&dist::mixture(a), a.exponent())
}

/// `prod F_i(x) <= ((1/n) sum F_i(x))^n` at every merged support point.
///
/// Both sides are constant between support points, so this is exhaustive.
pub fn sen_dominance_check(a: &Assembly) -> bool {
    let grid = a.merged_support();
    let n = a.exponent();
    let n_q = Rational::from_integer(BigInt::from(a.n()));
    let per_member: Vec<Vec<Rational>> = a
        .members()
        .iter()
        .map(|d| d.step().on_grid(&grid))
        .collect();
    (0..grid.len()).all(|j| {
        let prod: Rational = per_member.iter().map(|v| v[j].clone()).product();
        let avg = per_member.iter().map(|v| v[j].clone()).sum::<Rational>() / &n_q;
        prod <= num_traits::pow(avg, n as usize)
    })
}

/// `b - prod (b - M_i)^(1/n)`, enclosed to width `<= tol`.
pub fn holder_lower(m_list: &[Rational], b: &Rational, n: usize, tol: f64) -> Result<Enclosure> {
    if m_list.is_empty() || m_list.len() != n {
        return Err(Error::InvalidArgument(format!(
            "M list has {} entries, expected n = {n}",
            m_list.len()
        )));
    }
    if let Some(bad) = m_list.iter().find(|v| v.is_negative()) {
        return Err(Error::InvalidArgument(format!("negative M value {bad}")));
    }
    if let Some(bad) = m_list.iter().find(|v| *v > b) {
        return Err(Error::Precondition(format!(
            "M value {bad} exceeds the bound b = {b}; b is not a common upper bound"
        )));
    }
    let prod: Rational = m_list.iter().map(|m| b - m).product();
    let n = u32::try_from(n).map_err(|_| Error::InvalidArgument("n too large".into()))?;
    let root = nth_root(&prod, n, bits_for_tol(tol)?);
    Ok(root.subtracted_from(b))
}

/// Both computations of the arithmetic/geometric CDF-mean gap.
#[derive(Debug, Clone, PartialEq)]
pub struct GamGap {
    /// `int (Ḡ - G̃)` with `G_i = F_i^n`, the geometric mean via n-th roots.
    pub integral: Enclosure,
    /// `E[V] - E[U]`: `V` has CDF `G̃` (so `V ~ X_(n)`), `U` is the mixture of
    /// the `X_i^(n)` (so `E[U] = M̄`).
    pub probabilistic: Rational,
    /// `(1 - 1/n) * max M_i`.
    pub bound: Rational,
    pub nonnegative: bool,
    pub within_bound: bool,
    pub routes_agree: bool,
}

impl GamGap {
    pub fn holds(&self) -> bool {
        self.nonnegative && self.within_bound && self.routes_agree
    }
}

pub fn gam_gap(a: &Assembly, tol: f64) -> Result<GamGap> {
    let tol_q = Rational::from_float(tol)
        .filter(|t| t.is_positive())
        .ok_or_else(|| Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))?;
    let n = a.exponent();
    let grid = a.merged_support();
    // the integral spans [0, support max]; widen the precision to cover it
    let span_bits = a.support_max().ceil().to_integer().bits() as u32;
    let bits = bits_for_tol(tol)? + span_bits + 1;

    let powered: Vec<Vec<Rational>> = a
        .members()
        .iter()
        .map(|d| {
            d.step()
                .on_grid(&grid)
                .into_iter()
                .map(|f| num_traits::pow(f, n as usize))
                .collect()
        })
        .collect();
    let n_q = Rational::from_integer(BigInt::from(a.n()));
    let mut integral = Enclosure::exact(Rational::zero());
    for j in 0..grid.len().saturating_sub(1) {
        let width = &grid[j + 1] - &grid[j];
        let arith = powered.iter().map(|g| g[j].clone()).sum::<Rational>() / &n_q;
        let prod: Rational = powered.iter().map(|g| g[j].clone()).product();
        let geo = nth_root(&prod, n, bits);
        let cell = geo.subtracted_from(&arith).scale(&width);
        integral = &integral + &cell;
    }

    let m_list = dist::m_list(a);
    let m_bar = mean(&m_list);
    let probabilistic = dist::expected_max(a) - &m_bar;
    let bound = (Rational::one() - Rational::one() / &n_q)
        * m_list.iter().max().expect("non-empty").clone();

    let nonnegative = *integral.lo() >= -tol_q.clone();
    let within_bound = *integral.hi() <= &bound + &tol_q;
    let routes_agree =
        integral.lo() - &tol_q <= probabilistic && probabilistic <= integral.hi() + &tol_q;
    Ok(GamGap {
        integral,
        probabilistic,
        bound,
        nonnegative,
        within_bound,
        routes_agree,
    })
}

/// Pass/fail of each inequality in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainChecks {
    pub mbar_le_sen: bool,
    pub sen_le_exact: bool,
    pub exact_le_upper: bool,
    /// Only present when a common bound `b` was supplied.
    pub holder_le_exact: Option<bool>,
    pub mbar_le_holder: Option<bool>,
}

impl ChainChecks {
    pub fn all_hold(&self) -> bool {
        self.mbar_le_sen
            && self.sen_le_exact
            && self.exact_le_upper
            && self.holder_le_exact.unwrap_or(true)
            && self.mbar_le_holder.unwrap_or(true)
    }
}

/// Every quantity of the bound chain for one assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub m_list: Vec<Rational>,
    pub m_bar: Rational,
    pub m_max: Rational,
    pub exact_e: Rational,
    /// Distribution-dependent; not a function of the `M_i`.
    pub sen_e: Rational,
    pub upper: Rational,
    pub bound_b: Option<Rational>,
    pub holder_lower: Option<Enclosure>,
    /// `exact_e / m_max`; `None` when every `M_i` is zero.
    pub theta: Option<Rational>,
    pub chain: ChainChecks,
}

pub fn full_report(a: &Assembly, b: Option<&Rational>, tol: f64) -> Result<BoundReport> {
    let tol_q = Rational::from_float(tol)
        .filter(|t| t.is_positive())
        .ok_or_else(|| Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))?;
    let m_list = dist::m_list(a);
    let (m_bar, upper) = mean_bounds(&m_list, a.n())?;
    let m_max = m_list.iter().max().expect("non-empty").clone();
    let exact_e = dist::expected_max(a);
    let sen_e = sen_lower(a);

    let holder = match b {
        Some(b) => {
            let top = a.support_max();
            if top > *b {
                return Err(Error::Precondition(format!(
                    "bound b = {b} is below the support point {top}"
                )));
            }
            Some(holder_lower(&m_list, b, a.n(), tol)?)
        }
        None => None,
    };

    let chain = ChainChecks {
        mbar_le_sen: m_bar <= sen_e,
        sen_le_exact: sen_e <= exact_e,
        exact_le_upper: exact_e <= upper,
        holder_le_exact: holder.as_ref().map(|h| *h.hi() <= &exact_e + &tol_q),
        mbar_le_holder: holder.as_ref().map(|h| m_bar <= h.lo() + &tol_q),
    };
    let theta = (!m_max.is_zero()).then(|| &exact_e / &m_max);
    Ok(BoundReport {
        n: a.n(),
        m_list,
        m_bar,
        m_max,
        exact_e,
        sen_e,
        upper,
        bound_b: b.cloned(),
        holder_lower: holder,
        theta,
        chain,
    })
}

/// `true` iff `E[X_(n)] = M̄`; that equality forces identical members, and a
/// violation of that is reported as an invariant breach.
pub fn equality_diagnosis(a: &Assembly) -> Result<bool> {
    let m_bar = mean(&dist::m_list(a));
    if dist::expected_max(a) != m_bar {
        return Ok(false);
    }
    if !a.is_similar() {
        return Err(Error::InvariantBreach(
            "E[max] equals the mean performance but members differ".into(),
        ));
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{int, rat, FiniteDistribution};
    use num_traits::ToPrimitive;

    fn d(atoms: &[(Rational, Rational)]) -> FiniteDistribution {
        FiniteDistribution::new(atoms.to_vec()).unwrap()
    }

    fn coin() -> FiniteDistribution {
        d(&[(int(0), rat(1, 2)), (int(1), rat(1, 2))])
    }

    fn pt(v: Rational) -> FiniteDistribution {
        FiniteDistribution::point(v).unwrap()
    }

    #[test]
    fn mean_bounds_examples() {
        assert_eq!(
            mean_bounds(&[int(1), int(1)], 2).unwrap(),
            (int(1), rat(3, 2))
        );
        let m = rat(7, 3);
        for n in 1..6i64 {
            let (lo, hi) = mean_bounds(&vec![m.clone(); n as usize], n as usize).unwrap();
            assert_eq!(lo, m);
            assert_eq!(hi, (int(2) - rat(1, n)) * &m);
        }
        assert_eq!(mean_bounds(&[int(5)], 1).unwrap(), (int(5), int(5)));
        assert_eq!(
            mean_bounds(&[int(1), int(2), int(3)], 3).unwrap(),
            (int(2), int(4))
        );
        assert!(mean_bounds(&[], 0).is_err());
        assert!(mean_bounds(&[int(1)], 2).is_err());
    }

    #[test]
    fn grouped_examples() {
        let ms = [int(1), int(1), int(3), int(3)];
        assert_eq!(grouped_bounds(&ms, 2, 2).unwrap(), (int(2), rat(7, 2)));
        assert_eq!(
            grouped_bounds(&vec![rat(5, 2); 3], 1, 3).unwrap(),
            (rat(5, 2), rat(5, 2))
        );
        assert_eq!(
            grouped_bounds(&ms, 4, 1).unwrap(),
            mean_bounds(&ms, 4).unwrap()
        );
        assert!(grouped_bounds(&ms, 3, 1).is_err());
    }

    #[test]
    fn sen_examples() {
        let twice = Assembly::copies(&coin(), 2).unwrap();
        assert_eq!(sen_lower(&twice), dist::expected_max(&twice));
        let toy = Assembly::new(vec![
            FiniteDistribution::two_point(rat(1, 2), int(1)).unwrap(),
            FiniteDistribution::two_point(rat(1, 4), int(1)).unwrap(),
        ])
        .unwrap();
        assert_eq!(sen_lower(&toy), rat(55, 64));
        let ends = Assembly::new(vec![pt(int(0)), pt(int(1))]).unwrap();
        assert_eq!(sen_lower(&ends), rat(3, 4));
    }

    #[test]
    fn sen_dominance_examples() {
        assert!(sen_dominance_check(&Assembly::copies(&coin(), 3).unwrap()));
        let a =
            Assembly::new(vec![coin(), d(&[(int(0), rat(1, 4)), (int(2), rat(3, 4))])]).unwrap();
        assert!(sen_dominance_check(&a));
    }

    #[test]
    fn holder_examples() {
        let h = holder_lower(&[rat(3, 4), rat(3, 4)], &int(1), 2, 1e-12).unwrap();
        assert_eq!(h, Enclosure::exact(rat(3, 4)));
        let h = holder_lower(&[rat(1, 2), rat(3, 4)], &int(1), 2, 1e-12).unwrap();
        let direct = 1.0 - (0.5f64 * 0.25).sqrt();
        assert!((h.mid_f64() - direct).abs() < 1e-12);
        assert!(h.width() <= Rational::from_float(1e-12).unwrap());
        let h = holder_lower(&[int(1), rat(1, 3), int(0)], &int(1), 3, 1e-12).unwrap();
        assert_eq!(h, Enclosure::exact(int(1)));
        assert!(matches!(
            holder_lower(&[int(2)], &int(1), 1, 1e-12),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn gam_examples() {
        let same = gam_gap(&Assembly::copies(&coin(), 3).unwrap(), 1e-12).unwrap();
        assert!(same.integral.contains(&int(0)));
        assert_eq!(same.probabilistic, int(0));
        let ends = gam_gap(&Assembly::new(vec![pt(int(0)), pt(int(1))]).unwrap(), 1e-12).unwrap();
        assert!(ends.integral.contains(&rat(1, 2)));
        assert_eq!(ends.probabilistic, rat(1, 2));
        assert_eq!(ends.bound, rat(1, 2));
        assert!(ends.holds());
    }

    #[test]
    fn report_examples() {
        let r = full_report(&Assembly::copies(&coin(), 2).unwrap(), None, 1e-12).unwrap();
        assert_eq!(r.m_list, vec![rat(3, 4), rat(3, 4)]);
        assert_eq!(r.exact_e, rat(3, 4));
        assert_eq!(r.theta, Some(int(1)));
        assert!(r.chain.all_hold());

        let a = Assembly::new(vec![
            pt(int(1)),
            d(&[(int(0), rat(1, 2)), (int(2), rat(1, 2))]),
        ])
        .unwrap();
        let r = full_report(&a, Some(&int(2)), 1e-12).unwrap();
        assert_eq!(r.m_list, vec![int(1), rat(3, 2)]);
        assert_eq!(r.exact_e, rat(3, 2));
        assert_eq!(r.upper, int(2));
        assert!(r.chain.all_hold());
        assert_eq!(r.chain.holder_le_exact, Some(true));

        let x = d(&[(rat(1, 3), rat(1, 5)), (rat(7, 2), rat(4, 5))]);
        let r = full_report(
            &Assembly::new(vec![x.clone()]).unwrap(),
            Some(&int(4)),
            1e-12,
        )
        .unwrap();
        let e = x.expected_value();
        for v in [&r.m_bar, &r.m_max, &r.exact_e, &r.sen_e, &r.upper] {
            assert_eq!(*v, e);
        }
        let h = r.holder_lower.unwrap();
        assert!((h.mid_f64() - e.to_f64().unwrap()).abs() < 1e-12);

        assert!(matches!(
            full_report(&a, Some(&int(1)), 1e-12),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn equality_examples() {
        assert!(equality_diagnosis(&Assembly::copies(&coin(), 4).unwrap()).unwrap());
        let a =
            Assembly::new(vec![coin(), d(&[(int(0), rat(1, 4)), (int(2), rat(3, 4))])]).unwrap();
        assert!(!equality_diagnosis(&a).unwrap());
        let b = Assembly::new(vec![pt(int(1)), pt(int(2))]).unwrap();
        assert_eq!(dist::expected_max(&b), int(2));
        assert!(!equality_diagnosis(&b).unwrap());
    }
}
