//! Command bodies, independent of argument parsing so tests can drive them.

use std::fmt::{self, Write as _};
use std::io;

use mixbound::bounds::{self, BoundReport};
use mixbound::extremal::{self, Extremal};
use mixbound::transforms::{self, Reduction};
use mixbound::{dist, oracle, Assembly, Enclosure, Error, ExtremalSpec, McEstimate, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;

use crate::format::{self, AssemblyFile, ParseError};
use crate::number::{decimal, decimal_f64, fraction};

/// Exit status: 1 usage or parse, 2 precondition, 3 invariant breach.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Usage(String),
    Precondition(String),
    Breach(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Precondition(_) => 2,
            Failure::Breach(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage: {m}"),
            Failure::Precondition(m) => write!(f, "precondition violated: {m}"),
            Failure::Breach(m) => write!(f, "invariant breach: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Precondition(_) | Error::CapExceeded { .. } => {
                Failure::Precondition(e.to_string())
            }
            Error::InvariantBreach(_) => Failure::Breach(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type Outcome<T> = Result<T, Failure>;

pub fn load(path: &std::path::Path) -> Outcome<AssemblyFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    format::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn both(q: &Rational) -> String {
    format!("{}  ({})", fraction(q), decimal(q))
}

fn enclosure(e: &Enclosure) -> String {
    format!(
        "[{}, {}]  (~{}, radius {})",
        fraction(e.lo()),
        fraction(e.hi()),
        decimal_f64(e.mid_f64()),
        decimal_f64(e.radius_f64())
    )
}

fn check(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

pub fn render_report(name: Option<&str>, r: &BoundReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "assembly   {}", name.unwrap_or("(unnamed)"));
    let _ = writeln!(s, "n          {}", r.n);
    for (i, m) in r.m_list.iter().enumerate() {
        let _ = writeln!(s, "M_{:<8} {}", i + 1, both(m));
    }
    let _ = writeln!(s, "M_bar      {}", both(&r.m_bar));
    let _ = writeln!(s, "M_max      {}", both(&r.m_max));
    let _ = writeln!(s, "sen_E      {}", both(&r.sen_e));
    let _ = writeln!(s, "exact_E    {}", both(&r.exact_e));
    let _ = writeln!(s, "upper      {}", both(&r.upper));
    if let (Some(b), Some(h)) = (&r.bound_b, &r.holder_lower) {
        let _ = writeln!(s, "bound b    {}", both(b));
        let _ = writeln!(s, "holder     {}", enclosure(h));
    }
    match &r.theta {
        Some(t) => {
            let _ = writeln!(s, "theta      {}", both(t));
        }
        None => {
            let _ = writeln!(s, "theta      undefined (all M_i are 0)");
        }
    }
    let c = &r.chain;
    let _ = writeln!(s, "check      M_bar <= sen_E      {}", check(c.mbar_le_sen));
    let _ = writeln!(
        s,
        "check      sen_E <= exact_E    {}",
        check(c.sen_le_exact)
    );
    let _ = writeln!(
        s,
        "check      exact_E <= upper    {}",
        check(c.exact_le_upper)
    );
    if let Some(ok) = c.mbar_le_holder {
        let _ = writeln!(s, "check      M_bar <= holder     {}", check(ok));
    }
    if let Some(ok) = c.holder_le_exact {
        let _ = writeln!(s, "check      holder <= exact_E   {}", check(ok));
    }
    s
}

#[derive(Debug)]
pub struct Verified {
    pub report: BoundReport,
    pub text: String,
}

/// `bound` overrides the file's own bound.
pub fn verify(file: &AssemblyFile, bound: Option<&Rational>, tol: f64) -> Outcome<Verified> {
    let b = bound.or(file.bound.as_ref());
    let report = bounds::full_report(&file.assembly, b, tol)?;
    let text = render_report(file.name.as_deref(), &report);
    if !report.chain.all_hold() {
        return Err(Failure::Breach(format!("bound chain violated\n{text}")));
    }
    Ok(Verified { report, text })
}

#[derive(Debug)]
pub struct ExtremalRun {
    pub built: Extremal,
    pub theta: Rational,
    pub theta_sup: Rational,
    pub text: String,
}

pub fn extremal(m_list: Vec<Rational>, epsilon: &Rational) -> Outcome<ExtremalRun> {
    if !epsilon.is_positive() {
        return Err(Failure::Usage(format!(
            "--epsilon must be positive, got {epsilon}"
        )));
    }
    let spec = ExtremalSpec::new(m_list, epsilon.clone())?;
    let built = extremal::build(&spec)?;
    let theta = built.theta();
    let theta_sup = extremal::theta_sup(spec.n());
    let mut text = String::new();
    let _ = writeln!(text, "n          {}", spec.n());
    if let Some(d) = &built.delta {
        let _ = writeln!(text, "delta      {}", both(d));
    }
    for (k, p) in built.p.iter().enumerate() {
        let _ = writeln!(text, "p_{:<8} {}", k + 1, both(p));
    }
    let _ = writeln!(text, "theta      {}", both(&theta));
    let _ = writeln!(text, "theta_sup  {}", both(&theta_sup));
    let _ = writeln!(text, "gap        {}", both(&built.gap));
    let _ = writeln!(text, "epsilon    {}", both(epsilon));
    Ok(ExtremalRun {
        built,
        theta,
        theta_sup,
        text,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Which {
    /// Merge member `member`'s mass on `[a, b]` into one atom.
    Coalesce {
        member: usize,
        a: Rational,
        b: Rational,
    },
    /// Reduce the two atoms of `member` inside `(l, r)`.
    Reduce {
        member: usize,
        l: Rational,
        r: Rational,
    },
    /// Push every member's mass on `[lo, hi]` to the endpoints.
    Down { lo: Rational, hi: Rational },
}

#[derive(Debug)]
pub struct Transformed {
    pub assembly: Assembly,
    pub e_delta: Rational,
    pub text: String,
}

fn member_index(a: &Assembly, member: usize) -> Outcome<usize> {
    if member == 0 || member > a.n() {
        return Err(Failure::Usage(format!(
            "--member must be in 1..={}, got {member}",
            a.n()
        )));
    }
    Ok(member - 1)
}

fn residuals(s: &mut String, r: &[Rational]) {
    for (i, m) in r.iter().enumerate() {
        let _ = writeln!(s, "residual_{:<3} {}", i + 1, both(m));
    }
}

/// Members' objective is `E[X_(n)]`: the companion of member `i` is the max
/// of the others and the exponent is the assembly size.
pub fn transform(a: &Assembly, which: &Which, tol: f64) -> Outcome<Transformed> {
    let n = a.exponent();
    let mut text = String::new();
    let (assembly, e_delta) = match which {
        Which::Coalesce {
            member,
            a: lo,
            b: hi,
        } => {
            let i = member_index(a, *member)?;
            let c = transforms::coalesce(a.member(i), lo, hi, &a.max_of_others(i), n)?;
            let _ = writeln!(text, "transform  coalesce member {member} on [{lo}, {hi}]");
            let _ = writeln!(text, "atom       {}", both(&c.atom));
            let _ = writeln!(text, "cond_mean  {}", both(&c.conditional_mean));
            residuals(&mut text, &c.outcome.m_residual);
            let _ = writeln!(text, "e_delta    {}", both(&c.outcome.e_delta));
            let _ = writeln!(text, "direction  {}", c.outcome.direction);
            (a.with_member(i, c.outcome.result), c.outcome.e_delta)
        }
        Which::Reduce { member, l, r } => {
            let i = member_index(a, *member)?;
            let red = transforms::reduce_pair(a.member(i), l, r, &a.max_of_others(i), n)?;
            let _ = writeln!(text, "transform  reduce member {member} on ({l}, {r})");
            let _ = writeln!(text, "lambda     {}", both(&red.lambda));
            let _ = writeln!(text, "slope_at_a {}", both(&red.slope_at_a));
            match &red.reduction {
                Reduction::Spread { u, partner } => {
                    let _ = writeln!(text, "spread     {} and {}", both(u), both(partner));
                }
                Reduction::Merge {
                    omega,
                    slope_at_merge,
                } => {
                    let _ = writeln!(text, "merge      {}", both(omega));
                    let _ = writeln!(text, "slope      {}", both(slope_at_merge));
                }
            }
            residuals(&mut text, &red.outcome.m_residual);
            let _ = writeln!(text, "e_delta    {}", both(&red.outcome.e_delta));
            let _ = writeln!(text, "direction  {}", red.outcome.direction);
            let _ = writeln!(text, "strict     {}", red.strict);
            (a.with_member(i, red.outcome.result), red.outcome.e_delta)
        }
        Which::Down { lo, hi } => {
            let d = transforms::down_project(a, lo, hi, tol)?;
            let _ = writeln!(text, "transform  down on [{lo}, {hi}]");
            for (i, alpha) in d.alphas.iter().enumerate() {
                match alpha {
                    Some(e) => {
                        let _ = writeln!(text, "alpha_{:<5} {}", i + 1, enclosure(e));
                    }
                    None => {
                        let _ = writeln!(text, "alpha_{:<5} untouched", i + 1);
                    }
                }
            }
            residuals(&mut text, &d.outcome.m_residual);
            let _ = writeln!(text, "e_delta    {}", both(&d.outcome.e_delta));
            let _ = writeln!(text, "radius     {}", decimal(&d.outcome.radius));
            let _ = writeln!(text, "direction  {}", d.outcome.direction);
            (d.outcome.result, d.outcome.e_delta)
        }
    };
    Ok(Transformed {
        assembly,
        e_delta,
        text,
    })
}

#[derive(Debug)]
pub struct MonteCarlo {
    pub estimate: McEstimate,
    pub exact: Rational,
    pub text: String,
}

pub fn monte_carlo(a: &Assembly, samples: u64, seed: u64) -> Outcome<MonteCarlo> {
    let estimate = oracle::mc_expected_max(a, samples, seed)?;
    let exact = dist::expected_max(a);
    let exact_f = exact.to_f64().unwrap_or(f64::NAN);
    let z = (estimate.mean - exact_f) / estimate.stderr;
    let mut text = String::new();
    let _ = writeln!(text, "samples    {samples}");
    let _ = writeln!(text, "seed       {seed}");
    let _ = writeln!(text, "mc_mean    {}", decimal_f64(estimate.mean));
    let _ = writeln!(text, "stderr     {}", decimal_f64(estimate.stderr));
    let _ = writeln!(text, "exact_E    {}", both(&exact));
    let _ = writeln!(text, "z          {}", decimal_f64(z));
    Ok(MonteCarlo {
        estimate,
        exact,
        text,
    })
}

/// What a sweep varies.
#[derive(Debug, Clone)]
pub enum SweepSource {
    /// Assembly file text containing `{p}` and/or `{1-p}`.
    Template(String),
    /// The staggered extremal family for these targets, swept over `delta`.
    Extremal(Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: Rational,
    pub m_bar: Rational,
    pub sen_e: Rational,
    pub exact_e: Rational,
    pub upper: Rational,
    pub theta: Option<Rational>,
    pub gap: Rational,
}

impl SweepRow {
    /// `M̄ <= sen_E <= exact_E <= upper`.
    pub fn ordered(&self) -> bool {
        self.m_bar <= self.sen_e && self.sen_e <= self.exact_e && self.exact_e <= self.upper
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Parameter values whose instance was invalid, with the reason.
    pub skipped: Vec<(Rational, String)>,
}

pub const SWEEP_HEADER: [&str; 14] = [
    "param",
    "param_dec",
    "m_bar",
    "m_bar_dec",
    "sen_e",
    "sen_e_dec",
    "exact_e",
    "exact_e_dec",
    "upper",
    "upper_dec",
    "theta",
    "theta_dec",
    "gap",
    "gap_dec",
];

/// `values`, or `steps + 1` evenly spaced points from `from` to `to`.
pub fn param_grid(
    values: Option<Vec<Rational>>,
    range: Option<(Rational, Rational, u32)>,
) -> Outcome<Vec<Rational>> {
    let mut grid = match (values, range) {
        (Some(v), None) if !v.is_empty() => v,
        (None, Some((from, to, steps))) => {
            if steps == 0 {
                return Err(Failure::Usage("--steps must be at least 1".into()));
            }
            let width = (&to - &from) / Rational::from_integer(BigInt::from(steps));
            (0..=steps)
                .map(|k| &from + &width * Rational::from_integer(BigInt::from(k)))
                .collect()
        }
        _ => {
            return Err(Failure::Usage(
                "give either --values or all of --from, --to and --steps".into(),
            ))
        }
    };
    grid.sort();
    grid.dedup();
    Ok(grid)
}

fn instantiate(source: &SweepSource, p: &Rational) -> Result<Assembly, String> {
    match source {
        SweepSource::Template(text) => {
            let filled = text
                .replace("{1-p}", &fraction(&(Rational::one() - p)))
                .replace("{p}", &fraction(p));
            format::parse(&filled)
                .map(|f| f.assembly)
                .map_err(|e| e.to_string())
        }
        SweepSource::Extremal(m_list) => {
            if !p.is_positive() || *p >= Rational::one() {
                return Err(format!("delta must lie in (0, 1), got {p}"));
            }
            let schedule = extremal::staggered_schedule(m_list.len(), p);
            let loose: Rational = m_list.iter().sum::<Rational>() + Rational::one();
            let spec = ExtremalSpec::new(m_list.clone(), loose)
                .and_then(|s| s.with_schedule(schedule))
                .map_err(|e| e.to_string())?;
            extremal::build(&spec)
                .map(|e| e.assembly)
                .map_err(|e| e.to_string())
        }
    }
}

/// Rows follow the order of `params`; [`param_grid`] yields them sorted.
pub fn sweep(source: &SweepSource, params: &[Rational]) -> Outcome<SweepResult> {
    if let SweepSource::Template(t) = source {
        if !t.contains("{p}") && !t.contains("{1-p}") {
            return Err(Failure::Usage(
                "template has no {p} or {1-p} placeholder".into(),
            ));
        }
    }
    let computed: Vec<Result<Result<SweepRow, String>, Failure>> = params
        .par_iter()
        .map(|p| {
            let a = match instantiate(source, p) {
                Ok(a) => a,
                Err(e) => return Ok(Err(e)),
            };
            let r = bounds::full_report(&a, None, mixbound::DEFAULT_TOL)?;
            let row = SweepRow {
                param: p.clone(),
                gap: &r.upper - &r.exact_e,
                m_bar: r.m_bar,
                sen_e: r.sen_e,
                exact_e: r.exact_e,
                upper: r.upper,
                theta: r.theta,
            };
            if !row.ordered() {
                return Err(Failure::Breach(format!("chain violated at parameter {p}")));
            }
            Ok(Ok(row))
        })
        .collect();
    let mut out = SweepResult::default();
    for (p, c) in params.iter().zip(computed) {
        match c? {
            Ok(row) => out.rows.push(row),
            Err(reason) => out.skipped.push((p.clone(), reason)),
        }
    }
    Ok(out)
}

pub fn write_csv<W: io::Write>(rows: &[SweepRow], sink: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        let (theta, theta_dec) = match &r.theta {
            Some(t) => (fraction(t), decimal(t)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            fraction(&r.param),
            decimal(&r.param),
            fraction(&r.m_bar),
            decimal(&r.m_bar),
            fraction(&r.sen_e),
            decimal(&r.sen_e),
            fraction(&r.exact_e),
            decimal(&r.exact_e),
            fraction(&r.upper),
            decimal(&r.upper),
            theta,
            theta_dec,
            fraction(&r.gap),
            decimal(&r.gap),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use mixbound::{int, rat};

    const PAIR: &str = r#"
n = 2
[[member]]
atoms = [["0", "{p}"], ["1", "{1-p}"]]
[[member]]
atoms = [["0", "1/4"], ["1", "3/4"]]
"#;

    #[test]
    fn grid_from_range() {
        let g = param_grid(None, Some((int(0), int(1), 4))).unwrap();
        assert_eq!(g, vec![int(0), rat(1, 4), rat(1, 2), rat(3, 4), int(1)]);
        assert_eq!(
            param_grid(None, Some((int(0), int(1), 0)))
                .unwrap_err()
                .code(),
            1
        );
        assert_eq!(param_grid(None, None).unwrap_err().code(), 1);
    }

    #[test]
    fn template_sweep_is_flat_where_members_coincide() {
        let params = [int(0), rat(1, 4), rat(1, 2), rat(3, 4)];
        let res = sweep(&SweepSource::Template(PAIR.into()), &params).unwrap();
        assert_eq!(res.rows.len(), 4);
        assert_eq!(res.rows[1].theta, Some(int(1)));
        assert!(res.rows.iter().all(SweepRow::ordered));
    }

    #[test]
    fn invalid_points_are_skipped() {
        let params = [rat(1, 2), rat(3, 2)];
        let res = sweep(&SweepSource::Template(PAIR.into()), &params).unwrap();
        assert_eq!(res.rows.len(), 1);
        assert_eq!(res.skipped.len(), 1);
        assert_eq!(res.skipped[0].0, rat(3, 2));
    }

    #[test]
    fn extremal_sweep_gap_shrinks() {
        let params = [rat(1, 10), rat(1, 100), rat(1, 1000)];
        let res = sweep(&SweepSource::Extremal(vec![int(1), int(1)]), &params).unwrap();
        let gaps: Vec<&Rational> = res.rows.iter().map(|r| &r.gap).collect();
        assert!(gaps.windows(2).all(|w| w[0] > w[1]), "{gaps:?}");
    }

    #[test]
    fn csv_layout() {
        let res = sweep(&SweepSource::Template(PAIR.into()), &[rat(1, 4)]).unwrap();
        let mut buf = Vec::new();
        write_csv(&res.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("1/4,0.25,"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn epsilon_must_be_positive() {
        assert_eq!(
            extremal(vec![int(1), int(1)], &int(0)).unwrap_err().code(),
            1
        );
        assert_eq!(
            extremal(vec![int(1), int(1)], &rat(-1, 2))
                .unwrap_err()
                .code(),
            1
        );
    }
}
