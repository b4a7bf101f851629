//! Assembly files: one assembly per TOML document.
//!
//! ```toml
//! name = "example"
//! n = 2
//! bound = "1"
//!
//! [[member]]
//! atoms = [["0", "1/2"], ["1", "1/2"]]
//!
//! [[member]]
//! atoms = [["0", "1/4"], ["1", "3/4"]]
//! ```
//!
//! Each atom is `[value, mass]`; numbers are strings (fractions, decimals,
//! scientific notation) or TOML integers. Floats are refused because they are
//! not exact. Zero-mass atoms are dropped; masses must sum to exactly 1.

use std::fmt;
use std::ops::Range;

use mixbound::{Assembly, FiniteDistribution, Rational};
use num_traits::{One, Zero};
use serde::Deserialize;
use toml::Spanned;

use crate::number::{fraction, parse_rational};

#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyFile {
    pub name: Option<String>,
    pub bound: Option<Rational>,
    pub assembly: Assembly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    /// 1-based line and column.
    pub location: Option<(usize, usize)>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location {
            Some((line, col)) => write!(f, "line {line}, column {col}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    name: Option<String>,
    n: Spanned<usize>,
    bound: Option<Spanned<RawNumber>>,
    #[serde(default)]
    member: Vec<Spanned<RawMember>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMember {
    atoms: Vec<Spanned<(Spanned<RawNumber>, Spanned<RawNumber>)>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Text(String),
    Int(i64),
    Float(f64),
}

struct Locator<'a>(&'a str);

impl Locator<'_> {
    fn at(&self, span: Range<usize>, message: impl Into<String>) -> ParseError {
        let before = &self.0[..span.start.min(self.0.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError {
            message: message.into(),
            location: Some((line, col)),
        }
    }

    fn number(&self, raw: &Spanned<RawNumber>) -> Result<Rational, ParseError> {
        match raw.get_ref() {
            RawNumber::Text(s) => parse_rational(s).map_err(|e| self.at(raw.span(), e)),
            RawNumber::Int(i) => Ok(Rational::from_integer((*i).into())),
            RawNumber::Float(x) => Err(self.at(
                raw.span(),
                format!("float {x} is not exact; quote it as a string"),
            )),
        }
    }
}

pub fn parse(source: &str) -> Result<AssemblyFile, ParseError> {
    let loc = Locator(source);
    let raw: RawFile = toml::from_str(source).map_err(|e| match e.span() {
        Some(span) => loc.at(span, e.message().to_string()),
        None => ParseError {
            message: e.message().to_string(),
            location: None,
        },
    })?;

    let mut members = Vec::with_capacity(raw.member.len());
    for (k, m) in raw.member.iter().enumerate() {
        let idx = k + 1;
        let mut atoms = Vec::new();
        let mut total = Rational::zero();
        for pair in &m.get_ref().atoms {
            let (v, p) = pair.get_ref();
            let value = loc.number(v)?;
            let mass = loc.number(p)?;
            if value < Rational::zero() {
                return Err(loc.at(v.span(), format!("member {idx}: negative value {value}")));
            }
            if mass < Rational::zero() {
                return Err(loc.at(p.span(), format!("member {idx}: negative mass {mass}")));
            }
            if mass.is_zero() {
                continue;
            }
            total += &mass;
            atoms.push((value, mass));
        }
        if atoms.is_empty() {
            return Err(loc.at(
                m.span(),
                format!("member {idx}: no atom with positive mass"),
            ));
        }
        if !total.is_one() {
            return Err(loc.at(
                m.span(),
                format!("member {idx}: masses sum to {total}, expected 1"),
            ));
        }
        let d = FiniteDistribution::new(atoms)
            .map_err(|e| loc.at(m.span(), format!("member {idx}: {e}")))?;
        members.push(d);
    }

    let n = *raw.n.get_ref();
    if n != members.len() {
        return Err(loc.at(
            raw.n.span(),
            format!("n = {n} but the file lists {} members", members.len()),
        ));
    }
    let assembly = Assembly::new(members).map_err(|e| loc.at(raw.n.span(), e.to_string()))?;
    let bound = raw.bound.as_ref().map(|b| loc.number(b)).transpose()?;
    Ok(AssemblyFile {
        name: raw.name,
        bound,
        assembly,
    })
}

/// Canonical text; `parse(&render(f)) == f` for every valid file.
pub fn render(file: &AssemblyFile) -> String {
    let mut out = String::new();
    if let Some(name) = &file.name {
        out.push_str(&format!("name = {}\n", toml::Value::String(name.clone())));
    }
    out.push_str(&format!("n = {}\n", file.assembly.n()));
    if let Some(b) = &file.bound {
        out.push_str(&format!("bound = \"{}\"\n", fraction(b)));
    }
    for d in file.assembly.members() {
        let atoms: Vec<String> = d
            .atoms()
            .iter()
            .map(|(v, p)| format!("[\"{}\", \"{}\"]", fraction(v), fraction(p)))
            .collect();
        out.push_str(&format!("\n[[member]]\natoms = [{}]\n", atoms.join(", ")));
    }
    out
}

pub fn render_assembly(a: &Assembly) -> String {
    render(&AssemblyFile {
        name: None,
        bound: None,
        assembly: a.clone(),
    })
}
