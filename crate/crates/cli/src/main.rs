use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mixbound::{Rational, DEFAULT_TOL};
use mixbound_cli::commands::{self, Failure, Outcome, SweepSource, Which};
use mixbound_cli::format::{self, AssemblyFile};
use mixbound_cli::number::parse_rational;

/// Exact bounds on the expected maximum of independent non-negative variables.
///
/// Exit status: 0 ok, 1 usage or parse error, 2 precondition violated,
/// 3 internal invariant breach.
#[derive(Parser)]
#[command(name = "mixbound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the bound chain for an assembly file.
    Verify {
        file: PathBuf,
        /// Common upper bound on the support; overrides the file's `bound`.
        #[arg(long, value_parser = parse_rational)]
        bound: Option<Rational>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Build an assembly within epsilon of the upper bound.
    Extremal {
        #[command(flatten)]
        targets: Targets,
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
        epsilon: Rational,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a transform and print its certificate.
    Transform {
        file: PathBuf,
        #[arg(value_enum)]
        which: Kind,
        /// 1-based member index (coalesce and reduce).
        #[arg(long, default_value_t = 1)]
        member: usize,
        /// Left end of the interval; `down` defaults to 0.
        #[arg(long, value_parser = parse_rational)]
        lo: Option<Rational>,
        /// Right end of the interval; `down` defaults to the support maximum.
        #[arg(long, value_parser = parse_rational)]
        hi: Option<Rational>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter and write the bound chain per point as CSV.
    Sweep {
        /// Assembly file containing `{p}` and/or `{1-p}` placeholders.
        #[arg(
            long,
            conflicts_with = "extremal",
            required_unless_present = "extremal"
        )]
        template: Option<PathBuf>,
        /// Sweep `delta` of the staggered extremal family instead.
        #[arg(long)]
        extremal: bool,
        #[command(flatten)]
        targets: OptTargets,
        #[arg(long, value_delimiter = ',', value_parser = parse_rational)]
        values: Option<Vec<Rational>>,
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
        from: Option<Rational>,
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
        to: Option<Rational>,
        #[arg(long)]
        steps: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the expected maximum against the exact value.
    Mc {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
}

#[derive(Args)]
struct Targets {
    /// Number of variables (with --equal).
    #[arg(long)]
    n: Option<usize>,
    /// Every target M_i equals this value.
    #[arg(long, value_parser = parse_rational, conflicts_with = "m")]
    equal: Option<Rational>,
    /// Comma-separated targets M_1,...,M_n.
    #[arg(long, value_delimiter = ',', value_parser = parse_rational)]
    m: Option<Vec<Rational>>,
}

#[derive(Args)]
struct OptTargets {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_parser = parse_rational, conflicts_with = "m")]
    equal: Option<Rational>,
    #[arg(long, value_delimiter = ',', value_parser = parse_rational)]
    m: Option<Vec<Rational>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Coalesce,
    Reduce,
    Down,
}

fn targets(
    n: Option<usize>,
    equal: Option<Rational>,
    m: Option<Vec<Rational>>,
) -> Outcome<Vec<Rational>> {
    let mut list = match (equal, m) {
        (Some(v), None) => {
            let n = n.ok_or_else(|| Failure::Usage("--equal needs --n".into()))?;
            vec![v; n]
        }
        (None, Some(list)) => {
            if let Some(n) = n.filter(|n| *n != list.len()) {
                return Err(Failure::Usage(format!(
                    "--n {n} but --m lists {}",
                    list.len()
                )));
            }
            list
        }
        _ => return Err(Failure::Usage("give --n with --equal, or --m".into())),
    };
    if list.is_empty() {
        return Err(Failure::Usage("n must be at least 1".into()));
    }
    list.sort();
    Ok(list)
}

fn emit(out: Option<&Path>, text: &str) -> Outcome<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Outcome<u8> {
    match cli.command {
        Command::Verify { file, bound, tol } => {
            let f = commands::load(&file)?;
            let v = commands::verify(&f, bound.as_ref(), tol)?;
            print!("{}", v.text);
        }
        Command::Extremal {
            targets: t,
            epsilon,
            out,
        } => {
            let run = commands::extremal(targets(t.n, t.equal, t.m)?, &epsilon)?;
            print!("{}", run.text);
            let file = AssemblyFile {
                name: Some(format!("extremal n={}", run.built.assembly.n())),
                bound: None,
                assembly: run.built.assembly,
            };
            if out.is_none() {
                println!();
            }
            emit(out.as_deref(), &format::render(&file))?;
        }
        Command::Transform {
            file,
            which,
            member,
            lo,
            hi,
            tol,
            out,
        } => {
            let f = commands::load(&file)?;
            let need = |v: Option<Rational>, flag: &str| {
                v.ok_or_else(|| Failure::Usage(format!("{flag} is required for this transform")))
            };
            let which = match which {
                Kind::Coalesce => Which::Coalesce {
                    member,
                    a: need(lo, "--lo")?,
                    b: need(hi, "--hi")?,
                },
                Kind::Reduce => Which::Reduce {
                    member,
                    l: need(lo, "--lo")?,
                    r: need(hi, "--hi")?,
                },
                Kind::Down => Which::Down {
                    lo: lo.unwrap_or_else(|| Rational::from_integer(0.into())),
                    hi: hi.unwrap_or_else(|| f.assembly.support_max()),
                },
            };
            let t = commands::transform(&f.assembly, &which, tol)?;
            print!("{}", t.text);
            let file = AssemblyFile {
                assembly: t.assembly,
                ..f
            };
            if out.is_none() {
                println!();
            }
            emit(out.as_deref(), &format::render(&file))?;
        }
        Command::Sweep {
            template,
            extremal,
            targets: t,
            values,
            from,
            to,
            steps,
            out,
        } => {
            let source = if extremal {
                SweepSource::Extremal(targets(t.n, t.equal, t.m)?)
            } else {
                let path = template.expect("clap requires --template without --extremal");
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                SweepSource::Template(text)
            };
            let range = match (from, to, steps) {
                (None, None, None) => None,
                (Some(a), Some(b), Some(k)) => Some((a, b, k)),
                _ => {
                    return Err(Failure::Usage(
                        "--from, --to and --steps go together".into(),
                    ))
                }
            };
            let grid = commands::param_grid(values, range)?;
            let res = commands::sweep(&source, &grid)?;
            for (p, why) in &res.skipped {
                eprintln!("warning: skipped parameter {p}: {why}");
            }
            let mut buf = Vec::new();
            commands::write_csv(&res.rows, &mut buf)
                .map_err(|e| Failure::Usage(format!("csv: {e}")))?;
            emit(
                out.as_deref(),
                &String::from_utf8(buf).expect("csv is utf-8"),
            )?;
            if !res.skipped.is_empty() {
                return Ok(2);
            }
        }
        Command::Mc {
            file,
            seed,
            samples,
        } => {
            let f = commands::load(&file)?;
            print!(
                "{}",
                commands::monte_carlo(&f.assembly, samples, seed)?.text
            );
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {f}");
            f.code() as u8
        }
    };
    let _ = io::stdout().flush();
    ExitCode::from(code)
}
