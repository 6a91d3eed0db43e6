//! The `cocond` command-line tool.
//!
//! Exit codes: 0 success (coherent), 1 incoherent, 2 input error.

mod model;
mod render;

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::coherence::{assessment_from_simplex, fast_verdict, CoherenceError, Verdict};
use crate::compound::CompoundError;
use crate::dsl::{parse_problem, parse_target, DslError, ProblemFile, Query, Target};
use crate::event_algebra::EventError;
use crate::rational::Rational;

pub use model::{Method, Model};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCOHERENT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Denominator of the random weights drawn by `sample`.
pub const SAMPLE_DENOMINATOR: u32 = 1 << 16;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error(transparent)]
    Compound(#[from] CompoundError),
    #[error(transparent)]
    Coherence(#[from] CoherenceError),
    #[error("the assessment is not coherent")]
    Incoherent(Box<Verdict>),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "cocond", version, about = "Conjunctions of conditional events and coherence checking")]
struct Args {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide coherence of the assessments in FILE.
    Check { file: PathBuf },
    /// Lower and upper coherent previsions of a compound.
    Bounds {
        file: PathBuf,
        #[arg(long)]
        target: String,
    },
    /// Value tables of one or more compounds over the constituents.
    Table {
        file: PathBuf,
        #[arg(long, required = true)]
        target: Vec<String>,
    },
    /// The constituents generated by the conditionals in FILE.
    Constituents { file: PathBuf },
    /// Expansion of a disjunction, or of a conjunction with negated members, into conjunctions.
    Expand {
        file: PathBuf,
        #[arg(long)]
        target: String,
    },
    /// A seeded random point of the simplex and the coherent assessment it induces.
    Sample {
        #[arg(short = 'n', long = "events")]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the queries written in FILE.
    Run { file: PathBuf },
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{e}");
            return code;
        }
    };
    match dispatch(&args, out) {
        Ok(code) => code,
        Err(CliError::Incoherent(v)) => {
            let _ = match args.format {
                Format::Text => writeln!(out, "{}", render::verdict_text(None, &v, None)),
                Format::Json => writeln!(out, "{}", json(&render::IncoherentReport { coherent: false, verdict: &v })),
            };
            EXIT_INCOHERENT
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn load(path: &PathBuf) -> Result<Model, CliError> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        s
    } else {
        std::fs::read_to_string(path).map_err(io)?
    };
    Model::build(parse_problem(&text)?)
}

fn target(model: &Model, text: &str) -> Result<Target, CliError> {
    Ok(parse_target(text, &model.file)?)
}

fn dispatch(args: &Args, out: &mut dyn Write) -> Result<i32, CliError> {
    let fmt = args.format;
    let emit = |out: &mut dyn Write, text: String| {
        let _ = writeln!(out, "{}", text.trim_end());
    };
    match &args.command {
        Command::Check { file } => {
            let model = load(file)?;
            let (method, verdict) = model.check()?;
            emit(out, render::check(&model, method, &verdict, fmt));
            Ok(if verdict.coherent { EXIT_OK } else { EXIT_INCOHERENT })
        }
        Command::Bounds { file, target: t } => {
            let model = load(file)?;
            let t = target(&model, t)?;
            let b = model.bounds(&t)?;
            emit(out, render::bounds(&t, &b, fmt));
            Ok(EXIT_OK)
        }
        Command::Table { file, target: ts } => {
            let model = load(file)?;
            let targets = ts.iter().map(|t| target(&model, t)).collect::<Result<Vec<_>, _>>()?;
            let crqs = targets
                .iter()
                .map(|t| model.resolve(t))
                .collect::<Result<Vec<_>, _>>()?;
            emit(out, render::table(&model, &crqs, fmt));
            Ok(EXIT_OK)
        }
        Command::Constituents { file } => {
            let model = load(file)?;
            emit(out, render::constituents(&model, fmt));
            Ok(EXIT_OK)
        }
        Command::Expand { file, target: t } => {
            let model = load(file)?;
            let t = target(&model, t)?;
            emit(out, render::expand(&model, &t, fmt)?);
            Ok(EXIT_OK)
        }
        Command::Sample { n, seed } => {
            if *n == 0 || *n > 5 {
                return Err(CliError::Input("sample supports 1 to 5 events".into()));
            }
            let v = sample_simplex(*n, *seed);
            let (m, _) = assessment_from_simplex(&v, *n)?;
            let verdict = fast_verdict(&m, *n)?;
            emit(out, render::sample(*n, *seed, &v, &m, &verdict, fmt));
            Ok(if verdict.coherent { EXIT_OK } else { EXIT_INCOHERENT })
        }
        Command::Run { file } => {
            let model = load(file)?;
            let mut code = EXIT_OK;
            if model.file.queries.is_empty() {
                return Err(CliError::Input("the file has no queries".into()));
            }
            for q in &model.file.queries {
                match q {
                    Query::Coherent => {
                        let (method, verdict) = model.check()?;
                        if !verdict.coherent {
                            code = EXIT_INCOHERENT;
                        }
                        emit(out, render::check(&model, method, &verdict, fmt));
                    }
                    Query::Bounds(t) => match model.bounds(t) {
                        Ok(b) => emit(out, render::bounds(t, &b, fmt)),
                        Err(CliError::Incoherent(v)) => {
                            code = EXIT_INCOHERENT;
                            emit(out, render::verdict_text(None, &v, None));
                        }
                        Err(e) => return Err(e),
                    },
                }
            }
            Ok(code)
        }
    }
}

/// A point of the simplex over `2^n` sign patterns: integer weights in
/// `[0, 2^16]` from a ChaCha stream seeded with `seed`, normalized exactly.
pub fn sample_simplex(n: usize, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = 1usize << n;
    loop {
        let weights: Vec<u32> = (0..size).map(|_| rng.gen_range(0..=SAMPLE_DENOMINATOR)).collect();
        let total: u64 = weights.iter().map(|&w| u64::from(w)).sum();
        if total > 0 {
            return weights
                .into_iter()
                .map(|w| Rational::new(w.into(), total.into()))
                .collect();
        }
    }
}

/// A problem file declaring `n` logically independent conditionals.
pub fn independent_problem(n: usize) -> ProblemFile {
    let mut text = String::new();
    let atoms: Vec<String> = (1..=n).flat_map(|i| [format!("E{i}"), format!("H{i}")]).collect();
    text.push_str(&format!("atoms {};\n", atoms.join(", ")));
    for i in 1..=n {
        text.push_str(&format!("ce C{i} := E{i} | H{i};\n"));
    }
    parse_problem(&text).expect("generated text parses")
}
