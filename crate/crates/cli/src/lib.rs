//! The `fexlab` command line: build a map from a JSON spec, run one analysis,
//! print CSV or JSON.
//!
//! Exit codes: 2 for a bad map or SFT spec, 3 for a point outside `[0, 1)`,
//! 4 when a budget ran out under `--strict`, 1 for anything else.

pub mod report;

use std::fmt;
use std::path::Path;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fexlab::representation::{self, Seed};
use fexlab::shift::{self, LanguageOracle, Sft};
use fexlab::transitivity;
use fexlab::{Backend, Digit, MapSpec, Pim, Scalar, DEFAULT_NODE_BUDGET};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use report::*;

#[derive(Parser, Debug)]
#[command(name = "fexlab", version, about = "Digit expansions and transitivity diagnostics for piecewise interval maps")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Exit with code 4 when a node budget runs out.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Override the backend named in the map spec.
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    /// Seed for `--x random`. The generator is ChaCha8.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Node budget for cylinder and preimage enumeration.
    #[arg(long, global = true, env = "FEXLAB_BUDGET", default_value_t = DEFAULT_NODE_BUDGET as u64,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    /// Worker threads for sampling commands. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendArg {
    Rational,
    Float,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Rational => Backend::Rational,
            BackendArg::Float => Backend::Float,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct MapArg {
    /// Map spec: a JSON file path or inline JSON.
    #[arg(long)]
    pub map: String,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Digits of x, one row per step.
    Encode {
        #[command(flatten)]
        map: MapArg,
        /// A point such as 5/8 or 0.3, or `random`.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Number of points drawn when x is `random`.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
    },
    /// Hull of a word's cylinder.
    Decode {
        #[command(flatten)]
        map: MapArg,
        /// Comma-separated digits.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        word: Vec<Digit>,
    },
    /// Sup of cylinder lengths per order.
    Validity {
        #[command(flatten)]
        map: MapArg,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        n_max: u64,
        #[arg(long, default_value = "1/1000")]
        tol: String,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(i64).range(1..))]
        digit_cap: i64,
    },
    /// Forward orbit and its grid density.
    Orbit {
        #[command(flatten)]
        map: MapArg,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value = "1/100")]
        eps: String,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
    },
    /// Backward tree of x, level by level.
    Preimages {
        #[command(flatten)]
        map: MapArg,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(i64).range(1..))]
        digit_cap: i64,
        /// Also report grid density of the tree and of a greedy chain.
        #[arg(long)]
        eps: Option<String>,
    },
    /// The vcw transitivity test on an SFT or on a map's language.
    ShiftCheck {
        /// SFT spec: a JSON file path or inline JSON.
        #[arg(long, conflicts_with = "map", required_unless_present = "map")]
        sft: Option<String>,
        #[arg(long)]
        map: Option<String>,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        max_len: u64,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(i64).range(1..))]
        digit_cap: i64,
        /// Also list the words of this length.
        #[arg(long)]
        words: Option<usize>,
    },
    /// Cells, branches and flags of a map.
    MapInfo {
        #[command(flatten)]
        map: MapArg,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(i64).range(1..))]
        digit_cap: i64,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Exit {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

fn exit(code: u8, message: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Exit { code, message: message.into() })
}

/// Exit code for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Exit>() {
        return e.code;
    }
    match err.downcast_ref::<fexlab::Error>() {
        Some(fexlab::Error::InvalidSpec(_) | fexlab::Error::InvalidParameter(_) | fexlab::Error::InvalidPartition(_)) => 2,
        Some(fexlab::Error::OutOfDomain(_)) => 3,
        Some(fexlab::Error::BudgetExceeded(_)) => 4,
        _ => 1,
    }
}

/// Runs one command and renders it in the requested format.
pub fn run(cli: &Cli) -> anyhow::Result<(String, Report)> {
    let report = execute(&cli.global, &cli.command)?;
    let text = match cli.global.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    Ok((text, report))
}

fn execute(g: &Global, cmd: &Command) -> anyhow::Result<Report> {
    let budget = g.budget as usize;
    match cmd {
        Command::Encode { map, x, n, samples } => {
            let pim = load_map(&map.map, g)?;
            let (points, seed) = points(&pim, x, *samples, g.seed)?;
            let n = *n as usize;
            let samples = parallel_map(&points, g.jobs, |x| -> anyhow::Result<EncodeSample> {
                let word = representation::encode(&pim, x, n)?;
                let orbit = transitivity::forward_orbit(&pim, x, n)?;
                let keep = orbit.points.len().min(n);
                Ok(EncodeSample { x: x.clone(), word, iterates: orbit.points[..keep].to_vec() })
            })?;
            Ok(Report::Encode(EncodeReport { map: spec_json(&pim), n, seed, samples }))
        }
        Command::Decode { map, word } => {
            let pim = load_map(&map.map, g)?;
            let hull = representation::decode(&pim, word)?;
            let s0 = representation::f_expand(&pim, word, Seed::Zero)?.value;
            let s1 = representation::f_expand(&pim, word, Seed::One)?.value;
            Ok(Report::Decode(DecodeReport {
                map: spec_json(&pim),
                word: word.clone(),
                midpoint: hull.midpoint(),
                length: hull.length(),
                hull,
                seeds: [s0, s1],
            }))
        }
        Command::Validity { map, n_max, tol, digit_cap } => {
            let pim = load_map(&map.map, g)?;
            let tol = scalar_arg(&pim, tol, "--tol")?;
            let cfg = fexlab::RefinementConfig { n_max: *n_max as usize, tol, digit_cap: *digit_cap, node_budget: budget };
            let report = fexlab::refinement_norm_with(&pim, &cfg)?;
            Ok(Report::Validity(ValidityReport { map: spec_json(&pim), n_max: *n_max as usize, report }))
        }
        Command::Orbit { map, x, n, eps, samples } => {
            let pim = load_map(&map.map, g)?;
            let eps = scalar_arg(&pim, eps, "--eps")?;
            let (points, seed) = points(&pim, x, *samples, g.seed)?;
            let n = *n as usize;
            let samples = parallel_map(&points, g.jobs, |x| -> anyhow::Result<OrbitSample> {
                let orbit = transitivity::forward_orbit(&pim, x, n)?;
                let mut density = transitivity::DensityReport::from_points(orbit.points.iter().filter(|p| in_unit(p)), &eps)?;
                density.terminated_at = orbit.terminated.then(|| orbit.points.len() - 1);
                Ok(OrbitSample { orbit, density })
            })?;
            Ok(Report::Orbit(OrbitReport { map: spec_json(&pim), n, eps, seed, samples }))
        }
        Command::Preimages { map, x, depth, digit_cap, eps } => {
            let pim = load_map(&map.map, g)?;
            let x = point(&pim, x)?;
            let depth = *depth as usize;
            let tree = transitivity::backward_tree(&pim, &x, depth, *digit_cap, budget)?;
            let density = match eps {
                Some(e) => {
                    let e = scalar_arg(&pim, e, "--eps")?;
                    Some(transitivity::ptt_estimate(&pim, &x, depth, *digit_cap, budget, &e)?)
                }
                None => None,
            };
            Ok(Report::Preimages(PreimagesReport { map: spec_json(&pim), tree, density }))
        }
        Command::ShiftCheck { sft, map, max_len, digit_cap, words } => {
            let max_len = *max_len as usize;
            if let Some(s) = sft {
                let sft = load_sft(s)?;
                let oracle = LanguageOracle::FromSft(&sft);
                let verdict = shift::is_tt_language(&oracle, max_len)?;
                let listed = match words {
                    Some(n) => Some(shift::language_words(&oracle, *n, budget)?.into_iter().filter(|w| w.len() == *n).collect()),
                    None => None,
                };
                let source = serde_json::to_value(&sft)?;
                Ok(Report::ShiftCheck(ShiftReport { source, max_len, digit_cap: None, verdict, words: listed, words_truncated: false }))
            } else {
                let pim = load_map(map.as_deref().expect("clap requires --sft or --map"), g)?;
                let oracle = LanguageOracle::FromPim { pim: &pim, digit_cap: *digit_cap };
                let verdict = shift::is_tt_language(&oracle, max_len)?;
                let (listed, truncated) = match words {
                    Some(n) => {
                        let a = shift::admissible_words(&pim, *n, *digit_cap)?;
                        (Some(a.words.into_iter().map(|w| w.digits).collect()), a.truncated)
                    }
                    None => (None, false),
                };
                Ok(Report::ShiftCheck(ShiftReport {
                    source: spec_json(&pim),
                    max_len,
                    digit_cap: Some(*digit_cap),
                    verdict,
                    words: listed,
                    words_truncated: truncated,
                }))
            }
        }
        Command::MapInfo { map, digit_cap } => {
            let pim = load_map(&map.map, g)?;
            let (branches, truncated) = pim.branches(*digit_cap);
            let cells = branches
                .iter()
                .map(|b| CellInfo {
                    digit: b.digit(),
                    domain: b.domain().clone(),
                    image: b.image().clone(),
                    monotonicity: b.monotonicity(),
                })
                .collect();
            Ok(Report::MapInfo(MapInfoReport {
                map: spec_json(&pim),
                kind: pim.kind(),
                well_ordered: pim.well_ordered(),
                surjective_hint: pim.surjective_hint(),
                finite: pim.is_finite(),
                digit_cap: *digit_cap,
                truncated,
                cells,
            }))
        }
    }
}

/// Reads `arg` as inline JSON if it looks like an object, else as a path.
fn read_json_arg(arg: &str, what: &str) -> anyhow::Result<String> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(Path::new(arg)).map_err(|e| exit(2, format!("cannot read {what} {arg}: {e}")))
}

fn load_map(arg: &str, g: &Global) -> anyhow::Result<Pim> {
    let text = read_json_arg(arg, "map spec")?;
    let spec = MapSpec::from_json_str(&text).map_err(|e| exit(2, e.to_string()))?;
    let pim = match g.backend {
        Some(b) => Pim::build_on(spec.spec, b.into()),
        None => Pim::from_map_spec(&spec),
    };
    pim.map_err(|e| exit(2, e.to_string()))
}

fn load_sft(arg: &str) -> anyhow::Result<Sft> {
    let text = read_json_arg(arg, "SFT spec")?;
    Sft::from_json_str(&text).map_err(|e| exit(2, e.to_string()))
}

fn spec_json(pim: &Pim) -> Value {
    pim.map_spec().to_json()
}

fn scalar_arg(pim: &Pim, s: &str, flag: &str) -> anyhow::Result<Scalar> {
    let v: Scalar = s.parse().map_err(|e| anyhow!("{flag}: {e}"))?;
    Ok(pim.backend().convert(&v))
}

fn in_unit(x: &Scalar) -> bool {
    !x.is_negative() && *x < x.from_int(1)
}

/// Parses a point and insists on `0 <= x < 1`.
fn point(pim: &Pim, s: &str) -> anyhow::Result<Scalar> {
    let x = scalar_arg(pim, s, "--x")?;
    if !in_unit(&x) {
        return Err(exit(3, format!("x = {x} lies outside [0,1)")));
    }
    Ok(x)
}

/// The given point, or `count` ChaCha8 draws when `x` is `random`: `k/2^64`
/// on the rational backend, a uniform `f64` on the float one.
fn points(pim: &Pim, x: &str, count: u64, seed: u64) -> anyhow::Result<(Vec<Scalar>, Option<u64>)> {
    if x != "random" {
        return Ok((vec![point(pim, x)?], None));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = (0..count)
        .map(|_| match pim.backend() {
            Backend::Rational => {
                let k: u64 = rng.gen();
                let q = num_rational::BigRational::new(k.into(), num_bigint::BigInt::from(1u8) << 64);
                Scalar::from(q)
            }
            Backend::Float => Scalar::float(rng.gen::<f64>()),
        })
        .collect();
    Ok((draws, Some(seed)))
}

/// Applies `f` to every item on up to `jobs` threads, keeping input order.
fn parallel_map<T, R, F>(items: &[T], jobs: u64, f: F) -> anyhow::Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> anyhow::Result<R> + Sync,
{
    let jobs = (jobs as usize).clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<_>>())).collect();
        let mut out = Vec::with_capacity(items.len());
        for h in handles {
            for r in h.join().map_err(|_| anyhow!("worker thread panicked"))? {
                out.push(r.context("sample failed")?);
            }
        }
        Ok(out)
    })
}
