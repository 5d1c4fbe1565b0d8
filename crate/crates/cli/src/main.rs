//! `clatool`: generate, verify and apply constrained locating arrays.
//!
//! Exit codes: 0 success, 1 verification failed or outcome unexplained,
//! 2 usage or input error, 3 resource cap exceeded.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cla::selftest::{run_all, SelfTestOptions};
use cla::{
    enumerate_valid_tests, generate_cca, generate_cla, indistinguishable_pairs, invalid_interactions, locate_faults,
    parse_array, parse_model, parse_outcomes, serialize_array, valid_interactions_with, verify_cca, verify_cla,
    verify_la, Backend, CcaOptions, ClaParams, Limits, Mode, ReduceOptions, SutModel,
};

const EXIT_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "clatool", version, about = "Constrained locating arrays for combinatorial interaction testing")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Largest number of tests enumerated exhaustively.
    #[arg(long, global = true)]
    cap_tests: Option<usize>,

    /// Largest interaction-set universe built.
    #[arg(long, global = true)]
    cap_universe: Option<usize>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the primary output here instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Cca,
    Cla,
    La,
}

/// `(d,t)` and the bar flags.
#[derive(Args, Debug, Clone, Copy)]
struct ParamArgs {
    /// Interaction-set size.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Interaction strength.
    #[arg(long)]
    t: usize,
    /// Admit every set size up to d.
    #[arg(long)]
    bar_d: bool,
    /// Admit every strength up to t (independent sets only).
    #[arg(long)]
    bar_t: bool,
}

impl ParamArgs {
    fn params(&self) -> ClaParams {
        ClaParams::with_flags(self.d, self.t, self.bar_d, self.bar_t)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a model and print its size, valid tests and invalid pairs.
    Validate { model: PathBuf },
    /// Generate a t-way constrained covering array.
    GenCca {
        model: PathBuf,
        #[arg(long)]
        t: usize,
        /// Candidate rows built per committed row.
        #[arg(long, default_value_t = 50)]
        candidates: usize,
    },
    /// Generate a (t+1)-CCA and reduce it to a (1bar,tbar)-CLA.
    GenCla {
        model: PathBuf,
        #[arg(long)]
        t: usize,
        /// Random deletion orders tried.
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value_t = 50)]
        candidates: usize,
    },
    /// Check an array against the CCA, CLA or LA condition.
    Verify {
        model: PathBuf,
        array: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// List the indistinguishable pairs of interaction sets.
    Distinguish {
        model: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Report the interaction sets explaining a pass/fail outcome vector.
    Locate {
        model: PathBuf,
        array: PathBuf,
        outcomes: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run the structural property checks on seeded random models.
    Selftest {
        /// Number of random models.
        #[arg(long, default_value_t = 200)]
        models: usize,
    },
}

impl Cli {
    fn limits(&self) -> Limits {
        let mut limits = Limits::default();
        if let Some(c) = self.cap_tests {
            limits.max_tests = c;
        }
        if let Some(c) = self.cap_universe {
            limits.max_universe = c;
        }
        limits
    }

    /// Writes `text` to `-o` when given, otherwise to stdout.
    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_model(path: &Path) -> Result<SutModel> {
    let text = read(path)?;
    parse_model(&text).with_context(|| format!("parsing {}", path.display()))
}

fn json(value: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn run(cli: &Cli) -> Result<u8> {
    let limits = cli.limits();
    match &cli.command {
        Command::Validate { model } => {
            let m = load_model(model)?;
            let tests = enumerate_valid_tests(&m, limits.max_tests)?;
            let invalid = if m.k() >= 2 { invalid_interactions(&m, 2)? } else { Vec::new() };
            let valid2 = if m.k() >= 2 {
                valid_interactions_with(&m, 2, Mode::Exact, Backend::Auto, &limits)?.len()
            } else {
                0
            };
            if cli.format == Format::Json {
                let record = serde_json::json!({
                    "name": m.name(),
                    "k": m.k(),
                    "domains": m.domain_sizes(),
                    "constraints": m.constraints().len(),
                    "valid_tests": tests.len(),
                    "valid_2way": valid2,
                    "invalid_2way": invalid.iter().map(|t| t.display(&m).to_string()).collect::<Vec<_>>(),
                });
                cli.emit(&json(&record)?)?;
            } else {
                let mut out = String::new();
                writeln!(out, "model: {}", m.name())?;
                writeln!(out, "k={}", m.k())?;
                let domains: Vec<String> = m.factors().iter().map(|f| format!("{}:{}", f.name(), f.len())).collect();
                writeln!(out, "domains: {}", domains.join(" "))?;
                writeln!(out, "constraints: {}", m.constraints().len())?;
                writeln!(out, "valid tests: {}", tests.len())?;
                writeln!(out, "valid 2-way interactions: {valid2}")?;
                writeln!(out, "invalid 2-way interactions: {}", invalid.len())?;
                for t in &invalid {
                    writeln!(out, "  {}", t.display(&m))?;
                }
                cli.emit(&out)?;
            }
            Ok(0)
        }
        Command::GenCca { model, t, candidates } => {
            let m = load_model(model)?;
            let options = CcaOptions { candidates: *candidates, ..CcaOptions::default() };
            let array = generate_cca(&m, *t, cli.seed, &options, &limits)?;
            cli.emit(&serialize_array(&array, &m))?;
            if cli.output.is_some() {
                println!("generated {}-CCA with {} rows", t, array.len());
            }
            Ok(0)
        }
        Command::GenCla { model, t, runs, candidates } => {
            let m = load_model(model)?;
            let cca_options = CcaOptions { candidates: *candidates, ..CcaOptions::default() };
            let generation = generate_cla(&m, *t, cli.seed, &cca_options, &ReduceOptions { runs: *runs }, &limits)?;
            cli.emit(&serialize_array(&generation.cla, &m))?;
            let report = match cli.format {
                Format::Json => json(&generation.report)?,
                Format::Text => generation.report.render() + &generation.verification.render(&m),
            };
            // The report goes to stdout only when the array went to a file.
            if cli.output.is_some() {
                print!("{report}");
            } else {
                eprint!("{report}");
            }
            Ok(0)
        }
        Command::Verify { model, array, kind, params } => {
            let m = load_model(model)?;
            let a = parse_array(&read(array)?, &m).with_context(|| format!("parsing {}", array.display()))?;
            let report = match kind {
                Kind::Cca => verify_cca(&m, &a, params.t, &limits)?,
                Kind::Cla => verify_cla(&m, &a, params.params(), &limits)?,
                Kind::La => verify_la(&m, &a, params.params(), &limits)?,
            };
            let text = match cli.format {
                Format::Json => json(&report)?,
                Format::Text => report.render(&m),
            };
            cli.emit(&text)?;
            Ok(if report.passed() { 0 } else { EXIT_FAILED })
        }
        Command::Distinguish { model, params } => {
            let m = load_model(model)?;
            let pairs = indistinguishable_pairs(&m, params.params(), &limits)?;
            let text = match cli.format {
                Format::Json => json(&pairs)?,
                Format::Text => {
                    let mut out = String::new();
                    writeln!(out, "{} indistinguishable pair(s) for {}", pairs.len(), params.params())?;
                    for (a, b) in &pairs {
                        writeln!(out, "  {}  ~  {}", a.display(&m), b.display(&m))?;
                    }
                    out
                }
            };
            cli.emit(&text)?;
            Ok(0)
        }
        Command::Locate { model, array, outcomes, params } => {
            let m = load_model(model)?;
            let a = parse_array(&read(array)?, &m).with_context(|| format!("parsing {}", array.display()))?;
            let o = parse_outcomes(&read(outcomes)?, a.len()).with_context(|| format!("parsing {}", outcomes.display()))?;
            let result = locate_faults(&m, &a, &o, params.params(), &limits)?;
            let text = match cli.format {
                Format::Json => json(&result)?,
                Format::Text => result.render(&m),
            };
            cli.emit(&text)?;
            Ok(if result.is_explained() { 0 } else { EXIT_FAILED })
        }
        Command::Selftest { models } => {
            let options = SelfTestOptions { models: *models, seed: cli.seed, limits, ..SelfTestOptions::default() };
            let outcomes = run_all(&options);
            let text = match cli.format {
                Format::Json => json(&outcomes)?,
                Format::Text => {
                    let mut out = String::new();
                    for o in &outcomes {
                        writeln!(out, "{o}")?;
                        for f in &o.failures {
                            writeln!(out, "  {f}")?;
                        }
                    }
                    out
                }
            };
            cli.emit(&text)?;
            Ok(if outcomes.iter().all(|o| o.passed()) { 0 } else { EXIT_FAILED })
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<cla::Error>() {
        Some(cla::Error::CapExceeded { .. }) => EXIT_CAP,
        Some(cla::Error::Inconsistent(_)) => EXIT_FAILED,
        _ => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
