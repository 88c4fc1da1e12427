//! Command-line front end for `sure-boundary`.
//!
//! Exit status:
//!
//! | code | meaning                                                   |
//! |------|-----------------------------------------------------------|
//! | 0    | success                                                   |
//! | 1    | runtime error, or a check in the report failed            |
//! | 2    | the classification (or Brown verdict) is indeterminate    |
//! | 64   | malformed flags, config file or thread cap                |

pub mod commands;
pub mod config;
pub mod report;

use std::collections::BTreeMap;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::commands::execute;
use crate::config::{parse_kv, Command, RunConfig};

pub const EXIT_USAGE: i32 = 64;
pub const THREADS_ENV: &str = "SURE_BOUNDARY_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "sure-boundary",
    version,
    about = "Quasi-admissibility analysis for Stein-type shrinkage under unknown scale"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Classify a rule as quasi-admissible or quasi-inadmissible.
    Classify(Flags),
    /// Build the dominating perturbation and check it on a grid.
    Dominate(Flags),
    /// Like `dominate`, then compare risks by paired simulation.
    Verify(Flags),
    /// Simulated risk and mean unbiased risk estimate.
    Simulate(Flags),
    /// Test that the unbiased risk estimate matches the simulated risk.
    SureCheck(Flags),
    /// Fitted tail limit and coefficient of a rule.
    Asymptotics(Flags),
    /// Known-variance prior: Brown verdict and limit checks.
    KnownVariance(Flags),
    /// Compare two routes to the same generalized Bayes quantity.
    Crosscheck(Flags),
}

/// Every flag is optional here; values are merged over `--config` and then
/// defaulted in [`RunConfig::from_map`].
#[derive(Args, Debug, Default)]
struct Flags {
    /// key=value file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<String>,
    /// Dimension of the mean.
    #[arg(long, visible_alias = "dim")]
    p: Option<String>,
    /// Degrees of freedom of the residual sum of squares.
    #[arg(long, visible_alias = "resid-df")]
    n: Option<String>,
    /// Shrinkage rule, e.g. `zero`, `jsplus:a=0.375`, `gb:a=-2,b=1`.
    #[arg(long, visible_alias = "shrinkage", allow_hyphen_values = true)]
    phi: Option<String>,
    /// Prior exponent `a` (known variance).
    #[arg(long, visible_alias = "prior-a", allow_negative_numbers = true)]
    a: Option<String>,
    /// Log power `b`: tail coefficient, prior factor or dominator witness.
    #[arg(long, visible_alias = "log-power", allow_negative_numbers = true)]
    b: Option<String>,
    /// Dead zone half-width around 1 for the classifier.
    #[arg(long)]
    margin: Option<String>,
    /// Comma-separated evaluation points for `crosscheck`.
    #[arg(long)]
    w: Option<String>,
    /// saigo4 or psi.
    #[arg(long)]
    identity: Option<String>,
    /// Start of the perturbation ramp; constructed when absent.
    #[arg(long)]
    w_sharp: Option<String>,
    /// Width of the ramp; defaults to `w_sharp`.
    #[arg(long)]
    ramp_width: Option<String>,
    /// Points in the domination verification grid.
    #[arg(long)]
    grid_points: Option<String>,
    /// Comma-separated values of |theta|.
    #[arg(long)]
    theta_norm: Option<String>,
    /// Comma-separated noise scales.
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// `normal` or `t:df=<df>`.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    rel_tol: Option<String>,
    #[arg(long)]
    abs_tol: Option<String>,
    #[arg(long)]
    max_levels: Option<String>,
    /// json or csv.
    #[arg(long)]
    format: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<String>,
}

impl Flags {
    fn pairs(self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("p", self.p),
            ("n", self.n),
            ("phi", self.phi),
            ("a", self.a),
            ("b", self.b),
            ("margin", self.margin),
            ("w", self.w),
            ("identity", self.identity),
            ("w_sharp", self.w_sharp),
            ("ramp_width", self.ramp_width),
            ("grid_points", self.grid_points),
            ("theta_norm", self.theta_norm),
            ("sigma", self.sigma),
            ("reps", self.reps),
            ("seed", self.seed),
            ("model", self.model),
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_levels", self.max_levels),
            ("format", self.format),
            ("out", self.out),
        ]
    }
}

fn split(sub: Sub) -> (Command, Flags) {
    match sub {
        Sub::Classify(f) => (Command::Classify, f),
        Sub::Dominate(f) => (Command::Dominate, f),
        Sub::Verify(f) => (Command::Verify, f),
        Sub::Simulate(f) => (Command::Simulate, f),
        Sub::SureCheck(f) => (Command::SureCheck, f),
        Sub::Asymptotics(f) => (Command::Asymptotics, f),
        Sub::KnownVariance(f) => (Command::KnownVariance, f),
        Sub::Crosscheck(f) => (Command::Crosscheck, f),
    }
}

/// Merge config file and flags into a resolved [`RunConfig`].
fn resolve(command: Command, flags: Flags) -> Result<RunConfig> {
    let mut map: BTreeMap<String, String> = match &flags.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).with_context(|| format!("reading config {path}"))?;
            parse_kv(&text).with_context(|| format!("in config {path}"))?
        }
        None => BTreeMap::new(),
    };
    map.insert("command".into(), command.name().into());
    for (k, v) in flags.pairs() {
        if let Some(v) = v {
            map.insert(k.into(), v);
        }
    }
    RunConfig::from_map(&map)
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => {
            let n: usize = s
                .trim()
                .parse()
                .with_context(|| format!("{THREADS_ENV}={s:?} is not a positive integer"))?;
            anyhow::ensure!(n > 0, "{THREADS_ENV} must be positive");
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

/// Run the tool on `argv` (including the program name) and return the exit
/// status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (command, flags) = split(cli.command);
    let (cfg, threads) = match resolve(command, flags).and_then(|c| Ok((c, thread_cap()?))) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("sure-boundary: {e:#}");
            return EXIT_USAGE;
        }
    };
    let go = || -> Result<i32> {
        let outcome = execute(&cfg)?;
        let config_text = cfg.canonical_text();
        let envelope = json!({
            "command": cfg.command.name(),
            "config": config_text,
            "status": outcome.status,
            "result": outcome.result,
        });
        let table = outcome
            .table
            .as_ref()
            .map(|(h, r)| (h.as_slice(), r.as_slice()));
        report::emit_report(
            &envelope,
            table,
            &config_text,
            cfg.format,
            cfg.output_path.as_deref(),
        )?;
        Ok(outcome.status.exit_code())
    };
    let result = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(go),
            Err(e) => Err(e.into()),
        },
        None => go(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sure-boundary: {e:#}");
            1
        }
    }
}
