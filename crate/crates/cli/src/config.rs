//! Run configuration: command-line flags, `key=value` config files, and the
//! canonical text embedded in every report.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use sure_boundary::known_variance::PriorSpec;
use sure_boundary::montecarlo::{ModelSpec, SimConfig};
use sure_boundary::{PhiSpec, ProblemDims, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classify,
    Dominate,
    Verify,
    Simulate,
    SureCheck,
    Asymptotics,
    KnownVariance,
    Crosscheck,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Classify,
        Command::Dominate,
        Command::Verify,
        Command::Simulate,
        Command::SureCheck,
        Command::Asymptotics,
        Command::KnownVariance,
        Command::Crosscheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Dominate => "dominate",
            Command::Verify => "verify",
            Command::Simulate => "simulate",
            Command::SureCheck => "sure-check",
            Command::Asymptotics => "asymptotics",
            Command::KnownVariance => "known-variance",
            Command::Crosscheck => "crosscheck",
        }
    }
}

impl FromStr for Command {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| anyhow!("unknown command {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => bail!("format must be json or csv, got {s:?}"),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    Saigo4,
    Psi,
}

impl FromStr for Identity {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "saigo4" => Ok(Identity::Saigo4),
            "psi" => Ok(Identity::Psi),
            _ => bail!("identity must be saigo4 or psi, got {s:?}"),
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Identity::Saigo4 => "saigo4",
            Identity::Psi => "psi",
        })
    }
}

/// Keys accepted in config files and printed in canonical text, in order.
pub const KEYS: [&str; 22] = [
    "command",
    "p",
    "n",
    "phi",
    "a",
    "b",
    "margin",
    "w",
    "identity",
    "w_sharp",
    "ramp_width",
    "grid_points",
    "theta_norm",
    "sigma",
    "reps",
    "seed",
    "model",
    "rel_tol",
    "abs_tol",
    "max_levels",
    "format",
    "out",
];

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub p: u32,
    pub n: Option<u32>,
    pub phi: PhiSpec,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub margin: f64,
    pub w: Vec<f64>,
    pub identity: Identity,
    pub w_sharp: Option<f64>,
    pub ramp_width: Option<f64>,
    pub grid_points: usize,
    pub theta_norm: Vec<f64>,
    pub sigma: Vec<f64>,
    pub reps: u64,
    pub seed: u64,
    pub model: ModelSpec,
    pub quadrature: QuadratureConfig,
    pub format: Format,
    pub output_path: Option<String>,
}

fn list_text(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("{key}: cannot parse {s:?} as a number"))
        })
        .collect()
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.trim()
        .parse::<T>()
        .map_err(|e| anyhow!("{key}: cannot parse {v:?}: {e}"))
}

impl RunConfig {
    /// Resolve a `key -> value` map, filling defaults.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        for k in map.keys() {
            if !KEYS.contains(&k.as_str()) {
                bail!("unknown config key {k:?}");
            }
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        let command: Command = parse(
            "command",
            get("command").ok_or_else(|| anyhow!("missing command"))?,
        )?;
        let p: u32 = parse("p", get("p").ok_or_else(|| anyhow!("missing --p"))?)?;
        let n = get("n").map(|v| parse::<u32>("n", v)).transpose()?;
        let defaults = QuadratureConfig::default();
        let cfg = RunConfig {
            command,
            p,
            n,
            phi: get("phi")
                .map(|v| parse("phi", v))
                .transpose()?
                .unwrap_or(PhiSpec::Zero),
            a: get("a").map(|v| parse("a", v)).transpose()?,
            b: get("b").map(|v| parse("b", v)).transpose()?,
            margin: get("margin")
                .map(|v| parse("margin", v))
                .transpose()?
                .unwrap_or(0.05),
            w: get("w")
                .map(|v| parse_list("w", v))
                .transpose()?
                .unwrap_or_else(|| vec![1.0, 10.0, 1e3, 1e6]),
            identity: get("identity")
                .map(|v| parse("identity", v))
                .transpose()?
                .unwrap_or(Identity::Saigo4),
            w_sharp: get("w_sharp").map(|v| parse("w_sharp", v)).transpose()?,
            ramp_width: get("ramp_width")
                .map(|v| parse("ramp_width", v))
                .transpose()?,
            grid_points: get("grid_points")
                .map(|v| parse("grid_points", v))
                .transpose()?
                .unwrap_or(10_000),
            theta_norm: get("theta_norm")
                .map(|v| parse_list("theta_norm", v))
                .transpose()?
                .unwrap_or_else(|| vec![0.0]),
            sigma: get("sigma")
                .map(|v| parse_list("sigma", v))
                .transpose()?
                .unwrap_or_else(|| vec![1.0]),
            reps: get("reps")
                .map(|v| parse("reps", v))
                .transpose()?
                .unwrap_or(100_000),
            seed: get("seed")
                .map(|v| parse("seed", v))
                .transpose()?
                .unwrap_or(1),
            model: get("model")
                .map(|v| parse("model", v))
                .transpose()?
                .unwrap_or(ModelSpec::Normal),
            quadrature: QuadratureConfig {
                rel_tol: get("rel_tol")
                    .map(|v| parse("rel_tol", v))
                    .transpose()?
                    .unwrap_or(defaults.rel_tol),
                abs_tol: get("abs_tol")
                    .map(|v| parse("abs_tol", v))
                    .transpose()?
                    .unwrap_or(defaults.abs_tol),
                max_refinement_levels: get("max_levels")
                    .map(|v| parse("max_levels", v))
                    .transpose()?
                    .unwrap_or(defaults.max_refinement_levels),
            },
            format: get("format")
                .map(|v| parse("format", v))
                .transpose()?
                .unwrap_or(Format::Json),
            output_path: get("out").map(str::to_string),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        if let Some(n) = self.n {
            ProblemDims::new(self.p, n)?;
        } else if self.p < 3 {
            bail!("p must be at least 3");
        } else if self.needs_n() {
            bail!("{} needs --n", self.command.name());
        }
        if !(0.0..1.0).contains(&self.margin) {
            bail!("margin must lie in [0, 1)");
        }
        if self.grid_points < 500 {
            bail!("grid_points must be at least 500");
        }
        if self.w.is_empty() || self.theta_norm.is_empty() || self.sigma.is_empty() {
            bail!("list options need at least one value");
        }
        if self.format == Format::Csv
            && !matches!(self.command, Command::Simulate | Command::SureCheck)
        {
            bail!("csv output is available for simulate and sure-check only");
        }
        self.model.validate()?;
        Ok(())
    }

    /// Only the known-variance computations do without `n`.
    fn needs_n(&self) -> bool {
        !matches!(
            (self.command, self.identity),
            (Command::KnownVariance, _) | (Command::Crosscheck, Identity::Psi)
        )
    }

    pub fn dims(&self) -> Result<ProblemDims> {
        let n = self
            .n
            .ok_or_else(|| anyhow!("{} needs --n", self.command.name()))?;
        Ok(ProblemDims::new(self.p, n)?)
    }

    /// Prior for the known-variance commands: `a` defaults to -2, `b = 0`
    /// means `L = 1`.
    pub fn prior(&self) -> PriorSpec {
        PriorSpec::with_log_power(self.a.unwrap_or(-2.0), self.b.unwrap_or(0.0))
    }

    pub fn sim_configs(&self) -> Result<Vec<SimConfig>> {
        let dims = self.dims()?;
        let mut out = Vec::new();
        for &theta_norm in &self.theta_norm {
            for &sigma in &self.sigma {
                let c = SimConfig {
                    dims,
                    theta_norm,
                    sigma,
                    reps: self.reps,
                    seed: self.seed,
                    model: self.model,
                };
                c.validate()?;
                out.push(c);
            }
        }
        Ok(out)
    }

    /// `key=value` pairs in canonical order, optional keys only when set.
    pub fn to_map(&self, with_output: bool) -> Vec<(&'static str, String)> {
        let mut v: Vec<(&'static str, String)> = vec![
            ("command", self.command.name().to_string()),
            ("p", self.p.to_string()),
        ];
        if let Some(n) = self.n {
            v.push(("n", n.to_string()));
        }
        v.push(("phi", self.phi.to_string()));
        if let Some(a) = self.a {
            v.push(("a", format!("{a:?}")));
        }
        if let Some(b) = self.b {
            v.push(("b", format!("{b:?}")));
        }
        v.push(("margin", format!("{:?}", self.margin)));
        v.push(("w", list_text(&self.w)));
        v.push(("identity", self.identity.to_string()));
        if let Some(x) = self.w_sharp {
            v.push(("w_sharp", format!("{x:?}")));
        }
        if let Some(x) = self.ramp_width {
            v.push(("ramp_width", format!("{x:?}")));
        }
        v.push(("grid_points", self.grid_points.to_string()));
        v.push(("theta_norm", list_text(&self.theta_norm)));
        v.push(("sigma", list_text(&self.sigma)));
        v.push(("reps", self.reps.to_string()));
        v.push(("seed", self.seed.to_string()));
        v.push(("model", self.model.to_string()));
        v.push(("rel_tol", format!("{:?}", self.quadrature.rel_tol)));
        v.push(("abs_tol", format!("{:?}", self.quadrature.abs_tol)));
        v.push((
            "max_levels",
            self.quadrature.max_refinement_levels.to_string(),
        ));
        v.push(("format", self.format.to_string()));
        if with_output {
            if let Some(o) = &self.output_path {
                v.push(("out", o.clone()));
            }
        }
        v
    }

    /// Canonical `key=value` text, one pair per line. The output path is left
    /// out so that the same run written to two places embeds the same text.
    pub fn canonical_text(&self) -> String {
        self.to_map(false)
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

/// Parse `key=value` lines; blank lines and lines starting with `#` are skipped.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key=value", i + 1))?;
        let k = k.trim().replace('-', "_");
        if !KEYS.contains(&k.as_str()) {
            bail!("line {}: unknown key {k:?}", i + 1);
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

impl FromStr for RunConfig {
    type Err = anyhow::Error;

    fn from_str(text: &str) -> Result<Self> {
        RunConfig::from_map(&parse_kv(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_text_round_trips() {
        let text = "command=simulate\np=5\nn=6\nphi=gb:a=-2,b=1\ntheta_norm=0,2,10\nsigma=0.5,2\nreps=1000\nmodel=t:df=5\n";
        let cfg: RunConfig = text.parse().unwrap();
        let canon = cfg.canonical_text();
        let again: RunConfig = canon.parse().unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.canonical_text(), canon);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!("command=classify\np=5\nq=1\n".parse::<RunConfig>().is_err());
        assert!("command=classify\np=2\nn=6\n".parse::<RunConfig>().is_err());
        assert!("command=classify\np=5\nn=6\nformat=csv\n"
            .parse::<RunConfig>()
            .is_err());
        assert!("command=frobnicate\np=5\n".parse::<RunConfig>().is_err());
    }

    #[test]
    fn comments_and_dashes() {
        let m = parse_kv("# run\ncommand = classify\n\np=5\nn=6\ngrid-points=600\n").unwrap();
        let cfg = RunConfig::from_map(&m).unwrap();
        assert_eq!(cfg.grid_points, 600);
        assert_eq!(cfg.dims().unwrap().n(), 6);
    }
}
