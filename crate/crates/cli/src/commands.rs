//! One handler per subcommand. Each returns a JSON result, optional CSV
//! rows, and a status that decides the exit code.

use anyhow::{anyhow, bail, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sure_boundary::boundary::{
    assumption_grid, cc0_diagnostic, check_assumptions, classify, construct_dominator,
    dominator_nu, profile_grid, verify_domination, DominatorSpec, QuasiClass,
    DEFAULT_MAX_SIGN_CHANGES,
};
use sure_boundary::known_variance::{
    brown_classify, brown_integral_numeric, default_z_grid, gradient_bound_check,
    is_boundary_adjacent, psi_known, psi_known_identity, AdmissClass,
};
use sure_boundary::montecarlo::{domination_mc, estimate_risk, sure_unbiasedness_test};
use sure_boundary::phi::gb::{phi_gb_identity_saigo4, phi_gb_unknown};
use sure_boundary::phi::{tail_profile, TailProfile};
use sure_boundary::{log_grid, Phi, PhiSpec, ProblemDims};

use crate::config::{Command, Identity, RunConfig};

/// Outcome of a run, mapped to exit codes 0, 2 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Indeterminate,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Indeterminate => 2,
            Status::Failed => 1,
        }
    }
}

pub struct Outcome {
    pub result: Value,
    /// Header and rows for CSV output.
    pub table: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    pub status: Status,
}

impl Outcome {
    fn json(result: Value, status: Status) -> Self {
        Self {
            result,
            table: None,
            status,
        }
    }
}

/// Relative agreement required of the two routes in `crosscheck`.
pub const CROSSCHECK_TOL: f64 = 1e-8;
/// Relative tolerance on fitted tail coefficients in `asymptotics`.
pub const TAIL_COEF_TOL: f64 = 0.15;
/// Upper limit of the Brown partial integrals.
pub const BROWN_R_MAX: f64 = 1e6;
/// Argument at which `(log v)(p - 2 - psi(v))` is reported.
pub const PSI_RATE_V: f64 = 1e8;

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        Command::Classify => run_classify(cfg),
        Command::Dominate => run_dominate(cfg, false),
        Command::Verify => run_dominate(cfg, true),
        Command::Simulate => run_simulate(cfg),
        Command::SureCheck => run_sure_check(cfg),
        Command::Asymptotics => run_asymptotics(cfg),
        Command::KnownVariance => run_known_variance(cfg),
        Command::Crosscheck => run_crosscheck(cfg),
    }
}

struct Classified {
    dims: ProblemDims,
    phi: Phi,
    profile: TailProfile,
    verdict: QuasiClass,
}

fn classified(cfg: &RunConfig) -> Result<Classified> {
    let dims = cfg.dims()?;
    let phi = Phi::from_spec(&cfg.phi, dims, &cfg.quadrature)?;
    let profile = tail_profile(&phi, dims, &profile_grid())?;
    let verdict = classify(&phi, dims, &profile, cfg.margin);
    Ok(Classified {
        dims,
        phi,
        profile,
        verdict,
    })
}

fn verdict_status(v: &QuasiClass) -> Status {
    match v {
        QuasiClass::Indeterminate { .. } => Status::Indeterminate,
        _ => Status::Ok,
    }
}

fn run_classify(cfg: &RunConfig) -> Result<Outcome> {
    let c = classified(cfg)?;
    let assumptions = check_assumptions(&c.phi, &assumption_grid(), DEFAULT_MAX_SIGN_CHANGES)?;
    let k = c.dims.constants();
    let status = verdict_status(&c.verdict);
    Ok(Outcome::json(
        json!({
            "verdict": c.verdict,
            "tail_profile": c.profile,
            "assumptions": assumptions,
            "constants": {"c_pn": k.c_pn, "d_n": k.d_n, "beta_star": k.beta_star},
        }),
        status,
    ))
}

/// `{0}` plus `points - 1` log-spaced values from `1e-4` past the ramp.
fn verification_grid(w_sharp: f64, points: usize) -> Vec<f64> {
    let hi = if w_sharp.is_finite() {
        (100.0 * w_sharp).max(1e8)
    } else {
        1e8
    };
    let mut g = vec![0.0];
    g.extend(log_grid(1e-4, hi, points - 1));
    g
}

fn dominator_for(
    cfg: &RunConfig,
    c: &Classified,
) -> Result<std::result::Result<DominatorSpec, Status>> {
    let b = match (cfg.b, &c.verdict) {
        (Some(b), _) => b,
        (None, QuasiClass::QuasiInadmissible { b_witness, .. }) => *b_witness,
        (None, QuasiClass::Indeterminate { .. }) => return Ok(Err(Status::Indeterminate)),
        (None, QuasiClass::QuasiAdmissible { .. }) => return Ok(Err(Status::Failed)),
    };
    let Some(w_sharp) = cfg.w_sharp else {
        return Ok(Ok(construct_dominator(&c.phi, c.dims, b, &c.profile)?));
    };
    let phi_star = c
        .profile
        .phi_limit
        .finite()
        .ok_or_else(|| anyhow!("phi is unbounded; no dominator of this form"))?;
    if w_sharp.is_nan() || w_sharp <= 0.0 {
        bail!("w_sharp must be positive, got {w_sharp}");
    }
    let ramp_width = cfg.ramp_width.unwrap_or(w_sharp);
    if ramp_width.is_nan() || ramp_width <= 0.0 {
        bail!("ramp_width must be positive, got {ramp_width}");
    }
    let w_star = match c.verdict {
        QuasiClass::QuasiInadmissible { w_star, .. } => w_star,
        _ => w_sharp,
    };
    Ok(Ok(DominatorSpec {
        nu: dominator_nu(b, phi_star, c.dims),
        w_sharp,
        ramp_width,
        b,
        w_star,
    }))
}

fn run_dominate(cfg: &RunConfig, simulate: bool) -> Result<Outcome> {
    let c = classified(cfg)?;
    let spec = match dominator_for(cfg, &c)? {
        Ok(spec) => spec,
        Err(status) => {
            return Ok(Outcome::json(
                json!({
                    "classification": c.verdict,
                    "reason": "no dominator: the rule is not quasi-inadmissible and no --b was given",
                }),
                status,
            ))
        }
    };
    let cert = verify_domination(
        &c.phi,
        &spec,
        c.dims,
        &verification_grid(spec.w_sharp, cfg.grid_points),
    )?;
    let mut status = if cert.verdict {
        Status::Ok
    } else {
        Status::Failed
    };
    let mut result = json!({
        "classification": c.verdict,
        "dominator": spec,
        "certificate": {
            "grid_points": cert.grid.len(),
            "min_delta_above_sharp": cert.min_delta_above_sharp,
            "zero_below_sharp": cert.zero_below_sharp,
            "verdict": cert.verdict,
            "trivial": cert.trivial,
        },
    });
    if simulate {
        let phi = Phi::for_simulation(&cfg.phi, c.dims, &cfg.quadrature)?;
        let cells = domination_mc(&phi, &spec, &cfg.sim_configs()?)?;
        if !cells.iter().all(|cell| cell.never_significantly_worse()) {
            status = Status::Failed;
        }
        result["cells"] = serde_json::to_value(&cells)?;
    }
    Ok(Outcome::json(result, status))
}

pub const CSV_HEADER: [&str; 9] = [
    "theta_norm",
    "sigma",
    "model",
    "reps",
    "seed",
    "mean_loss",
    "se_loss",
    "sure_mean",
    "se_sure",
];

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn run_simulate(cfg: &RunConfig) -> Result<Outcome> {
    let dims = cfg.dims()?;
    let phi = Phi::for_simulation(&cfg.phi, dims, &cfg.quadrature)?;
    let mut rows = Vec::new();
    let mut csv = Vec::new();
    for sim in cfg.sim_configs()? {
        let r = estimate_risk(&phi, &sim)?;
        rows.push(json!({
            "theta_norm": sim.theta_norm,
            "sigma": sim.sigma,
            "model": sim.model.to_string(),
            "reps": r.reps,
            "seed": sim.seed,
            "mean_loss": r.mean_loss,
            "se_loss": r.se_loss,
            "sure_mean": r.sure_mean,
            "se_sure": r.se_sure,
        }));
        csv.push(vec![
            real(sim.theta_norm),
            real(sim.sigma),
            sim.model.to_string(),
            r.reps.to_string(),
            sim.seed.to_string(),
            real(r.mean_loss),
            real(r.se_loss),
            real(r.sure_mean),
            real(r.se_sure),
        ]);
    }
    Ok(Outcome {
        result: json!({ "rows": rows }),
        table: Some((CSV_HEADER.to_vec(), csv)),
        status: Status::Ok,
    })
}

fn run_sure_check(cfg: &RunConfig) -> Result<Outcome> {
    let dims = cfg.dims()?;
    let phi = Phi::for_simulation(&cfg.phi, dims, &cfg.quadrature)?;
    let mut rows = Vec::new();
    let mut csv = Vec::new();
    let mut status = Status::Ok;
    for sim in cfg.sim_configs()? {
        let u = sure_unbiasedness_test(&phi, &sim)?;
        if u.flagged {
            status = Status::Failed;
        }
        let r = u.risk;
        rows.push(json!({
            "theta_norm": sim.theta_norm,
            "sigma": sim.sigma,
            "model": sim.model.to_string(),
            "reps": r.reps,
            "seed": sim.seed,
            "mean_loss": r.mean_loss,
            "se_loss": r.se_loss,
            "sure_mean": r.sure_mean,
            "se_sure": r.se_sure,
            "z": u.z,
            "flagged": u.flagged,
        }));
        let mut line = vec![
            real(sim.theta_norm),
            real(sim.sigma),
            sim.model.to_string(),
            r.reps.to_string(),
            sim.seed.to_string(),
            real(r.mean_loss),
            real(r.se_loss),
            real(r.sure_mean),
            real(r.se_sure),
        ];
        line.push(real(u.z));
        line.push(u.flagged.to_string());
        csv.push(line);
    }
    let mut header = CSV_HEADER.to_vec();
    header.extend(["z", "flagged"]);
    Ok(Outcome {
        result: json!({ "rows": rows }),
        table: Some((header, csv)),
        status,
    })
}

/// Tail coefficient the rule is built to have, when known in closed form.
fn expected_tail_coefficient(spec: &PhiSpec) -> Option<f64> {
    match *spec {
        PhiSpec::GbUnknown { a, b } if a == -2.0 && b > 0.0 => Some(b),
        PhiSpec::Boundary { b, .. } => Some(b),
        _ => None,
    }
}

fn run_asymptotics(cfg: &RunConfig) -> Result<Outcome> {
    let dims = cfg.dims()?;
    let phi = Phi::from_spec(&cfg.phi, dims, &cfg.quadrature)?;
    let grid = profile_grid();
    let profile = tail_profile(&phi, dims, &grid)?;
    let cc0 = cc0_diagnostic(&phi, dims, &grid)?;
    let beta_star = dims.constants().beta_star;
    let mut result = json!({
        "tail_profile": profile,
        "cc0": cc0,
        "beta_star": beta_star,
        "w_max": grid[grid.len() - 1],
    });
    let mut status = Status::Ok;
    if let Some(b) = expected_tail_coefficient(&cfg.phi) {
        let rel_error = profile.b_hat.map(|h| (h - b).abs() / b);
        let pass = rel_error.is_some_and(|e| e <= TAIL_COEF_TOL);
        if !pass {
            status = Status::Failed;
        }
        result["expected_b"] = json!(b);
        result["target_coefficient"] = json!(b * beta_star);
        result["b_rel_error"] = json!(rel_error);
        result["tolerance"] = json!(TAIL_COEF_TOL);
        result["pass"] = json!(pass);
    }
    Ok(Outcome::json(result, status))
}

fn run_known_variance(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.p;
    let prior = cfg.prior();
    prior.validate(p)?;
    let q = &cfg.quadrature;
    let verdict = brown_classify(&prior)?;
    let z = default_z_grid();
    let tau = sure_boundary::known_variance::tauberian_check(&prior, p, &z, q)?;
    let grad = gradient_bound_check(&prior, p, &z, q)?;
    let brown = brown_integral_numeric(&prior, p, BROWN_R_MAX, q)?;
    let mut result = json!({
        "prior": prior.to_string(),
        "verdict": verdict,
        "boundary_adjacent": is_boundary_adjacent(&prior),
        "tauberian_ratio_final": tau.final_value,
        "tauberian_rel_error": tau.final_rel_error,
        "gradient_limit_target": grad.target,
        "gradient_value_final": grad.final_value,
        "gradient_rel_error": grad.final_rel_error,
        "z_max": z[z.len() - 1],
        "brown_partial_integrals": brown.partial_integrals,
        "brown_tail_slope": brown.tail_slope,
        "brown_numeric_verdict": brown.verdict,
        "brown_agrees": brown.agrees,
    });
    let b = prior.l.log_power();
    if prior.a == -2.0 && b > 0.0 {
        let psi = psi_known(b, PSI_RATE_V, p, q)?;
        result["psi_rate"] = json!({
            "v": PSI_RATE_V,
            "value": PSI_RATE_V.ln() * (f64::from(p) - 2.0 - psi),
            "target": 2.0 * b,
        });
    }
    let undecided = matches!(brown.verdict, AdmissClass::Boundary { .. });
    let status = if brown.agrees || undecided {
        Status::Ok
    } else {
        Status::Failed
    };
    Ok(Outcome::json(result, status))
}

fn run_crosscheck(cfg: &RunConfig) -> Result<Outcome> {
    let b = cfg.b.unwrap_or(1.0);
    let q = &cfg.quadrature;
    let mut rows = Vec::new();
    let mut max_dev = 0.0_f64;
    for &w in &cfg.w {
        let (direct, identity) = match cfg.identity {
            Identity::Saigo4 => {
                let dims = cfg.dims()?;
                (
                    phi_gb_unknown(-2.0, b, w, dims, q)?,
                    phi_gb_identity_saigo4(b, w, dims, q)?,
                )
            }
            Identity::Psi => (
                psi_known(b, w, cfg.p, q)?,
                psi_known_identity(b, w, cfg.p, q)?,
            ),
        };
        let dev = (direct - identity).abs() / direct.abs().max(identity.abs());
        max_dev = max_dev.max(if dev.is_nan() { f64::INFINITY } else { dev });
        rows.push(json!({"w": w, "direct": direct, "identity": identity, "rel_dev": dev}));
    }
    let pass = max_dev <= CROSSCHECK_TOL;
    Ok(Outcome::json(
        json!({
            "identity": cfg.identity.to_string(),
            "b": b,
            "rows": rows,
            "max_rel_dev": max_dev,
            "tolerance": CROSSCHECK_TOL,
            "pass": pass,
        }),
        if pass { Status::Ok } else { Status::Failed },
    ))
}
