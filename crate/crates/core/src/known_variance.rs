//! Known-variance companion: `Z ~ N_p(mu, I)` under the scale-mixture prior
//! with mixing density `lambda^a L(1/lambda)` on `(0, 1)`.
//!
//! All integrals are one-dimensional Laplace-type integrals
//! `\int_0^1 lambda^s L(1/lambda) e^{-t lambda} d lambda` with `t = |z|^2 / 2`,
//! computed by [`integrate_loglambda`] and rescaled by `max(t, 1)^(s+1)` so
//! that ratios stay well conditioned when `t` is large.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::phi::tail::linear_fit;
use crate::{integrate_loglambda, log_grid, Error, QuadratureConfig, Result};

/// Slowly varying factor `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SlowlyVarying {
    One,
    LogPow { b: f64 },
}

impl SlowlyVarying {
    /// Exponent of `log(1/lambda)` in the mixing density.
    pub fn log_power(&self) -> f64 {
        match *self {
            SlowlyVarying::One => 0.0,
            SlowlyVarying::LogPow { b } => b,
        }
    }

    /// `L(y)` for `y >= 1`.
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            SlowlyVarying::One => 1.0,
            SlowlyVarying::LogPow { b } => y.ln().powf(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub a: f64,
    #[serde(rename = "L")]
    pub l: SlowlyVarying,
}

impl PriorSpec {
    pub fn new(a: f64, l: SlowlyVarying) -> Self {
        Self { a, l }
    }

    /// `L = One` when `b == 0`, `LogPow(b)` otherwise.
    pub fn with_log_power(a: f64, b: f64) -> Self {
        let l = if b == 0.0 {
            SlowlyVarying::One
        } else {
            SlowlyVarying::LogPow { b }
        };
        Self { a, l }
    }

    pub fn validate(&self, p: u32) -> Result<()> {
        if !self.a.is_finite() || f64::from(p) / 2.0 + self.a + 1.0 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "prior needs p/2 + a + 1 > 0 (p={p}, a={})",
                self.a
            )));
        }
        if let SlowlyVarying::LogPow { b } = self.l {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::UnsupportedPrior(format!(
                    "log power must be positive and finite, got {b}"
                )));
            }
        }
        Ok(())
    }

    /// Exponent `s = p/2 + a` of `lambda` in the marginal integrand.
    fn s(&self, p: u32) -> f64 {
        f64::from(p) / 2.0 + self.a
    }
}

impl fmt::Display for PriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.l {
            SlowlyVarying::One => write!(f, "a={:?},L=one", self.a),
            SlowlyVarying::LogPow { b } => write!(f, "a={:?},L=logpow:b={:?}", self.a, b),
        }
    }
}

impl FromStr for PriorSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let bad = |reason: &str| Error::ParseSpec {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let (a_part, l_part) = input
            .split_once(",L=")
            .ok_or_else(|| bad("expected a=<real>,L=<one|logpow:b=<real>>"))?;
        let a = a_part
            .strip_prefix("a=")
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| bad("bad a"))?;
        let l = if l_part == "one" {
            SlowlyVarying::One
        } else {
            let b = l_part
                .strip_prefix("logpow:b=")
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| bad("bad L"))?;
            SlowlyVarying::LogPow { b }
        };
        Ok(Self { a, l })
    }
}

/// Admissibility verdict for the known-variance generalized Bayes rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AdmissClass {
    Admissible,
    Inadmissible,
    /// Not decided numerically; `b_eq_1` marks the `a = -2`, `L = log^1` prior.
    Boundary {
        b_eq_1: bool,
    },
}

/// `max(t,1)^(s+1) \int_0^1 lambda^s (log 1/lambda)^c (t lambda)^k e^{-t lambda}`.
fn scaled_moment(s: f64, log_power: f64, t: f64, k: i32, cfg: &QuadratureConfig) -> Result<f64> {
    let scale = t.max(1.0).powf(s + 1.0);
    integrate_loglambda(
        |l| {
            let x = t * l;
            scale * x.powi(k) * (-x).exp()
        },
        s,
        log_power,
        cfg,
    )
}

/// Marginal density `m(|z|) = \int_0^1 e^{-lambda |z|^2/2} lambda^{p/2+a} L(1/lambda)`.
pub fn marginal_m(z_norm: f64, prior: &PriorSpec, p: u32, cfg: &QuadratureConfig) -> Result<f64> {
    prior.validate(p)?;
    if !(z_norm >= 0.0 && z_norm.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "|z| must be finite and non-negative, got {z_norm}"
        )));
    }
    let s = prior.s(p);
    let t = z_norm * z_norm / 2.0;
    Ok(scaled_moment(s, prior.l.log_power(), t, 0, cfg)? / t.max(1.0).powf(s + 1.0))
}

/// Values of a limit check along a grid of `|z|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub z_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub target: f64,
    pub final_value: f64,
    pub final_rel_error: f64,
    /// `|value - target|` is non-increasing over the top decade of the grid.
    pub monotone_top_decade: bool,
}

impl ConvergenceReport {
    fn new(z_grid: &[f64], values: Vec<f64>, target: f64) -> Self {
        let final_value = *values.last().unwrap();
        let top = *z_grid.last().unwrap() / 10.0;
        let errs: Vec<f64> = z_grid
            .iter()
            .zip(&values)
            .filter(|(z, _)| **z >= top)
            .map(|(_, v)| (v - target).abs())
            .collect();
        Self {
            z_grid: z_grid.to_vec(),
            target,
            final_value,
            final_rel_error: (final_value - target).abs() / target.abs(),
            monotone_top_decade: errs.windows(2).all(|e| e[1] <= e[0] * (1.0 + 1e-9)),
            values,
        }
    }

    pub fn sup(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Default `|z|` grid for the limit checks: 57 log-spaced points on `[10, 1e8]`.
pub fn default_z_grid() -> Vec<f64> {
    log_grid(10.0, 1e8, 57)
}

fn check_z_grid(z_grid: &[f64]) -> Result<()> {
    if z_grid.len() < 2
        || z_grid[0] <= 1.0
        || *z_grid.last().unwrap() < 1e4
        || !z_grid.windows(2).all(|p| p[1] > p[0])
    {
        return Err(Error::InvalidParameter(
            "z grid must be ascending, start above 1 and reach at least 1e4".into(),
        ));
    }
    Ok(())
}

/// Ratio of `m(|z|)` to `Gamma(p/2+a+1) (2/|z|^2)^{p/2+a+1} L(|z|^2)`.
pub fn tauberian_check(
    prior: &PriorSpec,
    p: u32,
    z_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<ConvergenceReport> {
    prior.validate(p)?;
    check_z_grid(z_grid)?;
    let s = prior.s(p);
    let g = gamma(s + 1.0);
    let values = z_grid
        .par_iter()
        .map(|&z| {
            let t = z * z / 2.0;
            let m_scaled = scaled_moment(s, prior.l.log_power(), t, 0, cfg)?;
            // m / (Gamma t^{-(s+1)} L) with m = m_scaled / max(t,1)^{s+1}
            let rescale = (t / t.max(1.0)).powf(s + 1.0);
            Ok(m_scaled * rescale / (g * prior.l.eval(z * z)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(z_grid, values, 1.0))
}

/// `|z|^2` times the ratio of the first to the zeroth moment, which tends to
/// `p + 2a + 2`; `|z| |grad log m|` is this quantity divided by `|z|`.
pub fn gradient_bound_check(
    prior: &PriorSpec,
    p: u32,
    z_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<ConvergenceReport> {
    prior.validate(p)?;
    check_z_grid(z_grid)?;
    let s = prior.s(p);
    let c = prior.l.log_power();
    let values = z_grid
        .par_iter()
        .map(|&z| {
            let t = z * z / 2.0;
            Ok(2.0 * scaled_moment(s, c, t, 1, cfg)? / scaled_moment(s, c, t, 0, cfg)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(
        z_grid,
        values,
        f64::from(p) + 2.0 * prior.a + 2.0,
    ))
}

/// Symbolic verdict from the divergence of `\int_1^inf r^{2a+3} / L(r^2) dr`.
///
/// Divergence means admissibility: `a > -2` is admissible and `a < -2`
/// inadmissible whatever the slowly varying factor; at `a = -2`,
/// `L = log^b` is admissible exactly when `b <= 1`.
pub fn brown_classify(prior: &PriorSpec) -> Result<AdmissClass> {
    if let SlowlyVarying::LogPow { b } = prior.l {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::UnsupportedPrior(format!(
                "log power must be positive and finite, got {b}"
            )));
        }
    }
    if !prior.a.is_finite() {
        return Err(Error::UnsupportedPrior(format!("a = {}", prior.a)));
    }
    Ok(if prior.a > -2.0 {
        AdmissClass::Admissible
    } else if prior.a < -2.0 {
        AdmissClass::Inadmissible
    } else {
        match prior.l {
            SlowlyVarying::One => AdmissClass::Admissible,
            SlowlyVarying::LogPow { b } if b <= 1.0 => AdmissClass::Admissible,
            SlowlyVarying::LogPow { .. } => AdmissClass::Inadmissible,
        }
    })
}

/// `a = -2` with `L = log^1`: admissible, but on the edge of the dichotomy.
pub fn is_boundary_adjacent(prior: &PriorSpec) -> bool {
    prior.a == -2.0 && prior.l == SlowlyVarying::LogPow { b: 1.0 }
}

fn check_v(v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "v must be finite and non-negative, got {v}"
        )))
    }
}

/// `psi_{-2,b}(v) = v \int lambda^{p/2-1} L e^{-v lambda/2} / \int lambda^{p/2-2} L e^{-v lambda/2}`
/// with `L(1/lambda) = (log 1/lambda)^b`.
pub fn psi_known(b: f64, v: f64, p: u32, cfg: &QuadratureConfig) -> Result<f64> {
    check_psi_args(b, p)?;
    check_v(v)?;
    if v == 0.0 {
        return Ok(0.0);
    }
    let s = f64::from(p) / 2.0 - 2.0;
    let t = v / 2.0;
    Ok(2.0 * scaled_moment(s, b, t, 1, cfg)? / scaled_moment(s, b, t, 0, cfg)?)
}

/// Integration-by-parts form
/// `psi(v) = p - 2 - 2b J/D + 2B/D`, where `J` carries `(log 1/lambda)^{b-1}`
/// and `B = -e^{-v/2}` is the boundary term at `lambda = 1`, present only
/// when `b = 0`.
pub fn psi_known_identity(b: f64, v: f64, p: u32, cfg: &QuadratureConfig) -> Result<f64> {
    check_psi_args(b, p)?;
    check_v(v)?;
    let s = f64::from(p) / 2.0 - 2.0;
    let t = v / 2.0;
    let scale = t.max(1.0).powf(s + 1.0);
    let d = scaled_moment(s, b, t, 0, cfg)?;
    let mut value = f64::from(p) - 2.0;
    if b > 0.0 {
        value -= 2.0 * b * scaled_moment(s, b - 1.0, t, 0, cfg)? / d;
    } else {
        value -= 2.0 * scale * (-t).exp() / d;
    }
    Ok(value)
}

fn check_psi_args(b: f64, p: u32) -> Result<()> {
    if p < 3 {
        return Err(Error::InvalidParameter(format!(
            "p must be at least 3, got {p}"
        )));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "b must be finite and non-negative, got {b}"
        )));
    }
    Ok(())
}

/// Growth of the partial integrals `\int_1^R dr / (r^{p-1} m(r))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrownReport {
    pub prior: String,
    /// `(R, partial integral up to R)` at decades of `R`.
    pub partial_integrals: Vec<(f64, f64)>,
    /// Log-log slope of the integrand in `r` over the top decade.
    pub tail_slope: f64,
    /// Slope of `log(r * integrand)` against `log log r` over the top decade.
    pub log_log_slope: f64,
    pub verdict: AdmissClass,
    pub symbolic: AdmissClass,
    pub agrees: bool,
}

/// Half-width of the undecided band around the critical slope `-1`.
const SLOPE_BAND: f64 = 0.25;
const BROWN_STEP: f64 = 0.025;

/// Numerical companion to [`brown_classify`].
///
/// The integrand is tabulated on a uniform grid in `x = log r`, the partial
/// integrals are accumulated by Simpson's rule, and the verdict is read from
/// the tail: a log-log slope clearly above (below) `-1` means divergence
/// (convergence). Near `-1` the sign is decided by the power of `log r` in
/// `r` times the integrand, and a prior still within the band is reported as
/// [`AdmissClass::Boundary`].
pub fn brown_integral_numeric(
    prior: &PriorSpec,
    p: u32,
    r_max: f64,
    cfg: &QuadratureConfig,
) -> Result<BrownReport> {
    prior.validate(p)?;
    if !(r_max >= 1e3 && r_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "r_max must be at least 1e3, got {r_max}"
        )));
    }
    let symbolic = brown_classify(prior)?;
    let x_max = r_max.ln();
    // Segment ends: every decade below r_max, then r_max itself.
    let mut ends: Vec<f64> = (1..)
        .map(|k| f64::from(k) * std::f64::consts::LN_10)
        .take_while(|x| *x < x_max * (1.0 - 1e-12))
        .collect();
    ends.push(x_max);
    let mut xs = vec![0.0];
    let mut seg_end_idx = Vec::new();
    for &e in &ends {
        let a = *xs.last().unwrap();
        let n = 2 * (((e - a) / BROWN_STEP / 2.0).ceil() as usize).max(1);
        let h = (e - a) / n as f64;
        xs.extend((1..=n).map(|i| if i == n { e } else { a + i as f64 * h }));
        seg_end_idx.push(xs.len() - 1);
    }
    // In x = log r the integrand is r / (r^{p-1} m(r)); keep its logarithm.
    let log_f = xs
        .par_iter()
        .map(|&x| {
            let m = marginal_m(x.exp(), prior, p, cfg)?;
            Ok((2.0 - f64::from(p)) * x - m.ln())
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut partial_integrals = Vec::new();
    let mut acc = 0.0;
    let mut i = 0;
    for (&end_idx, &e) in seg_end_idx.iter().zip(&ends) {
        while i < end_idx {
            let h = (xs[i + 2] - xs[i]) / 2.0;
            let (a, b, c) = (log_f[i].exp(), log_f[i + 1].exp(), log_f[i + 2].exp());
            acc += h / 3.0 * (a + 4.0 * b + c);
            i += 2;
        }
        let r = if e == x_max { r_max } else { e.exp() };
        partial_integrals.push((r, acc));
    }
    let steps = xs.len() - 1;

    let top: Vec<usize> = (0..=steps)
        .filter(|&i| xs[i] >= x_max - 10f64.ln())
        .collect();
    // log of the integrand in r is log_f - x
    let lx: Vec<f64> = top.iter().map(|&i| xs[i]).collect();
    let ly: Vec<f64> = top.iter().map(|&i| log_f[i] - xs[i]).collect();
    let tail_slope = linear_fit(&lx, &ly).1;
    let llx: Vec<f64> = top.iter().map(|&i| xs[i].ln()).collect();
    let lly: Vec<f64> = top.iter().map(|&i| log_f[i]).collect();
    let log_log_slope = linear_fit(&llx, &lly).1;

    let verdict = if tail_slope > -1.0 + SLOPE_BAND {
        AdmissClass::Admissible
    } else if tail_slope < -1.0 - SLOPE_BAND {
        AdmissClass::Inadmissible
    } else if log_log_slope > -1.0 + SLOPE_BAND {
        AdmissClass::Admissible
    } else if log_log_slope < -1.0 - SLOPE_BAND {
        AdmissClass::Inadmissible
    } else {
        AdmissClass::Boundary {
            b_eq_1: is_boundary_adjacent(prior),
        }
    };
    let agrees = verdict == symbolic || matches!(verdict, AdmissClass::Boundary { .. });
    Ok(BrownReport {
        prior: prior.to_string(),
        partial_integrals,
        tail_slope,
        log_log_slope,
        verdict,
        symbolic,
        agrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma_lr;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn one(a: f64) -> PriorSpec {
        PriorSpec::new(a, SlowlyVarying::One)
    }

    fn logpow(a: f64, b: f64) -> PriorSpec {
        PriorSpec::new(a, SlowlyVarying::LogPow { b })
    }

    #[test]
    fn marginal_at_origin() {
        let m = marginal_m(0.0, &one(-2.0), 5, &cfg()).unwrap();
        assert!((m - 2.0 / 3.0).abs() < 1e-10);
        let m = marginal_m(0.0, &logpow(-2.0, 1.0), 5, &cfg()).unwrap();
        assert!((m - 4.0 / 9.0).abs() < 1e-10);
    }

    #[test]
    fn marginal_matches_incomplete_gamma() {
        for &(p, a) in &[(5u32, -2.0), (5, -1.0), (7, -2.0), (3, -2.0), (5, -3.0)] {
            let s = f64::from(p) / 2.0 + a;
            for &z in &[0.1, 1.0, 3.0, 10.0, 100.0, 1e4] {
                let t: f64 = z * z / 2.0;
                let want = gamma(s + 1.0) * gamma_lr(s + 1.0, t) / t.powf(s + 1.0);
                let got = marginal_m(z, &one(a), p, &cfg()).unwrap();
                assert!(
                    (got - want).abs() <= 1e-9 * want,
                    "p={p} a={a} z={z}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn marginal_decreasing() {
        let zs = log_grid(1e-2, 1e3, 60);
        for prior in [one(-2.0), logpow(-2.0, 1.0), logpow(-1.0, 0.5)] {
            let ms: Vec<f64> = zs
                .iter()
                .map(|&z| marginal_m(z, &prior, 5, &cfg()).unwrap())
                .collect();
            assert!(ms.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn tauberian_limits() {
        let r = tauberian_check(&one(-2.0), 5, &log_grid(10.0, 1e4, 13), &cfg()).unwrap();
        let at_1e3 = r.values[r
            .z_grid
            .iter()
            .position(|z| (*z - 1e3).abs() < 1e-6)
            .unwrap()];
        assert!((at_1e3 - 1.0).abs() < 0.02);
        let r = tauberian_check(&logpow(-2.0, 1.0), 5, &log_grid(10.0, 1e4, 13), &cfg()).unwrap();
        assert!(r.final_rel_error < 0.05, "{}", r.final_value);
        assert!(r.monotone_top_decade);
    }

    #[test]
    fn gradient_limits() {
        let r = gradient_bound_check(&one(-2.0), 5, &log_grid(10.0, 1e4, 13), &cfg()).unwrap();
        assert_eq!(r.target, 3.0);
        let at_1e3 = r.values[r
            .z_grid
            .iter()
            .position(|z| (*z - 1e3).abs() < 1e-6)
            .unwrap()];
        assert!((at_1e3 - 3.0).abs() < 0.06);
        let r = gradient_bound_check(&one(-2.0), 7, &log_grid(10.0, 1e4, 13), &cfg()).unwrap();
        assert_eq!(r.target, 5.0);
        let r = gradient_bound_check(&logpow(-2.0, 1.0), 5, &default_z_grid(), &cfg()).unwrap();
        assert!(r.final_rel_error < 0.02, "{}", r.final_value);
        assert!(r.sup() <= 1.1 * r.target.max(r.values[0]));
    }

    #[test]
    fn symbolic_verdicts() {
        use AdmissClass::*;
        assert_eq!(brown_classify(&one(-1.0)).unwrap(), Admissible);
        assert_eq!(brown_classify(&logpow(-2.0, 1.0)).unwrap(), Admissible);
        assert_eq!(brown_classify(&logpow(-2.0, 1.5)).unwrap(), Inadmissible);
        assert_eq!(brown_classify(&logpow(-3.0, 0.5)).unwrap(), Inadmissible);
        assert_eq!(brown_classify(&one(-2.0)).unwrap(), Admissible);
        assert!(brown_classify(&logpow(-2.0, 0.0)).is_err());
        assert!(is_boundary_adjacent(&logpow(-2.0, 1.0)));
    }

    #[test]
    fn psi_routes_agree() {
        for &p in &[5u32, 7] {
            for &b in &[0.0, 0.5, 1.0, 2.0] {
                for &v in &[1.0, 10.0, 100.0, 1e3, 1e6] {
                    let x = psi_known(b, v, p, &cfg()).unwrap();
                    let y = psi_known_identity(b, v, p, &cfg()).unwrap();
                    assert!(
                        (x - y).abs() <= 1e-8 * x.abs(),
                        "p={p} b={b} v={v}: {x} {y}"
                    );
                    if b > 0.0 {
                        assert!(x < f64::from(p) - 2.0);
                    } else {
                        assert!(x <= (f64::from(p) - 2.0) * (1.0 + 1e-14));
                    }
                }
            }
        }
        assert_eq!(psi_known(0.0, 0.0, 5, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn psi_log_rate() {
        let v: f64 = 1e8;
        let x = v.ln() * (3.0 - psi_known(1.0, v, 5, &cfg()).unwrap());
        assert!((x - 2.0).abs() < 0.3, "{x}");
    }

    #[test]
    fn numeric_brown_examples() {
        let r = brown_integral_numeric(&one(-1.0), 5, 1e6, &cfg()).unwrap();
        assert_eq!(r.verdict, AdmissClass::Admissible);
        assert!(r.tail_slope > 0.0);
        let r = brown_integral_numeric(&one(-3.0), 5, 1e6, &cfg()).unwrap();
        assert_eq!(r.verdict, AdmissClass::Inadmissible);
        assert!(r.tail_slope < -1.0);
        let r = brown_integral_numeric(&logpow(-2.0, 1.0), 5, 1e6, &cfg()).unwrap();
        let at = |x: f64| {
            r.partial_integrals
                .iter()
                .find(|(q, _)| (*q / x - 1.0).abs() < 1e-9)
                .unwrap()
                .1
        };
        // independent high-precision values: 1.467710 and 1.611458
        assert!(
            (at(1e3) - 1.467_710).abs() < 2e-4 * 1.467_710,
            "{}",
            at(1e3)
        );
        assert!(
            (at(1e6) - 1.611_458).abs() < 2e-4 * 1.611_458,
            "{}",
            at(1e6)
        );
        assert!(at(1e6) > 1.09 * at(1e3));
        assert!(r.agrees);
    }

    #[test]
    fn prior_text_round_trip() {
        for prior in [one(-2.0), logpow(-2.5, 1.5)] {
            let text = prior.to_string();
            assert_eq!(text.parse::<PriorSpec>().unwrap(), prior);
        }
    }
}
