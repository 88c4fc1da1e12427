//! Monte Carlo risk under scaled quadratic loss `|d - theta|^2 / sigma^2`.
//!
//! Replication `i` draws from its own ChaCha8 stream (`seed`, stream `i`), so a
//! replication's data depend only on `(seed, i)`. Replications are processed
//! in fixed blocks whose moment summaries are merged in block order, which
//! makes every report independent of the number of worker threads.
//!
//! Draw order inside a replication: the mixing variable (Student-t only),
//! then the `p` normal coordinates, then the chi-square for `S`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::boundary::DominatorSpec;
use crate::phi::{Shrinkage, Sum};
use crate::sure::{d_phi_from_values, ProblemDims};
use crate::{Error, Result};

const BLOCK: u64 = 4096;

/// Sampling model for `(X, S)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ModelSpec {
    Normal,
    /// Scale mixture: one draw `v = df / chi2_df` per replication scales both
    /// the noise variance of `X` and `S`.
    StudentT {
        df: f64,
    },
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::Normal => Ok(()),
            ModelSpec::StudentT { df } if df > 2.0 && df.is_finite() => Ok(()),
            ModelSpec::StudentT { df } => Err(Error::InvalidParameter(format!(
                "Student-t degrees of freedom must exceed 2, got {df}"
            ))),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Normal => write!(f, "normal"),
            ModelSpec::StudentT { df } => write!(f, "t:df={df:?}"),
        }
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let bad = |reason: &str| Error::ParseSpec {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        if input == "normal" {
            return Ok(ModelSpec::Normal);
        }
        let df = input
            .strip_prefix("t:df=")
            .ok_or_else(|| bad("expected `normal` or `t:df=<real>`"))?
            .parse::<f64>()
            .map_err(|e| bad(&e.to_string()))?;
        let m = ModelSpec::StudentT { df };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub dims: ProblemDims,
    pub theta_norm: f64,
    pub sigma: f64,
    pub reps: u64,
    pub seed: u64,
    pub model: ModelSpec,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.theta_norm >= 0.0 && self.theta_norm.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "theta_norm must be finite and non-negative, got {}",
                self.theta_norm
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.reps == 0 {
            return Err(Error::InvalidParameter("reps must be at least 1".into()));
        }
        Ok(())
    }

    /// `theta = (theta_norm, 0, ..., 0)`.
    pub fn theta(&self) -> Vec<f64> {
        let mut t = vec![0.0; self.dims.p() as usize];
        t[0] = self.theta_norm;
        t
    }
}

/// Draw replication `index`, writing the standardized noise into `noise` and
/// returning `(scale, chi2)`: `X = theta + sigma * scale * noise` and
/// `S = sigma^2 * scale^2 * chi2`.
fn draw(
    base: &ChaCha8Rng,
    index: u64,
    cfg: &SimConfig,
    chi_n: &ChiSquared<f64>,
    chi_df: Option<&ChiSquared<f64>>,
    noise: &mut [f64],
) -> (f64, f64) {
    let mut rng = base.clone();
    rng.set_stream(index);
    let scale = match (cfg.model, chi_df) {
        (ModelSpec::StudentT { df }, Some(c)) => (df / c.sample(&mut rng)).sqrt(),
        _ => 1.0,
    };
    for z in noise.iter_mut() {
        *z = rng.sample(StandardNormal);
    }
    (scale, chi_n.sample(&mut rng))
}

struct Sampler {
    base: ChaCha8Rng,
    chi_n: ChiSquared<f64>,
    chi_df: Option<ChiSquared<f64>>,
}

impl Sampler {
    fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let chi = |k: f64| {
            ChiSquared::new(k).map_err(|e| Error::InvalidParameter(format!("chi-square({k}): {e}")))
        };
        Ok(Self {
            base: ChaCha8Rng::seed_from_u64(cfg.seed),
            chi_n: chi(f64::from(cfg.dims.n()))?,
            chi_df: match cfg.model {
                ModelSpec::StudentT { df } => Some(chi(df)?),
                ModelSpec::Normal => None,
            },
        })
    }

    /// `(X, S)` for replication `index` with `theta` on the first axis.
    fn sample(&self, cfg: &SimConfig, index: u64, x: &mut [f64]) -> f64 {
        let (scale, chi2) = draw(&self.base, index, cfg, &self.chi_n, self.chi_df.as_ref(), x);
        for xi in x.iter_mut() {
            *xi *= cfg.sigma * scale;
        }
        x[0] += cfg.theta_norm;
        cfg.sigma * cfg.sigma * scale * scale * chi2
    }
}

/// Deterministic stream of `(X, S)` pairs, one per replication index.
pub fn sample_model(config: &SimConfig) -> Result<impl Iterator<Item = (Vec<f64>, f64)> + '_> {
    let sampler = Sampler::new(config)?;
    let p = config.dims.p() as usize;
    Ok((0..config.reps).map(move |i| {
        let mut x = vec![0.0; p];
        let s = sampler.sample(config, i, &mut x);
        (x, s)
    }))
}

/// `(X, S)` of a single replication.
pub fn sample_replication(config: &SimConfig, index: u64) -> Result<(Vec<f64>, f64)> {
    let sampler = Sampler::new(config)?;
    let mut x = vec![0.0; config.dims.p() as usize];
    let s = sampler.sample(config, index, &mut x);
    Ok((x, s))
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }

    /// Standard error of the mean (sample standard deviation / sqrt(n)).
    fn se(&self) -> f64 {
        if self.n < 2.0 {
            0.0
        } else {
            (self.m2 / (self.n - 1.0) / self.n).sqrt()
        }
    }
}

/// Run `per_rep` over all replications and reduce `K` tracked quantities.
fn simulate<const K: usize, G>(cfg: &SimConfig, per_rep: G) -> Result<[Moments; K]>
where
    G: Fn(u64, &[f64], f64) -> Result<[f64; K]> + Sync,
{
    let sampler = Sampler::new(cfg)?;
    let p = cfg.dims.p() as usize;
    let blocks = cfg.reps.div_ceil(BLOCK);
    let partial = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = [Moments::default(); K];
            let mut x = vec![0.0; p];
            for i in b * BLOCK..((b + 1) * BLOCK).min(cfg.reps) {
                let s = sampler.sample(cfg, i, &mut x);
                let vals = per_rep(i, &x, s)?;
                for (a, v) in acc.iter_mut().zip(vals) {
                    a.push(v);
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(partial
        .into_iter()
        .fold([Moments::default(); K], |acc, blk| {
            let mut out = acc;
            for (o, b) in out.iter_mut().zip(blk) {
                *o = o.merge(b);
            }
            out
        }))
}

/// Loss of `(1 - phi(W)/W) X` and its SURE value for one draw.
fn loss_and_sure<F: Shrinkage + ?Sized>(
    phi: &F,
    x: &[f64],
    s: f64,
    theta: &[f64],
    sigma: f64,
    dims: ProblemDims,
    index: u64,
) -> Result<(f64, f64)> {
    let k = dims.constants();
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    let w = norm2 / s;
    let (v, dv) = phi.eval_with_deriv(w)?;
    if !v.is_finite() || !dv.is_finite() {
        return Err(Error::Evaluation {
            what: format!("{} at replication {index}", phi.label()),
            w,
        });
    }
    let shrink = if w == 0.0 { dv } else { v / w };
    let loss = x
        .iter()
        .zip(theta)
        .map(|(xi, ti)| {
            let e = (1.0 - shrink) * xi - ti;
            e * e
        })
        .sum::<f64>()
        / (sigma * sigma);
    let sure = f64::from(dims.p()) + (f64::from(dims.n()) + 2.0) * d_phi_from_values(v, dv, w, &k);
    Ok((loss, sure))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskReport {
    pub mean_loss: f64,
    pub se_loss: f64,
    pub sure_mean: f64,
    pub se_sure: f64,
    pub reps: u64,
}

impl RiskReport {
    fn from_moments(loss: Moments, sure: Moments, reps: u64) -> Self {
        Self {
            mean_loss: loss.mean,
            se_loss: loss.se(),
            sure_mean: sure.mean,
            se_sure: sure.se(),
            reps,
        }
    }
}

/// Monte Carlo risk of `delta_phi` and the mean of its unbiased risk estimate.
pub fn estimate_risk<F: Shrinkage + ?Sized>(phi: &F, config: &SimConfig) -> Result<RiskReport> {
    estimate_risk_on_axis(phi, config, 0)
}

/// Like [`estimate_risk`] with `theta` placed on coordinate `axis`. The noise
/// coordinates `0` and `axis` are swapped, an orthogonal map, so replication
/// `i` is the image of replication `i` of the default placement.
pub fn estimate_risk_on_axis<F: Shrinkage + ?Sized>(
    phi: &F,
    config: &SimConfig,
    axis: usize,
) -> Result<RiskReport> {
    let p = config.dims.p() as usize;
    if axis >= p {
        return Err(Error::InvalidParameter(format!(
            "axis {axis} out of range for p={p}"
        )));
    }
    let mut theta = vec![0.0; p];
    theta[axis] = config.theta_norm;
    let [loss, sure] = simulate::<2, _>(config, |i, x, s| {
        let mut y = x.to_vec();
        y.swap(0, axis);
        let (l, r) = loss_and_sure(phi, &y, s, &theta, config.sigma, config.dims, i)?;
        Ok([l, r])
    })?;
    Ok(RiskReport::from_moments(loss, sure, config.reps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnbiasednessReport {
    pub risk: RiskReport,
    /// `(mean_loss - sure_mean) / sqrt(se_loss^2 + se_sure^2)`.
    pub z: f64,
    /// `|z| > 4`.
    pub flagged: bool,
}

/// Compare the simulated risk with the mean unbiased risk estimate.
///
/// Only meaningful under the normal model, where the estimate is unbiased.
pub fn sure_unbiasedness_test<F: Shrinkage + ?Sized>(
    phi: &F,
    config: &SimConfig,
) -> Result<UnbiasednessReport> {
    if config.model != ModelSpec::Normal {
        return Err(Error::UnsupportedModel(format!(
            "the unbiased risk estimate is unbiased only under the normal model, got {}",
            config.model
        )));
    }
    let risk = estimate_risk(phi, config)?;
    let se = risk.se_loss.hypot(risk.se_sure);
    let diff = risk.mean_loss - risk.sure_mean;
    let z = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(UnbiasednessReport {
        risk,
        z,
        flagged: z.abs() > 4.0,
    })
}

/// Paired comparison of `delta_phi` and `delta_{phi+g}` in one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominationCell {
    pub theta_norm: f64,
    pub sigma: f64,
    pub model: ModelSpec,
    pub reps: u64,
    pub seed: u64,
    pub risk_phi: f64,
    pub risk_phi_g: f64,
    /// `R(delta_phi) - R(delta_{phi+g})`; positive favours the perturbed rule.
    pub mean_diff: f64,
    pub se_diff: f64,
    /// Standard error the difference would have without common random numbers.
    pub se_unpaired: f64,
}

impl DominationCell {
    /// Not significantly worse: `mean_diff >= -3 se_diff`.
    pub fn never_significantly_worse(&self) -> bool {
        self.mean_diff >= -3.0 * self.se_diff
    }
}

/// Paired losses of `delta_phi` and `delta_{phi+g}` on the same draws.
pub fn domination_mc<F: Shrinkage + ?Sized>(
    phi: &F,
    spec: &DominatorSpec,
    configs: &[SimConfig],
) -> Result<Vec<DominationCell>> {
    let g = spec.perturbation();
    let improved = Sum(phi, g);
    configs
        .iter()
        .map(|cfg| {
            let theta = cfg.theta();
            let [a, b, d] = simulate::<3, _>(cfg, |i, x, s| {
                let (la, _) = loss_and_sure(phi, x, s, &theta, cfg.sigma, cfg.dims, i)?;
                let (lb, _) = loss_and_sure(&improved, x, s, &theta, cfg.sigma, cfg.dims, i)?;
                Ok([la, lb, la - lb])
            })?;
            Ok(DominationCell {
                theta_norm: cfg.theta_norm,
                sigma: cfg.sigma,
                model: cfg.model,
                reps: cfg.reps,
                seed: cfg.seed,
                risk_phi: a.mean,
                risk_phi_g: b.mean,
                mean_diff: d.mean,
                se_diff: d.se(),
                se_unpaired: a.se().hypot(b.se()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsReport {
    pub statistic: f64,
    /// Asymptotic 1% critical value `1.628 / sqrt(N)`.
    pub critical_1pct: f64,
    pub pass: bool,
    pub reps: u64,
}

/// Kolmogorov-Smirnov distance between simulated `W = |X|^2 / S` and the
/// `(p/n) F_{p,n}` law it has at `theta = 0` under the normal model.
pub fn w_distribution_ks(config: &SimConfig) -> Result<KsReport> {
    if config.model != ModelSpec::Normal || config.theta_norm != 0.0 {
        return Err(Error::UnsupportedModel(
            "the (p/n) F law of W holds for the normal model at theta = 0".into(),
        ));
    }
    let (p, n) = (f64::from(config.dims.p()), f64::from(config.dims.n()));
    let f = FisherSnedecor::new(p, n)
        .map_err(|e| Error::InvalidParameter(format!("F({p},{n}): {e}")))?;
    let mut ws: Vec<f64> = sample_model(config)?
        .map(|(x, s)| x.iter().map(|v| v * v).sum::<f64>() / s)
        .collect();
    ws.sort_by(f64::total_cmp);
    let big_n = ws.len() as f64;
    let statistic = ws
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let c = f.cdf(w * n / p);
            (c - i as f64 / big_n).max((i as f64 + 1.0) / big_n - c)
        })
        .fold(0.0, f64::max);
    let critical_1pct = 1.628 / big_n.sqrt();
    Ok(KsReport {
        statistic,
        critical_1pct,
        pass: statistic < critical_1pct,
        reps: config.reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::{Phi, PhiSpec};

    fn cfg(theta_norm: f64, reps: u64) -> SimConfig {
        SimConfig {
            dims: ProblemDims::new(5, 6).unwrap(),
            theta_norm,
            sigma: 1.0,
            reps,
            seed: 20_240_501,
            model: ModelSpec::Normal,
        }
    }

    fn phi(spec: PhiSpec) -> Phi {
        Phi::for_simulation(&spec, ProblemDims::new(5, 6).unwrap(), &Default::default()).unwrap()
    }

    #[test]
    fn model_text() {
        assert_eq!("normal".parse::<ModelSpec>().unwrap(), ModelSpec::Normal);
        assert_eq!(
            "t:df=5".parse::<ModelSpec>().unwrap(),
            ModelSpec::StudentT { df: 5.0 }
        );
        assert!("t:df=2".parse::<ModelSpec>().is_err());
        assert_eq!(ModelSpec::StudentT { df: 5.0 }.to_string(), "t:df=5.0");
    }

    #[test]
    fn replication_is_addressable() {
        let c = cfg(1.0, 100);
        let all: Vec<_> = sample_model(&c).unwrap().collect();
        assert_eq!(sample_replication(&c, 37).unwrap(), all[37]);
        let again: Vec<_> = sample_model(&c).unwrap().collect();
        assert_eq!(all, again);
    }

    #[test]
    fn residual_scale_mean() {
        let c = cfg(0.0, 20_000);
        let mut m = Moments::default();
        for (_, s) in sample_model(&c).unwrap() {
            m.push(s);
        }
        assert!((m.mean - 6.0).abs() < 3.0 * m.se());
    }

    #[test]
    fn mle_risk_is_p() {
        let r = estimate_risk(&Phi::Zero, &cfg(3.0, 50_000)).unwrap();
        assert!((r.mean_loss - 5.0).abs() < 3.0 * r.se_loss);
        assert_eq!(r.sure_mean, 5.0);
        assert_eq!(r.se_sure, 0.0);
    }

    #[test]
    fn positive_part_improves_at_origin() {
        let r = estimate_risk(
            &phi(PhiSpec::PositivePartJs { a: 0.375 }),
            &cfg(0.0, 100_000),
        )
        .unwrap();
        assert!(r.mean_loss < 5.0 - 10.0 * r.se_loss, "{r:?}");
    }

    #[test]
    fn rotation_invariance() {
        let f = phi(PhiSpec::PositivePartJs { a: 0.375 });
        let c = cfg(2.0, 10_000);
        let a = estimate_risk(&f, &c).unwrap();
        let b = estimate_risk_on_axis(&f, &c, 4).unwrap();
        for (x, y) in [
            (a.mean_loss, b.mean_loss),
            (a.se_loss, b.se_loss),
            (a.sure_mean, b.sure_mean),
            (a.se_sure, b.se_sure),
        ] {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{x} {y}");
        }
    }

    #[test]
    fn thread_count_does_not_matter() {
        let f = phi(PhiSpec::GbUnknown { a: -2.0, b: 1.0 });
        let c = cfg(2.0, 3 * BLOCK + 17);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| estimate_risk(&f, &c)).unwrap();
        let b = four.install(|| estimate_risk(&f, &c)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn student_t_rejected_by_z_test() {
        let mut c = cfg(0.0, 10);
        c.model = ModelSpec::StudentT { df: 5.0 };
        assert!(matches!(
            sure_unbiasedness_test(&Phi::Zero, &c),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn mle_z_score() {
        let r = sure_unbiasedness_test(&Phi::Zero, &cfg(2.0, 100_000)).unwrap();
        assert!(r.z.abs() < 4.0);
    }

    #[test]
    fn combined_se_shrinks_with_reps() {
        let f = phi(PhiSpec::PositivePartJs { a: 0.375 });
        let gaps: Vec<f64> = [25_000u64, 400_000]
            .iter()
            .map(|&n| {
                let r = estimate_risk(&f, &cfg(1.0, n)).unwrap();
                r.se_loss.hypot(r.se_sure)
            })
            .collect();
        assert!(gaps[1] < gaps[0] / 2.0);
    }

    #[test]
    fn degenerate_domination_is_zero() {
        let spec = DominatorSpec::degenerate(1.5, 0.2);
        let cells = domination_mc(&Phi::Zero, &spec, &[cfg(1.0, 5_000)]).unwrap();
        assert_eq!(cells[0].mean_diff, 0.0);
        assert_eq!(cells[0].se_diff, 0.0);
    }

    #[test]
    fn ks_at_origin() {
        let r = w_distribution_ks(&cfg(0.0, 20_000)).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(w_distribution_ks(&cfg(1.0, 10)).is_err());
    }
}
