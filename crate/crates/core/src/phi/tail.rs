//! Tail profile of a shrinkage function on a log grid.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::phi::Shrinkage;
use crate::sure::ProblemDims;
use crate::{Error, Result};

/// `lim_{w -> inf} phi(w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiLimit {
    Finite(f64),
    Infinite,
}

impl PhiLimit {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            PhiLimit::Finite(v) => Some(v),
            PhiLimit::Infinite => None,
        }
    }
}

impl Serialize for PhiLimit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            PhiLimit::Finite(v) => s.serialize_f64(v),
            PhiLimit::Infinite => s.serialize_str("+inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailProfile {
    pub phi_limit: PhiLimit,
    /// Coefficient in `phi(w) ~ c - b beta_star / log w`, when the limit is `c`.
    pub b_hat: Option<f64>,
    pub fit_quality: f64,
    #[serde(skip)]
    pub w_grid: Vec<f64>,
    #[serde(skip)]
    pub phi_values: Vec<f64>,
}

impl TailProfile {
    /// Indices of the fit window: the upper half of the grid.
    pub fn window(&self) -> std::ops::Range<usize> {
        self.w_grid.len() / 2..self.w_grid.len()
    }
}

/// Relative distance from `c_{p,n}` within which the fitted limit counts as `c`.
pub const LIMIT_MATCH_TOL: f64 = 0.05;
/// Log-log growth rate above which `phi` is treated as unbounded.
const UNBOUNDED_SLOPE: f64 = 0.5;

/// Least squares `y = alpha + beta x`; returns `(alpha, beta, max |residual|)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let resid = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    (intercept, slope, resid)
}

pub fn tail_profile<F: Shrinkage + ?Sized>(
    phi: &F,
    dims: ProblemDims,
    w_grid: &[f64],
) -> Result<TailProfile> {
    if w_grid.len() < 20 {
        return Err(Error::InvalidParameter(format!(
            "tail grid needs at least 20 points, got {}",
            w_grid.len()
        )));
    }
    if !w_grid.windows(2).all(|p| p[1] > p[0]) {
        return Err(Error::InvalidParameter(
            "tail grid must be ascending".into(),
        ));
    }
    if w_grid[0] > 1e3 || w_grid[w_grid.len() - 1] < 1e8 || w_grid[0] <= 1.0 {
        return Err(Error::InvalidParameter(
            "tail grid must lie above 1 and span at least [1e3, 1e8]".into(),
        ));
    }
    let phi_values = w_grid
        .par_iter()
        .map(|&w| {
            let v = phi.eval(w)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Evaluation {
                    what: phi.label(),
                    w,
                })
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let k = dims.constants();
    let mut profile = TailProfile {
        phi_limit: PhiLimit::Finite(0.0),
        b_hat: None,
        fit_quality: 0.0,
        w_grid: w_grid.to_vec(),
        phi_values,
    };
    let win = profile.window();
    let ws = &profile.w_grid[win.clone()];
    let vs = &profile.phi_values[win];

    if vs.iter().all(|&v| v > 0.0) {
        let lx: Vec<f64> = ws.iter().map(|w| w.ln()).collect();
        let ly: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
        let (_, slope, resid) = linear_fit(&lx, &ly);
        if slope > UNBOUNDED_SLOPE {
            profile.phi_limit = PhiLimit::Infinite;
            profile.fit_quality = resid;
            return Ok(profile);
        }
    }

    // phi(w) ~ phi_star - kappa / log w
    let inv_log: Vec<f64> = ws.iter().map(|w| 1.0 / w.ln()).collect();
    let (limit, _, resid) = linear_fit(&inv_log, vs);
    profile.phi_limit = PhiLimit::Finite(limit);
    profile.fit_quality = resid;

    if (limit - k.c_pn).abs() <= LIMIT_MATCH_TOL * k.c_pn {
        let scaled: Vec<f64> = ws
            .iter()
            .zip(vs)
            .map(|(w, v)| w.ln() * (k.c_pn - v) / k.beta_star)
            .collect();
        let b_hat = scaled.iter().sum::<f64>() / scaled.len() as f64;
        profile.fit_quality = scaled.iter().map(|y| (y - b_hat).abs()).fold(0.0, f64::max);
        profile.b_hat = Some(b_hat);
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::{Phi, PhiSpec};

    fn dims() -> ProblemDims {
        ProblemDims::new(5, 6).unwrap()
    }

    fn grid() -> Vec<f64> {
        crate::log_grid(1e3, 1e8, 41)
    }

    fn profile(spec: PhiSpec) -> TailProfile {
        let phi = Phi::from_spec(&spec, dims(), &Default::default()).unwrap();
        tail_profile(&phi, dims(), &grid()).unwrap()
    }

    #[test]
    fn boundary_phi_recovers_b_exactly() {
        let p = profile(PhiSpec::boundary(1.0));
        assert!((p.b_hat.unwrap() - 1.0).abs() < 1e-6);
        assert!((p.phi_limit.finite().unwrap() - 0.375).abs() < 1e-12);
    }

    #[test]
    fn gb_boundary_coefficient() {
        let p = profile(PhiSpec::GbUnknown { a: -2.0, b: 1.0 });
        let b = p.b_hat.expect("limit should match c");
        assert!((0.85..=1.15).contains(&b), "{b}");
    }

    #[test]
    fn linear_is_unbounded() {
        let p = profile(PhiSpec::Linear { alpha: 0.5 });
        assert_eq!(p.phi_limit, PhiLimit::Infinite);
        assert!(p.b_hat.is_none());
    }

    #[test]
    fn zero_and_constant_tails() {
        let p = profile(PhiSpec::Zero);
        assert_eq!(p.phi_limit, PhiLimit::Finite(0.0));
        assert!(p.b_hat.is_none());
        let p = profile(PhiSpec::PositivePartJs { a: 0.375 });
        assert!(p.b_hat.unwrap().abs() < 1e-12);
    }

    #[test]
    fn limit_away_from_c_has_no_b_hat() {
        let p = profile(PhiSpec::GbUnknown { a: -1.0, b: 0.0 });
        let lim = p.phi_limit.finite().unwrap();
        assert!((lim - 2.5 / 3.0).abs() < 0.01, "{lim}");
        assert!(p.b_hat.is_none());
    }

    #[test]
    fn grid_preconditions() {
        let phi = Phi::Zero;
        assert!(tail_profile(&phi, dims(), &crate::log_grid(1e3, 1e8, 10)).is_err());
        assert!(tail_profile(&phi, dims(), &crate::log_grid(1e4, 1e8, 30)).is_err());
        let mut g = grid();
        g.reverse();
        assert!(tail_profile(&phi, dims(), &g).is_err());
    }
}
