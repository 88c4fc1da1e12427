//! Problem dimensions, derived constants, and the unbiased risk estimate.
//!
//! For `delta_phi(X, S) = (1 - phi(W)/W) X` the statistic `p + (n+2) D_phi(W)`
//! is an unbiased estimate of the scaled quadratic risk, where
//!
//! ```text
//! D_phi(w) = (phi(w) - 2c) phi(w) / w - d phi'(w) (1 + phi(w))
//! c = (p-2)/(n+2),  d = 4/(n+2)
//! ```
//!
//! `D_phi(0)` is taken as the continuous extension `-d phi'(0+)`, which
//! requires `phi(0) = 0`.

use serde::{Deserialize, Serialize};

use crate::phi::Shrinkage;
use crate::{Error, Result};

/// Mean dimension `p` and residual degrees of freedom `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemDims {
    p: u32,
    n: u32,
}

impl ProblemDims {
    pub fn new(p: u32, n: u32) -> Result<Self> {
        if p < 3 || n < 3 {
            return Err(Error::InvalidDims { p, n });
        }
        Ok(Self { p, n })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn constants(&self) -> Constants {
        constants(*self)
    }
}

/// `c_{p,n}`, `d_n` and the boundary constant `beta_star`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c_pn: f64,
    pub d_n: f64,
    pub beta_star: f64,
}

pub fn constants(dims: ProblemDims) -> Constants {
    let p = f64::from(dims.p);
    let n = f64::from(dims.n);
    let c_pn = (p - 2.0) / (n + 2.0);
    let d_n = 4.0 / (n + 2.0);
    Constants {
        c_pn,
        d_n,
        beta_star: d_n * (1.0 + c_pn) / 2.0,
    }
}

/// One evaluation of the unbiased risk estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurePoint {
    pub w: f64,
    pub d_phi: f64,
    pub risk_estimate: f64,
}

/// `D_phi(w)` from already evaluated `phi(w)` and `phi'(w)`.
#[inline]
pub fn d_phi_from_values(value: f64, deriv: f64, w: f64, k: &Constants) -> f64 {
    if w == 0.0 {
        -k.d_n * deriv
    } else {
        (value - 2.0 * k.c_pn) * value / w - k.d_n * deriv * (1.0 + value)
    }
}

fn eval_checked<F: Shrinkage + ?Sized>(phi: &F, w: f64) -> Result<(f64, f64)> {
    if !(w >= 0.0) || !w.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "w must be finite and non-negative, got {w}"
        )));
    }
    let (v, dv) = phi.eval_with_deriv(w)?;
    if !v.is_finite() || !dv.is_finite() {
        return Err(Error::Evaluation {
            what: phi.label(),
            w,
        });
    }
    Ok((v, dv))
}

pub fn d_phi<F: Shrinkage + ?Sized>(phi: &F, w: f64, dims: ProblemDims) -> Result<f64> {
    let k = dims.constants();
    let (v, dv) = eval_checked(phi, w)?;
    if w == 0.0 && v != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "D_phi(0) needs phi(0) = 0, got phi(0) = {v}"
        )));
    }
    Ok(d_phi_from_values(v, dv, w, &k))
}

pub fn sure_risk_estimate<F: Shrinkage + ?Sized>(
    phi: &F,
    w: f64,
    dims: ProblemDims,
) -> Result<SurePoint> {
    let d = d_phi(phi, w, dims)?;
    let scale = f64::from(dims.n) + 2.0;
    Ok(SurePoint {
        w,
        d_phi: d,
        risk_estimate: f64::from(dims.p) + scale * d,
    })
}

fn require_positive(w: f64) -> Result<()> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "w must be positive and finite, got {w}"
        )))
    }
}

/// `Delta_1(w; phi) = 2 (c - phi(w)) / w + d phi'(w)`.
pub fn delta1<F: Shrinkage + ?Sized>(phi: &F, w: f64, dims: ProblemDims) -> Result<f64> {
    require_positive(w)?;
    let k = dims.constants();
    let (v, dv) = eval_checked(phi, w)?;
    Ok(2.0 * (k.c_pn - v) / w + k.d_n * dv)
}

/// `Delta_2(w; phi, g) = -g/w + d g' + d (g'/g)(1 + phi)`; undefined where `g(w) = 0`.
pub fn delta2<F, G>(phi: &F, g: &G, w: f64, dims: ProblemDims) -> Result<f64>
where
    F: Shrinkage + ?Sized,
    G: Shrinkage + ?Sized,
{
    require_positive(w)?;
    let k = dims.constants();
    let (v, _) = eval_checked(phi, w)?;
    let (gv, gd) = eval_checked(g, w)?;
    if gv == 0.0 {
        return Err(Error::ZeroPerturbation { w });
    }
    Ok(-gv / w + k.d_n * gd + k.d_n * (gd / gv) * (1.0 + v))
}

/// Risk-difference integrand `D_phi(w) - D_{phi+g}(w)`.
///
/// Computed from the two `D` values directly, so it is defined where `g`
/// vanishes and equals `g (Delta_1 + Delta_2)` elsewhere.
pub fn delta<F, G>(phi: &F, g: &G, w: f64, dims: ProblemDims) -> Result<f64>
where
    F: Shrinkage + ?Sized,
    G: Shrinkage + ?Sized,
{
    require_positive(w)?;
    let k = dims.constants();
    let (v, dv) = eval_checked(phi, w)?;
    let (gv, gd) = eval_checked(g, w)?;
    Ok(delta_from_values(v, dv, gv, gd, w, &k))
}

#[inline]
pub fn delta_from_values(v: f64, dv: f64, gv: f64, gd: f64, w: f64, k: &Constants) -> f64 {
    d_phi_from_values(v, dv, w, k) - d_phi_from_values(v + gv, dv + gd, w, k)
}
