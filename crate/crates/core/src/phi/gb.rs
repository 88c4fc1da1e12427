//! Generalized Bayes shrinkage under the scale-mixture prior with mixing
//! density `lambda^a (log 1/lambda)^b` on `(0, 1)`:
//!
//! ```text
//! phi_{a,b}(w) = w * I(s+1, m) / I(s, m),
//! I(k, m)      = \int_0^1 lambda^k (log 1/lambda)^b (1 + w lambda)^{-m} d lambda,
//! s = p/2 + a,  m = (p+n)/2 + 1.
//! ```
//!
//! Every integral is multiplied by `max(w,1)^(s+1)` before quadrature; this
//! factor cancels in all ratios and keeps the integrals of order one when `w`
//! is large, where their mass sits near `lambda ~ 1/w`.

use std::cmp::Ordering;

use crate::phi::quadrature::{integrate_loglambda, QuadratureConfig};
use crate::phi::{PhiSpec, Shrinkage};
use crate::sure::ProblemDims;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbPhi {
    a: f64,
    b: f64,
    dims: ProblemDims,
    cfg: QuadratureConfig,
}

impl GbPhi {
    pub fn new(a: f64, b: f64, dims: ProblemDims, cfg: QuadratureConfig) -> Result<Self> {
        PhiSpec::GbUnknown { a, b }.validate(dims)?;
        cfg.validate()?;
        Ok(Self { a, b, dims, cfg })
    }

    pub fn spec(&self) -> PhiSpec {
        PhiSpec::GbUnknown {
            a: self.a,
            b: self.b,
        }
    }

    pub fn dims(&self) -> ProblemDims {
        self.dims
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    fn s(&self) -> f64 {
        f64::from(self.dims.p()) / 2.0 + self.a
    }

    fn m(&self) -> f64 {
        f64::from(self.dims.p() + self.dims.n()) / 2.0 + 1.0
    }

    /// `scale * \int lambda^s L (w lambda)^k (1 + w lambda)^{-exponent}`.
    fn moment(&self, w: f64, k: i32, exponent: f64) -> Result<f64> {
        let scale = w.max(1.0).powf(self.s() + 1.0);
        integrate_loglambda(
            |l| {
                let x = w * l;
                scale * x.powi(k) * (-exponent * x.ln_1p()).exp()
            },
            self.s(),
            self.b,
            &self.cfg,
        )
    }

    /// Limit of `phi(w)/w` as `w -> 0`, which is also `phi'(0)`.
    fn slope_at_origin(&self) -> Result<f64> {
        let num = integrate_loglambda(|l| l, self.s(), self.b, &self.cfg)?;
        let den = integrate_loglambda(|_| 1.0, self.s(), self.b, &self.cfg)?;
        Ok(num / den)
    }

    pub fn value(&self, w: f64) -> Result<f64> {
        check_w(w)?;
        if w == 0.0 {
            return Ok(0.0);
        }
        let m = self.m();
        Ok(self.moment(w, 1, m)? / self.moment(w, 0, m)?)
    }

    /// Value and derivative; the derivative differentiates under the integral
    /// sign, `d/dw (1 + w l)^{-m} = -m l (1 + w l)^{-m-1}`.
    pub fn value_and_deriv(&self, w: f64) -> Result<(f64, f64)> {
        check_w(w)?;
        if w == 0.0 {
            return Ok((0.0, self.slope_at_origin()?));
        }
        let m = self.m();
        let num = self.moment(w, 1, m)?;
        let den = self.moment(w, 0, m)?;
        let phi = num / den;
        let num2 = self.moment(w, 2, m + 1.0)?;
        let den1 = self.moment(w, 1, m + 1.0)?;
        let deriv = (phi - m * (num2 - phi * den1) / den) / w;
        Ok((phi, deriv))
    }

    /// `lim_{w -> inf} phi(w) = (p/2 + a + 1) / (n/2 - a - 1)`; infinite when
    /// the denominator is not positive.
    pub fn limit(&self) -> f64 {
        let num = f64::from(self.dims.p()) / 2.0 + self.a + 1.0;
        let den = f64::from(self.dims.n()) / 2.0 - self.a - 1.0;
        if den > 0.0 {
            num / den
        } else {
            f64::INFINITY
        }
    }
}

fn check_w(w: f64) -> Result<()> {
    if w >= 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "w must be finite and non-negative, got {w}"
        )))
    }
}

impl Shrinkage for GbPhi {
    fn eval(&self, w: f64) -> Result<f64> {
        self.value(w)
    }
    fn deriv(&self, w: f64) -> Result<f64> {
        Ok(self.value_and_deriv(w)?.1)
    }
    fn eval_with_deriv(&self, w: f64) -> Result<(f64, f64)> {
        self.value_and_deriv(w)
    }
    fn label(&self) -> String {
        self.spec().to_string()
    }
}

pub fn phi_gb_unknown(
    a: f64,
    b: f64,
    w: f64,
    dims: ProblemDims,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    GbPhi::new(a, b, dims, *cfg)?.value(w)
}

pub fn phi_gb_unknown_deriv(
    a: f64,
    b: f64,
    w: f64,
    dims: ProblemDims,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "derivative needs w > 0, got {w}"
        )));
    }
    Ok(GbPhi::new(a, b, dims, *cfg)?.value_and_deriv(w)?.1)
}

/// `phi_{-2,b}(w)` through the integration-by-parts identity
///
/// ```text
/// phi = (p-2)/(n+2) - 2b/(n+2) * J / K - 2/(n+2) * B / K
/// J = \int l^{p/2-2} (log 1/l)^{b-1} (1+wl)^{-(p+n)/2}
/// K = \int l^{p/2-2} (log 1/l)^{b}   (1+wl)^{-(p+n)/2-1}
/// ```
///
/// `B = (1+w)^{-(p+n)/2}` is the boundary term at `l = 1`, which survives
/// only when `b = 0` and enters with a negative sign.
pub fn phi_gb_identity_saigo4(
    b: f64,
    w: f64,
    dims: ProblemDims,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("b must be >= 0, got {b}")));
    }
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::InvalidParameter(format!("w must be > 0, got {w}")));
    }
    let p = f64::from(dims.p());
    let n = f64::from(dims.n());
    let s = p / 2.0 - 2.0;
    let big_m = (p + n) / 2.0;
    let scale = w.max(1.0).powf(s + 1.0);
    let kern = |exponent: f64| move |l: f64| scale * (-exponent * (w * l).ln_1p()).exp();

    let k_int = integrate_loglambda(kern(big_m + 1.0), s, b, cfg)?;
    let mut value = (p - 2.0) / (n + 2.0);
    if b > 0.0 {
        let j_int = integrate_loglambda(kern(big_m), s, b - 1.0, cfg)?;
        value -= 2.0 * b / (n + 2.0) * j_int / k_int;
    } else {
        let boundary = scale * (-big_m * w.ln_1p()).exp();
        value -= 2.0 / (n + 2.0) * boundary / k_int;
    }
    Ok(value)
}

/// Compares `phi_{-2,b}(w)` with `phi_{-2,L}(w)` for `L = (log)^b_ref`.
///
/// Returns the ordering of `phi_{-2,b}` relative to the reference. Values
/// within `1e-12` relative are reported as equal.
pub fn psi_cross_inequality(
    b: f64,
    b_ref: f64,
    w: f64,
    dims: ProblemDims,
    cfg: &QuadratureConfig,
) -> Result<Ordering> {
    let lhs = phi_gb_unknown(-2.0, b, w, dims, cfg)?;
    let rhs = phi_gb_unknown(-2.0, b_ref, w, dims, cfg)?;
    if (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()) {
        Ok(Ordering::Equal)
    } else {
        Ok(lhs.partial_cmp(&rhs).unwrap_or(Ordering::Equal))
    }
}

/// Direction implied by the covariance inequality: with
/// `r(y) = (log y)^b / L(y)` non-decreasing in `y` (that is `b >= b_ref`),
/// `phi_{-2,b} <= phi_{-2,L}`; with `r` non-increasing the order flips.
pub fn expected_cross_ordering(b: f64, b_ref: f64) -> Ordering {
    b_ref.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> ProblemDims {
        ProblemDims::new(5, 6).unwrap()
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn zero_at_origin() {
        assert_eq!(phi_gb_unknown(-2.0, 1.0, 0.0, dims(), &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn bounded_limits() {
        let v = phi_gb_unknown(-2.0, 1.0, 1e8, dims(), &cfg()).unwrap();
        assert!((0.3..=0.375).contains(&v), "{v}");
        let v = phi_gb_unknown(-2.0, 0.0, 1e8, dims(), &cfg()).unwrap();
        assert!((0.3..=0.375).contains(&v), "{v}");
        let v = phi_gb_unknown(0.0, 0.0, 1e8, dims(), &cfg()).unwrap();
        assert!((1.6..=1.75).contains(&v), "{v}");
        let gb = GbPhi::new(0.0, 0.0, dims(), cfg()).unwrap();
        assert_eq!(gb.limit(), 1.75);
    }

    #[test]
    fn derivative_matches_central_difference() {
        for w in [1.0, 10.0, 100.0] {
            let d = phi_gb_unknown_deriv(-2.0, 1.0, w, dims(), &cfg()).unwrap();
            let h = 1e-4 * w;
            let fd = (phi_gb_unknown(-2.0, 1.0, w + h, dims(), &cfg()).unwrap()
                - phi_gb_unknown(-2.0, 1.0, w - h, dims(), &cfg()).unwrap())
                / (2.0 * h);
            assert!((d - fd).abs() <= 1e-5 * d.abs(), "w={w}: {d} vs {fd}");
        }
        assert!(phi_gb_unknown_deriv(-2.0, 1.0, 1.0, dims(), &cfg()).unwrap() > 0.0);
    }

    #[test]
    fn derivative_near_origin_tracks_slope() {
        let gb = GbPhi::new(-2.0, 1.0, dims(), cfg()).unwrap();
        let mut gaps = Vec::new();
        for w in [1e-3, 1e-4] {
            let (v, d) = gb.value_and_deriv(w).unwrap();
            gaps.push((d - v / w).abs());
        }
        assert!(gaps[1] < gaps[0]);
        assert!(gaps[1] < 1e-4);
        let (_, d0) = gb.value_and_deriv(0.0).unwrap();
        let (v, _) = gb.value_and_deriv(1e-6).unwrap();
        assert!((d0 - v / 1e-6).abs() < 1e-5);
    }

    #[test]
    fn saigo4_matches_direct_route() {
        for w in [1.0, 10.0, 1000.0] {
            let direct = phi_gb_unknown(-2.0, 1.0, w, dims(), &cfg()).unwrap();
            let ibp = phi_gb_identity_saigo4(1.0, w, dims(), &cfg()).unwrap();
            assert!((direct - ibp).abs() <= 1e-8 * direct.abs(), "w={w}");
        }
    }

    #[test]
    fn saigo4_with_b_zero_keeps_boundary_term() {
        for w in [0.5, 3.0, 40.0] {
            let direct = phi_gb_unknown(-2.0, 0.0, w, dims(), &cfg()).unwrap();
            let ibp = phi_gb_identity_saigo4(0.0, w, dims(), &cfg()).unwrap();
            assert!((direct - ibp).abs() <= 1e-9 * direct, "w={w}");
        }
    }

    #[test]
    fn saigo4_log_rate() {
        let k = dims().constants();
        let v = phi_gb_identity_saigo4(1.0, 1e6, dims(), &cfg()).unwrap();
        let scaled = 1e6f64.ln() * (k.c_pn - v);
        assert!(
            (scaled - k.beta_star).abs() <= 0.15 * k.beta_star,
            "{scaled}"
        );
    }

    #[test]
    fn cross_inequality() {
        assert_eq!(
            psi_cross_inequality(1.0, 1.0, 100.0, dims(), &cfg()).unwrap(),
            Ordering::Equal
        );
        for w in [10.0, 100.0, 1e3, 1e5] {
            let ord = psi_cross_inequality(2.0, 1.0, w, dims(), &cfg()).unwrap();
            assert_eq!(ord, Ordering::Less, "w={w}");
            assert_eq!(ord, expected_cross_ordering(2.0, 1.0));
            let ord = psi_cross_inequality(0.5, 1.0, w, dims(), &cfg()).unwrap();
            assert_eq!(ord, expected_cross_ordering(0.5, 1.0));
        }
    }

    #[test]
    fn monotone_and_bounded_without_log_factor() {
        let gb = GbPhi::new(-2.0, 0.0, dims(), cfg()).unwrap();
        let grid = crate::log_grid(1e-3, 1e8, 45);
        let vals: Vec<f64> = grid.iter().map(|&w| gb.value(w).unwrap()).collect();
        // flat to rounding once the tail has converged
        assert!(vals.windows(2).all(|p| p[1] >= p[0] - 1e-13));
        assert!(vals.iter().all(|&v| v <= gb.limit() + 1e-13));
    }

    #[test]
    fn tighter_tolerance_is_self_consistent() {
        let loose = cfg();
        let tight = QuadratureConfig {
            rel_tol: loose.rel_tol / 2.0,
            ..loose
        };
        for (a, b, w) in [(-2.0, 1.0, 3.0), (-1.0, 0.0, 1e4), (-2.0, 2.0, 1e7)] {
            let x = phi_gb_unknown(a, b, w, dims(), &loose).unwrap();
            let y = phi_gb_unknown(a, b, w, dims(), &tight).unwrap();
            assert!((x - y).abs() < loose.rel_tol * x.abs());
        }
    }
}
