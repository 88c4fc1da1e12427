//! Quasi-admissibility classification and constructive domination.
//!
//! A shrinkage function is compared against the critical curve
//! `c - b beta_star / log w`. Shrinking eventually less than the curve with
//! some `b > 1` makes the estimator quasi-inadmissible, and an explicit
//! improving perturbation `g(w) = k(w) log(w + e)^(-1-nu)` is built and
//! checked on a grid. Shrinking eventually more with `b < 1` makes it
//! quasi-admissible.

use rayon::prelude::*;
use serde::Serialize;

use crate::phi::tail::linear_fit;
use crate::phi::{PhiLimit, Shrinkage, TailProfile};
use crate::sure::{delta_from_values, ProblemDims};
use crate::{log_grid, Error, Result};

/// Half-width of the dead zone around `b = 1`.
pub const DEFAULT_MARGIN: f64 = 0.05;
/// Bound on the number of sign changes of `phi'` accepted for A2.
pub const DEFAULT_MAX_SIGN_CHANGES: usize = 10;
/// Tolerance on the tail ratio `w phi'(w) / phi(w)` for A4.
pub const A4_EPS: f64 = 0.05;
/// Largest ramp start tried by [`construct_dominator`].
pub const W_SHARP_CAP: f64 = 1e10;

/// Verdict of the unknown-scale classifier.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum QuasiClass {
    QuasiAdmissible { b_witness: f64, w_star: f64 },
    QuasiInadmissible { b_witness: f64, w_star: f64 },
    Indeterminate { reason: String },
}

impl QuasiClass {
    pub fn name(&self) -> &'static str {
        match self {
            QuasiClass::QuasiAdmissible { .. } => "QuasiAdmissible",
            QuasiClass::QuasiInadmissible { .. } => "QuasiInadmissible",
            QuasiClass::Indeterminate { .. } => "Indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A1Report {
    pub phi_at_zero: f64,
    pub min_value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A2Report {
    pub sign_changes: usize,
    pub bound: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A3Report {
    pub first_bad_w: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A4Report {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub eps: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub a1: A1Report,
    pub a2: A2Report,
    pub a3: A3Report,
    pub a4: A4Report,
    pub all_pass: bool,
}

/// Grid diagnostics for A1 to A4.
///
/// The grid must start at 0, reach at least `1e8` and hold 100 points or
/// more. Failures of the assumptions are report entries; only a bad grid is
/// an error. A4 is a tail condition and is checked on the upper half of the
/// positive grid points; where `phi = 0` the ratio is taken to be 0.
pub fn check_assumptions<F: Shrinkage + ?Sized>(
    phi: &F,
    w_grid: &[f64],
    max_sign_changes: usize,
) -> Result<AssumptionReport> {
    if w_grid.len() < 100
        || w_grid[0] != 0.0
        || *w_grid.last().unwrap() < 1e8
        || !w_grid.windows(2).all(|p| p[1] > p[0])
    {
        return Err(Error::InvalidParameter(
            "assumption grid must be ascending from 0 to at least 1e8 with >= 100 points".into(),
        ));
    }
    let evals: Vec<Option<(f64, f64)>> = w_grid
        .par_iter()
        .map(|&w| {
            phi.eval_with_deriv(w)
                .ok()
                .filter(|(v, d)| v.is_finite() && d.is_finite())
        })
        .collect();

    let first_bad_w = w_grid
        .iter()
        .zip(&evals)
        .find(|(_, e)| e.is_none())
        .map(|(w, _)| *w);
    let ok: Vec<(f64, f64, f64)> = w_grid
        .iter()
        .zip(&evals)
        .filter_map(|(&w, e)| e.map(|(v, d)| (w, v, d)))
        .collect();

    let phi_at_zero = evals[0].map_or(f64::NAN, |(v, _)| v);
    let min_value = ok.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let a1 = A1Report {
        phi_at_zero,
        min_value,
        pass: phi_at_zero == 0.0 && min_value >= 0.0,
    };

    let mut sign_changes = 0;
    let mut last_sign = 0.0;
    for &(_, _, d) in &ok {
        if d != 0.0 {
            let s = d.signum();
            if last_sign != 0.0 && s != last_sign {
                sign_changes += 1;
            }
            last_sign = s;
        }
    }
    let a2 = A2Report {
        sign_changes,
        bound: max_sign_changes,
        pass: sign_changes <= max_sign_changes,
    };

    let a3 = A3Report {
        first_bad_w,
        pass: first_bad_w.is_none(),
    };

    let positive: Vec<&(f64, f64, f64)> = ok.iter().filter(|t| t.0 > 0.0).collect();
    let tail = &positive[positive.len() / 2..];
    let (mut min_ratio, mut max_ratio) = (f64::INFINITY, f64::NEG_INFINITY);
    for &&(w, v, d) in tail {
        let r = if v == 0.0 { 0.0 } else { w * d / v };
        min_ratio = min_ratio.min(r);
        max_ratio = max_ratio.max(r);
    }
    let a4 = A4Report {
        min_ratio,
        max_ratio,
        eps: A4_EPS,
        pass: min_ratio >= -A4_EPS && max_ratio <= 1.0 + A4_EPS,
    };

    let all_pass = a1.pass && a2.pass && a3.pass && a4.pass;
    Ok(AssumptionReport {
        a1,
        a2,
        a3,
        a4,
        all_pass,
    })
}

/// Default assumption grid: 0 followed by 199 log-spaced points on `[1e-4, 1e8]`.
pub fn assumption_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain(log_grid(1e-4, 1e8, 199))
        .collect()
}

/// Default tail grid for [`crate::phi::tail_profile`] and [`classify`].
pub fn profile_grid() -> Vec<f64> {
    log_grid(10.0, 1e8, 141)
}

/// `q(w) = log w (c - phi(w)) / beta_star`: the `b` for which `phi` touches the
/// critical curve at `w`.
fn boundary_coefficients(profile: &TailProfile, dims: ProblemDims) -> Vec<f64> {
    let k = dims.constants();
    profile
        .w_grid
        .iter()
        .zip(&profile.phi_values)
        .map(|(w, v)| w.ln() * (k.c_pn - v) / k.beta_star)
        .collect()
}

/// Smallest grid point from which `pred` holds through the end of the grid.
fn holds_from(ws: &[f64], qs: &[f64], pred: impl Fn(f64) -> bool) -> Option<f64> {
    let mut start = None;
    for i in (0..ws.len()).rev() {
        if pred(qs[i]) {
            start = Some(ws[i]);
        } else {
            break;
        }
    }
    start
}

/// Classify `delta_phi` from its tail profile.
///
/// A verdict needs both a witness `b` valid at every grid point from `w_star`
/// on and an extrapolated limit of `q(w)` on the same side of the dead zone
/// `[1 - margin, 1 + margin]`; the extrapolation fits `q(w) = q_inf - k / log w`
/// over the tail window.
pub fn classify<F: Shrinkage + ?Sized>(
    phi: &F,
    dims: ProblemDims,
    profile: &TailProfile,
    margin: f64,
) -> QuasiClass {
    let indeterminate = |reason: String| QuasiClass::Indeterminate { reason };
    if !(0.0..1.0).contains(&margin) {
        return indeterminate(format!("margin must lie in [0, 1), got {margin}"));
    }
    match phi.eval(0.0) {
        Ok(0.0) => {}
        Ok(v) => return indeterminate(format!("A1 fails: phi(0) = {v}")),
        Err(e) => return indeterminate(format!("cannot evaluate phi(0): {e}")),
    }
    if let Some((w, v)) = profile
        .w_grid
        .iter()
        .zip(&profile.phi_values)
        .find(|(_, v)| !(**v >= 0.0))
    {
        return indeterminate(format!("A1 fails: phi({w}) = {v}"));
    }

    let ws = &profile.w_grid;
    let qs = boundary_coefficients(profile, dims);
    let win = profile.window();
    if win.is_empty() {
        return indeterminate("empty tail window".into());
    }
    let q_min = qs[win.clone()]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let q_max = qs[win.clone()]
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);

    if profile.phi_limit == PhiLimit::Infinite {
        if q_max < 1.0 - margin {
            if let Some(w_star) = holds_from(ws, &qs, |q| q <= q_max) {
                return QuasiClass::QuasiAdmissible {
                    b_witness: q_max,
                    w_star,
                };
            }
        }
        return indeterminate("unbounded phi but tail inequality not verified on grid".into());
    }

    let k = dims.constants();
    let q_inf = if profile.b_hat.is_some() {
        let inv_log: Vec<f64> = ws[win.clone()].iter().map(|w| 1.0 / w.ln()).collect();
        linear_fit(&inv_log, &qs[win.clone()]).0
    } else {
        let limit = profile.phi_limit.finite().unwrap_or(f64::NAN);
        if limit < k.c_pn {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    };

    if q_min > 1.0 + margin && q_inf > 1.0 + margin {
        if let Some(w_star) = holds_from(ws, &qs, |q| q >= q_min) {
            return QuasiClass::QuasiInadmissible {
                b_witness: q_min,
                w_star,
            };
        }
    }
    if q_max < 1.0 - margin && q_inf < 1.0 - margin {
        if let Some(w_star) = holds_from(ws, &qs, |q| q <= q_max) {
            return QuasiClass::QuasiAdmissible {
                b_witness: q_max,
                w_star,
            };
        }
    }
    indeterminate(format!(
        "tail coefficient not separated from 1: q in [{q_min:.6}, {q_max:.6}] on the tail window, \
         extrapolated limit {q_inf:.6}, margin {margin}"
    ))
}

/// Parameters of the dominating perturbation `g(w) = k(w) log(w + e)^(-1-nu)`
/// with the ramp `k(w) = clamp((w - w_sharp) / ramp_width, 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominatorSpec {
    pub nu: f64,
    pub w_sharp: f64,
    pub ramp_width: f64,
    pub b: f64,
    pub w_star: f64,
}

impl DominatorSpec {
    pub fn perturbation(&self) -> Perturbation {
        Perturbation {
            nu: self.nu,
            w_sharp: self.w_sharp,
            ramp_width: self.ramp_width,
        }
    }

    /// A spec whose perturbation vanishes everywhere.
    pub fn degenerate(b: f64, nu: f64) -> Self {
        Self {
            nu,
            w_sharp: f64::INFINITY,
            ramp_width: 1.0,
            b,
            w_star: f64::INFINITY,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.w_sharp.is_infinite()
    }
}

/// `g(w) = k(w) log(w + e)^(-1-nu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub nu: f64,
    pub w_sharp: f64,
    pub ramp_width: f64,
}

impl Perturbation {
    fn ramp(&self, w: f64) -> (f64, f64) {
        if w <= self.w_sharp {
            (0.0, 0.0)
        } else if w < self.w_sharp + self.ramp_width {
            ((w - self.w_sharp) / self.ramp_width, 1.0 / self.ramp_width)
        } else {
            (1.0, 0.0)
        }
    }
}

impl Shrinkage for Perturbation {
    fn eval(&self, w: f64) -> Result<f64> {
        Ok(self.eval_with_deriv(w)?.0)
    }

    fn deriv(&self, w: f64) -> Result<f64> {
        Ok(self.eval_with_deriv(w)?.1)
    }

    fn eval_with_deriv(&self, w: f64) -> Result<(f64, f64)> {
        let (k, dk) = self.ramp(w);
        if k == 0.0 && dk == 0.0 {
            return Ok((0.0, 0.0));
        }
        let l = (w + std::f64::consts::E).ln();
        let f = l.powf(-1.0 - self.nu);
        let df = -(1.0 + self.nu) * f / (l * (w + std::f64::consts::E));
        Ok((k * f, dk * f + k * df))
    }

    fn label(&self) -> String {
        format!(
            "dominator:nu={:?},w_sharp={:?},ramp_width={:?}",
            self.nu, self.w_sharp, self.ramp_width
        )
    }
}

/// `nu = min(1, (2 b beta_star - d (1 + phi_star)) / (2 d (3 + phi_star)))`.
pub fn dominator_nu(b: f64, phi_star: f64, dims: ProblemDims) -> f64 {
    let k = dims.constants();
    let raw = (2.0 * b * k.beta_star - k.d_n * (1.0 + phi_star)) / (2.0 * k.d_n * (3.0 + phi_star));
    raw.min(1.0)
}

/// Construction grid for a ramp starting at `w_sharp`: 0 plus 2000 log-spaced
/// points reaching `max(1e8, 100 w_sharp)`.
pub fn construction_grid(w_sharp: f64) -> Vec<f64> {
    let hi = (100.0 * w_sharp).max(1e8);
    std::iter::once(0.0)
        .chain(log_grid(1e-4, hi, 2000))
        .collect()
}

/// Build the improving perturbation for a quasi-inadmissible `phi`.
///
/// `w_star` is the smallest profile grid point from which
/// `phi(w) <= c - b beta_star / log w` holds through the end of the grid. The
/// ramp start begins there and doubles until [`verify_domination`] passes on
/// [`construction_grid`], giving up beyond [`W_SHARP_CAP`].
pub fn construct_dominator<F: Shrinkage + ?Sized>(
    phi: &F,
    dims: ProblemDims,
    b: f64,
    profile: &TailProfile,
) -> Result<DominatorSpec> {
    if !(b > 1.0) {
        return Err(Error::InvalidParameter(format!("b must exceed 1, got {b}")));
    }
    let phi_star = profile.phi_limit.finite().ok_or_else(|| {
        Error::ConstructionFailed("phi is unbounded; no dominator of this form".into())
    })?;
    let qs = boundary_coefficients(profile, dims);
    let w_star = holds_from(&profile.w_grid, &qs, |q| q >= b).ok_or_else(|| {
        Error::ConstructionFailed(format!(
            "tail inequality with b={b} does not hold at the end of the profile grid"
        ))
    })?;
    let nu = dominator_nu(b, phi_star, dims);
    if !(nu > 0.0) {
        return Err(Error::ConstructionFailed(format!(
            "nu = {nu} is not positive for b={b}, phi_star={phi_star}"
        )));
    }

    let mut w_sharp = w_star;
    let mut last_min = None;
    while w_sharp <= W_SHARP_CAP {
        let spec = DominatorSpec {
            nu,
            w_sharp,
            ramp_width: w_sharp,
            b,
            w_star,
        };
        let cert = verify_domination(phi, &spec, dims, &construction_grid(w_sharp))?;
        if cert.verdict {
            return Ok(spec);
        }
        last_min = cert.min_delta_above_sharp;
        w_sharp *= 2.0;
    }
    Err(Error::ConstructionFailed(format!(
        "no ramp start up to {W_SHARP_CAP:e} gave delta >= 0; last minimum {last_min:?}"
    )))
}

/// Grid evidence that `delta_{phi+g}` improves on `delta_phi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationCertificate {
    pub spec: DominatorSpec,
    pub grid: Vec<(f64, f64)>,
    /// `None` when no grid point lies beyond `w_sharp`.
    pub min_delta_above_sharp: Option<f64>,
    pub zero_below_sharp: bool,
    pub verdict: bool,
    /// The perturbation vanishes on the whole grid.
    pub trivial: bool,
}

/// Evaluate `Delta(w) = D_phi(w) - D_{phi+g}(w)` over the grid.
pub fn verify_domination<F: Shrinkage + ?Sized>(
    phi: &F,
    spec: &DominatorSpec,
    dims: ProblemDims,
    w_grid: &[f64],
) -> Result<DominationCertificate> {
    let g = spec.perturbation();
    let k = dims.constants();
    let grid = w_grid
        .par_iter()
        .map(|&w| {
            let (v, dv) = phi.eval_with_deriv(w)?;
            let (gv, gd) = g.eval_with_deriv(w)?;
            let d = delta_from_values(v, dv, gv, gd, w, &k);
            if d.is_finite() {
                Ok((w, d))
            } else {
                Err(Error::Evaluation {
                    what: phi.label(),
                    w,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let zero_below_sharp = grid
        .iter()
        .filter(|(w, _)| *w <= spec.w_sharp)
        .all(|(_, d)| *d == 0.0);
    let min_delta_above_sharp = grid
        .iter()
        .filter(|(w, _)| *w > spec.w_sharp)
        .map(|(_, d)| *d)
        .reduce(f64::min);
    let verdict = zero_below_sharp && min_delta_above_sharp.is_none_or(|m| m >= 0.0);
    Ok(DominationCertificate {
        spec: *spec,
        grid,
        trivial: min_delta_above_sharp.is_none(),
        min_delta_above_sharp,
        zero_below_sharp,
        verdict,
    })
}

/// Search for a point where `Delta(w; phi, g) < 0`, given a `g` that breaks one
/// of the necessary conditions: `g(0) >= 0`, `g >= 0`, or positivity persisting
/// once reached.
///
/// The search is confined to the region tied to the broken condition: points
/// with `g < 0` for the first two, and the stretch before the first zero that
/// follows a positive value for the third, scanned backwards from that zero.
/// Returns `None` when `g` meets all three conditions on the grid or when no
/// negative value is found; neither case proves that no violation exists.
pub fn lemma_gg_witness<F, G>(phi: &F, g: &G, dims: ProblemDims, search: &[f64]) -> Option<f64>
where
    F: Shrinkage + ?Sized,
    G: Shrinkage + ?Sized,
{
    let k = dims.constants();
    let at = |w: f64| -> Option<f64> {
        let (v, dv) = phi.eval_with_deriv(w).ok()?;
        let (gv, gd) = g.eval_with_deriv(w).ok()?;
        let d = delta_from_values(v, dv, gv, gd, w, &k);
        d.is_finite().then_some(d)
    };
    let ws: Vec<f64> = search.iter().cloned().filter(|w| *w > 0.0).collect();
    let gs: Vec<f64> = ws.iter().map(|&w| g.eval(w).unwrap_or(f64::NAN)).collect();
    let g0 = g.eval(0.0).unwrap_or(f64::NAN);

    if g0 < 0.0 || gs.iter().any(|v| *v < 0.0) {
        return ws
            .iter()
            .zip(&gs)
            .filter(|(_, gv)| **gv < 0.0)
            .filter_map(|(&w, _)| at(w).map(|d| (w, d)))
            .filter(|(_, d)| *d < 0.0)
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(w, _)| w);
    }

    let first_pos = gs.iter().position(|v| *v > 0.0)?;
    let vanish = first_pos + gs[first_pos..].iter().position(|v| *v <= 0.0)?;
    (first_pos..vanish)
        .rev()
        .find(|&i| at(ws[i]).is_some_and(|d| d < 0.0))
        .map(|i| ws[i])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cc0Report {
    /// Minimum of `|phi(t)|^d / t` over the top decade of the grid.
    pub liminf_proxy: f64,
    /// Log-log slope of the proxy over the same decade.
    pub log_slope: f64,
    pub violation: bool,
}

/// Numerical check of the necessary condition `liminf |phi(t)|^d / t = 0`.
///
/// A violation is flagged when the proxy is positive and not decaying
/// (log-log slope at least `-0.01`).
pub fn cc0_diagnostic<F: Shrinkage + ?Sized>(
    phi: &F,
    dims: ProblemDims,
    w_grid: &[f64],
) -> Result<Cc0Report> {
    let top = *w_grid
        .last()
        .ok_or_else(|| Error::InvalidParameter("empty grid".into()))?;
    let d = dims.constants().d_n;
    let pts: Vec<(f64, f64)> = w_grid
        .iter()
        .filter(|&&t| t > 0.0 && t >= top / 10.0)
        .map(|&t| Ok((t, phi.eval(t)?.abs().powf(d) / t)))
        .collect::<Result<_>>()?;
    let liminf_proxy = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let positive: Vec<&(f64, f64)> = pts.iter().filter(|p| p.1 > 0.0).collect();
    let log_slope = if positive.len() >= 2 {
        let xs: Vec<f64> = positive.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = positive.iter().map(|p| p.1.ln()).collect();
        linear_fit(&xs, &ys).1
    } else {
        f64::NEG_INFINITY
    };
    Ok(Cc0Report {
        liminf_proxy,
        log_slope,
        violation: liminf_proxy > 0.0 && log_slope >= -0.01,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::{tail_profile, FnShrinkage, Phi, PhiSpec};

    fn dims() -> ProblemDims {
        ProblemDims::new(5, 6).unwrap()
    }

    fn phi(spec: PhiSpec) -> Phi {
        Phi::from_spec(&spec, dims(), &Default::default()).unwrap()
    }

    fn verdict(spec: PhiSpec) -> QuasiClass {
        let f = phi(spec);
        let prof = tail_profile(&f, dims(), &profile_grid()).unwrap();
        classify(&f, dims(), &prof, DEFAULT_MARGIN)
    }

    #[test]
    fn assumptions_for_simple_families() {
        let grid = assumption_grid();
        let r = check_assumptions(&phi(PhiSpec::Linear { alpha: 0.5 }), &grid, 10).unwrap();
        assert!(r.all_pass);
        assert_eq!((r.a4.min_ratio, r.a4.max_ratio), (1.0, 1.0));

        let r = check_assumptions(&phi(PhiSpec::PositivePartJs { a: 0.375 }), &grid, 10).unwrap();
        assert!(r.all_pass);

        let r = check_assumptions(&phi(PhiSpec::Zero), &grid, 10).unwrap();
        assert!(r.all_pass);
        assert_eq!((r.a4.min_ratio, r.a4.max_ratio), (0.0, 0.0));

        let bad = FnShrinkage::new("shifted", |w: f64| 1.0 + w, |_| 1.0);
        let r = check_assumptions(&bad, &grid, 10).unwrap();
        assert!(!r.a1.pass && !r.all_pass);

        assert!(check_assumptions(&phi(PhiSpec::Zero), &grid[1..], 10).is_err());
    }

    #[test]
    fn oscillation_counted() {
        let wiggly = FnShrinkage::new(
            "wiggly",
            |w: f64| w.sin().abs(),
            |w: f64| w.cos() * w.sin().signum(),
        );
        let grid: Vec<f64> = std::iter::once(0.0)
            .chain((1..400).map(|i| i as f64 * 0.25))
            .chain(log_grid(101.0, 1e8, 50))
            .collect();
        let r = check_assumptions(&wiggly, &grid, 10).unwrap();
        assert!(r.a2.sign_changes > 10 && !r.a2.pass);
    }

    #[test]
    fn classification_examples() {
        assert!(matches!(
            verdict(PhiSpec::Zero),
            QuasiClass::QuasiInadmissible { .. }
        ));
        assert!(matches!(
            verdict(PhiSpec::Linear { alpha: 0.5 }),
            QuasiClass::QuasiAdmissible { .. }
        ));
        assert!(matches!(
            verdict(PhiSpec::boundary(1.0)),
            QuasiClass::Indeterminate { .. }
        ));
        assert!(matches!(
            verdict(PhiSpec::PositivePartJs { a: 0.375 }),
            QuasiClass::QuasiAdmissible { .. }
        ));
        match verdict(PhiSpec::boundary(2.0)) {
            QuasiClass::QuasiInadmissible { b_witness, w_star } => {
                assert!((b_witness - 2.0).abs() < 1e-9);
                assert!(w_star > 1.0);
            }
            other => panic!("{other:?}"),
        }
        match verdict(PhiSpec::boundary(0.5)) {
            QuasiClass::QuasiAdmissible { b_witness, .. } => {
                assert!((b_witness - 0.5).abs() < 1e-9)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gb_boundary_case_is_not_decided() {
        assert!(matches!(
            verdict(PhiSpec::GbUnknown { a: -2.0, b: 1.0 }),
            QuasiClass::Indeterminate { .. }
        ));
    }

    #[test]
    fn denser_grid_does_not_flip() {
        for spec in [
            PhiSpec::Zero,
            PhiSpec::boundary(0.5),
            PhiSpec::boundary(2.0),
            PhiSpec::Linear { alpha: 0.3 },
        ] {
            let f = phi(spec);
            let coarse = tail_profile(&f, dims(), &profile_grid()).unwrap();
            let dense = tail_profile(&f, dims(), &log_grid(10.0, 1e8, 561)).unwrap();
            let a = classify(&f, dims(), &coarse, DEFAULT_MARGIN);
            let b = classify(&f, dims(), &dense, DEFAULT_MARGIN);
            assert_eq!(a.name(), b.name());
        }
    }

    #[test]
    fn verdict_serialization() {
        let v = serde_json::to_value(QuasiClass::QuasiInadmissible {
            b_witness: 1.5,
            w_star: 10.0,
        })
        .unwrap();
        assert_eq!(v["verdict"], "QuasiInadmissible");
        assert_eq!(v["b_witness"], 1.5);
    }

    #[test]
    fn nu_formula() {
        let nu = dominator_nu(1.5, 0.0, dims());
        assert!((nu - 0.177_083_333_333_333_3).abs() < 1e-15);
        assert_eq!(dominator_nu(20.0, 0.0, dims()), 1.0);
        let mut last = 0.0;
        for i in 0..40 {
            let nu = dominator_nu(1.0 + 0.1 * i as f64, 0.375, dims());
            assert!(nu >= last);
            last = nu;
        }
    }

    #[test]
    fn perturbation_shape() {
        let g = Perturbation {
            nu: 0.5,
            w_sharp: 10.0,
            ramp_width: 10.0,
        };
        assert_eq!(g.eval(0.0).unwrap(), 0.0);
        assert_eq!(g.eval(10.0).unwrap(), 0.0);
        for w in [10.5, 15.0, 20.0, 1e3, 1e9] {
            let v = g.eval(w).unwrap();
            assert!(v > 0.0 && v < 1.0);
        }
        for w in [12.0, 50.0, 1e4] {
            let h = 1e-6 * w;
            let fd = (g.eval(w + h).unwrap() - g.eval(w - h).unwrap()) / (2.0 * h);
            assert!((fd - g.deriv(w).unwrap()).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn zero_phi_dominator() {
        let f = phi(PhiSpec::Zero);
        let prof = tail_profile(&f, dims(), &profile_grid()).unwrap();
        let spec = construct_dominator(&f, dims(), 1.5, &prof).unwrap();
        assert!((spec.nu - 0.177_083_333_333_333_3).abs() < 1e-12);

        let dense: Vec<f64> = std::iter::once(0.0)
            .chain(log_grid(1e-4, 1e8, 9_999))
            .collect();
        let cert = verify_domination(&f, &spec, dims(), &dense).unwrap();
        assert!(cert.verdict && !cert.trivial);
        for (w, d) in &cert.grid {
            if *w <= spec.w_sharp {
                assert_eq!(*d, 0.0);
            }
        }

        let shrunk = DominatorSpec {
            w_sharp: 0.01 * spec.w_sharp,
            ramp_width: 0.01 * spec.ramp_width,
            ..spec
        };
        let cert = verify_domination(&f, &shrunk, dims(), &dense).unwrap();
        assert!(!cert.verdict);
        assert!(cert.min_delta_above_sharp.unwrap() < 0.0);
    }

    #[test]
    fn boundary_two_dominator() {
        let f = phi(PhiSpec::boundary(2.0));
        let prof = tail_profile(&f, dims(), &profile_grid()).unwrap();
        let spec = construct_dominator(&f, dims(), 1.99, &prof).unwrap();
        let cert = verify_domination(&f, &spec, dims(), &construction_grid(spec.w_sharp)).unwrap();
        assert!(cert.verdict);
    }

    #[test]
    fn degenerate_spec_is_trivial() {
        let f = phi(PhiSpec::PositivePartJs { a: 0.375 });
        let spec = DominatorSpec::degenerate(1.5, 0.2);
        let cert = verify_domination(&f, &spec, dims(), &construction_grid(1.0)).unwrap();
        assert!(cert.verdict && cert.trivial);
        assert!(cert.grid.iter().all(|(_, d)| *d == 0.0));
    }

    #[test]
    fn unbounded_phi_has_no_dominator() {
        let f = phi(PhiSpec::Linear { alpha: 0.5 });
        let prof = tail_profile(&f, dims(), &profile_grid()).unwrap();
        assert!(matches!(
            construct_dominator(&f, dims(), 1.5, &prof),
            Err(Error::ConstructionFailed(_))
        ));
    }

    #[test]
    fn gg_witnesses() {
        let f = phi(PhiSpec::Zero);
        let search = log_grid(1e-4, 1e4, 400);

        let neg = FnShrinkage::new("-0.1", |_| -0.1, |_| 0.0);
        let w = lemma_gg_witness(&f, &neg, dims(), &search).expect("witness");
        assert!(crate::sure::delta(&f, &neg, w, dims()).unwrap() < 0.0);

        let lin = FnShrinkage::new("w", |w: f64| w, |_| 1.0);
        assert_eq!(lemma_gg_witness(&f, &lin, dims(), &search), None);

        let hat = FnShrinkage::new(
            "max(0,1-w)",
            |w: f64| (1.0 - w).max(0.0),
            |w: f64| if w < 1.0 { -1.0 } else { 0.0 },
        );
        let w = lemma_gg_witness(&f, &hat, dims(), &search).expect("witness");
        assert!(w > 0.9 && w < 1.0, "{w}");
        assert!(crate::sure::delta(&f, &hat, w, dims()).unwrap() < 0.0);
    }

    #[test]
    fn cc0_examples() {
        let grid = log_grid(1.0, 1e12, 241);
        let r = cc0_diagnostic(&phi(PhiSpec::PositivePartJs { a: 0.375 }), dims(), &grid).unwrap();
        assert!(!r.violation && (r.log_slope + 1.0).abs() < 1e-9);
        let r = cc0_diagnostic(&phi(PhiSpec::Linear { alpha: 0.0 }), dims(), &grid).unwrap();
        assert!(!r.violation && (r.log_slope + 0.5).abs() < 1e-9);
        let sq = FnShrinkage::new("w^2", |w: f64| w * w, |w: f64| 2.0 * w);
        let r = cc0_diagnostic(&sq, dims(), &grid).unwrap();
        assert!(r.violation && (r.liminf_proxy - 1.0).abs() < 1e-9);
        let r = cc0_diagnostic(&phi(PhiSpec::Zero), dims(), &grid).unwrap();
        assert!(!r.violation && r.liminf_proxy == 0.0);
    }
}
