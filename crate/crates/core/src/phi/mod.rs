//! Shrinkage functions `phi` for estimators `(1 - phi(W)/W) X`.

pub mod gb;
pub mod quadrature;
pub mod table;
pub mod tail;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::sure::ProblemDims;
use crate::{Error, Result};

pub use gb::GbPhi;
pub use quadrature::QuadratureConfig;
pub use table::GbTable;
pub use tail::{tail_profile, PhiLimit, TailProfile};

/// An evaluatable shrinkage function with its derivative.
///
/// Implementations are pure: the same `w` always gives the same value.
/// Derivatives are right derivatives at kinks.
pub trait Shrinkage: Send + Sync {
    fn eval(&self, w: f64) -> Result<f64>;

    fn deriv(&self, w: f64) -> Result<f64>;

    fn eval_with_deriv(&self, w: f64) -> Result<(f64, f64)> {
        Ok((self.eval(w)?, self.deriv(w)?))
    }

    fn label(&self) -> String;
}

impl<T: Shrinkage + ?Sized> Shrinkage for &T {
    fn eval(&self, w: f64) -> Result<f64> {
        (**self).eval(w)
    }
    fn deriv(&self, w: f64) -> Result<f64> {
        (**self).deriv(w)
    }
    fn eval_with_deriv(&self, w: f64) -> Result<(f64, f64)> {
        (**self).eval_with_deriv(w)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

impl<T: Shrinkage + ?Sized> Shrinkage for Arc<T> {
    fn eval(&self, w: f64) -> Result<f64> {
        (**self).eval(w)
    }
    fn deriv(&self, w: f64) -> Result<f64> {
        (**self).deriv(w)
    }
    fn eval_with_deriv(&self, w: f64) -> Result<(f64, f64)> {
        (**self).eval_with_deriv(w)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

/// Shrinkage function given by a pair of closures.
pub struct FnShrinkage<F, D> {
    label: String,
    value: F,
    deriv: D,
}

impl<F, D> FnShrinkage<F, D>
where
    F: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
{
    pub fn new(label: impl Into<String>, value: F, deriv: D) -> Self {
        Self {
            label: label.into(),
            value,
            deriv,
        }
    }
}

impl<F, D> Shrinkage for FnShrinkage<F, D>
where
    F: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
{
    fn eval(&self, w: f64) -> Result<f64> {
        Ok((self.value)(w))
    }
    fn deriv(&self, w: f64) -> Result<f64> {
        Ok((self.deriv)(w))
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// `phi + g`.
pub struct Sum<A, B>(pub A, pub B);

impl<A: Shrinkage, B: Shrinkage> Shrinkage for Sum<A, B> {
    fn eval(&self, w: f64) -> Result<f64> {
        Ok(self.0.eval(w)? + self.1.eval(w)?)
    }
    fn deriv(&self, w: f64) -> Result<f64> {
        Ok(self.0.deriv(w)? + self.1.deriv(w)?)
    }
    fn eval_with_deriv(&self, w: f64) -> Result<(f64, f64)> {
        let (a, da) = self.0.eval_with_deriv(w)?;
        let (b, db) = self.1.eval_with_deriv(w)?;
        Ok((a + b, da + db))
    }
    fn label(&self) -> String {
        format!("{} + {}", self.0.label(), self.1.label())
    }
}

/// `-g`.
pub struct Negated<A>(pub A);

impl<A: Shrinkage> Shrinkage for Negated<A> {
    fn eval(&self, w: f64) -> Result<f64> {
        Ok(-self.0.eval(w)?)
    }
    fn deriv(&self, w: f64) -> Result<f64> {
        Ok(-self.0.deriv(w)?)
    }
    fn label(&self) -> String {
        format!("-({})", self.0.label())
    }
}

/// Parameterized shrinkage families, with a canonical text encoding
/// (`zero`, `linear:alpha=0.5`, `jsplus:a=0.375`, `boundary:b=1.0`,
/// `gb:a=-2.0,b=1.0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PhiSpec {
    /// The unbiased estimator `X` itself.
    Zero,
    /// `phi(w) = (1 - alpha) w`, i.e. `delta(X) = alpha X`.
    Linear { alpha: f64 },
    /// Positive-part James-Stein, `phi(w) = min(w, a)`.
    PositivePartJs { a: f64 },
    /// Sits exactly `b` units of `beta_star / log w` below `c_{p,n}` in the tail.
    Boundary { b: f64, w_floor: f64 },
    /// Generalized Bayes rule for the mixing density `lambda^a (log 1/lambda)^b`.
    GbUnknown { a: f64, b: f64 },
}

pub const DEFAULT_W_FLOOR: f64 = std::f64::consts::E * std::f64::consts::E;

impl PhiSpec {
    pub fn boundary(b: f64) -> Self {
        PhiSpec::Boundary {
            b,
            w_floor: DEFAULT_W_FLOOR,
        }
    }

    pub fn validate(&self, dims: ProblemDims) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            PhiSpec::Zero => Ok(()),
            PhiSpec::Linear { alpha } if !(0.0..=1.0).contains(&alpha) => {
                bad(format!("linear alpha must lie in [0,1], got {alpha}"))
            }
            PhiSpec::PositivePartJs { a } if !(a > 0.0 && a.is_finite()) => {
                bad(format!("jsplus a must be positive, got {a}"))
            }
            PhiSpec::Boundary { b, w_floor } if !(b > 0.0 && w_floor > 1.0) => bad(format!(
                "boundary needs b > 0 and w_floor > 1, got b={b}, w_floor={w_floor}"
            )),
            PhiSpec::GbUnknown { a, b } => {
                if !(f64::from(dims.p()) / 2.0 + a + 1.0 > 0.0) {
                    bad(format!(
                        "gb needs p/2 + a + 1 > 0, got p={}, a={a}",
                        dims.p()
                    ))
                } else if !(b >= 0.0 && b.is_finite()) {
                    bad(format!("gb needs b >= 0, got {b}"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}

impl fmt::Display for PhiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PhiSpec::Zero => write!(f, "zero"),
            PhiSpec::Linear { alpha } => write!(f, "linear:alpha={}", fmt_real(alpha)),
            PhiSpec::PositivePartJs { a } => write!(f, "jsplus:a={}", fmt_real(a)),
            PhiSpec::Boundary { b, w_floor } => {
                if w_floor == DEFAULT_W_FLOOR {
                    write!(f, "boundary:b={}", fmt_real(b))
                } else {
                    write!(
                        f,
                        "boundary:b={},w_floor={}",
                        fmt_real(b),
                        fmt_real(w_floor)
                    )
                }
            }
            PhiSpec::GbUnknown { a, b } => {
                write!(f, "gb:a={},b={}", fmt_real(a), fmt_real(b))
            }
        }
    }
}

impl FromStr for PhiSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let err = |reason: &str| Error::ParseSpec {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = input.trim();
        let (family, rest) = match trimmed.split_once(':') {
            Some((fam, rest)) => (fam, rest),
            None => (trimmed, ""),
        };
        let mut params: Vec<(&str, f64)> = Vec::new();
        for part in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| err("expected key=value"))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| err(&format!("{k}: not a number")))?;
            if !v.is_finite() {
                return Err(err(&format!("{k}: must be finite")));
            }
            params.push((k.trim(), v));
        }
        let mut take = |key: &str| -> Option<f64> {
            let pos = params.iter().position(|(k, _)| *k == key)?;
            Some(params.remove(pos).1)
        };
        let spec = match family {
            "zero" => PhiSpec::Zero,
            "linear" => PhiSpec::Linear {
                alpha: take("alpha").ok_or_else(|| err("missing alpha"))?,
            },
            "jsplus" => PhiSpec::PositivePartJs {
                a: take("a").ok_or_else(|| err("missing a"))?,
            },
            "boundary" => PhiSpec::Boundary {
                b: take("b").ok_or_else(|| err("missing b"))?,
                w_floor: take("w_floor").unwrap_or(DEFAULT_W_FLOOR),
            },
            "gb" => PhiSpec::GbUnknown {
                a: take("a").ok_or_else(|| err("missing a"))?,
                b: take("b").unwrap_or(0.0),
            },
            _ => return Err(err("unknown family")),
        };
        if let Some((k, _)) = params.first() {
            return Err(err(&format!("unexpected parameter {k}")));
        }
        Ok(spec)
    }
}

/// Smoothed tail boundary: `min(w, max(0, c - b beta / log(max(w, w_floor))))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPhi {
    pub b: f64,
    pub w_floor: f64,
    c_pn: f64,
    beta_star: f64,
}

impl BoundaryPhi {
    pub fn new(b: f64, w_floor: f64, dims: ProblemDims) -> Self {
        let k = dims.constants();
        Self {
            b,
            w_floor,
            c_pn: k.c_pn,
            beta_star: k.beta_star,
        }
    }

    fn inner(&self, w: f64) -> (f64, f64) {
        if w < self.w_floor {
            (self.c_pn - self.b * self.beta_star / self.w_floor.ln(), 0.0)
        } else {
            let lw = w.ln();
            (
                self.c_pn - self.b * self.beta_star / lw,
                self.b * self.beta_star / (w * lw * lw),
            )
        }
    }

    fn value_deriv(&self, w: f64) -> (f64, f64) {
        let (h, dh) = self.inner(w);
        if h <= 0.0 {
            (0.0, 0.0)
        } else if w < h {
            (w, 1.0)
        } else {
            (h, dh)
        }
    }
}

/// A concrete shrinkage function built from a [`PhiSpec`].
#[derive(Debug, Clone)]
pub enum Phi {
    Zero,
    Linear { alpha: f64 },
    PositivePartJs { a: f64 },
    Boundary(BoundaryPhi),
    Gb(GbPhi),
    GbTable(Arc<GbTable>),
}

impl Phi {
    /// Exact evaluation; generalized Bayes members run quadrature on every call.
    pub fn from_spec(spec: &PhiSpec, dims: ProblemDims, cfg: &QuadratureConfig) -> Result<Self> {
        spec.validate(dims)?;
        cfg.validate()?;
        Ok(match *spec {
            PhiSpec::Zero => Phi::Zero,
            PhiSpec::Linear { alpha } => Phi::Linear { alpha },
            PhiSpec::PositivePartJs { a } => Phi::PositivePartJs { a },
            PhiSpec::Boundary { b, w_floor } => Phi::Boundary(BoundaryPhi::new(b, w_floor, dims)),
            PhiSpec::GbUnknown { a, b } => Phi::Gb(GbPhi::new(a, b, dims, *cfg)?),
        })
    }

    /// Like [`Phi::from_spec`], but generalized Bayes members are replaced by
    /// a C^1 Hermite table so that per-sample evaluation is cheap.
    pub fn for_simulation(
        spec: &PhiSpec,
        dims: ProblemDims,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        match Phi::from_spec(spec, dims, cfg)? {
            Phi::Gb(gb) => Ok(Phi::GbTable(Arc::new(GbTable::build(gb)?))),
            other => Ok(other),
        }
    }
}

impl Shrinkage for Phi {
    fn eval(&self, w: f64) -> Result<f64> {
        match self {
            Phi::Gb(g) => g.value(w),
            Phi::GbTable(t) => t.eval(w),
            _ => Ok(self.eval_with_deriv(w)?.0),
        }
    }

    fn deriv(&self, w: f64) -> Result<f64> {
        match self {
            Phi::Gb(g) => Ok(g.value_and_deriv(w)?.1),
            _ => Ok(self.eval_with_deriv(w)?.1),
        }
    }

    fn eval_with_deriv(&self, w: f64) -> Result<(f64, f64)> {
        Ok(match self {
            Phi::Zero => (0.0, 0.0),
            Phi::Linear { alpha } => ((1.0 - alpha) * w, 1.0 - alpha),
            Phi::PositivePartJs { a } => {
                if w < *a {
                    (w, 1.0)
                } else {
                    (*a, 0.0)
                }
            }
            Phi::Boundary(bp) => bp.value_deriv(w),
            Phi::Gb(g) => g.value_and_deriv(w)?,
            Phi::GbTable(t) => t.eval_with_deriv(w)?,
        })
    }

    fn label(&self) -> String {
        match self {
            Phi::Zero => PhiSpec::Zero.to_string(),
            Phi::Linear { alpha } => PhiSpec::Linear { alpha: *alpha }.to_string(),
            Phi::PositivePartJs { a } => PhiSpec::PositivePartJs { a: *a }.to_string(),
            Phi::Boundary(bp) => PhiSpec::Boundary {
                b: bp.b,
                w_floor: bp.w_floor,
            }
            .to_string(),
            Phi::Gb(g) => g.spec().to_string(),
            Phi::GbTable(t) => format!("{} (tabulated)", t.source().spec()),
        }
    }
}
