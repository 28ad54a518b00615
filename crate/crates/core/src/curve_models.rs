//! Parametric learning-curve families and their least-squares fits.
//!
//! Every family is fitted by closed-form ordinary least squares after a
//! transformation that makes it linear in two parameters:
//!
//! | family       | formula              | regression                 |
//! |--------------|----------------------|----------------------------|
//! | Linear       | `a*x + b`            | `y` on `x`                 |
//! | Power        | `a * x^b`            | `ln y` on `ln x`           |
//! | Logarithmic  | `a*ln(x) + b`        | `y` on `ln x`              |
//! | Exponential  | `a * 10^(b*x)`       | `log10 y` on `x`           |
//! | WeissTian    | `a + b*x/(x+1)`      | `y` on `x/(x+1)`           |
//!
//! The reported `sse` is always measured against the untransformed `y`
//! values so fits of different families can be compared directly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Floor applied to non-positive `y` before taking logarithms.
pub const Y_CLAMP_FLOOR: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("need at least 2 points to fit, got {0}")]
    InsufficientPoints(usize),
    #[error("all transformed x values are identical; no unique least-squares solution")]
    DegenerateDesign,
    #[error("training percent must be positive, got {0}")]
    NonPositiveX(f64),
    #[error("non-finite point ({x}, {y})")]
    NonFinite { x: f64, y: f64 },
}

/// One observation on a learning curve: training percent and metric value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
}

impl CurvePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveFamily {
    Linear,
    Power,
    Logarithmic,
    Exponential,
    WeissTian,
}

impl CurveFamily {
    /// All families, in the fixed order used by [`fit_all`].
    pub const ALL: [CurveFamily; 5] = [
        CurveFamily::Linear,
        CurveFamily::Power,
        CurveFamily::Logarithmic,
        CurveFamily::Exponential,
        CurveFamily::WeissTian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CurveFamily::Linear => "linear",
            CurveFamily::Power => "power",
            CurveFamily::Logarithmic => "logarithmic",
            CurveFamily::Exponential => "exponential",
            CurveFamily::WeissTian => "weiss_tian",
        }
    }

    /// Families whose linearization takes the logarithm of `y`.
    pub fn transforms_y(self) -> bool {
        matches!(self, CurveFamily::Power | CurveFamily::Exponential)
    }

    /// Evaluates the family formula. No domain checks.
    fn formula(self, a: f64, b: f64, x: f64) -> f64 {
        match self {
            CurveFamily::Linear => a * x + b,
            CurveFamily::Power => a * x.powf(b),
            CurveFamily::Logarithmic => a * x.ln() + b,
            CurveFamily::Exponential => a * 10f64.powf(b * x),
            CurveFamily::WeissTian => a + b * x / (x + 1.0),
        }
    }

    fn transform_x(self, x: f64) -> f64 {
        match self {
            CurveFamily::Linear | CurveFamily::Exponential => x,
            CurveFamily::Power | CurveFamily::Logarithmic => x.ln(),
            CurveFamily::WeissTian => x / (x + 1.0),
        }
    }

    fn transform_y(self, y: f64) -> f64 {
        match self {
            CurveFamily::Power => y.ln(),
            CurveFamily::Exponential => y.log10(),
            _ => y,
        }
    }

    /// Maps (a, b) to (slope, intercept) of the linearized regression.
    fn to_linear(self, a: f64, b: f64) -> (f64, f64) {
        match self {
            CurveFamily::Linear | CurveFamily::Logarithmic => (a, b),
            CurveFamily::Power => (b, a.ln()),
            CurveFamily::Exponential => (b, a.log10()),
            CurveFamily::WeissTian => (b, a),
        }
    }

    /// Inverse of [`Self::to_linear`].
    fn from_linear(self, slope: f64, intercept: f64) -> (f64, f64) {
        match self {
            CurveFamily::Linear | CurveFamily::Logarithmic => (slope, intercept),
            CurveFamily::Power => (intercept.exp(), slope),
            CurveFamily::Exponential => (10f64.powf(intercept), slope),
            CurveFamily::WeissTian => (intercept, slope),
        }
    }
}

impl fmt::Display for CurveFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CurveFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "linear" => Ok(CurveFamily::Linear),
            "power" => Ok(CurveFamily::Power),
            "logarithmic" | "log" => Ok(CurveFamily::Logarithmic),
            "exponential" | "exp" => Ok(CurveFamily::Exponential),
            "weiss_tian" | "weisstian" => Ok(CurveFamily::WeissTian),
            other => Err(format!("unknown curve family `{other}`")),
        }
    }
}

/// A fitted curve family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFit {
    pub family: CurveFamily,
    pub a: f64,
    pub b: f64,
    /// Sum of squared residuals in the original y-space.
    pub sse: f64,
    pub num_points: usize,
    /// Set when at least one `y` was raised to [`Y_CLAMP_FLOOR`] before a log transform.
    pub clamped: bool,
}

impl CurveFit {
    pub fn predict(&self, x: f64) -> Result<f64, CurveError> {
        predict(self, x)
    }
}

fn check_points(points: &[CurvePoint]) -> Result<(), CurveError> {
    if points.len() < 2 {
        return Err(CurveError::InsufficientPoints(points.len()));
    }
    for p in points {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(CurveError::NonFinite { x: p.x, y: p.y });
        }
        if p.x <= 0.0 {
            return Err(CurveError::NonPositiveX(p.x));
        }
    }
    Ok(())
}

/// Closed-form simple linear regression on centered sums. Returns (slope, intercept).
fn ols(u: &[f64], v: &[f64]) -> Result<(f64, f64), CurveError> {
    let n = u.len() as f64;
    let mean_u = u.iter().sum::<f64>() / n;
    let mean_v = v.iter().sum::<f64>() / n;
    let (mut suu, mut suv) = (0.0, 0.0);
    for (&ui, &vi) in u.iter().zip(v) {
        let du = ui - mean_u;
        suu += du * du;
        suv += du * (vi - mean_v);
    }
    if suu == 0.0 || u.iter().all(|&ui| ui == u[0]) {
        return Err(CurveError::DegenerateDesign);
    }
    let slope = suv / suu;
    Ok((slope, mean_v - slope * mean_u))
}

fn linearized_y(family: CurveFamily, y: f64) -> (f64, bool) {
    if family.transforms_y() && y <= 0.0 {
        (family.transform_y(Y_CLAMP_FLOOR), true)
    } else {
        (family.transform_y(y), false)
    }
}

/// Fits `family` to `points` by least squares in the family's linearized space.
pub fn fit(points: &[CurvePoint], family: CurveFamily) -> Result<CurveFit, CurveError> {
    check_points(points)?;
    let u: Vec<f64> = points.iter().map(|p| family.transform_x(p.x)).collect();
    let mut clamped = false;
    let v: Vec<f64> = points
        .iter()
        .map(|p| {
            let (ty, c) = linearized_y(family, p.y);
            clamped |= c;
            ty
        })
        .collect();
    let (slope, intercept) = ols(&u, &v)?;
    let (a, b) = family.from_linear(slope, intercept);
    let sse = points
        .iter()
        .map(|p| {
            let r = family.formula(a, b, p.x) - p.y;
            r * r
        })
        .sum();
    Ok(CurveFit {
        family,
        a,
        b,
        sse,
        num_points: points.len(),
        clamped,
    })
}

/// Evaluates a fitted curve at training percent `x`.
pub fn predict(fit: &CurveFit, x: f64) -> Result<f64, CurveError> {
    if !(x > 0.0) {
        return Err(CurveError::NonPositiveX(x));
    }
    Ok(fit.family.formula(fit.a, fit.b, x))
}

/// Fits every family; a failing family does not abort the others.
pub fn fit_all(points: &[CurvePoint]) -> Vec<(CurveFamily, Result<CurveFit, CurveError>)> {
    CurveFamily::ALL
        .iter()
        .map(|&family| (family, fit(points, family)))
        .collect()
}

/// Sum of squared residuals of coefficients `(a, b)` measured in the
/// linearized space that [`fit`] minimizes (with the same `y` clamping).
///
/// Returns `+inf` when `(a, b)` falls outside the family's domain, e.g. a
/// non-positive `a` for the families that take `ln a`.
pub fn linearized_sse(family: CurveFamily, a: f64, b: f64, points: &[CurvePoint]) -> f64 {
    if family.transforms_y() && a <= 0.0 {
        return f64::INFINITY;
    }
    let (slope, intercept) = family.to_linear(a, b);
    points
        .iter()
        .map(|p| {
            let r = slope * family.transform_x(p.x) + intercept - linearized_y(family, p.y).0;
            r * r
        })
        .sum()
}
