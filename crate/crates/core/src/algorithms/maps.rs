use serde::{Deserialize, Serialize};

/// Built-in scalar maps used as regression functions, gradients and
/// contractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum MapSpec {
    /// `k x + c`
    Linear { k: f64, c: f64 },
    /// `curv (x − θ)² / 2`
    Quadratic {
        curv: f64,
        #[serde(default)]
        theta: f64,
    },
    /// `−scale (x − center)²`
    NegQuadratic {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        center: f64,
    },
    /// `scale · tanh(slope (x − center))`
    Saturating {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        slope: f64,
        #[serde(default)]
        center: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// Share of the saturating map's range on which its inverse is trusted.
const SATURATING_INVERSE_SHARE: f64 = 0.99;

impl MapSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            MapSpec::Linear { k, c } => k * x + c,
            MapSpec::Quadratic { curv, theta } => 0.5 * curv * (x - theta) * (x - theta),
            MapSpec::NegQuadratic { scale, center } => -scale * (x - center) * (x - center),
            MapSpec::Saturating {
                scale,
                slope,
                center,
            } => scale * (slope * (x - center)).tanh(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            MapSpec::Linear { k, .. } => k,
            MapSpec::Quadratic { curv, theta } => curv * (x - theta),
            MapSpec::NegQuadratic { scale, center } => -2.0 * scale * (x - center),
            MapSpec::Saturating {
                scale,
                slope,
                center,
            } => {
                let t = (slope * (x - center)).tanh();
                scale * slope * (1.0 - t * t)
            }
        }
    }

    /// Inverse on the interval returned by [`MapSpec::inverse_domain`].
    pub fn inverse(&self, y: f64) -> Option<f64> {
        match *self {
            MapSpec::Linear { k, c } if k != 0.0 => Some((y - c) / k),
            MapSpec::Saturating {
                scale,
                slope,
                center,
            } if scale != 0.0 && slope != 0.0 => {
                let r = y / scale;
                (r.abs() < 1.0).then(|| center + r.atanh() / slope)
            }
            _ => None,
        }
    }

    pub fn inverse_domain(&self) -> Option<(f64, f64)> {
        match *self {
            MapSpec::Linear { k, .. } if k != 0.0 => Some((f64::NEG_INFINITY, f64::INFINITY)),
            MapSpec::Saturating { scale, slope, .. } if scale != 0.0 && slope != 0.0 => {
                let r = SATURATING_INVERSE_SHARE * scale.abs();
                Some((-r, r))
            }
            _ => None,
        }
    }

    /// `(A, B)` with `|f(x)| ≤ A|x| + B`, when such constants exist.
    pub fn linear_bound(&self) -> Option<(f64, f64)> {
        match *self {
            MapSpec::Linear { k, c } => Some((k.abs(), c.abs())),
            MapSpec::Saturating { scale, .. } => Some((0.0, scale.abs())),
            MapSpec::Quadratic { curv: 0.0, .. } => Some((0.0, 0.0)),
            MapSpec::NegQuadratic { scale: 0.0, .. } => Some((0.0, 0.0)),
            _ => None,
        }
    }

    /// Global Lipschitz constant, when finite.
    pub fn lipschitz(&self) -> Option<f64> {
        match *self {
            MapSpec::Linear { k, .. } => Some(k.abs()),
            MapSpec::Saturating { scale, slope, .. } => Some((scale * slope).abs()),
            MapSpec::Quadratic { curv: 0.0, .. } => Some(0.0),
            MapSpec::NegQuadratic { scale: 0.0, .. } => Some(0.0),
            _ => None,
        }
    }
}
