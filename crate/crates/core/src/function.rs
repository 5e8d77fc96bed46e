//! Real functions on ℝ: the [`RealFn`] evaluation trait and the fixed
//! catalogue of test functions used by the batteries and the CLI.

use crate::error::{Error, Result};
use crate::hermite::{QuadratureRule, SpectralFn};

/// A pointwise-evaluable function on ℝ.
pub trait RealFn: Sync {
    fn eval(&self, x: f64) -> f64;
}

impl RealFn for SpectralFn {
    fn eval(&self, x: f64) -> f64 {
        SpectralFn::eval(self, x)
    }
}

impl<F> RealFn for F
where
    F: Fn(f64) -> f64 + Sync,
{
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Floor of the bump preset. Keeps the surrogate for a compactly supported
/// bump strictly positive.
pub const BUMP_FLOOR: f64 = 1e-6;

/// Versioned catalogue of test functions. Changing a default here changes
/// every number produced by the batteries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `value`
    Const { value: f64 },
    /// `intercept + slope·x`; not positive on all of ℝ unless `slope = 0`.
    Affine { intercept: f64, slope: f64 },
    /// `c0 + c1·x + c2·x²`
    Quadratic { c0: f64, c1: f64, c2: f64 },
    /// `floor + (1 - floor)·exp(-(x - center)² / (2 width²))`
    Bump { center: f64, width: f64, floor: f64 },
    /// `exp(rate·x)`
    Exp { rate: f64 },
}

pub const CATALOGUE_VERSION: u32 = 1;

impl Preset {
    pub fn constant() -> Self {
        Preset::Const { value: 1.0 }
    }

    pub fn affine() -> Self {
        Preset::Affine {
            intercept: 2.0,
            slope: 1.0,
        }
    }

    /// `1 + x²/4`
    pub fn quadratic() -> Self {
        Preset::Quadratic {
            c0: 1.0,
            c1: 0.0,
            c2: 0.25,
        }
    }

    /// `2 + x/2 + x²/4`, a non-symmetric positive polynomial.
    pub fn shifted_quadratic() -> Self {
        Preset::Quadratic {
            c0: 2.0,
            c1: 0.5,
            c2: 0.25,
        }
    }

    pub fn bump() -> Self {
        Preset::Bump {
            center: 0.0,
            width: 1.0,
            floor: BUMP_FLOOR,
        }
    }

    pub fn exp(rate: f64) -> Self {
        Preset::Exp { rate }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Const { .. } => "const",
            Preset::Affine { .. } => "affine",
            Preset::Quadratic { .. } => "quadratic",
            Preset::Bump { .. } => "bump",
            Preset::Exp { .. } => "exp",
        }
    }

    /// Parameter names and values, in a fixed order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Preset::Const { value } => vec![("value", value)],
            Preset::Affine { intercept, slope } => vec![("intercept", intercept), ("slope", slope)],
            Preset::Quadratic { c0, c1, c2 } => vec![("c0", c0), ("c1", c1), ("c2", c2)],
            Preset::Bump {
                center,
                width,
                floor,
            } => vec![("center", center), ("width", width), ("floor", floor)],
            Preset::Exp { rate } => vec![("a", rate)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Preset::Bump { width, floor, .. } => {
                if !(width > 0.0) {
                    return Err(Error::parameter("width", "bump width must be positive"));
                }
                if !(floor > 0.0 && floor < 1.0) {
                    return Err(Error::parameter("floor", "bump floor must lie in (0, 1)"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Whether the function is strictly positive on all of ℝ.
    pub fn is_positive(&self) -> bool {
        match *self {
            Preset::Const { value } => value > 0.0,
            Preset::Affine { intercept, slope } => slope == 0.0 && intercept > 0.0,
            Preset::Quadratic { c0, c1, c2 } => {
                (c2 > 0.0 && c1 * c1 < 4.0 * c0 * c2) || (c2 == 0.0 && c1 == 0.0 && c0 > 0.0)
            }
            Preset::Bump { floor, .. } => floor > 0.0,
            Preset::Exp { .. } => true,
        }
    }

    /// Exact Hermite coefficients for the polynomial presets.
    pub fn polynomial(&self) -> Option<SpectralFn> {
        match *self {
            Preset::Const { value } => Some(SpectralFn::constant(value)),
            Preset::Affine { intercept, slope } => Some(SpectralFn::new(vec![intercept, slope])),
            // x² = h_0 + √2 h_2
            Preset::Quadratic { c0, c1, c2 } => Some(SpectralFn::new(vec![
                c0 + c2,
                c1,
                std::f64::consts::SQRT_2 * c2,
            ])),
            _ => None,
        }
    }

    /// Spectral representation: exact for polynomial presets, otherwise the
    /// projection onto `h_0..=degree` computed on `rule`.
    pub fn to_spectral(&self, rule: &QuadratureRule, degree: usize) -> Result<SpectralFn> {
        match self.polynomial() {
            Some(f) => Ok(f),
            None => SpectralFn::from_fn(|x| RealFn::eval(self, x), rule, degree),
        }
    }
}

impl RealFn for Preset {
    fn eval(&self, x: f64) -> f64 {
        match *self {
            Preset::Const { value } => value,
            Preset::Affine { intercept, slope } => intercept + slope * x,
            Preset::Quadratic { c0, c1, c2 } => c0 + x * (c1 + c2 * x),
            Preset::Bump {
                center,
                width,
                floor,
            } => {
                let z = (x - center) / width;
                floor + (1.0 - floor) * (-0.5 * z * z).exp()
            }
            Preset::Exp { rate } => (rate * x).exp(),
        }
    }
}

/// The strictly positive functions used by the monotonicity and
/// hypercontractivity batteries.
pub fn positive_battery() -> Vec<Preset> {
    vec![
        Preset::constant(),
        Preset::quadratic(),
        Preset::shifted_quadratic(),
        Preset::bump(),
        Preset::exp(0.5),
    ]
}
