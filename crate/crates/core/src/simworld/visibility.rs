use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VisibilityError {
    #[error("visibility bounds must satisfy 0 < min <= max (got min={min}, max={max})")]
    Bounds { min: f64, max: f64 },
    #[error("visibility period must be positive (got {0})")]
    Period(f64),
}

/// Sinusoidal water visibility, in meters of perceivable altitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct WaterVisibilityModel<S: Scalar> {
    pub min: S,
    pub max: S,
    pub period: S,
    /// Initial phase shift, radians.
    #[serde(default)]
    pub phase: S,
}

impl<S: Scalar> WaterVisibilityModel<S> {
    pub fn new(min: S, max: S, period: S, phase: S) -> Result<Self, VisibilityError> {
        let model = Self { min, max, period, phase };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), VisibilityError> {
        if !(self.min > S::zero() && self.min <= self.max) {
            return Err(VisibilityError::Bounds {
                min: self.min.as_f64(),
                max: self.max.as_f64(),
            });
        }
        if !(self.period > S::zero()) {
            return Err(VisibilityError::Period(self.period.as_f64()));
        }
        Ok(())
    }

    /// `mean + amplitude * sin(2 pi t / period + phase)`.
    pub fn at(&self, t: S) -> S {
        let two = S::lit(2.0);
        let mean = (self.min + self.max) / two;
        let amplitude = (self.max - self.min) / two;
        let angle = two * S::PI() * t / self.period + self.phase;
        let v = mean + amplitude * angle.sin();
        // Rounding in sin may overshoot the bounds by an ulp.
        v.max(self.min).min(self.max)
    }
}

/// Visibility source used by the world: the sine model, or a scripted
/// step profile of `(from_time, value)` breakpoints for controlled tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", rename_all = "snake_case")]
pub enum VisibilityProfile<S: Scalar> {
    Sine(WaterVisibilityModel<S>),
    Scripted(Vec<(S, S)>),
}

impl<S: Scalar> VisibilityProfile<S> {
    pub fn at(&self, t: S) -> S {
        match self {
            VisibilityProfile::Sine(m) => m.at(t),
            VisibilityProfile::Scripted(steps) => steps
                .iter()
                .take_while(|(from, _)| *from <= t)
                .last()
                .or(steps.first())
                .map_or(S::zero(), |(_, v)| *v),
        }
    }
}

impl<S: Scalar> From<WaterVisibilityModel<S>> for VisibilityProfile<S> {
    fn from(m: WaterVisibilityModel<S>) -> Self {
        VisibilityProfile::Sine(m)
    }
}
