//! Archimedean spiral search paths.
//!
//! The spiral is `r = b * theta` with `b = altitude / pi`, so successive
//! loops are `2 * altitude` apart. With a 45 degree perception cone the
//! detection radius equals the altitude, and adjacent loops just touch.

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::simworld::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct Waypoint<S: Scalar> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Scalar> Waypoint<S> {
    pub fn horizontal(&self) -> Point2<S> {
        Point2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpiralError {
    #[error("spiral altitude must be positive (got {0})")]
    Altitude(f64),
    #[error("waypoint spacing must be positive (got {0})")]
    Spacing(f64),
}

/// Spiral from `center` outward to `radius_limit`, waypoints at most
/// `spacing` apart along the arc.
pub fn spiral_waypoints<S: Scalar>(
    center: Point2<S>,
    altitude: S,
    radius_limit: S,
    spacing: S,
) -> Result<Vec<Waypoint<S>>, SpiralError> {
    spiral_through(center, center, altitude, radius_limit, spacing)
}

/// Spiral about `center` that starts at `start`: the pitch is set by
/// `altitude` and the phase is chosen so that the curve passes through
/// `start`, continuing outward from its radius.
pub fn spiral_through<S: Scalar>(
    center: Point2<S>,
    start: Point2<S>,
    altitude: S,
    radius_limit: S,
    spacing: S,
) -> Result<Vec<Waypoint<S>>, SpiralError> {
    if !(altitude > S::zero()) {
        return Err(SpiralError::Altitude(altitude.as_f64()));
    }
    if !(spacing > S::zero()) {
        return Err(SpiralError::Spacing(spacing.as_f64()));
    }
    let b = altitude / S::PI();
    let r0 = start.distance(&center);
    let mut theta = r0 / b;
    let phase = if r0 > S::zero() {
        (start.y - center.y).atan2(start.x - center.x) - theta
    } else {
        S::zero()
    };

    let mut points = vec![Waypoint {
        x: start.x,
        y: start.y,
        z: altitude,
    }];
    loop {
        let r = b * theta;
        // Radius after one step is at most r + spacing, which bounds the arc.
        let reach = r + spacing;
        theta += spacing / (reach * reach + b * b).sqrt();
        let r = b * theta;
        if r > radius_limit {
            break;
        }
        let angle = theta + phase;
        points.push(Waypoint {
            x: center.x + r * angle.cos(),
            y: center.y + r * angle.sin(),
            z: altitude,
        });
    }
    Ok(points)
}

/// Horizontal polyline length of a waypoint list.
pub fn path_length<S: Scalar>(points: &[Waypoint<S>]) -> S {
    points
        .windows(2)
        .fold(S::zero(), |acc, w| acc + w[0].horizontal().distance(&w[1].horizontal()))
}
