use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Point2<S: Scalar> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point2<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2<S>) -> S {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &Point2<S>, u: S) -> Point2<S> {
        Point2::new(self.x + (other.x - self.x) * u, self.y + (other.y - self.y) * u)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("a pipeline needs at least two points")]
    TooShort,
    #[error("consecutive pipeline points {0} and {1} coincide")]
    Degenerate(usize, usize),
}

/// Closest point of a polyline to a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection<S: Scalar> {
    pub point: Point2<S>,
    /// Arclength from the first vertex to `point`.
    pub arclength: S,
    pub distance: S,
}

/// Seabed pipeline as an open polyline.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct Pipeline<S: Scalar> {
    points: Vec<Point2<S>>,
    total_length: S,
}

impl<S: Scalar> Pipeline<S> {
    pub fn new(points: Vec<Point2<S>>) -> Result<Self, PipelineError> {
        if points.len() < 2 {
            return Err(PipelineError::TooShort);
        }
        if let Some(i) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(PipelineError::Degenerate(i, i + 1));
        }
        let total_length = points
            .windows(2)
            .fold(S::zero(), |acc, w| acc + w[0].distance(&w[1]));
        Ok(Self { points, total_length })
    }

    /// Straight pipeline from the origin along +x.
    pub fn straight(length: S) -> Result<Self, PipelineError> {
        Self::new(vec![Point2::new(S::zero(), S::zero()), Point2::new(length, S::zero())])
    }

    pub fn points(&self) -> &[Point2<S>] {
        &self.points
    }

    pub fn total_length(&self) -> S {
        self.total_length
    }

    pub fn nearest(&self, p: &Point2<S>) -> Projection<S> {
        let mut best: Option<Projection<S>> = None;
        let mut offset = S::zero();
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len2 = dx * dx + dy * dy;
            let u = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).max(S::zero()).min(S::one());
            let point = a.lerp(&b, u);
            let distance = point.distance(p);
            let seg_len = len2.sqrt();
            if best.is_none_or(|q| distance < q.distance) {
                best = Some(Projection {
                    point,
                    arclength: offset + u * seg_len,
                    distance,
                });
            }
            offset += seg_len;
        }
        best.expect("pipeline has at least one segment")
    }

    /// Point at arclength `s`, clamped to the polyline.
    pub fn point_at(&self, s: S) -> Point2<S> {
        let mut remaining = s.max(S::zero());
        for w in self.points.windows(2) {
            let seg = w[0].distance(&w[1]);
            if remaining <= seg {
                return w[0].lerp(&w[1], remaining / seg);
            }
            remaining -= seg;
        }
        *self.points.last().expect("non-empty")
    }
}
