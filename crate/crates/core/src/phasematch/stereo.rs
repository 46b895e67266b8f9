use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::direction::Direction;
use crate::error::{Error, Result};

/// Coordinates on the (e1, e3) projection plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StereoPoint {
    pub u: f64,
    pub v: f64,
}

/// Stereographic projection from the pole −e2 onto the (e1, e3) plane; e2 maps to the origin.
pub fn stereographic_project(direction: &Direction) -> Result<StereoPoint> {
    let d = direction.vector();
    let denom = 1.0 + d.y;
    if denom < 1e-12 {
        return Err(Error::ProjectionPole);
    }
    Ok(StereoPoint { u: d.x / denom, v: d.z / denom })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleFit {
    pub center: StereoPoint,
    pub radius: f64,
    /// Largest |distance − radius| over the fitted points.
    pub max_residual: f64,
}

/// Algebraic least-squares circle through projected points.
pub fn fit_circle(points: &[StereoPoint]) -> Option<CircleFit> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len();
    let a = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => points[i].u,
        1 => points[i].v,
        _ => 1.0,
    });
    let b = DVector::from_fn(n, |i, _| points[i].u.powi(2) + points[i].v.powi(2));
    let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
    let (cu, cv) = (0.5 * sol[0], 0.5 * sol[1]);
    let radius = (sol[2] + cu * cu + cv * cv).sqrt();
    let max_residual = points.iter().map(|p| ((p.u - cu).hypot(p.v - cv) - radius).abs()).fold(0.0, f64::max);
    Some(CircleFit { center: StereoPoint { u: cu, v: cv }, radius, max_residual })
}
