//! Fermat–Torricelli point (geometric median) of a finite set of 3-vectors.
//!
//! [`ft_point`] runs the Weiszfeld fixed-point iteration. Anchor points are
//! tested for optimality before iterating (a point of multiplicity `w` is the
//! median iff the unit vectors towards the other points sum to a vector of
//! length at most `w`). When an iterate lands on a non-optimal anchor the
//! Vardi–Zhang modified step moves it off instead of dividing by zero.
//! Away from the anchors each iteration also tries a Newton step and keeps
//! whichever candidate has the smaller total distance, which restores fast
//! convergence when the median lies very close to an anchor.

use alloc::vec::Vec;

use crate::{Error, Result, Vec3};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Iterates closer than this multiple of `tol` to an anchor are treated as
/// sitting on it.
const ANCHOR_RADIUS: f64 = 10.0;

/// At least three finite points.
#[derive(Clone, Debug, PartialEq)]
pub struct FtProblem {
    points: Vec<Vec3>,
}

impl FtProblem {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::TooFewPoints { got: points.len() });
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite { what: "point" });
        }
        Ok(FtProblem { points })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FtResult {
    pub point: Vec3,
    pub total_distance: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Index of the anchor point returned as the median, if any.
    pub at_vertex: Option<usize>,
}

/// Sum of Euclidean distances from `v` to every point.
pub fn total_distance(points: &[Vec3], v: Vec3) -> f64 {
    points.iter().map(|p| p.distance(v)).sum()
}

/// Geometric median by Weiszfeld iteration with vertex handling.
///
/// Non-convergence is not an error: the best iterate is returned with
/// `converged = false`.
pub fn ft_point(prob: &FtProblem, tol: f64, max_iter: usize) -> FtResult {
    weiszfeld(&prob.points, tol, max_iter)
}

/// Resultant of the unit vectors from `y` towards the points farther than
/// `radius`, and the number of points within `radius`.
fn pull(points: &[Vec3], y: Vec3, radius: f64) -> (Vec3, usize) {
    let mut resultant = Vec3::ZERO;
    let mut coincident = 0;
    for &p in points {
        let d = p.distance(y);
        if d <= radius {
            coincident += 1;
        } else {
            resultant += (p - y) / d;
        }
    }
    (resultant, coincident)
}

/// `y + H^-1 r` with `H = sum (I - u u^T) / |p - y|` the Hessian of the
/// total distance and `r` the resultant, or `None` when `H` is singular.
fn newton_step(points: &[Vec3], y: Vec3, resultant: Vec3) -> Option<Vec3> {
    let mut h = [[0.0f64; 3]; 3];
    for &p in points {
        let diff = p - y;
        let d = diff.norm();
        let u = diff.to_array().map(|c| c / d);
        for (i, row) in h.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let id = if i == j { 1.0 } else { 0.0 };
                *cell += (id - u[i] * u[j]) / d;
            }
        }
    }
    let col = |j: usize| Vec3::new(h[0][j], h[1][j], h[2][j]);
    let (c0, c1, c2) = (col(0), col(1), col(2));
    let det = c0.triple(c1, c2);
    let scale = c0.norm() * c1.norm() * c2.norm();
    if det.is_nan() || det.abs() <= 1e-12 * scale {
        return None;
    }
    let delta = Vec3::new(resultant.triple(c1, c2), c0.triple(resultant, c2), c0.triple(c1, resultant)) / det;
    Some(y + delta)
}

pub(crate) fn weiszfeld(points: &[Vec3], tol: f64, max_iter: usize) -> FtResult {
    debug_assert!(tol > 0.0 && max_iter >= 1);
    let radius = ANCHOR_RADIUS * tol;

    for (j, &p) in points.iter().enumerate() {
        let (r, w) = pull(points, p, radius);
        if r.norm() <= w as f64 {
            return FtResult {
                point: p,
                total_distance: total_distance(points, p),
                iterations: 0,
                converged: true,
                at_vertex: Some(j),
            };
        }
    }

    let mut y = points.iter().copied().sum::<Vec3>() / points.len() as f64;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut num = Vec3::ZERO;
        let mut den = 0.0;
        let mut resultant = Vec3::ZERO;
        let mut coincident = 0usize;
        for &p in points {
            let d = p.distance(y);
            if d <= radius {
                coincident += 1;
            } else {
                let w = 1.0 / d;
                num += p * w;
                den += w;
                resultant += (p - y) * w;
            }
        }
        if den == 0.0 {
            converged = true;
            break;
        }
        let target = num / den;
        let next = if coincident == 0 {
            match newton_step(points, y, resultant) {
                Some(n) if total_distance(points, n) < total_distance(points, target) => n,
                _ => target,
            }
        } else {
            let r = resultant.norm();
            let eta = coincident as f64;
            if r <= eta {
                converged = true;
                break;
            }
            let t = eta / r;
            target * (1.0 - t) + y * t
        };
        let step = next.distance(y);
        y = next;
        if step < tol {
            converged = true;
            break;
        }
    }

    FtResult { point: y, total_distance: total_distance(points, y), iterations, converged, at_vertex: None }
}

/// Brute-force median: coarse-to-fine grid search around the centroid.
///
/// Each level evaluates a `GRID^3` lattice spanning `[-h, h]^3` around the
/// current centre, moves to the best node and shrinks `h` by 4. `span` is the
/// initial half-width.
pub fn ft_point_oracle(prob: &FtProblem, span: f64, levels: usize) -> Vec3 {
    const GRID: usize = 21;
    let points = prob.points();
    let mut centre = points.iter().copied().sum::<Vec3>() / points.len() as f64;
    let mut best = total_distance(points, centre);
    let mut half = span;
    for _ in 0..levels {
        let step = 2.0 * half / (GRID - 1) as f64;
        let origin = centre - Vec3::new(half, half, half);
        let mut level_best = (best, centre);
        for i in 0..GRID {
            for j in 0..GRID {
                for k in 0..GRID {
                    let v = origin + Vec3::new(i as f64, j as f64, k as f64) * step;
                    let d = total_distance(points, v);
                    if d < level_best.0 {
                        level_best = (d, v);
                    }
                }
            }
        }
        (best, centre) = level_best;
        half /= 4.0;
    }
    centre
}
