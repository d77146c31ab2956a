//! Planar side of the morph machinery: straight-line triangulations in the
//! gnomonic chart, mean-value weight fitting, and the barycentric morph that
//! interpolates weights and re-solves the convex-combination system per
//! frame.
//!
//! A southern triangulation projects to the plane z = -1 with its everted
//! north face as the outer triangle; the projection reverses orientation, so
//! interior face triples are stored reversed to keep them counterclockwise.

use nalgebra::{DMatrix, Vector2};

use crate::sphere::{gnomonic_project, Vec3};
use crate::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Weights below this are clamped up before renormalizing, keeping every
/// dart weight strictly positive.
const WEIGHT_FLOOR: f64 = 1e-9;

fn orient(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// A straight-line triangulation of a triangle: three boundary vertices and
/// interior faces oriented counterclockwise.
#[derive(Debug, Clone)]
pub struct PlanarTriangulation {
    points: Vec<Vec2>,
    faces: Vec<[usize; 3]>,
    boundary: [usize; 3],
}

impl PlanarTriangulation {
    /// Builds from parts, checking that every face is counterclockwise.
    pub fn new(points: Vec<Vec2>, faces: Vec<[usize; 3]>, boundary: [usize; 3]) -> Result<Self> {
        for (fi, f) in faces.iter().enumerate() {
            if orient(&points[f[0]], &points[f[1]], &points[f[2]]) <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "planar face {fi} is not counterclockwise"
                )));
            }
        }
        Ok(Self {
            points,
            faces,
            boundary,
        })
    }

    /// Gnomonic image of a southern vertex set: face `outer` becomes the
    /// outer triangle and the remaining faces are reversed to
    /// counterclockwise.
    pub fn from_southern(
        vertices: &[Vec3],
        faces: &[[usize; 3]],
        outer: usize,
    ) -> Result<Self> {
        let points = vertices
            .iter()
            .map(|v| gnomonic_project(v).map(|[x, y]| Vec2::new(x, y)))
            .collect::<Result<Vec<_>>>()?;
        let interior = faces
            .iter()
            .enumerate()
            .filter(|&(fi, _)| fi != outer)
            .map(|(_, &[i, j, k])| [k, j, i])
            .collect();
        Self::new(points, interior, faces[outer])
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn boundary(&self) -> [usize; 3] {
        self.boundary
    }

    pub fn boundary_points(&self) -> [Vec2; 3] {
        self.boundary.map(|v| self.points[v])
    }

    fn is_boundary(&self, v: usize) -> bool {
        self.boundary.contains(&v)
    }

    /// Neighbor ring of every interior vertex in cyclic order, walked along
    /// the face cycles; boundary vertices get an empty ring.
    fn rings(&self) -> Result<Vec<Vec<usize>>> {
        let n = self.points.len();
        let mut succ: Vec<std::collections::HashMap<usize, usize>> = vec![Default::default(); n];
        for &[a, b, c] in &self.faces {
            for (v, from, to) in [(a, b, c), (b, c, a), (c, a, b)] {
                if succ[v].insert(from, to).is_some() {
                    return Err(Error::InvalidInput(format!(
                        "vertex {v} has two faces with the same link edge"
                    )));
                }
            }
        }
        let mut rings = vec![Vec::new(); n];
        for v in 0..n {
            if self.is_boundary(v) || succ[v].is_empty() {
                continue;
            }
            // Deterministic start so two fits over the same faces produce
            // identical ring orders; weight interpolation relies on that.
            let start = *succ[v].keys().min().unwrap();
            let mut ring = vec![start];
            let mut cur = succ[v][&start];
            while cur != start {
                ring.push(cur);
                cur = *succ[v].get(&cur).ok_or_else(|| {
                    Error::InvalidInput(format!("link of interior vertex {v} does not close"))
                })?;
            }
            if ring.len() != succ[v].len() {
                return Err(Error::InvalidInput(format!(
                    "link of interior vertex {v} is disconnected"
                )));
            }
            rings[v] = ring;
        }
        Ok(rings)
    }
}

/// Positive convex weights, one per dart into an interior vertex:
/// `lambda[v][s]` weighs `rings[v][s]`, and each interior row sums to 1.
#[derive(Debug, Clone)]
pub struct PlanarWeights {
    rings: Vec<Vec<usize>>,
    lambda: Vec<Vec<f64>>,
}

impl PlanarWeights {
    pub fn rings(&self) -> &[Vec<usize>] {
        &self.rings
    }

    pub fn lambda(&self) -> &[Vec<f64>] {
        &self.lambda
    }
}

fn tan_half_angle(u: &Vec2, w: &Vec2) -> Result<f64> {
    let cross = u.x * w.y - u.y * w.x;
    let dot = u.dot(w);
    let denom = (u.norm() * w.norm()) + dot;
    if denom <= 0.0 {
        return Err(Error::SolveFailure(
            "degenerate corner while fitting mean-value weights".into(),
        ));
    }
    Ok(cross.abs() / denom)
}

/// Mean-value coordinates of every interior vertex with respect to its
/// neighbor ring, clamped below and renormalized. The fit reproduces the
/// input positions: each interior point is the weighted average of its ring.
pub fn fit_weights(p: &PlanarTriangulation) -> Result<PlanarWeights> {
    let rings = p.rings()?;
    let mut lambda = vec![Vec::new(); p.points.len()];
    for (v, ring) in rings.iter().enumerate() {
        if ring.is_empty() {
            continue;
        }
        let center = p.points[v];
        let d = ring.len();
        let arms: Vec<Vec2> = ring.iter().map(|&u| p.points[u] - center).collect();
        let mut tans = Vec::with_capacity(d);
        for s in 0..d {
            tans.push(tan_half_angle(&arms[s], &arms[(s + 1) % d])?);
        }
        let mut w = Vec::with_capacity(d);
        for s in 0..d {
            let r = arms[s].norm();
            if r <= 0.0 {
                return Err(Error::SolveFailure(format!(
                    "coincident vertices at interior vertex {v}"
                )));
            }
            w.push((tans[(s + d - 1) % d] + tans[s]) / r);
        }
        let sum: f64 = w.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::SolveFailure(format!(
                "nonpositive weight total at interior vertex {v}"
            )));
        }
        let mut lam: Vec<f64> = w.iter().map(|x| (x / sum).max(WEIGHT_FLOOR)).collect();
        let s2: f64 = lam.iter().sum();
        for x in &mut lam {
            *x /= s2;
        }
        lambda[v] = lam;
    }
    Ok(PlanarWeights { rings, lambda })
}

/// Solves the convex-combination system: boundary vertices fixed, every
/// interior vertex the lambda-weighted average of its ring.
pub fn solve_positions(
    weights: &PlanarWeights,
    boundary: [usize; 3],
    boundary_points: [Vec2; 3],
) -> Result<Vec<Vec2>> {
    let n = weights.rings.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DMatrix::<f64>::zeros(n, 2);
    for (slot, &v) in boundary.iter().enumerate() {
        a[(v, v)] = 1.0;
        rhs[(v, 0)] = boundary_points[slot].x;
        rhs[(v, 1)] = boundary_points[slot].y;
    }
    for v in 0..n {
        if boundary.contains(&v) {
            continue;
        }
        if weights.rings[v].is_empty() {
            return Err(Error::InvalidInput(format!(
                "interior vertex {v} has no ring"
            )));
        }
        a[(v, v)] = 1.0;
        for (s, &u) in weights.rings[v].iter().enumerate() {
            a[(v, u)] -= weights.lambda[v][s];
        }
    }
    let lu = a.lu();
    let sol = lu.solve(&rhs).ok_or_else(|| {
        Error::SolveFailure("convex-combination system is singular".into())
    })?;
    Ok((0..n).map(|v| Vec2::new(sol[(v, 0)], sol[(v, 1)])).collect())
}

/// Per-vertex interpolation of two weight sets at parameter `t`, renormalized.
pub fn interpolate_weights(w0: &PlanarWeights, w1: &PlanarWeights, t: f64) -> PlanarWeights {
    debug_assert_eq!(w0.rings, w1.rings);
    let lambda = w0
        .lambda
        .iter()
        .zip(&w1.lambda)
        .map(|(l0, l1)| {
            let mut lam: Vec<f64> = l0
                .iter()
                .zip(l1)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect();
            let sum: f64 = lam.iter().sum();
            if sum > 0.0 {
                for x in &mut lam {
                    *x /= sum;
                }
            }
            lam
        })
        .collect();
    PlanarWeights {
        rings: w0.rings.clone(),
        lambda,
    }
}

/// Morph between two drawings of the same triangulation over the same outer
/// triangle: fit mean-value weights at both ends, then per frame interpolate
/// the weights and re-solve with the boundary fixed. Every frame is a valid
/// drawing because the solved map is a convex-combination map onto a convex
/// boundary. Returns `frames + 1` snapshots; the first and last are the
/// inputs verbatim.
pub fn planar_morph_barycentric(
    p0: &PlanarTriangulation,
    p1: &PlanarTriangulation,
    frames: usize,
) -> Result<Vec<Vec<Vec2>>> {
    if p0.points.len() != p1.points.len()
        || p0.faces != p1.faces
        || p0.boundary != p1.boundary
    {
        return Err(Error::InvalidInput(
            "planar morph endpoints must share vertex count, faces, and boundary".into(),
        ));
    }
    let b0 = p0.boundary_points();
    let b1 = p1.boundary_points();
    let scale = b0
        .iter()
        .chain(&b1)
        .map(|p| p.norm())
        .fold(1.0, f64::max);
    if b0
        .iter()
        .zip(&b1)
        .any(|(a, b)| (a - b).norm() > 1e-9 * scale)
    {
        return Err(Error::InvalidInput(
            "planar morph endpoints have different outer triangles".into(),
        ));
    }
    let w0 = fit_weights(p0)?;
    let w1 = fit_weights(p1)?;
    let frames = frames.max(1);
    let mut out = Vec::with_capacity(frames + 1);
    out.push(p0.points.clone());
    for s in 1..frames {
        let t = s as f64 / frames as f64;
        let wt = interpolate_weights(&w0, &w1, t);
        let bt = [0, 1, 2].map(|i| b0[i].lerp(&b1[i], t));
        out.push(solve_positions(&wt, p0.boundary, bt)?);
    }
    out.push(p1.points.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A square with a center vertex, split into four triangles; boundary
    /// shrunk to a triangle by treating three corners as the outer ring is
    /// not possible, so use a triangle with one interior vertex instead.
    fn one_interior(center: Vec2) -> PlanarTriangulation {
        let points = vec![
            Vec2::new(0.0, 2.0),
            Vec2::new(-2.0, -1.0),
            Vec2::new(2.0, -1.0),
            center,
        ];
        let faces = vec![[0, 1, 3], [1, 2, 3], [2, 0, 3]];
        PlanarTriangulation::new(points, faces, [0, 1, 2]).unwrap()
    }

    #[test]
    fn mean_value_weights_reproduce_positions() {
        let p = one_interior(Vec2::new(0.4, 0.1));
        let w = fit_weights(&p).unwrap();
        let lam = &w.lambda()[3];
        let ring = &w.rings()[3];
        assert_eq!(ring.len(), 3);
        let rebuilt: Vec2 = ring
            .iter()
            .zip(lam)
            .map(|(&u, &l)| p.points()[u] * l)
            .sum();
        assert!((rebuilt - p.points()[3]).norm() < 1e-12);
        assert!((lam.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(lam.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn identical_endpoints_give_constant_frames() {
        let p = one_interior(Vec2::new(-0.3, 0.25));
        let frames = planar_morph_barycentric(&p, &p, 8).unwrap();
        assert_eq!(frames.len(), 9);
        for frame in &frames {
            for (a, b) in frame.iter().zip(p.points()) {
                assert!((a - b).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn endpoint_frames_reproduce_inputs() {
        let p0 = one_interior(Vec2::new(0.5, 0.3));
        let p1 = one_interior(Vec2::new(-0.7, -0.4));
        let frames = planar_morph_barycentric(&p0, &p1, 12).unwrap();
        // Interior solves at t just inside the ends must agree with the
        // fitted endpoints, not only the forced first/last snapshots.
        let near_start = &frames[1];
        let near_end = &frames[11];
        assert!((near_start[3] - p0.points()[3]).norm() < 0.2);
        assert!((near_end[3] - p1.points()[3]).norm() < 0.2);
        for (a, b) in frames[0].iter().zip(p0.points()) {
            assert!((a - b).norm() < 1e-6);
        }
        for (a, b) in frames[12].iter().zip(p1.points()) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn all_frames_stay_counterclockwise() {
        let p0 = one_interior(Vec2::new(1.2, -0.5));
        let p1 = one_interior(Vec2::new(-0.9, 0.5));
        let frames = planar_morph_barycentric(&p0, &p1, 24).unwrap();
        for frame in &frames {
            for f in p0.faces() {
                assert!(orient(&frame[f[0]], &frame[f[1]], &frame[f[2]]) > 0.0);
            }
        }
    }

    #[test]
    fn solve_is_exact_at_fitted_weights() {
        let p = one_interior(Vec2::new(0.1, -0.6));
        let w = fit_weights(&p).unwrap();
        let solved = solve_positions(&w, p.boundary(), p.boundary_points()).unwrap();
        for (a, b) in solved.iter().zip(p.points()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn mismatched_boundaries_are_rejected() {
        let p0 = one_interior(Vec2::new(0.0, 0.0));
        let mut pts = p0.points().to_vec();
        pts[0] = Vec2::new(0.0, 3.0);
        let p1 = PlanarTriangulation::new(pts, p0.faces().to_vec(), p0.boundary()).unwrap();
        assert!(matches!(
            planar_morph_barycentric(&p0, &p1, 4),
            Err(Error::InvalidInput(_))
        ));
    }
}
