//! Coherent realization: given any triangulation, produce an isomorphic one
//! that is the central projection of a convex polyhedron.
//!
//! Construction: Tutte-embed the complex minus one face into that face's
//! triangle with uniform weights, complete the uniform interior stress to a
//! full equilibrium stress by solving for the three outer-edge stresses,
//! lift with Maxwell-Cremona to a convex cap, and project the lifted
//! vertices to the sphere from their centroid. The output is certified by
//! the convex edge defect: every edge of the result must be strictly convex.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, Vector2};

use crate::sphere::{Tolerance, Vec3};
use crate::triangulation::SphereTriangulation;
use crate::{Error, Result};

type Vec2 = Vector2<f64>;

fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Tutte drawing of the complex minus face `outer`: its three vertices are
/// pinned to an equilateral triangle and every other vertex is the average
/// of its neighbors.
fn tutte_drawing(t: &SphereTriangulation, outer: usize) -> Result<Vec<Vec2>> {
    let n = t.n();
    let [a, b, c] = t.face(outer);
    let corner = |deg: f64| {
        let th = deg.to_radians();
        Vec2::new(th.cos(), th.sin())
    };
    let pins = [(a, corner(90.0)), (b, corner(330.0)), (c, corner(210.0))];
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DMatrix::<f64>::zeros(n, 2);
    for &(v, p) in &pins {
        m[(v, v)] = 1.0;
        rhs[(v, 0)] = p.x;
        rhs[(v, 1)] = p.y;
    }
    for &(i, j) in t.edges() {
        for (u, w) in [(i, j), (j, i)] {
            if u != a && u != b && u != c {
                m[(u, u)] += 1.0;
                m[(u, w)] -= 1.0;
            }
        }
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SolveFailure("Tutte system is singular".into()))?;
    Ok((0..n).map(|v| Vec2::new(sol[(v, 0)], sol[(v, 1)])).collect())
}

/// Stresses on the three outer edges completing the uniform interior stress
/// to equilibrium at the pinned vertices, by least squares over the six
/// balance equations (exactly solvable: the interior is already balanced).
fn complete_stress(
    t: &SphereTriangulation,
    outer: usize,
    p: &[Vec2],
) -> Result<HashMap<(usize, usize), f64>> {
    let [a, b, c] = t.face(outer);
    let outer_edges = [(a, b), (b, c), (c, a)];
    let key = |i: usize, j: usize| (i.min(j), i.max(j));
    let mut sys = DMatrix::<f64>::zeros(6, 3);
    let mut rhs = DMatrix::<f64>::zeros(6, 1);
    for (slot, &v) in [a, b, c].iter().enumerate() {
        let mut residual = Vec2::zeros();
        for &(i, j) in t.edges() {
            let u = if i == v {
                j
            } else if j == v {
                i
            } else {
                continue;
            };
            let arm = p[u] - p[v];
            if let Some(col) = outer_edges
                .iter()
                .position(|&(x, y)| key(x, y) == key(v, u))
            {
                sys[(2 * slot, col)] = arm.x;
                sys[(2 * slot + 1, col)] = arm.y;
            } else {
                residual += arm;
            }
        }
        rhs[(2 * slot, 0)] = -residual.x;
        rhs[(2 * slot + 1, 0)] = -residual.y;
    }
    let svd = sys.clone().svd(true, true);
    let omega = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::SolveFailure(format!("stress completion failed: {e}")))?;
    let residual = (&sys * &omega - &rhs).norm();
    if residual > 1e-7 * (1.0 + rhs.norm()) {
        return Err(Error::SolveFailure(format!(
            "outer stress does not balance the boundary (residual {residual:.3e})"
        )));
    }
    let mut stress: HashMap<(usize, usize), f64> = t.edges().iter().map(|&e| (e, 1.0)).collect();
    for (col, &(i, j)) in outer_edges.iter().enumerate() {
        stress.insert(key(i, j), omega[(col, 0)]);
    }
    Ok(stress)
}

/// Maxwell-Cremona lift of an equilibrium stress: per-face affine gradients
/// propagated across edges. Returns the vertex heights with the outer face
/// lifted to the zero plane.
fn lift_heights(
    t: &SphereTriangulation,
    outer: usize,
    p: &[Vec2],
    stress: &HashMap<(usize, usize), f64>,
) -> Result<Vec<f64>> {
    let nf = t.faces().len();
    let mut grad: Vec<Option<(Vec2, f64)>> = vec![None; nf];
    grad[outer] = Some((Vec2::zeros(), 0.0));
    let mut queue = VecDeque::from([outer]);
    let ctol = 1e-7;
    while let Some(f) = queue.pop_front() {
        let (af, cf) = grad[f].unwrap();
        let tri = t.face(f);
        for e in 0..3 {
            let (i, j) = (tri[e], tri[(e + 1) % 3]);
            let g = t
                .face_left_of(j, i)
                .ok_or_else(|| Error::Internal("open surface in lift".into()))?;
            let w = stress[&(i.min(j), i.max(j))];
            let ag = af + perp(p[j] - p[i]) * w;
            let cg = cf + (af - ag).dot(&p[i]);
            match grad[g] {
                None => {
                    grad[g] = Some((ag, cg));
                    queue.push_back(g);
                }
                Some((a2, c2)) => {
                    if (a2 - ag).norm() > ctol * (1.0 + a2.norm())
                        || (c2 - cg).abs() > ctol * (1.0 + c2.abs())
                    {
                        return Err(Error::Internal(
                            "stress lift does not close around a cycle".into(),
                        ));
                    }
                }
            }
        }
    }
    let mut heights = vec![f64::NAN; t.n()];
    for (f, tri) in t.faces().iter().enumerate() {
        let (a, c) = grad[f].ok_or_else(|| Error::Internal("unreached face in lift".into()))?;
        for &v in tri {
            let z = a.dot(&p[v]) + c;
            if heights[v].is_nan() {
                heights[v] = z;
            } else if (heights[v] - z).abs() > ctol * (1.0 + z.abs()) {
                return Err(Error::Internal(
                    "lifted heights disagree between incident faces".into(),
                ));
            }
        }
    }
    Ok(heights)
}

/// Isomorphic coherent realization of `t` using face `outer` of the complex
/// as the Tutte outer face; the output's `outer` face is correspondingly
/// fat. Certified convex via the edge defect.
pub(crate) fn realize_with_outer(
    t: &SphereTriangulation,
    outer: usize,
    tol: Tolerance,
) -> Result<SphereTriangulation> {
    let p = tutte_drawing(t, outer)?;
    let stress = complete_stress(t, outer, &p)?;
    let heights = lift_heights(t, outer, &p, &stress)?;
    for flip in [1.0, -1.0] {
        let pts: Vec<Vec3> = p
            .iter()
            .zip(&heights)
            .map(|(q, &z)| Vec3::new(q.x, q.y, flip * z))
            .collect();
        let centroid: Vec3 = pts.iter().sum::<Vec3>() / pts.len() as f64;
        let mut unit = Vec::with_capacity(pts.len());
        let mut ok = true;
        for q in &pts {
            let w = q - centroid;
            let norm = w.norm();
            if norm <= 1e-12 {
                ok = false;
                break;
            }
            unit.push(w / norm);
        }
        if !ok {
            continue;
        }
        let Ok(cand) = SphereTriangulation::from_parts(unit, t.faces().to_vec()) else {
            continue;
        };
        if cand.is_convex_position(tol) {
            return Ok(cand);
        }
    }
    Err(Error::SolveFailure(
        "lifted polyhedron failed the convexity certificate".into(),
    ))
}

/// Coherent triangulation isomorphic to `t`: same face triples, valid, and
/// in strictly convex position, so every rotation of it is shellable and
/// sinkable.
pub fn coherent_realization(t: &SphereTriangulation, tol: Tolerance) -> Result<SphereTriangulation> {
    realize_with_outer(t, 0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{schonhardt, shaddock, TwistParams};
    use crate::shelling::is_shellable;
    use crate::sphere::random_direction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_coherent_copy(t: &SphereTriangulation) -> SphereTriangulation {
        let tol = Tolerance::default();
        let c = coherent_realization(t, tol).unwrap();
        assert_eq!(c.faces(), t.faces());
        assert!(c.is_convex_position(tol));
        c
    }

    #[test]
    fn octahedron_realizes_coherently() {
        assert_coherent_copy(&crate::generators::octahedron());
    }

    #[test]
    fn schonhardt_realizes_coherently() {
        let t = schonhardt(&TwistParams::standard(0.4)).unwrap();
        assert!(!t.is_convex_position(Tolerance::default()));
        assert_coherent_copy(&t);
    }

    #[test]
    fn shaddock_realizes_coherently() {
        let t = shaddock(crate::generators::jessen_twist_angle()).unwrap();
        assert_coherent_copy(&t);
    }

    #[test]
    fn realization_is_shellable_from_sampled_directions() {
        let t = schonhardt(&TwistParams::standard(0.45)).unwrap();
        let c = assert_coherent_copy(&t);
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 100 {
            let d = random_direction(&mut rng);
            match is_shellable(&c, &d, tol) {
                Ok(v) => {
                    assert!(v, "coherent realization unshellable from {d:?}");
                    checked += 1;
                }
                Err(Error::DegenerateDirection(_)) => continue,
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
    }

    #[test]
    fn every_outer_face_choice_works() {
        let t = schonhardt(&TwistParams::standard(0.3)).unwrap();
        let tol = Tolerance::default();
        for f in 0..t.faces().len() {
            let c = realize_with_outer(&t, f, tol).unwrap();
            assert!(c.is_convex_position(tol));
        }
    }
}
