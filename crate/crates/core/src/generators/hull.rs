//! Convex hulls of spherical point sets and random coherent triangulations.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::sphere::{random_direction, vol, vol_sign, Tolerance, Vec3};
use crate::triangulation::SphereTriangulation;
use crate::{Error, Result};

/// Relative cutoff below which a hull orientation test counts as degenerate.
const HULL_EPS: f64 = 1e-12;

/// Orientation of `d` against the plane through `a`, `b`, `c`: positive when
/// `d` lies on the side the right-handed normal of (b-a, c-a) points into.
/// Returns None when the answer is too close to zero to trust.
fn orient(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> Option<f64> {
    let (u, v, w) = (b - a, c - a, d - a);
    let det = vol(&u, &v, &w);
    let scale = u.norm() * v.norm() * w.norm();
    (det.abs() > HULL_EPS * scale).then_some(det)
}

/// Convex hull of a point set in general position, as outward-oriented
/// triangles (incremental insertion). Returns None on any degeneracy:
/// coplanar quadruples, coincident points, or a point inside the hull
/// (impossible for distinct unit vectors).
pub fn convex_hull(points: &[Vec3]) -> Option<Vec<[usize; 3]>> {
    let n = points.len();
    if n < 4 {
        return None;
    }
    // Seed simplex from the first four points; general position required.
    let d0 = orient(&points[0], &points[1], &points[2], &points[3])?;
    let (a, b) = if d0 > 0.0 { (0, 1) } else { (1, 0) };
    let mut faces: Vec<[usize; 3]> = vec![[a, 2, b], [a, b, 3], [b, 2, 3], [2, a, 3]];

    for p in 4..n {
        let pt = &points[p];
        let mut visible = vec![false; faces.len()];
        let mut any = false;
        for (fi, &[i, j, k]) in faces.iter().enumerate() {
            let d = orient(&points[i], &points[j], &points[k], pt)?;
            if d > 0.0 {
                visible[fi] = true;
                any = true;
            }
        }
        if !any {
            // Point inside the current hull: not in convex position.
            return None;
        }
        // Horizon darts: edges of visible faces whose twin face is kept.
        let mut dart_owner = std::collections::HashMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for e in 0..3 {
                dart_owner.insert((f[e], f[(e + 1) % 3]), fi);
            }
        }
        let mut new_faces: Vec<[usize; 3]> = Vec::new();
        for (fi, f) in faces.iter().enumerate() {
            if !visible[fi] {
                new_faces.push(*f);
                continue;
            }
            for e in 0..3 {
                let (u, w) = (f[e], f[(e + 1) % 3]);
                if !visible[dart_owner[&(w, u)]] {
                    new_faces.push([u, w, p]);
                }
            }
        }
        faces = new_faces;
    }
    Some(faces)
}

/// Convex hull of `n` uniform random unit vectors; retries the whole draw on
/// degenerate samples or when the origin is not strictly inside the hull, so
/// the result is always a strictly valid, coherent triangulation.
pub fn random_coherent(n: usize, seed: u64) -> Result<SphereTriangulation> {
    if n < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 vertices, got {n}"
        )));
    }
    let tol = Tolerance::default();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    const ATTEMPTS: usize = 64;
    for _ in 0..ATTEMPTS {
        let points: Vec<Vec3> = (0..n).map(|_| random_direction(&mut rng)).collect();
        let Some(faces) = convex_hull(&points) else {
            continue;
        };
        // Origin strictly inside keeps every projected face positively
        // oriented (no everted face).
        if faces
            .iter()
            .all(|&[i, j, k]| vol_sign(&points[i], &points[j], &points[k], tol) == 1)
        {
            return SphereTriangulation::from_parts(points, faces);
        }
    }
    Err(Error::GenerationFailed(format!(
        "no valid hull sample for n = {n} after {ATTEMPTS} draws"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tetrahedral_case() {
        let t = random_coherent(4, 7).unwrap();
        assert_eq!(t.faces().len(), 4);
        assert_eq!(t.edges().len(), 6);
    }

    #[test]
    fn hundred_points_euler_counts() {
        let t = random_coherent(100, 2026).unwrap();
        assert_eq!(t.faces().len(), 196);
        assert_eq!(t.edges().len(), 294);
    }

    #[test]
    fn many_seeds_validate_and_are_convex() {
        let tol = Tolerance::default();
        for seed in 0..50 {
            let n = 4 + (seed as usize * 7) % 40;
            let t = random_coherent(n, seed).unwrap();
            assert_eq!(t.faces().len(), 2 * n - 4);
            assert!(t.is_convex_position(tol), "seed {seed} not convex");
            assert!(t.genericity_sampled(&Vec3::z(), tol, 200, seed).sampled);
        }
    }

    #[test]
    fn hull_matches_brute_force_on_small_sets() {
        // Oracle: a triple is a hull face iff all other points are strictly
        // on its inner side.
        for seed in 0..20 {
            let mut rng = ChaCha20Rng::seed_from_u64(1000 + seed);
            let pts: Vec<Vec3> = (0..8).map(|_| random_direction(&mut rng)).collect();
            let Some(faces) = convex_hull(&pts) else {
                continue;
            };
            let mut expected = Vec::new();
            for i in 0..8 {
                for j in 0..8 {
                    for k in (i + 1)..8 {
                        if j <= i || j == k {
                            continue;
                        }
                        let all_below = (0..8).filter(|&l| l != i && l != j && l != k).all(|l| {
                            orient(&pts[i], &pts[j], &pts[k], &pts[l])
                                .map(|d| d < 0.0)
                                .unwrap_or(false)
                        });
                        if all_below {
                            expected.push(sorted3([i, j, k]));
                        }
                    }
                }
            }
            let mut got: Vec<_> = faces.iter().map(|&f| sorted3(f)).collect();
            got.sort_unstable();
            expected.sort_unstable();
            assert_eq!(got, expected, "seed {seed}");
        }
    }

    fn sorted3(mut f: [usize; 3]) -> [usize; 3] {
        f.sort_unstable();
        f
    }
}
