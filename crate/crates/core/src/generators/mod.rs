//! Constructors for the triangulation families used throughout: twisted
//! prisms, jitterbug (shaddock) solids, random hulls, flip-degraded meshes,
//! equatorial rotors, and longitude-seam refinements.

mod flips;
mod hull;

pub use flips::{ugly_flip_family, ugly_flip_family_with};
pub use hull::{convex_hull, random_coherent};

use std::collections::HashMap;

use nalgebra::Rotation3;

use crate::sphere::{rotation_about_axis, vol, Tolerance, Vec3};
use crate::triangulation::SphereTriangulation;
use crate::{Error, Result};

/// How to orient a generated solid in space.
#[derive(Debug, Clone)]
pub enum Pose {
    /// Symmetry axis along z.
    Standard,
    /// Standard pose rotated a quarter turn about the x-axis.
    RotatedX90,
    Custom(Rotation3<f64>),
}

impl Pose {
    fn rotation(&self) -> Rotation3<f64> {
        match self {
            Pose::Standard => Rotation3::identity(),
            Pose::RotatedX90 => {
                Rotation3::from_axis_angle(&Vec3::x_axis(), std::f64::consts::FRAC_PI_2)
            }
            Pose::Custom(r) => *r,
        }
    }
}

/// Twist parameters for the prism family.
#[derive(Debug, Clone)]
pub struct TwistParams {
    /// Rotation of the top triangle relative to the untwisted prism, radians.
    pub theta: f64,
    pub pose: Pose,
}

impl TwistParams {
    pub fn standard(theta: f64) -> Self {
        TwistParams {
            theta,
            pose: Pose::Standard,
        }
    }
}

/// Twisted triangular prism, triangulated so every vertex has degree 4.
///
/// Bottom triangle at angles {0, 120, 240} degrees in the plane z = -1; top
/// triangle at the same angles plus `theta` in the plane z = +1; lateral
/// edges are the verticals b_k t_k plus the diagonals b_k t_{k+1} (the unique
/// symmetric choice giving all degrees 4). theta = 0 is the flat-quad prism;
/// theta < 0 twists toward the hull complex (convex); theta > 0 opens the
/// classic non-convex niches.
pub fn schonhardt(params: &TwistParams) -> Result<SphereTriangulation> {
    if params.theta.abs() >= std::f64::consts::PI {
        return Err(Error::InvalidInput(format!(
            "twist angle must satisfy |theta| < pi, got {}",
            params.theta
        )));
    }
    let r = params.pose.rotation();
    let ring = |phase: f64, z: f64| {
        (0..3).map(move |k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0 + phase;
            Vec3::new(a.cos(), a.sin(), z)
        })
    };
    let vertices: Vec<Vec3> = ring(0.0, -1.0)
        .chain(ring(params.theta, 1.0))
        .map(|v| r * v)
        .collect();
    // Indices: bottom 0..3, top 3..6.
    let t = |k: usize| 3 + k % 3;
    let b = |k: usize| k % 3;
    let mut faces = vec![[b(0), b(2), b(1)], [t(0), t(1), t(2)]];
    for k in 0..3 {
        faces.push([b(k), b(k + 1), t(k + 1)]);
        faces.push([b(k), t(k + 1), t(k)]);
    }
    SphereTriangulation::from_parts(vertices, faces)
}

/// Twist of the jitterbug family that yields the orthogonal (a = 2) pose,
/// whose split squares bend inward into six beaks.
pub fn jessen_twist_angle() -> f64 {
    std::f64::consts::FRAC_PI_6
}

/// Twist that yields the regular icosahedron. Negative: the icosahedron sits
/// on the outward-buckling (convex) branch of the family.
pub fn icosahedron_twist_angle() -> f64 {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    -(3.0f64.sqrt() * (phi - 1.0) / (phi + 1.0)).atan()
}

/// Family parameter of the jitterbug motion as a function of the twist of
/// each rigid triangle about its own axis.
///
/// Vertices are the cyclic sign family (0, +-1, +-a); each of the eight
/// triangles {(0,1,a),(a,0,1),(1,a,0)}-type stays equilateral for every a,
/// and its rotation about its axis (1,1,1) relative to the a = 1 pose works
/// out to atan(sqrt(3) (a-1) / (a+1)). Positive twist is the direction that
/// buckles the split squares inward, which is the a < 1 branch, so
/// a(theta) = (sqrt(3) - tan theta) / (sqrt(3) + tan theta), a strictly
/// decreasing map of (-60, 60) degrees onto (inf, 0).
fn jitterbug_parameter(theta: f64) -> Result<f64> {
    let lim = std::f64::consts::FRAC_PI_3;
    if theta.abs() >= lim - 1e-6 {
        return Err(Error::InvalidInput(format!(
            "twist {theta} outside the mechanical range (|theta| < pi/3)"
        )));
    }
    let s3 = 3.0f64.sqrt();
    let t = theta.tan();
    Ok((s3 - t) / (s3 + t))
}

/// Twisted cuboctahedron ("shaddock"): the six squares of the cuboctahedron
/// are split by diagonals making every degree 5, then all eight rigid
/// triangles twist in place by `theta`. theta = 0 is the cuboctahedron;
/// positive twist buckles the split squares inward into six concave beaks,
/// with the orthogonal (right-dihedral) pose at `jessen_twist_angle()`;
/// negative twist buckles them outward through the regular icosahedron at
/// `icosahedron_twist_angle()`. Standard pose: one triangle pair normal to
/// the z-axis.
pub fn shaddock(theta: f64) -> Result<SphereTriangulation> {
    shaddock_posed(theta, &Pose::Standard)
}

pub fn shaddock_posed(theta: f64, pose: &Pose) -> Result<SphereTriangulation> {
    let a = jitterbug_parameter(theta)?;
    let idx = |s: i32, t: i32| ((1 - s) + (1 - t) / 2) as usize; // (+,+)=0 (+,-)=1 (-,+)=2 (-,-)=3
    let a_i = |s: i32, t: i32| idx(s, t);
    let b_i = |s: i32, t: i32| 4 + idx(s, t);
    let c_i = |s: i32, t: i32| 8 + idx(s, t);
    let family = |a: f64| -> Vec<Vec3> {
        let mut v = vec![Vec3::zeros(); 12];
        for s in [1, -1] {
            for t in [1, -1] {
                let (sf, tf) = (s as f64, t as f64);
                v[a_i(s, t)] = Vec3::new(0.0, sf, tf * a);
                v[b_i(s, t)] = Vec3::new(tf * a, 0.0, sf);
                v[c_i(s, t)] = Vec3::new(sf, tf * a, 0.0);
            }
        }
        v
    };
    let reference = family(1.0);
    let vertices = family(a);

    let mut faces = Vec::with_capacity(20);
    // Rigid triangles, one per sign octant; orientation flips with the
    // octant's parity.
    for ex in [1, -1] {
        for ey in [1, -1] {
            for ez in [1, -1i32] {
                let tri = [a_i(ey, ez), b_i(ez, ex), c_i(ex, ey)];
                if ex * ey * ez > 0 {
                    faces.push(tri);
                } else {
                    faces.push([tri[0], tri[2], tri[1]]);
                }
            }
        }
    }
    // Split squares: per coordinate axis d and side sigma, the diagonal joins
    // the pair whose +-1 coordinate varies (constant length 2 for every a,
    // the icosahedron edge at a = golden ratio).
    for d in 0..3 {
        for sigma in [1, -1] {
            let (p_plus, p_minus, q) = match d {
                0 => (
                    b_i(1, sigma),
                    b_i(-1, sigma),
                    [c_i(sigma, 1), c_i(sigma, -1)],
                ),
                1 => (
                    c_i(1, sigma),
                    c_i(-1, sigma),
                    [a_i(sigma, 1), a_i(sigma, -1)],
                ),
                _ => (
                    a_i(1, sigma),
                    a_i(-1, sigma),
                    [b_i(sigma, 1), b_i(sigma, -1)],
                ),
            };
            // Which ring vertex pairs with which side of the diagonal is
            // fixed combinatorially; read it off the a = 1 reference pose.
            let side = if vol(&reference[p_plus], &reference[q[0]], &reference[p_minus]) > 0.0 {
                q
            } else {
                [q[1], q[0]]
            };
            faces.push([p_plus, side[0], p_minus]);
            faces.push([p_minus, side[1], p_plus]);
        }
    }

    let to_pole = Rotation3::rotation_between(&Vec3::new(1.0, 1.0, 1.0), &Vec3::z())
        .expect("axis is not antipodal to z");
    let r = pose.rotation() * to_pole;
    SphereTriangulation::from_parts(vertices.into_iter().map(|v| r * v).collect(), faces)
}

/// Platonic octahedron, posed so that no vertex sits on a pole and no two
/// vertices share a longitude.
pub fn octahedron() -> SphereTriangulation {
    let r = rotation_about_axis(&Vec3::new(1.0, 2.0, 3.0), 0.3).unwrap();
    let verts: Vec<Vec3> = [
        Vec3::x(),
        -Vec3::x(),
        Vec3::y(),
        -Vec3::y(),
        Vec3::z(),
        -Vec3::z(),
    ]
    .iter()
    .map(|v| r * v)
    .collect();
    let faces = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    SphereTriangulation::from_parts(verts, faces).unwrap()
}

/// A triangulation containing a rotor: a belt of 2m slivers around the
/// equator whose dual edges form a directed cycle for poles near the z-axis,
/// blocking any shelling from those directions.
#[derive(Debug, Clone)]
pub struct RotorTriangulation {
    pub triangulation: SphereTriangulation,
    /// The belt faces in cycle order (alternating lower and upper slivers).
    pub belt_faces: Vec<usize>,
    /// Axis the rotor obstructs (the z-axis as constructed).
    pub axis: Vec3,
}

/// Builds the rotor belt and completes it by coning the polar caps from
/// apexes placed off-axis (so the axis itself stays generic).
///
/// The south ring sits at latitude -eps with longitudes 2 pi k / m; the north
/// ring at +eps, shifted by 3 pi / m. The shift exceeds one ring step, which
/// makes every dual edge between consecutive belt faces point the same way
/// around the equator: a directed dual cycle.
pub fn equatorial_rotor(m: usize, eps: f64) -> Result<RotorTriangulation> {
    if m < 8 {
        return Err(Error::InvalidInput(format!("need m >= 8, got {m}")));
    }
    if !(0.0..0.4).contains(&eps) || eps == 0.0 {
        return Err(Error::InvalidInput(format!(
            "belt half-width eps must be in (0, 0.4), got {eps}"
        )));
    }
    let lon = |k: usize| 2.0 * std::f64::consts::PI * k as f64 / m as f64;
    let shift = 3.0 * std::f64::consts::PI / m as f64;
    let at = |longitude: f64, latitude: f64| {
        Vec3::new(
            latitude.cos() * longitude.cos(),
            latitude.cos() * longitude.sin(),
            latitude.sin(),
        )
    };
    let mut vertices = Vec::with_capacity(2 * m + 2);
    for k in 0..m {
        vertices.push(at(lon(k), -eps)); // s_k = k
    }
    for k in 0..m {
        vertices.push(at(lon(k) + shift, eps)); // x_k = m + k
    }
    let north_apex = 2 * m;
    let south_apex = 2 * m + 1;
    vertices.push(at(0.37, std::f64::consts::FRAC_PI_2 - 0.2));
    vertices.push(at(1.91, -(std::f64::consts::FRAC_PI_2 - 0.23)));

    let s = |k: usize| k % m;
    let x = |k: usize| m + k % m;
    let mut faces = Vec::with_capacity(4 * m);
    let mut belt_faces = Vec::with_capacity(2 * m);
    for k in 0..m {
        belt_faces.push(faces.len());
        faces.push([s(k), s(k + 1), x(k)]); // lower sliver: down face at z-pole
        belt_faces.push(faces.len());
        faces.push([s(k + 1), x(k + 1), x(k)]); // upper sliver: up face
    }
    for k in 0..m {
        faces.push([x(k), x(k + 1), north_apex]);
        faces.push([s(k + 1), s(k), south_apex]);
    }
    Ok(RotorTriangulation {
        triangulation: SphereTriangulation::from_parts(vertices, faces)?,
        belt_faces,
        axis: Vec3::z(),
    })
}

/// Bookkeeping from a seam refinement: which edges got bend vertices and how
/// each original face maps onto refined faces.
#[derive(Debug, Clone)]
pub struct RefinementMap {
    /// The seam vertices: the chosen north-face vertex followed by every bend
    /// north-to-south; consecutive entries are edges of the refined
    /// triangulation lying exactly along the longitude.
    pub seam: Vec<usize>,
    /// Original edge (i < j) to the bend vertex subdividing it.
    pub bend_of_edge: HashMap<(usize, usize), usize>,
    /// Original face index to the refined faces covering it.
    pub face_map: Vec<Vec<usize>>,
}

/// Refines `t` along the longitude through north-face vertex `v`: every edge
/// crossed by the longitude is subdivided at the crossing, crossed faces are
/// re-triangulated (3 pieces in the middle, 2 at the ends), and the result
/// carries a seam of edges from the north face to the south face, which makes
/// it shellable from `pole`.
pub fn refine_along_seam(
    t: &SphereTriangulation,
    pole: &Vec3,
    v: usize,
    tol: Tolerance,
) -> Result<(SphereTriangulation, RefinementMap)> {
    let class = t.classify_faces(pole, tol)?;
    if !t.face(class.north).contains(&v) {
        return Err(Error::InvalidInput(format!(
            "vertex {v} is not on the north face"
        )));
    }
    let vp = t.vertex(v);
    // Plane of the longitude through v, and the equatorial component of v
    // selecting the v-side semicircle.
    let normal = pole.cross(vp);
    if normal.norm() <= tol.rel * pole.norm() * vp.norm() {
        return Err(Error::DegenerateDirection(
            "seam vertex lies on the polar axis".into(),
        ));
    }
    let side = vp - pole * (vp.dot(pole) / pole.dot(pole));
    for (u, uv) in t.vertices().iter().enumerate() {
        if u != v
            && uv.dot(&normal).abs() <= tol.rel * uv.norm() * normal.norm()
            && uv.dot(&side) > 0.0
        {
            return Err(Error::DegenerateDirection(format!(
                "longitude through vertex {v} also passes through vertex {u}"
            )));
        }
    }

    // Crossing of the longitude with edge (i, j), as an exact positive
    // combination of the endpoints, or None if the open edge is not crossed.
    // Edges incident to v meet the longitude plane only at v itself, so they
    // are never crossed; skipping them avoids a spurious corner crossing
    // when the roundoff in normal.dot(vp) has an unlucky sign.
    let crossing = |i: usize, j: usize| -> Option<Vec3> {
        if i == v || j == v {
            return None;
        }
        let (pi, pj) = (t.vertex(i), t.vertex(j));
        let (di, dj) = (normal.dot(pi), normal.dot(pj));
        let (alpha, beta) = (dj, -di);
        let (alpha, beta) = if alpha < 0.0 {
            (-alpha, -beta)
        } else {
            (alpha, beta)
        };
        if alpha <= 0.0 || beta <= 0.0 {
            return None;
        }
        let q = pi * alpha + pj * beta;
        (q.dot(&side) > 0.0).then_some(q)
    };

    let mut vertices = t.vertices().to_vec();
    let mut bend_of_edge: HashMap<(usize, usize), usize> = HashMap::new();
    let mut seam = vec![v];
    let mut face_map: Vec<Vec<usize>> = vec![Vec::new(); t.faces().len()];
    let mut out_faces: Vec<[usize; 3]> = Vec::new();
    let mut handled = vec![false; t.faces().len()];

    let push =
        |out_faces: &mut Vec<[usize; 3]>, face_map: &mut Vec<Vec<usize>>, old: usize, f: [usize; 3]| {
            face_map[old].push(out_faces.len());
            out_faces.push(f);
        };

    // Walk from the face below v toward the south face. The first face has
    // apex v and is crossed from v through its base; middle faces are crossed
    // edge to edge; the south face absorbs the last bend.
    let mut cur = class.face_below[v];
    let mut entry_dart: Option<(usize, usize)> = None; // dart of cur on the entry edge
    let mut entry_bend = v;
    for _step in 0..t.faces().len() + 1 {
        handled[cur] = true;
        if cur == class.south {
            if entry_dart.is_none() {
                // v is itself on the south face; nothing to refine.
                break;
            }
            let (a, b) = entry_dart.unwrap();
            let c = t.third_vertex(cur, a, b);
            push(&mut out_faces, &mut face_map, cur, [a, entry_bend, c]);
            push(&mut out_faces, &mut face_map, cur, [entry_bend, b, c]);
            break;
        }
        let tri = t.face(cur);
        // Find the exit: the crossed edge that is not the entry edge.
        let mut exit: Option<(usize, Vec3)> = None; // dart position, crossing
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            if entry_dart == Some((a, b)) {
                continue;
            }
            if let Some(q) = crossing(a, b) {
                if exit.replace((e, q)).is_some() {
                    return Err(Error::DegenerateDirection(format!(
                        "longitude crosses face {cur} more than twice"
                    )));
                }
            }
        }
        let Some((e_exit, q)) = exit else {
            return Err(Error::DegenerateDirection(format!(
                "walk stalled in face {cur}: no exit crossing"
            )));
        };
        let (ea, eb) = (tri[e_exit], tri[(e_exit + 1) % 3]);
        let bend = *bend_of_edge
            .entry((ea.min(eb), ea.max(eb)))
            .or_insert_with(|| {
                vertices.push(q);
                vertices.len() - 1
            });
        seam.push(bend);

        match entry_dart {
            None => {
                // Face below v: triple is (base0, base1, v); the exit is the
                // base. Split into two by the edge v-bend.
                debug_assert_eq!(t.third_vertex(cur, ea, eb), v);
                push(&mut out_faces, &mut face_map, cur, [ea, bend, v]);
                push(&mut out_faces, &mut face_map, cur, [bend, eb, v]);
            }
            Some((ia, ib)) => {
                // Middle face: entry and exit edges share a corner. Rotate
                // the triple to (i, j, k) with crossings m1 on (i,j), m2 on
                // (j,k); pieces (m1,j,m2), (i,m1,k), (m1,m2,k).
                let e_entry = (0..3)
                    .find(|&e| (tri[e], tri[(e + 1) % 3]) == (ia, ib))
                    .expect("entry dart on face");
                let (first, m1, m2) = if (e_entry + 1) % 3 == e_exit {
                    (e_entry, entry_bend, bend)
                } else {
                    (e_exit, bend, entry_bend)
                };
                let (i, j, k) = (tri[first], tri[(first + 1) % 3], tri[(first + 2) % 3]);
                push(&mut out_faces, &mut face_map, cur, [m1, j, m2]);
                push(&mut out_faces, &mut face_map, cur, [i, m1, k]);
                push(&mut out_faces, &mut face_map, cur, [m1, m2, k]);
            }
        }

        entry_dart = Some((eb, ea));
        entry_bend = bend;
        cur = t
            .face_left_of(eb, ea)
            .expect("interior edge has two faces");
        if handled[cur] {
            return Err(Error::DegenerateDirection(
                "seam walk revisited a face".into(),
            ));
        }
    }

    for f in 0..t.faces().len() {
        if !handled[f] {
            push(&mut out_faces, &mut face_map, f, t.face(f));
        }
    }
    let refined = SphereTriangulation::from_parts(vertices, out_faces)?;
    Ok((
        refined,
        RefinementMap {
            seam,
            bend_of_edge,
            face_map,
        },
    ))
}
