//! End-to-end morph plans between isomorphic triangulations.
//!
//! Both halves of a plan descend to the same southern coherent intermediate:
//! pose the input so it sinks (the two poses must agree on the combinatorial
//! north face), sink it, align its gnomonic north triangle with the
//! intermediate's by an affine bridge, and finish with a planar barycentric
//! morph. The target half is built the same way and appended reversed, so
//! the two planar stages share the intermediate's coordinate array verbatim.
//!
//! The bridge is an affine map of the chart plane with positive determinant,
//! split by singular value decomposition into two rotations and three
//! axis-parallel scalings; each piece scales every face volume by a positive
//! factor, so validity is preserved frame by frame.

use std::collections::HashSet;

use nalgebra::{Matrix2, Matrix3, Rotation3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::generators::{refine_along_seam, RefinementMap};
use crate::shelling::{find_shelling_direction, pole_analysis};
use crate::sphere::{
    gnomonic_project, pole_to_north, random_direction, vol_sign, Tolerance, Vec3,
};
use crate::triangulation::{find_isomorphism, validate_parts, SphereTriangulation};
use crate::{Error, Result};

use super::planar::Vec2;
use super::realize::realize_with_outer;
use super::{
    planar_stage, rotate_stage, sink_snapshot, sink_stage, MorphPlan, MorphStage, SinkSnapshot,
    StageKind,
};

/// Knobs for plan construction. The rotation budget bounds the random pose
/// search per half before the exact fallback kicks in.
#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub seed: u64,
    pub rotation_budget: usize,
    pub frames_per_stage: usize,
    pub tol: Tolerance,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            rotation_budget: 64,
            frames_per_stage: 60,
            tol: Tolerance::default(),
        }
    }
}

/// Seam refinements backing a one-bend plan: the source-side map, the
/// target-side map, and the first stage index that uses the target-side
/// complex. Restricted to original vertices, the plan still chains exactly
/// across that boundary.
#[derive(Debug, Clone)]
pub struct RefinementBookkeeping {
    pub source: RefinementMap,
    pub target: RefinementMap,
    pub split: usize,
}

fn canonical(f: [usize; 3]) -> [usize; 3] {
    let m = (0..3).min_by_key(|&e| f[e]).unwrap();
    [f[m], f[(m + 1) % 3], f[(m + 2) % 3]]
}

/// The target relabeled and re-indexed so its face list equals the source's
/// literally; errors when the complexes are not isomorphic.
fn align_target(
    t0: &SphereTriangulation,
    t1: &SphereTriangulation,
) -> Result<SphereTriangulation> {
    if t0.faces() == t1.faces() {
        return Ok(t1.clone());
    }
    let set = |t: &SphereTriangulation| -> HashSet<[usize; 3]> {
        t.faces().iter().map(|&f| canonical(f)).collect()
    };
    let aligned = if set(t0) == set(t1) {
        t1.clone()
    } else {
        let map = find_isomorphism(t1, t0).ok_or(Error::NotIsomorphic)?;
        t1.relabeled(&map)?
    };
    SphereTriangulation::from_parts(aligned.vertices().to_vec(), t0.faces().to_vec())
}

fn everted_face(t: &SphereTriangulation, tol: Tolerance) -> Option<usize> {
    t.faces()
        .iter()
        .position(|f| vol_sign(t.vertex(f[0]), t.vertex(f[1]), t.vertex(f[2]), tol) == -1)
}

/// Direction strictly inside the spherical region of face `fverts`,
/// weighted toward its corners.
fn face_interior_dir(t: &SphereTriangulation, fverts: [usize; 3], weights: [f64; 3]) -> Vec3 {
    let mut u = Vec3::zeros();
    for (slot, &v) in fverts.iter().enumerate() {
        u += t.vertex(v).normalize() * weights[slot];
    }
    u.normalize()
}

/// Rotation carrying the direction of `from` to the direction of `to`.
fn rotation_taking(from: &Vec3, to: &Vec3) -> Rotation3<f64> {
    pole_to_north(to).inverse() * pole_to_north(from)
}

/// One posed half of a pipeline.
enum HalfPose {
    /// Rotated to a sinkable pose; carries the sink snapshot.
    Full {
        rotation: Rotation3<f64>,
        posed: SphereTriangulation,
        snap: SinkSnapshot,
    },
    /// Already non-full: rotated straight into the southern hemisphere with
    /// the everted face covering the pole; no sink needed.
    Fast {
        rotation: Rotation3<f64>,
        posed: SphereTriangulation,
    },
}

/// Tries to pose `t` with `dir` at the +z pole and sink it there.
fn try_pose(
    t: &SphereTriangulation,
    dir: &Vec3,
    tol: Tolerance,
) -> Result<Option<(Rotation3<f64>, SphereTriangulation, SinkSnapshot)>> {
    let rotation = pole_to_north(dir);
    let posed = t.rotated(&rotation);
    match sink_snapshot(&posed, &Vec3::z(), tol) {
        Ok(Some(snap)) => Ok(Some((rotation, posed, snap))),
        Ok(None) => Ok(None),
        Err(Error::DegenerateDirection(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Random sinkable pose for `t`; falls back to the exact shellable-direction
/// search after the budget.
fn unconstrained_pose(
    t: &SphereTriangulation,
    rng: &mut ChaCha8Rng,
    budget: usize,
    tol: Tolerance,
    attempted: &mut Vec<Vec3>,
) -> Result<Option<(Rotation3<f64>, SphereTriangulation, SinkSnapshot)>> {
    for _ in 0..budget {
        let dir = random_direction(rng);
        attempted.push(dir);
        if let Some(found) = try_pose(t, &dir, tol)? {
            return Ok(Some(found));
        }
    }
    match find_shelling_direction(t, tol) {
        Ok(dir) => {
            attempted.push(dir);
            try_pose(t, &dir, tol)
        }
        Err(Error::NoDirectionFound { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Sinkable pose for `t` whose north face is exactly `face`: directions are
/// sampled inside that face's spherical region.
fn constrained_pose(
    t: &SphereTriangulation,
    face: usize,
    rng: &mut ChaCha8Rng,
    budget: usize,
    tol: Tolerance,
    attempted: &mut Vec<Vec3>,
) -> Result<Option<(Rotation3<f64>, SphereTriangulation, SinkSnapshot)>> {
    let fverts = t.face(face);
    for attempt in 0..budget {
        let weights = if attempt == 0 {
            [1.0, 1.0, 1.0]
        } else {
            [0; 3].map(|_| rng.gen_range(0.05..1.0))
        };
        let dir = face_interior_dir(t, fverts, weights);
        attempted.push(dir);
        if let Some((rotation, posed, snap)) = try_pose(t, &dir, tol)? {
            if snap.north == face {
                return Ok(Some((rotation, posed, snap)));
            }
        }
    }
    Ok(None)
}

/// Pose for a non-full input: rotate an interior direction of the everted
/// face's region to the pole so every vertex is strictly southern.
fn southern_pose(
    t: &SphereTriangulation,
    everted: usize,
    rng: &mut ChaCha8Rng,
    budget: usize,
) -> Result<(Rotation3<f64>, SphereTriangulation)> {
    let fverts = t.face(everted);
    for attempt in 0..budget {
        let weights = if attempt == 0 {
            [1.0, 1.0, 1.0]
        } else {
            [0; 3].map(|_| rng.gen_range(0.05..1.0))
        };
        let dir = -face_interior_dir(t, fverts, weights);
        let rotation = pole_to_north(&dir);
        let posed = t.rotated(&rotation);
        if posed
            .vertices()
            .iter()
            .all(|v| v.z < -1e-9 * v.norm())
        {
            return Ok((rotation, posed));
        }
    }
    Err(Error::MorphFailure(
        "could not rotate the non-full input into the southern hemisphere".into(),
    ))
}

/// Poses the coherent intermediate with face `f` at `pole` and sinks it
/// there, jittering the pose away from degeneracies.
fn sink_posed_intermediate(
    c: &SphereTriangulation,
    f: usize,
    pole: &Vec3,
    rng: &mut ChaCha8Rng,
    tol: Tolerance,
) -> Result<Vec<Vec3>> {
    let fverts = c.face(f);
    for attempt in 0..12 {
        let weights = if attempt == 0 {
            [1.0, 1.0, 1.0]
        } else {
            [0; 3].map(|_| rng.gen_range(0.05..1.0))
        };
        let u = face_interior_dir(c, fverts, weights);
        let posed = c.rotated(&rotation_taking(&u, pole));
        match sink_snapshot(&posed, pole, tol) {
            Ok(Some(snap)) if snap.north == f => return Ok(snap.end),
            Ok(_) => continue,
            Err(Error::DegenerateDirection(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Internal(
        "coherent intermediate failed to sink at its fat face".into(),
    ))
}

/// Affine bridge in the chart at `pole`: five stages (rotation, three
/// axis scalings, rotation) carrying `start`'s projected `fverts` triangle
/// onto `target`'s. Returns the stages and the final coordinate array.
fn bridge_stages(
    start: &[Vec3],
    faces: &[[usize; 3]],
    exempt: usize,
    fverts: [usize; 3],
    pole: &Vec3,
    target: &[Vec3],
    frames: usize,
) -> Result<(Vec<MorphStage>, Vec<Vec3>)> {
    let frame = pole_to_north(pole);
    let chart = |coords: &[Vec3], v: usize| -> Result<Vec2> {
        let [x, y] = gnomonic_project(&(frame * coords[v]))?;
        Ok(Vec2::new(x, y))
    };
    let mut q = [Vec2::zeros(); 3];
    let mut w = [Vec2::zeros(); 3];
    for i in 0..3 {
        q[i] = chart(start, fverts[i])?;
        w[i] = chart(target, fverts[i])?;
    }
    let qm = Matrix2::from_columns(&[q[1] - q[0], q[2] - q[0]]);
    let wm = Matrix2::from_columns(&[w[1] - w[0], w[2] - w[0]]);
    let l = wm * qm
        .try_inverse()
        .ok_or_else(|| Error::Internal("degenerate north triangle in bridge".into()))?;
    if l.determinant() <= 0.0 {
        return Err(Error::Internal(
            "bridge triangles have opposite orientations".into(),
        ));
    }
    let c = w[0] - l * q[0];
    let m = Matrix3::new(
        l[(0, 0)], l[(0, 1)], -c.x,
        l[(1, 0)], l[(1, 1)], -c.y,
        0.0, 0.0, 1.0,
    );
    let svd = m.svd(true, true);
    let mut u = svd.u.ok_or_else(|| Error::SolveFailure("bridge SVD failed".into()))?;
    let mut vt = svd.v_t.ok_or_else(|| Error::SolveFailure("bridge SVD failed".into()))?;
    let sigma = svd.singular_values;
    if u.determinant() < 0.0 {
        let j = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        u *= j;
        vt = j * vt;
    }
    if sigma.min() <= 0.0 || (u.determinant() - 1.0).abs() > 1e-9
        || (vt.determinant() - 1.0).abs() > 1e-9
    {
        return Err(Error::Internal("bridge decomposition is not orientation-preserving".into()));
    }

    let conj = |r: Matrix3<f64>| -> Rotation3<f64> {
        frame.inverse() * Rotation3::from_matrix_unchecked(r) * frame
    };
    let mut stages = Vec::with_capacity(5);
    let mut cur = start.to_vec();
    let push_rotation = |stages: &mut Vec<MorphStage>, cur: &mut Vec<Vec3>, r: Rotation3<f64>| {
        let stage = rotate_stage(cur.clone(), r, faces.to_vec(), vec![exempt], frames);
        *cur = stage.end().to_vec();
        stages.push(stage);
    };
    push_rotation(&mut stages, &mut cur, conj(vt));
    for (k, axis_frame) in [Vec3::x(), Vec3::y(), Vec3::z()].into_iter().enumerate() {
        let axis = frame.inverse() * axis_frame;
        let factor = sigma[k];
        let end: Vec<Vec3> = cur
            .iter()
            .map(|v| {
                let along = (frame * v).dot(&axis_frame);
                v + axis * ((factor - 1.0) * along)
            })
            .collect();
        let stage = MorphStage {
            kind: StageKind::RotatedLongitudinal { axis },
            start: cur.clone(),
            end: end.clone(),
            faces: faces.to_vec(),
            exempt: vec![exempt],
            frames: frames.max(1),
        };
        cur = end;
        stages.push(stage);
    }
    push_rotation(&mut stages, &mut cur, conj(u));
    for i in 0..3 {
        let landed = chart(&cur, fverts[i])?;
        if (landed - w[i]).norm() > 1e-6 * (1.0 + w[i].norm()) {
            return Err(Error::Internal(
                "bridge did not land on the target triangle".into(),
            ));
        }
    }
    Ok((stages, cur))
}

/// Stages of one half: pose (and sink, unless already southern), bridge,
/// planar morph into the intermediate's coordinates.
fn build_half(
    t: &SphereTriangulation,
    pose: HalfPose,
    f: usize,
    intermediate: &[Vec3],
    frames: usize,
) -> Result<Vec<MorphStage>> {
    let faces = t.faces().to_vec();
    let fverts = t.face(f);
    let mut stages = Vec::new();
    let southern: Vec<Vec3> = match pose {
        HalfPose::Full {
            rotation,
            posed,
            snap,
        } => {
            stages.push(MorphStage {
                kind: StageKind::Rotate(rotation),
                start: t.vertices().to_vec(),
                end: posed.vertices().to_vec(),
                faces: faces.clone(),
                exempt: vec![],
                frames: frames.max(1),
            });
            stages.push(MorphStage {
                kind: StageKind::Longitudinal,
                start: posed.vertices().to_vec(),
                end: snap.end.clone(),
                faces: faces.clone(),
                exempt: vec![f],
                frames: frames.max(1),
            });
            snap.end
        }
        HalfPose::Fast { rotation, posed } => {
            stages.push(MorphStage {
                kind: StageKind::Rotate(rotation),
                start: t.vertices().to_vec(),
                end: posed.vertices().to_vec(),
                faces: faces.clone(),
                exempt: vec![f],
                frames: frames.max(1),
            });
            posed.vertices().to_vec()
        }
    };
    let (bridge, bridged) = bridge_stages(
        &southern,
        &faces,
        f,
        fverts,
        &Vec3::z(),
        intermediate,
        frames,
    )?;
    stages.extend(bridge);
    stages.push(planar_stage(
        bridged,
        intermediate.to_vec(),
        faces,
        f,
        &Vec3::z(),
        frames,
    )?);
    Ok(stages)
}

/// Morph plan from `t0` to `t1` through a sunk coherent intermediate.
///
/// Both halves must agree on the combinatorial north face: the source pose
/// is found by random search (with an exact fallback), then the target pose
/// is searched inside the same face's region; non-full inputs skip sinking
/// and are rotated directly into the southern hemisphere, which forces the
/// shared face to be their everted face.
pub fn full_pipeline(
    t0: &SphereTriangulation,
    t1: &SphereTriangulation,
    opts: &PipelineOptions,
) -> Result<MorphPlan> {
    let tol = opts.tol;
    let frames = opts.frames_per_stage;
    let budget = opts.rotation_budget.max(1);
    let t1w = align_target(t0, t1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut attempted: Vec<Vec3> = Vec::new();

    let ev0 = everted_face(t0, tol);
    let ev1 = everted_face(&t1w, tol);
    let (f, pose0, pose1) = match (ev0, ev1) {
        (Some(g0), Some(g1)) => {
            if g0 != g1 {
                return Err(Error::MorphFailure(
                    "both inputs are non-full with different everted faces".into(),
                ));
            }
            let (r0, p0) = southern_pose(t0, g0, &mut rng, budget)?;
            let (r1, p1) = southern_pose(&t1w, g1, &mut rng, budget)?;
            (
                g0,
                HalfPose::Fast {
                    rotation: r0,
                    posed: p0,
                },
                HalfPose::Fast {
                    rotation: r1,
                    posed: p1,
                },
            )
        }
        (Some(g0), None) => {
            let (r0, p0) = southern_pose(t0, g0, &mut rng, budget)?;
            let (r1, p1, s1) =
                constrained_pose(&t1w, g0, &mut rng, budget, tol, &mut attempted)?
                    .ok_or(Error::NoSinkableRotationFound {
                        attempted: attempted.clone(),
                    })?;
            (
                g0,
                HalfPose::Fast {
                    rotation: r0,
                    posed: p0,
                },
                HalfPose::Full {
                    rotation: r1,
                    posed: p1,
                    snap: s1,
                },
            )
        }
        (None, Some(g1)) => {
            let (r0, p0, s0) =
                constrained_pose(t0, g1, &mut rng, budget, tol, &mut attempted)?
                    .ok_or(Error::NoSinkableRotationFound {
                        attempted: attempted.clone(),
                    })?;
            let (r1, p1) = southern_pose(&t1w, g1, &mut rng, budget)?;
            (
                g1,
                HalfPose::Full {
                    rotation: r0,
                    posed: p0,
                    snap: s0,
                },
                HalfPose::Fast {
                    rotation: r1,
                    posed: p1,
                },
            )
        }
        (None, None) => {
            let first = unconstrained_pose(t0, &mut rng, budget, tol, &mut attempted)?;
            let mut found = None;
            if let Some((r0, p0, s0)) = first {
                let face = s0.north;
                if let Some(h1) =
                    constrained_pose(&t1w, face, &mut rng, budget, tol, &mut attempted)?
                {
                    found = Some((face, (r0, p0, s0), h1));
                }
            }
            // Joint retry: fresh source poses, each with a short constrained
            // search on the target side.
            if found.is_none() {
                'joint: for _ in 0..16 {
                    let dir = random_direction(&mut rng);
                    attempted.push(dir);
                    let Some((r0, p0, s0)) = try_pose(t0, &dir, tol)? else {
                        continue;
                    };
                    let face = s0.north;
                    if let Some(h1) =
                        constrained_pose(&t1w, face, &mut rng, 8, tol, &mut attempted)?
                    {
                        found = Some((face, (r0, p0, s0), h1));
                        break 'joint;
                    }
                }
            }
            let Some((face, (r0, p0, s0), (r1, p1, s1))) = found else {
                return Err(Error::NoSinkableRotationFound { attempted });
            };
            (
                face,
                HalfPose::Full {
                    rotation: r0,
                    posed: p0,
                    snap: s0,
                },
                HalfPose::Full {
                    rotation: r1,
                    posed: p1,
                    snap: s1,
                },
            )
        }
    };

    let c = realize_with_outer(t0, f, tol)?;
    let intermediate = sink_posed_intermediate(&c, f, &Vec3::z(), &mut rng, tol)?;

    let mut stages = build_half(t0, pose0, f, &intermediate, frames)?;
    let back = build_half(&t1w, pose1, f, &intermediate, frames)?;
    stages.extend(back.into_iter().rev().map(|s| s.reversed()));
    Ok(MorphPlan {
        stages,
        source: t0.clone(),
        target: t1w,
        refinement: None,
    })
}

/// Midpoint refinement of the intermediate matching `map`: original
/// coordinates verbatim, each bend vertex on the geodesic midpoint of its
/// original edge, and the refined face list. The bends are flat, so
/// restricted to the original graph this is the same drawing.
fn apply_matching_refinement(
    intermediate: &[Vec3],
    map: &RefinementMap,
    refined_n: usize,
    refined_faces: &[[usize; 3]],
    tol: Tolerance,
) -> Result<Vec<Vec3>> {
    let n = intermediate.len();
    if refined_n != n + map.bend_of_edge.len() {
        return Err(Error::Internal("refinement bookkeeping is inconsistent".into()));
    }
    let mut verts = vec![Vec3::zeros(); refined_n];
    verts[..n].copy_from_slice(intermediate);
    for (&(i, j), &m) in &map.bend_of_edge {
        verts[m] = intermediate[i].normalize() + intermediate[j].normalize();
    }
    let violations = validate_parts(&verts, refined_faces, tol);
    if !violations.is_empty() {
        return Err(Error::Internal(format!(
            "midpoint refinement of the intermediate is invalid: {}",
            violations[0]
        )));
    }
    Ok(verts)
}

fn refine_at_north_vertex(
    t: &SphereTriangulation,
    pole: &Vec3,
    north: usize,
    tol: Tolerance,
) -> Result<(SphereTriangulation, RefinementMap)> {
    let mut last = None;
    for v in t.face(north) {
        match refine_along_seam(t, pole, v, tol) {
            Ok(r) => return Ok(r),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Internal("north face has no vertices".into())))
}

/// One-bend morph: both inputs are seam-refined at `pole`, which makes them
/// sinkable there outright (no rotation search), and the refined halves meet
/// at midpoint refinements of the same sunk coherent intermediate. The
/// refinement vertices are bends of original edges: each original edge gains
/// at most one bend, and at the junction and the plan endpoints the bends
/// are flat on their edges.
pub fn one_bend_morph(
    t0: &SphereTriangulation,
    t1: &SphereTriangulation,
    pole: &Vec3,
    opts: &PipelineOptions,
) -> Result<MorphPlan> {
    let tol = opts.tol;
    let frames = opts.frames_per_stage;
    let punit = pole.normalize();
    let pole = &punit;
    let t1w = align_target(t0, t1)?;
    if everted_face(t0, tol).is_some() || everted_face(&t1w, tol).is_some() {
        return Err(Error::MorphFailure(
            "one-bend morphs need full inputs".into(),
        ));
    }
    let f0 = pole_analysis(t0, pole, tol)?.north;

    // Pose the target to share the north face, rotating only if needed.
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let needs_rotation = match pole_analysis(&t1w, pole, tol) {
        Ok(a) => a.north != f0,
        Err(Error::DegenerateDirection(_)) => true,
        Err(e) => return Err(e),
    };
    let (rot1, t1p) = if !needs_rotation {
        (None, t1w.clone())
    } else {
        let fverts = t1w.face(f0);
        let mut posed = None;
        for attempt in 0..16 {
            let weights = if attempt == 0 {
                [1.0, 1.0, 1.0]
            } else {
                [0; 3].map(|_| rng.gen_range(0.05..1.0))
            };
            let u = face_interior_dir(&t1w, fverts, weights);
            let r = rotation_taking(&u, pole);
            let cand = t1w.rotated(&r);
            if matches!(pole_analysis(&cand, pole, tol), Ok(a) if a.north == f0) {
                posed = Some((r, cand));
                break;
            }
        }
        let (r, cand) = posed.ok_or_else(|| {
            Error::MorphFailure("could not pose the target on the shared north face".into())
        })?;
        (Some(r), cand)
    };

    let (r0, map0) = refine_at_north_vertex(t0, pole, f0, tol)?;
    let (r1, map1) = refine_at_north_vertex(&t1p, pole, f0, tol)?;
    let f0r = {
        let fm = &map0.face_map[f0];
        if fm.len() != 1 {
            return Err(Error::Internal("seam refinement split the north face".into()));
        }
        fm[0]
    };
    let f1r = {
        let fm = &map1.face_map[f0];
        if fm.len() != 1 {
            return Err(Error::Internal("seam refinement split the north face".into()));
        }
        fm[0]
    };

    let not_sinkable =
        || Error::MorphFailure("seam-refined input did not sink at the pole".into());
    let (sink0, n0) = sink_stage(&r0, pole, tol, frames)?.ok_or_else(not_sinkable)?;
    let (sink1, n1) = sink_stage(&r1, pole, tol, frames)?.ok_or_else(not_sinkable)?;
    if n0 != f0r || n1 != f1r {
        return Err(Error::Internal(
            "refined north face does not contain the pole".into(),
        ));
    }

    let c = realize_with_outer(t0, f0, tol)?;
    let intermediate = sink_posed_intermediate(&c, f0, pole, &mut rng, tol)?;
    let ca = apply_matching_refinement(&intermediate, &map0, r0.n(), r0.faces(), tol)?;
    let cb = apply_matching_refinement(&intermediate, &map1, r1.n(), r1.faces(), tol)?;

    let fverts = t0.face(f0);
    let (bridge_a, bridged_a) =
        bridge_stages(sink0.end(), r0.faces(), f0r, fverts, pole, &ca, frames)?;
    let mut stages = vec![sink0];
    stages.extend(bridge_a);
    stages.push(planar_stage(
        bridged_a,
        ca,
        r0.faces().to_vec(),
        f0r,
        pole,
        frames,
    )?);
    let split = stages.len();

    let (bridge_b, bridged_b) =
        bridge_stages(sink1.end(), r1.faces(), f1r, fverts, pole, &cb, frames)?;
    let mut back = vec![sink1];
    back.extend(bridge_b);
    back.push(planar_stage(
        bridged_b,
        cb,
        r1.faces().to_vec(),
        f1r,
        pole,
        frames,
    )?);
    stages.extend(back.into_iter().rev().map(|s| s.reversed()));

    if let Some(r) = rot1 {
        // Rotate the refined target back; originals land on the target's
        // stored coordinates exactly.
        let inv = r.inverse();
        let mut end: Vec<Vec3> = t1w.vertices().to_vec();
        end.extend(r1.vertices()[t1w.n()..].iter().map(|v| inv * v));
        stages.push(MorphStage {
            kind: StageKind::Rotate(inv),
            start: r1.vertices().to_vec(),
            end,
            faces: r1.faces().to_vec(),
            exempt: vec![],
            frames: frames.max(1),
        });
    }

    Ok(MorphPlan {
        stages,
        source: t0.clone(),
        target: t1w,
        refinement: Some(RefinementBookkeeping {
            source: map0,
            target: map1,
            split,
        }),
    })
}
