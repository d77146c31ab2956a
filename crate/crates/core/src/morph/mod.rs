//! Morphs between isomorphic spherical triangulations: rotation stages,
//! longitudinal stages along a pole axis, and planar barycentric stages in
//! the gnomonic chart, chained into validated plans.
//!
//! Coordinates are signed homogeneous vectors throughout. Stages store both
//! endpoint coordinate arrays explicitly and consecutive stages share the
//! endpoint array verbatim, so plans chain exactly. Where a stage is allowed
//! to carry one everted face (the north face while sunk), that face is
//! listed as exempt from the positivity checks.

pub mod planar;
pub mod pipeline;
pub mod realize;

pub use pipeline::{full_pipeline, one_bend_morph, PipelineOptions, RefinementBookkeeping};
pub use planar::{planar_morph_barycentric, PlanarTriangulation, PlanarWeights};
pub use realize::coherent_realization;

use nalgebra::Rotation3;
use serde::Serialize;

use crate::sinking::{build_sink_system, feasibility, solve_sink_system, SystemSolution};
use crate::sphere::{pole_to_north, vol, Tolerance, Vec3};
use crate::triangulation::{validate_parts, SphereTriangulation};
use crate::{Error, Result};

use planar::{interpolate_weights, solve_positions, PlanarWeights as Weights, Vec2};

/// Data driving a planar barycentric stage: everything needed to re-solve
/// the convex-combination system at any parameter and lift the drawing back
/// through the gnomonic chart at `pole`.
#[derive(Debug, Clone)]
pub struct PlanarStageData {
    pub(crate) pole: Vec3,
    /// Rotation taking `pole` to +z; the chart lives in this frame.
    pub(crate) frame: Rotation3<f64>,
    pub(crate) boundary: [usize; 3],
    pub(crate) weights_start: Weights,
    pub(crate) weights_end: Weights,
    pub(crate) boundary_start: [Vec2; 3],
    pub(crate) boundary_end: [Vec2; 3],
}

#[derive(Debug, Clone)]
pub enum StageKind {
    /// Rigid rotation, interpolated through the rotation group.
    Rotate(Rotation3<f64>),
    /// Vertices move along their longitudes: x and y are fixed per vertex
    /// and only z interpolates. The pole is +z.
    Longitudinal,
    /// Vertices translate along lines parallel to `axis` in coordinate
    /// space; every face volume is affine in the stage parameter.
    RotatedLongitudinal { axis: Vec3 },
    /// Planar barycentric morph in the gnomonic chart, lifted back to the
    /// sphere.
    PlanarBarycentric(Box<PlanarStageData>),
}

impl StageKind {
    fn name(&self) -> &'static str {
        match self {
            StageKind::Rotate(_) => "rotate",
            StageKind::Longitudinal => "longitudinal",
            StageKind::RotatedLongitudinal { .. } => "rotated_longitudinal",
            StageKind::PlanarBarycentric(_) => "planar_barycentric",
        }
    }
}

/// One stage of a morph: explicit endpoint coordinate arrays, the face list
/// they triangulate, the faces exempt from positivity (at most the everted
/// north face), and a frame count for sampling.
#[derive(Debug, Clone)]
pub struct MorphStage {
    pub kind: StageKind,
    pub(crate) start: Vec<Vec3>,
    pub(crate) end: Vec<Vec3>,
    pub(crate) faces: Vec<[usize; 3]>,
    pub(crate) exempt: Vec<usize>,
    pub frames: usize,
}

impl MorphStage {
    pub fn start(&self) -> &[Vec3] {
        &self.start
    }

    pub fn end(&self) -> &[Vec3] {
        &self.end
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn exempt_faces(&self) -> &[usize] {
        &self.exempt
    }

    pub fn n(&self) -> usize {
        self.start.len()
    }

    /// Coordinates at parameter `t` in [0, 1]. The endpoints return the
    /// stored arrays verbatim.
    pub fn frame(&self, t: f64) -> Result<Vec<Vec3>> {
        if t <= 0.0 {
            return Ok(self.start.clone());
        }
        if t >= 1.0 {
            return Ok(self.end.clone());
        }
        match &self.kind {
            StageKind::Rotate(r) => {
                let rt = r.powf(t);
                Ok(self.start.iter().map(|v| rt * v).collect())
            }
            StageKind::Longitudinal | StageKind::RotatedLongitudinal { .. } => Ok(self
                .start
                .iter()
                .zip(&self.end)
                .map(|(a, b)| a + (b - a) * t)
                .collect()),
            StageKind::PlanarBarycentric(d) => {
                let wt = interpolate_weights(&d.weights_start, &d.weights_end, t);
                let bt =
                    [0, 1, 2].map(|i| d.boundary_start[i].lerp(&d.boundary_end[i], t));
                let flat = solve_positions(&wt, d.boundary, bt)?;
                let back = d.frame.inverse();
                Ok(flat
                    .iter()
                    .map(|q| back * Vec3::new(q.x, q.y, -1.0))
                    .collect())
            }
        }
    }

    /// The same motion run backwards, with endpoints swapped.
    pub fn reversed(&self) -> MorphStage {
        let kind = match &self.kind {
            StageKind::Rotate(r) => StageKind::Rotate(r.inverse()),
            StageKind::Longitudinal => StageKind::Longitudinal,
            StageKind::RotatedLongitudinal { axis } => {
                StageKind::RotatedLongitudinal { axis: *axis }
            }
            StageKind::PlanarBarycentric(d) => StageKind::PlanarBarycentric(Box::new(
                PlanarStageData {
                    pole: d.pole,
                    frame: d.frame,
                    boundary: d.boundary,
                    weights_start: d.weights_end.clone(),
                    weights_end: d.weights_start.clone(),
                    boundary_start: d.boundary_end,
                    boundary_end: d.boundary_start,
                },
            )),
        };
        MorphStage {
            kind,
            start: self.end.clone(),
            end: self.start.clone(),
            faces: self.faces.clone(),
            exempt: self.exempt.clone(),
            frames: self.frames,
        }
    }

    /// `frames + 1` uniformly sampled snapshots including both endpoints.
    pub fn keyframes(&self) -> Result<Vec<Vec<Vec3>>> {
        let steps = self.frames.max(1);
        (0..=steps)
            .map(|s| self.frame(s as f64 / steps as f64))
            .collect()
    }
}

pub use crate::generators::RefinementMap;

/// An ordered chain of stages from `source` to `target`. Consecutive stages
/// share endpoint arrays; for refined plans the shared part is the original
/// vertex range.
#[derive(Debug, Clone)]
pub struct MorphPlan {
    pub stages: Vec<MorphStage>,
    pub(crate) source: SphereTriangulation,
    pub(crate) target: SphereTriangulation,
    pub refinement: Option<RefinementBookkeeping>,
}

impl MorphPlan {
    pub fn source(&self) -> &SphereTriangulation {
        &self.source
    }

    pub fn target(&self) -> &SphereTriangulation {
        &self.target
    }

    /// Writes the versioned morph JSON: per stage, its kind, face triples,
    /// and sampled coordinate frames. Faces are repeated per stage because
    /// refined plans change the complex between stages.
    pub fn write_json<W: std::io::Write>(&self, w: W) -> Result<()> {
        #[derive(Serialize)]
        struct StageJson {
            kind: &'static str,
            faces: Vec<[usize; 3]>,
            frames: Vec<Vec<[f64; 3]>>,
        }
        #[derive(Serialize)]
        struct PlanJson {
            version: u32,
            stages: Vec<StageJson>,
        }
        let mut stages = Vec::with_capacity(self.stages.len());
        for stage in &self.stages {
            let frames = stage
                .keyframes()?
                .into_iter()
                .map(|f| f.into_iter().map(|v| [v.x, v.y, v.z]).collect())
                .collect();
            stages.push(StageJson {
                kind: stage.kind.name(),
                faces: stage.faces.clone(),
                frames,
            });
        }
        serde_json::to_writer(
            w,
            &PlanJson {
                version: 1,
                stages,
            },
        )?;
        Ok(())
    }
}

/// First problem found while validating a plan.
#[derive(Debug, Clone, PartialEq)]
pub enum MorphViolation {
    /// A non-exempt face has nonpositive volume at a sampled frame.
    NegativeFace {
        stage: usize,
        t: f64,
        face: usize,
        vol: f64,
    },
    /// A stage's start does not match the previous stage's end (or the
    /// plan's endpoints do not match source/target).
    BrokenChain { stage: usize },
    /// A longitudinal stage moved a vertex off its longitude.
    LongitudeDrift { stage: usize, vertex: usize },
    /// A frame could not be computed (planar solve failure).
    SolveFailure { stage: usize, t: f64 },
}

impl std::fmt::Display for MorphViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MorphViolation::NegativeFace {
                stage,
                t,
                face,
                vol,
            } => write!(
                f,
                "stage {stage}, t = {t:.4}: face {face} has vol {vol:.3e}"
            ),
            MorphViolation::BrokenChain { stage } => {
                write!(f, "stage {stage} does not chain with its predecessor")
            }
            MorphViolation::LongitudeDrift { stage, vertex } => write!(
                f,
                "stage {stage}: vertex {vertex} drifted off its longitude"
            ),
            MorphViolation::SolveFailure { stage, t } => {
                write!(f, "stage {stage}, t = {t:.4}: frame solve failed")
            }
        }
    }
}

fn arrays_equal(a: &[Vec3], b: &[Vec3]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y)
}

fn restriction_equal(a: &[Vec3], b: &[Vec3], n: usize) -> bool {
    a.len() >= n && b.len() >= n && a[..n].iter().zip(&b[..n]).all(|(x, y)| x == y)
}

/// Validates a plan: exact chaining between stages (restricted to original
/// vertices at the refinement switch), fixed longitudes on longitudinal
/// stages, and positive volume of every non-exempt face at `samples_per_stage`
/// uniformly sampled parameters per stage. Returns the first violation in
/// stage-then-parameter order.
pub fn validate_morph(
    plan: &MorphPlan,
    samples_per_stage: usize,
) -> std::result::Result<(), MorphViolation> {
    use rayon::prelude::*;

    let n0 = plan.source.n();
    let split = plan.refinement.as_ref().map(|r| r.split);
    for (k, stage) in plan.stages.iter().enumerate() {
        if k == 0 {
            if !restriction_equal(&stage.start, plan.source.vertices(), n0) {
                return Err(MorphViolation::BrokenChain { stage: 0 });
            }
        } else {
            let prev = &plan.stages[k - 1].end;
            let ok = if split == Some(k) {
                restriction_equal(prev, &stage.start, n0)
            } else {
                arrays_equal(prev, &stage.start)
            };
            if !ok {
                return Err(MorphViolation::BrokenChain { stage: k });
            }
        }
        if k + 1 == plan.stages.len()
            && !restriction_equal(&stage.end, plan.target.vertices(), plan.target.n())
        {
            return Err(MorphViolation::BrokenChain {
                stage: plan.stages.len(),
            });
        }
        let scale = stage
            .start
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        match &stage.kind {
            StageKind::Longitudinal => {
                for (v, (a, b)) in stage.start.iter().zip(&stage.end).enumerate() {
                    if a.x != b.x || a.y != b.y {
                        return Err(MorphViolation::LongitudeDrift { stage: k, vertex: v });
                    }
                }
            }
            StageKind::RotatedLongitudinal { axis } => {
                let axis = axis.normalize();
                for (v, (a, b)) in stage.start.iter().zip(&stage.end).enumerate() {
                    if (b - a).cross(&axis).norm() > 1e-10 * scale {
                        return Err(MorphViolation::LongitudeDrift { stage: k, vertex: v });
                    }
                }
            }
            _ => {}
        }
    }

    let samples = samples_per_stage.max(1);
    for (k, stage) in plan.stages.iter().enumerate() {
        let mut skip = vec![false; stage.faces.len()];
        for &f in &stage.exempt {
            skip[f] = true;
        }
        let first = (0..=samples).into_par_iter().find_map_first(|s| {
            let t = s as f64 / samples as f64;
            let coords = match stage.frame(t) {
                Ok(c) => c,
                Err(_) => return Some(MorphViolation::SolveFailure { stage: k, t }),
            };
            for (fi, f) in stage.faces.iter().enumerate() {
                if skip[fi] {
                    continue;
                }
                let v = vol(&coords[f[0]], &coords[f[1]], &coords[f[2]]);
                if v <= 0.0 {
                    return Some(MorphViolation::NegativeFace {
                        stage: k,
                        t,
                        face: fi,
                        vol: v,
                    });
                }
            }
            None
        });
        if let Some(violation) = first {
            return Err(violation);
        }
    }
    Ok(())
}

/// Longitudinal morph of `t` between the two z-coordinate assignments, with
/// x and y copied from `t`'s coordinates. Both endpoints must be valid
/// (each may carry one everted face); per-face volume is then affine in the
/// parameter, so the whole stage is valid outside the exempt faces.
pub fn longitudinal_morph(
    t: &SphereTriangulation,
    z_start: &[f64],
    z_end: &[f64],
    frames: usize,
    tol: Tolerance,
) -> Result<MorphStage> {
    let n = t.n();
    if z_start.len() != n || z_end.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {n} z-coordinates per endpoint"
        )));
    }
    let column = |z: &[f64]| -> Vec<Vec3> {
        t.vertices()
            .iter()
            .zip(z)
            .map(|(v, &zz)| Vec3::new(v.x, v.y, zz))
            .collect()
    };
    let start = column(z_start);
    let end = column(z_end);
    let mut exempt = Vec::new();
    for (label, coords) in [("start", &start), ("end", &end)] {
        let violations = validate_parts(coords, t.faces(), tol);
        if !violations.is_empty() {
            return Err(Error::InvalidEndpoint(format!(
                "{label}: {}",
                violations[0]
            )));
        }
        for (fi, f) in t.faces().iter().enumerate() {
            if vol(&coords[f[0]], &coords[f[1]], &coords[f[2]]) < 0.0
                && !exempt.contains(&fi)
            {
                exempt.push(fi);
            }
        }
    }
    Ok(MorphStage {
        kind: StageKind::Longitudinal,
        start,
        end,
        faces: t.faces().to_vec(),
        exempt,
        frames: frames.max(1),
    })
}

/// A strictly southern snapshot reachable from `t` by a longitudinal morph
/// at `pole`.
#[derive(Debug, Clone)]
pub(crate) struct SinkSnapshot {
    pub end: Vec<Vec3>,
    pub north: usize,
}

/// Decides sinkability at `pole` and, when sinkable, builds the stopped
/// southern snapshot: the motion toward the witness is halted halfway
/// between the last equator crossing and the witness, keeping every vertex
/// strictly southern and every non-north face strictly positive. `None`
/// when the verdict is unsinkable or singular, or when the snapshot fails
/// strict validation.
pub(crate) fn sink_snapshot(
    t: &SphereTriangulation,
    pole: &Vec3,
    tol: Tolerance,
) -> Result<Option<SinkSnapshot>> {
    let system = build_sink_system(t, pole, tol)?;
    let zw = match solve_sink_system(&system) {
        SystemSolution::Singular { .. } => return Ok(None),
        SystemSolution::Solved { z, .. } => z,
    };
    if !feasibility(&system, t, &zw).feasible {
        return Ok(None);
    }
    let frame = system.frame_vertices();
    let mut tau: f64 = 0.0;
    for (i, v) in frame.iter().enumerate() {
        if v.z > 0.0 {
            tau = tau.max(v.z / (v.z - zw[i]));
        }
    }
    let t_stop = (tau + 1.0) / 2.0;
    let axis = pole.normalize();
    let end: Vec<Vec3> = t
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let z_now = frame[i].z;
            let z_mid = (1.0 - t_stop) * z_now + t_stop * zw[i];
            v + axis * (z_mid - z_now)
        })
        .collect();
    if !validate_parts(&end, t.faces(), tol).is_empty() {
        return Ok(None);
    }
    let north = system.north_face();
    Ok(Some(SinkSnapshot { end, north }))
}

/// Builds the longitudinal sink stage for `(t, pole)`: from `t`'s
/// coordinates to the stopped southern snapshot, plus the north face index.
/// `None` when not sinkable.
pub fn sink_stage(
    t: &SphereTriangulation,
    pole: &Vec3,
    tol: Tolerance,
    frames: usize,
) -> Result<Option<(MorphStage, usize)>> {
    let Some(snap) = sink_snapshot(t, pole, tol)? else {
        return Ok(None);
    };
    let kind = if *pole == Vec3::z() {
        StageKind::Longitudinal
    } else {
        StageKind::RotatedLongitudinal {
            axis: pole.normalize(),
        }
    };
    let north = snap.north;
    let stage = MorphStage {
        kind,
        start: t.vertices().to_vec(),
        end: snap.end,
        faces: t.faces().to_vec(),
        exempt: vec![north],
        frames: frames.max(1),
    };
    Ok(Some((stage, north)))
}

/// Strictly southern coordinates longitudinally reachable from `(t, pole)`,
/// or an error when the pair is unsinkable or undecided.
pub fn sink_target(t: &SphereTriangulation, pole: &Vec3, tol: Tolerance) -> Result<Vec<Vec3>> {
    match sink_snapshot(t, pole, tol)? {
        Some(snap) => Ok(snap.end),
        None => Err(Error::MorphFailure(
            "triangulation is not sinkable at this pole".into(),
        )),
    }
}

/// Rotation stage from `start` coordinates: the end array is the rotated
/// copy, stored explicitly.
pub(crate) fn rotate_stage(
    start: Vec<Vec3>,
    rotation: Rotation3<f64>,
    faces: Vec<[usize; 3]>,
    exempt: Vec<usize>,
    frames: usize,
) -> MorphStage {
    let end = start.iter().map(|v| rotation * v).collect();
    MorphStage {
        kind: StageKind::Rotate(rotation),
        start,
        end,
        faces,
        exempt,
        frames: frames.max(1),
    }
}

/// Planar barycentric stage between two southern coordinate arrays over the
/// same face list, morphing in the gnomonic chart at `pole` with face
/// `outer` as the fixed outer triangle.
pub(crate) fn planar_stage(
    start: Vec<Vec3>,
    end: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    outer: usize,
    pole: &Vec3,
    frames: usize,
) -> Result<MorphStage> {
    let frame = pole_to_north(pole);
    let project = |coords: &[Vec3]| -> Result<PlanarTriangulation> {
        let rotated: Vec<Vec3> = coords.iter().map(|v| frame * v).collect();
        PlanarTriangulation::from_southern(&rotated, &faces, outer)
    };
    let p0 = project(&start)?;
    let p1 = project(&end)?;
    let data = PlanarStageData {
        pole: *pole,
        frame,
        boundary: p0.boundary(),
        weights_start: planar::fit_weights(&p0)?,
        weights_end: planar::fit_weights(&p1)?,
        boundary_start: p0.boundary_points(),
        boundary_end: p1.boundary_points(),
    };
    Ok(MorphStage {
        kind: StageKind::PlanarBarycentric(Box::new(data)),
        start,
        end,
        faces,
        exempt: vec![outer],
        frames: frames.max(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::octahedron;

    /// Octahedron with the stopped sink heights at the +z pole; the raw
    /// witness itself is degenerate (down faces exactly flat), so the stage
    /// endpoints come from the stopped snapshot.
    fn octa_sink_endpoints() -> (SphereTriangulation, Vec<f64>, Vec<f64>) {
        let t = octahedron();
        let tol = Tolerance::default();
        let snap = sink_snapshot(&t, &Vec3::z(), tol)
            .unwrap()
            .expect("octahedron sinks at +z");
        let z0: Vec<f64> = t.vertices().iter().map(|v| v.z).collect();
        let zw: Vec<f64> = snap.end.iter().map(|v| v.z).collect();
        (t, z0, zw)
    }

    #[test]
    fn constant_morph_has_identical_frames() {
        let t = octahedron();
        let z: Vec<f64> = t.vertices().iter().map(|v| v.z).collect();
        let stage = longitudinal_morph(&t, &z, &z, 6, Tolerance::default()).unwrap();
        let frames = stage.keyframes().unwrap();
        assert_eq!(frames.len(), 7);
        for f in &frames {
            assert!(arrays_equal(f, stage.start()));
        }
    }

    #[test]
    fn octahedron_sink_morph_is_valid_and_ends_southern() {
        let (t, z0, zw) = octa_sink_endpoints();
        let stage = longitudinal_morph(&t, &z0, &zw, 24, Tolerance::default()).unwrap();
        for frame in stage.keyframes().unwrap() {
            let mut negatives = 0;
            for f in t.faces() {
                if vol(&frame[f[0]], &frame[f[1]], &frame[f[2]]) < 0.0 {
                    negatives += 1;
                }
            }
            assert!(negatives <= 1);
        }
        let last = stage.end();
        assert!(last.iter().all(|v| v.z < 0.0));
    }

    #[test]
    fn face_volumes_are_affine_in_t() {
        let (t, z0, zw) = octa_sink_endpoints();
        let stage = longitudinal_morph(&t, &z0, &zw, 2, Tolerance::default()).unwrap();
        let f0 = stage.frame(0.0).unwrap();
        let f1 = stage.frame(1.0).unwrap();
        let fm = stage.frame(0.5).unwrap();
        for f in t.faces() {
            let v0 = vol(&f0[f[0]], &f0[f[1]], &f0[f[2]]);
            let v1 = vol(&f1[f[0]], &f1[f[1]], &f1[f[2]]);
            let vm = vol(&fm[f[0]], &fm[f[1]], &fm[f[2]]);
            let mid = 0.5 * (v0 + v1);
            assert!((vm - mid).abs() <= 1e-12 * (v0.abs() + v1.abs()).max(1.0));
        }
    }

    #[test]
    fn longitudinal_stage_pins_x_and_y_bitwise() {
        let (t, z0, zw) = octa_sink_endpoints();
        let stage = longitudinal_morph(&t, &z0, &zw, 5, Tolerance::default()).unwrap();
        for frame in stage.keyframes().unwrap() {
            for (a, b) in frame.iter().zip(stage.start()) {
                assert!(a.x == b.x && a.y == b.y);
            }
        }
    }

    #[test]
    fn invalid_endpoint_is_rejected() {
        let t = octahedron();
        let z0: Vec<f64> = t.vertices().iter().map(|v| v.z).collect();
        // Collapsing every vertex to the equator is degenerate.
        let flat = vec![0.0; t.n()];
        assert!(matches!(
            longitudinal_morph(&t, &z0, &flat, 4, Tolerance::default()),
            Err(Error::InvalidEndpoint(_))
        ));
    }

    #[test]
    fn sink_target_is_strictly_southern_and_valid() {
        let t = octahedron();
        let tol = Tolerance::default();
        let target = sink_target(&t, &Vec3::z(), tol).unwrap();
        assert!(target.iter().all(|v| v.z < 0.0));
        assert!(validate_parts(&target, t.faces(), tol).is_empty());
        // x and y are untouched: the motion is along the pole axis.
        for (a, b) in target.iter().zip(t.vertices()) {
            assert!(a.x == b.x && a.y == b.y);
        }
    }

    #[test]
    fn sink_target_rejects_unsinkable_pose() {
        let t = crate::generators::schonhardt(&crate::generators::TwistParams::standard(0.6))
            .unwrap();
        assert!(matches!(
            sink_target(&t, &Vec3::z(), Tolerance::default()),
            Err(Error::MorphFailure(_))
        ));
    }

    #[test]
    fn reversed_stage_swaps_endpoints() {
        let (t, z0, zw) = octa_sink_endpoints();
        let stage = longitudinal_morph(&t, &z0, &zw, 3, Tolerance::default()).unwrap();
        let rev = stage.reversed();
        assert!(arrays_equal(rev.start(), stage.end()));
        assert!(arrays_equal(rev.end(), stage.start()));
        let mid_f = stage.frame(0.25).unwrap();
        let mid_r = rev.frame(0.75).unwrap();
        for (a, b) in mid_f.iter().zip(&mid_r) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_stage_validates_and_chains() {
        let t = octahedron();
        let rot = Rotation3::from_axis_angle(&Vec3::y_axis(), 0.8);
        let stage = rotate_stage(t.vertices().to_vec(), rot, t.faces().to_vec(), vec![], 10);
        let frames = stage.keyframes().unwrap();
        for frame in &frames {
            for f in t.faces() {
                assert!(vol(&frame[f[0]], &frame[f[1]], &frame[f[2]]) > 0.0);
            }
        }
        let end = stage.end();
        for (v, e) in t.vertices().iter().zip(end) {
            assert!((rot * v - e).norm() < 1e-14);
        }
    }

    #[test]
    fn validate_morph_reports_inverted_endpoint() {
        let (t, z0, zw) = octa_sink_endpoints();
        let stage = longitudinal_morph(&t, &z0, &zw, 4, Tolerance::default()).unwrap();
        // Un-exempt the north face: its eversion at t = 1 must be reported.
        let mut broken = stage.clone();
        broken.exempt.clear();
        let plan = MorphPlan {
            stages: vec![broken],
            source: t.clone(),
            target: t.with_vertices(stage.end().to_vec()).unwrap(),
            refinement: None,
        };
        match validate_morph(&plan, 4) {
            Err(MorphViolation::NegativeFace { stage: 0, t, .. }) => assert!(t > 0.5),
            other => panic!("expected a negative-face violation, got {other:?}"),
        }
    }

    #[test]
    fn validate_morph_accepts_the_sink_stage() {
        let (t, z0, zw) = octa_sink_endpoints();
        let stage = longitudinal_morph(&t, &z0, &zw, 4, Tolerance::default()).unwrap();
        let target = t.with_vertices(stage.end().to_vec()).unwrap();
        let plan = MorphPlan {
            stages: vec![stage],
            source: t,
            target,
            refinement: None,
        };
        assert_eq!(validate_morph(&plan, 16), Ok(()));
    }

    #[test]
    fn broken_chain_is_detected() {
        let (t, z0, zw) = octa_sink_endpoints();
        let stage = longitudinal_morph(&t, &z0, &zw, 4, Tolerance::default()).unwrap();
        let rev = stage.reversed();
        let mut shifted = rev.clone();
        shifted.start[0].x += 1e-9;
        let plan = MorphPlan {
            stages: vec![stage, shifted],
            source: t.clone(),
            target: t.clone(),
            refinement: None,
        };
        assert_eq!(
            validate_morph(&plan, 2),
            Err(MorphViolation::BrokenChain { stage: 1 })
        );
    }

    #[test]
    fn morph_json_has_versioned_stage_frames() {
        let (t, z0, zw) = octa_sink_endpoints();
        let stage = longitudinal_morph(&t, &z0, &zw, 3, Tolerance::default()).unwrap();
        let target = t.with_vertices(stage.end().to_vec()).unwrap();
        let plan = MorphPlan {
            stages: vec![stage],
            source: t,
            target,
            refinement: None,
        };
        let mut buf = Vec::new();
        plan.write_json(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["version"], 1);
        assert_eq!(v["stages"][0]["kind"], "longitudinal");
        assert_eq!(v["stages"][0]["frames"].as_array().unwrap().len(), 4);
        assert_eq!(
            v["stages"][0]["frames"][0].as_array().unwrap().len(),
            plan.source().n()
        );
    }
}
