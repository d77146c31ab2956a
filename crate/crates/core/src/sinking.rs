//! Sinkability: deciding whether a triangulation admits a longitudinal morph
//! that carries every vertex strictly into the southern hemisphere.
//!
//! Feasibility of the southern target is a linear program over the new
//! z-coordinates: the north-face vertices are pinned to z' = -1 and every
//! non-polar face must keep a nonnegative volume. The optimum, when the
//! associated square system is nonsingular, makes every down-face exactly
//! degenerate, so solving that system and checking feasibility of the result
//! decides sinkability outright. Shellable inputs admit the same solution by
//! pure back-substitution along a shelling order ([`ah_embed`]).
//!
//! Edges along a longitude are supported: such an edge pins its endpoints to
//! a common ray, and since both faces flanking the edge state that same
//! degeneracy, exactly one of them contributes a row.
//!
//! All z' vectors are expressed in the frame rotated so the pole is +z.

use nalgebra::{DMatrix, DVector, Rotation3};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::shelling::{pole_analysis, ShellingOrder};
use crate::sphere::{random_direction, rotation_about_axis, Tolerance, Vec3};
use crate::triangulation::{FaceLabel, SphereTriangulation};
use crate::{Error, Result};

/// Rotation taking `pole` to +z.
fn pole_frame(pole: &Vec3) -> Rotation3<f64> {
    Rotation3::rotation_between(pole, &Vec3::z())
        .unwrap_or_else(|| Rotation3::from_axis_angle(&nalgebra::Vector3::x_axis(), std::f64::consts::PI))
}

/// Cofactors of the z-column of vol(p_i, p_j, p_k): the coefficients of
/// (z_i, z_j, z_k) with x, y held fixed.
fn z_cofactors(pi: &Vec3, pj: &Vec3, pk: &Vec3) -> [f64; 3] {
    [
        pj.x * pk.y - pk.x * pj.y,
        pk.x * pi.y - pi.x * pk.y,
        pi.x * pj.y - pj.x * pi.y,
    ]
}

/// The n-by-n decision system: one pinning row per north-face vertex, one
/// degeneracy row per down face and per seam edge.
#[derive(Debug, Clone)]
pub struct SinkSystem {
    matrix: DMatrix<f64>,
    rhs: DVector<f64>,
    /// Vertices in the pole frame; x and y feed the rows, z is kept for
    /// consistency checks and morph starting points.
    frame_vertices: Vec<Vec3>,
    north: usize,
    south: usize,
    /// Face index answering for row 3 + r: the down faces, then one flank
    /// face per seam edge.
    down_rows: Vec<usize>,
    /// Largest absolute input coordinate, the scale for tolerances.
    scale: f64,
}

impl SinkSystem {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn n(&self) -> usize {
        self.rhs.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Input vertices rotated into the pole frame.
    pub fn frame_vertices(&self) -> &[Vec3] {
        &self.frame_vertices
    }

    /// The face whose vertices are pinned to z' = -1.
    pub fn north_face(&self) -> usize {
        self.north
    }

    pub fn south_face(&self) -> usize {
        self.south
    }
}

/// Assembles the decision system for `(t, pole)`.
pub fn build_sink_system(
    t: &SphereTriangulation,
    pole: &Vec3,
    tol: Tolerance,
) -> Result<SinkSystem> {
    let analysis = pole_analysis(t, pole, tol)?;
    let rot = pole_frame(pole);
    let frame_vertices: Vec<Vec3> = t.vertices().iter().map(|v| rot * v).collect();
    let n = t.n();
    let mut down_rows: Vec<usize> = analysis.down_faces.iter().map(|&(f, _)| f).collect();
    for &(i, j) in &analysis.seam_edges {
        down_rows.push(t.face_left_of(i, j).expect("closed surface"));
    }
    if 3 + down_rows.len() != n {
        return Err(Error::DegenerateDirection(format!(
            "expected {} degeneracy rows, found {}",
            n - 3,
            down_rows.len()
        )));
    }
    let mut matrix = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for (row, &v) in t.face(analysis.north).iter().enumerate() {
        matrix[(row, v)] = 1.0;
        rhs[row] = -1.0;
    }
    for (r, &f) in down_rows.iter().enumerate() {
        let [i, j, k] = t.face(f);
        let c = z_cofactors(&frame_vertices[i], &frame_vertices[j], &frame_vertices[k]);
        let row = 3 + r;
        matrix[(row, i)] = c[0];
        matrix[(row, j)] = c[1];
        matrix[(row, k)] = c[2];
    }
    let scale = frame_vertices
        .iter()
        .flat_map(|v| v.iter().map(|c| c.abs()))
        .fold(0.0, f64::max);
    Ok(SinkSystem {
        matrix,
        rhs,
        frame_vertices,
        north: analysis.north,
        south: analysis.south,
        down_rows,
        scale,
    })
}

/// Result of factoring and solving a [`SinkSystem`].
#[derive(Debug, Clone)]
pub enum SystemSolution {
    Solved { z: Vec<f64>, residual: f64 },
    Singular { pivot_ratio: f64 },
}

/// Solves the system by LU with partial pivoting. Rank deficiency is a
/// verdict, not an error: the singularity conjectures are left open, so a
/// singular system yields neither a witness nor a refutation.
pub fn solve_sink_system(system: &SinkSystem) -> SystemSolution {
    let lu = system.matrix.clone().lu();
    let diag = lu.u().map_diagonal(f64::abs);
    let max_pivot = diag.max();
    let min_pivot = diag.min();
    let pivot_ratio = if max_pivot > 0.0 {
        min_pivot / max_pivot
    } else {
        0.0
    };
    if pivot_ratio < 1e-12 {
        return SystemSolution::Singular { pivot_ratio };
    }
    let Some(z) = lu.solve(&system.rhs) else {
        return SystemSolution::Singular { pivot_ratio };
    };
    let residual = (&system.matrix * &z - &system.rhs).norm()
        / (system.matrix.norm() * z.norm() + system.rhs.norm());
    SystemSolution::Solved {
        z: z.iter().copied().collect(),
        residual,
    }
}

/// Feasibility diagnostics for a candidate z' vector.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// Smallest vol' over non-polar faces; feasibility wants this above
    /// minus the tolerance.
    pub min_nonpolar_vol: f64,
    /// Largest |vol'| over down faces; the system solution drives this to 0.
    pub max_down_abs_vol: f64,
    /// Largest z' entry; a southern witness keeps this negative.
    pub max_z: f64,
    /// Whether any decisive quantity sits within ten tolerances of the
    /// boundary, signalling a verdict that smaller tolerances could flip.
    pub near_boundary: bool,
}

pub(crate) fn feasibility(
    system: &SinkSystem,
    t: &SphereTriangulation,
    z: &[f64],
) -> FeasibilityReport {
    let scale = system
        .scale
        .max(z.iter().fold(0.0, |m, v| f64::max(m, v.abs())));
    let tau = 1e-8 * scale * scale * scale;

    let vol_prime = |f: usize| {
        let [i, j, k] = t.face(f);
        let c = z_cofactors(
            &system.frame_vertices[i],
            &system.frame_vertices[j],
            &system.frame_vertices[k],
        );
        c[0] * z[i] + c[1] * z[j] + c[2] * z[k]
    };

    let mut is_row_face = vec![false; t.faces().len()];
    for &f in &system.down_rows {
        is_row_face[f] = true;
    }
    let mut min_nonpolar_vol = f64::INFINITY;
    let mut max_down_abs_vol: f64 = 0.0;
    for f in 0..t.faces().len() {
        if f == system.north || f == system.south {
            continue;
        }
        let v = vol_prime(f);
        min_nonpolar_vol = min_nonpolar_vol.min(v);
        if is_row_face[f] {
            max_down_abs_vol = max_down_abs_vol.max(v.abs());
        }
    }
    let max_z = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let north_ok = t
        .face(system.north)
        .iter()
        .all(|&v| (z[v] + 1.0).abs() <= tau.max(1e-12));
    let feasible = north_ok && min_nonpolar_vol >= -tau && max_z < 0.0;
    let near_boundary = min_nonpolar_vol.abs() <= 10.0 * tau || max_z.abs() <= 10.0 * tau;
    FeasibilityReport {
        feasible,
        min_nonpolar_vol,
        max_down_abs_vol,
        max_z,
        near_boundary,
    }
}

/// Checks whether `z` is a feasible southern witness for `(t, pole)`: north
/// face pinned at -1, no non-polar face inverted, every vertex strictly
/// below the equator.
pub fn check_lp_feasible(
    t: &SphereTriangulation,
    pole: &Vec3,
    z: &[f64],
    tol: Tolerance,
) -> Result<FeasibilityReport> {
    let system = build_sink_system(t, pole, tol)?;
    Ok(feasibility(&system, t, z))
}

/// Incremental southern embedding along a longitudinal shelling order: the
/// north-face vertices start at z' = -1 and each down face in order drops
/// its apex to the unique height making the face degenerate.
pub fn ah_embed(
    t: &SphereTriangulation,
    pole: &Vec3,
    order: &ShellingOrder,
    tol: Tolerance,
) -> Result<Vec<f64>> {
    let class = t.classify_faces(pole, tol)?;
    let rot = pole_frame(pole);
    let frame_vertices: Vec<Vec3> = t.vertices().iter().map(|v| rot * v).collect();
    if order.len() != t.faces().len() || order.faces().first() != Some(&class.north) {
        return Err(Error::InvalidShellingOrder(
            "order does not start at the north face or has wrong length".into(),
        ));
    }
    let mut z = vec![f64::NAN; t.n()];
    for &v in &t.face(class.north) {
        z[v] = -1.0;
    }
    for &f in &order.faces()[1..] {
        if class.labels[f] != FaceLabel::Down {
            continue;
        }
        let apex = class.apex[f].expect("down face has an apex");
        let [i, j, k] = t.face(f);
        let c = z_cofactors(&frame_vertices[i], &frame_vertices[j], &frame_vertices[k]);
        let (mut acc, mut c_apex) = (0.0, 0.0);
        for (v, cv) in [(i, c[0]), (j, c[1]), (k, c[2])] {
            if v == apex {
                c_apex = cv;
            } else {
                if z[v].is_nan() {
                    return Err(Error::InvalidShellingOrder(format!(
                        "face {f} placed before its base vertex {v}"
                    )));
                }
                acc += cv * z[v];
            }
        }
        if c_apex.abs() <= tol.rel * frame_vertices[apex].norm_squared() {
            return Err(Error::DegenerateDirection(format!(
                "base of face {f} spans no longitude range"
            )));
        }
        if !z[apex].is_nan() {
            return Err(Error::InvalidShellingOrder(format!(
                "vertex {apex} is the apex of two placed faces"
            )));
        }
        z[apex] = -acc / c_apex;
    }
    if z.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidShellingOrder(
            "order leaves vertices unplaced".into(),
        ));
    }
    Ok(z)
}

/// Sinkability verdict plus the numbers behind it.
#[derive(Debug, Clone)]
pub struct SinkResult {
    pub outcome: SinkOutcome,
    /// Absent when the system is singular: there is no candidate to measure.
    pub diagnostics: Option<FeasibilityReport>,
    /// Relative residual of the linear solve, when one happened.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum SinkOutcome {
    /// The system solution is a feasible southern witness, expressed in the
    /// pole frame.
    Sinkable(Vec<f64>),
    /// The system solution violates feasibility, which refutes every other
    /// candidate as well.
    Unsinkable,
    /// The system is rank-deficient; sinkability is undecided.
    Singular { pivot_ratio: f64 },
}

impl SinkResult {
    pub fn is_sinkable(&self) -> bool {
        matches!(self.outcome, SinkOutcome::Sinkable(_))
    }

    pub fn witness(&self) -> Option<&[f64]> {
        match &self.outcome {
            SinkOutcome::Sinkable(z) => Some(z),
            _ => None,
        }
    }
}

/// Decides sinkability of `(t, pole)` by solving the decision system and
/// checking feasibility of the unique candidate.
pub fn is_sinkable(t: &SphereTriangulation, pole: &Vec3, tol: Tolerance) -> Result<SinkResult> {
    let system = build_sink_system(t, pole, tol)?;
    match solve_sink_system(&system) {
        SystemSolution::Singular { pivot_ratio } => Ok(SinkResult {
            outcome: SinkOutcome::Singular { pivot_ratio },
            diagnostics: None,
            residual: None,
        }),
        SystemSolution::Solved { z, residual } => {
            let report = feasibility(&system, t, &z);
            let outcome = if report.feasible {
                SinkOutcome::Sinkable(z)
            } else {
                SinkOutcome::Unsinkable
            };
            Ok(SinkResult {
                outcome,
                diagnostics: Some(report),
                residual: Some(residual),
            })
        }
    }
}

/// Breaks a singular tie by re-testing at slightly rotated poles: up to 8
/// seeded tilts of `1e-7` radians, returning the first decided verdict and
/// the pole that produced it. `None` when every tilt stays singular or
/// degenerate. The caller reports both outcomes; the original singular
/// verdict is never hidden.
pub fn retry_singular_with_rotation(
    t: &SphereTriangulation,
    pole: &Vec3,
    tol: Tolerance,
    seed: u64,
) -> Result<Option<(Vec3, SinkResult)>> {
    const TILT: f64 = 1e-7;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..8 {
        let axis = random_direction(&mut rng);
        let jittered = rotation_about_axis(&axis, TILT)? * pole;
        match is_sinkable(t, &jittered, tol) {
            Ok(result) => {
                if !matches!(result.outcome, SinkOutcome::Singular { .. }) {
                    return Ok(Some((jittered, result)));
                }
            }
            Err(Error::DegenerateDirection(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}
