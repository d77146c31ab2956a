//! Spherical primitives: homogeneous points, determinant predicates,
//! rotations, projections, and seedable random sampling.
//!
//! A point of the sphere is any nonzero vector in R^3; positive scalar
//! multiples name the same point. Every predicate here is the sign of a
//! determinant, so results are invariant under such rescaling.

use nalgebra::{Quaternion, Rotation3, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Relative zero-threshold for determinant signs. A determinant over points
/// p, q, r counts as zero when |det| <= rel * |p| |q| |r|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(rel: f64) -> Self {
        assert!(rel > 0.0, "tolerance must be positive");
        Tolerance { rel }
    }
}

/// Determinant of the 3x3 matrix with rows `p`, `q`, `r`.
///
/// Positive iff (p,q,r) is a right-handed frame, i.e. the spherical triangle
/// (p,q,r) winds counterclockwise seen from outside the sphere.
pub fn vol(p: &Vec3, q: &Vec3, r: &Vec3) -> f64 {
    p.dot(&q.cross(r))
}

/// Sign of [`vol`] under the relative cutoff: +1, -1, or 0 for "too close to
/// call". Zero is the caller's signal that the triple is not generic.
pub fn vol_sign(p: &Vec3, q: &Vec3, r: &Vec3, tol: Tolerance) -> i8 {
    let d = vol(p, q, r);
    if d.abs() <= tol.rel * p.norm() * q.norm() * r.norm() {
        0
    } else if d > 0.0 {
        1
    } else {
        -1
    }
}

/// Whether vertex `j` lies east of vertex `i`: the sign of
/// x_i y_j - x_j y_i, which equals vol(northPole, i, j).
///
/// +1 means the longitude of `j` is a counterclockwise (eastward) turn from
/// the longitude of `i`, seen from above the north pole. 0 means the pair
/// shares a longitude (or one point sits on the z-axis) and is not generic.
pub fn east_of(i: &Vec3, j: &Vec3, tol: Tolerance) -> i8 {
    let d = i.x * j.y - j.x * i.y;
    if d.abs() <= tol.rel * i.norm() * j.norm() {
        0
    } else if d > 0.0 {
        1
    } else {
        -1
    }
}

/// Rotation by `angle` radians about `axis` (right-hand rule).
pub fn rotation_about_axis(axis: &Vec3, angle: f64) -> Result<Rotation3<f64>> {
    let n = axis.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::InvalidInput("rotation axis must be nonzero".into()));
    }
    Ok(Rotation3::from_axis_angle(
        &nalgebra::Unit::new_normalize(*axis),
        angle,
    ))
}

/// A rotation taking the direction of `p` to the north pole (0,0,1).
///
/// For `p` at the south pole (where the minimal rotation is ambiguous) the
/// choice is a half-turn about the x-axis.
pub fn pole_to_north(p: &Vec3) -> Rotation3<f64> {
    match Rotation3::rotation_between(p, &Vec3::z()) {
        Some(r) => r,
        None => Rotation3::from_axis_angle(&Vec3::x_axis(), std::f64::consts::PI),
    }
}

/// Gnomonic (central) projection onto the plane z = -1:
/// (x,y,z) -> (-x/z, -y/z). Defined only on the open southern hemisphere;
/// maps geodesics to straight lines.
pub fn gnomonic_project(p: &Vec3) -> Result<[f64; 2]> {
    if p.z >= 0.0 {
        return Err(Error::InvalidInput(format!(
            "gnomonic projection needs z < 0, got z = {}",
            p.z
        )));
    }
    Ok([-p.x / p.z, -p.y / p.z])
}

/// Stereographic projection from the north pole: the input ray is scaled to
/// the unit sphere, then (x,y,z) -> (x/(1-z), y/(1-z)). Rejects the pole
/// itself and the zero vector.
pub fn stereographic_project(p: &Vec3) -> Result<[f64; 2]> {
    let n = p.norm();
    if n <= 1e-12 {
        return Err(Error::InvalidInput(
            "stereographic projection undefined for the zero vector".into(),
        ));
    }
    let u = p / n;
    let d = 1.0 - u.z;
    if d.abs() <= 1e-12 {
        return Err(Error::InvalidInput(
            "stereographic projection undefined at the north pole".into(),
        ));
    }
    Ok([u.x / d, u.y / d])
}

/// Uniformly distributed unit vector: three standard normals, normalized.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// Uniformly distributed rotation (Shoemake's method via a random unit
/// quaternion).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation3<f64> {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    let u3: f64 = rng.gen();
    let tau = std::f64::consts::TAU;
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    let q = Quaternion::new(
        b * (tau * u3).cos(),
        a * (tau * u2).sin(),
        a * (tau * u2).cos(),
        b * (tau * u3).sin(),
    );
    UnitQuaternion::from_quaternion(q).to_rotation_matrix()
}

/// Point a fraction `t` of the way along the shorter great-circle arc from
/// `a` to `b`. Inputs may be any nonzero length; the result is unit length.
pub fn slerp(a: &Vec3, b: &Vec3, t: f64) -> Vec3 {
    let ua = a.normalize();
    let ub = b.normalize();
    let cos = ua.dot(&ub).clamp(-1.0, 1.0);
    let angle = cos.acos();
    if angle < 1e-9 {
        return (ua.lerp(&ub, t)).normalize();
    }
    let s = angle.sin();
    (ua * ((1.0 - t) * angle).sin() + ub * (t * angle).sin()) / s
}
