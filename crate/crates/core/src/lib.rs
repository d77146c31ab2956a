//! Geodesic triangulations of the unit sphere: validity checking, shellability
//! from a viewing direction, sinking into the southern hemisphere, and morphs
//! between isomorphic triangulations.
//!
//! Vertices are kept in signed homogeneous coordinates: nonzero vectors in R^3
//! identified up to positive scaling. Everything combinatorial (orientation,
//! east/west, face classification) is a sign of a determinant, so per-vertex
//! rescaling is always safe and several routines exploit that freedom.

pub mod generators;
pub mod morph;
pub mod shelling;
pub mod sinking;
pub mod sphere;
pub mod triangulation;

pub use sphere::{Tolerance, Vec3};
pub use triangulation::SphereTriangulation;

/// A single problem found while validating triangulation input.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate direction: {0}")]
    DegenerateDirection(String),

    #[error("not shellable from the given direction")]
    NotShellable,

    #[error("invalid shelling order: {0}")]
    InvalidShellingOrder(String),

    #[error("linear system is singular (pivot ratio {pivot_ratio:.3e})")]
    SingularSystem { pivot_ratio: f64 },

    #[error("triangulations are not isomorphic")]
    NotIsomorphic,

    #[error("edge cannot be flipped: {0}")]
    NotFlippable(String),

    #[error("invalid triangulation: {:?}", .0.iter().map(|v| v.message.as_str()).collect::<Vec<_>>())]
    InvalidTriangulation(Vec<Violation>),

    #[error("no usable direction found after {attempts} attempts")]
    NoDirectionFound { attempts: usize },

    #[error("morph endpoint is not a valid triangulation: {0}")]
    InvalidEndpoint(String),

    #[error("no sinkable rotation found after {} attempts", .attempted.len())]
    NoSinkableRotationFound { attempted: Vec<Vec3> },

    #[error("morph construction failed: {0}")]
    MorphFailure(String),

    #[error("generation failed: {0}")]
    GenerationFailed(String),

    #[error("numerical solve failed: {0}")]
    SolveFailure(String),

    /// An internal cross-check failed; indicates a bug or an input that
    /// slipped past the genericity checks.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
