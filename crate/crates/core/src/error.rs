//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value is outside its documented range.
    #[error("invalid input: {0}")]
    Input(String),

    /// Segment spacing exceeds the segment length: the caller must take a
    /// larger abscissa.
    #[error("segment at n = {n} has length {length} < spacing {spacing}")]
    SegmentTooShort { n: f64, length: f64, spacing: f64 },

    /// The integer horizon is too small for a level of a separated family
    /// to receive any element.
    #[error("integer horizon {horizon} too small: level {level} is empty")]
    HorizonTooSmall { level: usize, horizon: u64 },

    /// Unknown weight name or an invalid sector for a catalog weight.
    #[error("weight catalog error: {0}")]
    Catalog(String),

    /// A weight evaluator returned a non-finite value at a quadrature node.
    #[error("weight evaluation not finite at ({x}, {y})")]
    Evaluation { x: f64, y: f64 },

    /// The weight integral diverges, so the criterion machinery does not apply.
    #[error("criterion inapplicable: weight integral is divergent")]
    CriterionInapplicable,

    /// A translation offset is not aligned to the grid.
    #[error("point ({x}, {y}) is not aligned to the grid with cell side {h}")]
    Alignment { x: f64, y: f64, h: f64 },

    /// A recorded partial-sum norm exceeded its bound during vector
    /// construction.
    #[error("construction failed: level {level} partial-sum norm {norm} exceeds bound {bound}")]
    ConstructionFailed { level: usize, norm: f64, bound: f64 },

    /// A return error exceeded its bound during verification.
    #[error("verification failed: level {level} return error {error} at t = ({x}, {y}) exceeds bound {bound}")]
    VerificationFailed {
        level: usize,
        error: f64,
        x: f64,
        y: f64,
        bound: f64,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
