use alloc::string::String;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what} has a non-finite component")]
    NonFinite { what: &'static str },
    #[error("{what} has norm {norm} > 1")]
    OutsideBall { what: &'static str, norm: f64 },
    #[error("{what} must be sharp (unit norm), got norm {norm}")]
    NotSharp { what: &'static str, norm: f64 },
    #[error("{what} must be a unit vector, got norm {norm}")]
    NotUnit { what: &'static str, norm: f64 },
    #[error("at least 3 points are required, got {got}")]
    TooFewPoints { got: usize },
    #[error("invalid {what}: {reason}")]
    InvalidParameter { what: &'static str, reason: String },
    #[error("{what} = {value} is outside its domain")]
    OutOfDomain { what: &'static str, value: f64 },
    #[error("triple is not mutually orthogonal (max |dot| = {residual})")]
    NotOrthogonal { residual: f64 },
    #[error("triple is not coplanar (|d x e . f| = {residual})")]
    NotCoplanar { residual: f64 },
    #[error("third vector is not orthogonal to the other two (|d.f|+|e.f| = {residual})")]
    NotOneOrthogonal { residual: f64 },
    #[error("observables are not jointly measurable (margin {margin})")]
    NotJointlyMeasurable { margin: f64 },
    #[error("POVM outcome {label} is not positive (s - |v| = {deficit})")]
    NegativeOutcome { label: String, deficit: f64 },
    #[error("POVM identity `{what}` violated by {error}")]
    PovmIdentity { what: String, error: f64 },
    #[error("effect is not rank one (s = {s}, |v| = {norm})")]
    NotRankOne { s: f64, norm: f64 },
    #[error("missing joint outcome {label}")]
    MissingOutcome { label: String },
    #[error("{0}")]
    Unsupported(&'static str),
}
