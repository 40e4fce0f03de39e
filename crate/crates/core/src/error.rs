use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::scalar::Rational;

/// A recession direction along which a density fails to be locally finite.
#[derive(Clone, Debug, PartialEq)]
pub struct RayWitness {
    /// Index of the offending density inside its measure.
    pub density: usize,
    /// Infinite axes of the boundary stratum the ray accumulates at.
    pub target_stratum: u32,
    /// Ray direction in chart coordinates.
    pub ray: Vec<Rational>,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("bidegree mismatch: {0}")]
    BidegreeMismatch(String),
    #[error("bidegree ({0},{1}) is not of the form (p,p)")]
    NotSquareBidegree(usize, usize),
    #[error("operation not defined for this algebra: {0}")]
    WrongAlgebra(String),
    #[error("cone {0} is not strictly convex")]
    NotStrictlyConvex(usize),
    #[error("cone {0} is not smooth")]
    NotSmooth(usize),
    #[error("cones {0} and {1} do not meet in a common face")]
    BadIntersection(usize, usize),
    #[error("vector lies outside the support of the fan")]
    OutsideSupport,
    #[error("cone {0} is not a face of cone {1}")]
    NotAFace(usize, usize),
    #[error("no cone with id {0}")]
    UnknownCone(usize),
    #[error("coefficient support is not compact along axis {0}")]
    NonCompactSupport(usize),
    #[error("quadrature tolerance not met (estimate {0:e})")]
    ToleranceNotMet(f64),
    #[error("compatibility violated: {0}")]
    CompatibilityViolation(String),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("derivative atom present where a measure is required")]
    NonMeasurePiece,
    #[error("measure is not locally finite along ray {0:?}")]
    NotLocallyFinite(RayWitness),
    #[error("local finiteness undecided by the quadratic-exponent test: {0}")]
    Undecided(String),
    #[error("density is not sign-pure on its piece: {0}")]
    SignCertificate(String),
    #[error("support escapes the domain: {0}")]
    SupportEscapesU(String),
    #[error("cells of mixed dimension")]
    MixedDimension,
    #[error("product leaves the closed coefficient family: {0}")]
    FamilyEscape(String),
    #[error("current is not positive: {0}")]
    NotPositive(String),
    #[error("current does not have C-finite mass: {0:?}")]
    NotCFinite(RayWitness),
    #[error("invalid shadow current: {0}")]
    InvalidShadow(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;
