use thiserror::Error;

/// Everything that can go wrong while building or checking a geometry.
///
/// Property failures that carry a witness keep the witness as a rendered
/// string so the error stays independent of the ambient space it came from.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("extension degree {0} is outside the supported range 1..=24")]
    UnsupportedDegree(u32),
    #[error("polynomial {modulus:#x} is not irreducible of degree {degree} over GF(2)")]
    IrreducibleCheckFailed { degree: u32, modulus: u32 },
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("the zero vector has no projective point")]
    ZeroVector,
    #[error("PG({dim}, 2^{degree}) does not fit the 128-bit packed representation")]
    UnsupportedDimension { dim: usize, degree: u32 },
    #[error("enumeration needs {required} operations, budget is {budget}")]
    EnumerationTooLarge { required: u128, budget: u128 },
    #[error("points do not span a subspace of the expected dimension")]
    DegenerateSpan,
    #[error("ambient dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("point is not affine (first coordinate is zero)")]
    NotAffine,
    #[error("point is not on the hyperplane at infinity")]
    NotAtInfinity,
    #[error("gcd({i}, {hk}) = {gcd} but the construction requires gcd(i, hk) = 1")]
    GcdHypothesisViolated { i: u32, hk: u32, gcd: u32 },
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("point set is not F2-linear: {witness}")]
    NotF2Linear { witness: String },
    #[error("not a pseudoregulus candidate: {reason}")]
    NotPseudoregulusCandidate { reason: String },
    #[error("transversal extraction failed: {reason}")]
    TransversalExtractionFailed { reason: String },
    #[error("no semilinear map with a coprime exponent reproduces the direction set")]
    SemilinearFitFailed,
    #[error("spread construction failed: {reason}")]
    SpreadConstructionFailed { reason: String },
    #[error("invalid spread: {reason}")]
    InvalidSpread { reason: String },
    #[error("C-plane construction failed: {reason}")]
    CPlaneConstructionFailed { reason: String },
    #[error("parse error: {0}")]
    ParseError(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
