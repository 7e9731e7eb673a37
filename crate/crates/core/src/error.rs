//! Error taxonomy shared by every stage of the pipeline.

use thiserror::Error;

/// All failure modes of the library, from configuration parsing through
/// quadrature, root isolation, and return-map simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// The family has no center: (d−2a)² + 8bc ≥ 0, so the pipeline must not run.
    #[error("center condition (d-2a)^2 + 8bc < 0 violated: discriminant = {discriminant}")]
    CenterConditionViolated { discriminant: f64 },

    /// Malformed configuration document.
    #[error("configuration parse error: {0}")]
    Parse(String),

    /// A perturbation term exceeds the cubic total-degree cap.
    #[error("perturbation term x^{i} y^{j} exceeds the cubic degree cap (i + j must be <= 3)")]
    DegreeExceeded { i: u32, j: u32 },

    /// The same exponent pair appears twice in one polynomial block.
    #[error("duplicate exponent pair ({i}, {j}) in polynomial block; duplicates are rejected, not summed")]
    DuplicateTerm { i: u32, j: u32 },

    /// The blow-up denominator g(θ) approaches zero: downstream results would be invalid.
    #[error("|g| falls to {min_abs:.6e} at theta = {theta:.9} (floor {floor:.3e}); blow-up denominator too close to zero")]
    GNearZero { min_abs: f64, theta: f64, floor: f64 },

    /// Adaptive quadrature could not meet the requested tolerance within its panel budget.
    #[error("adaptive quadrature failed on [{lo}, {hi}]: error estimate {err:.6e} exceeds tolerance {tol:.6e} at panel budget")]
    QuadratureFailure { lo: f64, hi: f64, err: f64, tol: f64 },

    /// Flow-factor evaluation outside its built domain.
    #[error("theta = {theta} outside the flow-factor domain [{lo}, {hi}]")]
    DomainExceeded { theta: f64, lo: f64, hi: f64 },

    /// Integrand or witness index outside its defined range.
    #[error("index ({i}, {j}) out of range: {reason}")]
    IndexOutOfRange { i: i64, j: i64, reason: &'static str },

    /// The zero polynomial has no sign-variation bound.
    #[error("zero polynomial has no sign-variation bound")]
    ZeroPolynomial,

    /// A radius argument must be strictly positive in blow-up coordinates.
    #[error("radius must be strictly positive (got r = {r} at theta = {theta})")]
    NonpositiveRadius { r: f64, theta: f64 },

    /// The integrated radius reached zero: the blow-up chart broke down mid-trajectory.
    #[error("radius collapsed to {r:.6e} at theta = {theta:.9}; blow-up chart broke down")]
    RadiusCollapse { r: f64, theta: f64 },

    /// The adaptive integrator could not advance.
    #[error("integrator step failure at t = {t:.9}: {reason}")]
    StepFailure { t: f64, reason: String },

    /// An even-exponent coefficient that must cancel by mirror symmetry did not.
    #[error("even-exponent coefficient of z^{n} is {value:.6e}, exceeding 10x its quadrature error {err:.6e}; mirror-symmetry cancellation violated")]
    SymmetryViolation { n: u32, value: f64, err: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
