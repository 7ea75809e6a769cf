use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// The atom is not faster than the Fermi speed, so no pair can be created.
    #[error("atom speed {v} does not exceed the Fermi speed {v_f}")]
    BelowThreshold { v: f64, v_f: f64 },

    #[error("v cos(theta_q) is within {guard:e} of v_F at theta_q = {theta_q}")]
    DegenerateAngle { theta_q: f64, guard: f64 },

    /// `(p+q)^2` is not negative, i.e. the pair is off the constraint surface.
    #[error("total momentum is not space-like: -(p+q)^2 = {minus_k_sq:e}")]
    NotSpacelike { minus_k_sq: f64 },

    #[error("momentum modulus {modulus:e} is too small")]
    ZeroMomentum { modulus: f64 },

    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },

    /// Carries the best available estimate.
    #[error("quadrature did not converge: {value:e} +/- {abs_error:e} after {evaluations} evaluations")]
    NotConverged {
        value: f64,
        abs_error: f64,
        evaluations: usize,
    },

    #[error("density exceeds the envelope by a factor {ratio:.4} at {point:?}")]
    EnvelopeViolation { ratio: f64, point: [f64; 3] },

    #[error("event {index} was not accepted after {attempts} proposals")]
    MaxRejectionsExceeded { index: u64, attempts: u64 },
}
