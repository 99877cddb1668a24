use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("argument {x} outside the domain x > 0")]
    Domain { x: f64 },
    #[error("complex argument {re}{im:+}i outside the supported strip")]
    ComplexRange { re: f64, im: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("Bloch vector ({0}, {1}) outside the Brillouin zone [-pi, pi]^2")]
    OutOfZone(f64, f64),
    #[error("wavenumber {0} must be positive and finite")]
    BadWavenumber(f64),
    #[error("k = {k} lies within {margin:.3e} of an empty-lattice resonance (guard {guard})")]
    NearEmptyResonance { k: f64, margin: f64, guard: f64 },
    #[error("lattice sum did not reach tolerance {tol:.1e} within {budget} shells (estimate {est:.1e})")]
    NonConvergence { tol: f64, budget: usize, est: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("lattice sum order {needed} missing from a table of order {available}")]
    MissingLatticeOrder { needed: usize, available: usize },
    #[error("invalid material parameters: {0}")]
    Material(String),
    #[error("bubble radius {0} must lie in (0, 1/2)")]
    Radius(f64),
    #[error("quasi-static operator is singular at alpha = 0")]
    ZeroAlpha,
    #[error("frequency {0} must be positive")]
    Frequency(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapacityError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("capacity system is singular")]
    SingularSystem,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("Muller iteration stopped after {iterations} steps at {best} (last step {last_step:.2e})")]
    NoConvergence { best: Complex64, iterations: usize, last_step: f64 },
    #[error("candidate root {omega} rejected: {reason}")]
    RejectedRoot { omega: f64, reason: String },
    #[error("found {found} of {wanted} bands below omega = {omega_max}")]
    BandNotFound { found: usize, wanted: usize, omega_max: f64 },
    #[error("Muller needs three distinct starting points")]
    BadStarts,
}
