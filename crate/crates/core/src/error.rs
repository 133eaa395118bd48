use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coordinate outside the lower half-plane: y = {y} (need y < 0)")]
    Domain { y: f64 },

    #[error("recursion denominator vanished at k = {k} for lambda = {lambda}")]
    RecursionDenominator { k: i64, lambda: f64 },

    #[error("polynomial root finder did not converge (degree {degree}): {detail}")]
    RootFinding { degree: usize, detail: String },

    #[error("gradient degeneracy at z = {z}: (psi')^2 + (lambda psi + z psi')^2 = {denominator}")]
    GradientDegeneracy { z: f64, denominator: f64 },

    #[error("quasilinear degeneracy at z = {z}: coefficient of psi'' is {coefficient}")]
    QuasilinearDegeneracy { z: f64, coefficient: f64 },

    #[error("step size underflow at z = {z} (h = {h})")]
    StepSizeUnderflow { z: f64, h: f64 },

    #[error("integration exceeded {max_steps} steps before reaching z = {z_end}")]
    TooManySteps { max_steps: usize, z_end: f64 },

    #[error(
        "Newton corrector diverged for l = {l} near n = {n}; last good sample (n, lambda) = ({last_n}, {last_lambda})"
    )]
    NewtonDivergence {
        l: u32,
        n: f64,
        last_n: f64,
        last_lambda: f64,
    },

    #[error("no fold in bracket [{lo}, {hi}] for l = {l}")]
    NoFoldInBracket { l: u32, lo: f64, hi: f64 },

    #[error("fold Newton iteration failed for l = {l}: {detail}")]
    FoldNewton { l: u32, detail: String },

    #[error("degenerate seed: dPhi/dLambda = {derivative} at lambda = {lambda}")]
    DegenerateSeed { lambda: f64, derivative: f64 },

    #[error("orthogonality degenerate: coefficient integral of mu is {value}")]
    OrthogonalityDegenerate { value: f64 },

    #[error("linear solve singular: {0}")]
    SingularSystem(String),

    #[error("no real eigenvalue at this n: n = {n} is beyond the fold n* = {n_star} for l = {l}")]
    NoRealEigenvalue { l: u32, n: f64, n_star: f64 },

    #[error("combination has no real zeros")]
    NoRealZeros,
}

pub type Result<T> = std::result::Result<T, Error>;
