use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("system size {n} exceeds the configured cap of {cap} sites")]
    CapExceeded { n: usize, cap: usize },

    #[error("eigensolver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },

    /// The Fermi level of a free-fermion ground state is degenerate; the
    /// occupied set is not unique.
    #[error(
        "degenerate Fermi level: single-particle energies {below} and {above} differ by {gap:.3e}"
    )]
    FermiDegeneracy { below: f64, above: f64, gap: f64 },

    #[error("spectrum does not sum to one (sum = {sum})")]
    SpectrumNotNormalized { sum: f64 },

    #[error("value {value} lies outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("eigenvalue problem failed for mask {mask:#b}: {reason}")]
    Eigen { mask: u64, reason: String },

    #[error("entropy table has {got} entries, expected {expected}")]
    IncompleteTable { expected: usize, got: usize },

    #[error("mask {mask:#b} is not valid for {n_sites} sites")]
    InvalidMask { mask: u64, n_sites: usize },

    #[error("contours are over different blocks ({a:#b} vs {b:#b})")]
    MismatchedMasks { a: u64, b: u64 },

    #[error("nonpositive mean weight at separations {0:?}")]
    NonPositiveWeights(Vec<usize>),

    #[error("no pairs in separation range [{min}, {max}]")]
    EmptyRange { min: usize, max: usize },

    #[error("adaptive quadrature failed to reach tolerance {tol:.1e} (estimate {estimate:.3e})")]
    Quadrature { tol: f64, estimate: f64 },

    /// Malformed input file content.
    #[error("parse error: {0}")]
    Parse(String),
}
