use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {name} = {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The model is structurally malformed (wrong mediator count and so on).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A squared eigenfrequency of the coupled system is not strictly positive.
    #[error("unstable model: squared eigenfrequency {root:.6e} is not positive")]
    Unstable { root: f64 },

    /// A self-factor `1 - D_j` vanished.
    #[error("singular self-factor: D_{index} = 1 at zeta = {zeta}")]
    SingularSelfFactor { index: usize, zeta: f64 },

    /// `|alpha * psi| >= 1` for a dipole pair, the pair free energy series has no meaning.
    #[error("dipole pair unstable at zeta = {zeta}: |alpha*psi| = {product}")]
    DipoleUnstable { zeta: f64, product: f64 },

    #[error("Matsubara sum did not converge within {n_max} terms (tail bound {tail_bound:.3e})")]
    NonConvergence { n_max: u64, tail_bound: f64 },

    #[error("root finding failed: {0}")]
    Numeric(String),

    /// A per-point failure inside a temperature sweep.
    #[error("at T = {temperature}: {source}")]
    AtTemperature {
        temperature: f64,
        #[source]
        source: Box<Error>,
    },
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            reason: "must be finite",
        })
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}
