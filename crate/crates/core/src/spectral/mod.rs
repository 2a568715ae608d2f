//! Window spectra, their products, and transforms of the compactly supported
//! densities `psi0 * G`.

use core::fmt;

pub mod density;
pub mod pieces;
pub mod primes;
pub mod spectrum;
pub mod window;

pub use density::{CompactDensity, PeriodicFactor, Transform};
pub use pieces::{LevelSpec, NodeBlock, Piece, PieceSet};
pub use primes::{is_prime, primes_between, primes_in};
pub use spectrum::{
    gm_density, gm_spectrum, multiply_spectra, prime_window_density, prime_window_spectrum,
    SparseSpectrum, SpectrumMeta, Truncation, DEFAULT_N_MAX, DEFAULT_TAU_TRUNC, MAX_INV_WIDTH,
};
pub use window::{psi0, psi0_hat, w, w_hat, w_hat_envelope, ENVELOPE, WINDOW_NAME};

#[derive(Clone, Debug, PartialEq)]
pub enum SpectralError {
    InvalidInput(&'static str),
    InvalidSpectrum(&'static str),
    /// A resource or resolution limit was hit.
    Cap {
        what: &'static str,
        value: f64,
    },
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Self::InvalidSpectrum(m) => write!(f, "invalid spectrum: {m}"),
            Self::Cap { what, value } => write!(f, "cap exceeded: {what} ({value})"),
        }
    }
}
