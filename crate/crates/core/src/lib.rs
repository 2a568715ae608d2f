//! Fourier decay classification for the Liouville numbers, explicit Rajchman
//! measure approximations built from sparse window spectra, and the periodic
//! multiplier certificates that settle oscillating decays.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod decay;
pub mod gauge;
pub mod measure;
pub mod multipliers;
pub mod num;
pub mod spectral;
