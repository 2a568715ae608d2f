//! On-disk cache of periodic-factor spectra under `RAJCHMAN_CACHE_DIR`.
//!
//! Entries are spectrum documents, which round-trip bit-exactly, so a hit
//! yields the same bytes as a recomputation.

use std::path::PathBuf;

use rajchman_core::spectral::SparseSpectrum;

use crate::error::CliError;
use crate::spectrum_io;

pub const ENV_VAR: &str = "RAJCHMAN_CACHE_DIR";

/// Everything the stored coefficients depend on.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumKey {
    pub m_list: Vec<u64>,
    pub k_list: Vec<u32>,
    pub tau_trunc: f64,
    pub band: i64,
    /// Quadrature band of the pieces route.
    pub xi_max: f64,
}

impl SpectrumKey {
    pub fn file_name(&self) -> String {
        let join = |v: Vec<String>| {
            if v.is_empty() {
                "none".to_string()
            } else {
                v.join("_")
            }
        };
        format!(
            "gm-M{}-k{}-tau{:016x}-band{}-xi{:016x}.json",
            join(self.m_list.iter().map(u64::to_string).collect()),
            join(self.k_list.iter().map(u32::to_string).collect()),
            self.tau_trunc.to_bits(),
            self.band,
            self.xi_max.to_bits(),
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn from_env() -> Self {
        Self {
            dir: std::env::var_os(ENV_VAR)
                .filter(|d| !d.is_empty())
                .map(PathBuf::from),
        }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: Some(dir.into()),
        }
    }

    pub fn disabled() -> Self {
        Self { dir: None }
    }

    pub fn dir(&self) -> Option<&PathBuf> {
        self.dir.as_ref()
    }

    /// Unreadable or mismatched entries are recomputed and overwritten.
    pub fn spectrum(
        &self,
        key: &SpectrumKey,
        compute: impl FnOnce() -> SparseSpectrum,
    ) -> Result<SparseSpectrum, CliError> {
        let Some(dir) = &self.dir else {
            return Ok(compute());
        };
        let path = dir.join(key.file_name());
        if let Ok(s) = spectrum_io::read(&path) {
            if s.meta.m_list == key.m_list && s.meta.k_list == key.k_list && s.n_max == key.band {
                return Ok(s);
            }
        }
        let s = compute();
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        spectrum_io::write(&path, &s)?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rajchman_core::spectral::gm_spectrum;

    #[test]
    fn hit_equals_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::at(dir.path());
        let key = SpectrumKey {
            m_list: vec![4],
            k_list: vec![1],
            tau_trunc: 1e-10,
            band: 900,
            xi_max: 500.0,
        };
        let make = || gm_spectrum(4, 1, 1e-10, 900).unwrap();
        let first = cache.spectrum(&key, make).unwrap();
        let second = cache.spectrum(&key, || unreachable!("cached")).unwrap();
        assert_eq!(first, second);
        std::fs::write(dir.path().join(key.file_name()), "{").unwrap();
        assert_eq!(cache.spectrum(&key, make).unwrap(), first);
    }
}
