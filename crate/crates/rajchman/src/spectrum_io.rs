//! Spectrum documents: `{meta: {M_list, k_list, tau_trunc}, coeffs: [[n, re, im], ...]}`.

use std::path::Path;

use rajchman_core::num::Complex;
use rajchman_core::spectral::{SparseSpectrum, SpectrumMeta, Truncation, WINDOW_NAME};
use serde::{Deserialize, Serialize};

use crate::decimal::to_json;
use crate::error::CliError;

pub const FORMAT: &str = "rajchman-spectrum/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaDoc {
    #[serde(rename = "M_list")]
    pub m_list: Vec<u64>,
    pub k_list: Vec<u32>,
    pub tau_trunc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationDoc {
    pub dropped: usize,
    pub dropped_abs_sum: f64,
    pub overflow: usize,
    pub overflow_abs_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumDoc {
    pub format: String,
    pub window: String,
    pub meta: MetaDoc,
    pub n_max: i64,
    pub symmetric: bool,
    pub truncation: TruncationDoc,
    /// Sorted by `n`.
    pub coeffs: Vec<(i64, f64, f64)>,
}

impl SpectrumDoc {
    pub fn from_spectrum(s: &SparseSpectrum) -> Self {
        let t = s.truncation;
        Self {
            format: FORMAT.into(),
            window: WINDOW_NAME.into(),
            meta: MetaDoc {
                m_list: s.meta.m_list.clone(),
                k_list: s.meta.k_list.clone(),
                tau_trunc: s.tau_trunc,
            },
            n_max: s.n_max,
            symmetric: s.symmetric,
            truncation: TruncationDoc {
                dropped: t.dropped,
                dropped_abs_sum: t.dropped_abs_sum,
                overflow: t.overflow,
                overflow_abs_sum: t.overflow_abs_sum,
            },
            coeffs: s.coeffs().iter().map(|&(n, c)| (n, c.re, c.im)).collect(),
        }
    }

    pub fn to_spectrum(&self) -> Result<SparseSpectrum, CliError> {
        if self.format != FORMAT {
            return Err(CliError::invalid(
                "spectrum-format",
                format!("unsupported format {:?}", self.format),
            ));
        }
        if self.window != WINDOW_NAME {
            return Err(CliError::invalid(
                "spectrum-format",
                format!("spectrum built with window {:?}", self.window),
            ));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|&(n, re, im)| (n, Complex::new(re, im)))
            .collect();
        let meta = SpectrumMeta {
            m_list: self.meta.m_list.clone(),
            k_list: self.meta.k_list.clone(),
        };
        let mut s = SparseSpectrum::from_parts(
            coeffs,
            self.meta.tau_trunc,
            self.n_max,
            self.symmetric,
            meta,
        )
        .map_err(|e| CliError::invalid("spectrum-invalid", e.to_string()))?;
        let t = &self.truncation;
        s.truncation = Truncation {
            dropped: t.dropped,
            dropped_abs_sum: t.dropped_abs_sum,
            overflow: t.overflow,
            overflow_abs_sum: t.overflow_abs_sum,
        };
        Ok(s)
    }
}

pub fn to_string(s: &SparseSpectrum) -> String {
    to_json(&SpectrumDoc::from_spectrum(s))
}

pub fn from_str(text: &str) -> Result<SparseSpectrum, CliError> {
    let doc: SpectrumDoc = serde_json::from_str(text)
        .map_err(|e| CliError::invalid("spectrum-parse", e.to_string()))?;
    doc.to_spectrum()
}

pub fn write(path: &Path, s: &SparseSpectrum) -> Result<(), CliError> {
    std::fs::write(path, to_string(s)).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> Result<SparseSpectrum, CliError> {
    from_str(&std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rajchman_core::spectral::gm_spectrum;

    #[test]
    fn bit_exact_round_trip() {
        let s = gm_spectrum(5, 1, 1e-10, 3000).unwrap();
        let text = to_string(&s);
        let back = from_str(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(to_string(&back), text);
    }

    #[test]
    fn rejects_tampering() {
        let s = gm_spectrum(3, 1, 1e-10, 500).unwrap();
        let mut doc = SpectrumDoc::from_spectrum(&s);
        doc.coeffs.swap(0, 1);
        assert!(doc.to_spectrum().is_err());
        let text = to_string(&s).replacen("\"n_max\"", "\"extra\": 1,\n  \"n_max\"", 1);
        assert!(from_str(&text).is_err());
    }
}
