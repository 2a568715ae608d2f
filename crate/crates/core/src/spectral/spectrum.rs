//! Sparse Fourier coefficient maps of 1-periodic densities.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::primes::{is_prime, primes_in};
use super::window::{w, w_hat};
use super::SpectralError;
use crate::num::{unit_phase, Complex};

/// Largest `p^(2+k)` accepted: beyond this, bump widths fall below double resolution.
pub const MAX_INV_WIDTH: f64 = 9_007_199_254_740_992.0;
pub const DEFAULT_TAU_TRUNC: f64 = 1e-10;
pub const DEFAULT_N_MAX: i64 = 1 << 22;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpectrumMeta {
    pub m_list: Vec<u64>,
    pub k_list: Vec<u32>,
}

/// Mass accounting for coefficients that were not stored.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Truncation {
    /// In-band coefficients below the threshold.
    pub dropped: usize,
    pub dropped_abs_sum: f64,
    /// Product terms that landed beyond `n_max`.
    pub overflow: usize,
    pub overflow_abs_sum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseSpectrum {
    coeffs: Vec<(i64, Complex)>,
    pub tau_trunc: f64,
    pub n_max: i64,
    pub symmetric: bool,
    pub meta: SpectrumMeta,
    pub truncation: Truncation,
}

impl SparseSpectrum {
    /// The spectrum `{0 -> 1}` of the constant density 1.
    pub fn delta(tau_trunc: f64, n_max: i64) -> Self {
        Self {
            coeffs: alloc::vec![(0, Complex::new(1.0, 0.0))],
            tau_trunc,
            n_max,
            symmetric: true,
            meta: SpectrumMeta::default(),
            truncation: Truncation::default(),
        }
    }

    /// Validate and wrap externally supplied coefficients.
    pub fn from_parts(
        coeffs: Vec<(i64, Complex)>,
        tau_trunc: f64,
        n_max: i64,
        symmetric: bool,
        meta: SpectrumMeta,
    ) -> Result<Self, SpectralError> {
        if !(tau_trunc >= 0.0) || n_max < 0 {
            return Err(SpectralError::InvalidSpectrum(
                "threshold or support bound out of range",
            ));
        }
        if coeffs.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(SpectralError::InvalidSpectrum(
                "frequencies must be strictly increasing",
            ));
        }
        if coeffs.iter().any(|(n, c)| {
            n.abs() > n_max || !(c.norm() >= tau_trunc) || !c.re.is_finite() || !c.im.is_finite()
        }) {
            return Err(SpectralError::InvalidSpectrum(
                "coefficient outside the band or below the threshold",
            ));
        }
        let s = Self {
            coeffs,
            tau_trunc,
            n_max,
            symmetric,
            meta,
            truncation: Truncation::default(),
        };
        if let Some(c0) = s.get(0) {
            if c0.im != 0.0 && symmetric {
                return Err(SpectralError::InvalidSpectrum(
                    "coefficient at zero must be real",
                ));
            }
        }
        if symmetric && s.coeffs.iter().any(|&(n, c)| s.get(-n) != Some(c.conj())) {
            return Err(SpectralError::InvalidSpectrum(
                "coefficients are not conjugate symmetric",
            ));
        }
        Ok(s)
    }

    fn from_map(
        map: BTreeMap<i64, Complex>,
        tau_trunc: f64,
        n_max: i64,
        symmetric: bool,
        meta: SpectrumMeta,
    ) -> Self {
        let mut truncation = Truncation::default();
        let mut coeffs = Vec::with_capacity(map.len());
        for (n, c) in map {
            let c = if symmetric && n == 0 {
                Complex::new(c.re, 0.0)
            } else {
                c
            };
            if c.norm() >= tau_trunc {
                coeffs.push((n, c));
            } else if c != Complex::new(0.0, 0.0) {
                truncation.dropped += 1;
                truncation.dropped_abs_sum += c.norm();
            }
        }
        Self {
            coeffs,
            tau_trunc,
            n_max,
            symmetric,
            meta,
            truncation,
        }
    }

    pub fn coeffs(&self) -> &[(i64, Complex)] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, n: i64) -> Option<Complex> {
        self.coeffs
            .binary_search_by_key(&n, |&(m, _)| m)
            .ok()
            .map(|i| self.coeffs[i].1)
    }

    /// Coefficient at 0, the mass of the density over one period.
    pub fn mass(&self) -> f64 {
        self.get(0).map_or(0.0, |c| c.re)
    }

    /// `sum_n c_n e^(2 pi i n x)`.
    pub fn reconstruct(&self, x: f64) -> Complex {
        self.coeffs
            .iter()
            .map(|&(n, c)| c * unit_phase(-(n as f64) * frac(x)))
            .sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|(_, c)| c.norm()).sum()
    }

    /// Largest stored `|n|`.
    pub fn max_frequency(&self) -> i64 {
        self.coeffs.iter().map(|(n, _)| n.abs()).max().unwrap_or(0)
    }
}

fn frac(x: f64) -> f64 {
    x - libm::floor(x)
}

fn check_window(p: u64, k: u32) -> Result<f64, SpectralError> {
    if k == 0 {
        return Err(SpectralError::InvalidInput("k must be at least 1"));
    }
    let inv_width = libm::pow(p as f64, 2.0 + k as f64);
    if inv_width > MAX_INV_WIDTH {
        return Err(SpectralError::Cap {
            what: "bump width p^-(2+k) below double resolution",
            value: inv_width,
        });
    }
    Ok(inv_width)
}

/// Spectrum of `phi_p(x) = sum_j p^(1+k) w(p^(2+k)(x - j/p))`, periodized:
/// `w_hat(n / p^(2+k))` at multiples of `p`, zero elsewhere.
pub fn prime_window_spectrum(
    p: u64,
    k: u32,
    tau_trunc: f64,
    n_max: i64,
) -> Result<SparseSpectrum, SpectralError> {
    if !is_prime(p) {
        return Err(SpectralError::InvalidInput("p must be prime"));
    }
    let inv_width = check_window(p, k)?;
    let mut map = BTreeMap::new();
    let mmax = n_max / p as i64;
    for m in -mmax..=mmax {
        let n = m * p as i64;
        map.insert(n, Complex::new(w_hat(n as f64 / inv_width), 0.0));
    }
    let meta = SpectrumMeta {
        m_list: Vec::new(),
        k_list: alloc::vec![k],
    };
    Ok(SparseSpectrum::from_map(map, tau_trunc, n_max, true, meta))
}

/// Mean of the prime window spectra over `p in (M, 2M]`.
pub fn gm_spectrum(
    m: u64,
    k: u32,
    tau_trunc: f64,
    n_max: i64,
) -> Result<SparseSpectrum, SpectralError> {
    if m < 2 {
        return Err(SpectralError::InvalidInput("M must be at least 2"));
    }
    if !(0..=DEFAULT_N_MAX).contains(&n_max) {
        return Err(SpectralError::Cap {
            what: "frequency support bound",
            value: n_max as f64,
        });
    }
    let primes = primes_in(m);
    check_window(*primes.last().expect("Bertrand window is nonempty"), k)?;
    let scale = 1.0 / primes.len() as f64;
    // real and even: accumulate n >= 0 densely, then mirror
    let mut acc = alloc::vec![0.0f64; n_max as usize + 1];
    for &p in &primes {
        let inv_width = libm::pow(p as f64, 2.0 + k as f64);
        let mut n = 0usize;
        while n <= n_max as usize {
            acc[n] += scale * w_hat(n as f64 / inv_width);
            n += p as usize;
        }
    }
    let mut map = BTreeMap::new();
    for (n, &v) in acc.iter().enumerate() {
        if v != 0.0 {
            map.insert(n as i64, Complex::new(v, 0.0));
            if n > 0 {
                map.insert(-(n as i64), Complex::new(v, 0.0));
            }
        }
    }
    let meta = SpectrumMeta {
        m_list: alloc::vec![m],
        k_list: alloc::vec![k],
    };
    Ok(SparseSpectrum::from_map(map, tau_trunc, n_max, true, meta))
}

/// Spectrum of the pointwise product: the discrete convolution of the maps,
/// kept on `|n| <= n_max` with everything beyond counted as overflow.
pub fn multiply_spectra(
    a: &SparseSpectrum,
    b: &SparseSpectrum,
    tau_trunc: f64,
    n_max: i64,
) -> SparseSpectrum {
    let symmetric = a.symmetric && b.symmetric;
    let mut map: BTreeMap<i64, Complex> = BTreeMap::new();
    let mut overflow = 0usize;
    let mut overflow_abs_sum = 0.0;
    for &(na, ca) in &a.coeffs {
        for &(nb, cb) in &b.coeffs {
            let n = na + nb;
            let v = ca * cb;
            if n.abs() > n_max {
                overflow += 1;
                overflow_abs_sum += v.norm();
            } else if !symmetric || n >= 0 {
                *map.entry(n).or_insert(Complex::new(0.0, 0.0)) += v;
            }
        }
    }
    if symmetric {
        let mirrored: Vec<(i64, Complex)> = map
            .iter()
            .filter(|(n, _)| **n > 0)
            .map(|(n, c)| (-n, c.conj()))
            .collect();
        map.extend(mirrored);
    }
    let meta = SpectrumMeta {
        m_list: a
            .meta
            .m_list
            .iter()
            .chain(&b.meta.m_list)
            .copied()
            .collect(),
        k_list: a
            .meta
            .k_list
            .iter()
            .chain(&b.meta.k_list)
            .copied()
            .collect(),
    };
    let mut out = SparseSpectrum::from_map(map, tau_trunc, n_max, symmetric, meta);
    out.truncation.overflow = a.truncation.overflow + b.truncation.overflow + overflow;
    out.truncation.overflow_abs_sum =
        a.truncation.overflow_abs_sum + b.truncation.overflow_abs_sum + overflow_abs_sum;
    out.truncation.dropped += a.truncation.dropped + b.truncation.dropped;
    out.truncation.dropped_abs_sum += a.truncation.dropped_abs_sum + b.truncation.dropped_abs_sum;
    out
}

/// `phi_p(x)` by direct evaluation of the nearest bump.
pub fn prime_window_density(p: u64, k: u32, x: f64) -> f64 {
    let pf = p as f64;
    let y = frac(x) * pf;
    let j = libm::round(y);
    let inv = libm::pow(pf, 1.0 + k as f64);
    // p^(2+k) (x - j/p) = p^(1+k) (p x - j)
    inv * w(inv * (y - j))
}

/// `g_{M,k}(x)`, the mean of the prime windows over `(M, 2M]`.
pub fn gm_density(m: u64, k: u32, x: f64) -> f64 {
    let primes = primes_in(m);
    primes
        .iter()
        .map(|&p| prime_window_density(p, k, x))
        .sum::<f64>()
        / primes.len() as f64
}
