//! Fourier multipliers acting on measure transforms: integer translation,
//! cosine averaging, nonnegative cosine series, autoconvolved bumps, and the
//! two gap certificates built from them.

use alloc::vec::Vec;
use core::fmt;

use crate::measure::MeasureApprox;
use crate::num::{cospi, unit_phase};
use crate::spectral::{CompactDensity, Transform};

mod bump;
mod certify;

pub use bump::{autoconvolve, Autoconvolution, AutoconvolutionReport, BumpSample, Hypothesis};
pub use certify::{
    certify_gap_in, certify_gap_out, shifted_set_semantics, CertifyPolicy, Direction,
    GapCertificate, OutRoute, ShiftedSet,
};

#[derive(Clone, Debug, PartialEq)]
pub enum MultiplierError {
    InvalidMultiplier(&'static str),
    /// The named hypothesis of the bump construction fails.
    Hypothesis(Hypothesis),
    Precondition(&'static str),
    /// `tau(a k)` is not bounded away from zero.
    Inapplicable {
        alpha0: f64,
        floor: f64,
    },
    Verification {
        violations: usize,
        max_residual: f64,
    },
}

impl fmt::Display for MultiplierError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidMultiplier(m) => write!(f, "invalid multiplier: {m}"),
            Self::Hypothesis(h) => write!(f, "bump hypothesis fails: {}", h.as_str()),
            Self::Precondition(m) => write!(f, "precondition failed: {m}"),
            Self::Inapplicable { alpha0, floor } => {
                write!(
                    f,
                    "criterion inapplicable: min tau(ak) = {alpha0} below floor {floor}"
                )
            }
            Self::Verification {
                violations,
                max_residual,
            } => {
                write!(
                    f,
                    "verification failed at {violations} grid points (max residual {max_residual})"
                )
            }
        }
    }
}

/// Anything with a Fourier transform and an error budget.
pub trait FourierTransform {
    fn transform(&self, xi: f64) -> Transform;
}

impl FourierTransform for CompactDensity {
    fn transform(&self, xi: f64) -> Transform {
        CompactDensity::transform(self, xi)
    }
}

impl FourierTransform for MeasureApprox {
    fn transform(&self, xi: f64) -> Transform {
        MeasureApprox::transform(self, xi)
    }
}

impl<T: FourierTransform + ?Sized> FourierTransform for &T {
    fn transform(&self, xi: f64) -> Transform {
        (**self).transform(xi)
    }
}

/// A plain evaluator with zero budget.
pub struct FromFn<F>(pub F);

impl<F: Fn(f64) -> crate::num::Complex> FourierTransform for FromFn<F> {
    fn transform(&self, xi: f64) -> Transform {
        Transform {
            value: (self.0)(xi),
            budget: 0.0,
        }
    }
}

/// `e^(-2 pi i xi s) mu_hat(xi)`: the measure moved by `s`.
pub struct Translated<T> {
    pub inner: T,
    pub shift: f64,
}

impl<T: FourierTransform> FourierTransform for Translated<T> {
    fn transform(&self, xi: f64) -> Transform {
        let t = self.inner.transform(xi);
        Transform {
            value: unit_phase(xi * self.shift) * t.value,
            budget: t.budget,
        }
    }
}

pub fn translate_by<T: FourierTransform>(inner: T, shift: f64) -> Translated<T> {
    Translated { inner, shift }
}

pub fn translate_transform<T: FourierTransform>(inner: T, j: i64) -> Translated<T> {
    translate_by(inner, j as f64)
}

/// `cos(2 pi j xi) mu_hat(xi)`, the transform of the average of the `+-j` translates.
pub struct CosineAverage<T> {
    pub inner: T,
    pub j: i64,
}

impl<T: FourierTransform> FourierTransform for CosineAverage<T> {
    fn transform(&self, xi: f64) -> Transform {
        let t = self.inner.transform(xi);
        let c = cospi(2.0 * self.j as f64 * xi);
        Transform {
            value: t.value * c,
            budget: t.budget * libm::fabs(c),
        }
    }
}

pub fn cosine_average<T: FourierTransform>(inner: T, j: i64) -> CosineAverage<T> {
    CosineAverage { inner, j }
}

/// `g(xi) = sum_k a_k cos(2 pi k xi / a)` with `a_k >= 0` and `sum a_k < inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicMultiplier {
    period: f64,
    coeffs: Vec<f64>,
}

impl PeriodicMultiplier {
    pub fn new(period: f64, coeffs: Vec<f64>) -> Result<Self, MultiplierError> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(MultiplierError::InvalidMultiplier(
                "period must be positive",
            ));
        }
        if coeffs.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(MultiplierError::InvalidMultiplier(
                "coefficients must be finite and nonnegative",
            ));
        }
        Ok(Self { period, coeffs })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `S_N(xi)`.
    pub fn partial_sum(&self, n: usize, xi: f64) -> f64 {
        self.coeffs
            .iter()
            .take(n + 1)
            .enumerate()
            .map(|(k, a)| a * cospi(2.0 * k as f64 * xi / self.period))
            .sum()
    }

    /// `S_N(0)`, nondecreasing in `N`.
    pub fn value_at_zero(&self, n: usize) -> f64 {
        self.coeffs.iter().take(n + 1).sum()
    }

    /// `g(0) = sum_k a_k`.
    pub fn total(&self) -> f64 {
        self.value_at_zero(self.coeffs.len())
    }

    /// `sum_{m < k <= n} a_k`.
    pub fn tail(&self, m: usize, n: usize) -> f64 {
        self.coeffs.iter().take(n + 1).skip(m + 1).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassReport {
    pub s_n_zero: f64,
    pub mass: f64,
    pub positive: bool,
    /// First `N` whose prefix mass is positive.
    pub n0: Option<usize>,
}

pub struct Multiplied<T> {
    pub inner: T,
    pub multiplier: PeriodicMultiplier,
    pub n: usize,
}

impl<T: FourierTransform> FourierTransform for Multiplied<T> {
    fn transform(&self, xi: f64) -> Transform {
        let t = self.inner.transform(xi);
        let s = self.multiplier.partial_sum(self.n, xi);
        Transform {
            value: t.value * s,
            budget: t.budget * libm::fabs(s),
        }
    }
}

/// `S_N(xi) mu_hat(xi)`. Requires `g(0) > 0`.
pub fn apply_multiplier<T: FourierTransform>(
    inner: T,
    multiplier: PeriodicMultiplier,
    n: usize,
) -> Result<(Multiplied<T>, MassReport), MultiplierError> {
    if !(multiplier.total() > 0.0) {
        return Err(MultiplierError::InvalidMultiplier(
            "g(0) must be strictly positive",
        ));
    }
    let mu0 = inner.transform(0.0).value.re;
    let s_n_zero = multiplier.value_at_zero(n);
    let mass = s_n_zero * mu0;
    let n0 = (0..multiplier.coeffs.len()).find(|&m| multiplier.value_at_zero(m) * mu0 > 0.0);
    let report = MassReport {
        s_n_zero,
        mass,
        positive: mass > 0.0,
        n0,
    };
    Ok((
        Multiplied {
            inner,
            multiplier,
            n,
        },
        report,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Complex;
    use crate::spectral::psi0_hat;

    fn psi() -> FromFn<fn(f64) -> Complex> {
        FromFn(psi0_hat as fn(f64) -> Complex)
    }

    #[test]
    fn translation_examples() {
        let id = translate_transform(psi(), 0);
        let moved = translate_transform(psi(), 1);
        for &xi in &[0.0, 0.3, 2.7, 40.0] {
            assert_eq!(id.transform(xi).value, psi0_hat(xi));
            assert!((moved.transform(xi).value.norm() - psi0_hat(xi).norm()).abs() < 1e-15);
        }
        assert!((moved.transform(0.5).value + psi0_hat(0.5)).norm() < 1e-15);
    }

    #[test]
    fn cosine_average_examples() {
        let nu = cosine_average(psi(), 3);
        assert_eq!(nu.transform(0.0).value, psi0_hat(0.0));
        for m in 0..10 {
            let z = (2 * m + 1) as f64 / 12.0;
            assert_eq!(nu.transform(z).value, Complex::new(0.0, 0.0));
        }
    }

    #[test]
    fn multiplier_mass_and_identity() {
        let m = PeriodicMultiplier::new(1.0, alloc::vec![1.0]).unwrap();
        let (id, rep) = apply_multiplier(psi(), m, 5).unwrap();
        assert_eq!(id.transform(1.7).value, psi0_hat(1.7));
        assert!(rep.positive && rep.n0 == Some(0));
        let zero = PeriodicMultiplier::new(1.0, alloc::vec![0.0, 0.0]).unwrap();
        assert!(apply_multiplier(psi(), zero, 1).is_err());
        let late = PeriodicMultiplier::new(2.0, alloc::vec![0.0, 0.0, 0.5]).unwrap();
        let (_, rep) = apply_multiplier(psi(), late, 1).unwrap();
        assert!(!rep.positive && rep.n0 == Some(2));
        assert!(PeriodicMultiplier::new(1.0, alloc::vec![-0.1]).is_err());
    }
}
