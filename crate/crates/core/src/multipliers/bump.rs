use alloc::vec::Vec;

use super::MultiplierError;
use crate::num::{bisect, fft_in_place, Complex};

/// Hypotheses on the sampled bump `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    Shape,
    Evenness,
    Range,
    PeakValue,
    Support,
    UnitMass,
}

impl Hypothesis {
    pub fn as_str(self) -> &'static str {
        match self {
            Hypothesis::Shape => "sample count is a power of two and the period positive",
            Hypothesis::Evenness => "gamma is even",
            Hypothesis::Range => "0 <= gamma <= 1",
            Hypothesis::PeakValue => "gamma(0) = 1",
            Hypothesis::Support => "gamma vanishes outside [-delta, delta] with delta < a/4",
            Hypothesis::UnitMass => "gamma has unit mass",
        }
    }
}

/// Samples of `gamma` over one period in circular order: index `i` sits at
/// `i h` for `i < N/2` and at `(i - N) h` otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpSample {
    pub period: f64,
    pub delta: f64,
    pub require_unit_mass: bool,
    samples: Vec<f64>,
}

impl BumpSample {
    pub fn from_fn(period: f64, log2_resolution: u32, delta: f64, f: impl Fn(f64) -> f64) -> Self {
        let n = 1usize << log2_resolution;
        let h = period / n as f64;
        let samples = (0..n).map(|i| f(abscissa(i, n, h))).collect();
        Self {
            period,
            delta,
            require_unit_mass: false,
            samples,
        }
    }

    /// `(1 - (t/delta)^2)^q` on `[-delta, delta]`.
    pub fn polynomial(period: f64, log2_resolution: u32, q: u32, delta: f64) -> Self {
        Self::from_fn(period, log2_resolution, delta, |t| {
            let u = t / delta;
            if u * u >= 1.0 {
                0.0
            } else {
                libm::pow(1.0 - u * u, q as f64)
            }
        })
    }

    /// [`BumpSample::polynomial`] with `delta` chosen so the discrete mass is 1.
    pub fn polynomial_unit_mass(
        period: f64,
        log2_resolution: u32,
        q: u32,
    ) -> Result<Self, MultiplierError> {
        let mass = |d: f64| Self::polynomial(period, log2_resolution, q, d).mass() - 1.0;
        let hi = 0.25 * period * (1.0 - 1e-9);
        if mass(hi) < 0.0 {
            return Err(MultiplierError::Hypothesis(Hypothesis::UnitMass));
        }
        let d = bisect(mass, period / (1u64 << log2_resolution) as f64, hi, 1e-15)
            .ok_or(MultiplierError::Hypothesis(Hypothesis::UnitMass))?;
        let mut s = Self::polynomial(period, log2_resolution, q, d);
        s.require_unit_mass = true;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.period / self.samples.len() as f64
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        abscissa(i, self.samples.len(), self.step())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `h sum gamma_i`.
    pub fn mass(&self) -> f64 {
        self.step() * self.samples.iter().sum::<f64>()
    }

    /// `h sum gamma_i^2`.
    pub fn norm2(&self) -> f64 {
        self.step() * self.samples.iter().map(|g| g * g).sum::<f64>()
    }

    pub fn check(&self) -> Result<(), Hypothesis> {
        let n = self.samples.len();
        if !(n >= 4 && n.is_power_of_two() && self.period > 0.0) {
            return Err(Hypothesis::Shape);
        }
        if (1..n).any(|i| (self.samples[i] - self.samples[n - i]).abs() > 1e-15) {
            return Err(Hypothesis::Evenness);
        }
        if self.samples.iter().any(|&g| !(0.0..=1.0).contains(&g)) {
            return Err(Hypothesis::Range);
        }
        if self.samples[0] != 1.0 {
            return Err(Hypothesis::PeakValue);
        }
        let outside = (0..n).any(|i| self.abscissa(i).abs() > self.delta && self.samples[i] != 0.0);
        if !(self.delta > 0.0 && self.delta < 0.25 * self.period) || outside {
            return Err(Hypothesis::Support);
        }
        if self.require_unit_mass && (self.mass() - 1.0).abs() > 1e-9 {
            return Err(Hypothesis::UnitMass);
        }
        Ok(())
    }
}

fn abscissa(i: usize, n: usize, h: f64) -> f64 {
    if i < n / 2 {
        i as f64 * h
    } else {
        (i as f64 - n as f64) * h
    }
}

/// What the autoconvolution is expected to satisfy, as measured.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AutoconvolutionReport {
    pub even_error: f64,
    pub g_zero: f64,
    pub min_g: f64,
    pub max_g: f64,
    /// Largest `|g|` beyond `2 delta`.
    pub support_excess: f64,
    pub mass: f64,
    /// `(int gamma)^2 / ||gamma||^2`.
    pub mass_expected: f64,
    pub min_coeff: f64,
    pub max_coeff_imag: f64,
    /// `max |g_hat(n) ||gamma||^2 - gamma_hat(n)^2|`.
    pub spectral_law_error: f64,
    /// Direct convolution against the FFT route.
    pub route_error: f64,
}

impl AutoconvolutionReport {
    /// All six conclusions within `tol`, coefficients at least `-coeff_tol`.
    pub fn holds(&self, tol: f64, coeff_tol: f64) -> bool {
        self.even_error <= tol
            && (self.g_zero - 1.0).abs() <= tol
            && self.min_g >= -tol
            && self.max_g <= 1.0 + tol
            && self.support_excess <= tol
            && (self.mass - self.mass_expected).abs() <= tol
            && self.min_coeff >= -coeff_tol
    }
}

/// `g = gamma * gamma / ||gamma||^2` sampled on the bump grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Autoconvolution {
    pub period: f64,
    pub delta: f64,
    pub norm2: f64,
    /// Direct circular convolution, circular order.
    pub g: Vec<f64>,
    /// `h sum g_i e^(-2 pi i n i / N)` for `0 <= n < N`.
    pub coeffs: Vec<Complex>,
    pub gamma_coeffs: Vec<Complex>,
    pub report: AutoconvolutionReport,
}

fn dft(values: &[f64], h: f64) -> Vec<Complex> {
    let mut buf: Vec<Complex> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft_in_place(&mut buf, false);
    buf.iter().map(|c| c * h).collect()
}

pub fn autoconvolve(gamma: &BumpSample) -> Result<Autoconvolution, MultiplierError> {
    gamma.check().map_err(MultiplierError::Hypothesis)?;
    let n = gamma.len();
    let h = gamma.step();
    let norm2 = gamma.norm2();
    let s = gamma.samples();
    let nonzero: Vec<usize> = (0..n).filter(|&i| s[i] != 0.0).collect();
    let mut g = alloc::vec![0.0; n];
    for &j in &nonzero {
        for &k in &nonzero {
            g[(j + k) % n] += s[j] * s[k];
        }
    }
    for v in &mut g {
        *v *= h / norm2;
    }
    let gamma_coeffs = dft(s, h);
    // FFT route: g_hat = gamma_hat^2 / ||gamma||^2, then back to samples
    let mut buf: Vec<Complex> = gamma_coeffs.iter().map(|c| c * c / (h * norm2)).collect();
    fft_in_place(&mut buf, true);
    let route_error = buf
        .iter()
        .zip(&g)
        .map(|(b, d)| (b.re / n as f64 - d).abs())
        .fold(0.0, f64::max);
    let coeffs = dft(&g, h);
    let spectral_law_error = coeffs
        .iter()
        .zip(&gamma_coeffs)
        .map(|(c, y)| (c * norm2 - y * y).norm())
        .fold(0.0, f64::max);
    let even_error = (1..n).map(|i| (g[i] - g[n - i]).abs()).fold(0.0, f64::max);
    let support_excess = (0..n)
        .filter(|&i| abscissa(i, n, h).abs() > 2.0 * gamma.delta + 1e-12 * gamma.period)
        .map(|i| g[i].abs())
        .fold(0.0, f64::max);
    let report = AutoconvolutionReport {
        even_error,
        g_zero: g[0],
        min_g: g.iter().copied().fold(f64::INFINITY, f64::min),
        max_g: g.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        support_excess,
        mass: h * g.iter().sum::<f64>(),
        mass_expected: gamma.mass() * gamma.mass() / norm2,
        min_coeff: coeffs.iter().map(|c| c.re).fold(f64::INFINITY, f64::min),
        max_coeff_imag: coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max),
        spectral_law_error,
        route_error,
    };
    Ok(Autoconvolution {
        period: gamma.period,
        delta: gamma.delta,
        norm2,
        g,
        coeffs,
        gamma_coeffs,
        report,
    })
}

impl Autoconvolution {
    pub fn step(&self) -> f64 {
        self.period / self.g.len() as f64
    }

    /// Periodic linear interpolation of the samples. The interpolant's
    /// coefficients are the sample coefficients times `sinc^2`, so they stay
    /// nonnegative.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.g.len();
        let u = x / self.step();
        let i0 = libm::floor(u);
        let frac = u - i0;
        let i = (i0 as i64).rem_euclid(n as i64) as usize;
        let j = (i + 1) % n;
        self.g[i] * (1.0 - frac) + self.g[j] * frac
    }

    /// Cosine-series coefficients `a_0 .. a_{terms-1}` with period `a`.
    /// Negative rounding residue is clamped to zero and its size returned.
    pub fn cosine_coefficients(&self, terms: usize) -> (Vec<f64>, f64) {
        let terms = terms.min(self.g.len() / 2);
        let mut clamped = 0.0f64;
        let coeffs = (0..terms)
            .map(|k| {
                let c = self.coeffs[k].re / self.period * if k == 0 { 1.0 } else { 2.0 };
                if c < 0.0 {
                    clamped = clamped.max(-c);
                    0.0
                } else {
                    c
                }
            })
            .collect();
        (coeffs, clamped)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conclusions_hold_for_a_polynomial_bump() {
        let b = BumpSample::polynomial_unit_mass(6.0, 10, 2).unwrap();
        assert!(b.check().is_ok());
        let g = autoconvolve(&b).unwrap();
        assert!(g.report.holds(1e-12, 1e-12), "{:?}", g.report);
        assert!(g.report.spectral_law_error < 1e-10 && g.report.route_error < 1e-12);
        assert!((g.report.mass * g.norm2 - 1.0).abs() < 1e-9);
        assert!((g.eval(0.0) - 1.0).abs() < 1e-12 && g.eval(3.0) == 0.0);
        assert_eq!(g.eval(1.234), g.eval(1.234 - 6.0));
    }

    #[test]
    fn hypotheses_are_named() {
        let wide = BumpSample::polynomial(1.0, 8, 2, 0.3);
        assert_eq!(wide.check(), Err(Hypothesis::Support));
        let tall = BumpSample::from_fn(1.0, 8, 0.1, |t| if t.abs() <= 0.1 { 2.0 } else { 0.0 });
        assert_eq!(tall.check(), Err(Hypothesis::Range));
        let odd = BumpSample::from_fn(1.0, 8, 0.1, |t| {
            if t.abs() <= 0.1 {
                1.0 - t.max(0.0)
            } else {
                0.0
            }
        });
        assert_eq!(odd.check(), Err(Hypothesis::Evenness));
        // unit mass cannot fit under a/4 when a <= 2
        assert!(BumpSample::polynomial_unit_mass(2.0, 8, 2).is_err());
    }

    #[test]
    fn cosine_series_reproduces_samples() {
        let b = BumpSample::polynomial(1.0, 9, 3, 1.0 / 6.0);
        let g = autoconvolve(&b).unwrap();
        let (a, clamped) = g.cosine_coefficients(256);
        assert!(clamped < 1e-13);
        let x = 51.0 / 512.0;
        let s: f64 = a
            .iter()
            .enumerate()
            .map(|(k, c)| c * libm::cos(2.0 * core::f64::consts::PI * k as f64 * x))
            .sum();
        assert!((s - g.eval(x)).abs() < 1e-6, "{s} {}", g.eval(x));
    }
}
