//! Floating point helpers shared by the numeric modules: grids, quadrature,
//! one-dimensional search and a few special functions that need exact
//! argument reduction.

use alloc::vec::Vec;
use core::f64::consts::PI;

pub use num_complex::Complex64 as Complex;

/// Geometric grid description. Points are `start * ratio^i` for `i < points`,
/// with the last point pinned to `end`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl GeometricGrid {
    pub const fn new(start: f64, end: f64, points: usize) -> Self {
        Self { start, end, points }
    }

    /// Grid with a fixed number of points per decade.
    pub fn per_decade(start: f64, end: f64, per_decade: usize) -> Self {
        let decades = libm::log10(end / start);
        let points = (libm::ceil(decades * per_decade as f64) as usize).max(1) + 1;
        Self { start, end, points }
    }

    pub fn is_valid(&self) -> bool {
        self.start > 0.0 && self.end > self.start && self.points >= 2 && self.end.is_finite()
    }

    pub fn values(&self) -> Vec<f64> {
        geometric_points(self.start, self.end, self.points)
    }
}

pub fn geometric_points(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let ls = libm::log(start);
            let step = (libm::log(end) - ls) / (n - 1) as f64;
            let mut out: Vec<f64> = (0..n).map(|i| libm::exp(ls + step * i as f64)).collect();
            out[0] = start;
            out[n - 1] = end;
            out
        }
    }
}

pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n).map(|i| start + step * i as f64).collect()
        }
    }
}

/// `cos(pi * x)` with exact zeros at half integers and exact `±1` at integers.
pub fn cospi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    // r in [-1, 1], exact
    let r = x - 2.0 * libm::round(x * 0.5);
    let a = libm::fabs(r);
    if a == 0.5 {
        0.0
    } else if a <= 0.25 {
        libm::cos(PI * a)
    } else if a < 0.75 {
        libm::sin(PI * (0.5 - a))
    } else {
        -libm::cos(PI * (1.0 - a))
    }
}

/// `sin(pi * x)` with exact zeros at integers.
pub fn sinpi(x: f64) -> f64 {
    cospi(x - 0.5)
}

/// `exp(-2 pi i x)` with reduction of the argument modulo one.
pub fn unit_phase(x: f64) -> Complex {
    let r = x - libm::round(x);
    let (s, c) = libm::sincos(2.0 * PI * r);
    Complex::new(c, -s)
}

/// `ln(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, log_add_exp)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if libm::fabs(dx) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * GK_WEIGHTS[7];
    let mut gauss = fc * G_WEIGHTS[3];
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        kronrod += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, libm::fabs((kronrod - gauss) * h))
}

/// Adaptive Gauss-Kronrod (7, 15) quadrature to an absolute tolerance.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Quadrature {
    let (v, e) = gk15(&mut f, a, b);
    let mut stack = alloc::vec![(a, b, v, e)];
    let mut value = 0.0;
    let mut error = 0.0;
    let mut intervals = 0;
    let min_width = (b - a) * 1e-12;
    while let Some((lo, hi, v, e)) = stack.pop() {
        let share = abs_tol * (hi - lo) / (b - a);
        if e <= share.max(f64::EPSILON * libm::fabs(v)) || hi - lo <= min_width {
            value += v;
            error += e;
            intervals += 1;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        stack.push((lo, mid, v1, e1));
        stack.push((mid, hi, v2, e2));
    }
    Quadrature {
        value,
        error,
        intervals,
    }
}

/// Golden-section search for a local maximum of `f` on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_max(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    rel_tol: f64,
) -> (f64, f64) {
    let inv_phi = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if libm::fabs(b - a) <= rel_tol * (libm::fabs(a) + libm::fabs(b)).max(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Bisection for a sign change of `f` on `[a, b]`; `None` if the endpoints share a sign.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if (fa > 0.0) == (fb > 0.0) {
        return None;
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// In-place radix-2 FFT with the `exp(-2 pi i k n / N)` sign convention.
/// `inverse` flips the sign and does not normalise.
pub fn fft_in_place(data: &mut [Complex], inverse: bool) {
    let n = data.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        let twiddles: Vec<Complex> = (0..half)
            .map(|k| {
                let (s, c) = libm::sincos(ang * k as f64);
                Complex::new(c, s)
            })
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let u = data[start + k];
                let v = data[start + k + half] * twiddles[k];
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cospi_exact_points() {
        assert_eq!(cospi(0.5), 0.0);
        assert_eq!(cospi(-7.5), 0.0);
        assert_eq!(cospi(3.0), -1.0);
        assert_eq!(cospi(4.0), 1.0);
        for &x in &[0.1, 0.3, 0.7, 1.2, -2.9, 13.37] {
            assert!((cospi(x) - libm::cos(PI * x)).abs() < 1e-14);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_quadrature_tolerance() {
        let q = integrate(|x| libm::cos(40.0 * x), 0.0, 1.0, 1e-13);
        assert!((q.value - libm::sin(40.0) / 40.0).abs() < 1e-13);
    }

    #[test]
    fn golden_and_bisect() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6 && v <= 0.0);
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - libm::sqrt(2.0)).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 1.0, 1e-3).is_none());
    }

    #[test]
    fn fft_matches_direct_dft() {
        let n = 16;
        let data: Vec<Complex> = (0..n)
            .map(|i| Complex::new(i as f64 * 0.3, (i * i) as f64 * 0.01))
            .collect();
        let mut out = data.clone();
        fft_in_place(&mut out, false);
        for k in 0..n {
            let direct: Complex = (0..n)
                .map(|j| data[j] * unit_phase((j * k) as f64 / n as f64))
                .sum();
            assert!((direct - out[k]).norm() < 1e-12);
        }
    }
}
