//! Mother window `w(t) = (35/32)(1-t^2)^3` on `[-1, 1]` and the smooth bump
//! `psi0(x) = 2 w(2x - 1)` on `[0, 1]`.

use core::f64::consts::PI;

use crate::num::{integrate, unit_phase, Complex};

pub const WINDOW_NAME: &str = "(35/32)(1-t^2)^3";

/// Bound `|w_hat(eta)| <= ENVELOPE / (2 pi eta)^4`: the jumps of `w'''` at
/// `+-1` contribute 105 and `int |w''''|` about 198.9.
pub const ENVELOPE: f64 = 304.0;

pub fn w(t: f64) -> f64 {
    let a = 1.0 - t * t;
    if a <= 0.0 {
        0.0
    } else {
        35.0 / 32.0 * a * a * a
    }
}

/// `w_hat(eta) = 105 j_3(2 pi eta) / (2 pi eta)^3`.
pub fn w_hat(eta: f64) -> f64 {
    let x = 2.0 * PI * libm::fabs(eta);
    if x < 2.5 {
        // j_3(x)/x^3 series, terms ratio -x^2 / (2 k (7 + 2k))
        let y = -0.5 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..40 {
            term *= y / (k as f64 * (7.0 + 2.0 * k as f64));
            sum += term;
            if libm::fabs(term) < 1e-18 {
                break;
            }
        }
        sum
    } else {
        let (s, c) = libm::sincos(x);
        let x2 = x * x;
        let j3 = (15.0 / (x2 * x2) - 6.0 / x2) * s - (15.0 / (x2 * x) - 1.0 / x) * c;
        105.0 * j3 / (x2 * x)
    }
}

/// `min(1, ENVELOPE / (2 pi eta)^4)`.
pub fn w_hat_envelope(eta: f64) -> f64 {
    let x = 2.0 * PI * libm::fabs(eta);
    let x2 = x * x;
    (ENVELOPE / (x2 * x2)).min(1.0)
}

/// `w_hat(xi)` by adaptive quadrature; used as the reference route.
pub fn window_transform(xi: f64) -> Complex {
    let tol = 1e-13;
    // split into panels so each holds a few oscillations
    let panels = (libm::ceil(libm::fabs(xi) * 2.0) as usize).clamp(1, 4096);
    let mut re = 0.0;
    let mut im = 0.0;
    for i in 0..panels {
        let a = -1.0 + 2.0 * i as f64 / panels as f64;
        let b = -1.0 + 2.0 * (i + 1) as f64 / panels as f64;
        let t = tol / panels as f64;
        re += integrate(|t| w(t) * unit_phase(xi * t).re, a, b, t).value;
        im += integrate(|t| w(t) * unit_phase(xi * t).im, a, b, t).value;
    }
    Complex::new(re, im)
}

pub fn psi0(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        psi0_local(x, 1.0 - x)
    }
}

/// `psi0` from `x` and `1 - x`, each computed by the caller without cancellation.
pub fn psi0_local(x: f64, one_minus_x: f64) -> f64 {
    if x <= 0.0 || one_minus_x <= 0.0 {
        0.0
    } else {
        let a = 4.0 * x * one_minus_x;
        2.0 * 35.0 / 32.0 * a * a * a
    }
}

/// `psi0_hat(xi) = exp(-pi i xi) w_hat(xi/2)`.
pub fn psi0_hat(xi: f64) -> Complex {
    unit_phase(0.5 * xi) * w_hat(0.5 * xi)
}

/// `min(1, ENVELOPE / (pi xi)^4)`, a bound on `|psi0_hat(xi)|`.
pub fn psi0_envelope(xi: f64) -> f64 {
    w_hat_envelope(0.5 * xi)
}

/// `sum_{m >= m0} psi0_envelope(m)` for integer `m0 >= 1`, bounded by an integral past a cutoff.
pub fn psi0_envelope_tail(m0: f64) -> f64 {
    let m0 = libm::ceil(m0.max(1.0));
    let c = ENVELOPE / libm::pow(PI, 4.0);
    let mut sum = 0.0;
    let mut m = m0;
    let stop = m0 + 1000.0;
    while m < stop {
        sum += psi0_envelope(m);
        m += 1.0;
    }
    // sum_{m >= stop} c/m^4 <= c / (3 (stop - 1)^3)
    sum + c / (3.0 * libm::pow(stop - 1.0, 3.0))
}

/// `sup_xi sum_n psi0_envelope(xi - n)`.
pub fn psi0_envelope_lattice_sum() -> f64 {
    // for xi in [0, 1/2] the distances are at least |n| (n <= 0) and n - 1/2 (n >= 1)
    let mut half = 0.0;
    for n in 1..2000 {
        half += psi0_envelope(n as f64 - 0.5);
    }
    half += ENVELOPE / libm::pow(PI, 4.0) / (3.0 * libm::pow(1998.5, 3.0));
    1.0 + half + psi0_envelope_tail(1.0)
}
