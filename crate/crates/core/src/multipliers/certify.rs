//! Grid-verified certificates for oscillating decays.
//!
//! The in-direction multiplies a certified measure by `cos(2 pi xi)`. The
//! out-direction dominates `g f` by a power law, where `g` is a periodic
//! autoconvolved bump sitting on the points `a k` at which `tau` stays large.

use alloc::string::String;
use alloc::vec::Vec;

use super::bump::{autoconvolve, Autoconvolution, BumpSample};
use super::{cosine_average, FourierTransform, MultiplierError};
use crate::decay::DecayExpr;
use crate::measure::MeasureApprox;
use crate::num::{bisect, cospi, linspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    In,
    NotIn,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::NotIn => "not-in",
        }
    }
}

/// How the bump support was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutRoute {
    /// Support inside the crossings of `tau` with `alpha0 / 2`; bound `xi^(-alpha0/2)`.
    Intersections,
    /// Support inside a radius where the sampled oscillation of `tau` is below `alpha0 / 4`.
    Modulus,
}

impl OutRoute {
    pub fn as_str(self) -> &'static str {
        match self {
            OutRoute::Intersections => "intersections",
            OutRoute::Modulus => "modulus",
        }
    }
}

/// The translation-invariant enlargement used by period-`a` certificates.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedSet {
    pub period: f64,
    /// Invariant under translation by multiples of this step.
    pub translation_step: f64,
    pub description: String,
    pub dimension_note: &'static str,
}

pub fn shifted_set_semantics(period: f64) -> ShiftedSet {
    let step = 1.0 / period;
    let description = if period == 1.0 {
        String::from("L + Z: invariant under integer translations")
    } else if period == 2.0 {
        String::from("L + Z/2: invariant under half-integer translations")
    } else {
        alloc::format!("L + (1/{period})Z: invariant under translations by multiples of {step}")
    };
    ShiftedSet {
        period,
        translation_step: step,
        description,
        dimension_note: "dim(L_a) = 0: a countable union of translates of L",
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapCertificate {
    pub direction: Direction,
    pub target_expr: String,
    pub period: f64,
    pub alpha0: Option<f64>,
    /// Support radius of the multiplier bump `g`.
    pub delta: Option<f64>,
    /// Verified bound `xi^(-beta)`; `beta >= alpha0 / 4`.
    pub bound_exponent: Option<f64>,
    pub route: Option<OutRoute>,
    /// Crossings of `tau` with `alpha0 / 2` near `a k`, as `(left, right)`.
    pub intersections: Vec<(f64, f64)>,
    /// In-direction constant, equal to the base measure's.
    pub constant: Option<f64>,
    pub grid: Vec<f64>,
    pub violations: usize,
    /// `max(lhs - rhs)` over the grid; nonpositive when verified.
    pub max_residual: f64,
    pub citations: Vec<&'static str>,
    pub semantics: ShiftedSet,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyPolicy {
    pub k_max: u32,
    pub alpha_floor: f64,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_per_unit: usize,
    pub bump_log2_resolution: u32,
    pub bisect_tol: f64,
    pub modulus_samples: usize,
}

impl Default for CertifyPolicy {
    fn default() -> Self {
        Self {
            k_max: 100,
            alpha_floor: 1e-3,
            grid_lo: 2.0,
            grid_hi: 1e4,
            grid_per_unit: 64,
            bump_log2_resolution: 12,
            bisect_tol: 1e-12,
            modulus_samples: 4096,
        }
    }
}

/// `nu_hat = cos(2 pi xi) mu_hat` against `C |cos(2 pi xi)| base(xi)` on the
/// measure's report grid plus the cosine zeros inside it.
pub fn certify_gap_in(
    f: &DecayExpr,
    measure: &MeasureApprox,
) -> Result<GapCertificate, MultiplierError> {
    let base = match f {
        DecayExpr::AbsCosTimes(w, base) if *w == 2.0 => base,
        _ => {
            return Err(MultiplierError::Precondition(
                "target must be |cos(2 pi xi)| times a base decay",
            ))
        }
    };
    if **base != measure.target.expr {
        return Err(MultiplierError::Precondition(
            "measure was built for a different base decay",
        ));
    }
    if !(measure.report.passed && measure.report.certifies(&measure.target)) {
        return Err(MultiplierError::Precondition(
            "base measure carries no decay certificate",
        ));
    }
    let c = measure.report.c;
    let mut grid = measure.report.xi.clone();
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let first = libm::ceil((4.0 * lo - 1.0) / 2.0) as i64;
    let mut m = first.max(0);
    while ((2 * m + 1) as f64) / 4.0 <= hi {
        grid.push((2 * m + 1) as f64 / 4.0);
        m += 1;
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let nu = cosine_average(measure, 1);
    let (mut violations, mut max_residual) = (0usize, f64::NEG_INFINITY);
    for &xi in &grid {
        let t = nu.transform(xi);
        let bound = c * libm::fabs(cospi(2.0 * xi)) * measure.target.caller(xi);
        let residual = t.value.norm() + t.budget - bound;
        if residual > 0.0 {
            violations += 1;
        }
        max_residual = max_residual.max(residual);
    }
    let cert = GapCertificate {
        direction: Direction::In,
        target_expr: alloc::format!("{f}"),
        period: 1.0,
        alpha0: None,
        delta: None,
        bound_exponent: None,
        route: None,
        intersections: Vec::new(),
        constant: Some(c),
        grid,
        violations,
        max_residual,
        citations: alloc::vec![
            "translation invariance: mu(A - k) has transform e^(-2 pi i xi k) mu_hat",
            "cosine average: (mu_1 + mu_-1)/2 has transform cos(2 pi xi) mu_hat",
        ],
        semantics: shifted_set_semantics(1.0),
    };
    if violations > 0 {
        return Err(MultiplierError::Verification {
            violations,
            max_residual,
        });
    }
    Ok(cert)
}

/// Nearest crossing of `tau = level` walking from `x0` by `step` for up to `span`.
fn crossing(
    tau: &dyn Fn(f64) -> f64,
    x0: f64,
    step: f64,
    span: f64,
    level: f64,
    tol: f64,
) -> Option<f64> {
    let n = libm::ceil(span / step.abs()) as usize;
    let mut a = x0;
    for i in 1..=n {
        let b = x0 + step * i as f64;
        if tau(b) < level {
            let r = bisect(|x| tau(x) - level, a.min(b), a.max(b), tol)?;
            return Some(r);
        }
        a = b;
    }
    None
}

/// Sampled oscillation `sup |tau(x + u) - tau(x)|` over `0 < u <= delta`.
fn oscillation(tau: &dyn Fn(f64) -> f64, base: &[f64], delta: f64) -> f64 {
    let mut w = 0.0f64;
    for &x in base {
        let t0 = tau(x);
        for i in 1..=16 {
            w = w.max(libm::fabs(tau(x + delta * i as f64 / 16.0) - t0));
        }
    }
    w
}

/// Exclusion certificate: a period-`a` bump `g` with `g(xi) xi^(-tau(xi)) <= xi^(-beta)` on the grid.
pub fn certify_gap_out(
    label: &str,
    tau: &dyn Fn(f64) -> f64,
    period: f64,
    policy: &CertifyPolicy,
) -> Result<GapCertificate, MultiplierError> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(MultiplierError::Precondition("period must be positive"));
    }
    let a = period;
    let alpha0 = (1..=policy.k_max)
        .map(|k| tau(a * k as f64))
        .fold(f64::INFINITY, f64::min);
    if !(alpha0 >= policy.alpha_floor) {
        return Err(MultiplierError::Inapplicable {
            alpha0,
            floor: policy.alpha_floor,
        });
    }
    let level = 0.5 * alpha0;
    let step = a / 256.0;
    let mut intersections = Vec::new();
    for k in 1..=policy.k_max {
        let x = a * k as f64;
        let left = crossing(tau, x, -step, 0.5 * a, level, policy.bisect_tol);
        let right = crossing(tau, x, step, 0.5 * a, level, policy.bisect_tol);
        match (left, right) {
            (Some(l), Some(r)) => intersections.push((l, r)),
            _ => {
                intersections.clear();
                break;
            }
        }
    }
    let h = a / (1u64 << policy.bump_log2_resolution) as f64;
    let (route, radius, beta) = if !intersections.is_empty() {
        let r = intersections
            .iter()
            .enumerate()
            .map(|(i, (l, r))| {
                let x = a * (i + 1) as f64;
                (x - l).min(r - x)
            })
            .fold(f64::INFINITY, f64::min);
        (OutRoute::Intersections, r, level)
    } else {
        let mut base = linspace(0.0, a, policy.modulus_samples);
        base.extend(linspace(
            a * (policy.k_max - 1) as f64,
            a * policy.k_max as f64,
            policy.modulus_samples,
        ));
        let mut d = 0.5 * a;
        loop {
            d *= 0.5;
            if d < 4.0 * h {
                return Err(MultiplierError::Precondition(
                    "no radius keeps the oscillation of tau below alpha0/4",
                ));
            }
            if oscillation(tau, &base, d) < 0.25 * alpha0 {
                break;
            }
        }
        (OutRoute::Modulus, d, 0.25 * alpha0)
    };
    // g is supported in [-2 delta_gamma, 2 delta_gamma]; leave one sample of room
    let delta_gamma = (0.5 * (radius - 2.0 * h)).min(0.25 * a * (1.0 - 1e-9));
    let gamma = BumpSample::polynomial(a, policy.bump_log2_resolution, 2, delta_gamma);
    let g: Autoconvolution = autoconvolve(&gamma)?;
    let n =
        libm::ceil((policy.grid_hi - policy.grid_lo) * policy.grid_per_unit as f64) as usize + 1;
    let grid = linspace(policy.grid_lo, policy.grid_hi, n);
    let (mut violations, mut max_residual) = (0usize, f64::NEG_INFINITY);
    for &xi in &grid {
        let lx = libm::log(xi);
        let lhs = g.eval(xi) * libm::exp(-tau(xi) * lx);
        let residual = lhs - libm::exp(-beta * lx);
        if residual > 0.0 {
            violations += 1;
        }
        max_residual = max_residual.max(residual);
    }
    if violations > 0 {
        return Err(MultiplierError::Verification {
            violations,
            max_residual,
        });
    }
    Ok(GapCertificate {
        direction: Direction::NotIn,
        target_expr: String::from(label),
        period: a,
        alpha0: Some(alpha0),
        delta: Some(2.0 * delta_gamma),
        bound_exponent: Some(beta),
        route: Some(route),
        intersections,
        constant: None,
        grid,
        violations,
        max_residual,
        citations: alloc::vec![
            "g f <= xi^(-beta) with beta >= alpha0/4 would place a power law in the Fourier set of L_a",
            "a power law in that Fourier set forces positive Hausdorff dimension of L_a",
        ],
        semantics: shifted_set_semantics(a),
    })
}
