//! Level-by-level construction of `mu_K = psi0 G_K` with decay certified on a
//! declared grid, plus the kernels `theta_k`, the weights `rho_k`, and `B`.
//!
//! All certification here is grid-verified: an inequality is checked at the
//! listed frequencies, with every known truncation error added to the side
//! that must be small.

use alloc::vec::Vec;
use core::fmt;

pub use crate::decay::theta as theta_k;
use crate::decay::{BluhmSchedule, DecayError, DecayExpr};
use crate::num::{geometric_points, golden_max, GeometricGrid};
use crate::spectral::SpectralError;

mod build;

pub use build::{
    build_measure, select_m, support_cover, Attempt, BuildFailure, ConstructionState, DecayReport,
    LevelRecord, MeasureApprox,
};

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureError {
    Decay(DecayError),
    Spectral(SpectralError),
    /// `theta_k / f` stayed above 1 on every tested tail window.
    RhoTail {
        k: u32,
        last_n: f64,
    },
    Rejected {
        outcome: &'static str,
    },
    /// No `M` in the schedule satisfied the level inequality.
    ScheduleExhausted {
        level: u32,
        last_m: u64,
    },
    InvalidPolicy(&'static str),
    EmptySupport {
        level: u32,
    },
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Decay(e) => write!(f, "{e}"),
            Self::Spectral(e) => write!(f, "{e}"),
            Self::RhoTail { k, last_n } => {
                write!(f, "theta_{k}/f exceeds 1 on every window up to {last_n}; target likely inadmissible")
            }
            Self::Rejected { outcome } => write!(
                f,
                "classifier verdict '{outcome}' does not admit a construction"
            ),
            Self::ScheduleExhausted { level, last_m } => {
                write!(
                    f,
                    "cap exceeded: no M up to {last_m} satisfies the level-{level} inequality"
                )
            }
            Self::InvalidPolicy(m) => write!(f, "invalid policy: {m}"),
            Self::EmptySupport { level } => write!(f, "support cover is empty at level {level}"),
        }
    }
}

impl From<DecayError> for MeasureError {
    fn from(e: DecayError) -> Self {
        Self::Decay(e)
    }
}

impl From<SpectralError> for MeasureError {
    fn from(e: SpectralError) -> Self {
        Self::Spectral(e)
    }
}

/// `|xi| + shift`, nudged past the cutoff where the two coincide.
fn shifted(xi: f64, shift: f64, cutoff: f64) -> f64 {
    let x = libm::fabs(xi) + shift;
    if x > cutoff {
        x
    } else {
        cutoff.next_up()
    }
}

/// A decay target shifted to be defined on `[0, inf)` and scaled to sup `1/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayTarget {
    pub expr: DecayExpr,
    /// The representative is `scale * f(|xi| + shift)`.
    pub shift: f64,
    pub scale: f64,
}

impl DecayTarget {
    pub fn new(expr: DecayExpr) -> Result<Self, MeasureError> {
        expr.validate()?;
        let shift = expr.cutoff().max(1.0);
        let raw = |xi: f64| expr.eval_f(shifted(xi, shift, expr.cutoff()));
        let mut points = alloc::vec![0.0];
        points.extend(geometric_points(1e-3, 1e12, 601));
        let mut best = (0.0, f64::NEG_INFINITY);
        for &x in &points {
            let v = raw(x)?;
            if v > best.1 {
                best = (x, v);
            }
        }
        if !(best.1 > 0.0 && best.1.is_finite()) {
            return Err(MeasureError::Decay(DecayError::Degenerate(
                "target has no positive finite sup",
            )));
        }
        let i = points.iter().position(|&x| x == best.0).unwrap_or(0);
        let lo = points[i.saturating_sub(1)];
        let hi = points[(i + 1).min(points.len() - 1)];
        let (_, refined) = golden_max(|x| raw(x).unwrap_or(f64::NEG_INFINITY), lo, hi, 1e-12);
        let sup = best.1.max(refined);
        Ok(Self {
            expr,
            shift,
            scale: 0.5 / sup,
        })
    }

    /// The target in the caller's scale, `f(|xi| + shift)`.
    pub fn caller(&self, xi: f64) -> f64 {
        self.expr
            .eval_f(shifted(xi, self.shift, self.expr.cutoff()))
            .unwrap_or(f64::NAN)
    }

    /// The normalized representative.
    pub fn eval(&self, xi: f64) -> f64 {
        self.scale * self.caller(xi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoPolicy {
    pub start_n: f64,
    pub cap_n: f64,
    pub tail_samples: usize,
    pub search_points: usize,
    pub safety: f64,
}

impl Default for RhoPolicy {
    fn default() -> Self {
        Self {
            start_n: 16.0,
            cap_n: 1e40,
            tail_samples: 64,
            search_points: 4000,
            safety: 0.9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rho {
    /// `safety / max theta_k/f`.
    pub rho: f64,
    pub argmax: f64,
    pub max_ratio: f64,
    /// Start of the tail window where `theta_k <= f` was sampled.
    pub tail_n: f64,
}

/// `rho_k = safety * [max_xi theta_k(xi) / f(xi)]^(-1)`.
pub fn rho_k(target: &DecayTarget, k: u32, policy: &RhoPolicy) -> Result<Rho, MeasureError> {
    if k == 0 {
        return Err(MeasureError::InvalidPolicy("k must be at least 1"));
    }
    let ratio = |xi: f64| theta_k(k, xi) / target.eval(xi);
    let mut n = policy.start_n;
    loop {
        if n > policy.cap_n {
            return Err(MeasureError::RhoTail { k, last_n: n / 2.0 });
        }
        if geometric_points(n, 4.0 * n, policy.tail_samples)
            .iter()
            .all(|&x| ratio(x) <= 1.0)
        {
            break;
        }
        n *= 2.0;
    }
    let mut pts = alloc::vec![0.0];
    pts.extend(geometric_points(1e-2, n, policy.search_points));
    let vals: Vec<f64> = pts.iter().map(|&x| ratio(x)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(MeasureError::Decay(DecayError::Degenerate(
            "theta_k / f is not finite on [0, N]",
        )));
    }
    let (i, &best) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let lo = pts[i.saturating_sub(1)];
    let hi = pts[(i + 1).min(pts.len() - 1)];
    let (x, refined) = golden_max(ratio, lo, hi, 1e-10);
    let (argmax, max_ratio) = if refined > best {
        (x, refined)
    } else {
        (pts[i], best)
    };
    Ok(Rho {
        rho: policy.safety / max_ratio,
        argmax,
        max_ratio,
        tail_n: n,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BluhmValue {
    pub value: f64,
    /// Bound on the omitted `sum_{k > K} c_k theta_k(xi)`.
    pub tail_bound: f64,
}

/// `sum_{k <= k_trunc} c_k theta_k(xi)`. Every `theta_k` sits below
/// `ln(e+xi) ln(e+ln(e+xi))`, which bounds the tail.
pub fn bluhm_b(xi: f64, schedule: &BluhmSchedule, k_trunc: u32) -> BluhmValue {
    let value = (1..=k_trunc)
        .map(|k| schedule.coefficient(k) * theta_k(k, xi))
        .sum();
    let a = libm::fabs(xi);
    let l1 = libm::log(core::f64::consts::E + a);
    let cap = l1 * libm::log(core::f64::consts::E + l1);
    BluhmValue {
        value,
        tail_bound: schedule.tail_sum(k_trunc) * cap,
    }
}

/// Frequencies where level inequalities are checked.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyGrid {
    pub geometric: GeometricGrid,
    /// All integers `1..=integers` are added.
    pub integers: u32,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        Self {
            geometric: GeometricGrid::new(1.0, 1e4, 400),
            integers: 64,
        }
    }
}

impl VerifyGrid {
    pub fn with_max(grid_max: f64) -> Self {
        Self {
            geometric: GeometricGrid::new(1.0, grid_max, 400),
            integers: 64,
        }
    }

    /// Sorted, deduplicated, including zero.
    pub fn values(&self) -> Vec<f64> {
        let mut v = alloc::vec![0.0];
        v.extend(self.geometric.values());
        v.extend((1..=self.integers).map(|i| i as f64));
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurePolicy {
    pub m_min: u64,
    pub m_cap: u64,
    pub k_cap: u32,
    pub verify: VerifyGrid,
    pub report: GeometricGrid,
    pub tau_trunc: f64,
    /// Extra band beyond the largest verified frequency.
    pub band_margin: i64,
    pub rho: RhoPolicy,
    /// Skip the classifier check.
    pub assert_admissible: bool,
}

impl Default for MeasurePolicy {
    fn default() -> Self {
        Self {
            m_min: 8,
            m_cap: 2000,
            k_cap: 3,
            verify: VerifyGrid::default(),
            report: GeometricGrid::new(10.0, 1e4, 400),
            tau_trunc: crate::spectral::DEFAULT_TAU_TRUNC,
            band_margin: 4096,
            rho: RhoPolicy::default(),
            assert_admissible: false,
        }
    }
}

impl MeasurePolicy {
    /// Both grids end at `grid_max`.
    pub fn with_grid_max(grid_max: f64) -> Self {
        Self {
            verify: VerifyGrid::with_max(grid_max),
            report: GeometricGrid::new(10.0, grid_max, 400),
            ..Self::default()
        }
    }

    pub fn band(&self) -> i64 {
        let top = self
            .verify
            .geometric
            .end
            .max(self.report.end)
            .max(self.verify.integers as f64);
        libm::ceil(top) as i64 + self.band_margin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_at_zero() {
        assert!((theta_k(1, 0.0) - libm::log(core::f64::consts::E + 1.0)).abs() < 1e-15);
        assert!(theta_k(2, 1e6) > theta_k(1, 1e6));
    }

    #[test]
    fn log_target_normalization() {
        let t = DecayTarget::new(DecayExpr::LogPower(1.0)).unwrap();
        assert!((t.eval(0.0) - 0.5).abs() < 1e-12);
        let xi: f64 = 100.0;
        assert!((t.eval(xi) - 0.5 / libm::log(core::f64::consts::E + xi)).abs() < 1e-14);
    }

    #[test]
    fn rho_for_constant_and_scaling() {
        let half = DecayTarget::new(DecayExpr::Const(0.5)).unwrap();
        let r = rho_k(&half, 1, &RhoPolicy::default());
        let r = r.unwrap();
        let (_, m) = golden_max(|x| theta_k(1, x), 0.0, 100.0, 1e-12);
        assert!(
            (r.rho - 0.9 * 0.5 / m).abs() < 1e-9,
            "{} {}",
            r.rho,
            0.45 / m
        );
        let log = DecayTarget::new(DecayExpr::LogPower(1.0)).unwrap();
        let r = rho_k(&log, 1, &RhoPolicy::default()).unwrap();
        assert!(r.rho > 0.0 && r.rho.is_finite());
        let mut scaled = log.clone();
        scaled.scale *= 0.25;
        let s = rho_k(&scaled, 1, &RhoPolicy::default()).unwrap();
        assert!((s.rho / r.rho - 0.25).abs() < 1e-9);
    }

    #[test]
    fn bluhm_examples() {
        let one = BluhmSchedule::Finite(alloc::vec![1.0]);
        for &xi in &[0.0, 3.0, 1e5] {
            let b = bluhm_b(xi, &one, 5);
            assert_eq!(b.value, theta_k(1, xi));
            assert_eq!(b.tail_bound, 0.0);
        }
        let half = BluhmSchedule::Geometric { ratio: 0.5 };
        let b = bluhm_b(0.0, &half, 60);
        assert!((b.value - libm::log(core::f64::consts::E + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn verify_grid_shape() {
        let v = VerifyGrid::default().values();
        assert_eq!(v[0], 0.0);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert!((1..=64).all(|i| v.contains(&(i as f64))));
        assert_eq!(*v.last().unwrap(), 1e4);
    }
}
