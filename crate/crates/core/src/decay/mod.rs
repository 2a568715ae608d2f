//! Decay functions `f`, their log-domain profile `phi(gamma) = -ln f(e^gamma)`
//! and exponent `tau(xi) = -ln f(xi) / ln xi`.
//!
//! Every node is evaluated at a pair `(xi, gamma)` with `gamma = ln xi`.
//! Smooth nodes read `gamma` and never form `xi`, so towers and huge
//! abscissas stay finite. Oscillatory nodes (`abscos`, `tauexp`) need `xi`
//! itself and fail with [`DecayError::Unrepresentable`] once `e^gamma`
//! overflows.

mod classify;
mod tails;
mod text;

pub use classify::{
    classify, classify_with_certificate, Evidence, ExclusionEvidence, GapEvidence,
    MembershipEvidence, Outcome, Policy, TestKind, TestRecord, Verdict,
};
pub use tails::{asymptotically_close, estimate_tails, estimate_tails_on, Closeness, TailEstimate};
pub use text::{parse_tau, split_top_level};

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::E;
use core::fmt;

use crate::num::{cospi, log_add_exp, log_sum_exp};

/// `a_1 = e^(e^e)` for the tower `a_k = e^(e^(e^k))`.
const TOWER_A1: f64 = 3_814_279.104_760_200_7;

#[derive(Clone, Debug, PartialEq)]
pub enum DecayError {
    /// Abscissa at or below the node cutoff.
    Domain {
        xi: f64,
        cutoff: f64,
    },
    /// The node needs `xi = e^gamma`, which is not a finite double.
    Unrepresentable {
        gamma: f64,
    },
    /// Beyond the last level of a truncated tower.
    TowerTruncated {
        levels: u32,
        gamma: f64,
    },
    Parse {
        position: usize,
        message: String,
    },
    Degenerate(&'static str),
}

impl fmt::Display for DecayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecayError::Domain { xi, cutoff } => {
                write!(f, "abscissa {xi} is not above the cutoff {cutoff}")
            }
            DecayError::Unrepresentable { gamma } => {
                write!(
                    f,
                    "oscillatory node needs xi = exp({gamma}), which overflows"
                )
            }
            DecayError::TowerTruncated { levels, gamma } => {
                write!(
                    f,
                    "log-abscissa {gamma} lies beyond the {levels}-level tower"
                )
            }
            DecayError::Parse { position, message } => {
                write!(f, "parse error at {position}: {message}")
            }
            DecayError::Degenerate(m) => write!(f, "degenerate input: {m}"),
        }
    }
}

/// Coefficients `c_k` of `B = sum_k c_k theta_k`.
#[derive(Clone, Debug, PartialEq)]
pub enum BluhmSchedule {
    /// `c_k = ratio^k` for `k >= 1`.
    Geometric { ratio: f64 },
    /// `c_1, c_2, ...` with all later coefficients zero.
    Finite(Vec<f64>),
}

impl Default for BluhmSchedule {
    fn default() -> Self {
        BluhmSchedule::Geometric { ratio: 0.25 }
    }
}

impl BluhmSchedule {
    pub fn coefficient(&self, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match self {
            BluhmSchedule::Geometric { ratio } => libm::pow(*ratio, k as f64),
            BluhmSchedule::Finite(c) => c.get(k as usize - 1).copied().unwrap_or(0.0),
        }
    }

    /// `sum_{k > k0} c_k`.
    pub fn tail_sum(&self, k0: u32) -> f64 {
        match self {
            BluhmSchedule::Geometric { ratio } => {
                libm::pow(*ratio, k0 as f64 + 1.0) / (1.0 - ratio)
            }
            BluhmSchedule::Finite(c) => c.iter().skip(k0 as usize).sum(),
        }
    }

    pub fn total(&self) -> f64 {
        self.tail_sum(0)
    }

    fn is_valid(&self) -> bool {
        match self {
            BluhmSchedule::Geometric { ratio } => *ratio > 0.0 && *ratio < 1.0,
            BluhmSchedule::Finite(c) => {
                c.iter().all(|&x| x >= 0.0 && x.is_finite()) && c.iter().any(|&x| x > 0.0)
            }
        }
    }
}

/// Exponent expressions for `xi^(-tau(xi))`.
#[derive(Clone, Debug, PartialEq)]
pub enum TauExpr {
    Const(f64),
    /// `|cos(w pi xi)|`.
    AbsCos(f64),
    Scale(f64, Box<TauExpr>),
    Add(Box<TauExpr>, Box<TauExpr>),
}

impl TauExpr {
    pub fn eval(&self, xi: f64) -> f64 {
        match self {
            TauExpr::Const(c) => *c,
            TauExpr::AbsCos(w) => libm::fabs(cospi(w * xi)),
            TauExpr::Scale(c, t) => c * t.eval(xi),
            TauExpr::Add(a, b) => a.eval(xi) + b.eval(xi),
        }
    }

    /// Guaranteed range of the expression over all `xi`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            TauExpr::Const(c) => (*c, *c),
            TauExpr::AbsCos(w) if *w == 0.0 => (1.0, 1.0),
            TauExpr::AbsCos(_) => (0.0, 1.0),
            TauExpr::Scale(c, t) => {
                let (lo, hi) = t.bounds();
                (c * lo, c * hi)
            }
            TauExpr::Add(a, b) => {
                let (a0, a1) = a.bounds();
                let (b0, b1) = b.bounds();
                (a0 + b0, a1 + b1)
            }
        }
    }

    /// Whether [`Self::bounds`] is attained as the liminf and limsup.
    pub fn bounds_are_sharp(&self) -> bool {
        self.oscillating_terms() <= 1
    }

    pub fn is_constant(&self) -> bool {
        self.oscillating_terms() == 0
    }

    fn oscillating_terms(&self) -> usize {
        match self {
            TauExpr::Const(_) => 0,
            TauExpr::AbsCos(w) => usize::from(*w != 0.0),
            TauExpr::Scale(c, t) => {
                if *c == 0.0 {
                    0
                } else {
                    t.oscillating_terms()
                }
            }
            TauExpr::Add(a, b) => a.oscillating_terms() + b.oscillating_terms(),
        }
    }
}

/// Caller-supplied `phi(gamma)`.
#[derive(Clone)]
pub struct CustomPhi {
    pub name: String,
    pub cutoff: f64,
    pub phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CustomPhi {
    pub fn new(
        name: impl Into<String>,
        cutoff: f64,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            cutoff,
            phi: Arc::new(phi),
        }
    }
}

impl fmt::Debug for CustomPhi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPhi")
            .field("name", &self.name)
            .field("cutoff", &self.cutoff)
            .finish()
    }
}

impl PartialEq for CustomPhi {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.cutoff == other.cutoff && Arc::ptr_eq(&self.phi, &other.phi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DecayExpr {
    Const(f64),
    /// `xi^(-alpha)`.
    PowerLaw(f64),
    /// `1 / ln(xi)^p`.
    LogPower(f64),
    /// `exp(-ln(xi)^p)`.
    ExpLogPower(f64),
    /// `xi^(-1 / ln ln xi)`.
    InverseLogLogExponent,
    /// `1/a_k` on `[a_k, a_{k+1})` with `a_k = e^(e^(e^k))`, `k < levels`.
    StepTower {
        levels: u32,
    },
    ThetaK(u32),
    BluhmB(BluhmSchedule),
    Power(Box<DecayExpr>, u32),
    Product(Vec<DecayExpr>),
    /// `|cos(omega pi xi)| * child`.
    AbsCosTimes(f64, Box<DecayExpr>),
    TauExponent(TauExpr),
    Custom(CustomPhi),
}

pub const DEFAULT_TOWER_LEVELS: u32 = 5;

/// `(gamma, phi(gamma))`; `phi` is `+inf` where `f` vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDomainPoint {
    pub gamma: f64,
    pub phi: f64,
}

#[derive(Clone, Copy)]
struct At {
    xi: f64,
    gamma: f64,
}

/// `theta_k(xi) = (1+xi)^(-1/(2+k)) ln(e+xi) ln(e+ln(e+xi))` for `xi >= 0`.
pub fn theta(k: u32, xi: f64) -> f64 {
    let a = libm::fabs(xi);
    let l1 = libm::log(E + a);
    libm::pow(1.0 + a, -1.0 / (2.0 + k as f64)) * l1 * libm::log(E + l1)
}

/// `-ln theta_k(e^gamma)` without forming `e^gamma`.
pub fn theta_phi(k: u32, gamma: f64) -> f64 {
    let softplus = log_add_exp(0.0, gamma);
    let l1 = log_add_exp(1.0, gamma);
    let l2 = log_add_exp(1.0, libm::log(l1));
    softplus / (2.0 + k as f64) - libm::log(l1) - libm::log(l2)
}

fn bluhm_terms(schedule: &BluhmSchedule, mut term: impl FnMut(u32) -> f64) -> f64 {
    match schedule {
        BluhmSchedule::Finite(c) => log_sum_exp(
            c.iter()
                .enumerate()
                .filter(|(_, &ck)| ck > 0.0)
                .map(|(i, &ck)| libm::log(ck) + term(i as u32 + 1)),
        ),
        BluhmSchedule::Geometric { ratio } => {
            // log terms are concave in k: walk past the peak until they are negligible
            let lr = libm::log(*ratio);
            let mut acc = f64::NEG_INFINITY;
            let mut best = f64::NEG_INFINITY;
            let mut prev = f64::NEG_INFINITY;
            let mut k = 1u32;
            loop {
                let t = k as f64 * lr + term(k);
                acc = log_add_exp(acc, t);
                best = best.max(t);
                if t < prev && t < best - 45.0 {
                    break;
                }
                prev = t;
                k += 1;
                if k > 50_000_000 {
                    break;
                }
            }
            acc
        }
    }
}

impl DecayExpr {
    pub fn power_law(alpha: f64) -> Self {
        DecayExpr::PowerLaw(alpha)
    }

    pub fn log_power(p: f64) -> Self {
        DecayExpr::LogPower(p)
    }

    pub fn step_tower() -> Self {
        DecayExpr::StepTower {
            levels: DEFAULT_TOWER_LEVELS,
        }
    }

    pub fn bluhm_default() -> Self {
        DecayExpr::BluhmB(BluhmSchedule::default())
    }

    /// Smallest valid abscissa; evaluation needs `xi > cutoff`.
    pub fn cutoff(&self) -> f64 {
        match self {
            DecayExpr::Const(_)
            | DecayExpr::PowerLaw(_)
            | DecayExpr::ThetaK(_)
            | DecayExpr::BluhmB(_) => 0.0,
            DecayExpr::TauExponent(_) => 0.0,
            DecayExpr::LogPower(_) => E,
            DecayExpr::ExpLogPower(_) => 1.0,
            DecayExpr::InverseLogLogExponent | DecayExpr::StepTower { .. } => libm::exp(E),
            DecayExpr::Power(c, _) | DecayExpr::AbsCosTimes(_, c) => c.cutoff(),
            DecayExpr::Product(cs) => cs.iter().map(DecayExpr::cutoff).fold(0.0, f64::max),
            DecayExpr::Custom(c) => c.cutoff,
        }
    }

    /// Whether evaluation reads `xi` directly (and so fails once it overflows).
    pub fn is_oscillatory(&self) -> bool {
        match self {
            DecayExpr::AbsCosTimes(w, c) => *w != 0.0 || c.is_oscillatory(),
            DecayExpr::TauExponent(t) => !t.is_constant(),
            DecayExpr::Power(c, _) => c.is_oscillatory(),
            DecayExpr::Product(cs) => cs.iter().any(DecayExpr::is_oscillatory),
            _ => false,
        }
    }

    fn check(&self, xi: f64) -> Result<(), DecayError> {
        let cutoff = self.cutoff();
        if xi > cutoff {
            Ok(())
        } else {
            Err(DecayError::Domain { xi, cutoff })
        }
    }

    fn phi_at(&self, at: At) -> Result<f64, DecayError> {
        let g = at.gamma;
        Ok(match self {
            DecayExpr::Const(c) => {
                if *c == 0.0 {
                    f64::INFINITY
                } else {
                    -libm::log(*c)
                }
            }
            DecayExpr::PowerLaw(a) => a * g,
            DecayExpr::LogPower(p) => p * libm::log(g),
            DecayExpr::ExpLogPower(p) => libm::pow(g, *p),
            DecayExpr::InverseLogLogExponent => g / libm::log(g),
            DecayExpr::StepTower { levels } => {
                let k = libm::floor(libm::log(libm::log(g)));
                if k >= *levels as f64 {
                    return Err(DecayError::TowerTruncated {
                        levels: *levels,
                        gamma: g,
                    });
                }
                libm::exp(libm::exp(k))
            }
            DecayExpr::ThetaK(k) => theta_phi(*k, g),
            DecayExpr::BluhmB(s) => -bluhm_terms(s, |k| -theta_phi(k, g)),
            DecayExpr::Power(c, n) => *n as f64 * c.phi_at(at)?,
            DecayExpr::Product(cs) => {
                let mut acc = 0.0;
                for c in cs {
                    acc += c.phi_at(at)?;
                }
                acc
            }
            DecayExpr::AbsCosTimes(w, c) => {
                let child = c.phi_at(at)?;
                if *w == 0.0 {
                    child
                } else {
                    Self::need_xi(at)?;
                    -libm::log(libm::fabs(cospi(w * at.xi))) + child
                }
            }
            DecayExpr::TauExponent(t) => {
                if t.is_constant() {
                    g * t.eval(0.0)
                } else {
                    Self::need_xi(at)?;
                    g * t.eval(at.xi)
                }
            }
            DecayExpr::Custom(c) => (c.phi)(g),
        })
    }

    fn need_xi(at: At) -> Result<(), DecayError> {
        if at.xi.is_finite() {
            Ok(())
        } else {
            Err(DecayError::Unrepresentable { gamma: at.gamma })
        }
    }

    fn f_direct(&self, xi: f64) -> f64 {
        match self {
            DecayExpr::Const(c) => *c,
            DecayExpr::PowerLaw(a) => libm::pow(xi, -a),
            DecayExpr::LogPower(p) => libm::pow(libm::log(xi), -p),
            DecayExpr::ExpLogPower(p) => libm::exp(-libm::pow(libm::log(xi), *p)),
            DecayExpr::InverseLogLogExponent => libm::pow(xi, -1.0 / libm::log(libm::log(xi))),
            DecayExpr::StepTower { .. } => {
                if xi < TOWER_A1 {
                    libm::exp(-E)
                } else {
                    libm::exp(-libm::exp(E))
                }
            }
            DecayExpr::ThetaK(k) => theta(*k, xi),
            DecayExpr::BluhmB(s) => bluhm_direct(s, xi),
            DecayExpr::Power(c, n) => libm::pow(c.f_direct(xi), *n as f64),
            DecayExpr::Product(cs) => cs.iter().map(|c| c.f_direct(xi)).product(),
            DecayExpr::AbsCosTimes(w, c) => libm::fabs(cospi(w * xi)) * c.f_direct(xi),
            DecayExpr::TauExponent(t) => libm::pow(xi, -t.eval(xi)),
            DecayExpr::Custom(c) => libm::exp(-(c.phi)(libm::log(xi))),
        }
    }

    /// `f(xi)` by direct formulas.
    pub fn eval_f(&self, xi: f64) -> Result<f64, DecayError> {
        self.check(xi)?;
        if let DecayExpr::StepTower { levels } = self {
            // a_2 overflows a double, so only the first two levels are reachable here
            if *levels < 2 && xi >= TOWER_A1 {
                return Err(DecayError::TowerTruncated {
                    levels: *levels,
                    gamma: libm::log(xi),
                });
            }
        }
        Ok(self.f_direct(xi))
    }

    /// `phi(gamma) = -ln f(e^gamma)`.
    pub fn eval_phi(&self, gamma: f64) -> Result<f64, DecayError> {
        let cutoff = self.cutoff();
        if cutoff > 0.0 && gamma <= libm::log(cutoff) {
            return Err(DecayError::Domain {
                xi: libm::exp(gamma),
                cutoff,
            });
        }
        self.phi_at(At {
            xi: libm::exp(gamma),
            gamma,
        })
    }

    /// `tau(xi) = phi(ln xi) / ln xi`.
    pub fn eval_tau(&self, xi: f64) -> Result<f64, DecayError> {
        if xi <= 1.0 {
            return Err(DecayError::Domain {
                xi,
                cutoff: self.cutoff().max(1.0),
            });
        }
        self.check(xi)?;
        let gamma = libm::log(xi);
        Ok(self.phi_at(At { xi, gamma })? / gamma)
    }

    /// `-ln f(xi)`, evaluated at `(xi, ln xi)` so oscillatory nodes see the exact abscissa.
    pub fn neg_log_f(&self, xi: f64) -> Result<f64, DecayError> {
        self.check(xi)?;
        self.phi_at(At {
            xi,
            gamma: libm::log(xi),
        })
    }

    pub fn log_point(&self, gamma: f64) -> Result<LogDomainPoint, DecayError> {
        Ok(LogDomainPoint {
            gamma,
            phi: self.eval_phi(gamma)?,
        })
    }

    /// The expression `f^n`.
    pub fn power_closure(self, n: u32) -> DecayExpr {
        power_closure(self, n)
    }

    pub fn validate(&self) -> Result<(), DecayError> {
        let ok = match self {
            DecayExpr::Const(c) => *c >= 0.0 && c.is_finite(),
            DecayExpr::PowerLaw(a) | DecayExpr::LogPower(a) | DecayExpr::ExpLogPower(a) => {
                *a > 0.0 && a.is_finite()
            }
            DecayExpr::InverseLogLogExponent => true,
            DecayExpr::StepTower { levels } => *levels >= 1,
            DecayExpr::ThetaK(k) => *k >= 1,
            DecayExpr::BluhmB(s) => s.is_valid(),
            DecayExpr::Power(c, n) => {
                return if *n >= 1 {
                    c.validate()
                } else {
                    Err(DecayError::Degenerate("power exponent must be at least 1"))
                }
            }
            DecayExpr::Product(cs) => {
                if cs.is_empty() {
                    return Err(DecayError::Degenerate("empty product"));
                }
                return cs.iter().try_for_each(DecayExpr::validate);
            }
            DecayExpr::AbsCosTimes(w, c) => {
                if !w.is_finite() {
                    return Err(DecayError::Degenerate("cosine frequency must be finite"));
                }
                return c.validate();
            }
            DecayExpr::TauExponent(t) => tau_valid(t),
            DecayExpr::Custom(c) => c.cutoff >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(DecayError::Degenerate("parameter out of range"))
        }
    }
}

fn tau_valid(t: &TauExpr) -> bool {
    match t {
        TauExpr::Const(c) => *c >= 0.0 && c.is_finite(),
        TauExpr::AbsCos(w) => w.is_finite(),
        TauExpr::Scale(c, t) => *c >= 0.0 && c.is_finite() && tau_valid(t),
        TauExpr::Add(a, b) => tau_valid(a) && tau_valid(b),
    }
}

fn bluhm_direct(schedule: &BluhmSchedule, xi: f64) -> f64 {
    match schedule {
        BluhmSchedule::Finite(c) => c
            .iter()
            .enumerate()
            .map(|(i, ck)| ck * theta(i as u32 + 1, xi))
            .sum(),
        BluhmSchedule::Geometric { ratio } => {
            let mut sum = 0.0;
            let mut ck = 1.0;
            let mut prev = 0.0;
            for k in 1..50_000_000u32 {
                ck *= ratio;
                let t = ck * theta(k, xi);
                sum += t;
                if t < prev && t < 1e-20 * sum {
                    break;
                }
                prev = t;
            }
            sum
        }
    }
}

/// `Power(expr, n)`, or `expr` itself for `n == 1`.
pub fn power_closure(expr: DecayExpr, n: u32) -> DecayExpr {
    if n == 1 {
        expr
    } else {
        DecayExpr::Power(Box::new(expr), n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        libm::fabs(a - b) <= tol * b.abs().max(1.0)
    }

    #[test]
    fn direct_values() {
        assert!(close(
            DecayExpr::PowerLaw(1.0).eval_f(10.0).unwrap(),
            0.1,
            1e-15
        ));
        assert!(close(
            DecayExpr::LogPower(1.0).eval_f(E * E).unwrap(),
            0.5,
            1e-15
        ));
        let osc = DecayExpr::AbsCosTimes(2.0, Box::new(DecayExpr::LogPower(1.0)));
        assert_eq!(osc.eval_f(10.25).unwrap(), 0.0);
        assert_eq!(osc.eval_phi(libm::log(10.25)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn table_rows_in_log_domain() {
        let g = 7.5;
        assert!(close(
            DecayExpr::LogPower(1.0).eval_phi(g).unwrap(),
            libm::log(g),
            1e-15
        ));
        assert!(close(
            DecayExpr::PowerLaw(0.3).eval_phi(g).unwrap(),
            0.3 * g,
            1e-15
        ));
        assert!(close(
            DecayExpr::ExpLogPower(0.5).eval_phi(g).unwrap(),
            libm::sqrt(g),
            1e-15
        ));
        assert!(close(
            DecayExpr::InverseLogLogExponent.eval_phi(g).unwrap(),
            g / libm::log(g),
            1e-15
        ));
    }

    #[test]
    fn tau_examples() {
        assert!(close(
            DecayExpr::PowerLaw(0.5).eval_tau(100.0).unwrap(),
            0.5,
            1e-15
        ));
        let t = DecayExpr::TauExponent(TauExpr::AbsCos(1.0));
        assert_eq!(t.eval_tau(7.0).unwrap(), 1.0);
        // ln ln xi / ln xi at xi = e^e is 1/e
        let v = DecayExpr::LogPower(1.0).eval_tau(libm::exp(E)).unwrap();
        assert!(close(v, 0.367_879_441_171_442_33, 1e-14));
    }

    #[test]
    fn cutoffs_are_enforced() {
        assert!(matches!(
            DecayExpr::LogPower(1.0).eval_f(2.0),
            Err(DecayError::Domain { .. })
        ));
        assert!(matches!(
            DecayExpr::InverseLogLogExponent.eval_phi(1.0),
            Err(DecayError::Domain { .. })
        ));
        assert!(DecayExpr::PowerLaw(1.0).eval_tau(1.0).is_err());
    }

    #[test]
    fn tower_log_domain() {
        let t = DecayExpr::step_tower();
        // gamma in [e^(e^k), e^(e^(k+1))) gives phi = e^(e^k)
        assert!(close(t.eval_phi(3.0).unwrap(), E, 1e-15));
        assert!(close(
            t.eval_phi(1e5).unwrap(),
            libm::exp(libm::exp(2.0)),
            1e-15
        ));
        assert!(t.eval_phi(1e300).is_err());
        assert!(close(t.eval_f(1e6).unwrap(), libm::exp(-E), 1e-14));
        assert!(close(t.eval_f(1e7).unwrap(), 1.0 / TOWER_A1, 1e-12));
    }

    #[test]
    fn theta_values() {
        assert!(close(theta(1, 0.0), 1.313_261_687_518_222_8, 1e-15));
        for &xi in &[0.5, 3.0, 1e3, 1e9] {
            let l = libm::log(E + xi);
            assert!(close(
                theta(1, xi) * libm::cbrt(1.0 + xi) / (l * libm::log(E + l)),
                1.0,
                1e-14
            ));
            assert!(close(
                libm::exp(-theta_phi(2, libm::log(xi))),
                theta(2, xi),
                1e-13
            ));
        }
        assert!(theta(2, 1e6) > theta(1, 1e6));
    }

    #[test]
    fn bluhm_log_and_direct_agree() {
        let b = DecayExpr::bluhm_default();
        for &xi in &[0.5, 10.0, 1e4, 1e8] {
            let direct = b.eval_f(xi).unwrap();
            let via = libm::exp(-b.eval_phi(libm::log(xi)).unwrap());
            assert!(close(direct, via, 1e-12), "{xi}: {direct} {via}");
        }
        let one = DecayExpr::BluhmB(BluhmSchedule::Finite(vec![1.0]));
        assert!(close(one.eval_f(42.0).unwrap(), theta(1, 42.0), 1e-15));
    }

    #[test]
    fn power_closure_identity() {
        let f = DecayExpr::LogPower(1.0);
        assert_eq!(power_closure(f.clone(), 1), f);
        let cube = power_closure(f, 3);
        for &xi in &[5.0, 100.0, 1e7] {
            assert!(close(
                cube.eval_f(xi).unwrap(),
                DecayExpr::LogPower(3.0).eval_f(xi).unwrap(),
                1e-14
            ));
        }
    }

    #[test]
    fn oscillatory_nodes_refuse_huge_gamma() {
        let t = DecayExpr::TauExponent(TauExpr::AbsCos(1.0));
        assert!(matches!(
            t.eval_phi(800.0),
            Err(DecayError::Unrepresentable { .. })
        ));
        assert!(DecayExpr::PowerLaw(1.0).eval_phi(800.0).is_ok());
    }
}
