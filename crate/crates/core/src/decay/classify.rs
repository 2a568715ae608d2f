//! Membership verdicts for the Liouville Fourier set.
//!
//! Known node shapes are decided by symbolic rules. Everything else goes to
//! a numeric fallback on the doubling grid `gamma_j = gamma_0 * 2^j`, which
//! runs, in order: zeros in the tail, convexity of `phi`, the `tau` limit,
//! concavity (informational), and the multiplicativity test.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use super::{BluhmSchedule, DecayExpr, LogDomainPoint, TauExpr};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    InFourierSet,
    NotInFourierSet,
    Gap,
    Inconclusive,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::InFourierSet => "in",
            Outcome::NotInFourierSet => "not-in",
            Outcome::Gap => "gap",
            Outcome::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MembershipEvidence {
    Symbolic {
        rule: &'static str,
    },
    /// max of `tau` over the last quarter of the grid.
    TauLimitZero {
        tail_max: f64,
    },
    Certificate {
        summary: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExclusionEvidence {
    Symbolic {
        rule: &'static str,
    },
    TauLimitPositive {
        tail_min: f64,
    },
    /// Slopes of `phi` nondecreasing and `phi` strictly increasing.
    ConvexPhi {
        min_slope_change: f64,
        slope_range: (f64, f64),
    },
    /// `phi(lambda gamma) >= lambda phi(gamma)` on every sampled pair.
    TauForcesOut {
        pairs: usize,
        min_excess: f64,
    },
    /// Zeros on the tail of the grid with `tau` otherwise positive.
    ZerosWithPositiveTau {
        zeros: usize,
        tail_min: f64,
    },
    Certificate {
        summary: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum GapEvidence {
    Symbolic {
        rule: &'static str,
    },
    /// Sampled zeros extend to the end of the grid.
    UnboundedZeros {
        zeros: usize,
    },
}

/// Which test decided the outcome. `Undecided` carries the notes collected.
#[derive(Clone, Debug, PartialEq)]
pub enum Evidence {
    Membership(MembershipEvidence),
    Exclusion(ExclusionEvidence),
    Gap(GapEvidence),
    Undecided { notes: Vec<String> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestKind {
    Symbolic,
    Zeros,
    Convexity,
    TauLimit,
    Concavity,
    Multiplicativity,
}

impl TestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::Symbolic => "symbolic",
            TestKind::Zeros => "zeros",
            TestKind::Convexity => "phi-convexity",
            TestKind::TauLimit => "tau-limit",
            TestKind::Concavity => "phi-concavity",
            TestKind::Multiplicativity => "multiplicativity",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestRecord {
    pub test: TestKind,
    pub fired: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub evidence: Evidence,
    /// Sampled `(gamma, phi)`; empty when a symbolic rule fired.
    pub samples: Vec<LogDomainPoint>,
    pub trail: Vec<TestRecord>,
}

impl Verdict {
    pub fn outcome(&self) -> Outcome {
        match self.evidence {
            Evidence::Membership(_) => Outcome::InFourierSet,
            Evidence::Exclusion(_) => Outcome::NotInFourierSet,
            Evidence::Gap(_) => Outcome::Gap,
            Evidence::Undecided { .. } => Outcome::Inconclusive,
        }
    }

    /// Short label for the deciding test.
    pub fn rule(&self) -> String {
        match &self.evidence {
            Evidence::Membership(MembershipEvidence::Symbolic { rule })
            | Evidence::Exclusion(ExclusionEvidence::Symbolic { rule })
            | Evidence::Gap(GapEvidence::Symbolic { rule }) => format!("symbolic: {rule}"),
            Evidence::Membership(MembershipEvidence::TauLimitZero { .. }) => {
                "tau-limit zero".into()
            }
            Evidence::Membership(MembershipEvidence::Certificate { .. }) => {
                "multiplier certificate".into()
            }
            Evidence::Exclusion(ExclusionEvidence::TauLimitPositive { .. }) => {
                "tau-limit positive".into()
            }
            Evidence::Exclusion(ExclusionEvidence::ConvexPhi { .. }) => "phi convex".into(),
            Evidence::Exclusion(ExclusionEvidence::TauForcesOut { .. }) => "tau forces out".into(),
            Evidence::Exclusion(ExclusionEvidence::ZerosWithPositiveTau { .. }) => {
                "zeros with positive tau".into()
            }
            Evidence::Exclusion(ExclusionEvidence::Certificate { .. }) => {
                "exclusion certificate".into()
            }
            Evidence::Gap(GapEvidence::UnboundedZeros { .. }) => "unbounded zero set".into(),
            Evidence::Undecided { .. } => "none".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Policy {
    pub gamma0: f64,
    pub max_doublings: u32,
    /// `tau` tail max below this declares the limit zero.
    pub zero_limit: f64,
    /// `tau` tail min above this declares the limit positive.
    pub positive_limit: f64,
    /// Relative tolerance on slope changes for convexity/concavity.
    pub curvature_tol: f64,
    pub lambdas: Vec<f64>,
    pub symbolic: bool,
    pub convexity: bool,
    pub tau_limit: bool,
    pub multiplicativity: bool,
}

impl Default for Policy {
    fn default() -> Self {
        Self {
            gamma0: 4.0,
            max_doublings: 24,
            zero_limit: 1e-3,
            positive_limit: 1e-2,
            curvature_tol: 1e-9,
            lambdas: vec![1.5, 2.0, 4.0],
            symbolic: true,
            convexity: true,
            tau_limit: true,
            multiplicativity: true,
        }
    }
}

enum Sym {
    In(&'static str),
    Out(&'static str),
    Gap(&'static str),
}

fn symbolic(e: &DecayExpr) -> Option<Sym> {
    use DecayExpr as D;
    Some(match e {
        D::Const(c) if *c > 0.0 => Sym::In("positive constant"),
        D::Const(_) => Sym::Out("identically zero"),
        D::PowerLaw(_) => Sym::Out("power law has constant positive tau"),
        D::LogPower(_) => Sym::In("log power has phi = p log gamma"),
        D::ExpLogPower(p) if *p < 1.0 => Sym::In("phi = gamma^p is sublinear for p < 1"),
        D::ExpLogPower(p) if *p == 1.0 => Sym::Out("exp(-log xi) reduces to powerlaw(1)"),
        D::ExpLogPower(_) => Sym::Out("phi = gamma^p is superlinear for p > 1"),
        D::InverseLogLogExponent => Sym::In("tau = 1/log log xi tends to zero"),
        D::StepTower { .. } => Sym::Gap("step tower meets neither tau condition"),
        D::ThetaK(_) => Sym::Out("tau tends to 1/(2+k)"),
        D::BluhmB(BluhmSchedule::Geometric { .. }) => {
            Sym::In("Bluhm function with infinite schedule")
        }
        D::BluhmB(BluhmSchedule::Finite(_)) => {
            Sym::Out("finite Bluhm sum has tau tending to 1/(2+K)")
        }
        D::Power(c, _) => return symbolic(c),
        D::Product(cs) => {
            let parts: Vec<Option<Sym>> = cs.iter().map(symbolic).collect();
            if parts.iter().all(|p| matches!(p, Some(Sym::In(_)))) {
                Sym::In("product of members")
            } else if parts
                .iter()
                .all(|p| matches!(p, Some(Sym::In(_)) | Some(Sym::Out(_))))
            {
                Sym::Out("product with a factor whose tau liminf is positive")
            } else {
                return None;
            }
        }
        D::AbsCosTimes(w, c) => match symbolic(c)? {
            Sym::Out(_) => Sym::Out("cosine factor only lowers an excluded decay"),
            _ if *w == 0.0 => return symbolic(c),
            Sym::In(_) => Sym::Gap("oscillating factor with unbounded zeros over a member"),
            Sym::Gap(_) => Sym::Gap("oscillating factor over a gap function"),
        },
        D::TauExponent(t) => return tau_rule(t),
        D::Custom(_) => return None,
    })
}

fn tau_rule(t: &TauExpr) -> Option<Sym> {
    let (lo, hi) = t.bounds();
    if lo > 0.0 {
        Some(Sym::Out("tau bounded below by a positive constant"))
    } else if hi == 0.0 {
        Some(Sym::In("tau identically zero"))
    } else if t.bounds_are_sharp() && !t.is_constant() {
        Some(Sym::Gap("tau oscillates with liminf 0 and positive limsup"))
    } else {
        None
    }
}

fn record(trail: &mut Vec<TestRecord>, test: TestKind, fired: bool, detail: String) {
    trail.push(TestRecord {
        test,
        fired,
        detail,
    });
}

pub fn classify(expr: &DecayExpr, policy: &Policy) -> Verdict {
    let mut trail = Vec::new();
    if policy.symbolic {
        match symbolic(expr) {
            Some(s) => {
                let evidence = match s {
                    Sym::In(rule) => Evidence::Membership(MembershipEvidence::Symbolic { rule }),
                    Sym::Out(rule) => Evidence::Exclusion(ExclusionEvidence::Symbolic { rule }),
                    Sym::Gap(rule) => Evidence::Gap(GapEvidence::Symbolic { rule }),
                };
                record(&mut trail, TestKind::Symbolic, true, format!("{expr}"));
                return Verdict {
                    evidence,
                    samples: Vec::new(),
                    trail,
                };
            }
            None => record(
                &mut trail,
                TestKind::Symbolic,
                false,
                "no rule for this shape".into(),
            ),
        }
    }
    numeric(expr, policy, trail)
}

/// Like [`classify`], but an attached multiplier certificate decides a gap.
pub fn classify_with_certificate(
    expr: &DecayExpr,
    policy: &Policy,
    certificate: Option<(bool, String)>,
) -> Verdict {
    let mut v = classify(expr, policy);
    if let (Outcome::Gap | Outcome::Inconclusive, Some((inside, summary))) =
        (v.outcome(), certificate)
    {
        record(
            &mut v.trail,
            TestKind::Symbolic,
            true,
            format!("certificate: {summary}"),
        );
        v.evidence = if inside {
            Evidence::Membership(MembershipEvidence::Certificate { summary })
        } else {
            Evidence::Exclusion(ExclusionEvidence::Certificate { summary })
        };
    }
    v
}

fn numeric(expr: &DecayExpr, policy: &Policy, mut trail: Vec<TestRecord>) -> Verdict {
    let log_cut = if expr.cutoff() > 0.0 {
        libm::log(expr.cutoff())
    } else {
        f64::NEG_INFINITY
    };
    let mut samples = Vec::new();
    for j in 0..=policy.max_doublings {
        let g = policy.gamma0 * libm::pow(2.0, j as f64);
        if g > log_cut {
            if let Ok(phi) = expr.eval_phi(g) {
                if !phi.is_nan() {
                    samples.push(LogDomainPoint { gamma: g, phi });
                }
            }
        }
    }
    let mut notes = Vec::new();
    if samples.len() < 8 {
        notes.push(format!("only {} usable grid points", samples.len()));
        return Verdict {
            evidence: Evidence::Undecided { notes },
            samples,
            trail,
        };
    }
    let tail_start = samples.len() - samples.len().div_ceil(4);
    let tau: Vec<f64> = samples.iter().map(|p| p.phi / p.gamma).collect();
    let finite_tail: Vec<f64> = tau[tail_start..]
        .iter()
        .copied()
        .filter(|t| t.is_finite())
        .collect();

    let zeros = samples.iter().filter(|p| p.phi == f64::INFINITY).count();
    if zeros > 0 {
        let last_is_zero = samples.last().is_some_and(|p| p.phi == f64::INFINITY);
        let tail_min = finite_tail.iter().copied().fold(f64::INFINITY, f64::min);
        let evidence = if !finite_tail.is_empty() && tail_min > policy.positive_limit {
            Evidence::Exclusion(ExclusionEvidence::ZerosWithPositiveTau { zeros, tail_min })
        } else if last_is_zero || zeros * 2 >= samples.len() {
            Evidence::Gap(GapEvidence::UnboundedZeros { zeros })
        } else {
            Evidence::Undecided {
                notes: vec![format!("{zeros} sampled zeros")],
            }
        };
        record(
            &mut trail,
            TestKind::Zeros,
            !matches!(evidence, Evidence::Undecided { .. }),
            format!("{zeros} zeros"),
        );
        return Verdict {
            evidence,
            samples,
            trail,
        };
    }

    let slopes: Vec<f64> = samples
        .windows(2)
        .map(|w| (w[1].phi - w[0].phi) / (w[1].gamma - w[0].gamma))
        .collect();
    let tol = |a: f64, b: f64| policy.curvature_tol * a.abs().max(b.abs()).max(1e-300);
    let changes: Vec<f64> = slopes.windows(2).map(|w| w[1] - w[0]).collect();
    let convex = slopes.windows(2).all(|w| w[1] >= w[0] - tol(w[0], w[1]));
    let concave = slopes.windows(2).all(|w| w[1] <= w[0] + tol(w[0], w[1]));
    let increasing = samples.windows(2).all(|w| w[1].phi > w[0].phi);

    if policy.convexity {
        if convex && increasing {
            let min_change = changes.iter().copied().fold(f64::INFINITY, f64::min);
            let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            record(
                &mut trail,
                TestKind::Convexity,
                true,
                format!("slopes in [{lo:e}, {hi:e}]"),
            );
            let evidence = Evidence::Exclusion(ExclusionEvidence::ConvexPhi {
                min_slope_change: min_change,
                slope_range: (lo, hi),
            });
            return Verdict {
                evidence,
                samples,
                trail,
            };
        }
        let why = if convex {
            "convex but not increasing"
        } else {
            "slopes decrease somewhere"
        };
        record(&mut trail, TestKind::Convexity, false, why.into());
    }

    let tail_max = finite_tail
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let tail_min = finite_tail.iter().copied().fold(f64::INFINITY, f64::min);
    if policy.tau_limit {
        if tail_max < policy.zero_limit && tail_min >= -policy.zero_limit {
            record(
                &mut trail,
                TestKind::TauLimit,
                true,
                format!("tail max {tail_max:e}"),
            );
            return Verdict {
                evidence: Evidence::Membership(MembershipEvidence::TauLimitZero { tail_max }),
                samples,
                trail,
            };
        }
        if tail_min > policy.positive_limit {
            // a positive tail is only a limit when tau is settled there
            let settled = concave || convex || tail_max <= 2.0 * tail_min;
            if settled {
                record(
                    &mut trail,
                    TestKind::TauLimit,
                    true,
                    format!("tail min {tail_min:e}"),
                );
                return Verdict {
                    evidence: Evidence::Exclusion(ExclusionEvidence::TauLimitPositive { tail_min }),
                    samples,
                    trail,
                };
            }
        }
        record(
            &mut trail,
            TestKind::TauLimit,
            false,
            format!("tail tau in [{tail_min:e}, {tail_max:e}]"),
        );
    }

    if concave {
        record(
            &mut trail,
            TestKind::Concavity,
            false,
            "phi concave; tau limit exists but the grid cannot resolve it".into(),
        );
        notes.push(
            "phi is concave on the grid, so tau has a limit; thresholds did not resolve it".into(),
        );
    }

    if policy.multiplicativity {
        let mut pairs = 0usize;
        let mut min_excess = f64::INFINITY;
        let mut all_ge = true;
        let mut all_le = true;
        for p in &samples[tail_start.saturating_sub(samples.len() / 4)..] {
            for &lam in &policy.lambdas {
                let Ok(phi_l) = expr.eval_phi(lam * p.gamma) else {
                    continue;
                };
                let excess = phi_l - lam * p.phi;
                let slack = 1e-12 * phi_l.abs().max(1.0);
                pairs += 1;
                min_excess = min_excess.min(excess);
                all_ge &= excess >= -slack;
                all_le &= excess <= slack;
            }
        }
        let tail_positive = tail_min > 0.0;
        if pairs > 0 && all_ge && tail_positive && !all_le {
            record(
                &mut trail,
                TestKind::Multiplicativity,
                true,
                format!("{pairs} pairs with f(xi^l) <= f(xi)^l"),
            );
            return Verdict {
                evidence: Evidence::Exclusion(ExclusionEvidence::TauForcesOut {
                    pairs,
                    min_excess,
                }),
                samples,
                trail,
            };
        }
        let detail = if pairs > 0 && all_le {
            notes
                .push("f(xi^l) >= f(xi)^l on the grid: tau decreases, so its limit decides".into());
            "tau decreasing; limit undecided on the grid"
        } else {
            "mixed inequalities"
        };
        record(&mut trail, TestKind::Multiplicativity, false, detail.into());
    }
    notes.push("no test fired decisively".into());
    Verdict {
        evidence: Evidence::Undecided { notes },
        samples,
        trail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decay::CustomPhi;
    use alloc::boxed::Box;

    fn outcome(s: &str) -> Outcome {
        classify(&s.parse().unwrap(), &Policy::default()).outcome()
    }

    #[test]
    fn table_rows() {
        assert_eq!(outcome("powerlaw(0.3)"), Outcome::NotInFourierSet);
        assert_eq!(outcome("logpow(1)"), Outcome::InFourierSet);
        assert_eq!(outcome("explogpow(0.5)"), Outcome::InFourierSet);
        assert_eq!(outcome("explogpow(2)"), Outcome::NotInFourierSet);
        assert_eq!(outcome("explogpow(1)"), Outcome::NotInFourierSet);
        assert_eq!(outcome("invloglog"), Outcome::InFourierSet);
        assert_eq!(outcome("steptower"), Outcome::Gap);
        assert_eq!(outcome("tauexp(abscos(1))"), Outcome::Gap);
        assert_eq!(outcome("abscos(2,logpow(1))"), Outcome::Gap);
        assert_eq!(outcome("abscos(2,powerlaw(1))"), Outcome::NotInFourierSet);
    }

    #[test]
    fn numeric_route_agrees_with_symbols() {
        let off = Policy {
            symbolic: false,
            ..Policy::default()
        };
        for (s, want) in [
            ("powerlaw(0.3)", Outcome::NotInFourierSet),
            ("logpow(1)", Outcome::InFourierSet),
            ("logpow(3)", Outcome::InFourierSet),
            ("explogpow(0.5)", Outcome::InFourierSet),
            ("explogpow(2)", Outcome::NotInFourierSet),
            ("theta(1)", Outcome::NotInFourierSet),
        ] {
            let e: DecayExpr = s.parse().unwrap();
            assert_eq!(classify(&e, &off).outcome(), want, "{s}");
        }
    }

    #[test]
    fn slow_linear_phi_is_not_called_a_member() {
        let e = DecayExpr::Custom(CustomPhi::new("tiny-slope", 0.0, |g| 1e-5 * g));
        let v = classify(&e, &Policy::default());
        assert_eq!(v.outcome(), Outcome::NotInFourierSet);
        assert!(matches!(
            v.evidence,
            Evidence::Exclusion(ExclusionEvidence::ConvexPhi { .. })
        ));
    }

    #[test]
    fn oscillating_custom_is_inconclusive() {
        let e = DecayExpr::Custom(CustomPhi::new("wobble", 0.0, |g| {
            g * (1.0 + libm::sin(g)) * 0.5
        }));
        assert_eq!(
            classify(&e, &Policy::default()).outcome(),
            Outcome::Inconclusive
        );
    }

    #[test]
    fn certificate_settles_a_gap() {
        let e = DecayExpr::TauExponent(TauExpr::AbsCos(1.0));
        let v = classify_with_certificate(
            &e,
            &Policy::default(),
            Some((false, "grid-verified".into())),
        );
        assert_eq!(v.outcome(), Outcome::NotInFourierSet);
        let p = DecayExpr::Power(Box::new(DecayExpr::LogPower(1.0)), 2);
        let v = classify_with_certificate(&p, &Policy::default(), Some((false, "ignored".into())));
        assert_eq!(v.outcome(), Outcome::InFourierSet);
    }
}
