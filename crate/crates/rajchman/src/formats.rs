//! Report envelope, build manifest and gap certificate documents.

use rajchman_core::measure::{Attempt, DecayReport, LevelRecord, MeasureApprox, MeasurePolicy};
use rajchman_core::multipliers::GapCertificate;
use rajchman_core::num::GeometricGrid;
use rajchman_core::spectral::WINDOW_NAME;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Status;

pub const REPORT_FORMAT: &str = "rajchman-report/1";

/// Every report carries the config that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report<T> {
    pub format: String,
    pub command: String,
    pub status: Status,
    pub config: RunConfig,
    pub summary: String,
    pub citations: Vec<String>,
    pub result: T,
}

impl<T> Report<T> {
    pub fn new(
        config: &RunConfig,
        status: Status,
        summary: String,
        citations: &[&str],
        result: T,
    ) -> Self {
        Self {
            format: REPORT_FORMAT.into(),
            command: config.command.name().into(),
            status,
            config: config.clone(),
            summary,
            citations: citations.iter().map(|c| c.to_string()).collect(),
            result,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl From<GeometricGrid> for GridDoc {
    fn from(g: GeometricGrid) -> Self {
        Self {
            start: g.start,
            end: g.end,
            points: g.points,
        }
    }
}

impl From<GridDoc> for GeometricGrid {
    fn from(g: GridDoc) -> Self {
        GeometricGrid::new(g.start, g.end, g.points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoPolicyDoc {
    pub start_n: f64,
    pub cap_n: f64,
    pub tail_samples: usize,
    pub search_points: usize,
    pub safety: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDoc {
    pub m_min: u64,
    pub m_cap: u64,
    pub k_cap: u32,
    pub verify_grid: GridDoc,
    pub verify_integers: u32,
    pub report_grid: GridDoc,
    pub tau_trunc: f64,
    pub band: i64,
    pub band_margin: i64,
    pub rho: RhoPolicyDoc,
    pub assert_admissible: bool,
}

impl From<&MeasurePolicy> for PolicyDoc {
    fn from(p: &MeasurePolicy) -> Self {
        Self {
            m_min: p.m_min,
            m_cap: p.m_cap,
            k_cap: p.k_cap,
            verify_grid: p.verify.geometric.into(),
            verify_integers: p.verify.integers,
            report_grid: p.report.into(),
            tau_trunc: p.tau_trunc,
            band: p.band(),
            band_margin: p.band_margin,
            rho: RhoPolicyDoc {
                start_n: p.rho.start_n,
                cap_n: p.rho.cap_n,
                tail_samples: p.rho.tail_samples,
                search_points: p.rho.search_points,
                safety: p.rho.safety,
            },
            assert_admissible: p.assert_admissible,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelDoc {
    pub level: u32,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(with = "crate::decimal::nullable")]
    pub rho: f64,
    #[serde(with = "crate::decimal::nullable")]
    pub rho_argmax: f64,
    pub weight: f64,
    pub sup_diff: f64,
    pub max_budget: f64,
    pub worst_ratio: f64,
    pub worst_xi: f64,
    pub mass: f64,
}

impl From<&LevelRecord> for LevelDoc {
    fn from(l: &LevelRecord) -> Self {
        Self {
            level: l.level,
            m: l.m,
            rho: l.rho.rho,
            rho_argmax: l.rho.argmax,
            weight: l.weight,
            sup_diff: l.sup_diff,
            max_budget: l.max_budget,
            worst_ratio: l.worst_ratio,
            worst_xi: l.worst_xi,
            mass: l.mass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttemptDoc {
    pub level: u32,
    #[serde(rename = "M")]
    pub m: u64,
    pub sup_diff: f64,
    pub max_budget: f64,
    #[serde(with = "crate::decimal::nullable")]
    pub worst_ratio: f64,
    pub worst_xi: f64,
    pub mass: f64,
    pub passed: bool,
}

impl From<&Attempt> for AttemptDoc {
    fn from(a: &Attempt) -> Self {
        Self {
            level: a.level,
            m: a.m,
            sup_diff: a.sup_diff,
            max_budget: a.max_budget,
            worst_ratio: a.worst_ratio,
            worst_xi: a.worst_xi,
            mass: a.mass,
            passed: a.passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureDoc {
    pub reason: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestDoc {
    pub target_expr: String,
    /// Requested level count `K`.
    pub levels_requested: u32,
    pub levels_completed: u32,
    pub window: String,
    /// `f` is evaluated at `|xi| + shift`.
    pub target_shift: f64,
    pub policy: PolicyDoc,
    pub levels: Vec<LevelDoc>,
    #[serde(rename = "C", with = "crate::decimal::nullable")]
    pub constant: f64,
    #[serde(with = "crate::decimal::nullable")]
    pub constant_argmax: f64,
    pub report_grid: GridDoc,
    pub truncation_budget: f64,
    pub mass: f64,
    pub mass_ok: bool,
    pub quadratic_constant: Option<f64>,
    /// `|mu_hat| <= C f` at every report grid point and the mass check holds.
    pub certified: bool,
    /// `(xi, f, |mu_hat|, budget)` on the report grid.
    pub residuals: Vec<(f64, f64, f64, f64)>,
    pub attempts: Vec<AttemptDoc>,
    pub failure: Option<FailureDoc>,
    pub spectrum_file: Option<String>,
}

pub fn certified(m: &MeasureApprox) -> bool {
    m.report.passed && m.report.certifies(&m.target)
}

impl ManifestDoc {
    pub fn new(
        m: &MeasureApprox,
        requested: u32,
        policy: &MeasurePolicy,
        attempts: &[Attempt],
        failure: Option<FailureDoc>,
        spectrum_file: Option<String>,
    ) -> Self {
        let r: &DecayReport = &m.report;
        let residuals =
            r.xi.iter()
                .enumerate()
                .map(|(i, &x)| (x, m.target.caller(x), r.modulus[i], r.budget[i]))
                .collect();
        Self {
            target_expr: m.target.expr.to_string(),
            levels_requested: requested,
            levels_completed: m.level(),
            window: WINDOW_NAME.into(),
            target_shift: m.target.shift,
            policy: policy.into(),
            levels: m.levels.iter().map(LevelDoc::from).collect(),
            constant: r.c,
            constant_argmax: r.c_argmax,
            report_grid: r.grid.into(),
            truncation_budget: r.truncation_budget,
            mass: r.mass,
            mass_ok: r.mass_ok,
            quadratic_constant: r.quadratic_constant,
            certified: failure.is_none() && certified(m),
            residuals,
            attempts: attempts.iter().map(AttemptDoc::from).collect(),
            failure,
            spectrum_file,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticsDoc {
    pub period: f64,
    pub translation_step: f64,
    pub description: String,
    pub dimension_note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateGridDoc {
    pub count: usize,
    pub first: f64,
    pub last: f64,
    /// Uniform spacing per unit length, when the grid is uniform.
    pub per_unit: Option<usize>,
    /// Listed explicitly for nonuniform grids.
    pub points: Option<Vec<f64>>,
    /// Sampled numerics, not a proof over the continuum.
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub direction: String,
    pub target_expr: String,
    pub period: f64,
    pub alpha0: Option<f64>,
    pub delta: Option<f64>,
    pub bound_exponent: Option<f64>,
    /// The power law dominating `g f` on the grid.
    pub dominating_power_law: Option<String>,
    pub route: Option<String>,
    pub intersections: Vec<(f64, f64)>,
    #[serde(rename = "C")]
    pub constant: Option<f64>,
    pub grid: CertificateGridDoc,
    pub violations: usize,
    #[serde(with = "crate::decimal::nullable")]
    pub max_residual: f64,
    pub verified: bool,
    pub citations: Vec<String>,
    pub semantics: SemanticsDoc,
}

impl CertificateDoc {
    pub fn new(c: &GapCertificate, per_unit: Option<usize>) -> Self {
        let grid = CertificateGridDoc {
            count: c.grid.len(),
            first: c.grid.first().copied().unwrap_or(f64::NAN),
            last: c.grid.last().copied().unwrap_or(f64::NAN),
            per_unit,
            points: per_unit.is_none().then(|| c.grid.clone()),
            label: "grid-verified".into(),
        };
        Self {
            direction: c.direction.as_str().into(),
            target_expr: c.target_expr.clone(),
            period: c.period,
            alpha0: c.alpha0,
            delta: c.delta,
            bound_exponent: c.bound_exponent,
            dominating_power_law: c.bound_exponent.map(|b| format!("powerlaw({b:?})")),
            route: c.route.map(|r| r.as_str().into()),
            intersections: c.intersections.clone(),
            constant: c.constant,
            grid,
            violations: c.violations,
            max_residual: c.max_residual,
            verified: c.violations == 0,
            citations: c.citations.iter().map(|s| s.to_string()).collect(),
            semantics: SemanticsDoc {
                period: c.semantics.period,
                translation_step: c.semantics.translation_step,
                description: c.semantics.description.clone(),
                dimension_note: c.semantics.dimension_note.into(),
            },
        }
    }
}
