//! One driver per subcommand. Each returns the text for stdout and writes its
//! artifacts; nothing here depends on wall-clock time or iteration order of
//! hash maps, so equal configs give equal bytes.

use std::path::{Path, PathBuf};

use rajchman_core::decay::{
    classify, split_top_level, DecayExpr, Evidence, ExclusionEvidence, GapEvidence,
    MembershipEvidence, Policy,
};
use rajchman_core::gauge::{
    gamma_profile, hausdorff_dichotomy, DichotomyPolicy, GaugeExpr, GaugeFunction, SGrid,
};
use rajchman_core::measure::{
    build_measure, DecayReport, DecayTarget, MeasureApprox, MeasureError, MeasurePolicy,
};
use rajchman_core::multipliers::{certify_gap_in, certify_gap_out, CertifyPolicy, MultiplierError};
use rajchman_core::num::{geometric_points, linspace, GeometricGrid};
use rajchman_core::spectral::{
    multiply_spectra, CompactDensity, SparseSpectrum, SpectralError, DEFAULT_N_MAX,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cache::{Cache, SpectrumKey};
use crate::config::{Command, DirectionArg, Domain, RunConfig, Spacing};
use crate::decimal::{format_f64, to_json};
use crate::error::{CliError, Status};
use crate::formats::{certified, CertificateDoc, FailureDoc, ManifestDoc, Report};
use crate::spectrum_io;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SPECTRUM_FILE: &str = "spectrum.json";
pub const CERTIFICATE_FILE: &str = "certificate.json";

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub stdout: String,
    pub files: Vec<PathBuf>,
}

pub fn run(cfg: &RunConfig, cache: &Cache) -> Result<Outcome, CliError> {
    match &cfg.command {
        Command::Classify { expr } => run_classify(cfg, expr),
        Command::Gauge {
            h,
            r_max,
            radii,
            profile,
        } => run_gauge(cfg, h, *r_max, *radii, profile.as_deref()),
        Command::Build {
            target,
            levels,
            grid_max,
            m_cap,
            assert_admissible,
            emit,
        } => run_build(
            cfg,
            cache,
            target,
            *levels,
            *grid_max,
            *m_cap,
            *assert_admissible,
            emit.as_deref(),
        ),
        Command::Verify { manifest, spectrum } => run_verify(cfg, manifest, spectrum.as_deref()),
        Command::Multiply {
            a,
            b,
            tau_trunc,
            n_max,
            out,
        } => run_multiply(cfg, a, b, *tau_trunc, *n_max, out.as_deref()),
        Command::Certify {
            target,
            direction,
            period,
            levels,
            grid_max,
            emit,
        } => run_certify(
            cfg,
            target,
            *direction,
            *period,
            *levels,
            *grid_max,
            emit.as_deref(),
        ),
        Command::EmitPlot { .. } => run_emit_plot(cfg),
    }
}

pub fn parse_expr(text: &str) -> Result<DecayExpr, CliError> {
    let e: DecayExpr = text
        .parse()
        .map_err(|e| CliError::invalid("parse", format!("{text:?}: {e}")))?;
    e.validate()
        .map_err(|err| CliError::invalid("invalid-expression", format!("{text:?}: {err}")))?;
    Ok(e)
}

fn write_file(path: &Path, text: &str, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    files.push(path.to_path_buf());
    Ok(())
}

fn positive(name: &'static str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::invalid(
            "invalid-argument",
            format!("{name} must be positive and finite, got {x}"),
        ))
    }
}

fn evidence_json(e: &Evidence) -> Value {
    match e {
        Evidence::Membership(MembershipEvidence::Symbolic { rule })
        | Evidence::Exclusion(ExclusionEvidence::Symbolic { rule })
        | Evidence::Gap(GapEvidence::Symbolic { rule }) => {
            json!({"kind": "symbolic", "rule": rule})
        }
        Evidence::Membership(MembershipEvidence::TauLimitZero { tail_max }) => {
            json!({"kind": "tau-limit-zero", "tail_max": tail_max})
        }
        Evidence::Membership(MembershipEvidence::Certificate { summary })
        | Evidence::Exclusion(ExclusionEvidence::Certificate { summary }) => {
            json!({"kind": "certificate", "summary": summary})
        }
        Evidence::Exclusion(ExclusionEvidence::TauLimitPositive { tail_min }) => {
            json!({"kind": "tau-limit-positive", "tail_min": tail_min})
        }
        Evidence::Exclusion(ExclusionEvidence::ConvexPhi {
            min_slope_change,
            slope_range,
        }) => json!({
            "kind": "phi-convex",
            "min_slope_change": min_slope_change,
            "slope_range": [slope_range.0, slope_range.1],
        }),
        Evidence::Exclusion(ExclusionEvidence::TauForcesOut { pairs, min_excess }) => {
            json!({"kind": "tau-forces-out", "pairs": pairs, "min_excess": min_excess})
        }
        Evidence::Exclusion(ExclusionEvidence::ZerosWithPositiveTau { zeros, tail_min }) => {
            json!({"kind": "zeros-with-positive-tau", "zeros": zeros, "tail_min": tail_min})
        }
        Evidence::Gap(GapEvidence::UnboundedZeros { zeros }) => {
            json!({"kind": "unbounded-zeros", "zeros": zeros})
        }
        Evidence::Undecided { notes } => json!({"kind": "undecided", "notes": notes}),
    }
}

fn run_classify(cfg: &RunConfig, text: &str) -> Result<Outcome, CliError> {
    let e = parse_expr(text)?;
    let v = classify(&e, &Policy::default());
    let outcome = v.outcome().as_str();
    let result = json!({
        "expr": e.to_string(),
        "outcome": outcome,
        "rule": v.rule(),
        "evidence": evidence_json(&v.evidence),
        "trail": v.trail.iter().map(|t| json!({"test": t.test.as_str(), "fired": t.fired, "detail": t.detail})).collect::<Vec<_>>(),
        "samples": v.samples.iter().map(|p| [p.gamma, p.phi]).collect::<Vec<_>>(),
    });
    let summary = format!("{e}: {outcome} ({})", v.rule());
    let report = Report::new(cfg, Status::Ok, summary, &[], result);
    Ok(Outcome {
        status: Status::Ok,
        stdout: to_json(&report),
        files: Vec::new(),
    })
}

fn run_gauge(
    cfg: &RunConfig,
    text: &str,
    r_max: f64,
    radii: usize,
    profile: Option<&Path>,
) -> Result<Outcome, CliError> {
    let expr: GaugeExpr = text
        .parse()
        .map_err(|e| CliError::invalid("parse", format!("{text:?}: {e}")))?;
    positive("r-max", r_max)?;
    if !(r_max < 1.0) || radii < 2 {
        return Err(CliError::invalid(
            "invalid-argument",
            "need r-max < 1 and at least two radii",
        ));
    }
    let h = GaugeFunction::new(expr);
    let gauge_err =
        |e: rajchman_core::gauge::GaugeError| CliError::invalid("invalid-gauge", e.to_string());
    let d = hausdorff_dichotomy(&h, &DichotomyPolicy::default()).map_err(gauge_err)?;
    let prof = gamma_profile(&h, r_max, radii, &SGrid::default()).map_err(gauge_err)?;
    let above_h = prof
        .points
        .iter()
        .filter(|p| !(p.gamma <= h.eval(p.r) * (1.0 + 1e-12)))
        .count();
    let not_monotone = prof
        .points
        .windows(2)
        .filter(|w| !(w[1].gamma_over_r >= w[0].gamma_over_r * (1.0 - 1e-12)))
        .count();
    let boundary = prof.points.iter().filter(|p| p.boundary).count();
    let mut files = Vec::new();
    if let Some(path) = profile {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::invalid("csv", e.to_string());
        w.write_record(["r", "gamma", "argmin_s"])
            .map_err(csv_err)?;
        for p in &prof.points {
            w.write_record([format_f64(p.r), format_f64(p.gamma), format_f64(p.argmin_s)])
                .map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::invalid("csv", e.to_string()))?;
        write_file(
            path,
            &String::from_utf8(bytes).expect("ascii csv"),
            &mut files,
        )?;
    }
    let status = if above_h == 0 && not_monotone == 0 {
        Status::Ok
    } else {
        Status::VerificationFailed
    };
    let result = json!({
        "h": h.expr.to_string(),
        "dichotomy": d.outcome.as_str(),
        "witness_t": d.witness_t,
        "tail_log_max": d.tail_log_max.iter().map(|&(t, m)| [t, m]).collect::<Vec<_>>(),
        "rho_range": [d.rho_grid[0], d.rho_grid[d.rho_grid.len() - 1]],
        "rho_points": d.rho_grid.len(),
        "tail_start": d.tail_start,
        "profile": {
            "points": prof.points.len(),
            "r_max": r_max,
            "gamma_above_h": above_h,
            "gamma_over_r_increasing_in_r": not_monotone,
            "boundary_minima": boundary,
            "file": profile.map(|p| p.display().to_string()),
        },
    });
    let summary = format!("{}: {}", h.expr, d.outcome.as_str());
    let citations = [
        "Gamma_h(r) = inf over s <= r of r h(s)/s; zero h-measure when Gamma_h(r)/r^t stays small",
    ];
    let report = Report::new(cfg, status, summary, &citations, result);
    Ok(Outcome {
        status,
        stdout: to_json(&report),
        files,
    })
}

fn measure_error(e: &MeasureError) -> (Status, &'static str) {
    match e {
        MeasureError::Decay(_) => (Status::InvalidInput, "invalid-target"),
        MeasureError::Spectral(SpectralError::Cap { .. }) => {
            (Status::VerificationFailed, "cap-exceeded")
        }
        MeasureError::Spectral(_) => (Status::InvalidInput, "spectral"),
        MeasureError::ScheduleExhausted { .. } => (Status::VerificationFailed, "cap-exceeded"),
        MeasureError::InvalidPolicy("level count above the cap") => {
            (Status::VerificationFailed, "cap-exceeded")
        }
        MeasureError::InvalidPolicy(_) => (Status::InvalidInput, "invalid-policy"),
        MeasureError::Rejected { .. } => (Status::VerificationFailed, "rejected"),
        MeasureError::RhoTail { .. } | MeasureError::EmptySupport { .. } => {
            (Status::VerificationFailed, "construction-failed")
        }
    }
}

fn build_policy(
    grid_max: f64,
    m_cap: u64,
    assert_admissible: bool,
) -> Result<MeasurePolicy, CliError> {
    if !(positive("grid-max", grid_max)? > 10.0) {
        return Err(CliError::invalid(
            "invalid-argument",
            "grid-max must exceed the report grid start 10",
        ));
    }
    let mut p = MeasurePolicy::with_grid_max(grid_max);
    p.m_cap = m_cap;
    p.assert_admissible = assert_admissible;
    Ok(p)
}

/// Persisted coefficients of the periodic factor of `m`.
pub fn measure_spectrum(
    m: &MeasureApprox,
    policy: &MeasurePolicy,
    cache: &Cache,
) -> Result<SparseSpectrum, CliError> {
    let key = SpectrumKey {
        m_list: m.m_list(),
        k_list: (1..=m.level()).collect(),
        tau_trunc: policy.tau_trunc,
        band: policy.band(),
        xi_max: policy.verify.geometric.end.max(policy.report.end),
    };
    if m.level() == 0 {
        return Ok(SparseSpectrum::delta(policy.tau_trunc, policy.band()));
    }
    cache.spectrum(&key, || m.spectrum(policy))
}

#[allow(clippy::too_many_arguments)]
fn run_build(
    cfg: &RunConfig,
    cache: &Cache,
    target: &str,
    levels: u32,
    grid_max: f64,
    m_cap: u64,
    assert_admissible: bool,
    emit: Option<&Path>,
) -> Result<Outcome, CliError> {
    let expr = parse_expr(target)?;
    let policy = build_policy(grid_max, m_cap, assert_admissible)?;
    let citations = [
        "mu_k = G_k psi_0 with G_k a product of prime windows g_{M_j, j}",
        "levels chosen so that |mu_k_hat - mu_{k-1}_hat| <= 2^-k rho_k theta_k on the verification grid",
    ];
    let (measure, failure, status) = match build_measure(&expr, levels, &policy) {
        Ok(m) => {
            let status = if certified(&m) {
                Status::Ok
            } else {
                Status::VerificationFailed
            };
            let failure = (status != Status::Ok).then(|| FailureDoc {
                reason: "verification-failed".into(),
                message: "the reported constant does not certify every grid point or the mass is out of range".into(),
            });
            (m, failure, status)
        }
        Err(f) => {
            let (status, reason) = measure_error(&f.error);
            let Some(partial) = f.partial else {
                return Err(CliError {
                    status,
                    reason,
                    message: f.error.to_string(),
                });
            };
            (
                *partial,
                Some(FailureDoc {
                    reason: reason.into(),
                    message: f.error.to_string(),
                }),
                status,
            )
        }
    };
    let mut files = Vec::new();
    let spectrum_file = emit.map(|_| SPECTRUM_FILE.to_string());
    if let Some(dir) = emit {
        let s = measure_spectrum(&measure, &policy, cache)?;
        write_file(
            &dir.join(SPECTRUM_FILE),
            &spectrum_io::to_string(&s),
            &mut files,
        )?;
    }
    let manifest = ManifestDoc::new(
        &measure,
        levels,
        &policy,
        &measure.attempts,
        failure.clone(),
        spectrum_file,
    );
    let summary = match &failure {
        None => format!(
            "certified |mu_hat| <= C f on {} report points with C = {}, M = {:?}",
            manifest.residuals.len(),
            format_f64(manifest.constant),
            measure.m_list()
        ),
        Some(f) => format!(
            "stopped after {} of {} levels (M = {:?}): {}",
            measure.level(),
            levels,
            measure.m_list(),
            f.message
        ),
    };
    let report = Report::new(cfg, status, summary, &citations, manifest);
    let text = to_json(&report);
    if let Some(dir) = emit {
        write_file(&dir.join(MANIFEST_FILE), &text, &mut files)?;
    }
    Ok(Outcome {
        status,
        stdout: text,
        files,
    })
}

pub fn read_manifest(path: &Path) -> Result<Report<ManifestDoc>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid("manifest-parse", e.to_string()))
}

fn manifest_spectrum(
    manifest: &Path,
    doc: &ManifestDoc,
    spectrum: Option<&Path>,
) -> Result<SparseSpectrum, CliError> {
    let path = match (spectrum, &doc.spectrum_file) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(name)) => manifest.parent().unwrap_or(Path::new(".")).join(name),
        (None, None) => {
            return Err(CliError::invalid(
                "manifest",
                "no spectrum file recorded; pass --spectrum",
            ))
        }
    };
    let s = spectrum_io::read(&path)?;
    let m_list: Vec<u64> = doc.levels.iter().map(|l| l.m).collect();
    if s.meta.m_list != m_list || s.n_max != doc.policy.band || s.tau_trunc != doc.policy.tau_trunc
    {
        return Err(CliError::failed(
            "spectrum-mismatch",
            format!("{} does not match the manifest", path.display()),
        ));
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyDoc {
    pub target_expr: String,
    #[serde(rename = "M_list")]
    pub m_list: Vec<u64>,
    #[serde(rename = "C")]
    pub constant: f64,
    /// Grid points with `|mu_hat| > C f` from the reloaded spectrum.
    pub violations: usize,
    /// Grid points where the reloaded modulus leaves the stored one by more than both budgets.
    pub inconsistencies: usize,
    pub max_modulus_gap: f64,
    pub mass: f64,
    pub manifest_certified: bool,
    pub verified: bool,
}

fn run_verify(
    cfg: &RunConfig,
    manifest: &Path,
    spectrum: Option<&Path>,
) -> Result<Outcome, CliError> {
    let rep = read_manifest(manifest)?;
    let doc = &rep.result;
    let s = manifest_spectrum(manifest, doc, spectrum)?;
    let expr = parse_expr(&doc.target_expr)?;
    let target =
        DecayTarget::new(expr).map_err(|e| CliError::invalid("invalid-target", e.to_string()))?;
    if target.shift != doc.target_shift {
        return Err(CliError::failed(
            "manifest-mismatch",
            "target shift differs from the manifest",
        ));
    }
    let density = CompactDensity::from_spectrum(s);
    let grid: GeometricGrid = doc.report_grid.into();
    let fresh = DecayReport::new(&target, &density, &grid, doc.levels_completed == 0);
    let c = doc.constant;
    let violations = fresh
        .xi
        .iter()
        .zip(&fresh.modulus)
        .filter(|(&x, &m)| !(m <= c * target.caller(x)))
        .count();
    let mut inconsistencies = 0;
    let mut max_gap = 0.0f64;
    for (i, &(x, _, m, b)) in doc.residuals.iter().enumerate() {
        let gap = (fresh.modulus[i] - m).abs();
        max_gap = max_gap.max(gap);
        if fresh.xi[i] != x || !(gap <= b + fresh.budget[i]) {
            inconsistencies += 1;
        }
    }
    if doc.residuals.len() != fresh.xi.len() {
        inconsistencies += 1;
    }
    let verified = doc.certified && violations == 0 && inconsistencies == 0 && fresh.mass_ok;
    let status = if verified {
        Status::Ok
    } else {
        Status::VerificationFailed
    };
    let result = VerifyDoc {
        target_expr: doc.target_expr.clone(),
        m_list: doc.levels.iter().map(|l| l.m).collect(),
        constant: c,
        violations,
        inconsistencies,
        max_modulus_gap: max_gap,
        mass: fresh.mass,
        manifest_certified: doc.certified,
        verified,
    };
    let summary = if verified {
        format!(
            "reloaded spectrum certifies |mu_hat| <= C f at all {} points",
            fresh.xi.len()
        )
    } else {
        format!(
            "not verified: {violations} violations, {inconsistencies} inconsistencies, manifest certified = {}",
            doc.certified
        )
    };
    let report = Report::new(cfg, status, summary, &[], result);
    Ok(Outcome {
        status,
        stdout: to_json(&report),
        files: Vec::new(),
    })
}

fn run_multiply(
    cfg: &RunConfig,
    a: &Path,
    b: &Path,
    tau_trunc: f64,
    n_max: Option<i64>,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    if !(tau_trunc >= 0.0 && tau_trunc.is_finite()) {
        return Err(CliError::invalid(
            "invalid-argument",
            "tau-trunc must be a finite nonnegative number",
        ));
    }
    let sa = spectrum_io::read(a)?;
    let sb = spectrum_io::read(b)?;
    let band = n_max.unwrap_or_else(|| (sa.n_max + sb.n_max).min(DEFAULT_N_MAX));
    if !(0..=DEFAULT_N_MAX).contains(&band) {
        return Err(CliError::failed(
            "cap-exceeded",
            format!("band {band} outside 0..={DEFAULT_N_MAX}"),
        ));
    }
    let ab = multiply_spectra(&sa, &sb, tau_trunc, band);
    let mut files = Vec::new();
    if let Some(path) = out {
        write_file(path, &spectrum_io::to_string(&ab), &mut files)?;
    }
    let t = ab.truncation;
    let result = json!({
        "a": a.display().to_string(),
        "b": b.display().to_string(),
        "out": out.map(|p| p.display().to_string()),
        "n_max": band,
        "tau_trunc": tau_trunc,
        "coefficients": ab.len(),
        "mass": ab.mass(),
        "abs_sum": ab.abs_sum(),
        "M_list": ab.meta.m_list,
        "k_list": ab.meta.k_list,
        "truncation": {
            "dropped": t.dropped,
            "dropped_abs_sum": t.dropped_abs_sum,
            "overflow": t.overflow,
            "overflow_abs_sum": t.overflow_abs_sum,
        },
    });
    let summary = format!("{} coefficients in band {band}", ab.len());
    let citations =
        ["the product of densities has the convolution of coefficient sequences as spectrum"];
    let report = Report::new(cfg, Status::Ok, summary, &citations, result);
    Ok(Outcome {
        status: Status::Ok,
        stdout: to_json(&report),
        files,
    })
}

fn multiplier_error(e: &MultiplierError) -> CliError {
    let (status, reason) = match e {
        MultiplierError::Precondition(_) | MultiplierError::InvalidMultiplier(_) => {
            (Status::InvalidInput, "precondition")
        }
        MultiplierError::Inapplicable { .. } => (Status::VerificationFailed, "inapplicable"),
        MultiplierError::Hypothesis(_) => (Status::VerificationFailed, "bump-hypothesis"),
        MultiplierError::Verification { .. } => (Status::VerificationFailed, "verification-failed"),
    };
    CliError {
        status,
        reason,
        message: e.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyDoc {
    pub certificate: Option<CertificateDoc>,
    pub failure: Option<FailureDoc>,
    /// Levels and constant of the base measure (in-direction).
    #[serde(rename = "base_M_list")]
    pub base_m_list: Option<Vec<u64>>,
    /// Built from the last completed level when the requested build fails; informational.
    pub partial_certificate: Option<CertificateDoc>,
}

fn run_certify(
    cfg: &RunConfig,
    target: &str,
    direction: DirectionArg,
    period: f64,
    levels: u32,
    grid_max: f64,
    emit: Option<&Path>,
) -> Result<Outcome, CliError> {
    let expr = parse_expr(target)?;
    positive("period", period)?;
    let inward = match direction {
        DirectionArg::In => true,
        DirectionArg::NotIn => false,
        DirectionArg::Auto => matches!(expr, DecayExpr::AbsCosTimes(w, _) if w == 2.0),
    };
    let (doc, status, citations) = if inward {
        let DecayExpr::AbsCosTimes(w, base) = &expr else {
            return Err(CliError::invalid(
                "precondition",
                "in-direction needs abscos(2, base)",
            ));
        };
        if *w != 2.0 || period != 1.0 {
            return Err(CliError::invalid(
                "precondition",
                "in-direction certificates use abscos(2, base) and period 1",
            ));
        }
        let policy = build_policy(grid_max, MeasurePolicy::default().m_cap, false)?;
        match build_measure(base, levels, &policy) {
            Ok(m) => {
                let cert = certify_gap_in(&expr, &m).map_err(|e| multiplier_error(&e))?;
                let cites = cert.citations.clone();
                let doc = CertifyDoc {
                    certificate: Some(CertificateDoc::new(&cert, None)),
                    failure: None,
                    base_m_list: Some(m.m_list()),
                    partial_certificate: None,
                };
                (doc, Status::Ok, cites)
            }
            Err(f) => {
                let (status, reason) = measure_error(&f.error);
                let Some(partial) = f.partial else {
                    return Err(CliError {
                        status,
                        reason,
                        message: f.error.to_string(),
                    });
                };
                let partial_cert = certify_gap_in(&expr, &partial)
                    .ok()
                    .map(|c| CertificateDoc::new(&c, None));
                let doc = CertifyDoc {
                    certificate: None,
                    failure: Some(FailureDoc {
                        reason: reason.into(),
                        message: format!("base measure at {levels} levels: {}", f.error),
                    }),
                    base_m_list: Some(partial.m_list()),
                    partial_certificate: partial_cert,
                };
                (doc, status, Vec::new())
            }
        }
    } else {
        let policy = CertifyPolicy {
            grid_hi: grid_max,
            ..CertifyPolicy::default()
        };
        if !(grid_max > policy.grid_lo) {
            return Err(CliError::invalid(
                "invalid-argument",
                "grid-max must exceed the certificate grid start 2",
            ));
        }
        let tau: Box<dyn Fn(f64) -> f64> = match &expr {
            DecayExpr::TauExponent(t) => {
                let t = t.clone();
                Box::new(move |x: f64| t.eval(x))
            }
            other => {
                let e = other.clone();
                Box::new(move |x: f64| e.eval_tau(x).unwrap_or(f64::NAN))
            }
        };
        let cert = certify_gap_out(&expr.to_string(), &*tau, period, &policy)
            .map_err(|e| multiplier_error(&e))?;
        let cites = cert.citations.clone();
        let doc = CertifyDoc {
            certificate: Some(CertificateDoc::new(&cert, Some(policy.grid_per_unit))),
            failure: None,
            base_m_list: None,
            partial_certificate: None,
        };
        (doc, Status::Ok, cites)
    };
    let summary = match (&doc.certificate, &doc.failure) {
        (Some(c), _) => format!(
            "{} certificate for {}: {} grid points, {} violations, max residual {}",
            c.direction,
            c.target_expr,
            c.grid.count,
            c.violations,
            format_f64(c.max_residual)
        ),
        (None, Some(f)) => format!("no certificate: {}", f.message),
        (None, None) => "no certificate".into(),
    };
    let report = Report::new(cfg, status, summary, &citations, doc);
    let text = to_json(&report);
    let mut files = Vec::new();
    if let Some(dir) = emit {
        write_file(&dir.join(CERTIFICATE_FILE), &text, &mut files)?;
    }
    Ok(Outcome {
        status,
        stdout: text,
        files,
    })
}

/// Abscissas for a plot of `expr`.
fn plot_axis(
    expr: &DecayExpr,
    domain: Domain,
    spacing: Option<Spacing>,
    min: Option<f64>,
    max: Option<f64>,
    points: Option<usize>,
) -> Result<Vec<f64>, CliError> {
    let oscillatory = expr.is_oscillatory() && domain == Domain::Xi;
    let (lo, hi, n, default_spacing) = match (domain, oscillatory) {
        (Domain::Log, _) => (1.0, 1e4, 400, Spacing::Geometric),
        (Domain::Xi, true) => (2.0, 20.0, 1153, Spacing::Uniform),
        (Domain::Xi, false) => (10.0, 1e6, 400, Spacing::Geometric),
    };
    let (lo, hi, n) = (min.unwrap_or(lo), max.unwrap_or(hi), points.unwrap_or(n));
    if !(lo > 0.0 && hi > lo && hi.is_finite() && n >= 2) {
        return Err(CliError::invalid(
            "invalid-argument",
            "plot range needs 0 < min < max and at least two points",
        ));
    }
    Ok(match spacing.unwrap_or(default_spacing) {
        Spacing::Geometric => geometric_points(lo, hi, n),
        Spacing::Uniform => linspace(lo, hi, n),
    })
}

fn run_emit_plot(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let Command::EmitPlot {
        expr,
        with,
        domain,
        spacing,
        min,
        max,
        points,
        measure,
        out,
    } = &cfg.command
    else {
        unreachable!("dispatched on the variant");
    };
    let e = parse_expr(expr)?;
    let mut others = match with {
        Some(list) => split_top_level(list)
            .iter()
            .map(|s| parse_expr(s))
            .collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    if with.is_none() && matches!(e, DecayExpr::StepTower { .. }) {
        others = vec![
            DecayExpr::PowerLaw(1.0),
            DecayExpr::ExpLogPower(1.0 / std::f64::consts::E),
        ];
    }
    let tower = matches!(e, DecayExpr::StepTower { .. });
    let domain = domain.unwrap_or(if tower { Domain::Log } else { Domain::Xi });
    let axis = plot_axis(&e, domain, *spacing, *min, *max, *points)?;
    let density = match measure {
        Some(_) if domain == Domain::Log => {
            return Err(CliError::invalid(
                "invalid-argument",
                "measure column needs the xi domain",
            ));
        }
        Some(path) => {
            let rep = read_manifest(path)?;
            Some(CompactDensity::from_spectrum(manifest_spectrum(
                path,
                &rep.result,
                None,
            )?))
        }
        None => None,
    };
    let mut header = vec![
        if domain == Domain::Xi { "xi" } else { "gamma" }.to_string(),
        if domain == Domain::Xi { "f" } else { "phi" }.to_string(),
    ];
    header.extend(others.iter().map(|o| o.to_string()));
    if density.is_some() {
        header.push("mu_hat_modulus".into());
    }
    let cell = |g: &DecayExpr, x: f64| {
        let v = match domain {
            Domain::Xi => g.eval_f(x),
            Domain::Log => g.eval_phi(x),
        };
        v.map(format_f64).unwrap_or_default()
    };
    let csv_err = |e: csv::Error| CliError::invalid("csv", e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(csv_err)?;
    for &x in &axis {
        let mut row = vec![format_f64(x), cell(&e, x)];
        row.extend(others.iter().map(|o| cell(o, x)));
        if let Some(d) = &density {
            row.push(format_f64(d.transform(x).value.norm()));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::invalid("csv", e.to_string()))?;
    let text = String::from_utf8(bytes).expect("ascii csv");
    match out {
        None => Ok(Outcome {
            status: Status::Ok,
            stdout: text,
            files: Vec::new(),
        }),
        Some(path) => {
            let mut files = Vec::new();
            write_file(path, &text, &mut files)?;
            let result =
                json!({"out": path.display().to_string(), "columns": header, "rows": axis.len()});
            let report = Report::new(
                cfg,
                Status::Ok,
                format!("{} rows written", axis.len()),
                &[],
                result,
            );
            Ok(Outcome {
                status: Status::Ok,
                stdout: to_json(&report),
                files,
            })
        }
    }
}
