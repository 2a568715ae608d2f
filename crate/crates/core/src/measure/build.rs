use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{rho_k, theta_k, DecayTarget, MeasureError, MeasurePolicy, Rho};
use crate::decay::{classify, BluhmSchedule, DecayExpr, Outcome, Policy};
use crate::num::GeometricGrid;
use crate::spectral::{
    gm_spectrum, psi0_hat, CompactDensity, LevelSpec, PieceSet, SparseSpectrum, Transform,
};

/// An accepted level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub level: u32,
    pub m: u64,
    pub rho: Rho,
    /// `2^-k rho_k`.
    pub weight: f64,
    /// `max |mu_k_hat - mu_{k-1}_hat|` over the verification grid.
    pub sup_diff: f64,
    /// Largest combined budget of both transforms on the grid.
    pub max_budget: f64,
    /// `max (diff + budgets) / (2^-k rho_k theta_k)`; at most 1 when accepted.
    pub worst_ratio: f64,
    pub worst_xi: f64,
    pub mass: f64,
}

/// One tested `M`, accepted or not.
#[derive(Clone, Debug, PartialEq)]
pub struct Attempt {
    pub level: u32,
    pub m: u64,
    pub sup_diff: f64,
    pub max_budget: f64,
    pub worst_ratio: f64,
    pub worst_xi: f64,
    pub mass: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionState {
    pub target: DecayTarget,
    pub levels: Vec<LevelRecord>,
    /// Support pieces of `G_1 .. G_k`.
    pub pieces: Vec<PieceSet>,
    pub density: CompactDensity,
    pub verify_xi: Vec<f64>,
    values: Vec<Transform>,
    pub attempts: Vec<Attempt>,
}

impl ConstructionState {
    /// Level 0: `mu_0 = psi0`.
    pub fn new(target: DecayTarget, policy: &MeasurePolicy) -> Self {
        let density =
            CompactDensity::from_spectrum(SparseSpectrum::delta(policy.tau_trunc, policy.band()));
        let verify_xi = policy.verify.values();
        let values = verify_xi.iter().map(|&x| density.transform(x)).collect();
        Self {
            target,
            levels: Vec::new(),
            pieces: Vec::new(),
            density,
            verify_xi,
            values,
            attempts: Vec::new(),
        }
    }

    pub fn level(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn m_list(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.m).collect()
    }
}

fn candidate(
    state: &ConstructionState,
    level: u32,
    m: u64,
    policy: &MeasurePolicy,
) -> Result<(CompactDensity, Option<PieceSet>), MeasureError> {
    if level == 1 {
        let s = gm_spectrum(m, 1, policy.tau_trunc, policy.band())?;
        Ok((CompactDensity::from_spectrum(s), None))
    } else {
        let spec = LevelSpec::new(m, level)?;
        let set = state
            .pieces
            .last()
            .expect("pieces for every accepted level")
            .refine(spec);
        let xi_max = policy.verify.geometric.end.max(policy.report.end);
        Ok((CompactDensity::from_pieces(set.clone(), xi_max), Some(set)))
    }
}

/// Smallest `M` in `max(2 M_{k-1} + 1, m_min) 2^j` passing the level inequality
/// on the verification grid. Advances the state on success.
pub fn select_m(
    state: &mut ConstructionState,
    policy: &MeasurePolicy,
) -> Result<LevelRecord, MeasureError> {
    let level = state.level() + 1;
    let rho = rho_k(&state.target, level, &policy.rho)?;
    let weight = libm::ldexp(rho.rho, -(level as i32));
    let prev_m = state.levels.last().map_or(0, |l| l.m);
    let mut m = (2 * prev_m + 1).max(policy.m_min);
    let mut last_m = m;
    while m <= policy.m_cap {
        last_m = m;
        let (density, set) = candidate(state, level, m, policy)?;
        let mut values = Vec::with_capacity(state.verify_xi.len());
        let (mut sup_diff, mut max_budget, mut worst_ratio, mut worst_xi) =
            (0.0f64, 0.0f64, 0.0f64, 0.0);
        for (i, &xi) in state.verify_xi.iter().enumerate() {
            let t = density.transform(xi);
            let old = state.values[i];
            let diff = (t.value - old.value).norm();
            let budget = t.budget + old.budget;
            let ratio = (diff + budget) / (weight * theta_k(level, xi));
            sup_diff = sup_diff.max(diff);
            max_budget = max_budget.max(budget);
            if !(ratio <= worst_ratio) {
                worst_ratio = ratio;
                worst_xi = xi;
            }
            values.push(t);
        }
        let mass = values[0].value.re;
        let passed = worst_ratio <= 1.0;
        state.attempts.push(Attempt {
            level,
            m,
            sup_diff,
            max_budget,
            worst_ratio,
            worst_xi,
            mass,
            passed,
        });
        if passed {
            let set = match set {
                Some(s) => s,
                None => PieceSet::level_one(LevelSpec::new(m, level)?),
            };
            if set.pieces.is_empty() {
                return Err(MeasureError::EmptySupport { level });
            }
            let record = LevelRecord {
                level,
                m,
                rho,
                weight,
                sup_diff,
                max_budget,
                worst_ratio,
                worst_xi,
                mass,
            };
            state.levels.push(record.clone());
            state.pieces.push(set);
            state.density = density;
            state.values = values;
            return Ok(record);
        }
        m *= 2;
    }
    Err(MeasureError::ScheduleExhausted { level, last_m })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub grid: GeometricGrid,
    pub xi: Vec<f64>,
    pub modulus: Vec<f64>,
    pub budget: Vec<f64>,
    /// `|mu_hat| / f` in the caller's scale.
    pub ratio: Vec<f64>,
    /// `max (|mu_hat| + budget) / f`.
    pub c: f64,
    pub c_argmax: f64,
    pub truncation_budget: f64,
    pub mass: f64,
    pub mass_ok: bool,
    pub passed: bool,
    /// `sup xi^2 |psi0_hat|` on the grid, recorded for `K = 0`.
    pub quadratic_constant: Option<f64>,
}

impl DecayReport {
    pub fn new(
        target: &DecayTarget,
        density: &CompactDensity,
        grid: &GeometricGrid,
        level_zero: bool,
    ) -> Self {
        let xi = grid.values();
        let mut modulus = Vec::with_capacity(xi.len());
        let mut budget = Vec::with_capacity(xi.len());
        let mut ratio = Vec::with_capacity(xi.len());
        let (mut c, mut c_argmax, mut trunc) = (0.0f64, f64::NAN, 0.0f64);
        for &x in &xi {
            let t = density.transform(x);
            let f = target.caller(x);
            let m = t.value.norm();
            modulus.push(m);
            budget.push(t.budget);
            ratio.push(m / f);
            let ci = (m + t.budget) / f;
            if !(ci <= c) {
                c = ci;
                c_argmax = x;
            }
            trunc = trunc.max(t.budget);
        }
        let mass = density.transform(0.0).value.re;
        let mass_ok = (0.5..=1.5).contains(&mass);
        let quadratic_constant = level_zero.then(|| {
            xi.iter()
                .map(|&x| x * x * psi0_hat(x).norm())
                .fold(0.0, f64::max)
        });
        Self {
            grid: *grid,
            xi,
            modulus,
            budget,
            ratio,
            c,
            c_argmax,
            truncation_budget: trunc,
            mass,
            mass_ok,
            passed: mass_ok && c.is_finite(),
            quadratic_constant,
        }
    }

    /// Whether `|mu_hat| <= C f` holds at every grid point with the reported `C`.
    pub fn certifies(&self, target: &DecayTarget) -> bool {
        self.xi
            .iter()
            .zip(&self.modulus)
            .all(|(&x, &m)| m <= self.c * target.caller(x))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureApprox {
    pub target: DecayTarget,
    pub levels: Vec<LevelRecord>,
    pub pieces: Vec<PieceSet>,
    pub density: CompactDensity,
    pub report: DecayReport,
    pub verify_xi: Vec<f64>,
    /// Every candidate tried, accepted or not.
    pub attempts: Vec<Attempt>,
}

impl MeasureApprox {
    pub fn level(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn m_list(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.m).collect()
    }

    pub fn transform(&self, xi: f64) -> Transform {
        self.density.transform(xi)
    }

    /// Coefficients of `G_K` within the build band.
    pub fn spectrum(&self, policy: &MeasurePolicy) -> SparseSpectrum {
        self.density
            .periodic_spectrum(policy.tau_trunc, policy.band())
    }

    /// The weights `2^-k rho_k` as a finite schedule for `B`.
    pub fn bluhm_schedule(&self) -> BluhmSchedule {
        BluhmSchedule::Finite(self.levels.iter().map(|l| l.weight).collect())
    }

    pub fn support_cover(&self, level: u32) -> Result<Vec<(f64, f64)>, MeasureError> {
        cover_of(&self.pieces, level)
    }
}

fn cover_of(pieces: &[PieceSet], level: u32) -> Result<Vec<(f64, f64)>, MeasureError> {
    if level == 0 {
        return Ok(alloc::vec![(0.0, 1.0)]);
    }
    let set = pieces
        .get(level as usize - 1)
        .ok_or(MeasureError::InvalidPolicy("level beyond the construction"))?;
    let cover = set.cover();
    if cover.is_empty() {
        return Err(MeasureError::EmptySupport { level });
    }
    Ok(cover)
}

/// `[0, 1] ∩ ⋂_{i <= level} ⋃_p {||p x|| <= p^(-1-i)}` as sorted disjoint intervals.
pub fn support_cover(
    state: &ConstructionState,
    level: u32,
) -> Result<Vec<(f64, f64)>, MeasureError> {
    if level > state.level() {
        return Err(MeasureError::InvalidPolicy("level beyond the construction"));
    }
    cover_of(&state.pieces, level)
}

/// Partial state of a build that stopped early.
#[derive(Clone, Debug, PartialEq)]
pub struct BuildFailure {
    pub error: MeasureError,
    pub levels: Vec<LevelRecord>,
    pub attempts: Vec<Attempt>,
    /// The last completed level as a measure.
    pub partial: Option<Box<MeasureApprox>>,
}

pub fn build_measure(
    expr: &DecayExpr,
    levels: u32,
    policy: &MeasurePolicy,
) -> Result<MeasureApprox, BuildFailure> {
    let fail = |error| BuildFailure {
        error,
        levels: Vec::new(),
        attempts: Vec::new(),
        partial: None,
    };
    if levels > policy.k_cap {
        return Err(fail(MeasureError::InvalidPolicy(
            "level count above the cap",
        )));
    }
    if !policy.assert_admissible {
        let v = classify(expr, &Policy::default());
        if v.outcome() != Outcome::InFourierSet {
            return Err(fail(MeasureError::Rejected {
                outcome: v.outcome().as_str(),
            }));
        }
    }
    let target = DecayTarget::new(expr.clone()).map_err(fail)?;
    let mut state = ConstructionState::new(target, policy);
    let finish = |state: &ConstructionState| {
        let report = DecayReport::new(
            &state.target,
            &state.density,
            &policy.report,
            state.level() == 0,
        );
        MeasureApprox {
            target: state.target.clone(),
            levels: state.levels.clone(),
            pieces: state.pieces.clone(),
            density: state.density.clone(),
            report,
            verify_xi: state.verify_xi.clone(),
            attempts: state.attempts.clone(),
        }
    };
    while state.level() < levels {
        if let Err(error) = select_m(&mut state, policy) {
            return Err(BuildFailure {
                error,
                levels: state.levels.clone(),
                attempts: state.attempts.clone(),
                partial: Some(Box::new(finish(&state))),
            });
        }
    }
    Ok(finish(&state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_policy() -> MeasurePolicy {
        MeasurePolicy::with_grid_max(1e3)
    }

    #[test]
    fn level_zero_measure() {
        let m = build_measure(&DecayExpr::LogPower(1.0), 0, &small_policy()).unwrap();
        assert!((m.report.mass - 1.0).abs() < 1e-9);
        let q = m.report.quadratic_constant.unwrap();
        assert!(q > 0.0 && q.is_finite());
        assert!(m.report.certifies(&m.target));
        assert_eq!(m.support_cover(0).unwrap(), [(0.0, 1.0)]);
    }

    #[test]
    fn level_one_interleaves_and_certifies() {
        let p = small_policy();
        let m = build_measure(&DecayExpr::LogPower(1.0), 1, &p).unwrap();
        let l = &m.levels[0];
        assert!(l.m >= p.m_min && l.worst_ratio <= 1.0);
        assert!(m.report.mass_ok && m.report.certifies(&m.target));
        assert!(l.sup_diff <= 0.25 + l.max_budget);
    }

    #[test]
    fn classifier_gate() {
        let e = build_measure(&DecayExpr::PowerLaw(1.0), 1, &small_policy()).unwrap_err();
        assert_eq!(e.error, MeasureError::Rejected { outcome: "not-in" });
    }
}
