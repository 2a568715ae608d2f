//! Invariants of the level-by-level construction, rechecked from outside.

use rajchman_core::decay::DecayExpr;
use rajchman_core::measure::*;
use rajchman_core::spectral::{gm_density, primes_in, psi0_hat, LevelSpec, PieceSet};

fn policy() -> MeasurePolicy {
    MeasurePolicy::with_grid_max(1e3)
}

#[test]
fn level_one_obeys_the_level_inequality() {
    let p = policy();
    let m = build_measure(&DecayExpr::LogPower(1.0), 1, &p).unwrap();
    let rec = &m.levels[0];
    assert!((rec.weight - rec.rho.rho / 2.0).abs() < 1e-15);
    for &xi in &m.verify_xi {
        let t = m.transform(xi);
        let diff = (t.value - psi0_hat(xi)).norm();
        assert!(diff <= rec.weight * theta_k(1, xi) + t.budget, "{xi}");
    }
    assert!((m.report.mass - 1.0).abs() < 1e-9);
    assert!(m.report.certifies(&m.target));
    assert!(m.report.c.is_finite() && m.report.c > 0.0);
}

#[test]
fn builds_are_deterministic() {
    let p = policy();
    let a = build_measure(&DecayExpr::LogPower(1.0), 1, &p).unwrap();
    let b = build_measure(&DecayExpr::LogPower(1.0), 1, &p).unwrap();
    assert_eq!(a, b);
}

#[test]
fn support_cover_is_the_window_set() {
    let (m, k) = (10u64, 1u32);
    let set = PieceSet::level_one(LevelSpec::new(m, k).unwrap());
    let cover = set.cover();
    assert!(cover.windows(2).all(|w| w[0].1 < w[1].0));
    assert!(cover.iter().all(|&(a, b)| 0.0 <= a && a < b && b <= 1.0));
    let bound: f64 = primes_in(m)
        .iter()
        .map(|&p| 2.0 * (p as f64).powi(-(k as i32)))
        .sum();
    assert!(set.total_length() <= bound + 1e-15);
    let near = |x: f64| {
        primes_in(m).iter().any(|&p| {
            let y = p as f64 * x;
            (y - y.round()).abs() <= (p as f64).powi(-(k as i32) - 1) * (1.0 + 1e-12)
        })
    };
    for i in 0..=4096 {
        let x = i as f64 / 4096.0;
        let inside = cover.iter().any(|&(a, b)| a <= x && x <= b);
        let d = gm_density(m, k, x);
        assert!(d >= 0.0 && set.density(x) >= 0.0);
        if !inside {
            assert_eq!(set.density(x), 0.0, "{x}");
            assert!(!near(x) || d == 0.0, "{x}");
        } else {
            assert!(near(x), "{x}");
        }
    }
}

#[test]
fn level_zero_cover_is_the_unit_interval() {
    let m = build_measure(&DecayExpr::LogPower(1.0), 0, &policy()).unwrap();
    assert_eq!(m.support_cover(0).unwrap(), [(0.0, 1.0)]);
    assert!(m.support_cover(1).is_err());
}

#[test]
fn second_level_schedule_interleaves() {
    // the second level exhausts its schedule; the attempts start at 2 M_1 + 1
    let p = policy();
    let err = build_measure(&DecayExpr::LogPower(1.0), 2, &p).unwrap_err();
    assert!(matches!(
        err.error,
        MeasureError::ScheduleExhausted { level: 2, .. }
    ));
    let m1 = err.levels[0].m;
    let second: Vec<u64> = err
        .attempts
        .iter()
        .filter(|a| a.level == 2)
        .map(|a| a.m)
        .collect();
    assert_eq!(second[0], 2 * m1 + 1);
    assert!(second.windows(2).all(|w| w[1] == 2 * w[0]));
    assert!(second.iter().all(|&m| m <= p.m_cap));
    let partial = err.partial.unwrap();
    assert_eq!(partial.m_list(), [m1]);
    assert!(partial.report.certifies(&partial.target));
}
