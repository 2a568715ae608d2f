//! Empirical limsup/liminf of `xi^(-alpha) / f(xi)` and mutual domination.

use alloc::vec::Vec;

use super::{DecayError, DecayExpr};
use crate::num::GeometricGrid;

#[derive(Clone, Debug, PartialEq)]
pub struct TailEstimate {
    pub alpha: f64,
    /// sup of the ratio over the tail half of the grid.
    pub ls_empirical: f64,
    /// inf of the ratio over the tail half of the grid.
    pub li_empirical: f64,
    /// `(xi, ratio)` at every grid point where `f > 0`.
    pub ratios: Vec<(f64, f64)>,
    /// Grid points where `f` vanishes.
    pub zeros: Vec<f64>,
    pub tail_start: usize,
}

impl TailEstimate {
    /// Ratio at the last point of the tail over the ratio at its first point.
    pub fn tail_trend(&self) -> f64 {
        let tail = &self.ratios[self.tail_start.min(self.ratios.len() - 1)..];
        tail[tail.len() - 1].1 / tail[0].1
    }
}

fn log_ratio(expr: &DecayExpr, alpha: f64, xi: f64) -> Result<f64, DecayError> {
    Ok(expr.neg_log_f(xi)? - alpha * libm::log(xi))
}

pub fn estimate_tails(
    expr: &DecayExpr,
    alpha: f64,
    grid: &GeometricGrid,
) -> Result<TailEstimate, DecayError> {
    if !grid.is_valid() {
        return Err(DecayError::Degenerate("invalid grid"));
    }
    estimate_tails_on(expr, alpha, &grid.values())
}

/// [`estimate_tails`] on explicit ascending abscissas.
pub fn estimate_tails_on(
    expr: &DecayExpr,
    alpha: f64,
    points: &[f64],
) -> Result<TailEstimate, DecayError> {
    let floor = expr.cutoff().max(1.0);
    if points.first().is_none_or(|&x| x <= floor) {
        return Err(DecayError::Domain {
            xi: points.first().copied().unwrap_or(f64::NAN),
            cutoff: floor,
        });
    }
    let mut ratios = Vec::with_capacity(points.len());
    let mut zeros = Vec::new();
    let half = points.len() / 2;
    let mut tail_start = None;
    for (i, &xi) in points.iter().enumerate() {
        let lr = log_ratio(expr, alpha, xi)?;
        if lr == f64::INFINITY {
            zeros.push(xi);
            continue;
        }
        if i >= half && tail_start.is_none() {
            tail_start = Some(ratios.len());
        }
        ratios.push((xi, libm::exp(lr)));
    }
    let Some(tail_start) = tail_start else {
        return Err(DecayError::Degenerate(
            "f vanishes on the whole tail of the grid",
        ));
    };
    let tail = &ratios[tail_start..];
    let ls = tail.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let li = tail.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Ok(TailEstimate {
        alpha,
        ls_empirical: ls,
        li_empirical: li,
        ratios,
        zeros,
        tail_start,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Closeness {
    pub close: bool,
    /// False when either function vanishes on the tail.
    pub comparable: bool,
    pub sup_f_over_g: f64,
    pub sup_g_over_f: f64,
}

/// Both `f/g` and `g/f` stay below `bound` on the tail half of the grid.
pub fn asymptotically_close(
    f: &DecayExpr,
    g: &DecayExpr,
    grid: &GeometricGrid,
    bound: f64,
) -> Result<Closeness, DecayError> {
    let pts = grid.values();
    let mut fg = f64::NEG_INFINITY;
    let mut gf = f64::NEG_INFINITY;
    for &xi in &pts[pts.len() / 2..] {
        let pf = f.neg_log_f(xi)?;
        let pg = g.neg_log_f(xi)?;
        if pf == f64::INFINITY || pg == f64::INFINITY {
            return Ok(Closeness {
                close: false,
                comparable: false,
                sup_f_over_g: f64::NAN,
                sup_g_over_f: f64::NAN,
            });
        }
        fg = fg.max(pg - pf);
        gf = gf.max(pf - pg);
    }
    let (fg, gf) = (libm::exp(fg), libm::exp(gf));
    Ok(Closeness {
        close: fg <= bound && gf <= bound,
        comparable: true,
        sup_f_over_g: fg,
        sup_g_over_f: gf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decay::TauExpr;
    use alloc::boxed::Box;
    use alloc::vec;

    #[test]
    fn power_law_ratio_is_one() {
        let t = estimate_tails(
            &DecayExpr::PowerLaw(1.0),
            1.0,
            &GeometricGrid::new(10.0, 1e6, 50),
        )
        .unwrap();
        assert!((t.ls_empirical - 1.0).abs() < 1e-12 && (t.li_empirical - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_decay_against_root() {
        let t = estimate_tails(
            &DecayExpr::LogPower(1.0),
            0.5,
            &GeometricGrid::new(10.0, 1e6, 60),
        )
        .unwrap();
        assert!(t.ls_empirical < 1.0 && t.li_empirical < 1.0);
        assert!(t.ratios[t.tail_start..].windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn half_integers_expose_small_liminf() {
        let e = DecayExpr::TauExponent(TauExpr::AbsCos(1.0));
        let pts: Vec<f64> = (10..2000).map(|k| k as f64 * 10.0 + 0.5).collect();
        let t = estimate_tails_on(&e, 0.25, &pts).unwrap();
        let last = *pts.last().unwrap();
        assert!((t.li_empirical - libm::pow(last, -0.25)).abs() < 1e-12);
    }

    #[test]
    fn closeness_examples() {
        let grid = GeometricGrid::new(10.0, 1e6, 80);
        let f = DecayExpr::LogPower(1.0);
        let g = DecayExpr::Product(vec![DecayExpr::Const(7.0), f.clone()]);
        let c = asymptotically_close(&f, &g, &grid, 1e3).unwrap();
        assert!(c.close);
        assert!((c.sup_g_over_f - 7.0).abs() < 1e-12 && (c.sup_f_over_g - 1.0 / 7.0).abs() < 1e-12);
        let c = asymptotically_close(&DecayExpr::PowerLaw(1.0), &f, &grid, 1e3).unwrap();
        assert!(!c.close);
        let c = asymptotically_close(&f, &f, &grid, 1e3).unwrap();
        assert!(c.close && c.sup_f_over_g == 1.0 && c.sup_g_over_f == 1.0);
        let z = DecayExpr::AbsCosTimes(0.0, Box::new(DecayExpr::Const(0.0)));
        assert!(!asymptotically_close(&f, &z, &grid, 1e3).unwrap().comparable);
    }
}
