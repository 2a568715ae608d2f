//! Dimension functions `h` and the profile `Gamma_h(r) = inf_{0<s<=r} r h(s)/s`.
//!
//! Gauges are evaluated through `ln h` as a function of `lambda = ln(1/s)`, so
//! the dichotomy test can probe radii far below the smallest double.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::num::geometric_points;

#[derive(Clone, Debug, PartialEq)]
pub enum GaugeExpr {
    /// `s^t`
    Power(f64),
    /// `1/log(1/s)`
    InvLogInv,
    /// `exp(-log(1/s)^p)`
    ExpNegLogPow(f64),
    Product(Vec<GaugeExpr>),
    /// `outer(inner(s))`
    Compose(Box<GaugeExpr>, Box<GaugeExpr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum GaugeError {
    Parse {
        position: usize,
        message: String,
    },
    /// `h` is not positive and finite at `s`.
    Invalid {
        s: f64,
    },
}

impl fmt::Display for GaugeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeError::Parse { position, message } => {
                write!(f, "gauge parse error at {position}: {message}")
            }
            GaugeError::Invalid { s } => write!(f, "gauge is not positive and finite at s = {s}"),
        }
    }
}

impl GaugeExpr {
    /// `ln h(e^(-lambda))`, `NaN` outside the domain.
    pub fn ln_h(&self, lambda: f64) -> f64 {
        if !(lambda > 0.0) {
            return f64::NAN;
        }
        match self {
            GaugeExpr::Power(t) => -t * lambda,
            GaugeExpr::InvLogInv => -libm::log(lambda),
            GaugeExpr::ExpNegLogPow(p) => -libm::pow(lambda, *p),
            GaugeExpr::Product(cs) => cs.iter().map(|c| c.ln_h(lambda)).sum(),
            GaugeExpr::Compose(outer, inner) => outer.ln_h(-inner.ln_h(lambda)),
        }
    }
}

impl fmt::Display for GaugeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeExpr::Power(t) => write!(f, "s^{}", num(*t)),
            GaugeExpr::InvLogInv => f.write_str("1/log(1/s)"),
            GaugeExpr::ExpNegLogPow(p) => write!(f, "exp(-log(1/s)^{})", num(*p)),
            GaugeExpr::Product(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    if matches!(c, GaugeExpr::Product(_)) {
                        write!(f, "({c})")?;
                    } else {
                        write!(f, "{c}")?;
                    }
                }
                Ok(())
            }
            GaugeExpr::Compose(o, i) => write!(f, "compose({o},{i})"),
        }
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:?}");
    s.strip_suffix(".0").map(String::from).unwrap_or(s)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, m: &str) -> Result<T, GaugeError> {
        Err(GaugeError::Parse {
            position: self.pos,
            message: m.into(),
        })
    }

    fn ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn lit(&mut self, s: &str) -> bool {
        self.ws();
        if self.src[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<f64, GaugeError> {
        self.ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-')))
            .unwrap_or(rest.len());
        match rest[..len].parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => {
                self.pos += len;
                Ok(v)
            }
            _ => self.err("expected a positive number"),
        }
    }

    fn product(&mut self) -> Result<GaugeExpr, GaugeError> {
        let mut terms = alloc::vec![self.term()?];
        while self.lit("*") {
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            GaugeExpr::Product(terms)
        })
    }

    fn term(&mut self) -> Result<GaugeExpr, GaugeError> {
        if self.lit("s^") {
            // a parenthesised exponent is accepted too
            if self.lit("(") {
                let t = self.number()?;
                return if self.lit(")") {
                    Ok(GaugeExpr::Power(t))
                } else {
                    self.err("expected ')'")
                };
            }
            return Ok(GaugeExpr::Power(self.number()?));
        }
        if self.lit("1/log(1/s)") {
            return Ok(GaugeExpr::InvLogInv);
        }
        if self.lit("exp(-log(1/s)^") {
            let p = self.number()?;
            return if self.lit(")") {
                Ok(GaugeExpr::ExpNegLogPow(p))
            } else {
                self.err("expected ')'")
            };
        }
        if self.lit("compose(") {
            let o = self.product()?;
            if !self.lit(",") {
                return self.err("expected ','");
            }
            let i = self.product()?;
            return if self.lit(")") {
                Ok(GaugeExpr::Compose(Box::new(o), Box::new(i)))
            } else {
                self.err("expected ')'")
            };
        }
        if self.lit("(") {
            let e = self.product()?;
            return if self.lit(")") {
                Ok(e)
            } else {
                self.err("expected ')'")
            };
        }
        self.err("expected s^t, 1/log(1/s), exp(-log(1/s)^p) or compose(h,g)")
    }
}

impl FromStr for GaugeExpr {
    type Err = GaugeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s, pos: 0 };
        let e = p.product()?;
        p.ws();
        if p.pos != s.len() {
            return p.err("trailing input");
        }
        Ok(e)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFunction {
    pub expr: GaugeExpr,
    pub r_max: f64,
}

impl GaugeFunction {
    pub fn new(expr: GaugeExpr) -> Self {
        Self { expr, r_max: 0.5 }
    }

    pub fn eval(&self, s: f64) -> f64 {
        libm::exp(self.expr.ln_h(-libm::log(s)))
    }

    /// Nondecreasing and tending to zero on `points` (ascending `s`).
    pub fn check_monotone(&self, points: &[f64]) -> bool {
        let v: Vec<f64> = points
            .iter()
            .map(|&s| self.expr.ln_h(-libm::log(s)))
            .collect();
        v.iter().all(|x| !x.is_nan()) && v.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs())
    }

    /// Second differences of `h` on `points` are all `<= tol`.
    pub fn check_concave(&self, points: &[f64], tol: f64) -> bool {
        points.windows(3).all(|w| {
            let (a, b, c) = (w[0], w[1], w[2]);
            let (ha, hb, hc) = (self.eval(a), self.eval(b), self.eval(c));
            let chord = ha + (hc - ha) * (b - a) / (c - a);
            hb >= chord - tol * hb.abs().max(1e-300)
        })
    }
}

/// `s` grid below each radius: `per_decade` points per decade over `decades`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SGrid {
    pub per_decade: usize,
    pub decades: usize,
}

impl Default for SGrid {
    fn default() -> Self {
        Self {
            per_decade: 60,
            decades: 12,
        }
    }
}

impl SGrid {
    fn step(&self) -> f64 {
        core::f64::consts::LN_10 / self.per_decade as f64
    }

    fn len(&self) -> usize {
        self.per_decade * self.decades + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaPoint {
    pub r: f64,
    pub gamma: f64,
    /// `Gamma_h(r) / r`, kept separately so monotonicity checks avoid a division.
    pub gamma_over_r: f64,
    pub argmin_s: f64,
    /// Minimum sits at the smallest `s` of the grid; the true infimum may be lower.
    pub boundary: bool,
}

fn check_finite(v: f64, s: f64) -> Result<f64, GaugeError> {
    if v.is_nan() || v == f64::INFINITY {
        Err(GaugeError::Invalid { s })
    } else {
        Ok(v)
    }
}

/// `Gamma_h(r)` over `s in [r 10^-decades, r]`.
pub fn gamma_h(h: &GaugeFunction, r: f64, grid: &SGrid) -> Result<GammaPoint, GaugeError> {
    let rho = -libm::log(r);
    let step = grid.step();
    let n = grid.len();
    let mut best = (f64::INFINITY, 0usize);
    for i in 0..n {
        let lambda = rho + step * i as f64;
        let v = check_finite(h.expr.ln_h(lambda) + lambda, libm::exp(-lambda))?;
        if v < best.0 {
            best = (v, i);
        }
    }
    let lambda = rho + step * best.1 as f64;
    let m = libm::exp(best.0);
    Ok(GammaPoint {
        r,
        gamma: r * m,
        gamma_over_r: m,
        argmin_s: if best.1 == 0 { r } else { libm::exp(-lambda) },
        boundary: best.1 == n - 1,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaProfile {
    /// Decreasing in `r`.
    pub points: Vec<GammaPoint>,
    pub grid: SGrid,
}

/// Profile on radii `r_max 10^(-i/per_decade)`, `i < count`, sharing one
/// `s` lattice so the infima are over nested sets.
pub fn gamma_profile(
    h: &GaugeFunction,
    r_max: f64,
    count: usize,
    grid: &SGrid,
) -> Result<GammaProfile, GaugeError> {
    let step = grid.step();
    let rho0 = -libm::log(r_max);
    let lattice = count.saturating_sub(1) + grid.len();
    let vals: Vec<f64> = (0..lattice)
        .map(|m| {
            let lambda = rho0 + step * m as f64;
            check_finite(h.expr.ln_h(lambda) + lambda, libm::exp(-lambda))
        })
        .collect::<Result<_, _>>()?;
    // suffix minima over the lattice, ties to the larger s
    let mut suffix = alloc::vec![(f64::INFINITY, lattice); lattice + 1];
    for m in (0..lattice).rev() {
        suffix[m] = if vals[m] <= suffix[m + 1].0 {
            (vals[m], m)
        } else {
            suffix[m + 1]
        };
    }
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let r = libm::exp(-(rho0 + step * i as f64));
        let (v, m) = suffix[i];
        let mult = libm::exp(v);
        points.push(GammaPoint {
            r,
            // s = r is itself a candidate with value exactly h(r)
            gamma: (r * mult).min(h.eval(r)),
            gamma_over_r: mult,
            argmin_s: libm::exp(-(rho0 + step * m as f64)),
            boundary: m == lattice - 1,
        });
    }
    Ok(GammaProfile {
        points,
        grid: *grid,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dichotomy {
    ZeroMeasure,
    NotSigmaFinite,
    Inconclusive,
}

impl Dichotomy {
    pub fn as_str(self) -> &'static str {
        match self {
            Dichotomy::ZeroMeasure => "zero-measure",
            Dichotomy::NotSigmaFinite => "not-sigma-finite",
            Dichotomy::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DichotomyPolicy {
    /// `t = 2^-j` for `j` in `0..=max_j`.
    pub max_j: u32,
    /// `ln(1/r)` runs geometrically over this range.
    pub rho_range: (f64, f64),
    pub rho_points: usize,
    pub zero_threshold: f64,
    pub infinite_threshold: f64,
    pub s_grid: SGrid,
}

impl Default for DichotomyPolicy {
    fn default() -> Self {
        Self {
            max_j: 20,
            rho_range: (1.0, 1e12),
            rho_points: 241,
            zero_threshold: 1e-6,
            infinite_threshold: 1e-2,
            s_grid: SGrid::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DichotomyReport {
    pub outcome: Dichotomy,
    /// `(t, ln max over the tail of Gamma_h(r)/r^t)`.
    pub tail_log_max: Vec<(f64, f64)>,
    /// `t` that certified a zero measure.
    pub witness_t: Option<f64>,
    pub rho_grid: Vec<f64>,
    pub tail_start: usize,
}

/// `ln Gamma_h(e^-rho)`.
fn ln_gamma_at(h: &GaugeFunction, rho: f64, grid: &SGrid) -> Result<f64, GaugeError> {
    let step = grid.step();
    let mut best = f64::INFINITY;
    for i in 0..grid.len() {
        let lambda = rho + step * i as f64;
        best = best.min(check_finite(h.expr.ln_h(lambda) + lambda, 0.0)?);
    }
    Ok(best - rho)
}

pub fn hausdorff_dichotomy(
    h: &GaugeFunction,
    policy: &DichotomyPolicy,
) -> Result<DichotomyReport, GaugeError> {
    let rho_grid = geometric_points(policy.rho_range.0, policy.rho_range.1, policy.rho_points);
    let ln_g: Vec<f64> = rho_grid
        .iter()
        .map(|&rho| ln_gamma_at(h, rho, &policy.s_grid))
        .collect::<Result<_, _>>()?;
    let tail_start = rho_grid.len() - rho_grid.len().div_ceil(4);
    let mut tail_log_max = Vec::new();
    for j in 0..=policy.max_j {
        let t = libm::ldexp(1.0, -(j as i32));
        let m = (tail_start..rho_grid.len())
            .map(|i| ln_g[i] + t * rho_grid[i])
            .fold(f64::NEG_INFINITY, f64::max);
        tail_log_max.push((t, m));
    }
    let zero_ln = libm::log(policy.zero_threshold);
    let inf_ln = libm::log(policy.infinite_threshold);
    let witness_t = tail_log_max
        .iter()
        .find(|(_, m)| *m < zero_ln)
        .map(|(t, _)| *t);
    let outcome = if witness_t.is_some() {
        Dichotomy::ZeroMeasure
    } else if tail_log_max.iter().all(|(_, m)| *m > inf_ln) {
        Dichotomy::NotSigmaFinite
    } else {
        Dichotomy::Inconclusive
    };
    Ok(DichotomyReport {
        outcome,
        tail_log_max,
        witness_t,
        rho_grid,
        tail_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn gauge(s: &str) -> GaugeFunction {
        GaugeFunction::new(s.parse().unwrap())
    }

    #[test]
    fn grammar_round_trip() {
        for s in [
            "s^0.5",
            "1/log(1/s)",
            "exp(-log(1/s)^0.5)",
            "s^2*1/log(1/s)",
            "compose(1/log(1/s),s^0.5)",
        ] {
            assert_eq!(s.parse::<GaugeExpr>().unwrap().to_string(), s);
        }
        assert!("s^-1".parse::<GaugeExpr>().is_err());
        assert!("log(s)".parse::<GaugeExpr>().is_err());
    }

    #[test]
    fn gamma_examples() {
        let g = SGrid::default();
        let p = gamma_h(&gauge("s^1"), 0.01, &g).unwrap();
        assert!((p.gamma - 0.01).abs() < 1e-15);
        let p = gamma_h(&gauge("s^2"), 0.1, &g).unwrap();
        assert!(p.boundary);
        assert!((p.gamma / (0.1 * 0.1 * 1e-12) - 1.0).abs() < 1e-9);
        let p = gamma_h(&gauge("1/log(1/s)"), 1e-4, &g).unwrap();
        assert!((p.gamma - 1.0 / (4.0 * core::f64::consts::LN_10)).abs() < 1e-12);
        assert_eq!(p.argmin_s, 1e-4);
    }

    #[test]
    fn dichotomy_examples() {
        let pol = DichotomyPolicy::default();
        assert_eq!(
            hausdorff_dichotomy(&gauge("s^0.5"), &pol).unwrap().outcome,
            Dichotomy::ZeroMeasure
        );
        assert_eq!(
            hausdorff_dichotomy(&gauge("s^1"), &pol).unwrap().outcome,
            Dichotomy::ZeroMeasure
        );
        assert_eq!(
            hausdorff_dichotomy(&gauge("1/log(1/s)"), &pol)
                .unwrap()
                .outcome,
            Dichotomy::NotSigmaFinite
        );
    }

    #[test]
    fn profile_is_monotone() {
        for s in ["s^0.5", "1/log(1/s)", "s^2", "exp(-log(1/s)^0.5)"] {
            let h = gauge(s);
            let prof = gamma_profile(&h, 0.5, 400, &SGrid::default()).unwrap();
            for w in prof.points.windows(2) {
                // points run from large r to small r
                assert!(w[0].gamma_over_r <= w[1].gamma_over_r, "{s}");
                assert!(w[0].gamma >= w[1].gamma * (1.0 - 1e-15), "{s}");
            }
            for p in &prof.points {
                assert!(p.gamma <= h.eval(p.r) * (1.0 + 1e-14), "{s}");
            }
        }
    }

    #[test]
    fn concavity_is_optional_information() {
        let pts = crate::num::geometric_points(1e-8, 0.3, 200);
        assert!(gauge("s^0.5").check_concave(&pts, 1e-12));
        assert!(!gauge("s^2").check_concave(&pts, 1e-12));
        assert!(gauge("1/log(1/s)").check_monotone(&pts));
    }
}
