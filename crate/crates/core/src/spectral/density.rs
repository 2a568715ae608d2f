//! Transforms of `psi0 * G` for a 1-periodic nonnegative `G`, with an explicit
//! bound on everything the representation leaves out.

use alloc::vec::Vec;

use super::pieces::{abs_weight_sum, node_transform, quadrature_budget, NodeBlock, PieceSet};
use super::spectrum::SparseSpectrum;
use super::window::{psi0_envelope_lattice_sum, psi0_envelope_tail, psi0_hat};
use crate::num::Complex;

/// Relative rounding allowance per unit of absolute coefficient mass.
const ROUNDING: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub enum PeriodicFactor {
    /// Band-limited coefficients of `G`.
    Spectrum(SparseSpectrum),
    /// Exact decomposition of the support of `G`.
    Pieces {
        set: PieceSet,
        nodes: Vec<NodeBlock>,
    },
}

/// `psi0(x) G(x)` on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactDensity {
    pub factor: PeriodicFactor,
    lattice_sum: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transform {
    pub value: Complex,
    /// `|exact - value| <= budget`.
    pub budget: f64,
}

impl CompactDensity {
    pub fn from_spectrum(s: SparseSpectrum) -> Self {
        Self {
            factor: PeriodicFactor::Spectrum(s),
            lattice_sum: psi0_envelope_lattice_sum(),
        }
    }

    /// Quadrature resolves frequencies up to `xi_max`; beyond that the budget grows.
    pub fn from_pieces(set: PieceSet, xi_max: f64) -> Self {
        let nodes = set.nodes(xi_max);
        Self {
            factor: PeriodicFactor::Pieces { set, nodes },
            lattice_sum: psi0_envelope_lattice_sum(),
        }
    }

    /// `int_0^1 psi0 G e^(-2 pi i xi x) dx` and its error budget.
    pub fn transform(&self, xi: f64) -> Transform {
        match &self.factor {
            PeriodicFactor::Spectrum(s) => {
                let mut value = Complex::new(0.0, 0.0);
                let mut abs = 0.0;
                for &(n, c) in s.coeffs() {
                    let t = c * psi0_hat(xi - n as f64);
                    abs += t.norm();
                    value += t;
                }
                // |G_hat(n)| <= G_hat(0) because G >= 0
                let g0 = s.mass().abs();
                let trunc = s.tau_trunc * self.lattice_sum;
                let gap = s.n_max as f64 + 1.0 - libm::fabs(xi);
                let tails = if gap >= 1.0 {
                    g0 * 2.0 * psi0_envelope_tail(gap)
                } else {
                    // frequency at the band edge: every missing coefficient may count
                    g0 * (self.lattice_sum + psi0_envelope_tail(1.0))
                };
                Transform {
                    value,
                    budget: trunc + tails + ROUNDING * (abs + 1.0),
                }
            }
            PeriodicFactor::Pieces { nodes, .. } => {
                let value = node_transform(nodes, xi, |b| &b.psi_g);
                let abs = abs_weight_sum(nodes, |b| &b.psi_g);
                let rounding = ROUNDING * abs * (1.0 + libm::log(1.0 + nodes.len() as f64));
                Transform {
                    value,
                    budget: rounding + quadrature_budget(nodes, xi),
                }
            }
        }
    }

    /// Exact value of `G(x)` where the representation allows it.
    pub fn periodic_factor(&self, x: f64) -> f64 {
        match &self.factor {
            PeriodicFactor::Spectrum(s) => s.reconstruct(x).re,
            PeriodicFactor::Pieces { set, .. } => set.density(x),
        }
    }

    /// Coefficients `G_hat(n)` for `|n| <= n_max`, dropping those below `tau`.
    pub fn periodic_spectrum(&self, tau: f64, n_max: i64) -> SparseSpectrum {
        match &self.factor {
            PeriodicFactor::Spectrum(s) => s.clone(),
            PeriodicFactor::Pieces { set, nodes } => {
                let mut coeffs = Vec::new();
                for n in 0..=n_max {
                    let c = node_transform(nodes, n as f64, |b| &b.g);
                    // quadrature was sized for the transform band; callers keep n_max inside it
                    let c = if n == 0 { Complex::new(c.re, 0.0) } else { c };
                    if c.norm() >= tau {
                        coeffs.push((n, c));
                    }
                }
                let mut all: Vec<(i64, Complex)> = coeffs
                    .iter()
                    .rev()
                    .filter(|(n, _)| *n > 0)
                    .map(|&(n, c)| (-n, c.conj()))
                    .collect();
                all.extend(coeffs);
                let meta = super::spectrum::SpectrumMeta {
                    m_list: set.levels.iter().map(|l| l.m).collect(),
                    k_list: set.levels.iter().map(|l| l.k).collect(),
                };
                SparseSpectrum::from_parts(all, tau, n_max, true, meta)
                    .expect("coefficients built symmetric and sorted")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::pieces::LevelSpec;
    use super::super::spectrum::gm_spectrum;
    use super::*;

    #[test]
    fn routes_agree_at_small_size() {
        // p^3 <= 1331, fully resolved inside the band
        let spec = gm_spectrum(5, 1, 0.0, 20_000).unwrap();
        let a = CompactDensity::from_spectrum(spec);
        let b =
            CompactDensity::from_pieces(PieceSet::level_one(LevelSpec::new(5, 1).unwrap()), 5000.0);
        for &xi in &[0.0, 0.5, 3.0, 11.0, 77.7, 400.0, 1331.0, 5000.0] {
            let ta = a.transform(xi);
            let tb = b.transform(xi);
            assert!(
                (ta.value - tb.value).norm() <= ta.budget + tb.budget + 1e-12,
                "{xi}: {} {}",
                ta.value,
                tb.value
            );
        }
        assert!((a.transform(0.0).value.re - 1.0).abs() < 0.2);
    }

    #[test]
    fn pieces_spectrum_matches_closed_form() {
        let b =
            CompactDensity::from_pieces(PieceSet::level_one(LevelSpec::new(3, 1).unwrap()), 200.0);
        let s = b.periodic_spectrum(1e-12, 200);
        let c = gm_spectrum(3, 1, 1e-12, 200).unwrap();
        for n in -200..=200 {
            let x = s.get(n).unwrap_or_default();
            let y = c.get(n).unwrap_or_default();
            assert!((x - y).norm() < 1e-11, "{n}: {x} {y}");
        }
    }
}
