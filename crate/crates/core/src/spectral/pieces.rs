//! Exact support decomposition of products of window densities.
//!
//! A piece is a cluster of overlapping bumps around a rational reference
//! center. Bump centers are kept as offsets from that reference, computed in
//! integers, so widths far below the spacing of doubles near 1 stay resolved.

use alloc::vec::Vec;

use super::primes::primes_in;
use super::window::{psi0_local, w};
use super::SpectralError;
use crate::num::{gauss_legendre, unit_phase, Complex};

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSpec {
    pub m: u64,
    pub k: u32,
    pub primes: Vec<u64>,
}

impl LevelSpec {
    pub fn new(m: u64, k: u32) -> Result<Self, SpectralError> {
        if m < 2 || k == 0 {
            return Err(SpectralError::InvalidInput("level needs M >= 2 and k >= 1"));
        }
        let primes = primes_in(m);
        let top = libm::pow(*primes.last().expect("nonempty") as f64, 2.0 + k as f64);
        if top > super::spectrum::MAX_INV_WIDTH {
            return Err(SpectralError::Cap {
                what: "bump width p^-(2+k) below double resolution",
                value: top,
            });
        }
        Ok(Self { m, k, primes })
    }

    fn height(&self, p: u64) -> f64 {
        libm::pow(p as f64, 1.0 + self.k as f64) / self.primes.len() as f64
    }

    fn radius(&self, p: u64) -> f64 {
        libm::pow(p as f64, -(2.0 + self.k as f64))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Bump {
    level: u16,
    /// Bump center minus the piece reference.
    offset: f64,
    inv_width: f64,
    radius: f64,
    height: f64,
}

impl Bump {
    fn eval(&self, t: f64) -> f64 {
        self.height * w(self.inv_width * (t - self.offset))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    /// Reference center `num / den` in `[0, 1]`.
    pub num: u64,
    pub den: u64,
    /// Offsets of the piece interval from the reference.
    pub lo: f64,
    pub hi: f64,
    bumps: Vec<Bump>,
}

impl Piece {
    pub fn center(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `1 - center` without cancellation.
    fn co_center(&self) -> f64 {
        (self.den - self.num) as f64 / self.den as f64
    }

    /// Absolute interval `[center + lo, center + hi]`.
    pub fn interval(&self) -> (f64, f64) {
        (self.center() + self.lo, self.center() + self.hi)
    }

    /// Product over levels of the bump sums at offset `t`.
    fn product(&self, levels: usize, t: f64) -> f64 {
        let mut prod = 1.0;
        for l in 0..levels {
            let s: f64 = self
                .bumps
                .iter()
                .filter(|b| b.level as usize == l)
                .map(|b| b.eval(t))
                .sum();
            prod *= s;
            if prod == 0.0 {
                return 0.0;
            }
        }
        prod
    }
}

/// Exact `j/p - num/den` as a double.
fn offset(j: u64, p: u64, num: u64, den: u64) -> f64 {
    let n = j as i128 * den as i128 - num as i128 * p as i128;
    n as f64 / (p as f64 * den as f64)
}

/// Quadrature nodes: absolute abscissa split as reference plus offset.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NodeBlock {
    pub num: u64,
    pub den: u64,
    pub t: Vec<f64>,
    /// `weight * G(x)`.
    pub g: Vec<f64>,
    /// `weight * psi0(x) G(x)`.
    pub psi_g: Vec<f64>,
    /// `(width, peak value)` per panel, for the quadrature budget.
    pub panels: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PieceSet {
    pub levels: Vec<LevelSpec>,
    pub pieces: Vec<Piece>,
}

impl PieceSet {
    /// Clusters of the level-one bumps, clipped to `[0, 1]`.
    pub fn level_one(level: LevelSpec) -> Self {
        struct Raw {
            j: u64,
            p: u64,
            pos: f64,
            radius: f64,
        }
        let mut raw = Vec::new();
        for &p in &level.primes {
            let r = level.radius(p);
            for j in 0..=p {
                raw.push(Raw {
                    j,
                    p,
                    pos: j as f64 / p as f64 - r,
                    radius: r,
                });
            }
        }
        raw.sort_by(|a, b| a.pos.total_cmp(&b.pos));
        let mut pieces: Vec<Piece> = Vec::new();
        for b in raw {
            let bump = |num, den| Bump {
                level: 0,
                offset: offset(b.j, b.p, num, den),
                inv_width: 1.0 / b.radius,
                radius: b.radius,
                height: level.height(b.p),
            };
            if let Some(last) = pieces.last_mut() {
                let d = offset(b.j, b.p, last.num, last.den);
                if d - b.radius <= last.hi {
                    last.hi = last.hi.max(d + b.radius);
                    last.bumps.push(bump(last.num, last.den));
                    continue;
                }
            }
            let (num, den) = reduce(b.j, b.p);
            pieces.push(Piece {
                num,
                den,
                lo: -b.radius,
                hi: b.radius,
                bumps: alloc::vec![bump(num, den)],
            });
        }
        for pc in &mut pieces {
            pc.lo = pc.lo.max(-pc.center());
            pc.hi = pc.hi.min(pc.co_center());
        }
        pieces.retain(|pc| pc.hi > pc.lo);
        Self {
            levels: alloc::vec![level],
            pieces,
        }
    }

    /// Intersect every piece with the bumps of a further level.
    pub fn refine(&self, level: LevelSpec) -> Self {
        let idx = self.levels.len() as u16;
        let mut out = Vec::new();
        for pc in &self.pieces {
            let (a, b) = pc.interval();
            let mut new_lo = f64::INFINITY;
            let mut new_hi = f64::NEG_INFINITY;
            let mut added = Vec::new();
            for &p in &level.primes {
                let r = level.radius(p);
                let pf = p as f64;
                let j0 = libm::floor(pf * (a - r)).max(0.0) as u64;
                let j1 = (libm::ceil(pf * (b + r)) as u64).min(p);
                for j in j0..=j1 {
                    let d = offset(j, p, pc.num, pc.den);
                    if d - r <= pc.hi && d + r >= pc.lo {
                        new_lo = new_lo.min(d - r);
                        new_hi = new_hi.max(d + r);
                        added.push(Bump {
                            level: idx,
                            offset: d,
                            inv_width: 1.0 / r,
                            radius: r,
                            height: level.height(p),
                        });
                    }
                }
            }
            let lo = pc.lo.max(new_lo);
            let hi = pc.hi.min(new_hi);
            if added.is_empty() || hi <= lo {
                continue;
            }
            let mut bumps = pc.bumps.clone();
            // keep only bumps that still reach the shrunken interval
            bumps.retain(|bp| bp.offset + bp.radius > lo && bp.offset - bp.radius < hi);
            bumps.extend(added);
            out.push(Piece {
                num: pc.num,
                den: pc.den,
                lo,
                hi,
                bumps,
            });
        }
        let mut levels = self.levels.clone();
        levels.push(level);
        Self {
            levels,
            pieces: out,
        }
    }

    /// Exact support: per piece, the intersection over levels of the union of
    /// that level's bump intervals. Sorted and disjoint.
    pub fn cover(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for pc in &self.pieces {
            let mut acc = alloc::vec![(pc.lo, pc.hi)];
            for l in 0..self.levels.len() {
                let mut iv: Vec<(f64, f64)> = pc
                    .bumps
                    .iter()
                    .filter(|b| b.level as usize == l)
                    .map(|b| (b.offset - b.radius, b.offset + b.radius))
                    .collect();
                iv.sort_by(|a, b| a.0.total_cmp(&b.0));
                acc = intersect(&acc, &merge(iv));
            }
            let c = pc.center();
            for (a, b) in acc {
                let iv = (c + a, c + b);
                match out.last_mut() {
                    Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
                    _ => out.push(iv),
                }
            }
        }
        out
    }

    pub fn total_length(&self) -> f64 {
        self.pieces.iter().map(|p| p.hi - p.lo).sum()
    }

    pub fn bump_count(&self) -> usize {
        self.pieces.iter().map(|p| p.bumps.len()).sum()
    }

    /// `prod_l g_l(x)` for `x` in `[0, 1]`; zero off the pieces.
    pub fn density(&self, x: f64) -> f64 {
        let n = self.levels.len();
        let start = self.pieces.partition_point(|pc| pc.interval().1 < x);
        let mut best = 0.0f64;
        for pc in &self.pieces[start..] {
            let (a, b) = pc.interval();
            if a > x {
                break;
            }
            if x <= b {
                // origin clusters at 0 and 1 describe the same periodic bump
                best = best.max(pc.product(n, x - pc.center()));
            }
        }
        best
    }

    /// Gauss-Legendre nodes on panels between bump edges, split further so
    /// that `2 pi xi_max h <= 1/2` on each panel `h`.
    pub fn nodes(&self, xi_max: f64) -> Vec<NodeBlock> {
        let n = self.levels.len();
        let order = quadrature_order(n);
        let (gx, gw) = gauss_legendre(order);
        let mut blocks = Vec::with_capacity(self.pieces.len());
        for pc in &self.pieces {
            let mut cuts = alloc::vec![pc.lo, pc.hi];
            for b in &pc.bumps {
                for e in [b.offset - b.radius, b.offset + b.radius] {
                    if e > pc.lo && e < pc.hi {
                        cuts.push(e);
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let (c, cc) = (pc.center(), pc.co_center());
            let mut blk = NodeBlock {
                num: pc.num,
                den: pc.den,
                ..NodeBlock::default()
            };
            for win in cuts.windows(2) {
                let width = win[1] - win[0];
                let split = libm::ceil(4.0 * core::f64::consts::PI * xi_max * width).clamp(1.0, 1e5)
                    as usize;
                for s in 0..split {
                    let a = win[0] + width * s as f64 / split as f64;
                    let b = if s + 1 == split {
                        win[1]
                    } else {
                        win[0] + width * (s + 1) as f64 / split as f64
                    };
                    let half = 0.5 * (b - a);
                    let mid = 0.5 * (a + b);
                    let mut peak = 0.0f64;
                    for (x, wt) in gx.iter().zip(&gw) {
                        let t = mid + half * x;
                        let g = pc.product(n, t);
                        if g == 0.0 {
                            continue;
                        }
                        let psi = psi0_local(c + t, cc - t);
                        peak = peak.max(g.max(g * psi));
                        blk.t.push(t);
                        blk.g.push(wt * half * g);
                        blk.psi_g.push(wt * half * g * psi);
                    }
                    if peak > 0.0 {
                        blk.panels.push((b - a, peak));
                    }
                }
            }
            if !blk.t.is_empty() {
                blocks.push(blk);
            }
        }
        blocks
    }
}

/// Nodes per panel: `psi0 G` has degree `6 (levels + 1)`, and the rule keeps
/// [`PHASE_TERMS`] Taylor terms of the phase exact on top of that.
fn quadrature_order(levels: usize) -> usize {
    (6 * (levels + 1) + PHASE_TERMS).div_ceil(2)
}

const PHASE_TERMS: usize = 20;

/// Bound on the quadrature error of [`node_transform`] at `xi`: on a panel of
/// width `h` the phase differs from its Taylor polynomial of degree
/// `PHASE_TERMS - 1` by at most `(pi |xi| h)^PHASE_TERMS / PHASE_TERMS!`, and
/// both the integral and the rule see that remainder against `h * peak`. The
/// peak is the node maximum doubled, which covers a polynomial of this degree
/// on the short panels used here.
pub fn quadrature_budget(blocks: &[NodeBlock], xi: f64) -> f64 {
    let mut fact = 1.0;
    for i in 1..=PHASE_TERMS {
        fact *= i as f64;
    }
    let mut total = 0.0;
    for blk in blocks {
        for &(h, peak) in &blk.panels {
            let r = core::f64::consts::PI * libm::fabs(xi) * h;
            total += 2.0 * h * 2.0 * peak * libm::pow(r, PHASE_TERMS as f64) / fact;
        }
    }
    total
}

fn merge(sorted: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for iv in sorted {
        match out.last_mut() {
            Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
            _ => out.push(iv),
        }
    }
    out
}

fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi > lo {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn reduce(j: u64, p: u64) -> (u64, u64) {
    let g = gcd(j, p);
    (j / g, p / g)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `sum_blocks e^(-2 pi i xi c) sum_i v_i e^(-2 pi i xi t_i)` with `v` picked by `pick`.
pub fn node_transform(blocks: &[NodeBlock], xi: f64, pick: fn(&NodeBlock) -> &[f64]) -> Complex {
    let mut total = Complex::new(0.0, 0.0);
    for blk in blocks {
        let mut inner = Complex::new(0.0, 0.0);
        for (t, v) in blk.t.iter().zip(pick(blk)) {
            inner += unit_phase(xi * t) * *v;
        }
        // the rational center: reduce xi * num mod den first when xi is an integer
        let phase = if xi == libm::round(xi) && libm::fabs(xi) < 9.0e15 {
            let r = (xi as i128 * blk.num as i128).rem_euclid(blk.den as i128);
            unit_phase(r as f64 / blk.den as f64)
        } else {
            unit_phase(xi * (blk.num as f64 / blk.den as f64))
        };
        total += phase * inner;
    }
    total
}

pub fn abs_weight_sum(blocks: &[NodeBlock], pick: fn(&NodeBlock) -> &[f64]) -> f64 {
    blocks
        .iter()
        .flat_map(|b| pick(b).iter())
        .map(|v| v.abs())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::spectrum::gm_density;

    #[test]
    fn level_one_matches_direct_density() {
        let l = LevelSpec::new(5, 1).unwrap();
        let set = PieceSet::level_one(l);
        for i in 0..=4000 {
            let x = i as f64 / 4000.0 + 1e-5;
            let x = x.min(1.0);
            let d = set.density(x);
            let g = gm_density(5, 1, x);
            assert!((d - g).abs() <= 1e-10 * g.max(1.0), "{x}: {d} {g}");
        }
    }

    #[test]
    fn origin_clusters_are_clipped() {
        let set = PieceSet::level_one(LevelSpec::new(10, 1).unwrap());
        let first = &set.pieces[0];
        let last = set.pieces.last().unwrap();
        assert_eq!((first.num, first.den, first.lo), (0, 1, 0.0));
        assert_eq!((last.num, last.den, last.hi), (1, 1, 0.0));
        assert_eq!(first.bumps.len(), 4);
    }

    #[test]
    fn node_masses() {
        let set = PieceSet::level_one(LevelSpec::new(5, 1).unwrap());
        let nodes = set.nodes(64.0);
        let mass = node_transform(&nodes, 0.0, |b| &b.g);
        assert!((mass.re - 1.0).abs() < 1e-12, "{mass}");
    }

    #[test]
    fn refine_keeps_only_overlaps() {
        let set = PieceSet::level_one(LevelSpec::new(3, 1).unwrap());
        let two = set.refine(LevelSpec::new(7, 1).unwrap());
        assert!(two.pieces.len() < set.pieces.len() + 2);
        for i in 0..20000 {
            let x = i as f64 / 20000.0;
            let want = gm_density(3, 1, x) * gm_density(7, 1, x);
            let got = two.density(x);
            assert!(
                (want - got).abs() <= 1e-9 * want.max(1.0),
                "{x}: {want} {got}"
            );
        }
    }
}
