//! Window spectra against independent FFTs of sampled densities.

use rajchman_core::num::Complex;
use rajchman_core::spectral::*;
use rustfft::FftPlanner;

/// `h(y) = p^(1+k) w(p^(1+k) y)` periodized on `[0, 1)`: `phi_p(x) = h(p x)`.
fn bump_coefficients(p: u64, k: u32, len: usize) -> Vec<Complex> {
    let height = (p as f64).powi(1 + k as i32);
    let mut buf: Vec<Complex> = (0..len)
        .map(|i| {
            let y = i as f64 / len as f64;
            let y = if y > 0.5 { y - 1.0 } else { y };
            Complex::new(height * w(height * y), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    buf.iter().map(|c| c / len as f64).collect()
}

#[test]
fn prime_window_matches_bump_fft() {
    for &(p, k) in &[(2u64, 1u32), (3, 2), (7, 1), (13, 2)] {
        let q = (p as f64).powi(1 + k as i32);
        let len = ((128.0 * q) as usize).next_power_of_two();
        let fft = bump_coefficients(p, k, len);
        let m_max = 8 * q as i64;
        let s = prime_window_spectrum(p, k, 1e-10, m_max * p as i64).unwrap();
        for &(n, c) in s.coeffs() {
            assert_eq!(n % p as i64, 0);
            let m = n / p as i64;
            let want = fft[m.rem_euclid(len as i64) as usize];
            assert!((c - want).norm() < 1e-8, "p={p} k={k} n={n}: {c} vs {want}");
        }
    }
}

#[test]
fn sparsity_law_from_full_density() {
    // phi_5 with k = 1 sampled on x directly
    let (p, k) = (5u64, 1u32);
    let len = 1usize << 17;
    let mut buf: Vec<Complex> = (0..len)
        .map(|i| Complex::new(prime_window_density(p, k, i as f64 / len as f64), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let s = prime_window_spectrum(p, k, 0.0, 4000).unwrap();
    for n in 0..=4000i64 {
        let got = buf[n as usize] / len as f64;
        match s.get(n) {
            Some(c) => assert!((c - got).norm() < 1e-9, "{n}"),
            None => assert!(got.norm() < 1e-9, "{n}: {got}"),
        }
    }
}

#[test]
fn gm_reconstruction_is_the_density() {
    // p = 3 and k = 1: the band 2^16 leaves a tail below 1e-10
    let s = gm_spectrum(2, 1, 0.0, 1 << 16).unwrap();
    for i in 0..64 {
        let x = (i as f64 + 0.37) / 64.0;
        let want = gm_density(2, 1, x);
        let got = s.reconstruct(x);
        assert!(
            (got.re - want).abs() < 1e-8 * (1.0 + want) && got.im.abs() < 1e-8,
            "{x}"
        );
    }
}

#[test]
fn product_spectrum_is_pointwise_product() {
    let a = prime_window_spectrum(2, 1, 0.0, 8000).unwrap();
    let b = prime_window_spectrum(3, 1, 0.0, 20_000).unwrap();
    let ab = multiply_spectra(&a, &b, 0.0, a.n_max + b.n_max);
    assert_eq!(ab.truncation.overflow, 0);
    // the product mass is int g1 g2 = sum_n a(n) b(-n), not the product of masses
    let inner: f64 = a
        .coeffs()
        .iter()
        .filter_map(|&(n, c)| b.get(-n).map(|d| (c * d).re))
        .sum();
    assert!((ab.mass() - inner).abs() < 1e-13 && ab.mass() > 1.0);
    for i in 0..64 {
        let x = (i as f64 + 0.5) / 64.0;
        let direct = prime_window_density(2, 1, x) * prime_window_density(3, 1, x);
        let got = ab.reconstruct(x).re;
        assert!(
            (got - direct).abs() < 1e-8 * (1.0 + direct),
            "{x}: {got} {direct}"
        );
        let factors = a.reconstruct(x) * b.reconstruct(x);
        assert!((ab.reconstruct(x) - factors).norm() < 1e-10 * (1.0 + direct));
    }
}

#[test]
fn overflow_is_accounted() {
    let a = prime_window_spectrum(2, 1, 0.0, 200).unwrap();
    let ab = multiply_spectra(&a, &a, 0.0, 100);
    assert!(ab.truncation.overflow > 0 && ab.truncation.overflow_abs_sum > 0.0);
    assert!(ab.max_frequency() <= 100);
}

#[test]
fn pieces_route_matches_spectrum_route_for_level_products() {
    // level 1 then a refinement; the density product is checked pointwise
    let one = PieceSet::level_one(LevelSpec::new(3, 1).unwrap());
    let two = one.refine(LevelSpec::new(7, 2).unwrap());
    for i in 0..4000 {
        let x = i as f64 / 4000.0;
        let want = gm_density(3, 1, x) * gm_density(7, 2, x);
        assert!((two.density(x) - want).abs() <= 1e-9 * (1.0 + want), "{x}");
    }
    // density zero outside the exact cover
    let cover = two.cover();
    assert!(cover.windows(2).all(|w| w[0].1 < w[1].0));
    for i in 0..512 {
        let x = (i as f64 + 0.5) / 512.0;
        if !cover.iter().any(|&(a, b)| a <= x && x <= b) {
            assert_eq!(two.density(x), 0.0);
        }
    }
}

#[test]
fn transforms_of_both_routes_agree() {
    let s = gm_spectrum(10, 1, 0.0, 1 << 16).unwrap();
    let a = CompactDensity::from_spectrum(s);
    let b =
        CompactDensity::from_pieces(PieceSet::level_one(LevelSpec::new(10, 1).unwrap()), 2000.0);
    for &xi in &[0.0, 1.0, 11.0, 13.5, 99.0, 1234.5, 2000.0] {
        let (ta, tb) = (a.transform(xi), b.transform(xi));
        assert!(
            (ta.value - tb.value).norm() <= ta.budget + tb.budget + 1e-12,
            "{xi}"
        );
    }
}
