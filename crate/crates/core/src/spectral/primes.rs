//! Primes in `(M, 2M]` by a segmented sieve of Eratosthenes.

use alloc::vec;
use alloc::vec::Vec;

const SEGMENT: u64 = 1 << 15;

fn base_primes(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Ascending primes in `[lo, hi]`.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || hi < lo {
        return Vec::new();
    }
    let lo = lo.max(2);
    let base = base_primes(libm::sqrt(hi as f64) as u64 + 1);
    let mut out = Vec::new();
    let mut start = lo;
    while start <= hi {
        let end = (start + SEGMENT - 1).min(hi);
        let mut composite = vec![false; (end - start + 1) as usize];
        for &p in &base {
            if p * p > end {
                break;
            }
            let first = (start.div_ceil(p) * p).max(p * p);
            let mut m = first;
            while m <= end {
                composite[(m - start) as usize] = true;
                m += p;
            }
        }
        out.extend(
            composite
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| start + i as u64),
        );
        start = end + 1;
    }
    out
}

/// Primes in `(m, 2m]`.
pub fn primes_in(m: u64) -> Vec<u64> {
    primes_between(m + 1, 2 * m)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
