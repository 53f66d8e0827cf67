//! Primes, Kloosterman sums, complex divisor sums, Satake parameters and
//! the Hecke recursion at prime powers.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::sum::{CompensatedSum, ComplexSum};
use crate::ComplexValue;

/// Largest N accepted by [`primes_up_to`].
pub const PRIME_CAP: u64 = 1_000_000_000;
const SEGMENT: u64 = 1 << 18;

/// All primes ≤ n in ascending order (segmented sieve over odd numbers).
pub fn primes_up_to(n: u64) -> Result<Vec<u64>> {
    if n > PRIME_CAP {
        return Err(Error::CapacityExceeded { what: "prime sieve", requested: n, cap: PRIME_CAP });
    }
    let mut out = Vec::new();
    if n < 2 {
        return Ok(out);
    }
    out.push(2);
    let root = (n as f64).sqrt() as u64 + 1;
    // base primes up to √n by a plain sieve
    let mut small = alloc::vec![true; (root + 1) as usize];
    let mut base = Vec::new();
    for i in (3..=root).step_by(2) {
        if small[i as usize] {
            base.push(i);
            let mut j = i * i;
            while j <= root {
                small[j as usize] = false;
                j += i;
            }
        }
    }
    // segments cover odd numbers lo, lo+2, …
    let mut seg = alloc::vec![true; SEGMENT as usize];
    let mut lo = 3u64;
    while lo <= n {
        let hi = (lo + 2 * SEGMENT - 2).min(n | 1);
        let len = ((hi - lo) / 2 + 1) as usize;
        seg[..len].iter_mut().for_each(|b| *b = true);
        for &p in &base {
            if p * p > hi {
                break;
            }
            let mut start = (p * p).max(lo.div_ceil(p) * p);
            if start % 2 == 0 {
                start += p;
            }
            let mut j = start;
            while j <= hi {
                seg[((j - lo) / 2) as usize] = false;
                j += 2 * p;
            }
        }
        for (i, &b) in seg[..len].iter().enumerate() {
            let v = lo + 2 * i as u64;
            if b && v <= n {
                out.push(v);
            }
        }
        lo = hi + 2;
    }
    Ok(out)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of a modulo c for gcd(a, c) = 1, by extended Euclid.
pub fn mod_inverse(a: u64, c: u64) -> Option<u64> {
    if c == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (c as i128, (a % c) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(c as i128) as u64)
}

/// Number of divisors of n.
pub fn divisor_count(n: u64) -> u64 {
    let mut n = n;
    let mut d = 1;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        d *= e + 1;
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        d *= 2;
    }
    d
}

/// Weil bound d(c)·gcd(m,n,c)^{1/2}·c^{1/2}.
pub fn weil_bound(m: u64, n: u64, c: u64) -> f64 {
    divisor_count(c) as f64 * (gcd(gcd(m, n), c) as f64).sqrt() * (c as f64).sqrt()
}

/// S(m, n; c) = Σ_{x mod c, (x,c)=1} e((mx + n x̄)/c).
pub fn kloosterman_sum(m: u64, n: u64, c: u64) -> f64 {
    assert!(c >= 1, "Kloosterman modulus must be positive");
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    let (mr, nr) = (m % c, n % c);
    for x in 0..c {
        let Some(xi) = (if gcd(x, c) == 1 { mod_inverse(x, c) } else { None }) else {
            continue;
        };
        let k = ((mr as u128 * x as u128 + nr as u128 * xi as u128) % c as u128) as f64;
        let (s, co) = (2.0 * PI * k / c as f64).sin_cos();
        re.add(co);
        im.add(s);
    }
    assert!(
        im.value().abs() <= 1e-9 * c as f64,
        "Kloosterman sum has an imaginary part {}",
        im.value()
    );
    re.value()
}

/// Units modulo c with their inverses and the cosine table cos(2πk/c),
/// for evaluating S(m, n; c) at many n.
#[derive(Clone, Debug)]
pub struct KloostermanTable {
    c: u64,
    units: Vec<(u32, u32)>,
    cosines: Vec<f64>,
}

impl KloostermanTable {
    pub fn new(c: u64) -> Self {
        assert!((1..=u32::MAX as u64).contains(&c));
        let units = (0..c)
            .filter(|&x| gcd(x, c) == 1)
            .map(|x| (x as u32, mod_inverse(x, c).unwrap_or(0) as u32))
            .collect();
        let cosines = (0..c).map(|k| (2.0 * PI * k as f64 / c as f64).cos()).collect();
        Self { c, units, cosines }
    }

    pub fn modulus(&self) -> u64 {
        self.c
    }

    /// S(m, n; c).
    pub fn sum(&self, m: u64, n: u64) -> f64 {
        let c = self.c;
        let (mr, nr) = (m % c, n % c);
        let mut s = CompensatedSum::new();
        for &(x, xi) in &self.units {
            let k = (mr * x as u64 + nr * xi as u64) % c;
            s.add(self.cosines[k as usize]);
        }
        s.value()
    }
}

/// σ_s(n) = Σ_{d | n} d^s.
pub fn divisor_sigma_complex(s: ComplexValue, n: u64) -> ComplexValue {
    assert!(n >= 1);
    let mut acc = ComplexSum::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            acc.add((s * (d as f64).ln()).exp());
            let e = n / d;
            if e != d {
                acc.add((s * (e as f64).ln()).exp());
            }
        }
        d += 1;
    }
    acc.value()
}

/// Satake parameters: the roots α, β of X² − λX + 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SatakePair {
    pub alpha: ComplexValue,
    pub beta: ComplexValue,
}

pub fn satake_from_lambda(lambda_p: f64) -> Result<SatakePair> {
    if !(lambda_p.is_finite() && lambda_p.abs() <= 10.0) {
        return Err(Error::Domain { what: "Hecke eigenvalue (|lambda_p| <= 10)", value: lambda_p });
    }
    let disc = lambda_p * lambda_p - 4.0;
    let (alpha, beta) = if disc >= 0.0 {
        // larger-modulus root first, the other as its reciprocal
        let a = 0.5 * (lambda_p + lambda_p.signum() * disc.sqrt());
        let a = if lambda_p == 0.0 { 1.0 } else { a };
        (ComplexValue::new(a, 0.0), ComplexValue::new(1.0 / a, 0.0))
    } else {
        let a = ComplexValue::new(0.5 * lambda_p, 0.5 * (-disc).sqrt());
        (a, a.conj())
    };
    Ok(SatakePair { alpha, beta })
}

/// λ_{p^k} from λ_{p^{k+1}} = λ_p·λ_{p^k} − λ_{p^{k−1}}.
pub fn hecke_prime_power(lambda_p: f64, k: u32) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 0..k {
        let next = lambda_p * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plain_sieve(n: usize) -> Vec<u64> {
        let mut is = alloc::vec![true; n + 1];
        let mut out = Vec::new();
        for i in 2..=n {
            if is[i] {
                out.push(i as u64);
                let mut j = i * i;
                while j <= n {
                    is[j] = false;
                    j += i;
                }
            }
        }
        out
    }

    #[test]
    fn small_prime_lists() {
        assert_eq!(primes_up_to(10).unwrap(), alloc::vec![2, 3, 5, 7]);
        assert!(primes_up_to(1).unwrap().is_empty());
        assert!(primes_up_to(0).unwrap().is_empty());
        assert_eq!(primes_up_to(2).unwrap(), alloc::vec![2]);
        assert_eq!(primes_up_to(3).unwrap(), alloc::vec![2, 3]);
        assert!(primes_up_to(PRIME_CAP + 1).is_err());
    }

    #[test]
    fn sieve_matches_plain_sieve() {
        assert_eq!(primes_up_to(1_000_000).unwrap().len(), 78498);
        for n in [100usize, 524_287, 524_288, 524_289, 1_200_000] {
            assert_eq!(primes_up_to(n as u64).unwrap(), plain_sieve(n), "n = {n}");
        }
    }

    #[test]
    fn kloosterman_small_values() {
        assert_eq!(kloosterman_sum(1, 1, 1), 1.0);
        assert!((kloosterman_sum(1, 1, 2) - 1.0).abs() < 1e-15);
        assert!((kloosterman_sum(1, 1, 3) + 1.0).abs() < 1e-15);
        // S(1,1;5) = 2cos(2π/5)·… = 1 + √5 ... direct enumeration
        let mut s = 0.0;
        for x in 1..5u64 {
            let xi = (1..5u64).find(|y| x * y % 5 == 1).unwrap();
            s += (2.0 * PI * ((x + xi) % 5) as f64 / 5.0).cos();
        }
        assert!((kloosterman_sum(1, 1, 5) - s).abs() < 1e-14);
    }

    #[test]
    fn kloosterman_weil_bound() {
        for c in 1..=2000u64 {
            let t = KloostermanTable::new(c);
            for m in [1u64, 2, 7, 30, 50] {
                for n in [1u64, 3, 12, 49] {
                    let s = t.sum(m, n);
                    assert!(s.abs() <= weil_bound(m, n, c) + 1e-9, "S({m},{n};{c}) = {s}");
                }
            }
        }
    }

    #[test]
    fn table_matches_direct() {
        for c in [1u64, 2, 12, 97, 360] {
            let t = KloostermanTable::new(c);
            for (m, n) in [(1, 1), (2, 5), (7, 360), (13, 1000)] {
                assert!((t.sum(m, n) - kloosterman_sum(m, n, c)).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn divisor_sums() {
        let s = ComplexValue::new(0.3, -1.7);
        assert_eq!(divisor_sigma_complex(s, 1), ComplexValue::new(1.0, 0.0));
        let h = ComplexValue::new(0.0, 0.5);
        let v = divisor_sigma_complex(h, 7);
        assert!((v - (ComplexValue::new(1.0, 0.0) + (h * 7f64.ln()).exp())).norm() < 1e-15);
        let i = ComplexValue::new(0.0, 1.0);
        let want: ComplexValue = [1.0f64, 2.0, 3.0, 6.0].iter().map(|d| (i * d.ln()).exp()).sum();
        assert!((divisor_sigma_complex(i, 6) - want).norm() < 1e-14);
        assert_eq!(divisor_count(12), 6);
        assert_eq!(divisor_count(1), 1);
        assert_eq!(divisor_count(97), 2);
    }

    #[test]
    fn satake_examples() {
        let p = satake_from_lambda(2.0).unwrap();
        assert_eq!((p.alpha, p.beta), (ComplexValue::new(1.0, 0.0), ComplexValue::new(1.0, 0.0)));
        let p = satake_from_lambda(0.0).unwrap();
        assert!((p.alpha - ComplexValue::new(0.0, 1.0)).norm() < 1e-15);
        assert!((p.beta - ComplexValue::new(0.0, -1.0)).norm() < 1e-15);
        let p = satake_from_lambda(1.0).unwrap();
        assert!((p.alpha - ComplexValue::from_polar(1.0, PI / 3.0)).norm() < 1e-15);
        assert!((p.beta - ComplexValue::from_polar(1.0, -PI / 3.0)).norm() < 1e-15);
        assert!(satake_from_lambda(11.0).is_err());
    }

    #[test]
    fn hecke_examples() {
        assert_eq!(hecke_prime_power(0.7, 0), 1.0);
        let a = 1.3;
        assert!((hecke_prime_power(a, 2) - (a * a - 1.0)).abs() < 1e-15);
        assert!((hecke_prime_power(a, 3) - (a * a * a - 2.0 * a)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn kloosterman_symmetric(m in 1u64..500, n in 1u64..500, c in 1u64..400) {
            prop_assert!((kloosterman_sum(m, n, c) - kloosterman_sum(n, m, c)).abs() < 1e-10);
        }

        #[test]
        fn satake_pair_invariants(l in -10.0f64..10.0) {
            let p = satake_from_lambda(l).unwrap();
            prop_assert!((p.alpha * p.beta - 1.0).norm() < 1e-12);
            prop_assert!((p.alpha + p.beta - l).norm() < 1e-12);
        }

        #[test]
        fn hecke_matches_satake(l in -1.999f64..1.999, k in 0u32..=20) {
            let p = satake_from_lambda(l).unwrap();
            let v = (p.alpha.powu(k + 1) - p.beta.powu(k + 1)) / (p.alpha - p.beta);
            prop_assert!((v.re - hecke_prime_power(l, k)).abs() < 1e-10);
        }

        #[test]
        fn sigma_multiplicative(m in 1u64..3000, n in 1u64..3000, re in -2.0f64..2.0, im in -5.0f64..5.0) {
            prop_assume!(gcd(m, n) == 1);
            let s = ComplexValue::new(re, im);
            let a = divisor_sigma_complex(s, m * n);
            let b = divisor_sigma_complex(s, m) * divisor_sigma_complex(s, n);
            prop_assert!((a - b).norm() < 1e-10 * b.norm().max(1.0));
        }
    }
}
