use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use super::ode::bessel_ode_advance;
use crate::error::{Error, Result};
use crate::sum::CompensatedSum;
use crate::ComplexValue;

/// Largest |x| accepted by the integer-order routines.
pub const BESSEL_INT_MAX_X: f64 = 1e5;

/// J_n(x) for any integer n and real x.
pub fn bessel_j_int(n: i64, x: f64) -> Result<f64> {
    let m = n.unsigned_abs();
    if m > 10_000_000 {
        return Err(Error::Domain { what: "Bessel order", value: n as f64 });
    }
    let sign_n = if n < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
    let sign_x = if x < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
    let v = bessel_j_int_range(x.abs(), m as usize)?;
    Ok(sign_n * sign_x * v[m as usize])
}

/// J_0(x), …, J_{n_max}(x) for x ≥ 0 by Miller's backward recurrence,
/// normalised against an independent evaluation of J_0 or J_1.
pub fn bessel_j_int_range(x: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain { what: "Bessel argument (expected x >= 0)", value: x });
    }
    if x > BESSEL_INT_MAX_X {
        return Err(Error::Overflow { what: "integer-order Bessel J (argument beyond guard)" });
    }
    let mut out = alloc::vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let top = (n_max as f64).max(x);
    let start = (top + 30.0 + (40.0 * top).sqrt()).ceil() as usize + 1;
    let mut jp1 = 0.0f64; // J_{k+1}
    let mut jk = 1e-300f64; // J_k
    let mut j0 = 0.0;
    let mut j1 = 0.0;
    for k in (1..=start).rev() {
        let jm1 = (2.0 * k as f64 / x) * jk - jp1;
        jp1 = jk;
        jk = jm1;
        // jk now holds J_{k-1}, jp1 holds J_k
        if k <= n_max {
            out[k] = jp1;
        }
        if k == 1 {
            j1 = jp1;
            j0 = jk;
        }
        if jk.abs() > 1e250 {
            let s = 1e-250;
            jk *= s;
            jp1 *= s;
            for v in out.iter_mut().skip(k) {
                *v *= s;
            }
        }
    }
    out[0] = j0;
    let (t0, t1) = bessel_j01(x)?;
    let scale = if t0.abs() >= t1.abs() { t0 / j0 } else { t1 / j1 };
    for v in out.iter_mut() {
        *v *= scale;
    }
    Ok(out)
}

/// (J_0(x), J_1(x)) for x ≥ 0 without recurrences: power series up to 8,
/// Taylor stepping of Bessel's equation to 25, Hankel's expansion beyond.
pub(crate) fn bessel_j01(x: f64) -> Result<(f64, f64)> {
    if x <= 8.0 {
        return Ok((series(0, x), series(1, x)));
    }
    if x < 25.0 {
        let y0 = series(0, 8.0);
        let y1 = series(1, 8.0);
        let (y, dy) = bessel_ode_advance(
            0.0,
            8.0,
            ComplexValue::new(y0, 0.0),
            ComplexValue::new(-y1, 0.0),
            x,
        )?;
        return Ok((y.re, -dy.re));
    }
    Ok((hankel(0, x), hankel(1, x)))
}

fn series(n: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= h / k as f64;
    }
    let mut s = CompensatedSum::new();
    let q = -h * h;
    for k in 0..200u32 {
        s.add(term);
        term *= q / ((k + 1) as f64 * (k + 1 + n) as f64);
        if term.abs() < 1e-18 * s.value().abs().max(1e-300) && k > 2 {
            break;
        }
    }
    s.value()
}

fn hankel(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let mut p = CompensatedSum::new();
    let mut q = CompensatedSum::new();
    let mut a = 1.0; // a_k / x^k
    let mut prev = f64::INFINITY;
    for k in 0..60u32 {
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        match k % 4 {
            0 => p.add(a),
            1 => q.add(a),
            2 => p.add(-a),
            _ => q.add(-a),
        }
        if a.abs() < 1e-17 {
            break;
        }
        let j = (2 * k + 1) as f64;
        a *= (mu - j * j) / ((k + 1) as f64 * 8.0 * x);
    }
    let chi = x - (0.5 * n as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p.value() * chi.cos() - q.value() * chi.sin())
}

/// The envelope |J_n(x)| ≤ (|x|/2)^n / n!.
pub fn bessel_j_envelope(n: u64, x: f64) -> f64 {
    let lx = (0.5 * x.abs()).ln();
    let mut l = n as f64 * lx;
    // ln n! by Stirling for large n, exact product otherwise
    if n < 30 {
        for k in 2..=n {
            l -= (k as f64).ln();
        }
    } else {
        let nf = n as f64;
        l -= nf * nf.ln() - nf + 0.5 * (2.0 * PI * nf).ln() + 1.0 / (12.0 * nf);
    }
    l.exp()
}

/// J_k(2πx) = ∫_{−1/2}^{1/2} cos(2π(kt − x sin 2πt)) dt by the trapezoid rule
/// on the periodic integrand, doubling the node count until it settles.
pub fn bessel_j_int_integral_check(k: i64, x: f64) -> Result<f64> {
    if k.unsigned_abs() > 10_000 {
        return Err(Error::Domain { what: "Bessel integral-check order", value: k as f64 });
    }
    if !x.is_finite() {
        return Err(Error::Domain { what: "Bessel integral-check argument", value: x });
    }
    let kf = k as f64;
    let f = |t: f64| (2.0 * PI * (kf * t - x * (2.0 * PI * t).sin())).cos();
    let trap = |n: usize| {
        let h = 1.0 / n as f64;
        let mut s = CompensatedSum::new();
        for j in 0..n {
            s.add(f(-0.5 + h * j as f64));
        }
        s.value() * h
    };
    let mut n = 16usize;
    let mut prev = trap(n);
    while n < 1 << 24 {
        n *= 2;
        let cur = trap(n);
        if (cur - prev).abs() <= 1e-14 * (1.0 + cur.abs()) && n as f64 > kf.abs() + 2.0 * PI * x.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNonConvergence { estimate: prev, error: f64::NAN })
}
