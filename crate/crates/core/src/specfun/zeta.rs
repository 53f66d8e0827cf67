use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::sum::ComplexSum;
use crate::ComplexValue;

const BERNOULLI_TERMS: usize = 30;

/// B_{2k}/(2k)! for k = 1..=30, from (−1)^{k+1}·2ζ(2k)/(2π)^{2k}.
fn bernoulli_ratios() -> [f64; BERNOULLI_TERMS] {
    let mut out = [0.0; BERNOULLI_TERMS];
    for (i, o) in out.iter_mut().enumerate() {
        let k = i + 1;
        let z = match k {
            1 => PI * PI / 6.0,
            2 => PI.powi(4) / 90.0,
            3 => PI.powi(6) / 945.0,
            _ => {
                let mut s = 0.0;
                for n in (1..=200).rev() {
                    s += (n as f64).powi(-2 * k as i32);
                }
                s
            }
        };
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        *o = sign * 2.0 * z / (2.0 * PI).powi(2 * k as i32);
    }
    out
}

/// ζ(s) for Re s ≥ 1, s ≠ 1, by Euler–Maclaurin summation.
pub fn zeta_right_of_one(s: ComplexValue) -> Result<ComplexValue> {
    if !(s.re.is_finite() && s.im.is_finite()) || s.re < 1.0 {
        return Err(Error::Domain { what: "zeta argument (expected Re s >= 1)", value: s.re });
    }
    if s.re == 1.0 && s.im == 0.0 {
        return Err(Error::PoleOfZeta);
    }
    let n = (15.0 + s.norm() / PI).ceil() as u64;
    let nf = n as f64;
    let mut sum = ComplexSum::new();
    for k in (1..n).rev() {
        sum.add((-s * (k as f64).ln()).exp());
    }
    let ln_n = nf.ln();
    let n_pow = (-s * ln_n).exp(); // N^{−s}
    sum.add(n_pow * nf / (s - 1.0));
    sum.add(n_pow * 0.5);
    let b = bernoulli_ratios();
    // T_k · s(s+1)…(s+2k−2) · N^{−s−2k+1}
    let mut poch = s;
    let mut pw = n_pow / nf;
    for (i, t) in b.iter().enumerate() {
        let k = i + 1;
        if k > 1 {
            let a = (2 * k - 3) as f64;
            poch = poch * (s + a) * (s + a + 1.0);
            pw /= nf * nf;
        }
        let term = poch * pw * *t;
        sum.add(term);
        if term.norm() < 1e-17 * sum.value().norm() {
            break;
        }
    }
    Ok(sum.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    /// Borwein's accelerated alternating series for η(s), ζ = η/(1 − 2^{1−s}).
    fn zeta_eta_oracle(s: ComplexValue) -> ComplexValue {
        let n = 300usize;
        // d_k = n Σ_{i≤k} (n+i−1)! 4^i / ((n−i)!(2i)!)
        let mut d = Vec::with_capacity(n + 1);
        let mut acc = 0.0f64;
        let mut term = 1.0 / n as f64; // i = 0 term divided by n
        for i in 0..=n {
            if i > 0 {
                let fi = i as f64;
                term *= (n as f64 + fi - 1.0) * (n as f64 - fi + 1.0) * 4.0 / ((2.0 * fi - 1.0) * 2.0 * fi);
            }
            acc += term;
            d.push(acc * n as f64);
        }
        let mut s_sum = ComplexValue::new(0.0, 0.0);
        for k in 0..n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let kk = (k + 1) as f64;
            s_sum += (-s * kk.ln()).exp() * (sign * (d[k] - d[n]));
        }
        let eta = -s_sum / d[n];
        eta / (ComplexValue::new(1.0, 0.0) - (ComplexValue::new(1.0, 0.0) - s).exp2())
    }

    #[test]
    fn zeta_two() {
        let v = zeta_right_of_one(ComplexValue::new(2.0, 0.0)).unwrap();
        assert!((v.re - PI * PI / 6.0).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn reference_points() {
        let cases = [
            (1.0, 2.0, 0.598_165_569_762_381_7, -0.351_854_745_217_845_3),
            (1.0, 1000.0, 0.940_936_868_292_753_3, 0.045_226_652_072_095_1),
            (1.5, -37.2, 0.932_370_371_711_088_7, 0.296_980_424_530_921_1),
        ];
        for (a, b, re, im) in cases {
            let v = zeta_right_of_one(ComplexValue::new(a, b)).unwrap();
            let w = ComplexValue::new(re, im);
            assert!((v - w).norm() < 1e-12 * w.norm(), "{v} {w}");
        }
    }

    #[test]
    fn agrees_with_eta_oracle_on_the_one_line() {
        let oracle = zeta_eta_oracle(ComplexValue::new(1.0, 2.0));
        let v = zeta_right_of_one(ComplexValue::new(1.0, 2.0)).unwrap();
        assert!((v - oracle).norm() < 1e-12);
        for j in 0..50 {
            let t = 0.1 + (100.0 - 0.1) * j as f64 / 49.0;
            let s = ComplexValue::new(1.0, t);
            let a = zeta_right_of_one(s).unwrap();
            let b = zeta_eta_oracle(s);
            assert!((a - b).norm() < 1e-9 * b.norm(), "t={t}: {a} {b}");
        }
    }

    #[test]
    fn pole_and_domain() {
        assert_eq!(zeta_right_of_one(ComplexValue::new(1.0, 0.0)), Err(Error::PoleOfZeta));
        assert!(zeta_right_of_one(ComplexValue::new(0.5, 3.0)).is_err());
    }

    #[test]
    fn lower_bound_on_the_one_line() {
        // |ζ(1+2ir)| log(2+|r|) stays bounded away from 0
        let mut worst = f64::INFINITY;
        for j in 1..=400 {
            let r = j as f64 * 0.5;
            let z = zeta_right_of_one(ComplexValue::new(1.0, 2.0 * r)).unwrap().norm();
            worst = worst.min(z * (2.0 + r).ln());
        }
        assert!(worst > 0.2, "{worst}");
    }
}
