use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::sum::ComplexSum;
use crate::ComplexValue;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const MAX_SHIFT: f64 = 1e7;

/// Principal branch of log Γ(z), the continuation from the positive reals
/// with its cut along the negative real axis.
pub fn log_gamma_complex(z: ComplexValue) -> Result<ComplexValue> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain { what: "log_gamma argument", value: z.re });
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor() {
        return Err(Error::PoleOfGamma { z: z.re });
    }
    if z.re >= 0.5 {
        return Ok(lanczos(z));
    }
    let shift = (0.5 - z.re).ceil();
    if shift > MAX_SHIFT {
        return Err(Error::Domain { what: "log_gamma argument", value: z.re });
    }
    // lnΓ(z) = lnΓ(z+n) − Σ_{k<n} ln(z+k)
    let n = shift as u64;
    let mut logs = ComplexSum::new();
    for k in 0..n {
        logs.add((z + k as f64).ln());
    }
    Ok(lanczos(z + shift) - logs.value())
}

fn lanczos(z: ComplexValue) -> ComplexValue {
    let z = z - 1.0;
    let mut x = ComplexValue::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (z + 0.5) * t.ln() - t + HALF_LN_2PI + x.ln()
}

/// ln|Γ(1+iy)|² = ln(πy / sinh πy), used by tests and the Bessel prefactor.
#[allow(dead_code)]
pub(crate) fn ln_abs_gamma_one_plus_iy_sq(y: f64) -> f64 {
    let a = y.abs();
    if a < 1e-8 {
        return -PI * PI * a * a / 6.0;
    }
    // sinh(πa) = e^{πa}(1 − e^{−2πa})/2
    (PI * a).ln() - PI * a - (-(-2.0 * PI * a).exp()).ln_1p() + core::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> ComplexValue {
        ComplexValue::new(re, im)
    }

    fn close(a: ComplexValue, b: ComplexValue, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn one_and_two_are_zero() {
        assert!(log_gamma_complex(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!(log_gamma_complex(c(2.0, 0.0)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn half_is_log_sqrt_pi() {
        let v = log_gamma_complex(c(0.5, 0.0)).unwrap();
        assert!((v.re - 0.572_364_942_924_700_1).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn modulus_on_the_line_one_plus_iy() {
        let v = log_gamma_complex(c(1.0, 1.0)).unwrap();
        let lhs = (2.0 * v.re).exp();
        let rhs = PI / PI.sinh();
        assert!((lhs - rhs).abs() < 1e-14);
        for y in [0.3, 5.0, 40.0, 300.0] {
            let v = log_gamma_complex(c(1.0, y)).unwrap();
            assert!((2.0 * v.re - ln_abs_gamma_one_plus_iy_sq(y)).abs() < 1e-11 * (1.0 + PI * y));
        }
    }

    #[test]
    fn high_precision_reference_points() {
        // reference values from a 40-digit evaluation
        let cases = [
            (c(3.2, -7.5), c(-5.367_387_756_894_639, -11.381_831_723_803_05)),
            (c(-2.3, 0.4), c(-0.405_208_695_219_923_3, -8.456_233_662_870_944)),
            (c(0.1, 250.0), c(-393.988_727_436_664_2, 1_129.736_757_601_375_7)),
            (c(-40.5, 3.0), c(-119.651_624_986_484_3, -117.661_835_950_983_2)),
        ];
        for (z, want) in cases {
            let got = log_gamma_complex(z).unwrap();
            assert!((got - want).norm() < 1e-11 * want.norm().max(1.0), "{z} {got} {want}");
        }
    }

    #[test]
    fn poles_are_rejected() {
        for z in [0.0, -1.0, -17.0] {
            assert_eq!(log_gamma_complex(c(z, 0.0)), Err(Error::PoleOfGamma { z }));
        }
        assert!(log_gamma_complex(c(-1.0, 1e-9)).is_ok());
    }

    #[test]
    fn negative_reals_use_principal_logs() {
        // Γ(−2.5) = −8√π/15 ; branch: three logs of negatives each carry iπ
        let v = log_gamma_complex(c(-2.5, 0.0)).unwrap();
        let g = 8.0 * PI.sqrt() / 15.0;
        assert!((v.re - g.ln()).abs() < 1e-13);
        assert!((v.im + 3.0 * PI).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn reflection_identity(re in -6.0f64..6.0, im in 0.05f64..4.0) {
            let z = c(re, im);
            let lhs = (log_gamma_complex(z).unwrap() + log_gamma_complex(c(1.0, 0.0) - z).unwrap()).exp();
            let rhs = PI / (z * PI).sin();
            prop_assert!(close(lhs, rhs, 1e-11));
        }

        #[test]
        fn duplication_identity(re in -5.0f64..8.0, im in 0.05f64..30.0) {
            let z = c(re, im);
            let lhs = log_gamma_complex(z).unwrap() + log_gamma_complex(z + 0.5).unwrap();
            let rhs = (c(1.0, 0.0) - z * 2.0) * core::f64::consts::LN_2
                + 0.5 * PI.ln()
                + log_gamma_complex(z * 2.0).unwrap();
            let d = lhs - rhs;
            // equal modulo 2πi
            let k = (d.im / (2.0 * PI)).round();
            prop_assert!(d.re.abs() < 1e-10 * (1.0 + rhs.norm()));
            prop_assert!((d.im - 2.0 * PI * k).abs() < 1e-10 * (1.0 + rhs.norm()));
        }

        #[test]
        fn recurrence(re in -10.0f64..20.0, im in -50.0f64..50.0) {
            prop_assume!(im.abs() > 1e-3);
            let z = c(re, im);
            let lhs = log_gamma_complex(z + 1.0).unwrap();
            let rhs = log_gamma_complex(z).unwrap() + z.ln();
            prop_assert!(close(lhs, rhs, 1e-12));
        }
    }
}
