//! Taylor stepping for Bessel's equation x²y'' + xy' + (x² − ν²)y = 0.
//!
//! Only ν² enters, so the same stepper serves J_0 (ν² = 0) and the
//! imaginary orders ν = 2ir (ν² = −4r²). The equation is linear, so any
//! constant rescaling of the solution (such as 1/cosh πr) is carried along.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::ComplexValue;

const MAX_TERMS: usize = 400;
const MAX_STEPS: usize = 10_000_000;

/// Advances (y, y') from x0 to x1 > x0 > 0.
pub(crate) fn bessel_ode_advance(
    nu_sq: f64,
    x0: f64,
    mut y: ComplexValue,
    mut dy: ComplexValue,
    x1: f64,
) -> Result<(ComplexValue, ComplexValue)> {
    debug_assert!(x0 > 0.0 && x1 >= x0);
    let mut a = x0;
    let mut steps = 0usize;
    let mut c = [ComplexValue::new(0.0, 0.0); MAX_TERMS + 2];
    while a < x1 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::SeriesNonConvergence { what: "Bessel ODE stepping", terms: steps });
        }
        let omega = (1.0 + nu_sq.abs() / (a * a)).sqrt();
        let mut h = (a / 4.0).min(2.5 / omega);
        if a + h > x1 || x1 - (a + h) < 1e-3 * h {
            h = x1 - a;
        }
        c[0] = y;
        c[1] = dy;
        let scale = y.norm().max(dy.norm()).max(1e-300);
        let a2 = a * a;
        let mut yn = c[0] + c[1] * h;
        let mut dyn_ = c[1];
        let mut hp = 1.0; // h^k
        let mut small = 0;
        let mut k = 0usize;
        loop {
            // coefficient c_{k+2}
            let kf = k as f64;
            let mut num = c[k + 1] * (a * (kf + 1.0) * (2.0 * kf + 1.0))
                + c[k] * (kf * kf + a2 - nu_sq);
            if k >= 1 {
                num += c[k - 1] * (2.0 * a);
            }
            if k >= 2 {
                num += c[k - 2];
            }
            let ck2 = -num / (a2 * (kf + 1.0) * (kf + 2.0));
            c[k + 2] = ck2;
            // y += c_{k+2} h^{k+2}, y' += (k+2) c_{k+2} h^{k+1}
            let hk1 = hp * h;
            let hk2 = hk1 * h;
            let ty = ck2 * hk2;
            let td = ck2 * ((kf + 2.0) * hk1);
            yn += ty;
            dyn_ += td;
            hp = hk1;
            if ty.norm() < 1e-18 * scale && td.norm() < 1e-18 * scale * omega {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
            k += 1;
            if k + 2 >= MAX_TERMS {
                return Err(Error::SeriesNonConvergence { what: "Bessel ODE Taylor step", terms: k });
            }
        }
        y = yn;
        dy = dyn_;
        if !(y.re.is_finite() && y.im.is_finite()) {
            return Err(Error::Overflow { what: "Bessel ODE stepping" });
        }
        a += h;
    }
    Ok((y, dy))
}
