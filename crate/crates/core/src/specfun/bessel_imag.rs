use core::f64::consts::{LN_2, PI};
use num_traits::Float;

use super::gamma::log_gamma_complex;
use super::ode::bessel_ode_advance;
use crate::error::{Error, Result};
use crate::sum::ComplexSum;
use crate::ComplexValue;

/// Largest |r| accepted by [`scaled_bessel_j_imag`].
pub const SCALED_BESSEL_MAX_ORDER: f64 = 1e4;
/// Largest x accepted by [`scaled_bessel_j_imag`].
pub const SCALED_BESSEL_MAX_X: f64 = 1e5;

const MAX_TERMS: usize = 100_000;
const QUIET_RUN: usize = 40;
const CANCELLATION_LIMIT: f64 = 1e4;

/// J_{2ir}(x)/cosh(πr).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledBesselValue {
    pub value: ComplexValue,
    pub r: f64,
    pub x: f64,
}

/// J_{2ir}(x)/cosh(πr) for x > 0.
///
/// The power series is summed with the Γ and cosh factors folded into one
/// log-scaled prefactor. Where the series cancels badly (x large compared
/// to √r) it is evaluated at a smaller x0 and carried to x by Taylor
/// stepping of Bessel's equation.
pub fn scaled_bessel_j_imag(r: f64, x: f64) -> Result<ScaledBesselValue> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain { what: "scaled Bessel argument (expected x > 0)", value: x });
    }
    if !(r.is_finite() && r.abs() <= SCALED_BESSEL_MAX_ORDER) {
        return Err(Error::Domain { what: "scaled Bessel order r", value: r });
    }
    if x > SCALED_BESSEL_MAX_X {
        return Err(Error::Domain { what: "scaled Bessel argument", value: x });
    }
    let a = r.abs();
    let v = scaled_nonneg(a, x)?;
    let value = if r < 0.0 { v.conj() } else { v };
    Ok(ScaledBesselValue { value, r, x })
}

fn scaled_nonneg(r: f64, x: f64) -> Result<ComplexValue> {
    // beyond x0 the largest series term exceeds the sum by about e^{x²/8r}
    let mut x0 = (6.0f64).max((8.0 * r * CANCELLATION_LIMIT.ln()).sqrt());
    if x <= x0 {
        let s = series(r, x)?;
        if s.cancellation <= CANCELLATION_LIMIT {
            return Ok(s.value);
        }
        x0 = x;
    }
    loop {
        let s0 = series(r, x0)?;
        if s0.cancellation <= CANCELLATION_LIMIT || x0 < 0.5 {
            let (y, _) = bessel_ode_advance(-4.0 * r * r, x0, s0.value, s0.derivative, x)?;
            return Ok(y);
        }
        x0 *= 0.5;
    }
}

struct Series {
    value: ComplexValue,
    derivative: ComplexValue,
    cancellation: f64,
}

/// ln cosh(πr) without overflow.
fn ln_cosh_pi(r: f64) -> f64 {
    let a = PI * r.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

fn series(r: f64, x: f64) -> Result<Series> {
    let nu = ComplexValue::new(0.0, 2.0 * r);
    let h = 0.5 * x;
    let ln_pre = nu * h.ln() - log_gamma_complex(nu + 1.0)? - ln_cosh_pi(r);
    let pre = ln_pre.exp();
    let q = -h * h;
    let mut term = ComplexValue::new(1.0, 0.0);
    let mut sum = ComplexSum::new();
    let mut dsum = ComplexSum::new();
    let mut running_max = 1.0f64;
    let mut quiet = 0usize;
    let mut n = 0usize;
    loop {
        sum.add(term);
        dsum.add(term * ((nu + 2.0 * n as f64) / x));
        let t = term.norm();
        running_max = running_max.max(t);
        if t < 1e-18 * running_max {
            quiet += 1;
            if quiet >= QUIET_RUN {
                break;
            }
        } else {
            quiet = 0;
        }
        n += 1;
        if n >= MAX_TERMS {
            return Err(Error::SeriesNonConvergence { what: "scaled imaginary-order Bessel J", terms: n });
        }
        term *= q / (n as f64 * (nu + n as f64));
    }
    let s = sum.value();
    let value = pre * s;
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Overflow { what: "scaled imaginary-order Bessel J" });
    }
    Ok(Series {
        value,
        derivative: pre * dsum.value(),
        cancellation: running_max / s.norm().max(1e-300),
    })
}
