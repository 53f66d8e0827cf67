use core::f64::consts::{FRAC_PI_4, PI};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::ComplexValue;

/// Constant in the empirical relative error model C/r of the leading term.
pub const DUNSTER_ERROR_CONSTANT: f64 = 0.05;

/// ξ(z) = √(1+z²) + ln(z/(1+√(1+z²))) = √(1+z²) − asinh(1/z).
pub fn dunster_xi(z: f64) -> Result<f64> {
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Domain { what: "Dunster xi argument (expected z > 0)", value: z });
    }
    Ok((1.0 + z * z).sqrt() - (1.0 / z).asinh())
}

/// d/dr [r ξ(x/2r)] = −ln(2r/x + √(1 + 4r²/x²)) = −asinh(2r/x).
pub fn dunster_phase_derivative(r: f64, x: f64) -> Result<f64> {
    if !(x > 0.0 && r > 0.0) {
        return Err(Error::Domain { what: "Dunster phase (expected r, x > 0)", value: r.min(x) });
    }
    Ok(-(2.0 * r / x).asinh())
}

/// e^{−iπ/4}/√(2π), the constant multiplying the leading term.
pub fn dunster_constant() -> ComplexValue {
    ComplexValue::from_polar(1.0 / (2.0 * PI).sqrt(), -FRAC_PI_4)
}

/// Leading Dunster approximation of J_{2ir}(x)/cosh(πr).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DunsterApprox {
    pub value: ComplexValue,
    /// Estimated relative error of `value`.
    pub rel_error: f64,
}

/// 2c·e^{2irξ(x/2r)}/(4r²+x²)^{1/4} with c = e^{−iπ/4}/√(2π).
pub fn dunster_leading_term(r: f64, x: f64) -> Result<DunsterApprox> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain { what: "Dunster order (expected r > 0)", value: r });
    }
    let xi = dunster_xi(x / (2.0 * r))?;
    let amp = (4.0 * r * r + x * x).powf(-0.25);
    let value = dunster_constant() * ComplexValue::from_polar(2.0 * amp, 2.0 * r * xi);
    let rel_error = (DUNSTER_ERROR_CONSTANT / r + 2.0 * (-2.0 * PI * r).exp()).min(1.0);
    Ok(DunsterApprox { value, rel_error })
}

/// Debye polynomial u₁(p) = (3p − 5p³)/24.
pub fn debye_u1(p: f64) -> f64 {
    (3.0 * p - 5.0 * p * p * p) / 24.0
}

/// Debye polynomial u₂(p) = (81p² − 462p⁴ + 385p⁶)/1152.
pub fn debye_u2(p: f64) -> f64 {
    let q = p * p;
    q * (81.0 - 462.0 * q + 385.0 * q * q) / 1152.0
}

/// Debye polynomial u₃(p).
pub fn debye_u3(p: f64) -> f64 {
    let q = p * p;
    p * q * (30375.0 - 369603.0 * q + 765765.0 * q * q - 425425.0 * q * q * q) / 414720.0
}

/// The next two terms of the expansion in powers of 1/ν, ν = 2ir:
/// leading·u₁(p)/ν and leading·u₂(p)/ν² with p = (1 + x²/4r²)^{−1/2}, and a
/// bound |u₃(p)|/(8r³) + 2e^{−2πr} on the relative size of the rest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DunsterCorrections {
    pub first: ComplexValue,
    pub second: ComplexValue,
    pub rest: f64,
}

pub fn dunster_corrections(r: f64, x: f64) -> Result<DunsterCorrections> {
    let lead = dunster_leading_term(r, x)?;
    let z = x / (2.0 * r);
    let p = 1.0 / (1.0 + z * z).sqrt();
    let nu = ComplexValue::new(0.0, 2.0 * r);
    let first = lead.value * debye_u1(p) / nu;
    let second = lead.value * debye_u2(p) / (nu * nu);
    let rest = (debye_u3(p).abs() / (8.0 * r * r * r) + 2.0 * (-2.0 * PI * r).exp()).min(1.0);
    Ok(DunsterCorrections { first, second, rest })
}
