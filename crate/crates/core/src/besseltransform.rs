//! The transform D_J(X) = ∫ J_{2ir}(X)·r·h_T(r)/cosh(πr) dr by quadrature,
//! residue sums and the Dunster asymptotic, together with the Poisson sums
//! S_J, A_g, B_g and the bound scans built on them.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt::{self, Write as _};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quad::{integrate_adaptive, kronrod21_nodes, AdaptiveOptions};
use crate::specfun::{
    bessel_j_envelope, bessel_j_int_range, dunster_corrections, dunster_leading_term, scaled_bessel_j_imag,
};
use crate::sum::{CompensatedSum, ComplexSum};
use crate::weights::{SpectralWeight, WeightFamily};
use crate::ComplexValue;

/// Largest T accepted by [`sj_alpha_expansion`].
pub const ALPHA_EXPANSION_MAX_T: u32 = 101;
/// Half-integer residues cached at construction.
const HALFINT_CACHE: usize = 2048;
/// Integer residues h(k) cached at construction.
const INT_CACHE: usize = 64;
/// Relative accuracy of J_{2ir}(X)/cosh(πr) on the ODE path, used as the
/// rounding floor of the transform quadrature.
const SCALED_J_REL_ACCURACY: f64 = 1e-13;
/// Absolute tolerance of the integrals in the asymptotic route.
const ASYMPTOTIC_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DJMethod {
    Quadrature,
    Residue,
    Asymptotic,
}

impl DJMethod {
    pub fn name(self) -> &'static str {
        match self {
            DJMethod::Quadrature => "quadrature",
            DJMethod::Residue => "residue",
            DJMethod::Asymptotic => "asymptotic",
        }
    }
}

impl fmt::Display for DJMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for DJMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(DJMethod::Quadrature),
            "residue" => Ok(DJMethod::Residue),
            "asymptotic" => Ok(DJMethod::Asymptotic),
            _ => Err(Error::InvalidParameter { name: "method", reason: "expected quadrature, residue or asymptotic" }),
        }
    }
}

/// A value of D_J(X). The transform is purely imaginary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DJResult {
    pub value: ComplexValue,
    pub method: DJMethod,
    pub x: f64,
    pub t: u32,
    pub error_estimate: f64,
}

/// The constants of the residue expansion
///
/// D_J(X) = c₁·Σ_k (−1)^k (2k+1) J_{2k+1}(X) h_T((k+½)i) + c₂·T²·Σ_{k≥1} k² h(k) J_{2kT}(X).
///
/// The first family comes from the poles of 1/cosh(πr) at r = −(k+½)i, the
/// second from the poles of h_T at r = −ikT. At the latter cosh(πr) = (−1)^k
/// cancels the sign of the sinh residue since T is odd, so no alternating
/// sign survives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidueConstants {
    pub c1: ComplexValue,
    pub c2: ComplexValue,
}

impl ResidueConstants {
    /// Closing the contour in the lower half plane: −2πi times the residues.
    pub fn derived() -> Self {
        Self {
            c1: ComplexValue::new(0.0, -1.0),
            c2: ComplexValue::new(0.0, 2.0),
        }
    }
}

/// The two residue families at one X, without constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidueFamilies {
    /// Σ_k (−1)^k (2k+1) J_{2k+1}(X) h_T((k+½)i).
    pub first: f64,
    /// T²·Σ_{k≥1} k² h(k) J_{2kT}(X).
    pub second: f64,
    pub error: f64,
}

/// Evaluator for the Bessel transform at fixed weight h_T.
#[derive(Clone, Debug)]
pub struct BesselTransform {
    weight: SpectralWeight,
    constants: ResidueConstants,
    /// (−1)^k (2k+1) h_T((k+½)i).
    halfint: Vec<f64>,
    /// k² h(k), index k.
    int: Vec<f64>,
    /// Truncation point and tail bound at [`ASYMPTOTIC_TOL`].
    asym_truncation: (f64, f64),
    grid: Option<AsymptoticGrid>,
}

/// Kronrod nodes on [0, R] fine enough for every X ≥ T/8, with
/// 2r·h_T(r) folded into the weights.
#[derive(Clone, Debug)]
struct AsymptoticGrid {
    r: Vec<f64>,
    wk: Vec<f64>,
    wg: Vec<f64>,
}

struct AsymptoticParts {
    leading: f64,
    first: f64,
    second: f64,
    quad_error: f64,
    rest: f64,
}

impl BesselTransform {
    pub fn new(weight: SpectralWeight) -> Result<Self> {
        let fam = weight.family();
        let mut halfint = Vec::with_capacity(HALFINT_CACHE);
        for k in 0..HALFINT_CACHE as u64 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            halfint.push(sign * (2 * k + 1) as f64 * weight.h_t_halfint_imag(k));
        }
        let mut int = Vec::with_capacity(INT_CACHE);
        int.push(0.0);
        for k in 1..INT_CACHE {
            let kf = k as f64;
            int.push(kf * kf * fam.h_real(kf)?);
        }
        let mut out = Self {
            weight,
            constants: ResidueConstants::derived(),
            halfint,
            int,
            asym_truncation: (0.0, 0.0),
            grid: None,
        };
        out.asym_truncation = out.truncation(ASYMPTOTIC_TOL)?;
        Ok(out)
    }

    /// Precomputes the node grid used by [`Self::dj_asymptotic_corrected`]
    /// so that repeated calls do not re-evaluate h_T.
    pub fn with_asymptotic_grid(mut self) -> Self {
        let tf = self.t() as f64;
        let (r_max, _) = self.asym_truncation;
        let (mut r, mut wk, mut wg) = (Vec::new(), Vec::new(), Vec::new());
        let mut a = 0.0;
        while a < r_max {
            let rate = 2.0 * (16.0 * a / tf).asinh() + 1.0;
            let b = (a + (8.0 / rate).min(tf / 8.0)).min(r_max);
            for (x, k, g) in kronrod21_nodes(a, b) {
                let h = 2.0 * x * self.weight.h_t(x);
                r.push(x);
                wk.push(k * h);
                wg.push(g * h);
            }
            a = b;
        }
        self.grid = Some(AsymptoticGrid { r, wk, wg });
        self
    }

    pub fn weight(&self) -> &SpectralWeight {
        &self.weight
    }

    pub fn t(&self) -> u32 {
        self.weight.t()
    }

    pub fn constants(&self) -> ResidueConstants {
        self.constants
    }

    pub fn with_constants(mut self, constants: ResidueConstants) -> Self {
        self.constants = constants;
        self
    }

    fn halfint_term(&self, k: usize) -> f64 {
        match self.halfint.get(k) {
            Some(&v) => v,
            None => {
                let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * (2 * k + 1) as f64 * self.weight.h_t_halfint_imag(k as u64)
            }
        }
    }

    fn int_term(&self, k: usize) -> f64 {
        match self.int.get(k) {
            Some(&v) => v,
            None => {
                let kf = k as f64;
                kf * kf * self.weight.family().h_real(kf).unwrap_or(0.0)
            }
        }
    }

    /// Both residue families at X ≥ 0.
    pub fn residue_families(&self, x: f64, tol: f64) -> Result<ResidueFamilies> {
        check_x(x)?;
        if x == 0.0 {
            return Ok(ResidueFamilies { first: 0.0, second: 0.0, error: 0.0 });
        }
        let t = self.t() as usize;
        let tf = t as f64;
        let k1 = x.ceil() as usize + 40;
        let k2 = 5usize.max(((x + 60.0) / (2.0 * tf)).ceil() as usize);
        let n_top = (2 * k1 + 1 + 400).max(2 * k2 * t);
        let j = bessel_j_int_range(x, n_top)?;

        let mut first = CompensatedSum::new();
        let mut mag = 0.0;
        let mut error = 0.0;
        let mut k = 0usize;
        loop {
            let n = 2 * k + 1;
            if n > n_top {
                return Err(Error::SeriesNonConvergence { what: "half-integer residue family", terms: k });
            }
            let w = self.halfint_term(k);
            let term = w * j[n];
            first.add(term);
            mag += term.abs();
            if k >= k1 {
                // remaining terms bounded by the J envelope, which decays
                // faster than geometrically once n > X
                let env = bessel_j_envelope(n as u64 + 2, x) * self.halfint_term(k + 1).abs();
                if env < 1e-3 * tol {
                    error += 2.0 * env;
                    break;
                }
            }
            k += 1;
        }

        let mut second = CompensatedSum::new();
        for k in 1..=k2 {
            let term = self.int_term(k) * j[2 * k * t];
            second.add(term);
            mag += (term * tf * tf).abs();
        }
        // tail of the second family by |J_n(nz)| ≤ (z e^{√(1−z²)}/(1+√(1−z²)))^n
        let mut k = k2 + 1;
        loop {
            let n = (2 * k * t) as f64;
            let z = x / n;
            let b = if z < 1.0 {
                let s = (1.0 - z * z).sqrt();
                (n * ((z).ln() + s - (1.0 + s).ln())).exp()
            } else {
                1.0
            };
            let term = tf * tf * self.int_term(k).abs() * b;
            error += term;
            if term < 1e-3 * tol * (1.0 + error) || k > k2 + 200 {
                break;
            }
            k += 1;
        }
        error += 64.0 * f64::EPSILON * mag;
        Ok(ResidueFamilies {
            first: first.value(),
            second: tf * tf * second.value(),
            error,
        })
    }

    /// D_J(X) from the residue expansion.
    pub fn dj_residue_sum(&self, x: f64, tol: f64) -> Result<DJResult> {
        let f = self.residue_families(x, tol)?;
        let c = self.constants;
        let value = c.c1 * f.first + c.c2 * f.second;
        Ok(DJResult {
            value,
            method: DJMethod::Residue,
            x,
            t: self.t(),
            error_estimate: f.error * (c.c1.norm() + c.c2.norm()),
        })
    }

    /// D_J(X) = 2i∫₀^∞ r h_T(r) Im[J_{2ir}(X)/cosh(πr)] dr by adaptive quadrature.
    pub fn dj_quadrature(&self, x: f64, tol: f64) -> Result<DJResult> {
        check_x(x)?;
        check_tol(tol)?;
        if x == 0.0 {
            return Ok(zero(DJMethod::Quadrature, x, self.t()));
        }
        let (r_max, tail) = self.truncation(tol)?;
        let (value, error) = transform_quadrature(|r| self.weight.h_t(r), x, r_max, self.t() as f64 / 8.0, tol)?;
        Ok(DJResult {
            value: ComplexValue::new(0.0, value),
            method: DJMethod::Quadrature,
            x,
            t: self.t(),
            error_estimate: error + tail,
        })
    }

    /// A bound B(X) ≥ |D_J(X)| from the residue series with every J_n(X)
    /// replaced by (X/2)^n/n!. B is nondecreasing and so is B(X)/X.
    pub fn majorant(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let t = self.t() as u64;
        let tf = t as f64;
        let mut b = 0.0;
        let mut k = 0usize;
        loop {
            let term = self.halfint_term(k).abs() * bessel_j_envelope(2 * k as u64 + 1, x);
            b += term;
            if (2 * k + 1) as f64 > x + 10.0 && term < 1e-18 * b.max(1e-300) || k > 100_000 {
                break;
            }
            k += 1;
        }
        let mut k = 1usize;
        loop {
            let term = 2.0 * tf * tf * self.int_term(k).abs() * bessel_j_envelope(2 * k as u64 * t, x);
            b += term;
            if (2 * k as u64 * t) as f64 > x + 10.0 && term < 1e-18 * b.max(1e-300) || k > 10_000 {
                break;
            }
            k += 1;
        }
        b
    }

    /// Truncation point R and the bound 2∫_R^∞ r h_T(r) dr on the discarded
    /// tail, using |J_{2ir}(X)/cosh(πr)| ≤ 1.
    pub fn truncation(&self, tol: f64) -> Result<(f64, f64)> {
        let tf = self.t() as f64;
        let mut r = (4.0 * tf / PI) * (1.0 / tol).ln() + 50.0;
        let opts = AdaptiveOptions::new(1e-3 * tol, 1e-6);
        loop {
            let mut breaks = Vec::new();
            for i in 0..=40 {
                breaks.push(r + i as f64 * 2.0 * tf);
            }
            let last = *breaks.last().expect("nonempty");
            let body = integrate_adaptive(|s| 2.0 * s * self.weight.h_t(s), &breaks, opts)?;
            // beyond `last` the envelope decays at least like e^{−πr/4T}
            let env = 2.0 * last * self.weight.h_t_envelope(last) * 8.0 * tf / PI;
            let tail = body.value + body.error + env;
            if tail <= 0.1 * tol {
                return Ok((r, tail));
            }
            r += 10.0 * tf;
            if r > 1e4 {
                return Err(Error::Regime { what: "spectral weight tail too heavy for the Bessel transform quadrature" });
            }
        }
    }

    /// D_J(X) from the leading Dunster term, X ≥ T/8. The error estimate is
    /// the size of the next two terms of the expansion, integrated with
    /// their phase, plus an absolute bound on the rest.
    pub fn dj_asymptotic(&self, x: f64) -> Result<DJResult> {
        let p = self.asymptotic_parts(x)?;
        Ok(DJResult {
            value: ComplexValue::new(0.0, p.leading),
            method: DJMethod::Asymptotic,
            x,
            t: self.t(),
            error_estimate: p.quad_error + p.first.abs() + p.second.abs() + p.rest,
        })
    }

    /// D_J(X) from the Dunster expansion carried to three terms, X ≥ T/8.
    pub fn dj_asymptotic_corrected(&self, x: f64) -> Result<DJResult> {
        let p = self.asymptotic_parts(x)?;
        Ok(DJResult {
            value: ComplexValue::new(0.0, p.leading + p.first + p.second),
            method: DJMethod::Asymptotic,
            x,
            t: self.t(),
            error_estimate: p.quad_error + p.rest,
        })
    }

    /// The residue sum, replaced by the corrected asymptotic expansion when
    /// cancellation in the residue sum leaves an error above `tol` and the
    /// expansion does better.
    pub fn dj_auto(&self, x: f64, tol: f64) -> Result<DJResult> {
        let r = self.dj_residue_sum(x, tol)?;
        if r.error_estimate <= tol || x < self.t() as f64 / 8.0 {
            return Ok(r);
        }
        let a = self.dj_asymptotic_corrected(x)?;
        Ok(if a.error_estimate < r.error_estimate { a } else { r })
    }

    fn asymptotic_parts(&self, x: f64) -> Result<AsymptoticParts> {
        check_x(x)?;
        let tf = self.t() as f64;
        if x < tf / 8.0 {
            return Err(Error::Regime { what: "asymptotic route requires X >= T/8" });
        }
        if let Some(g) = &self.grid {
            let mut sums = [CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new()];
            let mut gauss = [CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new()];
            let mut rest = 0.0;
            for i in 0..g.r.len() {
                let d = dunster_leading_term(g.r[i], x)?;
                let c = dunster_corrections(g.r[i], x)?;
                let v = [d.value.im, c.first.im, c.second.im];
                for j in 0..3 {
                    sums[j].add(g.wk[i] * v[j]);
                    gauss[j].add(g.wg[i] * v[j]);
                }
                rest += g.wk[i].abs() * d.value.norm() * c.rest;
            }
            let s: [f64; 3] = core::array::from_fn(|j| sums[j].value());
            let quad_error: f64 = (0..3).map(|j| (s[j] - gauss[j].value()).abs()).sum::<f64>() + self.asym_truncation.1;
            return Ok(AsymptoticParts {
                leading: s[0],
                first: s[1],
                second: s[2],
                quad_error,
                rest,
            });
        }
        let tol = ASYMPTOTIC_TOL;
        let (r_max, tail) = self.asym_truncation;
        let breaks = oscillation_breaks(x, tf, r_max);
        let opts = AdaptiveOptions::new(tol, 0.0).with_noise(SCALED_J_REL_ACCURACY);
        let mut failure = None;
        let lead = integrate_adaptive(
            |r: f64| {
                if r == 0.0 {
                    return 0.0;
                }
                match dunster_leading_term(r, x) {
                    Ok(d) => 2.0 * r * self.weight.h_t(r) * d.value.im,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            &breaks,
            opts,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let lead = lead?;
        let corr = |which: u8| {
            integrate_adaptive(
                |r: f64| match dunster_corrections(r, x) {
                    Ok(c) if r > 0.0 => {
                        let v = if which == 1 { c.first.im } else { c.second.im };
                        2.0 * r * self.weight.h_t(r) * v
                    }
                    _ => 0.0,
                },
                &breaks,
                opts,
            )
        };
        let c1 = corr(1)?;
        let c2 = corr(2)?;
        let rest = integrate_adaptive(
            |r: f64| match (dunster_leading_term(r, x), dunster_corrections(r, x)) {
                (Ok(d), Ok(c)) if r > 0.0 => 2.0 * r * self.weight.h_t(r) * d.value.norm() * c.rest,
                _ => 0.0,
            },
            &coarse_breaks(tf, r_max),
            AdaptiveOptions::new(tol, 1e-6),
        )?;
        Ok(AsymptoticParts {
            leading: lead.value,
            first: c1.value,
            second: c2.value,
            quad_error: lead.error + c1.error + c2.error + tail,
            rest: rest.value + rest.error,
        })
    }

    /// E_J(X) = ∫₀^∞ h_T(r)/(4r²+X²)^{1/4} dr, the non-oscillatory remainder
    /// integral of the asymptotic route.
    pub fn remainder_integral(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        let tf = self.t() as f64;
        let (r_max, tail) = self.asym_truncation;
        let v = integrate_adaptive(
            |r: f64| self.weight.h_t(r) / (4.0 * r * r + x * x).powf(0.25),
            &coarse_breaks(tf, r_max),
            AdaptiveOptions::new(1e-12, 1e-10),
        )?;
        Ok(v.value + tail)
    }

    /// S_J(X) = T·Σ_{k≥0} (−1)^k J_{2k+1}(X)·x²h(x)/sin(πx), x = (2k+1)/(2T),
    /// summed from h directly rather than from the cached residues.
    pub fn sj_direct(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        if x == 0.0 {
            return Ok(0.0);
        }
        let tf = self.t() as f64;
        let fam = self.weight.family();
        let k_max = x.ceil() as usize + 40;
        let j = bessel_j_int_range(x, 2 * k_max + 1)?;
        let mut sum = CompensatedSum::new();
        for k in 0..=k_max {
            let xx = (2 * k + 1) as f64 / (2.0 * tf);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum.add(sign * j[2 * k + 1] * xx * xx * fam.h_real(xx)? / (PI * xx).sin());
        }
        Ok(tf * sum.value())
    }
}

/// 2∫₀^R r H(r) Im[J_{2ir}(X)/cosh(πr)] dr for an even weight H, the
/// imaginary part of ∫_ℝ J_{2ir}(X) r H(r)/cosh(πr) dr truncated at R.
/// Returns the value and the quadrature error.
pub fn transform_quadrature<H: Fn(f64) -> f64>(h: H, x: f64, r_max: f64, panel_cap: f64, tol: f64) -> Result<(f64, f64)> {
    check_x(x)?;
    if x == 0.0 {
        return Ok((0.0, 0.0));
    }
    let breaks = oscillation_breaks(x, 8.0 * panel_cap, r_max);
    let mut failure = None;
    let f = |r: f64| -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let hv = h(r);
        if hv == 0.0 {
            return 0.0;
        }
        match scaled_bessel_j_imag(r, x) {
            Ok(s) => 2.0 * r * hv * s.value.im,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let opts = AdaptiveOptions::new(0.1 * tol, 0.0).with_noise(SCALED_J_REL_ACCURACY);
    let res = integrate_adaptive(f, &breaks, opts);
    if let Some(e) = failure {
        return Err(e);
    }
    let res = res?;
    Ok((res.value, res.error))
}

fn check_x(x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain { what: "Bessel transform argument X (expected X >= 0)", value: x });
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-12..1.0).contains(&tol) {
        return Err(Error::InvalidParameter { name: "tol", reason: "must lie in [1e-12, 1)" });
    }
    Ok(())
}

fn zero(method: DJMethod, x: f64, t: u32) -> DJResult {
    DJResult {
        value: ComplexValue::new(0.0, 0.0),
        method,
        x,
        t,
        error_estimate: 0.0,
    }
}

/// Breakpoints whose spacing tracks the phase rate 2·asinh(2r/X) of
/// J_{2ir}(X) in r.
fn oscillation_breaks(x: f64, t: f64, r_max: f64) -> Vec<f64> {
    let mut out = alloc::vec![0.0];
    let mut r = 0.0;
    while r < r_max {
        let rate = 2.0 * (2.0 * r / x).asinh() + 1.0;
        r = (r + (4.0 / rate).min(t / 8.0)).min(r_max);
        out.push(r);
    }
    out
}

fn coarse_breaks(t: f64, r_max: f64) -> Vec<f64> {
    let n = (r_max / (t / 4.0)).ceil().max(1.0) as usize;
    (0..=n).map(|i| r_max * i as f64 / n as f64).collect()
}

/// Cross-checks the derived residue constants against quadrature at each
/// calibration point; at least three points are required.
pub fn calibrate_residue_constants(
    family: &alloc::sync::Arc<WeightFamily>,
    points: &[(f64, u32)],
    tol: f64,
) -> Result<ResidueConstants> {
    let c = ResidueConstants::derived();
    check_residue_constants(c, family, points, tol)?;
    Ok(c)
}

/// Requires |quadrature − residue| ≤ tol·(1 + |value|) at every point.
pub fn check_residue_constants(
    constants: ResidueConstants,
    family: &alloc::sync::Arc<WeightFamily>,
    points: &[(f64, u32)],
    tol: f64,
) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter { name: "calibration points", reason: "need at least three" });
    }
    for &(x, t) in points {
        let bt = BesselTransform::new(SpectralWeight::new(family.clone(), t)?)?.with_constants(constants);
        let q = bt.dj_quadrature(x, 1e-12)?;
        let r = bt.dj_residue_sum(x, 1e-14)?;
        let d = (q.value - r.value).norm();
        if d > tol * (1.0 + q.value.norm()) {
            return Err(Error::CalibrationFailure { x, t, discrepancy: d });
        }
    }
    Ok(())
}

/// S_J(X) through the α-expansion
/// T·Σ_{|α|<T/2} Σ_{k≥1, k∉2Tℤ} e(kα/2T) J_k(X)·x²h(x), x = k/(2T).
pub fn sj_alpha_expansion(family: &WeightFamily, x: f64, t: u32) -> Result<f64> {
    check_x(x)?;
    if t < 3 || t.is_multiple_of(2) {
        return Err(Error::InvalidParameter { name: "T", reason: "must be odd and at least 3" });
    }
    if t > ALPHA_EXPANSION_MAX_T {
        return Err(Error::CapacityExceeded { what: "alpha expansion T", requested: t as u64, cap: ALPHA_EXPANSION_MAX_T as u64 });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let tf = t as f64;
    let k_max = 2 * (x.ceil() as usize + 40) + 1;
    let j = bessel_j_int_range(x, k_max + 400)?;
    let half = (t as i64 - 1) / 2;
    let mut weights = Vec::with_capacity(k_max + 1);
    weights.push(0.0);
    for k in 1..=k_max {
        let xx = k as f64 / (2.0 * tf);
        weights.push(xx * xx * family.h_real(xx)? * j[k]);
    }
    let mut total = CompensatedSum::new();
    for alpha in -half..=half {
        let mut inner = CompensatedSum::new();
        for (k, &w) in weights.iter().enumerate().skip(1) {
            if k % (2 * t as usize) == 0 {
                continue;
            }
            let phase = PI * ((k as i64 * alpha).rem_euclid(2 * t as i64)) as f64 / tf;
            inner.add(phase.cos() * w);
        }
        total.add(inner.value());
    }
    // the k-sum is cut where J_k(X) is below the rounding floor of the result
    let tail = tf * tf * bessel_j_envelope(k_max as u64 + 1, x);
    if tail > 1e-13 {
        return Err(Error::SeriesNonConvergence { what: "alpha expansion", terms: k_max });
    }
    Ok(tf * total.value())
}

/// A_g(Y) and B_g(Y) with their moduli.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryPhaseSums {
    pub a: ComplexValue,
    pub b: ComplexValue,
    pub a_abs: f64,
    pub b_abs: f64,
}

/// A_g(Y) = T·Σ_{|α|<T/2} e(Y sin(πα/T))·g̃̃(πY cos(πα/T)/T) and
/// B_g(Y) = (Y/T)·Σ_{|α|<T/2} e(Y sin(πα/T))·sin(πα/T)·g̃̃''(πY cos(πα/T)/T),
/// g̃̃(x) = x²g(x), for 0 < Y ≤ T/(2π).
pub fn stationary_phase_sums(family: &WeightFamily, y: f64, t: u32) -> Result<StationaryPhaseSums> {
    if t < 3 || t.is_multiple_of(2) {
        return Err(Error::InvalidParameter { name: "T", reason: "must be odd and at least 3" });
    }
    let tf = t as f64;
    if !(y > 0.0 && y <= tf / (2.0 * PI) * (1.0 + 1e-12)) {
        return Err(Error::Regime { what: "stationary phase sums require 0 < Y <= T/(2 pi)" });
    }
    let half = (t as i64 - 1) / 2;
    let mut a = ComplexSum::new();
    let mut b = ComplexSum::new();
    for alpha in -half..=half {
        let th = PI * alpha as f64 / tf;
        let (sn, cs) = th.sin_cos();
        let e = ComplexValue::from_polar(1.0, 2.0 * PI * y * sn);
        let u = PI * y * cs / tf;
        a.add(e * family.g_tilde_eval(u, 2, 0)?);
        b.add(e * (sn * family.g_tilde_eval(u, 2, 2)?));
    }
    let a = a.value() * tf;
    let b = b.value() * (y / tf);
    Ok(StationaryPhaseSums { a, b, a_abs: a.norm(), b_abs: b.norm() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScanKind {
    SmallX,
    LargeX,
    SoupedUp,
    StationaryA,
    StationaryB,
}

impl ScanKind {
    pub const ALL: [ScanKind; 5] = [
        ScanKind::SmallX,
        ScanKind::LargeX,
        ScanKind::SoupedUp,
        ScanKind::StationaryA,
        ScanKind::StationaryB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScanKind::SmallX => "small_X",
            ScanKind::LargeX => "large_X",
            ScanKind::SoupedUp => "souped_up",
            ScanKind::StationaryA => "stationary_A",
            ScanKind::StationaryB => "stationary_B",
        }
    }

    /// Label of the first grid coordinate.
    pub fn axis_label(self) -> &'static str {
        match self {
            ScanKind::StationaryA | ScanKind::StationaryB => "Y",
            _ => "X",
        }
    }

    pub fn in_regime(self, x: f64, t: u32) -> bool {
        let tf = t as f64;
        match self {
            ScanKind::SmallX => x > 0.0 && x <= tf,
            ScanKind::LargeX | ScanKind::SoupedUp => x >= tf / 8.0,
            ScanKind::StationaryA | ScanKind::StationaryB => x > 0.0 && x <= tf / (2.0 * PI) * (1.0 + 1e-12),
        }
    }

    /// The claimed bound at (X, T) for a weight of order M.
    pub fn bound(self, x: f64, t: u32, order: u32) -> f64 {
        let tf = t as f64;
        match self {
            ScanKind::SmallX => x / tf,
            ScanKind::LargeX => x / tf.sqrt(),
            ScanKind::SoupedUp => {
                let m = order as f64;
                x.powf(m) * tf.powf(1.5 - 2.0 * m) + tf.powf(-1.5)
            }
            ScanKind::StationaryA => x.powi(4) / tf.powi(7),
            ScanKind::StationaryB => x.powi(5) / tf.powi(9),
        }
    }
}

impl fmt::Display for ScanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for ScanKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScanKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidParameter { name: "which", reason: "unknown bound scan" })
    }
}

/// One grid coordinate: an absolute value or a multiple of T.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridValue {
    Abs(f64),
    PerT(f64),
}

impl GridValue {
    pub fn at(self, t: u32) -> f64 {
        match self {
            GridValue::Abs(v) => v,
            GridValue::PerT(q) => q * t as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanGrid {
    pub xs: Vec<GridValue>,
    pub ts: Vec<u32>,
}

impl ScanGrid {
    /// Grid points in (T, X) order.
    pub fn points(&self) -> Vec<(f64, u32)> {
        let mut out = Vec::new();
        for &t in &self.ts {
            for &x in &self.xs {
                out.push((x.at(t), t));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint {
    pub x: f64,
    pub t: u32,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
    pub in_regime: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport {
    pub which: ScanKind,
    pub axis_labels: (&'static str, &'static str),
    pub points: Vec<ScanPoint>,
    /// Largest ratio over the in-regime points.
    pub sup_ratio: f64,
}

impl ScanReport {
    pub fn from_points(which: ScanKind, points: Vec<ScanPoint>) -> Result<Self> {
        let sup = points.iter().filter(|p| p.in_regime).map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max);
        if !sup.is_finite() {
            return Err(Error::InvalidParameter { name: "grid", reason: "no in-regime points" });
        }
        Ok(Self {
            which,
            axis_labels: (which.axis_label(), "T"),
            points,
            sup_ratio: sup,
        })
    }

    /// Largest in-regime ratio at one T.
    pub fn sup_ratio_at(&self, t: u32) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.in_regime && p.t == t)
            .map(|p| p.ratio)
            .reduce(f64::max)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &ScanPoint> {
        self.points.iter().filter(|p| !p.in_regime)
    }

    /// `which,X,T,value,bound,ratio`; out-of-regime rows are omitted.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("which,X,T,value,bound,ratio\n");
        for p in self.points.iter().filter(|p| p.in_regime) {
            let _ = writeln!(s, "{},{},{},{:e},{:e},{:e}", self.which, p.x, p.t, p.value, p.bound, p.ratio);
        }
        s
    }
}

/// One scan point. Out-of-regime points are returned flagged with NaN values.
pub fn bound_scan_point(which: ScanKind, x: f64, transform: &BesselTransform) -> Result<ScanPoint> {
    let t = transform.t();
    let fam = transform.weight().family();
    let bound = which.bound(x, t, fam.order());
    if !which.in_regime(x, t) {
        return Ok(ScanPoint { x, t, value: f64::NAN, bound, ratio: f64::NAN, in_regime: false });
    }
    let value = match which {
        ScanKind::SmallX | ScanKind::LargeX | ScanKind::SoupedUp => transform.dj_auto(x, 1e-10)?.value.norm(),
        ScanKind::StationaryA => stationary_phase_sums(fam, x, t)?.a_abs,
        ScanKind::StationaryB => stationary_phase_sums(fam, x, t)?.b_abs,
    };
    Ok(ScanPoint { x, t, value, bound, ratio: value / bound, in_regime: true })
}

/// Sequential scan over the grid; the std companion runs the same points
/// in parallel.
pub fn bound_scan(which: ScanKind, grid: &ScanGrid, family: &alloc::sync::Arc<WeightFamily>) -> Result<ScanReport> {
    if grid.xs.is_empty() || grid.ts.is_empty() {
        return Err(Error::InvalidParameter { name: "grid", reason: "must be nonempty" });
    }
    let mut points = Vec::new();
    for &t in &grid.ts {
        let bt = BesselTransform::new(SpectralWeight::new(family.clone(), t)?)?;
        for &x in &grid.xs {
            points.push(bound_scan_point(which, x.at(t), &bt)?);
        }
    }
    ScanReport::from_points(which, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::sync::Arc;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn family() -> &'static Arc<WeightFamily> {
        static F: OnceLock<Arc<WeightFamily>> = OnceLock::new();
        F.get_or_init(|| Arc::new(crate::weights::make_weight_family(8, 0.125).unwrap()))
    }

    fn transform(t: u32) -> &'static BesselTransform {
        static B: OnceLock<Vec<(u32, BesselTransform)>> = OnceLock::new();
        let all = B.get_or_init(|| {
            [5u32, 11, 21]
                .iter()
                .map(|&t| (t, BesselTransform::new(SpectralWeight::new(family().clone(), t).unwrap()).unwrap()))
                .collect()
        });
        &all.iter().find(|(tt, _)| *tt == t).expect("cached T").1
    }

    #[test]
    fn zero_argument() {
        let bt = transform(5);
        assert_eq!(bt.dj_residue_sum(0.0, 1e-12).unwrap().value, ComplexValue::new(0.0, 0.0));
        assert_eq!(bt.dj_quadrature(0.0, 1e-12).unwrap().value, ComplexValue::new(0.0, 0.0));
        assert_eq!(bt.sj_direct(0.0).unwrap(), 0.0);
        assert_eq!(sj_alpha_expansion(family(), 0.0, 5).unwrap(), 0.0);
        assert!(bt.dj_residue_sum(-1.0, 1e-12).is_err());
    }

    #[test]
    fn quadrature_matches_residues() {
        for (x, t) in [(1.0, 5), (0.5, 5), (2.0, 11)] {
            let bt = transform(t);
            let q = bt.dj_quadrature(x, 1e-12).unwrap();
            let r = bt.dj_residue_sum(x, 1e-14).unwrap();
            assert!(q.value.re.abs() <= 1e-8 * (1.0 + q.value.norm()));
            assert_eq!(r.value.re, 0.0);
            assert!((q.value - r.value).norm() < 1e-8, "X={x} T={t}: {:?} vs {:?}", q.value, r.value);
            assert!(q.error_estimate < 1e-9);
        }
    }

    #[test]
    fn derived_constants_pass_calibration_and_wrong_ones_fail() {
        let pts = [(1.0, 5), (2.0, 5), (2.0, 11)];
        assert_eq!(calibrate_residue_constants(family(), &pts, 1e-8).unwrap(), ResidueConstants::derived());
        let wrong = ResidueConstants { c1: ComplexValue::new(0.0, 1.0), c2: ComplexValue::new(0.0, 2.0) };
        assert!(matches!(
            check_residue_constants(wrong, family(), &pts, 1e-8),
            Err(Error::CalibrationFailure { .. })
        ));
        // the alternating-sign variant of the second family is caught where that family matters
        let bt = transform(5);
        let f = bt.residue_families(4.0, 1e-14).unwrap();
        let q = bt.dj_quadrature(4.0, 1e-12).unwrap().value.im;
        let c = ResidueConstants::derived();
        assert!((c.c1.im * f.first + c.c2.im * f.second - q).abs() < 1e-9);
        let j10 = crate::specfun::bessel_j_int(10, 4.0).unwrap();
        let flipped = f.second - 2.0 * 25.0 * bt.int_term(1) * j10;
        assert!((c.c1.im * f.first + c.c2.im * flipped - q).abs() > 1e-6);
        assert!(check_residue_constants(c, family(), &pts[..2], 1e-8).is_err());
    }

    #[test]
    fn second_family_is_exponentially_small_below_t() {
        for t in [5u32, 11, 21] {
            let bt = transform(t);
            for x in [0.5, 1.0, 2.0, t as f64 / 2.0, t as f64] {
                let f = bt.residue_families(x, 1e-14).unwrap();
                let c2 = ResidueConstants::derived().c2.norm();
                assert!(c2 * f.second.abs() <= x * (-0.75 * t as f64).exp(), "X={x} T={t}: {:e}", f.second);
            }
        }
    }

    #[test]
    fn first_family_is_twice_sj() {
        for t in [5u32, 11, 21] {
            let bt = transform(t);
            for x in [0.5, 1.0, 3.0] {
                let f = bt.residue_families(x, 1e-14).unwrap().first;
                let s = bt.sj_direct(x).unwrap();
                assert!((f - 2.0 * s).abs() <= 1e-10 * f.abs().max(1e-300), "X={x} T={t}: {f:e} vs {s:e}");
            }
        }
    }

    #[test]
    fn alpha_expansion_matches_direct_sum() {
        for (x, t) in [(1.0, 5), (3.0, 11)] {
            let d = transform(t).sj_direct(x).unwrap();
            let a = sj_alpha_expansion(family(), x, t).unwrap();
            assert!((d - a).abs() <= 1e-10 * d.abs(), "X={x} T={t}: {d:e} vs {a:e}");
        }
        assert!(matches!(sj_alpha_expansion(family(), 1.0, 103), Err(Error::CapacityExceeded { .. })));
    }

    #[test]
    fn asymptotic_route() {
        let bt = transform(11);
        assert!(matches!(bt.dj_asymptotic(1.0), Err(Error::Regime { .. })));
        let q = bt.dj_quadrature(10.0, 1e-12).unwrap();
        let a = bt.dj_asymptotic(10.0).unwrap();
        assert_eq!(a.method, DJMethod::Asymptotic);
        let d = (q.value - a.value).norm();
        assert!(d <= q.error_estimate + a.error_estimate, "{d:e}");
        // carrying the expansion further lands much closer
        let c = bt.dj_asymptotic_corrected(10.0).unwrap();
        assert!((q.value - c.value).norm() < 0.1 * d);
        assert!((q.value - c.value).norm() <= q.error_estimate + c.error_estimate);
        let g = bt.clone().with_asymptotic_grid().dj_asymptotic_corrected(10.0).unwrap();
        assert!((g.value - c.value).norm() <= g.error_estimate + c.error_estimate);
    }

    #[test]
    fn auto_route_prefers_the_smaller_error() {
        let bt = transform(11);
        let small = bt.dj_auto(2.0, 1e-9).unwrap();
        assert_eq!(small.method, DJMethod::Residue);
        let big = bt.dj_auto(1000.0, 1e-9).unwrap();
        assert_eq!(big.method, DJMethod::Asymptotic);
        assert!(big.error_estimate < bt.dj_residue_sum(1000.0, 1e-9).unwrap().error_estimate);
    }

    #[test]
    fn remainder_integral_scales_like_sqrt_t() {
        let a = transform(11).remainder_integral(11.0).unwrap() / 11f64.sqrt();
        let b = transform(21).remainder_integral(21.0).unwrap() / 21f64.sqrt();
        assert!(a > 0.0 && b > 0.0);
        assert!((a / b - 1.0).abs() < 0.1, "{a} {b}");
    }

    #[test]
    fn stationary_sums_symmetry_and_regime() {
        for t in [21u32, 41] {
            let y = t as f64 / 10.0;
            let s = stationary_phase_sums(family(), y, t).unwrap();
            assert!(s.a.im.abs() <= 1e-10 * s.a_abs.max(1e-300));
            assert!(s.b.re.abs() <= 1e-10 * s.b_abs.max(1e-300));
            assert!(s.a_abs > 0.0 && s.b_abs > 0.0);
        }
        assert!(matches!(stationary_phase_sums(family(), 4.0, 21), Err(Error::Regime { .. })));
        assert!(stationary_phase_sums(family(), 21.0 / (2.0 * PI), 21).is_ok());
    }

    #[test]
    fn majorant_dominates() {
        for t in [5u32, 11] {
            let bt = transform(t);
            let mut prev = 0.0;
            for x in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
                let b = bt.majorant(x);
                assert!(bt.dj_residue_sum(x, 1e-14).unwrap().value.norm() <= b);
                assert!(b / x >= prev);
                prev = b / x;
            }
        }
    }

    #[test]
    fn scan_report_and_csv() {
        let grid = ScanGrid {
            xs: alloc::vec![GridValue::PerT(1.0 / 16.0), GridValue::PerT(0.5), GridValue::Abs(0.5)],
            ts: alloc::vec![5, 11],
        };
        let r = bound_scan(ScanKind::LargeX, &grid, family()).unwrap();
        assert_eq!(r.points.len(), 6);
        // X = T/16 and X = 0.5 sit below T/8
        assert_eq!(r.flagged().count(), 4);
        assert!(r.sup_ratio.is_finite() && r.sup_ratio > 0.0);
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("which,X,T,value,bound,ratio"));
        assert_eq!(lines.count(), r.points.len() - r.flagged().count());
        assert!(csv.contains("large_X,2.5,5,"));
        assert!(ScanReport::from_points(ScanKind::SmallX, Vec::new()).is_err());
    }

    #[test]
    fn names_round_trip() {
        for k in ScanKind::ALL {
            assert_eq!(k.name().parse::<ScanKind>().unwrap(), k);
        }
        for m in [DJMethod::Quadrature, DJMethod::Residue, DJMethod::Asymptotic] {
            assert_eq!(m.name().parse::<DJMethod>().unwrap(), m);
        }
        assert!("nope".parse::<ScanKind>().is_err());
    }

    #[test]
    fn souped_up_bound_formula() {
        // X^M T^{3/2−2M} + T^{−3/2} at M = 8
        let b = ScanKind::SoupedUp.bound(4.0, 16, 8);
        let want = 4f64.powi(8) * 16f64.powf(1.5 - 16.0) + 16f64.powf(-1.5);
        assert!((b - want).abs() < 1e-15 * want);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn residue_value_is_imaginary_and_bounded(x in 0.01f64..20.0, ti in 0usize..3) {
            let t = [5u32, 11, 21][ti];
            let bt = transform(t);
            let r = bt.dj_residue_sum(x, 1e-14).unwrap();
            prop_assert_eq!(r.value.re, 0.0);
            prop_assert!(r.value.norm() <= bt.majorant(x) + r.error_estimate);
        }

        #[test]
        fn alpha_expansion_identity(x in 0.1f64..6.0, ti in 0usize..2) {
            let t = [5u32, 11][ti];
            let d = transform(t).sj_direct(x).unwrap();
            let a = sj_alpha_expansion(family(), x, t).unwrap();
            prop_assert!((d - a).abs() <= 1e-10 * d.abs() + 1e-22);
        }
    }
}
