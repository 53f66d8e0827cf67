//! The weight family h(x) = x^M·s(x)², where s is the Fourier transform of
//! a smooth even bump supported in (−w, w), together with the spectral
//! weight h_T(r) = (r/T)·h(ir/T)/sinh(πr/T) and the odd companion
//! g(x) = sgn(x)·h(x).

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::sum::{CompensatedSum, ComplexSum};
use crate::ComplexValue;

const PANEL_NODES: usize = 20;
/// Largest |z|·w the transform tables resolve.
const MAX_PHASE: f64 = 1250.0;
/// Growth guard on |Im z| for complex evaluation.
pub const MAX_IMAG: f64 = 1e3;

/// b(ξ) = scale·exp(−1/(1 − (ξ/w)²)) on (−w, w).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    halfwidth: f64,
    scale: f64,
}

fn psi(u: f64) -> f64 {
    let d = 1.0 - u * u;
    if d <= 0.0 {
        0.0
    } else {
        (-1.0 / d).exp()
    }
}

/// ∫_{−1}^{1} exp(−1/(1−u²)) du.
fn psi_mass() -> f64 {
    let gl = GaussLegendre::new(PANEL_NODES);
    let mut panels = 4;
    let mut prev = gl.integrate_panels(0.0, 1.0, panels, psi);
    loop {
        panels *= 2;
        let cur = gl.integrate_panels(0.0, 1.0, panels, psi);
        if (cur - prev).abs() <= 1e-16 * cur || panels >= 1 << 12 {
            return 2.0 * cur;
        }
        prev = cur;
    }
}

impl Bump {
    /// Bump with ∫b = 1, so that its transform has s(0) = 1.
    pub fn unit_mass(halfwidth: f64) -> Self {
        Self { halfwidth, scale: 1.0 / (halfwidth * psi_mass()) }
    }

    /// Bump with b(0) = 1.
    pub fn unit_height(halfwidth: f64) -> Self {
        Self { halfwidth, scale: core::f64::consts::E }
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn eval(&self, xi: f64) -> f64 {
        self.scale * psi(xi / self.halfwidth)
    }
}

#[derive(Clone, Debug)]
struct Level {
    xi: Vec<f64>,
    /// 2·(quadrature weight)·b(ξ) on [0, w]
    wb: Vec<f64>,
    max_arg: f64,
}

/// Tables evaluating s(z) = ∫ b(ξ) e(zξ) dξ = 2∫_0^w b(ξ) cos(2πzξ) dξ.
#[derive(Clone, Debug)]
pub struct BumpTransform {
    bump: Bump,
    base_panels: usize,
    levels: Vec<Level>,
}

impl BumpTransform {
    pub fn new(bump: Bump) -> Self {
        let gl = GaussLegendre::new(PANEL_NODES);
        let w = bump.halfwidth;
        let probe = |panels: usize| {
            let lv = build_level(&gl, &bump, panels);
            let a = sum_cos(&lv, ComplexValue::new(0.0, 0.0));
            let b = sum_cos(&lv, ComplexValue::new(1.5, 0.0));
            let c = sum_cos(&lv, ComplexValue::new(0.0, 3.0));
            [a.re, b.re, c.re]
        };
        let mut panels = 2;
        let mut prev = probe(panels);
        loop {
            let cur = probe(panels * 2);
            let stable = prev
                .iter()
                .zip(&cur)
                .all(|(p, c)| (p - c).abs() <= 1e-13 * c.abs().max(1e-300));
            if stable || panels >= 1 << 12 {
                break;
            }
            panels *= 2;
            prev = cur;
        }
        let mut levels = Vec::new();
        let mut p = panels;
        loop {
            let mut lv = build_level(&gl, &bump, p);
            // at most 5 radians of oscillation per 20-node panel
            lv.max_arg = 5.0 * p as f64 / (2.0 * PI * w);
            let done = lv.max_arg * w >= MAX_PHASE;
            levels.push(lv);
            if done {
                break;
            }
            p *= 2;
        }
        Self { bump, base_panels: panels, levels }
    }

    pub fn bump(&self) -> &Bump {
        &self.bump
    }

    /// Gauss–Legendre nodes in the base table.
    pub fn quadrature_nodes(&self) -> usize {
        self.base_panels * PANEL_NODES
    }

    /// Largest |z| the tables resolve.
    pub fn max_arg(&self) -> f64 {
        self.levels.last().map(|l| l.max_arg).unwrap_or(0.0)
    }

    fn level(&self, a: f64) -> Result<&Level> {
        self.levels
            .iter()
            .find(|l| l.max_arg >= a)
            .ok_or(Error::Domain { what: "band-limited transform argument beyond table coverage", value: a })
    }

    /// s(z).
    pub fn eval(&self, z: ComplexValue) -> Result<ComplexValue> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain { what: "band-limited transform argument", value: z.re });
        }
        if z.im.abs() > MAX_IMAG {
            return Err(Error::Overflow { what: "band-limited transform (|Im z| beyond growth guard)" });
        }
        let lv = self.level(z.re.abs())?;
        let v = sum_cos(lv, z);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Overflow { what: "band-limited transform" });
        }
        if z.im == 0.0 || z.re == 0.0 {
            return Ok(ComplexValue::new(v.re, 0.0));
        }
        Ok(v)
    }

    /// (s(x), s'(x), s''(x)) for real x.
    pub fn eval_real_derivs(&self, x: f64) -> Result<[f64; 3]> {
        let lv = self.level(x.abs())?;
        let mut s0 = CompensatedSum::new();
        let mut s1 = CompensatedSum::new();
        let mut s2 = CompensatedSum::new();
        for (xi, wb) in lv.xi.iter().zip(&lv.wb) {
            let k = 2.0 * PI * xi;
            let (sn, cs) = (k * x).sin_cos();
            s0.add(wb * cs);
            s1.add(-wb * k * sn);
            s2.add(-wb * k * k * cs);
        }
        Ok([s0.value(), s1.value(), s2.value()])
    }

    /// s(x) for real x.
    pub fn eval_real(&self, x: f64) -> Result<f64> {
        let lv = self.level(x.abs())?;
        let mut s = CompensatedSum::new();
        for (xi, wb) in lv.xi.iter().zip(&lv.wb) {
            s.add(wb * (2.0 * PI * x * xi).cos());
        }
        Ok(s.value())
    }

    /// s(iy)·e^{−2π|y|w}, which is ≤ s(0) and never overflows.
    pub fn eval_imag_scaled(&self, y: f64) -> f64 {
        let a = y.abs();
        let w = self.bump.halfwidth;
        let lv = &self.levels[0];
        let mut s = CompensatedSum::new();
        for (xi, wb) in lv.xi.iter().zip(&lv.wb) {
            let k = 2.0 * PI * a;
            s.add(wb * 0.5 * ((k * (xi - w)).exp() + (-k * (xi + w)).exp()));
        }
        s.value()
    }
}

fn build_level(gl: &GaussLegendre, bump: &Bump, panels: usize) -> Level {
    let w = bump.halfwidth;
    let h = w / panels as f64;
    let mut xi = Vec::with_capacity(panels * PANEL_NODES);
    let mut wb = Vec::with_capacity(panels * PANEL_NODES);
    for j in 0..panels {
        let c = h * (j as f64 + 0.5);
        for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
            let t = c + 0.5 * h * x;
            xi.push(t);
            wb.push(2.0 * 0.5 * h * wt * bump.eval(t));
        }
    }
    Level { xi, wb, max_arg: 0.0 }
}

fn sum_cos(lv: &Level, z: ComplexValue) -> ComplexValue {
    let mut s = ComplexSum::new();
    for (xi, wb) in lv.xi.iter().zip(&lv.wb) {
        let a = 2.0 * PI * xi;
        if z.im == 0.0 {
            s.add(ComplexValue::new(wb * (a * z.re).cos(), 0.0));
        } else {
            s.add((z * a).cos() * *wb);
        }
    }
    s.value()
}

/// The family h(x) = x^M·s(x)².
#[derive(Clone, Debug)]
pub struct WeightFamily {
    order: u32,
    transform: BumpTransform,
}

/// Builds h(x) = x^M·s(x)² with ŝ = b supported in (−w, w), normalised so s(0) = 1.
///
/// M must be a multiple of 4: h(iy) = i^M·y^M·s(iy)², which is non-negative
/// on the imaginary axis only when i^M = 1.
pub fn make_weight_family(order: u32, bump_halfwidth: f64) -> Result<WeightFamily> {
    if order < 8 || !order.is_multiple_of(2) {
        return Err(Error::InvalidParameter { name: "M", reason: "must be even and at least 8" });
    }
    if !order.is_multiple_of(4) {
        return Err(Error::InvalidParameter {
            name: "M",
            reason: "must be a multiple of 4 (h(iy) = -y^M s(iy)^2 < 0 otherwise)",
        });
    }
    if !(bump_halfwidth > 0.0 && bump_halfwidth <= 0.125) {
        return Err(Error::InvalidParameter { name: "bump_halfwidth", reason: "must lie in (0, 1/8]" });
    }
    Ok(WeightFamily {
        order,
        transform: BumpTransform::new(Bump::unit_mass(bump_halfwidth)),
    })
}

impl WeightFamily {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bump_halfwidth(&self) -> f64 {
        self.transform.bump.halfwidth
    }

    pub fn quadrature_nodes(&self) -> usize {
        self.transform.quadrature_nodes()
    }

    pub fn transform(&self) -> &BumpTransform {
        &self.transform
    }

    /// s(z).
    pub fn band_limited_eval(&self, z: ComplexValue) -> Result<ComplexValue> {
        self.transform.eval(z)
    }

    /// h(z) = z^M·s(z)².
    pub fn h_eval(&self, z: ComplexValue) -> Result<ComplexValue> {
        let s = self.transform.eval(z)?;
        let v = z.powu(self.order) * s * s;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Overflow { what: "h" });
        }
        if z.im == 0.0 || z.re == 0.0 {
            return Ok(ComplexValue::new(v.re, 0.0));
        }
        Ok(v)
    }

    /// h(x) for real x.
    pub fn h_real(&self, x: f64) -> Result<f64> {
        let s = self.transform.eval_real(x)?;
        Ok(x.powi(self.order as i32) * s * s)
    }

    /// h(iy) = y^M·s(iy)² for real y.
    pub fn h_imag(&self, y: f64) -> Result<f64> {
        let m = self.transform.eval_imag_scaled(y);
        let ln = self.order as f64 * y.abs().ln() + 4.0 * PI * y.abs() * self.bump_halfwidth();
        let v = if y == 0.0 { 0.0 } else { ln.exp() * m * m };
        if !v.is_finite() {
            return Err(Error::Overflow { what: "h on the imaginary axis" });
        }
        Ok(v)
    }

    /// d^j/dx^j [x^t·g(x)] with g(x) = sgn(x)·h(x), for t, j ∈ {0, 1, 2}.
    pub fn g_tilde_eval(&self, x: f64, tilde_count: u32, derivative_order: u32) -> Result<f64> {
        if tilde_count > 2 {
            return Err(Error::InvalidParameter { name: "tilde_count", reason: "must be 0, 1 or 2" });
        }
        if derivative_order > 2 {
            return Err(Error::InvalidParameter { name: "derivative_order", reason: "must be 0, 1 or 2" });
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let a = x.abs();
        let sg = x.signum();
        // x^t g(x) = sgn(x)^{t+1} F(|x|), F(a) = a^e q(a), q = s²
        let e = (tilde_count + self.order) as i32;
        let [s, s1, s2] = self.transform.eval_real_derivs(a)?;
        let q = s * s;
        let q1 = 2.0 * s * s1;
        let q2 = 2.0 * (s1 * s1 + s * s2);
        let ef = e as f64;
        let f = match derivative_order {
            0 => a.powi(e) * q,
            1 => ef * a.powi(e - 1) * q + a.powi(e) * q1,
            _ => ef * (ef - 1.0) * a.powi(e - 2) * q + 2.0 * ef * a.powi(e - 1) * q1 + a.powi(e) * q2,
        };
        let sign = sg.powi((tilde_count + 1 + derivative_order) as i32);
        Ok(sign * f)
    }
}

/// The spectral weight h_T(r) = (r/T)·h(ir/T)/sinh(πr/T) for odd T ≥ 3.
#[derive(Clone, Debug)]
pub struct SpectralWeight {
    family: Arc<WeightFamily>,
    scale: u32,
}

impl SpectralWeight {
    pub fn new(family: Arc<WeightFamily>, t: u32) -> Result<Self> {
        if t < 3 || t.is_multiple_of(2) {
            return Err(Error::InvalidParameter { name: "T", reason: "must be an odd integer >= 3" });
        }
        Ok(Self { family, scale: t })
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn family_arc(&self) -> &Arc<WeightFamily> {
        &self.family
    }

    pub fn t(&self) -> u32 {
        self.scale
    }

    /// h_T(r) for real r, evaluated in log-scaled form.
    pub fn h_t(&self, r: f64) -> f64 {
        let y = r.abs() / self.scale as f64;
        if y == 0.0 {
            return 0.0;
        }
        let fam = &*self.family;
        let m = fam.transform.eval_imag_scaled(y);
        // y^{M+1}·m²·e^{4πwy}/sinh(πy) = y^{M+1}·m²·2e^{(4w−1)πy}/(1 − e^{−2πy})
        let w = fam.bump_halfwidth();
        let ln = (fam.order + 1) as f64 * y.ln() + (4.0 * w - 1.0) * PI * y + core::f64::consts::LN_2
            - (-(-2.0 * PI * y).exp_m1()).ln();
        ln.exp() * m * m
    }

    /// Upper envelope of |h_T(ρ)| valid for all |ρ| ≥ |r| beyond the peak.
    pub fn h_t_envelope(&self, r: f64) -> f64 {
        let y = r.abs() / self.scale as f64;
        if y == 0.0 {
            return 0.0;
        }
        let fam = &*self.family;
        let w = fam.bump_halfwidth();
        let ln = (fam.order + 1) as f64 * y.ln() + (4.0 * w - 1.0) * PI * y + core::f64::consts::LN_2
            - (-(-2.0 * PI * y).exp_m1()).ln();
        ln.exp()
    }

    /// h_T at a complex point.
    pub fn h_t_eval(&self, r: ComplexValue) -> Result<ComplexValue> {
        if r.re == 0.0 && r.im == 0.0 {
            return Ok(ComplexValue::new(0.0, 0.0));
        }
        let t = self.scale as f64;
        if r.im == 0.0 {
            return Ok(ComplexValue::new(self.h_t(r.re), 0.0));
        }
        if r.re == 0.0 {
            let k = r.im / t;
            let kr = k.round();
            if kr != 0.0 && (k - kr).abs() < 1e-12 * k.abs().max(1.0) {
                return Err(Error::PoleOfWeight { multiple: kr as i64 });
            }
        }
        let u = r / t;
        let h = self.family.h_eval(ComplexValue::new(0.0, 1.0) * u)?;
        let v = u * h / (u * PI).sinh();
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Overflow { what: "h_T" });
        }
        if r.re == 0.0 {
            return Ok(ComplexValue::new(v.re, 0.0));
        }
        Ok(v)
    }

    /// h_T((k+½)i) = x·h(x)/sin(πx) at x = (k+½)/T.
    pub fn h_t_halfint_imag(&self, k: u64) -> f64 {
        let x = (k as f64 + 0.5) / self.scale as f64;
        let h = self.family.h_real(x).unwrap_or(0.0);
        x * h / (PI * x).sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_adaptive, AdaptiveOptions};
    use proptest::prelude::*;

    fn fam() -> WeightFamily {
        make_weight_family(8, 0.125).unwrap()
    }

    fn c(re: f64, im: f64) -> ComplexValue {
        ComplexValue::new(re, im)
    }

    #[test]
    fn parameter_domain() {
        assert!(make_weight_family(6, 0.1).is_err());
        assert!(make_weight_family(9, 0.1).is_err());
        assert!(make_weight_family(10, 0.1).is_err());
        assert!(make_weight_family(12, 0.1).is_ok());
        assert!(make_weight_family(8, 0.2).is_err());
        assert!(make_weight_family(8, 0.0).is_err());
        let f = Arc::new(fam());
        assert!(SpectralWeight::new(f.clone(), 10).is_err());
        assert!(SpectralWeight::new(f.clone(), 1).is_err());
        assert!(SpectralWeight::new(f, 11).is_ok());
    }

    #[test]
    fn s_at_zero_is_the_mass() {
        let f = fam();
        let s0 = f.band_limited_eval(c(0.0, 0.0)).unwrap();
        assert!((s0.re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn s_is_stable_under_node_doubling() {
        let f = fam();
        let gl = GaussLegendre::new(PANEL_NODES);
        let bump = f.transform.bump;
        let coarse = f.band_limited_eval(c(1.5, 0.0)).unwrap().re;
        let fine = sum_cos(&build_level(&gl, &bump, 4 * f.transform.base_panels), c(1.5, 0.0)).re;
        assert!((coarse - fine).abs() < 1e-12);
        // independent adaptive quadrature of 2∫b(ξ)cos(3πξ)
        let r = integrate_adaptive(
            |xi| 2.0 * bump.eval(xi) * (3.0 * PI * xi).cos(),
            &[0.0, 0.125],
            AdaptiveOptions::new(1e-15, 1e-15),
        )
        .unwrap();
        assert!((r.value - coarse).abs() < 1e-12);
    }

    #[test]
    fn s_real_on_both_axes_and_positive_on_imaginary() {
        let f = fam();
        let v = f.band_limited_eval(c(0.0, 2.0)).unwrap();
        assert_eq!(v.im, 0.0);
        assert!(v.re > 0.0);
        let scaled = f.transform.eval_imag_scaled(2.0) * (4.0 * PI * 0.125).exp();
        assert!((scaled - v.re).abs() < 1e-13 * v.re);
    }

    #[test]
    fn growth_guard() {
        let f = fam();
        assert!(matches!(f.band_limited_eval(c(0.0, 2e3)), Err(Error::Overflow { .. })));
    }

    #[test]
    fn h_basic_properties() {
        let f = fam();
        assert_eq!(f.h_real(0.0).unwrap(), 0.0);
        assert!((f.h_real(0.37).unwrap() - f.h_real(-0.37).unwrap()).abs() < 1e-16);
        let hi = f.h_eval(c(0.0, 1.0)).unwrap();
        assert_eq!(hi.im, 0.0);
        assert!(hi.re >= 0.0);
        assert!((hi.re - f.h_imag(1.0).unwrap()).abs() < 1e-13 * hi.re);
        let s05 = f.band_limited_eval(c(0.5, 0.0)).unwrap().re;
        assert!((f.h_real(0.5).unwrap() - 0.5f64.powi(8) * s05 * s05).abs() < 1e-16);
        let x = 1e-3;
        let ratio = f.h_real(x).unwrap() / x.powi(8);
        assert!((ratio - 1.0).abs() < 1e-2);
    }

    #[test]
    fn h_even_and_nonnegative_on_grids() {
        let f = fam();
        for j in 0..200 {
            let x = j as f64 * 0.37;
            let a = f.h_real(x).unwrap();
            let b = f.h_real(-x).unwrap();
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            assert!(a >= 0.0);
            let y = j as f64 * 0.1;
            let hy = f.h_eval(c(0.0, y)).unwrap();
            assert_eq!(hy.im, 0.0);
            assert!(hy.re >= 0.0);
        }
    }

    /// Gauss–Legendre nodes, weights and h values on [0, 1500]; beyond that
    /// h is below 1e-6 (its peak is near 5e6) and the computed s(x) sits at
    /// its rounding floor.
    fn sampled_h(f: &WeightFamily) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let x_max = 1500.0;
        assert!(f.h_real(x_max).unwrap() < 1e-6);
        let gl = GaussLegendre::new(20);
        let panels = 1500;
        let hw = x_max / panels as f64;
        let (mut xs, mut ws, mut hs) = (Vec::new(), Vec::new(), Vec::new());
        for j in 0..panels {
            let c = hw * (j as f64 + 0.5);
            for (n, w) in gl.nodes.iter().zip(&gl.weights) {
                let x = c + 0.5 * hw * n;
                xs.push(x);
                ws.push(0.5 * hw * w);
                hs.push(f.h_real(x).unwrap());
            }
        }
        (xs, ws, hs)
    }

    #[test]
    fn fourier_transforms_of_h_and_g() {
        let f = fam();
        let (xs, ws, hs) = sampled_h(&f);
        let integral = |k: &dyn Fn(f64) -> f64| {
            let mut s = CompensatedSum::new();
            for ((x, w), h) in xs.iter().zip(&ws).zip(&hs) {
                s.add(w * h * k(*x));
            }
            2.0 * s.value()
        };
        let l1 = integral(&|_| 1.0);
        // ĥ(0.3) = 2∫_0^∞ h(x)cos(0.6πx)dx vanishes outside (−1/4, 1/4)
        let outside = integral(&|x| (0.6 * PI * x).cos());
        assert!(outside.abs() <= 1e-10 * l1, "{outside} {l1}");

        // For ξ > 2w the transform of g is −2i·I(ξ) with the Laplace integral
        // I(ξ) = ∫_0^∞ u^M s(iu)² e^{−2πuξ} du (contour rotated to the negative
        // imaginary axis, M ≡ 0 mod 4).
        let lap = |xi: f64| {
            integrate_adaptive(
                |u| f.h_imag(u).unwrap() * (-2.0 * PI * u * xi).exp(),
                &[0.0, 0.5, 2.0, 8.0, 40.0],
                AdaptiveOptions::new(1e-300, 1e-12),
            )
            .unwrap()
            .value
        };
        let xi = 0.6;
        let direct = integral(&|x| (2.0 * PI * xi * x).sin()) / 2.0;
        assert!((direct - lap(xi)).abs() < 1e-10 * l1, "{direct} {}", lap(xi));

        let xs: Vec<f64> = (0..10).map(|j| 10.0 * 10f64.powf(j as f64 / 9.0)).collect();
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = xs.iter().map(|&x| lap(x).ln()).collect();
        let n = lx.len() as f64;
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let slope = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
            / lx.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>();
        assert!(slope <= -(8.0 - 1.0) + 0.5, "slope {slope}");
    }

    #[test]
    fn spectral_weight_properties() {
        let f = Arc::new(fam());
        let w = SpectralWeight::new(f, 11).unwrap();
        assert_eq!(w.h_t(0.0), 0.0);
        assert_eq!(w.h_t_eval(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(w.h_t(7.3), w.h_t(-7.3));
        let direct = w.h_t_eval(c(7.3, 1e-300)).unwrap();
        assert!((direct.re - w.h_t(7.3)).abs() < 1e-12 * w.h_t(7.3));
        // decay envelope with a fitted constant
        let mut cfit = 0.0f64;
        for j in 1..400 {
            let r = j as f64 * 0.5;
            let v = w.h_t(r);
            assert!(v >= 0.0);
            cfit = cfit.max(v / (-PI * r / 44.0).exp());
        }
        assert!(w.h_t(100.0) <= cfit * (-PI * 100.0 / 44.0).exp());
        assert!(w.h_t(400.0) <= cfit * (-PI * 400.0 / 44.0).exp());
    }

    #[test]
    fn poles_of_h_t() {
        let f = Arc::new(fam());
        let w = SpectralWeight::new(f, 11).unwrap();
        assert_eq!(w.h_t_eval(c(0.0, 11.0)), Err(Error::PoleOfWeight { multiple: 1 }));
        assert_eq!(w.h_t_eval(c(0.0, -22.0)), Err(Error::PoleOfWeight { multiple: -2 }));
        assert!(w.h_t_eval(c(0.0, 10.5)).is_ok());
    }

    #[test]
    fn half_integer_values() {
        let f = Arc::new(fam());
        let w = SpectralWeight::new(f.clone(), 11).unwrap();
        let a = w.h_t_halfint_imag(3);
        let b = w.h_t_eval(c(0.0, 3.5)).unwrap();
        assert!((a - b.re).abs() < 1e-12 * a.abs());
        assert_eq!(b.im, 0.0);
        // sign follows sin(π(k+½)/T)
        for k in 0..60u64 {
            let v = w.h_t_halfint_imag(k);
            let s = (PI * (k as f64 + 0.5) / 11.0).sin();
            if v != 0.0 {
                assert_eq!(v.signum(), s.signum(), "k={k}");
            }
        }
        // bridge identity
        for t in [5u32, 11, 21] {
            let w = SpectralWeight::new(f.clone(), t).unwrap();
            for k in 0..=(5 * t as u64) {
                let x = (2 * k + 1) as f64 / (2.0 * t as f64);
                let rhs = 2.0 * t as f64 * x * x * f.h_real(x).unwrap() / (PI * x).sin();
                let lhs = w.h_t_halfint_imag(k) * (2 * k + 1) as f64;
                assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs().max(1e-300), "T={t} k={k}");
            }
        }
    }

    #[test]
    fn g_tilde() {
        let f = fam();
        let a = f.g_tilde_eval(0.4, 0, 0).unwrap();
        assert_eq!(f.g_tilde_eval(-0.4, 0, 0).unwrap(), -a);
        assert!((a - f.h_real(0.4).unwrap()).abs() < 1e-18);
        let b = f.g_tilde_eval(0.25, 2, 0).unwrap();
        assert!((b - 0.0625 * f.h_real(0.25).unwrap()).abs() < 1e-20);
        assert!(f.g_tilde_eval(0.3, 3, 0).is_err());
        assert!(f.g_tilde_eval(0.3, 0, 3).is_err());
        let h = 1e-5;
        for x in [0.6, -0.6, 2.3] {
            for t in 0..=2 {
                for j in 1..=2 {
                    let fd = if j == 1 {
                        (f.g_tilde_eval(x + h, t, 0).unwrap() - f.g_tilde_eval(x - h, t, 0).unwrap()) / (2.0 * h)
                    } else {
                        (f.g_tilde_eval(x + h, t, 1).unwrap() - f.g_tilde_eval(x - h, t, 1).unwrap()) / (2.0 * h)
                    };
                    let an = f.g_tilde_eval(x, t, j).unwrap();
                    assert!((fd - an).abs() < 1e-6 * (1.0 + an.abs()), "x={x} t={t} j={j} {fd} {an}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn h_t_is_even_and_nonnegative(r in 0.0f64..2000.0, t in 1u32..40) {
            let w = SpectralWeight::new(Arc::new(make_weight_family(8, 0.1).unwrap()), 2 * t + 1).unwrap();
            prop_assert!(w.h_t(r) >= 0.0);
            prop_assert_eq!(w.h_t(r), w.h_t(-r));
        }
    }
}
