//! The level-1 Kuznetsov formula
//!
//! Σ_u H(t_u)/‖u‖²·λ_m(u)λ_n(u) = δ_{m,n}/π²·∫ rH(r)tanh(πr) dr
//!     − 1/π·∫ τ_{ir}(m)τ_{ir}(n)H(r)/|ζ(1+2ir)|² dr
//!     + 2i/π·Σ_c S(m,n;c)/c·∫ J_{2ir}(4π√(mn)/c)·rH(r)/cosh(πr) dr,
//!
//! with τ_{ir}(n) = Σ_{ab=n} (a/b)^{ir} = n^{−ir}σ_{2ir}(n). The geometric
//! (right) side is computed from special functions and arithmetic alone;
//! the spectral (left) side from ingested Maass form data.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::arithmetic::{divisor_count, gcd, KloostermanTable};
use crate::besseltransform::{transform_quadrature, BesselTransform};
use crate::error::{Error, Result};
use crate::maassdata::{fit_count, MaassFormRecord};
use crate::quad::{integrate_adaptive, kronrod21_nodes, AdaptiveOptions};
use crate::specfun::zeta_right_of_one;
use crate::sum::CompensatedSum;
use crate::weights::{SpectralWeight, WeightFamily};
use crate::ComplexValue;

/// Default cap on the Kloosterman modulus.
pub const DEFAULT_C_MAX: u64 = 1000;
/// Largest vanishing order accepted for Gaussian weights.
pub const MAX_VANISHING_ORDER: u32 = 6;
/// Relative agreement targeted by the trace identity check on real data.
pub const TRACE_RELATIVE_TARGET: f64 = 1e-3;
/// Moduli with explicit divisor-count tail sums.
const TAIL_TABLE: usize = 1 << 16;
/// Kloosterman tables built at construction.
const KLOOSTERMAN_TABLES: u64 = 512;
/// First modulus at which the c-sum may stop.
const C_MIN: u64 = 8;

/// (e^{−(r−c)²/w²} + e^{−(r+c)²/w²})·Π_{k<K} (r² + (k+½)²)/(k+½)².
///
/// The polynomial factor vanishes at r = ±(k+½)i, removing the first K poles
/// of 1/cosh(πr) from the Bessel transform, which is then O(X^{2K+1}) as X → 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianWeight {
    pub center: f64,
    pub width: f64,
    pub vanishing_order: u32,
}

impl GaussianWeight {
    pub fn new(center: f64, width: f64, vanishing_order: u32) -> Result<Self> {
        if !(center.is_finite() && center >= 0.0) {
            return Err(Error::InvalidParameter { name: "center", reason: "must be finite and nonnegative" });
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidParameter { name: "width", reason: "must be positive" });
        }
        if vanishing_order > MAX_VANISHING_ORDER {
            return Err(Error::InvalidParameter { name: "vanishing_order", reason: "at most 6" });
        }
        Ok(Self { center, width, vanishing_order })
    }

    pub fn eval(&self, r: f64) -> f64 {
        let w2 = self.width * self.width;
        let g = (-(r - self.center).powi(2) / w2).exp() + (-(r + self.center).powi(2) / w2).exp();
        let mut p = 1.0;
        for k in 0..self.vanishing_order {
            let a = (k as f64 + 0.5).powi(2);
            p *= (r * r + a) / a;
        }
        g * p
    }

    /// R with ∫_R^∞ r|H(r)| dr below tol, and that tail integral.
    pub fn truncation(&self, tol: f64) -> Result<(f64, f64)> {
        let mut r = self.center + 4.0 * self.width;
        let step = self.width;
        let opts = AdaptiveOptions::new(1e-3 * tol, 1e-8);
        loop {
            let breaks: Vec<f64> = (0..=64).map(|i| r + i as f64 * step).collect();
            let body = integrate_adaptive(|s| s * self.eval(s), &breaks, opts)?;
            let end = r + 64.0 * step;
            // beyond `end` the Gaussian factor dominates any polynomial growth
            let beyond = end * self.eval(end) * self.width;
            let tail = body.value + body.error + beyond;
            if tail <= tol {
                return Ok((r, tail));
            }
            r += 2.0 * step;
            if r > 1e5 {
                return Err(Error::Regime { what: "Gaussian weight does not decay within range" });
            }
        }
    }
}

/// The closed catalogue of weights eligible for the trace formula. Every
/// member is even and holomorphic in |Im r| < ½ + ε with the required decay;
/// arbitrary user functions are not accepted.
#[derive(Clone, Debug)]
pub enum AdmissibleWeight {
    /// h_T.
    Spectral(Arc<BesselTransform>),
    Gaussian(GaussianWeight),
    /// log(1 + r²)·h_T(r); its branch points ±i lie outside the strip.
    LogConductor(Arc<BesselTransform>),
    Combination(Vec<(f64, AdmissibleWeight)>),
}

impl AdmissibleWeight {
    pub fn spectral(family: Arc<WeightFamily>, t: u32) -> Result<Self> {
        let bt = BesselTransform::new(SpectralWeight::new(family, t)?)?.with_asymptotic_grid();
        Ok(AdmissibleWeight::Spectral(Arc::new(bt)))
    }

    pub fn log_conductor(family: Arc<WeightFamily>, t: u32) -> Result<Self> {
        let bt = BesselTransform::new(SpectralWeight::new(family, t)?)?;
        Ok(AdmissibleWeight::LogConductor(Arc::new(bt)))
    }

    pub fn gaussian(center: f64, width: f64, vanishing_order: u32) -> Result<Self> {
        Ok(AdmissibleWeight::Gaussian(GaussianWeight::new(center, width, vanishing_order)?))
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            AdmissibleWeight::Spectral(bt) => bt.weight().h_t(r),
            AdmissibleWeight::Gaussian(g) => g.eval(r),
            AdmissibleWeight::LogConductor(bt) => (r * r).ln_1p() * bt.weight().h_t(r),
            AdmissibleWeight::Combination(parts) => parts.iter().map(|(a, w)| a * w.eval(r)).sum(),
        }
    }

    pub fn description(&self) -> String {
        match self {
            AdmissibleWeight::Spectral(bt) => {
                format!("h_T(M={}, w={}, T={})", bt.weight().family().order(), bt.weight().family().bump_halfwidth(), bt.t())
            }
            AdmissibleWeight::Gaussian(g) => {
                format!("gaussian(center={}, width={}, vanishing={})", g.center, g.width, g.vanishing_order)
            }
            AdmissibleWeight::LogConductor(bt) => format!("log(1+r^2)*h_T(T={})", bt.t()),
            AdmissibleWeight::Combination(parts) => {
                let mut s = String::new();
                for (i, (a, w)) in parts.iter().enumerate() {
                    if i > 0 {
                        s.push_str(" + ");
                    }
                    s.push_str(&format!("{a}*{}", w.description()));
                }
                s
            }
        }
    }

    /// Length scale of the weight, used for panel sizes.
    pub fn decay_scale(&self) -> f64 {
        match self {
            AdmissibleWeight::Spectral(bt) | AdmissibleWeight::LogConductor(bt) => bt.t() as f64,
            AdmissibleWeight::Gaussian(g) => g.width,
            AdmissibleWeight::Combination(parts) => parts.iter().map(|(_, w)| w.decay_scale()).fold(f64::INFINITY, f64::min),
        }
    }

    /// Power p with D_H(X) = O(X^p) as X → 0.
    pub fn small_x_order(&self) -> u32 {
        match self {
            AdmissibleWeight::Spectral(_) | AdmissibleWeight::LogConductor(_) => 1,
            AdmissibleWeight::Gaussian(g) => 2 * g.vanishing_order + 1,
            AdmissibleWeight::Combination(parts) => parts.iter().map(|(_, w)| w.small_x_order()).min().unwrap_or(1),
        }
    }

    /// R with ∫_R^∞ r|H(r)| dr ≤ tol, and that tail.
    pub fn truncation(&self, tol: f64) -> Result<(f64, f64)> {
        match self {
            AdmissibleWeight::Spectral(bt) => bt.truncation(tol),
            AdmissibleWeight::LogConductor(bt) => {
                // log(1+r²) < 20 on any range where h_T is not negligible
                let (r, tail) = bt.truncation(tol / 20.0)?;
                Ok((r, 20.0 * tail))
            }
            AdmissibleWeight::Gaussian(g) => g.truncation(tol),
            AdmissibleWeight::Combination(parts) => {
                let mut r: f64 = 0.0;
                let mut tail = 0.0;
                let n = parts.len().max(1) as f64;
                for (a, w) in parts {
                    let (ri, ti) = w.truncation(tol / (n * a.abs().max(1e-300)))?;
                    r = r.max(ri);
                    tail += a.abs() * ti;
                }
                Ok((r, tail))
            }
        }
    }

    /// Evenness on a grid, to rounding.
    pub fn is_even(&self) -> bool {
        (1..200).all(|i| {
            let r = i as f64 * 0.37;
            let (a, b) = (self.eval(r), self.eval(-r));
            (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
        })
    }

    /// Im ∫ J_{2ir}(X)·rH(r)/cosh(πr) dr (the integral is purely imaginary)
    /// and its error estimate.
    pub fn bessel_transform(&self, x: f64, tol: f64) -> Result<(f64, f64)> {
        match self {
            AdmissibleWeight::Spectral(bt) => {
                let d = bt.dj_auto(x, tol)?;
                Ok((d.value.im, d.error_estimate))
            }
            AdmissibleWeight::Gaussian(g) => {
                let (r_max, tail) = g.truncation(tol)?;
                let (v, e) = transform_quadrature(|r| g.eval(r), x, r_max, 0.5 * g.width, tol)?;
                Ok((v, e + 2.0 * tail))
            }
            AdmissibleWeight::LogConductor(bt) => {
                let (r_max, tail) = self.truncation(tol)?;
                let tf = bt.t() as f64;
                let (v, e) = transform_quadrature(|r| (r * r).ln_1p() * bt.weight().h_t(r), x, r_max, tf / 8.0, tol)?;
                Ok((v, e + 2.0 * tail))
            }
            AdmissibleWeight::Combination(parts) => {
                let mut v = 0.0;
                let mut e = 0.0;
                for (a, w) in parts {
                    let (vi, ei) = w.bessel_transform(x, tol)?;
                    v += a * vi;
                    e += a.abs() * ei;
                }
                Ok((v, e))
            }
        }
    }

    /// A bound B(X) ≥ |D_H(X)| for small X, used for the Kloosterman tail.
    /// Rigorous for h_T (from the residue envelope); for the other members it
    /// is ten times the leading residue term, or h_T's bound times the
    /// largest value of log(1 + r²) over the bulk of h_T.
    pub fn majorant(&self, x: f64) -> f64 {
        match self {
            AdmissibleWeight::Spectral(bt) => bt.majorant(x),
            AdmissibleWeight::LogConductor(bt) => {
                let tf = bt.t() as f64;
                bt.majorant(x) * (2.0 + (4.0 * tf * tf).ln_1p())
            }
            AdmissibleWeight::Gaussian(g) => {
                let k = g.vanishing_order;
                let y = k as f64 + 0.5;
                let w2 = g.width * g.width;
                let mut h = 2.0 * ((y * y - g.center * g.center) / w2).exp();
                for j in 0..k {
                    let a = (j as f64 + 0.5).powi(2);
                    h *= (a - y * y).abs() / a;
                }
                let n = 2 * k + 1;
                let mut lead = (2.0 * y) * h;
                for i in 1..=n {
                    lead *= 0.5 * x / i as f64;
                }
                10.0 * lead
            }
            AdmissibleWeight::Combination(parts) => parts.iter().map(|(a, w)| a.abs() * w.majorant(x)).sum(),
        }
    }
}

/// The three terms of the geometric side.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricBreakdown {
    pub m: u64,
    pub n: u64,
    pub delta_term: f64,
    pub eisenstein_term: f64,
    /// Σ_c S(m,n;c)/c·∫ J_{2ir}(4π√(mn)/c)·rH(r)/cosh(πr) dr, purely imaginary.
    pub kloosterman_term: ComplexValue,
    /// Im of the c-th summand S(m,n;c)/c·∫…, for c = 1..=c_used.
    pub kloosterman_by_c: Vec<f64>,
    pub c_max: u64,
    /// Last modulus summed explicitly.
    pub c_used: u64,
    pub r_max: f64,
    /// Quadrature errors, truncation tails and the Kloosterman tail bound.
    pub error_budget: f64,
}

impl GeometricBreakdown {
    /// (2i/π)·kloosterman_term, which is real.
    pub fn kloosterman_contribution(&self) -> f64 {
        (ComplexValue::new(0.0, 2.0 / PI) * self.kloosterman_term).re
    }

    pub fn total(&self) -> f64 {
        self.delta_term + self.eisenstein_term + self.kloosterman_contribution()
    }

    /// The Kloosterman contribution from moduli c ≤ c_split and from the rest.
    pub fn kloosterman_split(&self, c_split: f64) -> (f64, f64) {
        let mut head = CompensatedSum::new();
        let mut tail = CompensatedSum::new();
        for (i, v) in self.kloosterman_by_c.iter().enumerate() {
            if (i + 1) as f64 <= c_split {
                head.add(*v);
            } else {
                tail.add(*v);
            }
        }
        (-2.0 / PI * head.value(), -2.0 / PI * tail.value())
    }
}

/// Quadrature nodes for the Eisenstein integral with H(r)/|ζ(1+2ir)|² folded
/// into the weights, shared across (m, n).
#[derive(Clone, Debug)]
struct EisensteinNodes {
    r: Vec<f64>,
    wk: Vec<f64>,
    wg: Vec<f64>,
    abs_sum: f64,
}

impl EisensteinNodes {
    fn new(weight: &AdmissibleWeight, r_max: f64, max_mn: u64) -> Result<Self> {
        let width = 1f64
            .min(8.0 / (2.0 + max_mn as f64).ln())
            .min(weight.decay_scale() / 4.0);
        let (mut r, mut wk, mut wg) = (Vec::new(), Vec::new(), Vec::new());
        let mut abs_sum = 0.0;
        let mut a = 0.0;
        while a < r_max {
            let b = (a + width).min(r_max);
            for (x, k, g) in kronrod21_nodes(a, b) {
                let z = zeta_right_of_one(ComplexValue::new(1.0, 2.0 * x))?;
                let f = weight.eval(x) / z.norm_sqr();
                r.push(x);
                wk.push(k * f);
                wg.push(g * f);
                abs_sum += (k * f).abs();
            }
            a = b;
        }
        Ok(Self { r, wk, wg, abs_sum })
    }

    /// −(2/π)∫₀^R τ_{ir}(m)τ_{ir}(n)H(r)/|ζ(1+2ir)|² dr and its error.
    fn term(&self, m: u64, n: u64) -> (f64, f64) {
        let lm = divisor_log_ratios(m);
        let ln = divisor_log_ratios(n);
        let mut k = CompensatedSum::new();
        let mut g = CompensatedSum::new();
        for i in 0..self.r.len() {
            let r = self.r[i];
            let tm: f64 = lm.iter().map(|&a| (a * r).cos()).sum();
            let tn: f64 = if n == m { tm } else { ln.iter().map(|&a| (a * r).cos()).sum() };
            let v = tm * tn;
            k.add(self.wk[i] * v);
            g.add(self.wg[i] * v);
        }
        let scale = -2.0 / PI;
        let bound = (lm.len() * ln.len()) as f64;
        let err = (k.value() - g.value()).abs() + 1e-14 * bound * self.abs_sum;
        (scale * k.value(), 2.0 / PI * err)
    }
}

/// ln(d²/n) over the divisors d of n, so that τ_{ir}(n) = Σ cos(r·ln(d²/n)).
fn divisor_log_ratios(n: u64) -> Vec<f64> {
    let ln_n = (n as f64).ln();
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(2.0 * (d as f64).ln() - ln_n);
            if d * d != n {
                out.push(ln_n - 2.0 * (d as f64).ln());
            }
        }
        d += 1;
    }
    out
}

/// Engine for the geometric side at a fixed weight: caches the Eisenstein
/// nodes, Kloosterman tables and the divisor-count tail sums.
#[derive(Clone, Debug)]
pub struct TraceEngine {
    weight: AdmissibleWeight,
    max_mn: u64,
    c_max: u64,
    tol: f64,
    r_max: f64,
    weight_tail: f64,
    eisenstein: EisensteinNodes,
    tables: Vec<KloostermanTable>,
    /// Σ_{c' > c} d(c')·c'^{−1/2−p} for c < TAIL_TABLE.
    tail_sums: Vec<f64>,
}

impl TraceEngine {
    /// `tol` is the absolute accuracy targeted for each term of the
    /// geometric side; `max_mn` bounds the products mn that will be asked for.
    pub fn new(weight: AdmissibleWeight, max_mn: u64, c_max: u64, tol: f64) -> Result<Self> {
        if c_max < 1 {
            return Err(Error::InvalidParameter { name: "c_max", reason: "must be at least 1" });
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidParameter { name: "tol", reason: "must lie in (0, 1)" });
        }
        let (r_max, weight_tail) = weight.truncation(1e-3 * tol)?;
        let eisenstein = EisensteinNodes::new(&weight, r_max, max_mn.max(1))?;
        let tables = (1..=c_max.min(KLOOSTERMAN_TABLES)).map(KloostermanTable::new).collect();
        let p = weight.small_x_order() as f64;
        let mut tail_sums = alloc::vec![0.0; TAIL_TABLE + 1];
        let mut acc = 0.0;
        for c in (1..=TAIL_TABLE).rev() {
            tail_sums[c] = acc;
            acc += divisor_count(c as u64) as f64 * (c as f64).powf(-0.5 - p);
        }
        tail_sums[0] = acc;
        Ok(Self { weight, max_mn: max_mn.max(1), c_max, tol, r_max, weight_tail, eisenstein, tables, tail_sums })
    }

    pub fn weight(&self) -> &AdmissibleWeight {
        &self.weight
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn kloosterman(&self, m: u64, n: u64, c: u64) -> f64 {
        match self.tables.get(c as usize - 1) {
            Some(t) => t.sum(m, n),
            None => crate::arithmetic::kloosterman_sum(m, n, c),
        }
    }

    /// Σ_{c > c0} d(c)·c^{−1/2}·(c0/c)^p.
    fn weil_tail_sum(&self, c0: u64) -> f64 {
        let p = self.weight.small_x_order() as f64;
        let c0f = c0 as f64;
        let n = TAIL_TABLE as f64;
        // Σ_{c>N} d(c)c^{−3/2} ≤ 2(ln N + 6)/√N, and c^{1−p} ≤ N^{1−p} beyond N
        let far = 2.0 * (n.ln() + 6.0) / n.sqrt() * n.powf(1.0 - p);
        let near = if (c0 as usize) < TAIL_TABLE { self.tail_sums[c0 as usize] } else { 0.0 };
        c0f.powf(p) * (near + far)
    }

    /// δ_{m,n}/π²·∫ rH(r)tanh(πr) dr.
    fn delta_term(&self) -> Result<(f64, f64)> {
        let scale = self.weight.decay_scale() / 4.0;
        let n = (self.r_max / scale).ceil().max(1.0) as usize;
        let breaks: Vec<f64> = (0..=n).map(|i| self.r_max * i as f64 / n as f64).collect();
        let v = integrate_adaptive(
            |r| r * self.weight.eval(r) * (PI * r).tanh(),
            &breaks,
            AdaptiveOptions::new(1e-3 * self.tol, 1e-15),
        )?;
        let s = 2.0 / (PI * PI);
        Ok((s * v.value, s * (v.error + self.weight_tail)))
    }

    pub fn geometric_side(&self, m: u64, n: u64) -> Result<GeometricBreakdown> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter { name: "m, n", reason: "must be positive" });
        }
        if m.saturating_mul(n) > self.max_mn {
            return Err(Error::InvalidParameter { name: "m, n", reason: "mn exceeds the engine's frequency range" });
        }
        let mut budget = 0.0;
        let delta = if m == n {
            let (v, e) = self.delta_term()?;
            budget += e;
            v
        } else {
            0.0
        };
        let (eis, e) = self.eisenstein.term(m, n);
        // beyond R: |τ| ≤ d, 1/|ζ(1+2ir)| ≤ 2 + 2 log(2 + r) as a generous bound
        let zeta_inv = 2.0 + 2.0 * (2.0 + self.r_max).ln();
        budget += e + 2.0 / PI * (divisor_count(m) * divisor_count(n)) as f64 * zeta_inv * zeta_inv * self.weight_tail;

        let (k, by_c, kb) = self.kloosterman_sum(m, n)?;
        budget += kb;
        Ok(GeometricBreakdown {
            m,
            n,
            delta_term: delta,
            eisenstein_term: eis,
            kloosterman_term: ComplexValue::new(0.0, k),
            c_used: by_c.len() as u64,
            kloosterman_by_c: by_c,
            c_max: self.c_max,
            r_max: self.r_max,
            error_budget: budget,
        })
    }

    /// Im Σ_c S(m,n;c)/c·D_H(4π√(mn)/c), its summands and the error budget
    /// of the sum (evaluation errors plus the tail beyond the last modulus).
    fn kloosterman_sum(&self, m: u64, n: u64) -> Result<(f64, Vec<f64>, f64)> {
        let scale = 4.0 * PI * ((m as f64) * (n as f64)).sqrt();
        let g = (gcd(m, n) as f64).sqrt();
        let tail_target = 0.5 * self.tol;
        let term_tol = 1e-3 * self.tol;
        let mut sum = CompensatedSum::new();
        let mut err = 0.0;
        let mut terms = Vec::new();
        let mut c = 1u64;
        loop {
            let x = scale / c as f64;
            let s = self.kloosterman(m, n, c);
            let (d, e) = self.weight.bessel_transform(x, term_tol)?;
            terms.push(s / c as f64 * d);
            sum.add(s / c as f64 * d);
            let weil = divisor_count(c) as f64 * g * (c as f64).sqrt();
            err += weil / c as f64 * e;
            if c >= C_MIN {
                let tail = 2.0 / PI * self.weight.majorant(x) * g * self.weil_tail_sum(c);
                if tail <= tail_target {
                    return Ok((sum.value(), terms, 2.0 / PI * err + tail));
                }
                if c >= self.c_max {
                    return Err(Error::BudgetOverflow { tail, tol: tail_target });
                }
            } else if c >= self.c_max {
                return Err(Error::BudgetOverflow { tail: f64::INFINITY, tol: tail_target });
            }
            c += 1;
        }
    }
}

/// max(1000, 32π√(mn)/T): the modulus beyond which X_c < T/8.
pub fn default_c_max(mn: u64, t: u32) -> u64 {
    let c = 32.0 * PI * (mn as f64).sqrt() / t.max(1) as f64;
    DEFAULT_C_MAX.max(c.ceil() as u64)
}

/// The geometric side for one (m, n).
pub fn geometric_side(m: u64, n: u64, weight: &AdmissibleWeight, c_max: u64, tol: f64) -> Result<GeometricBreakdown> {
    TraceEngine::new(weight.clone(), m * n, c_max, tol)?.geometric_side(m, n)
}

/// Σ_u H(t_u)/‖u‖²·λ_m(u)λ_n(u) over the data, with a tail budget for
/// forms beyond the last record.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSide {
    pub sum: f64,
    pub tail_budget: f64,
    /// False when the data are too few to fit the eigenvalue count, in which
    /// case `tail_budget` is infinite.
    pub tail_usable: bool,
    pub records_used: usize,
}

pub fn spectral_side(m: u64, n: u64, weight: &AdmissibleWeight, data: &[MaassFormRecord]) -> Result<SpectralSide> {
    if data.is_empty() {
        return Ok(SpectralSide { sum: 0.0, tail_budget: f64::INFINITY, tail_usable: false, records_used: 0 });
    }
    let mut sum = CompensatedSum::new();
    let mut inv_norm_max: f64 = 0.0;
    for r in data {
        let lm = r.require_lambda(m)?;
        let ln = r.require_lambda(n)?;
        sum.add(weight.eval(r.t) / r.norm_sq * lm * ln);
        inv_norm_max = inv_norm_max.max(1.0 / r.norm_sq);
    }
    let ts: Vec<f64> = data.iter().map(|r| r.t).collect();
    let Some(fit) = fit_count(&ts) else {
        return Ok(SpectralSide { sum: sum.value(), tail_budget: f64::INFINITY, tail_usable: false, records_used: data.len() });
    };
    // |λ_n| ≤ d(n)·n^{7/64}; twice the largest observed 1/‖u‖²
    let lam = |k: u64| divisor_count(k) as f64 * (k as f64).powf(7.0 / 64.0);
    let coeff = 2.0 * inv_norm_max * lam(m) * lam(n);
    let t_last = ts.iter().cloned().fold(0.0, f64::max);
    let (r_max, wtail) = weight.truncation(1e-14)?;
    let tail = if r_max > t_last {
        let n_pan = ((r_max - t_last) / (weight.decay_scale() / 4.0)).ceil().max(1.0) as usize;
        let breaks: Vec<f64> = (0..=n_pan).map(|i| t_last + (r_max - t_last) * i as f64 / n_pan as f64).collect();
        integrate_adaptive(|t| weight.eval(t).abs() * fit.density(t), &breaks, AdaptiveOptions::new(1e-16, 1e-6))?.value
    } else {
        0.0
    };
    // ∫_R^∞ |H|·ρ ≤ ρ(R)/R·∫_R^∞ r|H| for the linear density ρ
    let far = fit.density(r_max.max(t_last)) / r_max.max(1.0) * wtail;
    Ok(SpectralSide {
        sum: sum.value(),
        tail_budget: coeff * (tail + far),
        tail_usable: true,
        records_used: data.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceReport {
    pub m: u64,
    pub n: u64,
    pub weight: String,
    pub spectral: SpectralSide,
    pub geometric: GeometricBreakdown,
    pub discrepancy: f64,
    /// tail + error budgets plus the relative target times the larger side.
    pub budget: f64,
    pub passed: bool,
}

impl TraceReport {
    pub fn relative_discrepancy(&self) -> f64 {
        self.discrepancy / self.spectral.sum.abs().max(self.geometric.total().abs()).max(1e-300)
    }
}

/// Both sides of the formula and whether they agree within budget.
pub fn trace_report(m: u64, n: u64, engine: &TraceEngine, data: &[MaassFormRecord]) -> Result<TraceReport> {
    let geometric = engine.geometric_side(m, n)?;
    let spectral = spectral_side(m, n, engine.weight(), data)?;
    let discrepancy = (spectral.sum - geometric.total()).abs();
    let scale = spectral.sum.abs().max(geometric.total().abs());
    let budget = spectral.tail_budget + geometric.error_budget + TRACE_RELATIVE_TARGET * scale;
    Ok(TraceReport {
        m,
        n,
        weight: engine.weight().description(),
        passed: spectral.tail_usable && discrepancy <= budget,
        spectral,
        geometric,
        discrepancy,
        budget,
    })
}

/// [`trace_report`], failing with the discrepancy when the sides disagree.
pub fn verify_trace_identity(
    m: u64,
    n: u64,
    weight: &AdmissibleWeight,
    data: &[MaassFormRecord],
    c_max: u64,
    tol: f64,
) -> Result<TraceReport> {
    let engine = TraceEngine::new(weight.clone(), m * n, c_max, tol)?;
    let report = trace_report(m, n, &engine, data)?;
    if !report.passed {
        return Err(Error::VerificationFailure { discrepancy: report.discrepancy, budget: report.budget });
    }
    Ok(report)
}

/// Σ_u h_T(t_u)/‖u‖², from the geometric side with m = n = 1.
pub fn total_mass(family: &Arc<WeightFamily>, t: u32, c_max: u64, tol: f64) -> Result<GeometricBreakdown> {
    let w = AdmissibleWeight::spectral(family.clone(), t)?;
    TraceEngine::new(w, 1, c_max, tol)?.geometric_side(1, 1)
}

/// A weighted average with its error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Average {
    pub value: f64,
    pub error: f64,
}

/// Avg(λ_m; h_T/‖u‖²) = geometric(m, 1)/geometric(1, 1) for many m at one T.
#[derive(Clone, Debug)]
pub struct HeckeAverager {
    engine: TraceEngine,
    mass: GeometricBreakdown,
}

impl HeckeAverager {
    pub fn new(family: &Arc<WeightFamily>, t: u32, max_m: u64, c_max: u64, tol: f64) -> Result<Self> {
        let w = AdmissibleWeight::spectral(family.clone(), t)?;
        Self::with_weight(w, max_m, c_max, tol)
    }

    pub fn with_weight(weight: AdmissibleWeight, max_m: u64, c_max: u64, tol: f64) -> Result<Self> {
        let engine = TraceEngine::new(weight, max_m, c_max, tol)?;
        let mass = engine.geometric_side(1, 1)?;
        if !(mass.total() > 0.0) {
            return Err(Error::Domain { what: "total mass (expected positive)", value: mass.total() });
        }
        Ok(Self { engine, mass })
    }

    pub fn engine(&self) -> &TraceEngine {
        &self.engine
    }

    pub fn total_mass(&self) -> &GeometricBreakdown {
        &self.mass
    }

    /// Avg(λ_m); exactly 1 for m = 1.
    pub fn average(&self, m: u64) -> Result<Average> {
        if m == 1 {
            return Ok(Average { value: 1.0, error: 0.0 });
        }
        let g = self.engine.geometric_side(m, 1)?;
        let mass = self.mass.total();
        let value = g.total() / mass;
        let error = g.error_budget / mass + value.abs() * self.mass.error_budget / mass;
        Ok(Average { value, error })
    }
}

/// Avg(λ_m; h_T/‖u‖²) for a single m.
pub fn averaged_eigenvalue(m: u64, family: &Arc<WeightFamily>, t: u32, c_max: u64, tol: f64) -> Result<Average> {
    if m == 1 {
        return Ok(Average { value: 1.0, error: 0.0 });
    }
    HeckeAverager::new(family, t, m, c_max, tol)?.average(m)
}
