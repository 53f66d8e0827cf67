//! The averaged one-level density through the explicit formula
//!
//! Avg(D₁) ≈ φ(0)/2 + Φ̂(0)·Avg(log(1+t²))/log T²
//!     − Σ_p 2log p/(√p log T)·Φ̂(log p/(2log T))·Avg(λ_p)
//!     − Σ_p 2log p/(p log T)·Φ̂(log p/log T)·Avg(λ_{p²}),
//!
//! with every average taken against h_T(t_u)/‖u‖² and computed from the
//! geometric side of the Kuznetsov formula. The O(log log T/log T)
//! remainder is not modelled.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::arithmetic::{primes_up_to, PRIME_CAP};
use crate::error::{Error, Result};
use crate::kuznetsov::{default_c_max, AdmissibleWeight, Average, HeckeAverager, TraceEngine};
use crate::rmt::{rmt_expected_value, Group, TestFunction};
use crate::sum::CompensatedSum;
use crate::weights::WeightFamily;

/// Support below which the family is proven orthogonal for M ≥ 8.
pub const MAIN_THRESHOLD: f64 = 1.25;
/// Primes per parallel task.
pub const PRIME_CHUNK: usize = 32;

/// 2 − 3/(2(M+1)).
pub fn extended_threshold(order: u32) -> f64 {
    2.0 - 3.0 / (2.0 * (order as f64 + 1.0))
}

/// Hecke averages at one prime (or prime square), split the way the
/// large-support argument splits the Kloosterman sum. All values are
/// already divided by the total mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimeAverage {
    pub p: u64,
    pub value: f64,
    pub error: f64,
    pub eisenstein: f64,
    /// Moduli c ≤ 4π√m/T, where X_c ≥ T.
    pub kloosterman_small_c: f64,
    pub kloosterman_large_c: f64,
}

/// Everything at one T that does not depend on η: the total mass, the
/// log-conductor average and the Hecke averager.
#[derive(Clone, Debug)]
pub struct DensityEngine {
    t: u32,
    order: u32,
    max_support: f64,
    averager: HeckeAverager,
    log_conductor: Average,
}

impl DensityEngine {
    /// Prepares averages for test functions with support up to `max_eta`.
    /// `tol` is relative to T², the scale of the total mass.
    pub fn new(family: &Arc<WeightFamily>, t: u32, max_eta: f64, c_max: u64, tol: f64) -> Result<Self> {
        if t < 5 || t.is_multiple_of(2) {
            return Err(Error::InvalidParameter { name: "T", reason: "must be odd and at least 5" });
        }
        if !(max_eta > 0.0 && max_eta < 2.0) {
            return Err(Error::Domain { what: "support eta (expected 0 < eta < 2)", value: max_eta });
        }
        let max_m = max_prime(t, max_eta)?;
        let abs_tol = tol * (t as f64).powi(2);
        let c_max = c_max.max(default_c_max(max_m, t));
        let averager = HeckeAverager::new(family, t, max_m.max(4), c_max, abs_tol)?;
        let log_weight = AdmissibleWeight::log_conductor(family.clone(), t)?;
        let log_side = TraceEngine::new(log_weight, 1, c_max, abs_tol)?.geometric_side(1, 1)?;
        let mass = averager.total_mass();
        let value = log_side.total() / mass.total();
        let log_conductor = Average {
            value,
            error: log_side.error_budget / mass.total() + value.abs() * mass.error_budget / mass.total(),
        };
        Ok(Self { t, order: family.order(), max_support: max_eta, averager, log_conductor })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn total_mass(&self) -> f64 {
        self.averager.total_mass().total()
    }

    /// Avg(log(1 + t²)).
    pub fn log_conductor_average(&self) -> Average {
        self.log_conductor
    }

    /// Primes entering the prime sum at support η: p < T^{2η}.
    pub fn primes(&self, eta: f64) -> Result<Vec<u64>> {
        self.check_support(eta)?;
        primes_up_to(max_prime(self.t, eta)?)
    }

    /// Primes entering the prime-square sum at support η: p < T^η.
    pub fn square_primes(&self, eta: f64) -> Result<Vec<u64>> {
        self.check_support(eta)?;
        let top = (self.t as f64).powf(eta).floor() as u64;
        primes_up_to(top)
    }

    fn check_support(&self, eta: f64) -> Result<()> {
        if eta > self.max_support {
            return Err(Error::Domain { what: "support eta beyond the engine's range", value: eta });
        }
        Ok(())
    }

    fn split_average(&self, m: u64, p: u64) -> Result<PrimeAverage> {
        let mass = self.total_mass();
        let g = self.averager.engine().geometric_side(m, 1)?;
        let a = self.averager.average(m)?;
        let c_split = 4.0 * PI * (m as f64).sqrt() / self.t as f64;
        let (small, large) = g.kloosterman_split(c_split);
        Ok(PrimeAverage {
            p,
            value: a.value,
            error: a.error,
            eisenstein: g.eisenstein_term / mass,
            kloosterman_small_c: small / mass,
            kloosterman_large_c: large / mass,
        })
    }

    /// Avg(λ_p) for a chunk of primes, in order.
    pub fn prime_averages(&self, primes: &[u64]) -> Result<Vec<PrimeAverage>> {
        primes.iter().map(|&p| self.split_average(p, p)).collect()
    }

    /// Avg(λ_{p²}) for a chunk of primes, in order.
    pub fn prime_square_averages(&self, primes: &[u64]) -> Result<Vec<PrimeAverage>> {
        primes.iter().map(|&p| self.split_average(p * p, p)).collect()
    }

    /// The four terms at support η from precomputed averages covering at
    /// least the primes below T^{2η} and T^η.
    pub fn assemble(&self, phi: &TestFunction, primes: &[PrimeAverage], squares: &[PrimeAverage]) -> Result<(DensityReport, SplitDiagnostics)> {
        let eta = phi.eta();
        self.check_support(eta)?;
        let t = self.t as f64;
        let log_t = t.ln();
        let phi0 = phi.phi(0.0);
        let hat0 = phi.phi_hat(0.0);

        let const_term = 0.5 * phi0;
        let conductor_term = hat0 * self.log_conductor.value / (2.0 * log_t);
        let mut error = hat0 * self.log_conductor.error / (2.0 * log_t);

        let split_at = t * t / (4.0 * PI * PI);
        let mut prime = CompensatedSum::new();
        let mut split = [CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new()];
        for a in primes {
            let lp = (a.p as f64).ln();
            let w = 2.0 * lp / ((a.p as f64).sqrt() * log_t) * phi.phi_hat(lp / (2.0 * log_t));
            if w == 0.0 {
                continue;
            }
            prime.add(w * a.value);
            error += w.abs() * a.error;
            split[3].add(w * a.eisenstein);
            if (a.p as f64) >= split_at {
                split[0].add(w * a.kloosterman_small_c);
                split[1].add(w * a.kloosterman_large_c);
            } else {
                split[2].add(w * (a.kloosterman_small_c + a.kloosterman_large_c));
            }
        }
        let mut prime_sq = CompensatedSum::new();
        for a in squares {
            let lp = (a.p as f64).ln();
            let w = 2.0 * lp / (a.p as f64 * log_t) * phi.phi_hat(lp / log_t);
            prime_sq.add(w * a.value);
            error += w.abs() * a.error;
        }

        let (prime_term, prime_sq_term) = (prime.value(), prime_sq.value());
        let total = const_term + conductor_term - prime_term - prime_sq_term;
        let prediction = hat0 + const_term;
        let orthogonal = [
            rmt_expected_value(phi, Group::SoEven)?,
            rmt_expected_value(phi, Group::SoOdd)?,
            rmt_expected_value(phi, Group::O)?,
        ];
        let report = DensityReport {
            t: self.t,
            eta,
            const_term,
            conductor_term,
            prime_term,
            prime_sq_term,
            total,
            rmt_o_prediction: prediction,
            deviation: (total - prediction).abs(),
            orthogonal_deviations: orthogonal.map(|v| (total - v).abs()),
            error,
            beyond_main_threshold: eta >= MAIN_THRESHOLD,
            beyond_extended_threshold: eta >= extended_threshold(self.order),
        };
        let diagnostics = SplitDiagnostics {
            t: self.t,
            eta,
            large_p_small_c: split[0].value(),
            large_p_large_c: split[1].value(),
            small_p: split[2].value(),
            eisenstein: split[3].value(),
        };
        Ok((report, diagnostics))
    }

    /// [`DensityEngine::assemble`] computing the averages itself.
    pub fn evaluate(&self, phi: &TestFunction) -> Result<(DensityReport, SplitDiagnostics)> {
        let primes = self.prime_averages(&self.primes(phi.eta())?)?;
        let squares = self.prime_square_averages(&self.square_primes(phi.eta())?)?;
        self.assemble(phi, &primes, &squares)
    }
}

/// Largest integer below T^{2η}, guarded against the sieve cap.
fn max_prime(t: u32, eta: f64) -> Result<u64> {
    let top = (t as f64).powf(2.0 * eta);
    if top > PRIME_CAP as f64 {
        return Err(Error::CapacityExceeded { what: "prime sum T^(2 eta)", requested: top as u64, cap: PRIME_CAP });
    }
    Ok(top.floor() as u64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub t: u32,
    pub eta: f64,
    /// φ(0)/2.
    pub const_term: f64,
    pub conductor_term: f64,
    pub prime_term: f64,
    pub prime_sq_term: f64,
    pub total: f64,
    /// Φ̂(0) + φ(0)/2.
    pub rmt_o_prediction: f64,
    pub deviation: f64,
    /// |total − prediction| for SO(even), SO(odd) and O.
    pub orthogonal_deviations: [f64; 3],
    /// Propagated numerical error of `total` (not the explicit-formula remainder).
    pub error: f64,
    pub beyond_main_threshold: bool,
    pub beyond_extended_threshold: bool,
}

/// The prime sum split into p ≥ T²/4π² with c ≤ 4π√p/T, the same primes
/// with larger c, and p < T²/4π², plus the Eisenstein share.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitDiagnostics {
    pub t: u32,
    pub eta: f64,
    pub large_p_small_c: f64,
    pub large_p_large_c: f64,
    pub small_p: f64,
    pub eisenstein: f64,
}

impl SplitDiagnostics {
    pub fn total(&self) -> f64 {
        self.large_p_small_c + self.large_p_large_c + self.small_p + self.eisenstein
    }
}

pub fn explicit_formula_average(t: u32, phi: &TestFunction, family: &Arc<WeightFamily>, c_max: u64, tol: f64) -> Result<DensityReport> {
    let engine = DensityEngine::new(family, t, phi.eta(), c_max, tol)?;
    Ok(engine.evaluate(phi)?.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceScan {
    pub reports: Vec<DensityReport>,
    pub splits: Vec<SplitDiagnostics>,
}

impl ConvergenceScan {
    /// Deviations for one η in the order the T values were given.
    pub fn deviations(&self, eta: f64) -> Vec<(u32, f64)> {
        self.reports.iter().filter(|r| r.eta == eta).map(|r| (r.t, r.deviation)).collect()
    }
}

/// Whether a sequence is nonincreasing apart from at most one rise of at
/// most `slack` relative.
pub fn nonincreasing_with_one_inversion(values: &[f64], slack: f64) -> bool {
    let mut inversions = 0;
    for w in values.windows(2) {
        if w[1] > w[0] {
            if w[1] > w[0] * (1.0 + slack) {
                return false;
            }
            inversions += 1;
        }
    }
    inversions <= 1
}

/// Sequential reference scan: reports ordered by T, then by η. Each T
/// computes its prime averages once for the largest η.
pub fn convergence_scan(ts: &[u32], phis: &[TestFunction], family: &Arc<WeightFamily>, c_max: u64, tol: f64) -> Result<ConvergenceScan> {
    let max_eta = phis.iter().map(|p| p.eta()).fold(0.0, f64::max);
    let mut scan = ConvergenceScan { reports: Vec::new(), splits: Vec::new() };
    for &t in ts {
        let engine = DensityEngine::new(family, t, max_eta, c_max, tol)?;
        let primes = engine.prime_averages(&engine.primes(max_eta)?)?;
        let squares = engine.prime_square_averages(&engine.square_primes(max_eta)?)?;
        for phi in phis {
            let (r, s) = engine.assemble(phi, &primes, &squares)?;
            scan.reports.push(r);
            scan.splits.push(s);
        }
    }
    Ok(scan)
}
