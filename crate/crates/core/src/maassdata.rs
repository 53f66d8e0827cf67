//! Level-1 Maass form records and their validation. File formats live in
//! the std companion crate; this module only holds the data and the checks.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use num_traits::Float;

use crate::error::{Error, Result};

/// Two records closer than this in t are duplicates.
pub const DUPLICATE_T_GAP: f64 = 1e-9;
/// Slack on the Ramanujan-type bound |λ_p| ≤ 2p^{7/64}.
pub const KIM_SARNAK_SLACK: f64 = 1e-6;
/// Relative tolerance for λ₂λ₃ = λ₆.
pub const MULTIPLICATIVITY_TOL: f64 = 1e-6;
/// The only coefficient normalization accepted on ingest.
pub const HECKE_UNIT: &str = "hecke-unit";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "even" | "0" | "+1" | "1" => Ok(Parity::Even),
            "odd" | "-1" => Ok(Parity::Odd),
            _ => Err(Error::BadData { reason: "parity must be even or odd" }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaassFormRecord {
    pub t: f64,
    pub parity: Parity,
    /// λ_n keyed by n. λ₁ = 1 is implied when absent.
    pub lambdas: BTreeMap<u64, f64>,
    pub norm_sq: f64,
    pub source: String,
}

impl MaassFormRecord {
    pub fn lambda(&self, n: u64) -> Option<f64> {
        if n == 1 {
            return Some(*self.lambdas.get(&1).unwrap_or(&1.0));
        }
        self.lambdas.get(&n).copied()
    }

    /// λ_n, or a missing-coefficient error naming n and t.
    pub fn require_lambda(&self, n: u64) -> Result<f64> {
        self.lambda(n).ok_or(Error::MissingCoefficient { index: n, t: self.t })
    }
}

/// Sorts by t and rejects near-duplicates.
pub fn normalize_records(mut records: Vec<MaassFormRecord>) -> Result<Vec<MaassFormRecord>> {
    for r in &records {
        if !r.t.is_finite() {
            return Err(Error::BadData { reason: "non-finite spectral parameter" });
        }
    }
    records.sort_by(|a, b| a.t.total_cmp(&b.t));
    for w in records.windows(2) {
        if (w[1].t - w[0].t).abs() < DUPLICATE_T_GAP {
            return Err(Error::BadData { reason: "duplicate spectral parameter" });
        }
    }
    Ok(records)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    Normalization,
    KimSarnak,
    Multiplicativity,
    Nonnegative,
    PositiveNorm,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Normalization => "lambda_1 = 1",
            Check::KimSarnak => "|lambda_p| <= 2 p^(7/64)",
            Check::Multiplicativity => "lambda_2 lambda_3 = lambda_6",
            Check::Nonnegative => "t >= 0",
            Check::PositiveNorm => "norm_sq > 0",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecordValidation {
    pub t: f64,
    /// Failed checks; a check that could not run (missing data) is skipped.
    pub failures: Vec<Check>,
}

impl RecordValidation {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Least-squares fit N(t) ≈ a·t² + b·t + c of the eigenvalue count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

impl CountFit {
    pub fn eval(&self, t: f64) -> f64 {
        (self.a * t + self.b) * t + self.c
    }

    /// Derivative dN/dt, floored at zero.
    pub fn density(&self, t: f64) -> f64 {
        (2.0 * self.a * t + self.b).max(0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub records: Vec<RecordValidation>,
    pub count_fit: Option<CountFit>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(RecordValidation::passed)
    }

    pub fn failure_count(&self) -> usize {
        self.records.iter().filter(|r| !r.passed()).count()
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

pub fn validate_record(r: &MaassFormRecord) -> RecordValidation {
    let mut failures = Vec::new();
    if let Some(&l1) = r.lambdas.get(&1) {
        if (l1 - 1.0).abs() > 1e-9 {
            failures.push(Check::Normalization);
        }
    }
    for (&p, &l) in &r.lambdas {
        if is_prime(p) && !(l.abs() <= 2.0 * (p as f64).powf(7.0 / 64.0) + KIM_SARNAK_SLACK) {
            failures.push(Check::KimSarnak);
            break;
        }
    }
    if let (Some(l2), Some(l3), Some(l6)) = (r.lambdas.get(&2), r.lambdas.get(&3), r.lambdas.get(&6)) {
        if (l2 * l3 - l6).abs() > MULTIPLICATIVITY_TOL * (1.0 + l6.abs()) {
            failures.push(Check::Multiplicativity);
        }
    }
    if !(r.t >= 0.0) {
        failures.push(Check::Nonnegative);
    }
    if !(r.norm_sq > 0.0 && r.norm_sq.is_finite()) {
        failures.push(Check::PositiveNorm);
    }
    RecordValidation { t: r.t, failures }
}

/// Validates every record and fits the counting function when at least
/// four records are present. The result does not depend on input order.
pub fn validate_records(records: &[MaassFormRecord]) -> ValidationReport {
    let mut sorted: Vec<&MaassFormRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.t.total_cmp(&b.t));
    let out = sorted.iter().map(|r| validate_record(r)).collect();
    let ts: Vec<f64> = sorted.iter().map(|r| r.t).collect();
    ValidationReport {
        records: out,
        count_fit: fit_count(&ts),
    }
}

/// Fits N(t_j) = j (1-based) by least squares over sorted t.
pub fn fit_count(ts: &[f64]) -> Option<CountFit> {
    if ts.len() < 4 {
        return None;
    }
    // normal equations for the basis t², t, 1, with t scaled to [0, 1]
    let scale = ts.iter().cloned().fold(0.0, f64::max).max(1.0);
    let mut m = [[0.0f64; 3]; 3];
    let mut v = [0.0f64; 3];
    for (j, &t) in ts.iter().enumerate() {
        let s = t / scale;
        let basis = [s * s, s, 1.0];
        let n = (j + 1) as f64;
        for a in 0..3 {
            v[a] += basis[a] * n;
            for b in 0..3 {
                m[a][b] += basis[a] * basis[b];
            }
        }
    }
    let sol = solve3(m, v)?;
    let fit = CountFit {
        a: sol[0] / (scale * scale),
        b: sol[1] / scale,
        c: sol[2],
        residual: 0.0,
    };
    let ss: f64 = ts
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let d = fit.eval(t) - (j + 1) as f64;
            d * d
        })
        .sum();
    Some(CountFit {
        residual: (ss / ts.len() as f64).sqrt(),
        ..fit
    })
}

fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        v.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in 0..3 {
                    m[row][k] -= f * m[col][k];
                }
                v[row] -= f * v[col];
            }
        }
    }
    Some([v[0] / m[0][0], v[1] / m[1][1], v[2] / m[2][2]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn rec(t: f64, l: &[(u64, f64)]) -> MaassFormRecord {
        MaassFormRecord {
            t,
            parity: Parity::Even,
            lambdas: l.iter().cloned().collect(),
            norm_sq: 1.0,
            source: "test".to_string(),
        }
    }

    #[test]
    fn normalization_check() {
        let r = rec(9.5, &[(1, 0.99)]);
        assert_eq!(validate_record(&r).failures, [Check::Normalization]);
        assert!(validate_record(&rec(9.5, &[(1, 1.0)])).passed());
    }

    #[test]
    fn kim_sarnak_check() {
        // 2·2^{7/64} ≈ 2.157 < 5
        let r = rec(9.5, &[(2, 5.0)]);
        assert_eq!(validate_record(&r).failures, [Check::KimSarnak]);
        assert!(validate_record(&rec(9.5, &[(2, 2.15)])).passed());
        // composite indices are not subject to the bound
        assert!(validate_record(&rec(9.5, &[(4, 3.0)])).passed());
    }

    #[test]
    fn multiplicativity_check() {
        let ok = rec(9.5, &[(2, 0.5), (3, -1.2), (6, -0.6)]);
        assert!(validate_record(&ok).passed());
        let bad = rec(9.5, &[(2, 0.5), (3, -1.2), (6, 0.6)]);
        assert_eq!(validate_record(&bad).failures, [Check::Multiplicativity]);
    }

    #[test]
    fn negative_t_and_norm() {
        let mut r = rec(-1.0, &[]);
        r.norm_sq = 0.0;
        assert_eq!(validate_record(&r).failures, [Check::Nonnegative, Check::PositiveNorm]);
    }

    #[test]
    fn lambda_one_implied() {
        let r = rec(1.0, &[(2, 0.3)]);
        assert_eq!(r.lambda(1), Some(1.0));
        assert_eq!(r.lambda(2), Some(0.3));
        assert!(matches!(r.require_lambda(5), Err(Error::MissingCoefficient { index: 5, .. })));
    }

    #[test]
    fn sorting_and_duplicates() {
        let v = normalize_records(alloc::vec![rec(3.0, &[]), rec(1.0, &[]), rec(2.0, &[])]).unwrap();
        assert_eq!(v.iter().map(|r| r.t).collect::<Vec<_>>(), [1.0, 2.0, 3.0]);
        assert!(normalize_records(alloc::vec![rec(3.0, &[]), rec(3.0 + 1e-10, &[])]).is_err());
        assert!(normalize_records(Vec::new()).unwrap().is_empty());
    }

    #[test]
    fn count_fit_recovers_quadratic() {
        // t_j with j = t²/12 exactly
        let ts: Vec<f64> = (1..=60).map(|j| (12.0 * j as f64).sqrt()).collect();
        let fit = fit_count(&ts).unwrap();
        assert!((fit.a - 1.0 / 12.0).abs() < 1e-9, "{fit:?}");
        assert!(fit.b.abs() < 1e-7 && fit.c.abs() < 1e-6);
        assert!(fit.residual < 1e-8);
        assert!(fit_count(&ts[..3]).is_none());
    }

    #[test]
    fn validation_is_order_independent() {
        let a = alloc::vec![rec(2.0, &[(2, 5.0)]), rec(1.0, &[]), rec(3.0, &[]), rec(4.0, &[]), rec(5.0, &[])];
        let mut b = a.clone();
        b.reverse();
        assert_eq!(validate_records(&a), validate_records(&b));
        assert_eq!(validate_records(&a).failure_count(), 1);
    }
}
