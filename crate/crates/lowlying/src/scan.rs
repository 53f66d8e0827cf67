//! Parallel drivers over the core's per-point entry points. Every driver
//! collects into index order, so results do not depend on the pool size.

use std::sync::Arc;

use lowlying_core::besseltransform::{bound_scan_point, BesselTransform, ScanGrid, ScanKind, ScanReport};
use lowlying_core::density::{ConvergenceScan, DensityEngine, PRIME_CHUNK};
use lowlying_core::kuznetsov::{trace_report, AdmissibleWeight, GeometricBreakdown, TraceEngine, TraceReport};
use lowlying_core::maassdata::MaassFormRecord;
use lowlying_core::rmt::TestFunction;
use lowlying_core::weights::{SpectralWeight, WeightFamily};
use lowlying_core::Result;
use rayon::prelude::*;

pub fn bound_scan(which: ScanKind, grid: &ScanGrid, family: &Arc<WeightFamily>) -> Result<ScanReport> {
    let transforms: Vec<BesselTransform> = grid
        .ts
        .par_iter()
        .map(|&t| Ok(BesselTransform::new(SpectralWeight::new(family.clone(), t)?)?.with_asymptotic_grid()))
        .collect::<Result<_>>()?;
    let jobs: Vec<(f64, usize)> = transforms
        .iter()
        .enumerate()
        .flat_map(|(i, bt)| grid.xs.iter().map(move |x| (x.at(bt.t()), i)))
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(x, i)| bound_scan_point(which, x, &transforms[i]))
        .collect::<Result<Vec<_>>>()?;
    ScanReport::from_points(which, points)
}

pub fn total_mass_scan(ts: &[u32], family: &Arc<WeightFamily>, c_max: u64, tol: f64) -> Result<Vec<GeometricBreakdown>> {
    ts.par_iter()
        .map(|&t| lowlying_core::kuznetsov::total_mass(family, t, c_max, tol))
        .collect()
}

/// Reports for every (weight, m, n), weight-major.
pub fn trace_grid(
    weights: &[AdmissibleWeight],
    pairs: &[(u64, u64)],
    data: &[MaassFormRecord],
    c_max: u64,
    tol: f64,
) -> Result<Vec<TraceReport>> {
    let max_mn = pairs.iter().map(|(m, n)| m * n).max().unwrap_or(1);
    let engines: Vec<TraceEngine> = weights
        .par_iter()
        .map(|w| TraceEngine::new(w.clone(), max_mn, c_max, tol))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, u64, u64)> = (0..engines.len()).flat_map(|i| pairs.iter().map(move |&(m, n)| (i, m, n))).collect();
    jobs.par_iter().map(|&(i, m, n)| trace_report(m, n, &engines[i], data)).collect()
}

/// The convergence scan with prime averages computed in chunks of
/// [`PRIME_CHUNK`] in parallel.
pub fn convergence_scan(ts: &[u32], phis: &[TestFunction], family: &Arc<WeightFamily>, c_max: u64, tol: f64) -> Result<ConvergenceScan> {
    let max_eta = phis.iter().map(|p| p.eta()).fold(0.0, f64::max);
    let per_t = ts
        .par_iter()
        .map(|&t| {
            let engine = DensityEngine::new(family, t, max_eta, c_max, tol)?;
            let primes = engine.primes(max_eta)?;
            let averages: Vec<_> = primes
                .par_chunks(PRIME_CHUNK)
                .map(|chunk| engine.prime_averages(chunk))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            let squares = engine.prime_square_averages(&engine.square_primes(max_eta)?)?;
            phis.iter().map(|phi| engine.assemble(phi, &averages, &squares)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut scan = ConvergenceScan { reports: Vec::new(), splits: Vec::new() };
    for (r, s) in per_t.into_iter().flatten() {
        scan.reports.push(r);
        scan.splits.push(s);
    }
    Ok(scan)
}
