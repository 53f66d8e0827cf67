// With a Gaussian centred at 0 the spectral side is below 1e-15 (the first
// cusp form has t ≈ 9.53), so the geometric side alone must vanish.

use lowlying_core::kuznetsov::{AdmissibleWeight, TraceEngine};

fn engine(width: f64, max_mn: u64, tol: f64) -> TraceEngine {
    TraceEngine::new(AdmissibleWeight::gaussian(0.0, width, 3).unwrap(), max_mn, 4000, tol).unwrap()
}

#[test]
fn geometric_side_vanishes_without_cusp_forms() {
    for width in [1.0, 1.25] {
        let e = engine(width, 6, 1e-7);
        for (m, n) in [(1, 1), (2, 2), (2, 3)] {
            let g = e.geometric_side(m, n).unwrap();
            assert!(g.total().abs() <= g.error_budget.max(1e-7), "w = {width}, ({m}, {n}): {g:?}");
        }
    }
}

#[test]
fn geometric_side_is_symmetric_in_m_and_n() {
    let e = engine(1.5, 6, 1e-8);
    for (m, n) in [(1, 2), (1, 3), (2, 3)] {
        let (a, b) = (e.geometric_side(m, n).unwrap(), e.geometric_side(n, m).unwrap());
        assert!((a.total() - b.total()).abs() < 1e-10);
        assert!((a.eisenstein_term - b.eisenstein_term).abs() < 1e-10);
    }
}

#[test]
fn terms_cancel_between_large_pieces() {
    let g = engine(1.5, 1, 1e-8).geometric_side(1, 1).unwrap();
    let scale = g.delta_term.abs() + g.eisenstein_term.abs() + g.kloosterman_contribution().abs();
    assert!(scale > 1.0);
    assert!(g.total().abs() < 1e-8 * scale, "{g:?}");
}
