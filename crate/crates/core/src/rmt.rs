//! Katz–Sarnak one-level densities and admissible test functions.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quad::{integrate_adaptive, AdaptiveOptions, GaussLegendre};
use crate::sum::CompensatedSum;
use crate::weights::{Bump, BumpTransform};

/// Agreement required between the x-space and ξ-space routes.
pub const CROSS_ROUTE_TOL: f64 = 1e-7;

/// Classical symmetry types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    SoEven,
    SoOdd,
    O,
    U,
    Sp,
}

impl Group {
    pub const ALL: [Group; 5] = [Group::SoEven, Group::SoOdd, Group::O, Group::U, Group::Sp];

    pub fn name(self) -> &'static str {
        match self {
            Group::SoEven => "so-even",
            Group::SoOdd => "so-odd",
            Group::O => "o",
            Group::U => "u",
            Group::Sp => "sp",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "so-even" | "so_even" => Group::SoEven,
            "so-odd" | "so_odd" => Group::SoOdd,
            "o" => Group::O,
            "u" => Group::U,
            "sp" | "usp" => Group::Sp,
            _ => {
                return Err(Error::InvalidParameter {
                    name: "group",
                    reason: "expected one of so-even, so-odd, o, u, sp",
                })
            }
        })
    }
}

/// The sine kernel sin(πy)/(πy).
pub fn sine_kernel(y: f64) -> f64 {
    if y.abs() < 1e-8 {
        1.0 - (PI * y).powi(2) / 6.0
    } else {
        (PI * y).sin() / (PI * y)
    }
}

/// (smooth part of W_G at x, coefficient of δ_0).
pub fn rmt_density_eval(group: Group, x: f64) -> (f64, f64) {
    let k = sine_kernel(2.0 * x);
    match group {
        Group::SoEven => (1.0 + k, 0.0),
        Group::SoOdd => (1.0 - k, 1.0),
        Group::O => (1.0, 0.5),
        Group::U => (1.0, 0.0),
        Group::Sp => (1.0 - k, 0.0),
    }
}

/// Which side of the Fourier pair to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    X,
    Xi,
}

/// Even φ whose transform Φ̂ is a unit-height bump supported in (−η, η).
#[derive(Clone, Debug)]
pub struct TestFunction {
    eta: f64,
    transform: BumpTransform,
    /// Gauss–Legendre nodes on [0, cutoff] with weight·φ(node)
    grid: Vec<(f64, f64)>,
}

pub fn make_test_function(eta: f64) -> Result<TestFunction> {
    if !(eta > 0.0 && eta <= 4.0) {
        return Err(Error::Domain { what: "test-function support eta (expected 0 < eta <= 4)", value: eta });
    }
    let mut phi = TestFunction {
        eta,
        transform: BumpTransform::new(Bump::unit_height(eta)),
        grid: Vec::new(),
    };
    let gl = GaussLegendre::new(20);
    let x_max = phi.x_cutoff();
    // at most one period of e(x(η+1)) per panel
    let width = 1.0 / (eta + 1.0);
    let panels = (x_max / width).ceil() as usize;
    let h = x_max / panels as f64;
    let mut grid = Vec::with_capacity(panels * 20);
    for j in 0..panels {
        let c = h * (j as f64 + 0.5);
        for (n, w) in gl.nodes.iter().zip(&gl.weights) {
            let x = c + 0.5 * h * n;
            grid.push((x, 0.5 * h * w * phi.phi(x)));
        }
    }
    phi.grid = grid;
    Ok(phi)
}

impl TestFunction {
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Φ̂(ξ).
    pub fn phi_hat(&self, xi: f64) -> f64 {
        self.transform.bump().eval(xi)
    }

    /// φ(x) = ∫Φ̂(ξ)e(xξ)dξ; zero beyond the range where φ is below its
    /// rounding floor.
    pub fn phi(&self, x: f64) -> f64 {
        if x.abs() > self.x_cutoff() {
            return 0.0;
        }
        self.transform.eval_real(x).unwrap_or(0.0)
    }

    pub fn eval(&self, which: Space, t: f64) -> f64 {
        match which {
            Space::X => self.phi(t),
            Space::Xi => self.phi_hat(t),
        }
    }

    /// |φ(x)| ≲ e^{−√(4πηx)} is below 1e−15·φ(0) beyond this point.
    pub fn x_cutoff(&self) -> f64 {
        (35.0f64 * 35.0 / (4.0 * PI * self.eta)).min(self.transform.max_arg())
    }

    /// ∫_{a}^{b} Φ̂(ξ) dξ.
    pub fn phi_hat_integral(&self, a: f64, b: f64) -> f64 {
        let lo = a.max(-self.eta);
        let hi = b.min(self.eta);
        if hi <= lo {
            return 0.0;
        }
        let gl = GaussLegendre::new(20);
        let panels = ((hi - lo) / self.eta * 64.0).ceil() as usize;
        gl.integrate_panels(lo, hi, panels.max(1), |t| self.phi_hat(t))
    }

    /// ∫ f(x)φ(x) dx over ℝ for an even f, by panels on [0, cutoff].
    pub fn integrate_against<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let mut s = CompensatedSum::new();
        for (x, wphi) in &self.grid {
            s.add(f(*x) * wphi);
        }
        2.0 * s.value()
    }
}

/// ∫φ(x)W_G(x)dx, computed in x-space and checked against the ξ-space
/// closed form Ŵ_G.
pub fn rmt_expected_value(phi: &TestFunction, group: Group) -> Result<f64> {
    let x_route = rmt_expected_value_x(phi, group);
    let xi_route = rmt_expected_value_xi(phi, group);
    if (x_route - xi_route).abs() > CROSS_ROUTE_TOL {
        return Err(Error::CrossRouteDisagreement { first: x_route, second: xi_route });
    }
    Ok(x_route)
}

/// x-space route: quadrature of the smooth part plus the δ_0 mass.
pub fn rmt_expected_value_x(phi: &TestFunction, group: Group) -> f64 {
    let (_, delta) = rmt_density_eval(group, 0.0);
    let smooth = phi.integrate_against(|x| rmt_density_eval(group, x).0);
    smooth + delta * phi.phi(0.0)
}

/// ξ-space route: Ŵ of K(2x) is ½·1_{(−1,1)}.
pub fn rmt_expected_value_xi(phi: &TestFunction, group: Group) -> f64 {
    let one = phi.phi_hat(0.0);
    let at0 = phi.phi_hat_integral(-phi.eta, phi.eta);
    let inner = 0.5 * phi.phi_hat_integral(-1.0, 1.0);
    match group {
        Group::SoEven => one + inner,
        Group::SoOdd => one - inner + at0,
        Group::O => one + 0.5 * at0,
        Group::U => one,
        Group::Sp => one - inner,
    }
}

/// ∫φ² by adaptive quadrature (for Plancherel checks).
pub fn phi_l2_sq(phi: &TestFunction) -> Result<(f64, f64)> {
    let x = phi.integrate_against(|x| phi.phi(x));
    let xi = integrate_adaptive(
        |t| phi.phi_hat(t).powi(2),
        &[-phi.eta, 0.0, phi.eta],
        AdaptiveOptions::new(1e-14, 1e-13),
    )?
    .value;
    Ok((x, xi))
}
