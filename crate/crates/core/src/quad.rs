//! Gauss–Legendre panels and adaptive Gauss–Kronrod (G10/K21) quadrature.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Gauss–Legendre rule on [−1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// n-point rule, nodes by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// ∫_a^b f with this rule on a single panel.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = CompensatedSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s.add(w * f(c + h * x));
        }
        h * s.value()
    }

    /// ∫_a^b f split into `panels` equal panels.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let h = (b - a) / panels as f64;
        let mut s = CompensatedSum::new();
        for j in 0..panels {
            let lo = a + h * j as f64;
            s.add(self.integrate(lo, lo + h, &mut f));
        }
        s.value()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// The 21 Kronrod nodes on [a, b] with their Kronrod weights and the
/// embedded Gauss weights (zero off the Gauss nodes).
pub fn kronrod21_nodes(a: f64, b: f64) -> [(f64, f64, f64); 21] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(c, WGK[10] * h, 0.0); 21];
    for j in 0..10 {
        let x = h * XGK[j];
        let wg = if j % 2 == 1 { WG[j / 2] * h } else { 0.0 };
        out[2 * j] = (c - x, WGK[j] * h, wg);
        out[2 * j + 1] = (c + x, WGK[j] * h, wg);
    }
    out
}

/// K21 estimate, |K21 − G10| and the K21 estimate of ∫|f| on [a, b].
pub fn kronrod21<F: FnMut(f64) -> f64>(a: f64, b: f64, f: &mut F) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[10] * fc;
    let mut abs = WGK[10] * fc.abs();
    let mut g = 0.0;
    for j in 0..10 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        let s = f1 + f2;
        k += WGK[j] * s;
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs(), abs * h.abs())
}

/// Result of an integration with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
    depth: u32,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Refinement limits for [`integrate_adaptive`].
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Accept once the error is below this multiple of ∫|f|; the
    /// rounding floor of a sum of that size.
    pub noise: f64,
    pub max_depth: u32,
    pub max_pieces: usize,
}

impl AdaptiveOptions {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            noise: 0.0,
            max_depth: 40,
            max_pieces: 200_000,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }
}

/// Globally adaptive G10/K21 integration over the panels delimited by
/// `breaks` (ascending). The piece with the largest error is bisected
/// until the summed error meets `max(abs_tol, rel_tol·|value|)`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    opts: AdaptiveOptions,
) -> Result<Integral> {
    if breaks.len() < 2 {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    for w in breaks.windows(2) {
        let (v, e, abs) = kronrod21(w[0], w[1], &mut f);
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
            abs,
            depth: 0,
        });
    }
    loop {
        let (value, error, abs) = totals(&heap);
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Overflow { what: "quadrature integrand" });
        }
        let floor = opts.noise * abs;
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()).max(floor) {
            return Ok(Integral { value, error: error.max(floor) });
        }
        let worst = heap.pop().expect("nonempty");
        if worst.depth >= opts.max_depth || heap.len() + 2 > opts.max_pieces {
            heap.push(worst);
            let (value, error, _) = totals(&heap);
            return Err(Error::QuadratureNonConvergence { estimate: value, error });
        }
        let mid = 0.5 * (worst.a + worst.b);
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e, abs) = kronrod21(a, b, &mut f);
            heap.push(Piece {
                a,
                b,
                value: v,
                error: e,
                abs,
                depth: worst.depth + 1,
            });
        }
    }
}

fn totals(heap: &BinaryHeap<Piece>) -> (f64, f64, f64) {
    let mut v = CompensatedSum::new();
    let mut e = 0.0;
    let mut a = 0.0;
    for p in heap.iter() {
        v.add(p.value);
        e += p.error;
        a += p.abs;
    }
    (v.value(), e, a)
}
