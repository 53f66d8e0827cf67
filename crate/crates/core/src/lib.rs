//! Numerics for the one-level density of low-lying zeros of level-1 Maass
//! form L-functions.
//!
//! The crate is `no_std` (it needs `alloc`) and has no IO. It covers:
//!
//! - [`specfun`]: complex log-gamma, integer-order Bessel J, the scaled
//!   imaginary-order Bessel J_{2ir}(x)/cosh(πr), ζ to the right of the
//!   1-line and the Dunster leading asymptotic.
//! - [`weights`]: the band-limited weight h(x) = x^M s(x)², the spectral
//!   weight h_T and the odd companion g.
//! - [`arithmetic`]: primes, Kloosterman sums, divisor sums, Satake
//!   parameters and the Hecke prime-power recursion.
//! - [`rmt`]: Katz–Sarnak one-level kernels and admissible test functions.
//! - [`besseltransform`]: the integral D_J(X) = ∫ J_{2ir}(X) r h_T(r)/cosh(πr) dr
//!   by quadrature, residues and the Dunster asymptotic, the sums S_J, A_g,
//!   B_g and empirical bound scans.
//! - [`kuznetsov`]: geometric and spectral sides of the Kuznetsov formula.
//! - [`maassdata`]: spectral records and their validation.
//! - [`density`]: the explicit-formula pipeline compared against the
//!   orthogonal prediction.
//!
//! Everything is a pure function of its inputs. Scans expose per-point and
//! per-chunk entry points so that a caller can parallelise them and reduce
//! in index order.

#![no_std]
// `num_traits::Float` supplies the float methods; when std is also in the
// crate graph (tests, examples) its inherent methods win and the imports
// look unused.
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod arithmetic;
pub mod besseltransform;
pub mod density;
mod error;
pub mod kuznetsov;
pub mod maassdata;
pub mod quad;
pub mod rmt;
pub mod specfun;
pub mod sum;
pub mod weights;

pub use error::{Error, Result};

/// Complex scalar used for every complex intermediate (Γ arguments,
/// ζ(1+2ir), p^{ir}, Bessel values).
pub type ComplexValue = num_complex::Complex64;
