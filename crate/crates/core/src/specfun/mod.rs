//! Special functions: complex log-gamma, Bessel J of integer and imaginary
//! order, ζ on Re s ≥ 1 and the Dunster phase.

mod bessel_imag;
mod bessel_int;
mod dunster;
mod gamma;
pub(crate) mod ode;
mod zeta;

pub use bessel_imag::{scaled_bessel_j_imag, ScaledBesselValue, SCALED_BESSEL_MAX_ORDER, SCALED_BESSEL_MAX_X};
pub use bessel_int::{
    bessel_j_int, bessel_j_int_integral_check, bessel_j_int_range, bessel_j_envelope,
    BESSEL_INT_MAX_X,
};
pub use dunster::{
    debye_u1, debye_u2, debye_u3, dunster_constant, dunster_corrections, dunster_leading_term,
    dunster_phase_derivative, dunster_xi,
    DunsterApprox, DunsterCorrections, DUNSTER_ERROR_CONSTANT,
};
pub use gamma::log_gamma_complex;
pub use zeta::zeta_right_of_one;
