//! Massless Dirac-Weyl and Klein-Gordon Cauchy problems in one, two and three
//! space dimensions.
//!
//! Two independent evolution routes are provided:
//!
//! * [`spectral`] applies the exact per-mode momentum-space kernels on a
//!   periodic grid;
//! * [`closedform`] evaluates position-space solution formulas built from the
//!   retarded propagators of [`propagator`] (shifts in 1D, bulk integrals over
//!   the disk in 2D, spherical means in 3D).
//!
//! [`huygens`] turns an evolved field into a radial mass profile and decides
//! whether the solution stays on the light-cone shell or leaves an interior
//! tail.

pub mod clifford;
pub mod closedform;
pub mod error;
pub mod fft;
pub mod fields;
pub mod huygens;
pub mod interp;
pub mod io;
pub mod propagator;
pub mod quadrature;
pub mod spectral;

pub use clifford::{clifford_residual, dirac_kernel_momentum, make_gamma_set, ComplexMatrix, GammaSet};
pub use error::{Error, Result};
pub use fields::{l2_norm, make_grid, smooth_bump, Bump, CauchyData, Field, Grid, ScalarField, SpinorField};
pub use huygens::{causality_check, huygens_report, radial_profile, Classification, HuygensReport, RadialProfile};
pub use num_complex::Complex64;
pub use propagator::{
    classify_singularities, dirac_green_1d, eval_zeta_integral, green_kg, zeta_limit, zeta_smear_test, PropagatorSample,
    RetardedPropagator,
    SingularityReport,
};
