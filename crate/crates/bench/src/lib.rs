//! Fixtures shared by the benchmarks.

use hdw_core::fields::{smooth_bump_spinor, Vec3};
use hdw_core::{make_gamma_set, make_grid, Bump, GammaSet, Grid, SpinorField};

/// A centred bump of radius `a` in the upper spinor component.
pub struct DiracFixture {
    pub grid: Grid,
    pub gammas: GammaSet,
    pub psi0: SpinorField,
}

impl DiracFixture {
    pub fn new(n: usize, length: f64, points: usize, a: f64) -> Self {
        let grid = make_grid(n, length, points).expect("grid");
        let gammas = make_gamma_set(n).expect("gammas");
        let psi0 = smooth_bump_spinor(&grid, &Bump::centered(n, a), 0).expect("bump");
        Self { grid, gammas, psi0 }
    }

    /// `count` points spread along the first axis out to radius `r`.
    pub fn probe_line(&self, count: usize, r: f64) -> Vec<Vec3> {
        (0..count).map(|i| [r * i as f64 / count as f64, 0.0, 0.0]).collect()
    }
}
