//! Quick invariant suite: small grids, seconds of runtime.

use std::f64::consts::PI;

use anyhow::Result;
use hdw_core::closedform::{evolve_dirac_1d, evolve_kg_1d};
use hdw_core::fields::{max_abs_difference, relative_l2_error, smooth_bump_spinor};
use hdw_core::huygens::{default_margin, DEFAULT_TAU};
use hdw_core::propagator::default_eps_schedule;
use hdw_core::spectral::{evolve_kg, kg_constraint_initial_derivative, DiracEvolver};
use hdw_core::{
    clifford_residual, dirac_kernel_momentum, huygens_report, l2_norm, make_gamma_set, make_grid, radial_profile,
    smooth_bump, zeta_limit, Bump, Classification, Complex64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    name: &'static str,
    value: f64,
    bound: f64,
}

fn clifford() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        worst = worst.max(clifford_residual(&make_gamma_set(n)?));
    }
    Ok(Check { name: "Clifford residual", value: worst, bound: f64::MIN_POSITIVE })
}

fn kernel() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        let g = make_gamma_set(n)?;
        for _ in 0..50 {
            let p: Vec<f64> = (0..n).map(|_| rng.random_range(-20.0..20.0)).collect();
            let (t1, t2) = (rng.random_range(0.0..5.0), rng.random_range(0.0..5.0));
            let k = dirac_kernel_momentum(&g, &p, t1 + t2);
            let composed = dirac_kernel_momentum(&g, &p, t1) * dirac_kernel_momentum(&g, &p, t2);
            worst = worst.max(k.unitarity_deviation()).max((k - composed).max_abs());
        }
    }
    Ok(Check { name: "kernel unitarity and group property", value: worst, bound: 1e-12 })
}

fn one_d_engines() -> Result<Check> {
    let grid = make_grid(1, 40.0, 1024)?;
    let g = make_gamma_set(1)?;
    let psi0 = smooth_bump_spinor(&grid, &Bump::new(vec![0.3], 0.5, 1.0), 0)?;
    let v = smooth_bump(&grid, &Bump::new(vec![-0.2], 0.6, 1.0))?;
    let f = smooth_bump(&grid, &Bump::new(vec![0.0], 0.5, 0.5))?;
    let ev = DiracEvolver::new(&g, &psi0)?;
    let mut worst: f64 = 0.0;
    for t in [0.7, 2.0, 5.5] {
        worst = worst.max(relative_l2_error(&evolve_dirac_1d(&psi0, t)?, &ev.at(t)?));
        worst = worst.max(relative_l2_error(&evolve_kg_1d(&f, &v, t)?, &evolve_kg(&f, &v, t)?));
    }
    Ok(Check { name: "1D closed form vs spectral (rel L2)", value: worst, bound: 1e-9 })
}

fn norm_conservation() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for (n, nn) in [(1, 256), (2, 64), (3, 32)] {
        let grid = make_grid(n, 8.0, nn)?;
        let g = make_gamma_set(n)?;
        let psi0 = smooth_bump_spinor(&grid, &Bump::centered(n, 1.5), 0)?;
        let ev = DiracEvolver::new(&g, &psi0)?;
        let n0 = l2_norm(&psi0);
        for t in [0.5, 1.5, 2.5] {
            worst = worst.max((l2_norm(&ev.at(t)?) - n0).abs() / n0);
        }
    }
    Ok(Check { name: "spectral norm drift", value: worst, bound: 1e-11 })
}

fn constraint() -> Result<Check> {
    let grid = make_grid(1, 16.0, 256)?;
    let g = make_gamma_set(1)?;
    let mut psi0 = smooth_bump_spinor(&grid, &Bump::centered(1, 1.5), 0)?;
    let lower = smooth_bump(&grid, &Bump::new(vec![0.4], 1.0, -0.5))?;
    psi0.component_mut(1).copy_from_slice(lower.values());
    let (g1, g2) = kg_constraint_initial_derivative(&psi0)?;
    let psi = DiracEvolver::new(&g, &psi0)?.at(1.3)?;
    let k1 = evolve_kg(&psi0.scalar(0), &g1, 1.3)?;
    let k2 = evolve_kg(&psi0.scalar(1), &g2, 1.3)?;
    let worst = max_abs_difference(&psi.scalar(0), &k1).max(max_abs_difference(&psi.scalar(1), &k2));
    Ok(Check { name: "Dirac components solve KG with constrained data", value: worst, bound: 1e-8 })
}

fn zeta() -> Result<Check> {
    let (t, r) = (2.0, 1.0);
    let lim = zeta_limit(2, t, r, &default_eps_schedule(t))?;
    let exact = Complex64::new(0.0, -1.0 / (2.0 * PI * 3f64.sqrt()));
    Ok(Check { name: "2D segment integral vs closed form", value: (lim.value - exact).norm(), bound: 1e-4 })
}

fn huygens_1d() -> Result<Check> {
    let grid = make_grid(1, 20.0, 2048)?;
    let g = make_gamma_set(1)?;
    let a = 0.5;
    let psi = DiracEvolver::new(&g, &smooth_bump_spinor(&grid, &Bump::centered(1, a), 0)?)?.at(3.0)?;
    let p = radial_profile(&psi, &[0.0])?;
    let r = huygens_report(&p, 3.0, a, default_margin(grid.spacing(), a), DEFAULT_TAU)?;
    let value = if r.classification == Classification::Huygens { r.tail_fraction } else { f64::INFINITY };
    Ok(Check { name: "1D Dirac tail fraction (huygens)", value, bound: 1e-8 })
}

/// Runs every check, prints one line each and reports whether all passed.
pub fn run() -> Result<bool> {
    let checks: [fn() -> Result<Check>; 7] =
        [clifford, kernel, one_d_engines, norm_conservation, constraint, zeta, huygens_1d];
    let mut all = true;
    for check in checks {
        let c = check()?;
        let pass = c.value < c.bound;
        all &= pass;
        let bound = if c.bound == f64::MIN_POSITIVE { "exactly 0".to_string() } else { format!("< {:.0e}", c.bound) };
        println!("{} {}: {:.3e} ({bound})", if pass { "PASS" } else { "FAIL" }, c.name, c.value);
    }
    Ok(all)
}
