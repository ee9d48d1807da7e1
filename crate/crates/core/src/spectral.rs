//! Exact momentum-space evolution.
//!
//! Every requested time is reached with a single kernel application per
//! Fourier mode; there is no time stepping. Mode work is split into fixed
//! contiguous chunks and each mode is independent, so results do not depend on
//! the number of threads. Norms and energies are reduced sequentially in flat
//! mode order.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::clifford::{cos_sinc, dirac_kernel_momentum, dirac_kernel_rate, ComplexMatrix, GammaSet};
use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::fields::{Field, Grid, ScalarField, SpinorField, Vec3};

const MODE_CHUNK: usize = 4096;
const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn plan_for(grid: &Grid) -> FftPlan {
    FftPlan::new(grid.n(), grid.points())
}

pub(crate) fn forward(grid: &Grid, values: &[Complex64]) -> Vec<Complex64> {
    let mut out = values.to_vec();
    if out.iter().any(|v| *v != Complex64::default()) {
        plan_for(grid).forward(&mut out);
    }
    out
}

pub(crate) fn inverse_in_place(grid: &Grid, values: &mut [Complex64]) {
    plan_for(grid).inverse(values);
}

/// Applies `f(mode wavevector, values at that mode)` to every mode of a set of
/// equally long component arrays, in parallel over fixed chunks.
fn for_each_mode<F>(grid: &Grid, comps: &mut [Vec<Complex64>], f: F)
where
    F: Fn(Vec3, &mut [Complex64]) + Sync,
{
    let dim = comps.len();
    let k = grid.wavenumbers();
    let mut groups: Vec<Vec<&mut [Complex64]>> = Vec::new();
    for comp in comps.iter_mut() {
        for (ci, chunk) in comp.chunks_mut(MODE_CHUNK).enumerate() {
            if groups.len() <= ci {
                groups.push(Vec::with_capacity(dim));
            }
            groups[ci].push(chunk);
        }
    }
    groups.into_par_iter().enumerate().for_each(|(ci, mut group)| {
        let mut spinor = vec![Complex64::default(); dim];
        let len = group[0].len();
        for off in 0..len {
            let flat = ci * MODE_CHUNK + off;
            let idx = grid.multi_index(flat);
            let mut p = [0.0; 3];
            for a in 0..grid.n() {
                p[a] = k[idx[a]];
            }
            for c in 0..dim {
                spinor[c] = group[c][off];
            }
            f(p, &mut spinor);
            for c in 0..dim {
                group[c][off] = spinor[c];
            }
        }
    });
}

fn apply_matrix_field<K>(grid: &Grid, comps: &mut [Vec<Complex64>], kernel: K)
where
    K: Fn(&[f64]) -> ComplexMatrix + Sync,
{
    let n = grid.n();
    let dim = comps.len();
    for_each_mode(grid, comps, |p, spinor| {
        let m = kernel(&p[..n]);
        let mut out = [Complex64::default(); 4];
        m.apply(spinor, &mut out[..dim]);
        spinor.copy_from_slice(&out[..dim]);
    });
}

fn check_dirac(g: &GammaSet, psi: &SpinorField) -> Result<()> {
    if psi.grid().n() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), found: psi.grid().n() });
    }
    if psi.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: psi.dim() });
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Initial spinor held in momentum space; evaluates ψ(t) and ∂ₜψ(t).
#[derive(Clone, Debug)]
pub struct DiracEvolver {
    gammas: GammaSet,
    grid: Grid,
    spectrum: Vec<Vec<Complex64>>,
}

impl DiracEvolver {
    pub fn new(g: &GammaSet, psi0: &SpinorField) -> Result<Self> {
        check_dirac(g, psi0)?;
        let grid = psi0.grid().clone();
        let spectrum = psi0.components().iter().map(|c| forward(&grid, c)).collect();
        Ok(Self { gammas: g.clone(), grid, spectrum })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn with_kernel(&self, rate: bool, t: f64) -> Result<SpinorField> {
        check_time(t)?;
        let mut comps = self.spectrum.clone();
        let g = &self.gammas;
        if rate {
            apply_matrix_field(&self.grid, &mut comps, |p| dirac_kernel_rate(g, p, t));
        } else {
            apply_matrix_field(&self.grid, &mut comps, |p| dirac_kernel_momentum(g, p, t));
        }
        for c in comps.iter_mut() {
            inverse_in_place(&self.grid, c);
        }
        SpinorField::new(self.grid.clone(), comps)
    }

    /// ψ(t).
    pub fn at(&self, t: f64) -> Result<SpinorField> {
        self.with_kernel(false, t)
    }

    /// ∂ₜψ(t), from the differentiated kernel.
    pub fn rate(&self, t: f64) -> Result<SpinorField> {
        self.with_kernel(true, t)
    }

    /// ‖γ^μ ∂_μ ψ(t)‖ computed entirely in momentum space (Parseval).
    pub fn residual(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let g = &self.gammas;
        let n = self.grid.n();
        let mut psi = self.spectrum.clone();
        let mut dt = self.spectrum.clone();
        apply_matrix_field(&self.grid, &mut psi, |p| dirac_kernel_momentum(g, p, t));
        apply_matrix_field(&self.grid, &mut dt, |p| dirac_kernel_rate(g, p, t));
        Ok(residual_from_spectra(g, &self.grid, &psi, &dt, n))
    }
}

fn residual_from_spectra(
    g: &GammaSet,
    grid: &Grid,
    psi_hat: &[Vec<Complex64>],
    dt_hat: &[Vec<Complex64>],
    n: usize,
) -> f64 {
    let dim = g.dim();
    let mut sum = 0.0;
    let mut x = vec![Complex64::default(); dim];
    let mut y = vec![Complex64::default(); dim];
    let mut acc = vec![Complex64::default(); dim];
    for flat in 0..grid.len() {
        let p = grid.wavevector(flat);
        for c in 0..dim {
            x[c] = dt_hat[c][flat];
        }
        g.gamma(0).apply(&x, &mut acc);
        for j in 1..=n {
            for c in 0..dim {
                x[c] = I * p[j - 1] * psi_hat[c][flat];
            }
            g.gamma(j).apply(&x, &mut y);
            for c in 0..dim {
                acc[c] += y[c];
            }
        }
        sum += acc.iter().map(|v| v.norm_sqr()).sum::<f64>();
    }
    (grid.cell_volume() * sum / grid.len() as f64).sqrt()
}

/// ψ(t) = F⁻¹[K(p, t) ψ̂₀(p)].
pub fn evolve_dirac(g: &GammaSet, psi0: &SpinorField, t: f64) -> Result<SpinorField> {
    DiracEvolver::new(g, psi0)?.at(t)
}

/// ‖γ^μ ∂_μ ψ‖ for a field and its time derivative, with spectral spatial
/// derivatives.
pub fn dirac_residual(g: &GammaSet, psi: &SpinorField, dpsi_dt: &SpinorField) -> Result<f64> {
    check_dirac(g, psi)?;
    check_dirac(g, dpsi_dt)?;
    if psi.grid() != dpsi_dt.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = psi.grid();
    let psi_hat: Vec<_> = psi.components().iter().map(|c| forward(grid, c)).collect();
    let dt_hat: Vec<_> = dpsi_dt.components().iter().map(|c| forward(grid, c)).collect();
    Ok(residual_from_spectra(g, grid, &psi_hat, &dt_hat, grid.n()))
}

/// Klein-Gordon solution held in momentum space:
/// φ̂(t) = cos(|p|t) f̂ + sin(|p|t)/|p| ĝ.
#[derive(Clone, Debug)]
pub struct KgSolution {
    grid: Grid,
    f_hat: Vec<Complex64>,
    g_hat: Vec<Complex64>,
}

#[derive(Clone, Copy)]
enum KgQuantity {
    Value,
    Rate,
    Acceleration,
}

impl KgSolution {
    pub fn new(f: &ScalarField, g: &ScalarField) -> Result<Self> {
        if f.grid() != g.grid() {
            return Err(Error::GridMismatch);
        }
        let grid = f.grid().clone();
        Ok(Self { f_hat: forward(&grid, f.values()), g_hat: forward(&grid, g.values()), grid })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn spectrum(&self, q: KgQuantity, t: f64) -> Vec<Complex64> {
        let k = self.grid.wavenumbers();
        let n = self.grid.n();
        let grid = &self.grid;
        let mut out = vec![Complex64::default(); grid.len()];
        out.par_chunks_mut(MODE_CHUNK).enumerate().for_each(|(ci, chunk)| {
            for (off, v) in chunk.iter_mut().enumerate() {
                let flat = ci * MODE_CHUNK + off;
                let idx = grid.multi_index(flat);
                let p2: f64 = (0..n).map(|a| k[idx[a]] * k[idx[a]]).sum();
                let p = p2.sqrt();
                let (c, s) = cos_sinc(p, t);
                let (f, g) = (self.f_hat[flat], self.g_hat[flat]);
                *v = match q {
                    KgQuantity::Value => c * f + s * g,
                    // −|p| sin(|p|t) = −p² · sin(|p|t)/|p|
                    KgQuantity::Rate => -p2 * s * f + c * g,
                    KgQuantity::Acceleration => -p2 * (c * f + s * g),
                };
            }
        });
        out
    }

    fn to_field(&self, mut spec: Vec<Complex64>) -> ScalarField {
        inverse_in_place(&self.grid, &mut spec);
        ScalarField::new(self.grid.clone(), spec).expect("length matches grid")
    }

    pub fn value(&self, t: f64) -> Result<ScalarField> {
        check_time(t)?;
        Ok(self.to_field(self.spectrum(KgQuantity::Value, t)))
    }

    /// ∂ₜφ(t).
    pub fn rate(&self, t: f64) -> Result<ScalarField> {
        check_time(t)?;
        Ok(self.to_field(self.spectrum(KgQuantity::Rate, t)))
    }

    /// ∂ₓ along `axis` of φ(t).
    pub fn gradient(&self, t: f64, axis: usize) -> Result<ScalarField> {
        check_time(t)?;
        Ok(self.to_field(derivative_spectrum(&self.grid, self.spectrum(KgQuantity::Value, t), axis)))
    }

    /// ½‖∂ₜφ‖² + ½‖∇φ‖², evaluated through Parseval.
    pub fn energy(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let v = self.spectrum(KgQuantity::Value, t);
        let r = self.spectrum(KgQuantity::Rate, t);
        let mut sum = 0.0;
        for (flat, (vv, rr)) in v.iter().zip(&r).enumerate() {
            let k = self.grid.wavevector(flat);
            let p2: f64 = k.iter().map(|x| x * x).sum();
            sum += rr.norm_sqr() + p2 * vv.norm_sqr();
        }
        Ok(0.5 * self.grid.cell_volume() * sum / self.grid.len() as f64)
    }
}

/// φ(t) for initial value f and initial velocity g.
pub fn evolve_kg(f: &ScalarField, g: &ScalarField, t: f64) -> Result<ScalarField> {
    KgSolution::new(f, g)?.value(t)
}

fn derivative_spectrum(grid: &Grid, mut spec: Vec<Complex64>, axis: usize) -> Vec<Complex64> {
    let k = grid.wavenumbers();
    spec.par_chunks_mut(MODE_CHUNK).enumerate().for_each(|(ci, chunk)| {
        for (off, v) in chunk.iter_mut().enumerate() {
            let idx = grid.multi_index(ci * MODE_CHUNK + off);
            *v *= I * k[idx[axis]];
        }
    });
    spec
}

/// Spectral ∂ along `axis` (0-based).
pub fn spectral_derivative(grid: &Grid, values: &[Complex64], axis: usize) -> Vec<Complex64> {
    assert!(axis < grid.n(), "axis {axis} out of range");
    let mut out = derivative_spectrum(grid, forward(grid, values), axis);
    inverse_in_place(grid, &mut out);
    out
}

fn require_1d(grid: &Grid) -> Result<()> {
    if grid.n() != 1 {
        return Err(Error::UnsupportedDimension(grid.n(), "1"));
    }
    Ok(())
}

/// ψ = (∂ₜφ₁ − ∂ₓφ₂, ∂ₓφ₁ − ∂ₜφ₂) from two Klein-Gordon solutions.
pub fn dirac_from_kg_pair(phi1: &KgSolution, phi2: &KgSolution, t: f64) -> Result<SpinorField> {
    kg_pair_spinor(phi1, phi2, t, false)
}

/// ∂ₜ of [`dirac_from_kg_pair`].
pub fn dirac_from_kg_pair_rate(phi1: &KgSolution, phi2: &KgSolution, t: f64) -> Result<SpinorField> {
    kg_pair_spinor(phi1, phi2, t, true)
}

fn kg_pair_spinor(phi1: &KgSolution, phi2: &KgSolution, t: f64, rate: bool) -> Result<SpinorField> {
    require_1d(phi1.grid())?;
    if phi1.grid() != phi2.grid() {
        return Err(Error::GridMismatch);
    }
    check_time(t)?;
    let grid = phi1.grid();
    let (q_t, q_x) = if rate { (KgQuantity::Acceleration, KgQuantity::Rate) } else { (KgQuantity::Rate, KgQuantity::Value) };
    let d1 = phi1.spectrum(q_t, t);
    let d2 = phi2.spectrum(q_t, t);
    let x1 = derivative_spectrum(grid, phi1.spectrum(q_x, t), 0);
    let x2 = derivative_spectrum(grid, phi2.spectrum(q_x, t), 0);
    let mut upper: Vec<Complex64> = d1.iter().zip(&x2).map(|(a, b)| a - b).collect();
    let mut lower: Vec<Complex64> = x1.iter().zip(&d2).map(|(a, b)| a - b).collect();
    inverse_in_place(grid, &mut upper);
    inverse_in_place(grid, &mut lower);
    SpinorField::new(grid.clone(), vec![upper, lower])
}

/// Initial velocities (∂ₓψ₂⁰, ∂ₓψ₁⁰) that make each component of a 1D Dirac
/// spinor evolve as a Klein-Gordon field.
pub fn kg_constraint_initial_derivative(psi0: &SpinorField) -> Result<(ScalarField, ScalarField)> {
    let grid = psi0.grid();
    require_1d(grid)?;
    let g1 = spectral_derivative(grid, psi0.component(1), 0);
    let g2 = spectral_derivative(grid, psi0.component(0), 0);
    Ok((ScalarField::new(grid.clone(), g1)?, ScalarField::new(grid.clone(), g2)?))
}

/// Samples of f(x + s) for a periodic field: a cyclic roll when s is a whole
/// number of cells, otherwise a Fourier phase shift.
pub fn shift(grid: &Grid, values: &[Complex64], s: f64) -> Vec<Complex64> {
    assert_eq!(grid.n(), 1, "shift is one-dimensional");
    let h = grid.spacing();
    let cells = (s / h).round();
    if (s / h - cells).abs() <= 1e-12 * (1.0 + cells.abs()) {
        let nn = grid.points() as i64;
        let c = (cells as i64).rem_euclid(nn) as usize;
        let mut out = values.to_vec();
        out.rotate_left(c);
        return out;
    }
    let mut spec = forward(grid, values);
    for (m, v) in spec.iter_mut().enumerate() {
        *v *= Complex64::from_polar(1.0, grid.wavenumber(m) * s);
    }
    inverse_in_place(grid, &mut spec);
    spec
}
