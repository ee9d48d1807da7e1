//! Position-space evolution from explicit solution formulas.
//!
//! * 1D: translation of the light-cone combinations of the initial data.
//! * 2D: ψ = ∂ₜ(W ∗ ψ₀) + W ∗ (−γ⁰γ·∇ψ₀), where W ∗ f is the disk average
//!   against 1/(2π√(t² − |y|²)). The substitution |y| = t·sin θ removes the
//!   edge singularity and ∂ₜ is a centred difference with step h/4.
//! * 3D: the spherical-means form
//!   ψ = M_t[ψ₀] + t·M_t[ω·∇ψ₀] − t·M_t[γ⁰γ·∇ψ₀].
//!
//! The 2D and 3D engines return spinor values at requested points only.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::GammaSet;
use crate::error::{Error, Result};
use crate::fields::{Field, Grid, ScalarField, SpinorField, Vec3};
use crate::interp::{FieldSampler, Interpolation};
use crate::propagator::dirac_green_1d;
use crate::quadrature::{composite_gauss_legendre, gauss_legendre};
use crate::spectral::{forward, inverse_in_place, shift, spectral_derivative};

fn require(grid: &Grid, n: usize) -> Result<()> {
    if grid.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: grid.n() });
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// ψ(t, x) = ½((φ₀+χ₀)(x+t) + (φ₀−χ₀)(x−t), (φ₀+χ₀)(x+t) − (φ₀−χ₀)(x−t)).
pub fn evolve_dirac_1d(psi0: &SpinorField, t: f64) -> Result<SpinorField> {
    let grid = psi0.grid();
    require(grid, 1)?;
    check_time(t)?;
    let (phi, chi) = (psi0.component(0), psi0.component(1));
    let plus: Vec<Complex64> = phi.iter().zip(chi).map(|(a, b)| a + b).collect();
    let minus: Vec<Complex64> = phi.iter().zip(chi).map(|(a, b)| a - b).collect();
    let p = shift(grid, &plus, t);
    let m = shift(grid, &minus, -t);
    let upper = p.iter().zip(&m).map(|(a, b)| 0.5 * (a + b)).collect();
    let lower = p.iter().zip(&m).map(|(a, b)| 0.5 * (a - b)).collect();
    SpinorField::new(grid.clone(), vec![upper, lower])
}

/// Convolution of ψ₀ with the two light-cone shells of the 1D Dirac
/// propagator: W₋ψ₀(x+t) + W₊ψ₀(x−t).
pub fn propagate_with_d1(psi0: &SpinorField, t: f64) -> Result<SpinorField> {
    let grid = psi0.grid();
    require(grid, 1)?;
    check_time(t)?;
    let [(_, w_left), (_, w_right)] = dirac_green_1d(t);
    let left: Vec<Vec<Complex64>> = psi0.components().iter().map(|c| shift(grid, c, t)).collect();
    let right: Vec<Vec<Complex64>> = psi0.components().iter().map(|c| shift(grid, c, -t)).collect();
    // Weights are ½ times a ±1 matrix; apply the ±1 part and halve once.
    let out = (0..2)
        .map(|row| {
            (0..grid.len())
                .map(|i| {
                    let mut l = Complex64::default();
                    let mut r = Complex64::default();
                    for col in 0..2 {
                        l += 2.0 * w_left[row][col] * left[col][i];
                        r += 2.0 * w_right[row][col] * right[col][i];
                    }
                    0.5 * (l + r)
                })
                .collect()
        })
        .collect();
    SpinorField::new(grid.clone(), out)
}

/// φ(t, x) = ½(f(x+t) + f(x−t)) + ½∫_{x−t}^{x+t} g.
///
/// The antiderivative of the zero-mean part of g is built spectrally; the
/// mean of g contributes mean(g)·t.
pub fn evolve_kg_1d(f: &ScalarField, g: &ScalarField, t: f64) -> Result<ScalarField> {
    let grid = f.grid();
    require(grid, 1)?;
    if g.grid() != grid {
        return Err(Error::GridMismatch);
    }
    check_time(t)?;
    let mut big_g = forward(grid, g.values());
    let mean = big_g[0] / grid.len() as f64;
    big_g[0] = Complex64::default();
    for (m, v) in big_g.iter_mut().enumerate().skip(1) {
        *v /= Complex64::new(0.0, grid.wavenumber(m));
    }
    inverse_in_place(grid, &mut big_g);
    let fp = shift(grid, f.values(), t);
    let fm = shift(grid, f.values(), -t);
    let gp = shift(grid, &big_g, t);
    let gm = shift(grid, &big_g, -t);
    let values = (0..grid.len()).map(|i| 0.5 * (fp[i] + fm[i]) + 0.5 * (gp[i] - gm[i]) + mean * t).collect();
    ScalarField::new(grid.clone(), values)
}

/// Product rule on the unit sphere: Gauss-Legendre in cos θ times the
/// trapezoid rule in azimuth. Weights sum to one (a mean, not an integral).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereRule {
    pub polar: usize,
    pub azimuthal: usize,
}

impl Default for SphereRule {
    fn default() -> Self {
        Self { polar: 32, azimuthal: 64 }
    }
}

impl SphereRule {
    pub fn nodes(&self) -> Result<Vec<(Vec3, f64)>> {
        if self.polar == 0 || self.azimuthal == 0 {
            return Err(Error::InvalidArgument("sphere rule orders must be positive".into()));
        }
        let (x, w) = gauss_legendre(self.polar);
        let mut out = Vec::with_capacity(self.polar * self.azimuthal);
        for (c, wc) in x.iter().zip(&w) {
            let s = (1.0 - c * c).sqrt();
            for k in 0..self.azimuthal {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / self.azimuthal as f64;
                out.push(([s * phi.cos(), s * phi.sin(), *c], 0.5 * wc / self.azimuthal as f64));
            }
        }
        Ok(out)
    }
}

/// Rule for the disk integral in the variables (θ, α), |y| = τ sin θ:
/// composite Gauss-Legendre in θ ∈ [0, π/2] (panels of 16 nodes when
/// `polar` is a multiple of 16) times the trapezoid rule in α.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiskRule {
    pub polar: usize,
    pub azimuthal: usize,
}

impl Default for DiskRule {
    fn default() -> Self {
        Self { polar: 128, azimuthal: 256 }
    }
}

impl DiskRule {
    /// Nodes (sin θ·cos α, sin θ·sin α) and weights of ∫dα∫dθ sin θ (·)/2π.
    pub fn nodes(&self) -> Result<Vec<([f64; 2], f64)>> {
        if self.polar == 0 || self.azimuthal == 0 {
            return Err(Error::InvalidArgument("disk rule orders must be positive".into()));
        }
        let (order, panels) = if self.polar % 16 == 0 { (16, self.polar / 16) } else { (self.polar, 1) };
        let (th, wt) = composite_gauss_legendre(order, panels, 0.0, 0.5 * std::f64::consts::PI);
        let mut out = Vec::with_capacity(self.polar * self.azimuthal);
        for (t, w) in th.iter().zip(&wt) {
            let s = t.sin();
            for k in 0..self.azimuthal {
                let a = 2.0 * std::f64::consts::PI * k as f64 / self.azimuthal as f64;
                out.push(([s * a.cos(), s * a.sin()], w * s / self.azimuthal as f64));
            }
        }
        Ok(out)
    }
}

/// Settings shared by the 2D and 3D engines.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormOptions {
    pub interpolation: Interpolation,
    pub sphere: SphereRule,
    pub disk: DiskRule,
    /// Radius of the initial support about the evaluation centre; when set,
    /// the light cone is checked against the periodic wrap bound.
    pub support_radius: Option<f64>,
}

impl ClosedFormOptions {
    fn check_wrap(&self, grid: &Grid, reach: f64) -> Result<()> {
        if let Some(a) = self.support_radius {
            let half = 0.5 * grid.length();
            if reach + a > half {
                return Err(Error::WrapBound { t: reach, radius: a, half_length: half });
            }
        }
        Ok(())
    }
}

fn check_dirac(g: &GammaSet, psi0: &SpinorField, n: usize) -> Result<()> {
    require(psi0.grid(), n)?;
    if g.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g.n() });
    }
    if psi0.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: psi0.dim() });
    }
    Ok(())
}

fn gradients(psi0: &SpinorField) -> Vec<Vec<Vec<Complex64>>> {
    let grid = psi0.grid();
    (0..grid.n())
        .map(|axis| {
            psi0.components()
                .iter()
                .map(|c| {
                    if c.iter().all(|v| *v == Complex64::default()) {
                        c.clone()
                    } else {
                        spectral_derivative(grid, c, axis)
                    }
                })
                .collect()
        })
        .collect()
}

/// Spherical-means evaluation of the 3D Dirac solution at `points`.
pub fn evolve_dirac_3d(
    g: &GammaSet,
    psi0: &SpinorField,
    t: f64,
    points: &[Vec3],
    opts: &ClosedFormOptions,
) -> Result<Vec<Vec<Complex64>>> {
    check_dirac(g, psi0, 3)?;
    check_time(t)?;
    let grid = psi0.grid();
    opts.check_wrap(grid, t)?;
    let dim = psi0.dim();
    let grads = gradients(psi0);
    let mut arrays: Vec<&[Complex64]> = psi0.components().iter().map(|c| c.as_slice()).collect();
    for gj in &grads {
        arrays.extend(gj.iter().map(|c| c.as_slice()));
    }
    let sampler = FieldSampler::new(grid, &arrays, opts.interpolation)?;
    drop(grads);
    let rule = opts.sphere.nodes()?;
    let count = sampler.count();
    let out = points
        .par_iter()
        .map(|x| {
            let mut scratch = vec![Complex64::default(); count];
            let mut vals = vec![Complex64::default(); count];
            // [ψ₀ + t ω·∇ψ₀ | ∂₁ψ₀ | ∂₂ψ₀ | ∂₃ψ₀] means
            let mut mean = vec![Complex64::default(); 4 * dim];
            for (w, weight) in &rule {
                let y = [x[0] + t * w[0], x[1] + t * w[1], x[2] + t * w[2]];
                sampler.sample_into(&y, &mut scratch, &mut vals);
                for c in 0..dim {
                    let radial = w[0] * vals[dim + c] + w[1] * vals[2 * dim + c] + w[2] * vals[3 * dim + c];
                    mean[c] += weight * (vals[c] + t * radial);
                    for j in 0..3 {
                        mean[(j + 1) * dim + c] += weight * vals[(j + 1) * dim + c];
                    }
                }
            }
            let mut psi = mean[..dim].to_vec();
            let mut tmp = vec![Complex64::default(); dim];
            for j in 0..3 {
                g.alpha(j + 1).apply(&mean[(j + 1) * dim..(j + 2) * dim], &mut tmp);
                for c in 0..dim {
                    psi[c] -= t * tmp[c];
                }
            }
            psi
        })
        .collect();
    Ok(out)
}

/// Bulk-integral evaluation of the 2D Dirac solution at `points`.
pub fn evolve_dirac_2d(
    g: &GammaSet,
    psi0: &SpinorField,
    t: f64,
    points: &[Vec3],
    opts: &ClosedFormOptions,
) -> Result<Vec<Vec<Complex64>>> {
    check_dirac(g, psi0, 2)?;
    check_time(t)?;
    let grid = psi0.grid();
    let delta = 0.25 * grid.spacing();
    opts.check_wrap(grid, t + delta)?;
    let dim = psi0.dim();
    // Dψ₀ = −Σⱼ γ⁰γʲ ∂ⱼψ₀ on the grid.
    let grads = gradients(psi0);
    let mut d_psi = vec![vec![Complex64::default(); grid.len()]; dim];
    let mut x = vec![Complex64::default(); dim];
    let mut y = vec![Complex64::default(); dim];
    for i in 0..grid.len() {
        for (j, gj) in grads.iter().enumerate() {
            for c in 0..dim {
                x[c] = gj[c][i];
            }
            g.alpha(j + 1).apply(&x, &mut y);
            for c in 0..dim {
                d_psi[c][i] -= y[c];
            }
        }
    }
    drop(grads);
    let mut arrays: Vec<&[Complex64]> = psi0.components().iter().map(|c| c.as_slice()).collect();
    arrays.extend(d_psi.iter().map(|c| c.as_slice()));
    let sampler = FieldSampler::new(grid, &arrays, opts.interpolation)?;
    let rule = opts.disk.nodes()?;
    let count = sampler.count();
    let out = points
        .par_iter()
        .map(|x| {
            let mut scratch = vec![Complex64::default(); count];
            let mut vals = vec![Complex64::default(); count];
            // I(τ)[f](x) = τ · Σ w f(x + τ·node); τ = t + δ, t − δ, t.
            let taus = [t + delta, t - delta, t];
            let mut acc = [vec![Complex64::default(); dim], vec![Complex64::default(); dim], vec![Complex64::default(); dim]];
            for (node, weight) in &rule {
                for (slot, tau) in taus.iter().enumerate() {
                    let p = [x[0] + tau * node[0], x[1] + tau * node[1]];
                    sampler.sample_into(&p, &mut scratch, &mut vals);
                    let offset = if slot == 2 { dim } else { 0 };
                    for c in 0..dim {
                        acc[slot][c] += weight * vals[offset + c];
                    }
                }
            }
            (0..dim)
                .map(|c| {
                    let hi = taus[0] * acc[0][c];
                    let lo = taus[1] * acc[1][c];
                    (hi - lo) / (2.0 * delta) + t * acc[2][c]
                })
                .collect()
        })
        .collect();
    Ok(out)
}
