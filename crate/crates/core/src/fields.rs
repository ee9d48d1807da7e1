//! Cubic periodic grids, scalar and spinor fields, compactly supported
//! initial data and norms.
//!
//! Points sit at xᵢ = −L/2 + i·h along every axis, h = L/N. Flat indices are
//! row-major with axis 0 slowest. Mode index m (in FFT order) carries the
//! wavenumber 2π·m/L for m < N/2 and 2π·(m − N)/L otherwise, so the Nyquist
//! mode is assigned the negative wavenumber −π/h.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positions and wavevectors are padded to three entries; unused axes are 0.
pub type Vec3 = [f64; 3];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    length: f64,
    points: usize,
}

pub fn make_grid(n: usize, length: f64, points: usize) -> Result<Grid> {
    Grid::new(n, length, points)
}

impl Grid {
    pub fn new(n: usize, length: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::UnsupportedDimension(n, "1, 2 or 3"));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("points per axis must be a power of two >= 8, got {points}")));
        }
        Ok(Self { n, length, points })
    }

    /// Space dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Total number of grid points, Nⁿ.
    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// hⁿ.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.spacing()
    }

    pub fn wavenumber(&self, m: usize) -> f64 {
        let m = m as i64;
        let nn = self.points as i64;
        let signed = if m < nn / 2 { m } else { m - nn };
        2.0 * PI * signed as f64 / self.length
    }

    /// Wavenumbers of one axis in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.points).map(|m| self.wavenumber(m)).collect()
    }

    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in (0..self.n).rev() {
            idx[a] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx[..self.n].iter().fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn position(&self, flat: usize) -> Vec3 {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 3];
        for a in 0..self.n {
            x[a] = self.coordinate(idx[a]);
        }
        x
    }

    pub fn wavevector(&self, flat: usize) -> Vec3 {
        let idx = self.multi_index(flat);
        let mut k = [0.0; 3];
        for a in 0..self.n {
            k[a] = self.wavenumber(idx[a]);
        }
        k
    }

    /// Nearest grid index (per axis, wrapped) to a position.
    pub fn nearest_index(&self, x: &[f64]) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in 0..self.n {
            let u = ((x[a] + 0.5 * self.length) / self.spacing()).round() as i64;
            idx[a] = u.rem_euclid(self.points as i64) as usize;
        }
        idx
    }

    /// Displacement reduced to [−L/2, L/2).
    pub fn minimal_image(&self, d: f64) -> f64 {
        d - self.length * (d / self.length + 0.5).floor()
    }

    /// Periodic distance between a grid point and an arbitrary position.
    pub fn distance(&self, flat: usize, center: &[f64]) -> f64 {
        let x = self.position(flat);
        (0..self.n).map(|a| self.minimal_image(x[a] - center[a]).powi(2)).sum::<f64>().sqrt()
    }

    pub(crate) fn pad(&self, v: &[f64]) -> Result<Vec3> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: v.len() });
        }
        let mut out = [0.0; 3];
        out[..self.n].copy_from_slice(v);
        Ok(out)
    }
}

/// Spinor dimension used for space dimension n.
pub fn spinor_dim(n: usize) -> usize {
    if n == 3 {
        4
    } else {
        2
    }
}

/// Anything made of one or more complex sample arrays on a grid.
pub trait Field {
    fn grid(&self) -> &Grid;
    fn component_slices(&self) -> Vec<&[Complex64]>;

    /// Σ over points and components of |value|².
    fn sum_sqr(&self) -> f64 {
        self.component_slices().iter().map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>()).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self { values: vec![Complex64::default(); grid.len()], grid: grid.clone() }
    }

    /// Samples a function of position.
    pub fn from_fn(grid: &Grid, f: impl Fn(Vec3) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
}

impl Field for ScalarField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn component_slices(&self) -> Vec<&[Complex64]> {
        vec![&self.values]
    }
}

/// Multi-component field, stored component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    grid: Grid,
    components: Vec<Vec<Complex64>>,
}

impl SpinorField {
    pub fn new(grid: Grid, components: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = spinor_dim(grid.n());
        if components.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: components.len() });
        }
        if let Some(c) = components.iter().find(|c| c.len() != grid.len()) {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: c.len() });
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: &Grid) -> Self {
        let dim = spinor_dim(grid.n());
        Self { components: vec![vec![Complex64::default(); grid.len()]; dim], grid: grid.clone() }
    }

    pub fn from_scalars(fields: &[&ScalarField]) -> Result<Self> {
        let grid = fields.first().ok_or_else(|| Error::InvalidArgument("no components".into()))?.grid.clone();
        if fields.iter().any(|f| f.grid != grid) {
            return Err(Error::GridMismatch);
        }
        Self::new(grid, fields.iter().map(|f| f.values.clone()).collect())
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.components[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.components[c]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.components
    }

    /// Component c as a scalar field.
    pub fn scalar(&self, c: usize) -> ScalarField {
        ScalarField { grid: self.grid.clone(), values: self.components[c].clone() }
    }

    /// Spinor at one grid point.
    pub fn at(&self, flat: usize) -> Vec<Complex64> {
        self.components.iter().map(|c| c[flat]).collect()
    }
}

impl Field for SpinorField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn component_slices(&self) -> Vec<&[Complex64]> {
        self.components.iter().map(|c| c.as_slice()).collect()
    }
}

/// Initial data of a Cauchy problem.
#[derive(Clone, Debug)]
pub enum CauchyData {
    /// ψ(0, x) = ψ₀(x).
    Dirac(SpinorField),
    /// φ(0, x) = f(x), ∂ₜφ(0, x) = g(x).
    KleinGordon { f: ScalarField, g: ScalarField },
}

impl CauchyData {
    pub fn klein_gordon(f: ScalarField, g: ScalarField) -> Result<Self> {
        if f.grid != g.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self::KleinGordon { f, g })
    }

    pub fn grid(&self) -> &Grid {
        match self {
            Self::Dirac(psi) => psi.grid(),
            Self::KleinGordon { f, .. } => f.grid(),
        }
    }
}

/// C^∞ bump A·exp(1 − 1/(1 − (r/a)²)) for r < a, zero elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(center: Vec<f64>, radius: f64, amplitude: f64) -> Self {
        Self { center, radius, amplitude }
    }

    /// Bump of unit amplitude centred at the origin.
    pub fn centered(n: usize, radius: f64) -> Self {
        Self::new(vec![0.0; n], radius, 1.0)
    }

    pub fn profile(&self, r: f64) -> f64 {
        if r >= self.radius {
            return 0.0;
        }
        let s = (r / self.radius).powi(2);
        self.amplitude * (1.0 - 1.0 / (1.0 - s)).exp()
    }

    fn sample(&self, grid: &Grid) -> Result<Vec<Complex64>> {
        if self.center.len() != grid.n() {
            return Err(Error::DimensionMismatch { expected: grid.n(), found: self.center.len() });
        }
        let limit = 0.25 * grid.length();
        if !(self.radius > 0.0) || self.radius >= limit {
            return Err(Error::BumpTooLarge { radius: self.radius, limit });
        }
        Ok((0..grid.len()).map(|i| Complex64::new(self.profile(grid.distance(i, &self.center)), 0.0)).collect())
    }
}

pub fn smooth_bump(grid: &Grid, bump: &Bump) -> Result<ScalarField> {
    Ok(ScalarField { values: bump.sample(grid)?, grid: grid.clone() })
}

/// Bump placed in one spinor component, all others zero.
pub fn smooth_bump_spinor(grid: &Grid, bump: &Bump, component: usize) -> Result<SpinorField> {
    let mut psi = SpinorField::zeros(grid);
    if component >= psi.dim() {
        return Err(Error::InvalidArgument(format!(
            "component {component} out of range for spinor dimension {}",
            psi.dim()
        )));
    }
    psi.components[component] = bump.sample(grid)?;
    Ok(psi)
}

/// √(hⁿ Σ |value|²) over points and components.
pub fn l2_norm<F: Field + ?Sized>(field: &F) -> f64 {
    (field.grid().cell_volume() * field.sum_sqr()).sqrt()
}

/// ‖a − b‖ / ‖b‖ over all components.
pub fn relative_l2_error<F: Field + ?Sized>(a: &F, b: &F) -> f64 {
    let (ca, cb) = (a.component_slices(), b.component_slices());
    assert_eq!(ca.len(), cb.len(), "component counts differ");
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (x, y) in ca.iter().zip(&cb) {
        for (u, v) in x.iter().zip(y.iter()) {
            diff += (u - v).norm_sqr();
            norm += v.norm_sqr();
        }
    }
    (diff / norm).sqrt()
}

/// Largest pointwise difference over all components.
pub fn max_abs_difference<F: Field + ?Sized>(a: &F, b: &F) -> f64 {
    a.component_slices()
        .iter()
        .zip(b.component_slices())
        .flat_map(|(x, y)| x.iter().zip(y.iter()).map(|(u, v)| (u - v).norm()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_arithmetic() {
        let g = make_grid(1, 20.0, 16).unwrap();
        assert_eq!(g.spacing(), 1.25);
        assert_eq!(g.coordinate(0), -10.0);
        assert_eq!(make_grid(2, 10.0, 256).unwrap().len(), 65536);
    }

    #[test]
    fn grid_preconditions() {
        assert!(matches!(make_grid(3, 10.0, 4), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(1, 10.0, 24), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(1, 0.0, 16), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(1, -1.0, 16), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(4, 1.0, 16), Err(Error::UnsupportedDimension(4, _))));
    }

    #[test]
    fn wavenumber_layout() {
        let g = make_grid(1, 2.0 * PI, 8).unwrap();
        let k: Vec<f64> = g.wavenumbers();
        assert_eq!(k, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn index_round_trip() {
        let g = make_grid(3, 1.0, 8).unwrap();
        for flat in [0, 1, 7, 8, 63, 64, 511] {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
    }

    #[test]
    fn bump_values() {
        let b = Bump::new(vec![0.0], 0.8, 2.5);
        assert_eq!(b.profile(0.0), 2.5);
        assert_eq!(b.profile(0.8), 0.0);
        assert_eq!(b.profile(1.3), 0.0);
        let r = 0.8 / 2f64.sqrt();
        assert!((b.profile(r) - 2.5 / std::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn bump_is_exactly_zero_outside_support() {
        let g = make_grid(2, 8.0, 64).unwrap();
        let b = Bump::new(vec![0.3, -0.2], 1.1, 1.0);
        let f = smooth_bump(&g, &b).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            if g.distance(i, &b.center) >= b.radius {
                assert_eq!(v.re.to_bits(), 0);
                assert_eq!(v.im.to_bits(), 0);
            }
        }
    }

    #[test]
    fn bump_radius_limit() {
        let g = make_grid(1, 8.0, 64).unwrap();
        let err = smooth_bump(&g, &Bump::centered(1, 2.0)).unwrap_err();
        assert!(matches!(err, Error::BumpTooLarge { .. }));
    }

    #[test]
    fn spinor_bump_component() {
        let g = make_grid(3, 8.0, 8).unwrap();
        let psi = smooth_bump_spinor(&g, &Bump::centered(3, 1.5), 2).unwrap();
        assert_eq!(psi.dim(), 4);
        assert!(psi.component(0).iter().all(|v| *v == Complex64::default()));
        assert!(psi.component(2).iter().any(|v| v.re > 0.0));
        assert!(smooth_bump_spinor(&g, &Bump::centered(3, 1.0), 4).is_err());
    }

    #[test]
    fn norms() {
        let g = make_grid(1, 8.0, 8).unwrap();
        assert_eq!(l2_norm(&ScalarField::zeros(&g)), 0.0);
        // h = 1, one sample of value 2.
        let mut f = ScalarField::zeros(&g);
        f.values_mut()[3] = Complex64::new(2.0, 0.0);
        assert_eq!(l2_norm(&f), 2.0);
    }

    #[test]
    fn minimal_image_wraps() {
        let g = make_grid(1, 10.0, 8).unwrap();
        assert!((g.minimal_image(7.0) + 3.0).abs() < 1e-15);
        assert!((g.minimal_image(-6.0) - 4.0).abs() < 1e-15);
        assert_eq!(g.minimal_image(1.5), 1.5);
    }
}
