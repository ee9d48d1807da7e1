//! Off-grid evaluation of periodic grid fields.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::Grid;
use crate::spectral::forward;

/// How samples between grid points are reconstructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Sum over all Fourier modes; exact for band-limited fields, O(Nⁿ) per sample.
    BandLimited,
    /// Tensor-product linear interpolation.
    Trilinear,
    /// Tensor-product Lagrange interpolation through `p` points per axis (even).
    Lagrange(usize),
}

impl Default for Interpolation {
    fn default() -> Self {
        Interpolation::Lagrange(8)
    }
}

impl std::fmt::Display for Interpolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Interpolation::BandLimited => write!(f, "band_limited"),
            Interpolation::Trilinear => write!(f, "trilinear"),
            Interpolation::Lagrange(p) => write!(f, "lagrange{p}"),
        }
    }
}

impl std::str::FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "band_limited" | "bandlimited" | "spectral" => Ok(Interpolation::BandLimited),
            "trilinear" | "linear" => Ok(Interpolation::Trilinear),
            _ => {
                let p = s
                    .strip_prefix("lagrange")
                    .and_then(|p| p.parse::<usize>().ok())
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown interpolation '{s}'")))?;
                Interpolation::Lagrange(p).validated()
            }
        }
    }
}

impl Interpolation {
    pub fn validated(self) -> Result<Self> {
        if let Interpolation::Lagrange(p) = self {
            if p < 2 || p % 2 == 1 || p > 16 {
                return Err(Error::InvalidArgument(format!("Lagrange order must be even in [2, 16], got {p}")));
            }
        }
        Ok(self)
    }

    fn stencil(self) -> usize {
        match self {
            Interpolation::Trilinear => 2,
            Interpolation::Lagrange(p) => p,
            Interpolation::BandLimited => 0,
        }
    }
}

/// Evaluates a fixed list of arrays on one grid at arbitrary positions.
///
/// All-zero arrays are dropped up front and reported as zero. The remaining
/// arrays are stored interleaved (array index fastest) so one stencil pass
/// reads every array.
#[derive(Clone, Debug)]
pub struct FieldSampler {
    grid: Grid,
    method: Interpolation,
    count: usize,
    active: Vec<usize>,
    data: Vec<Complex64>,
}

impl FieldSampler {
    pub fn new(grid: &Grid, arrays: &[&[Complex64]], method: Interpolation) -> Result<Self> {
        let method = method.validated()?;
        for a in arrays {
            if a.len() != grid.len() {
                return Err(Error::GridMismatch);
            }
        }
        let active: Vec<usize> =
            (0..arrays.len()).filter(|&i| arrays[i].iter().any(|v| *v != Complex64::default())).collect();
        let k = active.len();
        let mut data = vec![Complex64::default(); grid.len() * k];
        match method {
            Interpolation::BandLimited => {
                let scale = 1.0 / grid.len() as f64;
                for (slot, &i) in active.iter().enumerate() {
                    for (p, v) in forward(grid, arrays[i]).into_iter().enumerate() {
                        data[p * k + slot] = v * scale;
                    }
                }
            }
            _ => {
                for (slot, &i) in active.iter().enumerate() {
                    for (p, v) in arrays[i].iter().enumerate() {
                        data[p * k + slot] = *v;
                    }
                }
            }
        }
        Ok(Self { grid: grid.clone(), method, count: arrays.len(), active, data })
    }

    pub fn method(&self) -> Interpolation {
        self.method
    }

    /// Number of arrays (including the dropped zero ones).
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn sample(&self, x: &[f64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.count];
        let mut scratch = vec![Complex64::default(); self.active.len()];
        self.sample_into(x, &mut scratch, &mut out);
        out
    }

    /// Writes all array values at `x` into `out` (length [`count`](Self::count)).
    /// `scratch` must hold at least as many entries as there are nonzero arrays.
    pub fn sample_into(&self, x: &[f64], scratch: &mut [Complex64], out: &mut [Complex64]) {
        let k = self.active.len();
        let acc = &mut scratch[..k];
        acc.fill(Complex64::default());
        if k > 0 {
            match self.method {
                Interpolation::BandLimited => self.mode_sum(x, acc),
                _ => self.local(x, acc),
            }
        }
        out.fill(Complex64::default());
        for (slot, &i) in self.active.iter().enumerate() {
            out[i] = acc[slot];
        }
    }

    fn local(&self, x: &[f64], acc: &mut [Complex64]) {
        let n = self.grid.n();
        let p = self.method.stencil();
        let h = self.grid.spacing();
        let nn = self.grid.points() as i64;
        let half = (p / 2) as i64;
        let mut idx = [[0usize; 16]; 3];
        let mut w = [[0.0f64; 16]; 3];
        for a in 0..n {
            let u = (x[a] + 0.5 * self.grid.length()) / h;
            let base = u.floor();
            let frac = u - base;
            lagrange_weights(frac, p, &mut w[a][..p]);
            for j in 0..p {
                idx[a][j] = (base as i64 + j as i64 - half + 1).rem_euclid(nn) as usize;
            }
        }
        let k = acc.len();
        let np = self.grid.points();
        match n {
            1 => {
                for j in 0..p {
                    self.accumulate(idx[0][j], w[0][j], acc, k);
                }
            }
            2 => {
                for i in 0..p {
                    let row = idx[0][i] * np;
                    for j in 0..p {
                        self.accumulate(row + idx[1][j], w[0][i] * w[1][j], acc, k);
                    }
                }
            }
            _ => {
                for i in 0..p {
                    let plane = idx[0][i] * np;
                    for j in 0..p {
                        let row = (plane + idx[1][j]) * np;
                        let wij = w[0][i] * w[1][j];
                        for l in 0..p {
                            self.accumulate(row + idx[2][l], wij * w[2][l], acc, k);
                        }
                    }
                }
            }
        }
    }

    #[inline]
    fn accumulate(&self, flat: usize, weight: f64, acc: &mut [Complex64], k: usize) {
        let src = &self.data[flat * k..flat * k + k];
        for (a, s) in acc.iter_mut().zip(src) {
            *a += s * weight;
        }
    }

    fn mode_sum(&self, x: &[f64], acc: &mut [Complex64]) {
        let n = self.grid.n();
        let np = self.grid.points();
        let k = acc.len();
        let phases: Vec<Vec<Complex64>> = (0..n)
            .map(|a| {
                let d = x[a] - self.grid.coordinate(0);
                (0..np).map(|m| Complex64::from_polar(1.0, self.grid.wavenumber(m) * d)).collect()
            })
            .collect();
        let ones = vec![Complex64::new(1.0, 0.0); np];
        let p0 = &phases[0];
        let p1 = if n > 1 { &phases[1] } else { &ones };
        let p2 = if n > 2 { &phases[2] } else { &ones };
        let (n1, n2) = (if n > 1 { np } else { 1 }, if n > 2 { np } else { 1 });
        let mut flat = 0;
        for &e0 in p0.iter() {
            for &e1 in p1.iter().take(n1) {
                let e01 = e0 * e1;
                for &e2 in p2.iter().take(n2) {
                    let e = e01 * e2;
                    let src = &self.data[flat * k..flat * k + k];
                    for (a, s) in acc.iter_mut().zip(src) {
                        *a += s * e;
                    }
                    flat += 1;
                }
            }
        }
    }
}

/// Lagrange basis weights for the nodes −p/2+1, …, p/2 evaluated at `frac`.
fn lagrange_weights(frac: f64, p: usize, w: &mut [f64]) {
    let half = (p / 2) as f64;
    for (j, wj) in w.iter_mut().enumerate() {
        let sj = j as f64 - half + 1.0;
        let mut v = 1.0;
        for m in 0..p {
            if m != j {
                let sm = m as f64 - half + 1.0;
                v *= (frac - sm) / (sj - sm);
            }
        }
        *wj = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_grid;
    use std::f64::consts::PI;

    fn wave(grid: &Grid, k: [f64; 3]) -> Vec<Complex64> {
        (0..grid.len())
            .map(|i| {
                let x = grid.position(i);
                Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2])
            })
            .collect()
    }

    #[test]
    fn grid_points_are_reproduced() {
        for n in 1..=3 {
            let grid = make_grid(n, 2.0 * PI, 8).unwrap();
            let v = wave(&grid, [1.0, 2.0, -1.0]);
            for m in [Interpolation::Trilinear, Interpolation::Lagrange(6), Interpolation::BandLimited] {
                let s = FieldSampler::new(&grid, &[&v], m).unwrap();
                for flat in [0, 5, grid.len() - 1] {
                    let got = s.sample(&grid.position(flat))[0];
                    assert!((got - v[flat]).norm() < 1e-12, "n={n} {m}: {got} vs {}", v[flat]);
                }
            }
        }
    }

    #[test]
    fn band_limited_is_exact_off_grid() {
        let grid = make_grid(2, 2.0 * PI, 16).unwrap();
        let v = wave(&grid, [3.0, -2.0, 0.0]);
        let s = FieldSampler::new(&grid, &[&v], Interpolation::BandLimited).unwrap();
        let x = [0.123, -2.7];
        let exact = Complex64::from_polar(1.0, 3.0 * x[0] - 2.0 * x[1]);
        assert!((s.sample(&x)[0] - exact).norm() < 1e-12);
    }

    #[test]
    fn lagrange_converges_with_order() {
        let grid = make_grid(1, 2.0 * PI, 64).unwrap();
        let v = wave(&grid, [2.0, 0.0, 0.0]);
        let x = [0.4321];
        let exact = Complex64::from_polar(1.0, 2.0 * x[0]);
        let mut last = f64::INFINITY;
        for p in [2, 4, 8] {
            let s = FieldSampler::new(&grid, &[&v], Interpolation::Lagrange(p)).unwrap();
            let err = (s.sample(&x)[0] - exact).norm();
            assert!(err < last / 10.0, "p = {p}: {err}");
            last = err;
        }
        assert!(last < 1e-6, "{last}");
    }

    #[test]
    fn periodic_wrap_and_zero_arrays() {
        let grid = make_grid(1, 2.0 * PI, 32).unwrap();
        let v = wave(&grid, [1.0, 0.0, 0.0]);
        let zero = vec![Complex64::default(); grid.len()];
        let s = FieldSampler::new(&grid, &[&zero, &v], Interpolation::Lagrange(8)).unwrap();
        let a = s.sample(&[0.3]);
        let b = s.sample(&[0.3 + 2.0 * PI]);
        assert_eq!(a[0], Complex64::default());
        assert!((a[1] - b[1]).norm() < 1e-12);
    }

    #[test]
    fn parses_names() {
        assert_eq!("lagrange8".parse::<Interpolation>().unwrap(), Interpolation::Lagrange(8));
        assert_eq!("band_limited".parse::<Interpolation>().unwrap(), Interpolation::BandLimited);
        assert!("lagrange3".parse::<Interpolation>().is_err());
        assert!("cubic".parse::<Interpolation>().is_err());
        assert_eq!(Interpolation::Lagrange(4).to_string().parse::<Interpolation>().unwrap(), Interpolation::Lagrange(4));
    }
}
