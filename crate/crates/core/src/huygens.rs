//! Radial mass profiles and the shell / tail decomposition.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::Field;

const BIN_CHUNK: usize = 1 << 15;

/// Mass hⁿ·|ψ|² binned by periodic distance from a centre; bin k covers
/// [k·w, (k+1)·w) with w the grid spacing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialProfile {
    pub center: Vec<f64>,
    pub bin_width: f64,
    pub half_length: f64,
    pub masses: Vec<f64>,
}

impl RadialProfile {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn lower_edge(&self, k: usize) -> f64 {
        k as f64 * self.bin_width
    }

    pub fn upper_edge(&self, k: usize) -> f64 {
        (k + 1) as f64 * self.bin_width
    }

    /// CSV with columns `r,mass`, r being the bin centre.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,mass")?;
        for (k, m) in self.masses.iter().enumerate() {
            writeln!(out, "{:.17e},{:.17e}", (k as f64 + 0.5) * self.bin_width, m)?;
        }
        Ok(())
    }

    fn split(&self, t: f64, a: f64, w: f64) -> (f64, f64, f64) {
        let (inner, outer) = (t - a - w, t + a + w);
        let (mut tail, mut shell, mut outside) = (0.0, 0.0, 0.0);
        for (k, m) in self.masses.iter().enumerate() {
            if self.upper_edge(k) <= inner {
                tail += m;
            } else if self.lower_edge(k) >= outer {
                outside += m;
            } else {
                shell += m;
            }
        }
        (tail, shell, outside)
    }
}

pub fn radial_profile<F: Field + ?Sized>(field: &F, center: &[f64]) -> Result<RadialProfile> {
    let grid = field.grid();
    let c = grid.pad(center)?;
    let h = grid.spacing();
    let comps = field.component_slices();
    let bins = (0.5 * grid.length() * (grid.n() as f64).sqrt() / h).ceil() as usize + 2;
    let nchunks = grid.len().div_ceil(BIN_CHUNK);
    let partial: Vec<Vec<f64>> = (0..nchunks)
        .into_par_iter()
        .map(|ci| {
            let mut hist = vec![0.0; bins];
            let end = ((ci + 1) * BIN_CHUNK).min(grid.len());
            for flat in ci * BIN_CHUNK..end {
                let m: f64 = comps.iter().map(|v| v[flat].norm_sqr()).sum();
                if m == 0.0 {
                    continue;
                }
                let k = ((grid.distance(flat, &c) / h).floor() as usize).min(bins - 1);
                hist[k] += m;
            }
            hist
        })
        .collect();
    let vol = grid.cell_volume();
    let mut masses = vec![0.0; bins];
    for hist in &partial {
        for (m, v) in masses.iter_mut().zip(hist) {
            *m += v;
        }
    }
    for m in &mut masses {
        *m *= vol;
    }
    Ok(RadialProfile { center: center.to_vec(), bin_width: h, half_length: 0.5 * grid.length(), masses })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Huygens,
    NonHuygens,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Huygens => "huygens",
            Classification::NonHuygens => "non_huygens",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HuygensReport {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equation: Option<String>,
    pub t: f64,
    pub a: f64,
    pub w: f64,
    pub tau: f64,
    pub shell_band: [f64; 2],
    pub total_mass: f64,
    pub shell_mass: f64,
    pub tail_mass: f64,
    pub outside_mass: f64,
    pub tail_fraction: f64,
    pub outside_fraction: f64,
    pub classification: Classification,
}

/// Default band margin max(2h, a/10).
pub fn default_margin(h: f64, a: f64) -> f64 {
    (2.0 * h).max(0.1 * a)
}

pub const DEFAULT_TAU: f64 = 1e-4;

pub fn huygens_report(profile: &RadialProfile, t: f64, a: f64, w: f64, tau: f64) -> Result<HuygensReport> {
    if !(a > 0.0 && w >= 0.0 && tau > 0.0) {
        return Err(Error::InvalidArgument(format!("need a > 0, w >= 0, tau > 0 (a = {a}, w = {w}, tau = {tau})")));
    }
    if !(t > a + w) {
        return Err(Error::InvalidArgument(format!("t = {t} must exceed a + w = {}", a + w)));
    }
    if t + a + w >= profile.half_length {
        return Err(Error::WrapBound { t, radius: a + w, half_length: profile.half_length });
    }
    let (tail, shell, outside) = profile.split(t, a, w);
    let total = tail + shell + outside;
    let tail_fraction = if total > 0.0 { tail / total } else { 0.0 };
    Ok(HuygensReport {
        n: profile.center.len(),
        equation: None,
        t,
        a,
        w,
        tau,
        shell_band: [t - a - w, t + a + w],
        total_mass: total,
        shell_mass: shell,
        tail_mass: tail,
        outside_mass: outside,
        tail_fraction,
        outside_fraction: if total > 0.0 { outside / total } else { 0.0 },
        classification: if tail_fraction < tau { Classification::Huygens } else { Classification::NonHuygens },
    })
}

/// Fraction of the mass beyond the outer edge t + a + w of the shell band.
pub fn causality_check(profile: &RadialProfile, t: f64, a: f64, w: f64) -> f64 {
    let (_, _, outside) = profile.split(t, a, w);
    let total = profile.total();
    if total > 0.0 {
        outside / total
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{l2_norm, make_grid, smooth_bump, Bump, ScalarField};
    use crate::Complex64;

    #[test]
    fn single_point_lands_in_its_bin() {
        let grid = make_grid(2, 16.0, 32).unwrap();
        let mut f = ScalarField::zeros(&grid);
        let flat = grid.flat_index(&[16 + 3, 16 + 4]);
        f.values_mut()[flat] = Complex64::new(2.0, 0.0);
        let p = radial_profile(&f, &[0.0, 0.0]).unwrap();
        // distance 5 cells = 2.5, bin width 0.5 → bin 5 (exact edge)
        let k = p.masses.iter().position(|&m| m > 0.0).unwrap();
        assert_eq!(k, 5);
        assert!((p.total() - 4.0 * grid.cell_volume()).abs() < 1e-15);
    }

    #[test]
    fn total_is_squared_norm() {
        let grid = make_grid(3, 8.0, 32).unwrap();
        let f = smooth_bump(&grid, &Bump::new(vec![0.5, -0.25, 1.0], 1.5, 1.0)).unwrap();
        let p = radial_profile(&f, &[0.5, -0.25, 1.0]).unwrap();
        let n2 = l2_norm(&f).powi(2);
        assert!((p.total() - n2).abs() < 1e-10 * n2);
    }

    #[test]
    fn report_partitions_mass() {
        let p = RadialProfile { center: vec![0.0], bin_width: 0.25, half_length: 20.0, masses: vec![1.0; 60] };
        let r = huygens_report(&p, 3.0, 0.5, 0.25, 1e-4).unwrap();
        assert!((r.tail_mass + r.shell_mass + r.outside_mass - r.total_mass).abs() < 1e-12);
        // tail: upper edge ≤ 2.25 → bins 0..=8
        assert_eq!(r.tail_mass, 9.0);
        // outside: lower edge ≥ 3.75 → bins 15..60
        assert_eq!(r.outside_mass, 45.0);
        assert_eq!(r.classification, Classification::NonHuygens);
        assert!(huygens_report(&p, 0.6, 0.5, 0.25, 1e-4).is_err());
        assert!(matches!(huygens_report(&p, 19.5, 0.5, 0.25, 1e-4), Err(Error::WrapBound { .. })));
    }

    #[test]
    fn causality_at_time_zero() {
        let grid = make_grid(1, 20.0, 256).unwrap();
        let f = smooth_bump(&grid, &Bump::centered(1, 0.5)).unwrap();
        let p = radial_profile(&f, &[0.0]).unwrap();
        assert_eq!(causality_check(&p, 0.0, 0.5, default_margin(grid.spacing(), 0.5)), 0.0);
    }

    #[test]
    fn csv_header_and_rows() {
        let p = RadialProfile { center: vec![0.0], bin_width: 1.0, half_length: 4.0, masses: vec![0.5, 0.25] };
        let mut out = Vec::new();
        p.write_csv(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "r,mass");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("5.0"));
    }
}
