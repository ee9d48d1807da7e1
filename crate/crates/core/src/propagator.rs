//! Retarded propagators of the massless Klein-Gordon and Dirac equations.
//!
//! For n = 1, 2, 3 the propagators are known in closed form and are
//! represented symbolically: a weight carried by the light-cone shell r = t
//! and a density on the interior r < t. For general n ≥ 2 the propagator is
//! evaluated through the segment integral
//!
//! ```text
//! G(t, r; ε) = C_n ∫ ζ (r² − ζ²)^{−(n+1)/2} dζ,   ζ from −t − iε to t − iε,
//! C_n = Γ((n+1)/2) / (2 π^{(n+1)/2}),
//! ```
//!
//! whose ε → 0⁺ limit is taken by polynomial extrapolation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{extrapolate_to_zero, integrate, integrate_pieces, Estimate};

const NEG_I: Complex64 = Complex64::new(0.0, -1.0);

/// Retarded KG propagator G_R^{(n)} for n ∈ {1, 2, 3}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RetardedPropagator {
    n: usize,
}

/// Shell weight w (coefficient of δ(t − r)) and bulk density at one (t, r).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorSample {
    pub shell: Complex64,
    pub bulk: Complex64,
}

impl RetardedPropagator {
    pub fn new(n: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::UnsupportedDimension(n, "1, 2 or 3"));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient of δ(t − r); zero unless n = 3 and t > 0.
    pub fn shell_weight(&self, t: f64) -> Complex64 {
        if self.n == 3 && t > 0.0 {
            NEG_I / (4.0 * PI * t)
        } else {
            Complex64::default()
        }
    }

    /// Density on 0 ≤ r < t; zero elsewhere and identically zero for n = 3.
    pub fn bulk_density(&self, t: f64, r: f64) -> Complex64 {
        if !(t > 0.0 && r < t) {
            return Complex64::default();
        }
        match self.n {
            1 => 0.5 * NEG_I,
            2 => NEG_I / (2.0 * PI * (t * t - r * r).sqrt()),
            _ => Complex64::default(),
        }
    }

    /// Whether the propagator has any interior density.
    pub fn has_bulk(&self) -> bool {
        self.n != 3
    }
}

/// Evaluates G_R^{(n)} at (t, r). The shell weight is reported only when r
/// coincides with t.
pub fn green_kg(n: usize, t: f64, r: f64) -> Result<PropagatorSample> {
    let g = RetardedPropagator::new(n)?;
    if !(t >= 0.0 && r >= 0.0) {
        return Err(Error::InvalidArgument(format!("need t, r >= 0, got t = {t}, r = {r}")));
    }
    let on_shell = (r - t).abs() <= 1e-12 * t.max(1.0);
    Ok(PropagatorSample {
        shell: if on_shell { g.shell_weight(t) } else { Complex64::default() },
        bulk: g.bulk_density(t, r),
    })
}

/// 2×2 weights of the 1D Dirac propagator, as (position, weight) pairs for
/// the shells at x = −t and x = +t.
pub fn dirac_green_1d(t: f64) -> [(f64, [[f64; 2]; 2]); 2] {
    [(-t, [[0.5, 0.5], [0.5, 0.5]]), (t, [[0.5, -0.5], [-0.5, 0.5]])]
}

/// Γ(k/2) for a positive integer k.
fn gamma_half_integer(k: usize) -> f64 {
    assert!(k > 0);
    if k % 2 == 0 {
        (1..k / 2).map(|i| i as f64).product()
    } else {
        // Γ(m + ½) = √π · (2m − 1)!! / 2^m
        let m = k / 2;
        let mut v = PI.sqrt();
        for i in 0..m {
            v *= (2 * i + 1) as f64 / 2.0;
        }
        v
    }
}

/// Prefactor C_n of the segment integral.
pub fn zeta_prefactor(n: usize) -> f64 {
    gamma_half_integer(n + 1) / (2.0 * PI.powf((n + 1) as f64 / 2.0))
}

const ZETA_REL_TOL: f64 = 1e-10;
const MAX_PANELS: usize = 5000;

fn check_zeta_args(n: usize, t: f64, r: f64, eps: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n, ">= 2 for the segment integral"));
    }
    if !(t > 0.0 && r > 0.0 && eps > 0.0) || !(t.is_finite() && r.is_finite() && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("need t, r, eps > 0, got t = {t}, r = {r}, eps = {eps}")));
    }
    Ok(())
}

/// Segment integral at finite ε with relative quadrature tolerance 1e−10.
pub fn eval_zeta_integral(n: usize, t: f64, r: f64, eps: f64) -> Result<Estimate> {
    check_zeta_args(n, t, r, eps)?;
    let half = (n + 1) / 2;
    let odd = n % 2 == 1;
    let m = (n + 1) as f64 / 2.0;
    // Each half of the segment is integrated in u = s ∓ r, measured from the
    // nearby singular point ζ = ∓r, so r ± ζ is formed without cancellation.
    // Pieces with anchor −r come first, then those with anchor +r.
    let mut pieces = Vec::with_capacity(4);
    let mut anchors = Vec::with_capacity(4);
    let split = |lo: f64, hi: f64, out: &mut Vec<(f64, f64)>| {
        if lo < 0.0 && hi > 0.0 {
            out.push((lo, 0.0));
            out.push((0.0, hi));
        } else {
            out.push((lo, hi));
        }
    };
    split(r - t, r, &mut pieces);
    anchors.resize(pieces.len(), -1.0);
    split(-r, t - r, &mut pieces);
    anchors.resize(pieces.len(), 1.0);
    let ie = Complex64::new(0.0, eps);
    let integrand = |k: usize, u: f64| {
        let (r_minus_z, r_plus_z, s) = if anchors[k] < 0.0 {
            (Complex64::new(2.0 * r - u, 0.0) + ie, Complex64::new(u, 0.0) - ie, u - r)
        } else {
            (Complex64::new(-u, 0.0) + ie, Complex64::new(2.0 * r + u, 0.0) - ie, u + r)
        };
        let base = r_minus_z * r_plus_z;
        let p = if odd { base.powi(-(half as i32)) } else { base.powf(-m) };
        Complex64::new(s, -eps) * p
    };
    let est = integrate_pieces(integrand, &pieces, ZETA_REL_TOL, 0.0, MAX_PANELS)?;
    let c = zeta_prefactor(n);
    Ok(Estimate { value: est.value * c, error: est.error * c })
}

/// Default ε schedule {1e−1, …, 1e−5}·t.
pub fn default_eps_schedule(t: f64) -> Vec<f64> {
    (1..=5).map(|k| t * 10f64.powi(-k)).collect()
}

/// One row of an ε scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZetaRow {
    pub n: usize,
    pub t: f64,
    pub r: f64,
    pub eps: f64,
    pub re: f64,
    pub im: f64,
    pub est_error: f64,
}

/// Extrapolated ε → 0⁺ limit together with the scan it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct ZetaLimit {
    pub value: Complex64,
    /// Extrapolation error indicator (difference to the lower-degree estimate).
    pub error: f64,
    pub rows: Vec<ZetaRow>,
}

/// Number of trailing schedule entries used for the extrapolation and the
/// monotonicity guard.
const EXTRAPOLATION_POINTS: usize = 3;

fn extrapolate(eps: &[f64], values: &[Complex64], quad_errors: &[f64], what: &str) -> Result<(Complex64, f64)> {
    if eps.len() < EXTRAPOLATION_POINTS {
        return Err(Error::InvalidArgument(format!("need at least {EXTRAPOLATION_POINTS} eps values")));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("eps schedule must be strictly decreasing".into()));
    }
    let k = eps.len() - EXTRAPOLATION_POINTS;
    let (limit, err) = extrapolate_to_zero(&eps[k..], &values[k..]);
    // Distances to the limit must not grow as ε shrinks, up to a noise floor
    // set by the quadrature errors and the size of the values.
    let scale = values[k..].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = 10.0 * quad_errors[k..].iter().fold(0.0, |a: f64, &b| a.max(b)) + 1e-13 * scale + 1e-300;
    let dist: Vec<f64> = values[k..].iter().map(|v| (v - limit).norm()).collect();
    for w in dist.windows(2) {
        if w[1] > w[0] && w[1] > floor {
            return Err(Error::ExtrapolationDivergence(format!(
                "{what}: distance to the limit grew from {:e} to {:e}",
                w[0], w[1]
            )));
        }
    }
    Ok((limit, err))
}

/// ε scan plus extrapolated limit of [`eval_zeta_integral`].
pub fn zeta_limit(n: usize, t: f64, r: f64, eps: &[f64]) -> Result<ZetaLimit> {
    let mut rows = Vec::with_capacity(eps.len());
    let mut values = Vec::with_capacity(eps.len());
    let mut errors = Vec::with_capacity(eps.len());
    for &e in eps {
        let est = eval_zeta_integral(n, t, r, e)?;
        rows.push(ZetaRow { n, t, r, eps: e, re: est.value.re, im: est.value.im, est_error: est.error });
        values.push(est.value);
        errors.push(est.error);
    }
    let (value, error) = extrapolate(eps, &values, &errors, &format!("n = {n}, t = {t}, r = {r}"))?;
    Ok(ZetaLimit { value, error, rows })
}

/// ∫dr f(r)·G(t, r; ε) for n = 3, extrapolated to ε → 0⁺. The test function
/// must vanish outside `support` = (r_min, r_max) with r_min > 0.
pub fn zeta_smear_test<F>(t: f64, testfn: F, support: (f64, f64), eps: &[f64]) -> Result<Complex64>
where
    F: Fn(f64) -> f64,
{
    let (lo, hi) = support;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("test function support ({lo}, {hi}) must lie in r > 0")));
    }
    // Absolute floor: a small fraction of the size the shell term would have
    // for a test function of this magnitude, so off-shell smears (which
    // cancel almost completely) still terminate.
    let sup = (0..=1000).map(|k| testfn(lo + (hi - lo) * k as f64 / 1000.0).abs()).fold(0.0, f64::max);
    let abs_tol = 1e-10 * sup * (hi - lo) / (4.0 * PI * t);
    let mut values = Vec::with_capacity(eps.len());
    let mut errors = Vec::with_capacity(eps.len());
    for &e in eps {
        let mut failure = None;
        let mut points = vec![lo];
        if t > lo && t < hi {
            points.push(t);
        }
        points.push(hi);
        let est = integrate(
            |r| {
                let f = testfn(r);
                if f == 0.0 || failure.is_some() {
                    return Complex64::default();
                }
                match eval_zeta_integral(3, t, r, e) {
                    Ok(v) => v.value * f,
                    Err(err) => {
                        failure = Some(err);
                        Complex64::default()
                    }
                }
            },
            &points,
            1e-9,
            abs_tol,
            MAX_PANELS,
        )?;
        if let Some(err) = failure {
            return Err(err);
        }
        values.push(est.value);
        errors.push(est.error);
    }
    Ok(extrapolate(eps, &values, &errors, "smeared n = 3 integral")?.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityKind {
    Poles,
    BranchCuts,
}

/// Singular structure of the segment-integral integrand in the ζ plane.
/// Locations are in units of r.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularityReport {
    pub n: usize,
    pub kind: SingularityKind,
    /// Exponent (n+1)/2 of (r² − ζ²) in the denominator.
    pub exponent: f64,
    /// Poles or branch points: ζ = −r and ζ = +r.
    pub points: [f64; 2],
    /// Branch cuts along the real axis, (−∞, −r] and [r, ∞); empty for poles.
    pub cuts: Vec<(f64, f64)>,
}

pub fn classify_singularities(n: usize) -> Result<SingularityReport> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n, ">= 2 for the segment integral"));
    }
    let poles = n % 2 == 1;
    Ok(SingularityReport {
        n,
        kind: if poles { SingularityKind::Poles } else { SingularityKind::BranchCuts },
        exponent: (n + 1) as f64 / 2.0,
        points: [-1.0, 1.0],
        cuts: if poles { Vec::new() } else { vec![(f64::NEG_INFINITY, -1.0), (1.0, f64::INFINITY)] },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn closed_forms() {
        let v = green_kg(2, 2.0, 1.0).unwrap();
        assert!(close(v.bulk, Complex64::new(0.0, -1.0 / (2.0 * PI * 3f64.sqrt())), 1e-15));
        assert_eq!(v.shell, Complex64::default());
        assert_eq!(green_kg(2, 2.0, 2.5).unwrap().bulk, Complex64::default());
        let s = green_kg(3, 1.0, 1.0).unwrap();
        assert!(close(s.shell, Complex64::new(0.0, -1.0 / (4.0 * PI)), 1e-15));
        assert_eq!(s.bulk, Complex64::default());
        assert_eq!(green_kg(3, 1.0, 0.5).unwrap().shell, Complex64::default());
        assert_eq!(green_kg(1, 2.0, 1.5).unwrap().bulk, Complex64::new(0.0, -0.5));
        assert_eq!(green_kg(1, 2.0, 2.5).unwrap().bulk, Complex64::default());
        assert!(green_kg(4, 1.0, 0.5).is_err());
    }

    #[test]
    fn dirac_1d_weights() {
        let [(xl, wl), (xr, wr)] = dirac_green_1d(1.5);
        assert_eq!((xl, xr), (-1.5, 1.5));
        assert_eq!(wl[0][1], 0.5);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(wl[i][j] + wr[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
        // (c, c) is carried entirely by the left shell.
        let c = 0.8;
        for i in 0..2 {
            let v: f64 = (0..2).map(|j| (wl[i][j] + wr[i][j]) * c).sum();
            assert!((v - c).abs() < 1e-15);
        }
    }

    #[test]
    fn prefactor_values() {
        assert!((gamma_half_integer(1) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half_integer(3) - 0.5 * PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half_integer(4), 1.0);
        assert_eq!(gamma_half_integer(8), 6.0);
        // C₃ = Γ(2)/(2π²)
        assert!((zeta_prefactor(3) - 1.0 / (2.0 * PI * PI)).abs() < 1e-16);
    }

    #[test]
    fn n3_integral_matches_antiderivative() {
        // ∫ ζ (r² − ζ²)⁻² dζ = ½ (r² − ζ²)⁻¹
        let (t, r, eps) = (2.0, 0.7, 1e-3);
        let est = eval_zeta_integral(3, t, r, eps).unwrap();
        let end = |s: f64| {
            let z = Complex64::new(s, -eps);
            0.5 / (Complex64::new(r * r, 0.0) - z * z)
        };
        let exact = (end(t) - end(-t)) * zeta_prefactor(3);
        assert!((est.value - exact).norm() <= 10.0 * est.error, "{} vs {} (est. error {:e})", est.value, exact, est.error);
        assert!((est.value - exact).norm() < 1e-6 * exact.norm());
    }

    #[test]
    fn n2_limit_is_bulk_density() {
        let t = 2.0;
        let lim = zeta_limit(2, t, 1.0, &default_eps_schedule(t)).unwrap();
        let expect = green_kg(2, t, 1.0).unwrap().bulk;
        assert!(close(lim.value, expect, 1e-4), "{} vs {}", lim.value, expect);
        assert_eq!(lim.rows.len(), 5);
    }

    #[test]
    fn singularity_classes() {
        assert_eq!(classify_singularities(3).unwrap().kind, SingularityKind::Poles);
        assert_eq!(classify_singularities(5).unwrap().kind, SingularityKind::Poles);
        let two = classify_singularities(2).unwrap();
        assert_eq!(two.kind, SingularityKind::BranchCuts);
        assert_eq!(two.cuts.len(), 2);
        assert!(classify_singularities(1).is_err());
    }

    #[test]
    fn argument_validation() {
        assert!(eval_zeta_integral(1, 1.0, 0.5, 0.1).is_err());
        assert!(eval_zeta_integral(2, 1.0, 0.0, 0.1).is_err());
        assert!(zeta_limit(2, 1.0, 0.5, &[0.1, 0.01]).is_err());
        assert!(zeta_limit(2, 1.0, 0.5, &[0.01, 0.1, 0.001]).is_err());
        assert!(zeta_smear_test(1.0, |_| 1.0, (0.0, 1.0), &default_eps_schedule(1.0)).is_err());
    }
}
