//! Quadrature building blocks: Gauss-Legendre rules, globally adaptive
//! Gauss-Kronrod integration of complex integrands, and polynomial
//! extrapolation to zero.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [−1, 1], nodes ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped onto [a, b] and repeated over `panels` equal panels.
pub fn composite_gauss_legendre(order: usize, panels: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(order * panels);
    let mut weights = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * width * (xi + 1.0));
            weights.push(0.5 * width * wi);
        }
    }
    (nodes, weights)
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights on XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Panel {
    piece: usize,
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.piece.cmp(&self.piece)).then(other.a.total_cmp(&self.a))
    }
}

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, piece: usize, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut samples = [Complex64::default(); 15];
    samples[7] = f(c);
    let mut kron = samples[7] * WGK[7];
    let mut gauss = samples[7] * WG[3];
    let mut abs = samples[7].norm() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        samples[j] = f1;
        samples[14 - j] = f2;
        kron += (f1 + f2) * WGK[j];
        abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    // QUADPACK error scaling: compare the raw Kronrod-Gauss difference with
    // the variation of f about its mean over the panel.
    let mean = kron * 0.5;
    let mut asc = WGK[7] * (samples[7] - mean).norm();
    for j in 0..7 {
        asc += WGK[j] * ((samples[j] - mean).norm() + (samples[14 - j] - mean).norm());
    }
    let hh = h.abs();
    let (asc, abs) = (asc * hh, abs * hh);
    let mut error = ((kron - gauss) * h).norm();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs);
    }
    Panel { piece, a, b, value: kron * h, error, abs }
}

// Global floor; each panel already carries 50 ulps of its own ∫|f|.
const ROUNDOFF: f64 = 200.0 * f64::EPSILON;

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

/// Adaptive Gauss-Kronrod (7/15) integration of a complex integrand over the
/// pieces delimited by `points` (ascending, at least two). The panel with the
/// largest error estimate is bisected until the total error is below
/// max(`rel_tol`·|∫f|, `abs_tol`, roundoff floor), or the panel budget is
/// spent. The roundoff floor is a few ulps of ∫|f|, the best any sum of
/// samples can do when the integral cancels.
pub fn integrate<F>(mut f: F, points: &[f64], rel_tol: f64, abs_tol: f64, max_panels: usize) -> Result<Estimate>
where
    F: FnMut(f64) -> Complex64,
{
    if points.len() < 2 || points.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidArgument("integration breakpoints must be ascending".into()));
    }
    let pieces: Vec<(f64, f64)> = points.windows(2).map(|w| (w[0], w[1])).collect();
    integrate_pieces(|_, x| f(x), &pieces, rel_tol, abs_tol, max_panels)
}

/// Like [`integrate`], but each piece `k` is integrated in its own
/// coordinate: `f(k, u)` for u between `pieces[k].0` and `pieces[k].1`.
/// Integrands with a near-singular point can then use a coordinate that is
/// exact close to that point. All pieces share one error budget.
pub fn integrate_pieces<F>(
    mut f: F,
    pieces: &[(f64, f64)],
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Estimate>
where
    F: FnMut(usize, f64) -> Complex64,
{
    if pieces.is_empty() || pieces.iter().any(|(a, b)| !(a.is_finite() && b.is_finite())) {
        return Err(Error::InvalidArgument("integration pieces must be finite".into()));
    }
    let mut heap = BinaryHeap::new();
    for (k, &(a, b)) in pieces.iter().enumerate() {
        if a != b {
            heap.push(gk15(&mut |u| f(k, u), k, a, b));
        }
    }
    let (mut value, mut error, mut abs) = totals(&heap);
    loop {
        let target = abs_tol.max(rel_tol * value.norm()).max(ROUNDOFF * abs);
        if error <= target {
            // Confirm with exactly recomputed totals; the running sums drift.
            let exact = totals(&heap);
            let target = abs_tol.max(rel_tol * exact.0.norm()).max(ROUNDOFF * exact.2);
            if exact.1 <= target || heap.is_empty() {
                return Ok(Estimate { value: exact.0, error: exact.1 });
            }
            (value, error, abs) = exact;
        }
        if heap.len() >= max_panels {
            return Err(Error::NonConvergence { achieved: error, target });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            // Panel cannot be split further in floating point.
            return Err(Error::NonConvergence { achieved: error, target });
        }
        let k = worst.piece;
        let left = gk15(&mut |u| f(k, u), k, worst.a, mid);
        let right = gk15(&mut |u| f(k, u), k, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        abs += left.abs + right.abs - worst.abs;
        heap.push(left);
        heap.push(right);
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (Complex64, f64, f64) {
    // Sum in (piece, position) order so the result does not depend on heap layout.
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|x, y| x.piece.cmp(&y.piece).then(x.a.min(x.b).total_cmp(&y.a.min(y.b))));
    let mut value = Complex64::default();
    let mut error = 0.0;
    let mut abs = 0.0;
    for p in panels {
        value += p.value;
        error += p.error;
        abs += p.abs;
    }
    (value, error, abs)
}

/// Value at x = 0 of the interpolating polynomial through (xs, ys) (Neville),
/// together with the difference to the next-lower-degree estimate as an error
/// indicator.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[Complex64]) -> (Complex64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    let n = xs.len();
    let mut p = ys.to_vec();
    let mut lower = p[n - 1];
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (p[i + 1] * xi - p[i] * xj) / (xi - xj);
        }
        if level == n - 1 {
            break;
        }
        lower = p[n - level - 1];
    }
    let error = if n > 1 { (p[0] - lower).norm() } else { f64::INFINITY };
    (p[0], error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for order in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(order);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..2 * order {
                let approx: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "order {order} degree {deg}");
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn composite_rule_on_interval() {
        let (x, w) = composite_gauss_legendre(8, 3, 1.0, 4.0);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.exp()).sum();
        assert!((v - (4f64.exp() - 1f64.exp())).abs() < 1e-9);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫₀¹ x^{-1/2} dx = 2
        let est = integrate(|x| Complex64::new(x.powf(-0.5), 0.0), &[0.0, 1.0], 1e-10, 0.0, 5000).unwrap();
        assert!((est.value.re - 2.0).abs() < 1e-8, "{:?}", est);
    }

    #[test]
    fn adaptive_complex_oscillatory() {
        // ∫₀^π e^{ix} dx = 2i
        let est = integrate(|x| Complex64::from_polar(1.0, x), &[0.0, 1.0, std::f64::consts::PI], 1e-12, 0.0, 100)
            .unwrap();
        assert!((est.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_reports_error() {
        let r = integrate(|x| Complex64::new(1.0 / x, 0.0), &[0.0, 1.0], 1e-12, 0.0, 10);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
        assert!(integrate(|_| Complex64::default(), &[1.0, 0.0], 1e-3, 0.0, 10).is_err());
    }

    #[test]
    fn neville_recovers_polynomial_limit() {
        let xs = [0.3, 0.2, 0.1];
        let ys: Vec<Complex64> = xs.iter().map(|x| Complex64::new(1.5 + 2.0 * x - 0.7 * x * x, -x)).collect();
        let (v, _) = extrapolate_to_zero(&xs, &ys);
        assert!((v - Complex64::new(1.5, 0.0)).norm() < 1e-13);
    }
}
