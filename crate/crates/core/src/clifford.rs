//! Gamma-matrix representations for n = 1, 2, 3 and the per-mode Dirac kernel.
//!
//! The representations are fixed:
//!
//! | n | spinor dim | γ⁰   | γ¹     | γ²   | γ³ |
//! |---|------------|------|--------|------|----|
//! | 1 | 2          | σ³   | −iσ²   |      |    |
//! | 2 | 2          | σ³   | −iσ²   | iσ¹  |    |
//! | 3 | 4          | Weyl | Weyl   | Weyl | Weyl |
//!
//! with the Weyl blocks γ⁰ = [[0, 1], [1, 0]] and γⁱ = [[0, σⁱ], [−σⁱ, 0]].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_DIM: usize = 4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Below this value of |p|·t the kernel switches to a series for sin(x)/x.
pub const SINC_SERIES_THRESHOLD: f64 = 1e-8;

/// Small dense complex matrix (dimension 2 or 4), stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [Complex64; MAX_DIM * MAX_DIM],
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0 && dim <= MAX_DIM, "matrix dimension {dim} not supported");
        Self { dim, data: [ZERO; MAX_DIM * MAX_DIM] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from rows. Panics if the rows are not square.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), dim, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = *self;
        for v in out.data.iter_mut() {
            *v *= s;
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm; an upper bound for the operator 2-norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn entries(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.dim).flat_map(move |i| (0..self.dim).map(move |j| self[(i, j)]))
    }

    /// y = M x for a spinor given as a slice of `dim` components.
    #[inline]
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (j, &xj) in x.iter().enumerate() {
                acc += self.data[i * MAX_DIM + j] * xj;
            }
            *yi = acc;
        }
    }

    /// ‖M†M − 1‖ in the Frobenius norm, which bounds the operator-norm
    /// deviation from unitarity.
    pub fn unitarity_deviation(&self) -> f64 {
        (self.dagger() * *self - Self::identity(self.dim)).frobenius_norm()
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.dagger()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i * MAX_DIM + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i * MAX_DIM + j]
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut out = ComplexMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut acc = ZERO;
                for k in 0..self.dim {
                    acc += self[(i, k)] * rhs[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

impl Mul<ComplexMatrix> for Complex64 {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        rhs.scale(self)
    }
}

impl Mul<ComplexMatrix> for f64 {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        rhs.scale(Complex64::new(self, 0.0))
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self;
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a += b;
        }
        out
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        self + (-rhs)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale(-ONE)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})[", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|j| format!("{}", self[(i, j)])).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

pub fn pauli(k: usize) -> ComplexMatrix {
    match k {
        1 => ComplexMatrix::from_rows(&[[ZERO, ONE], [ONE, ZERO]]),
        2 => ComplexMatrix::from_rows(&[[ZERO, -I], [I, ZERO]]),
        3 => ComplexMatrix::from_rows(&[[ONE, ZERO], [ZERO, -ONE]]),
        _ => panic!("Pauli index must be 1, 2 or 3"),
    }
}

/// 4×4 matrix [[a, b], [c, d]] from 2×2 blocks.
fn block(a: ComplexMatrix, b: ComplexMatrix, c: ComplexMatrix, d: ComplexMatrix) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = a[(i, j)];
            m[(i, j + 2)] = b[(i, j)];
            m[(i + 2, j)] = c[(i, j)];
            m[(i + 2, j + 2)] = d[(i, j)];
        }
    }
    m
}

/// A concrete gamma-matrix representation γ⁰…γⁿ with metric diag(+1, −1, …, −1).
#[derive(Clone, Debug, PartialEq)]
pub struct GammaSet {
    n: usize,
    gammas: Vec<ComplexMatrix>,
    /// γ⁰γʲ for j = 1..=n, cached for the kernels.
    alphas: Vec<ComplexMatrix>,
}

impl GammaSet {
    /// Wraps an arbitrary list of n+1 matrices. Used to probe
    /// [`clifford_residual`] with deliberately broken sets.
    pub fn from_matrices(gammas: Vec<ComplexMatrix>) -> Result<Self> {
        if gammas.len() < 2 {
            return Err(Error::InvalidArgument("a gamma set needs at least γ⁰ and γ¹".into()));
        }
        let dim = gammas[0].dim();
        if let Some(bad) = gammas.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        let alphas = gammas[1..].iter().map(|&g| gammas[0] * g).collect();
        Ok(Self { n: gammas.len() - 1, gammas, alphas })
    }

    /// Space dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Spinor dimension.
    pub fn dim(&self) -> usize {
        self.gammas[0].dim()
    }

    pub fn gamma(&self, mu: usize) -> &ComplexMatrix {
        &self.gammas[mu]
    }

    pub fn gammas(&self) -> &[ComplexMatrix] {
        &self.gammas
    }

    /// η^{μμ}.
    pub fn metric(&self, mu: usize) -> f64 {
        if mu == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// γ⁰γʲ for spatial index j ∈ 1..=n.
    pub fn alpha(&self, j: usize) -> &ComplexMatrix {
        &self.alphas[j - 1]
    }

    /// γ⁰ γ·p.
    pub fn alpha_dot(&self, p: &[f64]) -> ComplexMatrix {
        assert_eq!(p.len(), self.n, "momentum has wrong dimension");
        let mut m = ComplexMatrix::zeros(self.dim());
        for (a, &pj) in self.alphas.iter().zip(p) {
            m = m + pj * *a;
        }
        m
    }
}

pub fn make_gamma_set(n: usize) -> Result<GammaSet> {
    let gammas = match n {
        1 => vec![pauli(3), pauli(2).scale(-I)],
        2 => vec![pauli(3), pauli(2).scale(-I), pauli(1).scale(I)],
        3 => {
            let zero = ComplexMatrix::zeros(2);
            let one = ComplexMatrix::identity(2);
            let mut g = vec![block(zero, one, one, zero)];
            for k in 1..=3 {
                g.push(block(zero, pauli(k), -pauli(k), zero));
            }
            g
        }
        _ => return Err(Error::UnsupportedDimension(n, "1, 2 or 3")),
    };
    GammaSet::from_matrices(gammas)
}

/// max over (μ, ν) of the largest entry of {γ^μ, γ^ν} − 2η^{μν}·1.
pub fn clifford_residual(g: &GammaSet) -> f64 {
    let id = ComplexMatrix::identity(g.dim());
    let mut worst = 0.0_f64;
    for mu in 0..=g.n() {
        for nu in 0..=g.n() {
            let (a, b) = (*g.gamma(mu), *g.gamma(nu));
            let eta = if mu == nu { g.metric(mu) } else { 0.0 };
            let r = (a * b + b * a - (2.0 * eta) * id).max_abs();
            worst = worst.max(r);
        }
    }
    worst
}

/// (cos(|p|t), sin(|p|t)/|p|) with the small-argument series for the second.
#[inline]
pub(crate) fn cos_sinc(p_abs: f64, t: f64) -> (f64, f64) {
    let x = p_abs * t;
    if x.abs() < SINC_SERIES_THRESHOLD {
        // sin(x)/x = 1 − x²/6 + …; the x² term is already below 1e−16.
        (1.0 - 0.5 * x * x, t * (1.0 - x * x / 6.0))
    } else {
        let (s, c) = x.sin_cos();
        (c, s / p_abs)
    }
}

/// exp(−i γ⁰γ·p t) = cos(|p|t)·1 − i (γ⁰γ·p) sin(|p|t)/|p|.
pub fn dirac_kernel_momentum(g: &GammaSet, p: &[f64], t: f64) -> ComplexMatrix {
    let p_abs = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (c, s) = cos_sinc(p_abs, t);
    ComplexMatrix::identity(g.dim()).scale(Complex64::new(c, 0.0)) + g.alpha_dot(p).scale(Complex64::new(0.0, -s))
}

/// ∂ₜ of the kernel: −i (γ⁰γ·p) · K(p, t).
pub fn dirac_kernel_rate(g: &GammaSet, p: &[f64], t: f64) -> ComplexMatrix {
    g.alpha_dot(p).scale(-I) * dirac_kernel_momentum(g, p, t)
}
