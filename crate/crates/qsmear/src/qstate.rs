//! Wavefunctions and density matrices on a grid, with conjugate-basis
//! transforms and the scalar diagnostics used throughout the crate.
//!
//! A density matrix here is the kernel rho(t_j, t_k) sampled on one axis grid,
//! not a weight-absorbed discrete operator. Quadrature weights enter every
//! trace-like contraction explicitly, so the same container works for both
//! trapezoid (position) and rectangle (momentum) axes.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{Grid, MomentumGrid};

/// Axis labelling for a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Position,
    Momentum,
    Finite,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Position => write!(f, "position"),
            Basis::Momentum => write!(f, "momentum"),
            Basis::Finite => write!(f, "finite"),
        }
    }
}

/// Cut through the matrix: the main diagonal rho(u, u) or the anti-diagonal
/// rho(c + u, c - u) through the grid center c.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Diagonal,
    AntiDiagonal,
}

/// How a conjugate-basis transform is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformMethod {
    /// Direct quadrature up to 512 points, FFT factorization above.
    Auto,
    /// Dense double-sum quadrature, O(n^3). Reference implementation.
    Quadrature,
    /// FFT factorization of the same sums, O(n^2 log n).
    Fft,
}

const FFT_THRESHOLD: usize = 512;

/// Pure state sampled on a position grid, kept normalized under trapezoid
/// quadrature.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl WaveFunction {
    /// Gaussian packet psi(x) = (2 pi s^2)^(-1/4) exp(-(x - x0)^2 / (4 s^2))
    /// exp(i p0 x), a width-s packet centered at x0 with mean momentum p0.
    ///
    /// The analytic form is unit-norm on the line; if the box clips more than
    /// 1e-6 of that norm the packet does not fit and this errors rather than
    /// silently renormalizing a truncated state.
    pub fn gaussian_packet(grid: &Grid, s: f64, x0: f64, p0: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter {
                name: "s",
                reason: format!("packet width must be positive and finite, got {s}"),
            });
        }
        if !x0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "x0",
                reason: format!("packet center must be finite, got {x0}"),
            });
        }
        if !p0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "p0",
                reason: format!("packet boost must be finite, got {p0}"),
            });
        }
        let amp = (2.0 * PI * s * s).powf(-0.25);
        let values: Vec<Complex64> = grid
            .points()
            .iter()
            .map(|&x| {
                let d = x - x0;
                let envelope = amp * (-d * d / (4.0 * s * s)).exp();
                Complex64::new(0.0, p0 * x).exp() * envelope
            })
            .collect();
        let raw = quad_norm_sq(&grid.weights(), &values);
        let deficit = (raw - 1.0).abs();
        if deficit > 1e-6 {
            return Err(Error::PacketLeak { deficit });
        }
        let mut wf = WaveFunction {
            grid: grid.clone(),
            values,
        };
        wf.renormalize(raw);
        Ok(wf)
    }

    /// Wrap raw samples, renormalizing to unit quadrature norm.
    pub fn from_values(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        let raw = quad_norm_sq(&grid.weights(), &values);
        if !raw.is_finite() || raw < 1e-300 {
            return Err(Error::NotNormalized { deviation: 1.0 });
        }
        let mut wf = WaveFunction {
            grid: grid.clone(),
            values,
        };
        wf.renormalize(raw);
        Ok(wf)
    }

    fn renormalize(&mut self, norm_sq: f64) {
        let scale = norm_sq.sqrt().recip();
        for v in &mut self.values {
            *v *= scale;
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Quadrature norm, 1 after construction.
    pub fn norm(&self) -> f64 {
        quad_norm_sq(&self.grid.weights(), &self.values).sqrt()
    }

    /// Mean of the position density |psi|^2.
    pub fn position_mean(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(self.grid.points())
            .zip(&self.values)
            .map(|((&w, x), v)| w * x * v.norm_sqr())
            .sum()
    }

    /// Variance of the position density around its mean.
    pub fn position_variance(&self) -> f64 {
        let mean = self.position_mean();
        self.grid
            .weights()
            .iter()
            .zip(self.grid.points())
            .zip(&self.values)
            .map(|((&w, x), v)| w * (x - mean) * (x - mean) * v.norm_sqr())
            .sum()
    }
}

fn quad_norm_sq(weights: &[f64], values: &[Complex64]) -> f64 {
    weights
        .iter()
        .zip(values)
        .map(|(&w, v)| w * v.norm_sqr())
        .sum()
}

/// Density-matrix kernel on one axis of a position grid or its conjugate.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    grid: Grid,
    basis: Basis,
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// rho(x, xbar) = psi(x) conj(psi(xbar)).
    pub fn from_pure(wf: &WaveFunction) -> Self {
        let n = wf.grid.len();
        let mat = DMatrix::from_fn(n, n, |j, k| wf.values[j] * wf.values[k].conj());
        DensityMatrix {
            grid: wf.grid.clone(),
            basis: Basis::Position,
            mat,
        }
    }

    /// Wrap an existing kernel sampled on `grid` in the given basis.
    pub fn from_matrix(grid: &Grid, basis: Basis, mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != grid.len() || mat.ncols() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: mat.nrows().max(mat.ncols()),
            });
        }
        if basis == Basis::Finite {
            return Err(Error::BasisMismatch {
                expected: Basis::Position,
                found: Basis::Finite,
            });
        }
        Ok(DensityMatrix {
            grid: grid.clone(),
            basis,
            mat,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn momentum_grid(&self) -> MomentumGrid {
        self.grid.conjugate()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mat(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn mat_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.mat
    }

    /// Sample coordinates of the current axis.
    pub fn axis_points(&self) -> Vec<f64> {
        match self.basis {
            Basis::Position => self.grid.points(),
            Basis::Momentum => self.grid.conjugate().points(),
            Basis::Finite => unreachable!("grid-backed matrix is never finite-basis"),
        }
    }

    /// Quadrature weights of the current axis.
    pub fn axis_weights(&self) -> Vec<f64> {
        match self.basis {
            Basis::Position => self.grid.weights(),
            Basis::Momentum => self.grid.conjugate().weights(),
            Basis::Finite => unreachable!("grid-backed matrix is never finite-basis"),
        }
    }

    /// Quadrature trace, real part of sum_j w_j rho_jj.
    pub fn trace(&self) -> f64 {
        self.axis_weights()
            .iter()
            .enumerate()
            .map(|(j, &w)| w * self.mat[(j, j)].re)
            .sum()
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in j..n {
                let d = (self.mat[(j, k)] - self.mat[(k, j)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Tr rho^2 under quadrature: sum_jk w_j w_k |rho_jk|^2.
    pub fn purity(&self) -> f64 {
        let w = self.axis_weights();
        let n = self.len();
        let mut acc = 0.0;
        for k in 0..n {
            let col = self.mat.column(k);
            let wk = w[k];
            for j in 0..n {
                acc += w[j] * wk * col[j].norm_sqr();
            }
        }
        acc
    }

    /// Weight-symmetrized kernel W^(1/2) rho W^(1/2), Hermitized. Its spectrum
    /// is the quadrature approximation of the operator spectrum.
    fn symmetrized(&self) -> DMatrix<Complex64> {
        let w = self.axis_weights();
        let sq: Vec<f64> = w.iter().map(|&x| x.sqrt()).collect();
        let n = self.len();
        let mut s = DMatrix::from_fn(n, n, |j, k| self.mat[(j, k)] * (sq[j] * sq[k]));
        let ah = s.adjoint();
        s += ah;
        s *= Complex64::new(0.5, 0.0);
        s
    }

    fn symmetrized_eigenvalues(&self) -> Vec<f64> {
        let s = self.symmetrized();
        let eig = nalgebra::linalg::SymmetricEigen::new(s);
        eig.eigenvalues.iter().copied().collect()
    }

    /// Von Neumann entropy -sum lambda ln lambda over eigenvalues of the
    /// symmetrized kernel; eigenvalues below 1e-12 are dropped.
    pub fn entropy(&self) -> f64 {
        self.symmetrized_eigenvalues()
            .iter()
            .filter(|&&l| l > 1e-12)
            .map(|&l| -l * l.ln())
            .sum()
    }

    /// Smallest eigenvalue of the symmetrized kernel; a positive
    /// semidefinite state gives a value above roundoff (> -1e-8).
    pub fn min_symmetrized_eigenvalue(&self) -> f64 {
        self.symmetrized_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Second-moment half width of |rho| along a cut.
    ///
    /// Diagonal: q(u) = |rho(u, u)| at u = t_j. AntiDiagonal: q(u) =
    /// |rho(c + u, c - u)| at u = t_j - c, where c is the axis center; the
    /// matrix anti-diagonal realizes this cut exactly because t_j + t_(n-1-j)
    /// = 2c on a uniform grid. Width = sqrt(sum u^2 q / sum q).
    pub fn sectional_width(&self, section: Section) -> Result<f64> {
        let t = self.axis_points();
        let n = self.len();
        let center = match self.basis {
            Basis::Position => self.grid.center(),
            Basis::Momentum => self.grid.conjugate().center(),
            Basis::Finite => unreachable!(),
        };
        let (us, qs): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|j| match section {
                Section::Diagonal => (t[j], self.mat[(j, j)].norm()),
                Section::AntiDiagonal => (t[j] - center, self.mat[(j, n - 1 - j)].norm()),
            })
            .unzip();
        let mass: f64 = qs.iter().sum();
        if !mass.is_finite() || mass <= 0.0 {
            return Err(Error::DegenerateCut);
        }
        let second: f64 = us.iter().zip(&qs).map(|(&u, &q)| u * u * q).sum();
        Ok((second / mass).sqrt())
    }

    /// Position -> momentum: rho(p, pbar) = (1/2pi) int dx dxbar
    /// exp(-i p x + i pbar xbar) rho(x, xbar), evaluated on the conjugate
    /// grid by trapezoid quadrature.
    pub fn to_momentum(&self) -> Result<DensityMatrix> {
        self.to_momentum_with(TransformMethod::Auto)
    }

    pub fn to_momentum_with(&self, method: TransformMethod) -> Result<DensityMatrix> {
        if self.basis != Basis::Position {
            return Err(Error::BasisMismatch {
                expected: Basis::Position,
                found: self.basis,
            });
        }
        let mat = match resolve(method, self.len()) {
            TransformMethod::Quadrature => forward_direct(&self.grid, &self.mat),
            TransformMethod::Fft => forward_fft(&self.grid, &self.mat),
            TransformMethod::Auto => unreachable!(),
        };
        Ok(DensityMatrix {
            grid: self.grid.clone(),
            basis: Basis::Momentum,
            mat,
        })
    }

    /// Momentum -> position, inverse of `to_momentum` up to quadrature error.
    pub fn to_position(&self) -> Result<DensityMatrix> {
        self.to_position_with(TransformMethod::Auto)
    }

    pub fn to_position_with(&self, method: TransformMethod) -> Result<DensityMatrix> {
        if self.basis != Basis::Momentum {
            return Err(Error::BasisMismatch {
                expected: Basis::Momentum,
                found: self.basis,
            });
        }
        let mat = match resolve(method, self.len()) {
            TransformMethod::Quadrature => inverse_direct(&self.grid, &self.mat),
            TransformMethod::Fft => inverse_fft(&self.grid, &self.mat),
            TransformMethod::Auto => unreachable!(),
        };
        Ok(DensityMatrix {
            grid: self.grid.clone(),
            basis: Basis::Position,
            mat,
        })
    }

    /// Largest entrywise |self - other|.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        let n = self.len().min(other.len());
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for j in 0..n {
                worst = worst.max((self.mat[(j, k)] - other.mat[(j, k)]).norm());
            }
        }
        worst
    }

    /// Largest entrywise magnitude.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0f64, |a, v| a.max(v.norm()))
    }
}

fn resolve(method: TransformMethod, n: usize) -> TransformMethod {
    match method {
        TransformMethod::Auto => {
            if n <= FFT_THRESHOLD {
                TransformMethod::Quadrature
            } else {
                TransformMethod::Fft
            }
        }
        other => other,
    }
}

fn phase(theta: f64) -> Complex64 {
    Complex64::new(theta.cos(), theta.sin())
}

/// rho_p = F rho F^H with F_aj = exp(-i p_a x_j) w_j / sqrt(2 pi).
fn forward_direct(grid: &Grid, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = grid.len();
    let x = grid.points();
    let w = grid.weights();
    let p = grid.conjugate().points();
    let scale = 1.0 / (2.0 * PI).sqrt();
    let f = DMatrix::from_fn(n, n, |a, j| phase(-p[a] * x[j]) * (scale * w[j]));
    &f * rho * f.adjoint()
}

/// rho_x = G rho_p G^H with G_ja = exp(+i p_a x_j) dp / sqrt(2 pi).
fn inverse_direct(grid: &Grid, rho_p: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = grid.len();
    let x = grid.points();
    let m = grid.conjugate();
    let p = m.points();
    let scale = m.spacing() / (2.0 * PI).sqrt();
    let g = DMatrix::from_fn(n, n, |j, a| phase(p[a] * x[j]) * scale);
    &g * rho_p * g.adjoint()
}

/// Same sums as `forward_direct`, factored through FFTs.
///
/// With p_a x_j = p_min x_j + a dp x_min + 2 pi a j / n the double quadrature
/// splits into: column scaling by w_k exp(+i p_min x_k), unnormalized inverse
/// FFT over columns, row scaling by w_j exp(-i p_min x_j), forward FFT over
/// rows, then the boundary phases exp(-i a dp x_min) exp(+i b dp x_min)/(2 pi).
fn forward_fft(grid: &Grid, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = grid.len();
    let x = grid.points();
    let w = grid.weights();
    let m = grid.conjugate();
    let (p_min, dp) = (m.p_min(), m.spacing());

    let mut work = rho.clone();
    let col_scale: Vec<Complex64> = (0..n).map(|k| phase(p_min * x[k]) * w[k]).collect();
    for k in 0..n {
        let s = col_scale[k];
        for j in 0..n {
            work[(j, k)] *= s;
        }
    }

    let mut planner = FftPlanner::<f64>::new();
    let ifft = planner.plan_fft_inverse(n);
    let fft = planner.plan_fft_forward(n);

    fft_rows(&mut work, ifft.as_ref());
    let row_scale: Vec<Complex64> = (0..n).map(|j| phase(-p_min * x[j]) * w[j]).collect();
    for k in 0..n {
        for j in 0..n {
            work[(j, k)] *= row_scale[j];
        }
    }
    fft_cols(&mut work, fft.as_ref());

    let norm = 1.0 / (2.0 * PI);
    let a_phase: Vec<Complex64> = (0..n).map(|a| phase(-(a as f64) * dp * grid.x_min())).collect();
    let b_phase: Vec<Complex64> = (0..n).map(|b| phase(b as f64 * dp * grid.x_min())).collect();
    for b in 0..n {
        for a in 0..n {
            work[(a, b)] *= a_phase[a] * b_phase[b] * norm;
        }
    }
    work
}

/// FFT factorization of `inverse_direct`, mirroring `forward_fft`.
fn inverse_fft(grid: &Grid, rho_p: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = grid.len();
    let x = grid.points();
    let m = grid.conjugate();
    let (p_min, dp) = (m.p_min(), m.spacing());

    let mut work = rho_p.clone();
    let col_scale: Vec<Complex64> = (0..n).map(|b| phase(-(b as f64) * dp * grid.x_min())).collect();
    for b in 0..n {
        let s = col_scale[b];
        for a in 0..n {
            work[(a, b)] *= s;
        }
    }

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);

    fft_rows(&mut work, fft.as_ref());
    let row_scale: Vec<Complex64> = (0..n).map(|a| phase(a as f64 * dp * grid.x_min())).collect();
    for k in 0..n {
        for a in 0..n {
            work[(a, k)] *= row_scale[a];
        }
    }
    fft_cols(&mut work, ifft.as_ref());

    let norm = dp * dp / (2.0 * PI);
    let j_phase: Vec<Complex64> = (0..n).map(|j| phase(p_min * x[j])).collect();
    let k_phase: Vec<Complex64> = (0..n).map(|k| phase(-p_min * x[k])).collect();
    for k in 0..n {
        for j in 0..n {
            work[(j, k)] *= j_phase[j] * k_phase[k] * norm;
        }
    }
    work
}

/// In-place FFT of every row (transform runs over the column index).
fn fft_rows(mat: &mut DMatrix<Complex64>, fft: &dyn rustfft::Fft<f64>) {
    let n = mat.nrows();
    let mut buf = vec![Complex64::default(); mat.ncols()];
    for j in 0..n {
        for (k, b) in buf.iter_mut().enumerate() {
            *b = mat[(j, k)];
        }
        fft.process(&mut buf);
        for (k, b) in buf.iter().enumerate() {
            mat[(j, k)] = *b;
        }
    }
}

/// In-place FFT of every column (columns are contiguous in memory).
fn fft_cols(mat: &mut DMatrix<Complex64>, fft: &dyn rustfft::Fft<f64>) {
    let n = mat.nrows();
    let cols = mat.ncols();
    let slice = mat.as_mut_slice();
    for k in 0..cols {
        fft.process(&mut slice[k * n..(k + 1) * n]);
    }
}
