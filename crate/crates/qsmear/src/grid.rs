//! Uniform position grids and their conjugate momentum grids.
//!
//! Position grids are closed intervals sampled at `n` equally spaced points
//! including both endpoints. The conjugate momentum grid is the DFT frequency
//! set for that sampling, laid out monotonically from -pi/dx. With hbar = 1
//! the two satisfy dp * dx * n = 2*pi exactly.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform position grid on [x_min, x_max] with n points, x_j = x_min + j*dx.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
    dx: f64,
}

impl Grid {
    /// Endpoint-inclusive grid; requires n >= 2 and x_min < x_max, both finite.
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid {
                reason: format!("bounds must be finite, got [{x_min}, {x_max}]"),
            });
        }
        if x_min >= x_max {
            return Err(Error::InvalidGrid {
                reason: format!("x_min must be strictly below x_max, got [{x_min}, {x_max}]"),
            });
        }
        if n < 2 {
            return Err(Error::InvalidGrid {
                reason: format!("need at least 2 points, got {n}"),
            });
        }
        let dx = (x_max - x_min) / (n - 1) as f64;
        Ok(Grid { x_min, x_max, n, dx })
    }

    /// Symmetric box [-half_width, half_width].
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Grid::new(-half_width, half_width, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.dx
    }

    /// Midpoint of the interval; anti-diagonal cuts are offset against this.
    pub fn center(&self) -> f64 {
        0.5 * (self.x_min + self.x_max)
    }

    pub fn point(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Trapezoid quadrature weights: dx inside, dx/2 at the two endpoints.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![self.dx; self.n];
        w[0] = 0.5 * self.dx;
        w[self.n - 1] = 0.5 * self.dx;
        w
    }

    /// Conjugate momentum grid for this sampling (hbar = 1).
    pub fn conjugate(&self) -> MomentumGrid {
        MomentumGrid::conjugate_to(self)
    }
}

/// Uniform momentum grid conjugate to a position grid: p_a = -pi/dx + a*dp,
/// dp = 2*pi/(n*dx). Covers [-pi/dx, pi/dx) half-open, n points.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    p_min: f64,
    n: usize,
    dp: f64,
}

impl MomentumGrid {
    fn conjugate_to(grid: &Grid) -> Self {
        let dx = grid.spacing();
        let n = grid.len();
        let dp = 2.0 * PI / (n as f64 * dx);
        MomentumGrid {
            p_min: -PI / dx,
            n,
            dp,
        }
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    /// Largest represented momentum, p_min + (n-1)*dp = pi/dx - dp.
    pub fn p_max(&self) -> f64 {
        self.point(self.n - 1)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.dp
    }

    /// Midpoint of the represented range, -dp/2 for the half-open layout.
    pub fn center(&self) -> f64 {
        0.5 * (self.p_min + self.p_max())
    }

    pub fn point(&self, a: usize) -> f64 {
        self.p_min + a as f64 * self.dp
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|a| self.point(a)).collect()
    }

    /// Rectangle quadrature weights, uniformly dp. The momentum range is one
    /// full period of the discrete transform, so endpoint halving would
    /// double-count nothing and only spoil the roundtrip identity.
    pub fn weights(&self) -> Vec<f64> {
        vec![self.dp; self.n]
    }
}
