//! Coarse-graining estimates: how much probability mass a packet keeps
//! inside one monitor cell, and the SI momentum scale below which bins are
//! operationally meaningless. This is the only module that touches SI
//! constants; everything else works in hbar = 1 units.

use crate::error::{Error, Result};
use crate::qstate::{Basis, DensityMatrix, WaveFunction};

/// Reduced Planck constant, J s.
pub const HBAR_SI: f64 = 1.054571817e-34;
/// Proton rest mass, kg.
pub const PROTON_MASS_SI: f64 = 1.67262192369e-27;

/// Position cells of size sigma for packets of width s = sigma / n_ratio.
#[derive(Debug, Clone, Copy)]
pub struct CoarseGraining {
    sigma: f64,
    n_ratio: f64,
}

impl CoarseGraining {
    /// `sigma` is the cell size (meters when used for SI output); `n_ratio`
    /// is the cell-to-packet width ratio sigma / s.
    pub fn new(sigma: f64, n_ratio: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("cell size must be positive and finite, got {sigma}"),
            });
        }
        if !(n_ratio.is_finite() && n_ratio > 0.0) {
            return Err(Error::InvalidParameter {
                name: "n_ratio",
                reason: format!("width ratio must be positive and finite, got {n_ratio}"),
            });
        }
        Ok(CoarseGraining { sigma, n_ratio })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n_ratio(&self) -> f64 {
        self.n_ratio
    }
}

/// Probability mass of the position density `density` (sampled on `points`)
/// inside [center - width/2, center + width/2].
///
/// Interior samples get trapezoid weights; the strips between the cell edges
/// and the outermost interior samples are added with linearly interpolated
/// density, so the result converges at O(dx^2) regardless of where the cell
/// edges fall relative to the grid.
fn cell_mass_profile(points: &[f64], density: &[f64], center: f64, width: f64) -> Result<f64> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidParameter {
            name: "width",
            reason: format!("cell width must be positive and finite, got {width}"),
        });
    }
    let lo = center - 0.5 * width;
    let hi = center + 0.5 * width;
    let (x_min, x_max) = (points[0], points[points.len() - 1]);
    if lo < x_min - 1e-12 || hi > x_max + 1e-12 {
        return Err(Error::CellOutsideGrid {
            lo,
            hi,
            x_min,
            x_max,
        });
    }
    let lo = lo.max(x_min);
    let hi = hi.min(x_max);
    let j0 = points.partition_point(|&x| x < lo);
    let j1 = points.partition_point(|&x| x <= hi) - 1;
    if j0 > j1 {
        // Cell narrower than one grid step: single trapezoid on interpolants.
        let d_lo = interp(points, density, lo);
        let d_hi = interp(points, density, hi);
        return Ok(0.5 * (d_lo + d_hi) * (hi - lo));
    }
    let mut mass = 0.0;
    for j in j0..j1 {
        mass += 0.5 * (density[j] + density[j + 1]) * (points[j + 1] - points[j]);
    }
    if points[j0] > lo {
        mass += 0.5 * (interp(points, density, lo) + density[j0]) * (points[j0] - lo);
    }
    if points[j1] < hi {
        mass += 0.5 * (density[j1] + interp(points, density, hi)) * (hi - points[j1]);
    }
    Ok(mass)
}

fn interp(points: &[f64], density: &[f64], x: f64) -> f64 {
    let k = points.partition_point(|&p| p < x).clamp(1, points.len() - 1);
    let (x0, x1) = (points[k - 1], points[k]);
    let t = (x - x0) / (x1 - x0);
    density[k - 1] * (1.0 - t) + density[k] * t
}

/// Cell mass of a pure state's position density |psi|^2.
pub fn cell_mass_pure(wf: &WaveFunction, center: f64, width: f64) -> Result<f64> {
    let density: Vec<f64> = wf.values().iter().map(|v| v.norm_sqr()).collect();
    cell_mass_profile(&wf.grid().points(), &density, center, width)
}

/// Cell mass of a density matrix's position diagonal rho(x, x).
pub fn cell_mass(rho: &DensityMatrix, center: f64, width: f64) -> Result<f64> {
    if rho.basis() != Basis::Position {
        return Err(Error::BasisMismatch {
            expected: Basis::Position,
            found: rho.basis(),
        });
    }
    let density: Vec<f64> = (0..rho.len()).map(|j| rho.mat()[(j, j)].re).collect();
    cell_mass_profile(&rho.axis_points(), &density, center, width)
}

/// Momentum scale hbar sqrt(4 + n_ratio^2) / sigma in kg m/s: bins finer
/// than this carry no operational meaning once position is monitored at
/// cell size sigma.
pub fn momentum_bin_scale(cg: &CoarseGraining) -> f64 {
    HBAR_SI * (4.0 + cg.n_ratio * cg.n_ratio).sqrt() / cg.sigma
}

/// Ratio of the hbar = 1 momentum bin scale sqrt(4 + (sigma/s)^2) / sigma to
/// the momentum-diagonal width sqrt(4 s^2 + sigma^2) / (2 s sigma). The two
/// describe the same Gaussian, so the ratio is exactly 2 for every (s, sigma).
pub fn dimensionless_bin_consistency(s: f64, sigma: f64) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) || !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: format!("widths must be positive and finite, got ({s}, {sigma})"),
        });
    }
    let n = sigma / s;
    let bin_scale = (4.0 + n * n).sqrt() / sigma;
    let p_diag_width = (4.0 * s * s + sigma * sigma).sqrt() / (2.0 * s * sigma);
    Ok(bin_scale / p_diag_width)
}

/// How many protons moving at `speed_si` m/s it takes to carry `scale_si`
/// kg m/s of momentum. Commentary output, not a tested physical claim.
pub fn proton_count_equivalent(scale_si: f64, speed_si: f64) -> f64 {
    scale_si / (PROTON_MASS_SI * speed_si)
}
