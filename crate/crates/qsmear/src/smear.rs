//! Gaussian smearing channel for position-basis density matrices, the
//! closed-form asymptotic state of a monitored Gaussian packet in both bases,
//! and the coarse regime classification built on its sectional widths.
//!
//! The channel models a position monitor of finite accuracy sigma: after the
//! meter is traced out, coherence between x and xbar survives with weight
//! exp(-(x - xbar)^2 / 2 sigma^2). Exact monitoring (sigma -> 0) kills all
//! off-diagonals; a useless monitor (sigma -> infinity) leaves the state
//! untouched.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::qstate::{Basis, DensityMatrix};

/// Normalization of the coherence kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// k(x, x) = 1, so the channel preserves the trace exactly. Default for
    /// all physical diagnostics.
    TracePreserving,
    /// Keeps the raw read-off overlap prefactor 1/sqrt(2 pi sigma^2). Not
    /// trace-preserving; exists to reproduce the unnormalized kernel
    /// formulas verbatim.
    RawOverlap,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Convention::TracePreserving => write!(f, "trace-preserving"),
            Convention::RawOverlap => write!(f, "raw-overlap"),
        }
    }
}

/// Coherence kernel of a position monitor with accuracy sigma.
#[derive(Debug, Clone, Copy)]
pub struct SmearKernel {
    sigma: f64,
    convention: Convention,
}

impl SmearKernel {
    pub fn new(sigma: f64, convention: Convention) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("kernel width must be positive and finite, got {sigma}"),
            });
        }
        Ok(SmearKernel { sigma, convention })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Kernel value k(x, xbar).
    pub fn value(&self, x: f64, xbar: f64) -> f64 {
        let d = x - xbar;
        let core = (-d * d / (2.0 * self.sigma * self.sigma)).exp();
        match self.convention {
            Convention::TracePreserving => core,
            Convention::RawOverlap => core / (2.0 * PI * self.sigma * self.sigma).sqrt(),
        }
    }

    /// False when sigma is below ~2 grid steps, where the kernel varies too
    /// fast for the sampling. Deliberate sub-resolution runs (the sigma -> 0
    /// limit study) are allowed; callers decide whether to warn.
    pub fn resolvable_on(&self, grid: &Grid) -> bool {
        self.sigma >= 2.0 * grid.spacing()
    }
}

/// Normalized Gaussian smearing density g(x, y, sigma) =
/// exp(-(x - y)^2 / 2 sigma^2) / sqrt(2 pi sigma^2), a unit-mass profile in y.
///
/// sigma = 0 is the delta-function limit: well defined as a distribution,
/// not as pointwise values, so it is reported as an error variant.
pub fn smearing_function(x: f64, y: f64, sigma: f64) -> Result<f64> {
    if sigma == 0.0 {
        return Err(Error::DeltaLimit);
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("smearing width must be non-negative and finite, got {sigma}"),
        });
    }
    let d = x - y;
    Ok((-d * d / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma).sqrt())
}

/// Monitoring channel: mat_jk <- k(x_j, x_k) mat_jk on a position-basis
/// matrix. The kernel is a positive-semidefinite function, so Hermiticity
/// and positivity survive; under `TracePreserving` the diagonal (and hence
/// the trace) is exactly untouched.
pub fn apply_smeared_channel(rho: &DensityMatrix, kern: &SmearKernel) -> Result<DensityMatrix> {
    if rho.basis() != Basis::Position {
        return Err(Error::BasisMismatch {
            expected: Basis::Position,
            found: rho.basis(),
        });
    }
    let x = rho.grid().points();
    let n = rho.len();
    let mut mat = rho.mat().clone();
    for k in 0..n {
        for j in 0..n {
            mat[(j, k)] *= kern.value(x[j], x[k]);
        }
    }
    DensityMatrix::from_matrix(rho.grid(), Basis::Position, mat)
}

fn check_widths(s: f64, sigma: f64) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: format!("packet width must be positive and finite, got {s}"),
        });
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("kernel width must be positive and finite, got {sigma}"),
        });
    }
    Ok(())
}

/// Asymptotic position kernel of a width-s packet monitored at accuracy
/// sigma: rho(x, xbar) = C exp(-(x - xbar)^2 / 2 sigma^2 - (x^2 + xbar^2) / 4 s^2).
///
/// `TracePreserving` picks C = 1/sqrt(2 pi s^2) (unit trace on the line);
/// `RawOverlap` keeps C = 1/sqrt(4 pi^2 s^2 sigma^2).
pub fn gaussian_closed_form_x(
    grid: &Grid,
    s: f64,
    sigma: f64,
    convention: Convention,
) -> Result<DensityMatrix> {
    check_widths(s, sigma)?;
    let pref = match convention {
        Convention::TracePreserving => 1.0 / (2.0 * PI * s * s).sqrt(),
        Convention::RawOverlap => 1.0 / (4.0 * PI * PI * s * s * sigma * sigma).sqrt(),
    };
    let x = grid.points();
    let n = grid.len();
    let mat = DMatrix::from_fn(n, n, |j, k| {
        let d = x[j] - x[k];
        let e = -d * d / (2.0 * sigma * sigma) - (x[j] * x[j] + x[k] * x[k]) / (4.0 * s * s);
        Complex64::new(pref * e.exp(), 0.0)
    });
    DensityMatrix::from_matrix(grid, Basis::Position, mat)
}

/// Momentum kernel of the same asymptotic state, sampled on the conjugate
/// grid: rho(p, pbar) = C exp(-(p - pbar)^2 2 s^4 / D - (p^2 + pbar^2) s^2 sigma^2 / D)
/// with D = 4 s^2 + sigma^2.
///
/// `TracePreserving` picks C = 2 s sigma / (sqrt(2 pi) sqrt(D)) (unit trace
/// on the line). `RawOverlap` keeps C = 2 s / sqrt(D); note this is not the
/// Fourier image of the raw-overlap position kernel, it reproduces that
/// formula's own printed normalization.
pub fn gaussian_closed_form_p(
    grid: &Grid,
    s: f64,
    sigma: f64,
    convention: Convention,
) -> Result<DensityMatrix> {
    check_widths(s, sigma)?;
    let d = 4.0 * s * s + sigma * sigma;
    let pref = match convention {
        Convention::TracePreserving => 2.0 * s * sigma / ((2.0 * PI).sqrt() * d.sqrt()),
        Convention::RawOverlap => 2.0 * s / d.sqrt(),
    };
    let p = grid.conjugate().points();
    let n = grid.len();
    let mat = DMatrix::from_fn(n, n, |a, b| {
        let q = p[a] - p[b];
        let e = (-q * q * 2.0 * s.powi(4) - (p[a] * p[a] + p[b] * p[b]) * s * s * sigma * sigma) / d;
        Complex64::new(pref * e.exp(), 0.0)
    });
    DensityMatrix::from_matrix(grid, Basis::Momentum, mat)
}

/// Analytic Gaussian-equivalent standard deviations of the four sectional
/// cuts of the monitored-packet state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionalWidths {
    /// Position diagonal rho(x, x): width s.
    pub x_diag: f64,
    /// Position anti-diagonal rho(x, -x): coherence length s sigma / sqrt(4 s^2 + sigma^2).
    pub x_anti: f64,
    /// Momentum diagonal rho(p, p): width sqrt(4 s^2 + sigma^2) / (2 s sigma).
    pub p_diag: f64,
    /// Momentum anti-diagonal rho(p, -p): width 1 / (2 s).
    pub p_anti: f64,
}

impl SectionalWidths {
    /// Cross-products (x_diag * p_anti, x_anti * p_diag); both are 1/2
    /// identically, the inverse spread relation between conjugate bases.
    pub fn products(&self) -> (f64, f64) {
        (self.x_diag * self.p_anti, self.x_anti * self.p_diag)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x_diag, self.x_anti, self.p_diag, self.p_anti]
    }
}

/// Closed-form sectional widths for packet width s and monitor accuracy sigma.
pub fn sectional_widths(s: f64, sigma: f64) -> Result<SectionalWidths> {
    check_widths(s, sigma)?;
    let d = (4.0 * s * s + sigma * sigma).sqrt();
    Ok(SectionalWidths {
        x_diag: s,
        x_anti: s * sigma / d,
        p_diag: d / (2.0 * s * sigma),
        p_anti: 1.0 / (2.0 * s),
    })
}

/// Qualitative size of one width against a reference scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpreadFlag {
    Spread,
    Localized,
    Intermediate,
}

impl fmt::Display for SpreadFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpreadFlag::Spread => write!(f, "spread"),
            SpreadFlag::Localized => write!(f, "localized"),
            SpreadFlag::Intermediate => write!(f, "intermediate"),
        }
    }
}

/// The four asymptotic corners of the (meter accuracy, packet width) plane,
/// identified by the joint spread/localized pattern of the four cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// sigma small, s large: position diagonal spread but coherence length
    /// crushed; momentum diagonal spread with localized anti-diagonal.
    AccurateMeterBroadPacket,
    /// sigma small, s small: localized in position on both cuts, spread in
    /// momentum on both cuts.
    AccurateMeterNarrowPacket,
    /// sigma large, s small: same flag pattern as the accurate/narrow corner
    /// (the meter barely acts on an already narrow packet); told apart by
    /// where sigma itself sits against the reference scale.
    CoarseMeterNarrowPacket,
    /// sigma large, s large: spread in position on both cuts, localized in
    /// momentum on both cuts.
    CoarseMeterBroadPacket,
    /// Any mixed or threshold-straddling pattern.
    Intermediate,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::AccurateMeterBroadPacket => write!(f, "accurate-meter-broad-packet"),
            Regime::AccurateMeterNarrowPacket => write!(f, "accurate-meter-narrow-packet"),
            Regime::CoarseMeterNarrowPacket => write!(f, "coarse-meter-narrow-packet"),
            Regime::CoarseMeterBroadPacket => write!(f, "coarse-meter-broad-packet"),
            Regime::Intermediate => write!(f, "intermediate"),
        }
    }
}

/// Width pattern plus the regime it lands in.
#[derive(Debug, Clone)]
pub struct RegimeReport {
    pub s: f64,
    pub sigma: f64,
    pub widths: SectionalWidths,
    /// Flags for (x-diag, x-anti, p-diag, p-anti) in that order.
    pub pattern: [SpreadFlag; 4],
    pub regime: Regime,
}

fn flag(width: f64, reference: f64, factor: f64) -> SpreadFlag {
    if width > factor * reference {
        SpreadFlag::Spread
    } else if width < reference / factor {
        SpreadFlag::Localized
    } else {
        SpreadFlag::Intermediate
    }
}

/// Classify (s, sigma) against user-chosen reference scales: a width counts
/// as spread above factor * ref and localized below ref / factor. Position
/// cuts compare against `ref_x`, momentum cuts against `ref_p`.
///
/// The narrow-packet corners share one flag pattern, so that pattern is
/// resolved into accurate-meter vs coarse-meter by testing sigma itself
/// against the same factor thresholds on `ref_x`.
pub fn classify_regime(
    s: f64,
    sigma: f64,
    ref_x: f64,
    ref_p: f64,
    factor: f64,
) -> Result<RegimeReport> {
    check_widths(s, sigma)?;
    if !(ref_x.is_finite() && ref_x > 0.0) || !(ref_p.is_finite() && ref_p > 0.0) {
        return Err(Error::InvalidParameter {
            name: "ref",
            reason: format!("reference scales must be positive, got ({ref_x}, {ref_p})"),
        });
    }
    if !(factor.is_finite() && factor >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "factor",
            reason: format!("threshold factor must be >= 1, got {factor}"),
        });
    }
    let widths = sectional_widths(s, sigma)?;
    let pattern = [
        flag(widths.x_diag, ref_x, factor),
        flag(widths.x_anti, ref_x, factor),
        flag(widths.p_diag, ref_p, factor),
        flag(widths.p_anti, ref_p, factor),
    ];
    use SpreadFlag::{Localized as L, Spread as S};
    let regime = match pattern {
        [S, L, S, L] => Regime::AccurateMeterBroadPacket,
        [L, L, S, S] => match flag(sigma, ref_x, factor) {
            SpreadFlag::Localized => Regime::AccurateMeterNarrowPacket,
            SpreadFlag::Spread => Regime::CoarseMeterNarrowPacket,
            SpreadFlag::Intermediate => Regime::Intermediate,
        },
        [S, S, L, L] => Regime::CoarseMeterBroadPacket,
        _ => Regime::Intermediate,
    };
    Ok(RegimeReport {
        s,
        sigma,
        widths,
        pattern,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{Section, WaveFunction};

    fn packet_density(half_width: f64, n: usize, s: f64) -> DensityMatrix {
        let grid = Grid::symmetric(half_width, n).unwrap();
        let wf = WaveFunction::gaussian_packet(&grid, s, 0.0, 0.0).unwrap();
        DensityMatrix::from_pure(&wf)
    }

    fn max_rel_dev(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
        a.max_abs_diff(b) / b.max_abs()
    }

    #[test]
    fn smearing_density_peak_value() {
        let g = smearing_function(0.0, 0.0, 1.0).unwrap();
        assert!((g - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!((g - 0.39894).abs() < 1e-5);
    }

    #[test]
    fn smearing_density_has_unit_mass() {
        let grid = Grid::symmetric(8.0, 801).unwrap();
        let mass: f64 = grid
            .points()
            .iter()
            .zip(grid.weights())
            .map(|(&y, w)| w * smearing_function(0.3, y, 1.0).unwrap())
            .sum();
        assert!((mass - 1.0).abs() < 1e-8);
    }

    #[test]
    fn smearing_density_delta_limit() {
        assert!(matches!(
            smearing_function(0.0, 0.0, 0.0),
            Err(Error::DeltaLimit)
        ));
        assert!(smearing_function(0.0, 0.0, -1.0).is_err());
        assert!(smearing_function(0.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn subresolution_mass_sits_on_nearest_cell() {
        let grid = Grid::symmetric(1.0, 201).unwrap();
        let x = grid.point(150);
        let sigma = grid.spacing() / 10.0;
        let contributions: Vec<f64> = grid
            .points()
            .iter()
            .zip(grid.weights())
            .map(|(&y, w)| w * smearing_function(x, y, sigma).unwrap())
            .collect();
        let total: f64 = contributions.iter().sum();
        assert!(contributions[150] / total > 1.0 - 1e-8);
    }

    #[test]
    fn huge_sigma_is_identity_channel() {
        let rho = packet_density(10.0, 128, 1.0);
        let kern = SmearKernel::new(1e12, Convention::TracePreserving).unwrap();
        let out = apply_smeared_channel(&rho, &kern).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-12);
        assert!((out.purity() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn trace_preserving_leaves_diagonal_untouched() {
        let rho = packet_density(10.0, 128, 1.0);
        let kern = SmearKernel::new(0.7, Convention::TracePreserving).unwrap();
        let out = apply_smeared_channel(&rho, &kern).unwrap();
        assert_eq!(out.trace(), rho.trace());
        assert!(out.hermiticity_deviation() < 1e-15);
    }

    #[test]
    fn corner_coherence_suppressed_by_kernel_bound() {
        let half = 6.0;
        let rho = packet_density(half, 128, 1.0);
        let kern = SmearKernel::new(1.0, Convention::TracePreserving).unwrap();
        let out = apply_smeared_channel(&rho, &kern).unwrap();
        let pure_corner = rho.mat()[(127, 0)].norm();
        let smeared_corner = out.mat()[(127, 0)].norm();
        let bound = (-(2.0 * half).powi(2) / 2.0).exp();
        assert!(smeared_corner <= pure_corner * bound * (1.0 + 1e-12));
    }

    #[test]
    fn channel_matches_position_closed_form() {
        for &(s, sigma) in &[(1.0f64, 1.0), (0.5, 2.0), (2.0, 0.5)] {
            let half = 10.0 * s.max(sigma);
            let grid = Grid::symmetric(half, 256).unwrap();
            let wf = WaveFunction::gaussian_packet(&grid, s, 0.0, 0.0).unwrap();
            let rho = DensityMatrix::from_pure(&wf);
            let kern = SmearKernel::new(sigma, Convention::TracePreserving).unwrap();
            let out = apply_smeared_channel(&rho, &kern).unwrap();
            let closed =
                gaussian_closed_form_x(&grid, s, sigma, Convention::TracePreserving).unwrap();
            let dev = max_rel_dev(&out, &closed);
            assert!(dev < 1e-8, "(s, sigma) = ({s}, {sigma}): {dev:.3e}");
        }
    }

    #[test]
    fn closed_form_x_cut_profiles() {
        let (s, sigma) = (0.8, 1.3);
        let grid = Grid::symmetric(10.0, 201).unwrap();
        let rho = gaussian_closed_form_x(&grid, s, sigma, Convention::TracePreserving).unwrap();
        let mid = 100;
        let peak = rho.mat()[(mid, mid)].re;
        for j in [20usize, 60, 130, 180] {
            let x = grid.point(j);
            let diag = rho.mat()[(j, j)].re / peak;
            assert!((diag - (-x * x / (2.0 * s * s)).exp()).abs() < 1e-12);
            let anti = rho.mat()[(j, 200 - j)].re / peak;
            let expect = (-x * x * (2.0 / (sigma * sigma) + 1.0 / (2.0 * s * s))).exp();
            assert!((anti - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_traces() {
        let grid = Grid::symmetric(12.0, 256).unwrap();
        let x = gaussian_closed_form_x(&grid, 1.0, 1.0, Convention::TracePreserving).unwrap();
        assert!((x.trace() - 1.0).abs() < 1e-10);
        let p = gaussian_closed_form_p(&grid, 1.0, 1.0, Convention::TracePreserving).unwrap();
        assert!((p.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn raw_overlap_prefactors_verbatim() {
        let (s, sigma) = (0.9, 1.7);
        let grid = Grid::symmetric(12.0, 129).unwrap();
        let x = gaussian_closed_form_x(&grid, s, sigma, Convention::RawOverlap).unwrap();
        let mid = 64;
        assert!((x.mat()[(mid, mid)].re - 1.0 / (2.0 * PI * s * sigma)).abs() < 1e-14);
        let p = gaussian_closed_form_p(&grid, s, sigma, Convention::RawOverlap).unwrap();
        // Momentum grid has no exact zero point on even n; use the closest
        // and divide out the tiny exponential.
        let pm = grid.conjugate();
        let b = 64usize;
        let pb = pm.point(b);
        let d = 4.0 * s * s + sigma * sigma;
        let expect = 2.0 * s / d.sqrt() * (-2.0 * pb * pb * s * s * sigma * sigma / d).exp();
        assert!((p.mat()[(b, b)].re - expect).abs() < 1e-14);
    }

    #[test]
    fn momentum_closed_form_matches_transform() {
        let (s, sigma) = (1.0f64, 0.5);
        let grid = Grid::symmetric(10.0 * s.max(sigma), 256).unwrap();
        let x = gaussian_closed_form_x(&grid, s, sigma, Convention::TracePreserving).unwrap();
        let p_num = x.to_momentum().unwrap();
        let p_form = gaussian_closed_form_p(&grid, s, sigma, Convention::TracePreserving).unwrap();
        let dev = max_rel_dev(&p_num, &p_form);
        assert!(dev < 1e-6, "max relative deviation {dev:.3e}");
    }

    #[test]
    fn purity_follows_width_ratio_law() {
        let grid = Grid::symmetric(10.0, 256).unwrap();
        let rho = gaussian_closed_form_x(&grid, 0.5, 1.0, Convention::TracePreserving).unwrap();
        let expect = (1.0f64 + 4.0 * 0.25 / 1.0).powf(-0.5);
        assert!((expect - 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
        assert!((rho.purity() - expect).abs() < 1e-4);
    }

    #[test]
    fn purity_monotone_entropy_antimonotone_in_sigma() {
        let s = 1.0;
        let grid = Grid::symmetric(12.0, 200).unwrap();
        let wf = WaveFunction::gaussian_packet(&grid, s, 0.0, 0.0).unwrap();
        let rho = DensityMatrix::from_pure(&wf);
        let mut purities = Vec::new();
        let mut entropies = Vec::new();
        for sigma in [0.5 * s, s, 2.0 * s, 4.0 * s, 8.0 * s] {
            let kern = SmearKernel::new(sigma, Convention::TracePreserving).unwrap();
            let out = apply_smeared_channel(&rho, &kern).unwrap();
            purities.push(out.purity());
            entropies.push(out.entropy());
        }
        for w in purities.windows(2) {
            assert!(w[0] < w[1], "purity not increasing in sigma: {purities:?}");
        }
        for w in entropies.windows(2) {
            assert!(w[0] > w[1], "entropy not decreasing in sigma: {entropies:?}");
        }
    }

    #[test]
    fn channel_composition_adds_inverse_squares() {
        let (s1, s2) = (0.7, 1.3);
        let rho = packet_density(10.0, 160, 1.0);
        let k1 = SmearKernel::new(s1, Convention::TracePreserving).unwrap();
        let k2 = SmearKernel::new(s2, Convention::TracePreserving).unwrap();
        let staged = apply_smeared_channel(&apply_smeared_channel(&rho, &k1).unwrap(), &k2).unwrap();
        let eff = s1 * s2 / (s1 * s1 + s2 * s2).sqrt();
        let keff = SmearKernel::new(eff, Convention::TracePreserving).unwrap();
        let once = apply_smeared_channel(&rho, &keff).unwrap();
        assert!(staged.max_abs_diff(&once) < 1e-10);
    }

    #[test]
    fn channel_keeps_states_positive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let grid = Grid::symmetric(12.0, 96).unwrap();
        for trial in 0..4 {
            // Random mixture of randomly placed packets.
            let mut mat = DMatrix::zeros(96, 96);
            let mut weights = [0.0; 3];
            for w in &mut weights {
                *w = rng.gen_range(0.1..1.0);
            }
            let total: f64 = weights.iter().sum();
            for &w in &weights {
                let s = rng.gen_range(0.4..1.5);
                let x0 = rng.gen_range(-2.0..2.0);
                let wf = WaveFunction::gaussian_packet(&grid, s, x0, 0.0).unwrap();
                mat += DensityMatrix::from_pure(&wf).mat() * Complex64::new(w / total, 0.0);
            }
            let rho = DensityMatrix::from_matrix(&grid, Basis::Position, mat).unwrap();
            let sigma = rng.gen_range(0.3..3.0);
            let kern = SmearKernel::new(sigma, Convention::TracePreserving).unwrap();
            let out = apply_smeared_channel(&rho, &kern).unwrap();
            let min_eig = out.min_symmetrized_eigenvalue();
            assert!(
                min_eig > -1e-8,
                "trial {trial}: min eigenvalue {min_eig:.3e}"
            );
        }
    }

    #[test]
    fn smeared_widths_match_analytic_tuple() {
        let (s, sigma) = (1.0, 1.0);
        let grid = Grid::symmetric(12.0, 256).unwrap();
        let rho_x = gaussian_closed_form_x(&grid, s, sigma, Convention::TracePreserving).unwrap();
        let rho_p = rho_x.to_momentum().unwrap();
        let analytic = sectional_widths(s, sigma).unwrap();
        assert!((analytic.x_diag - 1.0).abs() < 1e-15);
        assert!((analytic.x_anti - 1.0 / 5.0f64.sqrt()).abs() < 1e-15);
        assert!((analytic.p_diag - 5.0f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((analytic.p_anti - 0.5).abs() < 1e-15);
        let measured = [
            rho_x.sectional_width(Section::Diagonal).unwrap(),
            rho_x.sectional_width(Section::AntiDiagonal).unwrap(),
            rho_p.sectional_width(Section::Diagonal).unwrap(),
            rho_p.sectional_width(Section::AntiDiagonal).unwrap(),
        ];
        for (m, a) in measured.iter().zip(analytic.as_array()) {
            assert!((m - a).abs() / a < 0.02, "measured {m} vs analytic {a}");
        }
    }

    #[test]
    fn width_products_are_half() {
        for &(s, sigma) in &[(0.5, 0.5), (1.0, 2.0), (3.0, 0.2), (10.0, 10.0)] {
            let (p1, p2) = sectional_widths(s, sigma).unwrap().products();
            assert!((p1 - 0.5).abs() < 1e-12);
            assert!((p2 - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn small_sigma_width_limits() {
        let w = sectional_widths(1.0, 1e-8).unwrap();
        assert!((w.x_anti / (1e-8 / 2.0) - 1.0).abs() < 1e-8);
        assert!((w.p_diag * 1e-8 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn regime_corners_are_distinct() {
        use SpreadFlag::{Localized as L, Spread as S};
        let f = 3.0;
        let r1 = classify_regime(100.0, 0.01, 1.0, 1.0, f).unwrap();
        assert_eq!(r1.pattern, [S, L, S, L]);
        assert_eq!(r1.regime, Regime::AccurateMeterBroadPacket);

        let r2 = classify_regime(0.01, 0.01, 1.0, 1.0, f).unwrap();
        assert_eq!(r2.pattern, [L, L, S, S]);
        assert_eq!(r2.regime, Regime::AccurateMeterNarrowPacket);

        let r3 = classify_regime(0.01, 100.0, 1.0, 1.0, f).unwrap();
        assert_eq!(r3.pattern, [L, L, S, S]);
        assert_eq!(r3.regime, Regime::CoarseMeterNarrowPacket);

        let r4 = classify_regime(100.0, 100.0, 1.0, 1.0, f).unwrap();
        assert_eq!(r4.pattern, [S, S, L, L]);
        assert_eq!(r4.regime, Regime::CoarseMeterBroadPacket);
    }

    #[test]
    fn moderate_parameters_are_intermediate() {
        let r = classify_regime(1.0, 1.0, 1.0, 1.0, 3.0).unwrap();
        assert_eq!(r.regime, Regime::Intermediate);
        assert!(r.pattern.contains(&SpreadFlag::Intermediate));
    }

    #[test]
    fn bad_classifier_inputs_rejected() {
        assert!(classify_regime(-1.0, 1.0, 1.0, 1.0, 3.0).is_err());
        assert!(classify_regime(1.0, 1.0, 0.0, 1.0, 3.0).is_err());
        assert!(classify_regime(1.0, 1.0, 1.0, 1.0, 0.5).is_err());
    }
}
