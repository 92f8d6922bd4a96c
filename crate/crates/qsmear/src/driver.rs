//! Command pipelines behind the CLI: the single-point simulation, the
//! parallel sweep, the cross-check suite, regime classification, the
//! coarse-graining estimate, and the seeded ancilla-POVM demonstration.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classical::{
    cell_mass_pure, dimensionless_bin_consistency, momentum_bin_scale, proton_count_equivalent,
    CoarseGraining,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::measure::{
    computational_basis, povm_from_ancilla, random_density, random_state_vector, random_unitary,
    FiniteState, JointState, Povm,
};
use crate::qstate::{DensityMatrix, Section, WaveFunction};
use crate::report::PointReport;
use crate::smear::{
    apply_smeared_channel, classify_regime, gaussian_closed_form_p, gaussian_closed_form_x,
    Convention, RegimeReport, SectionalWidths, SmearKernel,
};

/// Everything one pipeline run produces. Matrices are kept so callers can
/// dump them; diagnostics live in `point`.
pub struct SimulationOutput {
    pub point: PointReport,
    pub position: DensityMatrix,
    pub momentum: DensityMatrix,
    pub regime: RegimeReport,
    pub warnings: Vec<String>,
}

/// Packet -> pure state -> smearing channel -> both bases -> diagnostics.
fn pipeline(cfg: &RunConfig, s: f64, sigma: f64) -> Result<SimulationOutput> {
    let grid = Grid::new(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n)?;
    let wf = WaveFunction::gaussian_packet(&grid, s, cfg.wavefunction.x0, cfg.wavefunction.p0)?;
    let pure = DensityMatrix::from_pure(&wf);
    let kern = SmearKernel::new(sigma, cfg.convention())?;
    let mut warnings = Vec::new();
    if !kern.resolvable_on(&grid) {
        warnings.push(format!(
            "sigma = {sigma} is below the grid resolution floor 2 dx = {:.6}; \
             the off-diagonal decay is sharper than the grid can show",
            2.0 * grid.spacing()
        ));
    }
    let position = apply_smeared_channel(&pure, &kern)?;
    let momentum = position.to_momentum()?;
    // A cut can underflow to all zeros (sub-resolution sigma wipes the
    // anti-diagonal); its width is then undefined, not an abort.
    let width = |rho: &DensityMatrix, cut: Section| match rho.sectional_width(cut) {
        Ok(w) => Ok(w),
        Err(Error::DegenerateCut) => Ok(f64::NAN),
        Err(e) => Err(e),
    };
    let widths = SectionalWidths {
        x_diag: width(&position, Section::Diagonal)?,
        x_anti: width(&position, Section::AntiDiagonal)?,
        p_diag: width(&momentum, Section::Diagonal)?,
        p_anti: width(&momentum, Section::AntiDiagonal)?,
    };
    let regime = classify_regime(
        s,
        sigma,
        cfg.regime.ref_x,
        cfg.regime.ref_p,
        cfg.regime.factor,
    )?;
    let point = PointReport {
        s,
        sigma,
        trace: position.trace(),
        purity: position.purity(),
        entropy: position.entropy(),
        widths,
        regime: regime.regime.to_string(),
    };
    Ok(SimulationOutput {
        point,
        position,
        momentum,
        regime,
        warnings,
    })
}

pub fn simulate(cfg: &RunConfig) -> Result<SimulationOutput> {
    cfg.validate()?;
    pipeline(cfg, cfg.wavefunction.s, cfg.sigma())
}

/// One pipeline run per (s, sigma) pair, in parallel. Rows come back in
/// s-major order no matter how the points were scheduled; the first failing
/// point aborts the sweep with its coordinates attached.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<PointReport>> {
    cfg.validate()?;
    let sweep = cfg.sweep_required()?;
    let mut pairs = Vec::with_capacity(sweep.s.len() * sweep.sigma.len());
    for &s in &sweep.s {
        for &sigma in &sweep.sigma {
            pairs.push((s, sigma));
        }
    }
    pairs
        .par_iter()
        .map(|&(s, sigma)| {
            pipeline(cfg, s, sigma).map(|out| out.point).map_err(|e| {
                Error::InvalidParameter {
                    name: "sweep",
                    reason: format!("point (s = {s}, sigma = {sigma}): {e}"),
                }
            })
        })
        .collect()
}

/// One named cross-check: how far the numerics strayed from the identity.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub deviation: f64,
    pub threshold: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.deviation < self.threshold
    }
}

#[derive(Debug, Clone)]
pub struct ValidationSummary {
    pub grid_n: usize,
    pub s: f64,
    pub sigma: f64,
    pub checks: Vec<CheckOutcome>,
}

impl ValidationSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "# qsmear {} validation (n = {}, s = {}, sigma = {}, trace-preserving)\n",
            env!("CARGO_PKG_VERSION"),
            self.grid_n,
            self.s,
            self.sigma
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{:<18} deviation {:.6e}  threshold {:.1e}  {}\n",
                c.name,
                c.deviation,
                c.threshold,
                if c.passed() { "pass" } else { "FAIL" }
            ));
        }
        let passed = self.checks.iter().filter(|c| c.passed()).count();
        out.push_str(&format!(
            "overall: {} ({}/{} checks)\n",
            if self.passed() { "pass" } else { "FAIL" },
            passed,
            self.checks.len()
        ));
        out
    }
}

/// Cross-checks the numerics against the analytic forms: smearing channel
/// against the position-basis closed form, transform against the
/// momentum-basis closed form, the purity law, the composition law, and the
/// sub-resolution decoherence limit. Always runs in the trace-preserving
/// convention, with the packet centered and at rest, since those are the
/// terms in which the identities are stated; a config, when given, only
/// moves the grid and the (s, sigma) point.
pub fn run_validate(cfg: Option<&RunConfig>) -> Result<ValidationSummary> {
    let (grid, s, sigma) = match cfg {
        Some(c) => {
            c.validate()?;
            (
                Grid::new(c.grid.x_min, c.grid.x_max, c.grid.n)?,
                c.wavefunction.s,
                c.sigma(),
            )
        }
        None => (Grid::symmetric(12.0, 512)?, 1.0, 1.0),
    };
    let convention = Convention::TracePreserving;
    let wf = WaveFunction::gaussian_packet(&grid, s, 0.0, 0.0)?;
    let pure = DensityMatrix::from_pure(&wf);
    let mut checks = Vec::with_capacity(5);

    let kern = SmearKernel::new(sigma, convention)?;
    let smeared = apply_smeared_channel(&pure, &kern)?;
    let closed_x = gaussian_closed_form_x(&grid, s, sigma, convention)?;
    checks.push(CheckOutcome {
        name: "closed_form_x",
        deviation: smeared.max_abs_diff(&closed_x) / closed_x.max_abs(),
        threshold: 1e-8,
    });

    let momentum = smeared.to_momentum()?;
    let closed_p = gaussian_closed_form_p(&grid, s, sigma, convention)?;
    checks.push(CheckOutcome {
        name: "closed_form_p",
        deviation: momentum.max_abs_diff(&closed_p) / closed_p.max_abs(),
        threshold: 1e-6,
    });

    let purity_law = (1.0 + 4.0 * s * s / (sigma * sigma)).powf(-0.5);
    checks.push(CheckOutcome {
        name: "purity_law",
        deviation: (smeared.purity() - purity_law).abs(),
        threshold: 1e-4,
    });

    let sigma_b = 1.5 * sigma;
    let kern_b = SmearKernel::new(sigma_b, convention)?;
    let sigma_eff = sigma * sigma_b / (sigma * sigma + sigma_b * sigma_b).sqrt();
    let twice = apply_smeared_channel(&smeared, &kern_b)?;
    let once = apply_smeared_channel(&pure, &SmearKernel::new(sigma_eff, convention)?)?;
    checks.push(CheckOutcome {
        name: "composition_law",
        deviation: twice.max_abs_diff(&once),
        threshold: 1e-10,
    });

    // Deliberately sub-resolution: sigma far under the grid spacing must
    // kill every coherence further than a few cells from the diagonal.
    let sigma_zero = grid.spacing() / 10.0;
    let crushed = apply_smeared_channel(&pure, &SmearKernel::new(sigma_zero, convention)?)?;
    let peak = pure.max_abs();
    let mut far_coherence: f64 = 0.0;
    for j in 0..grid.len() {
        for k in 0..grid.len() {
            if j.abs_diff(k) >= 3 {
                far_coherence = far_coherence.max(crushed.mat()[(j, k)].norm());
            }
        }
    }
    checks.push(CheckOutcome {
        name: "sigma_zero_limit",
        deviation: far_coherence / peak,
        threshold: 1e-3,
    });

    Ok(ValidationSummary {
        grid_n: grid.len(),
        s,
        sigma,
        checks,
    })
}

pub fn run_classify(cfg: &RunConfig) -> Result<RegimeReport> {
    cfg.validate()?;
    classify_regime(
        cfg.wavefunction.s,
        cfg.sigma(),
        cfg.regime.ref_x,
        cfg.regime.ref_p,
        cfg.regime.factor,
    )
}

pub fn render_classify(r: &RegimeReport) -> String {
    let mut out = format!("s: {:.9}\nsigma: {:.9}\n", r.s, r.sigma);
    out.push_str(&format!("w_x_diag: {:.9}\n", r.widths.x_diag));
    out.push_str(&format!("w_x_anti: {:.9}\n", r.widths.x_anti));
    out.push_str(&format!("w_p_diag: {:.9}\n", r.widths.p_diag));
    out.push_str(&format!("w_p_anti: {:.9}\n", r.widths.p_anti));
    out.push_str(&format!(
        "pattern: {} {} {} {}\n",
        r.pattern[0], r.pattern[1], r.pattern[2], r.pattern[3]
    ));
    out.push_str(&format!("regime: {}\n", r.regime));
    out
}

/// Coarse-graining numbers for one configured packet: dimensionless cell
/// mass, the SI momentum bin scale, the exactly-two consistency ratio, and
/// the proton-count comparison line.
#[derive(Debug, Clone)]
pub struct ClassicalSummary {
    pub s: f64,
    pub cell_width: f64,
    pub cell_mass: f64,
    pub sigma_si: f64,
    pub n_ratio: f64,
    pub bin_scale_si: f64,
    pub consistency: f64,
    pub proton_speed_si: f64,
    pub proton_count: f64,
}

impl ClassicalSummary {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("s: {:.9}\n", self.s));
        out.push_str(&format!("cell_width: {:.9}\n", self.cell_width));
        out.push_str(&format!("cell_mass: {:.9}\n", self.cell_mass));
        out.push_str(&format!("sigma_si: {:.6e}\n", self.sigma_si));
        out.push_str(&format!("n_ratio: {:.9}\n", self.n_ratio));
        out.push_str(&format!("momentum_bin_scale_si: {:.6e}\n", self.bin_scale_si));
        out.push_str(&format!("bin_consistency_ratio: {:.9}\n", self.consistency));
        out.push_str(&format!(
            "commentary: the bin scale equals the momentum of {:.3e} protons at {:.1e} m/s\n",
            self.proton_count, self.proton_speed_si
        ));
        out
    }
}

pub fn run_classical(cfg: &RunConfig) -> Result<ClassicalSummary> {
    cfg.validate()?;
    let grid = Grid::new(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n)?;
    let s = cfg.wavefunction.s;
    let wf = WaveFunction::gaussian_packet(&grid, s, cfg.wavefunction.x0, cfg.wavefunction.p0)?;
    let n_ratio = cfg.classical.n_ratio;
    let cell_width = n_ratio * s;
    let cell_mass = cell_mass_pure(&wf, cfg.wavefunction.x0, cell_width)?;
    let cg = CoarseGraining::new(cfg.classical.sigma_si, n_ratio)?;
    let bin_scale_si = momentum_bin_scale(&cg);
    let consistency = dimensionless_bin_consistency(s, n_ratio * s)?;
    let proton_speed_si = 1e-6;
    Ok(ClassicalSummary {
        s,
        cell_width,
        cell_mass,
        sigma_si: cfg.classical.sigma_si,
        n_ratio,
        bin_scale_si,
        consistency,
        proton_speed_si,
        proton_count: proton_count_equivalent(bin_scale_si, proton_speed_si),
    })
}

/// Seeded ancilla-POVM realization: random joint unitary, computational
/// system read-off, invariant checks, and a probability cross-check against
/// the explicit joint-space calculation on a random state.
#[derive(Debug)]
pub struct PovmDemo {
    pub dim_s: usize,
    pub dim_a: usize,
    pub seed: u64,
    pub povm: Povm,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
    pub completeness: f64,
    pub projective: bool,
    pub probabilities: Vec<f64>,
    pub probability_agreement: f64,
}

impl PovmDemo {
    pub fn render(&self) -> String {
        let mut out = format!(
            "povm demo: dim_s = {}, dim_a = {}, seed = {}\n",
            self.dim_s, self.dim_a, self.seed
        );
        for (i, e) in self.povm.effects().iter().enumerate() {
            out.push_str(&format!("effect {i}:\n"));
            for j in 0..e.nrows() {
                let row: Vec<String> = (0..e.ncols())
                    .map(|k| format!("{:+.6}{:+.6}i", e[(j, k)].re, e[(j, k)].im))
                    .collect();
                out.push_str(&format!("  [{}]\n", row.join(", ")));
            }
        }
        out.push_str(&format!("hermiticity_deviation: {:.6e}\n", self.hermiticity));
        out.push_str(&format!("min_eigenvalue: {:.6e}\n", self.min_eigenvalue));
        out.push_str(&format!("completeness_deviation: {:.6e}\n", self.completeness));
        out.push_str(&format!("projective: {}\n", self.projective));
        let probs: Vec<String> = self.probabilities.iter().map(|p| format!("{p:.9}")).collect();
        out.push_str(&format!("probabilities: [{}]\n", probs.join(", ")));
        out.push_str(&format!(
            "probability_agreement: {:.6e}\n",
            self.probability_agreement
        ));
        out.push_str(&format!(
            "valid: {}\n",
            self.hermiticity < 1e-10
                && self.min_eigenvalue > -1e-10
                && self.completeness < 1e-10
                && self.probability_agreement < 1e-10
        ));
        out
    }
}

fn hermiticity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.nrows() {
        for k in j..m.ncols() {
            worst = worst.max((m[(j, k)] - m[(k, j)].conj()).norm());
        }
    }
    worst
}

fn min_eigenvalue(m: DMatrix<Complex64>) -> f64 {
    nalgebra::linalg::SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

pub fn run_povm_demo(dim_s: usize, dim_a: usize, seed: u64) -> Result<PovmDemo> {
    for (name, dim) in [("dim_s", dim_s), ("dim_a", dim_a)] {
        if !(2..=4).contains(&dim) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("demo dimensions must be between 2 and 4, got {dim}"),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary(dim_s * dim_a, &mut rng);
    let alpha = random_state_vector(dim_a, &mut rng);
    let sys_basis = computational_basis(dim_s);
    let povm = povm_from_ancilla(&u, &alpha, &sys_basis)?;

    let identity = DMatrix::<Complex64>::identity(dim_s, dim_s);
    let sum = povm
        .effects()
        .iter()
        .fold(DMatrix::<Complex64>::zeros(dim_s, dim_s), |acc, e| acc + e);
    let hermiticity = povm
        .effects()
        .iter()
        .map(hermiticity_deviation)
        .fold(0.0f64, f64::max);
    let min_eig = povm
        .effects()
        .iter()
        .map(|e| min_eigenvalue(e.clone()))
        .fold(f64::INFINITY, f64::min);
    let completeness = (&sum - &identity)
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.norm()));
    let projective = povm.effects().iter().all(|e| {
        (e * e - e)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.norm()))
            < 1e-10
    });

    // Cross-check outcome statistics against the explicit joint picture:
    // rho x |alpha><alpha|, evolve with U, read the system factor.
    let rho = random_density(dim_s, &mut rng);
    let direct = povm.probabilities(&rho);
    let anc = FiniteState::pure(&alpha)?;
    let joint = JointState::product(&rho, &anc);
    let evolved = &u * joint.mat() * u.adjoint();
    let identity_a = DMatrix::<Complex64>::identity(dim_a, dim_a);
    let mut agreement: f64 = 0.0;
    for (i, lam) in sys_basis.iter().enumerate() {
        let proj = (lam * lam.adjoint()).kronecker(&identity_a);
        let p_joint = (&proj * &evolved)
            .diagonal()
            .iter()
            .sum::<Complex64>()
            .re;
        agreement = agreement.max((p_joint - direct[i]).abs());
    }

    Ok(PovmDemo {
        dim_s,
        dim_a,
        seed,
        povm,
        hermiticity,
        min_eigenvalue: min_eig,
        completeness,
        projective,
        probabilities: direct,
        probability_agreement: agreement,
    })
}
