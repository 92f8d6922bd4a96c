//! Generalized measurements in finite dimension: operator sets {M_k}, the
//! POVMs they induce, ancilla (dilation) realizations, the entangling
//! system-apparatus evolution, outcome reduction, statistical averaging and
//! partial traces.
//!
//! Joint indices are system-major: basis state |s⟩⊗|a⟩ sits at s * d_a + a,
//! matching the Kronecker product with the system as left factor.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Elementwise tolerance for algebraic invariants (completeness, unit
/// trace, orthonormality).
const ALG_TOL: f64 = 1e-10;
/// Probabilities at or below this are treated as impossible outcomes.
const PROB_FLOOR: f64 = 1e-12;

fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm()))
}

fn hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.nrows() {
        for k in j..m.ncols() {
            worst = worst.max((m[(j, k)] - m[(k, j)].conj()).norm());
        }
    }
    worst
}

fn min_eigenvalue(hermitian: DMatrix<Complex64>) -> f64 {
    nalgebra::linalg::SymmetricEigen::new(hermitian)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

fn trace(m: &DMatrix<Complex64>) -> Complex64 {
    (0..m.nrows()).map(|j| m[(j, j)]).sum()
}

fn orthonormality_deviation(states: &[DVector<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (j, a) in states.iter().enumerate() {
        for (k, b) in states.iter().enumerate() {
            let want = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((a.dotc(b) - Complex64::new(want, 0.0)).norm());
        }
    }
    worst
}

/// Finite-dimensional state in density-matrix form.
#[derive(Debug, Clone)]
pub struct FiniteState {
    mat: DMatrix<Complex64>,
}

impl FiniteState {
    /// Pure state from a unit-norm vector.
    pub fn pure(vec: &DVector<Complex64>) -> Result<Self> {
        let deviation = (vec.norm() - 1.0).abs();
        if deviation > ALG_TOL {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(FiniteState {
            mat: vec * vec.adjoint(),
        })
    }

    /// Computational basis state |i⟩⟨i|.
    pub fn pure_basis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::IndexOutOfRange { index: i, len: dim });
        }
        let mut mat = DMatrix::zeros(dim, dim);
        mat[(i, i)] = Complex64::new(1.0, 0.0);
        Ok(FiniteState { mat })
    }

    /// Mixed state; validates Hermiticity, positivity and unit trace.
    pub fn mixed(mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                found: mat.ncols(),
            });
        }
        let herm = hermitian_deviation(&mat);
        if herm > ALG_TOL {
            return Err(Error::NotNormalized { deviation: herm });
        }
        let tr = (trace(&mat).re - 1.0).abs();
        if tr > ALG_TOL {
            return Err(Error::NotNormalized { deviation: tr });
        }
        let min = min_eigenvalue(mat.clone());
        if min < -ALG_TOL {
            return Err(Error::NotNormalized { deviation: -min });
        }
        Ok(FiniteState { mat })
    }

    fn wrap(mat: DMatrix<Complex64>) -> Self {
        FiniteState { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn density(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        trace(&self.mat).re
    }

    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Von Neumann entropy, eigenvalues below 1e-12 skipped.
    pub fn entropy(&self) -> f64 {
        nalgebra::linalg::SymmetricEigen::new(self.mat.clone())
            .eigenvalues
            .iter()
            .filter(|&&l| l > 1e-12)
            .map(|&l| -l * l.ln())
            .sum()
    }

    /// Tr(rho O) for an observable O.
    pub fn expectation(&self, obs: &DMatrix<Complex64>) -> Complex64 {
        trace(&(&self.mat * obs))
    }

    pub fn max_abs_diff(&self, other: &FiniteState) -> f64 {
        max_abs_diff(&self.mat, &other.mat)
    }
}

/// Measurement operator set {M_k} with sum_k M_k† M_k = 1.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    ops: Vec<DMatrix<Complex64>>,
}

impl MeasurementSet {
    pub fn new(ops: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let dim = match ops.first() {
            Some(m) => m.nrows(),
            None => {
                return Err(Error::InvalidParameter {
                    name: "ops",
                    reason: "measurement set must contain at least one operator".into(),
                })
            }
        };
        for m in &ops {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.nrows().max(m.ncols()),
                });
            }
        }
        let mut sum = DMatrix::zeros(dim, dim);
        for m in &ops {
            sum += m.adjoint() * m;
        }
        let deviation = max_abs_diff(&sum, &DMatrix::identity(dim, dim));
        if deviation > ALG_TOL {
            return Err(Error::IncompleteSet { deviation });
        }
        Ok(MeasurementSet { ops })
    }

    /// The trivial set {1}.
    pub fn identity(dim: usize) -> Self {
        MeasurementSet {
            ops: vec![DMatrix::identity(dim, dim)],
        }
    }

    pub fn ops(&self) -> &[DMatrix<Complex64>] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }
}

/// Outcome probability p_k = Tr(rho M_k† M_k) and the conditional state
/// M_k rho M_k† / p_k.
pub fn apply_measurement(
    rho: &FiniteState,
    set: &MeasurementSet,
    k: usize,
) -> Result<(FiniteState, f64)> {
    if k >= set.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: set.len(),
        });
    }
    if set.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: set.dim(),
        });
    }
    let m = &set.ops[k];
    let updated = m * rho.density() * m.adjoint();
    let p = trace(&updated).re;
    if p <= PROB_FLOOR {
        return Err(Error::NegligibleOutcome {
            index: k,
            probability: p,
        });
    }
    Ok((
        FiniteState::wrap(updated / Complex64::new(p, 0.0)),
        p,
    ))
}

/// True iff every operator is a Hermitian projector and distinct operators
/// are mutually orthogonal: M_k M_l = delta_kl M_k.
pub fn is_projective(set: &MeasurementSet) -> bool {
    for m in &set.ops {
        if hermitian_deviation(m) > ALG_TOL {
            return false;
        }
    }
    for (k, mk) in set.ops.iter().enumerate() {
        for (l, ml) in set.ops.iter().enumerate() {
            let prod = mk * ml;
            let want = if k == l {
                mk.clone()
            } else {
                DMatrix::zeros(set.dim(), set.dim())
            };
            if max_abs_diff(&prod, &want) > ALG_TOL {
                return false;
            }
        }
    }
    true
}

/// Positive operator-valued measure: effects E_i, Hermitian PSD, summing to 1.
#[derive(Debug, Clone)]
pub struct Povm {
    effects: Vec<DMatrix<Complex64>>,
}

impl Povm {
    pub fn new(effects: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let dim = match effects.first() {
            Some(e) => e.nrows(),
            None => {
                return Err(Error::InvalidParameter {
                    name: "effects",
                    reason: "POVM must contain at least one effect".into(),
                })
            }
        };
        let mut sum = DMatrix::zeros(dim, dim);
        for e in &effects {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.nrows().max(e.ncols()),
                });
            }
            let herm = hermitian_deviation(e);
            if herm > ALG_TOL {
                return Err(Error::NotNormalized { deviation: herm });
            }
            let min = min_eigenvalue(e.clone());
            if min < -ALG_TOL {
                return Err(Error::NotNormalized { deviation: -min });
            }
            sum += e;
        }
        let deviation = max_abs_diff(&sum, &DMatrix::identity(dim, dim));
        if deviation > ALG_TOL {
            return Err(Error::IncompleteSet { deviation });
        }
        Ok(Povm { effects })
    }

    pub fn effects(&self) -> &[DMatrix<Complex64>] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    /// Outcome distribution Tr(E_i rho).
    pub fn probabilities(&self, rho: &FiniteState) -> Vec<f64> {
        self.effects
            .iter()
            .map(|e| trace(&(e * rho.density())).re)
            .collect()
    }
}

/// POVM induced by a measurement set: E_i = M_i† M_i.
pub fn povm_from(set: &MeasurementSet) -> Povm {
    Povm {
        effects: set.ops.iter().map(|m| m.adjoint() * m).collect(),
    }
}

/// POVM realized by entangling with an ancilla prepared in `alpha`, evolving
/// with `u`, and reading the system basis projectively on the joint space:
/// E_i = B† (|λ_i⟩⟨λ_i| ⊗ 1_A) B with B = U (1_S ⊗ |alpha⟩).
pub fn povm_from_ancilla(
    u: &DMatrix<Complex64>,
    alpha: &DVector<Complex64>,
    sys_basis: &[DVector<Complex64>],
) -> Result<Povm> {
    let d_s = sys_basis.len();
    let d_a = alpha.len();
    if d_s == 0 || sys_basis.iter().any(|v| v.len() != d_s) {
        return Err(Error::InvalidParameter {
            name: "sys_basis",
            reason: "system basis must be a complete set of same-dimension vectors".into(),
        });
    }
    let joint = d_s * d_a;
    if u.nrows() != joint || u.ncols() != joint {
        return Err(Error::DimensionMismatch {
            expected: joint,
            found: u.nrows().max(u.ncols()),
        });
    }
    let unit_dev = max_abs_diff(&(u.adjoint() * u), &DMatrix::identity(joint, joint));
    if unit_dev > ALG_TOL {
        return Err(Error::NotUnitary {
            deviation: unit_dev,
        });
    }
    let basis_dev = orthonormality_deviation(sys_basis);
    if basis_dev > ALG_TOL {
        return Err(Error::NotOrthonormal {
            deviation: basis_dev,
        });
    }
    let alpha_dev = (alpha.norm() - 1.0).abs();
    if alpha_dev > ALG_TOL {
        return Err(Error::NotNormalized {
            deviation: alpha_dev,
        });
    }

    // B maps a system vector into the joint space: columns U (e_m ⊗ alpha).
    let mut b = DMatrix::zeros(joint, d_s);
    for m in 0..d_s {
        let mut embedded = DVector::zeros(joint);
        for a in 0..d_a {
            embedded[m * d_a + a] = alpha[a];
        }
        b.set_column(m, &(u * embedded));
    }

    let mut effects = Vec::with_capacity(d_s);
    for lam in sys_basis {
        let proj_sys = lam * lam.adjoint();
        let proj_joint = proj_sys.kronecker(&DMatrix::identity(d_a, d_a));
        let mut e = b.adjoint() * proj_joint * &b;
        // B† P B is Hermitian in exact arithmetic; enforce it against roundoff.
        let adj = e.adjoint();
        e += adj;
        e *= Complex64::new(0.5, 0.0);
        effects.push(e);
    }
    Povm::new(effects)
}

/// State on a system ⊗ ancilla pair.
#[derive(Debug, Clone)]
pub struct JointState {
    d_s: usize,
    d_a: usize,
    mat: DMatrix<Complex64>,
}

impl JointState {
    pub fn product(sys: &FiniteState, anc: &FiniteState) -> JointState {
        JointState {
            d_s: sys.dim(),
            d_a: anc.dim(),
            mat: sys.density().kronecker(anc.density()),
        }
    }

    /// Wrap a joint matrix; validates Hermiticity, trace and positivity.
    pub fn from_matrix(d_s: usize, d_a: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != d_s * d_a || mat.ncols() != d_s * d_a {
            return Err(Error::DimensionMismatch {
                expected: d_s * d_a,
                found: mat.nrows().max(mat.ncols()),
            });
        }
        let herm = hermitian_deviation(&mat);
        if herm > ALG_TOL {
            return Err(Error::NotNormalized { deviation: herm });
        }
        let tr = (trace(&mat).re - 1.0).abs();
        if tr > ALG_TOL {
            return Err(Error::NotNormalized { deviation: tr });
        }
        let min = min_eigenvalue(mat.clone());
        if min < -1e-8 {
            return Err(Error::NotNormalized { deviation: -min });
        }
        Ok(JointState { d_s, d_a, mat })
    }

    fn wrap(d_s: usize, d_a: usize, mat: DMatrix<Complex64>) -> Self {
        JointState { d_s, d_a, mat }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d_s, self.d_a)
    }

    pub fn mat(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        trace(&self.mat).re
    }

    pub fn max_abs_diff(&self, other: &JointState) -> f64 {
        max_abs_diff(&self.mat, &other.mat)
    }
}

/// Entangled post-interaction state sum_jk c_j c_k* |λ_j α_j⟩⟨λ_k α_k|: the
/// j-th system component drags the apparatus into the j-th read-off state.
pub fn von_neumann_entangle(
    c: &[Complex64],
    readoff: &[DVector<Complex64>],
) -> Result<JointState> {
    let d_s = c.len();
    if d_s == 0 {
        return Err(Error::InvalidParameter {
            name: "c",
            reason: "need at least one coefficient".into(),
        });
    }
    if readoff.len() != d_s {
        return Err(Error::DimensionMismatch {
            expected: d_s,
            found: readoff.len(),
        });
    }
    let norm_dev = (c.iter().map(|v| v.norm_sqr()).sum::<f64>() - 1.0).abs();
    if norm_dev > ALG_TOL {
        return Err(Error::NotNormalized {
            deviation: norm_dev,
        });
    }
    let d_a = readoff[0].len();
    if readoff.iter().any(|r| r.len() != d_a) {
        return Err(Error::DimensionMismatch {
            expected: d_a,
            found: readoff.iter().map(|r| r.len()).max().unwrap_or(0),
        });
    }
    let ortho_dev = orthonormality_deviation(readoff);
    if ortho_dev > ALG_TOL {
        return Err(Error::NotOrthonormal {
            deviation: ortho_dev,
        });
    }
    let joint = d_s * d_a;
    let mut mat = DMatrix::zeros(joint, joint);
    for j in 0..d_s {
        for k in 0..d_s {
            let amp = c[j] * c[k].conj();
            if amp.norm() == 0.0 {
                continue;
            }
            for a in 0..d_a {
                for b in 0..d_a {
                    mat[(j * d_a + a, k * d_a + b)] += amp * readoff[j][a] * readoff[k][b].conj();
                }
            }
        }
    }
    Ok(JointState::wrap(d_s, d_a, mat))
}

/// Joint ray |λ_i⟩ ⊗ |α_i⟩ for outcome i under the given read-off family.
fn joint_ray(d_s: usize, i: usize, readoff: &[DVector<Complex64>]) -> DVector<Complex64> {
    let d_a = readoff[i].len();
    let mut ray = DVector::zeros(d_s * d_a);
    for a in 0..d_a {
        ray[i * d_a + a] = readoff[i][a];
    }
    ray
}

/// Project onto the outcome-i joint ray |λ_i α_i⟩ and renormalize; returns
/// the post-reduction state and the outcome probability ⟨λ_i α_i|rho|λ_i α_i⟩.
///
/// The read-off family is an explicit argument because the projector depends
/// on which apparatus states encode the outcomes.
pub fn reduce(
    rho: &JointState,
    i: usize,
    readoff: &[DVector<Complex64>],
) -> Result<(JointState, f64)> {
    if i >= rho.d_s {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: rho.d_s,
        });
    }
    if readoff.len() != rho.d_s || readoff.iter().any(|r| r.len() != rho.d_a) {
        return Err(Error::DimensionMismatch {
            expected: rho.d_s,
            found: readoff.len(),
        });
    }
    let ray = joint_ray(rho.d_s, i, readoff);
    let p = (ray.adjoint() * &rho.mat * &ray)[(0, 0)].re;
    if p <= PROB_FLOOR {
        return Err(Error::NegligibleOutcome {
            index: i,
            probability: p,
        });
    }
    // P rho P / p collapses to the ray itself for a rank-1 projector.
    let post = &ray * ray.adjoint();
    Ok((JointState::wrap(rho.d_s, rho.d_a, post), p))
}

/// Unread measurement: rho_r = sum_j P_j rho P_j. Errors when the family
/// fails to cover the support of rho (trace deficit above 1e-8).
pub fn statistical_average(
    rho: &JointState,
    projectors: &[DMatrix<Complex64>],
) -> Result<JointState> {
    let joint = rho.d_s * rho.d_a;
    let mut out = DMatrix::zeros(joint, joint);
    for p in projectors {
        if p.nrows() != joint || p.ncols() != joint {
            return Err(Error::DimensionMismatch {
                expected: joint,
                found: p.nrows().max(p.ncols()),
            });
        }
        out += p * &rho.mat * p.adjoint();
    }
    let deviation = (trace(&out).re - rho.trace()).abs();
    if deviation > 1e-8 {
        return Err(Error::IncompleteSet { deviation });
    }
    Ok(JointState::wrap(rho.d_s, rho.d_a, out))
}

/// Which factor survives the partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    System,
    Ancilla,
}

/// Trace out the complementary factor: rho_S = sum_a ⟨a|rho|a⟩ or
/// rho_A = sum_s ⟨s|rho|s⟩.
pub fn partial_trace(rho: &JointState, keep: Keep) -> FiniteState {
    let (d_s, d_a) = (rho.d_s, rho.d_a);
    let mat = match keep {
        Keep::System => DMatrix::from_fn(d_s, d_s, |j, k| {
            (0..d_a).map(|a| rho.mat[(j * d_a + a, k * d_a + a)]).sum()
        }),
        Keep::Ancilla => DMatrix::from_fn(d_a, d_a, |a, b| {
            (0..d_s).map(|s| rho.mat[(s * d_a + a, s * d_a + b)]).sum()
        }),
    };
    FiniteState::wrap(mat)
}

/// Random unitary from the QR decomposition of a complex Gaussian matrix,
/// with the R-diagonal phases absorbed so the distribution is basis-uniform.
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let (re, im) = normal_pair(rng);
        Complex64::new(re, im)
    });
    let (q, r) = g.qr().unpack();
    let phases: Vec<Complex64> = (0..dim)
        .map(|j| {
            let d = r[(j, j)];
            if d.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                d / d.norm()
            }
        })
        .collect();
    let mut q = q;
    for k in 0..dim {
        let ph = phases[k];
        for j in 0..dim {
            q[(j, k)] *= ph;
        }
    }
    q
}

/// Random pure state vector, uniform on the sphere.
pub fn random_state_vector<R: Rng>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    let mut v = DVector::from_fn(dim, |_, _| {
        let (re, im) = normal_pair(rng);
        Complex64::new(re, im)
    });
    let n = v.norm();
    v /= Complex64::new(n, 0.0);
    v
}

/// Random full-rank density matrix G G† / Tr(G G†).
pub fn random_density<R: Rng>(dim: usize, rng: &mut R) -> FiniteState {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let (re, im) = normal_pair(rng);
        Complex64::new(re, im)
    });
    let mut mat = &g * g.adjoint();
    let t = trace(&mat).re;
    mat /= Complex64::new(t, 0.0);
    FiniteState::wrap(mat)
}

/// Box-Muller pair of standard normals from the uniform generator.
fn normal_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}

/// Computational orthonormal basis of the given dimension.
pub fn computational_basis(dim: usize) -> Vec<DVector<Complex64>> {
    (0..dim)
        .map(|i| {
            let mut v = DVector::zeros(dim);
            v[i] = Complex64::new(1.0, 0.0);
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn projector_set_qubit() -> MeasurementSet {
        let mut p0 = DMatrix::zeros(2, 2);
        p0[(0, 0)] = c(1.0, 0.0);
        let mut p1 = DMatrix::zeros(2, 2);
        p1[(1, 1)] = c(1.0, 0.0);
        MeasurementSet::new(vec![p0, p1]).unwrap()
    }

    fn plus_state() -> FiniteState {
        let v = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]) / c(2.0f64.sqrt(), 0.0);
        FiniteState::pure(&v).unwrap()
    }

    /// e^{-iA} for Hermitian A via its spectral decomposition.
    fn exp_minus_i(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let eig = nalgebra::linalg::SymmetricEigen::new(a.clone());
        let v = eig.eigenvectors;
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| {
            c(l.cos(), -l.sin())
        }));
        &v * d * v.adjoint()
    }

    /// PSD square root via eigendecomposition, negative roundoff clamped.
    fn psd_sqrt(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let eig = nalgebra::linalg::SymmetricEigen::new(a.clone());
        let v = eig.eigenvectors;
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| c(l.max(0.0).sqrt(), 0.0)));
        &v * d * v.adjoint()
    }

    #[test]
    fn identity_measurement_is_transparent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(3, &mut rng);
        let set = MeasurementSet::identity(3);
        let (post, p) = apply_measurement(&rho, &set, 0).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!(post.max_abs_diff(&rho) < 1e-12);
    }

    #[test]
    fn projective_split_of_plus_state() {
        let set = projector_set_qubit();
        let rho = plus_state();
        let (post0, p0) = apply_measurement(&rho, &set, 0).unwrap();
        let (post1, p1) = apply_measurement(&rho, &set, 1).unwrap();
        assert!((p0 - 0.5).abs() < 1e-12);
        assert!((p1 - 0.5).abs() < 1e-12);
        assert!(post0.max_abs_diff(&FiniteState::pure_basis(2, 0).unwrap()) < 1e-12);
        assert!(post1.max_abs_diff(&FiniteState::pure_basis(2, 1).unwrap()) < 1e-12);
    }

    #[test]
    fn random_set_probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let set = random_measurement_set(3, 3, &mut rng);
        let rho = random_density(3, &mut rng);
        let total: f64 = (0..set.len())
            .map(|k| apply_measurement(&rho, &set, k).unwrap().1)
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn impossible_outcome_is_an_error() {
        let set = projector_set_qubit();
        let rho = FiniteState::pure_basis(2, 0).unwrap();
        assert!(matches!(
            apply_measurement(&rho, &set, 1),
            Err(Error::NegligibleOutcome { index: 1, .. })
        ));
        assert!(matches!(
            apply_measurement(&rho, &set, 5),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn incomplete_set_rejected() {
        let mut p0 = DMatrix::zeros(2, 2);
        p0[(0, 0)] = c(1.0, 0.0);
        assert!(matches!(
            MeasurementSet::new(vec![p0]),
            Err(Error::IncompleteSet { .. })
        ));
    }

    #[test]
    fn projectivity_detection() {
        assert!(is_projective(&projector_set_qubit()));
        // Two copies of 1/sqrt(2) * identity are complete but not idempotent.
        let h = DMatrix::identity(2, 2) / c(2.0f64.sqrt(), 0.0);
        let set = MeasurementSet::new(vec![h.clone(), h]).unwrap();
        assert!(!is_projective(&set));
    }

    #[test]
    fn sic_like_square_roots_are_not_projective() {
        // Four tetrahedral effects E_i = (1 + n_i . pauli) / 4 form a qubit
        // POVM; their square roots are a valid non-projective set.
        let dirs = [
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
        ];
        let ops: Vec<DMatrix<Complex64>> = dirs
            .iter()
            .map(|n| {
                let s = 3.0f64.sqrt();
                let (nx, ny, nz) = (n[0] / s, n[1] / s, n[2] / s);
                let mut e = DMatrix::zeros(2, 2);
                e[(0, 0)] = c(1.0 + nz, 0.0);
                e[(0, 1)] = c(nx, -ny);
                e[(1, 0)] = c(nx, ny);
                e[(1, 1)] = c(1.0 - nz, 0.0);
                psd_sqrt(&(e / c(4.0, 0.0)))
            })
            .collect();
        let set = MeasurementSet::new(ops).unwrap();
        assert!(!is_projective(&set));
        let povm = povm_from(&set);
        assert_eq!(povm.len(), 4);
    }

    #[test]
    fn povm_of_projective_set_is_the_projectors() {
        let set = projector_set_qubit();
        let povm = povm_from(&set);
        for (e, m) in povm.effects().iter().zip(set.ops()) {
            assert!(max_abs_diff(e, m) < 1e-14);
        }
    }

    #[test]
    fn povm_probabilities_match_measurement() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let set = random_measurement_set(3, 4, &mut rng);
        let povm = povm_from(&set);
        let rho = random_density(3, &mut rng);
        let via_povm = povm.probabilities(&rho);
        for (k, &p) in via_povm.iter().enumerate() {
            let (_, direct) = apply_measurement(&rho, &set, k).unwrap();
            assert!((p - direct).abs() < 1e-10);
        }
        // Born rule on pure states: ⟨ψ|E|ψ⟩ = ‖M ψ‖².
        let psi = random_state_vector(3, &mut rng);
        for (e, m) in povm.effects().iter().zip(set.ops()) {
            let lhs = (psi.adjoint() * e * &psi)[(0, 0)].re;
            let rhs = (m * &psi).norm_squared();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn trivial_ancilla_recovers_projective_povm() {
        let basis = computational_basis(2);
        let alpha = basis[0].clone();
        let u = DMatrix::identity(4, 4);
        let povm = povm_from_ancilla(&u, &alpha, &basis).unwrap();
        for (i, e) in povm.effects().iter().enumerate() {
            let mut want = DMatrix::zeros(2, 2);
            want[(i, i)] = c(1.0, 0.0);
            assert!(max_abs_diff(e, &want) < 1e-12);
        }
    }

    #[test]
    fn controlled_shift_ancilla_gives_system_projectors() {
        // U |s, a⟩ = |s, a xor s⟩ on two qubits; reading the system after
        // copying it into the ancilla measures the computational basis.
        let mut u = DMatrix::zeros(4, 4);
        u[(0, 0)] = c(1.0, 0.0);
        u[(1, 1)] = c(1.0, 0.0);
        u[(3, 2)] = c(1.0, 0.0);
        u[(2, 3)] = c(1.0, 0.0);
        let basis = computational_basis(2);
        let povm = povm_from_ancilla(&u, &basis[0], &basis).unwrap();
        for (i, e) in povm.effects().iter().enumerate() {
            let mut want = DMatrix::zeros(2, 2);
            want[(i, i)] = c(1.0, 0.0);
            assert!(max_abs_diff(e, &want) < 1e-12);
        }
    }

    #[test]
    fn ancilla_povm_matches_joint_projective_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (d_s, d_a) = (2, 3);
        let u = random_unitary(d_s * d_a, &mut rng);
        let basis = computational_basis(d_s);
        let mut alpha = DVector::zeros(d_a);
        alpha[0] = c(1.0, 0.0);
        let povm = povm_from_ancilla(&u, &alpha, &basis).unwrap();

        let rho = random_density(d_s, &mut rng);
        let joint_in = JointState::product(&rho, &FiniteState::pure(&alpha).unwrap());
        let evolved = &u * joint_in.mat() * u.adjoint();
        let via_povm = povm.probabilities(&rho);
        for (i, &p) in via_povm.iter().enumerate() {
            let mut proj_sys = DMatrix::zeros(d_s, d_s);
            proj_sys[(i, i)] = c(1.0, 0.0);
            let proj = proj_sys.kronecker(&DMatrix::identity(d_a, d_a));
            let direct = trace(&(&proj * &evolved)).re;
            assert!((p - direct).abs() < 1e-10, "outcome {i}: {p} vs {direct}");
        }
    }

    #[test]
    fn rejects_non_unitary_and_bad_basis() {
        let basis = computational_basis(2);
        let alpha = basis[0].clone();
        let u = DMatrix::identity(4, 4) * c(2.0, 0.0);
        assert!(matches!(
            povm_from_ancilla(&u, &alpha, &basis),
            Err(Error::NotUnitary { .. })
        ));
        let skewed = vec![basis[0].clone(), basis[0].clone()];
        assert!(matches!(
            povm_from_ancilla(&DMatrix::identity(4, 4), &alpha, &skewed),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn entangle_trivial_coefficients() {
        let readoff = computational_basis(2);
        let joint = von_neumann_entangle(&[c(1.0, 0.0), c(0.0, 0.0)], &readoff).unwrap();
        let mut want = DMatrix::zeros(4, 4);
        want[(0, 0)] = c(1.0, 0.0);
        assert!(max_abs_diff(joint.mat(), &want) < 1e-14);
    }

    #[test]
    fn entangle_then_trace_kills_coherences() {
        let r = 1.0 / 2.0f64.sqrt();
        let readoff = computational_basis(2);
        let joint = von_neumann_entangle(&[c(r, 0.0), c(r, 0.0)], &readoff).unwrap();
        let sys = partial_trace(&joint, Keep::System);
        assert!((sys.density()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((sys.density()[(1, 1)].re - 0.5).abs() < 1e-12);
        assert!(sys.density()[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn entangle_random_coefficients_diagonal_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = random_state_vector(4, &mut rng);
        let coeffs: Vec<Complex64> = psi.iter().copied().collect();
        // Non-computational read-offs: random unitary columns.
        let ur = random_unitary(4, &mut rng);
        let readoff: Vec<DVector<Complex64>> =
            (0..4).map(|j| ur.column(j).into_owned()).collect();
        let joint = von_neumann_entangle(&coeffs, &readoff).unwrap();
        assert!((joint.trace() - 1.0).abs() < 1e-10);
        let sys = partial_trace(&joint, Keep::System);
        for j in 0..4 {
            assert!((sys.density()[(j, j)].re - coeffs[j].norm_sqr()).abs() < 1e-12);
            for k in 0..4 {
                if j != k {
                    assert!(sys.density()[(j, k)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn entangle_validates_inputs() {
        let readoff = computational_basis(2);
        assert!(matches!(
            von_neumann_entangle(&[c(1.0, 0.0), c(1.0, 0.0)], &readoff),
            Err(Error::NotNormalized { .. })
        ));
        let bad = vec![readoff[0].clone(), readoff[0].clone()];
        assert!(matches!(
            von_neumann_entangle(&[c(1.0, 0.0), c(0.0, 0.0)], &bad),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn entangle_matches_exponentiated_interaction() {
        // Concrete generators with e^{-i A_i}|0⟩ = |i⟩ exactly: A_0 = 0 and
        // A_i = (pi/2)(i|i⟩⟨0| - i|0⟩⟨i|). The interaction sum_i |i⟩⟨i| ⊗ A_i
        // then reproduces the closed-form entangled state.
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let psi = random_state_vector(d, &mut rng);
        let coeffs: Vec<Complex64> = psi.iter().copied().collect();

        let mut h = DMatrix::zeros(d * d, d * d);
        for i in 1..d {
            let mut a_i = DMatrix::zeros(d, d);
            a_i[(i, 0)] = c(0.0, std::f64::consts::FRAC_PI_2);
            a_i[(0, i)] = c(0.0, -std::f64::consts::FRAC_PI_2);
            let mut proj = DMatrix::zeros(d, d);
            proj[(i, i)] = c(1.0, 0.0);
            h += proj.kronecker(&a_i);
        }
        let u_t = exp_minus_i(&h);

        let mut alpha = DVector::zeros(d);
        alpha[0] = c(1.0, 0.0);
        let rho_in = JointState::product(
            &FiniteState::pure(&psi).unwrap(),
            &FiniteState::pure(&alpha).unwrap(),
        );
        let evolved = &u_t * rho_in.mat() * u_t.adjoint();

        let closed = von_neumann_entangle(&coeffs, &computational_basis(d)).unwrap();
        assert!(max_abs_diff(&evolved, closed.mat()) < 1e-8);
    }

    #[test]
    fn reduction_projects_and_weights() {
        let r = 1.0 / 2.0f64.sqrt();
        let readoff = computational_basis(2);
        let joint = von_neumann_entangle(&[c(r, 0.0), c(r, 0.0)], &readoff).unwrap();
        let (post, p) = reduce(&joint, 0, &readoff).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let mut want = DMatrix::zeros(4, 4);
        want[(0, 0)] = c(1.0, 0.0);
        assert!(max_abs_diff(post.mat(), &want) < 1e-12);
        // Idempotence and certainty after the first reduction.
        let (again, p2) = reduce(&post, 0, &readoff).unwrap();
        assert!((p2 - 1.0).abs() < 1e-12);
        assert!(again.max_abs_diff(&post) < 1e-12);
    }

    #[test]
    fn reduction_probabilities_are_coefficient_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = random_state_vector(3, &mut rng);
        let coeffs: Vec<Complex64> = psi.iter().copied().collect();
        let readoff = computational_basis(3);
        let joint = von_neumann_entangle(&coeffs, &readoff).unwrap();
        for i in 0..3 {
            let (_, p) = reduce(&joint, i, &readoff).unwrap();
            assert!((p - coeffs[i].norm_sqr()).abs() < 1e-12);
        }
        let dead = von_neumann_entangle(&[c(1.0, 0.0), c(0.0, 0.0)], &computational_basis(2))
            .unwrap();
        assert!(matches!(
            reduce(&dead, 1, &computational_basis(2)),
            Err(Error::NegligibleOutcome { .. })
        ));
    }

    #[test]
    fn statistical_average_kills_branch_coherence() {
        let r = 1.0 / 2.0f64.sqrt();
        let readoff = computational_basis(2);
        let joint = von_neumann_entangle(&[c(r, 0.0), c(r, 0.0)], &readoff).unwrap();
        let projectors: Vec<DMatrix<Complex64>> = (0..2)
            .map(|i| {
                let ray = joint_ray(2, i, &readoff);
                &ray * ray.adjoint()
            })
            .collect();
        let averaged = statistical_average(&joint, &projectors).unwrap();
        assert!((averaged.trace() - 1.0).abs() < 1e-10);
        assert!(averaged.mat()[(0, 3)].norm() < 1e-14);
        assert!((averaged.mat()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((averaged.mat()[(3, 3)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn statistical_average_preserves_diagonal_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let diag: Vec<f64> = {
            let mut v: Vec<f64> = (0..4).map(|_| rng.gen_range(0.1..1.0)).collect();
            let t: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= t);
            v
        };
        let mut mat = DMatrix::zeros(4, 4);
        for (j, &d) in diag.iter().enumerate() {
            mat[(j, j)] = c(d, 0.0);
        }
        let rho = JointState::from_matrix(2, 2, mat).unwrap();
        let projectors: Vec<DMatrix<Complex64>> = (0..4)
            .map(|m| {
                let mut p = DMatrix::zeros(4, 4);
                p[(m, m)] = c(1.0, 0.0);
                p
            })
            .collect();
        let averaged = statistical_average(&rho, &projectors).unwrap();
        assert!(averaged.max_abs_diff(&rho) < 1e-14);
    }

    #[test]
    fn statistical_average_flags_missing_support() {
        let r = 1.0 / 2.0f64.sqrt();
        let readoff = computational_basis(2);
        let joint = von_neumann_entangle(&[c(r, 0.0), c(r, 0.0)], &readoff).unwrap();
        let ray = joint_ray(2, 0, &readoff);
        let lone = vec![&ray * ray.adjoint()];
        assert!(matches!(
            statistical_average(&joint, &lone),
            Err(Error::IncompleteSet { .. })
        ));
    }

    #[test]
    fn partial_trace_of_product_recovers_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sys = random_density(2, &mut rng);
        let anc = random_density(3, &mut rng);
        let joint = JointState::product(&sys, &anc);
        assert!(partial_trace(&joint, Keep::System).max_abs_diff(&sys) < 1e-12);
        assert!(partial_trace(&joint, Keep::Ancilla).max_abs_diff(&anc) < 1e-12);
    }

    #[test]
    fn bell_state_reduces_to_maximal_mixture() {
        let r = 1.0 / 2.0f64.sqrt();
        let mut bell = DVector::zeros(4);
        bell[0] = c(r, 0.0);
        bell[3] = c(r, 0.0);
        let mat = &bell * bell.adjoint();
        let joint = JointState::from_matrix(2, 2, mat).unwrap();
        let sys = partial_trace(&joint, Keep::System);
        assert!((sys.density()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((sys.density()[(1, 1)].re - 0.5).abs() < 1e-12);
        assert!(sys.density()[(0, 1)].norm() < 1e-14);
        assert!((sys.entropy() - std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn local_expectations_agree_between_joint_and_reduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let u = random_unitary(6, &mut rng);
        let base = JointState::product(
            &random_density(2, &mut rng),
            &random_density(3, &mut rng),
        );
        let evolved = JointState::from_matrix(2, 3, &u * base.mat() * u.adjoint()).unwrap();
        let reduced = partial_trace(&evolved, Keep::System);
        for _ in 0..3 {
            let g = DMatrix::from_fn(2, 2, |_, _| {
                let (re, im) = normal_pair(&mut rng);
                c(re, im)
            });
            let obs = (&g + g.adjoint()) / c(2.0, 0.0);
            let local = reduced.expectation(&obs);
            let lifted = obs.kronecker(&DMatrix::identity(3, 3));
            let joint_val = trace(&(evolved.mat() * lifted));
            assert!((local - joint_val).norm() < 1e-10);
        }
    }

    #[test]
    fn completeness_survives_unitary_basis_change() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let set = random_measurement_set(3, 4, &mut rng);
        let u = random_unitary(3, &mut rng);
        let rotated: Vec<DMatrix<Complex64>> = set.ops().iter().map(|m| m * &u).collect();
        assert!(MeasurementSet::new(rotated).is_ok());
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for dim in 2..=6 {
            let u = random_unitary(dim, &mut rng);
            let dev = max_abs_diff(&(u.adjoint() * &u), &DMatrix::identity(dim, dim));
            assert!(dev < 1e-12, "dim {dim}: deviation {dev:.3e}");
        }
    }

    /// Random complete measurement set: Ginibre blocks G_k whitened by
    /// T^{-1/2}, T = sum G_k† G_k.
    pub(super) fn random_measurement_set<R: Rng>(
        dim: usize,
        outcomes: usize,
        rng: &mut R,
    ) -> MeasurementSet {
        let blocks: Vec<DMatrix<Complex64>> = (0..outcomes)
            .map(|_| {
                DMatrix::from_fn(dim, dim, |_, _| {
                    let (re, im) = normal_pair(rng);
                    c(re, im)
                })
            })
            .collect();
        let mut t = DMatrix::zeros(dim, dim);
        for g in &blocks {
            t += g.adjoint() * g;
        }
        let eig = nalgebra::linalg::SymmetricEigen::new(t);
        let v = eig.eigenvectors;
        let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| c(1.0 / l.sqrt(), 0.0)));
        let whitener = &v * inv_sqrt * v.adjoint();
        MeasurementSet::new(blocks.into_iter().map(|g| g * &whitener).collect()).unwrap()
    }
}
