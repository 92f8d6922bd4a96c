//! Generalized measurement from a unitary dilation: couple the system to an
//! ancilla, read a system basis projectively on the joint space, and recover
//! the induced POVM. Outcome statistics computed both ways must agree.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qsmear::measure::{
    computational_basis, povm_from_ancilla, random_density, random_state_vector, random_unitary,
    FiniteState, JointState,
};

fn main() -> qsmear::Result<()> {
    let (d_s, d_a) = (2usize, 3usize);
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let u = random_unitary(d_s * d_a, &mut rng);
    let alpha = random_state_vector(d_a, &mut rng);
    let basis = computational_basis(d_s);
    // Validates Hermiticity, positivity and completeness on construction.
    let povm = povm_from_ancilla(&u, &alpha, &basis)?;

    let mut sum = DMatrix::<Complex64>::zeros(d_s, d_s);
    for e in povm.effects() {
        sum += e;
    }
    let completeness = (sum - DMatrix::<Complex64>::identity(d_s, d_s))
        .iter()
        .fold(0.0f64, |a, v| a.max(v.norm()));
    println!(
        "{} effects on a dim-{d_s} system (dim-{d_a} ancilla), completeness gap {completeness:.3e}",
        povm.len()
    );

    let rho = random_density(d_s, &mut rng);
    let from_effects = povm.probabilities(&rho);

    // Same statistics the long way round: evolve rho (x) |alpha><alpha| and
    // apply the read-out projectors on the joint space.
    let joint = JointState::product(&rho, &FiniteState::pure(&alpha)?);
    let evolved = &u * joint.mat() * u.adjoint();
    let id_a = DMatrix::<Complex64>::identity(d_a, d_a);
    println!();
    println!("outcome   Tr(E_i rho)   joint-space");
    let mut gap = 0.0f64;
    for (i, lam) in basis.iter().enumerate() {
        let proj = (lam * lam.adjoint()).kronecker(&id_a);
        let from_joint = (proj * &evolved).diagonal().iter().sum::<Complex64>().re;
        gap = gap.max((from_effects[i] - from_joint).abs());
        println!("{i}         {:<13.9} {:.9}", from_effects[i], from_joint);
    }
    println!();
    println!(
        "total {:.9}, largest disagreement {gap:.3e}",
        from_effects.iter().sum::<f64>()
    );
    Ok(())
}
