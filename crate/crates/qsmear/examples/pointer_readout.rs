//! Pointer chain for a two-state system: entangling with orthogonal read-off
//! states kills the system's coherence, reading an outcome collapses the
//! pair, and leaving the result unread classically mixes the pointer.

use nalgebra::DVector;
use num_complex::Complex64;

use qsmear::measure::{
    computational_basis, partial_trace, reduce, statistical_average, von_neumann_entangle,
    FiniteState, Keep,
};

fn main() -> qsmear::Result<()> {
    let c = [
        Complex64::new(0.7f64.sqrt(), 0.0),
        Complex64::new(0.0, 0.3f64.sqrt()),
    ];
    let readoff = computational_basis(2);

    let before = FiniteState::pure(&DVector::from_row_slice(&c))?;
    let entangled = von_neumann_entangle(&c, &readoff)?;
    let system = partial_trace(&entangled, Keep::System);
    println!(
        "system coherence |rho_01|:  {:.6} before entanglement, {:.3e} after",
        before.density()[(0, 1)].norm(),
        system.density()[(0, 1)].norm()
    );
    println!(
        "system purity: {:.6} -> {:.6} (weights 0.7 / 0.3 give {:.6})",
        before.purity(),
        system.purity(),
        0.7f64 * 0.7 + 0.3 * 0.3
    );
    println!();

    for i in 0..2 {
        let (post, p) = reduce(&entangled, i, &readoff)?;
        let collapsed = partial_trace(&post, Keep::System);
        println!(
            "read outcome {i}: probability {p:.6}, post-reduction system purity {:.6}",
            collapsed.purity()
        );
    }
    println!();

    // Unread measurement: project on every outcome ray and add the branches.
    // System label and pointer state share the computational basis here, so
    // the joint projector is the same rank-1 factor on both sides.
    let projectors: Vec<_> = readoff
        .iter()
        .map(|a| {
            let p = a * a.adjoint();
            p.kronecker(&p)
        })
        .collect();
    let unread = statistical_average(&entangled, &projectors)?;
    let pointer = partial_trace(&unread, Keep::Ancilla);
    println!(
        "unread: trace {:.9}, pointer distribution ({:.6}, {:.6})",
        unread.trace(),
        pointer.density()[(0, 0)].re,
        pointer.density()[(1, 1)].re
    );
    Ok(())
}
