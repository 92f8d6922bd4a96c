//! Coarse-grained classicality: probability mass kept inside one monitor
//! cell, and the SI momentum scale below which finer bins carry no
//! operational meaning.

use qsmear::classical::{
    cell_mass_pure, dimensionless_bin_consistency, momentum_bin_scale, proton_count_equivalent,
    CoarseGraining,
};
use qsmear::grid::Grid;
use qsmear::qstate::WaveFunction;

fn main() -> qsmear::Result<()> {
    let s = 1.0;
    let grid = Grid::symmetric(14.0, 1001)?;
    let packet = WaveFunction::gaussian_packet(&grid, s, 0.0, 0.0)?;

    println!("cell width   mass inside the cell around the packet");
    for n_ratio in [1.0, 2.0, 3.0, 4.0, 6.0] {
        let mass = cell_mass_pure(&packet, 0.0, n_ratio * s)?;
        println!("{n_ratio:>7} s    {mass:.6}");
    }
    println!();

    let cg = CoarseGraining::new(1e-6, 3.0)?;
    let scale = momentum_bin_scale(&cg);
    println!("micron-sized cell, cell three packet widths wide:");
    println!("  momentum bin scale   {scale:.6e} kg m/s");
    println!(
        "  consistency ratio    {:.9}  (bin scale over momentum-diagonal width)",
        dimensionless_bin_consistency(1.0, 3.0)?
    );
    println!(
        "  equivalent momentum  {:.3e} protons drifting at a micron per second",
        proton_count_equivalent(scale, 1e-6)
    );
    Ok(())
}
