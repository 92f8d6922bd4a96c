//! The sigma -> 0 limit of the monitor: off-diagonal coherence dies at a rate
//! set by the separation, the diagonal never moves, and below two grid steps
//! the kernel is no longer resolvable by the sampling.

use qsmear::grid::Grid;
use qsmear::qstate::{DensityMatrix, WaveFunction};
use qsmear::smear::{apply_smeared_channel, Convention, SmearKernel};

fn main() -> qsmear::Result<()> {
    let grid = Grid::symmetric(8.0, 160)?;
    let pure = DensityMatrix::from_pure(&WaveFunction::gaussian_packet(&grid, 1.0, 0.0, 0.0)?);
    let j = grid.len() / 2;
    let offsets = [0usize, 5, 10, 20];

    print!("sigma     resolvable");
    for off in offsets {
        print!("   |rho(x, x + {:.2})|", off as f64 * grid.spacing());
    }
    println!();
    for sigma in [2.0, 1.0, 0.5, 0.3, 0.15] {
        let kernel = SmearKernel::new(sigma, Convention::TracePreserving)?;
        let rho = apply_smeared_channel(&pure, &kernel)?;
        print!("{sigma:<9} {:<10}", kernel.resolvable_on(&grid));
        for off in offsets {
            print!("   {:<17.3e}", rho.mat()[(j, j + off)].norm());
        }
        println!();
    }
    println!();

    let sharp = SmearKernel::new(grid.spacing() / 10.0, Convention::TracePreserving)?;
    let ground = apply_smeared_channel(&pure, &sharp)?;
    let diag_shift = (0..grid.len())
        .map(|k| (ground.mat()[(k, k)] - pure.mat()[(k, k)]).norm())
        .fold(0.0f64, f64::max);
    println!(
        "sigma = dx/10 wipes every coherence the grid can see, yet the \
         diagonal shifts by {diag_shift:.1e} and the trace stays {:.9}",
        ground.trace()
    );
    println!("(such sub-resolution runs are allowed; the pipeline only warns)");
    Ok(())
}
