//! Smear a Gaussian packet with the position-monitor channel and compare the
//! numerical result against the closed-form asymptotic state.

use qsmear::grid::Grid;
use qsmear::qstate::{DensityMatrix, WaveFunction};
use qsmear::smear::{apply_smeared_channel, gaussian_closed_form_x, Convention, SmearKernel};

fn main() -> qsmear::Result<()> {
    let grid = Grid::symmetric(10.0, 256)?;
    let (s, sigma) = (1.0, 0.5);

    let packet = WaveFunction::gaussian_packet(&grid, s, 0.0, 0.0)?;
    let pure = DensityMatrix::from_pure(&packet);
    let kernel = SmearKernel::new(sigma, Convention::TracePreserving)?;
    let smeared = apply_smeared_channel(&pure, &kernel)?;

    let closed = gaussian_closed_form_x(&grid, s, sigma, Convention::TracePreserving)?;
    let deviation = smeared.max_abs_diff(&closed) / closed.max_abs();

    println!("packet width s = {s}, monitor accuracy sigma = {sigma}");
    println!(
        "trace   before {:.12}   after {:.12}",
        pure.trace(),
        smeared.trace()
    );
    println!(
        "purity  before {:.6}   after {:.6}   (entropy {:.6})",
        pure.purity(),
        smeared.purity(),
        smeared.entropy()
    );
    println!("closed-form deviation {deviation:.3e} relative to the peak");
    Ok(())
}
