//! Portrait of the monitored state in both bases: transform to momentum
//! space, measure the four sectional widths, and check them against the
//! analytic formulas and the inverse-spread products.

use qsmear::grid::Grid;
use qsmear::qstate::{DensityMatrix, Section, WaveFunction};
use qsmear::smear::{apply_smeared_channel, sectional_widths, Convention, SmearKernel};

fn main() -> qsmear::Result<()> {
    let grid = Grid::symmetric(10.0, 256)?;
    let (s, sigma) = (1.0, 0.5);

    let packet = WaveFunction::gaussian_packet(&grid, s, 0.0, 0.0)?;
    let kernel = SmearKernel::new(sigma, Convention::TracePreserving)?;
    let position = apply_smeared_channel(&DensityMatrix::from_pure(&packet), &kernel)?;
    let momentum = position.to_momentum()?;

    let measured = [
        position.sectional_width(Section::Diagonal)?,
        position.sectional_width(Section::AntiDiagonal)?,
        momentum.sectional_width(Section::Diagonal)?,
        momentum.sectional_width(Section::AntiDiagonal)?,
    ];
    let analytic = sectional_widths(s, sigma)?;

    println!("cut          measured     analytic");
    for (name, (m, a)) in ["x diagonal", "x anti", "p diagonal", "p anti"]
        .iter()
        .zip(measured.iter().zip(analytic.as_array()))
    {
        println!("{name:<12} {m:<12.6} {a:<12.6}");
    }
    let (c1, c2) = analytic.products();
    println!("cross products (both 1/2 for every s, sigma):");
    println!(
        "  measured {:.6} and {:.6}, analytic {c1:.6} and {c2:.6}",
        measured[0] * measured[3],
        measured[1] * measured[2]
    );
    Ok(())
}
