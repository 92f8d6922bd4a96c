//! Chart of the (meter accuracy, packet width) plane: classify a log-spaced
//! panel of points and mark where the four asymptotic regimes live.

use qsmear::smear::{classify_regime, Regime};

const REF: f64 = 1.0;
const FACTOR: f64 = 2.0;

fn mark(regime: Regime) -> char {
    match regime {
        Regime::AccurateMeterBroadPacket => 'A',
        Regime::AccurateMeterNarrowPacket => 'a',
        Regime::CoarseMeterNarrowPacket => 'c',
        Regime::CoarseMeterBroadPacket => 'C',
        Regime::Intermediate => '.',
    }
}

fn main() -> qsmear::Result<()> {
    let ticks: Vec<f64> = (-4..=4).map(|k| 10.0f64.powf(k as f64 / 4.0)).collect();

    println!("references ref_x = ref_p = {REF}, threshold factor = {FACTOR}");
    println!("rows: packet width s (top = broad); columns: accuracy sigma (left = accurate)");
    println!();
    for &s in ticks.iter().rev() {
        print!("s = {s:>6.3}  ");
        for &sigma in &ticks {
            print!("{}", mark(classify_regime(s, sigma, REF, REF, FACTOR)?.regime));
        }
        println!();
    }
    println!();
    println!("A accurate-meter-broad-packet    a accurate-meter-narrow-packet");
    println!("c coarse-meter-narrow-packet     C coarse-meter-broad-packet");
    println!(". intermediate");
    println!();

    let corner = classify_regime(10.0, 0.1, REF, REF, FACTOR)?;
    println!(
        "corner s = 10, sigma = 0.1: pattern [{} {} {} {}] -> {}",
        corner.pattern[0], corner.pattern[1], corner.pattern[2], corner.pattern[3], corner.regime
    );
    Ok(())
}
