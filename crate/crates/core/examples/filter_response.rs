//! Prints the conditioning chain's gain at a few frequencies, both from the
//! transfer function and measured on a filtered tone.

use std::f64::consts::PI;

use tactile_bci::dsp::design_chain;

fn main() -> tactile_bci::Result<()> {
    let chain = design_chain(512.0)?;
    println!("{} biquad sections", chain.sections().len());
    println!("{:>6}  {:>10}  {:>10}", "Hz", "analytic", "measured");
    for f in [1.0, 10.0, 25.0, 45.0, 48.0, 50.0, 52.0, 60.0, 80.0, 120.0] {
        let n = 5120;
        let mut x: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * f * i as f64 / 512.0).sin())
            .collect();
        chain.filter_in_place(&mut x);
        let tail = &x[n - 1024..];
        let amp =
            (tail.iter().map(|v| v * v).sum::<f64>() / tail.len() as f64).sqrt() * 2f64.sqrt();
        println!(
            "{f:>6}  {:>7.2} dB  {:>7.2} dB",
            20.0 * chain.gain(f).log10(),
            20.0 * amp.log10()
        );
    }
    Ok(())
}
