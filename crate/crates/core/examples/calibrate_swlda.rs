//! Simulates a calibration run and trains the stepwise classifier.

use tactile_bci::config::Config;
use tactile_bci::decoder;
use tactile_bci::paradigm::SessionMode;

fn main() -> tactile_bci::Result<()> {
    let cfg = Config::default();
    let run =
        decoder::run_calibration_session(&cfg.simulation(SessionMode::Calibration, 0), false)?;
    let d = &run.dataset;
    println!(
        "{} epochs ({} target), {} features each",
        d.len(),
        d.n_targets(),
        d.dim()
    );

    let m = &run.model;
    println!("selected {} features", m.selected.len());
    for (j, w) in m.selected.iter().zip(&m.weights).take(10) {
        // features are laid out channel-major, 20 time bins per channel
        println!(
            "  feature {j:>3} (channel {}, bin {:>2}): weight {w:+.4}",
            j / 20,
            j % 20
        );
    }
    println!("training accuracy {:.1}%", 100.0 * m.training_accuracy(d)?);
    Ok(())
}
