//! Calibrates, then decodes 30 random online selections and prints metrics.

use tactile_bci::config::Config;
use tactile_bci::decoder::{self, random_intents};
use tactile_bci::eval;
use tactile_bci::paradigm::{session_duration, SessionMode};

fn main() -> tactile_bci::Result<()> {
    let cfg = Config {
        erp_amplitude: 6.0,
        ..Config::default()
    };
    let (_, model) = decoder::run_calibration(&cfg.simulation(SessionMode::Calibration, 0))?;

    let intents = random_intents(30, 9);
    let results = decoder::run_online(&cfg.simulation(SessionMode::Online, 30), &model, &intents)?;
    for (i, r) in results.iter().take(5).enumerate() {
        let scores: Vec<String> = r
            .command_scores
            .iter()
            .map(|s| format!("{s:+.2}"))
            .collect();
        println!(
            "#{i}: intended {} chosen {}  [{}]",
            r.intended.unwrap(),
            r.chosen,
            scores.join(" ")
        );
    }

    let per_selection = session_duration(&cfg.plan(SessionMode::Online, 1));
    println!("{}", eval::summarize(&results, per_selection)?);
    print!("{}", eval::confusion(&results)?.render());
    Ok(())
}
