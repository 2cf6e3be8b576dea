//! Saves an online session, reloads it, replays it, then shows that an
//! edited record no longer replays.

use tactile_bci::config::Config;
use tactile_bci::decoder::{self, random_intents};
use tactile_bci::paradigm::SessionMode;
use tactile_bci::session::{load_session, save_session, verify_replay, SessionRecord};

fn main() -> tactile_bci::Result<()> {
    let cfg = Config::default();
    let (_, model) = decoder::run_calibration(&cfg.simulation(SessionMode::Calibration, 0))?;
    let intents = random_intents(6, 3);
    let run = decoder::run_online_session(
        &cfg.simulation(SessionMode::Online, 6),
        &model,
        &intents,
        false,
    )?;

    let mut record = SessionRecord::new(SessionMode::Online, &cfg);
    record.header.model = Some(model);
    record.header.intents = intents;
    record.events = run.events;
    record.selections = run.selections;

    let path = std::env::temp_dir().join("tactile-bci-example.jsonl");
    save_session(&record, &path)?;
    let loaded = load_session(&path)?;
    println!(
        "{} lines written to {}",
        1 + loaded.events.len() + loaded.selections.len(),
        path.display()
    );
    println!("replay: {:?}", verify_replay(&loaded)?);

    let mut edited = loaded;
    edited.selections[2].command_scores[0] += 0.01;
    println!("after editing selection 2: {:?}", verify_replay(&edited)?);
    std::fs::remove_file(&path).ok();
    Ok(())
}
