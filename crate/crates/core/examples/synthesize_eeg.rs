//! Generates background EEG, adds target ERPs for one selection and prints
//! per-channel RMS before and after.

use tactile_bci::paradigm::{schedule_selection, CommandId, SessionPlan, StimulusEvent};
use tactile_bci::signal::{background_samples, inject_erp, ChannelLayout, ErpModel, NoiseModel};

fn main() -> tactile_bci::Result<()> {
    let layout = ChannelLayout::default();
    let plan = SessionPlan::online(1);
    let target = CommandId::new(3)?;

    let events: Vec<StimulusEvent> = schedule_selection(&plan, 0, 1024, 42)
        .into_iter()
        .map(|e| StimulusEvent {
            is_target: Some(e.command == target),
            ..e
        })
        .collect();
    let len = events.last().unwrap().onset_sample + 410;

    let background = background_samples(&layout, len, 512.0, &NoiseModel::default(), 42)?;
    let erp = ErpModel {
        target_amplitude: 8.0,
        ..ErpModel::default()
    };
    let with_erp = inject_erp(&background, &events, &erp, 42)?;

    println!(
        "{} samples at 512 Hz, {} stimuli, target {target}",
        len,
        events.len()
    );
    println!("channel  background  with ERP");
    for (ch, name) in layout.names().iter().enumerate() {
        println!(
            "{name:>7}  {:>10.3}  {:>8.3}",
            background.rms(ch),
            with_erp.rms(ch)
        );
    }
    Ok(())
}
