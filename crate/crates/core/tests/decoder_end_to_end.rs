use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use tactile_bci::config::Config;
use tactile_bci::decoder::{self, decide, random_intents};
use tactile_bci::paradigm::{schedule_selection, CommandId, SessionMode, SessionPlan};

fn high_snr() -> Config {
    Config {
        erp_amplitude: 5.0,
        background_rms: 0.5,
        ..Config::default()
    }
}

#[test]
fn calibration_shapes() {
    let sim = Config::default().simulation(SessionMode::Calibration, 0);
    let run = decoder::run_calibration_session(&sim, false).unwrap();
    assert_eq!(run.dataset.len(), 540);
    assert_eq!(run.dataset.n_targets(), 90);
    assert_eq!(run.dataset.dim(), 160);
    assert_eq!(run.events.len(), 540);
    assert_eq!(run.selections.len(), 6);
}

#[test]
fn silent_input_yields_an_empty_model() {
    let c = Config {
        background_rms: 0.0,
        mains_amplitude: 0.0,
        erp_amplitude: 0.0,
        ..Config::default()
    };
    let (_, model) = decoder::run_calibration(&c.simulation(SessionMode::Calibration, 0)).unwrap();
    assert!(model.selected.is_empty());
}

#[test]
fn high_snr_decodes_perfectly() {
    let c = high_snr();
    let (data, model) =
        decoder::run_calibration(&c.simulation(SessionMode::Calibration, 0)).unwrap();
    assert!(model.training_accuracy(&data).unwrap() >= 0.95);
    let intents = random_intents(50, 4);
    let res =
        decoder::run_online(&c.simulation(SessionMode::Online, 50), &model, &intents).unwrap();
    assert_eq!(res.iter().filter(|s| s.is_correct()).count(), 50);
    assert!(res.iter().all(|s| s.rounds_used == 3));
}

#[test]
fn runs_are_deterministic_across_thread_counts() {
    let c = Config::default();
    let (_, model) = decoder::run_calibration(&c.simulation(SessionMode::Calibration, 0)).unwrap();
    let intents = random_intents(12, 8);
    let sim = c.simulation(SessionMode::Online, 12);
    let default_pool = decoder::run_online(&sim, &model, &intents).unwrap();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| decoder::run_online(&sim, &model, &intents).unwrap());
    assert_eq!(default_pool, single);
    let (_, again) = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| decoder::run_calibration(&c.simulation(SessionMode::Calibration, 0)).unwrap());
    assert_eq!(model, again);
}

#[test]
fn scores_are_command_means() {
    let plan = SessionPlan::online(1);
    let events = schedule_selection(&plan, 0, 0, 3);
    let scored: Vec<_> = events
        .iter()
        .enumerate()
        .map(|(i, e)| (*e, i as f64))
        .collect();
    let r = decide(&scored).unwrap();
    for c in CommandId::all() {
        let xs: Vec<f64> = scored
            .iter()
            .filter(|(e, _)| e.command == c)
            .map(|p| p.1)
            .collect();
        assert_eq!(xs.len(), 3);
        assert_eq!(r.command_scores[c.index()], xs.iter().sum::<f64>() / 3.0);
    }
    assert_eq!(r.rounds_used, 3);
}

#[test]
fn exact_ties_go_to_the_lowest_command() {
    let events = schedule_selection(&SessionPlan::online(1), 0, 0, 3);
    let scored: Vec<_> = events
        .iter()
        .map(|e| (*e, if e.command.index() >= 2 { 1.0 } else { 0.0 }))
        .collect();
    let r = decide(&scored).unwrap();
    assert_eq!(r.chosen.index(), 2);
    assert!(r.tie_flag);
}

#[test]
fn zero_snr_choices_are_uniform() {
    let c = Config {
        erp_amplitude: 0.0,
        ..Config::default()
    };
    let (_, model) = decoder::run_calibration(&c.simulation(SessionMode::Calibration, 0)).unwrap();
    let intents = random_intents(600, 21);
    let res =
        decoder::run_online(&c.simulation(SessionMode::Online, 600), &model, &intents).unwrap();
    let mut counts = [0f64; 6];
    for r in &res {
        counts[r.chosen.index()] += 1.0;
    }
    let stat: f64 = counts.iter().map(|&o| (o - 100.0).powi(2) / 100.0).sum();
    let p = ChiSquared::new(5.0).unwrap().sf(stat);
    assert!(p > 0.001, "chi2 {stat}, p {p}, counts {counts:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decision_survives_positive_affine_maps(
        seed in any::<u64>(),
        raw in proptest::collection::vec(-64i32..64, 18),
        a_exp in -3i32..4,
        b in -16i32..16,
    ) {
        let events = schedule_selection(&SessionPlan::online(1), 0, 0, seed);
        // dyadic values keep the arithmetic exact
        let base: Vec<_> = events.iter().zip(&raw).map(|(e, &v)| (*e, v as f64 / 8.0)).collect();
        let a = 2f64.powi(a_exp);
        let mapped: Vec<_> = base.iter().map(|&(e, s)| (e, a * s + b as f64)).collect();
        let r1 = decide(&base).unwrap();
        let r2 = decide(&mapped).unwrap();
        prop_assert_eq!(r1.chosen, r2.chosen);
        prop_assert_eq!(r1.tie_flag, r2.tie_flag);
    }
}
