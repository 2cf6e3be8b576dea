//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification or decoding failure, 2 usage or
//! configuration error. Progress goes to stderr; results go to stdout and
//! the files named by `--out` / `--model`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{load_config, Config};
use crate::decoder;
use crate::error::{Error, Result};
use crate::eval;
use crate::paradigm::{session_duration, CommandId, SessionMode};
use crate::robot::{self, RobotCommand, TaskSpec};
use crate::session::{self, ReplayOutcome, SessionRecord};
use crate::sweep;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "tactile-bci",
    version,
    about = "Simulated six-command tactile P300 BCI"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration file; missing keys take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Config override `key=value`, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the calibration run and train the classifier.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "calibration.jsonl")]
        out: PathBuf,
        #[arg(long, default_value = "model.json")]
        model: PathBuf,
        /// Store the synthesized raw signals in the record.
        #[arg(long)]
        record_raw: bool,
    },
    /// Decode the pick-and-move task online and drive the robot.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value = "session.jsonl")]
        out: PathBuf,
        /// File of intended commands (indices 0-5 or names) instead of the task script.
        #[arg(long)]
        intents: Option<PathBuf>,
        #[arg(long)]
        record_raw: bool,
    },
    /// Accuracy over ERP amplitude x rounds per selection.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "sweep.tsv")]
        out: PathBuf,
        /// Comma-separated ERP amplitudes in microvolts.
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2")]
        amplitudes: Vec<f64>,
        /// Online selections per cell.
        #[arg(long, default_value_t = 200)]
        selections: usize,
    },
    /// Print metrics and the confusion matrix of a session record.
    Evaluate { record: PathBuf },
    /// Regenerate a session from its record and compare.
    Replay { record: PathBuf },
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Calibrate {
            common,
            out,
            model,
            record_raw,
        } => cmd_calibrate(&common, &out, &model, record_raw),
        Command::Run {
            common,
            model,
            out,
            intents,
            record_raw,
        } => cmd_run(
            &common,
            model.as_deref(),
            &out,
            intents.as_deref(),
            record_raw,
        ),
        Command::Sweep {
            common,
            out,
            amplitudes,
            selections,
        } => cmd_sweep(&common, &out, &amplitudes, selections),
        Command::Evaluate { record } => cmd_evaluate(&record),
        Command::Replay { record } => cmd_replay(&record),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn resolve_config(common: &Common) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(p) => load_config(p)?,
        None => Config::default(),
    };
    for o in &common.overrides {
        cfg.set(o)?;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_calibrate(common: &Common, out: &Path, model_path: &Path, record_raw: bool) -> Result<i32> {
    let cfg = resolve_config(common)?;
    let sim = cfg.simulation(SessionMode::Calibration, 0);
    eprintln!(
        "calibrating: {} selections x {} rounds, seed {}",
        sim.plan.selection_count(),
        sim.plan.rounds_per_selection,
        cfg.seed
    );
    let run = decoder::run_calibration_session(&sim, record_raw)?;
    let n = run.dataset.len();
    let targets = run.dataset.n_targets();
    println!(
        "epochs: {n} (target {targets} / nontarget {}), features: {}",
        n - targets,
        run.dataset.dim()
    );
    println!("selected features: {}", run.model.selected.len());
    println!(
        "training accuracy: {:.1}%",
        100.0 * run.model.training_accuracy(&run.dataset)?
    );
    let correct = run.selections.iter().filter(|s| s.is_correct()).count();
    println!(
        "calibration selections decoded: {correct}/{}",
        run.selections.len()
    );

    session::save_model(&run.model, model_path)?;
    let mut record = SessionRecord::new(SessionMode::Calibration, &cfg);
    record.header.model = Some(run.model);
    record.events = run.events;
    record.selections = run.selections;
    if record_raw {
        record.raw_signals = Some(run.raw);
    }
    session::save_session(&record, out)?;
    eprintln!("model written to {}", model_path.display());
    eprintln!("record written to {}", out.display());
    Ok(EXIT_OK)
}

/// Whitespace- or comma-separated command indices or names.
pub fn parse_intents(text: &str) -> Result<Vec<CommandId>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<usize>() {
            Ok(i) => CommandId::new(i),
            Err(_) => RobotCommand::parse(t)
                .map(CommandId::from)
                .ok_or_else(|| Error::invalid(format!("unknown command {t:?}"))),
        })
        .collect()
}

fn cmd_run(
    common: &Common,
    model_path: Option<&Path>,
    out: &Path,
    intents_path: Option<&Path>,
    record_raw: bool,
) -> Result<i32> {
    let cfg = resolve_config(common)?;
    let Some(model_path) = model_path else {
        eprintln!("error: run needs --model PATH (train one with `calibrate`)");
        return Ok(EXIT_USAGE);
    };
    let model = session::load_model(model_path)?;
    let task = TaskSpec::pick_and_move();
    let scripted = intents_path.is_none();
    let intents: Vec<CommandId> = match intents_path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.to_path_buf(),
                source,
            })?;
            parse_intents(&text)?
        }
        None => robot::optimal_script(&task)?
            .into_iter()
            .map(CommandId::from)
            .collect(),
    };
    let sim = cfg.simulation(SessionMode::Online, intents.len());
    eprintln!(
        "decoding {} selections x {} rounds, seed {}",
        intents.len(),
        sim.plan.rounds_per_selection,
        cfg.seed
    );
    let run = decoder::run_online_session(&sim, &model, &intents, record_raw)?;

    let decoded: Vec<RobotCommand> = run.selections.iter().map(|s| s.chosen.into()).collect();
    let (trace, success) = robot::run_task(&task, &decoded);
    for (i, (s, state)) in run.selections.iter().zip(&trace[1..]).enumerate() {
        let intended = s.intended.map(RobotCommand::from);
        let chosen = RobotCommand::from(s.chosen);
        println!(
            "selection {}: intended {}, decoded {} [{}]{}",
            i + 1,
            intended.map_or("?".to_string(), |c| c.to_string()),
            chosen,
            if s.is_correct() { "ok" } else { "MISS" },
            if state.last_action_effect == robot::ActionEffect::NoOp {
                " (no-op)"
            } else {
                ""
            }
        );
    }
    eprint!("{}", trace.last().expect("start state").render());
    if success {
        println!("task: SUCCESS in {} selections", decoded.len());
    } else {
        println!("task: FAILURE after {} selections", decoded.len());
    }
    let per_selection = session_duration(&cfg.plan(SessionMode::Online, 1));
    let metrics = eval::summarize(&run.selections, per_selection)?;
    println!("{metrics}");

    let mut record = SessionRecord::new(SessionMode::Online, &cfg);
    record.header.model = Some(model);
    record.header.intents = intents;
    record.events = run.events;
    record.selections = run.selections;
    record.robot_trace = Some(trace);
    if record_raw {
        record.raw_signals = Some(run.raw);
    }
    session::save_session(&record, out)?;
    eprintln!("record written to {}", out.display());
    Ok(if scripted && !success {
        EXIT_FAILURE
    } else {
        EXIT_OK
    })
}

fn cmd_sweep(common: &Common, out: &Path, amplitudes: &[f64], selections: usize) -> Result<i32> {
    let cfg = resolve_config(common)?;
    if amplitudes.is_empty() || selections == 0 {
        return Err(Error::invalid(
            "sweep needs amplitudes and at least one selection per cell",
        ));
    }
    eprintln!(
        "sweeping {} amplitudes x {:?} rounds, {selections} selections per cell",
        amplitudes.len(),
        sweep::SWEEP_ROUNDS
    );
    let cells = sweep::run_sweep(&cfg, amplitudes, &sweep::SWEEP_ROUNDS, selections)?;
    let table = sweep::render_table(&cells);
    print!("{table}");
    std::fs::write(out, &table).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let cfg_path = out.with_extension("config.toml");
    std::fs::write(&cfg_path, cfg.to_toml_string()).map_err(|source| Error::Io {
        path: cfg_path.clone(),
        source,
    })?;
    eprintln!(
        "table written to {} (config {})",
        out.display(),
        cfg_path.display()
    );
    Ok(EXIT_OK)
}

fn cmd_evaluate(path: &Path) -> Result<i32> {
    let record = session::load_session(path)?;
    let h = &record.header;
    let rounds = match h.mode {
        SessionMode::Calibration => h.config.rounds_calibration,
        SessionMode::Online => h.config.rounds_online,
    };
    let mut one = h.config.clone();
    one.rounds_online = rounds;
    let per_selection = session_duration(&one.plan(SessionMode::Online, 1));
    let metrics = eval::summarize(&record.selections, per_selection)?;
    println!("{metrics}");
    print!("{}", eval::confusion(&record.selections)?.render());
    if let Some(trace) = &record.robot_trace {
        let done = trace.last().is_some_and(|s| s.task_complete());
        println!("task: {}", if done { "SUCCESS" } else { "FAILURE" });
    }
    Ok(EXIT_OK)
}

fn cmd_replay(path: &Path) -> Result<i32> {
    let record = session::load_session(path)?;
    match session::verify_replay(&record)? {
        ReplayOutcome::Match { selections } => {
            println!("replay: OK ({selections} selections identical)");
            Ok(EXIT_OK)
        }
        ReplayOutcome::Mismatch { first_divergent } => {
            println!("replay: MISMATCH at selection {first_divergent}");
            Ok(EXIT_FAILURE)
        }
    }
}
