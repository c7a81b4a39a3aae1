use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use memsnn::engine::{calibrate_col_gain, EncodedSample, EpochLog, StepView, TaskInfo};
use memsnn::experiments::{
    build_network, config_hash, encode_patterns, export_heatmap, run_classification,
    run_fault_sweep, run_noise_sweep, run_pattern_task, write_sweep_csv, Dataset, FaultAxis,
    FeatureEncoder, MetricsReport, PatternSet,
};
use memsnn::{engine, Error, ModelFile, Network, Result, SpikeTrain};

mod config;

use config::RunConfig;

/// Exit status for each error class.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 2,
        Error::Json { .. } | Error::Config { .. } | Error::InvalidInput(_) | Error::Parse { .. } => 3,
        Error::Simulation(_) => 4,
    }
}

#[derive(Parser, Debug)]
#[command(name = "memsnn", version, about = "Memristive SNN simulator with in-situ STDP training")]
struct Cli {
    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a network and write model.json and train_log.csv.
    Train(TrainArgs),
    /// Score a trained model and write metrics.json.
    Test(TestArgs),
    /// Run a noise or fault sweep and write sweep.csv.
    Sweep(SweepArgs),
    /// Export per-column conductance maps (CSV in µS, PGM for pattern models).
    Heatmap(HeatmapArgs),
    /// Search the column gain that puts the median first-spike time inside a
    /// fraction range of the encoding window.
    Calibrate(CalibrateArgs),
    /// Dump every simulation step of one presentation as CSV.
    Trace(TraceArgs),
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Run configuration (JSON, requires `schema_version`). Times in s,
    /// resistances in Ohm, capacitances in F, currents in A, voltages in V.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Network preset used when no config file is given:
    /// iris, bcw, patterns-5x3, digits-7x3.
    #[arg(long, default_value = "iris")]
    preset: String,
}

impl ConfigArgs {
    /// The configuration, with `MEMSNN_SEED` applied if set.
    fn load(&self) -> Result<RunConfig> {
        let cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::from_preset(&self.preset, 2024)?,
        };
        match std::env::var("MEMSNN_SEED") {
            Ok(s) => {
                let seed = s.trim().parse::<u64>().map_err(|_| Error::Config {
                    field: "MEMSNN_SEED".into(),
                    message: format!("not an unsigned integer: {s:?}"),
                })?;
                Ok(cfg.with_seed(seed))
            }
            Err(_) => Ok(cfg),
        }
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Feature dataset (CSV, numeric columns, final integer column `label`).
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,

    /// Binary pattern set (text grid of 0/1, each pattern after a `label:` line).
    #[arg(long, value_name = "PATH")]
    patterns: Option<PathBuf>,
}

enum Input {
    Data(Dataset),
    Patterns(PatternSet),
}

impl InputArgs {
    fn load(&self) -> Result<Input> {
        match (&self.data, &self.patterns) {
            (Some(p), _) => Ok(Input::Data(Dataset::load_csv(p)?)),
            (_, Some(p)) => Ok(Input::Patterns(PatternSet::load(p)?)),
            _ => unreachable!("clap enforces one input"),
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Output directory.
    #[arg(long, default_value = "out", value_name = "DIR")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Split {
    Train,
    Test,
    All,
}

#[derive(Args, Debug)]
struct TestArgs {
    /// Model written by `train`.
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    /// Which part of a feature dataset to score; the split is rebuilt from
    /// the model's seed. Ignored for pattern sets.
    #[arg(long, value_enum, default_value = "test")]
    split: Split,
    /// Share of each class in the training split (unitless).
    #[arg(long, default_value_t = 0.7, value_name = "FRAC")]
    train_frac: f64,
    /// Output directory.
    #[arg(long, default_value = "out", value_name = "DIR")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SweepKind {
    /// Pixel-flip fraction on a pattern set (unitless).
    Noise,
    /// Fraction of stuck devices (unitless).
    Stuck,
    /// Relative dispersion of R_on and R_off (unitless).
    #[value(name = "variation-R")]
    VariationR,
    /// Relative dispersion of V_T+ and V_T- (unitless).
    #[value(name = "variation-Vt")]
    VariationVt,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(value_enum)]
    kind: SweepKind,
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated levels in [0, 1] (unitless); overrides the config.
    #[arg(long, value_delimiter = ',', value_name = "L1,L2,..")]
    levels: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long, default_value = "out", value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct HeatmapArgs {
    /// Model written by `train`.
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "heatmap", value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Training samples probed (count).
    #[arg(long, default_value_t = 30, value_name = "N")]
    samples: usize,
    /// Lower bound of the target median spike time, as a fraction of T.
    #[arg(long, default_value_t = 0.25, value_name = "FRAC")]
    lo: f64,
    /// Upper bound of the target median spike time, as a fraction of T.
    #[arg(long, default_value_t = 0.9, value_name = "FRAC")]
    hi: f64,
    /// Output directory.
    #[arg(long, default_value = "out", value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TraceArgs {
    /// Model written by `train`.
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    /// Sample index within the input (0-based).
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Present with learning enabled and the label's bias current.
    #[arg(long)]
    learning: bool,
    /// Output CSV. Times in s, voltages in V, switch states as 0/1.
    #[arg(long, default_value = "trace.csv", value_name = "PATH")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Train(a) => cmd_train(&a),
        Command::Test(a) => cmd_test(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Heatmap(a) => cmd_heatmap(&a),
        Command::Calibrate(a) => cmd_calibrate(&a),
        Command::Trace(a) => cmd_trace(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_csv<T: serde::Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
    for r in rows {
        w.serialize(r).map_err(|e| io(e.into()))?;
    }
    w.flush().map_err(io)
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let cfg = a.config.load()?;
    let input = a.input.load()?;
    create_dir(&a.out)?;
    let (model, summary) = match input {
        Input::Data(d) => {
            let run = run_classification(
                &d,
                &cfg.network,
                &cfg.device,
                &cfg.encoder,
                cfg.experiment.train_frac,
                cfg.seed,
                &cfg.faults(),
            )?;
            let summary = format!(
                "held-out accuracy {:.4}, macro-F1 {:.4}",
                run.metrics.accuracy, run.metrics.f1_macro
            );
            let task = run.task();
            let model = ModelFile::from_network(&run.network, cfg.device, cfg.encoder, task, run.log);
            (model, summary)
        }
        Input::Patterns(set) => {
            let t = run_pattern_task(
                &set,
                &cfg.network,
                &cfg.device,
                &cfg.encoder,
                cfg.experiment.per_pattern,
            )?;
            let train_acc = t.log.last().map_or(0.0, |l: &EpochLog| l.train_accuracy);
            let model = ModelFile::from_network(&t.network, cfg.device, cfg.encoder, t.task, t.log);
            (model, format!("training accuracy {train_acc:.4}"))
        }
    };
    model.save(&a.out.join("model.json"))?;
    write_csv(&a.out.join("train_log.csv"), &model.training_log)?;
    println!("trained {}x{} network: {summary}", model.config.n, model.config.m);
    println!("wrote {}", a.out.join("model.json").display());
    Ok(())
}

/// Encoded samples for a model, with feature scaling taken from the model.
fn encode_for_model(model: &ModelFile, input: &Input, split: Split, train_frac: f64) -> Result<Vec<EncodedSample>> {
    let window = model.config.window;
    match (input, &model.task) {
        (Input::Patterns(set), TaskInfo::Pattern { rows, cols }) => {
            if set.dims() != (*rows, *cols) {
                return Err(Error::InvalidInput(format!(
                    "patterns are {:?}, model expects {rows}x{cols}",
                    set.dims()
                )));
            }
            encode_patterns(set, &model.encoder, window)
        }
        (Input::Data(d), TaskInfo::Features { scaler }) => {
            let fe = FeatureEncoder {
                scaler: scaler.clone(),
                encoder: model.encoder,
                window,
            };
            if fe.inputs() != model.config.n || d.n_features() != scaler.mins.len() {
                return Err(Error::InvalidInput(format!(
                    "dataset has {} features, model expects {}",
                    d.n_features(),
                    scaler.mins.len()
                )));
            }
            let part = match split {
                Split::All => d.clone(),
                Split::Train => d.stratified_split(train_frac, model.config.seed)?.0,
                Split::Test => d.stratified_split(train_frac, model.config.seed)?.1,
            };
            fe.encode_dataset(&part)
        }
        _ => Err(Error::InvalidInput(
            "input kind does not match the model (patterns vs. features)".into(),
        )),
    }
}

fn cmd_test(a: &TestArgs) -> Result<()> {
    let model = ModelFile::load(&a.model)?;
    let net = model.to_network()?;
    let samples = encode_for_model(&model, &a.input.load()?, a.split, a.train_frac)?;
    let metrics = engine::test(&net, &samples)?;
    create_dir(&a.out)?;
    let report = MetricsReport::new(metrics, config_hash(&model.config), model.config.seed);
    report.write(&a.out.join("metrics.json"))?;
    let m = &report.metrics;
    println!(
        "accuracy {:.4}  macro-F1 {:.4}  ({} samples, {} without a spike, {} ties)",
        m.accuracy,
        m.f1_macro,
        m.total(),
        m.no_spike,
        m.ties
    );
    if m.no_spike == m.total() {
        return Err(Error::Simulation(
            "no neuron fired on any sample; recalibrate col_gain or v_th".into(),
        ));
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let cfg = a.config.load()?;
    let levels = a
        .levels
        .clone()
        .or_else(|| cfg.experiment.levels.clone())
        .ok_or_else(|| Error::InvalidInput("no sweep levels given (--levels)".into()))?;
    let input = a.input.load()?;
    let rows = match (a.kind, input) {
        (SweepKind::Noise, Input::Patterns(set)) => {
            let t = run_pattern_task(
                &set,
                &cfg.network,
                &cfg.device,
                &cfg.encoder,
                cfg.experiment.per_pattern,
            )?;
            run_noise_sweep(
                &t.network,
                &set,
                &cfg.encoder,
                &levels,
                cfg.experiment.noise_trials,
                cfg.seed,
            )?
        }
        (SweepKind::Noise, Input::Data(_)) => {
            return Err(Error::InvalidInput("noise sweeps need --patterns".into()))
        }
        (_, Input::Patterns(_)) => {
            return Err(Error::InvalidInput("fault sweeps need --data".into()))
        }
        (kind, Input::Data(d)) => {
            let axis = match kind {
                SweepKind::Stuck => FaultAxis::Stuck,
                SweepKind::VariationR => FaultAxis::VariationR,
                _ => FaultAxis::VariationVt,
            };
            run_fault_sweep(
                &d,
                &cfg.network,
                &cfg.device,
                &cfg.encoder,
                cfg.experiment.train_frac,
                cfg.seed,
                &cfg.faults(),
                axis,
                &levels,
                cfg.experiment.repeats,
            )?
        }
    };
    create_dir(&a.out)?;
    let path = a.out.join("sweep.csv");
    write_sweep_csv(&path, &rows)?;
    println!("{:>8} {:>8} {:>8} {:>6}", "level", "mean", "std", "trials");
    for r in &rows {
        println!("{:>8.4} {:>8.4} {:>8.4} {:>6}", r.level, r.mean, r.std, r.trials);
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_heatmap(a: &HeatmapArgs) -> Result<()> {
    let model = ModelFile::load(&a.model)?;
    let net = model.to_network()?;
    let files = export_heatmap(&net.crossbar, &model.task, &model.device, &a.out)?;
    println!(
        "wrote {} CSV and {} PGM files to {}",
        files.csv.len(),
        files.pgm.len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_calibrate(a: &CalibrateArgs) -> Result<()> {
    let cfg = a.config.load()?;
    if !(0.0 <= a.lo && a.lo < a.hi && a.hi <= 1.0) {
        return Err(Error::InvalidInput("need 0 <= lo < hi <= 1".into()));
    }
    let net = build_network(&cfg.network, &cfg.device, &cfg.faults())?;
    let samples = match a.input.load()? {
        Input::Patterns(set) => encode_patterns(&set, &cfg.encoder, cfg.network.window)?,
        Input::Data(d) => {
            let (train, _) = d.stratified_split(cfg.experiment.train_frac, cfg.seed)?;
            FeatureEncoder::fit(&train, cfg.encoder, cfg.network.window)?.encode_dataset(&train)?
        }
    };
    let trains: Vec<&SpikeTrain> = samples.iter().take(a.samples.max(1)).map(|s| &s.train).collect();
    let report = calibrate_col_gain(&net, &trains, a.lo, a.hi)?;
    create_dir(&a.out)?;
    let path = a.out.join("calibration.json");
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Json {
        path: path.clone(),
        source: e,
    })?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    println!(
        "col_gain {:.6e} (median first spike {:.3e} s after {} probes)",
        report.col_gain,
        report.median_spike_time.unwrap_or(f64::NAN),
        report.iterations
    );
    Ok(())
}

fn cmd_trace(a: &TraceArgs) -> Result<()> {
    let model = ModelFile::load(&a.model)?;
    let mut net: Network = model.to_network()?;
    let samples = encode_for_model(&model, &a.input.load()?, Split::All, 0.7)?;
    let sample = samples.get(a.index).ok_or_else(|| {
        Error::InvalidInput(format!("index {} out of range ({} samples)", a.index, samples.len()))
    })?;
    let (n, m) = (net.n(), net.m());
    let io = |e: std::io::Error| Error::Io {
        path: a.out.clone(),
        source: e,
    };
    let mut w = csv::Writer::from_path(&a.out).map_err(|e| io(e.into()))?;
    let mut header = vec!["t".to_string()];
    header.extend((0..m).map(|j| format!("v_m_{j}")));
    header.push("v_inh".into());
    header.extend((0..m).map(|j| format!("v_e_{j}")));
    header.extend((0..n).map(|i| format!("v_sbar_{i}")));
    header.extend((0..n).map(|i| format!("v_updt_{i}")));
    header.push("post_spike".into());
    w.write_record(&header).map_err(|e| io(e.into()))?;
    let mut failure = None;
    let mut observer = |s: &StepView<'_>| {
        if failure.is_some() {
            return;
        }
        let bit = |b: bool| if b { "1".to_string() } else { "0".to_string() };
        let mut rec = vec![format!("{:e}", s.t)];
        rec.extend(s.v_m.iter().map(|v| format!("{v:e}")));
        rec.push(bit(s.v_inh_high));
        rec.extend(s.v_e_high.iter().map(|&b| bit(b)));
        rec.extend(s.v_sbar_high.iter().map(|&b| bit(b)));
        rec.extend(s.v_updt.iter().map(|v| format!("{v}")));
        rec.push(s.post_spike.map_or(String::new(), |j| j.to_string()));
        if let Err(e) = w.write_record(&rec) {
            failure = Some(e);
        }
    };
    let label = Some(sample.label);
    let r = net.present_traced(&sample.train, label, a.learning, Some(&mut observer))?;
    if let Some(e) = failure {
        return Err(io(e.into()));
    }
    w.flush().map_err(io)?;
    match (r.winner, r.spike_time) {
        (Some(j), Some(t)) => println!("winner {j} at {t:.6e} s (label {})", sample.label),
        _ => println!("no neuron fired (label {})", sample.label),
    }
    println!("wrote {}", a.out.display());
    Ok(())
}
