//! `koopman` command-line tool.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use koopman_core::analysis::{analyze, AnalysisOptions};
use koopman_core::config::ExperimentConfig;
use koopman_core::dynamics::{fmt_f64, load_trajectories, save_trajectory_set, write_csv_table};
use koopman_core::edmd::{predict_corrected, predict_straight, KoopmanModel};
use koopman_core::ingest::{ingest_measurements, ColumnMap, IngestSpec};
use koopman_core::reproduce::{run_reproduction, Target};
use koopman_core::{Error, Result};
use nalgebra::DMatrix;

#[derive(Parser, Debug)]
#[command(name = "koopman", version, about = "Lifted linear models of nonlinear systems via EDMD")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run seed; overrides the training seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a training set.
    Generate(GenerateArgs),
    /// Fit a model to simulated or stored trajectories.
    Fit(FitArgs),
    /// Predict from an initial state with a fitted model.
    Predict(PredictArgs),
    /// Spectrum, stability and rank tests of a fitted model.
    Analyze(AnalyzeArgs),
    /// Read measurement CSVs, estimating velocities where missing.
    Ingest(IngestArgs),
    /// Run a reproduction target end to end.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug)]
struct SystemArgs {
    /// Preset used when no --config is given: pendulum, duffing or golf.
    #[arg(long, default_value = "pendulum")]
    system: String,

    /// Dictionary size N for the preset.
    #[arg(long)]
    size: Option<usize>,

    /// Train with random inputs in [-1, 1] (pendulum and Duffing presets).
    #[arg(long)]
    random_input: bool,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    system: SystemArgs,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    system: SystemArgs,

    /// Trajectory set (directory with manifest.json, a manifest, or a CSV
    /// file). Simulated from the configuration when absent.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Scheme {
    Straight,
    Corrected,
    Both,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Fitted model (JSON).
    #[arg(long)]
    model: PathBuf,

    /// Initial state, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    x0: String,

    /// Number of prediction steps.
    #[arg(long)]
    steps: usize,

    /// Prediction scheme.
    #[arg(long, value_enum, default_value_t = Scheme::Corrected)]
    scheme: Scheme,

    /// CSV with input columns u1..up (one row per step), for controlled models.
    #[arg(long)]
    inputs: Option<PathBuf>,

    /// Constant input, for controlled models.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "inputs")]
    u: Option<f64>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Fitted model (JSON).
    #[arg(long)]
    model: PathBuf,

    /// Run the rank tests on the discrete-time pair (K_t, B_t).
    #[arg(long)]
    discrete: bool,

    /// Relative rank tolerance (default N·eps).
    #[arg(long)]
    rtol: Option<f64>,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Measurement CSV files.
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,

    /// Savitzky–Golay window (odd, ≥ 3).
    #[arg(long, default_value_t = 51)]
    window: usize,

    #[arg(long, default_value = "t")]
    time_column: String,

    #[arg(long, default_value = "x1")]
    angle_column: String,

    /// Passed through when present, estimated otherwise.
    #[arg(long, default_value = "x2")]
    velocity_column: String,

    #[arg(long, default_value = "u1")]
    input_column: String,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    /// Target name, or `all`.
    target: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("KOOPMAN_NUM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("KOOPMAN_NUM_THREADS must be an integer, got `{v}`")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Generate(a) => generate(&cli, a),
        Command::Fit(a) => fit(&cli, a),
        Command::Predict(a) => predict(&cli, a),
        Command::Analyze(a) => analyze_cmd(&cli, a),
        Command::Ingest(a) => ingest(&cli, a),
        Command::Reproduce(a) => reproduce(&cli, a),
    }
}

fn experiment(cli: &Cli, sys: &SystemArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let mut c = ExperimentConfig::preset(&sys.system, sys.size, cli.seed.unwrap_or(0))?;
            if sys.random_input {
                c = c.with_random_input();
            }
            c
        }
    };
    if let Some(seed) = cli.seed {
        cfg.training.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, default: &str) -> Result<PathBuf> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(default));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn generate(cli: &Cli, a: &GenerateArgs) -> Result<u8> {
    let cfg = experiment(cli, &a.system)?;
    let set = cfg.training_data()?;
    let dir = out_dir(cli, "trajectories")?;
    match cli.format {
        Format::Csv => {
            let manifest = save_trajectory_set(&dir, cfg.system.name(), cfg.training.seed, &set)?;
            println!("{} trajectories written, manifest {}", set.len(), manifest.display());
        }
        Format::Json => {
            let trajs: Vec<serde_json::Value> = set
                .iter()
                .map(|t| {
                    serde_json::json!({
                        "dt": t.dt,
                        "seed": t.seed,
                        "signal": t.signal,
                        "times": t.times,
                        "states": t.states.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
                        "inputs": t.inputs.as_ref().map(|u| u.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>()),
                    })
                })
                .collect();
            let path = dir.join("trajectories.json");
            let doc = serde_json::json!({
                "system": cfg.system.name(),
                "seed": cfg.training.seed,
                "trajectories": trajs,
            });
            write_file(&path, &(serde_json::to_string(&doc)? + "\n"))?;
            println!("{} trajectories written to {}", set.len(), path.display());
        }
    }
    Ok(0)
}

fn fit(cli: &Cli, a: &FitArgs) -> Result<u8> {
    let cfg = experiment(cli, &a.system)?;
    let data = match &a.data {
        Some(p) => load_trajectories(p)?,
        None => cfg.training_data()?,
    };
    let model = cfg.fit_on(&data)?;
    let dir = out_dir(cli, ".")?;
    let path = dir.join("model.json");
    model.save(&path)?;
    // the effective configuration, reusable with --config
    write_file(&dir.join("config.json"), &cfg.to_json()?)?;
    println!(
        "N = {}, {} snapshot pairs, fit residual {:.3e}, model written to {}",
        model.size(),
        model.provenance.snapshot_pairs,
        model.fit_residual,
        path.display()
    );
    Ok(0)
}

fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("cannot parse `{p}` in `{s}` as a number")))
        })
        .collect()
}

/// Reads the `u1..up` columns of a CSV file into a `p × rows` matrix.
fn read_inputs(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').map(str::trim).collect();
    let cols: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with('u'))
        .map(|(i, _)| i)
        .collect();
    if cols.is_empty() {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            row: 1,
            msg: "no input columns (u1, u2, …)".into(),
        });
    }
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        for &c in &cols {
            let v = fields.get(c).and_then(|f| f.parse::<f64>().ok()).ok_or_else(|| Error::Csv {
                path: path.to_path_buf(),
                row: i + 2,
                msg: format!("column `{}` is missing or not a number", header[c]),
            })?;
            data.push(v);
        }
        rows += 1;
    }
    Ok(DMatrix::from_column_slice(cols.len(), rows, &data))
}

fn predict(cli: &Cli, a: &PredictArgs) -> Result<u8> {
    let model = KoopmanModel::load(&a.model)?;
    let x0 = parse_vector(&a.x0)?;
    let u = match (&a.inputs, a.u) {
        (Some(p), _) => Some(read_inputs(p)?),
        (None, Some(v)) => Some(DMatrix::from_element(model.input_dim().max(1), a.steps.max(1), v)),
        (None, None) if model.b.is_some() => {
            return Err(Error::InvalidArgument(
                "model has an input matrix; pass --inputs or --u".into(),
            ))
        }
        _ => None,
    };
    let times: Vec<f64> = (0..=a.steps).map(|k| k as f64 * model.dt).collect();
    let (states, names): (DMatrix<f64>, Vec<String>) = match a.scheme {
        Scheme::Straight => (predict_straight(&model, &x0, u.as_ref(), a.steps)?.states, vec![]),
        Scheme::Corrected => (predict_corrected(&model, &x0, u.as_ref(), a.steps)?, vec![]),
        Scheme::Both => {
            let s = predict_straight(&model, &x0, u.as_ref(), a.steps)?.states;
            let c = predict_corrected(&model, &x0, u.as_ref(), a.steps)?;
            let n = s.nrows();
            let mut both = DMatrix::zeros(2 * n, s.ncols());
            both.rows_mut(0, n).copy_from(&s);
            both.rows_mut(n, n).copy_from(&c);
            let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}_straight")).collect();
            names.extend((1..=n).map(|i| format!("x{i}_corrected")));
            (both, names)
        }
    };
    let body = match cli.format {
        Format::Csv if names.is_empty() => {
            let mut buf = Vec::new();
            write_csv_table(&mut buf, &times, &states, None)?;
            String::from_utf8(buf).expect("csv output is ASCII")
        }
        Format::Csv => {
            let mut text = format!("t,{}\n", names.join(","));
            for (k, t) in times.iter().enumerate() {
                let row: Vec<String> = states.column(k).iter().map(|v| fmt_f64(*v)).collect();
                text.push_str(&format!("{},{}\n", fmt_f64(*t), row.join(",")));
            }
            text
        }
        Format::Json => {
            let rows: Vec<Vec<f64>> = states.row_iter().map(|r| r.iter().copied().collect()).collect();
            serde_json::to_string_pretty(&serde_json::json!({
                "scheme": format!("{:?}", a.scheme).to_lowercase(),
                "columns": if names.is_empty() { (1..=states.nrows()).map(|i| format!("x{i}")).collect() } else { names.clone() },
                "times": times,
                "states": rows,
            }))? + "\n"
        }
    };
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let ext = if cli.format == Format::Csv { "csv" } else { "json" };
            let path = dir.join(format!("prediction.{ext}"));
            write_file(&path, &body)?;
            eprintln!("prediction written to {}", path.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(body.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(0)
}

fn analyze_cmd(cli: &Cli, a: &AnalyzeArgs) -> Result<u8> {
    let model = KoopmanModel::load(&a.model)?;
    let options = AnalysisOptions {
        use_continuous: !a.discrete,
        rtol: a.rtol,
    };
    let report = analyze(&model, &options)?;
    let body = match cli.format {
        Format::Json => report.to_json()?,
        Format::Csv => {
            let mut text = String::from("index,mu_re,mu_im,lambda_re,lambda_im\n");
            for (i, mu) in report.spectrum.discrete.iter().enumerate() {
                let (lr, li) = match report.spectrum.continuous[i] {
                    Some(l) => (fmt_f64(l.re), fmt_f64(l.im)),
                    None => ("-inf".into(), fmt_f64(0.0)),
                };
                text.push_str(&format!("{i},{},{},{lr},{li}\n", fmt_f64(mu.re), fmt_f64(mu.im)));
            }
            text
        }
    };
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let path = dir.join(if cli.format == Format::Json { "analysis.json" } else { "spectrum.csv" });
            write_file(&path, &body)?;
            if cli.format == Format::Csv {
                write_file(&dir.join("analysis.json"), &report.to_json()?)?;
            }
            eprintln!("analysis written to {}", path.display());
        }
        None => print!("{body}"),
    }
    eprintln!(
        "stable (continuous): {}, rank C = {:?}, rank O = {}, N = {}",
        report.stable_continuous, report.ctrb_rank, report.obsv_rank, report.lifted_dim
    );
    Ok(0)
}

fn ingest(cli: &Cli, a: &IngestArgs) -> Result<u8> {
    let spec = IngestSpec {
        inputs: a.inputs.clone(),
        columns: ColumnMap {
            time: a.time_column.clone(),
            angle: a.angle_column.clone(),
            velocity: a.velocity_column.clone(),
            input: Some(a.input_column.clone()),
        },
        window: a.window,
        scheme: Default::default(),
    };
    let out = ingest_measurements(&spec)?;
    let dir = out_dir(cli, "ingested")?;
    save_trajectory_set(&dir, "measured", cli.seed.unwrap_or(0), &out.trajectories)?;
    let path = dir.join("ingest_manifest.json");
    write_file(&path, &(serde_json::to_string_pretty(&out.manifest)? + "\n"))?;
    let estimated = out.manifest.records.iter().filter(|r| r.velocity_estimated).count();
    println!(
        "{} files ingested ({estimated} with estimated velocity), written to {}",
        out.trajectories.len(),
        dir.display()
    );
    Ok(0)
}

fn reproduce(cli: &Cli, a: &ReproduceArgs) -> Result<u8> {
    let targets: Vec<Target> = if a.target == "all" {
        Target::ALL.to_vec()
    } else {
        vec![a.target.parse()?]
    };
    let seed = cli.seed.unwrap_or(42);
    let base = cli.out.clone().unwrap_or_else(|| PathBuf::from("reproduction"));
    let mut all_passed = true;
    for t in targets {
        let dir = if a.target == "all" { base.join(t.as_str()) } else { base.clone() };
        let report = run_reproduction(t, seed, &dir)?;
        for c in &report.checks {
            println!("[{}] {t} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        all_passed &= report.passed();
    }
    Ok(if all_passed { 0 } else { 2 })
}
