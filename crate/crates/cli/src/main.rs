use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lossbound::analytics::{bounds_for, compute_r, solve_phi, BoundSet, GeometricOffspring};
use lossbound::branching::{run_replications, CompoundLoss, Gim1Process, Process};
use lossbound::harness::{run_experiment, ExperimentConfig, ModelConfig, OutputFormat};
use lossbound::ordering::EmpiricalSample;
use lossbound::queue_sim::{run_many, SimulationOutput, SimulationPlan};
use lossbound::Execution;

const DEFAULT_SEED: u64 = 1;
const DEFAULT_REPS: u64 = 100_000;

#[derive(Parser)]
#[command(name = "lossbound", version, about = "Busy-period losses in A/B/1/n loss queues")]
struct Cli {
    /// Root seed (verify: overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replications (verify: overrides the config).
    #[arg(long, global = true)]
    reps: Option<u64>,
    /// Significance level for dominance checks (verify: overrides the config).
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; 1 runs sequentially. Defaults to the available parallelism.
    #[arg(long, global = true, env = "LOSSBOUND_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
            Format::Text => OutputFormat::Text,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProcessArg {
    Gw,
    Compound,
    Gim1,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate busy periods of the A/B/1/n queue.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: u32,
        /// Dump per-period records (rep, losses, served, duration, truncated).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the analytic bounds for buffer sizes 0..=n.
    Bounds {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: u32,
    },
    /// Sample a comparison process.
    Branching {
        #[arg(long, value_enum)]
        process: ProcessArg,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Offspring parameter for `gw`; derived from the model when omitted.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        n: u32,
        /// Write the raw draws (rep, generation, count) as CSV.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Run an experiment config and report a verdict per claim.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Failure {
    Usage(String),
    ClaimsFailed,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::ClaimsFailed) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn execution(cli: &Cli) -> Execution {
    match cli.threads {
        None | Some(0) => Execution::Parallel,
        Some(1) => Execution::Sequential,
        Some(k) => Execution::Threads(k),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_model(path: &Path) -> Result<ModelConfig, Failure> {
    ModelConfig::from_toml_str(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Usage(e.to_string()))
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Simulate { model, n, csv } => simulate(cli, model, *n, csv.as_deref()),
        Command::Bounds { model, n } => bounds(cli, model, *n),
        Command::Branching {
            process,
            model,
            r,
            n,
            samples,
        } => branching(cli, *process, model.as_deref(), *r, *n, samples.as_deref()),
        Command::Verify { config } => verify(cli, config),
    }
}

fn reps(cli: &Cli) -> Result<u64, Failure> {
    match cli.reps.unwrap_or(DEFAULT_REPS) {
        0 => Err(Failure::Usage("--reps must be at least 1".into())),
        r => Ok(r),
    }
}

#[derive(Serialize)]
struct MeanRow {
    quantity: String,
    mean: f64,
    std_error: f64,
    n_obs: usize,
}

fn mean_row(s: &EmpiricalSample) -> MeanRow {
    let n = s.n_obs();
    let mean = s.mean();
    let var = if n > 1 {
        s.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    MeanRow {
        quantity: s.label.clone(),
        mean,
        std_error: (var / n as f64).sqrt(),
        n_obs: n,
    }
}

#[derive(Serialize)]
struct SimulationSummary {
    interarrival: String,
    service: String,
    n: u32,
    seed: u64,
    replications: u64,
    truncated: usize,
    means: Vec<MeanRow>,
}

fn render_rows<T: Serialize>(
    format: Format,
    header: &[String],
    rows: &[T],
    whole: &impl Serialize,
) -> Result<String, Failure> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(whole)? + "\n"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r)?;
            }
            Ok(String::from_utf8(w.into_inner().map_err(|e| e.to_string())?)?)
        }
        Format::Text => {
            let mut s = header.join("\n");
            s.push('\n');
            let table = serde_json::to_value(rows)?;
            for row in table.as_array().into_iter().flatten() {
                let cells: Vec<String> = row
                    .as_object()
                    .into_iter()
                    .flatten()
                    .map(|(k, v)| match v {
                        serde_json::Value::Number(x) => format!("{k} = {}", fmt_value(x.as_f64().unwrap_or(f64::NAN))),
                        serde_json::Value::Null => format!("{k} = -"),
                        serde_json::Value::String(t) => format!("{k} = {t}"),
                        other => format!("{k} = {other}"),
                    })
                    .collect();
                s.push_str(&cells.join("  "));
                s.push('\n');
            }
            Ok(s)
        }
    }
}

fn fmt_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:.6}")
    }
}

fn simulate(cli: &Cli, model_path: &Path, n: u32, csv_path: Option<&Path>) -> Result<(), Failure> {
    let model = read_model(model_path)?;
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let replications = reps(cli)?;
    let plan = SimulationPlan::new(model.with_buffer(n), replications, seed)?;
    let out = run_many(&plan, execution(cli));
    if let Some(p) = csv_path {
        write_records(p, &out)?;
    }
    let mut means = vec![
        mean_row(&out.losses()),
        mean_row(&out.served()),
        mean_row(&out.duration()),
    ];
    for j in 0..=n as usize + 1 {
        means.push(mean_row(&out.crossing(j)));
    }
    let summary = SimulationSummary {
        interarrival: model.interarrival.to_string(),
        service: model.service.to_string(),
        n,
        seed,
        replications,
        truncated: out.truncation_count(),
        means,
    };
    let header = vec![format!(
        "A = {}, B = {}, n = {n}, seed = {seed}, replications = {replications}, truncated = {}",
        summary.interarrival, summary.service, summary.truncated
    )];
    let text = render_rows(cli.format.unwrap_or(Format::Text), &header, &summary.means, &summary)?;
    emit(cli.out.as_deref(), &text)
}

fn write_records(path: &Path, out: &SimulationOutput) -> Result<(), Failure> {
    #[derive(Serialize)]
    struct Row {
        rep: usize,
        losses: u64,
        served: u64,
        duration: f64,
        truncated: bool,
    }
    let mut w = csv::Writer::from_path(path)?;
    for (rep, r) in out.records.iter().enumerate() {
        w.serialize(Row {
            rep,
            losses: r.losses,
            served: r.served,
            duration: r.duration,
            truncated: r.truncated,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct BoundsRow {
    n: u32,
    r: Option<f64>,
    phi: Option<f64>,
    el_lower: Option<f64>,
    el_upper: Option<f64>,
    el_gw_poisson: Option<f64>,
    enu_lower: Option<f64>,
    enu_upper: Option<f64>,
    et_lower: Option<f64>,
    et_upper: Option<f64>,
    applicability: String,
}

impl From<&BoundSet> for BoundsRow {
    fn from(b: &BoundSet) -> Self {
        Self {
            n: b.n,
            r: b.r,
            phi: b.phi,
            el_lower: b.el_lower,
            el_upper: b.el_upper,
            el_gw_poisson: b.el_gw_poisson,
            enu_lower: b.enu_lower,
            enu_upper: b.enu_upper,
            et_lower: b.et_lower,
            et_upper: b.et_upper,
            applicability: b
                .applicability
                .map(|a| serde_json::to_value(a).map(|v| v.as_str().unwrap_or_default().to_string()))
                .transpose()
                .ok()
                .flatten()
                .unwrap_or_else(|| "none".into()),
        }
    }
}

fn bounds(cli: &Cli, model_path: &Path, n: u32) -> Result<(), Failure> {
    let model = read_model(model_path)?;
    let sets = (0..=n)
        .map(|k| bounds_for(&model.with_buffer(k)))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<BoundsRow> = sets.iter().map(BoundsRow::from).collect();
    let mut header = vec![format!("A = {}, B = {}", model.interarrival, model.service)];
    for note in sets.iter().flat_map(|s| s.notes.iter()) {
        if !header.contains(note) {
            header.push(note.clone());
        }
    }
    let text = render_rows(cli.format.unwrap_or(Format::Text), &header, &rows, &sets)?;
    emit(cli.out.as_deref(), &text)
}

#[derive(Serialize)]
struct BranchingSummary {
    process: String,
    generation: u32,
    seed: u64,
    replications: u64,
    expected_mean: Option<f64>,
    resampled: usize,
    sample: MeanRow,
}

fn branching(
    cli: &Cli,
    kind: ProcessArg,
    model_path: Option<&Path>,
    r: Option<f64>,
    n: u32,
    samples: Option<&Path>,
) -> Result<(), Failure> {
    let model = model_path.map(read_model).transpose()?;
    let need_model = || {
        model
            .clone()
            .ok_or_else(|| Failure::Usage("this process needs --model".into()))
    };
    let (process, expected) = match kind {
        ProcessArg::Gw => {
            let r = match (r, &model) {
                (Some(r), _) => r,
                (None, Some(m)) => compute_r(&m.interarrival, &m.service)?,
                (None, None) => return Err(Failure::Usage("gw needs --r or --model".into())),
            };
            let g = GeometricOffspring::new(r)?;
            (Process::GeometricGw(g), Some(g.generation_mean(n)))
        }
        ProcessArg::Compound => {
            let m = need_model()?;
            let lambda = m
                .interarrival
                .exponential_rate()
                .ok_or_else(|| Failure::Usage("the compound process needs exponential interarrivals".into()))?;
            let c = match r {
                Some(r) => CompoundLoss::new(r, m.service.clone(), lambda)?,
                None => CompoundLoss::for_service(m.service.clone(), lambda)?,
            };
            let mean = c.mean(n);
            (Process::Compound(c), Some(mean))
        }
        ProcessArg::Gim1 => {
            let m = need_model()?;
            let mu = m
                .service
                .exponential_rate()
                .ok_or_else(|| Failure::Usage("the GI/M/1-type process needs exponential service".into()))?;
            let p = Gim1Process::new(m.interarrival.clone(), mu)?;
            let phi = solve_phi(&m.interarrival, mu)?;
            (Process::Gim1Type(p), Some(phi.powi(n as i32)))
        }
    };
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let replications = reps(cli)?;
    let out = run_replications(&process, n, replications, seed, execution(cli))?;
    if let Some(p) = samples {
        #[derive(Serialize)]
        struct Row {
            rep: usize,
            generation: u32,
            count: u64,
        }
        let mut w = csv::Writer::from_path(p)?;
        for (rep, s) in out.samples().enumerate() {
            w.serialize(Row {
                rep,
                generation: s.generation,
                count: s.count,
            })?;
        }
        w.flush()?;
    }
    let summary = BranchingSummary {
        process: serde_json::to_value(out.process)?.as_str().unwrap_or_default().to_string(),
        generation: n,
        seed,
        replications,
        expected_mean: expected,
        resampled: out.resampled,
        sample: mean_row(&out.empirical()),
    };
    let header = vec![format!(
        "{} generation {n}, seed = {seed}, replications = {replications}, expected mean = {}",
        summary.process,
        expected.map(fmt_value).unwrap_or_else(|| "-".into())
    )];
    let text = render_rows(
        cli.format.unwrap_or(Format::Text),
        &header,
        std::slice::from_ref(&summary.sample),
        &summary,
    )?;
    emit(cli.out.as_deref(), &text)
}

fn verify(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let text = read(path)?;
    let mut config =
        ExperimentConfig::from_toml_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(reps) = cli.reps {
        config.replications = reps;
    }
    if let Some(alpha) = cli.alpha {
        config.alpha = alpha;
    }
    config.validate()?;
    let format = cli.format.map(OutputFormat::from).unwrap_or(config.output.format);
    let report = run_experiment(&config, execution(cli))?;
    let rendered = report.render(format)?;
    let out = cli.out.clone().or_else(|| config.output.path.clone());
    emit(out.as_deref(), &rendered)?;
    if report.all_passed_or_skipped() {
        Ok(())
    } else {
        Err(Failure::ClaimsFailed)
    }
}
