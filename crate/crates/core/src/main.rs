//! Command-line front end: run experiments, compare strategies, sweep
//! ablations, and synthesize simulation corpora.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use seersc::allocation::BudgetTier;
use seersc::answer::ExtractionRule;
use seersc::backend::{Backend, EndpointConfig, HttpBackend, SimBackend};
use seersc::harness::{
    emit_csv, emit_json, emit_scaling_csv, generate_corpus, latency_scaling, load_dataset,
    load_profiles, render_table, run_experiment, write_dataset, write_profiles, CorpusSpec,
    Dataset, RunReport,
};
use seersc::strategies::{EntropyMode, PruningConfig, Strategy, StrategyConfig, VoteRule};

#[derive(Parser)]
#[command(
    name = "seersc",
    version,
    about = "Entropy-guided dynamic self-consistency over simulated or OpenAI-compatible backends"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one strategy over a dataset and report aggregate metrics.
    Run(RunCmd),
    /// Run several strategies and print a comparison table.
    Compare(CompareCmd),
    /// Sweep one knob and summarize accuracy and the probe entropy
    /// distribution per value.
    Ablate(AblateCmd),
    /// Synthesize a simulated corpus: a problems file plus a profiles file.
    GenProfiles(GenProfilesCmd),
}

#[derive(Args)]
struct DataArgs {
    /// Problems file: one JSON object per line with fields id, prompt, gold.
    #[arg(long)]
    dataset: PathBuf,
    /// Simulation profiles file (one JSON object per line); selects the
    /// simulated backend.
    #[arg(long)]
    profiles: Option<PathBuf>,
}

#[derive(Args)]
struct EndpointArgs {
    /// OpenAI-compatible base URL, e.g. https://host/v1; selects the HTTP
    /// backend. Requires --model.
    #[arg(long)]
    endpoint_url: Option<String>,
    /// Model name for HTTP requests.
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the bearer token.
    #[arg(long)]
    api_key_env: Option<String>,
    /// Maximum concurrent HTTP requests.
    #[arg(long)]
    max_in_flight: Option<usize>,
    /// Per-request timeout in seconds.
    #[arg(long)]
    timeout_s: Option<f64>,
    /// Total attempts per request, including the first.
    #[arg(long)]
    max_attempts: Option<usize>,
}

#[derive(Args)]
struct RunControl {
    /// Base seed; repeats derive their own seeds from it.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Independent repeats per configuration.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Worker threads dispatching problems (default: CPU count).
    #[arg(long)]
    workers: Option<usize>,
}

impl RunControl {
    fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(4)
                    .min(16)
            })
            .max(1)
    }
}

#[derive(Args, Default)]
struct StrategyArgs {
    /// TOML file of strategy settings; the flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Reasoning budget N.
    #[arg(long)]
    n: Option<usize>,
    /// Stop threshold on the top answer frequency for ac.
    #[arg(long)]
    ac_threshold: Option<f64>,
    /// Minimum samples before ac may stop.
    #[arg(long)]
    ac_min_samples: Option<usize>,
    /// Window size W for esc.
    #[arg(long)]
    esc_window: Option<usize>,
    /// Probe size M for seersc.
    #[arg(long)]
    seer_m: Option<usize>,
    /// Sampling temperature for the direct-answer probe.
    #[arg(long)]
    system1_temperature: Option<f64>,
    /// Sampling temperature for reasoning paths.
    #[arg(long)]
    system2_temperature: Option<f64>,
    /// Lower entropy threshold as a fraction of ln M.
    #[arg(long)]
    tau1_fraction: Option<f64>,
    /// Upper entropy threshold as a fraction of ln M.
    #[arg(long)]
    tau2_fraction: Option<f64>,
    /// Probe entropy weighting: confidence_weighted or shannon.
    #[arg(long)]
    entropy_mode: Option<EntropyMode>,
    /// Final vote rule: majority or tail_weighted.
    #[arg(long)]
    vote: Option<VoteRule>,
    /// Token window for the tail-confidence vote weight.
    #[arg(long)]
    vote_tail_window: Option<usize>,
    /// Token window for min-confidence pruning.
    #[arg(long)]
    prune_window: Option<usize>,
    /// Enable pruning: drop paths whose minimum window confidence falls
    /// below this.
    #[arg(long)]
    prune_threshold: Option<f64>,
    /// Disable pruning even if the config file enables it.
    #[arg(long)]
    no_prune: bool,
    /// Answer extraction rule: boxed_or_last_line, last_line, or
    /// regex:<pattern>.
    #[arg(long)]
    extraction: Option<ExtractionRule>,
    /// Completion length cap per sample.
    #[arg(long)]
    max_tokens: Option<usize>,
}

fn build_config(args: &StrategyArgs) -> Result<StrategyConfig> {
    let mut cfg: StrategyConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?
        }
        None => StrategyConfig::default(),
    };
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.ac_threshold {
        cfg.ac_threshold = v;
    }
    if let Some(v) = args.ac_min_samples {
        cfg.ac_min_samples = v;
    }
    if let Some(v) = args.esc_window {
        cfg.esc_window = v;
    }
    if let Some(v) = args.seer_m {
        cfg.seer_m = v;
    }
    if let Some(v) = args.system1_temperature {
        cfg.system1_temperature = v;
    }
    if let Some(v) = args.system2_temperature {
        cfg.system2_temperature = v;
    }
    if let Some(v) = args.tau1_fraction {
        cfg.thresholds.tau1_fraction = v;
    }
    if let Some(v) = args.tau2_fraction {
        cfg.thresholds.tau2_fraction = v;
    }
    if let Some(v) = args.entropy_mode {
        cfg.entropy_mode = v;
    }
    if let Some(v) = args.vote {
        cfg.vote = v;
    }
    if let Some(v) = args.vote_tail_window {
        cfg.vote_tail_window = v;
    }
    if let Some(threshold) = args.prune_threshold {
        let window_size = args
            .prune_window
            .or(cfg.pruning.map(|p| p.window_size))
            .unwrap_or(128);
        cfg.pruning = Some(PruningConfig {
            window_size,
            threshold,
        });
    } else if let Some(window) = args.prune_window {
        match &mut cfg.pruning {
            Some(p) => p.window_size = window,
            None => bail!("--prune-window needs --prune-threshold or pruning in the config file"),
        }
    }
    if args.no_prune {
        cfg.pruning = None;
    }
    if let Some(v) = &args.extraction {
        cfg.extraction = v.clone();
    }
    if let Some(v) = args.max_tokens {
        cfg.max_tokens = v;
    }
    Ok(cfg)
}

fn build_backend(
    data: &DataArgs,
    endpoint: &EndpointArgs,
    dataset: Dataset,
) -> Result<(Dataset, Box<dyn Backend>)> {
    match (&data.profiles, &endpoint.endpoint_url) {
        (Some(_), Some(_)) => {
            bail!("choose one backend: --profiles (simulated) or --endpoint-url (http)")
        }
        (Some(path), None) => {
            let profiles = load_profiles(path)?;
            let dataset = dataset.with_profiles(profiles.clone())?;
            let backend = SimBackend::new(profiles.into_values())?;
            Ok((dataset, Box::new(backend)))
        }
        (None, Some(url)) => {
            let model = endpoint
                .model
                .clone()
                .context("--endpoint-url requires --model")?;
            let mut cfg = EndpointConfig::new(url, model);
            cfg.api_key_env = endpoint.api_key_env.clone();
            if let Some(v) = endpoint.max_in_flight {
                cfg.max_in_flight = v;
            }
            if let Some(v) = endpoint.timeout_s {
                cfg.timeout_s = v;
            }
            if let Some(v) = endpoint.max_attempts {
                cfg.max_attempts = v;
            }
            Ok((dataset, Box::new(HttpBackend::new(cfg)?)))
        }
        (None, None) => bail!(
            "no backend selected: pass --profiles for the simulated backend \
             or --endpoint-url with --model for an http endpoint"
        ),
    }
}

fn report_failures(reports: &[RunReport]) {
    let failed: usize = reports.iter().map(|r| r.failures.len()).sum();
    if failed > 0 {
        eprintln!("warning: {failed} problem runs failed; emit json traces for details");
    }
}

#[derive(Args)]
struct RunCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    endpoint: EndpointArgs,
    #[command(flatten)]
    strategy_args: StrategyArgs,
    #[command(flatten)]
    control: RunControl,
    /// Strategy to run: cot, sc, ac, esc, or seersc.
    #[arg(long)]
    strategy: Option<Strategy>,
    /// Write summary rows as csv.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Write full per-problem traces as json.
    #[arg(long)]
    out_json: Option<PathBuf>,
}

fn run_cmd(cmd: RunCmd) -> Result<()> {
    let mut cfg = build_config(&cmd.strategy_args)?;
    if let Some(strategy) = cmd.strategy {
        cfg.strategy = strategy;
    }
    let dataset = load_dataset(&cmd.data.dataset)?;
    let (dataset, backend) = build_backend(&cmd.data, &cmd.endpoint, dataset)?;
    let reports = run_experiment(
        &dataset,
        std::slice::from_ref(&cfg),
        backend.as_ref(),
        cmd.control.seed,
        cmd.control.repeats,
        cmd.control.workers(),
    )?;
    print!("{}", render_table(&reports));
    report_failures(&reports);
    if let Some(path) = &cmd.out_csv {
        emit_csv(&reports, path)?;
        println!("wrote summary to {}", path.display());
    }
    if let Some(path) = &cmd.out_json {
        emit_json(&reports, path)?;
        println!("wrote traces to {}", path.display());
    }
    Ok(())
}

#[derive(Args)]
struct CompareCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    endpoint: EndpointArgs,
    #[command(flatten)]
    strategy_args: StrategyArgs,
    #[command(flatten)]
    control: RunControl,
    /// Comma-separated strategies to compare.
    #[arg(long, value_delimiter = ',', default_value = "cot,sc,ac,esc,seersc")]
    strategies: Vec<Strategy>,
    /// Summary csv path.
    #[arg(long, default_value = "compare.csv")]
    out_csv: PathBuf,
    /// Optional full-trace json path.
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Also sweep the budget N over these values and write a
    /// latency-scaling csv.
    #[arg(long, value_delimiter = ',')]
    scaling_budgets: Vec<usize>,
    /// Latency-scaling csv path.
    #[arg(long, default_value = "scaling.csv")]
    out_scaling_csv: PathBuf,
}

fn compare_cmd(cmd: CompareCmd) -> Result<()> {
    if cmd.strategies.is_empty() {
        bail!("--strategies needs at least one strategy");
    }
    let base = build_config(&cmd.strategy_args)?;
    let configs: Vec<StrategyConfig> = cmd
        .strategies
        .iter()
        .map(|&strategy| {
            let mut cfg = base.clone();
            cfg.strategy = strategy;
            cfg
        })
        .collect();
    let dataset = load_dataset(&cmd.data.dataset)?;
    let (dataset, backend) = build_backend(&cmd.data, &cmd.endpoint, dataset)?;
    let reports = run_experiment(
        &dataset,
        &configs,
        backend.as_ref(),
        cmd.control.seed,
        cmd.control.repeats,
        cmd.control.workers(),
    )?;
    print!("{}", render_table(&reports));
    report_failures(&reports);
    emit_csv(&reports, &cmd.out_csv)?;
    println!("wrote summary to {}", cmd.out_csv.display());
    if let Some(path) = &cmd.out_json {
        emit_json(&reports, path)?;
        println!("wrote traces to {}", path.display());
    }
    if !cmd.scaling_budgets.is_empty() {
        let points = latency_scaling(
            &dataset,
            &base,
            &cmd.strategies,
            &cmd.scaling_budgets,
            backend.as_ref(),
            cmd.control.seed,
            cmd.control.workers(),
        )?;
        emit_scaling_csv(&points, &cmd.out_scaling_csv)?;
        println!(
            "wrote {} scaling points to {}",
            points.len(),
            cmd.out_scaling_csv.display()
        );
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AblateAxis {
    /// Sweep the System-1 probe temperature.
    Temperature,
    /// Sweep the probe size M.
    ProbeSize,
    /// Sweep the final vote rule.
    Weighting,
}

#[derive(Args)]
struct AblateCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    endpoint: EndpointArgs,
    #[command(flatten)]
    strategy_args: StrategyArgs,
    #[command(flatten)]
    control: RunControl,
    /// Knob to sweep.
    #[arg(long, value_enum)]
    axis: AblateAxis,
    /// Comma-separated sweep values (defaults per axis).
    #[arg(long, value_delimiter = ',')]
    values: Vec<String>,
    /// Optional csv path for the ablation rows.
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

struct EntropySummary {
    mean: f64,
    single: usize,
    half: usize,
    full: usize,
}

fn entropy_summary(reports: &[RunReport]) -> EntropySummary {
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut tiers = [0usize; 3];
    for outcome in reports.iter().flat_map(|r| &r.outcomes) {
        if let Some(trace) = &outcome.system1 {
            sum += trace.decision.entropy_nats;
            count += 1;
            let slot = match trace.decision.tier {
                BudgetTier::Single => 0,
                BudgetTier::Half => 1,
                BudgetTier::Full => 2,
            };
            tiers[slot] += 1;
        }
    }
    EntropySummary {
        mean: if count == 0 { 0.0 } else { sum / count as f64 },
        single: tiers[0],
        half: tiers[1],
        full: tiers[2],
    }
}

fn ablate_cmd(cmd: AblateCmd) -> Result<()> {
    let mut base = build_config(&cmd.strategy_args)?;
    base.strategy = Strategy::Seersc;
    let values: Vec<String> = if cmd.values.is_empty() {
        match cmd.axis {
            AblateAxis::Temperature => vec!["0.25".into(), "0.5".into(), "1.0".into()],
            AblateAxis::ProbeSize => vec!["8".into(), "16".into(), "32".into(), "64".into()],
            AblateAxis::Weighting => vec!["majority".into(), "tail_weighted".into()],
        }
    } else {
        cmd.values.clone()
    };
    let mut configs = Vec::with_capacity(values.len());
    for value in &values {
        let mut cfg = base.clone();
        match cmd.axis {
            AblateAxis::Temperature => {
                cfg.system1_temperature = value
                    .parse()
                    .with_context(|| format!("bad temperature {value:?}"))?;
            }
            AblateAxis::ProbeSize => {
                cfg.seer_m = value
                    .parse()
                    .with_context(|| format!("bad probe size {value:?}"))?;
            }
            AblateAxis::Weighting => {
                cfg.vote = value
                    .parse()
                    .with_context(|| format!("bad vote rule {value:?}"))?;
            }
        }
        configs.push(cfg);
    }
    let dataset = load_dataset(&cmd.data.dataset)?;
    let (dataset, backend) = build_backend(&cmd.data, &cmd.endpoint, dataset)?;
    let reports = run_experiment(
        &dataset,
        &configs,
        backend.as_ref(),
        cmd.control.seed,
        cmd.control.repeats,
        cmd.control.workers(),
    )?;
    report_failures(&reports);

    let axis_name = match cmd.axis {
        AblateAxis::Temperature => "temperature",
        AblateAxis::ProbeSize => "probe_size",
        AblateAxis::Weighting => "weighting",
    };
    let repeats = cmd.control.repeats;
    let mut rows = vec![vec![
        axis_name.to_string(),
        "accuracy".into(),
        "mean_ktok".into(),
        "mean_latency_s".into(),
        "mean_entropy".into(),
        "single".into(),
        "half".into(),
        "full".into(),
    ]];
    let mut csv_rows = Vec::new();
    for (i, value) in values.iter().enumerate() {
        let group = &reports[i * repeats..(i + 1) * repeats];
        let mean =
            |f: fn(&RunReport) -> f64| group.iter().map(f).sum::<f64>() / group.len() as f64;
        let accuracy = mean(|r| r.accuracy);
        let ktok = mean(|r| r.mean_tokens_thousands);
        let latency = mean(|r| r.mean_latency_s);
        let entropy = entropy_summary(group);
        rows.push(vec![
            value.clone(),
            format!("{accuracy:.4}"),
            format!("{ktok:.3}"),
            format!("{latency:.3}"),
            format!("{:.4}", entropy.mean),
            entropy.single.to_string(),
            entropy.half.to_string(),
            entropy.full.to_string(),
        ]);
        csv_rows.push((
            value.clone(),
            accuracy,
            ktok,
            latency,
            entropy.mean,
            entropy.single,
            entropy.half,
            entropy.full,
        ));
    }
    print_aligned(&rows);
    if let Some(path) = &cmd.out_csv {
        let mut writer = csv::Writer::from_path(path)
            .with_context(|| format!("writing {}", path.display()))?;
        writer.write_record([
            "axis",
            "value",
            "accuracy",
            "mean_tokens_thousands",
            "mean_latency_s",
            "mean_entropy_nats",
            "tier_single",
            "tier_half",
            "tier_full",
        ])?;
        for (value, accuracy, ktok, latency, entropy, single, half, full) in csv_rows {
            writer.write_record([
                axis_name.to_string(),
                value,
                accuracy.to_string(),
                ktok.to_string(),
                latency.to_string(),
                entropy.to_string(),
                single.to_string(),
                half.to_string(),
                full.to_string(),
            ])?;
        }
        writer.flush()?;
        println!("wrote ablation rows to {}", path.display());
    }
    Ok(())
}

fn print_aligned(rows: &[Vec<String>]) {
    if rows.is_empty() {
        return;
    }
    let cols = rows[0].len();
    let mut widths = vec![0usize; cols];
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:>w$}"))
            .collect();
        println!("{}", line.join("  ").trim_end());
    }
}

#[derive(Args)]
struct GenProfilesCmd {
    /// Output problems file.
    #[arg(long)]
    out_dataset: PathBuf,
    /// Output profiles file.
    #[arg(long)]
    out_profiles: PathBuf,
    /// Corpus name.
    #[arg(long)]
    name: Option<String>,
    /// Number of problems.
    #[arg(long)]
    problems: Option<usize>,
    /// Fraction of problems that are easy.
    #[arg(long)]
    easy_fraction: Option<f64>,
    /// Simulated decode speed.
    #[arg(long)]
    tokens_per_second: Option<f64>,
    /// Direct-answer completion length range, inclusive.
    #[arg(long)]
    direct_tokens_lo: Option<usize>,
    #[arg(long)]
    direct_tokens_hi: Option<usize>,
    /// Reasoning completion length range, inclusive.
    #[arg(long)]
    reasoning_tokens_lo: Option<usize>,
    #[arg(long)]
    reasoning_tokens_hi: Option<usize>,
    /// Direct-answer gold mass on easy problems.
    #[arg(long)]
    easy_direct_concentration: Option<f64>,
    /// Reasoning gold mass on easy problems.
    #[arg(long)]
    easy_reasoning_gold: Option<f64>,
    /// Direct-answer gold mass on hard problems.
    #[arg(long)]
    hard_direct_gold: Option<f64>,
    /// Distinct direct-answer labels on hard problems.
    #[arg(long)]
    hard_direct_labels: Option<usize>,
    /// Reasoning gold mass on hard problems.
    #[arg(long)]
    hard_reasoning_gold: Option<f64>,
    /// Distinct reasoning labels on hard problems.
    #[arg(long)]
    hard_reasoning_labels: Option<usize>,
}

fn gen_profiles_cmd(cmd: GenProfilesCmd) -> Result<()> {
    let mut spec = CorpusSpec::default();
    if let Some(v) = &cmd.name {
        spec.name = v.clone();
    }
    if let Some(v) = cmd.problems {
        spec.problems = v;
    }
    if let Some(v) = cmd.easy_fraction {
        spec.easy_fraction = v;
    }
    if let Some(v) = cmd.tokens_per_second {
        spec.tokens_per_second = v;
    }
    if let Some(v) = cmd.direct_tokens_lo {
        spec.direct_token_range.0 = v;
    }
    if let Some(v) = cmd.direct_tokens_hi {
        spec.direct_token_range.1 = v;
    }
    if let Some(v) = cmd.reasoning_tokens_lo {
        spec.reasoning_token_range.0 = v;
    }
    if let Some(v) = cmd.reasoning_tokens_hi {
        spec.reasoning_token_range.1 = v;
    }
    if let Some(v) = cmd.easy_direct_concentration {
        spec.easy_direct_concentration = v;
    }
    if let Some(v) = cmd.easy_reasoning_gold {
        spec.easy_reasoning_gold = v;
    }
    if let Some(v) = cmd.hard_direct_gold {
        spec.hard_direct_gold = v;
    }
    if let Some(v) = cmd.hard_direct_labels {
        spec.hard_direct_labels = v;
    }
    if let Some(v) = cmd.hard_reasoning_gold {
        spec.hard_reasoning_gold = v;
    }
    if let Some(v) = cmd.hard_reasoning_labels {
        spec.hard_reasoning_labels = v;
    }
    let (problems, profiles) = generate_corpus(&spec)?;
    write_dataset(&problems, &cmd.out_dataset)?;
    write_profiles(&profiles, &cmd.out_profiles)?;
    println!(
        "wrote {} problems to {} and {} profiles to {}",
        problems.len(),
        cmd.out_dataset.display(),
        profiles.len(),
        cmd.out_profiles.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(cmd) => run_cmd(cmd),
        Command::Compare(cmd) => compare_cmd(cmd),
        Command::Ablate(cmd) => ablate_cmd(cmd),
        Command::GenProfiles(cmd) => gen_profiles_cmd(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
