use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use qsnap_core::circuit::QuantumCircuit;
use qsnap_core::estimators::{EngineConfig, Method, Representation};
use qsnap_core::noise::NoiseParams;
use qsnap_core::state::StateVector;
use qsnap_core::store::{self, SnapshotMetadata, SnapshotRecord};
use qsnap_harness::emit::{load_cohort, write_csv};
use qsnap_harness::entropy::{emit_entropy, run_entropy_analysis};
use qsnap_harness::experiment::{with_budget, with_seed, ExperimentSpec, NoiseSetting, DEFAULT_TRAJECTORIES};
use qsnap_harness::mixed::{emit_mixed, run_mixed_state_diagnostic, MixedDiagnosticConfig};
use qsnap_harness::standard::{ghz_circuit, run_standard_states, STANDARD_THRESHOLD};
use qsnap_harness::{run_cohort, run_midcircuit_snapshot, HarnessError, RunSettings};

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_THRESHOLD: u8 = 3;

#[derive(Parser)]
#[command(name = "qsnap", version, about = "Reconstruct quantum states from SWAP-test fidelity and store them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct a cohort of random targets.
    Cohort(CohortArgs),
    /// Benchmark the standard-state catalog.
    Standard(StandardArgs),
    /// Compare target and reconstruction entropies of a stored cohort.
    Entropy(EntropyArgs),
    /// Reconstruct the state part-way through a circuit.
    Snapshot(SnapshotArgs),
    /// Compare SWAP-test and Uhlmann signals on mixed targets.
    MixedDiagnostic(MixedArgs),
    /// Store a state given as interleaved amplitudes.
    Deposit(DepositArgs),
    /// Load a stored state and print a circuit preparing it.
    Withdraw(WithdrawArgs),
    /// List stored snapshot identifiers.
    List(StoreArg),
}

#[derive(Args, Clone)]
struct EngineArgs {
    #[arg(long, default_value = "qeswap")]
    method: Method,
    #[arg(long = "repr", default_value = "statevector")]
    representation: Representation,
    /// off, device, or file:<path> with key=value noise parameters.
    #[arg(long, default_value = "off")]
    noise: String,
    #[arg(long, default_value_t = DEFAULT_TRAJECTORIES)]
    trajectories: u64,
    /// Shot count, or `analytic` for the exact expectation.
    #[arg(long, default_value = "analytic")]
    shots: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration (QESwap) or epoch (gradient) budget.
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CohortArgs {
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value_t = 1)]
    qubits: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Extra threshold to report (repeatable); 0.95 and 0.99 are always included.
    #[arg(long = "threshold")]
    thresholds: Vec<f64>,
    /// Exit with status 3 unless this fraction of trials reaches the highest threshold.
    #[arg(long)]
    gate: Option<f64>,
}

#[derive(Args)]
struct StandardArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// Qubit counts to benchmark (repeatable); defaults to 1, 2 and 3.
    #[arg(long)]
    qubits: Vec<usize>,
}

#[derive(Args)]
struct EntropyArgs {
    /// Cohort directory written by `cohort --out`.
    cohort: PathBuf,
    /// Output directory; defaults to the cohort directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SnapshotArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// Circuit file in the one-gate-per-line text form; a GHZ circuit if omitted.
    #[arg(long)]
    circuit: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    qubits: usize,
    /// Number of leading gates to execute before the snapshot.
    #[arg(long)]
    cut: usize,
    /// Deposit the reconstruction into this store.
    #[arg(long)]
    store: Option<PathBuf>,
}

#[derive(Args)]
struct MixedArgs {
    #[arg(long, default_value = "gradient")]
    method: Method,
    #[arg(long, default_value_t = 2)]
    qubits: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// 1 for pure targets, 2 for two-component mixtures.
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StoreArg {
    #[arg(long)]
    store: PathBuf,
}

#[derive(Args)]
struct DepositArgs {
    #[arg(long)]
    store: PathBuf,
    /// JSON array of interleaved (re, im) amplitudes.
    #[arg(long)]
    amplitudes: PathBuf,
    #[arg(long, default_value = "")]
    label: String,
}

#[derive(Args)]
struct WithdrawArgs {
    id: String,
    #[arg(long)]
    store: PathBuf,
}

/// A run finished but missed its acceptance gate.
#[derive(Debug)]
struct GateMiss(String);

impl std::fmt::Display for GateMiss {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for GateMiss {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    HarnessError::Invalid(msg.into()).into()
}

fn parse_noise(text: &str, trajectories: u64) -> anyhow::Result<NoiseSetting> {
    Ok(match text {
        "off" => NoiseSetting::Off,
        "device" => NoiseSetting::On { params: NoiseParams::default(), trajectories },
        other => match other.strip_prefix("file:") {
            Some(path) => NoiseSetting::On { params: NoiseParams::load(Path::new(path))?, trajectories },
            None => return Err(usage(format!("--noise expects off, device or file:<path>, got {other:?}"))),
        },
    })
}

fn parse_shots(text: &str) -> anyhow::Result<Option<u64>> {
    if text == "analytic" {
        return Ok(None);
    }
    text.parse().map(Some).map_err(|_| usage(format!("--shots expects a count or `analytic`, got {text:?}")))
}

impl EngineArgs {
    fn settings(&self) -> anyhow::Result<RunSettings> {
        let mut settings =
            RunSettings::new(self.method, self.representation).with_noise(parse_noise(&self.noise, self.trajectories)?);
        settings.shots = parse_shots(&self.shots)?;
        if let Some(budget) = self.max_iter {
            settings.engine = with_budget(&settings.engine, budget);
        }
        settings.engine = with_seed(&settings.engine, self.seed);
        Ok(settings)
    }
}

fn cmd_cohort(args: &CohortArgs) -> anyhow::Result<()> {
    let settings = args.engine.settings()?;
    let mut spec = ExperimentSpec::new(args.engine.method, args.engine.representation, args.qubits);
    spec.engine = settings.engine;
    spec.noise = settings.noise;
    spec.shots = settings.shots;
    spec.n_trials = args.trials;
    spec.seed = args.engine.seed;
    spec.out_dir = args.engine.out.clone();
    spec.add_thresholds(&args.thresholds);
    spec.validate()?;
    eprintln!("running {} trials of {} on {} qubit(s)", spec.n_trials, spec.method(), spec.n_qubits);
    let summary = run_cohort(&spec)?;
    println!("threshold,reached,pass_rate,mean_epochs");
    for s in &summary.thresholds {
        println!("{},{},{:.3},{}", s.threshold, s.reached, s.pass_rate, s.mean_epochs.map_or("NA".into(), |e| format!("{e:.2}")));
    }
    println!(
        "mean_fidelity={} min_fidelity={}",
        summary.mean_fidelity.map_or("NA".into(), |f| format!("{f:.5}")),
        summary.min_fidelity.map_or("NA".into(), |f| format!("{f:.5}"))
    );
    for t in summary.trials.iter().filter(|t| t.error.is_some()) {
        eprintln!("trial {} failed: {}", t.trial, t.error.as_deref().unwrap_or_default());
    }
    if let Some(gate) = args.gate {
        let top = summary.thresholds.last().expect("thresholds are never empty");
        if top.pass_rate < gate {
            return Err(GateMiss(format!("pass rate {:.3} at {} is below {gate}", top.pass_rate, top.threshold)).into());
        }
    }
    Ok(())
}

fn cmd_standard(args: &StandardArgs) -> anyhow::Result<()> {
    let settings = args.engine.settings()?;
    let qubits = if args.qubits.is_empty() { vec![1, 2, 3] } else { args.qubits.clone() };
    if let Some(&bad) = qubits.iter().find(|&&n| !(1..=3).contains(&n)) {
        return Err(usage(format!("the standard catalog covers 1 to 3 qubits, not {bad}")));
    }
    let rows = run_standard_states(&settings, &qubits, args.engine.seed);
    match &args.engine.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            write_csv(&dir.join("standard.csv"), &rows)?;
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(<qsnap_harness::standard::StandardRow as qsnap_harness::emit::CsvRow>::HEADER)?;
            for r in &rows {
                w.write_record(qsnap_harness::emit::CsvRow::to_fields(r))?;
            }
            w.flush()?;
        }
    }
    let missed: Vec<&str> = rows.iter().filter(|r| r.epochs.is_none()).map(|r| r.state.as_str()).collect();
    if !missed.is_empty() {
        return Err(GateMiss(format!("below {STANDARD_THRESHOLD}: {}", missed.join(", "))).into());
    }
    Ok(())
}

fn cmd_entropy(args: &EntropyArgs) -> anyhow::Result<()> {
    let cohort = load_cohort(&args.cohort).with_context(|| format!("loading {}", args.cohort.display()))?;
    let analysis = run_entropy_analysis(&cohort)?;
    emit_entropy(&analysis, args.out.as_deref().unwrap_or(&args.cohort))?;
    let d = &analysis.distribution;
    println!(
        "trials={} matched={} max_abs_diff_matched={}",
        analysis.rows.len(),
        d.matched,
        d.max_abs_diff_matched.map_or("NA".into(), |v| format!("{v:.4}"))
    );
    Ok(())
}

fn cmd_snapshot(args: &SnapshotArgs) -> anyhow::Result<()> {
    let settings = args.engine.settings()?;
    let circuit = match &args.circuit {
        Some(path) => QuantumCircuit::parse(args.qubits, &std::fs::read_to_string(path)?)?,
        None => ghz_circuit(args.qubits),
    };
    let snap = run_midcircuit_snapshot(&circuit, args.cut, &settings, args.engine.seed)?;
    println!("{}", snap.run.report.to_json());
    println!("label={} fidelity={:.6}", snap.label, snap.run.final_fidelity);
    if let Some(dir) = &args.engine.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("snapshot.json"), snap.run.report.to_json())?;
    }
    if let Some(store_dir) = &args.store {
        let record = snap.record().ok_or_else(|| usage("only pure reconstructions can be deposited"))?;
        println!("id={}", store::deposit(&record, store_dir)?);
    }
    Ok(())
}

fn cmd_mixed(args: &MixedArgs) -> anyhow::Result<()> {
    let mut config = MixedDiagnosticConfig {
        n_qubits: args.qubits,
        trials: args.trials,
        rank: args.rank,
        seed: args.seed,
        ..MixedDiagnosticConfig::default()
    };
    if args.method == Method::Qeswap {
        config.engine = EngineConfig::Qeswap(qsnap_core::estimators::QeswapConfig { max_iter: 300, ..Default::default() });
    }
    if let Some(budget) = args.max_iter {
        config.engine = with_budget(&config.engine, budget);
    }
    let diag = run_mixed_state_diagnostic(&config)?;
    if let Some(dir) = &args.out {
        emit_mixed(&diag, dir)?;
    }
    println!("{}", serde_json::to_string_pretty(&diag.summary)?);
    let s = &diag.summary;
    if args.rank == 2 && (2 * s.plateaued <= s.trials || s.recovered < s.trials) {
        return Err(GateMiss(format!("plateaued {}/{} recovered {}/{}", s.plateaued, s.trials, s.recovered, s.trials)).into());
    }
    Ok(())
}

fn cmd_deposit(args: &DepositArgs) -> anyhow::Result<()> {
    let raw: Vec<f64> = serde_json::from_str(&std::fs::read_to_string(&args.amplitudes)?)?;
    let state = StateVector::from_interleaved(&raw)?;
    let meta = SnapshotMetadata::now("external", "statevector", 1.0, 0, 0, &args.label);
    println!("{}", store::deposit(&SnapshotRecord::from_state(&state, meta), &args.store)?);
    Ok(())
}

fn cmd_withdraw(args: &WithdrawArgs) -> anyhow::Result<()> {
    let (state, circuit) = store::withdraw(&args.id, &args.store)?;
    println!("# amplitudes {}", serde_json::to_string(&state.to_interleaved())?);
    print!("{}", circuit.dump());
    Ok(())
}

fn cmd_list(args: &StoreArg) -> anyhow::Result<()> {
    for id in store::list(&args.store)? {
        println!("{id}");
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Cohort(a) => cmd_cohort(a),
        Command::Standard(a) => cmd_standard(a),
        Command::Entropy(a) => cmd_entropy(a),
        Command::Snapshot(a) => cmd_snapshot(a),
        Command::MixedDiagnostic(a) => cmd_mixed(a),
        Command::Deposit(a) => cmd_deposit(a),
        Command::Withdraw(a) => cmd_withdraw(a),
        Command::List(a) => cmd_list(a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<GateMiss>() {
        return EXIT_THRESHOLD;
    }
    let invalid = matches!(err.downcast_ref::<HarnessError>(), Some(HarnessError::Invalid(_)))
        || matches!(
            err.downcast_ref::<HarnessError>(),
            Some(HarnessError::Core(qsnap_core::Error::InvalidArgument(_)))
        )
        || matches!(err.downcast_ref::<qsnap_core::Error>(), Some(qsnap_core::Error::InvalidArgument(_)));
    if invalid {
        EXIT_USAGE
    } else {
        EXIT_RUNTIME
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
