//! Command-line front end: periodicity searches, protocol runs, attack
//! sweeps, a BB84 baseline, layout routing comparisons, and distribution
//! metrics. Reports are deterministic for a fixed config and seed; wall
//! time goes to stderr so files stay byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use parrondo_qw::attack::{
    bb84_run, eve_attack_sweep, Bb84Config, EveBasis, EveReencode,
};
use parrondo_qw::circuit::Circuit;
use parrondo_qw::dist::Distribution;
use parrondo_qw::metrics::MetricReport;
use parrondo_qw::noise::NoiseSpec;
use parrondo_qw::protocol::{
    build_circuit, run_protocol, ProtocolConfig, TransferStrategy,
};
use parrondo_qw::router::{compare_layouts, route, CouplingGraph, LayoutAssignment};
use parrondo_qw::walk::{
    find_period, find_sequence_period, walk_unitary, CoinParams, ParrondoSequence,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
enum CliError {
    Config(String),
    Runtime(String),
}

impl From<parrondo_qw::Error> for CliError {
    fn from(e: parrondo_qw::Error) -> Self {
        match e {
            parrondo_qw::Error::Config(m) => CliError::Config(m),
            parrondo_qw::Error::InvalidParameter(m) => CliError::Config(m),
            parrondo_qw::Error::Parse { line, message } => {
                CliError::Config(format!("line {line}: {message}"))
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "pqw", version, about = "Parrondo cyclic-walk protocol toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for the revival period of a coin or coin sequence
    Period(PeriodArgs),
    /// Run the key-exchange protocol over a message/start grid
    Protocol(ProtocolArgs),
    /// Intercept-resend attack sweep over Eve seeds
    Attack(AttackArgs),
    /// Prepare-and-measure BB84 baseline
    Bb84(Bb84Args),
    /// Route a protocol circuit onto a coupling graph
    Route(RouteArgs),
    /// Compare two outcome distributions
    Metrics(MetricsArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// RNG seed for anything sampled
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample counts instead of exact probabilities
    #[arg(long)]
    shots: Option<u64>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// TOML config file; command-line flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum TransferArg {
    Swap,
    SwapTeleport,
    TeleportSwap,
}

impl From<TransferArg> for TransferStrategy {
    fn from(t: TransferArg) -> Self {
        match t {
            TransferArg::Swap => TransferStrategy::SwapOnly,
            TransferArg::SwapTeleport => TransferStrategy::SwapThenTeleport,
            TransferArg::TeleportSwap => TransferStrategy::TeleportThenSwap,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum NoiseModeArg {
    PerGate,
    Terminal,
}

fn main() {
    let started = Instant::now();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(CliError::Config(m)) => {
            eprintln!("config error: {m}");
            2
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("runtime error: {m}");
            3
        }
    };
    eprintln!("wall time: {:.3}s", started.elapsed().as_secs_f64());
    std::process::exit(code);
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Period(a) => cmd_period(a),
        Command::Protocol(a) => cmd_protocol(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Bb84(a) => cmd_bb84(a),
        Command::Route(a) => cmd_route(a),
        Command::Metrics(a) => cmd_metrics(a),
    }
}

// ---------------------------------------------------------------------------
// Report plumbing
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Report<T: Serialize> {
    version: &'static str,
    command: String,
    seed: u64,
    config: serde_json::Value,
    result: T,
}

fn emit<T: Serialize>(
    common: &CommonArgs,
    command: &str,
    config_echo: serde_json::Value,
    result: T,
    table: impl FnOnce(&T) -> String,
) -> CliResult<()> {
    let text = match common.format {
        Format::Json => {
            let report = Report {
                version: VERSION,
                command: command.to_string(),
                seed: common.seed,
                config: config_echo,
                result,
            };
            let mut s = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Table => table(&result),
    };
    match &common.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_toml<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
        }
    }
}

fn echo<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).unwrap_or(serde_json::Value::Null)
}

// ---------------------------------------------------------------------------
// period
// ---------------------------------------------------------------------------

#[derive(Args)]
struct PeriodArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Cycle length K
    #[arg(long)]
    cycle: Option<usize>,
    /// Coin labels applied cyclically, e.g. AABB or A'A'B'B'
    #[arg(long)]
    pattern: Option<String>,
    /// Repetitions of the pattern to report on
    #[arg(long)]
    repeat: Option<usize>,
    /// Single coin `s=..,g=..,d=..` searched alone instead of a pattern
    #[arg(long)]
    coin: Option<String>,
    /// Largest period to try
    #[arg(long)]
    t_max: Option<usize>,
    /// Max-entry identity tolerance
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PeriodConfig {
    cycle: Option<usize>,
    pattern: Option<String>,
    repeat: Option<usize>,
    coin: Option<String>,
    t_max: Option<usize>,
    tol: Option<f64>,
}

#[derive(Serialize)]
struct PeriodResult {
    cycle: usize,
    pattern: Option<String>,
    period: Option<usize>,
    deviation: f64,
    searched_up_to: usize,
    eigenvalues: Vec<[f64; 2]>,
}

fn parse_coin(text: &str) -> CliResult<CoinParams> {
    let mut s = None;
    let mut g = 0.0;
    let mut d = 0.0;
    for part in text.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("bad coin field `{part}`")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| CliError::Config(format!("bad coin value `{value}`")))?;
        match key.trim() {
            "s" => s = Some(value),
            "g" => g = value,
            "d" => d = value,
            other => return Err(CliError::Config(format!("unknown coin field `{other}`"))),
        }
    }
    let s = s.ok_or_else(|| CliError::Config("coin needs s=<value>".into()))?;
    Ok(CoinParams::new(s, g, d).map_err(CliError::from)?)
}

/// Split "A'A'B'B'" style patterns into labels, honoring trailing primes.
fn parse_pattern(text: &str) -> CliResult<Vec<String>> {
    let mut labels = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if !c.is_ascii_alphabetic() {
            return Err(CliError::Config(format!("bad pattern character `{c}`")));
        }
        let mut label = c.to_string();
        if chars.peek() == Some(&'\'') {
            chars.next();
            label.push('\'');
        }
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(CliError::Config("empty pattern".into()));
    }
    Ok(labels)
}

fn cmd_period(args: PeriodArgs) -> CliResult<()> {
    let cfg: PeriodConfig = load_toml(args.common.config.as_deref())?;
    let cycle = args
        .cycle
        .or(cfg.cycle)
        .ok_or_else(|| CliError::Config("missing --cycle".into()))?;
    let t_max = args.t_max.or(cfg.t_max).unwrap_or(100);
    let tol = args.tol.or(cfg.tol).unwrap_or(5e-3);
    let coin = args.coin.clone().or(cfg.coin.clone());
    let pattern_text = args.pattern.clone().or(cfg.pattern.clone());
    let repeat = args.repeat.or(cfg.repeat).unwrap_or(5);

    let (report, pattern_echo) = if let Some(coin_text) = &coin {
        let coin = parse_coin(coin_text)?;
        let w = walk_unitary(&coin, cycle).map_err(CliError::from)?;
        (find_period(&w, t_max, tol).map_err(CliError::from)?, None)
    } else {
        let text = pattern_text
            .ok_or_else(|| CliError::Config("need --pattern or --coin".into()))?;
        let labels = parse_pattern(&text)?;
        let mut coins = std::collections::HashMap::new();
        coins.insert("A".to_string(), CoinParams::parrondo_a());
        coins.insert("B".to_string(), CoinParams::parrondo_b());
        coins.insert("A'".to_string(), CoinParams::parrondo_a_prime());
        coins.insert("B'".to_string(), CoinParams::parrondo_b_prime());
        let pattern: Vec<String> = labels
            .iter()
            .cycle()
            .take(labels.len() * repeat)
            .cloned()
            .collect();
        let seq = ParrondoSequence { coins, pattern, k: cycle };
        (
            find_sequence_period(&seq, t_max, tol).map_err(CliError::from)?,
            Some(text),
        )
    };

    let result = PeriodResult {
        cycle,
        pattern: pattern_echo,
        period: report.period,
        deviation: report.deviation_at_period,
        searched_up_to: report.searched_up_to,
        eigenvalues: report.eigenvalues.iter().map(|e| [e.re, e.im]).collect(),
    };
    let config_echo = echo(&PeriodConfig {
        cycle: Some(cycle),
        pattern: result.pattern.clone(),
        repeat: Some(repeat),
        coin,
        t_max: Some(t_max),
        tol: Some(tol),
    });
    emit(&args.common, "period", config_echo, result, |r| {
        format!(
            "cycle\tperiod\tdeviation\n{}\t{}\t{:.6e}\n",
            r.cycle,
            r.period.map_or("none".to_string(), |p| p.to_string()),
            r.deviation
        )
    })
}

// ---------------------------------------------------------------------------
// protocol
// ---------------------------------------------------------------------------

#[derive(Args)]
struct ProtocolArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Message to encrypt; omit to sweep all of 0..K
    #[arg(long)]
    message: Option<usize>,
    /// Walker start vertex; omit to sweep all of 0..K
    #[arg(long)]
    start: Option<usize>,
    #[arg(long, value_enum)]
    transfer: Option<TransferArg>,
    #[arg(long, value_enum)]
    noise_mode: Option<NoiseModeArg>,
    /// One-qubit depolarizing strength
    #[arg(long)]
    p1: Option<f64>,
    /// Two-qubit depolarizing strength (defaults to p1)
    #[arg(long)]
    p2: Option<f64>,
    /// Use the stochastic trajectory unraveling
    #[arg(long)]
    trajectory: bool,
    /// Directory for per-cell transcript files
    #[arg(long)]
    transcripts: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ProtocolFileConfig {
    message: Option<usize>,
    start: Option<usize>,
    transfer: Option<TransferArg>,
    noise_mode: Option<NoiseModeArg>,
    p1: Option<f64>,
    p2: Option<f64>,
    trajectory: Option<bool>,
    shots: Option<u64>,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct ProtocolCell {
    message: usize,
    start: usize,
    k_prime: usize,
    recovered: usize,
    hellinger_fidelity: f64,
    tvd: f64,
    qber: f64,
    depth: usize,
}

#[derive(Serialize)]
struct ProtocolSummary {
    cells: Vec<ProtocolCell>,
    all_recovered: bool,
}

fn resolve_noise(
    mode: Option<NoiseModeArg>,
    p1: Option<f64>,
    p2: Option<f64>,
    trajectory: bool,
    seed: u64,
) -> CliResult<Option<NoiseSpec>> {
    let Some(mode) = mode else {
        if p1.is_some() || p2.is_some() || trajectory {
            return Err(CliError::Config(
                "noise parameters given without --noise-mode".into(),
            ));
        }
        return Ok(None);
    };
    let p1 = p1.ok_or_else(|| CliError::Config("--noise-mode requires --p1".into()))?;
    let spec = match mode {
        NoiseModeArg::PerGate => NoiseSpec::per_gate(p1, p2.unwrap_or(p1)),
        NoiseModeArg::Terminal => {
            if p2.is_some() {
                return Err(CliError::Config("terminal noise takes only --p1".into()));
            }
            NoiseSpec::terminal(p1)
        }
    }
    .map_err(CliError::from)?;
    Ok(Some(if trajectory { spec.with_trajectory(seed) } else { spec }))
}

fn cmd_protocol(args: ProtocolArgs) -> CliResult<()> {
    let file: ProtocolFileConfig = load_toml(args.common.config.as_deref())?;
    let seed = if args.common.seed != 0 { args.common.seed } else { file.seed.unwrap_or(0) };
    let shots = args.common.shots.or(file.shots);
    let transfer: TransferStrategy =
        args.transfer.or(file.transfer).unwrap_or(TransferArg::Swap).into();
    let noise = resolve_noise(
        args.noise_mode.or(file.noise_mode),
        args.p1.or(file.p1),
        args.p2.or(file.p2),
        args.trajectory || file.trajectory.unwrap_or(false),
        seed,
    )?;
    let messages: Vec<usize> = match args.message.or(file.message) {
        Some(m) => vec![m],
        None => (0..4).collect(),
    };
    let starts: Vec<usize> = match args.start.or(file.start) {
        Some(x) => vec![x],
        None => (0..4).collect(),
    };

    if let Some(dir) = &args.transcripts {
        fs::create_dir_all(dir)?;
    }
    let mut cells = Vec::new();
    for &m in &messages {
        for &x in &starts {
            let mut cfg = ProtocolConfig::standard(m, x)
                .map_err(CliError::from)?
                .with_transfer(transfer);
            if let Some(n) = &noise {
                cfg = cfg.with_noise(n.clone());
            }
            if let Some(s) = shots {
                cfg = cfg.with_shots(s, seed);
            }
            let t = run_protocol(&cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
            if let Some(dir) = &args.transcripts {
                let path = dir.join(format!("transcript_m{m}_x{x}.json"));
                let mut text = serde_json::to_string_pretty(&t)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                text.push('\n');
                fs::write(path, text)?;
            }
            cells.push(ProtocolCell {
                message: m,
                start: x,
                k_prime: t.k_prime,
                recovered: t.recovered_k,
                hellinger_fidelity: t.hellinger_fidelity,
                tvd: t.tvd,
                qber: t.qber,
                depth: t.depth.depth,
            });
        }
    }
    let all_recovered = cells.iter().all(|c| c.recovered == c.message);
    let summary = ProtocolSummary { cells, all_recovered };
    let config_echo = echo(&ProtocolFileConfig {
        message: args.message.or(file.message),
        start: args.start.or(file.start),
        transfer: args.transfer.or(file.transfer),
        noise_mode: args.noise_mode.or(file.noise_mode),
        p1: args.p1.or(file.p1),
        p2: args.p2.or(file.p2),
        trajectory: Some(args.trajectory || file.trajectory.unwrap_or(false)),
        shots,
        seed: Some(seed),
    });
    emit(&args.common, "protocol", config_echo, summary, |s| {
        let mut out = String::from("message\tstart\tk_prime\trecovered\tfidelity\ttvd\tqber\n");
        for c in &s.cells {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\n",
                c.message, c.start, c.k_prime, c.recovered, c.hellinger_fidelity, c.tvd, c.qber
            ));
        }
        out
    })
}

// ---------------------------------------------------------------------------
// attack
// ---------------------------------------------------------------------------

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of independent Eve seeds
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    message: usize,
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// Eve basis policy
    #[arg(long, value_enum, default_value_t = BasisArg::Random)]
    basis: BasisArg,
    /// Eve re-encode policy
    #[arg(long, value_enum, default_value_t = ReencodeArg::Haar)]
    reencode: ReencodeArg,
    /// Tamper-detection QBER threshold
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, value_enum)]
    noise_mode: Option<NoiseModeArg>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    /// Append a BB84 comparison with this many rounds
    #[arg(long)]
    compare_bb84: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
enum BasisArg {
    Random,
    Computational,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
enum ReencodeArg {
    Measured,
    Haar,
}

#[derive(Serialize)]
struct AttackResult {
    report: parrondo_qw::attack::AttackReport,
    bb84_no_eve_qber: Option<f64>,
    bb84_eve_qber: Option<f64>,
}

fn cmd_attack(args: AttackArgs) -> CliResult<()> {
    let noise = resolve_noise(args.noise_mode, args.p1, args.p2, false, args.common.seed)?;
    let mut cfg = ProtocolConfig::standard(args.message, args.start).map_err(CliError::from)?;
    if let Some(n) = noise {
        cfg = cfg.with_noise(n);
    }
    let basis = match args.basis {
        BasisArg::Random => EveBasis::RandomPerQubit,
        BasisArg::Computational => EveBasis::AlwaysComputational,
    };
    let reencode = match args.reencode {
        ReencodeArg::Measured => EveReencode::MeasuredState,
        ReencodeArg::Haar => EveReencode::HaarRandom,
    };
    let report = eve_attack_sweep(&cfg, basis, reencode, args.seeds, args.threshold)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let (mut no_eve, mut with_eve) = (None, None);
    if let Some(rounds) = args.compare_bb84 {
        let clean = Bb84Config::new(rounds, false, args.common.seed).map_err(CliError::from)?;
        let tapped = Bb84Config::new(rounds, true, args.common.seed).map_err(CliError::from)?;
        no_eve = Some(bb84_run(&clean).map_err(|e| CliError::Runtime(e.to_string()))?.qber);
        with_eve = Some(bb84_run(&tapped).map_err(|e| CliError::Runtime(e.to_string()))?.qber);
    }
    let result = AttackResult { report, bb84_no_eve_qber: no_eve, bb84_eve_qber: with_eve };
    let config_echo = serde_json::json!({
        "seeds": args.seeds,
        "message": args.message,
        "start": args.start,
        "basis": args.basis,
        "reencode": args.reencode,
        "threshold": args.threshold,
        "p1": args.p1,
        "p2": args.p2,
        "compare_bb84": args.compare_bb84,
    });
    emit(&args.common, "attack", config_echo, result, |r| {
        let mut out = String::from("quantity\tvalue\n");
        out.push_str(&format!("mean_p_correct\t{:.6}\n", r.report.mean_p_correct));
        out.push_str(&format!("mean_qber\t{:.6}\n", r.report.mean_qber));
        out.push_str(&format!("detection_rate\t{:.6}\n", r.report.detection_rate));
        if let (Some(a), Some(b)) = (r.bb84_no_eve_qber, r.bb84_eve_qber) {
            out.push_str(&format!("bb84_no_eve_qber\t{a:.6}\nbb84_eve_qber\t{b:.6}\n"));
        }
        out
    })
}

// ---------------------------------------------------------------------------
// bb84
// ---------------------------------------------------------------------------

#[derive(Args)]
struct Bb84Args {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 10_000)]
    rounds: u64,
    /// Insert an intercept-resend attacker
    #[arg(long)]
    eve: bool,
    /// Include the per-round log in the report
    #[arg(long)]
    log_rounds: bool,
}

fn cmd_bb84(args: Bb84Args) -> CliResult<()> {
    let mut cfg = Bb84Config::new(args.rounds, args.eve, args.common.seed)
        .map_err(CliError::from)?;
    cfg.log_rounds = args.log_rounds;
    let report = bb84_run(&cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
    let config_echo = serde_json::json!({
        "rounds": args.rounds,
        "eve": args.eve,
        "log_rounds": args.log_rounds,
    });
    emit(&args.common, "bb84", config_echo, report, |r| {
        let mut out = format!(
            "sifted_length\terrors\tqber\n{}\t{}\t{:.6}\n",
            r.sifted_length, r.errors, r.qber
        );
        if let Some(rounds) = &r.rounds {
            out.push_str("round\talice_basis\tbob_basis\tbit\tsifted\terror\n");
            for round in rounds {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\n",
                    round.round,
                    round.alice_basis,
                    round.bob_basis,
                    round.bit,
                    round.sifted,
                    round.error
                ));
            }
        }
        out
    })
}

// ---------------------------------------------------------------------------
// route
// ---------------------------------------------------------------------------

#[derive(Args)]
struct RouteArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Bundled graph: line:N, ring:N, complete:N, or heavy-hex:RxC
    #[arg(long)]
    graph: Option<String>,
    /// Edge-list file (one `u v` per line) instead of a bundled graph
    #[arg(long)]
    graph_file: Option<PathBuf>,
    /// Layout file(s) of `logical physical module` triples
    #[arg(long)]
    layout_file: Vec<PathBuf>,
    /// Transfer strategy of the protocol circuit being routed
    #[arg(long, value_enum, default_value_t = TransferArg::Swap)]
    transfer: TransferArg,
    /// Built-in demonstration: the protocol circuit on complete(9) versus a
    /// widely separated heavy-hex placement
    #[arg(long)]
    demo: bool,
}

#[derive(Serialize)]
struct RouteRow {
    graph: String,
    layout: String,
    inserted_swaps: usize,
    depth: usize,
    two_qubit_count: usize,
    modularity_preserved: bool,
}

fn bundled_graph(name: &str) -> CliResult<CouplingGraph> {
    let bad = || {
        CliError::Config(format!(
            "unknown graph `{name}`; bundled graphs: line:N, ring:N, complete:N, heavy-hex:RxC"
        ))
    };
    let (kind, param) = name.split_once(':').ok_or_else(bad)?;
    let graph = match kind {
        "line" => CouplingGraph::line(param.parse().map_err(|_| bad())?),
        "ring" => CouplingGraph::ring(param.parse().map_err(|_| bad())?),
        "complete" => CouplingGraph::complete(param.parse().map_err(|_| bad())?),
        "heavy-hex" => {
            let (r, c) = param.split_once('x').ok_or_else(bad)?;
            CouplingGraph::heavy_hex(
                r.parse().map_err(|_| bad())?,
                c.parse().map_err(|_| bad())?,
            )
        }
        _ => return Err(bad()),
    };
    graph.map_err(CliError::from)
}

fn protocol_circuit(transfer: TransferArg) -> CliResult<Circuit> {
    let cfg = ProtocolConfig::standard(1, 0)
        .map_err(CliError::from)?
        .with_transfer(transfer.into());
    let (c, _, _) = build_circuit(&cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(c)
}

/// Alice on one end of the lattice, Bob on the far end, ancilla in between.
fn separated_heavy_hex_layout(graph: &CouplingGraph, n_logical: usize) -> CliResult<LayoutAssignment> {
    let per_module = n_logical / 3;
    let mut physical = Vec::with_capacity(n_logical);
    let mut tags = Vec::with_capacity(n_logical);
    for i in 0..per_module {
        physical.push(i);
        tags.push("alice".to_string());
    }
    let far = graph.n_physical - per_module;
    for i in 0..per_module {
        physical.push(far + i);
        tags.push("bob".to_string());
    }
    let mid = graph.n_physical / 2;
    for i in 0..n_logical - 2 * per_module {
        physical.push(mid + i);
        tags.push("ancilla".to_string());
    }
    LayoutAssignment::new(physical, tags, "heavy-hex-separated").map_err(CliError::from)
}

fn cmd_route(args: RouteArgs) -> CliResult<()> {
    let circuit = protocol_circuit(args.transfer)?;
    let n_logical = circuit.n_qubits();
    let mut rows = Vec::new();

    if args.demo {
        let complete = CouplingGraph::complete(n_logical.max(9)).map_err(CliError::from)?;
        let adjacent = LayoutAssignment::new(
            (0..n_logical).collect(),
            default_tags(n_logical),
            "complete-adjacent",
        )
        .map_err(CliError::from)?;
        let routed = route(&circuit, &complete, &adjacent).map_err(CliError::from)?;
        rows.push(route_row(&complete, "complete-adjacent", &routed));

        let hex = CouplingGraph::heavy_hex(3, 2).map_err(CliError::from)?;
        let separated = separated_heavy_hex_layout(&hex, n_logical)?;
        let routed = route(&circuit, &hex, &separated).map_err(CliError::from)?;
        rows.push(route_row(&hex, "heavy-hex-separated", &routed));
    } else {
        let graph = match (&args.graph, &args.graph_file) {
            (Some(name), None) => bundled_graph(name)?,
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                CouplingGraph::from_edge_list(&text, &path.display().to_string())
                    .map_err(CliError::from)?
            }
            _ => {
                return Err(CliError::Config(
                    "need exactly one of --graph or --graph-file (or --demo)".into(),
                ))
            }
        };
        if args.layout_file.is_empty() {
            return Err(CliError::Config("need at least one --layout-file".into()));
        }
        let mut layouts = Vec::new();
        for path in &args.layout_file {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            layouts.push(
                LayoutAssignment::from_text(&text, &path.display().to_string())
                    .map_err(CliError::from)?,
            );
        }
        if layouts.len() >= 2 {
            for row in compare_layouts(&circuit, &graph, &layouts).map_err(CliError::from)? {
                rows.push(RouteRow {
                    graph: graph.name.clone(),
                    layout: row.layout,
                    inserted_swaps: row.inserted_swaps,
                    depth: row.depth,
                    two_qubit_count: row.two_qubit_count,
                    modularity_preserved: row.modularity_preserved,
                });
            }
        } else {
            let routed = route(&circuit, &graph, &layouts[0]).map_err(CliError::from)?;
            rows.push(route_row(&graph, &layouts[0].name, &routed));
        }
    }
    rows.sort_by(|a, b| (a.depth, a.inserted_swaps).cmp(&(b.depth, b.inserted_swaps)));

    let config_echo = serde_json::json!({
        "graph": args.graph,
        "graph_file": args.graph_file,
        "layouts": args.layout_file.len(),
        "transfer": args.transfer,
        "demo": args.demo,
    });
    emit(&args.common, "route", config_echo, rows, |rows| {
        let mut out =
            String::from("graph\tlayout\tinserted_swaps\tdepth\ttwo_qubit\tmodular\n");
        for r in rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                r.graph, r.layout, r.inserted_swaps, r.depth, r.two_qubit_count,
                r.modularity_preserved
            ));
        }
        out
    })
}

fn default_tags(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| match i * 3 / n.max(1) {
            0 => "alice".to_string(),
            1 => "bob".to_string(),
            _ => "ancilla".to_string(),
        })
        .collect()
}

fn route_row(graph: &CouplingGraph, layout: &str, routed: &parrondo_qw::router::RoutedCircuit) -> RouteRow {
    RouteRow {
        graph: graph.name.clone(),
        layout: layout.to_string(),
        inserted_swaps: routed.inserted_swaps,
        depth: routed.depth.depth,
        two_qubit_count: routed.depth.two_qubit_count,
        modularity_preserved: routed.modularity_preserved,
    }
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

#[derive(Args)]
struct MetricsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Observed distribution as comma-separated probabilities
    #[arg(long)]
    observed: String,
    /// Reference distribution as comma-separated probabilities
    #[arg(long)]
    reference: String,
}

fn parse_distribution(text: &str) -> CliResult<Distribution> {
    let probs: Vec<f64> = text
        .split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad probability `{p}`")))
        })
        .collect::<CliResult<_>>()?;
    if probs.iter().any(|p| *p < 0.0) {
        return Err(CliError::Config("probabilities must be non-negative".into()));
    }
    Ok(Distribution::from_probabilities(probs))
}

fn cmd_metrics(args: MetricsArgs) -> CliResult<()> {
    let observed = parse_distribution(&args.observed)?;
    let reference = parse_distribution(&args.reference)?;
    let report = MetricReport::compare(&observed, &reference)
        .ok_or_else(|| CliError::Config("empty distribution".into()))?;
    let config_echo = serde_json::json!({
        "observed": args.observed,
        "reference": args.reference,
    });
    emit(&args.common, "metrics", config_echo, report, |r| {
        let mut map = BTreeMap::new();
        map.insert("hellinger", r.hellinger);
        map.insert("fidelity", r.fidelity);
        map.insert("tvd", r.total_variation);
        let mut out = String::from("metric\tvalue\n");
        for (k, v) in map {
            out.push_str(&format!("{k}\t{v:.9}\n"));
        }
        out
    })
}
