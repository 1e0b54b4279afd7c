use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ftlcheck::channels::{
    basis_copier, clone_fidelity, linearity_witness, no_signaling_gap, CloneCandidate, KrausChannel,
};
use ftlcheck::qstate::linalg::matrix_serde;
use ftlcheck::qstate::{canonical_state, CMatrix, CanonicalState, StateVector};
use ftlcheck::relativity::{
    boost_event, classify_interval, order_reversing_boost, simultaneity_boost, Boost, SignalSpeed,
    SpacetimeEvent,
};
use ftlcheck::scenario::{
    diagram_data, render_svg, run_gedanken, InputSpec, ResourceSpec, ScenarioConfig,
};
use ftlcheck::teleport::{
    bell_basis, derive_corrections, outcome_distribution, run_teleportation, ALICE, BOB, INPUT,
};
use ftlcheck::{seeded_rng, Error};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "ftlcheck",
    version,
    about = "Teleportation, cloning and frame checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Teleport one input state and print the transcript.
    Teleport(TeleportArgs),
    /// Run the linearity witness against a cloning candidate.
    CloneCheck(CloneArgs),
    /// Largest change in Bob's marginal over a random suite of Alice operations.
    Nosignal(NosignalArgs),
    /// Interval class and order-reversing boost for two events.
    Frame(FrameArgs),
    /// Full thought experiment: teleport, classify, certify.
    Scenario(ScenarioArgs),
    /// Spacetime diagram data (JSON) or SVG for a scenario.
    Diagram(DiagramArgs),
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TeleportArgs {
    #[arg(long)]
    seed: u64,
    /// Named state (up, down, plus, minus) or `haar`.
    #[arg(long, default_value = "haar")]
    input: String,
    /// singlet, phi_plus or random.
    #[arg(long, default_value = "singlet")]
    resource: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CloneArgs {
    /// JSON file with `unitary` (rows of [re, im]) and `apparatus_qubits`.
    /// Defaults to the computational-basis copier.
    #[arg(long)]
    candidate: Option<PathBuf>,
    #[arg(long, default_value = "up")]
    a: String,
    #[arg(long, default_value = "down")]
    b: String,
    /// Amplitude on `a`, as `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, default_value = "0.7071067811865476")]
    alpha: String,
    /// Amplitude on `b`, as `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, default_value = "0.7071067811865476")]
    beta: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct NosignalArgs {
    #[arg(long)]
    seed: u64,
    /// Number of random Alice-side channels.
    #[arg(long, default_value_t = 100)]
    ops: usize,
    #[arg(long, default_value = "singlet")]
    resource: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FrameArgs {
    #[arg(long, allow_hyphen_values = true)]
    t1: f64,
    #[arg(long, allow_hyphen_values = true)]
    x1: f64,
    #[arg(long, allow_hyphen_values = true)]
    t2: f64,
    #[arg(long, allow_hyphen_values = true)]
    x2: f64,
    /// Also report both events in the frame moving at this velocity.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ScenarioArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Signal speed in units of c, or `inf`.
    #[arg(long, allow_hyphen_values = true)]
    speed: Option<SignalSpeed>,
    #[arg(long, allow_hyphen_values = true)]
    separation: Option<f64>,
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    resource: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    frame_beta: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DiagramArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Emit SVG instead of JSON.
    #[arg(long)]
    svg: bool,
}

enum CliError {
    Core(Error),
    Input(String),
    Io(PathBuf, std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_invariant_violation() => 3,
            CliError::Core(_) | CliError::Input(_) => 2,
            CliError::Io(..) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(msg) => f.write_str(msg),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn emit(output: &Output, text: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => {
            fs::write(path, format!("{text}\n")).map_err(|e| CliError::Io(path.clone(), e))
        }
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(CliError::Io("<stdout>".into(), e))
            }
            _ => Ok(()),
        },
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes")
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn parse_complex(s: &str) -> CliResult<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| {
        p.parse::<f64>()
            .map_err(|_| CliError::Input(format!("bad amplitude `{s}`")))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(CliError::Input(format!("bad amplitude `{s}`"))),
    }
}

fn teleport(args: &TeleportArgs) -> CliResult<String> {
    #[derive(Serialize)]
    struct Out {
        seed: u64,
        outcome_distribution: [f64; 4],
        transcript: ftlcheck::teleport::TeleportTranscript,
    }
    let input: InputSpec = args.input.parse()?;
    let resource: ResourceSpec = args.resource.parse()?;
    let mut rng = seeded_rng(args.seed);
    let state = input.draw(&mut rng)?;
    let resource = derive_corrections(&resource.draw(&mut rng))?;
    let transcript = run_teleportation(&state, &resource, &mut rng)?;
    Ok(to_json(&Out {
        seed: args.seed,
        outcome_distribution: outcome_distribution(&state, &resource)?,
        transcript,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateFile {
    #[serde(with = "matrix_serde")]
    unitary: CMatrix,
    #[serde(default = "one")]
    apparatus_qubits: usize,
}

fn one() -> usize {
    1
}

fn load_candidate(path: &Path) -> CliResult<CloneCandidate> {
    let file: CandidateFile = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let m = file.apparatus_qubits;
    if m == 0 {
        return Err(CliError::Input(
            "apparatus_qubits must be at least 1".into(),
        ));
    }
    let blank_y = StateVector::basis(&["Y"], 0)?;
    let labels: Vec<String> = (0..m).map(|i| format!("M{i}")).collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let blank_m = StateVector::basis(&refs, 0)?;
    Ok(CloneCandidate::new(file.unitary, &blank_y, &blank_m)?)
}

fn clone_check(args: &CloneArgs) -> CliResult<String> {
    #[derive(Serialize)]
    struct Out {
        fidelities: Vec<(CanonicalState, f64)>,
        witness: ftlcheck::channels::LinearityReport,
    }
    let candidate = match &args.candidate {
        Some(path) => load_candidate(path)?,
        None => basis_copier(),
    };
    let a = canonical_state(args.a.parse()?);
    let b = canonical_state(args.b.parse()?);
    let witness = linearity_witness(
        &candidate,
        &a,
        &b,
        parse_complex(&args.alpha)?,
        parse_complex(&args.beta)?,
    )?;
    let mut fidelities = Vec::new();
    for k in CanonicalState::ALL
        .into_iter()
        .filter(|k| k.num_qubits() == 1)
    {
        fidelities.push((k, clone_fidelity(&candidate, &canonical_state(k))?));
    }
    Ok(to_json(&Out {
        fidelities,
        witness,
    }))
}

fn nosignal(args: &NosignalArgs) -> CliResult<String> {
    #[derive(Serialize)]
    struct Out {
        seed: u64,
        resource: StateVector,
        operations: Vec<String>,
        gap: f64,
    }
    let spec: ResourceSpec = args.resource.parse()?;
    let mut rng = seeded_rng(args.seed);
    let pair = spec.draw(&mut rng).relabel(&[ALICE, BOB])?;
    let mut ops = Vec::with_capacity(args.ops + 1);
    for i in 0..args.ops {
        ops.push(KrausChannel::random(&[ALICE], 1 + i % 4, &mut rng)?);
    }
    let phi = InputSpec::HaarRandom.draw(&mut rng)?.relabel(&[INPUT])?;
    ops.push(KrausChannel::measure_and_discard(
        &phi,
        &bell_basis(INPUT, ALICE)?,
        &[ALICE],
    )?);
    let gap = no_signaling_gap(&pair.to_density(), &ops, &[BOB])?;
    Ok(to_json(&Out {
        seed: args.seed,
        operations: ops.iter().map(|o| o.name().to_string()).collect(),
        resource: pair,
        gap,
    }))
}

fn frame(args: &FrameArgs) -> CliResult<String> {
    #[derive(Serialize)]
    struct Boosted {
        boost: Boost,
        e1: SpacetimeEvent,
        e2: SpacetimeEvent,
        reversed: bool,
    }
    #[derive(Serialize)]
    struct Out {
        e1: SpacetimeEvent,
        e2: SpacetimeEvent,
        interval: ftlcheck::relativity::IntervalClass,
        simultaneity_boost: Option<Boost>,
        reversing_boost: Option<ftlcheck::relativity::OrderReversal>,
        boosted: Option<Boosted>,
    }
    let e1 = SpacetimeEvent::new("e1", args.t1, args.x1)?;
    let e2 = SpacetimeEvent::new("e2", args.t2, args.x2)?;
    let boosted = match args.beta {
        Some(beta) => {
            let boost = Boost::new(beta)?;
            let (b1, b2) = (boost_event(&e1, &boost), boost_event(&e2, &boost));
            let reversed = (e2.t() - e1.t()) * (b2.t() - b1.t()) < 0.0;
            Some(Boosted {
                boost,
                e1: b1,
                e2: b2,
                reversed,
            })
        }
        None => None,
    };
    Ok(to_json(&Out {
        interval: classify_interval(&e1, &e2),
        simultaneity_boost: simultaneity_boost(&e1, &e2)?,
        reversing_boost: order_reversing_boost(&e1, &e2)?,
        boosted,
        e1,
        e2,
    }))
}

fn scenario_config(args: &ScenarioArgs) -> CliResult<ScenarioConfig> {
    let base = match &args.config {
        Some(path) => Some(
            serde_json::from_str::<ScenarioConfig>(&read(path)?)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    let seed = args
        .seed
        .or(base.as_ref().map(|c| c.seed))
        .ok_or_else(|| CliError::Input("--seed is required (or set `seed` in --config)".into()))?;
    let speed = args
        .speed
        .or(base.as_ref().map(|c| c.signal_speed))
        .ok_or_else(|| {
            CliError::Input("--speed is required (or set `signal_speed` in --config)".into())
        })?;
    let mut config = base.unwrap_or_else(|| ScenarioConfig::new(speed, 2.0, seed));
    config.seed = seed;
    config.signal_speed = speed;
    if let Some(d) = args.separation {
        config.separation = d;
    }
    if let Some(s) = &args.input {
        config.input_spec = s.parse()?;
    }
    if let Some(s) = &args.resource {
        config.resource_spec = s.parse()?;
    }
    if args.frame_beta.is_some() {
        config.frame_beta = args.frame_beta;
    }
    config.validate()?;
    Ok(config)
}

fn scenario(args: &ScenarioArgs) -> CliResult<String> {
    Ok(run_gedanken(&scenario_config(args)?)?.to_json())
}

fn diagram(args: &DiagramArgs) -> CliResult<String> {
    let report = run_gedanken(&scenario_config(&args.scenario)?)?;
    let data = diagram_data(&report, &report.report_frame.boost);
    Ok(if args.svg {
        render_svg(&data)
    } else {
        to_json(&data)
    })
}

fn run(cli: &Cli) -> CliResult<()> {
    let (text, output) = match &cli.command {
        Command::Teleport(a) => (teleport(a)?, &a.output),
        Command::CloneCheck(a) => (clone_check(a)?, &a.output),
        Command::Nosignal(a) => (nosignal(a)?, &a.output),
        Command::Frame(a) => (frame(a)?, &a.output),
        Command::Scenario(a) => (scenario(a)?, &a.output),
        Command::Diagram(a) => (diagram(a)?, &a.scenario.output),
    };
    emit(output, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
