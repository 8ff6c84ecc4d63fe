//! `hetstream` command-line interface.
//!
//! Exit codes: 0 success, 2 input error, 3 infeasible system or unmet
//! precondition, 4 failed assertion.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use hetstream::model::families::Family;
use hetstream::model::{generate_adversarial, Preset, ProfileFile};
use hetstream::report::{self, OracleCase};
use hetstream::single_chunk::{delay_curve, evaluate_bounds};
use hetstream::stream::{
    feasibility_check, find_group_period, plan_intra_then_inter, responsibility_delay_bound,
    stream_delay_floor, verify_schedule, Feasibility, PlanDiagnostics, Schedule, StreamFloor,
    Violation,
};
use hetstream::{BandwidthProfile, DiffusionModel, Error, StreamConfig};

#[derive(Parser)]
#[command(
    name = "hetstream",
    version,
    about = "Single-chunk and stream delays of heterogeneous peer-to-peer live streaming"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a bandwidth profile as JSON.
    Gen(GenArgs),
    /// Single-chunk delay curves as CSV.
    Delay(DelayArgs),
    /// Every single-chunk bound as CSV.
    Bounds(BoundsArgs),
    /// Recompute the reference delay table.
    Reproduce {
        /// Emit JSON instead of a text table.
        #[arg(long)]
        json: bool,
    },
    /// Feasibility, delay bounds and the group plan of a stream, as JSON.
    Stream(StreamArgs),
    /// Check a JSON-lines schedule against a profile.
    Replay(ReplayArgs),
    /// Oracle equivalence and bound checks on seeded instances.
    Verify(VerifyArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "generator")]
struct Generator {
    /// Every peer uploads this many chunks per second.
    #[arg(long, value_name = "U")]
    homogeneous: Option<f64>,
    /// Class file, or one of H0, H1, H2.
    #[arg(long, value_name = "FILE|PRESET")]
    classes: Option<String>,
    /// System that forces slow peers to relay.
    #[arg(long)]
    adversarial: bool,
    /// Random family: homogeneous, uniform, exponential, power-law,
    /// two-class, free-riders, classes.
    #[arg(long, value_name = "NAME")]
    family: Option<String>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    generator: Generator,
    /// Number of peers.
    #[arg(long = "N")]
    peers: Option<usize>,
    #[arg(long, default_value_t = 1)]
    n0: usize,
    /// Overprovisioning of the adversarial system.
    #[arg(long = "V", default_value_t = 0.0)]
    excess: f64,
    /// Stream rate of the adversarial system.
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Profile JSON file, or one of H0, H1, H2.
    #[arg(long)]
    profile: String,
    /// Peer count for presets and class files without one.
    #[arg(long = "N")]
    peers: Option<usize>,
}

#[derive(Args)]
struct DelayArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    /// m (many-to-one), 1 (one-to-one) or c (one-to-c); repeatable.
    #[arg(long = "model", default_value = "1")]
    models: Vec<String>,
    #[arg(long, default_value_t = 4)]
    c: usize,
    #[arg(long, default_value_t = 1)]
    n0: usize,
    /// Largest copy count (default N).
    #[arg(long)]
    nmax: Option<usize>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    #[arg(long, default_value_t = 1)]
    n0: usize,
    #[arg(long, default_value_t = 4)]
    c: usize,
    #[arg(long)]
    nmax: Option<usize>,
}

#[derive(Args)]
struct StreamArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    /// Chunk rate in chunks per second.
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 1)]
    n0: usize,
    #[arg(long, default_value = "m")]
    model: String,
    #[arg(long, default_value_t = 4)]
    c: usize,
    /// Build and replay the group-rotation schedule.
    #[arg(long)]
    simulate: bool,
    /// Chunks to simulate (default 3E).
    #[arg(long)]
    horizon: Option<usize>,
    /// Write the simulated schedule as JSON lines.
    #[arg(long)]
    schedule_out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    /// JSON-lines schedule.
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 1)]
    n0: usize,
    #[arg(long, default_value = "m")]
    model: String,
    #[arg(long, default_value_t = 4)]
    c: usize,
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON array of oracle instances replacing the built-in battery.
    #[arg(long)]
    instances: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Random profiles for the bound checks.
    #[arg(long, default_value_t = report::DEFAULT_PROFILES)]
    profiles: usize,
}

/// Failure of a command, mapped to an exit code.
enum Failure {
    Lib(Error),
    Input(String),
    Precondition(String),
    Assertion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl Failure {
    fn exit(self) -> ExitCode {
        let (code, msg) = match self {
            Failure::Lib(e @ (Error::Infeasible(_) | Error::Domain(_))) => (3, e.to_string()),
            Failure::Lib(e) => (2, e.to_string()),
            Failure::Input(m) => (2, m),
            Failure::Precondition(m) => (3, m),
            Failure::Assertion(m) => (4, m),
        };
        eprintln!("error: {msg}");
        ExitCode::from(code)
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Delay(a) => cmd_delay(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Reproduce { json } => cmd_reproduce(json),
        Command::Stream(a) => cmd_stream(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}

fn input<T>(r: hetstream::Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| Failure::Input(e.to_string()))
}

fn load_class_file(path: &Path, peers: Option<usize>) -> hetstream::Result<BandwidthProfile> {
    match ProfileFile::read(path)? {
        ProfileFile::Classes { classes, n } => ProfileFile::Classes {
            classes,
            n: peers.or(n),
        }
        .to_profile(),
        explicit => explicit.to_profile(),
    }
}

fn load_profile(args: &ProfileArgs) -> std::result::Result<BandwidthProfile, Failure> {
    if let Some(preset) = Preset::parse(&args.profile) {
        return input(preset.profile(args.peers.unwrap_or(report::TABLE_PEERS)));
    }
    input(load_class_file(Path::new(&args.profile), args.peers))
}

fn parse_model(name: &str, c: usize) -> std::result::Result<DiffusionModel, Failure> {
    match name {
        "m" | "inf" | "many-to-one" => Ok(DiffusionModel::ManyToOne),
        "1" | "one-to-one" => Ok(DiffusionModel::OneToOne),
        "c" | "one-to-c" => input(DiffusionModel::one_to_some(c)),
        other => Err(Failure::Input(format!(
            "unknown model {other:?} (expected m, 1 or c)"
        ))),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> std::result::Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Lib(e.into()))
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let g = a.generator;
    let need_peers = || {
        a.peers
            .ok_or_else(|| Failure::Input("--N is required for this generator".into()))
    };
    let profile = if let Some(u) = g.homogeneous {
        input(BandwidthProfile::homogeneous(u, need_peers()?))?
    } else if let Some(c) = g.classes {
        match Preset::parse(&c) {
            Some(p) => input(p.profile(need_peers()?))?,
            None => input(load_class_file(Path::new(&c), a.peers))?,
        }
    } else if g.adversarial {
        generate_adversarial(need_peers()?, a.n0, a.excess, a.s)?
    } else {
        let name = g.family.unwrap_or_default();
        let family = Family::parse(&name)
            .ok_or_else(|| Failure::Input(format!("unknown family {name:?}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        input(family.sample(&mut rng, need_peers()?))?
    };
    let json = serde_json::to_string(&ProfileFile::explicit(&profile))
        .map_err(|e| Failure::Lib(e.into()))?;
    write_output(a.out.as_deref(), &(json + "\n"))
}

fn cmd_delay(a: DelayArgs) -> CmdResult {
    let profile = load_profile(&a.profile)?;
    let n_max = a.nmax.unwrap_or(profile.len());
    let models = a
        .models
        .iter()
        .map(|m| parse_model(m, a.c))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut out = String::new();
    if let [model] = models[..] {
        out = delay_curve(&profile, model, a.n0, n_max)?.to_csv();
    } else {
        out.push_str("model,n,delay_seconds\n");
        for model in models {
            for (n, d) in delay_curve(&profile, model, a.n0, n_max)?.points() {
                out.push_str(&format!("{model},{n},{d}\n"));
            }
        }
    }
    write_output(None, &out)
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn cell(v: Option<impl ToString>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cmd_bounds(a: BoundsArgs) -> CmdResult {
    let profile = load_profile(&a.profile)?;
    let n_max = a.nmax.unwrap_or(profile.len());
    let report = evaluate_bounds(&profile, a.n0, a.c, n_max)?;
    let mut out = String::from(
        "n,d_m,d_1,d_c,d_m_hom_max,d_m_hom_mean,d_1_hom_mean,d_c_hom_mean,\
         gain_dm_rhs,loose_one_rhs,conj_one_rhs,loose_c_rhs,conj_c_rhs,gain_d1_rhs,\
         gain_dc_mid,gain_dc_rhs,containment,sandwich,gain_dm,loose_one,loose_c,\
         conj_one,conj_c,gain_d1,gain_dc\n",
    );
    for r in &report.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.d_m,
            r.d_1,
            r.d_c,
            r.d_m_hom_max,
            r.d_m_hom_mean,
            r.d_1_hom_mean,
            r.d_c_hom_mean,
            cell(r.gain_dm_rhs),
            r.loose_one_rhs,
            r.conj_one_rhs,
            r.loose_c_rhs,
            r.conj_c_rhs,
            r.gain_d1_rhs,
            cell(r.gain_dc_mid),
            r.gain_dc_rhs,
            flag(r.containment),
            flag(r.sandwich),
            cell(r.gain_dm.map(flag)),
            flag(r.loose_one),
            flag(r.loose_c),
            flag(r.conj_one),
            flag(r.conj_c),
            flag(r.gain_d1),
            cell(r.gain_dc.map(flag)),
        ));
    }
    write_output(None, &out)?;
    let conj = report.conjecture_violations();
    if !conj.is_empty() {
        eprintln!("finding: conjectured bounds fail at {} points", conj.len());
    }
    let proven = report.proven_violations();
    if let Some((n, name)) = proven.first() {
        return Err(Failure::Assertion(format!(
            "proven bound {name} fails at n = {n} ({} failures)",
            proven.len()
        )));
    }
    Ok(())
}

fn cmd_reproduce(json: bool) -> CmdResult {
    let rep = report::reproduce()?;
    let text = if json { to_json(&rep)? } else { rep.to_text() };
    write_output(None, &text)
}

#[derive(Serialize)]
struct PlanSummary {
    period: usize,
    delay_bound: f64,
    model: DiffusionModel,
    diagnostics: PlanDiagnostics,
}

#[derive(Serialize)]
struct SimulationSummary {
    horizon: usize,
    valid: bool,
    complete: bool,
    max_delay: f64,
    within_bound: bool,
    transfers: usize,
    redundant: usize,
    chunk_delays: Vec<Option<f64>>,
    violation_count: usize,
    violations: Vec<Violation>,
}

#[derive(Serialize)]
struct StreamReport {
    peers: usize,
    rate: f64,
    n0: usize,
    model: DiffusionModel,
    feasibility: Feasibility,
    responsibility_bound: Option<f64>,
    floor: Option<StreamFloor>,
    plan: Option<PlanSummary>,
    simulation: Option<SimulationSummary>,
}

fn cmd_stream(a: StreamArgs) -> CmdResult {
    let profile = load_profile(&a.profile)?;
    let stream = StreamConfig::new(a.s, a.n0)?;
    let model = parse_model(&a.model, a.c)?.normalized();
    let feasibility = feasibility_check(&profile, &stream);
    if a.simulate && !feasibility.feasible {
        return Err(Failure::Precondition(format!(
            "system is infeasible (n0 + U_N/s - N = {:.6}); no lossless schedule to simulate",
            feasibility.slack
        )));
    }
    let plan = find_group_period(&profile, &stream, model)?;
    let mut simulation = None;
    if a.simulate {
        let plan = plan.as_ref().ok_or_else(|| {
            Failure::Precondition(format!(
                "no group period satisfies both conditions for {model} at s = {}",
                a.s
            ))
        })?;
        let horizon = a.horizon.unwrap_or(3 * plan.period);
        let schedule = plan_intra_then_inter(&profile, &stream, model, plan, horizon)?;
        if let Some(path) = &a.schedule_out {
            schedule.write_json_lines(BufWriter::new(File::create(path)?))?;
        }
        let r = verify_schedule(&profile, &stream, model, &schedule);
        simulation = Some(SimulationSummary {
            horizon,
            valid: r.valid,
            complete: r.complete,
            max_delay: r.max_delay,
            within_bound: r.max_delay <= plan.delay_bound + hetstream::TOLERANCE,
            transfers: schedule.transfers().count(),
            redundant: r.redundant,
            chunk_delays: r.chunk_delays,
            violation_count: r.violations.len(),
            violations: r.violations.into_iter().take(20).collect(),
        });
    }
    let rep = StreamReport {
        peers: profile.len(),
        rate: a.s,
        n0: a.n0,
        model,
        feasibility,
        responsibility_bound: responsibility_delay_bound(&profile, &stream).ok(),
        floor: stream_delay_floor(&profile, &stream).ok(),
        plan: plan.map(|p| PlanSummary {
            period: p.period,
            delay_bound: p.delay_bound,
            model: p.model,
            diagnostics: p.diagnostics,
        }),
        simulation,
    };
    write_output(None, &to_json(&rep)?)
}

fn cmd_replay(a: ReplayArgs) -> CmdResult {
    let profile = load_profile(&a.profile)?;
    let stream = StreamConfig::new(a.s, a.n0)?;
    let model = parse_model(&a.model, a.c)?;
    let file = File::open(&a.schedule).map_err(|e| {
        Failure::Input(format!("cannot open {}: {e}", a.schedule.display()))
    })?;
    let schedule = input(Schedule::read_json_lines(BufReader::new(file), a.horizon))?;
    let result = verify_schedule(&profile, &stream, model, &schedule);
    write_output(None, &to_json(&result)?)
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    let cases = match &a.instances {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::Input(format!("cannot read {}: {e}", path.display()))
            })?;
            Some(input(OracleCase::parse_list(&text))?)
        }
        None => None,
    };
    let rep = report::verify(a.seed, cases, a.profiles)?;
    write_output(None, &rep.to_text())?;
    if rep.passed() {
        Ok(())
    } else {
        Err(Failure::Assertion("verification failed".into()))
    }
}
