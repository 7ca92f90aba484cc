//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a verified property failed, 2 bad arguments or
//! configuration, 3 a domain error (e.g. a non-bipartite state handed to
//! the closed form, or a state over the amplitude cap).

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg;
use crate::scattering::{self, round_sig12, CollisionModel, GasOptions, GasTrajectory};
use crate::schmidt::schmidt;
use crate::sq::{sq_bipartite, Method, SqResult};
use crate::search::{sq_search, SearchOptions};
use crate::state::{StateFile, StateVector};
use crate::verify::{self, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

/// Thread count for the search pool; `0` or unset means one per core.
pub const THREADS_ENV: &str = "SQ_TOOLKIT_THREADS";

#[derive(Parser, Debug)]
#[command(name = "sq-toolkit", version, about = "Minimum product-measurement entropy of pure states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; trajectories default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Schmidt decomposition of a bipartite state.
    Schmidt,
    /// S_q of a state, closed form or search.
    Sq,
    /// Randomized property battery.
    Verify,
    /// Two-particle collision entropy trajectory.
    Scatter,
    /// Dilute-gas collision sequence.
    Gas,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotBipartite(_)
            | Error::DimensionMismatch { .. }
            | Error::RankExceedsDim { .. }
            | Error::NotDegenerate { .. }
            | Error::StateTooLarge { .. } => EXIT_DOMAIN,
            Error::InvalidPartition(_)
            | Error::InvalidScheme(_)
            | Error::InvalidObservable(_)
            | Error::InvalidState(_)
            | Error::InvalidParameter(_) => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::config(e.to_string())
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return EXIT_OK;
        }
        Err(e) => {
            let rendered = e.to_string();
            eprintln!("{}", rendered.lines().next().unwrap_or("invalid arguments"));
            return EXIT_CONFIG;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(f) => return report(Err(f)),
    };
    report(pool.install(|| dispatch(&cli)))
}

fn report(outcome: Outcome) -> i32 {
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn thread_pool() -> std::result::Result<rayon::ThreadPool, Failure> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::config(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::config(e.to_string()))
}

fn dispatch(cli: &Cli) -> Outcome {
    let c = &cli.common;
    match cli.command {
        Command::Schmidt => cmd_schmidt(c),
        Command::Sq => cmd_sq(c),
        Command::Verify => cmd_verify(c),
        Command::Scatter => cmd_scatter(c),
        Command::Gas => cmd_gas(c),
    }
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> std::result::Result<T, Failure> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn require_json(c: &Common) -> std::result::Result<(), Failure> {
    match c.format {
        Some(Format::Csv) => Err(Failure::config("this command only supports --format json")),
        _ => Ok(()),
    }
}

fn emit(c: &Common, body: &str) -> std::result::Result<(), Failure> {
    match &c.out {
        Some(path) => fs::write(path, body)
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

/// Where a command's input state comes from. Exactly one of `state`,
/// `state_file` or `random_dims` must be given; `product` asks for a
/// product of random local states.
struct StateSource<'a> {
    state: &'a Option<StateFile>,
    state_file: &'a Option<PathBuf>,
    random_dims: &'a Option<Vec<usize>>,
    product: bool,
}

macro_rules! state_source {
    ($cfg:expr) => {
        StateSource {
            state: &$cfg.state,
            state_file: &$cfg.state_file,
            random_dims: &$cfg.random_dims,
            product: $cfg.product,
        }
    };
}

impl StateSource<'_> {
    fn load(&self, seed: u64) -> std::result::Result<StateVector, Failure> {
        let given = [self.state.is_some(), self.state_file.is_some(), self.random_dims.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(Failure::config("exactly one of state, state_file or random_dims is required"));
        }
        if let Some(file) = self.state {
            return StateVector::try_from(file.clone()).map_err(|e| Failure::config(e.to_string()));
        }
        if let Some(path) = self.state_file {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
            let file: StateFile =
                serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            return StateVector::try_from(file).map_err(|e| Failure::config(e.to_string()));
        }
        let dims = self.random_dims.as_deref().unwrap_or_default();
        let mut rng = linalg::seeded_rng(seed);
        let state = if self.product {
            StateVector::random_product(dims, &mut rng)
        } else {
            StateVector::random(dims, &mut rng)
        };
        Ok(state?)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SchmidtConfig {
    state: Option<StateFile>,
    state_file: Option<PathBuf>,
    random_dims: Option<Vec<usize>>,
    product: bool,
    seed: u64,
}

#[derive(Serialize)]
struct SchmidtReport {
    factor_dims: Vec<usize>,
    rank: usize,
    weights: Vec<f64>,
    entropy: f64,
    reconstruction_error: f64,
}

fn cmd_schmidt(c: &Common) -> Outcome {
    require_json(c)?;
    let cfg: SchmidtConfig = load_config(c.config.as_deref())?;
    let state = state_source!(cfg).load(c.seed.unwrap_or(cfg.seed))?;
    let form = schmidt(&state)?;
    let report = SchmidtReport {
        factor_dims: state.factor_dims().to_vec(),
        rank: form.rank(),
        weights: form.weights.clone(),
        entropy: round_sig12(form.entropy()),
        reconstruction_error: form.reconstruction_error(&state),
    };
    emit(c, &to_json(&report))?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SqConfig {
    state: Option<StateFile>,
    state_file: Option<PathBuf>,
    random_dims: Option<Vec<usize>>,
    product: bool,
    method: Method,
    restarts: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
}

impl Default for SqConfig {
    fn default() -> Self {
        let opts = SearchOptions::default();
        Self {
            state: None,
            state_file: None,
            random_dims: None,
            product: false,
            method: Method::ClosedForm,
            restarts: opts.restarts,
            max_iters: opts.max_iters,
            tol: opts.tol,
            seed: 0,
        }
    }
}

fn check_search_params(restarts: usize, max_iters: usize, tol: f64) -> std::result::Result<(), Failure> {
    if restarts == 0 || max_iters == 0 {
        return Err(Failure::config("restarts and max_iters must be at least 1"));
    }
    if !tol.is_finite() || tol < 0.0 {
        return Err(Failure::config(format!("tol must be finite and non-negative, got {tol}")));
    }
    Ok(())
}

fn rounded(mut r: SqResult) -> SqResult {
    r.value = round_sig12(r.value);
    r
}

fn cmd_sq(c: &Common) -> Outcome {
    require_json(c)?;
    let cfg: SqConfig = load_config(c.config.as_deref())?;
    check_search_params(cfg.restarts, cfg.max_iters, cfg.tol)?;
    let seed = c.seed.unwrap_or(cfg.seed);
    let state = state_source!(cfg).load(seed)?;
    let result = match cfg.method {
        Method::ClosedForm => sq_bipartite(&state)?,
        Method::Search => {
            let r = sq_search(&state, &SearchOptions::new(cfg.restarts, cfg.max_iters, cfg.tol, seed));
            if state.n_factors() == 2 {
                let exact = sq_bipartite(&state)?.value;
                eprintln!("gap to closed form: {:.3e}", r.value - exact);
            }
            r
        }
    };
    emit(c, &to_json(&rounded(result)))?;
    Ok(EXIT_OK)
}

fn cmd_verify(c: &Common) -> Outcome {
    require_json(c)?;
    let mut cfg: VerifyConfig = load_config(c.config.as_deref())?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    let report = verify::run(&cfg)?;
    emit(c, &to_json(&report))?;
    for check in &report.checks {
        eprintln!(
            "{} {} (worst margin {:.3e}, {} samples)",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.worst_margin,
            check.samples
        );
    }
    Ok(if report.all_pass { EXIT_OK } else { EXIT_VIOLATION })
}

/// Model parameters shared by `scatter` and `gas`. Free energies default to
/// `0, 1, …, d−1` and the interaction seed to the run seed.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ModelConfig {
    free_energies_1: Option<Vec<f64>>,
    free_energies_2: Option<Vec<f64>>,
    coupling: f64,
    duration: f64,
    interaction_seed: Option<u64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { free_energies_1: None, free_energies_2: None, coupling: 0.5, duration: 1.0, interaction_seed: None }
    }
}

impl ModelConfig {
    fn build(&self, d: usize, seed: u64) -> std::result::Result<CollisionModel, Failure> {
        let mut m = CollisionModel::reference(d, self.interaction_seed.unwrap_or(seed))
            .with_coupling(self.coupling)
            .with_duration(self.duration);
        if let Some(e) = &self.free_energies_1 {
            m.free_energies_1 = e.clone();
        }
        if let Some(e) = &self.free_energies_2 {
            m.free_energies_2 = e.clone();
        }
        m.validate().map_err(|e| Failure::config(e.to_string()))?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ScatterConfig {
    d: usize,
    samples: usize,
    seed: u64,
    model: ModelConfig,
    /// Incoming single-particle states; seeded random if omitted.
    in_states: Option<[StateFile; 2]>,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        Self { d: 4, samples: 11, seed: 0, model: ModelConfig::default(), in_states: None }
    }
}

#[derive(Serialize)]
struct Summary {
    rows: usize,
    initial: f64,
    #[serde(rename = "final")]
    last: f64,
    max: f64,
}

fn write_trajectory(c: &Common, traj: &GasTrajectory) -> Outcome {
    let body = match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            traj.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("csv output is utf-8")
        }
        Format::Json => {
            let mut t = traj.clone();
            t.times.iter_mut().chain(&mut t.sq_estimates).chain(&mut t.pair_diagnostics).for_each(|x| {
                *x = round_sig12(*x);
            });
            to_json(&t)
        }
    };
    emit(c, &body)?;
    let summary = Summary {
        rows: traj.len(),
        initial: round_sig12(traj.initial()),
        last: round_sig12(traj.last()),
        max: round_sig12(traj.max()),
    };
    let line = serde_json::to_string(&summary).expect("summary serializes");
    if c.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(EXIT_OK)
}

fn cmd_scatter(c: &Common) -> Outcome {
    let cfg: ScatterConfig = load_config(c.config.as_deref())?;
    let seed = c.seed.unwrap_or(cfg.seed);
    if cfg.d == 0 {
        return Err(Failure::config("d must be positive"));
    }
    if cfg.samples < 2 {
        return Err(Failure::config("samples must be at least 2"));
    }
    let model = cfg.model.build(cfg.d, seed)?;
    let (in1, in2) = match &cfg.in_states {
        Some([a, b]) => (
            StateVector::try_from(a.clone()).map_err(|e| Failure::config(e.to_string()))?,
            StateVector::try_from(b.clone()).map_err(|e| Failure::config(e.to_string()))?,
        ),
        None => {
            let mut rng = linalg::seeded_rng(seed);
            (StateVector::random(&[cfg.d], &mut rng)?, StateVector::random(&[cfg.d], &mut rng)?)
        }
    };
    let traj = scattering::entropy_trajectory(&model, &in1, &in2, cfg.samples)?;
    write_trajectory(c, &traj)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GasConfig {
    n: usize,
    d: usize,
    collisions: usize,
    seed: u64,
    model: ModelConfig,
    search: GasOptions,
}

impl Default for GasConfig {
    fn default() -> Self {
        Self { n: 3, d: 2, collisions: 10, seed: 0, model: ModelConfig::default(), search: GasOptions::default() }
    }
}

fn cmd_gas(c: &Common) -> Outcome {
    let cfg: GasConfig = load_config(c.config.as_deref())?;
    let seed = c.seed.unwrap_or(cfg.seed);
    check_search_params(cfg.search.restarts, cfg.search.max_iters, cfg.search.tol)?;
    if cfg.n < 3 {
        return Err(Failure::config(format!("a gas needs n >= 3 particles, got {}", cfg.n)));
    }
    if cfg.d == 0 {
        return Err(Failure::config("d must be positive"));
    }
    let model = cfg.model.build(cfg.d, seed)?;
    let traj = scattering::gas_run(cfg.n, cfg.d, cfg.collisions, &model, seed, &cfg.search)?;
    write_trajectory(c, &traj)
}
