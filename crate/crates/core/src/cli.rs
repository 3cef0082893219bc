//! Command-line experiment runner.
//!
//! Every subcommand takes its parameters from flags or from a flat JSON object
//! passed with `--config` whose keys are the flag names in snake case. Flags
//! win over the file. Exit codes: 0 success, 1 check or estimation failure,
//! 2 usage or parse error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::chain::{
    extract_identity_tours, run_split_chain, Ar1Kernel, ChainSpec, SplitChainTrace, SplitKernel, TwoStateKernel,
};
use crate::diagnostics::{self, DiagnosticsReport};
use crate::error::Error;
use crate::estimators::{
    batch_means, check_batch_schedule, regen_mean, regen_mu_hat, regen_sigma_f_hat_with, sip_rate_exponent,
    BatchSchedule, Centering, CovEstimate,
};
use crate::io;
use crate::probit::{pilot_tune, run_regen_experiment, synthetic_design, ProbitModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Seed of the built-in probit design (`n = 50`, `p = 2`), also shipped as
/// `data/probit_n50_p2.csv`.
pub const BUNDLED_DESIGN_SEED: u64 = 502;
pub const BUNDLED_DESIGN_N: usize = 50;
pub const BUNDLED_DESIGN_P: usize = 2;

#[derive(Debug, Parser)]
#[command(
    name = "wsregen",
    version,
    about = "Regenerative and batch-means MCMC output analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a fixture split chain and write trace.csv, tours.csv and manifest.json.
    Simulate(SimulateArgs),
    /// Estimate Sigma_f from a tours or trace file and report SIP rates.
    Estimate(EstimateArgs),
    /// Pilot-tune the probit minorization and mark regenerations.
    ProbitRegen(ProbitArgs),
    /// Run the diagnostics suite on a fixture or a tours file.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    TwoState,
    Ar1,
    /// Two-state chain with `h = 0`: never regenerates.
    TwoStateUnsplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CenteringArg {
    Ratio,
    TourMean,
}

impl From<CenteringArg> for Centering {
    fn from(c: CenteringArg) -> Self {
        match c {
            CenteringArg::Ratio => Centering::Ratio,
            CenteringArg::TourMean => Centering::TourMean,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixtureArgs {
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// Half width `c` of the AR(1) small set `[-c, c]`.
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Minorization lag `l` (two-state only).
    #[arg(long)]
    pub lag: Option<usize>,
}

impl FixtureArgs {
    fn merge(self, file: Self) -> Self {
        Self {
            fixture: self.fixture.or(file.fixture),
            a: self.a.or(file.a),
            b: self.b.or(file.b),
            rho: self.rho.or(file.rho),
            noise_sd: self.noise_sd.or(file.noise_sd),
            half_width: self.half_width.or(file.half_width),
            lag: self.lag.or(file.lag),
        }
    }

    fn resolve(&self) -> Result<ResolvedFixture, Failure> {
        let fixture = self.fixture.unwrap_or(Fixture::TwoState);
        let lag = self.lag.unwrap_or(1);
        let (a, b) = (self.a.unwrap_or(0.2), self.b.unwrap_or(0.3));
        match fixture {
            Fixture::TwoState => Ok(ResolvedFixture {
                fixture,
                kernel: FixtureKernel::TwoState(TwoStateKernel::new(a, b, lag)?),
            }),
            Fixture::TwoStateUnsplit => {
                if lag != 1 {
                    return Err(Failure::Usage("the unsplit fixture has lag 1".into()));
                }
                Ok(ResolvedFixture {
                    fixture,
                    kernel: FixtureKernel::TwoState(TwoStateKernel::without_minorization(a, b)?),
                })
            }
            Fixture::Ar1 => {
                if lag != 1 {
                    return Err(Failure::Usage("the AR(1) fixture has lag 1".into()));
                }
                let k = Ar1Kernel::new(
                    self.rho.unwrap_or(0.5),
                    self.noise_sd.unwrap_or(1.0),
                    self.half_width.unwrap_or(1.0),
                )?;
                Ok(ResolvedFixture {
                    fixture,
                    kernel: FixtureKernel::Ar1(k),
                })
            }
        }
    }
}

enum FixtureKernel {
    TwoState(TwoStateKernel),
    Ar1(Ar1Kernel),
}

struct ResolvedFixture {
    fixture: Fixture,
    kernel: FixtureKernel,
}

impl ResolvedFixture {
    fn spec(&self) -> ChainSpec {
        match &self.kernel {
            FixtureKernel::TwoState(k) => k.spec(),
            FixtureKernel::Ar1(k) => k.spec(),
        }
    }

    fn run(&self, n: usize, seed: u64) -> crate::Result<SplitChainTrace> {
        match &self.kernel {
            FixtureKernel::TwoState(k) => run_split_chain(k, n, seed),
            FixtureKernel::Ar1(k) => run_split_chain(k, n, seed),
        }
    }

    /// Oracle mean tour length, `None` when the chain never regenerates.
    fn mean_tour_length(&self) -> Option<f64> {
        let (lag, mean_h) = match &self.kernel {
            FixtureKernel::TwoState(k) => (k.lag(), k.mean_h()),
            FixtureKernel::Ar1(k) => (1, k.mean_h()),
        };
        (mean_h > 0.0).then(|| lag as f64 / mean_h)
    }

    fn describe(&self) -> Value {
        let mut v = serde_json::to_value(self.spec()).expect("spec serializes");
        v["fixture"] = json!(self.fixture);
        match &self.kernel {
            FixtureKernel::TwoState(k) => v["lag"] = json!(k.lag()),
            FixtureKernel::Ar1(k) => {
                v["lag"] = json!(1);
                v["half_width"] = json!(k.half_width());
            }
        }
        v
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub fixture: FixtureArgs,
    /// Chain length.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Tours CSV (`k,tau,z_1..`).
    #[arg(long)]
    pub tours: Option<PathBuf>,
    /// Trace CSV (`t,delta,x_1..`) for batch means.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Batch size exponent, `b_n = floor(n^nu)`.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Moment exponent of the tour sums (`2 + delta` moments).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Moment exponent of the regeneration time.
    #[arg(long)]
    pub p: Option<f64>,
    /// Report the rate for a geometrically ergodic chain.
    #[arg(long)]
    pub geometric: bool,
    /// Project the estimates onto the PSD cone.
    #[arg(long)]
    pub psd: bool,
    #[arg(long, value_enum)]
    pub centering: Option<CenteringArg>,
    /// Output JSON file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbitArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Design CSV (`x_1..x_p,y`); the bundled synthetic design when absent.
    #[arg(long)]
    pub design: Option<PathBuf>,
    #[arg(long)]
    pub p_scan: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub pilot_iters: Option<usize>,
    #[arg(long)]
    pub quantile: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub fixture: FixtureArgs,
    /// Check a tours file instead of simulating a fixture.
    #[arg(long)]
    pub tours: Option<PathBuf>,
    /// Known stationary mean for the tours file (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub mean: Option<Vec<f64>>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replications of the CLT covariance check.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Chain length per CLT replication.
    #[arg(long)]
    pub clt_n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Input(_) | Error::Parse { .. } | Error::Json(_) | Error::UnsupportedOracle(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Check(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Check(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::ProbitRegen(a) => cmd_probit_regen(a),
        Command::Diagnose(a) => cmd_diagnose(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn load_config<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let file = File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))
}

fn open_input(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn require_seed(seed: Option<u64>) -> Result<u64, Failure> {
    seed.ok_or_else(|| Failure::Usage("--seed is required".into()))
}

fn create_out_dir(out: Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = out.unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json(path: &Path, value: &Value) -> Result<(), Failure> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn emit_json(out: Option<&Path>, value: &Value) -> Result<(), Failure> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value).map_err(Error::from)?);
            Ok(())
        }
    }
}

fn with_file<F>(path: &Path, write: F) -> Result<(), Failure>
where
    F: FnOnce(BufWriter<File>) -> crate::Result<()>,
{
    write(BufWriter::new(File::create(path)?))?;
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32, Failure> {
    let file: SimulateArgs = load_config(args.config.as_deref())?;
    let fixture = args.fixture.merge(file.fixture).resolve()?;
    let n = args.n.or(file.n).unwrap_or(100_000);
    let seed = require_seed(args.seed.or(file.seed))?;
    let dir = create_out_dir(args.out.or(file.out))?;

    let trace = fixture.run(n, seed)?;
    let tours = extract_identity_tours(&trace)?;
    with_file(&dir.join("trace.csv"), |w| io::write_trace_csv(&trace, w))?;
    with_file(&dir.join("tours.csv"), |w| io::write_tours_csv(&tours, w))?;

    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = json!({
        "command": "simulate",
        "parameters": {
            "chain": fixture.describe(),
            "n": n,
            "seed": seed,
        },
        "version": env!("CARGO_PKG_VERSION"),
        "outputs": ["trace.csv", "tours.csv"],
        "summary": {
            "regenerations": tours.len(),
            "residual_len": tours.residual_len,
            "mean_tour_length_oracle": fixture.mean_tour_length(),
        },
        "created_unix": created,
    });
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(EXIT_OK)
}

fn estimate_json(est: CovEstimate, psd: bool) -> Result<Value, Failure> {
    let est = if psd { est.into_psd()? } else { est };
    Ok(est.to_json_value())
}

fn cmd_estimate(args: EstimateArgs) -> Result<i32, Failure> {
    let file: EstimateArgs = load_config(args.config.as_deref())?;
    let tours_path = args.tours.or(file.tours);
    let samples_path = args.samples.or(file.samples);
    let nu = args.nu.or(file.nu);
    let delta = args.delta.or(file.delta);
    let p = args.p.or(file.p);
    let geometric = args.geometric || file.geometric;
    let psd = args.psd || file.psd;
    let centering: Centering = args.centering.or(file.centering).unwrap_or(CenteringArg::Ratio).into();
    let out = args.out.or(file.out);

    if tours_path.is_none() && samples_path.is_none() && nu.is_none() && delta.is_none() && p.is_none() {
        return Err(Failure::Usage(
            "nothing to do: give --tours, --samples, --nu or --delta/--p".into(),
        ));
    }

    let mut report = serde_json::Map::new();
    let mut failed = Vec::new();

    if let Some(nu) = nu.or(samples_path.as_ref().map(|_| 0.5)) {
        let schedule = BatchSchedule::power(nu);
        let check = check_batch_schedule(&schedule);
        report.insert(
            "schedule_check".into(),
            serde_json::to_value(&check).map_err(Error::from)?,
        );
        if !check.passed() {
            failed.push(format!("batch schedule nu = {nu} fails: {}", check.reasons.join("; ")));
        } else if let Some(path) = &samples_path {
            let trace = io::read_trace_csv(open_input(path)?, 1, 0)?;
            let est = batch_means(&trace.sample_matrix(), &schedule)?;
            report.insert("batch_means".into(), estimate_json(est, psd)?);
        }
    }

    if let Some(path) = &tours_path {
        let tours = io::read_tours_csv(open_input(path)?)?;
        let mut regen = json!({
            "tours": tours.len(),
            "mean": regen_mean(&tours)?,
            "mu_hat": regen_mu_hat(&tours)?,
        });
        match regen_sigma_f_hat_with(&tours, centering) {
            Ok(est) => regen["sigma_f"] = estimate_json(est, psd)?,
            Err(e) => failed.push(e.to_string()),
        }
        report.insert("regenerative".into(), regen);
    }

    match (delta, p) {
        (Some(delta), Some(p)) => {
            let rates = sip_rate_exponent(delta, p, geometric)?;
            let mut v = serde_json::to_value(rates).map_err(Error::from)?;
            if let Some(nu) = nu {
                v["nu_admissible"] = json!(rates.admits_batch_exponent(nu));
            }
            report.insert("rates".into(), v);
        }
        (None, None) => {}
        _ => return Err(Failure::Usage("--delta and --p must be given together".into())),
    }

    let value = Value::Object(report);
    emit_json(out.as_deref(), &value)?;
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        Err(Failure::Check(failed.join("; ")))
    }
}

/// The built-in synthetic probit design.
pub fn bundled_design() -> (nalgebra::DMatrix<f64>, Vec<bool>) {
    synthetic_design(BUNDLED_DESIGN_N, BUNDLED_DESIGN_P, BUNDLED_DESIGN_SEED)
}

fn cmd_probit_regen(args: ProbitArgs) -> Result<i32, Failure> {
    let file: ProbitArgs = load_config(args.config.as_deref())?;
    let design = args.design.or(file.design);
    let p_scan = args.p_scan.or(file.p_scan).unwrap_or(0.5);
    let steps = args.steps.or(file.steps).unwrap_or(100_000);
    let seed = require_seed(args.seed.or(file.seed))?;
    let pilot_iters = args.pilot_iters.or(file.pilot_iters).unwrap_or(10_000);
    let quantile = args.quantile.or(file.quantile).unwrap_or(0.25);
    let dir = create_out_dir(args.out.or(file.out))?;

    let (x, y) = match &design {
        Some(path) => io::read_design_csv(open_input(path)?)?,
        None => bundled_design(),
    };
    let model = ProbitModel::new(x, y, p_scan)?;
    // the pilot is a deterministic scan and ignores p_scan
    let pilot_seed = seed.wrapping_add(1);
    let config = pilot_tune(&model, pilot_iters, quantile, pilot_seed)?;
    let exp = run_regen_experiment(&model, &config, steps, seed)?;

    with_file(&dir.join("records.csv"), |w| io::write_records_csv(&exp.records, w))?;
    with_file(&dir.join("tours.csv"), |w| io::write_tours_csv(&exp.tours, w))?;

    let mut summary = json!({
        "parameters": {
            "design": design.as_ref().map(|p| p.display().to_string()),
            "n": model.n(),
            "p": model.p(),
            "p_scan": p_scan,
            "steps": steps,
            "seed": seed,
            "pilot_seed": pilot_seed,
            "pilot_iters": pilot_iters,
            "quantile": quantile,
        },
        "minorization": { "z_star": config.z_star, "bounds": config.bounds },
        "windows": exp.records.len(),
        "mixed_windows": exp.mixed_windows,
        "regenerations": exp.regenerations,
        "regen_fraction": exp.regen_fraction(),
        "max_eta": exp.max_eta(),
        "clamped": exp.clamped,
        "residual_len": exp.tours.residual_len,
    });
    if !exp.tours.is_empty() {
        summary["f_tilde"] = json!(regen_mean(&exp.tours)?);
        summary["mu_hat"] = json!(regen_mu_hat(&exp.tours)?);
    }
    if exp.tours.len() >= 2 {
        summary["sigma_f"] = regen_sigma_f_hat_with(&exp.tours, Centering::Ratio)?.to_json_value();
    }
    write_json(&dir.join("summary.json"), &summary)?;
    if exp.clamped > 0 {
        eprintln!(
            "warning: {} regeneration probabilities were clamped to [0, 1]",
            exp.clamped
        );
    }
    Ok(EXIT_OK)
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<i32, Failure> {
    let file: DiagnoseArgs = load_config(args.config.as_deref())?;
    let seed = require_seed(args.seed.or(file.seed))?;
    let tours_path = args.tours.or(file.tours);
    let mean = args.mean.or(file.mean);
    let out = args.out.or(file.out);
    let mut report = DiagnosticsReport::default();

    if let Some(path) = tours_path {
        let tours = io::read_tours_csv(open_input(&path)?)?;
        if let Some(mean) = &mean {
            report.push(diagnostics::check_regen_mean_identity(&tours, mean, None)?);
        }
        report.push(diagnostics::check_one_dependence(&tours));
    } else {
        let fixture = args.fixture.merge(file.fixture).resolve()?;
        let n = args.n.or(file.n).unwrap_or(1_000_000);
        let replications = args.replications.or(file.replications).unwrap_or(500);
        let clt_n = args.clt_n.or(file.clt_n).unwrap_or(100_000);
        let spec = fixture.spec();
        let mean = match mean {
            Some(m) => m,
            None => spec.stationary_mean()?,
        };

        let trace = fixture.run(n, seed)?;
        let tours = extract_identity_tours(&trace)?;
        let ergodic: Vec<f64> = {
            let m = trace.sample_matrix();
            (0..m.ncols()).map(|j| m.column(j).mean()).collect()
        };
        report.push(diagnostics::check_regen_mean_identity(&tours, &ergodic, None)?);

        let oracle = spec.oracle_sigma_f()?;
        let average = |rng: &mut crate::rng::ChainRng, len: usize| -> Vec<f64> {
            use rand::Rng;
            let run_seed: u64 = rng.random();
            let t = fixture.run(len, run_seed).expect("fixture parameters were validated");
            let m = t.sample_matrix();
            (0..m.ncols()).map(|j| m.column(j).mean()).collect()
        };
        report.push(diagnostics::check_clt_covariance(
            average,
            replications,
            clt_n,
            &mean,
            &oracle,
            seed.wrapping_add(1),
        )?);

        match fixture.mean_tour_length() {
            Some(mu) => report.push(diagnostics::check_xi_growth(&trace, mu)?),
            // no regenerations at all: the growth check cannot be evaluated
            None => report.push(diagnostics::check_xi_growth(&trace, 1.0)?),
        }
        report.push(diagnostics::check_one_dependence(&tours));
    }

    for c in report.inconclusive() {
        let reason = c.meta.get("reason").and_then(Value::as_str).unwrap_or("");
        eprintln!("warning: check {} is inconclusive ({reason})", c.name);
    }
    emit_json(out.as_deref(), &report.to_json())?;
    if report.passed() {
        Ok(EXIT_OK)
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| c.status == diagnostics::CheckStatus::Fail)
            .map(|c| c.name.as_str())
            .collect();
        Err(Failure::Check(format!("failed checks: {}", failed.join(", "))))
    }
}
