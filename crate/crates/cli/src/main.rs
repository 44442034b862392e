use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use sat3bound::certifier::{self, Certificate, CertifyOptions, DEFAULT_WIDTH_TARGET};
use sat3bound::formula_lab::{clause_count, counting_oracle, empirical_report, pps_census, EmpiricalConfig};
use sat3bound::numeric::ArithmeticMode;
use sat3bound::{ConfigError, DomainError, ModelParams};

const EXIT_FALSE: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "sat3bound", version, about = "Certified first-moment bound on the random 3-SAT threshold")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the full chain and write certificate.json
    Certify(CertifyArgs),
    /// Write the two stationarity loci to curves.csv
    Curves(CurvesArgs),
    /// Measure occurrence proportions of random formulas against kappa
    Empirical(EmpiricalArgs),
    /// Brute-force the counting bound on a tiny instance
    Oracle(OracleArgs),
    /// Recompute a stored certificate and compare
    Replay(ReplayArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Clause density
    #[arg(long, default_value_t = 4.506)]
    c: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run directory; created if missing
    #[arg(long, default_value = "run")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct Model {
    /// Truncation degree of occurrence counts
    #[arg(long, default_value_t = 56)]
    xmax: u32,
    /// Accuracy radius of typical formulas
    #[arg(long, default_value_t = 1e-15)]
    eps: f64,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: Model,
    /// float or interval
    #[arg(long, default_value = "float")]
    mode: ArithmeticMode,
    /// Rectangle width the exclusion spiral aims for
    #[arg(long, default_value_t = DEFAULT_WIDTH_TARGET)]
    width: f64,
}

#[derive(Args, Debug)]
struct CurvesArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: Model,
    /// Columns per curve
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

#[derive(Args, Debug)]
struct EmpiricalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 100_000)]
    n: u32,
    #[arg(long, default_value_t = 50)]
    formulas: u32,
    /// Largest occurrence count reported
    #[arg(long, default_value_t = 8)]
    xmax: u32,
    #[arg(long, default_value_t = 0.999)]
    confidence: f64,
    /// Variables in the exhaustive PPS census (0 skips it)
    #[arg(long, default_value_t = 12)]
    pps_n: u32,
    #[arg(long, default_value_t = 1000)]
    pps_formulas: u64,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 2)]
    n: u32,
    /// Heavy-variable threshold
    #[arg(long, default_value_t = 6)]
    xmax: u32,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    /// Path of a certificate.json
    cert: PathBuf,
}

/// Failure modes with their exit codes.
enum Failure {
    Config(String),
    Other(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<DomainError> for Failure {
    fn from(e: DomainError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FALSE),
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Certify(a) => certify(a),
        Command::Curves(a) => curves(a),
        Command::Empirical(a) => empirical(a),
        Command::Oracle(a) => oracle(a),
        Command::Replay(a) => replay(a),
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Writes the run directory's files and a manifest listing them.
fn write_run(out: &Path, command: &str, seed: u64, files: &[(&str, String)]) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut manifest = String::new();
    let args: Vec<String> = std::env::args().collect();
    let _ = writeln!(manifest, "command: {command}");
    let _ = writeln!(manifest, "args: {}", args.join(" "));
    let _ = writeln!(manifest, "seed: {seed}");
    let _ = writeln!(manifest, "sat3bound: {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(manifest, "schema: {}", certifier::SCHEMA_VERSION);
    let _ = writeln!(manifest, "timestamp_unix: {}", now());
    for (name, body) in files {
        let path = out.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        let _ = writeln!(manifest, "file: {name} ({} bytes)", body.len());
    }
    fs::write(out.join("manifest.txt"), manifest).context("writing manifest.txt")?;
    Ok(())
}

fn model_params(c: f64, m: &Model) -> Result<ModelParams, Failure> {
    let p = ModelParams::at_density(c, m.xmax, m.eps);
    p.validate()?;
    Ok(p)
}

fn certify(a: CertifyArgs) -> Result<bool, Failure> {
    let params = model_params(a.common.c, &a.model)?;
    let opts = CertifyOptions {
        mode: a.mode,
        seed: a.common.seed,
        width_target: a.width,
        timestamp: Some(now()),
    };
    let cert = certifier::certify(&params, &opts)?;
    write_run(&a.common.out, "certify", a.common.seed, &[("certificate.json", cert.to_json())])?;
    print_certificate(&cert);
    Ok(cert.verdict)
}

fn print_certificate(cert: &Certificate) {
    let p = &cert.params;
    println!("c = {}, x_max = {}, eps = {:e}, mode = {}", p.c, p.x_max, p.epsilon, cert.provenance.mode);
    if let Some(r) = &cert.rectangle {
        println!(
            "rectangle: phi in [{:.10}, {:.10}], beta1 in [{:.10}, {:.10}]",
            r.phi_lo, r.phi_hi, r.beta1_lo, r.beta1_hi
        );
    }
    if let Some(r) = &cert.rate {
        println!("rate majorant {:.10}, with slack {:.10}", r.majorant, r.bound);
    }
    match (&cert.failed_stage, &cert.failure) {
        (Some(stage), Some(why)) => println!("verdict: false (stage {stage}: {why})"),
        _ => println!("verdict: {}", cert.verdict),
    }
}

fn curves(a: CurvesArgs) -> Result<bool, Failure> {
    let params = model_params(a.common.c, &a.model)?;
    if a.samples == 0 {
        return Err(Failure::Config("need at least one sample".into()));
    }
    let csv = certifier::emit_curves(&params, a.samples)?;
    write_run(&a.common.out, "curves", a.common.seed, &[("curves.csv", csv)])?;
    println!("wrote {} columns", a.samples);
    Ok(true)
}

fn empirical(a: EmpiricalArgs) -> Result<bool, Failure> {
    let mut cfg = EmpiricalConfig::new(a.n, a.common.c, a.formulas, a.common.seed);
    cfg.x_cap = a.xmax;
    cfg.confidence = a.confidence;
    let report = empirical_report(&cfg)?;
    let mut ok = report.within_budget();
    println!(
        "n = {}, m = {}, formulas = {}{}: max |mean omega - kappa| = {:.3e}, worst error/budget = {:.3}",
        a.n,
        report.m,
        report.formulas_used,
        if report.partial { " (partial)" } else { "" },
        report.max_error(),
        report.worst_ratio()
    );
    let mut files = vec![("empirical.csv", report.to_csv())];
    if a.pps_n > 0 {
        let census = pps_census(a.pps_n, &[a.common.c], a.pps_formulas, a.common.seed)?;
        ok &= census.clean();
        println!(
            "PPS census at n = {}: {} formulas, {} satisfiable, {} with a PPS, {} flip failures, {} pure-negative ones",
            census.n, census.formulas, census.satisfiable, census.with_pps, census.flip_failures, census.pure_negative_ones
        );
        let mut s = String::from("n,formulas,satisfiable,with_pps,solutions,pps,flip_failures,pure_negative_ones\n");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            census.n,
            census.formulas,
            census.satisfiable,
            census.with_pps,
            census.solutions,
            census.pps,
            census.flip_failures,
            census.pure_negative_ones
        );
        files.push(("pps_census.csv", s));
    }
    write_run(&a.common.out, "empirical", a.common.seed, &files)?;
    Ok(ok)
}

fn oracle(a: OracleArgs) -> Result<bool, Failure> {
    let m = clause_count(a.n, a.common.c)?;
    let record = counting_oracle(a.n, m, a.xmax)?;
    println!(
        "n = {}, m = {}: {} formulas, {} PPS pairs ({} untyped), {} signatures, {} violations",
        record.n,
        record.m,
        record.formulas,
        record.by_formula,
        record.untyped,
        record.rows.len(),
        record.violations()
    );
    write_run(&a.common.out, "oracle", a.common.seed, &[("oracle.csv", record.to_csv())])?;
    Ok(record.violations() == 0 && record.by_formula == record.by_assignment)
}

fn replay(a: ReplayArgs) -> Result<bool, Failure> {
    let text = fs::read_to_string(&a.cert).with_context(|| format!("reading {}", a.cert.display()))?;
    let cert = Certificate::from_json(&text).map_err(|e| Failure::Config(e.to_string()))?;
    match certifier::replay(&cert) {
        Ok(verdict) => {
            println!("replay matches; verdict {verdict}");
            Ok(verdict)
        }
        Err(certifier::ReplayError::Config(e)) => Err(e.into()),
        Err(e) => Err(Failure::Other(e.into())),
    }
}
