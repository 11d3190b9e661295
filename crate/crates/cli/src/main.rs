//! `hartogs`: command-line front end for the egg-domain kernel library.
//!
//! Every run writes a `# {...}` RunRecord header line followed by the payload.
//! Exit codes: 0 success (classify also uses 1 and 2), 64 usage, 65 invalid
//! input, 70 numerical failure.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hartogs_core::acceptance::{self, DEFAULT_SEED};
use hartogs_core::cartan_hua::{hua_evaluate, CartanPoint, HuaConstructionSpec};
use hartogs_core::classifier::{classify, threshold_sweep, zero_locus, DEFAULT_PRECISION, DEFAULT_TOL};
use hartogs_core::coefficients::{CoefficientsRecord, EggDomainSpec, KernelCoefficients};
use hartogs_core::kernel::{BergmanKernel, DomainPoint, PointPair};
use hartogs_core::repcoords::representative_coordinates;
use hartogs_core::sampling::random_interior_point;
use hartogs_core::series::kernel_series;
use hartogs_core::Error;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NUMERIC: u8 = 70;

/// Relative `--output` paths are resolved against this directory when set.
const OUTPUT_DIR_ENV: &str = "HARTOGS_OUTPUT_DIR";

#[derive(Debug, Parser, Serialize)]
#[command(name = "hartogs", version, about = "Bergman kernel and Lu Qi-Keng analysis of egg domains")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct GlobalOpts {
    /// Payload format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    seed: u64,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Record the wall-clock time in the header (breaks byte-identical reruns).
    #[arg(long, global = true)]
    timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args, Serialize)]
struct DomainArgs {
    /// Base dimension.
    #[arg(long)]
    n: usize,
    /// Fiber exponent.
    #[arg(long = "K", alias = "k")]
    #[serde(rename = "K")]
    k: f64,
}

impl DomainArgs {
    fn spec(&self) -> Result<EggDomainSpec, Error> {
        EggDomainSpec::new(self.n, self.k)
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Kernel coefficients b_0 ..= b_{n+1}.
    Coeffs(DomainArgs),
    /// Closed-form kernel at one pair; points are JSON arrays of [re, im], W first.
    KernelEval {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
    /// Closed form against the series oracle on random interior pairs.
    OracleDiff {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long, default_value_t = 50)]
        pairs: usize,
        #[arg(long, default_value_t = 100)]
        cutoff: usize,
        /// Points satisfy |W|^{2K} + |Z|^2 < level.
        #[arg(long, default_value_t = acceptance::SERIES_LEVEL)]
        level: f64,
    },
    /// Lu Qi-Keng status; exit 0, 1 or 2 for LuQiKeng, NotLuQiKeng, Borderline.
    Classify {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Bisection for the threshold K* where the margin changes sign.
    Sweep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k_lo: f64,
        #[arg(long)]
        k_hi: f64,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: f64,
    },
    /// Witness pairs on the zero locus and the kernel there.
    ZeroLocus {
        #[command(flatten)]
        domain: DomainArgs,
        /// Witness s as [re, im]; defaults to every admissible root.
        #[arg(long)]
        s: Option<String>,
        /// Common base coordinate Z = xi = (shift, 0, ...) of the shifted pair.
        #[arg(long, default_value_t = 0.1)]
        shift: f64,
    },
    /// Representative coordinates of --point based at --base.
    RepCoords {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        base: String,
        #[arg(long)]
        point: String,
    },
    /// Hua-construction membership from a JSON description (inline or @file).
    HuaCheck {
        #[arg(long)]
        input: String,
    },
    /// Runs the acceptance suite and prints a pass/fail table.
    Verify,
}

/// Header line describing the run.
#[derive(Debug, Serialize)]
struct RunRecord<'a> {
    subcommand: &'a str,
    config: &'a Cli,
    version: &'static str,
    seed: u64,
    timestamp: Option<u64>,
}

struct Payload {
    json: Value,
    csv: Option<String>,
    exit: u8,
}

impl Payload {
    fn json(json: Value) -> Self {
        Self { json, csv: None, exit: 0 }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Core(e) if e.is_numeric_failure() => EXIT_NUMERIC,
            Failure::Core(_) => EXIT_DATA,
            Failure::Io(_) => EXIT_DATA,
        }
    }

    fn to_json(&self) -> Value {
        let (kind, message) = match self {
            Failure::Usage(m) => ("Usage", m.clone()),
            Failure::Core(e) => (e.kind(), e.to_string()),
            Failure::Io(e) => ("Io", e.to_string()),
        };
        json!({ "error": { "kind": kind, "message": message } })
    }
}

fn parse_coords(what: &str, text: &str) -> Result<Vec<Complex64>, Failure> {
    serde_json::from_str(text)
        .map_err(|e| Failure::Core(Error::InvalidArgument(format!("{what}: expected [[re, im], ...]: {e}"))))
}

fn point(spec: &EggDomainSpec, what: &str, text: &str) -> Result<DomainPoint, Failure> {
    Ok(DomainPoint::from_coords(spec, &parse_coords(what, text)?)?)
}

fn csv_text<F>(header: &[&str], fill: F) -> Result<String, Failure>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let run = |w: &mut csv::Writer<Vec<u8>>| -> csv::Result<()> {
        w.write_record(header)?;
        fill(w)?;
        w.flush()?;
        Ok(())
    };
    run(&mut w).map_err(|e| Failure::Io(io::Error::other(e)))?;
    let bytes = w.into_inner().map_err(|e| Failure::Io(io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

/// 17 significant digits.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn run(cli: &Cli) -> Result<Payload, Failure> {
    let seed = cli.global.seed;
    match &cli.command {
        Command::Coeffs(d) => {
            let c = KernelCoefficients::compute(&d.spec()?);
            let record = CoefficientsRecord::from(&c);
            let csv = csv_text(&["i", "b"], |w| {
                for (i, b) in record.b.iter().enumerate() {
                    w.write_record([i.to_string(), fmt(*b)])?;
                }
                Ok(())
            })?;
            Ok(Payload {
                json: serde_json::to_value(&record).expect("serializable"),
                csv: Some(csv),
                exit: 0,
            })
        }
        Command::KernelEval { domain, p, q } => {
            let spec = domain.spec()?;
            let pair = PointPair::new(point(&spec, "--p", p)?, point(&spec, "--q", q)?)?;
            let kernel = BergmanKernel::new(&spec);
            let v = kernel.eval(&pair)?;
            let normalized = kernel.diag_normalized(&pair)?;
            let csv = csv_text(&["value_re", "value_im", "X_re", "X_im", "Y_re", "Y_im", "normalized"], |w| {
                w.write_record([v.value.re, v.value.im, v.x.re, v.x.im, v.y.re, v.y.im, normalized].map(fmt))
            })?;
            let mut json = serde_json::to_value(v).expect("serializable");
            json["normalized"] = json!(normalized);
            Ok(Payload { json, csv: Some(csv), exit: 0 })
        }
        Command::OracleDiff { domain, pairs, cutoff, level } => {
            let spec = domain.spec()?;
            if !(*level > 0.0 && *level <= 1.0) {
                return Err(Error::InvalidArgument(format!("level must lie in (0, 1], got {level}")).into());
            }
            let kernel = BergmanKernel::new(&spec);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sample: Vec<PointPair> = (0..*pairs)
                .map(|_| {
                    let p = random_interior_point(&spec, &mut rng, *level);
                    let q = random_interior_point(&spec, &mut rng, *level);
                    PointPair::new(p, q)
                })
                .collect::<Result<_, _>>()?;
            let rows: Vec<OracleRow> = sample
                .par_iter()
                .enumerate()
                .map(|(i, pair)| {
                    let closed = kernel.eval(pair)?.value;
                    let series = kernel_series(&spec, pair, *cutoff)?;
                    Ok(OracleRow {
                        pair: i,
                        closed,
                        series: series.value,
                        relative_difference: (closed - series.value).norm() / closed.norm(),
                        tail_estimate: series.tail_estimate,
                    })
                })
                .collect::<Result<_, Error>>()?;
            let worst = rows.iter().map(|r| r.relative_difference).fold(0.0, f64::max);
            let csv = csv_text(
                &["pair", "closed_re", "closed_im", "series_re", "series_im", "relative_difference", "tail_estimate"],
                |w| {
                    for r in &rows {
                        let mut rec = vec![r.pair.to_string()];
                        rec.extend(
                            [r.closed.re, r.closed.im, r.series.re, r.series.im, r.relative_difference, r.tail_estimate]
                                .map(fmt),
                        );
                        w.write_record(rec)?;
                    }
                    Ok(())
                },
            )?;
            Ok(Payload {
                json: json!({ "max_relative_difference": worst, "rows": rows }),
                csv: Some(csv),
                exit: 0,
            })
        }
        Command::Classify { domain, tol } => {
            let r = classify(&domain.spec()?, *tol)?;
            let json = json!({
                "status": r.status,
                "margin": r.margin,
                "witnesses": r.witness_roots,
                "roots": r.roots,
            });
            Ok(Payload {
                json,
                csv: None,
                exit: r.status.exit_code() as u8,
            })
        }
        Command::Sweep { n, k_lo, k_hi, precision } => {
            let r = threshold_sweep(*n, (*k_lo, *k_hi), *precision)?;
            let record = json!({ "n": r.n, "K_star": r.k_star, "bracket": r.bracket });
            let mut csv = csv_text(&["K", "margin"], |w| {
                for (k, m) in &r.samples {
                    w.write_record([fmt(*k), fmt(*m)])?;
                }
                Ok(())
            })?;
            csv.push_str(&record.to_string());
            csv.push('\n');
            Ok(Payload {
                json: serde_json::to_value(&r).expect("serializable"),
                csv: Some(csv),
                exit: 0,
            })
        }
        Command::ZeroLocus { domain, s, shift } => {
            let spec = domain.spec()?;
            let kernel = BergmanKernel::new(&spec);
            let witnesses = match s {
                Some(text) => vec![serde_json::from_str::<Complex64>(text).map_err(|e| {
                    Failure::Core(Error::InvalidArgument(format!("--s: expected [re, im]: {e}")))
                })?],
                None => classify(&spec, DEFAULT_TOL)?.witness_roots,
            };
            let mut z = vec![Complex64::new(0.0, 0.0); spec.n()];
            z[0] = Complex64::new(*shift, 0.0);
            let mut out = Vec::new();
            for w in witnesses {
                let locus = zero_locus(&spec, w)?;
                for (label, pair) in [("fiber", locus.fiber_pair()?), ("shifted", locus.shifted_pair(z.clone())?)] {
                    out.push(WitnessRow {
                        witness: w,
                        kind: label,
                        p: pair.p.coords(),
                        q: pair.q.coords(),
                        residual: locus.residual(&pair),
                        normalized_kernel: kernel.diag_normalized(&pair)?,
                    });
                }
            }
            Ok(Payload::json(json!({ "pairs": out })))
        }
        Command::RepCoords { domain, base, point: p } => {
            let spec = domain.spec()?;
            let f = representative_coordinates(&spec, &point(&spec, "--base", base)?, &point(&spec, "--point", p)?)?;
            let csv = csv_text(&["index", "re", "im"], |w| {
                for (i, x) in f.iter().enumerate() {
                    w.write_record([i.to_string(), fmt(x.re), fmt(x.im)])?;
                }
                Ok(())
            })?;
            Ok(Payload {
                json: json!({ "coordinates": f }),
                csv: Some(csv),
                exit: 0,
            })
        }
        Command::HuaCheck { input } => {
            let text = match input.strip_prefix('@') {
                Some(path) => std::fs::read_to_string(path)?,
                None => input.clone(),
            };
            let req: HuaRequest = serde_json::from_str(&text)
                .map_err(|e| Failure::Core(Error::InvalidArgument(format!("hua-check input: {e}"))))?;
            let spec = HuaConstructionSpec::new(req.base, req.blocks)?;
            let z = CartanPoint::new(&spec.base, req.z)?;
            let e = hua_evaluate(&spec, &req.w, &z)?;
            Ok(Payload::json(serde_json::to_value(e).expect("serializable")))
        }
        Command::Verify => {
            let outcomes = acceptance::run_all(seed);
            let all = outcomes.iter().all(|o| o.passed);
            let mut table = String::new();
            for o in &outcomes {
                table.push_str(&o.line());
                table.push('\n');
            }
            let passed = outcomes.iter().filter(|o| o.passed).count();
            table.push_str(&format!("{passed}/{} criteria passed\n", outcomes.len()));
            Ok(Payload {
                json: json!({ "passed": all, "criteria": outcomes }),
                csv: Some(table),
                exit: u8::from(!all),
            })
        }
    }
}

#[derive(Serialize)]
struct OracleRow {
    pair: usize,
    closed: Complex64,
    series: Complex64,
    relative_difference: f64,
    tail_estimate: f64,
}

#[derive(Serialize)]
struct WitnessRow {
    witness: Complex64,
    kind: &'static str,
    p: Vec<Complex64>,
    q: Vec<Complex64>,
    residual: f64,
    normalized_kernel: f64,
}

#[derive(Deserialize)]
struct HuaRequest {
    base: hartogs_core::cartan_hua::CartanDomainSpec,
    blocks: Vec<hartogs_core::cartan_hua::HuaBlock>,
    #[serde(rename = "W")]
    w: Vec<Vec<Complex64>>,
    #[serde(rename = "Z")]
    z: Vec<Complex64>,
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Coeffs(_) => "coeffs",
        Command::KernelEval { .. } => "kernel-eval",
        Command::OracleDiff { .. } => "oracle-diff",
        Command::Classify { .. } => "classify",
        Command::Sweep { .. } => "sweep",
        Command::ZeroLocus { .. } => "zero-locus",
        Command::RepCoords { .. } => "rep-coords",
        Command::HuaCheck { .. } => "hua-check",
        Command::Verify => "verify",
    }
}

fn open_output(cli: &Cli) -> io::Result<Box<dyn Write>> {
    match &cli.global.output {
        None => Ok(Box::new(io::stdout().lock())),
        Some(path) => {
            let path = match std::env::var_os(OUTPUT_DIR_ENV) {
                Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
                _ => path.clone(),
            };
            Ok(Box::new(File::create(path)?))
        }
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
    if let Some(t) = cli.global.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let name = subcommand_name(&cli.command);
    let header = RunRecord {
        subcommand: name,
        config: &cli,
        version: env!("CARGO_PKG_VERSION"),
        seed: cli.global.seed,
        timestamp: cli
            .global
            .timestamp
            .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)),
    };
    let mut out = match open_output(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot open output: {e}");
            return ExitCode::from(EXIT_DATA);
        }
    };
    let result = run(&cli).and_then(|p| match (cli.global.format, &p.csv) {
        (Format::Csv, None) => Err(Failure::Usage(format!("{name} has no CSV form; use --format json"))),
        _ => Ok(p),
    });
    let (body, code) = match result {
        Ok(p) => {
            let body = match (cli.global.format, p.csv) {
                (Format::Csv, Some(csv)) => csv,
                _ => format!("{}\n", serde_json::to_string_pretty(&p.json).expect("serializable")),
            };
            (body, p.exit)
        }
        Err(f) => {
            eprintln!("error: {}", f.to_json()["error"]["message"].as_str().unwrap_or(""));
            (format!("{}\n", serde_json::to_string_pretty(&f.to_json()).expect("serializable")), f.exit_code())
        }
    };
    let header = serde_json::to_string(&header).expect("serializable");
    if writeln!(out, "# {header}").and_then(|_| out.write_all(body.as_bytes())).and_then(|_| out.flush()).is_err() {
        return ExitCode::from(EXIT_DATA);
    }
    ExitCode::from(code)
}
