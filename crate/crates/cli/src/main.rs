use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use feigen2d::cascade::Precision;
use feigen2d::cert::exit_code;
use feigen2d::{Certificate, ExecPolicy, Mode};

mod stages;

use stages::{Outcome, RunConfig, StableSetArgs};

/// Usage errors.
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "feigen2d", version, about = "Period-doubling renormalization for reversible area-preserving maps")]
struct Cli {
    /// Worker threads for data-parallel stages (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Run every stage on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Write the JSON manifest here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Truncation degree of the generating function.
    #[arg(long, default_value_t = 20)]
    degree: usize,
    /// Newton tolerance on the fixed-point residual.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// float or interval.
    #[arg(long, default_value = "interval")]
    mode: Mode,
    /// Maximum subdivision depth for inclusion checks.
    #[arg(long, default_value_t = 10)]
    inclusion_depth: u32,
    /// Uniform subdivision depth for covers and norm bounds.
    #[arg(long, default_value_t = 6)]
    cover_depth: u32,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the renormalization fixed point and its spectrum.
    FixedPoint {
        #[arg(long, default_value_t = 20)]
        degree: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value = "float")]
        mode: Mode,
        /// Write the coefficients as `i,j,lo,hi` CSV.
        #[arg(long, value_name = "PATH")]
        dump_coeffs: Option<PathBuf>,
        /// Start Newton from coefficients written by --dump-coeffs.
        #[arg(long, value_name = "PATH")]
        seed: Option<PathBuf>,
        /// Skip the linearization spectrum.
        #[arg(long)]
        no_spectrum: bool,
    },
    /// Inclusions of the bounded set and the separation inequality.
    VerifyRegions {
        #[command(flatten)]
        common: Common,
        /// Maximum subdivision depth for inclusion checks.
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Derivative-norm constants and the rates derived from them.
    Norms {
        #[command(flatten)]
        common: Common,
        /// Subdivision depth of the norm covers.
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Pieces of the stable Cantor set.
    StableSet {
        #[command(flatten)]
        common: Common,
        /// Word length n.
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Subdivision depth of the base cover.
        #[arg(long, default_value_t = 3)]
        base_depth: u32,
        /// CSV of piece boxes and orbit points for plotting.
        #[arg(long, value_name = "PATH")]
        emit_points: Option<PathBuf>,
        /// Emit nesting, disjointness, odometer and orbit certificates.
        #[arg(long)]
        certify: bool,
    },
    /// Hierarchy of the hyperbolic set of G and Lyapunov exponents.
    Hyperbolic {
        #[arg(long, default_value_t = 20)]
        degree: usize,
        /// Deepest level k.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// CSV of component centres.
        #[arg(long, value_name = "PATH")]
        emit_points: Option<PathBuf>,
    },
    /// Period-doubling cascade of the area-preserving Hénon family.
    Cascade {
        #[arg(long, default_value_t = 6)]
        kmax: usize,
        /// auto, double or extended.
        #[arg(long, default_value = "auto")]
        precision: Precision,
        /// Write PREFIX.csv and PREFIX.json; without it the CSV goes to stdout.
        #[arg(long, value_name = "PREFIX")]
        out: Option<PathBuf>,
    },
    /// Fixed point, regions, norms and stable set in one manifest.
    CertifyAll {
        #[command(flatten)]
        common: Common,
        /// Word length of the stable-set stage.
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        base_depth: u32,
    },
}

/// Stages whose failure maps to a distinct exit status.
#[derive(Clone, Copy, Debug)]
enum Stage {
    FixedPoint = 10,
    Regions = 11,
    Norms = 12,
    StableSet = 13,
    Hyperbolic = 14,
    Cascade = 15,
    Output = 16,
}

struct StageError {
    stage: Stage,
    error: anyhow::Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

fn config(c: &Common, policy: ExecPolicy) -> RunConfig {
    RunConfig {
        degree: c.degree,
        tol: c.tol,
        mode: c.mode,
        policy,
        inclusion_depth: c.inclusion_depth,
        cover_depth: c.cover_depth,
        precision: Precision::Auto,
    }
}

fn base_config(degree: usize, tol: f64, mode: Mode, policy: ExecPolicy) -> RunConfig {
    RunConfig { degree, tol, mode, policy, inclusion_depth: 10, cover_depth: 6, precision: Precision::Auto }
}

/// Manifest entry for one stage.
fn section(name: &str, cfg: &RunConfig, o: &Outcome) -> Value {
    json!({
        "stage": name,
        "config": {
            "degree": cfg.degree,
            "tol": cfg.tol,
            "mode": cfg.mode,
            "parallel": cfg.policy.is_parallel(),
            "inclusion_depth": cfg.inclusion_depth,
            "cover_depth": cfg.cover_depth,
        },
        "report": o.report,
        "certificates": o.certificates,
    })
}

fn write_manifest(path: Option<&Path>, stages: Vec<Value>, certs: &[Certificate]) -> Result<()> {
    let doc = json!({
        "tool": "feigen2d",
        "tool_version": env!("CARGO_PKG_VERSION"),
        "exit_code": exit_code(certs),
        "stages": stages,
    });
    let text = serde_json::to_string_pretty(&doc)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32, StageError> {
    let policy = if cli.sequential { ExecPolicy::Sequential } else { ExecPolicy::available() };
    let mut sections = Vec::new();
    let mut certs: Vec<Certificate> = Vec::new();
    let mut record = |name: &str, cfg: &RunConfig, o: Outcome, certs: &mut Vec<Certificate>| {
        sections.push(section(name, cfg, &o));
        certs.extend(o.certificates);
    };
    let mut to_stdout = true;

    match cli.command {
        Command::FixedPoint { degree, tol, mode, dump_coeffs, seed, no_spectrum } => {
            let cfg = base_config(degree, tol, mode, policy);
            cfg.validate().at(Stage::FixedPoint)?;
            let fp = stages::fixed_point(&cfg, seed.as_deref(), !no_spectrum).at(Stage::FixedPoint)?;
            if let Some(p) = &dump_coeffs {
                stages::dump_coeffs(&fp.s, p).at(Stage::Output)?;
            }
            record("fixed-point", &cfg, fp.outcome, &mut certs);
        }
        Command::VerifyRegions { common, depth } => {
            let mut cfg = config(&common, policy);
            if let Some(d) = depth {
                cfg.inclusion_depth = d;
            }
            cfg.validate().at(Stage::Regions)?;
            let fp = stages::fixed_point(&cfg, None, false).at(Stage::FixedPoint)?;
            let o = stages::regions(&cfg, &fp.s).at(Stage::Regions)?;
            record("verify-regions", &cfg, o, &mut certs);
        }
        Command::Norms { common, depth } => {
            let mut cfg = config(&common, policy);
            if let Some(d) = depth {
                cfg.cover_depth = d;
            }
            cfg.validate().at(Stage::Norms)?;
            let fp = stages::fixed_point(&cfg, None, false).at(Stage::FixedPoint)?;
            let o = stages::norms(&cfg, &fp.s).at(Stage::Norms)?;
            record("norms", &cfg, o, &mut certs);
        }
        Command::StableSet { common, depth, base_depth, emit_points, certify } => {
            let cfg = config(&common, policy);
            cfg.validate().at(Stage::StableSet)?;
            let fp = stages::fixed_point(&cfg, None, false).at(Stage::FixedPoint)?;
            let args = StableSetArgs { depth, base_depth, certify, emit_points };
            let o = stages::stable_set(&cfg, &fp.s, &args).at(Stage::StableSet)?;
            record("stable-set", &cfg, o, &mut certs);
        }
        Command::Hyperbolic { degree, k, emit_points } => {
            let cfg = base_config(degree, 1e-10, Mode::Float, policy);
            cfg.validate().at(Stage::Hyperbolic)?;
            let fp = stages::fixed_point(&cfg, None, false).at(Stage::FixedPoint)?;
            let o = stages::hyperbolic(&cfg, &fp.s, k, emit_points.as_deref()).at(Stage::Hyperbolic)?;
            record("hyperbolic", &cfg, o, &mut certs);
        }
        Command::Cascade { kmax, precision, out } => {
            let cfg = RunConfig { precision, ..base_config(20, 1e-10, Mode::Float, policy) };
            let run = stages::cascade(&cfg, kmax).at(Stage::Cascade)?;
            match &out {
                Some(prefix) => {
                    let csv_path = prefix.with_extension("csv");
                    let file = std::fs::File::create(&csv_path)
                        .with_context(|| format!("creating {}", csv_path.display()))
                        .at(Stage::Output)?;
                    stages::write_cascade_csv(&run.records, file).at(Stage::Output)?;
                    let summary = serde_json::to_string_pretty(&run.outcome.report).map_err(anyhow::Error::from).at(Stage::Output)?;
                    let json_path = prefix.with_extension("json");
                    std::fs::write(&json_path, summary + "\n")
                        .with_context(|| format!("writing {}", json_path.display()))
                        .at(Stage::Output)?;
                }
                None => {
                    stages::write_cascade_csv(&run.records, std::io::stdout().lock()).at(Stage::Output)?;
                    to_stdout = false;
                }
            }
            record("cascade", &cfg, run.outcome, &mut certs);
        }
        Command::CertifyAll { common, depth, base_depth } => {
            let cfg = config(&common, policy);
            cfg.validate().at(Stage::FixedPoint)?;
            let fp = stages::fixed_point(&cfg, None, true).at(Stage::FixedPoint)?;
            let s = fp.s.clone();
            record("fixed-point", &cfg, fp.outcome, &mut certs);
            let o = stages::regions(&cfg, &s).at(Stage::Regions)?;
            record("verify-regions", &cfg, o, &mut certs);
            let o = stages::norms(&cfg, &s).at(Stage::Norms)?;
            record("norms", &cfg, o, &mut certs);
            let args = StableSetArgs { depth, base_depth, certify: true, emit_points: None };
            let o = stages::stable_set(&cfg, &s, &args).at(Stage::StableSet)?;
            record("stable-set", &cfg, o, &mut certs);
        }
    }

    if cli.manifest.is_some() || to_stdout {
        write_manifest(cli.manifest.as_deref(), sections, &certs).at(Stage::Output)?;
    }
    for c in &certs {
        eprintln!("{:<24} {:?}", c.claim_id, c.verdict);
    }
    Ok(exit_code(&certs))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(StageError { stage, error }) => {
            eprintln!("error in {stage:?} stage: {error:#}");
            ExitCode::from(stage as u8)
        }
    }
}
