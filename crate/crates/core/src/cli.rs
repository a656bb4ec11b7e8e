//! Command-line front end. Every command prints one JSON document on
//! standard output; exit status is 0 on success, 1 on domain errors (with a
//! JSON error object) and 2 on usage errors.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::channels::{depolarizing, dephasing, random_channel, unitary_channel, KrausChannel};
use crate::designs::{exact_minimal, simplex_search_with, verify_design, SearchConfig, StateDesign};
use crate::error::Error;
use crate::fidelity::{gate_fidelity, Estimator};
use crate::haar::{sample_unitary, SampleStream};
use crate::io;
use crate::selftest;
use crate::su_basis::gell_mann_basis;
use crate::tensor::Tolerances;

#[derive(Debug, Parser)]
#[command(name = "fidelium", version, about = "Average gate fidelity of qudit channels")]
pub struct RunConfig {
    /// Worker threads for parallel estimators; results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub workers: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump the generalized Gell-Mann generators as JSON.
    Basis {
        #[arg(long, value_parser = parse_dim)]
        dim: usize,
    },
    /// Generate or verify state designs.
    #[command(subcommand)]
    Design(DesignCommand),
    /// Generate channel files.
    #[command(subcommand)]
    Channel(ChannelCommand),
    /// Estimate the average gate fidelity of a channel.
    Fidelity(FidelityArgs),
    /// Built-in consistency checks.
    #[command(subcommand)]
    Selftest(SelftestCommand),
}

#[derive(Debug, Subcommand)]
pub enum DesignCommand {
    Gen {
        #[arg(long, value_parser = parse_dim)]
        dim: usize,
        #[arg(long, value_enum, default_value_t = DesignMethod::Exact)]
        method: DesignMethod,
        #[arg(long, env = "FIDELIUM_SEED", default_value_t = 0)]
        seed: u64,
        /// Largest accepted overlap deviation of a searched design.
        #[arg(long, default_value_t = 1e-8, value_parser = parse_positive)]
        tol: f64,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    Verify {
        file: PathBuf,
        /// Threshold used for the reported `passed` flag.
        #[arg(long, default_value_t = Tolerances::DEFAULT.design, value_parser = parse_positive)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DesignMethod {
    Exact,
    Search,
}

#[derive(Debug, Subcommand)]
pub enum ChannelCommand {
    Gen(ChannelGenArgs),
}

#[derive(Debug, Args)]
pub struct ChannelGenArgs {
    #[arg(long, value_enum)]
    pub kind: ChannelKind,
    #[arg(long, value_parser = parse_dim)]
    pub dim: usize,
    /// Noise strength for depolarizing (required) and dephasing (default 1).
    #[arg(long)]
    pub p: Option<f64>,
    /// Number of Kraus operators for kraus-random (default: dim).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, env = "FIDELIUM_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelKind {
    Depolarizing,
    Dephasing,
    UnitaryRandom,
    KrausRandom,
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long)]
    pub gate: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Design file for `design` and `povm`; defaults to the exact design for
    /// d = 2, 3 and a seeded search otherwise.
    #[arg(long)]
    pub design: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, env = "FIDELIUM_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = Tolerances::DEFAULT.channel_file, value_parser = parse_positive)]
    pub tp_tol: f64,
    #[arg(long, default_value_t = Tolerances::DEFAULT.design, value_parser = parse_positive)]
    pub design_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Generators,
    Design,
    Povm,
    Mc,
    Entanglement,
}

#[derive(Debug, Subcommand)]
pub enum SelftestCommand {
    Orthogonality {
        #[arg(long, value_parser = parse_dim)]
        dim: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, env = "FIDELIUM_SEED", default_value_t = 0)]
        seed: u64,
    },
    All {
        #[arg(long, value_parser = parse_dim)]
        dim: usize,
        #[arg(long, env = "FIDELIUM_SEED", default_value_t = 0)]
        seed: u64,
    },
}

fn parse_dim(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(d) if d >= 2 => Ok(d),
        Ok(d) => Err(format!("dimension must be at least 2, got {d}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(x) => Err(format!("tolerance must be positive, got {x}")),
        Err(e) => Err(e.to_string()),
    }
}

/// Failure of a command, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Invalid combination of arguments (exit 2).
    Usage(String),
    /// Domain error (exit 1).
    Domain { error: Error, context: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain { .. } => 1,
        }
    }

    /// `{code, message, context}` for domain errors.
    pub fn to_json(&self) -> String {
        let value = match self {
            CliError::Usage(message) => json!({"code": "usage", "message": message, "context": ""}),
            CliError::Domain { error, context } => {
                json!({"code": error.code(), "message": error.to_string(), "context": context})
            }
        };
        io::to_json(&value)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

trait Context<T> {
    fn context(self, context: &str) -> CliResult<T>;
}

impl<T> Context<T> for crate::error::Result<T> {
    fn context(self, context: &str) -> CliResult<T> {
        self.map_err(|error| CliError::Domain {
            error,
            context: context.to_string(),
        })
    }
}

/// Runs a parsed command and returns the JSON document for standard output.
/// Estimators run on a dedicated thread pool when `workers` is set.
pub fn run(config: &RunConfig) -> CliResult<String> {
    match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| dispatch(&config.command)),
        None => dispatch(&config.command),
    }
}

fn dispatch(command: &Command) -> CliResult<String> {
    match command {
        Command::Basis { dim } => basis(*dim),
        Command::Design(DesignCommand::Gen {
            dim,
            method,
            seed,
            tol,
            restarts,
            max_iters,
            output,
        }) => {
            let config = SearchConfig {
                restarts: *restarts,
                max_iters: *max_iters,
                tol: *tol,
            };
            design_gen(*dim, *method, *seed, &config, output.as_deref())
        }
        Command::Design(DesignCommand::Verify { file, tol }) => design_verify(file, *tol),
        Command::Channel(ChannelCommand::Gen(args)) => channel_gen(args),
        Command::Fidelity(args) => fidelity(args),
        Command::Selftest(SelftestCommand::Orthogonality { dim, samples, seed }) => {
            if *samples < 100 {
                return Err(CliError::Usage(format!("--samples must be at least 100, got {samples}")));
            }
            let report = selftest::orthogonality(*dim, *samples, *seed).context("selftest orthogonality")?;
            Ok(io::to_json(&json!({
                "report": report,
                "passed": report.within(5.0),
                "bands": 5.0,
            })))
        }
        Command::Selftest(SelftestCommand::All { dim, seed }) => {
            let report = selftest::all(*dim, *seed).context("selftest all")?;
            Ok(io::to_json(&report))
        }
    }
}

fn basis(dim: usize) -> CliResult<String> {
    let basis = gell_mann_basis(dim).context("basis")?;
    let generators: Vec<_> = basis
        .generators()
        .iter()
        .zip(basis.kinds())
        .enumerate()
        .map(|(a, (t, kind))| json!({"index": a + 1, "kind": kind, "matrix": t}))
        .collect();
    Ok(io::to_json(&json!({
        "dim": dim,
        "k_d": basis.k_d(),
        "normalization": "tr(T_a T_b) = delta_ab / 2",
        "generators": generators,
    })))
}

#[derive(Serialize)]
struct SearchSummary {
    seed: u64,
    restart: usize,
    restarts_run: usize,
    iterations: usize,
    max_overlap_deviation: f64,
}

fn design_gen(
    dim: usize,
    method: DesignMethod,
    seed: u64,
    config: &SearchConfig,
    output: Option<&Path>,
) -> CliResult<String> {
    let (design, search) = match method {
        DesignMethod::Exact => (exact_minimal(dim).context("design gen")?, None),
        DesignMethod::Search => {
            let outcome = simplex_search_with(dim, seed, config).context("design gen")?;
            let summary = SearchSummary {
                seed,
                restart: outcome.restart,
                restarts_run: outcome.restarts_run,
                iterations: outcome.iterations,
                max_overlap_deviation: outcome.max_overlap_deviation,
            };
            (outcome.design, Some(summary))
        }
    };
    let report = verify_design(&design, &gell_mann_basis(dim).context("design gen")?).context("design gen")?;
    let file = io::DesignFile::from(&design);
    match output {
        Some(path) => {
            io::write_json(path, &file).context("design gen")?;
            Ok(io::to_json(&json!({
                "file": path.display().to_string(),
                "dim": dim,
                "n_states": design.len(),
                "source": design.source(),
                "search": search,
                "report": report,
            })))
        }
        None => Ok(io::to_json(&file)),
    }
}

fn design_verify(file: &Path, tol: f64) -> CliResult<String> {
    let design = io::load_design(file).context("design verify")?;
    let basis = gell_mann_basis(design.dim()).context("design verify")?;
    let report = verify_design(&design, &basis).context("design verify")?;
    Ok(io::to_json(&json!({
        "file": file.display().to_string(),
        "report": report,
        "max_residual": report.max_residual(),
        "tol": tol,
        "passed": report.require(tol).is_ok(),
    })))
}

fn channel_gen(args: &ChannelGenArgs) -> CliResult<String> {
    let d = args.dim;
    let probability = |p: Option<f64>, default: Option<f64>| -> CliResult<f64> {
        let p = p.or(default).ok_or_else(|| CliError::Usage("--p is required for this kind".into()))?;
        if (0.0..=1.0).contains(&p) {
            Ok(p)
        } else {
            Err(CliError::Usage(format!("--p must lie in [0, 1], got {p}")))
        }
    };
    let channel: KrausChannel = match args.kind {
        ChannelKind::Depolarizing => depolarizing(d, probability(args.p, None)?),
        ChannelKind::Dephasing => dephasing(d, probability(args.p, Some(1.0))?),
        ChannelKind::UnitaryRandom => unitary_channel(&sample_unitary(&SampleStream::new(args.seed, 0, d))),
        ChannelKind::KrausRandom => {
            let k = args.k.unwrap_or(d);
            if k == 0 {
                return Err(CliError::Usage("--k must be positive".into()));
            }
            random_channel(d, k, args.seed)
        }
    }
    .context("channel gen")?;
    let file = io::ChannelFile::from(&channel);
    match &args.output {
        Some(path) => {
            io::write_json(path, &file).context("channel gen")?;
            Ok(io::to_json(&json!({
                "file": path.display().to_string(),
                "dim": d,
                "kind": format!("{:?}", args.kind).to_lowercase(),
                "kraus_ops": channel.kraus_ops().len(),
                "trace_preservation_residual": channel.trace_preservation_residual(),
            })))
        }
        None => Ok(io::to_json(&file)),
    }
}

fn default_design(d: usize, seed: u64) -> crate::error::Result<StateDesign> {
    match exact_minimal(d) {
        Ok(design) => Ok(design),
        Err(Error::NoExactDesign(_)) => simplex_search_with(d, seed, &SearchConfig::default()).map(|o| o.design),
        Err(e) => Err(e),
    }
}

fn fidelity(args: &FidelityArgs) -> CliResult<String> {
    let ctx = "fidelity";
    let channel = io::load_channel(&args.channel, args.tp_tol).context(ctx)?;
    let d = channel.dim();
    let design = || -> CliResult<StateDesign> {
        match &args.design {
            Some(path) => io::load_design(path).context(ctx),
            None => default_design(d, args.seed).context(ctx),
        }
    };
    if args.design.is_some() && !matches!(args.method, MethodArg::Design | MethodArg::Povm) {
        return Err(CliError::Usage("--design only applies to --method design|povm".into()));
    }
    let estimator = match args.method {
        MethodArg::Generators => Estimator::Generators,
        MethodArg::Design => Estimator::Design {
            design: design()?,
            tol: args.design_tol,
        },
        MethodArg::Povm => Estimator::Povm {
            design: design()?,
            tol: args.design_tol,
        },
        MethodArg::Mc => {
            if args.samples < 100 {
                return Err(CliError::Usage(format!(
                    "--samples must be at least 100, got {}",
                    args.samples
                )));
            }
            Estimator::McHaar {
                n_samples: args.samples,
                seed: args.seed,
            }
        }
        MethodArg::Entanglement => Estimator::Entanglement,
    };
    let mut report = match &args.gate {
        Some(path) => {
            let gate = io::load_gate(path).context(ctx)?;
            gate_fidelity(&channel, &gate, &estimator).context(ctx)?
        }
        None => estimator.estimate(&channel).context(ctx)?,
    };
    report
        .metadata
        .insert("channel".into(), args.channel.display().to_string());
    Ok(io::to_json(&report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, clap::Error> {
        RunConfig::try_parse_from(std::iter::once("fidelium").chain(args.iter().copied()))
    }

    #[test]
    fn rejects_small_dimensions_and_bad_tolerances() {
        assert!(parse(&["basis", "--dim", "1"]).is_err());
        assert!(parse(&["design", "verify", "x.json", "--tol", "-1"]).is_err());
        assert!(parse(&["basis", "--dim", "3"]).is_ok());
    }

    #[test]
    fn depolarizing_requires_probability() {
        let config = parse(&["channel", "gen", "--kind", "depolarizing", "--dim", "2"]).unwrap();
        let err = run(&config).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_files_are_domain_errors() {
        let config = parse(&["fidelity", "--channel", "/nonexistent/ch.json", "--method", "generators"]).unwrap();
        let err = run(&config).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let json: serde_json::Value = serde_json::from_str(&err.to_json()).unwrap();
        assert_eq!(json["code"], "io");
        assert_eq!(json["context"], "fidelity");
    }

    #[test]
    fn basis_output_lists_generators() {
        let out = run(&parse(&["basis", "--dim", "3"]).unwrap()).unwrap();
        let json: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(json["generators"].as_array().unwrap().len(), 8);
        assert_eq!(json["generators"][2]["kind"]["kind"], "diagonal");
    }
}
