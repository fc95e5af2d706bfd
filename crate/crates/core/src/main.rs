use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use carleson_core::cli::config::{ExponentSpec, KernelSpec, OutputFormat, RunConfig};
use carleson_core::cli::run::{run, Command, GenKind, Space, TransformMode};
use carleson_core::duality_czo::CzoKind;
use carleson_core::Error;

#[derive(Parser)]
#[command(name = "carleson", version, about = "Variable-exponent Hardy/CMO numerics on a periodic dyadic grid")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Global {
    /// JSON run configuration; flags below override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// log2 of the number of grid points.
    #[arg(long, global = true, value_name = "J")]
    grid: Option<u32>,
    /// Exponent: JSON file, sample file, or inline `1.2`, `sin:MEAN:AMP`, `step:LOW:HIGH:WIDTH`.
    #[arg(long, global = true, value_name = "FILE|SPEC")]
    exponent: Option<String>,
    /// Kernel family: `meyer[:JMIN[:JMAX[:SHIFT]]]` or `shannon[...]`.
    #[arg(long, global = true, value_name = "SPEC")]
    kernels: Option<String>,
    /// Operator kind for `czo`: hilbert_smooth or hilbert_sharp.
    #[arg(long, global = true)]
    operator: Option<String>,
    /// Smoothness exponent of the operator kernel, in (0, 1].
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "K")]
    trials: Option<usize>,
    /// Directory for the report, timings and data files.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Lp,
    Hardy,
    Cmo,
    CmoDiscrete,
    S,
    C,
    Campanato,
    Zygmund,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenArg {
    White,
    Band,
    Heavy,
    Mixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Analyze,
    Synthesize,
    Roundtrip,
}

#[derive(Subcommand)]
enum Sub {
    /// Generate a seeded test signal (written to signal.csv).
    Gen {
        #[arg(long, value_enum, default_value = "mixed")]
        kind: GenArg,
        /// Stream index within the seed.
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Evaluate one norm of a signal (or of a coefficient file for `s` and `c`).
    Norm {
        #[arg(long, value_enum)]
        space: SpaceArg,
        /// Campanato integrability exponent.
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        /// Polynomial degree for Campanato and Zygmund.
        #[arg(long, default_value_t = 0)]
        d: usize,
        input: PathBuf,
    },
    /// φ-transform: analysis, synthesis or round trip.
    Transform {
        #[arg(value_enum)]
        mode: ModeArg,
        input: PathBuf,
    },
    /// Stopping-time atomic decomposition (atoms written to atoms.csv).
    Decompose { input: PathBuf },
    /// Coefficient pairing L_g(f) with the Hardy and CMO norms.
    Pair { f: PathBuf, g: PathBuf },
    /// Convolution operators.
    Czo {
        #[command(subcommand)]
        action: CzoAction,
    },
    /// Run verification suites.
    Verify {
        /// Suite name or `all`; may be repeated.
        #[arg(long = "suite", default_value = "all")]
        suites: Vec<String>,
    },
}

#[derive(Subcommand)]
enum CzoAction {
    /// Apply the operator to a signal (written to czo_output.csv).
    Apply { input: PathBuf },
    /// CMO boundedness experiment on seeded inputs.
    Experiment,
}

fn parse_exponent(arg: &str) -> Result<ExponentSpec, Error> {
    let path = Path::new(arg);
    if !path.is_file() {
        return ExponentSpec::parse_inline(arg);
    }
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{arg}: {e}")))?;
    if let Ok(spec) = serde_json::from_str::<ExponentSpec>(&text) {
        return Ok(spec);
    }
    let values = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Error::Config(format!("{arg}: neither an exponent document nor a list of samples")))?;
    Ok(ExponentSpec::Samples { values })
}

fn build_config(g: &Global) -> Result<RunConfig, Error> {
    let mut c = match &g.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(j) = g.grid {
        c.grid = Some(j);
    }
    if let Some(e) = &g.exponent {
        c.exponent = Some(parse_exponent(e)?);
    }
    if let Some(k) = &g.kernels {
        c.kernels = Some(KernelSpec::parse_inline(k)?);
    }
    if g.operator.is_some() || g.gamma.is_some() {
        let mut op = c.operator.take().unwrap_or_default();
        if let Some(kind) = &g.operator {
            op.kind = CzoKind::from_name(kind)?;
        }
        if let Some(gamma) = g.gamma {
            op.gamma = gamma;
        }
        c.operator = Some(op);
    }
    if let Some(s) = g.seed {
        c.seed = s;
    }
    if let Some(t) = g.trials {
        c.trials = Some(t);
    }
    if let Some(o) = &g.out {
        c.out = Some(o.clone());
    }
    if let Some(f) = g.format {
        c.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Structured => OutputFormat::Structured,
        };
    }
    Ok(c)
}

fn command(sub: Sub) -> Command {
    match sub {
        Sub::Gen { kind, trial } => Command::Gen {
            kind: match kind {
                GenArg::White => GenKind::White,
                GenArg::Band => GenKind::Band,
                GenArg::Heavy => GenKind::Heavy,
                GenArg::Mixed => GenKind::Mixed,
            },
            trial,
        },
        Sub::Norm { space, q, d, input } => Command::Norm {
            input,
            space: match space {
                SpaceArg::Lp => Space::Lp,
                SpaceArg::Hardy => Space::Hardy,
                SpaceArg::Cmo => Space::Cmo,
                SpaceArg::CmoDiscrete => Space::CmoDiscrete,
                SpaceArg::S => Space::S,
                SpaceArg::C => Space::C,
                SpaceArg::Campanato => Space::Campanato { q, d },
                SpaceArg::Zygmund => Space::Zygmund { d },
            },
        },
        Sub::Transform { mode, input } => Command::Transform {
            input,
            mode: match mode {
                ModeArg::Analyze => TransformMode::Analyze,
                ModeArg::Synthesize => TransformMode::Synthesize,
                ModeArg::Roundtrip => TransformMode::Roundtrip,
            },
        },
        Sub::Decompose { input } => Command::Decompose { input },
        Sub::Pair { f, g } => Command::Pair { f, g },
        Sub::Czo { action: CzoAction::Apply { input } } => Command::CzoApply { input },
        Sub::Czo { action: CzoAction::Experiment } => Command::CzoExperiment,
        Sub::Verify { suites } => Command::Verify { suites },
    }
}

fn execute(cli: Cli) -> Result<bool, Error> {
    let config = build_config(&cli.global)?;
    let out = run(&config, &command(cli.command))?;
    let rendered = out.render(config.format);
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    for (name, bytes) in &out.artifacts {
        fs::write(dir.join(name), bytes)?;
    }
    if config.out.is_some() {
        let name = match config.format {
            OutputFormat::Structured => "report.json",
            OutputFormat::Csv => "report.csv",
        };
        fs::write(dir.join(name), &rendered)?;
        let timings = serde_json::to_string_pretty(&out.timings).expect("timings serialize");
        fs::write(dir.join("timings.json"), timings)?;
    }
    println!("{rendered}");
    for c in out.report.checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {} ({})", c.name, c.threshold);
    }
    Ok(out.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
