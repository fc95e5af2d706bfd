//! Executes one subcommand against a validated [`RunConfig`].

use std::path::PathBuf;

use serde::Serialize;

use crate::atomic::{atom_check_span, atomic_decompose};
use crate::cli::config::{ExponentSpec, OperatorSpec, OutputFormat, RunConfig};
use crate::cli::io;
use crate::cli::report::{Check, CheckLog, Report, Timings};
use crate::duality_czo::{apply, czo_cmo_experiment, pairing};
use crate::error::{Error, Result};
use crate::grid::{ExponentFunction, Grid, Signal};
use crate::littlewood_paley::KernelFamily;
use crate::luxemburg::luxemburg_norm;
use crate::phi_transform::{analyze, reconstruction_error, synthesize};
use crate::rng;
use crate::space_norms::{campanato_norm, cmo_norm, hardy_norm, seq_c_norm, seq_s_norm, zygmund_norm, CmoForm};
use crate::verify::suites::{run_suite, Suite, SuiteParams, ATOMIC_RECONSTRUCTION_TOL, MOMENT_TOL, RECONSTRUCTION_TOL};

pub const DEFAULT_GRID: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Lp,
    Hardy,
    Cmo,
    CmoDiscrete,
    /// Sequence norms read a coefficient file.
    S,
    C,
    Campanato { q: f64, d: usize },
    Zygmund { d: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    White,
    Band,
    Heavy,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformMode {
    Analyze,
    Synthesize,
    Roundtrip,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "command")]
pub enum Command {
    Gen { kind: GenKind, trial: u64 },
    Norm { input: PathBuf, space: Space },
    Transform { input: PathBuf, mode: TransformMode },
    Decompose { input: PathBuf },
    Pair { f: PathBuf, g: PathBuf },
    CzoApply { input: PathBuf },
    CzoExperiment,
    Verify { suites: Vec<String> },
}

/// Output files produced besides the report, by file name.
pub type Artifacts = Vec<(String, Vec<u8>)>;

pub struct RunOutput {
    pub report: Report,
    pub timings: Timings,
    pub artifacts: Artifacts,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.report.pass
    }

    /// Report rendered in the configured format.
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Structured => self.report.to_json(),
            OutputFormat::Csv => self.report.to_csv(),
        }
    }
}

struct Ctx<'a> {
    config: &'a RunConfig,
}

impl Ctx<'_> {
    fn grid(&self) -> Result<Grid> {
        self.config.grid_or(DEFAULT_GRID)
    }

    fn exponent(&self, grid: Grid) -> Result<ExponentFunction> {
        self.config
            .exponent
            .clone()
            .unwrap_or(ExponentSpec::Constant { value: 1.0 })
            .build(grid)
    }

    fn family(&self, grid: Grid) -> Result<KernelFamily> {
        self.config
            .kernels
            .clone()
            .unwrap_or_default()
            .build(grid)
            .map_err(|e| Error::Config(format!("kernels: {e}")))
    }

    fn operator(&self) -> OperatorSpec {
        self.config.operator.clone().unwrap_or_default()
    }

    fn signal(&self, path: &std::path::Path) -> Result<Signal> {
        let expected = self.config.grid.map(Grid::new).transpose()?;
        io::read_signal(path, expected)
    }

    fn tol(&self) -> f64 {
        self.config.tolerances.luxemburg_rel_tol
    }
}

/// Errors caused by the inputs end the run as usage errors; anything else
/// becomes a failed check.
fn is_usage(e: &Error) -> bool {
    matches!(e, Error::Config(_) | Error::Precondition(_))
}

fn check_or_usage(log: &mut CheckLog, name: &str, r: Result<Check>) -> Result<()> {
    match r {
        Ok(c) => log.push(c),
        Err(e) if is_usage(&e) => return Err(e),
        Err(e) => log.push(Check::failed(name, &e.to_string())),
    }
    Ok(())
}

fn signal_artifact(name: &str, f: &Signal) -> (String, Vec<u8>) {
    (name.to_string(), io::signal_to_csv(f).into_bytes())
}

pub fn run(config: &RunConfig, command: &Command) -> Result<RunOutput> {
    config.validate()?;
    let ctx = Ctx { config };
    let mut log = CheckLog::default();
    let mut artifacts = Artifacts::new();
    match command {
        Command::Gen { kind, trial } => {
            let grid = ctx.grid()?;
            let fam = ctx.family(grid)?;
            let mut r = rng::stream(config.seed, *trial);
            let f = match kind {
                GenKind::White => rng::white_noise(grid, &mut r),
                GenKind::Band => rng::band_noise(&fam, &mut r),
                GenKind::Heavy => rng::heavy_band_signal(&fam, &mut r)?,
                GenKind::Mixed => rng::mixed_band_signal(&fam, &mut r, *trial)?,
            };
            artifacts.push(signal_artifact("signal.csv", &f));
            log.push(
                Check::new("generated", "finite samples", f.values().iter().all(|v| v.re.is_finite() && v.im.is_finite()))
                    .with("samples", f.len() as f64)
                    .with("l2_norm", f.l2_norm())
                    .with("max_abs", f.max_abs()),
            );
        }
        Command::Norm { input, space } => {
            let name = format!("norm_{}", space_name(space));
            let value = norm(&ctx, input, space)?;
            check_or_usage(
                &mut log,
                &name,
                value.map(|v| Check::new(&name, "finite and nonnegative", v.is_finite() && v >= 0.0).with("norm", v)),
            )?;
        }
        Command::Transform { input, mode } => transform(&ctx, input, *mode, &mut log, &mut artifacts)?,
        Command::Decompose { input } => {
            let f = ctx.signal(input)?;
            let p = ctx.exponent(f.grid())?;
            let fam = ctx.family(f.grid())?;
            let dec = atomic_decompose(&f, &p, &fam);
            let dec = match dec {
                Err(e) if is_usage(&e) => return Err(e),
                Err(e) => {
                    log.push(Check::failed("decomposition", &e.to_string()));
                    None
                }
                Ok(d) => Some(d),
            };
            if let Some(dec) = dec {
                let err = dec.reconstruct(&f).relative_l2_error(&fam.project(&f));
                log.push(
                    Check::new("reconstruction", format!("relative L2 error <= {ATOMIC_RECONSTRUCTION_TOL:e}"), err <= ATOMIC_RECONSTRUCTION_TOL)
                        .with("rel_error", err)
                        .with("atoms", dec.atoms.len() as f64),
                );
                let mut support = true;
                let mut moment = 0.0f64;
                let mut table = String::from("scale,position,generation,lambda,support_start,support_len\n");
                for a in &dec.atoms {
                    let c = atom_check_span(&a.signal, &a.support, &p, 2.0, dec.moment_degree)?;
                    support &= c.support;
                    moment = moment.max(c.max_moment);
                    table.push_str(&format!(
                        "{},{},{:?},{:e},{},{}\n",
                        a.cube.scale,
                        a.cube.position,
                        a.generation,
                        a.lambda,
                        a.support.start(),
                        a.support.len()
                    ));
                }
                artifacts.push(("atoms.csv".into(), table.into_bytes()));
                log.push(Check::new("support", "every atom inside 5Q", support));
                log.push(
                    Check::new("moments", format!("max |moment| / ||a||_inf <= {MOMENT_TOL:e}"), moment <= MOMENT_TOL)
                        .with("max_moment", moment)
                        .with("degree", dec.moment_degree as f64),
                );
            }
        }
        Command::Pair { f, g } => {
            let f = ctx.signal(f)?;
            let g = io::read_signal(g, Some(f.grid()))?;
            let p = ctx.exponent(f.grid())?;
            let fam = ctx.family(f.grid())?;
            let r = (|| -> Result<Check> {
                let l = pairing(&f, &g, &fam)?;
                let h = hardy_norm(&f, &p, &fam)?;
                let c = cmo_norm(&g, &p, &fam, CmoForm::Integral)?;
                let ratio = if h * c > 0.0 { l.norm() / (h * c) } else { 0.0 };
                Ok(Check::new("pairing", "finite", l.re.is_finite() && l.im.is_finite())
                    .with("re", l.re)
                    .with("im", l.im)
                    .with("abs", l.norm())
                    .with("hardy_f", h)
                    .with("cmo_g", c)
                    .with("ratio", ratio))
            })();
            check_or_usage(&mut log, "pairing", r)?;
        }
        Command::CzoApply { input } => {
            let f = ctx.signal(input)?;
            let op = ctx.operator().build(f.grid())?;
            let tf = apply(&op, &f)?;
            artifacts.push(signal_artifact("czo_output.csv", &tf));
            let p = ctx.exponent(f.grid())?;
            let fam = ctx.family(f.grid())?;
            let r = (|| -> Result<Check> {
                let before = cmo_norm(&fam.project(&f), &p, &fam, CmoForm::Integral)?;
                let after = cmo_norm(&fam.project(&tf), &p, &fam, CmoForm::Integral)?;
                Ok(Check::new("czo_apply", "finite output", tf.values().iter().all(|v| v.re.is_finite() && v.im.is_finite()))
                    .with("l2_in", f.l2_norm())
                    .with("l2_out", tf.l2_norm())
                    .with("cmo_in", before)
                    .with("cmo_out", after))
            })();
            check_or_usage(&mut log, "czo_apply", r)?;
        }
        Command::CzoExperiment => {
            let grid = ctx.grid()?;
            let op = ctx.operator().build(grid)?;
            let p = ctx.exponent(grid)?;
            let fam = ctx.family(grid)?;
            let r = czo_cmo_experiment(&op, &p, &fam, config.trials.unwrap_or(100), config.seed).map(|r| {
                Check::new("czo_experiment", "finite max ratio", r.max_ratio.is_finite())
                    .with("max_ratio", r.max_ratio)
                    .with("trials_used", r.trials_used as f64)
                    .with("adjoint_error", r.adjoint_error)
            });
            check_or_usage(&mut log, "czo_experiment", r)?;
        }
        Command::Verify { suites } => {
            let suites: Vec<Suite> = if suites.iter().any(|s| s == "all") {
                Suite::ALL.to_vec()
            } else {
                suites.iter().map(|s| Suite::from_name(s)).collect::<Result<_>>()?
            };
            let params = SuiteParams {
                seed: config.seed,
                trials: config.trials,
                grid: config.grid,
                exponent: config.exponent.clone(),
                kernels: config.kernels.clone(),
                operator: config.operator.clone(),
            };
            for s in suites {
                let mut sub = run_suite(s, &params)?;
                sub.prefix(s.name());
                log.extend(sub);
            }
        }
    }
    let mut echo = serde_json::to_value(config).expect("config serializes");
    if let serde_json::Value::Object(m) = &mut echo {
        m.remove("out");
        m.insert("command".into(), serde_json::to_value(command).expect("command serializes"));
    }
    let (checks, timings) = log.into_parts();
    Ok(RunOutput {
        report: Report::new(echo, checks),
        timings,
        artifacts,
    })
}

fn space_name(s: &Space) -> &'static str {
    match s {
        Space::Lp => "lp",
        Space::Hardy => "hardy",
        Space::Cmo => "cmo",
        Space::CmoDiscrete => "cmo_discrete",
        Space::S => "s",
        Space::C => "c",
        Space::Campanato { .. } => "campanato",
        Space::Zygmund { .. } => "zygmund",
    }
}

/// Outer error: usage problem. Inner: numeric outcome.
fn norm(ctx: &Ctx, input: &std::path::Path, space: &Space) -> Result<Result<f64>> {
    if let Space::S | Space::C = space {
        let grid = ctx.grid()?;
        let field = io::read_field(input, grid)?;
        let p = ctx.exponent(grid)?;
        return Ok(match space {
            Space::S => seq_s_norm(&field, &p),
            _ => seq_c_norm(&field, &p),
        });
    }
    let f = ctx.signal(input)?;
    let grid = f.grid();
    let p = ctx.exponent(grid)?;
    let value = match space {
        Space::Lp => luxemburg_norm(&f, &p, ctx.tol()),
        Space::Hardy => hardy_norm(&f, &p, &ctx.family(grid)?),
        Space::Cmo => cmo_norm(&f, &p, &ctx.family(grid)?, CmoForm::Integral),
        Space::CmoDiscrete => cmo_norm(&f, &p, &ctx.family(grid)?, CmoForm::Discrete(Default::default())),
        Space::Campanato { q, d } => campanato_norm(&f, &p, *q, *d),
        Space::Zygmund { d } => zygmund_norm(&f, &p, *d),
        Space::S | Space::C => unreachable!("handled above"),
    };
    match value {
        Err(e) if is_usage(&e) => Err(e),
        other => Ok(other),
    }
}

fn transform(ctx: &Ctx, input: &std::path::Path, mode: TransformMode, log: &mut CheckLog, artifacts: &mut Artifacts) -> Result<()> {
    match mode {
        TransformMode::Analyze => {
            let f = ctx.signal(input)?;
            let fam = ctx.family(f.grid())?;
            let s = analyze(&f, &fam)?;
            artifacts.push(("coefficients.txt".into(), s.to_text().into_bytes()));
            log.push(Check::new("analyze", "coefficients written", true).with("coefficients", s.len() as f64));
        }
        TransformMode::Synthesize => {
            let grid = ctx.grid()?;
            let fam = ctx.family(grid)?;
            let s = io::read_field(input, grid)?;
            let f = synthesize(&s, &fam).map_err(|e| Error::Config(e.to_string()))?;
            artifacts.push(signal_artifact("signal.csv", &f));
            log.push(Check::new("synthesize", "signal written", true).with("l2_norm", f.l2_norm()));
        }
        TransformMode::Roundtrip => {
            let f = ctx.signal(input)?;
            let fam = ctx.family(f.grid())?;
            let r = reconstruction_error(&f, &fam).map(|r| {
                Check::new("roundtrip", format!("relative L2 error <= {RECONSTRUCTION_TOL:e}"), !r.degenerate && r.error <= RECONSTRUCTION_TOL)
                    .with("rel_error", r.error)
            });
            check_or_usage(log, "roundtrip", r)?;
        }
    }
    Ok(())
}
