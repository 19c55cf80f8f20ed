use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rwharm::commands::{self, Geometry, MonteCarlo, Outcome, Prescription, Target, VerifyOptions, EXIT_INPUT};
use rwharm::io::{self, ModelJson};
use rwharm_core::oracle::Survival;
use rwharm_core::prescribe::Target3D;
use rwharm_core::rational::parse_rational;
use rwharm_core::Rational;

#[derive(Parser)]
#[command(
    name = "rwharm",
    version,
    about = "Discrete harmonic polynomials for zero-drift walks in orthants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report to this file as well as stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Suppress the human-readable summary on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
}

#[derive(Args, Clone, Copy)]
struct GeometryArgs {
    /// Largest Coxeter order tried when matching angles to pi/m.
    #[arg(long, default_value_t = rwharm_core::cone::DEFAULT_N_MAX)]
    n_max: u32,
    /// Angle matching tolerance.
    #[arg(long, default_value_t = rwharm_core::cone::DEFAULT_TOL)]
    tol: f64,
    /// Bits of working precision for whitening and irrational targets.
    #[arg(long, env = "RWHARM_PRECISION", default_value_t = 128)]
    precision: u32,
}

impl From<GeometryArgs> for Geometry {
    fn from(a: GeometryArgs) -> Self {
        Geometry {
            n_max: a.n_max,
            tol: a.tol,
            precision_bits: a.precision,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Open,
    Closed,
}

#[derive(Subcommand)]
enum Command {
    /// Drift, covariance, wall angles and Coxeter verdict of a model.
    Analyze {
        model: PathBuf,
        #[command(flatten)]
        geometry: GeometryArgs,
    },
    /// Minimal-degree harmonic polynomial vanishing on the coordinate hyperplanes.
    Harmonic {
        model: PathBuf,
        #[arg(long, default_value_t = rwharm_core::harmonic::DEFAULT_R_MAX)]
        r_max: u32,
        /// Write a LaTeX snippet of the polynomial to this file.
        #[arg(long)]
        latex: Option<PathBuf>,
        #[command(flatten)]
        geometry: GeometryArgs,
    },
    /// Check a function against the one-step relation and exact killed expectations.
    Verify {
        model: PathBuf,
        /// Polynomial JSON file (a harmonic report is accepted).
        #[arg(required_unless_present = "builtin")]
        poly: Option<PathBuf>,
        /// Use a built-in function instead of a polynomial file.
        #[arg(long, value_parser = ["long-jump"], conflicts_with = "poly")]
        builtin: Option<String>,
        #[arg(long, default_value_t = 1)]
        grid_lo: i64,
        #[arg(long, default_value_t = 8)]
        grid_hi: i64,
        /// Expectations are checked after 1..=STEPS steps.
        #[arg(long, default_value_t = 2)]
        steps: u32,
        #[arg(long, value_enum, default_value = "open")]
        survival: Convention,
        /// Also compare a Monte Carlo survival estimate with the exact value.
        #[arg(long, requires = "seed")]
        mc_samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Group invariance and discrete harmonicity of P0 for a planar model.
    P0check {
        model: PathBuf,
        #[arg(long, default_value_t = 8)]
        grid: i64,
        #[arg(long, default_value_t = rwharm_core::harmonic::DEFAULT_R_MAX)]
        r_max: u32,
        #[command(flatten)]
        geometry: GeometryArgs,
    },
    /// Build a model with a prescribed normalized covariance.
    Prescribe {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
        dim: u8,
        #[arg(long)]
        a2: Option<String>,
        #[arg(long)]
        b2: Option<String>,
        #[arg(long)]
        c2: Option<String>,
        /// The product abc, needed when a, b, c are all nonzero and abc is not a perfect square root.
        #[arg(long, conflicts_with = "float")]
        abc: Option<String>,
        /// Floating-point targets a,b,c (converted exactly to dyadic rationals).
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["a2", "b2", "c2"])]
        float: Option<Vec<f64>>,
        /// Write only the model JSON to this file.
        #[arg(long)]
        model_out: Option<PathBuf>,
        #[command(flatten)]
        geometry: GeometryArgs,
    },
    /// Member of the one-parameter family with fixed covariance.
    Family {
        #[arg(long)]
        cos2: String,
        #[arg(long)]
        t2: String,
        /// Weight of the second block; gives a three-dimensional model.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        model_out: Option<PathBuf>,
        #[command(flatten)]
        geometry: GeometryArgs,
    },
}

fn rational_arg(name: &str, text: &str) -> Result<Rational> {
    parse_rational(text).with_context(|| format!("--{name}: {text:?} is not an exact fraction p/q"))
}

fn optional_rational(name: &str, text: &Option<String>) -> Result<Option<Rational>> {
    text.as_deref().map(|t| rational_arg(name, t)).transpose()
}

fn write_model(path: &Option<PathBuf>, outcome: &Outcome) -> Result<()> {
    if let (Some(path), Some(model)) = (path, outcome.json.get("model").filter(|m| !m.is_null())) {
        let model: ModelJson = serde_json::from_value(model.clone())?;
        write_json(path, &serde_json::to_value(model)?)?;
    }
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("cannot write {}", path.display()))
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Analyze { model, geometry } => commands::analyze(&io::load_model(model)?, &(*geometry).into()),
        Command::Harmonic {
            model,
            r_max,
            latex,
            geometry,
        } => {
            let outcome = commands::harmonic(&io::load_model(model)?, *r_max, &(*geometry).into())?;
            if let (Some(path), Some(tex)) = (latex, outcome.json.get("latex").and_then(|v| v.as_str())) {
                fs::write(path, format!("$$P(i,j) = {tex}$$\n"))
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            Ok(outcome)
        }
        Command::Verify {
            model,
            poly,
            builtin,
            grid_lo,
            grid_hi,
            steps,
            survival,
            mc_samples,
            seed,
        } => {
            let s = io::load_model(model)?;
            let p = poly.as_deref().map(io::load_poly).transpose()?;
            let target = match (&p, builtin) {
                (Some(p), _) => Target::Poly(p),
                (None, Some(_)) => Target::LongJump,
                (None, None) => bail!("a polynomial file or --builtin is required"),
            };
            let opts = VerifyOptions {
                grid: (*grid_lo, *grid_hi),
                steps: *steps,
                survival: match survival {
                    Convention::Open => Survival::OpenOrthant,
                    Convention::Closed => Survival::ClosedOrthant,
                },
                monte_carlo: match (mc_samples, seed) {
                    (Some(samples), Some(seed)) => Some(MonteCarlo {
                        samples: *samples,
                        seed: *seed,
                    }),
                    _ => None,
                },
            };
            commands::verify(&s, &target, &opts)
        }
        Command::P0check {
            model,
            grid,
            r_max,
            geometry,
        } => commands::p0check(&io::load_model(model)?, *grid, *r_max, &(*geometry).into()),
        Command::Prescribe {
            dim,
            a2,
            b2,
            c2,
            abc,
            float,
            model_out,
            geometry,
        } => {
            let p = if *dim == 2 {
                let Some(d_sq) = optional_rational("a2", a2)? else {
                    bail!("--dim 2 needs --a2 (the squared correlation)")
                };
                Prescription::Planar { d_sq }
            } else if let Some(f) = float {
                if f.len() != 3 {
                    bail!("--float needs exactly three values a,b,c");
                }
                Prescription::Spatial(Box::new(Target3D::from_floats(f[0], f[1], f[2])?))
            } else {
                let zero = Rational::from_integer(0.into());
                let get = |name: &str, v: &Option<String>| -> Result<Rational> {
                    Ok(optional_rational(name, v)?.unwrap_or_else(|| zero.clone()))
                };
                Prescription::Spatial(Box::new(Target3D::exact(
                    get("a2", a2)?,
                    get("b2", b2)?,
                    get("c2", c2)?,
                    optional_rational("abc", abc)?,
                )?))
            };
            let outcome = commands::prescribe(&p, &(*geometry).into())?;
            write_model(model_out, &outcome)?;
            Ok(outcome)
        }
        Command::Family {
            cos2,
            t2,
            alpha,
            model_out,
            geometry,
        } => {
            let alpha = optional_rational("alpha", alpha)?;
            let outcome = commands::family(
                &rational_arg("cos2", cos2)?,
                &rational_arg("t2", t2)?,
                alpha.as_ref(),
                &(*geometry).into(),
            )?;
            write_model(model_out, &outcome)?;
            Ok(outcome)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli).and_then(|outcome| {
        if let Some(path) = &cli.output {
            write_json(path, &outcome.json)?;
        }
        Ok(outcome)
    }) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.json).expect("JSON value serializes");
            // a closed pipe is not an error worth reporting
            let _ = writeln!(std::io::stdout(), "{text}");
            if !cli.quiet {
                eprintln!("{}", outcome.summary);
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
