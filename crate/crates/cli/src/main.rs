//! `orbifold-morse`: critical data, inertia sectors, Morse polynomials and
//! inequalities from the command line.
//!
//! Exit codes: 0 on success, 1 on domain errors (degenerate critical point,
//! non-lacunary polynomial, inconsistent inequality under `--strict`, ...),
//! 2 on input errors (unreadable or invalid files, bad arguments).

mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use nalgebra::DVector;

use orbifold_morse::builtin::{self, ExampleSpec, Fixture};
use orbifold_morse::critical::{assert_morse, CriticalError};
use orbifold_morse::flowlab::{random_seeds, Field, FlowLab};
use orbifold_morse::formats::{self, ModelFile};
use orbifold_morse::inequalities::{assemble_even_ranks, betti_from_lacunary, check_inequality, ResolutionLevel};
use orbifold_morse::morse_poly::{
    inertia_morse_polynomial, inertia_sectors, morse_polynomial, orbifold_morse_polynomial,
    representability_certificate, ExponentPolynomial,
};
use orbifold_morse::{CriticalPoint, Model};

#[derive(Parser)]
#[command(name = "orbifold-morse", version, about = "Morse theory on global-quotient orbifold charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find and analyze the critical points of a model file.
    Analyze {
        model: PathBuf,
        /// Print the critical-data file instead of a table.
        #[arg(long)]
        json: bool,
        /// Also report seed statistics, isolation and representability.
        #[arg(long)]
        certify: bool,
        /// Write the critical-data file here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Inertia sectors of a critical-data file.
    Inertia {
        data: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// A Morse polynomial of a critical-data file (ordinary by default).
    Poly {
        data: PathBuf,
        #[arg(long, group = "kind")]
        plain: bool,
        #[arg(long, group = "kind")]
        inertia: bool,
        #[arg(long, group = "kind")]
        orbifold: bool,
        #[arg(long)]
        json: bool,
    },
    /// Morse inequalities `M = P + (1 + t) R` for two polynomial files.
    Check {
        morse: PathBuf,
        poincare: PathBuf,
        /// Exit with status 1 when the pair is inconsistent.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        json: bool,
    },
    /// Betti numbers of a lacunary polynomial, or total ranks of resolution levels.
    Betti {
        input: PathBuf,
        /// The input is an array of resolution levels.
        #[arg(long)]
        levels: bool,
        #[arg(long)]
        json: bool,
    },
    /// Integrate a gradient flow, or run a basin census with --seeds.
    Flow {
        model: PathBuf,
        /// Start point, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        /// neg, pos or unit.
        #[arg(long, default_value = "neg")]
        field: Field,
        #[arg(long, default_value_t = 50.0)]
        tmax: f64,
        /// Number of random seeds for a basin census.
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Write a builtin example: kummer, kummer-data, wps <weights..>, teardrop, k3.
    Example {
        name: String,
        params: Vec<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Errors sorted by exit status.
enum Failure {
    Domain(anyhow::Error),
    Input(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

fn domain(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Domain(e.into())
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(text: &str, output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(p) => fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_model(path: &Path) -> anyhow::Result<Model> {
    let text = read(path)?;
    let file = ModelFile::from_json(&text).with_context(|| path.display().to_string())?;
    file.to_model::<f64>().with_context(|| path.display().to_string())
}

fn load_points(path: &Path) -> anyhow::Result<Vec<CriticalPoint>> {
    let text = read(path)?;
    let data = formats::critical_data_from_json(&text).with_context(|| path.display().to_string())?;
    formats::points_from_data::<f64>(&data).with_context(|| path.display().to_string())
}

/// A polynomial file holds either a JSON map `{"2": 22, ...}` or the display
/// form `1 + 22*t^2 + t^4`.
fn load_polynomial(path: &Path) -> anyhow::Result<ExponentPolynomial> {
    let text = read(path)?;
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        return serde_json::from_str(trimmed).with_context(|| path.display().to_string());
    }
    trimmed.parse().map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn is_domain_critical(e: &CriticalError) -> bool {
    matches!(e, CriticalError::DegenerateCriticalPoint { .. } | CriticalError::SplitNotInvariant { .. })
}

fn cmd_analyze(model: &Path, json: bool, certify: bool, output: Option<&Path>) -> CmdResult {
    let model = load_model(model)?;
    let cert = match assert_morse(&model) {
        Ok(c) => c,
        Err(e) if is_domain_critical(&e) => return Err(domain(e)),
        Err(e) => return Err(e.into()),
    };
    let data = formats::data_from_points(&cert.points);
    let data_json = formats::critical_data_to_json(&data);
    if let Some(p) = output {
        emit(&data_json, Some(p))?;
    }
    if json {
        if certify {
            let doc = serde_json::json!({
                "critical_points": data,
                "certificate": render::certificate_json(&cert, representability_certificate(&cert.points)),
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        } else {
            println!("{data_json}");
        }
    } else {
        print!("{}", render::critical_table(&cert.points));
        if certify {
            print!("{}", render::certificate_text(&cert, representability_certificate(&cert.points)));
        }
    }
    Ok(())
}

fn cmd_inertia(data: &Path, json: bool) -> CmdResult {
    let points = load_points(data)?;
    let sectors = inertia_sectors(&points, None).map_err(domain)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&sectors)?);
    } else {
        print!("{}", render::sector_table(&sectors));
    }
    Ok(())
}

fn cmd_poly(data: &Path, inertia: bool, orbifold: bool, json: bool) -> CmdResult {
    let points = load_points(data)?;
    let poly = if inertia || orbifold {
        let sectors = inertia_sectors(&points, None).map_err(domain)?;
        if orbifold {
            orbifold_morse_polynomial(&sectors).map_err(domain)?
        } else {
            inertia_morse_polynomial(&sectors)
        }
    } else {
        morse_polynomial(&points)
    };
    if json {
        println!("{}", serde_json::to_string(&poly)?);
    } else {
        println!("{poly}");
    }
    Ok(())
}

fn cmd_check(morse: &Path, poincare: &Path, strict: bool, json: bool) -> CmdResult {
    let report = check_inequality(&load_polynomial(morse)?, &load_polynomial(poincare)?);
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", render::report_text(&report));
    }
    if strict && !report.consistent {
        return Err(domain(anyhow!(report.reason.unwrap_or_else(|| "inconsistent".into()))));
    }
    Ok(())
}

fn cmd_betti(input: &Path, levels: bool, json: bool) -> CmdResult {
    let dims = if levels {
        let text = read(input)?;
        let levels: Vec<ResolutionLevel> = serde_json::from_str(&text).with_context(|| input.display().to_string())?;
        assemble_even_ranks(&levels).map_err(domain)?
    } else {
        betti_from_lacunary(&load_polynomial(input)?).map_err(domain)?
    };
    if json {
        println!("{}", serde_json::to_string(&dims)?);
    } else {
        print!("{}", render::betti_text(&dims));
    }
    Ok(())
}

fn parse_point(text: &str, dim: usize) -> anyhow::Result<DVector<f64>> {
    let vals = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad coordinate '{s}'")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    if vals.len() != dim {
        return Err(anyhow!("--x0 has {} coordinates, model has dimension {dim}", vals.len()));
    }
    Ok(DVector::from_vec(vals))
}

fn cmd_flow(model: &Path, x0: Option<&str>, field: Field, tmax: f64, seeds: Option<usize>, json: bool) -> CmdResult {
    let model = load_model(model)?;
    let (lab, _cert) = match FlowLab::certify(&model) {
        Ok(v) => v,
        Err(orbifold_morse::flowlab::FlowError::Critical(e)) if !is_domain_critical(&e) => return Err(e.into()),
        Err(e) => return Err(domain(e)),
    };
    if let Some(count) = seeds {
        let starts = random_seeds(&model, count, model.seeds().rng_seed);
        let census = lab.basin_census(&starts, tmax);
        if json {
            println!("{}", serde_json::to_string_pretty(&render::census_json(&lab, &census))?);
        } else {
            print!("{}", render::census_text(&lab, &census));
        }
        return Ok(());
    }
    let x0 = match x0 {
        Some(t) => parse_point(t, model.dim())?,
        None => random_seeds(&model, 1, model.seeds().rng_seed).remove(0),
    };
    let traj = lab.integrate(&x0, field, tmax).map_err(domain)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&render::trajectory_json(&lab, &traj))?);
    } else {
        print!("{}", render::trajectory_text(&lab, &traj));
    }
    Ok(())
}

fn cmd_example(name: &str, params: &[u64], output: Option<&Path>) -> CmdResult {
    let example = match name {
        "kummer" => ExampleSpec::Kummer,
        "kummer-data" => {
            emit(&formats::critical_data_to_json(&builtin::kummer_critical_data()), output)?;
            return Ok(());
        }
        "wps" | "weighted-projective" => ExampleSpec::WeightedProjective(params.to_vec()),
        "teardrop" => ExampleSpec::Teardrop,
        "k3" => ExampleSpec::K3Resolution,
        other => return Err(anyhow!("unknown example '{other}' (kummer, kummer-data, wps, teardrop, k3)").into()),
    };
    let text = match example.generate()? {
        Fixture::Model(m) => m.to_json(),
        Fixture::CriticalData(d) => formats::critical_data_to_json(&d),
        Fixture::Levels(l) => serde_json::to_string_pretty(&l)?,
    };
    emit(&text, output)?;
    Ok(())
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("ORBIFOLD_MORSE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| anyhow!("ORBIFOLD_MORSE_THREADS must be a non-negative integer, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    configure_threads()?;
    match cli.command {
        Command::Analyze { model, json, certify, output } => cmd_analyze(&model, json, certify, output.as_deref()),
        Command::Inertia { data, json } => cmd_inertia(&data, json),
        Command::Poly { data, plain: _, inertia, orbifold, json } => cmd_poly(&data, inertia, orbifold, json),
        Command::Check { morse, poincare, strict, json } => cmd_check(&morse, &poincare, strict, json),
        Command::Betti { input, levels, json } => cmd_betti(&input, levels, json),
        Command::Flow { model, x0, field, tmax, seeds, json } => {
            cmd_flow(&model, x0.as_deref(), field, tmax, seeds, json)
        }
        Command::Example { name, params, output } => cmd_example(&name, &params, output.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
