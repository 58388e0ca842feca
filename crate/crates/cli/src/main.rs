use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hetsol_cli::commands::{self, HarmonicInput, LinearizeOptions, SearchOptions};
use hetsol_cli::samples::SampleSet;
use hetsol_cli::report::{write_csv, write_text};
use hetsol_cli::{Report, SuiteConfig};
use hetsol_core::chartfield::Point;
use hetsol_core::scalar::parse_rational;
use hetsol_core::{Error, Mode, Rational, Result};

/// Verification suites for torsionless three-dimensional heterotic solitons.
#[derive(Parser, Debug)]
#[command(name = "hetsol", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON suite configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Arithmetic mode (overrides HETSOL_MODE and the config file).
    #[arg(long, global = true)]
    mode: Option<Mode>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Where to write the JSON report (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// CSV export of the command's main table.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the identity suites.
    Verify {
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Constant-dilaton classification for a coupling.
    Classify {
        #[arg(long, value_parser = rational, default_value = "1", allow_hyphen_values = true)]
        kappa: Rational,
    },
    /// Finite-difference sweeps of the linearisation and the essential-deformation chain.
    Linearize {
        #[arg(long, value_parser = rational, default_value = "1", allow_hyphen_values = true)]
        kappa: Rational,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        /// Quadrature nodes per axis for the gauge pairing.
        #[arg(long, default_value_t = 5)]
        nodes: u32,
    },
    /// Harmonic-curvature reduction at sample points of a chart.
    Harmonic {
        /// Chart description file (default: the ball with e^{2phi} = 48/kappa).
        #[arg(long)]
        chart: Option<PathBuf>,
        /// Sample point `x,y,z` with rational coordinates; repeatable.
        #[arg(long = "point", value_parser = point)]
        points: Vec<Point>,
        /// Algebraic samples (metric, Ricci, dphi, e^{2phi}) instead of a chart.
        #[arg(long, conflicts_with_all = ["chart", "points"])]
        samples: Option<PathBuf>,
        #[arg(long, value_parser = rational, default_value = "1", allow_hyphen_values = true)]
        kappa: Rational,
    },
    /// Levenberg-Marquardt soliton search over homogeneous families.
    Search {
        /// Family name; repeatable (default: the whole catalogue).
        #[arg(long = "family")]
        families: Vec<String>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        kappa: f64,
        /// Starting `a,e2phi`.
        #[arg(long, value_parser = pair, default_value = "1.5,30")]
        start: [f64; 2],
        /// Extra random starts.
        #[arg(long, default_value_t = 0)]
        restarts: usize,
        /// Grid points per axis.
        #[arg(long, default_value_t = 20)]
        grid: usize,
        #[arg(long)]
        catalogue: Option<PathBuf>,
        /// CSV export of the objective grid.
        #[arg(long)]
        grid_csv: Option<PathBuf>,
    },
}

fn rational(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn point(s: &str) -> std::result::Result<Point, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got `{s}`"));
    }
    let c: Vec<Rational> = parts.iter().map(|p| rational(p)).collect::<std::result::Result<_, _>>()?;
    Ok([c[0].clone(), c[1].clone(), c[2].clone()])
}

fn pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected a,e2phi, got `{s}`"))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok([p(a)?, p(b)?])
}

fn load_config(c: &Common) -> Result<SuiteConfig> {
    let mut cfg = match &c.config {
        Some(p) => SuiteConfig::load(p)?,
        None => SuiteConfig::default(),
    }
    .with_env()?;
    if let Some(m) = c.mode {
        cfg.mode = m;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Report> {
    let mut cfg = load_config(&cli.common)?;
    let csv = cli.common.csv.as_deref();
    let report = match cli.command {
        Command::Verify { trials } => {
            if let Some(t) = trials {
                cfg.trials = t;
            }
            commands::verify(&cfg)?
        }
        Command::Classify { kappa } => commands::classify(&cfg, &kappa)?,
        Command::Linearize { kappa, samples, step, nodes } => {
            let (rep, rows) = commands::linearize(&cfg, &LinearizeOptions { kappa, samples, step, nodes })?;
            if let Some(p) = csv {
                write_csv(p, &rows)?;
            }
            rep
        }
        Command::Harmonic { chart, points, samples, kappa } => {
            if let Some(path) = samples {
                let set = SampleSet::load(&path)?;
                commands::harmonic(&cfg, HarmonicInput::Samples(&set), &kappa)?
            } else {
                if chart.is_some() {
                    cfg.chart = chart;
                }
                let chart = cfg.chart()?;
                let points = if points.is_empty() { commands::default_points() } else { points };
                commands::harmonic(&cfg, HarmonicInput::Chart(chart.as_ref(), &points), &kappa)?
            }
        }
        Command::Search { families, kappa, start, restarts, grid, catalogue, grid_csv } => {
            if catalogue.is_some() {
                cfg.catalogue = catalogue;
            }
            let opts = SearchOptions { families, kappa, start, restarts, grid };
            let (rep, tables) = commands::search(&cfg, &opts)?;
            if let Some(p) = csv {
                write_csv(p, &tables.history)?;
            }
            if let Some(p) = grid_csv {
                write_csv(&p, &tables.grid)?;
            }
            rep
        }
    };
    if let (Some(p), "verify" | "classify" | "harmonic") = (csv, report.command.as_str()) {
        report.write_records_csv(p)?;
    }
    write_text(cli.common.out.as_deref(), &report.to_json())?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(rep) => {
            let s = &rep.summary;
            eprintln!("hetsol {}: {}/{} checks passed", rep.command, s.passed, s.total);
            if let Some(f) = &s.first_failure {
                eprintln!("first failure: {f}");
            }
            if rep.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let kind = match e {
                Error::Config(_) | Error::Parse(_) => "configuration error",
                _ => "error",
            };
            eprintln!("hetsol: {kind}: {e}");
            ExitCode::from(2)
        }
    }
}
