//! Command-line front end: parses arguments, runs one experiment and writes
//! its table as CSV (plus an optional SVG plot).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use collapse_lab_core::dynamics::{closed_form_trajectory, integrate};
use collapse_lab_core::ensemble::{run_ensemble_with_threads, Engine};
use collapse_lab_core::experiments::chsh::{chsh_value, ChshSetting};
use collapse_lab_core::experiments::interference::{
    interference_pattern, interference_pattern_exact, linspace, wavenumber, InterferenceSpec, Source,
};
use collapse_lab_core::experiments::malus::{malus_deviation_curve, MalusSpec};
use collapse_lab_core::experiments::tau::estimate_tau;
use collapse_lab_core::io::config::{parse_config, required_keys, RunConfig};
use collapse_lab_core::io::csv::{write_csv, CsvError, CsvTable};
use collapse_lab_core::io::svg::{render_svg, Plot};
use collapse_lab_core::io::tables;
use collapse_lab_core::model::BranchSigns;
use collapse_lab_core::Error;

pub const THREADS_ENV: &str = "COLLAPSE_LAB_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "collapse-lab", version, about = "Phase-driven collapse dynamics of two-state systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weights x1, x2 and q = x1 - x2 along one trajectory.
    Collapse(CollapseArgs),
    /// Outcome statistics over many sampled phase pairs.
    Ensemble(EnsembleArgs),
    /// Transmission through a second polarizer relative to Malus's law.
    Malus(MalusArgs),
    /// CHSH value of the spin singlet.
    Chsh(ChshArgs),
    /// Screen intensity of point sources with independent phases.
    Interfere(InterfereArgs),
    /// Reduction-time scale hbar / E of a photon.
    EstimateTau(TauArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// CSV destination (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG line plot here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CollapseArgs {
    #[arg(long)]
    config: PathBuf,
    /// Branch signs, e.g. `+-`.
    #[arg(long, allow_hyphen_values = true)]
    signs: Option<String>,
    /// Horizon in units of tau_r.
    #[arg(long)]
    t_end: Option<f64>,
    /// Step in units of tau_r.
    #[arg(long)]
    step: Option<f64>,
    /// Report time in seconds instead of tau_r units.
    #[arg(long)]
    seconds: bool,
    /// Use the closed form instead of integrating the phase dynamics.
    #[arg(long)]
    closed_form: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct EnsembleArgs {
    #[arg(long)]
    config: PathBuf,
    /// Number of trajectories (overrides the config).
    #[arg(long)]
    n: Option<u64>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct MalusArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Polarizer angles in degrees.
    #[arg(long, value_delimiter = ',')]
    angles: Option<Vec<f64>>,
    /// Horizon in units of tau_r.
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ChshArgs {
    /// A = Z, A' = X, B = -(Z + X)/sqrt 2, B' = (Z - X)/sqrt 2.
    #[arg(long, conflicts_with = "angles")]
    paper_setting: bool,
    /// Four measurement angles a,a',b,b' in the x-z plane, degrees.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    angles: Option<Vec<f64>>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct InterfereArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// m.
    #[arg(long)]
    wavelength: Option<f64>,
    /// Separation of two symmetric sources, m.
    #[arg(long)]
    separation: Option<f64>,
    /// Source phases in rad, one per source.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    phases: Option<Vec<f64>>,
    /// Source-to-screen distance, m.
    #[arg(long)]
    distance: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    screen_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    screen_max: Option<f64>,
    #[arg(long)]
    points: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct TauArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Photon wavelength, m.
    #[arg(long)]
    wavelength: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFiniteState { .. }
            | Error::ResampleExhausted(_)
            | Error::SingularDenominator(_)
            | Error::ZeroVariance(_)
            | Error::DegeneratePhase { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<CsvError> for CliError {
    fn from(e: CsvError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Worker count from `COLLAPSE_LAB_THREADS` (0 or unset = automatic).
pub fn threads_from_env() -> CliResult<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("{THREADS_ENV}={v} is not a nonnegative integer"))),
        Err(_) => Ok(0),
    }
}

fn load_config(path: &Path, subcommand: &str) -> CliResult<RunConfig> {
    parse_config(path, required_keys(subcommand)).map_err(|e| CliError::Validation(e.to_string()))
}

fn load_optional(path: Option<&PathBuf>, subcommand: &str) -> CliResult<RunConfig> {
    path.map_or(Ok(RunConfig::default()), |p| load_config(p, subcommand))
}

fn emit(table: &CsvTable, plot: Option<Plot>, output: &OutputArgs, stdout: &mut dyn Write) -> CliResult<()> {
    match &output.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
            write_csv(table, BufWriter::new(file))?;
        }
        None => write_csv(table, &mut *stdout)?,
    }
    if let (Some(path), Some(plot)) = (&output.svg, plot) {
        std::fs::write(path, render_svg(&plot))
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn run_collapse(args: &CollapseArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = load_config(&args.config, "collapse")?;
    let config = cfg.two_state_config()?;
    let signs: BranchSigns = match (&args.signs, cfg.signs()?) {
        (Some(s), _) => s.parse()?,
        (None, Some(s)) => s,
        (None, None) => return Err(CliError::Validation("branch signs needed: pass --signs or set `signs`".into())),
    };
    let mut settings = cfg.integrator_settings()?;
    if let Some(t) = args.t_end {
        settings.t_end = t * config.tau_r;
    }
    if let Some(h) = args.step {
        settings.step = h * config.tau_r;
    }
    settings.validate()?;
    let traj = if args.closed_form {
        closed_form_trajectory(&config, signs, &settings)?
    } else {
        integrate(&config, signs, &cfg.phase_model()?, &settings)?
    };
    let table = tables::collapse_table(&traj, config.tau_r, args.seconds);
    let plot = args.output.svg.as_ref().map(|_| {
        tables::plot_columns(&table, &format!("collapse, signs {signs}"), "t", &["x1", "x2", "q"])
    });
    emit(&table, plot, &args.output, stdout)
}

fn run_ensemble_cmd(args: &EnsembleArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let cfg = load_config(&args.config, "ensemble")?;
    let config = cfg.two_state_config()?;
    let mut sampling = cfg.sampling_spec()?;
    if let Some(n) = args.n {
        sampling.n_trajectories = n;
    }
    if let Some(s) = args.seed {
        sampling.master_seed = s;
    }
    sampling.validate()?;
    let settings = cfg.integrator_settings()?;
    let stats = run_ensemble_with_threads(&config, &sampling, &settings, threads_from_env()?)?;
    if let Some(m) = stats.mean_reduction_time {
        let _ = writeln!(stderr, "mean reduction time: {} tau_r", m / config.tau_r);
    }
    if sampling.engine == Engine::Rk4 {
        let _ = writeln!(stderr, "engine: rk4");
    }
    let table = tables::ensemble_table(&stats, config.x0);
    let plot = args.output.svg.as_ref().map(|_| {
        let mut p = Plot {
            title: format!("ensemble of {}", stats.n_trajectories),
            x_label: "outcome index".into(),
            y_label: "frequency".into(),
            series: Vec::new(),
        };
        let freq = table.float_column("frequency");
        let exp = table.float_column("expected");
        p.series.push(collapse_lab_core::io::svg::Series::new(
            "frequency",
            freq.iter().enumerate().map(|(i, v)| (i as f64, *v)).collect(),
        ));
        p.series.push(collapse_lab_core::io::svg::Series::new(
            "expected",
            exp.iter().enumerate().map(|(i, v)| (i as f64, *v)).collect(),
        ));
        p
    });
    emit(&table, plot, &args.output, stdout)
}

fn run_malus(args: &MalusArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = load_optional(args.config.as_ref(), "malus")?;
    let angles = args
        .angles
        .clone()
        .or_else(|| cfg.float_list("angles_deg").map(<[f64]>::to_vec))
        .unwrap_or_else(|| vec![20.0, 30.0, 45.0]);
    let t_max = args.t_max.or(cfg.float("t_max_over_tau")).unwrap_or(10.0);
    let steps = args.steps.or(cfg.uint("steps")).unwrap_or(200);
    let tau_r = cfg.float("tau_r").unwrap_or(1.0);
    let spec = MalusSpec::from_degrees(&angles, t_max, steps as usize, tau_r)?;
    let table = tables::malus_table(&malus_deviation_curve(&spec)?, tau_r);
    let plot = args.output.svg.as_ref().map(|_| {
        tables::plot_grouped(&table, "deviation from Malus's law", "eps_deg", "t_over_tau", "ratio_to_malus")
    });
    emit(&table, plot, &args.output, stdout)
}

fn run_chsh(args: &ChshArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (label, setting) = match (&args.angles, args.paper_setting) {
        (Some(a), _) => {
            let [a, ap, b, bp] = a[..] else {
                return Err(CliError::Validation(format!("--angles needs 4 values, got {}", a.len())));
            };
            let s = ChshSetting::from_angles(a.to_radians(), ap.to_radians(), b.to_radians(), bp.to_radians());
            (format!("angles {a} {ap} {b} {bp}"), s)
        }
        (None, true) => ("rotated_45".to_string(), ChshSetting::rotated_45()),
        (None, false) => return Err(CliError::Validation("pass --paper-setting or --angles".into())),
    };
    let v = chsh_value(&setting)?;
    let table = tables::chsh_table(&label, &v);
    let plot = args.output.svg.as_ref().map(|_| Plot {
        title: format!("CHSH correlations, F = {}", v.f),
        x_label: "pair index".into(),
        y_label: "correlation".into(),
        series: vec![collapse_lab_core::io::svg::Series::new(
            "C",
            v.correlations.iter().enumerate().map(|(i, c)| (i as f64, *c)).collect(),
        )],
    });
    emit(&table, plot, &args.output, stdout)
}

fn run_interfere(args: &InterfereArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let cfg = load_optional(args.config.as_ref(), "interfere")?;
    let wavelength = args.wavelength.or(cfg.float("wavelength")).unwrap_or(500e-9);
    let distance = args.distance.or(cfg.float("distance")).unwrap_or(1.0);
    let lo = args.screen_min.or(cfg.float("screen_min")).unwrap_or(-0.01);
    let hi = args.screen_max.or(cfg.float("screen_max")).unwrap_or(0.01);
    let points = args.points.or(cfg.uint("screen_points")).unwrap_or(2001) as usize;
    if !(wavelength > 0.0) || !(hi > lo) || points == 0 {
        return Err(CliError::Validation("need wavelength > 0, screen_max > screen_min, points > 0".into()));
    }
    let positions = match (args.separation, cfg.float_list("source_positions")) {
        (Some(d), _) => vec![d / 2.0, -d / 2.0],
        (None, Some(p)) => p.to_vec(),
        (None, None) => vec![0.5e-4, -0.5e-4],
    };
    let phases = args
        .phases
        .clone()
        .or_else(|| cfg.float_list("source_phases").map(<[f64]>::to_vec))
        .unwrap_or_else(|| vec![0.0; positions.len()]);
    if phases.len() != positions.len() {
        return Err(CliError::Validation(format!(
            "{} source phases for {} sources",
            phases.len(),
            positions.len()
        )));
    }
    let spec = InterferenceSpec {
        sources: positions.iter().zip(&phases).map(|(&y, &theta)| Source { y, theta }).collect(),
        distance,
        wavenumber: wavenumber(wavelength),
        screen: linspace(lo, hi, points),
    };
    if let Some(w) = spec.far_field_warning() {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let far = interference_pattern(&spec)?;
    let exact = interference_pattern_exact(&spec)?;
    let table = tables::interference_table(&spec.screen, &far, &exact);
    let plot = args
        .output
        .svg
        .as_ref()
        .map(|_| tables::plot_columns(&table, "screen intensity", "y", &["intensity", "intensity_exact"]));
    emit(&table, plot, &args.output, stdout)
}

fn run_tau(args: &TauArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = load_optional(args.config.as_ref(), "estimate-tau")?;
    let wavelength = args.wavelength.or(cfg.float("lambda_photon")).unwrap_or(400e-9);
    let e = estimate_tau(wavelength)?;
    let table = tables::tau_table(&e);
    let plot = args.output.svg.as_ref().map(|_| Plot {
        title: "reduction time scale".into(),
        x_label: "wavelength".into(),
        y_label: "hbar / E".into(),
        series: vec![collapse_lab_core::io::svg::Series::new("hbar_over_e", vec![(e.wavelength, e.hbar_over_e)])],
    });
    emit(&table, plot, &args.output, stdout)
}

/// Runs one invocation; `argv[0]` is the program name. Returns the exit code:
/// 0 on success, 1 on invalid input, 2 on runtime failure.
pub fn dispatch<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Collapse(a) => run_collapse(a, stdout),
        Command::Ensemble(a) => run_ensemble_cmd(a, stdout, stderr),
        Command::Malus(a) => run_malus(a, stdout),
        Command::Chsh(a) => run_chsh(a, stdout),
        Command::Interfere(a) => run_interfere(a, stdout, stderr),
        Command::EstimateTau(a) => run_tau(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}
