//! Command-line surface for the hand-eye calibration library.
//!
//! Exit codes: 0 success, 2 usage, 3 parse/validation, 4 insufficient
//! motion, 5 degenerate data, 6 numerical failure.

use clap::{Parser, Subcommand, ValueEnum};
use handeye::io;
use handeye::metrics;
use handeye::motion::{
    classify_pair, classify_sequence, expected_solution_kind, ClassifyTolerances, MotionClass,
    MotionError, SolutionKind,
};
use handeye::sim::{run_motion_count_sweep, run_noise_sweep, MotionClassRequest, SimConfig};
use handeye::solvers::{
    solve_auto, solve_general, solve_planar, solve_rotations, solve_translations, HandEyeSolution,
    SolveConfig, SolveError,
};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "handeye", version, about = "Linear hand-eye calibration from scaled camera motions and known robot motions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the hand-eye transformation from a motion file.
    Calibrate(CalibrateArgs),
    /// Report the motion class of each pair and of the whole sequence.
    Classify(ClassifyArgs),
    /// Run a Monte-Carlo sweep and emit a CSV table.
    Simulate(SimulateArgs),
}

#[derive(clap::Args)]
struct CalibrateArgs {
    /// Motion file (JSON).
    input: PathBuf,
    /// Solver to use; `auto` dispatches on the detected motion class.
    #[arg(long, value_enum, default_value_t = SolverChoice::Auto)]
    solver: SolverChoice,
    /// Rotation-angle tolerance for motion classification (radians).
    #[arg(long)]
    tol_angle: Option<f64>,
    /// Relative translation tolerance for motion classification.
    #[arg(long)]
    tol_trans: Option<f64>,
    /// Axis-alignment tolerance for motion classification (radians).
    #[arg(long)]
    tol_axis: Option<f64>,
    /// Write the solution and diagnostics to this JSON file.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ClassifyArgs {
    /// Motion file (JSON).
    input: PathBuf,
    #[arg(long)]
    tol_angle: Option<f64>,
    #[arg(long)]
    tol_trans: Option<f64>,
    #[arg(long)]
    tol_axis: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverChoice {
    Auto,
    General,
    Translations,
    Rotations,
    Planar,
}

impl SolverChoice {
    fn name(&self) -> &'static str {
        match self {
            SolverChoice::Auto => "auto",
            SolverChoice::General => "general",
            SolverChoice::Translations => "translations",
            SolverChoice::Rotations => "rotations",
            SolverChoice::Planar => "planar",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepChoice {
    Noise,
    Motions,
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Which parameter to sweep.
    #[arg(long, value_enum)]
    sweep: SweepChoice,
    /// RNG seed; identical seeds reproduce tables byte-for-byte.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Noise level for the motions sweep.
    #[arg(long)]
    nu: Option<f64>,
    /// Motions per trial for the noise sweep.
    #[arg(long)]
    motions: Option<usize>,
    /// Largest noise level of the noise sweep grid.
    #[arg(long)]
    nu_max: Option<f64>,
    /// Grid step of the noise sweep.
    #[arg(long)]
    nu_step: Option<f64>,
    /// Largest motion count of the motions sweep (grid is 2..=max).
    #[arg(long)]
    motions_max: Option<usize>,
    /// Translation amplitude bound.
    #[arg(long)]
    amp_trans: Option<f64>,
    /// Rotation amplitude bound (degrees).
    #[arg(long)]
    amp_rot_deg: Option<f64>,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON config file with the same keys; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Config-file counterpart of the simulate flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateFileConfig {
    seed: Option<u64>,
    trials: Option<usize>,
    nu: Option<f64>,
    motions: Option<usize>,
    nu_max: Option<f64>,
    nu_step: Option<f64>,
    motions_max: Option<usize>,
    amp_trans: Option<f64>,
    amp_rot_deg: Option<f64>,
    output: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Parse(String),
    InsufficientMotion(String),
    Degenerate(String),
    Numerical(String),
}

impl CliError {
    fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse(_) => "parse",
            CliError::InsufficientMotion(_) => "insufficient-motion",
            CliError::Degenerate(_) => "degenerate-data",
            CliError::Numerical(_) => "numerical",
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 3,
            CliError::InsufficientMotion(_) => 4,
            CliError::Degenerate(_) => 5,
            CliError::Numerical(_) => 6,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Parse(m)
            | CliError::InsufficientMotion(m)
            | CliError::Degenerate(m)
            | CliError::Numerical(m) => m,
        }
    }
}

impl From<io::IoError> for CliError {
    fn from(e: io::IoError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<MotionError> for CliError {
    fn from(e: MotionError) -> Self {
        match e {
            MotionError::NoInformation => CliError::Degenerate(e.to_string()),
            MotionError::Empty | MotionError::NonFinite { .. } => CliError::Parse(e.to_string()),
            MotionError::TooFewPairs { .. } => CliError::InsufficientMotion(e.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Motion(inner) => inner.into(),
            SolveError::WrongMotionClass { .. } | SolveError::InsufficientMotion(_) => {
                CliError::InsufficientMotion(e.to_string())
            }
            SolveError::DegenerateTranslation(_) => CliError::Degenerate(e.to_string()),
            SolveError::Linalg(_)
            | SolveError::InconsistentData { .. }
            | SolveError::Numerical(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<handeye::sim::SimError> for CliError {
    fn from(e: handeye::sim::SimError) -> Self {
        match e {
            handeye::sim::SimError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            handeye::sim::SimError::Generation(_) => CliError::Numerical(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Calibrate(args) => calibrate(&args),
        Command::Classify(args) => classify(&args),
        Command::Simulate(args) => simulate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error ({}): {}", e.category(), e.message());
            ExitCode::from(e.code())
        }
    }
}

fn solve_config(
    tol_angle: Option<f64>,
    tol_trans: Option<f64>,
    tol_axis: Option<f64>,
) -> SolveConfig {
    let mut classify = ClassifyTolerances::default();
    if let Some(a) = tol_angle {
        classify.angle = a;
    }
    if let Some(t) = tol_trans {
        classify.trans_rel = t;
    }
    if let Some(x) = tol_axis {
        classify.axis = x;
    }
    SolveConfig {
        classify,
        ..SolveConfig::default()
    }
}

fn class_name(class: &MotionClass) -> String {
    match class {
        MotionClass::PureTranslation => "PureTranslation".into(),
        MotionClass::PureRotation => "PureRotation".into(),
        MotionClass::Planar(axis) => format!(
            "Planar(axis [{:.6}, {:.6}, {:.6}])",
            axis.x, axis.y, axis.z
        ),
        MotionClass::General => "General".into(),
        MotionClass::Degenerate => "Degenerate".into(),
    }
}

fn kind_summary(kind: &SolutionKind) -> String {
    match kind {
        SolutionKind::Full => {
            "full calibration: rotation, translation, and scale determined".into()
        }
        SolutionKind::TranslationUpToScale => {
            "rotation determined; translation determined up to scale (value is t_X/lambda)".into()
        }
        SolutionKind::TranslationUpToAxis(axis) => format!(
            "rotation and scale determined; translation determined up to axis [{:.6}, {:.6}, {:.6}]",
            axis.x, axis.y, axis.z
        ),
        SolutionKind::RotationAndScaleOnly => {
            "rotation and scale determined; translation unobservable".into()
        }
    }
}

fn kind_short(kind: &SolutionKind) -> &'static str {
    match kind {
        SolutionKind::Full => "Full",
        SolutionKind::TranslationUpToScale => "TranslationUpToScale",
        SolutionKind::TranslationUpToAxis(_) => "TranslationUpToAxis",
        SolutionKind::RotationAndScaleOnly => "RotationAndScaleOnly",
    }
}

fn print_solution(sol: &HandEyeSolution, units: Option<&str>) {
    println!("solution kind: {}", kind_summary(&sol.kind));
    let m = sol.rotation.matrix();
    println!("R_X:");
    for i in 0..3 {
        println!(
            "  [{:>12.8} {:>12.8} {:>12.8}]",
            m[(i, 0)],
            m[(i, 1)],
            m[(i, 2)]
        );
    }
    let unit_suffix = units.map(|u| format!(" {u}")).unwrap_or_default();
    match sol.kind {
        SolutionKind::Full => {
            let t = sol.translation.expect("full solution");
            println!("t_X: [{:.8}, {:.8}, {:.8}]{unit_suffix}", t.x, t.y, t.z);
        }
        SolutionKind::TranslationUpToScale => {
            let t = sol.translation.expect("up-to-scale solution");
            println!(
                "t_X/lambda: [{:.8}, {:.8}, {:.8}] (dimensionless)",
                t.x, t.y, t.z
            );
        }
        SolutionKind::TranslationUpToAxis(_) => {
            let t = sol.translation.expect("up-to-axis solution");
            println!(
                "t_X: [{:.8}, {:.8}, {:.8}]{unit_suffix} plus an undetermined component along the axis above",
                t.x, t.y, t.z
            );
        }
        SolutionKind::RotationAndScaleOnly => {}
    }
    if let Some(lambda) = sol.scale {
        println!("lambda: {lambda:.10}");
    }
    if let Some(gap) = sol.residuals.null_space_gap {
        println!("diagnostics: null-space gap {gap:.3e}");
    }
    if let Some(cond) = sol.residuals.translation_condition {
        println!("diagnostics: translation system condition {cond:.3e}");
    }
    if let Some(residual) = sol.residuals.assembled_residual {
        println!("diagnostics: assembled-system residual {residual:.3e}");
    }
    if !sol.residuals.near_pi_pairs.is_empty() {
        println!(
            "warning: pairs {:?} have rotations within 1e-3 of a half turn; conditioning degrades there",
            sol.residuals.near_pi_pairs
        );
    }
}

fn calibrate(args: &CalibrateArgs) -> Result<(), CliError> {
    let file = io::read_motion_file(&args.input)?;
    let sequence = io::motion_file_to_sequence(&file)?;
    let cfg = solve_config(args.tol_angle, args.tol_trans, args.tol_axis);
    let units = file.metadata.get("units").map(String::as_str);
    println!(
        "loaded {} motion pairs from {}{}",
        sequence.len(),
        args.input.display(),
        units.map(|u| format!(" (units: {u})")).unwrap_or_default()
    );

    let class = classify_sequence(&sequence, &cfg.classify)?;
    println!("sequence class: {}", class_name(&class));

    let sol = match args.solver {
        SolverChoice::Auto => solve_auto(&sequence, &cfg)?,
        SolverChoice::General => solve_general(&sequence, &cfg)?,
        SolverChoice::Translations => solve_translations(&sequence, &cfg)?,
        SolverChoice::Rotations => solve_rotations(&sequence, &cfg)?,
        SolverChoice::Planar => solve_planar(&sequence, &cfg)?,
    };
    print_solution(&sol, units);

    if sol.kind == SolutionKind::Full {
        if let Ok(report) = metrics::consistency(&sequence, &sol) {
            println!(
                "consistency RMS: rotation {:.3e}, translation {:.3e}",
                report.rms_rotation, report.rms_translation
            );
        }
    }

    if let Some(output) = &args.output {
        let result = io::ResultFile {
            version: io::MOTION_FILE_VERSION.to_string(),
            solution: io::solution_to_record(&sol),
            diagnostics: io::diagnostics_to_record(&sol.residuals),
            provenance: io::Provenance {
                input_path: args.input.display().to_string(),
                input_sha256: io::file_sha256(&args.input)?,
                solver: args.solver.name().to_string(),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
            },
        };
        io::save_result(output, &result)?;
        println!("result written to {}", output.display());
    }
    Ok(())
}

fn classify(args: &ClassifyArgs) -> Result<(), CliError> {
    let sequence = io::load_motions(&args.input)?;
    let cfg = solve_config(args.tol_angle, args.tol_trans, args.tol_axis);
    let trans_scale = sequence.max_robot_translation();
    for (i, pair) in sequence.pairs().iter().enumerate() {
        let class = classify_pair(pair, &cfg.classify, trans_scale);
        println!("pair {i}: {}", class_name(&class));
    }
    let class = classify_sequence(&sequence, &cfg.classify)?;
    println!("sequence: {}", class_name(&class));
    let kind = expected_solution_kind(&class, &sequence)?;
    println!("expected solution kind: {}", kind_short(&kind));
    println!("interpretation: {}", kind_summary(&kind));
    Ok(())
}

fn merge<T: Copy>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let file_cfg: SimulateFileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Parse(format!("config {}: {e}", path.display())))?
        }
        None => SimulateFileConfig::default(),
    };

    let base = SimConfig {
        seed: merge(args.seed, file_cfg.seed, 0),
        trials: merge(args.trials, file_cfg.trials, 100),
        motions_per_trial: merge(args.motions, file_cfg.motions, 2),
        motion_class: MotionClassRequest::General,
        translation_amplitude: merge(args.amp_trans, file_cfg.amp_trans, 1.0),
        rotation_amplitude: merge(args.amp_rot_deg, file_cfg.amp_rot_deg, 180.0).to_radians(),
        noise_nu: merge(args.nu, file_cfg.nu, 0.01),
        ..SimConfig::default()
    };
    base.validate()?;

    let table = match args.sweep {
        SweepChoice::Noise => {
            let nu_max = merge(args.nu_max, file_cfg.nu_max, 0.2);
            let nu_step = merge(args.nu_step, file_cfg.nu_step, 0.02);
            if nu_step <= 0.0 || nu_max < 0.0 {
                return Err(CliError::Usage(
                    "nu-step must be positive and nu-max non-negative".into(),
                ));
            }
            // Truncating division with a tiny slack so exact multiples are
            // kept and the grid never exceeds nu_max.
            let steps = (nu_max / nu_step + 1e-9).floor() as usize;
            let nus: Vec<f64> = (0..=steps).map(|k| k as f64 * nu_step).collect();
            run_noise_sweep(&base, &nus)?
        }
        SweepChoice::Motions => {
            let max = merge(args.motions_max, file_cfg.motions_max, 15);
            if max < 2 {
                return Err(CliError::Usage("motions-max must be at least 2".into()));
            }
            let counts: Vec<usize> = (2..=max).collect();
            run_motion_count_sweep(&base, &counts)?
        }
    };

    let output = args.output.clone().or(file_cfg.output);
    match output {
        Some(path) => {
            io::save_sweep_csv(Path::new(&path), &table)?;
            eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        None => print!("{}", io::sweep_csv(&table)),
    }
    Ok(())
}
