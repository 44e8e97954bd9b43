//! Monte-Carlo simulation: random ground truth, noise injection, and
//! experiment sweeps.
//!
//! Every trial derives its own RNG stream from `(seed, sweep point, trial
//! index)`, so results are bit-identical whether trials run serially or in
//! parallel, and each trial is unaffected by how many others run.
//!
//! Noise model: camera translations are perturbed as
//! `t~ = t + nu * ||t|| * n` with `n` a standard Gaussian 3-vector, and each
//! Roll-Pitch-Yaw angle of the camera rotation is scaled as
//! `angle~ = (1 + nu * r) * angle` with scalar white noise `r`, so `nu` acts
//! as a signal-to-noise ratio. Rotation noise is multiplicative in the
//! angles: exactly zero angles stay exact, so pure-translation camera
//! motions receive no rotation noise.

use crate::metrics::{solution_errors, ErrorReport};
use crate::motion::{MotionPair, MotionSequence, SolutionKind};
use crate::se3::{
    conjugate_camera_motion, rotation_to_rpy, rpy_to_rotation, RigidMotion, ScaledMotion,
};
use crate::solvers::{solve_general, HandEyeSolution, SolveConfig, SolveDiagnostics, SolveError};
use nalgebra::{Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, UnitSphere};
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("motion generation failed: {0}")]
    Generation(String),
}

/// Motion class requested from the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionClassRequest {
    PureTranslation,
    PureRotation,
    Planar,
    General,
}

/// Simulation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub trials: usize,
    pub motions_per_trial: usize,
    pub motion_class: MotionClassRequest,
    /// Upper bound on robot translation norms (same unit as translations).
    pub translation_amplitude: f64,
    /// Upper bound on robot rotation angles (radians, capped just below pi).
    pub rotation_amplitude: f64,
    /// Signal-to-noise ratio of the injected camera-motion noise.
    pub noise_nu: f64,
    /// Std-dev of each hand-eye translation component.
    pub hand_eye_translation_sigma: f64,
    /// Std-dev of each hand-eye Roll-Pitch-Yaw angle (radians).
    pub hand_eye_rpy_sigma: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100,
            motions_per_trial: 2,
            motion_class: MotionClassRequest::General,
            translation_amplitude: 1.0,
            rotation_amplitude: PI,
            noise_nu: 0.0,
            hand_eye_translation_sigma: 0.1,
            hand_eye_rpy_sigma: 30f64.to_radians(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.trials < 1 {
            return Err(SimError::InvalidConfig("trials must be >= 1".into()));
        }
        if self.motions_per_trial < 2 {
            return Err(SimError::InvalidConfig(
                "motions_per_trial must be >= 2".into(),
            ));
        }
        if self.noise_nu.is_nan() || self.noise_nu < 0.0 {
            return Err(SimError::InvalidConfig("noise_nu must be >= 0".into()));
        }
        if self.translation_amplitude < 0.0
            || self.rotation_amplitude < 0.0
            || self.hand_eye_translation_sigma < 0.0
            || self.hand_eye_rpy_sigma < 0.0
        {
            return Err(SimError::InvalidConfig(
                "amplitudes and sigmas must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// RNG stream for one trial of one sweep point.
pub fn trial_rng(seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((point << 32) | (trial & 0xffff_ffff));
    rng
}

/// Random hand-eye transform: RPY angles and translation components drawn
/// from centered Gaussians with the configured sigmas.
pub fn random_hand_eye<R: Rng + ?Sized>(rng: &mut R, cfg: &SimConfig) -> RigidMotion {
    let roll = cfg.hand_eye_rpy_sigma * rng.sample::<f64, _>(StandardNormal);
    let pitch = cfg.hand_eye_rpy_sigma * rng.sample::<f64, _>(StandardNormal);
    let yaw = cfg.hand_eye_rpy_sigma * rng.sample::<f64, _>(StandardNormal);
    let t = Vector3::new(
        cfg.hand_eye_translation_sigma * rng.sample::<f64, _>(StandardNormal),
        cfg.hand_eye_translation_sigma * rng.sample::<f64, _>(StandardNormal),
        cfg.hand_eye_translation_sigma * rng.sample::<f64, _>(StandardNormal),
    );
    RigidMotion::new(rpy_to_rotation(roll, pitch, yaw), t)
}

fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    let v: [f64; 3] = rng.sample(UnitSphere);
    Vector3::from(v)
}

/// Angle between two directions treated as lines, in `[0, pi/2]`.
fn line_angle(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    (a.dot(b).abs() / (a.norm() * b.norm())).clamp(0.0, 1.0).acos()
}

const MIN_AXIS_SEPARATION: f64 = 10.0 * PI / 180.0;
const MAX_GENERATION_ATTEMPTS: usize = 1000;

/// Random robot motions conforming to the requested class, with amplitudes
/// bounded by the config. Sets that would be numerically degenerate (all
/// rotation axes within 10 degrees, near-coplanar translation triples, a
/// vanishing planar virtual translation) are rejected and redrawn.
pub fn random_robot_motions<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &SimConfig,
) -> Result<Vec<RigidMotion>, SimError> {
    cfg.validate()?;
    let n = cfg.motions_per_trial;
    let angle_cap = cfg.rotation_amplitude.min(PI - 1e-2);
    let draw_angle = |rng: &mut R| -> f64 { angle_cap * rng.random_range(0.1..=1.0) };
    let draw_magnitude =
        |rng: &mut R| -> f64 { cfg.translation_amplitude * rng.random_range(0.1..=1.0) };

    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let motions: Vec<RigidMotion> = match cfg.motion_class {
            MotionClassRequest::PureTranslation => (0..n)
                .map(|_| {
                    let t = draw_magnitude(rng) * unit_vector(rng);
                    RigidMotion::new(Rotation3::identity(), t)
                })
                .collect(),
            MotionClassRequest::PureRotation => (0..n)
                .map(|_| {
                    let axis = Unit::new_normalize(unit_vector(rng));
                    RigidMotion::new(
                        Rotation3::from_axis_angle(&axis, draw_angle(rng)),
                        Vector3::zeros(),
                    )
                })
                .collect(),
            MotionClassRequest::Planar => {
                let axis = Unit::new_normalize(unit_vector(rng));
                let e1 = axis.cross(&pick_orthogonal_seed(&axis)).normalize();
                let e2 = axis.cross(&e1);
                (0..n)
                    .map(|_| {
                        let phi = rng.random_range(0.0..(2.0 * PI));
                        let t = draw_magnitude(rng) * (phi.cos() * e1 + phi.sin() * e2);
                        RigidMotion::new(Rotation3::from_axis_angle(&axis, draw_angle(rng)), t)
                    })
                    .collect()
            }
            MotionClassRequest::General => (0..n)
                .map(|_| {
                    let axis = Unit::new_normalize(unit_vector(rng));
                    RigidMotion::new(
                        Rotation3::from_axis_angle(&axis, draw_angle(rng)),
                        draw_magnitude(rng) * unit_vector(rng),
                    )
                })
                .collect(),
        };
        if motions_are_well_posed(&motions, cfg) {
            return Ok(motions);
        }
    }
    Err(SimError::Generation(format!(
        "no well-posed {:?} motion set after {MAX_GENERATION_ATTEMPTS} attempts",
        cfg.motion_class
    )))
}

fn pick_orthogonal_seed(axis: &Unit<Vector3<f64>>) -> Vector3<f64> {
    if axis.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    }
}

fn motions_are_well_posed(motions: &[RigidMotion], cfg: &SimConfig) -> bool {
    match cfg.motion_class {
        MotionClassRequest::PureTranslation => {
            let pair_ok = motions.iter().enumerate().any(|(i, a)| {
                motions[i + 1..]
                    .iter()
                    .any(|b| line_angle(&a.translation, &b.translation) > MIN_AXIS_SEPARATION)
            });
            if !pair_ok {
                return false;
            }
            if motions.len() < 3 {
                return true;
            }
            // At least one solidly non-coplanar triple for the closed form.
            let n = motions.len();
            (0..n).any(|i| {
                ((i + 1)..n).any(|j| {
                    ((j + 1)..n).any(|k| {
                        let (a, b, c) = (
                            &motions[i].translation,
                            &motions[j].translation,
                            &motions[k].translation,
                        );
                        a.cross(b).dot(c).abs() > 0.05 * a.norm() * b.norm() * c.norm()
                    })
                })
            })
        }
        MotionClassRequest::PureRotation | MotionClassRequest::General => {
            motions.iter().enumerate().any(|(i, a)| {
                let axis_a = a.rotation.scaled_axis();
                motions[i + 1..].iter().any(|b| {
                    line_angle(&axis_a, &b.rotation.scaled_axis()) > MIN_AXIS_SEPARATION
                })
            })
        }
        MotionClassRequest::Planar => {
            let n = motions.len();
            let scale = cfg.translation_amplitude.max(1e-12);
            (0..n).any(|i| {
                ((i + 1)..n).any(|j| {
                    let (a, b) = (&motions[i], &motions[j]);
                    let virtual_t = (nalgebra::Matrix3::identity() - b.rotation.matrix())
                        * a.translation
                        - (nalgebra::Matrix3::identity() - a.rotation.matrix()) * b.translation;
                    virtual_t.norm() > 1e-2 * scale
                })
            })
        }
    }
}

/// Injects the configured noise into one scaled camera motion; `nu = 0`
/// returns the motion untouched.
pub fn add_noise<R: Rng + ?Sized>(a: &ScaledMotion, nu: f64, rng: &mut R) -> ScaledMotion {
    if nu == 0.0 {
        return *a;
    }
    let n = Vector3::new(
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
    );
    let direction = a.direction + nu * a.direction.norm() * n;
    let (roll, pitch, yaw) = rotation_to_rpy(&a.rotation);
    let noisy = |angle: f64, rng: &mut R| angle * (1.0 + nu * rng.sample::<f64, _>(StandardNormal));
    let rotation = rpy_to_rotation(noisy(roll, rng), noisy(pitch, rng), noisy(yaw, rng));
    ScaledMotion::new(rotation, direction)
}

/// Outcome of one simulated calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub errors: ErrorReport,
    pub solution_kind: SolutionKind,
    pub diagnostics: SolveDiagnostics,
}

/// How the camera motions were obtained in a simulated trial: `Pose` feeds
/// the solver translations at their true scale (the scale factor is 1),
/// `Sfm` strips a random scale in `[0.5, 2]` first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Pose,
    Sfm,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Pose, Method::Sfm];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Pose => "pose",
            Method::Sfm => "sfm",
        }
    }
}

/// Outcome of one trial under one input style.
pub type MethodOutcome = (Method, Result<TrialResult, SolveError>);

/// One full-solver trial evaluated with both input styles on the same
/// ground truth and the same noise draws.
pub fn run_general_trial<R: Rng + ?Sized>(
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<[MethodOutcome; 2], SimError> {
    let x = random_hand_eye(rng, cfg);
    let robot = random_robot_motions(rng, cfg)?;
    let lambda = rng.random_range(0.5..2.0);

    // Noise is drawn once on the true-scale camera motions; the
    // reconstruction-style input divides the same noisy translations by the
    // scale factor, exactly as a reconstruction defined up to scale would.
    let noisy_camera: Vec<ScaledMotion> = robot
        .iter()
        .map(|b| {
            let a = conjugate_camera_motion(&x, b);
            add_noise(
                &ScaledMotion::new(a.rotation, a.translation),
                cfg.noise_nu,
                rng,
            )
        })
        .collect();

    let solve_cfg = SolveConfig::default();
    let run = |truth_lambda: f64| -> Result<TrialResult, SolveError> {
        let pairs: Vec<MotionPair> = noisy_camera
            .iter()
            .zip(&robot)
            .map(|(a, b)| {
                MotionPair::new(ScaledMotion::new(a.rotation, a.direction / truth_lambda), *b)
            })
            .collect();
        let seq = MotionSequence::new(pairs)?;
        let sol: HandEyeSolution = solve_general(&seq, &solve_cfg)?;
        Ok(TrialResult {
            errors: solution_errors(&sol, &x, truth_lambda),
            solution_kind: sol.kind,
            diagnostics: sol.residuals,
        })
    };

    Ok([(Method::Pose, run(1.0)), (Method::Sfm, run(lambda))])
}

/// One aggregated row of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub method: Method,
    pub rotation_error_median: f64,
    pub rotation_error_mean: f64,
    pub translation_error_median: f64,
    pub translation_error_mean: f64,
    pub lambda_error_median: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn aggregate_point(sweep_value: f64, outcomes: &[[MethodOutcome; 2]]) -> Vec<SweepRow> {
    Method::ALL
        .iter()
        .enumerate()
        .map(|(mi, &method)| {
            let results: Vec<&Result<TrialResult, SolveError>> =
                outcomes.iter().map(|o| &o[mi].1).collect();
            let failures = results.iter().filter(|r| r.is_err()).count();
            let ok: Vec<&TrialResult> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
            let rot: Vec<f64> = ok.iter().map(|t| t.errors.rotation_error).collect();
            let trans: Vec<f64> = ok
                .iter()
                .filter_map(|t| t.errors.translation_rel_error)
                .collect();
            let lam: Vec<f64> = ok
                .iter()
                .filter_map(|t| t.errors.lambda_rel_error)
                .collect();
            SweepRow {
                sweep_value,
                method,
                rotation_error_median: median(rot.clone()),
                rotation_error_mean: mean(&rot),
                translation_error_median: median(trans.clone()),
                translation_error_mean: mean(&trans),
                lambda_error_median: median(lam),
                failures,
            }
        })
        .collect()
}

fn run_sweep_point(
    cfg: &SimConfig,
    point_index: u64,
) -> Result<Vec<[MethodOutcome; 2]>, SimError> {
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, point_index, t as u64);
            run_general_trial(cfg, &mut rng)
        })
        .collect()
}

/// Noise-robustness sweep: for each `nu`, runs the configured number of
/// trials of the full solver on pose-style and reconstruction-style inputs.
pub fn run_noise_sweep(base: &SimConfig, nus: &[f64]) -> Result<SweepTable, SimError> {
    base.validate()?;
    let mut rows = Vec::new();
    for (pi, &nu) in nus.iter().enumerate() {
        if nu.is_nan() || nu < 0.0 {
            return Err(SimError::InvalidConfig(format!(
                "noise level must be >= 0, got {nu}"
            )));
        }
        let cfg = SimConfig {
            noise_nu: nu,
            ..base.clone()
        };
        let outcomes = run_sweep_point(&cfg, pi as u64)?;
        rows.extend(aggregate_point(nu, &outcomes));
    }
    Ok(SweepTable { rows })
}

/// Motion-count sweep: same protocol with the number of motions per trial as
/// the swept value.
pub fn run_motion_count_sweep(base: &SimConfig, counts: &[usize]) -> Result<SweepTable, SimError> {
    base.validate()?;
    let mut rows = Vec::new();
    for (pi, &n) in counts.iter().enumerate() {
        if n < 2 {
            return Err(SimError::InvalidConfig(format!(
                "motion counts must be >= 2, got {n}"
            )));
        }
        let cfg = SimConfig {
            motions_per_trial: n,
            ..base.clone()
        };
        let outcomes = run_sweep_point(&cfg, pi as u64)?;
        rows.extend(aggregate_point(n as f64, &outcomes));
    }
    Ok(SweepTable { rows })
}
