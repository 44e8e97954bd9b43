//! Calibrates against synthetic data for each motion class and reports how
//! close the recovered components come to the ground truth, with and
//! without noise.
//!
//! Run with: `cargo run -p handeye --example synthetic_calibration`

use handeye::metrics::solution_errors;
use handeye::motion::{MotionSequence, SolutionKind};
use handeye::se3::{conjugate_camera_motion, RigidMotion, ScaledMotion};
use handeye::sim::{
    add_noise, random_hand_eye, random_robot_motions, trial_rng, MotionClassRequest, SimConfig,
};
use handeye::solvers::{solve_auto, SolveConfig};
use rand::Rng;

fn main() {
    let solve_cfg = SolveConfig::default();

    for (label, class, motions) in [
        ("general", MotionClassRequest::General, 3),
        ("pure rotations", MotionClassRequest::PureRotation, 3),
        ("pure translations", MotionClassRequest::PureTranslation, 3),
        ("planar", MotionClassRequest::Planar, 2),
    ] {
        let sim_cfg = SimConfig {
            motion_class: class,
            motions_per_trial: motions,
            ..SimConfig::default()
        };
        let mut rng = trial_rng(42, 0, 0);
        let x = random_hand_eye(&mut rng, &sim_cfg);
        let lambda = rng.random_range(0.5..2.0);
        let robot = random_robot_motions(&mut rng, &sim_cfg).expect("well-posed motions");

        println!("== {label}: {motions} motions, true scale {lambda:.4}");
        for nu in [0.0, 0.01] {
            let pairs: Vec<_> = robot
                .iter()
                .map(|b| {
                    let a = conjugate_camera_motion(&x, b);
                    let noisy = add_noise(
                        &ScaledMotion::new(a.rotation, a.translation / lambda),
                        nu,
                        &mut rng,
                    );
                    handeye::motion::MotionPair::new(noisy, *b)
                })
                .collect();
            let sequence = MotionSequence::new(pairs).expect("non-empty");

            match solve_auto(&sequence, &solve_cfg) {
                Ok(solution) => {
                    let errors = solution_errors(&solution, &x, lambda);
                    print!(
                        "   nu = {nu:<4} kind = {:<22} rotation err {:.2e}",
                        kind_label(&solution.kind),
                        errors.rotation_error
                    );
                    if let Some(t) = errors.translation_rel_error {
                        print!("  translation err {t:.2e}");
                    }
                    if let Some(l) = errors.lambda_rel_error {
                        print!("  scale err {l:.2e}");
                    }
                    println!();
                }
                Err(e) => println!("   nu = {nu:<4} failed: {e}"),
            }
        }
    }
}

fn kind_label(kind: &SolutionKind) -> &'static str {
    match kind {
        SolutionKind::Full => "Full",
        SolutionKind::TranslationUpToScale => "TranslationUpToScale",
        SolutionKind::TranslationUpToAxis(_) => "TranslationUpToAxis",
        SolutionKind::RotationAndScaleOnly => "RotationAndScaleOnly",
    }
}
