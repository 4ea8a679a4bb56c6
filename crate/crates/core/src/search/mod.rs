//! Gradient-based pose refinement and multi-start search over the real part
//! of the correlation score.

mod dynamics;
mod sweep;

pub use dynamics::{simulate_dynamics, DynamicsConfig, Trajectory, TrajectorySample};
pub use sweep::{parameter_sweep, SweepAxis, SweepPoint};

use crate::affinity::AffinityField;
use crate::correlation::{real_score, score_direct, Pose, Rotation};
use crate::math::{add, norm, Quat, sub};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rayon::prelude::*;

/// Pose parameter vector relative to a base pose: translation offsets first,
/// then the rotation offset (one angle in 2D, a rotation vector in 3D).
pub(crate) fn pose_from_params(dim: u8, base: &Pose, p: &[f64]) -> Pose {
    if dim == 2 {
        let theta = match base.rotation {
            Rotation::Planar(t) => t,
            Rotation::Spatial(_) => 0.0,
        };
        Pose {
            rotation: Rotation::Planar(theta + p[2]),
            translation: add(base.translation, [p[0], p[1], 0.0]),
        }
    } else {
        let q0 = match base.rotation {
            Rotation::Spatial(q) => q,
            Rotation::Planar(_) => Quat::IDENTITY,
        };
        let dq = Quat::from_rotation_vector([p[3], p[4], p[5]]);
        Pose {
            rotation: Rotation::Spatial(dq.mul(q0).normalized()),
            translation: add(base.translation, [p[0], p[1], p[2]]),
        }
    }
}

pub(crate) fn param_len(dim: u8) -> usize {
    if dim == 2 {
        3
    } else {
        6
    }
}

pub(crate) fn trans_len(dim: u8) -> usize {
    if dim == 2 {
        2
    } else {
        3
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RefineConfig {
    pub iterations: usize,
    /// Central-difference step for translation components.
    pub delta_translation: f64,
    /// Central-difference step for rotation components (radians).
    pub delta_rotation: f64,
    /// Initial Armijo step as a fraction applied to max(spacing, delta_rot).
    pub initial_step: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
}

impl Default for RefineConfig {
    fn default() -> RefineConfig {
        RefineConfig {
            iterations: 100,
            delta_translation: 0.01,
            delta_rotation: 0.01,
            initial_step: 0.1,
            backtrack_factor: 0.5,
            max_backtracks: 20,
        }
    }
}

/// Central finite-difference gradient of `f` in the pose parameter space
/// around `base` (evaluated at offset zero).
pub fn fd_gradient<F: Fn(&Pose) -> f64>(
    dim: u8,
    base: &Pose,
    f: &F,
    delta_t: f64,
    delta_r: f64,
) -> Vec<f64> {
    let n = param_len(dim);
    let nt = trans_len(dim);
    let mut grad = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n {
        let d = if k < nt { delta_t } else { delta_r };
        p[k] = d;
        let hi = f(&pose_from_params(dim, base, &p));
        p[k] = -d;
        let lo = f(&pose_from_params(dim, base, &p));
        p[k] = 0.0;
        grad[k] = (hi - lo) / (2.0 * d);
    }
    grad
}

/// Result of a single local maximization.
#[derive(Debug, Clone)]
pub struct RefineResult {
    pub pose: Pose,
    pub score: f64,
    pub iterations: usize,
    /// Score after every accepted iteration (non-decreasing).
    pub trace: Vec<f64>,
}

/// Maximizes `f` from `start` by nonlinear conjugate gradients
/// (Polak-Ribiere with restarts) and an Armijo backtracking line search.
pub fn cg_maximize<F: Fn(&Pose) -> f64 + Sync>(
    dim: u8,
    start: Pose,
    f: &F,
    cfg: &RefineConfig,
    step_scale: f64,
) -> RefineResult {
    let n = param_len(dim);
    let mut base = start;
    let mut score = f(&base);
    let mut trace = vec![score];
    let mut prev_grad: Vec<f64> = Vec::new();
    let mut dir: Vec<f64> = Vec::new();
    let step0 = cfg.initial_step * step_scale.max(cfg.delta_rotation);
    let mut iterations = 0;

    for _ in 0..cfg.iterations {
        let grad = fd_gradient(dim, &base, f, cfg.delta_translation, cfg.delta_rotation);
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2.sqrt() < 1e-12 {
            break;
        }
        let beta = if prev_grad.is_empty() {
            0.0
        } else {
            let prev2: f64 = prev_grad.iter().map(|g| g * g).sum();
            let num: f64 = grad
                .iter()
                .zip(prev_grad.iter())
                .map(|(g, p)| g * (g - p))
                .sum();
            (num / prev2).max(0.0)
        };
        let new_dir: Vec<f64> = if dir.is_empty() {
            grad.clone()
        } else {
            grad.iter().zip(dir.iter()).map(|(g, d)| g + beta * d).collect()
        };
        // Restart on a non-ascent direction.
        let ascent: f64 = new_dir.iter().zip(grad.iter()).map(|(d, g)| d * g).sum();
        let dir_used = if ascent <= 0.0 { grad.clone() } else { new_dir };
        let slope: f64 = dir_used.iter().zip(grad.iter()).map(|(d, g)| d * g).sum();

        let trial = |step: f64| -> (Pose, f64) {
            let p: Vec<f64> = dir_used.iter().map(|d| step * d).collect();
            let cand = pose_from_params(dim, &base, &p);
            let s = f(&cand);
            (cand, s)
        };
        let mut step = step0;
        let mut accepted = false;
        for k in 0..=cfg.max_backtracks {
            let (cand, cand_score) = trial(step);
            if cand_score >= score + 1e-4 * step * slope {
                let (mut best, mut best_score) = (cand, cand_score);
                if k == 0 {
                    // The full step was fine: grow while the score keeps rising.
                    let mut grown = step * 2.0;
                    for _ in 0..cfg.max_backtracks {
                        let (c, s) = trial(grown);
                        if s > best_score {
                            best = c;
                            best_score = s;
                            grown *= 2.0;
                        } else {
                            break;
                        }
                    }
                }
                base = best;
                score = best_score;
                accepted = true;
                break;
            }
            step *= cfg.backtrack_factor;
        }
        iterations += 1;
        if !accepted {
            break;
        }
        trace.push(score);
        dir = dir_used;
        prev_grad = grad;
        if n == 0 {
            break;
        }
    }
    RefineResult {
        pose: base,
        score,
        iterations,
        trace,
    }
}

/// Configuration for the global multi-start search.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub n_starts: usize,
    pub seed: u64,
    /// Per-axis translation sampling ranges.
    pub translation_range: [(f64, f64); 3],
    /// Rotation angle sampling range (radians, per rotation component).
    pub rotation_range: (f64, f64),
    pub refine: RefineConfig,
    /// Fraction of the best-scoring results used for error statistics.
    pub top_fraction: f64,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        let q = std::f64::consts::FRAC_PI_4;
        SearchConfig {
            n_starts: 25,
            seed: 0,
            translation_range: [(-2.5, 2.5), (-2.5, 2.5), (-2.5, 2.5)],
            rotation_range: (-q, q),
            refine: RefineConfig::default(),
            top_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub start: Pose,
    pub result: RefineResult,
}

/// Runs `cfg.n_starts` independent local maximizations of the direct score
/// from seeded random poses and returns the outcomes sorted by final score,
/// best first. Deterministic for a fixed seed.
pub fn multistart_search(
    f1: &AffinityField,
    f2: &AffinityField,
    cfg: &SearchConfig,
) -> Vec<SearchOutcome> {
    let dim = f1.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = Vec::with_capacity(cfg.n_starts);
    for _ in 0..cfg.n_starts {
        let mut t = [0.0; 3];
        for (k, slot) in t.iter_mut().enumerate().take(trans_len(dim)) {
            let (lo, hi) = cfg.translation_range[k];
            *slot = rng.gen_range(lo..=hi);
        }
        let rot = if dim == 2 {
            Rotation::Planar(rng.gen_range(cfg.rotation_range.0..=cfg.rotation_range.1))
        } else {
            let w = [
                rng.gen_range(cfg.rotation_range.0..=cfg.rotation_range.1),
                rng.gen_range(cfg.rotation_range.0..=cfg.rotation_range.1),
                rng.gen_range(cfg.rotation_range.0..=cfg.rotation_range.1),
            ];
            Rotation::Spatial(Quat::from_rotation_vector(w))
        };
        starts.push(Pose {
            rotation: rot,
            translation: t,
        });
    }
    let spacing = f1.grid().spacing[0];
    let objective = |pose: &Pose| -> f64 {
        score_direct(f1, f2, pose).map(real_score).unwrap_or(f64::NEG_INFINITY)
    };
    let mut outcomes: Vec<SearchOutcome> = starts
        .into_par_iter()
        .map(|start| SearchOutcome {
            start,
            result: cg_maximize(dim, start, &objective, &cfg.refine, spacing),
        })
        .collect();
    outcomes.sort_by(|a, b| {
        b.result
            .score
            .total_cmp(&a.result.score)
            .then_with(|| a.start.translation[0].total_cmp(&b.start.translation[0]))
    });
    outcomes
}

/// Translation error of a pose against a reference.
pub fn translation_error(pose: &Pose, reference: &Pose) -> f64 {
    norm(sub(pose.translation, reference.translation))
}

/// Rotation error (geodesic, radians) of a pose against a reference.
pub fn rotation_error(pose: &Pose, reference: &Pose) -> f64 {
    pose.rotation.angle_to(&reference.rotation)
}

/// RMS translation and rotation errors over the best `top_fraction` of the
/// outcomes (at least one).
pub fn pose_rmse(outcomes: &[SearchOutcome], reference: &Pose, top_fraction: f64) -> (f64, f64) {
    let k = ((outcomes.len() as f64 * top_fraction).ceil() as usize)
        .clamp(1, outcomes.len().max(1));
    let mut st = 0.0;
    let mut sr = 0.0;
    for o in outcomes.iter().take(k) {
        st += translation_error(&o.result.pose, reference).powi(2);
        sr += rotation_error(&o.result.pose, reference).powi(2);
    }
    ((st / k as f64).sqrt(), (sr / k as f64).sqrt())
}
