//! Damped rigid-body relaxation driven by the score gradient.

use super::{fd_gradient, param_len, pose_from_params, trans_len};
use crate::affinity::AffinityField;
use crate::correlation::{real_score, score_direct, Pose};

#[derive(Debug, Clone, Copy)]
pub struct DynamicsConfig {
    pub dt: f64,
    pub steps: usize,
    pub mass: f64,
    pub inertia: f64,
    pub damping: f64,
    pub delta_translation: f64,
    pub delta_rotation: f64,
}

impl Default for DynamicsConfig {
    fn default() -> DynamicsConfig {
        DynamicsConfig {
            dt: 0.01,
            steps: 1000,
            mass: 1.0,
            inertia: 1.0,
            damping: 2.0,
            delta_translation: 0.01,
            delta_rotation: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub time: f64,
    pub pose: Pose,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// True if the integration stopped early on a non-finite state.
    pub aborted: bool,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has at least the start")
    }
}

/// Integrates the pose of the moving field under the attraction force
/// `F = k grad Re s(tau)` with viscous damping, semi-implicit Euler. The gain
/// `k` is normalized so the initial force has unit magnitude.
pub fn simulate_dynamics(
    f1: &AffinityField,
    f2: &AffinityField,
    start: Pose,
    cfg: &DynamicsConfig,
) -> Trajectory {
    let dim = f1.dimension();
    let n = param_len(dim);
    let nt = trans_len(dim);
    let objective = |pose: &Pose| -> f64 {
        score_direct(f1, f2, pose).map(real_score).unwrap_or(f64::NEG_INFINITY)
    };

    let mut pose = start;
    let mut vel = vec![0.0; n];
    let g0 = fd_gradient(dim, &pose, &objective, cfg.delta_translation, cfg.delta_rotation);
    let f0: f64 = g0.iter().map(|g| g * g).sum::<f64>().sqrt();
    let gain = if f0 > 0.0 { 1.0 / f0 } else { 1.0 };

    let mut samples = vec![TrajectorySample {
        time: 0.0,
        pose,
        score: objective(&pose),
    }];
    let mut aborted = false;

    for step in 1..=cfg.steps {
        let grad = fd_gradient(dim, &pose, &objective, cfg.delta_translation, cfg.delta_rotation);
        let mut finite = true;
        for k in 0..n {
            let inv_m = if k < nt { 1.0 / cfg.mass } else { 1.0 / cfg.inertia };
            let force = gain * grad[k] - cfg.damping * vel[k];
            vel[k] += cfg.dt * force * inv_m;
            if !vel[k].is_finite() {
                finite = false;
            }
        }
        if !finite {
            aborted = true;
            break;
        }
        let dp: Vec<f64> = vel.iter().map(|v| cfg.dt * v).collect();
        pose = pose_from_params(dim, &pose, &dp);
        let score = objective(&pose);
        if !score.is_finite() || !pose.translation.iter().all(|c| c.is_finite()) {
            aborted = true;
            break;
        }
        samples.push(TrajectorySample {
            time: step as f64 * cfg.dt,
            pose,
            score,
        });
    }
    Trajectory { samples, aborted }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::{AffinityField, GridSpec, KernelParams};
    use num_complex::Complex64;

    fn gaussian_blob(dims: [usize; 3], origin: [f64; 3], center: [f64; 3]) -> AffinityField {
        let grid = GridSpec {
            origin,
            spacing: [0.25, 0.25, 1.0],
            dims,
        };
        let data = (0..grid.node_count())
            .map(|i| {
                let p = grid.node_pos(i);
                let d2 = (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2);
                Complex64::new((-d2).exp(), 0.0)
            })
            .collect();
        AffinityField::new(grid, 2, data, KernelParams::default())
    }

    #[test]
    fn dynamics_descends_toward_alignment() {
        // Two identical blobs: the score peaks at zero relative translation.
        let f1 = gaussian_blob([17, 17, 1], [-2.0, -2.0, 0.0], [0.0, 0.0, 0.0]);
        let f2 = gaussian_blob([17, 17, 1], [-2.0, -2.0, 0.0], [0.0, 0.0, 0.0]);
        let start = Pose::planar(0.6, -0.4, 0.0);
        let cfg = DynamicsConfig {
            steps: 400,
            ..DynamicsConfig::default()
        };
        let traj = simulate_dynamics(&f1, &f2, start, &cfg);
        assert!(!traj.aborted);
        let first = &traj.samples[0];
        let last = traj.last();
        assert!(last.score > first.score);
        let d0 = (first.pose.translation[0].powi(2) + first.pose.translation[1].powi(2)).sqrt();
        let d1 = (last.pose.translation[0].powi(2) + last.pose.translation[1].powi(2)).sqrt();
        assert!(d1 < 0.5 * d0, "start dist {d0}, end dist {d1}");
    }
}
