//! One-parameter sweeps of the kernel settings with local re-refinement.

use super::{cg_maximize, rotation_error, translation_error, RefineConfig};
use crate::affinity::{AffinityField, KernelParams};
use crate::correlation::{real_score, score_direct, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Varies the penalty ratio lambda2/lambda1 keeping lambda1*lambda2 fixed.
    Penalty,
    /// Varies the kernel width sigma.
    Sigma,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub params: KernelParams,
    pub pose: Pose,
    pub score: f64,
    pub translation_error: f64,
    pub rotation_error: f64,
}

/// Kernel parameters for one sweep value along `axis`, derived from `base`.
pub fn params_for(base: &KernelParams, axis: SweepAxis, value: f64) -> KernelParams {
    let mut p = *base;
    match axis {
        SweepAxis::Penalty => {
            let product = base.lambda1 * base.lambda2;
            p.lambda1 = (product / value).sqrt();
            p.lambda2 = (product * value).sqrt();
        }
        SweepAxis::Sigma => {
            let ratio = base.eps / base.sigma;
            p.sigma = value;
            p.eps = ratio * value;
        }
    }
    p
}

/// For each value along `axis`: rebuild both fields with the adjusted kernel,
/// relax the pose from `reference` by a short conjugate-gradient run, and
/// record the resulting score and pose errors against `reference`.
pub fn parameter_sweep<B>(
    build: B,
    base: &KernelParams,
    axis: SweepAxis,
    values: &[f64],
    reference: &Pose,
    relax_iterations: usize,
) -> Vec<SweepPoint>
where
    B: Fn(&KernelParams) -> (AffinityField, AffinityField),
{
    values
        .iter()
        .map(|&value| {
            let params = params_for(base, axis, value);
            let (f1, f2) = build(&params);
            let objective = |pose: &Pose| -> f64 {
                score_direct(&f1, &f2, pose)
                    .map(real_score)
                    .unwrap_or(f64::NEG_INFINITY)
            };
            let cfg = RefineConfig {
                iterations: relax_iterations,
                ..RefineConfig::default()
            };
            let r = cg_maximize(f1.dimension(), *reference, &objective, &cfg, f1.grid().spacing[0]);
            SweepPoint {
                value,
                params,
                pose: r.pose,
                score: r.score,
                translation_error: translation_error(&r.pose, reference),
                rotation_error: rotation_error(&r.pose, reference),
            }
        })
        .collect()
}
