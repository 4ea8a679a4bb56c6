//! Skeletal density affinity fields.
//!
//! The affinity of a query point against a solid is the boundary integral of
//! the phi-kernel applied to the zeta projection, weighted by the projected
//! surface element. In 2D the spatial-angle measure is `cos(theta) ds / (2 pi eta)`
//! instead of the 3D `cos(theta) ds / (4 pi eta^2)`, which works out to an
//! extra factor of `2 eta` on the kernel-times-`cos(theta) ds` integrand.

mod field;
mod field_io;
mod oracle;

pub use field::{AffinityField, GridSpec};
pub use field_io::{read_field, write_field_binary, write_field_csv};
pub use oracle::{affinity_1d_oracle, AnalyticShape};

use crate::geometry::BoundarySolid;
use crate::math::{add, dist, gauss, scale, sub, Vec3};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AffinityError {
    #[error("phi kernel undefined on the imaginary axis (Re z = 0)")]
    ImaginaryAxis,
    #[error("grid of {nodes} nodes exceeds the capacity budget of {budget}")]
    Capacity { nodes: usize, budget: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Kernel parameters for both the skeletal affinity and the DSL baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    /// Thickness factor of the medial Gaussian.
    pub sigma: f64,
    /// Exterior weight.
    pub lambda1: f64,
    /// Interior weight.
    pub lambda2: f64,
    /// Truncation factor; 0 disables truncation.
    pub eps: f64,
    /// Probe radius, used only by the DSL baseline.
    pub probe_radius: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        // Validation defaults: sigma 0.5, lambda1 1, lambda2 3, eps = 3 sigma.
        KernelParams {
            sigma: 0.5,
            lambda1: 1.0,
            lambda2: 3.0,
            eps: 1.5,
            probe_radius: 0.5,
        }
    }
}

impl KernelParams {
    pub fn penalty_factor(&self) -> f64 {
        self.lambda2 / self.lambda1
    }

    pub fn validate(&self) -> Result<(), AffinityError> {
        if self.sigma <= 0.0 || self.lambda1 <= 0.0 || self.lambda2 <= 0.0 || self.eps < 0.0 {
            return Err(AffinityError::InvalidParameter(
                "require sigma, lambda1, lambda2 > 0 and eps >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Complex phi-kernel: `lambda(z)/sqrt(2 pi) * z^-2 * g_sigma(|tan angle(z)| - 1)`.
///
/// With `params.eps > 0` the Gaussian is truncated: the kernel is exactly 0
/// whenever `| |tan angle(z)| - 1 | > eps`.
pub fn phi_kernel(z: Complex64, params: &KernelParams) -> Result<Complex64, AffinityError> {
    if z.re == 0.0 {
        return Err(AffinityError::ImaginaryAxis);
    }
    let tan_abs = (z.im / z.re).abs();
    let x = tan_abs - 1.0;
    if params.eps > 0.0 && x.abs() > params.eps {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let lambda = if z.re > 0.0 {
        params.lambda1
    } else {
        -params.lambda2
    };
    let inv_sqrt_2pi = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    Ok(Complex64::new(lambda * inv_sqrt_2pi * gauss(x, params.sigma), 0.0) / (z * z))
}

/// Truncation factor guaranteeing `|rho - rho_truncated| <= e_m` (conservative
/// bound; `gamma_m` is an upper bound on the aggregated unsigned spatial
/// angle, at most `4 pi` in 3D / `2 pi` in 2D).
pub fn truncation_epsilon(params: &KernelParams, e_m: f64, gamma_m: f64) -> f64 {
    let lambda = params.lambda1.max(params.lambda2);
    let arg = lambda * gamma_m / (2.0 * std::f64::consts::PI * params.sigma * e_m);
    if arg <= 1.0 {
        0.0
    } else {
        params.sigma * (2.0 * arg.ln()).sqrt()
    }
}

/// Conservative `gamma_m` default for a given dimension.
pub fn default_gamma_m(dim: u8) -> f64 {
    match dim {
        2 => 2.0 * std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI,
    }
}

/// Swept-probe double-skin-layer baseline affinity. The skin and core
/// Gaussians share the truncation factor of the skeletal kernel, so the
/// layers have compact support when `params.eps > 0`.
pub fn dsl_affinity_at(p: Vec3, solid: &BoundarySolid, params: &KernelParams) -> Complex64 {
    let xi = solid.signed_distance(p).xi;
    let r = params.probe_radius;
    let layer = |x: f64, lambda: f64| {
        if params.eps > 0.0 && x.abs() > params.eps {
            0.0
        } else {
            lambda * gauss(x, params.sigma)
        }
    };
    Complex64::new(
        layer(xi / r - 1.0, params.lambda1),
        layer(xi / r + 1.0, params.lambda2),
    )
}

// Gauss-Legendre abscissae on [0, 1] (3-point) for segments.
const GL3_T: [f64; 3] = [0.1127016653792583, 0.5, 0.8872983346207417];
const GL3_W: [f64; 3] = [
    0.2777777777777778,
    0.4444444444444444,
    0.2777777777777778,
];

// 7-point symmetric triangle rule (degree 5), barycentric coordinates.
const TRI7: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    ([0.0597158717897698, 0.4701420641051151, 0.4701420641051151], 0.1323941527885062),
    ([0.4701420641051151, 0.0597158717897698, 0.4701420641051151], 0.1323941527885062),
    ([0.4701420641051151, 0.4701420641051151, 0.0597158717897698], 0.1323941527885062),
    ([0.7974269853530873, 0.1012865073234563, 0.1012865073234563], 0.1259391805448271),
    ([0.1012865073234563, 0.7974269853530873, 0.1012865073234563], 0.1259391805448271),
    ([0.1012865073234563, 0.1012865073234563, 0.7974269853530873], 0.1259391805448271),
];

/// Angular precision target for the recursive element refinement.
const DELTA_GAMMA_MAX: f64 = 1e-4;

struct Integrator<'a> {
    solid: &'a BoundarySolid,
    params: &'a KernelParams,
    p: Vec3,
    xi: f64,
    acc: Complex64,
}

impl Integrator<'_> {
    /// Quadrature over one segment; returns the unsigned angular increment.
    fn segment(&mut self, a: Vec3, b: Vec3, normal: Vec3, depth: u32) {
        let len = dist(a, b);
        let mut dgamma = 0.0;
        for (&t, &w) in GL3_T.iter().zip(GL3_W.iter()) {
            let q = add(a, scale(sub(b, a), t));
            let eta = dist(self.p, q);
            if eta <= 0.0 {
                continue;
            }
            let cos_t = crate::geometry::gaze_cos(self.p, q, normal);
            dgamma += (w * len * cos_t / eta).abs();
        }
        if dgamma > DELTA_GAMMA_MAX && depth < 16 && len > 0.02 * self.xi.abs() {
            let mid = scale(add(a, b), 0.5);
            self.segment(a, mid, normal, depth + 1);
            self.segment(mid, b, normal, depth + 1);
            return;
        }
        for (&t, &w) in GL3_T.iter().zip(GL3_W.iter()) {
            let q = add(a, scale(sub(b, a), t));
            let eta = dist(self.p, q);
            if eta <= 0.0 {
                continue;
            }
            let z = Complex64::new(self.xi, eta);
            let phi = phi_kernel(z, self.params).expect("xi != 0 inside integration");
            if phi.norm_sqr() == 0.0 {
                continue;
            }
            let cos_t = crate::geometry::gaze_cos(self.p, q, normal);
            // 2D spatial-angle normalization contributes the 2 eta factor.
            self.acc += phi * (cos_t * w * len * 2.0 * eta);
        }
    }

    fn triangle(&mut self, a: Vec3, b: Vec3, c: Vec3, normal: Vec3, depth: u32) {
        let area = crate::geometry::triangle_area(a, b, c);
        if area <= 0.0 {
            return;
        }
        let diam = dist(a, b).max(dist(b, c)).max(dist(c, a));
        let mut dgamma = 0.0;
        for (bary, w) in TRI7.iter() {
            let q = bary_point(a, b, c, *bary);
            let eta = dist(self.p, q);
            if eta <= 0.0 {
                continue;
            }
            let cos_t = crate::geometry::gaze_cos(self.p, q, normal);
            dgamma += (w * area * cos_t / (eta * eta)).abs();
        }
        if dgamma > DELTA_GAMMA_MAX && depth < 10 && diam > 0.02 * self.xi.abs() {
            let ab = scale(add(a, b), 0.5);
            let bc = scale(add(b, c), 0.5);
            let ca = scale(add(c, a), 0.5);
            self.triangle(a, ab, ca, normal, depth + 1);
            self.triangle(ab, b, bc, normal, depth + 1);
            self.triangle(ca, bc, c, normal, depth + 1);
            self.triangle(ab, bc, ca, normal, depth + 1);
            return;
        }
        for (bary, w) in TRI7.iter() {
            let q = bary_point(a, b, c, *bary);
            let eta = dist(self.p, q);
            if eta <= 0.0 {
                continue;
            }
            let z = Complex64::new(self.xi, eta);
            let phi = phi_kernel(z, self.params).expect("xi != 0 inside integration");
            if phi.norm_sqr() == 0.0 {
                continue;
            }
            let cos_t = crate::geometry::gaze_cos(self.p, q, normal);
            self.acc += phi * (cos_t * w * area);
        }
    }
}

fn bary_point(a: Vec3, b: Vec3, c: Vec3, bary: [f64; 3]) -> Vec3 {
    [
        bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
        bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
        bary[0] * a[2] + bary[1] * b[2] + bary[2] * c[2],
    ]
}

/// Skeletal density affinity of one query point (Gauss-Legendre per element,
/// refined until the per-element angular increment is below 1e-4).
pub fn affinity_at(p: Vec3, solid: &BoundarySolid, params: &KernelParams) -> Complex64 {
    let sd = solid.signed_distance(p);
    if sd.xi.abs() < solid.boundary_tolerance().max(1e-300) || sd.xi == 0.0 {
        // Boundary limit value.
        return Complex64::new(0.0, 0.0);
    }
    let elements: Vec<usize> = if params.eps > 0.0 {
        solid.contact_region(p, params.eps)
    } else {
        (0..solid.element_count()).collect()
    };
    let mut integ = Integrator {
        solid,
        params,
        p,
        xi: sd.xi,
        acc: Complex64::new(0.0, 0.0),
    };
    for e in elements {
        let vs = integ.solid.element_vertices(e);
        let n = integ.solid.normal(e);
        match solid.dimension() {
            2 => integ.segment(vs[0], vs[1], n, 0),
            _ => integ.triangle(vs[0], vs[1], vs[2], n, 0),
        }
    }
    integ.acc
}

/// Evaluates [`affinity_at`] on every node of `grid` in parallel.
pub fn affinity_field(
    solid: &BoundarySolid,
    grid: &GridSpec,
    params: &KernelParams,
    budget_nodes: usize,
) -> Result<AffinityField, AffinityError> {
    params.validate()?;
    let nodes = grid.node_count();
    if nodes > budget_nodes {
        return Err(AffinityError::Capacity {
            nodes,
            budget: budget_nodes,
        });
    }
    use rayon::prelude::*;
    let data: Vec<Complex64> = (0..nodes)
        .into_par_iter()
        .map(|i| affinity_at(grid.node_pos(i), solid, params))
        .collect();
    Ok(AffinityField::new(grid.clone(), solid.dimension(), data, *params))
}

/// Same grid sweep with the DSL baseline affinity.
pub fn dsl_field(
    solid: &BoundarySolid,
    grid: &GridSpec,
    params: &KernelParams,
    budget_nodes: usize,
) -> Result<AffinityField, AffinityError> {
    params.validate()?;
    let nodes = grid.node_count();
    if nodes > budget_nodes {
        return Err(AffinityError::Capacity {
            nodes,
            budget: budget_nodes,
        });
    }
    use rayon::prelude::*;
    let data: Vec<Complex64> = (0..nodes)
        .into_par_iter()
        .map(|i| dsl_affinity_at(grid.node_pos(i), solid, params))
        .collect();
    Ok(AffinityField::new(grid.clone(), solid.dimension(), data, *params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(sigma: f64, l1: f64, l2: f64, eps: f64) -> KernelParams {
        KernelParams {
            sigma,
            lambda1: l1,
            lambda2: l2,
            eps,
            probe_radius: 0.5,
        }
    }

    #[test]
    fn phi_kernel_hand_values() {
        // z = 1+i: g_0.5(0) = 0.79788, 1/z^2 = -i/2.
        let p = params(0.5, 1.0, 3.0, 0.0);
        let v = phi_kernel(Complex64::new(1.0, 1.0), &p).unwrap();
        assert_relative_eq!(v.re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(v.im, -0.15915494309189535, epsilon = 1e-6);

        // z = -1+i: lambda = -3, 1/z^2 = +i/2.
        let v = phi_kernel(Complex64::new(-1.0, 1.0), &p).unwrap();
        assert_relative_eq!(v.re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(v.im, -0.47746482927568606, epsilon = 1e-6);
    }

    #[test]
    fn phi_kernel_tail_and_truncation() {
        let p = params(0.5, 1.0, 3.0, 0.0);
        let v = phi_kernel(Complex64::new(1.0, 10.0), &p).unwrap();
        assert!(v.norm() < 1e-70);
        let pt = params(0.5, 1.0, 3.0, 1.5);
        let v = phi_kernel(Complex64::new(1.0, 10.0), &pt).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn phi_kernel_imaginary_axis_is_domain_error() {
        let p = KernelParams::default();
        assert!(phi_kernel(Complex64::new(0.0, 1.0), &p).is_err());
    }

    #[test]
    fn truncation_epsilon_formula_and_monotonicity() {
        let p = params(0.5, 1.0, 3.0, 0.0);
        let gm = 4.0 * std::f64::consts::PI;
        let e = truncation_epsilon(&p, 1e-6, gm);
        let expect = 0.5 * (2.0 * (3.0 * gm / (2.0 * std::f64::consts::PI * 0.5 * 1e-6)).ln()).sqrt();
        assert_relative_eq!(e, expect, epsilon = 1e-12);
        let e2 = truncation_epsilon(&p, 2e-6, gm);
        assert!(e2 < e);
        // Already-satisfied bound clamps to zero.
        assert_eq!(truncation_epsilon(&p, 1e9, gm), 0.0);
    }

    #[test]
    fn dsl_peaks_at_probe_offsets() {
        use crate::shapes;
        let solid = shapes::circle(1.0, 0.05).unwrap();
        let p = KernelParams::default();
        let r = p.probe_radius;
        // xi ~ +R outside.
        let v = dsl_affinity_at([1.0 + r, 0.0, 0.0], &solid, &p);
        assert_relative_eq!(v.re, p.lambda1 * crate::math::gauss(0.0, p.sigma), epsilon = 1e-2);
        // xi ~ -R inside.
        let v = dsl_affinity_at([1.0 - r - 2.0 * r, 0.0, 0.0], &solid, &p);
        let _ = v;
        let v = dsl_affinity_at([1.0 - r, 0.0, 0.0], &solid, &p);
        // xi = -R + ... point at radius 1-r has xi = -r.
        assert_relative_eq!(v.im, p.lambda2 * crate::math::gauss(0.0, p.sigma), epsilon = 1e-2);
    }
}
