//! Analytic 1D affinity oracle for radially symmetric shapes.
//!
//! For a circle or sphere with the query point at distance `offset` from the
//! center, the spatial-angle derivative has a closed form, so the affinity
//! reduces to a 1D integral evaluated here by adaptive quadrature. Used as an
//! independent check of the mesh-integrated affinity.

use super::KernelParams;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub enum AnalyticShape {
    Circle { radius: f64 },
    Sphere { radius: f64 },
}

/// Affinity at a point a distance `offset >= 0` from the shape center.
pub fn affinity_1d_oracle(shape: AnalyticShape, offset: f64, params: &KernelParams) -> Complex64 {
    let (radius, is_2d) = match shape {
        AnalyticShape::Circle { radius } => (radius, true),
        AnalyticShape::Sphere { radius } => (radius, false),
    };
    assert!(radius > 0.0 && offset >= 0.0);
    let a = radius;
    let c = offset;
    let xi_abs = (c - a).abs();
    if xi_abs < 1e-14 * a {
        // On the boundary: limit value 0.
        return Complex64::new(0.0, 0.0);
    }
    let pmc = if c > a { 1.0 } else { -1.0 };
    let lambda = if pmc > 0.0 {
        params.lambda1
    } else {
        -params.lambda2
    };

    // Integrand weight in the rescaled radial coordinate r = eta/|xi|.
    let weight = |r: f64| -> Complex64 {
        if params.eps > 0.0 && (r - 1.0) > params.eps {
            return Complex64::new(0.0, 0.0);
        }
        let g = (-0.5 * ((r - 1.0) / params.sigma).powi(2)).exp();
        let phase = -2.0 * r.atan2(pmc);
        Complex64::from_polar(g / (1.0 + 1.0 / (r * r)), phase)
    };

    if c < 1e-12 * a {
        // Query at the exact center: the whole boundary sits at r = 1 and the
        // spatial-angle derivative is a Dirac mass of total -1.
        return weight(1.0) * Complex64::new(-2.0 * lambda / params.sigma, 0.0);
    }

    // Parameterize the boundary by the polar angle t seen from the center;
    // eta^2 = c^2 + a^2 - 2 a c cos t. The normalized spatial-angle measure
    // (full surround = 1) has density dgamma/dt in closed form.
    let f = |t: f64| -> Complex64 {
        let cos_t = t.cos();
        let eta2 = c * c + a * a - 2.0 * a * c * cos_t;
        let eta = eta2.sqrt();
        let r = eta / xi_abs;
        let dgamma_dt = if is_2d {
            a * (c * cos_t - a) / (std::f64::consts::PI * eta2)
        } else {
            a * a * t.sin() * (c * cos_t - a) / (2.0 * eta2 * eta)
        };
        weight(r) * dgamma_dt
    };
    // Pre-split so narrow truncation bands are not missed by the first probes.
    let panels = 64;
    let mut integral = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let lo = std::f64::consts::PI * k as f64 / panels as f64;
        let hi = std::f64::consts::PI * (k + 1) as f64 / panels as f64;
        integral += adaptive_simpson(&f, lo, hi, 1e-13, 40);
    }
    integral * (2.0 * lambda / params.sigma)
}

fn simpson(_f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64, depth: u32) -> Complex64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(f, a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(f, a, m, fa, flm, fm);
    let right = simpson(f, m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_center_is_dirac_limit() {
        let p = KernelParams {
            eps: 0.0,
            ..KernelParams::default()
        };
        let v = affinity_1d_oracle(AnalyticShape::Sphere { radius: 1.0 }, 0.0, &p);
        // All boundary at |tan angle| = 1, interior: rho = i lambda2 / sigma.
        assert_relative_eq!(v.re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(v.im, p.lambda2 / p.sigma, epsilon = 1e-12);
    }

    #[test]
    fn near_center_approaches_dirac_limit() {
        let p = KernelParams {
            eps: 0.0,
            ..KernelParams::default()
        };
        let center = affinity_1d_oracle(AnalyticShape::Sphere { radius: 1.0 }, 0.0, &p);
        let near = affinity_1d_oracle(AnalyticShape::Sphere { radius: 1.0 }, 1e-4, &p);
        assert!((center - near).norm() < 1e-3 * center.norm());
        let center = affinity_1d_oracle(AnalyticShape::Circle { radius: 1.0 }, 0.0, &p);
        let near = affinity_1d_oracle(AnalyticShape::Circle { radius: 1.0 }, 1e-4, &p);
        assert!((center - near).norm() < 1e-3 * center.norm());
    }

    #[test]
    fn far_field_decays_inverse_square() {
        let p = KernelParams {
            eps: 0.0,
            ..KernelParams::default()
        };
        // Far outside, the whole boundary falls inside the Gaussian window
        // and the net subtended angle cancels, so the magnitude drops at
        // least as fast as 1/offset^2 when the offset doubles.
        let v1 = affinity_1d_oracle(AnalyticShape::Sphere { radius: 1.0 }, 20.0, &p);
        let v2 = affinity_1d_oracle(AnalyticShape::Sphere { radius: 1.0 }, 40.0, &p);
        let ratio = v1.norm() / v2.norm();
        assert!(ratio > 3.5 && ratio < 20.0, "decay ratio {ratio}");
    }

    #[test]
    fn on_boundary_is_zero() {
        let p = KernelParams::default();
        let v = affinity_1d_oracle(AnalyticShape::Circle { radius: 1.0 }, 1.0, &p);
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }
}
