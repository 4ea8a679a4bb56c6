//! Small vector/rotation helpers shared across the crate.
//!
//! Points are stored as `[f64; 3]` regardless of dimension; planar solids
//! keep `z = 0` everywhere and ignore the third component.

use num_complex::Complex64;

pub type Vec3 = [f64; 3];

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}

pub fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    scale(a, 1.0 / n)
}

/// Isotropic Gauss function `g_sigma(x) = exp(-x^2 / 2 sigma^2) / (sqrt(2 pi) sigma)`.
pub fn gauss(x: f64, sigma: f64) -> f64 {
    let t = x / sigma;
    (-0.5 * t * t).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sigma)
}

/// Unit quaternion `(w, x, y, z)` representing a proper rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Quat {
        Quat { w, x, y, z }
    }

    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Quat {
        let n = norm(axis);
        if n < 1e-300 {
            return Quat::IDENTITY;
        }
        let (s, c) = (0.5 * angle).sin_cos();
        let a = scale(axis, s / n);
        Quat::new(c, a[0], a[1], a[2])
    }

    /// Rotation that maps a body-frame axis-angle increment `v` (|v| = angle).
    pub fn from_rotation_vector(v: Vec3) -> Quat {
        Quat::from_axis_angle(v, norm(v))
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(self) -> Quat {
        let n = self.norm();
        Quat::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    pub fn conjugate(self) -> Quat {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Hamilton product `self * rhs` (apply `rhs` first).
    pub fn mul(self, rhs: Quat) -> Quat {
        Quat::new(
            self.w * rhs.w - self.x * rhs.x - self.y * rhs.y - self.z * rhs.z,
            self.w * rhs.x + self.x * rhs.w + self.y * rhs.z - self.z * rhs.y,
            self.w * rhs.y - self.x * rhs.z + self.y * rhs.w + self.z * rhs.x,
            self.w * rhs.z + self.x * rhs.y - self.y * rhs.x + self.z * rhs.w,
        )
    }

    pub fn rotate(self, v: Vec3) -> Vec3 {
        // q v q* expanded via the cross-product form.
        let u = [self.x, self.y, self.z];
        let t = scale(cross(u, v), 2.0);
        add(add(v, scale(t, self.w)), cross(u, t))
    }

    /// Geodesic distance on SO(3) in radians, insensitive to the q/-q double cover.
    pub fn angle_to(self, other: Quat) -> f64 {
        let d = self.conjugate().mul(other);
        let c = d.w.abs().min(1.0);
        2.0 * c.acos()
    }
}

/// Signed complex square `z^2` helper for kernel denominators.
pub fn csq(z: Complex64) -> Complex64 {
    z * z
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quat_rotation_matches_axis_angle() {
        let q = Quat::from_axis_angle([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2);
        let v = q.rotate([1.0, 0.0, 0.0]);
        assert_relative_eq!(v[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(v[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn quat_group_axioms_on_random_triples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let mut r = || {
                Quat::from_rotation_vector([
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                ])
            };
            let (a, b, c) = (r(), r(), r());
            let ab_c = a.mul(b).mul(c);
            let a_bc = a.mul(b.mul(c));
            assert!((ab_c.w - a_bc.w).abs() < 1e-12);
            assert!((ab_c.x - a_bc.x).abs() < 1e-12);
            let inv = a.conjugate().mul(a);
            assert!((inv.w.abs() - 1.0).abs() < 1e-12);
            assert!(a.norm() - 1.0 < 1e-9);
        }
    }

    #[test]
    fn gauss_peak_value() {
        assert_relative_eq!(gauss(0.0, 0.5), 0.7978845608028654, epsilon = 1e-12);
    }
}
