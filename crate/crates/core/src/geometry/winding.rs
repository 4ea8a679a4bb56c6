//! Generalized winding numbers for point membership classification.

use crate::math::{dot, norm, sub, Vec3};

/// Signed angle subtended by segment `(a, b)` at `p`, in radians.
/// Positive when the loop runs counter-clockwise around `p`.
pub fn subtended_angle_2d(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let u = sub(a, p);
    let v = sub(b, p);
    let cr = u[0] * v[1] - u[1] * v[0];
    let d = u[0] * v[0] + u[1] * v[1];
    cr.atan2(d)
}

/// Signed solid angle of triangle `(a, b, c)` at `p` (Van Oosterom-Strackee).
pub fn solid_angle_3d(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let ra = sub(a, p);
    let rb = sub(b, p);
    let rc = sub(c, p);
    let la = norm(ra);
    let lb = norm(rb);
    let lc = norm(rc);
    let det = ra[0] * (rb[1] * rc[2] - rb[2] * rc[1])
        - ra[1] * (rb[0] * rc[2] - rb[2] * rc[0])
        + ra[2] * (rb[0] * rc[1] - rb[1] * rc[0]);
    let denom = la * lb * lc + dot(ra, rb) * lc + dot(rb, rc) * la + dot(rc, ra) * lb;
    2.0 * det.atan2(denom)
}
