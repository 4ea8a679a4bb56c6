//! Built-in shape generators for validation runs.
//!
//! The three 2D example pairs are peg-and-socket constructions assembled from
//! straight segments and discretized arcs. Each pair is generated in its
//! fitted configuration, so the reference pose of the moving part is the
//! identity. Parameters below are fixed so results are comparable across runs.

use crate::geometry::{discretize_arc, BoundarySolid, GeometryError};
use crate::math::{normalize, scale, Vec3};
use std::collections::HashMap;

/// Circle of given radius centered at the origin, chords of at most `max_chord`.
pub fn circle_loop(center: [f64; 2], radius: f64, max_chord: f64) -> Vec<[f64; 2]> {
    let mut pts = discretize_arc(center, radius, (0.0, 2.0 * std::f64::consts::PI), max_chord)
        .expect("valid arc");
    pts.pop(); // drop duplicated closing vertex
    pts
}

pub fn circle(radius: f64, max_chord: f64) -> Result<BoundarySolid, GeometryError> {
    BoundarySolid::from_loops_2d(&[circle_loop([0.0, 0.0], radius, max_chord)], max_chord)
}

pub fn rectangle_loop(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<[f64; 2]> {
    vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
}

/// Identifier for the three validation pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExamplePair {
    /// Rectangular notch + square peg.
    Square,
    /// Semicircular notch + round peg.
    Round,
    /// Triangular notch + wedge peg.
    Wedge,
}

impl ExamplePair {
    pub fn from_index(i: usize) -> Option<ExamplePair> {
        match i {
            1 => Some(ExamplePair::Square),
            2 => Some(ExamplePair::Round),
            3 => Some(ExamplePair::Wedge),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExamplePair::Square => "example1",
            ExamplePair::Round => "example2",
            ExamplePair::Wedge => "example3",
        }
    }
}

/// Vertex loops of (socket, peg) for one example pair, peg in the fitted pose.
pub fn example_pair_loops(which: ExamplePair) -> (Vec<Vec<[f64; 2]>>, Vec<Vec<[f64; 2]>>) {
    let (mut socket, mut peg) = example_pair_loops_unit(which);
    // Feature sizes are kept large relative to the default kernel width so
    // mismatched pairs are clearly discriminated.
    let k = 1.5;
    for lp in socket.iter_mut().chain(peg.iter_mut()) {
        for v in lp.iter_mut() {
            v[0] *= k;
            v[1] *= k;
        }
    }
    (socket, peg)
}

fn example_pair_loops_unit(which: ExamplePair) -> (Vec<Vec<[f64; 2]>>, Vec<Vec<[f64; 2]>>) {
    // Common socket body: a 4 x 3 block with a notch cut into the top edge.
    // Each peg is a lid over the notch; the lid overhang is kept narrow so
    // the notch geometry, not the flat seat, dominates the fit score.
    let (bx0, by0, bx1, by1) = (-2.0, -1.5, 2.0, 1.5);
    let (lx0, lx1, ly1) = (-1.4, 1.4, 2.3);
    match which {
        ExamplePair::Square => {
            let socket = vec![vec![
                [bx0, by0],
                [bx1, by0],
                [bx1, by1],
                [0.3, by1],
                [0.3, 0.3],
                [-0.3, 0.3],
                [-0.3, by1],
                [bx0, by1],
            ]];
            let peg = vec![vec![
                [-0.3, 0.3],
                [0.3, 0.3],
                [0.3, by1],
                [lx1, by1],
                [lx1, ly1],
                [lx0, ly1],
                [lx0, by1],
                [-0.3, by1],
            ]];
            (socket, peg)
        }
        ExamplePair::Round => {
            // Undercut circular notch: center below the top edge, so the
            // mouth is narrower than the disc diameter.
            let r = 0.8;
            let cy = 0.8;
            let theta = ((by1 - cy) / r).asin();
            let mouth = r * theta.cos();
            let mut loop1 = vec![[bx0, by0], [bx1, by0], [bx1, by1], [mouth, by1]];
            // Clockwise around the circle from the right mouth point through
            // the bottom to the left mouth point (material outside the disc).
            let arc = discretize_arc(
                [0.0, cy],
                r,
                (theta, -std::f64::consts::PI - theta),
                0.1,
            )
            .expect("valid arc");
            loop1.extend(arc);
            loop1.push([-mouth, by1]);
            loop1.push([bx0, by1]);
            dedup_consecutive(&mut loop1);
            let mut peg_loop = vec![
                [lx1, by1],
                [lx1, ly1],
                [lx0, ly1],
                [lx0, by1],
                [-mouth, by1],
            ];
            // Counter-clockwise around the disc from the left mouth point
            // through the bottom back to the right mouth point.
            let arc = discretize_arc(
                [0.0, cy],
                r,
                (
                    std::f64::consts::PI - theta,
                    2.0 * std::f64::consts::PI + theta,
                ),
                0.1,
            )
            .expect("valid arc");
            peg_loop.extend(arc);
            peg_loop.push([mouth, by1]);
            dedup_consecutive(&mut peg_loop);
            (vec![loop1], vec![peg_loop])
        }
        ExamplePair::Wedge => {
            let socket = vec![vec![
                [bx0, by0],
                [bx1, by0],
                [bx1, by1],
                [0.3, by1],
                [0.7, 0.3],
                [-0.7, 0.3],
                [-0.3, by1],
                [bx0, by1],
            ]];
            let peg = vec![vec![
                [-0.7, 0.3],
                [0.7, 0.3],
                [0.3, by1],
                [lx1, by1],
                [lx1, ly1],
                [lx0, ly1],
                [lx0, by1],
                [-0.3, by1],
            ]];
            (socket, peg)
        }
    }
}

fn dedup_consecutive(pts: &mut Vec<[f64; 2]>) {
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    if pts.len() > 1 {
        let (first, last) = (pts[0], *pts.last().unwrap());
        if (first[0] - last[0]).abs() < 1e-12 && (first[1] - last[1]).abs() < 1e-12 {
            pts.pop();
        }
    }
}

/// Builds (socket, peg) solids for one example pair, fitted at identity.
pub fn example_pair(
    which: ExamplePair,
    h_max: f64,
) -> Result<(BoundarySolid, BoundarySolid), GeometryError> {
    let (socket, peg) = example_pair_loops(which);
    Ok((
        BoundarySolid::from_loops_2d(&socket, h_max)?,
        BoundarySolid::from_loops_2d(&peg, h_max)?,
    ))
}

/// Triangle mesh builder with exact-key vertex deduplication.
pub struct MeshBuilder {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    lookup: HashMap<(i64, i64, i64), usize>,
}

impl MeshBuilder {
    pub fn new() -> MeshBuilder {
        MeshBuilder {
            vertices: Vec::new(),
            triangles: Vec::new(),
            lookup: HashMap::new(),
        }
    }

    fn vertex(&mut self, p: Vec3) -> usize {
        let key = (
            (p[0] * 1e9).round() as i64,
            (p[1] * 1e9).round() as i64,
            (p[2] * 1e9).round() as i64,
        );
        if let Some(&i) = self.lookup.get(&key) {
            return i;
        }
        self.vertices.push(p);
        let i = self.vertices.len() - 1;
        self.lookup.insert(key, i);
        i
    }

    /// Triangle with vertices counter-clockwise seen from outside.
    pub fn tri(&mut self, a: Vec3, b: Vec3, c: Vec3) {
        let (ia, ib, ic) = (self.vertex(a), self.vertex(b), self.vertex(c));
        self.triangles.push([ia, ib, ic]);
    }

    /// Quad with vertices counter-clockwise seen from outside.
    pub fn quad(&mut self, a: Vec3, b: Vec3, c: Vec3, d: Vec3) {
        self.tri(a, b, c);
        self.tri(a, c, d);
    }

    pub fn build(self) -> (Vec<Vec3>, Vec<[usize; 3]>) {
        (self.vertices, self.triangles)
    }
}

impl Default for MeshBuilder {
    fn default() -> Self {
        Self::new()
    }
}

/// Axis-aligned box mesh with outward orientation.
pub fn box_mesh(min: Vec3, max: Vec3) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let (x0, y0, z0) = (min[0], min[1], min[2]);
    let (x1, y1, z1) = (max[0], max[1], max[2]);
    let mut m = MeshBuilder::new();
    // +z and -z
    m.quad([x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1]);
    m.quad([x0, y0, z0], [x0, y1, z0], [x1, y1, z0], [x1, y0, z0]);
    // +x and -x
    m.quad([x1, y0, z0], [x1, y1, z0], [x1, y1, z1], [x1, y0, z1]);
    m.quad([x0, y0, z0], [x0, y0, z1], [x0, y1, z1], [x0, y1, z0]);
    // +y and -y
    m.quad([x0, y1, z0], [x0, y1, z1], [x1, y1, z1], [x1, y1, z0]);
    m.quad([x0, y0, z0], [x1, y0, z0], [x1, y0, z1], [x0, y0, z1]);
    m.build()
}

/// Block with a rectangular pocket sunk into its top (+z) face.
///
/// Outer box `[-hx, hx] x [-hy, hy] x [-hz, hz]`, pocket
/// `[-px, px] x [-py, py]` of given depth from the top.
pub fn pocket_block_mesh(hx: f64, hy: f64, hz: f64, px: f64, py: f64, depth: f64) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    assert!(px < hx && py < hy && depth <= 2.0 * hz);
    let zf = hz - depth; // pocket floor
    let mut m = MeshBuilder::new();
    // Bottom.
    m.quad([-hx, -hy, -hz], [-hx, hy, -hz], [hx, hy, -hz], [hx, -hy, -hz]);
    // Outer sides.
    m.quad([hx, -hy, -hz], [hx, hy, -hz], [hx, hy, hz], [hx, -hy, hz]);
    m.quad([-hx, -hy, -hz], [-hx, -hy, hz], [-hx, hy, hz], [-hx, hy, -hz]);
    m.quad([-hx, hy, -hz], [-hx, hy, hz], [hx, hy, hz], [hx, hy, -hz]);
    m.quad([-hx, -hy, -hz], [hx, -hy, -hz], [hx, -hy, hz], [-hx, -hy, hz]);
    // Top ring (four trapezoids around the pocket mouth), normal +z.
    m.quad([-hx, -hy, hz], [hx, -hy, hz], [px, -py, hz], [-px, -py, hz]);
    m.quad([hx, -hy, hz], [hx, hy, hz], [px, py, hz], [px, -py, hz]);
    m.quad([hx, hy, hz], [-hx, hy, hz], [-px, py, hz], [px, py, hz]);
    m.quad([-hx, hy, hz], [-hx, -hy, hz], [-px, -py, hz], [-px, py, hz]);
    // Pocket walls: outward normal of the solid points into the pocket cavity.
    m.quad([-px, -py, hz], [px, -py, hz], [px, -py, zf], [-px, -py, zf]);
    m.quad([px, -py, hz], [px, py, hz], [px, py, zf], [px, -py, zf]);
    m.quad([px, py, hz], [-px, py, hz], [-px, py, zf], [px, py, zf]);
    m.quad([-px, py, hz], [-px, -py, hz], [-px, -py, zf], [-px, py, zf]);
    // Pocket floor, normal +z.
    m.quad([-px, -py, zf], [px, -py, zf], [px, py, zf], [-px, py, zf]);
    m.build()
}

/// Peg matching [`pocket_block_mesh`]: cross-section `[-px, px] x [-py, py]`,
/// spanning z from the pocket floor to `z_top`. Fitted pose is the identity.
pub fn pocket_peg_mesh(hz: f64, px: f64, py: f64, depth: f64, z_top: f64) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let zf = hz - depth;
    box_mesh([-px, -py, zf], [px, py, z_top])
}

/// Icosphere: subdivided icosahedron projected to the sphere.
pub fn icosphere_mesh(radius: f64, subdivisions: u32) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let base: [Vec3; 12] = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let faces: [[usize; 3]; 20] = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let mut vertices: Vec<Vec3> = base
        .iter()
        .map(|v| scale(normalize(*v), radius))
        .collect();
    let mut triangles: Vec<[usize; 3]> = faces.to_vec();
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for t in &triangles {
            let mut mid = |i: usize, j: usize, vs: &mut Vec<Vec3>| -> usize {
                let key = (i.min(j), i.max(j));
                *midpoints.entry(key).or_insert_with(|| {
                    let m = [
                        0.5 * (vs[i][0] + vs[j][0]),
                        0.5 * (vs[i][1] + vs[j][1]),
                        0.5 * (vs[i][2] + vs[j][2]),
                    ];
                    vs.push(scale(normalize(m), radius));
                    vs.len() - 1
                })
            };
            let ab = mid(t[0], t[1], &mut vertices);
            let bc = mid(t[1], t[2], &mut vertices);
            let ca = mid(t[2], t[0], &mut vertices);
            next.push([t[0], ab, ca]);
            next.push([ab, t[1], bc]);
            next.push([ca, bc, t[2]]);
            next.push([ab, bc, ca]);
        }
        triangles = next;
    }
    (vertices, triangles)
}

pub fn icosphere(radius: f64, subdivisions: u32) -> Result<BoundarySolid, GeometryError> {
    let (v, t) = icosphere_mesh(radius, subdivisions);
    // h_max large: the mesh already has the target resolution.
    BoundarySolid::from_triangles_3d(v, t, f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_chord_count() {
        // max_chord 0.1 on the unit circle needs >= ceil(pi / asin(0.05)) chords.
        let lp = circle_loop([0.0, 0.0], 1.0, 0.1);
        assert!(lp.len() >= 63, "got {}", lp.len());
        for (i, a) in lp.iter().enumerate() {
            let b = lp[(i + 1) % lp.len()];
            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            assert!(d <= 0.1 + 1e-12);
            let r = (a[0] * a[0] + a[1] * a[1]).sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn example_pairs_are_valid_solids() {
        for which in [ExamplePair::Square, ExamplePair::Round, ExamplePair::Wedge] {
            let (socket, peg) = example_pair(which, 0.1).unwrap();
            assert_eq!(socket.dimension(), 2);
            assert_eq!(peg.dimension(), 2);
            assert!(socket.max_element_diameter() <= 0.1 + 1e-9);
            // Socket interior just below the notch, peg interior inside the peg.
            assert_eq!(socket.pmc([0.0, -1.0, 0.0]), -1);
            assert_eq!(peg.pmc([0.0, 1.8, 0.0]), -1);
            assert_eq!(socket.pmc([0.0, 5.0, 0.0]), 1);
        }
    }

    #[test]
    fn box_and_pocket_meshes_are_watertight() {
        let (v, t) = box_mesh([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]);
        let solid = BoundarySolid::from_triangles_3d(v, t, f64::INFINITY).unwrap();
        assert_eq!(solid.pmc([0.0, 0.0, 0.0]), -1);
        assert_eq!(solid.pmc([2.0, 0.0, 0.0]), 1);

        let (v, t) = pocket_block_mesh(1.0, 1.0, 0.5, 0.3, 0.3, 0.5);
        let solid = BoundarySolid::from_triangles_3d(v, t, f64::INFINITY).unwrap();
        // Inside the material.
        assert_eq!(solid.pmc([0.6, 0.6, 0.0]), -1);
        // Inside the pocket cavity.
        assert_eq!(solid.pmc([0.0, 0.0, 0.3]), 1);
    }

    #[test]
    fn icosphere_is_watertight_and_spherical() {
        let solid = icosphere(1.0, 2).unwrap();
        assert_eq!(solid.pmc([0.0, 0.0, 0.0]), -1);
        assert_eq!(solid.pmc([0.0, 0.0, 1.5]), 1);
        for v in solid.vertices() {
            let r = crate::math::norm(*v);
            assert!((r - 1.0).abs() < 1e-12);
        }
    }
}
