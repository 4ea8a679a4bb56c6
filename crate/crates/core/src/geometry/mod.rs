//! Boundary representation of closed solids and the distance machinery the
//! affinity integrals are built on.

mod bvh;
mod distance;
mod io;
mod winding;

pub use bvh::{Aabb, Bvh};
pub use distance::{closest_on_segment, closest_on_triangle, triangle_area};
pub use io::{load_boundary, parse_off3d, parse_poly2d, write_off3d, write_poly2d, BoundaryFormat};

use crate::math::{add, cross, dist, dot, normalize, scale, sub, Quat, Vec3};
use num_complex::Complex64;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("boundary is not closed: {0}")]
    OpenBoundary(String),
    #[error("inconsistent orientation: {0}")]
    InconsistentOrientation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Boundary elements: segment loops in 2D, triangles in 3D.
#[derive(Debug, Clone)]
pub enum Elements {
    Segments(Vec<[usize; 2]>),
    Triangles(Vec<[usize; 3]>),
}

impl Elements {
    pub fn len(&self) -> usize {
        match self {
            Elements::Segments(s) => s.len(),
            Elements::Triangles(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Distance summary of a query point against a solid boundary.
///
/// `xi` is the signed minimum distance (sign = PMC), `eta` the distance to
/// the realizing boundary point, `mu` the maximum distance when requested.
#[derive(Debug, Clone, Copy)]
pub struct DistancePair {
    pub xi: f64,
    pub eta: f64,
    pub mu: Option<f64>,
}

/// Oriented closed boundary of a solid in 2D or 3D.
///
/// Immutable after construction; every query below is read-only.
pub struct BoundarySolid {
    dim: u8,
    vertices: Vec<Vec3>,
    elements: Elements,
    normals: Vec<Vec3>,
    index: Bvh,
    bbox: Aabb,
    /// Boundary tolerance classifying PMC = 0.
    tol: f64,
}

impl BoundarySolid {
    /// Builds a planar solid from closed vertex loops (counter-clockwise
    /// winding = material on the left). Segments longer than `h_max` are
    /// subdivided.
    pub fn from_loops_2d(loops: &[Vec<[f64; 2]>], h_max: f64) -> Result<BoundarySolid, GeometryError> {
        if h_max <= 0.0 {
            return Err(GeometryError::InvalidParameter("h_max must be > 0".into()));
        }
        let mut vertices: Vec<Vec3> = Vec::new();
        let mut segments: Vec<[usize; 2]> = Vec::new();
        for lp in loops {
            if lp.len() < 3 {
                return Err(GeometryError::OpenBoundary(format!(
                    "loop with {} vertices cannot close",
                    lp.len()
                )));
            }
            let base = vertices.len();
            for v in lp {
                vertices.push([v[0], v[1], 0.0]);
            }
            for i in 0..lp.len() {
                segments.push([base + i, base + (i + 1) % lp.len()]);
            }
        }
        // Subdivide long segments in place.
        let mut refined: Vec<[usize; 2]> = Vec::new();
        for seg in segments {
            let (a, b) = (vertices[seg[0]], vertices[seg[1]]);
            let len = dist(a, b);
            if len <= 0.0 {
                return Err(GeometryError::InvalidParameter("degenerate zero-length segment".into()));
            }
            let pieces = (len / h_max).ceil().max(1.0) as usize;
            let mut prev = seg[0];
            for k in 1..pieces {
                let t = k as f64 / pieces as f64;
                vertices.push(add(a, scale(sub(b, a), t)));
                let vi = vertices.len() - 1;
                refined.push([prev, vi]);
                prev = vi;
            }
            refined.push([prev, seg[1]]);
        }
        Self::assemble(2, vertices, Elements::Segments(refined))
    }

    /// Builds a 3D solid from an indexed triangle mesh. The whole mesh is
    /// uniformly 4-way subdivided until every triangle diameter is <= `h_max`,
    /// so edge-sharing stays exact.
    pub fn from_triangles_3d(
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
        h_max: f64,
    ) -> Result<BoundarySolid, GeometryError> {
        if h_max <= 0.0 {
            return Err(GeometryError::InvalidParameter("h_max must be > 0".into()));
        }
        let mut verts = vertices;
        let mut tris = triangles;
        loop {
            let worst = tris
                .iter()
                .map(|t| tri_diameter(&verts, *t))
                .fold(0.0_f64, f64::max);
            if worst <= h_max || tris.is_empty() {
                break;
            }
            let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
            let mut next = Vec::with_capacity(tris.len() * 4);
            for t in &tris {
                let m = |verts: &mut Vec<Vec3>, mp: &mut HashMap<(usize, usize), usize>, i: usize, j: usize| {
                    let key = (i.min(j), i.max(j));
                    *mp.entry(key).or_insert_with(|| {
                        verts.push(scale(add(verts[i], verts[j]), 0.5));
                        verts.len() - 1
                    })
                };
                let ab = m(&mut verts, &mut midpoints, t[0], t[1]);
                let bc = m(&mut verts, &mut midpoints, t[1], t[2]);
                let ca = m(&mut verts, &mut midpoints, t[2], t[0]);
                next.push([t[0], ab, ca]);
                next.push([ab, t[1], bc]);
                next.push([ca, bc, t[2]]);
                next.push([ab, bc, ca]);
            }
            tris = next;
        }
        Self::assemble(3, verts, Elements::Triangles(tris))
    }

    fn assemble(dim: u8, vertices: Vec<Vec3>, elements: Elements) -> Result<BoundarySolid, GeometryError> {
        check_closed(dim, vertices.len(), &elements)?;

        let mut bbox = Aabb::empty();
        for v in &vertices {
            bbox.grow(*v);
        }
        let diag = dist(bbox.min, bbox.max);
        let tol = 1e-9 * diag;

        let mut solid = BoundarySolid {
            dim,
            normals: element_normals(dim, &vertices, &elements),
            index: build_index(&vertices, &elements),
            vertices,
            elements,
            bbox,
            tol,
        };

        // Outward check on element midpoints offset along the normal. A
        // globally inverted orientation is repaired by one flip; anything
        // mixed is rejected.
        let n = solid.elements.len();
        let stride = (n / 256).max(1);
        let mut out = 0usize;
        let mut inw = 0usize;
        let mut checked = 0usize;
        for e in (0..n).step_by(stride) {
            let (c, diam) = solid.element_centroid_diameter(e);
            let w_out = solid.winding_number(add(c, scale(solid.normals[e], 0.25 * diam)));
            let w_in = solid.winding_number(add(c, scale(solid.normals[e], -0.25 * diam)));
            // Skip ambiguous probes: points near other geometry (narrow
            // crevices) can land inside material on both sides.
            if (w_out - 0.5).abs() < 0.25 || (w_in - 0.5).abs() < 0.25 {
                continue;
            }
            let (outside, inside) = (w_out < 0.5, w_in > 0.5);
            if outside == inside {
                checked += 1;
                if outside {
                    out += 1;
                } else {
                    inw += 1;
                }
            }
        }
        if checked == 0 {
            return Err(GeometryError::InconsistentOrientation(
                "no unambiguous probe points".into(),
            ));
        }
        if inw > 0 && out > 0 {
            return Err(GeometryError::InconsistentOrientation(format!(
                "{} of {} probed elements face inward",
                inw, checked
            )));
        }
        if inw > 0 {
            // Global flip: reverse every element; normals and winding flip together.
            match &mut solid.elements {
                Elements::Segments(s) => {
                    for seg in s.iter_mut() {
                        seg.swap(0, 1);
                    }
                }
                Elements::Triangles(t) => {
                    for tri in t.iter_mut() {
                        tri.swap(1, 2);
                    }
                }
            }
            solid.normals = element_normals(dim, &solid.vertices, &solid.elements);
        }
        Ok(solid)
    }

    pub fn dimension(&self) -> u8 {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn elements(&self) -> &Elements {
        &self.elements
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn normal(&self, element: usize) -> Vec3 {
        self.normals[element]
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        (self.bbox.min, self.bbox.max)
    }

    pub fn boundary_tolerance(&self) -> f64 {
        self.tol
    }

    pub fn index(&self) -> &Bvh {
        &self.index
    }

    /// Element vertex positions (third entry repeats in 2D).
    pub fn element_vertices(&self, e: usize) -> [Vec3; 3] {
        match &self.elements {
            Elements::Segments(s) => {
                let [a, b] = s[e];
                [self.vertices[a], self.vertices[b], self.vertices[b]]
            }
            Elements::Triangles(t) => {
                let [a, b, c] = t[e];
                [self.vertices[a], self.vertices[b], self.vertices[c]]
            }
        }
    }

    fn element_centroid_diameter(&self, e: usize) -> (Vec3, f64) {
        let vs = self.element_vertices(e);
        match self.dim {
            2 => (
                scale(add(vs[0], vs[1]), 0.5),
                dist(vs[0], vs[1]),
            ),
            _ => {
                let c = scale(add(add(vs[0], vs[1]), vs[2]), 1.0 / 3.0);
                let d = dist(vs[0], vs[1])
                    .max(dist(vs[1], vs[2]))
                    .max(dist(vs[2], vs[0]));
                (c, d)
            }
        }
    }

    /// Largest element diameter in the mesh.
    pub fn max_element_diameter(&self) -> f64 {
        (0..self.element_count())
            .map(|e| self.element_centroid_diameter(e).1)
            .fold(0.0, f64::max)
    }

    /// Closest point on element `e` to `p`.
    pub fn closest_on_element(&self, e: usize, p: Vec3) -> Vec3 {
        let vs = self.element_vertices(e);
        match self.dim {
            2 => closest_on_segment(p, vs[0], vs[1]),
            _ => closest_on_triangle(p, vs[0], vs[1], vs[2]),
        }
    }

    /// Generalized winding number of `p`: ~1 inside, ~0 outside.
    pub fn winding_number(&self, p: Vec3) -> f64 {
        match &self.elements {
            Elements::Segments(s) => {
                let mut total = 0.0;
                for seg in s {
                    total += winding::subtended_angle_2d(p, self.vertices[seg[0]], self.vertices[seg[1]]);
                }
                total / (2.0 * std::f64::consts::PI)
            }
            Elements::Triangles(t) => {
                let mut total = 0.0;
                for tri in t {
                    total += winding::solid_angle_3d(
                        p,
                        self.vertices[tri[0]],
                        self.vertices[tri[1]],
                        self.vertices[tri[2]],
                    );
                }
                total / (4.0 * std::f64::consts::PI)
            }
        }
    }

    /// Point membership classification: +1 exterior, -1 interior, 0 within
    /// the boundary tolerance.
    pub fn pmc(&self, p: Vec3) -> i8 {
        let (_, d2) = self.nearest_element(p);
        if d2.sqrt() < self.tol {
            return 0;
        }
        if self.winding_number(p) > 0.5 {
            -1
        } else {
            1
        }
    }

    fn nearest_element(&self, p: Vec3) -> (usize, f64) {
        self.index
            .nearest(p, |e| {
                let q = self.closest_on_element(e, p);
                let d = sub(q, p);
                dot(d, d)
            })
            .expect("non-empty boundary")
    }

    /// Nearest boundary point and its element.
    pub fn nearest_boundary_point(&self, p: Vec3) -> (Vec3, usize) {
        let (e, _) = self.nearest_element(p);
        (self.closest_on_element(e, p), e)
    }

    /// Signed minimum distance; `mu` left unfilled (see [`max_distance`]).
    ///
    /// [`max_distance`]: BoundarySolid::max_distance
    pub fn signed_distance(&self, p: Vec3) -> DistancePair {
        let (_, d2) = self.nearest_element(p);
        let eta = d2.sqrt();
        let xi = if eta < self.tol {
            0.0
        } else {
            self.pmc_sign_only(p) * eta
        };
        DistancePair { xi, eta, mu: None }
    }

    fn pmc_sign_only(&self, p: Vec3) -> f64 {
        if self.winding_number(p) > 0.5 {
            -1.0
        } else {
            1.0
        }
    }

    /// Maximum distance from `p` to the boundary (attained at a vertex).
    pub fn max_distance(&self, p: Vec3) -> f64 {
        self.vertices
            .iter()
            .map(|v| dist(p, *v))
            .fold(0.0, f64::max)
    }

    /// Brute-force signed distance over all elements (test oracle).
    pub fn signed_distance_brute(&self, p: Vec3) -> DistancePair {
        let mut best = f64::INFINITY;
        for e in 0..self.element_count() {
            let q = self.closest_on_element(e, p);
            best = best.min(dist(p, q));
        }
        let xi = if best < self.tol {
            0.0
        } else {
            self.pmc_sign_only(p) * best
        };
        DistancePair { xi, eta: best, mu: None }
    }

    /// Complex zeta projection of the pair `(p, q)`: `xi + i eta`.
    pub fn zeta(&self, p: Vec3, q: Vec3) -> Complex64 {
        let xi = self.signed_distance(p).xi;
        Complex64::new(xi, dist(p, q))
    }

    /// Elements intersecting the contact ball of radius `(1+eps)|xi|` about `p`.
    pub fn contact_region(&self, p: Vec3, eps: f64) -> Vec<usize> {
        let xi = self.signed_distance(p).xi;
        let r = (1.0 + eps) * xi.abs();
        if r <= 0.0 {
            return Vec::new();
        }
        let candidates = self.index.range_query(p, r);
        candidates
            .into_iter()
            .filter(|&e| dist(p, self.closest_on_element(e, p)) <= r)
            .collect()
    }

    /// Rigidly transformed copy (rotation about the origin, then translation).
    pub fn transformed(&self, rot: Quat, translation: Vec3) -> BoundarySolid {
        let vertices: Vec<Vec3> = self
            .vertices
            .iter()
            .map(|v| add(rot.rotate(*v), translation))
            .collect();
        let elements = self.elements.clone();
        let mut bbox = Aabb::empty();
        for v in &vertices {
            bbox.grow(*v);
        }
        BoundarySolid {
            dim: self.dim,
            normals: element_normals(self.dim, &vertices, &elements),
            index: build_index(&vertices, &elements),
            vertices,
            elements,
            bbox,
            tol: self.tol,
        }
    }
}

/// Cosine of the gaze angle: `(p - q) . n / |p - q|`.
pub fn gaze_cos(p: Vec3, q: Vec3, n: Vec3) -> f64 {
    let d = sub(p, q);
    let len = crate::math::norm(d);
    assert!(len > 0.0, "gaze direction undefined for p == q");
    dot(d, n) / len
}

/// Polyline approximation of a circular arc with chords of at most
/// `max_chord`. `span` is the angle interval swept counter-clockwise.
pub fn discretize_arc(
    center: [f64; 2],
    radius: f64,
    span: (f64, f64),
    max_chord: f64,
) -> Result<Vec<[f64; 2]>, GeometryError> {
    if radius <= 0.0 || max_chord <= 0.0 {
        return Err(GeometryError::InvalidParameter(
            "radius and max_chord must be > 0".into(),
        ));
    }
    let sweep = span.1 - span.0;
    if sweep.abs() < 1e-15 {
        return Err(GeometryError::InvalidParameter("degenerate arc span".into()));
    }
    // Chord of a step dt is 2 r sin(dt/2).
    let max_step = if max_chord >= 2.0 * radius {
        std::f64::consts::PI
    } else {
        2.0 * (max_chord / (2.0 * radius)).asin()
    };
    let steps = (sweep.abs() / max_step).ceil().max(1.0) as usize;
    let mut pts = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = span.0 + sweep * k as f64 / steps as f64;
        pts.push([center[0] + radius * t.cos(), center[1] + radius * t.sin()]);
    }
    Ok(pts)
}

fn tri_diameter(verts: &[Vec3], t: [usize; 3]) -> f64 {
    dist(verts[t[0]], verts[t[1]])
        .max(dist(verts[t[1]], verts[t[2]]))
        .max(dist(verts[t[2]], verts[t[0]]))
}

fn element_normals(_dim: u8, vertices: &[Vec3], elements: &Elements) -> Vec<Vec3> {
    match elements {
        Elements::Segments(s) => s
            .iter()
            .map(|seg| {
                let d = sub(vertices[seg[1]], vertices[seg[0]]);
                // CCW winding keeps material on the left; outward is to the right.
                normalize([d[1], -d[0], 0.0])
            })
            .collect(),
        Elements::Triangles(t) => t
            .iter()
            .map(|tri| {
                normalize(cross(
                    sub(vertices[tri[1]], vertices[tri[0]]),
                    sub(vertices[tri[2]], vertices[tri[0]]),
                ))
            })
            .collect(),
    }
}

fn build_index(vertices: &[Vec3], elements: &Elements) -> Bvh {
    let boxes: Vec<Aabb> = match elements {
        Elements::Segments(s) => s
            .iter()
            .map(|seg| {
                let mut bb = Aabb::empty();
                bb.grow(vertices[seg[0]]);
                bb.grow(vertices[seg[1]]);
                bb
            })
            .collect(),
        Elements::Triangles(t) => t
            .iter()
            .map(|tri| {
                let mut bb = Aabb::empty();
                for &i in tri {
                    bb.grow(vertices[i]);
                }
                bb
            })
            .collect(),
    };
    Bvh::build(&boxes, 8)
}

fn check_closed(dim: u8, n_vertices: usize, elements: &Elements) -> Result<(), GeometryError> {
    match elements {
        Elements::Segments(s) => {
            let mut indeg = vec![0usize; n_vertices];
            let mut outdeg = vec![0usize; n_vertices];
            for seg in s {
                outdeg[seg[0]] += 1;
                indeg[seg[1]] += 1;
            }
            for v in 0..n_vertices {
                if indeg[v] != 1 || outdeg[v] != 1 {
                    return Err(GeometryError::OpenBoundary(format!(
                        "vertex {} has {} incoming / {} outgoing segments",
                        v, indeg[v], outdeg[v]
                    )));
                }
            }
        }
        Elements::Triangles(t) => {
            debug_assert_eq!(dim, 3);
            // Directed half-edge census: closed + consistently oriented iff
            // every undirected edge appears exactly once in each direction.
            let mut totals: HashMap<(usize, usize), (u32, i32)> = HashMap::new();
            for tri in t {
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    if a == b {
                        return Err(GeometryError::InvalidParameter("degenerate triangle".into()));
                    }
                    let e = totals.entry((a.min(b), a.max(b))).or_insert((0, 0));
                    e.0 += 1;
                    e.1 += if a < b { 1 } else { -1 };
                }
            }
            for ((a, b), (count, signed)) in totals {
                if count != 2 {
                    return Err(GeometryError::OpenBoundary(format!(
                        "edge ({a},{b}) borders {count} triangles"
                    )));
                }
                if signed != 0 {
                    return Err(GeometryError::InconsistentOrientation(format!(
                        "edge ({a},{b}) traversed twice in the same direction"
                    )));
                }
            }
        }
    }
    Ok(())
}
