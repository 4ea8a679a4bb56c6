//! Axis-aligned bounding volume hierarchy over boundary elements.
//!
//! Built once by median split, immutable afterwards. Queries return element
//! indices; exact distances are always re-evaluated against the primitives,
//! so the tree only has to be conservative.

use crate::math::Vec3;

#[derive(Debug, Clone, Copy)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Aabb {
        Aabb {
            min: [f64::INFINITY; 3],
            max: [f64::NEG_INFINITY; 3],
        }
    }

    pub fn grow(&mut self, p: Vec3) {
        for k in 0..3 {
            self.min[k] = self.min[k].min(p[k]);
            self.max[k] = self.max[k].max(p[k]);
        }
    }

    pub fn merge(&mut self, other: &Aabb) {
        for k in 0..3 {
            self.min[k] = self.min[k].min(other.min[k]);
            self.max[k] = self.max[k].max(other.max[k]);
        }
    }

    pub fn center(&self) -> Vec3 {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        ]
    }

    /// Squared distance from `p` to the box (0 inside).
    pub fn dist2(&self, p: Vec3) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let d = (self.min[k] - p[k]).max(0.0).max(p[k] - self.max[k]);
            d2 += d * d;
        }
        d2
    }
}

enum Node {
    Leaf { start: usize, count: usize },
    Inner { left: usize, right: usize },
}

pub struct Bvh {
    nodes: Vec<(Aabb, Node)>,
    /// Element indices, reordered so each leaf owns a contiguous slice.
    order: Vec<usize>,
    root: usize,
}

impl Bvh {
    pub fn build(boxes: &[Aabb], leaf_capacity: usize) -> Bvh {
        let mut order: Vec<usize> = (0..boxes.len()).collect();
        let mut bvh = Bvh {
            nodes: Vec::new(),
            order: Vec::new(),
            root: 0,
        };
        let n = order.len();
        let root = bvh.build_range(boxes, &mut order, 0, n, leaf_capacity.max(1));
        bvh.order = order;
        bvh.root = root;
        bvh
    }

    fn build_range(
        &mut self,
        boxes: &[Aabb],
        order: &mut [usize],
        start: usize,
        end: usize,
        cap: usize,
    ) -> usize {
        let mut bb = Aabb::empty();
        for &e in &order[start..end] {
            bb.merge(&boxes[e]);
        }
        if end - start <= cap {
            self.nodes.push((bb, Node::Leaf { start, count: end - start }));
            return self.nodes.len() - 1;
        }
        // Split along the widest axis at the median of box centers.
        let mut axis = 0;
        let mut widest = -1.0;
        for k in 0..3 {
            let w = bb.max[k] - bb.min[k];
            if w > widest {
                widest = w;
                axis = k;
            }
        }
        let mid = (start + end) / 2;
        order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            boxes[a].center()[axis]
                .partial_cmp(&boxes[b].center()[axis])
                .unwrap()
        });
        let left = self.build_range(boxes, order, start, mid, cap);
        let right = self.build_range(boxes, order, mid, end, cap);
        self.nodes.push((bb, Node::Inner { left, right }));
        self.nodes.len() - 1
    }

    /// All elements whose bounding box intersects the ball of radius `r` about `p`.
    pub fn range_query(&self, p: Vec3, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.order.is_empty() {
            return out;
        }
        let r2 = r * r;
        let mut stack = vec![self.root];
        while let Some(ni) = stack.pop() {
            let (bb, node) = &self.nodes[ni];
            if bb.dist2(p) > r2 {
                continue;
            }
            match node {
                Node::Leaf { start, count } => {
                    out.extend_from_slice(&self.order[*start..*start + *count]);
                }
                Node::Inner { left, right } => {
                    stack.push(*left);
                    stack.push(*right);
                }
            }
        }
        out
    }

    /// Best-first nearest traversal. `dist2_to` returns the squared exact
    /// distance from the query point to a given element.
    pub fn nearest(&self, p: Vec3, mut dist2_to: impl FnMut(usize) -> f64) -> Option<(usize, f64)> {
        if self.order.is_empty() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        let mut stack = vec![(self.root, self.nodes[self.root].0.dist2(p))];
        while let Some((ni, lb)) = stack.pop() {
            if let Some((_, bd2)) = best {
                if lb >= bd2 {
                    continue;
                }
            }
            match &self.nodes[ni].1 {
                Node::Leaf { start, count } => {
                    for &e in &self.order[*start..*start + *count] {
                        let d2 = dist2_to(e);
                        if best.map_or(true, |(_, bd2)| d2 < bd2) {
                            best = Some((e, d2));
                        }
                    }
                }
                Node::Inner { left, right } => {
                    let dl = self.nodes[*left].0.dist2(p);
                    let dr = self.nodes[*right].0.dist2(p);
                    // Visit the closer child last so it pops first.
                    if dl < dr {
                        stack.push((*right, dr));
                        stack.push((*left, dl));
                    } else {
                        stack.push((*left, dl));
                        stack.push((*right, dr));
                    }
                }
            }
        }
        best
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}
