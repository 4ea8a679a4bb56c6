//! Uniform sample grids of complex affinity values.

use super::KernelParams;
use crate::math::Vec3;
use num_complex::Complex64;

/// Uniform node lattice. For planar fields `dims[2] == 1` and
/// `origin[2] == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub origin: Vec3,
    pub spacing: Vec3,
    pub dims: [usize; 3],
}

impl GridSpec {
    /// Grid covering `[min, max]` padded by `margin` on every axis.
    pub fn covering(min: Vec3, max: Vec3, spacing: f64, margin: f64, dim: u8) -> GridSpec {
        let mut origin = [0.0; 3];
        let mut dims = [1usize; 3];
        let n_axes = if dim == 2 { 2 } else { 3 };
        for k in 0..n_axes {
            origin[k] = min[k] - margin;
            let extent = (max[k] + margin) - origin[k];
            dims[k] = (extent / spacing).ceil() as usize + 1;
        }
        GridSpec {
            origin,
            spacing: [spacing, spacing, spacing],
            dims,
        }
    }

    pub fn node_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    /// Linear index with x fastest: `ix + nx*(iy + ny*iz)`.
    pub fn node_index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.dims[0] * (iy + self.dims[1] * iz)
    }

    pub fn node_coords(&self, i: usize) -> [usize; 3] {
        let ix = i % self.dims[0];
        let iy = (i / self.dims[0]) % self.dims[1];
        let iz = i / (self.dims[0] * self.dims[1]);
        [ix, iy, iz]
    }

    pub fn node_pos(&self, i: usize) -> Vec3 {
        let [ix, iy, iz] = self.node_coords(i);
        [
            self.origin[0] + ix as f64 * self.spacing[0],
            self.origin[1] + iy as f64 * self.spacing[1],
            self.origin[2] + iz as f64 * self.spacing[2],
        ]
    }

    /// Geometric center of the grid box.
    pub fn center(&self) -> Vec3 {
        [
            self.origin[0] + 0.5 * (self.dims[0] - 1) as f64 * self.spacing[0],
            self.origin[1] + 0.5 * (self.dims[1] - 1) as f64 * self.spacing[1],
            self.origin[2] + 0.5 * (self.dims[2] - 1) as f64 * self.spacing[2],
        ]
    }
}

/// Complex affinity samples on a uniform grid.
#[derive(Debug, Clone)]
pub struct AffinityField {
    grid: GridSpec,
    dim: u8,
    data: Vec<Complex64>,
    params: KernelParams,
    pub shape_id: String,
}

impl AffinityField {
    pub fn new(grid: GridSpec, dim: u8, data: Vec<Complex64>, params: KernelParams) -> AffinityField {
        assert_eq!(grid.node_count(), data.len());
        AffinityField {
            grid,
            dim,
            data,
            params,
            shape_id: String::new(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dimension(&self) -> u8 {
        self.dim
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Rotation/translation reference point for poses over this field.
    pub fn centroid(&self) -> Vec3 {
        self.grid.center()
    }

    /// Multilinear interpolation; 0 outside the grid.
    pub fn sample(&self, p: Vec3) -> Complex64 {
        let g = &self.grid;
        let mut frac = [0.0f64; 3];
        let mut base = [0usize; 3];
        let n_axes = if self.dim == 2 { 2 } else { 3 };
        for k in 0..n_axes {
            let mut t = (p[k] - g.origin[k]) / g.spacing[k];
            // Snap rounding noise so nodes on the grid border stay inside.
            let top = (g.dims[k] - 1) as f64;
            if t < 0.0 && t > -1e-9 {
                t = 0.0;
            } else if t > top && t < top + 1e-9 {
                t = top;
            }
            if t < 0.0 || t > top {
                return Complex64::new(0.0, 0.0);
            }
            let i = (t.floor() as usize).min(g.dims[k] - 1);
            let i = i.min(g.dims[k].saturating_sub(2));
            base[k] = i;
            frac[k] = (t - i as f64).clamp(0.0, 1.0);
        }
        if self.dim == 2 {
            if (p[2] - g.origin[2]).abs() > 1e-12 {
                return Complex64::new(0.0, 0.0);
            }
            let [i, j, _] = base;
            let (fx, fy) = (frac[0], frac[1]);
            let at = |dx: usize, dy: usize| self.data[g.node_index(i + dx, j + dy, 0)];
            at(0, 0) * ((1.0 - fx) * (1.0 - fy))
                + at(1, 0) * (fx * (1.0 - fy))
                + at(0, 1) * ((1.0 - fx) * fy)
                + at(1, 1) * (fx * fy)
        } else {
            let [i, j, k] = base;
            let (fx, fy, fz) = (frac[0], frac[1], frac[2]);
            let at = |dx: usize, dy: usize, dz: usize| {
                self.data[g.node_index(i + dx, j + dy, k + dz)]
            };
            let c00 = at(0, 0, 0) * (1.0 - fx) + at(1, 0, 0) * fx;
            let c10 = at(0, 1, 0) * (1.0 - fx) + at(1, 1, 0) * fx;
            let c01 = at(0, 0, 1) * (1.0 - fx) + at(1, 0, 1) * fx;
            let c11 = at(0, 1, 1) * (1.0 - fx) + at(1, 1, 1) * fx;
            let c0 = c00 * (1.0 - fy) + c10 * fy;
            let c1 = c01 * (1.0 - fy) + c11 * fy;
            c0 * (1.0 - fz) + c1 * fz
        }
    }

    /// Volume (2D: area) of one grid cell.
    pub fn cell_measure(&self) -> f64 {
        let s = self.grid.spacing;
        if self.dim == 2 {
            s[0] * s[1]
        } else {
            s[0] * s[1] * s[2]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_indexing_roundtrip() {
        let g = GridSpec {
            origin: [0.0, 0.0, 0.0],
            spacing: [0.5, 0.5, 0.5],
            dims: [4, 3, 2],
        };
        for i in 0..g.node_count() {
            let [ix, iy, iz] = g.node_coords(i);
            assert_eq!(g.node_index(ix, iy, iz), i);
        }
        assert_eq!(g.node_pos(1)[0], 0.5);
    }

    #[test]
    fn interpolation_reproduces_nodes_and_is_zero_outside() {
        let g = GridSpec {
            origin: [0.0, 0.0, 0.0],
            spacing: [1.0, 1.0, 1.0],
            dims: [3, 3, 1],
        };
        let data: Vec<Complex64> = (0..9).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let f = AffinityField::new(g.clone(), 2, data, KernelParams::default());
        for i in 0..9 {
            let p = g.node_pos(i);
            assert!((f.sample(p).re - i as f64).abs() < 1e-12);
        }
        assert_eq!(f.sample([-0.1, 0.0, 0.0]).re, 0.0);
        assert_eq!(f.sample([5.0, 0.0, 0.0]).re, 0.0);
        // Bilinear midpoint.
        assert!((f.sample([0.5, 0.5, 0.0]).re - 2.0).abs() < 1e-12);
    }
}
