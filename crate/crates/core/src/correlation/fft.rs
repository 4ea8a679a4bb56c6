//! Separable n-dimensional complex FFT on the x-fastest layout.

use num_complex::Complex64;
use rustfft::FftPlanner;

pub enum Direction {
    Forward,
    Inverse,
}

/// In-place FFT along every axis of a `dims`-shaped array (x fastest).
/// The inverse applies the 1/N normalization.
pub fn fft_nd(data: &mut [Complex64], dims: [usize; 3], dir: Direction) {
    assert_eq!(data.len(), dims[0] * dims[1] * dims[2]);
    let mut planner = FftPlanner::new();
    let forward = matches!(dir, Direction::Forward);
    for axis in 0..3 {
        let n = dims[axis];
        if n <= 1 {
            continue;
        }
        let fft = if forward {
            planner.plan_fft_forward(n)
        } else {
            planner.plan_fft_inverse(n)
        };
        let stride = match axis {
            0 => 1,
            1 => dims[0],
            _ => dims[0] * dims[1],
        };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        // Iterate over all 1D lines along `axis`.
        let outer: Vec<(usize, usize)> = match axis {
            0 => (0..dims[1] * dims[2])
                .map(|r| (r % dims[1], r / dims[1]))
                .map(|(j, k)| (j * dims[0] + k * dims[0] * dims[1], 0))
                .collect(),
            1 => (0..dims[0] * dims[2])
                .map(|r| (r % dims[0], r / dims[0]))
                .map(|(i, k)| (i + k * dims[0] * dims[1], 0))
                .collect(),
            _ => (0..dims[0] * dims[1]).map(|i| (i, 0)).collect(),
        };
        for (base, _) in outer {
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = data[base + t * stride];
            }
            fft.process(&mut line);
            let scale = if forward { 1.0 } else { 1.0 / n as f64 };
            for (t, v) in line.iter().enumerate() {
                data[base + t * stride] = v * scale;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_identity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let dims = [4, 3, 2];
        let orig: Vec<Complex64> = (0..24)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut data = orig.clone();
        fft_nd(&mut data, dims, Direction::Forward);
        fft_nd(&mut data, dims, Direction::Inverse);
        for (a, b) in orig.iter().zip(data.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn delta_transforms_to_constant() {
        let dims = [8, 1, 1];
        let mut data = vec![Complex64::new(0.0, 0.0); 8];
        data[0] = Complex64::new(1.0, 0.0);
        fft_nd(&mut data, dims, Direction::Forward);
        for v in &data {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }
}
