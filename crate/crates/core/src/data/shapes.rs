use ndarray::Array3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::{Dataset, Sample, Split};
use crate::{Error, Result};

pub const SHAPES_SIDE: usize = 16;
/// Filled squares have side in this range.
pub const SQUARE_SIDES: std::ops::RangeInclusive<usize> = 4..=10;
/// Crosses have half arm length in this range and bars two pixels thick.
pub const CROSS_ARMS: std::ops::RangeInclusive<usize> = 3..=6;

/// Ink pixels of a cross with half arm length `a`: two `2 × (2a+2)` bars
/// overlapping in a `2 × 2` centre.
pub fn cross_mass(a: usize) -> usize {
    8 * a + 4
}

/// `count` binary 16×16 images alternating class 0 (filled square) and
/// class 1 (cross), each at a random size and position.
pub fn synth_shapes(count: usize, seed: u64) -> Result<Dataset> {
    if count < 2 {
        return Err(Error::InvalidArgument(format!("synth_shapes needs count ≥ 2, got {count}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..count)
        .map(|i| {
            let label = i % 2;
            let mut img = Array3::zeros((1, SHAPES_SIDE, SHAPES_SIDE));
            if label == 0 {
                let side = rng.random_range(SQUARE_SIDES);
                let r0 = rng.random_range(0..=SHAPES_SIDE - side);
                let c0 = rng.random_range(0..=SHAPES_SIDE - side);
                img.slice_mut(ndarray::s![0, r0..r0 + side, c0..c0 + side]).fill(1.0);
            } else {
                let a = rng.random_range(CROSS_ARMS);
                // bars span rows/cols [centre − a, centre + a + 1]
                let cr = rng.random_range(a..=SHAPES_SIDE - a - 2);
                let cc = rng.random_range(a..=SHAPES_SIDE - a - 2);
                img.slice_mut(ndarray::s![0, cr..cr + 2, cc - a..cc + a + 2]).fill(1.0);
                img.slice_mut(ndarray::s![0, cr - a..cr + a + 2, cc..cc + 2]).fill(1.0);
            }
            Sample { id: i as u64, input: img, label }
        })
        .collect();
    Dataset::new(samples, Split::Train, 2)
}
