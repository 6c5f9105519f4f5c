//! Seeded random inputs. Every sample index gets its own ChaCha stream, so
//! results do not depend on evaluation order or thread count.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::chart::{ChartPoint, ProjectiveSpace};
use crate::linalg;

pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Orthonormalised standard Gaussian `p × dim` rows.
pub fn random_frame_rows<R: Rng + ?Sized>(rng: &mut R, dim: usize, p: usize) -> DMatrix<f64> {
    loop {
        let g = DMatrix::from_fn(p, dim, |_, _| rng.sample(StandardNormal));
        if let Ok(rows) = linalg::orthonormalize_rows(&g, 1e-8) {
            return rows;
        }
    }
}

/// Chart point with independent `N(0, scale²)` coordinates.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, space: &ProjectiveSpace, scale: f64) -> ChartPoint {
    let q = (0..space.dim()).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    space.point(q).expect("finite coordinates")
}
