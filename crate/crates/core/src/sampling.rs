//! Seeded random helpers. Every sampler in the crate goes through these so
//! that a fixed seed reproduces the same output on every platform.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut SeededRng, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Uniform point on the unit sphere of `R^dim`.
pub fn unit_sphere(rng: &mut SeededRng, dim: usize) -> DVector<f64> {
    loop {
        let v = gaussian(rng, dim);
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Quasi-uniform points on the unit sphere: equispaced angles for `dim = 2`,
/// a Fibonacci lattice for `dim = 3`, seeded random points otherwise.
pub fn quasi_uniform_sphere(count: usize, dim: usize, seed: u64) -> Vec<DVector<f64>> {
    match dim {
        0 => Vec::new(),
        1 => (0..count)
            .map(|i| DVector::from_element(1, if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect(),
        2 => (0..count)
            .map(|i| {
                let th = std::f64::consts::PI * (i as f64 + 0.5) / count as f64;
                DVector::from_vec(vec![th.cos(), th.sin()])
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * i as f64;
                    DVector::from_vec(vec![r * th.cos(), r * th.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut g = rng(seed ^ 0x5eed_5eed);
            (0..count).map(|_| unit_sphere(&mut g, dim)).collect()
        }
    }
}

pub fn uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
