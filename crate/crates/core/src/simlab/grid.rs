//! Randomly shifted Halton points on `[-1, 1]^10` for averaging test coverage.

use super::model::{Covariates, DIM};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; DIM] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// `size` Halton points (indices `1..=size`) with a Cranley–Patterson shift drawn from `seed`.
pub fn halton_grid(size: usize, seed: u64) -> Vec<Covariates> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; DIM] = std::array::from_fn(|_| rng.random());
    (1..=size as u64)
        .map(|i| {
            std::array::from_fn(|d| {
                let u = (radical_inverse(i, PRIMES[d]) + shift[d]).fract();
                2.0 * u - 1.0
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base2() {
        let v: Vec<f64> = (1..=4).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn grid_is_deterministic_and_in_cube() {
        let a = halton_grid(4096, 1);
        assert_eq!(a, halton_grid(4096, 1));
        assert_ne!(a, halton_grid(4096, 2));
        assert!(a.iter().flatten().all(|v| (-1.0..1.0).contains(v)));
    }

    #[test]
    fn grid_integrates_smooth_functions() {
        // mean of x1^2 over the cube is 1/3; of x1 * x2 is 0
        let g = halton_grid(4096, 5);
        let m2 = g.iter().map(|x| x[0] * x[0]).sum::<f64>() / g.len() as f64;
        let m12 = g.iter().map(|x| x[3] * x[9]).sum::<f64>() / g.len() as f64;
        assert!((m2 - 1.0 / 3.0).abs() < 2e-3, "{m2}");
        assert!(m12.abs() < 5e-3, "{m12}");
    }
}
