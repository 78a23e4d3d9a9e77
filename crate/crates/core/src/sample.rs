//! Deterministic point sets: lattices and seeded random samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// An axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Region {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Region { x0, x1, y0, y1 }
    }

    pub fn square(a: f64, b: f64) -> Self {
        Region::new(a, b, a, b)
    }
}

/// Row-major lattice with `nx` nodes along x and `ny` along y, endpoints included.
///
/// Rows are indexed by y, so consecutive points share a y value.
pub fn grid(region: Region, nx: usize, ny: usize) -> Vec<(f64, f64)> {
    let axis = |a: f64, b: f64, n: usize| -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n)
                .map(|k| {
                    if k == n - 1 {
                        b
                    } else {
                        a + (b - a) * k as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    };
    let xs = axis(region.x0, region.x1, nx);
    let ys = axis(region.y0, region.y1, ny);
    ys.iter()
        .flat_map(|&y| xs.iter().map(move |&x| (x, y)))
        .collect()
}

/// `count` uniform points in `region`, reproducible from `seed`.
pub fn random_points(seed: u64, count: usize, region: Region) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = region.x0 + (region.x1 - region.x0) * rng.gen::<f64>();
            let y = region.y0 + (region.y1 - region.y0) * rng.gen::<f64>();
            (x, y)
        })
        .collect()
}

/// Like [`random_points`] but redraws any point with `x == y`.
pub fn random_off_diagonal(seed: u64, count: usize, region: Region) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = region.x0 + (region.x1 - region.x0) * rng.gen::<f64>();
        let y = region.y0 + (region.y1 - region.y0) * rng.gen::<f64>();
        if x != y {
            out.push((x, y));
        }
    }
    out
}
