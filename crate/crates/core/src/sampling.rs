//! Seeded random cones and distributions for property checks and demos.

use rand::Rng;

use crate::cone::{Alphabet, DcCone};
use crate::error::Result;

/// Uniform on the open simplex, via normalized exponentials.
pub fn random_distribution<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..d).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

/// `1..=max_cells` cells of `1..=max_normals` random normals each.
pub fn random_cone<R: Rng>(rng: &mut R, d: usize, max_cells: usize, max_normals: usize) -> Result<DcCone> {
    let cells = (0..rng.gen_range(1..=max_cells.max(1)))
        .map(|_| (0..rng.gen_range(1..=max_normals.max(1))).map(|_| random_distribution(rng, d)).collect())
        .collect();
    DcCone::from_cells(Alphabet::indexed(d), cells)
}

/// Union of single-halfspace cells, one per state.
pub fn random_state_family<R: Rng>(rng: &mut R, d: usize, states: usize) -> Vec<Vec<f64>> {
    (0..states).map(|_| random_distribution(rng, d)).collect()
}
