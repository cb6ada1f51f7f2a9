#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solvable_plane::model::{ComplexState, CouplingSpec, PlaneState, Vec2};
use solvable_plane::CNum;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..n).map(|_| rng.gen_range(-amp..amp)).collect()).collect()
}

pub fn random_couplings(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> CouplingSpec {
    let beta = random_matrix(rng, n, amp);
    let gamma = random_matrix(rng, n, amp);
    CouplingSpec::new(beta, gamma).unwrap()
}

/// Radii in [0.5, 2], arbitrary directions, velocities of comparable size.
pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> PlaneState {
    let mut positions = Vec::with_capacity(n);
    let mut velocities = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.gen_range(0.5..2.0);
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        positions.push(Vec2::new(r * a.cos(), r * a.sin()));
        velocities.push(Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    PlaneState::new(positions, velocities).unwrap()
}

pub fn state_distance(a: &PlaneState, b: &PlaneState) -> f64 {
    a.positions
        .iter()
        .zip(&b.positions)
        .chain(a.velocities.iter().zip(&b.velocities))
        .map(|(p, q)| (*p - *q).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn state_norm(a: &PlaneState) -> f64 {
    a.positions
        .iter()
        .chain(&a.velocities)
        .map(|p| p.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn relative_distance(a: &PlaneState, b: &PlaneState) -> f64 {
    state_distance(a, b) / state_norm(b)
}

pub fn complex_distance(a: &ComplexState, b: &ComplexState) -> f64 {
    let d: f64 = a
        .z
        .iter()
        .zip(&b.z)
        .chain(a.zdot.iter().zip(&b.zdot))
        .map(|(p, q)| (p - q).norm_sqr())
        .sum();
    let s: f64 = b.z.iter().chain(&b.zdot).map(CNum::norm_sqr).sum();
    (d / s).sqrt()
}

pub fn vec_distance(a: &[Vec2], b: &[Vec2]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (*p - *q).norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(a: &[Vec2]) -> f64 {
    a.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt()
}
