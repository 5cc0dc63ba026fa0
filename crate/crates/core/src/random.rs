//! Seeded random unitaries, states and observables.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{Operator, C64};

/// Haar-random single-qubit unitary from the ZYZ Euler form
/// `RZ(α) RY(β) RZ(γ)` with `cos β` uniform on `[-1, 1]`, `α ∈ [0, 2π)` and
/// `γ ∈ [0, 4π)`, which covers SU(2) once.
pub fn haar_unitary_2(rng: &mut impl Rng) -> Operator {
    let alpha = rng.gen_range(0.0..2.0 * PI);
    let gamma = rng.gen_range(0.0..4.0 * PI);
    let beta = (1.0 - 2.0 * rng.gen::<f64>()).acos();
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let e = |phi: f64| C64::from_polar(1.0, phi);
    Operator::from_fn(2, |i, j| match (i, j) {
        (0, 0) => e(-(alpha + gamma) / 2.0) * c,
        (0, 1) => -e(-(alpha - gamma) / 2.0) * s,
        (1, 0) => e((alpha - gamma) / 2.0) * s,
        _ => e((alpha + gamma) / 2.0) * c,
    })
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn ginibre(rng: &mut impl Rng, dim: usize) -> Operator {
    Operator::from_fn(dim, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

/// Random Hermitian operator `(G + G†)/2` with Gaussian entries.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> Operator {
    let g = ginibre(rng, dim);
    g.add(&g.adjoint()).scale_real(0.5)
}

/// Random full-rank density matrix `G G† / tr(G G†)`.
pub fn random_density_matrix(rng: &mut impl Rng, dim: usize) -> Operator {
    let g = ginibre(rng, dim);
    let rho = g.matmul(&g.adjoint());
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

/// Random normalized pure state with Gaussian amplitudes.
pub fn random_pure_state(rng: &mut impl Rng, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}
