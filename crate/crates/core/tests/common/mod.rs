#![allow(dead_code)]

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use relclock::fock::{Basis, DensityMatrix, SingleModeState, TwoModeState};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_ket(rng: &mut ChaCha8Rng, dim: usize) -> SingleModeState {
    SingleModeState::normalized(Array1::from_shape_fn(dim, |_| gaussian(rng))).unwrap()
}

pub fn random_two_mode(rng: &mut ChaCha8Rng, d1: usize, d2: usize) -> TwoModeState {
    TwoModeState::normalized(Array2::from_shape_fn((d1, d2), |_| gaussian(rng))).unwrap()
}

/// `G G† / tr(G G†)` with `G` of shape `dim × rank`.
pub fn random_density(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> DensityMatrix {
    let g = Array2::from_shape_fn((dim, rank), |_| gaussian(rng));
    let gg = g.dot(&g.t().mapv(|z| z.conj()));
    let tr: f64 = gg.diag().iter().map(|z| z.re).sum();
    let m = gg.mapv(|z| z / tr);
    let m = (&m + &m.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
    DensityMatrix::new(m, Basis::Single(dim)).unwrap()
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
