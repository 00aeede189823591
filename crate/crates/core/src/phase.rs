//! Susskind–Glogower phase statistics.
//!
//! Phase kets are `|φ⟩ = Σ_n e^{−inφ}|n⟩` truncated at the cutoff, and the
//! POVM `E(φ) = |φ⟩⟨φ|` is normalized against the measure `dφ/2π`, so
//! `∫ E(φ) dφ/2π = I` and states without phase information have `P ≡ 1`.
//! Amplitudes are `⟨φ|ψ⟩ = Σ_n e^{+inφ} ψ_n`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{domain, Result};
use crate::fock::{Basis, DensityMatrix, ModeCutoff, SingleModeState, TwoModeState};
use crate::linalg;
use crate::par::Exec;
use crate::universe::{degeneracy, UniverseMixture, UniverseSpec};

/// `K` equally spaced angles `2πk/K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseGrid {
    size: usize,
}

impl PhaseGrid {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(domain("phase grid needs at least one point"));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.size as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.size as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.size).map(|k| self.point(k)).collect()
    }

    /// `e^{2πij/K}` for `j = 0..K`; `e^{inφ_k}` is entry `(n·k) mod K`.
    fn roots(&self) -> Vec<C64> {
        (0..self.size).map(|j| C64::cis(self.point(j))).collect()
    }

    /// Circular distance between grid indices, in radians.
    fn circular_distance(&self, a: usize, b: usize) -> f64 {
        let d = (a + self.size - b % self.size) % self.size;
        d.min(self.size - d) as f64 * self.spacing()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    BruteForce,
    ClosedForm,
}

/// `P(φ₁, φ₂)` on a square grid; `values[(i, j)]` is at `(φ_i, φ_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPhaseDistribution {
    values: Array2<f64>,
    grid: PhaseGrid,
    provenance: Provenance,
}

impl JointPhaseDistribution {
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn grid(&self) -> PhaseGrid {
        self.grid
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Grid mean, summed in row-major order.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest elementwise difference from another distribution on the same
    /// grid.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(domain("distributions live on different grids"));
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Adds `delta` to every entry; used to check that the oracle comparison
    /// notices small corruptions.
    pub fn perturbed(&self, delta: f64) -> Self {
        Self {
            values: self.values.mapv(|v| v + delta),
            ..self.clone()
        }
    }
}

/// `⟨φ|ψ⟩ = Σ_n e^{inφ} ψ_n`
pub fn phase_amplitude(state: &SingleModeState, phi: f64) -> C64 {
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, a)| a * C64::cis(n as f64 * phi))
        .sum()
}

/// `P(φ) = ⟨φ|ρ|φ⟩` of one mode on a grid.
pub fn phase_density(rho: &DensityMatrix, grid: PhaseGrid) -> Vec<f64> {
    let roots = grid.roots();
    let k_len = grid.size();
    let m = rho.matrix();
    let d = rho.dim();
    (0..k_len)
        .map(|k| {
            let v: Vec<C64> = (0..d).map(|n| roots[(n * k) % k_len]).collect();
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..d {
                for b in 0..d {
                    acc += v[a] * m[[a, b]] * v[b].conj();
                }
            }
            acc.re
        })
        .collect()
}

fn pure_joint_values(amps: &Array2<C64>, grid: PhaseGrid, exec: Exec) -> Array2<f64> {
    let k_len = grid.size();
    let roots = grid.roots();
    let (d1, d2) = amps.dim();
    let rows = exec.map(k_len, |i| {
        let b: Vec<C64> = (0..d2)
            .map(|m| (0..d1).map(|n| amps[[n, m]] * roots[(n * i) % k_len]).sum())
            .collect();
        (0..k_len)
            .map(|j| {
                b.iter()
                    .enumerate()
                    .map(|(m, bm)| bm * roots[(m * j) % k_len])
                    .sum::<C64>()
                    .norm_sqr()
            })
            .collect::<Vec<f64>>()
    });
    Array2::from_shape_vec((k_len, k_len), rows.concat()).expect("row lengths match grid")
}

/// `P(φ₁, φ₂) = |Σ_{n,m} α_{n,m} e^{inφ₁} e^{imφ₂}|²` evaluated directly.
pub fn joint_phase_bruteforce(state: &TwoModeState, grid: PhaseGrid) -> JointPhaseDistribution {
    joint_phase_bruteforce_with(state, grid, Exec::default())
}

pub fn joint_phase_bruteforce_with(state: &TwoModeState, grid: PhaseGrid, exec: Exec) -> JointPhaseDistribution {
    JointPhaseDistribution {
        values: pure_joint_values(state.amplitudes(), grid, exec),
        grid,
        provenance: Provenance::BruteForce,
    }
}

/// `P(φ₁, φ₂) = tr[E₁(φ₁) ⊗ E₂(φ₂) ρ]` for a joint density matrix, summed
/// over its eigen-decomposition.
pub fn joint_phase_bruteforce_mixed(rho: &DensityMatrix, grid: PhaseGrid) -> Result<JointPhaseDistribution> {
    let Basis::Joint(d1, d2) = rho.basis() else {
        return Err(domain("joint phase distribution needs a two-mode density matrix"));
    };
    let (vals, vecs) = linalg::eigh(&rho.hermitian_part()?);
    let mut values = Array2::<f64>::zeros((grid.size(), grid.size()));
    for (k, &lambda) in vals.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let amps = Array2::from_shape_fn((d1, d2), |(n, m)| vecs[[n * d2 + m, k]]);
        values.scaled_add(lambda, &pure_joint_values(&amps, grid, Exec::default()));
    }
    Ok(JointPhaseDistribution {
        values,
        grid,
        provenance: Provenance::BruteForce,
    })
}

/// Distribution of `ρ_N = Σ_M p_M |M:N⟩⟨M:N|`, term by term.
pub fn joint_phase_mixture(mix: &UniverseMixture, grid: PhaseGrid) -> Result<JointPhaseDistribution> {
    let (d1, d2) = mix.min_cutoffs();
    let cutoffs = (ModeCutoff::new(d1)?, ModeCutoff::new(d2)?);
    let mut values = Array2::<f64>::zeros((grid.size(), grid.size()));
    for (p, e) in mix.terms() {
        let state = e.to_two_mode(cutoffs)?;
        values.scaled_add(*p, &pure_joint_values(state.amplitudes(), grid, Exec::default()));
    }
    Ok(JointPhaseDistribution {
        values,
        grid,
        provenance: Provenance::BruteForce,
    })
}

/// `sin²(g x/2) / sin²(x/2)`, with the removable singularity at `x = 2πk`
/// replaced by its series when `|1 − e^{ix}| < 1e−6`.
pub fn dirichlet_squared(g: usize, x: f64) -> f64 {
    let x = reduce_angle(x);
    let gf = g as f64;
    if 2.0 * (x / 2.0).sin().abs() < 1e-6 {
        let ratio = gf * (1.0 - (gf * gf - 1.0) * x * x / 24.0);
        ratio * ratio
    } else {
        let r = (gf * x / 2.0).sin() / (x / 2.0).sin();
        r * r
    }
}

/// Maps an angle into `(−π, π]`.
fn reduce_angle(x: f64) -> f64 {
    let mut r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// `P(φ₁, φ₂) = (1/g) |(1 − e^{ig x}) / (1 − e^{ix})|²` with
/// `x = Nφ₁ − φ₂`, for `|M:N⟩` with equal coefficients.
pub fn joint_phase_closed_form(level: usize, ratio: usize, phi1: f64, phi2: f64) -> Result<f64> {
    let g = degeneracy(level as i64, ratio as i64)?;
    let x = ratio as f64 * phi1 - phi2;
    Ok(dirichlet_squared(g, x) / g as f64)
}

/// The closed form on a grid. Grid angles are reduced with integer
/// arithmetic, `x = 2π((N i − j) mod K)/K`.
pub fn joint_phase_closed_form_grid(level: usize, ratio: usize, grid: PhaseGrid) -> Result<JointPhaseDistribution> {
    joint_phase_closed_form_grid_with(level, ratio, grid, Exec::default())
}

pub fn joint_phase_closed_form_grid_with(
    level: usize,
    ratio: usize,
    grid: PhaseGrid,
    exec: Exec,
) -> Result<JointPhaseDistribution> {
    let g = degeneracy(level as i64, ratio as i64)?;
    let k_len = grid.size();
    let rows = exec.map(k_len, |i| {
        (0..k_len)
            .map(|j| {
                let r = ((ratio * i) % k_len + k_len - j) % k_len;
                let x = if 2 * r > k_len {
                    -(grid.point(k_len - r))
                } else {
                    grid.point(r)
                };
                dirichlet_squared(g, x) / g as f64
            })
            .collect::<Vec<f64>>()
    });
    Ok(JointPhaseDistribution {
        values: Array2::from_shape_vec((k_len, k_len), rows.concat()).expect("row lengths match grid"),
        grid,
        provenance: Provenance::ClosedForm,
    })
}

/// Per-row maximum of a joint distribution compared against the classical
/// relation `φ₂ = Nφ₁ mod 2π`.
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeRow {
    pub phi1: f64,
    pub argmax_phi2: f64,
    /// Circular distance from `Nφ₁ mod 2π`; `None` for flat rows.
    pub deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RidgeReport {
    pub rows: Vec<RidgeRow>,
    /// Largest deviation over non-flat rows (zero if every row is flat).
    pub max_deviation: f64,
    pub flat_rows: usize,
}

impl RidgeReport {
    pub fn all_flat(&self) -> bool {
        self.flat_rows == self.rows.len()
    }
}

/// A row counts as flat when its spread is below this (relative to 1).
pub const FLAT_ROW_TOL: f64 = 1e-9;

pub fn ridge_check(dist: &JointPhaseDistribution, ratio: usize) -> Result<RidgeReport> {
    let grid = dist.grid;
    let k_len = grid.size();
    if ratio == 0 {
        return Err(domain("frequency ratio N must be at least 1"));
    }
    if k_len < 2 * ratio {
        return Err(domain(format!(
            "grid of {k_len} points cannot resolve the ridge for N = {ratio}"
        )));
    }
    let mut rows = Vec::with_capacity(k_len);
    let mut max_deviation = 0.0f64;
    let mut flat_rows = 0;
    for i in 0..k_len {
        let row = dist.values.row(i);
        let (mut best, mut lo) = (0usize, row[0]);
        for (j, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = j;
            }
            lo = lo.min(v);
        }
        let deviation = if row[best] - lo <= FLAT_ROW_TOL * row[best].abs().max(1.0) {
            flat_rows += 1;
            None
        } else {
            let d = grid.circular_distance(best, ratio * i);
            max_deviation = max_deviation.max(d);
            Some(d)
        };
        rows.push(RidgeRow {
            phi1: grid.point(i),
            argmax_phi2: grid.point(best),
            deviation,
        });
    }
    Ok(RidgeReport {
        rows,
        max_deviation,
        flat_rows,
    })
}

/// `Φ̂ = ∫₀^{2π} φ E(φ) dφ/2π` in the number basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseOperatorMatrix {
    mat: Array2<C64>,
}

impl PhaseOperatorMatrix {
    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }
}

/// Entries `π` on the diagonal and `i/(m − n)` off it.
pub fn phase_operator_matrix(cutoff: ModeCutoff) -> Result<PhaseOperatorMatrix> {
    let d = cutoff.dim();
    if d < 2 {
        return Err(domain("phase operator needs a cutoff of at least 2"));
    }
    let mat = Array2::from_shape_fn((d, d), |(n, m)| {
        if n == m {
            C64::new(PI, 0.0)
        } else {
            C64::new(0.0, 1.0 / (m as f64 - n as f64))
        }
    });
    Ok(PhaseOperatorMatrix { mat })
}

/// `[Φ̂, a†a]`, formed by dense products.
pub fn number_phase_commutator(cutoff: ModeCutoff) -> Result<Array2<C64>> {
    if cutoff.dim() < 3 {
        return Err(domain("commutator check needs a cutoff of at least 3"));
    }
    let phi = phase_operator_matrix(cutoff)?.mat;
    let number = Array2::from_diag(&Array1::from_shape_fn(cutoff.dim(), |n| C64::new(n as f64, 0.0)));
    Ok(phi.dot(&number) - number.dot(&phi))
}

/// `Φ̂₋ = T₁(Φ̂₁ ⊗ I − (1/N) I ⊗ Φ̂₂)` on the joint basis.
pub fn phase_difference_operator(cutoffs: (ModeCutoff, ModeCutoff), spec: UniverseSpec) -> Result<Array2<C64>> {
    let (d1, d2) = (cutoffs.0.dim(), cutoffs.1.dim());
    let p1 = phase_operator_matrix(cutoffs.0)?.mat;
    let p2 = phase_operator_matrix(cutoffs.1)?.mat;
    let inv_n = 1.0 / spec.ratio() as f64;
    let t1 = spec.clock_period();
    Ok(Array2::from_shape_fn((d1 * d2, d1 * d2), |(i, j)| {
        let (n, m) = (i / d2, i % d2);
        let (n2, m2) = (j / d2, j % d2);
        let mut v = C64::new(0.0, 0.0);
        if m == m2 {
            v += p1[[n, n2]];
        }
        if n == n2 {
            v -= p2[[m, m2]] * inv_n;
        }
        v * t1
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{number_state, tensor};
    use crate::universe::{energy_eigenstate, Weights};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn cut(d: usize) -> ModeCutoff {
        ModeCutoff::new(d).unwrap()
    }

    #[test]
    fn amplitude_examples() {
        let vac = number_state(0, cut(5)).unwrap();
        for phi in [0.0, 0.4, 3.0, -2.2] {
            assert!((phase_amplitude(&vac, phi) - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
        let three = number_state(3, cut(5)).unwrap();
        for phi in [0.0, 0.4, 3.0] {
            let a = phase_amplitude(&three, phi);
            assert!((a - C64::cis(3.0 * phi)).norm() < 1e-15);
            assert!((a.norm() - 1.0).abs() < 1e-15);
        }
        let plus = SingleModeState::new(ndarray::array![
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::new(FRAC_1_SQRT_2, 0.0)
        ])
        .unwrap();
        let a = phase_amplitude(&plus, 0.0);
        assert!((a.re - 2.0f64.sqrt()).abs() < 1e-15);
        assert!((a.norm_sqr() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn flat_distributions() {
        let grid = PhaseGrid::new(16).unwrap();
        let vac = tensor(&number_state(0, cut(3)).unwrap(), &number_state(0, cut(2)).unwrap());
        let p = joint_phase_bruteforce(&vac, grid);
        assert!(p.values().iter().all(|v| (v - 1.0).abs() < 1e-15));

        let m0 = energy_eigenstate(
            0,
            UniverseSpec::with_ratio(3).unwrap(),
            Weights::Equal,
            (cut(1), cut(1)),
        )
        .unwrap();
        let p = joint_phase_bruteforce(&m0, grid);
        assert!(p.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn closed_form_special_points() {
        // M = 39, N = 3 → g = 14
        assert!((joint_phase_closed_form(39, 3, 0.0, 0.0).unwrap() - 14.0).abs() < 1e-12);
        assert!((joint_phase_closed_form(39, 3, 1.0, 3.0).unwrap() - 14.0).abs() < 1e-12);
        assert!((joint_phase_closed_form(39, 3, 1.0, 3.0 - 2.0 * PI).unwrap() - 14.0).abs() < 1e-11);
        for j in 1..14 {
            let x = 2.0 * PI * j as f64 / 14.0;
            assert!(joint_phase_closed_form(39, 3, 0.0, -x).unwrap().abs() < 1e-12);
        }
        for x in [0.0, 0.3, 1.7, 5.0] {
            assert_eq!(joint_phase_closed_form(2, 3, x, 0.1).unwrap(), 1.0);
        }
    }

    #[test]
    fn series_branch_is_continuous() {
        for g in [2usize, 14, 46] {
            for x in [1e-7, 5e-7, 9e-7, 1.1e-6, 2e-6] {
                let exact = {
                    let r = (g as f64 * x / 2.0).sin() / (x / 2.0).sin();
                    r * r
                };
                assert!((dirichlet_squared(g, x) - exact).abs() < 1e-10 * exact);
                assert!((dirichlet_squared(g, 2.0 * PI + x) - exact).abs() < 1e-8 * exact);
            }
        }
    }

    #[test]
    fn bruteforce_matches_closed_form_m39() {
        let spec = UniverseSpec::with_ratio(3).unwrap();
        let grid = PhaseGrid::new(64).unwrap();
        let s = energy_eigenstate(39, spec, Weights::Equal, (cut(40), cut(14))).unwrap();
        let bf = joint_phase_bruteforce(&s, grid);
        let cf = joint_phase_closed_form_grid(39, 3, grid).unwrap();
        assert!(bf.sup_distance(&cf).unwrap() <= 1e-10);
        assert_eq!(cf.provenance(), Provenance::ClosedForm);
    }

    #[test]
    fn ridge_examples() {
        let grid = PhaseGrid::new(256).unwrap();
        let cf = joint_phase_closed_form_grid(39, 3, grid).unwrap();
        let r = ridge_check(&cf, 3).unwrap();
        assert_eq!(r.flat_rows, 0);
        assert!(r.max_deviation <= grid.spacing());

        let flat = joint_phase_closed_form_grid(2, 3, grid).unwrap();
        assert!(ridge_check(&flat, 3).unwrap().all_flat());

        let diag = joint_phase_closed_form_grid(5, 1, PhaseGrid::new(64).unwrap()).unwrap();
        let r = ridge_check(&diag, 1).unwrap();
        for row in &r.rows {
            assert!((row.argmax_phi2 - row.phi1).abs() < 1e-12);
        }
        assert!(ridge_check(&diag, 40).is_err());
    }

    #[test]
    fn phase_operator_entries() {
        let p = phase_operator_matrix(cut(6)).unwrap();
        let m = p.matrix();
        for n in 0..6 {
            assert_eq!(m[[n, n]], C64::new(PI, 0.0));
            for k in 0..6 {
                assert_eq!(m[[n, k]], m[[k, n]].conj());
            }
        }
        assert!((m[[0, 1]] - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(phase_operator_matrix(cut(1)).is_err());
    }

    /// Composite Simpson rule for `∫₀^{2π} φ e^{i(n−m)φ} dφ/2π`.
    fn simpson_entry(n: usize, m: usize, intervals: usize) -> C64 {
        let h = 2.0 * PI / intervals as f64;
        let f = |phi: f64| C64::cis((n as f64 - m as f64) * phi) * phi;
        let mut acc = f(0.0) + f(2.0 * PI);
        for k in 1..intervals {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += f(k as f64 * h) * w;
        }
        acc * (h / 3.0) / (2.0 * PI)
    }

    #[test]
    fn phase_operator_against_quadrature() {
        let p = phase_operator_matrix(cut(5)).unwrap();
        for n in 0..5 {
            for m in 0..5 {
                let q = simpson_entry(n, m, 10_000);
                assert!(
                    (q - p.matrix()[[n, m]]).norm() < 1e-8,
                    "({n},{m}) {q} vs {}",
                    p.matrix()[[n, m]]
                );
            }
        }
    }

    #[test]
    fn commutator_entries() {
        let c = number_phase_commutator(cut(8)).unwrap();
        assert!((c[[0, 1]] - C64::new(0.0, 1.0)).norm() < 1e-10);
        assert!((c[[2, 5]] - C64::new(0.0, 1.0)).norm() < 1e-10);
        for n in 0..8 {
            assert_eq!(c[[n, n]], C64::new(0.0, 0.0));
            for m in 0..8 {
                if n != m {
                    assert!((c[[n, m]] - C64::new(0.0, 1.0)).norm() < 1e-10);
                }
            }
        }
        assert!(number_phase_commutator(cut(2)).is_err());
    }

    #[test]
    fn phase_difference_operator_is_hermitian() {
        let spec = UniverseSpec::with_ratio(2).unwrap();
        let op = phase_difference_operator((cut(4), cut(3)), spec).unwrap();
        assert!(linalg::anti_hermitian_norm(&op) < 1e-12);
        // diagonal: T₁(π − π/N)
        let t1 = 2.0 * PI;
        assert!((op[[0, 0]].re - t1 * (PI - PI / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn phase_density_of_number_state_is_flat() {
        let rho = DensityMatrix::from_pure(&number_state(4, cut(6)).unwrap());
        let p = phase_density(&rho, PhaseGrid::new(12).unwrap());
        assert!(p.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }
}
