//! Constrained "universe" states: total-energy eigenstates `|M:N⟩` of
//! `Ĥ = ω₁(a₁†a₁ + N a₂†a₂)`, mixtures over the energy label `M`, and the
//! continuous and discrete time-translation group averages.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fock::{kick_characters, Basis, DensityMatrix, ModeCutoff, SingleModeState, TwoModeState, NORM_TOL};
use crate::par::Exec;

/// Tolerance on `Σ p_M = 1`.
pub const MIXTURE_TOL: f64 = 1e-10;

/// Frequency ratio `N = ω₂/ω₁` and the clock frequency `ω₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniverseSpec {
    ratio: usize,
    omega1: f64,
}

impl UniverseSpec {
    pub fn new(ratio: usize, omega1: f64) -> Result<Self> {
        if ratio == 0 {
            return Err(domain("frequency ratio N must be at least 1"));
        }
        if !omega1.is_finite() || omega1 <= 0.0 {
            return Err(domain("omega1 must be positive and finite"));
        }
        Ok(Self { ratio, omega1 })
    }

    /// `ω₁ = 1`
    pub fn with_ratio(ratio: usize) -> Result<Self> {
        Self::new(ratio, 1.0)
    }

    pub fn ratio(&self) -> usize {
        self.ratio
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> f64 {
        self.omega1 * self.ratio as f64
    }

    /// Clock period `2π/ω₁`.
    pub fn clock_period(&self) -> f64 {
        2.0 * PI / self.omega1
    }

    /// System period `2π/ω₂`.
    pub fn system_period(&self) -> f64 {
        2.0 * PI / self.omega2()
    }

    /// Total energy `n + N m` of `|n⟩₁|m⟩₂` in units of `ω₁`.
    pub fn energy_level(&self, n: usize, m: usize) -> usize {
        n + self.ratio * m
    }
}

/// `g(M) = ⌊M/N⌋ + 1`, the number of `(n, m)` with `n + N m = M`.
pub fn degeneracy(level: i64, ratio: i64) -> Result<usize> {
    if level < 0 {
        return Err(domain(format!("energy label M = {level} is negative")));
    }
    if ratio < 1 {
        return Err(domain(format!("frequency ratio N = {ratio} must be at least 1")));
    }
    Ok((level / ratio) as usize + 1)
}

fn g(level: usize, ratio: usize) -> usize {
    level / ratio + 1
}

/// Coefficient choice for `|M:N⟩`.
#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    /// `c_m = g^{−1/2}` for every `m`.
    Equal,
    Custom(Vec<C64>),
}

/// `|M:N⟩ = Σ_m c_m |M − Nm⟩₁ ⊗ |m⟩₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyEigenstate {
    level: usize,
    spec: UniverseSpec,
    weights: Array1<C64>,
}

impl EnergyEigenstate {
    pub fn new(level: usize, spec: UniverseSpec, weights: Weights) -> Result<Self> {
        let g = g(level, spec.ratio);
        let weights = match weights {
            Weights::Equal => Array1::from_elem(g, C64::new((g as f64).sqrt().recip(), 0.0)),
            Weights::Custom(c) => {
                if c.len() != g {
                    return Err(domain(format!(
                        "M = {level}, N = {} needs {g} coefficients, got {}",
                        spec.ratio,
                        c.len()
                    )));
                }
                let norm_sqr: f64 = c.iter().map(|z| z.norm_sqr()).sum();
                if (norm_sqr - 1.0).abs() > NORM_TOL {
                    return Err(Error::NotNormalized { norm_sqr });
                }
                Array1::from(c)
            }
        };
        Ok(Self { level, spec, weights })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn spec(&self) -> UniverseSpec {
        self.spec
    }

    pub fn weights(&self) -> &Array1<C64> {
        &self.weights
    }

    pub fn degeneracy(&self) -> usize {
        self.weights.len()
    }

    /// Smallest `(clock, system)` cutoffs that hold the nonzero coefficients;
    /// `(M+1, g)` when every `c_m` is nonzero.
    pub fn min_cutoffs(&self) -> (usize, usize) {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .fold((1, 1), |(a, b), (m, _)| {
                (a.max(self.level - self.spec.ratio * m + 1), b.max(m + 1))
            })
    }

    pub fn to_two_mode(&self, cutoffs: (ModeCutoff, ModeCutoff)) -> Result<TwoModeState> {
        let (d1, d2) = (cutoffs.0.dim(), cutoffs.1.dim());
        let (need1, need2) = self.min_cutoffs();
        if d1 < need1 || d2 < need2 {
            return Err(Error::CutoffTooSmall {
                need1,
                need2,
                found1: d1,
                found2: d2,
            });
        }
        let mut amps = Array2::zeros((d1, d2));
        for (m, c) in self.weights.iter().enumerate() {
            let n = self.level - self.spec.ratio * m;
            if n < d1 && m < d2 {
                amps[[n, m]] = *c;
            }
        }
        TwoModeState::new(amps)
    }
}

/// `|M:N⟩` on the given cutoffs.
pub fn energy_eigenstate(
    level: usize,
    spec: UniverseSpec,
    weights: Weights,
    cutoffs: (ModeCutoff, ModeCutoff),
) -> Result<TwoModeState> {
    EnergyEigenstate::new(level, spec, weights)?.to_two_mode(cutoffs)
}

/// `Ĥ|Ψ⟩` as an amplitude matrix.
pub fn apply_hamiltonian(state: &TwoModeState, spec: UniverseSpec) -> Array2<C64> {
    Array2::from_shape_fn(state.dims(), |(n, m)| {
        state.amplitudes()[[n, m]] * (spec.omega1 * spec.energy_level(n, m) as f64)
    })
}

/// `ρ = Σ_M p_M |M:N⟩⟨M:N|`, terms sorted by ascending `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniverseMixture {
    terms: Vec<(f64, EnergyEigenstate)>,
}

impl UniverseMixture {
    pub fn new(mut terms: Vec<(f64, EnergyEigenstate)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(domain("mixture needs at least one term"));
        }
        let spec = terms[0].1.spec;
        if terms.iter().any(|(_, e)| e.spec != spec) {
            return Err(domain("all mixture terms must share one universe spec"));
        }
        if terms.iter().any(|(p, _)| !p.is_finite() || *p < 0.0) {
            return Err(domain("mixture weights must be finite and nonnegative"));
        }
        let total: f64 = terms.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > MIXTURE_TOL {
            return Err(domain(format!("mixture weights sum to {total}, not 1")));
        }
        terms.sort_by_key(|(_, e)| e.level);
        if terms.windows(2).any(|w| w[0].1.level == w[1].1.level) {
            return Err(domain("mixture energy labels must be distinct"));
        }
        Ok(Self { terms })
    }

    /// A single eigenstate with weight one.
    pub fn pure(state: EnergyEigenstate) -> Self {
        Self {
            terms: vec![(1.0, state)],
        }
    }

    pub fn terms(&self) -> &[(f64, EnergyEigenstate)] {
        &self.terms
    }

    pub fn spec(&self) -> UniverseSpec {
        self.terms[0].1.spec
    }

    /// Smallest cutoffs holding every term.
    pub fn min_cutoffs(&self) -> (usize, usize) {
        self.terms.iter().fold((1, 1), |(a, b), (_, e)| {
            let (x, y) = e.min_cutoffs();
            (a.max(x), b.max(y))
        })
    }

    pub fn density(&self, cutoffs: (ModeCutoff, ModeCutoff)) -> Result<DensityMatrix> {
        let (d1, d2) = (cutoffs.0.dim(), cutoffs.1.dim());
        let mut mat = Array2::<C64>::zeros((d1 * d2, d1 * d2));
        for (p, e) in &self.terms {
            let v = e.to_two_mode(cutoffs)?.to_vector();
            let support: Vec<usize> = (0..v.len()).filter(|&i| v[i].norm_sqr() > 0.0).collect();
            for &i in &support {
                for &j in &support {
                    mat[[i, j]] += *p * v[i] * v[j].conj();
                }
            }
        }
        Ok(DensityMatrix::from_raw(mat, Basis::Joint(d1, d2)))
    }
}

/// Decomposes `|Ψ⟩⟨Ψ|` after group averaging into `Σ_M p_M |M:N⟩⟨M:N|`
/// with `p_M = Σ_m |α_{M−Nm,m}|²` and `c_m = α_{M−Nm,m}/√p_M`. Labels with
/// zero weight are omitted.
pub fn coefficients_from_state(state: &TwoModeState, spec: UniverseSpec) -> Result<UniverseMixture> {
    coefficients_from_state_with(state, spec, Exec::default())
}

pub fn coefficients_from_state_with(state: &TwoModeState, spec: UniverseSpec, exec: Exec) -> Result<UniverseMixture> {
    let (d1, d2) = state.dims();
    let amps = state.amplitudes();
    let ratio = spec.ratio;
    let max_level = spec.energy_level(d1 - 1, d2 - 1);
    let per_level = exec.map(max_level + 1, |level| {
        let coeffs: Vec<C64> = (0..g(level, ratio))
            .map(|m| {
                let n = level - ratio * m;
                if n < d1 && m < d2 {
                    amps[[n, m]]
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        let p: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
        (level, p, coeffs)
    });
    let mut terms = Vec::new();
    for (level, p, coeffs) in per_level {
        if p > 0.0 {
            let scale = p.sqrt().recip();
            let c = coeffs.into_iter().map(|z| z * scale).collect();
            terms.push((p, EnergyEigenstate::new(level, spec, Weights::Custom(c))?));
        }
    }
    let total: f64 = terms.iter().map(|(p, _)| p).sum();
    for t in &mut terms {
        t.0 /= total;
    }
    UniverseMixture::new(terms)
}

/// `lim_{T→∞} (1/T)∫₀ᵀ e^{−iĤt}|Ψ⟩⟨Ψ|e^{iĤt} dt`, evaluated exactly as the
/// projection that removes coherences between different total energies.
pub fn group_average_continuous(state: &TwoModeState, spec: UniverseSpec) -> DensityMatrix {
    group_average_density(&DensityMatrix::from_two_mode(state), spec).expect("two-mode density is on a joint basis")
}

/// Energy-diagonal projection of an arbitrary joint density matrix.
pub fn group_average_density(rho: &DensityMatrix, spec: UniverseSpec) -> Result<DensityMatrix> {
    let Basis::Joint(d1, d2) = rho.basis() else {
        return Err(Error::DimensionMismatch {
            expected: "joint two-mode basis".into(),
            found: "single-mode basis".into(),
        });
    };
    let energy = |i: usize| spec.energy_level(i / d2, i % d2);
    let m = rho.matrix();
    let dim = d1 * d2;
    let mat = Array2::from_shape_fn((dim, dim), |(i, j)| {
        if energy(i) == energy(j) {
            m[[i, j]]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(DensityMatrix::from_raw(mat, rho.basis()))
}

/// `(1/(Ω+1)) Σ_{α=0}^{Ω} e^{−iαĤ}(|ψ⟩⟨ψ| ⊗ |ξ⟩⟨ξ|)e^{iαĤ}` with
/// `Ĥ = a₁†a₁ + N a₂†a₂`.
pub fn group_average_discrete(
    clock: &SingleModeState,
    system: &SingleModeState,
    spec: UniverseSpec,
    omega_range: usize,
) -> DensityMatrix {
    group_average_discrete_with(clock, system, spec, omega_range, Exec::default())
}

pub fn group_average_discrete_with(
    clock: &SingleModeState,
    system: &SingleModeState,
    spec: UniverseSpec,
    omega_range: usize,
    exec: Exec,
) -> DensityMatrix {
    let product = crate::fock::tensor(clock, system);
    group_average_discrete_density(&DensityMatrix::from_two_mode(&product), spec, omega_range, exec)
        .expect("two-mode density is on a joint basis")
}

/// `(1/(Ω+1)) Σ_{α=0}^{Ω} e^{−iαĤ} ρ e^{iαĤ}` for an arbitrary joint density
/// matrix.
pub fn group_average_discrete_density(
    rho: &DensityMatrix,
    spec: UniverseSpec,
    omega_range: usize,
    exec: Exec,
) -> Result<DensityMatrix> {
    let Basis::Joint(d1, d2) = rho.basis() else {
        return Err(Error::DimensionMismatch {
            expected: "joint two-mode basis".into(),
            found: "single-mode basis".into(),
        });
    };
    let max_level = spec.energy_level(d1 - 1, d2 - 1);
    let weights = vec![1.0 / (omega_range + 1) as f64; omega_range + 1];
    let chars = kick_characters(&weights, 1.0, max_level + 1, exec);
    let energy = |i: usize| spec.energy_level(i / d2, i % d2);
    let m = rho.matrix();
    let dim = d1 * d2;
    let mat = Array2::from_shape_fn((dim, dim), |(i, j)| {
        let (ei, ej) = (energy(i), energy(j));
        if ei == ej {
            m[[i, j]]
        } else if ei > ej {
            m[[i, j]] * chars[ei - ej]
        } else {
            m[[i, j]] * chars[ej - ei].conj()
        }
    });
    Ok(DensityMatrix::from_raw(mat, rho.basis()))
}

/// On-disk form of a mixture:
/// `{"N": int, "terms": [{"M": int, "p": real, "c": [[re, im], ...]}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFile {
    #[serde(rename = "N")]
    pub ratio: usize,
    pub terms: Vec<WeightTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightTerm {
    #[serde(rename = "M")]
    pub level: usize,
    pub p: f64,
    pub c: Vec<[f64; 2]>,
}

impl WeightFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| domain(format!("bad weight file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("weight file serializes")
    }

    /// Validated mixture with `ω₁ = 1`.
    pub fn to_mixture(&self) -> Result<UniverseMixture> {
        let spec = UniverseSpec::with_ratio(self.ratio)?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let c = t.c.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                Ok((t.p, EnergyEigenstate::new(t.level, spec, Weights::Custom(c))?))
            })
            .collect::<Result<Vec<_>>>()?;
        UniverseMixture::new(terms)
    }

    pub fn from_mixture(mix: &UniverseMixture) -> Self {
        Self {
            ratio: mix.spec().ratio(),
            terms: mix
                .terms()
                .iter()
                .map(|(p, e)| WeightTerm {
                    level: e.level(),
                    p: *p,
                    c: e.weights().iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn cuts(a: usize, b: usize) -> (ModeCutoff, ModeCutoff) {
        (ModeCutoff::new(a).unwrap(), ModeCutoff::new(b).unwrap())
    }

    fn spec3() -> UniverseSpec {
        UniverseSpec::with_ratio(3).unwrap()
    }

    #[test]
    fn degeneracy_examples() {
        assert_eq!(degeneracy(0, 3).unwrap(), 1);
        assert_eq!(degeneracy(10, 3).unwrap(), 4);
        assert_eq!(degeneracy(39, 3).unwrap(), 14);
        assert_eq!(degeneracy(40, 3).unwrap(), 14);
        assert_eq!(degeneracy(41, 3).unwrap(), 14);
        assert!(degeneracy(-1, 3).is_err());
        assert!(degeneracy(4, 0).is_err());
    }

    #[test]
    fn degeneracy_matches_enumeration() {
        for ratio in 1..=6usize {
            for level in 0..=60usize {
                let count = (0..=level)
                    .flat_map(|n| (0..=level).map(move |m| (n, m)))
                    .filter(|&(n, m)| n + ratio * m == level)
                    .count();
                assert_eq!(count, degeneracy(level as i64, ratio as i64).unwrap());
            }
        }
    }

    #[test]
    fn eigenstate_examples() {
        let s = energy_eigenstate(0, spec3(), Weights::Equal, cuts(1, 1)).unwrap();
        assert_eq!(s.amplitudes()[[0, 0]], C64::new(1.0, 0.0));

        let s = energy_eigenstate(3, spec3(), Weights::Equal, cuts(4, 2)).unwrap();
        assert!((s.amplitudes()[[3, 0]].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitudes()[[0, 1]].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(s.amplitudes().iter().filter(|z| z.norm() > 0.0).count(), 2);

        for level in [0usize, 5, 17, 39] {
            let s = energy_eigenstate(level, spec3(), Weights::Equal, cuts(45, 16)).unwrap();
            let h = apply_hamiltonian(&s, spec3());
            let resid = (&h - &s.amplitudes().mapv(|z| z * level as f64))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(resid <= 1e-12);
        }
    }

    #[test]
    fn eigenstate_cutoff_error_names_minimum() {
        let err = energy_eigenstate(39, spec3(), Weights::Equal, cuts(30, 14)).unwrap_err();
        match err {
            Error::CutoffTooSmall { need1, need2, .. } => assert_eq!((need1, need2), (40, 14)),
            other => panic!("unexpected {other}"),
        }
        assert!(EnergyEigenstate::new(3, spec3(), Weights::Custom(vec![C64::new(1.0, 0.0)])).is_err());
    }

    #[test]
    fn eigenstates_orthonormal() {
        let c = cuts(31, 11);
        let states: Vec<_> = (0..=30)
            .map(|l| energy_eigenstate(l, spec3(), Weights::Equal, c).unwrap().to_vector())
            .collect();
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let ov = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm();
                if i == j {
                    assert!((ov - 1.0).abs() < 1e-12);
                } else {
                    assert!(ov <= 1e-12);
                }
            }
        }
    }

    fn ket(d: (usize, usize), entries: &[((usize, usize), f64)]) -> TwoModeState {
        let mut a = Array2::zeros(d);
        for &((n, m), v) in entries {
            a[[n, m]] = C64::new(v, 0.0);
        }
        TwoModeState::new(a).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        let mix = coefficients_from_state(&ket((3, 1), &[((2, 0), 1.0)]), spec3()).unwrap();
        assert_eq!(mix.terms().len(), 1);
        assert_eq!(mix.terms()[0].0, 1.0);
        assert_eq!(mix.terms()[0].1.level(), 2);
        assert_eq!(mix.terms()[0].1.weights()[0], C64::new(1.0, 0.0));

        let psi = ket((4, 2), &[((3, 0), FRAC_1_SQRT_2), ((0, 1), FRAC_1_SQRT_2)]);
        let mix = coefficients_from_state(&psi, spec3()).unwrap();
        assert_eq!(mix.terms().len(), 1);
        assert!((mix.terms()[0].0 - 1.0).abs() < 1e-15);
        for c in mix.terms()[0].1.weights() {
            assert!((c.re - FRAC_1_SQRT_2).abs() < 1e-15);
        }

        let psi = ket((2, 2), &[((1, 0), FRAC_1_SQRT_2), ((0, 1), FRAC_1_SQRT_2)]);
        let mix = coefficients_from_state(&psi, spec3()).unwrap();
        let levels: Vec<_> = mix.terms().iter().map(|(p, e)| (e.level(), *p)).collect();
        assert_eq!(levels.len(), 2);
        assert_eq!(levels[0].0, 1);
        assert_eq!(levels[1].0, 3);
        assert!((levels[0].1 - 0.5).abs() < 1e-15 && (levels[1].1 - 0.5).abs() < 1e-15);
        // the M = 3 term has g = 2 but only c₁ is populated
        assert_eq!(mix.terms()[1].1.weights()[1], C64::new(1.0, 0.0));
    }

    #[test]
    fn continuous_average_examples() {
        let s = energy_eigenstate(7, spec3(), Weights::Equal, cuts(8, 3)).unwrap();
        let avg = group_average_continuous(&s, spec3());
        let pure = DensityMatrix::from_two_mode(&s);
        assert_eq!(avg.matrix(), pure.matrix());

        let psi = ket((2, 2), &[((1, 0), FRAC_1_SQRT_2), ((0, 1), FRAC_1_SQRT_2)]);
        let avg = group_average_continuous(&psi, spec3());
        let m = avg.matrix();
        // joint index n * 2 + m: |1,0⟩ → 2, |0,1⟩ → 1
        assert!((m[[2, 2]].re - 0.5).abs() < 1e-15);
        assert!((m[[1, 1]].re - 0.5).abs() < 1e-15);
        assert_eq!(m[[1, 2]], C64::new(0.0, 0.0));
        assert_eq!(m[[2, 1]], C64::new(0.0, 0.0));
    }

    #[test]
    fn discrete_average_single_term_is_identity() {
        let clock = SingleModeState::normalized(ndarray::array![C64::new(1.0, 0.0), C64::new(0.5, 0.5)]).unwrap();
        let sys = SingleModeState::normalized(ndarray::array![C64::new(0.2, 0.0), C64::new(0.0, 1.0)]).unwrap();
        let avg = group_average_discrete(&clock, &sys, spec3(), 0);
        let raw = DensityMatrix::from_two_mode(&crate::fock::tensor(&clock, &sys));
        assert!((avg.matrix() - raw.matrix()).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn weight_file_round_trip() {
        let text = r#"{"N":3,"terms":[{"M":3,"p":0.25,"c":[[0.6,0.0],[0.0,0.8]]},{"M":1,"p":0.75,"c":[[1.0,0.0]]}]}"#;
        let wf = WeightFile::from_json(text).unwrap();
        let mix = wf.to_mixture().unwrap();
        assert_eq!(mix.terms()[0].1.level(), 1);
        assert_eq!(WeightFile::from_mixture(&mix).to_mixture().unwrap(), mix);
        assert!(
            WeightFile::from_json(r#"{"N":3,"terms":[{"M":3,"p":1.0,"c":[[1.0,0.0]]}]}"#)
                .unwrap()
                .to_mixture()
                .is_err()
        );
        assert!(WeightFile::from_json("{").is_err());
    }

    #[test]
    fn mixture_validation() {
        let e = |l| EnergyEigenstate::new(l, spec3(), Weights::Equal).unwrap();
        assert!(UniverseMixture::new(vec![(0.5, e(1)), (0.4, e(2))]).is_err());
        assert!(UniverseMixture::new(vec![(0.5, e(1)), (0.5, e(1))]).is_err());
        assert!(UniverseMixture::new(vec![(1.5, e(1)), (-0.5, e(2))]).is_err());
        let mix = UniverseMixture::new(vec![(0.5, e(4)), (0.5, e(1))]).unwrap();
        assert_eq!(mix.min_cutoffs(), (5, 2));
        let rho = mix.density(cuts(5, 2)).unwrap();
        assert!(rho.validate().is_ok());
    }
}
