//! Oscillator 1 as a clock.
//!
//! A reading `φ` of the clock's phase selects, out of the discrete group
//! average over integer steps `α = 0..=Ω`, a kernel
//! `P(φ|α) ∝ |Σ_n c_n e^{−i(α−φ)n}|²`. The system is left in
//! `ρ₂(φ) = Σ_α P(φ|α) e^{−iαN a†a}|ξ⟩⟨ξ|e^{iαN a†a}`, which for clocks with a
//! large number spread approaches the Schrödinger-evolved state
//! `e^{−iNφ a†a}|ξ⟩` with `t = φ/ω₁`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::fock::{self, evolve_number_phase, kick_average, Basis, DensityMatrix, ModeCutoff, SingleModeState};
use crate::par::Exec;
use crate::phase::dirichlet_squared;
use crate::universe::UniverseSpec;

/// Required kernel mass in `[0, Ω]` is `1 − KERNEL_MASS_TOL`.
pub const KERNEL_MASS_TOL: f64 = 1e-6;

/// Extra α-range added beyond the clock window by [`default_omega_range`].
pub const OMEGA_MARGIN: usize = 315; // ⌈50·2π⌉

/// `K + L + ⌈50·2π⌉`
pub fn default_omega_range(start: usize, width: usize) -> usize {
    start + width + OMEGA_MARGIN
}

/// State of the clock oscillator.
#[derive(Clone, Debug, PartialEq)]
pub struct ClockState {
    state: SingleModeState,
    window: Option<(usize, usize)>,
    number_variance: f64,
}

impl ClockState {
    /// Any normalized amplitude vector.
    pub fn from_state(state: SingleModeState) -> Self {
        let number_variance = clock_quality(&state);
        Self {
            state,
            window: None,
            number_variance,
        }
    }

    pub fn state(&self) -> &SingleModeState {
        &self.state
    }

    /// `(K, L)` for flat windows.
    pub fn window(&self) -> Option<(usize, usize)> {
        self.window
    }

    pub fn number_variance(&self) -> f64 {
        self.number_variance
    }
}

/// `c_n = L^{−1/2}` for `K ≤ n < K + L`, zero elsewhere.
pub fn flat_clock_state(start: usize, width: usize, cutoff: ModeCutoff) -> Result<ClockState> {
    if width == 0 {
        return Err(domain("clock window width L must be at least 1"));
    }
    if start + width > cutoff.dim() {
        return Err(domain(format!(
            "clock window [{start}, {}) exceeds cutoff {}",
            start + width,
            cutoff.dim()
        )));
    }
    let amp = C64::new((width as f64).sqrt().recip(), 0.0);
    let amps = Array1::from_shape_fn(cutoff.dim(), |n| {
        if (start..start + width).contains(&n) {
            amp
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let w = width as f64;
    Ok(ClockState {
        state: SingleModeState::normalized(amps)?,
        window: Some((start, width)),
        number_variance: (w * w - 1.0) / 12.0,
    })
}

/// Number variance `⟨N̂²⟩ − ⟨N̂⟩²`.
pub fn clock_quality(state: &SingleModeState) -> f64 {
    let mean = state.mean_number();
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, a)| (n as f64 - mean).powi(2) * a.norm_sqr())
        .sum()
}

/// `P(φ|α)` for `α = 0..=Ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalKernel {
    phi: f64,
    omega_range: usize,
    weights: Vec<f64>,
    norm: f64,
    mass: f64,
}

impl ConditionalKernel {
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn omega_range(&self) -> usize {
        self.omega_range
    }

    /// Normalized weights, `Σ_α = 1`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `p(φ)`: mean over α of the unnormalized kernel, with the phase POVM
    /// normalized to `dφ/2π`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Kernel mass captured by the α-range.
    ///
    /// The kernel is 2π-periodic in α, so its mass per period is fully
    /// sampled once the range spans a period; the captured fraction is
    /// `min(1, (Ω+1)/2π)` times the clock weight retained by its cutoff.
    pub fn mass(&self) -> f64 {
        self.mass
    }
}

/// Smallest `Ω` whose α-range spans one kernel period.
pub fn min_omega_range() -> usize {
    (2.0 * PI).ceil() as usize - 1
}

pub fn conditional_kernel(clock: &ClockState, omega_range: usize, phi: f64) -> Result<ConditionalKernel> {
    conditional_kernel_with(clock, omega_range, phi, Exec::default())
}

pub fn conditional_kernel_with(
    clock: &ClockState,
    omega_range: usize,
    phi: f64,
    exec: Exec,
) -> Result<ConditionalKernel> {
    let raw: Vec<f64> = match clock.window {
        Some((_, width)) => exec.map(omega_range + 1, |alpha| {
            dirichlet_squared(width, alpha as f64 - phi) / width as f64
        }),
        None => {
            let support: Vec<(usize, C64)> = clock
                .state
                .amplitudes()
                .iter()
                .copied()
                .enumerate()
                .filter(|(_, c)| c.norm_sqr() > 0.0)
                .collect();
            exec.map(omega_range + 1, |alpha| {
                let y = alpha as f64 - phi;
                support
                    .iter()
                    .map(|&(n, c)| c * C64::cis(-y * n as f64))
                    .sum::<C64>()
                    .norm_sqr()
            })
        }
    };
    let total: f64 = raw.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(domain(format!("clock reading φ = {phi} has zero probability")));
    }
    let weights = raw.iter().map(|u| u / total).collect();
    let coverage = ((omega_range + 1) as f64 / (2.0 * PI)).min(1.0);
    Ok(ConditionalKernel {
        phi,
        omega_range,
        weights,
        norm: total / (omega_range + 1) as f64,
        mass: (1.0 - clock.state.tail_bound()) * coverage,
    })
}

/// `ρ₂(φ) = Σ_α P(φ|α) e^{−iαN a†a}|ξ⟩⟨ξ|e^{iαN a†a}`.
pub fn conditional_system_state(
    clock: &ClockState,
    system: &SingleModeState,
    spec: UniverseSpec,
    omega_range: usize,
    phi: f64,
) -> Result<DensityMatrix> {
    conditional_system_state_with(clock, system, spec, omega_range, phi, Exec::default())
}

pub fn conditional_system_state_with(
    clock: &ClockState,
    system: &SingleModeState,
    spec: UniverseSpec,
    omega_range: usize,
    phi: f64,
    exec: Exec,
) -> Result<DensityMatrix> {
    let kernel = conditional_kernel_with(clock, omega_range, phi, exec)?;
    Ok(kernel_conditioned_state(&kernel, system, spec, exec))
}

/// The α-sum of the conditional state for an already evaluated kernel.
pub fn kernel_conditioned_state(
    kernel: &ConditionalKernel,
    system: &SingleModeState,
    spec: UniverseSpec,
    exec: Exec,
) -> DensityMatrix {
    kick_average(
        &DensityMatrix::from_pure(system),
        &kernel.weights,
        spec.ratio() as f64,
        exec,
    )
}

/// The `Ω → ∞` limit of [`conditional_system_state`].
///
/// Integer steps equidistribute modulo 2π, so the α-average of the kicks
/// becomes a circular average and the coherence at number difference `k`
/// is scaled by `e^{−iφNk} Σ_n c_n c̄_{n+Nk}`.
pub fn conditional_system_state_limit(
    clock: &ClockState,
    system: &SingleModeState,
    spec: UniverseSpec,
    phi: f64,
) -> DensityMatrix {
    let c = clock.state.amplitudes();
    let ratio = spec.ratio();
    let autocorr = |j: usize| -> C64 { (0..c.len().saturating_sub(j)).map(|n| c[n] * c[n + j].conj()).sum() };
    let d = system.dim();
    let chars: Vec<C64> = (0..d)
        .map(|k| C64::cis(-phi * (ratio * k) as f64) * autocorr(ratio * k))
        .collect();
    let xi = system.amplitudes();
    let mat = Array2::from_shape_fn((d, d), |(i, j)| {
        let base = xi[i] * xi[j].conj();
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => base,
            std::cmp::Ordering::Greater => base * chars[i - j],
            std::cmp::Ordering::Less => base * chars[j - i].conj(),
        }
    });
    DensityMatrix::from_raw(mat, Basis::Single(d))
}

/// `e^{−iNφ a†a}|ξ⟩⟨ξ|e^{iNφ a†a}`, Schrödinger evolution for `t = φ/ω₁`.
pub fn ideal_relational_state(system: &SingleModeState, spec: UniverseSpec, phi: f64) -> DensityMatrix {
    DensityMatrix::from_pure(&ideal_relational_ket(system, spec, phi))
}

fn ideal_relational_ket(system: &SingleModeState, spec: UniverseSpec, phi: f64) -> SingleModeState {
    evolve_number_phase(system, spec.ratio() as f64 * phi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticEntry {
    #[serde(rename = "L")]
    pub width: usize,
    pub fidelity: f64,
    #[serde(rename = "traceDistance")]
    pub trace_distance: f64,
    #[serde(rename = "kernelMass")]
    pub kernel_mass: f64,
}

/// Fidelity of the clock-conditioned state to the ideal one, per clock
/// width.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationalDiagnostics {
    pub phi: f64,
    #[serde(rename = "N")]
    pub ratio: usize,
    pub entries: Vec<DiagnosticEntry>,
}

/// Sweeps flat clocks `(start, L)` for each `L` in `widths` at a common
/// α-range `Ω`.
pub fn fidelity_vs_clock_width(
    system: &SingleModeState,
    spec: UniverseSpec,
    phi: f64,
    start: usize,
    widths: &[usize],
    omega_range: usize,
) -> Result<RelationalDiagnostics> {
    let widest = widths
        .iter()
        .copied()
        .max()
        .ok_or_else(|| domain("no clock widths given"))?;
    let cutoff = ModeCutoff::new(start + widest)?;
    let ideal = ideal_relational_state(system, spec, phi);
    let ideal_ket = ideal_relational_ket(system, spec, phi);
    let exec = Exec::default();
    let mut entries = Vec::with_capacity(widths.len());
    for &width in widths {
        let clock = flat_clock_state(start, width, cutoff)?;
        let kernel = conditional_kernel_with(&clock, omega_range, phi, exec)?;
        if kernel.mass < 1.0 - KERNEL_MASS_TOL {
            return Err(Error::KernelLeakage {
                mass: kernel.mass,
                omega_range,
                tolerance: KERNEL_MASS_TOL,
                required_omega_range: min_omega_range().max(default_omega_range(start, widest)),
            });
        }
        let rho = kernel_conditioned_state(&kernel, system, spec, exec);
        entries.push(DiagnosticEntry {
            width,
            fidelity: rho.expectation_pure(ideal_ket.amplitudes()).clamp(0.0, 1.0),
            trace_distance: fock::trace_distance(&rho, &ideal)?,
            kernel_mass: kernel.mass,
        });
    }
    Ok(RelationalDiagnostics {
        phi,
        ratio: spec.ratio(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::number_state;

    fn cut(d: usize) -> ModeCutoff {
        ModeCutoff::new(d).unwrap()
    }

    fn spec3() -> UniverseSpec {
        UniverseSpec::with_ratio(3).unwrap()
    }

    fn sample_system() -> SingleModeState {
        SingleModeState::normalized(Array1::from_shape_fn(6, |n| {
            C64::new(1.0 + 0.3 * n as f64, (0.7 * n as f64).sin())
        }))
        .unwrap()
    }

    #[test]
    fn flat_windows() {
        let c = flat_clock_state(0, 1, cut(4)).unwrap();
        assert_eq!(c.state().amplitudes()[0], C64::new(1.0, 0.0));
        assert_eq!(c.number_variance(), 0.0);
        assert_eq!(clock_quality(c.state()), 0.0);

        let c = flat_clock_state(5, 2, cut(8)).unwrap();
        assert!((c.state().amplitudes()[5].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((c.state().amplitudes()[6].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.number_variance(), 0.25);
        assert!((clock_quality(c.state()) - 0.25).abs() < 1e-12);

        let c = flat_clock_state(0, 13, cut(13)).unwrap();
        assert_eq!(c.number_variance(), 14.0);
        assert!((clock_quality(c.state()) - 14.0).abs() < 1e-12);

        assert!(flat_clock_state(3, 2, cut(4)).is_err());
        assert!(flat_clock_state(0, 0, cut(4)).is_err());
    }

    #[test]
    fn single_point_clock_has_uniform_kernel() {
        let c = flat_clock_state(0, 1, cut(1)).unwrap();
        for phi in [0.0, 0.7, 4.0] {
            let k = conditional_kernel(&c, 40, phi).unwrap();
            assert!(k.weights().iter().all(|w| (w - 1.0 / 41.0).abs() < 1e-15));
        }
    }

    #[test]
    fn kernel_peaks_at_integer_reading() {
        let c = flat_clock_state(3, 12, cut(15)).unwrap();
        let k = conditional_kernel(&c, 30, 9.0).unwrap();
        let w = k.weights();
        for alpha in 0..=30usize {
            // within one period on either side of α₀ = 9
            if alpha != 9 && (alpha as f64 - 9.0).abs() < 2.0 * PI {
                assert!(w[9] > w[alpha], "α = {alpha}");
            }
        }
    }

    #[test]
    fn flat_fast_path_matches_direct_sum() {
        let flat = flat_clock_state(4, 9, cut(16)).unwrap();
        let generic = ClockState::from_state(flat.state().clone());
        assert_eq!(generic.window(), None);
        assert!((generic.number_variance() - flat.number_variance()).abs() < 1e-12);
        for phi in [0.0, 0.7, 2.5] {
            let a = conditional_kernel(&flat, 50, phi).unwrap();
            let b = conditional_kernel(&generic, 50, phi).unwrap();
            for (x, y) in a.weights().iter().zip(b.weights()) {
                assert!((x - y).abs() < 1e-13);
            }
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn number_state_is_clock_independent() {
        let m = number_state(3, cut(6)).unwrap();
        let clock = flat_clock_state(2, 7, cut(10)).unwrap();
        for (omega, phi) in [(0usize, 0.0), (17, 0.7), (400, 3.0)] {
            let rho = conditional_system_state(&clock, &m, spec3(), omega, phi).unwrap();
            assert_eq!(rho.matrix(), DensityMatrix::from_pure(&m).matrix());
        }
    }

    #[test]
    fn populations_and_contraction() {
        let xi = sample_system();
        let clock = flat_clock_state(1, 5, cut(8)).unwrap();
        let rho = conditional_system_state(&clock, &xi, spec3(), 200, 1.3).unwrap();
        let a = xi.amplitudes();
        for i in 0..6 {
            assert_eq!(rho.matrix()[[i, i]].re, a[i].norm_sqr());
            assert_eq!(rho.matrix()[[i, i]].im, 0.0);
            for j in 0..6 {
                assert!(rho.matrix()[[i, j]].norm() <= a[i].norm() * a[j].norm() * (1.0 + 1e-12));
            }
        }
        assert!(rho.validate().is_ok());
    }

    #[test]
    fn uniform_kernel_gives_discrete_dephasing() {
        let xi = sample_system();
        let clock = flat_clock_state(0, 1, cut(1)).unwrap();
        let omega = 5000;
        let rho = conditional_system_state(&clock, &xi, spec3(), omega, 0.4).unwrap();
        let a = xi.amplitudes();
        for i in 0..6 {
            for j in 0..6 {
                if i == j {
                    continue;
                }
                let k = (i as f64 - j as f64) * 3.0;
                let bound = 2.0 / ((omega + 1) as f64 * (C64::new(1.0, 0.0) - C64::cis(-k)).norm());
                assert!(rho.matrix()[[i, j]].norm() <= a[i].norm() * a[j].norm() * bound * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn ideal_state_examples() {
        let xi = sample_system();
        let pure = DensityMatrix::from_pure(&xi);
        assert_eq!(ideal_relational_state(&xi, spec3(), 0.0).matrix(), pure.matrix());
        let wrapped = ideal_relational_state(&xi, spec3(), 2.0 * PI);
        assert!((wrapped.matrix() - pure.matrix()).iter().all(|z| z.norm() < 1e-13));
        let m = number_state(2, cut(4)).unwrap();
        let r = ideal_relational_state(&m, spec3(), 1.1);
        assert!((r.matrix() - DensityMatrix::from_pure(&m).matrix())
            .iter()
            .all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn limit_state_flat_window_is_fejer_scaled() {
        let xi = sample_system();
        let width = 20;
        let clock = flat_clock_state(5, width, cut(25)).unwrap();
        let rho = conditional_system_state_limit(&clock, &xi, spec3(), 0.9);
        let ideal = ideal_relational_state(&xi, spec3(), 0.9);
        for i in 0..6 {
            for j in 0..6 {
                let k = (i as i64 - j as i64).unsigned_abs() as usize * 3;
                let fejer = (1.0 - k as f64 / width as f64).max(0.0);
                let expect = ideal.matrix()[[i, j]] * fejer;
                assert!((rho.matrix()[[i, j]] - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn sweep_number_state_fidelity_one() {
        let m = number_state(3, cut(6)).unwrap();
        let d = fidelity_vs_clock_width(&m, spec3(), 0.7, 10, &[1, 5, 20], 100).unwrap();
        assert!(d.entries.iter().all(|e| (e.fidelity - 1.0).abs() < 1e-14));
        assert_eq!(d.entries[1].width, 5);
    }

    #[test]
    fn short_omega_range_is_leakage() {
        let m = number_state(3, cut(6)).unwrap();
        match fidelity_vs_clock_width(&m, spec3(), 0.7, 0, &[4], 3) {
            Err(Error::KernelLeakage {
                required_omega_range, ..
            }) => assert!(required_omega_range >= 6),
            other => panic!("expected leakage, got {other:?}"),
        }
        assert!(fidelity_vs_clock_width(&m, spec3(), 0.7, 0, &[4], min_omega_range()).is_ok());
        assert!(fidelity_vs_clock_width(&m, spec3(), 0.7, 0, &[], 10).is_err());
    }

    #[test]
    fn diagnostics_json_field_names() {
        let d = RelationalDiagnostics {
            phi: 0.5,
            ratio: 3,
            entries: vec![DiagnosticEntry {
                width: 4,
                fidelity: 0.9,
                trace_distance: 0.1,
                kernel_mass: 1.0,
            }],
        };
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["N"], 3);
        assert_eq!(v["entries"][0]["L"], 4);
        assert!(v["entries"][0].get("traceDistance").is_some());
        assert!(v["entries"][0].get("kernelMass").is_some());
    }
}
