//! Truncated Fock-space states and the exact linear algebra shared by the
//! rest of the crate.
//!
//! Joint (two-mode) operators use the row-major index `n * dim2 + m` for the
//! basis ket `|n⟩₁ ⊗ |m⟩₂`.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg;
use crate::par::Exec;

/// Normalization tolerance on construction.
pub const NORM_TOL: f64 = 1e-12;
/// Hermiticity tolerance on construction.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest admissible eigenvalue of a density matrix.
pub const EIGEN_TOL: f64 = 1e-10;
/// Largest symmetrization correction accepted before eigenvalue metrics.
pub const REPAIR_TOL: f64 = 1e-10;

/// Number of retained number states `0..dim` of one mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeCutoff(usize);

impl ModeCutoff {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(domain("mode cutoff must be at least 1"));
        }
        Ok(Self(dim))
    }

    pub fn dim(self) -> usize {
        self.0
    }
}

/// A pure state of one oscillator, `amps[n] = ⟨n|ψ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleModeState {
    amps: Array1<C64>,
}

impl SingleModeState {
    /// Wraps an amplitude vector that is already normalized to [`NORM_TOL`].
    pub fn new(amps: Array1<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(domain("state must have at least one amplitude"));
        }
        let norm_sqr = norm_sqr(amps.iter());
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(amps: Array1<C64>) -> Result<Self> {
        let norm_sqr = norm_sqr(amps.iter());
        if amps.is_empty() || !norm_sqr.is_finite() || norm_sqr <= 0.0 {
            return Err(domain("cannot normalize a zero or non-finite vector"));
        }
        let scale = norm_sqr.sqrt().recip();
        Ok(Self {
            amps: amps.mapv(|a| a * scale),
        })
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn cutoff(&self) -> ModeCutoff {
        ModeCutoff(self.amps.len())
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Weight missing from the retained amplitudes, `max(0, 1 − Σ|amps|²)`.
    pub fn tail_bound(&self) -> f64 {
        (1.0 - norm_sqr(self.amps.iter())).max(0.0)
    }

    /// `⟨N̂⟩`
    pub fn mean_number(&self) -> f64 {
        self.amps.iter().enumerate().map(|(n, a)| n as f64 * a.norm_sqr()).sum()
    }

    /// Same state embedded in (or cut down to) another cutoff. Truncation
    /// only succeeds if the dropped amplitudes are exactly zero.
    pub fn with_cutoff(&self, cutoff: ModeCutoff) -> Result<Self> {
        let dim = cutoff.dim();
        if self.amps.iter().skip(dim).any(|a| *a != C64::new(0.0, 0.0)) {
            return Err(domain(format!("state has support beyond the requested cutoff {dim}")));
        }
        let amps = Array1::from_shape_fn(dim, |n| self.amps.get(n).copied().unwrap_or_default());
        Ok(Self { amps })
    }
}

/// A pure state of both oscillators, `amps[(n, m)] = α_{n,m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState {
    amps: Array2<C64>,
}

impl TwoModeState {
    pub fn new(amps: Array2<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(domain("state must have at least one amplitude"));
        }
        let norm_sqr = norm_sqr(amps.iter());
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amps })
    }

    pub fn normalized(amps: Array2<C64>) -> Result<Self> {
        let norm_sqr = norm_sqr(amps.iter());
        if amps.is_empty() || !norm_sqr.is_finite() || norm_sqr <= 0.0 {
            return Err(domain("cannot normalize a zero or non-finite vector"));
        }
        let scale = norm_sqr.sqrt().recip();
        Ok(Self {
            amps: amps.mapv(|a| a * scale),
        })
    }

    pub fn amplitudes(&self) -> &Array2<C64> {
        &self.amps
    }

    pub fn dims(&self) -> (usize, usize) {
        self.amps.dim()
    }

    pub fn cutoffs(&self) -> (ModeCutoff, ModeCutoff) {
        let (d1, d2) = self.dims();
        (ModeCutoff(d1), ModeCutoff(d2))
    }

    /// Flattened ket in the joint basis.
    pub fn to_vector(&self) -> Array1<C64> {
        Array1::from_iter(self.amps.iter().copied())
    }

    /// Applies `e^{−iθ₁a₁†a₁} ⊗ e^{−iθ₂a₂†a₂}`.
    pub fn evolve_number_phases(&self, angle1: f64, angle2: f64) -> Self {
        let amps = Array2::from_shape_fn(self.amps.dim(), |(n, m)| {
            self.amps[[n, m]] * C64::cis(-(angle1 * n as f64 + angle2 * m as f64))
        });
        Self { amps }
    }
}

/// Which number basis a density matrix lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Single(usize),
    /// Joint basis of (clock, system) with the given cutoffs.
    Joint(usize, usize),
}

impl Basis {
    pub fn dim(self) -> usize {
        match self {
            Basis::Single(d) => d,
            Basis::Joint(d1, d2) => d1 * d2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: Array2<C64>,
    basis: Basis,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(mat: Array2<C64>, basis: Basis) -> Result<Self> {
        let rho = Self::checked_shape(mat, basis)?;
        let deviation = linalg::anti_hermitian_norm(&rho.mat);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        rho.validate()?;
        Ok(rho)
    }

    /// Single-mode density matrix.
    pub fn single(mat: Array2<C64>) -> Result<Self> {
        let d = mat.nrows();
        Self::new(mat, Basis::Single(d))
    }

    fn checked_shape(mat: Array2<C64>, basis: Basis) -> Result<Self> {
        let (r, c) = mat.dim();
        if r != c || r != basis.dim() || r == 0 {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", basis.dim()),
                found: format!("{r}x{c}"),
            });
        }
        Ok(Self { mat, basis })
    }

    /// Wraps a matrix produced by a trusted construction.
    pub(crate) fn from_raw(mat: Array2<C64>, basis: Basis) -> Self {
        debug_assert_eq!(mat.nrows(), basis.dim());
        Self { mat, basis }
    }

    pub fn from_pure(state: &SingleModeState) -> Self {
        Self::from_raw(outer(state.amplitudes()), Basis::Single(state.dim()))
    }

    pub fn from_two_mode(state: &TwoModeState) -> Self {
        let (d1, d2) = state.dims();
        Self::from_raw(outer(&state.to_vector()), Basis::Joint(d1, d2))
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    pub fn diagonal(&self) -> Array1<f64> {
        self.mat.diag().mapv(|z| z.re)
    }

    /// `tr ρ²`
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// The symmetrized matrix `(ρ + ρ†)/2`; fails if the correction is
    /// larger than [`REPAIR_TOL`].
    pub fn hermitian_part(&self) -> Result<Array2<C64>> {
        let deviation = linalg::anti_hermitian_norm(&self.mat);
        if deviation > REPAIR_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(linalg::hermitian_part(&self.mat))
    }

    /// Ascending eigenvalues of the symmetrized matrix.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut ev = linalg::eigvalsh(&self.hermitian_part()?);
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// Post-evolution validity check: repairable Hermiticity, trace within
    /// [`TRACE_TOL`], eigenvalues at least `−EIGEN_TOL`.
    pub fn validate(&self) -> Result<()> {
        let trace = self.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace: trace.re });
        }
        let min_eigenvalue = self.eigenvalues()?[0];
        if min_eigenvalue < -EIGEN_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(())
    }

    /// If the matrix is a rank-one projector `|v⟩⟨v|`, returns `v` (up to a
    /// global phase).
    pub fn pure_vector(&self) -> Option<Array1<C64>> {
        if (self.purity() - 1.0).abs() > 1e-10 {
            return None;
        }
        let diag = self.diagonal();
        let (j, pjj) = diag.iter().copied().enumerate().max_by(|a, b| a.1.total_cmp(&b.1))?;
        if pjj <= 0.0 {
            return None;
        }
        let scale = pjj.sqrt().recip();
        Some(self.mat.column(j).mapv(|z| z * scale))
    }

    /// `⟨v|ρ|v⟩`
    pub fn expectation_pure(&self, v: &Array1<C64>) -> f64 {
        v.mapv(|z| z.conj()).dot(&self.mat.dot(v)).re
    }
}

fn norm_sqr<'a>(it: impl Iterator<Item = &'a C64>) -> f64 {
    it.map(|z| z.norm_sqr()).sum()
}

pub(crate) fn outer(v: &Array1<C64>) -> Array2<C64> {
    let n = v.len();
    Array2::from_shape_fn((n, n), |(i, j)| v[i] * v[j].conj())
}

/// The number state `|n⟩` on a cutoff.
pub fn number_state(n: usize, cutoff: ModeCutoff) -> Result<SingleModeState> {
    let dim = cutoff.dim();
    if n >= dim {
        return Err(domain(format!("number state |{n}⟩ outside cutoff {dim}")));
    }
    let mut amps = Array1::zeros(dim);
    amps[n] = C64::new(1.0, 0.0);
    Ok(SingleModeState { amps })
}

/// `|a⟩ ⊗ |b⟩`
pub fn tensor(a: &SingleModeState, b: &SingleModeState) -> TwoModeState {
    let (x, y) = (a.amplitudes(), b.amplitudes());
    TwoModeState {
        amps: Array2::from_shape_fn((x.len(), y.len()), |(n, m)| x[n] * y[m]),
    }
}

/// `e^{−iθ a†a} |ψ⟩`
pub fn evolve_number_phase(state: &SingleModeState, angle: f64) -> SingleModeState {
    let amps = Array1::from_shape_fn(state.dim(), |n| state.amps[n] * C64::cis(-angle * n as f64));
    SingleModeState { amps }
}

/// Plain partial trace over the clock (mode 1) of a joint density matrix.
pub fn partial_trace_clock(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let Basis::Joint(d1, d2) = rho.basis() else {
        return Err(Error::DimensionMismatch {
            expected: "joint two-mode basis".into(),
            found: "single-mode basis".into(),
        });
    };
    let m = rho.matrix();
    let reduced = Array2::from_shape_fn((d2, d2), |(a, b)| {
        (0..d1).map(|n| m[[n * d2 + a, n * d2 + b]]).sum::<C64>()
    });
    Ok(DensityMatrix::from_raw(reduced, Basis::Single(d2)))
}

fn check_same_shape(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", rho.dim()),
            found: format!("{0}x{0}", sigma.dim()),
        });
    }
    Ok(())
}

fn checked_psd(rho: &DensityMatrix) -> Result<Array2<C64>> {
    let h = rho.hermitian_part()?;
    let min_eigenvalue = linalg::eigvalsh(&h).into_iter().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -EIGEN_TOL {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    Ok(h)
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))² = ‖√ρ √σ‖₁²`. If either argument is pure this
/// reduces to `⟨v|ρ|v⟩`, which is evaluated directly.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_shape(rho, sigma)?;
    let r = checked_psd(rho)?;
    let s = checked_psd(sigma)?;
    let f = if let Some(v) = sigma.pure_vector() {
        rho.expectation_pure(&v)
    } else if let Some(v) = rho.pure_vector() {
        sigma.expectation_pure(&v)
    } else {
        let root = linalg::trace_norm(&linalg::psd_sqrt(&r).dot(&linalg::psd_sqrt(&s)));
        root * root
    };
    Ok(f.clamp(0.0, 1.0))
}

/// `½ Σ |λᵢ(ρ − σ)|`
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_shape(rho, sigma)?;
    let diff = rho.matrix() - sigma.matrix();
    let deviation = linalg::anti_hermitian_norm(&diff);
    if deviation > 2.0 * REPAIR_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let d: f64 = linalg::eigvalsh(&linalg::hermitian_part(&diff))
        .iter()
        .map(|l| l.abs())
        .sum();
    Ok((0.5 * d).clamp(0.0, 1.0))
}

/// Average of number-diagonal kicks,
/// `Σ_α w_α e^{−iαθ a†a} ρ e^{iαθ a†a}` for `α = 0..weights.len()`.
///
/// Element `(n, m)` is multiplied by `Σ_α w_α e^{−iαθ(n−m)}`. The weights are
/// taken to be normalized: populations are passed through unchanged.
pub fn kick_average(rho: &DensityMatrix, weights: &[f64], angle: f64, exec: Exec) -> DensityMatrix {
    let d = rho.dim();
    let chars = kick_characters(weights, angle, d, exec);
    let m = rho.matrix();
    let mat = Array2::from_shape_fn((d, d), |(i, j)| {
        if i == j {
            m[[i, j]]
        } else if i > j {
            m[[i, j]] * chars[i - j]
        } else {
            m[[i, j]] * chars[j - i].conj()
        }
    });
    DensityMatrix::from_raw(mat, rho.basis())
}

/// `χ(k) = Σ_α w_α e^{−iαkθ}` for `k = 0..kmax`, accumulated in fixed
/// chunks of α.
pub(crate) fn kick_characters(weights: &[f64], angle: f64, kmax: usize, exec: Exec) -> Vec<C64> {
    exec.chunked_sum(
        weights.len(),
        vec![C64::new(0.0, 0.0); kmax],
        |alpha, acc| {
            let w = weights[alpha];
            if w == 0.0 {
                return;
            }
            for (k, slot) in acc.iter_mut().enumerate() {
                *slot += w * C64::cis(-((alpha * k) as f64) * angle);
            }
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        },
    )
}
