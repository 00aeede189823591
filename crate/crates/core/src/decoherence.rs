//! Intrinsic decoherence from an imperfect clock.
//!
//! Choosing a Poisson kernel `P(t|α) = (γt)^α e^{−γt}/α!` for the number of
//! clock steps turns the conditional dynamics into the unital semigroup
//!
//! ```text
//! dρ/dt = γ (e^{−iθ a†a} ρ e^{iθ a†a} − ρ),   θ = 1/γ by default,
//! ```
//!
//! whose number-basis solution is `ρ_nm(t) = exp(γt(e^{−ikθ} − 1)) ρ_nm(0)`
//! with `k = n − m`. Expanding to first order in `1/γ` gives
//! `dρ/dt = −i[N̂, ρ] − (1/2γ)[N̂, [N̂, ρ]]`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{domain, Error, Result};
use crate::fock::{kick_average, DensityMatrix};
use crate::par::Exec;
use crate::phase::{phase_density, PhaseGrid};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoherenceParams {
    gamma: f64,
    kick_angle: f64,
    time: f64,
}

impl DecoherenceParams {
    /// Kick angle `θ = 1/γ`.
    pub fn new(gamma: f64, time: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(domain(format!("gamma must be positive and finite, got {gamma}")));
        }
        if !time.is_finite() || time < 0.0 {
            return Err(domain(format!("time must be nonnegative and finite, got {time}")));
        }
        Ok(Self {
            gamma,
            kick_angle: gamma.recip(),
            time,
        })
    }

    pub fn with_kick_angle(mut self, theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(domain("kick angle must be finite"));
        }
        self.kick_angle = theta;
        Ok(self)
    }

    pub fn with_time(self, time: f64) -> Result<Self> {
        Self::new(self.gamma, time)?.with_kick_angle(self.kick_angle)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kick_angle(&self) -> f64 {
        self.kick_angle
    }

    pub fn time(&self) -> f64 {
        self.time
    }
}

/// Poisson weights `P(t|α)` for `α = 0..=α_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonKernel {
    gamma_t: f64,
    weights: Vec<f64>,
    tail: f64,
}

impl PoissonKernel {
    pub fn gamma_t(&self) -> f64 {
        self.gamma_t
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alpha_max(&self) -> usize {
        self.weights.len() - 1
    }

    /// Upper bound on the omitted weight `Σ_{α > α_max} P(t|α)`.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().enumerate().map(|(a, w)| a as f64 * w).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.weights
            .iter()
            .enumerate()
            .map(|(a, w)| (a as f64 - mean).powi(2) * w)
            .sum()
    }
}

/// Truncates the Poisson distribution of mean `γt` where the omitted tail
/// drops below `tail_tol`.
pub fn poisson_kernel(gamma: f64, time: f64, tail_tol: f64) -> Result<PoissonKernel> {
    if !gamma.is_finite() || !time.is_finite() || gamma < 0.0 || time < 0.0 {
        return Err(domain("gamma and t must be nonnegative and finite"));
    }
    if !(tail_tol > 0.0 && tail_tol <= 1e-6) {
        return Err(domain(format!("tail tolerance must lie in (0, 1e-6], got {tail_tol}")));
    }
    let lambda = gamma * time;
    if lambda == 0.0 {
        return Ok(PoissonKernel {
            gamma_t: 0.0,
            weights: vec![1.0],
            tail: 0.0,
        });
    }
    let ln_lambda = lambda.ln();
    let mut weights = Vec::new();
    let mut log_w = -lambda;
    let mut alpha = 0usize;
    loop {
        let w = log_w.exp();
        weights.push(w);
        // For α + 2 > λ the tail beyond α is dominated by a geometric series
        // with ratio λ/(α + 2).
        let next = (log_w + ln_lambda - ((alpha + 1) as f64).ln()).exp();
        let ratio = lambda / (alpha + 2) as f64;
        if ratio < 1.0 {
            let tail = next / (1.0 - ratio);
            if tail < tail_tol {
                return Ok(PoissonKernel {
                    gamma_t: lambda,
                    weights,
                    tail,
                });
            }
        }
        log_w += ln_lambda - ((alpha + 1) as f64).ln();
        alpha += 1;
    }
}

/// Exact modulus decay rate of the coherence at number difference `k`,
/// `γ(1 − cos kθ)`.
pub fn coherence_decay_rate(k: i64, params: &DecoherenceParams) -> f64 {
    let half = k as f64 * params.kick_angle / 2.0;
    2.0 * params.gamma * half.sin().powi(2)
}

/// Multiplier `exp(γt(e^{−ikθ} − 1))` of coherence `k` under the exact
/// semigroup.
pub fn exact_factor(k: i64, params: &DecoherenceParams) -> C64 {
    if k == 0 {
        return C64::new(1.0, 0.0);
    }
    let gt = params.gamma * params.time;
    let angle = k as f64 * params.kick_angle;
    let re = -gt * 2.0 * (angle / 2.0).sin().powi(2);
    let im = -gt * angle.sin();
    C64::new(re, im).exp()
}

/// Multiplier of coherence `k` under the first-order expansion,
/// `exp(−iγθkt − γθ²k²t/2)`; for `θ = 1/γ` this is
/// `exp(−ikt − k²t/(2γ))`.
pub fn expansion_factor(k: i64, params: &DecoherenceParams) -> C64 {
    if k == 0 {
        return C64::new(1.0, 0.0);
    }
    let (g, th, t) = (params.gamma, params.kick_angle, params.time);
    let kf = k as f64;
    C64::new(-g * th * th * kf * kf * t / 2.0, -g * th * kf * t).exp()
}

fn scale_coherences(rho: &DensityMatrix, factor: impl Fn(i64) -> C64 + Sync, exec: Exec) -> DensityMatrix {
    let d = rho.dim();
    let factors: Vec<C64> = (0..d as i64).map(&factor).collect();
    let m = rho.matrix();
    let rows = exec.map(d, |i| {
        (0..d)
            .map(|j| {
                if i == j {
                    m[[i, j]]
                } else if i > j {
                    m[[i, j]] * factors[i - j]
                } else {
                    m[[i, j]] * factors[j - i].conj()
                }
            })
            .collect::<Vec<C64>>()
    });
    let mat = Array2::from_shape_vec((d, d), rows.concat()).expect("square");
    DensityMatrix::from_raw(mat, rho.basis())
}

/// Closed-form solution of the semigroup master equation.
pub fn evolve_exact(rho: &DensityMatrix, params: &DecoherenceParams) -> DensityMatrix {
    evolve_exact_with(rho, params, Exec::default())
}

pub fn evolve_exact_with(rho: &DensityMatrix, params: &DecoherenceParams, exec: Exec) -> DensityMatrix {
    scale_coherences(rho, |k| exact_factor(k, params), exec)
}

/// Closed-form solution of the first-order expansion.
pub fn evolve_expansion(rho: &DensityMatrix, params: &DecoherenceParams) -> DensityMatrix {
    scale_coherences(rho, |k| expansion_factor(k, params), Exec::default())
}

/// Average of kicked states over the Poisson distribution of step counts,
/// `Σ_α P(t|α) e^{−iαθN̂} ρ e^{iαθN̂}`.
pub fn evolve_kernel_average(rho: &DensityMatrix, params: &DecoherenceParams, tail_tol: f64) -> Result<DensityMatrix> {
    let kernel = poisson_kernel(params.gamma, params.time, tail_tol)?;
    Ok(kick_average(rho, kernel.weights(), params.kick_angle, Exec::default()))
}

/// Largest accepted global error estimate for [`evolve_numeric`].
pub const NUMERIC_ERROR_LIMIT: f64 = 1e-6;

/// Classic RK4 on `L(ρ) = γ(UρU† − ρ)` with `U = e^{−iθN̂}` applied as dense
/// matrix products. The step is `t / ⌈t/dt⌉`.
///
/// The error estimate compares one step with two half steps from `ρ₀`
/// (local error `≈ 16/15 · |y_h − y_{h/2}|`) and multiplies by the step
/// count.
pub fn evolve_numeric(rho: &DensityMatrix, params: &DecoherenceParams, dt: f64) -> Result<DensityMatrix> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(domain(format!("dt must be positive, got {dt}")));
    }
    let d = rho.dim();
    let u = Array2::from_diag(&ndarray::Array1::from_shape_fn(d, |n| {
        C64::cis(-params.kick_angle * n as f64)
    }));
    let u_dag = u.t().mapv(|z| z.conj());
    let gamma = params.gamma;
    let generator = |r: &Array2<C64>| -> Array2<C64> { (u.dot(r).dot(&u_dag) - r) * C64::new(gamma, 0.0) };
    let rk4 = |r: &Array2<C64>, h: f64| -> Array2<C64> {
        let hc = C64::new(h, 0.0);
        let k1 = generator(r);
        let k2 = generator(&(r + &(&k1 * (hc * 0.5))));
        let k3 = generator(&(r + &(&k2 * (hc * 0.5))));
        let k4 = generator(&(r + &(&k3 * hc)));
        r + &((k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * (hc / 6.0))
    };

    if params.time == 0.0 {
        return Ok(rho.clone());
    }
    let steps = (params.time / dt).ceil().max(1.0) as usize;
    let h = params.time / steps as f64;

    let r0 = rho.matrix();
    let full = rk4(r0, h);
    let halves = rk4(&rk4(r0, h / 2.0), h / 2.0);
    let local = (&full - &halves).iter().map(|z| z.norm()).fold(0.0, f64::max) * 16.0 / 15.0;
    let estimate = local * steps as f64;
    if estimate > NUMERIC_ERROR_LIMIT {
        // local error scales as h⁵, global as h⁴
        let suggested_dt = h * (NUMERIC_ERROR_LIMIT / estimate).powf(0.25) * 0.9;
        return Err(Error::StepTooLarge {
            estimate,
            limit: NUMERIC_ERROR_LIMIT,
            suggested_dt,
        });
    }

    let mut r = full;
    for _ in 1..steps {
        r = rk4(&r, h);
    }
    Ok(DensityMatrix::from_raw(r, rho.basis()))
}

/// `Σ_{n≠m} |ρ_nm|`, an upper bound on `max_φ |P(φ) − 1|` for the phase
/// distribution of `ρ`.
pub fn phase_sharpness(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let d = rho.dim();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += m[[i, j]].norm();
            }
        }
    }
    s
}

/// `max_φ |P(φ) − 1|` over a phase grid.
pub fn phase_flatness_deviation(rho: &DensityMatrix, grid: PhaseGrid) -> f64 {
    phase_density(rho, grid)
        .into_iter()
        .map(|p| (p - 1.0).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{number_state, Basis, ModeCutoff, SingleModeState};

    fn params(gamma: f64, t: f64) -> DecoherenceParams {
        DecoherenceParams::new(gamma, t).unwrap()
    }

    fn sample(d: usize) -> DensityMatrix {
        let psi = SingleModeState::normalized(ndarray::Array1::from_shape_fn(d, |n| {
            C64::new(1.0 / (1.0 + n as f64), 0.3 * (n as f64).cos())
        }))
        .unwrap();
        DensityMatrix::from_pure(&psi)
    }

    #[test]
    fn params_validation() {
        assert!(DecoherenceParams::new(0.0, 1.0).is_err());
        assert!(DecoherenceParams::new(1.0, -1.0).is_err());
        let p = params(100.0, 1.0);
        assert_eq!(p.kick_angle(), 0.01);
        assert_eq!(p.with_kick_angle(0.5).unwrap().kick_angle(), 0.5);
        assert_eq!(p.with_time(2.0).unwrap().time(), 2.0);
    }

    #[test]
    fn poisson_examples() {
        let k = poisson_kernel(3.0, 0.0, 1e-12).unwrap();
        assert_eq!(k.weights(), &[1.0]);

        let k = poisson_kernel(2.0, 1.5, 1e-12).unwrap();
        assert!((k.weights()[0] - (-3.0f64).exp()).abs() < 1e-16);

        let k = poisson_kernel(7.5, 1.0, 1e-12).unwrap();
        assert!((k.mean() - 7.5).abs() < 1e-9);
        assert!((k.variance() - 7.5).abs() < 1e-9);
        assert!(k.tail() < 1e-12);
        let total: f64 = k.weights().iter().sum();
        assert!((1.0 - total).abs() <= k.tail() + 1e-15);

        assert!(poisson_kernel(1.0, 1.0, 1e-3).is_err());
        assert!(poisson_kernel(-1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn poisson_large_mean_does_not_underflow() {
        let k = poisson_kernel(1000.0, 1.0, 1e-12).unwrap();
        assert!((k.mean() - 1000.0).abs() < 1e-9 * 1001.0);
    }

    #[test]
    fn exact_examples() {
        let rho = sample(5);
        let out = evolve_exact(&rho, &params(3.0, 0.8));
        for n in 0..5 {
            assert_eq!(out.matrix()[[n, n]], rho.matrix()[[n, n]]);
        }

        let f = exact_factor(1, &params(100.0, 1.0)).norm();
        let oracle = (100.0 * (0.01f64.cos() - 1.0)).exp();
        assert!((f - oracle).abs() < 1e-14);
        assert!((f - 0.995012).abs() < 1e-6);

        // γ → ∞ with θ = 1/γ: pure rotation e^{−ikt}
        for k in 1..4 {
            let f = exact_factor(k, &params(1e7, 1.0));
            assert!((f - C64::cis(-(k as f64))).norm() < 1e-5);
        }
    }

    #[test]
    fn expansion_examples() {
        let f = expansion_factor(2, &params(10.0, 1.0));
        assert!((f.norm() - (-0.2f64).exp()).abs() < 1e-15);
        let rho = sample(4);
        let out = evolve_expansion(&rho, &params(10.0, 1.0));
        for n in 0..4 {
            assert_eq!(out.matrix()[[n, n]], rho.matrix()[[n, n]]);
        }
    }

    #[test]
    fn decay_rate_examples() {
        let p = params(100.0, 1.0);
        assert_eq!(coherence_decay_rate(0, &p), 0.0);
        let r = coherence_decay_rate(1, &p);
        // 1 − cos(0.01) loses about four digits to cancellation
        assert!((r - 100.0 * (1.0 - 0.01f64.cos())).abs() < 1e-13);
        assert!((r - 4.99996e-3).abs() < 1e-8);
        let big = params(1e6, 1.0);
        let ratio = coherence_decay_rate(6, &big) / coherence_decay_rate(3, &big);
        assert!((ratio - 4.0).abs() < 1e-9);
        // |factor| = e^{−rate·t}
        let q = params(4.0, 0.7).with_kick_angle(0.3).unwrap();
        assert!((exact_factor(3, &q).norm() - (-coherence_decay_rate(3, &q) * 0.7).exp()).abs() < 1e-15);
    }

    #[test]
    fn numeric_one_step_keeps_diagonal_state() {
        let diag = DensityMatrix::single(Array2::from_diag(&ndarray::array![
            C64::new(0.5, 0.0),
            C64::new(0.3, 0.0),
            C64::new(0.2, 0.0)
        ]))
        .unwrap();
        let p = params(10.0, 0.01);
        let out = evolve_numeric(&diag, &p, 0.01).unwrap();
        assert!((out.matrix() - diag.matrix()).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn numeric_rejects_large_steps() {
        let p = params(10.0, 1.0).with_kick_angle(0.1).unwrap();
        match evolve_numeric(&sample(8), &p, 0.5) {
            Err(Error::StepTooLarge { suggested_dt, .. }) => assert!(suggested_dt < 0.5),
            other => panic!("expected step error, got {other:?}"),
        }
        assert!(evolve_numeric(&sample(3), &p, 0.0).is_err());
    }

    #[test]
    fn sharpness_examples() {
        let n = DensityMatrix::from_pure(&number_state(2, ModeCutoff::new(5).unwrap()).unwrap());
        assert_eq!(phase_sharpness(&n), 0.0);

        let rho = sample(6);
        let grid = PhaseGrid::new(64).unwrap();
        assert!(phase_flatness_deviation(&rho, grid) <= phase_sharpness(&rho) + 1e-12);

        let p = params(5.0, 0.0).with_kick_angle(0.4).unwrap();
        let mut last = phase_sharpness(&rho);
        for step in 1..20 {
            let out = evolve_exact(&rho, &p.with_time(0.1 * step as f64).unwrap());
            let s = phase_sharpness(&out);
            assert!(s <= last + 1e-15);
            last = s;
        }
        assert_eq!(rho.basis(), Basis::Single(6));
    }

    #[test]
    fn unitary_limit_keeps_sharpness() {
        let rho = sample(6);
        let base = phase_sharpness(&rho);
        for t in [0.3, 1.0, 4.0] {
            // the pure-rotation part of the expansion: θ = 1/γ, γ → ∞
            let out = evolve_expansion(&rho, &params(1e300, t));
            assert!((phase_sharpness(&out) - base).abs() < 1e-12);
        }
    }
}
