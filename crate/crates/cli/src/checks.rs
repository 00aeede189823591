//! Named numerical checks with a tolerance and an observed value. `verify`
//! runs the oracle-equivalence set; the invariant set backs the property
//! criterion of the acceptance suite.

use std::f64::consts::TAU;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use relclock::clock::{
    conditional_system_state, conditional_system_state_limit, conditional_system_state_with, default_omega_range,
    flat_clock_state, ideal_relational_state, ClockState,
};
use relclock::decoherence::{evolve_exact, evolve_kernel_average, evolve_numeric, phase_sharpness, DecoherenceParams};
use relclock::fock::{
    fidelity, kick_average, partial_trace_clock, tensor, trace_distance, Basis, DensityMatrix, ModeCutoff,
    SingleModeState, TwoModeState,
};
use relclock::par::Exec;
use relclock::phase::{
    joint_phase_bruteforce, joint_phase_bruteforce_with, joint_phase_closed_form_grid, number_phase_commutator,
    PhaseGrid,
};
use relclock::universe::{
    coefficients_from_state, group_average_continuous, group_average_density, group_average_discrete, EnergyEigenstate,
    UniverseSpec, Weights,
};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub tolerance: f64,
    pub observed: f64,
    pub passed: bool,
}

impl CheckOutcome {
    /// Passes when `observed ≤ tolerance`; NaN fails.
    pub fn at_most(name: impl Into<String>, tolerance: f64, observed: f64) -> Self {
        Self {
            name: name.into(),
            tolerance,
            observed,
            passed: observed <= tolerance,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{}  {}  tolerance={:e}  observed={:e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.tolerance,
            self.observed
        )
    }
}

pub fn report(title: &str, outcomes: &[CheckOutcome]) -> String {
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let mut text = format!("{title}\n");
    for o in outcomes {
        text.push_str(&o.line());
        text.push('\n');
    }
    text.push_str(&format!("{} checks, {} failed\n", outcomes.len(), failed));
    text
}

fn cutoffs(d1: usize, d2: usize) -> (ModeCutoff, ModeCutoff) {
    (
        ModeCutoff::new(d1).expect("positive"),
        ModeCutoff::new(d2).expect("positive"),
    )
}

fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_ket(rng: &mut ChaCha8Rng, dim: usize) -> SingleModeState {
    SingleModeState::normalized(Array1::from_shape_fn(dim, |_| gaussian(rng))).expect("nonzero")
}

fn random_two_mode(rng: &mut ChaCha8Rng, d1: usize, d2: usize) -> TwoModeState {
    TwoModeState::normalized(Array2::from_shape_fn((d1, d2), |_| gaussian(rng))).expect("nonzero")
}

fn random_density(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> DensityMatrix {
    let g = Array2::from_shape_fn((dim, rank), |_| gaussian(rng));
    let gg = g.dot(&g.t().mapv(|z| z.conj()));
    let tr: f64 = gg.diag().iter().map(|z| z.re).sum();
    let m = gg.mapv(|z| z / tr);
    let m = (&m + &m.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
    DensityMatrix::new(m, Basis::Single(dim)).expect("valid by construction")
}

/// Largest sup-norm gap between brute-force and closed-form joint phase
/// distributions of `|M:N⟩` (equal weights) over `levels × ratios`. The
/// closed form is offset by `perturb`.
pub fn closed_form_gap(
    levels: impl Iterator<Item = usize> + Clone,
    ratios: &[usize],
    grid: usize,
    perturb: f64,
) -> f64 {
    let grid = PhaseGrid::new(grid).expect("positive grid");
    let mut worst = 0.0f64;
    for &ratio in ratios {
        let spec = UniverseSpec::with_ratio(ratio).expect("ratio ≥ 1");
        for level in levels.clone() {
            let e = EnergyEigenstate::new(level, spec, Weights::Equal).expect("valid level");
            let (d1, d2) = e.min_cutoffs();
            let brute = joint_phase_bruteforce(&e.to_two_mode(cutoffs(d1, d2)).expect("fits"), grid);
            let closed = joint_phase_closed_form_grid(level, ratio, grid)
                .expect("valid level")
                .perturbed(perturb);
            worst = worst.max(brute.sup_distance(&closed).expect("same grid"));
        }
    }
    worst
}

/// Oracle-equivalence checks run by `relclock verify`.
pub fn verify_checks(seed: u64, perturb_closed_form: f64) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    out.push(CheckOutcome::at_most(
        "joint phase: brute force vs closed form, M ≤ 45, N ∈ {1,2,3}, 128×128 grid (sup norm)",
        1e-10,
        closed_form_gap(0..=45, &[1, 2, 3], 128, perturb_closed_form),
    ));

    let fig = joint_phase_closed_form_grid(39, 3, PhaseGrid::new(256).expect("grid"))
        .expect("valid level")
        .perturbed(perturb_closed_form);
    out.push(CheckOutcome::at_most(
        "joint phase: peak of |39:3⟩ equals g = 14",
        1e-9,
        (fig.peak() - 14.0).abs(),
    ));
    out.push(CheckOutcome::at_most(
        "joint phase: grid mean of |39:3⟩ equals 1",
        1e-9,
        (fig.mean() - 1.0).abs(),
    ));

    let rho = random_density(&mut rng, 12, 12);
    let params = DecoherenceParams::new(10.0, 1.0)
        .and_then(|p| p.with_kick_angle(0.1))
        .expect("valid");
    let tail = 1e-12;
    let averaged = evolve_kernel_average(&rho, &params, tail).expect("valid tail");
    out.push(CheckOutcome::at_most(
        "decoherence: Poisson kernel average vs exact semigroup (elementwise)",
        2.0 * tail,
        max_abs_diff(averaged.matrix(), evolve_exact(&rho, &params).matrix()),
    ));

    let rho16 = random_density(&mut rng, 16, 16);
    let numeric = evolve_numeric(&rho16, &params, 0.005)
        .map(|r| max_abs_diff(r.matrix(), evolve_exact(&rho16, &params).matrix()));
    out.push(CheckOutcome::at_most(
        "decoherence: RK4 vs exact semigroup, dim 16, γ=10, θ=0.1, t=1 (elementwise)",
        1e-8,
        numeric.unwrap_or(f64::INFINITY),
    ));

    let spec3 = UniverseSpec::with_ratio(3).expect("ratio");
    let mut recon = 0.0f64;
    for _ in 0..10 {
        let psi = random_two_mode(&mut rng, 12, 4);
        let rebuilt = coefficients_from_state(&psi, spec3).and_then(|m| m.density(cutoffs(12, 4)));
        recon = recon.max(match rebuilt {
            Ok(r) => max_abs_diff(r.matrix(), group_average_continuous(&psi, spec3).matrix()),
            Err(_) => f64::INFINITY,
        });
    }
    out.push(CheckOutcome::at_most(
        "group average: energy coefficients rebuild the projection, cutoffs (12,4), N=3",
        1e-10,
        recon,
    ));

    let clock = random_ket(&mut rng, 8);
    let system = random_ket(&mut rng, 3);
    let projection = group_average_continuous(&tensor(&clock, &system), spec3);
    let omega = 1000;
    let discrete = group_average_discrete(&clock, &system, spec3, omega);
    out.push(CheckOutcome::at_most(
        "group average: discrete α-average (Ω=1000) vs continuous projection",
        5.0 / (omega + 1) as f64,
        max_abs_diff(discrete.matrix(), projection.matrix()),
    ));

    let xi = random_ket(&mut rng, 20);
    let window = flat_clock_state(200, 100, ModeCutoff::new(300).expect("cutoff")).expect("window");
    let omega_range = default_omega_range(200, 100);
    let finite = conditional_system_state(&window, &xi, spec3, omega_range, 0.7);
    let limit = conditional_system_state_limit(&window, &xi, spec3, 0.7);
    let ideal = ideal_relational_state(&xi, spec3, 0.7);
    let (gap, bound) = match finite {
        Ok(f) => {
            let a = xi.amplitudes();
            let bound: f64 = (f.matrix() - limit.matrix())
                .indexed_iter()
                .map(|((m, n), z)| a[m].norm() * a[n].norm() * z.norm())
                .sum();
            let gap = (fidelity(&f, &ideal).unwrap_or(f64::NAN) - fidelity(&limit, &ideal).unwrap_or(f64::NAN)).abs();
            (gap, bound)
        }
        Err(_) => (f64::INFINITY, 0.0),
    };
    out.push(CheckOutcome::at_most(
        "clock: finite-Ω conditional fidelity vs Ω→∞ limit, within the discretization bound",
        bound + 1e-12,
        gap,
    ));

    let commutator = number_phase_commutator(ModeCutoff::new(12).expect("cutoff")).expect("dim ≥ 3");
    let mut dev = 0.0f64;
    for ((i, j), z) in commutator.indexed_iter() {
        let want = if i == j { C64::new(0.0, 0.0) } else { C64::new(0.0, 1.0) };
        dev = dev.max((z - want).norm());
    }
    out.push(CheckOutcome::at_most(
        "phase operator: [Φ̂, N̂] = i off the diagonal, 0 on it",
        1e-12,
        dev,
    ));

    out
}

/// Randomized invariant checks, each over at least 50 instances.
pub fn invariant_checks(seed: u64) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    // fock
    let mut fvdg = 0.0f64;
    for i in 0..100 {
        let dim = 2 + i % 7;
        let rho = random_density(&mut rng, dim, 1 + i % dim);
        let sigma = random_density(&mut rng, dim, 1 + (i / 3) % dim);
        let f = fidelity(&rho, &sigma).unwrap_or(f64::NAN);
        let d = trace_distance(&rho, &sigma).unwrap_or(f64::NAN);
        fvdg = fvdg.max((1.0 - f.sqrt()) - d).max(d - (1.0 - f).sqrt());
        if f.is_nan() || d.is_nan() {
            fvdg = f64::INFINITY;
        }
    }
    out.push(CheckOutcome::at_most(
        "fock: 1 − √F ≤ D ≤ √(1 − F), 100 random pairs (max violation)",
        1e-9,
        fvdg.max(0.0),
    ));

    let mut ptrace = 0.0f64;
    for _ in 0..50 {
        let a = random_ket(&mut rng, 5);
        let b = random_ket(&mut rng, 4);
        let reduced = partial_trace_clock(&DensityMatrix::from_two_mode(&tensor(&a, &b))).expect("joint");
        ptrace = ptrace.max(max_abs_diff(reduced.matrix(), DensityMatrix::from_pure(&b).matrix()));
    }
    out.push(CheckOutcome::at_most(
        "fock: partial trace of a product state, 50 instances",
        1e-12,
        ptrace,
    ));

    let rho = random_density(&mut rng, 40, 40);
    let weights = vec![1.0 / 1001.0; 1001];
    let seq = kick_average(&rho, &weights, 0.37, Exec::Sequential);
    let par = kick_average(&rho, &weights, 0.37, Exec::Parallel);
    let psi = random_two_mode(&mut rng, 30, 12);
    let g96 = PhaseGrid::new(96).expect("grid");
    let same = seq.matrix() == par.matrix()
        && joint_phase_bruteforce_with(&psi, g96, Exec::Sequential).values()
            == joint_phase_bruteforce_with(&psi, g96, Exec::Parallel).values();
    out.push(CheckOutcome::at_most(
        "determinism: sequential and parallel results are bit-identical (1 = differ)",
        0.0,
        if same { 0.0 } else { 1.0 },
    ));

    // universe
    let spec3 = UniverseSpec::with_ratio(3).expect("ratio");
    let (mut recon, mut comm, mut idem) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let psi = random_two_mode(&mut rng, 12, 4);
        let projected = group_average_continuous(&psi, spec3);
        recon = recon.max(
            match coefficients_from_state(&psi, spec3).and_then(|m| m.density(cutoffs(12, 4))) {
                Ok(r) => max_abs_diff(r.matrix(), projected.matrix()),
                Err(_) => f64::INFINITY,
            },
        );
        for ((i, j), z) in projected.matrix().indexed_iter() {
            let de = spec3.energy_level(i / 4, i % 4) as f64 - spec3.energy_level(j / 4, j % 4) as f64;
            comm = comm.max((z * de).norm());
        }
        let twice = group_average_density(&projected, spec3).expect("joint");
        idem = idem.max(max_abs_diff(twice.matrix(), projected.matrix()));
    }
    out.push(CheckOutcome::at_most(
        "universe: coefficients rebuild the group average, 50 states",
        1e-10,
        recon,
    ));
    out.push(CheckOutcome::at_most(
        "universe: ‖[Ĥ, ρ_U]‖_max, 50 states",
        1e-12,
        comm,
    ));
    out.push(CheckOutcome::at_most(
        "universe: group average is idempotent, 50 states",
        0.0,
        idem,
    ));

    // phase
    let g40 = PhaseGrid::new(40).expect("grid");
    let (mut mean_dev, mut cov) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let psi = random_two_mode(&mut rng, 8, 5);
        let p = joint_phase_bruteforce(&psi, g40);
        mean_dev = mean_dev.max((p.mean() - 1.0).abs());
        let (a, b) = (i % 40, (7 * i) % 40);
        let shifted = psi.evolve_number_phases(TAU * a as f64 / 40.0, TAU * b as f64 / 40.0);
        let q = joint_phase_bruteforce(&shifted, g40);
        for x in 0..40 {
            for y in 0..40 {
                cov = cov.max((q.values()[[x, y]] - p.values()[[(x + 40 - a) % 40, (y + 40 - b) % 40]]).abs());
            }
        }
    }
    out.push(CheckOutcome::at_most(
        "phase: grid mean of the joint distribution is 1, 50 states",
        1e-12,
        mean_dev,
    ));
    out.push(CheckOutcome::at_most(
        "phase: covariance under number-phase shifts, 50 states",
        1e-12,
        cov,
    ));

    let g60 = PhaseGrid::new(60).expect("grid");
    let mut lines = 0.0f64;
    let mut stationary = 0.0f64;
    for i in 0..50 {
        let ratio = 1 + i % 3;
        let spec = UniverseSpec::with_ratio(ratio).expect("ratio");
        let level = 5 + i % 17;
        let g = level / ratio + 1;
        let c = random_ket(&mut rng, g).amplitudes().to_vec();
        let e = EnergyEigenstate::new(level, spec, Weights::Custom(c)).expect("normalized");
        let psi = e.to_two_mode(cutoffs(level + 1, g)).expect("fits");
        let p = joint_phase_bruteforce(&psi, g60);
        for a in 0..60 {
            for b in 0..60 {
                lines = lines.max((p.values()[[a, b]] - p.values()[[(a + 1) % 60, (b + ratio) % 60]]).abs());
            }
        }
        let t = rng.random_range(0.0..20.0);
        let moved = joint_phase_bruteforce(&psi.evolve_number_phases(spec.omega1() * t, spec.omega2() * t), g60);
        stationary = stationary.max(p.sup_distance(&moved).expect("same grid"));
    }
    out.push(CheckOutcome::at_most(
        "phase: ρ_N distribution constant along Nφ₁ − φ₂ = const, 50 eigenstates",
        1e-12,
        lines,
    ));
    out.push(CheckOutcome::at_most(
        "phase: ρ_N distribution invariant under e^{−iĤt}, 50 eigenstates",
        1e-12,
        stationary,
    ));

    // clock
    let (mut pops, mut contraction, mut period) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..50 {
        let spec = UniverseSpec::with_ratio(1 + i % 3).expect("ratio");
        let clock = ClockState::from_state(random_ket(&mut rng, 15));
        let xi = random_ket(&mut rng, 10);
        let phi = rng.random_range(0.0..TAU);
        let a = conditional_system_state_with(&clock, &xi, spec, 120, phi, Exec::default()).expect("valid");
        let b = conditional_system_state_with(&clock, &xi, spec, 120, phi + TAU, Exec::default()).expect("valid");
        period = period.max(max_abs_diff(a.matrix(), b.matrix()));
        let amps = xi.amplitudes();
        for ((m, n), z) in a.matrix().indexed_iter() {
            if m == n {
                pops = pops.max((z - C64::new(amps[m].norm_sqr(), 0.0)).norm());
            } else {
                contraction = contraction.max(z.norm() - amps[m].norm() * amps[n].norm());
            }
        }
    }
    out.push(CheckOutcome::at_most(
        "clock: conditioning leaves populations unchanged, 50 instances",
        1e-15,
        pops,
    ));
    out.push(CheckOutcome::at_most(
        "clock: |ρ_mn(φ)| ≤ |ξ_m ξ_n| (max excess), 50 instances",
        1e-12,
        contraction.max(0.0),
    ));
    out.push(CheckOutcome::at_most(
        "clock: ρ(φ) = ρ(φ + 2π), 50 instances",
        1e-12,
        period,
    ));

    let mut monotone = 0.0f64;
    for i in 0..50 {
        let spec = UniverseSpec::with_ratio(1 + i % 3).expect("ratio");
        let xi = random_ket(&mut rng, 12);
        let phi = rng.random_range(0.0..TAU);
        let ideal = ideal_relational_state(&xi, spec, phi);
        let mut prev = 0.0;
        for width in 1..=40 {
            let clock = flat_clock_state(3, width, ModeCutoff::new(43).expect("cutoff")).expect("window");
            let f = fidelity(&conditional_system_state_limit(&clock, &xi, spec, phi), &ideal).unwrap_or(f64::NAN);
            monotone = monotone.max(prev - f);
            if f.is_nan() {
                monotone = f64::INFINITY;
            }
            prev = f;
        }
    }
    out.push(CheckOutcome::at_most(
        "clock: Ω→∞ fidelity non-decreasing in window width L = 1..40 (max drop), 50 states",
        1e-12,
        monotone.max(0.0),
    ));

    // decoherence
    let mut unital = 0.0f64;
    for d in 1..=8 {
        let mixed = Array2::from_diag(&Array1::from_elem(d, C64::new(1.0 / d as f64, 0.0)));
        let rho = DensityMatrix::new(mixed.clone(), Basis::Single(d)).expect("valid");
        let p = DecoherenceParams::new(7.0, 1.3).expect("valid");
        unital = unital.max(max_abs_diff(evolve_exact(&rho, &p).matrix(), &mixed));
    }
    out.push(CheckOutcome::at_most("decoherence: I/d is a fixed point", 0.0, unital));

    let (mut semigroup, mut min_eig, mut kernel, mut sharp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..100 {
        let dim = 1 + i % 8;
        let rho = random_density(&mut rng, dim, 1 + i % dim);
        let gamma = rng.random_range(0.5..60.0);
        let theta = rng.random_range(0.01..3.0);
        let (t1, t2) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
        let p = |t: f64| {
            DecoherenceParams::new(gamma, t)
                .and_then(|p| p.with_kick_angle(theta))
                .expect("valid")
        };
        let joint = evolve_exact(&rho, &p(t1 + t2));
        let step = evolve_exact(&evolve_exact(&rho, &p(t1)), &p(t2));
        semigroup = semigroup.max(max_abs_diff(joint.matrix(), step.matrix()));
        let lowest = joint
            .eigenvalues()
            .map(|v| v.into_iter().fold(f64::INFINITY, f64::min))
            .unwrap_or(f64::NEG_INFINITY);
        min_eig = min_eig.max(-lowest);
        if i < 50 {
            let avg = evolve_kernel_average(&rho, &p(t1), 1e-12).expect("valid");
            kernel = kernel.max(max_abs_diff(avg.matrix(), evolve_exact(&rho, &p(t1)).matrix()));
        }
        sharp = sharp.max(phase_sharpness(&joint) - phase_sharpness(&evolve_exact(&rho, &p(t1))));
    }
    out.push(CheckOutcome::at_most(
        "decoherence: semigroup law, 100 instances",
        1e-12,
        semigroup,
    ));
    out.push(CheckOutcome::at_most(
        "decoherence: evolved states stay positive (−λ_min), 100 instances",
        1e-10,
        min_eig.max(0.0),
    ));
    out.push(CheckOutcome::at_most(
        "decoherence: Poisson kernel average vs exact, 50 instances",
        2e-12,
        kernel,
    ));
    out.push(CheckOutcome::at_most(
        "decoherence: phase sharpness non-increasing in t (max rise), 100 instances",
        1e-15,
        sharp.max(0.0),
    ));

    out
}
