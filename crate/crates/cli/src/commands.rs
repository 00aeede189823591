use std::fs;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use relclock::clock::fidelity_vs_clock_width;
use relclock::decoherence::{evolve_exact, evolve_expansion, evolve_kernel_average, DecoherenceParams};
use relclock::fock::{DensityMatrix, SingleModeState};
use relclock::phase::{joint_phase_closed_form_grid, joint_phase_mixture, ridge_check, PhaseGrid, Provenance};
use relclock::universe::{degeneracy, UniverseSpec, WeightFile};
use relclock::Error;
use serde_json::{json, Value};

use crate::config::{ConditionalConfig, DecohereConfig, JointPhaseConfig};
use crate::error::{CliError, CliResult};
use crate::output::{canonical_json, fmt_f64, sidecar_path, write_text, Csv};

/// Tail tolerance of the Poisson kernel behind the `abs_rho` column.
pub const DECOHERE_TAIL_TOL: f64 = 1e-12;

pub fn joint_phase(cfg: &JointPhaseConfig) -> CliResult<String> {
    let grid = PhaseGrid::new(cfg.grid).map_err(|e| CliError::field("--grid", e))?;
    let (dist, ratio, g) = match &cfg.weights {
        None => {
            let g = degeneracy(cfg.level as i64, cfg.ratio as i64).map_err(|e| CliError::field("--M", e))?;
            let dist =
                joint_phase_closed_form_grid(cfg.level, cfg.ratio, grid).map_err(|e| CliError::field("--M", e))?;
            (dist, cfg.ratio, Some(g))
        }
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let mix = WeightFile::from_json(&text)
                .and_then(|w| w.to_mixture())
                .map_err(|e| CliError::field("--weights", e))?;
            let ratio = mix.spec().ratio();
            (
                joint_phase_mixture(&mix, grid).map_err(|e| CliError::field("--weights", e))?,
                ratio,
                None,
            )
        }
    };
    let ridge = ridge_check(&dist, ratio).map_err(|e| CliError::field("--grid", e))?;

    let points = grid.points();
    let mut csv = Csv::new(&["phi1", "phi2", "P"]);
    for (a, p1) in points.iter().enumerate() {
        for (b, p2) in points.iter().enumerate() {
            csv.row(&[fmt_f64(*p1), fmt_f64(*p2), fmt_f64(dist.values()[[a, b]])]);
        }
    }
    write_text(&cfg.out, &csv.finish())?;

    let sidecar = json!({
        "config": cfg.to_json(),
        "degeneracy": g,
        "provenance": match dist.provenance() {
            Provenance::ClosedForm => "closed-form",
            Provenance::BruteForce => "brute-force",
        },
        "peak": dist.peak(),
        "min": dist.min(),
        "gridMean": dist.mean(),
        "ridge": {
            "maxDeviation": ridge.max_deviation,
            "gridSpacing": grid.spacing(),
            "flatRows": ridge.flat_rows,
            "allFlat": ridge.all_flat(),
        },
    });
    let side = sidecar_path(&cfg.out);
    write_text(&side, &canonical_json(&sidecar))?;
    Ok(format!(
        "wrote {} and {}: peak {}, grid mean {}, ridge max deviation {}{}",
        cfg.out.display(),
        side.display(),
        fmt_f64(dist.peak()),
        fmt_f64(dist.mean()),
        fmt_f64(ridge.max_deviation),
        if ridge.all_flat() { " (all rows flat)" } else { "" }
    ))
}

pub fn conditional(cfg: &ConditionalConfig) -> CliResult<String> {
    let spec = UniverseSpec::with_ratio(cfg.ratio).map_err(|e| CliError::field("--N", e))?;
    let xi = cfg.xi.build(cfg.dim, cfg.seed)?;
    let diag = fidelity_vs_clock_width(&xi, spec, cfg.phi, cfg.clock_start, &cfg.clock_widths, cfg.omega_range)
        .map_err(|e| match e {
            Error::KernelLeakage { .. } => CliError::field("--omega-range", e),
            other => CliError::field("--clock-width", other),
        })?;
    let mut value = serde_json::to_value(&diag).expect("diagnostics serialize");
    if let Value::Object(map) = &mut value {
        map.insert("config".into(), cfg.to_json());
    }
    write_text(&cfg.out, &canonical_json(&value))?;
    let fids: Vec<String> = diag
        .entries
        .iter()
        .map(|e| format!("L={}: F={:.6}", e.width, e.fidelity))
        .collect();
    Ok(format!("wrote {}: {}", cfg.out.display(), fids.join(", ")))
}

/// Uniform superposition over `0..dim`, whose `(k, 0)` coherences are all
/// nonzero.
fn uniform_state(dim: usize) -> CliResult<SingleModeState> {
    Ok(SingleModeState::normalized(Array1::from_elem(dim, C64::new(1.0, 0.0)))?)
}

pub fn decohere(cfg: &DecohereConfig) -> CliResult<String> {
    let dim = cfg.ks.iter().copied().max().unwrap_or(0) + 1;
    let rho0 = DensityMatrix::from_pure(&uniform_state(dim)?);
    let reference = |rho: &DensityMatrix, k: usize| rho.matrix()[[k, 0]].norm() / rho0.matrix()[[k, 0]].norm();
    let mut csv = Csv::new(&["t", "k", "abs_rho", "expansion_abs_rho", "exact_abs_rho"]);
    for &t in &cfg.times {
        let params = DecoherenceParams::new(cfg.gamma, t)
            .and_then(|p| p.with_kick_angle(cfg.theta))
            .map_err(|e| CliError::field("--t", e))?;
        let exact = evolve_exact(&rho0, &params);
        let expansion = evolve_expansion(&rho0, &params);
        let averaged = evolve_kernel_average(&rho0, &params, DECOHERE_TAIL_TOL)?;
        for &k in &cfg.ks {
            csv.row(&[
                fmt_f64(t),
                k.to_string(),
                fmt_f64(reference(&averaged, k)),
                fmt_f64(reference(&expansion, k)),
                fmt_f64(reference(&exact, k)),
            ]);
        }
    }
    write_text(&cfg.out, &csv.finish())?;
    let sidecar = json!({
        "config": cfg.to_json(),
        "state": "uniform superposition of number states 0..=max k",
        "columns": {
            "abs_rho": "|ρ_k0(t)| / |ρ_k0(0)|, Poisson kernel average",
            "expansion_abs_rho": "same ratio under the first-order expansion",
            "exact_abs_rho": "same ratio under the exact semigroup",
        },
        "tailTol": DECOHERE_TAIL_TOL,
    });
    let side = sidecar_path(&cfg.out);
    write_text(&side, &canonical_json(&sidecar))?;
    Ok(format!(
        "wrote {} and {}: {} rows",
        cfg.out.display(),
        side.display(),
        cfg.times.len() * cfg.ks.len()
    ))
}
