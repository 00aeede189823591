use ndarray::Array1;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use relclock::fock::{number_state, ModeCutoff, SingleModeState};

use crate::error::{CliError, CliResult};

/// Complex Gaussian amplitudes from `ChaCha8Rng::seed_from_u64(seed)`,
/// normalized. Real and imaginary parts are drawn alternately, `n = 0`
/// first.
pub fn random_state(seed: u64, dim: usize) -> CliResult<SingleModeState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = Array1::from_shape_fn(dim, |_| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    Ok(SingleModeState::normalized(amps)?)
}

/// Coherent state `|α⟩` with real `α`, truncated to `dim` levels and
/// renormalized.
pub fn coherent_state(alpha: f64, dim: usize) -> CliResult<SingleModeState> {
    let mut amps = Array1::<C64>::zeros(dim);
    let mut term = (-alpha * alpha / 2.0).exp();
    for (n, a) in amps.iter_mut().enumerate() {
        if n > 0 {
            term *= alpha / (n as f64).sqrt();
        }
        *a = C64::new(term, 0.0);
    }
    Ok(SingleModeState::normalized(amps)?)
}

/// System state selector: `random`, `number:<m>` or `coherent:<alpha>`.
#[derive(Clone, Debug, PartialEq)]
pub enum XiSpec {
    Random,
    Number(usize),
    Coherent(f64),
}

impl XiSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        let bad = || {
            CliError::field(
                "--xi",
                format!("expected random, number:<m> or coherent:<alpha>, got {text:?}"),
            )
        };
        match text.split_once(':') {
            None if text == "random" => Ok(XiSpec::Random),
            Some(("number", m)) => m.trim().parse().map(XiSpec::Number).map_err(|_| bad()),
            Some(("coherent", a)) => match a.trim().parse::<f64>() {
                Ok(a) if a.is_finite() => Ok(XiSpec::Coherent(a)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            XiSpec::Random => "random".into(),
            XiSpec::Number(m) => format!("number:{m}"),
            XiSpec::Coherent(a) => format!("coherent:{a}"),
        }
    }

    pub fn build(&self, dim: usize, seed: u64) -> CliResult<SingleModeState> {
        let cutoff = ModeCutoff::new(dim).map_err(|e| CliError::field("--dim", e))?;
        match *self {
            XiSpec::Random => random_state(seed, dim),
            XiSpec::Number(m) => number_state(m, cutoff).map_err(|e| CliError::field("--xi", e)),
            XiSpec::Coherent(a) => coherent_state(a, dim),
        }
    }
}
