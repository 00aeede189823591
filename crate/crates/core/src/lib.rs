//! Relational time in a universe of two harmonic oscillators.
//!
//! Oscillator 1 is the clock and oscillator 2 the system; the total
//! Hamiltonian is `ω₁(a₁†a₁ + N a₂†a₂)` with integer frequency ratio `N`.
//! The crate covers:
//!
//! * [`fock`]: truncated Fock-space states, density matrices and metrics;
//! * [`universe`]: degenerate total-energy eigenstates `|M:N⟩`, energy
//!   mixtures and group averages;
//! * [`phase`]: the Susskind–Glogower phase POVM, joint phase distributions
//!   and the phase operator;
//! * [`clock`]: flat-window clock states, the conditional kernel and the
//!   clock-conditioned state of the system;
//! * [`decoherence`]: the Poisson-clock unital semigroup, its first-order
//!   expansion and an RK4 cross-check.
//!
//! Grid evaluations and kernel sums run on rayon when the `parallel` feature
//! is enabled (the default). Every reduction is merged in a fixed order, so
//! results are bit-identical with or without the feature and for any worker
//! count.

pub mod clock;
pub mod decoherence;
mod error;
pub mod fock;
mod linalg;
pub mod par;
pub mod phase;
pub mod universe;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
