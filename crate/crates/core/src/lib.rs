//! Exact enumeration and seeded Monte Carlo for quantum Monty Hall games.
//!
//! * [`qcore`] builds the PBR preparations, the entangled measurement basis,
//!   and their Born table in exact `ℚ(√2)` arithmetic.
//! * [`engine`] analyzes any finite Monty Hall game given as explicit
//!   conditional tables, and simulates it with reproducible seeds.
//! * [`games`] is the catalog: classic, ignorant, ψ-ontic, ψ-epistemic.
//! * [`teleport`] simulates teleportation and its Monty Hall variants.
//! * [`oracle`] recomputes the headline numbers by independent brute force.
//! * [`envelope`] is the machine-readable result format shared by the CLI
//!   and the HTTP service.

pub mod batch;
pub mod engine;
pub mod envelope;
pub mod games;
pub mod oracle;
pub mod qcore;
pub mod rational;
pub mod teleport;

pub use batch::Execution;
pub use envelope::OutputEnvelope;
pub use engine::{enumerate_joint, simulate, validate, GameAnalysis, GameSpec, SimulationReport, Strategy};
pub use rational::{ExactValue, Rational};
