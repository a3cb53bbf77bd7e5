//! Single-photon simulation of polarized Mach-Zehnder interferometer
//! networks, with the information measures and counterfactuality metrics
//! built on top of it.
//!
//! The crate is organized around five pieces:
//!
//! * [`circuit`] — polarized path circuits (beam splitters, polarization
//!   rotators, absorbers) and exact state/derivative evolution.
//! * [`builders`] — the devices of interest: a free-space rotator, nested
//!   MZIs with a tagging rotator in each of the five scenario positions, the
//!   post-selected communication variant, and the chained devices.
//! * [`info`] — classical Fisher information and Shannon mutual information
//!   of the outcome distributions, plus the closed forms and approximants
//!   for the inner-arm scenario.
//! * [`cfc`] — counterfactual-violation measures (Type 1 strength `D`, the
//!   spatially conditioned `D_A`, and the Type 2 probability `P_A`) and the
//!   chained-device parameter sweeps.
//! * [`protocol`] — the post-selected single-interferometer bit protocol:
//!   channel probabilities, decoding threshold, success probability, trial
//!   counts and the protocol-level violation strength.
//! * [`wavepacket`] — a 1D time-dependent Schrodinger toy model of the same
//!   interferometer, integrated with a staggered leapfrog.
//!
//! The command-line front end in `src/main.rs` exposes each piece as a
//! subcommand and writes deterministic CSV/JSON artifacts.

pub mod builders;
pub mod cfc;
pub mod circuit;
pub mod info;
pub mod math;
pub mod protocol;
pub mod wavepacket;

pub use builders::{chained_nmzi, cmzi, free_rotator, nmzi, nmzi_comm, ChainedNmziSpec, CmziSpec, Coefficients, NmziPosition};
pub use circuit::{Absorber, BeamSplitter, Circuit, CircuitError, Element, PolarizedState, Polarization, Rotator};
pub use cfc::{
    chained_detection_probs, fisher_free, sweep_chained_nmzi, sweep_cmzi, violation_type1, violation_type2,
    CfcError, SweepCell, SweepGrid, ViolationKind, ViolationReport,
};
pub use info::{
    fisher, fisher_closed_single_rotator, outcome_probs, shannon_closed_inner, shannon_mi, shannon_pade,
    shannon_taylor, InfoError, InfoMethod, InfoResult, OutcomeDistribution, OutcomeSet, PriorSpec, PriorVariable,
};
pub use protocol::{
    bit_probabilities, decode_threshold, fisher_bits, inverse_normal_cdf, min_trials, protocol_violation,
    success_probability, BitChannel, ProtocolError, ProtocolReport, TrialCount,
};
pub use wavepacket::{run_nmzi_scenario, ScenarioResult, WavepacketConfig, WavepacketError};

/// Version tag written into emitted artifacts.
pub const SCHEMA_VERSION: u32 = 1;
