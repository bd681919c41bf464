//! Desk-scale simulation of chiral state conversion in a two-mode
//! non-Hermitian oscillator.
//!
//! Two nearly degenerate mechanical modes with balanced gain and loss reduce
//! to a traceless 2x2 non-Hermitian Hamiltonian over the `(Γ, θ)` parameter
//! plane, carrying a pair of exceptional points. Driving `θ(t)` and `Γ(t)`
//! slowly around (or near) an EP and integrating the coupled-mode equation
//! reproduces the direction-dependent final state: clockwise loops relax to
//! the loss-side eigenstate of the starting frame, counterclockwise loops to
//! the gain side, independent of the initial state.
//!
//! Module map:
//! - [`model`] — Hamiltonian, eigensystem, branch tracking, EPs, PT phases;
//! - [`schedule`] — parameter loops `θ(t)`, `Γ(t)` and branch-cut crossings;
//! - [`dynamics`] — envelope and full-mechanics RK4 integration,
//!   demodulation, envelope-reduction cross-check;
//! - [`analysis`] — NAT detection, delay times, chirality classification,
//!   Riemann-sheet trajectories, parameter sweeps.

pub mod analysis;
pub mod dynamics;
pub mod model;
pub mod schedule;

pub use analysis::{
    chirality_matrix, classify_final, detect_nats, expected_final, riemann_trajectory, run_loop,
    sweep_delay, AnalysisError, ChiralityMatrix, ChiralityReport, ChiralityVerdict, NatEvent,
    SweepAxis, SweepResult,
};
pub use dynamics::{
    demodulate, initial_state, integrate_envelope, integrate_full, project_coefficients,
    verify_envelope_reduction, DynamicsError, EnvelopeState, IntegratorOptions, MechState, Method,
    ReductionReport, Trajectory,
};
pub use model::{
    build_hamiltonian, classify_phase, effective_frequencies, eigenframe, eigenvalues,
    ep_locations, surface_grid, EffectiveFrequencies, EigenFrame, ModelError, PhaseClass,
    StateLabel, SurfaceGrid, SystemParams,
};
pub use schedule::{
    cut_crossings, gamma_at, sample_path, theta_at, CutCrossing, Direction, LoopSpec,
    ScheduleError,
};
