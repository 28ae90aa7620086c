//! Threat evaluation and weapon assignment (TEWA) engine for air-defense
//! command and control, plus the evaluation machinery used to judge it.
//!
//! The crate is organized along the decision pipeline:
//!
//! - [`fuzzy`] — a Mamdani inference engine (trapezoidal memberships,
//!   product conjunction, weighted-average defuzzification) with rule-grid
//!   interpolation from sparse anchor rules.
//! - [`threat`] — maps sensed target tracks and the operator conflict
//!   level onto the fuzzy engine and produces prioritized threat lists.
//! - [`wta`] — the weapon-allocation integer program with exact, greedy
//!   and genetic solvers.
//! - [`agents`] — a minimal BDI runtime hosting the surveillance-radar
//!   agent (jamming detection / ECCM) and the direction-center agent
//!   (prioritize / allocate), with per-tick plan-state traces.
//! - [`eval`] — propositional conflict checking over plan-state traces
//!   and Kolmogorov–Smirnov distribution fitting and ranking.

pub mod agents;
pub mod eval;
pub mod fuzzy;
pub mod threat;
pub mod wta;
