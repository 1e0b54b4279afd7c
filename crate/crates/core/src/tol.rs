//! Numerical tolerances shared across the crate.

/// Acceptance threshold for validating caller-supplied objects
/// (unitarity, channel completeness, entanglement, normalization).
pub const VALIDATION: f64 = 1e-10;

/// Threshold for equality assertions on computed amplitudes and matrices.
pub const EQUALITY: f64 = 1e-12;

/// A fidelity counts as a perfect copy or a passed test when it is at least
/// `1 - FIDELITY`.
pub const FIDELITY: f64 = 1e-9;

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 8;
