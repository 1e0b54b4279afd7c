//! Dense state-vector and density-operator kernels for registers of up to
//! eight labelled qubits.
//!
//! Registers are big-endian: the first label is the most significant bit of
//! the amplitude index, so `|a_X, 0_Y, 0_M⟩` reads left to right. Spin up is
//! `|0⟩` and spin down is `|1⟩`.

mod density;
pub mod linalg;
mod measure;
mod state;

pub(crate) use density::permute_operator;
pub use density::{partial_trace, trace_distance, DensityOperator};
pub use linalg::{haar_random_unitary, is_unitary, unitarity_defect, CMatrix, CVector};
pub use measure::{measure_projective, outcome_probabilities, MeasurementRecord, ProjectiveBasis};
pub use state::{
    apply_unitary, canonical_state, fidelity, haar_random_state, tensor, CanonicalState,
    StateVector,
};

use crate::error::{Error, Result};
use crate::tol::MAX_QUBITS;

pub(crate) fn owned_labels(labels: &[&str]) -> Vec<String> {
    labels.iter().map(|s| s.to_string()).collect()
}

pub(crate) fn check_labels(labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::degenerate("register has no subsystems"));
    }
    if labels.len() > MAX_QUBITS {
        return Err(Error::validation(format!(
            "register of {} qubits exceeds the {MAX_QUBITS}-qubit cap",
            labels.len()
        )));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::LabelCollision(l.clone()));
        }
    }
    Ok(())
}

/// Positions of `wanted` inside `labels`, in the order requested.
pub(crate) fn positions<S: AsRef<str>>(labels: &[String], wanted: &[S]) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(wanted.len());
    for w in wanted {
        let w = w.as_ref();
        let p = labels
            .iter()
            .position(|l| l == w)
            .ok_or_else(|| Error::UnknownLabel(w.to_string()))?;
        if out.contains(&p) {
            return Err(Error::LabelCollision(w.to_string()));
        }
        out.push(p);
    }
    Ok(out)
}

/// Same labels, possibly in a different order.
pub(crate) fn same_label_set(a: &[String], b: &[String]) -> bool {
    a.len() == b.len() && a.iter().all(|l| b.contains(l))
}

#[inline]
fn shift(n: usize, pos: usize) -> usize {
    n - 1 - pos
}

/// Extracts the bits of `index` at the given qubit positions into a
/// sub-register index (first position most significant).
#[inline]
pub(crate) fn gather(index: usize, n: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .fold(0, |acc, &p| (acc << 1) | ((index >> shift(n, p)) & 1))
}

/// Inverse of [`gather`]: places the bits of `sub` at the given positions.
#[inline]
pub(crate) fn scatter(sub: usize, n: usize, positions: &[usize]) -> usize {
    let k = positions.len();
    positions.iter().enumerate().fold(0, |acc, (t, &p)| {
        acc | (((sub >> (k - 1 - t)) & 1) << shift(n, p))
    })
}

/// `index` with the bits at `positions` cleared.
#[inline]
pub(crate) fn clear(index: usize, n: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .fold(index, |acc, &p| acc & !(1 << shift(n, p)))
}
