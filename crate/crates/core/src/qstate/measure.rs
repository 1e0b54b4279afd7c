use rand::Rng;
use serde::Serialize;

use super::linalg::{hermiticity_defect, max_abs_diff, outer, CMatrix};
use super::state::apply_operator;
use super::{check_labels, owned_labels, positions, StateVector};
use crate::error::{Error, Result};
use crate::tol::{EQUALITY, VALIDATION};

/// A complete set of orthogonal projectors on a target sub-register.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveBasis {
    targets: Vec<String>,
    projectors: Vec<CMatrix>,
}

impl ProjectiveBasis {
    /// Checks that every projector is Hermitian and idempotent, that they are
    /// mutually orthogonal and that they resolve the identity.
    pub fn new(targets: &[&str], projectors: Vec<CMatrix>) -> Result<Self> {
        let targets = owned_labels(targets);
        check_labels(&targets)?;
        if projectors.is_empty() {
            return Err(Error::validation("projective basis has no projectors"));
        }
        let d = 1usize << targets.len();
        let mut sum = CMatrix::zeros(d, d);
        for (i, p) in projectors.iter().enumerate() {
            if p.shape() != (d, d) {
                return Err(Error::validation(format!(
                    "projector {i} is {:?}, expected {d}x{d}",
                    p.shape()
                )));
            }
            if hermiticity_defect(p) > EQUALITY {
                return Err(Error::validation(format!("projector {i} is not Hermitian")));
            }
            if max_abs_diff(&(p * p), p) > EQUALITY {
                return Err(Error::validation(format!(
                    "projector {i} is not idempotent"
                )));
            }
            for (j, q) in projectors[..i].iter().enumerate() {
                if (p * q).iter().any(|z| z.norm() > EQUALITY) {
                    return Err(Error::validation(format!(
                        "projectors {j} and {i} are not orthogonal"
                    )));
                }
            }
            sum += p;
        }
        if max_abs_diff(&sum, &CMatrix::identity(d, d)) > EQUALITY {
            return Err(Error::validation("projectors do not sum to the identity"));
        }
        Ok(Self {
            targets,
            projectors,
        })
    }

    /// Rank-one projectors onto the given orthonormal states.
    pub fn from_states(targets: &[&str], states: &[StateVector]) -> Result<Self> {
        let projectors = states
            .iter()
            .map(|s| outer(s.amplitudes(), s.amplitudes()))
            .collect();
        Self::new(targets, projectors)
    }

    /// `{|0⟩⟨0|, |1⟩⟨1|}` on each listed qubit jointly.
    pub fn computational(targets: &[&str]) -> Result<Self> {
        let d = 1usize << targets.len();
        let projectors = (0..d)
            .map(|k| {
                let mut p = CMatrix::zeros(d, d);
                p[(k, k)] = super::linalg::ONE;
                p
            })
            .collect();
        Self::new(targets, projectors)
    }

    /// Pass/fail test `{|ref⟩⟨ref|, I − |ref⟩⟨ref|}`; outcome 0 is "pass".
    pub fn binary_test(target: &str, reference: &StateVector) -> Result<Self> {
        let d = reference.dim();
        let pass = outer(reference.amplitudes(), reference.amplitudes());
        let fail = CMatrix::identity(d, d) - &pass;
        let targets: Vec<&str> = if reference.num_qubits() == 1 {
            vec![target]
        } else {
            return Err(Error::LabelMismatch(format!(
                "single-qubit test given a {}-qubit reference",
                reference.num_qubits()
            )));
        };
        Self::new(&targets, vec![pass, fail])
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }
}

/// Outcome of a projective measurement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub outcome_index: usize,
    pub probability: f64,
    pub post_state: StateVector,
}

fn projected_branches(state: &StateVector, basis: &ProjectiveBasis) -> Result<Vec<super::CVector>> {
    let tpos = positions(state.labels(), &basis.targets)?;
    Ok(basis
        .projectors
        .iter()
        .map(|p| apply_operator(p, state.amplitudes(), state.num_qubits(), &tpos))
        .collect())
}

fn born(branches: &[super::CVector]) -> Result<Vec<f64>> {
    let probs: Vec<f64> = branches.iter().map(|b| b.norm_squared()).collect();
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > VALIDATION {
        return Err(Error::invariant(format!(
            "Born probabilities sum to {total}"
        )));
    }
    Ok(probs)
}

/// Exact Born probabilities of every outcome.
pub fn outcome_probabilities(state: &StateVector, basis: &ProjectiveBasis) -> Result<Vec<f64>> {
    born(&projected_branches(state, basis)?)
}

/// Samples an outcome with Born probabilities and returns the renormalized
/// projected state. Deterministic for a given generator state.
pub fn measure_projective<R: Rng + ?Sized>(
    state: &StateVector,
    basis: &ProjectiveBasis,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let branches = projected_branches(state, basis)?;
    let probs = born(&branches)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = None;
    for (k, &p) in probs.iter().enumerate() {
        if p <= 1e-24 {
            continue;
        }
        chosen = Some(k);
        acc += p;
        if u < acc {
            break;
        }
    }
    let k = chosen.ok_or_else(|| Error::invariant("every outcome has zero probability"))?;
    let post_state = StateVector::normalized(state.labels().to_vec(), branches[k].clone())?;
    Ok(MeasurementRecord {
        outcome_index: k,
        probability: probs[k],
        post_state,
    })
}
