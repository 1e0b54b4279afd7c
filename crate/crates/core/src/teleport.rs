//! Teleportation of one qubit through a shared maximally entangled pair:
//! Bell measurement on `(C, A)`, a two-bit message, and Bob's correction on
//! `B`.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qstate::linalg::{matrix_list_serde, unitarity_defect, ONE};
use crate::qstate::{
    apply_unitary, canonical_state, fidelity, haar_random_unitary, measure_projective,
    outcome_probabilities, partial_trace, tensor, trace_distance, CMatrix, CanonicalState,
    DensityOperator, ProjectiveBasis, StateVector,
};
use crate::relativity::SpacetimeEvent;
use crate::tol::{FIDELITY, VALIDATION};

/// Alice's input qubit.
pub const INPUT: &str = "C";
/// Alice's half of the entangled pair.
pub const ALICE: &str = "A";
/// Bob's half of the entangled pair.
pub const BOB: &str = "B";

/// Bell-basis outcome, numbered in message order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BellOutcome {
    PhiPlus = 0,
    PhiMinus = 1,
    PsiPlus = 2,
    PsiMinus = 3,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] =
        [Self::PhiPlus, Self::PhiMinus, Self::PsiPlus, Self::PsiMinus];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// The Bell state on default labels `q0, q1`.
    pub fn state(self) -> StateVector {
        canonical_state(match self {
            Self::PhiPlus => CanonicalState::PhiPlus,
            Self::PhiMinus => CanonicalState::PhiMinus,
            Self::PsiPlus => CanonicalState::PsiPlus,
            Self::PsiMinus => CanonicalState::Singlet,
        })
    }
}

/// Bell-basis measurement on `(first, second)`, projectors in
/// [`BellOutcome`] order.
pub fn bell_basis(first: &str, second: &str) -> Result<ProjectiveBasis> {
    let states: Vec<StateVector> = BellOutcome::ALL.iter().map(|b| b.state()).collect();
    ProjectiveBasis::from_states(&[first, second], &states)
}

/// Largest trace distance between a single-qubit marginal of `state` and
/// `I/2`; zero for a maximally entangled pair.
pub fn entanglement_defect(state: &StateVector) -> Result<f64> {
    if state.num_qubits() != 2 {
        return Err(Error::LabelMismatch(format!(
            "pair state has {} qubits, expected 2",
            state.num_qubits()
        )));
    }
    let rho = state.to_density();
    let mut worst: f64 = 0.0;
    for l in state.labels() {
        let m = partial_trace(&rho, &[l])?;
        let mixed = DensityOperator::maximally_mixed(&[l.as_str()])?;
        worst = worst.max(trace_distance(&m, &mixed)?);
    }
    Ok(worst)
}

/// A shared pair on `(A, B)` with its outcome-indexed correction table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntangledResource {
    state: StateVector,
    #[serde(serialize_with = "matrix_list_serde::serialize")]
    corrections: Vec<CMatrix>,
}

impl EntangledResource {
    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn corrections(&self) -> &[CMatrix] {
        &self.corrections
    }

    pub fn correction(&self, outcome: BellOutcome) -> &CMatrix {
        &self.corrections[outcome.index()]
    }
}

/// Bob's conditional map for outcome `k`: with Alice's result `k`, an input
/// `φ` leaves `B` in `M_k φ` (unnormalized, up to the factor 2 restoring unit
/// norm for a maximally entangled pair).
fn conditional_map(pair: &StateVector, outcome: BellOutcome) -> CMatrix {
    let bell = outcome.state();
    let (beta, psi) = (bell.amplitudes(), pair.amplitudes());
    CMatrix::from_fn(2, 2, |b, c| {
        (0..2)
            .map(|a| beta[2 * c + a].conj() * psi[2 * a + b])
            .sum::<Complex64>()
            * 2.0
    })
}

/// Unitary factor of the polar decomposition.
fn unitary_part(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

fn certification_inputs() -> Vec<StateVector> {
    let i = Complex64::i();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut v: Vec<StateVector> = [
        CanonicalState::Up,
        CanonicalState::Down,
        CanonicalState::Plus,
        CanonicalState::Minus,
    ]
    .into_iter()
    .map(canonical_state)
    .collect();
    v.push(StateVector::new(&["q0"], vec![ONE * h, i * h]).expect("normalized"));
    v
}

/// Teleports `input` through outcome `k` using the generic state machinery
/// and applies `correction`; returns the output fidelity.
fn teleport_through(
    pair: &StateVector,
    outcome: BellOutcome,
    correction: &CMatrix,
    input: &StateVector,
) -> Result<Option<f64>> {
    let joint = tensor(&input.relabel(&[INPUT])?, pair)?;
    let bell = outcome.state().relabel(&[INPUT, ALICE])?;
    let Some((_, bob)) = joint.condition_on(&[INPUT, ALICE], &bell)? else {
        return Ok(None);
    };
    let out = apply_unitary(correction, &bob, &[BOB])?;
    Ok(Some(fidelity(&out, &input.relabel(&[BOB])?)?))
}

/// Finds, for each Bell outcome, the unitary that returns Bob's qubit to the
/// input state. `resource_state` is relabelled `(A, B)` positionally.
///
/// The table is self-certified: every entry is checked by simulating the
/// protocol on a fixed set of inputs.
pub fn derive_corrections(resource_state: &StateVector) -> Result<EntangledResource> {
    let distance = entanglement_defect(resource_state)?;
    if distance > VALIDATION {
        return Err(Error::NotMaximallyEntangled { distance });
    }
    let pair = resource_state.relabel(&[ALICE, BOB])?;
    let mut corrections = Vec::with_capacity(4);
    for outcome in BellOutcome::ALL {
        let m = conditional_map(&pair, outcome);
        let u = unitary_part(&m).adjoint();
        if unitarity_defect(&u) > VALIDATION {
            return Err(Error::invariant(format!(
                "correction for {outcome:?} is not unitary"
            )));
        }
        for input in certification_inputs() {
            let f = teleport_through(&pair, outcome, &u, &input)?
                .ok_or_else(|| Error::invariant(format!("{outcome:?} has zero probability")))?;
            if f < 1.0 - FIDELITY {
                return Err(Error::invariant(format!(
                    "correction for {outcome:?} reaches fidelity {f} on {input}"
                )));
            }
        }
        corrections.push(u);
    }
    Ok(EntangledResource {
        state: pair,
        corrections,
    })
}

/// `(I ⊗ V)|Φ⁺⟩` on `(A, B)` for Haar-random `V`.
pub fn random_maximally_entangled<R: Rng + ?Sized>(rng: &mut R) -> StateVector {
    let v = haar_random_unitary(2, rng);
    let phi = canonical_state(CanonicalState::PhiPlus)
        .relabel(&[ALICE, BOB])
        .expect("two labels");
    apply_unitary(&v, &phi, &[BOB]).expect("Haar unitary acts on one qubit")
}

/// Alice's two-bit message.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalMessage {
    bits: u8,
    emitted_at: Option<SpacetimeEvent>,
}

impl ClassicalMessage {
    pub fn new(bits: u8) -> Result<Self> {
        if bits > 3 {
            return Err(Error::validation(format!(
                "message {bits} does not fit in two bits"
            )));
        }
        Ok(Self {
            bits,
            emitted_at: None,
        })
    }

    pub fn with_emission(mut self, event: SpacetimeEvent) -> Self {
        self.emitted_at = Some(event);
        self
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn outcome(&self) -> BellOutcome {
        BellOutcome::from_index(self.bits as usize).expect("validated on construction")
    }

    pub fn emitted_at(&self) -> Option<&SpacetimeEvent> {
        self.emitted_at.as_ref()
    }
}

impl fmt::Display for ClassicalMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02b}", self.bits)
    }
}

impl Serialize for ClassicalMessage {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            bits: u8,
            binary: String,
            outcome: BellOutcome,
            emitted_at: Option<&'a SpacetimeEvent>,
        }
        Raw {
            bits: self.bits,
            binary: self.to_string(),
            outcome: self.outcome(),
            emitted_at: self.emitted_at.as_ref(),
        }
        .serialize(s)
    }
}

fn joint_register(joint: &StateVector) -> Result<StateVector> {
    let want = [INPUT, ALICE, BOB];
    if joint.num_qubits() != 3 || want.iter().any(|l| !joint.labels().iter().any(|x| x == l)) {
        return Err(Error::LabelMismatch(format!(
            "expected register (C, A, B), got {:?}",
            joint.labels()
        )));
    }
    joint.permuted(&want)
}

fn measure_bell<R: Rng + ?Sized>(
    joint: &StateVector,
    rng: &mut R,
) -> Result<(ClassicalMessage, f64, StateVector)> {
    let joint = joint_register(joint)?;
    let record = measure_projective(&joint, &bell_basis(INPUT, ALICE)?, rng)?;
    let msg = ClassicalMessage::new(record.outcome_index as u8)?;
    Ok((msg, record.probability, record.post_state))
}

/// Bell measurement of `(C, A)` on a `(C, A, B)` register. Returns the
/// message and the post-measurement state (register order `C, A, B`).
pub fn bell_measurement<R: Rng + ?Sized>(
    joint: &StateVector,
    rng: &mut R,
) -> Result<(ClassicalMessage, StateVector)> {
    let (msg, _, post) = measure_bell(joint, rng)?;
    Ok((msg, post))
}

/// Everything that happened in one teleportation run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TeleportTranscript {
    pub input_state: StateVector,
    pub resource: EntangledResource,
    pub message: ClassicalMessage,
    pub outcome_probability: f64,
    /// Full `(C, A, B)` state right after Alice's measurement.
    pub post_measurement: StateVector,
    pub pre_correction_b: StateVector,
    pub output_b: StateVector,
    pub output_fidelity: f64,
}

/// Runs the protocol once: prepare `C ⊗ (A, B)`, Bell-measure `(C, A)`,
/// send the outcome, correct `B`.
pub fn run_teleportation<R: Rng + ?Sized>(
    input: &StateVector,
    resource: &EntangledResource,
    rng: &mut R,
) -> Result<TeleportTranscript> {
    if input.num_qubits() != 1 {
        return Err(Error::LabelMismatch(format!(
            "teleportation input has {} qubits, expected 1",
            input.num_qubits()
        )));
    }
    let input_state = input.relabel(&[INPUT])?;
    let joint = tensor(&input_state, &resource.state)?;
    let (message, outcome_probability, post) = measure_bell(&joint, rng)?;

    let bell = message.outcome().state().relabel(&[INPUT, ALICE])?;
    let (_, pre_correction_b) = post
        .condition_on(&[INPUT, ALICE], &bell)?
        .ok_or_else(|| Error::invariant("measured outcome has no support"))?;
    let output_b = apply_unitary(
        resource.correction(message.outcome()),
        &pre_correction_b,
        &[BOB],
    )?;
    let output_fidelity = fidelity(&output_b, &input_state.relabel(&[BOB])?)?;
    if output_fidelity < 1.0 - FIDELITY {
        return Err(Error::invariant(format!(
            "teleportation output fidelity {output_fidelity}"
        )));
    }
    Ok(TeleportTranscript {
        input_state,
        resource: resource.clone(),
        message,
        outcome_probability,
        post_measurement: post,
        pre_correction_b,
        output_b,
        output_fidelity,
    })
}

/// Exact probabilities of the four messages.
pub fn outcome_distribution(input: &StateVector, resource: &EntangledResource) -> Result<[f64; 4]> {
    if input.num_qubits() != 1 {
        return Err(Error::LabelMismatch(format!(
            "teleportation input has {} qubits, expected 1",
            input.num_qubits()
        )));
    }
    let joint = tensor(&input.relabel(&[INPUT])?, &resource.state)?;
    let p = outcome_probabilities(&joint, &bell_basis(INPUT, ALICE)?)?;
    Ok([p[0], p[1], p[2], p[3]])
}

/// Probability that `target` passes the test "is it in `reference`?".
pub fn verification_measurement(
    state: &StateVector,
    target: &str,
    reference: &StateVector,
) -> Result<f64> {
    let basis = ProjectiveBasis::binary_test(target, reference)?;
    Ok(outcome_probabilities(state, &basis)?[0].clamp(0.0, 1.0))
}
