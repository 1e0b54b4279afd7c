//! Completely positive trace-preserving maps in Kraus form, cloning
//! candidates, and the no-signalling gap.

mod cloning;

pub use cloning::{
    basis_copier, clone_fidelity, falsify_cloning_dichotomy, linearity_witness, CloneCandidate,
    Counterexample, FalsificationSummary, LinearityReport, TrialKind, COPY, DICHOTOMY_MARGIN,
    SYSTEM,
};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qstate::linalg::{max_abs_diff, pauli_x, pauli_y, pauli_z};
use crate::qstate::{check_labels, owned_labels, positions};
use crate::qstate::{
    haar_random_unitary, partial_trace, permute_operator, trace_distance, CMatrix, DensityOperator,
    ProjectiveBasis, StateVector,
};
use crate::tol::VALIDATION;

/// A CPTP map `ρ ↦ Σ K ρ K†` from `input_labels` to `output_labels`.
///
/// Each Kraus operator is a `2^|out| × 2^|in|` matrix. When the channel is
/// applied to a larger register, the untouched subsystems keep their order
/// and the output subsystems are appended after them, unless input and
/// output labels coincide, in which case the register order is preserved.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    name: String,
    input_labels: Vec<String>,
    output_labels: Vec<String>,
    kraus_ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(input: &[&str], output: &[&str], kraus_ops: Vec<CMatrix>) -> Result<Self> {
        let input_labels = owned_labels(input);
        let output_labels = owned_labels(output);
        check_labels(&input_labels)?;
        check_labels(&output_labels)?;
        if kraus_ops.is_empty() {
            return Err(Error::validation("channel has no Kraus operators"));
        }
        let shape = (1usize << output_labels.len(), 1usize << input_labels.len());
        if let Some(i) = kraus_ops.iter().position(|k| k.shape() != shape) {
            return Err(Error::validation(format!(
                "Kraus operator {i} has shape {:?}, expected {shape:?}",
                kraus_ops[i].shape()
            )));
        }
        let channel = Self {
            name: "channel".into(),
            input_labels,
            output_labels,
            kraus_ops,
        };
        channel.check_completeness()?;
        Ok(channel)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn identity(labels: &[&str]) -> Result<Self> {
        let d = 1usize << labels.len();
        Ok(Self::new(labels, labels, vec![CMatrix::identity(d, d)])?.named("identity"))
    }

    pub fn unitary(labels: &[&str], u: CMatrix) -> Result<Self> {
        Ok(Self::new(labels, labels, vec![u])?.named("unitary"))
    }

    /// `ρ ↦ (1 − p) ρ + p I/2`, written with the four Pauli operators.
    pub fn depolarizing(label: &str, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::validation(format!(
                "depolarizing strength {p} outside [0, 1]"
            )));
        }
        let id = Complex64::new((1.0 - 0.75 * p).sqrt(), 0.0);
        let pauli = Complex64::new((p / 4.0).sqrt(), 0.0);
        let ops = vec![
            CMatrix::identity(2, 2) * id,
            pauli_x() * pauli,
            pauli_y() * pauli,
            pauli_z() * pauli,
        ];
        Ok(Self::new(&[label], &[label], ops)?.named(format!("depolarizing({p})")))
    }

    /// Prepares `ancilla`, measures `basis` on the joint ancilla+system
    /// register, then discards the ancilla and the outcome. Kraus operators
    /// are `(⟨c|_anc ⊗ I) P_k (|ancilla⟩ ⊗ I)` for every outcome `k` and
    /// ancilla basis state `c`.
    pub fn measure_and_discard(
        ancilla: &StateVector,
        basis: &ProjectiveBasis,
        system: &[&str],
    ) -> Result<Self> {
        let anc_labels = ancilla.labels().to_vec();
        let mut joint = anc_labels.clone();
        joint.extend(owned_labels(system));
        check_labels(&joint)?;
        if basis.targets().len() != joint.len() || positions(&joint, basis.targets()).is_err() {
            return Err(Error::LabelMismatch(format!(
                "basis acts on {:?}, expected exactly {:?}",
                basis.targets(),
                joint
            )));
        }
        let na = anc_labels.len();
        let ds = 1usize << system.len();
        let da = 1usize << na;
        let mut ops = Vec::with_capacity(basis.len() * da);
        for p in basis.projectors() {
            let (_, p) = permute_operator(p, basis.targets(), &joint)?;
            for c in 0..da {
                // K[s_out, s_in] = Σ_a P[(c, s_out), (a, s_in)] φ_a
                let k = CMatrix::from_fn(ds, ds, |so, si| {
                    (0..da)
                        .map(|a| p[(c * ds + so, a * ds + si)] * ancilla.amplitudes()[a])
                        .sum()
                });
                ops.push(k);
            }
        }
        Ok(Self::new(system, system, ops)?.named("measure-and-discard"))
    }

    /// A random channel on `labels` with `n_kraus` operators, cut from the
    /// first columns of a Haar-random unitary (a random Stinespring
    /// isometry).
    pub fn random<R: Rng + ?Sized>(labels: &[&str], n_kraus: usize, rng: &mut R) -> Result<Self> {
        if n_kraus == 0 {
            return Err(Error::degenerate(
                "a channel needs at least one Kraus operator",
            ));
        }
        let d = 1usize << labels.len();
        let big = haar_random_unitary(d * n_kraus, rng);
        let ops = (0..n_kraus)
            .map(|k| big.view((k * d, 0), (d, d)).into_owned())
            .collect();
        Ok(Self::new(labels, labels, ops)?.named(format!("random({n_kraus})")))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input_labels(&self) -> &[String] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus_ops
    }

    /// `‖Σ K†K − I‖_max`.
    pub fn completeness_defect(&self) -> f64 {
        let d = 1usize << self.input_labels.len();
        let sum = self
            .kraus_ops
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        max_abs_diff(&sum, &CMatrix::identity(d, d))
    }

    pub fn check_completeness(&self) -> Result<()> {
        let defect = self.completeness_defect();
        if defect > VALIDATION {
            return Err(Error::validation(format!(
                "`{}` is not trace preserving (‖ΣK†K − I‖ = {defect:e})",
                self.name
            )));
        }
        Ok(())
    }

    fn touches(&self, label: &str) -> bool {
        self.input_labels
            .iter()
            .chain(&self.output_labels)
            .any(|l| l == label)
    }
}

/// `Σ K ρ K†`, with the channel acting on its input labels inside `rho`.
pub fn apply_channel(channel: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    channel.check_completeness()?;
    positions(rho.labels(), &channel.input_labels)?;
    let rest: Vec<String> = rho
        .labels()
        .iter()
        .filter(|l| !channel.input_labels.contains(l))
        .cloned()
        .collect();
    if let Some(l) = channel.output_labels.iter().find(|l| rest.contains(l)) {
        return Err(Error::LabelCollision(l.clone()));
    }
    let mut order = rest.clone();
    order.extend(channel.input_labels.iter().cloned());
    let (_, m) = permute_operator(rho.matrix(), rho.labels(), &order)?;

    let dr = 1usize << rest.len();
    let id_rest = CMatrix::identity(dr, dr);
    let dout = (1usize << channel.output_labels.len()) * dr;
    let mut out = CMatrix::zeros(dout, dout);
    for k in &channel.kraus_ops {
        let full = id_rest.kronecker(k);
        out += &full * &m * full.adjoint();
    }
    let mut labels = rest;
    labels.extend(channel.output_labels.iter().cloned());
    let mut result = DensityOperator::from_parts(labels, out)?;
    if channel.input_labels == channel.output_labels && result.labels() != rho.labels() {
        result = result.permuted(rho.labels())?;
    }
    result.validate(VALIDATION).map_err(|e| {
        Error::invariant(format!(
            "channel `{}` produced an invalid state: {e}",
            channel.name
        ))
    })?;
    Ok(result)
}

/// Largest trace distance between the receiver's reduced states over every
/// pair drawn from `alice_ops` plus the do-nothing operation.
///
/// Every operation must be complete and must leave the `bob_keep`
/// subsystems untouched.
pub fn no_signaling_gap(
    initial: &DensityOperator,
    alice_ops: &[KrausChannel],
    bob_keep: &[&str],
) -> Result<f64> {
    if bob_keep.is_empty() {
        return Err(Error::degenerate("receiver register is empty"));
    }
    positions(initial.labels(), bob_keep)?;
    for op in alice_ops {
        if let Some(l) = bob_keep.iter().find(|l| op.touches(l)) {
            return Err(Error::LocalityViolation {
                channel: op.name.clone(),
                label: l.to_string(),
            });
        }
        op.check_completeness()?;
    }
    let mut marginals = vec![partial_trace(initial, bob_keep)?];
    for op in alice_ops {
        let rho = apply_channel(op, initial)?;
        marginals.push(partial_trace(&rho, bob_keep)?);
    }
    let mut gap: f64 = 0.0;
    for (i, a) in marginals.iter().enumerate() {
        for b in &marginals[i + 1..] {
            gap = gap.max(trace_distance(a, b)?);
        }
    }
    Ok(gap)
}
