//! Cloning candidates `|a⟩_X |0⟩_Y |0⟩_M → U(...)` and the linearity
//! argument that rules out copying superpositions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use super::KrausChannel;
use crate::error::{Error, Result};
use crate::qstate::linalg::{gaussian, ONE};
use crate::qstate::{
    haar_random_state, haar_random_unitary, partial_trace, tensor, unitarity_defect, CMatrix,
    CVector, DensityOperator, StateVector,
};
use crate::tol::{FIDELITY, VALIDATION};
use crate::SimRng;

/// Label of the system being copied.
pub const SYSTEM: &str = "X";
/// Label of the blank copy register.
pub const COPY: &str = "Y";

const MAX_APPARATUS_QUBITS: usize = 4;

fn apparatus_labels(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("M{i}")).collect()
}

/// A proposed copier: a unitary on `X ⊗ Y ⊗ M` together with the blank
/// state of `Y` and the ready state of the apparatus `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct CloneCandidate {
    unitary: CMatrix,
    null_y: StateVector,
    null_m: StateVector,
    m_qubits: usize,
}

impl CloneCandidate {
    /// `null_y` must be one qubit and `null_m` between one and four; both are
    /// relabelled to `Y` and `M0..`.
    pub fn new(unitary: CMatrix, null_y: &StateVector, null_m: &StateVector) -> Result<Self> {
        if null_y.num_qubits() != 1 {
            return Err(Error::LabelMismatch(format!(
                "blank copy state has {} qubits, expected 1",
                null_y.num_qubits()
            )));
        }
        let m = null_m.num_qubits();
        if m > MAX_APPARATUS_QUBITS {
            return Err(Error::validation(format!(
                "apparatus of {m} qubits exceeds the {MAX_APPARATUS_QUBITS}-qubit limit"
            )));
        }
        let d = 1usize << (2 + m);
        if unitary.shape() != (d, d) {
            return Err(Error::validation(format!(
                "candidate unitary is {:?}, expected {d}x{d}",
                unitary.shape()
            )));
        }
        let defect = unitarity_defect(&unitary);
        if defect > VALIDATION {
            return Err(Error::validation(format!(
                "candidate is not unitary (‖U†U − I‖ = {defect:e})"
            )));
        }
        let m_labels = apparatus_labels(m);
        let m_refs: Vec<&str> = m_labels.iter().map(String::as_str).collect();
        Ok(Self {
            unitary,
            null_y: null_y.relabel(&[COPY])?,
            null_m: null_m.relabel(&m_refs)?,
            m_qubits: m,
        })
    }

    /// Copier for the orthonormal basis `{V|0⟩, V|1⟩}`: conjugates a
    /// controlled-NOT from `X` onto `Y` by `V`. With `record` the apparatus
    /// also keeps a classical copy in `M0`, so its final state depends on the
    /// input.
    pub fn basis_cloner(v: &CMatrix, m_qubits: usize, record: bool) -> Result<Self> {
        if v.shape() != (2, 2) || unitarity_defect(v) > VALIDATION {
            return Err(Error::validation("basis change must be a 2x2 unitary"));
        }
        if m_qubits == 0 || m_qubits > MAX_APPARATUS_QUBITS {
            return Err(Error::validation(format!(
                "apparatus size {m_qubits} outside 1..={MAX_APPARATUS_QUBITS}"
            )));
        }
        let d = 1usize << (2 + m_qubits);
        let dm = 1usize << m_qubits;
        let x_bit = d >> 1;
        let y_bit = d >> 2;
        let m0_bit = dm >> 1;
        let mut cnot = CMatrix::zeros(d, d);
        for i in 0..d {
            let mut j = i;
            if i & x_bit != 0 {
                j ^= y_bit;
                if record {
                    j ^= m0_bit;
                }
            }
            cnot[(j, i)] = ONE;
        }
        let id_m = CMatrix::identity(dm, dm);
        let id_2 = CMatrix::identity(2, 2);
        let out = v.kronecker(v).kronecker(&id_m);
        let inp = v.adjoint().kronecker(&id_2).kronecker(&id_m);
        let zero = StateVector::basis(&["y"], 0)?;
        let m_refs: Vec<String> = apparatus_labels(m_qubits);
        let m_refs: Vec<&str> = m_refs.iter().map(String::as_str).collect();
        let null_m = StateVector::basis(&m_refs, 0)?;
        Self::new(out * cnot * inp, &zero, &null_m)
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn null_y(&self) -> &StateVector {
        &self.null_y
    }

    pub fn null_m(&self) -> &StateVector {
        &self.null_m
    }

    pub fn m_qubits(&self) -> usize {
        self.m_qubits
    }

    /// `X, Y, M0, ..`.
    pub fn labels(&self) -> Vec<String> {
        let mut l = vec![SYSTEM.to_string(), COPY.to_string()];
        l.extend(apparatus_labels(self.m_qubits));
        l
    }

    fn input_on_x(input: &StateVector) -> Result<StateVector> {
        if input.num_qubits() != 1 {
            return Err(Error::LabelMismatch(format!(
                "cloning input has {} qubits, expected 1",
                input.num_qubits()
            )));
        }
        input.relabel(&[SYSTEM])
    }

    /// `U |input⟩_X |0⟩_Y |0⟩_M`.
    pub fn evolve(&self, input: &StateVector) -> Result<StateVector> {
        let x = Self::input_on_x(input)?;
        let amps = self.evolve_vector(x.amplitudes());
        StateVector::normalized(self.labels(), amps)
    }

    /// Linear evolution of an arbitrary (not necessarily normalized) `X`
    /// vector.
    fn evolve_vector(&self, x: &CVector) -> CVector {
        let start = x
            .kronecker(self.null_y.amplitudes())
            .kronecker(self.null_m.amplitudes());
        &self.unitary * start
    }

    /// Reduced state of `X ⊗ Y` after the copy step.
    pub fn copy_marginal(&self, input: &StateVector) -> Result<DensityOperator> {
        partial_trace(&self.evolve(input)?.to_density(), &[SYSTEM, COPY])
    }

    /// Reduced state of the apparatus after the copy step (the `ψ_aM` of the
    /// copying map).
    pub fn apparatus_marginal(&self, input: &StateVector) -> Result<DensityOperator> {
        partial_trace(
            &self.evolve(input)?.to_density(),
            &apparatus_labels(self.m_qubits),
        )
    }

    /// The candidate as a channel `X → X ⊗ Y` with the apparatus traced out.
    pub fn as_channel(&self) -> KrausChannel {
        let dm = 1usize << self.m_qubits;
        let mut prep = CMatrix::zeros(4 * dm, 2);
        let tail = self.null_y.amplitudes().kronecker(self.null_m.amplitudes());
        for x in 0..2 {
            for (t, a) in tail.iter().enumerate() {
                prep[(x * 2 * dm + t, x)] = *a;
            }
        }
        let iso = &self.unitary * prep;
        let ops = (0..dm)
            .map(|j| CMatrix::from_fn(4, 2, |r, c| iso[(r * dm + j, c)]))
            .collect();
        KrausChannel::new(&[SYSTEM], &[SYSTEM, COPY], ops)
            .expect("a unitary dilation always gives a complete Kraus set")
            .named("clone-candidate")
    }
}

/// The controlled-NOT copier: `|x⟩|0⟩|0⟩ → |x⟩|x⟩|0⟩` for `x ∈ {0, 1}`
/// with a one-qubit apparatus that is never touched.
pub fn basis_copier() -> CloneCandidate {
    CloneCandidate::basis_cloner(&CMatrix::identity(2, 2), 1, false)
        .expect("identity basis change is valid")
}

/// `⟨ψψ| ρ_XY |ψψ⟩`: how well the candidate produces two copies of `input`.
pub fn clone_fidelity(candidate: &CloneCandidate, input: &StateVector) -> Result<f64> {
    let x = CloneCandidate::input_on_x(input)?;
    let target = tensor(&x, &x.relabel(&[COPY])?)?;
    let rho = candidate.copy_marginal(&x)?;
    Ok(rho.expectation(&target)?.clamp(0.0, 1.0))
}

/// Outcome of running a candidate on `c = αa + βb`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearityReport {
    /// `c`, normalized.
    pub superposed_input: StateVector,
    /// `|c, c⟩` on `X ⊗ Y`.
    pub predicted_if_cloned: StateVector,
    /// Coefficients `α², αβ, βα, β²` of `|c, c⟩` on `|aa⟩, |ab⟩, |ba⟩, |bb⟩`.
    pub expansion_coefficients: [Complex64; 4],
    /// `α U|a,0,0⟩ + β U|b,0,0⟩`, normalized.
    pub linear_output: StateVector,
    pub fidelity_a: f64,
    pub fidelity_b: f64,
    pub actual_output_fidelity: f64,
    pub violation: bool,
    /// Set when the candidate does not copy `a` and `b` themselves, so the
    /// witness proves nothing.
    pub vacuous: bool,
}

/// Evolves `αa + βb` as the superposition of the evolved `a` and `b` and
/// compares the `X ⊗ Y` result with the perfect copy `|c, c⟩`.
pub fn linearity_witness(
    candidate: &CloneCandidate,
    a: &StateVector,
    b: &StateVector,
    alpha: Complex64,
    beta: Complex64,
) -> Result<LinearityReport> {
    let weight = alpha.norm_sqr() + beta.norm_sqr();
    if (weight - 1.0).abs() > VALIDATION {
        return Err(Error::validation(format!(
            "|α|² + |β|² = {weight}, expected 1"
        )));
    }
    let a = CloneCandidate::input_on_x(a)?;
    let b = CloneCandidate::input_on_x(b)?;
    let fidelity_a = clone_fidelity(candidate, &a)?;
    let fidelity_b = clone_fidelity(candidate, &b)?;

    let c_raw = a.amplitudes() * alpha + b.amplitudes() * beta;
    let c_norm = c_raw.norm();
    if c_norm <= 1e-12 {
        return Err(Error::degenerate("αa + βb vanishes"));
    }
    let superposed_input = StateVector::normalized(vec![SYSTEM.into()], c_raw)?;

    let out_raw = (candidate.evolve_vector(a.amplitudes()) * alpha
        + candidate.evolve_vector(b.amplitudes()) * beta)
        .unscale(c_norm);
    let linear_output = StateVector::normalized(candidate.labels(), out_raw)?;

    let predicted_if_cloned = tensor(&superposed_input, &superposed_input.relabel(&[COPY])?)?;
    let rho = partial_trace(&linear_output.to_density(), &[SYSTEM, COPY])?;
    let actual_output_fidelity = rho.expectation(&predicted_if_cloned)?.clamp(0.0, 1.0);

    Ok(LinearityReport {
        superposed_input,
        predicted_if_cloned,
        expansion_coefficients: [alpha * alpha, alpha * beta, beta * alpha, beta * beta],
        linear_output,
        fidelity_a,
        fidelity_b,
        actual_output_fidelity,
        violation: actual_output_fidelity < 1.0 - FIDELITY,
        vacuous: fidelity_a < 1.0 - FIDELITY || fidelity_b < 1.0 - FIDELITY,
    })
}

/// How a falsification trial picks its candidate and state pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialKind {
    /// Haar-random unitary, Haar-random pair.
    RandomUnitary,
    /// Basis cloner with the two basis states (up to phases).
    OrthogonalPair,
    /// Basis cloner with one basis state and a phase-shifted copy of it.
    PhasePair,
    /// Basis cloner with one basis state and a Haar-random partner.
    RandomPartner,
    /// Basis cloner with one basis state and a slight tilt of it.
    NearbyPartner,
    /// Slightly perturbed basis cloner with one basis state and a random
    /// or orthogonal partner.
    PerturbedCloner,
}

impl TrialKind {
    pub const ALL: [TrialKind; 6] = [
        Self::RandomUnitary,
        Self::OrthogonalPair,
        Self::PhasePair,
        Self::RandomPartner,
        Self::NearbyPartner,
        Self::PerturbedCloner,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    pub kind: TrialKind,
    pub overlap: f64,
    pub fidelity_a: f64,
    pub fidelity_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FalsificationSummary {
    pub trials: usize,
    /// Trials in which both states were copied to within the fidelity
    /// threshold.
    pub both_cloned: usize,
    pub both_cloned_by_kind: Vec<(TrialKind, usize)>,
    /// Largest `min(|⟨a|b⟩|, 1 − |⟨a|b⟩|)` seen among doubly cloned pairs.
    pub closest_approach: f64,
    pub counterexamples: Vec<Counterexample>,
}

/// Overlap band around 0 and 1 that doubly cloned pairs must fall in.
pub const DICHOTOMY_MARGIN: f64 = 1e-4;

struct TrialOutcome {
    kind: TrialKind,
    overlap: f64,
    fidelity_a: f64,
    fidelity_b: f64,
}

fn phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

fn nearest_unitary(m: CMatrix) -> CMatrix {
    let svd = m.svd(true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

fn run_trial(seed: u64, index: usize) -> Result<TrialOutcome> {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let kind = TrialKind::ALL[index % TrialKind::ALL.len()];
    let m = rng.random_range(1..=2usize);
    let record = rng.random_bool(0.5);
    let v = haar_random_unitary(2, &mut rng);
    let col = |j: usize, ph: Complex64| -> Result<StateVector> {
        StateVector::normalized(vec![SYSTEM.into()], v.column(j).into_owned() * ph)
    };

    let (candidate, a, b) = match kind {
        TrialKind::RandomUnitary => {
            let u = haar_random_unitary(1 << (2 + m), &mut rng);
            let y = haar_random_state(1, &mut rng)?;
            let mm = haar_random_state(m, &mut rng)?;
            let cand = CloneCandidate::new(u, &y, &mm)?;
            (
                cand,
                haar_random_state(1, &mut rng)?,
                haar_random_state(1, &mut rng)?,
            )
        }
        TrialKind::OrthogonalPair => {
            let cand = CloneCandidate::basis_cloner(&v, m, record)?;
            let (pa, pb) = (phase(&mut rng), phase(&mut rng));
            (cand, col(0, pa)?, col(1, pb)?)
        }
        TrialKind::PhasePair => {
            let cand = CloneCandidate::basis_cloner(&v, m, record)?;
            let j = rng.random_range(0..2);
            let (pa, pb) = (phase(&mut rng), phase(&mut rng));
            (cand, col(j, pa)?, col(j, pb)?)
        }
        TrialKind::RandomPartner => {
            let cand = CloneCandidate::basis_cloner(&v, m, record)?;
            let p = phase(&mut rng);
            (cand, col(0, p)?, haar_random_state(1, &mut rng)?)
        }
        TrialKind::NearbyPartner => {
            let cand = CloneCandidate::basis_cloner(&v, m, record)?;
            let eps = 10f64.powf(-rng.random_range(1.0..7.0));
            let tilt =
                v.column(0).into_owned() + v.column(1).into_owned() * (phase(&mut rng) * eps);
            let b = StateVector::normalized(vec![SYSTEM.into()], tilt)?;
            (cand, col(0, ONE)?, b)
        }
        TrialKind::PerturbedCloner => {
            let base = CloneCandidate::basis_cloner(&v, m, record)?;
            let d = 1usize << (2 + m);
            let delta = 10f64.powf(-rng.random_range(3.0..10.0));
            let g = CMatrix::from_fn(d, d, |_, _| gaussian(&mut rng));
            let u = nearest_unitary(base.unitary() + g * Complex64::new(delta, 0.0));
            let cand = CloneCandidate::new(u, base.null_y(), base.null_m())?;
            let b = if rng.random_bool(0.5) {
                col(1, phase(&mut rng))?
            } else {
                haar_random_state(1, &mut rng)?
            };
            (cand, col(0, ONE)?, b)
        }
    };
    let a = a.relabel(&[SYSTEM])?;
    let b = b.relabel(&[SYSTEM])?;
    Ok(TrialOutcome {
        kind,
        overlap: a.inner(&b)?.norm(),
        fidelity_a: clone_fidelity(&candidate, &a)?,
        fidelity_b: clone_fidelity(&candidate, &b)?,
    })
}

/// Randomized search for a candidate that copies two states whose overlap is
/// bounded away from both 0 and 1. Trials are independent (one generator
/// stream per trial) and run on the rayon pool; the result depends only on
/// `trials` and `seed`.
pub fn falsify_cloning_dichotomy(trials: usize, seed: u64) -> Result<FalsificationSummary> {
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(seed, i))
        .collect::<Result<_>>()?;

    let mut summary = FalsificationSummary {
        trials,
        both_cloned: 0,
        both_cloned_by_kind: TrialKind::ALL.iter().map(|&k| (k, 0)).collect(),
        closest_approach: 0.0,
        counterexamples: Vec::new(),
    };
    for (trial, o) in outcomes.into_iter().enumerate() {
        if o.fidelity_a < 1.0 - FIDELITY || o.fidelity_b < 1.0 - FIDELITY {
            continue;
        }
        summary.both_cloned += 1;
        if let Some(entry) = summary
            .both_cloned_by_kind
            .iter_mut()
            .find(|(k, _)| *k == o.kind)
        {
            entry.1 += 1;
        }
        let gap = o.overlap.min(1.0 - o.overlap);
        summary.closest_approach = summary.closest_approach.max(gap);
        if gap > DICHOTOMY_MARGIN {
            summary.counterexamples.push(Counterexample {
                trial,
                kind: o.kind,
                overlap: o.overlap,
                fidelity_a: o.fidelity_a,
                fidelity_b: o.fidelity_b,
            });
        }
    }
    Ok(summary)
}
