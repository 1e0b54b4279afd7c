use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{gaussian, unitarity_defect, CMatrix, CVector, ONE, ZERO};
use super::DensityOperator;
use super::{check_labels, clear, gather, owned_labels, positions, same_label_set, scatter};
use crate::error::{Error, Result};
use crate::tol::{MAX_QUBITS, VALIDATION};

/// A normalized pure state on a labelled register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct StateVector {
    labels: Vec<String>,
    amplitudes: CVector,
}

#[derive(Serialize, Deserialize)]
struct RawState {
    labels: Vec<String>,
    amplitudes: Vec<Complex64>,
}

impl TryFrom<RawState> for StateVector {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        StateVector::checked(raw.labels, CVector::from_vec(raw.amplitudes))
    }
}

impl From<StateVector> for RawState {
    fn from(s: StateVector) -> Self {
        RawState {
            labels: s.labels,
            amplitudes: s.amplitudes.iter().copied().collect(),
        }
    }
}

impl StateVector {
    /// Builds a state from amplitudes whose norm is already 1 (within the
    /// validation tolerance). The stored vector is renormalized exactly.
    pub fn new(labels: &[&str], amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::checked(owned_labels(labels), CVector::from_vec(amplitudes))
    }

    /// Builds a state by normalizing arbitrary nonzero amplitudes.
    pub fn from_unnormalized(labels: &[&str], amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::normalized(owned_labels(labels), CVector::from_vec(amplitudes))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(labels: &[&str], index: usize) -> Result<Self> {
        let labels = owned_labels(labels);
        check_labels(&labels)?;
        let dim = 1 << labels.len();
        if index >= dim {
            return Err(Error::validation(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = ONE;
        Ok(Self {
            labels,
            amplitudes: amps,
        })
    }

    fn checked(labels: Vec<String>, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > VALIDATION {
            return Err(Error::validation(format!("state norm {norm} is not 1")));
        }
        Self::normalized(labels, amplitudes)
    }

    pub(crate) fn normalized(labels: Vec<String>, amplitudes: CVector) -> Result<Self> {
        check_labels(&labels)?;
        let dim = 1usize << labels.len();
        if amplitudes.len() != dim {
            return Err(Error::validation(format!(
                "{} amplitudes for {} qubits (expected {dim})",
                amplitudes.len(),
                labels.len()
            )));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::validation("non-finite amplitude"));
        }
        let norm = amplitudes.norm();
        if norm <= f64::EPSILON {
            return Err(Error::degenerate("zero vector cannot be normalized"));
        }
        Ok(Self {
            labels,
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Renames the subsystems positionally.
    pub fn relabel(&self, labels: &[&str]) -> Result<Self> {
        let labels = owned_labels(labels);
        if labels.len() != self.labels.len() {
            return Err(Error::LabelMismatch(format!(
                "cannot relabel a {}-qubit register with {} labels",
                self.labels.len(),
                labels.len()
            )));
        }
        check_labels(&labels)?;
        Ok(Self {
            labels,
            amplitudes: self.amplitudes.clone(),
        })
    }

    /// Reorders the qubits so that the register reads in `order`.
    pub fn permuted<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        if order.len() != self.labels.len() {
            return Err(Error::LabelMismatch(format!(
                "permutation lists {} labels for a {}-qubit register",
                order.len(),
                self.labels.len()
            )));
        }
        let old_pos = positions(&self.labels, order)?;
        let n = self.labels.len();
        let mut amps = CVector::zeros(self.dim());
        for (new_index, amp) in amps.iter_mut().enumerate() {
            // new position q holds old qubit old_pos[q]
            let old_index = scatter(new_index, n, &old_pos);
            *amp = self.amplitudes[old_index];
        }
        Ok(Self {
            labels: old_pos.iter().map(|&p| self.labels[p].clone()).collect(),
            amplitudes: amps,
        })
    }

    /// `⟨self|other⟩`; `other` is reordered to this register's label order.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        let other = self.aligned(other)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    fn aligned(&self, other: &StateVector) -> Result<StateVector> {
        if !same_label_set(&self.labels, &other.labels) {
            return Err(Error::LabelMismatch(format!(
                "registers {:?} and {:?} differ",
                self.labels, other.labels
            )));
        }
        if self.labels == other.labels {
            Ok(other.clone())
        } else {
            other.permuted(&self.labels)
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::from_pure(self)
    }

    /// Projects the `targets` sub-register onto `reference` and returns the
    /// probability of that outcome together with the normalized state of the
    /// remaining qubits, or `None` when the probability vanishes.
    pub fn condition_on(
        &self,
        targets: &[&str],
        reference: &StateVector,
    ) -> Result<Option<(f64, StateVector)>> {
        let tpos = positions(&self.labels, targets)?;
        if reference.num_qubits() != tpos.len() {
            return Err(Error::LabelMismatch(format!(
                "reference has {} qubits, targets name {}",
                reference.num_qubits(),
                tpos.len()
            )));
        }
        let n = self.num_qubits();
        let rest: Vec<usize> = (0..n).filter(|p| !tpos.contains(p)).collect();
        if rest.is_empty() {
            return Err(Error::degenerate("conditioning leaves no subsystem"));
        }
        let mut out = CVector::zeros(1 << rest.len());
        for i in 0..self.dim() {
            let t = gather(i, n, &tpos);
            let r = gather(i, n, &rest);
            out[r] += reference.amplitudes[t].conj() * self.amplitudes[i];
        }
        let p = out.norm_squared();
        if p <= 1e-24 {
            return Ok(None);
        }
        let labels = rest.iter().map(|&q| self.labels[q].clone()).collect();
        Ok(Some((p, Self::normalized(labels, out)?)))
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.num_qubits();
        let mut first = true;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm() < 1e-12 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)|{:0width$b}⟩", a.re, a.im, i, width = n)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `a ⊗ b` with labels concatenated in order.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    if let Some(l) = a.labels.iter().find(|l| b.labels.contains(l)) {
        return Err(Error::LabelCollision(l.clone()));
    }
    let mut labels = a.labels.clone();
    labels.extend(b.labels.iter().cloned());
    check_labels(&labels)?;
    let amplitudes = a.amplitudes.kronecker(&b.amplitudes);
    StateVector::normalized(labels, amplitudes)
}

/// Applies `op` to the qubits at `tpos`, identity elsewhere. No unitarity
/// check and no renormalization.
pub(crate) fn apply_operator(op: &CMatrix, amps: &CVector, n: usize, tpos: &[usize]) -> CVector {
    let sub_dim = 1usize << tpos.len();
    debug_assert_eq!(op.ncols(), sub_dim);
    let mut out = CVector::zeros(amps.len());
    for (i, o) in out.iter_mut().enumerate() {
        let row = gather(i, n, tpos);
        let base = clear(i, n, tpos);
        let mut acc = ZERO;
        for col in 0..sub_dim {
            let a = amps[base | scatter(col, n, tpos)];
            if a != ZERO {
                acc += op[(row, col)] * a;
            }
        }
        *o = acc;
    }
    out
}

/// Applies the unitary `u` to the `targets` sub-register (in the order
/// listed, first target most significant).
pub fn apply_unitary(u: &CMatrix, state: &StateVector, targets: &[&str]) -> Result<StateVector> {
    let tpos = positions(&state.labels, targets)?;
    if tpos.is_empty() {
        return Err(Error::degenerate("no target subsystems"));
    }
    let sub_dim = 1usize << tpos.len();
    if u.nrows() != sub_dim || u.ncols() != sub_dim {
        return Err(Error::validation(format!(
            "{}x{} matrix cannot act on {} qubits",
            u.nrows(),
            u.ncols(),
            tpos.len()
        )));
    }
    let defect = unitarity_defect(u);
    if defect > VALIDATION {
        return Err(Error::validation(format!(
            "matrix is not unitary (‖U†U − I‖ = {defect:e})"
        )));
    }
    let out = apply_operator(u, &state.amplitudes, state.num_qubits(), &tpos);
    StateVector::normalized(state.labels.clone(), out)
}

/// `|⟨a|b⟩|²`, clamped to `[0, 1]`. Registers must carry the same labels.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

/// Named single- and two-qubit states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalState {
    /// `(|↑↓⟩ − |↓↑⟩)/√2`, identical to Ψ⁻.
    Singlet,
    PhiPlus,
    PhiMinus,
    PsiPlus,
    Up,
    Down,
    Plus,
    Minus,
}

impl CanonicalState {
    pub const ALL: [CanonicalState; 8] = [
        Self::Singlet,
        Self::PhiPlus,
        Self::PhiMinus,
        Self::PsiPlus,
        Self::Up,
        Self::Down,
        Self::Plus,
        Self::Minus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Singlet => "singlet",
            Self::PhiPlus => "phi_plus",
            Self::PhiMinus => "phi_minus",
            Self::PsiPlus => "psi_plus",
            Self::Up => "up",
            Self::Down => "down",
            Self::Plus => "plus",
            Self::Minus => "minus",
        }
    }

    pub fn num_qubits(self) -> usize {
        match self {
            Self::Singlet | Self::PhiPlus | Self::PhiMinus | Self::PsiPlus => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CanonicalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CanonicalState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let key = match key.as_str() {
            "psi_minus" => "singlet",
            "0" | "zero" => "up",
            "1" | "one" => "down",
            other => other,
        };
        Self::ALL
            .into_iter()
            .find(|c| c.name() == key)
            .ok_or_else(|| Error::validation(format!("unknown named state `{s}`")))
    }
}

/// The named state on default labels `q0` (and `q1`).
pub fn canonical_state(kind: CanonicalState) -> StateVector {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let (labels, amps): (&[&str], Vec<Complex64>) = match kind {
        CanonicalState::Up => (&["q0"], vec![ONE, ZERO]),
        CanonicalState::Down => (&["q0"], vec![ZERO, ONE]),
        CanonicalState::Plus => (&["q0"], vec![h, h]),
        CanonicalState::Minus => (&["q0"], vec![h, -h]),
        CanonicalState::PhiPlus => (&["q0", "q1"], vec![h, ZERO, ZERO, h]),
        CanonicalState::PhiMinus => (&["q0", "q1"], vec![h, ZERO, ZERO, -h]),
        CanonicalState::PsiPlus => (&["q0", "q1"], vec![ZERO, h, h, ZERO]),
        CanonicalState::Singlet => (&["q0", "q1"], vec![ZERO, h, -h, ZERO]),
    };
    StateVector::new(labels, amps).expect("canonical states are normalized")
}

/// Haar-random pure state on labels `q0..q{n-1}`: a normalized vector of
/// independent standard complex Gaussians.
pub fn haar_random_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<StateVector> {
    if n_qubits == 0 {
        return Err(Error::degenerate("a state needs at least one qubit"));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::validation(format!(
            "{n_qubits} qubits exceeds the {MAX_QUBITS}-qubit cap"
        )));
    }
    let labels: Vec<String> = (0..n_qubits).map(|i| format!("q{i}")).collect();
    let amps = CVector::from_fn(1 << n_qubits, |_, _| gaussian(rng));
    StateVector::normalized(labels, amps)
}
