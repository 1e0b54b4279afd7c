use num_complex::Complex64;
use serde::{Serialize, Serializer};

use super::linalg::{hermitian_eigenvalues, hermiticity_defect, matrix_serde, CMatrix, ONE, ZERO};
use super::{check_labels, gather, owned_labels, positions, same_label_set, scatter, StateVector};
use crate::error::{Error, Result};
use crate::tol::VALIDATION;

/// Hermitian, positive semidefinite, unit-trace operator on a labelled
/// register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    labels: Vec<String>,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates hermiticity, unit trace and positivity against the
    /// validation tolerance.
    pub fn new(labels: &[&str], matrix: CMatrix) -> Result<Self> {
        let rho = Self::from_parts(owned_labels(labels), matrix)?;
        rho.validate(VALIDATION)?;
        Ok(rho)
    }

    pub(crate) fn from_parts(labels: Vec<String>, matrix: CMatrix) -> Result<Self> {
        check_labels(&labels)?;
        let dim = 1usize << labels.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::validation(format!(
                "{}x{} matrix for {} qubits",
                matrix.nrows(),
                matrix.ncols(),
                labels.len()
            )));
        }
        Ok(Self { labels, matrix })
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        Self {
            labels: state.labels().to_vec(),
            matrix: a * a.adjoint(),
        }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(labels: &[&str]) -> Result<Self> {
        let labels = owned_labels(labels);
        check_labels(&labels)?;
        let d = 1usize << labels.len();
        let matrix = CMatrix::identity(d, d).unscale(d as f64);
        Ok(Self { labels, matrix })
    }

    /// Checks the density-operator invariants at tolerance `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let h = hermiticity_defect(&self.matrix);
        if h > tol {
            return Err(Error::validation(format!("not Hermitian (defect {h:e})")));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > tol {
            return Err(Error::validation(format!("trace {tr} is not 1")));
        }
        let min = self.eigenvalues()[0];
        if min < -tol {
            return Err(Error::validation(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `⟨ψ|ρ|ψ⟩` for a pure state on the same register.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        let psi = if psi.labels() == self.labels.as_slice() {
            psi.clone()
        } else if same_label_set(psi.labels(), &self.labels) {
            psi.permuted(&self.labels)?
        } else {
            return Err(Error::LabelMismatch(format!(
                "state on {:?}, operator on {:?}",
                psi.labels(),
                self.labels
            )));
        };
        let a = psi.amplitudes();
        Ok(a.dotc(&(&self.matrix * a)).re)
    }

    /// Reorders the subsystems so the register reads in `order`.
    pub fn permuted<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let (labels, matrix) = permute_operator(&self.matrix, &self.labels, order)?;
        Ok(Self { labels, matrix })
    }
}

/// Conjugates a square operator on `labels` by the qubit permutation that
/// puts the register in `order`.
pub(crate) fn permute_operator<S: AsRef<str>>(
    m: &CMatrix,
    labels: &[String],
    order: &[S],
) -> Result<(Vec<String>, CMatrix)> {
    if order.len() != labels.len() {
        return Err(Error::LabelMismatch(format!(
            "permutation lists {} labels for a {}-qubit register",
            order.len(),
            labels.len()
        )));
    }
    let old_pos = positions(labels, order)?;
    let n = labels.len();
    let d = m.nrows();
    let map: Vec<usize> = (0..d).map(|i| scatter(i, n, &old_pos)).collect();
    let out = CMatrix::from_fn(d, d, |i, j| m[(map[i], map[j])]);
    Ok((old_pos.iter().map(|&p| labels[p].clone()).collect(), out))
}

impl Serialize for DensityOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            labels: &'a [String],
            #[serde(with = "matrix_serde")]
            matrix: &'a CMatrix,
        }
        Raw {
            labels: &self.labels,
            matrix: &self.matrix,
        }
        .serialize(s)
    }
}

/// Reduced state on `keep`, in the order listed.
pub fn partial_trace<S: AsRef<str>>(rho: &DensityOperator, keep: &[S]) -> Result<DensityOperator> {
    if keep.is_empty() {
        return Err(Error::degenerate(
            "partial trace must keep at least one subsystem",
        ));
    }
    let kpos = positions(&rho.labels, keep)?;
    let n = rho.num_qubits();
    let tpos: Vec<usize> = (0..n).filter(|p| !kpos.contains(p)).collect();
    let kd = 1usize << kpos.len();
    let td = 1usize << tpos.len();
    let traced: Vec<usize> = (0..td).map(|t| scatter(t, n, &tpos)).collect();
    let kept: Vec<usize> = (0..kd).map(|k| scatter(k, n, &kpos)).collect();
    let mut out = CMatrix::from_element(kd, kd, ZERO);
    for i in 0..kd {
        for j in 0..kd {
            out[(i, j)] = traced
                .iter()
                .map(|&t| rho.matrix[(kept[i] | t, kept[j] | t)])
                .sum();
        }
    }
    debug_assert!(kept
        .iter()
        .enumerate()
        .all(|(k, &i)| gather(i, n, &kpos) == k));
    let labels = kpos.iter().map(|&p| rho.labels[p].clone()).collect();
    DensityOperator::from_parts(labels, out)
}

/// `½ Σ |λ_i(ρ − σ)|`. Operators must live on the same register.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let sigma = if rho.labels == sigma.labels {
        sigma.clone()
    } else if same_label_set(&rho.labels, &sigma.labels) {
        sigma.permuted(&rho.labels)?
    } else {
        return Err(Error::LabelMismatch(format!(
            "operators on {:?} and {:?}",
            rho.labels, sigma.labels
        )));
    };
    let diff = &rho.matrix - &sigma.matrix;
    Ok(0.5
        * hermitian_eigenvalues(&diff)
            .iter()
            .map(|l| l.abs())
            .sum::<f64>())
}
