//! Small dense complex linear-algebra helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest entry-wise modulus of `a - b`. Shapes must agree.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `‖U†U − I‖_max`, or infinity for a non-square matrix.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(n, n))
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    unitarity_defect(u) <= tol
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.adjoint())
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut vals: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Outer product `|a⟩⟨b|`.
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Draws a Haar-distributed unitary of size `dim` (QR of a complex Ginibre
/// matrix with the phases of `R`'s diagonal folded back into `Q`).
pub fn haar_random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for z in u.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    u
}

/// Standard complex Gaussian with `E|z|² = 2` (independent unit normals for
/// the real and imaginary parts).
pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    let i = Complex64::i();
    CMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn hadamard() -> CMatrix {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
}

/// Serde adapter writing a matrix as nested rows of `[re, im]` pairs.
pub mod matrix_serde {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(m.nrows()))?;
        for r in m.row_iter() {
            let row: Vec<Complex64> = r.iter().copied().collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows: Vec<Vec<Complex64>> = Vec::deserialize(d)?;
        rows_to_matrix(&rows).map_err(serde::de::Error::custom)
    }

    pub fn rows_to_matrix(rows: &[Vec<Complex64>]) -> Result<CMatrix, String> {
        let nrows = rows.len();
        if nrows == 0 {
            return Err("matrix has no rows".into());
        }
        let ncols = rows[0].len();
        if rows.iter().any(|r| r.len() != ncols) {
            return Err("ragged matrix rows".into());
        }
        Ok(CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }
}

/// Serde adapter for a list of matrices.
pub mod matrix_list_serde {
    use super::*;

    #[derive(Serialize)]
    struct Wrap<'a>(#[serde(with = "matrix_serde")] &'a CMatrix);

    pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(ms.len()))?;
        for m in ms {
            seq.serialize_element(&Wrap(m))?;
        }
        seq.end()
    }
}
