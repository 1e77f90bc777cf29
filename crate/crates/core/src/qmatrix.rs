//! Dense complex linear algebra for 2x2 and 4x4 operators.
//!
//! Everything downstream works in the standard two-qubit basis
//! |00>, |01>, |10>, |11> with subsystem A as the left qubit. Matrices are
//! immutable values; every operation returns a fresh matrix.

use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;

/// Hermiticity / trace / positivity checks all use this working tolerance.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Square complex matrix in row-major order, dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::UnsupportedDimension { found: dim });
        }
        if entries.len() != dim * dim {
            return Err(Error::EntryCount {
                dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(dim, vec![C64::new(0.0, 0.0); dim * dim])
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        Ok(m)
    }

    /// Builds a matrix from real entries (imaginary parts zero).
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(dim, entries.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Self::new(self.dim, entries)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Self::new(self.dim, entries)
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.scale_c(C64::new(factor, 0.0))
    }

    pub fn scale_c(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Self::new(n, out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        Self {
            dim: n,
            entries: out,
        }
    }

    /// Entrywise complex conjugate (no transpose), i.e. conjugation in the
    /// sigma_z eigenbasis.
    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    /// u * self * u^dagger.
    pub fn conjugate_with(&self, u: &Self) -> Result<Self> {
        u.mul(self)?.mul(&u.adjoint())
    }

    /// Largest |a_ij - b_ij| over all entries.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest |a_ij - conj(a_ji)|; zero for an exactly Hermitian matrix.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.entries[i * n + j] - self.entries[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }
}

/// tr(a * b) without forming the product matrix.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let n = a.dim();
    let mut t = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            t += a.get(i, j) * b.get(j, i);
        }
    }
    Ok(t)
}

/// Outer product |v><v| of a 2- or 4-component ket.
pub fn outer(ket: &[C64]) -> Result<ComplexMatrix> {
    let n = ket.len();
    let mut m = ComplexMatrix::zeros(n)?;
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, ket[i] * ket[j].conj());
        }
    }
    Ok(m)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::new(
        2,
        vec![
            C64::new(0.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 0.0),
        ],
    )
    .unwrap()
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
}

/// sigma_+ = (sigma_x + i sigma_y)/2, the |1> -> |0> raising operator.
pub fn sigma_plus() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap()
}

/// sigma_- = (sigma_x - i sigma_y)/2, the |0> -> |1> lowering operator.
pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[0.0, 0.0, 1.0, 0.0]).unwrap()
}

/// Kronecker product with the left factor on subsystem A. The result is
/// capped at dimension 4: this crate models exactly two qubits.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = a.dim() * b.dim();
    if dim > 4 {
        return Err(Error::KronOverflow(dim));
    }
    let (na, nb) = (a.dim(), b.dim());
    let mut out = ComplexMatrix::zeros(dim)?;
    for ia in 0..na {
        for ja in 0..na {
            for ib in 0..nb {
                for jb in 0..nb {
                    out.set(ia * nb + ib, ja * nb + jb, a.get(ia, ja) * b.get(ib, jb));
                }
            }
        }
    }
    Ok(out)
}

/// Partial transpose over the second qubit: (iA iB, jA jB) -> (iA jB, jA iB).
pub fn partial_transpose_b(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.dim() != 4 {
        return Err(Error::UnsupportedDimension { found: rho.dim() });
    }
    let mut out = ComplexMatrix::zeros(4)?;
    for ia in 0..2 {
        for ib in 0..2 {
            for ja in 0..2 {
                for jb in 0..2 {
                    out.set(ia * 2 + jb, ja * 2 + ib, rho.get(ia * 2 + ib, ja * 2 + jb));
                }
            }
        }
    }
    Ok(out)
}

/// Trace over the second qubit, leaving the 2x2 state of subsystem A.
pub fn partial_trace_b(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.dim() != 4 {
        return Err(Error::UnsupportedDimension { found: rho.dim() });
    }
    let mut out = ComplexMatrix::zeros(2)?;
    for ia in 0..2 {
        for ja in 0..2 {
            let mut s = C64::new(0.0, 0.0);
            for b in 0..2 {
                s += rho.get(ia * 2 + b, ja * 2 + b);
            }
            out.set(ia, ja, s);
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues ascend; eigenvectors are orthonormal and phase-fixed so the
/// first component above 1e-8 in magnitude is real positive. Ties in the
/// eigenvalues are ordered lexicographically on the phase-fixed vectors.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<C64>>,
}

impl HermitianSpectrum {
    /// Rebuilds sum_i lambda_i |v_i><v_i|.
    pub fn reconstruct(&self) -> Result<ComplexMatrix> {
        let n = self.eigenvalues.len();
        let mut m = ComplexMatrix::zeros(n)?;
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..n {
                for j in 0..n {
                    let cur = m.get(i, j);
                    m.set(i, j, cur + v[i] * v[j].conj() * lambda);
                }
            }
        }
        Ok(m)
    }

    /// Largest |<v_i|v_j> - delta_ij|.
    pub fn gram_defect(&self) -> f64 {
        let n = self.eigenvectors.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut ip = C64::new(0.0, 0.0);
                for k in 0..n {
                    ip += self.eigenvectors[i][k].conj() * self.eigenvectors[j][k];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

const JACOBI_OFF_NORM_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Hermitian eigensolver: cyclic Jacobi rotations on the real-symmetric
/// embedding [[Re H, -Im H], [Im H, Re H]], whose spectrum doubles that of H.
///
/// Rejects inputs whose asymmetry exceeds [`HERMITICITY_TOL`]; within the
/// tolerance the matrix is symmetrized exactly before embedding.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianSpectrum> {
    let defect = m.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian {
            max_asymmetry: defect,
        });
    }
    let n = m.dim();
    let nn = 2 * n;

    // Exactly symmetric embedding of (m + m^dagger)/2.
    let mut a = vec![0.0f64; nn * nn];
    for i in 0..n {
        for j in 0..n {
            let h = (m.get(i, j) + m.get(j, i).conj()) * 0.5;
            a[i * nn + j] = h.re;
            a[(i + n) * nn + (j + n)] = h.re;
            a[i * nn + (j + n)] = -h.im;
            a[(i + n) * nn + j] = h.im;
        }
    }

    let mut vecs = vec![0.0f64; nn * nn];
    for i in 0..nn {
        vecs[i * nn + i] = 1.0;
    }

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..nn {
            for j in (i + 1)..nn {
                s += a[i * nn + j] * a[i * nn + j];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > JACOBI_OFF_NORM_TOL {
        if sweeps >= JACOBI_MAX_SWEEPS {
            return Err(Error::EigNotConverged {
                sweeps,
                off_norm: off_norm(&a),
            });
        }
        sweeps += 1;
        for p in 0..nn {
            for q in (p + 1)..nn {
                let apq = a[p * nn + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let tau = (a[q * nn + q] - a[p * nn + p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..nn {
                    let akp = a[k * nn + p];
                    let akq = a[k * nn + q];
                    a[k * nn + p] = c * akp - s * akq;
                    a[k * nn + q] = s * akp + c * akq;
                }
                for k in 0..nn {
                    let apk = a[p * nn + k];
                    let aqk = a[q * nn + k];
                    a[p * nn + k] = c * apk - s * aqk;
                    a[q * nn + k] = s * apk + c * aqk;
                }
                for k in 0..nn {
                    let vkp = vecs[k * nn + p];
                    let vkq = vecs[k * nn + q];
                    vecs[k * nn + p] = c * vkp - s * vkq;
                    vecs[k * nn + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    // Each eigenvalue of H shows up twice in the embedding; pick one complex
    // eigenvector per doubled pair by Gram-Schmidt over the candidates.
    let mut order: Vec<usize> = (0..nn).collect();
    order.sort_by(|&i, &j| a[i * nn + i].partial_cmp(&a[j * nn + j]).unwrap());

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors: Vec<Vec<C64>> = Vec::with_capacity(n);
    for &r in &order {
        if eigenvectors.len() == n {
            break;
        }
        let mut v: Vec<C64> = (0..n)
            .map(|i| C64::new(vecs[i * nn + r], vecs[(i + n) * nn + r]))
            .collect();
        for prev in &eigenvectors {
            let ip: C64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
            for (x, p) in v.iter_mut().zip(prev) {
                *x -= ip * p;
            }
        }
        let norm_sq: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        if norm_sq > 0.25 {
            let inv = 1.0 / norm_sq.sqrt();
            for x in v.iter_mut() {
                *x *= inv;
            }
            fix_phase(&mut v);
            eigenvalues.push(a[r * nn + r]);
            eigenvectors.push(v);
        }
    }
    debug_assert_eq!(eigenvectors.len(), n);

    // Deterministic order for degenerate eigenvalues.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        if (eigenvalues[i] - eigenvalues[j]).abs() > 1e-12 {
            eigenvalues[i].partial_cmp(&eigenvalues[j]).unwrap()
        } else {
            lex_cmp(&eigenvectors[i], &eigenvectors[j])
        }
    });
    Ok(HermitianSpectrum {
        eigenvalues: idx.iter().map(|&i| eigenvalues[i]).collect(),
        eigenvectors: idx.iter().map(|&i| eigenvectors[i].clone()).collect(),
    })
}

fn fix_phase(v: &mut [C64]) {
    for i in 0..v.len() {
        let mag = v[i].norm();
        if mag > 1e-8 {
            let phase = v[i].conj() / mag;
            for x in v.iter_mut() {
                *x *= phase;
            }
            return;
        }
    }
}

fn lex_cmp(a: &[C64], b: &[C64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.re.partial_cmp(&y.re).unwrap() {
            std::cmp::Ordering::Equal => {}
            other => return other,
        }
        match x.im.partial_cmp(&y.im).unwrap() {
            std::cmp::Ordering::Equal => {}
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// 4x4 Hermitian, positive-semidefinite, unit-trace state.
///
/// Validation runs once at construction: every downstream energy and
/// correlation formula silently assumes these three properties.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    eigenvalues: Vec<f64>,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(Error::InvalidState(format!(
                "expected a 4x4 state, got {0}x{0}",
                matrix.dim()
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian: max asymmetry {defect:.3e}"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > HERMITICITY_TOL || trace.im.abs() > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "trace {} + {}i is not 1",
                trace.re, trace.im
            )));
        }
        let spectrum = hermitian_eig(&matrix)?;
        let min_eig = spectrum.eigenvalues[0];
        if min_eig <= -HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self {
            matrix,
            eigenvalues: spectrum.eigenvalues,
        })
    }

    /// Builds the pure state |v><v| from a (normalized) 4-component ket.
    pub fn from_ket(ket: &[C64]) -> Result<Self> {
        Self::new(outer(ket)?)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Spectrum computed during validation, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}
