//! Dense complex square-matrix primitives: Hermitian exponentials,
//! Frobenius distances, and the normalized match scores used by the
//! factorization search.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hermiticity tolerance for exponent generators.
pub const TOL_HERM: f64 = 1e-10;
/// Unitarity tolerance for score arguments.
pub const TOL_UNITARY: f64 = 1e-8;

/// Dense complex d×d matrix, row-major for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<[f64; 2]>>", into = "Vec<Vec<[f64; 2]>>")]
pub struct SquareMatrix {
    inner: DMatrix<Complex64>,
}

impl SquareMatrix {
    pub fn from_dmatrix(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() || inner.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: inner.nrows().max(1),
                found: inner.ncols(),
            });
        }
        Ok(Self { inner })
    }

    /// Build from a row-major list of entries; `entries.len()` must be d².
    pub fn from_row_major(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let inner = DMatrix::from_row_iterator(dim, dim, entries.iter().copied());
        Ok(Self { inner })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            inner: &self.inner * &rhs.inner,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            inner: &self.inner + &rhs.inner,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            inner: &self.inner - &rhs.inner,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            inner: self.inner.map(|z| z * factor),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    pub fn frob_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max entrywise |A − A†|.
    pub fn herm_defect(&self) -> f64 {
        let adj = self.inner.adjoint();
        (&self.inner - adj)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let defect = self.herm_defect();
        if defect > tol {
            return Err(Error::NonHermitian { defect, tol });
        }
        Ok(())
    }

    pub fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Hilbert–Schmidt inner product tr(A†B).
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Eigendecomposition of a Hermitian matrix, reusable across many
    /// exponential angles.
    pub fn herm_eig(&self) -> Result<HermEig> {
        self.check_hermitian(TOL_HERM)?;
        // Symmetrize before factorizing so the decomposition is exactly Hermitian.
        let sym = (&self.inner + self.inner.adjoint()).map(|z| z * 0.5);
        let eig = nalgebra::SymmetricEigen::new(sym);
        Ok(HermEig {
            eigenvectors: eig.eigenvectors,
            eigenvalues: eig.eigenvalues,
        })
    }
}

impl TryFrom<Vec<Vec<[f64; 2]>>> for SquareMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<[f64; 2]>>) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            for &[re, im] in row {
                entries.push(Complex64::new(re, im));
            }
        }
        SquareMatrix::from_row_major(dim, &entries)
    }
}

impl From<SquareMatrix> for Vec<Vec<[f64; 2]>> {
    fn from(m: SquareMatrix) -> Self {
        let d = m.dim();
        (0..d)
            .map(|r| {
                (0..d)
                    .map(|c| {
                        let z = m.get(r, c);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect()
    }
}

/// Cached Hermitian eigendecomposition G = V diag(λ) V†.
#[derive(Debug, Clone)]
pub struct HermEig {
    eigenvectors: DMatrix<Complex64>,
    eigenvalues: DVector<f64>,
}

impl HermEig {
    /// exp(−i·theta·G) = V diag(e^{−i·theta·λ_k}) V†.
    pub fn expm(&self, theta: f64) -> SquareMatrix {
        let d = self.eigenvalues.len();
        let phases = DVector::from_iterator(
            d,
            self.eigenvalues
                .iter()
                .map(|&lam| Complex64::from_polar(1.0, -theta * lam)),
        );
        let mut scaled = self.eigenvectors.clone();
        for (col, phase) in phases.iter().enumerate() {
            for entry in scaled.column_mut(col).iter_mut() {
                *entry *= phase;
            }
        }
        SquareMatrix {
            inner: scaled * self.eigenvectors.adjoint(),
        }
    }
}

/// Norm used to compare the growing product against the target unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMetric {
    Frobenius,
    PhaseInvariant,
}

/// exp(−i·theta·G) for Hermitian G, via eigendecomposition.
pub fn herm_expm(generator: &SquareMatrix, theta: f64) -> Result<SquareMatrix> {
    Ok(generator.herm_eig()?.expm(theta))
}

/// Frobenius distance sqrt(Σ |U_{jk} − V_{jk}|²).
pub fn frob_distance(u: &SquareMatrix, v: &SquareMatrix) -> Result<f64> {
    u.check_same_dim(v)?;
    Ok(u.sub(v).frob_norm())
}

/// ‖U†U − I‖_F.
pub fn unitarity_defect(u: &SquareMatrix) -> f64 {
    let gram = u.adjoint().mul(u);
    gram.sub(&SquareMatrix::identity(u.dim())).frob_norm()
}

fn check_unitary(u: &SquareMatrix) -> Result<()> {
    let defect = unitarity_defect(u);
    if defect > TOL_UNITARY {
        return Err(Error::NotUnitary {
            defect,
            tol: TOL_UNITARY,
        });
    }
    Ok(())
}

/// Normalized agreement between two unitaries, in [0, 1]; 1 means exact
/// match (frobenius) or match up to a global phase (phase-invariant).
pub fn score(u: &SquareMatrix, v: &SquareMatrix, metric: MatchMetric) -> Result<f64> {
    u.check_same_dim(v)?;
    check_unitary(u)?;
    check_unitary(v)?;
    let d = u.dim() as f64;
    let s = match metric {
        // max ‖U−V‖_F over unitary pairs is 2√d
        MatchMetric::Frobenius => 1.0 - frob_distance(u, v)? / (2.0 * d.sqrt()),
        MatchMetric::PhaseInvariant => u.adjoint().mul(v).trace().norm() / d,
    };
    Ok(s.clamp(0.0, 1.0))
}
