//! Commutator closure of a Hermitian generator set.
//!
//! The closure basis is kept Hermitian by storing (−i)[A, B] for each
//! commutator, and orthonormal under the Hilbert–Schmidt inner product
//! tr(A†B), so every element is a valid exponent generator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{frob_distance, SquareMatrix, TOL_HERM};

/// Hilbert–Schmidt-orthonormal basis of a commutator-closed span.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LieBasis {
    pub dim_hilbert: usize,
    pub elements: Vec<SquareMatrix>,
    pub closed: bool,
    /// Maximum commutator nesting level among the basis elements.
    pub depth: usize,
    /// Parent indices (i, j) of the commutator that produced each element;
    /// `None` for the seeded generators.
    pub provenance: Vec<Option<(usize, usize)>>,
}

impl LieBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Hermitian commutator (−i)[A, B].
pub fn comm_herm(a: &SquareMatrix, b: &SquareMatrix) -> SquareMatrix {
    a.mul(b)
        .sub(&b.mul(a))
        .scale(Complex64::new(0.0, -1.0))
}

/// Subtract the projection of `m` onto the span of `basis`, in place order.
/// Returns the residual matrix.
fn orthogonalize(m: &SquareMatrix, basis: &[SquareMatrix]) -> SquareMatrix {
    let mut residual = m.clone();
    for e in basis {
        let coeff = e.hs_inner(&residual);
        residual = residual.sub(&e.scale(coeff));
    }
    residual
}

/// Breadth-first commutator expansion of `generators`.
///
/// Seeds the basis with the Gram–Schmidt-orthonormalized generators, then
/// repeatedly forms (−i)[e_i, e_j] over all pairs, appending the normalized
/// residual whenever it exceeds `tol_rank` relative to the candidate norm.
/// Stops when a full sweep adds nothing (`closed = true`) or the basis would
/// grow past `max_dim` (`closed = false`).
pub fn closure(
    generators: &[SquareMatrix],
    tol_rank: f64,
    max_dim: usize,
) -> Result<LieBasis> {
    if generators.is_empty() {
        return Err(Error::EmptyGeneratorList);
    }
    let dim = generators[0].dim();
    for g in generators {
        g.check_hermitian(TOL_HERM)?;
        generators[0].check_same_dim(g)?;
    }
    if max_dim < generators.len() {
        return Err(Error::DimensionMismatch {
            expected: generators.len(),
            found: max_dim,
        });
    }

    let mut elements: Vec<SquareMatrix> = Vec::new();
    let mut provenance: Vec<Option<(usize, usize)>> = Vec::new();
    let mut levels: Vec<usize> = Vec::new();

    // Seed: orthonormalized generators; dependent generators are dropped.
    for g in generators {
        let norm = g.frob_norm();
        if norm <= tol_rank {
            continue;
        }
        let residual = orthogonalize(g, &elements);
        let rnorm = residual.frob_norm();
        if rnorm > tol_rank * norm {
            elements.push(residual.scale(Complex64::new(1.0 / rnorm, 0.0)));
            provenance.push(None);
            levels.push(0);
        }
    }
    if elements.is_empty() {
        return Err(Error::EmptyGeneratorList);
    }

    let mut closed = true;
    'sweeps: loop {
        let mut added = false;
        let len = elements.len();
        for i in 0..len {
            for j in (i + 1)..len {
                let cand = comm_herm(&elements[i], &elements[j]);
                let cnorm = cand.frob_norm();
                if cnorm <= tol_rank {
                    continue;
                }
                let residual = orthogonalize(&cand, &elements);
                let rnorm = residual.frob_norm();
                if rnorm > tol_rank * cnorm {
                    if elements.len() >= max_dim {
                        closed = false;
                        break 'sweeps;
                    }
                    elements.push(residual.scale(Complex64::new(1.0 / rnorm, 0.0)));
                    provenance.push(Some((i, j)));
                    levels.push(levels[i].max(levels[j]) + 1);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }

    Ok(LieBasis {
        dim_hilbert: dim,
        depth: levels.iter().copied().max().unwrap_or(0),
        elements,
        closed,
        provenance,
    })
}

/// Orthonormalize the generators without expanding commutators, for the
/// restricted candidate set that searches over the raw Hamiltonian
/// generators only. `closed` reports whether the span happens to be
/// commutator-closed already.
pub fn span_only(generators: &[SquareMatrix], tol_rank: f64) -> Result<LieBasis> {
    if generators.is_empty() {
        return Err(Error::EmptyGeneratorList);
    }
    let dim = generators[0].dim();
    let mut elements: Vec<SquareMatrix> = Vec::new();
    let mut provenance: Vec<Option<(usize, usize)>> = Vec::new();
    for g in generators {
        g.check_hermitian(TOL_HERM)?;
        generators[0].check_same_dim(g)?;
        let norm = g.frob_norm();
        if norm <= tol_rank {
            continue;
        }
        let residual = orthogonalize(g, &elements);
        let rnorm = residual.frob_norm();
        if rnorm > tol_rank * norm {
            elements.push(residual.scale(Complex64::new(1.0 / rnorm, 0.0)));
            provenance.push(None);
        }
    }
    if elements.is_empty() {
        return Err(Error::EmptyGeneratorList);
    }
    let mut closed = true;
    'outer: for (i, a) in elements.iter().enumerate() {
        for b in &elements[i + 1..] {
            let cand = comm_herm(a, b);
            let cnorm = cand.frob_norm();
            if cnorm <= tol_rank {
                continue;
            }
            if orthogonalize(&cand, &elements).frob_norm() > 1e-8 * cnorm {
                closed = false;
                break 'outer;
            }
        }
    }
    Ok(LieBasis {
        dim_hilbert: dim,
        elements,
        closed,
        depth: 0,
        provenance,
    })
}

/// Expand a Hermitian matrix in the basis: coefficients c_i = ⟨e_i, A⟩ and
/// the Frobenius norm of what is left outside the span.
pub fn project(a: &SquareMatrix, basis: &LieBasis) -> Result<(Vec<f64>, f64)> {
    a.check_hermitian(TOL_HERM)?;
    if a.dim() != basis.dim_hilbert {
        return Err(Error::DimensionMismatch {
            expected: basis.dim_hilbert,
            found: a.dim(),
        });
    }
    let coeffs: Vec<f64> = basis
        .elements
        .iter()
        .map(|e| e.hs_inner(a).re)
        .collect();
    let mut recon = SquareMatrix::zeros(a.dim());
    for (c, e) in coeffs.iter().zip(&basis.elements) {
        recon = recon.add(&e.scale(Complex64::new(*c, 0.0)));
    }
    let residual = frob_distance(a, &recon)?;
    Ok((coeffs, residual))
}
