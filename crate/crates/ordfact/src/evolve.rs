//! Target propagator construction.
//!
//! The time-ordered propagator U(t) of a generator-decomposed Hamiltonian
//! is built on a uniform grid with a midpoint-exponential integrator:
//! each step multiplies exp(−i·H(midpoint)·δ) on the left, so the grid
//! table is unitary up to the accuracy of the Hermitian exponential.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{frob_distance, herm_expm, SquareMatrix, TOL_HERM};

/// Real scalar coefficient h_n(t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoefficientFunction {
    Constant { value: f64 },
    /// Σ_j a_j t^j with a_j listed from degree 0 upward.
    Polynomial { coefficients: Vec<f64> },
    /// a·cos(ωt + φ)
    Sinusoid { amplitude: f64, frequency: f64, phase: f64 },
    /// Piecewise-linear interpolation of (t, value) samples; evaluation
    /// outside the sample range is an error.
    Table { samples: Vec<(f64, f64)> },
}

impl CoefficientFunction {
    pub fn validate(&self) -> Result<()> {
        if let CoefficientFunction::Table { samples } = self {
            if samples.is_empty() {
                return Err(Error::ParamOutOfBounds {
                    reason: "table coefficient needs at least one sample".into(),
                });
            }
            for pair in samples.windows(2) {
                if pair[1].0 <= pair[0].0 {
                    return Err(Error::ParamOutOfBounds {
                        reason: format!(
                            "table sample times must be strictly increasing ({} then {})",
                            pair[0].0, pair[1].0
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            CoefficientFunction::Constant { value } => Ok(*value),
            CoefficientFunction::Polynomial { coefficients } => Ok(coefficients
                .iter()
                .rev()
                .fold(0.0, |acc, &a| acc * t + a)),
            CoefficientFunction::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => Ok(amplitude * (frequency * t + phase).cos()),
            CoefficientFunction::Table { samples } => {
                let (t0, _) = samples[0];
                let (t1, _) = samples[samples.len() - 1];
                if t < t0 || t > t1 {
                    return Err(Error::OutOfTableRange { t, min: t0, max: t1 });
                }
                let idx = samples.partition_point(|&(st, _)| st <= t);
                if idx == samples.len() {
                    return Ok(samples[samples.len() - 1].1);
                }
                let (ta, va) = samples[idx - 1];
                let (tb, vb) = samples[idx];
                let w = (t - ta) / (tb - ta);
                Ok(va + w * (vb - va))
            }
        }
    }
}

/// Hamiltonian H(t) = Σ_n h_n(t) G_n.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub dim: usize,
    pub generators: Vec<SquareMatrix>,
    pub coefficients: Vec<CoefficientFunction>,
}

impl HamiltonianSpec {
    pub fn new(
        generators: Vec<SquareMatrix>,
        coefficients: Vec<CoefficientFunction>,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::EmptyGeneratorList);
        }
        if generators.len() != coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: generators.len(),
                found: coefficients.len(),
            });
        }
        let dim = generators[0].dim();
        for g in &generators {
            g.check_hermitian(TOL_HERM)?;
            if g.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: g.dim(),
                });
            }
        }
        for c in &coefficients {
            c.validate()?;
        }
        Ok(Self {
            dim,
            generators,
            coefficients,
        })
    }
}

/// Σ_n h_n(t)·G_n.
pub fn hamiltonian_at(spec: &HamiltonianSpec, t: f64) -> Result<SquareMatrix> {
    let mut h = SquareMatrix::zeros(spec.dim);
    for (g, c) in spec.generators.iter().zip(&spec.coefficients) {
        let value = c.eval(t)?;
        h = h.add(&g.scale(num_complex::Complex64::new(value, 0.0)));
    }
    Ok(h)
}

/// The target U(t_k) on a uniform grid t_k = k·t_final/K.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropagatorTable {
    pub t_final: f64,
    pub step_count: usize,
    pub unitaries: Vec<SquareMatrix>,
    /// Frobenius distance between the final unitary at the coarse and the
    /// kept (doubled) resolution.
    pub estimated_error: f64,
}

impl PropagatorTable {
    pub fn dim(&self) -> usize {
        self.unitaries[0].dim()
    }

    pub fn spacing(&self) -> f64 {
        self.t_final / self.step_count as f64
    }

    pub fn grid_time(&self, k: usize) -> f64 {
        k as f64 * self.t_final / self.step_count as f64
    }
}

/// Midpoint-exponential stepping at a fixed resolution; entry k is U(t_k).
pub fn propagate_steps(
    spec: &HamiltonianSpec,
    t_final: f64,
    steps: usize,
) -> Result<Vec<SquareMatrix>> {
    if steps < 1 {
        return Err(Error::InvalidStepCount);
    }
    if !t_final.is_finite() || t_final <= 0.0 {
        return Err(Error::ParamOutOfBounds {
            reason: format!("t_final must be positive, got {t_final}"),
        });
    }
    let delta = t_final / steps as f64;
    let mut unitaries = Vec::with_capacity(steps + 1);
    unitaries.push(SquareMatrix::identity(spec.dim));
    for k in 0..steps {
        let midpoint = (k as f64 + 0.5) * delta;
        let h_mid = hamiltonian_at(spec, midpoint)?;
        let step = herm_expm(&h_mid, delta)?;
        let next = step.mul(&unitaries[k]);
        unitaries.push(next);
    }
    Ok(unitaries)
}

/// Build the grid table, doubling the requested resolution for the stored
/// grid and using the coarse run only for the error estimate.
pub fn propagate(spec: &HamiltonianSpec, t_final: f64, k: usize) -> Result<PropagatorTable> {
    let coarse = propagate_steps(spec, t_final, k)?;
    let fine = propagate_steps(spec, t_final, 2 * k)?;
    let estimated_error = frob_distance(
        coarse.last().expect("nonempty"),
        fine.last().expect("nonempty"),
    )?;
    Ok(PropagatorTable {
        t_final,
        step_count: 2 * k,
        unitaries: fine,
        estimated_error,
    })
}

/// The grid unitary nearest to `t`, together with the snapped grid time.
pub fn target_at(table: &PropagatorTable, t: f64) -> Result<(&SquareMatrix, f64)> {
    let spacing = table.spacing();
    if t < -0.5 * spacing || t > table.t_final + 0.5 * spacing {
        return Err(Error::OffGrid {
            t,
            t_final: table.t_final,
        });
    }
    let idx = ((t / spacing).round() as usize).min(table.step_count);
    Ok((&table.unitaries[idx], table.grid_time(idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::testutil::{pauli_x, pauli_z, random_hermitian};
    use crate::matrix::unitarity_defect;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn driven_qubit() -> HamiltonianSpec {
        HamiltonianSpec::new(
            vec![pauli_z(), pauli_x()],
            vec![
                CoefficientFunction::Constant { value: 1.0 },
                CoefficientFunction::Sinusoid {
                    amplitude: 1.0,
                    frequency: 5.0,
                    phase: 0.0,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn hamiltonian_at_constant() {
        let spec = HamiltonianSpec::new(
            vec![pauli_z()],
            vec![CoefficientFunction::Constant { value: 0.5 }],
        )
        .unwrap();
        let h = hamiltonian_at(&spec, 3.0).unwrap();
        assert!(frob_distance(&h, &pauli_z().scale(num_complex::Complex64::new(0.5, 0.0)))
            .unwrap()
            < 1e-15);
    }

    #[test]
    fn hamiltonian_at_sinusoid_t0() {
        let spec = HamiltonianSpec::new(
            vec![pauli_x()],
            vec![CoefficientFunction::Sinusoid {
                amplitude: 1.0,
                frequency: 2.0,
                phase: 0.0,
            }],
        )
        .unwrap();
        let h = hamiltonian_at(&spec, 0.0).unwrap();
        assert!(frob_distance(&h, &pauli_x()).unwrap() < 1e-15);
    }

    #[test]
    fn table_coefficient_interpolates() {
        // independent linear-interpolation oracle on {(0,0),(1,2)} at t=0.25
        let c = CoefficientFunction::Table {
            samples: vec![(0.0, 0.0), (1.0, 2.0)],
        };
        assert_abs_diff_eq!(c.eval(0.25).unwrap(), 0.5, epsilon = 1e-15);
        assert!(matches!(c.eval(1.5), Err(Error::OutOfTableRange { .. })));
        assert!(matches!(c.eval(-0.1), Err(Error::OutOfTableRange { .. })));
    }

    #[test]
    fn table_requires_increasing_times() {
        let c = CoefficientFunction::Table {
            samples: vec![(0.0, 0.0), (0.0, 1.0)],
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn constant_hamiltonian_reduces_to_single_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2, 3] {
            let g = random_hermitian(&mut rng, dim, 1.0);
            let spec = HamiltonianSpec::new(
                vec![g.clone()],
                vec![CoefficientFunction::Constant { value: 1.0 }],
            )
            .unwrap();
            let table = propagate(&spec, 1.3, 64).unwrap();
            let exact = herm_expm(&g, 1.3).unwrap();
            assert!(
                frob_distance(table.unitaries.last().unwrap(), &exact).unwrap() < 1e-10
            );
        }
    }

    #[test]
    fn commuting_family_integrates_coefficient() {
        // H(t) = f(t)·σ_z with f polynomial: U(t) = exp(−i σ_z ∫₀ᵗ f)
        let f = CoefficientFunction::Polynomial {
            coefficients: vec![0.3, -1.0, 2.0],
        };
        let spec = HamiltonianSpec::new(vec![pauli_z()], vec![f]).unwrap();
        let t = 1.0;
        let integral = 0.3 * t + -1.0 / 2.0 * t * t + 2.0 / 3.0 * t * t * t;
        let table = propagate(&spec, t, 2048).unwrap();
        let exact = herm_expm(&pauli_z(), integral).unwrap();
        assert!(frob_distance(table.unitaries.last().unwrap(), &exact).unwrap() < 5e-8);
    }

    #[test]
    fn richardson_self_consistency() {
        let spec = driven_qubit();
        let u = |steps: usize| {
            propagate_steps(&spec, 1.0, steps)
                .unwrap()
                .last()
                .unwrap()
                .clone()
        };
        // step-doubling disagreement shrinks ~4x per doubling for a
        // second-order method
        let d1 = frob_distance(&u(512), &u(1024)).unwrap();
        let d2 = frob_distance(&u(1024), &u(2048)).unwrap();
        let d3 = frob_distance(&u(2048), &u(4096)).unwrap();
        assert!(d1 <= 4.5 * d2 && d2 <= 4.5 * d3);
        assert!(d1 / d2 > 3.4 && d2 / d3 > 3.4);
    }

    #[test]
    fn second_order_convergence() {
        let spec = driven_qubit();
        let reference = propagate_steps(&spec, 1.0, 8192).unwrap().last().unwrap().clone();
        let mut errors = Vec::new();
        for steps in [256, 512, 1024, 2048] {
            let u = propagate_steps(&spec, 1.0, steps).unwrap().last().unwrap().clone();
            errors.push(frob_distance(&u, &reference).unwrap());
        }
        for pair in errors.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!(
                (3.4..=4.6).contains(&ratio),
                "convergence ratio {ratio} out of second-order band"
            );
        }
    }

    #[test]
    fn grid_is_unitary() {
        let spec = driven_qubit();
        let table = propagate(&spec, 1.0, 128).unwrap();
        assert!(frob_distance(&table.unitaries[0], &SquareMatrix::identity(2)).unwrap() == 0.0);
        for u in &table.unitaries {
            assert!(unitarity_defect(u) <= 1e-9);
        }
    }

    #[test]
    fn stepping_is_reproducible() {
        let spec = driven_qubit();
        let a = propagate_steps(&spec, 1.0, 64).unwrap();
        let b = propagate_steps(&spec, 1.0, 64).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x, y);
        }
        // composition: each entry is exactly the one-step product of its
        // predecessor, by construction of the recursion
        let delta = 1.0 / 64.0;
        for k in 0..64 {
            let h_mid = hamiltonian_at(&spec, (k as f64 + 0.5) * delta).unwrap();
            let step = herm_expm(&h_mid, delta).unwrap();
            assert_eq!(a[k + 1], step.mul(&a[k]));
        }
    }

    #[test]
    fn target_at_snaps_to_grid() {
        let spec = driven_qubit();
        let table = propagate(&spec, 1.0, 2).unwrap(); // stored grid K = 4
        let (u0, t0) = target_at(&table, 0.0).unwrap();
        assert_eq!(t0, 0.0);
        assert!(frob_distance(u0, &SquareMatrix::identity(2)).unwrap() == 0.0);
        let (_, tf) = target_at(&table, 1.0).unwrap();
        assert_eq!(tf, 1.0);
        let (_, ts) = target_at(&table, 0.26).unwrap();
        assert_abs_diff_eq!(ts, 0.25, epsilon = 1e-15);
        assert!(matches!(
            target_at(&table, 1.4),
            Err(Error::OffGrid { .. })
        ));
    }

    #[test]
    fn estimated_error_is_small_for_fine_grids() {
        let spec = driven_qubit();
        let table = propagate(&spec, 1.0, 1024).unwrap();
        assert!(table.estimated_error < 1e-6);
        assert_eq!(table.step_count, 2048);
    }
}
