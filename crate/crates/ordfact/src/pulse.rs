//! Parametric driving-pulse families F_q(t_q, t_{q−1}).
//!
//! Every family vanishes at zero slice duration, which is what makes a
//! pulse admissible for an ordered factorization step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Functional form of the pulse, as a function of the slice duration δt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PulseKind {
    /// F = α·δt
    LinearRate,
    /// F = α·δt^n, n ≥ 1
    Power { n: u32 },
    /// F = α·(1 − cos δt)
    RaisedCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseFamily {
    #[serde(flatten)]
    pub kind: PulseKind,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

impl PulseFamily {
    pub fn new(kind: PulseKind, alpha_min: f64, alpha_max: f64) -> Result<Self> {
        let family = Self {
            kind,
            alpha_min,
            alpha_max,
        };
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha_min.is_finite()
            || !self.alpha_max.is_finite()
            || self.alpha_min >= self.alpha_max
        {
            return Err(Error::ParamOutOfBounds {
                reason: format!(
                    "alpha bounds must satisfy min < max, got [{}, {}]",
                    self.alpha_min, self.alpha_max
                ),
            });
        }
        if let PulseKind::Power { n } = self.kind {
            if n < 1 {
                return Err(Error::ParamOutOfBounds {
                    reason: "power exponent n must be at least 1".into(),
                });
            }
        }
        Ok(())
    }

    /// Pulse parameters for a given amplitude, carrying the exponent when
    /// the family is a power law.
    pub fn params(&self, alpha: f64) -> PulseParams {
        PulseParams {
            alpha,
            n: match self.kind {
                PulseKind::Power { n } => Some(n),
                _ => None,
            },
        }
    }
}

/// A concrete choice of pulse amplitude (and exponent, for power pulses).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<u32>,
}

/// Evaluate F(δt) for the family; F(0) = 0 exactly for every kind.
pub fn eval_pulse(family: &PulseFamily, params: &PulseParams, dt: f64) -> Result<f64> {
    if dt < 0.0 {
        return Err(Error::NegativeDuration { dt });
    }
    if params.alpha < family.alpha_min || params.alpha > family.alpha_max {
        return Err(Error::ParamOutOfBounds {
            reason: format!(
                "alpha {} outside bounds [{}, {}]",
                params.alpha, family.alpha_min, family.alpha_max
            ),
        });
    }
    let value = match family.kind {
        PulseKind::LinearRate => params.alpha * dt,
        PulseKind::Power { n } => {
            let n = match params.n {
                Some(pn) if pn == n && pn >= 1 => pn,
                _ => {
                    return Err(Error::ParamOutOfBounds {
                        reason: format!("power pulse requires n = {n} in the parameters"),
                    })
                }
            };
            params.alpha * dt.powi(n as i32)
        }
        PulseKind::RaisedCosine => params.alpha * (1.0 - dt.cos()),
    };
    Ok(if dt == 0.0 { 0.0 } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn families() -> Vec<PulseFamily> {
        vec![
            PulseFamily::new(PulseKind::LinearRate, -4.0, 4.0).unwrap(),
            PulseFamily::new(PulseKind::Power { n: 2 }, -4.0, 4.0).unwrap(),
            PulseFamily::new(PulseKind::RaisedCosine, -4.0, 4.0).unwrap(),
        ]
    }

    #[test]
    fn vanishes_at_zero_duration() {
        for family in families() {
            let f = eval_pulse(&family, &family.params(3.3), 0.0).unwrap();
            assert_eq!(f, 0.0);
        }
    }

    #[test]
    fn linear_rate_value() {
        let family = PulseFamily::new(PulseKind::LinearRate, 0.0, 4.0).unwrap();
        assert_abs_diff_eq!(
            eval_pulse(&family, &family.params(2.0), 0.5).unwrap(),
            1.0
        );
    }

    #[test]
    fn power_value() {
        let family = PulseFamily::new(PulseKind::Power { n: 2 }, 0.0, 4.0).unwrap();
        assert_abs_diff_eq!(
            eval_pulse(&family, &family.params(3.0), 2.0).unwrap(),
            12.0
        );
    }

    #[test]
    fn rejects_negative_duration_and_bad_alpha() {
        let family = PulseFamily::new(PulseKind::LinearRate, -1.0, 1.0).unwrap();
        assert!(matches!(
            eval_pulse(&family, &family.params(0.5), -0.1),
            Err(Error::NegativeDuration { .. })
        ));
        assert!(matches!(
            eval_pulse(&family, &family.params(2.0), 0.1),
            Err(Error::ParamOutOfBounds { .. })
        ));
    }

    #[test]
    fn monotone_in_duration_for_positive_alpha() {
        for family in families() {
            let params = family.params(1.5);
            let mut prev = -1.0;
            for i in 0..=64 {
                let dt = std::f64::consts::PI * i as f64 / 64.0;
                let f = eval_pulse(&family, &params, dt).unwrap();
                assert!(f >= prev, "family {:?} not monotone at dt={dt}", family.kind);
                prev = f;
            }
        }
    }

    #[test]
    fn linear_in_alpha() {
        for family in families() {
            let dt = 0.8;
            let f1 = eval_pulse(&family, &family.params(1.1), dt).unwrap();
            let f2 = eval_pulse(&family, &family.params(2.2), dt).unwrap();
            assert_abs_diff_eq!(f2, 2.0 * f1, epsilon = 1e-14);
        }
    }

    #[test]
    fn invalid_family_bounds() {
        assert!(PulseFamily::new(PulseKind::LinearRate, 1.0, 1.0).is_err());
        assert!(PulseFamily::new(PulseKind::Power { n: 0 }, 0.0, 1.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_family() -> impl Strategy<Value = PulseFamily> {
            (0u8..3, 1u32..4).prop_map(|(which, n)| {
                let kind = match which {
                    0 => PulseKind::LinearRate,
                    1 => PulseKind::Power { n },
                    _ => PulseKind::RaisedCosine,
                };
                PulseFamily::new(kind, -4.0, 4.0).unwrap()
            })
        }

        proptest! {
            #[test]
            fn always_vanishes_at_zero(family in arb_family(), alpha in -4.0..4.0f64) {
                prop_assert_eq!(
                    eval_pulse(&family, &family.params(alpha), 0.0).unwrap(),
                    0.0
                );
            }

            #[test]
            fn finite_on_valid_inputs(
                family in arb_family(),
                alpha in -4.0..4.0f64,
                dt in 0.0..10.0f64,
            ) {
                let f = eval_pulse(&family, &family.params(alpha), dt).unwrap();
                prop_assert!(f.is_finite());
            }

            #[test]
            fn odd_in_alpha(family in arb_family(), alpha in 0.0..4.0f64, dt in 0.0..10.0f64) {
                let plus = eval_pulse(&family, &family.params(alpha), dt).unwrap();
                let minus = eval_pulse(&family, &family.params(-alpha), dt).unwrap();
                prop_assert!((plus + minus).abs() <= 1e-12 * plus.abs().max(1.0));
            }
        }
    }
}
