use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, unit_uniform};
use crate::{Error, Result};

/// Scalar excitation `u(t)`, a pure function of time, sample index and the
/// trajectory seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputSignal {
    Zero,
    /// One uniform draw in `[low, high]` held for the whole trajectory.
    ConstantRandom { low: f64, high: f64 },
    /// Fresh uniform draw in `[low, high]` at every sample, held over the step.
    UniformRandom { low: f64, high: f64 },
    Sine { amplitude: f64, frequency: f64 },
    Step { amplitude: f64, step_time: f64 },
    /// Linear sweep `A sin(2π (f0 + (f1 − f0) t / (2T)) t)`.
    Chirp {
        amplitude: f64,
        f0: f64,
        f1: f64,
        duration: f64,
    },
}

impl InputSignal {
    /// Chirp from 0.1 Hz to 2 Hz.
    pub fn chirp(amplitude: f64, duration: f64) -> Self {
        InputSignal::Chirp {
            amplitude,
            f0: 0.1,
            f1: 2.0,
            duration,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, InputSignal::Zero)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            InputSignal::Zero => true,
            InputSignal::ConstantRandom { low, high } | InputSignal::UniformRandom { low, high } => {
                low.is_finite() && high.is_finite() && low <= high
            }
            InputSignal::Sine { amplitude, frequency } => amplitude.is_finite() && frequency.is_finite(),
            InputSignal::Step { amplitude, step_time } => amplitude.is_finite() && step_time.is_finite(),
            InputSignal::Chirp {
                amplitude,
                f0,
                f1,
                duration,
            } => amplitude.is_finite() && f0.is_finite() && f1.is_finite() && *duration > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid input signal {self:?}")))
        }
    }

    /// `u` at sample `k`, time `t`.
    pub fn value(&self, k: usize, t: f64, seed: u64) -> f64 {
        match *self {
            InputSignal::Zero => 0.0,
            InputSignal::ConstantRandom { low, high } => {
                low + (high - low) * unit_uniform(derive_seed(seed, "input-constant", 0), 0)
            }
            InputSignal::UniformRandom { low, high } => {
                low + (high - low) * unit_uniform(derive_seed(seed, "input-samples", 0), k as u64)
            }
            InputSignal::Sine { amplitude, frequency } => amplitude * (2.0 * PI * frequency * t).sin(),
            InputSignal::Step { amplitude, step_time } => {
                if t >= step_time {
                    amplitude
                } else {
                    0.0
                }
            }
            InputSignal::Chirp {
                amplitude,
                f0,
                f1,
                duration,
            } => amplitude * (2.0 * PI * (f0 + (f1 - f0) * t / (2.0 * duration)) * t).sin(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_shapes() {
        assert_eq!(InputSignal::Zero.value(3, 1.0, 9), 0.0);
        let s = InputSignal::Step {
            amplitude: 0.5,
            step_time: 1.0,
        };
        assert_eq!(s.value(0, 0.999, 0), 0.0);
        assert_eq!(s.value(0, 1.0, 0), 0.5);
        let s = InputSignal::Sine {
            amplitude: 2.0,
            frequency: 0.25,
        };
        assert!((s.value(0, 1.0, 0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn chirp_instantaneous_frequency_sweeps() {
        let c = InputSignal::chirp(1.0, 10.0);
        // phase derivative / 2π goes from f0 at t=0 to f1 at t=T
        let phase = |t: f64| 2.0 * PI * (0.1 + 1.9 * t / 20.0) * t;
        let h = 1e-6;
        let f_start = (phase(h) - phase(0.0)) / h / (2.0 * PI);
        let f_end = (phase(10.0) - phase(10.0 - h)) / h / (2.0 * PI);
        assert!((f_start - 0.1).abs() < 1e-4);
        assert!((f_end - 2.0).abs() < 1e-4);
        assert_eq!(c.value(0, 0.0, 0), 0.0);
    }

    #[test]
    fn random_inputs_in_range_and_seeded() {
        let s = InputSignal::UniformRandom { low: -1.0, high: 1.0 };
        let a: Vec<f64> = (0..500).map(|k| s.value(k, k as f64, 11)).collect();
        let b: Vec<f64> = (0..500).map(|k| s.value(k, k as f64, 11)).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!(a.windows(2).any(|w| w[0] != w[1]));
        let c = InputSignal::ConstantRandom { low: 0.0, high: 1.0 };
        assert_eq!(c.value(0, 0.0, 4), c.value(99, 3.0, 4));
        assert_ne!(c.value(0, 0.0, 4), c.value(0, 0.0, 5));
    }

    #[test]
    fn validation() {
        assert!(InputSignal::UniformRandom { low: 1.0, high: -1.0 }.validate().is_err());
        assert!(InputSignal::chirp(1.0, 0.0).validate().is_err());
        assert!(InputSignal::chirp(1.0, 3.0).validate().is_ok());
    }
}
