use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use super::{simulate, InputSignal, SystemModel, Trajectory};
use crate::rng::{derive_seed, stream};
use crate::{Error, Result};

const MAX_TRIES_PER_SAMPLE: usize = 10_000;

/// Pendulum energy `(1 − cos x1) + x2²/2`.
pub fn pendulum_energy(x: &[f64]) -> f64 {
    (1.0 - x[0].cos()) + 0.5 * x[1] * x[1]
}

/// Random initial states for the training protocol of `system`.
///
/// Pendulum states are drawn inside the undamped separatrix (energy below
/// 2), Duffing states from `[−2, 2]²` and golf states from
/// `(−π/2, π/2) × (−5, 5)`.
pub fn sample_initial_conditions(system: &SystemModel, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let mut rng = stream(seed, "initial-conditions", 0);
    let mut out = Vec::with_capacity(count);
    match system {
        SystemModel::Pendulum { .. } => {
            let mut tries = 0;
            while out.len() < count {
                tries += 1;
                if tries > MAX_TRIES_PER_SAMPLE * count {
                    return Err(Error::SamplingFailed(tries));
                }
                let x = vec![rng.gen_range(-PI..PI), rng.gen_range(-2.0..2.0)];
                if pendulum_energy(&x) < 2.0 {
                    out.push(x);
                }
            }
        }
        SystemModel::Duffing { .. } => {
            for _ in 0..count {
                out.push(vec![rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0)]);
            }
        }
        SystemModel::Golf(_) => {
            for _ in 0..count {
                out.push(vec![rng.gen_range(-PI / 2.0..PI / 2.0), rng.gen_range(-5.0..5.0)]);
            }
        }
    }
    Ok(out)
}

/// Simulates `n_traj` trajectories from sampled initial states.
///
/// Trajectory `i` uses `signals[i % signals.len()]` and the substream seed
/// `derive_seed(seed, "trajectory", i)`, so the result does not depend on
/// the thread count.
pub fn generate_training_set(
    system: &SystemModel,
    n_traj: usize,
    duration: f64,
    dt: f64,
    signals: &[InputSignal],
    seed: u64,
) -> Result<Vec<Trajectory>> {
    system.validate()?;
    if signals.is_empty() {
        return Err(Error::InvalidArgument("at least one input signal is required".into()));
    }
    let x0s = sample_initial_conditions(system, n_traj, seed)?;
    x0s.par_iter()
        .enumerate()
        .map(|(i, x0)| {
            let signal = &signals[i % signals.len()];
            simulate(system, x0, signal, duration, dt, derive_seed(seed, "trajectory", i as u64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pendulum_samples_inside_separatrix() {
        let xs = sample_initial_conditions(&SystemModel::pendulum(), 500, 1).unwrap();
        assert_eq!(xs.len(), 500);
        assert!(xs.iter().all(|x| pendulum_energy(x) < 2.0));
    }

    #[test]
    fn duffing_and_golf_boxes() {
        let xs = sample_initial_conditions(&SystemModel::duffing(), 500, 2).unwrap();
        assert!(xs.iter().all(|x| x.iter().all(|v| (-2.0..=2.0).contains(v))));
        let xs = sample_initial_conditions(&SystemModel::golf(), 500, 2).unwrap();
        assert!(xs.iter().all(|x| x[0].abs() < PI / 2.0 && x[1].abs() < 5.0));
    }

    #[test]
    fn sampling_is_seeded() {
        let a = sample_initial_conditions(&SystemModel::pendulum(), 20, 5).unwrap();
        let b = sample_initial_conditions(&SystemModel::pendulum(), 20, 5).unwrap();
        let c = sample_initial_conditions(&SystemModel::pendulum(), 20, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(sample_initial_conditions(&SystemModel::pendulum(), 0, 5).is_err());
    }

    #[test]
    fn training_set_shape() {
        let set = generate_training_set(&SystemModel::pendulum(), 100, 3.0, 0.01, &[InputSignal::Zero], 42).unwrap();
        assert_eq!(set.len(), 100);
        assert_eq!(set.iter().map(Trajectory::len).sum::<usize>(), 30_100);
    }

    #[test]
    fn single_trajectory_equals_simulate() {
        let sig = [InputSignal::UniformRandom { low: -1.0, high: 1.0 }];
        let set = generate_training_set(&SystemModel::duffing(), 1, 1.0, 0.01, &sig, 8).unwrap();
        let x0 = sample_initial_conditions(&SystemModel::duffing(), 1, 8).unwrap();
        let t = simulate(&SystemModel::duffing(), &x0[0], &sig[0], 1.0, 0.01, derive_seed(8, "trajectory", 0)).unwrap();
        assert_eq!(set[0], t);
    }

    #[test]
    fn parallel_equals_serial() {
        let sig = [InputSignal::UniformRandom { low: -1.0, high: 1.0 }];
        let par = generate_training_set(&SystemModel::pendulum(), 16, 1.0, 0.01, &sig, 3).unwrap();
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| generate_training_set(&SystemModel::pendulum(), 16, 1.0, 0.01, &sig, 3).unwrap());
        assert_eq!(par, serial);
    }

    #[test]
    fn signal_batch_cycles() {
        let sigs = [
            InputSignal::chirp(0.1, 1.0),
            InputSignal::Sine { amplitude: 0.1, frequency: 1.0 },
            InputSignal::Step { amplitude: 0.1, step_time: 0.5 },
        ];
        let set = generate_training_set(&SystemModel::golf(), 6, 1.0, 0.001, &sigs, 1).unwrap();
        for (i, t) in set.iter().enumerate() {
            assert_eq!(t.signal.as_ref(), Some(&sigs[i % 3]));
            assert_eq!(t.len(), 1001);
        }
    }
}
