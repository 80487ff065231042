//! Experiment configuration: system, dictionary, training and test
//! protocols, analysis options. One JSON file fully determines a run.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisOptions;
use crate::dictionary::{build_dictionary, Dictionary, DictionaryKind, DictionarySpec};
use crate::dynamics::{generate_training_set, InputSignal, SystemModel, Trajectory};
use crate::edmd::{assemble, fit, fit_with_control, KoopmanModel};
use crate::error::StageExt;
use crate::ingest::estimate_velocity;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingProtocol {
    pub n_traj: usize,
    pub duration: f64,
    pub dt: f64,
    /// Trajectory `i` is driven by `signals[i % signals.len()]`.
    pub signals: Vec<InputSignal>,
    pub seed: u64,
    /// When set, `x2` is replaced by a Savitzky–Golay estimate from `x1`
    /// with this window, as for angle-only measurements.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity_window: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestProtocol {
    #[serde(default)]
    pub initial_conditions: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<InputSignal>,
    /// Prediction horizon [s].
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub system: SystemModel,
    pub dictionary: DictionarySpec,
    pub training: TrainingProtocol,
    pub test: TestProtocol,
    #[serde(default)]
    pub analysis: AnalysisOptions,
}

impl ExperimentConfig {
    /// Autonomous pendulum protocol: 100 basin-sampled trajectories of 3 s
    /// at Δt = 0.01 s, test from (7π/8, 0) over 10 s.
    pub fn pendulum(size: usize, seed: u64) -> Self {
        ExperimentConfig {
            system: SystemModel::pendulum(),
            dictionary: DictionarySpec::new(DictionaryKind::Pendulum, size),
            training: TrainingProtocol {
                n_traj: 100,
                duration: 3.0,
                dt: 0.01,
                signals: vec![InputSignal::Zero],
                seed,
                velocity_window: None,
            },
            test: TestProtocol {
                initial_conditions: vec![vec![7.0 * PI / 8.0, 0.0]],
                signal: None,
                horizon: 10.0,
            },
            analysis: AnalysisOptions::default(),
        }
    }

    /// Duffing protocol: 100 trajectories from `[−2, 2]²`, 3 s at 0.01 s.
    pub fn duffing(size: usize, seed: u64) -> Self {
        let mut cfg = Self::pendulum(size, seed);
        cfg.system = SystemModel::duffing();
        cfg.dictionary = DictionarySpec::new(DictionaryKind::Duffing, size);
        cfg.test.initial_conditions = vec![vec![-1.5, 1.0]];
        cfg
    }

    /// Replaces the zero input by uniform random inputs in `[−1, 1]`.
    pub fn with_random_input(mut self) -> Self {
        self.training.signals = vec![InputSignal::UniformRandom { low: -1.0, high: 1.0 }];
        self
    }

    /// Golf robot with the default physical parameters: chirp, sine and step
    /// excitations at two amplitudes, 10 s at 1 kHz, velocities estimated
    /// from the angle. The test input is a held-out chirp from rest.
    pub fn golf(seed: u64) -> Self {
        let duration = 10.0;
        let mut signals = Vec::new();
        for amplitude in [0.1, 0.2] {
            signals.push(InputSignal::Chirp {
                amplitude,
                f0: 0.1,
                f1: 5.0,
                duration,
            });
        }
        for amplitude in [0.1, 0.2] {
            signals.push(InputSignal::Sine {
                amplitude,
                frequency: 1.0,
            });
        }
        for amplitude in [0.1, 0.2] {
            signals.push(InputSignal::Step {
                amplitude,
                step_time: 1.0,
            });
        }
        ExperimentConfig {
            system: SystemModel::golf(),
            dictionary: DictionarySpec::new(DictionaryKind::Golf, 4),
            training: TrainingProtocol {
                n_traj: signals.len(),
                duration,
                dt: 0.001,
                signals,
                seed,
                velocity_window: Some(51),
            },
            test: TestProtocol {
                initial_conditions: vec![vec![0.0, 0.0]],
                signal: Some(InputSignal::chirp(0.15, duration)),
                horizon: duration,
            },
            analysis: AnalysisOptions::default(),
        }
    }

    /// Preset by system name.
    pub fn preset(system: &str, size: Option<usize>, seed: u64) -> Result<Self> {
        match system {
            "pendulum" => Ok(Self::pendulum(size.unwrap_or(6), seed)),
            "duffing" => Ok(Self::duffing(size.unwrap_or(6), seed)),
            "golf" => Ok(Self::golf(seed)),
            other => Err(Error::InvalidArgument(format!(
                "unknown system `{other}` (expected pendulum, duffing or golf)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        let t = &self.training;
        if t.n_traj == 0 {
            return Err(Error::InvalidArgument("training.n_traj must be at least 1".into()));
        }
        if !(t.duration > 0.0 && t.dt > 0.0 && t.duration.is_finite() && t.dt.is_finite()) {
            return Err(Error::InvalidArgument("training duration and dt must be positive".into()));
        }
        if t.signals.is_empty() {
            return Err(Error::InvalidArgument("training.signals is empty".into()));
        }
        for s in &t.signals {
            s.validate()?;
        }
        if let Some(w) = t.velocity_window {
            if w < 3 || w % 2 == 0 {
                return Err(Error::InvalidArgument(format!(
                    "training.velocity_window must be odd and ≥ 3, got {w}"
                )));
            }
        }
        if !(self.test.horizon > 0.0) {
            return Err(Error::InvalidArgument("test.horizon must be positive".into()));
        }
        for x0 in &self.test.initial_conditions {
            if x0.len() != 2 || x0.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("invalid test initial condition {x0:?}")));
            }
        }
        if let Some(s) = &self.test.signal {
            s.validate()?;
        }
        self.dictionary()?;
        Ok(())
    }

    pub fn dictionary(&self) -> Result<Dictionary> {
        let mut spec = self.dictionary.clone();
        if let SystemModel::Golf(p) = &self.system {
            spec.parameters.golf.get_or_insert_with(|| p.clone());
        }
        build_dictionary(&spec)
    }

    /// Whether the training data carries an input.
    pub fn controlled(&self) -> bool {
        self.training.signals.iter().any(|s| !s.is_zero())
    }

    pub fn test_steps(&self) -> usize {
        (self.test.horizon / self.training.dt).round() as usize
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!(
            "{}: {e}",
            path.display()
        )))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Simulated training trajectories, with estimated velocities when the
    /// protocol asks for them.
    pub fn training_data(&self) -> Result<Vec<Trajectory>> {
        let t = &self.training;
        let mut set = generate_training_set(&self.system, t.n_traj, t.duration, t.dt, &t.signals, t.seed)
            .stage("generate")?;
        if let Some(w) = t.velocity_window {
            for traj in &mut set {
                let (_, v) = estimate_velocity(&traj.series(0), traj.dt, w).stage("velocity estimation")?;
                traj.states.row_mut(1).copy_from_slice(&v);
            }
        }
        Ok(set)
    }

    /// Trains a model on data of this protocol.
    pub fn fit_on(&self, data: &[Trajectory]) -> Result<KoopmanModel> {
        let dict = self.dictionary().stage("dictionary")?;
        let snaps = assemble(data).stage("assemble")?;
        let mut model = if snaps.u.is_some() {
            fit_with_control(&snaps, &dict)
        } else {
            fit(&snaps, &dict)
        }
        .stage("fit")?;
        model.provenance.system = Some(self.system.name().to_string());
        model.provenance.seed = Some(self.training.seed);
        Ok(model)
    }

    /// Generates the training data and fits the model.
    pub fn train(&self) -> Result<KoopmanModel> {
        self.validate()?;
        let data = self.training_data()?;
        self.fit_on(&data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for cfg in [
            ExperimentConfig::pendulum(6, 1),
            ExperimentConfig::duffing(20, 2).with_random_input(),
            ExperimentConfig::golf(3),
        ] {
            cfg.validate().unwrap();
            let back: ExperimentConfig = serde_json::from_str(&cfg.to_json().unwrap()).unwrap();
            assert_eq!(back, cfg);
        }
        let json = ExperimentConfig::pendulum(6, 1).to_json().unwrap();
        assert!(json.contains("\"system\": \"pendulum\""));
    }

    #[test]
    fn invalid_configs() {
        let mut c = ExperimentConfig::pendulum(6, 1);
        c.training.n_traj = 0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::golf(1);
        c.dictionary.size = 5;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::golf(1);
        c.training.velocity_window = Some(50);
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::preset("lorenz", None, 0).is_err());
    }

    #[test]
    fn missing_file_names_path() {
        let e = ExperimentConfig::load(Path::new("/nonexistent/cfg.json")).unwrap_err();
        assert!(e.to_string().contains("/nonexistent/cfg.json"));
    }

    #[test]
    fn train_small_pendulum() {
        let mut c = ExperimentConfig::pendulum(6, 4);
        c.training.n_traj = 5;
        let m = c.train().unwrap();
        assert_eq!(m.size(), 6);
        assert_eq!(m.provenance.snapshot_pairs, 1500);
        assert_eq!(m.provenance.system.as_deref(), Some("pendulum"));
        assert!(m.b.is_none());
        let m = c.clone().with_random_input().train().unwrap();
        assert!(m.b.is_some());
    }
}
