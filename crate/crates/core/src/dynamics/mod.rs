//! Benchmark systems, fixed-step simulation and training-data generation.

mod integrate;
mod sampling;
mod signal;
mod systems;
mod trajectory;

pub use integrate::{rk4_step, sample_count, simulate};
pub use sampling::{generate_training_set, pendulum_energy, sample_initial_conditions};
pub use signal::InputSignal;
pub use systems::{
    duffing_rhs, golf_damping, golf_rhs, pendulum_rhs, Dynamics, FnDynamics, GolfParameters, SystemModel,
    DUFFING_DAMPING, PENDULUM_DAMPING,
};
pub use trajectory::{
    fmt_f64, load_trajectories, save_trajectory_set, write_csv_table, ManifestEntry, Trajectory,
    TrajectoryManifest, MANIFEST_FILE,
};
