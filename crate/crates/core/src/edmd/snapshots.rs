use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::{Error, Result};

/// Paired snapshot matrices `X`, `X′` (and `U`) gathered from one or more
/// trajectories. Column `j` of `X′` is the one-step successor of column `j`
/// of `X` within the same trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub x: DMatrix<f64>,
    pub x_next: DMatrix<f64>,
    pub u: Option<DMatrix<f64>>,
    pub dt: f64,
    pub sources: Vec<SnapshotSource>,
}

/// Where a block of columns came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSource {
    pub seed: u64,
    pub first_column: usize,
    pub pairs: usize,
}

impl SnapshotSet {
    /// Number of snapshot pairs.
    pub fn len(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.x.ncols() == 0
    }

    pub fn state_dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.u.as_ref().map_or(0, |u| u.nrows())
    }

    /// Builds a set directly from matrices, e.g. for data that is already
    /// paired.
    pub fn from_matrices(x: DMatrix<f64>, x_next: DMatrix<f64>, u: Option<DMatrix<f64>>, dt: f64) -> Result<Self> {
        if x.shape() != x_next.shape() {
            return Err(Error::Dimension(format!(
                "X is {}×{} but X′ is {}×{}",
                x.nrows(),
                x.ncols(),
                x_next.nrows(),
                x_next.ncols()
            )));
        }
        if let Some(u) = &u {
            if u.ncols() != x.ncols() {
                return Err(Error::Dimension(format!(
                    "U has {} columns, X has {}",
                    u.ncols(),
                    x.ncols()
                )));
            }
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
        }
        let pairs = x.ncols();
        Ok(SnapshotSet {
            x,
            x_next,
            u,
            dt,
            sources: vec![SnapshotSource {
                seed: 0,
                first_column: 0,
                pairs,
            }],
        })
    }
}

/// Stacks the snapshot pairs of all trajectories, trajectory by trajectory
/// and in time order within each.
pub fn assemble(trajectories: &[Trajectory]) -> Result<SnapshotSet> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::InvalidArgument("no trajectories to assemble".into()))?;
    let n = first.state_dim();
    let p = first.input_dim();
    let dt = first.dt;
    let mut total = 0;
    for (i, t) in trajectories.iter().enumerate() {
        if t.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "trajectory {i} has {} sample(s), at least 2 are needed",
                t.len()
            )));
        }
        if (t.dt - dt).abs() > 1e-12 * dt {
            return Err(Error::InvalidArgument(format!(
                "trajectory {i} has dt = {}, trajectory 0 has dt = {dt}",
                t.dt
            )));
        }
        if t.state_dim() != n || t.input_dim() != p {
            return Err(Error::Dimension(format!(
                "trajectory {i} has n = {}, p = {}, trajectory 0 has n = {n}, p = {p}",
                t.state_dim(),
                t.input_dim()
            )));
        }
        total += t.len() - 1;
    }

    let mut x = DMatrix::zeros(n, total);
    let mut x_next = DMatrix::zeros(n, total);
    let mut u = (p > 0).then(|| DMatrix::zeros(p, total));
    let mut sources = Vec::with_capacity(trajectories.len());
    let mut col = 0;
    for t in trajectories {
        let pairs = t.len() - 1;
        x.columns_mut(col, pairs).copy_from(&t.states.columns(0, pairs));
        x_next.columns_mut(col, pairs).copy_from(&t.states.columns(1, pairs));
        if let (Some(dst), Some(src)) = (u.as_mut(), t.inputs.as_ref()) {
            dst.columns_mut(col, pairs).copy_from(&src.columns(0, pairs));
        }
        sources.push(SnapshotSource {
            seed: t.seed,
            first_column: col,
            pairs,
        });
        col += pairs;
    }
    Ok(SnapshotSet {
        x,
        x_next,
        u,
        dt,
        sources,
    })
}
