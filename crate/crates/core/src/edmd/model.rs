use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dictionary::{Dictionary, ProjectionMatrix};
use crate::{Error, Result};

/// Fitted discrete-time lifted model `z_{k+1} = K_t z_k (+ B_t u_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct KoopmanModel {
    pub k: DMatrix<f64>,
    pub b: Option<DMatrix<f64>>,
    pub dt: f64,
    pub dictionary: Dictionary,
    /// `‖Ψ(X′) − K_t Ψ(X) − B_t U‖_F / ‖Ψ(X′)‖_F` on the training data.
    pub fit_residual: f64,
    pub provenance: Provenance,
}

/// How the model was obtained.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub trajectories: usize,
    pub snapshot_pairs: usize,
    pub pinv_rtol: f64,
}

impl KoopmanModel {
    pub fn new(
        k: DMatrix<f64>,
        b: Option<DMatrix<f64>>,
        dt: f64,
        dictionary: Dictionary,
        fit_residual: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        let n_obs = dictionary.len();
        if k.shape() != (n_obs, n_obs) {
            return Err(Error::Dimension(format!(
                "K_t is {}×{} for a dictionary of {n_obs} observables",
                k.nrows(),
                k.ncols()
            )));
        }
        if let Some(b) = &b {
            if b.nrows() != n_obs || b.ncols() == 0 {
                return Err(Error::Dimension(format!(
                    "B_t is {}×{} for a dictionary of {n_obs} observables",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
        }
        if !(fit_residual >= 0.0) {
            return Err(Error::InvalidArgument(format!("fit residual must be non-negative, got {fit_residual}")));
        }
        Ok(KoopmanModel {
            k,
            b,
            dt,
            dictionary,
            fit_residual,
            provenance,
        })
    }

    /// Lifted dimension `N`.
    pub fn size(&self) -> usize {
        self.k.nrows()
    }

    pub fn state_dim(&self) -> usize {
        self.dictionary.state_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.b.as_ref().map_or(0, |b| b.ncols())
    }

    pub fn projection(&self) -> ProjectionMatrix {
        self.dictionary.projection()
    }

    /// `K_t z + B_t u`.
    pub fn step(&self, z: &DVector<f64>, u: Option<&[f64]>) -> DVector<f64> {
        let mut next = &self.k * z;
        if let (Some(b), Some(u)) = (&self.b, u) {
            next += b * DVector::from_column_slice(u);
        }
        next
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    dt: f64,
    state_dim: usize,
    lifted_dim: usize,
    input_dim: usize,
    k: Vec<Vec<f64>>,
    #[serde(default)]
    b: Option<Vec<Vec<f64>>>,
    dictionary: Dictionary,
    fit_residual: f64,
    #[serde(default)]
    provenance: Provenance,
}

pub(crate) fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub(crate) fn from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension(format!("{what} has rows of unequal length")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl From<KoopmanModel> for ModelRecord {
    fn from(m: KoopmanModel) -> Self {
        ModelRecord {
            dt: m.dt,
            state_dim: m.state_dim(),
            lifted_dim: m.size(),
            input_dim: m.input_dim(),
            k: rows_of(&m.k),
            b: m.b.as_ref().map(rows_of),
            dictionary: m.dictionary,
            fit_residual: m.fit_residual,
            provenance: m.provenance,
        }
    }
}

impl TryFrom<ModelRecord> for KoopmanModel {
    type Error = Error;

    fn try_from(r: ModelRecord) -> Result<Self> {
        let k = from_rows(&r.k, "K_t")?;
        let b = r.b.as_deref().map(|b| from_rows(b, "B_t")).transpose()?;
        if r.state_dim != r.dictionary.state_dim() || r.lifted_dim != r.dictionary.len() {
            return Err(Error::Dimension(format!(
                "model header says n = {}, N = {} but the dictionary has n = {}, N = {}",
                r.state_dim,
                r.lifted_dim,
                r.dictionary.state_dim(),
                r.dictionary.len()
            )));
        }
        let m = KoopmanModel::new(k, b, r.dt, r.dictionary, r.fit_residual, r.provenance)?;
        if m.input_dim() != r.input_dim {
            return Err(Error::Dimension(format!(
                "model header says p = {} but B_t has {} columns",
                r.input_dim,
                m.input_dim()
            )));
        }
        Ok(m)
    }
}
