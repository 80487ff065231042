use nalgebra::{DMatrix, DVector};

use super::KoopmanModel;
use crate::{Error, Result};

/// Output of [`predict_straight`].
#[derive(Debug, Clone, PartialEq)]
pub struct StraightPrediction {
    /// `N × (steps + 1)`
    pub lifted: DMatrix<f64>,
    /// `n × (steps + 1)`
    pub states: DMatrix<f64>,
}

fn check_inputs(model: &KoopmanModel, u_seq: Option<&DMatrix<f64>>, steps: usize) -> Result<()> {
    match (&model.b, u_seq) {
        (Some(b), Some(u)) => {
            if u.nrows() != b.ncols() {
                return Err(Error::Dimension(format!(
                    "input sequence has {} rows, model has p = {}",
                    u.nrows(),
                    b.ncols()
                )));
            }
            if u.ncols() < steps {
                return Err(Error::InvalidArgument(format!(
                    "input sequence has {} samples, {steps} steps requested",
                    u.ncols()
                )));
            }
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("input sequence".into()));
            }
            Ok(())
        }
        (Some(_), None) if steps > 0 => Err(Error::InvalidArgument(
            "model has an input matrix, an input sequence is required".into(),
        )),
        (None, Some(_)) => Err(Error::InvalidArgument(
            "model has no input matrix but an input sequence was given".into(),
        )),
        _ => Ok(()),
    }
}

fn input_at(u_seq: Option<&DMatrix<f64>>, k: usize) -> Option<Vec<f64>> {
    u_seq.map(|u| u.column(k).iter().copied().collect())
}

/// Lifts `x0` once and iterates the linear model `steps` times.
pub fn predict_straight(
    model: &KoopmanModel,
    x0: &[f64],
    u_seq: Option<&DMatrix<f64>>,
    steps: usize,
) -> Result<StraightPrediction> {
    check_inputs(model, u_seq, steps)?;
    let n_obs = model.size();
    let n = model.state_dim();
    let mut lifted = DMatrix::zeros(n_obs, steps + 1);
    let mut z = model.dictionary.eval(x0)?;
    lifted.set_column(0, &z);
    for k in 0..steps {
        z = model.step(&z, input_at(u_seq, k).as_deref());
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::PredictionDiverged { step: k + 1 });
        }
        lifted.set_column(k + 1, &z);
    }
    let states = lifted.rows(0, n).into_owned();
    Ok(StraightPrediction { lifted, states })
}

/// Projects back to the state and re-lifts at every step:
/// `x̂_{k+1} = P (K_t Ψ(x̂_k) + B_t u_k)`.
pub fn predict_corrected(
    model: &KoopmanModel,
    x0: &[f64],
    u_seq: Option<&DMatrix<f64>>,
    steps: usize,
) -> Result<DMatrix<f64>> {
    check_inputs(model, u_seq, steps)?;
    let n = model.state_dim();
    let mut states = DMatrix::zeros(n, steps + 1);
    let mut z = model.dictionary.eval(x0)?;
    states.set_column(0, &DVector::from_column_slice(x0));
    let mut x = vec![0.0; n];
    for k in 0..steps {
        let next = model.step(&z, input_at(u_seq, k).as_deref());
        x.copy_from_slice(&next.as_slice()[..n]);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::PredictionDiverged { step: k + 1 });
        }
        states.set_column(k + 1, &DVector::from_column_slice(&x));
        if k + 1 < steps {
            model.dictionary.eval_into(&x, z.as_mut_slice());
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::PredictionDiverged { step: k + 1 });
            }
        }
    }
    Ok(states)
}
