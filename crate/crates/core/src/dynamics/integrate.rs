use super::{Dynamics, InputSignal, Trajectory};
use crate::{Error, Result};

/// One classical Runge–Kutta step with `u` held constant over the step.
pub fn rk4_step<D: Dynamics + ?Sized>(model: &D, x: &[f64], u: &[f64], dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
    }
    if x.len() != model.state_dim() || u.len() != model.input_dim() {
        return Err(Error::Dimension(format!(
            "rk4 step got state of length {} and input of length {}, model has n = {}, p = {}",
            x.len(),
            u.len(),
            model.state_dim(),
            model.input_dim()
        )));
    }
    let out = rk4_unchecked(model, x, u, dt);
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::IntegrationDiverged { step: 0 })
    }
}

fn rk4_unchecked<D: Dynamics + ?Sized>(model: &D, x: &[f64], u: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    model.rhs(x, u, &mut k1);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    model.rhs(&tmp, u, &mut k2);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k2[i];
    }
    model.rhs(&tmp, u, &mut k3);
    for i in 0..n {
        tmp[i] = x[i] + h * k3[i];
    }
    model.rhs(&tmp, u, &mut k4);
    (0..n)
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Number of samples `round(duration / dt) + 1`.
pub fn sample_count(duration: f64, dt: f64) -> usize {
    (duration / dt).round() as usize + 1
}

/// Fixed-step RK4 simulation from `x0` over `duration`.
///
/// Inputs are sampled at every grid point and recorded; a zero signal
/// produces an autonomous trajectory without an input matrix.
pub fn simulate<D: Dynamics + ?Sized>(
    model: &D,
    x0: &[f64],
    signal: &InputSignal,
    duration: f64,
    dt: f64,
    seed: u64,
) -> Result<Trajectory> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidArgument(format!("duration must be positive, got {duration}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
    }
    if x0.len() != model.state_dim() {
        return Err(Error::Dimension(format!(
            "initial state has length {}, model has n = {}",
            x0.len(),
            model.state_dim()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state".into()));
    }
    signal.validate()?;
    let p = model.input_dim();
    if !signal.is_zero() && p != 1 {
        return Err(Error::Dimension(format!(
            "scalar input signal given to a model with p = {p}"
        )));
    }

    let n = model.state_dim();
    let m = sample_count(duration, dt);
    let mut states = Vec::with_capacity(n * m);
    let mut inputs = Vec::with_capacity(m);
    let times: Vec<f64> = (0..m).map(|k| k as f64 * dt).collect();
    let mut u = vec![0.0; p];
    let mut x = x0.to_vec();
    for (k, &t) in times.iter().enumerate() {
        states.extend_from_slice(&x);
        let uk = signal.value(k, t, seed);
        inputs.push(uk);
        if k + 1 == m {
            break;
        }
        if p > 0 {
            u[0] = uk;
        }
        x = rk4_unchecked(model, &x, &u, dt);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged { step: k + 1 });
        }
    }
    let states = nalgebra::DMatrix::from_vec(n, m, states);
    let inputs = (!signal.is_zero()).then(|| nalgebra::DMatrix::from_vec(1, m, inputs));
    Trajectory::new(dt, times, states, inputs, seed).map(|t| t.with_signal(signal.clone()))
}
