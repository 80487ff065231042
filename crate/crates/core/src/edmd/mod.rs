//! Snapshot assembly, operator fits (EDMD and EDMDc) and the two
//! prediction schemes.

mod model;
mod predict;
mod snapshots;

use nalgebra::DMatrix;

pub use crate::linalg::pinv;
pub use model::{KoopmanModel, Provenance};
pub use predict::{predict_corrected, predict_straight, StraightPrediction};
pub use snapshots::{assemble, SnapshotSet, SnapshotSource};

use crate::dictionary::Dictionary;
use crate::linalg::default_rtol;
use crate::{Error, Result};

fn lift_pair(snapshots: &SnapshotSet, dict: &Dictionary) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if snapshots.state_dim() != dict.state_dim() {
        return Err(Error::Dimension(format!(
            "snapshots have n = {}, dictionary expects n = {}",
            snapshots.state_dim(),
            dict.state_dim()
        )));
    }
    if snapshots.is_empty() {
        return Err(Error::InvalidArgument("snapshot set is empty".into()));
    }
    if snapshots.len() < dict.len() {
        log::warn!(
            "{} snapshot pairs for {} observables: the fit is underdetermined",
            snapshots.len(),
            dict.len()
        );
    }
    Ok((dict.lift(&snapshots.x)?, dict.lift(&snapshots.x_next)?))
}

fn relative_residual(target: &DMatrix<f64>, fitted: &DMatrix<f64>) -> f64 {
    let denom = target.norm();
    let num = (target - fitted).norm();
    if denom > 0.0 {
        num / denom
    } else {
        num
    }
}

fn provenance(snapshots: &SnapshotSet, rtol: f64) -> Provenance {
    Provenance {
        system: None,
        seed: None,
        trajectories: snapshots.sources.len(),
        snapshot_pairs: snapshots.len(),
        pinv_rtol: rtol,
    }
}

/// Autonomous fit `K_t = Ψ(X′) Ψ(X)⁺`.
pub fn fit(snapshots: &SnapshotSet, dict: &Dictionary) -> Result<KoopmanModel> {
    fit_with_rtol(snapshots, dict, None)
}

/// [`fit`] with an explicit pseudoinverse cutoff.
pub fn fit_with_rtol(snapshots: &SnapshotSet, dict: &Dictionary, rtol: Option<f64>) -> Result<KoopmanModel> {
    if snapshots.u.is_some() {
        return Err(Error::InvalidArgument(
            "snapshot set carries inputs; use fit_with_control".into(),
        ));
    }
    let (psi, psi_next) = lift_pair(snapshots, dict)?;
    let rtol = rtol.unwrap_or_else(|| default_rtol(psi.nrows(), psi.ncols()));
    let k = &psi_next * pinv(&psi, Some(rtol))?;
    let residual = relative_residual(&psi_next, &(&k * &psi));
    KoopmanModel::new(
        k,
        None,
        snapshots.dt,
        dict.clone(),
        residual,
        provenance(snapshots, rtol),
    )
}

/// Controlled fit `(K_t B_t) = Ψ(X′) (Ψ(X); U)⁺`.
pub fn fit_with_control(snapshots: &SnapshotSet, dict: &Dictionary) -> Result<KoopmanModel> {
    fit_with_control_rtol(snapshots, dict, None)
}

/// [`fit_with_control`] with an explicit pseudoinverse cutoff.
pub fn fit_with_control_rtol(
    snapshots: &SnapshotSet,
    dict: &Dictionary,
    rtol: Option<f64>,
) -> Result<KoopmanModel> {
    let u = snapshots
        .u
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("snapshot set has no inputs".into()))?;
    if u.nrows() == 0 {
        return Err(Error::InvalidArgument("input dimension must be at least 1".into()));
    }
    if u.ncols() != snapshots.len() {
        return Err(Error::Dimension(format!(
            "U has {} columns, X has {}",
            u.ncols(),
            snapshots.len()
        )));
    }
    let (psi, psi_next) = lift_pair(snapshots, dict)?;
    let n_obs = psi.nrows();
    let p = u.nrows();
    let mut stacked = DMatrix::zeros(n_obs + p, psi.ncols());
    stacked.rows_mut(0, n_obs).copy_from(&psi);
    stacked.rows_mut(n_obs, p).copy_from(u);
    let rtol = rtol.unwrap_or_else(|| default_rtol(stacked.nrows(), stacked.ncols()));
    let kb = &psi_next * pinv(&stacked, Some(rtol))?;
    let residual = relative_residual(&psi_next, &(&kb * &stacked));
    let k = kb.columns(0, n_obs).into_owned();
    let b = kb.columns(n_obs, p).into_owned();
    KoopmanModel::new(
        k,
        Some(b),
        snapshots.dt,
        dict.clone(),
        residual,
        provenance(snapshots, rtol),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{build_dictionary, DictionaryKind, DictionarySpec};
    use crate::dynamics::Trajectory;
    use nalgebra::{dmatrix, DVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn a_mat() -> DMatrix<f64> {
        dmatrix![0.9, 0.1; 0.0, 0.8]
    }

    fn traj(states: DMatrix<f64>, inputs: Option<DMatrix<f64>>, dt: f64) -> Trajectory {
        let m = states.ncols();
        Trajectory::new(dt, (0..m).map(|k| k as f64 * dt).collect(), states, inputs, 0).unwrap()
    }

    fn linear_data(pairs: usize, control: bool, seed: u64) -> SnapshotSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(2, pairs, |_, _| rng.gen_range(-1.0..1.0));
        let u = DMatrix::from_fn(1, pairs, |_, _| rng.gen_range(-1.0..1.0));
        let mut x_next = a_mat() * &x;
        if control {
            x_next += dmatrix![0.0; 1.0] * &u;
        }
        SnapshotSet::from_matrices(x, x_next, control.then_some(u), 0.1).unwrap()
    }

    #[test]
    fn assemble_counts_and_boundaries() {
        let t1 = traj(DMatrix::from_fn(2, 3, |i, j| (10 * i + j) as f64), None, 0.1);
        let t2 = traj(DMatrix::from_fn(2, 3, |i, j| (100 + 10 * i + j) as f64), None, 0.1);
        let s = assemble(&[t1, t2]).unwrap();
        assert_eq!(s.len(), 4);
        // no pair maps the last sample of trajectory 1 to the first of trajectory 2
        for j in 0..4 {
            assert_eq!(s.x_next[(0, j)] - s.x[(0, j)], 1.0);
        }
        assert_eq!(s.x[(0, 2)], 100.0);
        assert_eq!(s.sources[1].first_column, 2);

        let t = traj(DMatrix::zeros(2, 301), None, 0.01);
        assert_eq!(assemble(&[t]).unwrap().len(), 300);
    }

    #[test]
    fn assemble_errors() {
        let a = traj(DMatrix::zeros(2, 3), None, 0.1);
        let b = traj(DMatrix::zeros(2, 3), None, 0.2);
        let c = traj(DMatrix::zeros(3, 3), None, 0.1);
        let short = traj(DMatrix::zeros(2, 1), None, 0.1);
        assert!(assemble(&[]).is_err());
        assert!(assemble(&[a.clone(), b]).is_err());
        assert!(assemble(&[a.clone(), c]).is_err());
        assert!(assemble(&[a, short]).is_err());
    }

    #[test]
    fn autonomous_linear_oracle() {
        let s = linear_data(50, false, 1);
        let m = fit(&s, &Dictionary::identity(2).unwrap()).unwrap();
        assert!((m.k - a_mat()).amax() < 1e-10);
        assert!(m.fit_residual < 1e-12);
    }

    #[test]
    fn fixed_point_gives_rank_one_operator() {
        let xs = dmatrix![0.3; -0.7];
        let s = SnapshotSet::from_matrices(xs.clone(), xs.clone(), None, 0.1).unwrap();
        let m = fit(&s, &Dictionary::identity(2).unwrap()).unwrap();
        let expected = &xs * pinv(&xs, None).unwrap();
        assert!((&m.k - expected).amax() < 1e-14);
        assert!((&m.k * &xs - &xs).amax() < 1e-14);
        assert_eq!(crate::linalg::numerical_rank(&m.k, None).unwrap(), 1);
    }

    #[test]
    fn controlled_linear_oracle() {
        let s = linear_data(500, true, 2);
        let m = fit_with_control(&s, &Dictionary::identity(2).unwrap()).unwrap();
        assert!((&m.k - a_mat()).amax() < 1e-8);
        assert!((m.b.unwrap() - dmatrix![0.0; 1.0]).amax() < 1e-8);
    }

    #[test]
    fn zero_input_matches_autonomous_fit() {
        let auto = linear_data(60, false, 3);
        let mut with_u = auto.clone();
        with_u.u = Some(DMatrix::zeros(1, 60));
        let dict = Dictionary::identity(2).unwrap();
        let a = fit(&auto, &dict).unwrap();
        let b = fit_with_control(&with_u, &dict).unwrap();
        assert!((a.k - b.k).amax() < 1e-8);
    }

    #[test]
    fn fit_argument_checks() {
        let dict = Dictionary::identity(2).unwrap();
        assert!(fit(&linear_data(10, true, 0), &dict).is_err());
        assert!(fit_with_control(&linear_data(10, false, 0), &dict).is_err());
        assert!(fit(&linear_data(10, false, 0), &Dictionary::identity(3).unwrap()).is_err());
    }

    #[test]
    fn straight_prediction_of_linear_system() {
        let m = fit(&linear_data(50, false, 4), &Dictionary::identity(2).unwrap()).unwrap();
        let x0 = [1.0, -0.5];
        let p = predict_straight(&m, &x0, None, 100).unwrap();
        let mut x = DVector::from_column_slice(&x0);
        for k in 0..=100 {
            assert!((p.states.column(k) - &x).amax() < 1e-8);
            x = a_mat() * x;
        }
        let c = predict_corrected(&m, &x0, None, 100).unwrap();
        assert!((c - p.states).amax() < 1e-12);
    }

    #[test]
    fn zero_steps() {
        let dict = build_dictionary(&DictionarySpec::new(DictionaryKind::Pendulum, 6)).unwrap();
        let m = KoopmanModel::new(DMatrix::identity(6, 6), None, 0.01, dict.clone(), 0.0, Provenance::default()).unwrap();
        let x0 = [0.4, -0.2];
        let p = predict_straight(&m, &x0, None, 0).unwrap();
        assert_eq!(p.lifted.column(0), dict.eval(&x0).unwrap());
        assert_eq!(p.states.column(0).as_slice(), &x0);
        assert_eq!(predict_corrected(&m, &x0, None, 0).unwrap().as_slice(), &x0);
    }

    #[test]
    fn controlled_prediction_needs_inputs() {
        let m = fit_with_control(&linear_data(20, true, 5), &Dictionary::identity(2).unwrap()).unwrap();
        assert!(predict_straight(&m, &[0.0, 0.0], None, 3).is_err());
        assert!(predict_corrected(&m, &[0.0, 0.0], Some(&DMatrix::zeros(1, 2)), 3).is_err());
        let u = DMatrix::from_element(1, 3, 1.0);
        let p = predict_straight(&m, &[0.0, 0.0], Some(&u), 3).unwrap();
        assert!((p.states[(1, 1)] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn diverging_prediction_reports_step() {
        let dict = Dictionary::identity(1).unwrap();
        let m = KoopmanModel::new(dmatrix![1e200], None, 1.0, dict, 0.0, Provenance::default()).unwrap();
        assert!(matches!(
            predict_straight(&m, &[1e200], None, 5),
            Err(Error::PredictionDiverged { step: 1 })
        ));
        assert!(matches!(
            predict_corrected(&m, &[1e200], None, 5),
            Err(Error::PredictionDiverged { step: 1 })
        ));
    }

    #[test]
    fn model_json_round_trip() {
        let dict = build_dictionary(&DictionarySpec::new(DictionaryKind::Duffing, 6)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let k = DMatrix::from_fn(6, 6, |_, _| rng.gen_range(-1.0..1.0));
        let b = DMatrix::from_fn(6, 1, |_, _| rng.gen_range(-1.0..1.0));
        let m = KoopmanModel::new(k, Some(b), 0.01, dict, 0.25, Provenance::default()).unwrap();
        let back = KoopmanModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let mut v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        v["k"][0].as_array_mut().unwrap().pop();
        assert!(KoopmanModel::from_json(&v.to_string()).is_err());
    }

    fn pendulum_model(n_obs: usize) -> (KoopmanModel, SnapshotSet) {
        use crate::dynamics::{generate_training_set, InputSignal, SystemModel};
        let set = generate_training_set(&SystemModel::pendulum(), 10, 2.0, 0.01, &[InputSignal::Zero], 5).unwrap();
        let snaps = assemble(&set).unwrap();
        let dict = build_dictionary(&DictionarySpec::new(DictionaryKind::Pendulum, n_obs)).unwrap();
        (fit(&snaps, &dict).unwrap(), snaps)
    }

    #[test]
    fn projection_consistency() {
        let (m, _) = pendulum_model(8);
        let p = predict_straight(&m, &[1.0, 0.2], None, 50).unwrap();
        assert_eq!(p.lifted.rows(0, 2).into_owned(), p.states);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn first_step_agrees(x1 in -3.0f64..3.0, x2 in -2.0f64..2.0, n_obs in 2usize..10) {
            let (m, _) = pendulum_model(n_obs);
            let s = predict_straight(&m, &[x1, x2], None, 1).unwrap();
            let c = predict_corrected(&m, &[x1, x2], None, 1).unwrap();
            prop_assert_eq!(s.states.column(1), c.column(1));
        }

        #[test]
        fn perturbing_k_never_lowers_residual(seed in any::<u64>()) {
            let (m, snaps) = pendulum_model(6);
            let psi = m.dictionary.lift(&snaps.x).unwrap();
            let psi_next = m.dictionary.lift(&snaps.x_next).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut dk = DMatrix::from_fn(6, 6, |_, _| rng.gen_range(-1.0..1.0));
            dk *= 1e-3 / dk.norm();
            let base = (&psi_next - &m.k * &psi).norm();
            let perturbed = (&psi_next - (&m.k + dk) * &psi).norm();
            prop_assert!(perturbed >= base);
        }
    }
}
