//! Spectra, the discrete-to-continuous conversion, controllability and
//! observability ranks, and prediction error metrics.

mod metrics;
mod rank;
mod spectrum;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use metrics::{cumulative_error, first_exceedance, rmse};
pub use rank::{
    controllability_matrix, controllability_rank, default_rank_rtol, krylov_rank, observability_matrix,
    observability_rank, RankResult,
};
pub use spectrum::{
    continuous_eigenvalue, continuous_input_matrix, generator, generator_of, spectrum, spectrum_of, Spectrum,
    IMAG_RESIDUE_TOL, MAX_EIGENVECTOR_CONDITION,
};

use crate::edmd::KoopmanModel;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Run the rank tests on the continuous-time pair `(K, B_c)`.
    pub use_continuous: bool,
    /// Relative rank tolerance; `N · ε` when absent.
    #[serde(default)]
    pub rtol: Option<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            use_continuous: true,
            rtol: None,
        }
    }
}

/// Time base the rank tests were run in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankBasis {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub lifted_dim: usize,
    pub dt: f64,
    pub spectrum: Spectrum,
    /// All `Re λ < 0`.
    pub stable_continuous: bool,
    /// All `|μ| < 1`.
    pub stable_discrete: bool,
    pub rank_basis: RankBasis,
    /// Why the continuous conversion was abandoned, if it was.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuous_fallback: Option<String>,
    pub ctrb_rank: Option<usize>,
    pub ctrb_tolerance: Option<f64>,
    pub obsv_rank: usize,
    pub obsv_tolerance: f64,
    pub rank_rtol: f64,
    pub fit_residual: f64,
}

impl AnalysisReport {
    pub fn full_rank(&self) -> bool {
        self.ctrb_rank.is_none_or(|r| r == self.lifted_dim) && self.obsv_rank == self.lifted_dim
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Spectrum, stability verdicts and rank tests for a fitted model. The
/// output matrix is the first row of the projection, `y = x1`.
pub fn analyze(model: &KoopmanModel, options: &AnalysisOptions) -> Result<AnalysisReport> {
    let spec = spectrum(model)?;
    let n = model.size();
    let stable_continuous = (0..spec.len()).all(|i| spec.continuous_re(i) < 0.0);
    let stable_discrete = spec.discrete.iter().all(|m| m.norm() < 1.0);
    let mut c = DMatrix::zeros(1, n);
    c[(0, 0)] = 1.0;

    let continuous = if options.use_continuous {
        match continuous_pair(model) {
            Ok(pair) => Ok(pair),
            Err(e) => {
                log::warn!("continuous-time conversion failed, ranks use the discrete model: {e}");
                Err(e.to_string())
            }
        }
    } else {
        Err(String::new())
    };
    let (rank_basis, fallback, k, b) = match continuous {
        Ok((k, b)) => (RankBasis::Continuous, None, k, b),
        Err(reason) => (
            RankBasis::Discrete,
            (!reason.is_empty()).then_some(reason),
            model.k.clone(),
            model.b.clone(),
        ),
    };
    let ctrb = b.as_ref().map(|b| controllability_rank(&k, b, options.rtol)).transpose()?;
    let obsv = observability_rank(&k, &c, options.rtol)?;
    Ok(AnalysisReport {
        lifted_dim: n,
        dt: model.dt,
        spectrum: spec,
        stable_continuous,
        stable_discrete,
        rank_basis,
        continuous_fallback: fallback,
        ctrb_rank: ctrb.map(|r| r.rank),
        ctrb_tolerance: ctrb.map(|r| r.tolerance),
        obsv_rank: obsv.rank,
        obsv_tolerance: obsv.tolerance,
        rank_rtol: options.rtol.unwrap_or_else(|| default_rank_rtol(n)),
        fit_residual: model.fit_residual,
    })
}

type ContinuousPair = (DMatrix<f64>, Option<DMatrix<f64>>);

fn continuous_pair(model: &KoopmanModel) -> Result<ContinuousPair> {
    let k = generator(model)?;
    let b = model
        .b
        .as_ref()
        .map(|b_t| continuous_input_matrix(&k, &model.k, b_t))
        .transpose()?;
    Ok((k, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::Dictionary;
    use crate::edmd::Provenance;
    use crate::Error;
    use nalgebra::dmatrix;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(k: DMatrix<f64>, b: Option<DMatrix<f64>>, dt: f64) -> KoopmanModel {
        let n = k.nrows();
        KoopmanModel::new(k, b, dt, Dictionary::identity(n).unwrap(), 0.0, Provenance::default()).unwrap()
    }

    fn rel_frob(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn identity_spectrum_and_generator() {
        let m = model(DMatrix::identity(3, 3), None, 0.37);
        let s = spectrum(&m).unwrap();
        assert!(s.discrete.iter().all(|&mu| mu == Complex64::new(1.0, 0.0)));
        assert!(s.continuous.iter().all(|l| *l == Some(Complex64::new(0.0, 0.0))));
        assert_eq!(generator(&m).unwrap(), DMatrix::zeros(3, 3));
    }

    #[test]
    fn scalar_logarithm() {
        let m = model(DMatrix::from_diagonal_element(2, 2, 0.99), None, 0.01);
        let s = spectrum(&m).unwrap();
        for l in &s.continuous {
            assert!((l.unwrap().re - 0.99f64.ln() / 0.01).abs() < 1e-12);
            assert!((l.unwrap().re + 1.00503).abs() < 1e-5);
        }
    }

    #[test]
    fn zero_eigenvalue_is_flagged() {
        let m = model(dmatrix![0.5, 0.0; 0.0, 0.0], None, 0.1);
        let s = spectrum(&m).unwrap();
        assert!(s.has_zero_eigenvalue);
        assert_eq!(s.continuous_re(1), f64::NEG_INFINITY);
        let json = serde_json::to_value(&s).unwrap();
        assert!(json["continuous"][1].is_null());
        assert!(matches!(generator(&m), Err(Error::NoPrincipalLogarithm { .. })));
    }

    #[test]
    fn generator_recovers_oscillator() {
        let a = dmatrix![0.0, 1.0; -1.0, -0.1];
        let dt = 0.01;
        let k_t = (&a * dt).exp();
        let g = generator_of(&k_t, dt).unwrap();
        assert!((&g - &a).amax() < 1e-8, "{g}");
    }

    #[test]
    fn negative_real_eigenvalue_has_no_logarithm() {
        let k_t = dmatrix![-0.5, 0.0; 0.0, 0.9];
        assert!(matches!(
            generator_of(&k_t, 0.1),
            Err(Error::NoPrincipalLogarithm { .. })
        ));
    }

    #[test]
    fn defective_operator_is_rejected() {
        let k_t = dmatrix![0.9, 1.0; 0.0, 0.9];
        let e = generator_of(&k_t, 0.1).unwrap_err();
        assert!(e.is_numerical());
    }

    #[test]
    fn zoh_input_matrix_round_trip() {
        // discretise (A, B) exactly through the augmented exponential
        let a = dmatrix![0.0, 1.0; -2.0, -0.3];
        let b = dmatrix![0.0; 1.0];
        let dt = 0.05;
        let mut aug = DMatrix::zeros(3, 3);
        aug.view_mut((0, 0), (2, 2)).copy_from(&a);
        aug.view_mut((0, 2), (2, 1)).copy_from(&b);
        let e = (aug * dt).exp();
        let k_t = e.view((0, 0), (2, 2)).into_owned();
        let b_t = e.view((0, 2), (2, 1)).into_owned();
        let k = generator_of(&k_t, dt).unwrap();
        let b_c = continuous_input_matrix(&k, &k_t, &b_t).unwrap();
        assert!((b_c - b).amax() < 1e-8);
    }

    #[test]
    fn rank_examples() {
        let k = dmatrix![0.0, 1.0; 0.0, 0.0];
        assert_eq!(controllability_rank(&k, &dmatrix![0.0; 1.0], None).unwrap().rank, 2);
        assert_eq!(observability_rank(&k, &dmatrix![1.0, 0.0], None).unwrap().rank, 2);
        let i = DMatrix::identity(2, 2);
        assert_eq!(controllability_rank(&i, &dmatrix![1.0; 0.0], None).unwrap().rank, 1);
        assert_eq!(observability_rank(&k, &DMatrix::zeros(1, 2), None).unwrap().rank, 0);
        assert!(controllability_rank(&k, &dmatrix![1.0; 0.0; 0.0], None).is_err());
    }

    #[test]
    fn staircase_agrees_with_kalman_matrix_on_small_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..6 {
            let k = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let b = DMatrix::from_fn(n, 1, |_, _| rng.gen_range(-1.0..1.0));
            let raw = crate::linalg::numerical_rank(&controllability_matrix(&k, &b), Some(1e-10)).unwrap();
            assert_eq!(controllability_rank(&k, &b, None).unwrap().rank, raw);
        }
        // block-diagonal system with an uncontrollable mode
        let k = dmatrix![0.5, 0.0, 0.0; 0.0, 0.7, 0.0; 0.0, 0.0, 0.9];
        let b = dmatrix![1.0; 1.0; 0.0];
        assert_eq!(controllability_rank(&k, &b, None).unwrap().rank, 2);
    }

    #[test]
    fn analyze_discrete_and_continuous() {
        let a = dmatrix![0.0, 1.0; -1.0, -0.1];
        let k_t = (&a * 0.01).exp();
        let m = model(k_t.clone(), Some(dmatrix![0.0; 0.01]), 0.01);
        let r = analyze(&m, &AnalysisOptions::default()).unwrap();
        assert_eq!(r.rank_basis, RankBasis::Continuous);
        assert!(r.stable_continuous && r.stable_discrete && r.full_rank());
        assert_eq!(r.ctrb_rank, Some(2));
        let r = analyze(&m, &AnalysisOptions { use_continuous: false, rtol: None }).unwrap();
        assert_eq!(r.rank_basis, RankBasis::Discrete);
        assert!(r.continuous_fallback.is_none());

        let bad = model(dmatrix![-0.5, 0.0; 0.0, 0.9], Some(dmatrix![1.0; 1.0]), 0.1);
        let r = analyze(&bad, &AnalysisOptions::default()).unwrap();
        assert_eq!(r.rank_basis, RankBasis::Discrete);
        assert!(r.continuous_fallback.is_some());
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert!(json["spectrum"]["discrete"][0].is_array());
        assert!(json["obsv_tolerance"].is_number());
    }

    #[test]
    fn cumulative_error_examples() {
        assert_eq!(cumulative_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(cumulative_error(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), vec![1.0, 2.0]);
        assert!(cumulative_error(&[1.0], &[]).is_err());
        assert_eq!(rmse(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(first_exceedance(&[0.0, 0.1, 0.5], &[0.0; 3], 0.2).unwrap(), Some(2));
    }

    /// Random real matrix whose eigenvalues lie in the right half of the
    /// open unit disk.
    fn random_stable(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut d = DMatrix::zeros(n, n);
        let mut i = 0;
        while i < n {
            let r = rng.gen_range(0.2..0.95);
            if i + 1 < n && rng.gen_bool(0.5) {
                let th = rng.gen_range(-1.2..1.2f64);
                let (re, im) = (r * th.cos(), r * th.sin());
                d[(i, i)] = re;
                d[(i + 1, i + 1)] = re;
                d[(i, i + 1)] = im;
                d[(i + 1, i)] = -im;
                i += 2;
            } else {
                d[(i, i)] = r;
                i += 1;
            }
        }
        let s = DMatrix::from_fn(n, n, |r, c| rng.gen_range(-1.0..1.0) + if r == c { 2.0 } else { 0.0 });
        &s * d * s.try_inverse().unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn log_exp_round_trip(n in 1usize..8, seed in any::<u64>(), dt in 0.001f64..1.0) {
            let k_t = random_stable(n, seed);
            let g = generator_of(&k_t, dt).unwrap();
            prop_assert!(rel_frob(&(g * dt).exp(), &k_t) < 1e-6);
        }

        #[test]
        fn spectral_consistency(n in 1usize..8, seed in any::<u64>(), dt in 0.001f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let s = spectrum(&model(k, None, dt)).unwrap();
            for i in 0..s.len() {
                prop_assert_eq!(s.discrete[i].norm() < 1.0, s.continuous_re(i) < 0.0);
            }
        }

        #[test]
        fn zero_padding_keeps_rank(n in 2usize..7, p in 1usize..3, extra in 1usize..3, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let b = DMatrix::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0));
            let padded = b.clone().resize_horizontally(p + extra, 0.0);
            prop_assert_eq!(
                controllability_rank(&k, &b, None).unwrap().rank,
                controllability_rank(&k, &padded, None).unwrap().rank
            );
            let c = b.transpose();
            let padded = c.clone().resize_vertically(p + extra, 0.0);
            prop_assert_eq!(
                observability_rank(&k, &c, None).unwrap().rank,
                observability_rank(&k, &padded, None).unwrap().rank
            );
        }

        #[test]
        fn cayley_hamilton_ceiling(n in 2usize..7, rank_b in 1usize..3, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // low-rank K so that the rank is not trivially N
            let l = DMatrix::from_fn(n, 2, |_, _| rng.gen_range(-1.0..1.0));
            let r = DMatrix::from_fn(2, n, |_, _| rng.gen_range(-1.0..1.0));
            let k = l * r;
            let b = DMatrix::from_fn(n, rank_b, |_, _| rng.gen_range(-1.0..1.0));
            let base = krylov_rank(&k, &b, n, None).unwrap().rank;
            for extra in 1..4 {
                prop_assert_eq!(krylov_rank(&k, &b, n + extra, None).unwrap().rank, base);
            }
            prop_assert!(base <= n);
        }

        #[test]
        fn cumulative_error_is_monotone(pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 0..200)) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let e = cumulative_error(&a, &b).unwrap();
            prop_assert!(e.windows(2).all(|w| w[1] >= w[0]));
            prop_assert!(e.iter().all(|v| *v >= 0.0));
        }
    }
}
