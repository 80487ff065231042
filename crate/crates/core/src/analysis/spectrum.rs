use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::edmd::KoopmanModel;
use crate::linalg::{condition_number, eigen_decomposition, eigenvalues};
use crate::{Error, Result};

/// Eigenvector condition number above which the matrix logarithm is refused.
pub const MAX_EIGENVECTOR_CONDITION: f64 = 1e12;

/// Relative imaginary residue accepted (and discarded) in the generator.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;

/// Discrete eigenvalues `μ` of `K_t` and their continuous counterparts
/// `λ = log μ / Δt` (principal branch). `λ` is `None` where `μ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    #[serde(with = "complex_pairs")]
    pub discrete: Vec<Complex64>,
    #[serde(with = "optional_complex_pairs")]
    pub continuous: Vec<Option<Complex64>>,
    pub dt: f64,
    /// Set when some `μ` is exactly zero and its `λ` is undefined.
    pub has_zero_eigenvalue: bool,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.discrete.len()
    }

    pub fn is_empty(&self) -> bool {
        self.discrete.is_empty()
    }

    /// Real part of `λ`, with `−∞` for `μ = 0`.
    pub fn continuous_re(&self, i: usize) -> f64 {
        self.continuous[i].map_or(f64::NEG_INFINITY, |l| l.re)
    }

    pub fn max_continuous_re(&self) -> f64 {
        (0..self.len()).map(|i| self.continuous_re(i)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_modulus(&self) -> f64 {
        self.discrete.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }

    /// Positive imaginary parts of the continuous eigenvalues, descending.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut f: Vec<f64> = self.continuous.iter().flatten().filter(|l| l.im > 0.0).map(|l| l.im).collect();
        f.sort_by(|a, b| b.total_cmp(a));
        f
    }

    /// Real continuous eigenvalues (those with zero imaginary part).
    pub fn real_continuous(&self) -> Vec<f64> {
        self.continuous.iter().flatten().filter(|l| l.im == 0.0).map(|l| l.re).collect()
    }
}

/// Principal logarithm of a complex number divided by `dt`.
pub fn continuous_eigenvalue(mu: Complex64, dt: f64) -> Option<Complex64> {
    let r = mu.norm();
    if r == 0.0 {
        return None;
    }
    Some(Complex64::new(r.ln(), mu.im.atan2(mu.re)) / dt)
}

/// Orders eigenvalues by descending imaginary magnitude, then descending
/// real part, with the positive member of each conjugate pair first.
fn sort_eigenvalues(v: &mut [Complex64]) {
    v.sort_by(|a, b| {
        b.im.abs()
            .total_cmp(&a.im.abs())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
}

/// Spectrum of an operator matrix sampled with step `dt`.
pub fn spectrum_of(k: &DMatrix<f64>, dt: f64) -> Result<Spectrum> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
    }
    let mut discrete = eigenvalues(k)?;
    sort_eigenvalues(&mut discrete);
    let continuous: Vec<Option<Complex64>> = discrete.iter().map(|&m| continuous_eigenvalue(m, dt)).collect();
    let has_zero_eigenvalue = continuous.iter().any(Option::is_none);
    Ok(Spectrum {
        discrete,
        continuous,
        dt,
        has_zero_eigenvalue,
    })
}

pub fn spectrum(model: &KoopmanModel) -> Result<Spectrum> {
    spectrum_of(&model.k, model.dt)
}

/// Principal matrix logarithm of `k_t` divided by `dt`, through the
/// eigendecomposition `K_t = V diag(μ) V⁻¹`.
pub fn generator_of(k_t: &DMatrix<f64>, dt: f64) -> Result<DMatrix<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
    }
    let n = k_t.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let ev = eigenvalues(k_t)?;
    for mu in &ev {
        if mu.im == 0.0 && mu.re <= 0.0 {
            return Err(Error::NoPrincipalLogarithm { re: mu.re, im: mu.im });
        }
    }
    let dec = eigen_decomposition(k_t)?;
    let cond = condition_number(&dec.vectors)?;
    if !(cond <= MAX_EIGENVECTOR_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let v_inv = dec
        .vectors
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("eigenvector matrix".into()))?;
    let mut scaled = dec.vectors.clone();
    for (j, mu) in dec.values.iter().enumerate() {
        let l = continuous_eigenvalue(*mu, dt).ok_or(Error::NoPrincipalLogarithm { re: mu.re, im: mu.im })?;
        for r in 0..n {
            scaled[(r, j)] *= l;
        }
    }
    let g = scaled * v_inv;
    let re = g.map(|c| c.re);
    let im_max = g.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let scale = re.amax().max(1.0 / dt);
    if im_max > IMAG_RESIDUE_TOL * scale {
        return Err(Error::Eigen(format!(
            "matrix logarithm has an imaginary residue of {im_max:e}"
        )));
    }
    Ok(re)
}

/// Continuous-time generator `K = log(K_t) / Δt` of a fitted model.
pub fn generator(model: &KoopmanModel) -> Result<DMatrix<f64>> {
    generator_of(&model.k, model.dt)
}

/// Zero-order-hold inversion `B_c = K (K_t − I)⁻¹ B_t`.
pub fn continuous_input_matrix(k: &DMatrix<f64>, k_t: &DMatrix<f64>, b_t: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = k_t.nrows();
    let shifted = k_t - DMatrix::identity(n, n);
    let lu = shifted.lu();
    let x = lu
        .solve(b_t)
        .ok_or_else(|| Error::Singular("K_t − I (an eigenvalue of K_t equals 1)".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("K_t − I".into()));
    }
    Ok(k * x)
}

mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

mod optional_complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Option<Complex64>], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<Option<[f64; 2]>> = v.iter().map(|c| c.map(|c| [c.re, c.im])).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<Complex64>>, D::Error> {
        let pairs = Vec::<Option<[f64; 2]>>::deserialize(d)?;
        Ok(pairs
            .into_iter()
            .map(|p| p.map(|[re, im]| Complex64::new(re, im)))
            .collect())
    }
}
