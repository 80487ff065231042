//! Dense linear-algebra helpers on top of `nalgebra`: SVD pseudoinverse,
//! numerical rank and a general (non-symmetric) eigendecomposition.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use crate::{Error, Result};

/// `max(rows, cols) · ε`, the relative cutoff used when none is given.
pub fn default_rtol(rows: usize, cols: usize) -> f64 {
    rows.max(cols).max(1) as f64 * f64::EPSILON
}

pub(crate) fn ensure_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

fn svd(m: &DMatrix<f64>) -> Result<SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    SVD::try_new(m.clone(), true, true, f64::EPSILON, 0).ok_or(Error::SvdFailed)
}

/// Singular values of `m` in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    ensure_finite(m, "matrix")?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let s = SVD::try_new(m.clone(), false, false, f64::EPSILON, 0).ok_or(Error::SvdFailed)?;
    let mut v: Vec<f64> = s.singular_values.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

/// Moore–Penrose pseudoinverse through the SVD.
///
/// Singular values below `rtol · σ_max` are treated as zero; `rtol`
/// defaults to [`default_rtol`].
pub fn pinv(m: &DMatrix<f64>, rtol: Option<f64>) -> Result<DMatrix<f64>> {
    ensure_finite(m, "pseudoinverse argument")?;
    let (rows, cols) = m.shape();
    if m.is_empty() {
        return Ok(DMatrix::zeros(cols, rows));
    }
    let dec = svd(m)?;
    let smax = dec.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(DMatrix::zeros(cols, rows));
    }
    let cutoff = rtol.unwrap_or_else(|| default_rtol(rows, cols)) * smax;
    let u = dec.u.ok_or(Error::SvdFailed)?;
    let mut v = dec.v_t.ok_or(Error::SvdFailed)?.transpose();
    for (j, &s) in dec.singular_values.iter().enumerate() {
        let scale = if s > cutoff { 1.0 / s } else { 0.0 };
        v.column_mut(j).scale_mut(scale);
    }
    Ok(v * u.transpose())
}

/// Number of singular values above `rtol · σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rtol: Option<f64>) -> Result<usize> {
    let s = singular_values(m)?;
    let Some(&smax) = s.first() else { return Ok(0) };
    if smax == 0.0 {
        return Ok(0);
    }
    let cutoff = rtol.unwrap_or_else(|| default_rtol(m.nrows(), m.ncols())) * smax;
    Ok(s.iter().filter(|&&v| v > cutoff).count())
}

/// Eigenvalues of a real square matrix, in the order the real Schur form
/// delivers them.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_finite(a, "eigenvalue argument")?;
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let ev = a
        .clone()
        .try_schur(f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("Schur iteration did not converge".into()))?
        .complex_eigenvalues();
    Ok(ev.iter().map(|c| Complex64::new(c.re, c.im)).collect())
}

/// Eigenvalues together with unit-norm right eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    pub vectors: DMatrix<Complex64>,
}

/// General eigendecomposition `A = V diag(μ) V⁻¹`.
///
/// Eigenvectors are the right singular vectors of `A − μI` belonging to the
/// smallest singular values; numerically coincident eigenvalues are grouped
/// and receive an orthonormal basis of the joint null space. A group whose
/// null space is too small (a defective eigenvalue) is an error.
pub fn eigen_decomposition(a: &DMatrix<f64>) -> Result<EigenDecomposition> {
    let values = eigenvalues(a)?;
    let n = values.len();
    let scale = a.norm().max(1.0);
    let cluster_tol = 1e-9 * scale;
    let null_tol = 1e-6 * scale;
    let ac: DMatrix<Complex64> = a.map(|v| Complex64::new(v, 0.0));

    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    let mut assigned = vec![false; n];
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let members: Vec<usize> = (i..n)
            .filter(|&j| !assigned[j] && (values[j] - values[i]).norm() <= cluster_tol)
            .collect();
        let mean = members.iter().map(|&j| values[j]).sum::<Complex64>() / members.len() as f64;
        let mut shifted = ac.clone();
        for d in 0..n {
            shifted[(d, d)] -= mean;
        }
        let dec = SVD::try_new(shifted, false, true, f64::EPSILON, 0).ok_or(Error::SvdFailed)?;
        let v_t = dec.v_t.ok_or(Error::SvdFailed)?;
        let mut order: Vec<usize> = (0..dec.singular_values.len()).collect();
        order.sort_by(|&p, &q| dec.singular_values[p].total_cmp(&dec.singular_values[q]));
        let k = members.len();
        if dec.singular_values[order[k - 1]] > null_tol {
            return Err(Error::Eigen(format!(
                "eigenvalue {} + {}i is defective (multiplicity {k})",
                mean.re, mean.im
            )));
        }
        for (slot, &j) in members.iter().enumerate() {
            let row = order[slot];
            let mut v: Vec<Complex64> = v_t.row(row).iter().map(|c| c.conj()).collect();
            normalize_phase(&mut v);
            for (r, c) in v.into_iter().enumerate() {
                vectors[(r, j)] = c;
            }
            assigned[j] = true;
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Unit norm, largest-modulus component real and positive.
fn normalize_phase(v: &mut [Complex64]) {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    if norm == 0.0 || pivot.norm() == 0.0 {
        return;
    }
    let phase = pivot.conj() / pivot.norm();
    for c in v.iter_mut() {
        *c = *c * phase / norm;
    }
}

/// 2-norm condition number of a complex matrix.
pub fn condition_number(m: &DMatrix<Complex64>) -> Result<f64> {
    let s = SVD::try_new(m.clone(), false, false, f64::EPSILON, 0).ok_or(Error::SvdFailed)?;
    let smax = s.singular_values.iter().copied().fold(0.0, f64::max);
    let smin = s.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(if smin == 0.0 { f64::INFINITY } else { smax / smin })
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}
