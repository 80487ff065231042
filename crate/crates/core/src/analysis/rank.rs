use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};

use crate::linalg::{ensure_finite, spectral_norm};
use crate::{Error, Result};

/// Numerical rank and the absolute threshold it was decided with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub rank: usize,
    pub tolerance: f64,
}

/// Default relative tolerance `N · ε`.
pub fn default_rank_rtol(n: usize) -> f64 {
    n.max(1) as f64 * f64::EPSILON
}

/// Kalman matrix `(B KB … K^{blocks−1}B)`.
pub fn controllability_matrix(k: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    let p = b.ncols();
    let mut out = DMatrix::zeros(n, n * p);
    let mut block = b.clone();
    for i in 0..n {
        out.columns_mut(i * p, p).copy_from(&block);
        block = k * block;
    }
    out
}

/// Stacked `(C; CK; …; CK^{N−1})`.
pub fn observability_matrix(k: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    controllability_matrix(&k.transpose(), &c.transpose()).transpose()
}

fn check(k: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if !k.is_square() {
        return Err(Error::Dimension(format!("K is {}×{}, not square", k.nrows(), k.ncols())));
    }
    if b.nrows() != k.nrows() {
        return Err(Error::Dimension(format!(
            "K is {0}×{0} but the input matrix has {1} rows",
            k.nrows(),
            b.nrows()
        )));
    }
    ensure_finite(k, "K")?;
    ensure_finite(b, "input/output matrix")
}

/// Dimension of the Krylov space spanned by `B, KB, …, K^{blocks−1}B`.
///
/// The space is built block by block with an orthonormal basis (block
/// Arnoldi with two reorthogonalisation passes). Each new block is scaled
/// to unit spectral norm of `B` resp. `K`, and directions whose singular
/// value after projection falls below `rtol · max(‖K‖₂, 1)` are dropped.
/// This is equivalent to the rank of the Kalman matrix but avoids the
/// huge dynamic range of its columns `K^i B`.
pub fn krylov_rank(k: &DMatrix<f64>, b: &DMatrix<f64>, blocks: usize, rtol: Option<f64>) -> Result<RankResult> {
    check(k, b)?;
    let n = k.nrows();
    let k_norm = spectral_norm(k)?;
    let tolerance = rtol.unwrap_or_else(|| default_rank_rtol(n)) * k_norm.max(1.0);
    let b_norm = spectral_norm(b)?;
    if n == 0 || b.ncols() == 0 || b_norm == 0.0 {
        return Ok(RankResult { rank: 0, tolerance });
    }

    let mut basis = DMatrix::<f64>::zeros(n, 0);
    let mut w = b / b_norm;
    for _ in 0..blocks {
        if basis.ncols() > 0 {
            for _ in 0..2 {
                let coeff = basis.transpose() * &w;
                w -= &basis * coeff;
            }
        }
        let dec = SVD::try_new(w.clone(), true, false, f64::EPSILON, 0).ok_or(Error::SvdFailed)?;
        let u = dec.u.ok_or(Error::SvdFailed)?;
        let mut keep: Vec<usize> = (0..dec.singular_values.len())
            .filter(|&j| dec.singular_values[j] > tolerance)
            .collect();
        keep.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
        let room = n - basis.ncols();
        if keep.is_empty() || room == 0 {
            break;
        }
        let mut new = DMatrix::zeros(n, keep.len().min(room));
        for (slot, &j) in keep.iter().take(new.ncols()).enumerate() {
            new.set_column(slot, &u.column(j));
        }
        let old = basis.ncols();
        basis = basis.resize_horizontally(old + new.ncols(), 0.0);
        basis.columns_mut(old, new.ncols()).copy_from(&new);
        if basis.ncols() == n {
            break;
        }
        w = if k_norm > 0.0 { (k * new) / k_norm } else { k * new };
    }
    Ok(RankResult {
        rank: basis.ncols(),
        tolerance,
    })
}

/// Rank of `(B KB … K^{N−1}B)`.
pub fn controllability_rank(k: &DMatrix<f64>, b: &DMatrix<f64>, rtol: Option<f64>) -> Result<RankResult> {
    krylov_rank(k, b, k.nrows(), rtol)
}

/// Rank of `(C; CK; …; CK^{N−1})`, computed on the dual pair `(Kᵀ, Cᵀ)`.
pub fn observability_rank(k: &DMatrix<f64>, c: &DMatrix<f64>, rtol: Option<f64>) -> Result<RankResult> {
    if c.ncols() != k.nrows() {
        return Err(Error::Dimension(format!(
            "K is {0}×{0} but C has {1} columns",
            k.nrows(),
            c.ncols()
        )));
    }
    krylov_rank(&k.transpose(), &c.transpose(), k.nrows(), rtol)
}
