use crate::{Error, Result};

fn same_length(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "series have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Running sum of squared deviations `e_k = Σ_{m≤k} (a_m − b_m)²`.
pub fn cumulative_error(measured: &[f64], predicted: &[f64]) -> Result<Vec<f64>> {
    same_length(measured, predicted)?;
    let mut acc = 0.0;
    Ok(measured
        .iter()
        .zip(predicted)
        .map(|(a, b)| {
            acc += (a - b) * (a - b);
            acc
        })
        .collect())
}

/// Root-mean-square deviation.
pub fn rmse(measured: &[f64], predicted: &[f64]) -> Result<f64> {
    same_length(measured, predicted)?;
    if measured.is_empty() {
        return Ok(0.0);
    }
    let ss: f64 = measured.iter().zip(predicted).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((ss / measured.len() as f64).sqrt())
}

/// Index of the first sample where `|a − b|` exceeds `threshold`.
pub fn first_exceedance(measured: &[f64], predicted: &[f64], threshold: f64) -> Result<Option<usize>> {
    same_length(measured, predicted)?;
    Ok(measured
        .iter()
        .zip(predicted)
        .position(|(a, b)| !((a - b).abs() <= threshold)))
}
