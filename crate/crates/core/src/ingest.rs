//! Measurement files and velocity estimation from angle-only data.
//!
//! Angle series are smoothed with a Savitzky–Golay filter (cubic, or lower
//! for short windows) and then differentiated with central differences,
//! one-sided at the two ends.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::linalg::pinv;
use crate::{Error, Result};

/// How velocities are estimated when the file carries none.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DifferentiationScheme {
    #[default]
    SavgolCentral,
}

/// Which CSV columns hold time, angle, velocity and input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub time: String,
    pub angle: String,
    /// Used as-is when present in the file, estimated otherwise.
    pub velocity: String,
    pub input: Option<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            time: "t".into(),
            angle: "x1".into(),
            velocity: "x2".into(),
            input: Some("u1".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSpec {
    pub inputs: Vec<PathBuf>,
    #[serde(default)]
    pub columns: ColumnMap,
    pub window: usize,
    #[serde(default)]
    pub scheme: DifferentiationScheme,
}

impl IngestSpec {
    pub fn new(inputs: Vec<PathBuf>, window: usize) -> Self {
        IngestSpec {
            inputs,
            columns: ColumnMap::default(),
            window,
            scheme: DifferentiationScheme::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "smoothing window must be an odd integer ≥ 3, got {}",
                self.window
            )));
        }
        if self.inputs.is_empty() {
            return Err(Error::InvalidArgument("no input files".into()));
        }
        Ok(())
    }
}

/// Raw and derived series for one ingested file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestRecord {
    pub file: PathBuf,
    pub velocity_estimated: bool,
    pub raw_angle: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothed_angle: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_velocity: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_velocity: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestManifest {
    pub window: usize,
    pub scheme: DifferentiationScheme,
    pub records: Vec<IngestRecord>,
}

#[derive(Debug, Clone)]
pub struct IngestOutput {
    pub trajectories: Vec<Trajectory>,
    pub manifest: IngestManifest,
}

/// Weight matrix `H = A A⁺` of the least-squares polynomial fit over one
/// window; row `i` maps the window samples to the fitted value at `i`.
fn savgol_hat(window: usize, order: usize) -> Result<DMatrix<f64>> {
    let h = (window / 2) as f64;
    let a = DMatrix::from_fn(window, order + 1, |i, j| ((i as f64 - h) / h.max(1.0)).powi(j as i32));
    Ok(&a * pinv(&a, None)?)
}

/// Savitzky–Golay smoothing with polynomial order `min(3, window − 1)`.
/// The first and last `window / 2` samples are taken from the polynomial
/// fitted to the first resp. last full window.
pub fn savitzky_golay(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "smoothing window must be an odd integer ≥ 3, got {window}"
        )));
    }
    let m = series.len();
    if window > m {
        return Err(Error::InvalidArgument(format!(
            "smoothing window {window} is longer than the series ({m} samples)"
        )));
    }
    let hat = savgol_hat(window, 3.min(window - 1))?;
    let half = window / 2;
    let x = DVector::from_column_slice(series);
    let mut out = vec![0.0; m];
    let centre = hat.row(half);
    for (k, o) in out.iter_mut().enumerate().take(m - half).skip(half) {
        *o = centre.dot(&x.rows(k - half, window).transpose());
    }
    let head = &hat * x.rows(0, window);
    let tail = &hat * x.rows(m - window, window);
    for i in 0..half {
        out[i] = head[i];
        out[m - half + i] = tail[half + 1 + i];
    }
    Ok(out)
}

/// Central differences, forward/backward at the first/last sample.
pub fn differentiate(series: &[f64], dt: f64) -> Result<Vec<f64>> {
    let m = series.len();
    if m < 2 {
        return Err(Error::InvalidArgument("need at least two samples to differentiate".into()));
    }
    let mut d = vec![0.0; m];
    d[0] = (series[1] - series[0]) / dt;
    d[m - 1] = (series[m - 1] - series[m - 2]) / dt;
    for k in 1..m - 1 {
        d[k] = (series[k + 1] - series[k - 1]) / (2.0 * dt);
    }
    Ok(d)
}

/// Smoothed angle and its estimated derivative.
pub fn estimate_velocity(angle: &[f64], dt: f64, window: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let smooth = savitzky_golay(angle, window)?;
    let vel = differentiate(&smooth, dt)?;
    Ok((smooth, vel))
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h == name)
}

fn ingest_file(path: &Path, spec: &IngestSpec) -> Result<(Trajectory, IngestRecord)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let err = |row: usize, msg: String| Error::Csv {
        path: path.to_path_buf(),
        row,
        msg,
    };
    let headers = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let cols = &spec.columns;
    let t_col = column(&headers, &cols.time).ok_or_else(|| err(1, format!("missing time column `{}`", cols.time)))?;
    let a_col = column(&headers, &cols.angle).ok_or_else(|| err(1, format!("missing angle column `{}`", cols.angle)))?;
    let v_col = column(&headers, &cols.velocity);
    let u_col = cols.input.as_deref().and_then(|n| column(&headers, n));

    let mut t = Vec::new();
    let mut angle = Vec::new();
    let mut vel = Vec::new();
    let mut input = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| err(line, e.to_string()))?;
        let get = |c: usize| -> Result<f64> {
            let field = rec.get(c).ok_or_else(|| err(line, format!("missing column {}", c + 1)))?;
            let v: f64 = field
                .parse()
                .map_err(|_| err(line, format!("column `{}`: cannot parse `{field}`", &headers[c])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(err(line, format!("column `{}`: non-finite value", &headers[c])))
            }
        };
        t.push(get(t_col)?);
        angle.push(get(a_col)?);
        if let Some(c) = v_col {
            vel.push(get(c)?);
        }
        if let Some(c) = u_col {
            input.push(get(c)?);
        }
    }
    if t.len() < 2 {
        return Err(err(t.len() + 1, "need at least two samples".into()));
    }
    let dt = t[1] - t[0];
    let m = t.len();

    let (velocity, record) = if v_col.is_some() {
        let rec = IngestRecord {
            file: path.to_path_buf(),
            velocity_estimated: false,
            raw_angle: angle.clone(),
            smoothed_angle: None,
            raw_velocity: Some(vel.clone()),
            estimated_velocity: None,
        };
        (vel, rec)
    } else {
        let (smooth, est) = estimate_velocity(&angle, dt, spec.window).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::InvalidArgument(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let rec = IngestRecord {
            file: path.to_path_buf(),
            velocity_estimated: true,
            raw_angle: angle.clone(),
            smoothed_angle: Some(smooth),
            raw_velocity: None,
            estimated_velocity: Some(est.clone()),
        };
        (est, rec)
    };
    let mut states = DMatrix::zeros(2, m);
    states.row_mut(0).copy_from_slice(&angle);
    states.row_mut(1).copy_from_slice(&velocity);
    let inputs = u_col.map(|_| DMatrix::from_row_slice(1, m, &input));
    let traj = Trajectory::new(dt, t, states, inputs, 0)?;
    Ok((traj, record))
}

/// Reads every file of `spec` into a two-state trajectory `(angle, velocity)`.
pub fn ingest_measurements(spec: &IngestSpec) -> Result<IngestOutput> {
    spec.validate()?;
    let mut trajectories = Vec::with_capacity(spec.inputs.len());
    let mut records = Vec::with_capacity(spec.inputs.len());
    for path in &spec.inputs {
        let (t, r) = ingest_file(path, spec)?;
        trajectories.push(t);
        records.push(r);
    }
    Ok(IngestOutput {
        trajectories,
        manifest: IngestManifest {
            window: spec.window,
            scheme: spec.scheme,
            records,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use std::io::Write;

    #[test]
    fn ramp_is_exact() {
        let dt = 0.001;
        let x: Vec<f64> = (0..500).map(|k| k as f64 * dt).collect();
        let (s, v) = estimate_velocity(&x, dt, 21).unwrap();
        for k in 0..500 {
            assert!((s[k] - x[k]).abs() < 1e-12);
            assert!((v[k] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sine_derivative_within_one_percent() {
        let dt = 0.001;
        let t: Vec<f64> = (0..2001).map(|k| k as f64 * dt).collect();
        let x: Vec<f64> = t.iter().map(|t| (2.0 * PI * t).sin()).collect();
        let (_, v) = estimate_velocity(&x, dt, 21).unwrap();
        for k in 10..1990 {
            let exact = 2.0 * PI * (2.0 * PI * t[k]).cos();
            assert!((v[k] - exact).abs() <= 0.01 * 2.0 * PI, "k={k}");
        }
    }

    #[test]
    fn cubic_is_reproduced_including_edges() {
        let x: Vec<f64> = (0..30).map(|k| {
            let t = k as f64 * 0.1;
            1.0 - t + 0.5 * t * t - 0.2 * t * t * t
        }).collect();
        let s = savitzky_golay(&x, 7).unwrap();
        for (a, b) in s.iter().zip(&x) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn window_checks() {
        assert!(savitzky_golay(&[1.0; 10], 4).is_err());
        assert!(savitzky_golay(&[1.0; 10], 1).is_err());
        assert!(savitzky_golay(&[1.0; 10], 11).is_err());
        assert!(savitzky_golay(&[1.0; 3], 3).is_ok());
    }

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::File::create(&p).unwrap().write_all(text.as_bytes()).unwrap();
        p
    }

    #[test]
    fn velocity_column_passes_through() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "t,x1,x2\n0,0,5\n0.1,1,6\n0.2,2,7\n0.3,3,8\n");
        let out = ingest_measurements(&IngestSpec::new(vec![p], 3)).unwrap();
        assert_eq!(out.trajectories[0].series(1), vec![5.0, 6.0, 7.0, 8.0]);
        assert!(!out.manifest.records[0].velocity_estimated);
    }

    #[test]
    fn angle_only_file_is_estimated() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = String::from("t,x1,u1\n");
        for k in 0..50 {
            let t = k as f64 * 0.01;
            text.push_str(&format!("{t},{},{}\n", 2.0 * t, 0.5));
        }
        let p = write(dir.path(), "b.csv", &text);
        let out = ingest_measurements(&IngestSpec::new(vec![p], 5)).unwrap();
        let tr = &out.trajectories[0];
        assert!(tr.series(1).iter().all(|v| (v - 2.0).abs() < 1e-9));
        assert_eq!(tr.input_dim(), 1);
        let rec = &out.manifest.records[0];
        assert!(rec.velocity_estimated);
        assert_eq!(rec.raw_angle.len(), 50);
        assert!(rec.estimated_velocity.is_some());
    }

    #[test]
    fn malformed_rows_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.csv", "t,x1\n0,0\n0.1,zz\n0.2,1\n");
        match ingest_measurements(&IngestSpec::new(vec![p], 3)) {
            Err(Error::Csv { row, msg, .. }) => {
                assert_eq!(row, 3);
                assert!(msg.contains("x1"));
            }
            other => panic!("{other:?}"),
        }
        let p = write(dir.path(), "d.csv", "time,x1\n0,0\n");
        assert!(ingest_measurements(&IngestSpec::new(vec![p.clone()], 3)).is_err());
        let p = write(dir.path(), "e.csv", "t,x1\n0,0\n0.1,1\n0.2,1\n");
        assert!(ingest_measurements(&IngestSpec::new(vec![p], 5)).is_err());
    }
}
