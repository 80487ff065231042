use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::InputSignal;
use crate::{Error, Result};

/// Uniformly sampled state (and optional input) sequence.
///
/// `states` is `n × M` and `inputs`, when present, is `p × M`; column `k`
/// belongs to `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: DMatrix<f64>,
    pub inputs: Option<DMatrix<f64>>,
    pub seed: u64,
    pub signal: Option<InputSignal>,
}

impl Trajectory {
    pub fn new(
        dt: f64,
        times: Vec<f64>,
        states: DMatrix<f64>,
        inputs: Option<DMatrix<f64>>,
        seed: u64,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
        }
        let m = times.len();
        if m == 0 {
            return Err(Error::Dimension("trajectory has no samples".into()));
        }
        if states.ncols() != m || states.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "states are {}×{} for {m} time stamps",
                states.nrows(),
                states.ncols()
            )));
        }
        if let Some(u) = &inputs {
            if u.ncols() != m || u.nrows() == 0 {
                return Err(Error::Dimension(format!(
                    "inputs are {}×{} for {m} time stamps",
                    u.nrows(),
                    u.ncols()
                )));
            }
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("trajectory inputs".into()));
            }
        }
        if states.iter().any(|v| !v.is_finite()) || times.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trajectory samples".into()));
        }
        let t0 = times[0];
        for (k, &t) in times.iter().enumerate() {
            let expected = t0 + k as f64 * dt;
            if (t - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "time stamp {k} is {t}, expected {expected} for a uniform grid with dt = {dt}"
                )));
            }
        }
        Ok(Trajectory {
            dt,
            times,
            states,
            inputs,
            seed,
            signal: None,
        })
    }

    pub fn with_signal(mut self, signal: InputSignal) -> Self {
        self.signal = Some(signal);
        self
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state_dim(&self) -> usize {
        self.states.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.as_ref().map_or(0, |u| u.nrows())
    }

    pub fn state(&self, k: usize) -> Vec<f64> {
        self.states.column(k).iter().copied().collect()
    }

    /// Row of the state matrix as a series.
    pub fn series(&self, i: usize) -> Vec<f64> {
        self.states.row(i).iter().copied().collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_csv_table(w, &self.times, &self.states, self.inputs.as_ref())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| relabel(e, path))
    }

    /// Parses the `t,x1..xn[,u1..up]` format. The step size is taken from
    /// the first two time stamps.
    pub fn read_csv<R: Read>(r: R, label: &str) -> Result<Self> {
        let table = read_csv_table(r, label)?;
        let m = table.times.len();
        if m < 2 {
            return Err(Error::Csv {
                path: label.into(),
                row: m,
                msg: "need at least two samples to infer the step size".into(),
            });
        }
        let dt = table.times[1] - table.times[0];
        Trajectory::new(dt, table.times, table.states, table.inputs, 0)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, &path.display().to_string())
    }
}

fn relabel(e: Error, path: &Path) -> Error {
    match e {
        Error::Csv { row, msg, .. } => Error::Csv {
            path: path.to_path_buf(),
            row,
            msg,
        },
        other => other,
    }
}

/// Writes the trajectory CSV format for arbitrary state/input matrices.
pub fn write_csv_table<W: Write>(
    w: W,
    times: &[f64],
    states: &DMatrix<f64>,
    inputs: Option<&DMatrix<f64>>,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let n = states.nrows();
    let p = inputs.map_or(0, |u| u.nrows());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=p).map(|i| format!("u{i}")));
    let csv_err = |e: csv::Error| Error::Csv {
        path: PathBuf::new(),
        row: 0,
        msg: e.to_string(),
    };
    out.write_record(&header).map_err(csv_err)?;
    let mut row = Vec::with_capacity(1 + n + p);
    for (k, t) in times.iter().enumerate() {
        row.clear();
        row.push(fmt_f64(*t));
        row.extend(states.column(k).iter().map(|v| fmt_f64(*v)));
        if let Some(u) = inputs {
            row.extend(u.column(k).iter().map(|v| fmt_f64(*v)));
        }
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::Csv {
        path: PathBuf::new(),
        row: 0,
        msg: e.to_string(),
    })
}

/// 17 significant digits, enough for an exact round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) struct CsvTable {
    pub times: Vec<f64>,
    pub states: DMatrix<f64>,
    pub inputs: Option<DMatrix<f64>>,
}

fn read_csv_table<R: Read>(r: R, label: &str) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let err = |row: usize, msg: String| Error::Csv {
        path: label.into(),
        row,
        msg,
    };
    let header = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names.first() != Some(&"t") {
        return Err(err(1, "first column must be `t`".into()));
    }
    let mut n = 0;
    let mut p = 0;
    for (j, name) in names.iter().enumerate().skip(1) {
        let expect_x = format!("x{}", n + 1);
        let expect_u = format!("u{}", p + 1);
        if p == 0 && *name == expect_x {
            n += 1;
        } else if *name == expect_u {
            p += 1;
        } else {
            return Err(err(1, format!("unexpected column `{name}` at position {}", j + 1)));
        }
    }
    if n == 0 {
        return Err(err(1, "no state columns".into()));
    }
    let mut times = Vec::new();
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| err(line, e.to_string()))?;
        if rec.len() != names.len() {
            return Err(err(line, format!("expected {} fields, found {}", names.len(), rec.len())));
        }
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| err(line, format!("column `{}`: cannot parse `{field}` as a number", names[j])))?;
            if !v.is_finite() {
                return Err(err(line, format!("column `{}`: non-finite value", names[j])));
            }
            if j == 0 {
                times.push(v);
            } else if j <= n {
                xs.push(v);
            } else {
                us.push(v);
            }
        }
    }
    let m = times.len();
    Ok(CsvTable {
        times,
        states: DMatrix::from_vec(n, m, xs),
        inputs: (p > 0).then(|| DMatrix::from_vec(p, m, us)),
    })
}

/// Metadata written next to a set of trajectory files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub system: String,
    pub seed: u64,
    pub dt: f64,
    pub trajectories: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub seed: u64,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<InputSignal>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes `traj_0000.csv, …` plus `manifest.json` into `dir`.
pub fn save_trajectory_set(dir: &Path, system: &str, seed: u64, set: &[Trajectory]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(set.len());
    for (i, t) in set.iter().enumerate() {
        let file = format!("traj_{i:04}.csv");
        t.save_csv(&dir.join(&file))?;
        entries.push(ManifestEntry {
            file,
            seed: t.seed,
            samples: t.len(),
            signal: t.signal.clone(),
        });
    }
    let manifest = TrajectoryManifest {
        system: system.to_string(),
        seed,
        dt: set.first().map_or(0.0, |t| t.dt),
        trajectories: entries,
    };
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Loads either a trajectory set directory (with a manifest) or a single CSV file.
pub fn load_trajectories(path: &Path) -> Result<Vec<Trajectory>> {
    if path.is_file() {
        if path.extension().is_some_and(|e| e == "json") {
            return load_from_manifest(path);
        }
        return Ok(vec![Trajectory::load_csv(path)?]);
    }
    let manifest = path.join(MANIFEST_FILE);
    if manifest.is_file() {
        return load_from_manifest(&manifest);
    }
    Err(Error::io(
        path,
        std::io::Error::new(std::io::ErrorKind::NotFound, "no trajectory file or manifest.json"),
    ))
}

fn load_from_manifest(path: &Path) -> Result<Vec<Trajectory>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: TrajectoryManifest = serde_json::from_str(&text)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    manifest
        .trajectories
        .iter()
        .map(|e| {
            let mut t = Trajectory::load_csv(&dir.join(&e.file))?;
            t.seed = e.seed;
            t.signal = e.signal.clone();
            if manifest.dt > 0.0 {
                t.dt = manifest.dt;
            }
            Ok(t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, SystemModel};

    fn sample() -> Trajectory {
        let sig = InputSignal::UniformRandom { low: -1.0, high: 1.0 };
        simulate(&SystemModel::pendulum(), &[1.0, -0.3], &sig, 0.5, 0.01, 3).unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = sample();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,x1,x2,u1\n"));
        assert_eq!(text.lines().count(), 52);
        let back = Trajectory::read_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back.states, t.states);
        assert_eq!(back.inputs, t.inputs);
        assert_eq!(back.times, t.times);
    }

    #[test]
    fn bad_rows_are_located() {
        let text = "t,x1,x2\n0,1,2\n0.1,oops,2\n";
        match Trajectory::read_csv(text.as_bytes(), "f.csv") {
            Err(Error::Csv { row, msg, .. }) => {
                assert_eq!(row, 3);
                assert!(msg.contains("x1"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        let text = "t,x1,x2\n0,1,2\n0.1,1\n";
        assert!(matches!(
            Trajectory::read_csv(text.as_bytes(), "f.csv"),
            Err(Error::Csv { row: 3, .. })
        ));
        assert!(Trajectory::read_csv("time,x1\n0,1\n".as_bytes(), "f").is_err());
    }

    #[test]
    fn nonuniform_grid_rejected() {
        let text = "t,x1\n0,1\n0.1,1\n0.25,1\n";
        assert!(Trajectory::read_csv(text.as_bytes(), "f").is_err());
    }

    #[test]
    fn set_round_trip_keeps_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let set = vec![sample(), sample()];
        save_trajectory_set(dir.path(), "pendulum", 9, &set).unwrap();
        let back = load_trajectories(dir.path()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].signal, set[0].signal);
        assert_eq!(back[1].seed, 3);
        assert_eq!(back[1].states, set[1].states);
    }
}
