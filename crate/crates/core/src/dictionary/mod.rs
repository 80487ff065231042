//! Observable dictionaries `Ψ(x) = (ψ1(x), ..., ψN(x))`.
//!
//! A [`Dictionary`] is an ordered, duplicate-free list of observables over an
//! `n`-dimensional state. When the first `n` observables are the coordinates
//! themselves (the identity prefix), the projection `P = (I_n 0)` recovers the
//! state from a lifted vector.

mod expr;
mod generate;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use expr::Expr;
pub(crate) use expr::sgn as expr_sgn;

use crate::dynamics::{GolfParameters, DUFFING_DAMPING, PENDULUM_DAMPING};
use crate::{Error, Result};
use generate::PendulumTerm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObservableKind {
    Coordinate {
        index: usize,
    },
    Monomial {
        exponents: Vec<u32>,
    },
    /// `sin(x1)^sin · cos(x1)^cos · x2^velocity`
    TrigMonomial {
        sin: u32,
        cos: u32,
        velocity: u32,
    },
    /// `sgn(x2) |m a x2² + m g cos x1|`
    FrictionTerm {
        params: GolfParameters,
    },
    #[default]
    Custom,
}

/// One observable. The expression is what gets evaluated; the kind records
/// how it was generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableFn {
    pub label: String,
    pub expr: Expr,
    #[serde(default)]
    pub kind: ObservableKind,
}

impl ObservableFn {
    pub fn coordinate(index: usize) -> Self {
        Self::from_kind(ObservableKind::Coordinate { index }, Expr::var(index))
    }

    pub fn monomial(exponents: &[u32]) -> Self {
        let factors = exponents
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| Expr::pow(Expr::var(i), e))
            .collect();
        let kind = match exponents.iter().filter(|&&e| e > 0).count() {
            1 if exponents.iter().sum::<u32>() == 1 => ObservableKind::Coordinate {
                index: exponents.iter().position(|&e| e == 1).unwrap(),
            },
            _ => ObservableKind::Monomial {
                exponents: exponents.to_vec(),
            },
        };
        Self::from_kind(kind, Expr::product(factors))
    }

    pub fn trig_monomial(sin: u32, cos: u32, velocity: u32) -> Self {
        let expr = Expr::product(vec![
            Expr::pow(Expr::sin(Expr::var(0)), sin),
            Expr::pow(Expr::cos(Expr::var(0)), cos),
            Expr::pow(Expr::var(1), velocity),
        ]);
        let kind = if (sin, cos, velocity) == (0, 0, 1) {
            ObservableKind::Coordinate { index: 1 }
        } else {
            ObservableKind::TrigMonomial { sin, cos, velocity }
        };
        Self::from_kind(kind, expr)
    }

    pub fn friction_term(p: &GolfParameters) -> Self {
        let inner = Expr::sum(vec![
            Expr::product(vec![
                Expr::Const(p.mass),
                Expr::pow(Expr::var(1), 2),
                Expr::Const(p.com_length),
            ]),
            Expr::product(vec![
                Expr::Const(p.mass),
                Expr::Const(p.gravity),
                Expr::cos(Expr::var(0)),
            ]),
        ]);
        let expr = Expr::product(vec![Expr::sgn(Expr::var(1)), Expr::abs(inner)]);
        Self::from_kind(ObservableKind::FrictionTerm { params: p.clone() }, expr)
    }

    pub fn custom(expr: Expr) -> Self {
        Self::from_kind(ObservableKind::Custom, expr)
    }

    fn from_kind(kind: ObservableKind, expr: Expr) -> Self {
        ObservableFn {
            label: expr.to_string(),
            expr,
            kind,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Normalized textual form used for duplicate detection.
    pub fn canonical(&self) -> String {
        Expr::parse(&self.expr.to_string())
            .map(|e| e.to_string())
            .unwrap_or_else(|_| self.expr.to_string())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.expr.eval(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DictionaryRecord", into = "DictionaryRecord")]
pub struct Dictionary {
    observables: Vec<ObservableFn>,
    state_dim: usize,
    identity_prefix: bool,
}

#[derive(Serialize, Deserialize)]
struct DictionaryRecord {
    state_dim: usize,
    observables: Vec<ObservableFn>,
}

impl TryFrom<DictionaryRecord> for Dictionary {
    type Error = Error;

    fn try_from(r: DictionaryRecord) -> Result<Self> {
        Dictionary::new(r.observables, r.state_dim)
    }
}

impl From<Dictionary> for DictionaryRecord {
    fn from(d: Dictionary) -> Self {
        DictionaryRecord {
            state_dim: d.state_dim,
            observables: d.observables,
        }
    }
}

impl Dictionary {
    pub fn new(observables: Vec<ObservableFn>, state_dim: usize) -> Result<Self> {
        if state_dim == 0 {
            return Err(Error::InvalidArgument("state dimension must be positive".into()));
        }
        if observables.len() < state_dim {
            return Err(Error::InvalidArgument(format!(
                "dictionary has {} observables, fewer than the state dimension {state_dim}",
                observables.len()
            )));
        }
        let mut seen = HashSet::new();
        for (i, obs) in observables.iter().enumerate() {
            if let Some(v) = obs.expr.max_var() {
                if v >= state_dim {
                    return Err(Error::Dimension(format!(
                        "observable {} (`{}`) references x{} but the state has {state_dim} coordinates",
                        i + 1,
                        obs.label,
                        v + 1
                    )));
                }
            }
            if !seen.insert(obs.canonical()) {
                return Err(Error::InvalidArgument(format!(
                    "observable {} (`{}`) duplicates an earlier one",
                    i + 1,
                    obs.label
                )));
            }
        }
        let identity_prefix = observables
            .iter()
            .take(state_dim)
            .enumerate()
            .all(|(i, o)| o.expr == Expr::Var(i));
        Ok(Dictionary {
            observables,
            state_dim,
            identity_prefix,
        })
    }

    /// The `n` coordinate functions.
    pub fn identity(state_dim: usize) -> Result<Self> {
        Self::new((0..state_dim).map(ObservableFn::coordinate).collect(), state_dim)
    }

    /// Number of observables `N`.
    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn identity_prefix(&self) -> bool {
        self.identity_prefix
    }

    pub fn observables(&self) -> &[ObservableFn] {
        &self.observables
    }

    pub fn labels(&self) -> Vec<&str> {
        self.observables.iter().map(|o| o.label.as_str()).collect()
    }

    fn check_state(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.state_dim {
            return Err(Error::Dimension(format!(
                "state has length {}, dictionary expects {}",
                x.len(),
                self.state_dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state passed to the dictionary".into()));
        }
        Ok(())
    }

    /// `Ψ(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.check_state(x)?;
        let mut out = DVector::zeros(self.len());
        self.eval_into(x, out.as_mut_slice());
        Ok(out)
    }

    /// Writes `Ψ(x)` into `out` without validating `x`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, obs) in out.iter_mut().zip(&self.observables) {
            *o = obs.eval(x);
        }
    }

    /// Lifts every column of an `n × M` matrix.
    pub fn lift(&self, states: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if states.nrows() != self.state_dim {
            return Err(Error::Dimension(format!(
                "snapshot matrix has {} rows, dictionary expects {}",
                states.nrows(),
                self.state_dim
            )));
        }
        let mut out = DMatrix::zeros(self.len(), states.ncols());
        for (j, col) in states.column_iter().enumerate() {
            let x = col.as_slice();
            self.check_state(x).map_err(|e| match e {
                Error::NonFinite(_) => Error::NonFinite(format!("snapshot column {j}")),
                other => other,
            })?;
            self.eval_into(x, out.column_mut(j).as_mut_slice());
        }
        Ok(out)
    }

    pub fn projection(&self) -> ProjectionMatrix {
        ProjectionMatrix {
            rows: self.state_dim,
            cols: self.len(),
        }
    }
}

/// `P = (I_n 0_{n×(N−n)})`, stored by shape only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectionMatrix {
    pub rows: usize,
    pub cols: usize,
}

impl ProjectionMatrix {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if cols < rows {
            return Err(Error::InvalidArgument(format!(
                "projection needs N >= n, got N = {cols}, n = {rows}"
            )));
        }
        Ok(ProjectionMatrix { rows, cols })
    }

    pub fn project(&self, z: &[f64]) -> Result<DVector<f64>> {
        if z.len() != self.cols {
            return Err(Error::Dimension(format!(
                "lifted vector has length {}, projection expects {}",
                z.len(),
                self.cols
            )));
        }
        Ok(DVector::from_column_slice(&z[..self.rows]))
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::identity(self.rows, self.cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryKind {
    Pendulum,
    Duffing,
    Golf,
    Identity,
    Polynomial,
}

impl DictionaryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DictionaryKind::Pendulum => "pendulum",
            DictionaryKind::Duffing => "duffing",
            DictionaryKind::Golf => "golf",
            DictionaryKind::Identity => "identity",
            DictionaryKind::Polynomial => "polynomial",
        }
    }
}

impl fmt::Display for DictionaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DictionaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pendulum" => DictionaryKind::Pendulum,
            "duffing" => DictionaryKind::Duffing,
            "golf" => DictionaryKind::Golf,
            "identity" => DictionaryKind::Identity,
            "polynomial" => DictionaryKind::Polynomial,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown dictionary system `{other}` (expected pendulum, duffing, golf, identity or polynomial)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DictionaryParameters {
    /// Damping of the drift used for the derivative closure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub golf: Option<GolfParameters>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionarySpec {
    pub system: DictionaryKind,
    /// Number of observables `N`.
    pub size: usize,
    /// Needed for `identity` and `polynomial`; the others are planar.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_dim: Option<usize>,
    #[serde(default)]
    pub parameters: DictionaryParameters,
}

impl DictionarySpec {
    pub fn new(system: DictionaryKind, size: usize) -> Self {
        DictionarySpec {
            system,
            size,
            state_dim: None,
            parameters: DictionaryParameters::default(),
        }
    }

    pub fn with_state_dim(mut self, n: usize) -> Self {
        self.state_dim = Some(n);
        self
    }
}

/// Builds the dictionary described by `spec`. Pure function of the spec.
pub fn build_dictionary(spec: &DictionarySpec) -> Result<Dictionary> {
    let n = match spec.system {
        DictionaryKind::Identity | DictionaryKind::Polynomial => spec.state_dim.ok_or_else(|| {
            Error::InvalidArgument(format!("`{}` dictionary needs state_dim", spec.system))
        })?,
        _ => 2,
    };
    if let Some(sd) = spec.state_dim {
        if sd != n {
            return Err(Error::InvalidArgument(format!(
                "`{}` dictionary is defined for n = {n}, got state_dim = {sd}",
                spec.system
            )));
        }
    }
    if spec.size < n {
        return Err(Error::InvalidArgument(format!(
            "dictionary size {} is below the state dimension {n}",
            spec.size
        )));
    }
    let observables = match spec.system {
        DictionaryKind::Pendulum => {
            let d = spec.parameters.damping.unwrap_or(PENDULUM_DAMPING);
            generate::pendulum_terms(spec.size, d)?
                .into_iter()
                .map(|t| match t {
                    PendulumTerm::Angle => ObservableFn::coordinate(0),
                    PendulumTerm::Trig { sin, cos, vel } => ObservableFn::trig_monomial(sin, cos, vel),
                })
                .collect()
        }
        DictionaryKind::Duffing => {
            let d = spec.parameters.damping.unwrap_or(DUFFING_DAMPING);
            generate::duffing_terms(spec.size, d)?
                .into_iter()
                .map(|(a, b)| ObservableFn::monomial(&[a, b]))
                .collect()
        }
        DictionaryKind::Golf => {
            if spec.size != 4 {
                return Err(Error::InvalidArgument(format!(
                    "golf dictionary has exactly 4 observables, {} requested",
                    spec.size
                )));
            }
            let p = spec.parameters.golf.clone().unwrap_or_default();
            p.validate()?;
            vec![
                ObservableFn::coordinate(0),
                ObservableFn::coordinate(1),
                ObservableFn::custom(Expr::sin(Expr::var(0))),
                ObservableFn::friction_term(&p),
            ]
        }
        DictionaryKind::Identity => {
            if spec.size != n {
                return Err(Error::InvalidArgument(format!(
                    "identity dictionary has exactly {n} observables, {} requested",
                    spec.size
                )));
            }
            (0..n).map(ObservableFn::coordinate).collect()
        }
        DictionaryKind::Polynomial => generate::polynomial_terms(spec.size, n)
            .iter()
            .map(|e| ObservableFn::monomial(e))
            .collect(),
    };
    Dictionary::new(observables, n)
}
