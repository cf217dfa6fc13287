//! Run configuration: a single JSON document whose sections are consumed by
//! the individual subcommands. Unknown keys are rejected so typos surface as
//! configuration errors instead of silently changing a run. Exact rational
//! values are written as `"p/q"` strings; plain JSON numbers are accepted
//! wherever a float suffices.

use std::path::Path;

use charflow::algebra::{rat, rat_from_str, rat_to_f64, Rat};
use charflow::{Error, Result};
use serde::{Deserialize, Serialize};

/// A numeric entry that is either a JSON number or an exact `"p/q"` string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberEntry {
    Number(f64),
    Exact(String),
}

impl NumberEntry {
    pub fn to_f64(&self) -> Result<f64> {
        match self {
            NumberEntry::Number(x) => Ok(*x),
            NumberEntry::Exact(s) => Ok(rat_to_f64(&rat_from_str(s)?)),
        }
    }
}

/// Exact rational parsed from a `"p/q"` string.
pub fn parse_rat_list(entries: &[String], what: &str) -> Result<Vec<Rat>> {
    entries
        .iter()
        .map(|s| {
            rat_from_str(s).map_err(|e| Error::Parse(format!("{what}: {e}")))
        })
        .collect()
}

fn default_corrupt_factor() -> String {
    "2".to_string()
}

/// Negative control: multiply one window cell of the unshifted grid by a
/// nonzero factor before certification. The identity suite must then fail.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorruptCell {
    pub row: i64,
    pub col: i64,
    #[serde(default = "default_corrupt_factor")]
    pub factor: String,
}

/// Explicit initial state for `integrate`; when absent the state is read off
/// the exact rational solution at the first waypoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPoint {
    pub state: Vec<NumberEntry>,
}

fn default_samples() -> usize {
    32
}

/// Piecewise-linear path through the deformation space; each waypoint lists
/// the values `s_1..s_N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub waypoints: Vec<Vec<NumberEntry>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

/// Numerical thresholds. `rtol`, `atol`, `singular_margin`, and `max_steps`
/// control the integrator; `endpoint`, `commute`, and `float_check` gate the
/// float diagnostics of `integrate`, `symmetry --mode float`, and
/// `lax --mode float`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub singular_margin: f64,
    pub max_steps: usize,
    pub endpoint: f64,
    pub commute: f64,
    pub float_check: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
            singular_margin: 1e-3,
            max_steps: 1_000_000,
            endpoint: 1e-8,
            commute: 1e-7,
            float_check: 1e-8,
        }
    }
}

/// The full run configuration. Every section is optional; each subcommand
/// validates the sections it needs and falls back to the built-in
/// two-by-two example grid when no grid data is given.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Window size for relation checks that need no grid.
    pub l: Option<usize>,
    /// Number of deformation variables for relation checks that need no grid.
    pub n: Option<usize>,
    /// Weight vector `theta_0..theta_N` as exact `"p/q"` strings.
    pub theta: Option<Vec<String>>,
    /// First label tuple of the character pair (length L, entries shifted row labels).
    pub nu: Option<Vec<i64>>,
    /// Second label tuple of the character pair (length L).
    pub nu_prime: Option<Vec<i64>>,
    /// Explicit exponent list `e_0..e_{L-1}` (alternative to a grid).
    pub e: Option<Vec<String>>,
    /// Explicit exponent list `kappa_0..kappa_{L-1}` (alternative to a grid).
    pub kappa: Option<Vec<String>>,
    /// Negative control for `certify`.
    pub corrupt: Option<CorruptCell>,
    /// Initial state for `integrate`.
    pub point: Option<StartPoint>,
    /// Deformation path for `integrate`.
    pub path: Option<PathSpec>,
    /// Numerical thresholds.
    pub tolerances: Option<Tolerances>,
    /// Comma-separated generator word for `symmetry`, applied right to left.
    pub word: Option<String>,
    /// Number of random sample points for relation and float checks.
    pub trials: Option<usize>,
    /// Seed for randomized checks; the `--seed` flag takes precedence.
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::invalid(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            Error::invalid(format!("config {} is not valid: {e}", path.display()))
        })
    }

    /// Grid data with the documented defaults filled in.
    pub fn grid_data(&self) -> Result<(Vec<Rat>, Vec<i64>, Vec<i64>)> {
        let theta = match &self.theta {
            Some(t) => parse_rat_list(t, "theta")?,
            None => vec![rat(3, 2), rat(-2, 3)],
        };
        let nu = self.nu.clone().unwrap_or_else(|| vec![0, 1]);
        let nu_prime = self.nu_prime.clone().unwrap_or_else(|| vec![0; nu.len()]);
        Ok((theta, nu, nu_prime))
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.clone().unwrap_or_default()
    }
}
