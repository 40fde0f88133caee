//! Job specifications: the merged view of CLI flags, an optional `--job` JSON
//! file and the defaults (seed 42, overridable through `HAMSYM_SEED`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use hamsym::expr::SampleDomain;
use hamsym::geometry::{Chart, GeometryKind};
use hamsym::symmetry::{HamiltonianSystem, Settings};

use crate::{input_err, CmdError};

/// One verification/classification/integration job. Every field is optional
/// here; each command states which ones it requires.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JobSpec {
    pub geometry: Option<String>,
    pub n: Option<usize>,
    pub hamiltonian: Option<String>,
    pub fields: Vec<String>,
    pub functions: Vec<String>,
    /// Theorem name for `verify` jobs stored as files.
    pub theorem: Option<String>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub tol_flow: Option<f64>,
    /// Per-coordinate `[lo, hi]`; a single entry applies to every coordinate.
    pub domain: Vec<[f64; 2]>,
    pub format: Option<String>,
    /// Scaling degree for the primitive check.
    pub lambda: Option<f64>,
    /// Flow parameters for flow-level checks (defaults to 0.1, 0.5, 1.0).
    pub s: Vec<f64>,
    pub h: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub monitor: Vec<String>,
    pub mode: Option<String>,
}

impl JobSpec {
    pub fn from_file(path: &Path) -> Result<Self, CmdError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| input_err(format!("cannot read job file {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| input_err(format!("invalid job file {}: {e}", path.display())))
    }

    /// Overlay `other` (CLI flags) on top of `self` (job file): explicit
    /// values win, list flags replace when non-empty.
    pub fn merged_with(mut self, other: JobSpec) -> JobSpec {
        if other.geometry.is_some() {
            self.geometry = other.geometry;
        }
        if other.n.is_some() {
            self.n = other.n;
        }
        if other.hamiltonian.is_some() {
            self.hamiltonian = other.hamiltonian;
        }
        if !other.fields.is_empty() {
            self.fields = other.fields;
        }
        if !other.functions.is_empty() {
            self.functions = other.functions;
        }
        if other.theorem.is_some() {
            self.theorem = other.theorem;
        }
        if other.samples.is_some() {
            self.samples = other.samples;
        }
        if other.seed.is_some() {
            self.seed = other.seed;
        }
        if other.tol.is_some() {
            self.tol = other.tol;
        }
        if other.tol_flow.is_some() {
            self.tol_flow = other.tol_flow;
        }
        if !other.domain.is_empty() {
            self.domain = other.domain;
        }
        if other.format.is_some() {
            self.format = other.format;
        }
        if other.lambda.is_some() {
            self.lambda = other.lambda;
        }
        if !other.s.is_empty() {
            self.s = other.s;
        }
        if other.h.is_some() {
            self.h = other.h;
        }
        if other.x0.is_some() {
            self.x0 = other.x0;
        }
        if !other.monitor.is_empty() {
            self.monitor = other.monitor;
        }
        if other.mode.is_some() {
            self.mode = other.mode;
        }
        self
    }

    pub fn chart(&self) -> Result<Chart, CmdError> {
        let geometry = self
            .geometry
            .as_deref()
            .ok_or_else(|| input_err("missing --geometry"))?;
        let kind = GeometryKind::parse(geometry)
            .ok_or_else(|| input_err(format!("unknown geometry kind `{geometry}`")))?;
        let n = self.n.ok_or_else(|| input_err("missing --n"))?;
        Chart::new(kind, n).map_err(input_err)
    }

    /// Default seed is 42; `HAMSYM_SEED` overrides it; an explicit seed wins.
    pub fn resolved_seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            std::env::var("HAMSYM_SEED")
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(hamsym::expr::sample::DEFAULT_SEED)
        })
    }

    pub fn settings(&self, chart: &Chart) -> Result<Settings, CmdError> {
        let mut settings = Settings::for_chart(chart);
        let dim = chart.dim();
        match self.domain.len() {
            0 => {}
            1 => {
                let [lo, hi] = self.domain[0];
                settings.domain = SampleDomain::uniform(dim, lo, hi);
            }
            len if len == dim => {
                settings.domain.intervals = self.domain.iter().map(|&[lo, hi]| (lo, hi)).collect();
            }
            len => {
                return Err(input_err(format!(
                    "--domain given {len} times; expected 1 or {dim}"
                )));
            }
        }
        if let Some(samples) = self.samples {
            settings.domain.samples = samples;
        }
        settings.domain.seed = self.resolved_seed();
        if let Some(tol) = self.tol {
            settings.tol.exact = tol;
        }
        if let Some(tol_flow) = self.tol_flow {
            settings.tol.flow = tol_flow;
        }
        settings.domain.validate().map_err(input_err)?;
        Ok(settings)
    }

    /// Build the Hamiltonian system this job describes.
    pub fn system(&self) -> Result<HamiltonianSystem, CmdError> {
        let chart = self.chart()?;
        let settings = self.settings(&chart)?;
        let text = self
            .hamiltonian
            .as_deref()
            .ok_or_else(|| input_err("missing --hamiltonian"))?;
        let h = chart.parse_expr(text).map_err(input_err)?;
        HamiltonianSystem::with_settings(chart, h, settings).map_err(input_err)
    }

    /// Flow parameters for flow-level checks.
    pub fn flow_parameters(&self) -> Vec<f64> {
        if self.s.is_empty() {
            vec![0.1, 0.5, 1.0]
        } else {
            self.s.clone()
        }
    }
}

/// Output rendering selected by `--format`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Human,
}

impl OutputFormat {
    pub fn from_spec(spec: &JobSpec) -> Result<Self, CmdError> {
        match spec.format.as_deref() {
            None | Some("json") => Ok(OutputFormat::Json),
            Some("csv") => Ok(OutputFormat::Csv),
            Some("human") => Ok(OutputFormat::Human),
            Some(other) => Err(input_err(format!("unknown format `{other}`"))),
        }
    }
}
