//! Symmetry predicates and theorem checkers for Hamiltonian systems on the
//! four geometries: constants of motion, dissipated quantities, Noether
//! biconditionals, infinitesimal/dynamical/scaling symmetries,
//! Hamiltonian-field recognition, canonoid-generator characterization and the
//! cosymplectic primitive criterion.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{
    sample::{admissible_points, residual_on_samples},
    Components, EvalError, SampleDomain, SampleError, ScalarExpr,
};
use crate::geometry::{Chart, GeometryError, GeometryKind, Structure, VectorField};

mod canonoid;
mod predicates;
mod recover;

pub use canonoid::{CanonoidReport, HamiltonianRecognition, PrimitiveReport};
pub use predicates::{DynamicalReport, InfinitesimalReport, NoetherReport, ScalingReport};
pub use recover::{RecoveredFunction, RecoveredFunctionDescription};

/// Verdict tolerances. Exact-symbolic identities and identities involving
/// numerically recovered functions get separate thresholds; flow-level checks
/// get a third. All are CLI-overridable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Symbolic-exact identities (default 1e-9).
    pub exact: f64,
    /// Identities involving recovered numeric K/g (default 1e-6).
    pub numeric: f64,
    /// Flow / finite-difference identities (default 1e-5).
    pub flow: f64,
    /// Accepted standard deviation of the per-point Λ estimates (default 1e-6).
    pub lambda_dev: f64,
    /// |H| cutoff below which points are skipped when estimating Λ
    /// (default 1e-3).
    pub h_cutoff: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exact: 1e-9,
            numeric: 1e-6,
            flow: 1e-5,
            lambda_dev: 1e-6,
            h_cutoff: 1e-3,
        }
    }
}

/// Sampling domain, tolerances and recovery parameters shared by all
/// predicates of one system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    pub domain: SampleDomain,
    pub tol: Tolerances,
    /// Probe points for checks on numerically recovered functions.
    pub probes: usize,
    /// Step of the 5-point stencil differentiating recovered functions.
    pub stencil_step: f64,
    /// Absolute adaptive-Simpson tolerance per line-integration segment.
    pub quad_tol: f64,
}

impl Settings {
    pub fn for_chart(chart: &Chart) -> Self {
        Settings {
            domain: SampleDomain::default_for_dim(chart.dim()),
            tol: Tolerances::default(),
            probes: 20,
            stencil_step: 1e-3,
            quad_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, Error)]
pub enum SymmetryError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sampling(#[from] SampleError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("field has {got} components, chart dimension is {expected}")]
    FieldDimension { expected: usize, got: usize },
    #[error("operation requires a {expected} chart, got {got}")]
    UnsupportedGeometry {
        expected: &'static str,
        got: GeometryKind,
    },
    #[error("|H| stays below the cutoff {cutoff} on the sample box; scaling degree is undefined")]
    DegenerateHamiltonian { cutoff: f64 },
    #[error("line integration hit a singularity: {0}")]
    IntegrationPath(EvalError),
}

/// One named check with its verdict and worst residual.
#[derive(Clone, Debug, Serialize)]
pub struct PredicateResult {
    pub name: String,
    pub verdict: bool,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

impl PredicateResult {
    pub(crate) fn from_equality(name: &str, eq: crate::expr::Equality) -> Self {
        PredicateResult {
            name: name.to_string(),
            verdict: eq.verdict,
            max_residual: eq.max_residual,
            witness: eq.witness,
        }
    }

    pub(crate) fn from_residual(name: &str, residual: f64, tol: f64) -> Self {
        PredicateResult {
            name: name.to_string(),
            verdict: residual <= tol,
            max_residual: residual,
            witness: None,
        }
    }
}

/// A Hamiltonian system `(chart, H)` with its derived data cached:
/// `X_H`, the dynamics field, Reeb fields and the good-system flag.
#[derive(Clone, Debug)]
pub struct HamiltonianSystem {
    chart: Chart,
    h: ScalarExpr,
    x_h: VectorField,
    dynamics: VectorField,
    reeb: Vec<VectorField>,
    settings: Settings,
    good: Option<bool>,
}

impl HamiltonianSystem {
    pub fn new(chart: Chart, h: ScalarExpr) -> Result<Self, SymmetryError> {
        let settings = Settings::for_chart(&chart);
        Self::with_settings(chart, h, settings)
    }

    pub fn with_settings(
        chart: Chart,
        h: ScalarExpr,
        settings: Settings,
    ) -> Result<Self, SymmetryError> {
        settings.domain.validate()?;
        if let Some(max) = h.max_coord_index() {
            if max >= chart.dim() {
                return Err(SymmetryError::FieldDimension {
                    expected: chart.dim(),
                    got: max + 1,
                });
            }
        }
        let x_h = chart.hamiltonian_vector_field(&h);
        let dynamics = chart.evolution_field(&h);
        let reeb = chart.reeb_fields().unwrap_or_default();
        let good = match chart.kind() {
            GeometryKind::Contact | GeometryKind::Cocontact => {
                let rate = reeb[0].apply(&h);
                let eq = crate::expr::equal_on_samples(
                    &rate,
                    &ScalarExpr::zero(),
                    &settings.domain,
                    settings.tol.exact,
                )?;
                Some(eq.verdict)
            }
            _ => None,
        };
        Ok(HamiltonianSystem {
            chart,
            h,
            x_h,
            dynamics,
            reeb,
            settings,
            good,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn kind(&self) -> GeometryKind {
        self.chart.kind()
    }

    pub fn hamiltonian(&self) -> &ScalarExpr {
        &self.h
    }

    /// The Hamiltonian vector field `X_H`.
    pub fn hamiltonian_field(&self) -> &VectorField {
        &self.x_h
    }

    /// The kind's dynamics field: `X_H` (symplectic, contact) or `E_H`
    /// (cosymplectic, cocontact).
    pub fn dynamics(&self) -> &VectorField {
        &self.dynamics
    }

    pub fn reeb(&self) -> &[VectorField] {
        &self.reeb
    }

    /// Contact-direction Reeb field (`R` on contact, `R_z` on cocontact).
    pub(crate) fn contact_reeb(&self) -> &VectorField {
        &self.reeb[0]
    }

    /// Time-direction Reeb field (`R` on cosymplectic, `R_t` on cocontact).
    pub(crate) fn time_reeb(&self) -> &VectorField {
        match self.kind() {
            GeometryKind::Cosymplectic => &self.reeb[0],
            GeometryKind::Cocontact => &self.reeb[1],
            _ => unreachable!("no time Reeb field"),
        }
    }

    pub fn structure(&self) -> &Structure {
        self.chart.structure()
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    /// Good contact/cocontact flag: `RH ≡ 0` resp. `R_z H ≡ 0` on samples.
    /// `None` for symplectic and cosymplectic charts.
    pub fn is_good(&self) -> Option<bool> {
        self.good
    }

    pub(crate) fn check_field_dim(&self, x: &VectorField) -> Result<(), SymmetryError> {
        if x.dim() != self.chart.dim() {
            return Err(SymmetryError::FieldDimension {
                expected: self.chart.dim(),
                got: x.dim(),
            });
        }
        Ok(())
    }

    pub(crate) fn equality<T: Components>(
        &self,
        name: &str,
        a: &T,
        b: &T,
        tol: f64,
    ) -> Result<PredicateResult, SymmetryError> {
        let eq = crate::expr::equal_on_samples(a, b, &self.settings.domain, tol)?;
        Ok(PredicateResult::from_equality(name, eq))
    }

    /// Admissible probe points for the given expressions.
    pub(crate) fn probe_points(
        &self,
        exprs: &[ScalarExpr],
    ) -> Result<Vec<Vec<f64>>, SymmetryError> {
        Ok(admissible_points(
            exprs,
            &self.settings.domain,
            self.settings.probes,
        )?)
    }

    pub(crate) fn sampled_residual(
        &self,
        a: &[ScalarExpr],
        b: &[ScalarExpr],
    ) -> Result<f64, SymmetryError> {
        Ok(residual_on_samples(a, b, &self.settings.domain)?.0)
    }
}
