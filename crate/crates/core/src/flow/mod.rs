//! Numerical flows of vector fields and flow-level verification.
//!
//! The integrator is classical fixed-step RK4. Flows of arbitrary symmetry
//! fields are integrated, not only the dynamics, so structure-preserving
//! integrators are deliberately not used; accuracy comes from the step count
//! and is checked by the order test in the suite.

use thiserror::Error;

use crate::expr::{CompiledExpr, EvalError, SampleDomain, SampleError};
use crate::geometry::{Chart, VectorField};
use crate::symmetry::SymmetryError;

mod checks;
mod monitor;

pub use checks::{
    canonoid_flow_check, pullback_residual, CanonoidFlowReport, FlowCheckOptions, FormRef,
};
pub use monitor::{monitor, MonitorMode, MonitorReport};

#[derive(Clone, Debug, Error)]
pub enum FlowError {
    #[error("step size must be positive and finite")]
    InvalidStep,
    #[error("point has {got} coordinates, chart dimension is {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("field has {got} components, chart dimension is {expected}")]
    FieldDimension { expected: usize, got: usize },
    #[error("flow left the integration bounds at step {step}")]
    OutOfBounds { step: usize },
    #[error("domain error during integration at step {step}: {error}")]
    Domain { step: usize, error: EvalError },
    #[error("operation requires a {expected} chart")]
    Unsupported { expected: &'static str },
    #[error(transparent)]
    Sampling(#[from] SampleError),
    #[error(transparent)]
    Symmetry(#[from] Box<SymmetryError>),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<SymmetryError> for FlowError {
    fn from(err: SymmetryError) -> Self {
        FlowError::Symmetry(Box::new(err))
    }
}

/// Axis-aligned integration bounds; trajectories that leave them are
/// truncated rather than integrated toward infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    /// Expand a sample box about its per-coordinate centers by `factor`.
    pub fn expand_domain(dom: &SampleDomain, factor: f64) -> Self {
        let mut lo = Vec::with_capacity(dom.dim());
        let mut hi = Vec::with_capacity(dom.dim());
        for &(a, b) in &dom.intervals {
            let center = 0.5 * (a + b);
            let half = 0.5 * (b - a) * factor;
            lo.push(center - half);
            hi.push(center + half);
        }
        Bounds { lo, hi }
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

/// Compiled vector field for the inner integration loops.
#[derive(Clone, Debug)]
pub(crate) struct CompiledField {
    comps: Vec<CompiledExpr>,
}

impl CompiledField {
    pub(crate) fn new(field: &VectorField) -> Self {
        CompiledField {
            comps: (0..field.dim())
                .map(|i| CompiledExpr::new(field.component(i)))
                .collect(),
        }
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64], stack: &mut Vec<f64>) -> Result<(), EvalError> {
        for (i, comp) in self.comps.iter().enumerate() {
            out[i] = comp.eval_with(x, stack)?;
        }
        Ok(())
    }
}

/// Scratch buffers for RK4 stepping.
struct Rk4Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
    stack: Vec<f64>,
}

impl Rk4Scratch {
    fn new(dim: usize) -> Self {
        Rk4Scratch {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
            stack: Vec::with_capacity(32),
        }
    }
}

fn rk4_step(
    field: &CompiledField,
    x: &mut [f64],
    h: f64,
    scratch: &mut Rk4Scratch,
) -> Result<(), EvalError> {
    let shift = |tmp: &mut [f64], slope: &[f64], factor: f64| {
        for ((t, xi), k) in tmp.iter_mut().zip(x.iter()).zip(slope) {
            *t = xi + factor * h * k;
        }
    };
    field.eval_into(x, &mut scratch.k1, &mut scratch.stack)?;
    shift(&mut scratch.tmp, &scratch.k1, 0.5);
    field.eval_into(&scratch.tmp, &mut scratch.k2, &mut scratch.stack)?;
    shift(&mut scratch.tmp, &scratch.k2, 0.5);
    field.eval_into(&scratch.tmp, &mut scratch.k3, &mut scratch.stack)?;
    shift(&mut scratch.tmp, &scratch.k3, 1.0);
    field.eval_into(&scratch.tmp, &mut scratch.k4, &mut scratch.stack)?;
    for (i, xi) in x.iter_mut().enumerate() {
        *xi +=
            h / 6.0 * (scratch.k1[i] + 2.0 * scratch.k2[i] + 2.0 * scratch.k3[i] + scratch.k4[i]);
    }
    Ok(())
}

/// Why a trajectory stopped before its final time.
#[derive(Clone, Debug)]
pub enum Truncation {
    Domain { at_step: usize, error: EvalError },
    OutOfBounds { at_step: usize },
}

/// Ordered RK4 samples `(s_k, x_k)` with uniform step.
#[derive(Clone, Debug)]
pub struct Trajectory {
    step: f64,
    samples: Vec<(f64, Vec<f64>)>,
    truncated: Option<Truncation>,
}

impl Trajectory {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn samples(&self) -> &[(f64, Vec<f64>)] {
        &self.samples
    }

    pub fn endpoint(&self) -> &(f64, Vec<f64>) {
        self.samples.last().expect("trajectory has x0")
    }

    pub fn truncated(&self) -> Option<&Truncation> {
        self.truncated.as_ref()
    }
}

/// Factor by which the default sample box is expanded to bound trajectories.
pub const DEFAULT_BOUNDS_FACTOR: f64 = 100.0;

/// Integrate `field` from `x0` for parameter length `s` with requested step
/// `h > 0`. The step is adjusted so that an integer number of steps lands on
/// `s` exactly; `s` may be negative (backward flow). Domain errors or leaving
/// the bounds truncate the trajectory with a flag instead of failing; when no
/// bounds are given, the default sample box expanded by
/// [`DEFAULT_BOUNDS_FACTOR`] keeps blowing-up trajectories finite.
pub fn integrate(
    chart: &Chart,
    field: &VectorField,
    x0: &[f64],
    s: f64,
    h: f64,
    bounds: Option<&Bounds>,
) -> Result<Trajectory, FlowError> {
    if h.is_nan() || h <= 0.0 || h.is_infinite() {
        return Err(FlowError::InvalidStep);
    }
    let fallback;
    let bounds = match bounds {
        Some(b) => b,
        None => {
            fallback = Bounds::expand_domain(
                &SampleDomain::default_for_dim(chart.dim()),
                DEFAULT_BOUNDS_FACTOR,
            );
            &fallback
        }
    };
    if x0.len() != chart.dim() {
        return Err(FlowError::PointDimension {
            expected: chart.dim(),
            got: x0.len(),
        });
    }
    if field.dim() != chart.dim() {
        return Err(FlowError::FieldDimension {
            expected: chart.dim(),
            got: field.dim(),
        });
    }
    let compiled = CompiledField::new(field);
    if s == 0.0 {
        return Ok(Trajectory {
            step: 0.0,
            samples: vec![(0.0, x0.to_vec())],
            truncated: None,
        });
    }
    let steps = (s.abs() / h).round().max(1.0) as usize;
    let dt = s / steps as f64;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((0.0, x0.to_vec()));
    let mut x = x0.to_vec();
    let mut scratch = Rk4Scratch::new(x.len());
    let mut truncated = None;
    for k in 1..=steps {
        if let Err(error) = rk4_step(&compiled, &mut x, dt, &mut scratch) {
            truncated = Some(Truncation::Domain { at_step: k, error });
            break;
        }
        if !bounds.contains(&x) {
            truncated = Some(Truncation::OutOfBounds { at_step: k });
            break;
        }
        samples.push((k as f64 * dt, x.clone()));
    }
    Ok(Trajectory {
        step: dt,
        samples,
        truncated,
    })
}

/// The point map `φ_s` of a field, with finite-difference Jacobian access.
/// `steps · step = s` exactly; `φ_0` is the identity.
#[derive(Clone, Debug)]
pub struct FlowMap {
    dim: usize,
    compiled: CompiledField,
    s: f64,
    steps: usize,
    bounds: Option<Bounds>,
}

impl FlowMap {
    /// Construct from a requested step magnitude `h` (adjusted so that
    /// `steps · step = s`).
    pub fn new(chart: &Chart, field: &VectorField, s: f64, h: f64) -> Result<Self, FlowError> {
        if h.is_nan() || h <= 0.0 || h.is_infinite() {
            return Err(FlowError::InvalidStep);
        }
        let steps = (s.abs() / h).round().max(1.0) as usize;
        Self::with_steps(chart, field, s, steps)
    }

    pub fn with_steps(
        chart: &Chart,
        field: &VectorField,
        s: f64,
        steps: usize,
    ) -> Result<Self, FlowError> {
        if field.dim() != chart.dim() {
            return Err(FlowError::FieldDimension {
                expected: chart.dim(),
                got: field.dim(),
            });
        }
        Ok(FlowMap {
            dim: chart.dim(),
            compiled: CompiledField::new(field),
            s,
            steps: steps.max(1),
            bounds: None,
        })
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn step(&self) -> f64 {
        self.s / self.steps as f64
    }

    /// The same map run backward: `φ_{−s}`.
    pub fn inverse(&self) -> FlowMap {
        let mut inv = self.clone();
        inv.s = -self.s;
        inv
    }

    /// Apply `φ_s` to a point.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, FlowError> {
        if x.len() != self.dim {
            return Err(FlowError::PointDimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        if self.s == 0.0 {
            return Ok(x.to_vec());
        }
        let dt = self.step();
        let mut point = x.to_vec();
        let mut scratch = Rk4Scratch::new(self.dim);
        for k in 1..=self.steps {
            rk4_step(&self.compiled, &mut point, dt, &mut scratch)
                .map_err(|error| FlowError::Domain { step: k, error })?;
            if let Some(b) = &self.bounds {
                if !b.contains(&point) {
                    return Err(FlowError::OutOfBounds { step: k });
                }
            }
        }
        Ok(point)
    }

    /// Jacobian `Dφ_s(x)` by central differences with step `h_j`;
    /// `jac[i][j] = ∂(φ_s)ᵢ/∂xⱼ`.
    pub fn jacobian(&self, x: &[f64], h_j: f64) -> Result<Vec<Vec<f64>>, FlowError> {
        let d = self.dim;
        let mut jac = vec![vec![0.0; d]; d];
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        for j in 0..d {
            xp[j] = x[j] + h_j;
            xm[j] = x[j] - h_j;
            let fp = self.apply(&xp)?;
            let fm = self.apply(&xm)?;
            for i in 0..d {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * h_j);
            }
            xp[j] = x[j];
            xm[j] = x[j];
        }
        Ok(jac)
    }
}

pub(crate) fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

#[cfg(test)]
mod tests;
