//! Recovery of functions from closed one-forms by line integration, and
//! numeric differentiation of the recovered handles.
//!
//! The integration path is the axis-parallel polyline from the base point to
//! the evaluation point, one active coordinate at a time in chart order;
//! closedness is verified before recovery, so path independence holds on the
//! sample box. Each segment uses adaptive Simpson quadrature.

use serde::Serialize;

use crate::expr::{EvalError, ScalarExpr};
use crate::geometry::OneForm;

use super::SymmetryError;

/// Adaptive Simpson on `f` over `[a, b]` with absolute tolerance `tol`.
pub(crate) fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, SymmetryError>
where
    F: Fn(f64) -> Result<f64, SymmetryError>,
{
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 30)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, SymmetryError>
where
    F: Fn(f64) -> Result<f64, SymmetryError>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let half = 0.5 * tol;
    Ok(simpson_step(f, a, m, fa, flm, fm, left, half, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, half, depth - 1)?)
}

/// Line integral of a one-form given componentwise by `component(point, i)`,
/// along the axis-parallel polyline from `base` to `x` over the `active`
/// coordinates in order. Inactive coordinates are pinned to the values of `x`
/// for the whole path.
pub(crate) fn polyline_integral<C>(
    component: &C,
    base: &[f64],
    active: &[usize],
    x: &[f64],
    quad_tol: f64,
) -> Result<f64, SymmetryError>
where
    C: Fn(&[f64], usize) -> Result<f64, SymmetryError>,
{
    let mut current: Vec<f64> = x.to_vec();
    for &k in active {
        current[k] = base[k];
    }
    let mut total = 0.0;
    for &k in active {
        let (a, b) = (base[k], x[k]);
        let integrand = |tau: f64| -> Result<f64, SymmetryError> {
            let mut point = current.clone();
            point[k] = tau;
            component(&point, k)
        };
        total += adaptive_simpson(&integrand, a, b, quad_tol)?;
        current[k] = b;
    }
    Ok(total)
}

/// A recovered function handle: either an exact expression (contact and
/// cocontact recoveries) or a numeric line-integral primitive of a verified
/// closed one-form (symplectic, cosymplectic). Numeric handles vanish at
/// their base point by construction.
#[derive(Clone, Debug)]
pub enum RecoveredFunction {
    Symbolic(ScalarExpr),
    LineIntegral {
        form: OneForm,
        base: Vec<f64>,
        active: Vec<usize>,
        quad_tol: f64,
        sing_threshold: f64,
    },
}

/// Serializable description of a recovered function for reports.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecoveredFunctionDescription {
    Symbolic { expr: String },
    LineIntegral { base: Vec<f64>, active: Vec<usize> },
}

impl RecoveredFunction {
    pub fn eval(&self, x: &[f64]) -> Result<f64, SymmetryError> {
        match self {
            RecoveredFunction::Symbolic(expr) => Ok(expr.eval(x).map_err(path_error)?),
            RecoveredFunction::LineIntegral {
                form,
                base,
                active,
                quad_tol,
                sing_threshold,
            } => {
                let component = |point: &[f64], i: usize| -> Result<f64, SymmetryError> {
                    form.component(i)
                        .eval_guarded(point, *sing_threshold)
                        .map_err(path_error)
                };
                polyline_integral(&component, base, active, x, *quad_tol)
            }
        }
    }

    /// Partial derivative at `x`. Symbolic handles differentiate exactly;
    /// line-integral handles use a 5-point central stencil so quadrature
    /// noise stays well below the numeric tolerance.
    pub fn partial(&self, x: &[f64], coord: usize, step: f64) -> Result<f64, SymmetryError> {
        match self {
            RecoveredFunction::Symbolic(expr) => {
                Ok(expr.differentiate(coord).eval(x).map_err(path_error)?)
            }
            RecoveredFunction::LineIntegral { .. } => {
                let shifted = |offset: f64| -> Result<f64, SymmetryError> {
                    let mut p = x.to_vec();
                    p[coord] += offset;
                    self.eval(&p)
                };
                let (f2p, f1p, f1m, f2m) = (
                    shifted(2.0 * step)?,
                    shifted(step)?,
                    shifted(-step)?,
                    shifted(-2.0 * step)?,
                );
                Ok((-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * step))
            }
        }
    }

    pub fn describe(&self, names: &[String]) -> RecoveredFunctionDescription {
        match self {
            RecoveredFunction::Symbolic(expr) => RecoveredFunctionDescription::Symbolic {
                expr: expr.pretty(names),
            },
            RecoveredFunction::LineIntegral { base, active, .. } => {
                RecoveredFunctionDescription::LineIntegral {
                    base: base.clone(),
                    active: active.clone(),
                }
            }
        }
    }
}

fn path_error(err: EvalError) -> SymmetryError {
    SymmetryError::IntegrationPath(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_polynomials_exactly() {
        let f = |t: f64| -> Result<f64, SymmetryError> { Ok(3.0 * t * t) };
        let v = adaptive_simpson(&f, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_handles_reversed_and_empty_ranges() {
        let f = |t: f64| -> Result<f64, SymmetryError> { Ok(t.exp()) };
        assert_eq!(adaptive_simpson(&f, 1.0, 1.0, 1e-12).unwrap(), 0.0);
        let forward = adaptive_simpson(&f, 0.0, 1.0, 1e-12).unwrap();
        let reverse = adaptive_simpson(&f, 1.0, 0.0, 1e-12).unwrap();
        assert!((forward + reverse).abs() < 1e-11);
        assert!((forward - (1.0f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn polyline_recovers_potential_of_exact_form() {
        // α = p dq + q dp = d(qp): integral from (1,1) to x is qp − 1.
        let alpha = OneForm::new(vec![ScalarExpr::coord(1), ScalarExpr::coord(0)]);
        let handle = RecoveredFunction::LineIntegral {
            form: alpha,
            base: vec![1.0, 1.0],
            active: vec![0, 1],
            quad_tol: 1e-12,
            sing_threshold: 0.0,
        };
        for x in [[0.5, 2.0], [1.5, 0.7], [2.0, 2.0]] {
            let got = handle.eval(&x).unwrap();
            assert!((got - (x[0] * x[1] - 1.0)).abs() < 1e-10, "{x:?} -> {got}");
        }
    }

    #[test]
    fn stencil_derivative_matches_integrand() {
        // d/dq of the recovered potential of d(qp) is p.
        let alpha = OneForm::new(vec![ScalarExpr::coord(1), ScalarExpr::coord(0)]);
        let handle = RecoveredFunction::LineIntegral {
            form: alpha,
            base: vec![1.0, 1.0],
            active: vec![0, 1],
            quad_tol: 1e-12,
            sing_threshold: 0.0,
        };
        let x = [1.3, 0.8];
        let d = handle.partial(&x, 0, 1e-3).unwrap();
        assert!((d - 0.8).abs() < 1e-8, "got {d}");
    }
}
