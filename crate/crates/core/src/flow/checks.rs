//! Flow-level verification: pullback residuals against target forms and the
//! finite-`s` canonoid equations, with `φ_s*` realized through
//! finite-difference Jacobians of the integrated flow.

use crate::expr::{CompiledExpr, SampleDomain, SampleError};
use crate::geometry::VectorField;
use crate::geometry::{GeometryKind, OneForm, TwoForm};
use crate::symmetry::HamiltonianSystem;

use super::{mat_vec, Bounds, FlowError, FlowMap};

/// A structure-degree form reference for pullback checks.
#[derive(Clone, Copy, Debug)]
pub enum FormRef<'a> {
    One(&'a OneForm),
    Two(&'a TwoForm),
}

/// Options shared by the flow-level checks.
#[derive(Clone, Copy, Debug)]
pub struct FlowCheckOptions {
    /// RK4 steps per flow (`step = s / steps`).
    pub steps: usize,
    /// Central-difference step for flow Jacobians.
    pub jacobian_step: f64,
    /// Probe points drawn from the sample domain.
    pub probes: usize,
    /// 5-point stencil step for derivatives of flow-level functions.
    pub stencil_step: f64,
    /// Quadrature tolerance for flow-level line integrals.
    pub quad_tol: f64,
    /// Expansion factor of the sample box used as integration bounds.
    pub bounds_factor: f64,
}

impl Default for FlowCheckOptions {
    fn default() -> Self {
        FlowCheckOptions {
            steps: 100,
            jacobian_step: 1e-5,
            probes: 20,
            stencil_step: 5e-3,
            quad_tol: 1e-8,
            bounds_factor: 100.0,
        }
    }
}

fn eval_one_form(form: &OneForm, x: &[f64]) -> Result<Vec<f64>, FlowError> {
    (0..form.dim())
        .map(|i| form.component(i).eval(x).map_err(FlowError::from))
        .collect()
}

/// Antisymmetric coefficient matrix `B[a][b] = β(e_a, e_b)` at a point.
#[allow(clippy::needless_range_loop)]
fn eval_two_form(form: &TwoForm, x: &[f64]) -> Result<Vec<Vec<f64>>, FlowError> {
    let d = form.dim();
    let mut m = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in (a + 1)..d {
            let v = form.coeff(a, b).eval(x)?;
            m[a][b] = v;
            m[b][a] = -v;
        }
    }
    Ok(m)
}

/// Draw up to `count` probe points for which `usable` succeeds, scanning at
/// most `100·count` candidates in index order.
fn collect_probes<T>(
    dom: &SampleDomain,
    count: usize,
    mut usable: impl FnMut(&[f64]) -> Result<T, FlowError>,
) -> Result<Vec<(Vec<f64>, T)>, FlowError> {
    let mut out = Vec::with_capacity(count);
    let limit = 100 * count as u64;
    let mut index = 0u64;
    while out.len() < count && index < limit {
        let x = dom.point(index);
        index += 1;
        match usable(&x) {
            Ok(v) => out.push((x, v)),
            Err(FlowError::Domain { .. } | FlowError::OutOfBounds { .. } | FlowError::Eval(_)) => {
                continue;
            }
            Err(other) => return Err(other),
        }
    }
    if out.len() < count {
        return Err(SampleError::Exhausted {
            needed: count,
            draws: limit,
        }
        .into());
    }
    Ok(out)
}

/// Max residual of `(φ_s* form)(basis) − target(basis)` over probe points
/// and coordinate basis vectors, with `Dφ_s` by central finite differences.
pub fn pullback_residual(
    flow: &FlowMap,
    form: FormRef,
    target: FormRef,
    dom: &SampleDomain,
    opts: &FlowCheckOptions,
) -> Result<f64, FlowError> {
    let per_probe = |x: &[f64]| -> Result<f64, FlowError> {
        let y = flow.apply(x)?;
        let jac = flow.jacobian(x, opts.jacobian_step)?;
        let d = x.len();
        match (form, target) {
            (FormRef::One(alpha), FormRef::One(tau)) => {
                let alpha_y = eval_one_form(alpha, &y)?;
                let tau_x = eval_one_form(tau, x)?;
                let mut worst = 0.0f64;
                for i in 0..d {
                    let pulled: f64 = (0..d).map(|a| alpha_y[a] * jac[a][i]).sum();
                    worst = worst.max((pulled - tau_x[i]).abs());
                }
                Ok(worst)
            }
            (FormRef::Two(beta), FormRef::Two(tau)) => {
                let b_y = eval_two_form(beta, &y)?;
                let mut worst = 0.0f64;
                for i in 0..d {
                    for j in (i + 1)..d {
                        let mut pulled = 0.0;
                        for a in 0..d {
                            for b in 0..d {
                                pulled += jac[a][i] * b_y[a][b] * jac[b][j];
                            }
                        }
                        let t = tau.coeff(i, j).eval(x)?;
                        worst = worst.max((pulled - t).abs());
                    }
                }
                Ok(worst)
            }
            _ => Err(FlowError::Unsupported {
                expected: "matching form degrees",
            }),
        }
    };
    let probes = collect_probes(dom, opts.probes, per_probe)?;
    Ok(probes.into_iter().fold(0.0, |m, (_, r)| m.max(r)))
}

/// Report of the finite-`s` canonoid equations for one field and one `s`.
#[derive(Clone, Debug)]
pub struct CanonoidFlowReport {
    pub s: f64,
    /// Set when `is_canonoid_generator` does not hold for the field; the
    /// finite-`s` equations are then expected to fail.
    pub canonoid_warning: bool,
    /// Residual of the kind's finite-`s` canonoid equation system at the
    /// probe points (exactness of `X_H ⌟ φ_s*ω` for symplectic/cosymplectic,
    /// the `dK_s` equation for contact/cocontact).
    pub defining_residual: f64,
    /// `φ_s*η = η` residual where the kind carries η.
    pub eta_residual: Option<f64>,
    /// Max over probes of `|K_s − φ_s*H|` (base-normalized where `K_s` is
    /// only defined up to the line-integration gauge).
    pub k_vs_flowed_h: f64,
    /// The probe points and the `K_s` values read off at them.
    pub probes: Vec<(Vec<f64>, f64)>,
}

/// Evaluate the kind's finite-`s` canonoid equations for the flow of `x` at
/// parameter `s`: reads off/recovers `K_s`, reports the defining-equation
/// residuals and compares `K_s` with `φ_s*H`.
pub fn canonoid_flow_check(
    sys: &HamiltonianSystem,
    field: &VectorField,
    s: f64,
    opts: &FlowCheckOptions,
) -> Result<CanonoidFlowReport, FlowError> {
    let chart = sys.chart();
    let dom = &sys.settings().domain;
    let bounds = Bounds::expand_domain(dom, opts.bounds_factor);
    let flow = FlowMap::with_steps(chart, field, s, opts.steps)?.with_bounds(bounds);
    let canonoid_warning = !sys.is_canonoid_generator(field)?.verdict;

    let d = chart.dim();
    let x_h: Vec<CompiledExpr> = (0..d)
        .map(|i| CompiledExpr::new(sys.hamiltonian_field().component(i)))
        .collect();
    let h_compiled = CompiledExpr::new(sys.hamiltonian());
    let mut stack = Vec::with_capacity(32);
    let mut xh_at = |x: &[f64]| -> Result<Vec<f64>, FlowError> {
        x_h.iter()
            .map(|c| c.eval_with(x, &mut stack).map_err(FlowError::from))
            .collect()
    };

    match sys.kind() {
        GeometryKind::Symplectic | GeometryKind::Cosymplectic => {
            let omega = sys.structure().two_form().clone();
            let eta = sys.structure().time_form().cloned();
            let qp: Vec<usize> = (0..2 * chart.dof()).collect();
            // β_s(x)ᵢ = ω_{φx}(Dφ·X_H(x), Dφ·eᵢ)
            let beta = |x: &[f64]| -> Result<Vec<f64>, FlowError> {
                let y = flow.apply(x)?;
                let jac = flow.jacobian(x, opts.jacobian_step)?;
                let b_y = eval_two_form(&omega, &y)?;
                let mut xh = Vec::new();
                for c in &x_h {
                    xh.push(c.eval_with(x, &mut Vec::new())?);
                }
                let jxh = mat_vec(&jac, &xh);
                // ω(Dφ·X_H, Dφ·eᵢ) = Σ_{a,b} jxh_a B[a][b] J[b][i]
                let mut out = vec![0.0; d];
                for i in 0..d {
                    let mut acc = 0.0;
                    for a in 0..d {
                        for b in 0..d {
                            acc += jxh[a] * b_y[a][b] * jac[b][i];
                        }
                    }
                    out[i] = acc;
                }
                Ok(out)
            };
            // Solvability of β_s = dK_s (− RK_s η): closedness of the block
            // that K_s is integrated over, plus β_t = 0 on cosymplectic.
            let active: Vec<usize> = if sys.kind() == GeometryKind::Symplectic {
                (0..d).collect()
            } else {
                qp.clone()
            };
            let per_probe = |x: &[f64]| -> Result<(f64, f64, f64), FlowError> {
                let b0 = beta(x)?;
                let mut defining = 0.0f64;
                if let Some(t) = chart.t() {
                    defining = defining.max(b0[t].abs());
                }
                // Curl over the active block by central differences; the
                // shifted β vectors are shared across coordinate pairs.
                let mut beta_plus = Vec::with_capacity(active.len());
                let mut beta_minus = Vec::with_capacity(active.len());
                for &a in &active {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[a] += opts.stencil_step;
                    xm[a] -= opts.stencil_step;
                    beta_plus.push(beta(&xp)?);
                    beta_minus.push(beta(&xm)?);
                }
                for (ai, &a) in active.iter().enumerate() {
                    for (bj, &b) in active.iter().enumerate().skip(ai + 1) {
                        let dba =
                            (beta_plus[ai][b] - beta_minus[ai][b]) / (2.0 * opts.stencil_step);
                        let dab =
                            (beta_plus[bj][a] - beta_minus[bj][a]) / (2.0 * opts.stencil_step);
                        defining = defining.max((dba - dab).abs());
                    }
                }
                // K_s by line integration of β_s over the active block, from
                // the all-ones base (slice-wise at the probe's own t).
                let base = vec![1.0; d];
                let component =
                    |point: &[f64], i: usize| -> Result<f64, FlowError> { Ok(beta(point)?[i]) };
                let k_s = polyline_integral_flow(&component, &base, &active, x, opts.quad_tol)?;
                // φ_s*H normalized the same way.
                let mut base_pt = base.clone();
                if let Some(t) = chart.t() {
                    base_pt[t] = x[t];
                }
                let hy = h_compiled.eval_with(&flow.apply(x)?, &mut Vec::new())?;
                let hb = h_compiled.eval_with(&flow.apply(&base_pt)?, &mut Vec::new())?;
                Ok((defining, k_s, (k_s - (hy - hb)).abs()))
            };
            let probes = collect_probes(dom, opts.probes, per_probe)?;
            // η is constant-coefficient, so φ_s*η − η only sees the Jacobian.
            let eta_residual = match &eta {
                Some(eta_form) => Some(pullback_residual(
                    &flow,
                    FormRef::One(eta_form),
                    FormRef::One(eta_form),
                    dom,
                    opts,
                )?),
                None => None,
            };
            let mut defining = 0.0f64;
            let mut k_vs_h = 0.0f64;
            let mut out = Vec::new();
            for (x, (def, k_s, diff)) in probes {
                defining = defining.max(def);
                k_vs_h = k_vs_h.max(diff);
                out.push((x, k_s));
            }
            Ok(CanonoidFlowReport {
                s,
                canonoid_warning,
                defining_residual: defining,
                eta_residual,
                k_vs_flowed_h: k_vs_h,
                probes: out,
            })
        }
        GeometryKind::Contact | GeometryKind::Cocontact => {
            let theta = sys.structure().contact_form().unwrap().clone();
            let dtheta = sys.structure().two_form().clone();
            let eta = sys.structure().time_form().cloned();
            let z = chart.z().unwrap();
            // K_s(x) = −θ_{φx}(Dφ·X_H(x)).
            let k_s_at = |x: &[f64]| -> Result<f64, FlowError> {
                let y = flow.apply(x)?;
                let jac = flow.jacobian(x, opts.jacobian_step)?;
                let mut xh = Vec::new();
                for c in &x_h {
                    xh.push(c.eval_with(x, &mut Vec::new())?);
                }
                let jxh = mat_vec(&jac, &xh);
                let th_y = eval_one_form(&theta, &y)?;
                Ok(-(0..d).map(|a| th_y[a] * jxh[a]).sum::<f64>())
            };
            let backward = flow.inverse();
            let per_probe = |x: &[f64]| -> Result<(f64, f64, f64), FlowError> {
                let y = flow.apply(x)?;
                let jac = flow.jacobian(x, opts.jacobian_step)?;
                let xh = xh_at(x)?;
                let jxh = mat_vec(&jac, &xh);
                let k_s = k_s_at(x)?;

                // dK_s by 5-point stencil per coordinate.
                let mut dk = vec![0.0; d];
                for i in 0..d {
                    let shifted = |offset: f64| -> Result<f64, FlowError> {
                        let mut p = x.to_vec();
                        p[i] += offset;
                        k_s_at(&p)
                    };
                    let h = opts.stencil_step;
                    dk[i] = (-shifted(2.0 * h)? + 8.0 * shifted(h)? - 8.0 * shifted(-h)?
                        + shifted(-2.0 * h)?)
                        / (12.0 * h);
                }
                // The Reeb field of φ_s*θ is the pushforward of R_z along the
                // inverse flow: ((φ_{−s})_* R_z)K_s at x equals
                // ∂_z (K_s ∘ φ_{−s}) evaluated at φ_s(x).
                let pushed_rz_k = {
                    let shifted = |offset: f64| -> Result<f64, FlowError> {
                        let mut p = y.clone();
                        p[z] += offset;
                        k_s_at(&backward.apply(&p)?)
                    };
                    let h = opts.stencil_step;
                    (-shifted(2.0 * h)? + 8.0 * shifted(h)? - 8.0 * shifted(-h)?
                        + shifted(-2.0 * h)?)
                        / (12.0 * h)
                };
                // X_H ⌟ φ_s*(dθ) = dK_s − ((φ_{−s})_*R_z)K_s · φ_s*θ (− R_t K_s · η).
                let b_y = eval_two_form(&dtheta, &y)?;
                let th_y = eval_one_form(&theta, &y)?;
                let mut defining = 0.0f64;
                for i in 0..d {
                    let mut lhs = 0.0;
                    for a in 0..d {
                        for b in 0..d {
                            lhs += jxh[a] * b_y[a][b] * jac[b][i];
                        }
                    }
                    let pulled_theta_i: f64 = (0..d).map(|a| th_y[a] * jac[a][i]).sum();
                    let mut rhs = dk[i] - pushed_rz_k * pulled_theta_i;
                    if let (Some(t), GeometryKind::Cocontact) = (chart.t(), sys.kind()) {
                        if i == t {
                            rhs -= dk[t];
                        }
                    }
                    defining = defining.max((lhs - rhs).abs());
                }
                let hy = h_compiled.eval_with(&y, &mut Vec::new())?;
                Ok((defining, k_s, (k_s - hy).abs()))
            };
            let probes = collect_probes(dom, opts.probes, per_probe)?;
            let eta_residual = match &eta {
                Some(eta_form) => Some(pullback_residual(
                    &flow,
                    FormRef::One(eta_form),
                    FormRef::One(eta_form),
                    dom,
                    opts,
                )?),
                None => None,
            };
            let mut defining = 0.0f64;
            let mut k_vs_h = 0.0f64;
            let mut out = Vec::new();
            for (x, (def, k_s, diff)) in probes {
                defining = defining.max(def);
                k_vs_h = k_vs_h.max(diff);
                out.push((x, k_s));
            }
            Ok(CanonoidFlowReport {
                s,
                canonoid_warning,
                defining_residual: defining,
                eta_residual,
                k_vs_flowed_h: k_vs_h,
                probes: out,
            })
        }
    }
}

/// Variant of the symmetry module's polyline integral over flow-level
/// (non-symbolic) one-form components.
fn polyline_integral_flow<C>(
    component: &C,
    base: &[f64],
    active: &[usize],
    x: &[f64],
    quad_tol: f64,
) -> Result<f64, FlowError>
where
    C: Fn(&[f64], usize) -> Result<f64, FlowError>,
{
    let mut current: Vec<f64> = x.to_vec();
    for &k in active {
        current[k] = base[k];
    }
    let mut total = 0.0;
    for &k in active {
        let (a, b) = (base[k], x[k]);
        if a != b {
            let integrand = |tau: f64| -> Result<f64, FlowError> {
                let mut point = current.clone();
                point[k] = tau;
                component(&point, k)
            };
            total += adaptive_simpson_flow(&integrand, a, b, quad_tol)?;
        }
        current[k] = b;
    }
    Ok(total)
}

fn adaptive_simpson_flow<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, FlowError>
where
    F: Fn(f64) -> Result<f64, FlowError>,
{
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step_flow(f, a, b, fa, fm, fb, whole, tol, 20)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step_flow<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, FlowError>
where
    F: Fn(f64) -> Result<f64, FlowError>,
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
    Ok(
        simpson_step_flow(f, a, m, fa, flm, fm, left, half, depth - 1)?
            + simpson_step_flow(f, m, b, fm, frm, fb, right, half, depth - 1)?,
    )
}
