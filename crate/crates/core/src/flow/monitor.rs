//! Conservation and dissipation monitoring along integrated trajectories.

use crate::expr::{CompiledExpr, ScalarExpr};
use crate::geometry::GeometryKind;
use crate::symmetry::HamiltonianSystem;

use super::{FlowError, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonitorMode {
    Conserved,
    Dissipated,
}

impl MonitorMode {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "conserved" => Some(MonitorMode::Conserved),
            "dissipated" => Some(MonitorMode::Dissipated),
            _ => None,
        }
    }
}

/// Monitored values along a trajectory with the mode's drift:
/// `max_k |f(x_k) − f(x_0)|` for conserved quantities, or
/// `max_k |f(x_k)·exp(∫₀^{s_k} RH ds) − f(x_0)|` for dissipated ones, the
/// rate integral accumulated by the trapezoid rule over the stored samples
/// (`R_z H` replaces `RH` on cocontact charts).
#[derive(Clone, Debug)]
pub struct MonitorReport {
    /// Raw values `(s_k, f(x_k))`.
    pub series: Vec<(f64, f64)>,
    pub drift: f64,
}

pub fn monitor(
    sys: &HamiltonianSystem,
    traj: &Trajectory,
    f: &ScalarExpr,
    mode: MonitorMode,
) -> Result<MonitorReport, FlowError> {
    let compiled = CompiledExpr::new(f);
    let mut stack = Vec::with_capacity(32);
    let mut series = Vec::with_capacity(traj.samples().len());
    for (s, x) in traj.samples() {
        series.push((*s, compiled.eval_with(x, &mut stack)?));
    }
    let f0 = series.first().map(|(_, v)| *v).unwrap_or(0.0);
    let drift = match mode {
        MonitorMode::Conserved => series
            .iter()
            .fold(0.0f64, |m, (_, v)| m.max((v - f0).abs())),
        MonitorMode::Dissipated => {
            if !matches!(sys.kind(), GeometryKind::Contact | GeometryKind::Cocontact) {
                return Err(FlowError::Unsupported {
                    expected: "contact or cocontact",
                });
            }
            let rate_expr = sys.reeb()[0].apply(sys.hamiltonian());
            let rate = CompiledExpr::new(&rate_expr);
            let mut rates = Vec::with_capacity(traj.samples().len());
            for (_, x) in traj.samples() {
                rates.push(rate.eval_with(x, &mut stack)?);
            }
            let mut integral = 0.0;
            let mut worst = 0.0f64;
            for (k, (s, v)) in series.iter().enumerate() {
                if k > 0 {
                    let ds = s - series[k - 1].0;
                    integral += 0.5 * ds * (rates[k - 1] + rates[k]);
                }
                worst = worst.max((v * integral.exp() - f0).abs());
            }
            worst
        }
    };
    Ok(MonitorReport { series, drift })
}
