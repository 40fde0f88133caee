//! `hamsym` — classify and verify symmetries of Hamiltonian systems on
//! symplectic, cosymplectic, contact and cocontact charts, and integrate
//! their dynamics.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hamsym_cli::job::JobSpec;
use hamsym_cli::{cmd_classify, cmd_integrate, cmd_verify, CmdError};

#[derive(Parser)]
#[command(
    name = "hamsym",
    about = "Symmetries of Hamiltonian systems on symplectic, cosymplectic, contact and cocontact charts",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one vector field: infinitesimal/dynamical/scaling/Noether
    /// symmetry and canonoid-generator verdicts with residuals.
    Classify(JobArgs),
    /// Verify a named theorem instance. Exit 0 iff every asserted identity
    /// passes.
    Verify {
        /// One of: noether, dissipation, scaling-commutator, canonoid,
        /// primitive, quotient, flow-hamiltonian.
        theorem: Option<String>,
        #[command(flatten)]
        job: JobArgs,
    },
    /// Integrate the system dynamics from --x0 and emit a CSV trajectory
    /// with monitored quantities and a drift summary.
    Integrate(JobArgs),
}

#[derive(Args)]
struct JobArgs {
    /// Job file (JSON JobSpec); explicit flags override its fields.
    #[arg(long)]
    job: Option<PathBuf>,
    /// Geometry kind: symplectic | cosymplectic | contact | cocontact.
    #[arg(long)]
    geometry: Option<String>,
    /// Degrees of freedom.
    #[arg(long)]
    n: Option<usize>,
    /// Hamiltonian expression over the chart coordinates.
    #[arg(long, allow_hyphen_values = true)]
    hamiltonian: Option<String>,
    /// Vector-field components "e1; e2; ..." in chart coordinate order
    /// (1-form coefficients for `verify primitive`).
    #[arg(long = "field", allow_hyphen_values = true)]
    fields: Vec<String>,
    /// Scalar function (repeatable).
    #[arg(long = "function", allow_hyphen_values = true)]
    functions: Vec<String>,
    /// Admissible sample points per identity check (default 100).
    #[arg(long)]
    samples: Option<usize>,
    /// Sampling seed (default 42; HAMSYM_SEED overrides the default).
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance for exact-symbolic identities (default 1e-9).
    #[arg(long)]
    tol: Option<f64>,
    /// Tolerance for flow/finite-difference identities (default 1e-5).
    #[arg(long = "tol-flow")]
    tol_flow: Option<f64>,
    /// Sampling interval "lo,hi"; repeat per coordinate or give once for all.
    #[arg(long = "domain", allow_hyphen_values = true)]
    domain: Vec<String>,
    /// Output format: json | csv | human (default json; integrate always
    /// emits CSV).
    #[arg(long)]
    format: Option<String>,
    /// Scaling degree Λ for `verify primitive` (estimated when omitted).
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Flow parameter (repeatable for flow-level checks; defaults
    /// 0.1, 0.5, 1.0).
    #[arg(long, allow_hyphen_values = true)]
    s: Vec<f64>,
    /// Integrator step (default s/1000 for integrate).
    #[arg(long)]
    h: Option<f64>,
    /// Initial point "v1,v2,..." in chart coordinate order.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Expression to monitor along the trajectory (repeatable).
    #[arg(long = "monitor", allow_hyphen_values = true)]
    monitor: Vec<String>,
    /// Monitoring mode: conserved | dissipated (default conserved).
    #[arg(long)]
    mode: Option<String>,
}

impl JobArgs {
    fn into_spec(self) -> Result<JobSpec, CmdError> {
        let mut domain = Vec::new();
        for entry in &self.domain {
            let parts: Vec<&str> = entry.split(',').collect();
            let parsed: Option<(f64, f64)> = match parts.as_slice() {
                [lo, hi] => match (lo.trim().parse(), hi.trim().parse()) {
                    (Ok(lo), Ok(hi)) => Some((lo, hi)),
                    _ => None,
                },
                _ => None,
            };
            match parsed {
                Some((lo, hi)) => domain.push([lo, hi]),
                None => {
                    return Err(CmdError::Input(format!(
                        "--domain expects \"lo,hi\", got `{entry}`"
                    )));
                }
            }
        }
        let x0 = match &self.x0 {
            None => None,
            Some(text) => {
                let values: Result<Vec<f64>, _> =
                    text.split(',').map(|v| v.trim().parse()).collect();
                match values {
                    Ok(v) => Some(v),
                    Err(_) => {
                        return Err(CmdError::Input(format!(
                            "--x0 expects \"v1,v2,...\", got `{text}`"
                        )));
                    }
                }
            }
        };
        let flags = JobSpec {
            geometry: self.geometry,
            n: self.n,
            hamiltonian: self.hamiltonian,
            fields: self.fields,
            functions: self.functions,
            theorem: None,
            samples: self.samples,
            seed: self.seed,
            tol: self.tol,
            tol_flow: self.tol_flow,
            domain,
            format: self.format,
            lambda: self.lambda,
            s: self.s,
            h: self.h,
            x0,
            monitor: self.monitor,
            mode: self.mode,
        };
        let base = match &self.job {
            Some(path) => JobSpec::from_file(path)?,
            None => JobSpec::default(),
        };
        Ok(base.merged_with(flags))
    }
}

/// Write to stdout, tolerating a closed pipe (e.g. `hamsym ... | head`).
fn emit(text: &str) {
    use std::io::Write;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let _ = lock.write_all(text.as_bytes());
    if !text.ends_with('\n') {
        let _ = lock.write_all(b"\n");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify(args) => args.into_spec().and_then(|spec| cmd_classify(&spec)),
        Command::Verify { theorem, job } => job
            .into_spec()
            .and_then(|spec| cmd_verify(theorem.as_deref(), &spec)),
        Command::Integrate(args) => args.into_spec().and_then(|spec| cmd_integrate(&spec)),
    };
    match result {
        Ok(outcome) => {
            emit(&outcome.output);
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(err) => {
            if let Some(partial) = err.partial_output() {
                emit(partial);
            }
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
