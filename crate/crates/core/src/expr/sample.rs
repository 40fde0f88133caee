//! Sampling-based equality of expressions and forms.
//!
//! Every `L_X θ = θ`-style identity in the crate is decided here: draw points
//! from a box, skip points too close to a singularity, compare componentwise
//! in max norm. Sample points are derived per-index from the seed, so serial
//! and parallel runs agree bit-for-bit on the point set.

use serde::Serialize;
use thiserror::Error;

use super::ScalarExpr;

/// SplitMix64 step; the whole crate's sampling reproducibility rests on it.
pub(crate) fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-coordinate sampling box with singularity exclusion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleDomain {
    /// Per-coordinate interval `[lo, hi]`.
    pub intervals: Vec<(f64, f64)>,
    /// Number of admissible points required (M).
    pub samples: usize,
    /// Minimum absolute value for denominators and kin (δ_sing).
    pub sing_threshold: f64,
    pub seed: u64,
}

pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_SING_THRESHOLD: f64 = 1e-3;
pub const DEFAULT_SEED: u64 = 42;

impl SampleDomain {
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Self {
        SampleDomain {
            intervals: vec![(lo, hi); dim],
            samples: DEFAULT_SAMPLES,
            sing_threshold: DEFAULT_SING_THRESHOLD,
            seed: DEFAULT_SEED,
        }
    }

    /// The tool-wide default box: each coordinate uniform in `[0.5, 2.0]`,
    /// clear of the `1/q`, `1/z²` singularities of the worked examples.
    pub fn default_for_dim(dim: usize) -> Self {
        Self::uniform(dim, 0.5, 2.0)
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        if self.samples == 0 {
            return Err(SampleError::InvalidDomain(
                "sample count must be ≥ 1".into(),
            ));
        }
        if self.sing_threshold.is_nan() || self.sing_threshold <= 0.0 {
            return Err(SampleError::InvalidDomain(
                "singularity threshold must be > 0".into(),
            ));
        }
        for &(lo, hi) in &self.intervals {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(SampleError::InvalidDomain(format!(
                    "interval [{lo}, {hi}] is empty"
                )));
            }
        }
        Ok(())
    }

    /// The `index`-th candidate point. Each point draws from an RNG split off
    /// the seed by index, independent of how many points were drawn before.
    pub fn point(&self, index: u64) -> Vec<f64> {
        let mut state = splitmix64(self.seed ^ index.wrapping_mul(0xa076_1d64_78bd_642f));
        self.intervals
            .iter()
            .map(|&(lo, hi)| {
                state = splitmix64(state);
                let unit = (state >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
                lo + (hi - lo) * unit
            })
            .collect()
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("fewer than {needed} admissible sample points found after {draws} draws")]
    Exhausted { needed: usize, draws: u64 },
    #[error("component counts differ: {left} vs {right}")]
    ComponentMismatch { left: usize, right: usize },
    #[error("invalid sample domain: {0}")]
    InvalidDomain(String),
}

/// Anything with a flat list of scalar components of one tensor degree.
pub trait Components {
    fn components(&self) -> Vec<ScalarExpr>;
}

/// Outcome of a sampled identity check.
#[derive(Clone, Debug, Serialize)]
pub struct Equality {
    pub verdict: bool,
    pub max_residual: f64,
    /// Point of largest residual when the verdict is false.
    pub witness: Option<Vec<f64>>,
    pub points_used: usize,
}

fn admissible(exprs: &[ScalarExpr], point: &[f64], sing: f64) -> bool {
    exprs.iter().all(|e| e.eval_guarded(point, sing).is_ok())
}

/// First `count` admissible points for the given expressions, in index order.
pub fn admissible_points(
    exprs: &[ScalarExpr],
    dom: &SampleDomain,
    count: usize,
) -> Result<Vec<Vec<f64>>, SampleError> {
    dom.validate()?;
    let mut points = Vec::with_capacity(count);
    let limit = 100 * count as u64;
    let mut index = 0u64;
    while points.len() < count && index < limit {
        let x = dom.point(index);
        if admissible(exprs, &x, dom.sing_threshold) {
            points.push(x);
        }
        index += 1;
    }
    if points.len() < count {
        return Err(SampleError::Exhausted {
            needed: count,
            draws: limit,
        });
    }
    Ok(points)
}

/// Max-norm residual of `a - b` over M admissible sample points.
pub fn residual_on_samples(
    a: &[ScalarExpr],
    b: &[ScalarExpr],
    dom: &SampleDomain,
) -> Result<(f64, Vec<f64>, usize), SampleError> {
    if a.len() != b.len() {
        return Err(SampleError::ComponentMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let all: Vec<ScalarExpr> = a.iter().chain(b.iter()).cloned().collect();
    let points = admissible_points(&all, dom, dom.samples)?;
    let mut max_residual = f64::NEG_INFINITY;
    let mut argmax = points[0].clone();
    for x in &points {
        let mut local = 0.0f64;
        for (ea, eb) in a.iter().zip(b.iter()) {
            // Admissibility already guaranteed evaluation succeeds.
            let va = ea.eval_guarded(x, dom.sing_threshold).expect("admissible");
            let vb = eb.eval_guarded(x, dom.sing_threshold).expect("admissible");
            local = local.max((va - vb).abs());
        }
        if local > max_residual {
            max_residual = local;
            argmax = x.clone();
        }
    }
    Ok((max_residual, argmax, points.len()))
}

/// Pointwise identity check: true iff the componentwise max-norm difference
/// stays within `tol` over M admissible sample points.
pub fn equal_on_samples<T: Components>(
    a: &T,
    b: &T,
    dom: &SampleDomain,
    tol: f64,
) -> Result<Equality, SampleError> {
    let (max_residual, argmax, points_used) =
        residual_on_samples(&a.components(), &b.components(), dom)?;
    let verdict = max_residual <= tol;
    Ok(Equality {
        verdict,
        max_residual,
        witness: if verdict { None } else { Some(argmax) },
        points_used,
    })
}
