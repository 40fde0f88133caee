//! Hamiltonian systems on symplectic, cosymplectic, contact and cocontact
//! manifolds in canonical coordinates.
//!
//! The crate classifies and verifies symmetries — infinitesimal, dynamical,
//! scaling, Noether and canonoid generators — by exact symbolic
//! differentiation combined with numerical evaluation at sampled points and
//! along integrated flows.
//!
//! Module map:
//! - [`expr`] — expression AST, parser, differentiation, sampling-based
//!   equality.
//! - [`geometry`] — the four structures in Darboux coordinates and the
//!   coordinate exterior calculus.
//! - [`symmetry`] — symmetry predicates and theorem checkers on a
//!   [`symmetry::HamiltonianSystem`].
//! - [`flow`] — RK4 flows, pullback residuals, finite-`s` canonoid equations
//!   and conservation/dissipation monitoring.
//!
//! ```
//! use hamsym::{Chart, GeometryKind, HamiltonianSystem};
//!
//! // A contact system with a scaling symmetry of degree −2.
//! let chart = Chart::new(GeometryKind::Contact, 1)?;
//! let h = chart.parse_expr("p^2/2 - 1/q - 1/z^2")?;
//! let sys = HamiltonianSystem::new(chart, h)?;
//!
//! let x = sys.chart().parse_vector_field("2*q; -p; z")?;
//! let scaling = sys.scaling_degree(&x)?;
//! let degree = scaling.degree.expect("scaling symmetry");
//! assert!((degree + 2.0).abs() < 1e-9);
//!
//! // Scaling symmetries generate canonoid transformations.
//! assert!(sys.is_canonoid_generator(&x)?.verdict);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod expr;
pub mod flow;
pub mod geometry;
pub mod symmetry;

pub use expr::{
    equal_on_samples, CompiledExpr, Equality, EvalError, ParseError, SampleDomain, SampleError,
    ScalarExpr,
};
pub use geometry::{
    differential, lie_derivative_one, lie_derivative_two, Chart, GeometryError, GeometryKind,
    OneForm, TwoForm, VectorField,
};
pub use symmetry::{HamiltonianSystem, Settings, SymmetryError, Tolerances};
