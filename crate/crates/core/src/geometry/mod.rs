//! The four geometric structures in Darboux coordinates.
//!
//! A [`Chart`] fixes the geometry kind, the degrees of freedom `n` and the
//! canonical coordinate ordering `(q1..qn, p1..pn[, z][, t])`. Structure
//! forms, Reeb fields, Hamiltonian/evolution vector fields and the
//! Poisson/Jacobi brackets are all built from their coordinate formulas by
//! exact symbolic differentiation.

use serde::Serialize;
use std::fmt;
use thiserror::Error;

use crate::expr::{parse, CoordSet, ParseError, ScalarExpr};

pub mod forms;

pub use forms::{
    differential, lie_derivative_one, lie_derivative_two, OneForm, ThreeForm, TwoForm, VectorField,
};

/// The four structure kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Symplectic,
    Cosymplectic,
    Contact,
    Cocontact,
}

impl GeometryKind {
    /// Chart dimension for `n` degrees of freedom.
    pub fn dim(self, n: usize) -> usize {
        match self {
            GeometryKind::Symplectic => 2 * n,
            GeometryKind::Cosymplectic | GeometryKind::Contact => 2 * n + 1,
            GeometryKind::Cocontact => 2 * n + 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GeometryKind::Symplectic => "symplectic",
            GeometryKind::Cosymplectic => "cosymplectic",
            GeometryKind::Contact => "contact",
            GeometryKind::Cocontact => "cocontact",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "symplectic" => Some(GeometryKind::Symplectic),
            "cosymplectic" => Some(GeometryKind::Cosymplectic),
            "contact" => Some(GeometryKind::Contact),
            "cocontact" => Some(GeometryKind::Cocontact),
            _ => None,
        }
    }

    /// Does the chart carry a `z` coordinate (contact direction)?
    pub fn has_z(self) -> bool {
        matches!(self, GeometryKind::Contact | GeometryKind::Cocontact)
    }

    /// Does the chart carry a `t` coordinate (time direction)?
    pub fn has_t(self) -> bool {
        matches!(self, GeometryKind::Cosymplectic | GeometryKind::Cocontact)
    }
}

impl fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("degrees of freedom must be ≥ 1")]
    InvalidDof,
    #[error("unknown geometry kind `{0}`")]
    UnknownKind(String),
    #[error("a symplectic chart has no Reeb vector field")]
    NoReebField,
    #[error("operation requires a {expected} chart, got {got}")]
    UnsupportedGeometry {
        expected: &'static str,
        got: GeometryKind,
    },
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Structure forms of a chart in Darboux normal form.
///
/// `two_form` is ω (symplectic), Ω (cosymplectic) or dθ (contact/cocontact);
/// the one-forms are θ and/or η where the kind carries them.
#[derive(Clone, Debug, PartialEq)]
pub struct Structure {
    kind: GeometryKind,
    two_form: TwoForm,
    contact_form: Option<OneForm>,
    time_form: Option<OneForm>,
}

impl Structure {
    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    /// ω, Ω or dθ depending on the kind.
    pub fn two_form(&self) -> &TwoForm {
        &self.two_form
    }

    /// θ for contact/cocontact charts.
    pub fn contact_form(&self) -> Option<&OneForm> {
        self.contact_form.as_ref()
    }

    /// η for cosymplectic/cocontact charts.
    pub fn time_form(&self) -> Option<&OneForm> {
        self.time_form.as_ref()
    }

    /// The chart's one-forms in reporting order: θ first, then η.
    pub fn one_forms(&self) -> Vec<&OneForm> {
        self.contact_form
            .iter()
            .chain(self.time_form.iter())
            .collect()
    }
}

/// A single global Darboux chart: geometry kind, degrees of freedom and the
/// fixed coordinate ordering, with the structure forms built once and cached.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    kind: GeometryKind,
    n: usize,
    coords: CoordSet,
    structure: Structure,
}

impl Chart {
    pub fn new(kind: GeometryKind, n: usize) -> Result<Self, GeometryError> {
        if n == 0 {
            return Err(GeometryError::InvalidDof);
        }
        let mut names = Vec::with_capacity(kind.dim(n));
        for i in 1..=n {
            names.push(format!("q{i}"));
        }
        for i in 1..=n {
            names.push(format!("p{i}"));
        }
        if kind.has_z() {
            names.push("z".to_string());
        }
        if kind.has_t() {
            names.push("t".to_string());
        }
        let aliases = if n == 1 {
            vec![("q".to_string(), 0), ("p".to_string(), 1)]
        } else {
            vec![]
        };
        let coords = CoordSet::new(names, aliases);
        let structure = build_structure(kind, n);
        Ok(Chart {
            kind,
            n,
            coords,
            structure,
        })
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    /// Degrees of freedom `n`.
    pub fn dof(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.kind.dim(self.n)
    }

    pub fn coords(&self) -> &CoordSet {
        &self.coords
    }

    pub fn coord_names(&self) -> &[String] {
        self.coords.names()
    }

    /// Index of `q_{i+1}` (zero-based `i < n`).
    pub fn q(&self, i: usize) -> usize {
        debug_assert!(i < self.n);
        i
    }

    /// Index of `p_{i+1}` (zero-based `i < n`).
    pub fn p(&self, i: usize) -> usize {
        debug_assert!(i < self.n);
        self.n + i
    }

    pub fn z(&self) -> Option<usize> {
        self.kind.has_z().then_some(2 * self.n)
    }

    pub fn t(&self) -> Option<usize> {
        match self.kind {
            GeometryKind::Cosymplectic => Some(2 * self.n),
            GeometryKind::Cocontact => Some(2 * self.n + 1),
            _ => None,
        }
    }

    /// The structure forms (built once per chart).
    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    /// Reeb vector fields: `[R]` (cosymplectic, contact) or `[R_z, R_t]`
    /// (cocontact). A symplectic chart has none.
    pub fn reeb_fields(&self) -> Result<Vec<VectorField>, GeometryError> {
        let unit = |index: usize| {
            let mut comps = vec![ScalarExpr::zero(); self.dim()];
            comps[index] = ScalarExpr::one();
            VectorField::new(comps)
        };
        match self.kind {
            GeometryKind::Symplectic => Err(GeometryError::NoReebField),
            GeometryKind::Cosymplectic => Ok(vec![unit(self.t().unwrap())]),
            GeometryKind::Contact => Ok(vec![unit(self.z().unwrap())]),
            GeometryKind::Cocontact => Ok(vec![unit(self.z().unwrap()), unit(self.t().unwrap())]),
        }
    }

    /// Hamiltonian vector field of `f` in the kind's coordinate formula.
    pub fn hamiltonian_vector_field(&self, f: &ScalarExpr) -> VectorField {
        let n = self.n;
        let mut comps = vec![ScalarExpr::zero(); self.dim()];
        match self.kind {
            GeometryKind::Symplectic | GeometryKind::Cosymplectic => {
                // X_f = ∂f/∂pᵢ ∂qᵢ − ∂f/∂qᵢ ∂pᵢ
                for i in 0..n {
                    comps[self.q(i)] = f.differentiate(self.p(i));
                    comps[self.p(i)] = f.differentiate(self.q(i)).neg();
                }
            }
            GeometryKind::Contact | GeometryKind::Cocontact => {
                // X_f = ∂f/∂pᵢ ∂qᵢ − (∂f/∂qᵢ + pᵢ ∂f/∂z) ∂pᵢ
                //       + (pᵢ ∂f/∂pᵢ − f) ∂z
                let z = self.z().unwrap();
                let fz = f.differentiate(z);
                let mut dilation = ScalarExpr::zero();
                for i in 0..n {
                    let fp = f.differentiate(self.p(i));
                    comps[self.q(i)] = fp.clone();
                    comps[self.p(i)] = f
                        .differentiate(self.q(i))
                        .add(ScalarExpr::coord(self.p(i)).mul(fz.clone()))
                        .neg();
                    dilation = dilation.add(ScalarExpr::coord(self.p(i)).mul(fp));
                }
                comps[z] = dilation.sub(f.clone());
            }
        }
        VectorField::new(comps)
    }

    /// Dynamics field: `X_H` (symplectic, contact), `X_H + R` (cosymplectic)
    /// or `X_H + R_t` (cocontact).
    pub fn evolution_field(&self, h: &ScalarExpr) -> VectorField {
        let mut field = self.hamiltonian_vector_field(h);
        if let Some(t) = self.t() {
            let mut comps = field.into_components();
            comps[t] = comps[t].clone().add(ScalarExpr::one());
            field = VectorField::new(comps);
        }
        field
    }

    /// Poisson bracket (symplectic, cosymplectic) or Jacobi bracket
    /// (contact, cocontact) in canonical coordinates.
    pub fn bracket(&self, f: &ScalarExpr, g: &ScalarExpr) -> ScalarExpr {
        let n = self.n;
        // Σᵢ ∂f/∂qᵢ ∂g/∂pᵢ − ∂f/∂pᵢ ∂g/∂qᵢ
        let mut acc = ScalarExpr::zero();
        for i in 0..n {
            acc = acc.add(f.differentiate(self.q(i)).mul(g.differentiate(self.p(i))));
            acc = acc.sub(f.differentiate(self.p(i)).mul(g.differentiate(self.q(i))));
        }
        if let Some(z) = self.z() {
            // + ∂f/∂z (pᵢ ∂g/∂pᵢ − g) − ∂g/∂z (pᵢ ∂f/∂pᵢ − f)
            let dilation = |h: &ScalarExpr| {
                let mut s = ScalarExpr::zero();
                for i in 0..n {
                    s = s.add(ScalarExpr::coord(self.p(i)).mul(h.differentiate(self.p(i))));
                }
                s.sub(h.clone())
            };
            acc = acc.add(f.differentiate(z).mul(dilation(g)));
            acc = acc.sub(g.differentiate(z).mul(dilation(f)));
        }
        acc
    }

    pub fn parse_expr(&self, text: &str) -> Result<ScalarExpr, GeometryError> {
        Ok(parse(text, &self.coords)?)
    }

    /// Parse `d` expressions separated by `;` into a vector field in chart
    /// coordinate order.
    pub fn parse_vector_field(&self, text: &str) -> Result<VectorField, GeometryError> {
        let comps = self.parse_component_list(text)?;
        Ok(VectorField::new(comps))
    }

    /// Parse `d` expressions separated by `;` into a one-form's coefficients.
    pub fn parse_one_form(&self, text: &str) -> Result<OneForm, GeometryError> {
        let comps = self.parse_component_list(text)?;
        Ok(OneForm::new(comps))
    }

    fn parse_component_list(&self, text: &str) -> Result<Vec<ScalarExpr>, GeometryError> {
        let parts: Vec<&str> = text.split(';').collect();
        if parts.len() != self.dim() {
            return Err(GeometryError::ComponentCount {
                expected: self.dim(),
                got: parts.len(),
            });
        }
        parts
            .iter()
            .map(|part| self.parse_expr(part.trim()))
            .collect()
    }

    pub fn pretty(&self, expr: &ScalarExpr) -> String {
        expr.pretty(self.coords.names())
    }
}

fn build_structure(kind: GeometryKind, n: usize) -> Structure {
    let dim = kind.dim(n);
    // ω = Ω = dθ = Σ dqⁱ∧dpᵢ in Darboux coordinates.
    let area = |dim: usize| {
        let mut w = TwoForm::zero(dim);
        for i in 0..n {
            w.set(i, n + i, ScalarExpr::one());
        }
        w
    };
    let theta = |dim: usize, z: usize| {
        // θ = dz − pᵢ dqⁱ
        let mut comps = vec![ScalarExpr::zero(); dim];
        for (i, comp) in comps.iter_mut().enumerate().take(n) {
            *comp = ScalarExpr::coord(n + i).neg();
        }
        comps[z] = ScalarExpr::one();
        OneForm::new(comps)
    };
    let eta = |dim: usize, t: usize| {
        let mut comps = vec![ScalarExpr::zero(); dim];
        comps[t] = ScalarExpr::one();
        OneForm::new(comps)
    };
    match kind {
        GeometryKind::Symplectic => Structure {
            kind,
            two_form: area(dim),
            contact_form: None,
            time_form: None,
        },
        GeometryKind::Cosymplectic => Structure {
            kind,
            two_form: area(dim),
            contact_form: None,
            time_form: Some(eta(dim, 2 * n)),
        },
        GeometryKind::Contact => {
            let th = theta(dim, 2 * n);
            Structure {
                kind,
                two_form: th.exterior_derivative(),
                contact_form: Some(th),
                time_form: None,
            }
        }
        GeometryKind::Cocontact => {
            let th = theta(dim, 2 * n);
            Structure {
                kind,
                two_form: th.exterior_derivative(),
                contact_form: Some(th),
                time_form: Some(eta(dim, 2 * n + 1)),
            }
        }
    }
}

/// Determinant of the musical-isomorphism matrix at a point: nonzero exactly
/// where the kind's top-form non-degeneracy condition (`ωⁿ ≠ 0`,
/// `η∧Ωⁿ ≠ 0`, `θ∧(dθ)ⁿ ≠ 0`, `η∧θ∧(dθ)ⁿ ≠ 0`) holds.
pub fn nondegeneracy_det(chart: &Chart, point: &[f64]) -> Result<f64, crate::expr::EvalError> {
    let d = chart.dim();
    let s = chart.structure();
    let mut m = vec![vec![0.0f64; d]; d];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            // Row i of the map X ↦ X⌟(two-form) + Σ (X⌟σ)σ over the one-forms.
            *entry = s.two_form().coeff_signed(j, i).eval(point)?;
        }
    }
    for sigma in s.one_forms() {
        let vals: Vec<f64> = (0..d)
            .map(|i| sigma.component(i).eval(point))
            .collect::<Result<_, _>>()?;
        for (row, vi) in m.iter_mut().zip(&vals) {
            for (entry, vj) in row.iter_mut().zip(&vals) {
                *entry += vi * vj;
            }
        }
    }
    Ok(det_in_place(&mut m))
}

fn det_in_place(m: &mut [Vec<f64>]) -> f64 {
    let d = m.len();
    let mut det = 1.0;
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        let (upper, lower) = m.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            let factor = row[col] / pivot_row[col];
            for (entry, pivot_entry) in row.iter_mut().zip(pivot_row).skip(col) {
                *entry -= factor * pivot_entry;
            }
        }
    }
    det
}
