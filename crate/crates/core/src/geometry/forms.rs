//! Vector fields and differential forms in a fixed coordinate basis, with the
//! coordinate exterior calculus: contraction, exterior derivative, Lie
//! derivative (via Cartan's formula) and the Lie bracket of fields.
//!
//! Two-forms are stored strictly upper triangular; contraction and derivative
//! routines fold the antisymmetry signs explicitly. Three-forms appear only
//! as intermediates of `L_X` on two-forms.

use crate::expr::{Components, ScalarExpr};

/// Vector field: one component per chart coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<ScalarExpr>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarExpr>) -> Self {
        VectorField { components }
    }

    pub fn zero(dim: usize) -> Self {
        VectorField {
            components: vec![ScalarExpr::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &ScalarExpr {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<ScalarExpr> {
        self.components
    }

    /// Directional derivative `X(f) = Σ Xⁱ ∂ᵢf`.
    pub fn apply(&self, f: &ScalarExpr) -> ScalarExpr {
        let mut acc = ScalarExpr::zero();
        for (i, xi) in self.components.iter().enumerate() {
            acc = acc.add(xi.clone().mul(f.differentiate(i)));
        }
        acc
    }

    /// Contraction with a one-form: `X ⌟ α = Σ Xⁱ αᵢ`.
    pub fn contract_one(&self, alpha: &OneForm) -> ScalarExpr {
        let mut acc = ScalarExpr::zero();
        for (i, xi) in self.components.iter().enumerate() {
            acc = acc.add(xi.clone().mul(alpha.component(i).clone()));
        }
        acc
    }

    /// Contraction with a two-form: `(X ⌟ β)_j = Σᵢ Xⁱ β(eᵢ, eⱼ)`.
    pub fn contract_two(&self, beta: &TwoForm) -> OneForm {
        let d = self.dim();
        let mut out = Vec::with_capacity(d);
        for j in 0..d {
            let mut acc = ScalarExpr::zero();
            for i in 0..d {
                let c = beta.coeff_signed(i, j);
                if !c.is_zero() {
                    acc = acc.add(self.components[i].clone().mul(c));
                }
            }
            out.push(acc);
        }
        OneForm::new(out)
    }

    /// Contraction with a three-form: `(X ⌟ γ)(e_j, e_k) = Σᵢ Xⁱ γ(eᵢ,eⱼ,e_k)`.
    pub fn contract_three(&self, gamma: &ThreeForm) -> TwoForm {
        let d = self.dim();
        let mut out = TwoForm::zero(d);
        for j in 0..d {
            for k in (j + 1)..d {
                let mut acc = ScalarExpr::zero();
                for i in 0..d {
                    let c = gamma.coeff_signed(i, j, k);
                    if !c.is_zero() {
                        acc = acc.add(self.components[i].clone().mul(c));
                    }
                }
                out.set(j, k, acc);
            }
        }
        out
    }

    /// Lie bracket `[X, Y]ᵏ = Σⱼ (Xʲ ∂ⱼYᵏ − Yʲ ∂ⱼXᵏ)`.
    pub fn lie_bracket(&self, other: &VectorField) -> VectorField {
        let d = self.dim();
        let mut out = Vec::with_capacity(d);
        for k in 0..d {
            let mut acc = ScalarExpr::zero();
            for j in 0..d {
                acc = acc.add(
                    self.components[j]
                        .clone()
                        .mul(other.components[k].differentiate(j)),
                );
                acc = acc.sub(
                    other.components[j]
                        .clone()
                        .mul(self.components[k].differentiate(j)),
                );
            }
            out.push(acc);
        }
        VectorField::new(out)
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.clone().add(b.clone()))
                .collect(),
        )
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.clone().sub(b.clone()))
                .collect(),
        )
    }

    pub fn scale(&self, factor: f64) -> VectorField {
        VectorField::new(
            self.components
                .iter()
                .map(|c| c.clone().scale(factor))
                .collect(),
        )
    }

    /// Multiply every component by a scalar expression.
    pub fn scale_expr(&self, factor: &ScalarExpr) -> VectorField {
        VectorField::new(
            self.components
                .iter()
                .map(|c| factor.clone().mul(c.clone()))
                .collect(),
        )
    }
}

impl Components for VectorField {
    fn components(&self) -> Vec<ScalarExpr> {
        self.components.clone()
    }
}

/// One-form: one coefficient per coordinate differential.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    components: Vec<ScalarExpr>,
}

impl OneForm {
    pub fn new(components: Vec<ScalarExpr>) -> Self {
        OneForm { components }
    }

    pub fn zero(dim: usize) -> Self {
        OneForm {
            components: vec![ScalarExpr::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &ScalarExpr {
        &self.components[i]
    }

    pub fn add(&self, other: &OneForm) -> OneForm {
        OneForm::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.clone().add(b.clone()))
                .collect(),
        )
    }

    pub fn sub(&self, other: &OneForm) -> OneForm {
        OneForm::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.clone().sub(b.clone()))
                .collect(),
        )
    }

    pub fn scale_expr(&self, factor: &ScalarExpr) -> OneForm {
        OneForm::new(
            self.components
                .iter()
                .map(|c| factor.clone().mul(c.clone()))
                .collect(),
        )
    }

    /// Exterior derivative: `(dα)_{ij} = ∂ᵢαⱼ − ∂ⱼαᵢ` for `i < j`.
    pub fn exterior_derivative(&self) -> TwoForm {
        let d = self.dim();
        let mut out = TwoForm::zero(d);
        for i in 0..d {
            for j in (i + 1)..d {
                out.set(
                    i,
                    j,
                    self.components[j]
                        .differentiate(i)
                        .sub(self.components[i].differentiate(j)),
                );
            }
        }
        out
    }
}

impl Components for OneForm {
    fn components(&self) -> Vec<ScalarExpr> {
        self.components.clone()
    }
}

/// Differential of a scalar: `df = Σ ∂ᵢf dxⁱ`.
pub fn differential(f: &ScalarExpr, dim: usize) -> OneForm {
    OneForm::new((0..dim).map(|i| f.differentiate(i)).collect())
}

/// Two-form with strictly upper-triangular coefficient storage: the
/// coefficient of `dxⁱ∧dxʲ` for `i < j`. Neither diagonal nor lower-triangular
/// coefficients are ever stored.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    dim: usize,
    upper: Vec<ScalarExpr>,
}

impl TwoForm {
    pub fn zero(dim: usize) -> Self {
        TwoForm {
            dim,
            upper: vec![ScalarExpr::zero(); dim * (dim - 1) / 2],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.dim);
        i * (2 * self.dim - i - 1) / 2 + (j - i - 1)
    }

    pub fn set(&mut self, i: usize, j: usize, coeff: ScalarExpr) {
        let s = self.slot(i, j);
        self.upper[s] = coeff;
    }

    /// Upper-triangular coefficient (`i < j` required).
    pub fn coeff(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.upper[self.slot(i, j)]
    }

    /// Coefficient `β(eᵢ, eⱼ)` with antisymmetry folded in.
    pub fn coeff_signed(&self, i: usize, j: usize) -> ScalarExpr {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Less => self.coeff(i, j).clone(),
            Ordering::Equal => ScalarExpr::zero(),
            Ordering::Greater => self.coeff(j, i).clone().neg(),
        }
    }

    pub fn add(&self, other: &TwoForm) -> TwoForm {
        TwoForm {
            dim: self.dim,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a.clone().add(b.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &TwoForm) -> TwoForm {
        TwoForm {
            dim: self.dim,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a.clone().sub(b.clone()))
                .collect(),
        }
    }

    /// Exterior derivative: `(dβ)_{ijk} = ∂ᵢβ_{jk} − ∂ⱼβ_{ik} + ∂_kβ_{ij}`.
    pub fn exterior_derivative(&self) -> ThreeForm {
        let d = self.dim;
        let mut out = ThreeForm::zero(d);
        for i in 0..d {
            for j in (i + 1)..d {
                for k in (j + 1)..d {
                    let c = self
                        .coeff(j, k)
                        .differentiate(i)
                        .sub(self.coeff(i, k).differentiate(j))
                        .add(self.coeff(i, j).differentiate(k));
                    out.set(i, j, k, c);
                }
            }
        }
        out
    }
}

impl Components for TwoForm {
    fn components(&self) -> Vec<ScalarExpr> {
        self.upper.clone()
    }
}

/// Three-form intermediate (strictly increasing index triples).
#[derive(Clone, Debug, PartialEq)]
pub struct ThreeForm {
    dim: usize,
    coeffs: Vec<ScalarExpr>,
}

impl ThreeForm {
    pub fn zero(dim: usize) -> Self {
        let count = if dim >= 3 {
            dim * (dim - 1) * (dim - 2) / 6
        } else {
            0
        };
        ThreeForm {
            dim,
            coeffs: vec![ScalarExpr::zero(); count],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn slot(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < j && j < k && k < self.dim);
        // Lexicographic rank of the increasing triple.
        let choose3 = |n: usize| if n >= 3 { n * (n - 1) * (n - 2) / 6 } else { 0 };
        let choose2 = |n: usize| if n >= 2 { n * (n - 1) / 2 } else { 0 };
        let d = self.dim;
        choose3(d) - choose3(d - i) + (choose2(d - i - 1) - choose2(d - j)) + (k - j - 1)
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, coeff: ScalarExpr) {
        let s = self.slot(i, j, k);
        self.coeffs[s] = coeff;
    }

    pub fn coeff(&self, i: usize, j: usize, k: usize) -> &ScalarExpr {
        &self.coeffs[self.slot(i, j, k)]
    }

    /// Coefficient `γ(eᵢ, eⱼ, e_k)` with the permutation sign folded in.
    pub fn coeff_signed(&self, i: usize, j: usize, k: usize) -> ScalarExpr {
        if i == j || j == k || i == k {
            return ScalarExpr::zero();
        }
        let mut idx = [i, j, k];
        let mut sign = 1.0;
        // Sort the triple with a 3-element bubble, tracking parity.
        for a in 0..2 {
            for b in 0..(2 - a) {
                if idx[b] > idx[b + 1] {
                    idx.swap(b, b + 1);
                    sign = -sign;
                }
            }
        }
        let c = self.coeff(idx[0], idx[1], idx[2]).clone();
        if sign < 0.0 {
            c.neg()
        } else {
            c
        }
    }
}

impl Components for ThreeForm {
    fn components(&self) -> Vec<ScalarExpr> {
        self.coeffs.clone()
    }
}

/// Cartan's formula on one-forms: `L_X α = X ⌟ dα + d(X ⌟ α)`.
pub fn lie_derivative_one(x: &VectorField, alpha: &OneForm) -> OneForm {
    let dim = alpha.dim();
    x.contract_two(&alpha.exterior_derivative())
        .add(&differential(&x.contract_one(alpha), dim))
}

/// Cartan's formula on two-forms; the three-form `dβ` is handled internally.
pub fn lie_derivative_two(x: &VectorField, beta: &TwoForm) -> TwoForm {
    x.contract_three(&beta.exterior_derivative())
        .add(&x.contract_two(beta).exterior_derivative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equal_on_samples, random, SampleDomain};

    fn q() -> ScalarExpr {
        ScalarExpr::coord(0)
    }
    fn p() -> ScalarExpr {
        ScalarExpr::coord(1)
    }

    /// dq∧dp on a 2-dimensional chart.
    fn omega2() -> TwoForm {
        let mut w = TwoForm::zero(2);
        w.set(0, 1, ScalarExpr::one());
        w
    }

    #[test]
    fn basis_contraction_of_area_form() {
        // ∂q ⌟ (dq∧dp) = dp
        let x = VectorField::new(vec![ScalarExpr::one(), ScalarExpr::zero()]);
        let got = x.contract_two(&omega2());
        assert!(got.component(0).is_zero());
        assert_eq!(got.component(1), &ScalarExpr::one());
    }

    #[test]
    fn exterior_derivative_of_constant_is_zero() {
        let df = differential(&ScalarExpr::constant(3.0), 4);
        assert!(df.components().iter().all(|c| c.is_zero()));
    }

    #[test]
    fn exterior_derivative_of_q_dp() {
        // d(q·dp) = dq∧dp
        let alpha = OneForm::new(vec![ScalarExpr::zero(), q()]);
        let d = alpha.exterior_derivative();
        assert_eq!(d.coeff(0, 1), &ScalarExpr::one());
    }

    #[test]
    fn translation_fields_commute() {
        let dq = VectorField::new(vec![ScalarExpr::one(), ScalarExpr::zero()]);
        let dp = VectorField::new(vec![ScalarExpr::zero(), ScalarExpr::one()]);
        let bracket = dq.lie_bracket(&dp);
        assert!(bracket.components().iter().all(|c| c.is_zero()));
    }

    #[test]
    fn translation_preserves_constant_form() {
        // L_∂q (dq∧dp) = 0
        let dq = VectorField::new(vec![ScalarExpr::one(), ScalarExpr::zero()]);
        let l = lie_derivative_two(&dq, &omega2());
        assert!(l.components().iter().all(|c| c.is_zero()));
    }

    #[test]
    fn radial_half_field_scales_area_form() {
        // L_X ω = ω for X = (q/2)∂q + (p/2)∂p : d(X⌟ω) = d(q/2 dp − p/2 dq).
        let x = VectorField::new(vec![q().scale(0.5), p().scale(0.5)]);
        let l = lie_derivative_two(&x, &omega2());
        let dom = SampleDomain::default_for_dim(2);
        let eq = equal_on_samples(&l, &omega2(), &dom, 1e-12).unwrap();
        assert!(eq.verdict, "residual {}", eq.max_residual);
    }

    #[test]
    fn double_exterior_derivative_vanishes_on_samples() {
        // d(df) = 0, checked numerically: mixed partials of transcendental
        // trees are not structurally identical, only pointwise equal.
        let dom = SampleDomain::default_for_dim(3);
        for seed in 0..15u64 {
            let f = random::random_smooth(3, seed);
            let ddf = differential(&f, 3).exterior_derivative();
            let eq = equal_on_samples(&ddf, &TwoForm::zero(3), &dom, 1e-12).unwrap();
            assert!(eq.verdict, "seed {seed}: residual {}", eq.max_residual);
        }
    }

    #[test]
    fn lie_bracket_antisymmetry_and_jacobi_sampled() {
        let dom = SampleDomain::default_for_dim(3);
        for seed in 0..6u64 {
            let mk = |s: u64| {
                VectorField::new(vec![
                    random::random_polynomial(3, s),
                    random::random_polynomial(3, s + 101),
                    random::random_polynomial(3, s + 202),
                ])
            };
            let (x, y, z) = (mk(seed), mk(seed + 1000), mk(seed + 2000));
            let anti = x.lie_bracket(&y).add(&y.lie_bracket(&x));
            let eq = equal_on_samples(&anti, &VectorField::zero(3), &dom, 1e-9).unwrap();
            assert!(eq.verdict, "antisymmetry residual {}", eq.max_residual);

            let jacobi = x
                .lie_bracket(&y.lie_bracket(&z))
                .add(&y.lie_bracket(&z.lie_bracket(&x)))
                .add(&z.lie_bracket(&x.lie_bracket(&y)));
            let eq = equal_on_samples(&jacobi, &VectorField::zero(3), &dom, 1e-8).unwrap();
            assert!(eq.verdict, "jacobi residual {}", eq.max_residual);
        }
    }

    #[test]
    fn three_form_slot_layout_is_a_bijection() {
        let dim = 6;
        let mut seen = std::collections::HashSet::new();
        let g = ThreeForm::zero(dim);
        for i in 0..dim {
            for j in (i + 1)..dim {
                for k in (j + 1)..dim {
                    assert!(seen.insert(g.slot(i, j, k)));
                }
            }
        }
        assert_eq!(seen.len(), g.coeffs.len());
    }
}
