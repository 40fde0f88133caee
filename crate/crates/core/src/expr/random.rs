//! Deterministic random expression generators, used by the property tests and
//! the self-verification suites. Everything is seeded; no global RNG state.

use super::sample::splitmix64;
use super::ScalarExpr;

struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 = splitmix64(self.0);
        self.0
    }

    fn range(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    /// Coefficient in ±[0.25, 2.0], quantized to 0.25 so identities never
    /// hinge on coefficients accidentally close to zero.
    fn coefficient(&mut self) -> f64 {
        let mag = 0.25 * (1 + self.range(8)) as f64;
        if self.next() & 1 == 0 {
            mag
        } else {
            -mag
        }
    }
}

/// Random multivariate polynomial: 2–4 monomials, per-coordinate degree ≤ 2.
pub fn random_polynomial(dim: usize, seed: u64) -> ScalarExpr {
    let mut rng = Rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let terms = 2 + rng.range(3);
    let mut acc = ScalarExpr::zero();
    for _ in 0..terms {
        let mut mono = ScalarExpr::constant(rng.coefficient());
        for i in 0..dim {
            let deg = match rng.range(4) {
                0 => 1,
                1 => 2,
                _ => 0,
            };
            if deg > 0 {
                mono = mono.mul(ScalarExpr::coord(i).powi(deg));
            }
        }
        acc = acc.add(mono);
    }
    acc
}

/// Random smooth expression with transcendental nodes. Compositions are kept
/// shallow and log/sqrt arguments are built strictly positive, so the result
/// is smooth on all of ℝ^dim with moderate higher derivatives.
pub fn random_smooth(dim: usize, seed: u64) -> ScalarExpr {
    let mut rng = Rng(seed ^ 0x2545_f491_4f6c_dd1d);
    smooth_inner(dim, &mut rng, 2)
}

fn smooth_inner(dim: usize, rng: &mut Rng, depth: usize) -> ScalarExpr {
    if depth == 0 {
        return match rng.range(3) {
            0 => ScalarExpr::constant(rng.coefficient()),
            _ => ScalarExpr::coord(rng.range(dim as u64) as usize),
        };
    }
    let u = smooth_inner(dim, rng, depth - 1);
    let v = smooth_inner(dim, rng, depth - 1);
    match rng.range(10) {
        0 => u.add(v),
        1 => u.sub(v),
        2 => u.mul(v),
        // Denominator 1 + v^2 never vanishes.
        3 => u.div(v.powi(2).add(ScalarExpr::one())),
        4 => u.scale(0.5).sin(),
        5 => u.scale(0.5).cos(),
        6 => u.scale(0.25).exp(),
        7 => v.powi(2).add(ScalarExpr::one()).log(),
        8 => u.neg(),
        _ => u.powi(3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_polynomial(3, 7), random_polynomial(3, 7));
        assert_eq!(random_smooth(3, 7), random_smooth(3, 7));
        assert_ne!(random_polynomial(3, 7), random_polynomial(3, 8));
    }

    #[test]
    fn smooth_expressions_evaluate_everywhere_on_reasonable_points() {
        for seed in 0..50u64 {
            let e = random_smooth(4, seed);
            for x in [[0.5, 1.0, 1.5, 2.0], [-1.0, 0.0, 2.0, 0.3]] {
                e.eval(&x)
                    .unwrap_or_else(|err| panic!("seed {seed}: {err}"));
            }
        }
    }
}
