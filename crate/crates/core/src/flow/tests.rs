use super::*;
use crate::flow::checks::{canonoid_flow_check, pullback_residual, FlowCheckOptions, FormRef};
use crate::flow::monitor::{monitor, MonitorMode};
use crate::geometry::GeometryKind;
use crate::symmetry::HamiltonianSystem;
use std::f64::consts::TAU;

fn chart(kind: GeometryKind, n: usize) -> Chart {
    Chart::new(kind, n).unwrap()
}

fn system(kind: GeometryKind, n: usize, h: &str) -> HamiltonianSystem {
    let c = chart(kind, n);
    let h = c.parse_expr(h).unwrap();
    HamiltonianSystem::new(c, h).unwrap()
}

#[test]
fn harmonic_oscillator_closes_after_one_period() {
    // The circle q = cos s, p = −sin s from (1, 0); RK4 endpoint error at
    // h = 2π/1000 is far below 1e-9.
    let sys = system(GeometryKind::Symplectic, 1, "(q^2 + p^2)/2");
    let traj = integrate(
        sys.chart(),
        sys.hamiltonian_field(),
        &[1.0, 0.0],
        TAU,
        TAU / 1000.0,
        None,
    )
    .unwrap();
    assert!(traj.truncated().is_none());
    let (s_end, x_end) = traj.endpoint();
    assert!((s_end - TAU).abs() < 1e-12);
    let err = (x_end[0] - 1.0).hypot(x_end[1]);
    assert!(err < 1e-9, "closure error {err}");
}

#[test]
fn zero_field_gives_constant_trajectory() {
    let c = chart(GeometryKind::Contact, 1);
    let traj = integrate(&c, &VectorField::zero(3), &[0.3, 0.7, 1.1], 2.0, 0.1, None).unwrap();
    for (_, x) in traj.samples() {
        assert_eq!(x.as_slice(), &[0.3, 0.7, 1.1]);
    }
}

#[test]
fn cosymplectic_time_coordinate_advances_linearly() {
    // dt/ds = 1, so the endpoint's t equals s.
    let sys = system(GeometryKind::Cosymplectic, 2, "(p1^2 + p2^2)/2 + t*q1");
    let traj = integrate(
        sys.chart(),
        sys.dynamics(),
        &[0.0, 0.0, 0.0, 1.0, 0.0],
        1.0,
        1e-3,
        None,
    )
    .unwrap();
    let (_, x_end) = traj.endpoint();
    assert!((x_end[4] - 1.0).abs() < 1e-13);
}

#[test]
fn trajectory_truncates_on_domain_error() {
    // dq/ds = √p with p driven negative: ṗ = −1 from p = 0.05.
    let c = chart(GeometryKind::Symplectic, 1);
    let field = c.parse_vector_field("sqrt(p); 0 - 1").unwrap();
    let traj = integrate(&c, &field, &[1.0, 0.05], 1.0, 1e-3, None).unwrap();
    assert!(matches!(
        traj.truncated(),
        Some(Truncation::Domain { .. }) | Some(Truncation::OutOfBounds { .. })
    ));
    assert!(traj.samples().len() < 1001);
}

#[test]
fn trajectory_truncates_when_leaving_bounds() {
    let c = chart(GeometryKind::Symplectic, 1);
    let field = c.parse_vector_field("q; 0").unwrap(); // exponential growth
    let dom = crate::expr::SampleDomain::default_for_dim(2);
    let bounds = Bounds::expand_domain(&dom, 3.0);
    let traj = integrate(&c, &field, &[1.0, 1.0], 5.0, 1e-2, Some(&bounds)).unwrap();
    assert!(matches!(
        traj.truncated(),
        Some(Truncation::OutOfBounds { .. })
    ));
}

#[test]
fn flow_map_identity_and_group_inverse() {
    let sys = system(GeometryKind::Contact, 1, "p^2/2 - 1/q - 1/z^2");
    let x_field = sys.chart().parse_vector_field("2*q; -p; z").unwrap();

    let id = FlowMap::new(sys.chart(), &x_field, 0.0, 0.1).unwrap();
    assert_eq!(id.apply(&[1.0, 1.5, 0.8]).unwrap(), vec![1.0, 1.5, 0.8]);

    let fwd = FlowMap::new(sys.chart(), &x_field, 0.1, 1e-3).unwrap();
    let x0 = vec![1.2, 0.9, 1.4];
    let back = fwd.inverse().apply(&fwd.apply(&x0).unwrap()).unwrap();
    let err = x0
        .iter()
        .zip(&back)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-8, "round trip error {err}");
}

#[test]
fn translation_flow_is_exact() {
    let c = chart(GeometryKind::Symplectic, 1);
    let field = c.parse_vector_field("1; 0").unwrap();
    let flow = FlowMap::new(&c, &field, 0.7, 1e-2).unwrap();
    let moved = flow.apply(&[1.0, 2.0]).unwrap();
    assert!(
        (moved[0] - 1.7).abs() < 1e-12 && moved[1] == 2.0,
        "{moved:?}"
    );
}

#[test]
fn flow_group_law_on_smooth_field() {
    // φ_{s1} ∘ φ_{s2} = φ_{s1+s2} within 1e-7.
    let sys = system(GeometryKind::Contact, 1, "p*q + z");
    let x_field = sys.chart().parse_vector_field("0; p; z").unwrap();
    let c = sys.chart();
    let (s1, s2) = (0.3, 0.5);
    let f1 = FlowMap::new(c, &x_field, s1, s1 / 1000.0).unwrap();
    let f2 = FlowMap::new(c, &x_field, s2, s2 / 1000.0).unwrap();
    let f12 = FlowMap::new(c, &x_field, s1 + s2, (s1 + s2) / 1000.0).unwrap();
    let dom = crate::expr::SampleDomain::default_for_dim(3);
    for k in 0..10 {
        let x = dom.point(k);
        let composed = f1.apply(&f2.apply(&x).unwrap()).unwrap();
        let direct = f12.apply(&x).unwrap();
        let err = composed
            .iter()
            .zip(&direct)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-7, "group law error {err} at {x:?}");
    }
}

#[test]
fn rk4_endpoint_error_shrinks_at_fourth_order() {
    // Halving h cuts the harmonic-oscillator endpoint error by ~16; the
    // ratio stays within [14, 18] over three refinements.
    let sys = system(GeometryKind::Symplectic, 1, "(q^2 + p^2)/2");
    let error_at = |steps: usize| -> f64 {
        let traj = integrate(
            sys.chart(),
            sys.hamiltonian_field(),
            &[1.0, 0.0],
            TAU,
            TAU / steps as f64,
            None,
        )
        .unwrap();
        let (_, x) = traj.endpoint();
        (x[0] - 1.0).hypot(x[1])
    };
    let errors: Vec<f64> = [50, 100, 200, 400].iter().map(|&n| error_at(n)).collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (14.0..=18.0).contains(&ratio),
            "refinement ratio {ratio} outside [14, 18] (errors {errors:?})"
        );
    }
}

#[test]
fn pullback_of_omega_under_infinitesimal_symmetry_flow() {
    // X = ∂q2 preserves Ω and H: pullback residuals < 1e-6 and
    // |H∘φ_s − H| < 1e-6 for s ∈ {0.25, 0.5, 1}.
    let sys = system(GeometryKind::Cosymplectic, 2, "(p1^2 + p2^2)/2 + t*q1");
    let x_field = sys.chart().parse_vector_field("0; 1; 0; 0; 0").unwrap();
    assert!(sys.is_infinitesimal_symmetry(&x_field).unwrap().verdict);
    let opts = FlowCheckOptions::default();
    let dom = &sys.settings().domain;
    for s in [0.25, 0.5, 1.0] {
        let flow = FlowMap::with_steps(sys.chart(), &x_field, s, opts.steps).unwrap();
        let omega = sys.structure().two_form();
        let r =
            pullback_residual(&flow, FormRef::Two(omega), FormRef::Two(omega), dom, &opts).unwrap();
        assert!(r < 1e-6, "s = {s}: residual {r}");
        let eta = sys.structure().time_form().unwrap();
        let r = pullback_residual(&flow, FormRef::One(eta), FormRef::One(eta), dom, &opts).unwrap();
        assert!(r < 1e-6, "s = {s}: η residual {r}");
        // The flow leaves the Hamiltonian invariant at probe points.
        for k in 0..20u64 {
            let x = dom.point(k);
            let y = flow.apply(&x).unwrap();
            let hx = sys.hamiltonian().eval(&x).unwrap();
            let hy = sys.hamiltonian().eval(&y).unwrap();
            assert!(
                (hy - hx).abs() < 1e-6,
                "s = {s}: |H∘φ − H| = {}",
                (hy - hx).abs()
            );
        }
    }
}

#[test]
fn pullback_residual_vanishes_at_s_zero() {
    let sys = system(GeometryKind::Contact, 1, "p*q + z");
    let theta = sys.structure().contact_form().unwrap();
    let x_field = sys.chart().parse_vector_field("0; p; z").unwrap();
    let opts = FlowCheckOptions::default();
    let flow = FlowMap::with_steps(sys.chart(), &x_field, 0.0, 1).unwrap();
    let r = pullback_residual(
        &flow,
        FormRef::One(theta),
        FormRef::One(theta),
        &sys.settings().domain,
        &opts,
    )
    .unwrap();
    assert!(r < 1e-9, "residual {r}");
}

#[test]
fn scaling_flow_is_certified_not_canonical() {
    // L_Xθ = θ integrates to φ_s*θ = e^s θ, so the pullback residual at
    // s = 0.25 exceeds 0.1 — the flow is canonoid but not canonical.
    let sys = system(GeometryKind::Contact, 1, "p^2/2 - 1/q - 1/z^2");
    let x_field = sys.chart().parse_vector_field("2*q; -p; z").unwrap();
    let theta = sys.structure().contact_form().unwrap();
    let opts = FlowCheckOptions::default();
    let flow = FlowMap::with_steps(sys.chart(), &x_field, 0.25, opts.steps).unwrap();
    let r = pullback_residual(
        &flow,
        FormRef::One(theta),
        FormRef::One(theta),
        &sys.settings().domain,
        &opts,
    )
    .unwrap();
    assert!(r > 0.1, "residual {r} should certify non-canonical");
}

#[test]
fn dynamics_flow_has_k_s_equal_h_symplectic() {
    // X = X_H: φ_s*ω = ω and K_s = φ_s*H = H (conserved).
    let sys = system(GeometryKind::Symplectic, 1, "(q^2 + p^2)/2");
    let opts = FlowCheckOptions::default();
    let rep = canonoid_flow_check(&sys, sys.hamiltonian_field(), 0.5, &opts).unwrap();
    assert!(!rep.canonoid_warning);
    assert!(rep.defining_residual < 1e-5, "{}", rep.defining_residual);
    assert!(rep.k_vs_flowed_h < 1e-5, "{}", rep.k_vs_flowed_h);
}

#[test]
fn degree_one_scaling_flow_matches_pullback_hamiltonian() {
    // Contact H = pq + z with the degree-1 scaling (a dynamical symmetry):
    // K_s = φ_s*H within 1e-5.
    let sys = system(GeometryKind::Contact, 1, "p*q + z");
    let x_field = sys.chart().parse_vector_field("0; p; z").unwrap();
    let opts = FlowCheckOptions::default();
    for s in [0.1, 0.5, 1.0] {
        let rep = canonoid_flow_check(&sys, &x_field, s, &opts).unwrap();
        assert!(!rep.canonoid_warning);
        assert!(
            rep.defining_residual < 1e-5,
            "s={s}: {}",
            rep.defining_residual
        );
        assert!(rep.k_vs_flowed_h < 1e-5, "s={s}: {}", rep.k_vs_flowed_h);
    }
}

#[test]
fn degree_minus_two_scaling_flow_satisfies_canonoid_equations() {
    // Canonoid without being a dynamical symmetry: the finite-s equations
    // hold even though K_s ≠ φ_s*H.
    let sys = system(GeometryKind::Contact, 1, "p^2/2 - 1/q - 1/z^2");
    let x_field = sys.chart().parse_vector_field("2*q; -p; z").unwrap();
    let opts = FlowCheckOptions::default();
    let rep = canonoid_flow_check(&sys, &x_field, 0.25, &opts).unwrap();
    assert!(!rep.canonoid_warning);
    assert!(rep.defining_residual < 1e-5, "{}", rep.defining_residual);
    // Not a dynamical symmetry, so K_s differs from φ_s*H here.
    assert!(rep.k_vs_flowed_h > 1e-3, "{}", rep.k_vs_flowed_h);
}

#[test]
fn cosymplectic_translation_flow_canonoid_check() {
    let sys = system(GeometryKind::Cosymplectic, 2, "(p1^2 + p2^2)/2 + t*q1");
    let x_field = sys.chart().parse_vector_field("0; 1; 0; 0; 0").unwrap();
    let opts = FlowCheckOptions::default();
    let rep = canonoid_flow_check(&sys, &x_field, 0.5, &opts).unwrap();
    assert!(!rep.canonoid_warning);
    assert!(rep.defining_residual < 1e-5, "{}", rep.defining_residual);
    assert!(rep.eta_residual.unwrap() < 1e-5);
    assert!(rep.k_vs_flowed_h < 1e-5, "{}", rep.k_vs_flowed_h);
}

#[test]
fn momentum_stays_conserved_along_trajectory() {
    // ex2's p2 is exactly conserved; drift < 1e-10 over s ∈ [0, 5].
    let sys = system(GeometryKind::Cosymplectic, 2, "(p1^2 + p2^2)/2 + t*q1");
    let traj = integrate(
        sys.chart(),
        sys.dynamics(),
        &[0.0, 0.0, 0.0, 1.0, 0.0],
        5.0,
        1e-3,
        None,
    )
    .unwrap();
    let f = sys.chart().parse_expr("p2").unwrap();
    let rep = monitor(&sys, &traj, &f, MonitorMode::Conserved).unwrap();
    assert!(rep.drift < 1e-10, "drift {}", rep.drift);
}

#[test]
fn contact_hamiltonian_dissipates_at_unit_rate() {
    // H = pq + z has RH = 1; H·e^{s} returns to H(x0) within 1e-6.
    let sys = system(GeometryKind::Contact, 1, "p*q + z");
    let traj = integrate(
        sys.chart(),
        sys.hamiltonian_field(),
        &[1.0, 1.0, 1.0],
        3.0,
        1e-3,
        None,
    )
    .unwrap();
    assert!(traj.truncated().is_none());
    let rep = monitor(&sys, &traj, sys.hamiltonian(), MonitorMode::Dissipated).unwrap();
    assert!(rep.drift < 1e-6, "drift {}", rep.drift);

    // The quotient H/(−z) of two dissipated quantities is conserved.
    let quotient = sys
        .hamiltonian()
        .clone()
        .div(sys.chart().parse_expr("-z").unwrap());
    let rep = monitor(&sys, &traj, &quotient, MonitorMode::Conserved).unwrap();
    assert!(rep.drift < 1e-6, "quotient drift {}", rep.drift);
}

#[test]
fn dissipated_monitoring_requires_contact_kind() {
    let sys = system(GeometryKind::Symplectic, 1, "p^2/2");
    let traj = integrate(
        sys.chart(),
        sys.hamiltonian_field(),
        &[1.0, 1.0],
        0.1,
        1e-2,
        None,
    )
    .unwrap();
    let err = monitor(&sys, &traj, sys.hamiltonian(), MonitorMode::Dissipated).unwrap_err();
    assert!(matches!(err, FlowError::Unsupported { .. }));
}

#[test]
fn integrate_validates_inputs() {
    let c = chart(GeometryKind::Symplectic, 1);
    let f = c.parse_vector_field("p; 0 - q").unwrap();
    assert!(matches!(
        integrate(&c, &f, &[1.0], 1.0, 1e-2, None),
        Err(FlowError::PointDimension { .. })
    ));
    assert!(matches!(
        integrate(&c, &f, &[1.0, 0.0], 1.0, -1e-2, None),
        Err(FlowError::InvalidStep)
    ));
}

#[test]
fn canonoid_flow_check_warns_for_non_canonoid_fields() {
    let sys = system(GeometryKind::Symplectic, 1, "p^2/2");
    let x_field = sys.chart().parse_vector_field("q^2; 0").unwrap();
    let opts = FlowCheckOptions::default();
    let rep = canonoid_flow_check(&sys, &x_field, 0.2, &opts).unwrap();
    assert!(rep.canonoid_warning);
    // The finite-s equations indeed fail: X_H⌟φ_s*ω is not closed.
    assert!(rep.defining_residual > 1e-3, "{}", rep.defining_residual);
}
