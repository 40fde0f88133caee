//! End-to-end theorem chain on one scaling instance per geometry kind, all
//! through the public API: structural scaling → degree recovery → the
//! commutator lemma → canonoid generation → flow-level canonoid equations.

use hamsym::flow::{canonoid_flow_check, FlowCheckOptions};
use hamsym::geometry::GeometryKind;
use hamsym::symmetry::HamiltonianSystem;
use hamsym::{equal_on_samples, Chart};

struct ScalingInstance {
    kind: GeometryKind,
    hamiltonian: &'static str,
    field: &'static str,
    degree: f64,
}

const INSTANCES: [ScalingInstance; 4] = [
    ScalingInstance {
        kind: GeometryKind::Symplectic,
        hamiltonian: "p^2/2 - 1/q",
        field: "2*q; -p",
        degree: -2.0,
    },
    ScalingInstance {
        kind: GeometryKind::Cosymplectic,
        hamiltonian: "p^2/2 - 1/q",
        field: "2*q; -p; 0",
        degree: -2.0,
    },
    ScalingInstance {
        kind: GeometryKind::Contact,
        hamiltonian: "p^2/2 - 1/q - 1/z^2",
        field: "2*q; -p; z",
        degree: -2.0,
    },
    ScalingInstance {
        kind: GeometryKind::Cocontact,
        hamiltonian: "exp(t)*(p^2/2 - 1/q - 1/z^2)",
        field: "2*q; -p; z; 0",
        degree: -2.0,
    },
];

#[test]
fn scaling_chain_holds_on_every_geometry_kind() {
    for instance in INSTANCES {
        let chart = Chart::new(instance.kind, 1).unwrap();
        let h = chart.parse_expr(instance.hamiltonian).unwrap();
        let sys = HamiltonianSystem::new(chart, h).unwrap();
        let x = sys.chart().parse_vector_field(instance.field).unwrap();
        let kind = instance.kind;

        // Degree recovery.
        let scaling = sys.scaling_degree(&x).unwrap();
        let lambda = scaling
            .degree
            .unwrap_or_else(|| panic!("{kind}: not recognized as scaling"));
        assert!(
            (lambda - instance.degree).abs() < 1e-9,
            "{kind}: degree {lambda}"
        );

        // Commutator lemma [X, X_H] = (Λ−1) X_H.
        let lemma = equal_on_samples(
            &x.lie_bracket(sys.hamiltonian_field()),
            &sys.hamiltonian_field().scale(lambda - 1.0),
            &sys.settings().domain,
            1e-8,
        )
        .unwrap();
        assert!(
            lemma.verdict,
            "{kind}: lemma residual {}",
            lemma.max_residual
        );

        // Scaling symmetries are never infinitesimal symmetries, but they do
        // generate canonoid transformations.
        assert!(
            !sys.is_infinitesimal_symmetry(&x).unwrap().verdict,
            "{kind}"
        );
        let canonoid = sys.is_canonoid_generator(&x).unwrap();
        assert!(canonoid.verdict, "{kind}: canonoid failed");

        // The bracket's Hamiltonian function is (Λ−1)H, up to the recovery
        // gauge on symplectic/cosymplectic charts.
        let g = canonoid.bracket_hamiltonian.as_ref().unwrap();
        let expected = sys.hamiltonian().clone().scale(lambda - 1.0);
        let base = vec![1.0; sys.chart().dim()];
        let dom = &sys.settings().domain;
        let mut worst = 0.0f64;
        for k in 0..40u64 {
            let point = dom.point(k);
            let (Ok(gv), Ok(ev), Ok(eb)) =
                (g.eval(&point), expected.eval(&point), expected.eval(&base))
            else {
                continue;
            };
            let gauge = match kind {
                GeometryKind::Symplectic | GeometryKind::Cosymplectic => eb,
                _ => 0.0,
            };
            worst = worst.max((gv - (ev - gauge)).abs());
        }
        assert!(worst < 1e-6, "{kind}: bracket Hamiltonian residual {worst}");

        // Finite-s canonoid equations hold along the flow.
        let rep = canonoid_flow_check(&sys, &x, 0.2, &FlowCheckOptions::default()).unwrap();
        assert!(!rep.canonoid_warning, "{kind}");
        assert!(
            rep.defining_residual < 1e-5,
            "{kind}: flow residual {}",
            rep.defining_residual
        );
        if let Some(eta) = rep.eta_residual {
            assert!(eta < 1e-5, "{kind}: η residual {eta}");
        }
    }
}

#[test]
fn good_contact_systems_promote_dissipated_to_conserved() {
    // With RH = 0, every dissipated quantity is a constant of motion;
    // H itself is always dissipated, so it must come out conserved here.
    let chart = Chart::new(GeometryKind::Contact, 1).unwrap();
    let h = chart.parse_expr("(q^2 + p^2)/2").unwrap();
    let sys = HamiltonianSystem::new(chart, h).unwrap();
    assert_eq!(sys.is_good(), Some(true));
    let f = sys.hamiltonian().clone();
    assert!(sys.is_dissipated_quantity(&f).unwrap().verdict);
    assert!(sys.is_constant_of_motion(&f).unwrap().verdict);
}

#[test]
fn cosymplectic_gauge_freedom_does_not_change_the_field() {
    // X_{g + h(t)} = X_g: the recovery gauge of cosymplectic generators is
    // invisible to the Hamiltonian field assignment.
    let chart = Chart::new(GeometryKind::Cosymplectic, 1).unwrap();
    let g = chart.parse_expr("q*p^2").unwrap();
    let gauged = chart.parse_expr("q*p^2 + sin(t)").unwrap();
    assert_eq!(
        chart.hamiltonian_vector_field(&g),
        chart.hamiltonian_vector_field(&gauged)
    );
}
