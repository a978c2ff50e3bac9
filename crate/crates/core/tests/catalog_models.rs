use symlab_core::catalog::{get_model, printed_vs_consistent, Angle, BianchiType, ModelParams, ALL_TYPES};
use symlab_core::emfield::{
    admissibility_residual, algebraic_constraint_residual, bianchi_residual, compatibility_residual, field_from_potential, gamma_of,
    rank3_is_zero, FieldTensor,
};
use symlab_core::expr::{parse, rat, Expr};
use symlab_core::geometry::{jacobi_residual, killing_residual, lie_bracket};

fn zero(e: &Expr) -> bool {
    e.is_zero().unwrap()
}

#[test]
fn every_model_is_consistent() {
    for tag in ALL_TYPES {
        let m = get_model(tag, &ModelParams::default()).unwrap();
        assert!(jacobi_residual(&m.constants).is_zero(), "{tag}");
        for a in 0..3 {
            for b in 0..3 {
                let br = lie_bracket(&m.frame[a], &m.frame[b]);
                let mut rhs = symlab_core::geometry::VectorField::default();
                for g in 0..3 {
                    rhs = rhs.add(&m.frame[g].scale(&m.constants.c[a][b][g]));
                }
                assert!(br.sub(&rhs).is_zero().unwrap(), "{tag} bracket {a}{b}");
            }
        }
        assert!(m.coframe.as_ref().unwrap().is_invariant(&m.frame).unwrap(), "{tag}");
        for (s, x) in m.frame.iter().enumerate() {
            for row in killing_residual(&m.metric, x) {
                assert!(row.iter().all(zero), "{tag} killing {s}");
            }
            for r in admissibility_residual(&m.potential, &m.field, x) {
                assert!(zero(&r), "{tag} admissibility {s}: {r}");
            }
            for row in compatibility_residual(&m.field, x) {
                assert!(row.iter().all(zero), "{tag} compatibility {s}");
            }
            assert!(zero(&(&m.integrals[s].gamma - &gamma_of(x, &m.potential))));
        }
        assert!(rank3_is_zero(&bianchi_residual(&m.field)).unwrap());
        for row in algebraic_constraint_residual(&m.potential, &m.frame, &m.constants) {
            assert!(row.iter().all(zero), "{tag} algebraic");
        }
        for n in &m.errata {
            let c = n.reproduce(&m).unwrap();
            assert!(c.printed_fails && c.consistent_passes, "{tag} {}: {c:?}", n.location);
        }
    }
}

#[test]
fn printed_field_tables() {
    let cases: [(BianchiType, [&str; 6]); 4] = [
        (BianchiType::III, ["alpha0'*exp(u3)", "beta0'", "gamma0'", "0", "-alpha0*exp(u3)", "0"]),
        (
            BianchiType::IV,
            [
                "alpha0'*exp(u3)",
                "(alpha0'*u3 + beta0')*exp(u3)",
                "gamma0'",
                "0",
                "-alpha0*exp(u3)",
                "-(alpha0*u3 + alpha0 + beta0)*exp(u3)",
            ],
        ),
        (BianchiType::VI, ["alpha0'*exp(u3)", "beta0'*exp(2*u3)", "gamma0'", "0", "-alpha0*exp(u3)", "-2*beta0*exp(2*u3)"]),
        (
            BianchiType::VIII,
            [
                "alpha0'",
                "(alpha0'*u1^2 + 2*beta0'*u1 + gamma0')*exp(-u3)",
                "-(alpha0'*u1 + beta0')",
                "2*(alpha0*u1 + beta0)*exp(-u3)",
                "-alpha0",
                "(alpha0*u1^2 + 2*beta0*u1 + gamma0)*exp(-u3)",
            ],
        ),
    ];
    for (tag, f) in cases {
        let m = get_model(tag, &ModelParams::default()).unwrap();
        let want = FieldTensor::parse_upper(f).unwrap();
        assert!(m.field.sub(&want).is_zero().unwrap(), "{tag}: {}", m.field);
    }
}

#[test]
fn type_ix_field_differs_by_gamma_mode() {
    let m = get_model(BianchiType::IX, &ModelParams::default()).unwrap();
    let printed = FieldTensor::parse_upper([
        "gamma0' + alpha0'*cos(u3) - beta0'*sin(u3)",
        "(alpha0'*sin(u3) + beta0'*cos(u3))*sin(u1)",
        "0",
        "(alpha0*sin(u3) + beta0*cos(u3))*cos(u1)",
        "alpha0*sin(u3) + beta0*cos(u3)",
        "(-alpha0*cos(u3) + beta0*sin(u3))*sin(u1)",
    ])
    .unwrap();
    // The gamma0 mode lives in A2 and A3 instead of A1.
    let shift = FieldTensor::parse_upper(["-gamma0'", "gamma0'*cos(u1)", "gamma0'", "-gamma0*sin(u1)", "0", "0"]).unwrap();
    assert!(m.field.sub(&printed).sub(&shift).is_zero().unwrap(), "{}", m.field);
    // The printed table is itself dA of the printed potential.
    let pa = symlab_core::emfield::Potential::parse([
        "0",
        "gamma0 + alpha0*cos(u3) - beta0*sin(u3)",
        "(alpha0*sin(u3) + beta0*cos(u3))*sin(u1)",
        "0",
    ])
    .unwrap();
    assert!(field_from_potential(&pa).sub(&printed).is_zero().unwrap());
}

#[test]
fn exact_right_angle_for_vii() {
    let p = ModelParams { angle: Angle::Exact { cos: rat(0), sin: rat(1) }, ..Default::default() };
    let m = get_model(BianchiType::VII, &p).unwrap();
    assert!(m.potential.a[2] == parse("alpha0*sin(u3) + beta0*cos(u3)").unwrap(), "{}", m.potential.a[2]);
    assert!(jacobi_residual(&m.constants).is_zero());
}

#[test]
fn errata_lists() {
    assert!(printed_vs_consistent(BianchiType::I).unwrap().is_empty());
    assert!(printed_vs_consistent(BianchiType::VIII).unwrap().iter().any(|n| n.printed_form.contains("-delta")));
    assert!(printed_vs_consistent(BianchiType::VII).unwrap().iter().any(|n| n.location.contains("structure-constant")));
}
