use latorb::instance::{fixture, fixture_names, Instance, InstanceSpec, LoadOptions};
use latorb::Error;

fn load(name: &str) -> Instance {
    Instance::load(&fixture(name).unwrap(), LoadOptions::default()).unwrap()
}

#[test]
fn bundled_instances_have_expected_invariants() {
    // (name, n, r, m)
    let table: &[(&str, [usize; 2], i64, [i64; 2])] = &[
        ("u11_r0_q3", [1, 1], 0, [0, 0]),
        ("u11_r1_q3", [1, 1], 1, [0, 0]),
        ("u11_r2_q3", [1, 1], 2, [0, 0]),
        ("u11_r3_q3", [1, 1], 3, [0, 0]),
        ("n12_r1_q3", [1, 2], 1, [0, 0]),
        ("n12_r0_m2_q3", [1, 2], 0, [0, 2]),
        ("n22_r2_q3", [2, 2], 2, [0, 0]),
        ("n22_r2_m2_q3", [2, 2], 2, [0, 2]),
        ("golden_q5", [1, 3], 2, [0, 2]),
    ];
    for &(name, n, r, m) in table {
        let inst = load(name);
        let iv = inst.invariants;
        assert_eq!([iv.n1, iv.n2], n, "{name}");
        assert_eq!(iv.r, r, "{name}");
        assert_eq!([iv.m1, iv.m2], m, "{name}");
        assert!(inst.routes.r_agrees() && inst.routes.m_agrees() && inst.routes.delta_agrees());
        for i in 0..2 {
            // tame: δ = n − 1
            assert_eq!(inst.routes.delta_derivative[i], n[i] as i64 - 1, "{name}");
            if let Some(mf) = inst.tame_conductor_formula(i) {
                assert_eq!(mf, m[i], "{name} factor {}", i + 1);
            }
        }
        if let Some(ok) = inst.valuation_bound_holds() {
            assert!(ok, "{name}: r against min(n1 v2, n2 v1)");
        }
    }
}

#[test]
fn invalid_instances_name_the_broken_hypothesis() {
    let table: &[(&str, &str)] = &[
        ("invalid_char2", "p > 2"),
        ("invalid_reducible_k_poly", "residue field"),
        ("invalid_not_eisenstein", "Eisenstein polynomial"),
        ("invalid_tame_wild", "tame shorthand"),
        ("invalid_beta_not_unit", "β is a unit"),
        ("invalid_not_generator", "E'_i = F'[γ_i]"),
        ("invalid_not_coprime", "P1, P2 coprime"),
        ("invalid_alpha", "hermitian normalization"),
    ];
    for &(name, hyp) in table {
        let err = Instance::load(&fixture(name).unwrap(), LoadOptions::default()).unwrap_err();
        match err {
            Error::Hypothesis { hypothesis, .. } => assert_eq!(hypothesis, hyp, "{name}"),
            other => panic!("{name}: unexpected {other:?}"),
        }
    }
}

#[test]
fn fixtures_round_trip_through_json() {
    for name in fixture_names() {
        let spec = fixture(name).unwrap();
        let back = InstanceSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, back);
    }
}

#[test]
fn doubling_precision_does_not_change_invariants() {
    for name in ["n22_r2_m2_q3", "golden_q5"] {
        let a = load(name);
        let b = Instance::load(
            &fixture(name).unwrap(),
            LoadOptions { precision: Some(2 * a.precision), max_precision: 4096 },
        )
        .unwrap();
        assert_eq!(a.invariants, b.invariants);
        assert_eq!(a.routes, b.routes);
    }
}
