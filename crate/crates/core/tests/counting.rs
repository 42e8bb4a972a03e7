use std::sync::Arc;

use latorb::counting::*;
use latorb::hermitian_duality::{EnumerateFilter, LagrangianBfs, Parity, SemilinearFrobenius};
use latorb::instance::*;
use latorb::lattice_window::{BruteForce, ClosureBfs, Frame, Query, Subspace, WindowModel};
use latorb::registry::Registry;

fn load(name: &str) -> Instance {
    Instance::load(&fixture(name).unwrap(), LoadOptions::default()).unwrap()
}

fn counter(inst: &Instance) -> Counter<'_> {
    Counter::new(inst, Arc::new(ClosureBfs::default()), Arc::new(LagrangianBfs::default()), 1 << 22)
}

#[test]
fn unitary_rank_one_counts_are_sums_of_powers() {
    for (name, r, es) in [("u11_r0_q3", 0, &[1, 2][..]), ("u11_r1_q3", 1, &[1, 2]), ("u11_r2_q3", 2, &[1, 2]), ("u11_r3_q3", 3, &[1])] {
        let inst = load(name);
        let c = counter(&inst);
        for &e in es {
            let d = c.count_x_models(e).unwrap();
            let q = d.big_q;
            let sum: u64 = (0..=r).map(|k| q.pow(k)).sum();
            assert_eq!(d.x, sum, "{name} e={e}");
            assert_eq!(d.y, [1, 1]);
            assert_eq!(d.residual, 0);
        }
    }
}

#[test]
fn r_zero_models_are_y() {
    for name in ["u11_r0_q3", "n12_r0_m2_q3"] {
        let inst = load(name);
        let c = counter(&inst);
        for e in [1, 2] {
            let d = c.count_x_models(e).unwrap();
            assert_eq!(d.x, d.y[0] * d.y[1], "{name}");
            assert_eq!(d.x_prime, 0);
        }
    }
}

#[test]
fn y_counts() {
    let inst = load("golden_q5");
    let c = counter(&inst);
    // n = 1 gives a point; the cubic factor with m = 2 gives a projective line
    assert_eq!(c.count_y(0, 1).unwrap(), 1);
    assert_eq!(c.count_y(1, 1).unwrap(), 26);
    let inst = load("n12_r0_m2_q3");
    let c = counter(&inst);
    assert_eq!(c.count_y(0, 2).unwrap(), 1);
    assert_eq!(c.count_y(1, 2).unwrap(), 82);
}

#[test]
fn worked_example_counts_and_cells() {
    let inst = load("golden_q5");
    let c = counter(&inst);
    let d = c.count_x_models(1).unwrap();
    assert_eq!((d.x, d.x_prime, d.residual), (17526, 1276, 0));
    let q = 25u64;
    let cell = |cells: &[(i64, i64, u64)], a: i64, b: i64| cells.iter().find(|c| (c.0, c.1) == (a, b)).map_or(0, |c| c.2);
    assert_eq!(cell(&d.cells, -1, -1), q * (q - 1) * q);
    assert_eq!(cell(&d.cells, 0, -1), (q - 1) * (2 * q + 1));
    assert_eq!(cell(&d.cells, -1, 0), (q - 1) * (2 * q + 1));
    for (a, b) in [(0, 0), (1, -1), (-1, 1)] {
        assert_eq!(cell(&d.cells, a, b), q + 1);
    }
    assert_eq!(cell(&d.cells_prime, 0, 0), (q - 1) * (2 * q + 1));
    assert_eq!(cell(&d.cells_prime, 1, 0), q + 1);
    assert_eq!(cell(&d.cells_prime, 0, 1), q + 1);
}

#[test]
fn stratum_partition_and_complement_laws() {
    for name in ["u11_r1_q3", "u11_r2_q3", "n12_r1_q3", "n12_r0_m2_q3", "n22_r2_q3", "n22_r2_m2_q3"] {
        let inst = load(name);
        let c = counter(&inst);
        let rep = c.strata_report(1).unwrap();
        assert!(rep.holds(), "{name}: {rep:?}");
    }
}

#[test]
fn orbital_integrals_of_unitary_rank_one() {
    let inst = load("u11_r2_q3");
    let o = counter(&inst).orbital_integrals(1).unwrap();
    assert_eq!((o.o_kappa, o.so), (9, 1));
    assert!(o.asserted);
    let inst = load("u11_r1_q3");
    let o = counter(&inst).orbital_integrals(1).unwrap();
    assert_eq!(o.o_kappa, -3);
}

#[test]
fn fixed_point_strategies_agree() {
    for (name, fs) in [("u11_r1_q3", &[1, 2][..]), ("u11_r2_q3", &[1, 2]), ("n12_r1_q3", &[1]), ("n22_r2_q3", &[1])] {
        let inst = load(name);
        let a = counter(&inst);
        let b = Counter::new(&inst, Arc::new(ClosureBfs::default()), Arc::new(EnumerateFilter), 1 << 22);
        for &f in fs {
            for dom in signed_domains(&inst.invariants) {
                let x = a.domain_fixed_points(&dom, f).unwrap();
                let y = b.domain_fixed_points(&dom, f).unwrap();
                assert_eq!(x, y, "{name} f={f} {}", dom.label());
            }
        }
    }
}

#[test]
fn frobenius_power_matches_iteration() {
    let inst = load("u11_r2_q3");
    let c = counter(&inst);
    for f in [1u32, 2, 3] {
        let lvl = c.level(if f % 2 == 0 { f } else { 2 * f }).unwrap();
        for dom in signed_domains(&inst.invariants) {
            let (w, _) = c.domain_model(&lvl, &dom).unwrap().unwrap();
            let frob = SemilinearFrobenius::new(&w, &inst.hermitian, dom.parity, &lvl.emb, inst.q()).unwrap();
            let q = Query { dim: w.target_dim(), ..Query::all(1 << 20) };
            let pts = latorb::lattice_window::SubspaceEnumerator::enumerate(&ClosureBfs::default(), &w, &q).unwrap();
            for p in pts.iter().take(200) {
                assert_eq!(frob.power(&p.subspace, f), frob.iterate(&p.subspace, f));
            }
        }
    }
}

#[test]
fn brute_force_agrees_on_domains() {
    for name in ["u11_r1_q3", "n12_r1_q3", "n12_r0_m2_q3"] {
        let inst = load(name);
        let a = counter(&inst);
        let b = Counter::new(&inst, Arc::new(BruteForce::default()), Arc::new(LagrangianBfs::default()), 1 << 22);
        let (x, xp) = fundamental_domains(&inst.invariants);
        for dom in [x, xp] {
            assert_eq!(a.domain_points(1, &dom).unwrap(), b.domain_points(1, &dom).unwrap(), "{name}");
        }
        for i in 0..2 {
            assert_eq!(a.y_points(1, i).unwrap(), b.y_points(1, i).unwrap());
        }
    }
}

#[test]
fn hom_dimension_equals_r() {
    let inst = load("u11_r0_q3");
    assert!(counter(&inst).hom_samples(1, 5, 1).unwrap().samples.iter().all(|s| s.dim == 0));
    // M_i = O in U(1,1)
    for name in ["u11_r1_q3", "u11_r2_q3", "u11_r3_q3"] {
        let inst = load(name);
        let c = counter(&inst);
        let m1 = SingleLattice { factor: 0, frame: Frame::single(0, 0, 0), subspace: Subspace::zero(0) };
        let m2 = SingleLattice { factor: 1, frame: Frame::single(1, 0, 0), subspace: Subspace::zero(0) };
        assert_eq!(c.hom_dimension(1, &m1, &m2).unwrap() as i64, inst.invariants.r, "{name}");
    }
    for name in ["n12_r1_q3", "n22_r2_q3", "n22_r2_m2_q3"] {
        let inst = load(name);
        let rep = counter(&inst).hom_samples(1, 20, 11).unwrap();
        assert!(rep.holds(), "{name}: {rep:?}");
    }
}

#[test]
fn polynomial_probe_on_unitary_counts() {
    let inst = load("u11_r2_q3");
    let c = counter(&inst);
    let pts: Vec<(u64, u128)> = [1, 2, 3]
        .iter()
        .map(|&e| {
            let d = c.count_x_models(e).unwrap();
            (d.big_q, d.x as u128)
        })
        .collect();
    let fit = polynomiality_probe(&pts, Some(2)).unwrap();
    assert_eq!(fit.display, "Q^2 + Q + 1");
    assert_eq!(fit.verdict, Verdict::Consistent);
    let inst = load("u11_r1_q3");
    let c = counter(&inst);
    let pts: Vec<(u64, u128)> = [1, 2, 3]
        .iter()
        .map(|&e| {
            let d = c.count_x_models(e).unwrap();
            (d.big_q, d.x as u128)
        })
        .collect();
    let fit = polynomiality_probe(&pts, Some(1)).unwrap();
    assert_eq!((fit.display.as_str(), fit.verdict), ("Q + 1", Verdict::Confirmed));
}

#[test]
fn invariant_suite_has_no_violations() {
    for name in ["u11_r1_q3", "u11_r2_q3", "n12_r1_q3", "n12_r0_m2_q3", "n22_r2_q3"] {
        let inst = load(name);
        let c = counter(&inst);
        for e in [1, 2] {
            let rep = c.invariant_suite(e).unwrap();
            assert!(rep.violations.is_empty(), "{name} e={e}: {:?}", rep.violations);
            assert!(rep.checks > 0);
        }
    }
}

#[test]
fn random_instances_satisfy_the_identity() {
    let mut seen = 0;
    for degrees in [[1, 1], [1, 2], [2, 2]] {
        for (seed, inst) in random_instances(3, degrees, 3, 2024, 2, 2) {
            let a = counter(&inst);
            let b = Counter::new(&inst, Arc::new(BruteForce::default()), Arc::new(LagrangianBfs::default()), 1 << 22);
            let d = a.count_x_models(1).unwrap();
            assert_eq!(d.residual, 0, "seed {seed}");
            // brute force is the oracle where the windows are tiny
            let (x, xp) = fundamental_domains(&inst.invariants);
            let lvl = a.level(2).unwrap();
            for dom in [x, xp] {
                if let Some((w, _)) = a.domain_model(&lvl, &dom).unwrap() {
                    if w.dim() <= 6 {
                        assert_eq!(a.domain_points(1, &dom).unwrap(), b.domain_points(1, &dom).unwrap());
                    }
                }
            }
            seen += 1;
        }
    }
    assert!(seen >= 5);
}

#[test]
fn alpha_choice_does_not_change_counts() {
    // α⁺_1 = −1 instead of 1, α⁻_2 = π(1 + t) instead of π
    let mut spec = fixture("u11_r2_q3").unwrap();
    spec.alpha.plus[0] = Some(SeriesLit { terms: vec![(0, vec![2])], precision: None });
    spec.alpha.minus[1] = Some(SeriesLit { terms: vec![(1, vec![1]), (2, vec![1])], precision: None });
    let other = Instance::load(&spec, LoadOptions::default()).unwrap();
    let base = load("u11_r2_q3");
    for f in [1, 2, 3] {
        let a = counter(&base).orbital_integrals(f).unwrap();
        let b = counter(&other).orbital_integrals(f).unwrap();
        assert_eq!((a.plus, a.minus), (b.plus, b.minus), "f={f}");
    }
}

#[test]
fn registry_resolves_names() {
    let reg = Registry::default();
    assert_eq!(reg.enumerator("brute-force").unwrap().name(), "brute-force");
    assert_eq!(reg.fixed_points("enumerate-filter").unwrap().name(), "enumerate-filter");
    assert!(reg.enumerator("nope").is_err());
    let inst = load("u11_r1_q3");
    let c = Counter::from_registry(&inst, &reg, "closure-bfs", "lagrangian-bfs", 1000).unwrap();
    assert_eq!(c.count_x_models(1).unwrap().x, 10);
}

#[test]
fn cap_is_reported() {
    let inst = load("u11_r2_q3");
    let c = Counter::new(&inst, Arc::new(ClosureBfs::default()), Arc::new(LagrangianBfs::default()), 20);
    assert!(matches!(c.count_x_models(1), Err(latorb::Error::CapExceeded(_))));
}

#[test]
fn report_round_trips_as_json() {
    let inst = load("u11_r1_q3");
    let c = counter(&inst);
    let plan = RunPlan { es: vec![1, 2], fs: vec![1, 2], strata: true, hom_samples: Some(3), poly: true, suite: false, seed: 5 };
    let rep = c.run(&plan).unwrap();
    assert!(rep.asserted_ok());
    let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    assert_eq!(v["degrees"][1]["x"], 82);
    assert_eq!(v["orbital"][0]["o_kappa"], -3);
    assert!(rep.table().contains("PASS"));
    // deterministic for a fixed seed
    assert_eq!(rep.to_json(), counter(&inst).run(&plan).unwrap().to_json());
}

#[test]
fn y_windows_are_dual_compatible() {
    let inst = load("golden_q5");
    let c = counter(&inst);
    let lvl = c.level(2).unwrap();
    let w: WindowModel = c.y_model(&lvl, 1).unwrap();
    assert!(w.frame.is_self_dual(0));
    let frob = SemilinearFrobenius::new(&w, &inst.hermitian, Parity::Plus, &lvl.emb, inst.q()).unwrap();
    for p in c.y_points(1, 1).unwrap().iter() {
        assert_eq!(frob.dual(&frob.dual(&p.subspace)), p.subspace);
    }
}
