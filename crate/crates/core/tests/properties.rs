use std::sync::Arc;

use latorb::counting::Counter;
use latorb::hermitian_duality::LagrangianBfs;
use latorb::instance::random_instances;
use latorb::lattice_window::ClosureBfs;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn generated_instances_keep_every_invariant(seed in any::<u64>(), n1 in 1usize..=2, n2 in 1usize..=2) {
        let insts = random_instances(3, [n1, n2], 1, seed, 2, 2);
        prop_assert_eq!(insts.len(), 1);
        for (s, inst) in insts {
            let rt = &inst.routes;
            prop_assert!(rt.r_agrees() && rt.m_agrees() && rt.delta_agrees(), "routes disagree at {s}");
            let c = Counter::new(&inst, Arc::new(ClosureBfs::default()), Arc::new(LagrangianBfs::default()), 1 << 20);
            let d = c.count_x_models(1).unwrap();
            prop_assert_eq!(d.residual, 0);
            let suite = c.invariant_suite(1).unwrap();
            prop_assert!(suite.violations.is_empty(), "{:?}", suite.violations);
            prop_assert!(c.strata_report(1).unwrap().holds());
        }
    }
}
