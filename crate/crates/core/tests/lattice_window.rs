use std::sync::Arc;

use latorb::finite_fields::{Fe, Gf};
use latorb::lattice_window::window::{projection_part, intersection_part};
use latorb::lattice_window::{
    strata_invariants, transfer, BruteForce, ClosureBfs, FactorAction, FactorWindow, Frame, Query, Subspace,
    SubspaceEnumerator, WindowModel,
};
use latorb::series::Series;
use proptest::prelude::*;

fn action(f: &Gf, t: &[(i64, Fe)], g: &[(i64, Fe)]) -> FactorAction {
    FactorAction { t_pi: Series::from_terms(f, t, 40), gamma: Series::from_terms(f, g, 40) }
}

fn model(f: Arc<Gf>, frame: Frame, a: [&FactorAction; 2]) -> WindowModel {
    WindowModel::build(f, frame, 0, a).unwrap()
}

#[test]
fn single_cell_has_two_subspaces() {
    let f = Arc::new(Gf::new(3, 1).unwrap());
    let a = action(&f, &[(1, Fe::ONE)], &[(0, Fe::ONE)]);
    let w = model(f, Frame::single(0, 0, 1), [&a, &a]);
    let all = ClosureBfs::default().enumerate(&w, &Query::all(100)).unwrap();
    assert_eq!(all.len(), 2);
}

#[test]
fn uniserial_window_has_only_ideals() {
    // k[π]/π^3 with ν = π: the ideals (π^j)
    let f = Arc::new(Gf::new(3, 2).unwrap());
    let a = action(&f, &[(1, Fe::ONE)], &[(0, Fe::ONE)]);
    let w = model(f, Frame::single(0, 0, 3), [&a, &a]);
    let all = ClosureBfs::default().enumerate(&w, &Query::all(100)).unwrap();
    assert_eq!(all.len(), 4);
}

#[test]
fn zero_operators_give_every_subspace() {
    // ν = 0 and u = 1 on a height-2 window over GF(3): 1 + 4 + 1 subspaces
    let f = Arc::new(Gf::new(3, 1).unwrap());
    let a = action(&f, &[(2, Fe::ONE)], &[(0, Fe::ONE)]);
    let w = model(f, Frame::single(0, 0, 2), [&a, &a]);
    let all = ClosureBfs::default().enumerate(&w, &Query::all(100)).unwrap();
    assert_eq!(all.len(), 6);
    let lines = ClosureBfs::default()
        .enumerate(&w, &Query { dim: Some(1), ..Query::all(100) })
        .unwrap();
    assert_eq!(lines.len(), 4);
}

#[test]
fn reference_and_product_lattices_have_expected_strata() {
    let f = Gf::new(3, 1).unwrap();
    let frame = Frame::bounded_model([2, 2], [-1, -1], 0);
    let n = frame.dim();
    let span = |shift: [i64; 2]| {
        let mut s = Subspace::zero(n);
        for i in 0..2 {
            for e in shift[i]..frame.0[i].hi {
                let mut v = vec![Fe::ZERO; n];
                v[frame.index(i, e).unwrap()] = Fe::ONE;
                s.insert_in_place(&f, &v);
            }
        }
        s
    };
    let st = strata_invariants(&f, &frame, &span([0, 0]));
    assert_eq!((st.ind, st.b1, st.c1, st.b2, st.c2), (0, 0, 0, 0, 0));
    // π1^{-1}O ⊕ π2 O
    let st = strata_invariants(&f, &frame, &span([-1, 1]));
    assert_eq!((st.ind, st.b1, st.c1, st.b2, st.c2), (0, 1, 1, -1, -1));
}

#[test]
fn transfer_shifts_and_round_trips() {
    let f = Gf::new(5, 1).unwrap();
    let from = Frame::new(FactorWindow::new(-2, 2), FactorWindow::new(-1, 3));
    let to = Frame::new(FactorWindow::new(-3, 4), FactorWindow::new(-3, 4));
    let n = from.dim();
    let mut s = Subspace::zero(n);
    let mut v = vec![Fe::ZERO; n];
    v[from.index(0, -1).unwrap()] = Fe::ONE;
    v[from.index(1, 0).unwrap()] = Fe(2);
    s.insert_in_place(&f, &v);
    for e in 1..2 {
        let mut w = vec![Fe::ZERO; n];
        w[from.index(0, e).unwrap()] = Fe::ONE;
        s.insert_in_place(&f, &w);
    }
    for e in 1..3 {
        let mut w = vec![Fe::ZERO; n];
        w[from.index(1, e).unwrap()] = Fe::ONE;
        s.insert_in_place(&f, &w);
    }
    let moved = transfer(&f, &from, &s, [1, -1], &to).unwrap();
    let back = transfer(&f, &to, &moved, [-1, 1], &from).unwrap();
    assert_eq!(back, s);
    let before = strata_invariants(&f, &from, &s);
    let after = strata_invariants(&f, &to, &moved);
    assert_eq!(after.ind, before.ind);
    assert_eq!(after.b1, before.b1 - 1);
    assert_eq!(after.b2, before.b2 + 1);
    // leaving the window is an error
    assert!(transfer(&f, &from, &s, [-5, 0], &to).is_err());
}

fn random_series(f: &Gf, val: i64, coeffs: &[u32]) -> Vec<(i64, Fe)> {
    let q = f.size();
    let mut out = vec![(val, Fe(1 + coeffs[0] % (q - 1)))];
    for (k, &c) in coeffs[1..].iter().enumerate() {
        out.push((val + 1 + k as i64, Fe(c % q)));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bfs_agrees_with_brute_force(
        qdeg in 1u32..=2,
        n1 in 1i64..=2, n2 in 1i64..=2,
        lo in prop::array::uniform2(-2i64..=0),
        width in prop::array::uniform2(0i64..=3),
        tc in prop::collection::vec(0u32..9, 4),
        gc in prop::collection::vec(0u32..9, 4),
        gc2 in prop::collection::vec(0u32..9, 4),
    ) {
        let f = Arc::new(Gf::new(3, qdeg).unwrap());
        let frame = Frame::new(
            FactorWindow::new(lo[0], lo[0] + width[0]),
            FactorWindow::new(lo[1], lo[1] + width[1]),
        );
        prop_assume!(frame.dim() <= if qdeg == 1 { 6 } else { 4 });
        let a1 = FactorAction {
            t_pi: Series::from_terms(&f, &random_series(&f, n1, &tc), 40),
            gamma: Series::from_terms(&f, &random_series(&f, 0, &gc), 40),
        };
        let a2 = FactorAction {
            t_pi: Series::from_terms(&f, &random_series(&f, n2, &tc[1..]), 40),
            gamma: Series::from_terms(&f, &random_series(&f, 0, &gc2), 40),
        };
        let w = WindowModel::build(f.clone(), frame, 0, [&a1, &a2]).unwrap();
        prop_assert!(w.operators_consistent());
        let q = Query::all(1 << 20);
        let bfs = ClosureBfs::default().enumerate(&w, &q).unwrap();
        let brute = BruteForce::default().enumerate(&w, &q).unwrap();
        prop_assert_eq!(&bfs, &brute);
        for p in &bfs {
            prop_assert!(w.is_stable(&p.subspace));
            let st = p.strata;
            // B_i ⊂ C_i and dim L = dim B_i + dim C_j
            prop_assert!(st.b1 <= st.c1 && st.b2 <= st.c2);
            prop_assert_eq!(st.b1 + st.c2, st.ind);
            prop_assert_eq!(st.b2 + st.c1, st.ind);
            let (_, b1) = intersection_part(&f, &frame, &p.subspace, 0);
            let (_, c1) = projection_part(&f, &frame, &p.subspace, 0);
            prop_assert!(b1.is_subspace_of(&f, &c1));
            prop_assert_eq!(b1.dim() as i64 - frame.0[0].hi, st.b1);
        }
        // a pruned query returns exactly the filtered full list
        if let Some(d) = frame.dim_for_index(0) {
            let pq = Query { dim: Some(d), min_b: [Some(0), None], exact_b: [None, Some(0)], cap: 1 << 20 };
            let pruned = ClosureBfs::default().enumerate(&w, &pq).unwrap();
            let filtered: Vec<_> = bfs.iter().filter(|p| pq.accepts(&p.strata, p.subspace.dim())).cloned().collect();
            prop_assert_eq!(pruned, filtered);
        }
    }
}

#[test]
fn cap_is_enforced() {
    let f = Arc::new(Gf::new(3, 1).unwrap());
    let a = action(&f, &[(4, Fe::ONE)], &[(0, Fe::ONE)]);
    let w = model(f, Frame::single(0, 0, 4), [&a, &a]);
    let err = ClosureBfs::default().enumerate(&w, &Query::all(10)).unwrap_err();
    assert!(matches!(err, latorb::Error::CapExceeded(_)));
}
