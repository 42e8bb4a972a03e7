//! Finite windows π1^lo1 O ⊕ π2^lo2 O over π1^hi1 O ⊕ π2^hi2 O carrying the
//! actions of ν = ϖ_F and u = (γ1, γ2), and lattice points inside them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::subspace::Subspace;
use crate::error::{Error, Result};
use crate::finite_fields::{Fe, Gf};
use crate::linalg::Mat;
use crate::series::Series;

/// Exponent range [lo, hi) of one factor: the window is π^lo O / π^hi O.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorWindow {
    pub lo: i64,
    pub hi: i64,
}

impl FactorWindow {
    pub fn new(lo: i64, hi: i64) -> FactorWindow {
        FactorWindow { lo, hi }
    }

    pub fn empty() -> FactorWindow {
        FactorWindow { lo: 0, hi: 0 }
    }

    pub fn dim(&self) -> usize {
        (self.hi - self.lo).max(0) as usize
    }
}

/// Exponent bounds of both factors. Basis order is factor 1 then factor 2,
/// each by descending exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Frame(pub [FactorWindow; 2]);

impl Frame {
    pub fn new(f1: FactorWindow, f2: FactorWindow) -> Frame {
        Frame([f1, f2])
    }

    /// Window of X^±[μ1, μ2] for conductors m and parity δ.
    pub fn bounded_model(m: [i64; 2], mu: [i64; 2], delta: i64) -> Frame {
        Frame([
            FactorWindow::new(mu[1] - m[0] - delta, m[0] - mu[0]),
            FactorWindow::new(mu[0] - m[1] - delta, m[1] - mu[1]),
        ])
    }

    /// π_i^{-m}O / π_i^{m}O on factor i alone.
    pub fn single(i: usize, lo: i64, hi: i64) -> Frame {
        let mut w = [FactorWindow::empty(), FactorWindow::empty()];
        w[i] = FactorWindow::new(lo, hi);
        Frame(w)
    }

    pub fn dim(&self) -> usize {
        self.0[0].dim() + self.0[1].dim()
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|w| w.hi >= w.lo)
    }

    pub fn offset(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.0[0].dim()
        }
    }

    /// Basis index of π_i^e.
    pub fn index(&self, i: usize, e: i64) -> Option<usize> {
        let w = self.0[i];
        if e < w.lo || e >= w.hi {
            None
        } else {
            Some(self.offset(i) + (w.hi - 1 - e) as usize)
        }
    }

    /// (factor, exponent) of a basis index.
    pub fn tag(&self, idx: usize) -> (usize, i64) {
        let d1 = self.0[0].dim();
        if idx < d1 {
            (0, self.0[0].hi - 1 - idx as i64)
        } else {
            (1, self.0[1].hi - 1 - (idx - d1) as i64)
        }
    }

    /// dim of the image of O ⊕ O: subspace dimension minus this is the index.
    pub fn ref_index_offset(&self) -> i64 {
        self.0[0].hi + self.0[1].hi
    }

    /// Dimension a lattice of index `ind` occupies.
    pub fn dim_for_index(&self, ind: i64) -> Option<usize> {
        let d = ind + self.ref_index_offset();
        if d < 0 || d as usize > self.dim() {
            None
        } else {
            Some(d as usize)
        }
    }

    /// Dual-compatible: lo_i = −hi_i − δ on each factor.
    pub fn is_self_dual(&self, delta: i64) -> bool {
        self.0.iter().all(|w| w.lo == -w.hi - delta || (w.lo == 0 && w.hi == 0 && delta == 0))
    }
}

/// Strata data of a lattice: ind and (b_i, c_i) from B_i = L ∩ E'_i and
/// C_i = pr_i(L).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Strata {
    pub ind: i64,
    pub b1: i64,
    pub c1: i64,
    pub b2: i64,
    pub c2: i64,
}

impl Strata {
    pub fn b(&self, i: usize) -> i64 {
        if i == 0 {
            self.b1
        } else {
            self.b2
        }
    }

    pub fn c(&self, i: usize) -> i64 {
        if i == 0 {
            self.c1
        } else {
            self.c2
        }
    }
}

/// A stable subspace of a window with its invariants.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub subspace: Subspace,
    pub strata: Strata,
}

impl LatticePoint {
    pub fn new(f: &Gf, frame: &Frame, subspace: Subspace) -> LatticePoint {
        let strata = strata_invariants(f, frame, &subspace);
        LatticePoint { subspace, strata }
    }

    pub fn index(&self) -> i64 {
        self.strata.ind
    }
}

/// (ind, b1, c1, b2, c2) of the lattice a subspace represents.
pub fn strata_invariants(f: &Gf, frame: &Frame, s: &Subspace) -> Strata {
    let d1 = frame.0[0].dim();
    let n = frame.dim();
    let dim = s.dim() as i64;
    let inter2 = s.rows().filter(|r| r[..d1].iter().all(|x| x.is_zero())).count() as i64;
    let proj1 = dim - inter2;
    let proj2 = s.rank_on_columns(f, d1..n) as i64;
    let inter1 = dim - proj2;
    let (h1, h2) = (frame.0[0].hi, frame.0[1].hi);
    Strata {
        ind: dim - h1 - h2,
        b1: inter1 - h1,
        c1: proj1 - h1,
        b2: inter2 - h2,
        c2: proj2 - h2,
    }
}

/// Per-factor data: t(π_i) and γ_i, already embedded in the working field.
#[derive(Clone, Debug)]
pub struct FactorAction {
    pub t_pi: Series,
    pub gamma: Series,
}

/// A window over a finite field K with the commuting operators ν and u.
#[derive(Clone, Debug)]
pub struct WindowModel {
    pub field: Arc<Gf>,
    pub frame: Frame,
    /// Parity δ (index of the target lattices for X^± models; 0 for Y).
    pub delta: i64,
    pub nu: Mat,
    pub u: Mat,
    /// Multiplication by π_i on factor i, zero on the other factor.
    pub pi: [Mat; 2],
    /// Distinct eigenvalues of u.
    pub eigenvalues: Vec<Fe>,
}

/// Matrix of multiplication by x (valuation ≥ 0) on factor i of a frame,
/// written into `m`.
fn fill_factor(m: &mut Mat, frame: &Frame, i: usize, x: &Series, what: &str) -> Result<()> {
    let w = frame.0[i];
    let width = w.hi - w.lo;
    if width <= 0 {
        return Ok(());
    }
    if x.val_bound() < 0 {
        return Err(Error::Window(format!("{what} is not integral")));
    }
    if x.precision() < width {
        return Err(Error::Window(format!(
            "precision of {what} ({}) is insufficient for a window of height {width}",
            x.precision()
        )));
    }
    for e in w.lo..w.hi {
        let col = frame.index(i, e).unwrap();
        for k in 0..(w.hi - e) {
            let c = x.c(k);
            if !c.is_zero() {
                let row = frame.index(i, e + k).unwrap();
                m.set(row, col, c);
            }
        }
    }
    Ok(())
}

/// Matrix of multiplication by an integral series on factor i of a frame.
pub fn factor_multiplication(frame: &Frame, i: usize, x: &Series, what: &str) -> Result<Mat> {
    let mut m = Mat::zero(frame.dim());
    fill_factor(&mut m, frame, i, x, what)?;
    Ok(m)
}

impl WindowModel {
    /// Builds ν, u and π_i on the frame from series over K.
    pub fn build(field: Arc<Gf>, frame: Frame, delta: i64, actions: [&FactorAction; 2]) -> Result<WindowModel> {
        if !frame.is_valid() {
            return Err(Error::Window(format!("empty window {frame:?}")));
        }
        let n = frame.dim();
        let mut nu = Mat::zero(n);
        let mut u = Mat::zero(n);
        let mut pi = [Mat::zero(n), Mat::zero(n)];
        let mut eigen = Vec::new();
        for i in 0..2 {
            if frame.0[i].dim() == 0 {
                continue;
            }
            fill_factor(&mut nu, &frame, i, &actions[i].t_pi, "ϖ_F")?;
            fill_factor(&mut u, &frame, i, &actions[i].gamma, "γ")?;
            fill_factor(&mut pi[i], &frame, i, &Series::monomial(Fe::ONE, 1), "ϖ_E")?;
            let a = actions[i].gamma.c(0);
            if !eigen.contains(&a) {
                eigen.push(a);
            }
        }
        eigen.sort();
        Ok(WindowModel { field, frame, delta, nu, u, pi, eigenvalues: eigen })
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn f(&self) -> &Gf {
        &self.field
    }

    pub fn is_stable(&self, s: &Subspace) -> bool {
        s.is_stable(&self.field, &self.nu) && s.is_stable(&self.field, &self.u)
    }

    pub fn point(&self, s: Subspace) -> LatticePoint {
        LatticePoint::new(&self.field, &self.frame, s)
    }

    /// Target dimension of lattices of index δ.
    pub fn target_dim(&self) -> Option<usize> {
        self.frame.dim_for_index(self.delta)
    }

    /// Operator invariants: ν nilpotent, u invertible, νu = uν.
    pub fn operators_consistent(&self) -> bool {
        let f = &*self.field;
        self.nu.is_nilpotent(f)
            && self.u.rank(f) == self.dim()
            && self.nu.mul(f, &self.u) == self.u.mul(f, &self.nu)
    }
}

/// Image of the lattice represented by `s` in `from` under
/// (π1^{s1} ⊕ π2^{s2}), re-expressed in the frame `to`.
pub fn transfer(f: &Gf, from: &Frame, s: &Subspace, shift: [i64; 2], to: &Frame) -> Result<Subspace> {
    let amb = Frame([0, 1].map(|i| {
        FactorWindow::new(
            (from.0[i].lo + shift[i]).min(to.0[i].lo),
            (from.0[i].hi + shift[i]).max(to.0[i].hi),
        )
    }));
    let an = amb.dim();
    let mut span = Subspace::zero(an);
    for r in s.rows() {
        let mut v = vec![Fe::ZERO; an];
        for (idx, &c) in r.iter().enumerate() {
            if !c.is_zero() {
                let (i, e) = from.tag(idx);
                v[amb.index(i, e + shift[i]).unwrap()] = c;
            }
        }
        span.insert_in_place(f, &v);
    }
    for i in 0..2 {
        for e in (from.0[i].hi + shift[i])..amb.0[i].hi {
            let mut v = vec![Fe::ZERO; an];
            v[amb.index(i, e).unwrap()] = Fe::ONE;
            span.insert_in_place(f, &v);
        }
    }
    for r in span.rows() {
        for (idx, &c) in r.iter().enumerate() {
            let (i, e) = amb.tag(idx);
            if !c.is_zero() && e < to.0[i].lo {
                return Err(Error::Window(format!(
                    "image leaves the window: exponent {e} on factor {} is below {}",
                    i + 1,
                    to.0[i].lo
                )));
            }
        }
    }
    for i in 0..2 {
        for e in to.0[i].hi..amb.0[i].hi {
            let mut v = vec![Fe::ZERO; an];
            v[amb.index(i, e).unwrap()] = Fe::ONE;
            if !span.contains(f, &v) {
                return Err(Error::Window(format!(
                    "image does not contain ϖ^{e} on factor {}: window bottom too low",
                    i + 1
                )));
            }
        }
    }
    let tn = to.dim();
    let mut out = Subspace::zero(tn);
    for r in span.rows() {
        let mut v = vec![Fe::ZERO; tn];
        for (idx, &c) in r.iter().enumerate() {
            if !c.is_zero() {
                let (i, e) = amb.tag(idx);
                if let Some(j) = to.index(i, e) {
                    v[j] = c;
                }
            }
        }
        out.insert_in_place(f, &v);
    }
    Ok(out)
}

/// B_i = L ∩ E'_i as a subspace of the single-factor frame of factor i.
pub fn intersection_part(f: &Gf, frame: &Frame, s: &Subspace, i: usize) -> (Frame, Subspace) {
    let single = Frame::single(i, frame.0[i].lo, frame.0[i].hi);
    let d1 = frame.0[0].dim();
    let n = frame.dim();
    let other = if i == 0 { d1..n } else { 0..d1 };
    let own = if i == 0 { 0..d1 } else { d1..n };
    // kernel of the projection to the other factor, restricted to S
    let k = s.dim();
    let rows: Vec<&[Fe]> = s.rows().collect();
    let mut constraints: Vec<Vec<Fe>> = Vec::new();
    for c in other.clone() {
        constraints.push(rows.iter().map(|r| r[c]).collect());
    }
    let combos = crate::linalg::nullspace(f, &constraints, k);
    let mut out = Subspace::zero(single.dim());
    for coef in combos {
        let mut v = vec![Fe::ZERO; own.len()];
        for (r, &a) in rows.iter().zip(&coef) {
            if a.is_zero() {
                continue;
            }
            for (x, &y) in v.iter_mut().zip(&r[own.clone()]) {
                *x = f.add(*x, f.mul(a, y));
            }
        }
        out.insert_in_place(f, &v);
    }
    (single, out)
}

/// C_i = pr_i(L) as a subspace of the single-factor frame of factor i.
pub fn projection_part(f: &Gf, frame: &Frame, s: &Subspace, i: usize) -> (Frame, Subspace) {
    let single = Frame::single(i, frame.0[i].lo, frame.0[i].hi);
    let d1 = frame.0[0].dim();
    let n = frame.dim();
    let own = if i == 0 { 0..d1 } else { d1..n };
    let mut out = Subspace::zero(single.dim());
    for r in s.rows() {
        out.insert_in_place(f, &r[own.clone()]);
    }
    (single, out)
}

/// Sandwich π^{m−ind}O ⊂ L ⊂ π^{−m−ind}O for a single-factor lattice.
pub fn sandwich_holds(frame: &Frame, i: usize, s: &Subspace, m: i64, f: &Gf) -> bool {
    let w = frame.0[i];
    let ind = s.dim() as i64 - w.hi;
    let n = frame.dim();
    for e in (m - ind).max(w.lo)..w.hi {
        let mut v = vec![Fe::ZERO; n];
        v[frame.index(i, e).unwrap()] = Fe::ONE;
        if !s.contains(f, &v) {
            return false;
        }
    }
    if m - ind < w.lo {
        // π^{m−ind}O is not even inside the window's upper lattice
        return false;
    }
    s.rows().all(|r| {
        r.iter().enumerate().all(|(idx, c)| {
            let (_, e) = frame.tag(idx);
            c.is_zero() || e >= -m - ind
        })
    })
}

/// N^{m+j}(D) ⊂ D for all j ≥ 0, with N nilpotent.
pub fn check_z_membership(f: &Gf, d: &Subspace, n_mat: &Mat, m: usize) -> bool {
    let mut p = Mat::identity(n_mat.n);
    for _ in 0..m {
        p = p.mul(f, n_mat);
    }
    for _ in 0..=n_mat.n {
        if !d.is_stable(f, &p) {
            return false;
        }
        p = p.mul(f, n_mat);
    }
    true
}

/// The dichotomies for subspaces stable under N^{m+j} (j ≥ 0) with N
/// regular nilpotent: for each ℓ ≥ 1, either D ⊂ Im N^ℓ or
/// D ⊃ Im N^{m+ℓ−1}; and either D ⊃ Ker N^ℓ or D ⊂ Ker N^{m+ℓ−1}.
pub fn nilpotent_dichotomy_holds(f: &Gf, d: &Subspace, n_mat: &Mat, m: usize) -> bool {
    let e = n_mat.n;
    let pow = |k: usize| {
        let mut p = Mat::identity(e);
        for _ in 0..k {
            p = p.mul(f, n_mat);
        }
        p
    };
    let image = |k: usize| Subspace::full(e).image(f, &pow(k));
    let kernel = |k: usize| {
        let p = pow(k);
        let rows: Vec<Vec<Fe>> = (0..e).map(|i| (0..e).map(|j| p.get(i, j)).collect()).collect();
        let ns = crate::linalg::nullspace(f, &rows, e);
        Subspace::from_rows(f, e, ns.iter().map(|v| v.as_slice()))
    };
    for l in 1..=e {
        if !d.is_subspace_of(f, &image(l)) && !image(m + l - 1).is_subspace_of(f, d) {
            return false;
        }
        if !kernel(l).is_subspace_of(f, d) && !d.is_subspace_of(f, &kernel(m + l - 1)) {
            return false;
        }
    }
    true
}

/// One dump line: echelon rows as coefficient tuples, then ind b1 c1 b2 c2.
pub fn dump_line(p: &LatticePoint) -> String {
    let rows: Vec<String> = p
        .subspace
        .rows()
        .map(|r| {
            let xs: Vec<String> = r.iter().map(|x| x.0.to_string()).collect();
            format!("({})", xs.join(" "))
        })
        .collect();
    let s = p.strata;
    format!("[{}] {} {} {} {} {}", rows.join(" "), s.ind, s.b1, s.c1, s.b2, s.c2)
}
