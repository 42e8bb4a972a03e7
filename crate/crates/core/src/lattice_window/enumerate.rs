//! Enumeration of ν- and u-stable subspaces of a window.

use rayon::prelude::*;
use rustc_hash::FxHashSet;

use super::subspace::Subspace;
use super::window::{strata_invariants, Frame, LatticePoint, Strata, WindowModel};
use crate::error::{Error, Result};
use crate::finite_fields::{Fe, Gf};
use crate::linalg::nullspace;

/// Default ceiling on the number of stable subspaces visited.
pub const DEFAULT_CAP: usize = 1 << 22;

/// Which stable subspaces to report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    /// Only subspaces of this dimension (None: all dimensions).
    pub dim: Option<usize>,
    /// b_i ≥ bound.
    pub min_b: [Option<i64>; 2],
    /// b_i = value.
    pub exact_b: [Option<i64>; 2],
    pub cap: usize,
}

/// Monotone bounds: every stable subspace of an accepted one satisfies them.
#[derive(Clone, Copy, Debug)]
struct Limits {
    max_dim: usize,
    max_inter: [usize; 2],
    max_proj: [usize; 2],
    empty: bool,
}

impl Query {
    pub fn all(cap: usize) -> Query {
        Query { dim: None, min_b: [None; 2], exact_b: [None; 2], cap }
    }

    /// Lattices of index δ with b_i ≥ μ_i.
    pub fn bounded_model(w: &WindowModel, mu: [i64; 2], cap: usize) -> Result<Query> {
        let dim = w
            .target_dim()
            .ok_or_else(|| Error::Window("window cannot hold lattices of the target index".into()))?;
        Ok(Query { dim: Some(dim), min_b: [Some(mu[0]), Some(mu[1])], exact_b: [None; 2], cap })
    }

    /// Lattices of index δ with b_i = j.
    pub fn stratum(w: &WindowModel, i: usize, j: i64, cap: usize) -> Result<Query> {
        let dim = w
            .target_dim()
            .ok_or_else(|| Error::Window("window cannot hold lattices of the target index".into()))?;
        let mut exact_b = [None; 2];
        exact_b[i] = Some(j);
        Ok(Query { dim: Some(dim), min_b: [None; 2], exact_b, cap })
    }

    pub fn accepts(&self, st: &Strata, dim: usize) -> bool {
        if self.dim.is_some_and(|d| d != dim) {
            return false;
        }
        (0..2).all(|i| {
            self.min_b[i].map_or(true, |m| st.b(i) >= m) && self.exact_b[i].map_or(true, |j| st.b(i) == j)
        })
    }

    fn limits(&self, frame: &Frame) -> Limits {
        let n = frame.dim();
        let mut lim = Limits { max_dim: self.dim.unwrap_or(n), max_inter: [n; 2], max_proj: [n; 2], empty: false };
        let Some(d) = self.dim else { return lim };
        let d = d as i64;
        for i in 0..2 {
            let hi = frame.0[i].hi;
            if let Some(b) = self.exact_b[i].or(self.min_b[i]) {
                // dim(L ∩ W_i) ≥ hi_i + b bounds pr_other of every sublattice
                let room = d - hi - b;
                if room < 0 {
                    lim.empty = true;
                } else {
                    lim.max_proj[1 - i] = lim.max_proj[1 - i].min(room as usize);
                }
            }
            if let Some(j) = self.exact_b[i] {
                let room = hi + j;
                if room < 0 {
                    lim.empty = true;
                } else {
                    lim.max_inter[i] = lim.max_inter[i].min(room as usize);
                }
            }
        }
        lim
    }
}

impl Limits {
    fn admits(&self, f: &Gf, frame: &Frame, s: &Subspace) -> bool {
        if s.dim() > self.max_dim {
            return false;
        }
        let st = strata_invariants(f, frame, s);
        let h = [frame.0[0].hi, frame.0[1].hi];
        (0..2).all(|i| {
            let inter = (st.b(i) + h[i]) as usize;
            let proj = (st.c(i) + h[i]) as usize;
            inter <= self.max_inter[i] && proj <= self.max_proj[i]
        })
    }
}

/// Extra conditions on the line added at each BFS step (used for the
/// isotropic search of Frobenius fixed points).
pub trait ChildFilter: Sync {
    /// Linear functionals (full-length rows) every new vector must kill.
    fn constraints(&self, s: &Subspace) -> Vec<Vec<Fe>>;
    /// Final test on a candidate vector.
    fn accept(&self, s: &Subspace, v: &[Fe]) -> bool;
}

/// An algorithm producing all stable subspaces matching a query, sorted.
pub trait SubspaceEnumerator: Send + Sync {
    fn name(&self) -> &'static str;
    fn enumerate(&self, w: &WindowModel, q: &Query) -> Result<Vec<LatticePoint>>;
}

/// Layered search over the submodule lattice: the children of a stable S
/// are S + Kv for v spanning a line in the socle of W/S.
#[derive(Clone, Debug, Default)]
pub struct ClosureBfs {
    pub threads: Option<usize>,
}

impl SubspaceEnumerator for ClosureBfs {
    fn name(&self) -> &'static str {
        "closure-bfs"
    }

    fn enumerate(&self, w: &WindowModel, q: &Query) -> Result<Vec<LatticePoint>> {
        closure_bfs(w, q, None, self.threads)
    }
}

/// Runs `job` on a dedicated pool when a worker count is requested.
pub fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::Window(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

const CHUNK: usize = 2048;

pub fn closure_bfs(
    w: &WindowModel,
    q: &Query,
    filter: Option<&dyn ChildFilter>,
    threads: Option<usize>,
) -> Result<Vec<LatticePoint>> {
    with_threads(threads, || closure_bfs_inner(w, q, filter))?
}

fn closure_bfs_inner(w: &WindowModel, q: &Query, filter: Option<&dyn ChildFilter>) -> Result<Vec<LatticePoint>> {
    let f = w.f();
    let n = w.dim();
    let limits = q.limits(&w.frame);
    let mut layer = vec![Subspace::zero(n)];
    let mut out = Vec::new();
    let mut visited = 1usize;
    if limits.empty {
        return Ok(out);
    }
    for d in 0..=limits.max_dim.min(n) {
        for s in &layer {
            let st = strata_invariants(f, &w.frame, s);
            if q.accepts(&st, d) {
                out.push(LatticePoint { subspace: s.clone(), strata: st });
            }
        }
        if d == limits.max_dim || layer.is_empty() {
            break;
        }
        let mut seen: FxHashSet<Subspace> = FxHashSet::default();
        for chunk in layer.chunks(CHUNK) {
            let mut kids: Vec<Subspace> = chunk
                .par_iter()
                .flat_map_iter(|s| {
                    children(w, s, filter)
                        .into_iter()
                        .filter(|t| limits.admits(f, &w.frame, t))
                })
                .collect();
            kids.sort_unstable();
            kids.dedup();
            seen.extend(kids);
            if visited + seen.len() > q.cap {
                return Err(Error::CapExceeded(format!(
                    "more than {} stable subspaces visited (window dimension {n}, field size {})",
                    q.cap,
                    f.size()
                )));
            }
        }
        visited += seen.len();
        let mut next: Vec<Subspace> = seen.into_iter().collect();
        next.par_sort_unstable();
        layer = next;
    }
    out.sort();
    Ok(out)
}

/// All S + Kv with v spanning a line of the socle of W/S (optionally
/// restricted by a child filter).
pub fn children(w: &WindowModel, s: &Subspace, filter: Option<&dyn ChildFilter>) -> Vec<Subspace> {
    let f = w.f();
    let n = w.dim();
    let mut is_piv = vec![false; n];
    for p in s.pivots() {
        is_piv[p] = true;
    }
    let np: Vec<usize> = (0..n).filter(|&c| !is_piv[c]).collect();
    let k = np.len();
    if k == 0 {
        return Vec::new();
    }
    let reduced_cols = |m: &crate::linalg::Mat| -> Vec<Vec<Fe>> {
        np.iter()
            .map(|&c| {
                let mut v: Vec<Fe> = (0..n).map(|i| m.get(i, c)).collect();
                s.reduce(f, &mut v);
                np.iter().map(|&j| v[j]).collect()
            })
            .collect()
    };
    let nu_cols = reduced_cols(&w.nu);
    let u_cols = reduced_cols(&w.u);
    let extra: Vec<Vec<Fe>> = filter
        .map(|flt| {
            flt.constraints(s)
                .into_iter()
                .map(|r| np.iter().map(|&j| r[j]).collect())
                .collect()
        })
        .unwrap_or_default();
    let mut out = Vec::new();
    for &a in &w.eigenvalues {
        let mut rows: Vec<Vec<Fe>> = Vec::with_capacity(2 * k + extra.len());
        for i in 0..k {
            rows.push((0..k).map(|x| nu_cols[x][i]).collect());
            rows.push(
                (0..k)
                    .map(|x| if x == i { f.sub(u_cols[x][i], a) } else { u_cols[x][i] })
                    .collect(),
            );
        }
        rows.extend(extra.iter().cloned());
        let basis = nullspace(f, &rows, k);
        for_each_line(f, &basis, |coef| {
            let mut v = vec![Fe::ZERO; n];
            for (x, &j) in coef.iter().zip(&np) {
                v[j] = *x;
            }
            if filter.map_or(true, |flt| flt.accept(s, &v)) {
                out.push(s.with(f, &v));
            }
        });
    }
    out
}

/// Calls `g` once per line of span(basis), with a representative vector.
pub fn for_each_line(f: &Gf, basis: &[Vec<Fe>], mut g: impl FnMut(&[Fe])) {
    let s = basis.len();
    if s == 0 {
        return;
    }
    let len = basis[0].len();
    let qsize = f.size();
    for lead in 0..s {
        let free = s - lead - 1;
        let mut digits = vec![0u32; free];
        loop {
            let mut v = basis[lead].clone();
            for (t, &dgt) in digits.iter().enumerate() {
                if dgt != 0 {
                    let c = Fe(dgt);
                    for (x, &y) in v.iter_mut().zip(&basis[lead + 1 + t]) {
                        if !y.is_zero() {
                            *x = f.add(*x, f.mul(c, y));
                        }
                    }
                }
            }
            debug_assert_eq!(v.len(), len);
            g(&v);
            let mut pos = 0;
            loop {
                if pos == free {
                    break;
                }
                digits[pos] += 1;
                if digits[pos] < qsize {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            if pos == free {
                break;
            }
        }
    }
}

/// Scans every subspace in reduced echelon form and keeps the stable ones.
#[derive(Clone, Debug)]
pub struct BruteForce {
    pub threads: Option<usize>,
    /// Refuse to scan more candidate subspaces than this.
    pub max_candidates: u64,
}

impl Default for BruteForce {
    fn default() -> Self {
        BruteForce { threads: None, max_candidates: 2_000_000_000 }
    }
}

impl SubspaceEnumerator for BruteForce {
    fn name(&self) -> &'static str {
        "brute-force"
    }

    fn enumerate(&self, w: &WindowModel, q: &Query) -> Result<Vec<LatticePoint>> {
        let total = grassmannian_total(w.f().size() as u64, w.dim(), q.dim);
        if total > self.max_candidates as f64 {
            return Err(Error::CapExceeded(format!(
                "brute force would scan about {total:.3e} subspaces"
            )));
        }
        with_threads(self.threads, || brute_force_inner(w, q))
    }
}

fn grassmannian_total(qs: u64, n: usize, dim: Option<usize>) -> f64 {
    let qf = qs as f64;
    let gauss = |k: usize| -> f64 {
        let mut num = 1.0;
        for i in 0..k {
            num *= (qf.powi((n - i) as i32) - 1.0) / (qf.powi((i + 1) as i32) - 1.0);
        }
        num
    };
    match dim {
        Some(k) if k <= n => gauss(k),
        Some(_) => 0.0,
        None => (0..=n).map(gauss).sum(),
    }
}

fn brute_force_inner(w: &WindowModel, q: &Query) -> Vec<LatticePoint> {
    let f = w.f();
    let n = w.dim();
    let qs = f.size() as u64;
    let dims: Vec<usize> = match q.dim {
        Some(d) if d <= n => vec![d],
        Some(_) => vec![],
        None => (0..=n).collect(),
    };
    let mut out = Vec::new();
    for k in dims {
        for piv in combinations(n, k) {
            let is_piv: Vec<bool> = (0..n).map(|c| piv.contains(&c)).collect();
            let free: Vec<(usize, usize)> = piv
                .iter()
                .enumerate()
                .flat_map(|(r, &p)| ((p + 1)..n).filter(|&c| !is_piv[c]).map(move |c| (r, c)).collect::<Vec<_>>())
                .collect();
            let count = qs.pow(free.len() as u32);
            let found: Vec<LatticePoint> = (0..count)
                .into_par_iter()
                .filter_map(|mut idx| {
                    let mut data = vec![Fe::ZERO; k * n];
                    for (r, &p) in piv.iter().enumerate() {
                        data[r * n + p] = Fe::ONE;
                    }
                    for &(r, c) in &free {
                        data[r * n + c] = Fe((idx % qs) as u32);
                        idx /= qs;
                    }
                    if !rows_stable(f, &data, &piv, n, &w.nu) || !rows_stable(f, &data, &piv, n, &w.u) {
                        return None;
                    }
                    let rows: Vec<&[Fe]> = (0..k).map(|r| &data[r * n..(r + 1) * n]).collect();
                    let s = Subspace::from_rows(f, n, rows);
                    let st = strata_invariants(f, &w.frame, &s);
                    if q.accepts(&st, k) {
                        Some(LatticePoint { subspace: s, strata: st })
                    } else {
                        None
                    }
                })
                .collect();
            out.extend(found);
        }
    }
    out.sort();
    out
}

fn rows_stable(f: &Gf, data: &[Fe], piv: &[usize], n: usize, m: &crate::linalg::Mat) -> bool {
    if n == 0 {
        return true;
    }
    for r in data.chunks(n) {
        let mut v = m.apply(f, r);
        for (row, &p) in data.chunks(n).zip(piv) {
            let c = v[p];
            if !c.is_zero() {
                let nc = f.neg(c);
                for (x, &y) in v.iter_mut().zip(row) {
                    if !y.is_zero() {
                        *x = f.add(*x, f.mul(nc, y));
                    }
                }
            }
        }
        if v.iter().any(|x| !x.is_zero()) {
            return false;
        }
    }
    true
}

/// k-element subsets of 0..n in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}
