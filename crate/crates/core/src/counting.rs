//! Point counts of the lattice models, the identities relating them, and
//! the Frobenius fixed-point counts behind the orbital integrals.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite_fields::{Embedding, Fe, Gf};
use crate::hermitian_duality::{dual_via_trace, FixedPointStrategy, Parity, SemilinearFrobenius};
use crate::instance::{Instance, InstanceInvariants};
use crate::lattice_window::window::{check_z_membership, intersection_part, projection_part, sandwich_holds};
use crate::lattice_window::{
    factor_multiplication, strata_invariants, transfer, FactorAction, Frame, LatticePoint, Query, Subspace,
    SubspaceEnumerator, WindowModel,
};
use crate::linalg::{nullspace, rank, Mat, Rref};
use crate::registry::Registry;
use crate::series::Series;

/// One of the bounded models X^±[μ, μ] used as a fundamental domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Domain {
    pub parity: Parity,
    pub mu: i64,
}

impl Domain {
    pub fn frame(&self, m: [i64; 2]) -> Frame {
        Frame::bounded_model(m, [self.mu; 2], self.parity.delta())
    }

    pub fn label(&self) -> String {
        format!("X{}[{},{}]", self.parity.sign(), self.mu, self.mu)
    }
}

/// (X, X′): for r = 2r′ these are X⁺[−r′,−r′] and X⁻[1−r′,1−r′], for
/// r = 2r′+1 they are X⁻[−r′,−r′] and X⁺[−r′,−r′].
pub fn fundamental_domains(inv: &InstanceInvariants) -> (Domain, Domain) {
    let rp = inv.r_prime;
    if inv.r_even {
        (Domain { parity: Parity::Plus, mu: -rp }, Domain { parity: Parity::Minus, mu: 1 - rp })
    } else {
        (Domain { parity: Parity::Minus, mu: -rp }, Domain { parity: Parity::Plus, mu: -rp })
    }
}

/// The domains ordered by parity: [+, −].
pub fn signed_domains(inv: &InstanceInvariants) -> [Domain; 2] {
    let (x, xp) = fundamental_domains(inv);
    if x.parity == Parity::Plus {
        [x, xp]
    } else {
        [xp, x]
    }
}

/// Shifts (π1^a ⊕ π2^b) of the closed embeddings i1, i2 : X′ → X.
pub fn embedding_shifts(inv: &InstanceInvariants) -> [[i64; 2]; 2] {
    if inv.r_even {
        [[0, 1], [1, 0]]
    } else {
        [[-1, 0], [0, -1]]
    }
}

/// A lattice in one factor, as a subspace of a single-factor frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SingleLattice {
    pub factor: usize,
    pub frame: Frame,
    pub subspace: Subspace,
}

impl SingleLattice {
    /// ϖ^k M: the same coordinates on a frame moved by k.
    pub fn shifted(&self, k: i64) -> SingleLattice {
        let w = self.frame.0[self.factor];
        SingleLattice {
            factor: self.factor,
            frame: Frame::single(self.factor, w.lo + k, w.hi + k),
            subspace: self.subspace.clone(),
        }
    }

    pub fn index(&self) -> i64 {
        self.subspace.dim() as i64 - self.frame.0[self.factor].hi
    }
}

/// Working field K of degree d over k with k′ → K and the actions over K.
pub struct Level {
    pub degree: u32,
    pub field: Arc<Gf>,
    pub emb: Embedding,
    pub actions: [FactorAction; 2],
}

impl Level {
    /// |K|.
    pub fn size(&self) -> u64 {
        self.field.size() as u64
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StratumCount {
    pub i: usize,
    pub j: i64,
    pub count: u64,
}

/// Counts over k′_e.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeCounts {
    pub e: u32,
    /// Q = q′^e.
    pub big_q: u64,
    pub y: [u64; 2],
    pub x: u64,
    pub x_prime: u64,
    pub x_domain: String,
    pub x_prime_domain: String,
    /// |U_{i,j} ∩ X| (i is 1-based).
    pub strata: Vec<StratumCount>,
    /// (b1, b2) histogram of X and X′.
    pub cells: Vec<(i64, i64, u64)>,
    pub cells_prime: Vec<(i64, i64, u64)>,
    /// |X| − |X′| − q^{2er}|Y1||Y2|.
    pub residual: i128,
}

/// The rank-r bundle law on one stratum U_{i,j}.
#[derive(Clone, Debug, Serialize)]
pub struct StratumCheck {
    pub i: usize,
    pub j: i64,
    pub in_domain: u64,
    pub full: u64,
    pub expected: u128,
    pub bases: u64,
    pub fiber_min: u64,
    pub fiber_max: u64,
    pub holds: bool,
}

/// Σ_j |U_{i,j} ∩ X| against |X|, strata enumerated separately.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionCheck {
    pub i: usize,
    pub total: u64,
    pub x: u64,
    pub holds: bool,
}

/// X = i_j(X′) ⊔ U_{j,−r′}.
#[derive(Clone, Debug, Serialize)]
pub struct ComplementCheck {
    pub i: usize,
    pub x: u64,
    pub image: u64,
    pub stratum: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StrataReport {
    pub e: u32,
    pub checks: Vec<StratumCheck>,
    pub partition: Vec<PartitionCheck>,
    pub complement: Vec<ComplementCheck>,
}

impl StrataReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
            && self.partition.iter().all(|c| c.holds)
            && self.complement.iter().all(|c| c.holds)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitalReport {
    pub f: u32,
    /// |𝒳⁺(k_f)| and |𝒳⁻(k_f)|.
    pub plus: u64,
    pub minus: u64,
    pub o_kappa: i128,
    pub y: [u64; 2],
    pub so: u128,
    /// (−1)^r q^{fr} SO.
    pub expected: i128,
    pub residual: i128,
    /// Proved cases (even f, or n1 = n2 = 1); otherwise observational.
    pub asserted: bool,
}

impl OrbitalReport {
    pub fn holds(&self) -> bool {
        self.residual == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HomSample {
    pub index1: i64,
    pub index2: i64,
    pub dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomReport {
    pub e: u32,
    pub seed: u64,
    pub r: i64,
    pub samples: Vec<HomSample>,
}

impl HomReport {
    pub fn holds(&self) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|s| s.dim as i64 == self.r)
    }
}

/// Outcome of fitting counts by a polynomial in Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Fit uses fewer coefficients than points and has nonnegative
    /// integer coefficients.
    Confirmed,
    /// Exact fit with no spare point; coefficients are nonnegative integers.
    Consistent,
    /// Exact fit with no spare point whose coefficients are not all
    /// nonnegative integers; more degrees are needed to decide.
    Inconclusive,
    /// A spare point pins the fit and its coefficients are not all
    /// nonnegative integers.
    Rejected,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolyFit {
    /// Constant term first, as exact rationals "a" or "a/b".
    pub coefficients: Vec<String>,
    pub degree: usize,
    pub verdict: Verdict,
    pub display: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolyReport {
    pub es: Vec<u32>,
    pub x: PolyFit,
    pub x_prime: PolyFit,
    pub y1: PolyFit,
    pub y2: PolyFit,
}

/// Violations found by the invariant suite; empty means all held.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteReport {
    pub e: u32,
    pub lattices: usize,
    pub checks: usize,
    pub violations: Vec<String>,
}

impl SuiteReport {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.violations.len() < 50 {
            self.violations.push(what());
        }
    }
}

/// What a verification run should do.
#[derive(Clone, Debug, Default)]
pub struct RunPlan {
    pub es: Vec<u32>,
    pub fs: Vec<u32>,
    pub strata: bool,
    pub hom_samples: Option<usize>,
    pub poly: bool,
    pub suite: bool,
    pub seed: u64,
}

/// Everything a verification run produced.
#[derive(Clone, Debug, Serialize)]
pub struct CountReport {
    pub instance: String,
    pub q: u64,
    pub invariants: InstanceInvariants,
    pub enumerator: String,
    pub fixed_points: String,
    pub seed: u64,
    pub degrees: Vec<DegreeCounts>,
    pub strata: Vec<StrataReport>,
    pub orbital: Vec<OrbitalReport>,
    pub hom: Vec<HomReport>,
    pub poly: Option<PolyReport>,
    pub suite: Vec<SuiteReport>,
}

impl CountReport {
    /// True when every proved statement checked out. Observational
    /// orbital rows and the polynomial verdict do not count.
    pub fn asserted_ok(&self) -> bool {
        self.degrees.iter().all(|d| d.residual == 0)
            && self.strata.iter().all(|s| s.holds())
            && self.orbital.iter().filter(|o| o.asserted).all(|o| o.holds())
            && self.hom.iter().all(|h| h.holds())
            && self.suite.iter().all(|s| s.violations.is_empty())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text tables.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let inv = &self.invariants;
        let _ = writeln!(
            out,
            "instance {}  q={}  n=({},{})  r={}  m=({},{})  δ=({},{})",
            self.instance, self.q, inv.n1, inv.n2, inv.r, inv.m1, inv.m2, inv.delta1, inv.delta2
        );
        if !self.degrees.is_empty() {
            let rows: Vec<Vec<String>> = self
                .degrees
                .iter()
                .map(|d| {
                    vec![
                        d.e.to_string(),
                        d.big_q.to_string(),
                        d.y[0].to_string(),
                        d.y[1].to_string(),
                        d.x.to_string(),
                        d.x_prime.to_string(),
                        d.residual.to_string(),
                        status(d.residual == 0, true).into(),
                    ]
                })
                .collect();
            out.push_str(&aligned(&["e", "Q", "|Y1|", "|Y2|", "|X|", "|X'|", "residual", "status"], &rows));
        }
        for d in &self.degrees {
            let rows: Vec<Vec<String>> = d
                .strata
                .iter()
                .map(|s| vec![d.e.to_string(), s.i.to_string(), s.j.to_string(), s.count.to_string()])
                .collect();
            let _ = writeln!(out, "strata of {} over k'_{}", d.x_domain, d.e);
            out.push_str(&aligned(&["e", "i", "j", "|U_ij ∩ X|"], &rows));
            let cells = |c: &[(i64, i64, u64)]| -> Vec<Vec<String>> {
                c.iter().map(|(a, b, n)| vec![a.to_string(), b.to_string(), n.to_string()]).collect()
            };
            let _ = writeln!(out, "cells (b1, b2) of {}", d.x_domain);
            out.push_str(&aligned(&["b1", "b2", "count"], &cells(&d.cells)));
            let _ = writeln!(out, "cells (b1, b2) of {}", d.x_prime_domain);
            out.push_str(&aligned(&["b1", "b2", "count"], &cells(&d.cells_prime)));
        }
        for s in &self.strata {
            let rows: Vec<Vec<String>> = s
                .checks
                .iter()
                .map(|c| {
                    vec![
                        s.e.to_string(),
                        c.i.to_string(),
                        c.j.to_string(),
                        c.in_domain.to_string(),
                        c.full.to_string(),
                        c.expected.to_string(),
                        c.bases.to_string(),
                        format!("{}..{}", c.fiber_min, c.fiber_max),
                        status(c.holds, true).into(),
                    ]
                })
                .collect();
            let _ = writeln!(out, "stratum law");
            out.push_str(&aligned(
                &["e", "i", "j", "in X", "|U_ij|", "Q^r|Y1||Y2|", "bases", "fibers", "status"],
                &rows,
            ));
            for p in &s.partition {
                let _ = writeln!(
                    out,
                    "partition i={}: Σ_j |U_ij ∩ X| = {} vs |X| = {}  {}",
                    p.i,
                    p.total,
                    p.x,
                    status(p.holds, true)
                );
            }
            for c in &s.complement {
                let _ = writeln!(
                    out,
                    "complement i={}: |X| − |i(X')| = {} − {} vs |U_i,-r'| = {}  {}",
                    c.i,
                    c.x,
                    c.image,
                    c.stratum,
                    status(c.holds, true)
                );
            }
        }
        if !self.orbital.is_empty() {
            let rows: Vec<Vec<String>> = self
                .orbital
                .iter()
                .map(|o| {
                    vec![
                        o.f.to_string(),
                        o.plus.to_string(),
                        o.minus.to_string(),
                        o.o_kappa.to_string(),
                        o.so.to_string(),
                        o.expected.to_string(),
                        o.residual.to_string(),
                        status(o.holds(), o.asserted).into(),
                    ]
                })
                .collect();
            out.push_str(&aligned(&["f", "|X+|", "|X-|", "O_kappa", "SO", "(-1)^r q^fr SO", "residual", "status"], &rows));
        }
        for h in &self.hom {
            let dims: Vec<String> = h.samples.iter().map(|s| s.dim.to_string()).collect();
            let _ = writeln!(
                out,
                "hom dimension over k'_{} ({} samples, seed {}): [{}] vs r = {}  {}",
                h.e,
                h.samples.len(),
                h.seed,
                dims.join(" "),
                h.r,
                status(h.holds(), true)
            );
        }
        if let Some(p) = &self.poly {
            for (name, fit) in [("|X|", &p.x), ("|X'|", &p.x_prime), ("|Y1|", &p.y1), ("|Y2|", &p.y2)] {
                let _ = writeln!(out, "poly {name} = {}  [{:?}]", fit.display, fit.verdict);
            }
        }
        for s in &self.suite {
            let _ = writeln!(
                out,
                "invariant suite over k'_{}: {} lattices, {} checks, {} violations  {}",
                s.e,
                s.lattices,
                s.checks,
                s.violations.len(),
                status(s.violations.is_empty(), true)
            );
            for v in &s.violations {
                let _ = writeln!(out, "  {v}");
            }
        }
        out
    }
}

fn status(ok: bool, asserted: bool) -> &'static str {
    match (ok, asserted) {
        (true, true) => "PASS",
        (false, true) => "FAIL",
        (true, false) => "observed: equal",
        (false, false) => "observed: differs",
    }
}

fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{}{}", " ".repeat(w - c.chars().count()), c))
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(header.to_vec(), &mut out);
    for r in rows {
        line(r.iter().map(|s| s.as_str()).collect(), &mut out);
    }
    out
}

/// Runs counts for one instance with a chosen enumerator and fixed-point
/// strategy, caching enumerations per working field.
pub struct Counter<'a> {
    pub inst: &'a Instance,
    pub enumerator: Arc<dyn SubspaceEnumerator>,
    pub fixed: Arc<dyn FixedPointStrategy>,
    pub cap: usize,
    levels: Mutex<BTreeMap<u32, Arc<Level>>>,
    points: Mutex<BTreeMap<String, Arc<Vec<LatticePoint>>>>,
    p2_at_gamma1: OnceLock<Series>,
}

impl<'a> Counter<'a> {
    pub fn new(
        inst: &'a Instance,
        enumerator: Arc<dyn SubspaceEnumerator>,
        fixed: Arc<dyn FixedPointStrategy>,
        cap: usize,
    ) -> Counter<'a> {
        Counter {
            inst,
            enumerator,
            fixed,
            cap,
            levels: Mutex::new(BTreeMap::new()),
            points: Mutex::new(BTreeMap::new()),
            p2_at_gamma1: OnceLock::new(),
        }
    }

    pub fn from_registry(
        inst: &'a Instance,
        reg: &Registry,
        enumerator: &str,
        fixed: &str,
        cap: usize,
    ) -> Result<Counter<'a>> {
        Ok(Counter::new(inst, reg.enumerator(enumerator)?, reg.fixed_points(fixed)?, cap))
    }

    fn inv(&self) -> &InstanceInvariants {
        &self.inst.invariants
    }

    /// Working field of degree d over k.
    pub fn level(&self, d: u32) -> Result<Arc<Level>> {
        if let Some(l) = self.levels.lock().unwrap().get(&d) {
            return Ok(l.clone());
        }
        let (field, emb) = self.inst.field_level(d)?;
        let actions = self.inst.actions(&emb);
        let lvl = Arc::new(Level { degree: d, field, emb, actions });
        self.levels.lock().unwrap().insert(d, lvl.clone());
        Ok(lvl)
    }

    fn cached(&self, key: String, make: impl FnOnce() -> Result<Vec<LatticePoint>>) -> Result<Arc<Vec<LatticePoint>>> {
        if let Some(p) = self.points.lock().unwrap().get(&key) {
            return Ok(p.clone());
        }
        let pts = Arc::new(make()?);
        self.points.lock().unwrap().insert(key, pts.clone());
        Ok(pts)
    }

    fn m(&self) -> [i64; 2] {
        self.inv().m()
    }

    /// Y_i window ϖ^{−m_i}O / ϖ^{m_i}O with index-0 target.
    pub fn y_model(&self, lvl: &Level, i: usize) -> Result<WindowModel> {
        let m = self.m()[i];
        let frame = Frame::single(i, -m, m);
        WindowModel::build(lvl.field.clone(), frame, 0, [&lvl.actions[0], &lvl.actions[1]])
    }

    fn y_query(&self, w: &WindowModel) -> Result<Query> {
        let dim = w.target_dim().ok_or_else(|| Error::Window("Y window cannot hold index 0".into()))?;
        Ok(Query { dim: Some(dim), ..Query::all(self.cap) })
    }

    /// Y_i(k′_e) as subspaces of the Y_i window.
    pub fn y_points(&self, e: u32, i: usize) -> Result<Arc<Vec<LatticePoint>>> {
        self.cached(format!("{}:Y{}", 2 * e, i), || {
            let lvl = self.level(2 * e)?;
            let w = self.y_model(&lvl, i)?;
            let q = self.y_query(&w)?;
            self.enumerator.enumerate(&w, &q)
        })
    }

    pub fn count_y(&self, i: usize, e: u32) -> Result<u64> {
        Ok(self.y_points(e, i)?.len() as u64)
    }

    /// Model and query of a bounded domain; None when the domain is empty
    /// for window reasons (the sandwich bounds cross).
    pub fn domain_model(&self, lvl: &Level, dom: &Domain) -> Result<Option<(WindowModel, Query)>> {
        self.bounded(lvl, dom.frame(self.m()), dom.parity, [Some(dom.mu); 2], [None; 2])
    }

    fn bounded(
        &self,
        lvl: &Level,
        frame: Frame,
        parity: Parity,
        min_b: [Option<i64>; 2],
        exact_b: [Option<i64>; 2],
    ) -> Result<Option<(WindowModel, Query)>> {
        if !frame.is_valid() {
            return Ok(None);
        }
        let w = WindowModel::build(lvl.field.clone(), frame, parity.delta(), [&lvl.actions[0], &lvl.actions[1]])?;
        let Some(dim) = w.target_dim() else { return Ok(None) };
        let q = Query { dim: Some(dim), min_b, exact_b, cap: self.cap };
        Ok(Some((w, q)))
    }

    /// Points of a domain over k′_e.
    pub fn domain_points(&self, e: u32, dom: &Domain) -> Result<Arc<Vec<LatticePoint>>> {
        self.cached(format!("{}:{}", 2 * e, dom.label()), || {
            let lvl = self.level(2 * e)?;
            match self.domain_model(&lvl, dom)? {
                None => Ok(Vec::new()),
                Some((w, q)) => self.enumerator.enumerate(&w, &q),
            }
        })
    }

    /// q^{2er} = Q^r.
    fn q_power(&self, e: u32) -> Result<u128> {
        let q = self.inst.q() as u128;
        let exp = 2 * e as u64 * self.inv().r as u64;
        checked_pow(q, exp)
    }

    /// |Y_i|, |X|, |X′| and the strata histogram over k′_e.
    pub fn count_x_models(&self, e: u32) -> Result<DegreeCounts> {
        let (xd, xpd) = fundamental_domains(self.inv());
        let y = [self.count_y(0, e)?, self.count_y(1, e)?];
        let x = self.domain_points(e, &xd)?;
        let xp = self.domain_points(e, &xpd)?;
        let mut hist: BTreeMap<(usize, i64), u64> = BTreeMap::new();
        for p in x.iter() {
            for i in 0..2 {
                *hist.entry((i + 1, p.strata.b(i))).or_default() += 1;
            }
        }
        let cells = |pts: &[LatticePoint]| {
            let mut c: BTreeMap<(i64, i64), u64> = BTreeMap::new();
            for p in pts {
                *c.entry((p.strata.b1, p.strata.b2)).or_default() += 1;
            }
            c.into_iter().map(|((a, b), n)| (a, b, n)).collect::<Vec<_>>()
        };
        let expected = self.q_power(e)? * y[0] as u128 * y[1] as u128;
        let residual = x.len() as i128 - xp.len() as i128 - expected as i128;
        Ok(DegreeCounts {
            e,
            big_q: self.inst.qprime_e(e),
            y,
            x: x.len() as u64,
            x_prime: xp.len() as u64,
            x_domain: xd.label(),
            x_prime_domain: xpd.label(),
            strata: hist.into_iter().map(|((i, j), count)| StratumCount { i, j, count }).collect(),
            cells: cells(&x),
            cells_prime: cells(&xp),
            residual,
        })
    }

    /// |X(k′_e)| − |X′(k′_e)| − q^{2er}|Y1(k′_e)||Y2(k′_e)|.
    pub fn verify_identity(&self, e: u32) -> Result<i128> {
        Ok(self.count_x_models(e)?.residual)
    }

    /// The full stratum U_{i,j} of the domain's parity, in its own window
    /// X^±[μ1, μ2] with μ_i = j and μ_other = δ − j − r.
    pub fn full_stratum(&self, e: u32, parity: Parity, i: usize, j: i64) -> Result<(Frame, Vec<LatticePoint>)> {
        let lvl = self.level(2 * e)?;
        let delta = parity.delta();
        let mut mu = [0; 2];
        mu[i] = j;
        mu[1 - i] = delta - j - self.inv().r;
        let frame = Frame::bounded_model(self.m(), mu, delta);
        let mut exact = [None; 2];
        exact[i] = Some(j);
        let mut min_b = [None; 2];
        min_b[1 - i] = Some(mu[1 - i]);
        match self.bounded(&lvl, frame, parity, min_b, exact)? {
            None => Ok((frame, Vec::new())),
            Some((w, q)) => Ok((frame, self.enumerator.enumerate(&w, &q)?)),
        }
    }

    /// Image of L in Y1 × Y2 under π_{i,j}.
    fn project(&self, f: &Gf, frame: &Frame, s: &Subspace, i: usize, j: i64, delta: i64) -> Result<(Subspace, Subspace)> {
        let m = self.m();
        let mut parts = Vec::with_capacity(2);
        for k in 0..2 {
            // factor i contributes ϖ^j B_i, the other factor ϖ^{δ−j} C
            let (single, sub) = if k == i { intersection_part(f, frame, s, k) } else { projection_part(f, frame, s, k) };
            let mut shift = [0; 2];
            shift[k] = if k == i { j } else { delta - j };
            let y = Frame::single(k, -m[k], m[k]);
            parts.push(transfer(f, &single, &sub, shift, &y)?);
        }
        let b = parts.pop().unwrap();
        let a = parts.pop().unwrap();
        Ok((a, b))
    }

    /// The stratum law for every stratum met by X over k′_e.
    pub fn verify_stratum_law(&self, e: u32) -> Result<Vec<StratumCheck>> {
        let (xd, _) = fundamental_domains(self.inv());
        let counts = self.count_x_models(e)?;
        let lvl = self.level(2 * e)?;
        let f = &*lvl.field;
        let y: [HashSet<Subspace>; 2] = [0, 1].map(|i| {
            self.y_points(e, i).map(|v| v.iter().map(|p| p.subspace.clone()).collect()).unwrap_or_default()
        });
        let bases = (y[0].len() * y[1].len()) as u64;
        let qr = self.q_power(e)?;
        let expected = qr * bases as u128;
        let delta = xd.parity.delta();
        let mut out = Vec::new();
        for s in &counts.strata {
            let i = s.i - 1;
            let (frame, pts) = self.full_stratum(e, xd.parity, i, s.j)?;
            let mut fibers: HashMap<(Subspace, Subspace), u64> = HashMap::new();
            let mut stray = false;
            for p in &pts {
                let key = self.project(f, &frame, &p.subspace, i, s.j, delta)?;
                if !y[0].contains(&key.0) || !y[1].contains(&key.1) {
                    stray = true;
                }
                *fibers.entry(key).or_default() += 1;
            }
            let fiber_min = fibers.values().copied().min().unwrap_or(0);
            let fiber_max = fibers.values().copied().max().unwrap_or(0);
            let holds = !stray
                && pts.len() as u128 == expected
                && fibers.len() as u64 == bases
                && fiber_min as u128 == qr
                && fiber_max as u128 == qr;
            out.push(StratumCheck {
                i: s.i,
                j: s.j,
                in_domain: s.count,
                full: pts.len() as u64,
                expected,
                bases: fibers.len() as u64,
                fiber_min,
                fiber_max,
                holds,
            });
        }
        Ok(out)
    }

    /// Σ_j |U_{i,j} ∩ X| = |X|, each stratum enumerated with its own query.
    pub fn partition_checks(&self, e: u32) -> Result<Vec<PartitionCheck>> {
        let (xd, _) = fundamental_domains(self.inv());
        let x = self.domain_points(e, &xd)?.len() as u64;
        let lvl = self.level(2 * e)?;
        let frame = xd.frame(self.m());
        let mut out = Vec::new();
        for i in 0..2 {
            let mut total = 0u64;
            if frame.is_valid() {
                // b_i < hi_i + ... is bounded by the window: dim(L ∩ E'_i) ≤ width
                let top = frame.0[i].dim() as i64 - frame.0[i].hi;
                for j in xd.mu..=top {
                    let mut exact = [None; 2];
                    exact[i] = Some(j);
                    if let Some((w, q)) = self.bounded(&lvl, frame, xd.parity, [Some(xd.mu); 2], exact)? {
                        total += self.enumerator.enumerate(&w, &q)?.len() as u64;
                    }
                }
            }
            out.push(PartitionCheck { i: i + 1, total, x, holds: total == x });
        }
        Ok(out)
    }

    /// X − i_j(X′) = U_{j,−r′}, compared as sets.
    pub fn complement_checks(&self, e: u32) -> Result<Vec<ComplementCheck>> {
        let (xd, xpd) = fundamental_domains(self.inv());
        let lvl = self.level(2 * e)?;
        let f = &*lvl.field;
        let x = self.domain_points(e, &xd)?;
        let xp = self.domain_points(e, &xpd)?;
        let fx = xd.frame(self.m());
        let fxp = xpd.frame(self.m());
        let xset: HashSet<&Subspace> = x.iter().map(|p| &p.subspace).collect();
        let shifts = embedding_shifts(self.inv());
        let rp = self.inv().r_prime;
        let mut out = Vec::new();
        for i in 0..2 {
            let stratum: HashSet<&Subspace> =
                x.iter().filter(|p| p.strata.b(i) == -rp).map(|p| &p.subspace).collect();
            let mut image = HashSet::new();
            let mut ok = true;
            for p in xp.iter() {
                match transfer(f, &fxp, &p.subspace, shifts[i], &fx) {
                    Ok(s) => {
                        if !xset.contains(&s) || stratum.contains(&s) {
                            ok = false;
                        }
                        image.insert(s);
                    }
                    Err(_) => ok = false,
                }
            }
            ok &= image.len() == xp.len() && image.len() + stratum.len() == x.len();
            out.push(ComplementCheck {
                i: i + 1,
                x: x.len() as u64,
                image: image.len() as u64,
                stratum: stratum.len() as u64,
                holds: ok,
            });
        }
        Ok(out)
    }

    pub fn strata_report(&self, e: u32) -> Result<StrataReport> {
        Ok(StrataReport {
            e,
            checks: self.verify_stratum_law(e)?,
            partition: self.partition_checks(e)?,
            complement: self.complement_checks(e)?,
        })
    }

    /// F^f-fixed points of a domain, over K = GF(q^f) for even f and
    /// GF(q^{2f}) for odd f.
    pub fn domain_fixed_points(&self, dom: &Domain, f: u32) -> Result<Vec<LatticePoint>> {
        let lvl = self.level(if f % 2 == 0 { f } else { 2 * f })?;
        let Some((w, q)) = self.domain_model(&lvl, dom)? else { return Ok(Vec::new()) };
        let frob = SemilinearFrobenius::new(&w, &self.inst.hermitian, dom.parity, &lvl.emb, self.inst.q())?;
        self.fixed.fixed_points(&w, &frob, &q, f, &*self.enumerator)
    }

    pub fn y_fixed_points(&self, i: usize, f: u32) -> Result<Vec<LatticePoint>> {
        let lvl = self.level(if f % 2 == 0 { f } else { 2 * f })?;
        let w = self.y_model(&lvl, i)?;
        let q = self.y_query(&w)?;
        let frob = SemilinearFrobenius::new(&w, &self.inst.hermitian, Parity::Plus, &lvl.emb, self.inst.q())?;
        self.fixed.fixed_points(&w, &frob, &q, f, &*self.enumerator)
    }

    /// O_κ = |𝒳⁺(k_f)| − |𝒳⁻(k_f)| and SO = |𝒴1(k_f)||𝒴2(k_f)|.
    pub fn orbital_integrals(&self, f: u32) -> Result<OrbitalReport> {
        let [pd, md] = signed_domains(self.inv());
        let plus = self.domain_fixed_points(&pd, f)?.len() as u64;
        let minus = self.domain_fixed_points(&md, f)?.len() as u64;
        let y = [self.y_fixed_points(0, f)?.len() as u64, self.y_fixed_points(1, f)?.len() as u64];
        let so = y[0] as u128 * y[1] as u128;
        let r = self.inv().r;
        let qfr = checked_pow(self.inst.q() as u128, f as u64 * r as u64)?;
        let sign: i128 = if r % 2 == 0 { 1 } else { -1 };
        let expected = sign * (qfr * so) as i128;
        let o_kappa = plus as i128 - minus as i128;
        let inv = self.inv();
        Ok(OrbitalReport {
            f,
            plus,
            minus,
            o_kappa,
            y,
            so,
            expected,
            residual: o_kappa - expected,
            asserted: f % 2 == 0 || (inv.n1 == 1 && inv.n2 == 1),
        })
    }

    fn p2_at_gamma1(&self) -> Result<&Series> {
        if let Some(s) = self.p2_at_gamma1.get() {
            return Ok(s);
        }
        let inst = self.inst;
        let s = inst.tori[1].eval_poly_at(&inst.ctx, &inst.exts[0], &inst.tori[0].gamma, inst.precision)?;
        Ok(self.p2_at_gamma1.get_or_init(|| s))
    }

    /// dim_K Hom(M2, (K ⊗ E′1)/M1) for modules over K ⊗ O_F′[[T]], with T
    /// acting through γ2 on the source and γ1 on the target.
    pub fn hom_dimension(&self, e: u32, m1: &SingleLattice, m2: &SingleLattice) -> Result<usize> {
        if m1.factor != 0 || m2.factor != 1 {
            return Err(Error::Window("hom_dimension takes a lattice of E'1 then one of E'2".into()));
        }
        let lvl = self.level(2 * e)?;
        let f = &*lvl.field;
        let inv = self.inv();
        let r = inv.r;
        let p = self.p2_at_gamma1()?.map_coeffs(|c| lvl.emb.apply(c));

        // ker P2(γ1) on E′1/M1, inside ϖ^{lo−extra} M1-window / M1
        let w1 = m1.frame.0[0];
        let mut extra = r + inv.m1 + inv.n1 as i64;
        let (big1, s1, a) = loop {
            let big = Frame::single(0, w1.lo - extra, w1.hi);
            let s1 = transfer(f, &m1.frame, &m1.subspace, [0, 0], &big)?;
            let pm = factor_multiplication(&big, 0, &p, "P2(γ1)")?;
            let a = preimage(f, &pm, &s1);
            let top = big.index(0, big.0[0].lo).unwrap();
            if a.iter().all(|v| v[top].is_zero()) {
                break (big, s1, a);
            }
            if extra > 4 * (r + inv.m1 + inv.n1 as i64) + 64 {
                return Err(Error::CapExceeded("kernel of P2(γ1) does not fit the hom window".into()));
            }
            extra *= 2;
        };
        let target = Quotient::new(f, &s1, a.iter());
        let nu1 = factor_multiplication(&big1, 0, &lvl.actions[0].t_pi, "ϖ_F")?;
        let u1 = factor_multiplication(&big1, 0, &lvl.actions[0].gamma, "γ1")?;

        // M2 / T^r M2 with T = ϖ_F, which kills the target
        let w2 = m2.frame.0[1];
        let big2 = Frame::single(1, w2.lo, w2.hi + inv.n2 as i64 * r);
        let s2 = transfer(f, &m2.frame, &m2.subspace, [0, 0], &big2)?;
        let nu2 = factor_multiplication(&big2, 1, &lvl.actions[1].t_pi, "ϖ_F")?;
        let u2 = factor_multiplication(&big2, 1, &lvl.actions[1].gamma, "γ2")?;
        let mut tr = s2.clone();
        for _ in 0..r {
            tr = tr.image(f, &nu2);
        }
        let source = Quotient::new(f, &tr, s2.rows().map(|r| r.to_vec()).collect::<Vec<_>>().iter());

        let (dt, dq) = (target.dim(), source.dim());
        let unknowns = dt * dq;
        if unknowns == 0 {
            return Ok(0);
        }
        let mut rows: Vec<Vec<Fe>> = Vec::new();
        for (op_src, op_tgt) in [(&nu2, &nu1), (&u2, &u1)] {
            let c = source.action(f, op_src);
            let n = target.action(f, op_tgt);
            // Σ_c C[c][b] F[a][c] − Σ_k N[a][k] F[k][b] = 0
            for b in 0..dq {
                for a_ in 0..dt {
                    let mut row = vec![Fe::ZERO; unknowns];
                    for cc in 0..dq {
                        let x = c[cc][b];
                        if !x.is_zero() {
                            row[a_ * dq + cc] = f.add(row[a_ * dq + cc], x);
                        }
                    }
                    for k in 0..dt {
                        let x = n[a_][k];
                        if !x.is_zero() {
                            row[k * dq + b] = f.sub(row[k * dq + b], x);
                        }
                    }
                    rows.push(row);
                }
            }
        }
        Ok(unknowns - rank(f, &rows, unknowns))
    }

    /// Lattices B_i, C_i and Y_i points met over k′_e, per factor.
    pub fn stable_lattices(&self, e: u32) -> Result<[Vec<SingleLattice>; 2]> {
        let lvl = self.level(2 * e)?;
        let f = &*lvl.field;
        let mut pools: [Vec<SingleLattice>; 2] = [Vec::new(), Vec::new()];
        let mut seen: [HashSet<(Frame, Subspace)>; 2] = [HashSet::new(), HashSet::new()];
        let m = self.m();
        let mut push = |i: usize, frame: Frame, s: Subspace, pools: &mut [Vec<SingleLattice>; 2]| {
            if seen[i].insert((frame, s.clone())) {
                pools[i].push(SingleLattice { factor: i, frame, subspace: s });
            }
        };
        for i in 0..2 {
            for p in self.y_points(e, i)?.iter() {
                push(i, Frame::single(i, -m[i], m[i]), p.subspace.clone(), &mut pools);
            }
        }
        let (xd, xpd) = fundamental_domains(self.inv());
        for dom in [xd, xpd] {
            let frame = dom.frame(m);
            for p in self.domain_points(e, &dom)?.iter() {
                for i in 0..2 {
                    let (fr, s) = intersection_part(f, &frame, &p.subspace, i);
                    push(i, fr, s, &mut pools);
                    let (fr, s) = projection_part(f, &frame, &p.subspace, i);
                    push(i, fr, s, &mut pools);
                }
            }
        }
        Ok(pools)
    }

    /// hom_dimension on `count` seeded random pairs of stable lattices.
    pub fn hom_samples(&self, e: u32, count: usize, seed: u64) -> Result<HomReport> {
        let pools = self.stable_lattices(e)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            let a = &pools[0][rng.gen_range(0..pools[0].len())];
            let b = &pools[1][rng.gen_range(0..pools[1].len())];
            let a = a.shifted(rng.gen_range(-1..=1));
            let b = b.shifted(rng.gen_range(-1..=1));
            let dim = self.hom_dimension(e, &a, &b)?;
            samples.push(HomSample { index1: a.index(), index2: b.index(), dim });
        }
        Ok(HomReport { e, seed, r: self.inv().r, samples })
    }

    /// Structural invariants over every enumerated lattice of the domains
    /// and of Y1, Y2 over k′_e.
    pub fn invariant_suite(&self, e: u32) -> Result<SuiteReport> {
        let lvl = self.level(2 * e)?;
        let f = &*lvl.field;
        let inv = self.inv().clone();
        let m = inv.m();
        let mut rep = SuiteReport { e, ..SuiteReport::default() };
        let kprime_level = lvl.field.size() as u64 == self.inst.qprime_e(1)
            && (0..lvl.field.size()).all(|x| lvl.emb.apply(Fe(x)) == Fe(x));

        for i in 0..2 {
            let w = self.y_model(&lvl, i)?;
            for p in self.y_points(e, i)?.iter() {
                rep.lattices += 1;
                rep.check(sandwich_holds(&w.frame, i, &p.subspace, m[i], f), || {
                    format!("Y{} lattice violates the conductor sandwich", i + 1)
                });
                rep.check(check_z_membership(f, &p.subspace, &w.pi[i], m[i] as usize), || {
                    format!("Y{} lattice is not in Z{}", i + 1, i + 1)
                });
            }
        }

        let (xd, xpd) = fundamental_domains(&inv);
        for dom in [xd, xpd] {
            let Some((w, _)) = self.domain_model(&lvl, &dom)? else { continue };
            let frame = w.frame;
            let delta = dom.parity.delta();
            let frob = SemilinearFrobenius::new(&w, &self.inst.hermitian, dom.parity, &lvl.emb, self.inst.q())?;
            let tgt = |fr: &Frame| Frame::new(
                crate::lattice_window::FactorWindow::new(fr.0[0].lo - 1, fr.0[0].hi + 1),
                crate::lattice_window::FactorWindow::new(fr.0[1].lo - 1, fr.0[1].hi + 1),
            );
            let wide = tgt(&frame);
            let label = dom.label();
            rep.check(
                transpose(&w.u).mul(f, &frob.pairing) == frob.pairing.mul(f, &w.u)
                    && transpose(&w.nu).mul(f, &frob.pairing) == frob.pairing.mul(f, &w.nu),
                || format!("{label}: ν or u is not self-adjoint for the pairing"),
            );
            for p in self.domain_points(e, &dom)?.iter() {
                rep.lattices += 1;
                let st = p.strata;
                let s = &p.subspace;
                for i in 0..2 {
                    for (fr, part) in [intersection_part(f, &frame, s, i), projection_part(f, &frame, s, i)] {
                        rep.check(sandwich_holds(&fr, i, &part, m[i], f), || {
                            format!("{label}: B/C part of factor {} violates the sandwich", i + 1)
                        });
                    }
                    rep.check(st.b(i) <= st.c(i) && st.c(i) <= st.b(i) + inv.r, || {
                        format!("{label}: b ≤ c ≤ b + r fails on factor {} ({st:?})", i + 1)
                    });
                }
                rep.check(st.b1 + st.c2 == st.ind && st.b2 + st.c1 == st.ind, || {
                    format!("{label}: b1 + c2 = b2 + c1 = ind fails ({st:?})")
                });
                let d = frob.dual(s);
                rep.check(&frob.dual(&d) == s, || format!("{label}: biduality fails"));
                let h = frob.hermitian_dual(s);
                let hind = strata_invariants(f, &frame, &h).ind;
                rep.check(hind == -st.ind + 2 * delta, || {
                    format!("{label}: hermitian dual has index {hind}, lattice {}", st.ind)
                });
                let fl = strata_invariants(f, &frame, &frob.step(s));
                for i in 0..2 {
                    rep.check(fl.b(i) == delta - st.c(i), || {
                        format!("{label}: b_{}(F L) = {} but δ − c = {}", i + 1, fl.b(i), delta - st.c(i))
                    });
                }
                // α1∘α2⁻¹ = τ on X⁺, α2⁻¹∘α1 = τ on X⁻
                let steps: [[i64; 2]; 2] = if dom.parity == Parity::Plus { [[0, -1], [1, 0]] } else { [[1, 0], [0, -1]] };
                let two_steps = transfer(f, &frame, s, steps[0], &wide)
                    .and_then(|mid| transfer(f, &wide, &mid, steps[1], &wide));
                let tau = transfer(f, &frame, s, [1, -1], &wide);
                rep.check(matches!((&two_steps, &tau), (Ok(a), Ok(b)) if a == b), || {
                    format!("{label}: α-composition differs from τ")
                });
                if kprime_level {
                    let via_trace =
                        dual_via_trace(&self.inst.ctx, [&self.inst.exts[0], &self.inst.exts[1]], &self.inst.hermitian, dom.parity, &frame, s);
                    rep.check(matches!(&via_trace, Ok(t) if *t == h), || {
                        format!("{label}: residue and trace duals differ")
                    });
                }
            }
        }
        Ok(rep)
    }

    /// Runs the requested checks.
    pub fn run(&self, plan: &RunPlan) -> Result<CountReport> {
        let mut report = CountReport {
            instance: self.inst.spec.name.clone(),
            q: self.inst.q(),
            invariants: self.inv().clone(),
            enumerator: self.enumerator.name().into(),
            fixed_points: self.fixed.name().into(),
            seed: plan.seed,
            degrees: Vec::new(),
            strata: Vec::new(),
            orbital: Vec::new(),
            hom: Vec::new(),
            poly: None,
            suite: Vec::new(),
        };
        for &e in &plan.es {
            report.degrees.push(self.count_x_models(e)?);
            if plan.strata {
                report.strata.push(self.strata_report(e)?);
            }
            if let Some(n) = plan.hom_samples {
                report.hom.push(self.hom_samples(e, n, plan.seed)?);
            }
            if plan.suite {
                report.suite.push(self.invariant_suite(e)?);
            }
        }
        for &f in &plan.fs {
            report.orbital.push(self.orbital_integrals(f)?);
        }
        if plan.poly {
            let pts = |g: &dyn Fn(&DegreeCounts) -> u64| -> Vec<(u64, u128)> {
                report.degrees.iter().map(|d| (d.big_q, g(d) as u128)).collect()
            };
            report.poly = Some(PolyReport {
                es: plan.es.clone(),
                x: polynomiality_probe(&pts(&|d| d.x), None)?,
                x_prime: polynomiality_probe(&pts(&|d| d.x_prime), None)?,
                y1: polynomiality_probe(&pts(&|d| d.y[0]), None)?,
                y2: polynomiality_probe(&pts(&|d| d.y[1]), None)?,
            });
        }
        Ok(report)
    }
}

fn checked_pow(base: u128, exp: u64) -> Result<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base).ok_or_else(|| Error::CapExceeded("power overflows 128 bits".into()))?;
    }
    Ok(acc)
}

fn transpose(m: &Mat) -> Mat {
    let mut t = Mat::zero(m.n);
    for i in 0..m.n {
        for j in 0..m.n {
            t.set(j, i, m.get(i, j));
        }
    }
    t
}

/// Basis of {x : M x ∈ S}.
fn preimage(f: &Gf, mat: &Mat, s: &Subspace) -> Vec<Vec<Fe>> {
    let n = mat.n;
    let cols: Vec<Vec<Fe>> = (0..n)
        .map(|c| {
            let mut v: Vec<Fe> = (0..n).map(|r| mat.get(r, c)).collect();
            s.reduce(f, &mut v);
            v
        })
        .collect();
    let pivots: HashSet<usize> = s.pivots().into_iter().collect();
    let rows: Vec<Vec<Fe>> = (0..n).filter(|k| !pivots.contains(k)).map(|k| cols.iter().map(|c| c[k]).collect()).collect();
    nullspace(f, &rows, n)
}

/// A quotient A/S of subspaces with S ⊂ A, with lifts reduced modulo S.
struct Quotient<'s> {
    sub: &'s Subspace,
    basis: Rref,
}

impl<'s> Quotient<'s> {
    fn new<'v>(f: &Gf, sub: &'s Subspace, vectors: impl Iterator<Item = &'v Vec<Fe>>) -> Quotient<'s> {
        let mut basis = Rref::new(sub.ambient_dim());
        for v in vectors {
            let mut w = v.clone();
            sub.reduce(f, &mut w);
            basis.insert(f, &w);
        }
        Quotient { sub, basis }
    }

    fn dim(&self) -> usize {
        self.basis.rank()
    }

    fn coords(&self, f: &Gf, v: &[Fe]) -> Vec<Fe> {
        let mut w = v.to_vec();
        self.sub.reduce(f, &mut w);
        self.basis.coordinates(&w)
    }

    /// Matrix (column k = image of lift k) of an operator preserving A and S.
    fn action(&self, f: &Gf, op: &Mat) -> Vec<Vec<Fe>> {
        let d = self.dim();
        let mut out = vec![vec![Fe::ZERO; d]; d];
        for (k, lift) in self.basis.rows().iter().enumerate() {
            let c = self.coords(f, &op.apply(f, lift));
            for (row, x) in out.iter_mut().zip(c) {
                row[k] = x;
            }
        }
        out
    }
}

/// Fits counts (Q, N(Q)) by the interpolating polynomial of least degree.
pub fn polynomiality_probe(points: &[(u64, u128)], expected_degree: Option<usize>) -> Result<PolyFit> {
    let k = points.len();
    if k == 0 || expected_degree.is_some_and(|d| k < d + 1) {
        return Err(Error::Underdetermined(format!(
            "{k} data points for expected degree {}",
            expected_degree.map_or("?".into(), |d| d.to_string())
        )));
    }
    let xs: Vec<BigRational> = points.iter().map(|&(q, _)| BigRational::from_integer(BigInt::from(q))).collect();
    let mut uniq = xs.clone();
    uniq.sort();
    uniq.dedup();
    if uniq.len() != xs.len() {
        return Err(Error::Underdetermined("repeated abscissa".into()));
    }
    // Newton divided differences
    let mut dd: Vec<BigRational> = points.iter().map(|&(_, n)| BigRational::from_integer(BigInt::from(n))).collect();
    for level in 1..k {
        for i in (level..k).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }
    // expand Σ dd_i Π_{j<i} (Q − x_j)
    let mut coeffs = vec![BigRational::zero(); k];
    let mut basis = vec![BigRational::one()];
    for i in 0..k {
        for (c, b) in coeffs.iter_mut().zip(&basis) {
            *c += &dd[i] * b;
        }
        if i + 1 < k {
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (j, b) in basis.iter().enumerate() {
                next[j + 1] += b;
                next[j] -= b * &xs[i];
            }
            basis = next;
        }
    }
    let degree = coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
    let clean = coeffs.iter().all(|c| c.is_integer() && !c.is_negative());
    let verdict = match (clean, degree + 1 < k) {
        (false, true) => Verdict::Rejected,
        (false, false) => Verdict::Inconclusive,
        (true, true) => Verdict::Confirmed,
        (true, false) => Verdict::Consistent,
    };
    coeffs.truncate(degree + 1);
    Ok(PolyFit {
        coefficients: coeffs.iter().map(|c| c.to_string()).collect(),
        degree,
        verdict,
        display: display_poly(&coeffs),
    })
}

fn display_poly(coeffs: &[BigRational]) -> String {
    let mut terms = Vec::new();
    for (d, c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let sign = if c.is_negative() { "-" } else { "+" };
        let body = match d {
            0 => mag.to_string(),
            _ => {
                let var = if d == 1 { "Q".to_string() } else { format!("Q^{d}") };
                if mag.is_one() {
                    var
                } else {
                    format!("{mag}{var}")
                }
            }
        };
        terms.push((sign, body));
    }
    if terms.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (k, (sign, body)) in terms.iter().enumerate() {
        if k == 0 {
            if *sign == "-" {
                s.push('-');
            }
        } else {
            s.push_str(&format!(" {sign} "));
        }
        s.push_str(body);
    }
    s
}

/// Evaluates a fitted polynomial at Q (for tests and reports).
pub fn eval_fit(fit: &PolyFit, q: u64) -> Option<i128> {
    let mut acc = BigRational::zero();
    let x = BigRational::from_integer(BigInt::from(q));
    for c in fit.coefficients.iter().rev() {
        let c: BigRational = c.parse().ok()?;
        acc = acc * &x + c;
    }
    acc.is_integer().then(|| acc.to_integer().to_i128()).flatten()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_finds_the_cubic() {
        let pts: Vec<(u64, u128)> = [25u64, 625, 15625, 390625]
            .iter()
            .map(|&q| (q, (q as u128).pow(3) + 3 * (q as u128).pow(2) + q as u128 + 1))
            .collect();
        let fit = polynomiality_probe(&pts, Some(3)).unwrap();
        assert_eq!(fit.display, "Q^3 + 3Q^2 + Q + 1");
        assert_eq!(fit.verdict, Verdict::Consistent);
        assert!(polynomiality_probe(&pts[..2], Some(3)).is_err());
        let lin: Vec<(u64, u128)> = [9u64, 81, 729].iter().map(|&q| (q, q as u128 + 1)).collect();
        let fit = polynomiality_probe(&lin, None).unwrap();
        assert_eq!((fit.display.as_str(), fit.verdict), ("Q + 1", Verdict::Confirmed));
        assert_eq!(eval_fit(&fit, 3), Some(4));
        // two points through a quadratic: the line has a negative constant
        let two: Vec<(u64, u128)> = [(9, 91), (81, 6643)].to_vec();
        assert_eq!(polynomiality_probe(&two, None).unwrap().verdict, Verdict::Inconclusive);
        let bad: Vec<(u64, u128)> = [(9, 91), (81, 6643), (729, 5)].to_vec();
        assert_eq!(polynomiality_probe(&bad, Some(1)).unwrap().verdict, Verdict::Inconclusive);
        let bent: Vec<(u64, u128)> = [(1, 3), (2, 1), (3, 3), (4, 9)].to_vec();
        assert_eq!(polynomiality_probe(&bent, None).unwrap().verdict, Verdict::Rejected);
    }
}
