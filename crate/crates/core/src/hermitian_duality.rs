//! Hermitian forms on E'_1 ⊕ E'_2, lattice duality inside a window, and the
//! σ-semilinear Frobenius whose fixed points are the rational lattices.
//!
//! With ω_i = α_i · dt/dπ_i the form tr(α σ(x) y) is integral on a lattice
//! exactly when the residue Res(ω σ(x) y dπ) vanishes on it. On window
//! coordinates this gives a symmetric bilinear pairing B with k-rational
//! entries; the hermitian dual of L is the B-annihilator of σ(L).

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::finite_fields::{Embedding, Fe, Gf};
use crate::lattice_window::enumerate::{closure_bfs, ChildFilter};
use crate::lattice_window::{Frame, LatticePoint, Query, Subspace, SubspaceEnumerator, WindowModel};
use crate::linalg::{nullspace, Mat};
use crate::local_fields::{LocalContext, RamifiedExtension};
use crate::series::Series;

/// The two hermitian forms: Φ⁺ (selfdual O_{E'}) and Φ⁻.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    /// δ^±: 0 for Φ⁺, 1 for Φ⁻.
    pub fn delta(self) -> i64 {
        match self {
            Parity::Plus => 0,
            Parity::Minus => 1,
        }
    }

    pub fn index(self) -> usize {
        self.delta() as usize
    }

    pub fn sign(self) -> char {
        match self {
            Parity::Plus => '+',
            Parity::Minus => '-',
        }
    }
}

/// α^± on each factor and the differentials ω = α·dt/dπ.
#[derive(Clone, Debug)]
pub struct HermitianStructure {
    /// alpha[parity][factor]
    pub alpha: [[Series; 2]; 2],
    pub omega: [[Series; 2]; 2],
    /// δ(E'_i/F').
    pub different: [i64; 2],
}

impl HermitianStructure {
    /// Defaults α⁺ = π^{−δ}, α⁻ = π^{1−δ}; overrides must lie in E with the
    /// same valuation.
    pub fn new(ctx: &LocalContext, exts: [&RamifiedExtension; 2], overrides: &[[Option<Series>; 2]; 2]) -> Result<Self> {
        let f = &*ctx.kp;
        let mut different = [0; 2];
        for i in 0..2 {
            different[i] = exts[i].different_exponent(ctx)?;
        }
        let z = || [Series::exact_zero(), Series::exact_zero()];
        let mut alpha: [[Series; 2]; 2] = [z(), z()];
        let mut omega: [[Series; 2]; 2] = [z(), z()];
        for parity in [Parity::Plus, Parity::Minus] {
            let p = parity.index();
            for i in 0..2 {
                let want = parity.delta() - different[i];
                let a = match &overrides[p][i] {
                    None => Series::monomial(Fe::ONE, want),
                    Some(a) => {
                        if !ctx.series_in_k(a) {
                            return Err(Error::hypothesis(
                                "hermitian normalization",
                                format!("α{} on E_{} must have coefficients in k", parity.sign(), i + 1),
                            ));
                        }
                        if a.valuation() != Some(want) {
                            return Err(Error::hypothesis(
                                "hermitian normalization",
                                format!(
                                    "α{} on E_{} must have valuation {want}, got {:?}",
                                    parity.sign(),
                                    i + 1,
                                    a.valuation()
                                ),
                            ));
                        }
                        a.clone()
                    }
                };
                let dt = exts[i].t_pi.derivative(f);
                omega[p][i] = a.mul(&dt, f);
                alpha[p][i] = a;
            }
        }
        Ok(HermitianStructure { alpha, omega, different })
    }

    /// Class of the discriminant N(α)ϖ_F^δ in F^×/N F'^× (units are norms).
    pub fn discriminant_class(&self, parity: Parity, i: usize) -> Result<u8> {
        let v = self.alpha[parity.index()][i]
            .valuation()
            .ok_or_else(|| Error::hypothesis("hermitian normalization", "α is zero"))?;
        Ok((v + self.different[i]).rem_euclid(2) as u8)
    }

    /// Gram matrix of B on the frame: entry (a, b) is the coefficient of
    /// π^{−1−e_a−e_b} in ω, zero across factors. Coefficients pass through
    /// `emb` into the working field.
    pub fn pairing_matrix(&self, parity: Parity, frame: &Frame, emb: &dyn Fn(Fe) -> Fe) -> Result<Mat> {
        if !frame.is_self_dual(parity.delta()) {
            return Err(Error::Window(format!(
                "frame {frame:?} is not selfdual-compatible for Φ{}",
                parity.sign()
            )));
        }
        let n = frame.dim();
        let mut m = Mat::zero(n);
        for a in 0..n {
            let (i, ea) = frame.tag(a);
            let w = &self.omega[parity.index()][i];
            for b in 0..n {
                let (j, eb) = frame.tag(b);
                if i != j {
                    continue;
                }
                let e = -1 - ea - eb;
                let c = w.coeff(e).ok_or_else(|| {
                    Error::PrecisionExhausted(format!(
                        "pairing: ω{} on E_{} known only below ϖ^{}",
                        parity.sign(),
                        i + 1,
                        w.precision()
                    ))
                })?;
                m.set(a, b, emb(c));
            }
        }
        Ok(m)
    }
}

/// B-annihilator of a subspace: {x : x^T P ℓ = 0 for ℓ ∈ S}.
pub fn annihilator(f: &Gf, pairing: &Mat, s: &Subspace) -> Subspace {
    let n = pairing.n;
    let rows: Vec<Vec<Fe>> = s.rows().map(|l| pairing.apply(f, l)).collect();
    let ns = nullspace(f, &rows, n);
    Subspace::from_rows(f, n, ns.iter().map(|v| v.as_slice()))
}

/// Hermitian dual of a k'-rational lattice via the trace form, computed
/// independently of the residue pairing: the joint kernel of the t^{−k}
/// coefficients of tr_{E'/F'}(α x ℓ). Works over k' only.
pub fn dual_via_trace(
    ctx: &LocalContext,
    exts: [&RamifiedExtension; 2],
    h: &HermitianStructure,
    parity: Parity,
    frame: &Frame,
    s: &Subspace,
) -> Result<Subspace> {
    let f = &*ctx.kp;
    let n = frame.dim();
    // rows ℓ as series per factor
    let rows: Vec<[Series; 2]> = s
        .rows()
        .map(|r| {
            let mut terms: [Vec<(i64, Fe)>; 2] = [Vec::new(), Vec::new()];
            for (idx, &c) in r.iter().enumerate() {
                if !c.is_zero() {
                    let (i, e) = frame.tag(idx);
                    terms[i].push((e, c));
                }
            }
            [Series::from_terms(f, &terms[0], crate::series::EXACT), Series::from_terms(f, &terms[1], crate::series::EXACT)]
        })
        .collect();
    let mut constraints: Vec<Vec<Fe>> = Vec::new();
    for l in &rows {
        // columns: tr(α π^e ℓ_i) for each window exponent e; the pairing is
        // the sum of both factors' traces
        let mut traces = Vec::with_capacity(n);
        let mut depth = 1;
        for i in 0..2 {
            let w = frame.0[i];
            if w.dim() == 0 {
                continue;
            }
            let a = &h.alpha[parity.index()][i];
            let va = a.valuation().unwrap_or(0);
            depth = depth.max((-(va + 2 * w.lo)).max(0) + 1);
            for e in w.lo..w.hi {
                let z = a.mul(&l[i], f).shift(e);
                traces.push((frame.index(i, e).unwrap(), exts[i].trace_to_fprime(ctx, &z)?));
            }
        }
        for k in 1..=depth {
            let mut row = vec![Fe::ZERO; n];
            let mut nonzero = false;
            for (col, tr) in &traces {
                let c = tr.coeff(-k).ok_or_else(|| {
                    Error::PrecisionExhausted(format!("pairing: trace known only below t^{}", tr.precision()))
                })?;
                if !c.is_zero() {
                    nonzero = true;
                }
                row[*col] = c;
            }
            if nonzero {
                constraints.push(row);
            }
        }
    }
    // Φ(x, ℓ) = tr(α σ(x) ℓ): the kernel is in y = σ(x).
    let ns = nullspace(f, &constraints, n);
    let conj_dual = Subspace::from_rows(f, n, ns.iter().map(|v| v.as_slice()));
    Ok(conj_dual.map_coeffs(|c| ctx.sigma(c)))
}

/// The semilinear map L ↦ φ_q(L^∨) on a selfdual-compatible window over a
/// field K ⊇ k', where φ_q is the q-power map on coefficients.
#[derive(Clone, Debug)]
pub struct SemilinearFrobenius {
    pub field: Arc<Gf>,
    pub frame: Frame,
    pub parity: Parity,
    pub pairing: Mat,
    /// |k|.
    pub q: u64,
}

impl SemilinearFrobenius {
    pub fn new(w: &WindowModel, h: &HermitianStructure, parity: Parity, kprime_to_k: &Embedding, q: u64) -> Result<Self> {
        let pairing = h.pairing_matrix(parity, &w.frame, &|c| kprime_to_k.apply(c))?;
        Ok(SemilinearFrobenius { field: w.field.clone(), frame: w.frame, parity, pairing, q })
    }

    /// L^∨ for the bilinear pairing.
    pub fn dual(&self, s: &Subspace) -> Subspace {
        annihilator(&self.field, &self.pairing, s)
    }

    /// Coefficientwise x ↦ x^{q^k}.
    pub fn phi(&self, s: &Subspace, k: u32) -> Subspace {
        let e = self.q.pow(k);
        let f = &*self.field;
        s.map_coeffs(|c| f.pow(c, e))
    }

    /// Hermitian dual of a lattice defined over k': φ_q(L)^∨.
    pub fn hermitian_dual(&self, s: &Subspace) -> Subspace {
        self.dual(&self.phi(s, 1))
    }

    /// F(L) = φ_q(L^∨).
    pub fn step(&self, s: &Subspace) -> Subspace {
        self.phi(&self.dual(s), 1)
    }

    /// F^f(L): φ_{q^f}(L) for even f and φ_{q^f}(L^∨) for odd f.
    pub fn power(&self, s: &Subspace, f: u32) -> Subspace {
        if f % 2 == 0 {
            self.phi(s, f)
        } else {
            self.phi(&self.dual(s), f)
        }
    }

    /// F^f computed by literal iteration (independent of `power`).
    pub fn iterate(&self, s: &Subspace, f: u32) -> Subspace {
        let mut x = s.clone();
        for _ in 0..f {
            x = self.step(&x);
        }
        x
    }

    pub fn is_fixed(&self, s: &Subspace, f: u32) -> bool {
        &self.power(s, f) == s
    }

    /// Degree of K over k, checked to be a multiple of lcm(2, f).
    fn check_field(&self, f: u32) -> Result<()> {
        let p = self.field.p() as u64;
        let mut a = 0u32;
        let mut x = self.q;
        while x > 1 {
            x /= p;
            a += 1;
        }
        let need = if f % 2 == 0 { f } else { 2 * f };
        if self.field.degree() % (a * need) != 0 {
            return Err(Error::Field(format!(
                "fixed points of F^{f} need coefficients in GF(q^{need}); working field has degree {} over GF({p})",
                self.field.degree()
            )));
        }
        Ok(())
    }
}

/// Algorithms for the F^f-fixed points of a domain.
pub trait FixedPointStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn fixed_points(
        &self,
        w: &WindowModel,
        frob: &SemilinearFrobenius,
        query: &Query,
        f: u32,
        enumerator: &dyn SubspaceEnumerator,
    ) -> Result<Vec<LatticePoint>>;
}

/// Enumerates the whole domain over K, then keeps F^f(L) = L.
#[derive(Clone, Debug, Default)]
pub struct EnumerateFilter;

impl FixedPointStrategy for EnumerateFilter {
    fn name(&self) -> &'static str {
        "enumerate-filter"
    }

    fn fixed_points(
        &self,
        w: &WindowModel,
        frob: &SemilinearFrobenius,
        query: &Query,
        f: u32,
        enumerator: &dyn SubspaceEnumerator,
    ) -> Result<Vec<LatticePoint>> {
        frob.check_field(f)?;
        let all = enumerator.enumerate(w, query)?;
        Ok(all.into_par_iter().filter(|p| frob.is_fixed(&p.subspace, f)).collect())
    }
}

/// For odd f the fixed points are the stable Lagrangians of the hermitian
/// form h(x, y) = B(φ_{q^f} x, y) over K = GF(q^{2f}); they are reached by
/// growing h-isotropic stable subspaces one socle line at a time. For even
/// f every domain point over GF(q^f) is fixed.
#[derive(Clone, Debug, Default)]
pub struct LagrangianBfs {
    pub threads: Option<usize>,
}

struct Isotropy<'a> {
    field: &'a Gf,
    pairing: &'a Mat,
    power: u64,
}

impl Isotropy<'_> {
    fn conj(&self, x: Fe) -> Fe {
        self.field.pow(x, self.power)
    }
}

impl ChildFilter for Isotropy<'_> {
    fn constraints(&self, s: &Subspace) -> Vec<Vec<Fe>> {
        let f = self.field;
        let n = self.pairing.n;
        s.rows()
            .map(|r| {
                let mut out = vec![Fe::ZERO; n];
                for (a, &x) in r.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let cx = self.conj(x);
                    for (b, o) in out.iter_mut().enumerate() {
                        let p = self.pairing.get(a, b);
                        if !p.is_zero() {
                            *o = f.add(*o, f.mul(cx, p));
                        }
                    }
                }
                out
            })
            .collect()
    }

    fn accept(&self, _s: &Subspace, v: &[Fe]) -> bool {
        let f = self.field;
        let pv = self.pairing.apply(f, v);
        let mut acc = Fe::ZERO;
        for (&x, &y) in v.iter().zip(&pv) {
            if !x.is_zero() && !y.is_zero() {
                acc = f.add(acc, f.mul(self.conj(x), y));
            }
        }
        acc.is_zero()
    }
}

impl FixedPointStrategy for LagrangianBfs {
    fn name(&self) -> &'static str {
        "lagrangian-bfs"
    }

    fn fixed_points(
        &self,
        w: &WindowModel,
        frob: &SemilinearFrobenius,
        query: &Query,
        f: u32,
        enumerator: &dyn SubspaceEnumerator,
    ) -> Result<Vec<LatticePoint>> {
        frob.check_field(f)?;
        let candidates = if f % 2 == 0 {
            enumerator.enumerate(w, query)?
        } else {
            if frob.field.size() as u64 != frob.q.pow(2 * f) {
                return Err(Error::Field(format!(
                    "isotropic search needs K = GF(q^{}) exactly",
                    2 * f
                )));
            }
            let iso = Isotropy { field: &frob.field, pairing: &frob.pairing, power: frob.q.pow(f) };
            closure_bfs(w, query, Some(&iso), self.threads)?
        };
        Ok(candidates.into_par_iter().filter(|p| frob.is_fixed(&p.subspace, f)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_fields::ExtensionShape;

    #[test]
    fn discriminant_classes_follow_the_normalization() {
        let kp = Arc::new(Gf::new(3, 2).unwrap());
        let ctx = LocalContext::new(kp, 3);
        let e1 = RamifiedExtension::new(&ctx, 1, 1, ExtensionShape::Tame { alpha: Fe::ONE }, 30).unwrap();
        let e2 = RamifiedExtension::new(&ctx, 2, 2, ExtensionShape::Tame { alpha: Fe::ONE }, 30).unwrap();
        let h = HermitianStructure::new(&ctx, [&e1, &e2], &Default::default()).unwrap();
        for i in 0..2 {
            assert_eq!(h.discriminant_class(Parity::Plus, i).unwrap(), 0);
            assert_eq!(h.discriminant_class(Parity::Minus, i).unwrap(), 1);
        }
        let bad = [[None, Some(Series::monomial(Fe::ONE, 0))], [None, None]];
        assert!(HermitianStructure::new(&ctx, [&e1, &e2], &bad).is_err());
    }
}
