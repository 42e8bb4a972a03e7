//! Local fields F' = k'((t)), totally ramified extensions E'_i given by an
//! Eisenstein polynomial in ϖ_{E_i}, norm-one units γ_i and the invariants
//! r (resultant order), m_i (conductor) and δ_i (different exponent).
//!
//! Elements of E'_i are Laurent series in π = ϖ_{E_i}; the uniformizer
//! t = ϖ_F is itself stored as a series t(π) solving the Eisenstein
//! equation. Elements of F' are Laurent series in t.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::finite_fields::{Fe, Gf};
use crate::linalg::Rref;
use crate::series::{Series, EXACT};

/// k' together with σ: x ↦ x^q.
#[derive(Clone, Debug)]
pub struct LocalContext {
    pub kp: Arc<Gf>,
    pub q: u64,
}

impl LocalContext {
    pub fn new(kp: Arc<Gf>, q: u64) -> LocalContext {
        LocalContext { kp, q }
    }

    pub fn sigma(&self, x: Fe) -> Fe {
        self.kp.pow(x, self.q)
    }

    pub fn sigma_series(&self, s: &Series) -> Series {
        s.map_coeffs(|c| self.sigma(c))
    }

    pub fn in_k(&self, x: Fe) -> bool {
        self.sigma(x) == x
    }

    pub fn series_in_k(&self, s: &Series) -> bool {
        s.terms().all(|(_, c)| self.in_k(c))
    }
}

/// How the extension is presented.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtensionShape {
    /// Coefficients a_0(t), …, a_{n-1}(t) of g(T) = T^n + Σ a_j(t) T^j.
    Eisenstein(Vec<Series>),
    /// ϖ_F = α·ϖ_E^n with α ∈ k^×; requires p ∤ n.
    Tame { alpha: Fe },
}

#[derive(Clone, Debug)]
pub struct RamifiedExtension {
    pub label: u8,
    pub degree: usize,
    pub shape: ExtensionShape,
    /// t = ϖ_F as a series in π = ϖ_E.
    pub t_pi: Series,
    /// π-adic precision the extension data was solved to.
    pub prec: i64,
}

impl RamifiedExtension {
    pub fn new(ctx: &LocalContext, label: u8, degree: usize, shape: ExtensionShape, prec: i64) -> Result<Self> {
        let f = &*ctx.kp;
        if degree == 0 {
            return Err(Error::hypothesis("extension degree", "degree must be positive"));
        }
        let t_pi = match &shape {
            ExtensionShape::Tame { alpha } => {
                if degree as u64 % ctx.kp.p() as u64 == 0 {
                    return Err(Error::hypothesis(
                        "tame shorthand",
                        format!("ϖ_F = α ϖ_E^n needs p ∤ n (n = {degree})"),
                    ));
                }
                if alpha.is_zero() || !ctx.in_k(*alpha) {
                    return Err(Error::hypothesis("tame shorthand", "α must be a nonzero element of k"));
                }
                Series::monomial(*alpha, degree as i64)
            }
            ExtensionShape::Eisenstein(a) => {
                validate_eisenstein(ctx, degree, a)?;
                solve_uniformizer(f, degree, a, prec)?
            }
        };
        Ok(RamifiedExtension { label, degree, shape, t_pi, prec })
    }

    /// Coefficients a_0(t), …, a_{n-1}(t) of the Eisenstein polynomial.
    pub fn eisenstein_coeffs(&self, f: &Gf) -> Vec<Series> {
        match &self.shape {
            ExtensionShape::Eisenstein(a) => a.clone(),
            ExtensionShape::Tame { alpha } => {
                let mut v = vec![Series::exact_zero(); self.degree];
                v[0] = Series::monomial(f.neg(f.inv(*alpha).unwrap()), 1);
                v
            }
        }
    }

    /// v_π(g'(π)); errors when the derivative vanishes to working precision.
    pub fn different_exponent(&self, ctx: &LocalContext) -> Result<i64> {
        let f = &*ctx.kp;
        let n = self.degree;
        let a = self.eisenstein_coeffs(f);
        let mut g = Series::monomial(f.from_int(n as i64), n as i64 - 1);
        for (j, aj) in a.iter().enumerate().skip(1) {
            let term = aj
                .substitute(&self.t_pi, f, self.prec)?
                .scale(f.from_int(j as i64), f)
                .shift(j as i64 - 1);
            g = g.add(&term, f);
        }
        g.truncate(self.prec).valuation().ok_or_else(|| {
            Error::PrecisionExhausted(format!(
                "different: g'(ϖ_E) vanishes modulo ϖ^{} for E_{}",
                self.prec, self.label
            ))
        })
    }

    /// Independent route to the different: v_π(dt/dπ).
    pub fn different_via_dt(&self, ctx: &LocalContext) -> Result<i64> {
        self.t_pi.derivative(&ctx.kp).valuation().ok_or_else(|| {
            Error::PrecisionExhausted(format!("different: dt/dϖ_E undetermined for E_{}", self.label))
        })
    }

    /// Writes x = Σ_{j<n} c_j(t) π^j with c_j ∈ F'.
    pub fn decompose(&self, ctx: &LocalContext, x: &Series) -> Result<Vec<Series>> {
        let f = &*ctx.kp;
        let n = self.degree as i64;
        let w0 = self.t_pi.leading_coeff().expect("uniformizer series is nonzero");
        let cap = if x.precision() >= EXACT { self.prec } else { self.prec.max(x.precision()) };
        let mut powers = TPowers::new(f, &self.t_pi, cap);
        let mut terms: Vec<Vec<(i64, Fe)>> = vec![Vec::new(); self.degree];
        let mut r = x.clone();
        let mut guard = 0usize;
        while let Some(e) = r.valuation() {
            let a = r.c(e);
            let s = e.div_euclid(n);
            let j = e.rem_euclid(n);
            let lead = if s >= 0 { f.pow(w0, s as u64) } else { f.inv(f.pow(w0, (-s) as u64)).unwrap() };
            let coeff = f.div(a, lead).unwrap();
            terms[j as usize].push((s, coeff));
            let sub = powers.get(s)?.shift(j).scale(coeff, f);
            r = r.sub(&sub, f);
            guard += 1;
            if guard > 1_000_000 {
                return Err(Error::Series("decomposition did not terminate".into()));
            }
        }
        let pf = r.precision();
        Ok((0..n)
            .map(|j| {
                let prec = if pf >= EXACT { EXACT } else { (pf - j).div_euclid(n) + i64::from((pf - j).rem_euclid(n) != 0) };
                Series::from_terms(f, &terms[j as usize], prec)
            })
            .collect())
    }

    /// Matrix of multiplication by x on the basis 1, π, …, π^{n−1}; entry
    /// [i][j] is the π^i-coordinate of x·π^j.
    pub fn multiplication_matrix(&self, ctx: &LocalContext, x: &Series) -> Result<Vec<Vec<Series>>> {
        let n = self.degree;
        let mut m = vec![vec![Series::exact_zero(); n]; n];
        for j in 0..n {
            let col = self.decompose(ctx, &x.shift(j as i64))?;
            for (i, c) in col.into_iter().enumerate() {
                m[i][j] = c;
            }
        }
        Ok(m)
    }

    /// tr_{E'/F'}(x) as a series in t.
    pub fn trace_to_fprime(&self, ctx: &LocalContext, x: &Series) -> Result<Series> {
        let m = self.multiplication_matrix(ctx, x)?;
        let f = &*ctx.kp;
        let mut acc = Series::exact_zero();
        for (i, row) in m.iter().enumerate() {
            acc = acc.add(&row[i], f);
        }
        Ok(acc)
    }

    /// N_{E'/F'}(x) as a series in t.
    pub fn norm_to_fprime(&self, ctx: &LocalContext, x: &Series) -> Result<Series> {
        let m = self.multiplication_matrix(ctx, x)?;
        let f = &*ctx.kp;
        let cp = charpoly(f, &m);
        let c0 = cp[0].clone();
        Ok(if self.degree % 2 == 0 { c0 } else { c0.neg(f) })
    }

    /// Substitutes t := t(π) into a series in t.
    pub fn to_pi(&self, ctx: &LocalContext, c: &Series, cap: i64) -> Result<Series> {
        c.substitute(&self.t_pi, &ctx.kp, cap)
    }
}

fn validate_eisenstein(ctx: &LocalContext, n: usize, a: &[Series]) -> Result<()> {
    if a.len() != n {
        return Err(Error::hypothesis(
            "Eisenstein polynomial",
            format!("expected {n} non-leading coefficients, got {}", a.len()),
        ));
    }
    for (j, aj) in a.iter().enumerate() {
        if !ctx.series_in_k(aj) {
            return Err(Error::hypothesis(
                "Eisenstein polynomial",
                format!("coefficient a_{j} must have coefficients in k"),
            ));
        }
        if aj.val_bound() < 1 {
            return Err(Error::hypothesis(
                "Eisenstein polynomial",
                format!("coefficient a_{j} must be divisible by ϖ_F"),
            ));
        }
    }
    if a[0].valuation() != Some(1) {
        return Err(Error::hypothesis(
            "Eisenstein polynomial",
            "constant coefficient must have valuation exactly 1",
        ));
    }
    Ok(())
}

/// Fixed-point iteration for t(π) from g(π) = 0, with g Eisenstein.
fn solve_uniformizer(f: &Gf, n: usize, a: &[Series], prec: i64) -> Result<Series> {
    let c = a[0].c(1);
    let cinv = f.inv(c).unwrap();
    let tail0 = a[0].sub(&Series::monomial(c, 1), f);
    let mut t = Series::monomial(f.neg(cinv), n as i64).truncate(prec);
    for _ in 0..(prec.max(1) as usize + 4) {
        let mut rhs = Series::monomial(Fe::ONE, n as i64);
        for (j, aj) in a.iter().enumerate().skip(1) {
            rhs = rhs.add(&aj.substitute(&t, f, prec)?.shift(j as i64), f);
        }
        rhs = rhs.add(&tail0.substitute(&t, f, prec)?, f);
        let next = rhs.scale(f.neg(cinv), f).truncate(prec);
        if next == t {
            return Ok(t);
        }
        t = next;
    }
    Err(Error::Series("uniformizer iteration did not converge".into()))
}

/// Cache of t^s for integer s.
struct TPowers<'a> {
    f: &'a Gf,
    t: &'a Series,
    cap: i64,
    cache: HashMap<i64, Series>,
}

impl<'a> TPowers<'a> {
    fn new(f: &'a Gf, t: &'a Series, cap: i64) -> Self {
        let mut cache = HashMap::new();
        cache.insert(0, Series::one());
        TPowers { f, t, cap, cache }
    }

    fn get(&mut self, s: i64) -> Result<Series> {
        if let Some(x) = self.cache.get(&s) {
            return Ok(x.clone());
        }
        let cap = self.cap + s.abs() * self.t.valuation().unwrap_or(1);
        let v = if s > 0 {
            self.get(s - 1)?.mul_cap(self.t, self.f, cap)
        } else {
            let tinv = match self.cache.get(&-1) {
                Some(x) => x.clone(),
                None => self.t.inv(self.f, cap)?,
            };
            if s == -1 {
                tinv
            } else {
                self.get(s + 1)?.mul_cap(&tinv, self.f, cap)
            }
        };
        self.cache.insert(s, v.clone());
        Ok(v)
    }
}

/// Characteristic polynomial det(xI − A) by Berkowitz's division-free
/// algorithm; coefficients are returned lowest degree first.
pub fn charpoly(f: &Gf, a: &[Vec<Series>]) -> Vec<Series> {
    let n = a.len();
    if n == 0 {
        return vec![Series::one()];
    }
    // highest degree first while building
    let mut c = vec![Series::one(), a[0][0].neg(f)];
    for r in 1..n {
        let mut tv = vec![Series::one(), a[r][r].neg(f)];
        let mut s: Vec<Series> = (0..r).map(|i| a[i][r].clone()).collect();
        for _ in 0..r {
            let mut rs = Series::exact_zero();
            for (j, sj) in s.iter().enumerate() {
                rs = rs.add(&a[r][j].mul(sj, f), f);
            }
            tv.push(rs.neg(f));
            let next: Vec<Series> = (0..r)
                .map(|i| {
                    let mut acc = Series::exact_zero();
                    for (j, sj) in s.iter().enumerate() {
                        acc = acc.add(&a[i][j].mul(sj, f), f);
                    }
                    acc
                })
                .collect();
            s = next;
        }
        let mut nc = Vec::with_capacity(r + 2);
        for i in 0..r + 2 {
            let mut acc = Series::exact_zero();
            for (j, cj) in c.iter().enumerate().take(i + 1) {
                acc = acc.add(&tv[i - j].mul(cj, f), f);
            }
            nc.push(acc);
        }
        c = nc;
    }
    c.reverse();
    c
}

/// Determinant via the characteristic polynomial.
pub fn determinant(f: &Gf, a: &[Vec<Series>]) -> Series {
    let cp = charpoly(f, a);
    if a.len() % 2 == 0 {
        cp[0].clone()
    } else {
        cp[0].neg(f)
    }
}

/// γ = β/σ(β) together with its characteristic polynomial over F'.
#[derive(Clone, Debug)]
pub struct TorusElement {
    pub label: u8,
    pub beta: Series,
    pub gamma: Series,
    /// Coefficients of P(T) over O_{F'}, lowest degree first, monic.
    pub min_poly: Vec<Series>,
    /// Residue of γ in k'.
    pub residue: Fe,
}

/// Hilbert 90: γ = β/σ(β) for a unit β, to π-adic precision `prec`.
pub fn make_norm_one(ctx: &LocalContext, ext: &RamifiedExtension, beta: &Series, prec: i64) -> Result<TorusElement> {
    let f = &*ctx.kp;
    if beta.valuation() != Some(0) {
        return Err(Error::hypothesis("β is a unit", format!("β = {beta:?} is not a unit of O_E'")));
    }
    let sb = ctx.sigma_series(beta);
    let gamma = beta.div(&sb, f, prec)?.truncate(prec);
    let check = gamma.mul(&ctx.sigma_series(&gamma), f).sub(&Series::one(), f);
    if !check.is_zero_mod_prec() {
        return Err(Error::hypothesis("γσ(γ) = 1", format!("γσ(γ) − 1 = {check:?}")));
    }
    torus_from_gamma(ctx, ext, beta.clone(), gamma)
}

/// Wraps a given norm-one unit γ.
pub fn torus_from_gamma(ctx: &LocalContext, ext: &RamifiedExtension, beta: Series, gamma: Series) -> Result<TorusElement> {
    let f = &*ctx.kp;
    if gamma.valuation() != Some(0) {
        return Err(Error::hypothesis("γ is a unit", format!("γ = {gamma:?} is not a unit")));
    }
    let check = gamma.mul(&ctx.sigma_series(&gamma), f).sub(&Series::one(), f);
    if !check.is_zero_mod_prec() {
        return Err(Error::hypothesis("γσ(γ) = 1", format!("γσ(γ) − 1 = {check:?}")));
    }
    let m = ext.multiplication_matrix(ctx, &gamma)?;
    let min_poly = charpoly(f, &m);
    let residue = gamma.c(0);
    Ok(TorusElement { label: ext.label, beta, gamma, min_poly, residue })
}

impl TorusElement {
    pub fn degree(&self) -> usize {
        self.min_poly.len() - 1
    }

    /// P(y) for y ∈ E'_j, where `target` carries the uniformizer t(π_j).
    pub fn eval_poly_at(&self, ctx: &LocalContext, target: &RamifiedExtension, y: &Series, cap: i64) -> Result<Series> {
        eval_poly(ctx, &self.min_poly, target, y, cap)
    }

    /// P'(T) coefficients.
    pub fn derivative_poly(&self, f: &Gf) -> Vec<Series> {
        self.min_poly
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale(f.from_int(k as i64), f))
            .collect()
    }

    /// v(γ − residue), if determined.
    pub fn v_minus_residue(&self, f: &Gf) -> Option<i64> {
        self.gamma.sub(&Series::monomial(self.residue, 0), f).valuation()
    }
}

/// Evaluates a polynomial with F'-coefficients at y ∈ E'_j.
pub fn eval_poly(ctx: &LocalContext, coeffs: &[Series], target: &RamifiedExtension, y: &Series, cap: i64) -> Result<Series> {
    let f = &*ctx.kp;
    let mut acc = Series::exact_zero();
    for c in coeffs.iter().rev() {
        let cp = target.to_pi(ctx, c, cap)?;
        acc = acc.mul_cap(y, f, cap).add(&cp, f).truncate(cap);
    }
    Ok(acc)
}

/// Sylvester matrix of two monic polynomials given lowest degree first.
pub fn sylvester(p1: &[Series], p2: &[Series]) -> Vec<Vec<Series>> {
    let n1 = p1.len() - 1;
    let n2 = p2.len() - 1;
    let size = n1 + n2;
    let mut m = vec![vec![Series::exact_zero(); size]; size];
    for row in 0..n2 {
        for (k, c) in p1.iter().rev().enumerate() {
            m[row][row + k] = c.clone();
        }
    }
    for row in 0..n1 {
        for (k, c) in p2.iter().rev().enumerate() {
            m[n2 + row][row + k] = c.clone();
        }
    }
    m
}

/// The three routes to r.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultantOrders {
    pub sylvester: i64,
    pub via_gamma1: i64,
    pub via_gamma2: i64,
}

pub fn resultant_orders(
    ctx: &LocalContext,
    ext: [&RamifiedExtension; 2],
    tori: [&TorusElement; 2],
    cap: i64,
) -> Result<ResultantOrders> {
    let f = &*ctx.kp;
    let syl = sylvester(&tori[0].min_poly, &tori[1].min_poly);
    let det = determinant(f, &syl);
    let sylvester = det.valuation().ok_or_else(|| {
        Error::PrecisionExhausted(format!("resultant: Sylvester determinant vanishes modulo t^{}", det.precision()))
    })?;
    let p2g1 = tori[1].eval_poly_at(ctx, ext[0], &tori[0].gamma, cap)?;
    let via_gamma1 = p2g1.valuation().ok_or_else(|| {
        Error::PrecisionExhausted("resultant: P2(γ1) vanishes to working precision".into())
    })?;
    let p1g2 = tori[0].eval_poly_at(ctx, ext[1], &tori[1].gamma, cap)?;
    let via_gamma2 = p1g2.valuation().ok_or_else(|| {
        Error::PrecisionExhausted("resultant: P1(γ2) vanishes to working precision".into())
    })?;
    Ok(ResultantOrders { sylvester, via_gamma1, via_gamma2 })
}

/// m = v(P'(γ)) − δ.
pub fn conductor_formula(ctx: &LocalContext, ext: &RamifiedExtension, t: &TorusElement, cap: i64) -> Result<i64> {
    let dp = t.derivative_poly(&ctx.kp);
    let val = eval_poly(ctx, &dp, ext, &t.gamma, cap)?.valuation().ok_or_else(|| {
        Error::PrecisionExhausted(format!(
            "discriminant: P'_{}(γ_{}) vanishes to working precision",
            t.label, t.label
        ))
    })?;
    Ok(val - ext.different_exponent(ctx)?)
}

/// Smallest m with π^m O_{E'} ⊂ O_{F'}[γ], found by spanning t^a γ^b
/// modulo π^L and enlarging L until the answer is at least n below L.
pub fn conductor_search(ctx: &LocalContext, ext: &RamifiedExtension, t: &TorusElement, max_len: i64) -> Result<i64> {
    let f = &*ctx.kp;
    let n = ext.degree as i64;
    let mut len = 2 * n + 2;
    loop {
        if len > max_len || t.gamma.precision() < len {
            return Err(Error::PrecisionExhausted(format!(
                "conductor search needs γ modulo ϖ^{len}"
            )));
        }
        let l = len as usize;
        let to_vec = |s: &Series| -> Vec<Fe> { (0..len).map(|e| s.c(e)).collect() };
        let mut span = Rref::new(l);
        let mut gpow = Series::one();
        for _b in 0..n {
            let mut tp = gpow.clone();
            while tp.val_bound() < len {
                span.insert(f, &to_vec(&tp.truncate(len)));
                tp = tp.mul_cap(&ext.t_pi, f, len);
            }
            gpow = gpow.mul_cap(&t.gamma, f, len);
        }
        let mut m = 0;
        for j in (0..l).rev() {
            let mut e = vec![Fe::ZERO; l];
            e[j] = Fe::ONE;
            if !span.contains(f, &e) {
                m = j as i64 + 1;
                break;
            }
        }
        if m + n <= len {
            return Ok(m);
        }
        len *= 2;
    }
}

/// (sign, exponent of q) of (−1)^r q^{−r}.
pub fn transfer_factor(r: i64) -> (i8, i64) {
    (if r % 2 == 0 { 1 } else { -1 }, -r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u32, a: u32) -> LocalContext {
        let kp = Arc::new(Gf::new(p, 2 * a).unwrap());
        LocalContext::new(kp, (p as u64).pow(a))
    }

    fn not_in_k(c: &LocalContext) -> Fe {
        c.kp.elements().find(|&x| !c.in_k(x)).unwrap()
    }

    #[test]
    fn trace_examples() {
        let c = ctx(3, 1);
        let f = &*c.kp;
        let e = RamifiedExtension::new(&c, 1, 2, ExtensionShape::Tame { alpha: Fe::ONE }, 40).unwrap();
        let tr1 = e.trace_to_fprime(&c, &Series::one()).unwrap();
        assert_eq!(tr1.terms().collect::<Vec<_>>(), vec![(0, f.from_int(2))]);
        let trp = e.trace_to_fprime(&c, &Series::monomial(Fe::ONE, 1)).unwrap();
        assert!(trp.is_zero_mod_prec());
    }

    #[test]
    fn eisenstein_solution_satisfies_equation() {
        let c = ctx(3, 1);
        let f = &*c.kp;
        // T^3 − tT − t over F_3: wild
        let mt = Series::monomial(f.from_int(-1), 1);
        let a = vec![mt.clone(), mt, Series::exact_zero()];
        let e = RamifiedExtension::new(&c, 1, 3, ExtensionShape::Eisenstein(a.clone()), 30).unwrap();
        let pi = Series::monomial(Fe::ONE, 1);
        let mut g = pi.pow(3, f, 30);
        for (j, aj) in a.iter().enumerate() {
            g = g.add(&aj.substitute(&e.t_pi, f, 30).unwrap().mul(&pi.pow(j as u32, f, 30), f), f);
        }
        assert!(g.truncate(30).is_zero_mod_prec());
        assert_eq!(e.different_exponent(&c).unwrap(), e.different_via_dt(&c).unwrap());
        assert_eq!(e.different_exponent(&c).unwrap(), 3);
    }

    #[test]
    fn norm_one_and_minpoly() {
        let c = ctx(5, 1);
        let f = &*c.kp;
        let cc = not_in_k(&c);
        let e = RamifiedExtension::new(&c, 2, 3, ExtensionShape::Tame { alpha: Fe::ONE }, 60).unwrap();
        let beta = Series::from_terms(f, &[(0, Fe::ONE), (1, cc)], EXACT);
        let t = make_norm_one(&c, &e, &beta, 60).unwrap();
        assert_eq!(t.v_minus_residue(f), Some(1));
        assert_eq!(t.degree(), 3);
        let pg = t.eval_poly_at(&c, &e, &t.gamma, 50).unwrap();
        assert!(pg.is_zero_mod_prec());
        assert_eq!(conductor_formula(&c, &e, &t, 50).unwrap(), 0);
        assert_eq!(conductor_search(&c, &e, &t, 50).unwrap(), 0);
    }

    #[test]
    fn tame_cubic_conductor_at_depth_two() {
        // n=3, q=5, v=2: (n−1)(v−1) = 2 by both routes
        let c = ctx(5, 1);
        let f = &*c.kp;
        let cc = not_in_k(&c);
        let e = RamifiedExtension::new(&c, 2, 3, ExtensionShape::Tame { alpha: Fe::ONE }, 60).unwrap();
        let beta = Series::from_terms(f, &[(0, Fe::ONE), (2, cc)], EXACT);
        let t = make_norm_one(&c, &e, &beta, 60).unwrap();
        assert_eq!(t.v_minus_residue(f), Some(2));
        assert_eq!(conductor_formula(&c, &e, &t, 60).unwrap(), 2);
        assert_eq!(conductor_search(&c, &e, &t, 60).unwrap(), 2);
    }
}
