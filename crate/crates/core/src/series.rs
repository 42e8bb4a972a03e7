//! Truncated Laurent series over a finite field with pessimistic precision
//! tracking. A series stands for an element known modulo ϖ^prec.

use std::fmt;

use crate::error::{Error, Result};
use crate::finite_fields::{Fe, Gf};

/// Precision value meaning "known exactly".
pub const EXACT: i64 = i64::MAX / 4;

fn sat_add(a: i64, b: i64) -> i64 {
    if a >= EXACT || b >= EXACT {
        EXACT
    } else {
        (a + b).min(EXACT)
    }
}

/// Coefficient of ϖ^(val + j) sits at `coeffs[j]`. The leading coefficient
/// is nonzero; an empty list means "zero modulo ϖ^prec".
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Series {
    val: i64,
    coeffs: Vec<Fe>,
    prec: i64,
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .terms()
            .map(|(e, c)| format!("{}·ϖ^{}", c.0, e))
            .collect();
        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        if self.prec >= EXACT {
            write!(f, "{body}")
        } else {
            write!(f, "{body} + O(ϖ^{})", self.prec)
        }
    }
}

impl Series {
    pub fn exact_zero() -> Series {
        Series { val: EXACT, coeffs: Vec::new(), prec: EXACT }
    }

    /// Zero known modulo ϖ^prec.
    pub fn zero(prec: i64) -> Series {
        Series { val: prec, coeffs: Vec::new(), prec }
    }

    pub fn one() -> Series {
        Series::monomial(Fe::ONE, 0)
    }

    /// c·ϖ^e, exact.
    pub fn monomial(c: Fe, e: i64) -> Series {
        if c.is_zero() {
            return Series::exact_zero();
        }
        Series { val: e, coeffs: vec![c], prec: EXACT }
    }

    /// Builds Σ c·ϖ^e from (exponent, coefficient) pairs known modulo ϖ^prec.
    /// Repeated exponents are summed.
    pub fn from_terms(f: &Gf, terms: &[(i64, Fe)], prec: i64) -> Series {
        let live: Vec<&(i64, Fe)> = terms.iter().filter(|(e, _)| *e < prec).collect();
        if live.is_empty() {
            return Series::zero(prec);
        }
        let lo = live.iter().map(|t| t.0).min().unwrap();
        let hi = live.iter().map(|t| t.0).max().unwrap();
        let mut coeffs = vec![Fe::ZERO; (hi - lo + 1) as usize];
        for &&(e, c) in &live {
            let slot = &mut coeffs[(e - lo) as usize];
            *slot = f.add(*slot, c);
        }
        Series::normalize(lo, coeffs, prec)
    }

    /// Dense coefficients starting at exponent `start`.
    pub fn from_dense(start: i64, coeffs: Vec<Fe>, prec: i64) -> Series {
        Series::normalize(start, coeffs, prec)
    }

    fn normalize(start: i64, mut coeffs: Vec<Fe>, prec: i64) -> Series {
        if prec < EXACT {
            let keep = (prec - start).clamp(0, coeffs.len() as i64) as usize;
            coeffs.truncate(keep);
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        let lead = coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => Series { val: prec, coeffs: Vec::new(), prec },
            Some(i) => {
                coeffs.drain(..i);
                Series { val: start + i as i64, coeffs, prec }
            }
        }
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT
    }

    /// Valuation, if determined at this precision.
    pub fn valuation(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.val)
        }
    }

    /// A lower bound for the valuation (the precision when undetermined).
    pub fn val_bound(&self) -> i64 {
        if self.coeffs.is_empty() {
            self.prec
        } else {
            self.val
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.prec >= EXACT
    }

    /// Zero modulo its precision.
    pub fn is_zero_mod_prec(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of ϖ^e, or None when e is beyond the precision.
    pub fn coeff(&self, e: i64) -> Option<Fe> {
        if e >= self.prec {
            return None;
        }
        if self.coeffs.is_empty() || e < self.val {
            return Some(Fe::ZERO);
        }
        let j = (e - self.val) as usize;
        Some(self.coeffs.get(j).copied().unwrap_or(Fe::ZERO))
    }

    /// Coefficient of ϖ^e; panics when e is beyond the precision.
    pub fn c(&self, e: i64) -> Fe {
        self.coeff(e)
            .unwrap_or_else(|| panic!("coefficient of ϖ^{e} requested beyond precision {}", self.prec))
    }

    /// Nonzero terms as (exponent, coefficient).
    pub fn terms(&self) -> impl Iterator<Item = (i64, Fe)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(j, &c)| (self.val + j as i64, c))
    }

    /// Largest exponent carrying a nonzero coefficient.
    pub fn top_exponent(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.val + self.coeffs.len() as i64 - 1)
        }
    }

    pub fn leading_coeff(&self) -> Option<Fe> {
        self.coeffs.first().copied()
    }

    /// Lowers the precision to `prec` (never raises it).
    pub fn truncate(&self, prec: i64) -> Series {
        if prec >= self.prec {
            return self.clone();
        }
        if self.coeffs.is_empty() {
            return Series::zero(prec);
        }
        Series::normalize(self.val, self.coeffs.clone(), prec)
    }

    pub fn neg(&self, f: &Gf) -> Series {
        Series {
            val: self.val,
            coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect(),
            prec: self.prec,
        }
    }

    pub fn add(&self, other: &Series, f: &Gf) -> Series {
        let prec = self.prec.min(other.prec);
        let (a, b) = (&self.coeffs, &other.coeffs);
        if a.is_empty() {
            return other.truncate(prec);
        }
        if b.is_empty() {
            return self.truncate(prec);
        }
        let lo = self.val.min(other.val);
        let hi_a = self.val + a.len() as i64;
        let hi_b = other.val + b.len() as i64;
        let mut hi = hi_a.max(hi_b);
        if prec < EXACT {
            hi = hi.min(prec);
        }
        if hi <= lo {
            return Series::zero(prec);
        }
        let mut coeffs = vec![Fe::ZERO; (hi - lo) as usize];
        for (j, &c) in a.iter().enumerate() {
            let e = self.val + j as i64;
            if e < hi {
                coeffs[(e - lo) as usize] = c;
            }
        }
        for (j, &c) in b.iter().enumerate() {
            let e = other.val + j as i64;
            if e < hi {
                let s = &mut coeffs[(e - lo) as usize];
                *s = f.add(*s, c);
            }
        }
        Series::normalize(lo, coeffs, prec)
    }

    pub fn sub(&self, other: &Series, f: &Gf) -> Series {
        self.add(&other.neg(f), f)
    }

    pub fn mul(&self, other: &Series, f: &Gf) -> Series {
        self.mul_cap(other, f, EXACT)
    }

    /// Product known modulo ϖ^min(natural precision, cap).
    pub fn mul_cap(&self, other: &Series, f: &Gf, cap: i64) -> Series {
        let prec = sat_add(self.prec, other.val_bound())
            .min(sat_add(other.prec, self.val_bound()))
            .min(cap);
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Series::zero(prec);
        }
        let lo = self.val + other.val;
        let mut len = self.coeffs.len() + other.coeffs.len() - 1;
        if prec < EXACT {
            len = len.min((prec - lo).max(0) as usize);
        }
        let mut coeffs = vec![Fe::ZERO; len];
        for (i, &x) in self.coeffs.iter().enumerate() {
            if x.is_zero() || i >= len {
                continue;
            }
            let lim = (len - i).min(other.coeffs.len());
            for (j, &y) in other.coeffs[..lim].iter().enumerate() {
                if !y.is_zero() {
                    let s = &mut coeffs[i + j];
                    *s = f.add(*s, f.mul(x, y));
                }
            }
        }
        Series::normalize(lo, coeffs, prec)
    }

    pub fn scale(&self, c: Fe, f: &Gf) -> Series {
        if c.is_zero() {
            return Series::zero(self.prec);
        }
        Series {
            val: self.val,
            coeffs: self.coeffs.iter().map(|&x| f.mul(x, c)).collect(),
            prec: self.prec,
        }
    }

    /// Multiplication by ϖ^k.
    pub fn shift(&self, k: i64) -> Series {
        if self.coeffs.is_empty() {
            return Series::zero(sat_add(self.prec, k));
        }
        Series {
            val: self.val + k,
            coeffs: self.coeffs.clone(),
            prec: sat_add(self.prec, k),
        }
    }

    /// Inverse known to absolute precision at most `cap`.
    pub fn inv(&self, f: &Gf, cap: i64) -> Result<Series> {
        let v = self
            .valuation()
            .ok_or_else(|| Error::PrecisionExhausted("cannot invert a series of undetermined valuation".into()))?;
        let rel = if self.prec >= EXACT { EXACT } else { self.prec - v };
        let prec = if rel >= EXACT { cap } else { (rel - v).min(cap) };
        let n = (prec + v).max(0) as usize;
        let u0inv = f.inv(self.coeffs[0]).unwrap();
        let mut w = vec![Fe::ZERO; n];
        for k in 0..n {
            let mut acc = if k == 0 { Fe::ONE } else { Fe::ZERO };
            for j in 1..=k.min(self.coeffs.len().saturating_sub(1)) {
                acc = f.sub(acc, f.mul(self.coeffs[j], w[k - j]));
            }
            w[k] = f.mul(acc, u0inv);
        }
        Ok(Series::normalize(-v, w, prec))
    }

    pub fn div(&self, other: &Series, f: &Gf, cap: i64) -> Result<Series> {
        let inv = other.inv(f, sat_add(cap, -self.val_bound().min(cap)))?;
        Ok(self.mul(&inv, f).truncate(cap))
    }

    pub fn pow(&self, e: u32, f: &Gf, cap: i64) -> Series {
        let mut acc = Series::one();
        for _ in 0..e {
            acc = acc.mul(self, f).truncate(cap);
        }
        acc
    }

    /// Applies a coefficient map (e.g. a Frobenius).
    pub fn map_coeffs(&self, g: impl Fn(Fe) -> Fe) -> Series {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        Series::normalize(self.val, self.coeffs.iter().map(|&c| g(c)).collect(), self.prec)
    }

    /// Formal derivative d/dϖ.
    pub fn derivative(&self, f: &Gf) -> Series {
        let prec = sat_add(self.prec, -1);
        if self.coeffs.is_empty() {
            return Series::zero(prec);
        }
        let start = self.val - 1;
        let coeffs: Vec<Fe> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| f.mul(c, f.from_int(self.val + j as i64)))
            .collect();
        Series::normalize(start, coeffs, prec)
    }

    /// Substitutes ϖ := t, where t has positive valuation, capping the
    /// precision of the result at `cap`.
    pub fn substitute(&self, t: &Series, f: &Gf, cap: i64) -> Result<Series> {
        let vt = t
            .valuation()
            .filter(|&v| v > 0)
            .ok_or_else(|| Error::Series("substitution needs a series of positive valuation".into()))?;
        if self.coeffs.is_empty() {
            return Ok(Series::zero(if self.prec >= EXACT { EXACT } else { self.prec.saturating_mul(vt) }.min(cap)));
        }
        let mut acc = Series::exact_zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul_cap(t, f, cap).add(&Series::monomial(c, 0), f).truncate(cap);
        }
        let base = if self.val >= 0 {
            t.pow(self.val as u32, f, cap)
        } else {
            t.inv(f, cap)?.pow((-self.val) as u32, f, cap)
        };
        let mut out = acc.mul_cap(&base, f, cap);
        if self.prec < EXACT {
            out = out.truncate(self.prec.saturating_mul(vt));
        }
        Ok(out.truncate(cap))
    }
}
