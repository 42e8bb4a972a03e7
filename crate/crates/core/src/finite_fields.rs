//! Finite fields GF(p^m) with table-driven arithmetic, and the tower
//! k = GF(q) ⊂ k' = GF(q²) ⊂ ... used throughout the crate.
//!
//! An element is stored as its coordinate vector over GF(p) in the power
//! basis of the defining polynomial, packed into one integer (constant
//! coefficient is the least significant base-p digit). Zero packs to 0 and
//! one packs to 1.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A field element, packed as base-p coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Largest field we are willing to tabulate.
pub const MAX_FIELD_SIZE: u64 = 1 << 24;

const NO_LOG: u32 = u32::MAX;

/// GF(p^m) with log/exp/Zech tables over a fixed primitive element.
pub struct Gf {
    p: u32,
    m: u32,
    size: u32,
    modulus: Vec<u32>,
    generator: Fe,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.m)
    }
}

impl Gf {
    /// Builds GF(p^m) from the smallest irreducible of degree m.
    pub fn new(p: u32, m: u32) -> Result<Gf> {
        check_prime(p)?;
        let modulus = smallest_irreducible(p, m);
        Gf::with_modulus(p, &modulus)
    }

    /// Builds GF(p^m) from a monic modulus given least-significant first.
    pub fn with_modulus(p: u32, modulus: &[u32]) -> Result<Gf> {
        check_prime(p)?;
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::Field(format!(
                "defining polynomial {modulus:?} must be monic of degree at least 1"
            )));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::Field(format!(
                "defining polynomial {modulus:?} has coefficients outside 0..{p}"
            )));
        }
        let m = (modulus.len() - 1) as u32;
        if !is_irreducible(p, modulus) {
            return Err(Error::Field(format!(
                "defining polynomial {modulus:?} is reducible over GF({p})"
            )));
        }
        let size64 = (p as u64).pow(m);
        if size64 > MAX_FIELD_SIZE {
            return Err(Error::Field(format!("GF({p}^{m}) is too large to tabulate")));
        }
        let size = size64 as u32;
        let order = size - 1;
        let factors = prime_factors(order as u64);
        let generator = (1..size)
            .find(|&g| {
                let gv = unpack(g, p, m);
                factors.iter().all(|&l| {
                    let e = order as u64 / l;
                    let w = poly_pow_mod(&gv, e, modulus, p);
                    !(w.len() == 1 && w[0] == 1)
                })
            })
            .expect("multiplicative group is cyclic");
        let gv = unpack(generator, p, m);
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![NO_LOG; size as usize];
        let mut cur = vec![1u32];
        for i in 0..order {
            let packed = pack(&cur, p);
            exp[i as usize] = packed;
            exp[(i + order) as usize] = packed;
            log[packed as usize] = i;
            cur = poly_mul_mod(&cur, &gv, modulus, p);
        }
        let mut zech = vec![NO_LOG; order as usize];
        for d in 0..order {
            let mut coords = unpack(exp[d as usize], p, m);
            coords[0] = (coords[0] + 1) % p;
            let s = pack(&coords, p);
            zech[d as usize] = if s == 0 { NO_LOG } else { log[s as usize] };
        }
        Ok(Gf {
            p,
            m,
            size,
            modulus: modulus.to_vec(),
            generator: Fe(generator),
            exp,
            log,
            zech,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> Fe {
        self.generator
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.size).map(Fe)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 {
            return b;
        }
        if b.0 == 0 {
            return a;
        }
        let order = self.size - 1;
        let la = self.log[a.0 as usize];
        let lb = self.log[b.0 as usize];
        let d = if lb >= la { lb - la } else { lb + order - la };
        let z = self.zech[d as usize];
        if z == NO_LOG {
            Fe::ZERO
        } else {
            Fe(self.exp[(la + z) as usize])
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a.0 == 0 {
            return a;
        }
        if self.p == 2 {
            return a;
        }
        let half = (self.size - 1) / 2;
        Fe(self.exp[(self.log[a.0 as usize] + half) as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        Fe(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    /// a·b + c
    #[inline]
    pub fn mul_add(&self, a: Fe, b: Fe, c: Fe) -> Fe {
        self.add(self.mul(a, b), c)
    }

    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.0 == 0 {
            return None;
        }
        let order = self.size - 1;
        let l = self.log[a.0 as usize];
        Some(Fe(self.exp[((order - l) % order) as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Option<Fe> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.0 == 0 {
            return Fe::ZERO;
        }
        let order = (self.size - 1) as u64;
        let l = self.log[a.0 as usize] as u64;
        Fe(self.exp[((l * (e % order)) % order) as usize])
    }

    /// Discrete log to the base of the fixed generator.
    pub fn log(&self, a: Fe) -> Option<u32> {
        if a.0 == 0 {
            None
        } else {
            Some(self.log[a.0 as usize])
        }
    }

    /// Generator raised to the power `e`.
    pub fn exp(&self, e: u64) -> Fe {
        let order = (self.size - 1) as u64;
        Fe(self.exp[(e % order) as usize])
    }

    /// The image of an integer under Z → GF(p) ⊂ GF(p^m).
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.p as i64) as u32)
    }

    /// x ↦ x^(p^k)
    pub fn frobenius_p(&self, a: Fe, k: u32) -> Fe {
        let e = (self.p as u64).pow(k % self.m.max(1));
        self.pow(a, e)
    }

    pub fn to_coords(&self, a: Fe) -> Vec<u32> {
        unpack(a.0, self.p, self.m)
    }

    pub fn from_coords(&self, coords: &[u32]) -> Result<Fe> {
        if coords.len() > self.m as usize {
            return Err(Error::Field(format!(
                "coordinate vector {coords:?} longer than field degree {}",
                self.m
            )));
        }
        if coords.iter().any(|&c| c >= self.p) {
            return Err(Error::Field(format!("coordinates {coords:?} not reduced mod {}", self.p)));
        }
        Ok(Fe(pack(coords, self.p)))
    }

    /// Evaluates a polynomial with GF(p) coefficients (least significant first) at `x`.
    pub fn eval_prime_poly(&self, coeffs: &[u32], x: Fe) -> Fe {
        let mut acc = Fe::ZERO;
        for &c in coeffs.iter().rev() {
            acc = self.add(self.mul(acc, x), Fe(c % self.p));
        }
        acc
    }
}

fn check_prime(p: u32) -> Result<()> {
    if p < 2 || !is_prime(p as u64) {
        return Err(Error::Field(format!("{p} is not prime")));
    }
    Ok(())
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn pack(coords: &[u32], p: u32) -> u32 {
    coords.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn unpack(mut x: u32, p: u32, m: u32) -> Vec<u32> {
    let mut out = vec![0; m.max(1) as usize];
    for c in out.iter_mut() {
        *c = x % p;
        x /= p;
    }
    out
}

// Dense polynomial helpers over GF(p); vectors are least significant first
// and trimmed of trailing zeros (the zero polynomial is empty).

fn trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = inv_mod_p(m[dm], p);
    while r.len() > dm {
        let top = r.len() - 1;
        let c = (r[top] as u64 * lead_inv as u64 % p as u64) as u32;
        if c != 0 {
            let shift = top - dm;
            for (i, &mi) in m.iter().enumerate() {
                let sub = (c as u64 * mi as u64 % p as u64) as u32;
                r[shift + i] = (r[shift + i] + p - sub) % p;
            }
        }
        trim(&mut r);
    }
    r
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let mut v: Vec<u32> = out.into_iter().map(|x| x as u32).collect();
    trim(&mut v);
    v
}

fn poly_mul_mod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    poly_rem(&poly_mul(a, b, p), m, p)
}

fn poly_pow_mod(a: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
    let mut result = vec![1u32];
    let mut base = poly_rem(a, m, p);
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mul_mod(&result, &base, m, p);
        }
        base = poly_mul_mod(&base, &base, m, p);
        e >>= 1;
    }
    poly_rem(&result, m, p)
}

fn poly_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let mut v: Vec<u32> = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut v);
    v
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

/// Rabin's test: f of degree m is irreducible iff x^(p^m) ≡ x mod f and
/// gcd(x^(p^(m/l)) − x, f) = 1 for every prime l dividing m.
pub fn is_irreducible(p: u32, f: &[u32]) -> bool {
    let mut f = f.to_vec();
    trim(&mut f);
    if f.len() < 2 {
        return false;
    }
    let m = (f.len() - 1) as u64;
    if m == 1 {
        return true;
    }
    let x = vec![0, 1];
    let frob_iter = |k: u64| -> Vec<u32> {
        let mut cur = x.clone();
        for _ in 0..k {
            cur = poly_pow_mod(&cur, p as u64, &f, p);
        }
        cur
    };
    if poly_sub(&frob_iter(m), &x, p) != Vec::<u32>::new() {
        return false;
    }
    for l in prime_factors(m) {
        let h = poly_sub(&frob_iter(m / l), &x, p);
        let g = poly_gcd(&f, &h, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// The monic irreducible of degree m over GF(p) whose lower coefficients,
/// read as a base-p integer (constant term least significant), are smallest.
pub fn smallest_irreducible(p: u32, m: u32) -> Vec<u32> {
    let count = (p as u64).pow(m);
    for code in 0..count {
        let mut f = unpack(code as u32, p, m);
        f.push(1);
        if is_irreducible(p, &f) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Ring map between two tabulated fields, given by a table on the source.
#[derive(Clone)]
pub struct Embedding {
    pub from_degree: u32,
    pub to_degree: u32,
    table: Vec<Fe>,
}

impl Embedding {
    #[inline]
    pub fn apply(&self, x: Fe) -> Fe {
        self.table[x.0 as usize]
    }

    /// Finds the embedding small → big sending the generator class x of
    /// small's power basis to the smallest root satisfying `accept`.
    pub fn find(
        small: &Gf,
        big: &Gf,
        accept: impl Fn(&Embedding) -> bool,
    ) -> Result<Embedding> {
        if small.p != big.p || big.m % small.m != 0 {
            return Err(Error::Field(format!("no embedding {small:?} → {big:?}")));
        }
        for rho in big.elements() {
            if !big.eval_prime_poly(small.modulus(), rho).is_zero() {
                continue;
            }
            if small.m > 1 && rho.is_zero() {
                continue;
            }
            let table: Vec<Fe> = small
                .elements()
                .map(|x| {
                    let coords = small.to_coords(x);
                    let mut acc = Fe::ZERO;
                    for &c in coords.iter().rev() {
                        acc = big.add(big.mul(acc, rho), Fe(c));
                    }
                    acc
                })
                .collect();
            let emb = Embedding {
                from_degree: small.m,
                to_degree: big.m,
                table,
            };
            if accept(&emb) {
                return Ok(emb);
            }
        }
        Err(Error::Field(format!("no compatible embedding {small:?} → {big:?}")))
    }
}

/// Parameters of the residue field k = GF(p^a).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeFieldParams {
    pub p: u32,
    pub a: u32,
    /// Defining polynomial of k over GF(p), least significant first.
    pub defining_poly: Vec<u32>,
}

impl PrimeFieldParams {
    /// Uses the deterministic smallest irreducible unless one is supplied.
    pub fn new(p: u32, a: u32, defining_poly: Option<Vec<u32>>) -> Result<Self> {
        check_prime(p)?;
        if p == 2 {
            return Err(Error::Field("characteristic 2 is excluded".into()));
        }
        if a == 0 {
            return Err(Error::Field("a must be positive".into()));
        }
        let defining_poly = match defining_poly {
            Some(f) => {
                if f.len() != a as usize + 1 {
                    return Err(Error::Field(format!(
                        "defining polynomial {f:?} must have degree a = {a}"
                    )));
                }
                if !is_irreducible(p, &f) || f[a as usize] != 1 {
                    return Err(Error::Field(format!(
                        "defining polynomial {f:?} is reducible or not monic over GF({p})"
                    )));
                }
                f
            }
            None => smallest_irreducible(p, a),
        };
        Ok(PrimeFieldParams { p, a, defining_poly })
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.a)
    }
}

/// An element tagged with the tower level (degree over k) it lives in.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtFieldElement {
    pub tower_level: u32,
    pub coeffs: Vec<u32>,
}

/// k = k_1 ⊂ k_2 = k' ⊂ ... with embeddings k_d ↪ k_d' for d | d'.
///
/// Embeddings out of k are fixed first (smallest root); an embedding
/// k_d ↪ k_d' is then the smallest root compatible with the chosen images
/// of k, and of k' when both levels contain k'.
pub struct FieldTower {
    params: PrimeFieldParams,
    levels: BTreeMap<u32, Arc<Gf>>,
    from_base: BTreeMap<u32, Embedding>,
    from_kprime: BTreeMap<u32, Embedding>,
    q: u64,
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldTower(q={}, levels={:?})", self.q, self.levels.keys().collect::<Vec<_>>())
    }
}

impl FieldTower {
    /// Builds the tower over k with the given degrees; `kprime_poly`
    /// optionally pins the defining polynomial of k' over GF(p).
    pub fn build(
        params: PrimeFieldParams,
        degrees: &[u32],
        kprime_poly: Option<&[u32]>,
    ) -> Result<FieldTower> {
        if !degrees.contains(&2) {
            return Err(Error::Field("tower degrees must include 2 (for k')".into()));
        }
        let p = params.p;
        let mut levels = BTreeMap::new();
        levels.insert(1, Arc::new(Gf::with_modulus(p, &params.defining_poly)?));
        let kp = match kprime_poly {
            Some(f) => {
                let g = Gf::with_modulus(p, f)?;
                if g.degree() != 2 * params.a {
                    return Err(Error::Field(format!(
                        "k' polynomial {f:?} must have degree {}",
                        2 * params.a
                    )));
                }
                g
            }
            None => Gf::new(p, 2 * params.a)?,
        };
        levels.insert(2, Arc::new(kp));
        let q = params.q();
        let mut tower = FieldTower {
            params,
            levels,
            from_base: BTreeMap::new(),
            from_kprime: BTreeMap::new(),
            q,
        };
        for &d in degrees {
            tower.ensure_level(d)?;
        }
        Ok(tower)
    }

    fn ensure_level(&mut self, d: u32) -> Result<()> {
        if d == 0 {
            return Err(Error::Field("extension degree must be positive".into()));
        }
        if !self.levels.contains_key(&d) {
            let g = Gf::new(self.params.p, self.params.a * d)?;
            self.levels.insert(d, Arc::new(g));
        }
        if !self.from_base.contains_key(&d) {
            let e = Embedding::find(&self.levels[&1], &self.levels[&d], |_| true)?;
            self.from_base.insert(d, e);
        }
        if d % 2 == 0 && !self.from_kprime.contains_key(&d) {
            let base = self.levels[&1].clone();
            let to_kp = self.from_base[&2].clone();
            let to_d = self.from_base[&d].clone();
            let e = Embedding::find(&self.levels[&2], &self.levels[&d], |emb| {
                base.elements().all(|x| emb.apply(to_kp.apply(x)) == to_d.apply(x))
            })?;
            self.from_kprime.insert(d, e);
        }
        Ok(())
    }

    /// Returns a tower extended by further levels (shares existing tables).
    pub fn with_levels(&self, degrees: &[u32]) -> Result<FieldTower> {
        let mut t = FieldTower {
            params: self.params.clone(),
            levels: self.levels.clone(),
            from_base: self.from_base.clone(),
            from_kprime: self.from_kprime.clone(),
            q: self.q,
        };
        for &d in degrees {
            t.ensure_level(d)?;
        }
        Ok(t)
    }

    pub fn params(&self) -> &PrimeFieldParams {
        &self.params
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u32 {
        self.params.p
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.levels.keys().copied().collect()
    }

    pub fn level(&self, d: u32) -> Result<Arc<Gf>> {
        self.levels
            .get(&d)
            .cloned()
            .ok_or_else(|| Error::Field(format!("tower has no level of degree {d}")))
    }

    pub fn k(&self) -> Arc<Gf> {
        self.levels[&1].clone()
    }

    pub fn kprime(&self) -> Arc<Gf> {
        self.levels[&2].clone()
    }

    pub fn base_embedding(&self, d: u32) -> Result<&Embedding> {
        self.from_base
            .get(&d)
            .ok_or_else(|| Error::Field(format!("no embedding k → k_{d}")))
    }

    pub fn kprime_embedding(&self, d: u32) -> Result<&Embedding> {
        self.from_kprime
            .get(&d)
            .ok_or_else(|| Error::Field(format!("no embedding k' → k_{d}")))
    }

    /// An embedding k_from ↪ k_to compatible with the embeddings of k
    /// (and of k' when both levels contain it).
    pub fn embedding(&self, from: u32, to: u32) -> Result<Embedding> {
        if to % from != 0 {
            return Err(Error::Field(format!("k_{from} does not embed in k_{to}")));
        }
        let small = self.level(from)?;
        let big = self.level(to)?;
        let kb_s = self.base_embedding(from)?;
        let kb_b = self.base_embedding(to)?;
        let base = self.k();
        let kp = self.kprime();
        let kp_pair = if from % 2 == 0 {
            Some((self.kprime_embedding(from)?, self.kprime_embedding(to)?))
        } else {
            None
        };
        Embedding::find(&small, &big, |emb| {
            base.elements().all(|x| emb.apply(kb_s.apply(x)) == kb_b.apply(x))
                && kp_pair.map_or(true, |(a, b)| {
                    kp.elements().all(|x| emb.apply(a.apply(x)) == b.apply(x))
                })
        })
    }

    /// σ on any level: x ↦ x^q.
    pub fn frobenius(&self, x: &ExtFieldElement) -> Result<ExtFieldElement> {
        let f = self.level(x.tower_level)?;
        let v = f.from_coords(&x.coeffs)?;
        let y = f.pow(v, self.q);
        Ok(ExtFieldElement {
            tower_level: x.tower_level,
            coeffs: f.to_coords(y),
        })
    }

    pub fn element(&self, level: u32, x: Fe) -> Result<ExtFieldElement> {
        let f = self.level(level)?;
        Ok(ExtFieldElement {
            tower_level: level,
            coeffs: f.to_coords(x),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_mul(f: &Gf, a: Fe, b: Fe) -> Fe {
        let x = f.to_coords(a);
        let y = f.to_coords(b);
        let prod = poly_mul_mod(&x, &y, f.modulus(), f.p());
        Fe(pack(&prod, f.p()))
    }

    fn naive_add(f: &Gf, a: Fe, b: Fe) -> Fe {
        let x = f.to_coords(a);
        let y = f.to_coords(b);
        let s: Vec<u32> = x.iter().zip(&y).map(|(u, v)| (u + v) % f.p()).collect();
        Fe(pack(&s, f.p()))
    }

    #[test]
    fn tables_agree_with_polynomial_arithmetic() {
        for (p, m) in [(3, 1), (3, 2), (5, 2), (3, 4), (7, 2)] {
            let f = Gf::new(p, m).unwrap();
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.add(a, b), naive_add(&f, a, b));
                    assert_eq!(f.mul(a, b), naive_mul(&f, a, b));
                }
            }
        }
    }

    #[test]
    fn smallest_irreducibles() {
        assert_eq!(smallest_irreducible(3, 2), vec![1, 0, 1]);
        assert_eq!(smallest_irreducible(5, 2), vec![2, 0, 1]);
        assert!(!is_irreducible(3, &[2, 0, 1]));
        assert!(is_irreducible(3, &[1, 2, 0, 1]));
    }

    #[test]
    fn sigma_on_gf81_over_gf9() {
        let params = PrimeFieldParams::new(3, 2, None).unwrap();
        let tower = FieldTower::build(params, &[1, 2], None).unwrap();
        let kp = tower.kprime();
        let k = tower.k();
        let emb = tower.base_embedding(2).unwrap();
        let image: std::collections::BTreeSet<Fe> = k.elements().map(|x| emb.apply(x)).collect();
        let mut fixed = std::collections::BTreeSet::new();
        for x in kp.elements() {
            let s = kp.pow(x, 9);
            assert_eq!(kp.pow(s, 9), x);
            if s == x {
                fixed.insert(x);
            }
        }
        assert_eq!(fixed, image);
        assert_eq!(fixed.len(), 9);
    }

    #[test]
    fn sigma_on_gf25() {
        let params = PrimeFieldParams::new(5, 1, None).unwrap();
        let tower = FieldTower::build(params, &[1, 2], None).unwrap();
        let kp = tower.kprime();
        let mut fixed = 0;
        for x in kp.elements() {
            let e = tower.element(2, x).unwrap();
            let s = tower.frobenius(&e).unwrap();
            assert_eq!(tower.frobenius(&s).unwrap(), e);
            if s == e {
                fixed += 1;
            }
        }
        assert_eq!(fixed, 5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PrimeFieldParams::new(9, 1, None).is_err());
        assert!(PrimeFieldParams::new(2, 1, None).is_err());
        assert!(PrimeFieldParams::new(3, 2, Some(vec![2, 0, 1])).is_err());
    }

    #[test]
    fn tower_embeddings_are_ring_maps() {
        let params = PrimeFieldParams::new(3, 1, None).unwrap();
        let tower = FieldTower::build(params, &[1, 2, 4, 6], None).unwrap();
        for (a, b) in [(1, 2), (2, 4), (2, 6), (1, 6)] {
            let e = tower.embedding(a, b).unwrap();
            let s = tower.level(a).unwrap();
            let t = tower.level(b).unwrap();
            for x in s.elements() {
                for y in s.elements() {
                    assert_eq!(e.apply(s.mul(x, y)), t.mul(e.apply(x), e.apply(y)));
                    assert_eq!(e.apply(s.add(x, y)), t.add(e.apply(x), e.apply(y)));
                }
                assert_eq!(e.apply(s.pow(x, 3)), t.pow(e.apply(x), 3));
            }
        }
    }
}
