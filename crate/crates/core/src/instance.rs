//! Instance descriptions (JSON), their validation against the standing
//! hypotheses, and the resolved invariants n_i, δ_i, m_i, r.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_fields::{Embedding, Fe, FieldTower, Gf, PrimeFieldParams};
use crate::hermitian_duality::HermitianStructure;
use crate::lattice_window::FactorAction;
use crate::local_fields::{
    conductor_formula, conductor_search, make_norm_one, resultant_orders, ExtensionShape, LocalContext,
    RamifiedExtension, ResultantOrders, TorusElement,
};
use crate::series::{Series, EXACT};

/// A series literal: (exponent, k'-coordinates) pairs; coordinates are
/// over GF(p), least significant first, and may be shortened.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesLit {
    pub terms: Vec<(i64, Vec<u32>)>,
    /// Absent means exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<i64>,
}

impl SeriesLit {
    pub fn to_series(&self, f: &Gf) -> Result<Series> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, coords) in &self.terms {
            let mut c = coords.clone();
            if c.len() > f.degree() as usize {
                return Err(Error::Instance(format!("coordinate list {coords:?} is longer than [k':GF(p)]")));
            }
            c.resize(f.degree() as usize, 0);
            terms.push((*e, f.from_coords(&c)?));
        }
        Ok(Series::from_terms(f, &terms, self.precision.unwrap_or(EXACT)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldBlock {
    pub p: u32,
    pub a: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_poly: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kprime_poly: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionBlock {
    pub degree: usize,
    /// a_0, …, a_{n−1} of the Eisenstein polynomial, as series in t.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eisenstein: Option<Vec<SeriesLit>>,
    /// ϖ_F = α ϖ_E^n with α ∈ k^× given by k'-coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tame_alpha: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleBlock {
    pub seed: u64,
    /// Number of π-adic coefficients of β to draw.
    pub terms: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<SeriesLit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleBlock>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaBlock {
    #[serde(default)]
    pub plus: [Option<SeriesLit>; 2],
    #[serde(default)]
    pub minus: [Option<SeriesLit>; 2],
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunBlock {
    #[serde(default)]
    pub f: Vec<u32>,
    #[serde(default)]
    pub e: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(default)]
    pub name: String,
    pub field: FieldBlock,
    pub extensions: [ExtensionBlock; 2],
    pub tori: [TorusBlock; 2],
    #[serde(default)]
    pub alpha: AlphaBlock,
    #[serde(default)]
    pub run: RunBlock,
}

impl InstanceSpec {
    pub fn from_json(text: &str) -> Result<InstanceSpec> {
        serde_json::from_str(text).map_err(|e| Error::Instance(format!("parse error: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// n_i, r, r′, m_i, δ_i.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceInvariants {
    pub n1: usize,
    pub n2: usize,
    pub r: i64,
    pub r_prime: i64,
    pub m1: i64,
    pub m2: i64,
    pub delta1: i64,
    pub delta2: i64,
    pub r_even: bool,
}

impl InstanceInvariants {
    pub fn m(&self) -> [i64; 2] {
        [self.m1, self.m2]
    }

    pub fn n(&self) -> [usize; 2] {
        [self.n1, self.n2]
    }
}

/// Every route to each invariant, kept for reporting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantRoutes {
    pub r_sylvester: i64,
    pub r_via_gamma1: i64,
    pub r_via_gamma2: i64,
    pub m_search: [i64; 2],
    pub m_formula: [i64; 2],
    pub delta_derivative: [i64; 2],
    pub delta_dt: [i64; 2],
    /// v_i = v(γ_i − a_i) (None when γ_i is constant).
    pub v: [Option<i64>; 2],
    pub residues_equal: bool,
}

impl InvariantRoutes {
    pub fn r_agrees(&self) -> bool {
        self.r_sylvester == self.r_via_gamma1 && self.r_via_gamma1 == self.r_via_gamma2
    }

    pub fn m_agrees(&self) -> bool {
        self.m_search == self.m_formula
    }

    pub fn delta_agrees(&self) -> bool {
        self.delta_derivative == self.delta_dt
    }
}

/// A validated instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub tower: Arc<FieldTower>,
    pub ctx: LocalContext,
    pub exts: [RamifiedExtension; 2],
    pub tori: [TorusElement; 2],
    pub hermitian: HermitianStructure,
    pub invariants: InstanceInvariants,
    pub routes: InvariantRoutes,
    pub precision: i64,
}

/// Loader knobs.
#[derive(Clone, Copy, Debug)]
pub struct LoadOptions {
    /// Starting π-adic precision (None: derived from the degrees).
    pub precision: Option<i64>,
    /// Doubling stops beyond this precision.
    pub max_precision: i64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { precision: None, max_precision: 1024 }
    }
}

impl Instance {
    pub fn load(spec: &InstanceSpec, opts: LoadOptions) -> Result<Instance> {
        let n = [spec.extensions[0].degree, spec.extensions[1].degree];
        let est = 4 * (n[0] * n[1] + n[0] + n[1] + 2) as i64;
        let mut prec = opts.precision.unwrap_or(est).max(8);
        loop {
            match Instance::load_at(spec, prec) {
                Ok(inst) => {
                    let need = inst.required_precision();
                    if inst.precision >= need {
                        return Ok(inst);
                    }
                    if need > opts.max_precision {
                        return Err(Error::PrecisionExhausted(format!(
                            "windows need precision {need} beyond the cap {}",
                            opts.max_precision
                        )));
                    }
                    prec = need.max(2 * prec).min(opts.max_precision);
                }
                Err(Error::PrecisionExhausted(msg)) => {
                    if prec >= opts.max_precision {
                        return Err(precision_to_hypothesis(msg));
                    }
                    prec = (2 * prec).min(opts.max_precision);
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Precision the window models of this instance need.
    fn required_precision(&self) -> i64 {
        let inv = &self.invariants;
        let nmax = inv.n1.max(inv.n2) as i64;
        let mmax = inv.m1.max(inv.m2);
        // domain windows, Y windows and the Hom window of height ~ n·r
        let domain = 2 * (mmax + inv.r_prime + 2) + 2;
        let hom = 2 * mmax + nmax * (inv.r + 2) + inv.r + 4;
        domain.max(hom).max(2 * (inv.delta1.max(inv.delta2) + mmax + inv.r + 4)) + 8
    }

    fn load_at(spec: &InstanceSpec, prec: i64) -> Result<Instance> {
        let fb = &spec.field;
        if fb.p == 2 {
            return Err(Error::hypothesis("p > 2", "characteristic 2 is excluded"));
        }
        let params = PrimeFieldParams::new(fb.p, fb.a, fb.k_poly.clone())
            .map_err(|e| Error::hypothesis("residue field", e.to_string()))?;
        let tower = FieldTower::build(params, &[1, 2], fb.kprime_poly.as_deref())
            .map_err(|e| Error::hypothesis("residue field", e.to_string()))?;
        let kp = tower.kprime();
        let ctx = LocalContext::new(kp.clone(), tower.q());
        let mut exts = Vec::with_capacity(2);
        for (i, eb) in spec.extensions.iter().enumerate() {
            let shape = match (&eb.eisenstein, &eb.tame_alpha) {
                (Some(coeffs), None) => ExtensionShape::Eisenstein(
                    coeffs.iter().map(|c| c.to_series(&kp)).collect::<Result<Vec<_>>>()?,
                ),
                (None, Some(a)) => {
                    let lit = SeriesLit { terms: vec![(0, a.clone())], precision: None };
                    let s = lit.to_series(&kp)?;
                    ExtensionShape::Tame { alpha: s.coeff(0).unwrap_or(Fe::ZERO) }
                }
                _ => {
                    return Err(Error::Instance(format!(
                        "extension {} needs exactly one of eisenstein / tame_alpha",
                        i + 1
                    )))
                }
            };
            exts.push(RamifiedExtension::new(&ctx, i as u8 + 1, eb.degree, shape, prec)?);
        }
        let exts: [RamifiedExtension; 2] = [exts[0].clone(), exts[1].clone()];
        let mut tori = Vec::with_capacity(2);
        for (i, tb) in spec.tori.iter().enumerate() {
            let beta = match (&tb.beta, &tb.sample) {
                (Some(b), None) => b.to_series(&kp)?,
                (None, Some(s)) => sample_unit(&kp, s.seed, s.terms),
                _ => return Err(Error::Instance(format!("torus {} needs exactly one of beta / sample", i + 1))),
            };
            tori.push(make_norm_one(&ctx, &exts[i], &beta, prec)?);
        }
        let tori: [TorusElement; 2] = [tori[0].clone(), tori[1].clone()];

        let mut delta_derivative = [0; 2];
        let mut delta_dt = [0; 2];
        for i in 0..2 {
            delta_derivative[i] = exts[i].different_exponent(&ctx)?;
            delta_dt[i] = exts[i].different_via_dt(&ctx)?;
        }
        let mut m_formula = [0; 2];
        let mut m_search = [0; 2];
        for i in 0..2 {
            m_formula[i] = conductor_formula(&ctx, &exts[i], &tori[i], prec)?;
            m_search[i] = conductor_search(&ctx, &exts[i], &tori[i], prec)?;
        }
        let ResultantOrders { sylvester, via_gamma1, via_gamma2 } =
            resultant_orders(&ctx, [&exts[0], &exts[1]], [&tori[0], &tori[1]], prec)?;
        // a valuation within a few steps of the precision is not trusted
        let n = [exts[0].degree, exts[1].degree];
        let guard = prec - (n[0].max(n[1]) as i64) * 2 - 2;
        if [via_gamma1, via_gamma2].iter().any(|&v| v >= guard)
            || m_formula.iter().zip(&delta_derivative).any(|(m, d)| m + d >= guard)
        {
            return Err(Error::PrecisionExhausted("resultant: valuation too close to working precision".into()));
        }
        let routes = InvariantRoutes {
            r_sylvester: sylvester,
            r_via_gamma1: via_gamma1,
            r_via_gamma2: via_gamma2,
            m_search,
            m_formula,
            delta_derivative,
            delta_dt,
            v: [tori[0].v_minus_residue(&kp), tori[1].v_minus_residue(&kp)],
            residues_equal: tori[0].residue == tori[1].residue,
        };
        if !routes.r_agrees() || !routes.m_agrees() || !routes.delta_agrees() {
            return Err(Error::Instance(format!("invariant routes disagree: {routes:?}")));
        }
        let overrides = [
            [opt_series(&spec.alpha.plus[0], &kp)?, opt_series(&spec.alpha.plus[1], &kp)?],
            [opt_series(&spec.alpha.minus[0], &kp)?, opt_series(&spec.alpha.minus[1], &kp)?],
        ];
        let hermitian = HermitianStructure::new(&ctx, [&exts[0], &exts[1]], &overrides)?;
        let r = sylvester;
        let invariants = InstanceInvariants {
            n1: n[0],
            n2: n[1],
            r,
            r_prime: r.div_euclid(2),
            m1: m_search[0],
            m2: m_search[1],
            delta1: delta_derivative[0],
            delta2: delta_derivative[1],
            r_even: r % 2 == 0,
        };
        Ok(Instance {
            spec: spec.clone(),
            tower: Arc::new(tower),
            ctx,
            exts,
            tori,
            hermitian,
            invariants,
            routes,
            precision: prec,
        })
    }

    pub fn q(&self) -> u64 {
        self.tower.q()
    }

    /// |k'_e|.
    pub fn qprime_e(&self, e: u32) -> u64 {
        self.q().pow(2 * e)
    }

    /// Tower extended with the levels d (degrees over k).
    pub fn field_level(&self, d: u32) -> Result<(Arc<Gf>, Embedding)> {
        let t = self.tower.with_levels(&[d])?;
        Ok((t.level(d)?, t.kprime_embedding(d)?.clone()))
    }

    /// t(π_i) and γ_i with coefficients pushed into the working field.
    pub fn actions(&self, emb: &Embedding) -> [FactorAction; 2] {
        [0, 1].map(|i| FactorAction {
            t_pi: self.exts[i].t_pi.map_coeffs(|c| emb.apply(c)),
            gamma: self.tori[i].gamma.map_coeffs(|c| emb.apply(c)),
        })
    }

    /// The bound r ≥ min(n1 v2, n2 v1), with equality when the two differ;
    /// meaningful when γ1 and γ2 have the same residue.
    pub fn valuation_bound_holds(&self) -> Option<bool> {
        if !self.routes.residues_equal {
            return None;
        }
        let [v1, v2] = self.routes.v;
        let n1 = self.invariants.n1 as i64;
        let n2 = self.invariants.n2 as i64;
        let big = i64::MAX / 8;
        let a = n1 * v2.unwrap_or(big);
        let b = n2 * v1.unwrap_or(big);
        let r = self.invariants.r;
        Some(if a != b { r == a.min(b) } else { r >= a })
    }

    /// The tame-case conductor formula m = (n−1)(v−1), where it applies.
    pub fn tame_conductor_formula(&self, i: usize) -> Option<i64> {
        let n = self.exts[i].degree as i64;
        let p = self.ctx.kp.p() as i64;
        let v = self.routes.v[i]?;
        if n == 1 {
            return Some(0);
        }
        if n % p != 0 && gcd(v, n) == 1 {
            Some((n - 1) * (v - 1))
        } else {
            None
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn opt_series(lit: &Option<SeriesLit>, f: &Gf) -> Result<Option<Series>> {
    lit.as_ref().map(|l| l.to_series(f)).transpose()
}

/// Names the violated hypothesis behind a valuation that never settled.
pub fn precision_to_hypothesis(msg: String) -> Error {
    if msg.starts_with("resultant") {
        Error::hypothesis("P1, P2 coprime", format!("not coprime: {msg}"))
    } else if msg.starts_with("discriminant") {
        Error::hypothesis("E'_i = F'[γ_i]", format!("γ does not generate E': {msg}"))
    } else if msg.starts_with("different") {
        Error::hypothesis("E_i/F separable", format!("inseparable: {msg}"))
    } else {
        Error::PrecisionExhausted(msg)
    }
}

/// A unit β = Σ_{j<terms} c_j π^j with uniformly drawn coefficients.
pub fn sample_unit(f: &Gf, seed: u64, terms: usize) -> Series {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = f.size();
    let mut t = Vec::with_capacity(terms.max(1));
    t.push((0, Fe(rng.gen_range(1..q))));
    for j in 1..terms as i64 {
        t.push((j, Fe(rng.gen_range(0..q))));
    }
    Series::from_terms(f, &t, EXACT)
}

/// Draws random valid instances over GF(p) with the given degrees, keeping
/// those with r ≤ max_r and m_i ≤ max_m.
pub fn random_instances(
    p: u32,
    degrees: [usize; 2],
    count: usize,
    seed: u64,
    max_r: i64,
    max_m: i64,
) -> Vec<(u64, Instance)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < count && tries < 200 * count.max(1) {
        tries += 1;
        let s = rng.gen::<u64>();
        let spec = InstanceSpec {
            name: format!("random_{s:016x}"),
            field: FieldBlock { p, a: 1, k_poly: None, kprime_poly: None },
            extensions: degrees.map(|d| ExtensionBlock { degree: d, eisenstein: None, tame_alpha: Some(vec![1]) }),
            tori: [
                TorusBlock { beta: None, sample: Some(SampleBlock { seed: s, terms: 4 }) },
                TorusBlock { beta: None, sample: Some(SampleBlock { seed: s ^ 0x9e37_79b9_7f4a_7c15, terms: 4 }) },
            ],
            alpha: AlphaBlock::default(),
            run: RunBlock::default(),
        };
        if let Ok(inst) = Instance::load(&spec, LoadOptions { precision: None, max_precision: 128 }) {
            let iv = inst.invariants;
            if iv.r <= max_r && iv.m1 <= max_m && iv.m2 <= max_m {
                out.push((s, inst));
            }
        }
    }
    out
}

macro_rules! fixtures {
    ($($name:literal),* $(,)?) => {
        /// Bundled instance files.
        pub const FIXTURES: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../fixtures/", $name, ".json")))),*
        ];
    };
}

fixtures!(
    "u11_r0_q3",
    "u11_r1_q3",
    "u11_r2_q3",
    "u11_r3_q3",
    "n12_r1_q3",
    "n12_r0_m2_q3",
    "n22_r2_q3",
    "n22_r2_m2_q3",
    "golden_q5",
    "invalid_char2",
    "invalid_reducible_k_poly",
    "invalid_not_eisenstein",
    "invalid_tame_wild",
    "invalid_beta_not_unit",
    "invalid_not_generator",
    "invalid_not_coprime",
    "invalid_alpha",
);

pub fn fixture(name: &str) -> Result<InstanceSpec> {
    FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| InstanceSpec::from_json(text))
        .unwrap_or_else(|| Err(Error::Instance(format!("no bundled instance named {name:?}"))))
}

pub fn fixture_names() -> Vec<&'static str> {
    FIXTURES.iter().map(|(n, _)| *n).collect()
}
