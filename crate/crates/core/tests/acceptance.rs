//! One line per acceptance criterion. Runs as a plain binary so the lines
//! come out in order and unbuffered; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use latorb::counting::{fundamental_domains, Counter};
use latorb::hermitian_duality::LagrangianBfs;
use latorb::instance::{fixture, random_instances, Instance, LoadOptions};
use latorb::lattice_window::{BruteForce, ClosureBfs, Query, SubspaceEnumerator, WindowModel};
use latorb::Result;

const CAP: usize = 1 << 22;
const SEED: u64 = 0x5eed;

// Runtime ceilings. Counts themselves have zero tolerance.
const GOLDEN_BUDGET: Duration = Duration::from_secs(600);
const IDENTITY_BUDGET: Duration = Duration::from_secs(300);
const UNITARY_BUDGET: Duration = Duration::from_secs(300);

const HOM_SAMPLES: usize = 20;
const ORACLE_MAX_DIM: usize = 6;

/// Instances for the identity, stratum and hom criteria, with the degrees used.
const IDENTITY_SET: &[(&str, &[u32])] = &[
    ("u11_r0_q3", &[1, 2]),
    ("u11_r1_q3", &[1, 2]),
    ("u11_r2_q3", &[1, 2]),
    ("n12_r1_q3", &[1, 2]),
    ("n12_r0_m2_q3", &[1, 2]),
    ("n22_r2_q3", &[1, 2]),
    ("n22_r2_m2_q3", &[1]),
];

fn load(name: &str) -> Instance {
    Instance::load(&fixture(name).unwrap(), LoadOptions::default()).unwrap()
}

fn counter(inst: &Instance) -> Counter<'_> {
    Counter::new(inst, Arc::new(ClosureBfs::default()), Arc::new(LagrangianBfs::default()), CAP)
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn golden() -> Result<Outcome> {
    let t = Instant::now();
    let inst = load("golden_q5");
    let d = counter(&inst).count_x_models(1)?;
    let q = d.big_q;
    let want_x = q.pow(3) + 3 * q * q + q + 1;
    let want_xp = 2 * q * q + q + 1;
    let el = t.elapsed();
    let ok = q == 25 && d.x == 17526 && d.x == want_x && d.x_prime == 1276 && d.x_prime == want_xp
        && d.x - d.x_prime == q * q * (q + 1)
        && inst.invariants.r == 2
        && el < GOLDEN_BUDGET;
    Ok(Outcome { ok, detail: format!("|X|={} |X'|={} diff={} in {:.1?}", d.x, d.x_prime, d.x - d.x_prime, el) })
}

fn identity() -> Result<Outcome> {
    let t = Instant::now();
    let mut bad = Vec::new();
    let mut runs = 0;
    let mut rs = Vec::new();
    for &(name, es) in IDENTITY_SET {
        let inst = load(name);
        rs.push((inst.invariants.r, inst.invariants.m()));
        let c = counter(&inst);
        for &e in es {
            let d = c.count_x_models(e)?;
            runs += 1;
            if d.residual != 0 {
                bad.push(format!("{name} e={e} residual {}", d.residual));
            }
        }
    }
    let el = t.elapsed();
    let ok = bad.is_empty() && IDENTITY_SET.len() >= 5 && el < IDENTITY_BUDGET;
    Ok(Outcome { ok, detail: format!("{} instances, {runs} degree runs, (r,m) {:?}, {bad:?} in {:.1?}", IDENTITY_SET.len(), rs, el) })
}

fn unitary() -> Result<Outcome> {
    let t = Instant::now();
    let mut seen = Vec::new();
    let mut ok = true;
    for name in ["u11_r1_q3", "u11_r2_q3", "u11_r3_q3"] {
        let inst = load(name);
        let c = counter(&inst);
        let r = inst.invariants.r as u32;
        for f in [1, 2, 3] {
            let o = c.orbital_integrals(f)?;
            let want = if r % 2 == 0 { 1 } else { -1 } * 3i128.pow(r * f);
            ok &= o.asserted && o.o_kappa == want && o.so == 1;
            seen.push(o.o_kappa);
        }
    }
    let el = t.elapsed();
    Ok(Outcome { ok: ok && el < UNITARY_BUDGET, detail: format!("O_kappa {seen:?} in {el:.1?}") })
}

fn strata() -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut strata = 0;
    for &(name, es) in IDENTITY_SET {
        let inst = load(name);
        let c = counter(&inst);
        for &e in es {
            let rep = c.strata_report(e)?;
            strata += rep.checks.iter().filter(|s| s.full > 0).count();
            if !rep.holds() {
                bad.push(format!("{name} e={e}"));
            }
        }
    }
    Ok(Outcome { ok: bad.is_empty(), detail: format!("{strata} nonempty strata, failing {bad:?}") })
}

fn hom() -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut pairs = 0;
    let mut names: Vec<&str> = IDENTITY_SET.iter().map(|s| s.0).collect();
    names.push("golden_q5");
    for (k, name) in names.into_iter().enumerate() {
        let inst = load(name);
        let rep = counter(&inst).hom_samples(1, HOM_SAMPLES, SEED + k as u64)?;
        pairs += rep.samples.len();
        if !rep.holds() || rep.samples.len() < HOM_SAMPLES {
            bad.push(name);
        }
    }
    Ok(Outcome { ok: bad.is_empty(), detail: format!("{pairs} pairs, failing {bad:?}") })
}

fn suite() -> Result<Outcome> {
    let mut lattices = 0;
    let mut checks = 0;
    let mut violations = Vec::new();
    let mut run = |inst: &Instance, es: &[u32]| -> Result<()> {
        let c = counter(inst);
        for &e in es {
            let rep = c.invariant_suite(e)?;
            lattices += rep.lattices;
            checks += rep.checks;
            violations.extend(rep.violations.into_iter().map(|v| format!("{}: {v}", inst.spec.name)));
        }
        Ok(())
    };
    for &(name, _) in IDENTITY_SET {
        run(&load(name), &[1])?;
    }
    run(&load("golden_q5"), &[1])?;
    for (_, inst) in random_instances(3, [1, 2], 3, SEED, 2, 2) {
        run(&inst, &[1])?;
    }
    let head: Vec<_> = violations.iter().take(3).collect();
    Ok(Outcome {
        ok: violations.is_empty() && lattices > 0,
        detail: format!("{lattices} lattices, {checks} checks, {} violations {head:?}", violations.len()),
    })
}

fn same_points(w: &WindowModel, q: &Query) -> Result<bool> {
    let mut a: Vec<_> = ClosureBfs::default().enumerate(w, q)?.into_iter().map(|p| p.subspace).collect();
    let mut b: Vec<_> = BruteForce::default().enumerate(w, q)?.into_iter().map(|p| p.subspace).collect();
    a.sort();
    b.sort();
    Ok(a == b)
}

fn oracle() -> Result<Outcome> {
    let mut windows = 0;
    let mut bad = Vec::new();
    let mut insts: Vec<Instance> = IDENTITY_SET.iter().map(|s| load(s.0)).collect();
    for degrees in [[1, 1], [1, 2], [2, 2]] {
        insts.extend(random_instances(3, degrees, 3, SEED, 2, 2).into_iter().map(|x| x.1));
    }
    for inst in &insts {
        let c = counter(inst);
        // level 2 over GF(3) is GF(9)
        let lvl = c.level(2)?;
        let (x, xp) = fundamental_domains(&inst.invariants);
        let mut models = Vec::new();
        for dom in [x, xp] {
            if let Some((w, q)) = c.domain_model(&lvl, &dom)? {
                models.push((w.clone(), q));
                models.push((w, Query::all(CAP)));
            }
        }
        for i in 0..2 {
            models.push((c.y_model(&lvl, i)?, Query::all(CAP)));
        }
        for (w, q) in models {
            if w.dim() > ORACLE_MAX_DIM || w.dim() == 0 {
                continue;
            }
            windows += 1;
            if !same_points(&w, &q)? {
                bad.push(inst.spec.name.clone());
            }
        }
    }
    Ok(Outcome { ok: bad.is_empty() && windows > 0, detail: format!("{windows} windows over GF(9), failing {bad:?}") })
}

fn routes() -> Result<Outcome> {
    let mut n = 0;
    let mut bad = Vec::new();
    let mut insts: Vec<Instance> = Vec::new();
    for degrees in [[1, 1], [1, 2], [2, 2], [1, 3], [2, 3]] {
        insts.extend(random_instances(3, degrees, 4, SEED ^ 8, 3, 4).into_iter().map(|x| x.1));
        insts.extend(random_instances(5, degrees, 2, SEED ^ 8, 3, 4).into_iter().map(|x| x.1));
    }
    for inst in &insts {
        n += 1;
        let rt = &inst.routes;
        let tame = inst.invariants.n().map(|d| d as i64 - 1);
        let ok = rt.r_agrees() && rt.m_agrees() && rt.delta_agrees() && rt.delta_derivative == tame;
        if !ok {
            bad.push(inst.spec.name.clone());
        }
    }
    Ok(Outcome { ok: bad.is_empty() && n >= 20, detail: format!("{n} generated instances, failing {bad:?}") })
}

fn observational() -> Result<Outcome> {
    let mut lines = Vec::new();
    let mut flagged = true;
    for (name, fs) in [("n12_r1_q3", &[1, 3][..]), ("n12_r0_m2_q3", &[1, 3]), ("n22_r2_q3", &[1, 3]), ("golden_q5", &[1])] {
        let inst = load(name);
        let c = counter(&inst);
        for &f in fs {
            let o = c.orbital_integrals(f)?;
            flagged &= !o.asserted;
            lines.push(format!("{name} f={f} residual {}", o.residual));
        }
    }
    // observational only: the line passes as long as nothing here is asserted
    Ok(Outcome { ok: flagged, detail: format!("not asserted; {}", lines.join(", ")) })
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 9] = [
        ("golden counts q=5", golden),
        ("difference identity", identity),
        ("unitary rank-one orbital integrals", unitary),
        ("stratum law", strata),
        ("hom dimension", hom),
        ("invariant suite", suite),
        ("closure vs brute force", oracle),
        ("formula routes", routes),
        ("odd-f observations", observational),
    ];
    let mut all = true;
    for (k, (label, run)) in criteria.iter().enumerate() {
        let (ok, detail) = match run() {
            Ok(o) => (o.ok, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= ok;
        println!("criterion {} [{}] {label}: {detail}", k + 1, if ok { "PASS" } else { "FAIL" });
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
