use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use latorb::counting::{fundamental_domains, Counter, RunPlan};
use latorb::instance::{fixture, fixture_names, Instance, InstanceSpec, LoadOptions};
use latorb::lattice_window::window::dump_line;
use latorb::lattice_window::DEFAULT_CAP;
use latorb::local_fields::transfer_factor;
use latorb::registry::Registry;

#[derive(Parser)]
#[command(name = "latorb", version, about = "Lattice counts for unitary orbital integrals over local function fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print n_i, δ_i, m_i and r by every available route.
    Invariants {
        #[command(flatten)]
        common: Common,
    },
    /// Count lattices and check the identities; exit status reflects asserted checks only.
    Verify(VerifyArgs),
    /// Write the enumerated lattices of one model, one per line.
    Dump(DumpArgs),
    /// List the bundled instances.
    ListFixtures,
}

#[derive(Args)]
struct Common {
    /// Bundled instance name or path to an instance file.
    instance: String,
    /// Starting series precision (doubled on demand).
    #[arg(long)]
    precision: Option<i64>,
    /// Ceiling on stable subspaces visited per enumeration.
    #[arg(long)]
    cap: Option<usize>,
    /// Worker threads for enumeration.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "closure-bfs")]
    enumerator: String,
    #[arg(long = "fixed-points", default_value = "lagrangian-bfs")]
    fixed_points: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Frobenius powers for orbital integrals (default: the instance's run block).
    #[arg(long = "f", num_args = 1..)]
    f: Vec<u32>,
    /// Extension degrees over k' for counts (default: the instance's run block).
    #[arg(long = "e", num_args = 1..)]
    e: Vec<u32>,
    /// Check the stratum, partition and complement laws.
    #[arg(long)]
    strata: bool,
    /// Hom-dimension samples per degree.
    #[arg(long, num_args = 0..=1, default_missing_value = "20")]
    hom: Option<usize>,
    /// Fit the counts by polynomials in Q = q'^e.
    #[arg(long)]
    poly: bool,
    /// Run the structural invariant suite on every enumerated lattice.
    #[arg(long)]
    suite: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of tables.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    X,
    XPrime,
    Y1,
    Y2,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    common: Common,
    /// Output file.
    #[arg(long)]
    lattices: PathBuf,
    #[arg(long, default_value_t = 1)]
    e: u32,
    #[arg(long, value_enum, default_value = "x")]
    model: Model,
}

fn load_spec(arg: &str) -> Result<InstanceSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        Ok(InstanceSpec::from_json(&text)?)
    } else {
        fixture(arg).with_context(|| format!("{arg} is neither a file nor a bundled instance"))
    }
}

fn load(c: &Common) -> Result<Instance> {
    let spec = load_spec(&c.instance)?;
    let precision = c.precision.or(spec.run.precision);
    Ok(Instance::load(&spec, LoadOptions { precision, ..LoadOptions::default() })?)
}

fn counter<'a>(inst: &'a Instance, c: &Common, reg: &Registry) -> Result<Counter<'a>> {
    let cap = c.cap.or(inst.spec.run.cap).unwrap_or(DEFAULT_CAP);
    Ok(Counter::from_registry(inst, reg, &c.enumerator, &c.fixed_points, cap)?)
}

fn invariants(c: &Common) -> Result<ExitCode> {
    let inst = load(c)?;
    let inv = &inst.invariants;
    let rt = &inst.routes;
    let (sign, exp) = transfer_factor(inv.r);
    println!("instance {}  p={} q={}", inst.spec.name, inst.tower.p(), inst.q());
    for i in 0..2 {
        println!(
            "E{}: n={}  δ={} (derivative) {} (dt/dπ)  m={} (search) {} (formula)",
            i + 1,
            inv.n()[i],
            rt.delta_derivative[i],
            rt.delta_dt[i],
            rt.m_search[i],
            rt.m_formula[i]
        );
    }
    println!(
        "r={} (Sylvester) {} (P2(γ1)) {} (P1(γ2))  r'={}  parity={}",
        rt.r_sylvester,
        rt.r_via_gamma1,
        rt.r_via_gamma2,
        inv.r_prime,
        if inv.r_even { "even" } else { "odd" }
    );
    println!("transfer factor: sign {}  q^{}", if sign > 0 { "+" } else { "-" }, exp);
    let (x, xp) = fundamental_domains(inv);
    println!("domains: X = {}  X' = {}", x.label(), xp.label());
    if let Some(ok) = inst.valuation_bound_holds() {
        println!("valuation bound r ≥ min(n1 v2, n2 v1): {}", if ok { "holds" } else { "FAILS" });
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(a: &VerifyArgs) -> Result<ExitCode> {
    let inst = load(&a.common)?;
    let reg = Registry::with_defaults(a.common.threads);
    let counter = counter(&inst, &a.common, &reg)?;
    let run = &inst.spec.run;
    let plan = RunPlan {
        es: if a.e.is_empty() { run.e.clone() } else { a.e.clone() },
        fs: if a.f.is_empty() { run.f.clone() } else { a.f.clone() },
        strata: a.strata,
        hom_samples: a.hom,
        poly: a.poly,
        suite: a.suite,
        seed: a.seed.or(run.seed).unwrap_or(0),
    };
    let report = counter.run(&plan)?;
    let json = report.to_json();
    if let Some(out) = a.out.as_ref().or(run.report.as_ref().map(PathBuf::from).as_ref()) {
        fs::write(out, &json).with_context(|| format!("writing {}", out.display()))?;
    }
    if a.json {
        println!("{json}");
    } else {
        print!("{}", report.table());
    }
    let ok = report.asserted_ok();
    eprintln!("{}", if ok { "asserted checks: PASS" } else { "asserted checks: FAIL" });
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn dump(a: &DumpArgs) -> Result<ExitCode> {
    let inst = load(&a.common)?;
    let reg = Registry::with_defaults(a.common.threads);
    let counter = counter(&inst, &a.common, &reg)?;
    let (x, xp) = fundamental_domains(&inst.invariants);
    let points = match a.model {
        Model::X => counter.domain_points(a.e, &x)?,
        Model::XPrime => counter.domain_points(a.e, &xp)?,
        Model::Y1 => counter.y_points(a.e, 0)?,
        Model::Y2 => counter.y_points(a.e, 1)?,
    };
    let mut file = std::io::BufWriter::new(
        fs::File::create(&a.lattices).with_context(|| format!("creating {}", a.lattices.display()))?,
    );
    for p in points.iter() {
        writeln!(file, "{}", dump_line(p))?;
    }
    file.flush()?;
    println!("{} lattices written to {}", points.len(), a.lattices.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Invariants { common } => invariants(common),
        Command::Verify(a) => verify(a),
        Command::Dump(a) => dump(a),
        Command::ListFixtures => {
            for n in fixture_names() {
                println!("{n}");
            }
            Ok(ExitCode::SUCCESS)
        }
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
