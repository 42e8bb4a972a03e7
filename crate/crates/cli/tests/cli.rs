use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn latorb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latorb")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("latorb-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn lists_fixtures() {
    let o = latorb(&["list-fixtures"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.lines().any(|l| l == "golden_q5"));
    assert!(s.lines().any(|l| l == "u11_r2_q3"));
}

#[test]
fn invariants_of_worked_example() {
    let o = latorb(&["invariants", "golden_q5"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("r=2 (Sylvester) 2 (P2(γ1)) 2 (P1(γ2))"), "{s}");
    assert!(s.contains("m=2 (search) 2 (formula)"));
    assert!(s.contains("X = X+[-1,-1]  X' = X-[0,0]"));
}

#[test]
fn verify_unitary_orbital_integrals() {
    let o = latorb(&["verify", "u11_r2_q3", "--f", "1", "2", "3", "--e", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for v in ["9", "81", "729"] {
        assert!(s.lines().any(|l| l.split_whitespace().any(|w| w == v)), "{v} missing in\n{s}");
    }
    assert!(String::from_utf8_lossy(&o.stderr).contains("asserted checks: PASS"));
}

#[test]
fn bad_instance_exits_with_two() {
    let o = latorb(&["verify", "invalid_not_coprime"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not coprime"));
    let o = latorb(&["invariants", "no_such_instance"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_report_parses_and_is_written() {
    let out = tmp("report.json");
    let o = latorb(&["verify", "u11_r1_q3", "--e", "1", "2", "--f", "1", "--hom", "3", "--json", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["degrees"][0]["x"], 10);
    assert_eq!(v["orbital"][0]["o_kappa"], -3);
    let file: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file, v);
}

#[test]
fn instance_file_path_is_accepted() {
    let path = tmp("n12.json");
    fs::write(&path, include_str!("../../core/fixtures/n12_r1_q3.json")).unwrap();
    let o = latorb(&["verify", path.to_str().unwrap(), "--e", "1", "--f", "2"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn dump_writes_one_line_per_lattice() {
    let lines = |args: &[&str], name: &str| {
        let path = tmp(name);
        let mut a = args.to_vec();
        a.extend(["--lattices", path.to_str().unwrap()]);
        let o = latorb(&a);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(path).unwrap()
    };
    // r = 0: X is Y1 × Y2
    let y = lines(&["dump", "n12_r0_m2_q3", "--model", "y2"], "y2.txt");
    let x = lines(&["dump", "n12_r0_m2_q3"], "x0.txt");
    assert_eq!(y.lines().count(), 10);
    assert_eq!(x.lines().count(), 10);
    let one = lines(&["dump", "u11_r1_q3", "--threads", "1"], "x1.txt");
    let many = lines(&["dump", "u11_r1_q3", "--threads", "4"], "x4.txt");
    assert_eq!(one.lines().count(), 10);
    assert_eq!(one, many);
}

#[test]
fn unknown_strategy_is_an_error() {
    let o = latorb(&["verify", "u11_r1_q3", "--enumerator", "guess"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn brute_force_strategies_give_the_same_table() {
    let a = latorb(&["verify", "n12_r1_q3", "--e", "1", "--f", "1", "2"]);
    let b = latorb(&["verify", "n12_r1_q3", "--e", "1", "--f", "1", "2", "--enumerator", "brute-force", "--fixed-points", "enumerate-filter"]);
    assert!(a.status.success() && b.status.success());
    let strip = |s: String| s.lines().filter(|l| !l.contains("brute-force") && !l.contains("closure-bfs")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(stdout(&a)), strip(stdout(&b)));
}
