use std::process::{Command, Output};

use nilfourier::grid::gowers_interval_norm;
use nilfourier::ideals::PrimeCache;
use nilfourier::numfield::builtin;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::Value;

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nilfourier"));
    cmd.args(args).env_remove("NILFOURIER_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
}

/// λ(n) on Z by trial division.
fn liouville(n: u64) -> f64 {
    let (mut m, mut count, mut p) = (n, 0u32, 2u64);
    while p * p <= m {
        while m % p == 0 {
            m /= p;
            count += 1;
        }
        p += 1;
    }
    if m > 1 {
        count += 1;
    }
    if count % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[test]
fn gowers_norm_of_liouville() {
    let v = json(&["gowers", "--field", "Q", "--fn", "liouville", "--N", "4096", "--d", "2"]);
    let norm = v["norm"].as_f64().unwrap();
    assert!(norm > 0.0 && norm < 0.2, "{norm}");
    let values: Vec<Complex64> = (1..=4096).map(|n| Complex64::new(liouville(n), 0.0)).collect();
    let oracle = gowers_interval_norm(&values, 1, 4096, 2, 8193).unwrap();
    assert!((norm - oracle).abs() < 1e-12);
    assert_eq!(v["n_star"], 8193);
}

#[test]
fn regularize_worked_example() {
    let v = json(&["regularize", "--field", "Qsqrt2", "--elem", "2+1w^1", "^4"]);
    assert_eq!(strings(&v["input"]), ["68", "48"]);
    assert_eq!(strings(&v["regularized"]), ["4", "0"]);
    assert_eq!(strings(&v["unit"]), ["17", "-12"]);
    assert_eq!(v["exponents"], serde_json::json!([4]));
    // the power may also be attached to the element in one argument
    assert_eq!(json(&["regularize", "--field", "Qsqrt2", "--elem", "2+1w^1 ^4"]), v);
}

#[test]
fn mobius_histogram_on_the_biquadratic_field() {
    let v = json(&["mobius", "--field", "Qsqrt2sqrt3", "--box", "20"]);
    let h = &v["histogram"];
    let count = |k: &str| h[k].as_u64().unwrap();
    assert_eq!(count("-1") + count("0") + count("1"), 41u64.pow(4) - 1);
    assert_eq!(v["points"], 41u64.pow(4) - 1);

    let k = builtin("Qsqrt2sqrt3").unwrap();
    let cache = PrimeCache::new(&k);
    let mut oracle = [0u64; 3];
    let counts: Vec<[u64; 3]> = (0..41i128.pow(4))
        .into_par_iter()
        .filter(|&i| i != (41i128.pow(4) - 1) / 2)
        .map(|i| {
            let c: Vec<i128> = (0..4).map(|t| (i / 41i128.pow(3 - t)) % 41 - 20).collect();
            let mut row = [0u64; 3];
            row[(cache.mobius_int(&c).unwrap() + 1) as usize] += 1;
            row
        })
        .collect();
    for r in counts {
        for t in 0..3 {
            oracle[t] += r[t];
        }
    }
    assert_eq!([count("-1"), count("0"), count("1")], oracle);
    // μ does take the value −1 on this field
    assert!(count("-1") > 0);
}

#[test]
fn mobius_histogram_csv() {
    let s = stdout(&["mobius", "--field", "Qi", "--box", "3", "--format", "csv"]);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "value,count");
    let total: u64 = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 48);
    assert_eq!(lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect::<Vec<_>>(), ["-1", "0", "1"]);
}

#[test]
fn field_info() {
    let v = json(&["field-info", "--field", "Qsqrt2"]);
    assert_eq!(v["degree"], 2);
    assert_eq!(v["discriminant"], "8");
    assert_eq!(v["signature"], serde_json::json!([2, 0]));
    assert_eq!(v["unit_rank"], 1);
    let v = json(&["field-info", "--field", "Qi"]);
    assert_eq!(v["discriminant"], "-4");
    assert_eq!(v["unit_rank"], 0);
    let csv = stdout(&["field-info", "--field", "Qi", "--format", "csv"]);
    assert!(csv.starts_with("key,value\n"));
    assert!(csv.lines().any(|l| l == "unit_rank,0"));
}

#[test]
fn field_definition_files() {
    let dir = std::env::temp_dir().join(format!("nilfourier-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("qsqrt5.txt");
    std::fs::write(&path, "label = Qsqrt5\ndegree = 2\npoly = -5,0,1\n").unwrap();
    let v = json(&["field-info", "--field", path.to_str().unwrap()]);
    assert_eq!(v["label"], "Qsqrt5");
    assert_eq!(v["discriminant"], "20");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_and_input_errors_exit_one() {
    assert_eq!(code(&["bogus"]), 1);
    assert_eq!(code(&["gowers", "--N", "10", "--nope"]), 1);
    assert_eq!(code(&["gowers"]), 1);
    assert_eq!(code(&["field-info", "--field", "Qnope"]), 1);
    assert_eq!(code(&["regularize", "--field", "Qsqrt2", "--elem", "2+x"]), 1);
    assert_eq!(code(&["gowers", "--N", "10", "--fn", "legendre:x"]), 1);
    let out = run_env(&["field-info"], &[("NILFOURIER_THREADS", "zero")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn precondition_errors_exit_two() {
    assert_eq!(code(&["tk", "--count", "0", "--N", "5"]), 2);
    assert_eq!(code(&["regularize", "--field", "Qsqrt2", "--elem", "0,0"]), 2);
    assert_eq!(code(&["katai", "--field", "Qi", "--N", "5", "--xi", "0.1"]), 2);
    assert_eq!(code(&["charsearch", "--coef", "2:0.7071", "--N", "100", "--c", "5", "--c0", "10"]), 2);
}

#[test]
fn unsupported_cases_exit_three() {
    assert_eq!(code(&["partreg-verify", "--quad", "1,1,0,0,0,0"]), 3);
}

#[test]
fn io_errors_exit_five() {
    assert_eq!(code(&["field-info", "--out", "/nonexistent-dir/x.json"]), 5);
    assert_eq!(code(&["gowers", "--N", "10", "--fn", "/nonexistent-dir/spec.txt"]), 5);
}

#[test]
fn out_flag_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("nilfourier-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("tk.json");
    let args = ["tk", "--field", "Qi", "--N", "12"];
    let direct = stdout(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let out = run(&with_out);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), direct);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn fixed_seed_output_is_byte_identical() {
    let args = ["katai", "--field", "Qi", "--fn", "random", "--seed", "7", "--N", "20", "--xi", "0.1,0.3"];
    let a = run_env(&args, &[("NILFOURIER_THREADS", "1")]);
    let b = run_env(&args, &[("NILFOURIER_THREADS", "4")]);
    let c = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let other = run(&["katai", "--field", "Qi", "--fn", "random", "--seed", "8", "--N", "20", "--xi", "0.1,0.3"]);
    assert_ne!(a.stdout, other.stdout);

    let v1 = stdout(&["partreg-verify", "--preset", "gerardin", "--trials", "5", "--seed", "11"]);
    let v2 = stdout(&["partreg-verify", "--preset", "gerardin", "--trials", "5", "--seed", "11"]);
    assert_eq!(v1, v2);
}

#[test]
fn tk_matches_a_direct_count() {
    let v = json(&["tk", "--field", "Q", "--count", "2", "--N", "30"]);
    assert_eq!(strings(&v["primes"]["norms"]), ["2", "3"]);
    // Σ_{|z| ≤ 30} |ω(z) − 5/6| with ω(0) = 2
    let a = 5.0 / 6.0;
    let direct: f64 = (-30i64..=30)
        .map(|z| {
            let w = [2, 3].iter().filter(|&&p| z % p == 0).count() as f64;
            (w - a).abs()
        })
        .sum();
    assert_eq!(v["report"]["lhs_exact"], "69/2");
    assert!((v["report"]["lhs"].as_f64().unwrap() - direct).abs() < 1e-9);
}

#[test]
fn katai_trivial_phase_against_one() {
    let v = json(&["katai", "--fn", "one", "--N", "60", "--xi", "0"]);
    let s = v["terms"]["s"].as_array().unwrap();
    assert!((s[0].as_f64().unwrap() - 120.0 / 121.0).abs() < 1e-12);
    assert_eq!(v["terms"]["a_p"], "31/30");
}

#[test]
fn aperiodicity_of_liouville() {
    let l = json(&["aperiodicity", "--fn", "liouville", "--N", "500"]);
    let one = json(&["aperiodicity", "--fn", "one", "--N", "500"]);
    assert!(l["stat"].as_f64().unwrap() < 0.2);
    assert!(one["stat"].as_f64().unwrap() > 0.9);
    assert_eq!(l["progressions"], one["progressions"]);
}

#[test]
fn decompose_report_and_grid() {
    let v = json(&["decompose", "--N", "64"]);
    assert_eq!(v["modulus"], 193);
    assert!(v["reconstruction_error"].as_f64().unwrap() == 0.0);
    assert!(v["max_structured"].as_f64().unwrap() <= 1.0);
    let s = stdout(&["decompose", "--N", "64", "--format", "csv", "--part", "uniform"]);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "index0,re,im");
    assert_eq!(lines.len(), 194);
}

#[test]
fn equid_on_a_periodic_and_an_irrational_orbit() {
    let v = json(&["equid", "--coef", "1:1/2,0", "--N", "200"]);
    assert_eq!(v["best_test"], "horizontal [0, 1]");
    assert!((v["max_correlation"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["equidistributed"], false);

    let v = json(&["equid", "--coef", "1:1.4142135623730951", "--N", "2000", "--epsilon", "0.05"]);
    assert_eq!(v["equidistributed"], true);

    let s = stdout(&["equid", "--coef", "1:1/2,0", "--N", "2", "--format", "csv"]);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "n0,c0,c1");
    assert_eq!(lines[1], "-2,0,0");
    assert_eq!(lines.len(), 6);
}

#[test]
fn charsearch_with_witness() {
    let v = json(&["charsearch", "--coef", "2:1/2", "--N", "100", "--c", "5", "--c0", "10"]);
    assert_eq!(v["ell"], serde_json::json!([2]));
    assert_eq!(v["smooth_norm"], 0.0);
    assert_eq!(v["witness"]["correlation"], 1.0);
    let v = json(&["charsearch", "--coef", "1:0.5", "--N", "100", "--c", "5"]);
    assert_eq!(v["witness"], Value::Null);
}

#[test]
fn forms_eigenproducts() {
    let v = json(&["forms", "--field", "Qi", "--p", "1+1w^1", "--m-max", "1"]);
    assert_eq!(strings(&v["eigenproducts"]["f0"]), ["2", "-2", "1"]);
    let v = json(&["forms", "--field", "Q", "--p", "-2", "--q", "1", "--m-max", "1"]);
    assert_eq!(strings(&v["eigenproducts"]["f0"]), ["2", "1"]);
}

#[test]
fn partreg_commands() {
    let v = json(&["partreg-verify", "--preset", "gerardin", "--trials", "5"]);
    assert_eq!(v["report"]["symbolic_zero"], true);
    assert!(v["report"]["evaluations"].as_u64().unwrap() > 0);

    let v = json(&["partreg-search", "--quad", "1,1,-1,0,0,0", "--coloring", "parity"]);
    assert_eq!(v["result"]["outcome"], "witness");
    let x: Vec<i64> = strings(&v["result"]["x"]).iter().map(|s| s.parse().unwrap()).collect();
    let y: Vec<i64> = strings(&v["result"]["y"]).iter().map(|s| s.parse().unwrap()).collect();
    let parity = |c: &[i64]| c.iter().map(|v| v.rem_euclid(2)).collect::<Vec<_>>();
    assert_eq!(parity(&x), parity(&y));
    assert_ne!(x, y);
}

#[test]
fn folner_and_mult_average() {
    let v = json(&["folner", "--field", "Qi", "--N", "1", "--a", "2,1"]);
    let size = v["set"]["size"].as_u64().unwrap();
    assert!(size > 0);
    assert_eq!(v["ratio"]["size"], size);
    let csv = stdout(&["folner", "--field", "Qi", "--N", "1", "--format", "csv"]);
    assert_eq!(csv.lines().next(), Some("c0,c1"));
    assert_eq!(csv.lines().count() as u64, size + 1);

    let v = json(&["mult-average", "--fn", "one", "--shifts", "1;2", "--shifts-prime", "3;4", "--N", "10"]);
    assert_eq!(v["average"]["pairs"], 100);
    assert_eq!(v["average"]["value"], serde_json::json!([1.0, 0.0]));
}

#[test]
fn help_documents_csv_columns() {
    for cmd in [
        "field-info",
        "mobius",
        "aperiodicity",
        "gowers",
        "decompose",
        "katai",
        "tk",
        "equid",
        "charsearch",
        "forms",
        "regularize",
        "partreg-verify",
        "partreg-search",
        "folner",
        "mult-average",
    ] {
        let out = run(&[cmd, "--help"]);
        assert!(out.status.success());
        assert!(String::from_utf8_lossy(&out.stdout).contains("CSV columns:"), "{cmd}");
    }
}
