use std::process::Command;

use serde_json::Value;
use superhaar::cli::{parse_spec, run, Outcome, SpecError, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
use superhaar::groups::{GroupError, GroupSpec};

fn superhaar(args: &[&str]) -> Outcome {
    run(std::iter::once("superhaar").chain(args.iter().copied()))
}

fn report(outcome: &Outcome) -> Value {
    serde_json::from_str(&outcome.text).expect("stdout is JSON")
}

#[test]
fn spec_strings() {
    assert_eq!(parse_spec("osp:m=2,n=1").unwrap(), GroupSpec::osp(2, 1).unwrap());
    assert_eq!(parse_spec("u:p=1,q=2").unwrap(), GroupSpec::unitary(1, 2).unwrap());
    assert_eq!(parse_spec(" uosp:m=1, n=1 ").unwrap(), GroupSpec::uosp(1, 1).unwrap());
    for bad in ["", "osp", "osp:m=1", "osp:n=1,m=1", "u:m=1,n=1", "sp:m=1,n=1", "osp:m=x,n=1", "osp:m=1,n=1,k=2"] {
        assert!(matches!(parse_spec(bad), Err(SpecError::Malformed(_))), "{bad:?}");
    }
    assert!(matches!(parse_spec("osp:m=0,n=1"), Err(SpecError::Group(GroupError::ZeroDimension(_)))));
}

#[test]
fn verify_all_on_u11_passes_exactly() {
    let outcome = superhaar(&["verify", "all", "--spec", "u:p=1,q=1"]);
    assert_eq!(outcome.code, EXIT_OK, "{}", outcome.text);
    let json = report(&outcome);
    assert_eq!(json["passed"], true);
    let invariance = json["checks"].as_array().unwrap().last().unwrap();
    assert!(invariance["detail"].as_str().unwrap().starts_with("16 deviations (16 exact)"));
}

#[test]
fn density_suite_on_osp21() {
    let outcome = superhaar(&["verify", "density", "--spec", "osp:m=2,n=1"]);
    assert_eq!(outcome.code, EXIT_OK, "{}", outcome.text);
    let json = report(&outcome);
    let checks = json["checks"].as_array().unwrap();
    assert!(checks.len() >= 3);
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn corrupted_density_fails() {
    let outcome = superhaar(&["verify", "density", "--spec", "osp:m=1,n=1", "--corrupt-density"]);
    assert_eq!(outcome.code, EXIT_FAILED);
    assert_eq!(report(&outcome)["passed"], false);
}

#[test]
fn density_suite_rejects_unitary() {
    let outcome = superhaar(&["verify", "density", "--spec", "u:p=1,q=1"]);
    assert_eq!(outcome.code, EXIT_FAILED);
}

#[test]
fn charts_and_algebra_on_osp() {
    for spec in ["osp:m=1,n=1", "osp:m=2,n=1"] {
        let outcome = superhaar(&["verify", "charts", "--spec", spec, "--points", "3"]);
        assert_eq!(outcome.code, EXIT_OK, "{}", outcome.text);
        let outcome = superhaar(&["verify", "algebra", "--spec", spec, "--points", "3", "--exhaustive"]);
        assert_eq!(outcome.code, EXIT_OK, "{}", outcome.text);
        assert!(outcome.text.contains("graded Jacobi identity"));
    }
}

#[test]
fn reports_are_byte_identical() {
    let args = ["verify", "invariance", "--spec", "osp:m=1,n=1", "--samples", "2000", "--seed", "7"];
    let first = superhaar(&args);
    assert_eq!(first, superhaar(&args));
    let other = superhaar(&["verify", "invariance", "--spec", "osp:m=1,n=1", "--samples", "2000", "--seed", "8"]);
    assert_ne!(first.text, other.text);
}

#[test]
fn integrate_exact_and_sampled() {
    let exact = report(&superhaar(&["integrate", "--spec", "u:p=1,q=1", "--monomial", "X[1,2]*Xs[2,1]"]));
    assert_eq!(exact["mode"], "exact-phase");
    assert_eq!(exact["estimate"]["re"], "2");
    assert_eq!(exact["estimate"]["im"], "0");

    let volume = report(&superhaar(&["integrate", "--spec", "osp:m=1,n=2", "--monomial", "1", "--mode", "mc"]));
    assert_eq!(volume["mode"], "exact-berezin-only");
    assert_eq!(volume["estimate"]["re"], "3/4");

    let sampled =
        report(&superhaar(&["integrate", "--spec", "osp:m=1,n=1", "--monomial", "X[2,2]", "--samples", "4000"]));
    assert_eq!(sampled["mode"], "monte-carlo");
    assert_eq!(sampled["samples"], 4000);
    assert!(sampled["stderr"].as_f64().unwrap() > 0.0);
}

#[test]
fn integrate_exact_needs_a_torus_or_no_classical_dependence() {
    let outcome = superhaar(&["integrate", "--spec", "osp:m=1,n=1", "--monomial", "X[2,2]", "--mode", "exact"]);
    assert_eq!(outcome.code, EXIT_USAGE);
}

#[test]
fn table_reports_mismatches() {
    let outcome = superhaar(&["table", "u11", "--max-exp", "1"]);
    assert_eq!(outcome.code, EXIT_FAILED);
    let json = report(&outcome);
    assert_eq!(json["cells"].as_array().unwrap().len(), 256);
    assert_eq!(json["mismatches"], 2);
}

#[test]
fn sample_is_reproducible() {
    let a = superhaar(&["sample", "--spec", "uosp:m=1,n=1", "--seed", "3"]);
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a, superhaar(&["sample", "--spec", "uosp:m=1,n=1", "--seed", "3"]));
    let json = report(&a);
    assert_eq!(json["matrix"]["N"], 2);
    assert_eq!(json["y"].as_array().unwrap().len(), 2);
}

#[test]
fn usage_errors() {
    for args in [
        &["verify", "all", "--spec", "bad"][..],
        &["verify", "everything", "--spec", "u:p=1,q=1"],
        &["integrate", "--spec", "u:p=1,q=1"],
        &["integrate", "--spec", "u:p=1,q=1", "--monomial", "X[3,3]"],
        &["frobnicate"],
    ] {
        assert_eq!(superhaar(args).code, EXIT_USAGE, "{args:?}");
    }
    assert_eq!(superhaar(&["--help"]).code, EXIT_OK);
}

#[test]
fn out_file_receives_the_report() {
    let path = std::env::temp_dir().join(format!("superhaar-cli-{}.json", std::process::id()));
    let outcome = superhaar(&["integrate", "--spec", "u:p=1,q=1", "--monomial", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(outcome.code, EXIT_OK);
    assert!(outcome.text.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(written["estimate"]["re"], "0");
}

#[test]
fn binary_exit_codes_and_seed_variable() {
    let bin = env!("CARGO_BIN_EXE_superhaar");
    let sample = |seed: Option<&str>, extra: &[&str]| {
        let mut command = Command::new(bin);
        command.args(["sample", "--spec", "osp:m=1,n=1"]).args(extra).env_remove("SUPERHAAR_SEED");
        if let Some(seed) = seed {
            command.env("SUPERHAAR_SEED", seed);
        }
        command.output().unwrap()
    };
    let from_env = sample(Some("11"), &[]);
    let from_flag = sample(None, &["--seed", "11"]);
    assert!(from_env.status.success());
    assert_eq!(from_env.stdout, from_flag.stdout);
    assert_ne!(from_env.stdout, sample(None, &[]).stdout);

    let bad = Command::new(bin).args(["verify", "all", "--spec", "osp:m=1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
    assert!(bad.stdout.is_empty());
    assert!(!bad.stderr.is_empty());

    let clean = Command::new(bin).args(["table", "u11", "--max-exp", "0"]).output().unwrap();
    assert_eq!(clean.status.code(), Some(EXIT_OK));
}
