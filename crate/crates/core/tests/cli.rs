use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn nmrqip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmrqip"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn report(o: &Output) -> serde_json::Value {
    serde_json::from_str(stdout(o).trim()).unwrap()
}

#[test]
fn synth_then_verify_c111() {
    let path = scratch("c111.pulses");
    let p = path.to_str().unwrap();
    let out = nmrqip(&[
        "synth",
        "--pattern",
        "111",
        "--angle",
        "pi",
        "--expand",
        "--out",
        p,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 7);

    let v = nmrqip(&["verify", p, "--target", "Cphase(111,pi)"]);
    assert_eq!(v.status.code(), Some(0), "{}", stderr(&v));
    let r = report(&v);
    assert_eq!(r["pass"], true);
    let phase = r["phase"].as_f64().unwrap();
    assert!((phase + std::f64::consts::PI / 8.0).abs() < 1e-9, "{phase}");

    let v = nmrqip(&[
        "verify",
        p,
        "--target",
        "Cphase(111,pi)",
        "--expected-phase",
        "-pi/8",
    ]);
    assert_eq!(v.status.code(), Some(0));
    let v = nmrqip(&[
        "verify",
        p,
        "--target",
        "Cphase(111,pi)",
        "--expected-phase",
        "pi/8",
    ]);
    assert_eq!(v.status.code(), Some(1));
}

#[test]
fn synth_verify_writes_report_to_stdout_with_out_file() {
    let path = scratch("c110_composite.pulses");
    let out = nmrqip(&[
        "synth",
        "--pattern",
        "110",
        "--angle",
        "pi",
        "--expand",
        "--composite",
        "--verify",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["pass"], true);
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 21);
}

#[test]
fn tampered_program_fails_verification() {
    let path = scratch("tampered.pulses");
    let good = nmrqip(&["synth", "--pattern", "110", "--angle", "pi", "--expand"]);
    let text = stdout(&good).replacen("z 1.5707963267948966 q2 pat=1*0", "z 1.5 q2 pat=1*0", 1);
    assert_ne!(text, stdout(&good));
    fs::write(&path, text).unwrap();
    let v = nmrqip(&[
        "verify",
        path.to_str().unwrap(),
        "--target",
        "Cphase(110,pi)",
    ]);
    assert_eq!(v.status.code(), Some(1));
    assert_eq!(report(&v)["pass"], false);
}

#[test]
fn verify_tolerance_is_honored() {
    let path = scratch("c111_composite.pulses");
    let p = path.to_str().unwrap();
    nmrqip(&[
        "synth",
        "--pattern",
        "111",
        "--angle",
        "pi/3",
        "--expand",
        "--composite",
        "--out",
        p,
    ]);
    let loose = nmrqip(&["verify", p, "--target", "Cphase(111,pi/3)", "--tol", "1e-9"]);
    assert_eq!(loose.status.code(), Some(0));
    let err = report(&loose)["max_err"].as_f64().unwrap();
    let tight = nmrqip(&[
        "verify",
        p,
        "--target",
        "Cphase(111,pi/3)",
        "--tol",
        "1e-300",
    ]);
    let expected = if err <= 1e-300 { 0 } else { 1 };
    assert_eq!(tight.status.code(), Some(expected));
}

#[test]
fn verify_parse_error_names_the_line() {
    let path = scratch("broken.pulses");
    fs::write(&path, "# header\nz pi q1 pat=*1\nq pi q2 pat=1*\n").unwrap();
    let v = nmrqip(&[
        "verify",
        path.to_str().unwrap(),
        "--target",
        "Cphase(11,pi)",
    ]);
    assert_eq!(v.status.code(), Some(2));
    assert!(stderr(&v).contains("line 3"), "{}", stderr(&v));
}

#[test]
fn verify_dimension_mismatch_is_an_error() {
    let path = scratch("two_qubit.pulses");
    fs::write(&path, "z pi q1 pat=*1\n").unwrap();
    let v = nmrqip(&[
        "verify",
        path.to_str().unwrap(),
        "--target",
        "Cphase(111,pi)",
    ]);
    assert_eq!(v.status.code(), Some(2));
}

#[test]
fn verify_swap_cascade_up_to_diagonal() {
    let path = scratch("swap13.pulses");
    fs::write(
        &path,
        "x pi q3 pat=00*\nx pi q1 pat=*00\nx pi q3 pat=00*\nx pi q3 pat=11*\nx pi q1 pat=*11\nx pi q3 pat=11*\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let global = nmrqip(&["verify", p, "--target", "SWAP(1,3)"]);
    assert_eq!(global.status.code(), Some(1));
    let diag = nmrqip(&["verify", p, "--target", "SWAP(1,3)", "--up-to", "diagonal"]);
    assert_eq!(diag.status.code(), Some(0), "{}", stdout(&diag));
    assert_eq!(
        report(&diag)["diagonal_phases"].as_array().unwrap().len(),
        8
    );
}

#[test]
fn grover_pulse_level_report() {
    let out = nmrqip(&[
        "grover", "-n", "3", "--target", "110", "--iters", "2", "--level", "pulse",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "most probable: |110> probability 0.94531\n");
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    for args in [
        &["grover", "--target", "101", "--json"][..],
        &["qft", "--input-period", "2", "--level", "pulse", "--json"][..],
        &["ppure", "--json"][..],
    ] {
        let a = nmrqip(args);
        let b = nmrqip(args);
        assert_eq!(a.status.code(), Some(0));
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn qft_json_to_file() {
    let path = scratch("qft.json");
    let out = nmrqip(&[
        "qft",
        "--input-period",
        "4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("output populations: 0.25000 0.00000 0.25000"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let output = &v["output"];
    assert_eq!(output["kind"], "state");
    assert_eq!(output["re"].as_array().unwrap().len(), 1);
}

#[test]
fn ppure_chart_goes_to_stderr() {
    let out = nmrqip(&["ppure", "--chart"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "deviation populations: 1.00000 -0.33333 -0.33333 -0.33333\n"
    );
    let err = stderr(&out);
    for label in [
        "[thermal]",
        "[x_q1_given_q2_1]",
        "[x_q2_given_q1_1]",
        "[crushed]",
    ] {
        assert!(err.contains(label), "{err}");
    }
}

#[test]
fn run_program_file() {
    let path = scratch("grover2.prog");
    fs::write(
        &path,
        "CHECKPOINT start\nH q=1,2\nCPHASE pat=01 angle=pi\nH q=1,2\nCPHASE pat=00 angle=pi\nH q=1,2\nCHECKPOINT done\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    for level in ["gate", "pulse"] {
        let out = nmrqip(&["run", p, "--level", level]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert_eq!(
            stdout(&out),
            "start: 1.00000 0.00000 0.00000 0.00000\ndone: 0.00000 1.00000 0.00000 0.00000\n"
        );
    }
    let out = nmrqip(&["run", p, "--density", "--json"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["done"]["kind"], "density");
}

#[test]
fn run_from_json_initial_state() {
    let prog = scratch("h1.prog");
    fs::write(&prog, "H q=1\nCHECKPOINT out\n").unwrap();
    let init = scratch("plus.json");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    fs::write(
        &init,
        format!(r#"{{"n_qubits":1,"kind":"state","re":[[{h},{h}]],"im":[[0,0]]}}"#),
    )
    .unwrap();
    let out = nmrqip(&[
        "run",
        prog.to_str().unwrap(),
        "--initial-json",
        init.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(
        stdout(&out).ends_with("out: 1.00000 0.00000\n"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn run_reports_bad_line() {
    let path = scratch("bad.prog");
    fs::write(&path, "H q=1\nCPHASE pat=1 angle=pi\nROTATE q=1\n").unwrap();
    let out = nmrqip(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn usage_errors() {
    assert_eq!(nmrqip(&[]).status.code(), Some(2));
    assert_eq!(nmrqip(&["synth", "--angle", "pi"]).status.code(), Some(2));
    assert_eq!(
        nmrqip(&["verify", "/nonexistent/file", "--target", "H(1)"])
            .status
            .code(),
        Some(2)
    );
    let out = nmrqip(&["synth", "--pattern", "eee", "--angle", "pi"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no conditioned qubits"));
}
