use std::path::Path;
use std::process::Command as Process;

use christoffel::cli_io::{
    read_field_csv, read_field_csv_path, run, write_field_csv, Command, FieldSource, Family, RunConfig, EXIT_ERROR,
    EXIT_FAILS, EXIT_OK,
};
use christoffel::harmonics::SphericalField;
use christoffel::sphere::make_grid;
use christoffel::Error;

const BIN: &str = env!("CARGO_BIN_EXE_christoffel");

fn cli(args: &[&str], dir: &Path) -> (i32, serde_json::Value) {
    let report = dir.join("report.json");
    let out = Process::new(BIN)
        .args(args)
        .arg("--report")
        .arg(&report)
        .output()
        .expect("binary runs");
    let json = std::fs::read_to_string(&report).expect("report written");
    (out.status.code().unwrap(), serde_json::from_str(&json).unwrap())
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let small = ["--L", "16", "--Lmax", "10", "--random-witnesses", "2"];
    let cases = [
        ("family:harmonic:l=2,m=0,eps=0.5,base=2", EXIT_OK, "holds"),
        ("family:harmonic:l=2,m=0,eps=4,base=2", EXIT_FAILS, "fails"),
    ];
    for (input, code, verdict) in cases {
        let mut args = vec!["check", "--input", input];
        args.extend(small);
        let (c, r) = cli(&args, dir.path());
        assert_eq!(c, code, "{input}");
        assert_eq!(r["verdict"], verdict);
        assert_eq!(r["exit_code"], code);
        for crit in ["cr1", "cr2"] {
            assert_eq!(r["convexity"]["criteria"][crit]["verdict"], verdict);
        }
    }
    let (c, r) = cli(&["check", "--input", "family:harmonic:l=1,m=0,eps=0.5,base=2"], dir.path());
    assert_eq!(c, EXIT_ERROR);
    assert_eq!(r["error"]["name"], "OrthogonalityViolation");
    let (c, r) = cli(&["solve", "--input", "family:harmonic:l=2,m=0,eps=9,base=2"], dir.path());
    assert_eq!(c, EXIT_ERROR);
    assert_eq!(r["error"]["name"], "NotPositive");
    let (c, r) = cli(&["solve", "--input", "family:cube:a=1"], dir.path());
    assert_eq!(c, EXIT_ERROR);
    assert_eq!(r["error"]["name"], "InvalidParameter");
    let (c, r) = cli(&["solve", "--input", "family:constant:c=1", "--L", "8", "--Lmax", "12"], dir.path());
    assert_eq!(c, EXIT_ERROR);
    assert_eq!(r["error"]["name"], "BandLimitExceeded");
}

#[test]
fn clap_rejects_unknown_command() {
    let out = Process::new(BIN).arg("frobnicate").output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn csv_round_trip_is_exact() {
    let grid = make_grid(12).unwrap();
    let f = SphericalField::from_fn(grid.clone(), |x| 1.0 + x.coords()[0] * x.coords()[1] / 3.0);
    let mut buf = Vec::new();
    write_field_csv(&f, &mut buf).unwrap();
    let back = read_field_csv(buf.as_slice(), &grid).unwrap();
    assert_eq!(back.values(), f.values());
}

#[test]
fn csv_errors() {
    let grid = make_grid(8).unwrap();
    let e = read_field_csv("x,y,z\n".as_bytes(), &grid).unwrap_err();
    assert!(matches!(e, Error::ParseError { line: 1, .. }));
    let e = read_field_csv("theta,phi,value\n0.1,0.0,1\n".as_bytes(), &grid).unwrap_err();
    assert!(matches!(e, Error::GridMismatch(_)), "{e}");
    let f = SphericalField::from_fn(grid.clone(), |_| 1.0);
    let mut buf = Vec::new();
    write_field_csv(&f, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap().replacen(",1\n", ",one\n", 1);
    let e = read_field_csv(text.as_bytes(), &grid).unwrap_err();
    assert!(matches!(e, Error::ParseError { line: 2, .. }), "{e}");
    let other = make_grid(10).unwrap();
    let mut buf = Vec::new();
    write_field_csv(&f, &mut buf).unwrap();
    assert!(matches!(read_field_csv(buf.as_slice(), &other), Err(Error::GridMismatch(_))));
}

#[test]
fn solve_writes_u_and_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let u_path = dir.path().join("u.csv");
    let obj = dir.path().join("body.obj");
    let (c, r) = cli(
        &[
            "solve",
            "--input",
            "family:ellipsoid:a=1,b=1.2,c=0.8",
            "--L",
            "24",
            "--Lmax",
            "16",
            "--out",
            u_path.to_str().unwrap(),
            "--obj",
            obj.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(c, EXIT_OK);
    assert!(r["solver"]["residual_inf"].as_f64().unwrap() < 1e-10);
    let grid = make_grid(24).unwrap();
    let u = read_field_csv_path(&u_path, &grid).unwrap();
    assert!(u.values().iter().all(|v| *v > 0.7 && *v < 1.3));
    let text = std::fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), grid.len());
    assert!(text.lines().any(|l| l.starts_with("f ")));
}

#[test]
fn family_sources_parse() {
    let s: FieldSource = "family:harmonic:l=3,m=-2,eps=0.1,base=2".parse().unwrap();
    assert_eq!(s, FieldSource::Family(Family::Harmonic { l: 3, m: -2, eps: 0.1, base: 2.0 }));
    for bad in ["family:harmonic:l=3,m=4,eps=0.1,base=2", "family:constant:", "family:constant:c=1,d=2", "x.csv"] {
        assert!(matches!(bad.parse::<FieldSource>(), Err(Error::InvalidParameter(_))), "{bad}");
    }
}

#[test]
fn report_is_finite_and_repeatable() {
    let mut cfg = RunConfig::new(Command::Check).with_input("family:harmonic:l=3,m=1,eps=0.3,base=2");
    cfg.l = 16;
    cfg.l_max = 10;
    let a = run(&cfg);
    let b = run(&cfg);
    assert_eq!(a.exit_code, EXIT_OK);
    assert!(a.non_finite_entries().is_empty(), "{:?}", a.non_finite_entries());
    assert_eq!(a.to_json_without_timings(), b.to_json_without_timings());
    let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    for key in ["t32", "t33", "pogorelov", "guan_ma", "t41"] {
        assert!(v["sufficient"][key]["holds"].is_boolean(), "{key}");
    }
    assert!(v["config"].get("threads").is_none());
}

#[test]
fn lp_and_gamma_commands() {
    let mut cfg = RunConfig::new(Command::Lp).with_input("family:constant:c=8");
    cfg.l = 16;
    cfg.l_max = 10;
    let doc = run(&cfg);
    assert_eq!(doc.exit_code, EXIT_OK);
    let lp = doc.lp.unwrap();
    assert!(lp.summary.converged && lp.lemma41.holds && lp.t41cond.holds);
    cfg.p = 2.0;
    let doc = run(&cfg);
    assert!((doc.lp.unwrap().summary.lambda.unwrap() - 0.25).abs() < 1e-10);

    let mut g = RunConfig::new(Command::Gamma);
    g.samples = 100_000;
    let doc = run(&g);
    let s = doc.gamma.unwrap();
    assert!(s.z_score < 4.0 && s.relative_difference < 0.02);
}
