use std::process::Command;

use homsurf::cli::execute_args;
use homsurf::io::{quadruple_from_str, read_file};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_homsurf"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let o = bin().args(args).output().unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8(o.stdout).unwrap(),
        String::from_utf8(o.stderr).unwrap(),
    )
}

#[test]
fn verify_exit_codes() {
    let (code, out, _) = run(&["verify", "--catalog", "vertical-plane", "--kappa", "0", "--tau", "0.5", "--grid", "81x81"]);
    assert_eq!(code, 0);
    assert!(out.lines().last().unwrap().starts_with("PASS"));

    let (code, out, _) = run(&["verify", "--catalog", "vertical-plane", "--kappa", "0", "--tau", "1.0"]);
    assert_eq!(code, 2);
    let gauss = out.lines().find(|l| l.starts_with("gauss ")).unwrap();
    assert_eq!(gauss, "gauss 0.75 0.75");

    let (code, _, err) = run(&["verify", "--catalog", "tube", "--kappa", "4", "--tau", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("kappa equals 4 tau^2"), "{err}");

    let (code, _, err) = run(&["verify", "--catalog", "torus"]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown catalog surface"));
}

#[test]
fn sister_and_twin_phases() {
    let o = execute_args(["sister", "--catalog", "vertical-plane", "--kappa", "0", "--tau", "0.5", "--target-kappa", "-1", "--target-tau", "0"]).unwrap();
    assert!(o.stdout.starts_with("phase theta=1.5707963267948966 "), "{}", o.stdout);

    let o = execute_args(["twin", "--catalog", "tube", "--H", "1", "--kappa", "0", "--tau", "0.5"]).unwrap();
    let theta: f64 = o.stdout.split_whitespace().nth(1).unwrap().trim_start_matches("theta=").parse().unwrap();
    assert!((theta + 2.0 * 2f64.atan()).abs() < 1e-12);

    let (code, _, err) = run(&["sister", "--catalog", "vertical-plane", "--target-kappa", "-2", "--target-tau", "0"]);
    assert_eq!(code, 1);
    assert!(err.contains("anisotropy mismatch"));

    let (code, _, err) = run(&["twin", "--catalog", "cmc-graph-B"]);
    assert_eq!(code, 1);
    assert!(err.contains("twin requires"));
}

#[test]
fn sister_writes_data_and_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("sister.txt");
    let mesh = dir.path().join("sister.obj");
    let (code, out, err) = run(&[
        "sister", "--catalog", "nil-z0", "--target-kappa", "-1", "--target-tau", "0", "--grid", "21x21",
        "--out", q.to_str().unwrap(), "--reconstruct", "--mesh", mesh.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("mesh "));
    let data = quadruple_from_str(&read_file(&q).unwrap()).unwrap();
    assert_eq!(data.model.kappa(), -1.0);
    let obj = read_file(&mesh).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 441);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 800);

    // the written data verify in the target model and reconstruct from file
    let (code, _, _) = run(&["verify", "--quadruple", q.to_str().unwrap()]);
    assert_eq!(code, 0);
    let rec = dir.path().join("rec.obj");
    let (code, out, err) = run(&["reconstruct", "--quadruple", q.to_str().unwrap(), "--out", rec.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("reconstructed 21x21"));
}

#[test]
fn export_layout() {
    let o = execute_args(["export", "--catalog", "vertical-plane", "--grid", "3x3", "--u0", "0", "--u1", "1", "--v0", "0", "--v1", "1"]).unwrap();
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines[0], "v 0 0 0");
    assert_eq!(lines[9], "f 1 2 4");
    assert_eq!(lines[10], "f 2 5 4");
    let o = execute_args(["export", "--catalog", "vertical-plane", "--grid", "2x2"]).unwrap();
    assert_eq!(o.stdout.lines().filter(|l| l.starts_with("v ")).count(), 4);
    assert_eq!(o.stdout.lines().filter(|l| l.starts_with("f ")).count(), 2);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.conf");
    std::fs::write(&cfg, "# Nil with the wrong fiber\ncatalog = vertical-plane\nkappa = 0\ntau = 1.0\ngrid = 21x21\n").unwrap();
    let (code, _, _) = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["verify", "--config", cfg.to_str().unwrap(), "--tau", "0.5"]);
    assert_eq!(code, 0);
    std::fs::write(&cfg, "catalog = tube\nspeed = 3\n").unwrap();
    let (code, _, err) = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown config key"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|k| dir.path().join(format!("t{k}.txt"))).collect();
    for p in &paths {
        let (code, _, _) = run(&["twin", "--catalog", "sphere", "--grid", "15x15", "--out", p.to_str().unwrap()]);
        assert_eq!(code, 0);
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
}

#[test]
fn catalog_list_names_every_surface() {
    let (code, out, _) = run(&["catalog", "list"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 6);
    assert!(out.starts_with("vertical-plane kappa=0 tau=0.5"));
}

#[test]
fn reconstruct_catalog_reproduces_the_patch() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.obj");
    let b = dir.path().join("b.obj");
    assert_eq!(run(&["reconstruct", "--catalog", "tube", "--grid", "21x21", "--out", a.to_str().unwrap()]).0, 0);
    assert_eq!(run(&["export", "--catalog", "tube", "--grid", "21x21", "--out", b.to_str().unwrap()]).0, 0);
    let parse = |p: &std::path::Path| -> Vec<f64> {
        read_file(p).unwrap().lines().filter(|l| l.starts_with("v ")).flat_map(|l| {
            l.split_whitespace().skip(1).map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>()
        }).collect()
    };
    let (va, vb) = (parse(&a), parse(&b));
    assert_eq!(va.len(), vb.len());
    let err = va.iter().zip(&vb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
}
