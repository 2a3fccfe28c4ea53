use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_collapse-lab");

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("COLLAPSE_LAB_THREADS", t),
        None => cmd.env_remove("COLLAPSE_LAB_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args, None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn collapse_writes_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", "x0_1 = 0.5\nx0_2 = 0.5\ntau_r = 1e-14\n");
    let out = dir.path().join("q.csv");
    let svg = dir.path().join("q.svg");
    let status = run(
        &["collapse", "--config", &cfg, "--signs", "+-", "--t-end", "20", "--out", out.to_str().unwrap(), "--svg", svg.to_str().unwrap()],
        None,
    );
    assert!(status.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,q"));
    assert_eq!(lines.next(), Some("0,0.5,0.5,0"));
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 20.0);
    assert!(last[3] > 0.999);
    assert_eq!(text.lines().count(), 1 + 2001);
    let svg = std::fs::read_to_string(svg).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn collapse_seconds_and_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", "x0_1 = 0.7\nx0_2 = 0.3\ntau_r = 2\nsigns = -+\nt_end_over_tau = 1\nstep_over_tau = 0.5\n");
    let text = stdout(&["collapse", "--config", &cfg, "--closed-form", "--seconds"]);
    let ts: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ts, ["0", "1", "2"]);
    let rk = stdout(&["collapse", "--config", &cfg, "--seconds"]);
    assert_eq!(rk.lines().count(), text.lines().count());
}

#[test]
fn malus_three_angle_figure() {
    let text = stdout(&["malus", "--angles", "20,30,45", "--t-max", "10", "--steps", "200"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps_deg,t_over_tau,expectation,ratio_to_malus");
    assert_eq!(lines.len(), 1 + 3 * 201);
    assert!(lines[1].starts_with("20,0,"));
    let r0: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
    assert!((r0 - 7.43541409088991).abs() < 1e-12);
    assert!(lines[202].starts_with("30,0,"));
    assert!(lines[403].starts_with("45,0,"));
}

#[test]
fn chsh_golden() {
    assert_eq!(
        stdout(&["chsh", "--paper-setting"]),
        "setting,c_ab,c_ab_prime,c_a_prime_b,c_a_prime_b_prime,F\n\
         rotated_45,0.7071067811865476,-0.7071067811865476,0.7071067811865476,0.7071067811865476,2.8284271247461903\n"
    );
}

#[test]
fn estimate_tau_golden() {
    let text = stdout(&["estimate-tau", "--wavelength", "4e-7"]);
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], 4e-7);
    assert!((row[2] - 2.12353498355e-16).abs() < 1e-26);
    assert_eq!(row[3], 1e-14);
    assert_eq!(row[4], 1e-14);
}

#[test]
fn interfere_two_sources() {
    let text = stdout(&["interfere", "--points", "5", "--screen-min", "-0.005", "--screen-max", "0.005"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "y,intensity,intensity_exact");
    assert_eq!(lines.len(), 6);
    // centre of two in-phase sources
    let centre: Vec<f64> = lines[3].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(centre[0], 0.0);
    assert!((centre[1] - 4.0).abs() < 1e-12);

    let out = run(&["interfere", "--distance", "1e-6", "--points", "3"], None);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.cfg", "x0_1 = 0.6\nx0_2 = 0.6\ntau_r = 1e-14\nfoo = 1\n");
    let out = run(&["collapse", "--config", &bad, "--signs", "+-"], None);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("foo"), "{err}");

    assert_eq!(run(&["teleport"], None).status.code(), Some(1));
    assert_eq!(run(&["malus", "--angles", "0"], None).status.code(), Some(1));

    let ok = write_config(dir.path(), "ok.cfg", "x0_1 = 0.5\nx0_2 = 0.5\ntau_r = 1\nn_trajectories = 10\nmaster_seed = 1\n");
    assert_eq!(run(&["ensemble", "--config", &ok], Some("many")).status.code(), Some(1));

    let unwritable = dir.path().join("missing-dir").join("x.csv");
    let out = run(&["chsh", "--paper-setting", "--out", unwritable.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ensemble_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.cfg",
        "x0_1 = 0.7\nx0_2 = 0.3\ntau_r = 1e-14\nn_trajectories = 20000\nmaster_seed = 2024\n",
    );
    let outputs: Vec<Vec<u8>> = ["1", "4", "16", "0"]
        .iter()
        .map(|t| {
            let o = run(&["ensemble", "--config", &cfg], Some(t));
            assert!(o.status.success());
            o.stdout
        })
        .collect();
    for o in &outputs[1..] {
        assert_eq!(o, &outputs[0]);
    }
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert!(text.starts_with("event,count,frequency,std_error,expected,z\ncollapse_to_1,"));
    assert_eq!(text.lines().count(), 1 + 5 + 2);

    let again = run(&["ensemble", "--config", &cfg, "--seed", "2024"], Some("4"));
    assert_eq!(again.stdout, outputs[0]);
    let other = run(&["ensemble", "--config", &cfg, "--seed", "7"], Some("4"));
    assert_ne!(other.stdout, outputs[0]);
}
