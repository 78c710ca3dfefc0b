use std::process::{Command, Output};

fn edgeprice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgeprice"))
        .args(args)
        .env_remove("EDGEPRICE_SCENARIO")
        .output()
        .expect("running edgeprice")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const F_GRID: &str = "1e9,2e9,3e9,4e9,5e9,6e9";

#[test]
fn sweep_writes_six_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let svg = dir.path().join("t.svg");
    let o = edgeprice(&[
        "sweep",
        "--param",
        "f_server",
        "--grid",
        F_GRID,
        "--out",
        out.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0], "param,value,price,u_user,u_server,t_offload,t_save,e_save");
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn optimize_is_deterministic_for_a_seed() {
    let a = edgeprice(&["optimize", "--algo", "disc-pso", "--seed", "7"]);
    let b = edgeprice(&["optimize", "--algo", "disc-pso", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("algorithm=disc-pso seed=7"));
}

#[test]
fn validate_passes_on_defaults() {
    let o = edgeprice(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn validate_fails_on_perturbed_model() {
    let o = edgeprice(&["--set", "c_cycles_per_bit=1000", "validate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn usage_and_config_errors_exit_2() {
    assert_eq!(edgeprice(&["--bogus"]).status.code(), Some(2));
    assert_eq!(edgeprice(&["sweep", "--param", "cpu", "--grid", "1"]).status.code(), Some(2));
    assert_eq!(edgeprice(&["--set", "nokey=1", "validate"]).status.code(), Some(2));
    assert_eq!(edgeprice(&["--set", "w2=1.5", "validate"]).status.code(), Some(2));
    assert_eq!(edgeprice(&["sweep", "--param", "b", "--grid", "2e5,1e5"]).status.code(), Some(2));
    assert_eq!(edgeprice(&["--scenario", "/nonexistent/s.conf", "validate"]).status.code(), Some(2));
    assert_eq!(edgeprice(&["surface", "--steps", "1"]).status.code(), Some(2));
}

#[test]
fn scenario_file_and_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.conf");
    std::fs::write(&path, "q_kb = 100\n").unwrap();
    let from_file = edgeprice(&["--scenario", path.to_str().unwrap(), "sweep", "--param", "b", "--grid", "1e6"]);
    let from_set = edgeprice(&["--set", "q_kb=100", "sweep", "--param", "b", "--grid", "1e6"]);
    assert!(from_file.status.success());
    assert_eq!(stdout(&from_file), stdout(&from_set));

    let env = Command::new(env!("CARGO_BIN_EXE_edgeprice"))
        .args(["sweep", "--param", "b", "--grid", "1e6"])
        .env("EDGEPRICE_SCENARIO", &path)
        .output()
        .unwrap();
    assert_eq!(stdout(&env), stdout(&from_set));
}

#[test]
fn compare_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = edgeprice(&["--seed", "3", "compare", "--trials", "2", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 1 + 4 * 2);
    assert!(text.starts_with("algorithm,trial,seed,u_user_final,iterations,f_server_hz,b_bps\n"));
}

#[test]
fn optimizer_keys_are_overridable() {
    let o = edgeprice(&["--set", "p_n=5", "--set", "n_max=3", "optimize", "--algo", "pso"]);
    assert!(o.status.success());
    assert_eq!(edgeprice(&["--set", "p_n=0", "optimize"]).status.code(), Some(2));
}

#[test]
fn surface_reports_corner() {
    let o = edgeprice(&["surface", "--steps", "5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 25);
    assert!(String::from_utf8_lossy(&o.stderr).contains("f_server_hz=6e9 b_bps=1e6"));
}
