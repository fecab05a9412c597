//! Runs the `urk` binary as a batch user would.

use std::process::Command;

fn urk(args: &[&str], env_seed: Option<&str>) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_urk"));
    cmd.args(args).env_remove("URK_SEED");
    if let Some(s) = env_seed {
        cmd.env("URK_SEED", s);
    }
    cmd.output().unwrap()
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn seed_falls_back_to_environment() {
    let args = ["exp", "adaptivity", "--n", "64", "--trials", "2000"];
    let from_env = urk(&args, Some("42"));
    let mut flagged = args.to_vec();
    flagged.extend(["--seed", "42"]);
    let from_flag = urk(&flagged, None);
    assert!(from_env.status.success());
    assert_eq!(stdout(&from_env), stdout(&from_flag));
    let default = urk(&args, None);
    assert!(stdout(&default).lines().next().unwrap().contains("seed: 0"));
    assert_ne!(stdout(&default), stdout(&from_env));
}

#[test]
fn exit_codes_and_messages() {
    assert_eq!(urk(&["exp", "nope"], None).status.code(), Some(1));
    assert_eq!(urk(&["exp", "pochhammer", "--kmax"], None).status.code(), Some(1));
    let o = urk(&["lb-encode", "--n", "2048", "--log2-inv-delta", "32", "--file", "unused.bin"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("64 ≤ log 1/δ ≤ n/64"));
    let o = urk(&["lb-decode", "--n", "4096", "--k", "4", "--file", "/nonexistent/enc.bin"], None);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn pochhammer_csv_shape() {
    let o = urk(&["exp", "pochhammer", "--kmax", "64"], None);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with('#'));
    assert_eq!(lines[1], "K,product,bound,pass");
    assert_eq!(lines.len(), 66);
    assert!(lines[2..].iter().all(|l| l.ends_with(",true")));
}

#[test]
fn k_variant_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("k.bin");
    let set = dir.path().join("set.txt");
    let chosen: Vec<usize> = (0..128).map(|i| i * 31 + 5).collect();
    std::fs::write(&set, chosen.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n")).unwrap();
    let f = file.to_str().unwrap();
    let common = ["--n", "4096", "--k", "4", "--seed", "3"];
    let mut args = vec!["lb-encode", "--set", set.to_str().unwrap(), "--file", f];
    args.extend(common);
    assert!(urk(&args, None).status.success());
    let mut args = vec!["lb-decode", "--file", f];
    args.extend(common);
    let o = urk(&args, None);
    assert!(o.status.success());
    let got: Vec<usize> = stdout(&o).lines().skip(2).map(|l| l.parse().unwrap()).collect();
    assert_eq!(got, chosen);
}
