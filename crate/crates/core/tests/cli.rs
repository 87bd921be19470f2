use std::process::Command;

fn gsprep(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gsprep")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

#[test]
fn prepare_known_prints_csv() {
    let (code, out, _) = gsprep(&["prepare-known", "--dim", "8", "--trials", "2", "--seed", "4"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("method,dim,"));
    assert!(lines[1].starts_with("lcu-fourier,8,"));
}

#[test]
fn same_seed_same_output() {
    let args = ["estimate-energy", "--dim", "8", "--xi", "0.02", "--seed", "5", "--trials", "2"];
    let (a, b) = (gsprep(&args), gsprep(&args));
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
}

#[test]
fn json_output_file() {
    let path = std::env::temp_dir().join(format!("gsprep-cli-{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let (code, _, _) = gsprep(&["chebwalk", "--dim", "4", "--format", "json", "--out", p]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.trim_start().starts_with('['));
    assert!(text.contains("\"chebwalk\""));
}

#[test]
fn exit_codes() {
    assert_eq!(gsprep(&["prepare-known", "--dim", "12"]).0, 1);
    assert_eq!(gsprep(&["prepare-known", "--overlap", "abc"]).0, 1);
    assert_eq!(gsprep(&["no-such-command"]).0, 1);
    assert_eq!(gsprep(&["--help"]).0, 0);
    // a qubit cap too small for the circuit makes every run fail
    assert_eq!(gsprep(&["baseline", "--method", "pea", "--dim", "16", "--qubit-cap", "6"]).0, 2);
}
