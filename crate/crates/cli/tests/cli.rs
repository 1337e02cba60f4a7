use std::path::Path;
use std::process::{Command, Output};

fn nevlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nevlab")).args(args).env_remove("NEVLAB_PRECISION").output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("exp.conf");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn run_in(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let out = dir.join("out");
    let mut args = vec!["run", "--config", config, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    nevlab(&args)
}

#[test]
fn list_prints_the_gallery() {
    let o = nevlab(&["list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["exp", "lambda-poincare", "torus-proj", "exp-2", "calculus-lemma"] {
        assert!(text.contains(name), "missing {name}");
    }
    let o = nevlab(&["list", "--json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["maps"].as_array().unwrap().len(), 11);
}

#[test]
fn golden_fmt_table() {
    let dir = tempfile::tempdir().unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let o = run_in(dir.path(), golden.join("fmt-z.conf").to_str().unwrap(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let got = std::fs::read_to_string(dir.path().join("out/table.csv")).unwrap();
    let want = std::fs::read_to_string(golden.join("fmt-z.csv")).unwrap();
    assert_eq!(got, want);
}

#[test]
fn unknown_gallery_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[experiment]\nkind = fmt\n[map]\ngallery = nonexistent\n[targets]\nvalues = 0\n");
    let o = run_in(dir.path(), &cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    let rec: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(rec["error"], "unknown_gallery");
    assert_eq!(rec["exit_code"], 2);
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "/nonexistent/exp.conf", &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn computational_errors_exit_with_three() {
    // z takes the value 0 at the centre of the disc
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[experiment]\nkind = fmt\n[map]\ngallery = z\n[targets]\nvalues = 0\n");
    let o = run_in(dir.path(), &cfg, &[]);
    assert_eq!(o.status.code(), Some(3));
    let rec: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(rec["error"], "origin_hits_target");
}

#[test]
fn failed_assertions_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[experiment]\nkind = growth-index\n[map]\ngallery = exp\n[grid]\nkind = geometric\nr0 = 1\nr1 = 10\nn = 6\n[assert]\nc_min = 1\n",
    );
    assert_eq!(run_in(dir.path(), &cfg, &[]).status.code(), Some(0));
    assert_eq!(run_in(dir.path(), &cfg, &["--assert"]).status.code(), Some(4));
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[experiment]\nkind = smt-riemann\nname = mobius\n[map]\ngallery = mobius-half\n[targets]\nvalues = 0, inf, 1\n\
         [grid]\nkind = geometric\nr0 = 1\nr1 = 30\nn = 12\n",
    );
    let mut seen = Vec::new();
    for threads in ["1", "4", "4"] {
        let o = run_in(dir.path(), &cfg, &["--threads", threads, "--svg"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let files: Vec<Vec<u8>> =
            ["table.csv", "summary.txt", "plot.svg"].iter().map(|f| std::fs::read(dir.path().join("out").join(f)).unwrap()).collect();
        seen.push(files);
    }
    assert_eq!(seen[0], seen[1]);
    assert_eq!(seen[1], seen[2]);
}

#[test]
fn precision_variable_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[experiment]\nkind = growth-index\n[map]\ngallery = exp\n");
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_nevlab"))
        .args(["run", "--config", &cfg, "--out", out.to_str().unwrap()])
        .env("NEVLAB_PRECISION", "quad")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_nevlab"))
        .args(["run", "--config", &cfg, "--out", out.to_str().unwrap()])
        .env("NEVLAB_PRECISION", "extended")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
