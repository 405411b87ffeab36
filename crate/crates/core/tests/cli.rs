use singulate::harness::{RunManifest, MANIFEST_FILE};
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_singulate"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn singulate")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &str = r#"{
  "scene": { "n_obstacles_range": [2, 3] },
  "ddpg": { "buffer_size": 120, "hidden": [8, 8], "epochs": 2, "batch": 16 },
  "n_scenes": 6
}"#;

#[test]
fn full_pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let cfg = root.join("small.json");
    std::fs::write(&cfg, SMALL).unwrap();
    let dir = |name: &str| root.join(name);
    let common = |out: &Path| vec!["--seed".to_owned(), "4".into(), "--config".into(), s(&cfg).into(), "--out".into(), s(out).into()];
    let with = |sub: &str, out: &Path, extra: &[&str]| {
        let mut v = vec![sub.to_owned()];
        v.extend(common(out));
        v.extend(extra.iter().map(|x| x.to_string()));
        v
    };
    let call = |v: Vec<String>| ok(&v.iter().map(String::as_str).collect::<Vec<_>>());

    call(with("gen-scenes", &dir("scenes"), &[]));
    let scenes = dir("scenes").join("scenes.json");
    assert!(scenes.exists());

    call(with("eval", &dir("es"), &["--policy", "es", "--scenes", s(&scenes)]));
    call(with("eval", &dir("rand"), &["--policy", "random", "--scenes", s(&scenes)]));

    call(with("fill-buffer", &dir("buf"), &[]));
    let buffer = dir("buf").join("buffer.bin");
    call(with("train", &dir("models"), &["--buffer", s(&buffer), "--scheme", "rl-es"]));
    let model = dir("models").join("model_rl-es.json");
    assert!(model.exists());
    let model_arg = format!("model:{}", s(&model));
    call(with("eval", &dir("agent"), &["--policy", &model_arg, "--scenes", s(&scenes)]));

    let rec = |d: &str| dir(d).join("records.json");
    let out = call(with(
        "analyze",
        &dir("analysis"),
        &["--records", s(&rec("es")), s(&rec("rand")), s(&rec("agent"))],
    ));
    let table = String::from_utf8_lossy(&out.stdout);
    for name in ["ES", "Random", "RL-ES"] {
        assert!(table.contains(name), "{name} missing from\n{table}");
    }
    let csv = std::fs::read_to_string(dir("analysis").join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);

    call(with("render", &dir("render"), &[]));
    for d in ["scenes", "es", "rand", "buf", "models", "agent", "analysis", "render"] {
        let m = RunManifest::load(dir(d).join(MANIFEST_FILE)).unwrap();
        assert_eq!(m.seed, 4);
        assert!(m.verify(&dir(d)).unwrap().is_empty(), "{d}");
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    assert_eq!(run(&["eval", "--policy", "greedy", "--out", s(&out)]).status.code(), Some(1));
    assert_eq!(run(&["gen-scenes", "--bogus"]).status.code(), Some(1));
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"n_scenes": 0}"#).unwrap();
    assert_eq!(run(&["gen-scenes", "--config", s(&bad), "--out", s(&out)]).status.code(), Some(1));
    let missing = tmp.path().join("nope.json");
    assert_eq!(
        run(&["eval", "--scenes", s(&missing), "--out", s(&out)]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
