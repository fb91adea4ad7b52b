use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use serde_json::{json, Value};
use tempfile::TempDir;

struct Output {
    status: i32,
    stdout: String,
    stderr: String,
}

impl Output {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn ctxkit(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ctxkit"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    let out = child.wait_with_output().unwrap();
    Output {
        status: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self { dir: TempDir::new().unwrap() }
    }

    fn write(&self, name: &str, value: &Value) -> String {
        let path = self.dir.path().join(name);
        std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
        path.to_str().unwrap().to_string()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Runs a command, stores its stdout under `name` and returns the path.
    fn emit(&self, name: &str, args: &[&str]) -> String {
        let out = ctxkit(args, None);
        assert_eq!(out.status, 0, "{args:?}: {}", out.stderr);
        let path = self.path(name);
        std::fs::write(&path, &out.stdout).unwrap();
        path.to_str().unwrap().to_string()
    }
}

fn triangle() -> Value {
    json!({ "vertices": ["0", "1", "2"], "edges": [["0", "1"], ["1", "2"], ["0", "2"]] })
}

fn read(path: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(Path::new(path)).unwrap()).unwrap()
}

#[test]
fn triangle_has_one_vertex() {
    let ws = Workspace::new();
    let t = ws.write("triangle.json", &triangle());
    let out = ctxkit(&["vertices", &t, "--method", "dd"], None);
    assert_eq!(out.status, 0);
    let v = out.json();
    assert_eq!(v["count"], json!(1));
    assert_eq!(v["vertices"][0]["vector"], json!("(1/2,1/2,1/2)"));
    assert_eq!(ctxkit(&["vertices", &t, "--method", "support"], None).json(), v);
}

#[test]
fn pr_box_classification_and_certificate() {
    let ws = Workspace::new();
    let chsh = ws.emit("chsh.json", &["bell"]);
    let prbox = ws.emit("prbox.json", &["prbox"]);

    let out = ctxkit(&["classify", &chsh, &prbox], None);
    assert_eq!(out.status, 0, "{}", out.stderr);
    let flags = out.json();
    assert_eq!(flags["extremal"], json!(true));
    assert_eq!(flags["classical"], json!(false));
    assert_eq!(flags["indeterministic"], json!(true));

    // The certify output carries the constructed realization.
    let trivial = ws.emit("trivial.json", &["certify", &chsh, &prbox, "--dim", "2"]);
    let out = ctxkit(&["certify", &chsh, &prbox, &trivial, "--expect-trivial"], None);
    assert_eq!(out.status, 0, "{}", out.stderr);
    let cert = out.json();
    assert_eq!(cert["certificate"]["trivial"], json!(true));
    assert_eq!(cert["realization"], read(&trivial)["realization"]);
}

#[test]
fn exit_codes() {
    let ws = Workspace::new();
    let t = ws.write("triangle.json", &triangle());

    // Bad model: a negative verdict from classify.
    let bad = ws.write("bad.json", &json!({ "values": { "0": "1", "1": "1", "2": "0" } }));
    assert_eq!(ctxkit(&["classify", &t, &bad], None).status, 1);
    assert_eq!(ctxkit(&["validate", &t, "--model", &bad], None).status, 1);

    // Non-trivial certificate with --expect-trivial: a hand-made realization
    // on a single edge where the effects are not multiples of the identity.
    let edge = ws.write("edge.json", &json!({ "vertices": ["a", "b"], "edges": [["a", "b"]] }));
    let half = ws.write("half.json", &json!({ "values": { "a": "1/2", "b": "1/2" } }));
    let r = ws.write(
        "r.json",
        &json!({
            "dim": 2,
            "rho": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]],
            "effects": {
                "a": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
                "b": [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
            }
        }),
    );
    let out = ctxkit(&["certify", &edge, &half, &r, "--expect-trivial"], None);
    assert_eq!(out.status, 1, "{}", out.stderr);
    assert_eq!(out.json()["certificate"]["trivial"], json!(false));
    assert_eq!(ctxkit(&["certify", &edge, &half, &r], None).status, 0);

    // Input errors.
    let broken = ws.path("broken.json");
    std::fs::write(&broken, "{\n  \"vertices\": [\"a\",\n  ]\n}").unwrap();
    let out = ctxkit(&["vertices", broken.to_str().unwrap()], None);
    assert_eq!(out.status, 2);
    assert!(out.stderr.contains("line"), "{}", out.stderr);
    assert_eq!(ctxkit(&["vertices", &t, "--bogus"], None).status, 2);
    assert_eq!(ctxkit(&["vertices", "/nonexistent/file.json"], None).status, 2);
    assert_eq!(ctxkit(&["frobnicate"], None).status, 2);
    assert_eq!(ctxkit(&["bell", "--structure", "2;x"], None).status, 2);
    let unknown = ws.write("unknown.json", &json!({ "values": { "0": "1/2", "1": "1/2", "9": "1/2" } }));
    assert_eq!(ctxkit(&["classify", &t, &unknown], None).status, 2);
}

#[test]
fn standard_input_and_output_file() {
    let ws = Workspace::new();
    let text = serde_json::to_string(&triangle()).unwrap();
    let from_stdin = ctxkit(&["vertices", "-"], Some(&text));
    assert_eq!(from_stdin.status, 0);
    let t = ws.write("triangle.json", &triangle());
    assert_eq!(from_stdin.stdout, ctxkit(&["vertices", &t], None).stdout);

    let target = ws.path("out.json");
    let out = ctxkit(&["nullspace", &t, "-o", target.to_str().unwrap()], None);
    assert_eq!(out.status, 0);
    assert!(out.stdout.is_empty());
    let ns = read(target.to_str().unwrap());
    assert_eq!(ns["dimension"], json!(0));
    assert_eq!(ns["rank"], json!(3));
}

#[test]
fn output_is_deterministic() {
    let ws = Workspace::new();
    let chsh = ws.emit("chsh.json", &["bell"]);
    let prbox = ws.emit("prbox.json", &["prbox"]);
    let runs: [&[&str]; 5] = [
        &["vertices", &chsh, "--method", "support"],
        &["deterministic", &chsh],
        &["nullspace", &chsh],
        &["search", &chsh, &prbox, "--seed", "7", "--runs", "3"],
        &["search", &chsh, &prbox, "--dim", "3", "--state", "random", "--pretty"],
    ];
    for args in runs {
        let a = ctxkit(args, None);
        let b = ctxkit(args, None);
        assert_eq!(a.status, 0, "{args:?}: {}", a.stderr);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    // Keys come out sorted.
    let v = ctxkit(&["search", &chsh, &prbox], None).stdout;
    let keys = ["\"affine_residual\"", "\"certificate\"", "\"converged\"", "\"iterations\""];
    let pos: Vec<usize> = keys.iter().map(|k| v.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn emitted_files_round_trip() {
    let ws = Workspace::new();

    // bell: the emitted scenario is consumed as a scenario.
    let chsh = ws.emit("chsh.json", &["bell"]);
    let out = ctxkit(&["validate", &chsh], None);
    assert_eq!(out.status, 0);
    let bell = read(&chsh);
    let plain = ws.write("plain.json", &bell["scenario"]);
    let vertices = ws.emit("vertices.json", &["vertices", &chsh]);
    assert_eq!(read(&vertices), ctxkit(&["vertices", &plain], None).json());
    for l in bell["labeling"].as_array().unwrap() {
        assert!(bell["scenario"]["vertices"].as_array().unwrap().contains(&l["label"]));
    }

    // vertices and deterministic: every emitted model is consumed as a model
    // and re-emitted unchanged by certify.
    let listed = read(&vertices);
    assert_eq!(listed["count"], json!(24));
    for (i, v) in listed["vertices"].as_array().unwrap().iter().enumerate() {
        let m = ws.write(&format!("v{i}.json"), v);
        let out = ctxkit(&["classify", &chsh, &m], None);
        assert_eq!(out.status, 0);
        assert_eq!(out.json()["extremal"], json!(true));
        assert_eq!(out.json()["deterministic"], v["deterministic"]);
    }
    let det = ws.emit("det.json", &["deterministic", &chsh]);
    for (i, d) in read(&det)["models"].as_array().unwrap().iter().enumerate() {
        let m = ws.write(&format!("d{i}.json"), d);
        let out = ctxkit(&["classify", &chsh, &m], None);
        assert_eq!(out.json()["deterministic"], json!(true));
        let cert = ws.emit(&format!("c{i}.json"), &["certify", &chsh, &m, "--dim", "2", "--rank", "1"]);
        let again = ctxkit(&["certify", &chsh, &m, &cert], None).json();
        assert_eq!(again["realization"], read(&cert)["realization"]);
        let proj = ctxkit(&["projective", &chsh, &cert], None).json();
        assert_eq!(proj["projective"], json!(true));
    }

    // prbox: the behavior file and its model file describe the same model.
    let prbox = ws.emit("prbox.json", &["prbox"]);
    let pr_vertex = listed["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| {
            let m = ws.write("probe.json", v);
            let c = ctxkit(&["certify", &chsh, &m], None).json();
            let b = ctxkit(&["certify", &chsh, &prbox], None).json();
            c == b
        })
        .expect("PR box among the vertices");
    assert_eq!(pr_vertex["deterministic"], json!(false));

    // certify: realization in, same realization out; then projective and
    // dilate consume it.
    let trivial = ws.emit("trivial.json", &["certify", &chsh, &prbox, "--dim", "3"]);
    let again = ws.emit("again.json", &["certify", &chsh, &prbox, &trivial]);
    assert_eq!(read(&again), read(&trivial));
    let proj = ctxkit(&["projective", &chsh, &trivial], None);
    assert_eq!(proj.json()["projective"], json!(false));
    let dil = ctxkit(&["dilate", &chsh, &trivial], None);
    assert_eq!(dil.status, 0, "{}", dil.stderr);
    for e in dil.json()["edges"].as_array().unwrap() {
        assert!(e["reconstruction_error"].as_f64().unwrap() <= 1e-10);
    }

    // search: the emitted run is consumed as a realization.
    let found = ws.emit("found.json", &["search", &chsh, &prbox, "--expect-trivial"]);
    let run = read(&found);
    assert_eq!(run["converged"], json!(true));
    let out = ctxkit(&["certify", &chsh, &prbox, &found, "--expect-trivial"], None);
    assert_eq!(out.status, 0, "{}", out.stderr);
    assert_eq!(out.json()["realization"], run["realization"]);

    // nullspace: basis vectors are kernel elements of the scenario.
    let ns = read(&ws.emit("ns.json", &["nullspace", &chsh]));
    assert_eq!(ns["dimension"].as_u64().unwrap() + ns["rank"].as_u64().unwrap(), 16);
}

#[test]
fn dilation_mismatch_on_triangle() {
    let ws = Workspace::new();
    let t = ws.write("triangle.json", &triangle());
    let half = ws.write("half.json", &json!({ "values": { "0": "1/2", "1": "1/2", "2": "1/2" } }));
    let trivial = ws.emit("trivial.json", &["certify", &t, &half, "--dim", "1"]);
    let out = ctxkit(&["dilate", &t, &trivial], None);
    assert_eq!(out.status, 0);
    let c = &out.json()["consistency"];
    assert_eq!(c["consistent"], json!(false));
    let worst = c["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["mismatch"].as_f64().unwrap())
        .fold(0.0, f64::max);
    assert!((worst - 2f64.sqrt()).abs() <= 1e-9);
}
