mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use embedgeo::dataio::{self, Dtype, EmbeddingFormat, ReportDocument, WeightStack};
use serde_json::Value;

use common::{gaussian_set, random_matrix, rng};

fn embedgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_embedgeo"))
        .args(args)
        .output()
        .unwrap()
}

fn report(out: &Output) -> ReportDocument {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    ReportDocument::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let mut r = rng(99);
        let a = gaussian_set(&mut r, 80, 4);
        let b = gaussian_set(&mut r, 80, 4);
        dataio::write_embeddings_file(root.join("a.emb1"), &a, EmbeddingFormat::Emb1(Dtype::F64)).unwrap();
        dataio::write_embeddings_file(root.join("b.csv"), &b, EmbeddingFormat::Csv).unwrap();
        let stack = WeightStack::new(vec![random_matrix(&mut r, 5, 4), random_matrix(&mut r, 2, 5)]).unwrap();
        dataio::write_weight_stack_file(root.join("w.wts1"), &stack).unwrap();
        Self { _dir: dir, root }
    }

    fn path(&self, name: &str) -> String {
        self.root.join(name).display().to_string()
    }

    fn write(&self, name: &str, contents: &str) -> String {
        std::fs::write(self.root.join(name), contents).unwrap();
        self.path(name)
    }
}

#[test]
fn id_report_records_estimator_and_k() {
    let fx = Fixture::new();
    let out_path = fx.path("r.json");
    let out = embedgeo(&[
        "id",
        "--input",
        &fx.path("a.emb1"),
        "--k",
        "20",
        "--estimator",
        "mle",
        "--out",
        &out_path,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let doc = ReportDocument::from_json(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc.command, "id");
    assert_eq!(doc.results["estimator"], "mle");
    assert_eq!(doc.results["k"], 20);
    assert!(doc.results["value"].as_f64().unwrap() > 0.0);
    assert_eq!(doc.params["format"], "auto");
    assert_eq!(doc.tool_version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn w1_records_solver_defaults() {
    let fx = Fixture::new();
    let doc = report(&embedgeo(&["w1", "--a", &fx.path("a.emb1"), "--b", &fx.path("b.csv")]));
    assert_eq!(doc.params["epsilon"].as_f64(), Some(1e-2));
    assert_eq!(doc.params["max_iter"], 200);
    assert_eq!(doc.params["tol"].as_f64(), Some(1e-6));
    assert_eq!(doc.params["metric"], "euclidean");
    let cost = doc.results["cost"].as_f64().unwrap();
    assert!(cost > 0.0);
    assert!(doc.results.get("exact_cost").is_none());
}

#[test]
fn w1_exact_is_dominated_by_sinkhorn() {
    let fx = Fixture::new();
    let doc = report(&embedgeo(&[
        "w1",
        "--a",
        &fx.path("a.emb1"),
        "--b",
        &fx.path("b.csv"),
        "--exact",
    ]));
    let (s, e) = (
        doc.results["cost"].as_f64().unwrap(),
        doc.results["exact_cost"].as_f64().unwrap(),
    );
    assert!(s >= e - 1e-9);
}

#[test]
fn lipschitz_handles_several_files() {
    let fx = Fixture::new();
    let w = fx.path("w.wts1");
    let doc = report(&embedgeo(&["lipschitz", "--weights", &w, &w]));
    let profiles = doc.results["profiles"].as_array().unwrap();
    assert_eq!(profiles.len(), 2);
    assert_eq!(profiles[0], profiles[1]);
    assert_eq!(profiles[0]["suffix"].as_array().unwrap().len(), 3);
    assert_eq!(profiles[0]["suffix"][2].as_f64(), Some(1.0));
}

const WORKED_EXAMPLE: &str = r#"{
  "layers": [{"d": 4, "C": 1, "Ddiam": 2, "L_F": 1, "L_Fstar": 1, "bayes_gap": 0}],
  "n": 10000, "delta": 0.05, "eps": 0.1, "M_F": 1, "M_Fstar": 1, "L": 1
}"#;

#[test]
fn bound_worked_example() {
    let fx = Fixture::new();
    let cfg = fx.write("bound.json", WORKED_EXAMPLE);
    let doc = report(&embedgeo(&["bound", "--config", &cfg, "--final-layer"]));
    let gap = doc.results["min_gap_bound"].as_f64().unwrap();
    assert!((gap - 0.3004).abs() < 1e-3, "{gap}");
    assert_eq!(doc.results["final_layer"]["gap_bound"].as_f64(), Some(gap));
    assert_eq!(doc.results["provenance"][0]["d"], "user");
    assert_eq!(doc.params["inputs"]["eps"].as_f64(), Some(0.1));
}

#[test]
fn bound_splices_measured_dimension() {
    let fx = Fixture::new();
    let id_path = fx.path("id.json");
    assert!(
        embedgeo(&["id", "--input", &fx.path("a.emb1"), "--k", "10", "--out", &id_path])
            .status
            .success()
    );
    let measured = ReportDocument::from_json(&std::fs::read_to_string(&id_path).unwrap())
        .unwrap()
        .results["value"]
        .as_f64()
        .unwrap();
    let cfg = fx.write("bound.json", WORKED_EXAMPLE);
    let splice = format!("{id_path}#results.value");
    let doc = report(&embedgeo(&[
        "bound", "--config", &cfg, "--d-from", &splice, "--delta", "0.1",
    ]));
    assert_eq!(doc.params["inputs"]["layers"][0]["d"].as_f64(), Some(measured));
    assert_eq!(doc.params["inputs"]["delta"].as_f64(), Some(0.1));
    let prov = doc.results["provenance"][0]["d"].as_str().unwrap();
    assert!(
        prov.starts_with("measured:") && prov.ends_with("#results.value"),
        "{prov}"
    );
    assert_eq!(doc.results["provenance"][0]["C"], "user");
}

#[test]
fn bound_missing_config_exits_one() {
    let fx = Fixture::new();
    let out = embedgeo(&["bound", "--config", &fx.path("missing.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Io"), "{}", stderr(&out));
}

#[test]
fn module_error_names_reach_stderr() {
    let fx = Fixture::new();
    let bad = fx.write("bad.emb1", "XMB1 and then some bytes");
    let out = embedgeo(&["id", "--input", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("BadMagic"));

    let out = embedgeo(&["id", "--input", &fx.path("a.emb1"), "--k", "500"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("KTooLarge"), "{}", stderr(&out));

    let cfg = fx.write(
        "nolayers.json",
        r#"{"layers": [], "n": 10, "delta": 0.1, "M_F": 1, "M_Fstar": 1}"#,
    );
    let out = embedgeo(&["bound", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("NoLayers"));

    let out = embedgeo(&["dimsweep", "--dims", "4,2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("BadSweep"));

    let out = embedgeo(&["correlate", "--xs", "1,1,1", "--ys", "1,2,3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("ZeroVariance"));
}

#[test]
fn usage_errors_exit_two_and_name_the_flag() {
    for args in [
        vec!["id", "--input", "x.emb1", "--frobnicate"],
        vec!["id"],
        vec!["w1", "--a", "x", "--b", "y", "--epsilon", "0"],
        vec!["bound", "--config", "c.json", "--delta", "1.5"],
        vec!["scaling", "--n-grid", "100,abc"],
        vec!["nosuchcommand"],
    ] {
        let out = embedgeo(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!stderr(&out).is_empty());
    }
    let err = stderr(&embedgeo(&["w1", "--a", "x", "--b", "y", "--epsilon", "0"]));
    assert!(err.contains("--epsilon"), "{err}");
}

#[test]
fn bad_thread_setting_is_a_usage_error() {
    let fx = Fixture::new();
    let out = Command::new(env!("CARGO_BIN_EXE_embedgeo"))
        .args(["id", "--input", &fx.path("a.emb1")])
        .env("EMBEDGEO_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scaling_and_dimsweep_write_csv() {
    let fx = Fixture::new();
    let csv = fx.path("scaling.csv");
    let doc = report(&embedgeo(&[
        "scaling",
        "--n-grid",
        "30,60,120",
        "--trials",
        "2",
        "--csv",
        &csv,
    ]));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,mean_w1,std_w1");
    assert_eq!(lines.len(), 4);
    assert_eq!(doc.seed, Some(42));
    assert_eq!(doc.params["n_grid"], serde_json::json!([30, 60, 120]));
    assert!(doc.results["fit"]["slope"].is_number());

    let csv = fx.path("sweep.csv");
    let doc = report(&embedgeo(&[
        "dimsweep",
        "--dims",
        "1,3",
        "--ambient",
        "4",
        "--n",
        "40",
        "--trials",
        "2",
        "--csv",
        &csv,
    ]));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("d,mean_w1,std_w1\n"));
    assert_eq!(doc.results["correlation"], Value::Null);
}

#[test]
fn correlate_from_flags_and_csv() {
    let fx = Fixture::new();
    let doc = report(&embedgeo(&["correlate", "--xs", "1,2,3", "--ys", "2,4,6"]));
    assert!((doc.results["coefficient"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(doc.params["method"], "pearson");

    let csv = fx.write("pairs.csv", "x,y\n1,1\n2,3\n2,2\n3,4\n");
    let doc = report(&embedgeo(&["correlate", "--input", &csv, "--method", "spearman"]));
    let want = 4.5 / 22.5f64.sqrt();
    assert!((doc.results["coefficient"].as_f64().unwrap() - want).abs() < 1e-12);
    assert_eq!(doc.results["p_value_approximate"], true);
}

#[test]
fn reports_round_trip_through_disk() {
    let fx = Fixture::new();
    let out_path = fx.path("w.json");
    assert!(embedgeo(&[
        "w1",
        "--a",
        &fx.path("a.emb1"),
        "--b",
        &fx.path("a.emb1"),
        "--out",
        &out_path
    ])
    .status
    .success());
    let text = std::fs::read_to_string(Path::new(&out_path)).unwrap();
    let doc = ReportDocument::from_json(&text).unwrap();
    assert_eq!(doc.to_json(), text);
}
