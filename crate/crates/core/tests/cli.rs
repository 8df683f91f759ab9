use std::path::Path;
use std::process::{Command, Output};

use confmetric::cli::data::sha256_hex;
use confmetric::solvers::SolverConfig;
use serde_json::Value;
use tempfile::TempDir;

fn confmetric(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confmetric"))
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .env_remove("CONFMETRIC_DATA_DIR")
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn bare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confmetric"))
        .args(args)
        .env_remove("CONFMETRIC_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn distances_from_bundled_hebrew() {
    let dir = TempDir::new().unwrap();
    let o = confmetric(&["distances", "--confusion", "bundled:hebrew"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("distances.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 20);
    assert!(lines.iter().all(|l| l.split(',').count() == 20));
    assert!(dir.path().join("similarity.csv").exists());

    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], "distances");
    assert_eq!(manifest["timestamp"], 1_700_000_000u64);
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for artifact in outputs {
        let bytes = std::fs::read(dir.path().join(artifact["path"].as_str().unwrap())).unwrap();
        assert_eq!(artifact["sha256"].as_str().unwrap(), sha256_hex(&bytes));
    }
}

#[test]
fn missing_confusion_file_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.csv");
    let o = confmetric(&["distances", "--confusion", missing.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.csv"));
}

#[test]
fn negative_smoothing_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = confmetric(&["distances", "--confusion", "bundled:hebrew", "--smoothing", "-0.5"], dir.path());
    assert_eq!(o.status.code(), Some(64));
    assert!(!dir.path().join("distances.csv").exists());
}

#[test]
fn malformed_confusion_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "phoneme,a,b\na,0,1\nb,1,10\n").unwrap();
    let o = confmetric(&["distances", "--confusion", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("zero diagonal"));
}

#[test]
fn fit_ls_diag_phonological() {
    let dir = TempDir::new().unwrap();
    let args = ["fit", "--method", "ls-diag", "--theory", "phonological", "--confusion", "bundled:hebrew", "--lambda", "0.1", "--seed", "1"];
    let o = confmetric(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let model = read_json(&dir.path().join("model.json"));
    assert_eq!(model["kind"], "diagonal");
    let w = model["weights"].as_array().unwrap();
    assert_eq!(w.len(), 12);
    assert!(w.iter().all(|x| x.as_f64().unwrap() >= 0.0));
    assert_eq!(model["provenance"]["lambda"], 0.1);
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["config"]["seed"], 1);
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn fit_uniform_is_identity() {
    let dir = TempDir::new().unwrap();
    let o = confmetric(&["fit", "--method", "uniform", "--theory", "articulatory", "--confusion", "bundled:hebrew"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let model = read_json(&dir.path().join("model.json"));
    let w = model["weights"].as_array().unwrap();
    assert_eq!(w.len(), 14);
    assert!(w.iter().all(|x| x.as_f64() == Some(1.0)));
}

#[test]
fn fit_baselines_write_scores() {
    let dir = TempDir::new().unwrap();
    let o = confmetric(&["fit", "--method", "frisch", "--theory", "phonological", "--confusion", "bundled:hebrew"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let scores = std::fs::read_to_string(dir.path().join("scores.csv")).unwrap();
    let row = scores.lines().nth(1).unwrap();
    assert_eq!(row.split(',').nth(1), Some("1"));
    assert!(!dir.path().join("model.json").exists());
}

#[test]
fn usage_errors() {
    let dir = TempDir::new().unwrap();
    let unknown = confmetric(&["fit", "--method", "svm", "--theory", "articulatory", "--confusion", "bundled:hebrew"], dir.path());
    assert_eq!(unknown.status.code(), Some(64));
    let no_theory = confmetric(&["fit", "--method", "ls-diag", "--confusion", "bundled:hebrew"], dir.path());
    assert_eq!(no_theory.status.code(), Some(64));
    let lambda_oasis = confmetric(
        &["fit", "--method", "oasis", "--theory", "articulatory", "--confusion", "bundled:hebrew", "--lambda", "1"],
        dir.path(),
    );
    assert_eq!(lambda_oasis.status.code(), Some(64));
    let both = confmetric(
        &["fit", "--method", "uniform", "--theory", "articulatory", "--confusion", "bundled:hebrew", "--distances", "x.csv"],
        dir.path(),
    );
    assert_eq!(both.status.code(), Some(64));
    let no_bundle = confmetric(&["distances", "--confusion", "bundled:luce"], dir.path());
    assert_eq!(no_bundle.status.code(), Some(2));
    assert_eq!(bare(&["--help"]).status.code(), Some(0));
}

#[test]
fn evaluate_two_methods_reports_a_comparison() {
    let dir = TempDir::new().unwrap();
    let args = ["evaluate", "--method", "ls-diag", "--method", "uniform", "--theory", "articulatory", "--confusion", "bundled:hebrew", "--seed", "1"];
    let o = confmetric(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = read_json(&dir.path().join("evaluation.json"));
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["folds"].as_array().unwrap().len(), 19);
    let comparisons = doc["comparisons"].as_array().unwrap();
    assert_eq!(comparisons.len(), 1);
    let p = comparisons[0]["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    assert!(dir.path().join("folds_ls-diag.csv").exists());
    assert!(reports[0]["mean_rho"].as_f64().unwrap() > reports[1]["mean_rho"].as_f64().unwrap());
}

#[test]
fn evaluate_single_method_has_no_comparison() {
    let dir = TempDir::new().unwrap();
    let o = confmetric(&["evaluate", "--method", "pmv", "--theory", "articulatory", "--confusion", "bundled:hebrew"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = read_json(&dir.path().join("evaluation.json"));
    assert!(doc.get("comparisons").is_none());
}

#[test]
fn mds_with_two_overlays() {
    let dir = TempDir::new().unwrap();
    let o = confmetric(&["mds", "--confusion", "bundled:hebrew", "--overlay", "nasal", "--overlay", "approximant"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let svg = std::fs::read_to_string(dir.path().join("mds.svg")).unwrap();
    assert_eq!(svg.matches("<ellipse").count(), 2);
    assert_eq!(svg.matches(r#"class="point""#).count(), 19);
    let csv = std::fs::read_to_string(dir.path().join("mds.csv")).unwrap();
    assert!(csv.starts_with("label,x,y\n"));
    assert_eq!(csv.lines().count(), 20);
}

#[test]
fn ablate_has_one_row_per_feature() {
    let dir = TempDir::new().unwrap();
    let o = confmetric(&["ablate", "--theory", "phonological", "--confusion", "bundled:hebrew"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("ablation.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("feature,delta_mean_rho"));
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn saliency_report() {
    let dir = TempDir::new().unwrap();
    let o = confmetric(&["saliency", "--theory", "articulatory", "--confusion", "bundled:hebrew"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_json(&dir.path().join("saliency.json"));
    assert_eq!(report["n_models"], 19);
    assert_eq!(report["features"].as_array().unwrap().len(), 14);
}

#[test]
fn minimal_pairs_with_identical_datasets_lie_on_the_diagonal() {
    let dir = TempDir::new().unwrap();
    let first = confmetric(&["distances", "--confusion", "bundled:hebrew"], dir.path());
    assert_eq!(first.status.code(), Some(0));
    let other = format!("copy=distances:{}", dir.path().join("distances.csv").display());
    let o = confmetric(&["minimal-pairs", "--confusion", "bundled:hebrew", "--other", &other], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_json(&dir.path().join("minimal_pairs.json"));
    let pairs = report["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 5);
    for p in pairs {
        let r = p["ranks"].as_array().unwrap();
        assert_eq!(r[0], r[1]);
    }
    assert_eq!(report["comparisons"][0]["p_value"], 1.0);
    assert!(std::fs::read_to_string(dir.path().join("minimal_pairs.svg")).unwrap().contains(r#"class="diagonal""#));
}

#[test]
fn compare_languages_identical_data() {
    let dir = TempDir::new().unwrap();
    confmetric(&["distances", "--confusion", "bundled:hebrew"], dir.path());
    let other = format!("copy=distances:{}", dir.path().join("distances.csv").display());
    let o = confmetric(
        &["compare-languages", "--theory", "articulatory", "--confusion", "bundled:hebrew", "--other", &other],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("normalized_weights.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("feature,hebrew,copy"));
    let mut total = 0.0;
    for line in csv.lines().skip(1) {
        let cells: Vec<f64> = line.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
        assert!((cells[0] - cells[1]).abs() < 1e-12);
        total += cells[0];
    }
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["fit", "--method", "oasis-diag", "--theory", "articulatory", "--confusion", "bundled:hebrew", "--seed", "3", "--iterations", "2000"];
    assert_eq!(confmetric(&args, a.path()).status.code(), Some(0));
    assert_eq!(confmetric(&args, b.path()).status.code(), Some(0));
    for file in ["model.json", "manifest.json"] {
        let x = std::fs::read_to_string(a.path().join(file)).unwrap();
        let y = std::fs::read_to_string(b.path().join(file)).unwrap().replace(b.path().to_str().unwrap(), a.path().to_str().unwrap());
        assert_eq!(x, y, "{file}");
    }
}

#[test]
fn data_dir_override() {
    let data = TempDir::new().unwrap();
    let out = TempDir::new().unwrap();
    let text = confmetric::distances::HEBREW_CONFUSION_CSV.replacen("b,282", "b,300", 1);
    std::fs::write(data.path().join("hebrew_confusion.csv"), &text).unwrap();
    let run = |extra: Option<&Path>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_confmetric"));
        cmd.args(["distances", "--confusion", "bundled:hebrew", "--out-dir"]).arg(out.path());
        match extra {
            Some(dir) => cmd.env("CONFMETRIC_DATA_DIR", dir),
            None => cmd.env_remove("CONFMETRIC_DATA_DIR"),
        };
        cmd.output().unwrap()
    };
    assert_eq!(run(None).status.code(), Some(0));
    let bundled = std::fs::read_to_string(out.path().join("distances.csv")).unwrap();
    assert_eq!(run(Some(data.path())).status.code(), Some(0));
    let overridden = std::fs::read_to_string(out.path().join("distances.csv")).unwrap();
    assert_ne!(bundled, overridden);
    let manifest = read_json(&out.path().join("manifest.json"));
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap(), sha256_hex(text.as_bytes()));

    let empty = TempDir::new().unwrap();
    let o = run(Some(empty.path()));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("hebrew_confusion.csv"));
}

#[test]
fn defaults_print_the_solver_config() {
    let o = bare(&["defaults"]);
    assert_eq!(o.status.code(), Some(0));
    let cfg = SolverConfig::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(cfg, SolverConfig::default());
}
