//! Per-command behavior of the `crowdlab` binary: the worked examples for
//! label, aggregate, evaluate, and synth, plus the exit-code contract.

use std::f64::consts::LN_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crowdlab::annotation::{GoldLabels, LabelVocabulary};
use crowdlab::metrics::accuracy_vs_gold;
use crowdlab::{Distribution, SoftLabelMatrix};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_crowdlab")
}

fn run_ok(args: &[&str]) -> Output {
    let output = Command::new(bin()).args(args).output().unwrap();
    assert!(
        output.status.success(),
        "crowdlab {args:?} exited with {:?}:\n{}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn run_fail(args: &[&str], expected_code: i32) -> String {
    let output = Command::new(bin()).args(args).output().unwrap();
    let stderr = String::from_utf8_lossy(&output.stderr).into_owned();
    assert_eq!(
        output.status.code(),
        Some(expected_code),
        "crowdlab {args:?} should exit {expected_code}; stderr:\n{stderr}"
    );
    stderr
}

fn vocab(labels: &[&str]) -> LabelVocabulary {
    LabelVocabulary::new(labels.iter().map(|s| s.to_string()).collect()).unwrap()
}

fn write_soft(path: &Path, labels: &[&str], rows: &[(&str, &[f64])]) {
    let ids: Vec<String> = rows.iter().map(|(id, _)| id.to_string()).collect();
    let dists: Vec<Distribution> = rows
        .iter()
        .map(|(_, p)| Distribution::new(p.to_vec()).unwrap())
        .collect();
    let m = SoftLabelMatrix::new("temp", ids, dists).unwrap();
    crowdlab::io::write_soft_labels(&m, &vocab(labels), path).unwrap();
}

fn read_report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn spec_json(n_items: usize, k: usize, n_annotators: usize, seed: u64) -> String {
    let roles = vec![serde_json::json!({"kind": "faithful", "competence": 0.8}); n_annotators];
    serde_json::json!({
        "n_items": n_items,
        "k": k,
        "n_annotators": n_annotators,
        "annotator_roles": roles,
        "class_prior": vec![1.0 / k as f64; k],
        "coverage": 1.0,
        "seed": seed,
    })
    .to_string()
}

fn p(root: &Path, rel: &str) -> String {
    root.join(rel).to_str().unwrap().to_string()
}

#[test]
fn label_standard_emits_simplex_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("ann.csv");
    fs::write(
        &input,
        "item_id,annotator_id,label\n\
         i1,a1,cat\ni1,a2,cat\ni1,a3,dog\n\
         i2,a1,dog\ni2,a2,dog\n",
    )
    .unwrap();
    run_ok(&[
        "label",
        "--input",
        input.to_str().unwrap(),
        "--methods",
        "standard",
        "--out-dir",
        &p(dir.path(), "out"),
    ]);

    let written: Vec<PathBuf> = fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(written.len(), 1, "{written:?}");
    let (m, _) = crowdlab::io::read_soft_labels(&written[0]).unwrap();
    assert_eq!(m.method_name, "standard");
    assert_eq!(m.n_items(), 2);
    for row in &m.rows {
        let sum: f64 = row.probs().iter().sum();
        assert!((sum - 1.0).abs() <= 1e-11);
        assert!(row.probs().iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn label_seeded_model_methods_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.json"), spec_json(40, 3, 5, 9)).unwrap();
    run_ok(&[
        "synth",
        "--spec",
        &p(dir.path(), "spec.json"),
        "--out-dir",
        &p(dir.path(), "data"),
    ]);

    for run in ["first", "second"] {
        run_ok(&[
            "label",
            "--input",
            &p(dir.path(), "data/annotations.csv"),
            "--methods",
            "ds,mace",
            "--seed",
            "3",
            "--out-dir",
            &p(dir.path(), run),
        ]);
    }
    for file in ["ds.csv", "mace.csv", "ds_model.json", "mace_model.json"] {
        let a = fs::read(dir.path().join("first").join(file)).unwrap();
        let b = fs::read(dir.path().join("second").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn label_ds_tracks_softmax_on_a_planted_crowd() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.json"), spec_json(200, 3, 10, 21)).unwrap();
    run_ok(&[
        "synth",
        "--spec",
        &p(dir.path(), "spec.json"),
        "--out-dir",
        &p(dir.path(), "data"),
    ]);
    run_ok(&[
        "label",
        "--input",
        &p(dir.path(), "data/annotations.csv"),
        "--vocabulary",
        &p(dir.path(), "data/vocabulary.txt"),
        "--methods",
        "all",
        "--out-dir",
        &p(dir.path(), "labels"),
    ]);

    let (softmax, vocabulary) =
        crowdlab::io::read_soft_labels(dir.path().join("labels/softmax.csv")).unwrap();
    let (ds, _) = crowdlab::io::read_soft_labels(dir.path().join("labels/ds.csv")).unwrap();
    let gold = GoldLabels::load_csv(dir.path().join("data/gold.csv"), &vocabulary).unwrap();
    let softmax_acc = accuracy_vs_gold(&softmax, &gold).unwrap();
    let ds_acc = accuracy_vs_gold(&ds, &gold).unwrap();
    assert!(
        ds_acc >= softmax_acc - 0.05,
        "ds {ds_acc} fell behind softmax {softmax_acc}"
    );
}

#[test]
fn label_surfaces_parse_errors_with_line_context() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("ann.csv");
    fs::write(&input, "item_id,annotator_id,label\ni1,a1\n").unwrap();
    let stderr = run_fail(
        &[
            "label",
            "--input",
            input.to_str().unwrap(),
            "--out-dir",
            &p(dir.path(), "out"),
        ],
        1,
    );
    assert!(stderr.contains("ann.csv"), "{stderr}");
    assert!(stderr.contains("line"), "{stderr}");
}

#[test]
fn aggregate_average_of_identical_inputs_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let rows: &[(&str, &[f64])] = &[
        ("i1", &[0.7, 0.2, 0.1]),
        ("i2", &[0.25, 0.5, 0.25]),
        ("i3", &[0.0, 0.0, 1.0]),
    ];
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_soft(&a, &["x", "y", "z"], rows);
    fs::copy(&a, &b).unwrap();

    let out = dir.path().join("fused.csv");
    run_ok(&[
        "aggregate",
        "--inputs",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--method",
        "average",
        "--out",
        out.to_str().unwrap(),
    ]);

    let (fused, _) = crowdlab::io::read_soft_labels(&out).unwrap();
    for (row, (_, expected)) in fused.rows.iter().zip(rows) {
        for (got, want) in row.probs().iter().zip(*expected) {
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
    }
    // Round-trip invariant: nothing drifts on the way through the binary.
    assert_eq!(fs::read(&a).unwrap(), fs::read(&out).unwrap());
}

#[test]
fn aggregate_centroid_splits_a_symmetric_pair() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_soft(&a, &["x", "y"], &[("i1", &[0.8, 0.2])]);
    write_soft(&b, &["x", "y"], &[("i1", &[0.2, 0.8])]);

    let out = dir.path().join("centroid.csv");
    run_ok(&[
        "aggregate",
        "--inputs",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--method",
        "centroid",
        "--out",
        out.to_str().unwrap(),
    ]);

    let (fused, _) = crowdlab::io::read_soft_labels(&out).unwrap();
    assert!((fused.rows[0].probs()[0] - 0.5).abs() <= 1e-9);
    assert!((fused.rows[0].probs()[1] - 0.5).abs() <= 1e-9);
}

#[test]
fn aggregate_hybrid_with_pinned_temperatures_matches_centroid() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    write_soft(
        &a,
        &["x", "y", "z"],
        &[("i1", &[0.7, 0.2, 0.1]), ("i2", &[0.1, 0.6, 0.3])],
    );
    write_soft(
        &b,
        &["x", "y", "z"],
        &[("i1", &[0.5, 0.3, 0.2]), ("i2", &[0.2, 0.2, 0.6])],
    );
    write_soft(
        &c,
        &["x", "y", "z"],
        &[("i1", &[0.9, 0.05, 0.05]), ("i2", &[0.3, 0.4, 0.3])],
    );
    // Clamping both temperature bounds to 1 forces identity scaling, so
    // hybrid degenerates to the plain centroid.
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"temperature": {"t_min": 1.0, "t_max": 1.0}}"#).unwrap();

    let inputs = [a.to_str().unwrap(), b.to_str().unwrap(), c.to_str().unwrap()];
    let centroid_out = dir.path().join("centroid.csv");
    run_ok(&[
        "aggregate",
        "--inputs",
        inputs[0],
        inputs[1],
        inputs[2],
        "--method",
        "centroid",
        "--out",
        centroid_out.to_str().unwrap(),
    ]);
    let hybrid_out = dir.path().join("hybrid.csv");
    run_ok(&[
        "aggregate",
        "--inputs",
        inputs[0],
        inputs[1],
        inputs[2],
        "--method",
        "hybrid",
        "--config",
        config.to_str().unwrap(),
        "--out",
        hybrid_out.to_str().unwrap(),
    ]);

    let (centroid, _) = crowdlab::io::read_soft_labels(&centroid_out).unwrap();
    let (hybrid, _) = crowdlab::io::read_soft_labels(&hybrid_out).unwrap();
    for (c_row, h_row) in centroid.rows.iter().zip(&hybrid.rows) {
        for (cv, hv) in c_row.probs().iter().zip(h_row.probs()) {
            assert!((cv - hv).abs() <= 1e-6, "{cv} vs {hv}");
        }
    }

    let temps: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("hybrid.temps.json")).unwrap(),
    )
    .unwrap();
    for t in temps["temps"].as_array().unwrap() {
        assert_eq!(t.as_f64().unwrap(), 1.0);
    }
}

#[test]
fn aggregate_rejects_mismatched_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_soft(&a, &["x", "y"], &[("i1", &[0.8, 0.2])]);
    write_soft(&b, &["x", "z"], &[("i1", &[0.2, 0.8])]);

    let stderr = run_fail(
        &[
            "aggregate",
            "--inputs",
            a.to_str().unwrap(),
            b.to_str().unwrap(),
            "--method",
            "average",
            "--out",
            &p(dir.path(), "out.csv"),
        ],
        1,
    );
    // The diff summary names both label sets.
    assert!(stderr.contains("\"y\"") && stderr.contains("\"z\""), "{stderr}");
}

#[test]
fn evaluate_accuracy_of_one_hot_correct_labels_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let soft = dir.path().join("onehot.csv");
    write_soft(
        &soft,
        &["no", "yes"],
        &[
            ("i1", &[1.0, 0.0]),
            ("i2", &[0.0, 1.0]),
            ("i3", &[1.0, 0.0]),
        ],
    );
    let gold = dir.path().join("gold.csv");
    fs::write(&gold, "item_id,label\ni1,no\ni2,yes\ni3,no\n").unwrap();

    let report_path = dir.path().join("report.json");
    run_ok(&[
        "evaluate",
        "--soft-labels",
        soft.to_str().unwrap(),
        "--gold",
        gold.to_str().unwrap(),
        "--metrics",
        "accuracy",
        "--out",
        report_path.to_str().unwrap(),
    ]);

    let report = read_report(&report_path);
    assert_eq!(report["accuracy"]["onehot"].as_f64(), Some(1.0));
}

#[test]
fn evaluate_cll_of_uniform_logits_is_ln_two() {
    let dir = tempfile::tempdir().unwrap();
    let ids: Vec<String> = (0..10).map(|i| format!("i{i}")).collect();
    let logits = vec![vec![0.0, 0.0]; 10];
    let logits_path = dir.path().join("logits.csv");
    crowdlab::io::write_logits(&ids, &logits, &vocab(&["no", "yes"]), &logits_path).unwrap();
    let gold_lines: String = ids
        .iter()
        .enumerate()
        .map(|(i, id)| format!("{id},{}\n", if i % 2 == 0 { "no" } else { "yes" }))
        .collect();
    let gold = dir.path().join("gold.csv");
    fs::write(&gold, format!("item_id,label\n{gold_lines}")).unwrap();

    let report_path = dir.path().join("report.json");
    run_ok(&[
        "evaluate",
        "--logits",
        logits_path.to_str().unwrap(),
        "--gold",
        gold.to_str().unwrap(),
        "--metrics",
        "cll",
        "--out",
        report_path.to_str().unwrap(),
    ]);

    // Uniform predictions score -log(1/2) per item at every temperature.
    let report = read_report(&report_path);
    assert!((report["cll"].as_f64().unwrap() - LN_2).abs() <= 1e-9);
}

#[test]
fn evaluate_jsd_matrix_is_symmetric_with_zero_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let rows_for = |shift: f64| -> Vec<(String, Vec<f64>)> {
        (0..3)
            .map(|i| {
                let base = 0.2 + 0.1 * i as f64 + shift;
                (format!("i{i}"), vec![base, 1.0 - base])
            })
            .collect()
    };
    let names = ["m1", "m2", "m3", "m4"];
    let mut inputs = Vec::new();
    for (j, name) in names.iter().enumerate() {
        let path = dir.path().join(format!("{name}.csv"));
        let rows = rows_for(0.05 * j as f64);
        let borrowed: Vec<(&str, &[f64])> = rows
            .iter()
            .map(|(id, p)| (id.as_str(), p.as_slice()))
            .collect();
        write_soft(&path, &["x", "y"], &borrowed);
        inputs.push(path);
    }
    let gold = dir.path().join("gold.csv");
    fs::write(&gold, "item_id,label\ni0,x\ni1,x\ni2,y\n").unwrap();

    let report_path = dir.path().join("report.json");
    let mut args = vec!["evaluate".to_string(), "--soft-labels".to_string()];
    args.extend(inputs.iter().map(|p| p.to_str().unwrap().to_string()));
    args.extend([
        "--gold".to_string(),
        gold.to_str().unwrap().to_string(),
        "--metrics".to_string(),
        "jsd_matrix".to_string(),
        "--out".to_string(),
        report_path.to_str().unwrap().to_string(),
    ]);
    let arg_refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    run_ok(&arg_refs);

    let csv_text = fs::read_to_string(dir.path().join("report.jsd.csv")).unwrap();
    let lines: Vec<&str> = csv_text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "method,m1,m2,m3,m4");
    let cell = |r: usize, c: usize| -> f64 {
        lines[1 + r].split(',').nth(1 + c).unwrap().parse().unwrap()
    };
    for r in 0..4 {
        assert_eq!(cell(r, r), 0.0, "diagonal entry ({r},{r})");
        for c in 0..4 {
            assert_eq!(cell(r, c), cell(c, r), "asymmetry at ({r},{c})");
        }
    }
}

#[test]
fn evaluate_requires_a_readable_gold_file() {
    let dir = tempfile::tempdir().unwrap();
    let soft = dir.path().join("a.csv");
    write_soft(&soft, &["x", "y"], &[("i1", &[0.5, 0.5])]);
    let stderr = run_fail(
        &[
            "evaluate",
            "--soft-labels",
            soft.to_str().unwrap(),
            "--gold",
            &p(dir.path(), "missing.csv"),
            "--out",
            &p(dir.path(), "report.json"),
        ],
        1,
    );
    assert!(stderr.contains("missing.csv"), "{stderr}");
}

#[test]
fn synth_minimal_spec_yields_one_record_matching_gold() {
    let dir = tempfile::tempdir().unwrap();
    let spec = serde_json::json!({
        "n_items": 1,
        "k": 2,
        "n_annotators": 1,
        "annotator_roles": [{"kind": "faithful", "competence": 1.0}],
        "class_prior": [0.5, 0.5],
        "coverage": 1.0,
        "seed": 0,
    });
    fs::write(dir.path().join("spec.json"), spec.to_string()).unwrap();
    run_ok(&[
        "synth",
        "--spec",
        &p(dir.path(), "spec.json"),
        "--out-dir",
        &p(dir.path(), "data"),
    ]);

    let annotations = fs::read_to_string(dir.path().join("data/annotations.csv")).unwrap();
    let records: Vec<&str> = annotations.lines().skip(1).collect();
    assert_eq!(records.len(), 1, "{annotations}");
    let fields: Vec<&str> = records[0].split(',').collect();

    let gold = fs::read_to_string(dir.path().join("data/gold.csv")).unwrap();
    let gold_fields: Vec<&str> = gold.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[0], gold_fields[0]);
    // A fully competent annotator reproduces the planted label.
    assert_eq!(fields[2], gold_fields[1]);
}

#[test]
fn synth_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.json"), spec_json(25, 4, 3, 5)).unwrap();
    for run in ["first", "second"] {
        run_ok(&[
            "synth",
            "--spec",
            &p(dir.path(), "spec.json"),
            "--out-dir",
            &p(dir.path(), run),
        ]);
    }
    for file in ["annotations.csv", "gold.csv", "vocabulary.txt"] {
        let a = fs::read(dir.path().join("first").join(file)).unwrap();
        let b = fs::read(dir.path().join("second").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn synth_full_coverage_writes_every_pair() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.json"), spec_json(200, 3, 10, 1)).unwrap();
    run_ok(&[
        "synth",
        "--spec",
        &p(dir.path(), "spec.json"),
        "--out-dir",
        &p(dir.path(), "data"),
    ]);
    let annotations = fs::read_to_string(dir.path().join("data/annotations.csv")).unwrap();
    assert_eq!(annotations.lines().count(), 2001, "header plus 200 x 10 records");
}

#[test]
fn synth_rejects_invalid_specs_by_field() {
    let dir = tempfile::tempdir().unwrap();
    let spec = serde_json::json!({
        "n_items": 10,
        "k": 2,
        "n_annotators": 1,
        "annotator_roles": [{"kind": "faithful", "competence": 0.9}],
        "class_prior": [0.5, 0.5],
        "coverage": 2.0,
        "seed": 0,
    });
    fs::write(dir.path().join("spec.json"), spec.to_string()).unwrap();
    let stderr = run_fail(
        &[
            "synth",
            "--spec",
            &p(dir.path(), "spec.json"),
            "--out-dir",
            &p(dir.path(), "data"),
        ],
        1,
    );
    assert!(stderr.contains("coverage"), "{stderr}");
}

#[test]
fn usage_errors_exit_one() {
    run_fail(&["aggregate", "--method", "average"], 1);
    run_fail(&["no-such-command"], 1);
}
