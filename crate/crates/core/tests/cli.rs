use std::path::Path;
use std::process::{Command, Output};

use personasage::datasets::{write_bundle, BundleMeta, GraphBundle};
use personasage::numeric::{rand_uniform, RandomStream};
use personasage::Graph;

const SMALL: [&str; 8] = ["--hidden-dim", "8", "--layers", "2", "--epochs", "4", "--clusterer", "kmeans"];

fn synthetic(dir: &Path) {
    let mut s = RandomStream::new(21);
    let n = 40;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if (u % 2) == (v % 2) { 0.3 } else { 0.03 };
            if s.next_f64() < p {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::new(n, &edges).unwrap();
    let bundle = GraphBundle {
        meta: BundleMeta {
            name: "synth".into(),
            num_nodes: n,
            num_edges: graph.num_edges(),
            num_features: 5,
            num_classes: 2,
            num_source_edges: None,
        },
        graph,
        features: rand_uniform(&mut s, n, 5, 0.0, 1.0).unwrap(),
        labels: (0..n).map(|v| v % 2).collect(),
    };
    write_bundle(dir, &bundle).unwrap();
}

fn personasage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_personasage")).args(args).output().unwrap()
}

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run(args: &[String]) -> Output {
    personasage(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn train_emits_seed_and_aggregate_rows() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path());
    let data = dir.path().to_str().unwrap();
    let args = with(&["train", "--dataset", data, "--k", "2", "--d", "3"], &SMALL);
    let out = stdout(&run(&args));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(
        lines[0],
        "dataset,task,model,features,clusterer,aggregator,K,D,seed,best_epoch,val_metric,test_metric"
    );
    for (i, line) in lines[1..6].iter().enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 12);
        assert_eq!(&cols[..9], &["synth", "lp", "personasage", "raw", "kmeans", "mean", "2", "3", &i.to_string()]);
        let metric: f64 = cols[11].parse().unwrap();
        assert!((0.0..=1.0).contains(&metric));
    }
    assert!(lines[6].contains(",mean,"));
    assert!(lines[7].contains(",std,"));
    assert!(!out.contains('\r'));

    let again = run(&args);
    assert_eq!(again.stdout, out.as_bytes(), "byte-identical rerun");

    let file = dir.path().join("out.csv");
    let trace = dir.path().join("trace.csv");
    let o = run(&with(
        &args.iter().map(String::as_str).collect::<Vec<_>>(),
        &["--output", file.to_str().unwrap(), "--trace", trace.to_str().unwrap()],
    ));
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&file).unwrap(), out);
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 1 + 5 * 5);
}

#[test]
fn seed_options_control_row_count() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path());
    let data = dir.path().to_str().unwrap();
    let out = stdout(&run(&with(&["train", "--dataset", data, "--seeds", "2", "--task", "nc"], &SMALL)));
    assert_eq!(out.lines().count(), 1 + 2 + 2);
    let out = stdout(&run(&with(&["train", "--dataset", data, "--seed-list", "9", "--model", "graphsage"], &SMALL)));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].contains(",graphsage,") && lines[1].contains(",1,") && lines[1].contains(",9,"));
    assert!(lines[3].ends_with(",0,0,0"), "{}", lines[3]);
}

#[test]
fn sweep_k1_matches_train_k1() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path());
    let data = dir.path().to_str().unwrap();
    let sweep = stdout(&run(&with(
        &["sweep-k", "--dataset", data, "--k-list", "1,2", "--total-dim", "6", "--seeds", "2"],
        &SMALL,
    )));
    let train = stdout(&run(&with(
        &["train", "--dataset", data, "--k", "1", "--d", "6", "--seeds", "2"],
        &SMALL,
    )));
    let sweep: Vec<&str> = sweep.lines().collect();
    let train: Vec<&str> = train.lines().collect();
    assert_eq!(sweep.len(), 1 + 4);
    assert_eq!(sweep[1], train[3]);
    assert_eq!(sweep[2], train[4]);
    assert!(sweep[3].contains(",2,3,mean,"));
}

#[test]
fn report_pivots_result_files() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path());
    let data = dir.path().to_str().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, model) in [(&a, "personasage"), (&b, "graphsage")] {
        let o = run(&with(
            &["train", "--dataset", data, "--model", model, "--seeds", "2", "--output", path.to_str().unwrap()],
            &SMALL,
        ));
        assert!(o.status.success());
    }
    let json = dir.path().join("report.json");
    let out = stdout(&personasage(&[
        "report",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]));
    assert!(out.contains('±'));
    assert!(out.contains("personasage") && out.contains("graphsage"));
    let cells: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(cells.to_string().contains("\"runs\":2"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path());
    let data = dir.path().to_str().unwrap();
    let code = |args: &[&str]| personasage(args).status.code().unwrap();

    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["train"]), 1);
    assert_eq!(code(&["train", "--dataset", data, "--aggregator", "median"]), 1);
    assert_eq!(code(&["sweep-k", "--dataset", data, "--k-list", "3-1"]), 1);
    assert_eq!(code(&["train", "--dataset", data, "--model", "graphsage", "--k", "3"]), 1);

    assert_eq!(code(&["train", "--dataset", "/nonexistent/bundle"]), 2);
    std::fs::write(dir.path().join("edges.csv"), "0,1\n1,oops\n").unwrap();
    let o = personasage(&["train", "--dataset", data]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("edges.csv:2"));
    let missing = dir.path().join("none.csv");
    assert_eq!(code(&["report", missing.to_str().unwrap()]), 2);
}

#[test]
fn diverging_training_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path());
    let data = dir.path().to_str().unwrap();
    let o = run(&with(&["train", "--dataset", data, "--lr", "1e200", "--seeds", "1"], &SMALL));
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
