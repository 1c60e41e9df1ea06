use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn harmory(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harmory"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn corpus(name: &str) -> String {
    fixtures().join("corpus").join(name).to_str().unwrap().to_string()
}

#[test]
fn parse_reports_pitch_classes() {
    let dir = tempfile::tempdir().unwrap();
    let o = harmory(dir.path(), &["parse", "C:maj7/3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["harte"], "C:maj7/3");
    assert_eq!(v["shorthand"], "maj7");
    assert_eq!(v["pitch_classes"], serde_json::json!([0, 4, 7, 11]));

    let o = harmory(dir.path(), &["parse", "N"]);
    assert_eq!(json(&o)["kind"], "NoChord");
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = harmory(dir.path(), &["parse", "C:maj(3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: "), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());

    assert_eq!(harmory(dir.path(), &["dist", "C", "N"]).status.code(), Some(2));
    assert_eq!(harmory(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(harmory(dir.path(), &["sim", "a", "b", "--measure", "cosine"]).status.code(), Some(2));
    let missing = harmory(dir.path(), &["segment", "/nonexistent/piece.chart"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("/nonexistent/piece.chart"));
}

#[test]
fn dist_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = harmory(dir.path(), &["dist", "C:maj", "G:maj", "--key", "C:maj"]);
    assert_eq!(stdout(&o), "5\n");
    let o = harmory(dir.path(), &["dist", "C:maj", "A:min", "--key", "C:maj"]);
    assert_eq!(stdout(&o), "7\n");
    let o = harmory(dir.path(), &["dist", "C:maj", "G:maj"]);
    let out = stdout(&o);
    assert!(out.starts_with("5\nnote: no --key given; used estimated key"), "{out}");
}

#[test]
fn segment_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = harmory(dir.path(), &["-q", "segment", &corpus("contrast.chart")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).is_empty());
    let v = json(&o);
    assert_eq!(v["boundaries"], serde_json::json!([4]));
    for suffix in ["boundaries.json", "boundaries.csv", "novelty.csv", "ssm.pgm"] {
        assert!(dir.path().join(format!("contrast.{suffix}")).is_file(), "{suffix}");
    }
    let pgm = std::fs::read_to_string(dir.path().join("contrast.ssm.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n8 8\n"));
    let csv = std::fs::read_to_string(dir.path().join("contrast.novelty.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn segment_rejects_an_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.chart");
    std::fs::write(&empty, "").unwrap();
    let o = harmory(dir.path(), &["segment", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("empty.boundaries.json").exists());
}

#[test]
fn sim_scores() {
    let dir = tempfile::tempdir().unwrap();
    let pop = corpus("pop.chart");
    for m in ["dtw", "tpsd", "lharp"] {
        let v = json(&harmory(dir.path(), &["sim", &pop, &pop, "--measure", m]));
        assert_eq!(v["measure"], m);
        let expected = if m == "lharp" { v["coverage"][0].clone() } else { 1.0.into() };
        assert_eq!(v["score"], expected, "{m}");
    }
    let c = dir.path().join("c.chart");
    let g = dir.path().join("g.chart");
    std::fs::write(&c, "# key: C:maj\n0 1 C:maj\n").unwrap();
    std::fs::write(&g, "# key: C:maj\n0 1 G:maj\n").unwrap();
    let o = harmory(dir.path(), &["sim", c.to_str().unwrap(), g.to_str().unwrap(), "--measure", "dtw"]);
    let v = json(&o);
    assert_eq!(v["score"].as_f64().unwrap(), (-1.0f64).exp());
    assert_eq!(v["raw"], 5.0);
    let text = stdout(&o);
    let at: Vec<usize> = ["measure", "score", "raw", "params", "local_regions"]
        .iter()
        .map(|k| text.find(&format!("\"{k}\":")).unwrap())
        .collect();
    assert!(at.windows(2).all(|w| w[0] < w[1]), "field order in {text}");
}

#[test]
fn encode_prints_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = harmory(dir.path(), &["encode", &corpus("contrast.chart"), "--grid", "event"]);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("index,value,weight"));
    assert_eq!(lines.count(), 8);
}

#[test]
fn build_graph_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let o = harmory(dir.path(), &["-q", "build-graph", fixtures().join("corpus").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stats = json(&o);
    assert_eq!(stats["pieces"], 6);
    assert_eq!(stats["segments"], 19);
    let golden = std::fs::read(fixtures().join("corpus.golden.nt")).unwrap();
    assert_eq!(std::fs::read(dir.path().join("harmory.nt")).unwrap(), golden);

    let graph = dir.path().join("harmory.json");
    let again = json(&harmory(dir.path(), &["stats", graph.to_str().unwrap()]));
    assert_eq!(again, stats);

    // a medoid's own chords find it first
    let g: Value = serde_json::from_str(&std::fs::read_to_string(&graph).unwrap()).unwrap();
    let pattern = g["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|n| n["type"] == "pattern" && n["id"] == "pop/seg/0")
        .expect("pop/seg/0 is a medoid");
    let seg = g["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|n| n["type"] == "segment" && n["id"] == pattern["medoid"])
        .unwrap();
    let chords: Vec<&str> = seg["segment"]["chords"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    let mut args = vec!["query", graph.to_str().unwrap(), "--key", "C:maj", "-k", "3"];
    args.extend(&chords);
    let hits = json(&harmory(dir.path(), &args));
    assert_eq!(hits[0]["pattern"], "pop/seg/0");
    assert_eq!(hits[0]["score"], 1.0);
}

#[test]
fn build_graph_is_deterministic_across_threads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let dir = fixtures().join("corpus");
    Command::new(env!("CARGO_BIN_EXE_harmory"))
        .env("RAYON_NUM_THREADS", "1")
        .args(["-q", "--out-dir"])
        .arg(a.path())
        .arg("build-graph")
        .arg(&dir)
        .output()
        .unwrap();
    Command::new(env!("CARGO_BIN_EXE_harmory"))
        .env("RAYON_NUM_THREADS", "6")
        .args(["-q", "--out-dir"])
        .arg(b.path())
        .arg("build-graph")
        .arg(&dir)
        .output()
        .unwrap();
    for f in ["harmory.nt", "harmory.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn eval_covers_on_transposed_copies() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_dir = dir.path().join("corpus");
    std::fs::create_dir(&corpus_dir).unwrap();
    let pieces = [
        ("a", "C:maj", "C:maj G:maj A:min F:maj"),
        ("a_up", "D:maj", "D:maj A:maj B:min G:maj"),
        ("b", "C:maj", "C:maj F:maj C:maj G:7"),
        ("b_up", "Eb:maj", "Eb:maj Ab:maj Eb:maj Bb:7"),
    ];
    let mut cliques = String::from("piece_id,clique_id\n");
    for (id, key, chords) in pieces {
        let mut chart = format!("# id: {id}\n# key: {key}\n");
        for (i, c) in chords.split(' ').enumerate() {
            chart.push_str(&format!("{} 2 {c}\n", i * 2));
        }
        std::fs::write(corpus_dir.join(format!("{id}.chart")), chart).unwrap();
        cliques.push_str(&format!("{id},{}\n", &id[..1]));
    }
    let csv = dir.path().join("cliques.csv");
    std::fs::write(&csv, cliques).unwrap();
    for m in ["dtw", "tpsd"] {
        let o = harmory(
            dir.path(),
            &["-q", "eval-covers", corpus_dir.to_str().unwrap(), "--cliques", csv.to_str().unwrap(), "--measure", m],
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let report: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("covers_{m}.json"))).unwrap()).unwrap();
        assert_eq!(report["mean_average_precision"], 1.0, "{m}");
    }

    std::fs::write(&csv, "piece,clique\na,x\n").unwrap();
    let o = harmory(dir.path(), &["eval-covers", corpus_dir.to_str().unwrap(), "--cliques", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn matrix_and_bench_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = harmory(dir.path(), &["-q", "matrix", fixtures().join("corpus").to_str().unwrap(), "--measure", "tpsd"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("matrix_tpsd.csv")).unwrap();
    assert_eq!(csv, stdout(&o));
    assert_eq!(csv.lines().count(), 7);

    let o = harmory(dir.path(), &["-q", "bench", "--pieces", "4", "--beats", "32", "--repetitions", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("bench.json")).unwrap()).unwrap();
    assert_eq!(report["pairs"], 6);
    assert_eq!(report["measures"].as_array().unwrap().len(), 2);
    let o = harmory(dir.path(), &["bench", "--repetitions", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn closed_stdout_is_not_a_crash() {
    use std::process::Stdio;
    let dir = tempfile::tempdir().unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_harmory"))
        .arg("--out-dir")
        .arg(dir.path())
        .args(["-q", "bench", "--pieces", "40", "--beats", "8", "--repetitions", "3"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    drop(child.stdout.take());
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
}
