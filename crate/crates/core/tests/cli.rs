use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

fn mvsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvsum"))
        .args(args)
        .env_remove("MVSUM_DIGEST")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn summarize_to(graph: &Path, model: &str, out: &Path) {
    let o = mvsum(&["summarize", s(graph), "--model", model, "-o", s(out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn summarize_matches_golden() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("three.nt");
    summarize_to(&fixture("graphs/three.nt"), "ACC", &out);
    assert_eq!(
        fs::read(&out).unwrap(),
        fs::read(fixture("golden/three.acc.nt")).unwrap()
    );

    let stdout = mvsum(&["summarize", s(&fixture("graphs/three.nt"))]).stdout;
    assert_eq!(
        stdout,
        fs::read(fixture("golden/three.acc.nt")).unwrap(),
        "ACC is the default model"
    );
}

#[test]
fn empty_graph_gives_header_only() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.nt");
    fs::write(&empty, "").unwrap();
    let out = mvsum(&["summarize", s(&empty), "--model", "AC"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "# mvs-summary v1 model=AC digest=sha256\n"
    );
}

#[test]
fn malformed_input_fails_fast_or_is_skipped() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.nt");
    fs::write(&bad, "<urn:a> <urn:p> <urn:b> .\n<urn:a> <urn:p> .\n").unwrap();
    let out = mvsum(&["summarize", s(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = mvsum(&["summarize", s(&bad), "--skip-malformed"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped 1"));
}

#[test]
fn multiple_inputs_form_one_graph_with_separate_blank_nodes() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.nt");
    let b = dir.path().join("b.nt");
    fs::write(&a, "_:n <urn:p> <urn:x> .\n").unwrap();
    fs::write(&b, "_:n <urn:q> <urn:x> .\n").unwrap();
    let text =
        String::from_utf8(mvsum(&["summarize", s(&a), s(&b), "--model", "AC"]).stdout).unwrap();
    assert!(text.contains("_:f0Nn") && text.contains("_:f1Nn"));

    let parts: Vec<PathBuf> = (0..4)
        .map(|i| fixture(&format!("graphs/part{i}.nt")))
        .collect();
    let mut args = vec!["summarize"];
    args.extend(parts.iter().map(|p| s(p)));
    args.extend(["--model", "CC"]);
    assert_eq!(
        mvsum(&args).stdout,
        fs::read(fixture("golden/parts.cc.nt")).unwrap()
    );
}

#[test]
fn digest_flag_and_environment() {
    let g = fixture("graphs/three.nt");
    let out = mvsum(&["summarize", s(&g), "--digest", "sha512"]);
    assert!(String::from_utf8_lossy(&out.stdout)
        .starts_with("# mvs-summary v1 model=ACC digest=sha512\n"));

    let out = Command::new(env!("CARGO_BIN_EXE_mvsum"))
        .args(["summarize", s(&g)])
        .env("MVSUM_DIGEST", "sha512")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("digest=sha512"));

    let out = Command::new(env!("CARGO_BIN_EXE_mvsum"))
        .args(["summarize", s(&g)])
        .env("MVSUM_DIGEST", "md5")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn merge_with_itself_is_identity() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("m.nt");
    let input = fixture("golden/corpus.acc.nt");
    let o = mvsum(&["merge", s(&input), s(&input), "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&input).unwrap());
}

#[test]
fn merge_case3_fixture_stats() {
    let dir = TempDir::new().unwrap();
    let (out, stats) = (dir.path().join("m.nt"), dir.path().join("stats.csv"));
    let o = mvsum(&[
        "merge",
        s(&fixture("golden/case3_left.ac.nt")),
        s(&fixture("golden/case3_right.ac.nt")),
        "-o",
        s(&out),
        "--stats",
        s(&stats),
    ]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&stats).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "left,right,edges_left,edges_right,edges_sum,edges_union,wall_ms,case1,case2,case3"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(
        &row[..6],
        ["case3_left.ac", "case3_right.ac", "7", "7", "14", "12"]
    );
    assert_eq!(&row[7..], ["0", "1", "1"]);
    assert!(lines.next().is_none());

    // The oracle: summarize the union of both graphs directly.
    let direct = mvsum(&[
        "summarize",
        s(&fixture("graphs/case3_left.nt")),
        s(&fixture("graphs/case3_right.nt")),
        "--model",
        "AC",
    ]);
    assert_eq!(fs::read(&out).unwrap(), direct.stdout);
}

#[test]
fn merge_refuses_model_mismatch() {
    let o = mvsum(&[
        "merge",
        s(&fixture("golden/three.ac.nt")),
        s(&fixture("golden/three.cc.nt")),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("mismatch"));
}

#[test]
fn merge_rejects_tampered_summary() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.nt");
    let text = fs::read_to_string(fixture("golden/three.ac.nt"))
        .unwrap()
        .replace("\"1\"", "\"5\"");
    fs::write(&bad, text).unwrap();
    assert_eq!(code(&mvsum(&["merge", s(&bad), s(&bad)])), 1);
}

fn summaries_dir(dir: &Path) -> PathBuf {
    let sums = dir.join("sums");
    fs::create_dir(&sums).unwrap();
    for i in 0..4 {
        summarize_to(
            &fixture(&format!("graphs/part{i}.nt")),
            "ACC",
            &sums.join(format!("part{i}.nt")),
        );
    }
    sums
}

#[test]
fn merge_all_strategies_agree_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let sums = summaries_dir(dir.path());
    let golden = fs::read(fixture("golden/parts.acc.nt")).unwrap();
    let runs: [&[&str]; 5] = [
        &["--strategy", "smallest-first"],
        &["--strategy", "largest-first"],
        &["--strategy", "random", "--seed", "9"],
        &["--strategy", "greedy-parallel", "--workers", "2"],
        &["--strategy", "greedy-parallel", "--workers", "4"],
    ];
    for (i, flags) in runs.iter().enumerate() {
        let (out, sched) = (
            dir.path().join(format!("o{i}.nt")),
            dir.path().join(format!("s{i}.csv")),
        );
        let mut args = vec![
            "merge-all",
            s(&sums),
            "-o",
            s(&out),
            "--schedule",
            s(&sched),
        ];
        args.extend_from_slice(flags);
        let o = mvsum(&args);
        assert_eq!(
            code(&o),
            0,
            "{flags:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert_eq!(fs::read(&out).unwrap(), golden, "{flags:?}");
        assert_eq!(
            fs::read_to_string(&sched).unwrap().lines().count(),
            4,
            "header + 3 steps"
        );
    }
}

#[test]
fn merge_all_single_file_and_usage_errors() {
    let dir = TempDir::new().unwrap();
    let one = dir.path().join("one");
    fs::create_dir(&one).unwrap();
    fs::copy(fixture("golden/corpus.cc.nt"), one.join("corpus.nt")).unwrap();
    let (out, sched) = (dir.path().join("out.nt"), dir.path().join("sched.csv"));
    let o = mvsum(&["merge-all", s(&one), "-o", s(&out), "--schedule", s(&sched)]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read(&out).unwrap(),
        fs::read(fixture("golden/corpus.cc.nt")).unwrap()
    );
    assert_eq!(
        fs::read_to_string(&sched).unwrap(),
        "step,left_id,right_id,edges_left,edges_right,wall_ms,case1,case2,case3\n"
    );

    assert_eq!(
        code(&mvsum(&["merge-all", s(&one), "--strategy", "random"])),
        2
    );
    assert_eq!(
        code(&mvsum(&[
            "merge-all",
            s(&one),
            "--strategy",
            "greedy-parallel",
            "--workers",
            "0"
        ])),
        2
    );
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(code(&mvsum(&["merge-all", s(&empty)])), 2);
    assert_eq!(
        code(&mvsum(&["merge-all", s(&dir.path().join("missing"))])),
        2
    );
}

#[test]
fn gen_is_deterministic_and_validated() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(
            code(&mvsum(&["gen", "--views", "3", "--seed", "5", "-o", s(d)])),
            0
        );
    }
    for f in ["view0.nt", "view1.nt", "view2.nt", "manifest.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    assert!(!a.join("view3.nt").exists());
    let manifest = fs::read_to_string(a.join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 4);
    assert!(manifest.starts_with("view,file,seed,vertices,edges,typed_vertices\n"));

    assert_eq!(
        code(&mvsum(&[
            "gen",
            "--overlap",
            "1.5",
            "-o",
            s(&dir.path().join("c"))
        ])),
        2
    );
    assert_eq!(
        code(&mvsum(&[
            "gen",
            "--type-prob",
            "-0.5",
            "-o",
            s(&dir.path().join("c"))
        ])),
        2
    );
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn bench_generated_views() {
    let dir = TempDir::new().unwrap();
    let (rec, fits) = (dir.path().join("rec.csv"), dir.path().join("fits.csv"));
    let o = mvsum(&[
        "bench",
        "--gen",
        "--views",
        "3",
        "--repeats",
        "1",
        "-o",
        s(&rec),
        "--fits",
        s(&fits),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&rec);
    assert_eq!(rows.len(), 6);
    let fit_rows = csv_rows(&fits);
    assert_eq!(fit_rows.len(), 6);
    assert!(fit_rows.iter().all(|r| r[0] == "ACC" && r[7] == "6"));

    // Same flags again: identical apart from the wall_ms column.
    let rec2 = dir.path().join("rec2.csv");
    mvsum(&[
        "bench",
        "--gen",
        "--views",
        "3",
        "--repeats",
        "1",
        "-o",
        s(&rec2),
    ]);
    let strip = |rows: Vec<Vec<String>>| {
        rows.into_iter()
            .map(|mut r| {
                r.remove(7);
                r
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(rows), strip(csv_rows(&rec2)));
}

#[test]
fn gen_zero_overlap_then_bench_has_no_case3() {
    let dir = TempDir::new().unwrap();
    let views = dir.path().join("views");
    assert_eq!(
        code(&mvsum(&[
            "gen",
            "--views",
            "3",
            "--overlap",
            "0",
            "-o",
            s(&views)
        ])),
        0
    );
    fs::remove_file(views.join("manifest.csv")).unwrap();
    let rec = dir.path().join("rec.csv");
    let o = mvsum(&[
        "bench",
        s(&views),
        "--model",
        "AC",
        "--repeats",
        "1",
        "--parallel",
        "-o",
        s(&rec),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&rec);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[10] == "0"));
}

#[test]
fn bench_needs_two_summaries() {
    let dir = TempDir::new().unwrap();
    let one = dir.path().join("one");
    fs::create_dir(&one).unwrap();
    fs::copy(fixture("graphs/three.nt"), one.join("three.nt")).unwrap();
    assert_eq!(code(&mvsum(&["bench", s(&one)])), 2);
    assert_eq!(code(&mvsum(&["bench", "--gen", "--views", "1"])), 2);
    assert_eq!(code(&mvsum(&["bench"])), 2);
}

#[test]
fn bench_strategy_timings() {
    let dir = TempDir::new().unwrap();
    let (rec, strat) = (dir.path().join("rec.csv"), dir.path().join("strat.csv"));
    let o = mvsum(&[
        "bench",
        "--gen",
        "--views",
        "4",
        "--repeats",
        "1",
        "-o",
        s(&rec),
        "--strategies",
        s(&strat),
        "--runs",
        "2",
        "--workers",
        "2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&strat);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[1] == "2"));
}
