use std::path::Path;
use std::process::{Command, Output};

use ising_neigh::harness::ResultTable;
use ising_neigh::SampleSet;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ising-neigh"))
        .args(args)
        .env("ISING_NEIGH_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn simulate(dir: &Path, n: &str, seed: &str) -> String {
    let path = dir.join(format!("s{n}_{seed}.txt"));
    let p = path.to_str().unwrap().to_string();
    let o = run(&["simulate", "--preset", "figure1", "--n", n, "--seed", seed, "--out", &p]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

/// Value of a `field,site,value` row; `site` empty for scalars.
fn field<'a>(text: &'a str, name: &str) -> Vec<(&'a str, &'a str)> {
    text.lines()
        .skip(1)
        .filter_map(|l| {
            let mut it = l.splitn(3, ',');
            let f = it.next()?;
            (f == name).then(|| (it.next().unwrap_or(""), it.next().unwrap_or("")))
        })
        .collect()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["select", "--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_and_input_errors_exit_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["select", "--site", "4"]).status.code(), Some(1));
    let o = run(&["select", "--samples", "/nonexistent/file", "--site", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let dir = tempfile::tempdir().unwrap();
    let s = simulate(dir.path(), "50", "1");
    assert_eq!(run(&["select", "--samples", &s, "--site", "99"]).status.code(), Some(1));
    assert_eq!(run(&["select", "--samples", &s, "--site", "4", "--delta", "0.5"]).status.code(), Some(1));
    assert_eq!(run(&["cut", "--samples", &s, "--site", "4", "--set", "1,3", "--cut", "cube:1"]).status.code(), Some(1));
}

#[test]
fn capacity_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.txt");
    let o = run(&[
        "simulate", "--preset", "sparse200", "--n", "10", "--sampler", "exact", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "experiment", "--scenario", "fig3_riskratio", "--preset", "sparse200", "--n", "100", "--replicas", "1",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_round_trips_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(dir.path(), "300", "5");
    let b = dir.path().join("b.bin");
    let model = dir.path().join("m.toml");
    let o = run(&[
        "simulate", "--preset", "figure1", "--n", "300", "--seed", "5", "--binary", "--out", b.to_str().unwrap(),
        "--write-model", model.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let ta = SampleSet::load(Path::new(&a)).unwrap();
    let tb = SampleSet::load(&b).unwrap();
    assert_eq!(ta.n(), 300);
    assert_eq!(ta.site_labels(), tb.site_labels());
    assert!((0..300).all(|r| ta.row(r) == tb.row(r)));
    let again = dir.path().join("again.txt");
    let o = run(&[
        "simulate", "--model", model.to_str().unwrap(), "--n", "300", "--seed", "5", "--out", again.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn select_reports_and_writes_a_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let s = simulate(dir.path(), "3000", "2");
    let ledger = dir.path().join("ledger.csv");
    let o = run(&["select", "--samples", &s, "--site", "4", "--ledger", ledger.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("field,site,value\n"));
    assert_eq!(field(&text, "constant").len(), 1);
    let rows = std::fs::read_to_string(&ledger).unwrap();
    assert!(rows.starts_with("V,|V|,sup,p_hat_min,penalty,score"));
    assert_eq!(rows.lines().count(), 257);
    let huge = run(&["select", "--samples", &s, "--site", "4", "--c", "1000"]);
    assert!(field(&stdout(&huge), "selected").is_empty());
}

#[test]
fn cut_reduce_and_estimate_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let s = simulate(dir.path(), "4000", "3");
    let never = run(&["cut", "--samples", &s, "--site", "4", "--set", "1,3,5", "--cut", "sqrt:0"]);
    assert!(never.status.success());
    let text = stdout(&never);
    let kept: Vec<&str> = field(&text, "estimate").iter().map(|(s, _)| *s).collect();
    assert_eq!(kept, ["1", "3", "5"]);

    let all = run(&["reduce", "--samples", &s, "--site", "4", "--eta", "0"]);
    let text = stdout(&all);
    assert_eq!(field(&text, "correlation").len(), 8);
    let none = run(&["reduce", "--samples", &s, "--site", "4", "--eta", "1"]);
    assert!(field(&stdout(&none), "kept").is_empty());
    let auto = run(&["reduce", "--samples", &s, "--site", "4"]);
    assert_eq!(field(&stdout(&auto), "floor").len(), 1);

    let est = run(&["estimate", "--samples", &s, "--site", "4", "--max-card", "4"]);
    assert!(est.status.success(), "{}", String::from_utf8_lossy(&est.stderr));
    let eff = run(&["estimate", "--samples", &s, "--site", "4"]);
    assert!(eff.status.success());
    assert_eq!(field(&stdout(&eff), "eta").len(), 1);
}

#[test]
fn experiment_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&[
            "experiment", "--scenario", "fig3_riskratio", "--n", "200,400", "--replicas", "3", "--seed", "9", "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let table = ResultTable::parse_csv(&text).unwrap();
    assert_eq!(table.rows.len(), 6);
    let svg = dir.path().join("a.svg");
    let o = run(&[
        "experiment", "--scenario", "fig2_variance", "--n", "200,400", "--replicas", "2", "--format", "svg", "--out",
        svg.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}
