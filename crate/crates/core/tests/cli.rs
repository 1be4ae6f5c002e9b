use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use potts_metastable::io::*;
use proptest::prelude::*;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_potts-metastable")).args(args).output().unwrap()
}

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn keys(v: &serde_json::Value, prefix: &str, out: &mut Vec<String>) {
    if let serde_json::Value::Object(m) = v {
        for (k, x) in m {
            let p = format!("{prefix}/{k}");
            out.push(p.clone());
            if k != "samples" {
                keys(x, &p, out);
            }
        }
    }
}

#[test]
fn landscape_output_is_byte_identical_across_runs() {
    let a = bin(&["landscape"]);
    let b = bin(&["landscape"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let (ta, tb) = (String::from_utf8(a.stdout.clone()).unwrap(), String::from_utf8(b.stdout).unwrap());
    let diff: Vec<_> = ta.lines().zip(tb.lines()).filter(|(x, y)| x != y).take(5).collect();
    assert!(ta == tb, "{diff:?}");
    let report = ReportEnvelope::from_json(std::str::from_utf8(&a.stdout).unwrap()).unwrap();
    assert_eq!(report.schema_version, SCHEMA_VERSION);
    assert_eq!(report.section("landscape").unwrap().provenance, Provenance::ExactInteger);
    assert_eq!(report.to_canonical_json().unwrap().as_bytes(), &a.stdout[..]);
}

#[test]
fn a_new_seed_changes_values_but_not_the_schema() {
    let run = |seed: &str| {
        let o = bin(&["simulate", "--seed", seed, "--beta", "1.5"]);
        assert!(o.status.success());
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()
    };
    let (a, b, a2) = (run("1"), run("2"), run("1"));
    assert_eq!(a, a2);
    assert_ne!(a, b);
    let (mut ka, mut kb) = (Vec::new(), Vec::new());
    keys(&a, "", &mut ka);
    keys(&b, "", &mut kb);
    ka.retain(|k| !k.contains("/config/seed"));
    kb.retain(|k| !k.contains("/config/seed"));
    assert_eq!(ka, kb);
    assert_eq!(a["sections"][0]["provenance"], "monte-carlo±CI");
}

#[test]
fn bad_configuration_exits_with_two_and_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ini");
    std::fs::write(&path, "[lattice]\nrows = 2\ncols = 3\n[fields]\nh1 = 0.5\nh2 = 0.4\nh3 = 0.9\n").unwrap();
    let o = bin(&["landscape", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("rows") && err.contains("h1"), "{err}");
    assert_eq!(bin(&["solve", "--beta", "-1"]).status.code(), Some(2));
    assert_eq!(bin(&["solve", "--config", "/nonexistent.ini"]).status.code(), Some(2));
}

#[test]
fn exceeding_the_budget_exits_with_three() {
    let o = bin(&["landscape", "--budget", "100"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
}

#[test]
fn out_directory_receives_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = bin(&["solve", "--beta", "2,3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let report = ReportEnvelope::from_json(&std::fs::read_to_string(out.join("solve.json")).unwrap()).unwrap();
    assert!(report.section("solve@2").is_some() && report.section("solve@3").is_some());
    let mut rows = csv::Reader::from_path(out.join("potential_beta_2.csv")).unwrap();
    assert_eq!(rows.headers().unwrap(), vec!["state", "energy", "potential"]);
    assert_eq!(rows.records().count(), 19_683);
}

#[test]
fn trajectory_dump_replays_to_its_energies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.ini");
    std::fs::write(
        &cfg,
        "[run]\nbeta = 1\nreplicas = 40\n[simulate]\nstart = 1\ntarget = 3\ntrajectory = true\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = bin(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let config = load_config(&cfg).unwrap();
    let model = config.model().unwrap();
    let mut state = potts_metastable::spin::SpinConfiguration::uniform(9, potts_metastable::spin::Spin::One);
    let mut reader = csv::Reader::from_path(out.join("trajectory_beta_1.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["time", "site", "spin", "energy"]);
    let mut last = 0.0;
    for r in reader.records() {
        let r = r.unwrap();
        let time: f64 = r[0].parse().unwrap();
        assert!(time >= last);
        last = time;
        let spin = potts_metastable::spin::Spin::from_index(r[2].parse::<usize>().unwrap() - 1);
        state = state.with(r[1].parse().unwrap(), spin);
        assert_eq!(model.params.format(model.energy(&state).unwrap()), &r[3]);
    }
    assert_eq!(state, potts_metastable::spin::SpinConfiguration::uniform(9, potts_metastable::spin::Spin::Three));
}

#[test]
fn shipped_golden_file_matches() {
    let config = load_config(&repo("configs/default.ini")).unwrap();
    let golden = load_golden(Path::new(config.golden.as_deref().unwrap())).unwrap();
    let mismatches = compare(&golden, &snapshot(&config).unwrap());
    assert!(mismatches.is_empty(), "{mismatches:?}");
    assert!(golden.entries.len() >= 15);
}

#[test]
fn golden_comparison_reports_drift() {
    let config = ExperimentConfig::default();
    let mut g = snapshot(&config).unwrap();
    let key = "energy[1]".to_string();
    g.entries.insert(key.clone(), GoldenValue::Exact("-1".into()));
    let m = compare(&g, &snapshot(&config).unwrap());
    assert_eq!(m.len(), 1);
    assert_eq!(m[0].key, key);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    write_golden(&path, &g).unwrap();
    assert_eq!(load_golden(&path).unwrap(), g);
}

fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
    (3..7_usize, 3..7_usize, 1..40_u32, 41..80_u32, 81..99_u32, prop::collection::vec(0..80_u32, 1..4), any::<u64>())
        .prop_map(|(rows, cols, a, b, c, betas, seed)| {
            let mut cfg = ExperimentConfig { rows, cols, seed, ..Default::default() };
            cfg.fields = [a, b, c].map(|x| format!("0.{x:02}"));
            cfg.betas = betas.into_iter().map(|b| b as f64 / 8.0).collect();
            cfg.simulate.max_time = Some(12.5);
            cfg.golden = Some("g.json".into());
            cfg
        })
}

proptest! {
    #[test]
    fn config_text_round_trips(cfg in arb_config()) {
        prop_assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
    }
}
