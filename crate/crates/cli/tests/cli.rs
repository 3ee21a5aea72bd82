use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BASE: &str = "[scenario]\nid = \"base\"\nseed = 11\n\n[target]\nkind = \"sphere\"\ndiameter_m = 0.27\n";

fn spinegrip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinegrip"))
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

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(text: &str, name: &str) -> Vec<String> {
    let (header, rows) = table(text);
    let i = header.iter().position(|h| h == name).unwrap();
    rows.into_iter().map(|r| r[i].clone()).collect()
}

fn floats(values: &[String]) -> Vec<f64> {
    values.iter().map(|v| v.parse().unwrap()).collect()
}

#[test]
fn pressure_uniform_finger_rows() {
    let o = spinegrip(&[
        "pressure",
        "--phalanges",
        "4",
        "--length-m",
        "1",
        "--pulley-radius-m",
        "0.25",
        "--torque-nm",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(column(&out, "phalanx_index"), ["1", "2", "3", "4"]);
    let p = floats(&column(&out, "pressure_n_per_m"));
    for (got, want) in p.iter().zip([0.1, 1.0 / 6.0, 1.0 / 3.0, 1.0]) {
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }
}

#[test]
fn pressure_zero_tension_is_all_zero() {
    let o = spinegrip(&["pressure", "--tension-n", "0"]);
    assert!(o.status.success());
    assert!(floats(&column(&stdout(&o), "pressure_n_per_m"))
        .iter()
        .all(|p| *p == 0.0));
}

#[test]
fn pressure_negative_length_is_rejected() {
    let o = spinegrip(&["pressure", "--lengths-m", "-1,0.03", "--tension-n", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("phalanx length"), "{}", stderr(&o));
}

#[test]
fn pressure_needs_a_load() {
    let o = spinegrip(&["pressure"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn detach_writes_one_trace_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "a.toml", BASE);
    let out = dir.path().join("out");
    let o = spinegrip(&["detach", "--config", s(&cfg), "--reps", "5", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for seed in 11..16 {
        let trace = fs::read_to_string(out.join(format!("trace_seed{seed}.csv"))).unwrap();
        let (header, rows) = table(&trace);
        assert_eq!(
            header,
            [
                "time_s",
                "applied_force_n",
                "finger_1_load_n",
                "finger_2_load_n",
                "finger_3_load_n",
                "finger_4_load_n",
                "slip_count_cum"
            ]
        );
        assert!(!rows.is_empty());
        let slips: Vec<u64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
        assert!(slips.windows(2).all(|w| w[0] <= w[1]));
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(column(&summary, "seed"), ["11", "12", "13", "14", "15"]);
    assert!(column(&summary, "scenario_id").iter().all(|id| id == "base"));
}

#[test]
fn detach_without_out_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "a.toml", BASE);
    let o = spinegrip(&["detach", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unslippable_grip_reaches_the_force_cap() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[scenario]\nid = \"lock\"\nseed = 11\nforce_cap_n = 120\n\n[target]\nkind = \"sphere\"\ndiameter_m = 0.27\nbase_friction = 0.9\nslope_min_deg = 47.5\nslope_max_deg = 48\n";
    let cfg = write_config(&dir, "lock.toml", text);
    let out = dir.path().join("out");
    let o = spinegrip(&["detach", "--config", s(&cfg), "--reps", "3", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(floats(&column(&summary, "max_force_n")).iter().all(|f| *f == 120.0));
    assert!(column(&summary, "first_slip_n").iter().all(String::is_empty));
    assert!(column(&summary, "detached").iter().all(|d| d == "false"));
}

#[test]
fn sweep_covers_the_grid_in_canonical_order() {
    let dir = tempfile::tempdir().unwrap();
    let angles = "[0, 10, 20, 30, 40, 50, 60, 70, 80, 90]";
    let shuffled = "[90, 10, 50, 30, 0, 70, 20, 80, 40, 60]";
    let a = write_config(
        &dir,
        "a.toml",
        &format!("{BASE}\n[sweep]\nreps = 5\nangles_deg = {angles}\ntarget_diameters_m = [0.135, 0.27, 0.405]\n"),
    );
    let b = write_config(
        &dir,
        "b.toml",
        &format!("{BASE}\n[sweep]\nreps = 5\nangles_deg = {shuffled}\ntarget_diameters_m = [0.405, 0.135, 0.27]\n"),
    );
    let oa = spinegrip(&["sweep", "--config", s(&a)]);
    let ob = spinegrip(&["sweep", "--config", s(&b)]);
    assert!(oa.status.success(), "{}", stderr(&oa));
    assert_eq!(table(&stdout(&oa)).1.len(), 30);
    assert_eq!(oa.stdout, ob.stdout);
}

#[test]
fn single_cell_sweep_matches_detach_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "a.toml", BASE);
    let out = dir.path().join("det");
    let d = spinegrip(&["detach", "--config", s(&cfg), "--reps", "8", "--out", s(&out)]);
    let sw = spinegrip(&["sweep", "--config", s(&cfg), "--reps", "8"]);
    assert!(d.status.success() && sw.status.success());
    let maxima = floats(&column(
        &fs::read_to_string(out.join("summary.csv")).unwrap(),
        "max_force_n",
    ));
    let mean = maxima.iter().sum::<f64>() / maxima.len() as f64;
    let swept = floats(&column(&stdout(&sw), "mean_max_force_n"));
    assert_eq!(swept.len(), 1);
    assert!((swept[0] - mean).abs() <= 1e-6 * mean.abs(), "{} vs {mean}", swept[0]);
}

#[test]
fn mission_presets() {
    let moon = spinegrip(&["mission", "--mass-kg", "20", "--gravity", "moon"]);
    let mars = spinegrip(&["mission", "--mass-kg", "20", "--gravity", "Mars"]);
    let moon = floats(&column(&stdout(&moon), "required_force_n"))[0];
    let mars = floats(&column(&stdout(&mars), "required_force_n"))[0];
    assert!((moon - 10.8).abs() <= 0.01);
    assert!((mars - 24.73).abs() <= 0.01);
}

#[test]
fn mission_margin_and_unknown_body() {
    let o = spinegrip(&[
        "mission",
        "--mass-kg",
        "20",
        "--gravity",
        "3.71",
        "--capability-mean-n",
        "35.68",
        "--capability-std-n",
        "17.33",
    ]);
    let out = stdout(&o);
    assert_eq!(column(&out, "body"), ["custom"]);
    let margin = floats(&column(&out, "margin_sigma"))[0];
    assert!((margin - (35.68 - 74.2 / 3.0) / 17.33).abs() < 1e-8);

    let bad = spinegrip(&["mission", "--mass-kg", "20", "--gravity", "pluto"]);
    assert_eq!(bad.status.code(), Some(2));
    let err = stderr(&bad);
    assert!(
        err.contains("moon") && err.contains("mars") && err.contains("earth"),
        "{err}"
    );
}

#[test]
fn config_errors_are_listed_together() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "bad.toml",
        "[scenario]\nseed = 1\npull_angle = 30\n\n[target]\nkind = \"sphere\"\ndiameter_m = -1\nslope_distribution = \"gaussian\"\n",
    );
    let o = spinegrip(&["sweep", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("required key `id`"), "{err}");
    assert!(err.contains("pull_angle"), "{err}");
    assert!(err.contains("gaussian"), "{err}");
    assert!(err.contains("diameter"), "{err}");
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = spinegrip(&["sweep", "--config", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_workers_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "a.toml", BASE);
    let o = spinegrip(&["sweep", "--config", s(&cfg), "--reps", "1", "--workers", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

const ONE_CANDIDATE: &str = "\n[calibration]\nreps = 6\nlow_n = [45]\nhigh_n = [60]\nfloor = [0.1]\nrolloff_n = [5]\n";

#[test]
fn calibrate_single_candidate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "cal.toml", &format!("{BASE}{ONE_CANDIDATE}"));
    let out = dir.path().join("cal");
    let o = spinegrip(&["calibrate", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let snippet = fs::read_to_string(out.join("relatch.toml")).unwrap();
    assert_eq!(stdout(&o), snippet);
    for line in [
        "[relatch]",
        "low_n = 45\n",
        "high_n = 60\n",
        "floor = 0.1\n",
        "rolloff_n = 5\n",
    ] {
        assert!(snippet.contains(line), "{snippet}");
    }
    let response = fs::read_to_string(out.join("current_response.csv")).unwrap();
    let currents = column(&response, "current_a");
    assert_eq!(currents.len(), 6);

    let fitted = write_config(
        &dir,
        "fitted.toml",
        &format!("{BASE}\n{snippet}\n[sweep]\nreps = 6\ncurrents_a = [0.15, 0.175, 0.2, 0.225, 0.25, 0.275]\n"),
    );
    let sw = spinegrip(&["sweep", "--config", s(&fitted)]);
    assert!(sw.status.success(), "{}", stderr(&sw));
    let swept = stdout(&sw);
    assert_eq!(
        column(&swept, "mean_max_force_n"),
        column(&response, "mean_max_force_n")
    );
    assert_eq!(column(&swept, "std_max_force_n"), column(&response, "std_max_force_n"));
}

#[test]
fn calibrate_with_empty_search_space_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "cal.toml",
        &format!("{BASE}\n[calibration]\nreps = 2\nlow_n = [70]\nhigh_n = [60]\n"),
    );
    let o = spinegrip(&["calibrate", "--config", s(&cfg), "--out", s(&dir.path().join("cal"))]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
