use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn bdflow(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bdflow"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const BUMP: &str = "\
gamma = 1.2
delta = 0.8
a = 1
r_max = 5
n = 64
eta = 0.1
t_end = 0.2
output_every = 5
init = gaussian-bump
";

#[test]
fn check_exit_codes() {
    assert_eq!(bdflow(&["check", "--delta", "0.75", "--gamma", "1.0"]).0, 0);
    let (code, out, _) = bdflow(&["check", "--delta", "0.70", "--gamma", "1.0"]);
    assert_eq!(code, 2);
    assert!(out.contains("admissible = false"));
    assert_eq!(bdflow(&["check", "--delta", "zero", "--gamma", "1.0"]).0, 1);
    assert_eq!(bdflow(&["check", "--gamma", "1.0"]).0, 1);
    assert_eq!(bdflow(&["check", "--delta", "0.8", "--gamma", "0.5"]).0, 1);
    let (code, out, _) = bdflow(&["check", "--find-threshold", "--tol", "1e-6"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("delta_star = 0.7427"), "{out}");
    let (code, out, _) = bdflow(&["check", "--delta", "0.75", "--gamma", "1.0", "--p", "10"]);
    assert_eq!(code, 0);
    assert!(out.contains("p_in_range = true") && out.contains("older_condition = true"));
    assert_eq!(bdflow(&["frobnicate"]).0, 1);
    assert_eq!(bdflow(&["--help"]).0, 0);
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bump.cfg", BUMP);
    let csv = dir.path().join("out.csv");
    let (code, _, err) = bdflow(&["run", &cfg, csv.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 18);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.len() >= 2);
    let m0: f64 = rows[0][1].parse().unwrap();
    for row in &rows {
        assert_eq!(row.len(), 18);
        let m: f64 = row[1].parse().unwrap();
        assert!((m - m0).abs() <= 1e-12 * m0);
        assert_eq!(row[17], "1");
    }
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out.csv.summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["config"]["init"], "gaussian-bump");
    assert_eq!(summary["config"]["cfl"], "0.5");
    assert!(summary["final_state"]["mass_drift"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn run_is_reproducible_from_its_echo() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bump.cfg", BUMP);
    let first = dir.path().join("a.csv");
    assert_eq!(bdflow(&["run", &cfg, first.to_str().unwrap()]).0, 0);
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("a.csv.summary.json")).unwrap(),
    )
    .unwrap();
    let echo: String = summary["config"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| format!("{k} = {}\n", v.as_str().unwrap()))
        .collect();
    let echoed = write(&dir, "echo.cfg", &echo);
    let second = dir.path().join("b.csv");
    assert_eq!(bdflow(&["run", &echoed, second.to_str().unwrap()]).0, 0);
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
}

#[test]
fn steady_run_has_constant_columns() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "steady.cfg", &BUMP.replace("gaussian-bump", "steady"));
    let csv = dir.path().join("s.csv");
    assert_eq!(bdflow(&["run", &cfg, csv.to_str().unwrap()]).0, 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert!(rows.len() > 2);
    // every diagnostic column (t and the Picard bookkeeping aside) is unchanged
    for row in &rows {
        assert_eq!(row[1..15], rows[0][1..15]);
    }
}

#[test]
fn run_failures() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    let out = out.to_str().unwrap();
    assert_eq!(bdflow(&["run", "/nonexistent.cfg", out]).0, 1);
    let unknown = write(&dir, "u.cfg", &format!("{BUMP}colour = blue\n"));
    assert_eq!(bdflow(&["run", &unknown, out]).0, 1);
    let missing = write(&dir, "m.cfg", &BUMP.replace("t_end = 0.2\n", ""));
    assert_eq!(bdflow(&["run", &missing, out]).0, 1);
    let inadmissible = write(&dir, "i.cfg", &BUMP.replace("delta = 0.8", "delta = 0.7"));
    assert_eq!(bdflow(&["run", &inadmissible, out]).0, 1);
    let overridden = write(
        &dir,
        "o.cfg",
        &format!(
            "{}override_admissibility = true\n",
            BUMP.replace("delta = 0.8", "delta = 0.7")
        ),
    );
    assert_eq!(bdflow(&["run", &overridden, out]).0, 0);

    // a pressure that overflows makes the solver fail during the first step
    let table = write(&dir, "huge.txt", "1 1e300\n5 1e299\n");
    let huge = write(&dir, "h.cfg", &BUMP.replace("gaussian-bump", &table));
    let failed = dir.path().join("f.csv");
    let (code, _, err) = bdflow(&["run", &huge, failed.to_str().unwrap()]);
    assert_eq!(code, 3, "{err}");
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("f.csv.summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["status"], "failed");
    assert!(summary["failed_at"].as_f64().is_some());
}

#[test]
fn mms_exit_codes() {
    let dir = TempDir::new().unwrap();
    let t = write(
        &dir,
        "t.cfg",
        "mms_preset = transport\nladder = 64, 128, 256\n",
    );
    let (code, out, _) = bdflow(&["mms", &t]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("PASS"));
    let d = write(
        &dir,
        "d.cfg",
        "mms_preset = diffusion\nladder = 32, 64, 128\n",
    );
    assert_eq!(bdflow(&["mms", &d]).0, 0);
    let broken = write(
        &dir,
        "b.cfg",
        "mms_preset = diffusion\nladder = 32, 64, 128\nmms_fault = true\n",
    );
    assert_eq!(bdflow(&["mms", &broken]).0, 4);
    let bad = write(
        &dir,
        "x.cfg",
        "mms_preset = diffusion\nladder = 64, 32, 16\n",
    );
    assert_eq!(bdflow(&["mms", &bad]).0, 1);
    assert_eq!(bdflow(&["mms", &write(&dir, "y.cfg", "ladder = 8\n")]).0, 1);
}

fn sweep_rows(path: &str) -> (i32, Vec<Vec<String>>) {
    let (code, out, _) = bdflow(&["sweep", path]);
    let rows = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (code, rows)
}

#[test]
fn sweep_flips_between_074_and_075() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "s.cfg",
        "delta_min = 0.70\ndelta_max = 0.80\ndelta_step = 0.01\n",
    );
    let (code, rows) = sweep_rows(&cfg);
    assert_eq!(code, 0);
    assert_eq!(rows.len(), 11);
    for row in &rows {
        let delta: f64 = row[0].parse().unwrap();
        assert_eq!(row[5] == "1", delta > 0.745, "{row:?}");
    }
    let (_, again) = sweep_rows(&cfg);
    assert_eq!(rows, again);
}

#[test]
fn single_point_sweep_matches_check() {
    let dir = TempDir::new().unwrap();
    for delta in ["0.70", "0.7427", "0.7428", "0.9"] {
        let cfg = write(
            &dir,
            "p.cfg",
            &format!("delta_min = {delta}\ndelta_max = {delta}\ngamma = 1.3\n"),
        );
        let (_, rows) = sweep_rows(&cfg);
        assert_eq!(rows.len(), 1);
        let check = bdflow(&["check", "--delta", delta, "--gamma", "1.3"]).0;
        assert_eq!(rows[0][5] == "1", check == 0, "delta = {delta}");
    }
}

#[test]
fn sweep_errors_and_file_output() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        &dir,
        "b.cfg",
        "delta_min = 0.8\ndelta_max = 0.7\ndelta_step = 0.01\n",
    );
    assert_eq!(bdflow(&["sweep", &bad]).0, 1);
    let zero = write(&dir, "z.cfg", "delta_min = 0.7\ndelta_max = 0.8\n");
    assert_eq!(bdflow(&["sweep", &zero]).0, 1);
    let ok = write(&dir, "o.cfg", "delta_min = 0.7\ndelta_max = 0.8\ndelta_step = 0.05\ngamma_min = 1\ngamma_max = 2\ngamma_step = 0.5\n");
    let target = dir.path().join("region.csv");
    assert_eq!(bdflow(&["sweep", &ok, "-o", target.to_str().unwrap()]).0, 0);
    assert_eq!(
        std::fs::read_to_string(Path::new(&target))
            .unwrap()
            .lines()
            .count(),
        1 + 3 * 3
    );
}
