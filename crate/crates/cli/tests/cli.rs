use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use graphene_friction::scaled::parse_decimal;
use graphene_friction_cli::output::Table;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphene-friction"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (i32, String) {
    let path = dir.join(name);
    let mut all = args.to_vec();
    let path_str = path.to_str().unwrap().to_string();
    all.extend(["--out", &path_str]);
    let out = run(&all);
    let text = fs::read_to_string(&path).unwrap_or_default();
    (out.status.code().unwrap(), text)
}

/// `(mantissa, ln_scale)` of a density cell.
fn density(cell: &str) -> (f64, f64) {
    parse_decimal(cell).unwrap()
}

fn ratio(a: (f64, f64), b: (f64, f64)) -> f64 {
    if a.0 == 0.0 {
        return 0.0;
    }
    if b.0 == 0.0 {
        return f64::INFINITY;
    }
    a.0 / b.0 * (a.1 - b.1).exp()
}

fn column(table: &Table, name: &str) -> Vec<String> {
    let k = table.column(name).unwrap();
    table.rows.iter().map(|r| r[k].clone()).collect()
}

fn floats(table: &Table, name: &str) -> Vec<f64> {
    column(table, name).iter().map(|c| c.parse().unwrap()).collect()
}

#[test]
fn angular_table_peaks_forward() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "a.csv", &["angular", "--v", "4.5e-3", "--vf", "3e-3", "--aomega", "1.0"]);
    assert_eq!(code, 0);
    let table = Table::parse(&text).unwrap();
    assert_eq!(table.rows.len(), 720);
    assert_eq!(table.get_meta("flavour_factor"), Some("2N"));
    assert!(table.get_meta("units").is_some() && table.get_meta("tool").is_some());
    let cells = column(&table, "density");
    let peak = (0..cells.len())
        .max_by(|&i, &j| ratio(density(&cells[i]), density(&cells[j])).total_cmp(&1.0))
        .unwrap();
    let theta = floats(&table, "theta_p_rad")[peak];
    assert!(theta.min(TAU - theta) <= PI / 720.0, "peak at {theta}");
}

#[test]
fn below_threshold_gives_zero_table_and_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "a.csv", &["angular", "--v", "2e-3", "--vf", "3e-3", "--grid", "36"]);
    assert_eq!(code, 2);
    let table = Table::parse(&text).unwrap();
    assert_eq!(table.rows.len(), 36);
    assert!(column(&table, "density").iter().all(|c| c == "0"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["angular", "--v", "fast"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["angular", "--tol-rel", "0"]).status.code(), Some(1));
    assert_eq!(run(&["angular", "--v", "1.5"]).status.code(), Some(1));
}

#[test]
fn fwhm_grows_with_speed() {
    let dir = tempfile::tempdir().unwrap();
    let fwhm = |v: &str, name: &str| -> f64 {
        let (code, text) = run_to(dir.path(), name, &["angular", "--v", v, "--grid", "8"]);
        assert_eq!(code, 0);
        Table::parse(&text).unwrap().get_meta("fwhm_rad").unwrap().parse().unwrap()
    };
    assert!(fwhm("3.4e-3", "slow.csv") < fwhm("8e-3", "fast.csv"));
}

#[test]
fn degrees_flag_converts_input_angles() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "a.csv", &["angular", "--grid", "10", "--theta-max", "90", "--degrees"]);
    assert_eq!(code, 0);
    let thetas = floats(&Table::parse(&text).unwrap(), "theta_p_rad");
    assert!((thetas[9] - 0.9 * PI / 2.0).abs() < 1e-15);
}

#[test]
fn json_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["power", "--grid", "5", "--v-min", "2e-3", "--v-max", "6e-3"];
    let (_, csv) = run_to(dir.path(), "p.csv", &args);
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let (code, json) = run_to(dir.path(), "p.json", &json_args);
    assert_eq!(code, 0);
    let (a, b) = (Table::parse(&csv).unwrap(), Table::parse(&json).unwrap());
    assert_eq!(a.columns, b.columns);
    assert_eq!(a.rows, b.rows);
    let mut meta_a = a.metadata.clone();
    meta_a.sort();
    assert_eq!(meta_a, b.metadata);
}

#[test]
fn power_is_zero_below_threshold_and_rises_above() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "p.csv", &["power", "--grid", "9", "--v-min", "2e-3", "--v-max", "4e-3"]);
    assert_eq!(code, 0);
    let table = Table::parse(&text).unwrap();
    let speeds = floats(&table, "v");
    let powers: Vec<(f64, f64)> = column(&table, "power").iter().map(|c| density(c)).collect();
    for (v, p) in speeds.iter().zip(&powers) {
        if *v <= 3e-3 {
            assert_eq!(p.0, 0.0, "v = {v}");
        }
    }
    let above: Vec<&(f64, f64)> = speeds.iter().zip(&powers).filter(|(v, _)| **v > 3e-3).map(|(_, p)| p).collect();
    assert!(above.len() >= 3);
    for w in above.windows(2) {
        assert!(ratio(*w[1], *w[0]) > 1.0);
    }
}

#[test]
fn power_scales_with_omega_cubed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["power", "--grid", "3", "--v-min", "4e-3", "--v-max", "6e-3", "--aomega", "1"];
    let (_, one) = run_to(dir.path(), "one.csv", &args);
    let mut doubled = args.to_vec();
    doubled.extend(["--omega", "2"]);
    let (_, two) = run_to(dir.path(), "two.csv", &doubled);
    let (one, two) = (Table::parse(&one).unwrap(), Table::parse(&two).unwrap());
    for (a, b) in column(&one, "power").iter().zip(column(&two, "power")) {
        assert!((ratio(density(&b), density(a)) / 8.0 - 1.0).abs() < 1e-6);
    }
}

#[test]
fn momentum_map_vanishes_on_zero_contour() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(
        dir.path(),
        "m.csv",
        &["momentum-map", "--v", "6e-3", "--p-min", "667", "--p-max", "33334", "--p-points", "6", "--grid", "72"],
    );
    assert_eq!(code, 0);
    let table = Table::parse(&text).unwrap();
    let cells: Vec<(f64, f64)> = column(&table, "density").iter().map(|c| density(c)).collect();
    let max = *cells.iter().max_by(|a, b| ratio(**a, **b).total_cmp(&1.0)).unwrap();
    let contour = column(&table, "zero_contour");
    assert!(contour.iter().filter(|c| *c == "1").count() >= 12);
    for (d, flag) in cells.iter().zip(&contour) {
        if flag == "1" {
            assert!(ratio(*d, max) < 1e-6);
        }
    }
    // reflection about the velocity axis
    let p = floats(&table, "p_mod");
    let t = floats(&table, "theta_p_rad");
    for i in 0..p.len() {
        if let Some(j) = (0..p.len()).find(|&j| p[j] == p[i] && (t[j] - (TAU - t[i])).abs() < 1e-12 && t[i] > 0.0) {
            let (a, b) = (cells[i], cells[j]);
            if a.0 != 0.0 {
                assert!((ratio(a, b) - 1.0).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn momentum_map_scales_with_omega() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["momentum-map", "--p-points", "4", "--grid", "12", "--p-min", "300", "--p-max", "1500"];
    let (_, one) = run_to(dir.path(), "one.csv", &base);
    let scaled = ["momentum-map", "--p-points", "4", "--grid", "12", "--p-min", "600", "--p-max", "3000", "--omega", "2"];
    let (_, two) = run_to(dir.path(), "two.csv", &scaled);
    let (one, two) = (Table::parse(&one).unwrap(), Table::parse(&two).unwrap());
    assert_eq!(one.rows.len(), two.rows.len());
    let (p1, p2) = (floats(&one, "p_mod"), floats(&two, "p_mod"));
    for (a, b) in p1.iter().zip(&p2) {
        assert!((b / a - 2.0).abs() < 1e-12);
    }
    for (a, b) in column(&one, "density").iter().zip(column(&two, "density")) {
        let (a, b) = (density(a), density(&b));
        if a.0 != 0.0 {
            assert!((ratio(b, a) - 1.0).abs() < 1e-6, "{a:?} {b:?}");
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, extra) in [("events", vec!["--events", "3000", "--seed", "9"]), ("angular", vec!["--grid", "24"])] {
        let mut args = vec![cmd];
        args.extend(extra.iter());
        let (c1, first) = run_to(dir.path(), "one", &args);
        let (c2, second) = run_to(dir.path(), "two", &args);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(first, second, "{cmd}");
    }
}

#[test]
fn event_files_are_validated_on_load() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "e.csv", &["events", "--events", "500", "--seed", "4"]);
    assert_eq!(code, 0);
    let path = dir.path().join("e.csv");
    let check = run(&["check-events", path.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0), "{}", String::from_utf8_lossy(&check.stderr));
    // move one event off the constraint surface
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let last = lines.len() - 1;
    let mut fields: Vec<String> = lines[last].split(',').map(String::from).collect();
    let px: f64 = fields[0].parse().unwrap();
    fields[0] = format!("{:e}", px * 1.001 + 1.0);
    lines[last] = fields.join(",");
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, lines.join("\n")).unwrap();
    assert_eq!(run(&["check-events", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn sampled_angles_match_angular_table() {
    let dir = tempfile::tempdir().unwrap();
    let (code, events) = run_to(dir.path(), "e.csv", &["events", "--events", "20000", "--seed", "5"]);
    assert_eq!(code, 0);
    let (code, angular) = run_to(dir.path(), "a.csv", &["angular", "--grid", "1440"]);
    assert_eq!(code, 0);
    let (events, angular) = (Table::parse(&events).unwrap(), Table::parse(&angular).unwrap());
    let mut thetas: Vec<f64> = floats(&events, "px")
        .iter()
        .zip(floats(&events, "py"))
        .map(|(x, y)| y.atan2(*x).rem_euclid(TAU))
        .collect();
    thetas.sort_by(f64::total_cmp);
    // trapezoid CDF of the tabulated density, periodic in theta
    let grid = floats(&angular, "theta_p_rad");
    let cells: Vec<(f64, f64)> = column(&angular, "density").iter().map(|c| density(c)).collect();
    let peak = *cells.iter().max_by(|a, b| ratio(**a, **b).total_cmp(&1.0)).unwrap();
    let d: Vec<f64> = cells.iter().map(|c| ratio(*c, peak)).collect();
    let h = TAU / grid.len() as f64;
    let mut cdf = vec![0.0];
    for k in 0..grid.len() {
        let next = d[(k + 1) % d.len()];
        cdf.push(cdf[k] + 0.5 * h * (d[k] + next));
    }
    let total = *cdf.last().unwrap();
    let n = thetas.len() as f64;
    let mut ks = 0.0f64;
    for (k, &c) in cdf.iter().enumerate().take(grid.len()).skip(1) {
        let emp = thetas.partition_point(|&t| t < grid[k]) as f64 / n;
        ks = ks.max((emp - c / total).abs());
    }
    assert!(ks < 0.02, "KS distance {ks}");
}

#[test]
fn validate_passes_and_detects_flipped_sign() {
    let ok = run(&["validate"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.lines().count() >= 7 && !stdout.contains("FAIL"));
    let flipped = run(&["validate", "--flip-velocity-sign"]);
    assert_eq!(flipped.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&flipped.stdout).contains("oracle constancy     FAIL"));
    let slow = run(&["validate", "--v", "2e-3"]);
    assert_eq!(slow.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&slow.stdout).contains("SKIP"));
}
