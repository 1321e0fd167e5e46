use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spdc_core::thinlimit::psi_thin;
use spdc_core::{CrystalModel, SourceSetup, SymmetricSource};

fn spdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spdc"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a CSV output, split on commas, header first.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

const THIN: &str = r#"
[setup]
length = "10 um"
waist = "50 um"
ratio = 0.5

[computation]
model = "full-factorized"

[computation.jsa]
signal = ["800 nm", "820 nm"]
idler = ["800 nm", "820 nm"]
points = 9
"#;

#[test]
fn validate_echoes_table_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.toml", "[setup]\nlength = \"100 um\"\n");
    let out = spdc(&[
        "validate",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let text = report.to_string();
    assert!(text.contains("0.0776"), "{text}");
    assert!(text.contains("0.1133"), "{text}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("window in use"));
}

#[test]
fn missing_crystal_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.toml", "crystal = \"nowhere.toml\"\n");
    let out = spdc(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.toml"));
}

#[test]
fn waist_below_paraxial_floor_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "a.toml",
        "[setup]\nwaist = \"1.62 um\"\nratio = 1.0\n",
    );
    let out = spdc(&["jsa", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("paraxial floor"));
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_fields_and_units_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "a.toml",
        "[setup]\nwaist = \"3 parsecs\"\ncolour = 1\n",
    );
    assert_eq!(
        spdc(&["validate", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(spdc(&["sweep", "--figure", "42"]).status.code(), Some(2));
    assert_eq!(spdc(&["brightness"]).status.code(), Some(2));
}

#[test]
fn jsa_is_transpose_symmetric_and_matches_thin_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "thin.toml", THIN);
    let out = spdc(&["jsa", "--config", cfg.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_rows(&stdout(&out));
    let header = &rows[0];
    assert_eq!(
        header.join(","),
        "omega_i,omega_s,lambda_i_um,lambda_s_um,re,im,abs,abs_error"
    );
    let (ci, cs, cr, cm) = (
        column(header, "omega_i"),
        column(header, "omega_s"),
        column(header, "re"),
        column(header, "im"),
    );
    let cells: Vec<[f64; 4]> = rows[1..]
        .iter()
        .map(|r| [ci, cs, cr, cm].map(|c| r[c].parse::<f64>().unwrap()))
        .collect();
    assert_eq!(cells.len(), 81);
    let peak = cells.iter().map(|c| c[2].hypot(c[3])).fold(0.0, f64::max);
    for c in &cells {
        let mirror = cells
            .iter()
            .find(|d| d[0] == c[1] && d[1] == c[0])
            .expect("transposed cell");
        assert!((c[2] - mirror[2]).abs() <= 1e-10 * peak);
        assert!((c[3] - mirror[3]).abs() <= 1e-10 * peak);
    }

    let p = SymmetricSource {
        waist: 50.0,
        ratio: 0.5,
        ..SymmetricSource::default()
    };
    let setup = SourceSetup::symmetric(CrystalModel::bbo().with_length(10.0), &p)
        .unwrap()
        .phase_matched()
        .unwrap();
    let mut compared = 0;
    for c in cells.iter().filter(|c| c[2].hypot(c[3]) > 1e-3 * peak) {
        let thin = psi_thin(&setup, c[0], c[1]).unwrap();
        let diff = (thin.re - c[2]).hypot(thin.im - c[3]);
        assert!(
            diff <= 0.01 * thin.norm(),
            "({}, {}): {diff} vs {}",
            c[0],
            c[1],
            thin.norm()
        );
        compared += 1;
    }
    assert!(compared >= 9);
}

#[test]
fn map_ends_with_marker_rows() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
[setup]
waist = "50 um"
ratio = 0.5
alpha = "2.8 deg"

[computation.map]
idler_wavelength = "850.5 nm"
signal_wavelength = "769.5 nm"
points = 7
"#;
    let cfg = write_config(dir.path(), "map.toml", body);
    let out = spdc(&["jsa", "--map", "--config", cfg.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0].join(","), "kind,k_ix,k_sx,value");
    assert_eq!(rows.len(), 1 + 49 + 2);
    assert_eq!(rows[50][0], "kbar");
    assert_eq!(rows[51][0], "k0");
    let values: Vec<f64> = rows[1..50].iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(values.iter().cloned().fold(0.0, f64::max), 1.0);
    assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn figure_sweep_csv_layout_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = spdc(&["sweep", "--figure", "3", "--out", path.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("# spdc "));
    assert!(text.contains("# window:"));
    let rows = csv_rows(&text);
    assert_eq!(
        rows[0].join(","),
        "figure,model,length_um,waist_um,alpha_rad,theta_rad,r_star,r_uncertainty,brightness,normalized,abs_error,evaluations,status"
    );
    let r_star = column(&rows[0], "r_star");
    let first_r: f64 = rows[1][r_star].parse().unwrap();
    assert!((first_r - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
    assert!(rows[1..].iter().all(|r| r.last().unwrap() == "ok"));
}

#[test]
fn brightness_sweep_in_json() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
[setup]
length = "100 um"

[computation.sweep]
axis = "ratio"
from = 0.3
to = 1.2
points = 4
"#;
    let cfg = write_config(dir.path(), "b.toml", body);
    let out = spdc(&[
        "brightness",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let norm: Vec<f64> = rows
        .iter()
        .map(|r| r["normalized"].as_f64().unwrap())
        .collect();
    assert!(norm.contains(&1.0));
    assert!(norm[0] < 1.0 && norm[3] < 1.0);
    let sweep = spdc(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(sweep.status.code(), Some(2));
}
