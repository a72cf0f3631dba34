use std::collections::HashMap;
use std::process::{Command, Output};

use pvsim_core::{
    bundled_panel, datasheet_to_toml, estimate_parameters, export_curve_csv, generate_iv_curve,
    ConditionedModel, EnvConditions, StcContext,
};

fn pvsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn key_values(text: &str) -> HashMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn num(map: &HashMap<String, String>, key: &str) -> f64 {
    map[key].parse().unwrap()
}

fn rows(csv_text: &str) -> Vec<Vec<f64>> {
    csv_text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn estimate_bundled_panel() {
    let kv = key_values(&stdout(&pvsim(&["estimate", "--panel", "bp_sx_150"])));
    assert!((num(&kv, "n") - 1.64).abs() <= 0.01);
    assert!((num(&kv, "rs_ohm") - 0.342).abs() <= 0.005);
    assert!((num(&kv, "i0_a") - 2.83e-6).abs() <= 0.05e-6);
    assert_eq!(kv["iterations"], "2");
    assert!(num(&kv, "residual") <= 1e-4);
}

#[test]
fn estimate_from_datasheet_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bp.toml");
    std::fs::write(&path, datasheet_to_toml(&bundled_panel("bp_sx_150").unwrap())).unwrap();
    let from_file = stdout(&pvsim(&["estimate", "--datasheet", path.to_str().unwrap()]));
    let bundled = stdout(&pvsim(&["estimate", "--panel", "bp_sx_150"]));
    assert_eq!(from_file, bundled);
}

#[test]
fn estimate_input_errors() {
    let out = pvsim(&["estimate", "--datasheet", "missing.file"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.file"));

    let out = pvsim(&["estimate", "--panel", "bp_sx_150", "--datasheet", "x"]);
    assert_eq!(out.status.code(), Some(2));

    let out = pvsim(&["estimate"]);
    assert_eq!(out.status.code(), Some(2));

    let out = pvsim(&["estimate", "--panel", "no_such_panel"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bp_sx_150"));
}

#[test]
fn estimate_failure_names_class() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "voc_stc = 43.5\nisc_stc = 4.75\nvmp_stc = 10.0\nimp_stc = 0.5\n\
         cell_count = 72\nalpha_isc = 0.00065\nbeta_voc = -0.16\n",
    )
    .unwrap();
    let out = pvsim(&["estimate", "--datasheet", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: estimation failed ["), "{err}");
}

#[test]
fn curve_defaults_hit_datasheet_mpp() {
    let text = stdout(&pvsim(&["curve", "--panel", "bp_sx_150"]));
    assert!(text.starts_with("voltage_V,current_A,power_W\n43.5,0,0\n"));
    let best = rows(&text)
        .into_iter()
        .max_by(|a, b| a[2].total_cmp(&b[2]))
        .unwrap();
    assert!((best[0] - 34.5).abs() < 0.05, "{best:?}");
    assert!((best[1] - 4.35).abs() < 0.01, "{best:?}");
    assert!((best[2] - 150.1).abs() < 0.1, "{best:?}");
}

#[test]
fn curve_matches_library_output() {
    let text = stdout(&pvsim(&[
        "curve", "--panel", "bp_sx_150", "--temperature", "75", "--points", "500",
    ]));
    let ctx = StcContext::default();
    let ds = bundled_panel("bp_sx_150").unwrap();
    let params = estimate_parameters(&ds, &ctx).unwrap();
    let env = EnvConditions::from_interface_units(1000.0, 75.0, &ctx).unwrap();
    let curve = generate_iv_curve(&ds, &params, &env, &ctx, 500).unwrap();
    assert_eq!(text, export_curve_csv(&curve));
    assert!(text.lines().count() - 1 <= 500);
}

#[test]
fn curve_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let out = pvsim(&["curve", "--panel", "bp_sx_150", "--out", path.to_str().unwrap()]);
    assert!(stdout(&out).is_empty());
    let expected = stdout(&pvsim(&["curve", "--panel", "bp_sx_150"]));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), expected);
}

#[test]
fn curve_rejects_zero_irradiance() {
    let out = pvsim(&["curve", "--panel", "bp_sx_150", "--irradiance", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("irradiance must be positive"));
    let out = pvsim(&["curve", "--panel", "bp_sx_150", "--points", "1"]);
    assert!(!out.status.success());
}

fn dense_grid_mpp(temperature_c: f64) -> f64 {
    let ctx = StcContext::default();
    let ds = bundled_panel("bp_sx_150").unwrap();
    let params = estimate_parameters(&ds, &ctx).unwrap();
    let env = EnvConditions::from_interface_units(1000.0, temperature_c, &ctx).unwrap();
    let m = ConditionedModel::new(&ds, &params, &env, &ctx).unwrap();
    let steps = 1_000_000;
    (0..=steps)
        .map(|j| {
            let i = m.isc_gt * j as f64 / steps as f64;
            i * (m.n / m.m_t * ((m.isc_gt - i + m.i0_gt) / m.i0_gt).ln() - i * m.rs)
        })
        .fold(f64::MIN, f64::max)
}

#[test]
fn mpp_reports() {
    let kv = key_values(&stdout(&pvsim(&["mpp", "--panel", "bp_sx_150"])));
    assert!((num(&kv, "p_mp") - 150.0).abs() <= 1.5);
    assert!((num(&kv, "v_mp") - 34.5).abs() <= 0.5);
    assert!((num(&kv, "p_mp") - num(&kv, "v_mp") * num(&kv, "i_mp")).abs() < 1e-9);

    let kv = key_values(&stdout(&pvsim(&[
        "mpp", "--panel", "bp_sx_150", "--temperature", "50",
    ])));
    let oracle = dense_grid_mpp(50.0);
    assert!((num(&kv, "p_mp") - oracle).abs() / oracle <= 1e-3);

    let kv = key_values(&stdout(&pvsim(&["mpp", "--panel", "bp_sx_150", "--points", "2"])));
    assert_eq!(num(&kv, "p_mp"), 0.0);
    assert!(kv["index"] == "0" || kv["index"] == "1");
}

#[test]
fn temperature_sweep_files() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("temps.csv");
    let listing = stdout(&pvsim(&[
        "sweep",
        "--panel",
        "bp_sx_150",
        "--temperatures",
        "0,25,50,75",
        "--out",
        base.to_str().unwrap(),
    ]));
    assert_eq!(listing.lines().count(), 4);
    for t in [0.0, 25.0, 50.0, 75.0] {
        let path = dir.path().join(format!("temps_{t}.csv"));
        let text = std::fs::read_to_string(&path).unwrap();
        let voc = rows(&text)[0][0];
        assert!((voc - (43.5 - 0.16 * (t - 25.0))).abs() <= 0.01, "T={t}: {voc}");
    }
}

#[test]
fn irradiance_sweep_files() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("irr.csv");
    stdout(&pvsim(&[
        "sweep",
        "--panel",
        "bp_sx_150",
        "--irradiances",
        "200,400,600,800,1000",
        "--points",
        "2000",
        "--out",
        base.to_str().unwrap(),
    ]));
    for (g, isc) in [(200, 0.95), (400, 1.90), (600, 2.85), (800, 3.80), (1000, 4.75)] {
        let text = std::fs::read_to_string(dir.path().join(format!("irr_{g}.csv"))).unwrap();
        // the current grid is uniform on [0, I_sc(G, T)]
        let step = rows(&text)[1][1];
        assert!((step * 1999.0 - isc).abs() <= 1e-6, "G={g}");
    }
}

#[test]
fn sweep_usage_errors() {
    assert_eq!(pvsim(&["sweep", "--panel", "bp_sx_150"]).status.code(), Some(2));
    let both = pvsim(&[
        "sweep", "--panel", "bp_sx_150", "--temperatures", "25", "--irradiances", "1000",
    ]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn sweep_to_stdout() {
    let text = stdout(&pvsim(&[
        "sweep", "--panel", "bp_sx_150", "--temperatures", "-10,25", "--points", "3",
    ]));
    let headers: Vec<&str> = text.lines().filter(|l| l.starts_with('#')).collect();
    assert_eq!(headers, ["# temperature_c=-10", "# temperature_c=25"]);
}

fn sign_changes(csv_text: &str) -> Vec<(f64, f64)> {
    let pts: Vec<(f64, f64)> = csv_text
        .lines()
        .skip(1)
        .map(|l| {
            let (n, f) = l.split_once(',').unwrap();
            (n.parse().unwrap(), f.parse().unwrap())
        })
        .filter(|(_, f): &(f64, f64)| f.is_finite())
        .collect();
    pts.windows(2)
        .filter(|w| w[0].1.signum() != w[1].1.signum())
        .map(|w| (w[0].0, w[1].0))
        .collect()
}

#[test]
fn fn_plot_scans() {
    let text = stdout(&pvsim(&[
        "fn-plot", "--panel", "bp_sx_150", "--n-min", "0.5", "--n-max", "10", "--count", "200",
    ]));
    assert!(text.starts_with("n,f_n\n"));
    assert_eq!(text.lines().count(), 201);
    assert_eq!(sign_changes(&text).len(), 1);

    let text = stdout(&pvsim(&[
        "fn-plot", "--panel", "bp_sx_150", "--n-min", "1.6", "--n-max", "1.7", "--count", "11",
    ]));
    let changes = sign_changes(&text);
    assert_eq!(changes.len(), 1);
    assert!(changes[0].0 < 1.645 && changes[0].1 > 1.635);

    let out = pvsim(&["fn-plot", "--panel", "bp_sx_150", "--n-min", "2", "--n-max", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
