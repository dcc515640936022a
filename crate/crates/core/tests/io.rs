use std::path::Path;
use std::process::Command;

use chemotaxis::environment::default_arena;
use chemotaxis::export::{
    read_trajectory_csv, write_field_csv, write_raster_csv, write_trajectory_csv, RASTER_HEADER,
};
use chemotaxis::trial::run_trial;
use chemotaxis::Config;

fn short_config() -> Config {
    let mut cfg = Config::default();
    cfg.sim.duration = 120.0;
    cfg
}

#[test]
fn trajectory_csv_round_trips_exactly() {
    let cfg = short_config();
    let (traj, _) = run_trial(&cfg.setup(), 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    write_trajectory_csv(&path, &traj.samples).unwrap();
    let back = read_trajectory_csv(&path).unwrap();
    assert_eq!(back.len(), traj.samples.len());
    for (a, b) in traj.samples.iter().zip(&back) {
        assert_eq!(
            [a.t, a.x, a.y, a.heading, a.speed, a.c_sensed],
            [b.t, b.x, b.y, b.heading, b.speed, b.c_sensed]
        );
    }
    // Rewriting what was read gives the same bytes.
    let again = dir.path().join("t2.csv");
    write_trajectory_csv(&again, &back).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&again).unwrap()
    );
}

#[test]
fn raster_csv_layout() {
    let cfg = short_config();
    let (traj, _) = run_trial(&cfg.setup(), 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_raster_csv(&path, &traj.raster).unwrap();
    let mut r = csv::Reader::from_path(&path).unwrap();
    assert!(r.headers().unwrap().iter().eq(RASTER_HEADER));
    let mut n = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let id: u8 = rec[1].parse().unwrap();
        assert!((1..=7).contains(&id));
        n += 1;
    }
    assert_eq!(n, traj.raster.len());
}

#[test]
fn field_csv_matches_field() {
    let f = default_arena();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    write_field_csv(&path, &f, 11).unwrap();
    let mut r = csv::Reader::from_path(&path).unwrap();
    let rows: Vec<[f64; 3]> = r
        .records()
        .map(|rec| {
            let rec = rec.unwrap();
            [
                rec[0].parse().unwrap(),
                rec[1].parse().unwrap(),
                rec[2].parse().unwrap(),
            ]
        })
        .collect();
    assert_eq!(rows.len(), 121);
    for [x, y, c] in rows {
        assert_eq!(c, f.concentration_at([x, y]).unwrap());
    }
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.toml");
    let mut cfg = Config::default();
    cfg.network.sensor.c_track = 50.0;
    cfg.sim.start_heading = Some(1.0);
    std::fs::write(&path, cfg.to_toml_string()).unwrap();
    assert_eq!(Config::load(&path).unwrap(), cfg);
    std::fs::write(&path, "[network]\nbias5 = \"loud\"\n").unwrap();
    let err = Config::load(&path).unwrap_err();
    assert!(err.to_string().contains("cfg.toml"), "{err}");
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_chemotaxis"))
        .args(args)
        .output()
        .unwrap()
}

fn out_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn cli_simulate_writes_bundle_and_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = cli(&[
            "simulate",
            "--seed",
            "4",
            "--duration",
            "60",
            "--out",
            out_arg(out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["trial_4.csv", "trial_4_raster.csv", "trial_4_result.json"] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn cli_subcommands_produce_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let runs: [(&[&str], &str); 6] = [
        (
            &["batch", "--trials", "2", "--duration", "30"],
            "batch.json",
        ),
        (&["levy", "--trials", "2", "--duration", "30"], "levy.json"),
        (
            &["step-response", "--duration", "20", "--at", "5"],
            "step_response.csv",
        ),
        (
            &["freq-curve", "--gradients", "0,0.1", "--v-t", "-64"],
            "freq_curve.csv",
        ),
        (&["field-export", "--grid", "5"], "field.csv"),
        (
            &["field-export", "--grid", "5", "--format", "json"],
            "field.json",
        ),
    ];
    for (args, file) in runs {
        let mut full = args.to_vec();
        full.extend(["--out", out]);
        let o = cli(&full);
        assert!(
            o.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(dir.path().join(file).exists(), "{file}");
    }
}

#[test]
fn cli_config_prints_loadable_toml() {
    let o = cli(&["config"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(Config::from_toml_str(&text).unwrap(), Config::default());
}

#[test]
fn cli_reports_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[sim]\ndt = -1.0\n").unwrap();
    let o = cli(&[
        "simulate",
        "--config",
        out_arg(&path),
        "--out",
        out_arg(dir.path()),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}
