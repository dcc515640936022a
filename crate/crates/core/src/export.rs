//! CSV and JSON writers (and the trajectory reader).
//!
//! Column layouts:
//!
//! | file        | columns                                              |
//! |-------------|------------------------------------------------------|
//! | trajectory  | `t_s,x_mm,y_mm,heading_rad,speed_mm_s,C_mM`          |
//! | raster      | `t_s,neuron_id` (neuron ids 1..=7)                   |
//! | field       | `x_mm,y_mm,C_mM`                                     |
//! | freq curve  | `side,gradient_mM_s,V_T_mV,rate_Hz`                  |
//! | step resp.  | `t_s,C_mM,` then `u_d,b_d,i_d,u_h,b_h,threshold_mM,V_mV` per side, prefixed `L_`/`R_` |
//!
//! Floats are written in Rust's shortest round-trip form, so identical
//! inputs give identical bytes and re-reading recovers the exact values.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::ase::Side;
use crate::environment::ConcentrationField;
use crate::error::{Error, Result};
use crate::harness::{FreqPoint, StepResponseRow};
use crate::trial::{SpikeEvent, Trajectory, TrajectorySample};

pub const TRAJECTORY_HEADER: [&str; 6] =
    ["t_s", "x_mm", "y_mm", "heading_rad", "speed_mm_s", "C_mM"];
pub const RASTER_HEADER: [&str; 2] = ["t_s", "neuron_id"];
pub const FIELD_HEADER: [&str; 3] = ["x_mm", "y_mm", "C_mM"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_owned(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |e| {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(source) => Error::Io {
                    path: path.to_owned(),
                    source,
                },
                other => Error::Format {
                    path: path.to_owned(),
                    message: format!("{other:?}"),
                },
            }
        } else {
            Error::Format {
                path: path.to_owned(),
                message: e.to_string(),
            }
        }
    }
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
    }
}

pub fn write_trajectory_csv(path: &Path, samples: &[TrajectorySample]) -> Result<()> {
    write_rows(
        path,
        &TRAJECTORY_HEADER,
        samples.iter().map(|s| {
            [s.t, s.x, s.y, s.heading, s.speed, s.c_sensed]
                .iter()
                .map(f64::to_string)
                .collect()
        }),
    )
}

/// Reads a trajectory CSV. The file carries only the sensed concentration,
/// which is also used as the noiseless value.
pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectorySample>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(TRAJECTORY_HEADER) {
        return Err(Error::Format {
            path: path.to_owned(),
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut out = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err(path))?;
        let vals = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format {
                path: path.to_owned(),
                message: format!("line {:?}: {e}", record.position().map(|p| p.line())),
            })?;
        out.push(TrajectorySample {
            t: vals[0],
            x: vals[1],
            y: vals[2],
            heading: vals[3],
            speed: vals[4],
            c_sensed: vals[5],
            c_true: vals[5],
        });
    }
    Ok(out)
}

pub fn write_raster_csv(path: &Path, raster: &[SpikeEvent]) -> Result<()> {
    write_rows(
        path,
        &RASTER_HEADER,
        raster
            .iter()
            .map(|e| vec![e.t.to_string(), e.neuron.number().to_string()]),
    )
}

pub fn write_field_csv(path: &Path, field: &ConcentrationField, n: usize) -> Result<()> {
    write_rows(
        path,
        &FIELD_HEADER,
        field
            .grid(n)
            .into_iter()
            .map(|p| p.iter().map(f64::to_string).collect()),
    )
}

pub fn write_freq_curve_csv(path: &Path, points: &[FreqPoint]) -> Result<()> {
    write_rows(
        path,
        &["side", "gradient_mM_s", "V_T_mV", "rate_Hz"],
        points.iter().map(|p| {
            vec![
                side_name(p.side).to_owned(),
                p.gradient.to_string(),
                p.v_t.to_string(),
                p.rate_hz.to_string(),
            ]
        }),
    )
}

pub fn write_step_response_csv(path: &Path, rows: &[StepResponseRow]) -> Result<()> {
    let mut header = vec!["t_s".to_owned(), "C_mM".to_owned()];
    for prefix in ["L_", "R_"] {
        for col in ["u_d", "b_d", "i_d", "u_h", "b_h", "threshold_mM", "V_mV"] {
            header.push(format!("{prefix}{col}"));
        }
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_rows(
        path,
        &header,
        rows.iter().map(|r| {
            let mut v = vec![r.t, r.c];
            for s in [&r.left, &r.right] {
                v.extend([s.u_d, s.b_d, s.i_d, s.u_h, s.b_h, s.threshold, s.v]);
            }
            v.iter().map(f64::to_string).collect()
        }),
    )
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Format {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Writes `<stem>.csv` and `<stem>_raster.csv` into `dir`.
pub fn write_trajectory_bundle(dir: &Path, stem: &str, traj: &Trajectory) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_trajectory_csv(&dir.join(format!("{stem}.csv")), &traj.samples)?;
    write_raster_csv(&dir.join(format!("{stem}_raster.csv")), &traj.raster)
}
