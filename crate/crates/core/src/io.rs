//! CSV and JSON files. Floats in CSV are written with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{FlowTrace, Snapshot, TraceRow};
use crate::geometry::AxiSurface;
use crate::graphflow::GraphPatch;
use crate::oracle::SphereSolution;

pub const TRACE_HEADER: [&str; 9] = [
    "t",
    "dt",
    "H_min",
    "H_max",
    "A2_max",
    "gamma_min",
    "gsigma_max",
    "area",
    "volume",
];
pub const PROFILE_HEADER: [&str; 8] = ["s", "rho", "z", "lambda1", "lambda2", "H", "K", "gamma"];

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(
        path,
    )?)))
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = writer(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| fmt(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(path: &Path, trace: &FlowTrace) -> Result<()> {
    write_rows(
        path,
        &TRACE_HEADER,
        trace.rows().iter().map(|r| {
            vec![
                r.t,
                r.dt,
                r.h_min,
                r.h_max,
                r.a2_max,
                r.gamma_min,
                r.gsigma_max,
                r.area,
                r.volume,
            ]
        }),
    )
}

pub fn read_trace(path: &Path) -> Result<FlowTrace> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != TRACE_HEADER {
        return Err(Error::Io(format!(
            "{}: unexpected trace header {header:?}",
            path.display()
        )));
    }
    let rows = r
        .deserialize::<TraceRow>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(FlowTrace::from_rows(rows))
}

/// Profile with its curvature columns.
pub fn write_profile(path: &Path, surface: &AxiSurface) -> Result<()> {
    let f = surface.curvatures()?;
    write_rows(
        path,
        &PROFILE_HEADER,
        (0..surface.len()).map(|i| {
            vec![
                f.s[i],
                surface.rho()[i],
                surface.z()[i],
                f.lambda1[i],
                f.lambda2[i],
                f.h[i],
                f.k[i],
                f.gamma[i],
            ]
        }),
    )
}

/// Reads `rho` and `z` from a profile CSV; other columns are ignored.
pub fn read_profile(path: &Path, time: f64) -> Result<AxiSurface> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Io(format!("{}: missing column `{name}`", path.display())))
    };
    let (ir, iz) = (col("rho")?, col("z")?);
    let mut rho = Vec::new();
    let mut z = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| {
                    Error::Io(format!(
                        "{}: bad number on data row {}",
                        path.display(),
                        line + 1
                    ))
                })
        };
        rho.push(parse(ir)?);
        z.push(parse(iz)?);
    }
    AxiSurface::new(rho, z, time)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn write_sphere_dense(path: &Path, sol: &SphereSolution) -> Result<()> {
    write_rows(path, &["t", "r"], sol.rows().map(|(t, r)| vec![t, r]))
}

pub fn write_patch(path: &Path, patch: &GraphPatch) -> Result<()> {
    write_rows(
        path,
        &["x", "y", "u"],
        patch.rows().into_iter().map(|(x, y, u)| vec![x, y, u]),
    )
}

pub fn snapshot_file_name(index: usize) -> String {
    format!("snapshot_{index:04}.csv")
}

/// Writes every snapshot and an index `snapshots.csv` with columns
/// `index,row,t,file`.
pub fn write_snapshots(dir: &Path, snapshots: &[Snapshot]) -> Result<()> {
    let mut w = writer(&dir.join("snapshots.csv"))?;
    w.write_record(["index", "row", "t", "file"])?;
    for (i, s) in snapshots.iter().enumerate() {
        let name = snapshot_file_name(i);
        write_profile(&dir.join(&name), &s.surface)?;
        w.write_record([i.to_string(), s.row.to_string(), fmt(s.surface.time), name])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshots(dir: &Path) -> Result<Vec<Snapshot>> {
    let index = dir.join("snapshots.csv");
    let mut r = csv::Reader::from_path(&index)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let bad = || Error::Io(format!("{}: malformed row {:?}", index.display(), rec));
        let row: usize = rec.get(1).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let t: f64 = rec.get(2).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let file = rec.get(3).ok_or_else(bad)?;
        out.push(Snapshot {
            row,
            surface: read_profile(&dir.join(file), t)?,
        });
    }
    Ok(out)
}
