//! CSV tables and run metadata.
//!
//! Raw tables have one row per `(n, sample)`: `n,sample,seed,<columns>,error`.
//! Aggregate tables have one row per `n`:
//! `n,samples,errors,<col>_mean,<col>_var,<col>_se,...`. Missing values are
//! written as empty fields.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::evt::ModelRow;
use crate::sdp::C1SdpReport;

use super::ensemble::EnsembleResult;
use super::sweep::SweepRow;

pub const SCHEMA_VERSION: u32 = 1;

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

pub fn write_raw<W: Write>(res: &EnsembleResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["n".to_string(), "sample".into(), "seed".into()];
    header.extend(res.columns.iter().cloned());
    header.push("error".into());
    w.write_record(&header)?;
    for r in &res.records {
        let mut row = vec![r.n.to_string(), r.sample.to_string(), r.seed.to_string()];
        row.extend(r.values.iter().map(|&v| num(v)));
        row.push(r.error.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate<W: Write>(res: &EnsembleResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["n".to_string(), "samples".into(), "errors".into()];
    for c in &res.columns {
        header.extend([format!("{c}_mean"), format!("{c}_var"), format!("{c}_se")]);
    }
    w.write_record(&header)?;
    for a in &res.aggregates {
        let mut row = vec![a.n.to_string(), a.samples.to_string(), a.errors.to_string()];
        for s in &a.stats {
            row.extend([num(s.mean), num(s.variance), num(s.se)]);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `(n, mean)` pairs for `column` back from an aggregate table.
pub fn read_aggregate_means(path: &Path, column: &str) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let key = format!("{column}_mean");
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| crate::error::Error::Parse(format!("column {name:?} missing in {}", path.display())))
    };
    let (ni, ci) = (find("n")?, find(&key)?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<Option<f64>> {
            let s = rec.get(i).unwrap_or("");
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>()
                .map(Some)
                .map_err(|e| crate::error::Error::Parse(format!("{s:?}: {e}")))
        };
        if let (Some(n), Some(y)) = (parse(ni)?, parse(ci)?) {
            out.push((n, y));
        }
    }
    Ok(out)
}

fn write_serialized<W: Write, T: Serialize>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    write_serialized(rows, out)
}

pub fn write_model_curves<W: Write>(rows: &[ModelRow], out: W) -> Result<()> {
    write_serialized(rows, out)
}

#[derive(Debug, Clone, Copy, Serialize)]
struct SdpRow {
    n: usize,
    seed: u64,
    edges: usize,
    primal: f64,
    dual: f64,
    a1_plus: f64,
    c1_sdp: f64,
}

pub fn write_sdp_rows<W: Write>(rows: &[(u64, C1SdpReport)], out: W) -> Result<()> {
    let flat: Vec<SdpRow> = rows
        .iter()
        .map(|(seed, r)| SdpRow {
            n: r.n,
            seed: *seed,
            edges: r.edges,
            primal: r.sdp.primal_value,
            dual: r.sdp.dual_value,
            a1_plus: r.a1_plus,
            c1_sdp: r.c1_sdp,
        })
        .collect();
    write_serialized(&flat, out)
}

/// Writes `raw.csv`, `aggregate.csv` and `run.json` into `dir`.
pub fn write_run(res: &EnsembleResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_raw(res, std::fs::File::create(dir.join("raw.csv"))?)?;
    write_aggregate(res, std::fs::File::create(dir.join("aggregate.csv"))?)?;
    let meta = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "columns": res.columns,
        "config": res.config,
    });
    std::fs::write(dir.join("run.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}
