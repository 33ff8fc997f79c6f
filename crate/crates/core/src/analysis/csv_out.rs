//! CSV exports of curves, contours and reports.

use std::io::Write;

use super::report::StatReport;
use super::tail::TailCurve;
use crate::error::{Error, Result};

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn write_tail_csv<W: Write>(w: W, curve: &TailCurve) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "survival", "lo", "hi", "envelope"])
        .map_err(csv_err)?;
    for i in 0..curve.x.len() {
        out.write_record([
            curve.x[i].to_string(),
            curve.survival[i].to_string(),
            curve.lo[i].to_string(),
            curve.hi[i].to_string(),
            curve.envelope[i].to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Rows `(replicate_id, path)`.
pub fn write_contour_csv<W: Write>(w: W, paths: &[(u64, Vec<f64>)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["grid_index", "value", "replicate_id"])
        .map_err(csv_err)?;
    for (id, path) in paths {
        for (k, v) in path.iter().enumerate() {
            out.write_record([k.to_string(), v.to_string(), id.to_string()])
                .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_reports_csv<W: Write>(w: W, reports: &[StatReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["statistic", "estimate", "se", "target", "pass"])
        .map_err(csv_err)?;
    for r in reports {
        out.write_record([
            r.statistic.clone(),
            r.estimate.to_string(),
            r.se.to_string(),
            r.target.map(|t| t.to_string()).unwrap_or_default(),
            r.pass.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}
