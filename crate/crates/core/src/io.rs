//! CSV artifact writers and JSON manifest sidecars. Numeric fields use
//! Rust's shortest round-trip float formatting, so identical inputs
//! always produce byte-identical files.

use std::path::Path;

use crate::error::Result;
use crate::pointproc::PointConfiguration;
use crate::sinr::CoverageCurve;
use crate::spatialstats::NndEstimate;
use crate::tda::{PersistenceDiagram, SweepRow};

fn fmt(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v}")
    }
}

/// Points CSV: header `x1,...,xd`, one point per row.
pub fn write_points_csv<P: AsRef<Path>>(path: P, cfg: &PointConfiguration) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record((1..=cfg.dim).map(|j| format!("x{j}")))?;
    for i in 0..cfg.len() {
        w.write_record(cfg.point(i).iter().map(|&x| fmt(x)))?;
    }
    w.flush()?;
    Ok(())
}

/// Coverage curve CSV: `theta,estimate,stderr`.
pub fn write_curve_csv<P: AsRef<Path>>(path: P, curve: &CoverageCurve) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["theta", "estimate", "stderr"])?;
    for ((&t, &e), &s) in curve
        .theta_grid
        .iter()
        .zip(&curve.estimate)
        .zip(&curve.stderr)
    {
        w.write_record([fmt(t), fmt(e), fmt(s)])?;
    }
    w.flush()?;
    Ok(())
}

/// Persistence diagram CSV: `degree,birth,death`, with the literal
/// `inf` for infinite deaths.
pub fn write_diagrams_csv<P: AsRef<Path>>(
    path: P,
    diagrams: &[PersistenceDiagram],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["degree", "birth", "death"])?;
    for d in diagrams {
        for &(b, death) in &d.pairs {
            w.write_record([d.degree.to_string(), fmt(b), fmt(death)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Sweep table CSV: `sigma,mean_distance,stderr,metric,n_samples`.
pub fn write_sweep_csv<P: AsRef<Path>>(path: P, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["sigma", "mean_distance", "stderr", "metric", "n_samples"])?;
    for r in rows {
        w.write_record([
            fmt(r.sigma),
            fmt(r.mean_distance),
            fmt(r.stderr),
            r.metric.clone(),
            r.n_samples.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// NND CSV: `r,density,ecdf`, one row per histogram bin with `r` the
/// bin center and `ecdf` evaluated at the bin's right edge.
pub fn write_nnd_csv<P: AsRef<Path>>(path: P, est: &NndEstimate) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["r", "density", "ecdf"])?;
    let n = est.ecdf_support.len() as f64;
    for (b, &dens) in est.density.iter().enumerate() {
        let center = (est.bin_edges[b] + est.bin_edges[b + 1]) / 2.0;
        let right = est.bin_edges[b + 1];
        let ecdf = est.ecdf_support.partition_point(|&x| x <= right) as f64 / n;
        w.write_record([fmt(center), fmt(dens), fmt(ecdf)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a JSON manifest sidecar (pretty-printed, trailing newline).
pub fn write_manifest<P: AsRef<Path>>(path: P, manifest: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
