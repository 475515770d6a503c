use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::metrics::format_db;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    /// Measurements absorbed per patch.
    pub t: usize,
    pub psnr_db: f64,
    pub ssim: f64,
    /// CG iterations summed over every patch (and channel) for step `t`.
    pub cg_iters_total: usize,
}

/// Quality over measurement count, one record per evaluation point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsTrajectory {
    records: Vec<TrajectoryRecord>,
}

pub const TRAJECTORY_CSV_HEADER: &str = "t,pct_measurements,psnr_db,ssim,cg_iters_total";

impl MetricsTrajectory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; `t` must strictly increase.
    pub fn push(&mut self, record: TrajectoryRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.t <= last.t {
                return Err(Error::InvalidParameter(format!(
                    "trajectory t must increase ({} after {})",
                    record.t, last.t
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[TrajectoryRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&TrajectoryRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn at(&self, t: usize) -> Option<&TrajectoryRecord> {
        self.records.iter().find(|r| r.t == t)
    }

    /// CSV with `pct_measurements = 100 t / dim`.
    pub fn to_csv(&self, dim: usize) -> String {
        let mut out = String::from(TRAJECTORY_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.t,
                100.0 * r.t as f64 / dim as f64,
                format_db(r.psnr_db),
                r.ssim,
                r.cg_iters_total
            )
            .unwrap();
        }
        out
    }
}
