//! Report CSVs. Floats are written in Rust's shortest round-trip form, so the
//! raw-error sidecar reproduces every aggregate exactly.

use std::fs;
use std::path::Path;

use super::runner::{EvalReport, ReportRow};
use crate::error::{Error, Result};

pub const REPORT_HEADER: &str = "method,d_prime,B,variant,noise_db,mean,median,trimean,best25,worst25,n";
pub const RAW_HEADER: &str = "method,d_prime,B,variant,noise_db,scene,truth,estimate,error";

fn opt(v: Option<usize>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

fn noise(v: Option<f64>) -> String {
    v.map_or_else(|| "clean".into(), |v| v.to_string())
}

fn key(r: &ReportRow) -> String {
    format!("{},{},{},{},{}", r.method, opt(r.d_prime), opt(r.bins), r.variant, noise(r.noise_db))
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{REPORT_HEADER}\n");
        for r in &self.rows {
            let s = &r.summary;
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                key(r),
                s.mean,
                s.median,
                s.trimean,
                s.best25,
                s.worst25,
                s.n
            ));
        }
        out
    }

    pub fn raw_csv(&self) -> String {
        let mut out = format!("{RAW_HEADER}\n");
        for r in &self.rows {
            let k = key(r);
            for c in &r.cases {
                out.push_str(&format!("{k},{},{},{},{}\n", c.scene, c.truth, c.estimate, c.error));
            }
        }
        out
    }

    /// Writes `<stem>.csv` and `<stem>_raw.csv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (path, text) in [
            (dir.join(format!("{stem}.csv")), self.to_csv()),
            (dir.join(format!("{stem}_raw.csv")), self.raw_csv()),
        ] {
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}
