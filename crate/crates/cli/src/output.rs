//! Trace CSV, run summary JSON and the aggregate table.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use ubo_core::benchlab::AggregatePoint;
use ubo_core::engine::RunTrace;

use crate::config::Config;
use crate::CliError;

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Header of the per-run trace table for dimension `d`.
pub fn trace_header(d: usize) -> String {
    let idx = |p: &str| (0..d).map(|j| format!("{p}{j}")).collect::<Vec<_>>().join(",");
    format!("t,t_local,k,beta,{},y,best_y,r_b,expanded,d_eps,{},{},lambda_max,M,flags", idx("x"), idx("lo"), idx("hi"))
}

pub fn trace_csv(trace: &RunTrace<f64>) -> String {
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let mut out = trace_header(trace.dim);
    out.push('\n');
    for r in &trace.records {
        let flags = r.flags.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(";");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.t_local.map(|v| v.to_string()).unwrap_or_default(),
            r.k,
            opt(r.beta),
            join(&r.x),
            r.y,
            r.best_y,
            opt(r.r_b),
            r.expanded,
            opt(r.d_eps),
            join(&r.lo),
            join(&r.hi),
            opt(r.lambda_max),
            opt(r.weight_bound),
            flags
        )
        .expect("writing to a String");
    }
    out
}

#[derive(Debug, Serialize)]
pub struct BoxSummary {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Everything needed to reproduce a run and its headline result.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub config: Config,
    pub benchmark: String,
    pub strategy: String,
    pub seed: u64,
    pub dim: usize,
    pub initial_box: BoxSummary,
    pub final_box: BoxSummary,
    pub evaluations: usize,
    pub expansions: usize,
    pub recommendation: Vec<f64>,
    pub recommendation_value: f64,
    pub true_max: f64,
    pub complete: bool,
    pub incomplete_reason: Option<String>,
    pub trace_file: String,
}

pub fn summary_json(summary: &RunSummary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("summary serialises");
    s.push('\n');
    s
}

pub fn aggregate_header() -> &'static str {
    "benchmark,strategy,iteration,mean_best,stderr"
}

/// Long-format rows; `iteration` counts evaluations from 1.
pub fn aggregate_rows(out: &mut String, benchmark: &str, strategy: &str, points: &[AggregatePoint<f64>]) {
    for p in points {
        writeln!(out, "{benchmark},{strategy},{},{},{}", p.iteration + 1, p.mean, p.stderr).expect("writing to a String");
    }
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<PathBuf, CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io)?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        assert_eq!(
            trace_header(2),
            "t,t_local,k,beta,x0,x1,y,best_y,r_b,expanded,d_eps,lo0,lo1,hi0,hi1,lambda_max,M,flags"
        );
    }

    #[test]
    fn aggregate_rows_are_one_based() {
        let mut s = String::new();
        aggregate_rows(&mut s, "beale", "ubo", &[AggregatePoint { iteration: 0, mean: 2.0, stderr: 1.0 }]);
        assert_eq!(s, "beale,ubo,1,2,1\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b.txt");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
