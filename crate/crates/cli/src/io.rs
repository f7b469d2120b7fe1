//! Trace, profile and metrics files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use llmsched_core::profiler::ProfileSet;
use llmsched_core::sim::{RunMetrics, Timing};
use llmsched_core::workload::TraceRecord;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Parse { path: PathBuf, line: usize, source: serde_json::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

/// Writes one JSON record per line.
pub fn write_trace(path: &Path, records: &[TraceRecord]) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|source| IoError::Json { path: path.into(), source })?;
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a newline-delimited trace. Blank lines are ignored; errors name
/// the 1-based line.
pub fn read_trace(path: &Path) -> Result<Vec<TraceRecord>, IoError> {
    let r = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|source| IoError::Parse {
            path: path.into(),
            line: i + 1,
            source,
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_profiles(path: &Path, profiles: &ProfileSet) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    serde_json::to_writer_pretty(&mut w, profiles).map_err(|source| IoError::Json { path: path.into(), source })?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn read_profiles(path: &Path) -> Result<ProfileSet, IoError> {
    let r = BufReader::new(File::open(path).map_err(io_err(path))?);
    serde_json::from_reader(r).map_err(|source| IoError::Json { path: path.into(), source })
}

/// Per-job CSV: `job_id,app_id,arrival,completion,jct`.
pub fn write_jobs_csv(path: &Path, metrics: &RunMetrics) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let mut body = String::from("job_id,app_id,arrival,completion,jct\n");
    for j in &metrics.jobs {
        body.push_str(&format!("{},{},{:.6},{:.6},{:.6}\n", j.job_id, j.app_id, j.arrival, j.completion, j.jct));
    }
    w.write_all(body.as_bytes()).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Summary CSV with a header and one row.
pub fn write_summary_csv(path: &Path, metrics: &RunMetrics) -> Result<(), IoError> {
    let body = format!(
        "jobs,average_jct,makespan,regular_utilization,llm_utilization,llm_slot_utilization,events,invocations\n\
         {},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}\n",
        metrics.jobs.len(),
        metrics.average_jct,
        metrics.makespan,
        metrics.regular_utilization,
        metrics.llm_utilization,
        metrics.llm_slot_utilization,
        metrics.events,
        metrics.invocations,
    );
    std::fs::write(path, body).map_err(io_err(path))
}

/// Wall-clock scheduler overhead; not reproducible between runs.
pub fn write_timing_csv(path: &Path, timing: &Timing) -> Result<(), IoError> {
    let body = format!(
        "invocations,mean_ms,max_ms\n{},{:.6},{:.6}\n",
        timing.invocations,
        timing.mean_ms(),
        timing.max_ns as f64 / 1e6
    );
    std::fs::write(path, body).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use llmsched_core::workload::{StageRecord, TraceRecord};

    fn record(id: u64) -> TraceRecord {
        TraceRecord {
            job_id: id,
            app: "a".into(),
            arrival: id as f64 * 0.5,
            stages: vec![StageRecord { stage: 0, executed: true, duration: 1.25, tasks: vec![1.0, 1.5] }],
            realized: vec![],
            chain_len: None,
        }
    }

    #[test]
    fn trace_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.ndjson");
        let recs: Vec<_> = (0..5).map(record).collect();
        write_trace(&p, &recs).unwrap();
        assert_eq!(read_trace(&p).unwrap(), recs);

        std::fs::write(&p, "").unwrap();
        assert!(read_trace(&p).unwrap().is_empty());

        let mut text = serde_json::to_string(&record(0)).unwrap();
        text.push('\n');
        let full = serde_json::to_string(&record(1)).unwrap();
        text.push_str(&full[..full.len() / 2]);
        std::fs::write(&p, text).unwrap();
        match read_trace(&p) {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }
}
