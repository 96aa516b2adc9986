//! File formats: partition files, cut-edge lists and convergence CSVs.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use evopart::analysis::ConvergenceEvent;
use evopart::{BlockId, EdgeSet};

/// One block id per line, line i for node i.
pub fn write_partition(path: &Path, assignment: &[BlockId]) -> Result<()> {
    let mut out = String::with_capacity(assignment.len() * 3);
    for b in assignment {
        out.push_str(&b.to_string());
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing partition file {}", path.display()))
}

pub fn read_partition(path: &Path) -> Result<Vec<BlockId>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading partition file {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse()
                .with_context(|| format!("{}:{}: not a block id", path.display(), i + 1))
        })
        .collect()
}

/// "u v" per line, 0-based, u < v.
pub fn write_cut_edges(path: &Path, cuts: &EdgeSet) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    for (u, v) in cuts.iter() {
        writeln!(f, "{u} {v}")?;
    }
    Ok(())
}

pub const CSV_HEADER: [&str; 3] = ["worker_id", "t_seconds", "cut"];

pub fn write_convergence_csv(path: &Path, events: &[ConvergenceEvent]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(CSV_HEADER)?;
    for e in events {
        w.write_record([e.worker.to_string(), e.t.to_string(), e.cut.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_convergence_csv(path: &Path) -> Result<Vec<ConvergenceEvent>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        bail!("{}: expected header {}", path.display(), CSV_HEADER.join(","));
    }
    let mut events = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |j: usize| rec.get(j).with_context(|| format!("{}:{line}: missing field", path.display()));
        let t: f64 = field(1)?.parse().with_context(|| format!("{}:{line}: bad time", path.display()))?;
        if !(t >= 0.0) {
            bail!("{}:{line}: negative time", path.display());
        }
        events.push(ConvergenceEvent {
            worker: field(0)?.parse().with_context(|| format!("{}:{line}: bad worker id", path.display()))?,
            t,
            cut: field(2)?.parse().with_context(|| format!("{}:{line}: bad cut", path.display()))?,
        });
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p");
        write_partition(&path, &[0, 1, 1, 0]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "0\n1\n1\n0\n");
        assert_eq!(read_partition(&path).unwrap(), vec![0, 1, 1, 0]);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.csv");
        let events = vec![
            ConvergenceEvent { worker: 0, t: 0.1 + 0.2, cut: 7 },
            ConvergenceEvent { worker: 3, t: 1e-7, cut: 0 },
        ];
        write_convergence_csv(&path, &events).unwrap();
        assert_eq!(read_convergence_csv(&path).unwrap(), events);
    }

    #[test]
    fn csv_rejects_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        assert!(read_convergence_csv(&path).is_err());
    }
}
