//! Convergence pipeline over logged runs: per-instance running minima
//! (T_min), normalized curves (N_min), the event-based geometric mean S_g
//! and, given single-worker baselines, pseudo speedups.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use evopart::analysis::{
    average_repetitions, event_geomean, min_prefix, normalize, pseudo_speedup, ConvergenceEvent, Curve,
    NormalizedSequence,
};

use crate::io::read_convergence_csv;

/// Logged runs of one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub label: String,
    pub runs: Vec<Vec<ConvergenceEvent>>,
}

/// `a.rep3.csv` belongs to instance `a`; any other file is its own instance.
pub fn instance_label(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    match stem.rsplit_once(".rep") {
        Some((base, rep)) if !base.is_empty() && !rep.is_empty() && rep.bytes().all(|b| b.is_ascii_digit()) => {
            base.to_string()
        }
        _ => stem,
    }
}

/// Groups CSV files into instances, keeping first-seen order.
pub fn load_instances(paths: &[PathBuf]) -> Result<Vec<Instance>> {
    let mut out: Vec<Instance> = Vec::new();
    for path in paths {
        let label = instance_label(path);
        let events = read_convergence_csv(path)?;
        if events.is_empty() {
            bail!("{}: no events", path.display());
        }
        match out.iter_mut().find(|i| i.label == label) {
            Some(inst) => inst.runs.push(events),
            None => out.push(Instance { label, runs: vec![events] }),
        }
    }
    Ok(out)
}

/// Measured time of one partitioning call: every worker's first event is
/// the end of its timed calibration call, so their mean approximates it.
pub fn measured_t_base(events: &[ConvergenceEvent]) -> Option<f64> {
    let workers = events.iter().map(|e| e.worker).max()? + 1;
    let mut first = vec![f64::INFINITY; workers];
    for e in events {
        first[e.worker] = first[e.worker].min(e.t);
    }
    let seen: Vec<f64> = first.into_iter().filter(|t| t.is_finite()).collect();
    let mean = seen.iter().sum::<f64>() / seen.len() as f64;
    (mean > 0.0).then_some(mean)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    /// Running minimum per instance, in seconds, averaged over repetitions.
    pub t_min: Vec<(String, Curve)>,
    pub t_base: Vec<(String, f64)>,
    pub n_min: Vec<NormalizedSequence>,
    pub s_g: Curve,
}

pub fn analyze(instances: &[Instance], t_base: Option<f64>) -> Result<Analysis> {
    if instances.is_empty() {
        bail!("no instances to analyze");
    }
    let mut t_min = Vec::new();
    let mut bases = Vec::new();
    let mut n_min = Vec::new();
    for inst in instances {
        let curves: Vec<Curve> = inst.runs.iter().map(|r| min_prefix(r)).collect();
        let curve = average_repetitions(&curves);
        let base = match t_base {
            Some(t) => t,
            None => {
                let measured: Vec<f64> = inst.runs.iter().filter_map(|r| measured_t_base(r)).collect();
                if measured.is_empty() {
                    bail!("instance {}: cannot measure a base time; pass --t-base", inst.label);
                }
                measured.iter().sum::<f64>() / measured.len() as f64
            }
        };
        let points = normalize(&curve, base).with_context(|| format!("instance {}", inst.label))?;
        n_min.push(NormalizedSequence {
            label: inst.label.clone(),
            points,
        });
        t_min.push((inst.label.clone(), curve));
        bases.push((inst.label.clone(), base));
    }
    let s_g = event_geomean(&n_min)?;
    Ok(Analysis {
        t_min,
        t_base: bases,
        n_min,
        s_g,
    })
}

fn write_labeled(path: &Path, header: [&str; 3], rows: impl Iterator<Item = (String, f64, f64)>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for (label, t, c) in rows {
        w.write_record([label, t.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_curve(path: &Path, header: [&str; 2], curve: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for (t, v) in curve {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `t_min.csv`, `n_min.csv`, `s_g.csv` and, with a baseline,
/// `speedup.csv` into `dir`. Returns the written paths.
pub fn write_outputs(dir: &Path, a: &Analysis, baseline: Option<&Analysis>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    let p = dir.join("t_min.csv");
    write_labeled(
        &p,
        ["instance", "t_seconds", "cut"],
        a.t_min
            .iter()
            .flat_map(|(l, c)| c.iter().map(move |&(t, v)| (l.clone(), t, v))),
    )?;
    written.push(p);
    let p = dir.join("n_min.csv");
    write_labeled(
        &p,
        ["instance", "t_n", "cut"],
        a.n_min
            .iter()
            .flat_map(|s| s.points.iter().map(move |&(t, v)| (s.label.clone(), t, v))),
    )?;
    written.push(p);
    let p = dir.join("s_g.csv");
    write_curve(&p, ["t_n", "geomean_cut"], &a.s_g)?;
    written.push(p);
    if let Some(base) = baseline {
        let p = dir.join("speedup.csv");
        write_curve(&p, ["t_n", "speedup"], &pseudo_speedup(&base.s_g, &a.s_g))?;
        written.push(p);
    }
    Ok(written)
}
