//! Convergence analysis of evolutionary runs: running minima, time
//! normalization, event-based geometric means and pseudo speedups.

use thiserror::Error;

use crate::graph::Weight;

/// One partition produced or received by a worker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceEvent {
    pub worker: usize,
    /// Seconds since the worker started.
    pub t: f64,
    pub cut: Weight,
}

/// A curve of (time, cut) points sorted by time.
pub type Curve = Vec<(f64, f64)>;

/// A normalized, non-increasing curve of one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedSequence {
    pub label: String,
    pub points: Curve,
}

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("normalization time must be positive, got {0}")]
    NonPositiveBase(f64),
    #[error("instance {0} has no events")]
    EmptyInstance(String),
}

/// Sorts events by time and replaces each cut by the minimum seen so far.
pub fn min_prefix(events: &[ConvergenceEvent]) -> Curve {
    let mut sorted: Vec<(f64, f64)> = events.iter().map(|e| (e.t, e.cut as f64)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    running_min(sorted)
}

fn running_min(points: Curve) -> Curve {
    let mut best = f64::INFINITY;
    points
        .into_iter()
        .map(|(t, c)| {
            best = best.min(c);
            (t, best)
        })
        .collect()
}

/// Divides every timestamp by `t_base`.
pub fn normalize(curve: &[(f64, f64)], t_base: f64) -> Result<Curve, AnalysisError> {
    if !(t_base > 0.0) {
        return Err(AnalysisError::NonPositiveBase(t_base));
    }
    Ok(curve.iter().map(|&(t, c)| (t / t_base, c)).collect())
}

/// Event-based geometric mean over instances. Starts from the geometric
/// mean of every instance's first cut and, sweeping all events in time
/// order, replaces the value of the instance that produced the event and
/// emits the new mean. Cuts below 1 are clamped to 1 for the mean.
pub fn event_geomean(seqs: &[NormalizedSequence]) -> Result<Curve, AnalysisError> {
    if seqs.is_empty() {
        return Ok(Vec::new());
    }
    let mut clamped = false;
    let mut log_of = |c: f64| {
        if c < 1.0 {
            clamped = true;
        }
        c.max(1.0).ln()
    };
    let mut current = Vec::with_capacity(seqs.len());
    for s in seqs {
        let first = s
            .points
            .first()
            .ok_or_else(|| AnalysisError::EmptyInstance(s.label.clone()))?;
        current.push(log_of(first.1));
    }
    let mut events: Vec<(f64, usize, f64)> = seqs
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.points.iter().map(move |&(t, c)| (t, i, c)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut sum: f64 = current.iter().sum();
    let n = seqs.len() as f64;
    let mut out = Vec::with_capacity(events.len());
    for (t, i, c) in events {
        let l = log_of(c);
        sum += l - current[i];
        current[i] = l;
        out.push((t, (sum / n).exp()));
    }
    if clamped {
        log::warn!("zero cuts were clamped to 1 in the geometric mean");
    }
    // Guard against drift from incremental log sums.
    Ok(running_min(out))
}

/// Earliest time at which `curve` reaches a cut of at most `quality`.
fn first_reach(curve: &[(f64, f64)], quality: f64) -> Option<f64> {
    let tol = 1e-9 * quality.abs().max(1.0);
    curve.iter().find(|&&(_, c)| c <= quality + tol).map(|&(t, _)| t)
}

/// For every point of the single-worker curve, the ratio of the times at
/// which the single-worker and the parallel curve first reach that quality;
/// 0 where the parallel curve never reaches it.
pub fn pseudo_speedup(base: &[(f64, f64)], par: &[(f64, f64)]) -> Curve {
    base.iter()
        .map(|&(t_n, quality)| {
            let t1 = first_reach(base, quality).unwrap_or(t_n);
            match first_reach(par, quality) {
                Some(tp) if tp > 0.0 => (t_n, t1 / tp),
                Some(_) => (t_n, f64::INFINITY),
                None => (t_n, 0.0),
            }
        })
        .collect()
}

/// Averages repeated runs of one instance. With equal event counts the
/// r-th events are averaged pairwise (time and cut); otherwise all events
/// are merged into one running-minimum curve.
pub fn average_repetitions(reps: &[Curve]) -> Curve {
    if reps.is_empty() {
        return Vec::new();
    }
    let len = reps[0].len();
    if reps.iter().all(|r| r.len() == len) {
        let n = reps.len() as f64;
        let averaged = (0..len)
            .map(|i| {
                let t = reps.iter().map(|r| r[i].0).sum::<f64>() / n;
                let c = reps.iter().map(|r| r[i].1).sum::<f64>() / n;
                (t, c)
            })
            .collect();
        return averaged;
    }
    let mut merged: Curve = reps.iter().flatten().copied().collect();
    merged.sort_by(|a, b| a.0.total_cmp(&b.0));
    running_min(merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;
    use rand::Rng;

    fn events(ts: &[f64], cuts: &[Weight]) -> Vec<ConvergenceEvent> {
        ts.iter()
            .zip(cuts)
            .map(|(&t, &cut)| ConvergenceEvent { worker: 0, t, cut })
            .collect()
    }

    fn seq(label: &str, points: &[(f64, f64)]) -> NormalizedSequence {
        NormalizedSequence {
            label: label.into(),
            points: points.to_vec(),
        }
    }

    #[test]
    fn running_minimum() {
        let c = min_prefix(&events(&[1.0, 2.0, 3.0, 4.0], &[5, 7, 4, 6]));
        assert_eq!(c, vec![(1.0, 5.0), (2.0, 5.0), (3.0, 4.0), (4.0, 4.0)]);
        assert_eq!(min_prefix(&events(&[2.0], &[3])), vec![(2.0, 3.0)]);
        let mono = min_prefix(&events(&[1.0, 2.0], &[9, 8]));
        assert_eq!(mono, vec![(1.0, 9.0), (2.0, 8.0)]);
        assert!(min_prefix(&[]).is_empty());
    }

    #[test]
    fn running_minimum_sorts_by_time() {
        let c = min_prefix(&events(&[3.0, 1.0, 2.0], &[1, 5, 7]));
        assert_eq!(c, vec![(1.0, 5.0), (2.0, 5.0), (3.0, 1.0)]);
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize(&[(4.0, 3.0)], 2.0).unwrap(), vec![(2.0, 3.0)]);
        assert_eq!(normalize(&[(1.5, 3.0)], 1.5).unwrap(), vec![(1.0, 3.0)]);
        assert_eq!(normalize(&[(1.0, 1.0)], 0.0), Err(AnalysisError::NonPositiveBase(0.0)));
    }

    #[test]
    fn geomean_examples() {
        let single = seq("a", &[(1.0, 5.0), (2.0, 3.0)]);
        let g = event_geomean(std::slice::from_ref(&single)).unwrap();
        assert_eq!(g.len(), 2);
        for (got, want) in g.iter().zip(&single.points) {
            assert_eq!(got.0, want.0);
            assert!((got.1 - want.1).abs() < 1e-9);
        }

        let g = event_geomean(&[seq("a", &[(1.0, 4.0)]), seq("b", &[(2.0, 9.0)])]).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.iter().all(|&(_, v)| (v - 6.0).abs() < 1e-12));

        let g = event_geomean(&[seq("a", &[(1.0, 4.0), (3.0, 1.0)]), seq("b", &[(2.0, 9.0)])]).unwrap();
        let values: Vec<f64> = g.iter().map(|p| p.1).collect();
        assert!((values[0] - 6.0).abs() < 1e-12);
        assert!((values[1] - 6.0).abs() < 1e-12);
        assert!((values[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn geomean_clamps_zero() {
        let g = event_geomean(&[seq("a", &[(1.0, 0.0)]), seq("b", &[(1.0, 4.0)])]).unwrap();
        assert!((g[1].1 - 2.0).abs() < 1e-12);
        assert!(matches!(
            event_geomean(&[seq("a", &[])]),
            Err(AnalysisError::EmptyInstance(_))
        ));
    }

    #[test]
    fn geomean_is_non_increasing_on_random_inputs() {
        let mut rng = seeded_rng(1);
        for _ in 0..200 {
            let instances = rng.gen_range(1..6);
            let seqs: Vec<NormalizedSequence> = (0..instances)
                .map(|i| {
                    let n = rng.gen_range(1..20);
                    let evs: Vec<ConvergenceEvent> = (0..n)
                        .map(|_| ConvergenceEvent {
                            worker: 0,
                            t: rng.gen_range(0.0..10.0),
                            cut: rng.gen_range(0..1000),
                        })
                        .collect();
                    NormalizedSequence {
                        label: i.to_string(),
                        points: min_prefix(&evs),
                    }
                })
                .collect();
            let g = event_geomean(&seqs).unwrap();
            assert!(g.windows(2).all(|w| w[1].1 <= w[0].1 && w[0].0 <= w[1].0));
        }
    }

    #[test]
    fn speedups() {
        let base = vec![(1.0, 10.0), (2.0, 8.0), (4.0, 5.0)];
        assert!(pseudo_speedup(&base, &base).iter().all(|&(_, s)| s == 1.0));
        let half: Curve = base.iter().map(|&(t, c)| (t / 2.0, c)).collect();
        assert!(pseudo_speedup(&base, &half).iter().all(|&(_, s)| s == 2.0));
        let stuck = vec![(0.5, 10.0), (1.0, 8.0)];
        let s = pseudo_speedup(&base, &stuck);
        assert_eq!(s[0].1, 2.0);
        assert_eq!(s[1].1, 2.0);
        assert_eq!(s[2].1, 0.0);
    }

    #[test]
    fn repetition_averaging() {
        let a = vec![(1.0, 10.0), (3.0, 6.0)];
        let b = vec![(3.0, 8.0), (5.0, 4.0)];
        assert_eq!(average_repetitions(&[a.clone(), b.clone()]), vec![(2.0, 9.0), (4.0, 5.0)]);
        let c = vec![(2.0, 7.0)];
        assert_eq!(
            average_repetitions(&[a, c]),
            vec![(1.0, 10.0), (2.0, 7.0), (3.0, 6.0)]
        );
    }
}
