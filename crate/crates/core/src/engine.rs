//! Parallel island engine: `p` worker threads each evolve a local
//! population and exchange their best individuals by rumor spreading.
//!
//! A run has four phases. Every worker times one partitioning call, the
//! population size is derived from that time, workers fill their local
//! populations, and a coordinator performs the quick-start exchange along
//! random cyclic permutations. After that workers never synchronize: they
//! only push individuals into each other's mailboxes.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::analysis::ConvergenceEvent;
use crate::evolution::{
    apply_operator, evict_insert, pick_operator, Individual, NaturalCutState, Operator, OperatorRatios, Population,
};
use crate::graph::{Graph, Weight};
use crate::multilevel::{partition_with_rng, PartitionerConfig};
use crate::partition::Partition;
use crate::{seeded_rng, SeededRng};

/// Default fraction f: fresh individuals are created during the first
/// `t_total / f` of a run.
pub const DEFAULT_FRACTION: f64 = 10.0;

/// Mailbox length beyond which the oldest pending individual is dropped.
pub const DEFAULT_MAILBOX_CAPACITY: usize = 64;

/// S = max(3, round((t_total / f) / t_bar)).
pub fn estimate_population_size(t_bar: f64, t_total: f64, f: f64) -> usize {
    assert!(f >= 1.0, "fraction must be at least 1");
    if !(t_bar > 0.0) {
        return 1 << 20;
    }
    ((t_total / f) / t_bar).round().max(3.0) as usize
}

/// Number of sends per improvement epoch: ceil(log2 p).
pub fn rumor_fanout(p: usize) -> usize {
    if p <= 1 {
        0
    } else {
        (usize::BITS - (p - 1).leading_zeros()) as usize
    }
}

/// Rumor-spreading bookkeeping of one worker: who has not yet received the
/// current best, and how many sends this epoch has used.
#[derive(Clone, Debug)]
pub struct RumorState {
    me: usize,
    p: usize,
    eligible: Vec<usize>,
    sends: usize,
    limit: usize,
}

impl RumorState {
    pub fn new(me: usize, p: usize) -> Self {
        assert!(me < p);
        let mut s = RumorState {
            me,
            p,
            eligible: Vec::new(),
            sends: 0,
            limit: rumor_fanout(p),
        };
        s.reset();
        s
    }

    /// Starts a new epoch: every other worker is eligible again.
    pub fn reset(&mut self) {
        self.eligible = (0..self.p).filter(|&w| w != self.me).collect();
        self.sends = 0;
    }

    pub fn sends(&self) -> usize {
        self.sends
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn eligible(&self) -> &[usize] {
        &self.eligible
    }

    /// Partner for the next send, or `None` once this epoch is exhausted.
    pub fn next_partner<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<usize> {
        if self.sends >= self.limit || self.eligible.is_empty() {
            return None;
        }
        let i = rng.gen_range(0..self.eligible.len());
        self.sends += 1;
        Some(self.eligible.swap_remove(i))
    }
}

/// Bounded per-worker inboxes. Sending never blocks; past the capacity the
/// oldest pending individual is dropped.
#[derive(Debug)]
pub struct Mailboxes {
    boxes: Vec<Mutex<VecDeque<Individual>>>,
    capacity: usize,
}

impl Mailboxes {
    pub fn new(p: usize, capacity: usize) -> Self {
        assert!(capacity >= 1);
        Mailboxes {
            boxes: (0..p).map(|_| Mutex::new(VecDeque::new())).collect(),
            capacity,
        }
    }

    /// Returns whether an older message had to be dropped.
    pub fn send(&self, to: usize, ind: Individual) -> bool {
        let mut q = self.boxes[to].lock().expect("mailbox lock poisoned");
        q.push_back(ind);
        if q.len() > self.capacity {
            q.pop_front();
            true
        } else {
            false
        }
    }

    pub fn drain(&self, me: usize) -> Vec<Individual> {
        let mut q = self.boxes[me].lock().expect("mailbox lock poisoned");
        q.drain(..).collect()
    }
}

/// Successor array of a uniformly random cyclic permutation: following
/// `succ` from any worker visits all workers once.
pub fn random_cyclic_permutation<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(rng);
    let mut succ = vec![0; p];
    for i in 0..p {
        succ[order[i]] = order[(i + 1) % p];
    }
    succ
}

/// Quick-start exchange: `rounds` times, draw a random cyclic permutation;
/// every worker sends a random member of its population to its successor,
/// which inserts it with the eviction rule. Returns the permutations used.
pub fn quick_start<R: Rng + ?Sized>(pops: &mut [Population], rounds: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let p = pops.len();
    let mut used = Vec::new();
    if p < 2 {
        return used;
    }
    for _ in 0..rounds {
        let succ = random_cyclic_permutation(p, rng);
        let outgoing: Vec<Option<Individual>> = pops
            .iter()
            .map(|pop| pop.members().choose(rng).cloned())
            .collect();
        for (from, ind) in outgoing.into_iter().enumerate() {
            if let Some(ind) = ind {
                evict_insert(&mut pops[succ[from]], ind, rng);
            }
        }
        used.push(succ);
    }
    used
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub workers: usize,
    pub t_total: Duration,
    pub fraction: f64,
    pub ratios: OperatorRatios,
    pub partitioner: PartitionerConfig,
    /// Communication happens every `comm_period` iterations.
    pub comm_period: usize,
    pub seed: u64,
    /// Fixed population size instead of the timed estimate.
    pub population_size: Option<usize>,
    pub mailbox_capacity: usize,
}

impl EngineConfig {
    pub fn new(partitioner: PartitionerConfig, workers: usize, t_total: Duration) -> Self {
        assert!(workers >= 1, "at least one worker is needed");
        assert!(!t_total.is_zero(), "time budget must be positive");
        EngineConfig {
            workers,
            t_total,
            fraction: DEFAULT_FRACTION,
            ratios: OperatorRatios::default(),
            seed: partitioner.seed,
            partitioner,
            comm_period: 1,
            population_size: None,
            mailbox_capacity: DEFAULT_MAILBOX_CAPACITY,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WorkerStats {
    pub iterations: usize,
    pub created: usize,
    pub operators: [usize; 5],
    pub sent: usize,
    pub received: usize,
    pub rejected_arrivals: usize,
    pub dropped: usize,
    pub epochs: usize,
}

fn operator_slot(op: Operator) -> usize {
    match op {
        Operator::M1 => 0,
        Operator::M2 => 1,
        Operator::C1 => 2,
        Operator::C2 => 3,
        Operator::C3 => 4,
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub best: Individual,
    /// Events of all workers ordered by time.
    pub log: Vec<ConvergenceEvent>,
    pub population_size: usize,
    pub t_bar: f64,
    pub stats: Vec<WorkerStats>,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("worker {0} panicked")]
    WorkerPanicked(usize),
    #[error("no feasible individual was produced")]
    NoFeasibleIndividual,
}

fn worker_rng(seed: u64, id: usize) -> SeededRng {
    seeded_rng(seed ^ (id as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

struct Worker {
    id: usize,
    rng: SeededRng,
    pop: Population,
    log: Vec<ConvergenceEvent>,
    stats: WorkerStats,
}

impl Worker {
    fn record(&mut self, start: Instant, cut: Weight) {
        self.log.push(ConvergenceEvent {
            worker: self.id,
            t: start.elapsed().as_secs_f64(),
            cut,
        });
    }
}

/// Runs `f` on every worker in its own thread and collects the results in
/// worker order.
fn in_parallel<T, F>(workers: Vec<Worker>, f: F) -> Result<Vec<(Worker, T)>, EngineError>
where
    T: Send,
    F: Fn(&mut Worker) -> T + Sync,
{
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> = workers
            .into_iter()
            .map(|mut w| {
                scope.spawn(move || {
                    let out = f(&mut w);
                    (w, out)
                })
            })
            .collect();
        handles
            .into_iter()
            .enumerate()
            .map(|(id, h)| h.join().map_err(|_| EngineError::WorkerPanicked(id)))
            .collect()
    })
}

/// Runs the distributed evolutionary algorithm on `g` for `cfg.t_total`.
pub fn run(g: &Graph, cfg: &EngineConfig) -> Result<RunResult, EngineError> {
    let start = Instant::now();
    let p = cfg.workers;
    let t_total = cfg.t_total.as_secs_f64();
    let creation_window = t_total / cfg.fraction;
    let workers: Vec<Worker> = (0..p)
        .map(|id| Worker {
            id,
            rng: worker_rng(cfg.seed, id),
            pop: Population::new(1),
            log: Vec::new(),
            stats: WorkerStats::default(),
        })
        .collect();

    // Calibration: one timed partitioning call per worker.
    let calibrated = in_parallel(workers, |w| {
        let t0 = Instant::now();
        let part = partition_with_rng(g, &cfg.partitioner, &mut w.rng);
        let t_bar = t0.elapsed().as_secs_f64();
        w.record(start, part.cut());
        w.stats.created += 1;
        (part, t_bar)
    })?;
    let t_bar = calibrated.iter().map(|(_, (_, t))| t).sum::<f64>() / p as f64;
    let size = cfg
        .population_size
        .unwrap_or_else(|| estimate_population_size(t_bar, t_total, cfg.fraction))
        .max(1);
    let local = size.div_ceil(p);
    let workers: Vec<Worker> = calibrated
        .into_iter()
        .map(|(mut w, (part, _))| {
            w.pop = Population::new(size);
            let ind = Individual::new(g, part);
            evict_insert(&mut w.pop, ind, &mut w.rng);
            w
        })
        .collect();

    // Each worker fills its population with s' = ceil(S / p) individuals.
    let filled = in_parallel(workers, |w| {
        while w.stats.created < local && start.elapsed().as_secs_f64() < creation_window {
            let part = partition_with_rng(g, &cfg.partitioner, &mut w.rng);
            w.record(start, part.cut());
            w.stats.created += 1;
            let ind = Individual::new(g, part);
            evict_insert(&mut w.pop, ind, &mut w.rng);
        }
    })?;
    let mut workers: Vec<Worker> = filled.into_iter().map(|(w, ())| w).collect();

    // Quick start, driven by a coordinator.
    let mut coordinator = worker_rng(cfg.seed, usize::MAX - 1);
    let mut pops: Vec<Population> = workers.iter_mut().map(|w| std::mem::replace(&mut w.pop, Population::new(1))).collect();
    quick_start(&mut pops, size.saturating_sub(local), &mut coordinator);
    for (w, pop) in workers.iter_mut().zip(pops) {
        w.pop = pop;
    }

    let mailboxes = Mailboxes::new(p, cfg.mailbox_capacity);
    let comm_period = cfg.comm_period.max(1);
    let finished = in_parallel(workers, |w| {
        let mut rumor = RumorState::new(w.id, p);
        let mut state = NaturalCutState::new(g.n());
        let mut last_best = w.pop.best_cut();
        w.stats.epochs = 1;
        while start.elapsed().as_secs_f64() < t_total {
            let off = if start.elapsed().as_secs_f64() < creation_window || w.pop.is_empty() {
                w.stats.created += 1;
                Individual::new(g, partition_with_rng(g, &cfg.partitioner, &mut w.rng))
            } else {
                let op = pick_operator(&cfg.ratios, &mut w.rng);
                w.stats.operators[operator_slot(op)] += 1;
                apply_operator(op, g, &w.pop, &mut state, &cfg.partitioner, &mut w.rng)
            };
            w.record(start, off.cut());
            evict_insert(&mut w.pop, off, &mut w.rng);
            w.stats.iterations += 1;
            if w.stats.iterations % comm_period == 0 {
                for ind in mailboxes.drain(w.id) {
                    w.stats.received += 1;
                    // Re-validate: recompute cut and balance from scratch.
                    let part = ind.into_partition();
                    if !(part.n() == g.n() && part.is_consistent(g) && part.is_feasible()) {
                        w.stats.rejected_arrivals += 1;
                        continue;
                    }
                    w.record(start, part.cut());
                    evict_insert(&mut w.pop, Individual::new(g, part), &mut w.rng);
                }
            }
            let best = w.pop.best_cut();
            if best < last_best || (last_best.is_none() && best.is_some()) {
                rumor.reset();
                w.stats.epochs += 1;
            }
            last_best = best;
            if w.stats.iterations % comm_period == 0 {
                if let (Some(partner), Some(best)) = (rumor.next_partner(&mut w.rng), w.pop.best()) {
                    if mailboxes.send(partner, best.clone()) {
                        w.stats.dropped += 1;
                    }
                    w.stats.sent += 1;
                }
            }
        }
    })?;

    let mut log = Vec::new();
    let mut stats = Vec::new();
    let mut best: Option<Individual> = None;
    for (w, ()) in finished {
        if let Some(b) = w.pop.best() {
            if best.as_ref().is_none_or(|x| b.cut() < x.cut()) {
                best = Some(b.clone());
            }
        }
        log.extend(w.log);
        stats.push(w.stats);
    }
    log.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(RunResult {
        best: best.ok_or(EngineError::NoFeasibleIndividual)?,
        log,
        population_size: size,
        t_bar,
        stats,
    })
}

/// Outcome of the restart baseline.
#[derive(Clone, Debug)]
pub struct RestartResult {
    pub best: Partition,
    pub log: Vec<ConvergenceEvent>,
    pub runs: usize,
}

/// Baseline: `workers` threads repeatedly partition `g` from scratch with
/// fresh seeds until `budget` has elapsed; the best feasible result wins.
pub fn restart_baseline(
    g: &Graph,
    cfg: &PartitionerConfig,
    budget: Duration,
    workers: usize,
    seed: u64,
) -> Result<RestartResult, EngineError> {
    assert!(workers >= 1);
    let start = Instant::now();
    let ws: Vec<Worker> = (0..workers)
        .map(|id| Worker {
            id,
            rng: worker_rng(seed, id),
            pop: Population::new(1),
            log: Vec::new(),
            stats: WorkerStats::default(),
        })
        .collect();
    let done = in_parallel(ws, |w| {
        let mut best: Option<Partition> = None;
        loop {
            let part = partition_with_rng(g, cfg, &mut w.rng);
            w.record(start, part.cut());
            w.stats.created += 1;
            if part.is_feasible() && best.as_ref().is_none_or(|b| part.cut() < b.cut()) {
                best = Some(part);
            }
            if start.elapsed() >= budget {
                break;
            }
        }
        best
    })?;
    let mut best: Option<Partition> = None;
    let mut log = Vec::new();
    let mut runs = 0;
    for (w, b) in done {
        runs += w.stats.created;
        log.extend(w.log);
        if let Some(b) = b {
            if best.as_ref().is_none_or(|x| b.cut() < x.cut()) {
                best = Some(b);
            }
        }
    }
    log.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(RestartResult {
        best: best.ok_or(EngineError::NoFeasibleIndividual)?,
        log,
        runs,
    })
}
