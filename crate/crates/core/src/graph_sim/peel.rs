use rand::Rng;
use serde::{Deserialize, Serialize};

use super::graph::TannerGraph;
use crate::error::{invalid, Result};

/// Erasure pattern of one trial together with the decoder state.
///
/// Only erased variable nodes are tracked. `incidence` lists, for every
/// check node, the indices (into `erased`) of its erased neighbours.
#[derive(Debug, Clone)]
pub struct ErasureState {
    erased: Vec<usize>,
    alive: Vec<bool>,
    residual: Vec<u32>,
    offsets: Vec<usize>,
    incidence: Vec<u32>,
    iteration: usize,
}

impl ErasureState {
    /// Builds the state for an explicit, strictly increasing list of erased
    /// variable nodes.
    pub fn from_erased(graph: &TannerGraph, erased: Vec<usize>) -> Result<Self> {
        if erased.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("erased variable nodes must be strictly increasing"));
        }
        if erased.last().is_some_and(|&v| v >= graph.vn_count()) {
            return Err(invalid("erased variable node out of range"));
        }
        let cn = graph.cn_count();
        let ends: Vec<(usize, usize)> = erased.iter().map(|&v| graph.edge(v)).collect();
        let mut residual = vec![0u32; cn];
        for &(a, b) in &ends {
            residual[a] += 1;
            residual[b] += 1;
        }
        let mut offsets = Vec::with_capacity(cn + 1);
        offsets.push(0);
        for r in &residual {
            offsets.push(offsets.last().unwrap() + *r as usize);
        }
        let mut fill = offsets[..cn].to_vec();
        let mut incidence = vec![0u32; offsets[cn]];
        for (k, &(a, b)) in ends.iter().enumerate() {
            for c in [a, b] {
                incidence[fill[c]] = k as u32;
                fill[c] += 1;
            }
        }
        Ok(Self {
            alive: vec![true; erased.len()],
            erased,
            residual,
            offsets,
            incidence,
            iteration: 0,
        })
    }

    pub fn is_erased(&self, vn: usize) -> bool {
        self.erased
            .binary_search(&vn)
            .is_ok_and(|k| self.alive[k])
    }

    /// Variable nodes still erased, in increasing order.
    pub fn remaining(&self) -> Vec<usize> {
        self.erased
            .iter()
            .zip(&self.alive)
            .filter_map(|(&v, &a)| a.then_some(v))
            .collect()
    }

    pub fn remaining_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn initial_count(&self) -> usize {
        self.erased.len()
    }

    pub fn residual(&self, cn: usize) -> u32 {
        self.residual[cn]
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Recounts every residual from the erased set and compares.
    pub fn is_consistent(&self, graph: &TannerGraph) -> bool {
        let mut count = vec![0u32; graph.cn_count()];
        for v in self.remaining() {
            let (a, b) = graph.edge(v);
            count[a] += 1;
            count[b] += 1;
        }
        count == self.residual
    }

    fn neighbours(&self, cn: usize) -> &[u32] {
        &self.incidence[self.offsets[cn]..self.offsets[cn + 1]]
    }

    fn resolve(&mut self, graph: &TannerGraph, k: usize) {
        debug_assert!(self.alive[k]);
        self.alive[k] = false;
        let (a, b) = graph.edge(self.erased[k]);
        self.residual[a] -= 1;
        self.residual[b] -= 1;
    }

    /// Fraction of check nodes holding more erasures than they can correct.
    pub fn failed_fraction(&self, graph: &TannerGraph) -> f64 {
        let failed = self
            .residual
            .iter()
            .zip(graph.capabilities())
            .filter(|(&r, &t)| r > t)
            .count();
        failed as f64 / graph.cn_count() as f64
    }
}

/// Erases each variable node independently with probability `c/n`.
///
/// Uses geometric gaps, so the cost is proportional to the number of
/// erasures rather than the number of variable nodes.
pub fn sample_erasures(graph: &TannerGraph, c: f64, rng: &mut impl Rng) -> Result<ErasureState> {
    let n = graph.n() as f64;
    if !(c >= 0.0 && c.is_finite()) {
        return Err(invalid(format!("channel parameter must be nonnegative, got {c}")));
    }
    if c > n {
        return Err(invalid(format!("c = {c} exceeds n = {n}: erasure probability above 1")));
    }
    let p = c / n;
    let total = graph.vn_count();
    let erased: Vec<usize> = if p == 0.0 {
        Vec::new()
    } else if p == 1.0 {
        (0..total).collect()
    } else {
        let log_q = (-p).ln_1p();
        let mut out = Vec::with_capacity((p * total as f64 * 1.2) as usize + 8);
        let mut v = 0usize;
        loop {
            let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
            let gap = (u.ln() / log_q).floor();
            if gap >= (total - v) as f64 {
                break;
            }
            v += gap as usize;
            out.push(v);
            v += 1;
            if v >= total {
                break;
            }
        }
        out
    };
    ErasureState::from_erased(graph, erased)
}

/// Order in which check nodes act within one iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeelSchedule {
    /// Every correctable check node acts on the state left by the previous
    /// iteration.
    #[default]
    Flooding,
    /// Check nodes are visited in index order and see earlier resolutions
    /// of the same iteration. Diagnostic only.
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeelOutcome {
    /// `w[ℓ-1]` is the failed check fraction entering iteration `ℓ`.
    pub w: Vec<f64>,
    /// Variable nodes recovered in each iteration that ran.
    pub resolved: Vec<usize>,
    /// Iterations executed before a fixed point or the budget was reached.
    pub iterations_run: usize,
    pub remaining: usize,
}

impl PeelOutcome {
    pub fn success(&self) -> bool {
        self.remaining == 0
    }
}

/// Flooding peeling: a check node of capability `t` holding between one and
/// `t` erasures recovers all of them. Runs `max_iters` iterations, stopping
/// early at a fixed point; `w` is then extended with its final value.
pub fn peel(graph: &TannerGraph, state: &mut ErasureState, max_iters: usize) -> PeelOutcome {
    peel_with(graph, state, max_iters, PeelSchedule::Flooding)
}

pub fn peel_with(
    graph: &TannerGraph,
    state: &mut ErasureState,
    max_iters: usize,
    schedule: PeelSchedule,
) -> PeelOutcome {
    let caps = graph.capabilities();
    let mut w = Vec::with_capacity(max_iters);
    let mut resolved = Vec::new();
    let mut marked = vec![false; state.erased.len()];
    let mut batch = Vec::new();
    while w.len() < max_iters {
        w.push(state.failed_fraction(graph));
        batch.clear();
        match schedule {
            PeelSchedule::Flooding => {
                for cn in 0..graph.cn_count() {
                    let r = state.residual[cn];
                    if r == 0 || r > caps[cn] {
                        continue;
                    }
                    for &k in state.neighbours(cn) {
                        let k = k as usize;
                        if state.alive[k] && !marked[k] {
                            marked[k] = true;
                            batch.push(k);
                        }
                    }
                }
                for &k in &batch {
                    state.resolve(graph, k);
                    marked[k] = false;
                }
            }
            PeelSchedule::Sequential => {
                for cn in 0..graph.cn_count() {
                    let r = state.residual[cn];
                    if r == 0 || r > caps[cn] {
                        continue;
                    }
                    for i in state.offsets[cn]..state.offsets[cn + 1] {
                        let k = state.incidence[i] as usize;
                        if state.alive[k] {
                            state.resolve(graph, k);
                            batch.push(k);
                        }
                    }
                }
            }
        }
        state.iteration += 1;
        resolved.push(batch.len());
        if batch.is_empty() {
            break;
        }
    }
    let iterations_run = resolved.len();
    let last = state.failed_fraction(graph);
    w.resize(max_iters, last);
    PeelOutcome {
        w,
        resolved,
        iterations_run,
        remaining: state.remaining_count(),
    }
}
