use std::io::{self, Write};

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::construction::EtaSpec;
use crate::density_evolution::ErasureProfile;
use crate::error::{GpcError, Result};

/// Variable nodes joining positions `a <= b`, numbered from `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct VnBlock {
    a: usize,
    b: usize,
    start: usize,
}

/// Tanner graph of a GPC with `d` check nodes per position.
///
/// Variable nodes are stored implicitly: the block list fixes the canonical
/// order (by position pair, then by the two check-node indices), and
/// [`TannerGraph::edge`] recovers the two endpoints of any variable node in
/// `O(log blocks)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TannerGraph {
    positions: usize,
    d: usize,
    n: usize,
    blocks: Vec<VnBlock>,
    vn_count: usize,
    degrees: Vec<usize>,
    capability: Vec<u32>,
}

/// How capabilities are distributed over the check nodes of a position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapabilityMode {
    /// Exactly `τ_t · d` nodes per position get capability `t`.
    Deterministic,
    /// Each node draws its capability independently from `τ`.
    Random,
}

/// `d = γn` must be an integer.
pub fn build_graph(spec: &EtaSpec, n: usize) -> Result<TannerGraph> {
    let gamma = spec.gamma();
    let d_exact = gamma * n as i64;
    if !d_exact.is_integer() || d_exact.to_integer() <= 0 {
        // admissible n are multiples of den(γ)
        let step = *gamma.denom() as usize;
        let below = n / step * step;
        return Err(GpcError::NonIntegralBlockSize {
            gamma: gamma.to_string(),
            n,
            below,
            above: below + step,
        });
    }
    let d = d_exact.to_integer().to_usize().expect("positive");
    let eta = spec.eta();
    let positions = spec.size();
    if let Some((row, col)) = eta.first_asymmetry() {
        return Err(GpcError::NotSymmetric { row, col });
    }
    let mut blocks = Vec::new();
    let mut start = 0;
    for a in 0..positions {
        for b in a..positions {
            if eta.get(a, b) == 0 {
                continue;
            }
            blocks.push(VnBlock { a, b, start });
            start += if a == b { d * (d - 1) / 2 } else { d * d };
        }
    }
    let degrees = (0..positions)
        .map(|i| {
            let off: usize = (0..positions)
                .filter(|&j| j != i && eta.get(i, j) != 0)
                .count();
            d * off + if eta.get(i, i) != 0 { d - 1 } else { 0 }
        })
        .collect();
    Ok(TannerGraph {
        positions,
        d,
        n,
        blocks,
        vn_count: start,
        degrees,
        capability: vec![0; positions * d],
    })
}

impl TannerGraph {
    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cn_count(&self) -> usize {
        self.positions * self.d
    }

    pub fn vn_count(&self) -> usize {
        self.vn_count
    }

    /// Degree shared by every check node at `position`.
    pub fn cn_degree(&self, position: usize) -> usize {
        self.degrees[position]
    }

    pub fn capability(&self, cn: usize) -> u32 {
        self.capability[cn]
    }

    pub fn capabilities(&self) -> &[u32] {
        &self.capability
    }

    pub fn position_of(&self, cn: usize) -> usize {
        cn / self.d
    }

    /// The two check nodes joined by variable node `vn`.
    pub fn edge(&self, vn: usize) -> (usize, usize) {
        assert!(vn < self.vn_count, "variable node {vn} out of range");
        let bi = self.blocks.partition_point(|blk| blk.start <= vn) - 1;
        let blk = self.blocks[bi];
        let local = vn - blk.start;
        let d = self.d;
        if blk.a != blk.b {
            (blk.a * d + local / d, blk.b * d + local % d)
        } else {
            let (p, q) = unrank_pair(local, d);
            (blk.a * d + p, blk.a * d + q)
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vn_count).map(|v| self.edge(v))
    }

    /// Text export: header `gpc-graph v1 Ltot d`, then `vn_id cn_a cn_b`.
    pub fn write_edge_list(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "gpc-graph v1 {} {}", self.positions, self.d)?;
        for (v, (a, b)) in self.edges().enumerate() {
            writeln!(w, "{v} {a} {b}")?;
        }
        Ok(())
    }

    /// Overrides every capability; mainly for hand-built test graphs.
    pub fn with_capabilities(mut self, caps: Vec<u32>) -> Result<Self> {
        if caps.len() != self.cn_count() {
            return Err(GpcError::DimensionMismatch {
                expected: self.cn_count(),
                actual: caps.len(),
            });
        }
        self.capability = caps;
        Ok(self)
    }
}

/// Inverse of the lexicographic ranking of pairs `p < q < d`.
fn unrank_pair(rank: usize, d: usize) -> (usize, usize) {
    // pairs preceding row p: p(2d - p - 1)/2
    let offset = |p: usize| p * (2 * d - p - 1) / 2;
    let (mut lo, mut hi) = (0, d - 1);
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if offset(mid) <= rank {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = lo;
    (p, p + 1 + rank - offset(p))
}

/// Assigns erasure-correcting capabilities to every check node.
pub fn assign_capabilities(
    graph: &TannerGraph,
    profile: &ErasureProfile,
    mode: CapabilityMode,
    rng_seed: u64,
) -> Result<TannerGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    assign_capabilities_with(graph, profile, mode, &mut rng)
}

pub(crate) fn assign_capabilities_with(
    graph: &TannerGraph,
    profile: &ErasureProfile,
    mode: CapabilityMode,
    rng: &mut impl Rng,
) -> Result<TannerGraph> {
    let d = graph.d;
    let mut caps = Vec::with_capacity(graph.cn_count());
    match mode {
        CapabilityMode::Deterministic => {
            let mut pattern = Vec::with_capacity(d);
            for (t, p) in profile.masses() {
                let exact = p * d as f64;
                let count = exact.round();
                if (exact - count).abs() > 1e-9 {
                    return Err(GpcError::NonIntegralSplit { t, d, product: exact });
                }
                pattern.extend(std::iter::repeat(t).take(count as usize));
            }
            debug_assert_eq!(pattern.len(), d);
            for _ in 0..graph.positions {
                caps.extend_from_slice(&pattern);
            }
        }
        CapabilityMode::Random => {
            let masses: Vec<(u32, f64)> = profile.masses().collect();
            for _ in 0..graph.cn_count() {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut chosen = masses.last().expect("nonempty").0;
                for &(t, p) in &masses {
                    acc += p;
                    if u < acc {
                        chosen = t;
                        break;
                    }
                }
                caps.push(chosen);
            }
        }
    }
    let mut g = graph.clone();
    g.capability = caps;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{make_braided, make_pc, make_staircase, Family};
    use crate::matrix::BinMatrix;
    use num_rational::Rational64;

    fn degree_histogram(g: &TannerGraph) -> Vec<usize> {
        let mut deg = vec![0; g.cn_count()];
        for (a, b) in g.edges() {
            assert_ne!(a, b);
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    #[test]
    fn staircase_counts() {
        let g = build_graph(&make_staircase(6).unwrap(), 12).unwrap();
        assert_eq!(g.d(), 6);
        assert_eq!(g.vn_count(), 180);
        assert_eq!(g.cn_degree(0), 6);
        assert_eq!(g.cn_degree(3), 12);
        let deg = degree_histogram(&g);
        for cn in 0..g.cn_count() {
            assert_eq!(deg[cn], g.cn_degree(g.position_of(cn)));
        }
    }

    #[test]
    fn pc_is_complete_bipartite() {
        let g = build_graph(&make_pc(), 4).unwrap();
        assert_eq!(g.vn_count(), 16);
        assert!(degree_histogram(&g).iter().all(|&d| d == 4));
        let mut pairs: Vec<_> = g.edges().collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), 16);
    }

    #[test]
    fn braided_counts() {
        let g = build_graph(&make_braided(8).unwrap(), 12).unwrap();
        assert_eq!(g.d(), 4);
        assert_eq!(g.vn_count(), 160);
    }

    #[test]
    fn non_integral_block_size() {
        let err = build_graph(&make_braided(8).unwrap(), 13).unwrap_err();
        assert_eq!(
            err,
            GpcError::NonIntegralBlockSize { gamma: "1/3".into(), n: 13, below: 12, above: 15 }
        );
    }

    #[test]
    fn diagonal_blocks_have_no_self_loops() {
        let mut eta = BinMatrix::square(3);
        eta.set(1, 1, 1);
        eta.set_sym(0, 1, 1);
        eta.set_sym(1, 2, 1);
        let spec = EtaSpec::new(eta, Rational64::new(1, 1), Family::Custom).unwrap();
        let g = build_graph(&spec, 5).unwrap();
        assert_eq!(g.vn_count(), 2 * 25 + 10);
        assert_eq!(g.cn_degree(1), 5 * 2 + 4);
        let deg = degree_histogram(&g);
        for cn in 0..g.cn_count() {
            assert_eq!(deg[cn], g.cn_degree(g.position_of(cn)));
        }
        let mut within: Vec<_> = g.edges().filter(|(a, b)| a / 5 == 1 && b / 5 == 1).collect();
        let n = within.len();
        within.sort();
        within.dedup();
        assert_eq!(within.len(), n);
    }

    #[test]
    fn unrank_covers_all_pairs() {
        for d in 2..9 {
            let mut r = 0;
            for p in 0..d {
                for q in p + 1..d {
                    assert_eq!(unrank_pair(r, d), (p, q));
                    r += 1;
                }
            }
        }
    }

    #[test]
    fn edge_list_export() {
        let g = build_graph(&make_pc(), 2).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "gpc-graph v1 2 2\n0 0 2\n1 0 3\n2 1 2\n3 1 3\n");
    }

    #[test]
    fn capability_assignment() {
        let g = build_graph(&make_staircase(4).unwrap(), 12).unwrap();
        let reg = ErasureProfile::regular(3).unwrap();
        let a = assign_capabilities(&g, &reg, CapabilityMode::Deterministic, 0).unwrap();
        assert!(a.capabilities().iter().all(|&t| t == 3));

        let mix = ErasureProfile::new([(3, 0.5), (4, 0.5)]).unwrap();
        let a = assign_capabilities(&g, &mix, CapabilityMode::Deterministic, 0).unwrap();
        for pos in 0..4 {
            let caps = &a.capabilities()[pos * 6..(pos + 1) * 6];
            assert_eq!(caps.iter().filter(|&&t| t == 3).count(), 3);
            assert_eq!(caps.iter().filter(|&&t| t == 4).count(), 3);
        }

        let odd = ErasureProfile::new([(3, 0.25), (4, 0.75)]).unwrap();
        assert!(matches!(
            assign_capabilities(&g, &odd, CapabilityMode::Deterministic, 0),
            Err(GpcError::NonIntegralSplit { .. })
        ));
        let r1 = assign_capabilities(&g, &odd, CapabilityMode::Random, 42).unwrap();
        let r2 = assign_capabilities(&g, &odd, CapabilityMode::Random, 42).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.capabilities().iter().all(|&t| t == 3 || t == 4));
    }
}
