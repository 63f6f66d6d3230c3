//! Buffer-and-partition scheduling of the aggregate stage.
//!
//! Output vertices are grouped into consecutive blocks of `V` (one per
//! lane). The sorted union of a block's incidences is cut into input blocks
//! of `N`; each (output block, input block) pair is one round. Blocks run in
//! descending order of total incidence count, a longest-first balancing rule.

use crate::scalar::Scalar;

use super::Graph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    /// Output vertices, at most `V`, one per lane.
    pub outputs: Vec<usize>,
    /// Sorted input vertices, at most `N`.
    pub inputs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSchedule {
    pub lanes_v: usize,
    pub partition_n: usize,
    pub self_loops: bool,
    pub rounds: Vec<Round>,
}

impl PartitionSchedule {
    /// `(output vertex, input vertex)` pairs in schedule order.
    pub fn covered_incidences<T: Scalar>(&self, graph: &Graph<T>) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in &self.rounds {
            for &v in &r.outputs {
                for (u, _) in graph.incidences(v, self.self_loops) {
                    if r.inputs.binary_search(&u).is_ok() {
                        out.push((v, u));
                    }
                }
            }
        }
        out
    }

    /// Output blocks in execution order, as consecutive vertex ranges.
    pub fn output_blocks(&self) -> Vec<(usize, usize)> {
        let mut blocks: Vec<(usize, usize)> = Vec::new();
        for r in &self.rounds {
            let (Some(&first), Some(&last)) = (r.outputs.first(), r.outputs.last()) else {
                continue;
            };
            if blocks.last() != Some(&(first, last + 1)) {
                blocks.push((first, last + 1));
            }
        }
        blocks
    }
}

pub fn partition_graph<T: Scalar>(
    graph: &Graph<T>,
    lanes_v: usize,
    partition_n: usize,
    self_loops: bool,
) -> PartitionSchedule {
    let v = lanes_v.max(1);
    let n = partition_n.max(1);
    let count = graph.vertex_count();
    let mut blocks: Vec<(usize, Vec<Round>)> = Vec::new();
    for start in (0..count).step_by(v) {
        let outputs: Vec<usize> = (start..(start + v).min(count)).collect();
        let mut union: Vec<usize> = Vec::new();
        let mut load = 0;
        for &o in &outputs {
            let inc = graph.incidences(o, self_loops);
            load += inc.len();
            union.extend(inc.into_iter().map(|e| e.0));
        }
        union.sort_unstable();
        union.dedup();
        let rounds = if union.is_empty() {
            vec![Round {
                outputs,
                inputs: Vec::new(),
            }]
        } else {
            union
                .chunks(n)
                .map(|c| Round {
                    outputs: outputs.clone(),
                    inputs: c.to_vec(),
                })
                .collect()
        };
        blocks.push((load, rounds));
    }
    blocks.sort_by_key(|b| std::cmp::Reverse(b.0));
    PartitionSchedule {
        lanes_v: v,
        partition_n: n,
        self_loops,
        rounds: blocks.into_iter().flat_map(|b| b.1).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Matrix;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Graph<f64> {
        let e: Vec<_> = edges.iter().map(|&(a, b)| (a, b, None)).collect();
        Graph::from_edges(&e, Matrix::zeros(n, 1)).unwrap()
    }

    #[test]
    fn small_graph_is_one_round() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let s = partition_graph(&g, 4, 4, false);
        assert_eq!(s.rounds.len(), 1);
    }

    #[test]
    fn star_center_spans_two_rounds() {
        let n = 5;
        let edges: Vec<_> = (1..=2 * n).map(|i| (0, i)).collect();
        let g = graph(2 * n + 1, &edges);
        let s = partition_graph(&g, 1, n, false);
        let center = s.rounds.iter().filter(|r| r.outputs.contains(&0)).count();
        assert_eq!(center, 2);
        // heaviest block first
        assert_eq!(s.rounds[0].outputs, vec![0]);
    }

    #[test]
    fn isolated_block_still_gets_a_round() {
        let g = graph(4, &[(0, 1)]);
        let s = partition_graph(&g, 2, 2, false);
        assert_eq!(s.rounds.len(), 2);
        assert!(s.rounds[1].inputs.is_empty());
        assert_eq!(s.output_blocks(), vec![(0, 2), (2, 4)]);
    }

    proptest! {
        #[test]
        fn every_incidence_covered_once(
            n in 1usize..60,
            raw in prop::collection::vec((0usize..60, 0usize..60), 0..200),
            v in 1usize..9,
            p in 1usize..17,
            loops in any::<bool>(),
        ) {
            let edges: Vec<_> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
            let g = graph(n, &edges);
            let s = partition_graph(&g, v, p, loops);
            let mut got = s.covered_incidences(&g);
            got.sort_unstable();
            let mut want = Vec::new();
            for x in 0..n {
                for (u, _) in g.incidences(x, loops) {
                    want.push((x, u));
                }
            }
            want.sort_unstable();
            prop_assert_eq!(got, want);
            for r in &s.rounds {
                prop_assert!(r.outputs.len() <= v && r.inputs.len() <= p);
            }
        }
    }
}
