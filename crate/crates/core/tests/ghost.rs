use std::path::Path;

use photosim::ghost::{
    aggregate, combine, partition_graph, run_gnn, update, Aggregator, GnnLayerSpec, GnnModelSpec, Graph,
};
use photosim::harness::SimConfig;
use photosim::kernels::{Activation, Executor, QuantTensor, ScheduleTrace};
use photosim::perf::gnn_op_count;
use photosim::tensor::max_relative_error;
use photosim::{Matrix, Mode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn layer(f_in: usize, f_out: usize, aggregator: Aggregator, self_loops: bool, gcn_norm: bool) -> GnnLayerSpec {
    GnnLayerSpec {
        f_in,
        f_out,
        aggregator,
        activation: Activation::Relu,
        self_loops,
        gcn_norm,
        weights: None,
    }
}

fn graph(n: usize, edges: &[(usize, usize)], f: usize, seed: u64) -> Graph<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Matrix::from_fn(n, f, |_, _| rng.gen_range(-1.0..1.0));
    let e: Vec<_> = edges.iter().map(|&(a, b)| (a, b, None)).collect();
    Graph::from_edges(&e, x).unwrap()
}

fn ghost_cfg() -> photosim::ghost::GhostConfig<f64> {
    SimConfig::default().ghost_config(0).unwrap()
}

#[test]
fn triangle_neighbors() {
    let g = graph(3, &[(0, 1), (1, 2), (2, 0)], 1, 0);
    assert!((0..3).all(|v| g.neighbors(v).len() == 2));
}

#[test]
fn star_center_takes_two_rounds() {
    let n = 4;
    let edges: Vec<_> = (1..=2 * n).map(|i| (0, i)).collect();
    let g = graph(2 * n + 1, &edges, 1, 0);
    let s = partition_graph(&g, 1, n, false);
    assert_eq!(s.rounds.iter().filter(|r| r.outputs == vec![0]).count(), 2);
}

#[test]
fn path_sum_by_hand() {
    let x = Matrix::from_vec(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
    let g = Graph::from_edges(&[(0, 1, None), (1, 2, None)], x.clone()).unwrap();
    let l = layer(1, 1, Aggregator::Sum, false, false);
    let s = partition_graph(&g, 2, 2, false);
    let out = aggregate(&g, &x, &l, &s, "a", &mut Executor::float(), &mut ScheduleTrace::new()).unwrap();
    assert_eq!(out.data(), &[2.0, 4.0, 2.0]);
    let maxl = layer(1, 1, Aggregator::Max, false, false);
    let out = aggregate(&g, &x, &maxl, &s, "a", &mut Executor::float(), &mut ScheduleTrace::new()).unwrap();
    assert_eq!(out.data(), &[2.0, 3.0, 2.0]);
}

#[test]
fn single_vertex_combine_matches_integer_matvec() {
    let x = Matrix::from_vec(1, 2, vec![0.7, -0.3]).unwrap();
    let w = Matrix::from_vec(2, 2, vec![0.5, -1.0, 0.25, 2.0]).unwrap();
    let g = Graph::from_edges(&[], x.clone()).unwrap();
    let s = partition_graph(&g, 1, 1, false);
    let cfg = ghost_cfg();
    let mut exec = Executor::new(Mode::Photonic, &cfg.engine).unwrap();
    let got = combine(&x, &w, &s, "c", &mut exec, &mut ScheduleTrace::new()).unwrap();
    let qx = QuantTensor::from_matrix(&x, 8).unwrap();
    let qw = QuantTensor::from_matrix(&w, 8).unwrap();
    for j in 0..2 {
        let acc: i64 = (0..2).map(|k| qx.code(0, k) as i64 * qw.code(k, j) as i64).sum();
        assert_eq!(got[(0, j)], acc as f64 * (qx.spec.scale * qw.spec.scale));
    }
}

#[test]
fn tanh_update_is_exact() {
    let x = Matrix::from_vec(1, 5, vec![-2.0, -0.5, 0.0, 0.3, 1.7]).unwrap();
    let l = GnnLayerSpec {
        activation: Activation::Tanh,
        ..layer(5, 5, Aggregator::Sum, false, false)
    };
    let cfg = ghost_cfg();
    let mut exec = Executor::new(Mode::Photonic, &cfg.engine).unwrap();
    let y = update(&x, &l, "u", &mut exec, &mut ScheduleTrace::new()).unwrap();
    for (a, b) in y.data().iter().zip(x.data()) {
        assert!((a - b.tanh()).abs() < 1e-6);
    }
}

#[test]
fn karate_photonic_equals_quantized() {
    let d = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/karate");
    let g = Graph::<f64>::load(d.join("graph.txt"), d.join("features.csv")).unwrap();
    assert_eq!(g.vertex_count(), 34);
    assert_eq!(g.incidence_count(), 156);
    let spec = GnnModelSpec::load(d.join("gcn.json")).unwrap();
    let w = spec.weights::<f64>().unwrap();
    let cfg = ghost_cfg();
    let (p, trace) = run_gnn(&g, &spec, &w, &cfg, Mode::Photonic).unwrap();
    let (q, _) = run_gnn(&g, &spec, &w, &cfg, Mode::QuantRef).unwrap();
    assert_eq!(p, q);
    assert_eq!(trace.total_ops(), gnn_op_count(&g, &spec));
    assert!(trace.annotation("reduce_unit_activations") > 0);
}

#[test]
fn one_layer_sum_equals_dense_product() {
    for loops in [false, true] {
        let g = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (1, 4)], 3, 7);
        let l = layer(3, 2, Aggregator::Sum, loops, false);
        let w = Matrix::from_vec(3, 2, vec![0.5, -1.0, 2.0, 0.25, -0.75, 1.5]).unwrap();
        let s = partition_graph(&g, 2, 3, loops);
        let mut exec = Executor::float();
        let mut t = ScheduleTrace::new();
        let agg = aggregate(&g, g.features(), &l, &s, "a", &mut exec, &mut t).unwrap();
        let got = combine(&agg, &w, &s, "c", &mut exec, &mut t).unwrap();
        let mut a = Matrix::zeros(6, 6);
        for &(u, v) in &[(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (1, 4)] {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        if loops {
            for v in 0..6 {
                a[(v, v)] = 1.0;
            }
        }
        let want = a.matmul(g.features()).unwrap().matmul(&w).unwrap();
        assert!(max_relative_error(&got, &want) < 1e-12);
    }
}

#[test]
fn triangle_two_layer_op_count() {
    // layer 1: 6 incidences·2 + 3·2·3 = 30; layer 2: 6·3 + 3·3·1 = 27
    let g = graph(3, &[(0, 1), (1, 2), (2, 0)], 2, 1);
    let spec = GnnModelSpec {
        layers: vec![
            layer(2, 3, Aggregator::Sum, false, false),
            layer(3, 1, Aggregator::Sum, false, false),
        ],
        weight_seed: 2,
    };
    assert_eq!(gnn_op_count(&g, &spec), 57);
    // brute-force count of the multiplies the float reference performs
    let mut macs = 0u64;
    let mut f = 2;
    for l in &spec.layers {
        for v in 0..3 {
            macs += (g.incidences(v, l.self_loops).len() * f) as u64;
        }
        macs += (3 * l.f_in * l.f_out) as u64;
        f = l.f_out;
    }
    assert_eq!(macs, 57);
    let w = spec.weights::<f64>().unwrap();
    let (_, trace) = run_gnn(&g, &spec, &w, &ghost_cfg(), Mode::Photonic).unwrap();
    assert_eq!(trace.total_ops(), 57);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn photonic_equals_quantized_on_random_graphs(
        n in 1usize..40,
        raw in prop::collection::vec((0usize..40, 0usize..40), 0..120),
        agg in prop::sample::select(vec![Aggregator::Sum, Aggregator::Mean, Aggregator::Max]),
        loops in any::<bool>(),
        norm in any::<bool>(),
        v in 1usize..6,
        p in 1usize..12,
    ) {
        let edges: Vec<_> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
        let g = graph(n, &edges, 3, 5);
        let spec = GnnModelSpec {
            layers: vec![layer(3, 4, agg, loops, norm), layer(4, 2, Aggregator::Sum, loops, false)],
            weight_seed: 9,
        };
        let w = spec.weights::<f64>().unwrap();
        let cfg = ghost_cfg().with_partition(v, p).unwrap();
        let (a, _) = run_gnn(&g, &spec, &w, &cfg, Mode::Photonic).unwrap();
        let (b, _) = run_gnn(&g, &spec, &w, &cfg, Mode::QuantRef).unwrap();
        prop_assert_eq!(a, b);
    }
}
