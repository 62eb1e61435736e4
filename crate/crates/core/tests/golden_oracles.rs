//! Reference model against independent dense-matrix computations.

use gsim_core::{
    gcn_layer, generate_synthetic, normalize_adjacency, one_hot_features, random_model,
    simgnn_score, Graph, Matrix, DEFAULT_DIMS, DEFAULT_K,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize, vocab: usize) -> Graph {
    let n = rng.random_range(1..=max_nodes);
    let e = rng.random_range(0..=n * (n - 1) / 2);
    generate_synthetic(rng.random(), n, e, vocab).unwrap()
}

fn to_dense(m: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// `D^-1/2 (A + I) D^-1/2` built from the adjacency matrix directly.
fn dense_normalized(g: &Graph) -> DMatrix<f64> {
    let n = g.num_nodes();
    let mut a = DMatrix::<f64>::identity(n, n);
    for &(i, j) in g.edges() {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    let d: Vec<f64> = (0..n).map(|i| a.row(i).sum().sqrt().recip()).collect();
    DMatrix::from_fn(n, n, |i, j| d[i] * a[(i, j)] * d[j])
}

/// Edge list scattered into a dense matrix with `m[dst][src] = weight`.
fn scatter(g: &Graph) -> DMatrix<f64> {
    let norm = normalize_adjacency::<f64>(g);
    let mut m = DMatrix::zeros(g.num_nodes(), g.num_nodes());
    for e in norm.edges() {
        m[(e.dst, e.src)] += e.weight;
    }
    m
}

#[test]
fn normalization_matches_dense_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let g = random_graph(&mut rng, 12, 5);
        let got = scatter(&g);
        let want = dense_normalized(&g);
        assert!((&got - &want).abs().max() <= 1e-12);
        assert_eq!(got, got.transpose());
    }
}

#[test]
fn gcn_layer_matches_dense_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let g = random_graph(&mut rng, 12, 6);
        let f_out = rng.random_range(1..=9);
        let model = random_model(rng.random(), &[6, f_out, 2, 2], 2).unwrap();
        let layer = &model.gcn[0];
        let h = one_hot_features::<f64>(&g, 6).unwrap();
        let got = gcn_layer(&h, &normalize_adjacency(&g), layer).unwrap();

        let bias = DVector::from_column_slice(&layer.bias).transpose();
        let mut want = dense_normalized(&g) * to_dense(&h) * to_dense(&layer.weight);
        for mut row in want.row_iter_mut() {
            row += &bias;
            row.apply(|v| *v = v.max(0.0));
        }
        assert!((to_dense(&got) - want).abs().max() <= 1e-12);
    }
}

/// Whole forward pass with nalgebra, written from the model definition.
fn dense_score(g1: &Graph, g2: &Graph, m: &gsim_core::GoldenModel) -> f64 {
    let embed = |g: &Graph| {
        let a = dense_normalized(g);
        let mut h = to_dense(&one_hot_features::<f64>(g, m.input_features()).unwrap());
        for layer in &m.gcn {
            let b = DVector::from_column_slice(&layer.bias).transpose();
            h = &a * h * to_dense(&layer.weight);
            for mut row in h.row_iter_mut() {
                row += &b;
                row.apply(|v| *v = v.max(0.0));
            }
        }
        let mean = h.row_sum().transpose() / h.nrows() as f64;
        let ctx = (to_dense(&m.att) * mean).map(f64::tanh);
        let a = (&h * ctx).map(|v| 1.0 / (1.0 + (-v).exp()));
        h.transpose() * a
    };
    let (e1, e2) = (embed(g1), embed(g2));
    let v = to_dense(&m.ntn_v);
    let cat = DVector::from_iterator(e1.len() * 2, e1.iter().chain(e2.iter()).copied());
    let mut s = DVector::from_fn(m.k(), |k, _| {
        let bil = (e1.transpose() * to_dense(&m.ntn_w[k]) * &e2)[(0, 0)];
        let lin = (v.row(k) * &cat)[(0, 0)];
        m.ntn_activation.apply(bil + lin + m.ntn_b[k])
    });
    let last = m.fcn.len() - 1;
    for (i, l) in m.fcn.iter().enumerate() {
        s = to_dense(&l.weight).transpose() * s + DVector::from_column_slice(&l.bias);
        if i < last {
            s.apply(|v| *v = v.max(0.0));
        }
    }
    1.0 / (1.0 + (-s[0]).exp())
}

#[test]
fn full_score_matches_dense_forward_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let model = random_model(rng.random(), &DEFAULT_DIMS, DEFAULT_K).unwrap();
        let g1 = random_graph(&mut rng, 12, 29);
        let g2 = random_graph(&mut rng, 12, 29);
        let got = simgnn_score(&g1, &g2, &model).unwrap();
        let want = dense_score(&g1, &g2, &model);
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
}

#[test]
fn score_invariant_under_relabeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let model = random_model(rng.random(), &DEFAULT_DIMS, DEFAULT_K).unwrap();
        let g1 = random_graph(&mut rng, 8, 29);
        let g2 = random_graph(&mut rng, 8, 29);
        let base = simgnn_score(&g1, &g2, &model).unwrap();
        let perm = |g: &Graph, rng: &mut ChaCha8Rng| {
            let mut p: Vec<usize> = (0..g.num_nodes()).collect();
            for i in (1..p.len()).rev() {
                p.swap(i, rng.random_range(0..=i));
            }
            g.permuted(&p).unwrap()
        };
        let moved = simgnn_score(&perm(&g1, &mut rng), &perm(&g2, &mut rng), &model).unwrap();
        assert!((base - moved).abs() <= 1e-9);
    }
}

#[test]
fn zero_model_scores_half() {
    let model = random_model(1, &DEFAULT_DIMS, DEFAULT_K).unwrap().zeroed();
    let g = Graph::new(1, vec![0], vec![]).unwrap();
    assert_eq!(simgnn_score(&g, &g, &model).unwrap(), 0.5);
}

#[test]
fn score_in_unit_interval_and_repeatable() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let model = random_model(2, &DEFAULT_DIMS, DEFAULT_K).unwrap();
    for _ in 0..50 {
        let g = random_graph(&mut rng, 10, 29);
        let s = simgnn_score(&g, &g, &model).unwrap();
        assert!(s > 0.0 && s < 1.0);
        assert_eq!(s, simgnn_score(&g, &g.clone(), &model).unwrap());
    }
}

/// Two fixed five-node molecules scored with the seed-42 model. Guards
/// against accidental changes of the reference pipeline.
#[test]
fn frozen_reference_score() {
    let g1 = Graph::new(5, vec![0, 1, 2, 1, 0], vec![(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    let g2 = Graph::new(5, vec![3, 3, 1, 0, 2], vec![(0, 1), (0, 2), (0, 3), (3, 4), (1, 2)]).unwrap();
    let model = random_model(42, &DEFAULT_DIMS, DEFAULT_K).unwrap();
    let s = simgnn_score(&g1, &g2, &model).unwrap();
    assert_eq!(s, FROZEN, "score {s:.17}");
}

const FROZEN: f64 = 0.498_250_611_659_539_16;
