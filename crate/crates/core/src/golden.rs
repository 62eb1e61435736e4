//! Reference forward pass of the graph-similarity network. Every simulator
//! result is checked against these functions evaluated in `f64`.

use crate::error::{Error, Result};
use crate::graph::{normalize_adjacency, one_hot_features, FeatureMatrix, Graph, NormalizedGraph};
use crate::matrix::{dot, Matrix};
use crate::model::{Affine, GcnLayerWeights, SimGnnModel};
use crate::scalar::Scalar;

/// Graph-level embedding of length `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphEmbedding<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> GraphEmbedding<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }
}

/// One GCN layer: `ReLU(A' * (H * W) + b)`.
pub fn gcn_layer<T: Scalar>(
    h: &FeatureMatrix<T>,
    a_norm: &NormalizedGraph<T>,
    w: &GcnLayerWeights<T>,
) -> Result<FeatureMatrix<T>> {
    if h.cols() != w.f_in() {
        return Err(Error::dims("GCN layer input width", w.f_in(), h.cols()));
    }
    if h.rows() != a_norm.num_nodes() {
        return Err(Error::dims("GCN layer node count", a_norm.num_nodes(), h.rows()));
    }
    let x = h.matmul(&w.weight)?;
    let mut out = Matrix::zeros(h.rows(), w.f_out());
    for e in a_norm.edges() {
        let src = x.row(e.src).to_vec();
        for (o, v) in out.row_mut(e.dst).iter_mut().zip(src) {
            *o += e.weight * v;
        }
    }
    for r in 0..out.rows() {
        for (o, &b) in out.row_mut(r).iter_mut().zip(&w.bias) {
            *o = Scalar::relu(*o + b);
        }
    }
    Ok(out)
}

/// Input of every layer followed by the final output: `[H0, H1, H2, H3]`.
pub fn gcn_stack_trace<T: Scalar>(
    h0: &FeatureMatrix<T>,
    a_norm: &NormalizedGraph<T>,
    model: &SimGnnModel<T>,
) -> Result<Vec<FeatureMatrix<T>>> {
    let mut trace = vec![h0.clone()];
    for layer in &model.gcn {
        let next = gcn_layer(trace.last().expect("non-empty"), a_norm, layer)?;
        trace.push(next);
    }
    Ok(trace)
}

pub fn gcn_stack<T: Scalar>(
    h0: &FeatureMatrix<T>,
    a_norm: &NormalizedGraph<T>,
    model: &SimGnnModel<T>,
) -> Result<FeatureMatrix<T>> {
    let mut trace = gcn_stack_trace(h0, a_norm, model)?;
    Ok(trace.pop().expect("non-empty"))
}

/// Attention weights `a_n = sigmoid(h_n . c)` with
/// `c = tanh(att * (sum_n h_n) / |V|)`.
pub fn attention_weights<T: Scalar>(h: &FeatureMatrix<T>, att: &Matrix<T>) -> Result<Vec<T>> {
    if att.rows() != att.cols() || h.cols() != att.cols() {
        return Err(Error::dims("attention width", att.cols(), h.cols()));
    }
    if h.rows() == 0 {
        return Err(Error::dims("attention node count", 1, 0));
    }
    let mut sum = vec![T::zero(); h.cols()];
    for r in 0..h.rows() {
        for (s, &v) in sum.iter_mut().zip(h.row(r)) {
            *s += v;
        }
    }
    let scale = T::one() / T::of(h.rows() as f64);
    let context: Vec<T> = att
        .mul_vec(&sum)?
        .into_iter()
        .map(|v| (v * scale).tanh())
        .collect();
    Ok((0..h.rows())
        .map(|r| dot(h.row(r), &context).sigmoid())
        .collect())
}

/// Attention pooling `h_G = sum_n a_n h_n`.
pub fn attention_pool<T: Scalar>(h: &FeatureMatrix<T>, att: &Matrix<T>) -> Result<GraphEmbedding<T>> {
    let weights = attention_weights(h, att)?;
    let mut values = vec![T::zero(); h.cols()];
    for (r, &a) in weights.iter().enumerate() {
        for (g, &v) in values.iter_mut().zip(h.row(r)) {
            *g += a * v;
        }
    }
    Ok(GraphEmbedding { values })
}

/// Neural tensor network similarity vector of length `K`.
pub fn ntn<T: Scalar>(
    hg1: &GraphEmbedding<T>,
    hg2: &GraphEmbedding<T>,
    model: &SimGnnModel<T>,
) -> Result<Vec<T>> {
    let f = model.embedding_dim();
    if hg1.len() != f {
        return Err(Error::dims("NTN first embedding", f, hg1.len()));
    }
    if hg2.len() != f {
        return Err(Error::dims("NTN second embedding", f, hg2.len()));
    }
    let concat: Vec<T> = hg1.values.iter().chain(&hg2.values).copied().collect();
    let mut scores = Vec::with_capacity(model.k());
    for (k, slice) in model.ntn_w.iter().enumerate() {
        let bilinear = dot(hg1.as_slice(), &slice.mul_vec(hg2.as_slice())?);
        let linear = dot(model.ntn_v.row(k), &concat);
        scores.push(model.ntn_activation.apply(bilinear + linear + model.ntn_b[k]));
    }
    Ok(scores)
}

/// Affine + ReLU layers, the last one affine + sigmoid.
pub fn fcn<T: Scalar>(s: &[T], model: &SimGnnModel<T>) -> Result<T> {
    let first = model
        .fcn
        .first()
        .ok_or_else(|| Error::InvalidModel("empty FCN".into()))?;
    if s.len() != first.f_in() {
        return Err(Error::dims("FCN input width", first.f_in(), s.len()));
    }
    let last = model.fcn.len() - 1;
    let mut x = s.to_vec();
    for (i, layer) in model.fcn.iter().enumerate() {
        x = affine(&x, layer)?;
        if i < last {
            x.iter_mut().for_each(|v| *v = v.relu());
        }
    }
    if x.len() != 1 {
        return Err(Error::dims("FCN output width", 1, x.len()));
    }
    Ok(x[0].sigmoid())
}

fn affine<T: Scalar>(x: &[T], layer: &Affine<T>) -> Result<Vec<T>> {
    let mut y = layer.weight.vec_mul(x)?;
    for (v, &b) in y.iter_mut().zip(&layer.bias) {
        *v += b;
    }
    Ok(y)
}

/// Node embeddings of a graph through the three GCN layers.
pub fn embed_nodes<T: Scalar>(g: &Graph, model: &SimGnnModel<T>) -> Result<FeatureMatrix<T>> {
    let h0 = one_hot_features(g, model.input_features())?;
    gcn_stack(&h0, &normalize_adjacency(g), model)
}

pub fn graph_embedding<T: Scalar>(g: &Graph, model: &SimGnnModel<T>) -> Result<GraphEmbedding<T>> {
    attention_pool(&embed_nodes(g, model)?, &model.att)
}

/// Similarity score in `(0, 1)` for a pair of graphs.
pub fn simgnn_score<T: Scalar>(g1: &Graph, g2: &Graph, model: &SimGnnModel<T>) -> Result<T> {
    model.validate()?;
    let hg1 = graph_embedding(g1, model)?;
    let hg2 = graph_embedding(g2, model)?;
    fcn(&ntn(&hg1, &hg2, model)?, model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::random_model;

    fn two_node() -> Graph {
        Graph::new(2, vec![0, 1], vec![(0, 1)]).unwrap()
    }

    #[test]
    fn identity_layer_on_single_node() {
        let g = Graph::new(1, vec![1], vec![]).unwrap();
        let h = one_hot_features::<f64>(&g, 3).unwrap();
        let w = Affine::new(Matrix::identity(3), vec![0.0; 3]).unwrap();
        assert_eq!(gcn_layer(&h, &normalize_adjacency(&g), &w).unwrap(), h);
    }

    #[test]
    fn identity_layer_on_two_nodes() {
        let g = two_node();
        let h = Matrix::identity(2);
        let w = Affine::new(Matrix::identity(2), vec![0.0; 2]).unwrap();
        let out = gcn_layer(&h, &normalize_adjacency(&g), &w).unwrap();
        assert_eq!(out.to_rows(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
    }

    #[test]
    fn layer_dimension_errors() {
        let g = two_node();
        let a = normalize_adjacency::<f64>(&g);
        let w = Affine::new(Matrix::identity(3), vec![0.0; 3]).unwrap();
        assert!(gcn_layer(&Matrix::identity(2), &a, &w).is_err());
        assert!(gcn_layer(&Matrix::zeros(3, 3), &a, &w).is_err());
    }

    #[test]
    fn zero_model_stack_is_zero() {
        let m = random_model(1, &[3, 4, 4, 2], 2).unwrap().zeroed();
        let g = Graph::new(3, vec![0, 1, 2], vec![(0, 1), (1, 2)]).unwrap();
        let out = embed_nodes(&g, &m).unwrap();
        assert_eq!(out.count_nonzero(), 0);
    }

    #[test]
    fn attention_zero_weight_single_node() {
        let h = Matrix::from_rows(&[vec![0.2, -1.0, 3.0]]).unwrap();
        let emb = attention_pool(&h, &Matrix::zeros(3, 3)).unwrap();
        assert_eq!(emb.values, vec![0.1, -0.5, 1.5]);
    }

    #[test]
    fn attention_identical_rows_share_weight() {
        let v: Vec<f64> = vec![0.3, 0.7];
        let h = Matrix::from_rows(&[v.clone(), v.clone()]).unwrap();
        let att = Matrix::from_rows(&[vec![0.4, -0.1], vec![0.2, 0.9]]).unwrap();
        let a = attention_weights(&h, &att).unwrap();
        assert_eq!(a[0], a[1]);
        assert!(a[0] > 0.0 && a[0] < 1.0);
        let emb = attention_pool(&h, &att).unwrap();
        for (g, x) in emb.values.iter().zip(&v) {
            assert!((g - 2.0 * a[0] * x).abs() < 1e-15_f64);
        }
    }

    #[test]
    fn attention_rejects_empty_and_mismatch() {
        assert!(attention_pool(&Matrix::<f64>::zeros(0, 2), &Matrix::zeros(2, 2)).is_err());
        assert!(attention_pool(&Matrix::<f64>::zeros(1, 3), &Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn zero_ntn_and_fcn_give_half() {
        let m = random_model(2, &[3, 3, 3, 4], 5).unwrap().zeroed();
        let e = GraphEmbedding { values: vec![1.0; 4] };
        let s = ntn(&e, &e, &m).unwrap();
        assert_eq!(s, vec![0.5; 5]);
        let zero_in = vec![0.0; 5];
        assert_eq!(fcn(&zero_in, &m).unwrap(), 0.5);
    }

    #[test]
    fn ntn_scalar_case() {
        let mut m = random_model(2, &[1, 1, 1, 1], 1).unwrap();
        let (w, p, q, beta, x, y) = (0.3, -0.2, 0.5, 0.1, 1.5, -2.0);
        m.ntn_w = vec![Matrix::from_rows(&[vec![w]]).unwrap()];
        m.ntn_v = Matrix::from_rows(&[vec![p, q]]).unwrap();
        m.ntn_b = vec![beta];
        let s = ntn(
            &GraphEmbedding { values: vec![x] },
            &GraphEmbedding { values: vec![y] },
            &m,
        )
        .unwrap();
        let expected = 1.0 / (1.0 + f64::exp(-(w * x * y + p * x + q * y + beta)));
        assert!((s[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn ntn_relu_variant() {
        let mut m = random_model(2, &[1, 1, 1, 1], 1).unwrap();
        m.ntn_activation = crate::model::Activation::Relu;
        m.ntn_w = vec![Matrix::from_rows(&[vec![0.0]]).unwrap()];
        m.ntn_v = Matrix::from_rows(&[vec![0.0, 0.0]]).unwrap();
        m.ntn_b = vec![-1.0];
        let e = GraphEmbedding { values: vec![1.0] };
        assert_eq!(ntn(&e, &e, &m).unwrap(), vec![0.0]);
    }

    #[test]
    fn fcn_single_layer() {
        let mut m = random_model(2, &[1, 1, 1, 1], 1).unwrap();
        m.fcn = vec![Affine::new(Matrix::identity(1), vec![0.0]).unwrap()];
        let y = fcn(&[0.3], &m).unwrap();
        assert!((y - 0.574_442_516_811_659_9).abs() < 1e-12);
        assert!(fcn(&[0.3, 0.1], &m).is_err());
    }

    #[test]
    fn score_in_unit_interval() {
        let m = random_model(9, &[4, 6, 5, 3], 2).unwrap();
        let g = Graph::new(4, vec![0, 1, 2, 3], vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        let s = simgnn_score(&g, &g, &m).unwrap();
        assert!(s > 0.0 && s < 1.0);
    }

    #[test]
    fn score_rejects_large_label() {
        let m = random_model(9, &[2, 3, 3, 3], 2).unwrap();
        let g = Graph::new(1, vec![5], vec![]).unwrap();
        assert!(matches!(
            simgnn_score(&g, &g, &m),
            Err(Error::LabelOutOfRange { .. })
        ));
    }
}
