//! Trainable parameters of the graph-similarity network and their JSON file
//! format.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Default layer widths `(f0, f1, f2, F)`.
pub const DEFAULT_DIMS: [usize; 4] = [29, 64, 32, 16];
/// Default number of NTN similarity slices.
pub const DEFAULT_K: usize = 16;
/// Hidden widths of the FCN between `K` and the final scalar.
pub const FCN_HIDDEN: [usize; 2] = [8, 4];

const MODEL_FILE_VERSION: u32 = 1;

/// Affine map `y = x * weight + bias` with `weight` stored `f_in x f_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine<T> {
    pub weight: Matrix<T>,
    pub bias: Vec<T>,
}

/// Weights of one GCN layer; the bias is added after aggregation.
pub type GcnLayerWeights<T> = Affine<T>;

impl<T: Scalar> Affine<T> {
    pub fn new(weight: Matrix<T>, bias: Vec<T>) -> Result<Self> {
        if bias.len() != weight.cols() {
            return Err(Error::dims("bias length", weight.cols(), bias.len()));
        }
        Ok(Self { weight, bias })
    }

    pub fn f_in(&self) -> usize {
        self.weight.rows()
    }

    pub fn f_out(&self) -> usize {
        self.weight.cols()
    }

    pub fn cast<U: Scalar>(&self) -> Affine<U> {
        Affine {
            weight: self.weight.cast(),
            bias: self.bias.iter().map(|b| U::of(b.as_f64())).collect(),
        }
    }
}

/// Activation applied to the NTN output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Sigmoid,
    Relu,
}

impl Activation {
    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Sigmoid => x.sigmoid(),
            Activation::Relu => x.relu(),
        }
    }
}

/// All parameters of the network: three GCN layers, the attention matrix,
/// the NTN tensor/matrix/bias and the FCN stack ending in one output.
#[derive(Debug, Clone, PartialEq)]
pub struct SimGnnModel<T> {
    pub gcn: Vec<GcnLayerWeights<T>>,
    /// `F x F`; the context is `tanh(att * mean(h_n))`.
    pub att: Matrix<T>,
    /// `K` slices, each `F x F`.
    pub ntn_w: Vec<Matrix<T>>,
    /// `K x 2F`.
    pub ntn_v: Matrix<T>,
    pub ntn_b: Vec<T>,
    pub fcn: Vec<Affine<T>>,
    pub ntn_activation: Activation,
}

impl<T: Scalar> SimGnnModel<T> {
    /// `(f0, f1, f2, F)`.
    pub fn dims(&self) -> [usize; 4] {
        [
            self.gcn[0].f_in(),
            self.gcn[0].f_out(),
            self.gcn[1].f_out(),
            self.gcn[2].f_out(),
        ]
    }

    pub fn input_features(&self) -> usize {
        self.gcn[0].f_in()
    }

    pub fn embedding_dim(&self) -> usize {
        self.gcn[2].f_out()
    }

    pub fn k(&self) -> usize {
        self.ntn_w.len()
    }

    /// Checks every shape constraint between consecutive stages.
    pub fn validate(&self) -> Result<()> {
        if self.gcn.len() != 3 {
            return Err(Error::InvalidModel(format!(
                "expected 3 GCN layers, found {}",
                self.gcn.len()
            )));
        }
        for (i, layer) in self.gcn.iter().enumerate() {
            if layer.bias.len() != layer.f_out() {
                return Err(Error::dims("GCN bias length", layer.f_out(), layer.bias.len()));
            }
            if i > 0 && layer.f_in() != self.gcn[i - 1].f_out() {
                return Err(Error::dims("GCN layer input width", self.gcn[i - 1].f_out(), layer.f_in()));
            }
        }
        let f = self.embedding_dim();
        if self.att.shape() != (f, f) {
            return Err(Error::dims("attention matrix size", f, self.att.rows()));
        }
        let k = self.k();
        if k == 0 {
            return Err(Error::InvalidModel("NTN needs at least one slice".into()));
        }
        for slice in &self.ntn_w {
            if slice.shape() != (f, f) {
                return Err(Error::dims("NTN slice size", f, slice.rows()));
            }
        }
        if self.ntn_v.shape() != (k, 2 * f) {
            return Err(Error::dims("NTN V width", 2 * f, self.ntn_v.cols()));
        }
        if self.ntn_b.len() != k {
            return Err(Error::dims("NTN bias length", k, self.ntn_b.len()));
        }
        let mut width = k;
        for layer in &self.fcn {
            if layer.f_in() != width {
                return Err(Error::dims("FCN layer input width", width, layer.f_in()));
            }
            if layer.bias.len() != layer.f_out() {
                return Err(Error::dims("FCN bias length", layer.f_out(), layer.bias.len()));
            }
            width = layer.f_out();
        }
        if self.fcn.is_empty() || width != 1 {
            return Err(Error::InvalidModel("FCN must end in a single output".into()));
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> SimGnnModel<U> {
        SimGnnModel {
            gcn: self.gcn.iter().map(Affine::cast).collect(),
            att: self.att.cast(),
            ntn_w: self.ntn_w.iter().map(Matrix::cast).collect(),
            ntn_v: self.ntn_v.cast(),
            ntn_b: self.ntn_b.iter().map(|b| U::of(b.as_f64())).collect(),
            fcn: self.fcn.iter().map(Affine::cast).collect(),
            ntn_activation: self.ntn_activation,
        }
    }

    /// Same shapes, every parameter zero.
    pub fn zeroed(&self) -> SimGnnModel<T> {
        let z = |m: &Matrix<T>| Matrix::zeros(m.rows(), m.cols());
        let za = |a: &Affine<T>| Affine {
            weight: z(&a.weight),
            bias: vec![T::zero(); a.bias.len()],
        };
        SimGnnModel {
            gcn: self.gcn.iter().map(za).collect(),
            att: z(&self.att),
            ntn_w: self.ntn_w.iter().map(z).collect(),
            ntn_v: z(&self.ntn_v),
            ntn_b: vec![T::zero(); self.ntn_b.len()],
            fcn: self.fcn.iter().map(za).collect(),
            ntn_activation: self.ntn_activation,
        }
    }
}

/// Deterministic `uniform(-0.5, 0.5)` model with FCN `K -> 8 -> 4 -> 1`.
pub fn random_model(seed: u64, dims: &[usize], k: usize) -> Result<SimGnnModel<f64>> {
    if dims.len() != 4 || dims.contains(&0) {
        return Err(Error::InvalidModel(format!(
            "dims must be four positive widths (f0, f1, f2, F), got {dims:?}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidModel("k must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix = |rows: usize, cols: usize| {
        let data = (0..rows * cols).map(|_| rng.random_range(-0.5..0.5)).collect();
        Matrix::from_vec(rows, cols, data).expect("sized buffer")
    };
    let mut affine = |f_in: usize, f_out: usize| {
        let weight = matrix(f_in, f_out);
        let bias = matrix(1, f_out).as_slice().to_vec();
        Affine { weight, bias }
    };

    let gcn = (0..3).map(|l| affine(dims[l], dims[l + 1])).collect();
    let f = dims[3];
    let att = affine(f, f).weight;
    let ntn_w = (0..k).map(|_| affine(f, f).weight).collect();
    let ntn_v = affine(k, 2 * f).weight;
    let ntn_b = affine(1, k).bias;
    let mut fcn = Vec::new();
    let mut width = k;
    for out in FCN_HIDDEN.into_iter().chain([1]) {
        fcn.push(affine(width, out));
        width = out;
    }
    let model = SimGnnModel {
        gcn,
        att,
        ntn_w,
        ntn_v,
        ntn_b,
        fcn,
        ntn_activation: Activation::Sigmoid,
    };
    model.validate()?;
    Ok(model)
}

#[derive(Serialize, Deserialize)]
struct AffineFile {
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    dims: Vec<usize>,
    k: usize,
    gcn: Vec<AffineFile>,
    att: Vec<Vec<f64>>,
    ntn_w: Vec<Vec<Vec<f64>>>,
    ntn_v: Vec<Vec<f64>>,
    ntn_b: Vec<f64>,
    fcn: Vec<AffineFile>,
    #[serde(default)]
    ntn_activation: Activation,
}

impl From<&Affine<f64>> for AffineFile {
    fn from(a: &Affine<f64>) -> Self {
        AffineFile {
            w: a.weight.to_rows(),
            b: a.bias.clone(),
        }
    }
}

impl TryFrom<AffineFile> for Affine<f64> {
    type Error = Error;

    fn try_from(f: AffineFile) -> Result<Self> {
        Affine::new(Matrix::from_rows(&f.w)?, f.b)
    }
}

impl SimGnnModel<f64> {
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            version: MODEL_FILE_VERSION,
            dims: self.dims().to_vec(),
            k: self.k(),
            gcn: self.gcn.iter().map(AffineFile::from).collect(),
            att: self.att.to_rows(),
            ntn_w: self.ntn_w.iter().map(Matrix::to_rows).collect(),
            ntn_v: self.ntn_v.to_rows(),
            ntn_b: self.ntn_b.clone(),
            fcn: self.fcn.iter().map(AffineFile::from).collect(),
            ntn_activation: self.ntn_activation,
        };
        serde_json::to_string(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.version != MODEL_FILE_VERSION {
            return Err(Error::InvalidModel(format!(
                "unsupported model file version {}",
                file.version
            )));
        }
        let model = SimGnnModel {
            gcn: file
                .gcn
                .into_iter()
                .map(Affine::try_from)
                .collect::<Result<_>>()?,
            att: Matrix::from_rows(&file.att)?,
            ntn_w: file
                .ntn_w
                .iter()
                .map(|s| Matrix::from_rows(s))
                .collect::<Result<_>>()?,
            ntn_v: Matrix::from_rows(&file.ntn_v)?,
            ntn_b: file.ntn_b,
            fcn: file
                .fcn
                .into_iter()
                .map(Affine::try_from)
                .collect::<Result<_>>()?,
            ntn_activation: file.ntn_activation,
        };
        model.validate()?;
        if model.dims().as_slice() != file.dims.as_slice() || model.k() != file.k {
            return Err(Error::InvalidModel(format!(
                "header dims {:?}/k={} disagree with stored tensors {:?}/k={}",
                file.dims,
                file.k,
                model.dims(),
                model.k()
            )));
        }
        Ok(model)
    }
}

pub fn save_model(model: &SimGnnModel<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model.to_json()).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SimGnnModel<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SimGnnModel::from_json(&text)
}
