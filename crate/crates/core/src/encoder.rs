//! Single-layer graph-convolutional encoders, mean pooling and dimension alignment.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{CsrMatrix, DenseMatrix, RngStream};

pub const DEFAULT_HIDDEN: usize = 512;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    /// `act(P X W + b)`
    #[default]
    Gcn,
    /// `P X W + b`, always linear.
    Sgc,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    /// Fixed negative slope in `(0, 1]`.
    Prelu { slope: f64 },
    Identity,
}

impl Activation {
    pub fn validate(&self) -> Result<()> {
        if let Activation::Prelu { slope } = *self {
            if !(slope > 0.0 && slope <= 1.0) {
                return Err(Error::Parameter(format!("prelu slope {slope} outside (0, 1]")));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn apply(&self, z: f64) -> f64 {
        match *self {
            Activation::Relu => z.max(0.0),
            Activation::Prelu { slope } => {
                if z > 0.0 {
                    z
                } else {
                    slope * z
                }
            }
            Activation::Identity => z,
        }
    }

    /// Derivative at `z` (0 is treated as the negative side).
    #[inline]
    pub fn derivative(&self, z: f64) -> f64 {
        match *self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Prelu { slope } => {
                if z > 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Weights of one encoder.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    pub kind: EncoderKind,
    pub activation: Activation,
    /// d × h
    pub weight: DenseMatrix,
    /// 1 × h
    pub bias: Option<DenseMatrix>,
}

impl EncoderParams {
    /// Weights uniform in `±√(6 / (d + h))`, bias zero.
    pub fn init(
        d: usize,
        h: usize,
        kind: EncoderKind,
        activation: Activation,
        bias: bool,
        rng: &mut RngStream,
    ) -> Result<Self> {
        activation.validate()?;
        if d == 0 || h == 0 {
            return Err(Error::Parameter(format!("encoder dimensions d = {d}, h = {h}")));
        }
        let bound = (6.0 / (d + h) as f64).sqrt();
        Ok(Self {
            kind,
            activation,
            weight: rng.uniform_matrix(d, h, -bound, bound),
            bias: bias.then(|| DenseMatrix::zeros(1, h)),
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn hidden(&self) -> usize {
        self.weight.cols()
    }

    /// The nonlinearity actually applied; SGC is linear by definition.
    pub fn effective_activation(&self) -> Activation {
        match self.kind {
            EncoderKind::Gcn => self.activation,
            EncoderKind::Sgc => Activation::Identity,
        }
    }
}

/// Below this fill ratio propagation goes through a CSR view.
const SPARSE_DENSITY: f64 = 0.1;

/// A propagation matrix, optionally backed by a CSR view for sparse operands.
#[derive(Clone, Debug)]
pub struct Propagator {
    dense: DenseMatrix,
    sparse: Option<CsrMatrix>,
}

impl Propagator {
    pub fn new(p: DenseMatrix) -> Self {
        let csr = CsrMatrix::from_dense(&p);
        let sparse = (csr.density() < SPARSE_DENSITY).then_some(csr);
        Self { dense: p, sparse }
    }

    /// Never takes the sparse path; for checking the two agree.
    pub fn dense_only(p: DenseMatrix) -> Self {
        Self { dense: p, sparse: None }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.dense
    }

    pub fn n(&self) -> usize {
        self.dense.rows()
    }

    pub fn is_sparse(&self) -> bool {
        self.sparse.is_some()
    }

    pub fn apply(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        match &self.sparse {
            Some(csr) => csr.matmul_dense(b),
            None => self.dense.matmul(b),
        }
    }

    /// `Pᵀ b`.
    pub fn apply_t(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        match &self.sparse {
            Some(csr) => csr.t_matmul_dense(b),
            None => self.dense.t_matmul(b),
        }
    }
}

fn check_shapes(x: &DenseMatrix, p: &Propagator, params: &EncoderParams) -> Result<()> {
    if x.cols() != params.in_dim() || p.n() != x.rows() || !p.matrix().is_square() {
        return Err(Error::dim(
            "encode_nodes",
            format!(
                "features {:?}, propagation {:?}, weight {:?}",
                x.shape(),
                p.matrix().shape(),
                params.weight.shape()
            ),
        ));
    }
    Ok(())
}

/// Pre-activation `P (X W) + b`.
pub fn pre_activation(xw: &DenseMatrix, p: &Propagator, params: &EncoderParams) -> Result<DenseMatrix> {
    let mut z = p.apply(xw)?;
    if let Some(b) = &params.bias {
        z.add_row_broadcast(b.as_slice())?;
    }
    Ok(z)
}

/// Node representations: `act(P X W + b)` for GCN, `P X W + b` for SGC.
pub fn encode_nodes(x: &DenseMatrix, p: &Propagator, params: &EncoderParams) -> Result<DenseMatrix> {
    check_shapes(x, p, params)?;
    let xw = x.matmul(&params.weight)?;
    let z = pre_activation(&xw, p, params)?;
    let act = params.effective_activation();
    Ok(z.map(|v| act.apply(v)))
}

/// Column means; with `squash` the mean is passed through the logistic function.
pub fn pool_mean(h: &DenseMatrix, squash: bool) -> Result<Vec<f64>> {
    if h.rows() == 0 {
        return Err(Error::Degenerate("cannot pool an empty graph".into()));
    }
    let inv = 1.0 / h.rows() as f64;
    let mut out = h.col_sums();
    for v in &mut out {
        *v *= inv;
        if squash {
            *v = crate::numerics::logistic(*v);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Alignment {
    Identity,
    /// Right-multiplication by a learned h × h matrix.
    Linear(DenseMatrix),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentKind {
    #[default]
    Identity,
    Linear,
}

impl Alignment {
    /// Identity alignment, or a linear map initialized to the identity matrix.
    pub fn init(kind: AlignmentKind, h: usize) -> Self {
        match kind {
            AlignmentKind::Identity => Alignment::Identity,
            AlignmentKind::Linear => Alignment::Linear(DenseMatrix::identity(h)),
        }
    }

    pub fn kind(&self) -> AlignmentKind {
        match self {
            Alignment::Identity => AlignmentKind::Identity,
            Alignment::Linear(_) => AlignmentKind::Linear,
        }
    }
}

pub fn align(h: &DenseMatrix, a: &Alignment) -> Result<DenseMatrix> {
    match a {
        Alignment::Identity => Ok(h.clone()),
        Alignment::Linear(p) => {
            if !p.is_square() || p.rows() != h.cols() {
                return Err(Error::dim(
                    "align",
                    format!("representations {:?}, map {:?}", h.shape(), p.shape()),
                ));
            }
            h.matmul(p)
        }
    }
}

/// Checkpoint magic bytes.
pub const CHECKPOINT_MAGIC: &[u8; 8] = b"3SLPCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Write parameter blocks as a flat little-endian binary:
///
/// ```text
/// magic[8] = "3SLPCKPT"
/// version: u32
/// blocks:  u32
/// blocks × (rows: u64, cols: u64)
/// every block's entries as f64, row-major, in block order
/// ```
pub fn write_checkpoint<W: Write>(mut w: W, blocks: &[&DenseMatrix]) -> std::io::Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(blocks.len() as u32).to_le_bytes())?;
    for b in blocks {
        w.write_all(&(b.rows() as u64).to_le_bytes())?;
        w.write_all(&(b.cols() as u64).to_le_bytes())?;
    }
    for b in blocks {
        for v in b.as_slice() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Vec<DenseMatrix>> {
    let bad = |msg: &str| Error::Parameter(format!("invalid checkpoint: {msg}"));
    let mut read_exact = |buf: &mut [u8]| r.read_exact(buf).map_err(|_| bad("truncated"));
    let mut magic = [0u8; 8];
    read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(bad("wrong magic"));
    }
    let mut u32buf = [0u8; 4];
    read_exact(&mut u32buf)?;
    let version = u32::from_le_bytes(u32buf);
    if version != CHECKPOINT_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    read_exact(&mut u32buf)?;
    let count = u32::from_le_bytes(u32buf) as usize;
    let mut shapes = Vec::with_capacity(count);
    let mut u64buf = [0u8; 8];
    for _ in 0..count {
        read_exact(&mut u64buf)?;
        let rows = u64::from_le_bytes(u64buf) as usize;
        read_exact(&mut u64buf)?;
        let cols = u64::from_le_bytes(u64buf) as usize;
        shapes.push((rows, cols));
    }
    let mut out = Vec::with_capacity(count);
    for (rows, cols) in shapes {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            read_exact(&mut u64buf)?;
            data.push(f64::from_le_bytes(u64buf));
        }
        out.push(DenseMatrix::new(rows, cols, data)?);
    }
    Ok(out)
}
