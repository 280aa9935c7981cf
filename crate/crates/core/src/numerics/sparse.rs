use super::DenseMatrix;
use crate::error::{Error, Result};

/// Compressed sparse row view of a dense matrix.
///
/// Only used to speed up products with mostly-zero propagation or feature
/// matrices; results agree with the dense path to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut indptr = Vec::with_capacity(m.rows() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..m.rows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            rows: m.rows(),
            cols: m.cols(),
            indptr,
            indices,
            values,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn density(&self) -> f64 {
        let total = self.rows * self.cols;
        if total == 0 {
            0.0
        } else {
            self.nnz() as f64 / total as f64
        }
    }

    /// `self * b`, accumulating each output row over ascending column index.
    pub fn matmul_dense(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != b.rows() {
            return Err(Error::dim(
                "csr_matmul",
                format!("{:?} x {:?}", self.shape(), b.shape()),
            ));
        }
        let mut out = DenseMatrix::zeros(self.rows, b.cols());
        for i in 0..self.rows {
            let (start, end) = (self.indptr[i], self.indptr[i + 1]);
            let out_row = out.row_mut(i);
            for idx in start..end {
                let a = self.values[idx];
                for (o, &bv) in out_row.iter_mut().zip(b.row(self.indices[idx])) {
                    *o += a * bv;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ * b`.
    pub fn t_matmul_dense(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != b.rows() {
            return Err(Error::dim(
                "csr_t_matmul",
                format!("{:?}ᵀ x {:?}", self.shape(), b.shape()),
            ));
        }
        let mut out = DenseMatrix::zeros(self.cols, b.cols());
        for i in 0..self.rows {
            let b_row = b.row(i);
            for idx in self.indptr[i]..self.indptr[i + 1] {
                let a = self.values[idx];
                for (o, &bv) in out.row_mut(self.indices[idx]).iter_mut().zip(b_row) {
                    *o += a * bv;
                }
            }
        }
        Ok(out)
    }
}
