//! The contrastive objective and its exact gradients.
//!
//! For views `k ∈ {0, 1}` with propagation `P_k`, encoder `(W_k, b_k)`,
//! alignment `Q` and row permutation `π`:
//!
//! ```text
//! Z_k  = P_k X W_k + b_k        H_k  = act(Z_k) Q        g_k = mean(H_k)
//! Ž_k  = P_k π(X) W_k + b_k     Ȟ_k  = act(Ž_k) Q
//! L    = T(g_0, H_1, Ȟ_1) + T(g_1, H_0, Ȟ_0)
//! T(g, H, Ȟ) = -1/(2n) Σ_i [ log σ(H_i Φ g) + log(1 - σ(Ȟ_i Φ g)) ]
//! ```
//!
//! The backward pass is written out by hand; every block is covered by the
//! finite-difference tests at the bottom of this file.

use crate::encoder::{Alignment, AlignmentKind, EncoderParams, Propagator};
use crate::error::{Error, Result};
use crate::numerics::{log_logistic, logistic, DenseMatrix};

use super::Discriminator;

/// All learnable parameters of the contrastive model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub encoders: [EncoderParams; 2],
    pub discriminator: Discriminator,
    pub alignment: Alignment,
}

/// Gradients, shaped like [`ModelParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct ModelGrads {
    pub weights: [DenseMatrix; 2],
    pub biases: [Option<DenseMatrix>; 2],
    pub phi: DenseMatrix,
    pub alignment: Option<DenseMatrix>,
}

impl ModelParams {
    pub fn hidden(&self) -> usize {
        self.encoders[0].hidden()
    }

    /// Parameter blocks in canonical order: `W₀, [b₀], W₁, [b₁], Φ, [Q]`.
    pub fn blocks(&self) -> Vec<&DenseMatrix> {
        let mut out = Vec::with_capacity(6);
        for e in &self.encoders {
            out.push(&e.weight);
            if let Some(b) = &e.bias {
                out.push(b);
            }
        }
        out.push(&self.discriminator.phi);
        if let Alignment::Linear(q) = &self.alignment {
            out.push(q);
        }
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut DenseMatrix> {
        let mut out = Vec::with_capacity(6);
        for e in &mut self.encoders {
            out.push(&mut e.weight);
            if let Some(b) = &mut e.bias {
                out.push(b);
            }
        }
        out.push(&mut self.discriminator.phi);
        if let Alignment::Linear(q) = &mut self.alignment {
            out.push(q);
        }
        out
    }

    /// Copy of `self` with its blocks replaced (same order as [`blocks`](Self::blocks)).
    pub fn with_blocks(&self, blocks: &[DenseMatrix]) -> Result<Self> {
        let mut out = self.clone();
        {
            let mut targets = out.blocks_mut();
            if targets.len() != blocks.len() {
                return Err(Error::dim(
                    "ModelParams::with_blocks",
                    format!("{} blocks for {} parameters", blocks.len(), targets.len()),
                ));
            }
            for (t, b) in targets.iter_mut().zip(blocks) {
                if t.shape() != b.shape() {
                    return Err(Error::dim(
                        "ModelParams::with_blocks",
                        format!("{:?} vs {:?}", t.shape(), b.shape()),
                    ));
                }
                **t = b.clone();
            }
        }
        Ok(out)
    }

    /// The two encoders exchanged; pairs with [`crate::augment::ViewPair::swapped`].
    pub fn swapped(&self) -> Self {
        let mut out = self.clone();
        out.encoders.swap(0, 1);
        out
    }

    pub fn alignment_kind(&self) -> AlignmentKind {
        self.alignment.kind()
    }

    pub fn all_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.all_finite())
    }
}

impl ModelGrads {
    /// Same order as [`ModelParams::blocks`].
    pub fn blocks(&self) -> Vec<&DenseMatrix> {
        let mut out = Vec::with_capacity(6);
        for k in 0..2 {
            out.push(&self.weights[k]);
            if let Some(b) = &self.biases[k] {
                out.push(b);
            }
        }
        out.push(&self.phi);
        if let Some(q) = &self.alignment {
            out.push(q);
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for k in 0..2 {
            self.weights[k].scale_in_place(s);
            if let Some(b) = &mut self.biases[k] {
                b.scale_in_place(s);
            }
        }
        self.phi.scale_in_place(s);
        if let Some(q) = &mut self.alignment {
            q.scale_in_place(s);
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ObjectiveOptions {
    /// Pass pooled summaries through the logistic function.
    pub squash_summary: bool,
    /// Also score clean nodes against the corrupted summary as negatives
    /// (each negative family weighted ½).
    pub symmetric_negatives: bool,
}

/// Features, both propagation operators and the corruption permutation for one step.
#[derive(Clone, Copy, Debug)]
pub struct ViewInputs<'a> {
    pub x: &'a DenseMatrix,
    pub views: [&'a Propagator; 2],
    pub perm: &'a [usize],
}

struct ViewForward {
    z: DenseMatrix,
    zc: DenseMatrix,
    act: DenseMatrix,
    act_c: DenseMatrix,
    h: DenseMatrix,
    hc: DenseMatrix,
    /// pooled mean before squashing
    mean: Vec<f64>,
    summary: Vec<f64>,
    mean_c: Vec<f64>,
    summary_c: Vec<f64>,
}

fn forward_view(
    x: &DenseMatrix,
    p: &Propagator,
    perm: &[usize],
    enc: &EncoderParams,
    alignment: &Alignment,
    opts: ObjectiveOptions,
) -> Result<ViewForward> {
    let xw = x.matmul(&enc.weight)?;
    let z = crate::encoder::pre_activation(&xw, p, enc)?;
    let zc = crate::encoder::pre_activation(&xw.gather_rows(perm)?, p, enc)?;
    let f = enc.effective_activation();
    let act = z.map(|v| f.apply(v));
    let act_c = zc.map(|v| f.apply(v));
    let h = crate::encoder::align(&act, alignment)?;
    let hc = crate::encoder::align(&act_c, alignment)?;
    let mean = crate::encoder::pool_mean(&h, false)?;
    let mean_c = crate::encoder::pool_mean(&hc, false)?;
    let squash = |m: &[f64]| -> Vec<f64> {
        if opts.squash_summary {
            m.iter().map(|&v| logistic(v)).collect()
        } else {
            m.to_vec()
        }
    };
    Ok(ViewForward {
        summary: squash(&mean),
        summary_c: squash(&mean_c),
        z,
        zc,
        act,
        act_c,
        h,
        hc,
        mean,
        mean_c,
    })
}

/// One cross-scale term and its partial derivatives.
struct TermGrads {
    loss: f64,
    d_pos: DenseMatrix,
    d_neg: DenseMatrix,
    d_summary: Vec<f64>,
    d_summary_c: Option<Vec<f64>>,
    d_phi: DenseMatrix,
}

fn outer(col: &[f64], row: &[f64]) -> DenseMatrix {
    DenseMatrix::from_fn(col.len(), row.len(), |i, j| col[i] * row[j])
}

fn cross_term(
    summary: &[f64],
    summary_c: &[f64],
    pos: &DenseMatrix,
    neg: &DenseMatrix,
    phi: &DenseMatrix,
    opts: ObjectiveOptions,
) -> Result<TermGrads> {
    let n = pos.rows() as f64;
    let w = 1.0 / (2.0 * n);
    let neg_w = if opts.symmetric_negatives { 0.5 } else { 1.0 };

    let a = phi.matvec(summary)?;
    let s = pos.matvec(&a)?;
    let t = neg.matvec(&a)?;
    let mut loss = 0.0;
    let mut ds = Vec::with_capacity(s.len());
    let mut dt = Vec::with_capacity(t.len());
    for (&si, &ti) in s.iter().zip(&t) {
        loss -= w * (log_logistic(si) + neg_w * log_logistic(-ti));
        ds.push(-w * (1.0 - logistic(si)));
        dt.push(w * neg_w * logistic(ti));
    }
    let mut d_pos = outer(&ds, &a);
    let d_neg = outer(&dt, &a);
    let mut g_a = pos.t_matvec(&ds)?;
    for (g, v) in g_a.iter_mut().zip(neg.t_matvec(&dt)?) {
        *g += v;
    }
    let mut d_phi = outer(&g_a, summary);
    let d_summary = phi.t_matvec(&g_a)?;

    let mut d_summary_c = None;
    if opts.symmetric_negatives {
        let ac = phi.matvec(summary_c)?;
        let u = pos.matvec(&ac)?;
        let mut du = Vec::with_capacity(u.len());
        for &ui in &u {
            loss -= w * neg_w * log_logistic(-ui);
            du.push(w * neg_w * logistic(ui));
        }
        d_pos.add_assign(&outer(&du, &ac))?;
        let g_ac = pos.t_matvec(&du)?;
        d_phi.add_assign(&outer(&g_ac, summary_c))?;
        d_summary_c = Some(phi.t_matvec(&g_ac)?);
    }
    Ok(TermGrads {
        loss,
        d_pos,
        d_neg,
        d_summary,
        d_summary_c,
        d_phi,
    })
}

/// Gradient of a pooled (optionally squashed) summary spread back over the rows.
fn pool_backward(n: usize, mean: &[f64], d_summary: &[f64], squash: bool) -> DenseMatrix {
    let inv = 1.0 / n as f64;
    let row: Vec<f64> = mean
        .iter()
        .zip(d_summary)
        .map(|(&m, &g)| {
            let local = if squash {
                let s = logistic(m);
                s * (1.0 - s)
            } else {
                1.0
            };
            g * local * inv
        })
        .collect();
    DenseMatrix::from_fn(n, row.len(), |_, j| row[j])
}

/// Loss value only (no gradients), used by finite-difference checks.
pub fn objective_loss(inputs: ViewInputs<'_>, params: &ModelParams, opts: ObjectiveOptions) -> Result<f64> {
    Ok(objective(inputs, params, opts)?.0)
}

/// Loss and exact gradients with respect to every parameter block.
pub fn objective(
    inputs: ViewInputs<'_>,
    params: &ModelParams,
    opts: ObjectiveOptions,
) -> Result<(f64, ModelGrads)> {
    let ViewInputs { x, views, perm } = inputs;
    let n = x.rows();
    if perm.len() != n || views.iter().any(|p| p.n() != n) {
        return Err(Error::dim(
            "objective",
            format!(
                "{n} nodes, permutation of {}, views {:?} / {:?}",
                perm.len(),
                views[0].matrix().shape(),
                views[1].matrix().shape()
            ),
        ));
    }
    let phi = &params.discriminator.phi;
    let fw = [
        forward_view(x, views[0], perm, &params.encoders[0], &params.alignment, opts)?,
        forward_view(x, views[1], perm, &params.encoders[1], &params.alignment, opts)?,
    ];

    // term[k] scores view k's summary against the other view's nodes
    let terms = [
        cross_term(&fw[0].summary, &fw[0].summary_c, &fw[1].h, &fw[1].hc, phi, opts)?,
        cross_term(&fw[1].summary, &fw[1].summary_c, &fw[0].h, &fw[0].hc, phi, opts)?,
    ];
    let loss = terms[0].loss + terms[1].loss;
    if !loss.is_finite() {
        return Err(Error::Numeric(format!("contrastive loss is {loss}")));
    }
    let mut d_phi = terms[0].d_phi.clone();
    d_phi.add_assign(&terms[1].d_phi)?;

    let mut d_align: Option<DenseMatrix> = match &params.alignment {
        Alignment::Linear(q) => Some(DenseMatrix::zeros(q.rows(), q.cols())),
        Alignment::Identity => None,
    };
    let mut weights = Vec::with_capacity(2);
    let mut biases = Vec::with_capacity(2);
    for k in 0..2 {
        let own = &terms[k];
        let other = &terms[1 - k];
        let f = &fw[k];
        // pooled-summary path first, then the direct node path
        let mut d_h = pool_backward(n, &f.mean, &own.d_summary, opts.squash_summary);
        d_h.add_assign(&other.d_pos)?;
        let mut d_hc = other.d_neg.clone();
        if let Some(dsc) = &own.d_summary_c {
            d_hc.add_assign(&pool_backward(n, &f.mean_c, dsc, opts.squash_summary))?;
        }

        let (d_act, d_act_c) = match &params.alignment {
            Alignment::Identity => (d_h, d_hc),
            Alignment::Linear(q) => {
                let dq = d_align.as_mut().expect("allocated for linear alignment");
                dq.add_assign(&f.act.t_matmul(&d_h)?)?;
                dq.add_assign(&f.act_c.t_matmul(&d_hc)?)?;
                (d_h.matmul_t(q)?, d_hc.matmul_t(q)?)
            }
        };
        let enc = &params.encoders[k];
        let act = enc.effective_activation();
        let mut d_z = d_act;
        for (g, &z) in d_z.as_mut_slice().iter_mut().zip(f.z.as_slice()) {
            *g *= act.derivative(z);
        }
        let mut d_zc = d_act_c;
        for (g, &z) in d_zc.as_mut_slice().iter_mut().zip(f.zc.as_slice()) {
            *g *= act.derivative(z);
        }
        biases.push(enc.bias.as_ref().map(|_| {
            let mut s = d_z.col_sums();
            for (a, b) in s.iter_mut().zip(d_zc.col_sums()) {
                *a += b;
            }
            DenseMatrix::row_vector(&s).unwrap_or_else(|_| DenseMatrix::zeros(1, s.len()))
        }));
        let mut d_xw = views[k].apply_t(&d_z)?;
        d_xw.add_assign(&views[k].apply_t(&d_zc)?.scatter_rows(perm)?)?;
        weights.push(x.t_matmul(&d_xw)?);
    }

    let grads = ModelGrads {
        weights: [weights.remove(0), weights.remove(0)],
        biases: [biases.remove(0), biases.remove(0)],
        phi: d_phi,
        alignment: d_align,
    };
    if grads.blocks().iter().any(|b| !b.all_finite()) {
        return Err(Error::Numeric("non-finite gradient".into()));
    }
    Ok((loss, grads))
}
