//! Structure initialization from attributes and PPR diffusion into two views.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{sym_normalize, Adjacency};
use crate::numerics::{lu_inverse, DenseMatrix, RngStream};

/// How the initial structure is wired from node attributes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitMethod {
    /// Connect every node to its `k` most cosine-similar nodes, union-symmetrized.
    SimilarityWiring { k: usize },
    Empty,
    Full,
    /// Independent Bernoulli(`p`) per unordered pair.
    Random { p: f64, seed: u64 },
}

impl Default for InitMethod {
    fn default() -> Self {
        InitMethod::SimilarityWiring { k: 5 }
    }
}

/// Pairwise cosine similarities; rows with zero norm have similarity 0 to everything.
pub fn cosine_similarity_matrix(x: &DenseMatrix) -> DenseMatrix {
    let norms = x.row_norms();
    let mut unit = x.clone();
    for (i, &nrm) in norms.iter().enumerate() {
        let inv = if nrm > 0.0 { 1.0 / nrm } else { 0.0 };
        unit.row_mut(i).iter_mut().for_each(|v| *v *= inv);
    }
    unit.matmul_t(&unit).expect("square by construction")
}

pub fn init_structure(x: &DenseMatrix, method: InitMethod) -> Result<Adjacency> {
    let n = x.rows();
    match method {
        InitMethod::Empty => Ok(Adjacency::empty(n)),
        InitMethod::Full => {
            let m = DenseMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 });
            Adjacency::new(m)
        }
        InitMethod::Random { p, seed } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("random wiring p = {p} outside [0, 1]")));
            }
            let mut rng = RngStream::new(seed);
            let mut m = DenseMatrix::zeros(n, n);
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.bernoulli(p) {
                        m.set(u, v, 1.0);
                        m.set(v, u, 1.0);
                    }
                }
            }
            Adjacency::new(m)
        }
        InitMethod::SimilarityWiring { k } => similarity_wiring(x, k),
    }
}

fn similarity_wiring(x: &DenseMatrix, k: usize) -> Result<Adjacency> {
    let n = x.rows();
    if k >= n {
        return Err(Error::Parameter(format!(
            "similarity wiring needs k < n (k = {k}, n = {n})"
        )));
    }
    let sim = cosine_similarity_matrix(x);
    let mut m = DenseMatrix::zeros(n, n);
    let mut candidates: Vec<usize> = Vec::with_capacity(n);
    for u in 0..n {
        candidates.clear();
        candidates.extend((0..n).filter(|&v| v != u));
        let row = sim.row(u);
        // highest similarity first, lower index on ties
        let by_rank = |a: &usize, b: &usize| row[*b].total_cmp(&row[*a]).then(a.cmp(b));
        if k < candidates.len() {
            candidates.select_nth_unstable_by(k, by_rank);
        }
        for &v in &candidates[..k] {
            m.set(u, v, 1.0);
            m.set(v, u, 1.0);
        }
    }
    Adjacency::new(m)
}

/// Density of the similarity-wired structure; the default `p` for random wiring.
pub fn knn_density(x: &DenseMatrix, k: usize) -> Result<f64> {
    Ok(similarity_wiring(x, k)?.density())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiffusionMode {
    /// `α (I - (1-α) T)⁻¹` by LU inversion.
    ClosedForm,
    /// `α Σ_{k=0..terms} (1-α)^k T^k`.
    Series { terms: usize },
}

#[derive(Clone, Debug)]
pub struct PprDiffusion {
    pub matrix: DenseMatrix,
    /// Upper bound `(1-α)^{K+1} / α` on the neglected tail (series mode only).
    pub truncation_bound: Option<f64>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "teleportation probability {alpha} outside (0, 1]"
        )))
    }
}

/// Personalized-PageRank diffusion of the symmetrically normalized structure
/// (no self-loops added). The result is symmetrized as `(S + Sᵀ) / 2` to
/// remove rounding asymmetry from the inversion.
pub fn ppr_diffuse(a0: &Adjacency, alpha: f64, mode: DiffusionMode) -> Result<PprDiffusion> {
    check_alpha(alpha)?;
    let n = a0.n();
    let t = sym_normalize(a0, false);
    let (mut s, bound) = match mode {
        DiffusionMode::ClosedForm => {
            let mut m = t.scale(-(1.0 - alpha));
            for i in 0..n {
                m.set(i, i, m.get(i, i) + 1.0);
            }
            let mut inv = lu_inverse(&m)?;
            inv.scale_in_place(alpha);
            (inv, None)
        }
        DiffusionMode::Series { terms } => {
            let decay = 1.0 - alpha;
            let mut term = DenseMatrix::identity(n);
            let mut sum = DenseMatrix::identity(n);
            for _ in 0..terms {
                term = t.matmul(&term)?;
                term.scale_in_place(decay);
                sum.add_assign(&term)?;
            }
            sum.scale_in_place(alpha);
            (sum, Some(decay.powi(terms as i32 + 1) / alpha))
        }
    };
    symmetrize_in_place(&mut s);
    Ok(PprDiffusion {
        matrix: s,
        truncation_bound: bound,
    })
}

fn symmetrize_in_place(m: &mut DenseMatrix) {
    let n = m.rows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, avg);
            m.set(j, i, avg);
        }
    }
}

/// Keep the `k` largest entries of each row plus the diagonal, then
/// re-symmetrize with `max(t, tᵀ)`. Ties at the cutoff keep the lower column.
pub fn sparsify_topk(t: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    if k == 0 {
        return Err(Error::Parameter("sparsify_topk needs k >= 1".into()));
    }
    if !t.is_square() {
        return Err(Error::dim("sparsify_topk", format!("non-square {:?}", t.shape())));
    }
    let n = t.rows();
    if k >= n {
        return Ok(t.clone());
    }
    let mut kept = DenseMatrix::zeros(n, n);
    let mut idx: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        let row = t.row(i);
        idx.clear();
        idx.extend(0..n);
        idx.select_nth_unstable_by(k, |a, b| row[*b].total_cmp(&row[*a]).then(a.cmp(b)));
        for &j in &idx[..k] {
            kept.set(i, j, row[j]);
        }
        kept.set(i, i, row[i]);
    }
    Ok(DenseMatrix::from_fn(n, n, |i, j| kept.get(i, j).max(kept.get(j, i))))
}

/// Sym-normalize a weighted, nonnegative diffusion matrix by its row sums.
pub fn renormalize(s: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(sym_normalize(&Adjacency::new(s.clone())?, false))
}

pub const DEFAULT_ALPHAS: (f64, f64) = (0.2, 0.4);
/// Above this many nodes the views are sparsified by default.
pub const DENSE_NODE_LIMIT: usize = 5_000;
pub const DEFAULT_SPARSIFY_K: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewOptions {
    pub mode: DiffusionMode,
    pub renormalize: bool,
    pub sparsify_top_k: Option<usize>,
}

impl ViewOptions {
    /// Closed form, no re-normalization, sparsified only past [`DENSE_NODE_LIMIT`].
    pub fn for_size(n: usize) -> Self {
        Self {
            mode: DiffusionMode::ClosedForm,
            renormalize: false,
            sparsify_top_k: (n > DENSE_NODE_LIMIT).then_some(DEFAULT_SPARSIFY_K),
        }
    }
}

/// Two diffusions of the same initialized structure.
#[derive(Clone, Debug)]
pub struct ViewPair {
    pub view1: DenseMatrix,
    pub view2: DenseMatrix,
    pub alphas: (f64, f64),
}

impl ViewPair {
    pub fn n(&self) -> usize {
        self.view1.rows()
    }

    /// The same views with their labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            view1: self.view2.clone(),
            view2: self.view1.clone(),
            alphas: (self.alphas.1, self.alphas.0),
        }
    }
}

pub fn make_views(a0: &Adjacency, alpha1: f64, alpha2: f64) -> Result<ViewPair> {
    make_views_with(a0, alpha1, alpha2, &ViewOptions::for_size(a0.n()))
}

pub fn make_views_with(a0: &Adjacency, alpha1: f64, alpha2: f64, opts: &ViewOptions) -> Result<ViewPair> {
    check_alpha(alpha1)?;
    check_alpha(alpha2)?;
    let build = |alpha: f64| -> Result<DenseMatrix> {
        let mut s = ppr_diffuse(a0, alpha, opts.mode)?.matrix;
        if let Some(k) = opts.sparsify_top_k {
            s = sparsify_topk(&s, k)?;
        }
        if opts.renormalize {
            s = renormalize(&s)?;
        }
        Ok(s)
    };
    let view1 = build(alpha1)?;
    let view2 = if alpha2 == alpha1 { view1.clone() } else { build(alpha2)? };
    Ok(ViewPair {
        view1,
        view2,
        alphas: (alpha1, alpha2),
    })
}
