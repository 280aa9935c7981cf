//! Finite-difference verification of every hand-written gradient.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use slp_core::augment::{init_structure, make_views, InitMethod};
use slp_core::encoder::{Activation, Alignment, AlignmentKind, EncoderKind, Propagator};
use slp_core::eval::classifier_objective;
use slp_core::numerics::finite_diff_check;
use slp_core::ssl::{objective, objective_loss, ObjectiveOptions, TrainConfig, ViewInputs};
use slp_core::{DenseMatrix, RngStream};

use crate::CliError;

pub const GRADCHECK_TOL: f64 = 1e-4;
const N: usize = 12;
const D: usize = 6;
const H: usize = 8;
const EPS: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradcheckCase {
    pub name: String,
    pub max_relative_error: f64,
    pub per_block: Vec<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradcheckSummary {
    pub tolerance: f64,
    pub cases: Vec<GradcheckCase>,
    pub passed: bool,
    pub elapsed_s: f64,
}

fn encoder_variants() -> [(&'static str, EncoderKind, Activation); 3] {
    [
        ("gcn+relu", EncoderKind::Gcn, Activation::Relu),
        ("gcn+identity", EncoderKind::Gcn, Activation::Identity),
        ("sgc", EncoderKind::Sgc, Activation::Identity),
    ]
}

fn contrastive_case(
    seed: u64,
    kind: EncoderKind,
    activation: Activation,
    alignment: AlignmentKind,
    opts: ObjectiveOptions,
    fault: Option<f64>,
) -> Result<(f64, Vec<f64>), CliError> {
    let mut rng = RngStream::new(seed);
    let x = rng.normal_matrix(N, D);
    let a0 = init_structure(&x, InitMethod::SimilarityWiring { k: 3 })?;
    let views = make_views(&a0, 0.2, 0.4)?;
    let props = [Propagator::new(views.view1.clone()), Propagator::new(views.view2.clone())];
    let perm = rng.permutation(N);
    let cfg = TrainConfig {
        hidden: H,
        seed,
        encoder: kind,
        activation,
        alignment,
        squash_summary: opts.squash_summary,
        symmetric_negatives: opts.symmetric_negatives,
        ..TrainConfig::default()
    };
    let mut params = cfg.init_params(D)?;
    // move biases and the alignment map off their trivial initial values
    for e in &mut params.encoders {
        e.bias = Some(rng.uniform_matrix(1, H, -0.2, 0.2));
    }
    if let Alignment::Linear(q) = &mut params.alignment {
        q.axpy(0.3, &rng.normal_matrix(H, H))?;
    }
    let inputs = ViewInputs {
        x: &x,
        views: [&props[0], &props[1]],
        perm: &perm,
    };
    let (_, mut grads) = objective(inputs, &params, opts)?;
    if let Some(f) = fault {
        grads.scale(f);
    }
    let blocks: Vec<DenseMatrix> = params.blocks().into_iter().cloned().collect();
    let analytic: Vec<DenseMatrix> = grads.blocks().into_iter().cloned().collect();
    let rep = finite_diff_check(
        |b| match params.with_blocks(b) {
            Ok(p) => objective_loss(inputs, &p, opts).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        },
        &blocks,
        &analytic,
        EPS,
        &mut rng,
    );
    Ok((rep.max_relative_error, rep.per_block))
}

fn classifier_case(seed: u64, fault: Option<f64>) -> Result<(f64, Vec<f64>), CliError> {
    let mut rng = RngStream::new(seed);
    let px = rng.normal_matrix(N, D);
    let labels: Vec<usize> = (0..N).map(|i| i % 3).collect();
    let train: Vec<usize> = (0..N).filter(|i| i % 4 != 3).collect();
    let w = rng.normal_matrix(D, 3);
    let b = rng.normal_matrix(1, 3);
    let (_, mut dw, mut db) = classifier_objective(&px, &labels, &train, &w, &b)?;
    if let Some(f) = fault {
        dw.scale_in_place(f);
        db.scale_in_place(f);
    }
    let rep = finite_diff_check(
        |p| {
            classifier_objective(&px, &labels, &train, &p[0], &p[1])
                .map(|r| r.0)
                .unwrap_or(f64::NAN)
        },
        &[w, b],
        &[dw, db],
        EPS,
        &mut rng,
    );
    Ok((rep.max_relative_error, rep.per_block))
}

/// Run the whole matrix. `fault` scales every analytic gradient before comparison.
pub fn run_gradcheck(fault: Option<f64>) -> Result<GradcheckSummary, CliError> {
    let start = Instant::now();
    let mut cases = Vec::new();
    let mut push = |name: String, (err, per_block): (f64, Vec<f64>)| {
        cases.push(GradcheckCase {
            name,
            passed: err <= GRADCHECK_TOL,
            max_relative_error: err,
            per_block,
        });
    };
    let variants = [
        ("", ObjectiveOptions::default()),
        (
            "+squash",
            ObjectiveOptions {
                squash_summary: true,
                symmetric_negatives: false,
            },
        ),
        (
            "+symmetric-negatives",
            ObjectiveOptions {
                squash_summary: false,
                symmetric_negatives: true,
            },
        ),
    ];
    let mut seed = 100;
    for (name, kind, act) in encoder_variants() {
        for (align_name, align) in [("identity", AlignmentKind::Identity), ("linear", AlignmentKind::Linear)] {
            for (suffix, opts) in variants {
                seed += 1;
                let label = format!("{name}/align-{align_name}{suffix}");
                push(label, contrastive_case(seed, kind, act, align, opts, fault)?);
            }
        }
    }
    push("classifier-head".into(), classifier_case(7, fault)?);
    let passed = cases.iter().all(|c| c.passed);
    Ok(GradcheckSummary {
        tolerance: GRADCHECK_TOL,
        cases,
        passed,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}
