//! Numerical attention.
//!
//! Two execution paths over the same semantics:
//!
//! - [`dense_masked_attention`]: the oracle. For each query row it computes
//!   every scaled dot product, drops masked keys (equivalent to a -inf
//!   logit), and normalizes over the allowed set. O(N^2 d) work, O(N)
//!   scratch.
//! - [`grouped_block_attention`]: the block-sparse path. Inputs are in
//!   group-major layout; each query group streams over its attendable key
//!   groups in ascending index order, maintaining per-row running max,
//!   normalizer, and weighted sum (online softmax). Never materializes an
//!   N x N matrix.
//!
//! Scalars are stored as `S` (f32 by default) and accumulated in f64: dot
//! products, exponentials, normalizers, and value sums all run in f64, which
//! keeps the two paths within 1e-5 of each other at head_dim 64. Block order
//! is fixed, so outputs are bit-identical run to run; the parallel mode only
//! distributes independent query groups and produces the same bits.

use crate::error::{Error, Result};
use crate::maskplan::{AttentionPlan, TokenMask};
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use rayon::prelude::*;

/// Head dimension and softmax scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttnConfig {
    pub head_dim: usize,
    pub scale: f64,
}

impl AttnConfig {
    /// Standard scaling: 1/sqrt(d).
    pub fn new(head_dim: usize) -> Result<Self> {
        Self::with_scale(head_dim, 1.0 / (head_dim as f64).sqrt())
    }

    pub fn with_scale(head_dim: usize, scale: f64) -> Result<Self> {
        if head_dim == 0 {
            return Err(Error::ShapeMismatch("head_dim must be >= 1".into()));
        }
        if scale <= 0.0 || !scale.is_finite() {
            return Err(Error::ShapeMismatch(format!(
                "scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Self { head_dim, scale })
    }
}

/// How to schedule independent query groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Serial,
    /// Rayon over query groups. Per-row reductions keep their serial order,
    /// so results are bit-identical to [`Parallelism::Serial`].
    Rayon,
}

fn check_qkv<S: Scalar>(
    q: &Tensor<S>,
    k: &Tensor<S>,
    v: Option<&Tensor<S>>,
    cfg: &AttnConfig,
) -> Result<(usize, usize)> {
    let expect_rows = |t: &Tensor<S>, name: &str| -> Result<(usize, usize)> {
        if t.rank() != 2 {
            return Err(Error::ShapeMismatch(format!(
                "{name} must be rank 2 [N, d], got shape {:?}",
                t.shape()
            )));
        }
        Ok((t.shape()[0], t.shape()[1]))
    };
    let (n, d) = expect_rows(q, "Q")?;
    if d != cfg.head_dim {
        return Err(Error::ShapeMismatch(format!(
            "Q head dim {d} does not match config head_dim {}",
            cfg.head_dim
        )));
    }
    for (t, name) in [(Some(k), "K"), (v, "V")] {
        if let Some(t) = t {
            let (tn, td) = expect_rows(t, name)?;
            if (tn, td) != (n, d) {
                return Err(Error::ShapeMismatch(format!(
                    "{name} shape {:?} does not match Q shape {:?}",
                    t.shape(),
                    q.shape()
                )));
            }
        }
    }
    if !q.all_finite() {
        return Err(Error::NonFiniteInput("Q"));
    }
    if !k.all_finite() {
        return Err(Error::NonFiniteInput("K"));
    }
    if let Some(v) = v {
        if !v.all_finite() {
            return Err(Error::NonFiniteInput("V"));
        }
    }
    Ok((n, d))
}

#[inline]
fn dot_f64<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x.into_f64() * y.into_f64())
        .sum()
}

/// Masked softmax attention, computed densely. The reference semantics for
/// every sparse path.
pub fn dense_masked_attention<S: Scalar>(
    q: &Tensor<S>,
    k: &Tensor<S>,
    v: &Tensor<S>,
    mask: &TokenMask,
    cfg: &AttnConfig,
) -> Result<Tensor<S>> {
    let (n, d) = check_qkv(q, k, Some(v), cfg)?;
    if mask.grid().token_count() != n {
        return Err(Error::ShapeMismatch(format!(
            "mask grid has {} tokens, tensors have {n} rows",
            mask.grid().token_count()
        )));
    }
    let mut out = vec![S::zero(); n * d];
    let mut allowed = vec![false; n];
    let mut logits = vec![0.0f64; n];
    let mut acc = vec![0.0f64; d];
    for qi in 0..n {
        allowed.fill(false);
        mask.fill_row(qi, &mut allowed);
        let qrow = q.row(qi);
        let mut row_max = f64::NEG_INFINITY;
        for ki in 0..n {
            // dense cost model: every dot product is computed, the mask only
            // gates inclusion
            let logit = cfg.scale * dot_f64(qrow, k.row(ki));
            logits[ki] = logit;
            if allowed[ki] && logit > row_max {
                row_max = logit;
            }
        }
        if row_max == f64::NEG_INFINITY {
            return Err(Error::FullyMaskedRow(qi));
        }
        acc.fill(0.0);
        let mut denom = 0.0f64;
        for ki in 0..n {
            if !allowed[ki] {
                continue;
            }
            let w = (logits[ki] - row_max).exp();
            denom += w;
            let vrow = v.row(ki);
            for (a, &x) in acc.iter_mut().zip(vrow) {
                *a += w * x.into_f64();
            }
        }
        let orow = &mut out[qi * d..(qi + 1) * d];
        for (o, &a) in orow.iter_mut().zip(&acc) {
            *o = S::from_f64(a / denom);
        }
    }
    Tensor::from_vec(vec![n, d], out)
}

/// Full post-softmax weight matrix, zeros at masked entries. Each row sums
/// to 1 up to rounding.
pub fn attention_weights<S: Scalar>(
    q: &Tensor<S>,
    k: &Tensor<S>,
    mask: &TokenMask,
    cfg: &AttnConfig,
) -> Result<Tensor<S>> {
    let (n, _) = check_qkv(q, k, None, cfg)?;
    if mask.grid().token_count() != n {
        return Err(Error::ShapeMismatch(format!(
            "mask grid has {} tokens, tensors have {n} rows",
            mask.grid().token_count()
        )));
    }
    let mut out = vec![S::zero(); n * n];
    let mut allowed = vec![false; n];
    let mut logits = vec![0.0f64; n];
    for qi in 0..n {
        allowed.fill(false);
        mask.fill_row(qi, &mut allowed);
        let qrow = q.row(qi);
        let mut row_max = f64::NEG_INFINITY;
        for ki in 0..n {
            let logit = cfg.scale * dot_f64(qrow, k.row(ki));
            logits[ki] = logit;
            if allowed[ki] && logit > row_max {
                row_max = logit;
            }
        }
        if row_max == f64::NEG_INFINITY {
            return Err(Error::FullyMaskedRow(qi));
        }
        let mut denom = 0.0f64;
        for ki in 0..n {
            if allowed[ki] {
                denom += (logits[ki] - row_max).exp();
            }
        }
        let orow = &mut out[qi * n..(qi + 1) * n];
        for ki in 0..n {
            if allowed[ki] {
                orow[ki] = S::from_f64((logits[ki] - row_max).exp() / denom);
            }
        }
    }
    Tensor::from_vec(vec![n, n], out)
}

/// Grouped block-sparse attention over a plan. Inputs must already be in
/// group-major layout (see [`crate::grid::relayout_group_major`]); the
/// output is in the same layout.
pub fn grouped_block_attention<S: Scalar>(
    q: &Tensor<S>,
    k: &Tensor<S>,
    v: &Tensor<S>,
    plan: &AttentionPlan,
    cfg: &AttnConfig,
) -> Result<Tensor<S>> {
    Ok(grouped_block_attention_counted(q, k, v, plan, cfg, Parallelism::Serial)?.0)
}

/// As [`grouped_block_attention`], returning the exact number of
/// (query, key) pairs touched and taking a scheduling mode.
pub fn grouped_block_attention_counted<S: Scalar>(
    q: &Tensor<S>,
    k: &Tensor<S>,
    v: &Tensor<S>,
    plan: &AttentionPlan,
    cfg: &AttnConfig,
    par: Parallelism,
) -> Result<(Tensor<S>, u64)> {
    let (n, d) = check_qkv(q, k, Some(v), cfg)?;
    let p_total = plan.gg.total_groups();
    if plan.gg.grid().token_count() != n {
        return Err(Error::PlanGridMismatch(format!(
            "plan grid has {} tokens, tensors have {n} rows",
            plan.gg.grid().token_count()
        )));
    }
    if plan.entries.len() != p_total {
        return Err(Error::PlanGridMismatch(format!(
            "plan has {} entries for {p_total} groups",
            plan.entries.len()
        )));
    }
    for entry in &plan.entries {
        if !entry.windows(2).all(|w| w[0] < w[1]) || entry.last().is_some_and(|&m| m >= p_total) {
            return Err(Error::PlanGridMismatch(
                "plan entries must be strictly ascending and in range".into(),
            ));
        }
    }

    let g = plan.gg.group_token_count();
    let mut out = vec![S::zero(); n * d];
    let pairs = match par {
        Parallelism::Serial => {
            let mut total = 0u64;
            for (qg, chunk) in out.chunks_mut(g * d).enumerate() {
                total += process_query_group(qg, q, k, v, plan, cfg, g, d, chunk)?;
            }
            total
        }
        Parallelism::Rayon => out
            .par_chunks_mut(g * d)
            .enumerate()
            .map(|(qg, chunk)| process_query_group(qg, q, k, v, plan, cfg, g, d, chunk))
            .try_reduce(|| 0u64, |a, b| Ok(a + b))?,
    };
    Ok((Tensor::from_vec(vec![n, d], out)?, pairs))
}

/// Online softmax over the attendable key groups of one query group,
/// writing the finished rows into `out_chunk` (length g * d).
///
/// Scratch stays O(g + d) per row: one score strip per (query row, key
/// block), never a full tile.
#[allow(clippy::too_many_arguments)]
fn process_query_group<S: Scalar>(
    qg: usize,
    q: &Tensor<S>,
    k: &Tensor<S>,
    v: &Tensor<S>,
    plan: &AttentionPlan,
    cfg: &AttnConfig,
    g: usize,
    d: usize,
    out_chunk: &mut [S],
) -> Result<u64> {
    let mut scores = vec![0.0f64; g];
    let mut acc = vec![0.0f64; d];
    let q_base = qg * g;

    for i in 0..g {
        let qrow = q.row(q_base + i);
        let mut row_max = f64::NEG_INFINITY;
        let mut denom = 0.0f64;
        acc.fill(0.0);
        for &kg in &plan.entries[qg] {
            let k_base = kg * g;
            let mut block_max = f64::NEG_INFINITY;
            for (j, s) in scores.iter_mut().enumerate() {
                *s = cfg.scale * dot_f64(qrow, k.row(k_base + j));
                if *s > block_max {
                    block_max = *s;
                }
            }
            if block_max > row_max {
                // rescale previous contributions to the new max
                let factor = if row_max == f64::NEG_INFINITY {
                    0.0
                } else {
                    (row_max - block_max).exp()
                };
                denom *= factor;
                for a in &mut acc {
                    *a *= factor;
                }
                row_max = block_max;
            }
            for (j, &s) in scores.iter().enumerate() {
                let w = (s - row_max).exp();
                denom += w;
                let vrow = v.row(k_base + j);
                for (a, &x) in acc.iter_mut().zip(vrow) {
                    *a += w * x.into_f64();
                }
            }
        }
        if denom <= 0.0 {
            return Err(Error::FullyMaskedRow(q_base + i));
        }
        let orow = &mut out_chunk[i * d..(i + 1) * d];
        for (o, &a) in orow.iter_mut().zip(&acc) {
            *o = S::from_f64(a / denom);
        }
    }
    Ok((plan.entries[qg].len() * g * g) as u64)
}
