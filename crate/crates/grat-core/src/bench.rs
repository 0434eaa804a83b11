//! Desk-scale timing harness.
//!
//! Three executors compute the identical masked attention:
//!
//! - `dense`: the oracle; every QK dot product is evaluated, the mask gates
//!   inclusion. Cost is O(N^2 d) regardless of sparsity.
//! - `grouped`: relayout to group-major, block-sparse streaming softmax over
//!   the plan, relayout back. Contiguous key/value blocks.
//! - `scattered`: the same arithmetic at token granularity; each query
//!   walks a precomputed index list of its permitted keys in the original
//!   layout (non-contiguous gathers). Same pair count as `grouped`, so any
//!   timing gap between the two is attributable to memory layout.
//!
//! All executors must agree within 1e-5 before any timing is recorded; a
//! disagreement aborts with `OracleMismatch`. Timings exclude input
//! generation and plan/index-list setup. One warm-up run is discarded.

use crate::attn::{
    dense_masked_attention, grouped_block_attention_counted, AttnConfig, Parallelism,
};
use crate::error::{Error, Result};
use crate::grid::{gather_rows, invert_permutation, relayout_group_major, GridShape};
use crate::maskplan::{plan_to_token_mask, SchemeConfig};
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Dense N x N scratch must stay runnable; keeps the oracle in memory.
pub const MAX_BENCH_TOKENS: usize = 16_384;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutorTiming {
    pub name: String,
    pub median_s: f64,
    pub p10_s: f64,
    pub p90_s: f64,
    /// (query, key) pairs touched per repetition.
    pub pairs: u64,
}

/// Timing comparison of the three executors on one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub scheme: SchemeConfig,
    pub grid: Vec<usize>,
    pub head_dim: usize,
    pub reps: usize,
    pub seed: u64,
    pub parallel: bool,
    pub dense: ExecutorTiming,
    pub grouped: ExecutorTiming,
    pub scattered: ExecutorTiming,
    pub speedup_grouped_vs_dense: f64,
    pub speedup_scattered_vs_dense: f64,
    /// Max abs deviation of each sparse executor from the dense oracle,
    /// measured on the warm-up run.
    pub grouped_max_abs: f64,
    pub scattered_max_abs: f64,
}

impl std::fmt::Display for BenchReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "bench {} grid={} d={} reps={} seed={} parallel={}",
            self.scheme.name(),
            self.grid
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("x"),
            self.head_dim,
            self.reps,
            self.seed,
            self.parallel
        )?;
        writeln!(
            f,
            "{:<10} {:>12} {:>12} {:>12} {:>16} {:>10}",
            "executor", "median (s)", "p10 (s)", "p90 (s)", "pairs", "speedup"
        )?;
        for (t, speedup) in [
            (&self.dense, 1.0),
            (&self.grouped, self.speedup_grouped_vs_dense),
            (&self.scattered, self.speedup_scattered_vs_dense),
        ] {
            writeln!(
                f,
                "{:<10} {:>12.6} {:>12.6} {:>12.6} {:>16} {:>9.2}x",
                t.name, t.median_s, t.p10_s, t.p90_s, t.pairs, speedup
            )?;
        }
        write!(
            f,
            "agreement vs dense: grouped {:.3e}, scattered {:.3e}",
            self.grouped_max_abs, self.scattered_max_abs
        )
    }
}

/// Seeded standard-normal tensor.
pub fn synthetic_tensor(rng: &mut ChaCha8Rng, shape: Vec<usize>) -> Tensor<f32> {
    let len: usize = shape.iter().product();
    let data: Vec<f32> = (0..len).map(|_| StandardNormal.sample(rng)).collect();
    Tensor::from_vec(shape, data).expect("shape/data constructed together")
}

/// Runs the three executors on seeded synthetic Q/K/V and reports median,
/// p10, and p90 wall time per repetition.
pub fn run_bench(
    scheme: &SchemeConfig,
    grid: &GridShape,
    head_dim: usize,
    reps: usize,
    seed: u64,
    par: Parallelism,
) -> Result<BenchReport> {
    if reps < 3 {
        return Err(Error::InvalidReps(reps));
    }
    let n = grid.token_count();
    if n > MAX_BENCH_TOKENS {
        return Err(Error::ShapeMismatch(format!(
            "benchmark capped at {MAX_BENCH_TOKENS} tokens so the dense oracle stays runnable, got {n}"
        )));
    }
    let cfg = AttnConfig::new(head_dim)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = synthetic_tensor(&mut rng, vec![n, head_dim]);
    let k = synthetic_tensor(&mut rng, vec![n, head_dim]);
    let v = synthetic_tensor(&mut rng, vec![n, head_dim]);

    // setup outside the timed region: plan, token mask, gather lists
    let plan = scheme.plan(grid)?;
    let mask = plan_to_token_mask(plan.clone());
    let lists = {
        let mut lists: Vec<Vec<u32>> = Vec::with_capacity(n);
        let mut row = vec![false; n];
        for qi in 0..n {
            row.fill(false);
            mask.fill_row(qi, &mut row);
            lists.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, &a)| a)
                    .map(|(ki, _)| ki as u32)
                    .collect(),
            );
        }
        lists
    };
    let perm = crate::grid::group_major_permutation(&plan.gg);
    let inv_perm = invert_permutation(&perm);

    let run_dense = || -> Result<(Tensor<f32>, u64)> {
        let out = dense_masked_attention(&q, &k, &v, &mask, &cfg)?;
        Ok((out, (n as u64) * (n as u64)))
    };
    let run_grouped = || -> Result<(Tensor<f32>, u64)> {
        // relayout copies are part of the grouped pipeline and are timed
        let (qg, _) = relayout_group_major(&q, &plan.gg)?;
        let (kg, _) = relayout_group_major(&k, &plan.gg)?;
        let (vg, _) = relayout_group_major(&v, &plan.gg)?;
        let (out, pairs) = grouped_block_attention_counted(&qg, &kg, &vg, &plan, &cfg, par)?;
        Ok((gather_rows(&out, &inv_perm)?, pairs))
    };
    let run_scattered = || scattered_attention(&q, &k, &v, &lists, &cfg);

    // warm-up plus executor agreement gate
    let dense_out = run_dense()?.0;
    let (grouped_out, grouped_pairs) = run_grouped()?;
    let (scattered_out, scattered_pairs) = run_scattered()?;
    let grouped_max_abs = grouped_out.max_abs_diff(&dense_out);
    if grouped_max_abs > 1e-5 {
        return Err(Error::OracleMismatch {
            executor: "grouped",
            max_abs: grouped_max_abs,
        });
    }
    let scattered_max_abs = scattered_out.max_abs_diff(&dense_out);
    if scattered_max_abs > 1e-5 {
        return Err(Error::OracleMismatch {
            executor: "scattered",
            max_abs: scattered_max_abs,
        });
    }
    debug_assert_eq!(grouped_pairs, scattered_pairs);

    let mut times = [Vec::new(), Vec::new(), Vec::new()];
    for _ in 0..reps {
        let t0 = Instant::now();
        let _ = run_dense()?;
        times[0].push(t0.elapsed().as_secs_f64());

        let t0 = Instant::now();
        let _ = run_grouped()?;
        times[1].push(t0.elapsed().as_secs_f64());

        let t0 = Instant::now();
        let _ = run_scattered()?;
        times[2].push(t0.elapsed().as_secs_f64());
    }

    let timing = |idx: usize, name: &str, pairs: u64| {
        let mut sorted = times[idx].clone();
        sorted.sort_by(f64::total_cmp);
        ExecutorTiming {
            name: name.to_string(),
            median_s: quantile(&sorted, 0.5),
            p10_s: quantile(&sorted, 0.1),
            p90_s: quantile(&sorted, 0.9),
            pairs,
        }
    };
    let dense = timing(0, "dense", (n as u64) * (n as u64));
    let grouped = timing(1, "grouped", grouped_pairs);
    let scattered = timing(2, "scattered", scattered_pairs);

    Ok(BenchReport {
        scheme: scheme.clone(),
        grid: grid.dims().to_vec(),
        head_dim,
        reps,
        seed,
        parallel: par == Parallelism::Rayon,
        speedup_grouped_vs_dense: dense.median_s / grouped.median_s,
        speedup_scattered_vs_dense: dense.median_s / scattered.median_s,
        dense,
        grouped,
        scattered,
        grouped_max_abs,
        scattered_max_abs,
    })
}

/// Nearest-rank quantile of an ascending slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// Token-granular sparse attention: each query gathers its permitted keys
/// through an index list, streaming softmax per token. Identical arithmetic
/// to the grouped path, different memory access pattern.
fn scattered_attention<S: Scalar>(
    q: &Tensor<S>,
    k: &Tensor<S>,
    v: &Tensor<S>,
    lists: &[Vec<u32>],
    cfg: &AttnConfig,
) -> Result<(Tensor<S>, u64)> {
    let n = q.leading();
    let d = cfg.head_dim;
    let mut out = vec![S::zero(); n * d];
    let mut acc = vec![0.0f64; d];
    let mut pairs = 0u64;
    for (qi, list) in lists.iter().enumerate() {
        let qrow = q.row(qi);
        let mut row_max = f64::NEG_INFINITY;
        let mut denom = 0.0f64;
        acc.fill(0.0);
        for &ki in list {
            let ki = ki as usize;
            let krow = k.row(ki);
            let s: f64 = cfg.scale
                * qrow
                    .iter()
                    .zip(krow)
                    .map(|(&a, &b)| a.into_f64() * b.into_f64())
                    .sum::<f64>();
            if s > row_max {
                let factor = if row_max == f64::NEG_INFINITY {
                    0.0
                } else {
                    (row_max - s).exp()
                };
                denom *= factor;
                for a in acc.iter_mut() {
                    *a *= factor;
                }
                row_max = s;
            }
            let w = (s - row_max).exp();
            denom += w;
            let vrow = v.row(ki);
            for (a, &x) in acc.iter_mut().zip(vrow) {
                *a += w * x.into_f64();
            }
        }
        if denom <= 0.0 {
            return Err(Error::FullyMaskedRow(qi));
        }
        let orow = &mut out[qi * d..(qi + 1) * d];
        for (o, &a) in orow.iter_mut().zip(acc.iter()) {
            *o = S::from_f64(a / denom);
        }
        pairs += list.len() as u64;
    }
    Ok((Tensor::from_vec(vec![n, d], out)?, pairs))
}
