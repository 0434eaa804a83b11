//! Analytic efficiency metrics.
//!
//! Counting conventions, used consistently everywhere:
//! - tokens are unit-spaced integer lattice points; distances are Euclidean
//!   between coordinates; the grid diameter uses `(dim - 1)` extents;
//! - windows clamp at boundaries (out-of-range neighbors are dropped);
//! - the sparsity denominator is N^2, all ordered pairs, self included.
//!
//! [`MaskStats::pair_count`] is the exact allowed-pair count under these
//! conventions, computed in closed form. For grouped schemes the stats also
//! carry the boundary-free prediction ([`MaskStats::formula_pairs`], every
//! query charged its full interior attendable set); published sparsity
//! figures for these schemes match the boundary-free numbers, so the table
//! output shows both.

use crate::error::{Error, Result};
use crate::grid::{partition, GridShape};
use crate::maskplan::SchemeConfig;
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use serde::{Deserialize, Serialize};

/// Permitted-pair statistics for a (scheme, grid) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskStats {
    pub scheme: String,
    pub grid: Vec<usize>,
    pub group: Option<Vec<usize>>,
    /// Exact allowed (query, key) ordered pair count, clamped convention.
    pub pair_count: u64,
    /// 1 - pair_count / N^2.
    pub flops_sparsity: f64,
    /// Maximum Euclidean distance over allowed pairs.
    pub farthest: f64,
    pub farthest_ceil: u64,
    pub per_query_min: u64,
    pub per_query_max: u64,
    pub per_query_mean: f64,
    /// Grouped schemes only: pair count if every query had its full
    /// interior attendable set (no boundary clamping).
    pub formula_pairs: Option<u64>,
    /// 1 - formula_pairs / N^2.
    pub formula_sparsity: Option<f64>,
}

impl MaskStats {
    pub fn sparsity_percent(&self) -> f64 {
        self.flops_sparsity * 100.0
    }
}

/// Tokens inside a centered, clamped window of half-width `h` on an axis of
/// extent `n`, summed over all positions.
fn window_sum(n: usize, h: usize) -> u64 {
    (0..n)
        .map(|i| ((i + h).min(n - 1) - i.saturating_sub(h) + 1) as u64)
        .sum()
}

fn window_len_min(n: usize, h: usize) -> u64 {
    (h.min(n - 1) + 1) as u64
}

fn window_len_max(n: usize, h: usize) -> u64 {
    (2 * h + 1).min(n) as u64
}

fn sparsity(pair_count: u64, n: u64) -> f64 {
    1.0 - pair_count as f64 / (n as f64 * n as f64)
}

/// Exact pair counts, sparsity, farthest distance, and per-query key-count
/// extremes for a scheme on a grid. Closed form; no N^2 enumeration.
pub fn mask_stats(scheme: &SchemeConfig, grid: &GridShape) -> Result<MaskStats> {
    let n = grid.token_count() as u64;
    let dims = grid.dims();
    let mut stats = MaskStats {
        scheme: scheme.name().to_string(),
        grid: dims.to_vec(),
        group: scheme.group().map(|g| g.gdims().to_vec()),
        pair_count: 0,
        flops_sparsity: 0.0,
        farthest: 0.0,
        farthest_ceil: 0,
        per_query_min: 0,
        per_query_max: 0,
        per_query_mean: 0.0,
        formula_pairs: None,
        formula_sparsity: None,
    };

    match scheme {
        SchemeConfig::Full => {
            stats.pair_count = n * n;
            stats.farthest = grid.diameter();
            stats.per_query_min = n;
            stats.per_query_max = n;
        }
        SchemeConfig::Neighborhood { window } => {
            if window.len() != grid.rank() {
                return Err(Error::RankMismatch {
                    expected: grid.rank(),
                    actual: window.len(),
                });
            }
            if window.contains(&0) {
                return Err(Error::ShapeMismatch(format!(
                    "window extents must be >= 1, got {window:?}"
                )));
            }
            let halves: Vec<usize> = window.iter().map(|&w| w / 2).collect();
            stats.pair_count = dims
                .iter()
                .zip(&halves)
                .map(|(&d, &h)| window_sum(d, h))
                .product();
            stats.farthest = dims
                .iter()
                .zip(&halves)
                .map(|(&d, &h)| {
                    let o = h.min(d - 1) as f64;
                    o * o
                })
                .sum::<f64>()
                .sqrt();
            stats.per_query_min = dims
                .iter()
                .zip(&halves)
                .map(|(&d, &h)| window_len_min(d, h))
                .product();
            stats.per_query_max = dims
                .iter()
                .zip(&halves)
                .map(|(&d, &h)| window_len_max(d, h))
                .product();
        }
        SchemeConfig::CircularRadius { radius } => {
            if grid.rank() != 2 {
                return Err(Error::UnsupportedRank {
                    what: "circular stats",
                    rank: grid.rank(),
                });
            }
            if radius.is_nan() || *radius < 0.0 {
                return Err(Error::ShapeMismatch(format!(
                    "radius must be >= 0, got {radius}"
                )));
            }
            let (h, w) = (dims[0] as i64, dims[1] as i64);
            let r2 = radius * radius;
            let dx_max = (radius.floor() as i64).min(h - 1);
            let mut pairs = 0u64;
            let mut far2 = 0.0f64;
            for dx in -dx_max..=dx_max {
                let rem = r2 - (dx * dx) as f64;
                if rem < 0.0 {
                    continue;
                }
                let dy_max = (rem.sqrt().floor() as i64).min(w - 1);
                for dy in -dy_max..=dy_max {
                    let d2 = (dx * dx + dy * dy) as f64;
                    if d2 > r2 {
                        continue;
                    }
                    pairs += ((h - dx.abs()) * (w - dy.abs())) as u64;
                    if d2 > far2 {
                        far2 = d2;
                    }
                }
            }
            stats.pair_count = pairs;
            stats.farthest = far2.sqrt();
            // per-query extremes by scanning query positions
            let mut kmin = u64::MAX;
            let mut kmax = 0u64;
            for qi in 0..h {
                for qj in 0..w {
                    let mut count = 0u64;
                    let lo = (-dx_max).max(-qi);
                    let hi = dx_max.min(h - 1 - qi);
                    for dx in lo..=hi {
                        let rem = r2 - (dx * dx) as f64;
                        if rem < 0.0 {
                            continue;
                        }
                        let dy_max = (rem.sqrt().floor() as i64).min(w - 1);
                        let jlo = (qj - dy_max).max(0);
                        let jhi = (qj + dy_max).min(w - 1);
                        count += (jhi - jlo + 1) as u64;
                    }
                    kmin = kmin.min(count);
                    kmax = kmax.max(count);
                }
            }
            stats.per_query_min = kmin;
            stats.per_query_max = kmax;
        }
        SchemeConfig::CrissCrossToken => {
            if grid.rank() != 2 {
                return Err(Error::UnsupportedRank {
                    what: "criss-cross stats",
                    rank: grid.rank(),
                });
            }
            let (h, w) = (dims[0] as u64, dims[1] as u64);
            let per_query = h + w - 1;
            stats.pair_count = n * per_query;
            stats.farthest = ((h - 1).max(w - 1)) as f64;
            stats.per_query_min = per_query;
            stats.per_query_max = per_query;
        }
        SchemeConfig::GratB { group, b } => {
            let gg = partition(grid, group)?;
            if b.len() != grid.rank() {
                return Err(Error::RankMismatch {
                    expected: grid.rank(),
                    actual: b.len(),
                });
            }
            let g_tokens = gg.group_token_count() as u64;
            let gcounts = gg.gcounts();
            let group_pairs: u64 = gcounts
                .iter()
                .zip(b)
                .map(|(&c, &ba)| window_sum(c, ba))
                .product();
            stats.pair_count = group_pairs * g_tokens * g_tokens;
            stats.farthest = gcounts
                .iter()
                .zip(b)
                .zip(group.gdims())
                .map(|((&c, &ba), &ga)| {
                    let o = ((ba.min(c - 1) + 1) * ga - 1) as f64;
                    o * o
                })
                .sum::<f64>()
                .sqrt();
            stats.per_query_min = gcounts
                .iter()
                .zip(b)
                .map(|(&c, &ba)| window_len_min(c, ba))
                .product::<u64>()
                * g_tokens;
            stats.per_query_max = gcounts
                .iter()
                .zip(b)
                .map(|(&c, &ba)| window_len_max(c, ba))
                .product::<u64>()
                * g_tokens;
            let interior: u64 = b.iter().map(|&ba| 2 * ba as u64 + 1).product();
            let formula = n * interior * g_tokens;
            stats.formula_pairs = Some(formula);
            stats.formula_sparsity = Some(sparsity(formula, n));
        }
        SchemeConfig::GratX { group } => {
            let gg = partition(grid, group)?;
            let g_tokens = gg.group_token_count() as u64;
            let union = crisscross_union_size(gg.gcounts());
            stats.pair_count = n * union * g_tokens;
            stats.farthest = (0..grid.rank())
                .map(|axis| {
                    (0..grid.rank())
                        .map(|a| {
                            let o = if a == axis {
                                (group.gdims()[a] - 1) as f64
                            } else {
                                (dims[a] - 1) as f64
                            };
                            o * o
                        })
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(0.0, f64::max);
            stats.per_query_min = union * g_tokens;
            stats.per_query_max = union * g_tokens;
            let formula = n * union * g_tokens;
            stats.formula_pairs = Some(formula);
            stats.formula_sparsity = Some(sparsity(formula, n));
        }
    }

    stats.flops_sparsity = sparsity(stats.pair_count, n);
    stats.farthest_ceil = stats.farthest.ceil() as u64;
    stats.per_query_mean = stats.pair_count as f64 / n as f64;
    Ok(stats)
}

/// Number of groups matching a query group on at least one axis, by
/// inclusion-exclusion over the axis subsets. Uniform across query groups.
fn crisscross_union_size(gcounts: &[usize]) -> u64 {
    let rank = gcounts.len();
    let mut total = 0i64;
    for subset in 1u32..(1 << rank) {
        let fixed = subset.count_ones() as i64;
        let size: i64 = (0..rank)
            .filter(|a| subset & (1 << a) == 0)
            .map(|a| gcounts[a] as i64)
            .product();
        total += if fixed % 2 == 1 { size } else { -size };
    }
    total as u64
}

/// Maximum Euclidean distance between token coordinates of any allowed pair.
pub fn farthest_distance(scheme: &SchemeConfig, grid: &GridShape) -> Result<f64> {
    Ok(mask_stats(scheme, grid)?.farthest)
}

/// Boundary-free pair-count prediction for grouped schemes: every query is
/// charged its full interior attendable set. An upper bound on
/// [`MaskStats::pair_count`]; equality iff no window clamps.
pub fn complexity_estimate(scheme: &SchemeConfig, grid: &GridShape) -> Result<u64> {
    let n = grid.token_count() as u64;
    match scheme {
        SchemeConfig::GratB { group, b } => {
            let gg = partition(grid, group)?;
            if b.len() != grid.rank() {
                return Err(Error::RankMismatch {
                    expected: grid.rank(),
                    actual: b.len(),
                });
            }
            let interior: u64 = b.iter().map(|&ba| 2 * ba as u64 + 1).product();
            Ok(n * interior * gg.group_token_count() as u64)
        }
        SchemeConfig::GratX { group } => {
            let gg = partition(grid, group)?;
            Ok(n * crisscross_union_size(gg.gcounts()) * gg.group_token_count() as u64)
        }
        other => Err(Error::UnsupportedScheme(format!(
            "complexity estimate for {}",
            other.name()
        ))),
    }
}

/// Attention mass binned by normalized query-key distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceHistogram {
    /// Mass per bin; bin `b` covers `[b/bins, (b+1)/bins)` of normalized
    /// distance, last bin closed.
    pub mass: Vec<f64>,
    /// Normalization constant: the grid's Euclidean diameter.
    pub d_max: f64,
}

impl DistanceHistogram {
    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Mass in bins entirely below normalized distance `x`.
    pub fn cumulative_below(&self, x: f64) -> f64 {
        let bins = self.bins() as f64;
        self.mass
            .iter()
            .enumerate()
            .filter(|(b, _)| (*b as f64 + 1.0) / bins <= x + 1e-12)
            .map(|(_, m)| m)
            .sum()
    }

    /// `bin_low,bin_high,mass` rows.
    pub fn to_csv(&self) -> String {
        let bins = self.bins() as f64;
        let mut out = String::from("bin_low,bin_high,mass\n");
        for (b, m) in self.mass.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                b as f64 / bins,
                (b as f64 + 1.0) / bins,
                m
            ));
        }
        out
    }
}

/// Bins each (query, key) softmax weight by the pair's normalized lattice
/// distance. Each query row must carry total mass 1 (within 1e-3).
pub fn attention_mass_by_distance<S: Scalar>(
    weights: &Tensor<S>,
    grid: &GridShape,
    bins: usize,
) -> Result<DistanceHistogram> {
    let n = grid.token_count();
    if weights.rank() != 2 || weights.shape() != [n, n] {
        return Err(Error::ShapeMismatch(format!(
            "weights must be [{n}, {n}] for this grid, got {:?}",
            weights.shape()
        )));
    }
    if bins == 0 {
        return Err(Error::ShapeMismatch("bins must be >= 1".into()));
    }
    const ROW_TOL: f64 = 1e-3;
    for qi in 0..n {
        let sum: f64 = weights.row(qi).iter().map(|&w| w.into_f64()).sum();
        if (sum - 1.0).abs() > ROW_TOL {
            return Err(Error::NonStochasticRows {
                row: qi,
                sum,
                tol: ROW_TOL,
            });
        }
    }

    let d_max = grid.diameter();
    let coords: Vec<Vec<usize>> = (0..n).map(|i| grid.coord_of(i)).collect();
    let mut mass = vec![0.0f64; bins];
    for qi in 0..n {
        let row = weights.row(qi);
        for ki in 0..n {
            let w = row[ki].into_f64();
            if w == 0.0 {
                continue;
            }
            let x = if d_max > 0.0 {
                grid.distance(&coords[qi], &coords[ki]) / d_max
            } else {
                0.0
            };
            let b = ((x * bins as f64).floor() as usize).min(bins - 1);
            mass[b] += w;
        }
    }
    Ok(DistanceHistogram { mass, d_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GroupShape;

    fn grid(dims: &[usize]) -> GridShape {
        GridShape::new(dims.to_vec()).unwrap()
    }

    fn grat_b(gdims: &[usize], b: &[usize]) -> SchemeConfig {
        SchemeConfig::GratB {
            group: GroupShape::new(gdims.to_vec()).unwrap(),
            b: b.to_vec(),
        }
    }

    fn grat_x(gdims: &[usize]) -> SchemeConfig {
        SchemeConfig::GratX {
            group: GroupShape::new(gdims.to_vec()).unwrap(),
        }
    }

    #[test]
    fn full_stats() {
        let s = mask_stats(&SchemeConfig::Full, &grid(&[8, 8])).unwrap();
        assert_eq!(s.pair_count, 64 * 64);
        assert_eq!(s.flops_sparsity, 0.0);
        assert!((s.farthest - (2.0 * 49.0f64).sqrt()).abs() < 1e-12);
        assert_eq!((s.per_query_min, s.per_query_max), (64, 64));
    }

    #[test]
    fn grat_b_video_config() {
        let s = mask_stats(&grat_b(&[4, 8, 8], &[1, 1, 1]), &grid(&[32, 48, 80])).unwrap();
        // clamped exact: (3*8-2)(3*6-2)(3*10-2) group pairs x 256^2
        assert_eq!(s.pair_count, 9856 * 256 * 256);
        assert!((s.flops_sparsity - 0.9572222222222222).abs() < 1e-12);
        // boundary-free: 27 groups x 256 tokens per query
        assert_eq!(s.formula_pairs, Some(122_880 * 6912));
        assert!((s.formula_sparsity.unwrap() - 0.94375).abs() < 1e-12);
        assert_eq!(s.per_query_max, 6912);
        assert_eq!(s.per_query_min, 2 * 2 * 2 * 256);
        assert!((s.farthest - 499.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn grat_b_image_config() {
        let s = mask_stats(&grat_b(&[16, 16], &[1, 1]), &grid(&[512, 512])).unwrap();
        assert_eq!(s.pair_count, 256 * (900 * 2304 + 120 * 1536 + 4 * 1024));
        assert!((s.sparsity_percent() - 99.15733337402344).abs() < 1e-9);
        assert!((s.farthest - (31.0f64 * 31.0 * 2.0).sqrt()).abs() < 1e-12);
        assert_eq!(s.farthest_ceil, 44);
    }

    #[test]
    fn grat_x_image_config() {
        let s = mask_stats(&grat_x(&[16, 16]), &grid(&[512, 512])).unwrap();
        assert_eq!(s.per_query_min, 63 * 256);
        assert_eq!(s.pair_count, 262_144 * 63 * 256);
        assert!((s.sparsity_percent() - 93.8477).abs() < 1e-3);
        assert!((s.farthest - (15.0f64 * 15.0 + 511.0 * 511.0).sqrt()).abs() < 1e-12);
        assert_eq!(s.farthest_ceil, 512);
    }

    #[test]
    fn farthest_examples() {
        let f = farthest_distance(
            &SchemeConfig::CircularRadius { radius: 16.0 },
            &grid(&[512, 512]),
        )
        .unwrap();
        assert_eq!(f, 16.0);

        let f = farthest_distance(
            &SchemeConfig::Neighborhood {
                window: vec![32, 32],
            },
            &grid(&[512, 512]),
        )
        .unwrap();
        assert!((f - 512.0f64.sqrt()).abs() < 1e-12); // 16 * sqrt(2)
        assert_eq!(f.ceil() as u64, 23);

        let f = farthest_distance(&grat_b(&[16, 16], &[1, 1]), &grid(&[512, 512])).unwrap();
        assert_eq!(f.ceil() as u64, 44);
    }

    #[test]
    fn neighborhood_interior_count() {
        let s = mask_stats(
            &SchemeConfig::Neighborhood {
                window: vec![32, 32],
            },
            &grid(&[512, 512]),
        )
        .unwrap();
        assert_eq!(s.per_query_max, 33 * 33);
        // per-axis sum: 512*33 - 2*(1+..+16)
        let axis = 512 * 33 - 2 * 136u64;
        assert_eq!(s.pair_count, axis * axis);
    }

    #[test]
    fn crisscross_counts() {
        let s = mask_stats(&SchemeConfig::CrissCrossToken, &grid(&[512, 512])).unwrap();
        assert_eq!(s.per_query_max, 1023);
        assert_eq!(s.pair_count, 262_144 * 1023);
        assert!(matches!(
            mask_stats(&SchemeConfig::CrissCrossToken, &grid(&[4, 4, 4])),
            Err(Error::UnsupportedRank { .. })
        ));
    }

    #[test]
    fn circular_degenerate() {
        let s = mask_stats(
            &SchemeConfig::CircularRadius { radius: 0.0 },
            &grid(&[5, 5]),
        )
        .unwrap();
        assert_eq!(s.pair_count, 25); // diagonal only
        assert_eq!(s.farthest, 0.0);

        let s = mask_stats(
            &SchemeConfig::CircularRadius { radius: 100.0 },
            &grid(&[5, 5]),
        )
        .unwrap();
        assert_eq!(s.pair_count, 625);
        assert_eq!(s.flops_sparsity, 0.0);
    }

    #[test]
    fn circular_interior_key_count_is_disc_lattice_points() {
        // count dx^2 + dy^2 <= 16^2 directly
        let mut disc = 0u64;
        for dx in -16i64..=16 {
            for dy in -16i64..=16 {
                if dx * dx + dy * dy <= 256 {
                    disc += 1;
                }
            }
        }
        let s = mask_stats(
            &SchemeConfig::CircularRadius { radius: 16.0 },
            &grid(&[64, 64]),
        )
        .unwrap();
        assert_eq!(s.per_query_max, disc);
    }

    #[test]
    fn farthest_ordering_full_ge_x_ge_b() {
        let g = grid(&[64, 48]);
        let full = mask_stats(&SchemeConfig::Full, &g).unwrap().farthest;
        let gx = mask_stats(&grat_x(&[8, 8]), &g).unwrap().farthest;
        let gb2 = mask_stats(&grat_b(&[8, 8], &[2, 2]), &g).unwrap().farthest;
        let gb1 = mask_stats(&grat_b(&[8, 8], &[1, 1]), &g).unwrap().farthest;
        let gb0 = mask_stats(&grat_b(&[8, 8], &[0, 0]), &g).unwrap().farthest;
        assert!(full >= gx && gx >= gb2 && gb2 >= gb1 && gb1 >= gb0);
    }

    #[test]
    fn histogram_total_mass_from_real_weights() {
        use crate::attn::{attention_weights, AttnConfig};
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        let g = grid(&[6, 6]);
        let n = 36;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mk = |rng: &mut ChaCha8Rng| {
            Tensor::from_vec(
                vec![n, 4],
                (0..n * 4).map(|_| rng.gen_range(-1.0f32..1.0)).collect(),
            )
            .unwrap()
        };
        let q = mk(&mut rng);
        let k = mk(&mut rng);
        let mask = grat_b(&[2, 3], &[1, 1]).token_mask(&g).unwrap();
        let w = attention_weights(&q, &k, &mask, &AttnConfig::new(4).unwrap()).unwrap();
        let hist = attention_mass_by_distance(&w, &g, 16).unwrap();
        assert!((hist.total_mass() - n as f64).abs() < 1e-4);
    }

    #[test]
    fn complexity_examples() {
        let g = grid(&[512, 512]);
        let est = complexity_estimate(&grat_b(&[16, 16], &[1, 1]), &g).unwrap();
        assert_eq!(est, 262_144 * 2304);
        let exact = mask_stats(&grat_b(&[16, 16], &[1, 1]), &g)
            .unwrap()
            .pair_count;
        assert!(est > exact);

        let est = complexity_estimate(&grat_b(&[16, 16], &[0, 0]), &g).unwrap();
        assert_eq!(est, 262_144 * 256); // self group only
        let exact = mask_stats(&grat_b(&[16, 16], &[0, 0]), &g)
            .unwrap()
            .pair_count;
        assert_eq!(est, exact);

        let est = complexity_estimate(&grat_x(&[16, 16]), &g).unwrap();
        assert_eq!(est, 262_144 * 16_128);

        assert!(matches!(
            complexity_estimate(&SchemeConfig::Full, &g),
            Err(Error::UnsupportedScheme(_))
        ));
    }

    #[test]
    fn histogram_identity_and_1d() {
        let n = 9;
        let mut w = vec![0.0f32; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        let w = Tensor::from_vec(vec![n, n], w).unwrap();
        let h = attention_mass_by_distance(&w, &grid(&[3, 3]), 4).unwrap();
        assert!((h.mass[0] - 9.0).abs() < 1e-12);
        assert!(h.mass[1..].iter().all(|&m| m == 0.0));

        let w = Tensor::from_vec(vec![2, 2], vec![0.5f32; 4]).unwrap();
        let h = attention_mass_by_distance(&w, &grid(&[2]), 2).unwrap();
        assert!((h.mass[0] - 1.0).abs() < 1e-12);
        assert!((h.mass[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_rejects_bad_rows() {
        let w = Tensor::from_vec(vec![2, 2], vec![0.9f32, 0.0, 0.5, 0.5]).unwrap();
        assert!(matches!(
            attention_mass_by_distance(&w, &grid(&[2]), 2),
            Err(Error::NonStochasticRows { row: 0, .. })
        ));
        let w = Tensor::from_vec(vec![2, 2], vec![0.5f32; 4]).unwrap();
        assert!(matches!(
            attention_mass_by_distance(&w, &grid(&[4]), 2),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn csv_headers() {
        let h = DistanceHistogram {
            mass: vec![1.0, 0.5],
            d_max: 3.0,
        };
        let csv = h.to_csv();
        assert!(csv.starts_with("bin_low,bin_high,mass\n"));
        assert_eq!(csv.lines().count(), 3);
        assert!((h.cumulative_below(0.5) - 1.0).abs() < 1e-12);
    }
}
