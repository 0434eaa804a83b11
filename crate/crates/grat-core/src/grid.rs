//! Token-lattice geometry: grid shapes, group partitioning, coordinate to
//! group mapping, and the group-major memory relayout.
//!
//! Token linear order is row-major over the axes in the order given
//! (time outermost for 3D video grids). Grids must divide exactly by the
//! group shape; there is no padding.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use serde::{Deserialize, Serialize};

/// Dimensions of the token lattice: `[H, W]` for images, `[T, H, W]` for
/// videos. Rank-1 grids are accepted for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridShape {
    dims: Vec<usize>,
}

impl GridShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::RankZero);
        }
        if dims.contains(&0) {
            return Err(Error::ShapeMismatch(format!(
                "grid dims must be positive, got {dims:?}"
            )));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or(Error::OverflowDims)?;
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    /// Total token count N.
    pub fn token_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn contains(&self, coords: &[usize]) -> bool {
        coords.len() == self.rank() && coords.iter().zip(&self.dims).all(|(&c, &d)| c < d)
    }

    /// Row-major linear index of a coordinate.
    pub fn linear_index(&self, coords: &[usize]) -> usize {
        debug_assert!(self.contains(coords));
        coords
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&c, &d)| acc * d + c)
    }

    /// Coordinate of a row-major linear index.
    pub fn coord_of(&self, mut linear: usize) -> Vec<usize> {
        let mut coords = vec![0; self.rank()];
        for a in (0..self.rank()).rev() {
            coords[a] = linear % self.dims[a];
            linear /= self.dims[a];
        }
        coords
    }

    /// Euclidean distance between two token coordinates.
    pub fn distance(&self, a: &[usize], b: &[usize]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let d = x as f64 - y as f64;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Euclidean diameter of the lattice: tokens are unit-spaced points, so
    /// each axis contributes `(dim - 1)^2`.
    pub fn diameter(&self) -> f64 {
        self.dims
            .iter()
            .map(|&d| {
                let e = (d - 1) as f64;
                e * e
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Extents of one group along each axis, same rank as the grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupShape {
    gdims: Vec<usize>,
}

impl GroupShape {
    pub fn new(gdims: Vec<usize>) -> Result<Self> {
        if gdims.is_empty() {
            return Err(Error::RankZero);
        }
        if gdims.contains(&0) {
            return Err(Error::ShapeMismatch(format!(
                "group dims must be positive, got {gdims:?}"
            )));
        }
        Ok(Self { gdims })
    }

    /// One token per group; turns any token-level mask into a group plan.
    pub fn unit(rank: usize) -> Self {
        Self {
            gdims: vec![1; rank],
        }
    }

    pub fn gdims(&self) -> &[usize] {
        &self.gdims
    }

    pub fn rank(&self) -> usize {
        self.gdims.len()
    }

    /// Tokens per group.
    pub fn token_count(&self) -> usize {
        self.gdims.iter().product()
    }
}

/// A token coordinate, one entry per axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenCoord(pub Vec<usize>);

impl TokenCoord {
    pub fn coords(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for TokenCoord {
    fn from(coords: Vec<usize>) -> Self {
        Self(coords)
    }
}

/// A grid partitioned into non-overlapping groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupGrid {
    grid: GridShape,
    group: GroupShape,
    gcounts: Vec<usize>,
    total_groups: usize,
}

/// Partitions `grid` into non-overlapping groups of shape `group`.
///
/// Every token belongs to exactly one group; each axis must divide exactly.
pub fn partition(grid: &GridShape, group: &GroupShape) -> Result<GroupGrid> {
    if grid.rank() != group.rank() {
        return Err(Error::RankMismatch {
            expected: grid.rank(),
            actual: group.rank(),
        });
    }
    let mut gcounts = Vec::with_capacity(grid.rank());
    for (axis, (&dim, &gdim)) in grid.dims().iter().zip(group.gdims()).enumerate() {
        if dim % gdim != 0 {
            return Err(Error::Divisibility { axis, dim, gdim });
        }
        gcounts.push(dim / gdim);
    }
    let total_groups = gcounts.iter().product();
    Ok(GroupGrid {
        grid: grid.clone(),
        group: group.clone(),
        gcounts,
        total_groups,
    })
}

impl GroupGrid {
    pub fn grid(&self) -> &GridShape {
        &self.grid
    }

    pub fn group(&self) -> &GroupShape {
        &self.group
    }

    /// Groups per axis.
    pub fn gcounts(&self) -> &[usize] {
        &self.gcounts
    }

    /// Total group count P.
    pub fn total_groups(&self) -> usize {
        self.total_groups
    }

    /// Tokens per group.
    pub fn group_token_count(&self) -> usize {
        self.group.token_count()
    }

    pub fn rank(&self) -> usize {
        self.grid.rank()
    }

    /// Row-major linear index of a per-axis group index.
    pub fn group_linear(&self, gcoord: &[usize]) -> usize {
        gcoord
            .iter()
            .zip(&self.gcounts)
            .fold(0, |acc, (&c, &n)| acc * n + c)
    }

    /// Per-axis group index of a linear group index.
    pub fn group_coord(&self, mut linear: usize) -> Vec<usize> {
        let mut coords = vec![0; self.rank()];
        for a in (0..self.rank()).rev() {
            coords[a] = linear % self.gcounts[a];
            linear /= self.gcounts[a];
        }
        coords
    }

    /// Group of a token, as a linear group index. The token is given by its
    /// row-major linear index in the original layout.
    pub fn token_linear_to_group(&self, token: usize) -> usize {
        let coords = self.grid.coord_of(token);
        let gcoord: Vec<usize> = coords
            .iter()
            .zip(self.group.gdims())
            .map(|(&c, &g)| c / g)
            .collect();
        self.group_linear(&gcoord)
    }

    /// Original-layout linear indices of the member tokens of group `p`, in
    /// row-major order over local offsets.
    pub fn member_token_indices(&self, p: usize) -> Vec<usize> {
        let gcoord = self.group_coord(p);
        let origin: Vec<usize> = gcoord
            .iter()
            .zip(self.group.gdims())
            .map(|(&c, &g)| c * g)
            .collect();
        let gdims = self.group.gdims();
        let mut out = Vec::with_capacity(self.group_token_count());
        let mut local = vec![0usize; self.rank()];
        loop {
            let coord: Vec<usize> = origin.iter().zip(&local).map(|(&o, &l)| o + l).collect();
            out.push(self.grid.linear_index(&coord));
            // odometer over local offsets
            let mut a = self.rank();
            loop {
                if a == 0 {
                    return out;
                }
                a -= 1;
                local[a] += 1;
                if local[a] < gdims[a] {
                    break;
                }
                local[a] = 0;
            }
        }
    }
}

/// Per-axis group index of a token coordinate: component `a` is
/// `coords[a] / gdims[a]`.
pub fn token_to_group(coord: &TokenCoord, gg: &GroupGrid) -> Result<Vec<usize>> {
    if coord.coords().len() != gg.rank() {
        return Err(Error::RankMismatch {
            expected: gg.rank(),
            actual: coord.coords().len(),
        });
    }
    if !gg.grid().contains(coord.coords()) {
        return Err(Error::OutOfBounds {
            coord: coord.coords().to_vec(),
            dims: gg.grid().dims().to_vec(),
        });
    }
    Ok(coord
        .coords()
        .iter()
        .zip(gg.group().gdims())
        .map(|(&c, &g)| c / g)
        .collect())
}

/// The permutation that makes each group's tokens contiguous: `perm[new]`
/// is the original-layout index of the token now stored at `new`. Groups are
/// ordered row-major over group indices; within a group, tokens keep their
/// row-major local order.
pub fn group_major_permutation(gg: &GroupGrid) -> Vec<usize> {
    let n = gg.grid().token_count();
    let mut perm = Vec::with_capacity(n);
    for p in 0..gg.total_groups() {
        perm.extend(gg.member_token_indices(p));
    }
    perm
}

/// Reorders the leading axis so every group occupies a contiguous range.
/// Returns the relayouted tensor and the gather permutation (new -> old);
/// undo with `gather_rows(&out, &invert_permutation(&perm))`.
pub fn relayout_group_major<S: Scalar>(
    t: &Tensor<S>,
    gg: &GroupGrid,
) -> Result<(Tensor<S>, Vec<usize>)> {
    let n = gg.grid().token_count();
    if t.leading() != n {
        return Err(Error::ShapeMismatch(format!(
            "leading extent {} does not match token count {}",
            t.leading(),
            n
        )));
    }
    let perm = group_major_permutation(gg);
    let out = gather_rows(t, &perm)?;
    Ok((out, perm))
}

/// Gathers rows of the leading axis: `out.row(i) = t.row(perm[i])`.
pub fn gather_rows<S: Scalar>(t: &Tensor<S>, perm: &[usize]) -> Result<Tensor<S>> {
    if perm.len() != t.leading() {
        return Err(Error::ShapeMismatch(format!(
            "permutation length {} does not match leading extent {}",
            perm.len(),
            t.leading()
        )));
    }
    let mut data = Vec::with_capacity(t.len());
    for &old in perm {
        data.extend_from_slice(t.row(old));
    }
    Tensor::from_vec(t.shape().to_vec(), data)
}

/// Inverse of a permutation given in gather form.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gg(dims: &[usize], gdims: &[usize]) -> GroupGrid {
        partition(
            &GridShape::new(dims.to_vec()).unwrap(),
            &GroupShape::new(gdims.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn partition_counts() {
        let g = gg(&[4, 4], &[2, 2]);
        assert_eq!(g.gcounts(), &[2, 2]);
        assert_eq!(g.total_groups(), 4);

        let g = gg(&[512, 512], &[16, 16]);
        assert_eq!(g.gcounts(), &[32, 32]);
        assert_eq!(g.total_groups(), 1024);

        let g = gg(&[32, 48, 80], &[4, 8, 8]);
        assert_eq!(g.gcounts(), &[8, 6, 10]);
        assert_eq!(g.total_groups(), 480);
    }

    #[test]
    fn partition_rejects_non_divisible() {
        let grid = GridShape::new(vec![5, 4]).unwrap();
        let group = GroupShape::new(vec![2, 2]).unwrap();
        assert!(matches!(
            partition(&grid, &group),
            Err(Error::Divisibility {
                axis: 0,
                dim: 5,
                gdim: 2
            })
        ));
    }

    #[test]
    fn partition_rejects_rank_mismatch() {
        let grid = GridShape::new(vec![4, 4]).unwrap();
        let group = GroupShape::new(vec![2, 2, 2]).unwrap();
        assert!(matches!(
            partition(&grid, &group),
            Err(Error::RankMismatch { .. })
        ));
    }

    #[test]
    fn token_to_group_examples() {
        let g = gg(&[4, 4], &[2, 2]);
        assert_eq!(token_to_group(&vec![3, 2].into(), &g).unwrap(), vec![1, 1]);
        assert_eq!(token_to_group(&vec![0, 0].into(), &g).unwrap(), vec![0, 0]);

        let g3 = gg(&[32, 48, 80], &[4, 8, 8]);
        assert_eq!(
            token_to_group(&vec![7, 15, 63].into(), &g3).unwrap(),
            vec![1, 1, 7]
        );
        assert_eq!(
            token_to_group(&vec![0, 0, 0].into(), &g3).unwrap(),
            vec![0, 0, 0]
        );
    }

    #[test]
    fn token_to_group_bounds() {
        let g = gg(&[4, 4], &[2, 2]);
        assert!(matches!(
            token_to_group(&vec![4, 0].into(), &g),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn unit_groups_are_identity_permutation() {
        let g = gg(&[2, 2], &[1, 1]);
        assert_eq!(group_major_permutation(&g), vec![0, 1, 2, 3]);
    }

    #[test]
    fn permutation_4x4_2x2() {
        let g = gg(&[4, 4], &[2, 2]);
        assert_eq!(
            group_major_permutation(&g),
            vec![0, 1, 4, 5, 2, 3, 6, 7, 8, 9, 12, 13, 10, 11, 14, 15]
        );
    }

    #[test]
    fn relayout_round_trip_bit_exact() {
        let g = gg(&[4, 6], &[2, 3]);
        let n = 24;
        let data: Vec<f32> = (0..n * 3).map(|i| (i as f32).sin()).collect();
        let t = Tensor::from_vec(vec![n, 3], data).unwrap();
        let (relayed, perm) = relayout_group_major(&t, &g).unwrap();
        let back = gather_rows(&relayed, &invert_permutation(&perm)).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn relayout_rejects_wrong_leading() {
        let g = gg(&[4, 4], &[2, 2]);
        let t = Tensor::<f32>::zeros(vec![7, 2]).unwrap();
        assert!(matches!(
            relayout_group_major(&t, &g),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn groups_cover_grid_exactly() {
        let g = gg(&[6, 4], &[3, 2]);
        let mut seen = [0usize; 24];
        for p in 0..g.total_groups() {
            for idx in g.member_token_indices(p) {
                seen[idx] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn member_range_matches_token_to_group() {
        let g = gg(&[6, 6], &[2, 3]);
        for p in 0..g.total_groups() {
            for idx in g.member_token_indices(p) {
                assert_eq!(g.token_linear_to_group(idx), p);
            }
        }
    }

    #[test]
    fn after_relayout_groups_are_contiguous() {
        let g = gg(&[4, 4, 4], &[2, 2, 2]);
        let perm = group_major_permutation(&g);
        let inv = invert_permutation(&perm);
        let gsz = g.group_token_count();
        for p in 0..g.total_groups() {
            let mut new_positions: Vec<usize> = g
                .member_token_indices(p)
                .iter()
                .map(|&old| inv[old])
                .collect();
            new_positions.sort_unstable();
            assert_eq!(new_positions[0], p * gsz);
            assert_eq!(*new_positions.last().unwrap(), (p + 1) * gsz - 1);
        }
    }
}
