//! Attendable-set construction.
//!
//! Grouped schemes (surrounding blocks, criss-cross) are planned at group
//! granularity as an [`AttentionPlan`]; baseline schemes (neighborhood,
//! circular, token criss-cross) are expressed as token-level [`TokenMask`]s.
//! Either form converts to the other: a plan lowers to a token mask for the
//! dense oracle, and a mask lifts to a unit-group plan for the block engine.
//!
//! Boundary handling is clamping: out-of-range neighbor groups are dropped,
//! never wrapped or shifted. Plans store key-group indices sorted ascending
//! so downstream floating-point accumulation has a fixed order.

use crate::error::{Error, Result};
use crate::grid::{partition, GridShape, GroupGrid, GroupShape};
use serde::{Deserialize, Serialize};

/// Selects one attention scheme plus its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum SchemeConfig {
    /// Every query attends the entire grid.
    Full,
    /// Token-level window of total extent `window[a]` per axis, centered on
    /// the query (half-width `window[a] / 2`), clamped at boundaries.
    Neighborhood { window: Vec<usize> },
    /// Token-level Euclidean ball of the given radius. 2D only.
    CircularRadius { radius: f64 },
    /// Token-level same-row-or-same-column. 2D only.
    CrissCrossToken,
    /// Grouped surrounding blocks: key group within `b[a]` of the query
    /// group on every axis.
    GratB { group: GroupShape, b: Vec<usize> },
    /// Grouped criss-cross: key group matches the query group on at least
    /// one axis.
    GratX { group: GroupShape },
}

impl SchemeConfig {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeConfig::Full => "full",
            SchemeConfig::Neighborhood { .. } => "neighborhood",
            SchemeConfig::CircularRadius { .. } => "circular",
            SchemeConfig::CrissCrossToken => "crisscross",
            SchemeConfig::GratB { .. } => "grat-b",
            SchemeConfig::GratX { .. } => "grat-x",
        }
    }

    /// The group shape for grouped schemes, if any.
    pub fn group(&self) -> Option<&GroupShape> {
        match self {
            SchemeConfig::GratB { group, .. } | SchemeConfig::GratX { group } => Some(group),
            _ => None,
        }
    }

    /// Builds the attention plan for this scheme on the given grid.
    ///
    /// Grouped schemes plan at their group granularity. Full uses a single
    /// group covering the grid. Token-level schemes lift their mask to a
    /// unit-group plan, which keeps the block engine usable for baselines.
    pub fn plan(&self, grid: &GridShape) -> Result<AttentionPlan> {
        match self {
            SchemeConfig::Full => {
                let whole = GroupShape::new(grid.dims().to_vec())?;
                plan_full(&partition(grid, &whole)?)
            }
            SchemeConfig::GratB { group, b } => plan_grat_b(&partition(grid, group)?, b),
            SchemeConfig::GratX { group } => plan_grat_x(&partition(grid, group)?),
            _ => self.token_mask(grid)?.to_unit_plan(),
        }
    }

    /// Builds the token-level view of this scheme on the given grid.
    pub fn token_mask(&self, grid: &GridShape) -> Result<TokenMask> {
        match self {
            SchemeConfig::Full => Ok(TokenMask {
                grid: grid.clone(),
                kind: MaskKind::Full,
            }),
            SchemeConfig::Neighborhood { window } => mask_neighborhood(grid, window),
            SchemeConfig::CircularRadius { radius } => mask_circular(grid, *radius),
            SchemeConfig::CrissCrossToken => mask_crisscross_token(grid),
            SchemeConfig::GratB { .. } | SchemeConfig::GratX { .. } => {
                Ok(plan_to_token_mask(self.plan(grid)?))
            }
        }
    }
}

/// Per-query-group attendable key groups, the block-sparse contract between
/// planner and engine.
///
/// `entries[p]` lists the key-group linear indices group `p` may attend,
/// strictly ascending. Plans built by this module always include the query
/// group itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttentionPlan {
    pub gg: GroupGrid,
    pub entries: Vec<Vec<usize>>,
}

impl AttentionPlan {
    /// Checks the structural invariants: one entry per group, indices
    /// strictly ascending and in range, self-inclusion.
    pub fn validate(&self) -> Result<()> {
        let p_total = self.gg.total_groups();
        if self.entries.len() != p_total {
            return Err(Error::PlanGridMismatch(format!(
                "plan has {} entries for {} groups",
                self.entries.len(),
                p_total
            )));
        }
        for (p, entry) in self.entries.iter().enumerate() {
            if !entry.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::PlanGridMismatch(format!(
                    "entry {p} is not strictly ascending"
                )));
            }
            if entry.last().is_some_and(|&m| m >= p_total) {
                return Err(Error::PlanGridMismatch(format!(
                    "entry {p} lists a group index out of range"
                )));
            }
            if entry.binary_search(&p).is_err() {
                return Err(Error::PlanGridMismatch(format!(
                    "entry {p} does not include its own group"
                )));
            }
        }
        Ok(())
    }

    /// Total allowed (query, key) token pairs under this plan.
    pub fn token_pairs(&self) -> u64 {
        let g = self.gg.group_token_count() as u64;
        self.entries.iter().map(|e| e.len() as u64).sum::<u64>() * g * g
    }

    /// Attendable key tokens for a query in group `p`.
    pub fn keys_per_query(&self, p: usize) -> usize {
        self.entries[p].len() * self.gg.group_token_count()
    }

    pub fn contains(&self, query_group: usize, key_group: usize) -> bool {
        self.entries[query_group].binary_search(&key_group).is_ok()
    }

    /// Serializable form for golden files: `{scheme, grid, group, entries}`.
    pub fn to_document(&self, scheme: &str) -> PlanDocument {
        PlanDocument {
            scheme: scheme.to_string(),
            grid: self.gg.grid().dims().to_vec(),
            group: self.gg.group().gdims().to_vec(),
            entries: self.entries.clone(),
        }
    }

    pub fn from_document(doc: &PlanDocument) -> Result<Self> {
        let gg = partition(
            &GridShape::new(doc.grid.clone())?,
            &GroupShape::new(doc.group.clone())?,
        )?;
        let plan = AttentionPlan {
            gg,
            entries: doc.entries.clone(),
        };
        plan.validate()?;
        Ok(plan)
    }
}

/// JSON document form of a plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub scheme: String,
    pub grid: Vec<usize>,
    pub group: Vec<usize>,
    pub entries: Vec<Vec<usize>>,
}

/// Surrounding-blocks plan: group `p` attends group `m` iff
/// `|m[a] - p[a]| <= b[a]` on every axis. Windows clamp at grid boundaries.
pub fn plan_grat_b(gg: &GroupGrid, b: &[usize]) -> Result<AttentionPlan> {
    if b.len() != gg.rank() {
        return Err(Error::RankMismatch {
            expected: gg.rank(),
            actual: b.len(),
        });
    }
    let rank = gg.rank();
    let gcounts = gg.gcounts();
    let mut entries = Vec::with_capacity(gg.total_groups());
    for p in 0..gg.total_groups() {
        let pc = gg.group_coord(p);
        let lo: Vec<usize> = (0..rank).map(|a| pc[a].saturating_sub(b[a])).collect();
        let hi: Vec<usize> = (0..rank)
            .map(|a| (pc[a] + b[a]).min(gcounts[a] - 1))
            .collect();
        let mut entry = Vec::new();
        // row-major iteration over the box yields ascending linear indices
        let mut m = lo.clone();
        'outer: loop {
            entry.push(gg.group_linear(&m));
            let mut a = rank;
            loop {
                if a == 0 {
                    break 'outer;
                }
                a -= 1;
                m[a] += 1;
                if m[a] <= hi[a] {
                    break;
                }
                m[a] = lo[a];
            }
        }
        entries.push(entry);
    }
    Ok(AttentionPlan {
        gg: gg.clone(),
        entries,
    })
}

/// Criss-cross plan: group `p` attends group `m` iff they match on at least
/// one axis (same row, column, or temporal slab). The union is deduplicated.
pub fn plan_grat_x(gg: &GroupGrid) -> Result<AttentionPlan> {
    let p_total = gg.total_groups();
    let coords: Vec<Vec<usize>> = (0..p_total).map(|m| gg.group_coord(m)).collect();
    let mut entries = Vec::with_capacity(p_total);
    for pc in &coords {
        let entry: Vec<usize> = (0..p_total)
            .filter(|&m| coords[m].iter().zip(pc).any(|(&a, &b)| a == b))
            .collect();
        entries.push(entry);
    }
    Ok(AttentionPlan {
        gg: gg.clone(),
        entries,
    })
}

/// Every query group attends all groups.
pub fn plan_full(gg: &GroupGrid) -> Result<AttentionPlan> {
    let all: Vec<usize> = (0..gg.total_groups()).collect();
    Ok(AttentionPlan {
        gg: gg.clone(),
        entries: vec![all; gg.total_groups()],
    })
}

/// Token-level allowed-pair predicate over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenMask {
    grid: GridShape,
    kind: MaskKind,
}

#[derive(Debug, Clone, PartialEq)]
enum MaskKind {
    Full,
    /// Per-axis half-widths.
    Neighborhood(Vec<usize>),
    Circular(f64),
    CrissCross,
    FromPlan(AttentionPlan),
}

impl TokenMask {
    pub fn grid(&self) -> &GridShape {
        &self.grid
    }

    /// Whether query `q` may attend key `k` (coordinates).
    pub fn allowed(&self, q: &[usize], k: &[usize]) -> bool {
        match &self.kind {
            MaskKind::Full => true,
            MaskKind::Neighborhood(half) => q
                .iter()
                .zip(k)
                .zip(half)
                .all(|((&qa, &ka), &h)| qa.abs_diff(ka) <= h),
            MaskKind::Circular(radius) => {
                let d2: f64 = q
                    .iter()
                    .zip(k)
                    .map(|(&qa, &ka)| {
                        let d = qa.abs_diff(ka) as f64;
                        d * d
                    })
                    .sum();
                d2 <= radius * radius
            }
            MaskKind::CrissCross => q.iter().zip(k).any(|(&qa, &ka)| qa == ka),
            MaskKind::FromPlan(plan) => {
                let qg = plan.gg.token_linear_to_group(self.grid.linear_index(q));
                let kg = plan.gg.token_linear_to_group(self.grid.linear_index(k));
                plan.contains(qg, kg)
            }
        }
    }

    /// Whether query `q` may attend key `k` (row-major linear indices).
    pub fn allowed_linear(&self, q: usize, k: usize) -> bool {
        match &self.kind {
            MaskKind::Full => true,
            MaskKind::FromPlan(plan) => plan.contains(
                plan.gg.token_linear_to_group(q),
                plan.gg.token_linear_to_group(k),
            ),
            _ => self.allowed(&self.grid.coord_of(q), &self.grid.coord_of(k)),
        }
    }

    /// Marks `row[k] = true` for every key the query may attend. The buffer
    /// must be `false`-filled and of length N.
    pub fn fill_row(&self, q: usize, row: &mut [bool]) {
        debug_assert_eq!(row.len(), self.grid.token_count());
        match &self.kind {
            MaskKind::Full => row.fill(true),
            MaskKind::Neighborhood(half) => {
                let qc = self.grid.coord_of(q);
                let dims = self.grid.dims();
                let rank = dims.len();
                let lo: Vec<usize> = (0..rank).map(|a| qc[a].saturating_sub(half[a])).collect();
                let hi: Vec<usize> = (0..rank)
                    .map(|a| (qc[a] + half[a]).min(dims[a] - 1))
                    .collect();
                let mut c = lo.clone();
                'boxscan: loop {
                    row[self.grid.linear_index(&c)] = true;
                    let mut a = rank;
                    loop {
                        if a == 0 {
                            break 'boxscan;
                        }
                        a -= 1;
                        c[a] += 1;
                        if c[a] <= hi[a] {
                            break;
                        }
                        c[a] = lo[a];
                    }
                }
            }
            MaskKind::Circular(radius) => {
                let qc = self.grid.coord_of(q);
                let (h, w) = (self.grid.dims()[0], self.grid.dims()[1]);
                let (qi, qj) = (qc[0] as i64, qc[1] as i64);
                let r = radius.max(0.0);
                let dx_max = (r.floor() as i64).min(h as i64 - 1);
                for dx in -dx_max..=dx_max {
                    let i = qi + dx;
                    if i < 0 || i >= h as i64 {
                        continue;
                    }
                    let dy_max = ((r * r - (dx * dx) as f64).max(0.0).sqrt().floor() as i64)
                        .min(w as i64 - 1);
                    let j_lo = (qj - dy_max).max(0) as usize;
                    let j_hi = (qj + dy_max).min(w as i64 - 1) as usize;
                    let base = i as usize * w;
                    row[base + j_lo..=base + j_hi].fill(true);
                }
            }
            MaskKind::CrissCross => {
                let qc = self.grid.coord_of(q);
                let (h, w) = (self.grid.dims()[0], self.grid.dims()[1]);
                let base = qc[0] * w;
                row[base..base + w].fill(true);
                for i in 0..h {
                    row[i * w + qc[1]] = true;
                }
            }
            MaskKind::FromPlan(plan) => {
                let qg = plan.gg.token_linear_to_group(q);
                for &kg in &plan.entries[qg] {
                    for idx in plan.gg.member_token_indices(kg) {
                        row[idx] = true;
                    }
                }
            }
        }
    }

    /// Lifts the mask to a plan over one-token groups, for the block engine.
    pub fn to_unit_plan(&self) -> Result<AttentionPlan> {
        let n = self.grid.token_count();
        let gg = partition(&self.grid, &GroupShape::unit(self.grid.rank()))?;
        let mut entries = Vec::with_capacity(n);
        let mut row = vec![false; n];
        for q in 0..n {
            row.fill(false);
            self.fill_row(q, &mut row);
            entries.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, &a)| a)
                    .map(|(k, _)| k)
                    .collect(),
            );
        }
        Ok(AttentionPlan { gg, entries })
    }
}

/// Centered token window, total extent `w[a]` per axis (half-width
/// `w[a] / 2`), clamped at boundaries.
pub fn mask_neighborhood(grid: &GridShape, w: &[usize]) -> Result<TokenMask> {
    if w.len() != grid.rank() {
        return Err(Error::RankMismatch {
            expected: grid.rank(),
            actual: w.len(),
        });
    }
    if w.contains(&0) {
        return Err(Error::ShapeMismatch(format!(
            "window extents must be >= 1, got {w:?}"
        )));
    }
    Ok(TokenMask {
        grid: grid.clone(),
        kind: MaskKind::Neighborhood(w.iter().map(|&x| x / 2).collect()),
    })
}

/// Euclidean ball of radius `r` around each query token. 2D grids only.
pub fn mask_circular(grid: &GridShape, r: f64) -> Result<TokenMask> {
    if grid.rank() != 2 {
        return Err(Error::UnsupportedRank {
            what: "circular mask",
            rank: grid.rank(),
        });
    }
    if r.is_nan() || r < 0.0 {
        return Err(Error::ShapeMismatch(format!(
            "radius must be >= 0, got {r}"
        )));
    }
    Ok(TokenMask {
        grid: grid.clone(),
        kind: MaskKind::Circular(r),
    })
}

/// Same-row-or-same-column token mask. 2D grids only.
pub fn mask_crisscross_token(grid: &GridShape) -> Result<TokenMask> {
    if grid.rank() != 2 {
        return Err(Error::UnsupportedRank {
            what: "criss-cross mask",
            rank: grid.rank(),
        });
    }
    Ok(TokenMask {
        grid: grid.clone(),
        kind: MaskKind::CrissCross,
    })
}

/// Token-level view of a plan: query token q may attend key token k iff k's
/// group is listed for q's group. Feeds the dense oracle.
pub fn plan_to_token_mask(plan: AttentionPlan) -> TokenMask {
    TokenMask {
        grid: plan.gg.grid().clone(),
        kind: MaskKind::FromPlan(plan),
    }
}
