//! `grat`: stats, tables, attention runs, benchmarks, and mass-by-distance
//! histograms for grouped structured sparse attention.
//!
//! Exit codes: 0 success, 1 computation error, 2 usage error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use grat_core::attn::{
    dense_masked_attention, grouped_block_attention_counted, AttnConfig, Parallelism,
};
use grat_core::bench::run_bench;
use grat_core::grid::{gather_rows, invert_permutation, relayout_group_major};
use grat_core::maskplan::plan_to_token_mask;
use grat_core::metrics::{attention_mass_by_distance, mask_stats, MaskStats};
use grat_core::tensorio::{read_tensor, write_tensor};
use grat_core::{GridShape, GroupShape, SchemeConfig};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "grat",
    version,
    about = "Grouped structured sparse attention: plans, metrics, and execution"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pair counts, FLOPs sparsity, and farthest-token distance for a scheme
    Stats(StatsArgs),
    /// Multi-scheme comparison table with published reference values
    Table(TableArgs),
    /// Run grouped block-sparse attention on .grt tensors
    Run(RunArgs),
    /// Time the dense, grouped, and scattered executors on synthetic data
    Bench(BenchArgs),
    /// Histogram attention mass by normalized query-key distance
    Massdist(MassdistArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeName {
    Full,
    Neighborhood,
    Circular,
    Crisscross,
    GratB,
    GratX,
}

/// `AxB` / `AxBxC` flag value (grids and group shapes).
#[derive(Debug, Clone)]
struct ShapeArg(Vec<usize>);

/// `N` or `N,N[,N]` flag value (per-axis parameters).
#[derive(Debug, Clone)]
struct AxisListArg(Vec<usize>);

#[derive(Args)]
struct SchemeArgs {
    /// Attention scheme
    #[arg(long, value_enum)]
    scheme: SchemeName,
    /// Token grid, HxW for images or TxHxW for videos (e.g. 512x512, 32x48x80)
    #[arg(long, value_parser = parse_shape)]
    grid: ShapeArg,
    /// Group shape for grat-b / grat-x (e.g. 16x16, 4x8x8)
    #[arg(long, value_parser = parse_shape)]
    group: Option<ShapeArg>,
    /// Surrounding-block size for grat-b; one value broadcasts to all axes
    #[arg(long, value_parser = parse_axis_list)]
    b: Option<AxisListArg>,
    /// Window extent for neighborhood; one value broadcasts to all axes
    #[arg(long, value_parser = parse_axis_list)]
    window: Option<AxisListArg>,
    /// Radius for circular
    #[arg(long)]
    radius: Option<f64>,
}

fn parse_shape(s: &str) -> Result<ShapeArg, String> {
    let dims: Result<Vec<usize>, _> = s.split('x').map(|p| p.trim().parse::<usize>()).collect();
    match dims {
        Ok(d) if !d.is_empty() && d.iter().all(|&x| x > 0) => Ok(ShapeArg(d)),
        _ => Err(format!(
            "expected AxB or AxBxC with positive extents, got {s:?}"
        )),
    }
}

fn parse_axis_list(s: &str) -> Result<AxisListArg, String> {
    let vals: Result<Vec<usize>, _> = s.split(',').map(|p| p.trim().parse::<usize>()).collect();
    match vals {
        Ok(v) if !v.is_empty() => Ok(AxisListArg(v)),
        _ => Err(format!("expected N or N,N[,N], got {s:?}")),
    }
}

/// `2` -> `[2, 2]` for a rank-2 grid; full-length lists pass through.
fn broadcast(vals: &[usize], rank: usize, what: &str) -> Result<Vec<usize>, String> {
    if vals.len() == 1 {
        Ok(vec![vals[0]; rank])
    } else if vals.len() == rank {
        Ok(vals.to_vec())
    } else {
        Err(format!(
            "--{what} needs 1 or {rank} values for this grid, got {}",
            vals.len()
        ))
    }
}

impl SchemeArgs {
    fn grid_shape(&self) -> Result<GridShape, grat_core::Error> {
        GridShape::new(self.grid.0.clone())
    }

    /// Resolves flags into a `SchemeConfig`; missing scheme parameters are
    /// usage errors.
    fn build(&self) -> Result<SchemeConfig, String> {
        let rank = self.grid.0.len();
        let need_group = || -> Result<GroupShape, String> {
            let g = self
                .group
                .as_ref()
                .ok_or_else(|| "--group is required for grouped schemes".to_string())?;
            if g.0.len() != rank {
                return Err(format!(
                    "--group rank {} does not match grid rank {rank}",
                    g.0.len()
                ));
            }
            GroupShape::new(g.0.clone()).map_err(|e| e.to_string())
        };
        match self.scheme {
            SchemeName::Full => Ok(SchemeConfig::Full),
            SchemeName::Neighborhood => {
                let w = self
                    .window
                    .as_ref()
                    .ok_or_else(|| "--window is required for neighborhood".to_string())?;
                Ok(SchemeConfig::Neighborhood {
                    window: broadcast(&w.0, rank, "window")?,
                })
            }
            SchemeName::Circular => {
                let radius = self
                    .radius
                    .ok_or_else(|| "--radius is required for circular".to_string())?;
                Ok(SchemeConfig::CircularRadius { radius })
            }
            SchemeName::Crisscross => Ok(SchemeConfig::CrissCrossToken),
            SchemeName::GratB => {
                let b = self
                    .b
                    .as_ref()
                    .ok_or_else(|| "--b is required for grat-b".to_string())?;
                Ok(SchemeConfig::GratB {
                    group: need_group()?,
                    b: broadcast(&b.0, rank, "b")?,
                })
            }
            SchemeName::GratX => Ok(SchemeConfig::GratX {
                group: need_group()?,
            }),
        }
    }
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Image,
    Video,
}

#[derive(Args)]
struct TableArgs {
    /// image: 512x512 grid, group 16x16. video: 32x48x80 grid, group 4x8x8
    #[arg(long, value_enum)]
    preset: Preset,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Query tensor, rank-2 [N, d] .grt
    #[arg(long)]
    q: std::path::PathBuf,
    /// Key tensor
    #[arg(long)]
    k: std::path::PathBuf,
    /// Value tensor
    #[arg(long)]
    v: std::path::PathBuf,
    /// Output tensor path
    #[arg(long)]
    out: std::path::PathBuf,
    /// Softmax scale; defaults to 1/sqrt(d)
    #[arg(long)]
    scale: Option<f64>,
    /// Also run the dense oracle and report the max abs deviation
    #[arg(long)]
    verify: bool,
    /// Parallelize over query groups
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Head dimension
    #[arg(long, default_value_t = 64)]
    d: usize,
    /// Timed repetitions (a warm-up run is discarded)
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(3..))]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Parallelize the grouped executor over query groups
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MassdistArgs {
    /// Attention weight matrix, rank-2 [N, N] .grt, rows summing to 1
    #[arg(long)]
    weights: std::path::PathBuf,
    #[arg(long, value_parser = parse_shape)]
    grid: ShapeArg,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Write the histogram as CSV (bin_low, bin_high, mass)
    #[arg(long)]
    csv: Option<std::path::PathBuf>,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Stats(args) => cmd_stats(args),
        Cmd::Table(args) => cmd_table(args),
        Cmd::Run(args) => cmd_run(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Massdist(args) => cmd_massdist(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

enum CmdError {
    Usage(String),
    Compute(String),
}

impl From<grat_core::Error> for CmdError {
    fn from(e: grat_core::Error) -> Self {
        CmdError::Compute(e.to_string())
    }
}

fn scheme_of(args: &SchemeArgs) -> Result<(SchemeConfig, GridShape), CmdError> {
    let scheme = args.build().map_err(CmdError::Usage)?;
    let grid = args.grid_shape()?;
    Ok((scheme, grid))
}

fn print_stats(s: &MaskStats) {
    println!("scheme       {}", s.scheme);
    println!("grid         {}", join_x(&s.grid));
    if let Some(g) = &s.group {
        println!("group        {}", join_x(g));
    }
    println!("pairs        {}", s.pair_count);
    println!("sparsity     {:.2}%", s.sparsity_percent());
    if let Some(fs) = s.formula_sparsity {
        println!(
            "interior     {:.2}%   (boundary-free: every query charged its full block set)",
            fs * 100.0
        );
    }
    println!("farthest     {:.4} (ceil {})", s.farthest, s.farthest_ceil);
    println!(
        "keys/query   min {}  max {}  mean {:.2}",
        s.per_query_min, s.per_query_max, s.per_query_mean
    );
}

fn join_x(v: &[usize]) -> String {
    v.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("x")
}

fn cmd_stats(args: StatsArgs) -> Result<(), CmdError> {
    let (scheme, grid) = scheme_of(&args.scheme)?;
    let stats = mask_stats(&scheme, &grid)?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&stats).expect("stats serialize")
        );
    } else {
        print_stats(&stats);
    }
    Ok(())
}

/// One table row: computed stats next to the published reference values for
/// the same configuration (shown for context, never asserted equal; the
/// published counts do not state their boundary conventions).
#[derive(serde::Serialize)]
struct TableRow {
    scheme: String,
    config: String,
    pair_count: u64,
    sparsity_pct: f64,
    interior_sparsity_pct: Option<f64>,
    farthest: f64,
    farthest_ceil: u64,
    ref_sparsity_pct: f64,
    ref_farthest: u64,
}

fn table_rows(preset: Preset) -> Result<Vec<TableRow>, CmdError> {
    let entries: Vec<(SchemeConfig, String, f64, u64)> = match preset {
        Preset::Image => {
            let group = GroupShape::new(vec![16, 16])?;
            vec![
                (SchemeConfig::Full, "-".into(), 0.0, 724),
                (
                    SchemeConfig::CircularRadius { radius: 16.0 },
                    "radius=16".into(),
                    99.50,
                    16,
                ),
                (
                    SchemeConfig::Neighborhood {
                        window: vec![32, 32],
                    },
                    "window=32".into(),
                    99.42,
                    23,
                ),
                (
                    SchemeConfig::GratB {
                        group: group.clone(),
                        b: vec![1, 1],
                    },
                    "g=16x16 b=1".into(),
                    99.03,
                    45,
                ),
                (SchemeConfig::GratX { group }, "g=16x16".into(), 93.67, 512),
            ]
        }
        Preset::Video => {
            let group = GroupShape::new(vec![4, 8, 8])?;
            vec![
                (SchemeConfig::Full, "-".into(), 0.0, 98),
                (
                    SchemeConfig::GratB {
                        group: group.clone(),
                        b: vec![1, 1, 1],
                    },
                    "g=4x8x8 b=1".into(),
                    94.3,
                    24,
                ),
                (SchemeConfig::GratX { group }, "g=4x8x8".into(), 60.8, 81),
            ]
        }
    };
    let grid = match preset {
        Preset::Image => GridShape::new(vec![512, 512])?,
        Preset::Video => GridShape::new(vec![32, 48, 80])?,
    };

    let mut rows = Vec::new();
    for (scheme, config, ref_sparsity_pct, ref_farthest) in entries {
        let s = mask_stats(&scheme, &grid)?;
        rows.push(TableRow {
            scheme: s.scheme.clone(),
            config,
            pair_count: s.pair_count,
            sparsity_pct: s.sparsity_percent(),
            interior_sparsity_pct: s.formula_sparsity.map(|x| x * 100.0),
            farthest: s.farthest,
            farthest_ceil: s.farthest_ceil,
            ref_sparsity_pct,
            ref_farthest,
        });
    }
    Ok(rows)
}

fn cmd_table(args: TableArgs) -> Result<(), CmdError> {
    let rows = table_rows(args.preset)?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&rows).expect("rows serialize")
        );
        return Ok(());
    }
    let (grid, group) = match args.preset {
        Preset::Image => ("512x512", "16x16"),
        Preset::Video => ("32x48x80", "4x8x8"),
    };
    println!("grid {grid}, grouped schemes use group {group}");
    println!(
        "{:<13} {:<12} {:>15} {:>10} {:>10} {:>16} {:>8} {:>8}",
        "scheme", "config", "pairs", "sparsity", "interior", "farthest", "ref spr", "ref far"
    );
    for r in rows {
        println!(
            "{:<13} {:<12} {:>15} {:>9.2}% {:>10} {:>9.2} -> {:>3} {:>7.2}% {:>8}",
            r.scheme,
            r.config,
            r.pair_count,
            r.sparsity_pct,
            r.interior_sparsity_pct
                .map(|x| format!("{x:.2}%"))
                .unwrap_or_else(|| "-".into()),
            r.farthest,
            r.farthest_ceil,
            r.ref_sparsity_pct,
            r.ref_farthest
        );
    }
    println!("reference columns: values published for these configurations; boundary conventions there are unstated, so small gaps are expected");
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), CmdError> {
    let (scheme, grid) = scheme_of(&args.scheme)?;
    let q = read_tensor(&args.q)?;
    let k = read_tensor(&args.k)?;
    let v = read_tensor(&args.v)?;
    let n = grid.token_count();
    if q.rank() != 2 || q.leading() != n {
        return Err(CmdError::Compute(format!(
            "Q must be rank-2 with {n} rows to match --grid {}, got shape {:?}",
            join_x(grid.dims()),
            q.shape()
        )));
    }
    let d = q.shape()[1];
    let cfg = match args.scale {
        Some(s) => AttnConfig::with_scale(d, s)?,
        None => AttnConfig::new(d)?,
    };
    let par = if args.parallel {
        Parallelism::Rayon
    } else {
        Parallelism::Serial
    };

    let plan = scheme.plan(&grid)?;
    let (qg, perm) = relayout_group_major(&q, &plan.gg)?;
    let (kg, _) = relayout_group_major(&k, &plan.gg)?;
    let (vg, _) = relayout_group_major(&v, &plan.gg)?;
    let (out, pairs) = grouped_block_attention_counted(&qg, &kg, &vg, &plan, &cfg, par)?;
    let out = gather_rows(&out, &invert_permutation(&perm))?;
    write_tensor(&args.out, &out)?;
    println!(
        "wrote {} ({} rows, d={d}, {pairs} pairs touched)",
        args.out.display(),
        n
    );

    if args.verify {
        let dense = dense_masked_attention(&q, &k, &v, &plan_to_token_mask(plan), &cfg)?;
        println!(
            "verify: max abs deviation vs dense oracle = {:.3e}",
            out.max_abs_diff(&dense)
        );
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CmdError> {
    let (scheme, grid) = scheme_of(&args.scheme)?;
    let par = if args.parallel {
        Parallelism::Rayon
    } else {
        Parallelism::Serial
    };
    let report = run_bench(&scheme, &grid, args.d, args.reps as usize, args.seed, par)?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serialize")
        );
    } else {
        println!("{report}");
    }
    Ok(())
}

fn cmd_massdist(args: MassdistArgs) -> Result<(), CmdError> {
    let grid = GridShape::new(args.grid.0.clone())?;
    let weights = read_tensor(&args.weights)?;
    let hist = attention_mass_by_distance(&weights, &grid, args.bins)?;

    if let Some(path) = &args.csv {
        std::fs::write(path, hist.to_csv()).map_err(|e| CmdError::Compute(e.to_string()))?;
        println!("wrote {}", path.display());
    }
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&hist).expect("histogram serialize")
        );
        return Ok(());
    }
    let total = hist.total_mass();
    let near = hist.cumulative_below(0.2);
    println!("queries      {}", weights.leading());
    println!("total mass   {total:.4}");
    println!(
        "mass below 0.2 normalized distance: {:.2}% ({near:.4})",
        100.0 * near / total
    );
    Ok(())
}
