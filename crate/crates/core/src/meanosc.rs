//! Dyadic-cube mean oscillation: BMO/VMO functionals over a fixed cube tree
//! and the numerical equivalence with the pairwise Hölder seminorm.
//!
//! The tree is anchored at the grid origin with base sidelength equal to the
//! largest axis extent of the box; level `k` cubes have side `base·2^{-k}`.
//! Grid points are assigned to cubes half-open per axis, with the top
//! boundary clamped into the last cube, so children partition the parent
//! exactly and parent averages are point-count-weighted means of child
//! averages.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration;
use crate::error::{HolderError, Result};
use crate::grid::{Grid, GridFunction, NormSpec};
use crate::modulus::{Modulus, ModulusCertificate};
use crate::oscillation::{holder_seminorm, ProfileEntry, ScaleProfile};

/// Statistics of one dyadic cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeStat {
    pub level: u32,
    pub anchor: Vec<i64>,
    pub sidelength: f64,
    pub count: u64,
    /// Discrete average `⟨f⟩_Q` over contained grid points.
    pub mean: Vec<f64>,
    /// `O^ω(f;Q) = (1/ω(ℓ(Q))) · mean of ‖f − ⟨f⟩_Q‖_Y`.
    pub mean_osc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: u32,
    pub sidelength: f64,
    pub cubes: Vec<CubeStat>,
}

/// The dyadic tree with per-cube statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeStats {
    pub base_origin: Vec<f64>,
    pub base_side: f64,
    pub min_level: u32,
    pub max_level: u32,
    pub dim: usize,
    pub norms: NormSpec,
    pub levels: Vec<LevelStats>,
    /// Cubes in the covering lattice that contained no grid point.
    pub omitted: Vec<(u32, Vec<i64>)>,
    lookup: Vec<BTreeMap<Vec<i64>, usize>>,
}

impl CubeStats {
    pub fn sidelength(&self, level: u32) -> f64 {
        self.base_side / 2.0_f64.powi(level as i32)
    }

    /// Anchor of the cube containing a point at the given level.
    ///
    /// This formula is the membership convention: floor of the scaled offset,
    /// clamped into the covering lattice.
    pub fn anchor_of(&self, point: &[f64], level: u32, grid: &Grid) -> Vec<i64> {
        let side = self.sidelength(level);
        (0..self.dim)
            .map(|a| {
                let extent = (grid.shape()[a] - 1) as f64 * grid.spacing()[a];
                let n_cubes = ((extent / side) - 1e-9).ceil().max(1.0) as i64;
                let raw = ((point[a] - self.base_origin[a]) / side).floor() as i64;
                raw.clamp(0, n_cubes - 1)
            })
            .collect()
    }

    pub fn find(&self, level: u32, anchor: &[i64]) -> Option<&CubeStat> {
        let li = (level - self.min_level) as usize;
        self.lookup
            .get(li)
            .and_then(|m| m.get(anchor))
            .map(|&i| &self.levels[li].cubes[i])
    }

    /// Lower corner of a cube in absolute coordinates.
    pub fn cube_corner(&self, level: u32, anchor: &[i64]) -> Vec<f64> {
        let side = self.sidelength(level);
        anchor
            .iter()
            .enumerate()
            .map(|(a, &i)| self.base_origin[a] + i as f64 * side)
            .collect()
    }

    /// Distance from the origin to the closed hull of the cube, in the source norm.
    pub fn cube_dist_to_origin(&self, level: u32, anchor: &[i64]) -> f64 {
        let lo = self.cube_corner(level, anchor);
        let side = self.sidelength(level);
        let clamped: Vec<f64> = lo
            .iter()
            .map(|&l| 0.0_f64.clamp(l, l + side))
            .collect();
        self.norms.x.apply(&clamped)
    }

    pub fn total_cubes(&self) -> usize {
        self.levels.iter().map(|l| l.cubes.len()).sum()
    }
}

/// Builds per-cube averages and modulus-weighted mean oscillations for all
/// levels in `[min_level, max_level]`.
pub fn build_cube_stats(
    f: &GridFunction,
    m: &Modulus,
    min_level: u32,
    max_level: u32,
) -> Result<CubeStats> {
    if min_level > max_level {
        return Err(HolderError::Argument(format!(
            "min_level {min_level} exceeds max_level {max_level}"
        )));
    }
    let grid = f.grid();
    let dim = grid.dim();
    let base_side = (0..dim)
        .map(|a| (grid.shape()[a] - 1) as f64 * grid.spacing()[a])
        .fold(0.0_f64, f64::max);
    let finest_side = base_side / 2.0_f64.powi(max_level as i32);
    let max_spacing = grid.spacing().iter().copied().fold(0.0_f64, f64::max);
    if finest_side < 2.0 * max_spacing - 1e-12 {
        return Err(HolderError::Argument(format!(
            "max_level {max_level} gives cubes of side {finest_side}, below two grid spacings"
        )));
    }

    let mut proto = CubeStats {
        base_origin: grid.origin().to_vec(),
        base_side,
        min_level,
        max_level,
        dim,
        norms: f.norms(),
        levels: Vec::new(),
        omitted: Vec::new(),
        lookup: Vec::new(),
    };

    let n = grid.len();
    let coords: Vec<Vec<f64>> = (0..n).map(|i| grid.point(i)).collect();

    let level_results: Vec<(LevelStats, Vec<(u32, Vec<i64>)>, BTreeMap<Vec<i64>, usize>)> =
        (min_level..=max_level)
            .into_par_iter()
            .map(|level| {
                let side = proto.sidelength(level);
                // Accumulate in flat point order for bit determinism.
                let mut acc: BTreeMap<Vec<i64>, (u64, Vec<f64>)> = BTreeMap::new();
                let mut anchors = Vec::with_capacity(n);
                for i in 0..n {
                    let anchor = proto.anchor_of(&coords[i], level, grid);
                    let entry = acc
                        .entry(anchor.clone())
                        .or_insert_with(|| (0, vec![0.0; f.ycomp()]));
                    entry.0 += 1;
                    for (s, v) in entry.1.iter_mut().zip(f.value(i)) {
                        *s += v;
                    }
                    anchors.push(anchor);
                }
                let omega_side = m.eval(side).unwrap_or(f64::NAN);
                let mut cubes: Vec<CubeStat> = acc
                    .iter()
                    .map(|(anchor, (count, sums))| CubeStat {
                        level,
                        anchor: anchor.clone(),
                        sidelength: side,
                        count: *count,
                        mean: sums.iter().map(|s| s / *count as f64).collect(),
                        mean_osc: 0.0,
                    })
                    .collect();
                let index: BTreeMap<Vec<i64>, usize> = cubes
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (c.anchor.clone(), i))
                    .collect();
                // Second pass: mean of ‖f − ⟨f⟩_Q‖_Y, again in flat order.
                let mut dev = vec![0.0_f64; cubes.len()];
                for i in 0..n {
                    let ci = index[&anchors[i]];
                    dev[ci] += f.norms().y.diff(f.value(i), &cubes[ci].mean);
                }
                for (c, d) in cubes.iter_mut().zip(dev) {
                    c.mean_osc = (d / c.count as f64) / omega_side;
                }
                // Record covering-lattice cubes that received no points.
                let mut omitted = Vec::new();
                let n_cubes: Vec<i64> = (0..dim)
                    .map(|a| {
                        let extent = (grid.shape()[a] - 1) as f64 * grid.spacing()[a];
                        (((extent / side) - 1e-9).ceil().max(1.0)) as i64
                    })
                    .collect();
                let lattice_total: i64 = n_cubes.iter().product();
                if lattice_total as usize != cubes.len() {
                    let mut idx = vec![0i64; dim];
                    'lattice: loop {
                        if !index.contains_key(&idx) {
                            omitted.push((level, idx.clone()));
                        }
                        let mut a = dim;
                        while a > 0 {
                            a -= 1;
                            idx[a] += 1;
                            if idx[a] < n_cubes[a] {
                                continue 'lattice;
                            }
                            idx[a] = 0;
                        }
                        break;
                    }
                }
                (LevelStats { level, sidelength: side, cubes }, omitted, index)
            })
            .collect();

    for (ls, omitted, index) in level_results {
        proto.levels.push(ls);
        proto.omitted.extend(omitted);
        proto.lookup.push(index);
    }
    Ok(proto)
}

/// Max of `O^ω(f;Q)` over the tree. Monotone under enlarging the level range.
pub fn bmo_norm(stats: &CubeStats) -> Result<f64> {
    if stats.levels.iter().all(|l| l.cubes.is_empty()) {
        return Err(HolderError::Argument("cube tree is empty".into()));
    }
    Ok(stats
        .levels
        .iter()
        .flat_map(|l| l.cubes.iter())
        .fold(0.0_f64, |a, c| a.max(c.mean_osc)))
}

/// Small/large/far VMO profiles extracted from the tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmoProfiles {
    /// Per-level max of `O^ω`, keyed by sidelength, finest first.
    pub by_sidelength: Vec<ProfileEntry>,
    /// Per-radius max over cubes whose hull lies beyond the radius.
    pub far: ScaleProfile,
}

impl VmoProfiles {
    /// Value at the finest sidelength (small-scale evidence).
    pub fn small_value(&self) -> f64 {
        self.by_sidelength.first().map_or(0.0, |e| e.value)
    }

    /// Value at the coarsest sidelength (large-scale evidence).
    pub fn large_value(&self) -> f64 {
        self.by_sidelength.last().map_or(0.0, |e| e.value)
    }

    pub fn far_value(&self) -> f64 {
        self.far.entries.last().map_or(0.0, |e| e.value)
    }
}

pub fn vmo_profiles(stats: &CubeStats) -> Result<VmoProfiles> {
    let deltas: Vec<f64> = (stats.min_level..=stats.max_level)
        .rev()
        .map(|l| stats.sidelength(l))
        .collect();
    vmo_profiles_with(stats, &deltas)
}

pub fn vmo_profiles_with(stats: &CubeStats, far_deltas: &[f64]) -> Result<VmoProfiles> {
    if stats.max_level - stats.min_level + 1 < 3 {
        return Err(HolderError::Argument(
            "vmo profiles need a tree spanning at least 3 levels".into(),
        ));
    }
    let mut by_sidelength: Vec<ProfileEntry> = stats
        .levels
        .iter()
        .map(|l| ProfileEntry {
            delta: l.sidelength,
            value: l.cubes.iter().fold(0.0_f64, |a, c| a.max(c.mean_osc)),
            pairs: l.cubes.len() as u64,
        })
        .collect();
    by_sidelength.sort_by(|a, b| a.delta.total_cmp(&b.delta));

    let mut far_entries = Vec::new();
    for &delta in far_deltas {
        let mut value = 0.0_f64;
        let mut count = 0u64;
        for l in &stats.levels {
            for c in &l.cubes {
                if stats.cube_dist_to_origin(c.level, &c.anchor) > delta {
                    value = value.max(c.mean_osc);
                    count += 1;
                }
            }
        }
        if count > 0 {
            far_entries.push(ProfileEntry { delta, value, pairs: count });
        }
    }
    Ok(VmoProfiles {
        by_sidelength,
        far: ScaleProfile { band: 0.0, entries: far_entries },
    })
}

/// Two-sided comparison of the pairwise seminorm with the BMO functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeyersComparison {
    pub seminorm: f64,
    pub bmo: f64,
    /// `bmo / seminorm`, bounded by the dimension ceiling `c1`.
    pub ratio_bmo_over_seminorm: f64,
    /// `seminorm / (dini · bmo)`, bounded by the dimension ceiling `c2`.
    pub ratio_seminorm_over_dini_bmo: f64,
    pub ceiling_bmo_over_seminorm: f64,
    pub ceiling_seminorm_over_dini_bmo: f64,
    pub within_ceilings: bool,
    /// Set for constant inputs where both ratios are 0/0.
    pub degenerate: bool,
}

/// Default level range: full dyadic depth while cubes still hold a couple of
/// grid points per axis.
pub fn default_levels(grid: &Grid) -> (u32, u32) {
    let base = (0..grid.dim())
        .map(|a| (grid.shape()[a] - 1) as f64 * grid.spacing()[a])
        .fold(0.0_f64, f64::max);
    let max_spacing = grid.spacing().iter().copied().fold(0.0_f64, f64::max);
    let mut max_level = 0u32;
    while base / 2.0_f64.powi(max_level as i32 + 1) >= 2.0 * max_spacing - 1e-12
        && max_level < 40
    {
        max_level += 1;
    }
    (0, max_level)
}

pub fn meyers_compare(
    f: &GridFunction,
    m: &Modulus,
    cert: &ModulusCertificate,
) -> Result<MeyersComparison> {
    if !cert.dini_constant.is_finite() {
        return Err(HolderError::Argument(
            "meyers comparison requires a finite dini constant".into(),
        ));
    }
    let (min_level, max_level) = default_levels(f.grid());
    let stats = build_cube_stats(f, m, min_level, max_level)?;
    let seminorm = holder_seminorm(f, m)?;
    let bmo = bmo_norm(&stats)?;
    let ceilings = calibration::shipped().dims_for(f.grid().dim())?;

    if seminorm == 0.0 || bmo == 0.0 {
        return Ok(MeyersComparison {
            seminorm,
            bmo,
            ratio_bmo_over_seminorm: 0.0,
            ratio_seminorm_over_dini_bmo: 0.0,
            ceiling_bmo_over_seminorm: ceilings.bmo_over_seminorm,
            ceiling_seminorm_over_dini_bmo: ceilings.seminorm_over_dini_bmo,
            within_ceilings: true,
            degenerate: true,
        });
    }
    let ratio_1 = bmo / seminorm;
    let ratio_2 = seminorm / (cert.dini_constant * bmo);
    Ok(MeyersComparison {
        seminorm,
        bmo,
        ratio_bmo_over_seminorm: ratio_1,
        ratio_seminorm_over_dini_bmo: ratio_2,
        ceiling_bmo_over_seminorm: ceilings.bmo_over_seminorm,
        ceiling_seminorm_over_dini_bmo: ceilings.seminorm_over_dini_bmo,
        within_ceilings: ratio_1 <= ceilings.bmo_over_seminorm
            && ratio_2 <= ceilings.seminorm_over_dini_bmo,
        degenerate: false,
    })
}

/// One telescoping increment `⟨f⟩_{Q_{k+1}} − ⟨f⟩_{Q_k}` along a point chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementCheck {
    pub level: u32,
    pub norm: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Result of reconstructing `f(x) − f(y)` through the dyadic chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelescopeRecord {
    pub ancestor_level: u32,
    pub ancestor_side: f64,
    pub distance: f64,
    /// `‖(chain_x + boundary_x) − (chain_y + boundary_y) − (f(x) − f(y))‖_Y`.
    pub residual: f64,
    pub identity_ok: bool,
    pub increments_x: Vec<IncrementCheck>,
    pub increments_y: Vec<IncrementCheck>,
    pub increments_ok: bool,
}

/// Reconstructs `f(x) − f(y)` by telescoping cube averages from the deepest
/// common ancestor down to `max_level`, plus the two boundary terms
/// `f(·) − ⟨f⟩_{Q_max(·)}`. The identity must close to `1e-10`; each
/// increment is bounded by `C · O^ω(f;Q_k) · ω(ℓ(Q_k))` where `C` is the
/// discrete averaging factor `max(2^n, count(Q_k)/count(Q_{k+1}))`.
pub fn dyadic_chain_reconstruct(
    stats: &CubeStats,
    f: &GridFunction,
    m: &Modulus,
    x: usize,
    y: usize,
) -> Result<TelescopeRecord> {
    if x == y {
        return Err(HolderError::Argument("points must be distinct".into()));
    }
    let grid = f.grid();
    let px = grid.point(x);
    let py = grid.point(y);

    // Deepest common level in the tree.
    let mut common: Option<u32> = None;
    for level in (stats.min_level..=stats.max_level).rev() {
        if stats.anchor_of(&px, level, grid) == stats.anchor_of(&py, level, grid) {
            common = Some(level);
            break;
        }
    }
    let Some(ancestor_level) = common else {
        return Err(HolderError::Argument(
            "points share no common ancestor cube in the tree".into(),
        ));
    };

    let chain = |p: &[f64]| -> Result<(Vec<IncrementCheck>, Vec<f64>, Vec<f64>)> {
        // Returns increment checks, the summed increments, and the deepest mean.
        let mut sum = vec![0.0_f64; f.ycomp()];
        let mut checks = Vec::new();
        let mut prev = lookup_mean(stats, p, ancestor_level, grid)?;
        for level in ancestor_level + 1..=stats.max_level {
            let parent_anchor = stats.anchor_of(p, level - 1, grid);
            let parent = stats
                .find(level - 1, &parent_anchor)
                .ok_or_else(|| HolderError::Argument("chain cube missing from tree".into()))?;
            let cur_stat = {
                let anchor = stats.anchor_of(p, level, grid);
                stats
                    .find(level, &anchor)
                    .ok_or_else(|| HolderError::Argument("chain cube missing from tree".into()))?
            };
            let cur = cur_stat.mean.clone();
            let inc_norm = f.norms().y.diff(&cur, &prev);
            for (s, (a, b)) in sum.iter_mut().zip(cur.iter().zip(&prev)) {
                *s += a - b;
            }
            let factor = (2.0_f64.powi(grid.dim() as i32))
                .max(parent.count as f64 / cur_stat.count as f64);
            let bound = factor * parent.mean_osc * m.eval(parent.sidelength)? + 1e-12;
            checks.push(IncrementCheck {
                level,
                norm: inc_norm,
                bound,
                pass: inc_norm <= bound,
            });
            prev = cur;
        }
        Ok((checks, sum, prev))
    };

    let (increments_x, sum_x, deep_mean_x) = chain(&px)?;
    let (increments_y, sum_y, deep_mean_y) = chain(&py)?;

    // f(x) − f(y) = (Σ increments_x − Σ increments_y) + boundary terms.
    let fx = f.value(x);
    let fy = f.value(y);
    let mut reconstructed = vec![0.0_f64; f.ycomp()];
    for c in 0..f.ycomp() {
        let boundary_x = fx[c] - deep_mean_x[c];
        let boundary_y = fy[c] - deep_mean_y[c];
        reconstructed[c] = (sum_x[c] + boundary_x) - (sum_y[c] + boundary_y);
    }
    let direct: Vec<f64> = fx.iter().zip(fy).map(|(a, b)| a - b).collect();
    let residual = f.norms().y.diff(&reconstructed, &direct);

    let increments_ok =
        increments_x.iter().all(|c| c.pass) && increments_y.iter().all(|c| c.pass);
    Ok(TelescopeRecord {
        ancestor_level,
        ancestor_side: stats.sidelength(ancestor_level),
        distance: f.dist(x, y),
        residual,
        identity_ok: residual < 1e-10,
        increments_x,
        increments_y,
        increments_ok,
    })
}

fn lookup_mean(stats: &CubeStats, p: &[f64], level: u32, grid: &Grid) -> Result<Vec<f64>> {
    let anchor = stats.anchor_of(p, level, grid);
    stats
        .find(level, &anchor)
        .map(|c| c.mean.clone())
        .ok_or_else(|| HolderError::Argument("cube missing from tree".into()))
}

/// Max over tree cubes (with ≥ 2 points) of the double-average ratio
/// `⨍_Q ⨍_Q ω(‖x−y‖) / ω(ℓ(Q))`.
pub fn max_avg_modulus_ratio(f: &GridFunction, m: &Modulus, stats: &CubeStats) -> Result<f64> {
    let grid = f.grid();
    let n = grid.len();
    let coords: Vec<Vec<f64>> = (0..n).map(|i| grid.point(i)).collect();

    let mut best = 0.0_f64;
    for ls in &stats.levels {
        // Group points by cube, in flat order.
        let mut members: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            members
                .entry(stats.anchor_of(&coords[i], ls.level, grid))
                .or_default()
                .push(i);
        }
        let omega_side = m.eval(ls.sidelength)?;
        let cube_best = members
            .par_iter()
            .map(|(_, pts)| {
                if pts.len() < 2 {
                    return 0.0;
                }
                let mut acc = 0.0_f64;
                for &i in pts {
                    for &j in pts {
                        let d = f.norms().x.diff(&coords[i], &coords[j]);
                        acc += m.eval(d).unwrap();
                    }
                }
                let mean = acc / (pts.len() * pts.len()) as f64;
                mean / omega_side
            })
            .reduce(|| 0.0, f64::max);
        best = best.max(cube_best);
    }
    Ok(best)
}

/// Export in CSV form: `level, anchor..., sidelength, count, mean_osc`.
pub fn cube_stats_csv(stats: &CubeStats) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let anchor_cols: Vec<String> = (0..stats.dim).map(|a| format!("anchor{a}")).collect();
    let _ = writeln!(out, "level,{},sidelength,count,mean_osc", anchor_cols.join(","));
    for ls in &stats.levels {
        for c in &ls.cubes {
            let anchors: Vec<String> = c.anchor.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                c.level,
                anchors.join(","),
                c.sidelength,
                c.count,
                c.mean_osc
            );
        }
    }
    out
}
