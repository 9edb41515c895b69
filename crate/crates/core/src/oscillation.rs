//! Hölder seminorms, per-scale oscillation profiles, and vanishing-scale
//! classification.
//!
//! Everything here is a reduction over grid-point pairs. Reductions are pure
//! max-folds, so partitioning the scan across threads cannot change the
//! result. Scans beyond [`PAIR_SCAN_CAP`] pair evaluations switch to a
//! fixed-stride subsample and are flagged as sampled lower bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approximators::TruncationMap;
use crate::error::{HolderError, Result};
use crate::grid::{Grid, GridFunction, SourceNorm};
use crate::modulus::Modulus;

/// Hard cap on exact pair evaluations per scan.
pub const PAIR_SCAN_CAP: u64 = 400_000_000;

/// One reported scale of an oscillation profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub delta: f64,
    pub value: f64,
    pub pairs: u64,
}

/// Per-scale oscillation suprema. Scales with no qualifying pairs are
/// omitted, not zero-filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleProfile {
    /// Relative band half-width η: a pair qualifies for scale δ when its
    /// distance lies in `[δ(1−η), δ(1+η)]`. Zero for cumulative and far
    /// profiles, which use one-sided conditions.
    pub band: f64,
    pub entries: Vec<ProfileEntry>,
}

impl ScaleProfile {
    pub fn finest(&self) -> Option<&ProfileEntry> {
        self.entries.first()
    }

    pub fn coarsest(&self) -> Option<&ProfileEntry> {
        self.entries.last()
    }

    pub fn max_value(&self) -> f64 {
        self.entries.iter().fold(0.0, |a, e| a.max(e.value))
    }
}

/// Condition selecting the pair set of a far profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FarMode {
    /// `min(‖x‖, ‖y‖) > δ`: both points beyond the radius.
    Min,
    /// `max(‖x‖, ‖y‖) > δ`: at least one point beyond the radius.
    Max,
}

/// Result of a full pair scan for the seminorm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormScan {
    pub value: f64,
    /// False when the scan subsampled; the value is then a lower bound.
    pub exact: bool,
    pub pairs_evaluated: u64,
}

/// Pre-extracted geometry for allocation-free pair scans.
struct PairContext<'a> {
    coords: Vec<f64>,
    values: &'a [f64],
    dim: usize,
    ycomp: usize,
    n: usize,
    norms: crate::grid::NormSpec,
}

impl<'a> PairContext<'a> {
    fn new(f: &'a GridFunction) -> Self {
        let grid = f.grid();
        let n = grid.len();
        let dim = grid.dim();
        let mut coords = Vec::with_capacity(n * dim);
        for i in 0..n {
            coords.extend_from_slice(&grid.point(i));
        }
        PairContext {
            coords,
            values: f.values(),
            dim,
            ycomp: f.ycomp(),
            n,
            norms: f.norms(),
        }
    }

    #[inline]
    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.ycomp..(i + 1) * self.ycomp]
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.norms.x.diff(self.point(i), self.point(j))
    }

    #[inline]
    fn ydiff(&self, i: usize, j: usize) -> f64 {
        self.norms.y.diff(self.value(i), self.value(j))
    }
}

/// Validates that the modulus evaluates across the full distance range of the
/// grid, so the hot loops can unwrap.
fn precheck_modulus(f: &GridFunction, m: &Modulus) -> Result<()> {
    let grid = f.grid();
    let diam = f.norms().x.diff(grid.origin(), &grid.upper());
    m.eval(grid.min_spacing())?;
    m.eval(diam)?;
    Ok(())
}

fn total_pairs(n: usize) -> u64 {
    (n as u64) * (n as u64 - 1) / 2
}

/// Maps a rank `p` in `[0, n(n-1)/2)` to the pair `(i, j)`, `i < j`.
fn unrank_pair(p: u64, n: u64) -> (usize, usize) {
    // Solve i(2n - i - 1)/2 <= p < (i+1)(2n - i - 2)/2 for i.
    let pf = p as f64;
    let nf = n as f64;
    let mut i = (nf - 0.5 - ((nf - 0.5) * (nf - 0.5) - 2.0 * pf).max(0.0).sqrt()).floor() as u64;
    loop {
        let start = i * (2 * n - i - 1) / 2;
        if start > p {
            i -= 1;
            continue;
        }
        let next = (i + 1) * (2 * n - i - 2) / 2;
        if p >= next {
            i += 1;
            continue;
        }
        let j = i + 1 + (p - start);
        return (i as usize, j as usize);
    }
}

/// Exact supremum of the pair oscillation over all distinct grid-point pairs.
///
/// A lower bound for the continuum seminorm; exact for fixtures whose
/// extremal pairs lie on the grid.
pub fn holder_seminorm(f: &GridFunction, m: &Modulus) -> Result<f64> {
    Ok(seminorm_scan(f, m)?.value)
}

pub fn seminorm_scan(f: &GridFunction, m: &Modulus) -> Result<SeminormScan> {
    seminorm_scan_with_cap(f, m, PAIR_SCAN_CAP)
}

/// Like [`seminorm_scan`] but with an explicit pair-evaluation cap.
pub fn seminorm_scan_with_cap(f: &GridFunction, m: &Modulus, cap: u64) -> Result<SeminormScan> {
    let ctx = PairContext::new(f);
    if ctx.n < 2 {
        return Err(HolderError::Argument(
            "seminorm needs a grid with at least 2 points".into(),
        ));
    }
    precheck_modulus(f, m)?;
    let total = total_pairs(ctx.n);
    if total <= cap {
        let value = (0..ctx.n - 1)
            .into_par_iter()
            .map(|i| {
                let mut best = 0.0_f64;
                for j in i + 1..ctx.n {
                    let d = ctx.dist(i, j);
                    let osc = ctx.ydiff(i, j) / m.eval(d).unwrap();
                    best = best.max(osc);
                }
                best
            })
            .reduce(|| 0.0, f64::max);
        Ok(SeminormScan { value, exact: true, pairs_evaluated: total })
    } else {
        // Fixed-stride quasi-random subsample: a lower bound, deterministic
        // regardless of thread count.
        let stride = subsample_stride(total);
        let value = (0..cap)
            .into_par_iter()
            .map(|k| {
                let p = (k as u128 * stride as u128 % total as u128) as u64;
                let (i, j) = unrank_pair(p, ctx.n as u64);
                let d = ctx.dist(i, j);
                ctx.ydiff(i, j) / m.eval(d).unwrap()
            })
            .reduce(|| 0.0, f64::max);
        Ok(SeminormScan { value, exact: false, pairs_evaluated: cap })
    }
}

/// Odd stride coprime with `total`, derived from a fixed multiplier.
fn subsample_stride(total: u64) -> u64 {
    let mut s = 2_654_435_761_u64 % total;
    if s == 0 {
        s = 1;
    }
    while gcd(s, total) != 1 {
        s += 1;
    }
    s
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Banded per-scale oscillation suprema: scale δ collects pairs with distance
/// in `[δ(1−band), δ(1+band)]`.
pub fn scale_profile(
    f: &GridFunction,
    m: &Modulus,
    scales: &[f64],
    band: f64,
) -> Result<ScaleProfile> {
    if !(band > 0.0 && band < 0.5) {
        return Err(HolderError::Argument(format!(
            "band must lie in (0, 0.5), got {band}"
        )));
    }
    check_scales(scales)?;
    let ctx = PairContext::new(f);
    precheck_modulus(f, m)?;
    let lo: Vec<f64> = scales.iter().map(|s| s * (1.0 - band)).collect();
    let hi: Vec<f64> = scales.iter().map(|s| s * (1.0 + band)).collect();

    let acc = (0..ctx.n.saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let mut local = vec![(0.0_f64, 0u64); scales.len()];
            for j in i + 1..ctx.n {
                let d = ctx.dist(i, j);
                let mut osc = f64::NAN;
                for (s, slot) in local.iter_mut().enumerate() {
                    if d >= lo[s] && d <= hi[s] {
                        if osc.is_nan() {
                            osc = ctx.ydiff(i, j) / m.eval(d).unwrap();
                        }
                        slot.0 = slot.0.max(osc);
                        slot.1 += 1;
                    }
                }
            }
            local
        })
        .reduce(
            || vec![(0.0_f64, 0u64); scales.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.0 = x.0.max(y.0);
                    x.1 += y.1;
                }
                a
            },
        );

    Ok(ScaleProfile {
        band,
        entries: scales
            .iter()
            .zip(acc)
            .filter(|(_, (_, c))| *c > 0)
            .map(|(&delta, (value, pairs))| ProfileEntry { delta, value, pairs })
            .collect(),
    })
}

/// Cumulative small-scale profile: the entry at δ is the supremum over all
/// pairs with distance `≤ δ`. Monotone non-decreasing in δ by construction.
pub fn cumulative_profile(
    f: &GridFunction,
    m: &Modulus,
    scales: &[f64],
) -> Result<ScaleProfile> {
    check_scales(scales)?;
    let ctx = PairContext::new(f);
    precheck_modulus(f, m)?;

    let acc = (0..ctx.n.saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let mut local = vec![(0.0_f64, 0u64); scales.len()];
            for j in i + 1..ctx.n {
                let d = ctx.dist(i, j);
                // First ladder scale >= d, if any; coarser buckets get the
                // running max afterwards.
                let Some(s0) = scales.iter().position(|&s| d <= s) else {
                    continue;
                };
                let osc = ctx.ydiff(i, j) / m.eval(d).unwrap();
                local[s0].0 = local[s0].0.max(osc);
                for slot in local[s0..].iter_mut() {
                    slot.1 += 1;
                }
            }
            local
        })
        .reduce(
            || vec![(0.0_f64, 0u64); scales.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.0 = x.0.max(y.0);
                    x.1 += y.1;
                }
                a
            },
        );

    let mut entries = Vec::with_capacity(scales.len());
    let mut running = 0.0_f64;
    for (&delta, (bucket, pairs)) in scales.iter().zip(acc) {
        running = running.max(bucket);
        if pairs > 0 {
            entries.push(ProfileEntry { delta, value: running, pairs });
        }
    }
    Ok(ScaleProfile { band: 0.0, entries })
}

/// Far-scale profile: for each δ, the supremum over pairs whose point norms
/// satisfy the [`FarMode`] condition.
pub fn far_profile(
    f: &GridFunction,
    m: &Modulus,
    deltas: &[f64],
    mode: FarMode,
) -> Result<ScaleProfile> {
    check_scales(deltas)?;
    let ctx = PairContext::new(f);
    precheck_modulus(f, m)?;
    let norms_of: Vec<f64> = (0..ctx.n).map(|i| ctx.norms.x.apply(ctx.point(i))).collect();

    let acc = (0..ctx.n.saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let mut local = vec![(0.0_f64, 0u64); deltas.len()];
            for j in i + 1..ctx.n {
                let key = match mode {
                    FarMode::Min => norms_of[i].min(norms_of[j]),
                    FarMode::Max => norms_of[i].max(norms_of[j]),
                };
                // Qualifies for every delta < key; deltas are sorted.
                let mut osc = f64::NAN;
                for (s, slot) in local.iter_mut().enumerate() {
                    if deltas[s] < key {
                        if osc.is_nan() {
                            osc = ctx.ydiff(i, j) / m.eval(ctx.dist(i, j)).unwrap();
                        }
                        slot.0 = slot.0.max(osc);
                        slot.1 += 1;
                    } else {
                        break;
                    }
                }
            }
            local
        })
        .reduce(
            || vec![(0.0_f64, 0u64); deltas.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.0 = x.0.max(y.0);
                    x.1 += y.1;
                }
                a
            },
        );

    Ok(ScaleProfile {
        band: 0.0,
        entries: deltas
            .iter()
            .zip(acc)
            .filter(|(_, (_, c))| *c > 0)
            .map(|(&delta, (value, pairs))| ProfileEntry { delta, value, pairs })
            .collect(),
    })
}

fn check_scales(scales: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(HolderError::Argument("scale list must be nonempty".into()));
    }
    for w in scales.windows(2) {
        if w[0] >= w[1] {
            return Err(HolderError::Argument(
                "scales must be strictly increasing".into(),
            ));
        }
    }
    if scales[0] <= 0.0 {
        return Err(HolderError::Argument("scales must be positive".into()));
    }
    Ok(())
}

/// Thresholds for the three vanishing verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub small: f64,
    pub large: f64,
    pub far: f64,
}

impl Thresholds {
    pub fn uniform(eps: f64) -> Self {
        Thresholds { small: eps, large: eps, far: eps }
    }
}

/// Scale ladders used by [`classify_vanishing`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub scales: Vec<f64>,
    pub far_deltas: Vec<f64>,
    pub band: f64,
}

impl ClassifyConfig {
    /// Doubling ladder from the finest spacing to the box diameter, and far
    /// radii up to the largest point norm.
    pub fn auto(grid: &Grid, norm: SourceNorm) -> Self {
        let s_min = grid.min_spacing();
        let diam = norm.diff(grid.origin(), &grid.upper());
        let mut scales = Vec::new();
        let mut s = s_min;
        while s <= diam * 1.0001 {
            scales.push(s);
            s *= 2.0;
        }
        if scales.is_empty() {
            scales.push(s_min);
        }
        let max_norm = grid.max_point_norm(norm);
        let mut far_deltas = Vec::new();
        let mut d = s_min;
        while d < max_norm {
            far_deltas.push(d);
            d *= 2.0;
        }
        if far_deltas.is_empty() {
            far_deltas.push(s_min);
        }
        ClassifyConfig { scales, far_deltas, band: 0.25 }
    }
}

/// Membership evidence for the three vanishing subspaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingVerdict {
    pub small: bool,
    pub large: bool,
    pub far: bool,
    pub thresholds: Thresholds,
    pub seminorm: f64,
    /// Banded profile value at the finest reported scale.
    pub small_value: f64,
    /// Banded profile value at the coarsest reported scale.
    pub large_value: f64,
    /// Min-mode far profile value at the largest reported radius.
    pub far_value: f64,
    pub profile: ScaleProfile,
    pub far_evidence: ScaleProfile,
}

impl VanishingVerdict {
    pub fn all(&self) -> bool {
        self.small && self.large && self.far
    }
}

pub fn classify_vanishing(
    f: &GridFunction,
    m: &Modulus,
    thresholds: Thresholds,
) -> Result<VanishingVerdict> {
    let config = ClassifyConfig::auto(f.grid(), f.norms().x);
    classify_vanishing_with(f, m, thresholds, &config)
}

pub fn classify_vanishing_with(
    f: &GridFunction,
    m: &Modulus,
    thresholds: Thresholds,
    config: &ClassifyConfig,
) -> Result<VanishingVerdict> {
    if !(thresholds.small > 0.0 && thresholds.large > 0.0 && thresholds.far > 0.0) {
        return Err(HolderError::Argument("thresholds must be positive".into()));
    }
    let profile = scale_profile(f, m, &config.scales, config.band)?;
    let far_evidence = far_profile(f, m, &config.far_deltas, FarMode::Min)?;
    let seminorm = holder_seminorm(f, m)?;

    let small_value = profile.finest().map_or(0.0, |e| e.value);
    let large_value = profile.coarsest().map_or(0.0, |e| e.value);
    let far_value = far_evidence.coarsest().map_or(0.0, |e| e.value);

    Ok(VanishingVerdict {
        small: small_value <= thresholds.small,
        large: large_value <= thresholds.large,
        far: far_value <= thresholds.far,
        thresholds,
        seminorm,
        small_value,
        large_value,
        far_value,
        profile,
        far_evidence,
    })
}

/// Grid Lipschitz constant: max of `‖f(x)−f(y)‖_Y / ‖x−y‖_X` over all pairs.
pub fn grid_lipschitz(f: &GridFunction) -> Result<f64> {
    let ctx = PairContext::new(f);
    if ctx.n < 2 {
        return Err(HolderError::Argument(
            "lipschitz constant needs at least 2 points".into(),
        ));
    }
    Ok((0..ctx.n - 1)
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0_f64;
            for j in i + 1..ctx.n {
                best = best.max(ctx.ydiff(i, j) / ctx.dist(i, j));
            }
            best
        })
        .reduce(|| 0.0, f64::max))
}

/// Library-certified Lipschitz maps for precomposition checks.
#[derive(Debug, Clone, PartialEq)]
pub enum LipschitzMap {
    Identity,
    /// `x ↦ c·x`.
    Scale(f64),
    /// Radial truncation with its bound of 5.
    Truncation(TruncationMap),
    /// Coordinatewise soft threshold, 1-Lipschitz.
    SoftThreshold { r: f64 },
}

impl LipschitzMap {
    pub fn lip(&self) -> f64 {
        match self {
            LipschitzMap::Identity => 1.0,
            LipschitzMap::Scale(c) => c.abs(),
            LipschitzMap::Truncation(_) => 5.0,
            LipschitzMap::SoftThreshold { .. } => 1.0,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            LipschitzMap::Identity => x.to_vec(),
            LipschitzMap::Scale(c) => x.iter().map(|v| c * v).collect(),
            LipschitzMap::Truncation(t) => t.apply(x),
            LipschitzMap::SoftThreshold { r } => x
                .iter()
                .map(|&t| {
                    if t <= -r {
                        t + r
                    } else if t >= *r {
                        t - r
                    } else {
                        0.0
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecomposeRow {
    pub delta: f64,
    pub composed_value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Outcome of checking that precomposition by a Lipschitz map keeps the
/// small-scale profile controlled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecomposeReport {
    pub lip: f64,
    /// Doubling factor `C_db^{⌈log₂ L⌉}` bounding `ω(L·d)/ω(d)` for `L ≥ 1`.
    pub factor: f64,
    pub rows: Vec<PrecomposeRow>,
    pub all_pass: bool,
}

/// Verifies `profile(f∘τ, δ) ≤ C(C_db, Lip τ) · profile(f, Lip τ · δ)` over
/// the automatic scale ladder, where the right-hand profile is cumulative so
/// the comparison covers every image distance up to `Lip τ · δ (1+band)`.
pub fn lip_precompose_check(
    f: &GridFunction,
    tau: &LipschitzMap,
    m: &Modulus,
) -> Result<PrecomposeReport> {
    let grid = f.grid();
    let composed_values: Vec<f64> = {
        let mut vals = Vec::with_capacity(grid.len() * f.ycomp());
        for i in 0..grid.len() {
            let image = tau.apply(&grid.point(i));
            let inside = image
                .iter()
                .enumerate()
                .all(|(a, &v)| v >= grid.origin()[a] - 1e-12 && v <= grid.upper()[a] + 1e-12);
            if !inside {
                return Err(HolderError::Argument(format!(
                    "map sends grid point {i} outside the box; not certified for this grid"
                )));
            }
            vals.extend(f.eval_interp(&grid.clamp_point(&image))?);
        }
        vals
    };
    let composed = f.with_values(composed_values, format!("{}∘τ", f.label()))?;

    let config = ClassifyConfig::auto(grid, f.norms().x);
    let lhs = scale_profile(&composed, m, &config.scales, config.band)?;

    let lip = tau.lip();
    let cert_grid: Vec<f64> = config.scales.clone();
    let c_db = m.doubling_constant(&cert_grid)?;
    let factor = if lip > 1.0 {
        c_db.powi(lip.log2().ceil() as i32)
    } else {
        1.0
    };

    // Image distances can drop below the grid resolution; the interpolant's
    // oscillation there is controlled by the adjacent-pair oscillation, so
    // the comparison scale is floored at one spacing.
    let floor = grid.min_spacing();
    let rhs_scales: Vec<f64> = lhs
        .entries
        .iter()
        .map(|e| (e.delta * lip.max(f64::MIN_POSITIVE) * (1.0 + config.band)).max(floor))
        .collect();
    let mut rows = Vec::new();
    let mut all_pass = true;
    if !rhs_scales.is_empty() {
        let mut unique = rhs_scales.clone();
        unique.sort_by(f64::total_cmp);
        unique.dedup();
        let rhs = cumulative_profile(f, m, &unique)?;
        for (entry, scale) in lhs.entries.iter().zip(&rhs_scales) {
            // Cumulative profiles omit empty scales; look up the matching one.
            let bound_value = rhs
                .entries
                .iter()
                .filter(|e| e.delta <= scale * (1.0 + 1e-12))
                .last()
                .map_or(0.0, |e| e.value);
            let bound = factor * bound_value * (1.0 + 1e-9) + 1e-12;
            let pass = entry.value <= bound;
            all_pass &= pass;
            rows.push(PrecomposeRow {
                delta: entry.delta,
                composed_value: entry.value,
                bound,
                pass,
            });
        }
    }
    Ok(PrecomposeReport { lip, factor, rows, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridFunction, NormSpec};
    use approx::assert_relative_eq;

    fn tent(a: f64, b: f64, h: f64) -> GridFunction {
        let grid = Grid::line(a, b, h).unwrap();
        GridFunction::sample_scalar(grid, NormSpec::default(), "tent", |x| {
            (1.0 - x[0].abs()).max(0.0)
        })
        .unwrap()
    }

    #[test]
    fn constant_function_has_zero_seminorm() {
        let grid = Grid::line(0.0, 1.0, 0.25).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "c", |_| 2.5).unwrap();
        let m = Modulus::power(0.5).unwrap();
        assert_eq!(holder_seminorm(&f, &m).unwrap(), 0.0);
    }

    #[test]
    fn tent_peak_seminorm() {
        // Peak-1 tent on [0, 2n] with peak at n: seminorm n^{-α} at the pair (0, n).
        for n in [1u32, 4] {
            let nf = n as f64;
            let grid = Grid::line(0.0, 2.0 * nf, 1.0 / 64.0).unwrap();
            let f = GridFunction::sample_scalar(grid, NormSpec::default(), "a2", |x| {
                if x[0] <= nf { x[0] / nf } else { (2.0 * nf - x[0]) / nf }
            })
            .unwrap();
            let m = Modulus::power(0.5).unwrap();
            let s = holder_seminorm(&f, &m).unwrap();
            assert_relative_eq!(s, nf.powf(-0.5), epsilon = 1e-9);
        }
    }

    #[test]
    fn seminorm_matches_double_loop_oracle_bitexact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let grid = Grid::line(0.0, 11.0, 1.0).unwrap();
        let values: Vec<f64> = (0..12).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let f = GridFunction::new(grid, 1, values.clone(), NormSpec::default(), "r").unwrap();
        let m = Modulus::power(0.5).unwrap();
        // Independent double loop.
        let mut oracle = 0.0_f64;
        for i in 0..12usize {
            for j in 0..12usize {
                if i == j {
                    continue;
                }
                let d = (i as f64 - j as f64).abs();
                oracle = oracle.max((values[i] - values[j]).abs() / d.sqrt());
            }
        }
        let got = holder_seminorm(&f, &m).unwrap();
        assert_eq!(got.to_bits(), oracle.to_bits());
    }

    #[test]
    fn subsampled_scan_is_deterministic_lower_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let grid = Grid::line(0.0, 63.0, 1.0).unwrap();
        let values: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = GridFunction::new(grid, 1, values, NormSpec::default(), "s").unwrap();
        let m = Modulus::power(0.5).unwrap();
        let exact = seminorm_scan(&f, &m).unwrap();
        assert!(exact.exact);
        let sub1 = seminorm_scan_with_cap(&f, &m, 500).unwrap();
        let sub2 = seminorm_scan_with_cap(&f, &m, 500).unwrap();
        assert!(!sub1.exact);
        assert_eq!(sub1, sub2);
        assert!(sub1.value <= exact.value);
        assert!(sub1.value > 0.0);
    }

    #[test]
    fn unrank_pair_covers_all_pairs() {
        let n = 23u64;
        let total = total_pairs(n as usize);
        let mut seen = std::collections::HashSet::new();
        for p in 0..total {
            let (i, j) = unrank_pair(p, n);
            assert!(i < j && j < n as usize);
            assert!(seen.insert((i, j)));
        }
        assert_eq!(seen.len() as u64, total);
    }

    #[test]
    fn linear_function_profile_scaling() {
        let grid = Grid::line(0.0, 8.0, 0.125).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "x", |x| x[0]).unwrap();
        let m = Modulus::power(0.5).unwrap();
        let profile = scale_profile(&f, &m, &[0.5, 1.0, 2.0], 0.25).unwrap();
        assert_eq!(profile.entries.len(), 3);
        for e in &profile.entries {
            // max at the band's upper edge: sqrt(delta * 1.25), realized on grid.
            let expected = (e.delta * 1.25).sqrt();
            assert_relative_eq!(e.value, expected, max_relative = 0.02);
        }
        // Constant -> all zeros.
        let c = GridFunction::sample_scalar(
            Grid::line(0.0, 8.0, 0.125).unwrap(),
            NormSpec::default(),
            "c",
            |_| 1.0,
        )
        .unwrap();
        let cp = scale_profile(&c, &m, &[0.5, 1.0, 2.0], 0.25).unwrap();
        assert!(cp.entries.iter().all(|e| e.value == 0.0));
    }

    #[test]
    fn profile_matches_double_loop_oracle() {
        // Peak-1 tent on [0, 8] (peak at 4), alpha = 0.5, scales {1, 2, 4}.
        let nf = 4.0;
        let grid = Grid::line(0.0, 8.0, 0.25).unwrap();
        let f = GridFunction::sample_scalar(grid.clone(), NormSpec::default(), "a2", |x| {
            if x[0] <= nf { x[0] / nf } else { (2.0 * nf - x[0]) / nf }
        })
        .unwrap();
        let m = Modulus::power(0.5).unwrap();
        let band = 0.25;
        let scales = [1.0, 2.0, 4.0];
        let profile = scale_profile(&f, &m, &scales, band).unwrap();
        for (k, &delta) in scales.iter().enumerate() {
            let mut oracle = 0.0_f64;
            let mut count = 0u64;
            for i in 0..grid.len() {
                for j in i + 1..grid.len() {
                    let d = (grid.point(i)[0] - grid.point(j)[0]).abs();
                    if d >= delta * (1.0 - band) && d <= delta * (1.0 + band) {
                        count += 1;
                        oracle = oracle
                            .max((f.value(i)[0] - f.value(j)[0]).abs() / d.sqrt());
                    }
                }
            }
            assert_eq!(profile.entries[k].pairs, count);
            assert_eq!(profile.entries[k].value.to_bits(), oracle.to_bits());
        }
    }

    #[test]
    fn far_profile_compact_support_vanishes() {
        let f = tent(-8.0, 8.0, 0.125);
        let m = Modulus::power(0.5).unwrap();
        let far = far_profile(&f, &m, &[2.0, 4.0], FarMode::Min).unwrap();
        for e in &far.entries {
            assert_eq!(e.value, 0.0);
        }
    }

    #[test]
    fn far_min_dominated_by_far_max() {
        let grid = Grid::line(-20.0, 20.0, 0.25).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "sin_decay", |x| {
            x[0].sin() / (1.0 + x[0].abs())
        })
        .unwrap();
        let m = Modulus::power(0.5).unwrap();
        let deltas = [1.0, 2.0, 4.0, 8.0];
        let fmin = far_profile(&f, &m, &deltas, FarMode::Min).unwrap();
        let fmax = far_profile(&f, &m, &deltas, FarMode::Max).unwrap();
        for (a, b) in fmin.entries.iter().zip(&fmax.entries) {
            assert!(a.value <= b.value + 1e-15, "min {} vs max {}", a.value, b.value);
            assert!(a.pairs <= b.pairs);
        }
    }

    #[test]
    fn far_max_controlled_by_far_min_with_splitting_factor() {
        // Splitting a crossing pair at the radius-M sphere bounds the
        // max-mode value at radius R by
        // C_db·far_min(M) + C_db·‖f‖·ω(2M)/ω(R−M).
        let grid = Grid::line(-20.0, 20.0, 0.125).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "sin_decay", |x| {
            x[0].sin() / (1.0 + x[0].abs())
        })
        .unwrap();
        let m = Modulus::power(0.5).unwrap();
        let (radius_m, radius_r) = (2.0, 16.0);
        let c_db = 2.0_f64.sqrt();
        let fmin = far_profile(&f, &m, &[radius_m], FarMode::Min).unwrap();
        let fmax = far_profile(&f, &m, &[radius_r], FarMode::Max).unwrap();
        let seminorm = holder_seminorm(&f, &m).unwrap();
        let lhs = fmax.entries[0].value;
        let rhs = c_db * fmin.entries[0].value
            + c_db * seminorm * m.eval(2.0 * radius_m).unwrap()
                / m.eval(radius_r - radius_m).unwrap();
        assert!(lhs <= rhs, "far_max {lhs} vs splitting bound {rhs}");
    }

    #[test]
    fn classify_constant_all_true() {
        let grid = Grid::line(-4.0, 4.0, 0.5).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "c", |_| 1.0).unwrap();
        let m = Modulus::power(0.5).unwrap();
        let v = classify_vanishing(&f, &m, Thresholds::uniform(0.1)).unwrap();
        assert!(v.all());
        assert_eq!(v.seminorm, 0.0);
    }

    #[test]
    fn classify_identity_small_not_large() {
        let grid = Grid::line(0.0, 10.0, 1.0 / 128.0).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "x", |x| x[0]).unwrap();
        let m = Modulus::power(0.5).unwrap();
        let v = classify_vanishing(&f, &m, Thresholds::uniform(0.12)).unwrap();
        assert!(v.small, "small value {}", v.small_value);
        assert!(!v.large, "large value {}", v.large_value);
    }

    #[test]
    fn classify_tent_all_true_at_documented_scales() {
        let grid = Grid::line(-8.0, 8.0, 1.0 / 256.0).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "tent", |x| {
            (1.0 - x[0].abs()).max(0.0)
        })
        .unwrap();
        let m = Modulus::power(0.5).unwrap();
        let v = classify_vanishing(&f, &m, Thresholds::uniform(0.1)).unwrap();
        assert!(v.all(), "verdict {:?}", (v.small, v.large, v.far));
    }

    #[test]
    fn seminorm_homogeneous_and_shift_invariant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let grid = Grid::line(0.0, 16.0, 1.0).unwrap();
        // Dyadic values make the constant shift exact in floating point.
        let values: Vec<f64> = (0..17)
            .map(|_| (rng.gen_range(-4096..4096) as f64) / 4096.0)
            .collect();
        let f = GridFunction::new(grid, 1, values.clone(), NormSpec::default(), "f").unwrap();
        let m = Modulus::power(0.5).unwrap();
        let base = holder_seminorm(&f, &m).unwrap();

        for c in [0.5, -2.0, 3.25, -0.125, 7.0] {
            let scaled = f
                .with_values(values.iter().map(|v| c * v).collect(), "cf")
                .unwrap();
            let s = holder_seminorm(&scaled, &m).unwrap();
            assert_relative_eq!(s, c.abs() * base, max_relative = 1e-12);
        }

        let shifted = f
            .with_values(values.iter().map(|v| v + 42.5).collect(), "f+c")
            .unwrap();
        let s = holder_seminorm(&shifted, &m).unwrap();
        assert_eq!(s.to_bits(), base.to_bits());
        let p0 = scale_profile(&f, &m, &[1.0, 2.0], 0.25).unwrap();
        let p1 = scale_profile(&shifted, &m, &[1.0, 2.0], 0.25).unwrap();
        assert_eq!(p0, p1);
    }

    #[test]
    fn seminorm_zero_iff_constant() {
        let grid = Grid::line(0.0, 4.0, 0.5).unwrap();
        let m = Modulus::power(0.5).unwrap();
        let mut values = vec![1.5; 9];
        let f = GridFunction::new(grid.clone(), 1, values.clone(), NormSpec::default(), "c")
            .unwrap();
        assert_eq!(holder_seminorm(&f, &m).unwrap(), 0.0);
        values[4] += 1e-9;
        let g = GridFunction::new(grid, 1, values, NormSpec::default(), "c'").unwrap();
        assert!(holder_seminorm(&g, &m).unwrap() > 0.0);
    }

    #[test]
    fn precompose_identity_profiles_equal() {
        let f = tent(-8.0, 8.0, 0.125);
        let m = Modulus::power(0.5).unwrap();
        let report = lip_precompose_check(&f, &LipschitzMap::Identity, &m).unwrap();
        assert!(report.all_pass);
        assert_eq!(report.lip, 1.0);
        assert_eq!(report.factor, 1.0);
    }

    #[test]
    fn precompose_contraction_shrinks_profile() {
        let grid = Grid::line(-8.0, 8.0, 0.125).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "x", |x| x[0]).unwrap();
        let m = Modulus::power(0.5).unwrap();
        let report = lip_precompose_check(&f, &LipschitzMap::Scale(0.5), &m).unwrap();
        assert!(report.all_pass);
        for row in &report.rows {
            assert!(row.composed_value <= row.bound);
        }
    }

    #[test]
    fn max_profile_value_equals_seminorm_with_covering_scales() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let grid = Grid::new(vec![0.0, 0.0], vec![0.5, 0.5], vec![9, 9]).unwrap();
        let values: Vec<f64> = (0..81).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = GridFunction::new(grid, 1, values, NormSpec::default(), "rnd").unwrap();
        let m = Modulus::power(0.5).unwrap();
        // Geometric ladder with ratio < 1/(1-band)... band 0.49 and dense scales
        // cover every realizable distance.
        let mut scales = Vec::new();
        let mut s = 0.25;
        while s < 8.0 {
            scales.push(s);
            s *= 1.5;
        }
        let profile = scale_profile(&f, &m, &scales, 0.49).unwrap();
        let seminorm = holder_seminorm(&f, &m).unwrap();
        assert!(profile.max_value() <= seminorm + 1e-15);
        assert_relative_eq!(profile.max_value(), seminorm, max_relative = 1e-12);
    }
}
