//! Constructive approximation operators: radial truncation, parameter
//! selection, mollification, inf-convolution envelopes, and bump
//! multiplication, each with the quantitative bounds that make its use
//! certifiable on a grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HolderError, Result};
use crate::grid::{GridFunction, SourceNorm};
use crate::modulus::Modulus;
use crate::oscillation::{
    cumulative_profile, far_profile, grid_lipschitz, holder_seminorm, scale_profile,
    seminorm_scan, ClassifyConfig, FarMode, ScaleProfile,
};

/// Radial truncation: identity inside `B(0, M)`, the quadratic shrink
/// `((2M−‖x‖)/M)²·x` on the shell `M ≤ ‖x‖ < 2M`, zero outside `B(0, 2M)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationMap {
    pub radius: f64,
    pub norm: SourceNorm,
}

impl TruncationMap {
    pub fn new(radius: f64, norm: SourceNorm) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(HolderError::Argument(format!(
                "truncation radius must be positive and finite, got {radius}"
            )));
        }
        Ok(TruncationMap { radius, norm })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.radius;
        let r = self.norm.apply(x);
        if r < m {
            x.to_vec()
        } else if r < 2.0 * m {
            let s = ((2.0 * m - r) / m).powi(2);
            x.iter().map(|v| s * v).collect()
        } else {
            vec![0.0; x.len()]
        }
    }
}

/// One tested radius `R` of the shell-contraction clause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionClause {
    pub r: f64,
    /// The bound `5R/√M`.
    pub bound: f64,
    pub max_ratio: f64,
    pub qualifying_pairs: u64,
    /// False when no qualifying pairs were found; the clause is then
    /// untested rather than failed.
    pub tested: bool,
    pub ok: bool,
}

/// Sampled certificate of the truncation map's Lipschitz and contraction
/// bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationCertificate {
    pub radius: f64,
    pub dim: usize,
    pub samples: u64,
    pub seed: u64,
    /// Max of `‖τx−τz‖/‖x−z‖`; must not exceed `5 + 1e-9`.
    pub max_lipschitz_ratio: f64,
    pub lipschitz_ok: bool,
    pub contraction: Vec<ContractionClause>,
    pub all_ok: bool,
}

/// Certifies the global 5-Lipschitz bound over seeded random pairs and, for
/// each tested `R < M`, the contraction bound `5R/√M` over pairs with one
/// point outside `B(0, M)` and both images inside `B(0, R)`.
pub fn truncation_certify(
    t: &TruncationMap,
    dim: usize,
    samples: u64,
    seed: u64,
) -> Result<TruncationCertificate> {
    if samples < 1000 {
        return Err(HolderError::Argument(format!(
            "certificate needs at least 1000 samples, got {samples}"
        )));
    }
    if dim == 0 {
        return Err(HolderError::Argument("dimension must be positive".into()));
    }
    let m = t.radius;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Tested contraction radii: powers of two in [1, M).
    let mut tested_r = Vec::new();
    let mut r = 1.0;
    while r < m {
        tested_r.push(r);
        r *= 2.0;
    }
    let mut clauses: Vec<ContractionClause> = tested_r
        .iter()
        .map(|&r| ContractionClause {
            r,
            bound: 5.0 * r / m.sqrt(),
            max_ratio: 0.0,
            qualifying_pairs: 0,
            tested: false,
            ok: true,
        })
        .collect();

    let mut max_lip = 0.0_f64;
    let mut record = |x: &[f64], z: &[f64], clauses: &mut [ContractionClause]| {
        let d = t.norm.diff(x, z);
        if d < 1e-12 * m {
            return;
        }
        let tx = t.apply(x);
        let tz = t.apply(z);
        let ratio = t.norm.diff(&tx, &tz) / d;
        max_lip = max_lip.max(ratio);
        let nx = t.norm.apply(x);
        let nz = t.norm.apply(z);
        let ntx = t.norm.apply(&tx);
        let ntz = t.norm.apply(&tz);
        for clause in clauses.iter_mut() {
            if (nx > m || nz > m) && ntx <= clause.r && ntz <= clause.r {
                clause.tested = true;
                clause.qualifying_pairs += 1;
                clause.max_ratio = clause.max_ratio.max(ratio);
            }
        }
    };

    // Random pairs: half independent uniform in [-3M, 3M]^dim, half nearby
    // perturbations across the full radius range.
    for k in 0..samples {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0 * m..3.0 * m)).collect();
        let z: Vec<f64> = if k % 2 == 0 {
            (0..dim).map(|_| rng.gen_range(-3.0 * m..3.0 * m)).collect()
        } else {
            let scale = m * 10.0_f64.powf(rng.gen_range(-4.0..0.0));
            x.iter().map(|v| v + rng.gen_range(-1.0..1.0) * scale).collect()
        };
        record(&x, &z, &mut clauses);
    }

    // Constructed pairs on the qualifying shell for each tested R: radii where
    // the shell maps into B(0, R), with radial and tangential perturbations.
    for ci in 0..clauses.len() {
        let r_target = clauses[ci].r;
        let r_star = shell_entry_radius(m, r_target);
        let radii: Vec<f64> = [0.0, 1e-4, 1e-3, 0.01, 0.1, 0.5, 0.9, 1.0]
            .iter()
            .map(|&u| r_star + (2.0 * m - r_star) * u)
            .chain([2.001 * m, 2.1 * m, 2.5 * m])
            .collect();
        for &rad in &radii {
            for &delta in &[1e-4 * m, 1e-3 * m, 1e-2 * m, 0.1 * m] {
                let mut x = vec![0.0; dim];
                x[0] = rad;
                // Radial partner.
                let mut z = x.clone();
                z[0] = rad + delta;
                record(&x, &z, &mut clauses);
                // Tangential partner when available.
                if dim > 1 {
                    let mut zt = x.clone();
                    zt[1] = delta;
                    record(&x, &zt, &mut clauses);
                }
            }
        }
    }

    for clause in &mut clauses {
        clause.ok = !clause.tested || clause.max_ratio <= clause.bound * (1.0 + 1e-9);
    }
    let lipschitz_ok = max_lip <= 5.0 + 1e-9;
    let all_ok = lipschitz_ok && clauses.iter().all(|c| c.ok);
    Ok(TruncationCertificate {
        radius: m,
        dim,
        samples,
        seed,
        max_lipschitz_ratio: max_lip,
        lipschitz_ok,
        contraction: clauses,
        all_ok,
    })
}

/// Smallest shell radius `r ∈ [M, 2M]` with `r·((2M−r)/M)² ≤ R`, found by
/// bisection on the decreasing shell image norm.
fn shell_entry_radius(m: f64, r_target: f64) -> f64 {
    let image = |rad: f64| rad * ((2.0 * m - rad) / m).powi(2);
    if image(m) <= r_target {
        return m;
    }
    let (mut lo, mut hi) = (m, 2.0 * m);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if image(mid) > r_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Evidence backing one selected plan parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEvidence {
    pub doubling_constant: f64,
    /// Doubling factor `C_db^{⌈log₂ 5⌉}` converting the 5-Lipschitz
    /// precomposition into a small-scale requirement at `5r`.
    pub lip5_factor: f64,
    pub small_profile: ScaleProfile,
    pub far_profile: ScaleProfile,
    pub small_value_at_5r: f64,
    pub far_value_at_radius: f64,
    /// Slacks of the three radius inequalities, each ≤ ε when satisfied:
    /// `ω(R·M^{-1/4})/ω(r)` and `ω(2R)/ω(M^{1/4})`.
    pub choice_slack: (f64, f64),
}

/// Selected parameters and certified bounds for one approximation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxPlan {
    pub epsilon: f64,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub mollifier_radius: f64,
    /// True when the ideal small-scale radius lies below grid resolution and
    /// the finest scale stands in, certified by the decreasing profile trend.
    pub resolution_limited: bool,
    pub evidence: PlanEvidence,
}

impl ApproxPlan {
    /// Re-checks the construction invariants.
    pub fn verify(&self, modulus: &Modulus) -> Result<()> {
        if !(self.m > self.big_r && self.big_r >= 1.0) {
            return Err(HolderError::Plan {
                clause: "truncation_radius".into(),
                msg: format!("need M > R >= 1, got M = {}, R = {}", self.m, self.big_r),
            });
        }
        let lhs1 = modulus.eval(self.big_r * self.m.powf(-0.25))?;
        if lhs1 > self.epsilon * modulus.eval(self.r)? * (1.0 + 1e-9) {
            return Err(HolderError::Plan {
                clause: "truncation_radius".into(),
                msg: "ω(R·M^{-1/4}) ≤ ε·ω(r) violated".into(),
            });
        }
        let lhs2 = modulus.eval(2.0 * self.big_r)?;
        if lhs2 > self.epsilon * modulus.eval(self.m.powf(0.25))? * (1.0 + 1e-9) {
            return Err(HolderError::Plan {
                clause: "truncation_radius".into(),
                msg: "ω(2R) ≤ ε·ω(M^{1/4}) violated".into(),
            });
        }
        Ok(())
    }
}

/// Selects `(r, R, M)` from the function's oscillation evidence.
///
/// `r`: the largest profile scale whose cumulative small-scale value at `5r`,
/// multiplied by the doubling factor for 5-Lipschitz precomposition, stays
/// below ε. When no scale qualifies but the profile decreases toward the
/// finest scale, the finest scale stands in and the plan is marked
/// resolution-limited.
///
/// `R`: the smallest far radius whose min-mode far value is below ε, rounded
/// up to 1.
///
/// `M`: the least power of two above `2R` satisfying both radius
/// inequalities `ω(R·M^{-1/4}) ≤ ε·ω(r)` and `ω(2R) ≤ ε·ω(M^{1/4})`.
pub fn select_parameters(f: &GridFunction, m: &Modulus, epsilon: f64) -> Result<ApproxPlan> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(HolderError::Argument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let config = ClassifyConfig::auto(f.grid(), f.norms().x);
    let c_db = m.doubling_constant(&config.scales)?;
    let lip5_factor = c_db.powi(3); // ⌈log₂ 5⌉ = 3

    // Small-scale radius r.
    let scaled: Vec<f64> = config.scales.iter().map(|s| 5.0 * s).collect();
    let cum5 = cumulative_profile(f, m, &scaled)?;
    let small = scale_profile(f, m, &config.scales, config.band)?;
    let mut r_choice: Option<(f64, f64)> = None;
    for (k, &scale) in config.scales.iter().enumerate().rev() {
        let value = cum5
            .entries
            .iter()
            .filter(|e| e.delta <= scaled[k] * (1.0 + 1e-12))
            .last()
            .map_or(0.0, |e| e.value);
        if lip5_factor * value <= epsilon {
            r_choice = Some((scale, value));
            break;
        }
    }
    let (r, small_value_at_5r, resolution_limited) = match r_choice {
        Some((r, v)) => (r, v, false),
        None => {
            // Fall back to the finest scale when the profile certifiably
            // decreases toward it.
            let decreasing = small.entries.len() >= 3
                && small.entries[0].value <= 0.9 * small.entries[2].value;
            if !decreasing {
                return Err(HolderError::Plan {
                    clause: "small_scale".into(),
                    msg: format!(
                        "no scale r with doubling-adjusted small-scale value below ε = {epsilon}, \
                         and the profile does not decrease toward the finest scale"
                    ),
                });
            }
            let r = config.scales[0];
            let v = cum5
                .entries
                .first()
                .map_or(0.0, |e| e.value);
            (r, v, true)
        }
    };

    // Far radius R.
    let far = far_profile(f, m, &config.far_deltas, FarMode::Min)?;
    let qualifying = far.entries.iter().find(|e| e.value <= epsilon);
    let Some(far_entry) = qualifying else {
        return Err(HolderError::Plan {
            clause: "far_radius".into(),
            msg: format!(
                "far-scale oscillation stays above ε = {epsilon} at every radius within the box"
            ),
        });
    };
    let big_r = far_entry.delta.max(1.0);
    let far_value_at_radius = far_entry.value;

    // Truncation radius M over the doubling grid {2^k} from 2R up.
    let mut k = (2.0 * big_r).log2().ceil() as i32;
    let mut chosen: Option<(f64, f64, f64)> = None;
    while k <= 200 {
        let cand = 2.0_f64.powi(k);
        if cand > big_r {
            let slack1 = m.eval(big_r * cand.powf(-0.25))? / (m.eval(r)?);
            let slack2 = m.eval(2.0 * big_r)? / m.eval(cand.powf(0.25))?;
            if slack1 <= epsilon && slack2 <= epsilon {
                chosen = Some((cand, slack1, slack2));
                break;
            }
        }
        k += 1;
    }
    let Some((m_radius, slack1, slack2)) = chosen else {
        return Err(HolderError::Plan {
            clause: "truncation_radius".into(),
            msg: "no truncation radius satisfies both radius inequalities; \
                  the modulus may not grow at infinity"
                .into(),
        });
    };

    let plan = ApproxPlan {
        epsilon,
        r,
        big_r,
        m: m_radius,
        mollifier_radius: f.grid().min_spacing(),
        resolution_limited,
        evidence: PlanEvidence {
            doubling_constant: c_db,
            lip5_factor,
            small_profile: small,
            far_profile: far,
            small_value_at_5r,
            far_value_at_radius,
            choice_slack: (slack1, slack2),
        },
    };
    plan.verify(m)?;
    Ok(plan)
}

/// Composes `f` with the truncation map: `g(x) = f(τ_M(x))` by interpolation.
/// Image points are clipped into the box; use [`GridFunction::grid`]'s
/// `contains_ball(2M)` to detect when clipping is active.
pub fn truncate_compose(f: &GridFunction, t: &TruncationMap) -> Result<GridFunction> {
    let grid = f.grid();
    let mut values = Vec::with_capacity(grid.len() * f.ycomp());
    for i in 0..grid.len() {
        let image = grid.clamp_point(&t.apply(&grid.point(i)));
        values.extend(f.eval_interp(&image)?);
    }
    f.with_values(values, format!("{}∘τ", f.label()))
}

/// Bump profile used for mollifier weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MollifierProfile {
    /// `(1 − u²)⁴` of the source-norm radius fraction.
    RadialPolynomial,
    /// Product over axes of `(1 − u_a²)⁴`; matches tensor-product
    /// mollification exactly.
    TensorPolynomial,
    /// 1-D shape sampled at `(u, w)` knots, `u ∈ [0, 1]`, linear interpolation.
    Tabulated(Vec<(f64, f64)>),
}

impl MollifierProfile {
    fn shape(&self, u: f64) -> f64 {
        match self {
            MollifierProfile::RadialPolynomial | MollifierProfile::TensorPolynomial => {
                if u >= 1.0 {
                    0.0
                } else {
                    (1.0 - u * u).powi(4)
                }
            }
            MollifierProfile::Tabulated(knots) => {
                if u >= 1.0 || knots.is_empty() {
                    return 0.0;
                }
                let mut prev = knots[0];
                for &k in knots {
                    if u <= k.0 {
                        let span = k.0 - prev.0;
                        if span <= 0.0 {
                            return k.1;
                        }
                        let t = (u - prev.0) / span;
                        return prev.1 * (1.0 - t) + k.1 * t;
                    }
                    prev = k;
                }
                prev.1
            }
        }
    }
}

/// A normalized compactly supported smoothing stencil.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub radius: f64,
    pub profile: MollifierProfile,
}

impl MollifierSpec {
    pub fn polynomial(radius: f64) -> Self {
        MollifierSpec { radius, profile: MollifierProfile::RadialPolynomial }
    }

    pub fn tensor(radius: f64) -> Self {
        MollifierSpec { radius, profile: MollifierProfile::TensorPolynomial }
    }
}

struct Stencil {
    /// Relative index offsets and unnormalized weights.
    offsets: Vec<(Vec<i64>, f64)>,
}

fn build_stencil(f: &GridFunction, spec: &MollifierSpec) -> Result<Stencil> {
    let grid = f.grid();
    let n = grid.dim();
    if spec.radius < grid.min_spacing() - 1e-12 {
        return Err(HolderError::Argument(format!(
            "mollifier radius {} is below the grid spacing {}",
            spec.radius,
            grid.min_spacing()
        )));
    }
    let reach: Vec<i64> = (0..n)
        .map(|a| (spec.radius / grid.spacing()[a]).floor() as i64)
        .collect();
    let mut offsets = Vec::new();
    let mut idx: Vec<i64> = reach.iter().map(|&r| -r).collect();
    'outer: loop {
        let disp: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(a, &k)| k as f64 * grid.spacing()[a])
            .collect();
        let w = match &spec.profile {
            MollifierProfile::TensorPolynomial => disp
                .iter()
                .map(|&d| spec.profile.shape(d.abs() / spec.radius))
                .product(),
            profile => {
                let dist = f.norms().x.apply(&disp);
                profile.shape(dist / spec.radius)
            }
        };
        if w > 0.0 {
            offsets.push((idx.clone(), w));
        }
        let mut a = n;
        while a > 0 {
            a -= 1;
            idx[a] += 1;
            if idx[a] <= reach[a] {
                continue 'outer;
            }
            idx[a] = -reach[a];
        }
        break;
    }
    if offsets.is_empty() {
        // Degenerate stencil: the profile vanishes at every lattice offset;
        // fall back to the identity.
        offsets.push((vec![0; n], 1.0));
    }
    Ok(Stencil { offsets })
}

/// Discrete convolution with the normalized stencil. Near-boundary points
/// renormalize the truncated stencil so weights always sum to one, which is
/// what keeps the seminorm from increasing on interior pairs.
pub fn mollify(g: &GridFunction, spec: &MollifierSpec) -> Result<GridFunction> {
    let stencil = build_stencil(g, spec)?;
    let grid = g.grid();
    let n = grid.dim();
    let shape = grid.shape().to_vec();
    let strides = grid.strides();
    let ycomp = g.ycomp();

    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .flat_map_iter(|p| {
            let mi = grid.multi_index(p);
            let mut acc = vec![0.0_f64; ycomp];
            let mut wsum = 0.0_f64;
            for (offset, w) in &stencil.offsets {
                let mut flat = 0usize;
                let mut inside = true;
                for a in 0..n {
                    let j = mi[a] as i64 + offset[a];
                    if j < 0 || j >= shape[a] as i64 {
                        inside = false;
                        break;
                    }
                    flat += j as usize * strides[a];
                }
                if !inside {
                    continue;
                }
                wsum += w;
                let v = g.value(flat);
                for c in 0..ycomp {
                    acc[c] += w * v[c];
                }
            }
            acc.iter_mut().for_each(|v| *v /= wsum);
            acc
        })
        .collect();
    g.with_values(values, format!("{}*η", g.label()))
}

/// Report of one full truncate-then-mollify pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub seminorm_f: f64,
    /// Measured `‖f − h‖` in the grid Hölder seminorm.
    pub seminorm_error: f64,
    pub sup_error: f64,
    /// Small scale δ* of the truncated function used for the mollifier search.
    pub small_scale: f64,
    /// Uniform criterion `sup|g − h| ≤ ε·ω(δ*)/2` for the mollifier radius.
    pub sup_g_h: f64,
    pub criterion: f64,
    pub criterion_met: bool,
    /// True when the ideal mollifier radius fell below the grid spacing.
    pub radius_clamped: bool,
    pub truncation_clipped: bool,
}

/// Truncate then mollify, with all parameters selected from the function's
/// own oscillation evidence.
pub fn pipeline_vc_to_smooth(
    f: &GridFunction,
    m: &Modulus,
    epsilon: f64,
) -> Result<(GridFunction, ApproxPlan, PipelineReport)> {
    let mut plan = select_parameters(f, m, epsilon)?;
    let tau = TruncationMap::new(plan.m, f.norms().x)?;
    let g = truncate_compose(f, &tau)?;
    let truncation_clipped = !f.grid().contains_ball(2.0 * plan.m, f.norms().x);

    // Small scale of g: the largest ladder scale with cumulative value ≤ ε.
    let config = ClassifyConfig::auto(f.grid(), f.norms().x);
    let cum_g = cumulative_profile(&g, m, &config.scales)?;
    let small_scale = cum_g
        .entries
        .iter()
        .rev()
        .find(|e| e.value <= epsilon)
        .map_or(config.scales[0], |e| e.delta);

    // Mollifier radius: halve from the small scale until the uniform bound
    // ‖g‖·ω(ρ) meets the criterion, clamping at the grid spacing.
    let g_norm = seminorm_scan(&g, m)?.value;
    let criterion = 0.5 * epsilon * m.eval(small_scale)?;
    let spacing = f.grid().min_spacing();
    let mut rho = small_scale;
    while rho > spacing && g_norm * m.eval(rho)? > criterion {
        rho /= 2.0;
    }
    let radius_clamped = g_norm * m.eval(rho)? > criterion && rho <= spacing * (1.0 + 1e-12);
    let rho = rho.max(spacing);
    plan.mollifier_radius = rho;

    let h = mollify(&g, &MollifierSpec::polynomial(rho))?;
    let sup_g_h = g.sup_diff(&h)?;
    let diff = f.sub(&h)?;
    let report = PipelineReport {
        seminorm_f: holder_seminorm(f, m)?,
        seminorm_error: holder_seminorm(&diff, m)?,
        sup_error: f.sup_diff(&h)?,
        small_scale,
        sup_g_h,
        criterion,
        criterion_met: sup_g_h <= criterion * (1.0 + 1e-9) + 1e-15,
        radius_clamped,
        truncation_clipped,
    };
    Ok((h, plan, report))
}

/// Sampled minimal modulus of continuity of a function, with the linear
/// growth bound `ω_f(t) ≤ 2t·ω_f(1)` checked at sampled `t ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalModulusReport {
    pub samples: Vec<(f64, f64)>,
    pub omega_f_at_1: f64,
    pub linear_growth_ok: bool,
}

/// Parameters of one inf-convolution envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    /// Envelope slope n in `f_n(x) = inf_y { f(y) + n‖x−y‖ }`.
    pub slope: f64,
    /// 1 when the slope exceeds the localization threshold
    /// `2·ω(1)·seminorm(f)`, +∞ otherwise.
    pub localization_radius: f64,
    pub localization_threshold: f64,
    pub minimal_modulus: MinimalModulusReport,
}

impl EnvelopeParams {
    pub fn for_function(f: &GridFunction, m: &Modulus, slope: f64) -> Result<Self> {
        if f.ycomp() != 1 {
            return Err(HolderError::Unsupported(
                "inf-convolution envelope applies to scalar-valued functions".into(),
            ));
        }
        if !(slope > 0.0) {
            return Err(HolderError::Argument("slope must be positive".into()));
        }
        let seminorm = holder_seminorm(f, m)?;
        let threshold = 2.0 * m.eval(1.0)? * seminorm;
        let localization_radius = if slope > threshold { 1.0 } else { f64::INFINITY };

        // Sampled ω_f on a doubling ladder including t = 1.
        let grid = f.grid();
        let diam = f.norms().x.diff(grid.origin(), &grid.upper());
        let mut ts = Vec::new();
        let mut t = grid.min_spacing();
        while t <= diam * 1.0001 {
            ts.push(t);
            t *= 2.0;
        }
        if diam >= 1.0 && !ts.iter().any(|&t| (t - 1.0).abs() < 1e-12) {
            ts.push(1.0);
            ts.sort_by(f64::total_cmp);
        }
        let cum = cumulative_abs_profile(f, &ts);
        let omega_f_at_1 = ts
            .iter()
            .zip(&cum)
            .filter(|(&t, _)| t <= 1.0)
            .last()
            .map_or(0.0, |(_, &v)| v);
        let samples: Vec<(f64, f64)> = ts.iter().copied().zip(cum.iter().copied()).collect();
        let linear_growth_ok = samples
            .iter()
            .filter(|(t, _)| *t >= 1.0)
            .all(|(t, v)| *v <= 2.0 * t * omega_f_at_1 + 1e-12);
        Ok(EnvelopeParams {
            slope,
            localization_radius,
            localization_threshold: threshold,
            minimal_modulus: MinimalModulusReport { samples, omega_f_at_1, linear_growth_ok },
        })
    }
}

/// `sup { |f(x)−f(y)| : ‖x−y‖ ≤ t }` for each ladder value, cumulative.
fn cumulative_abs_profile(f: &GridFunction, ts: &[f64]) -> Vec<f64> {
    let grid = f.grid();
    let n = grid.len();
    let coords: Vec<Vec<f64>> = (0..n).map(|i| grid.point(i)).collect();
    let buckets = (0..n.saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let mut local = vec![0.0_f64; ts.len()];
            for j in i + 1..n {
                let d = f.norms().x.diff(&coords[i], &coords[j]);
                if let Some(k) = ts.iter().position(|&t| d <= t) {
                    let dv = f.norms().y.diff(f.value(i), f.value(j));
                    local[k] = local[k].max(dv);
                }
            }
            local
        })
        .reduce(
            || vec![0.0_f64; ts.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.max(y);
                }
                a
            },
        );
    let mut running = 0.0_f64;
    buckets
        .into_iter()
        .map(|b| {
            running = running.max(b);
            running
        })
        .collect()
}

/// Inf-convolution envelope `f_n(x) = min_y { f(y) + n‖x−y‖ }` over grid
/// points, optionally restricted to the localization ball.
pub fn lipschitz_envelope(f: &GridFunction, p: &EnvelopeParams) -> Result<GridFunction> {
    if f.ycomp() != 1 {
        return Err(HolderError::Unsupported(
            "inf-convolution envelope applies to scalar-valued functions".into(),
        ));
    }
    let grid = f.grid();
    let n = grid.len();
    let coords: Vec<Vec<f64>> = (0..n).map(|i| grid.point(i)).collect();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = f64::INFINITY;
            for j in 0..n {
                let d = f.norms().x.diff(&coords[i], &coords[j]);
                if d > p.localization_radius {
                    continue;
                }
                best = best.min(f.value(j)[0] + p.slope * d);
            }
            best
        })
        .collect();
    f.with_values(values, format!("{}↓{}", f.label(), p.slope))
}

/// Per-element measurements for a sequence convergence check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub index: usize,
    pub sup_error: f64,
    pub lipschitz: f64,
    pub seminorm_error: f64,
    /// Upper bound on the seminorm error from uniform error and the shared
    /// Lipschitz bound, minimized over the scale ladder.
    pub proof_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub uniform_converging: bool,
    pub lipschitz_bounded: bool,
    pub hypotheses_hold: bool,
    pub final_seminorm_error: f64,
    pub within_proof_bounds: bool,
}

/// Checks the implication "uniform convergence + bounded Lipschitz constants
/// ⇒ seminorm convergence" on a supplied sequence. When a hypothesis fails
/// the report flags it instead of failing.
pub fn uniform_lip_convergence_check(
    seq: &[GridFunction],
    f: &GridFunction,
    m: &Modulus,
) -> Result<ConvergenceReport> {
    if seq.is_empty() {
        return Err(HolderError::Argument("sequence must be nonempty".into()));
    }
    for g in seq {
        if g.grid() != f.grid() || g.ycomp() != f.ycomp() {
            return Err(HolderError::Argument(
                "sequence and limit must share one grid".into(),
            ));
        }
    }
    let grid = f.grid();
    let diam = f.norms().x.diff(grid.origin(), &grid.upper());
    let mut ladder = Vec::new();
    let mut t = grid.min_spacing();
    while t <= diam * 1.0001 {
        ladder.push(t);
        t *= 2.0;
    }

    let lips: Vec<f64> = seq
        .iter()
        .map(grid_lipschitz)
        .collect::<Result<_>>()?;
    let lip_f = grid_lipschitz(f)?;
    let shared_lip = lips.iter().fold(lip_f, |a, &b| a.max(b));

    // Largest t/ω(t) over ladder values up to δ, cumulative.
    let mut q_cum = Vec::with_capacity(ladder.len());
    let mut running: f64 = 0.0;
    for &t in &ladder {
        running = running.max(t / m.eval(t)?);
        q_cum.push(running);
    }

    let mut rows = Vec::new();
    let mut within = true;
    for (k, g) in seq.iter().enumerate() {
        let sup_error = g.sup_diff(f)?;
        let diff = g.sub(f)?;
        let seminorm_error = holder_seminorm(&diff, m)?;
        let mut bound = f64::INFINITY;
        for (i, &delta) in ladder.iter().enumerate() {
            let small_part = 2.0 * shared_lip * q_cum[i];
            let large_part = 2.0 * sup_error / m.eval(delta)?;
            bound = bound.min(small_part.max(large_part));
        }
        within &= seminorm_error <= bound * (1.0 + 1e-9) + 1e-12;
        rows.push(ConvergenceRow {
            index: k,
            sup_error,
            lipschitz: lips[k],
            seminorm_error,
            proof_bound: bound,
        });
    }

    let first_sup = rows.first().map_or(0.0, |r| r.sup_error);
    let last_sup = rows.last().map_or(0.0, |r| r.sup_error);
    let uniform_converging = first_sup == 0.0 || last_sup <= 0.25 * first_sup;
    let half = (rows.len() / 2).max(1);
    let early_max_lip = rows[..half].iter().fold(0.0_f64, |a, r| a.max(r.lipschitz));
    let late_max_lip = rows[half..].iter().fold(0.0_f64, |a, r| a.max(r.lipschitz));
    let lipschitz_bounded = late_max_lip <= 1.1 * early_max_lip.max(1e-30);
    let final_seminorm_error = rows.last().map_or(0.0, |r| r.seminorm_error);
    Ok(ConvergenceReport {
        uniform_converging,
        lipschitz_bounded,
        hypotheses_hold: uniform_converging && lipschitz_bounded,
        final_seminorm_error,
        within_proof_bounds: within,
        rows,
    })
}

/// Smooth radial cutoff: 1 on `B(0, inner)`, 0 outside `B(0, outer)`, with a
/// quintic transition whose Lipschitz constant is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub norm: SourceNorm,
}

impl BumpSpec {
    pub fn new(inner_radius: f64, outer_radius: f64, norm: SourceNorm) -> Result<Self> {
        if !(inner_radius > 0.0 && outer_radius > inner_radius) {
            return Err(HolderError::Argument(format!(
                "need 0 < inner < outer, got ({inner_radius}, {outer_radius})"
            )));
        }
        Ok(BumpSpec { inner_radius, outer_radius, norm })
    }

    /// 1-D cutoff profile in the radius variable.
    pub fn theta(&self, t: f64) -> f64 {
        if t <= self.inner_radius {
            1.0
        } else if t >= self.outer_radius {
            0.0
        } else {
            let u = (t - self.inner_radius) / (self.outer_radius - self.inner_radius);
            1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
        }
    }

    pub fn phi(&self, x: &[f64]) -> f64 {
        self.theta(self.norm.apply(x))
    }

    /// Lipschitz constant of φ: the quintic's max slope over the transition
    /// width (the norm itself is 1-Lipschitz).
    pub fn lip(&self) -> f64 {
        1.875 / (self.outer_radius - self.inner_radius)
    }
}

/// Pointwise product `φ·g`. Support shrinks into `B(0, outer_radius)`; the
/// grid Lipschitz constant is bounded by `Lip(g) + Lip(φ)·sup|g|`.
pub fn bump_multiply(g: &GridFunction, b: &BumpSpec) -> Result<GridFunction> {
    let grid = g.grid();
    let mut values = Vec::with_capacity(grid.len() * g.ycomp());
    for i in 0..grid.len() {
        let w = b.phi(&grid.point(i));
        values.extend(g.value(i).iter().map(|v| w * v));
    }
    g.with_values(values, format!("φ·{}", g.label()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridFunction, NormSpec, VectorNorm};
    use approx::assert_relative_eq;

    fn tent_on(a: f64, b: f64, h: f64) -> GridFunction {
        let grid = Grid::line(a, b, h).unwrap();
        GridFunction::sample_scalar(grid, NormSpec::default(), "tent", |x| {
            (1.0 - x[0].abs()).max(0.0)
        })
        .unwrap()
    }

    #[test]
    fn truncation_regions() {
        let t = TruncationMap::new(1.0, SourceNorm::L2).unwrap();
        // Identity region.
        assert_eq!(t.apply(&[0.5, 0.0]), vec![0.5, 0.0]);
        // Zero region.
        assert_eq!(t.apply(&[3.0, 0.0]), vec![0.0, 0.0]);
        // Shell: ((2 − 1.5)/1)² · x = 0.25 · x.
        let y = t.apply(&[1.5, 0.0]);
        assert_relative_eq!(y[0], 0.375, epsilon = 1e-15);
        assert_eq!(y[1], 0.0);
    }

    #[test]
    fn truncation_certificate_all_radii() {
        for m in [1.0, 10.0, 100.0] {
            for norm in [SourceNorm::L2, SourceNorm::Linf] {
                let t = TruncationMap::new(m, norm).unwrap();
                let cert = truncation_certify(&t, 2, 10_000, 42).unwrap();
                assert!(
                    cert.lipschitz_ok,
                    "M={m} norm={norm:?}: lipschitz ratio {}",
                    cert.max_lipschitz_ratio
                );
                for clause in &cert.contraction {
                    assert!(
                        clause.ok,
                        "M={m} R={}: ratio {} vs bound {}",
                        clause.r, clause.max_ratio, clause.bound
                    );
                }
                assert!(cert.all_ok);
                if m == 1.0 {
                    // No valid R in [1, M): clause list is empty.
                    assert!(cert.contraction.is_empty());
                }
            }
        }
    }

    #[test]
    fn truncation_identity_region_ratio_at_most_one() {
        let t = TruncationMap::new(1.0, SourceNorm::L2).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = [rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)];
            let z = [rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)];
            let d = SourceNorm::L2.diff(&x, &z);
            if d < 1e-12 {
                continue;
            }
            let ratio = SourceNorm::L2.diff(&t.apply(&x), &t.apply(&z)) / d;
            assert!(ratio <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn certificate_is_deterministic() {
        let t = TruncationMap::new(10.0, SourceNorm::L2).unwrap();
        let a = truncation_certify(&t, 2, 2000, 7).unwrap();
        let b = truncation_certify(&t, 2, 2000, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn select_parameters_constant() {
        let grid = Grid::line(-8.0, 8.0, 0.125).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "c", |_| 2.0).unwrap();
        let m = Modulus::power(0.5).unwrap();
        let plan = select_parameters(&f, &m, 0.1).unwrap();
        assert!(!plan.resolution_limited);
        // All profiles are zero, so the largest ladder scale qualifies for r
        // and the smallest far radius (rounded up to 1) works for R.
        assert_eq!(plan.r, 16.0);
        assert_eq!(plan.big_r, 1.0);
        plan.verify(&m).unwrap();
    }

    #[test]
    fn select_parameters_affine_fails_far_clause() {
        let grid = Grid::line(-8.0, 8.0, 0.125).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "x", |x| x[0]).unwrap();
        let m = Modulus::power(0.5).unwrap();
        let err = select_parameters(&f, &m, 0.1).unwrap_err();
        match err {
            HolderError::Plan { clause, .. } => assert_eq!(clause, "far_radius"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn select_parameters_tent_recheck() {
        let f = tent_on(-64.0, 64.0, 1.0 / 64.0);
        let m = Modulus::power(0.5).unwrap();
        let eps = 0.1;
        let plan = select_parameters(&f, &m, eps).unwrap();
        plan.verify(&m).unwrap();
        // Far radius comes from the profile evidence.
        assert!(plan.evidence.far_value_at_radius <= eps);
        assert!(plan.m > plan.big_r);
    }

    #[test]
    fn plan_monotone_in_epsilon() {
        let f = tent_on(-64.0, 64.0, 1.0 / 32.0);
        let m = Modulus::power(0.5).unwrap();
        let coarse = select_parameters(&f, &m, 0.2).unwrap();
        let fine = select_parameters(&f, &m, 0.05).unwrap();
        assert!(fine.r <= coarse.r);
        assert!(fine.big_r >= coarse.big_r);
        assert!(fine.m >= coarse.m);
    }

    #[test]
    fn truncate_compose_identity_inside() {
        let f = tent_on(-8.0, 8.0, 0.125);
        let m = Modulus::power(0.5).unwrap();
        let _ = m;
        let tau = TruncationMap::new(4.0, SourceNorm::L2).unwrap();
        let g = truncate_compose(&f, &tau).unwrap();
        // τ is the identity on the support, so g = f at grid points.
        for i in 0..f.grid().len() {
            let x = f.grid().point(i)[0];
            if x.abs() < 4.0 {
                assert_eq!(g.value(i)[0], f.value(i)[0]);
            }
        }
        // Constant composes to itself.
        let c = GridFunction::sample_scalar(
            Grid::line(-8.0, 8.0, 0.125).unwrap(),
            NormSpec::default(),
            "c",
            |_| 5.0,
        )
        .unwrap();
        let gc = truncate_compose(&c, &tau).unwrap();
        assert!(gc.values().iter().all(|&v| v == 5.0));
    }

    #[test]
    fn truncate_compose_bounded_support() {
        let grid = Grid::line(-16.0, 16.0, 0.125).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "smooth", |x| {
            (x[0] * 0.3).sin()
        })
        .unwrap();
        let tau = TruncationMap::new(2.0, SourceNorm::L2).unwrap();
        let g = truncate_compose(&f, &tau).unwrap();
        let f0 = f.eval_interp(&[0.0]).unwrap()[0];
        for i in 0..g.grid().len() {
            if g.grid().point(i)[0].abs() >= 4.0 {
                assert_relative_eq!(g.value(i)[0] - f0, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mollify_preserves_constants_and_linear_interior() {
        let grid = Grid::line(0.0, 8.0, 0.25).unwrap();
        let c = GridFunction::sample_scalar(grid.clone(), NormSpec::default(), "c", |_| 2.5)
            .unwrap();
        let spec = MollifierSpec::polynomial(1.0);
        let hc = mollify(&c, &spec).unwrap();
        for v in hc.values() {
            assert_relative_eq!(*v, 2.5, epsilon = 1e-12);
        }
        let lin =
            GridFunction::sample_scalar(grid, NormSpec::default(), "x", |x| x[0]).unwrap();
        let hl = mollify(&lin, &spec).unwrap();
        // Symmetric stencil: odd moments vanish on interior points.
        for i in 0..lin.grid().len() {
            let x = lin.grid().point(i)[0];
            if x >= 1.0 && x <= 7.0 {
                assert_relative_eq!(hl.value(i)[0], lin.value(i)[0], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mollify_seminorm_noninrease_and_sup_bound() {
        let f = tent_on(-8.0, 8.0, 0.125);
        let m = Modulus::power(0.5).unwrap();
        let rho = 0.125;
        let h = mollify(&f, &MollifierSpec::polynomial(rho)).unwrap();
        let s_f = holder_seminorm(&f, &m).unwrap();
        let s_h = holder_seminorm(&h, &m).unwrap();
        assert!(s_h <= s_f * (1.0 + 1e-12), "seminorm grew: {s_h} > {s_f}");
        let sup = f.sup_diff(&h).unwrap();
        assert!(
            sup <= s_f * m.eval(rho).unwrap() + 1e-12,
            "sup {} vs bound {}",
            sup,
            s_f * m.eval(rho).unwrap()
        );
        let err = mollify(&f, &MollifierSpec::polynomial(0.01));
        assert!(err.is_err());
    }

    #[test]
    fn pipeline_constant_zero_error() {
        let grid = Grid::line(-8.0, 8.0, 0.125).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "c", |_| 1.0).unwrap();
        let m = Modulus::power(0.5).unwrap();
        let (h, _plan, report) = pipeline_vc_to_smooth(&f, &m, 0.1).unwrap();
        assert_eq!(report.seminorm_error, 0.0);
        assert!(h.values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn pipeline_tent_measured_error() {
        let f = tent_on(-16.0, 16.0, 1.0 / 32.0);
        let m = Modulus::power(0.5).unwrap();
        let (h, plan, report) = pipeline_vc_to_smooth(&f, &m, 0.1).unwrap();
        plan.verify(&m).unwrap();
        assert!(report.seminorm_error.is_finite());
        assert_eq!(h.grid(), f.grid());
        // Tolerance halved must not increase the measured error.
        let (_, _, report2) = pipeline_vc_to_smooth(&f, &m, 0.05).unwrap();
        assert!(report2.seminorm_error <= report.seminorm_error + 1e-12);
    }

    #[test]
    fn envelope_fixes_lipschitz_functions() {
        let grid = Grid::line(-4.0, 4.0, 0.125).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "lip", |x| {
            x[0].abs().min(2.0)
        })
        .unwrap();
        let m = Modulus::power(1.0 / 3.0).unwrap();
        let p = EnvelopeParams::for_function(&f, &m, 4.0).unwrap();
        let env = lipschitz_envelope(&f, &p).unwrap();
        for i in 0..f.grid().len() {
            assert_relative_eq!(env.value(i)[0], f.value(i)[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn envelope_spike_hand_case() {
        // Spike at the origin on spacing 1/4 with slope 1: the envelope at 0
        // is min(1, 0 + 1·(1/4)) = 0.25.
        let grid = Grid::line(-1.0, 1.0, 0.25).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "spike", |x| {
            if x[0] == 0.0 { 1.0 } else { 0.0 }
        })
        .unwrap();
        let m = Modulus::power(0.5).unwrap();
        let mut p = EnvelopeParams::for_function(&f, &m, 1.0).unwrap();
        p.localization_radius = f64::INFINITY;
        let env = lipschitz_envelope(&f, &p).unwrap();
        let mid = f.grid().len() / 2;
        assert_relative_eq!(env.value(mid)[0], 0.25, epsilon = 1e-15);
        // f_n ≤ f pointwise.
        for i in 0..f.grid().len() {
            assert!(env.value(i)[0] <= f.value(i)[0] + 1e-15);
        }
    }

    #[test]
    fn envelope_certified_slope_and_monotone() {
        let f = tent_on(-4.0, 4.0, 0.0625);
        let m = Modulus::power(0.5).unwrap();
        let p = EnvelopeParams::for_function(&f, &m, 10.0).unwrap();
        let env = lipschitz_envelope(&f, &p).unwrap();
        let lip = grid_lipschitz(&env).unwrap();
        assert!(lip <= 10.0 + 1e-9, "lip {lip}");
        for i in 0..f.grid().len() {
            assert!(env.value(i)[0] <= f.value(i)[0] + 1e-15);
        }
        // Idempotent on its own output.
        let env2 = lipschitz_envelope(&env, &p).unwrap();
        for i in 0..f.grid().len() {
            assert_relative_eq!(env2.value(i)[0], env.value(i)[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn envelope_rejects_vector_targets() {
        let grid = Grid::line(0.0, 1.0, 0.25).unwrap();
        let f = GridFunction::new(
            grid,
            2,
            vec![0.0; 10],
            NormSpec { y: VectorNorm::L2, x: SourceNorm::L2 },
            "vec",
        )
        .unwrap();
        let m = Modulus::power(0.5).unwrap();
        assert!(matches!(
            EnvelopeParams::for_function(&f, &m, 1.0),
            Err(HolderError::Unsupported(_))
        ));
    }

    #[test]
    fn convergence_check_trivial_sequence() {
        let f = tent_on(-4.0, 4.0, 0.125);
        let m = Modulus::power(0.5).unwrap();
        let seq = vec![f.clone(), f.clone(), f.clone()];
        let report = uniform_lip_convergence_check(&seq, &f, &m).unwrap();
        assert!(report.hypotheses_hold);
        assert_eq!(report.final_seminorm_error, 0.0);
        assert!(report.within_proof_bounds);
    }

    #[test]
    fn convergence_check_perturbed_sequence() {
        let f = tent_on(-4.0, 4.0, 0.125);
        let m = Modulus::power(0.5).unwrap();
        let seq: Vec<GridFunction> = (1..=32)
            .map(|k| {
                let fk_values: Vec<f64> = (0..f.grid().len())
                    .map(|i| {
                        let x = f.grid().point(i)[0];
                        f.value(i)[0] + x.sin() / k as f64
                    })
                    .collect();
                f.with_values(fk_values, format!("f{k}")).unwrap()
            })
            .collect();
        let report = uniform_lip_convergence_check(&seq, &f, &m).unwrap();
        assert!(report.hypotheses_hold);
        assert!(report.within_proof_bounds);
        // Seminorm errors decrease like 1/k.
        let first = report.rows.first().unwrap().seminorm_error;
        let last = report.rows.last().unwrap().seminorm_error;
        assert!(last < first / 16.0);
    }

    #[test]
    fn bump_multiply_identity_inside_inner() {
        let f = tent_on(-8.0, 8.0, 0.125);
        let b = BumpSpec::new(2.0, 4.0, SourceNorm::L2).unwrap();
        let h = bump_multiply(&f, &b).unwrap();
        for i in 0..f.grid().len() {
            let x = f.grid().point(i)[0];
            if x.abs() <= 2.0 {
                assert_eq!(h.value(i)[0], f.value(i)[0]);
            }
            if x.abs() >= 4.0 {
                assert_eq!(h.value(i)[0], 0.0);
            }
        }
    }

    #[test]
    fn bump_multiply_lipschitz_bound() {
        let grid = Grid::line(-8.0, 8.0, 0.0625).unwrap();
        // Constant 1: product equals φ itself, certifying Lip(φ).
        let one = GridFunction::sample_scalar(grid.clone(), NormSpec::default(), "1", |_| 1.0)
            .unwrap();
        let b = BumpSpec::new(1.0, 3.0, SourceNorm::L2).unwrap();
        let phi = bump_multiply(&one, &b).unwrap();
        let lip_phi = grid_lipschitz(&phi).unwrap();
        assert!(lip_phi <= b.lip() + 1e-9, "{lip_phi} vs {}", b.lip());

        let g = GridFunction::sample_scalar(grid, NormSpec::default(), "g", |x| {
            (x[0] * 0.7).sin()
        })
        .unwrap();
        let h = bump_multiply(&g, &b).unwrap();
        let lip_g = grid_lipschitz(&g).unwrap();
        let sup_g = g.values().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let lip_h = grid_lipschitz(&h).unwrap();
        assert!(
            lip_h <= lip_g + b.lip() * sup_g + 1e-9,
            "lip_h {lip_h} vs bound {}",
            lip_g + b.lip() * sup_g
        );
    }
}
