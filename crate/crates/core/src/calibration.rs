//! Calibration of the implicit constants in the seminorm–mean-oscillation
//! equivalence and the approximation pipeline.
//!
//! The equivalence proofs give existence of dimensional constants; testing
//! needs numbers. A frozen fixture suite per dimension is measured once, the
//! observed maxima are inflated by a fixed margin, and the resulting ceilings
//! are pinned as a JSON asset in the repository. Re-running the calibration
//! must reproduce the pinned asset byte for byte.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::approximators::pipeline_vc_to_smooth;
use crate::error::{HolderError, Result};
use crate::fixtures::{generate, FixtureFamily, FixtureSpec};
use crate::grid::{Grid, GridFunction, NormSpec};
use crate::meanosc::{build_cube_stats, bmo_norm, default_levels, max_avg_modulus_ratio};
use crate::modulus::Modulus;
use crate::oscillation::holder_seminorm;

/// Inflation applied to observed maxima before pinning.
const MARGIN: f64 = 1.25;

/// Pinned calibration asset.
static SHIPPED_JSON: &str = include_str!("../assets/calibration.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimCeilings {
    /// Ceiling on `bmo / seminorm`.
    pub bmo_over_seminorm: f64,
    /// Ceiling on `seminorm / (dini · bmo)`.
    pub seminorm_over_dini_bmo: f64,
    /// Ceiling on the cube double-average `⨍⨍ ω(‖x−y‖) / ω(ℓ(Q))`.
    pub avg_modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub schema: u32,
    pub modulus: String,
    pub margin: f64,
    pub dims: BTreeMap<String, DimCeilings>,
    /// Ceiling on `seminorm-error / ε` for the truncate-then-mollify pipeline.
    pub pipeline_constant: f64,
}

impl CalibrationTable {
    pub fn dims_for(&self, dim: usize) -> Result<&DimCeilings> {
        self.dims.get(&dim.to_string()).ok_or_else(|| {
            HolderError::Argument(format!("no calibration ceilings for dimension {dim}"))
        })
    }

    /// Canonical serialization: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }
}

pub fn shipped_json() -> &'static str {
    SHIPPED_JSON
}

pub fn shipped() -> &'static CalibrationTable {
    static TABLE: OnceLock<CalibrationTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        serde_json::from_str(SHIPPED_JSON).expect("pinned calibration asset parses")
    })
}

fn fixture(family: FixtureFamily, grid: Grid) -> Result<GridFunction> {
    generate(&FixtureSpec { family, grid, norms: NormSpec::default() })
}

/// Frozen 1-D suite: 20 fixtures on desk-scale grids.
pub fn suite_1d() -> Result<Vec<GridFunction>> {
    let base = || Grid::line(-8.0, 8.0, 1.0 / 16.0);
    let mut out = Vec::new();
    for seed in 11..=18 {
        out.push(fixture(
            FixtureFamily::RandomSmooth { seed, smoothness: 1.5 },
            base()?,
        )?);
    }
    for seed in 41..=44 {
        out.push(fixture(
            FixtureFamily::RandomSmooth { seed, smoothness: 2.5 },
            base()?,
        )?);
    }
    for n in [0.5, 1.0, 2.0, 4.0] {
        out.push(fixture(FixtureFamily::Tent { n }, base()?)?);
    }
    out.push(fixture(FixtureFamily::SinDecay { freq: 1.0, decay: 1.0 }, base()?)?);
    out.push(fixture(FixtureFamily::Affine { slope: 1.0 }, base()?)?);
    out.push(fixture(FixtureFamily::SharpSpike { n: 4 }, base()?)?);
    out.push(fixture(
        FixtureFamily::SlowPeak { n: 4, alpha: 0.5 },
        Grid::line(0.0, 8.0, 1.0 / 16.0)?,
    )?);
    Ok(out)
}

/// Frozen 2-D suite: 10 fixtures.
pub fn suite_2d() -> Result<Vec<GridFunction>> {
    let base = || Grid::new(vec![-4.0, -4.0], vec![1.0 / 8.0, 1.0 / 8.0], vec![65, 65]);
    let mut out = Vec::new();
    for seed in 21..=26 {
        out.push(fixture(
            FixtureFamily::RandomSmooth { seed, smoothness: 2.0 },
            base()?,
        )?);
    }
    for n in [1.0, 2.0] {
        out.push(fixture(FixtureFamily::Tent { n }, base()?)?);
    }
    out.push(fixture(FixtureFamily::SinDecay { freq: 1.0, decay: 1.0 }, base()?)?);
    out.push(fixture(FixtureFamily::Affine { slope: 0.5 }, base()?)?);
    Ok(out)
}

/// Frozen 3-D suite: 3 fixtures, enough to pin dimensional ceilings.
pub fn suite_3d() -> Result<Vec<GridFunction>> {
    let base = || Grid::new(vec![-2.0; 3], vec![0.25; 3], vec![17, 17, 17]);
    Ok(vec![
        fixture(FixtureFamily::RandomSmooth { seed: 31, smoothness: 2.0 }, base()?)?,
        fixture(FixtureFamily::Tent { n: 1.0 }, base()?)?,
        fixture(FixtureFamily::SinDecay { freq: 1.0, decay: 1.0 }, base()?)?,
    ])
}

pub fn suite_for_dim(dim: usize) -> Result<Vec<GridFunction>> {
    match dim {
        1 => suite_1d(),
        2 => suite_2d(),
        3 => suite_3d(),
        other => Err(HolderError::Argument(format!(
            "no frozen suite for dimension {other}"
        ))),
    }
}

/// Pipeline calibration fixtures: compactly supported tents, including the
/// widest desk-scale case.
pub fn pipeline_fixtures() -> Result<Vec<GridFunction>> {
    Ok(vec![
        fixture(FixtureFamily::Tent { n: 1.0 }, Grid::line(-64.0, 64.0, 1.0 / 64.0)?)?,
        fixture(FixtureFamily::Tent { n: 1.0 }, Grid::line(-16.0, 16.0, 1.0 / 32.0)?)?,
        fixture(FixtureFamily::Tent { n: 2.0 }, Grid::line(-32.0, 32.0, 1.0 / 32.0)?)?,
    ])
}

pub const PIPELINE_EPSILONS: [f64; 3] = [0.2, 0.1, 0.05];

/// Runs the frozen suites and produces the ceilings table. Deterministic:
/// identical code and assets give byte-identical output.
pub fn compute() -> Result<CalibrationTable> {
    let m = Modulus::power(0.5)?;
    let cert = m.check_admissible();
    let mut dims = BTreeMap::new();
    for dim in 1..=3usize {
        let suite = suite_for_dim(dim)?;
        let mut max_r1 = 0.0_f64;
        let mut max_r2 = 0.0_f64;
        let mut max_avg = 0.0_f64;
        for f in &suite {
            let (lo, hi) = default_levels(f.grid());
            let stats = build_cube_stats(f, &m, lo, hi)?;
            let seminorm = holder_seminorm(f, &m)?;
            let bmo = bmo_norm(&stats)?;
            if seminorm > 0.0 && bmo > 0.0 {
                max_r1 = max_r1.max(bmo / seminorm);
                max_r2 = max_r2.max(seminorm / (cert.dini_constant * bmo));
            }
            max_avg = max_avg.max(max_avg_modulus_ratio(f, &m, &stats)?);
        }
        dims.insert(
            dim.to_string(),
            DimCeilings {
                bmo_over_seminorm: max_r1 * MARGIN,
                seminorm_over_dini_bmo: max_r2 * MARGIN,
                avg_modulus: max_avg * MARGIN,
            },
        );
    }

    let mut max_pipe = 0.0_f64;
    for f in pipeline_fixtures()? {
        for eps in PIPELINE_EPSILONS {
            let (_, _, report) = pipeline_vc_to_smooth(&f, &m, eps)?;
            max_pipe = max_pipe.max(report.seminorm_error / eps);
        }
    }

    Ok(CalibrationTable {
        schema: 1,
        modulus: "power:0.5".into(),
        margin: MARGIN,
        dims,
        pipeline_constant: (max_pipe * MARGIN).max(1.0),
    })
}
