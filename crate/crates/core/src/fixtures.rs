//! Deterministic test-function generators.
//!
//! Families cover the closed forms the analysis is exercised against: tents,
//! the slow-peak and sharp-spike sequences, affine ramps, decaying
//! oscillations, and seeded random smooth functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HolderError, Result};
use crate::grid::{Grid, GridFunction, NormSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum FixtureFamily {
    /// `max(0, 1 − ‖x‖_∞ / n)`: peak 1 at the origin, support radius n.
    Tent { n: f64 },
    /// Peak-1 tent on `[0, 2n]`: 0 at the ends, 1 at n, affine between.
    /// The recorded α only labels the analysis the fixture is meant for.
    SlowPeak { n: u32, alpha: f64 },
    /// Even spike: `n^{-1/2}` at 0, affine to 0 at `|t| = 1/n`, 0 beyond.
    SharpSpike { n: u32 },
    /// `slope · Σ_a x_a`.
    Affine { slope: f64 },
    /// `sin(freq · Σ_a x_a) · (1 + ‖x‖_2)^{-decay}`.
    SinDecay { freq: f64, decay: f64 },
    /// Seeded sum of cosines with amplitude decay `k^{-smoothness}`.
    RandomSmooth { seed: u64, smoothness: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub family: FixtureFamily,
    pub grid: Grid,
    pub norms: NormSpec,
}

pub fn generate(spec: &FixtureSpec) -> Result<GridFunction> {
    let label = family_label(&spec.family);
    match &spec.family {
        FixtureFamily::Tent { n } => {
            if !(*n > 0.0) {
                return Err(HolderError::Argument("tent width must be positive".into()));
            }
            let n = *n;
            GridFunction::sample_scalar(spec.grid.clone(), spec.norms, label, move |x| {
                let sup = x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                (1.0 - sup / n).max(0.0)
            })
        }
        FixtureFamily::SlowPeak { n, .. } => {
            if *n == 0 {
                return Err(HolderError::Argument("peak index must be positive".into()));
            }
            if spec.grid.dim() != 1 {
                return Err(HolderError::Argument("slow-peak fixture is 1-D".into()));
            }
            let nf = *n as f64;
            GridFunction::sample_scalar(spec.grid.clone(), spec.norms, label, move |x| {
                let t = x[0];
                if t <= 0.0 || t >= 2.0 * nf {
                    0.0
                } else if t <= nf {
                    t / nf
                } else {
                    (2.0 * nf - t) / nf
                }
            })
        }
        FixtureFamily::SharpSpike { n } => {
            if *n == 0 {
                return Err(HolderError::Argument("spike index must be positive".into()));
            }
            if spec.grid.dim() != 1 {
                return Err(HolderError::Argument("sharp-spike fixture is 1-D".into()));
            }
            let nf = *n as f64;
            let peak = 1.0 / nf.sqrt();
            GridFunction::sample_scalar(spec.grid.clone(), spec.norms, label, move |x| {
                let t = x[0].abs();
                if t >= 1.0 / nf {
                    0.0
                } else {
                    peak * (1.0 - nf * t)
                }
            })
        }
        FixtureFamily::Affine { slope } => {
            let slope = *slope;
            GridFunction::sample_scalar(spec.grid.clone(), spec.norms, label, move |x| {
                slope * x.iter().sum::<f64>()
            })
        }
        FixtureFamily::SinDecay { freq, decay } => {
            let (freq, decay) = (*freq, *decay);
            GridFunction::sample_scalar(spec.grid.clone(), spec.norms, label, move |x| {
                let s: f64 = x.iter().sum();
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                (freq * s).sin() * (1.0 + r).powf(-decay)
            })
        }
        FixtureFamily::RandomSmooth { seed, smoothness } => {
            let dim = spec.grid.dim();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let terms = 8usize;
            let mut waves = Vec::with_capacity(terms);
            for k in 1..=terms {
                let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let amp = (k as f64).powf(-smoothness);
                waves.push((w, phase, amp));
            }
            GridFunction::sample_scalar(spec.grid.clone(), spec.norms, label, move |x| {
                waves
                    .iter()
                    .map(|(w, phase, amp)| {
                        let dot: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
                        amp * (dot + phase).cos()
                    })
                    .sum()
            })
        }
    }
}

fn family_label(f: &FixtureFamily) -> String {
    match f {
        FixtureFamily::Tent { n } => format!("tent:n={n}"),
        FixtureFamily::SlowPeak { n, alpha } => format!("slow_peak:n={n},alpha={alpha}"),
        FixtureFamily::SharpSpike { n } => format!("sharp_spike:n={n}"),
        FixtureFamily::Affine { slope } => format!("affine:slope={slope}"),
        FixtureFamily::SinDecay { freq, decay } => format!("sin_decay:freq={freq},decay={decay}"),
        FixtureFamily::RandomSmooth { seed, smoothness } => {
            format!("random_smooth:seed={seed},smoothness={smoothness}")
        }
    }
}

/// Parses a family literal such as `tent:n=1` or
/// `random_smooth:seed=7,smoothness=2`. The slow-peak and sharp-spike
/// families are spelled `appendix_a2` and `appendix_a3` on the CLI surface.
pub fn parse_family(s: &str) -> Result<FixtureFamily> {
    let (name, args) = s.split_once(':').unwrap_or((s, ""));
    let kv = parse_kv(args)?;
    let get = |key: &str| -> Result<f64> {
        kv.iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| HolderError::Argument(format!("family `{name}` needs `{key}=`")))
    };
    match name {
        "tent" => Ok(FixtureFamily::Tent { n: get("n")? }),
        "appendix_a2" => Ok(FixtureFamily::SlowPeak {
            n: get("n")? as u32,
            alpha: get("alpha").unwrap_or(0.5),
        }),
        "appendix_a3" => Ok(FixtureFamily::SharpSpike { n: get("n")? as u32 }),
        "affine" => Ok(FixtureFamily::Affine { slope: get("slope")? }),
        "sin_decay" => Ok(FixtureFamily::SinDecay {
            freq: get("freq").unwrap_or(1.0),
            decay: get("decay").unwrap_or(1.0),
        }),
        "random_smooth" => Ok(FixtureFamily::RandomSmooth {
            seed: get("seed")? as u64,
            smoothness: get("smoothness").unwrap_or(2.0),
        }),
        other => Err(HolderError::Argument(format!("unknown fixture family `{other}`"))),
    }
}

fn parse_kv(args: &str) -> Result<Vec<(String, f64)>> {
    if args.is_empty() {
        return Ok(Vec::new());
    }
    args.split(',')
        .map(|pair| {
            let (k, v) = pair.split_once('=').ok_or_else(|| {
                HolderError::Argument(format!("expected key=value, got `{pair}`"))
            })?;
            let value: f64 = v.trim().parse().map_err(|_| {
                HolderError::Argument(format!("invalid number `{v}` for key `{k}`"))
            })?;
            Ok((k.trim().to_string(), value))
        })
        .collect()
}
