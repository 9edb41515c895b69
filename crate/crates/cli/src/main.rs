//! `holder`: grid Hölder analysis, vanishing-scale classification, mean
//! oscillation, and constructive approximation pipelines.
//!
//! Exit codes: 0 success, 2 input error, 3 plan/classification failure,
//! 4 internal invariant violation. Errors print one machine-readable JSON
//! line on stderr. Reports are deterministic; timings go to stderr.

mod report;
mod svg;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use holder_core::approximators::{
    lipschitz_envelope, mollify, pipeline_vc_to_smooth, EnvelopeParams, MollifierSpec,
};
use holder_core::c0ops::{soft_threshold_map, tensor_mollify, CoordinateSet};
use holder_core::calibration;
use holder_core::error::HolderError;
use holder_core::fixtures::{generate, parse_family, FixtureFamily, FixtureSpec};
use holder_core::grid::{
    load_grid_function, save_grid_function, Grid, GridFunction, NormSpec, SourceNorm, VectorNorm,
};
use holder_core::meanosc::{
    build_cube_stats, bmo_norm, cube_stats_csv, default_levels, meyers_compare, vmo_profiles,
};
use holder_core::modulus::{load_literal, parse_literal, Modulus};
use holder_core::oscillation::{
    classify_vanishing_with, far_profile, holder_seminorm, seminorm_scan, ClassifyConfig,
    FarMode, ScaleProfile, Thresholds,
};

use report::{digest_file, Report};

#[derive(Parser)]
#[command(name = "holder", version, about = "Modulus-weighted Hölder analysis on grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormYArg {
    L2,
    Linf,
    L1,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormXArg {
    L2,
    Linf,
}

impl NormYArg {
    fn to_core(self) -> VectorNorm {
        match self {
            NormYArg::L2 => VectorNorm::L2,
            NormYArg::Linf => VectorNorm::Linf,
            NormYArg::L1 => VectorNorm::L1,
        }
    }
}

impl NormXArg {
    fn to_core(self) -> SourceNorm {
        match self {
            NormXArg::L2 => SourceNorm::L2,
            NormXArg::Linf => SourceNorm::Linf,
        }
    }
}

#[derive(Args)]
struct NormFlags {
    /// Norm on target-space vectors.
    #[arg(long = "norm-y", value_enum, default_value = "l2")]
    norm_y: NormYArg,
    /// Norm on source-space points.
    #[arg(long = "norm-x", value_enum, default_value = "l2")]
    norm_x: NormXArg,
}

impl NormFlags {
    fn spec(&self) -> NormSpec {
        NormSpec { y: self.norm_y.to_core(), x: self.norm_x.to_core() }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Seminorm, oscillation profiles, vanishing verdicts, and cube statistics.
    Analyze {
        #[arg(long)]
        input: String,
        /// Modulus literal: power:A, log:c=C, or table:PATH.
        #[arg(long)]
        modulus: String,
        #[command(flatten)]
        norms: NormFlags,
        /// Explicit profile scales (comma-separated); default: doubling ladder.
        #[arg(long)]
        scales: Option<String>,
        /// Relative band half-width for profile scales.
        #[arg(long, default_value_t = 0.25)]
        band: f64,
        /// Verdict thresholds eps_small,eps_large,eps_far.
        #[arg(long, default_value = "0.1,0.1,0.1")]
        thresholds: String,
        /// Report JSON path.
        #[arg(long)]
        report: Option<String>,
        /// Profile CSV path (columns delta,value,pairs).
        #[arg(long = "profile-csv")]
        profile_csv: Option<String>,
        /// Cube statistics CSV path.
        #[arg(long = "cubes-csv")]
        cubes_csv: Option<String>,
    },
    /// Truncate-then-mollify approximation at a target tolerance.
    Approximate {
        #[arg(long)]
        input: String,
        #[arg(long)]
        modulus: String,
        #[command(flatten)]
        norms: NormFlags,
        #[arg(long)]
        epsilon: f64,
        /// Approximant output CSV.
        #[arg(long)]
        output: String,
        /// Plan JSON path.
        #[arg(long)]
        plan: Option<String>,
        #[arg(long)]
        report: Option<String>,
    },
    /// Parameter sweeps producing (parameter, seminorm-error, sup-error) curves.
    Convergence {
        /// Operator to sweep: envelope, soft-threshold, mollify, a3-sequence.
        #[arg(long)]
        operator: String,
        /// Input function (not used by a3-sequence).
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        modulus: String,
        #[command(flatten)]
        norms: NormFlags,
        /// Comma-separated parameter values; may be empty.
        #[arg(long, default_value = "")]
        sweep: String,
        /// Curve CSV output path.
        #[arg(long)]
        output: String,
        /// SVG plot path; defaults to the CSV path with extension .svg.
        #[arg(long)]
        svg: Option<String>,
        #[arg(long)]
        report: Option<String>,
    },
    /// Deterministic fixture generation.
    Fixtures {
        /// Family literal: tent:n=1, appendix_a2:n=4,alpha=0.5, appendix_a3:n=16,
        /// affine:slope=1, sin_decay:freq=1,decay=1, random_smooth:seed=7,smoothness=2.
        #[arg(long)]
        family: String,
        /// Grid origin, comma-separated per axis.
        #[arg(long, allow_hyphen_values = true)]
        origin: String,
        /// Grid spacing, comma-separated per axis.
        #[arg(long)]
        spacing: String,
        /// Grid shape, comma-separated per axis.
        #[arg(long)]
        shape: String,
        #[arg(long)]
        output: String,
        /// Override seed for random_smooth families.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Coordinatewise soft-threshold composition (sup-norm geometry).
    #[command(name = "c0-threshold")]
    C0Threshold {
        #[arg(long)]
        input: String,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        output: String,
        /// Optional modulus for the sup-error bound in the report.
        #[arg(long)]
        modulus: Option<String>,
        #[arg(long)]
        report: Option<String>,
        /// Norm on target-space vectors.
        #[arg(long = "norm-y", value_enum, default_value = "linf")]
        norm_y: NormYArg,
    },
    /// Tensor-product mollification along selected axes (sup-norm geometry).
    #[command(name = "c0-mollify")]
    C0Mollify {
        #[arg(long)]
        input: String,
        #[arg(long)]
        eta: f64,
        /// Axes to smooth, comma-separated; default all.
        #[arg(long)]
        axes: Option<String>,
        #[arg(long)]
        output: String,
        #[arg(long)]
        modulus: Option<String>,
        #[arg(long)]
        report: Option<String>,
        #[arg(long = "norm-y", value_enum, default_value = "linf")]
        norm_y: NormYArg,
    },
    /// Recompute the calibration ceilings from the frozen fixture suites.
    Calibrate {
        /// Output path; stdout when omitted.
        #[arg(long)]
        output: Option<String>,
    },
}

struct Failure {
    code: u8,
    kind: &'static str,
    msg: String,
    line: Option<usize>,
    clause: Option<String>,
}

impl Failure {
    fn internal(msg: impl Into<String>) -> Self {
        Failure { code: 4, kind: "internal", msg: msg.into(), line: None, clause: None }
    }
}

impl From<HolderError> for Failure {
    fn from(e: HolderError) -> Self {
        match e {
            HolderError::Parse { line, ref msg } => Failure {
                code: 2,
                kind: "parse",
                msg: msg.clone(),
                line: Some(line),
                clause: None,
            },
            HolderError::Plan { ref clause, ref msg } => Failure {
                code: 3,
                kind: "plan",
                msg: msg.clone(),
                line: None,
                clause: Some(clause.clone()),
            },
            HolderError::Io(ref e) => Failure {
                code: 2,
                kind: "io",
                msg: e.to_string(),
                line: None,
                clause: None,
            },
            other => Failure {
                code: 2,
                kind: "input",
                msg: other.to_string(),
                line: None,
                clause: None,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = run(cli.command);
    eprintln!("# timing: {:.3}s", start.elapsed().as_secs_f64());
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let mut err = json!({ "code": f.code, "kind": f.kind, "msg": f.msg });
            if let Some(line) = f.line {
                err["line"] = json!(line);
            }
            if let Some(clause) = f.clause {
                err["clause"] = json!(clause);
            }
            eprintln!("error: {err}");
            ExitCode::from(f.code)
        }
    }
}

fn load_modulus(literal: &str) -> Result<Modulus, Failure> {
    Ok(load_literal(&parse_literal(literal)?)?)
}

fn load_input(path: &str, norms: NormSpec) -> Result<GridFunction, Failure> {
    Ok(load_grid_function(path)?.with_norms(norms))
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim().parse::<f64>().map_err(|_| {
                Failure::from(HolderError::Argument(format!("invalid number `{p}`")))
            })
        })
        .collect()
}

fn write_file(path: &str, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::from(HolderError::Io(e)))
}

fn profile_csv(profile: &ScaleProfile) -> String {
    let mut out = String::from("delta,value,pairs\n");
    for e in &profile.entries {
        out.push_str(&format!("{},{},{}\n", e.delta, e.value, e.pairs));
    }
    out
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::internal(format!("serialization failed: {e}")))
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Analyze {
            input,
            modulus,
            norms,
            scales,
            band,
            thresholds,
            report,
            profile_csv: profile_path,
            cubes_csv,
        } => {
            let m = load_modulus(&modulus)?;
            let f = load_input(&input, norms.spec())?;
            let cert = m.check_admissible();

            let mut config = ClassifyConfig::auto(f.grid(), f.norms().x);
            config.band = band;
            if let Some(s) = &scales {
                config.scales = parse_f64_list(s)?;
            }
            let th = parse_f64_list(&thresholds)?;
            if th.len() != 3 {
                return Err(HolderError::Argument(
                    "thresholds must be three comma-separated values".into(),
                )
                .into());
            }
            let th = Thresholds { small: th[0], large: th[1], far: th[2] };

            let scan = seminorm_scan(&f, &m)?;
            let verdict = classify_vanishing_with(&f, &m, th, &config)?;
            let far_max = far_profile(&f, &m, &config.far_deltas, FarMode::Max)?;

            let (lo, hi) = default_levels(f.grid());
            let stats = build_cube_stats(&f, &m, lo, hi)?;
            let bmo = bmo_norm(&stats)?;
            let vmo = vmo_profiles(&stats).ok();

            let mut rep = Report::new(
                "analyze",
                vec![digest_file(&input)?],
                json!({
                    "modulus": modulus,
                    "norm_y": f.norms().y,
                    "norm_x": f.norms().x,
                    "scales": config.scales,
                    "far_deltas": config.far_deltas,
                    "band": band,
                    "thresholds": th,
                    "levels": [lo, hi],
                }),
            );
            rep.modulus_certificate = Some(to_value(&cert)?);
            rep.seminorm = Some(to_value(&scan)?);
            rep.scale_profile = Some(to_value(&verdict.profile)?);
            rep.far_profile_min = Some(to_value(&verdict.far_evidence)?);
            rep.far_profile_max = Some(to_value(&far_max)?);
            rep.bmo = Some(json!({ "norm": bmo, "cubes": stats.total_cubes() }));
            if let Some(v) = &vmo {
                rep.vmo = Some(to_value(v)?);
            }
            if !scan.exact {
                rep.warnings.push("seminorm is a sampled lower bound".into());
            }
            if cert.dini_constant.is_finite() && f.grid().dim() <= 3 {
                rep.meyers = Some(to_value(&meyers_compare(&f, &m, &cert)?)?);
            } else {
                rep.warnings
                    .push("meyers comparison skipped: dini constant not finite or dim > 3".into());
            }
            rep.verdict = Some(to_value(&verdict)?);

            if let Some(p) = &profile_path {
                write_file(p, &profile_csv(&verdict.profile))?;
            }
            if let Some(p) = &cubes_csv {
                write_file(p, &cube_stats_csv(&stats))?;
            }
            emit_report(rep, report.as_deref())?;
            println!(
                "seminorm = {} ({} pairs{}), verdict small/large/far = {}/{}/{}",
                scan.value,
                scan.pairs_evaluated,
                if scan.exact { "" } else { ", sampled" },
                verdict.small,
                verdict.large,
                verdict.far
            );
            Ok(())
        }

        Command::Approximate { input, modulus, norms, epsilon, output, plan, report } => {
            let m = load_modulus(&modulus)?;
            let f = load_input(&input, norms.spec())?;
            let (h, approx_plan, pipe) = pipeline_vc_to_smooth(&f, &m, epsilon)?;
            save_grid_function(&h, &output)?;
            if let Some(p) = &plan {
                let mut s = serde_json::to_string_pretty(&approx_plan)
                    .map_err(|e| Failure::internal(e.to_string()))?;
                s.push('\n');
                write_file(p, &s)?;
            }
            let ceiling = calibration::shipped().pipeline_constant;
            let within = pipe.seminorm_error <= ceiling * epsilon;
            let mut rep = Report::new(
                "approximate",
                vec![digest_file(&input)?],
                json!({
                    "modulus": modulus,
                    "norm_y": f.norms().y,
                    "norm_x": f.norms().x,
                    "epsilon": epsilon,
                }),
            );
            rep.plan = Some(to_value(&approx_plan)?);
            rep.pipeline = Some(to_value(&pipe)?);
            rep.measurements = Some(json!({
                "seminorm_error": pipe.seminorm_error,
                "pipeline_ceiling": ceiling,
                "within_ceiling": within,
            }));
            if pipe.truncation_clipped {
                rep.warnings
                    .push("truncation ball exceeds the box; composition clipped".into());
            }
            emit_report(rep, report.as_deref())?;
            println!(
                "approximant written to {output}; seminorm error {} (ceiling {})",
                pipe.seminorm_error,
                ceiling * epsilon
            );
            Ok(())
        }

        Command::Convergence {
            operator,
            input,
            modulus,
            norms,
            sweep,
            output,
            svg: svg_path,
            report,
        } => {
            let m = load_modulus(&modulus)?;
            let params = parse_f64_list(&sweep)?;
            let mut rows: Vec<(f64, f64, f64)> = Vec::new();
            let mut inputs = Vec::new();

            match operator.as_str() {
                "envelope" | "soft-threshold" | "mollify" => {
                    let path = input.as_deref().ok_or_else(|| {
                        Failure::from(HolderError::Argument(format!(
                            "operator `{operator}` needs --input"
                        )))
                    })?;
                    inputs.push(digest_file(path)?);
                    let f = load_input(path, norms.spec())?;
                    for &p in &params {
                        let g = match operator.as_str() {
                            "envelope" => {
                                let ep = EnvelopeParams::for_function(&f, &m, p)?;
                                lipschitz_envelope(&f, &ep)?
                            }
                            "soft-threshold" => soft_threshold_map(&f, p)?,
                            _ => mollify(&f, &MollifierSpec::polynomial(p))?,
                        };
                        let diff = f.sub(&g)?;
                        rows.push((p, holder_seminorm(&diff, &m)?, f.sup_diff(&g)?));
                    }
                }
                "a3-sequence" => {
                    // Sharp-spike sequence measured against the zero limit.
                    let max_n = params.iter().fold(4.0_f64, |a, &b| a.max(b)) as u32;
                    let grid = Grid::line(-1.0, 1.0, 1.0 / (4.0 * max_n as f64))?;
                    for &p in &params {
                        let spec = FixtureSpec {
                            family: FixtureFamily::SharpSpike { n: p as u32 },
                            grid: grid.clone(),
                            norms: norms.spec(),
                        };
                        let fnx = generate(&spec)?;
                        let sup = fnx.values().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                        rows.push((p, holder_seminorm(&fnx, &m)?, sup));
                    }
                }
                other => {
                    return Err(HolderError::Argument(format!(
                        "unknown operator `{other}`"
                    ))
                    .into())
                }
            }

            let mut csv = String::from("parameter,seminorm_error,sup_error\n");
            for (p, s, u) in &rows {
                csv.push_str(&format!("{p},{s},{u}\n"));
            }
            write_file(&output, &csv)?;

            let svg_file = svg_path.unwrap_or_else(|| replace_ext(&output, "svg"));
            let seminorm_series: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
            let sup_series: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.2)).collect();
            let plot = svg::line_plot(
                &format!("{operator} sweep"),
                &[("seminorm_error", seminorm_series), ("sup_error", sup_series)],
            );
            write_file(&svg_file, &plot)?;

            let mut rep = Report::new(
                "convergence",
                inputs,
                json!({
                    "operator": operator,
                    "modulus": modulus,
                    "sweep": params,
                    "output": output,
                }),
            );
            rep.measurements = Some(json!(rows
                .iter()
                .map(|(p, s, u)| json!({ "parameter": p, "seminorm_error": s, "sup_error": u }))
                .collect::<Vec<_>>()));
            emit_report(rep, report.as_deref())?;
            println!("curve with {} rows written to {output}", rows.len());
            Ok(())
        }

        Command::Fixtures { family, origin, spacing, shape, output, seed } => {
            let mut fam = parse_family(&family)?;
            if let (Some(s), FixtureFamily::RandomSmooth { seed: fseed, .. }) = (seed, &mut fam)
            {
                *fseed = s;
            }
            let origin = parse_f64_list(&origin)?;
            let spacing = parse_f64_list(&spacing)?;
            let shape: Vec<usize> = parse_f64_list(&shape)?
                .into_iter()
                .map(|v| v as usize)
                .collect();
            let grid = Grid::new(origin, spacing, shape)?;
            let spec = FixtureSpec { family: fam, grid, norms: NormSpec::default() };
            let f = generate(&spec)?;
            save_grid_function(&f, &output)?;
            println!(
                "fixture `{}` with {} points written to {output}",
                f.label(),
                f.grid().len()
            );
            Ok(())
        }

        Command::C0Threshold { input, radius, output, modulus, report, norm_y } => {
            let norms = NormSpec { y: norm_y.to_core(), x: SourceNorm::Linf };
            let f = load_input(&input, norms)?;
            let g = soft_threshold_map(&f, radius)?;
            save_grid_function(&g, &output)?;
            let mut rep = Report::new(
                "c0-threshold",
                vec![digest_file(&input)?],
                json!({ "radius": radius, "norm_y": norms.y }),
            );
            if let Some(lit) = &modulus {
                let m = load_modulus(lit)?;
                let seminorm = holder_seminorm(&f, &m)?;
                let sup = f.sup_diff(&g)?;
                let bound = m.eval(radius)? * seminorm;
                rep.measurements = Some(json!({
                    "sup_diff": sup,
                    "bound": bound,
                    "within_bound": sup <= bound + 1e-12,
                    "seminorm_input": seminorm,
                }));
            }
            emit_report(rep, report.as_deref())?;
            println!("soft-threshold composition written to {output}");
            Ok(())
        }

        Command::C0Mollify { input, eta, axes, output, modulus, report, norm_y } => {
            let norms = NormSpec { y: norm_y.to_core(), x: SourceNorm::Linf };
            let g = load_input(&input, norms)?;
            let coord_set = match &axes {
                Some(s) => {
                    let idx: Vec<usize> = parse_f64_list(s)?
                        .into_iter()
                        .map(|v| v as usize)
                        .collect();
                    CoordinateSet::new(idx, g.grid().dim())?
                }
                None => CoordinateSet::all(g.grid().dim()),
            };
            let h = tensor_mollify(&g, eta, &coord_set)?;
            save_grid_function(&h, &output)?;
            let mut rep = Report::new(
                "c0-mollify",
                vec![digest_file(&input)?],
                json!({ "eta": eta, "axes": coord_set.indices(), "norm_y": norms.y }),
            );
            if let Some(lit) = &modulus {
                let m = load_modulus(lit)?;
                let s_before = holder_seminorm(&g, &m)?;
                let s_after = holder_seminorm(&h, &m)?;
                let sup = g.sup_diff(&h)?;
                let config = ClassifyConfig::auto(g.grid(), g.norms().x);
                let delta_small = config.scales[0];
                // The tolerance implied by the smoothing radius at the finest
                // profile scale: ω(η)·(1+‖g‖)/ω(δ).
                let implied_epsilon = m.eval(eta)? * (1.0 + s_before) / m.eval(delta_small)?;
                rep.measurements = Some(json!({
                    "sup_diff": sup,
                    "sup_bound": s_before * m.eval(eta)?,
                    "seminorm_before": s_before,
                    "seminorm_after": s_after,
                    "seminorm_nonincreasing": s_after <= s_before * (1.0 + 1e-12),
                    "implied_epsilon": implied_epsilon,
                    "small_scale": delta_small,
                }));
            }
            emit_report(rep, report.as_deref())?;
            println!("tensor mollification written to {output}");
            Ok(())
        }

        Command::Calibrate { output } => {
            let table = calibration::compute()?;
            let rendered = table.to_json();
            match &output {
                Some(p) => {
                    write_file(p, &rendered)?;
                    println!("calibration table written to {p}");
                }
                None => print!("{rendered}"),
            }
            if rendered != calibration::shipped_json() {
                eprintln!("# note: computed table differs from the pinned asset");
            }
            Ok(())
        }
    }
}

fn emit_report(rep: Report, path: Option<&str>) -> Result<(), Failure> {
    if let Some(p) = path {
        write_file(p, &rep.to_json())?;
    }
    Ok(())
}

fn replace_ext(path: &str, ext: &str) -> String {
    std::path::Path::new(path)
        .with_extension(ext)
        .to_string_lossy()
        .into_owned()
}
