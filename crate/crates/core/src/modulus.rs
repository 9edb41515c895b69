//! Moduli of continuity and their regularity certificates.
//!
//! A modulus `ω` is non-decreasing with `ω(0) = 0` and `ω(t) > 0` for `t > 0`.
//! The analysis downstream needs four regularity facts about it: the limits
//! `ω(t) → 0` (t → 0) and `ω(t) → ∞` (t → ∞), the sublinearity `t/ω(t) → 0`,
//! and the doubling bound `ω(2t) ≤ C_db·ω(t)`. A fifth, quantitative constant
//! is the Dini-type supremum `sup_s (1/ω(s)) ∫₀^s ω(t) dt/t`. This module
//! evaluates moduli and estimates all of these numerically.

use serde::{Deserialize, Serialize};

use crate::error::{HolderError, Result};

/// Probe depth for the dyadic limit probes `t = 2^{±k}` in [`Modulus::check_admissible`].
const PROBE_DEPTH: i32 = 40;

/// Simpson subintervals per dyadic block in the Dini integral.
const DINI_QUADRATURE_DEFAULT: usize = 64;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// `ω(t) = t^α`, `α ∈ (0, 1]`.
    Power { alpha: f64 },
    /// `ω(t) = c / ln(1/t)` for `t ≤ 1/e`, extended linearly (`c·e·t`) past `1/e`.
    ///
    /// The linear extension keeps ω continuous with matching one-sided slope
    /// at `t = 1/e` and grows to infinity.
    LogType { c: f64 },
    /// Sorted knots `(t, ω(t))`, interpolated log-log linearly between knots
    /// so that pure powers are reproduced exactly.
    Tabulated { knots: Vec<(f64, f64)>, extrapolate: bool },
}

/// A modulus of continuity.
#[derive(Debug, Clone, PartialEq)]
pub struct Modulus {
    kind: Kind,
}

/// Numerical regularity certificate for a modulus.
///
/// `dini_constant` is `+∞` when the integral is estimated divergent; that is a
/// valid certificate outcome, not an error. Inconclusive limit probes set the
/// corresponding flag to `false` and leave a note.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusCertificate {
    pub doubling_constant: f64,
    pub dini_constant: f64,
    pub coercive_zero: bool,
    pub coercive_infty: bool,
    pub sublinear_zero: bool,
    pub sample_range: (f64, f64),
    pub notes: Vec<String>,
}

/// Parsed form of a modulus literal (`power:0.5`, `log:c=1`, `table:path.csv`).
#[derive(Debug, Clone, PartialEq)]
pub enum ModulusLiteral {
    Power(f64),
    LogType(f64),
    Table(String),
}

impl Modulus {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(HolderError::Argument(format!(
                "power modulus exponent must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self { kind: Kind::Power { alpha } })
    }

    pub fn log_type(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(HolderError::Argument(format!(
                "log-type modulus scale must be positive, got {c}"
            )));
        }
        Ok(Self { kind: Kind::LogType { c } })
    }

    /// Builds a tabulated modulus. Knots must have strictly increasing
    /// positive `t` and non-decreasing positive `ω`.
    pub fn tabulated(knots: Vec<(f64, f64)>, extrapolate: bool) -> Result<Self> {
        if knots.len() < 2 {
            return Err(HolderError::Argument(
                "tabulated modulus needs at least two knots".into(),
            ));
        }
        for (i, &(t, w)) in knots.iter().enumerate() {
            if !(t > 0.0 && t.is_finite() && w > 0.0 && w.is_finite()) {
                return Err(HolderError::Argument(format!(
                    "knot {i} must have positive finite t and omega, got ({t}, {w})"
                )));
            }
            if i > 0 {
                let (tp, wp) = knots[i - 1];
                if t <= tp {
                    return Err(HolderError::Argument(format!(
                        "knot t values must be strictly increasing; knot {i} has t = {t} after {tp}"
                    )));
                }
                if w < wp {
                    return Err(HolderError::Argument(format!(
                        "knot omega values must be non-decreasing; knot {i} has omega = {w} after {wp}"
                    )));
                }
            }
        }
        Ok(Self { kind: Kind::Tabulated { knots, extrapolate } })
    }

    /// Evaluates `ω(t)`. By convention `ω(0) = 0` regardless of kind.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(HolderError::Domain(format!(
                "modulus argument must be non-negative, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        match &self.kind {
            Kind::Power { alpha } => Ok(t.powf(*alpha)),
            Kind::LogType { c } => {
                let knee = std::f64::consts::E.recip();
                if t <= knee {
                    Ok(c / (1.0 / t).ln())
                } else {
                    Ok(c * std::f64::consts::E * t)
                }
            }
            Kind::Tabulated { knots, extrapolate } => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if (t < first.0 || t > last.0) && !extrapolate {
                    return Err(HolderError::Range(format!(
                        "t = {t} outside tabulated range [{}, {}] and extrapolation is disabled",
                        first.0, last.0
                    )));
                }
                // Locate the segment; out-of-range queries reuse the end segments.
                let seg = match knots.iter().position(|&(kt, _)| t <= kt) {
                    Some(0) => 0,
                    Some(i) => i - 1,
                    None => knots.len() - 2,
                };
                let (t0, w0) = knots[seg];
                let (t1, w1) = knots[seg + 1];
                let u = (t.ln() - t0.ln()) / (t1.ln() - t0.ln());
                Ok((w0.ln() * (1.0 - u) + w1.ln() * u).exp())
            }
        }
    }

    /// Max of `ω(2t)/ω(t)` over the grid; an estimate of the doubling constant.
    ///
    /// For the power kind the ratio is constant in `t`, so any grid reproduces
    /// `2^α` exactly.
    pub fn doubling_constant(&self, t_grid: &[f64]) -> Result<f64> {
        if t_grid.is_empty() {
            return Err(HolderError::Argument("doubling grid must be nonempty".into()));
        }
        let mut best = 0.0_f64;
        for &t in t_grid {
            if !(t > 0.0) {
                return Err(HolderError::Argument(format!(
                    "doubling grid entries must be positive, got {t}"
                )));
            }
            let ratio = self.eval(2.0 * t)? / self.eval(t)?;
            best = best.max(ratio);
        }
        Ok(best)
    }

    /// Estimates `sup_{s ∈ s_grid} (1/ω(s)) ∫₀^s ω(t) dt/t`.
    ///
    /// The integral runs over dyadic blocks `[s·2^{-k-1}, s·2^{-k}]` after the
    /// substitution `t = e^u`, with composite Simpson per block; the remaining
    /// tail is summed geometrically from the observed block decay. A block
    /// sequence that fails to decay geometrically signals a divergent integral
    /// and yields the `+∞` sentinel. For the power kind the value is `1/α`.
    pub fn dini_constant(&self, s_grid: &[f64], quadrature_points: usize) -> Result<f64> {
        if quadrature_points < 16 {
            return Err(HolderError::Argument(format!(
                "dini quadrature needs at least 16 points, got {quadrature_points}"
            )));
        }
        if s_grid.is_empty() {
            return Err(HolderError::Argument("dini grid must be nonempty".into()));
        }
        let mut sup = 0.0_f64;
        for &s in s_grid {
            if !(s > 0.0) {
                return Err(HolderError::Argument(format!(
                    "dini grid entries must be positive, got {s}"
                )));
            }
            let v = self.dini_at(s, quadrature_points)?;
            if !v.is_finite() {
                return Ok(f64::INFINITY);
            }
            sup = sup.max(v);
        }
        Ok(sup)
    }

    fn dini_at(&self, s: f64, q: usize) -> Result<f64> {
        const MAX_BLOCKS: usize = 64;
        let ln2 = std::f64::consts::LN_2;
        let top = s.ln();
        let mut acc = 0.0_f64;
        let mut blocks: Vec<f64> = Vec::new();
        for k in 0..MAX_BLOCKS {
            let hi = top - k as f64 * ln2;
            let lo = hi - ln2;
            let b = self.simpson_log_block(lo, hi, q)?;
            if !b.is_finite() {
                return Ok(f64::INFINITY);
            }
            acc += b;
            blocks.push(b);
            if b <= acc * 1e-15 {
                // Remaining tail is below round-off; stop.
                return Ok(acc / self.eval(s)?);
            }
        }
        // Geometric tail from the observed block decay. A ratio creeping up
        // toward 1 (harmonic-like blocks) marks a divergent integral; a
        // constant ratio below 1 is a genuine geometric tail.
        let b_last = blocks[MAX_BLOCKS - 1];
        let b_prev = blocks[MAX_BLOCKS - 2];
        let rho = b_last / b_prev;
        let rho_mid = blocks[MAX_BLOCKS / 2] / blocks[MAX_BLOCKS / 2 - 1];
        let drifting = rho >= 0.95 && rho - rho_mid >= 0.005;
        if !(rho < 0.9995) || drifting {
            return Ok(f64::INFINITY);
        }
        acc += b_last * rho / (1.0 - rho);
        Ok(acc / self.eval(s)?)
    }

    /// Composite Simpson of `u ↦ ω(e^u)` on `[lo, hi]`.
    fn simpson_log_block(&self, lo: f64, hi: f64, q: usize) -> Result<f64> {
        let n = if q % 2 == 0 { q } else { q + 1 };
        let h = (hi - lo) / n as f64;
        let mut sum = self.eval(lo.exp())? + self.eval(hi.exp())?;
        for i in 1..n {
            let w = self.eval((lo + i as f64 * h).exp())?;
            sum += if i % 2 == 1 { 4.0 * w } else { 2.0 * w };
        }
        Ok(sum * h / 3.0)
    }

    /// Runs all limit probes and constant estimates, producing a certificate.
    ///
    /// Probes sit on the dyadic grids `2^{-k}` and `2^{k}`, `k ≤ 40` (clamped
    /// into the tabulated range when extrapolation is off). Deterministic:
    /// identical inputs give bit-identical certificates.
    pub fn check_admissible(&self) -> ModulusCertificate {
        let mut notes = Vec::new();
        let (lo_exp, hi_exp) = self.probe_exponents();
        let t_lo = 2.0_f64.powi(lo_exp);
        let t_hi = 2.0_f64.powi(hi_exp);

        // Quarter-octave ratio grid keeps mid-range doubling bumps visible.
        let mut ratio_grid = Vec::new();
        let mut e = lo_exp as f64;
        while e <= (hi_exp - 1) as f64 + 1e-9 {
            ratio_grid.push(2.0_f64.powf(e));
            e += 0.25;
        }
        let doubling = self.doubling_constant(&ratio_grid).unwrap_or(f64::NAN);

        let dini_grid: Vec<f64> = [0.25, 1.0, 4.0]
            .iter()
            .map(|&s: &f64| s.clamp(t_lo, t_hi))
            .collect();
        let dini = self
            .dini_constant(&dini_grid, DINI_QUADRATURE_DEFAULT)
            .unwrap_or(f64::INFINITY);

        let probe = |t: f64| self.eval(t).unwrap_or(f64::NAN);
        let w_deep = probe(t_lo);
        let w_mid_lo = probe(2.0_f64.powi(lo_exp / 2));
        let coercive_zero = if w_deep.is_nan() || w_mid_lo.is_nan() {
            notes.push("coercive_zero probe failed to evaluate".into());
            false
        } else {
            w_deep <= 1e-12 || w_deep <= 0.75 * w_mid_lo
        };

        let w_far = probe(t_hi);
        let w_mid_hi = probe(2.0_f64.powi(hi_exp / 2));
        let coercive_infty = if w_far.is_nan() || w_mid_hi.is_nan() {
            notes.push("coercive_infty probe failed to evaluate".into());
            false
        } else {
            w_far >= 1e6 * probe(1.0_f64.clamp(t_lo, t_hi)) || w_far >= 1.5 * w_mid_hi
        };

        let q_deep = t_lo / w_deep;
        let q_mid = 2.0_f64.powi(lo_exp / 2) / w_mid_lo;
        let sublinear_zero = if !q_deep.is_finite() || !q_mid.is_finite() {
            notes.push("sublinear_zero probe failed to evaluate".into());
            false
        } else {
            q_deep <= 0.75 * q_mid
        };

        ModulusCertificate {
            doubling_constant: doubling,
            dini_constant: dini,
            coercive_zero,
            coercive_infty,
            sublinear_zero,
            sample_range: (t_lo, t_hi),
            notes,
        }
    }

    /// Probe exponent range, clamped into the table for non-extrapolating moduli.
    fn probe_exponents(&self) -> (i32, i32) {
        match &self.kind {
            Kind::Tabulated { knots, extrapolate: false } => {
                let lo = knots[0].0.log2().ceil() as i32;
                // Leave room for the 2t query in the doubling ratio.
                let hi = (knots[knots.len() - 1].0.log2().floor() as i32) - 1;
                (lo.max(-PROBE_DEPTH), hi.min(PROBE_DEPTH).max(lo + 2))
            }
            _ => (-PROBE_DEPTH, PROBE_DEPTH),
        }
    }
}

/// Parses a modulus literal: `power:0.5`, `log:c=1`, or `table:path.csv`.
pub fn parse_literal(s: &str) -> Result<ModulusLiteral> {
    let (kind, arg) = s.split_once(':').ok_or_else(|| {
        HolderError::Argument(format!("modulus literal `{s}` must look like kind:args"))
    })?;
    match kind {
        "power" => {
            let alpha: f64 = arg.trim().parse().map_err(|_| {
                HolderError::Argument(format!("invalid power exponent `{arg}`"))
            })?;
            Modulus::power(alpha)?;
            Ok(ModulusLiteral::Power(alpha))
        }
        "log" => {
            let inner = arg.trim().strip_prefix("c=").ok_or_else(|| {
                HolderError::Argument(format!("log modulus takes `c=<value>`, got `{arg}`"))
            })?;
            let c: f64 = inner.parse().map_err(|_| {
                HolderError::Argument(format!("invalid log modulus scale `{inner}`"))
            })?;
            Modulus::log_type(c)?;
            Ok(ModulusLiteral::LogType(c))
        }
        "table" => {
            if arg.is_empty() {
                return Err(HolderError::Argument("table literal needs a path".into()));
            }
            Ok(ModulusLiteral::Table(arg.to_string()))
        }
        other => Err(HolderError::Argument(format!("unknown modulus kind `{other}`"))),
    }
}

/// Parses knot CSV with header `t,omega`. Line numbers in errors are 1-based.
pub fn parse_table_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut knots = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != "t,omega" {
                return Err(HolderError::Parse {
                    line: line_no,
                    msg: format!("expected header `t,omega`, got `{line}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let mut parts = line.split(',');
        let t = parse_field(parts.next(), line_no, "t")?;
        let w = parse_field(parts.next(), line_no, "omega")?;
        if parts.next().is_some() {
            return Err(HolderError::Parse {
                line: line_no,
                msg: "expected exactly two columns".into(),
            });
        }
        knots.push((t, w));
    }
    if !saw_header {
        return Err(HolderError::Parse { line: 1, msg: "missing header `t,omega`".into() });
    }
    Ok(knots)
}

fn parse_field(f: Option<&str>, line: usize, name: &str) -> Result<f64> {
    let raw = f.ok_or_else(|| HolderError::Parse {
        line,
        msg: format!("missing column `{name}`"),
    })?;
    let v: f64 = raw.trim().parse().map_err(|_| HolderError::Parse {
        line,
        msg: format!("invalid number `{raw}` in column `{name}`"),
    })?;
    if !v.is_finite() {
        return Err(HolderError::Parse {
            line,
            msg: format!("non-finite value in column `{name}`"),
        });
    }
    Ok(v)
}

/// Resolves a parsed literal into a modulus, loading table files as needed.
/// Tables loaded from CSV extrapolate by default so they can be evaluated on
/// arbitrary grids.
pub fn load_literal(lit: &ModulusLiteral) -> Result<Modulus> {
    match lit {
        ModulusLiteral::Power(a) => Modulus::power(*a),
        ModulusLiteral::LogType(c) => Modulus::log_type(*c),
        ModulusLiteral::Table(path) => {
            let text = std::fs::read_to_string(path)?;
            Modulus::tabulated(parse_table_csv(&text)?, true)
        }
    }
}
