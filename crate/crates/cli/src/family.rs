//! The Horodecki 3×3 family: per-point margins, grid sweeps and threshold
//! search.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use lamom::maps::{transpose_map, PositiveMapSpec};
use lamom::moments::{
    q3_criterion, q3_optimized_criterion, state_moments, CriteriaConfig, Verdict,
};
use lamom::states::horodecki_state;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::csv_float;
use crate::CliError;

pub const FAMILY_MIN: f64 = 2.0;
pub const FAMILY_MAX: f64 = 5.0;
pub const COARSE_POINTS: usize = 61;
pub const MIN_THRESHOLD_TOL: f64 = 1e-9;

pub const CSV_HEADER: &str = "a,q2,q3,H,G,p2,p3,F,verdict_q3,verdict_q3o,verdict_ppt3o";

pub fn check_family(name: &str) -> Result<(), CliError> {
    if name.eq_ignore_ascii_case("horodecki") {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "unknown family {name:?} (supported: horodecki)"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// `q₃ ≥ q₂²` under the chosen map.
    Q3,
    /// Optimized `q₃` bound under the chosen map.
    Q3o,
    /// Optimized `p₃` bound on PT-moments.
    Ppt3o,
}

impl FromStr for Criterion {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "q3" => Ok(Self::Q3),
            "q3o" => Ok(Self::Q3o),
            "ppt3o" => Ok(Self::Ppt3o),
            _ => Err(CliError::Input(format!(
                "unknown criterion {s:?} (expected q3, q3o or ppt3o)"
            ))),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Q3 => "q3",
            Self::Q3o => "q3o",
            Self::Ppt3o => "ppt3o",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub a: f64,
    pub q2: f64,
    pub q3: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub p2: f64,
    pub p3: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub verdict_q3: Verdict,
    pub verdict_q3o: Verdict,
    pub verdict_ppt3o: Verdict,
}

impl SweepRow {
    pub fn margin(&self, c: Criterion) -> f64 {
        match c {
            Criterion::Q3 => self.h,
            Criterion::Q3o => self.g,
            Criterion::Ppt3o => self.f,
        }
    }

    pub fn verdict(&self, c: Criterion) -> Verdict {
        match c {
            Criterion::Q3 => self.verdict_q3,
            Criterion::Q3o => self.verdict_q3o,
            Criterion::Ppt3o => self.verdict_ppt3o,
        }
    }

    fn csv_line(&self) -> String {
        let nums = [
            self.a, self.q2, self.q3, self.h, self.g, self.p2, self.p3, self.f,
        ];
        let mut cells: Vec<String> = nums.iter().map(|&x| csv_float(x)).collect();
        cells
            .extend([self.verdict_q3, self.verdict_q3o, self.verdict_ppt3o].map(|v| v.to_string()));
        cells.join(",")
    }
}

/// Margins and verdicts of `σ_a` under `lam` and under the transpose map.
pub fn family_row(
    a: f64,
    lam: &PositiveMapSpec,
    cfg: &CriteriaConfig,
) -> Result<SweepRow, CliError> {
    let rho = horodecki_state(a)?;
    let q = state_moments(&rho, lam, cfg.rank_tol)?;
    let p = state_moments(&rho, &transpose_map(3), cfg.rank_tol)?;
    let h = q3_criterion(&q, cfg.report_tol);
    let g = q3_optimized_criterion(&q, cfg.report_tol);
    let f = q3_optimized_criterion(&p, cfg.report_tol);
    Ok(SweepRow {
        a,
        q2: q.q2(),
        q3: q.q3(),
        h: h.margin,
        g: g.margin,
        p2: p.q2(),
        p3: p.q3(),
        f: f.margin,
        verdict_q3: h.verdict,
        verdict_q3o: g.verdict,
        verdict_ppt3o: f.verdict,
    })
}

/// Evenly spaced grid on `[from, to]` with both endpoints.
pub fn grid(from: f64, to: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                to
            } else {
                from + (to - from) * i as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

fn check_range(from: f64, to: f64) -> Result<(), CliError> {
    let ok =
        from.is_finite() && to.is_finite() && FAMILY_MIN <= from && from < to && to <= FAMILY_MAX;
    if ok {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "range [{from}, {to}] must satisfy {FAMILY_MIN} <= from < to <= {FAMILY_MAX}"
        )))
    }
}

/// Rows for every grid point, evaluated in parallel and returned in grid order.
pub fn sweep(
    from: f64,
    to: f64,
    steps: usize,
    lam: &PositiveMapSpec,
    cfg: &CriteriaConfig,
) -> Result<Vec<SweepRow>, CliError> {
    check_range(from, to)?;
    if steps < 2 {
        return Err(CliError::Input(format!(
            "steps must be at least 2, got {steps}"
        )));
    }
    if lam.dim() != 3 {
        return Err(CliError::Input(format!(
            "map {} acts on dimension {}, the family needs 3",
            lam.name(),
            lam.dim()
        )));
    }
    grid(from, to, steps)
        .into_par_iter()
        .map(|a| family_row(a, lam, cfg))
        .collect()
}

pub fn write_csv(rows: &[SweepRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    out.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    pub criterion: Criterion,
    pub map: String,
    pub a_star: f64,
    pub bracket: [f64; 2],
    pub tol: f64,
    pub bisection_steps: usize,
}

fn criterion_margin(
    a: f64,
    c: Criterion,
    lam: &PositiveMapSpec,
    cfg: &CriteriaConfig,
) -> Result<f64, CliError> {
    Ok(family_row(a, lam, cfg)?.margin(c))
}

/// Crossing of the criterion margin on `[2, 5]`: a coarse scan brackets the
/// unique sign change, then bisection shrinks it to width `tol`.
pub fn threshold(
    c: Criterion,
    lam: &PositiveMapSpec,
    tol: f64,
    cfg: &CriteriaConfig,
) -> Result<Threshold, CliError> {
    if !tol.is_finite() || tol < MIN_THRESHOLD_TOL {
        return Err(CliError::Input(format!(
            "tol must be a finite number >= {MIN_THRESHOLD_TOL:e}, got {tol}"
        )));
    }
    if lam.dim() != 3 {
        return Err(CliError::Input(format!(
            "map {} acts on dimension {}, the family needs 3",
            lam.name(),
            lam.dim()
        )));
    }
    let coarse = grid(FAMILY_MIN, FAMILY_MAX, COARSE_POINTS);
    let signs = coarse
        .iter()
        .map(|&a| criterion_margin(a, c, lam, cfg).map(|m| m < 0.0))
        .collect::<Result<Vec<bool>, _>>()?;
    let changes: Vec<usize> = (1..signs.len())
        .filter(|&i| signs[i] != signs[i - 1])
        .collect();
    let [i] = changes[..] else {
        return Err(CliError::Numerical(format!(
            "criterion {c} under {} has {} sign changes on [{FAMILY_MIN}, {FAMILY_MAX}], expected exactly one",
            lam.name(),
            changes.len()
        )));
    };
    let (mut lo, mut hi) = (coarse[i - 1], coarse[i]);
    let lo_sign = signs[i - 1];
    let mut steps = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (criterion_margin(mid, c, lam, cfg)? < 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok(Threshold {
        criterion: c,
        map: lam.name().to_string(),
        a_star: 0.5 * (lo + hi),
        bracket: [lo, hi],
        tol,
        bisection_steps: steps,
    })
}
