//! `analyze`, `verify-operators` and `simulate`.

use std::fmt::Write as _;
use std::path::Path;

use lamom::maps::{resolve_map, transpose_map, PositiveMapSpec};
use lamom::measurement::{
    born_sample, build_observable, explicit_vb3, observable_from_twisted, twisted_permutation,
    twisted_permutation_with, Orientation,
};
use lamom::moments::{full_report, state_moments, CriteriaConfig, CriterionReport};
use lamom::states::{horodecki_state, BipartiteDims, DensityMatrix};
use serde::Serialize;

use crate::family::{FAMILY_MAX, FAMILY_MIN};
use crate::CliError;

/// Largest accepted `|⟨O⟩ − q_k|` in `verify-operators`.
pub const VERIFY_TOL: f64 = 1e-9;

const QUTRITS: BipartiteDims = BipartiteDims { d_a: 3, d_b: 3 };

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub state: String,
    pub dims: BipartiteDims,
    pub map: String,
    /// `q₀ … q_d` under the map.
    pub q: Vec<f64>,
    /// PT-moments `p₀ … p_d`.
    pub p: Vec<f64>,
    pub reports: Vec<CriterionReport>,
    pub notes: Vec<String>,
}

impl AnalyzeReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("state {} ({}) under {}\n", self.state, self.dims, self.map);
        let _ = writeln!(
            s,
            "q2={:.12} q3={:.12} p2={:.12} p3={:.12}",
            self.q[2], self.q[3], self.p[2], self.p[3]
        );
        let _ = writeln!(
            s,
            "{:<10} {:<10} {:>16} {:>16} {:>16}  verdict",
            "criterion", "map", "value", "bound", "margin"
        );
        for r in &self.reports {
            let _ = writeln!(
                s,
                "{:<10} {:<10} {:>16.9e} {:>16.9e} {:>16.9e}  {}",
                r.criterion_id.as_str(),
                r.map,
                r.value,
                r.bound,
                r.margin,
                r.verdict
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

pub fn analyze(
    state_path: &Path,
    map: &str,
    cfg: &CriteriaConfig,
) -> Result<AnalyzeReport, CliError> {
    let rho = DensityMatrix::from_file(state_path)?;
    let lam = resolve_map(map, rho.dims().d_b)?;
    analyze_state(&rho, &lam, cfg)
}

pub fn analyze_state(
    rho: &DensityMatrix,
    lam: &PositiveMapSpec,
    cfg: &CriteriaConfig,
) -> Result<AnalyzeReport, CliError> {
    let q = state_moments(rho, lam, cfg.rank_tol)?;
    let p = state_moments(rho, &transpose_map(rho.dims().d_b), cfg.rank_tol)?;
    let reports = full_report(rho, lam, cfg)?;
    let mut notes = Vec::new();
    if q.q2() > 1.0 + lamom::moments::Q2_SLACK {
        notes.push(format!(
            "q2 = {:.12} exceeds 1 under {}; no nonnegative unit-trace spectrum has this purity",
            q.q2(),
            lam.name()
        ));
    }
    Ok(AnalyzeReport {
        state: rho.label().to_string(),
        dims: rho.dims(),
        map: lam.name().to_string(),
        q: q.q,
        p: p.q,
        reports,
        notes,
    })
}

fn check_copies(k: usize) -> Result<(), CliError> {
    if k == 2 || k == 3 {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "k = {k} is unsupported; choose 2 or 3"
        )))
    }
}

fn check_parameter(a: f64) -> Result<(), CliError> {
    if (FAMILY_MIN..=FAMILY_MAX).contains(&a) {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "a = {a} outside [{FAMILY_MIN}, {FAMILY_MAX}]"
        )))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExplicitOperatorCheck {
    /// `Tr[O σ_a^{⊗3}]` with the term-by-term three-copy operator.
    pub expectation: f64,
    pub difference: f64,
    /// Entrywise distance to the generic construction, trace-ordered cycle.
    pub entrywise_residual_trace_ordered: f64,
    /// Entrywise distance to the generic construction, literal basis shift.
    pub entrywise_residual_literal_shift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub k: usize,
    pub a: f64,
    pub map: String,
    pub operator_dim: usize,
    pub norm_const: f64,
    /// `q_k` from the spectrum of the normalized image.
    pub exact: f64,
    pub expectation: f64,
    pub difference: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explicit_vb3: Option<ExplicitOperatorCheck>,
    pub passed: bool,
}

pub fn verify_operators(
    k: usize,
    a: f64,
    map: &str,
    limit: usize,
) -> Result<VerifyReport, CliError> {
    check_copies(k)?;
    check_parameter(a)?;
    let lam = resolve_map(map, 3)?;
    let rho = horodecki_state(a)?;
    let exact = state_moments(&rho, &lam, lamom::moments::DEFAULT_RANK_TOL)?.q[k];
    let obs = build_observable(&lam, QUTRITS, k, limit)?;
    let expectation = obs.expectation(&rho)?;
    let difference = (expectation - exact).abs();

    let explicit_vb3 = if k == 3 && lam.name() == "lambda1" {
        let vb = explicit_vb3();
        let explicit =
            observable_from_twisted(QUTRITS, 3, &vb, 2.0, Orientation::LiteralShift, limit)?;
        let e = explicit.expectation(&rho)?;
        let ordered = twisted_permutation(&lam, 3, limit)?;
        let literal = twisted_permutation_with(&lam, 3, Orientation::LiteralShift, limit)?;
        Some(ExplicitOperatorCheck {
            expectation: e,
            difference: (e - exact).abs(),
            entrywise_residual_trace_ordered: vb.max_abs_diff(&ordered),
            entrywise_residual_literal_shift: vb.max_abs_diff(&literal),
        })
    } else {
        None
    };
    let passed = difference <= VERIFY_TOL
        && explicit_vb3
            .as_ref()
            .is_none_or(|c| c.difference <= VERIFY_TOL);
    Ok(VerifyReport {
        k,
        a,
        map: lam.name().to_string(),
        operator_dim: obs.op.rows(),
        norm_const: obs.norm_const,
        exact,
        expectation,
        difference,
        tolerance: VERIFY_TOL,
        explicit_vb3,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub mean: f64,
    pub stderr: f64,
    pub shots: usize,
    pub seed: u64,
    pub exact: f64,
    /// `(mean − exact) / stderr`; zero when both numerator and stderr vanish.
    pub z_score: f64,
    pub k: usize,
    pub a: f64,
    pub map: String,
}

pub fn simulate(
    k: usize,
    a: f64,
    shots: usize,
    seed: u64,
    map: &str,
    limit: usize,
) -> Result<SimulateReport, CliError> {
    check_copies(k)?;
    check_parameter(a)?;
    if shots == 0 {
        return Err(CliError::Input("shots must be at least 1".into()));
    }
    let lam = resolve_map(map, 3)?;
    let rho = horodecki_state(a)?;
    let exact = state_moments(&rho, &lam, lamom::moments::DEFAULT_RANK_TOL)?.q[k];
    let obs = build_observable(&lam, QUTRITS, k, limit)?;
    let est = born_sample(&obs, &rho, shots, seed)?;
    let dev = est.mean - exact;
    let z_score = if est.stderr > 0.0 {
        dev / est.stderr
    } else if dev.abs() <= VERIFY_TOL {
        0.0
    } else {
        f64::INFINITY.copysign(dev)
    };
    Ok(SimulateReport {
        mean: est.mean,
        stderr: est.stderr,
        shots: est.shots,
        seed: est.seed,
        exact,
        z_score,
        k,
        a,
        map: lam.name().to_string(),
    })
}
