//! Λ-moments of a normalized image and the separability criteria built on
//! them.
//!
//! Every criterion consumes a [`MomentVector`] rather than a state, so moments
//! estimated from measurement shots go through exactly the same code path as
//! moments computed from a spectrum.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, HermitianSpectrum, MatrixError, DEFAULT_HERM_TOL};
use crate::maps::{self, MapError, PositiveMapSpec};
use crate::states::DensityMatrix;

pub const DEFAULT_RANK_TOL: f64 = 1e-10;
pub const DEFAULT_PSD_TOL: f64 = 1e-9;
pub const DEFAULT_REPORT_TOL: f64 = 1e-9;
/// Allowed deviation of `Tr Θ` from one.
pub const THETA_TRACE_TOL: f64 = 1e-9;
/// Slack on `q₂ ≤ 1` before `q₂` counts as out of the separable range.
pub const Q2_SLACK: f64 = 1e-12;
/// Added to `1/q₂` before taking the floor so exact integers do not drop by
/// one through round-off.
pub const FLOOR_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentError {
    #[error("Θ is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("Θ has trace {0}, expected 1")]
    BadTrace(f64),

    #[error("order {requested} exceeds the available maximum {max}")]
    OrderTooLarge { requested: usize, max: usize },

    #[error("q2 = {0} is outside (0, 1]")]
    Q2OutOfRange(f64),

    #[error("no eigenvalue profile of dimension {d} has q2 = {q2}")]
    Infeasible { q2: f64, d: usize },

    #[error("spectrum has {found} eigenvalues, moment vector dimension is {expected}")]
    SpectrumMismatch { expected: usize, found: usize },

    #[error(transparent)]
    Map(#[from] MapError),

    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Tolerances shared by the criteria.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriteriaConfig {
    pub rank_tol: f64,
    pub psd_tol: f64,
    pub report_tol: f64,
}

impl Default for CriteriaConfig {
    fn default() -> Self {
        Self {
            rank_tol: DEFAULT_RANK_TOL,
            psd_tol: DEFAULT_PSD_TOL,
            report_tol: DEFAULT_REPORT_TOL,
        }
    }
}

/// `(q₀, q₁, ..., q_K)` for a `d`-dimensional normalized image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentVector {
    pub q: Vec<f64>,
    pub d: usize,
    pub rank_tol: f64,
}

impl MomentVector {
    /// Highest order stored.
    pub fn max_order(&self) -> usize {
        self.q.len() - 1
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.q.get(k).copied()
    }

    /// Number of eigenvalues above the rank tolerance.
    pub fn rank(&self) -> usize {
        self.q[0] as usize
    }

    pub fn q2(&self) -> f64 {
        self.q[2]
    }

    pub fn q3(&self) -> f64 {
        self.q[3]
    }

    /// Moment vector from externally estimated `q₂` and `q₃`. The rank is
    /// unknown and recorded as full; `q₁ = 1` by normalization.
    pub fn from_estimates(d: usize, q2: f64, q3: f64) -> Self {
        Self {
            q: vec![d as f64, 1.0, q2, q3],
            d,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

/// Moments from a precomputed spectrum.
pub fn moments_from_spectrum(eigenvalues: &[f64], rank_tol: f64, max_k: usize) -> MomentVector {
    let scale = eigenvalues.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
    let rank = eigenvalues
        .iter()
        .filter(|l| l.abs() > rank_tol * scale)
        .count();
    let mut q = Vec::with_capacity(max_k + 1);
    q.push(rank as f64);
    for k in 1..=max_k {
        q.push(eigenvalues.iter().map(|l| l.powi(k as i32)).sum());
    }
    MomentVector {
        q,
        d: eigenvalues.len(),
        rank_tol,
    }
}

/// `q_k = Tr[Θ^k] = Σ λ_i^k` for `k = 1..=max_k`; `q₀` counts eigenvalues with
/// `|λ| > rank_tol·max(1, max|λ|)`.
pub fn moments_of(
    theta: &ComplexMatrix,
    rank_tol: f64,
    max_k: usize,
) -> Result<MomentVector, MomentError> {
    let d = theta.ensure_square()?;
    let residual = theta.hermiticity_residual();
    if residual > DEFAULT_HERM_TOL {
        return Err(MomentError::NotHermitian(residual));
    }
    let trace = theta.trace().re;
    if (trace - 1.0).abs() > THETA_TRACE_TOL {
        return Err(MomentError::BadTrace(trace));
    }
    if max_k > d {
        return Err(MomentError::OrderTooLarge {
            requested: max_k,
            max: d,
        });
    }
    let ev = linalg::eigenvalues(theta, DEFAULT_HERM_TOL)?;
    Ok(moments_from_spectrum(&ev, rank_tol, max_k))
}

/// Hankel matrix `[B_l]_{ij} = q_{i+j+1}`, `i, j = 0..=l`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix {
    pub l: usize,
    pub mat: Vec<Vec<f64>>,
}

impl HankelMatrix {
    pub fn max_abs_entry(&self) -> f64 {
        self.mat.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = ComplexMatrix::from_real_rows(&self.mat);
        linalg::min_eigenvalue(&m, 0.0).expect("Hankel matrices are symmetric")
    }
}

/// Largest Hankel order whose entries are all defined: `2l + 1 ≤ min(d, K)`.
pub fn max_hankel_order(q: &MomentVector) -> usize {
    (q.d.min(q.max_order()).saturating_sub(1)) / 2
}

pub fn hankel(q: &MomentVector, l: usize) -> Result<HankelMatrix, MomentError> {
    let max = max_hankel_order(q);
    if l == 0 || l > max {
        return Err(MomentError::OrderTooLarge { requested: l, max });
    }
    let mat = (0..=l)
        .map(|i| (0..=l).map(|j| q.q[i + j + 1]).collect())
        .collect();
    Ok(HankelMatrix { l, mat })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionId {
    Q3Lambda,
    Q3Opt,
    Hankel,
    PtQ3,
    PtQ3Opt,
    PtHankel,
}

impl CriterionId {
    /// The same criterion evaluated on PT-moments.
    pub fn on_partial_transpose(self) -> Self {
        match self {
            Self::Q3Lambda | Self::PtQ3 => Self::PtQ3,
            Self::Q3Opt | Self::PtQ3Opt => Self::PtQ3Opt,
            Self::Hankel | Self::PtHankel => Self::PtHankel,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Q3Lambda => "q3_lambda",
            Self::Q3Opt => "q3_opt",
            Self::Hankel => "hankel",
            Self::PtQ3 => "pt_q3",
            Self::PtQ3Opt => "pt_q3_opt",
            Self::PtHankel => "pt_hankel",
        }
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    SeparabilityConsistent,
    EntanglementDetected,
}

impl Verdict {
    pub fn detected(self) -> bool {
        self == Self::EntanglementDetected
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SeparabilityConsistent => "SeparabilityConsistent",
            Self::EntanglementDetected => "EntanglementDetected",
        })
    }
}

/// Outcome of one criterion: `margin = value − bound`, and entanglement is
/// reported iff `margin < −tol`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub criterion_id: CriterionId,
    pub map: String,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub detail: String,
}

impl CriterionReport {
    pub fn judge(
        criterion_id: CriterionId,
        value: f64,
        bound: f64,
        tol: f64,
        detail: String,
    ) -> Self {
        let margin = value - bound;
        let verdict = if margin < -tol {
            Verdict::EntanglementDetected
        } else {
            Verdict::SeparabilityConsistent
        };
        Self {
            criterion_id,
            map: String::new(),
            value,
            bound,
            margin,
            verdict,
            detail,
        }
    }

    pub fn with_map(mut self, map: impl Into<String>) -> Self {
        self.map = map.into();
        self
    }
}

/// Hankel test: `B_l ⪰ 0` for every defined order `l`.
///
/// The reported value is the smallest eigenvalue over all orders, each scaled
/// by the largest entry of its `B_l`.
pub fn hankel_criterion(q: &MomentVector, psd_tol: f64) -> CriterionReport {
    let max_l = max_hankel_order(q);
    let mut worst = (f64::INFINITY, 0usize);
    let mut first_failure = None;
    for l in 1..=max_l {
        let b = hankel(q, l).expect("order within range");
        let scaled = b.min_eigenvalue() / b.max_abs_entry().max(f64::MIN_POSITIVE);
        if scaled < worst.0 {
            worst = (scaled, l);
        }
        if first_failure.is_none() && scaled < -psd_tol {
            first_failure = Some((l, scaled));
        }
    }
    if max_l == 0 {
        return CriterionReport::judge(
            CriterionId::Hankel,
            0.0,
            0.0,
            psd_tol,
            "no Hankel order available (d < 3)".into(),
        );
    }
    let detail = match first_failure {
        Some((l, ev)) => format!(
            "B_l checked for l=1..{max_l}; smallest failing l={l} with scaled min eigenvalue {ev:.6e}"
        ),
        None => format!(
            "B_l checked for l=1..{max_l}; all PSD, smallest scaled eigenvalue {:.6e} at l={}",
            worst.0, worst.1
        ),
    };
    CriterionReport::judge(CriterionId::Hankel, worst.0, 0.0, psd_tol, detail)
}

/// `q₃ − q₂² ≥ 0` for separable states.
pub fn q3_criterion(q: &MomentVector, tol: f64) -> CriterionReport {
    let (q2, q3) = (q.q2(), q.q3());
    CriterionReport::judge(
        CriterionId::Q3Lambda,
        q3,
        q2 * q2,
        tol,
        format!("q2={q2:.12}, q3={q3:.12}"),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalBoundParams {
    pub alpha: usize,
    pub x: f64,
    pub bound: f64,
}

/// Smallest `q₃` compatible with a nonnegative spectrum of given `q₂`:
/// `αx³ + (1 − αx)³` with `α = ⌊1/q₂⌋` and
/// `x = [α + √(α((α+1)q₂ − 1))] / [α(α+1)]`.
pub fn q3_optimal_bound(q2: f64) -> Result<OptimalBoundParams, MomentError> {
    if q2.is_nan() || q2 <= 0.0 || q2 > 1.0 + Q2_SLACK {
        return Err(MomentError::Q2OutOfRange(q2));
    }
    let q2 = q2.min(1.0);
    let alpha = (1.0 / q2 + FLOOR_GUARD).floor();
    let disc = (alpha * ((alpha + 1.0) * q2 - 1.0)).max(0.0);
    let x = (alpha + disc.sqrt()) / (alpha * (alpha + 1.0));
    let rest = 1.0 - alpha * x;
    Ok(OptimalBoundParams {
        alpha: alpha as usize,
        x,
        bound: alpha * x.powi(3) + rest.powi(3),
    })
}

/// Optimized `q₃` criterion. A `q₂` above one cannot come from a
/// nonnegative unit-trace spectrum and is reported as detection outright.
pub fn q3_optimized_criterion(q: &MomentVector, tol: f64) -> CriterionReport {
    let (q2, q3) = (q.q2(), q.q3());
    if q2 > 1.0 + Q2_SLACK {
        return CriterionReport::judge(
            CriterionId::Q3Opt,
            1.0,
            q2,
            tol,
            format!("q2 exceeds separable range: q2={q2:.12} > 1 (margin reported as 1 - q2)"),
        );
    }
    match q3_optimal_bound(q2) {
        Ok(p) => CriterionReport::judge(
            CriterionId::Q3Opt,
            q3,
            p.bound,
            tol,
            format!("q2={q2:.12}, alpha={}, x={:.12}", p.alpha, p.x),
        ),
        Err(e) => CriterionReport::judge(
            CriterionId::Q3Opt,
            q3,
            f64::NEG_INFINITY,
            tol,
            format!("bound unavailable: {e}"),
        ),
    }
}

/// Random-restart settings for [`oracle_q3_min_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub restarts: usize,
    /// Local moves per restart, multiplied by the dimension.
    pub moves_per_dim: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            restarts: 200,
            moves_per_dim: 12,
            seed: 0x0_5ac1e,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Overall minimum of `Σ λ³`.
    pub min: f64,
    /// Minimizer, sorted descending.
    pub argmin: Vec<f64>,
    /// Best value over the `(x × m, y, 0, ...)` profiles.
    pub profile_min: f64,
    /// Best value found by the random-restart local searches.
    pub search_min: f64,
}

/// Minimum of `Σλᵢ³` subject to `Σλᵢ = 1`, `Σλᵢ² = q₂`, `λᵢ ≥ 0` in
/// dimension `d`, with the default search settings.
pub fn oracle_q3_min(q2: f64, d: usize) -> Result<OracleSolution, MomentError> {
    oracle_q3_min_with(q2, d, &OracleConfig::default())
}

pub fn oracle_q3_min_with(
    q2: f64,
    d: usize,
    cfg: &OracleConfig,
) -> Result<OracleSolution, MomentError> {
    let lo = 1.0 / d as f64;
    if d == 0 || !(q2 >= lo - 1e-12 && q2 <= 1.0 + 1e-12) {
        return Err(MomentError::Infeasible { q2, d });
    }
    let q2 = q2.clamp(lo, 1.0);

    let (profile_min, profile_arg) =
        best_profile(q2, d).ok_or(MomentError::Infeasible { q2, d })?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (q2.to_bits().rotate_left(17)) ^ d as u64);
    let mut search_min = f64::INFINITY;
    let mut search_arg = Vec::new();
    for _ in 0..cfg.restarts {
        let mut lam = feasible_start(q2, d, &mut rng);
        local_search(&mut lam, cfg.moves_per_dim * d, &mut rng);
        let v = cube_sum(&lam);
        if v < search_min {
            search_min = v;
            search_arg = lam;
        }
    }

    let (min, mut argmin) = if search_min < profile_min - 1e-12 {
        (search_min, search_arg)
    } else {
        (profile_min, profile_arg)
    };
    argmin.sort_by(|a, b| b.total_cmp(a));
    Ok(OracleSolution {
        min,
        argmin,
        profile_min,
        search_min,
    })
}

fn cube_sum(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x * x).sum()
}

/// Enumerates vectors `(x, ..., x, y, 0, ..., 0)` with `m` copies of `x`,
/// `x ≥ y ≥ 0`, solving `mx + y = 1`, `mx² + y² = q₂`.
fn best_profile(q2: f64, d: usize) -> Option<(f64, Vec<f64>)> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    let consider = |v: Vec<f64>, best: &mut Option<(f64, Vec<f64>)>| {
        let val = cube_sum(&v);
        if best.as_ref().is_none_or(|(b, _)| val < *b) {
            *best = Some((val, v));
        }
    };
    if d == 1 {
        if (q2 - 1.0).abs() <= 1e-12 {
            consider(vec![1.0], &mut best);
        }
        return best;
    }
    for m in 1..d {
        let mf = m as f64;
        let disc = mf * ((mf + 1.0) * q2 - 1.0);
        if disc < -1e-13 {
            continue;
        }
        let root = disc.max(0.0).sqrt();
        for x in [
            (mf + root) / (mf * (mf + 1.0)),
            (mf - root) / (mf * (mf + 1.0)),
        ] {
            let y = 1.0 - mf * x;
            if x < 0.0 || y < -1e-12 || y > x + 1e-12 {
                continue;
            }
            let mut v = vec![0.0; d];
            v[..m].fill(x);
            v[m] = y.max(0.0);
            consider(v, &mut best);
        }
    }
    best
}

/// Random point with `Σλ = 1`, `Σλ² = q₂`, `λ ≥ 0`: walk from the uniform
/// vector toward a random sparse simplex point far enough away.
fn feasible_start(q2: f64, d: usize, rng: &mut impl Rng) -> Vec<f64> {
    let u = 1.0 / d as f64;
    let r2 = q2 - u;
    if r2 <= 0.0 {
        return vec![u; d];
    }
    let mut target = None;
    for _ in 0..64 {
        let support = rng.random_range(1..=d);
        let mut idx: Vec<usize> = (0..d).collect();
        for i in 0..support {
            let j = rng.random_range(i..d);
            idx.swap(i, j);
        }
        let mut v = vec![0.0; d];
        let mut total = 0.0;
        for &i in &idx[..support] {
            let w: f64 = rng.sample(Exp1);
            v[i] = w;
            total += w;
        }
        v.iter_mut().for_each(|x| *x /= total);
        if v.iter().map(|x| x * x).sum::<f64>() >= q2 {
            target = Some(v);
            break;
        }
    }
    let v = target.unwrap_or_else(|| {
        let mut v = vec![0.0; d];
        v[rng.random_range(0..d)] = 1.0;
        v
    });
    let dist2: f64 = v.iter().map(|x| (x - u) * (x - u)).sum();
    let t = (r2 / dist2).sqrt();
    v.iter().map(|x| (u + t * (x - u)).max(0.0)).collect()
}

/// Coordinate search over random triples. Within a triple, the two equality
/// constraints leave a circle; the cube sum is minimized along its
/// nonnegative arcs.
fn local_search(lam: &mut [f64], moves: usize, rng: &mut impl Rng) {
    let d = lam.len();
    if d < 3 {
        return;
    }
    for _ in 0..moves {
        let i = rng.random_range(0..d);
        let mut j = rng.random_range(0..d - 1);
        if j >= i {
            j += 1;
        }
        let mut k = rng.random_range(0..d - 2);
        for taken in [i.min(j), i.max(j)] {
            if k >= taken {
                k += 1;
            }
        }
        let cur = [lam[i], lam[j], lam[k]];
        if let Some(next) = minimize_on_circle(cur) {
            lam[i] = next[0];
            lam[j] = next[1];
            lam[k] = next[2];
        }
    }
}

fn minimize_on_circle(p: [f64; 3]) -> Option<[f64; 3]> {
    const SQRT2: f64 = std::f64::consts::SQRT_2;
    let s1 = p[0] + p[1] + p[2];
    let c = s1 / 3.0;
    let e1 = [1.0 / SQRT2, -1.0 / SQRT2, 0.0];
    let s6 = 6.0_f64.sqrt();
    let e2 = [1.0 / s6, 1.0 / s6, -2.0 / s6];
    let dev = [p[0] - c, p[1] - c, p[2] - c];
    let a: f64 = (0..3).map(|i| dev[i] * e1[i]).sum();
    let b: f64 = (0..3).map(|i| dev[i] * e2[i]).sum();
    let rho = (a * a + b * b).sqrt();
    if rho < 1e-15 {
        return None;
    }
    let point = |th: f64| -> [f64; 3] {
        let (s, co) = th.sin_cos();
        [
            c + rho * (co * e1[0] + s * e2[0]),
            c + rho * (co * e1[1] + s * e2[1]),
            c + rho * (co * e1[2] + s * e2[2]),
        ]
    };
    let score = |q: &[f64; 3]| -> f64 {
        if q.iter().any(|&x| x < -1e-15) {
            f64::INFINITY
        } else {
            q.iter().map(|x| x * x * x).sum()
        }
    };

    let mut candidates: Vec<[f64; 3]> = Vec::new();
    // Arc endpoints: one coordinate exactly zero.
    for i in 0..3 {
        let (ai, bi) = (rho * e1[i], rho * e2[i]);
        let r = (ai * ai + bi * bi).sqrt();
        let ratio = -c / r;
        if ratio.abs() <= 1.0 {
            let base = bi.atan2(ai);
            let delta = ratio.acos();
            for th in [base + delta, base - delta] {
                let mut q = point(th);
                q[i] = 0.0;
                candidates.push(q);
            }
        }
    }
    // Interior critical points: coarse scan, then golden-section refinement.
    const SAMPLES: usize = 24;
    let step = std::f64::consts::TAU / SAMPLES as f64;
    let vals: Vec<f64> = (0..SAMPLES)
        .map(|s| score(&point(s as f64 * step)))
        .collect();
    for s in 0..SAMPLES {
        let prev = vals[(s + SAMPLES - 1) % SAMPLES];
        let next = vals[(s + 1) % SAMPLES];
        if vals[s].is_finite() && vals[s] <= prev && vals[s] <= next {
            let th = golden_min(
                |t| score(&point(t)),
                (s as f64 - 1.0) * step,
                (s as f64 + 1.0) * step,
            );
            candidates.push(point(th));
        }
    }

    let current = score(&p);
    let best = candidates
        .into_iter()
        .map(|q| (score(&q), q))
        .filter(|(v, _)| v.is_finite())
        .min_by(|x, y| x.0.total_cmp(&y.0))?;
    (best.0 < current).then(|| best.1.map(|x| x.max(0.0)))
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..40 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// `‖B_l − V_l D V_lᵀ‖_max`, with `V_l` the `(l+1)×d` power matrix of the
/// spectrum and `D = diag(λ)`.
pub fn vandermonde_check(
    q: &MomentVector,
    spectrum: &HermitianSpectrum,
    l: usize,
) -> Result<f64, MomentError> {
    if spectrum.dim() != q.d {
        return Err(MomentError::SpectrumMismatch {
            expected: q.d,
            found: spectrum.dim(),
        });
    }
    let b = hankel(q, l)?;
    let lam = &spectrum.eigenvalues;
    let mut worst = 0.0_f64;
    for i in 0..=l {
        for j in 0..=l {
            let vdv: f64 = lam
                .iter()
                .map(|&x| x.powi(i as i32) * x * x.powi(j as i32))
                .sum();
            worst = worst.max((b.mat[i][j] - vdv).abs());
        }
    }
    Ok(worst)
}

/// The three moment criteria under one map.
pub fn criteria_for(q: &MomentVector, cfg: &CriteriaConfig) -> [CriterionReport; 3] {
    [
        q3_criterion(q, cfg.report_tol),
        q3_optimized_criterion(q, cfg.report_tol),
        hankel_criterion(q, cfg.psd_tol),
    ]
}

/// Normalized image and its full moment vector.
pub fn state_moments(
    rho: &DensityMatrix,
    lam: &PositiveMapSpec,
    rank_tol: f64,
) -> Result<MomentVector, MomentError> {
    let theta = maps::normalized_image(lam, rho)?;
    moments_of(&theta, rank_tol, rho.dims().d())
}

/// Criteria under `lam`, followed by the same criteria on PT-moments.
pub fn full_report(
    rho: &DensityMatrix,
    lam: &PositiveMapSpec,
    cfg: &CriteriaConfig,
) -> Result<Vec<CriterionReport>, MomentError> {
    let q = state_moments(rho, lam, cfg.rank_tol)?;
    let transpose = maps::transpose_map(rho.dims().d_b);
    let p = state_moments(rho, &transpose, cfg.rank_tol)?;

    let mut out: Vec<CriterionReport> = criteria_for(&q, cfg)
        .into_iter()
        .map(|r| r.with_map(lam.name()))
        .collect();
    for mut r in criteria_for(&p, cfg) {
        r.criterion_id = r.criterion_id.on_partial_transpose();
        out.push(r.with_map(transpose.name()));
    }
    Ok(out)
}
