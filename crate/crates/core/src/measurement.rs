//! Multi-copy observables whose expectation on `ρ^{⊗k}` equals the Λ-moment
//! `q_k`, and shot-noise simulation of measuring them.
//!
//! Observables act on `k` copies of `H_A ⊗ H_B` in interleaved order
//! `A₁B₁A₂B₂…`, so the state they are measured against is the plain
//! Kronecker power `ρ^{⊗k}`. They are assembled in `A^{⊗k} ⊗ B^{⊗k}` order
//! and then reordered.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{
    self, apply_on_factor, cyclic_permutation_operator, cyclic_shift_operator, kron, kron_power,
    permute_factors, ComplexMatrix, MatrixError,
};
use crate::maps::{adjoint_map, apply_map, MapError, PositiveMapSpec};
use crate::moments::{criteria_for, CriteriaConfig, CriterionReport, MomentVector};
use crate::states::{BipartiteDims, DensityMatrix};

/// Accepted deviation of the total Born probability from one.
pub const PROBABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasurementError {
    #[error("map {0} has no state-independent trace scale; measure the normalization separately")]
    NoTraceScale(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("shots must be at least 1")]
    InvalidShots,

    #[error("outcome probabilities sum to {total}, expected 1")]
    ProbabilityDefect { total: f64 },

    #[error(transparent)]
    Map(#[from] MapError),

    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Direction of the cyclic permutation used to build `V^{(k)}`.
///
/// Both give the same expectation on `ρ^{⊗k}`; the A and B parts of one
/// observable must use the same orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `Tr[Π (X₁⊗…⊗X_k)] = Tr[X₁⋯X_k]`.
    TraceOrdered,
    /// `Π|l₁…l_k> = |l_k l₁…l_{k−1}>`, the literal basis shift.
    LiteralShift,
}

fn permutation(
    d: usize,
    k: usize,
    orientation: Orientation,
    limit: usize,
) -> Result<ComplexMatrix, MatrixError> {
    match orientation {
        Orientation::TraceOrdered => cyclic_permutation_operator(d, k, limit),
        Orientation::LiteralShift => cyclic_shift_operator(d, k, limit),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOperator {
    pub k: usize,
    pub dims: BipartiteDims,
    /// Hermitian, `d^k × d^k`, interleaved copy order.
    pub op: ComplexMatrix,
    /// The `c₀^k` divisor applied.
    pub norm_const: f64,
}

impl MeasurementOperator {
    /// `Tr[O ρ^{⊗k}]`.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64, MeasurementError> {
        if rho.dims() != self.dims {
            return Err(MeasurementError::DimensionMismatch(format!(
                "observable built for {} but state is {}",
                self.dims,
                rho.dims()
            )));
        }
        Ok(self.op.trace_product(&kron_power(rho.matrix(), self.k)).re)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub shots: usize,
    pub seed: u64,
}

/// `(Λ†)^{⊗k}(Π)` on `k` copies of the map's space, trace-ordered `Π`.
pub fn twisted_permutation(
    lam: &PositiveMapSpec,
    k: usize,
    limit: usize,
) -> Result<ComplexMatrix, MeasurementError> {
    twisted_permutation_with(lam, k, Orientation::TraceOrdered, limit)
}

pub fn twisted_permutation_with(
    lam: &PositiveMapSpec,
    k: usize,
    orientation: Orientation,
    limit: usize,
) -> Result<ComplexMatrix, MeasurementError> {
    let d = lam.dim();
    let adj = adjoint_map(lam);
    let mut v = permutation(d, k, orientation, limit)?;
    let dims = vec![d; k];
    for slot in 0..k {
        v = apply_on_factor(&v, &dims, slot, |blk| {
            apply_map(&adj, blk).map_err(|e| MatrixError::DimensionMismatch(e.to_string()))
        })?;
    }
    Ok(v)
}

fn interleave_order(k: usize) -> Vec<usize> {
    (0..k).flat_map(|i| [i, k + i]).collect()
}

/// Reorders an operator on `A^{⊗k} ⊗ B^{⊗k}` to interleaved `(AB)^{⊗k}`.
pub fn interleave_copies(
    m: &ComplexMatrix,
    dims: BipartiteDims,
    k: usize,
) -> Result<ComplexMatrix, MatrixError> {
    let factor_dims: Vec<usize> = std::iter::repeat_n(dims.d_a, k)
        .chain(std::iter::repeat_n(dims.d_b, k))
        .collect();
    permute_factors(m, &factor_dims, &interleave_order(k))
}

/// The permutation matrix `P` with `interleave_copies(M) = P M P†`.
pub fn interleave_permutation(
    dims: BipartiteDims,
    k: usize,
    limit: usize,
) -> Result<ComplexMatrix, MatrixError> {
    let n = side(dims, k, limit)?;
    let factor_dims: Vec<usize> = std::iter::repeat_n(dims.d_a, k)
        .chain(std::iter::repeat_n(dims.d_b, k))
        .collect();
    let order = interleave_order(k);
    // Column c (grouped basis) maps to the interleaved position of the same
    // digits.
    let mut p = ComplexMatrix::zeros(n, n);
    let mut grouped_strides = vec![1usize; 2 * k];
    for f in (0..2 * k - 1).rev() {
        grouped_strides[f] = grouped_strides[f + 1] * factor_dims[f + 1];
    }
    for c in 0..n {
        let mut r = 0;
        for &src in &order {
            r = r * factor_dims[src] + (c / grouped_strides[src]) % factor_dims[src];
        }
        p[(r, c)] = Complex64::new(1.0, 0.0);
    }
    Ok(p)
}

fn side(dims: BipartiteDims, k: usize, limit: usize) -> Result<usize, MatrixError> {
    let size = u32::try_from(k)
        .ok()
        .and_then(|k| dims.d().checked_pow(k))
        .unwrap_or(usize::MAX);
    if size > limit {
        return Err(MatrixError::SizeOverflow { size, limit });
    }
    Ok(size)
}

/// `O = (V + V†) / (2 c₀^k)` with `V = Π_A ⊗ V_B`, reordered to interleaved
/// copies. `vb` is any `d_B^k × d_B^k` twisted permutation built with the
/// same `orientation` as `Π_A`.
pub fn observable_from_twisted(
    dims: BipartiteDims,
    k: usize,
    vb: &ComplexMatrix,
    trace_scale: f64,
    orientation: Orientation,
    limit: usize,
) -> Result<MeasurementOperator, MeasurementError> {
    side(dims, k, limit)?;
    let pi_a = permutation(dims.d_a, k, orientation, limit)?;
    let expected_b = dims.d_b.pow(k as u32);
    if vb.rows() != expected_b || vb.cols() != expected_b {
        return Err(MeasurementError::DimensionMismatch(format!(
            "V_B is {}x{}, expected side {expected_b}",
            vb.rows(),
            vb.cols()
        )));
    }
    let v = interleave_copies(&kron(&pi_a, vb), dims, k)?;
    let norm_const = trace_scale.powi(k as i32);
    let op = (&v + &v.dagger()).scale(1.0 / (2.0 * norm_const));
    Ok(MeasurementOperator {
        k,
        dims,
        op,
        norm_const,
    })
}

/// Observable measuring `q_k` for a map with a trace-scale constant.
pub fn build_observable(
    lam: &PositiveMapSpec,
    dims: BipartiteDims,
    k: usize,
    limit: usize,
) -> Result<MeasurementOperator, MeasurementError> {
    let c0 = lam
        .trace_scale()
        .ok_or_else(|| MeasurementError::NoTraceScale(lam.name().to_string()))?;
    if lam.dim() != dims.d_b {
        return Err(MeasurementError::DimensionMismatch(format!(
            "map {} has dim {} but subsystem B has dim {}",
            lam.name(),
            lam.dim(),
            dims.d_b
        )));
    }
    side(dims, k, limit)?;
    let vb = twisted_permutation(lam, k, limit)?;
    observable_from_twisted(dims, k, &vb, c0, Orientation::TraceOrdered, limit)
}

/// Single-copy `W = I_A ⊗ Λ†(I_B)` with `Tr[Wρ] = Tr[(I⊗Λ)(ρ)]`.
pub fn normalization_observable(
    lam: &PositiveMapSpec,
    dims: BipartiteDims,
) -> Result<ComplexMatrix, MeasurementError> {
    if lam.dim() != dims.d_b {
        return Err(MeasurementError::DimensionMismatch(format!(
            "map {} has dim {} but subsystem B has dim {}",
            lam.name(),
            lam.dim(),
            dims.d_b
        )));
    }
    let adj_identity = apply_map(&adjoint_map(lam), &ComplexMatrix::identity(dims.d_b))?;
    Ok(kron(&ComplexMatrix::identity(dims.d_a), &adj_identity))
}

fn ket3(a: usize, b: usize, c: usize) -> usize {
    9 * a + 3 * b + c
}

/// Three-copy twisted permutation for `Λ₁` written out term by term:
/// `V_B^{(3)} = O₁ + O₂ + O₃` with `j' = j + 2 mod 3`, `l' = l + 2 mod 3`.
pub fn explicit_vb3() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(27, 27);
    let one = Complex64::new(1.0, 0.0);
    // O₁: diagonal terms over j.
    for j in 0..3 {
        let jp = (j + 2) % 3;
        for (a, b, c) in [
            (j, j, j),
            (j, j, jp),
            (j, jp, j),
            (j, jp, jp),
            (jp, j, j),
            (jp, j, jp),
            (jp, jp, j),
            (jp, jp, jp),
        ] {
            let i = ket3(a, b, c);
            m[(i, i)] += one;
        }
    }
    // O₂: |ket><bra| pairs over j ≠ l.
    for j in 0..3 {
        for l in 0..3 {
            if j == l {
                continue;
            }
            let (jp, lp) = ((j + 2) % 3, (l + 2) % 3);
            for (ket, bra) in [
                ((j, j, l), (j, l, j)),
                ((jp, j, l), (jp, l, j)),
                ((j, l, l), (l, l, j)),
                ((j, lp, l), (l, lp, j)),
                ((j, l, j), (l, j, j)),
                ((j, l, jp), (l, j, jp)),
            ] {
                m[(ket3(ket.0, ket.1, ket.2), ket3(bra.0, bra.1, bra.2))] += one;
            }
        }
    }
    // O₃: −|jlv><lvj| over pairwise distinct j, l, v.
    for j in 0..3 {
        for l in 0..3 {
            for v in 0..3 {
                if j != l && l != v && j != v {
                    m[(ket3(j, l, v), ket3(l, v, j))] -= one;
                }
            }
        }
    }
    m
}

/// Eigenbasis of an observable with the Born probabilities of a fixed state,
/// ready for repeated sampling.
#[derive(Debug, Clone)]
pub struct BornSampler {
    outcomes: Vec<f64>,
    weights: WeightedIndex<f64>,
}

impl BornSampler {
    pub fn new(obs: &MeasurementOperator, rho: &DensityMatrix) -> Result<Self, MeasurementError> {
        if rho.dims() != obs.dims {
            return Err(MeasurementError::DimensionMismatch(format!(
                "observable built for {} but state is {}",
                obs.dims,
                rho.dims()
            )));
        }
        let spec = linalg::hermitian_eigen(&obs.op, 1e-10, true)?;
        let vecs = spec.eigenvectors.as_ref().expect("requested eigenvectors");
        let rho_k = kron_power(rho.matrix(), obs.k);
        let rv = &rho_k * vecs;
        let n = vecs.rows();
        let mut probs: Vec<f64> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| vecs[(i, j)].conj() * rv[(i, j)])
                    .sum::<Complex64>()
                    .re
            })
            .collect();
        probs.iter_mut().for_each(|p| *p = p.max(0.0));
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(MeasurementError::ProbabilityDefect { total });
        }
        probs.iter_mut().for_each(|p| *p /= total);
        let weights = WeightedIndex::new(&probs)
            .map_err(|_| MeasurementError::ProbabilityDefect { total })?;
        Ok(Self {
            outcomes: spec.eigenvalues,
            weights,
        })
    }

    /// Eigenvalues of the observable, in sampling-index order.
    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn sample(&self, shots: usize, seed: u64) -> Result<ShotEstimate, MeasurementError> {
        if shots == 0 {
            return Err(MeasurementError::InvalidShots);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws: Vec<f64> = (0..shots)
            .map(|_| self.outcomes[self.weights.sample(&mut rng)])
            .collect();
        let n = shots as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let stderr = if shots > 1 {
            let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Ok(ShotEstimate {
            mean,
            stderr,
            shots,
            seed,
        })
    }
}

/// Simulates `shots` projective measurements of `obs` on `ρ^{⊗k}`.
pub fn born_sample(
    obs: &MeasurementOperator,
    rho: &DensityMatrix,
    shots: usize,
    seed: u64,
) -> Result<ShotEstimate, MeasurementError> {
    if shots == 0 {
        return Err(MeasurementError::InvalidShots);
    }
    BornSampler::new(obs, rho)?.sample(shots, seed)
}

/// Moment criteria fed with shot estimates of `q₂` and `q₃`. Verdicts use
/// the point estimates; the standard errors are appended to each detail.
pub fn criteria_from_shots(
    q2: &ShotEstimate,
    q3: &ShotEstimate,
    d: usize,
    cfg: &CriteriaConfig,
) -> Vec<CriterionReport> {
    let q = MomentVector::from_estimates(d, q2.mean, q3.mean);
    criteria_for(&q, cfg)
        .into_iter()
        .map(|mut r| {
            r.detail.push_str(&format!(
                "; shot estimates: q2 stderr={:.3e} ({} shots), q3 stderr={:.3e} ({} shots)",
                q2.stderr, q2.shots, q3.stderr, q3.shots
            ));
            r
        })
        .collect()
}
