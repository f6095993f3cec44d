//! Bipartite density matrices, the state families used throughout the crate,
//! and the JSON state file format.

use std::fmt;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, kron, ComplexMatrix, MatrixError};

/// Max entry residual `|ρ - ρ†|` accepted for a state.
pub const STATE_HERM_TOL: f64 = 1e-12;
/// Max deviation of the trace from one.
pub const STATE_TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted; rank-deficient states come out of the
/// eigensolver with tiny negative values.
pub const STATE_PSD_TOL: f64 = -1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("state violates the {name} invariant (residual {residual:e})")]
    InvariantViolation { name: &'static str, residual: f64 },

    #[error("could not parse state: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Local dimensions of a bipartite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteDims {
    #[serde(rename = "dA")]
    pub d_a: usize,
    #[serde(rename = "dB")]
    pub d_b: usize,
}

impl BipartiteDims {
    pub fn new(d_a: usize, d_b: usize) -> Self {
        assert!(d_a > 0 && d_b > 0, "subsystem dimensions must be positive");
        Self { d_a, d_b }
    }

    /// Total dimension `dA·dB`.
    pub fn d(&self) -> usize {
        self.d_a * self.d_b
    }
}

impl fmt::Display for BipartiteDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.d_a, self.d_b)
    }
}

/// A validated bipartite state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: BipartiteDims,
    mat: ComplexMatrix,
    label: String,
}

impl DensityMatrix {
    /// Validates `mat` against the state invariants.
    ///
    /// Checks run in the order shape, Hermiticity, trace, positivity; the first
    /// failure is reported with its residual.
    pub fn new(
        dims: BipartiteDims,
        mat: ComplexMatrix,
        label: impl Into<String>,
    ) -> Result<Self, StateError> {
        if mat.rows() != dims.d() || mat.cols() != dims.d() {
            return Err(StateError::Parse(format!(
                "matrix is {}x{} but dA*dB = {}",
                mat.rows(),
                mat.cols(),
                dims.d()
            )));
        }
        let herm = mat.hermiticity_residual();
        if herm > STATE_HERM_TOL {
            return Err(StateError::InvariantViolation {
                name: "hermiticity",
                residual: herm,
            });
        }
        let trace = mat.trace();
        let trace_residual = (trace - Complex64::new(1.0, 0.0)).norm();
        if trace_residual > STATE_TRACE_TOL {
            return Err(StateError::InvariantViolation {
                name: "trace",
                residual: trace_residual,
            });
        }
        let min_eig = linalg::min_eigenvalue(&mat, STATE_HERM_TOL)?;
        if min_eig < STATE_PSD_TOL {
            return Err(StateError::InvariantViolation {
                name: "positivity",
                residual: -min_eig,
            });
        }
        Ok(Self {
            dims,
            mat,
            label: label.into(),
        })
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    /// Reduced state on subsystem A.
    pub fn reduced_a(&self) -> ComplexMatrix {
        let (da, db) = (self.dims.d_a, self.dims.d_b);
        ComplexMatrix::from_fn(da, da, |i, k| {
            (0..db).map(|j| self.mat[(i * db + j, k * db + j)]).sum()
        })
    }

    /// Reduced state on subsystem B.
    pub fn reduced_b(&self) -> ComplexMatrix {
        let (da, db) = (self.dims.d_a, self.dims.d_b);
        ComplexMatrix::from_fn(db, db, |j, l| {
            (0..da).map(|i| self.mat[(i * db + j, i * db + l)]).sum()
        })
    }

    pub fn partial_transpose(&self) -> ComplexMatrix {
        linalg::partial_transpose(&self.mat, self.dims.d_a, self.dims.d_b)
            .expect("state dimensions are consistent")
    }

    pub fn from_json_str(text: &str) -> Result<Self, StateError> {
        let file: StateFile =
            serde_json::from_str(text).map_err(|e| StateError::Parse(e.to_string()))?;
        file.into_state()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&StateFile::from_state(self)).expect("state serializes")
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, StateError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| StateError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_file(&self, path: impl AsRef<Path>) -> Result<(), StateError> {
        let path = path.as_ref();
        fs::write(path, self.to_json_string())
            .map_err(|e| StateError::Io(format!("{}: {e}", path.display())))
    }
}

/// On-disk representation of a state.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    #[serde(rename = "dA")]
    d_a: usize,
    #[serde(rename = "dB")]
    d_b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl StateFile {
    fn from_state(rho: &DensityMatrix) -> Self {
        let n = rho.dims.d();
        Self {
            d_a: rho.dims.d_a,
            d_b: rho.dims.d_b,
            label: (!rho.label.is_empty()).then(|| rho.label.clone()),
            matrix: (0..n)
                .map(|i| rho.mat.row(i).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    fn into_state(self) -> Result<DensityMatrix, StateError> {
        if self.d_a == 0 || self.d_b == 0 {
            return Err(StateError::Parse("dA and dB must be positive".into()));
        }
        let dims = BipartiteDims::new(self.d_a, self.d_b);
        let n = dims.d();
        if self.matrix.len() != n {
            return Err(StateError::Parse(format!(
                "matrix has {} rows but dA*dB = {n}",
                self.matrix.len()
            )));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != n {
                return Err(StateError::Parse(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
        }
        let mat = ComplexMatrix::from_row_major(n, n, data)
            .map_err(|e| StateError::Parse(e.to_string()))?;
        DensityMatrix::new(dims, mat, self.label.unwrap_or_default())
    }
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), StateError> {
    if value.is_nan() || value < lo || value > hi {
        return Err(StateError::ParamOutOfRange {
            name,
            value,
            lo,
            hi,
        });
    }
    Ok(())
}

/// Projector onto `(1/√d) Σ_i |ii>`.
pub fn max_entangled_state(d: usize) -> DensityMatrix {
    assert!(d >= 1);
    let amp = Complex64::new(1.0 / d as f64, 0.0);
    let mat = ComplexMatrix::from_fn(d * d, d * d, |r, c| {
        if r % (d + 1) == 0 && c % (d + 1) == 0 {
            amp
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    DensityMatrix {
        dims: BipartiteDims::new(d, d),
        mat,
        label: format!("max_entangled(d={d})"),
    }
}

pub fn maximally_mixed(dims: BipartiteDims) -> DensityMatrix {
    let d = dims.d();
    DensityMatrix {
        dims,
        mat: ComplexMatrix::identity(d).scale(1.0 / d as f64),
        label: format!("maximally_mixed({dims})"),
    }
}

/// The two diagonal components of the Horodecki 3x3 family,
/// `σ+ = (|01><01| + |12><12| + |20><20|)/3` and
/// `σ- = (|10><10| + |21><21| + |02><02|)/3`.
pub fn horodecki_components() -> (ComplexMatrix, ComplexMatrix) {
    let third = 1.0 / 3.0;
    let mut plus = vec![0.0; 9];
    let mut minus = vec![0.0; 9];
    for i in 0..3 {
        plus[3 * i + (i + 1) % 3] = third;
        minus[3 * ((i + 1) % 3) + i] = third;
    }
    (
        ComplexMatrix::from_real_diag(&plus),
        ComplexMatrix::from_real_diag(&minus),
    )
}

/// Horodecki's 3x3 family
/// `σ_a = (2/7)|Ψ+><Ψ+| + (a/7)σ+ + ((5-a)/7)σ-` for `a ∈ [2, 5]`.
///
/// Separable for `a ≤ 3`, PPT entangled for `3 < a ≤ 4`, NPT for `a > 4`.
pub fn horodecki_state(a: f64) -> Result<DensityMatrix, StateError> {
    check_range("a", a, 2.0, 5.0)?;
    let psi = max_entangled_state(3);
    let (plus, minus) = horodecki_components();
    let mat = &(&psi.mat.scale(2.0 / 7.0) + &plus.scale(a / 7.0)) + &minus.scale((5.0 - a) / 7.0);
    DensityMatrix::new(BipartiteDims::new(3, 3), mat, format!("horodecki(a={a})"))
}

/// `|ψ><ψ|` for a normalized copy of `psi`.
pub fn pure_state(dims: BipartiteDims, psi: &[Complex64]) -> Result<DensityMatrix, StateError> {
    if psi.len() != dims.d() {
        return Err(StateError::Parse(format!(
            "vector length {} != dA*dB = {}",
            psi.len(),
            dims.d()
        )));
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm.is_nan() || norm <= 0.0 {
        return Err(StateError::InvariantViolation {
            name: "trace",
            residual: 1.0,
        });
    }
    let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
    DensityMatrix::new(dims, ComplexMatrix::outer(&v, &v), "pure")
}

/// Gaussian-distributed unit vector, i.e. a Haar-random pure state.
pub fn random_unit_vector(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Convex mixture of `terms` random pure product states with random weights.
/// Separable by construction.
pub fn random_separable_state(
    dims: BipartiteDims,
    terms: usize,
    seed: u64,
) -> Result<DensityMatrix, StateError> {
    assert!(terms >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = dims.d();
    let weights: Vec<f64> = (0..terms).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = weights.iter().sum();
    let mut mat = ComplexMatrix::zeros(d, d);
    for w in weights {
        let a = random_unit_vector(dims.d_a, &mut rng);
        let b = random_unit_vector(dims.d_b, &mut rng);
        let proj = kron(&ComplexMatrix::outer(&a, &a), &ComplexMatrix::outer(&b, &b));
        mat = &mat + &proj.scale(w / total);
    }
    // Remove the O(eps) anti-Hermitian part accumulated by the sum.
    let mat = mat.hermitian_part();
    DensityMatrix::new(dims, mat, format!("random_separable(seed={seed})"))
}
