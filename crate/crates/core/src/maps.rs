//! Hermiticity-preserving linear maps on the B subsystem.
//!
//! Every map is stored as a dense superoperator acting on column-stacked
//! operators: `vec(X)[i + j*d] = X[i, j]`. In this convention the
//! Hilbert–Schmidt adjoint is the conjugate transpose of the superoperator,
//! and `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, apply_on_factor, kron, ComplexMatrix, MatrixError};
use crate::states::{random_unit_vector, BipartiteDims, DensityMatrix};

/// Seed for the random operators used to verify map invariants at
/// construction time.
const VERIFY_SEED: u64 = 0x005e_ed0f_3a95;
const VERIFY_SAMPLES: usize = 100;
/// Tolerance for `Λ(X†) = Λ(X)†` and for trace-scale detection.
pub const MAP_TOL: f64 = 1e-11;
/// `|Tr[(I⊗Λ)(ρ)]|` at or below this is a degenerate normalization.
pub const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("normalization trace {trace:e} is too close to zero")]
    DegenerateNormalization { trace: f64 },

    #[error("normalization trace {trace:e} is negative; the map is not positive on this input")]
    NegativeNormalization { trace: f64 },

    #[error("map does not preserve hermiticity (residual {residual:e})")]
    NotHermiticityPreserving { residual: f64 },

    #[error("declared trace scale {declared} disagrees with the superoperator ({measured:?})")]
    TraceScaleMismatch {
        declared: f64,
        measured: Option<f64>,
    },

    #[error("unknown map {0:?} (built-ins: transpose, lambda1, identity)")]
    UnknownMap(String),

    #[error("could not parse map: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Where a map came from. Built-in maps are known to be positive; anything
/// else only carries sampled evidence (see [`positivity_probe`]).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapProvenance {
    BuiltIn,
    Random { seed: u64, n_kraus: usize },
    Derived,
    UserSupplied,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositiveMapSpec {
    name: String,
    dim: usize,
    superop: ComplexMatrix,
    trace_scale: Option<f64>,
    hermiticity_preserving: bool,
    provenance: MapProvenance,
}

fn vec_index(d: usize, i: usize, j: usize) -> usize {
    i + j * d
}

fn unit(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut e = ComplexMatrix::zeros(d, d);
    e[(i, j)] = Complex64::new(1.0, 0.0);
    e
}

/// Superoperator of an arbitrary linear action, built column by column from
/// the images of the matrix units.
pub fn superop_from_fn(d: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
    let n = d * d;
    let mut s = ComplexMatrix::zeros(n, n);
    for j in 0..d {
        for i in 0..d {
            let col = vec_index(d, i, j);
            let image = f(&unit(d, i, j));
            for q in 0..d {
                for p in 0..d {
                    s[(vec_index(d, p, q), col)] = image[(p, q)];
                }
            }
        }
    }
    s
}

fn random_matrix(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

impl PositiveMapSpec {
    /// Wraps a `dim²×dim²` superoperator.
    ///
    /// Hermiticity preservation is measured on seeded random inputs and
    /// stored; a trace-scale constant is detected from the matrix units.
    pub fn from_superop(
        name: impl Into<String>,
        dim: usize,
        superop: ComplexMatrix,
        provenance: MapProvenance,
    ) -> Result<Self, MapError> {
        let n = dim * dim;
        if dim == 0 || superop.rows() != n || superop.cols() != n {
            return Err(MapError::DimensionMismatch(format!(
                "superoperator is {}x{}, expected {n}x{n}",
                superop.rows(),
                superop.cols()
            )));
        }
        let mut map = Self {
            name: name.into(),
            dim,
            superop,
            trace_scale: None,
            hermiticity_preserving: false,
            provenance,
        };
        map.hermiticity_preserving = map.hermiticity_residual() <= MAP_TOL;
        map.trace_scale = map.detect_trace_scale();
        Ok(map)
    }

    fn from_action(
        name: &str,
        dim: usize,
        provenance: MapProvenance,
        f: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    ) -> Self {
        Self::from_superop(name, dim, superop_from_fn(dim, f), provenance)
            .expect("superoperator built with matching dimensions")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn superop(&self) -> &ComplexMatrix {
        &self.superop
    }

    /// `c₀` with `Tr[Λ(X)] = c₀ Tr[X]` for all `X`, when one exists.
    pub fn trace_scale(&self) -> Option<f64> {
        self.trace_scale
    }

    pub fn is_hermiticity_preserving(&self) -> bool {
        self.hermiticity_preserving
    }

    pub fn provenance(&self) -> &MapProvenance {
        &self.provenance
    }

    /// Largest `‖Λ(X†) − Λ(X)†‖_max` over the seeded verification inputs.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED);
        (0..VERIFY_SAMPLES)
            .map(|_| {
                let x = random_matrix(self.dim, &mut rng);
                let lhs = self.apply_unchecked(&x.dagger());
                let rhs = self.apply_unchecked(&x).dagger();
                lhs.max_abs_diff(&rhs) / x.max_abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }

    fn detect_trace_scale(&self) -> Option<f64> {
        // Tr[Λ(E_ij)] must vanish off the diagonal and be constant on it.
        let d = self.dim;
        let image_trace = |col: usize| -> Complex64 {
            (0..d)
                .map(|p| self.superop[(vec_index(d, p, p), col)])
                .sum()
        };
        let c = image_trace(vec_index(d, 0, 0));
        if c.im.abs() > MAP_TOL {
            return None;
        }
        for j in 0..d {
            for i in 0..d {
                let t = image_trace(vec_index(d, i, j));
                let expect = if i == j { c } else { Complex64::new(0.0, 0.0) };
                if (t - expect).norm() > MAP_TOL {
                    return None;
                }
            }
        }
        Some(c.re)
    }

    fn apply_unchecked(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim;
        let mut v = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                v[vec_index(d, i, j)] = x[(i, j)];
            }
        }
        let y = self.superop.apply(&v);
        ComplexMatrix::from_fn(d, d, |i, j| y[vec_index(d, i, j)])
    }

    pub fn from_json_str(text: &str) -> Result<Self, MapError> {
        let file: MapFile =
            serde_json::from_str(text).map_err(|e| MapError::Parse(e.to_string()))?;
        file.into_map()
    }

    pub fn to_json_string(&self) -> String {
        let n = self.dim * self.dim;
        let file = MapFile {
            name: self.name.clone(),
            dim: self.dim,
            superop: (0..n)
                .map(|i| self.superop.row(i).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            trace_scale: self.trace_scale,
        };
        serde_json::to_string(&file).expect("map serializes")
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, MapError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| MapError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    name: String,
    dim: usize,
    superop: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trace_scale: Option<f64>,
}

impl MapFile {
    fn into_map(self) -> Result<PositiveMapSpec, MapError> {
        let n = self.dim * self.dim;
        if self.dim == 0 || self.superop.len() != n || self.superop.iter().any(|r| r.len() != n) {
            return Err(MapError::Parse(format!(
                "superop must be a {n}x{n} array for dim {}",
                self.dim
            )));
        }
        let data = self
            .superop
            .iter()
            .flatten()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let superop = ComplexMatrix::from_row_major(n, n, data)
            .map_err(|e| MapError::Parse(e.to_string()))?;
        let map = PositiveMapSpec::from_superop(
            self.name,
            self.dim,
            superop,
            MapProvenance::UserSupplied,
        )?;
        if let Some(declared) = self.trace_scale {
            match map.trace_scale {
                Some(c) if (c - declared).abs() <= MAP_TOL * declared.abs().max(1.0) => {}
                measured => return Err(MapError::TraceScaleMismatch { declared, measured }),
            }
        }
        Ok(map)
    }
}

pub fn identity_map(d: usize) -> PositiveMapSpec {
    PositiveMapSpec::from_action("identity", d, MapProvenance::BuiltIn, |x| x.clone())
}

/// `X ↦ Xᵀ`; positive, not completely positive for `d ≥ 2`.
pub fn transpose_map(d: usize) -> PositiveMapSpec {
    PositiveMapSpec::from_action("transpose", d, MapProvenance::BuiltIn, |x| x.transpose())
}

/// The qutrit map with `[Λ₁(A)]_ij = −a_ij` for `i ≠ j` and
/// `[Λ₁(A)]_ii = a_ii + a_{i'i'}`, `i' = i + 2 mod 3`. Trace scale 2.
pub fn lambda1_map() -> PositiveMapSpec {
    PositiveMapSpec::from_action("lambda1", 3, MapProvenance::BuiltIn, |a| {
        ComplexMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                let ip = (i + 2) % 3;
                a[(i, i)] + a[(ip, ip)]
            } else {
                -a[(i, j)]
            }
        })
    })
}

/// Looks up a built-in map. `dim` is ignored for `lambda1`, which only
/// exists on qutrits.
pub fn builtin_map(name: &str, dim: usize) -> Result<PositiveMapSpec, MapError> {
    match name {
        "transpose" => Ok(transpose_map(dim)),
        "identity" => Ok(identity_map(dim)),
        "lambda1" => Ok(lambda1_map()),
        other => Err(MapError::UnknownMap(other.to_string())),
    }
}

/// Resolves a built-in name or a path to a map JSON file.
pub fn resolve_map(name_or_path: &str, dim: usize) -> Result<PositiveMapSpec, MapError> {
    match builtin_map(name_or_path, dim) {
        Err(MapError::UnknownMap(_)) if Path::new(name_or_path).is_file() => {
            PositiveMapSpec::from_file(name_or_path)
        }
        other => other,
    }
}

pub fn apply_map(lam: &PositiveMapSpec, x: &ComplexMatrix) -> Result<ComplexMatrix, MapError> {
    if x.rows() != lam.dim || x.cols() != lam.dim {
        return Err(MapError::DimensionMismatch(format!(
            "map {} acts on {}x{} operators, got {}x{}",
            lam.name,
            lam.dim,
            lam.dim,
            x.rows(),
            x.cols()
        )));
    }
    Ok(lam.apply_unchecked(x))
}

/// Hilbert–Schmidt adjoint: `Tr[Λ(A)† B] = Tr[A† Λ†(B)]`.
pub fn adjoint_map(lam: &PositiveMapSpec) -> PositiveMapSpec {
    let name = match lam.name.strip_suffix("^dagger") {
        Some(base) => base.to_string(),
        None => format!("{}^dagger", lam.name),
    };
    let provenance = match lam.provenance {
        MapProvenance::BuiltIn => MapProvenance::BuiltIn,
        _ => MapProvenance::Derived,
    };
    PositiveMapSpec::from_superop(name, lam.dim, lam.superop.dagger(), provenance)
        .expect("adjoint keeps the shape")
}

/// `T ∘ Φ` with `Φ` a random trace-preserving channel of `n_kraus` Gaussian
/// Kraus operators. Positive as a composition of positive maps and generically
/// not completely positive.
pub fn random_positive_map(d: usize, n_kraus: usize, seed: u64) -> PositiveMapSpec {
    assert!(d >= 1 && n_kraus >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kraus: Vec<ComplexMatrix> = (0..n_kraus).map(|_| random_matrix(d, &mut rng)).collect();

    let gram = kraus
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, k| {
            &acc + &(&k.dagger() * k)
        })
        .hermitian_part();
    let spec = linalg::hermitian_eigen(&gram, 1e-8, true).expect("Gram matrix is Hermitian");
    let vecs = spec.eigenvectors.as_ref().expect("requested eigenvectors");
    let inv_sqrt = ComplexMatrix::from_fn(d, d, |i, j| {
        spec.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &l)| vecs[(i, k)] * vecs[(j, k)].conj() / l.sqrt())
            .sum()
    });

    let mut channel = ComplexMatrix::zeros(d * d, d * d);
    for k in &kraus {
        let k = k * &inv_sqrt;
        channel = &channel + &kron(&k.conj(), &k);
    }
    let transpose = superop_from_fn(d, |x| x.transpose());
    PositiveMapSpec::from_superop(
        format!("random_t_phi(d={d},kraus={n_kraus},seed={seed})"),
        d,
        &transpose * &channel,
        MapProvenance::Random { seed, n_kraus },
    )
    .expect("composed superoperator has the right shape")
}

/// `(I_A ⊗ Λ)` applied to a raw `dA·dB` matrix.
pub fn extend_and_apply_matrix(
    lam: &PositiveMapSpec,
    dims: BipartiteDims,
    m: &ComplexMatrix,
) -> Result<ComplexMatrix, MapError> {
    if lam.dim != dims.d_b {
        return Err(MapError::DimensionMismatch(format!(
            "map {} has dim {} but subsystem B has dim {}",
            lam.name, lam.dim, dims.d_b
        )));
    }
    if m.rows() != dims.d() || m.cols() != dims.d() {
        return Err(MapError::DimensionMismatch(format!(
            "matrix is {}x{}, expected side {}",
            m.rows(),
            m.cols(),
            dims.d()
        )));
    }
    Ok(apply_on_factor(m, &[dims.d_a, dims.d_b], 1, |blk| {
        Ok(lam.apply_unchecked(blk))
    })?)
}

pub fn extend_and_apply(
    lam: &PositiveMapSpec,
    rho: &DensityMatrix,
) -> Result<ComplexMatrix, MapError> {
    extend_and_apply_matrix(lam, rho.dims(), rho.matrix())
}

/// `Θ = (I⊗Λ)(m) / Tr[(I⊗Λ)(m)]` for a raw, not necessarily normalized,
/// matrix `m`.
pub fn normalized_image_matrix(
    lam: &PositiveMapSpec,
    dims: BipartiteDims,
    m: &ComplexMatrix,
) -> Result<ComplexMatrix, MapError> {
    if !lam.hermiticity_preserving {
        return Err(MapError::NotHermiticityPreserving {
            residual: lam.hermiticity_residual(),
        });
    }
    let image = extend_and_apply_matrix(lam, dims, m)?;
    let trace = image.trace().re;
    if trace.abs() <= NORMALIZATION_TOL {
        return Err(MapError::DegenerateNormalization { trace });
    }
    if trace < 0.0 {
        return Err(MapError::NegativeNormalization { trace });
    }
    Ok(image.scale(1.0 / trace))
}

/// Normalized image `Θ(ρ)` of a state.
pub fn normalized_image(
    lam: &PositiveMapSpec,
    rho: &DensityMatrix,
) -> Result<ComplexMatrix, MapError> {
    normalized_image_matrix(lam, rho.dims(), rho.matrix())
}

/// `(I⊗Λ)(|Ω><Ω|)` with the unnormalized `|Ω> = Σ_i |ii>`. PSD iff `Λ` is
/// completely positive.
pub fn choi_matrix(lam: &PositiveMapSpec) -> ComplexMatrix {
    let d = lam.dim;
    let mut choi = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let image = lam.apply_unchecked(&unit(d, i, j));
            for k in 0..d {
                for l in 0..d {
                    choi[(i * d + k, j * d + l)] = image[(k, l)];
                }
            }
        }
    }
    choi
}

/// Smallest eigenvalue of `Λ(|ψ><ψ|)` over `trials` seeded random pure
/// states. A negative value certifies that `Λ` is not positive; a
/// nonnegative one is only evidence.
pub fn positivity_probe(lam: &PositiveMapSpec, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials.max(1))
        .map(|_| {
            let psi = random_unit_vector(lam.dim, &mut rng);
            let image = lam
                .apply_unchecked(&ComplexMatrix::outer(&psi, &psi))
                .hermitian_part();
            linalg::min_eigenvalue(&image, f64::INFINITY).expect("square input")
        })
        .fold(f64::INFINITY, f64::min)
}
