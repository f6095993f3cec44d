use num_complex::Complex64;

use super::{ComplexMatrix, MatrixError};

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// `a^{⊗k}`; `k = 0` gives the 1x1 identity.
pub fn kron_power(a: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(1);
    for _ in 0..k {
        acc = kron(&acc, a);
    }
    acc
}

/// Transpose on the second factor of a `dA·dB` square matrix.
///
/// Entry `((i,j),(k,l))` moves to `((i,l),(k,j))`; the values themselves are
/// untouched, so trace and Hermiticity are preserved exactly.
pub fn partial_transpose(
    m: &ComplexMatrix,
    d_a: usize,
    d_b: usize,
) -> Result<ComplexMatrix, MatrixError> {
    let n = m.ensure_square()?;
    if n != d_a * d_b {
        return Err(MatrixError::DimensionMismatch(format!(
            "matrix side {n} != dA*dB = {}",
            d_a * d_b
        )));
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r / d_b, r % d_b);
        let (k, l) = (c / d_b, c % d_b);
        m[(i * d_b + l, k * d_b + j)]
    }))
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for p in (0..dims.len().saturating_sub(1)).rev() {
        s[p] = s[p + 1] * dims[p + 1];
    }
    s
}

/// Reorders tensor factors: factor `p` of the output is factor `perm[p]` of
/// the input. Applied to rows and columns alike.
pub fn permute_factors(
    m: &ComplexMatrix,
    dims: &[usize],
    perm: &[usize],
) -> Result<ComplexMatrix, MatrixError> {
    let n = m.ensure_square()?;
    let total: usize = dims.iter().product();
    if total != n {
        return Err(MatrixError::DimensionMismatch(format!(
            "factor dims {dims:?} do not multiply to {n}"
        )));
    }
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len()
        || !perm
            .iter()
            .all(|&p| p < dims.len() && !std::mem::replace(&mut seen[p], true))
    {
        return Err(MatrixError::DimensionMismatch(format!(
            "{perm:?} is not a permutation of {} factors",
            dims.len()
        )));
    }
    let in_strides = strides(dims);
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let out_strides = strides(&out_dims);
    let target: Vec<usize> = (0..n)
        .map(|idx| {
            perm.iter()
                .enumerate()
                .map(|(p, &src)| ((idx / in_strides[src]) % dims[src]) * out_strides[p])
                .sum()
        })
        .collect();
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(target[r], target[c])] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Applies a linear map to one tensor factor, leaving the others untouched:
/// `(I ⊗ ... ⊗ f ⊗ ... ⊗ I)(m)`.
///
/// `f` receives `dims[slot] x dims[slot]` blocks and must return a block of
/// the same shape.
pub fn apply_on_factor<F>(
    m: &ComplexMatrix,
    dims: &[usize],
    slot: usize,
    mut f: F,
) -> Result<ComplexMatrix, MatrixError>
where
    F: FnMut(&ComplexMatrix) -> Result<ComplexMatrix, MatrixError>,
{
    let n = m.ensure_square()?;
    if slot >= dims.len() || dims.iter().product::<usize>() != n {
        return Err(MatrixError::DimensionMismatch(format!(
            "slot {slot} of factors {dims:?} on a {n}x{n} matrix"
        )));
    }
    let ds = dims[slot];
    let stride = strides(dims)[slot];
    let rests: Vec<usize> = (0..n)
        .filter(|idx| (idx / stride).is_multiple_of(ds))
        .collect();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut block = ComplexMatrix::zeros(ds, ds);
    for &rr in &rests {
        for &cr in &rests {
            for x in 0..ds {
                for y in 0..ds {
                    block[(x, y)] = m[(rr + x * stride, cr + y * stride)];
                }
            }
            let image = f(&block)?;
            if image.rows() != ds || image.cols() != ds {
                return Err(MatrixError::DimensionMismatch(format!(
                    "factor map returned {}x{}, expected {ds}x{ds}",
                    image.rows(),
                    image.cols()
                )));
            }
            for x in 0..ds {
                for y in 0..ds {
                    out[(rr + x * stride, cr + y * stride)] = image[(x, y)];
                }
            }
        }
    }
    Ok(out)
}

fn checked_side(d: usize, k: usize, limit: usize) -> Result<usize, MatrixError> {
    let size =
        u32::try_from(k)
            .ok()
            .and_then(|k| d.checked_pow(k))
            .ok_or(MatrixError::SizeOverflow {
                size: usize::MAX,
                limit,
            })?;
    if size > limit {
        return Err(MatrixError::SizeOverflow { size, limit });
    }
    Ok(size)
}

/// The literal cyclic shift `|l1, l2, ..., lk> -> |lk, l1, ..., l_{k-1}>` on
/// `k` copies of a `d`-dimensional space.
///
/// With factor-major indices this operator satisfies
/// `Tr[shift (X1 ⊗ ... ⊗ Xk)] = Tr[X2 X1 Xk ... X3]`, i.e. the product in
/// reversed cyclic order. See [`cyclic_permutation_operator`].
pub fn cyclic_shift_operator(
    d: usize,
    k: usize,
    limit: usize,
) -> Result<ComplexMatrix, MatrixError> {
    let n = checked_side(d, k, limit)?;
    let mut out = ComplexMatrix::zeros(n, n);
    if k == 0 {
        out[(0, 0)] = Complex64::new(1.0, 0.0);
        return Ok(out);
    }
    // Shifting digits right by one: last digit becomes the leading one.
    let lead = n / d;
    for idx in 0..n {
        let last = idx % d;
        let image = last * lead + idx / d;
        out[(image, idx)] = Complex64::new(1.0, 0.0);
    }
    Ok(out)
}

/// Cyclic permutation operator `Π` oriented so that
/// `Tr[Π (X1 ⊗ X2 ⊗ ... ⊗ Xk)] = Tr[X1 X2 ... Xk]`.
///
/// This is the adjoint of [`cyclic_shift_operator`]. Fails with
/// `SizeOverflow` when `d^k > limit`.
pub fn cyclic_permutation_operator(
    d: usize,
    k: usize,
    limit: usize,
) -> Result<ComplexMatrix, MatrixError> {
    Ok(cyclic_shift_operator(d, k, limit)?.transpose())
}
