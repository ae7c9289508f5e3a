//! Dense linear-algebra helpers shared by the solver and verification modules.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};

/// Largest absolute entry, 0 for empty matrices.
pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

/// Largest absolute elementwise difference; matrices must have equal shape.
pub(crate) fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (&x, &y)| acc.max((x - y).abs()))
}

/// Replace `m` with (M + Mᵀ)/2.
pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Moore–Penrose pseudo-inverse; singular values below `rel_cutoff`·σ_max are
/// treated as zero.
pub(crate) fn pseudo_inverse(m: &DMatrix<f64>, rel_cutoff: f64) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    svd.pseudo_inverse(rel_cutoff * smax)
        .expect("cutoff is nonnegative")
}

/// Numerical rank with a cutoff relative to the largest singular value.
pub(crate) fn numerical_rank<T>(m: &DMatrix<T>, rel_cutoff: f64) -> usize
where
    T: ComplexField<RealField = f64>,
{
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_cutoff * smax).count()
}

/// Singular values in descending order.
pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Symmetric PSD square root via the spectral decomposition; eigenvalues are
/// clamped at zero to absorb roundoff.
pub(crate) fn sym_psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let sqrt_vals = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose()
}

/// Eigenvalues of the diagonalizable-or-not real matrix `m` as complex numbers.
pub(crate) fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    m.clone().complex_eigenvalues().iter().copied().collect()
}

/// Rank of the complex PBH block [A − λI; C] (rows stacked below).
pub(crate) fn pbh_stack_rank(
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    lambda: Complex<f64>,
    rel_cutoff: f64,
) -> usize {
    let n = a.nrows();
    let s = c.nrows();
    let stacked = DMatrix::<Complex<f64>>::from_fn(n + s, n, |i, j| {
        if i < n {
            let shift = if i == j { lambda } else { Complex::new(0.0, 0.0) };
            Complex::new(a[(i, j)], 0.0) - shift
        } else {
            Complex::new(c[(i - n, j)], 0.0)
        }
    });
    numerical_rank(&stacked, rel_cutoff)
}

/// Rank of the horizontal PBH block [A − λI, B] (stabilizability form).
pub(crate) fn pbh_wide_rank(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    lambda: Complex<f64>,
    rel_cutoff: f64,
) -> usize {
    let n = a.nrows();
    let m = b.ncols();
    let wide = DMatrix::<Complex<f64>>::from_fn(n, n + m, |i, j| {
        if j < n {
            let shift = if i == j { lambda } else { Complex::new(0.0, 0.0) };
            Complex::new(a[(i, j)], 0.0) - shift
        } else {
            Complex::new(b[(i, j - n)], 0.0)
        }
    });
    numerical_rank(&wide, rel_cutoff)
}

/// True when `row` lies in the row space of `m` (rank does not grow when the
/// row is appended).
pub(crate) fn row_in_rowspace(m: &DMatrix<f64>, row: &DVector<f64>, rel_cutoff: f64) -> bool {
    let base_rank = numerical_rank(m, rel_cutoff);
    let mut stacked = DMatrix::zeros(m.nrows() + 1, m.ncols());
    stacked.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    stacked.row_mut(m.nrows()).copy_from(&row.transpose());
    numerical_rank(&stacked, rel_cutoff) == base_rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pseudo_inverse_of_projector_blocks() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let p = pseudo_inverse(&m, 1e-12);
        assert!((p[(0, 0)] - 0.5).abs() < 1e-14);
        assert_eq!(p[(1, 1)], 0.0);
    }

    #[test]
    fn rank_of_rank_one_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 3.0, 6.0, 9.0]);
        assert_eq!(numerical_rank(&m, 1e-10), 1);
    }

    #[test]
    fn sqrt_reproduces_psd_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let r = sym_psd_sqrt(&m);
        assert!(max_abs_diff(&(&r * &r), &m) < 1e-12);
    }

    #[test]
    fn rowspace_membership() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let sum = DVector::from_row_slice(&[1.0, 1.0, 2.0]);
        let e1 = DVector::from_row_slice(&[1.0, 0.0, 0.0]);
        assert!(row_in_rowspace(&m, &sum, 1e-10));
        assert!(!row_in_rowspace(&m, &e1, 1e-10));
    }
}
