//! Small dense complex linear algebra helpers shared across the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub type C = Complex<f64>;
pub type CMat = DMatrix<C>;
pub type CVec = DVector<C>;

/// Relative singular-value threshold: σ < RANK_TOL·σ_max counts as zero.
pub const RANK_TOL: f64 = 1e-8;

/// Absolute floor below which a singular value counts as zero regardless of
/// σ_max, so that numerically-zero matrices (‖·‖ ~ 1e-15 round-off) are not
/// treated as full rank by the relative test.
pub const ABS_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis of the column span, via SVD with the relative threshold.
pub fn orthonormal_column_basis(m: &CMat) -> CMat {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > (RANK_TOL * smax).max(ABS_TOL))
        .count();
    u.columns(0, rank).into_owned()
}

pub fn rank(m: &CMat) -> usize {
    orthonormal_column_basis(m).ncols()
}

/// Orthonormal basis of the kernel {x : m x = 0}.
pub fn null_space(m: &CMat) -> CMat {
    let ncols = m.ncols();
    if ncols == 0 {
        return CMat::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMat::identity(ncols, ncols);
    }
    // Pad with zero rows so the thin SVD returns the full V factor.
    let work = if m.nrows() < ncols {
        let mut p = CMat::zeros(ncols, ncols);
        p.rows_mut(0, m.nrows()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max();
    let mut cols = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= (RANK_TOL * smax).max(ABS_TOL) {
            cols.push(v_t.row(i).adjoint());
        }
    }
    let mut out = CMat::zeros(ncols, cols.len());
    for (j, col) in cols.iter().enumerate() {
        out.set_column(j, col);
    }
    out
}

/// Orthonormal basis of the orthogonal complement of span(basis) in C^n.
pub fn orthogonal_complement(basis: &CMat) -> CMat {
    if basis.ncols() == 0 {
        return CMat::identity(basis.nrows(), basis.nrows());
    }
    null_space(&basis.adjoint())
}

/// Eigen-decomposition of a Hermitian matrix: (eigenvalues ascending, eigenvectors).
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (j, &i) in idx.iter().enumerate() {
        vecs.set_column(j, &eig.eigenvectors.column(i).into_owned());
    }
    (vals, vecs)
}

/// Unitary polar factor U of m = U·P (via SVD).
pub fn polar_unitary(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    u * v_t
}

pub fn gaussian_real<R: Rng>(rng: &mut R) -> f64 {
    Distribution::<f64>::sample(&StandardNormal, rng)
}

pub fn gaussian_complex<R: Rng>(rng: &mut R) -> C {
    let re = gaussian_real(rng);
    let im = gaussian_real(rng);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

pub fn gaussian_vector<R: Rng>(n: usize, rng: &mut R) -> CVec {
    CVec::from_fn(n, |_, _| gaussian_complex(rng))
}

/// Haar-like random unitary: orthonormalized complex Gaussian.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMat {
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let g = gaussian_matrix(n, n, rng);
    let qr = g.qr();
    qr.q()
}

/// Column-orthonormalized Gaussian frame (tall isometry), rows × cols with cols ≤ rows.
pub fn random_isometry<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    assert!(cols <= rows);
    if cols == 0 {
        return CMat::zeros(rows, 0);
    }
    let g = gaussian_matrix(rows, cols, rng);
    g.qr().q()
}
