//! Tolerance-aware numerical linear algebra kernel.
//!
//! Everything downstream reduces to four primitives: numerical rank at a
//! relative singular-value cutoff, Moore–Penrose pseudoinverse, clustered
//! eigendecomposition with per-cluster kernel bases, and an exact
//! sparsest-vector-in-subspace search. Rank and kernel tests run in complex
//! arithmetic even for real inputs, since the spectra being probed come in
//! conjugate pairs.

use nalgebra::{DMatrix, DVector};
use nalgebra::linalg::{Schur, SVD};
use num_complex::Complex64;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerances for rank, entry-zero and eigenvalue-clustering decisions.
///
/// The underlying theory is exact-arithmetic; every tolerance here is an
/// artifact of floating point and is exposed rather than hardwired.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericalConfig {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rtol: f64,
    /// Absolute magnitude below which a vector entry counts as zero.
    pub zero_atol: f64,
    /// Relative (to the vector's max magnitude) entry-zero threshold.
    pub zero_rtol: f64,
    /// Max distance in the complex plane for merging eigenvalues into one cluster.
    pub eig_cluster_tol: f64,
}

impl Default for NumericalConfig {
    fn default() -> Self {
        NumericalConfig {
            rank_rtol: 1e-8,
            zero_atol: 1e-9,
            zero_rtol: 1e-8,
            eig_cluster_tol: 1e-7,
        }
    }
}

impl NumericalConfig {
    /// All tolerances must be strictly positive and below one.
    pub fn validate(&self) -> Result<(), NumlinError> {
        let fields = [
            ("rank_rtol", self.rank_rtol),
            ("zero_atol", self.zero_atol),
            ("zero_rtol", self.zero_rtol),
            ("eig_cluster_tol", self.eig_cluster_tol),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v < 1.0) {
                return Err(NumlinError::InvalidConfig {
                    field: name,
                    value: v,
                });
            }
        }
        Ok(())
    }

    /// Entry-zero threshold for a vector whose largest magnitude is `max_abs`.
    pub fn zero_threshold(&self, max_abs: f64) -> f64 {
        self.zero_atol + self.zero_rtol * max_abs
    }
}

#[derive(Debug, Error)]
pub enum NumlinError {
    #[error("tolerance `{field}` = {value} must lie strictly in (0, 1)")]
    InvalidConfig { field: &'static str, value: f64 },
    #[error("eigensolver did not converge on a {n}x{n} matrix")]
    EigenSolverDiverged { n: usize },
    #[error("subspace basis is rank-deficient: rank {rank} < {cols} columns")]
    RankDeficientBasis { rank: usize, cols: usize },
    #[error("subspace basis must have at least one column")]
    EmptyBasis,
}

/// Lift a real matrix into complex arithmetic.
pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

fn rank_threshold(rows: usize, cols: usize, sigma_max: f64, cfg: &NumericalConfig) -> f64 {
    cfg.rank_rtol * sigma_max * rows.max(cols) as f64
}

/// Numerical rank: the count of singular values above
/// `rank_rtol * sigma_max * max(rows, cols)`. Total; the zero (or empty)
/// matrix has rank 0.
pub fn numerical_rank(m: &CMatrix, cfg: &NumericalConfig) -> usize {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let sigma_max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let thresh = rank_threshold(rows, cols, sigma_max, cfg);
    sv.iter().filter(|&&s| s > thresh).count()
}

/// Numerical rank of a real matrix (lifted to complex).
pub fn numerical_rank_real(m: &DMatrix<f64>, cfg: &NumericalConfig) -> usize {
    numerical_rank(&to_complex(m), cfg)
}

/// The rank cutoff [`numerical_rank`] would apply to `m`:
/// `rank_rtol * sigma_max * max(rows, cols)`.
pub fn rank_threshold_for(m: &CMatrix, cfg: &NumericalConfig) -> f64 {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let sv = m.clone().singular_values();
    let sigma_max = sv.iter().cloned().fold(0.0_f64, f64::max);
    rank_threshold(rows, cols, sigma_max, cfg)
}

/// Count of singular values above an externally fixed cutoff. With a cutoff
/// anchored to a parent matrix this is monotone under row selection
/// (singular-value interlacing), unlike the per-matrix relative rule.
pub fn rank_at_threshold(m: &CMatrix, thresh: f64) -> usize {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    sv.iter().filter(|&&s| s > thresh).count()
}

/// Moore–Penrose pseudoinverse via SVD, truncating singular values below
/// `eps * sigma_max * max(rows, cols)`.
pub fn pseudoinverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let svd = SVD::new(m.clone(), true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = f64::EPSILON * sigma_max * rows.max(cols) as f64;
    svd.pseudo_inverse(cutoff)
        .expect("pseudo_inverse only fails for a negative cutoff")
}

/// Orthonormal basis of the numerical right null space of `m`, at the same
/// rank threshold as [`numerical_rank`]. Returns a `cols x k` matrix; `k = 0`
/// (zero columns) when the kernel is trivial.
pub fn kernel_basis(m: &CMatrix, cfg: &NumericalConfig) -> CMatrix {
    kernel_basis_impl(m, None, cfg)
}

/// Kernel basis at an externally fixed singular-value cutoff.
pub fn kernel_basis_at_threshold(m: &CMatrix, thresh: f64) -> CMatrix {
    kernel_basis_impl(m, Some(thresh), &NumericalConfig::default())
}

fn kernel_basis_impl(m: &CMatrix, fixed_thresh: Option<f64>, cfg: &NumericalConfig) -> CMatrix {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    // The thin SVD of a wide matrix does not expose the kernel directions;
    // padding with zero rows leaves singular values and right singular
    // vectors unchanged while making the full V available.
    let work = if rows < cols {
        let mut padded = CMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (rows, cols)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = SVD::new(work, false, true);
    let v_t = svd.v_t.expect("SVD was computed with compute_v");
    let thresh = fixed_thresh.unwrap_or_else(|| {
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
        rank_threshold(rows, cols, sigma_max, cfg)
    });
    let rank = svd.singular_values.iter().filter(|&&s| s > thresh).count();
    // Singular values are sorted descending, so kernel vectors are the
    // trailing rows of V^H.
    v_t.rows(rank, cols - rank).adjoint()
}

/// Tolerant zero-norm of a vector: entries with
/// `|v_i| > zero_atol + zero_rtol * max_j |v_j|` count as nonzero.
pub fn count_nonzero_rows(v: &CVector, cfg: &NumericalConfig) -> usize {
    let max_abs = v.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    let thresh = cfg.zero_threshold(max_abs);
    v.iter().filter(|c| c.norm() > thresh).count()
}

/// Indices of the tolerantly-nonzero entries of `v` (the support).
pub fn support(v: &CVector, cfg: &NumericalConfig) -> Vec<usize> {
    let max_abs = v.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    let thresh = cfg.zero_threshold(max_abs);
    v.iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > thresh)
        .map(|(i, _)| i)
        .collect()
}

/// One eigenvalue cluster: centroid, orthonormal basis of the numerical
/// kernel of `A - lambda I`, and its dimension (geometric multiplicity).
#[derive(Debug, Clone)]
pub struct EigenCluster {
    pub lambda: Complex64,
    pub basis: CMatrix,
    pub geo_mult: usize,
}

/// Clustered eigendecomposition of a real square matrix.
#[derive(Debug, Clone)]
pub struct EigenStructure {
    pub clusters: Vec<EigenCluster>,
}

impl EigenStructure {
    pub fn all_multiplicity_one(&self) -> bool {
        self.clusters.iter().all(|c| c.geo_mult == 1)
    }

    /// One representative per conjugate pair, for spectra of real matrices.
    /// Clusters with negative imaginary part are dropped when their mirror
    /// image is present; ordering is by (re, im) of the centroid.
    pub fn conjugate_representatives(&self, cfg: &NumericalConfig) -> Vec<&EigenCluster> {
        let mut reps: Vec<&EigenCluster> = self
            .clusters
            .iter()
            .filter(|c| {
                if c.lambda.im >= 0.0 {
                    return true;
                }
                !self
                    .clusters
                    .iter()
                    .any(|other| (other.lambda - c.lambda.conj()).norm() <= cfg.eig_cluster_tol)
            })
            .collect();
        reps.sort_by(|a, b| {
            (a.lambda.re, a.lambda.im)
                .partial_cmp(&(b.lambda.re, b.lambda.im))
                .expect("eigenvalues are finite")
        });
        reps
    }
}

fn cluster_values(values: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut sorted: Vec<Complex64> = values.to_vec();
    sorted.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("eigenvalues are finite")
    });
    // Greedy pass, then merge until no two centroids sit within tol.
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for v in sorted {
        match clusters
            .iter_mut()
            .find(|(center, _)| (*center - v).norm() <= tol)
        {
            Some((center, count)) => {
                let total = *count as f64 + 1.0;
                *center = (*center * (*count as f64) + v) / total;
                *count += 1;
            }
            None => clusters.push((v, 1)),
        }
    }
    loop {
        let mut merged = false;
        'outer: for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                if (clusters[i].0 - clusters[j].0).norm() <= tol {
                    let (ci, ni) = clusters[i];
                    let (cj, nj) = clusters.remove(j);
                    let total = (ni + nj) as f64;
                    clusters[i] = ((ci * ni as f64 + cj * nj as f64) / total, ni + nj);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    clusters.sort_by(|a, b| {
        (a.0.re, a.0.im)
            .partial_cmp(&(b.0.re, b.0.im))
            .expect("eigenvalues are finite")
    });
    clusters
}

/// Eigenvalues of `a` clustered within `eig_cluster_tol`, each with an
/// orthonormal basis of the numerical kernel of `a - lambda I` at the cluster
/// centroid.
pub fn eigen_structure(
    a: &DMatrix<f64>,
    cfg: &NumericalConfig,
) -> Result<EigenStructure, NumlinError> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigen_structure requires a square matrix");
    let max_iter = 100 * n.max(10);
    let schur = Schur::try_new(a.clone(), f64::EPSILON, max_iter)
        .ok_or(NumlinError::EigenSolverDiverged { n })?;
    let eigenvalues: Vec<Complex64> = schur.complex_eigenvalues().iter().cloned().collect();

    let a_c = to_complex(a);
    let mut clusters = Vec::new();
    for (lambda, _count) in cluster_values(&eigenvalues, cfg.eig_cluster_tol) {
        let shifted = &a_c - CMatrix::identity(n, n) * lambda;
        let mut basis = kernel_basis(&shifted, cfg);
        if basis.ncols() == 0 {
            // A drifted centroid can push the smallest singular value just
            // over the rank cutoff; the corresponding singular direction is
            // still the best eigenvector estimate.
            basis = smallest_singular_direction(&shifted);
        }
        let geo_mult = basis.ncols();
        clusters.push(EigenCluster {
            lambda,
            basis,
            geo_mult,
        });
    }
    Ok(EigenStructure { clusters })
}

fn smallest_singular_direction(m: &CMatrix) -> CMatrix {
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("SVD was computed with compute_v");
    let last = v_t.nrows() - 1;
    v_t.rows(last, 1).adjoint()
}

/// Result of the exact sparsest-vector search: the minimum tolerant zero-norm
/// over the subspace, a unit witness attaining it, and the maximal zero set
/// that certifies it.
#[derive(Debug, Clone)]
pub struct SparsestVector {
    pub min_l0: usize,
    pub witness: CVector,
    pub zero_set: Vec<usize>,
}

/// Minimize `||M B c||_0` over nonzero coefficient vectors `c`, where the
/// columns of `B` span a `d`-dimensional subspace.
///
/// Exact search over zero-support sets `Z` of the rows of `M B` in decreasing
/// size; `Z` is feasible iff the rows of `(M B)_Z` have rank below `d`. The
/// rank cutoff is anchored to the full projected matrix, which makes
/// feasibility exactly downward-closed (singular values only shrink under row
/// removal): a prefix whose rows already reach rank `d` prunes all of its
/// supersets. With `d = 1` this degenerates to counting the nonzero rows of
/// `M B`. Among equally sparse witnesses the one from the lexicographically
/// smallest maximal zero set is returned.
pub fn sparsest_vector_in_subspace(
    m: &CMatrix,
    basis: &CMatrix,
    cfg: &NumericalConfig,
) -> Result<SparsestVector, NumlinError> {
    let d = basis.ncols();
    if d == 0 {
        return Err(NumlinError::EmptyBasis);
    }
    let basis_rank = numerical_rank(basis, cfg);
    if basis_rank < d {
        return Err(NumlinError::RankDeficientBasis {
            rank: basis_rank,
            cols: d,
        });
    }
    let projected = m * basis; // q x d
    let q = projected.nrows();

    if d == 1 {
        let col = projected.column(0).into_owned();
        let min_l0 = count_nonzero_rows(&col, cfg);
        let zero_set: Vec<usize> = {
            let sup = support(&col, cfg);
            crate::subsets::complement(q, &sup)
        };
        let witness = canonical_unit(&basis.column(0).into_owned());
        return Ok(SparsestVector {
            min_l0,
            witness,
            zero_set,
        });
    }

    let thresh = rank_threshold_for(&projected, cfg);
    for size in (0..=q).rev() {
        let mut chosen = Vec::with_capacity(size);
        if let Some(zero_set) = first_feasible(&projected, d, size, 0, &mut chosen, thresh) {
            let rows = select_rows(&projected, &zero_set);
            let ker = if zero_set.is_empty() {
                CMatrix::identity(d, d)
            } else {
                kernel_basis_at_threshold(&rows, thresh)
            };
            // Feasibility guaranteed a nontrivial kernel at this cutoff.
            let coeff = ker.column(0).into_owned();
            let witness = canonical_unit(&(basis * &coeff));
            let min_l0 = q - zero_set.len();
            return Ok(SparsestVector {
                min_l0,
                witness,
                zero_set,
            });
        }
    }
    unreachable!("zero sets smaller than d are always feasible");
}

/// Depth-first lexicographic search for the first feasible zero set of the
/// given size. A partial selection with full column rank cannot be completed
/// into a feasible set (adding rows never lowers singular values), so it is
/// pruned.
fn first_feasible(
    projected: &CMatrix,
    d: usize,
    size: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    thresh: f64,
) -> Option<Vec<usize>> {
    if chosen.len() >= d {
        let rows = select_rows(projected, chosen);
        if rank_at_threshold(&rows, thresh) == d {
            return None;
        }
    }
    if chosen.len() == size {
        // Below d rows the rank cannot reach d; otherwise the check above
        // already found the rows rank-deficient.
        return Some(chosen.clone());
    }
    let q = projected.nrows();
    let remaining = size - chosen.len();
    for row in start..=q.saturating_sub(remaining) {
        chosen.push(row);
        if let Some(found) = first_feasible(projected, d, size, row + 1, chosen, thresh) {
            return Some(found);
        }
        chosen.pop();
    }
    None
}

fn select_rows(m: &CMatrix, rows: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

/// Unit-normalize and fix the phase so the largest-magnitude entry is real
/// and positive. Makes witnesses reproducible.
pub fn canonical_unit(v: &CVector) -> CVector {
    let norm = v.norm();
    if norm == 0.0 {
        return v.clone();
    }
    let (idx, _) = v
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.norm().partial_cmp(&b.norm()).expect("finite entries"))
        .expect("nonempty vector");
    let phase = v[idx] / v[idx].norm();
    v.map(|c| c / (phase * norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use proptest::prelude::*;

    fn cfg() -> NumericalConfig {
        NumericalConfig::default()
    }

    fn cmat(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
        to_complex(&DMatrix::from_row_slice(rows, cols, data))
    }

    #[test]
    fn config_defaults_are_valid() {
        assert!(cfg().validate().is_ok());
    }

    #[test]
    fn config_rejects_out_of_range_tolerances() {
        let mut c = cfg();
        c.rank_rtol = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.zero_atol = 1.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.eig_cluster_tol = -1e-3;
        assert!(c.validate().is_err());
    }

    #[test]
    fn rank_of_identity() {
        let m = CMatrix::identity(3, 3);
        assert_eq!(numerical_rank(&m, &cfg()), 3);
    }

    #[test]
    fn rank_of_zero_matrix() {
        let m = CMatrix::zeros(2, 5);
        assert_eq!(numerical_rank(&m, &cfg()), 0);
    }

    #[test]
    fn rank_truncates_tiny_singular_values() {
        // singular values 1 and 1e-15; cutoff 1e-8 * 1 * 2
        let m = cmat(2, 2, &[1.0, 0.0, 0.0, 1e-15]);
        assert_eq!(numerical_rank(&m, &cfg()), 1);
    }

    #[test]
    fn pseudoinverse_of_identity() {
        let m = DMatrix::<f64>::identity(4, 4);
        let p = pseudoinverse(&m);
        assert!((p - DMatrix::<f64>::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn pseudoinverse_of_singular_diagonal() {
        let m = dmatrix![2.0, 0.0; 0.0, 0.0];
        let p = pseudoinverse(&m);
        let expected = dmatrix![0.5, 0.0; 0.0, 0.0];
        assert!((p - expected).norm() < 1e-14);
    }

    #[test]
    fn pseudoinverse_satisfies_penrose_identities() {
        let m = DMatrix::from_row_slice(
            2,
            5,
            &[0.3, -1.2, 0.7, 2.1, -0.4, 1.5, 0.2, -0.9, 0.6, 1.1],
        );
        let p = pseudoinverse(&m);
        assert!((&m * &p * &m - &m).norm() < 1e-10);
        assert!((&p * &m * &p - &p).norm() < 1e-10);
        assert!(((&m * &p).transpose() - &m * &p).norm() < 1e-10);
        assert!(((&p * &m).transpose() - &p * &m).norm() < 1e-10);
        // full row rank: M M^+ = I
        assert!((&m * &p - DMatrix::<f64>::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn kernel_of_identity_is_trivial() {
        let m = CMatrix::identity(3, 3);
        assert_eq!(kernel_basis(&m, &cfg()).ncols(), 0);
    }

    #[test]
    fn kernel_of_zero_matrix_is_everything() {
        let m = CMatrix::zeros(2, 3);
        let k = kernel_basis(&m, &cfg());
        assert_eq!(k.ncols(), 3);
        assert!((k.adjoint() * &k - CMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn kernel_of_single_row() {
        let m = cmat(1, 3, &[1.0, 1.0, 0.0]);
        let k = kernel_basis(&m, &cfg());
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).norm() < 1e-12);
        assert!((k.adjoint() * &k - CMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn count_nonzero_examples() {
        let z = CVector::zeros(3);
        assert_eq!(count_nonzero_rows(&z, &cfg()), 0);

        let v = CVector::from_vec(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1e-12, 0.0),
            Complex64::new(3.0, 0.0),
        ]);
        // threshold = 1e-9 + 1e-8 * 3
        assert_eq!(count_nonzero_rows(&v, &cfg()), 1);

        let v = CVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-2.0, 0.0),
            Complex64::new(5.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]);
        assert_eq!(count_nonzero_rows(&v, &cfg()), 3);
    }

    #[test]
    fn eigen_structure_of_distinct_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let es = eigen_structure(&a, &cfg()).unwrap();
        assert_eq!(es.clusters.len(), 3);
        assert!(es.all_multiplicity_one());
        let lambdas: Vec<f64> = es.clusters.iter().map(|c| c.lambda.re).collect();
        assert!((lambdas[0] - 1.0).abs() < 1e-12);
        assert!((lambdas[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_structure_of_identity_clusters_to_one() {
        let a = DMatrix::<f64>::identity(2, 2);
        let es = eigen_structure(&a, &cfg()).unwrap();
        assert_eq!(es.clusters.len(), 1);
        assert_eq!(es.clusters[0].geo_mult, 2);
        assert!((es.clusters[0].lambda - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn eigen_structure_of_oscillator_is_conjugate_pair() {
        // Characteristic polynomial by hand: re = trace/2 = 0.9878,
        // im^2 = det - re^2 = 0.0243024.
        let a = dmatrix![0.9878, 0.0498; -0.4880, 0.9878];
        let es = eigen_structure(&a, &cfg()).unwrap();
        assert_eq!(es.clusters.len(), 2);
        assert!(es.all_multiplicity_one());
        let im_expected = 0.0243024_f64.sqrt();
        for c in &es.clusters {
            assert!((c.lambda.re - 0.9878).abs() < 1e-12);
            assert!((c.lambda.im.abs() - im_expected).abs() < 1e-10);
        }
        let reps = es.conjugate_representatives(&cfg());
        assert_eq!(reps.len(), 1);
        assert!(reps[0].lambda.im > 0.0);
    }

    #[test]
    fn eigen_residual_is_small() {
        let a = dmatrix![
            0.2, 1.0, 0.0;
            0.0, -0.5, 0.3;
            0.1, 0.0, 0.9
        ];
        let es = eigen_structure(&a, &cfg()).unwrap();
        let a_c = to_complex(&a);
        let norm_a = a.norm();
        let mut total_mult = 0;
        for c in &es.clusters {
            total_mult += c.geo_mult;
            let residual = &a_c * &c.basis - &c.basis * c.lambda;
            assert!(residual.norm() <= 1e-6 * norm_a.max(1.0));
            let gram = c.basis.adjoint() * &c.basis;
            assert!((gram - CMatrix::identity(c.geo_mult, c.geo_mult)).norm() < 1e-10);
        }
        assert!(total_mult <= 3);
    }

    #[test]
    fn sparsest_with_dense_single_column() {
        let m = CMatrix::identity(3, 3);
        let b = cmat(3, 1, &[1.0, 1.0, 1.0]);
        let r = sparsest_vector_in_subspace(&m, &b, &cfg()).unwrap();
        assert_eq!(r.min_l0, 3);
    }

    #[test]
    fn sparsest_finds_basis_vector() {
        let m = CMatrix::identity(3, 3);
        // columns (1,0,0) and (0,1,0): a basis vector is 1-sparse
        let b = cmat(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let r = sparsest_vector_in_subspace(&m, &b, &cfg()).unwrap();
        assert_eq!(r.min_l0, 1);
        let nonzero: Vec<usize> = (0..3).filter(|&i| r.witness[i].norm() > 1e-12).collect();
        assert_eq!(nonzero.len(), 1);
        assert!((r.witness[nonzero[0]].norm() - 1.0).abs() < 1e-12);
        // tie-break: the lexicographically smallest maximal zero set is
        // {0, 2}, so the surviving coordinate is the second one
        assert_eq!(r.zero_set, vec![0, 2]);
        assert_eq!(nonzero[0], 1);
    }

    #[test]
    fn sparsest_rejects_rank_deficient_basis() {
        let m = CMatrix::identity(3, 3);
        let b = cmat(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert!(matches!(
            sparsest_vector_in_subspace(&m, &b, &cfg()),
            Err(NumlinError::RankDeficientBasis { .. })
        ));
    }

    /// Independent oracle: full enumeration of all 2^q zero sets at the same
    /// globally anchored cutoff.
    fn brute_force_min_l0(m: &CMatrix, basis: &CMatrix, cfg: &NumericalConfig) -> usize {
        let projected = m * basis;
        let thresh = rank_threshold_for(&projected, cfg);
        let q = projected.nrows();
        let d = basis.ncols();
        let mut best = q + 1;
        for mask in 0..(1_u32 << q) {
            let rows: Vec<usize> = (0..q).filter(|i| mask & (1 << i) != 0).collect();
            let feasible = if rows.len() < d {
                true
            } else {
                rank_at_threshold(&select_rows(&projected, &rows), thresh) < d
            };
            if feasible {
                best = best.min(q - rows.len());
            }
        }
        best
    }

    fn seeded_cmatrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        // Tiny deterministic generator; quality is irrelevant here.
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        CMatrix::from_fn(rows, cols, |_, _| Complex64::new(next(), next()))
    }

    #[test]
    fn sparsest_matches_brute_force_on_random_instances() {
        for seed in 0..8 {
            let m = seeded_cmatrix(6, 4, seed);
            let b = seeded_cmatrix(4, 2, seed + 100);
            let r = sparsest_vector_in_subspace(&m, &b, &cfg()).unwrap();
            assert_eq!(r.min_l0, brute_force_min_l0(&m, &b, &cfg()), "seed {seed}");
        }
    }

    #[test]
    fn sparsest_matches_brute_force_on_planted_instances() {
        for seed in 0..8 {
            // Plant a vector that zeroes rows {0, 2, 4} of a 7-row matrix.
            let m = seeded_cmatrix(7, 5, seed);
            let zero_rows = [0_usize, 2, 4];
            let mz = select_rows(&m, &zero_rows);
            let w = kernel_basis(&mz, &cfg());
            assert!(w.ncols() >= 1);
            let mut b = CMatrix::zeros(5, 2);
            b.set_column(0, &w.column(0).into_owned());
            b.set_column(1, &seeded_cmatrix(5, 1, seed + 7).column(0).into_owned());
            let r = sparsest_vector_in_subspace(&m, &b, &cfg()).unwrap();
            let brute = brute_force_min_l0(&m, &b, &cfg());
            assert_eq!(r.min_l0, brute, "seed {seed}");
            assert!(r.min_l0 <= 4);
        }
    }

    #[test]
    fn sparsest_with_d1_equals_nonzero_count() {
        for seed in 0..10 {
            let m = seeded_cmatrix(5, 3, seed);
            let b = seeded_cmatrix(3, 1, seed + 50);
            let r = sparsest_vector_in_subspace(&m, &b, &cfg()).unwrap();
            let product = &m * &b;
            let col = CVector::from_column_slice(product.column(0).as_slice());
            assert_eq!(r.min_l0, count_nonzero_rows(&col, &cfg()));
        }
    }

    #[test]
    fn witness_count_matches_min_l0() {
        for seed in 0..6 {
            let m = seeded_cmatrix(6, 4, seed);
            let b = seeded_cmatrix(4, 2, seed + 31);
            let r = sparsest_vector_in_subspace(&m, &b, &cfg()).unwrap();
            let image = &m * &r.witness;
            assert_eq!(count_nonzero_rows(&image, &cfg()), r.min_l0);
        }
    }

    #[test]
    fn zero_set_feasibility_is_downward_closed() {
        for seed in 0..6 {
            let m = seeded_cmatrix(6, 4, seed);
            let b = seeded_cmatrix(4, 2, seed + 11);
            let projected = &m * &b;
            let thresh = rank_threshold_for(&projected, &cfg());
            let d = 2;
            for mask in 0..(1_u32 << 6) {
                let rows: Vec<usize> = (0..6).filter(|i| mask & (1 << i) != 0).collect();
                if rows.len() < d {
                    continue;
                }
                let feasible = rank_at_threshold(&select_rows(&projected, &rows), thresh) < d;
                if feasible {
                    for drop in 0..rows.len() {
                        let mut sub = rows.clone();
                        sub.remove(drop);
                        if sub.len() >= d {
                            let sub_feasible =
                                rank_at_threshold(&select_rows(&projected, &sub), thresh) < d;
                            assert!(sub_feasible, "subset of feasible set must be feasible");
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn rank_invariant_under_transpose_and_conjugation(
            rows in 1_usize..5,
            cols in 1_usize..5,
            seed in 0_u64..256,
        ) {
            let m = seeded_cmatrix(rows, cols, seed);
            let r = numerical_rank(&m, &cfg());
            prop_assert_eq!(numerical_rank(&m.transpose(), &cfg()), r);
            prop_assert_eq!(numerical_rank(&m.map(|c| c.conj()), &cfg()), r);
        }

        #[test]
        fn stacked_rank_dominates_blocks(
            rows_a in 1_usize..4,
            rows_b in 1_usize..4,
            cols in 1_usize..5,
            seed in 0_u64..256,
        ) {
            let a = seeded_cmatrix(rows_a, cols, seed);
            let b = seeded_cmatrix(rows_b, cols, seed.wrapping_add(1));
            let mut stacked = CMatrix::zeros(rows_a + rows_b, cols);
            stacked.view_mut((0, 0), (rows_a, cols)).copy_from(&a);
            stacked.view_mut((rows_a, 0), (rows_b, cols)).copy_from(&b);
            let r = numerical_rank(&stacked, &cfg());
            prop_assert!(r >= numerical_rank(&a, &cfg()).max(numerical_rank(&b, &cfg())));
        }

        #[test]
        fn sparsest_value_invariant_under_row_scaling(
            seed in 0_u64..64,
        ) {
            let m = seeded_cmatrix(5, 3, seed);
            let b = seeded_cmatrix(3, 2, seed.wrapping_add(17));
            let scales = [2.0, -0.5, 7.0, 0.25, -3.0];
            let mut scaled = m.clone();
            for (i, s) in scales.iter().enumerate() {
                for j in 0..3 {
                    scaled[(i, j)] *= Complex64::new(*s, 0.0);
                }
            }
            let r1 = sparsest_vector_in_subspace(&m, &b, &cfg()).unwrap();
            let r2 = sparsest_vector_in_subspace(&scaled, &b, &cfg()).unwrap();
            prop_assert_eq!(r1.min_l0, r2.min_l0);
        }
    }
}
