//! Model-based sparse observability index of a known `(A, C)` pair.
//!
//! Two independent routes compute the same quantity `delta_max`:
//! subset-enumerated Hautus rank tests over sensor removal sets, and the
//! eigenvector-sparsity characterization (minimum `||C v||_0` over
//! eigenvectors, minus one). The data-driven indices are validated against
//! these.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::numlin::{
    self, eigen_structure, numerical_rank, sparsest_vector_in_subspace, to_complex, CMatrix,
    CVector, EigenStructure, NumericalConfig, NumlinError,
};
use crate::subsets::{complement, Combinations};
use crate::sysmodel::LtiSystem;

/// Which route produced a [`SparseObsResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObsMethod {
    SubsetEnum,
    EigSparsity,
}

/// Sparse observability index with certificates. `index = -1` encodes a
/// system that is unobservable even with every sensor in place.
#[derive(Debug, Clone)]
pub struct SparseObsResult {
    /// `delta_max` in `-1..=q-1`.
    pub index: i64,
    /// A removal set of `index + 1` sensors that destroys observability
    /// (absent when no such set exists, i.e. `index = q - 1`, or when the
    /// system is unobservable outright).
    pub witness_subset: Option<Vec<usize>>,
    /// An eigenvector `v` with `||C v||_0 = index + 1` (eig route only).
    pub witness_eigenvector: Option<CVector>,
    pub method: ObsMethod,
}

fn stack_shifted(a_c: &CMatrix, lambda: Complex64, c_rows: &CMatrix, kept: &[usize]) -> CMatrix {
    let n = a_c.nrows();
    let total = n + kept.len();
    let mut out = CMatrix::zeros(total, n);
    let shifted = a_c - CMatrix::identity(n, n) * lambda;
    out.view_mut((0, 0), (n, n)).copy_from(&shifted);
    for (slot, &row) in kept.iter().enumerate() {
        for j in 0..n {
            out[(n + slot, j)] = c_rows[(row, j)];
        }
    }
    out
}

fn pbh_with_eigs(
    a_c: &CMatrix,
    c_c: &CMatrix,
    kept: &[usize],
    eigs: &[Complex64],
    cfg: &NumericalConfig,
) -> bool {
    let n = a_c.nrows();
    eigs.iter()
        .all(|&lambda| numerical_rank(&stack_shifted(a_c, lambda, c_c, kept), cfg) == n)
}

fn representative_eigenvalues(
    structure: &EigenStructure,
    cfg: &NumericalConfig,
) -> Vec<Complex64> {
    structure
        .conjugate_representatives(cfg)
        .iter()
        .map(|c| c.lambda)
        .collect()
}

/// Hautus test restricted to a sensor subset: `(A, C_kept)` is observable iff
/// `rank [A - lambda I; C_kept] = n` at every eigenvalue of `A`. Off-spectrum
/// `lambda` need no test since `A - lambda I` is already invertible there.
pub fn pbh_observable(
    sys: &LtiSystem,
    sensor_set: &[usize],
    cfg: &NumericalConfig,
) -> Result<bool, NumlinError> {
    let structure = eigen_structure(sys.a(), cfg)?;
    let eigs = representative_eigenvalues(&structure, cfg);
    let mut kept: Vec<usize> = sensor_set.to_vec();
    kept.sort_unstable();
    kept.dedup();
    Ok(pbh_with_eigs(
        &to_complex(sys.a()),
        &to_complex(sys.c()),
        &kept,
        &eigs,
        cfg,
    ))
}

/// `delta_max` by ascending enumeration of removal sets: the largest number
/// of sensors whose removal (every choice) leaves the system observable.
/// The witness is the lexicographically first failing removal set one level
/// above the index.
pub fn sparse_obs_index_enum(
    sys: &LtiSystem,
    cfg: &NumericalConfig,
) -> Result<SparseObsResult, NumlinError> {
    let q = sys.output_dim();
    let structure = eigen_structure(sys.a(), cfg)?;
    let eigs = representative_eigenvalues(&structure, cfg);
    let a_c = to_complex(sys.a());
    let c_c = to_complex(sys.c());

    for removed_count in 0..=q - 1 {
        for removal in Combinations::new(q, removed_count) {
            let kept = complement(q, &removal);
            if !pbh_with_eigs(&a_c, &c_c, &kept, &eigs, cfg) {
                let index = removed_count as i64 - 1;
                let witness_subset = if index >= 0 { Some(removal) } else { None };
                return Ok(SparseObsResult {
                    index,
                    witness_subset,
                    witness_eigenvector: None,
                    method: ObsMethod::SubsetEnum,
                });
            }
        }
    }
    Ok(SparseObsResult {
        index: q as i64 - 1,
        witness_subset: None,
        witness_eigenvector: None,
        method: ObsMethod::SubsetEnum,
    })
}

/// `delta_max` via eigenvector sparsity: one less than the minimum tolerant
/// `||C v||_0` over all eigenvectors `v`, eigenspace by eigenspace. Exact for
/// any geometric multiplicity through the sparsest-vector search.
pub fn sparse_obs_index_eig(
    sys: &LtiSystem,
    cfg: &NumericalConfig,
) -> Result<SparseObsResult, NumlinError> {
    let structure = eigen_structure(sys.a(), cfg)?;
    let c_c = to_complex(sys.c());

    let mut best: Option<(usize, CVector)> = None;
    for cluster in structure.conjugate_representatives(cfg) {
        let found = sparsest_vector_in_subspace(&c_c, &cluster.basis, cfg)?;
        let better = match &best {
            None => true,
            Some((min_l0, _)) => found.min_l0 < *min_l0,
        };
        if better {
            best = Some((found.min_l0, found.witness));
        }
    }
    let (min_l0, witness) = best.expect("a square matrix has at least one eigenvalue");

    let index = min_l0 as i64 - 1;
    let witness_subset = if index >= 0 && index < sys.output_dim() as i64 - 1 {
        // The support of C v is a removal set killing observability: on the
        // remaining sensors C v vanishes.
        let image = &c_c * &witness;
        Some(numlin::support(&image, cfg))
    } else {
        None
    };
    Ok(SparseObsResult {
        index,
        witness_subset,
        witness_eigenvector: Some(witness),
        method: ObsMethod::EigSparsity,
    })
}

/// Ground-truth `delta_max` of a known system: the eigenvector-sparsity route
/// (exact and cheaper than subset enumeration on large sensor counts).
pub fn delta_max(sys: &LtiSystem, cfg: &NumericalConfig) -> Result<i64, NumlinError> {
    Ok(sparse_obs_index_eig(sys, cfg)?.index)
}

/// Convenience for tests: a dense measurement matrix from a seeded generator.
pub fn dense_c(q: usize, n: usize, seed: u64) -> DMatrix<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(q, n, |_, _| rng.sample(rand_distr::StandardNormal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::count_nonzero_rows;
    use crate::sysmodel::{pendulum_system, random_system};
    use nalgebra::{DMatrix, DVector};

    fn cfg() -> NumericalConfig {
        NumericalConfig::default()
    }

    fn diag(entries: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(entries.to_vec()))
    }

    #[test]
    fn identity_measurement_is_observable() {
        let sys = LtiSystem::new(diag(&[1.0, 2.0]), DMatrix::identity(2, 2)).unwrap();
        assert!(pbh_observable(&sys, &[0, 1], &cfg()).unwrap());
    }

    #[test]
    fn unseen_mode_fails_pbh() {
        // C = [1 0] never sees the second mode of diag(1, 2).
        let sys = LtiSystem::new(diag(&[1.0, 2.0]), DMatrix::from_row_slice(1, 2, &[1.0, 0.0]))
            .unwrap();
        assert!(!pbh_observable(&sys, &[0], &cfg()).unwrap());
    }

    #[test]
    fn pendulum_survives_any_single_sensor_loss() {
        let sys = pendulum_system();
        for removed in 0..3 {
            let kept: Vec<usize> = (0..3).filter(|&i| i != removed).collect();
            assert!(pbh_observable(&sys, &kept, &cfg()).unwrap());
        }
    }

    #[test]
    fn pendulum_index_is_two_by_both_methods() {
        let sys = pendulum_system();
        let by_enum = sparse_obs_index_enum(&sys, &cfg()).unwrap();
        let by_eig = sparse_obs_index_eig(&sys, &cfg()).unwrap();
        assert_eq!(by_enum.index, 2);
        assert_eq!(by_eig.index, 2);
        // q - 1 = 2: no removal set can be exhibited, the index is maximal.
        assert!(by_enum.witness_subset.is_none());
        let v = by_eig.witness_eigenvector.unwrap();
        let image = to_complex(sys.c()) * &v;
        assert_eq!(count_nonzero_rows(&image, &cfg()), 3);
    }

    #[test]
    fn identity_dynamics_index_is_zero() {
        // Every nonzero vector is an eigenvector of I, so a basis vector
        // meets a single sensor: removing one sensor kills observability.
        let sys = LtiSystem::new(DMatrix::identity(2, 2), DMatrix::identity(2, 2)).unwrap();
        let by_enum = sparse_obs_index_enum(&sys, &cfg()).unwrap();
        let by_eig = sparse_obs_index_eig(&sys, &cfg()).unwrap();
        assert_eq!(by_enum.index, 0);
        assert_eq!(by_eig.index, 0);
        assert_eq!(by_enum.witness_subset.as_deref(), Some(&[0][..]));
    }

    #[test]
    fn zero_column_makes_system_unobservable() {
        // Mode 3 is invisible: C e_3 = 0.
        let c = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 0.0]);
        let sys = LtiSystem::new(diag(&[1.0, 2.0, 3.0]), c).unwrap();
        let by_eig = sparse_obs_index_eig(&sys, &cfg()).unwrap();
        assert_eq!(by_eig.index, -1);
        let by_enum = sparse_obs_index_enum(&sys, &cfg()).unwrap();
        assert_eq!(by_enum.index, -1);
        assert!(by_enum.witness_subset.is_none());
    }

    #[test]
    fn cross_oracle_agreement_on_random_systems() {
        for seed in 0..25 {
            let sys = random_system(3, 4, seed);
            let by_enum = sparse_obs_index_enum(&sys, &cfg()).unwrap();
            let by_eig = sparse_obs_index_eig(&sys, &cfg()).unwrap();
            assert_eq!(by_enum.index, by_eig.index, "seed {seed}");
        }
    }

    #[test]
    fn cross_oracle_agreement_with_repeated_eigenvalues() {
        // Semisimple repeated eigenvalue: the eig route must minimize over a
        // two-dimensional eigenspace.
        for seed in 0..10 {
            let d = diag(&[2.0, 2.0, -1.0, 0.5]);
            let p = crate::oracle::dense_c(4, 4, seed + 500);
            if p.clone().lu().try_inverse().is_none() {
                continue;
            }
            let p_inv = p.clone().lu().try_inverse().unwrap();
            let a = &p * d * p_inv;
            let c = dense_c(5, 4, seed + 900);
            let sys = LtiSystem::new(a, c).unwrap();
            let by_enum = sparse_obs_index_enum(&sys, &cfg()).unwrap();
            let by_eig = sparse_obs_index_eig(&sys, &cfg()).unwrap();
            assert_eq!(by_enum.index, by_eig.index, "seed {seed}");
        }
    }

    #[test]
    fn adding_a_sensor_never_hurts() {
        for seed in 0..10 {
            let sys = random_system(3, 4, seed);
            let base = sparse_obs_index_eig(&sys, &cfg()).unwrap().index;
            let mut extended = sys.c().clone().insert_row(4, 0.0);
            for j in 0..3 {
                extended[(4, j)] = (seed as f64 + 1.0) * 0.37 * (j as f64 + 1.0);
            }
            let bigger = LtiSystem::new(sys.a().clone(), extended).unwrap();
            let grown = sparse_obs_index_eig(&bigger, &cfg()).unwrap().index;
            assert!(grown >= base, "seed {seed}: {grown} < {base}");
        }
    }

    #[test]
    fn index_invariant_under_row_permutation_and_scaling() {
        for seed in 0..10 {
            let sys = random_system(3, 5, seed);
            let base = sparse_obs_index_enum(&sys, &cfg()).unwrap().index;

            let mut permuted = DMatrix::zeros(5, 3);
            let order = [3_usize, 0, 4, 1, 2];
            for (dst, &src) in order.iter().enumerate() {
                for j in 0..3 {
                    permuted[(dst, j)] = sys.c()[(src, j)];
                }
            }
            let perm_sys = LtiSystem::new(sys.a().clone(), permuted).unwrap();
            assert_eq!(
                sparse_obs_index_enum(&perm_sys, &cfg()).unwrap().index,
                base
            );

            let mut scaled = sys.c().clone();
            let factors = [3.0, -0.25, 10.0, 0.5, -2.0];
            for (i, f) in factors.iter().enumerate() {
                for j in 0..3 {
                    scaled[(i, j)] *= f;
                }
            }
            let scaled_sys = LtiSystem::new(sys.a().clone(), scaled).unwrap();
            assert_eq!(
                sparse_obs_index_enum(&scaled_sys, &cfg()).unwrap().index,
                base
            );
        }
    }

    #[test]
    fn index_stays_within_bounds() {
        for seed in 0..15 {
            let sys = random_system(2, 3, seed);
            let r = sparse_obs_index_eig(&sys, &cfg()).unwrap();
            assert!(r.index >= -1);
            assert!(r.index <= 2);
        }
    }
}
