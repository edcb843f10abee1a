//! Data-driven sparse observability: informativity tests and the index
//! `rho_max` computed from trajectory data alone.
//!
//! From attack-free data the index is exact whenever `X^-` has full row rank:
//! every system consistent with the data is `rho`-sparse observable iff the
//! stacked matrix `[X^+ - lambda X^-; Y_Gamma]` has rank `n` for every
//! eigenvalue `lambda` of the identified state matrix `X^+ (X^-)^+` and every
//! kept sensor set `Gamma` of size `q - rho`. From poisoned data only a
//! conservative index is available: an attacker controlling `l` rows forces
//! the `2 rho` margin `||Y z||_0 > 2 rho` on every kernel direction, hence
//! `rho_max = floor((min_lambda zeta(lambda) - 1) / 2)`.
//!
//! The kernel directions quantified over are `z = (X^-)^+ v` for `v` in the
//! eigenspace of the identified state matrix. For `T > n` the literal kernel
//! of `X^+ - lambda X^-` also contains `ker X^-`, on which `Y z` vanishes
//! identically; those directions carry no information about any consistent
//! system and are excluded, matching the parameterization the polynomial-time
//! paths rely on.
//!
//! Both a combinatorial reference path and a polynomial-time fast path
//! (valid when every eigenvalue has geometric multiplicity one) are provided;
//! [`dispatch_rho_max`] picks automatically.

use num_complex::Complex64;
use thiserror::Error;

use crate::numlin::{
    eigen_structure, numerical_rank, numerical_rank_real, pseudoinverse,
    sparsest_vector_in_subspace, to_complex, CMatrix, CVector, EigenStructure, NumericalConfig,
    NumlinError,
};
use crate::subsets::Combinations;
use crate::sysmodel::{DataMatrices, ScenarioTag};

#[derive(Debug, Error)]
pub enum DataDrivenError {
    #[error("rho = {rho} is out of range for q = {q} sensors (need 0 <= rho < q)")]
    RhoOutOfRange { rho: usize, q: usize },
    #[error("expected {expected:?} data, got {got:?}")]
    ScenarioMismatch { expected: ScenarioTag, got: ScenarioTag },
    #[error("polynomial path inapplicable: {reason}; use the general path")]
    FallbackRequired { reason: String },
    #[error(transparent)]
    Numerics(#[from] NumlinError),
}

/// Outcome of one informativity test at a fixed `rho`.
#[derive(Debug, Clone)]
pub struct InformativityVerdict {
    pub informative: bool,
    pub rho_tested: usize,
    /// First eigenvalue at which the rank condition failed.
    pub failing_lambda: Option<Complex64>,
    /// First kept sensor set (size `q - rho`) at which it failed.
    pub failing_subset: Option<Vec<usize>>,
    /// `X^-` lacks full row rank; such data are not informative for any rho.
    pub rank_deficient_xminus: bool,
}

/// Witness direction attaining the minimal sparsity score.
#[derive(Debug, Clone)]
pub struct ReportWitness {
    pub lambda: Complex64,
    /// Kernel direction `z` in data space (length `T`).
    pub z: CVector,
}

/// Computed data-driven index with per-eigenvalue scores and diagnostics.
#[derive(Debug, Clone)]
pub struct ResilienceReport {
    /// `rho_max` in `-1..=q-1`; `-1` means "not informative for any rho".
    pub rho_max: i64,
    /// Sparsity score `zeta(lambda)` per eigenvalue cluster representative,
    /// ordered by (re, im).
    pub zeta_per_lambda: Vec<(Complex64, usize)>,
    pub scenario: ScenarioTag,
    /// Whether the multiplicity-one polynomial path produced the result.
    pub fast_path_used: bool,
    pub rank_deficient_xminus: bool,
    /// Attack budget the caller assumed (poisoned scenario only).
    pub assumed_l: Option<usize>,
    /// Whether `assumed_l <= rho_max`; when false, the index cannot certify
    /// resilience for that budget.
    pub l_admissible: Option<bool>,
    pub witness: Option<ReportWitness>,
}

impl ResilienceReport {
    fn flagged(scenario: ScenarioTag, assumed_l: Option<usize>) -> Self {
        ResilienceReport {
            rho_max: -1,
            zeta_per_lambda: Vec::new(),
            scenario,
            fast_path_used: false,
            rank_deficient_xminus: true,
            assumed_l,
            l_admissible: assumed_l.map(|_| false),
            witness: None,
        }
    }
}

/// Shared pre-computation: pseudoinverse of `X^-`, the identified state
/// matrix, its clustered spectrum, and the identified output map.
struct Identification {
    pinv_c: CMatrix,
    structure: EigenStructure,
    /// `outputs * (X^-)^+`, the identified measurement matrix (complexified).
    output_map: CMatrix,
}

fn identify(data: &DataMatrices, cfg: &NumericalConfig) -> Result<Identification, DataDrivenError> {
    let pinv = pseudoinverse(data.x_minus());
    let a_hat = data.x_plus() * &pinv;
    let structure = eigen_structure(&a_hat, cfg)?;
    let output_map = to_complex(&(data.outputs() * &pinv));
    Ok(Identification {
        pinv_c: to_complex(&pinv),
        structure,
        output_map,
    })
}

fn expect_scenario(data: &DataMatrices, expected: ScenarioTag) -> Result<(), DataDrivenError> {
    if data.scenario() != expected {
        return Err(DataDrivenError::ScenarioMismatch {
            expected,
            got: data.scenario(),
        });
    }
    Ok(())
}

fn x_minus_full_rank(data: &DataMatrices, cfg: &NumericalConfig) -> bool {
    numerical_rank_real(data.x_minus(), cfg) == data.state_dim()
}

/// Stack `[X^+ - lambda X^-; outputs_Gamma]` and test its rank against `n`.
fn shifted_stack_rank_is_full(
    x_plus_c: &CMatrix,
    x_minus_c: &CMatrix,
    outputs_c: &CMatrix,
    kept: &[usize],
    lambda: Complex64,
    cfg: &NumericalConfig,
) -> bool {
    let n = x_minus_c.nrows();
    let t = x_minus_c.ncols();
    let mut stacked = CMatrix::zeros(n + kept.len(), t);
    let top = x_plus_c - x_minus_c * lambda;
    stacked.view_mut((0, 0), (n, t)).copy_from(&top);
    for (slot, &row) in kept.iter().enumerate() {
        for j in 0..t {
            stacked[(n + slot, j)] = outputs_c[(row, j)];
        }
    }
    numerical_rank(&stacked, cfg) == n
}

/// Informativity of attack-free data for `rho`-sparse observability.
///
/// Rejects `rho >= q`. Data with rank-deficient `X^-` are not informative for
/// any `rho` and yield a flagged verdict without any rank enumeration.
pub fn check_informative_attack_free(
    data: &DataMatrices,
    rho: usize,
    cfg: &NumericalConfig,
) -> Result<InformativityVerdict, DataDrivenError> {
    expect_scenario(data, ScenarioTag::AttackFree)?;
    let q = data.output_dim();
    if rho >= q {
        return Err(DataDrivenError::RhoOutOfRange { rho, q });
    }
    if !x_minus_full_rank(data, cfg) {
        return Ok(InformativityVerdict {
            informative: false,
            rho_tested: rho,
            failing_lambda: None,
            failing_subset: None,
            rank_deficient_xminus: true,
        });
    }
    let ident = identify(data, cfg)?;
    let lambdas: Vec<Complex64> = ident
        .structure
        .conjugate_representatives(cfg)
        .iter()
        .map(|c| c.lambda)
        .collect();
    match first_rank_failure(data, &lambdas, rho, cfg) {
        None => Ok(InformativityVerdict {
            informative: true,
            rho_tested: rho,
            failing_lambda: None,
            failing_subset: None,
            rank_deficient_xminus: false,
        }),
        Some((lambda, gamma)) => Ok(InformativityVerdict {
            informative: false,
            rho_tested: rho,
            failing_lambda: Some(lambda),
            failing_subset: Some(gamma),
            rank_deficient_xminus: false,
        }),
    }
}

/// First (Gamma, lambda) pair violating the stacked rank condition at level
/// `rho`, enumerating kept sets lexicographically, eigenvalues innermost.
fn first_rank_failure(
    data: &DataMatrices,
    lambdas: &[Complex64],
    rho: usize,
    cfg: &NumericalConfig,
) -> Option<(Complex64, Vec<usize>)> {
    let q = data.output_dim();
    let x_plus_c = to_complex(data.x_plus());
    let x_minus_c = to_complex(data.x_minus());
    let outputs_c = to_complex(data.outputs());
    for kept in Combinations::new(q, q - rho) {
        for &lambda in lambdas {
            if !shifted_stack_rank_is_full(&x_plus_c, &x_minus_c, &outputs_c, &kept, lambda, cfg) {
                return Some((lambda, kept));
            }
        }
    }
    None
}

type ZetaScores = (Vec<(Complex64, usize)>, Option<ReportWitness>);

/// Sparsity scores per eigenvalue representative: exact minimization of
/// `||outputs * (X^-)^+ * v||_0` over the eigenspace.
fn zeta_scores(
    ident: &Identification,
    cfg: &NumericalConfig,
) -> Result<ZetaScores, DataDrivenError> {
    let mut scores = Vec::new();
    let mut best: Option<(usize, ReportWitness)> = None;
    for cluster in ident.structure.conjugate_representatives(cfg) {
        let found = sparsest_vector_in_subspace(&ident.output_map, &cluster.basis, cfg)?;
        scores.push((cluster.lambda, found.min_l0));
        let better = match &best {
            None => true,
            Some((min_l0, _)) => found.min_l0 < *min_l0,
        };
        if better {
            let z = &ident.pinv_c * &found.witness;
            best = Some((
                found.min_l0,
                ReportWitness {
                    lambda: cluster.lambda,
                    z,
                },
            ));
        }
    }
    Ok((scores, best.map(|(_, w)| w)))
}

/// Data-driven index from attack-free data, by ascending informativity
/// checks: the largest `rho` for which the stacked rank condition holds over
/// every kept set and eigenvalue. The per-eigenvalue scores and witness are
/// attached from the sparsity characterization.
pub fn rho_max_attack_free(
    data: &DataMatrices,
    cfg: &NumericalConfig,
) -> Result<ResilienceReport, DataDrivenError> {
    expect_scenario(data, ScenarioTag::AttackFree)?;
    if !x_minus_full_rank(data, cfg) {
        return Ok(ResilienceReport::flagged(ScenarioTag::AttackFree, None));
    }
    let ident = identify(data, cfg)?;
    let lambdas: Vec<Complex64> = ident
        .structure
        .conjugate_representatives(cfg)
        .iter()
        .map(|c| c.lambda)
        .collect();

    let q = data.output_dim();
    let mut rho_max: i64 = -1;
    for rho in 0..q {
        if first_rank_failure(data, &lambdas, rho, cfg).is_none() {
            rho_max = rho as i64;
        } else {
            break;
        }
    }

    let (zeta_per_lambda, witness) = zeta_scores(&ident, cfg)?;
    Ok(ResilienceReport {
        rho_max,
        zeta_per_lambda,
        scenario: ScenarioTag::AttackFree,
        fast_path_used: false,
        rank_deficient_xminus: false,
        assumed_l: None,
        l_admissible: None,
        witness,
    })
}

/// Polynomial-time attack-free path: one unit eigenvector per eigenvalue,
/// `zeta(lambda) = ||outputs (X^-)^+ v||_0`, `rho_max = min zeta - 1`.
/// Requires geometric multiplicity one everywhere; otherwise signals
/// fallback to [`rho_max_attack_free`].
pub fn rho_max_attack_free_poly(
    data: &DataMatrices,
    cfg: &NumericalConfig,
) -> Result<ResilienceReport, DataDrivenError> {
    expect_scenario(data, ScenarioTag::AttackFree)?;
    if !x_minus_full_rank(data, cfg) {
        return Ok(ResilienceReport::flagged(ScenarioTag::AttackFree, None));
    }
    let ident = identify(data, cfg)?;
    ensure_multiplicity_one(&ident.structure)?;
    let (zeta_per_lambda, witness) = zeta_scores(&ident, cfg)?;
    let min_zeta = min_score(&zeta_per_lambda);
    Ok(ResilienceReport {
        rho_max: min_zeta as i64 - 1,
        zeta_per_lambda,
        scenario: ScenarioTag::AttackFree,
        fast_path_used: true,
        rank_deficient_xminus: false,
        assumed_l: None,
        l_admissible: None,
        witness,
    })
}

/// Conservative data-driven index from poisoned data: per eigenvalue, the
/// exact minimum of `||Y z||_0` over admissible kernel directions, then
/// `rho_max = floor((min zeta - 1) / 2)`. The assumed attack budget is
/// reported as admissible iff it does not exceed the computed index.
pub fn rho_max_poisoned(
    data: &DataMatrices,
    assumed_l: Option<usize>,
    cfg: &NumericalConfig,
) -> Result<ResilienceReport, DataDrivenError> {
    expect_scenario(data, ScenarioTag::Poisoned)?;
    if !x_minus_full_rank(data, cfg) {
        return Ok(ResilienceReport::flagged(ScenarioTag::Poisoned, assumed_l));
    }
    let ident = identify(data, cfg)?;
    let (zeta_per_lambda, witness) = zeta_scores(&ident, cfg)?;
    finish_poisoned(zeta_per_lambda, witness, assumed_l, false)
}

/// Polynomial-time poisoned path; fallback contract as in the attack-free
/// polynomial path.
pub fn rho_max_poisoned_poly(
    data: &DataMatrices,
    assumed_l: Option<usize>,
    cfg: &NumericalConfig,
) -> Result<ResilienceReport, DataDrivenError> {
    expect_scenario(data, ScenarioTag::Poisoned)?;
    if !x_minus_full_rank(data, cfg) {
        return Ok(ResilienceReport::flagged(ScenarioTag::Poisoned, assumed_l));
    }
    let ident = identify(data, cfg)?;
    ensure_multiplicity_one(&ident.structure)?;
    let (zeta_per_lambda, witness) = zeta_scores(&ident, cfg)?;
    finish_poisoned(zeta_per_lambda, witness, assumed_l, true)
}

fn finish_poisoned(
    zeta_per_lambda: Vec<(Complex64, usize)>,
    witness: Option<ReportWitness>,
    assumed_l: Option<usize>,
    fast_path: bool,
) -> Result<ResilienceReport, DataDrivenError> {
    let min_zeta = min_score(&zeta_per_lambda);
    let rho_max = (min_zeta as i64 - 1).div_euclid(2);
    Ok(ResilienceReport {
        rho_max,
        zeta_per_lambda,
        scenario: ScenarioTag::Poisoned,
        fast_path_used: fast_path,
        rank_deficient_xminus: false,
        assumed_l,
        l_admissible: assumed_l.map(|l| l as i64 <= rho_max),
        witness,
    })
}

fn min_score(scores: &[(Complex64, usize)]) -> usize {
    scores
        .iter()
        .map(|(_, z)| *z)
        .min()
        .expect("at least one eigenvalue cluster")
}

fn ensure_multiplicity_one(structure: &EigenStructure) -> Result<(), DataDrivenError> {
    if let Some(cluster) = structure.clusters.iter().find(|c| c.geo_mult > 1) {
        return Err(DataDrivenError::FallbackRequired {
            reason: format!(
                "eigenvalue {:.6}{:+.6}i has geometric multiplicity {}",
                cluster.lambda.re, cluster.lambda.im, cluster.geo_mult
            ),
        });
    }
    Ok(())
}

/// Single entry point: checks the `X^-` rank once, routes to the
/// multiplicity-one polynomial path when eligible and to the general path
/// otherwise. The report records which path ran.
pub fn dispatch_rho_max(
    data: &DataMatrices,
    assumed_l: Option<usize>,
    cfg: &NumericalConfig,
) -> Result<ResilienceReport, DataDrivenError> {
    if !x_minus_full_rank(data, cfg) {
        let assumed = match data.scenario() {
            ScenarioTag::AttackFree => None,
            ScenarioTag::Poisoned => assumed_l,
        };
        return Ok(ResilienceReport::flagged(data.scenario(), assumed));
    }
    let ident = identify(data, cfg)?;
    let poly_ok = ident.structure.all_multiplicity_one();
    match data.scenario() {
        ScenarioTag::AttackFree => {
            if poly_ok {
                rho_max_attack_free_poly(data, cfg)
            } else {
                rho_max_attack_free(data, cfg)
            }
        }
        ScenarioTag::Poisoned => {
            if poly_ok {
                rho_max_poisoned_poly(data, assumed_l, cfg)
            } else {
                rho_max_poisoned(data, assumed_l, cfg)
            }
        }
    }
}
