//! LTI system representation, trajectory simulation, and sparse sensor-attack
//! injection.
//!
//! A system is the autonomous pair `x(k+1) = A x(k)`, `y(k) = C x(k)`.
//! Simulation produces the state matrix `X` (columns `x(0), .., x(T)`) and the
//! nominal output block; attacks add an l-row-sparse matrix `E` on a fixed
//! sensor support. [`DataMatrices`] carries the shifted slices
//! `X^- = X[:, 0..T]`, `X^+ = X[:, 1..T+1]` together with the output block.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("state matrix must be square, got {rows}x{cols}")]
    StateMatrixNotSquare { rows: usize, cols: usize },
    #[error("measurement matrix has {c_cols} columns but the state dimension is {n}")]
    MeasurementWidthMismatch { c_cols: usize, n: usize },
    #[error("system must have at least one sensor")]
    NoSensors,
    #[error("initial state has length {got}, expected {expected}")]
    InitialStateLength { got: usize, expected: usize },
    #[error("horizon T = {t} is below the state dimension n = {n}")]
    HorizonTooShort { t: usize, n: usize },
    #[error("attack support has {support} sensors, exceeding the budget l = {budget}")]
    SupportExceedsBudget { support: usize, budget: usize },
    #[error("sensor index {index} out of range for {q} sensors")]
    SensorIndexOutOfRange { index: usize, q: usize },
    #[error("bias vector has length {got}, expected one entry per attacked sensor ({expected})")]
    BiasLengthMismatch { got: usize, expected: usize },
    #[error("states have {state_cols} columns; expected outputs columns + 1, got {output_cols}")]
    ColumnCountMismatch {
        state_cols: usize,
        output_cols: usize,
    },
    #[error("data blocks disagree: {detail}")]
    BlockMismatch { detail: String },
    #[error("outputs have {got} rows, expected {expected}")]
    OutputRowMismatch { got: usize, expected: usize },
}

/// The pair `(A, C)`: state matrix and measurement matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: DMatrix<f64>,
    c: DMatrix<f64>,
}

impl LtiSystem {
    pub fn new(a: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self, ModelError> {
        if a.nrows() != a.ncols() {
            return Err(ModelError::StateMatrixNotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        if c.ncols() != a.nrows() {
            return Err(ModelError::MeasurementWidthMismatch {
                c_cols: c.ncols(),
                n: a.nrows(),
            });
        }
        if c.nrows() == 0 {
            return Err(ModelError::NoSensors);
        }
        Ok(LtiSystem { a, c })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// State dimension n.
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Number of sensors q.
    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }
}

/// A simulated state/output record over horizon `T`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    states: DMatrix<f64>,          // n x (T+1)
    nominal_outputs: DMatrix<f64>, // q x T
    horizon: usize,
}

impl Trajectory {
    /// Full state matrix `X`, one column per time step `0..=T`.
    pub fn states(&self) -> &DMatrix<f64> {
        &self.states
    }

    /// Nominal (attack-free) outputs, one column per step `0..T`.
    pub fn nominal_outputs(&self) -> &DMatrix<f64> {
        &self.nominal_outputs
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

/// What the output block of a dataset is claimed to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioTag {
    AttackFree,
    Poisoned,
}

impl ScenarioTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioTag::AttackFree => "attack_free",
            ScenarioTag::Poisoned => "poisoned",
        }
    }
}

/// Shifted state slices and an output block built from one trajectory.
#[derive(Debug, Clone)]
pub struct DataMatrices {
    x_minus: DMatrix<f64>,
    x_plus: DMatrix<f64>,
    outputs: DMatrix<f64>,
    scenario: ScenarioTag,
}

impl DataMatrices {
    /// Assemble data matrices from explicit blocks, for datasets that do not
    /// come from one contiguous trajectory (multi-experiment snapshot pairs:
    /// each column pair satisfies `x_plus = A x_minus` for the generating
    /// system, but consecutive columns need not chain). A repeated semisimple
    /// eigenvalue makes the state matrix derogatory, so only such data can
    /// combine full row rank with geometric multiplicity above one.
    pub fn from_parts(
        x_minus: DMatrix<f64>,
        x_plus: DMatrix<f64>,
        outputs: DMatrix<f64>,
        scenario: ScenarioTag,
    ) -> Result<Self, ModelError> {
        if x_minus.shape() != x_plus.shape() {
            return Err(ModelError::BlockMismatch {
                detail: format!(
                    "x_minus is {:?}, x_plus is {:?}",
                    x_minus.shape(),
                    x_plus.shape()
                ),
            });
        }
        if outputs.ncols() != x_minus.ncols() {
            return Err(ModelError::BlockMismatch {
                detail: format!(
                    "outputs have {} columns, state blocks {}",
                    outputs.ncols(),
                    x_minus.ncols()
                ),
            });
        }
        Ok(DataMatrices {
            x_minus,
            x_plus,
            outputs,
            scenario,
        })
    }

    pub fn x_minus(&self) -> &DMatrix<f64> {
        &self.x_minus
    }

    pub fn x_plus(&self) -> &DMatrix<f64> {
        &self.x_plus
    }

    pub fn outputs(&self) -> &DMatrix<f64> {
        &self.outputs
    }

    pub fn scenario(&self) -> ScenarioTag {
        self.scenario
    }

    pub fn state_dim(&self) -> usize {
        self.x_minus.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.outputs.nrows()
    }

    pub fn samples(&self) -> usize {
        self.x_minus.ncols()
    }
}

/// Per-step attack generation rule on the fixed support.
#[derive(Debug, Clone)]
pub enum AttackStrategy {
    /// Cancel the measurement: `a_i(k) = -y_i(k)`, so attacked outputs read 0.
    Zeroing,
    /// Add a fixed offset per attacked sensor (one entry per support index,
    /// in ascending support order).
    ConstantBias(DVector<f64>),
    /// I.i.d. uniform entries in `[-bound, bound]` from the given seed.
    RandomBounded { bound: f64, seed: u64 },
}

/// Fixed-support sensor attack with budget `l >= |support|`.
#[derive(Debug, Clone)]
pub struct AttackSpec {
    support: Vec<usize>,
    budget: usize,
    strategy: AttackStrategy,
}

impl AttackSpec {
    pub fn new(
        mut support: Vec<usize>,
        budget: usize,
        strategy: AttackStrategy,
    ) -> Result<Self, ModelError> {
        support.sort_unstable();
        support.dedup();
        if support.len() > budget {
            return Err(ModelError::SupportExceedsBudget {
                support: support.len(),
                budget,
            });
        }
        Ok(AttackSpec {
            support,
            budget,
            strategy,
        })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn budget(&self) -> usize {
        self.budget
    }
}

/// Roll out `x(k+1) = A x(k)` for `T >= n` steps from `x0`.
pub fn simulate(sys: &LtiSystem, x0: &DVector<f64>, horizon: usize) -> Result<Trajectory, ModelError> {
    let n = sys.state_dim();
    let q = sys.output_dim();
    if x0.len() != n {
        return Err(ModelError::InitialStateLength {
            got: x0.len(),
            expected: n,
        });
    }
    if horizon < n {
        return Err(ModelError::HorizonTooShort { t: horizon, n });
    }
    let mut states = DMatrix::zeros(n, horizon + 1);
    states.set_column(0, x0);
    for k in 0..horizon {
        let next = sys.a() * states.column(k);
        states.set_column(k + 1, &next);
    }
    let mut nominal_outputs = DMatrix::zeros(q, horizon);
    for k in 0..horizon {
        nominal_outputs.set_column(k, &(sys.c() * states.column(k)));
    }
    Ok(Trajectory {
        states,
        nominal_outputs,
        horizon,
    })
}

/// Apply the attack to a trajectory's nominal outputs. Returns the poisoned
/// output block `Y = Y_nominal + E` and the attack matrix `E`, whose rows
/// outside the support are identically zero.
pub fn inject_attack(
    traj: &Trajectory,
    sys: &LtiSystem,
    spec: &AttackSpec,
) -> Result<(DMatrix<f64>, DMatrix<f64>), ModelError> {
    let q = sys.output_dim();
    let t = traj.horizon();
    for &i in spec.support() {
        if i >= q {
            return Err(ModelError::SensorIndexOutOfRange { index: i, q });
        }
    }
    let mut e = DMatrix::zeros(q, t);
    match &spec.strategy {
        AttackStrategy::Zeroing => {
            for &i in spec.support() {
                for k in 0..t {
                    e[(i, k)] = -traj.nominal_outputs()[(i, k)];
                }
            }
        }
        AttackStrategy::ConstantBias(bias) => {
            if bias.len() != spec.support().len() {
                return Err(ModelError::BiasLengthMismatch {
                    got: bias.len(),
                    expected: spec.support().len(),
                });
            }
            for (slot, &i) in spec.support().iter().enumerate() {
                for k in 0..t {
                    e[(i, k)] = bias[slot];
                }
            }
        }
        AttackStrategy::RandomBounded { bound, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for &i in spec.support() {
                for k in 0..t {
                    e[(i, k)] = rng.random_range(-bound.abs()..=bound.abs());
                }
            }
        }
    }
    let poisoned = traj.nominal_outputs() + &e;
    Ok((poisoned, e))
}

/// Slice a state matrix and output block into `(X^-, X^+, outputs)`.
/// The states must have exactly one more column than the outputs.
pub fn build_data_matrices(
    states: &DMatrix<f64>,
    outputs: &DMatrix<f64>,
    scenario: ScenarioTag,
) -> Result<DataMatrices, ModelError> {
    let t_plus_1 = states.ncols();
    if t_plus_1 != outputs.ncols() + 1 {
        return Err(ModelError::ColumnCountMismatch {
            state_cols: t_plus_1,
            output_cols: outputs.ncols(),
        });
    }
    let t = outputs.ncols();
    Ok(DataMatrices {
        x_minus: states.columns(0, t).into_owned(),
        x_plus: states.columns(1, t).into_owned(),
        outputs: outputs.clone(),
        scenario,
    })
}

/// Linearized pendulum discretized at 0.05 s, with three sensors reading
/// angle, angle + angular velocity, and angular velocity.
pub fn pendulum_system() -> LtiSystem {
    let a = DMatrix::from_row_slice(2, 2, &[0.9878, 0.0498, -0.4880, 0.9878]);
    let c = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
    LtiSystem::new(a, c).expect("hardcoded dimensions are consistent")
}

/// Random system with i.i.d. Gaussian entries, deterministic per seed. The
/// state matrix is normalized to spectral radius one: over long horizons an
/// unnormalized draw grows (or decays) so fast that the slow modes fall below
/// any relative rank cutoff and the trajectory stops carrying full state
/// information in f64. Scaling by a scalar leaves the eigenvectors, and with
/// them every sparse observability quantity, unchanged.
pub fn random_system(n: usize, q: usize, seed: u64) -> LtiSystem {
    assert!(n >= 1 && q >= 1, "system dimensions must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let radius = a
        .complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0_f64, f64::max);
    if radius > f64::EPSILON {
        a /= radius;
    }
    let c = DMatrix::from_fn(q, n, |_, _| rng.sample(StandardNormal));
    LtiSystem::new(a, c).expect("generated dimensions are consistent")
}

/// Seeded standard Gaussian initial state.
pub fn random_initial_state(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}
