use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 8")]
    InvalidGridSize(usize),
    #[error("grid length must be positive and finite, got {0}")]
    InvalidGridLength(f64),
    #[error("frequency modulus must be non-negative, got {0}")]
    NegativeFrequency(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("Friedrichs index must be at least 1")]
    ZeroFriedrichsIndex,
    #[error("negative power Lambda^{0} requested on a field with nonzero mean {1}")]
    MeanWithNegativePower(f64, f64),
    #[error("{0} must be mean-free, found mean {1}")]
    NonzeroMean(&'static str, f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),
    #[error("accumulator holds no snapshots")]
    EmptyAccumulator,
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("exponent relation violated: {0}")]
    ExponentRelation(String),
    #[error("coupling constant K = {k} is outside the admissible window (0, {bound})")]
    InadmissibleCoupling { k: f64, bound: f64 },
    #[error("band {band} does not belong to the {regime} regime")]
    RegimeMismatch { band: i32, regime: &'static str },
    #[error("band {0} carries no energy")]
    ZeroBandEnergy(i32),
    #[error("time {t} outside trajectory span [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("propagator was built for different parameters or step")]
    PropagatorMismatch,
    #[error("step {dt} violates the CFL guard (limit {limit})")]
    CflViolation { dt: f64, limit: f64 },
    #[error("blow-up at t = {time}: {reason}")]
    BlowUp { time: f64, reason: String },
}
