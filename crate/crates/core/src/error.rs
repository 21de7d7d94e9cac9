use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value {value} at {location}")]
    NonFinite { location: String, value: f64 },

    #[error("integration diverged at t = {time}")]
    Diverged { time: f64 },

    #[error("particle {index}: {source}")]
    Particle {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("time {time} outside the horizon [{t0}, {t_end}]")]
    OutOfHorizon { time: f64, t0: f64, t_end: f64 },

    #[error("CFL condition violated: dt = {dt} exceeds the admissible step {admissible}")]
    Cfl { dt: f64, admissible: f64 },

    #[error("degenerate horizon: c1(T)·c2(T) = {0:e} is too small to invert")]
    DegenerateHorizon(f64),

    #[error("system not controllable: Gramian condition estimate {condition:e}")]
    Uncontrollable { condition: f64 },

    #[error("kernel matrix ill-conditioned (condition estimate {condition:e}) beyond the jitter ceiling")]
    IllConditioned { condition: f64 },

    #[error("duplicate surrogate nodes at indices {first} and {second}")]
    DuplicateNodes { first: usize, second: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("non-finite gradient at iterate {iteration}")]
    NonFiniteGradient { iteration: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("failed to parse configuration: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
