use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a rational number: {0:?}")]
    Rational(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("malformed timed word: {0}")]
    Word(String),

    #[error("guard violated by {action} for car {car}: {state}")]
    Guard {
        car: String,
        action: String,
        state: String,
    },

    #[error("negative delay {0}")]
    NegativeDelay(String),

    #[error("time {time} outside timespan [0, {end}]")]
    OutsideTimespan { time: String, end: String },

    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("the end marker has no independence classification")]
    EndMarker,

    #[error("separation assumption violated: {0}")]
    Separation(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("witness replay failed: {0}")]
    Replay(String),

    #[error("unknown checker `{0}`")]
    UnknownChecker(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
