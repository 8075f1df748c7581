use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image {image:?} is not a bijection on 0..{n}")]
    NotABijection { image: Vec<usize>, n: usize },

    #[error("permutation acts on {got} points, expected {expected}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("group closure exceeded the cap of {cap} elements")]
    ClosureCapExceeded { cap: usize },

    #[error("{what} = {value} exceeds the configured cap of {cap}")]
    CapExceeded {
        what: &'static str,
        value: u128,
        cap: usize,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("action is not transitive: point {unreachable} is unreachable from point {base}")]
    NotTransitive { base: usize, unreachable: usize },

    #[error("tuple space of size {size} exceeds the cap of {cap}")]
    TupleSpaceCapExceeded { size: u128, cap: usize },

    #[error("Burnside sum {sum} is not divisible by the group order {order}")]
    NonIntegerBurnside { sum: u128, order: usize },

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("unknown orbit id {0}")]
    UnknownOrbit(usize),

    #[error("the two tensors coincide; the kernel fraction is undefined")]
    ZeroDifference,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("epsilon {epsilon} must exceed delta {delta}")]
    EpsilonNotAboveDelta { epsilon: f64, delta: f64 },

    #[error("at least two points are required, got k = {0}")]
    DegenerateK(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("points {0} and {1} are identical")]
    DuplicatePoints(usize, usize),

    #[error("points {0} and {1} share an invariant vector")]
    NotDiscriminable(usize, usize),

    #[error("at least two representatives are required, got {0}")]
    TooFewPoints(usize),

    #[error("degenerate scale ladder: {0}")]
    DegenerateLadder(String),

    #[error("bispectrum paths disagree at ({k1}, {k2}): relative error {rel_err:e}")]
    FactorizationMismatch { k1: usize, k2: usize, rel_err: f64 },

    #[error(
        "invertibility condition fails at frequency {k}: |z(k)| = {magnitude:e} <= {tolerance:e}"
    )]
    ConditionViolated {
        k: usize,
        magnitude: f64,
        tolerance: f64,
    },

    #[error("inconsistent bispectrum: squared magnitude at frequency {k} is {value:e}")]
    NegativeMagnitude { k: usize, value: f64 },

    #[error("store group hash {found} does not match configuration hash {expected}")]
    GroupHashMismatch { expected: String, found: String },

    #[error("sketch store is empty")]
    EmptyStore,

    #[error("store is locked by {0}")]
    StoreLocked(PathBuf),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
