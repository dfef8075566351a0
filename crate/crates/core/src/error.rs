use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transition matrix is not square: {rows} rows, row {row} has {len} entries")]
    NonSquare { rows: usize, row: usize, len: usize },

    #[error("transition matrix entry ({i}, {j}) is {value}, expected 0 or 1")]
    InvalidEntry { i: usize, j: usize, value: u8 },

    #[error("symbol {symbol} has no {side}")]
    EmptyRowOrColumn { symbol: usize, side: &'static str },

    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,

    #[error("edge ({i}, {j}) is outside an alphabet of size {k}")]
    EdgeOutOfRange { i: usize, j: usize, k: usize },

    #[error("integer overflow while counting; use the big-integer variant")]
    Overflow,

    #[error("transition graph is not irreducible")]
    NotIrreducible,

    #[error("transition graph has period {period}; an aperiodic shift is required")]
    NotAperiodic { period: usize },

    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("potential is sized for alphabet {expected}, got {found}")]
    PotentialMismatch { expected: usize, found: usize },

    #[error("roof function must be strictly positive (minimum {min})")]
    NonPositiveRoof { min: f64 },

    #[error("no sign change of the pressure on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("group element kind does not match the group")]
    KindMismatch,

    #[error("generator index {index} out of range (group has {len} generators)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("group ball exceeds the cap of {cap} elements at radius {radius}")]
    BallTooLarge { cap: usize, radius: usize },

    #[error("allowed transition ({i}, {j}) has no label")]
    MissingLabel { i: usize, j: usize },

    #[error("transition ({i}, {j}) is forbidden but carries a label")]
    ExtraLabel { i: usize, j: usize },

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("all trivial-holonomy counts vanish for n in {lo}..={hi}")]
    AllZeroCounts { lo: usize, hi: usize },

    #[error("too few nonzero points for a fit: {found} (need {needed})")]
    TooFewPoints { found: usize, needed: usize },

    #[error("holonomies lie in a closed half-space: {0}")]
    NotFull(String),

    #[error("minimization did not converge: gradient norm {gradient_norm:e} after {iterations} iterations")]
    MinimizationFailed { gradient_norm: f64, iterations: usize },

    #[error("orbit enumeration depth {depth} exceeds the cap {cap}")]
    DepthTooLarge { depth: usize, cap: usize },

    #[error("no trivial-holonomy loops of length {n} (residue class {residue} mod {modulus})")]
    NoOrbits { n: usize, residue: usize, modulus: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
