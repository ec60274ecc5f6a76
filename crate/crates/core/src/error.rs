use thiserror::Error;

/// Error kinds raised across the library. Each variant maps to a stable code
/// (see [`Error::code`]) used by the CLI envelope and the C interface.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector outside the future cone (q = {q}, z = {z})")]
    ConeViolation { q: f64, z: f64 },
    #[error("matrix is not unimodular (det = {det})")]
    NotUnimodular { det: f64 },
    #[error("Moebius pole: |cm + d| = {modulus}")]
    Pole { modulus: f64 },
    #[error("grid too coarse: angle increment {increment} turns at node {node}")]
    GridTooCoarse { node: usize, increment: f64 },
    #[error("fibered product overflow at k = {k}")]
    Overflow { k: i64 },
    #[error("map has nonzero degree {degree}")]
    NonzeroDegree { degree: i64 },
    #[error("no hyperbolicity: singular value ratio {ratio}")]
    NoHyperbolicity { ratio: f64 },
    #[error("rational truncation at depth {depth}")]
    RationalStop { depth: usize },
    #[error("convergent overflow at depth {depth}")]
    DepthLimit { depth: usize },
    #[error("basis matrix requires k - l even (k = {k}, l = {l})")]
    Parity { k: usize, l: usize },
    #[error("basis change matrix has det {det}")]
    NotUnimodularBasis { det: i64 },
    #[error("continued fraction depth exhausted at k = {k}")]
    DepthExhausted { k: usize },
    #[error("rescaling factor {beta} underflows")]
    Underflow { beta: f64 },
    #[error("action degree not constant (spread {spread})")]
    Nonconstant { spread: f64 },
    #[error("cone escape at node {node} (margin {margin})")]
    ConeEscape { node: usize, margin: f64 },
    #[error("no contraction: residual {residual} after {sweeps} sweeps")]
    NoContraction { residual: f64, sweeps: usize },
    #[error("branch fault at node {node}: jump {jump}")]
    BranchFault { node: usize, jump: f64 },
    #[error("sections collapse: |m+ - m-| = {gap}")]
    SectionCollapse { gap: f64 },
    #[error("small divisor at k = {k} (|divisor| = {divisor})")]
    SmallDivisor { k: i64, divisor: f64 },
    #[error("normal form step too large: N^a |U| = {size} > {eps0}")]
    StepTooLarge { size: f64, eps0: f64 },
    #[error("KAM iteration diverged at step {step}")]
    Diverged { step: usize },
    #[error("resonance hit at k = {k} (|divisor| = {divisor})")]
    ResonanceHit { k: i64, divisor: f64 },
    #[error("nonconstant Fourier mode k = {k} (relative size {size})")]
    NonconstantMode { k: i64, size: f64 },
    #[error("matrix is not elliptic (|trace| = {trace})")]
    NotElliptic { trace: f64 },
    #[error("no sign change found for entry {entry}")]
    NoZeroFound { entry: &'static str },
    #[error("zeros of c and d coincide at {at}")]
    ZerosCoincide { at: f64 },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("command failed: {context}: {source}")]
    CommandFailed { context: String, source: Box<Error> },
}

impl Error {
    /// Stable upper-case code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ConeViolation { .. } => "CONE_VIOLATION",
            Error::NotUnimodular { .. } => "NOT_UNIMODULAR",
            Error::Pole { .. } => "POLE",
            Error::GridTooCoarse { .. } => "GRID_TOO_COARSE",
            Error::Overflow { .. } => "OVERFLOW",
            Error::NonzeroDegree { .. } => "NONZERO_DEGREE",
            Error::NoHyperbolicity { .. } => "NO_HYPERBOLICITY",
            Error::RationalStop { .. } => "RATIONAL_STOP",
            Error::DepthLimit { .. } => "DEPTH_LIMIT",
            Error::Parity { .. } => "PARITY",
            Error::NotUnimodularBasis { .. } => "NOT_UNIMODULAR_BASIS",
            Error::DepthExhausted { .. } => "DEPTH_EXHAUSTED",
            Error::Underflow { .. } => "UNDERFLOW",
            Error::Nonconstant { .. } => "NONCONSTANT",
            Error::ConeEscape { .. } => "CONE_ESCAPE",
            Error::NoContraction { .. } => "NO_CONTRACTION",
            Error::BranchFault { .. } => "BRANCH_FAULT",
            Error::SectionCollapse { .. } => "SECTION_COLLAPSE",
            Error::SmallDivisor { .. } => "SMALL_DIVISOR",
            Error::StepTooLarge { .. } => "STEP_TOO_LARGE",
            Error::Diverged { .. } => "DIVERGED",
            Error::ResonanceHit { .. } => "RESONANCE_HIT",
            Error::NonconstantMode { .. } => "NONCONSTANT",
            Error::NotElliptic { .. } => "NOT_ELLIPTIC",
            Error::NoZeroFound { .. } => "NO_ZERO_FOUND",
            Error::ZerosCoincide { .. } => "ZEROS_COINCIDE",
            Error::ConfigInvalid(_) => "CONFIG_INVALID",
            Error::CommandFailed { .. } => "COMMAND_FAILED",
        }
    }

    pub fn context(self, context: impl Into<String>) -> Error {
        Error::CommandFailed { context: context.into(), source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
