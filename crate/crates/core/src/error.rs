use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix for sample `{sample_id}` has a zero dimension ({rows}x{cols})")]
    EmptyMatrix {
        sample_id: String,
        rows: usize,
        cols: usize,
    },

    #[error("matrix for sample `{sample_id}` declares {expected} values but holds {actual}")]
    ShapeMismatch {
        sample_id: String,
        expected: usize,
        actual: usize,
    },

    #[error("matrix for sample `{sample_id}` has a non-finite value at row {row}, col {col}")]
    NonFinite {
        sample_id: String,
        row: usize,
        col: usize,
    },

    #[error("matrix of {rows}x{cols} exceeds the oracle limit of {limit} entries")]
    OracleTooLarge {
        rows: usize,
        cols: usize,
        limit: usize,
    },

    #[error("no samples were supplied")]
    EmptyDump,

    #[error("sample id `{0}` appears more than once")]
    DuplicateSample(String),

    #[error("difficulty history has no entry for epoch {0}")]
    MissingEpoch(u32),

    #[error("sample set differs from the previous epoch: {0}")]
    SampleSetMismatch(String),

    #[error("rank {rank} is assigned more than once or lies outside 0..{len}")]
    RankCollision { rank: usize, len: usize },

    #[error("records mix epochs {0} and {1}")]
    MixedEpochs(u32, u32),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot split {len} samples into {bins} bins")]
    TooManyBins { bins: usize, len: usize },

    #[error("token id {id} is outside a vocabulary of {vocab_size}")]
    TokenOutOfRange { id: u32, vocab_size: usize },

    #[error("empty token sequence for sample `{0}`")]
    EmptySequence(String),

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("plan references unknown sample `{0}`")]
    MissingSample(String),

    #[error("label matrices differ in shape: {left:?} vs {right:?}")]
    LabelShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("label value {value} at position {position} is not binary")]
    NonBinaryLabel { value: u8, position: usize },

    #[error("cannot form {groups} label groups from {labels} labels")]
    TooManyGroups { groups: usize, labels: usize },

    #[error("label groups do not partition the label set: {0}")]
    InvalidGroups(String),
}
