use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("row {row}: unknown split tag {tag:?}")]
    UnknownSplit { row: usize, tag: String },

    #[error("dataset header: {0}")]
    Header(String),

    #[error("invalid spectral range {start}..{end}")]
    InvalidRange { start: usize, end: usize },

    #[error("range {start}..{end} exceeds spectrum length {len}")]
    RangeOutOfBounds { start: usize, end: usize, len: usize },

    #[error("order index {k} out of bounds for width {width}")]
    OrderIndex { k: usize, width: usize },

    #[error("invalid classifier: {0}")]
    InvalidClassifier(String),

    #[error("pair task needs two distinct classes, got {0:?} twice")]
    SamePair(String),

    #[error("class {label:?} has no samples in the {split} split")]
    EmptyClass { label: String, split: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("infeasible initial weights for {class}: {reason}")]
    Infeasible { class: String, reason: String },

    #[error("within-class scatter is singular after regularization")]
    SingularScatter,

    #[error("wav: {0}")]
    Wav(String),

    #[error("unsupported WAV format tag {tag:#06x}{}", describe_tag(*.tag))]
    WavFormatTag { tag: u16 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("netlist: {0}")]
    Netlist(String),
}

fn describe_tag(tag: u16) -> String {
    let name = match tag {
        0x0002 => "ADPCM",
        0x0003 => "IEEE float",
        0x0006 => "A-law",
        0x0007 => "mu-law",
        0x0055 => "MPEG layer 3",
        _ => return String::new(),
    };
    format!(" ({name})")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
