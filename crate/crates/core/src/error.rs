use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("series too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("class {class} has {rows} rows, too few for a stratified split at fraction {fraction}")]
    ClassTooSmall {
        class: &'static str,
        rows: usize,
        fraction: f64,
    },

    #[error("feature vector has {got} entries, expected {expected}")]
    WrongWidth { expected: usize, got: usize },

    #[error("no contact: summed tactile maximum is not positive")]
    NoContact,

    #[error("model schema version {found} is not supported (expected {expected})")]
    SchemaVersion { expected: u32, found: u32 },

    #[error("model and feature layout disagree: {0}")]
    SchemaMismatch(String),

    #[error("SVM did not converge for class {class} after {iterations} iterations (violation {violation:.3e})")]
    SvmNotConverged {
        class: usize,
        iterations: usize,
        violation: f64,
    },

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },

    #[error("too few non-constant features for PCA; constant features: {constant:?}")]
    DegeneratePca { constant: Vec<String> },

    #[error("missing terrain signature for {0}")]
    MissingTerrain(&'static str),

    #[error("unknown terrain label {0:?}")]
    UnknownLabel(String),
}
