use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("duplicate {kind} `{id}`")]
    Duplicate { kind: &'static str, id: String },

    #[error("invalid {what}: {message}")]
    Invalid { what: &'static str, message: String },

    #[error("{kind} `{value}` claimed by both `{first}` and `{second}`")]
    RegistryOverlap {
        kind: &'static str,
        value: String,
        first: String,
        second: String,
    },

    #[error("mentions {a} and {b} come from the same publication")]
    SamePublication { a: String, b: String },

    #[error("cluster has conflicting orcids: {0:?}")]
    ConflictingOrcids(Vec<String>),

    #[error("no citation cell for year {year}, subject category `{sc}`")]
    MissingCell { year: i32, sc: String },

    #[error("cannot assign a subject category to `{0}`: no publications, no hint, no incidence row")]
    NoSubjectCategory(String),

    #[error("subject category `{0}` has no productive researchers, so no baseline")]
    MissingBaseline(String),

    #[error("unknown subject category `{0}`")]
    UnknownSubjectCategory(String),

    #[error("unknown publication `{0}`")]
    UnknownPublication(String),

    #[error("universities present in only one mode: {0:?}")]
    UnpairedUniversities(Vec<String>),

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(what: &'static str, message: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            message: message.into(),
        }
    }
}
