use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] brokenline::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type LabResult<T> = std::result::Result<T, LabError>;

impl LabError {
    /// 1 contract violation, 2 config or validation error, 3 numerical
    /// failure. Output errors count as config errors (bad `--out`).
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Contract(_) => 1,
            LabError::Config(_) | LabError::Io(_) | LabError::Csv(_) | LabError::Json(_) => 2,
            LabError::Numerical(_) => 3,
        }
    }
}
