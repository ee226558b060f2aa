use std::fmt;
use std::path::Path;

use fxgame::engine::EngineError;
use fxgame::ingest::IngestError;
use fxgame::ohlc::OhlcError;
use fxgame::report::ReportError;

/// Input could not be parsed.
pub const EXIT_PARSE: u8 = 2;
/// Input parsed but violates a precondition.
pub const EXIT_PRECONDITION: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        CliError::new(EXIT_PRECONDITION, message)
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::new(EXIT_IO, format!("{}: {err}", path.display()))
    }

    /// Prefixes the message with the file it came from.
    pub fn in_file(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn csv_code(err: &csv::Error) -> u8 {
    if err.is_io_error() {
        EXIT_IO
    } else {
        EXIT_PARSE
    }
}

impl From<EngineError> for CliError {
    fn from(err: EngineError) -> Self {
        let code = match &err {
            EngineError::InvalidAppetite(_)
            | EngineError::InvalidPrice(_)
            | EngineError::InvalidDirection(_)
            | EngineError::Malformed { .. } => EXIT_PARSE,
            EngineError::InvalidConfig(_)
            | EngineError::NonPositivePrice { .. }
            | EngineError::SourceExhausted(_)
            | EngineError::OffGrid { .. } => EXIT_PRECONDITION,
            EngineError::Csv(e) => csv_code(e),
            EngineError::Io(_) => EXIT_IO,
        };
        CliError::new(code, err.to_string())
    }
}

impl From<OhlcError> for CliError {
    fn from(err: OhlcError) -> Self {
        let code = match &err {
            OhlcError::Malformed { .. } | OhlcError::InvalidBar { .. } => EXIT_PARSE,
            OhlcError::ZeroInterval | OhlcError::ZeroDeviation => EXIT_PRECONDITION,
            OhlcError::Csv(e) => csv_code(e),
        };
        CliError::new(code, err.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(err: IngestError) -> Self {
        let code = match &err {
            IngestError::EmptyBatchRequest | IngestError::InsufficientRows { .. } => EXIT_PRECONDITION,
            IngestError::Csv(e) => csv_code(e),
            _ => EXIT_PARSE,
        };
        CliError::new(code, err.to_string())
    }
}

impl From<ReportError> for CliError {
    fn from(err: ReportError) -> Self {
        let code = match &err {
            ReportError::Csv(e) => csv_code(e),
            ReportError::Json(_) => EXIT_PARSE,
            _ => EXIT_PRECONDITION,
        };
        CliError::new(code, err.to_string())
    }
}
