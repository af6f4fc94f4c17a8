use std::fmt;

use camox::ingest::IngestError;
use camox::metrics::MetricsError;
use camox::nn::NnError;
use camox::pipeline::PipelineError;
use camox::synth::SynthError;

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    /// Bad flags, invalid configuration, or a precondition the user can fix.
    Usage = 2,
    /// Input data missing, unreadable or malformed.
    Data = 3,
    /// An internal assertion failed (e.g. train/test leakage).
    Internal = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            exit: Exit::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            exit: Exit::Data,
            message: message.into(),
        }
    }

    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn ingest_exit(e: &IngestError) -> Exit {
    match e {
        IngestError::TooFewSubjects { .. } => Exit::Usage,
        _ => Exit::Data,
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError {
            exit: ingest_exit(&e),
            message: e.to_string(),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        let exit = match &e {
            SynthError::Io { .. } => Exit::Data,
            SynthError::Ingest(i) => ingest_exit(i),
            _ => Exit::Usage,
        };
        CliError {
            exit,
            message: e.to_string(),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let exit = match e.root() {
            PipelineError::InvalidConfig(_) => Exit::Usage,
            PipelineError::EmptyRole { .. } | PipelineError::Csv { .. } => Exit::Data,
            PipelineError::Leakage { .. } | PipelineError::Nn(_) => Exit::Internal,
            PipelineError::Ingest(i) => ingest_exit(i),
            PipelineError::Split { .. } => Exit::Internal,
        };
        CliError {
            exit,
            message: e.to_string(),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        let exit = match &e {
            MetricsError::InvalidThreshold(_) => Exit::Usage,
            _ => Exit::Data,
        };
        CliError {
            exit,
            message: e.to_string(),
        }
    }
}

impl From<NnError> for CliError {
    fn from(e: NnError) -> Self {
        let exit = match &e {
            NnError::Io(_) => Exit::Data,
            _ => Exit::Internal,
        };
        CliError {
            exit,
            message: e.to_string(),
        }
    }
}
