use thiserror::Error;

use tafi_core::bench::BenchError;
use tafi_core::interp::InterpError;
use tafi_core::media::MediaError;
use tafi_core::tafi::TafiError;
use tafi_core::texclass::TexClassError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Tafi(#[from] TafiError),
    #[error(transparent)]
    Media(#[from] MediaError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Classifier(#[from] TexClassError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for failures of the external quality tool, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Bench(e) if e.is_external() => 2,
            _ => 1,
        }
    }
}
