pub mod annihilate;
pub mod calculus;
pub mod hardy;
pub mod kernel;
pub mod scan;

use clap::ValueEnum;

use crate::config::LabConfig;
use crate::error::LabResult;
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    VerifyKernel,
    ScanReverseRiesz,
    ScanRiesz,
    Hardy,
    Annihilate,
    VerifyCalculus,
}

impl Command {
    pub fn run(self, cfg: &LabConfig) -> LabResult<Report> {
        match self {
            Command::VerifyKernel => kernel::run(cfg),
            Command::ScanReverseRiesz => scan::run(cfg, scan::Direction::Reverse),
            Command::ScanRiesz => scan::run(cfg, scan::Direction::Riesz),
            Command::Hardy => hardy::run(cfg),
            Command::Annihilate => annihilate::run(cfg),
            Command::VerifyCalculus => calculus::run(cfg),
        }
    }
}
