use thiserror::Error;

use crate::kinetics::{Family, GateId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gate {gate:?} has no {expected} form in the {family:?} family")]
    InvalidGate {
        family: Family,
        gate: GateId,
        expected: &'static str,
    },

    #[error("temperature {0} °C outside the supported range (0, 50)")]
    TemperatureOutOfRange(f64),

    #[error("unknown cell id {0} (expected 1..=10)")]
    UnknownCell(u32),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration produced a non-finite state at t = {t_ms} ms")]
    IntegrationFailure { t_ms: f64 },

    #[error("no spikes in the analysis window; per-spike quantities are undefined")]
    NoSpikes,

    #[error("{0} is zero; ratio undefined")]
    ZeroDenominator(&'static str),
}
