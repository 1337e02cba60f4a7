use crate::error::{Error, Result};
use std::sync::atomic::{AtomicU8, Ordering};

/// Floating mode for polynomial and exponential-polynomial evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Double,
    /// Compensated Horner and summation, roughly doubling the working digits.
    Extended,
}

static MODE: AtomicU8 = AtomicU8::new(0);

pub fn precision() -> Precision {
    match MODE.load(Ordering::Relaxed) {
        1 => Precision::Extended,
        _ => Precision::Double,
    }
}

pub fn set_precision(p: Precision) {
    MODE.store(matches!(p, Precision::Extended) as u8, Ordering::Relaxed);
}

impl std::str::FromStr for Precision {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(Error::Config(format!("unknown precision mode `{other}`"))),
        }
    }
}

/// Reads `NEVLAB_PRECISION`; unset means double.
pub fn precision_from_env() -> Result<Precision> {
    match std::env::var("NEVLAB_PRECISION") {
        Ok(v) => v.parse(),
        Err(_) => Ok(Precision::Double),
    }
}
