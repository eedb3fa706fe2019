//! Logarithm base shared by every log-valued quantity.
//!
//! Values are reported in a single process-wide base, chosen once from
//! `STEIN_LAB_LOG_BASE` (`2` or `e`, default `2`) or by [`set_log_base`]
//! before the first logarithm is taken.

use std::sync::OnceLock;

/// Environment variable selecting the log base.
pub const LOG_BASE_ENV: &str = "STEIN_LAB_LOG_BASE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogBase {
    Two,
    E,
}

impl LogBase {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "2" => Some(LogBase::Two),
            "e" | "E" => Some(LogBase::E),
            _ => None,
        }
    }

    pub fn ln_base(self) -> f64 {
        match self {
            LogBase::Two => std::f64::consts::LN_2,
            LogBase::E => 1.0,
        }
    }

    pub fn log(self, x: f64) -> f64 {
        x.ln() / self.ln_base()
    }

    pub fn exp(self, y: f64) -> f64 {
        (y * self.ln_base()).exp()
    }

    /// Converts a value expressed in nats into this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        nats / self.ln_base()
    }

    pub fn to_nats(self, v: f64) -> f64 {
        v * self.ln_base()
    }

    pub fn unit(self) -> &'static str {
        match self {
            LogBase::Two => "bits",
            LogBase::E => "nats",
        }
    }
}

static BASE: OnceLock<LogBase> = OnceLock::new();

/// The active log base. First call latches the value.
pub fn log_base() -> LogBase {
    *BASE.get_or_init(|| {
        std::env::var(LOG_BASE_ENV)
            .ok()
            .and_then(|s| LogBase::parse(&s))
            .unwrap_or(LogBase::Two)
    })
}

/// Fixes the log base. Fails (returning the latched base) once any
/// logarithm has been evaluated with a different base.
pub fn set_log_base(base: LogBase) -> Result<(), LogBase> {
    let got = *BASE.get_or_init(|| base);
    if got == base {
        Ok(())
    } else {
        Err(got)
    }
}

#[inline]
pub fn log(x: f64) -> f64 {
    log_base().log(x)
}

#[inline]
pub fn exp(y: f64) -> f64 {
    log_base().exp(y)
}

/// Expresses a tolerance given in nats in the active unit.
pub fn nats(v: f64) -> f64 {
    log_base().from_nats(v)
}

pub fn unit() -> &'static str {
    log_base().unit()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bases_round_trip() {
        for b in [LogBase::Two, LogBase::E] {
            for x in [0.125, 1.0, 3.7] {
                assert!((b.exp(b.log(x)) - x).abs() < 1e-12);
            }
            assert!((b.to_nats(b.from_nats(0.7)) - 0.7).abs() < 1e-15);
        }
        assert_eq!(LogBase::Two.log(8.0), 3.0);
        assert!((LogBase::E.log(std::f64::consts::E) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parse_accepts_documented_values() {
        assert_eq!(LogBase::parse("2"), Some(LogBase::Two));
        assert_eq!(LogBase::parse("e"), Some(LogBase::E));
        assert_eq!(LogBase::parse("10"), None);
    }
}
