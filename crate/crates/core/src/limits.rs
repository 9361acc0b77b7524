//! Capacity limits shared by enumeration, contraction and cover averaging.

use crate::error::{NfgError, Result};

pub const ENV_VAR: &str = "BETHE_COVER_LIMITS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of configurations visited by brute-force sums.
    pub enumeration: u64,
    /// Maximum number of entries in any intermediate contraction tensor.
    pub contraction: usize,
    /// Maximum number of covers averaged by the exhaustive method.
    pub covers: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            enumeration: 1 << 24,
            contraction: 1 << 26,
            covers: 100_000,
        }
    }
}

impl Limits {
    /// Parses overrides such as `enumeration=1000,covers=50`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut out = Self::default();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                NfgError::InvalidArgument(format!("limit override `{part}` is not key=value"))
            })?;
            let n: u64 = value.trim().parse().map_err(|_| {
                NfgError::InvalidArgument(format!("limit `{key}` has non-integer value `{value}`"))
            })?;
            match key.trim() {
                "enumeration" => out.enumeration = n,
                "contraction" => out.contraction = n as usize,
                "covers" => out.covers = n,
                other => {
                    return Err(NfgError::InvalidArgument(format!(
                        "unknown limit `{other}` (expected enumeration, contraction or covers)"
                    )))
                }
            }
        }
        Ok(out)
    }

    /// Defaults overridden by the environment variable, if set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(ENV_VAR) {
            Ok(s) => Self::parse(&s),
            Err(_) => Ok(Self::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_overrides() {
        let l = Limits::parse("enumeration=10, covers=5").unwrap();
        assert_eq!(l.enumeration, 10);
        assert_eq!(l.covers, 5);
        assert_eq!(l.contraction, Limits::default().contraction);
        assert!(Limits::parse("bogus=1").is_err());
        assert!(Limits::parse("covers=x").is_err());
    }
}
