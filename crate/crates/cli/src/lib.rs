//! Command-line front end: JSON input documents, the single-shot
//! commands and the reproduction pipeline.

pub mod commands;
pub mod input;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed input: exit code 2.
    #[error("{0}")]
    Input(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// A computation failed: exit code 1.
    #[error(transparent)]
    Core(#[from] bbmkdv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Core(_) => 1,
        }
    }
}

/// Parses `r,deg`.
pub fn parse_rung(s: &str) -> Result<(usize, usize), String> {
    let (r, d) = s.split_once(',').ok_or_else(|| format!("expected `r,deg`, got `{s}`"))?;
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    Ok((num(r)?, num(d)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rungs_parse() {
        assert_eq!(parse_rung("2, 1"), Ok((2, 1)));
        assert!(parse_rung("2").is_err());
        assert!(parse_rung("a,1").is_err());
    }
}
