//! Loading JSON inputs with located error messages.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::CliError;

/// Byte offset of a 1-based (line, column) position.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

pub fn parse_str<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        if inner.line() == 0 {
            return CliError::Parse(format!("{origin}: at `{path}`: {inner}"));
        }
        let offset = byte_offset(text, inner.line(), inner.column());
        CliError::Parse(format!(
            "{origin}: at `{path}` (byte {offset}, line {}, column {}): {inner}",
            inner.line(),
            inner.column()
        ))
    })?;
    Ok(value)
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_str(&text, &path.display().to_string())
}

/// Parses `1000`, `1e6` or `2.5e3` as a positive integer.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 {
        Ok(x as u64)
    } else {
        Err(format!("`{s}` is not a nonnegative integer"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use multerg::pretend::FgMultFunction;

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("250"), Ok(250));
        assert!(parse_count("1.5").is_err());
    }

    #[test]
    fn errors_carry_path_and_offset() {
        let text = "{\"classes\":[{\"spec\":{\"type\":\"default\"},\n\"phase\":{\"type\":\"rational\",\"num\":1,\"den\":\"x\"}}]}";
        let err = parse_str::<FgMultFunction>(text, "f.json").unwrap_err().to_string();
        assert!(err.contains("classes[0].phase"), "{err}");
        assert!(err.contains("line 2"), "{err}");
        assert!(err.contains("byte"), "{err}");
    }
}
