use std::fmt;
use std::str::FromStr;

use super::InvalidCommand;

/// A decimal number carried as its original text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decimal(String);

impl Decimal {
    /// Accepts `[+-]?(d+[.d*]|.d+)([eE][+-]?d+)?`.
    pub fn new(text: &str) -> Result<Self, InvalidCommand> {
        if is_decimal(text) {
            Ok(Self(text.to_string()))
        } else {
            Err(InvalidCommand::Decimal(text.to_string()))
        }
    }

    /// Shortest text that parses back to exactly `v`. `None` for NaN/inf.
    pub fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then(|| Self(format!("{v}")))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        // grammar is a subset of what f64::from_str accepts
        self.0.parse().unwrap_or(f64::NAN)
    }

    /// Conversion to any `FromStr` scalar (`f32`, `f64`, integers).
    pub fn parse<T: FromStr>(&self) -> Option<T> {
        self.0.parse().ok()
    }

    pub(crate) fn from_unchecked(text: &str) -> Self {
        Self(text.to_string())
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_decimal(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let int_digits = i - int_start;
    let mut frac_digits = 0;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let s = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        frac_digits = i - s;
    }
    if int_digits + frac_digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let s = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == s {
            return false;
        }
    }
    i == b.len()
}

pub(crate) fn is_integer(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// Characters that terminate or delimit an unquoted token.
pub(crate) fn is_token_delim(c: char) -> bool {
    c == ',' || c == '{' || c == '}' || c == '"' || c == ' ' || c == '\t' || c == '\r' || c == '\n'
}

/// One argument of a command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScpiValue {
    Integer(i64),
    /// A non-integral (or out-of-`i64`-range) number, text preserved.
    Decimal(Decimal),
    /// Bare token such as `BURST`, `NOW` or a file path. Case preserved.
    Keyword(String),
    /// Double-quoted string; `"` is escaped by doubling.
    Text(String),
    /// Comma-separated decimal list, e.g. a waveform upload.
    Array(Vec<Decimal>),
}

impl ScpiValue {
    pub fn keyword(k: &str) -> Self {
        Self::Keyword(k.to_string())
    }

    pub(crate) fn is_numeric_scalar(&self) -> bool {
        matches!(self, Self::Integer(_) | Self::Decimal(_))
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Self::Integer(v) => Some(*v),
            _ => None,
        }
    }

    /// Numeric value of an integer or decimal argument.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Self::Integer(v) => Some(*v as f64),
            Self::Decimal(d) => Some(d.to_f64()),
            _ => None,
        }
    }

    /// Keyword or quoted text content.
    pub fn as_text(&self) -> Option<&str> {
        match self {
            Self::Keyword(k) | Self::Text(k) => Some(k),
            _ => None,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), InvalidCommand> {
        match self {
            Self::Integer(_) => Ok(()),
            Self::Decimal(d) => {
                if !is_decimal(d.as_str()) {
                    Err(InvalidCommand::Decimal(d.0.clone()))
                } else if is_integer(d.as_str()) && d.as_str().parse::<i64>().is_ok() {
                    Err(InvalidCommand::IntegerAsDecimal(d.0.clone()))
                } else {
                    Ok(())
                }
            }
            Self::Keyword(k) => {
                if k.is_empty() || k.chars().any(is_token_delim) || is_decimal(k) || k.chars().any(char::is_control) {
                    Err(InvalidCommand::Keyword(k.clone()))
                } else {
                    Ok(())
                }
            }
            Self::Text(t) => {
                if t.contains(['\r', '\n']) {
                    Err(InvalidCommand::TextLineBreak)
                } else {
                    Ok(())
                }
            }
            Self::Array(items) => items
                .iter()
                .find(|d| !is_decimal(d.as_str()))
                .map_or(Ok(()), |d| Err(InvalidCommand::Decimal(d.0.clone()))),
        }
    }

    /// `sole` marks the only argument of a command; a sole array of two or
    /// more elements is written without braces.
    pub(crate) fn write_into(&self, out: &mut String, sole: bool) {
        match self {
            Self::Integer(v) => out.push_str(&v.to_string()),
            Self::Decimal(d) => out.push_str(d.as_str()),
            Self::Keyword(k) => out.push_str(k),
            Self::Text(t) => {
                out.push('"');
                out.push_str(&t.replace('"', "\"\""));
                out.push('"');
            }
            Self::Array(items) => {
                let braced = !(sole && items.len() >= 2);
                if braced {
                    out.push('{');
                }
                for (i, d) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(d.as_str());
                }
                if braced {
                    out.push('}');
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_grammar() {
        for ok in ["0", "-0.5", "+.25", "1.", "1e3", "2.5E-07", "007"] {
            assert!(is_decimal(ok), "{ok}");
        }
        for bad in ["", ".", "-", "e5", "1e", "1.2.3", "NaN", "inf", "0x10", "1 "] {
            assert!(!is_decimal(bad), "{bad}");
        }
    }

    #[test]
    fn decimal_from_f64_is_exact() {
        for v in [0.1, -1.0 / 3.0, 1.0e-300, 6.02e23, 8191.0 / 8192.0] {
            assert_eq!(Decimal::from_f64(v).unwrap().to_f64(), v);
        }
        assert!(Decimal::from_f64(f64::NAN).is_none());
    }
}
