//! Line-oriented SCPI dialect spoken between the experiment client and the
//! instrument emulator.
//!
//! Messages are single `\r\n`-terminated lines: a colon-separated header,
//! an optional trailing `?` marking a query, then comma-separated arguments.
//! Numbers travel as text until the consuming layer converts them, so a
//! waveform upload survives parse/serialize unchanged. There is one
//! canonical spelling per header; long/short SCPI forms are not modelled and
//! `;` command chaining is not supported.

mod parse;
mod value;

pub use parse::{parse_buffer_response, parse_buffer_values, parse_message, parse_message_bytes};
pub use value::{Decimal, ScpiValue};

use std::fmt;

use thiserror::Error;

/// Line terminator used for both directions.
pub const TERMINATOR: &str = "\r\n";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty message")]
    Empty,
    #[error("malformed header")]
    MalformedHeader,
    #[error("channel suffix out of range")]
    SuffixOverflow,
    #[error("unexpected character {0:?}")]
    Unexpected(char),
    #[error("unbalanced braces")]
    UnbalancedBraces,
    #[error("empty element")]
    EmptyElement,
    #[error("non-numeric array element")]
    NonNumeric,
    #[error("unterminated string")]
    UnterminatedString,
    #[error("invalid UTF-8")]
    InvalidUtf8,
}

impl ParseError {
    pub(crate) fn new(offset: usize, kind: ParseErrorKind) -> Self {
        Self { offset, kind }
    }
}

/// Reasons a hand-built command or value is not in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidCommand {
    #[error("empty header path")]
    EmptyPath,
    #[error("invalid mnemonic {0:?}")]
    Mnemonic(String),
    #[error("common command {0:?} must be the only header token")]
    CommonNotAlone(String),
    #[error("invalid decimal {0:?}")]
    Decimal(String),
    #[error("invalid keyword {0:?}")]
    Keyword(String),
    #[error("text argument contains a line break")]
    TextLineBreak,
    #[error("integer-valued decimal {0:?} must be an integer argument")]
    IntegerAsDecimal(String),
    #[error("numeric argument lists must be carried as one array")]
    LooseNumericList,
}

/// One header token, e.g. `SOUR1` = name `SOUR`, channel suffix 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mnemonic {
    name: String,
    suffix: Option<u32>,
}

impl Mnemonic {
    /// Builds a token; the name is upper-cased. Names are letters followed
    /// by letters/digits and may not end in a digit (that would be read as a
    /// suffix). Common commands are spelled with a leading `*`.
    pub fn new(name: &str, suffix: Option<u32>) -> Result<Self, InvalidCommand> {
        let upper = name.to_ascii_uppercase();
        let ok = if let Some(rest) = upper.strip_prefix('*') {
            !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_uppercase()) && suffix.is_none()
        } else {
            let mut bytes = upper.bytes();
            matches!(bytes.next(), Some(b) if b.is_ascii_uppercase())
                && upper.bytes().all(|b| b.is_ascii_uppercase() || b.is_ascii_digit())
                && !upper.ends_with(|c: char| c.is_ascii_digit())
        };
        if ok {
            Ok(Self { name: upper, suffix })
        } else {
            Err(InvalidCommand::Mnemonic(name.to_string()))
        }
    }

    pub fn plain(name: &str) -> Self {
        Self::new(name, None).expect("static mnemonic")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn suffix(&self) -> Option<u32> {
        self.suffix
    }

    pub fn is_common(&self) -> bool {
        self.name.starts_with('*')
    }

    pub(crate) fn from_parts_unchecked(name: String, suffix: Option<u32>) -> Self {
        Self { name, suffix }
    }
}

impl fmt::Display for Mnemonic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(s) = self.suffix {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// A parsed message: header path, query flag and argument list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScpiCommand {
    path: Vec<Mnemonic>,
    query: bool,
    args: Vec<ScpiValue>,
}

impl ScpiCommand {
    /// Builds a command and checks that it is in canonical form, i.e. that
    /// serializing and re-parsing it yields the same structure.
    pub fn new(path: Vec<Mnemonic>, query: bool, args: Vec<ScpiValue>) -> Result<Self, InvalidCommand> {
        let cmd = Self { path, query, args };
        cmd.validate()?;
        Ok(cmd)
    }

    pub(crate) fn from_parts_unchecked(path: Vec<Mnemonic>, query: bool, args: Vec<ScpiValue>) -> Self {
        Self { path, query, args }
    }

    /// Convenience constructor from a header string such as `ACQ:SOUR1:DATA`.
    pub fn build(header: &str, query: bool, args: Vec<ScpiValue>) -> Result<Self, InvalidCommand> {
        let mut path = Vec::new();
        for tok in header.trim_start_matches(':').split(':') {
            let digits = tok.len() - tok.trim_end_matches(|c: char| c.is_ascii_digit()).len();
            let (name, suffix) = tok.split_at(tok.len() - digits);
            let suffix = if digits == 0 || name.is_empty() {
                None
            } else {
                Some(suffix.parse().map_err(|_| InvalidCommand::Mnemonic(tok.to_string()))?)
            };
            let name = if name.is_empty() { tok } else { name };
            path.push(Mnemonic::new(name, suffix)?);
        }
        Self::new(path, query, args)
    }

    pub fn path(&self) -> &[Mnemonic] {
        &self.path
    }

    pub fn is_query(&self) -> bool {
        self.query
    }

    pub fn args(&self) -> &[ScpiValue] {
        &self.args
    }

    /// Header names joined with `:`, suffixes dropped. Used for dispatch.
    pub fn header_key(&self) -> String {
        self.path.iter().map(Mnemonic::name).collect::<Vec<_>>().join(":")
    }

    pub fn validate(&self) -> Result<(), InvalidCommand> {
        if self.path.is_empty() {
            return Err(InvalidCommand::EmptyPath);
        }
        for m in &self.path {
            let again = Mnemonic::new(&m.name, m.suffix)?;
            if again.name != m.name {
                return Err(InvalidCommand::Mnemonic(m.name.clone()));
            }
            if m.is_common() && self.path.len() != 1 {
                return Err(InvalidCommand::CommonNotAlone(m.name.clone()));
            }
        }
        for a in &self.args {
            a.validate()?;
        }
        if self.args.len() >= 2 && self.args.iter().all(ScpiValue::is_numeric_scalar) {
            return Err(InvalidCommand::LooseNumericList);
        }
        Ok(())
    }

    /// Canonical wire text, without terminator.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (i, m) in self.path.iter().enumerate() {
            if i > 0 {
                out.push(':');
            }
            out.push_str(&m.to_string());
        }
        if self.query {
            out.push('?');
        }
        if !self.args.is_empty() {
            out.push(' ');
            let sole = self.args.len() == 1;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                a.write_into(&mut out, sole);
            }
        }
        out
    }
}

impl fmt::Display for ScpiCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

/// Serializes a command to its canonical text form.
pub fn serialize_command(cmd: &ScpiCommand) -> String {
    cmd.serialize()
}

/// Brace-delimited array text `{v1,v2,...}` for a list of decimals.
pub fn serialize_array(values: &[Decimal]) -> String {
    let mut out = String::with_capacity(values.len() * 8 + 2);
    out.push('{');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(v.as_str());
    }
    out.push('}');
    out
}

/// Brace-delimited array of finite floats, written in shortest round-trip form.
pub fn serialize_f64_array(values: &[f64]) -> String {
    use std::fmt::Write;
    let mut out = String::with_capacity(values.len() * 12 + 2);
    out.push('{');
    for (i, v) in values.iter().enumerate() {
        debug_assert!(v.is_finite());
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v}");
    }
    out.push('}');
    out
}

/// One response line (payload only; see [`ScpiResponse::to_wire`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScpiResponse {
    payload: String,
}

impl ScpiResponse {
    /// Acknowledgement for a successful set-command.
    pub fn ok() -> Self {
        Self { payload: "OK".into() }
    }

    pub fn value(v: impl Into<String>) -> Self {
        let payload: String = v.into();
        debug_assert!(!payload.contains(['\r', '\n']));
        Self { payload }
    }

    pub fn array(values: &[f64]) -> Self {
        Self { payload: serialize_f64_array(values) }
    }

    pub fn error(code: i32, message: &str) -> Self {
        let message: String = message.chars().map(|c| if c.is_control() { ' ' } else { c }).collect();
        Self { payload: format!("ERR:{code},{message}") }
    }

    pub fn payload(&self) -> &str {
        &self.payload
    }

    pub fn is_error(&self) -> bool {
        self.payload.starts_with("ERR:")
    }

    pub fn to_wire(&self) -> String {
        format!("{}{TERMINATOR}", self.payload)
    }

    /// Splits an error payload into `(code, message)`.
    pub fn error_parts(payload: &str) -> Option<(i32, &str)> {
        let rest = payload.strip_prefix("ERR:")?;
        let (code, msg) = rest.split_once(',')?;
        Some((code.parse().ok()?, msg))
    }
}

impl fmt::Display for ScpiResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.payload)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec(s: &str) -> Decimal {
        Decimal::new(s).unwrap()
    }

    #[test]
    fn serializes_minimal_set_and_query() {
        let start = ScpiCommand::build("ACQ:START", false, vec![]).unwrap();
        assert_eq!(serialize_command(&start), "ACQ:START");
        let read = ScpiCommand::build("ACQ:SOUR2:DATA", true, vec![]).unwrap();
        assert_eq!(serialize_command(&read), "ACQ:SOUR2:DATA?");
        assert_eq!(read.path()[1].suffix(), Some(2));
    }

    #[test]
    fn sole_array_is_written_unbraced() {
        let cmd =
            ScpiCommand::build("SOUR1:TRAC:DATA:DATA", false, vec![ScpiValue::Array(vec![dec("0.7"), dec("0.70004")])])
                .unwrap();
        assert_eq!(cmd.serialize(), "SOUR1:TRAC:DATA:DATA 0.7,0.70004");
        let single = ScpiCommand::build("X", false, vec![ScpiValue::Array(vec![dec("1")])]).unwrap();
        assert_eq!(single.serialize(), "X {1}");
    }

    #[test]
    fn rejects_non_canonical_commands() {
        assert_eq!(
            ScpiCommand::build("A", false, vec![ScpiValue::Integer(1), ScpiValue::Integer(2)]),
            Err(InvalidCommand::LooseNumericList)
        );
        assert!(Mnemonic::new("SOUR1", None).is_err());
        assert!(Mnemonic::new("1ABC", None).is_err());
        assert!(ScpiCommand::build("*IDN:X", true, vec![]).is_err());
        assert!(ScpiCommand::new(vec![], false, vec![]).is_err());
    }

    #[test]
    fn response_framing() {
        assert_eq!(ScpiResponse::array(&[0.0, -0.5, 0.25]).to_wire(), "{0,-0.5,0.25}\r\n");
        let e = ScpiResponse::error(-113, "undefined\nheader");
        assert_eq!(e.payload(), "ERR:-113,undefined header");
        assert_eq!(ScpiResponse::error_parts(e.payload()), Some((-113, "undefined header")));
        assert!(ScpiResponse::ok().payload() == "OK");
    }
}
