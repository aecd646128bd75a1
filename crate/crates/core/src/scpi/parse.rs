use super::value::{is_decimal, is_integer, is_token_delim};
use super::{Decimal, Mnemonic, ParseError, ParseErrorKind as Kind, ScpiCommand, ScpiValue};

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn err(&self, kind: Kind) -> ParseError {
        ParseError::new(self.pos, kind)
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(c) => self.err(Kind::Unexpected(c)),
            None => self.err(Kind::MalformedHeader),
        }
    }
}

/// Parses one message (without its terminator; a trailing `\r` is tolerated).
pub fn parse_message(line: &str) -> Result<ScpiCommand, ParseError> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let mut cur = Cursor { src: line, pos: 0 };
    cur.skip_ws();
    if cur.peek().is_none() {
        return Err(cur.err(Kind::Empty));
    }

    let (path, query) = parse_header(&mut cur)?;

    let mut raw_args: Vec<(ScpiValue, Option<&str>)> = Vec::new();
    match cur.peek() {
        None => {}
        Some(' ' | '\t') => {
            cur.skip_ws();
            if cur.peek().is_some() {
                loop {
                    raw_args.push(parse_value(&mut cur)?);
                    cur.skip_ws();
                    match cur.peek() {
                        None => break,
                        Some(',') => {
                            cur.bump();
                            cur.skip_ws();
                            if matches!(cur.peek(), None | Some(',')) {
                                return Err(cur.err(Kind::EmptyElement));
                            }
                        }
                        Some('}') => return Err(cur.err(Kind::UnbalancedBraces)),
                        Some(_) => return Err(cur.unexpected()),
                    }
                }
            }
        }
        Some(_) => return Err(cur.unexpected()),
    }

    // An all-numeric list of two or more values is one array argument.
    let args = if raw_args.len() >= 2 && raw_args.iter().all(|(v, _)| v.is_numeric_scalar()) {
        let items = raw_args.iter().map(|(_, text)| Decimal::from_unchecked(text.unwrap_or_default())).collect();
        vec![ScpiValue::Array(items)]
    } else {
        raw_args.into_iter().map(|(v, _)| v).collect()
    };
    Ok(ScpiCommand::from_parts_unchecked(path, query, args))
}

/// Byte-level entry point: rejects invalid UTF-8 with the offending offset.
pub fn parse_message_bytes(line: &[u8]) -> Result<ScpiCommand, ParseError> {
    match std::str::from_utf8(line) {
        Ok(s) => parse_message(s),
        Err(e) => Err(ParseError::new(e.valid_up_to(), Kind::InvalidUtf8)),
    }
}

fn parse_header(cur: &mut Cursor<'_>) -> Result<(Vec<Mnemonic>, bool), ParseError> {
    let mut path = Vec::new();
    if cur.peek() == Some('*') {
        let start = cur.pos;
        cur.bump();
        while matches!(cur.peek(), Some(c) if c.is_ascii_alphabetic()) {
            cur.bump();
        }
        if cur.pos == start + 1 {
            return Err(cur.err(Kind::MalformedHeader));
        }
        let name = cur.src[start..cur.pos].to_ascii_uppercase();
        path.push(Mnemonic::from_parts_unchecked(name, None));
    } else {
        if cur.peek() == Some(':') {
            cur.bump();
        }
        loop {
            path.push(parse_mnemonic(cur)?);
            if cur.peek() == Some(':') {
                cur.bump();
            } else {
                break;
            }
        }
    }
    let query = if cur.peek() == Some('?') {
        cur.bump();
        true
    } else {
        false
    };
    match cur.peek() {
        None | Some(' ' | '\t') => Ok((path, query)),
        Some(':') if path[0].is_common() => Err(cur.err(Kind::MalformedHeader)),
        Some(_) => Err(cur.unexpected()),
    }
}

fn parse_mnemonic(cur: &mut Cursor<'_>) -> Result<Mnemonic, ParseError> {
    let start = cur.pos;
    match cur.peek() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return Err(cur.err(Kind::MalformedHeader)),
    }
    while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric()) {
        cur.bump();
    }
    let tok = &cur.src[start..cur.pos];
    let digits = tok.len() - tok.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let (name, suffix) = tok.split_at(tok.len() - digits);
    let suffix = if digits > 0 {
        let v = suffix.parse::<u32>().map_err(|_| ParseError::new(start + name.len(), Kind::SuffixOverflow))?;
        Some(v)
    } else {
        None
    };
    Ok(Mnemonic::from_parts_unchecked(name.to_ascii_uppercase(), suffix))
}

/// Returns the value and, for bare numeric tokens, the original text.
fn parse_value<'a>(cur: &mut Cursor<'a>) -> Result<(ScpiValue, Option<&'a str>), ParseError> {
    match cur.peek() {
        Some('{') => {
            let start = cur.pos;
            let end = cur.src[start..]
                .find('}')
                .map(|i| start + i)
                .ok_or_else(|| ParseError::new(start, Kind::UnbalancedBraces))?;
            let items = parse_array_body(cur.src, start + 1, end)?;
            cur.pos = end + 1;
            Ok((ScpiValue::Array(items), None))
        }
        Some('"') => {
            let start = cur.pos;
            cur.bump();
            let mut text = String::new();
            loop {
                match cur.bump() {
                    None => return Err(ParseError::new(start, Kind::UnterminatedString)),
                    Some('"') if cur.peek() == Some('"') => {
                        cur.bump();
                        text.push('"');
                    }
                    Some('"') => break,
                    Some(c) => text.push(c),
                }
            }
            Ok((ScpiValue::Text(text), None))
        }
        Some('}') => Err(cur.err(Kind::UnbalancedBraces)),
        _ => {
            let start = cur.pos;
            while matches!(cur.peek(), Some(c) if !is_token_delim(c)) {
                cur.bump();
            }
            let tok = &cur.src[start..cur.pos];
            if tok.is_empty() {
                return Err(cur.err(Kind::EmptyElement));
            }
            if let Some(c) = tok.chars().find(|c| c.is_control()) {
                return Err(ParseError::new(start, Kind::Unexpected(c)));
            }
            let value = if is_integer(tok) {
                match tok.parse::<i64>() {
                    Ok(v) => ScpiValue::Integer(v),
                    Err(_) => ScpiValue::Decimal(Decimal::from_unchecked(tok)),
                }
            } else if is_decimal(tok) {
                ScpiValue::Decimal(Decimal::from_unchecked(tok))
            } else {
                return Ok((ScpiValue::Keyword(tok.to_string()), None));
            };
            Ok((value, Some(tok)))
        }
    }
}

/// Parses `src[from..to]` as a comma-separated decimal list; offsets are absolute.
fn parse_array_body(src: &str, from: usize, to: usize) -> Result<Vec<Decimal>, ParseError> {
    let body = &src[from..to];
    if let Some(i) = body.find('{') {
        return Err(ParseError::new(from + i, Kind::UnbalancedBraces));
    }
    if body.trim_matches([' ', '\t']).is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(body.len() / 4 + 1);
    let mut offset = from;
    for part in body.split(',') {
        let lead = part.len() - part.trim_start_matches([' ', '\t']).len();
        let item = part.trim_matches([' ', '\t']);
        if item.is_empty() {
            return Err(ParseError::new(offset + lead, Kind::EmptyElement));
        }
        if !is_decimal(item) {
            return Err(ParseError::new(offset + lead, Kind::NonNumeric));
        }
        out.push(Decimal::from_unchecked(item));
        offset += part.len() + 1;
    }
    Ok(out)
}

/// Parses a brace-delimited array response such as `{0,-0.5,0.25}`.
pub fn parse_buffer_response(payload: &str) -> Result<Vec<Decimal>, ParseError> {
    let trimmed_start = payload.len() - payload.trim_start().len();
    let body = payload.trim();
    if !body.starts_with('{') {
        return Err(ParseError::new(trimmed_start, Kind::UnbalancedBraces));
    }
    let close = trimmed_start + body.len() - 1;
    if body.len() < 2 || !body.ends_with('}') {
        return Err(ParseError::new(trimmed_start + body.len(), Kind::UnbalancedBraces));
    }
    if let Some(i) = payload[trimmed_start + 1..close].find('}') {
        return Err(ParseError::new(trimmed_start + 1 + i, Kind::UnbalancedBraces));
    }
    parse_array_body(payload, trimmed_start + 1, close)
}

/// [`parse_buffer_response`] followed by conversion to a float type.
pub fn parse_buffer_values<T: std::str::FromStr>(payload: &str) -> Result<Vec<T>, ParseError> {
    parse_buffer_response(payload)?
        .iter()
        .map(|d| d.parse::<T>().ok_or_else(|| ParseError::new(0, Kind::NonNumeric)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(cmd: &ScpiCommand) -> Vec<(String, Option<u32>)> {
        cmd.path().iter().map(|m| (m.name().to_string(), m.suffix())).collect()
    }

    #[test]
    fn minimal_set_command() {
        let cmd = parse_message("ACQ:DEC 8").unwrap();
        assert_eq!(names(&cmd), vec![("ACQ".into(), None), ("DEC".into(), None)]);
        assert!(!cmd.is_query());
        assert_eq!(cmd.args(), &[ScpiValue::Integer(8)]);
    }

    #[test]
    fn minimal_query_with_channel_suffix() {
        let cmd = parse_message("acq:sour1:data?").unwrap();
        assert_eq!(names(&cmd), vec![("ACQ".into(), None), ("SOUR".into(), Some(1)), ("DATA".into(), None)]);
        assert!(cmd.is_query());
        assert!(cmd.args().is_empty());
    }

    #[test]
    fn waveform_upload_is_one_array() {
        let cmd = parse_message("SOUR1:TRAC:DATA:DATA 0.7,0.70004, 0.8 ,1").unwrap();
        assert_eq!(cmd.header_key(), "SOUR:TRAC:DATA:DATA");
        match cmd.args() {
            [ScpiValue::Array(v)] => {
                let t: Vec<_> = v.iter().map(Decimal::as_str).collect();
                assert_eq!(t, ["0.7", "0.70004", "0.8", "1"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn keywords_keep_case_and_text_unescapes() {
        let cmd = parse_message("SIM:SCENE:LOAD /tmp/My Scene.json").unwrap_err();
        assert_eq!(cmd.kind, Kind::Unexpected('S'));
        let cmd = parse_message("SIM:SCENE:LOAD \"/tmp/My \"\"Scene\"\".json\"").unwrap();
        assert_eq!(cmd.args(), &[ScpiValue::Text("/tmp/My \"Scene\".json".into())]);
        let cmd = parse_message("sim:route DualReal").unwrap();
        assert_eq!(cmd.args(), &[ScpiValue::keyword("DualReal")]);
        let cmd = parse_message("*idn?").unwrap();
        assert_eq!(cmd.header_key(), "*IDN");
    }

    #[test]
    fn errors_carry_offsets() {
        let cases = [
            ("", 0, Kind::Empty),
            ("ACQ::DEC 8", 4, Kind::MalformedHeader),
            ("ACQ:DEC 8,", 10, Kind::EmptyElement),
            ("ACQ:DEC 8,,9", 10, Kind::EmptyElement),
            ("X {1,2", 2, Kind::UnbalancedBraces),
            ("X {1,abc}", 5, Kind::NonNumeric),
            ("X {1,,2}", 5, Kind::EmptyElement),
            ("X 1}", 3, Kind::UnbalancedBraces),
            ("X \"abc", 2, Kind::UnterminatedString),
            ("1X", 0, Kind::MalformedHeader),
            ("*IDN:X?", 4, Kind::MalformedHeader),
            ("ACQ:DEC? 1 2", 11, Kind::Unexpected('2')),
            ("SOUR99999999999:X", 4, Kind::SuffixOverflow),
        ];
        for (line, offset, kind) in cases {
            let e = parse_message(line).unwrap_err();
            assert_eq!((e.offset, e.kind.clone()), (offset, kind), "{line}");
        }
        let e = parse_message_bytes(b"ACQ\xff").unwrap_err();
        assert_eq!((e.offset, e.kind), (3, Kind::InvalidUtf8));
    }

    #[test]
    fn buffer_responses() {
        let v: Vec<f64> = parse_buffer_values("{0,0,0}").unwrap();
        assert_eq!(v, vec![0.0, 0.0, 0.0]);
        let v: Vec<f64> = parse_buffer_values("{-0.5,0.25}").unwrap();
        assert_eq!(v, vec![-0.5, 0.25]);
        assert!(parse_buffer_response("{}").unwrap().is_empty());
        for bad in ["0,1", "{0,1", "{0,,1}", "{NaN}", "{1}}", "{{1}", "{1,}"] {
            assert!(parse_buffer_response(bad).is_err(), "{bad}");
        }
    }
}
