//! Mean expressions: `IDENT` or `IDENT "(" number { "," number } ")"`.
//!
//! Whitespace is insignificant. Every error carries the byte offset where
//! parsing stopped and a description of what was expected there.

use std::fmt;

use gauss_means::{MeanError, MeanKind, MeanSpec};

pub const MEAN_NAMES: [&str; 9] = [
    "arithmetic",
    "geometric",
    "harmonic",
    "power",
    "min",
    "max",
    "proj1",
    "proj2",
    "weighted_arithmetic",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    /// Well-formed, but a parameter is out of range.
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
    pub expected: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ParseErrorKind::Syntax => write!(f, "syntax error at offset {}: expected {}", self.offset, self.expected),
            ParseErrorKind::Semantic => write!(f, "invalid parameter at offset {}: {}", self.offset, self.expected),
        }
    }
}

impl std::error::Error for ParseError {}

/// A parsed mean expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanExpr {
    pub source: String,
    pub spec: MeanSpec,
}

impl MeanExpr {
    /// Canonical text; parsing it yields the same [`MeanSpec`].
    pub fn render(&self) -> String {
        self.spec.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token<'a> {
    Ident(&'a str),
    Number(f64),
    Open,
    Close,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    /// Next token and its starting offset.
    fn next(&mut self) -> Result<(Token<'a>, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let Some(&c) = bytes.get(start) else {
            return Ok((Token::End, start));
        };
        let tok = match c {
            b'(' => {
                self.pos += 1;
                Token::Open
            }
            b')' => {
                self.pos += 1;
                Token::Close
            }
            b',' => {
                self.pos += 1;
                Token::Comma
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let len = bytes[start..]
                    .iter()
                    .take_while(|b| b.is_ascii_alphanumeric() || **b == b'_')
                    .count();
                self.pos += len;
                Token::Ident(&self.src[start..self.pos])
            }
            c if c.is_ascii_digit() || c == b'-' || c == b'+' || c == b'.' => {
                let len = number_len(&bytes[start..]);
                let text = &self.src[start..start + len];
                let value = text.parse::<f64>().ok().filter(|_| len > 0).ok_or_else(|| {
                    syntax(start, "number")
                })?;
                self.pos += len;
                Token::Number(value)
            }
            _ => {
                return Err(syntax(start, "mean name, number, '(', ',' or ')'"));
            }
        };
        Ok((tok, start))
    }
}

/// Length of the longest prefix of the form `[+-]? digits [. digits] [(e|E) [+-]? digits]`.
fn number_len(b: &[u8]) -> usize {
    let digits = |from: usize| b[from..].iter().take_while(|c| c.is_ascii_digit()).count();
    let mut i = 0;
    if matches!(b.first(), Some(b'+' | b'-')) {
        i += 1;
    }
    let int = digits(i);
    i += int;
    let mut frac = 0;
    if b.get(i) == Some(&b'.') {
        frac = digits(i + 1);
        i += 1 + frac;
    }
    if int + frac == 0 {
        return 0;
    }
    if matches!(b.get(i), Some(b'e' | b'E')) {
        let mut j = i + 1;
        if matches!(b.get(j), Some(b'+' | b'-')) {
            j += 1;
        }
        let exp = digits(j);
        if exp > 0 {
            i = j + exp;
        }
    }
    i
}

fn syntax(offset: usize, expected: &str) -> ParseError {
    ParseError {
        kind: ParseErrorKind::Syntax,
        offset,
        expected: expected.to_string(),
    }
}

fn arity(name: &str) -> usize {
    match name {
        "power" | "weighted_arithmetic" => 1,
        _ => 0,
    }
}

/// Parses a mean expression such as `geometric`, `power(2)` or
/// `weighted_arithmetic(0.25)`.
pub fn parse_mean(text: &str) -> Result<MeanExpr, ParseError> {
    let mut lx = Lexer { src: text, pos: 0 };
    let (tok, at) = lx.next()?;
    let name = match tok {
        Token::Ident(name) if MEAN_NAMES.contains(&name) => name,
        Token::Ident(_) => {
            return Err(syntax(at, &format!("one of {}", MEAN_NAMES.join(", "))));
        }
        _ => return Err(syntax(at, "mean name")),
    };
    let want = arity(name);
    let mut params = Vec::new();
    let mut param_offsets = Vec::new();
    let (tok, at) = lx.next()?;
    match tok {
        Token::End if want == 0 => {}
        Token::End => return Err(syntax(at, "'('")),
        Token::Open if want == 0 => {
            return Err(syntax(at, &format!("end of input ({name} takes no parameters)")));
        }
        Token::Open => loop {
            let (tok, at) = lx.next()?;
            let Token::Number(v) = tok else {
                return Err(syntax(at, "number"));
            };
            params.push(v);
            param_offsets.push(at);
            let (tok, at) = lx.next()?;
            match tok {
                Token::Close if params.len() == want => break,
                Token::Close => return Err(syntax(at, "','")),
                Token::Comma if params.len() < want => {}
                _ if params.len() < want => return Err(syntax(at, "','")),
                _ => return Err(syntax(at, "')'")),
            }
        },
        _ if want == 0 => return Err(syntax(at, "end of input")),
        _ => return Err(syntax(at, "'('")),
    }
    let (tok, at) = lx.next()?;
    if tok != Token::End {
        return Err(syntax(at, "end of input"));
    }

    let kind = match name {
        "arithmetic" => MeanKind::Arithmetic,
        "geometric" => MeanKind::Geometric,
        "harmonic" => MeanKind::Harmonic,
        "power" => MeanKind::Power(params[0]),
        "min" => MeanKind::Min,
        "max" => MeanKind::Max,
        "proj1" => MeanKind::Proj1,
        "proj2" => MeanKind::Proj2,
        "weighted_arithmetic" => MeanKind::WeightedArithmetic(params[0]),
        _ => unreachable!("name checked against MEAN_NAMES"),
    };
    let spec = MeanSpec::from_kind(kind).map_err(|e| ParseError {
        kind: ParseErrorKind::Semantic,
        offset: param_offsets.first().copied().unwrap_or(0),
        expected: match e {
            MeanError::InvalidParameter(msg) => msg,
            other => other.to_string(),
        },
    })?;
    Ok(MeanExpr {
        source: text.to_string(),
        spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use gauss_means::{Interval, Mean};
    use proptest::prelude::*;

    fn err(text: &str) -> ParseError {
        parse_mean(text).unwrap_err()
    }

    #[test]
    fn parses_catalog() {
        let e = parse_mean("power(2)").unwrap();
        assert_eq!(e.spec, MeanSpec::power(2.0).unwrap());
        assert_eq!(e.spec.domain(), Interval::nonnegative());
        let e = parse_mean("min").unwrap();
        assert_eq!(e.spec, MeanSpec::min());
        assert_eq!(e.spec.domain(), Interval::real_line());
        assert_eq!(parse_mean("power(-1)").unwrap().spec.domain(), Interval::positive());
        assert_eq!(
            parse_mean("  weighted_arithmetic ( 0.25 ) ").unwrap().spec,
            MeanSpec::weighted_arithmetic(0.25).unwrap()
        );
        assert_eq!(parse_mean("power(1.5e1)").unwrap().spec, MeanSpec::power(15.0).unwrap());
        for name in MEAN_NAMES.iter().filter(|n| arity(n) == 0) {
            assert!(parse_mean(name).is_ok(), "{name}");
        }
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert_eq!(err("power("), syntax(6, "number"));
        assert_eq!(err("power").offset, 5);
        assert_eq!(err("power(2").expected, "')'");
        assert_eq!(err("power(2").offset, 7);
        assert_eq!(err("power(1,2)").offset, 7);
        assert_eq!(err("min(1)").offset, 3);
        assert_eq!(err("mean").offset, 0);
        assert!(err("mean").expected.starts_with("one of arithmetic"));
        assert_eq!(err("").expected, "mean name");
        assert_eq!(err("min max").offset, 4);
        assert_eq!(err("power(x)"), syntax(6, "number"));
        assert_eq!(err("power(-)"), syntax(6, "number"));
        assert_eq!(err("min$").offset, 3);
        assert_eq!(err("power(2))").offset, 8);
    }

    #[test]
    fn semantic_errors() {
        let e = err("weighted_arithmetic(1.5)");
        assert_eq!(e.kind, ParseErrorKind::Semantic);
        assert_eq!(e.offset, 20);
        assert!(e.expected.contains("[0, 1]"));
        assert_eq!(err("power(1e999)").kind, ParseErrorKind::Semantic);
    }

    #[test]
    fn render_round_trips() {
        for m in MeanSpec::catalog() {
            let expr = MeanExpr {
                source: String::new(),
                spec: m.clone(),
            };
            assert_eq!(parse_mean(&expr.render()).unwrap().spec, m);
        }
    }

    proptest! {
        #[test]
        fn parser_is_total(s in "\\PC{0,24}") {
            match parse_mean(&s) {
                Ok(e) => prop_assert_eq!(e.source, s),
                Err(e) => prop_assert!(e.offset <= s.len()),
            }
        }

        #[test]
        fn parser_is_total_on_near_misses(s in "[a-z_]{0,8}[( ]{0,2}[-+0-9.eE]{0,6}[,) ]{0,3}") {
            if let Err(e) = parse_mean(&s) {
                prop_assert!(e.offset <= s.len());
                prop_assert!(!e.expected.is_empty());
            }
        }

        #[test]
        fn parameter_round_trip(p in -1e6f64..1e6, w in 0.0f64..=1.0) {
            for spec in [MeanSpec::power(p).unwrap(), MeanSpec::weighted_arithmetic(w).unwrap()] {
                let text = spec.to_string();
                prop_assert_eq!(parse_mean(&text).unwrap().spec, spec);
            }
        }
    }
}
