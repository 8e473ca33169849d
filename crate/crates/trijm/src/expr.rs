//! Numbers and vectors given on the command line.
//!
//! A scalar is an arithmetic expression over decimal literals, `pi`, the
//! operators `+ - * /`, parentheses and `sqrt(..)`, so `pi/3`, `-2*pi/3` and
//! `1/sqrt(3)` are all accepted. A vector is three scalars separated by
//! commas.

use std::fmt;

use trijm_core::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at offset {}", self.message, self.position)
    }
}

impl std::error::Error for ParseError {}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { position: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<f64, ParseError> {
        let mut acc = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == b'+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<f64, ParseError> {
        let mut acc = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == b'*' { acc * rhs } else { acc / rhs };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(b')')?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                match word.to_ascii_lowercase().as_str() {
                    "pi" => Ok(std::f64::consts::PI),
                    "sqrt" => {
                        self.expect(b'(')?;
                        let v = self.expr()?;
                        self.expect(b')')?;
                        Ok(v.sqrt())
                    }
                    _ => {
                        self.pos = start;
                        self.err(format!("unknown name `{word}`"))
                    }
                }
            }
            Some(c) => self.err(format!("unexpected `{}`", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                digits(self);
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse().or_else(|_| {
            self.pos = start;
            self.err(format!("malformed number `{text}`"))
        })
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{}`", c as char))
        }
    }
}

/// Evaluates a scalar expression; the result must be finite.
pub fn parse_scalar(s: &str) -> Result<f64, ParseError> {
    let mut p = Parser { src: s.as_bytes(), pos: 0 };
    let v = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    if !v.is_finite() {
        return Err(ParseError { position: 0, message: format!("value {v} is not finite") });
    }
    Ok(v)
}

/// Parses `x,y,z`. Errors name the offending component.
pub fn parse_vector(s: &str) -> Result<Vec3, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated components, got {}", parts.len()));
    }
    let mut v = [0.0; 3];
    for (i, (slot, part)) in v.iter_mut().zip(&parts).enumerate() {
        *slot = parse_scalar(part).map_err(|e| format!("component {} (`{}`): {e}", ["x", "y", "z"][i], part.trim()))?;
    }
    Ok(Vec3::from_array(v))
}

/// Parses a comma-separated list of scalars.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .enumerate()
        .map(|(i, part)| parse_scalar(part).map_err(|e| format!("entry {i} (`{}`): {e}", part.trim())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn scalars() {
        let cases = [
            ("pi/3", PI / 3.0),
            ("-2*pi/3", -2.0 * PI / 3.0),
            ("1/sqrt(3)", 1.0 / 3f64.sqrt()),
            (" 0.5 ", 0.5),
            ("1e-3", 1e-3),
            ("2.5E+2", 250.0),
            ("(1+2)*3", 9.0),
            ("--1", 1.0),
            ("PI", PI),
        ];
        for (s, want) in cases {
            assert!((parse_scalar(s).unwrap() - want).abs() < 1e-15, "{s}");
        }
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "1+", "abc", "1/0", "sqrt(-1)", "(1", "1 2", "nan", "inf"] {
            assert!(parse_scalar(s).is_err(), "{s}");
        }
    }

    #[test]
    fn vectors() {
        let v = parse_vector("0, sqrt(3)/2, 1/2").unwrap();
        assert!((v.y - 3f64.sqrt() / 2.0).abs() < 1e-15 && v.z == 0.5);
        let err = parse_vector("0,1,x").unwrap_err();
        assert!(err.contains("component z"), "{err}");
        assert!(parse_vector("0,1").is_err());
    }
}
