//! Line-oriented parser for `.pseq` pulse-sequence files.
//!
//! ```text
//! line    := pulse | soft | delay | couple | zrot
//! pulse   := "pulse" target angle axis
//! soft    := "soft" target angle axis "dur" seconds ["offset" hz] ["trunc" fraction] ["slices" int]
//! delay   := "delay" ( seconds "s" | fraction "/J" )
//! couple  := "couple" fraction
//! zrot    := "zrot" target angle
//! target  := "I" | "S" | "both"
//! axis    := "x" | "y" | "z" | "-x" | "-y" | "-z" | degrees
//! ```
//!
//! `#` starts a comment. A leading `# name: <name>` comment names the sequence.
//! Fractions may be written as `a/b`.

use std::fmt;

use thiserror::Error;

use super::ast::{Axis, Delay, Event, Sequence, SoftPulseParams, Target};
use crate::pulse::Spin;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub token: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {} col {}: {}", self.line, self.column, self.message)?;
        if !self.token.is_empty() {
            write!(f, " (found `{}`)", self.token)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Word(String),
    Number(f64),
    Slash,
}

#[derive(Debug, Clone)]
struct Token {
    kind: Kind,
    text: String,
    column: usize,
}

fn lex_line(line: &str, line_no: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        if c == '/' {
            tokens.push(Token {
                kind: Kind::Slash,
                text: "/".into(),
                column,
            });
            i += 1;
            continue;
        }
        let next = chars.get(i + 1).copied();
        let starts_number = c.is_ascii_digit()
            || (c == '.' && next.is_some_and(|n| n.is_ascii_digit()))
            || ((c == '-' || c == '+')
                && next.is_some_and(|n| n.is_ascii_digit() || n == '.'));
        if starts_number {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent only when followed by digits, so `2s` and `1e-3s` both lex
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| ParseError {
                line: line_no,
                column,
                message: "malformed number".into(),
                token: text.clone(),
            })?;
            tokens.push(Token {
                kind: Kind::Number(value),
                text,
                column,
            });
            continue;
        }
        let is_word_start = |ch: char| ch.is_ascii_alphabetic() || ch == '_';
        if is_word_start(c) || (c == '-' && next.is_some_and(is_word_start)) {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            tokens.push(Token {
                kind: Kind::Word(text.clone()),
                text,
                column,
            });
            continue;
        }
        return Err(ParseError {
            line: line_no,
            column,
            message: "unexpected character".into(),
            token: c.to_string(),
        });
    }
    Ok(tokens)
}

struct LineParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
    end_column: usize,
}

impl<'a> LineParser<'a> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        match self.tokens.get(self.pos) {
            Some(t) => ParseError {
                line: self.line,
                column: t.column,
                message: message.into(),
                token: t.text.clone(),
            },
            None => ParseError {
                line: self.line,
                column: self.end_column,
                message: message.into(),
                token: String::new(),
            },
        }
    }

    fn peek(&self) -> Option<&Kind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, offset: usize) -> Option<&Kind> {
        self.tokens.get(self.pos + offset).map(|t| &t.kind)
    }

    fn word(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Kind::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn number(&mut self, what: &str) -> Result<f64, ParseError> {
        match self.peek() {
            Some(&Kind::Number(v)) => {
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    /// number ['/' number]
    fn ratio(&mut self, what: &str) -> Result<f64, ParseError> {
        let start = self.pos;
        let num = self.number(what)?;
        if matches!(self.peek(), Some(Kind::Slash)) && matches!(self.peek_at(1), Some(Kind::Number(_))) {
            self.pos += 1;
            let den = self.number("denominator")?;
            if den == 0.0 {
                self.pos = start;
                return Err(self.error("zero denominator"));
            }
            return Ok(num / den);
        }
        Ok(num)
    }

    fn nonnegative(&mut self, what: &str) -> Result<f64, ParseError> {
        let start = self.pos;
        let v = self.ratio(what)?;
        if v < 0.0 {
            self.pos = start;
            return Err(self.error(format!("{what} must be nonnegative")));
        }
        Ok(v)
    }

    fn target(&mut self) -> Result<Target, ParseError> {
        match self.peek() {
            Some(Kind::Word(w)) if w == "I" => {
                self.pos += 1;
                Ok(Target::I)
            }
            Some(Kind::Word(w)) if w == "S" => {
                self.pos += 1;
                Ok(Target::S)
            }
            Some(Kind::Word(w)) if w == "both" => {
                self.pos += 1;
                Ok(Target::Both)
            }
            Some(_) => Err(self.error("unknown target (expected I, S or both)")),
            None => Err(self.error("expected target")),
        }
    }

    fn axis(&mut self) -> Result<Axis, ParseError> {
        match self.peek() {
            Some(Kind::Word(w)) => match Axis::from_label(w) {
                Some(a) => {
                    self.pos += 1;
                    Ok(a)
                }
                None => Err(self.error("unknown axis (expected x, y, z, -x, -y, -z or degrees)")),
            },
            Some(&Kind::Number(p)) => {
                self.pos += 1;
                Ok(Axis::Phase(p))
            }
            _ => Err(self.error("expected axis")),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.pos < self.tokens.len() {
            Err(self.error("trailing input"))
        } else {
            Ok(())
        }
    }

    fn event(&mut self) -> Result<Event, ParseError> {
        let keyword_pos = self.pos;
        let keyword = self.word("mnemonic")?;
        let event = match keyword.as_str() {
            "pulse" => {
                let target = self.target()?;
                let flip = self.number("flip angle")?;
                let axis = self.axis()?;
                Event::Pulse { target, flip, axis }
            }
            "soft" => self.soft()?,
            "delay" => {
                let value = self.nonnegative("delay")?;
                match self.peek() {
                    Some(Kind::Word(w)) if w == "s" => {
                        self.pos += 1;
                        Event::Delay(Delay::Seconds(value))
                    }
                    Some(Kind::Slash) if matches!(self.peek_at(1), Some(Kind::Word(w)) if w == "J") => {
                        self.pos += 2;
                        Event::Delay(Delay::PerJ(value))
                    }
                    _ => return Err(self.error("expected unit `s` or `/J`")),
                }
            }
            "couple" => Event::Couple {
                fraction: self.nonnegative("coupling fraction")?,
            },
            "zrot" => {
                let target = self.target()?;
                let theta = self.number("rotation angle")?;
                Event::ZRot { target, theta }
            }
            _ => {
                self.pos = keyword_pos;
                return Err(self.error("unknown mnemonic"));
            }
        };
        self.finish()?;
        Ok(event)
    }

    fn soft(&mut self) -> Result<Event, ParseError> {
        let target = match self.target()? {
            Target::I => Spin::I,
            Target::S => Spin::S,
            Target::Both => {
                self.pos -= 1;
                return Err(self.error("soft pulses are selective: target must be I or S"));
            }
        };
        let flip = self.number("flip angle")?;
        let axis_pos = self.pos;
        let axis = self.axis()?;
        if axis.phase_degrees().is_none() {
            self.pos = axis_pos;
            return Err(self.error("soft pulses need a transverse axis"));
        }
        let kw_pos = self.pos;
        if self.word("`dur`")? != "dur" {
            self.pos = kw_pos;
            return Err(self.error("expected `dur`"));
        }
        let duration = self.positive_seconds()?;
        let mut params = SoftPulseParams {
            target,
            flip,
            axis,
            duration,
            offset: None,
            truncation: None,
            slices: None,
        };
        while self.pos < self.tokens.len() {
            let opt_pos = self.pos;
            let name = self.word("option")?;
            let duplicate = match name.as_str() {
                "offset" => params.offset.replace(self.number("offset in Hz")?).is_some(),
                "trunc" => {
                    let p = self.pos;
                    let t = self.ratio("truncation")?;
                    if !(t > 0.0 && t < 1.0) {
                        self.pos = p;
                        return Err(self.error("truncation must lie in (0, 1)"));
                    }
                    params.truncation.replace(t).is_some()
                }
                "slices" => {
                    let p = self.pos;
                    let n = self.number("slice count")?;
                    if n.fract() != 0.0 || n < 1.0 {
                        self.pos = p;
                        return Err(self.error("slice count must be a positive integer"));
                    }
                    params.slices.replace(n as usize).is_some()
                }
                _ => {
                    self.pos = opt_pos;
                    return Err(self.error("unknown soft-pulse option"));
                }
            };
            if duplicate {
                self.pos = opt_pos;
                return Err(self.error("option given twice"));
            }
        }
        Ok(Event::Soft(params))
    }

    fn positive_seconds(&mut self) -> Result<f64, ParseError> {
        let p = self.pos;
        let v = self.number("duration in seconds")?;
        if !(v > 0.0) {
            self.pos = p;
            return Err(self.error("duration must be positive"));
        }
        if matches!(self.peek(), Some(Kind::Word(w)) if w == "s") {
            self.pos += 1;
        }
        Ok(v)
    }
}

fn name_pragma(line: &str) -> Option<&str> {
    line.trim_start()
        .strip_prefix('#')?
        .trim_start()
        .strip_prefix("name:")
        .map(str::trim)
}

/// Parses `.pseq` text into a sequence named `unnamed` unless a name pragma is present.
pub fn parse(text: &str) -> Result<Sequence, ParseError> {
    let mut seq = Sequence::empty("unnamed");
    let mut seen_event = false;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if !seen_event {
            if let Some(name) = name_pragma(line) {
                seq.name = name.to_string();
                continue;
            }
        }
        let tokens = lex_line(line, line_no)?;
        if tokens.is_empty() {
            continue;
        }
        let mut p = LineParser {
            tokens: &tokens,
            pos: 0,
            line: line_no,
            end_column: line.chars().count() + 1,
        };
        seq.events.push(p.event()?);
        seen_event = true;
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(text: &str) -> Event {
        let seq = parse(text).unwrap();
        assert_eq!(seq.len(), 1);
        seq.events[0]
    }

    #[test]
    fn pulse_line() {
        assert_eq!(
            one("pulse S 90 y"),
            Event::Pulse {
                target: Target::S,
                flip: 90.0,
                axis: Axis::Y
            }
        );
        assert_eq!(
            one("  pulse   both 180   -x  # refocus"),
            Event::Pulse {
                target: Target::Both,
                flip: 180.0,
                axis: Axis::MinusX
            }
        );
        assert_eq!(
            one("pulse I 45 135.5"),
            Event::Pulse {
                target: Target::I,
                flip: 45.0,
                axis: Axis::Phase(135.5)
            }
        );
    }

    #[test]
    fn couple_and_delays() {
        assert_eq!(one("couple 0.5"), Event::Couple { fraction: 0.5 });
        assert_eq!(one("couple 1/2"), Event::Couple { fraction: 0.5 });
        assert_eq!(one("delay 0.25 /J"), Event::Delay(Delay::PerJ(0.25)));
        assert_eq!(one("delay 1/4/J"), Event::Delay(Delay::PerJ(0.25)));
        assert_eq!(one("delay 1e-3 s"), Event::Delay(Delay::Seconds(1e-3)));
        assert_eq!(one("delay 2s"), Event::Delay(Delay::Seconds(2.0)));
        assert_eq!(
            one("zrot S -90"),
            Event::ZRot {
                target: Target::S,
                theta: -90.0
            }
        );
    }

    #[test]
    fn soft_line_with_options() {
        let ev = one("soft I 90 y dur 0.0065 offset 381.5 trunc 0.02 slices 256");
        assert_eq!(
            ev,
            Event::Soft(SoftPulseParams {
                target: Spin::I,
                flip: 90.0,
                axis: Axis::Y,
                duration: 0.0065,
                offset: Some(381.5),
                truncation: Some(0.02),
                slices: Some(256),
            })
        );
    }

    #[test]
    fn unknown_target_location() {
        let err = parse("pulse Q 90 y").unwrap_err();
        assert_eq!((err.line, err.column), (1, 7));
        assert_eq!(err.token, "Q");
        assert!(err.to_string().starts_with("line 1 col 7"));
    }

    #[test]
    fn errors_pinpoint_location() {
        let cases = [
            ("\n\nflip I 90 y", 3, 1, "flip"),
            ("pulse I 90 w", 1, 12, "w"),
            ("pulse I ninety y", 1, 9, "ninety"),
            ("couple 0.5 extra", 1, 12, "extra"),
            ("delay 3", 1, 8, ""),
            ("delay 3 ms", 1, 9, "ms"),
            ("delay -1 s", 1, 7, "-1"),
            ("soft both 90 x dur 0.006", 1, 6, "both"),
            ("soft I 90 z dur 0.006", 1, 11, "z"),
            ("soft I 90 x dur 0.006 trunc 2", 1, 29, "2"),
            ("soft I 90 x dur 0.006 slices 64 slices 32", 1, 33, "slices"),
            ("pulse I 90 y $", 1, 14, "$"),
            ("couple 1/0", 1, 8, "1"),
        ];
        for (text, line, col, tok) in cases {
            let err = parse(text).unwrap_err();
            assert_eq!((err.line, err.column, err.token.as_str()), (line, col, tok), "{text}: {err}");
        }
    }

    #[test]
    fn comments_blank_lines_and_name() {
        let seq = parse("# name: demo\n\n# comment only\npulse I 90 x\n   \n").unwrap();
        assert_eq!(seq.name, "demo");
        assert_eq!(seq.len(), 1);
        assert_eq!(parse("").unwrap().len(), 0);
    }

    #[test]
    fn printed_text_reparses() {
        let text = "# name: mix\npulse S 90 y\nsoft I 90 -y dur 0.0065 offset 381.5\ndelay 0.25 /J\ndelay 0.001 s\ncouple 0.5\nzrot I -90\npulse both 180 x\n";
        let seq = parse(text).unwrap();
        assert_eq!(seq.to_string(), text);
        assert_eq!(parse(&seq.to_string()).unwrap(), seq);
    }
}
