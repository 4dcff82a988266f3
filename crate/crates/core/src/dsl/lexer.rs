use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{DslError, Location};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Word(String),
    Int(u32),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Int(n) => write!(f, "integer {n}"),
            Tok::Str(s) => write!(f, "string {}", super::render::quote(s)),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub at: Location,
}

struct Cursor<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn here(&self) -> Location {
        Location { line: self.line, column: self.column }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

fn is_word_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `text` into tokens; returns the tokens and the end-of-input location.
pub(crate) fn tokenize(text: &str) -> Result<(Vec<Spanned>, Location), DslError> {
    let mut cur = Cursor { chars: text.chars().peekable(), line: 1, column: 1 };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let at = cur.here();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let punct = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = punct {
            cur.bump();
            out.push(Spanned { tok, at });
            continue;
        }
        if is_word_start(c) {
            let mut word = String::new();
            while let Some(c) = cur.peek().filter(|&c| is_word_char(c)) {
                word.push(c);
                cur.bump();
            }
            out.push(Spanned { tok: Tok::Word(word), at });
            continue;
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
                digits.push(c);
                cur.bump();
            }
            if cur.peek().is_some_and(is_word_char) {
                return Err(DslError::parse(at, format!("malformed integer starting `{digits}`")));
            }
            let n = digits.parse::<u32>().map_err(|_| DslError::parse(at, format!("integer {digits} out of range")))?;
            out.push(Spanned { tok: Tok::Int(n), at });
            continue;
        }
        if c == '"' {
            cur.bump();
            let mut s = String::new();
            loop {
                match cur.bump() {
                    None | Some('\n') => return Err(DslError::parse(at, String::from("unterminated string"))),
                    Some('"') => break,
                    Some('\\') => {
                        let esc_at = cur.here();
                        match cur.bump() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some('r') => s.push('\r'),
                            Some('t') => s.push('\t'),
                            other => {
                                return Err(DslError::parse(
                                    esc_at,
                                    format!("invalid escape {:?}", other.unwrap_or(' ')),
                                ))
                            }
                        }
                    }
                    Some(c) => s.push(c),
                }
            }
            out.push(Spanned { tok: Tok::Str(s), at });
            continue;
        }
        return Err(DslError::parse(at, format!("unexpected character {c:?}")));
    }
    Ok((out, cur.here()))
}
