//! Tokenizer for the s-expression syntax. Tracks 1-based line/column
//! for error reporting; `;` starts a comment running to end of line.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    LParen,
    RParen,
    /// Bare symbol: identifiers and `=`.
    Symbol,
    /// `?name` variable.
    Variable,
    /// `:keyword` section marker.
    Keyword,
    Number,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
#[error("line {line}, column {col}: unexpected character `{ch}`")]
pub struct LexError {
    pub ch: char,
    pub line: u32,
    pub col: u32,
}

fn is_symbol_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-' || c == '_'
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();

    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let bump = |c: char, line: &mut u32, col: &mut u32| {
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        match c {
            '(' | ')' => {
                chars.next();
                bump(c, &mut line, &mut col);
                tokens.push(Token {
                    kind: if c == '(' { TokenKind::LParen } else { TokenKind::RParen },
                    text: c.to_string(),
                    line: tline,
                    col: tcol,
                });
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    chars.next();
                    bump(c, &mut line, &mut col);
                    if c == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {
                chars.next();
                bump(c, &mut line, &mut col);
            }
            '?' | ':' => {
                let kind = if c == '?' { TokenKind::Variable } else { TokenKind::Keyword };
                chars.next();
                bump(c, &mut line, &mut col);
                let mut text = String::new();
                while let Some(&n) = chars.peek() {
                    if is_symbol_char(n) {
                        text.push(n);
                        chars.next();
                        bump(n, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                if text.is_empty() {
                    return Err(LexError { ch: c, line: tline, col: tcol });
                }
                tokens.push(Token { kind, text, line: tline, col: tcol });
            }
            '=' | '-' => {
                // `-` only appears standalone as the typed-list separator.
                chars.next();
                bump(c, &mut line, &mut col);
                tokens.push(Token {
                    kind: TokenKind::Symbol,
                    text: c.to_string(),
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_ascii_digit() => {
                let mut text = String::new();
                while let Some(&n) = chars.peek() {
                    if n.is_ascii_digit() || n == '.' {
                        text.push(n);
                        chars.next();
                        bump(n, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Number,
                    text,
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_ascii_alphabetic() => {
                let mut text = String::new();
                while let Some(&n) = chars.peek() {
                    if is_symbol_char(n) {
                        text.push(n);
                        chars.next();
                        bump(n, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Symbol,
                    text,
                    line: tline,
                    col: tcol,
                });
            }
            other => {
                return Err(LexError { ch: other, line: tline, col: tcol });
            }
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracks_positions_across_lines() {
        let tokens = tokenize("(define\n  (domain d) ; comment\n  ?x :strips 2.5)").unwrap();
        let domain = tokens.iter().find(|t| t.text == "domain").unwrap();
        assert_eq!((domain.line, domain.col), (2, 4));
        let var = tokens.iter().find(|t| t.kind == TokenKind::Variable).unwrap();
        assert_eq!(var.text, "x");
        assert_eq!(var.line, 3);
        let num = tokens.iter().find(|t| t.kind == TokenKind::Number).unwrap();
        assert_eq!(num.text, "2.5");
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("(foo @bar)").unwrap_err();
        assert_eq!(err.ch, '@');
        assert_eq!(err.col, 6);
    }
}
