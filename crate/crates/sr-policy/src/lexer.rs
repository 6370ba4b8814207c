//! Tokenizer for `.sr` sources. `#` comments run to end of line and are
//! dropped. Keywords are case-sensitive uppercase; `true`/`false` lex as
//! booleans.

use crate::diag::{DiagCode, Diagnostic, SourceSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Signal,
    SignalGroup,
    DecisionTree,
    Route,
    Priority,
    When,
    Model,
    Backend,
    If,
    Else,
    And,
    Or,
    Not,
    Network,
    Agent,
    Deploy,
    Test,
    Global,
    Plugin,
}

impl Keyword {
    fn from_word(word: &str) -> Option<Keyword> {
        Some(match word {
            "SIGNAL" => Keyword::Signal,
            "SIGNAL_GROUP" => Keyword::SignalGroup,
            "DECISION_TREE" => Keyword::DecisionTree,
            "ROUTE" => Keyword::Route,
            "PRIORITY" => Keyword::Priority,
            "WHEN" => Keyword::When,
            "MODEL" => Keyword::Model,
            "BACKEND" => Keyword::Backend,
            "IF" => Keyword::If,
            "ELSE" => Keyword::Else,
            "AND" => Keyword::And,
            "OR" => Keyword::Or,
            "NOT" => Keyword::Not,
            "NETWORK" => Keyword::Network,
            "AGENT" => Keyword::Agent,
            "DEPLOY" => Keyword::Deploy,
            "TEST" => Keyword::Test,
            "GLOBAL" => Keyword::Global,
            "PLUGIN" => Keyword::Plugin,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Signal => "SIGNAL",
            Keyword::SignalGroup => "SIGNAL_GROUP",
            Keyword::DecisionTree => "DECISION_TREE",
            Keyword::Route => "ROUTE",
            Keyword::Priority => "PRIORITY",
            Keyword::When => "WHEN",
            Keyword::Model => "MODEL",
            Keyword::Backend => "BACKEND",
            Keyword::If => "IF",
            Keyword::Else => "ELSE",
            Keyword::And => "AND",
            Keyword::Or => "OR",
            Keyword::Not => "NOT",
            Keyword::Network => "NETWORK",
            Keyword::Agent => "AGENT",
            Keyword::Deploy => "DEPLOY",
            Keyword::Test => "TEST",
            Keyword::Global => "GLOBAL",
            Keyword::Plugin => "PLUGIN",
        }
    }

    /// Keywords that open a top-level block; used for error recovery.
    pub fn starts_block(self) -> bool {
        matches!(
            self,
            Keyword::Signal
                | Keyword::SignalGroup
                | Keyword::DecisionTree
                | Keyword::Route
                | Keyword::Backend
                | Keyword::Network
                | Keyword::Agent
                | Keyword::Deploy
                | Keyword::Test
                | Keyword::Global
                | Keyword::Plugin
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Kw(Keyword),
    Ident(String),
    Str(String),
    /// Numeric literal plus its raw spelling (needed for the two
    /// fraction-digit rule).
    Number(f64, String),
    Bool(bool),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Colon,
    Comma,
    Equals,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Kw(k) => format!("`{}`", k.as_str()),
            TokenKind::Ident(i) => format!("identifier `{}`", i),
            TokenKind::Str(_) => "string literal".to_string(),
            TokenKind::Number(_, raw) => format!("number `{}`", raw),
            TokenKind::Bool(b) => format!("`{}`", b),
            TokenKind::LBrace => "`{`".to_string(),
            TokenKind::RBrace => "`}`".to_string(),
            TokenKind::LBracket => "`[`".to_string(),
            TokenKind::RBracket => "`]`".to_string(),
            TokenKind::LParen => "`(`".to_string(),
            TokenKind::RParen => "`)`".to_string(),
            TokenKind::Colon => "`:`".to_string(),
            TokenKind::Comma => "`,`".to_string(),
            TokenKind::Equals => "`=`".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    file: &'a str,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> (u32, u32) {
        (self.line, self.col)
    }

    fn span_from(&self, start: (u32, u32)) -> SourceSpan {
        SourceSpan::new(self.file, start.0, start.1, self.line, self.col)
    }
}

/// Tokenizes `source`, collecting every lexical error instead of stopping at
/// the first. Never panics: unrecognizable bytes become diagnostics.
pub fn tokenize(source: &str, file: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        file,
    };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();

    while let Some(c) = cur.peek() {
        if c == '#' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c.is_whitespace() {
            cur.bump();
            continue;
        }

        let start = cur.here();
        let simple = match c {
            '{' => Some(TokenKind::LBrace),
            '}' => Some(TokenKind::RBrace),
            '[' => Some(TokenKind::LBracket),
            ']' => Some(TokenKind::RBracket),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            ':' => Some(TokenKind::Colon),
            ',' => Some(TokenKind::Comma),
            '=' => Some(TokenKind::Equals),
            _ => None,
        };
        if let Some(kind) = simple {
            cur.bump();
            tokens.push(Token {
                kind,
                span: cur.span_from(start),
            });
            continue;
        }

        if c == '"' {
            cur.bump();
            let mut value = String::new();
            let mut terminated = false;
            while let Some(c) = cur.peek() {
                if c == '"' {
                    cur.bump();
                    terminated = true;
                    break;
                }
                if c == '\n' {
                    break;
                }
                if c == '\\' {
                    cur.bump();
                    match cur.bump() {
                        Some('n') => value.push('\n'),
                        Some('t') => value.push('\t'),
                        Some('r') => value.push('\r'),
                        Some('"') => value.push('"'),
                        Some('\\') => value.push('\\'),
                        Some(other) => {
                            value.push('\\');
                            value.push(other);
                        }
                        None => break,
                    }
                    continue;
                }
                value.push(c);
                cur.bump();
            }
            if terminated {
                tokens.push(Token {
                    kind: TokenKind::Str(value),
                    span: cur.span_from(start),
                });
            } else {
                diags.push(Diagnostic::error(
                    DiagCode::E101UnterminatedString,
                    "unterminated string literal",
                    cur.span_from(start),
                ));
            }
            continue;
        }

        let negative = c == '-' && cur.peek2().is_some_and(|d| d.is_ascii_digit());
        if c.is_ascii_digit() || negative {
            let mut raw = String::new();
            if negative {
                raw.push('-');
                cur.bump();
            }
            let mut dots = 0usize;
            let mut trailing_dot = false;
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() {
                    raw.push(c);
                    cur.bump();
                    trailing_dot = false;
                } else if c == '.' {
                    dots += 1;
                    raw.push(c);
                    cur.bump();
                    trailing_dot = true;
                } else {
                    break;
                }
            }
            let span = cur.span_from(start);
            if dots > 1 || trailing_dot {
                diags.push(Diagnostic::error(
                    DiagCode::E102InvalidNumber,
                    format!("malformed number literal `{}`", raw),
                    span,
                ));
                continue;
            }
            if let Some(frac) = raw.split('.').nth(1) {
                if frac.len() > 2 {
                    diags.push(Diagnostic::error(
                        DiagCode::E104NumberPrecision,
                        format!(
                            "number `{}` has more than two fraction digits; policy reals are limited to two",
                            raw
                        ),
                        span,
                    ));
                    continue;
                }
            }
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => tokens.push(Token {
                    kind: TokenKind::Number(v, raw),
                    span,
                }),
                _ => diags.push(Diagnostic::error(
                    DiagCode::E102InvalidNumber,
                    format!("malformed number literal `{}`", raw),
                    span,
                )),
            }
            continue;
        }

        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    word.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            let span = cur.span_from(start);
            let kind = if let Some(kw) = Keyword::from_word(&word) {
                TokenKind::Kw(kw)
            } else if word == "true" {
                TokenKind::Bool(true)
            } else if word == "false" {
                TokenKind::Bool(false)
            } else {
                TokenKind::Ident(word)
            };
            tokens.push(Token { kind, span });
            continue;
        }

        cur.bump();
        diags.push(Diagnostic::error(
            DiagCode::E103UnknownCharacter,
            format!("unexpected character `{}`", c),
            cur.span_from(start),
        ));
    }

    (tokens, diags)
}
