use std::fmt;

/// 1-based source position.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Or,
    And,
    Backslash,
    LAngle,
    RAngle,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Dot,
    Colon,
    Comma,
    Semi,
    Arrow,
    Plus,
    Minus,
    Le,
    Ge,
    Eq,
    Ne,
    Star,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{}`", s),
            Tok::Int(n) => return write!(f, "integer `{}`", n),
            Tok::Str(s) => return write!(f, "string {:?}", s),
            Tok::Or => "\\/",
            Tok::And => "/\\",
            Tok::Backslash => "\\",
            Tok::LAngle => "<",
            Tok::RAngle => ">",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Dot => ".",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Arrow => "->",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Star => "*",
            Tok::Eof => "end of input",
        };
        write!(f, "`{}`", s)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug)]
pub(crate) struct LexError {
    pub pos: Pos,
    pub msg: String,
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Tokenizes `src`. `#` starts a line comment.
pub(crate) fn lex(src: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    let (mut line, mut col) = (1usize, 1usize);
    while i < chars.len() {
        let c = chars[i].1;
        let pos = Pos { line, col };
        let peek = chars.get(i + 1).map(|p| p.1);
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i].1 != '\n' {
                    i += 1;
                }
                continue;
            }
            '\\' if peek == Some('/') => {
                adv = 2;
                Tok::Or
            }
            '/' if peek == Some('\\') => {
                adv = 2;
                Tok::And
            }
            '\\' | 'λ' => Tok::Backslash,
            '∨' => Tok::Or,
            '∧' => Tok::And,
            '<' if peek == Some('=') => {
                adv = 2;
                Tok::Le
            }
            '>' if peek == Some('=') => {
                adv = 2;
                Tok::Ge
            }
            '!' if peek == Some('=') => {
                adv = 2;
                Tok::Ne
            }
            '-' if peek == Some('>') => {
                adv = 2;
                Tok::Arrow
            }
            '≤' => Tok::Le,
            '≥' => Tok::Ge,
            '≠' => Tok::Ne,
            '→' => Tok::Arrow,
            '−' | '-' => Tok::Minus,
            '<' => Tok::LAngle,
            '>' => Tok::RAngle,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '.' => Tok::Dot,
            ':' => Tok::Colon,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '+' => Tok::Plus,
            '=' => Tok::Eq,
            '*' | '×' => Tok::Star,
            'μ' => Tok::Ident("mu".into()),
            'ν' => Tok::Ident("nu".into()),
            '∀' => Tok::Ident("forall".into()),
            '∃' => Tok::Ident("exists".into()),
            '"' => {
                let mut j = i + 1;
                let mut s = String::new();
                while j < chars.len() && chars[j].1 != '"' {
                    if chars[j].1 == '\n' {
                        return Err(LexError { pos, msg: "unterminated string".into() });
                    }
                    s.push(chars[j].1);
                    j += 1;
                }
                if j >= chars.len() {
                    return Err(LexError { pos, msg: "unterminated string".into() });
                }
                adv = j + 1 - i;
                Tok::Str(s)
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].1.is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().map(|p| p.1).collect();
                let n = text.parse::<i64>().map_err(|_| LexError {
                    pos,
                    msg: format!("integer literal `{}` out of range", text),
                })?;
                adv = j - i;
                Tok::Int(n)
            }
            c if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j].1) {
                    j += 1;
                }
                adv = j - i;
                Tok::Ident(chars[i..j].iter().map(|p| p.1).collect())
            }
            other => {
                return Err(LexError { pos, msg: format!("unexpected character `{}`", other) })
            }
        };
        out.push(Token { tok, pos });
        i += adv;
        col += adv;
    }
    let pos = Pos { line, col };
    out.push(Token { tok: Tok::Eof, pos });
    Ok(out)
}

/// Cursor over a token stream shared by the text parsers.
#[derive(Clone)]
pub(crate) struct Cursor {
    toks: Vec<Token>,
    at: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        Cursor { toks, at: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }
}
