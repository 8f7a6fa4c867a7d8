use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Quoted name literal, `'qry'`.
    Quoted(String),
    Int(i64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Comma,
    Dot,
    At,
    Colon,
    Assign,
    Plus,
    Minus,
    Star,
    Bar,
    BarBar,
    Bang,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Quoted(s) => format!("name '{s}'"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    pub fn text(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::At => "@",
            Tok::Colon => ":",
            Tok::Assign => ":=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Bar => "|",
            Tok::BarBar => "||",
            Tok::Bang => "!",
            Tok::Ident(_) | Tok::Quoted(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_char)
}

/// Splits source text into tokens. `#` starts a comment that runs to the
/// end of the line.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let err = |offset: usize, line: usize, column: usize, found: String| ParseError {
        offset,
        line,
        column,
        expected: vec![],
        found,
    };
    while i < chars.len() {
        let (off, c) = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let peek = chars.get(i + 1).map(|&(_, c)| c);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, offset: off, line: start_line, column: start_col });
            *i += len;
            *col += len;
        };
        match c {
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            '[' => push(Tok::LBracket, 1, &mut i, &mut col),
            ']' => push(Tok::RBracket, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            '@' => push(Tok::At, 1, &mut i, &mut col),
            '+' => push(Tok::Plus, 1, &mut i, &mut col),
            '-' => push(Tok::Minus, 1, &mut i, &mut col),
            '*' => push(Tok::Star, 1, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            '<' if peek == Some('=') => push(Tok::Le, 2, &mut i, &mut col),
            '<' => push(Tok::Lt, 1, &mut i, &mut col),
            '>' if peek == Some('=') => push(Tok::Ge, 2, &mut i, &mut col),
            '>' => push(Tok::Gt, 1, &mut i, &mut col),
            '!' if peek == Some('=') => push(Tok::Ne, 2, &mut i, &mut col),
            '!' => push(Tok::Bang, 1, &mut i, &mut col),
            ':' if peek == Some('=') => push(Tok::Assign, 2, &mut i, &mut col),
            ':' => push(Tok::Colon, 1, &mut i, &mut col),
            '|' if peek == Some('|') => push(Tok::BarBar, 2, &mut i, &mut col),
            '|' => push(Tok::Bar, 1, &mut i, &mut col),
            '\'' => {
                let mut j = i + 1;
                let mut text = String::new();
                loop {
                    match chars.get(j) {
                        None | Some((_, '\n')) => {
                            return Err(err(off, start_line, start_col, "unterminated name literal".into()));
                        }
                        Some((_, '\'')) => break,
                        Some(&(_, ch)) => text.push(ch),
                    }
                    j += 1;
                }
                let len = j + 1 - i;
                push(Tok::Quoted(text), len, &mut i, &mut col);
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].1.is_ascii_digit() {
                    j += 1;
                }
                let end = chars.get(j).map(|&(o, _)| o).unwrap_or(src.len());
                let n: i64 = src[off..end]
                    .parse()
                    .map_err(|_| err(off, start_line, start_col, "integer literal out of range".into()))?;
                push(Tok::Int(n), j - i, &mut i, &mut col);
            }
            c if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j].1) {
                    j += 1;
                }
                let end = chars.get(j).map(|&(o, _)| o).unwrap_or(src.len());
                push(Tok::Ident(src[off..end].to_string()), j - i, &mut i, &mut col);
            }
            other => {
                return Err(err(off, start_line, start_col, format!("character `{other}`")));
            }
        }
    }
    out.push(Token { tok: Tok::Eof, offset: src.len(), line, column: col });
    Ok(out)
}
