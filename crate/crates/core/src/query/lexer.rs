use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Quoted(String),
    Number(f64),
    Str(String),
    Comma,
    Dot,
    LParen,
    RParen,
    Semi,
    Ge,
    Gt,
    Eq,
    Ne,
    Le,
    Lt,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) fn error_at(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::ParseError {
        line,
        column,
        message: message.into(),
    }
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: tl, column: tc });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '-' if chars.get(i + 1) == Some(&'-') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' if !chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) => push(Tok::Dot, 1, &mut i, &mut col),
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            '≥' => push(Tok::Ge, 1, &mut i, &mut col),
            '≤' => push(Tok::Le, 1, &mut i, &mut col),
            '≠' => push(Tok::Ne, 1, &mut i, &mut col),
            '=' => {
                let len = if chars.get(i + 1) == Some(&'=') { 2 } else { 1 };
                push(Tok::Eq, len, &mut i, &mut col)
            }
            '!' if chars.get(i + 1) == Some(&'=') => push(Tok::Ne, 2, &mut i, &mut col),
            '>' => match chars.get(i + 1) {
                Some('=') => push(Tok::Ge, 2, &mut i, &mut col),
                _ => push(Tok::Gt, 1, &mut i, &mut col),
            },
            '<' => match chars.get(i + 1) {
                Some('=') => push(Tok::Le, 2, &mut i, &mut col),
                Some('>') => push(Tok::Ne, 2, &mut i, &mut col),
                _ => push(Tok::Lt, 1, &mut i, &mut col),
            },
            '\'' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        None => return Err(error_at(tl, tc, "unterminated string literal")),
                        Some('\'') if chars.get(j + 1) == Some(&'\'') => {
                            s.push('\'');
                            j += 2;
                        }
                        Some('\'') => {
                            j += 1;
                            break;
                        }
                        Some(ch) => {
                            s.push(*ch);
                            j += 1;
                        }
                    }
                }
                let len = j - i;
                line += s.matches('\n').count();
                push(Tok::Str(s), len, &mut i, &mut col);
            }
            c if c.is_ascii_digit() || c == '.' || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit() || *d == '.')) => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.' || chars[j] == 'e' || chars[j] == 'E'
                    || ((chars[j] == '-' || chars[j] == '+') && matches!(chars[j - 1], 'e' | 'E')))
                {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let v: f64 = s.parse().map_err(|_| error_at(tl, tc, format!("malformed number `{s}`")))?;
                push(Tok::Number(v), j - i, &mut i, &mut col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                push(Tok::Ident(s), j - i, &mut i, &mut col);
            }
            '"' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '"' {
                    j += 1;
                }
                if j == chars.len() {
                    return Err(error_at(tl, tc, "unterminated quoted identifier"));
                }
                let s: String = chars[i + 1..j].iter().collect();
                push(Tok::Quoted(s), j + 1 - i, &mut i, &mut col);
            }
            other => return Err(error_at(tl, tc, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}
