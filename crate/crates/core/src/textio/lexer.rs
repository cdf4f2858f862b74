use super::{ParseError, SourceSpan, KEYWORDS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Identifier or keyword; keywords may contain `-`.
    Word(String),
    Nat(u64),
    Str(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Colon,
    Comma,
    Dot,
    DotDot,
    Star,
    Arrow,
    Triangle,
    FatArrow,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Word(w) if KEYWORDS.contains(&w.as_str()) => format!("keyword '{w}'"),
            Tok::Word(w) => format!("identifier '{w}'"),
            Tok::Nat(n) => format!("number {n}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Colon => "':'".into(),
            Tok::Comma => "','".into(),
            Tok::Dot => "'.'".into(),
            Tok::DotDot => "'..'".into(),
            Tok::Star => "'*'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::Triangle => "'<|'".into(),
            Tok::FatArrow => "'=>'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    let err = |span: SourceSpan, expected: &str, found: String| ParseError {
        span,
        expected: expected.to_string(),
        found,
    };

    while i < chars.len() {
        let c = chars[i];
        let span = SourceSpan { line, column: col };
        let peek = chars.get(i + 1).copied();
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut i, &mut col);
                continue;
            }
            '/' if peek == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    advance(1, &mut i, &mut col);
                }
                continue;
            }
            '{' | '}' | '[' | ']' | ':' | ',' | '*' => {
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ':' => Tok::Colon,
                    ',' => Tok::Comma,
                    _ => Tok::Star,
                };
                out.push(Token { tok, span });
                advance(1, &mut i, &mut col);
            }
            '.' => {
                if peek == Some('.') {
                    out.push(Token { tok: Tok::DotDot, span });
                    advance(2, &mut i, &mut col);
                } else {
                    out.push(Token { tok: Tok::Dot, span });
                    advance(1, &mut i, &mut col);
                }
            }
            '-' if peek == Some('>') => {
                out.push(Token { tok: Tok::Arrow, span });
                advance(2, &mut i, &mut col);
            }
            '<' if peek == Some('|') => {
                out.push(Token { tok: Tok::Triangle, span });
                advance(2, &mut i, &mut col);
            }
            '=' if peek == Some('>') => {
                out.push(Token { tok: Tok::FatArrow, span });
                advance(2, &mut i, &mut col);
            }
            '"' => {
                let mut text = String::new();
                advance(1, &mut i, &mut col);
                loop {
                    match chars.get(i) {
                        None | Some('\n') => {
                            return Err(err(span, "closing '\"'", "end of line".into()));
                        }
                        Some('"') => {
                            advance(1, &mut i, &mut col);
                            break;
                        }
                        Some('\\') => match chars.get(i + 1) {
                            Some(&e @ ('"' | '\\')) => {
                                text.push(e);
                                advance(2, &mut i, &mut col);
                            }
                            other => {
                                let here = SourceSpan { line, column: col };
                                return Err(err(
                                    here,
                                    "escape \\\" or \\\\",
                                    other.map_or("end of input".into(), |c| format!("'\\{c}'")),
                                ));
                            }
                        },
                        Some(&ch) => {
                            text.push(ch);
                            advance(1, &mut i, &mut col);
                        }
                    }
                }
                out.push(Token { tok: Tok::Str(text), span });
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(1, &mut i, &mut col);
                }
                let digits: String = chars[start..i].iter().collect();
                let n = digits
                    .parse::<u64>()
                    .map_err(|_| err(span, "a number that fits in 64 bits", digits.clone()))?;
                out.push(Token { tok: Tok::Nat(n), span });
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                loop {
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        advance(1, &mut i, &mut col);
                    }
                    // Hyphenated keywords: `-` directly followed by a letter.
                    if chars.get(i) == Some(&'-') && chars.get(i + 1).is_some_and(char::is_ascii_alphabetic) {
                        advance(1, &mut i, &mut col);
                        continue;
                    }
                    break;
                }
                out.push(Token { tok: Tok::Word(chars[start..i].iter().collect()), span });
            }
            other => {
                return Err(err(span, "a token", format!("'{other}'")));
            }
        }
    }
    out.push(Token { tok: Tok::Eof, span: SourceSpan { line, column: col } });
    Ok(out)
}

fn advance(n: usize, i: &mut usize, col: &mut usize) {
    *i += n;
    *col += n;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn punctuation_and_words() {
        assert_eq!(
            toks("a.b -> {x} [0..*] <| => // note\nerase-class"),
            vec![
                Tok::Word("a".into()),
                Tok::Dot,
                Tok::Word("b".into()),
                Tok::Arrow,
                Tok::LBrace,
                Tok::Word("x".into()),
                Tok::RBrace,
                Tok::LBracket,
                Tok::Nat(0),
                Tok::DotDot,
                Tok::Star,
                Tok::RBracket,
                Tok::Triangle,
                Tok::FatArrow,
                Tok::Word("erase-class".into()),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn arrow_after_identifier() {
        assert_eq!(toks("r->{}")[..2], [Tok::Word("r".into()), Tok::Arrow]);
    }

    #[test]
    fn strings_and_positions() {
        let t = tokenize("x\n  \"a\\\"b\"").unwrap();
        assert_eq!(t[1].tok, Tok::Str("a\"b".into()));
        assert_eq!(t[1].span, SourceSpan { line: 2, column: 3 });
        assert!(tokenize("\"open").is_err());
        let e = tokenize("a # b").unwrap_err();
        assert_eq!(e.span, SourceSpan { line: 1, column: 3 });
    }
}
