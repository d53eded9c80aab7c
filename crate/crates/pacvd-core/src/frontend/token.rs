//! Tokenizer for the C subset. Comments, whitespace and preprocessor lines
//! are skipped; everything else becomes a token with line/column info.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokKind {
    Ident,
    Number,
    Str,
    Char,
    Punct,
    Unknown,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokKind,
    pub text: String,
    pub offset: usize,
    pub line: u32,
    pub col: u32,
}

impl Token {
    pub fn is_punct(&self, s: &str) -> bool {
        self.kind == TokKind::Punct && self.text == s
    }

    pub fn is_ident(&self, s: &str) -> bool {
        self.kind == TokKind::Ident && self.text == s
    }
}

const PUNCTS3: [&str; 3] = ["...", "<<=", ">>="];
const PUNCTS2: [&str; 19] = [
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=",
    "%=", "&=", "^=", "|=",
];

pub fn lex(text: &str) -> Vec<Token> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! bump {
        ($n:expr) => {{
            for k in 0..$n {
                if bytes[i + k] == b'\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            i += $n;
        }};
    }

    while i < bytes.len() {
        let c = bytes[i];
        // whitespace
        if c.is_ascii_whitespace() {
            bump!(1);
            continue;
        }
        // line comment
        if c == b'/' && i + 1 < bytes.len() && bytes[i + 1] == b'/' {
            while i < bytes.len() && bytes[i] != b'\n' {
                bump!(1);
            }
            continue;
        }
        // block comment
        if c == b'/' && i + 1 < bytes.len() && bytes[i + 1] == b'*' {
            bump!(2);
            while i + 1 < bytes.len() && !(bytes[i] == b'*' && bytes[i + 1] == b'/') {
                bump!(1);
            }
            if i + 1 < bytes.len() {
                bump!(2);
            } else if i < bytes.len() {
                bump!(1);
            }
            continue;
        }
        // preprocessor residue: skip to end of line (inputs are pre-expanded)
        if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                bump!(1);
            }
            continue;
        }
        let (tl, tc, to) = (line, col, i);
        // identifier / keyword
        if c == b'_' || c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i] == b'_' || bytes[i].is_ascii_alphanumeric()) {
                bump!(1);
            }
            toks.push(Token {
                kind: TokKind::Ident,
                text: text[start..i].to_string(),
                offset: to,
                line: tl,
                col: tc,
            });
            continue;
        }
        // number (int, hex, float, suffixes)
        if c.is_ascii_digit() || (c == b'.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit())
        {
            let start = i;
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric()
                    || bytes[i] == b'.'
                    || ((bytes[i] == b'+' || bytes[i] == b'-')
                        && i > start
                        && (bytes[i - 1] == b'e' || bytes[i - 1] == b'E')))
            {
                bump!(1);
            }
            toks.push(Token {
                kind: TokKind::Number,
                text: text[start..i].to_string(),
                offset: to,
                line: tl,
                col: tc,
            });
            continue;
        }
        // string / char literal, escapes respected, stored verbatim
        if c == b'"' || c == b'\'' {
            let quote = c;
            let start = i;
            bump!(1);
            let mut terminated = false;
            while i < bytes.len() {
                if bytes[i] == b'\\' && i + 1 < bytes.len() {
                    bump!(2);
                    continue;
                }
                if bytes[i] == quote {
                    bump!(1);
                    terminated = true;
                    break;
                }
                if bytes[i] == b'\n' {
                    break;
                }
                bump!(1);
            }
            toks.push(Token {
                kind: if terminated {
                    if quote == b'"' {
                        TokKind::Str
                    } else {
                        TokKind::Char
                    }
                } else {
                    TokKind::Unknown
                },
                text: text[start..i].to_string(),
                offset: to,
                line: tl,
                col: tc,
            });
            continue;
        }
        // punctuation, longest match first
        let rest = &text[i..];
        let mut matched = None;
        for p in PUNCTS3 {
            if rest.starts_with(p) {
                matched = Some(p);
                break;
            }
        }
        if matched.is_none() {
            for p in PUNCTS2 {
                if rest.starts_with(p) {
                    matched = Some(p);
                    break;
                }
            }
        }
        if matched.is_none() && c.is_ascii_punctuation() {
            matched = Some(&rest[..1]);
        }
        if let Some(p) = matched {
            let n = p.len();
            toks.push(Token {
                kind: TokKind::Punct,
                text: p.to_string(),
                offset: to,
                line: tl,
                col: tc,
            });
            bump!(n);
            continue;
        }
        // non-ASCII or otherwise unexpected byte
        let ch_len = text[i..].chars().next().map_or(1, |ch| ch.len_utf8());
        toks.push(Token {
            kind: TokKind::Unknown,
            text: text[i..i + ch_len].to_string(),
            offset: to,
            line: tl,
            col: tc,
        });
        bump!(ch_len);
    }
    toks.push(Token {
        kind: TokKind::Eof,
        text: String::new(),
        offset: bytes.len(),
        line,
        col,
    });
    toks
}
