use super::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Var(String),
    Name(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Dot,
    /// `:-`
    Neck,
    Colon,
    /// `=>`
    Arrow,
    Plus,
    Minus,
    Star,
    /// `=`
    Unify,
    /// `=:=`
    ArithEq,
    Gt,
    Ge,
    Lt,
    /// `=<`
    Le,
    Bang,
    Semicolon,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Var(v) => format!("variable `{v}`"),
            Tok::Name(n) => format!("name `{n}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Neck => ":-",
            Tok::Colon => ":",
            Tok::Arrow => "=>",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Unify => "=",
            Tok::ArithEq => "=:=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Lt => "<",
            Tok::Le => "=<",
            Tok::Bang => "!",
            Tok::Semicolon => ";",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug)]
pub(crate) struct LexError {
    pub span: Span,
    pub message: String,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, column: col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(LexError { span, message: "unterminated block comment".into() });
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let text: String = chars[start..i].iter().collect();
            let n = text
                .parse::<i64>()
                .map_err(|_| LexError { span, message: format!("integer literal `{text}` out of range") })?;
            out.push(Token { tok: Tok::Int(n), span });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if c.is_uppercase() || c == '_' { Tok::Var(text) } else { Tok::Name(text) };
            out.push(Token { tok, span });
            continue;
        }
        if c == '\'' {
            bump!();
            let mut text = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(LexError { span, message: "unterminated quoted name".into() })
                    }
                    Some('\\') => {
                        bump!();
                        if let Some(&esc) = chars.get(i) {
                            text.push(esc);
                            bump!();
                        }
                    }
                    Some('\'') => {
                        bump!();
                        break;
                    }
                    Some(&ch) => {
                        text.push(ch);
                        bump!();
                    }
                }
            }
            out.push(Token { tok: Tok::Name(text), span });
            continue;
        }

        let rest = |s: &str| s.chars().enumerate().all(|(k, ch)| chars.get(i + k) == Some(&ch));
        let (tok, len) = if rest("=:=") {
            (Tok::ArithEq, 3)
        } else if rest(":-") {
            (Tok::Neck, 2)
        } else if rest("=>") {
            (Tok::Arrow, 2)
        } else if rest("=<") {
            (Tok::Le, 2)
        } else if rest(">=") {
            (Tok::Ge, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                ':' => Tok::Colon,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '=' => Tok::Unify,
                '>' => Tok::Gt,
                '<' => Tok::Lt,
                '!' => Tok::Bang,
                ';' => Tok::Semicolon,
                other => {
                    return Err(LexError { span, message: format!("unexpected character `{other}`") });
                }
            };
            (t, 1)
        };
        for _ in 0..len {
            bump!();
        }
        out.push(Token { tok, span });
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, column: col } });
    Ok(out)
}
