use super::SyntaxError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Name(String),
    Int(i64),
    Float(f64),
    Str(String),
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

// Longest first.
const OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "**", "//", "==", "!=", "<=", ">=", "->", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "@=", ":=", "<<", ">>", "+", "-", "*", "/", "%", "@", "&", "|",
    "^", "~", "<", ">", "(", ")", "[", "]", "{", "}", ",", ":", ".", ";", "=",
];

struct Lexer<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    line: u32,
    line_start: usize,
    depth: usize,
    indents: Vec<u32>,
    out: Vec<Token>,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lx = Lexer {
        src: text.as_bytes(),
        text,
        pos: 0,
        line: 1,
        line_start: 0,
        depth: 0,
        indents: vec![0],
        out: Vec::new(),
    };
    lx.run()?;
    Ok(lx.out)
}

impl<'a> Lexer<'a> {
    fn col(&self) -> u32 {
        (self.pos - self.line_start) as u32 + 1
    }

    fn err(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            column: self.col(),
            message: msg.into(),
        }
    }

    fn push(&mut self, tok: Tok, line: u32, col: u32) {
        self.out.push(Token { tok, line, col });
    }

    fn peek(&self, off: usize) -> u8 {
        self.src.get(self.pos + off).copied().unwrap_or(0)
    }

    fn newline(&mut self) {
        self.pos += 1;
        self.line += 1;
        self.line_start = self.pos;
    }

    fn run(&mut self) -> Result<(), SyntaxError> {
        let mut at_line_start = true;
        while self.pos < self.src.len() {
            if at_line_start {
                // Blank and comment-only lines leave us at a line start.
                at_line_start = self.indentation()?;
                if at_line_start {
                    continue;
                }
            }
            let c = self.peek(0);
            match c {
                b'\n' => {
                    if self.depth == 0 && self.last_is_content() {
                        let (l, col) = (self.line, self.col());
                        self.push(Tok::Newline, l, col);
                    }
                    self.newline();
                    at_line_start = self.depth == 0;
                }
                b'\r' | b' ' | b'\t' | b'\x0c' => self.pos += 1,
                b'#' => {
                    while self.pos < self.src.len() && self.peek(0) != b'\n' {
                        self.pos += 1;
                    }
                }
                b'\\'
                    if self.peek(1) == b'\n'
                        || (self.peek(1) == b'\r' && self.peek(2) == b'\n') =>
                {
                    if self.peek(1) == b'\r' {
                        self.pos += 1;
                    }
                    self.pos += 1;
                    self.newline();
                }
                b'0'..=b'9' => self.number()?,
                b'.' if self.peek(1).is_ascii_digit() => self.number()?,
                b'"' | b'\'' => self.string(0)?,
                c if c.is_ascii_alphabetic() || c == b'_' || c >= 0x80 => {
                    let prefix = self.string_prefix_len();
                    if prefix > 0 {
                        self.string(prefix)?;
                    } else {
                        self.name();
                    }
                }
                _ => self.operator()?,
            }
        }
        if self.last_is_content() {
            let (l, col) = (self.line, self.col());
            self.push(Tok::Newline, l, col);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            let l = self.line;
            self.push(Tok::Dedent, l, 1);
        }
        let l = self.line;
        self.push(Tok::Eof, l, 1);
        Ok(())
    }

    fn last_is_content(&self) -> bool {
        !matches!(
            self.out.last().map(|t| &t.tok),
            None | Some(Tok::Newline) | Some(Tok::Indent) | Some(Tok::Dedent)
        )
    }

    /// Measures leading whitespace of a logical line and emits INDENT or
    /// DEDENT tokens. Returns true when the line is blank or a comment.
    fn indentation(&mut self) -> Result<bool, SyntaxError> {
        let mut width = 0u32;
        while self.pos < self.src.len() {
            match self.peek(0) {
                b' ' => width += 1,
                b'\t' => width = (width / 8 + 1) * 8,
                b'\x0c' | b'\r' => {}
                _ => break,
            }
            self.pos += 1;
        }
        match self.peek(0) {
            b'\n' => {
                self.newline();
                return Ok(true);
            }
            b'#' => {
                while self.pos < self.src.len() && self.peek(0) != b'\n' {
                    self.pos += 1;
                }
                if self.pos < self.src.len() {
                    self.newline();
                }
                return Ok(true);
            }
            0 if self.pos >= self.src.len() => return Ok(true),
            _ => {}
        }
        let current = *self.indents.last().expect("indent stack never empty");
        if width > current {
            self.indents.push(width);
            let l = self.line;
            self.push(Tok::Indent, l, 1);
        } else if width < current {
            while *self.indents.last().expect("non-empty") > width {
                self.indents.pop();
                let l = self.line;
                self.push(Tok::Dedent, l, 1);
            }
            if *self.indents.last().expect("non-empty") != width {
                return Err(self.err("unindent does not match any outer indentation level"));
            }
        }
        Ok(false)
    }

    fn name(&mut self) {
        let (line, col, start) = (self.line, self.col(), self.pos);
        while self.pos < self.src.len() {
            let c = self.peek(0);
            if c.is_ascii_alphanumeric() || c == b'_' || c >= 0x80 {
                self.pos += 1;
            } else {
                break;
            }
        }
        let word = self.text[start..self.pos].to_string();
        self.push(Tok::Name(word), line, col);
    }

    fn string_prefix_len(&self) -> usize {
        for len in [2, 1] {
            let Some(p) = self.text.get(self.pos..self.pos + len) else {
                continue;
            };
            let q = self.peek(len);
            if (q == b'"' || q == b'\'')
                && p.chars().all(|c| "rRbBuUfF".contains(c))
                && !(len == 2 && p.to_ascii_lowercase().contains('u'))
            {
                return len;
            }
        }
        0
    }

    fn string(&mut self, prefix: usize) -> Result<(), SyntaxError> {
        let (line, col) = (self.line, self.col());
        let raw = self.text[self.pos..self.pos + prefix]
            .to_ascii_lowercase()
            .contains('r');
        self.pos += prefix;
        let quote = self.peek(0);
        let triple = self.peek(1) == quote && self.peek(2) == quote;
        self.pos += if triple { 3 } else { 1 };
        let mut value = String::new();
        loop {
            if self.pos >= self.src.len() {
                return Err(SyntaxError {
                    line,
                    column: col,
                    message: "unterminated string literal".into(),
                });
            }
            let c = self.peek(0);
            if c == quote && (!triple || (self.peek(1) == quote && self.peek(2) == quote)) {
                self.pos += if triple { 3 } else { 1 };
                break;
            }
            if c == b'\n' {
                if !triple {
                    return Err(SyntaxError {
                        line,
                        column: col,
                        message: "unterminated string literal".into(),
                    });
                }
                value.push('\n');
                self.newline();
                continue;
            }
            if c == b'\\' && self.pos + 1 < self.src.len() {
                let n = self.peek(1);
                if n == b'\n' {
                    self.pos += 1;
                    self.newline();
                    continue;
                }
                if raw {
                    value.push('\\');
                    value.push(n as char);
                } else {
                    value.push(match n {
                        b'n' => '\n',
                        b't' => '\t',
                        b'r' => '\r',
                        b'0' => '\0',
                        other => other as char,
                    });
                }
                self.pos += 2;
                continue;
            }
            let ch = self.text[self.pos..].chars().next().expect("in bounds");
            value.push(ch);
            self.pos += ch.len_utf8();
        }
        self.push(Tok::Str(value), line, col);
        Ok(())
    }

    fn number(&mut self) -> Result<(), SyntaxError> {
        let (line, col, start) = (self.line, self.col(), self.pos);
        if self.peek(0) == b'0' && matches!(self.peek(1), b'x' | b'X' | b'o' | b'O' | b'b' | b'B') {
            let radix = match self.peek(1) {
                b'x' | b'X' => 16,
                b'o' | b'O' => 8,
                _ => 2,
            };
            self.pos += 2;
            while self.peek(0).is_ascii_alphanumeric() || self.peek(0) == b'_' {
                self.pos += 1;
            }
            let digits: String = self.text[start + 2..self.pos].replace('_', "");
            let v = i64::from_str_radix(&digits, radix).map_err(|_| {
                self.err(format!(
                    "invalid number literal {}",
                    &self.text[start..self.pos]
                ))
            })?;
            self.push(Tok::Int(v), line, col);
            return Ok(());
        }
        let mut float = false;
        while self.peek(0).is_ascii_digit() || self.peek(0) == b'_' {
            self.pos += 1;
        }
        if self.peek(0) == b'.' {
            float = true;
            self.pos += 1;
            while self.peek(0).is_ascii_digit() || self.peek(0) == b'_' {
                self.pos += 1;
            }
        }
        if matches!(self.peek(0), b'e' | b'E')
            && (self.peek(1).is_ascii_digit()
                || (matches!(self.peek(1), b'+' | b'-') && self.peek(2).is_ascii_digit()))
        {
            float = true;
            self.pos += 2;
            while self.peek(0).is_ascii_digit() {
                self.pos += 1;
            }
        }
        let imaginary = matches!(self.peek(0), b'j' | b'J');
        let literal = self.text[start..self.pos].replace('_', "");
        if imaginary {
            self.pos += 1;
        }
        if self.peek(0).is_ascii_alphabetic() || self.peek(0) == b'_' {
            return Err(self.err("invalid number literal"));
        }
        let tok = if float || imaginary {
            Tok::Float(
                literal
                    .parse()
                    .map_err(|_| self.err("invalid number literal"))?,
            )
        } else {
            match literal.parse::<i64>() {
                Ok(v) => Tok::Int(v),
                Err(_) => Tok::Float(
                    literal
                        .parse()
                        .map_err(|_| self.err("invalid number literal"))?,
                ),
            }
        };
        self.push(tok, line, col);
        Ok(())
    }

    fn operator(&mut self) -> Result<(), SyntaxError> {
        let (line, col) = (self.line, self.col());
        let rest = &self.text[self.pos..];
        let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) else {
            let ch = rest.chars().next().unwrap_or('?');
            return Err(self.err(format!("unexpected character {ch:?}")));
        };
        match *op {
            "(" | "[" | "{" => self.depth += 1,
            ")" | "]" | "}" => {
                if self.depth == 0 {
                    return Err(self.err(format!("unmatched {op:?}")));
                }
                self.depth -= 1;
            }
            _ => {}
        }
        self.pos += op.len();
        self.push(Tok::Op(op), line, col);
        Ok(())
    }
}
