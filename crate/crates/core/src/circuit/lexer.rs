//! Tokenizer shared by the native grammar and the interchange importer.

use super::CircuitError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    Str(String),
    Sym(char),
    /// `->`
    Arrow,
    /// `==`
    EqEq,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, CircuitError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };

        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(1, &mut i, &mut col);
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Ident(word),
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(1, &mut i, &mut col);
            }
            if i < chars.len() && chars[i] == '.' {
                real = true;
                advance(1, &mut i, &mut col);
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(1, &mut i, &mut col);
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    col += j - i;
                    i = j;
                }
            }
            let lexeme: String = chars[start..i].iter().collect();
            let syntax = |message: String| CircuitError::Syntax {
                line: start_line,
                column: start_col,
                message,
            };
            let tok = if real {
                Tok::Real(
                    lexeme
                        .parse()
                        .map_err(|_| syntax(format!("bad number `{lexeme}`")))?,
                )
            } else {
                Tok::Int(
                    lexeme
                        .parse()
                        .map_err(|_| syntax(format!("integer `{lexeme}` too large")))?,
                )
            };
            out.push(Token {
                tok,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if c == '"' {
            let start = i + 1;
            advance(1, &mut i, &mut col);
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                advance(1, &mut i, &mut col);
            }
            if chars.get(i) != Some(&'"') {
                return Err(CircuitError::Syntax {
                    line: start_line,
                    column: start_col,
                    message: "unterminated string".into(),
                });
            }
            let s: String = chars[start..i].iter().collect();
            advance(1, &mut i, &mut col);
            out.push(Token {
                tok: Tok::Str(s),
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            advance(2, &mut i, &mut col);
            out.push(Token {
                tok: Tok::Arrow,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if c == '=' && chars.get(i + 1) == Some(&'=') {
            advance(2, &mut i, &mut col);
            out.push(Token {
                tok: Tok::EqEq,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if "();,[]{}+-*/^".contains(c) {
            advance(1, &mut i, &mut col);
            out.push(Token {
                tok: Tok::Sym(c),
                line: start_line,
                column: start_col,
            });
            continue;
        }
        return Err(CircuitError::Syntax {
            line: start_line,
            column: start_col,
            message: format!("unexpected character `{c}`"),
        });
    }
    Ok(out)
}

/// Cursor over a token stream with error helpers.
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
    eof_line: usize,
}

impl Cursor {
    pub fn new(tokens: Vec<Token>, text: &str) -> Self {
        let eof_line = text.lines().count().max(1);
        Self {
            tokens,
            pos: 0,
            eof_line,
        }
    }

    pub fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    /// Line and column of the next token, or the end of input.
    pub fn here(&self) -> (usize, usize) {
        self.peek()
            .map(|t| (t.line, t.column))
            .unwrap_or((self.eof_line, 1))
    }

    pub fn error(&self, message: impl Into<String>) -> CircuitError {
        let (line, column) = self.here();
        CircuitError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    pub fn eat_sym(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, c: char) -> Result<(), CircuitError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, usize), CircuitError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s),
                line,
                ..
            }) => {
                let out = (s.clone(), *line);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    pub fn expect_int(&mut self) -> Result<(usize, usize), CircuitError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Int(v),
                line,
                ..
            }) => {
                let out = (*v as usize, *line);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.error("expected integer")),
        }
    }

    /// Parses an angle expression: numbers, `pi`, `+ - * / ^`, parentheses.
    pub fn expr(&mut self) -> Result<f64, CircuitError> {
        let mut acc = self.term()?;
        loop {
            if self.eat_sym('+') {
                acc += self.term()?;
            } else if self.eat_sym('-') {
                acc -= self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<f64, CircuitError> {
        let mut acc = self.power()?;
        loop {
            if self.eat_sym('*') {
                acc *= self.power()?;
            } else if self.eat_sym('/') {
                acc /= self.power()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<f64, CircuitError> {
        let base = self.unary()?;
        if self.eat_sym('^') {
            let exp = self.power()?;
            Ok(base.powf(exp))
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<f64, CircuitError> {
        if self.eat_sym('-') {
            return Ok(-self.unary()?);
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        if self.eat_sym('(') {
            let v = self.expr()?;
            self.expect_sym(')')?;
            return Ok(v);
        }
        match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(v as f64)
            }
            Some(Tok::Real(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Ident(name)) if name == "pi" => {
                self.pos += 1;
                Ok(std::f64::consts::PI)
            }
            _ => Err(self.error("expected number")),
        }
    }
}
