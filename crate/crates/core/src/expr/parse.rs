//! Recursive descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')' | '|' expr '|'
//! ```
//!
//! `^` is right associative and binds tighter than a leading minus, so
//! `-x^2` is `-(x^2)` and `2^-1` is `2^(-1)`.

use super::{Expr, Function};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {expected}, found {found}")]
    Expected { expected: &'static str, found: String },
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("malformed number {0:?}")]
    BadNumber(String),
    #[error("trailing input {0:?}")]
    Trailing(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Bar,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(n) => format!("number {n}"),
            Token::Ident(s) => format!("identifier {s:?}"),
            Token::Plus => "'+'".into(),
            Token::Minus => "'-'".into(),
            Token::Star => "'*'".into(),
            Token::Slash => "'/'".into(),
            Token::Caret => "'^'".into(),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::Bar => "'|'".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    /// Next token and its starting offset, without consuming it.
    fn peek(&mut self) -> Result<Option<(Token, usize, usize)>, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let Some(&c) = bytes.get(start) else {
            return Ok(None);
        };
        let single = |t| Ok(Some((t, start, start + 1)));
        match c {
            b'+' => single(Token::Plus),
            b'-' => single(Token::Minus),
            b'*' => single(Token::Star),
            b'/' => single(Token::Slash),
            b'^' => single(Token::Caret),
            b'(' => single(Token::LParen),
            b')' => single(Token::RParen),
            b'|' => single(Token::Bar),
            b'0'..=b'9' | b'.' => {
                let end = scan_number(bytes, start);
                let text = &self.src[start..end];
                match text.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(Some((Token::Number(v), start, end))),
                    _ => Err(ParseError { offset: start, kind: ParseErrorKind::BadNumber(text.to_string()) }),
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = start;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                    end += 1;
                }
                Ok(Some((Token::Ident(self.src[start..end].to_string()), start, end)))
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('\0');
                Err(ParseError { offset: start, kind: ParseErrorKind::UnexpectedChar(ch) })
            }
        }
    }

    fn bump(&mut self, end: usize) {
        self.pos = end;
    }
}

fn scan_number(bytes: &[u8], start: usize) -> usize {
    let mut end = start;
    let digits = |end: &mut usize| {
        while *end < bytes.len() && bytes[*end].is_ascii_digit() {
            *end += 1;
        }
    };
    digits(&mut end);
    if end < bytes.len() && bytes[end] == b'.' {
        end += 1;
        digits(&mut end);
    }
    if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
        let mut exp_end = end + 1;
        if exp_end < bytes.len() && (bytes[exp_end] == b'+' || bytes[exp_end] == b'-') {
            exp_end += 1;
        }
        let digits_start = exp_end;
        digits(&mut exp_end);
        if exp_end > digits_start {
            end = exp_end;
        }
    }
    end
}

struct Parser<'a> {
    lex: Lexer<'a>,
}

impl Parser<'_> {
    fn peek(&mut self) -> Result<Option<(Token, usize, usize)>, ParseError> {
        self.lex.peek()
    }

    fn expect(&mut self, want: Token, expected: &'static str) -> Result<(), ParseError> {
        match self.peek()? {
            Some((tok, _, end)) if tok == want => {
                self.lex.bump(end);
                Ok(())
            }
            Some((tok, start, _)) => {
                Err(ParseError { offset: start, kind: ParseErrorKind::Expected { expected, found: tok.describe() } })
            }
            None => Err(self.end_error()),
        }
    }

    fn end_error(&self) -> ParseError {
        ParseError { offset: self.lex.src.len(), kind: ParseErrorKind::UnexpectedEnd }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek()? {
                Some((Token::Plus, _, end)) => {
                    self.lex.bump(end);
                    lhs = lhs + self.term()?;
                }
                Some((Token::Minus, _, end)) => {
                    self.lex.bump(end);
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek()? {
                Some((Token::Star, _, end)) => {
                    self.lex.bump(end);
                    lhs = lhs * self.factor()?;
                }
                Some((Token::Slash, _, end)) => {
                    self.lex.bump(end);
                    lhs = lhs / self.factor()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if let Some((Token::Minus, _, end)) = self.peek()? {
            self.lex.bump(end);
            return Ok(-self.factor()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some((Token::Caret, _, end)) = self.peek()? {
            self.lex.bump(end);
            let exponent = self.factor()?;
            return Ok(base.pow(exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some((tok, start, end)) = self.peek()? else {
            return Err(self.end_error());
        };
        match tok {
            Token::Number(v) => {
                self.lex.bump(end);
                Ok(Expr::Const(v))
            }
            Token::Ident(name) => {
                self.lex.bump(end);
                if let Some((Token::LParen, _, paren_end)) = self.peek()? {
                    let func = Function::from_name(&name)
                        .ok_or(ParseError { offset: start, kind: ParseErrorKind::UnknownFunction(name.clone()) })?;
                    self.lex.bump(paren_end);
                    let arg = self.expr()?;
                    self.expect(Token::RParen, "')'")?;
                    Ok(func.apply(arg))
                } else if Function::from_name(&name).is_some() {
                    Err(ParseError {
                        offset: end,
                        kind: ParseErrorKind::Expected {
                            expected: "'(' after function name",
                            found: self.describe_next()?,
                        },
                    })
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Token::LParen => {
                self.lex.bump(end);
                let inner = self.expr()?;
                self.expect(Token::RParen, "')'")?;
                Ok(inner)
            }
            Token::Bar => {
                self.lex.bump(end);
                let inner = self.expr()?;
                self.expect(Token::Bar, "closing '|'")?;
                Ok(inner.abs())
            }
            other => Err(ParseError {
                offset: start,
                kind: ParseErrorKind::Expected { expected: "an operand", found: other.describe() },
            }),
        }
    }

    fn describe_next(&mut self) -> Result<String, ParseError> {
        Ok(match self.peek()? {
            Some((tok, _, _)) => tok.describe(),
            None => "end of input".into(),
        })
    }
}

/// Parses a complete expression; any unconsumed input is an error.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let (expr, consumed) = parse_prefix(text)?;
    let rest = &text[consumed..];
    if rest.trim().is_empty() {
        Ok(expr)
    } else {
        let offset = consumed + (rest.len() - rest.trim_start().len());
        Err(ParseError { offset, kind: ParseErrorKind::Trailing(rest.trim().to_string()) })
    }
}

/// Parses the longest expression at the start of `text` and returns it with
/// the number of bytes consumed. Used for `|`-separated coefficient lists,
/// where a bar that cannot continue an expression acts as a separator.
pub fn parse_prefix(text: &str) -> Result<(Expr, usize), ParseError> {
    let mut parser = Parser { lex: Lexer { src: text, pos: 0 } };
    let expr = parser.expr()?;
    Ok((expr, parser.lex.pos))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var("x")
    }

    #[test]
    fn grammar_forced_trees() {
        assert_eq!(parse("x^2 + 1/x").unwrap(), x().powf(2.0) + Expr::one() / x());
        assert_eq!(parse("exp(-x^2)").unwrap(), (-x().powf(2.0)).exp());
        assert_eq!(parse("3*x^2").unwrap(), Expr::num(3.0) * x().powf(2.0));
    }

    #[test]
    fn precedence_and_associativity() {
        // right-associative power
        assert_eq!(parse("x^2^3").unwrap(), x().pow(Expr::num(2.0).powf(3.0)));
        // exponent may carry its own minus
        assert_eq!(parse("x^-1.5").unwrap(), x().pow(-Expr::num(1.5)));
        // left-associative subtraction and division
        assert_eq!(parse("x-1-2").unwrap(), (x() - 1.0) - 2.0);
        assert_eq!(parse("x/2/3").unwrap(), (x() / 2.0) / 3.0);
        assert_eq!(parse("--x").unwrap(), -(-x()));
        assert_eq!(parse("-x*y").unwrap(), -x() * Expr::var("y"));
    }

    #[test]
    fn abs_bars_and_functions() {
        assert_eq!(parse("|x|").unwrap(), x().abs());
        assert_eq!(parse("abs(x)").unwrap(), x().abs());
        assert_eq!(parse("|x|*|y|").unwrap(), x().abs() * Expr::var("y").abs());
        assert_eq!(parse("||x||").unwrap(), x().abs().abs());
        assert_eq!(parse("sqrt(ln(cos(sin(x))))").unwrap(), x().sin().cos().ln().sqrt());
    }

    #[test]
    fn numbers() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse(".5").unwrap(), Expr::Const(0.5));
        assert_eq!(parse("2.").unwrap(), Expr::Const(2.0));
        assert_eq!(parse("1E+2").unwrap(), Expr::Const(100.0));
        let err = parse("1e999").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::BadNumber(_)));
    }

    #[test]
    fn errors_carry_offsets() {
        let err = parse("x + ").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(err.offset, 4);

        let err = parse("foo(x)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownFunction("foo".into()));
        assert_eq!(err.offset, 0);

        let err = parse("x $ y").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('$'));
        assert_eq!(err.offset, 2);

        let err = parse("(x + 1").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);

        let err = parse("x y").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Trailing("y".into()));
        assert_eq!(err.offset, 2);

        assert!(parse("exp + 1").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn prefix_stops_at_separator() {
        let (e, used) = parse_prefix("x | y | z").unwrap();
        assert_eq!(e, x());
        assert_eq!("x | y | z"[used..].trim_start(), "| y | z");
        let (e, used) = parse_prefix("|x| | y").unwrap();
        assert_eq!(e, x().abs());
        assert_eq!("|x| | y"[used..].trim_start(), "| y");
    }
}
