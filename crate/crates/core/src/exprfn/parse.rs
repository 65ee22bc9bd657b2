//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := unary ("^" factor)?
//! unary  := "-" unary | atom
//! atom   := number | ident | ident "(" expr ")" | "(" expr ")"
//! ```
//!
//! Exponents must fold to a constant. Note that unary minus binds tighter than
//! `^`, so `-t^2` is `(-t)^2`.

use thiserror::Error;

use super::{Expr, Func, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("exponent at byte {offset} does not reduce to a constant")]
    NonConstantExponent { offset: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number {x}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value = text.parse::<f64>().map_err(|_| ParseError::Syntax {
                    offset: start,
                    expected: vec!["number"],
                    found: format!("`{text}`"),
                })?;
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: vec!["number", "identifier", "operator", "parenthesis"],
                    found: format!("`{ch}`"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: Vec<&'static str>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.offset(),
            expected,
            found: self.peek().describe(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = lhs + self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = lhs * self.factor()?;
                }
                Tok::Slash => {
                    self.bump();
                    lhs = lhs / self.factor()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.unary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let offset = self.offset();
        let exponent = self.factor()?.simplify();
        match exponent {
            Expr::Const(e) => Ok(base.pow(e)),
            _ => Err(ParseError::NonConstantExponent { offset }),
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Expr::Const(x))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(func) = Func::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return self.fail(vec!["`(`"]);
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::call(func, arg))
                } else if let Some(var) = Var::from_name(&name) {
                    Ok(Expr::Var(var))
                } else {
                    Err(ParseError::UnknownIdentifier { name, offset })
                }
            }
            _ => self.fail(vec!["number", "identifier", "`(`", "`-`"]),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            self.fail(vec!["`)`", "operator"])
        }
    }
}

/// Parses an expression from text.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail(vec!["operator", "end of input"]);
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Box<Expr> {
        Box::new(Expr::Const(x))
    }

    fn t() -> Box<Expr> {
        Box::new(Expr::Var(Var::T))
    }

    #[test]
    fn single_variable() {
        assert_eq!(parse("t").unwrap(), Expr::Var(Var::T));
        assert_eq!(parse("  vx ").unwrap(), Expr::Var(Var::Vx));
    }

    #[test]
    fn unary_minus_binds_to_the_first_factor() {
        // grammar: unary sits below term, so the sign attaches to 0.2
        let e = parse("exp(-0.2*t)").unwrap();
        let expected = Expr::Call(Func::Exp, Box::new(Expr::Mul(Box::new(Expr::Neg(c(0.2))), t())));
        assert_eq!(e, expected);
    }

    #[test]
    fn reciprocal_power() {
        let e = parse("1/(1+t)^4").unwrap();
        let expected = Expr::Div(c(1.0), Box::new(Expr::Pow(Box::new(Expr::Add(c(1.0), t())), 4.0)));
        assert_eq!(e, expected);
    }

    #[test]
    fn power_is_right_associative_and_folds_exponent() {
        let e = parse("t^3^2").unwrap();
        assert_eq!(e, Expr::Pow(t(), 9.0));
        let e = parse("t^-2").unwrap();
        assert_eq!(e, Expr::Pow(t(), -2.0));
        let e = parse("t^(1/2)").unwrap();
        assert_eq!(e, Expr::Pow(t(), 0.5));
    }

    #[test]
    fn scientific_numbers() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse(".25").unwrap(), Expr::Const(0.25));
        assert_eq!(parse("2E+2").unwrap(), Expr::Const(200.0));
    }

    #[test]
    fn precedence() {
        let e = parse("1+2*t-t/4").unwrap();
        assert_eq!(e.eval_t(4.0_f64).unwrap(), 8.0);
        let e = parse("-t^2").unwrap();
        assert_eq!(e.eval_t(3.0_f64).unwrap(), 9.0);
        let e = parse("-(t^2)").unwrap();
        assert_eq!(e.eval_t(3.0_f64).unwrap(), -9.0);
    }

    #[test]
    fn syntax_errors_carry_offset_and_expectation() {
        match parse("1 + * t") {
            Err(ParseError::Syntax { offset, expected, .. }) => {
                assert_eq!(offset, 4);
                assert!(expected.contains(&"number"));
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse("sin(t") {
            Err(ParseError::Syntax { offset, expected, .. }) => {
                assert_eq!(offset, 5);
                assert!(expected.contains(&"`)`"));
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse("sin t") {
            Err(ParseError::Syntax { offset: 4, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse("t t") {
            Err(ParseError::Syntax { offset: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("2 # 3"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse(""), Err(ParseError::Syntax { offset: 0, .. })));
    }

    #[test]
    fn unknown_identifier() {
        assert_eq!(
            parse("2*omega"),
            Err(ParseError::UnknownIdentifier {
                name: "omega".into(),
                offset: 2
            })
        );
    }

    #[test]
    fn non_constant_exponent() {
        assert_eq!(parse("t^t"), Err(ParseError::NonConstantExponent { offset: 2 }));
    }
}
