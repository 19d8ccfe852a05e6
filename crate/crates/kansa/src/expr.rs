//! Minimal arithmetic expressions over x, y, t for user-supplied source
//! terms, boundary data and sampling densities. Recursive descent parser
//! with byte-offset errors and a precedence-aware printer; parse, print,
//! parse is a fixed point.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    T,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::T => "t",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }

    fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            _ => None,
        }
    }

    fn apply(self, v: f64) -> Result<f64> {
        match self {
            Func::Sin => Ok(v.sin()),
            Func::Cos => Ok(v.cos()),
            Func::Exp => Ok(v.exp()),
            Func::Log => {
                if v <= 0.0 {
                    Err(Error::EvalDomain(format!("log of non-positive value {v}")))
                } else {
                    Ok(v.ln())
                }
            }
            Func::Sqrt => {
                if v < 0.0 {
                    Err(Error::EvalDomain(format!("sqrt of negative value {v}")))
                } else {
                    Ok(v.sqrt())
                }
            }
            Func::Abs => Ok(v.abs()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

/// Parsed arithmetic expression. Unary minus binds looser than '^', so
/// "-x^2" is the negation of "x^2".
#[derive(Clone, Debug, PartialEq)]
pub enum Expression {
    Number(f64),
    Var(Var),
    Constant(Constant),
    Neg(Box<Expression>),
    Binary {
        op: BinOp,
        lhs: Box<Expression>,
        rhs: Box<Expression>,
    },
    Call {
        func: Func,
        arg: Box<Expression>,
    },
}

impl Expression {
    /// Evaluates with the given variable bindings. Division follows IEEE
    /// semantics; log, sqrt and fractional powers of negative bases report
    /// domain errors.
    pub fn eval(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        match self {
            Expression::Number(v) => Ok(*v),
            Expression::Var(Var::X) => Ok(x),
            Expression::Var(Var::Y) => Ok(y),
            Expression::Var(Var::T) => Ok(t),
            Expression::Constant(c) => Ok(c.value()),
            Expression::Neg(inner) => Ok(-inner.eval(x, y, t)?),
            Expression::Binary { op, lhs, rhs } => {
                let a = lhs.eval(x, y, t)?;
                let b = rhs.eval(x, y, t)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => Ok(a / b),
                    BinOp::Pow => {
                        let v = a.powf(b);
                        if v.is_nan() && !a.is_nan() && !b.is_nan() {
                            Err(Error::EvalDomain(format!(
                                "fractional power of negative base: {a}^{b}"
                            )))
                        } else {
                            Ok(v)
                        }
                    }
                }
            }
            Expression::Call { func, arg } => func.apply(arg.eval(x, y, t)?),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expression::Binary { op, .. } => op.precedence(),
            Expression::Neg(_) => 3,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let needs_parens = self.precedence() < min_prec;
        if needs_parens {
            write!(f, "(")?;
        }
        match self {
            Expression::Number(v) => write!(f, "{v}")?,
            Expression::Var(v) => write!(f, "{}", v.name())?,
            Expression::Constant(c) => write!(f, "{}", c.name())?,
            Expression::Neg(inner) => {
                write!(f, "-")?;
                inner.fmt_prec(f, 3)?;
            }
            Expression::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                // '+' '-' '*' '/' are left-associative: the right operand
                // needs one level more; '^' is right-associative: the base
                // must be an atom and the exponent may be a unary
                let (lp, rp) = match op {
                    BinOp::Pow => (5, 3),
                    _ => (p, p + 1),
                };
                lhs.fmt_prec(f, lp)?;
                write!(f, "{}", op.symbol())?;
                rhs.fmt_prec(f, rp)?;
            }
            Expression::Call { func, arg } => {
                write!(f, "{}(", func.name())?;
                arg.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if needs_parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
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
}

struct Lexer<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Token)>> {
        let mut out = Vec::new();
        while self.pos < self.bytes.len() {
            let start = self.pos;
            let b = self.bytes[self.pos];
            match b {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                }
                b'+' => out.push((self.advance(), Token::Plus)),
                b'-' => out.push((self.advance(), Token::Minus)),
                b'*' => out.push((self.advance(), Token::Star)),
                b'/' => out.push((self.advance(), Token::Slash)),
                b'^' => out.push((self.advance(), Token::Caret)),
                b'(' => out.push((self.advance(), Token::LParen)),
                b')' => out.push((self.advance(), Token::RParen)),
                b'0'..=b'9' => out.push((start, self.number(start)?)),
                b'.' if self.peek_digit(1) => out.push((start, self.number(start)?)),
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    while self.pos < self.bytes.len()
                        && (self.bytes[self.pos].is_ascii_alphanumeric()
                            || self.bytes[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    out.push((start, Token::Ident(self.text[start..self.pos].to_string())));
                }
                _ => {
                    return Err(Error::ExprSyntax {
                        offset: start,
                        message: format!(
                            "unexpected character '{}'",
                            &self.text[start..self.text.len().min(start + 1)]
                        ),
                    });
                }
            }
        }
        Ok(out)
    }

    fn advance(&mut self) -> usize {
        let at = self.pos;
        self.pos += 1;
        at
    }

    fn peek_digit(&self, ahead: usize) -> bool {
        self.bytes
            .get(self.pos + ahead)
            .is_some_and(u8::is_ascii_digit)
    }

    fn number(&mut self, start: usize) -> Result<Token> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        // exponent only when followed by digits (optionally signed), so
        // "2e" stays a number then an identifier
        if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
            let mut probe = self.pos + 1;
            if probe < self.bytes.len() && matches!(self.bytes[probe], b'+' | b'-') {
                probe += 1;
            }
            if probe < self.bytes.len() && self.bytes[probe].is_ascii_digit() {
                self.pos = probe;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let slice = &self.text[start..self.pos];
        slice.parse::<f64>().map(Token::Number).map_err(|_| {
            Error::ExprSyntax {
                offset: start,
                message: format!("invalid number literal '{slice}'"),
            }
        })
    }
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    index: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Token)> {
        self.tokens.get(self.index)
    }

    fn next(&mut self) -> Option<(usize, Token)> {
        let t = self.tokens.get(self.index).cloned();
        if t.is_some() {
            self.index += 1;
        }
        t
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |(at, _)| *at)
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.next() {
            Some((_, Token::RParen)) => Ok(()),
            other => Err(Error::ExprSyntax {
                offset: other.map_or(self.end, |(at, _)| at),
                message: "expected ')'".into(),
            }),
        }
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<Expression> {
        let mut lhs = self.term()?;
        while let Some((_, tok)) = self.peek() {
            let op = match tok {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => break,
            };
            self.index += 1;
            let rhs = self.term()?;
            lhs = Expression::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    // term := unary (('*' | '/') unary)*
    fn term(&mut self) -> Result<Expression> {
        let mut lhs = self.unary()?;
        while let Some((_, tok)) = self.peek() {
            let op = match tok {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => break,
            };
            self.index += 1;
            let rhs = self.unary()?;
            lhs = Expression::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Expression> {
        if let Some((_, Token::Minus)) = self.peek() {
            self.index += 1;
            return Ok(Expression::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    // power := atom ('^' unary)?   (right-associative)
    fn power(&mut self) -> Result<Expression> {
        let base = self.atom()?;
        if let Some((_, Token::Caret)) = self.peek() {
            self.index += 1;
            let exponent = self.unary()?;
            return Ok(Expression::Binary {
                op: BinOp::Pow,
                lhs: Box::new(base),
                rhs: Box::new(exponent),
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expression> {
        let Some((at, tok)) = self.next() else {
            return Err(Error::ExprSyntax {
                offset: self.end,
                message: "unexpected end of expression".into(),
            });
        };
        match tok {
            Token::Number(v) => Ok(Expression::Number(v)),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if let Some(var) = match name.as_str() {
                    "x" => Some(Var::X),
                    "y" => Some(Var::Y),
                    "t" => Some(Var::T),
                    _ => None,
                } {
                    return Ok(Expression::Var(var));
                }
                if let Some(c) = match name.as_str() {
                    "pi" => Some(Constant::Pi),
                    "e" => Some(Constant::E),
                    _ => None,
                } {
                    return Ok(Expression::Constant(c));
                }
                if let Some(func) = Func::from_name(&name) {
                    match self.next() {
                        Some((_, Token::LParen)) => {}
                        other => {
                            return Err(Error::ExprSyntax {
                                offset: other.map_or(self.end, |(o, _)| o),
                                message: format!("expected '(' after function '{name}'"),
                            });
                        }
                    }
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expression::Call {
                        func,
                        arg: Box::new(arg),
                    });
                }
                Err(Error::UnknownIdentifier { offset: at, name })
            }
            other => Err(Error::ExprSyntax {
                offset: at,
                message: format!("unexpected token '{}'", token_display(&other)),
            }),
        }
    }
}

fn token_display(tok: &Token) -> String {
    match tok {
        Token::Number(v) => format!("{v}"),
        Token::Ident(s) => s.clone(),
        Token::Plus => "+".into(),
        Token::Minus => "-".into(),
        Token::Star => "*".into(),
        Token::Slash => "/".into(),
        Token::Caret => "^".into(),
        Token::LParen => "(".into(),
        Token::RParen => ")".into(),
    }
}

/// Parses an arithmetic expression over x, y, t. Errors carry the byte
/// offset of the offending token.
pub fn parse_expression(text: &str) -> Result<Expression> {
    let tokens = Lexer::new(text).tokens()?;
    let mut parser = Parser {
        tokens,
        index: 0,
        end: text.len(),
    };
    let expr = parser.expr()?;
    if let Some((at, tok)) = parser.peek() {
        return Err(Error::ExprSyntax {
            offset: *at,
            message: format!("unexpected trailing input '{}'", token_display(tok)),
        });
    }
    let _ = parser.offset();
    Ok(expr)
}
