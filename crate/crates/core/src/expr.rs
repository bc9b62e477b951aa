//! A small arithmetic grammar for expression-defined maps.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | primary
//! primary := number | variable | func '(' expr (',' expr)* ')' | '(' expr ')'
//! func    := min | max | abs
//! variable:= x | y            (dimension 1 only)
//!          | x1..xk | y1..yk
//! ```
//!
//! Division is only allowed by a constant subexpression that evaluates to a
//! nonzero value; the divisor is folded at parse time.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("expression error at column {column}: {message}")]
pub struct ExprError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arg {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Arg, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, f64),
    Min(Vec<Expr>),
    Max(Vec<Expr>),
    Abs(Box<Expr>),
}

impl Expr {
    /// Parses `source` for a map on a box of the given dimension.
    pub fn parse(source: &str, dimension: usize) -> Result<Self, ExprError> {
        let tokens = tokenize(source)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            dimension,
        };
        let expr = parser.expr()?;
        if let Some(tok) = parser.peek() {
            return Err(ExprError {
                column: tok.column,
                message: format!("unexpected trailing {}", tok.kind.describe()),
            });
        }
        Ok(expr)
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(Arg::X, k) => x[*k],
            Expr::Var(Arg::Y, k) => y[*k],
            Expr::Neg(e) => -e.eval(x, y),
            Expr::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Expr::Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            Expr::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Expr::Div(a, d) => a.eval(x, y) / d,
            Expr::Min(args) => args
                .iter()
                .map(|e| e.eval(x, y))
                .fold(f64::INFINITY, f64::min),
            Expr::Max(args) => args
                .iter()
                .map(|e| e.eval(x, y))
                .fold(f64::NEG_INFINITY, f64::max),
            Expr::Abs(e) => e.eval(x, y).abs(),
        }
    }

    fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var(..) => false,
            Expr::Neg(e) | Expr::Abs(e) | Expr::Div(e, _) => e.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.is_constant() && b.is_constant(),
            Expr::Min(v) | Expr::Max(v) => v.iter().all(Expr::is_constant),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Num(v) => format!("number {v}"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Comma => "`,`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    column: usize,
}

fn tokenize(source: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        let single = match c {
            '+' => Some(TokenKind::Plus),
            '-' | '−' => Some(TokenKind::Minus),
            '*' => Some(TokenKind::Star),
            '/' => Some(TokenKind::Slash),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            ',' => Some(TokenKind::Comma),
            _ => None,
        };
        if let Some(kind) = single {
            tokens.push(Token { kind, column });
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| ExprError {
                column,
                message: format!("invalid number `{text}`"),
            })?;
            tokens.push(Token {
                kind: TokenKind::Num(value),
                column,
            });
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident(chars[start..i].iter().collect()),
                column,
            });
        } else {
            return Err(ExprError {
                column,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    dimension: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn end_column(&self) -> usize {
        self.tokens.last().map_or(1, |t| t.column + 1)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), ExprError> {
        if self.eat(&kind) {
            return Ok(());
        }
        let (column, found) = match self.peek() {
            Some(t) => (t.column, t.kind.describe()),
            None => (self.end_column(), "end of input".into()),
        };
        Err(ExprError {
            column,
            message: format!("expected {}, found {found}", kind.describe()),
        })
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&TokenKind::Plus) {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&TokenKind::Minus) {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&TokenKind::Star) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek().is_some_and(|t| t.kind == TokenKind::Slash) {
                let column = self.peek().map_or(0, |t| t.column);
                self.pos += 1;
                let divisor = self.unary()?;
                if !divisor.is_constant() {
                    return Err(ExprError {
                        column,
                        message: "division is only allowed by a constant".into(),
                    });
                }
                let value = divisor.eval(&[], &[]);
                if value == 0.0 || !value.is_finite() {
                    return Err(ExprError {
                        column,
                        message: "division by zero".into(),
                    });
                }
                lhs = Expr::Div(Box::new(lhs), value);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(&TokenKind::Minus) {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(ExprError {
                column: self.end_column(),
                message: "unexpected end of input".into(),
            });
        };
        self.pos += 1;
        match tok.kind {
            TokenKind::Num(v) => Ok(Expr::Const(v)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::Ident(name) => match name.as_str() {
                "min" | "max" | "abs" => {
                    self.expect(TokenKind::LParen)?;
                    let mut args = vec![self.expr()?];
                    while self.eat(&TokenKind::Comma) {
                        args.push(self.expr()?);
                    }
                    self.expect(TokenKind::RParen)?;
                    match name.as_str() {
                        "abs" if args.len() == 1 => Ok(Expr::Abs(Box::new(args.remove(0)))),
                        "abs" => Err(ExprError {
                            column: tok.column,
                            message: "abs takes exactly one argument".into(),
                        }),
                        _ if args.len() < 2 => Err(ExprError {
                            column: tok.column,
                            message: format!("{name} takes at least two arguments"),
                        }),
                        "min" => Ok(Expr::Min(args)),
                        _ => Ok(Expr::Max(args)),
                    }
                }
                _ => self.variable(&name, tok.column),
            },
            other => Err(ExprError {
                column: tok.column,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }

    fn variable(&self, name: &str, column: usize) -> Result<Expr, ExprError> {
        let unknown = || ExprError {
            column,
            message: format!("unknown identifier `{name}`"),
        };
        let mut chars = name.chars();
        let arg = match chars.next() {
            Some('x') => Arg::X,
            Some('y') => Arg::Y,
            _ => return Err(unknown()),
        };
        let rest = chars.as_str();
        if rest.is_empty() {
            return if self.dimension == 1 {
                Ok(Expr::Var(arg, 0))
            } else {
                Err(ExprError {
                    column,
                    message: format!(
                        "`{name}` is ambiguous in dimension {}; use {name}1..{name}{}",
                        self.dimension, self.dimension
                    ),
                })
            };
        }
        let k: usize = rest.parse().map_err(|_| unknown())?;
        if k == 0 || k > self.dimension || rest.starts_with('0') {
            return Err(ExprError {
                column,
                message: format!("coordinate `{name}` out of range for dimension {}", self.dimension),
            });
        }
        Ok(Expr::Var(arg, k - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval1(src: &str, x: f64, y: f64) -> f64 {
        Expr::parse(src, 1).unwrap().eval(&[x], &[y])
    }

    #[test]
    fn linear_map_values() {
        assert_eq!(eval1("(2*x - y + 3)/8", 0.0, 1.0), 0.25);
        assert_eq!(eval1("(2*x - y + 3)/8", 1.0, 0.0), 0.625);
    }

    #[test]
    fn precedence_and_unary_minus() {
        assert_eq!(eval1("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(eval1("-x * 2 + -(-y)", 1.5, 4.0), 1.0);
        assert_eq!(eval1("10 - 4 - 3", 0.0, 0.0), 3.0);
        assert_eq!(eval1("12 / 2 / 3", 0.0, 0.0), 2.0);
        assert_eq!(eval1("2.5e-1 + 1E1", 0.0, 0.0), 10.25);
    }

    #[test]
    fn functions() {
        assert_eq!(eval1("min(x, y, 0.5)", 0.7, 0.9), 0.5);
        assert_eq!(eval1("max(x, y)", 0.7, 0.9), 0.9);
        assert_eq!(eval1("abs(x - y)", 0.25, 1.0), 0.75);
    }

    #[test]
    fn vector_coordinates() {
        let e = Expr::parse("(x1 + x2 - y2 + 1)/8", 2).unwrap();
        assert_eq!(e.eval(&[1.0, 1.0], &[0.0, 1.0]), 0.25);
        assert!(Expr::parse("x3", 2).is_err());
        assert!(Expr::parse("x", 2).is_err());
        assert!(Expr::parse("x0", 2).is_err());
    }

    #[test]
    fn rejects_variable_divisor() {
        let err = Expr::parse("x / y", 1).unwrap_err();
        assert_eq!(err.column, 3);
        assert!(err.message.contains("constant"));
    }

    #[test]
    fn rejects_zero_divisor() {
        assert!(Expr::parse("x / (2 - 2)", 1).is_err());
        assert_eq!(eval1("x / (4 - 2)", 1.0, 0.0), 0.5);
    }

    #[test]
    fn reports_bad_input() {
        assert!(Expr::parse("z + 1", 1).is_err());
        assert!(Expr::parse("(x + 1", 1).is_err());
        assert!(Expr::parse("x +", 1).is_err());
        assert!(Expr::parse("x y", 1).is_err());
        assert!(Expr::parse("x $ y", 1).is_err());
        assert!(Expr::parse("min(x)", 1).is_err());
        assert!(Expr::parse("abs(x, y)", 1).is_err());
        assert!(Expr::parse("", 1).is_err());
    }
}
