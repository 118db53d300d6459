//! Arithmetic expressions in one variable `t`.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := base ("^" factor)?
//! base   := number | "t" | func "(" expr ")" | "(" expr ")"
//! func   := exp | ln | sin | cos | sinh | cosh
//! ```
//!
//! A leading `-` or `+` on a base is accepted as unary sign; it binds looser
//! than `^`, so `-t^2` is `-(t^2)`.

use std::fmt;

use super::dual::Real;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Exp,
    Ln,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Function {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Function::Exp,
            "ln" => Function::Ln,
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            "sinh" => Function::Sinh,
            "cosh" => Function::Cosh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Function::Exp => "exp",
            Function::Ln => "ln",
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Sinh => "sinh",
            Function::Cosh => "cosh",
        }
    }

    fn apply<T: Real>(self, x: T) -> T {
        match self {
            Function::Exp => x.exp(),
            Function::Ln => x.ln(),
            Function::Sin => x.sin(),
            Function::Cos => x.cos(),
            Function::Sinh => x.sinh(),
            Function::Cosh => x.cosh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Constant(f64),
    Variable,
    Negate(Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Call(Function, Box<Node>),
}

/// A parsed expression tree over the single variable `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarExpression {
    root: Node,
}

impl ScalarExpression {
    pub fn parse(text: &str) -> Result<Self> {
        let mut parser = Parser::new(text)?;
        let root = parser.expr()?;
        match parser.peek() {
            Token::End => Ok(ScalarExpression { root }),
            _ => Err(Error::Syntax {
                position: parser.position(),
                message: format!("unexpected {}", parser.peek().describe()),
            }),
        }
    }

    pub fn variable() -> Self {
        ScalarExpression {
            root: Node::Variable,
        }
    }

    /// Evaluates the tree at `t` over any [`Real`] (f64 or dual numbers).
    ///
    /// Every intermediate value is checked; a non-finite result reports a
    /// domain error rather than propagating NaN.
    pub fn eval<T: Real>(&self, t: T) -> Result<T> {
        eval_node(&self.root, t)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        self.eval(t)
    }

    /// Whether the tree mentions `t` at all.
    pub fn is_constant(&self) -> bool {
        !mentions_variable(&self.root)
    }
}

fn mentions_variable(node: &Node) -> bool {
    match node {
        Node::Constant(_) => false,
        Node::Variable => true,
        Node::Negate(a) | Node::Call(_, a) => mentions_variable(a),
        Node::Binary(_, a, b) => mentions_variable(a) || mentions_variable(b),
    }
}

fn constant_value(node: &Node) -> Option<f64> {
    match node {
        Node::Constant(c) => Some(*c),
        Node::Negate(a) => constant_value(a).map(|c| -c),
        _ => None,
    }
}

fn eval_node<T: Real>(node: &Node, t: T) -> Result<T> {
    let out = match node {
        Node::Constant(c) => T::constant(*c),
        Node::Variable => t,
        Node::Negate(a) => -eval_node(a, t)?,
        Node::Binary(op, a, b) => {
            let lhs = eval_node(a, t)?;
            match op {
                BinaryOp::Add => lhs + eval_node(b, t)?,
                BinaryOp::Sub => lhs - eval_node(b, t)?,
                BinaryOp::Mul => lhs * eval_node(b, t)?,
                BinaryOp::Div => {
                    let rhs = eval_node(b, t)?;
                    if rhs.real() == 0.0 {
                        return Err(Error::domain(t.real(), "division by zero"));
                    }
                    lhs / rhs
                }
                BinaryOp::Pow => match constant_value(b) {
                    Some(c) => lhs.powf(c),
                    None => {
                        if lhs.real() <= 0.0 {
                            return Err(Error::domain(
                                t.real(),
                                "variable exponent needs a positive base",
                            ));
                        }
                        lhs.pow(eval_node(b, t)?)
                    }
                },
            }
        }
        Node::Call(func, a) => {
            let arg = eval_node(a, t)?;
            if *func == Function::Ln && arg.real() <= 0.0 {
                return Err(Error::domain(t.real(), "ln of a non-positive value"));
            }
            func.apply(arg)
        }
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Error::domain(t.real(), "expression left the reals"))
    }
}

impl fmt::Display for ScalarExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(&self.root, f)
    }
}

// Fully parenthesised output; re-parses to the same tree.
fn write_node(node: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match node {
        Node::Constant(c) => {
            if *c < 0.0 {
                write!(f, "(0-{:e})", -c)
            } else {
                write!(f, "{c:e}")
            }
        }
        Node::Variable => f.write_str("t"),
        Node::Negate(a) => {
            f.write_str("(-")?;
            write_node(a, f)?;
            f.write_str(")")
        }
        Node::Binary(op, a, b) => {
            f.write_str("(")?;
            write_node(a, f)?;
            f.write_str(op.symbol())?;
            write_node(b, f)?;
            f.write_str(")")
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(a, f)?;
            f.write_str(")")
        }
    }
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
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(x) => format!("number {x}"),
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let token = match c {
            '+' => Token::Plus,
            '-' => Token::Minus,
            '*' => Token::Star,
            '/' => Token::Slash,
            '^' => Token::Caret,
            '(' => Token::LParen,
            ')' => Token::RParen,
            '0'..='9' | '.' => {
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
                let literal = &text[start..i];
                let value = literal.parse::<f64>().map_err(|_| Error::Syntax {
                    position: start,
                    message: format!("malformed number `{literal}`"),
                })?;
                out.push((Token::Number(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Token::Ident(text[start..i].to_string()), start));
                continue;
            }
            other => {
                return Err(Error::Syntax {
                    position: start,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((token, start));
        i += 1;
    }
    out.push((Token::End, text.len()));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    cursor: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            tokens: tokenize(text)?,
            cursor: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.cursor].0
    }

    fn position(&self) -> usize {
        self.tokens[self.cursor].1
    }

    fn bump(&mut self) -> Token {
        let token = self.tokens[self.cursor].0.clone();
        if self.cursor + 1 < self.tokens.len() {
            self.cursor += 1;
        }
        token
    }

    fn expect(&mut self, want: Token) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax {
                position: self.position(),
                message: format!("expected {}, found {}", want.describe(), self.peek().describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinaryOp::Add,
                Token::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Token::Star => BinaryOp::Mul,
                Token::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Node> {
        match self.peek() {
            Token::Minus => {
                self.bump();
                return Ok(Node::Negate(Box::new(self.factor()?)));
            }
            Token::Plus => {
                self.bump();
                return self.factor();
            }
            _ => {}
        }
        let base = self.base()?;
        if *self.peek() == Token::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Node::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Node> {
        let position = self.position();
        match self.bump() {
            Token::Number(x) => Ok(Node::Constant(x)),
            Token::Ident(name) => {
                if name == "t" {
                    return Ok(Node::Variable);
                }
                match Function::from_name(&name) {
                    Some(func) => {
                        self.expect(Token::LParen)?;
                        let arg = self.expr()?;
                        self.expect(Token::RParen)?;
                        Ok(Node::Call(func, Box::new(arg)))
                    }
                    None => Err(Error::UnknownIdentifier { name, position }),
                }
            }
            Token::LParen => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            other => Err(Error::Syntax {
                position,
                message: format!("expected a number, `t`, a function or `(`, found {}", other.describe()),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::dual::first_derivative;
    use std::f64::consts::PI;

    fn eval(text: &str, t: f64) -> f64 {
        ScalarExpression::parse(text).unwrap().value(t).unwrap()
    }

    #[test]
    fn example_nonlinearities_parse() {
        let f = "t^2 + 3*t + 3*cos(t) + 4";
        assert_eq!(eval(f, 0.0), 7.0);
        assert!((eval(f, PI) - (PI * PI + 3.0 * PI + 1.0)).abs() < 1e-12);
        assert_eq!(eval("t", 5.0), 5.0);
        assert_eq!(eval("exp(t)*(3+2*cos(t))", 0.0), 5.0);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("2^3^2", 0.0), 512.0);
        assert_eq!(eval("8/4/2", 0.0), 1.0);
        assert_eq!(eval("1-2-3", 0.0), -4.0);
        assert_eq!(eval("-t^2", 3.0), -9.0);
        assert_eq!(eval("2*-t", 3.0), -6.0);
        assert_eq!(eval("1.5e2 + 2E-1", 0.0), 150.2);
        assert_eq!(eval("(1+t)^2", 1.0), 4.0);
    }

    #[test]
    fn syntax_errors_carry_position() {
        match ScalarExpression::parse("t + * 2") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 4),
            other => panic!("unexpected {other:?}"),
        }
        match ScalarExpression::parse("(t + 1") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            ScalarExpression::parse("t 2"),
            Err(Error::Syntax { position: 2, .. })
        ));
        assert!(matches!(
            ScalarExpression::parse("t # 2"),
            Err(Error::Syntax { position: 2, .. })
        ));
    }

    #[test]
    fn unknown_identifiers() {
        match ScalarExpression::parse("tan(t)") {
            Err(Error::UnknownIdentifier { name, position }) => {
                assert_eq!(name, "tan");
                assert_eq!(position, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            ScalarExpression::parse("2*x"),
            Err(Error::UnknownIdentifier { position: 2, .. })
        ));
    }

    #[test]
    fn domain_errors_instead_of_nan() {
        let e = ScalarExpression::parse("ln(t)").unwrap();
        assert!(matches!(e.value(0.0), Err(Error::Domain { .. })));
        let e = ScalarExpression::parse("(t-1)^0.5").unwrap();
        assert!(matches!(e.value(0.0), Err(Error::Domain { .. })));
        let e = ScalarExpression::parse("1/t").unwrap();
        assert!(matches!(e.value(0.0), Err(Error::Domain { .. })));
        let e = ScalarExpression::parse("exp(exp(t))").unwrap();
        assert!(matches!(e.value(10.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn dual_evaluation_differentiates() {
        let e = ScalarExpression::parse("t^2 + 3*t + 3*cos(t) + 4").unwrap();
        let (_, d) = first_derivative(|x| e.eval(x).unwrap(), 0.0);
        assert_eq!(d, 3.0);
        let e = ScalarExpression::parse("t^t").unwrap();
        let (_, d) = first_derivative(|x| e.eval(x).unwrap(), 2.0);
        assert!((d - 4.0 * (2f64.ln() + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn display_reparses() {
        let src = "-t^2 + 3*sinh(t/2) - 0.25*exp(-t)";
        let e = ScalarExpression::parse(src).unwrap();
        let again = ScalarExpression::parse(&e.to_string()).unwrap();
        for t in [0.0, 0.5, 3.0] {
            assert_eq!(e.value(t).unwrap(), again.value(t).unwrap());
        }
    }
}
