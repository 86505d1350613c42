//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := ("-" | "+") unary | power
//! power   := primary ("^" "-"? INT)?
//! primary := INT | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! Jet coordinates are written `u_txx`; the suffix counts derivatives, so
//! `u_tx` and `u_xt` denote the same coordinate.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::poly::Rational;
use super::symbol::{DepVar, Indep, Jet, JetIndex, Param, Symbol};
use super::Expr;
use crate::error::{Error, Result};

pub fn parse(text: &str) -> Result<Expr> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, end: text.len() };
    let node = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(syntax(t.offset, format!("unexpected {}", t.kind.describe())));
    }
    node.eval()
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax { offset, message: message.into() }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Jet(Jet),
    Op(char),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("number `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Jet(j) => format!("jet coordinate `{}`", Symbol::Jet(*j)),
            Tok::Op(c) => format!("`{c}`"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: Tok,
    offset: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, ch)) = chars.peek() {
        if ch.is_whitespace() {
            chars.next();
        } else if ch.is_ascii_digit() {
            let mut end = i;
            while let Some(&(j, d)) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                end = j + 1;
                chars.next();
            }
            let n: BigInt = text[i..end].parse().expect("digits");
            out.push(Token { kind: Tok::Int(n), offset: i });
        } else if ch.is_ascii_alphabetic() {
            let mut end = i;
            while let Some(&(j, d)) = chars.peek() {
                if !d.is_ascii_alphanumeric() {
                    break;
                }
                end = j + 1;
                chars.next();
            }
            let name = &text[i..end];
            if let Some(&(j, '_')) = chars.peek() {
                chars.next();
                let mut sfx_end = j + 1;
                while let Some(&(k, d)) = chars.peek() {
                    if !d.is_ascii_alphanumeric() {
                        break;
                    }
                    sfx_end = k + 1;
                    chars.next();
                }
                let whole = &text[i..sfx_end];
                let Some(var) = DepVar::from_name(name) else {
                    return Err(Error::MalformedJet { text: whole.into(), offset: i });
                };
                let suffix = &text[j + 1..sfx_end];
                let index = jet_index(suffix)
                    .ok_or_else(|| Error::MalformedJet { text: whole.into(), offset: i })?;
                out.push(Token { kind: Tok::Jet(Jet { var, index }), offset: i });
            } else {
                out.push(Token { kind: Tok::Ident(name.into()), offset: i });
            }
        } else {
            let op = match ch {
                '−' => '-',
                '+' | '-' | '*' | '/' | '^' | '(' | ')' | ',' => ch,
                _ => return Err(syntax(i, format!("unexpected character `{ch}`"))),
            };
            out.push(Token { kind: Tok::Op(op), offset: i });
            chars.next();
        }
    }
    Ok(out)
}

fn jet_index(suffix: &str) -> Option<JetIndex> {
    if suffix.is_empty() {
        return None;
    }
    let mut idx = JetIndex::ZERO;
    for c in suffix.chars() {
        let slot = match c {
            't' => &mut idx.t,
            'x' => &mut idx.x,
            _ => return None,
        };
        *slot = slot.checked_add(1)?;
    }
    Some(idx)
}

#[derive(Debug)]
enum Node {
    Int(BigInt),
    Sym(Symbol),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>, usize),
    Pow(Box<Node>, i64),
    Call(Func, Vec<Node>, usize),
}

#[derive(Debug, Clone, Copy)]
enum Func {
    Ln,
    Exp,
    Pow,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn offset(&self) -> usize {
        self.peek().map(|t| t.offset).unwrap_or(self.end)
    }

    fn eat(&mut self, op: char) -> bool {
        if matches!(self.peek(), Some(Token { kind: Tok::Op(c), .. }) if *c == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            let found = self
                .peek()
                .map(|t| t.kind.describe())
                .unwrap_or_else(|| "end of input".into());
            Err(syntax(self.offset(), format!("expected `{op}`, found {found}")))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek().is_some_and(|t| t.kind == Tok::Op('/')) {
                let at = self.offset();
                self.pos += 1;
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?), at);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        let at = self.offset();
        match self.peek().map(|t| t.kind.clone()) {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                let n = n
                    .to_i64()
                    .ok_or_else(|| Error::InvalidExponent(format!("{n} is too large")))?;
                Ok(Node::Pow(Box::new(base), if neg { -n } else { n }))
            }
            _ => Err(syntax(at, "`^` needs an integer literal exponent")),
        }
    }

    fn primary(&mut self) -> Result<Node> {
        let at = self.offset();
        let Some(tok) = self.peek().cloned() else {
            return Err(syntax(at, "unexpected end of input"));
        };
        self.pos += 1;
        match tok.kind {
            Tok::Int(n) => Ok(Node::Int(n)),
            Tok::Jet(j) => Ok(Node::Sym(Symbol::Jet(j))),
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Op(c) => Err(syntax(at, format!("unexpected `{c}`"))),
            Tok::Ident(name) => {
                if self.peek().is_some_and(|t| t.kind == Tok::Op('(')) {
                    let func = match name.as_str() {
                        "ln" => Func::Ln,
                        "exp" => Func::Exp,
                        "pow" => Func::Pow,
                        _ => return Err(Error::UnknownIdentifier { name, offset: at }),
                    };
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    let arity = if matches!(func, Func::Pow) { 2 } else { 1 };
                    if args.len() != arity {
                        return Err(syntax(at, format!("`{name}` takes {arity} argument(s)")));
                    }
                    return Ok(Node::Call(func, args, at));
                }
                identifier(&name)
                    .map(Node::Sym)
                    .ok_or(Error::UnknownIdentifier { name, offset: at })
            }
        }
    }
}

fn identifier(name: &str) -> Option<Symbol> {
    if let Some(p) = Param::from_name(name) {
        return Some(Symbol::Param(p));
    }
    if let Some(d) = DepVar::from_name(name) {
        return Some(Symbol::dep(d));
    }
    match name {
        "t" => return Some(Symbol::Indep(Indep::T)),
        "x" => return Some(Symbol::Indep(Indep::X)),
        _ => {}
    }
    let digits = name.strip_prefix('c')?;
    if digits.starts_with('0') {
        return None;
    }
    let k: u32 = digits.parse().ok()?;
    (1..=99).contains(&k).then_some(Symbol::Const(k))
}

impl Node {
    fn eval(&self) -> Result<Expr> {
        Ok(match self {
            Node::Int(n) => Expr::from_rational(Rational::from_integer(n.clone())),
            Node::Sym(s) => Expr::sym(*s),
            Node::Neg(a) => -a.eval()?,
            Node::Add(a, b) => a.eval()? + b.eval()?,
            Node::Sub(a, b) => a.eval()? - b.eval()?,
            Node::Mul(a, b) => a.eval()? * b.eval()?,
            Node::Div(a, b, at) => {
                let inv = b.eval_inverse().map_err(|e| at_offset(e, *at))?;
                a.eval()? * inv
            }
            Node::Pow(a, n) => a.eval()?.powi(*n)?,
            Node::Call(f, args, at) => {
                let arg = args[0].eval()?;
                match f {
                    Func::Ln => Expr::ln(&arg).map_err(|e| at_offset(e, *at))?,
                    Func::Exp => Expr::exp(&arg),
                    Func::Pow => Expr::pow(&arg, &args[1].eval()?)?,
                }
            }
        })
    }

    /// Evaluates `1 / self`, inverting product factors one at a time so the
    /// denominator keeps the factor structure it was written with.
    fn eval_inverse(&self) -> Result<Expr> {
        match self {
            Node::Int(n) if n.is_zero() => Err(Error::DivisionByZero),
            Node::Int(n) => Ok(Expr::from_rational(Rational::new(1.into(), n.clone()))),
            Node::Neg(a) => Ok(-a.eval_inverse()?),
            Node::Mul(a, b) => Ok(a.eval_inverse()? * b.eval_inverse()?),
            Node::Div(a, b, _) => Ok(a.eval_inverse()? * b.eval()?),
            Node::Pow(a, n) => a.eval_inverse()?.powi(*n),
            _ => self.eval()?.inv(),
        }
    }
}

fn at_offset(e: Error, offset: usize) -> Error {
    match e {
        Error::DivisionByZero => syntax(offset, "division by zero"),
        Error::LogOfZero => syntax(offset, "logarithm of zero"),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_suffix_is_canonical() {
        assert_eq!(parse("u_tx").unwrap(), Expr::jet(DepVar::U, 1, 1));
        assert_eq!(parse("u_xt").unwrap(), parse("u_tx").unwrap());
        assert_eq!(parse("vbar_txx").unwrap(), Expr::jet(DepVar::VBar, 1, 2));
    }

    #[test]
    fn parameter_c_and_constants_are_distinct() {
        assert_eq!(parse("c").unwrap(), Expr::param(Param::C));
        assert_eq!(parse("c7").unwrap(), Expr::constant(7));
        assert!(parse("c100").is_err());
    }

    #[test]
    fn precedence() {
        let e = parse("-u^2 + 3/7*v").unwrap();
        let f = parse("(-1)*(u*u) + (3/7)*v").unwrap();
        assert_eq!(e, f);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(
            parse("u + q"),
            Err(Error::UnknownIdentifier { name: "q".into(), offset: 4 })
        );
        assert!(matches!(parse("u_tq"), Err(Error::MalformedJet { offset: 0, .. })));
        assert!(matches!(parse("w_t"), Err(Error::MalformedJet { .. })));
        assert!(matches!(parse("u + "), Err(Error::Syntax { offset: 4, .. })));
        assert!(matches!(parse("u^v"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("(u"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("u/0"), Err(Error::Syntax { offset: 1, .. })));
    }

    #[test]
    fn functions() {
        assert!(parse("ln(a*u+c)").unwrap().atoms().len() == 1);
        assert!(parse("pow(u, 2)").unwrap() == parse("u^2").unwrap());
        assert!(parse("pow(u, v)").is_err());
        assert!(parse("ln(u, v)").is_err());
        assert!(parse("sin(u)").is_err());
    }
}
