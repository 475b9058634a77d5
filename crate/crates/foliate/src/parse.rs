//! Small recursive-descent expression grammar shared by profile
//! definitions, presentation configs and probe candidates.
//!
//! Grammar: identifiers, integer/decimal/fraction literals, `+ - * / ^`
//! with integer exponents, parentheses, and single-argument function
//! application `name(expr)` for `exp`, `sin`, `cos` and chain names.

use num_bigint::BigInt;
use num_traits::pow::Pow;

use crate::error::ParseError;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(Rational),
    Ident(String),
    Call(String, Box<Ast>),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, i64),
}

pub fn parse_expr(input: &str) -> Result<Ast, ParseError> {
    let mut p = Parser { input: input.as_bytes(), pos: 0 };
    p.skip_ws();
    let ast = p.expr()?;
    p.skip_ws();
    if p.pos != p.input.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(ast)
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> ParseError {
        ParseError::Syntax { at: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                acc = Ast::Add(Box::new(acc), Box::new(rhs));
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                acc = Ast::Sub(Box::new(acc), Box::new(rhs));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.factor()?;
                acc = Ast::Mul(Box::new(acc), Box::new(rhs));
            } else if self.eat(b'/') {
                let rhs = self.factor()?;
                acc = Ast::Div(Box::new(acc), Box::new(rhs));
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Ast, ParseError> {
        let base = self.unary()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let digits = self.digits()?;
            let mut e: i64 = digits.parse().map_err(|_| self.err("exponent too large"))?;
            if neg {
                e = -e;
            }
            self.skip_ws();
            return Ok(Ast::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Ast, ParseError> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(Ast::Neg(Box::new(inner)));
        }
        self.primary()
    }

    fn digits(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected digits"));
        }
        Ok(std::str::from_utf8(&self.input[start..self.pos]).unwrap().to_string())
    }

    fn primary(&mut self) -> Result<Ast, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let int_part = self.digits()?;
                if self.peek() == Some(b'.') {
                    self.pos += 1;
                    let frac_part = self.digits()?;
                    self.skip_ws();
                    let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
                    let joined: BigInt =
                        format!("{int_part}{frac_part}").parse().map_err(|_| self.err("bad number"))?;
                    Ok(Ast::Num(Rational::new(joined, scale)))
                } else {
                    self.skip_ws();
                    let n: BigInt = int_part.parse().map_err(|_| self.err("bad number"))?;
                    Ok(Ast::Num(Rational::from_integer(n)))
                }
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.input.len()
                    && (self.input[self.pos].is_ascii_alphanumeric()
                        || self.input[self.pos] == b'_'
                        || self.input[self.pos] == b'\'')
                {
                    self.pos += 1;
                }
                let name =
                    std::str::from_utf8(&self.input[start..self.pos]).unwrap().to_string();
                self.skip_ws();
                if self.peek() == Some(b'(') {
                    self.pos += 1;
                    self.skip_ws();
                    let arg = self.expr()?;
                    if !self.eat(b')') {
                        return Err(self.err("expected `)` after call argument"));
                    }
                    Ok(Ast::Call(name, Box::new(arg)))
                } else {
                    Ok(Ast::Ident(name))
                }
            }
            _ => Err(self.err("expected a number, identifier or `(`")),
        }
    }
}

/// Builds a context expression from an AST: identifiers name context
/// symbols, `chain(base)` names the order-0 chain symbol, and trig symbols
/// are referenced by name.
pub fn ast_to_expr(
    ast: &Ast,
    ctx: &crate::symbolics::Ctx,
) -> Result<crate::symbolics::Expr, String> {
    use crate::symbolics::Expr;
    match ast {
        Ast::Num(r) => Ok(Expr::constant(ctx, r.clone())),
        Ast::Ident(name) => {
            Expr::named(ctx, name).map_err(|_| format!("unknown symbol `{name}`"))
        }
        Ast::Call(name, arg) => {
            let chain = ctx.chain_symbols(name);
            if chain.is_empty() {
                return Err(format!(
                    "`{name}` is not a chain in this chart; trig symbols are referenced by name"
                ));
            }
            let base = match &ctx.symbol(chain[0]).kind {
                crate::symbolics::SymbolKind::Chain { base, .. } => *base,
                _ => unreachable!(),
            };
            match arg.as_ref() {
                Ast::Ident(b) if ctx.lookup(b) == Some(base) => Ok(Expr::symbol(ctx, chain[0])),
                _ => Err(format!(
                    "chain `{name}` may only be applied to its base variable `{}`",
                    ctx.name(base)
                )),
            }
        }
        Ast::Neg(a) => Ok(ast_to_expr(a, ctx)?.neg()),
        Ast::Add(a, b) => Ok(ast_to_expr(a, ctx)?.add(&ast_to_expr(b, ctx)?)),
        Ast::Sub(a, b) => Ok(ast_to_expr(a, ctx)?.sub(&ast_to_expr(b, ctx)?)),
        Ast::Mul(a, b) => Ok(ast_to_expr(a, ctx)?.mul(&ast_to_expr(b, ctx)?)),
        Ast::Div(a, b) => {
            let d = ast_to_expr(b, ctx)?;
            ast_to_expr(a, ctx)?
                .checked_div(&d)
                .map_err(|_| "division by zero expression".to_string())
        }
        Ast::Pow(a, e) => Ok(ast_to_expr(a, ctx)?.powi(*e)),
    }
}
