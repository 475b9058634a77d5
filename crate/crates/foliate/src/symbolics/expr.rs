//! Elements of the exact differential field: rational functions over a
//! variable context, stored as canonical numerator/denominator pairs.
//!
//! Canonical form: common monomial factors cancelled, an exact polynomial
//! division attempted when cheap, rational content removed jointly, and the
//! denominator's graded-lex leading coefficient made positive. Equality is
//! decided by cross-multiplication, so the canonical form need not be a fully
//! reduced fraction.

use std::fmt;

use num_traits::{One, Signed};

use super::context::{compatible, Ctx, SymbolDerivative, SymbolId};
use super::poly::Poly;
use crate::error::SymbolicError;
use crate::rational::{rational_to_string, Rational};

#[derive(Clone, Debug)]
pub struct Expr {
    ctx: Ctx,
    num: Poly,
    den: Poly,
}

impl Expr {
    fn normalized(ctx: Ctx, num: Poly, den: Poly) -> Expr {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            let n = ctx.len();
            return Expr { ctx, num: Poly::zero(n), den: Poly::one(n) };
        }
        let mut num = num;
        let mut den = den;
        // fast path: constant denominator folds into the coefficients
        if let Some(c) = den.as_constant() {
            if !c.is_one() {
                num = num.scale(&c.recip());
                den = Poly::one(ctx.len());
            }
            return Expr { ctx, num, den };
        }
        // cancel the common monomial factor
        let g = num.monomial_gcd().gcd(&den.monomial_gcd());
        if !g.is_one() {
            num = num.div_monomial(&g);
            den = den.div_monomial(&g);
        }
        // cheap exact-division simplifications
        if !den.is_one() && den.as_constant().is_none() {
            if let Some(q) = num.divexact(&den) {
                return Expr::normalized(ctx, q, Poly::one(num.nvars()));
            }
            if num.as_constant().is_none() {
                if let Some(q) = den.divexact(&num) {
                    return Expr::normalized(ctx, Poly::one(num.nvars()), q);
                }
            }
        }
        // denominator made primitive with positive leading coefficient
        let c = den.content();
        let lead_positive = den.leading().map(|(_, c)| c.is_positive()).unwrap_or(true);
        let scale = if lead_positive { c.recip() } else { -c.recip() };
        if !scale.is_one() {
            num = num.scale(&scale);
            den = den.scale(&scale);
        }
        Expr { ctx, num, den }
    }

    pub fn from_parts(ctx: &Ctx, num: Poly, den: Poly) -> Expr {
        Expr::normalized(ctx.clone(), num, den)
    }

    pub fn zero(ctx: &Ctx) -> Expr {
        let n = ctx.len();
        Expr { ctx: ctx.clone(), num: Poly::zero(n), den: Poly::one(n) }
    }

    pub fn one(ctx: &Ctx) -> Expr {
        Expr::constant(ctx, Rational::one())
    }

    pub fn constant(ctx: &Ctx, c: Rational) -> Expr {
        let n = ctx.len();
        Expr { ctx: ctx.clone(), num: Poly::constant(n, c), den: Poly::one(n) }
    }

    pub fn int(ctx: &Ctx, v: i64) -> Expr {
        Expr::constant(ctx, crate::rational::rat(v))
    }

    pub fn symbol(ctx: &Ctx, id: SymbolId) -> Expr {
        let n = ctx.len();
        Expr { ctx: ctx.clone(), num: Poly::var(n, id), den: Poly::one(n) }
    }

    pub fn named(ctx: &Ctx, name: &str) -> Result<Expr, SymbolicError> {
        Ok(Expr::symbol(ctx, ctx.require(name)?))
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match (self.num.as_constant(), self.den.as_constant()) {
            (Some(n), Some(d)) => Some(n / d),
            _ => None,
        }
    }

    fn check_ctx(&self, other: &Expr) {
        assert!(
            compatible(&self.ctx, &other.ctx),
            "context mismatch: {} vs {}",
            self.ctx,
            other.ctx
        );
    }

    pub fn add(&self, other: &Expr) -> Expr {
        self.check_ctx(other);
        if self.den == other.den {
            return Expr::normalized(self.ctx.clone(), self.num.add(&other.num), self.den.clone());
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        Expr::normalized(self.ctx.clone(), num, den)
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Expr {
        Expr { ctx: self.ctx.clone(), num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        self.check_ctx(other);
        Expr::normalized(
            self.ctx.clone(),
            self.num.mul(&other.num),
            self.den.mul(&other.den),
        )
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        Expr::normalized(self.ctx.clone(), self.num.scale(c), self.den.clone())
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr, SymbolicError> {
        self.check_ctx(other);
        if other.is_zero() {
            return Err(SymbolicError::DivisionByZero);
        }
        Ok(Expr::normalized(
            self.ctx.clone(),
            self.num.mul(&other.den),
            self.den.mul(&other.num),
        ))
    }

    pub fn div(&self, other: &Expr) -> Expr {
        self.checked_div(other).expect("division by zero expression")
    }

    pub fn powi(&self, e: i64) -> Expr {
        if e == 0 {
            return Expr::one(&self.ctx);
        }
        let p = e.unsigned_abs() as u32;
        let pos = Expr::normalized(self.ctx.clone(), self.num.pow(p), self.den.pow(p));
        if e > 0 {
            pos
        } else {
            Expr::one(&self.ctx).div(&pos)
        }
    }

    /// Decides a == b by cross-multiplication of the canonical pairs.
    pub fn expr_equal(&self, other: &Expr) -> Result<bool, SymbolicError> {
        if !compatible(&self.ctx, &other.ctx) {
            return Err(SymbolicError::ContextMismatch);
        }
        Ok(self.num.mul(&other.den) == other.num.mul(&self.den))
    }

    pub fn equals(&self, other: &Expr) -> bool {
        self.expr_equal(other).expect("context mismatch in equality")
    }

    /// Exact partial derivative with respect to a coordinate variable,
    /// applying the quotient rule and the per-symbol chain rules.
    pub fn derivative(&self, v: SymbolId) -> Result<Expr, SymbolicError> {
        if !self.ctx.is_coordinate(v) {
            return Err(SymbolicError::UnknownSymbol {
                name: format!("{} (not a coordinate)", self.ctx.name(v)),
            });
        }
        let dn = poly_derivative(&self.num, v, &self.ctx)?;
        if self.den.is_one() {
            return Ok(Expr::normalized(self.ctx.clone(), dn, Poly::one(self.ctx.len())));
        }
        let dd = poly_derivative(&self.den, v, &self.ctx)?;
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        let den = self.den.mul(&self.den);
        Ok(Expr::normalized(self.ctx.clone(), num, den))
    }

    pub fn derivative_named(&self, name: &str) -> Result<Expr, SymbolicError> {
        self.derivative(self.ctx.require(name)?)
    }

    /// Substitutes every symbol through `map`, producing an expression in the
    /// map's target context.
    pub fn substitute(&self, map: &SubstMap) -> Result<Expr, SymbolicError> {
        let num = map.eval_poly(&self.num, &self.ctx)?;
        let den = map.eval_poly(&self.den, &self.ctx)?;
        if den.is_zero() {
            return Err(SymbolicError::DivisionByZero);
        }
        Ok(num.div(&den))
    }

    /// Rebuilds the expression in another context by matching symbol names.
    pub fn transplant(&self, target: &Ctx) -> Result<Expr, SymbolicError> {
        let map = SubstMap::renaming(&self.ctx, target)?;
        self.substitute(&map)
    }

    /// Sets one symbol to zero, i.e. drops every term where it occurs.
    pub fn subst_symbol_zero(&self, v: SymbolId) -> Result<Expr, SymbolicError> {
        let filter = |p: &Poly| {
            let mut out = Poly::zero(self.ctx.len());
            for (m, c) in p.terms() {
                if m.exp(v) == 0 {
                    out.add_term(m.clone(), c.clone());
                }
            }
            out
        };
        let den = filter(&self.den);
        if den.is_zero() {
            return Err(SymbolicError::DivisionByZero);
        }
        Ok(Expr::normalized(self.ctx.clone(), filter(&self.num), den))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

pub fn poly_derivative(p: &Poly, v: SymbolId, ctx: &Ctx) -> Result<Poly, SymbolicError> {
    let n = ctx.len();
    let mut out = Poly::zero(n);
    // cache per-symbol derivative rules; only symbols that occur are queried,
    // so a truncated chain top errors only when actually differentiated
    let mut rules: Vec<Option<Option<Poly>>> = vec![None; n];
    for (m, c) in p.terms() {
        for s in 0..n {
            let e = m.exp(s);
            if e == 0 {
                continue;
            }
            if rules[s].is_none() {
                rules[s] = Some(match ctx.symbol_derivative(s, v)? {
                    SymbolDerivative::Zero => None,
                    SymbolDerivative::One => Some(Poly::one(n)),
                    SymbolDerivative::Poly(q) => Some(q),
                });
            }
            let factor = match rules[s].as_ref().unwrap() {
                None => continue,
                Some(q) => q,
            };
            let lowered = m.with_exp(s, e - 1);
            let coeff = c * Rational::from_integer(e.into());
            out.add_assign(&factor.mul_monomial(&lowered, &coeff));
        }
    }
    Ok(out)
}

/// A total assignment of symbols to expressions in a target context.
/// Unassigned symbols surface as `MissingComponent` when encountered.
#[derive(Clone)]
pub struct SubstMap {
    target: Ctx,
    assignments: Vec<Option<Expr>>,
}

impl SubstMap {
    pub fn new(source: &Ctx, target: &Ctx) -> SubstMap {
        SubstMap { target: target.clone(), assignments: vec![None; source.len()] }
    }

    pub fn target(&self) -> &Ctx {
        &self.target
    }

    pub fn assign(&mut self, source_id: SymbolId, value: Expr) {
        assert!(compatible(&self.target, value.ctx()), "assignment context mismatch");
        self.assignments[source_id] = Some(value);
    }

    pub fn assign_named(
        &mut self,
        source: &Ctx,
        name: &str,
        value: Expr,
    ) -> Result<(), SymbolicError> {
        self.assign(source.require(name)?, value);
        Ok(())
    }

    pub fn get(&self, id: SymbolId) -> Option<&Expr> {
        self.assignments[id].as_ref()
    }

    /// Identity-by-name map between two contexts. Source symbols absent
    /// from the target stay unassigned and error only when encountered.
    pub fn renaming(source: &Ctx, target: &Ctx) -> Result<SubstMap, SymbolicError> {
        let mut map = SubstMap::new(source, target);
        for id in 0..source.len() {
            if let Some(tid) = target.lookup(source.name(id)) {
                map.assign(id, Expr::symbol(target, tid));
            }
        }
        Ok(map)
    }

    fn eval_poly(&self, p: &Poly, source: &Ctx) -> Result<Expr, SymbolicError> {
        let mut acc = Expr::zero(&self.target);
        for (m, c) in p.terms() {
            let mut term = Expr::constant(&self.target, c.clone());
            for s in 0..source.len() {
                let e = m.exp(s);
                if e == 0 {
                    continue;
                }
                let img = self.assignments[s].as_ref().ok_or_else(|| {
                    SymbolicError::MissingComponent { name: source.name(s).to_string() }
                })?;
                term = term.mul(&img.powi(e as i64));
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }
}

fn poly_to_string(p: &Poly, ctx: &Ctx) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut parts: Vec<String> = Vec::new();
    // render leading term first: descending monomial order
    for (m, c) in p.terms().collect::<Vec<_>>().into_iter().rev() {
        let mut factors: Vec<String> = Vec::new();
        for s in 0..ctx.len() {
            let e = m.exp(s);
            if e == 0 {
                continue;
            }
            let name = ctx.name(s);
            if e == 1 {
                factors.push(name.to_string());
            } else {
                factors.push(format!("{name}^{e}"));
            }
        }
        let body = if factors.is_empty() {
            rational_to_string(&c.abs())
        } else if c.abs().is_one() {
            factors.join("*")
        } else {
            format!("{}*{}", rational_to_string(&c.abs()), factors.join("*"))
        };
        if parts.is_empty() {
            if c.is_negative() {
                parts.push(format!("-{body}"));
            } else {
                parts.push(body);
            }
        } else if c.is_negative() {
            parts.push(format!(" - {body}"));
        } else {
            parts.push(format!(" + {body}"));
        }
    }
    parts.concat()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = poly_to_string(&self.num, &self.ctx);
        if self.den.is_one() {
            write!(f, "{n}")
        } else {
            let d = poly_to_string(&self.den, &self.ctx);
            let nn = if self.num.num_terms() > 1 { format!("({n})") } else { n };
            let dd = if self.den.num_terms() > 1 { format!("({d})") } else { d };
            write!(f, "{nn}/{dd}")
        }
    }
}
