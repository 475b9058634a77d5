//! Exterior algebra of differential forms over a variable context.
//!
//! A degree-q form is a sparse map from strictly increasing q-tuples of
//! coordinate positions to expression coefficients. Wedge monomials are
//! canonicalized to increasing index order with the sign of the sorting
//! permutation.

use std::collections::BTreeMap;
use std::fmt;

use super::context::{compatible, Ctx};
use super::expr::{Expr, SubstMap};
use crate::error::SymbolicError;
use crate::rational::Rational;

#[derive(Clone, Debug)]
pub struct Form {
    ctx: Ctx,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Expr>,
}

/// Sorts differential indices into strictly increasing order, returning the
/// permutation sign, or `None` when an index repeats (the wedge vanishes).
fn sort_key(mut key: Vec<usize>) -> Option<(Vec<usize>, bool)> {
    let mut swaps = 0usize;
    for i in 1..key.len() {
        let mut j = i;
        while j > 0 && key[j - 1] > key[j] {
            key.swap(j - 1, j);
            swaps += 1;
            j -= 1;
        }
    }
    for w in key.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((key, swaps % 2 == 1))
}

impl Form {
    pub fn zero(ctx: &Ctx, degree: usize) -> Form {
        Form { ctx: ctx.clone(), degree, terms: BTreeMap::new() }
    }

    pub fn scalar(e: Expr) -> Form {
        let ctx = e.ctx().clone();
        let mut f = Form::zero(&ctx, 0);
        f.add_term(vec![], e);
        f
    }

    pub fn one(ctx: &Ctx) -> Form {
        Form::scalar(Expr::one(ctx))
    }

    /// d of the coordinate at the given position.
    pub fn dcoord(ctx: &Ctx, pos: usize) -> Form {
        assert!(pos < ctx.coordinates().len());
        let mut f = Form::zero(ctx, 1);
        f.add_term(vec![pos], Expr::one(ctx));
        f
    }

    pub fn dcoord_named(ctx: &Ctx, name: &str) -> Result<Form, SymbolicError> {
        let id = ctx.require(name)?;
        let pos = ctx
            .coordinate_pos(id)
            .ok_or_else(|| SymbolicError::UnknownSymbol { name: format!("{name} (not a coordinate)") })?;
        Ok(Form::dcoord(ctx, pos))
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, key: &[usize]) -> Expr {
        self.terms
            .get(key)
            .cloned()
            .unwrap_or_else(|| Expr::zero(&self.ctx))
    }

    pub fn add_term(&mut self, key: Vec<usize>, coeff: Expr) {
        assert_eq!(key.len(), self.degree, "key length must equal form degree");
        if coeff.is_zero() {
            return;
        }
        let (key, odd) = match sort_key(key) {
            Some(ks) => ks,
            None => return,
        };
        let coeff = if odd { coeff.neg() } else { coeff };
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().add(&coeff);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_ctx(&self, other: &Form) -> Result<(), SymbolicError> {
        if compatible(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(SymbolicError::ContextMismatch)
        }
    }

    pub fn add(&self, other: &Form) -> Form {
        assert_eq!(self.degree, other.degree, "degree mismatch in form addition");
        self.check_ctx(other).expect("context mismatch");
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        let terms = self.terms.iter().map(|(k, c)| (k.clone(), c.neg())).collect();
        Form { ctx: self.ctx.clone(), degree: self.degree, terms }
    }

    pub fn scale(&self, c: &Rational) -> Form {
        let mut out = Form::zero(&self.ctx, self.degree);
        for (k, e) in &self.terms {
            out.add_term(k.clone(), e.scale(c));
        }
        out
    }

    pub fn scale_expr(&self, e: &Expr) -> Form {
        let mut out = Form::zero(&self.ctx, self.degree);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.mul(e));
        }
        out
    }

    pub fn wedge(&self, other: &Form) -> Result<Form, SymbolicError> {
        self.check_ctx(other)?;
        let mut out = Form::zero(&self.ctx, self.degree + other.degree);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut key = ka.clone();
                key.extend_from_slice(kb);
                out.add_term(key, ca.mul(cb));
            }
        }
        Ok(out)
    }

    /// De Rham differential.
    pub fn exterior_derivative(&self) -> Result<Form, SymbolicError> {
        let mut out = Form::zero(&self.ctx, self.degree + 1);
        let ncoords = self.ctx.coordinates().len();
        for (key, coeff) in &self.terms {
            for pos in 0..ncoords {
                let d = coeff.derivative(self.ctx.coordinate(pos))?;
                if d.is_zero() {
                    continue;
                }
                let mut k = Vec::with_capacity(key.len() + 1);
                k.push(pos);
                k.extend_from_slice(key);
                out.add_term(k, d);
            }
        }
        Ok(out)
    }

    /// Pullback along the map described by `map`: coefficients are
    /// substituted and each differential d(x_i) becomes d(map(x_i)) expanded
    /// through the chain rule in the source context.
    pub fn pullback(&self, map: &SubstMap) -> Result<Form, SymbolicError> {
        let target = map.target().clone();
        let ncoords_src = target.coordinates().len();
        let mut out = Form::zero(&target, self.degree);
        // d(phi_i) for each coordinate of the form's own context
        let mut dphi: Vec<Option<Form>> = vec![None; self.ctx.coordinates().len()];
        let dphi_of = |pos: usize, dphi: &mut Vec<Option<Form>>| -> Result<Form, SymbolicError> {
            if dphi[pos].is_none() {
                let id = self.ctx.coordinate(pos);
                let img = map
                    .get(id)
                    .ok_or_else(|| SymbolicError::MissingComponent {
                        name: self.ctx.name(id).to_string(),
                    })?
                    .clone();
                let mut f = Form::zero(&target, 1);
                for spos in 0..ncoords_src {
                    let d = img.derivative(target.coordinate(spos))?;
                    if !d.is_zero() {
                        f.add_term(vec![spos], d);
                    }
                }
                dphi[pos] = Some(f);
            }
            Ok(dphi[pos].clone().unwrap())
        };
        for (key, coeff) in &self.terms {
            let c = coeff.substitute(map)?;
            if c.is_zero() {
                continue;
            }
            let mut acc = Form::scalar(c);
            for &pos in key {
                let df = dphi_of(pos, &mut dphi)?;
                acc = acc.wedge(&df)?;
            }
            if acc.degree() == out.degree() {
                out = out.add(&acc);
            }
        }
        Ok(out)
    }

    /// Interior product with a vector field given by one expression per
    /// coordinate position.
    pub fn interior_product(&self, field: &[Expr]) -> Form {
        assert_eq!(field.len(), self.ctx.coordinates().len());
        if self.degree == 0 {
            return Form::zero(&self.ctx, 0);
        }
        let mut out = Form::zero(&self.ctx, self.degree - 1);
        for (key, coeff) in &self.terms {
            for (j, &pos) in key.iter().enumerate() {
                let comp = &field[pos];
                if comp.is_zero() {
                    continue;
                }
                let mut k = key.clone();
                k.remove(j);
                let mut c = coeff.mul(comp);
                if j % 2 == 1 {
                    c = c.neg();
                }
                out.add_term(k, c);
            }
        }
        out
    }

    /// Exact equality as forms (coefficientwise cross-multiplied equality).
    pub fn equals(&self, other: &Form) -> Result<bool, SymbolicError> {
        self.check_ctx(other)?;
        if self.degree != other.degree {
            return Ok(self.is_zero() && other.is_zero());
        }
        for (k, c) in &self.terms {
            if !c.expr_equal(&other.coefficient(k))? {
                return Ok(false);
            }
        }
        for (k, c) in &other.terms {
            if !self.terms.contains_key(k) && !c.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (key, coeff) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let wedge: Vec<String> = key
                .iter()
                .map(|&p| format!("d{}", self.ctx.name(self.ctx.coordinate(p))))
                .collect();
            if key.is_empty() {
                write!(f, "{coeff}")?;
            } else {
                write!(f, "({coeff}) {}", wedge.join("^"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolics::context::VariableContext;

    fn ctx() -> Ctx {
        VariableContext::builder()
            .coordinates(["y0", "y1", "y2"])
            .chain("f", "y0", 4)
            .build()
    }

    fn sym(c: &Ctx, n: &str) -> Expr {
        Expr::named(c, n).unwrap()
    }

    #[test]
    fn anticommutativity_and_nilpotence() {
        let c = ctx();
        let dy0 = Form::dcoord_named(&c, "y0").unwrap();
        let dy2 = Form::dcoord_named(&c, "y2").unwrap();
        let ab = dy0.wedge(&dy2).unwrap();
        let ba = dy2.wedge(&dy0).unwrap();
        assert!(ab.equals(&ba.neg()).unwrap());
        assert!(dy0.wedge(&dy0).unwrap().is_zero());
    }

    #[test]
    fn wedge_with_coefficient_canonicalizes() {
        // (y2 dy0) ^ dy2 stored with key (dy0, dy2) and coefficient y2
        let c = ctx();
        let lhs = Form::dcoord_named(&c, "y0")
            .unwrap()
            .scale_expr(&sym(&c, "y2"))
            .wedge(&Form::dcoord_named(&c, "y2").unwrap())
            .unwrap();
        assert_eq!(lhs.terms.len(), 1);
        let (key, coeff) = lhs.terms().next().unwrap();
        assert_eq!(key, &vec![0usize, 2usize]);
        assert!(coeff.equals(&sym(&c, "y2")));
    }

    #[test]
    fn exterior_derivative_basics() {
        let c = ctx();
        // d(y2 dy0) = dy2 ^ dy0
        let w = Form::dcoord_named(&c, "y0").unwrap().scale_expr(&sym(&c, "y2"));
        let dw = w.exterior_derivative().unwrap();
        let expect = Form::dcoord_named(&c, "y2")
            .unwrap()
            .wedge(&Form::dcoord_named(&c, "y0").unwrap())
            .unwrap();
        assert!(dw.equals(&expect).unwrap());
        // d of a constant and d(dy0) vanish
        let konst = Form::scalar(Expr::int(&c, 5));
        assert!(konst.exterior_derivative().unwrap().is_zero());
        let ddy0 = Form::dcoord_named(&c, "y0").unwrap().exterior_derivative().unwrap();
        assert!(ddy0.is_zero());
    }

    fn random_form(c: &Ctx, degree: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Form {
        use rand::Rng;
        let syms = ["y0", "y1", "y2", "f", "f'"];
        let mut f = Form::zero(c, degree);
        for _ in 0..rng.gen_range(1..=3) {
            let mut coeff = Expr::int(c, rng.gen_range(-3..=3i64));
            for _ in 0..rng.gen_range(0..=2) {
                coeff = coeff.mul(&sym(c, syms[rng.gen_range(0..syms.len())]));
            }
            let mut key: Vec<usize> = Vec::new();
            while key.len() < degree {
                let p = rng.gen_range(0..3);
                if !key.contains(&p) {
                    key.push(p);
                }
            }
            f.add_term(key, coeff);
        }
        f
    }

    #[test]
    fn d_squared_zero_and_leibniz() {
        use rand::SeedableRng;
        let c = ctx();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for da in 0..=2usize {
            for db in 0..=1usize {
                for _ in 0..8 {
                    let a = random_form(&c, da, &mut rng);
                    let b = random_form(&c, db, &mut rng);
                    let dd = a.exterior_derivative().unwrap().exterior_derivative().unwrap();
                    assert!(dd.is_zero(), "d^2 != 0 on {a}");
                    // d(a^b) = da^b + (-1)^{|a|} a^db
                    let lhs = a.wedge(&b).unwrap().exterior_derivative().unwrap();
                    let mut rhs = a.exterior_derivative().unwrap().wedge(&b).unwrap();
                    let second = a.wedge(&b.exterior_derivative().unwrap()).unwrap();
                    rhs = if da % 2 == 1 { rhs.sub(&second) } else { rhs.add(&second) };
                    assert!(lhs.equals(&rhs).unwrap());
                }
            }
        }
    }

    #[test]
    fn pullback_identity_map_and_chain_rule() {
        let c = ctx();
        let id_map = SubstMap::renaming(&c, &c).unwrap();
        let w = Form::dcoord_named(&c, "y0").unwrap().scale_expr(&sym(&c, "y2"));
        assert!(w.pullback(&id_map).unwrap().equals(&w).unwrap());

        // phi: a0 = -f(y0) pulls da0 back to -f' dy0
        let target = VariableContext::builder().coordinate("a0").build();
        let mut map = SubstMap::new(&target, &c);
        map.assign_named(&target, "a0", sym(&c, "f").neg()).unwrap();
        let da0 = Form::dcoord_named(&target, "a0").unwrap();
        let pulled = da0.pullback(&map).unwrap();
        let expect = Form::dcoord_named(&c, "y0").unwrap().scale_expr(&sym(&c, "f'").neg());
        assert!(pulled.equals(&expect).unwrap());
    }

    #[test]
    fn pullback_commutes_with_wedge_and_d() {
        use rand::SeedableRng;
        let c = ctx();
        // map into a smaller context: y0 -> t, y1 -> t^2, y2 -> 1/(t-2)
        let t = VariableContext::builder().coordinate("t").chain("g", "t", 5).build();
        let mut map = SubstMap::new(&c, &t);
        map.assign_named(&c, "y0", sym(&t, "t")).unwrap();
        map.assign_named(&c, "y1", sym(&t, "t").powi(2)).unwrap();
        map.assign_named(&c, "y2", Expr::one(&t).div(&sym(&t, "t").sub(&Expr::int(&t, 2))))
            .unwrap();
        for (fs, gs) in c.chain_symbols("f").into_iter().zip(t.chain_symbols("g")) {
            map.assign(fs, Expr::symbol(&t, gs));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for da in 0..=2usize {
            for _ in 0..6 {
                let a = random_form(&c, da, &mut rng);
                let b = random_form(&c, 1, &mut rng);
                let lhs = a.wedge(&b).unwrap().pullback(&map).unwrap();
                let rhs = a.pullback(&map).unwrap().wedge(&b.pullback(&map).unwrap()).unwrap();
                assert!(lhs.equals(&rhs).unwrap());
                let dl = a.exterior_derivative().unwrap().pullback(&map).unwrap();
                let dr = a.pullback(&map).unwrap().exterior_derivative().unwrap();
                assert!(dl.equals(&dr).unwrap());
            }
        }
    }

    #[test]
    fn cross_context_operations_are_rejected() {
        let c = ctx();
        let other = VariableContext::builder().coordinates(["z"]).build();
        let a = Form::dcoord_named(&c, "y0").unwrap();
        let b = Form::dcoord_named(&other, "z").unwrap();
        assert!(matches!(a.wedge(&b), Err(SymbolicError::ContextMismatch)));
        let ea = Expr::named(&c, "y0").unwrap();
        let eb = Expr::named(&other, "z").unwrap();
        assert!(matches!(ea.expr_equal(&eb), Err(SymbolicError::ContextMismatch)));
    }

    #[test]
    fn interior_product_contracts() {
        let c = ctx();
        let dy0 = Form::dcoord_named(&c, "y0").unwrap();
        let dy2 = Form::dcoord_named(&c, "y2").unwrap();
        let w = dy0.wedge(&dy2).unwrap();
        // field = y0 d/dy0
        let field = vec![sym(&c, "y0"), Expr::zero(&c), Expr::zero(&c)];
        let contracted = w.interior_product(&field);
        // i_{y0 d/dy0} (dy0 ^ dy2) = y0 dy2
        let expect = dy2.scale_expr(&sym(&c, "y0"));
        assert!(contracted.equals(&expect).unwrap());
    }
}
