//! Truncated jets of maps of the line.
//!
//! Entries follow the derivative convention: `entries[p]` is the p-th
//! derivative at the base point, not the Taylor coefficient. Composition is
//! the classical Faa di Bruno sum over integer compositions; inversion solves
//! the triangular system so that `compose(inverse, jet)` is the identity jet.

use crate::error::JetError;
use crate::rational::{factorial, Rational};
use crate::symbolics::{Ctx, Expr};
#[cfg(test)]
use crate::symbolics::SubstMap;


/// Scalar operations needed by jet arithmetic. Implemented by symbolic
/// expressions and by high-precision floats.
pub trait JetScalar: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_rational_like(&self, r: &Rational) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl JetScalar for Expr {
    fn zero_like(&self) -> Self {
        Expr::zero(self.ctx())
    }
    fn one_like(&self) -> Self {
        Expr::one(self.ctx())
    }
    fn from_rational_like(&self, r: &Rational) -> Self {
        Expr::constant(self.ctx(), r.clone())
    }
    fn add(&self, other: &Self) -> Self {
        Expr::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Expr::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Expr::mul(self, other)
    }
    fn div(&self, other: &Self) -> Self {
        Expr::div(self, other)
    }
    fn neg(&self) -> Self {
        Expr::neg(self)
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
}

impl JetScalar for Rational {
    fn zero_like(&self) -> Self {
        num_traits::Zero::zero()
    }
    fn one_like(&self) -> Self {
        num_traits::One::one()
    }
    fn from_rational_like(&self, r: &Rational) -> Self {
        r.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}

/// Truncated jet `(x_0, ..., x_N)` with `x_p = d^p k/dt^p` at the base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T> {
    entries: Vec<T>,
}

impl<T: JetScalar> Jet<T> {
    pub fn new(entries: Vec<T>) -> Jet<T> {
        assert!(entries.len() >= 2, "jet order must be at least 1");
        Jet { entries }
    }

    pub fn order(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn entry(&self, p: usize) -> &T {
        &self.entries[p]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn identity(order: usize, witness: &T) -> Jet<T> {
        let mut entries = vec![witness.zero_like(); order + 1];
        entries[1] = witness.one_like();
        Jet { entries }
    }

    pub fn is_regular(&self) -> bool {
        !self.entries[1].is_zero()
    }

    pub fn truncated(&self, order: usize) -> Jet<T> {
        assert!(order + 1 <= self.entries.len());
        Jet { entries: self.entries[..=order].to_vec() }
    }
}

/// All ordered tuples of positive integers summing to `n` with exactly `k`
/// parts.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            if n >= 1 {
                prefix.push(n);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        for first in 1..=(n + 1 - k) {
            prefix.push(first);
            rec(n - first, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k >= 1 && n >= k {
        rec(n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Faa di Bruno composition: the jet of g after f, with g's entries read as
/// derivatives at f's value. The 0-entry of the result is g's 0-entry.
pub fn jet_compose<T: JetScalar>(g: &Jet<T>, f: &Jet<T>) -> Result<Jet<T>, JetError> {
    if g.order() != f.order() {
        return Err(JetError::OrderMismatch { left: g.order(), right: f.order() });
    }
    let n_max = g.order();
    let witness = &g.entries[0];
    let mut entries = Vec::with_capacity(n_max + 1);
    entries.push(g.entries[0].clone());
    for n in 1..=n_max {
        let mut acc = witness.zero_like();
        for k in 1..=n {
            let gk = &g.entries[k];
            if gk.is_zero() {
                continue;
            }
            let mut inner = witness.zero_like();
            for comp in compositions(n, k) {
                let mut prod = witness.one_like();
                let mut weight = Rational::new(1.into(), 1.into());
                for i in comp {
                    prod = prod.mul(&f.entries[i]);
                    weight /= factorial(i);
                }
                inner = inner.add(&prod.mul(&witness.from_rational_like(&weight)));
            }
            let coeff = factorial(n) / factorial(k);
            acc = acc.add(&gk.mul(&inner).mul(&witness.from_rational_like(&coeff)));
        }
        entries.push(acc);
    }
    Ok(Jet { entries })
}

/// Inverse of a jet fixing the origin: requires `x_0 = 0` and `x_1 != 0`.
pub fn jet_invert<T: JetScalar>(f: &Jet<T>) -> Result<Jet<T>, JetError> {
    if !f.entries[0].is_zero() {
        return Err(JetError::NonzeroBasePoint);
    }
    if !f.is_regular() {
        return Err(JetError::NotRegular);
    }
    let n_max = f.order();
    let witness = &f.entries[0];
    let mut g = vec![witness.zero_like(); n_max + 1];
    g[1] = witness.one_like().div(&f.entries[1]);
    // with g_n unknown, compose(g, f)_n = g_n * f_1^n + (terms in g_{<n})
    let mut f1_pow = f.entries[1].clone();
    for n in 2..=n_max {
        f1_pow = f1_pow.mul(&f.entries[1]);
        let partial = jet_compose(&Jet { entries: g[..=n].to_vec() }, &f.truncated(n))?;
        g[n] = partial.entries[n].neg().div(&f1_pow);
    }
    Ok(Jet { entries: g })
}

/// GL(1) action: scales the p-th entry by lambda^p.
pub fn gl1_act<T: JetScalar>(lambda: &T, s: &Jet<T>) -> Result<Jet<T>, JetError> {
    if lambda.is_zero() {
        return Err(JetError::ZeroScalar);
    }
    let mut entries = Vec::with_capacity(s.entries.len());
    let mut pow = lambda.one_like();
    for e in &s.entries {
        entries.push(e.mul(&pow));
        pow = pow.mul(lambda);
    }
    Ok(Jet { entries })
}

/// Quotient coordinates of the GL(1) orbit of a regular jet:
/// `y_0 = x_0`, `y_p = x_p / x_1^p` for p >= 2 (y_1 = 1 omitted).
#[derive(Clone, Debug)]
pub struct NormalizedJet<T> {
    pub y0: T,
    /// entries for p = 2..=N in order
    pub higher: Vec<T>,
}

pub fn normalize_jet<T: JetScalar>(s: &Jet<T>) -> Result<NormalizedJet<T>, JetError> {
    if !s.is_regular() {
        return Err(JetError::NotRegular);
    }
    let mut higher = Vec::new();
    let mut x1_pow = s.entries[1].mul(&s.entries[1]);
    for p in 2..=s.order() {
        higher.push(s.entries[p].div(&x1_pow));
        x1_pow = x1_pow.mul(&s.entries[1]);
    }
    Ok(NormalizedJet { y0: s.entries[0].clone(), higher })
}

/// Jet extension of a chart morphism `alpha = -f(t)` in quotient
/// coordinates: component expressions for `beta_0` and `beta_n` (n >= 2) over
/// the variables `y_0, y_2, ..., y_N` and the chain `f`.
#[derive(Clone, Debug)]
pub struct JetMapExpr {
    pub order: usize,
    pub beta0: Expr,
    /// beta_n for n = 2..=order, in order
    pub betas: Vec<Expr>,
}

impl JetMapExpr {
    pub fn beta(&self, n: usize) -> &Expr {
        if n == 0 {
            &self.beta0
        } else {
            &self.betas[n - 2]
        }
    }
}

/// Builds the jet extension generically: compose the chain jet of `-f` with
/// the source jet `(y_0, 1, y_2, ..., y_N)` and normalize the result.
pub fn extend_morphism(ctx: &Ctx, chain: &str, order: usize) -> Result<JetMapExpr, JetError> {
    let chain_syms = ctx.chain_symbols(chain);
    if chain_syms.len() < order + 1 {
        return Err(JetError::Symbolic(crate::error::SymbolicError::TruncationExceeded {
            chain: chain.to_string(),
            order: chain_syms.len().saturating_sub(1) as u32,
        }));
    }
    let g_entries: Vec<Expr> = chain_syms[..=order]
        .iter()
        .map(|&s| Expr::symbol(ctx, s).neg())
        .collect();
    let g = Jet::new(g_entries);
    let mut src_entries = Vec::with_capacity(order + 1);
    src_entries.push(Expr::named(ctx, "y0").map_err(JetError::Symbolic)?);
    src_entries.push(Expr::one(ctx));
    for p in 2..=order {
        src_entries.push(Expr::named(ctx, &format!("y{p}")).map_err(JetError::Symbolic)?);
    }
    let src = Jet::new(src_entries);
    let composed = jet_compose(&g, &src)?;
    let normalized = normalize_jet(&composed)?;
    Ok(JetMapExpr { order, beta0: normalized.y0, betas: normalized.higher })
}

/// The same extension via its closed-form expression: for n >= 2,
/// `beta_n = (-1)^(n-1) ( n! sum_{k=1}^{n-1} (1/k!) f^(k)/(f')^n
///            sum_{i_1+...+i_k=n} y_{i_1}/i_1! ... y_{i_k}/i_k!
///            + f^(n)/(f')^n )` with `y_1 = 1`.
pub fn extension_closed_form(ctx: &Ctx, chain: &str, order: usize) -> Result<JetMapExpr, JetError> {
    let chain_syms = ctx.chain_symbols(chain);
    if chain_syms.len() < order + 1 {
        return Err(JetError::Symbolic(crate::error::SymbolicError::TruncationExceeded {
            chain: chain.to_string(),
            order: chain_syms.len().saturating_sub(1) as u32,
        }));
    }
    let fsym = |k: usize| Expr::symbol(ctx, chain_syms[k]);
    let y = |i: usize| -> Result<Expr, JetError> {
        if i == 1 {
            Ok(Expr::one(ctx))
        } else {
            Expr::named(ctx, &format!("y{i}")).map_err(JetError::Symbolic)
        }
    };
    let beta0 = fsym(0).neg();
    let mut betas = Vec::new();
    for n in 2..=order {
        let fp_n = fsym(1).powi(n as i64);
        let mut sum = Expr::zero(ctx);
        for k in 1..=(n - 1) {
            let mut inner = Expr::zero(ctx);
            for comp in compositions(n, k) {
                let mut prod = Expr::one(ctx);
                let mut weight = Rational::new(1.into(), 1.into());
                for i in comp {
                    prod = prod.mul(&y(i)?);
                    weight /= factorial(i);
                }
                inner = inner.add(&prod.scale(&weight));
            }
            let coeff = factorial(n) / factorial(k);
            sum = sum.add(&fsym(k).div(&fp_n).mul(&inner).scale(&coeff));
        }
        sum = sum.add(&fsym(n).div(&fp_n));
        if n % 2 == 0 {
            sum = sum.neg();
        }
        betas.push(sum);
    }
    Ok(JetMapExpr { order, beta0, betas })
}

/// Context for jet extensions: coordinates `y0, y2, ..., yN` plus the chain.
pub fn extension_context(chain: &str, order: usize, chain_order: u32) -> Ctx {
    let mut b = crate::symbolics::VariableContext::builder().coordinate("y0");
    for p in 2..=order {
        b = b.coordinate(&format!("y{p}"));
    }
    b.chain(chain, "y0", chain_order).build()
}

/// Brute-force oracle for composition: differentiate the truncated power
/// series `H(t) = sum_k g_k F(t)^k / k!` with `F(t) = sum_i f_i t^i / i!`
/// term by term and read derivatives at t = 0.
pub fn compose_series_oracle(ctx: &Ctx, order: usize) -> Result<(Jet<Expr>, Jet<Expr>), JetError> {
    let t = ctx.require("t").map_err(JetError::Symbolic)?;
    let tex = Expr::symbol(ctx, t);
    let mut f_series = Expr::zero(ctx);
    for i in 1..=order {
        let fi = Expr::named(ctx, &format!("fo{i}")).map_err(JetError::Symbolic)?;
        f_series = f_series.add(&fi.mul(&tex.powi(i as i64)).scale(&factorial(i).recip()));
    }
    let mut h_series = Expr::zero(ctx);
    for k in 1..=order {
        let gk = Expr::named(ctx, &format!("go{k}")).map_err(JetError::Symbolic)?;
        h_series = h_series.add(&gk.mul(&f_series.powi(k as i64)).scale(&factorial(k).recip()));
    }
    // read off derivatives of H at t = 0 up to `order`
    let mut h_entries = vec![Expr::zero(ctx)];
    let mut current = h_series;
    for _ in 1..=order {
        current = current.derivative(t).map_err(JetError::Symbolic)?;
        h_entries.push(current.subst_symbol_zero(t).map_err(JetError::Symbolic)?);
    }
    // the jet produced by the Faa di Bruno path on the same symbols
    let mut f_entries = vec![Expr::zero(ctx)];
    let mut g_entries = vec![Expr::zero(ctx)];
    for i in 1..=order {
        f_entries.push(Expr::named(ctx, &format!("fo{i}")).map_err(JetError::Symbolic)?);
        g_entries.push(Expr::named(ctx, &format!("go{i}")).map_err(JetError::Symbolic)?);
    }
    let composed = jet_compose(&Jet::new(g_entries), &Jet::new(f_entries))?;
    Ok((composed, Jet::new(h_entries)))
}

/// Context for the series oracle: `t` plus free coefficients of both series.
pub fn oracle_context(order: usize) -> Ctx {
    let mut b = crate::symbolics::VariableContext::builder().coordinate("t");
    for i in 1..=order {
        b = b.coordinate(&format!("fo{i}"));
    }
    for i in 1..=order {
        b = b.coordinate(&format!("go{i}"));
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::symbolics::VariableContext;

    fn free_jet_ctx(order: usize) -> Ctx {
        let mut b = VariableContext::builder();
        for p in 0..=order {
            b = b.coordinate(&format!("a{p}"));
        }
        for p in 0..=order {
            b = b.coordinate(&format!("b{p}"));
        }
        b.build()
    }

    fn symbolic_jet(ctx: &Ctx, prefix: &str, order: usize, base_zero: bool) -> Jet<Expr> {
        let entries = (0..=order)
            .map(|p| {
                if p == 0 && base_zero {
                    Expr::zero(ctx)
                } else {
                    Expr::named(ctx, &format!("{prefix}{p}")).unwrap()
                }
            })
            .collect();
        Jet::new(entries)
    }

    #[test]
    fn identity_is_neutral() {
        let ctx = free_jet_ctx(4);
        let f = symbolic_jet(&ctx, "a", 4, true);
        let id = Jet::identity(4, &Expr::zero(&ctx));
        let left = jet_compose(&id, &f).unwrap();
        let right = jet_compose(&f, &id).unwrap();
        for p in 0..=4 {
            assert!(left.entry(p).equals(f.entry(p)));
            assert!(right.entry(p).equals(f.entry(p)));
        }
    }

    #[test]
    fn low_order_composition_formulas() {
        let ctx = free_jet_ctx(3);
        let g = symbolic_jet(&ctx, "a", 3, false);
        let f = symbolic_jet(&ctx, "b", 3, false);
        let h = jet_compose(&g, &f).unwrap();
        let a = |p: usize| Expr::named(&ctx, &format!("a{p}")).unwrap();
        let b = |p: usize| Expr::named(&ctx, &format!("b{p}")).unwrap();
        // h_2 = g_2 f_1^2 + g_1 f_2
        let h2 = a(2).mul(&b(1).powi(2)).add(&a(1).mul(&b(2)));
        assert!(h.entry(2).equals(&h2));
        // h_3 = g_3 f_1^3 + 3 g_2 f_1 f_2 + g_1 f_3
        let h3 = a(3)
            .mul(&b(1).powi(3))
            .add(&a(2).mul(&b(1)).mul(&b(2)).scale(&rat(3)))
            .add(&a(1).mul(&b(3)));
        assert!(h.entry(3).equals(&h3));
    }

    #[test]
    fn composition_matches_series_oracle_up_to_order_8() {
        let ctx = oracle_context(8);
        let (faa, oracle) = compose_series_oracle(&ctx, 8).unwrap();
        for n in 1..=8 {
            assert!(
                faa.entry(n).equals(oracle.entry(n)),
                "order {n}: {} vs {}",
                faa.entry(n),
                oracle.entry(n)
            );
        }
    }

    #[test]
    fn inversion_examples() {
        let ctx = free_jet_ctx(4);
        // linear jet (0, a1, 0, ...) inverts to (0, 1/a1, 0, ...)
        let a1 = Expr::named(&ctx, "a1").unwrap();
        let zero = Expr::zero(&ctx);
        let f = Jet::new(vec![zero.clone(), a1.clone(), zero.clone(), zero.clone(), zero.clone()]);
        let g = jet_invert(&f).unwrap();
        assert!(g.entry(1).equals(&Expr::one(&ctx).div(&a1)));
        assert!(g.entry(2).is_zero() && g.entry(3).is_zero());
        // f = (0, 1, b, 0): inverse has g_1 = 1, g_2 = -b
        let b = Expr::named(&ctx, "b2").unwrap();
        let f = Jet::new(vec![zero.clone(), Expr::one(&ctx), b.clone(), zero.clone()]);
        let g = jet_invert(&f).unwrap();
        assert!(g.entry(1).equals(&Expr::one(&ctx)));
        assert!(g.entry(2).equals(&b.neg()));
        let id = jet_compose(&g, &f).unwrap();
        assert!(id.entry(1).equals(&Expr::one(&ctx)) && id.entry(2).is_zero() && id.entry(3).is_zero());
    }

    #[test]
    fn inversion_requires_regular_based_jet() {
        let ctx = free_jet_ctx(2);
        let zero = Expr::zero(&ctx);
        let one = Expr::one(&ctx);
        let offset = Jet::new(vec![one.clone(), one.clone(), zero.clone()]);
        assert!(matches!(jet_invert(&offset), Err(JetError::NonzeroBasePoint)));
        let singular = Jet::new(vec![zero.clone(), zero.clone(), one.clone()]);
        assert!(matches!(jet_invert(&singular), Err(JetError::NotRegular)));
    }

    #[test]
    fn two_sided_inverse_at_order_8() {
        let ctx = free_jet_ctx(8);
        let f = symbolic_jet(&ctx, "a", 8, true);
        let g = jet_invert(&f).unwrap();
        let left = jet_compose(&g, &f).unwrap();
        let right = jet_compose(&f, &g).unwrap();
        let id = Jet::identity(8, &Expr::zero(&ctx));
        for p in 0..=8 {
            assert!(left.entry(p).equals(id.entry(p)), "left inverse fails at {p}");
            assert!(right.entry(p).equals(id.entry(p)), "right inverse fails at {p}");
        }
    }

    #[test]
    fn associativity_of_composition() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let ctx = VariableContext::builder().coordinates(["u", "v", "w"]).build();
        for order in [3usize, 5, 8] {
            for _ in 0..3 {
                let mut random_jet = |base_zero: bool| {
                    let entries = (0..=order)
                        .map(|p| {
                            if p == 0 && base_zero {
                                return Expr::zero(&ctx);
                            }
                            let names = ["u", "v", "w"];
                            let mut e = Expr::int(&ctx, rng.gen_range(-2..=2i64));
                            e = e.add(&Expr::named(&ctx, names[rng.gen_range(0..3)]).unwrap());
                            e
                        })
                        .collect();
                    Jet::new(entries)
                };
                let a = random_jet(true);
                let b = random_jet(true);
                let c = random_jet(true);
                let lhs = jet_compose(&a, &jet_compose(&b, &c).unwrap()).unwrap();
                let rhs = jet_compose(&jet_compose(&a, &b).unwrap(), &c).unwrap();
                for p in 0..=order {
                    assert!(lhs.entry(p).equals(rhs.entry(p)), "order {order} slot {p}");
                }
            }
        }
    }

    #[test]
    fn gl1_action_and_normalization() {
        let ctx = free_jet_ctx(3);
        let s = symbolic_jet(&ctx, "a", 3, false);
        // lambda = 1 fixes the jet
        let one = Expr::one(&ctx);
        let fixed = gl1_act(&one, &s).unwrap();
        for p in 0..=3 {
            assert!(fixed.entry(p).equals(s.entry(p)));
        }
        // lambda = 2 scales entry p by 2^p
        let two = Expr::int(&ctx, 2);
        let scaled = gl1_act(&two, &s).unwrap();
        for p in 0..=3 {
            assert!(scaled.entry(p).equals(&s.entry(p).scale(&rat(1 << p))));
        }
        assert!(matches!(gl1_act(&Expr::zero(&ctx), &s), Err(JetError::ZeroScalar)));
        // equivariance with a symbolic lambda: normalize(gl1(lambda, s)) = normalize(s)
        let lctx = VariableContext::builder()
            .coordinates(["l", "x0", "x1", "x2", "x3"])
            .build();
        let lam = Expr::named(&lctx, "l").unwrap();
        let s = Jet::new(
            (0..=3)
                .map(|p| Expr::named(&lctx, &format!("x{p}")).unwrap())
                .collect(),
        );
        let ns = normalize_jet(&s).unwrap();
        let nls = normalize_jet(&gl1_act(&lam, &s).unwrap()).unwrap();
        assert!(ns.y0.equals(&nls.y0));
        for (a, b) in ns.higher.iter().zip(&nls.higher) {
            assert!(a.equals(b));
        }
    }

    #[test]
    fn normalization_values() {
        let ctx = free_jet_ctx(2);
        // (0, 2, 8) -> y0 = 0, y2 = 8/4 = 2
        let s = Jet::new(vec![Expr::zero(&ctx), Expr::int(&ctx, 2), Expr::int(&ctx, 8)]);
        let n = normalize_jet(&s).unwrap();
        assert!(n.y0.is_zero());
        assert!(n.higher[0].equals(&Expr::int(&ctx, 2)));
        // symbolic (x0, x1, x2) -> (x0, x2/x1^2)
        let xctx = VariableContext::builder().coordinates(["x0", "x1", "x2"]).build();
        let s = Jet::new(vec![
            Expr::named(&xctx, "x0").unwrap(),
            Expr::named(&xctx, "x1").unwrap(),
            Expr::named(&xctx, "x2").unwrap(),
        ]);
        let n = normalize_jet(&s).unwrap();
        let expect = Expr::named(&xctx, "x2")
            .unwrap()
            .div(&Expr::named(&xctx, "x1").unwrap().powi(2));
        assert!(n.higher[0].equals(&expect));
    }

    #[test]
    fn extension_pipeline_matches_closed_form() {
        for order in 2..=4usize {
            let ctx = extension_context("f", order, order as u32 + 1);
            let generic = extend_morphism(&ctx, "f", order).unwrap();
            let closed = extension_closed_form(&ctx, "f", order).unwrap();
            assert!(generic.beta0.equals(&closed.beta0));
            for n in 2..=order {
                assert!(
                    generic.beta(n).equals(closed.beta(n)),
                    "beta_{n} differs: {} vs {}",
                    generic.beta(n),
                    closed.beta(n)
                );
            }
        }
    }

    #[test]
    fn extension_beta0_and_beta2() {
        let ctx = extension_context("f", 3, 4);
        let ext = extend_morphism(&ctx, "f", 3).unwrap();
        let f0 = Expr::named(&ctx, "f").unwrap();
        assert!(ext.beta0.equals(&f0.neg()));
        // beta_2 = -(y2/f' + f''/f'^2)
        let f1 = Expr::named(&ctx, "f'").unwrap();
        let f2 = Expr::named(&ctx, "f''").unwrap();
        let y2 = Expr::named(&ctx, "y2").unwrap();
        let expect = y2.div(&f1).add(&f2.div(&f1.powi(2))).neg();
        assert!(ext.beta(2).equals(&expect));
    }

    #[test]
    fn extension_concrete_substitution_oracle() {
        // instantiating the chain with t^3 at the formal level reproduces
        // direct jet composition + normalization
        let order = 3usize;
        let ctx = extension_context("f", order, order as u32);
        let ext = extend_morphism(&ctx, "f", order).unwrap();
        // f(y0) = y0^3: chain entries f = y0^3, f' = 3 y0^2, f'' = 6 y0, f''' = 6
        let y0 = Expr::named(&ctx, "y0").unwrap();
        let chain_vals = [
            y0.powi(3),
            y0.powi(2).scale(&rat(3)),
            y0.scale(&rat(6)),
            Expr::int(&ctx, 6),
        ];
        let mut map = SubstMap::new(&ctx, &ctx);
        for id in 0..ctx.len() {
            map.assign(id, Expr::symbol(&ctx, id));
        }
        for (sym, val) in ctx.chain_symbols("f").into_iter().zip(chain_vals.iter()) {
            map.assign(sym, val.clone());
        }
        // direct path: compose g = -(y0^3 jet) with source jet and normalize
        let src = Jet::new(vec![
            y0.clone(),
            Expr::one(&ctx),
            Expr::named(&ctx, "y2").unwrap(),
            Expr::named(&ctx, "y3").unwrap(),
        ]);
        let g = Jet::new(vec![
            y0.powi(3).neg(),
            y0.powi(2).scale(&rat(-3)),
            y0.scale(&rat(-6)),
            Expr::int(&ctx, -6),
        ]);
        let direct = normalize_jet(&jet_compose(&g, &src).unwrap()).unwrap();
        assert!(ext.beta0.substitute(&map).unwrap().equals(&direct.y0));
        for n in 2..=order {
            assert!(ext.beta(n).substitute(&map).unwrap().equals(&direct.higher[n - 2]));
        }
    }

    #[test]
    fn extension_denominators_are_powers_of_f_prime() {
        // each beta_n times (f')^n clears every denominator
        let ctx = extension_context("f", 4, 5);
        let ext = extend_morphism(&ctx, "f", 4).unwrap();
        let f1 = Expr::named(&ctx, "f'").unwrap();
        for n in 2..=4 {
            let cleared = ext.beta(n).mul(&f1.powi(n as i64));
            assert!(cleared.den().is_one(), "beta_{n} has unexpected denominator");
        }
    }

    #[test]
    fn order_mismatch_is_rejected() {
        let ctx = free_jet_ctx(3);
        let f = symbolic_jet(&ctx, "a", 3, true);
        let g = symbolic_jet(&ctx, "b", 2, true);
        assert!(matches!(jet_compose(&g, &f), Err(JetError::OrderMismatch { .. })));
    }
}
