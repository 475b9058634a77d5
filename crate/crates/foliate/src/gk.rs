//! The Gelfand-Kazhdan construction on the space of frames of infinite
//! order of a 1-manifold, at finite jet truncation.
//!
//! The canonical 1-form is derived from its definition rather than
//! transcribed: a one-parameter perturbation `x_p + u v_p` is pushed through
//! `k_0^{-1} . k_u` with jet arithmetic, and the u-derivative at 0 is read
//! off. The classical component formulas then serve as test oracles for
//! the derivation.

use crate::error::{BasicCheck, GkError, SymbolicError};
use crate::jet::{jet_compose, jet_invert, Jet};
use crate::rational::Rational;
use crate::symbolics::{Ctx, Expr, Form, SubstMap, VariableContext};
use crate::wn::WCochain;

/// Finite-order chart on the frame space: coordinates `x_0..x_N` with `x_1`
/// invertible, plus the quotient chart `y_0, y_2..y_N`.
pub struct GKChart {
    order: usize,
    x_ctx: Ctx,
    y_ctx: Ctx,
}

impl GKChart {
    pub fn new(order: usize) -> GKChart {
        assert!(order >= 2, "truncation order must be at least 2");
        let mut xb = VariableContext::builder();
        for p in 0..=order {
            xb = xb.coordinate(&format!("x{p}"));
        }
        let mut yb = VariableContext::builder().coordinate("y0");
        for p in 2..=order {
            yb = yb.coordinate(&format!("y{p}"));
        }
        GKChart { order, x_ctx: xb.build(), y_ctx: yb.build() }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn x_ctx(&self) -> &Ctx {
        &self.x_ctx
    }

    pub fn y_ctx(&self) -> &Ctx {
        &self.y_ctx
    }

    fn x(&self, p: usize) -> Expr {
        Expr::named(&self.x_ctx, &format!("x{p}")).expect("chart coordinate")
    }
}

/// Derives the components `omega_0 .. omega_{N-1}` of the canonical 1-form
/// from the definition `omega(tau) = -j d/du (k_0^{-1} . k_u)(0)`.
pub fn gk_form_components(chart: &GKChart) -> Result<Vec<Form>, GkError> {
    let n = chart.order;
    // scratch context: base-point-free chart entries, perturbation slots, u
    let mut sb = VariableContext::builder();
    for p in 1..=n {
        sb = sb.coordinate(&format!("x{p}"));
    }
    for p in 0..n {
        sb = sb.coordinate(&format!("v{p}"));
    }
    let scratch = sb.coordinate("u").build();
    let x = |p: usize| Expr::named(&scratch, &format!("x{p}")).unwrap();
    let v = |p: usize| Expr::named(&scratch, &format!("v{p}")).unwrap();
    let u = Expr::named(&scratch, "u").unwrap();

    // h = (0, x_1, ..., x_N), inverted exactly to order N
    let mut h_entries = vec![Expr::zero(&scratch)];
    for p in 1..=n {
        h_entries.push(x(p));
    }
    let g = jet_invert(&Jet::new(h_entries)).map_err(|e| match e {
        crate::error::JetError::Symbolic(s) => GkError::Symbolic(s),
        other => GkError::Symbolic(SymbolicError::MissingComponent { name: other.to_string() }),
    })?;

    // ghat_k = g_k + u v_0 g_{k+1}: derivatives of the inverse at the
    // shifted point u v_0, exact modulo u^2
    let shift = u.mul(&v(0));
    let ghat_entries: Vec<Expr> = (0..n)
        .map(|k| g.entry(k).add(&shift.mul(g.entry(k + 1))))
        .collect();
    let ghat = Jet::new(ghat_entries);

    // perturbed curve jet truncated to order N-1
    let mut hu_entries = vec![shift.clone()];
    for p in 1..n {
        hu_entries.push(x(p).add(&u.mul(&v(p))));
    }
    let hu = Jet::new(hu_entries);

    let composite = jet_compose(&ghat, &hu).map_err(|e| match e {
        crate::error::JetError::Symbolic(s) => GkError::Symbolic(s),
        other => GkError::Symbolic(SymbolicError::MissingComponent { name: other.to_string() }),
    })?;

    let u_id = scratch.require("u").map_err(GkError::Symbolic)?;
    let mut omegas = Vec::with_capacity(n);
    for p in 0..n {
        let du = composite
            .entry(p)
            .derivative(u_id)
            .map_err(GkError::Symbolic)?
            .subst_symbol_zero(u_id)
            .map_err(GkError::Symbolic)?;
        let mut form = Form::zero(&chart.x_ctx, 1);
        for q in 0..n {
            let vq = scratch.require(&format!("v{q}")).map_err(GkError::Symbolic)?;
            let mut coeff = du.derivative(vq).map_err(GkError::Symbolic)?;
            for r in 0..n {
                let vr = scratch.require(&format!("v{r}")).map_err(GkError::Symbolic)?;
                coeff = coeff.subst_symbol_zero(vr).map_err(GkError::Symbolic)?;
            }
            if coeff.is_zero() {
                continue;
            }
            let coeff = coeff.transplant(&chart.x_ctx).map_err(GkError::Symbolic)?;
            // omega_p(tau) = -d/du c_p, and v_q marks the dx_q slot
            form.add_term(vec![q], coeff.neg());
        }
        omegas.push(form);
    }
    Ok(omegas)
}

/// The homomorphism from the cochain complex of formal vector fields in one
/// variable into forms on the frame chart: `c^1_{1..1}` (r ones) maps to
/// `omega_r` and products map to wedge products.
pub fn alpha(c: &WCochain, chart: &GKChart, omegas: &[Form]) -> Result<Form, GkError> {
    assert_eq!(c.n(), 1, "the frame construction here is one-dimensional");
    let mut out = Form::zero(&chart.x_ctx, c.degree());
    for (mono, coeff) in c.terms() {
        let mut acc = Form::scalar(Expr::constant(&chart.x_ctx, coeff.clone()));
        for g in mono {
            let r = g.lower().len();
            if r >= omegas.len() {
                return Err(GkError::Symbolic(SymbolicError::TruncationExceeded {
                    chain: "omega".to_string(),
                    order: omegas.len().saturating_sub(1) as u32,
                }));
            }
            acc = acc.wedge(&omegas[r]).map_err(GkError::Symbolic)?;
        }
        out = out.add(&acc);
    }
    Ok(out)
}

/// Connection form and curvature: `beta = -alpha(c^1_1)`, `R = d beta +
/// beta ^ beta` (the square vanishes for a scalar-valued 1-form).
pub fn connection_and_curvature(
    chart: &GKChart,
    omegas: &[Form],
) -> Result<(Form, Form), GkError> {
    let c11 = WCochain::generator(1, crate::wn::WGenerator::new(1, vec![1]));
    let beta = alpha(&c11, chart, omegas)?.neg();
    let square = beta.wedge(&beta).map_err(GkError::Symbolic)?;
    assert!(square.is_zero(), "odd-degree square must vanish");
    let r = beta.exterior_derivative().map_err(GkError::Symbolic)?.add(&square);
    Ok((beta, r))
}

/// The scaling field generating the GL(1) action `lambda s = (lambda^p x_p)`:
/// `E = sum_p p x_p d/dx_p`.
fn euler_field(chart: &GKChart) -> Vec<Expr> {
    (0..=chart.order)
        .map(|p| chart.x(p).scale(&Rational::from_integer((p as i64).into())))
        .collect()
}

/// Reduces a GL(1)-basic form on the frame chart to quotient coordinates
/// `y_0 = x_0, y_p = x_p/x_1^p`. Errors when the form is not horizontal or
/// not invariant for the scaling action, reporting which check failed.
pub fn reduce_to_quotient(omega: &Form, chart: &GKChart) -> Result<Form, GkError> {
    let e = euler_field(chart);
    let contracted = omega.interior_product(&e);
    if !contracted.is_zero() {
        return Err(GkError::NotBasic {
            check: BasicCheck::Horizontality,
            witness: contracted.to_string(),
        });
    }
    let lie = omega
        .exterior_derivative()
        .map_err(GkError::Symbolic)?
        .interior_product(&e);
    if !lie.is_zero() {
        return Err(GkError::NotBasic { check: BasicCheck::Invariance, witness: lie.to_string() });
    }
    // section x_0 = y_0, x_1 = 1, x_p = y_p
    let mut section = SubstMap::new(&chart.x_ctx, &chart.y_ctx);
    section
        .assign_named(&chart.x_ctx, "x0", Expr::named(&chart.y_ctx, "y0").unwrap())
        .map_err(GkError::Symbolic)?;
    section
        .assign_named(&chart.x_ctx, "x1", Expr::one(&chart.y_ctx))
        .map_err(GkError::Symbolic)?;
    for p in 2..=chart.order {
        section
            .assign_named(
                &chart.x_ctx,
                &format!("x{p}"),
                Expr::named(&chart.y_ctx, &format!("y{p}")).unwrap(),
            )
            .map_err(GkError::Symbolic)?;
    }
    let reduced = omega.pullback(&section).map_err(GkError::Symbolic)?;
    // consistency: pulling back along the quotient map recovers the form
    let mut quotient = SubstMap::new(&chart.y_ctx, &chart.x_ctx);
    quotient
        .assign_named(&chart.y_ctx, "y0", chart.x(0))
        .map_err(GkError::Symbolic)?;
    for p in 2..=chart.order {
        let ypx = chart.x(p).div(&chart.x(1).powi(p as i64));
        quotient
            .assign_named(&chart.y_ctx, &format!("y{p}"), ypx)
            .map_err(GkError::Symbolic)?;
    }
    let roundtrip = reduced.pullback(&quotient).map_err(GkError::Symbolic)?;
    assert!(
        roundtrip.equals(omega).map_err(GkError::Symbolic)?,
        "basic form failed to descend consistently"
    );
    Ok(reduced)
}

/// The quotient 2-form `dy_2 ^ dy_0` representing the first Chern class in
/// quotient coordinates.
pub fn c1_quotient_form(chart: &GKChart) -> Form {
    let dy2 = Form::dcoord_named(&chart.y_ctx, "y2").unwrap();
    let dy0 = Form::dcoord_named(&chart.y_ctx, "y0").unwrap();
    dy2.wedge(&dy0).unwrap()
}

/// The recorded constant c with `reduce(alpha(Psi_1)) = c * dy_2 ^ dy_0`;
/// the derivation pins it to +1 and the stability across truncation orders
/// is asserted in the acceptance suite.
pub fn reduction_sign(chart: &GKChart, omegas: &[Form]) -> Result<i8, GkError> {
    let psi1 = crate::wn::chern_cocycle(1, 1).expect("Psi_1 exists for n = 1");
    let image = alpha(&psi1, chart, omegas)?;
    let reduced = reduce_to_quotient(&image, chart)?;
    let target = c1_quotient_form(chart);
    if reduced.equals(&target).map_err(GkError::Symbolic)? {
        Ok(1)
    } else if reduced.equals(&target.neg()).map_err(GkError::Symbolic)? {
        Ok(-1)
    } else {
        panic!("reduced image of Psi_1 is not proportional to dy2^dy0: {reduced}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wn::{differential, enumerate_generators, WGenerator};

    fn chart_and_forms(order: usize) -> (GKChart, Vec<Form>) {
        let chart = GKChart::new(order);
        let omegas = gk_form_components(&chart).unwrap();
        (chart, omegas)
    }

    fn x(chart: &GKChart, p: usize) -> Expr {
        Expr::named(chart.x_ctx(), &format!("x{p}")).unwrap()
    }

    fn dx(chart: &GKChart, p: usize) -> Form {
        Form::dcoord_named(chart.x_ctx(), &format!("x{p}")).unwrap()
    }

    #[test]
    fn derived_components_match_classical_formulas() {
        let (chart, omegas) = chart_and_forms(4);
        // omega_0 = -dx_0/x_1
        let expect0 = dx(&chart, 0).scale_expr(&Expr::one(chart.x_ctx()).div(&x(&chart, 1)).neg());
        assert!(omegas[0].equals(&expect0).unwrap());
        // omega_1 = (x_2/x_1^2) dx_0 - dx_1/x_1; a transcription with the
        // opposite dx_0 sign circulates, but it is inconsistent with
        // omega_0, omega_2 and the chain-map identity (companion test below)
        let expect1 = dx(&chart, 0)
            .scale_expr(&x(&chart, 2).div(&x(&chart, 1).powi(2)))
            .add(&dx(&chart, 1).scale_expr(&Expr::one(chart.x_ctx()).div(&x(&chart, 1)).neg()));
        assert!(omegas[1].equals(&expect1).unwrap(), "omega_1 = {}", omegas[1]);
        // omega_2 = (x_3/x_1^2 - 2 x_2^2/x_1^3) dx_0 + 2 x_2/x_1^2 dx_1 - dx_2/x_1
        let c0 = x(&chart, 3)
            .div(&x(&chart, 1).powi(2))
            .sub(&x(&chart, 2).powi(2).scale(&crate::rational::rat(2)).div(&x(&chart, 1).powi(3)));
        let c1 = x(&chart, 2).scale(&crate::rational::rat(2)).div(&x(&chart, 1).powi(2));
        let c2 = Expr::one(chart.x_ctx()).div(&x(&chart, 1)).neg();
        let expect2 = dx(&chart, 0)
            .scale_expr(&c0)
            .add(&dx(&chart, 1).scale_expr(&c1))
            .add(&dx(&chart, 2).scale_expr(&c2));
        assert!(omegas[2].equals(&expect2).unwrap(), "omega_2 = {}", omegas[2]);
    }

    #[test]
    fn omega1_dx0_sign_is_pinned_by_chain_map() {
        // d omega_1 = omega_2 ^ omega_0 holds for the derived omega_1 and
        // fails for the variant with the dx_0 coefficient negated
        let (chart, omegas) = chart_and_forms(4);
        let d1 = omegas[1].exterior_derivative().unwrap();
        let rhs = omegas[2].wedge(&omegas[0]).unwrap();
        assert!(d1.equals(&rhs).unwrap());
        let flipped = {
            let coeff = omegas[1].coefficient(&[0]);
            omegas[1]
                .add(&dx(&chart, 0).scale_expr(&coeff.scale(&crate::rational::rat(-2))))
        };
        let d_flipped = flipped.exterior_derivative().unwrap();
        assert!(!d_flipped.equals(&rhs).unwrap());
    }

    #[test]
    fn alpha_is_a_chain_map_up_to_r3() {
        let (chart, omegas) = chart_and_forms(6);
        for g in enumerate_generators(1, 3) {
            let c = WCochain::generator(1, g.clone());
            let lhs = alpha(&differential(&c), &chart, &omegas).unwrap();
            let rhs = alpha(&c, &chart, &omegas).unwrap().exterior_derivative().unwrap();
            assert!(lhs.equals(&rhs).unwrap(), "chain map fails on {g}");
        }
        // alpha of the scalar 1 is the constant function 1
        let one = WCochain::scalar(1, crate::rational::rat(1));
        let img = alpha(&one, &chart, &omegas).unwrap();
        assert!(img.equals(&Form::one(chart.x_ctx())).unwrap());
    }

    #[test]
    fn curvature_identities() {
        let (chart, omegas) = chart_and_forms(5);
        let (beta, r) = connection_and_curvature(&chart, &omegas).unwrap();
        // beta ^ beta = 0 and R = d beta
        assert!(beta.wedge(&beta).unwrap().is_zero());
        assert!(r.equals(&beta.exterior_derivative().unwrap()).unwrap());
        // tr(R) agrees with the image of Psi_1 up to the recorded global
        // sign: with beta = -alpha(c^1_1) one gets tr(R) = -alpha(Psi_1)
        let psi1 = crate::wn::chern_cocycle(1, 1).unwrap();
        let a_psi1 = alpha(&psi1, &chart, &omegas).unwrap();
        assert!(r.equals(&a_psi1.neg()).unwrap(), "tr R = -alpha(Psi_1)");
        // with the opposite connection convention the identity holds on the
        // nose: R' = d(alpha(c^1_1)) - alpha(c^1_1)^2 gives tr R' = alpha(Psi_1)
        let beta_alt = beta.neg();
        let r_alt = beta_alt
            .exterior_derivative()
            .unwrap()
            .sub(&beta_alt.wedge(&beta_alt).unwrap());
        assert!(r_alt.equals(&a_psi1).unwrap());
    }

    #[test]
    fn relative_cochains_map_to_basic_forms() {
        let (chart, omegas) = chart_and_forms(5);
        let psi1 = crate::wn::chern_cocycle(1, 1).unwrap();
        assert!(crate::wn::is_relative(&psi1, 1));
        let img = alpha(&psi1, &chart, &omegas).unwrap();
        // basic-ness: both checks pass inside reduce_to_quotient
        let reduced = reduce_to_quotient(&img, &chart).unwrap();
        assert!(reduced.equals(&c1_quotient_form(&chart)).unwrap());
        assert_eq!(reduction_sign(&chart, &omegas).unwrap(), 1);
    }

    #[test]
    fn non_basic_forms_are_rejected() {
        let (chart, _) = chart_and_forms(4);
        let dx1 = dx(&chart, 1);
        match reduce_to_quotient(&dx1, &chart) {
            Err(GkError::NotBasic { check: BasicCheck::Horizontality, .. }) => {}
            other => panic!("expected horizontality failure, got {other:?}"),
        }
        // dx_0 ^ dx_2 is horizontal at x-degree... it is not: the scaling
        // field contracts dx_2 with weight 2 x_2; use a genuinely
        // horizontal but non-invariant form: x_1 * omega-style candidates
        // are covered by the invariance branch below
        let dy_like = dx(&chart, 0);
        match reduce_to_quotient(&dy_like, &chart) {
            Ok(f) => {
                // dx_0 is basic (weight 0, no x_1 dependence) and descends to dy_0
                let dy0 = Form::dcoord_named(chart.y_ctx(), "y0").unwrap();
                assert!(f.equals(&dy0).unwrap());
            }
            Err(e) => panic!("dx_0 should be basic: {e:?}"),
        }
        // x_0 dx_2/x_1^2 is horizontal?? contraction gives 2 x_0 x_2 / x_1^2
        let cand = dx(&chart, 2).scale_expr(&x(&chart, 0).div(&x(&chart, 1).powi(2)));
        match reduce_to_quotient(&cand, &chart) {
            Err(GkError::NotBasic { .. }) => {}
            other => panic!("expected a basic-ness failure, got {:?}", other.map(|f| f.to_string())),
        }
    }

    #[test]
    fn quotient_chern_form_is_exact_on_the_chart() {
        // c_{1,y} = d(y_2 dy_0)
        let chart = GKChart::new(3);
        let y2 = Expr::named(chart.y_ctx(), "y2").unwrap();
        let dy0 = Form::dcoord_named(chart.y_ctx(), "y0").unwrap();
        let primitive = dy0.scale_expr(&y2);
        let d = primitive.exterior_derivative().unwrap();
        assert!(d.equals(&c1_quotient_form(&chart)).unwrap());
    }

    #[test]
    fn truncation_surfaces_as_error() {
        let (chart, omegas) = chart_and_forms(3);
        // a generator with r = 3 needs omega_3, unavailable at N = 3
        let c = WCochain::generator(1, WGenerator::new(1, vec![1, 1, 1]));
        assert!(matches!(
            alpha(&c, &chart, &omegas),
            Err(GkError::Symbolic(SymbolicError::TruncationExceeded { .. }))
        ));
    }
}
