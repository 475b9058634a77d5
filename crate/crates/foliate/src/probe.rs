//! Nontriviality probe for the first Chern class of the Reeb leaf space.
//!
//! If the class were exact, a primitive could be brought to the shape
//! `gamma = a_2 da_0 + lambda` on the angular chart with `lambda` closed and
//! period-1 invariant. Pulling back through the jet-extended morphism and
//! reading the `dy_0` coefficient `A_0` decomposes it into the boundary
//! divergent part `f''/f'` plus correction terms whose decay the boundary
//! limit facts control. The probe checks a user-supplied finite candidate
//! family and reports the contradiction mechanism term by term: the report
//! carries finite evidence, never a proof.

use serde::Serialize;

use crate::error::{NumericError, ProbeError};
use crate::numeric::{eval_expr, Mpf};
use crate::presentation::AtlasPresentation;
use crate::profile::{grid_point, ReebProfile};
use crate::rational::Rational;
use crate::symbolics::{Ctx, Expr, Form};

/// Candidate closed period-1 correction 1-form on the angular chart.
#[derive(Clone)]
pub struct Candidate {
    pub name: String,
    pub form: Form,
}

impl Candidate {
    pub fn zero(ca: &Ctx) -> Candidate {
        Candidate { name: "zero".into(), form: Form::zero(ca, 1) }
    }

    /// `lambda = c * da_2` for a rational constant c.
    pub fn constant_da2(ca: &Ctx, c: Rational) -> Candidate {
        let form = Form::dcoord_named(ca, "a2")
            .expect("angular chart has a2")
            .scale(&c);
        Candidate { name: format!("{}*da2", crate::rational::rational_to_string(&c)), form }
    }

    /// Trig-polynomial example: `sin(tau a0) a2^2 da0 - (2/tau) cos(tau a0) a2 da2`,
    /// closed and period-1 by construction, with the `a2^2` factor giving the
    /// quadratic vanishing the proof forces on the `da0` coefficient.
    pub fn trig_example(ca: &Ctx) -> Candidate {
        let sin0 = Expr::named(ca, "sin0").unwrap();
        let cos0 = Expr::named(ca, "cos0").unwrap();
        let tau = Expr::named(ca, "tau").unwrap();
        let a2 = Expr::named(ca, "a2").unwrap();
        let da0 = Form::dcoord_named(ca, "a0").unwrap();
        let da2 = Form::dcoord_named(ca, "a2").unwrap();
        let form = da0
            .scale_expr(&sin0.mul(&a2.powi(2)))
            .add(&da2.scale_expr(
                &cos0.mul(&a2).mul(&Expr::int(ca, 2)).div(&tau).neg(),
            ));
        Candidate { name: "sin(tau*a0)*a2^2*da0 - (2/tau)*cos(tau*a0)*a2*da2".into(), form }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TermSequence {
    pub label: String,
    pub values: Vec<String>,
    pub max_abs: String,
    /// |last| <= max(|first|, 1) and max <= 2 max(|first|, 1): the term does
    /// not grow along the boundary grid
    pub bounded: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub candidate: String,
    pub candidate_form: String,
    pub closed: bool,
    pub periodic: bool,
    pub a0: String,
    pub precision_bits: usize,
    pub grid: Vec<String>,
    /// the `f''/f'` part of `A_0`
    pub divergent_term: TermSequence,
    pub divergent_strictly_increasing: bool,
    /// candidate-dependent parts of `A_0`
    pub corrections: Vec<TermSequence>,
    pub corrections_bounded: bool,
    pub a0_values: Vec<String>,
    pub a0_strictly_increasing: bool,
    /// finite evidence consistent with the contradiction in the exactness
    /// argument: corrections stay bounded while f''/f' (and with it A_0)
    /// grows, so no candidate of this shape extends smoothly to the boundary
    pub contradiction_evidence: bool,
}

fn bounded_verdict(values: &[Mpf]) -> (String, bool) {
    let max_abs = values
        .iter()
        .map(Mpf::abs)
        .max_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    let first = values[0].abs();
    let last = values[values.len() - 1].abs();
    let cap = if first > Mpf::one(first.prec()) { first.clone() } else { Mpf::one(first.prec()) };
    let bounded = last <= cap && max_abs <= cap.add(&cap);
    (max_abs.to_dec_string(20), bounded)
}

/// Runs the probe for one candidate on the Reeb presentation.
pub fn nontriviality_probe(
    presentation: &AtlasPresentation,
    candidate: &Candidate,
    profile: &ReebProfile,
    k_max: usize,
    prec: usize,
) -> Result<ProbeReport, ProbeError> {
    let ca = &presentation.charts[0].ctx;
    let ct = &presentation.charts[1].ctx;
    let phi = &presentation.generators[presentation
        .generator_index("phi")
        .expect("Reeb presentation morphism")];
    // quotient coordinates are a0, a2..aN, so the count equals the top index
    let order = ca.coordinates().len();

    // (i) closedness and period-1 invariance, symbolically
    let dl = candidate.form.exterior_derivative().map_err(ProbeError::Symbolic)?;
    if !dl.is_zero() {
        return Err(ProbeError::CandidateNotClosed { witness: dl.to_string() });
    }
    let t_gen = &presentation.generators[presentation.generator_index("T").unwrap()];
    let shifted = candidate.form.pullback(&t_gen.map).map_err(ProbeError::Symbolic)?;
    if !shifted.equals(&candidate.form).map_err(ProbeError::Symbolic)? {
        return Err(ProbeError::CandidateNotPeriodic);
    }

    // (ii) gamma = a2 da0 + lambda
    let gamma = Form::dcoord_named(ca, "a0")
        .map_err(ProbeError::Symbolic)?
        .scale_expr(&Expr::named(ca, "a2").map_err(ProbeError::Symbolic)?)
        .add(&candidate.form);

    // (iii) phi^* gamma and the dy_0 coefficient A_0
    let pulled = gamma.pullback(&phi.map).map_err(ProbeError::Symbolic)?;
    let y0_pos = ct.coordinate_pos(ct.require("y0").map_err(ProbeError::Symbolic)?).unwrap();
    let a0_coeff = pulled.coefficient(&[y0_pos]);

    // decomposition: base term plus one correction per lambda component
    let y0_id = ct.require("y0").map_err(ProbeError::Symbolic)?;
    let mut term_exprs: Vec<(String, Expr)> = Vec::new();
    let mut sum = Expr::zero(ct);
    // base: (a2 . phi) d(a0 . phi)/dy0 = y2 + f''/f'
    let a2_id = ca.require("a2").map_err(ProbeError::Symbolic)?;
    let a0_id = ca.require("a0").map_err(ProbeError::Symbolic)?;
    let beta0 = phi.map.get(a0_id).unwrap().clone();
    let beta0_dy0 = beta0.derivative(y0_id).map_err(ProbeError::Symbolic)?;
    let base = phi.map.get(a2_id).unwrap().mul(&beta0_dy0);
    {
        let f1 = Expr::named(ct, "f'").map_err(ProbeError::Symbolic)?;
        let f2 = Expr::named(ct, "f''").map_err(ProbeError::Symbolic)?;
        let y2 = Expr::named(ct, "y2").map_err(ProbeError::Symbolic)?;
        let expect = y2.add(&f2.div(&f1));
        assert!(base.equals(&expect), "base term must be y2 + f''/f'");
    }
    sum = sum.add(&base);
    // divergent piece f''/f' (the y2 part vanishes on the probe grid)
    let divergent_expr = Expr::named(ct, "f''")
        .map_err(ProbeError::Symbolic)?
        .div(&Expr::named(ct, "f'").map_err(ProbeError::Symbolic)?);

    let coords = ca.coordinates().to_vec();
    for (pos, &cid) in coords.iter().enumerate() {
        let lam_n = candidate.form.coefficient(&[pos]);
        if lam_n.is_zero() {
            continue;
        }
        let lam_phi = lam_n.substitute(&phi.map).map_err(ProbeError::Symbolic)?;
        let beta_n = phi.map.get(cid).unwrap();
        let dbeta_dy0 = beta_n.derivative(y0_id).map_err(ProbeError::Symbolic)?;
        let term = lam_phi.mul(&dbeta_dy0);
        term_exprs.push((format!("(lambda_{} . phi) d(beta_{})/dy0", ca.name(cid), ca.name(cid)), term.clone()));
        sum = sum.add(&term);
    }
    assert!(
        sum.equals(&a0_coeff),
        "A_0 decomposition must reassemble the pullback coefficient"
    );

    // (iv) numeric evaluation along y0 -> 1^-
    let chain = ct.chain_symbols("f");
    let grid: Vec<Rational> = (1..=k_max).map(grid_point).collect();
    let mut env_per_k: Vec<Vec<Option<Mpf>>> = Vec::new();
    for tk in &grid {
        let tower = profile
            .eval_derivatives(tk, chain.len() - 1, prec)
            .map_err(ProbeError::Numeric)?;
        if tower[1].is_zero() {
            return Err(ProbeError::Numeric(NumericError::PrecisionInsufficient {
                context: "f' indistinguishable from zero on the probe grid".into(),
            }));
        }
        let phase = profile.eval_phase(tk, prec).map_err(ProbeError::Numeric)?;
        let two_pi = Mpf::two_pi(prec);
        let angle = two_pi.mul(&phase);
        let mut env: Vec<Option<Mpf>> = vec![None; ct.len()];
        env[y0_id] = Some(Mpf::from_rational(tk, prec));
        for p in 2..=order {
            if let Some(id) = ct.lookup(&format!("y{p}")) {
                env[id] = Some(Mpf::zero(prec));
            }
        }
        for (j, &cs) in chain.iter().enumerate() {
            env[cs] = Some(tower[j].clone());
        }
        env[ct.require("tau").map_err(ProbeError::Symbolic)?] = Some(two_pi.clone());
        env[ct.require("sphi").map_err(ProbeError::Symbolic)?] = Some(angle.sin());
        env[ct.require("cphi").map_err(ProbeError::Symbolic)?] = Some(angle.cos());
        env_per_k.push(env);
    }

    let eval_seq = |e: &Expr| -> Result<Vec<Mpf>, ProbeError> {
        env_per_k
            .iter()
            .map(|env| eval_expr(e, env, prec).map_err(ProbeError::Numeric))
            .collect()
    };

    let divergent_vals = eval_seq(&divergent_expr)?;
    let divergent_increasing = divergent_vals.windows(2).all(|w| w[0] < w[1]);
    let (div_max, _) = bounded_verdict(&divergent_vals);
    let divergent_term = TermSequence {
        label: "f''/f'".into(),
        values: divergent_vals.iter().map(|v| v.to_dec_string(30)).collect(),
        max_abs: div_max,
        bounded: false,
    };

    let mut corrections = Vec::new();
    let mut corrections_bounded = true;
    for (label, term) in &term_exprs {
        let vals = eval_seq(term)?;
        let (max_abs, bounded) = bounded_verdict(&vals);
        corrections_bounded &= bounded;
        corrections.push(TermSequence {
            label: label.clone(),
            values: vals.iter().map(|v| v.to_dec_string(30)).collect(),
            max_abs,
            bounded,
        });
    }

    let a0_vals = eval_seq(&a0_coeff)?;
    let a0_increasing = a0_vals.windows(2).all(|w| w[0].abs() < w[1].abs());
    let grows = {
        let first = a0_vals[0].abs();
        let last = a0_vals[a0_vals.len() - 1].abs();
        last > first.mul(&Mpf::from_i64(10, prec))
    };
    let contradiction = divergent_increasing && corrections_bounded && a0_increasing && grows;

    Ok(ProbeReport {
        candidate: candidate.name.clone(),
        candidate_form: candidate.form.to_string(),
        closed: true,
        periodic: true,
        a0: a0_coeff.to_string(),
        precision_bits: prec,
        grid: grid.iter().map(crate::rational::rational_to_string).collect(),
        divergent_term,
        divergent_strictly_increasing: divergent_increasing,
        corrections,
        corrections_bounded,
        a0_values: a0_vals.iter().map(|v| v.to_dec_string(30)).collect(),
        a0_strictly_increasing: a0_increasing,
        contradiction_evidence: contradiction,
    })
}
