//! Transversal profile functions for the Reeb foliation model.
//!
//! A profile is a smooth even function on (-1, 1), vanishing at 0, whose
//! derivatives blow up at the boundary while the derivatives of 1/f' decay.
//! The default is `exp(1/(1 - t^2)) - exp(1)`. Derivative towers are
//! evaluated by jet arithmetic on the defining expression at a chosen
//! working precision; limit claims are reported as monotone-trend evidence
//! on a fixed grid, never as proved limits.

use serde::Serialize;

use crate::error::{NumericError, ParseError};
use crate::numeric::{Mpf, NumJet};
use crate::parse::{parse_expr, Ast};
use crate::rational::{ratio, Rational};

#[derive(Clone, Debug)]
pub struct ReebProfile {
    ast: Ast,
    description: String,
}

pub const DEFAULT_PROFILE_EXPR: &str = "exp(1/(1 - t^2)) - exp(1)";

impl ReebProfile {
    pub fn default_profile() -> ReebProfile {
        ReebProfile::from_expr(DEFAULT_PROFILE_EXPR).expect("default profile parses")
    }

    pub fn from_expr(text: &str) -> Result<ReebProfile, ParseError> {
        let ast = parse_expr(text)?;
        Ok(ReebProfile { ast, description: text.trim().to_string() })
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Derivative tower (f, f', ..., f^(order)) at a rational point.
    pub fn eval_derivatives(
        &self,
        t: &Rational,
        order: usize,
        prec: usize,
    ) -> Result<Vec<Mpf>, NumericError> {
        let tj = NumJet::variable(Mpf::from_rational(t, prec), order.max(1));
        let out = eval_ast_jet(&self.ast, &tj)?;
        Ok(out.derivatives()[..=order].to_vec())
    }

    /// Fractional part of `-f(t)` in [0, 1), evaluated with enough extra
    /// precision to survive the magnitude of f near the boundary.
    pub fn eval_phase(&self, t: &Rational, prec: usize) -> Result<Mpf, NumericError> {
        let probe = self.eval_derivatives(t, 1, 64)?;
        let magnitude_bits = probe[0].exponent().unwrap_or(0).max(0) as usize;
        let boosted = prec + magnitude_bits + 64;
        let v = self.eval_derivatives(t, 1, boosted)?[0].neg();
        Ok(v.frac().with_prec(prec))
    }
}

fn eval_ast_jet(ast: &Ast, t: &NumJet) -> Result<NumJet, NumericError> {
    match ast {
        Ast::Num(r) => Ok(NumJet::constant(Mpf::from_rational(r, t.coeff(0).prec()), t.order())),
        Ast::Ident(name) => {
            if name == "t" {
                Ok(t.clone())
            } else {
                Err(NumericError::Domain { context: format!("unknown profile symbol `{name}`") })
            }
        }
        Ast::Call(name, arg) => {
            let a = eval_ast_jet(arg, t)?;
            match name.as_str() {
                "exp" => Ok(a.exp()),
                "sin" => Ok(a.sin_cos().0),
                "cos" => Ok(a.sin_cos().1),
                other => {
                    Err(NumericError::Domain { context: format!("unknown function `{other}`") })
                }
            }
        }
        Ast::Neg(a) => Ok(eval_ast_jet(a, t)?.neg()),
        Ast::Add(a, b) => Ok(eval_ast_jet(a, t)?.add(&eval_ast_jet(b, t)?)),
        Ast::Sub(a, b) => Ok(eval_ast_jet(a, t)?.sub(&eval_ast_jet(b, t)?)),
        Ast::Mul(a, b) => Ok(eval_ast_jet(a, t)?.mul(&eval_ast_jet(b, t)?)),
        Ast::Div(a, b) => eval_ast_jet(a, t)?.div(&eval_ast_jet(b, t)?),
        Ast::Pow(a, e) => eval_ast_jet(a, t)?.powi(*e),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckVerdict {
    pub name: String,
    pub pass: bool,
    pub witness: Option<String>,
}

fn verdict(name: &str, pass: bool, witness: Option<String>) -> CheckVerdict {
    CheckVerdict { name: name.to_string(), pass, witness }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileReport {
    pub description: String,
    pub precision_bits: usize,
    pub grid: Vec<String>,
    pub checks: Vec<CheckVerdict>,
    pub all_pass: bool,
}

/// Verdicts for the defining conditions: value 0 at 0, evenness and
/// nonnegativity on the grid, plus boundary-trend evidence (derivatives of f
/// grow, derivatives of 1/f' shrink along the positive tail).
pub fn check_profile_conditions(
    profile: &ReebProfile,
    grid: &[Rational],
    max_order: usize,
    prec: usize,
) -> Result<ProfileReport, NumericError> {
    let tiny_exp = -((prec / 2) as i64);
    let small = |v: &Mpf| v.is_zero() || v.exponent().map(|e| e < tiny_exp).unwrap_or(false);
    let mut checks = Vec::new();

    // f(0) = 0
    let f0 = profile.eval_derivatives(&Rational::from_integer(0.into()), 0, prec)?[0].clone();
    checks.push(verdict("f(0) = 0", small(&f0), Some(f0.to_dec_string(10))));

    // evenness on grid pairs
    let mut even_ok = true;
    let mut even_witness = None;
    for t in grid.iter().filter(|t| t.numer() > &0.into()) {
        let plus = profile.eval_derivatives(t, 0, prec)?[0].clone();
        let minus = profile.eval_derivatives(&(-t.clone()), 0, prec)?[0].clone();
        let diff = plus.sub(&minus);
        if !small(&diff) {
            even_ok = false;
            even_witness = Some(format!("t = {}", crate::rational::rational_to_string(t)));
            break;
        }
    }
    checks.push(verdict("f(t) = f(-t)", even_ok, even_witness));

    // nonnegativity
    let mut nonneg_ok = true;
    let mut nonneg_witness = None;
    for t in grid {
        let v = profile.eval_derivatives(t, 0, prec)?[0].clone();
        if v.is_negative() && !small(&v) {
            nonneg_ok = false;
            nonneg_witness = Some(format!(
                "f({}) = {}",
                crate::rational::rational_to_string(t),
                v.to_dec_string(10)
            ));
            break;
        }
    }
    checks.push(verdict("f(t) >= 0", nonneg_ok, nonneg_witness));

    // boundary trend evidence along the positive tail of the grid
    let mut tail: Vec<Rational> = grid
        .iter()
        .filter(|t| t.numer() > &0.into())
        .cloned()
        .collect();
    tail.sort();
    if tail.len() >= 2 {
        let towers: Result<Vec<Vec<Mpf>>, _> = tail
            .iter()
            .map(|t| profile.eval_derivatives(t, max_order + 1, prec))
            .collect();
        let towers = towers?;
        for p in 1..=max_order {
            let vals: Vec<Mpf> = towers.iter().map(|tw| tw[p].abs()).collect();
            let increasing = vals.windows(2).all(|w| w[0] < w[1]);
            let first = &vals[0];
            let last = &vals[vals.len() - 1];
            let grows = !first.is_zero()
                && last.div(first) > Mpf::from_i64(4, prec);
            checks.push(verdict(
                &format!("|f^({p})| grows toward the boundary"),
                increasing && grows,
                Some(format!(
                    "{} -> {}",
                    first.to_dec_string(8),
                    last.to_dec_string(8)
                )),
            ));
        }
        // derivatives of 1/f' via jet arithmetic on the tower
        for p in 0..=max_order {
            let mut vals = Vec::new();
            for (t, tw) in tail.iter().zip(&towers) {
                if tw[1].is_zero() {
                    return Err(NumericError::PrecisionInsufficient {
                        context: format!(
                            "f'({}) indistinguishable from 0",
                            crate::rational::rational_to_string(t)
                        ),
                    });
                }
                let tj = NumJet::variable(Mpf::from_rational(t, prec), max_order + 1);
                let fj = eval_ast_jet(&profile.ast, &tj)?;
                // shift: jet of f' is the derivative jet of f
                let fp_tower: Vec<Mpf> = fj.derivatives()[1..].to_vec();
                let recip = jet_reciprocal(&fp_tower, prec)?;
                vals.push(recip[p].abs());
            }
            let decreasing = vals.windows(2).all(|w| w[0] > w[1]);
            let first = &vals[0];
            let last = &vals[vals.len() - 1];
            let shrinks = !first.is_zero()
                && last.div(first) < Mpf::from_rational(&ratio(1, 4), prec);
            checks.push(verdict(
                &format!("|(1/f')^({p})| decays toward the boundary"),
                decreasing && shrinks,
                Some(format!(
                    "{} -> {}",
                    first.to_dec_string(8),
                    last.to_dec_string(8)
                )),
            ));
        }
    }

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(ProfileReport {
        description: profile.description().to_string(),
        precision_bits: prec,
        grid: grid.iter().map(crate::rational::rational_to_string).collect(),
        checks,
        all_pass,
    })
}

/// Derivative tower of 1/g from the tower of g (derivative convention).
fn jet_reciprocal(g_tower: &[Mpf], prec: usize) -> Result<Vec<Mpf>, NumericError> {
    let order = g_tower.len() - 1;
    let one = NumJet::constant(Mpf::one(prec), order);
    let coeffs: Vec<Mpf> = g_tower
        .iter()
        .enumerate()
        .map(|(k, d)| d.mul(&Mpf::from_rational(&crate::rational::factorial(k).recip(), prec)))
        .collect();
    let g = NumJet::from_coeffs(coeffs);
    Ok(one.div(&g)?.derivatives())
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitSequence {
    pub label: String,
    pub values: Vec<String>,
    pub derivative_values: Option<Vec<String>>,
    pub strictly_decreasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitReport {
    pub description: String,
    pub precision_bits: usize,
    pub grid: Vec<String>,
    /// |f^(n)/(f')^n| sequences for n = 2..=n_max
    pub ratio_sequences: Vec<LimitSequence>,
    /// f''/f' values over the grid
    pub log_derivative_values: Vec<String>,
    pub log_derivative_strictly_increasing: bool,
    pub monotonicity_violated: Vec<String>,
}

/// Numeric evidence for the boundary limits: for n = 2..n_max the ratios
/// |f^(n)/(f')^n| at t_k = 1 - 10^-k decrease toward 0 while f''/f' grows
/// without bound. Values additionally carry the ratio derivative
/// (f^(n)/(f')^n)' computed from one higher jet order.
pub fn check_limit_conditions(
    profile: &ReebProfile,
    n_max: usize,
    k_max: usize,
    prec: usize,
) -> Result<LimitReport, NumericError> {
    assert!(n_max >= 2, "limit evidence starts at the second derivative");
    assert!(k_max >= 2, "need at least two grid points for a trend");
    let grid: Vec<Rational> = (1..=k_max).map(grid_point).collect();
    let mut towers = Vec::new();
    for t in &grid {
        let tower = profile.eval_derivatives(t, n_max + 1, prec)?;
        if tower[1].is_zero() || tower[1].is_nan() {
            return Err(NumericError::PrecisionInsufficient {
                context: format!(
                    "f'({}) indistinguishable from 0 at {prec} bits",
                    crate::rational::rational_to_string(t)
                ),
            });
        }
        towers.push(tower);
    }
    let mut ratio_sequences = Vec::new();
    let mut violations = Vec::new();
    for n in 2..=n_max {
        let mut values = Vec::new();
        let mut derivs = Vec::new();
        let mut numeric: Vec<Mpf> = Vec::new();
        for tower in &towers {
            let fp_n = pow_mpf(&tower[1], n as i64);
            let r = tower[n].div(&fp_n).abs();
            numeric.push(r.clone());
            values.push(r.to_dec_string(40));
            // (f^(n)/(f')^n)' = f^(n+1)/(f')^n - n f^(n) f''/(f')^{n+1}
            let term1 = tower[n + 1].div(&fp_n);
            let term2 = Mpf::from_i64(n as i64, prec)
                .mul(&tower[n])
                .mul(&tower[2])
                .div(&pow_mpf(&tower[1], n as i64 + 1));
            derivs.push(term1.sub(&term2).to_dec_string(40));
        }
        let strictly_decreasing = numeric.windows(2).all(|w| w[0] > w[1]);
        if !strictly_decreasing {
            violations.push(format!("|f^({n})/(f')^{n}| not strictly decreasing"));
        }
        ratio_sequences.push(LimitSequence {
            label: format!("|f^({n})/(f')^{n}|"),
            values,
            derivative_values: Some(derivs),
            strictly_decreasing,
        });
    }
    let log_deriv: Vec<Mpf> = towers.iter().map(|tw| tw[2].div(&tw[1])).collect();
    let increasing = log_deriv.windows(2).all(|w| w[0] < w[1]);
    if !increasing {
        violations.push("f''/f' not strictly increasing".to_string());
    }
    Ok(LimitReport {
        description: profile.description().to_string(),
        precision_bits: prec,
        grid: grid.iter().map(crate::rational::rational_to_string).collect(),
        ratio_sequences,
        log_derivative_values: log_deriv.iter().map(|v| v.to_dec_string(40)).collect(),
        log_derivative_strictly_increasing: increasing,
        monotonicity_violated: violations,
    })
}

/// t_k = 1 - 10^-k as an exact rational.
pub fn grid_point(k: usize) -> Rational {
    let ten_k = num_bigint::BigInt::from(10u32).pow(k as u32);
    Rational::new(&ten_k - 1, ten_k)
}

fn pow_mpf(base: &Mpf, e: i64) -> Mpf {
    let mut acc = Mpf::one(base.prec());
    let mut b = base.clone();
    let mut k = e.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc.mul(&b);
        }
        k >>= 1;
        if k > 0 {
            b = b.mul(&b);
        }
    }
    if e < 0 {
        Mpf::one(base.prec()).div(&acc)
    } else {
        acc
    }
}

/// Golden values for the default profile from an independent
/// high-precision run (symbolic differentiation evaluated at 3000 bits):
/// `GOLDEN_RATIOS[n-2][k-1]` is |f^(n)/(f')^n| at t_k = 1 - 10^-k.
pub const GOLDEN_RATIOS: [[&str; 4]; 4] = [
    [
        "7.262322526349948247317818447015740326313e-3",
        "1.560238080029780914140130363353448050315e-22",
        "5.57012354116032217974815949153284874589e-218",
        "2.625337351032998946079689335065372140525e-2172",
    ],
    [
        "6.568138576981481272758203843331902122148e-5",
        "2.526175133902810426440204291052639794121e-44",
        "3.11496407510201713659446556363887442177e-435",
        "6.895151511932117567904415192756047114154e-4344",
    ],
    [
        "7.030492686861538952244718436193870954574e-7",
        "4.236207375036518456020081663005043637789e-66",
        "1.748857618902841987462589977819641887762e-652",
        "1.811657035477257969810146751650013714108e-6515",
    ],
    [
        "8.639246668647334200080179491907311011904e-9",
        "7.344867227463881191990467532101762007371e-88",
        "9.857323353818745196215866450212116353848e-870",
        "4.761913774185499975734849775782248452556e-8687",
    ],
];

/// f''/f' at t_k for the default profile, same oracle run.
pub const GOLDEN_LOG_DERIVATIVE: [&str; 4] = [
    "6.991997537703908895044629116651277316097e1",
    "5.199878816446579886897050605037777078887e3",
    "5.019998753756570633993837841884926958229e5",
    "5.001999987503750656331258985320409580157e7",
];

/// frac(-f(t_k)) for the default profile (8000-bit oracle run; the phase at
/// k = 4 needs thousands of bits before the fractional part is resolved).
pub const GOLDEN_PHASES: [&str; 4] = [
    "6.279934903461556124698118918041063836529e-1",
    "4.480199170196718118985514235222520427667e-1",
    "6.877318126838163540334592500723648890266e-1",
    "9.972081386414422597673884164005308301728e-1",
];
