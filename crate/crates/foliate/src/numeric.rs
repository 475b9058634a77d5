//! High-precision floating point and truncated-Taylor jet arithmetic.
//!
//! Derivative towers for the Reeb profile are computed by jet (truncated
//! Taylor) arithmetic on the defining expression, never by finite
//! differences: the dynamic range near the boundary makes differencing
//! hopeless.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};


use crate::error::NumericError;
use crate::rational::{factorial, Rational};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Arbitrary-precision float carrying its working precision in bits.
#[derive(Clone, Debug)]
pub struct Mpf {
    v: BigFloat,
    prec: usize,
}

impl Mpf {
    pub fn from_i64(v: i64, prec: usize) -> Mpf {
        Mpf { v: BigFloat::from_i64(v, prec), prec }
    }

    pub fn zero(prec: usize) -> Mpf {
        Mpf::from_i64(0, prec)
    }

    pub fn one(prec: usize) -> Mpf {
        Mpf::from_i64(1, prec)
    }

    pub fn from_rational(r: &Rational, prec: usize) -> Mpf {
        let num = Mpf::from_bigint_str(&r.numer().to_string(), prec + 64);
        let den = Mpf::from_bigint_str(&r.denom().to_string(), prec + 64);
        let mut out = num.div(&den);
        out.prec = prec;
        out
    }

    fn from_bigint_str(s: &str, prec: usize) -> Mpf {
        CONSTS.with(|cc| {
            let v = BigFloat::parse(s, Radix::Dec, prec, RM, &mut cc.borrow_mut());
            Mpf { v, prec }
        })
    }

    pub fn parse_dec(s: &str, prec: usize) -> Option<Mpf> {
        CONSTS.with(|cc| {
            let v = BigFloat::parse(s, Radix::Dec, prec, RM, &mut cc.borrow_mut());
            if v.is_nan() {
                None
            } else {
                Some(Mpf { v, prec })
            }
        })
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn raw(&self) -> &BigFloat {
        &self.v
    }

    pub fn is_nan(&self) -> bool {
        self.v.is_nan()
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.v.is_negative() && !self.v.is_zero()
    }

    /// Binary exponent; None for zero/NaN.
    pub fn exponent(&self) -> Option<i64> {
        self.v.exponent().map(|e| e as i64)
    }

    fn wp(&self, other: &Mpf) -> usize {
        self.prec.max(other.prec)
    }

    pub fn add(&self, other: &Mpf) -> Mpf {
        let p = self.wp(other);
        Mpf { v: self.v.add(&other.v, p, RM), prec: p }
    }

    pub fn sub(&self, other: &Mpf) -> Mpf {
        let p = self.wp(other);
        Mpf { v: self.v.sub(&other.v, p, RM), prec: p }
    }

    pub fn mul(&self, other: &Mpf) -> Mpf {
        let p = self.wp(other);
        Mpf { v: self.v.mul(&other.v, p, RM), prec: p }
    }

    pub fn div(&self, other: &Mpf) -> Mpf {
        let p = self.wp(other);
        Mpf { v: self.v.div(&other.v, p, RM), prec: p }
    }

    pub fn neg(&self) -> Mpf {
        Mpf { v: self.v.neg(), prec: self.prec }
    }

    pub fn abs(&self) -> Mpf {
        Mpf { v: self.v.abs(), prec: self.prec }
    }

    pub fn exp(&self) -> Mpf {
        CONSTS.with(|cc| Mpf {
            v: self.v.exp(self.prec, RM, &mut cc.borrow_mut()),
            prec: self.prec,
        })
    }

    pub fn sin(&self) -> Mpf {
        CONSTS.with(|cc| Mpf {
            v: self.v.sin(self.prec, RM, &mut cc.borrow_mut()),
            prec: self.prec,
        })
    }

    pub fn cos(&self) -> Mpf {
        CONSTS.with(|cc| Mpf {
            v: self.v.cos(self.prec, RM, &mut cc.borrow_mut()),
            prec: self.prec,
        })
    }

    pub fn floor(&self) -> Mpf {
        Mpf { v: self.v.floor(), prec: self.prec }
    }

    /// Fractional part in [0, 1).
    pub fn frac(&self) -> Mpf {
        self.sub(&self.floor())
    }

    pub fn two_pi(prec: usize) -> Mpf {
        CONSTS.with(|cc| {
            let pi = cc.borrow_mut().pi(prec, RM);
            Mpf { v: pi.mul(&BigFloat::from_i64(2, prec), prec, RM), prec }
        })
    }

    pub fn with_prec(&self, prec: usize) -> Mpf {
        let mut v = self.v.clone();
        v.set_precision(prec, RM).expect("precision change");
        Mpf { v, prec }
    }

    pub fn cmp_abs(&self, other: &Mpf) -> Ordering {
        self.abs().partial_cmp(&other.abs()).unwrap_or(Ordering::Equal)
    }

    /// Decimal string truncated to the given number of significant digits.
    pub fn to_dec_string(&self, sig: usize) -> String {
        let full = format!("{}", self.v);
        truncate_mantissa(&full, sig)
    }

    pub fn to_f64(&self) -> f64 {
        // lossy; used only for coarse report fields
        format!("{}", self.v).parse::<f64>().unwrap_or(f64::NAN)
    }
}

fn truncate_mantissa(s: &str, sig: usize) -> String {
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, Some(e)),
        None => (s, None),
    };
    let mut out = String::new();
    let mut digits = 0usize;
    for ch in mantissa.chars() {
        if ch.is_ascii_digit() {
            if digits >= sig {
                continue;
            }
            digits += 1;
        }
        out.push(ch);
    }
    let out = if out.contains('.') {
        out.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        out
    };
    match exp {
        Some(e) => format!("{out}e{e}"),
        None => out,
    }
}

impl PartialEq for Mpf {
    fn eq(&self, other: &Self) -> bool {
        self.v.cmp(&other.v) == Some(0)
    }
}

impl PartialOrd for Mpf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

impl fmt::Display for Mpf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl crate::jet::JetScalar for Mpf {
    fn zero_like(&self) -> Self {
        Mpf::zero(self.prec)
    }
    fn one_like(&self) -> Self {
        Mpf::one(self.prec)
    }
    fn from_rational_like(&self, r: &Rational) -> Self {
        Mpf::from_rational(r, self.prec)
    }
    fn add(&self, other: &Self) -> Self {
        Mpf::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Mpf::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Mpf::mul(self, other)
    }
    fn div(&self, other: &Self) -> Self {
        Mpf::div(self, other)
    }
    fn neg(&self) -> Self {
        Mpf::neg(self)
    }
    fn is_zero(&self) -> bool {
        Mpf::is_zero(self)
    }
}

/// Evaluates an expression with a numeric value per symbol; `None` entries
/// surface as domain errors when the symbol occurs.
pub fn eval_expr(
    e: &crate::symbolics::Expr,
    env: &[Option<Mpf>],
    prec: usize,
) -> Result<Mpf, NumericError> {
    let ctx = e.ctx();
    let eval_poly = |p: &crate::symbolics::Poly| -> Result<Mpf, NumericError> {
        let mut acc = Mpf::zero(prec);
        for (m, c) in p.terms() {
            let mut term = Mpf::from_rational(c, prec);
            for s in 0..ctx.len() {
                let e = m.exp(s);
                if e == 0 {
                    continue;
                }
                let v = env[s].as_ref().ok_or_else(|| NumericError::Domain {
                    context: format!("no numeric value for `{}`", ctx.name(s)),
                })?;
                for _ in 0..e {
                    term = term.mul(v);
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    };
    let num = eval_poly(e.num())?;
    let den = eval_poly(e.den())?;
    if den.is_zero() {
        return Err(NumericError::PrecisionInsufficient {
            context: "denominator evaluates to zero".into(),
        });
    }
    Ok(num.div(&den))
}

/// Truncated Taylor jet: `coeffs[k]` is the k-th Taylor coefficient at the
/// expansion point (derivative / k!).
#[derive(Clone, Debug)]
pub struct NumJet {
    coeffs: Vec<Mpf>,
}

impl NumJet {
    pub fn constant(v: Mpf, order: usize) -> NumJet {
        let prec = v.prec();
        let mut coeffs = vec![Mpf::zero(prec); order + 1];
        coeffs[0] = v;
        NumJet { coeffs }
    }

    /// The identity coordinate based at `t`: jet of the function u -> u.
    pub fn variable(t: Mpf, order: usize) -> NumJet {
        let prec = t.prec();
        let mut coeffs = vec![Mpf::zero(prec); order + 1];
        coeffs[0] = t;
        if order >= 1 {
            coeffs[1] = Mpf::one(prec);
        }
        NumJet { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<Mpf>) -> NumJet {
        assert!(!coeffs.is_empty());
        NumJet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn prec(&self) -> usize {
        self.coeffs[0].prec()
    }

    pub fn coeff(&self, k: usize) -> &Mpf {
        &self.coeffs[k]
    }

    /// Derivative tower (f, f', f'', ...): coefficients scaled by k!.
    pub fn derivatives(&self) -> Vec<Mpf> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.mul(&Mpf::from_rational(&factorial(k), c.prec())))
            .collect()
    }

    pub fn add(&self, other: &NumJet) -> NumJet {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect();
        NumJet { coeffs }
    }

    pub fn sub(&self, other: &NumJet) -> NumJet {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.sub(b))
            .collect();
        NumJet { coeffs }
    }

    pub fn neg(&self) -> NumJet {
        NumJet { coeffs: self.coeffs.iter().map(Mpf::neg).collect() }
    }

    pub fn mul(&self, other: &NumJet) -> NumJet {
        let n = self.order();
        let prec = self.prec();
        let mut coeffs = vec![Mpf::zero(prec); n + 1];
        for i in 0..=n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(n - i) {
                coeffs[i + j] = coeffs[i + j].add(&self.coeffs[i].mul(&other.coeffs[j]));
            }
        }
        NumJet { coeffs }
    }

    pub fn div(&self, other: &NumJet) -> Result<NumJet, NumericError> {
        if other.coeffs[0].is_zero() {
            return Err(NumericError::Domain { context: "division by a jet with zero value".into() });
        }
        let n = self.order();
        let inv0 = Mpf::one(self.prec()).div(&other.coeffs[0]);
        let mut coeffs = vec![Mpf::zero(self.prec()); n + 1];
        for k in 0..=n {
            let mut acc = self.coeffs[k].clone();
            for j in 1..=k {
                acc = acc.sub(&other.coeffs[j].mul(&coeffs[k - j]));
            }
            coeffs[k] = acc.mul(&inv0);
        }
        Ok(NumJet { coeffs })
    }

    pub fn powi(&self, e: i64) -> Result<NumJet, NumericError> {
        let mut base = if e < 0 {
            NumJet::constant(Mpf::one(self.prec()), self.order()).div(self)?
        } else {
            self.clone()
        };
        let mut k = e.unsigned_abs();
        let mut acc = NumJet::constant(Mpf::one(self.prec()), self.order());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// exp of a jet: w' = v' w gives k w_k = sum_{j=1..k} j v_j w_{k-j}.
    pub fn exp(&self) -> NumJet {
        let n = self.order();
        let prec = self.prec();
        let mut w = vec![Mpf::zero(prec); n + 1];
        w[0] = self.coeffs[0].exp();
        for k in 1..=n {
            let mut acc = Mpf::zero(prec);
            for j in 1..=k {
                let jv = Mpf::from_i64(j as i64, prec).mul(&self.coeffs[j]);
                acc = acc.add(&jv.mul(&w[k - j]));
            }
            w[k] = acc.div(&Mpf::from_i64(k as i64, prec));
        }
        NumJet { coeffs: w }
    }

    /// sin and cos of a jet via their coupled recurrences.
    pub fn sin_cos(&self) -> (NumJet, NumJet) {
        let n = self.order();
        let prec = self.prec();
        let mut s = vec![Mpf::zero(prec); n + 1];
        let mut c = vec![Mpf::zero(prec); n + 1];
        s[0] = self.coeffs[0].sin();
        c[0] = self.coeffs[0].cos();
        for k in 1..=n {
            let mut sa = Mpf::zero(prec);
            let mut ca = Mpf::zero(prec);
            for j in 1..=k {
                let jv = Mpf::from_i64(j as i64, prec).mul(&self.coeffs[j]);
                sa = sa.add(&jv.mul(&c[k - j]));
                ca = ca.sub(&jv.mul(&s[k - j]));
            }
            let kf = Mpf::from_i64(k as i64, prec);
            s[k] = sa.div(&kf);
            c[k] = ca.div(&kf);
        }
        (NumJet { coeffs: s }, NumJet { coeffs: c })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn close(a: &Mpf, b: &Mpf, tol_exp: i64) -> bool {
        let d = a.sub(b);
        if d.is_zero() {
            return true;
        }
        match (d.exponent(), b.exponent()) {
            (Some(de), Some(be)) => de - be <= -tol_exp,
            _ => false,
        }
    }

    #[test]
    fn exp_jet_matches_known_series() {
        // exp at 0: derivatives all 1
        let x = NumJet::variable(Mpf::zero(128), 5);
        let e = x.exp();
        let d = e.derivatives();
        for k in 0..=5 {
            assert!(close(&d[k], &Mpf::one(128), 100), "exp^{k}(0) = 1");
        }
    }

    #[test]
    fn sin_cos_jets() {
        let x = NumJet::variable(Mpf::zero(128), 4);
        let (s, c) = x.sin_cos();
        let ds = s.derivatives();
        let dc = c.derivatives();
        // sin: 0,1,0,-1,0 ; cos: 1,0,-1,0,1
        assert!(ds[0].is_zero() || close(&ds[0], &Mpf::zero(128), 100));
        assert!(close(&ds[1], &Mpf::one(128), 100));
        assert!(close(&ds[3], &Mpf::from_i64(-1, 128), 100));
        assert!(close(&dc[0], &Mpf::one(128), 100));
        assert!(close(&dc[2], &Mpf::from_i64(-1, 128), 100));
    }

    #[test]
    fn division_and_geometric_series() {
        // 1/(1-t) at 0: all Taylor coefficients 1
        let one = NumJet::constant(Mpf::one(128), 5);
        let t = NumJet::variable(Mpf::zero(128), 5);
        let g = one.div(&one.sub(&t)).unwrap();
        for k in 0..=5 {
            assert!(close(g.coeff(k), &Mpf::one(128), 100));
        }
        // division by zero-valued jet errors
        assert!(one.div(&t).is_err());
    }

    #[test]
    fn rational_conversion_and_frac() {
        let r = Mpf::from_rational(&ratio(9999, 10000), 256);
        assert!(r < Mpf::one(256));
        let x = Mpf::from_rational(&ratio(123456, 1000), 128);
        let fr = x.frac();
        assert!(close(&fr, &Mpf::from_rational(&ratio(456, 1000), 128), 90));
    }

    #[test]
    fn decimal_strings_are_truncated() {
        let x = Mpf::from_rational(&ratio(1, 3), 256);
        let s = x.to_dec_string(10);
        assert!(s.starts_with("3.333333333"), "{s}");
        assert!(s.ends_with("e-1"), "{s}");
    }
}
