//! The cochain complex of formal vector fields in n variables.
//!
//! The complex is the free graded-commutative algebra on odd generators
//! `c^i_{j_1...j_r}` (sorted lower multi-index, weight r-1), with the
//! differential
//!
//!   d c^i_{j_1..j_r} = sum_{0<=k<=r} sum_{s_1<...<s_k} sum_l
//!       c^i_{l j_1.. (hat j_{s_1}) .. (hat j_{s_k}) ..j_r} ^ c^l_{j_{s_1}..j_{s_k}}
//!
//! extended to products as an antiderivation of degree 1. The sum over
//! subsets runs over positions of the sorted index, which handles repeated
//! indices with the right multiplicities.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::WnError;
use crate::linalg;
use crate::rational::Rational;
use crate::symbolics::Poly;

/// Generator `c^i_{j_1 <= ... <= j_r}`; `c^i` is the r = 0 case.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct WGenerator {
    /// number of lower indices, kept first so the derived order is
    /// weight-major
    r: usize,
    upper: u8,
    lower: Vec<u8>,
}

impl WGenerator {
    pub fn new(upper: u8, mut lower: Vec<u8>) -> WGenerator {
        lower.sort_unstable();
        WGenerator { r: lower.len(), upper, lower }
    }

    pub fn upper(&self) -> u8 {
        self.upper
    }

    pub fn lower(&self) -> &[u8] {
        &self.lower
    }

    pub fn weight(&self) -> i64 {
        self.lower.len() as i64 - 1
    }
}

impl fmt::Display for WGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lower.is_empty() {
            write!(f, "c^{}", self.upper)
        } else {
            let idx: String = self.lower.iter().map(|j| j.to_string()).collect();
            write!(f, "c^{}_{}", self.upper, idx)
        }
    }
}

/// All generators with weight at most `max_weight` in canonical order.
pub fn enumerate_generators(n: u8, max_weight: i64) -> Vec<WGenerator> {
    let mut out = Vec::new();
    let mut r: usize = 0;
    while (r as i64) - 1 <= max_weight {
        let mut idx = vec![1u8; r];
        loop {
            for i in 1..=n {
                out.push(WGenerator::new(i, idx.clone()));
            }
            // next multiset over {1..n}
            let mut pos = r;
            loop {
                if pos == 0 {
                    break;
                }
                if idx[pos - 1] < n {
                    idx[pos - 1] += 1;
                    for k in pos..r {
                        idx[k] = idx[pos - 1];
                    }
                    break;
                }
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
        }
        if r == 0 && out.is_empty() {
            // n = 0 never happens; guard against infinite loop
            break;
        }
        r += 1;
    }
    out.sort();
    out
}

type WMonomial = Vec<WGenerator>;

fn sort_monomial(mut m: WMonomial) -> Option<(WMonomial, bool)> {
    let mut swaps = 0usize;
    for i in 1..m.len() {
        let mut j = i;
        while j > 0 && m[j - 1] > m[j] {
            m.swap(j - 1, j);
            swaps += 1;
            j -= 1;
        }
    }
    for w in m.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((m, swaps % 2 == 1))
}

/// Sparse cochain: rational combination of strictly increasing wedge
/// monomials of generators, homogeneous of a fixed degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WCochain {
    n: u8,
    degree: usize,
    terms: BTreeMap<WMonomial, Rational>,
}

impl WCochain {
    pub fn zero(n: u8, degree: usize) -> WCochain {
        WCochain { n, degree, terms: BTreeMap::new() }
    }

    pub fn scalar(n: u8, c: Rational) -> WCochain {
        let mut out = WCochain::zero(n, 0);
        out.add_term(vec![], c);
        out
    }

    pub fn generator(n: u8, g: WGenerator) -> WCochain {
        let mut out = WCochain::zero(n, 1);
        out.add_term(vec![g], Rational::one());
        out
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&WMonomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, m: WMonomial, c: Rational) {
        assert_eq!(m.len(), self.degree, "monomial length must match degree");
        if c.is_zero() {
            return;
        }
        let (m, odd) = match sort_monomial(m) {
            Some(x) => x,
            None => return,
        };
        let c = if odd { -c } else { c };
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &WCochain) -> WCochain {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &WCochain) -> WCochain {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, k: &Rational) -> WCochain {
        if k.is_zero() {
            return WCochain::zero(self.n, self.degree);
        }
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect();
        WCochain { n: self.n, degree: self.degree, terms }
    }

    pub fn wedge(&self, other: &WCochain) -> WCochain {
        assert_eq!(self.n, other.n);
        let mut out = WCochain::zero(self.n, self.degree + other.degree);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut m = ma.clone();
                m.extend(mb.iter().cloned());
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    /// Per-term weights; each term of a weight-homogeneous cochain has the
    /// same value.
    pub fn term_weights(&self) -> Vec<i64> {
        self.terms
            .keys()
            .map(|m| m.iter().map(|g| g.weight()).sum())
            .collect()
    }
}

impl fmt::Display for WCochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono = if m.is_empty() {
                "1".to_string()
            } else {
                m.iter().map(|g| g.to_string()).collect::<Vec<_>>().join("^")
            };
            write!(f, "{}*{}", crate::rational::rational_to_string(c), mono)?;
        }
        Ok(())
    }
}

/// Differential of a single generator by the defining formula.
fn differential_generator(n: u8, g: &WGenerator) -> WCochain {
    let r = g.lower().len();
    let mut out = WCochain::zero(n, 2);
    for mask in 0u32..(1u32 << r) {
        // selected positions (ascending) form the second factor's index
        let mut selected = Vec::new();
        let mut remaining = Vec::new();
        for (pos, &j) in g.lower().iter().enumerate() {
            if mask & (1 << pos) != 0 {
                selected.push(j);
            } else {
                remaining.push(j);
            }
        }
        for l in 1..=n {
            let mut first_idx = remaining.clone();
            first_idx.push(l);
            let first = WGenerator::new(g.upper(), first_idx);
            let second = WGenerator::new(l, selected.clone());
            out.add_term(vec![first, second], Rational::one());
        }
    }
    out
}

/// Differential extended to products as an antiderivation of degree 1.
pub fn differential(c: &WCochain) -> WCochain {
    let mut out = WCochain::zero(c.n, c.degree + 1);
    for (m, coeff) in c.terms() {
        for (i, g) in m.iter().enumerate() {
            let dg = differential_generator(c.n, g);
            let sign = if i % 2 == 1 { -Rational::one() } else { Rational::one() };
            for (pair, k) in dg.terms() {
                let mut mono = Vec::with_capacity(m.len() + 1);
                mono.extend(m[..i].iter().cloned());
                mono.extend(pair.iter().cloned());
                mono.extend(m[i + 1..].iter().cloned());
                out.add_term(mono, coeff * k * &sign);
            }
        }
    }
    out
}

/// The matrix entry `Psi^i_j = sum_k c^i_{jk} ^ c^k`.
fn psi_entry(n: u8, i: u8, j: u8) -> WCochain {
    let mut out = WCochain::zero(n, 2);
    for k in 1..=n {
        out.add_term(
            vec![WGenerator::new(i, vec![j, k]), WGenerator::new(k, vec![])],
            Rational::one(),
        );
    }
    out
}

/// Formal Chern cocycle `Psi_p = tr(Psi ^ ... ^ Psi)` (p factors).
pub fn chern_cocycle(p: usize, n: u8) -> Result<WCochain, WnError> {
    if p < 1 || p > n as usize {
        return Err(WnError::IndexOutOfRange { p, n: n as usize });
    }
    // matrix power under the wedge product
    let mut mat: Vec<Vec<WCochain>> = (1..=n)
        .map(|i| (1..=n).map(|j| psi_entry(n, i, j)).collect())
        .collect();
    let base = mat.clone();
    for _ in 1..p {
        let mut next: Vec<Vec<WCochain>> =
            vec![vec![WCochain::zero(n, 0); n as usize]; n as usize];
        for i in 0..n as usize {
            for j in 0..n as usize {
                let mut acc = WCochain::zero(n, mat[0][0].degree + 2);
                for k in 0..n as usize {
                    acc = acc.add(&mat[i][k].wedge(&base[k][j]));
                }
                next[i][j] = acc;
            }
        }
        mat = next;
    }
    let mut tr = WCochain::zero(n, 2 * p);
    for i in 0..n as usize {
        tr = tr.add(&mat[i][i]);
    }
    Ok(tr)
}

/// Interior product with the direction dual to the weight-zero generator
/// `c^i_j`; a derivation of degree -1.
pub fn contract_linear(c: &WCochain, i: u8, j: u8) -> WCochain {
    let target = WGenerator::new(i, vec![j]);
    let mut out = WCochain::zero(c.n, c.degree.saturating_sub(1));
    if c.degree == 0 {
        return out;
    }
    for (m, coeff) in c.terms() {
        for (pos, g) in m.iter().enumerate() {
            if *g == target {
                let mut mono = m.clone();
                mono.remove(pos);
                let sign = if pos % 2 == 1 { -Rational::one() } else { Rational::one() };
                out.add_term(mono, coeff * &sign);
            }
        }
    }
    out
}

/// Coadjoint action of the linear field `x^j d/dx^i` on a generator:
/// `L c^a_B = delta_{ia} c^j_B - sum_{s: B_s = j} c^a_{(B minus s) + i}`.
fn linear_action_generator(n: u8, i: u8, j: u8, g: &WGenerator) -> WCochain {
    let mut out = WCochain::zero(n, 1);
    if g.upper() == i {
        out.add_term(vec![WGenerator::new(j, g.lower().to_vec())], Rational::one());
    }
    for (pos, &b) in g.lower().iter().enumerate() {
        if b == j {
            let mut idx = g.lower().to_vec();
            idx[pos] = i;
            out.add_term(vec![WGenerator::new(g.upper(), idx)], -Rational::one());
        }
    }
    out
}

/// Lie derivative along `x^j d/dx^i` extended as a degree-0 derivation.
pub fn linear_action(c: &WCochain, i: u8, j: u8) -> WCochain {
    let mut out = WCochain::zero(c.n, c.degree);
    for (m, coeff) in c.terms() {
        for (pos, g) in m.iter().enumerate() {
            let lg = linear_action_generator(c.n, i, j, g);
            for (single, k) in lg.terms() {
                let mut mono = m.clone();
                mono[pos] = single[0].clone();
                out.add_term(mono, coeff * k);
            }
        }
    }
    out
}

/// A cochain is relative when it is horizontal (interior product with every
/// linear direction vanishes) and GL(n)-invariant (Lie derivative along
/// every linear field vanishes).
pub fn is_relative(c: &WCochain, n: u8) -> bool {
    for i in 1..=n {
        for j in 1..=n {
            if !contract_linear(c, i, j).is_zero() {
                return false;
            }
            if !linear_action(c, i, j).is_zero() {
                return false;
            }
        }
    }
    true
}

/// Monomial basis of the degree-q, weight-w piece of the complex.
pub fn monomial_basis(n: u8, weight: i64, degree: usize) -> Vec<WMonomial> {
    // a single factor's weight never exceeds w + n: the only negative-weight
    // generators are the n distinct c^i, each usable once
    let max_gen_weight = weight + n as i64;
    let gens = enumerate_generators(n, max_gen_weight);
    let mut out = Vec::new();
    let mut current: WMonomial = Vec::new();
    fn rec(
        gens: &[WGenerator],
        start: usize,
        slots: usize,
        weight_left: i64,
        n: i64,
        current: &mut WMonomial,
        out: &mut Vec<WMonomial>,
    ) {
        if slots == 0 {
            if weight_left == 0 {
                out.push(current.clone());
            }
            return;
        }
        for idx in start..gens.len() {
            let g = &gens[idx];
            // remaining slots each have weight >= -1, and at most n distinct
            // weight -1 generators exist in total
            let min_rest = -(n.min(slots as i64 - 1));
            if weight_left - g.weight() < min_rest {
                // generators are weight-sorted; all later ones are heavier
                if g.weight() > weight_left + n.min(slots as i64 - 1) {
                    break;
                }
                continue;
            }
            current.push(g.clone());
            rec(gens, idx + 1, slots - 1, weight_left - g.weight(), n, current, out);
            current.pop();
        }
    }
    rec(&gens, 0, degree, weight, n as i64, &mut current, &mut out);
    out.sort();
    out
}

/// Basis of the relative (horizontal + invariant) subspace in the given
/// degree/weight piece, as cochains.
pub fn relative_basis(n: u8, weight: i64, degree: usize) -> Vec<WCochain> {
    let horiz: Vec<WMonomial> = monomial_basis(n, weight, degree)
        .into_iter()
        .filter(|m| m.iter().all(|g| g.lower().len() != 1))
        .collect();
    if horiz.is_empty() {
        return Vec::new();
    }
    // rows: constraints from each linear action on each image monomial
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut row_index: BTreeMap<(u8, u8, WMonomial), usize> = BTreeMap::new();
    for (col, m) in horiz.iter().enumerate() {
        let mut c = WCochain::zero(n, degree);
        c.add_term(m.clone(), Rational::one());
        for i in 1..=n {
            for j in 1..=n {
                let img = linear_action(&c, i, j);
                for (mono, coeff) in img.terms() {
                    let key = (i, j, mono.clone());
                    let r = *row_index.entry(key).or_insert_with(|| {
                        rows.push(vec![Rational::zero(); horiz.len()]);
                        rows.len() - 1
                    });
                    rows[r][col] = coeff.clone();
                }
            }
        }
    }
    let kernel = linalg::rational_kernel(&rows, horiz.len());
    kernel
        .into_iter()
        .map(|v| {
            let mut c = WCochain::zero(n, degree);
            for (col, coeff) in v.into_iter().enumerate() {
                if !coeff.is_zero() {
                    c.add_term(horiz[col].clone(), coeff);
                }
            }
            c
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct RankRow {
    pub degree: usize,
    pub dim: usize,
    pub rank_d: usize,
    pub betti: i64,
}

/// Two primes above 2^30 for the modular rank oracle.
pub const RANK_PRIMES: [u64; 2] = [2_147_483_647, 2_147_483_629];

/// Exact dimensions, differential ranks and Betti numbers of one weight
/// piece, optionally of the relative subcomplex. The exact fraction-free
/// rank is cross-checked against modular ranks at two primes.
pub fn cohomology_ranks(
    n: u8,
    weight: i64,
    max_degree: usize,
    relative: bool,
    budget: usize,
) -> Result<Vec<RankRow>, WnError> {
    // cochain bases per degree (one extra degree for the last rank)
    let mut bases: Vec<Vec<WCochain>> = Vec::new();
    let mut total = 0usize;
    for q in 0..=(max_degree + 1) {
        let basis: Vec<WCochain> = if relative {
            relative_basis(n, weight, q)
        } else {
            monomial_basis(n, weight, q)
                .into_iter()
                .map(|m| {
                    let mut c = WCochain::zero(n, q);
                    c.add_term(m, Rational::one());
                    c
                })
                .collect()
        };
        total += basis.len();
        if total > budget {
            return Err(WnError::ResourceBudgetExceeded { size: total, budget });
        }
        bases.push(basis);
    }
    // rank of d: C^q -> C^{q+1} for each q
    let mut ranks: Vec<usize> = Vec::new();
    for q in 0..=max_degree {
        let target_monomials: BTreeMap<WMonomial, usize> = {
            let mut map = BTreeMap::new();
            for c in &bases[q + 1] {
                for (m, _) in c.terms() {
                    let next = map.len();
                    map.entry(m.clone()).or_insert(next);
                }
            }
            map
        };
        let mut mat: Vec<Vec<Rational>> = Vec::new();
        let mut extra_monomials: BTreeMap<WMonomial, usize> = BTreeMap::new();
        for c in &bases[q] {
            let img = differential(c);
            let mut row = vec![Rational::zero(); target_monomials.len()];
            for (m, coeff) in img.terms() {
                if let Some(&idx) = target_monomials.get(m) {
                    row[idx] = coeff.clone();
                } else {
                    // the image always stays in the same weight piece; in the
                    // relative case it must land in the relative span, which
                    // shares the monomial support recorded here
                    let next = extra_monomials.len();
                    let idx = *extra_monomials.entry(m.clone()).or_insert(next);
                    let full_idx = target_monomials.len() + idx;
                    if row.len() <= full_idx {
                        row.resize(full_idx + 1, Rational::zero());
                    }
                    row[full_idx] = coeff.clone();
                }
            }
            mat.push(row);
        }
        let width = target_monomials.len() + extra_monomials.len();
        for row in &mut mat {
            row.resize(width, Rational::zero());
        }
        let int_rows = linalg::to_integer_rows(&mat);
        let exact = linalg::rank_bareiss(int_rows.clone());
        for p in RANK_PRIMES {
            let modular = linalg::rank_mod(&int_rows, p);
            if exact != modular {
                return Err(WnError::RankOracleMismatch { degree: q, exact, modular, prime: p });
            }
        }
        ranks.push(exact);
    }
    let mut rows = Vec::new();
    for q in 0..=max_degree {
        let dim = bases[q].len();
        let rank_d = ranks[q];
        let prev = if q == 0 { 0 } else { ranks[q - 1] };
        rows.push(RankRow {
            degree: q,
            dim,
            rank_d,
            betti: dim as i64 - rank_d as i64 - prev as i64,
        });
    }
    Ok(rows)
}

/// Whether `c` lies in the image of d on the relative subcomplex one degree
/// below (exact linear algebra over Q).
pub fn is_relative_coboundary(c: &WCochain, n: u8, weight: i64) -> bool {
    if c.is_zero() {
        return true;
    }
    let below = relative_basis(n, weight, c.degree - 1);
    if below.is_empty() {
        return false;
    }
    let mut monomials: BTreeMap<WMonomial, usize> = BTreeMap::new();
    let images: Vec<WCochain> = below.iter().map(differential).collect();
    for img in images.iter().chain(std::iter::once(c)) {
        for (m, _) in img.terms() {
            let next = monomials.len();
            monomials.entry(m.clone()).or_insert(next);
        }
    }
    // columns: basis elements below; rows: monomials
    let mut a = vec![vec![Rational::zero(); below.len()]; monomials.len()];
    for (col, img) in images.iter().enumerate() {
        for (m, coeff) in img.terms() {
            a[monomials[m]][col] = coeff.clone();
        }
    }
    let mut b = vec![Rational::zero(); monomials.len()];
    for (m, coeff) in c.terms() {
        b[monomials[m]] = coeff.clone();
    }
    linalg::rational_solve(&a, &b).is_some()
}

/// Formal vector fields with polynomial components, used as an independent
/// oracle for the algebraically implemented differential and GL-action.
pub mod fields {
    use super::*;

    /// Field `sum_i comp[i] d/dx^i` with `comp[i]` a polynomial in x^1..x^n.
    #[derive(Clone, Debug)]
    pub struct FormalField {
        pub comp: Vec<Poly>,
    }

    impl FormalField {
        pub fn n(&self) -> usize {
            self.comp.len()
        }
    }

    pub fn bracket(a: &FormalField, b: &FormalField) -> FormalField {
        let n = a.n();
        let comp = (0..n)
            .map(|i| {
                let mut acc = Poly::zero(n);
                for j in 0..n {
                    acc.add_assign(&a.comp[j].mul(&b.comp[i].partial(j)));
                    acc.add_assign(&b.comp[j].mul(&a.comp[i].partial(j)).neg());
                }
                acc
            })
            .collect();
        FormalField { comp }
    }

    /// Pairing of a generator with a field: the B-th partial derivative of
    /// the upper component at 0.
    pub fn pair_generator(g: &WGenerator, xi: &FormalField) -> Rational {
        let n = xi.n();
        let mut target = vec![0u32; n];
        for &j in g.lower() {
            target[j as usize - 1] += 1;
        }
        for (m, c) in xi.comp[g.upper() as usize - 1].terms() {
            if m.exps() == &target[..] {
                let mut fact = Rational::one();
                for &e in &target {
                    fact *= crate::rational::factorial(e as usize);
                }
                return c * fact;
            }
        }
        Rational::zero()
    }

    /// Evaluates a q-cochain on q fields by the alternating-sum expansion.
    pub fn evaluate(c: &WCochain, fields: &[FormalField]) -> Rational {
        assert_eq!(c.degree(), fields.len());
        fn perms(k: usize) -> Vec<(Vec<usize>, bool)> {
            // Heap's algorithm with parity tracking
            let mut out = Vec::new();
            let mut a: Vec<usize> = (0..k).collect();
            fn rec(k: usize, a: &mut Vec<usize>, parity: &mut bool, out: &mut Vec<(Vec<usize>, bool)>) {
                if k == 1 {
                    out.push((a.clone(), *parity));
                    return;
                }
                for i in 0..k {
                    rec(k - 1, a, parity, out);
                    if k % 2 == 0 {
                        a.swap(i, k - 1);
                    } else {
                        a.swap(0, k - 1);
                    }
                    *parity = !*parity;
                }
            }
            if k == 0 {
                out.push((vec![], false));
            } else {
                let mut parity = false;
                rec(k, &mut a, &mut parity, &mut out);
            }
            out
        }
        let mut total = Rational::zero();
        for (m, coeff) in c.terms() {
            for (perm, odd) in perms(m.len()) {
                let mut prod = coeff.clone();
                for (slot, g) in m.iter().enumerate() {
                    prod *= pair_generator(g, &fields[perm[slot]]);
                    if prod.is_zero() {
                        break;
                    }
                }
                if odd {
                    prod = -prod;
                }
                total += prod;
            }
        }
        total
    }

    /// The Chevalley-Eilenberg formula evaluated directly:
    /// `(dc)(xi_1..xi_{q+1}) = sum_{i<j} (-1)^{i+j}
    ///  c([xi_i,xi_j], xi_1, .., hat i, .., hat j, .., xi_{q+1})`.
    pub fn evaluate_ce_differential(c: &WCochain, fields: &[FormalField]) -> Rational {
        assert_eq!(c.degree() + 1, fields.len());
        let mut total = Rational::zero();
        for i in 0..fields.len() {
            for j in (i + 1)..fields.len() {
                let mut args = vec![bracket(&fields[i], &fields[j])];
                for (k, f) in fields.iter().enumerate() {
                    if k != i && k != j {
                        args.push(f.clone());
                    }
                }
                let v = evaluate(c, &args);
                // displayed convention indexes fields from 1
                if (i + j) % 2 == 1 {
                    total -= v;
                } else {
                    total += v;
                }
            }
        }
        total
    }

    /// Lie-derivative action evaluated directly:
    /// `(L_E c)(xi_1..xi_q) = -sum_i c(xi_1,..,[E,xi_i],..,xi_q)`.
    pub fn evaluate_linear_action(
        c: &WCochain,
        e: &FormalField,
        fields: &[FormalField],
    ) -> Rational {
        let mut total = Rational::zero();
        for i in 0..fields.len() {
            let mut args = fields.to_vec();
            args[i] = bracket(e, &fields[i]);
            total -= evaluate(c, &args);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn gen(n: u8, i: u8, lower: &[u8]) -> WCochain {
        WCochain::generator(n, WGenerator::new(i, lower.to_vec()))
    }

    #[test]
    fn generator_enumeration() {
        let g = enumerate_generators(1, 0);
        assert_eq!(g.len(), 2);
        assert_eq!(g[0], WGenerator::new(1, vec![]));
        assert_eq!(g[1], WGenerator::new(1, vec![1]));
        let g = enumerate_generators(1, 1);
        assert_eq!(g.len(), 3);
        assert_eq!(g[2], WGenerator::new(1, vec![1, 1]));
        let g = enumerate_generators(2, -1);
        assert_eq!(g, vec![WGenerator::new(1, vec![]), WGenerator::new(2, vec![])]);
    }

    #[test]
    fn differential_of_basic_generators() {
        // d c^1 = c^1_1 ^ c^1 for n = 1
        let d = differential(&gen(1, 1, &[]));
        let mut expect = WCochain::zero(1, 2);
        expect.add_term(
            vec![WGenerator::new(1, vec![1]), WGenerator::new(1, vec![])],
            rat(1),
        );
        assert_eq!(d, expect);
        // d of a scalar is zero
        assert!(differential(&WCochain::scalar(1, rat(3))).is_zero());
    }

    #[test]
    fn differential_preserves_weight() {
        for n in [1u8, 2] {
            for g in enumerate_generators(n, 3) {
                let w = g.weight();
                let d = differential(&WCochain::generator(n, g));
                for tw in d.term_weights() {
                    assert_eq!(tw, w, "weight not preserved for n={n}");
                }
            }
        }
    }

    #[test]
    fn d_squared_zero_low_weights() {
        for n in [1u8, 2] {
            for g in enumerate_generators(n, 3) {
                let dd = differential(&differential(&WCochain::generator(n, g.clone())));
                assert!(dd.is_zero(), "d^2 != 0 on {g} for n={n}");
            }
        }
    }

    #[test]
    fn antiderivation_on_random_products() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for n in [1u8, 2] {
            let gens = enumerate_generators(n, 2);
            for _ in 0..10 {
                let da = rng.gen_range(1..=2usize);
                let db = rng.gen_range(1..=2usize);
                let mut pick = |deg: usize| {
                    let mut c = WCochain::zero(n, deg);
                    for _ in 0..2 {
                        let mono: Vec<WGenerator> = (0..deg)
                            .map(|_| gens[rng.gen_range(0..gens.len())].clone())
                            .collect();
                        c.add_term(mono, rat(rng.gen_range(-3..=3)));
                    }
                    c
                };
                let a = pick(da);
                let b = pick(db);
                let lhs = differential(&a.wedge(&b));
                let mut rhs = differential(&a).wedge(&b);
                let second = a.wedge(&differential(&b));
                rhs = if da % 2 == 1 { rhs.sub(&second) } else { rhs.add(&second) };
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn chern_cocycles_are_cocycles() {
        // n=1: Psi_1 = c^1_11 ^ c^1
        let psi1 = chern_cocycle(1, 1).unwrap();
        let mut expect = WCochain::zero(1, 2);
        expect.add_term(
            vec![WGenerator::new(1, vec![1, 1]), WGenerator::new(1, vec![])],
            rat(1),
        );
        assert_eq!(psi1, expect);
        assert!(differential(&psi1).is_zero());
        for (n, p) in [(1u8, 1usize), (2, 1), (2, 2)] {
            let psi = chern_cocycle(p, n).unwrap();
            assert_eq!(psi.degree(), 2 * p);
            for w in psi.term_weights() {
                assert_eq!(w, 0, "Psi_p terms must have weight 0");
            }
            assert!(differential(&psi).is_zero(), "d Psi_{p} != 0 for n={n}");
            assert!(is_relative(&psi, n), "Psi_{p} not relative for n={n}");
        }
        assert!(matches!(chern_cocycle(0, 1), Err(WnError::IndexOutOfRange { .. })));
        assert!(matches!(chern_cocycle(2, 1), Err(WnError::IndexOutOfRange { .. })));
    }

    #[test]
    fn relativity_checks() {
        // c^1 alone is horizontal but not invariant
        let c1 = gen(1, 1, &[]);
        assert!(contract_linear(&c1, 1, 1).is_zero());
        assert!(!linear_action(&c1, 1, 1).is_zero());
        assert!(!is_relative(&c1, 1));
        // the scalar 1 is relative
        assert!(is_relative(&WCochain::scalar(1, rat(1)), 1));
        // anything containing c^i_j is not horizontal
        let c11 = gen(2, 1, &[2]);
        assert!(!is_relative(&c11, 2));
    }

    #[test]
    fn linear_action_matches_direct_evaluation() {
        use fields::*;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2] {
            let gens = enumerate_generators(n as u8, 2);
            let random_field = |rng: &mut rand_chacha::ChaCha8Rng| {
                let comp = (0..n)
                    .map(|_| {
                        let mut p = Poly::zero(n);
                        for _ in 0..3 {
                            let mut m = crate::symbolics::Monomial::one(n);
                            for v in 0..n {
                                m = m.with_exp(v, rng.gen_range(0..3u32));
                            }
                            p.add_term(m, rat(rng.gen_range(-2..=2)));
                        }
                        p
                    })
                    .collect();
                FormalField { comp }
            };
            for i in 1..=n as u8 {
                for j in 1..=n as u8 {
                    // E = x^j d/dx^i
                    let mut e_comp = vec![Poly::zero(n); n];
                    e_comp[i as usize - 1] = Poly::var(n, j as usize - 1);
                    let e = FormalField { comp: e_comp };
                    for g in &gens {
                        let c = WCochain::generator(n as u8, g.clone());
                        let alg = linear_action(&c, i, j);
                        for _ in 0..4 {
                            let xi = random_field(&mut rng);
                            let direct = evaluate_linear_action(&c, &e, &[xi.clone()]);
                            let from_alg = evaluate(&alg, &[xi]);
                            assert_eq!(direct, from_alg, "mismatch for {g}, E=x^{j} d_{i}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn differential_matches_ce_formula_on_fields() {
        use fields::*;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for n in [1usize, 2] {
            let gens = enumerate_generators(n as u8, 2);
            let random_field = |rng: &mut rand_chacha::ChaCha8Rng| {
                let comp = (0..n)
                    .map(|_| {
                        let mut p = Poly::zero(n);
                        for _ in 0..3 {
                            let mut m = crate::symbolics::Monomial::one(n);
                            for v in 0..n {
                                m = m.with_exp(v, rng.gen_range(0..3u32));
                            }
                            p.add_term(m, rat(rng.gen_range(-2..=2)));
                        }
                        p
                    })
                    .collect();
                FormalField { comp }
            };
            for g in &gens {
                let c = WCochain::generator(n as u8, g.clone());
                let dc = differential(&c);
                for _ in 0..4 {
                    let f1 = random_field(&mut rng);
                    let f2 = random_field(&mut rng);
                    let direct = evaluate_ce_differential(&c, &[f1.clone(), f2.clone()]);
                    let from_alg = evaluate(&dc, &[f1, f2]);
                    assert_eq!(direct, from_alg, "CE mismatch on {g}, n={n}");
                }
            }
        }
    }

    #[test]
    fn weight_zero_w1_table() {
        let rows = cohomology_ranks(1, 0, 5, false, 10_000).unwrap();
        let dims: Vec<usize> = rows.iter().map(|r| r.dim).collect();
        assert_eq!(dims, vec![1, 1, 1, 1, 0, 0]);
        assert_eq!(rows[0].betti, 1, "b^0 = 1");
        // Euler characteristic consistency
        let chi_dim: i64 = rows.iter().map(|r| (-1i64).pow(r.degree as u32) * r.dim as i64).sum();
        let chi_betti: i64 = rows.iter().map(|r| (-1i64).pow(r.degree as u32) * r.betti).sum();
        assert_eq!(chi_dim, chi_betti);
    }

    #[test]
    fn relative_weight_zero_w1() {
        // relative weight-0 complex: scalars in degree 0, Psi_1 in degree 2
        let b0 = relative_basis(1, 0, 0);
        assert_eq!(b0.len(), 1);
        let b1 = relative_basis(1, 0, 1);
        assert!(b1.is_empty());
        let b2 = relative_basis(1, 0, 2);
        assert_eq!(b2.len(), 1);
        let psi1 = chern_cocycle(1, 1).unwrap();
        assert!(differential(&psi1).is_zero());
        assert!(!is_relative_coboundary(&psi1, 1, 0));
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            cohomology_ranks(2, 1, 6, false, 3),
            Err(WnError::ResourceBudgetExceeded { .. })
        ));
    }
}
