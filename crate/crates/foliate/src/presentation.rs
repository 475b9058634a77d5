//! Finite atlas presentations: a finite chart category with
//! expression-valued morphisms, composable-string enumeration, and the
//! transversal presentation of the Reeb foliation.
//!
//! Morphism words compose by substitution; words are deduplicated by
//! comparing all component expressions, so declared relations are recovered
//! semantically (e.g. the shift and its inverse cancel).

use std::collections::BTreeMap;

use crate::error::SymbolicError;
use crate::jet::extend_morphism;
use crate::profile::ReebProfile;
use crate::symbolics::{Ctx, Expr, SubstMap, VariableContext};

#[derive(Clone)]
pub struct Chart {
    pub name: String,
    pub ctx: Ctx,
    pub domain: String,
}

/// Generating morphism between charts: a total symbol map from the target
/// context into expressions over the source context.
#[derive(Clone)]
pub struct Generator {
    pub name: String,
    pub src: usize,
    pub tgt: usize,
    pub map: SubstMap,
}

/// A composite word of generators, reduced to its substitution map.
#[derive(Clone)]
pub struct Morphism {
    pub src: usize,
    pub tgt: usize,
    /// generator indices, outermost first; empty for identities
    pub word: Vec<usize>,
    pub map: SubstMap,
    pub display: String,
}

pub struct AtlasPresentation {
    pub charts: Vec<Chart>,
    pub generators: Vec<Generator>,
    /// profile attached to a generating morphism, when it has one
    pub profiles: BTreeMap<String, ReebProfile>,
}

impl AtlasPresentation {
    pub fn chart_index(&self, name: &str) -> Option<usize> {
        self.charts.iter().position(|c| c.name == name)
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }
}

fn identity_map(ctx: &Ctx) -> SubstMap {
    let mut map = SubstMap::new(ctx, ctx);
    for id in 0..ctx.len() {
        map.assign(id, Expr::symbol(ctx, id));
    }
    map
}

/// Substitution composition: for m1: A -> B and m2: B -> C the composite
/// assigns each C-symbol the image under m2 rewritten through m1.
fn compose_maps(
    outer: &SubstMap,
    inner: &SubstMap,
    outer_src_ctx: &Ctx,
    composite_tgt_ctx: &Ctx,
) -> Result<SubstMap, SymbolicError> {
    let mut map = SubstMap::new(composite_tgt_ctx, inner.target());
    for id in 0..composite_tgt_ctx.len() {
        if let Some(img) = outer.get(id) {
            map.assign(id, img.substitute(inner)?);
        }
    }
    let _ = outer_src_ctx;
    Ok(map)
}

fn maps_equal(a: &SubstMap, b: &SubstMap, tgt_ctx: &Ctx) -> bool {
    for id in 0..tgt_ctx.len() {
        match (a.get(id), b.get(id)) {
            (Some(x), Some(y)) => {
                if !x.equals(y) {
                    return false;
                }
            }
            (None, None) => {}
            _ => return false,
        }
    }
    true
}

pub type MorId = usize;

/// Deduplicated table of morphism words up to a growing word bound.
pub struct MorphismTable<'p> {
    pub presentation: &'p AtlasPresentation,
    morphisms: Vec<Morphism>,
    /// word length of each morphism (identities are 0)
    word_len: Vec<usize>,
    built_bound: usize,
}

impl<'p> MorphismTable<'p> {
    pub fn new(p: &'p AtlasPresentation) -> MorphismTable<'p> {
        let mut t = MorphismTable {
            presentation: p,
            morphisms: Vec::new(),
            word_len: Vec::new(),
            built_bound: 0,
        };
        for (i, chart) in p.charts.iter().enumerate() {
            t.morphisms.push(Morphism {
                src: i,
                tgt: i,
                word: vec![],
                map: identity_map(&chart.ctx),
                display: format!("id_{}", chart.name),
            });
            t.word_len.push(0);
        }
        t
    }

    pub fn morphism(&self, id: MorId) -> &Morphism {
        &self.morphisms[id]
    }

    pub fn len(&self) -> usize {
        self.morphisms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.morphisms.is_empty()
    }

    pub fn identity(&self, chart: usize) -> MorId {
        chart
    }

    fn find_equal(&self, m: &Morphism) -> Option<MorId> {
        let tgt_ctx = &self.presentation.charts[m.tgt].ctx;
        self.morphisms
            .iter()
            .position(|x| x.src == m.src && x.tgt == m.tgt && maps_equal(&x.map, &m.map, tgt_ctx))
    }

    fn insert(&mut self, m: Morphism, wlen: usize) -> MorId {
        if let Some(id) = self.find_equal(&m) {
            // keep the shortest display
            if wlen < self.word_len[id] {
                self.word_len[id] = wlen;
                self.morphisms[id].display = m.display;
                self.morphisms[id].word = m.word;
            }
            return id;
        }
        self.morphisms.push(m);
        self.word_len.push(wlen);
        self.morphisms.len() - 1
    }

    /// Extends the table so that every word of length <= `bound` is present.
    pub fn ensure_words(&mut self, bound: usize) -> Result<(), SymbolicError> {
        while self.built_bound < bound {
            let next = self.built_bound + 1;
            // words of length `next` = generator . word of length next-1
            let snapshot: Vec<MorId> = (0..self.morphisms.len())
                .filter(|&id| self.word_len[id] + 1 == next || (next == 1 && self.word_len[id] == 0 && self.morphisms[id].word.is_empty()))
                .collect();
            for gi in 0..self.presentation.generators.len() {
                let g = self.presentation.generators[gi].clone();
                for &wid in &snapshot {
                    let w = self.morphisms[wid].clone();
                    if w.tgt != g.src {
                        continue;
                    }
                    if self.word_len[wid] + 1 != next {
                        continue;
                    }
                    let tgt_ctx = &self.presentation.charts[g.tgt].ctx;
                    let map = compose_maps(
                        &g.map,
                        &w.map,
                        &self.presentation.charts[g.src].ctx,
                        tgt_ctx,
                    )?;
                    let display = if w.word.is_empty() {
                        g.name.clone()
                    } else {
                        format!("{}.{}", g.name, w.display)
                    };
                    let mut word = vec![gi];
                    word.extend(&w.word);
                    self.insert(
                        Morphism { src: w.src, tgt: g.tgt, word, map, display },
                        next,
                    );
                }
            }
            self.built_bound = next;
        }
        Ok(())
    }

    /// Composite of two table morphisms (outer after inner), inserted on
    /// demand.
    pub fn compose(&mut self, outer: MorId, inner: MorId) -> Result<MorId, SymbolicError> {
        let o = self.morphisms[outer].clone();
        let i = self.morphisms[inner].clone();
        assert_eq!(i.tgt, o.src, "morphisms not composable");
        if o.word.is_empty() {
            return Ok(inner);
        }
        if i.word.is_empty() {
            return Ok(outer);
        }
        let tgt_ctx = &self.presentation.charts[o.tgt].ctx;
        let map = compose_maps(&o.map, &i.map, &self.presentation.charts[o.src].ctx, tgt_ctx)?;
        let mut word = o.word.clone();
        word.extend(&i.word);
        let wlen = self.word_len[outer] + self.word_len[inner];
        let display = format!("{}.{}", o.display, i.display);
        Ok(self.insert(Morphism { src: i.src, tgt: o.tgt, word, map, display }, wlen))
    }

    /// All morphisms with word length within the bound, in table order.
    pub fn with_bound(&self, bound: usize) -> Vec<MorId> {
        (0..self.morphisms.len())
            .filter(|&id| self.word_len[id] <= bound)
            .collect()
    }

    /// Composable strings `U_0 -g1-> U_1 -g2-> ... -gk-> U_k` with every
    /// entry a word of length <= `word_bound`. A string of length 0 is a
    /// bare chart.
    pub fn strings(&self, k: usize, word_bound: usize) -> Vec<CechString> {
        if k == 0 {
            return (0..self.presentation.charts.len())
                .map(|c| CechString { chart: c, morphisms: vec![] })
                .collect();
        }
        let ids = self.with_bound(word_bound);
        let mut out = Vec::new();
        let mut stack: Vec<MorId> = Vec::new();
        fn rec(
            table: &MorphismTable<'_>,
            ids: &[MorId],
            k: usize,
            stack: &mut Vec<MorId>,
            out: &mut Vec<CechString>,
        ) {
            if stack.len() == k {
                out.push(CechString {
                    chart: table.morphism(stack[0]).src,
                    morphisms: stack.clone(),
                });
                return;
            }
            for &id in ids {
                let ok = match stack.last() {
                    None => true,
                    Some(&prev) => table.morphism(prev).tgt == table.morphism(id).src,
                };
                if ok {
                    stack.push(id);
                    rec(table, ids, k, stack, out);
                    stack.pop();
                }
            }
        }
        rec(self, &ids, k, &mut stack, &mut out);
        out
    }
}

/// A composable string; `chart` is the source chart `U_0` carrying the
/// cochain value.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct CechString {
    pub chart: usize,
    pub morphisms: Vec<MorId>,
}

impl CechString {
    pub fn display(&self, table: &MorphismTable<'_>) -> String {
        if self.morphisms.is_empty() {
            return table.presentation.charts[self.chart].name.clone();
        }
        let parts: Vec<String> = self
            .morphisms
            .iter()
            .map(|&m| table.morphism(m).display.clone())
            .collect();
        format!("({})", parts.join(", "))
    }
}

/// Chart context for the angular transversal: coordinates `a0, a2..aN`,
/// the formal constant `tau` (standing for 2*pi) and the period-1 trig pair
/// `sin0 = sin(tau a0)`, `cos0 = cos(tau a0)`.
pub fn alpha_chart_ctx(order: usize) -> Ctx {
    let mut b = VariableContext::builder().coordinate("a0");
    for p in 2..=order {
        b = b.coordinate(&format!("a{p}"));
    }
    b.constant("tau")
        .trig_pair("sin0", "cos0", "a0", "tau", None, false)
        .build()
}

/// Chart context for the interval transversal: coordinates `y0, y2..yN`,
/// the profile chain `f` over `y0`, `tau`, and the pulled-back trig pair
/// `sphi = sin(-tau f(y0))`, `cphi = cos(-tau f(y0))` whose derivatives
/// carry the chain factor.
pub fn t_chart_ctx(order: usize) -> Ctx {
    let mut b = VariableContext::builder().coordinate("y0");
    for p in 2..=order {
        b = b.coordinate(&format!("y{p}"));
    }
    b.chain("f", "y0", order as u32 + 2)
        .constant("tau")
        .trig_pair("sphi", "cphi", "y0", "tau", Some("f'"), true)
        .build()
}

/// The two-chart transversal presentation of the Reeb foliation: the
/// angular chart with its period-1 shift `T` (and inverse), and the
/// interval chart mapped in by `phi: a = -f(t)`, jet-extended to the given
/// order.
pub fn reeb_presentation(
    profile: &ReebProfile,
    order: usize,
) -> Result<AtlasPresentation, SymbolicError> {
    let ca = alpha_chart_ctx(order);
    let ct = t_chart_ctx(order);
    let charts = vec![
        Chart { name: "Ca".into(), ctx: ca.clone(), domain: "a in R (period-1 shifts)".into() },
        Chart { name: "Ct".into(), ctx: ct.clone(), domain: "|t| < 1".into() },
    ];

    let shift = |offset: i64| -> Result<SubstMap, SymbolicError> {
        let mut m = SubstMap::new(&ca, &ca);
        m.assign_named(&ca, "a0", Expr::named(&ca, "a0")?.add(&Expr::int(&ca, offset)))?;
        for p in 2..=order {
            let name = format!("a{p}");
            m.assign_named(&ca, &name, Expr::named(&ca, &name)?)?;
        }
        m.assign_named(&ca, "tau", Expr::named(&ca, "tau")?)?;
        // period-1 trig symbols are invariant under the integer shift
        m.assign_named(&ca, "sin0", Expr::named(&ca, "sin0")?)?;
        m.assign_named(&ca, "cos0", Expr::named(&ca, "cos0")?)?;
        Ok(m)
    };

    let ext = extend_morphism(&ct, "f", order).map_err(|e| match e {
        crate::error::JetError::Symbolic(s) => s,
        other => SymbolicError::MissingComponent { name: other.to_string() },
    })?;
    let mut phi = SubstMap::new(&ca, &ct);
    phi.assign_named(&ca, "a0", ext.beta0.clone())?;
    for p in 2..=order {
        phi.assign_named(&ca, &format!("a{p}"), ext.beta(p).clone())?;
    }
    phi.assign_named(&ca, "tau", Expr::named(&ct, "tau")?)?;
    phi.assign_named(&ca, "sin0", Expr::named(&ct, "sphi")?)?;
    phi.assign_named(&ca, "cos0", Expr::named(&ct, "cphi")?)?;

    let generators = vec![
        Generator { name: "T".into(), src: 0, tgt: 0, map: shift(1)? },
        Generator { name: "Tinv".into(), src: 0, tgt: 0, map: shift(-1)? },
        Generator { name: "phi".into(), src: 1, tgt: 0, map: phi },
    ];
    let mut profiles = BTreeMap::new();
    profiles.insert("phi".to_string(), profile.clone());
    Ok(AtlasPresentation { charts, generators, profiles })
}

/// The two-component variant: both solid-torus halves contribute a
/// transversal chart, each mapped in by its own profile (the same profile
/// twice by default).
pub fn reeb_presentation_pair(
    profile1: &ReebProfile,
    profile2: &ReebProfile,
    order: usize,
) -> Result<AtlasPresentation, SymbolicError> {
    let mut p = reeb_presentation(profile1, order)?;
    let ct2 = {
        // same shape as the first interval chart, separate instance
        let mut b = VariableContext::builder().coordinate("y0");
        for q in 2..=order {
            b = b.coordinate(&format!("y{q}"));
        }
        b.chain("f", "y0", order as u32 + 2)
            .constant("tau")
            .trig_pair("sphi", "cphi", "y0", "tau", Some("f'"), true)
            .build()
    };
    p.charts.push(Chart {
        name: "Ct2".into(),
        ctx: ct2.clone(),
        domain: "|t| < 1 (second component)".into(),
    });
    let ca = p.charts[0].ctx.clone();
    let ext = extend_morphism(&ct2, "f", order).map_err(|e| match e {
        crate::error::JetError::Symbolic(s) => s,
        other => SymbolicError::MissingComponent { name: other.to_string() },
    })?;
    let mut phi2 = SubstMap::new(&ca, &ct2);
    phi2.assign_named(&ca, "a0", ext.beta0.clone())?;
    for q in 2..=order {
        phi2.assign_named(&ca, &format!("a{q}"), ext.beta(q).clone())?;
    }
    phi2.assign_named(&ca, "tau", Expr::named(&ct2, "tau")?)?;
    phi2.assign_named(&ca, "sin0", Expr::named(&ct2, "sphi")?)?;
    phi2.assign_named(&ca, "cos0", Expr::named(&ct2, "cphi")?)?;
    p.generators.push(Generator { name: "phi2".into(), src: 2, tgt: 0, map: phi2 });
    p.profiles.insert("phi2".to_string(), profile2.clone());
    Ok(p)
}
