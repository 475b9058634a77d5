//! Symbol contexts: coordinate variables, truncated derivative chains,
//! formal constants and defined (trig-like) symbols.
//!
//! A chain `f` with base `t` and truncation order `M` contributes symbols
//! `f, f', f'', ...` where differentiating the order-`M` symbol with respect
//! to `t` is a hard error rather than a silent truncation.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::poly::Poly;
use crate::error::SymbolicError;

pub type SymbolId = usize;
pub type Ctx = Arc<VariableContext>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    /// Coordinate variable: carries a differential slot.
    Coordinate,
    /// Formal constant with zero derivative along every coordinate.
    Constant,
    /// Chain symbol of a given order within its chain; differentiates to the
    /// next symbol along the base coordinate, erroring at the truncation.
    Chain {
        chain: String,
        order: u32,
        base: SymbolId,
        next: Option<SymbolId>,
    },
    /// Symbol with an explicitly given derivative polynomial along one base
    /// coordinate (zero along all others). Used for sin/cos pairs.
    Defined { base: SymbolId, derivative: Poly },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
}

#[derive(Debug, PartialEq, Eq)]
pub struct VariableContext {
    symbols: Vec<Symbol>,
    coordinates: Vec<SymbolId>,
    by_name: BTreeMap<String, SymbolId>,
}

/// Result of differentiating one symbol with respect to one coordinate.
pub enum SymbolDerivative {
    Zero,
    One,
    Poly(Poly),
}

impl VariableContext {
    pub fn builder() -> ContextBuilder {
        ContextBuilder::default()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id]
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.symbols[id].name
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.by_name.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<SymbolId, SymbolicError> {
        self.lookup(name)
            .ok_or_else(|| SymbolicError::UnknownSymbol { name: name.to_string() })
    }

    pub fn coordinates(&self) -> &[SymbolId] {
        &self.coordinates
    }

    pub fn coordinate(&self, pos: usize) -> SymbolId {
        self.coordinates[pos]
    }

    pub fn coordinate_pos(&self, id: SymbolId) -> Option<usize> {
        self.coordinates.iter().position(|&c| c == id)
    }

    pub fn is_coordinate(&self, id: SymbolId) -> bool {
        matches!(self.symbols[id].kind, SymbolKind::Coordinate)
    }

    /// All symbols of the chain with the given name, ordered by chain order.
    pub fn chain_symbols(&self, chain: &str) -> Vec<SymbolId> {
        let mut out: Vec<(u32, SymbolId)> = self
            .symbols
            .iter()
            .enumerate()
            .filter_map(|(id, s)| match &s.kind {
                SymbolKind::Chain { chain: c, order, .. } if c == chain => Some((*order, id)),
                _ => None,
            })
            .collect();
        out.sort();
        out.into_iter().map(|(_, id)| id).collect()
    }

    /// d(symbol)/d(coordinate). `v` must be a coordinate symbol.
    pub fn symbol_derivative(
        &self,
        s: SymbolId,
        v: SymbolId,
    ) -> Result<SymbolDerivative, SymbolicError> {
        debug_assert!(self.is_coordinate(v));
        match &self.symbols[s].kind {
            SymbolKind::Coordinate => {
                if s == v {
                    Ok(SymbolDerivative::One)
                } else {
                    Ok(SymbolDerivative::Zero)
                }
            }
            SymbolKind::Constant => Ok(SymbolDerivative::Zero),
            SymbolKind::Chain { chain, order, base, next } => {
                if *base != v {
                    Ok(SymbolDerivative::Zero)
                } else {
                    match next {
                        Some(n) => Ok(SymbolDerivative::Poly(Poly::var(self.len(), *n))),
                        None => Err(SymbolicError::TruncationExceeded {
                            chain: chain.clone(),
                            order: *order,
                        }),
                    }
                }
            }
            SymbolKind::Defined { base, derivative } => {
                if *base == v {
                    Ok(SymbolDerivative::Poly(derivative.clone()))
                } else {
                    Ok(SymbolDerivative::Zero)
                }
            }
        }
    }
}

impl fmt::Display for VariableContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.symbols.iter().map(|s| s.name.as_str()).collect();
        write!(f, "[{}]", names.join(", "))
    }
}

/// Contexts compare compatible when they are the same allocation or
/// structurally equal; expressions from incompatible contexts never mix.
pub fn compatible(a: &Ctx, b: &Ctx) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

#[derive(Default)]
pub struct ContextBuilder {
    symbols: Vec<Symbol>,
    by_name: BTreeMap<String, SymbolId>,
}

impl ContextBuilder {
    fn insert(&mut self, name: &str, kind: SymbolKind) -> SymbolId {
        assert!(
            !self.by_name.contains_key(name),
            "duplicate symbol name: {name}"
        );
        let id = self.symbols.len();
        self.symbols.push(Symbol { name: name.to_string(), kind });
        self.by_name.insert(name.to_string(), id);
        id
    }

    pub fn coordinate(mut self, name: &str) -> Self {
        self.insert(name, SymbolKind::Coordinate);
        self
    }

    pub fn coordinates<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        for n in names {
            self.insert(n, SymbolKind::Coordinate);
        }
        self
    }

    pub fn constant(mut self, name: &str) -> Self {
        self.insert(name, SymbolKind::Constant);
        self
    }

    /// Adds the symbols `name, name', name'', ..., name^(max_order)` for a
    /// derivative chain over the named base coordinate.
    pub fn chain(mut self, name: &str, base: &str, max_order: u32) -> Self {
        let base_id = *self
            .by_name
            .get(base)
            .unwrap_or_else(|| panic!("chain base {base} not declared"));
        assert!(
            matches!(self.symbols[base_id].kind, SymbolKind::Coordinate),
            "chain base must be a coordinate"
        );
        let first = self.symbols.len();
        for k in 0..=max_order {
            let sym_name = chain_symbol_name(name, k);
            let next = if k < max_order { Some(first + k as usize + 1) } else { None };
            self.insert(
                &sym_name,
                SymbolKind::Chain { chain: name.to_string(), order: k, base: base_id, next },
            );
        }
        self
    }

    /// Adds a sin/cos pair with d(sin) = scale*cos, d(cos) = -scale*sin along
    /// the base coordinate, where `scale` is an already-declared symbol
    /// (typically a formal constant standing for 2*pi) or a chain symbol
    /// product supplied via `extra_factor`.
    pub fn trig_pair(
        mut self,
        sin_name: &str,
        cos_name: &str,
        base: &str,
        scale: &str,
        extra_factor: Option<&str>,
        negate_sin_derivative: bool,
    ) -> Self {
        let base_id = *self.by_name.get(base).expect("trig base not declared");
        let scale_id = *self.by_name.get(scale).expect("trig scale not declared");
        let extra_id = extra_factor.map(|f| *self.by_name.get(f).expect("trig factor not declared"));
        let sin_id = self.symbols.len();
        let cos_id = sin_id + 1;
        // placeholders; derivative polys need the final symbol count, patched below
        self.insert(sin_name, SymbolKind::Constant);
        self.insert(cos_name, SymbolKind::Constant);
        let n = self.symbols.len();
        let mono = |sym: SymbolId| {
            let mut m = super::poly::Monomial::var(n, scale_id);
            m = m.mul(&super::poly::Monomial::var(n, sym));
            if let Some(e) = extra_id {
                m = m.mul(&super::poly::Monomial::var(n, e));
            }
            m
        };
        let sign = |neg: bool| {
            if neg {
                -crate::rational::rat(1)
            } else {
                crate::rational::rat(1)
            }
        };
        let d_sin = Poly::monomial(n, mono(cos_id), sign(negate_sin_derivative));
        let d_cos = Poly::monomial(n, mono(sin_id), sign(!negate_sin_derivative));
        self.symbols[sin_id].kind = SymbolKind::Defined { base: base_id, derivative: d_sin };
        self.symbols[cos_id].kind = SymbolKind::Defined { base: base_id, derivative: d_cos };
        self
    }

    pub fn build(self) -> Ctx {
        let coordinates = self
            .symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s.kind, SymbolKind::Coordinate))
            .map(|(i, _)| i)
            .collect();
        Arc::new(VariableContext {
            symbols: self.symbols,
            coordinates,
            by_name: self.by_name,
        })
    }
}

pub fn chain_symbol_name(chain: &str, order: u32) -> String {
    match order {
        0 => chain.to_string(),
        1 => format!("{chain}'"),
        2 => format!("{chain}''"),
        k => format!("{chain}^({k})"),
    }
}
