//! Exact symbolic substrate: rational expressions with formal derivative
//! chains, and the exterior algebra of differential forms.

pub mod context;
pub mod expr;
pub mod form;
pub mod poly;

pub use context::{chain_symbol_name, compatible, Ctx, SymbolId, SymbolKind, VariableContext};
pub use expr::{Expr, SubstMap};
pub use form::Form;
pub use poly::{Monomial, Poly};
