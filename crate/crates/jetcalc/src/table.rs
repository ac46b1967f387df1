//! Rewrite rules for defined symbols (r, q, f1, f2, ...).
//!
//! A rule gives the *first derivative* of a symbol as an expression in other
//! generators, e.g. r' -> 1/c. Differentiation of a ruled symbol substitutes
//! the rule immediately and then proceeds with ordinary calculus, so ruled
//! symbols never appear with deriv_order >= 1 in normalized output. The
//! zeroth-order value is never materialized.
//!
//! Derivative chains are resolved eagerly at insertion, so a built table is
//! immutable and safe to share across threads.

use crate::expr::JetExpr;
use crate::ratpoly::RatPoly;
use crate::symbol::{Field, FuncSymbol, SymName};
use crate::JetError;
use std::collections::BTreeMap;

/// Depth of precomputed derivative chains; the eps^4 string equation needs
/// at most f^(7), comfortably inside this bound.
pub const DEFAULT_CHAIN_DEPTH: usize = 10;

#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    /// chain[name][j] = (d/du)^j of the rule for name', as a rational
    /// polynomial in Field::U generators.
    chains: BTreeMap<SymName, Vec<RatPoly>>,
    depth: usize,
}

impl SymbolTable {
    pub fn new() -> Self {
        SymbolTable { chains: BTreeMap::new(), depth: DEFAULT_CHAIN_DEPTH }
    }

    pub fn with_depth(depth: usize) -> Self {
        SymbolTable { chains: BTreeMap::new(), depth }
    }

    pub fn is_ruled(&self, name: &SymName) -> bool {
        self.chains.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &SymName> {
        self.chains.keys()
    }

    /// Register `name' = rhs` (rhs written over Field::U). The rhs may
    /// reference symbols ruled by earlier insertions.
    pub fn add_rule(&mut self, name: impl Into<SymName>, rhs: &JetExpr) -> Result<(), JetError> {
        let name = name.into();
        let base = RatPoly::from_expr(rhs)?;
        let mut chain = Vec::with_capacity(self.depth + 1);
        chain.push(base);
        for j in 0..self.depth {
            let next = chain[j].du(Field::U, self)?;
            chain.push(next);
        }
        self.chains.insert(name, chain);
        Ok(())
    }

    /// Same, but from an already rational-polynomial rule.
    pub fn add_rule_ratpoly(&mut self, name: impl Into<SymName>, rhs: RatPoly) -> Result<(), JetError> {
        let name = name.into();
        let mut chain = Vec::with_capacity(self.depth + 1);
        chain.push(rhs);
        for j in 0..self.depth {
            let next = chain[j].du(Field::U, self)?;
            chain.push(next);
        }
        self.chains.insert(name, chain);
        Ok(())
    }

    /// d/du of `sym` applied to `field`: either the precomputed chain entry
    /// (ruled) or the plainly raised symbol.
    pub fn sym_derivative(&self, sym: &FuncSymbol, field: Field) -> Result<RatPoly, JetError> {
        match self.chains.get(&sym.name) {
            None => Ok(RatPoly::from_poly(crate::poly::DiffPoly::sym(
                sym.name.clone(),
                sym.order + 1,
                field,
            ))),
            Some(chain) => {
                let k = sym.order as usize;
                let entry = chain.get(k).ok_or_else(|| {
                    JetError::ChainDepth(format!(
                        "rewrite chain for {} exceeded depth {}",
                        sym.name, self.depth
                    ))
                })?;
                Ok(entry.refield(Field::U, field))
            }
        }
    }

    /// Resolve a ruled symbol of positive order to its closed form
    /// (chain entry k-1), or `None` for unruled / order-0 symbols.
    pub fn resolve(&self, sym: &FuncSymbol, field: Field) -> Option<Result<RatPoly, JetError>> {
        if sym.order == 0 {
            return None;
        }
        let chain = self.chains.get(&sym.name)?;
        let k = sym.order as usize - 1;
        Some(match chain.get(k) {
            Some(entry) => Ok(entry.refield(Field::U, field)),
            None => Err(JetError::ChainDepth(format!(
                "rewrite chain for {} exceeded depth {}",
                sym.name, self.depth
            ))),
        })
    }
}
