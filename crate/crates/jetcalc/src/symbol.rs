//! Generators of the jet algebra: jet variables, function symbols, named
//! constants and the distinguished scalars x, t, eps.

use std::fmt;
use std::sync::Arc;

/// A jet field: the undeformed field `u` or one of the semiclassical
/// coefficients `v0`, `v1`, `v2`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Field {
    U,
    V0,
    V1,
    V2,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::U => "u",
            Field::V0 => "v0",
            Field::V1 => "v1",
            Field::V2 => "v2",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.write_str(self.name())
    }
}

/// A jet variable: `order` counts x-derivatives, so `JetVar::new(Field::U, 2)`
/// is u_xx.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct JetVar {
    pub field: Field,
    pub order: u8,
}

impl JetVar {
    pub const fn new(field: Field, order: u8) -> Self {
        JetVar { field, order }
    }

    pub fn raised(self) -> Self {
        JetVar::new(self.field, self.order + 1)
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order {
            0 => write!(fm, "{}", self.field),
            k @ 1..=3 => write!(fm, "{}_{}", self.field, "xxx".split_at(k as usize).0),
            k => write!(fm, "{}_x{}", self.field, k),
        }
    }
}

/// Interned-ish symbol name. Known names are static; user names share an Arc.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SymName {
    Static(&'static str),
    Owned(Arc<str>),
}

impl SymName {
    pub fn as_str(&self) -> &str {
        match self {
            SymName::Static(s) => s,
            SymName::Owned(s) => s,
        }
    }
}

impl From<&'static str> for SymName {
    fn from(s: &'static str) -> Self {
        SymName::Static(s)
    }
}

impl fmt::Display for SymName {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.write_str(self.as_str())
    }
}

/// A function symbol `name^(order)` applied (always) to the 0-jet of a field:
/// `FuncSymbol { name: h, order: 3 }` on field u stands for h'''(u).
///
/// Equality and ordering depend only on (name, order); rewrite rules for
/// defined symbols live in [`crate::table::SymbolTable`], keyed by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FuncSymbol {
    pub name: SymName,
    pub order: u8,
}

impl FuncSymbol {
    pub fn new(name: impl Into<SymName>, order: u8) -> Self {
        FuncSymbol { name: name.into(), order }
    }

    pub fn raised(&self) -> Self {
        FuncSymbol { name: self.name.clone(), order: self.order + 1 }
    }
}

impl fmt::Display for FuncSymbol {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order {
            0 => write!(fm, "{}", self.name),
            k @ 1..=3 => write!(fm, "{}{}", self.name, "'''".split_at(k as usize).0),
            k => write!(fm, "{}^({})", self.name, k),
        }
    }
}

/// A generator of the monomial algebra.
///
/// The `Ord` implementation fixes the lexicographic tie-break used by the
/// canonical monomial order: eps < x < t < constants < jets < symbols.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Gen {
    Eps,
    X,
    T,
    Const(SymName),
    Jet(JetVar),
    Sym(FuncSymbol, Field),
}

impl Gen {
    pub fn jet(field: Field, order: u8) -> Self {
        Gen::Jet(JetVar::new(field, order))
    }

    pub fn sym(name: impl Into<SymName>, order: u8, field: Field) -> Self {
        Gen::Sym(FuncSymbol::new(name, order), field)
    }

    /// Jet degree contributed per unit power (deg u^(j) = j).
    pub fn jet_degree(&self) -> u32 {
        match self {
            Gen::Jet(v) => v.order as u32,
            _ => 0,
        }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::Eps => fm.write_str("eps"),
            Gen::X => fm.write_str("x"),
            Gen::T => fm.write_str("t"),
            Gen::Const(n) => write!(fm, "{n}"),
            Gen::Jet(v) => write!(fm, "{v}"),
            Gen::Sym(s, f) => write!(fm, "{s}({f})"),
        }
    }
}
