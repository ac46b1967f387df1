//! Densities of local functionals, identified modulo total x-derivatives.

use crate::expr::JetExpr;
use crate::poly::DiffPoly;
use crate::symbol::{Field, Gen};

/// Density of a local functional `int body dx`.
#[derive(Clone, Debug)]
pub struct LocalDensity {
    body: JetExpr,
    max_jet: u8,
    explicit_x: bool,
    explicit_t: bool,
}

impl LocalDensity {
    pub fn new(body: JetExpr) -> Self {
        let max_jet = body.max_jet(Field::U);
        let explicit_x = body.depends_on(&Gen::X);
        let explicit_t = body.depends_on(&Gen::T);
        LocalDensity { body, max_jet, explicit_x, explicit_t }
    }

    pub fn from_poly(p: DiffPoly) -> Self {
        LocalDensity::new(crate::expr::poly_to_expr(&p))
    }

    pub fn body(&self) -> &JetExpr {
        &self.body
    }

    pub fn max_jet(&self) -> u8 {
        self.max_jet
    }

    pub fn explicit_x(&self) -> bool {
        self.explicit_x
    }

    pub fn explicit_t(&self) -> bool {
        self.explicit_t
    }
}
