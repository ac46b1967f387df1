//! Rational normal form: a differential polynomial numerator over a product
//! of monic polynomial factors. Addition, multiplication, total derivatives
//! and Euler-Lagrange reduce to exact `DiffPoly` arithmetic, so zero-testing
//! a `RatPoly` is an exact structural test on its numerator.

use crate::expr::{JetExpr, Node};
use crate::poly::{rat, DiffPoly, Rat};
use crate::symbol::{Field, Gen};
use crate::table::SymbolTable;
use crate::JetError;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Total order on polynomials (term-sequence lexicographic); used only to
/// keep denominator factor lists canonical.
pub fn cmp_poly(a: &DiffPoly, b: &DiffPoly) -> Ordering {
    let mut ia = a.iter();
    let mut ib = b.iter();
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some((ma, ca)), Some((mb, cb))) => match ma.cmp(mb).then_with(|| ca.cmp(cb)) {
                Ordering::Equal => continue,
                ord => return ord,
            },
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatPoly {
    num: DiffPoly,
    /// monic factors with positive powers, sorted by `cmp_poly`
    den: Vec<(DiffPoly, u32)>,
}

impl RatPoly {
    pub fn zero() -> Self {
        RatPoly { num: DiffPoly::zero(), den: Vec::new() }
    }

    pub fn one() -> Self {
        RatPoly::from_poly(DiffPoly::one())
    }

    pub fn from_poly(num: DiffPoly) -> Self {
        RatPoly { num, den: Vec::new() }
    }

    pub fn from_rat(r: Rat) -> Self {
        RatPoly::from_poly(DiffPoly::constant(r))
    }

    pub fn new(num: DiffPoly, den: Vec<(DiffPoly, u32)>) -> Self {
        let mut out = RatPoly { num, den };
        out.normalize();
        out
    }

    pub fn num(&self) -> &DiffPoly {
        &self.num
    }

    pub fn den_factors(&self) -> &[(DiffPoly, u32)] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        let mut scale = rat(1);
        let mut den: Vec<(DiffPoly, u32)> = Vec::with_capacity(self.den.len());
        for (f, p) in self.den.drain(..) {
            if p == 0 || f.is_one() {
                continue;
            }
            if let Some(cst) = f.as_constant() {
                assert!(!cst.is_zero(), "zero denominator factor");
                scale *= num_traits::pow::pow(cst, p as usize);
                continue;
            }
            // make monic
            let lead = f.leading().expect("nonzero factor").1.clone();
            if lead.is_one() {
                den.push((f, p));
            } else {
                scale *= num_traits::pow::pow(lead.clone(), p as usize);
                den.push((f.scale(&lead.recip()), p));
            }
        }
        if !scale.is_one() {
            self.num = self.num.scale(&scale.recip());
        }
        den.sort_by(|a, b| cmp_poly(&a.0, &b.0));
        let mut merged: Vec<(DiffPoly, u32)> = Vec::with_capacity(den.len());
        for (f, p) in den {
            match merged.last_mut() {
                Some((lf, lp)) if *lf == f => *lp += p,
                _ => merged.push((f, p)),
            }
        }
        // cancel factors dividing the numerator exactly
        let mut out: Vec<(DiffPoly, u32)> = Vec::with_capacity(merged.len());
        for (f, mut p) in merged {
            while p > 0 {
                match self.num.div_exact(&f) {
                    Some(q) => {
                        self.num = q;
                        p -= 1;
                    }
                    None => break,
                }
            }
            if p > 0 {
                out.push((f, p));
            }
        }
        self.den = out;
    }

    pub fn add(&self, other: &RatPoly) -> RatPoly {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        // union denominator with max powers
        let mut union: Vec<(DiffPoly, u32)> = self.den.clone();
        for (f, p) in &other.den {
            match union.iter_mut().find(|(g, _)| g == f) {
                Some((_, up)) => *up = (*up).max(*p),
                None => union.push((f.clone(), *p)),
            }
        }
        let mult_for = |own: &[(DiffPoly, u32)]| -> DiffPoly {
            let mut m = DiffPoly::one();
            for (f, p) in &union {
                let have = own.iter().find(|(g, _)| g == f).map(|(_, q)| *q).unwrap_or(0);
                if *p > have {
                    m = &m * &f.pow(p - have);
                }
            }
            m
        };
        let num = &(&self.num * &mult_for(&self.den)) + &(&other.num * &mult_for(&other.den));
        RatPoly::new(num, union)
    }

    pub fn sub(&self, other: &RatPoly) -> RatPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatPoly {
        RatPoly { num: -&self.num, den: self.den.clone() }
    }

    pub fn scale(&self, r: &Rat) -> RatPoly {
        if r.is_zero() {
            return RatPoly::zero();
        }
        RatPoly { num: self.num.scale(r), den: self.den.clone() }
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        if self.is_zero() || other.is_zero() {
            return RatPoly::zero();
        }
        let mut den = self.den.clone();
        for (f, p) in &other.den {
            match den.iter_mut().find(|(g, _)| g == f) {
                Some((_, q)) => *q += p,
                None => den.push((f.clone(), *p)),
            }
        }
        RatPoly::new(&self.num * &other.num, den)
    }

    pub fn mul_poly(&self, p: &DiffPoly) -> RatPoly {
        RatPoly::new(&self.num * p, self.den.clone())
    }

    pub fn inv(&self) -> Result<RatPoly, JetError> {
        if self.is_zero() {
            return Err(JetError::Eval("division by zero expression".into()));
        }
        let mut num = DiffPoly::one();
        for (f, p) in &self.den {
            num = &num * &f.pow(*p);
        }
        RatPoly::new(num, vec![(self.num.clone(), 1)]).ok_result()
    }

    fn ok_result(self) -> Result<RatPoly, JetError> {
        Ok(self)
    }

    pub fn div(&self, other: &RatPoly) -> Result<RatPoly, JetError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, n: i32) -> Result<RatPoly, JetError> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut out = RatPoly::one();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    pub fn refield(&self, from: Field, to: Field) -> RatPoly {
        let conv = |p: &DiffPoly| -> DiffPoly {
            let mut out = DiffPoly::zero();
            for (m, c) in p.iter() {
                let factors = m
                    .factors()
                    .iter()
                    .map(|(g, pw)| {
                        let g2 = match g {
                            Gen::Jet(v) if v.field == from => Gen::jet(to, v.order),
                            Gen::Sym(f, fld) if *fld == from => Gen::Sym(f.clone(), to),
                            other => other.clone(),
                        };
                        (g2, *pw)
                    })
                    .collect();
                out.add_term(crate::poly::Monomial::from_powers(factors), c.clone());
            }
            out
        };
        RatPoly {
            num: conv(&self.num),
            den: self.den.iter().map(|(f, p)| (conv(f), *p)).collect(),
        }
    }

    /// Apply a derivation (given on polynomials) through the quotient rule.
    fn derive_with(
        &self,
        d: &dyn Fn(&DiffPoly) -> Result<RatPoly, JetError>,
    ) -> Result<RatPoly, JetError> {
        let mut out = d(&self.num)?;
        if !self.den.is_empty() {
            out = RatPoly { num: out.num.clone(), den: merge_den(&out.den, &self.den) };
            out.normalize();
            for (f, p) in &self.den {
                let df = d(f)?;
                if df.is_zero() {
                    continue;
                }
                let mut term = self.mul(&df).scale(&-rat(*p as i64));
                term = RatPoly::new(term.num.clone(), merge_den(&term.den, &[(f.clone(), 1)]));
                out = out.add(&term);
            }
        }
        Ok(out)
    }

    /// Total x-derivative with rewrite rules.
    pub fn dx(&self, table: &SymbolTable) -> Result<RatPoly, JetError> {
        self.derive_with(&|p| dx_poly(p, table))
    }

    /// Derivative with respect to the 0-jet of `field` on expressions with no
    /// higher jets of `field` in function-symbol arguments (chain-rules the
    /// symbol families of that field).
    pub fn du(&self, field: Field, table: &SymbolTable) -> Result<RatPoly, JetError> {
        self.derive_with(&|p| du_poly(p, field, table))
    }

    /// Partial derivative with respect to the k-th jet of `field`. For k = 0
    /// the function symbols of that field chain in (rule-aware).
    pub fn partial_jet(
        &self,
        field: Field,
        k: u8,
        table: &SymbolTable,
    ) -> Result<RatPoly, JetError> {
        if k == 0 {
            self.du(field, table)
        } else {
            self.derive_with(&|p| Ok(RatPoly::from_poly(p.partial(&Gen::jet(field, k)))))
        }
    }

    /// Euler-Lagrange operator sum_k (-Dx)^k d/d u^(k), truncated at `maxk`.
    /// Valid with explicit x dependence (total-derivative form).
    pub fn euler_lagrange(
        &self,
        field: Field,
        maxk: u8,
        table: &SymbolTable,
    ) -> Result<RatPoly, JetError> {
        let mut out = RatPoly::zero();
        for k in 0..=maxk {
            let mut term = self.partial_jet(field, k, table)?;
            if term.is_zero() {
                continue;
            }
            for _ in 0..k {
                term = term.dx(table)?;
            }
            if k % 2 == 1 {
                term = term.neg();
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Substitute generators by rational polynomials (simultaneous).
    pub fn substitute(&self, map: &[(Gen, RatPoly)]) -> Result<RatPoly, JetError> {
        let sub_poly = |p: &DiffPoly| -> Result<RatPoly, JetError> {
            let mut out = RatPoly::zero();
            for (m, c) in p.iter() {
                let mut acc = RatPoly::from_rat(c.clone());
                let mut plain: Vec<(Gen, u32)> = Vec::new();
                for (g, pw) in m.factors() {
                    if let Some((_, rep)) = map.iter().find(|(mg, _)| mg == g) {
                        acc = acc.mul(&rep.pow(*pw as i32)?);
                        if acc.is_zero() {
                            break;
                        }
                    } else {
                        plain.push((g.clone(), *pw));
                    }
                }
                if acc.is_zero() {
                    continue;
                }
                acc = acc.mul_poly(&DiffPoly::term(crate::poly::Monomial::from_powers(plain), rat(1)));
                out = out.add(&acc);
            }
            Ok(out)
        };
        let mut out = sub_poly(&self.num)?;
        for (f, p) in &self.den {
            let fs = sub_poly(f)?;
            out = out.mul(&fs.pow(-(*p as i32))?);
        }
        Ok(out)
    }

    pub fn eps_truncate(&self, order: u32) -> Result<RatPoly, JetError> {
        for (f, _) in &self.den {
            if f.depends_on(&Gen::Eps) {
                return Err(JetError::NonPolynomial("eps in denominator".into()));
            }
        }
        Ok(RatPoly { num: self.num.eps_truncate(order), den: self.den.clone() })
    }

    pub fn eps_coefficient(&self, k: u32) -> Result<RatPoly, JetError> {
        for (f, _) in &self.den {
            if f.depends_on(&Gen::Eps) {
                return Err(JetError::NonPolynomial("eps in denominator".into()));
            }
        }
        let mut out = RatPoly { num: self.num.eps_coefficient(k), den: self.den.clone() };
        out.normalize();
        Ok(out)
    }

    /// Build from an expression tree (no logs).
    pub fn from_expr(e: &JetExpr) -> Result<RatPoly, JetError> {
        match e.node() {
            Node::Rat(r) => Ok(RatPoly::from_rat(r.clone())),
            Node::Var(g) => Ok(RatPoly::from_poly(DiffPoly::var(g.clone()))),
            Node::Add(ts) => {
                let mut out = RatPoly::zero();
                for tm in ts {
                    out = out.add(&RatPoly::from_expr(tm)?);
                }
                Ok(out)
            }
            Node::Mul(ts) => {
                let mut out = RatPoly::one();
                for fc in ts {
                    out = out.mul(&RatPoly::from_expr(fc)?);
                }
                Ok(out)
            }
            Node::Pow(b, n) => RatPoly::from_expr(b)?.pow(*n),
            Node::Log(_) => Err(JetError::NonPolynomial("logarithm in rational form".into())),
        }
    }

    /// Resolve ruled symbols of positive order to their closed forms.
    pub fn resolve_ruled(&self, table: &SymbolTable) -> Result<RatPoly, JetError> {
        let mut map: Vec<(Gen, RatPoly)> = Vec::new();
        let mut gens = self.num.generators();
        for (f, _) in &self.den {
            for g in f.generators() {
                if !gens.contains(&g) {
                    gens.push(g);
                }
            }
        }
        for g in gens {
            if let Gen::Sym(sym, field) = &g {
                if let Some(res) = table.resolve(sym, *field) {
                    map.push((g.clone(), res?));
                }
            }
        }
        if map.is_empty() {
            return Ok(self.clone());
        }
        // resolved forms may themselves contain ruled symbols of lower order
        self.substitute(&map)?.resolve_ruled(table)
    }

    /// Convert to an expression tree (normal form: num * prod factor^-p).
    pub fn to_expr(&self) -> JetExpr {
        let mut factors = vec![crate::expr::poly_to_expr(&self.num)];
        for (f, p) in &self.den {
            factors.push(crate::expr::poly_to_expr(f).pow(-(*p as i32)));
        }
        JetExpr::product(factors)
    }
}

fn merge_den(a: &[(DiffPoly, u32)], b: &[(DiffPoly, u32)]) -> Vec<(DiffPoly, u32)> {
    let mut out = a.to_vec();
    for (f, p) in b {
        match out.iter_mut().find(|(g, _)| g == f) {
            Some((_, q)) => *q += p,
            None => out.push((f.clone(), *p)),
        }
    }
    out
}

/// Total x-derivative of a polynomial, substituting rewrite rules.
pub fn dx_poly(p: &DiffPoly, table: &SymbolTable) -> Result<RatPoly, JetError> {
    let mut out = RatPoly::zero();
    for (m, c) in p.iter() {
        for (idx, (g, pw)) in m.factors().iter().enumerate() {
            let lowered = {
                let mut fs = m.factors().to_vec();
                if fs[idx].1 == 1 {
                    fs.remove(idx);
                } else {
                    fs[idx].1 -= 1;
                }
                crate::poly::Monomial::from_powers(fs)
            };
            let cc = c * rat(*pw as i64);
            let rest = DiffPoly::term(lowered, cc);
            match g {
                Gen::X => out = out.add(&RatPoly::from_poly(rest)),
                Gen::T | Gen::Eps | Gen::Const(_) => {}
                Gen::Jet(v) => {
                    out = out.add(&RatPoly::from_poly(
                        &rest * &DiffPoly::jet(v.field, v.order + 1),
                    ))
                }
                Gen::Sym(f, field) => {
                    let dsym = table.sym_derivative(f, *field)?;
                    let term = dsym
                        .mul_poly(&rest)
                        .mul_poly(&DiffPoly::jet(*field, 1));
                    out = out.add(&term);
                }
            }
        }
    }
    Ok(out)
}

/// d/d(u0) of a polynomial: differentiates explicit 0-jets of `field` and
/// chain-rules that field's function symbols (rule-aware).
pub fn du_poly(p: &DiffPoly, field: Field, table: &SymbolTable) -> Result<RatPoly, JetError> {
    let mut out = RatPoly::from_poly(p.partial(&Gen::jet(field, 0)));
    for (m, c) in p.iter() {
        for (idx, (g, pw)) in m.factors().iter().enumerate() {
            if let Gen::Sym(f, fld) = g {
                if *fld != field {
                    continue;
                }
                let lowered = {
                    let mut fs = m.factors().to_vec();
                    if fs[idx].1 == 1 {
                        fs.remove(idx);
                    } else {
                        fs[idx].1 -= 1;
                    }
                    crate::poly::Monomial::from_powers(fs)
                };
                let rest = DiffPoly::term(lowered, c * rat(*pw as i64));
                let dsym = table.sym_derivative(f, *fld)?;
                out = out.add(&dsym.mul_poly(&rest));
            }
        }
    }
    Ok(out)
}

impl fmt::Display for RatPoly {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(fm, "{}", self.num);
        }
        write!(fm, "({}) / (", self.num)?;
        let mut first = true;
        for (f, p) in &self.den {
            if !first {
                fm.write_str(" ")?;
            }
            first = false;
            if *p == 1 {
                write!(fm, "({f})")?;
            } else {
                write!(fm, "({f})^{p}")?;
            }
        }
        fm.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c0() -> DiffPoly {
        DiffPoly::sym("c", 0, Field::U)
    }

    #[test]
    fn add_cancels_common_denominator() {
        let t = SymbolTable::new();
        let a = RatPoly::new(DiffPoly::one(), vec![(c0(), 1)]);
        let b = a.clone();
        let s = a.add(&b);
        assert_eq!(s, RatPoly::new(DiffPoly::constant(rat(2)), vec![(c0(), 1)]));
        let _ = t;
    }

    #[test]
    fn dx_of_inverse_c() {
        // Dx(1/c) = -c' u_x / c^2
        let t = SymbolTable::new();
        let a = RatPoly::new(DiffPoly::one(), vec![(c0(), 1)]);
        let d = a.dx(&t).unwrap();
        let expect = RatPoly::new(
            -&(&DiffPoly::sym("c", 1, Field::U) * &DiffPoly::jet(Field::U, 1)),
            vec![(c0(), 2)],
        );
        assert_eq!(d, expect);
    }

    #[test]
    fn rule_substitution_on_derivative() {
        // with r' -> 1/c: Dx(r(u)) = u_x / c
        let mut t = SymbolTable::new();
        t.add_rule("r", &JetExpr::int(1).div(&JetExpr::sym("c", 0, Field::U)))
            .unwrap();
        let r = RatPoly::from_poly(DiffPoly::sym("r", 0, Field::U));
        let d = r.dx(&t).unwrap();
        let expect = RatPoly::new(DiffPoly::jet(Field::U, 1), vec![(c0(), 1)]);
        assert_eq!(d, expect);
    }

    #[test]
    fn euler_lagrange_kills_total_derivatives() {
        let t = SymbolTable::new();
        // d = Dx(u u_xx) has zero variational derivative
        let dens = RatPoly::from_poly(
            &DiffPoly::jet(Field::U, 0) * &DiffPoly::jet(Field::U, 2),
        )
        .dx(&t)
        .unwrap();
        let el = dens.euler_lagrange(Field::U, 4, &t).unwrap();
        assert!(el.is_zero());
    }
}
