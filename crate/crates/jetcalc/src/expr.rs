//! Expression trees over jet variables, function symbols, x, t, eps:
//! the lingua franca passed between modules. Quotients (negative integer
//! powers) and logarithms live here and never in [`crate::poly::DiffPoly`].

use crate::poly::{rat, DiffPoly, Monomial, Rat};
use crate::symbol::{Field, FuncSymbol, Gen, JetVar, SymName};
use crate::JetError;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Node {
    Rat(Rat),
    Var(Gen),
    Add(Vec<JetExpr>),
    Mul(Vec<JetExpr>),
    Pow(JetExpr, i32),
    Log(JetExpr),
}

/// Immutable, cheaply clonable expression tree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JetExpr(Arc<Node>);

impl JetExpr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn rational(r: Rat) -> Self {
        JetExpr(Arc::new(Node::Rat(r)))
    }

    pub fn int(n: i64) -> Self {
        JetExpr::rational(rat(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        JetExpr::rational(crate::poly::ratq(n, d))
    }

    pub fn var(g: Gen) -> Self {
        JetExpr(Arc::new(Node::Var(g)))
    }

    pub fn x() -> Self {
        JetExpr::var(Gen::X)
    }

    pub fn time() -> Self {
        JetExpr::var(Gen::T)
    }

    pub fn eps() -> Self {
        JetExpr::var(Gen::Eps)
    }

    pub fn constant(name: impl Into<SymName>) -> Self {
        JetExpr::var(Gen::Const(name.into()))
    }

    pub fn jet(field: Field, order: u8) -> Self {
        JetExpr::var(Gen::jet(field, order))
    }

    pub fn sym(name: impl Into<SymName>, order: u8, field: Field) -> Self {
        JetExpr::var(Gen::sym(name, order, field))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.node(), Node::Rat(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self.node(), Node::Rat(r) if r.is_one())
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        match self.node() {
            Node::Rat(r) => Some(r),
            _ => None,
        }
    }

    pub fn sum(terms: Vec<JetExpr>) -> Self {
        let mut flat: Vec<JetExpr> = Vec::with_capacity(terms.len());
        let mut acc = rat(0);
        for tm in terms {
            match tm.node() {
                Node::Rat(r) => acc += r,
                Node::Add(inner) => {
                    for sub in inner {
                        match sub.node() {
                            Node::Rat(r) => acc += r,
                            _ => flat.push(sub.clone()),
                        }
                    }
                }
                _ => flat.push(tm),
            }
        }
        if !acc.is_zero() {
            flat.push(JetExpr::rational(acc));
        }
        match flat.len() {
            0 => JetExpr::int(0),
            1 => flat.pop().unwrap(),
            _ => JetExpr(Arc::new(Node::Add(flat))),
        }
    }

    pub fn product(factors: Vec<JetExpr>) -> Self {
        let mut flat: Vec<JetExpr> = Vec::with_capacity(factors.len());
        let mut acc = rat(1);
        for fc in factors {
            match fc.node() {
                Node::Rat(r) => {
                    if r.is_zero() {
                        return JetExpr::int(0);
                    }
                    acc *= r;
                }
                Node::Mul(inner) => {
                    for sub in inner {
                        match sub.node() {
                            Node::Rat(r) => {
                                if r.is_zero() {
                                    return JetExpr::int(0);
                                }
                                acc *= r;
                            }
                            _ => flat.push(sub.clone()),
                        }
                    }
                }
                _ => flat.push(fc),
            }
        }
        if flat.is_empty() {
            return JetExpr::rational(acc);
        }
        if !acc.is_one() {
            flat.insert(0, JetExpr::rational(acc));
        }
        match flat.len() {
            1 => flat.pop().unwrap(),
            _ => JetExpr(Arc::new(Node::Mul(flat))),
        }
    }

    pub fn add(&self, other: &JetExpr) -> JetExpr {
        JetExpr::sum(vec![self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &JetExpr) -> JetExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> JetExpr {
        JetExpr::product(vec![JetExpr::int(-1), self.clone()])
    }

    pub fn mul(&self, other: &JetExpr) -> JetExpr {
        JetExpr::product(vec![self.clone(), other.clone()])
    }

    pub fn pow(&self, n: i32) -> JetExpr {
        match n {
            0 => JetExpr::int(1),
            1 => self.clone(),
            _ => match self.node() {
                Node::Rat(r) => {
                    if n > 0 {
                        JetExpr::rational(num_traits::pow::pow(r.clone(), n as usize))
                    } else if r.is_zero() {
                        panic!("zero to a negative power")
                    } else {
                        JetExpr::rational(num_traits::pow::pow(r.recip(), (-n) as usize))
                    }
                }
                Node::Pow(base, m) => base.pow(n.checked_mul(*m).expect("power overflow")),
                _ => JetExpr(Arc::new(Node::Pow(self.clone(), n))),
            },
        }
    }

    pub fn div(&self, other: &JetExpr) -> JetExpr {
        self.mul(&other.pow(-1))
    }

    pub fn log(&self) -> JetExpr {
        if self.is_one() {
            return JetExpr::int(0);
        }
        JetExpr(Arc::new(Node::Log(self.clone())))
    }

    /// Largest jet order of `field` appearing anywhere.
    pub fn max_jet(&self, field: Field) -> u8 {
        match self.node() {
            Node::Rat(_) => 0,
            Node::Var(Gen::Jet(v)) if v.field == field => v.order,
            Node::Var(_) => 0,
            Node::Add(ts) | Node::Mul(ts) => ts.iter().map(|e| e.max_jet(field)).max().unwrap_or(0),
            Node::Pow(b, _) => b.max_jet(field),
            Node::Log(b) => b.max_jet(field),
        }
    }

    pub fn depends_on(&self, g: &Gen) -> bool {
        match self.node() {
            Node::Rat(_) => false,
            Node::Var(v) => v == g,
            Node::Add(ts) | Node::Mul(ts) => ts.iter().any(|e| e.depends_on(g)),
            Node::Pow(b, _) => b.depends_on(g),
            Node::Log(b) => b.depends_on(g),
        }
    }

    pub fn contains_log(&self) -> bool {
        match self.node() {
            Node::Log(_) => true,
            Node::Rat(_) | Node::Var(_) => false,
            Node::Add(ts) | Node::Mul(ts) => ts.iter().any(|e| e.contains_log()),
            Node::Pow(b, _) => b.contains_log(),
        }
    }

    /// Collect every distinct generator.
    pub fn generators(&self) -> Vec<Gen> {
        fn walk(e: &JetExpr, out: &mut Vec<Gen>) {
            match e.node() {
                Node::Rat(_) => {}
                Node::Var(g) => {
                    if !out.contains(g) {
                        out.push(g.clone());
                    }
                }
                Node::Add(ts) | Node::Mul(ts) => ts.iter().for_each(|t| walk(t, out)),
                Node::Pow(b, _) | Node::Log(b) => walk(b, out),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out
    }

    /// Substitute generators by expressions (simultaneous).
    pub fn substitute(&self, map: &[(Gen, JetExpr)]) -> JetExpr {
        match self.node() {
            Node::Rat(_) => self.clone(),
            Node::Var(g) => map
                .iter()
                .find(|(mg, _)| mg == g)
                .map(|(_, e)| e.clone())
                .unwrap_or_else(|| self.clone()),
            Node::Add(ts) => JetExpr::sum(ts.iter().map(|e| e.substitute(map)).collect()),
            Node::Mul(ts) => JetExpr::product(ts.iter().map(|e| e.substitute(map)).collect()),
            Node::Pow(b, n) => b.substitute(map).pow(*n),
            Node::Log(b) => b.substitute(map).log(),
        }
    }

    /// Re-target every jet and symbol of `from` onto `to`.
    pub fn refield(&self, from: Field, to: Field) -> JetExpr {
        match self.node() {
            Node::Rat(_) => self.clone(),
            Node::Var(Gen::Jet(v)) if v.field == from => JetExpr::jet(to, v.order),
            Node::Var(Gen::Sym(f, fld)) if *fld == from => {
                JetExpr(Arc::new(Node::Var(Gen::Sym(f.clone(), to))))
            }
            Node::Var(_) => self.clone(),
            Node::Add(ts) => JetExpr::sum(ts.iter().map(|e| e.refield(from, to)).collect()),
            Node::Mul(ts) => JetExpr::product(ts.iter().map(|e| e.refield(from, to)).collect()),
            Node::Pow(b, n) => b.refield(from, to).pow(*n),
            Node::Log(b) => b.refield(from, to).log(),
        }
    }

    /// Convert to a differential polynomial; fails loudly on quotients, logs
    /// and non-rational content.
    pub fn to_poly(&self) -> Result<DiffPoly, JetError> {
        match self.node() {
            Node::Rat(r) => Ok(DiffPoly::constant(r.clone())),
            Node::Var(g) => Ok(DiffPoly::var(g.clone())),
            Node::Add(ts) => {
                let mut out = DiffPoly::zero();
                for tm in ts {
                    out = &out + &tm.to_poly()?;
                }
                Ok(out)
            }
            Node::Mul(ts) => {
                let mut out = DiffPoly::one();
                for fc in ts {
                    out = &out * &fc.to_poly()?;
                }
                Ok(out)
            }
            Node::Pow(b, n) => {
                if *n < 0 {
                    Err(JetError::NonPolynomial("negative power".into()))
                } else {
                    Ok(b.to_poly()?.pow(*n as u32))
                }
            }
            Node::Log(_) => Err(JetError::NonPolynomial("logarithm".into())),
        }
    }

    /// Expand as a polynomial in eps up to `max` (inclusive); coefficient k of
    /// the result is the eps^k coefficient. Errors when eps sits under a log
    /// or a negative power with nonconstant leading part.
    pub fn eps_series(&self, max: u32) -> Result<Vec<JetExpr>, JetError> {
        let m = max as usize;
        let zero = || vec![JetExpr::int(0); m + 1];
        match self.node() {
            Node::Rat(_) | Node::Var(Gen::Const(_)) => {
                let mut v = zero();
                v[0] = self.clone();
                Ok(v)
            }
            Node::Var(Gen::Eps) => {
                let mut v = zero();
                if m >= 1 {
                    v[1] = JetExpr::int(1);
                }
                Ok(v)
            }
            Node::Var(_) => {
                let mut v = zero();
                v[0] = self.clone();
                Ok(v)
            }
            Node::Add(ts) => {
                let mut acc = zero();
                for tm in ts {
                    let sv = tm.eps_series(max)?;
                    for (k, val) in sv.into_iter().enumerate() {
                        acc[k] = acc[k].add(&val);
                    }
                }
                Ok(acc)
            }
            Node::Mul(ts) => {
                let mut acc = zero();
                acc[0] = JetExpr::int(1);
                for fc in ts {
                    let sv = fc.eps_series(max)?;
                    let mut next = zero();
                    for (i, a) in acc.iter().enumerate() {
                        if a.is_zero() {
                            continue;
                        }
                        for (j, b) in sv.iter().enumerate() {
                            if i + j > m || b.is_zero() {
                                continue;
                            }
                            next[i + j] = next[i + j].add(&a.mul(b));
                        }
                    }
                    acc = next;
                }
                Ok(acc)
            }
            Node::Pow(b, n) => {
                if !b.depends_on(&Gen::Eps) {
                    let mut v = zero();
                    v[0] = self.clone();
                    return Ok(v);
                }
                if *n >= 0 {
                    let sv = b.eps_series(max)?;
                    let mut acc = zero();
                    acc[0] = JetExpr::int(1);
                    for _ in 0..*n {
                        let mut next = zero();
                        for (i, a) in acc.iter().enumerate() {
                            if a.is_zero() {
                                continue;
                            }
                            for (j, c) in sv.iter().enumerate() {
                                if i + j > m || c.is_zero() {
                                    continue;
                                }
                                next[i + j] = next[i + j].add(&a.mul(c));
                            }
                        }
                        acc = next;
                    }
                    Ok(acc)
                } else {
                    Err(JetError::NonPolynomial(
                        "eps under a negative power".into(),
                    ))
                }
            }
            Node::Log(b) => {
                if b.depends_on(&Gen::Eps) {
                    Err(JetError::NonPolynomial("eps under a logarithm".into()))
                } else {
                    let mut v = zero();
                    v[0] = self.clone();
                    Ok(v)
                }
            }
        }
    }

    /// Drop every term of eps-degree above `order`; idempotent.
    pub fn eps_truncate(&self, order: u32) -> Result<JetExpr, JetError> {
        let series = self.eps_series(order)?;
        let mut terms = Vec::new();
        for (k, coeff) in series.into_iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            terms.push(if k == 0 {
                coeff
            } else {
                coeff.mul(&JetExpr::eps().pow(k as i32))
            });
        }
        Ok(JetExpr::sum(terms))
    }
}

impl From<DiffPoly> for JetExpr {
    fn from(p: DiffPoly) -> Self {
        poly_to_expr(&p)
    }
}

pub fn poly_to_expr(p: &DiffPoly) -> JetExpr {
    let mut terms = Vec::with_capacity(p.num_terms());
    for (m, c) in p.iter() {
        terms.push(monomial_to_expr(m, c));
    }
    JetExpr::sum(terms)
}

pub fn monomial_to_expr(m: &Monomial, c: &Rat) -> JetExpr {
    let mut factors = vec![JetExpr::rational(c.clone())];
    for (g, pw) in m.factors() {
        factors.push(JetExpr::var(g.clone()).pow(*pw as i32));
    }
    JetExpr::product(factors)
}

// ---- deterministic display ------------------------------------------------

fn needs_parens_in_product(e: &JetExpr) -> bool {
    matches!(e.node(), Node::Add(_)) || matches!(e.node(), Node::Rat(r) if r.is_negative())
}

impl fmt::Display for JetExpr {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Rat(r) => write!(fm, "{r}"),
            Node::Var(g) => write!(fm, "{g}"),
            Node::Add(ts) => {
                for (i, tm) in ts.iter().enumerate() {
                    if i == 0 {
                        write!(fm, "{tm}")?;
                    } else {
                        // render leading rational sign of the term
                        let (neg, mag) = split_sign(tm);
                        if neg {
                            write!(fm, " - {mag}")?;
                        } else {
                            write!(fm, " + {mag}")?;
                        }
                    }
                }
                Ok(())
            }
            Node::Mul(ts) => {
                let mut first = true;
                for fc in ts {
                    if !first {
                        fm.write_str(" ")?;
                    }
                    first = false;
                    if fc.is_one() {
                        continue;
                    }
                    if needs_parens_in_product(fc) {
                        write!(fm, "({fc})")?;
                    } else {
                        write!(fm, "{fc}")?;
                    }
                }
                Ok(())
            }
            Node::Pow(b, n) => {
                let inner = match b.node() {
                    Node::Var(_) => format!("{b}"),
                    _ => format!("({b})"),
                };
                if *n < 0 {
                    write!(fm, "1/{inner}^{}", -n)
                } else {
                    write!(fm, "{inner}^{n}")
                }
            }
            Node::Log(b) => write!(fm, "log({b})"),
        }
    }
}

/// Split a leading rational sign off a term for pretty sums.
fn split_sign(e: &JetExpr) -> (bool, JetExpr) {
    match e.node() {
        Node::Rat(r) if r.is_negative() => (true, JetExpr::rational(-r.clone())),
        Node::Mul(ts) => {
            if let Some(Node::Rat(r)) = ts.first().map(|f| f.node()) {
                if r.is_negative() {
                    let mut rest = ts.clone();
                    let mag = -r.clone();
                    if mag.is_one() && rest.len() > 1 {
                        rest.remove(0);
                    } else {
                        rest[0] = JetExpr::rational(mag);
                    }
                    return (true, JetExpr::product(rest));
                }
            }
            (false, e.clone())
        }
        _ => (false, e.clone()),
    }
}

/// Convenience: rational f64-free power helper used by numeric code.
pub fn ipow(base: f64, n: i32) -> f64 {
    if n >= 0 {
        base.powi(n)
    } else {
        1.0 / base.powi(-n)
    }
}

impl JetExpr {
    /// Evaluate with exact rational inputs; logs of rationals are carried
    /// formally (see [`crate::zero`]).
    pub fn eval_exact(
        &self,
        assign: &dyn Fn(&Gen) -> Option<Rat>,
    ) -> Result<crate::zero::ExactVal, JetError> {
        use crate::zero::ExactVal;
        match self.node() {
            Node::Rat(r) => Ok(ExactVal::from_rat(r.clone())),
            Node::Var(g) => assign(g)
                .map(ExactVal::from_rat)
                .ok_or_else(|| JetError::Eval(format!("unassigned generator {g}"))),
            Node::Add(ts) => {
                let mut acc = ExactVal::zero();
                for tm in ts {
                    acc = acc.add(&tm.eval_exact(assign)?);
                }
                Ok(acc)
            }
            Node::Mul(ts) => {
                let mut acc = ExactVal::from_rat(rat(1));
                for fc in ts {
                    acc = acc.mul(&fc.eval_exact(assign)?);
                }
                Ok(acc)
            }
            Node::Pow(b, n) => b.eval_exact(assign)?.pow(*n),
            Node::Log(b) => b.eval_exact(assign)?.log(),
        }
    }

    /// Plain f64 evaluation over fully assigned generators.
    pub fn eval_f64(&self, assign: &dyn Fn(&Gen) -> Option<f64>) -> Result<f64, JetError> {
        match self.node() {
            Node::Rat(r) => Ok(r.to_f64().ok_or_else(|| JetError::Eval("rational overflow".into()))?),
            Node::Var(g) => {
                assign(g).ok_or_else(|| JetError::Eval(format!("unassigned generator {g}")))
            }
            Node::Add(ts) => {
                let mut acc = 0.0;
                for tm in ts {
                    acc += tm.eval_f64(assign)?;
                }
                Ok(acc)
            }
            Node::Mul(ts) => {
                let mut acc = 1.0;
                for fc in ts {
                    acc *= fc.eval_f64(assign)?;
                }
                Ok(acc)
            }
            Node::Pow(b, n) => Ok(ipow(b.eval_f64(assign)?, *n)),
            Node::Log(b) => {
                let v = b.eval_f64(assign)?;
                if v <= 0.0 {
                    return Err(JetError::Eval(format!("log of non-positive value {v}")));
                }
                Ok(v.ln())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_simplify() {
        let z = JetExpr::int(2).add(&JetExpr::int(-2));
        assert!(z.is_zero());
        let p = JetExpr::jet(Field::U, 1).mul(&JetExpr::int(0));
        assert!(p.is_zero());
        assert_eq!(JetExpr::jet(Field::U, 0).pow(1), JetExpr::jet(Field::U, 0));
    }

    #[test]
    fn eps_truncate_binomial() {
        // (1 + eps^2)^2 -> 1 + 2 eps^2 at order 2
        let b = JetExpr::int(1).add(&JetExpr::eps().pow(2));
        let sq = b.pow(2);
        let tr = sq.eps_truncate(2).unwrap();
        let expect = JetExpr::int(1).add(&JetExpr::int(2).mul(&JetExpr::eps().pow(2)));
        assert_eq!(tr.to_poly().unwrap(), expect.to_poly().unwrap());
    }

    #[test]
    fn to_poly_rejects_log() {
        let e = JetExpr::jet(Field::U, 1).log();
        assert!(e.to_poly().is_err());
    }
}
