//! Canonical eps-graded differential polynomials with exact rational
//! coefficients.
//!
//! A [`DiffPoly`] is a map from monomials to nonzero `BigRational`
//! coefficients. Monomials are ordered graded-lex on
//! (eps-degree, total jet degree, generator exponents), so canonical forms
//! are reproducible across runs and equality is structural.

use crate::symbol::{Field, FuncSymbol, Gen, JetVar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratq(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Product of generator powers. Factors are sorted by `Gen` and powers are
/// strictly positive.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial {
    factors: Vec<(Gen, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(g: Gen) -> Self {
        Monomial { factors: vec![(g, 1)] }
    }

    pub fn from_powers(mut factors: Vec<(Gen, u32)>) -> Self {
        factors.retain(|(_, p)| *p > 0);
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Gen, u32)> = Vec::with_capacity(factors.len());
        for (g, p) in factors {
            match merged.last_mut() {
                Some((lg, lp)) if *lg == g => *lp += p,
                _ => merged.push((g, p)),
            }
        }
        Monomial { factors: merged }
    }

    pub fn factors(&self) -> &[(Gen, u32)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn power_of(&self, g: &Gen) -> u32 {
        self.factors
            .iter()
            .find(|(fg, _)| fg == g)
            .map(|(_, p)| *p)
            .unwrap_or(0)
    }

    pub fn eps_degree(&self) -> u32 {
        self.power_of(&Gen::Eps)
    }

    pub fn jet_degree(&self) -> u32 {
        self.factors
            .iter()
            .map(|(g, p)| g.jet_degree() * p)
            .sum()
    }

    /// Highest jet order present for `field` (0 when none).
    pub fn max_jet(&self, field: Field) -> u8 {
        self.factors
            .iter()
            .filter_map(|(g, _)| match g {
                Gen::Jet(v) if v.field == field => Some(v.order),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            match self.factors[i].0.cmp(&other.factors[j].0) {
                Ordering::Less => {
                    out.push(self.factors[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.factors[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.factors[i].0.clone(), self.factors[i].1 + other.factors[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.factors[i..]);
        out.extend_from_slice(&other.factors[j..]);
        Monomial { factors: out }
    }

    /// Divide by `other` if every generator power allows it.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.factors.len());
        let mut j = 0;
        for (g, p) in &self.factors {
            let mut rem = *p;
            while j < other.factors.len() && other.factors[j].0 < *g {
                return None; // other has a generator we lack
            }
            if j < other.factors.len() && other.factors[j].0 == *g {
                if other.factors[j].1 > *p {
                    return None;
                }
                rem = p - other.factors[j].1;
                j += 1;
            }
            if rem > 0 {
                out.push((g.clone(), rem));
            }
        }
        if j < other.factors.len() {
            return None;
        }
        Some(Monomial { factors: out })
    }

    /// Remove one power of `g`, returning the multiplicity removed from.
    fn lower(&self, idx: usize) -> Monomial {
        let mut factors = self.factors.clone();
        if factors[idx].1 == 1 {
            factors.remove(idx);
        } else {
            factors[idx].1 -= 1;
        }
        Monomial { factors }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.eps_degree()
            .cmp(&other.eps_degree())
            .then_with(|| self.jet_degree().cmp(&other.jet_degree()))
            .then_with(|| {
                // lexicographic on exponent vectors; the earlier generator
                // with the larger exponent wins
                let (mut i, mut j) = (0, 0);
                loop {
                    match (self.factors.get(i), other.factors.get(j)) {
                        (None, None) => return Ordering::Equal,
                        (Some(_), None) => return Ordering::Greater,
                        (None, Some(_)) => return Ordering::Less,
                        (Some((ga, pa)), Some((gb, pb))) => match ga.cmp(gb) {
                            Ordering::Less => return Ordering::Greater,
                            Ordering::Greater => return Ordering::Less,
                            Ordering::Equal => {
                                match pa.cmp(pb) {
                                    Ordering::Equal => {}
                                    ord => return ord,
                                }
                                i += 1;
                                j += 1;
                            }
                        },
                    }
                }
            })
    }
}

/// Canonical differential polynomial: no duplicate monomials, no zero
/// coefficients; zero-test is `is_zero`, equality is `==`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Monomial, Rat>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly::default()
    }

    pub fn one() -> Self {
        DiffPoly::constant(rat(1))
    }

    pub fn constant(r: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(Monomial::one(), r);
        }
        DiffPoly { terms }
    }

    pub fn var(g: Gen) -> Self {
        DiffPoly::term(Monomial::var(g), rat(1))
    }

    pub fn jet(field: Field, order: u8) -> Self {
        DiffPoly::var(Gen::jet(field, order))
    }

    pub fn sym(name: impl Into<crate::symbol::SymName>, order: u8, field: Field) -> Self {
        DiffPoly::var(Gen::sym(name, order, field))
    }

    pub fn term(m: Monomial, coeff: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(m, coeff);
        }
        DiffPoly { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rat)>) -> Self {
        let mut out = DiffPoly::zero();
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| m.is_one())
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_zero() {
            return Some(rat(0));
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &Rat) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly {
            terms: self.terms.iter().map(|(m, r)| (m.clone(), r * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rat) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly {
            terms: self
                .terms
                .iter()
                .map(|(k, r)| (k.mul(m), r * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> DiffPoly {
        let mut out = DiffPoly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                out = &out * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        out
    }

    /// Leading (largest) term in the canonical order.
    pub fn leading(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    /// Exact multivariate division; `None` when not divisible.
    pub fn div_exact(&self, divisor: &DiffPoly) -> Option<DiffPoly> {
        let (dlm, dlc) = divisor.leading()?;
        if divisor.num_terms() == 1 {
            // monomial divisor: divide every term
            let mut out = DiffPoly::zero();
            for (m, c) in &self.terms {
                out.add_term(m.div(dlm)?, c / dlc);
            }
            return Some(out);
        }
        let mut rem = self.clone();
        let mut quot = DiffPoly::zero();
        while let Some((rlm, rlc)) = rem.leading() {
            let qm = rlm.div(dlm)?;
            let qc = rlc / dlc;
            rem = &rem - &divisor.mul_monomial(&qm, &qc);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// eps-degree bounds over all monomials.
    pub fn eps_degree_max(&self) -> u32 {
        self.terms.keys().map(|m| m.eps_degree()).max().unwrap_or(0)
    }

    /// Drop all terms of eps-degree above `order`.
    pub fn eps_truncate(&self, order: u32) -> DiffPoly {
        DiffPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.eps_degree() <= order)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Coefficient of eps^k (with the eps factor removed).
    pub fn eps_coefficient(&self, k: u32) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            if m.eps_degree() == k {
                let factors = m
                    .factors()
                    .iter()
                    .filter(|(g, _)| *g != Gen::Eps)
                    .cloned()
                    .collect();
                out.add_term(Monomial::from_powers(factors), c.clone());
            }
        }
        out
    }

    pub fn max_jet(&self, field: Field) -> u8 {
        self.terms.keys().map(|m| m.max_jet(field)).max().unwrap_or(0)
    }

    pub fn depends_on(&self, g: &Gen) -> bool {
        self.terms.keys().any(|m| m.power_of(g) > 0)
    }

    /// All distinct generators appearing.
    pub fn generators(&self) -> Vec<Gen> {
        let mut out: Vec<Gen> = Vec::new();
        for m in self.terms.keys() {
            for (g, _) in m.factors() {
                if !out.contains(g) {
                    out.push(g.clone());
                }
            }
        }
        out.sort();
        out
    }

    /// Partial derivative with respect to a single generator, treating all
    /// generators as independent coordinates.
    pub fn partial(&self, g: &Gen) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for (idx, (fg, p)) in m.factors().iter().enumerate() {
                if fg == g {
                    out.add_term(m.lower(idx), c * rat(*p as i64));
                }
            }
        }
        out
    }

    /// Plain total x-derivative: raises jets, chain-rules every function
    /// symbol as Sym(F,k) -> Sym(F,k+1) * (d/dx of its field's 0-jet), and
    /// differentiates explicit x. Rewrite-bearing symbols must be handled by
    /// the caller (see `RatPoly::dx`).
    pub fn dx_plain(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for (idx, (g, p)) in m.factors().iter().enumerate() {
                let lowered = m.lower(idx);
                let cc = c * rat(*p as i64);
                match g {
                    Gen::X => out.add_term(lowered, cc),
                    Gen::T | Gen::Eps | Gen::Const(_) => {}
                    Gen::Jet(v) => {
                        out.add_term(lowered.mul(&Monomial::var(Gen::Jet(v.raised()))), cc)
                    }
                    Gen::Sym(f, field) => {
                        let m2 = lowered
                            .mul(&Monomial::var(Gen::Sym(f.raised(), *field)))
                            .mul(&Monomial::var(Gen::jet(*field, 1)));
                        out.add_term(m2, cc);
                    }
                }
            }
        }
        out
    }

    /// Substitute each listed generator by a polynomial (simultaneously).
    pub fn substitute(&self, map: &[(Gen, DiffPoly)]) -> DiffPoly {
        let mut out = DiffPoly::zero();
        'terms: for (m, c) in &self.terms {
            let mut acc = DiffPoly::constant(c.clone());
            let mut plain: Vec<(Gen, u32)> = Vec::new();
            for (g, p) in m.factors() {
                if let Some((_, rep)) = map.iter().find(|(mg, _)| mg == g) {
                    if rep.is_zero() {
                        continue 'terms;
                    }
                    acc = &acc * &rep.pow(*p);
                } else {
                    plain.push((g.clone(), *p));
                }
            }
            let mfixed = Monomial::from_powers(plain);
            for (mm, cc) in acc.terms {
                out.add_term(mm.mul(&mfixed), cc);
            }
        }
        out
    }
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        self.scale(&rat(-1))
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return fm.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    fm.write_str("-")?;
                }
                first = false;
            } else if neg {
                fm.write_str(" - ")?;
            } else {
                fm.write_str(" + ")?;
            }
            let coeff_is_one = mag.is_one();
            if !coeff_is_one || m.is_one() {
                write!(fm, "{mag}")?;
                if !m.is_one() {
                    fm.write_str(" ")?;
                }
            }
            let mut firstf = true;
            for (g, p) in m.factors() {
                if !firstf {
                    fm.write_str(" ")?;
                }
                firstf = false;
                if *p == 1 {
                    write!(fm, "{g}")?;
                } else {
                    write!(fm, "{g}^{p}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ux() -> DiffPoly {
        DiffPoly::jet(Field::U, 1)
    }

    #[test]
    fn canonical_add_cancels() {
        let p = &ux() - &ux();
        assert!(p.is_zero());
    }

    #[test]
    fn dx_product_rule() {
        // Dx(x * u_x) = u_x + x u_xx
        let p = &DiffPoly::var(Gen::X) * &ux();
        let expect = &ux() + &(&DiffPoly::var(Gen::X) * &DiffPoly::jet(Field::U, 2));
        assert_eq!(p.dx_plain(), expect);
    }

    #[test]
    fn dx_chains_symbols() {
        // Dx(h''(u)) = h'''(u) u_x
        let p = DiffPoly::sym("h", 2, Field::U);
        let expect = &DiffPoly::sym("h", 3, Field::U) * &ux();
        assert_eq!(p.dx_plain(), expect);
    }

    #[test]
    fn div_exact_roundtrip() {
        let a = &(&ux() + &DiffPoly::one()) * &(&DiffPoly::jet(Field::U, 2) - &DiffPoly::constant(ratq(1, 3)));
        let b = &ux() + &DiffPoly::one();
        let q = a.div_exact(&b).expect("divisible");
        assert_eq!(&q * &b, a);
        assert!(a.div_exact(&(&b + &DiffPoly::one())).is_none());
    }

    #[test]
    fn eps_grading() {
        let e = DiffPoly::var(Gen::Eps);
        let p = &(&e * &e) * &ux();
        assert_eq!(p.eps_degree_max(), 2);
        assert_eq!(p.eps_truncate(1), DiffPoly::zero());
        assert_eq!(p.eps_coefficient(2), ux());
    }
}
