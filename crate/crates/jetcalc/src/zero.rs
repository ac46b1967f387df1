//! Exact zero-testing.
//!
//! `DiffPoly` zero-testing is structural (sound and complete). For
//! expression trees the test first attempts an exact rational normal form;
//! only genuinely transcendental expressions (logarithms) fall back to
//! evaluation at deterministic pseudo-random rational points with exact
//! arithmetic. Logs of rationals are carried formally over a coprime basis,
//! so a "false" answer is always sound; "true" from the sampling path is
//! probabilistic (vanishing on all sampled points), with a fixed seed so runs
//! are reproducible.

use crate::expr::JetExpr;
use crate::poly::{rat, Rat};
use crate::ratpoly::RatPoly;
use crate::symbol::Gen;
use crate::JetError;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Exact value in the ring Q[log b_1, log b_2, ...] over a coprime basis of
/// positive integers; the empty monomial is the rational part.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactVal {
    terms: BTreeMap<Vec<(BigUint, u32)>, Rat>,
}

impl ExactVal {
    pub fn zero() -> Self {
        ExactVal { terms: BTreeMap::new() }
    }

    pub fn from_rat(r: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(Vec::new(), r);
        }
        ExactVal { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_rat(&self) -> Option<Rat> {
        if self.is_zero() {
            return Some(rat(0));
        }
        if self.terms.len() == 1 {
            if let Some(r) = self.terms.get(&Vec::new()) {
                return Some(r.clone());
            }
        }
        None
    }

    fn add_term(&mut self, key: Vec<(BigUint, u32)>, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &ExactVal) -> ExactVal {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &ExactVal) -> ExactVal {
        let mut out = ExactVal::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut key = ka.clone();
                for (b, p) in kb {
                    match key.iter_mut().find(|(bb, _)| bb == b) {
                        Some((_, q)) => *q += p,
                        None => key.push((b.clone(), *p)),
                    }
                }
                key.sort();
                out.add_term(key, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: i32) -> Result<ExactVal, JetError> {
        if n >= 0 {
            let mut out = ExactVal::from_rat(rat(1));
            for _ in 0..n {
                out = out.mul(self);
            }
            Ok(out)
        } else {
            let r = self
                .as_rat()
                .ok_or_else(|| JetError::Eval("negative power of a log-bearing value".into()))?;
            if r.is_zero() {
                return Err(JetError::Eval("pole: division by zero".into()));
            }
            Ok(ExactVal::from_rat(num_traits::pow::pow(
                r.recip(),
                n.unsigned_abs() as usize,
            )))
        }
    }

    /// Formal logarithm of a positive rational, expanded over a coprime
    /// basis of numerator and denominator.
    pub fn log(&self) -> Result<ExactVal, JetError> {
        let r = self
            .as_rat()
            .ok_or_else(|| JetError::Eval("log of a log-bearing value".into()))?;
        if !r.is_positive() {
            return Err(JetError::Eval(format!("log of non-positive value {r}")));
        }
        let num = r.numer().to_biguint().expect("positive");
        let den = r.denom().to_biguint().expect("positive");
        let basis = coprime_basis(&[num.clone(), den.clone()]);
        let mut out = ExactVal::zero();
        for b in &basis {
            if b.is_one() {
                continue;
            }
            let en = multiplicity(&num, b);
            let ed = multiplicity(&den, b);
            let e = BigInt::from(en) - BigInt::from(ed);
            if !e.is_zero() {
                out.add_term(vec![(b.clone(), 1)], Rat::from_integer(e));
            }
        }
        Ok(out)
    }
}

/// Largest k with b^k dividing n.
fn multiplicity(n: &BigUint, b: &BigUint) -> u64 {
    let mut n = n.clone();
    let mut k = 0;
    while (&n % b).is_zero() && !n.is_one() {
        n /= b;
        k += 1;
    }
    k
}

/// Factor refinement: a pairwise-coprime set whose power products generate
/// the inputs multiplicatively. Logs of distinct basis elements > 1 are
/// linearly independent over Q, which makes the formal-log arithmetic exact
/// without integer factorization.
pub fn coprime_basis(values: &[BigUint]) -> Vec<BigUint> {
    let mut basis: Vec<BigUint> = Vec::new();
    let mut queue: Vec<BigUint> = values
        .iter()
        .filter(|v| !v.is_zero() && !v.is_one())
        .cloned()
        .collect();
    'outer: while let Some(w) = queue.pop() {
        if w.is_one() {
            continue;
        }
        for i in 0..basis.len() {
            if w == basis[i] {
                continue 'outer;
            }
            let g = gcd(&w, &basis[i]);
            if g.is_one() {
                continue;
            }
            if g == basis[i] {
                // basis element divides w: strip it and requeue the cofactor
                queue.push(&w / &g);
                continue 'outer;
            }
            // proper common factor: split the basis element and requeue all parts
            let old = basis.swap_remove(i);
            queue.push(&old / &g);
            queue.push(g);
            queue.push(w);
            continue 'outer;
        }
        basis.push(w);
    }
    basis.sort();
    basis
}

fn gcd(a: &BigUint, b: &BigUint) -> BigUint {
    let mut a = a.clone();
    let mut b = b.clone();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// Deterministic rational point stream (splitmix64 core).
pub struct PointStream {
    state: u64,
}

impl PointStream {
    pub fn new(seed: u64) -> Self {
        PointStream { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Small nonzero rational in [-20, 20] x 1/[1, 12].
    pub fn next_rat(&mut self) -> Rat {
        loop {
            let v = self.next_u64();
            let n = (v % 41) as i64 - 20;
            if n == 0 {
                continue;
            }
            let d = ((v >> 32) % 12) as i64 + 1;
            return crate::poly::ratq(n, d);
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ZeroTestConfig {
    pub seed: u64,
    pub points: usize,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        // fixed project-wide sampling seed
        ZeroTestConfig { seed: 0x5eed_cafe_f00d_0001, points: 24 }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ZeroOutcome {
    /// exactly zero (structural) or zero at every sampled point
    Zero,
    /// a witness point evaluated to a nonzero value
    NonZero,
    /// every sampled point hit a pole or a log-domain error
    Inconclusive,
}

/// Zero-test an expression tree. Polynomial and rational expressions are
/// decided exactly; log-bearing expressions are sampled.
pub fn zero_test_expr(e: &JetExpr, cfg: ZeroTestConfig) -> ZeroOutcome {
    if !e.contains_log() {
        match RatPoly::from_expr(e) {
            Ok(rp) => {
                return if rp.is_zero() { ZeroOutcome::Zero } else { ZeroOutcome::NonZero };
            }
            Err(_) => {}
        }
    }
    let gens = e.generators();
    let mut stream = PointStream::new(cfg.seed);
    let mut successes = 0;
    let budget = cfg.points * 40;
    for _ in 0..budget {
        let assign: Vec<(Gen, Rat)> = gens
            .iter()
            .map(|g| (g.clone(), stream.next_rat()))
            .collect();
        let lookup = |g: &Gen| -> Option<Rat> {
            assign.iter().find(|(a, _)| a == g).map(|(_, r)| r.clone())
        };
        match e.eval_exact(&lookup) {
            Ok(v) => {
                if !v.is_zero() {
                    return ZeroOutcome::NonZero;
                }
                successes += 1;
                if successes >= cfg.points {
                    return ZeroOutcome::Zero;
                }
            }
            Err(_) => continue, // pole or log domain: skip the point
        }
    }
    ZeroOutcome::Inconclusive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Field;

    #[test]
    fn coprime_basis_splits_shared_content() {
        let b = coprime_basis(&[BigUint::from(12u32), BigUint::from(18u32)]);
        // 12 = 2^2*3, 18 = 2*3^2 -> a coprime basis {2, 3} (or refinements)
        for i in 0..b.len() {
            for j in 0..i {
                assert!(gcd(&b[i], &b[j]).is_one());
            }
        }
        // every input must be a product of basis powers
        for v in [12u32, 18u32] {
            let mut n = BigUint::from(v);
            for e in &b {
                while (&n % e).is_zero() && !n.is_one() {
                    n /= e;
                }
            }
            assert!(n.is_one(), "residual {n}");
        }
    }

    #[test]
    fn log_identity_exact() {
        // log(8/27) = 3 log 2 - 3 log 3
        let v = ExactVal::from_rat(crate::poly::ratq(8, 27)).log().unwrap();
        let l2 = ExactVal::from_rat(rat(2)).log().unwrap();
        let l3 = ExactVal::from_rat(rat(3)).log().unwrap();
        let expect = l2.mul(&ExactVal::from_rat(rat(3))).add(&l3.mul(&ExactVal::from_rat(rat(-3))));
        assert_eq!(v, expect);
    }

    #[test]
    fn sampling_detects_nonzero_log_expr() {
        // log(1 + t u_x) - t u_x is not identically zero
        let tux = JetExpr::time().mul(&JetExpr::jet(Field::U, 1));
        let e = JetExpr::int(1).add(&tux).log().sub(&tux);
        assert_eq!(zero_test_expr(&e, ZeroTestConfig::default()), ZeroOutcome::NonZero);
    }

    #[test]
    fn rational_zero_is_exact() {
        // u_x u - Dx(u^2/2) = 0 decided without sampling
        let u = JetExpr::jet(Field::U, 0);
        let ux = JetExpr::jet(Field::U, 1);
        let e = ux.mul(&u).sub(&u.mul(&ux));
        assert_eq!(zero_test_expr(&e, ZeroTestConfig::default()), ZeroOutcome::Zero);
    }
}
