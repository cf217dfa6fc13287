//! Rational functions of the independent variables with a factored
//! denominator.
//!
//! Denominators in this crate arise as products of a few recurring
//! polynomials: tau-function cells and differences of independent variables.
//! Keeping the denominator as a multiset of normalized factors, instead of one
//! expanded polynomial, makes the common cancellations exact and cheap: adding
//! two fractions takes the multiset least common multiple, and every ring
//! operation finishes with a pass that divides the numerator by whichever
//! factors still divide it exactly.
//!
//! Normalization per factor: constants and unit monomials are absorbed into
//! the numerator, and the remaining polynomial is scaled so its leading
//! coefficient (in the canonical term order) is one. Two fractions built along
//! different routes therefore expose identical denominators whenever their
//! factors match as polynomials, and equality is decided by an exact
//! subtraction.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

use super::laurent::{LaurentPoly, Rat};
use super::scalar::Scalar;

/// A quotient of Laurent polynomials with the denominator kept in factored
/// form. Not automatically reduced to lowest terms, but every factor that
/// divides the numerator exactly is cancelled after each operation, and the
/// zero function is always recognized exactly.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    num: LaurentPoly,
    /// Sorted, deduplicated `(factor, multiplicity)` pairs; each factor is
    /// non-constant, free of monomial content, and has leading coefficient 1.
    den: Vec<(LaurentPoly, u32)>,
}

fn rat_pow_u(c: &Rat, e: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e {
        acc *= c;
    }
    acc
}

impl RationalFunction {
    pub fn zero() -> Self {
        RationalFunction {
            num: LaurentPoly::zero(),
            den: Vec::new(),
        }
    }

    pub fn one() -> Self {
        RationalFunction {
            num: LaurentPoly::one(),
            den: Vec::new(),
        }
    }

    pub fn constant(c: Rat) -> Self {
        RationalFunction {
            num: LaurentPoly::constant(c),
            den: Vec::new(),
        }
    }

    pub fn var(v: usize) -> Self {
        RationalFunction {
            num: LaurentPoly::var(v),
            den: Vec::new(),
        }
    }

    pub fn from_poly(num: LaurentPoly) -> Self {
        RationalFunction {
            num,
            den: Vec::new(),
        }
    }

    /// Builds `num / den`, rejecting a zero denominator.
    pub fn from_ratio(num: LaurentPoly, den: LaurentPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero(
                "rational function with zero denominator".into(),
            ));
        }
        Ok(Self::normalized(num, vec![(den, 1)]))
    }

    /// Core constructor: absorbs unit factors, deduplicates, and cancels.
    fn normalized(num: LaurentPoly, raw_den: Vec<(LaurentPoly, u32)>) -> Self {
        let mut num = num;
        if num.is_zero() {
            return Self::zero();
        }
        let mut factors: BTreeMap<LaurentPoly, u32> = BTreeMap::new();
        for (f, e) in raw_den {
            if e == 0 {
                continue;
            }
            debug_assert!(!f.is_zero(), "zero denominator factor");
            if let Some(f) = absorb_units(&mut num, f, e) {
                *factors.entry(f).or_insert(0) += e;
            }
        }
        // Cancel factors that divide the numerator exactly.
        let mut den: Vec<(LaurentPoly, u32)> = Vec::with_capacity(factors.len());
        for (f, mut e) in factors {
            while e > 0 {
                match num.exact_div(&f) {
                    Some(q) if !num.is_zero() => {
                        num = q;
                        e -= 1;
                    }
                    _ => break,
                }
            }
            if e > 0 {
                den.push((f, e));
            }
        }
        RationalFunction { num, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `Some(c)` when the function is the constant `c`.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// `Some(&num)` when the denominator is trivial.
    pub fn as_poly(&self) -> Option<&LaurentPoly> {
        if self.den.is_empty() {
            Some(&self.num)
        } else {
            None
        }
    }

    pub fn num(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn den_factors(&self) -> &[(LaurentPoly, u32)] {
        &self.den
    }

    /// The denominator expanded to a single polynomial.
    pub fn den_expanded(&self) -> LaurentPoly {
        let mut acc = LaurentPoly::one();
        for (f, e) in &self.den {
            acc = &acc * &f.pow(*e);
        }
        acc
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RationalFunction {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Divides by a function already known to be nonzero; use
    /// [`Scalar::try_div`] when the divisor may vanish.
    pub fn div_nonzero(&self, rhs: &Self) -> Self {
        debug_assert!(!rhs.is_zero(), "division by the zero function");
        if self.is_zero() {
            return Self::zero();
        }
        let mut den = self.den.clone();
        den.push((rhs.num.clone(), 1));
        Self::normalized(&self.num * &rhs.den_expanded(), den)
    }

    fn add_signed(&self, rhs: &Self, negate: bool) -> Self {
        // Multiset least common multiple of the two denominators.
        let mut lcm: BTreeMap<&LaurentPoly, u32> = BTreeMap::new();
        for (f, e) in &self.den {
            lcm.insert(f, *e);
        }
        for (f, e) in &rhs.den {
            let slot = lcm.entry(f).or_insert(0);
            *slot = (*slot).max(*e);
        }
        let complement = |own: &[(LaurentPoly, u32)]| -> LaurentPoly {
            let mut acc = LaurentPoly::one();
            for (&f, &e) in &lcm {
                let have = own
                    .iter()
                    .find(|(g, _)| g == f)
                    .map(|(_, e)| *e)
                    .unwrap_or(0);
                if e > have {
                    acc = &acc * &f.pow(e - have);
                }
            }
            acc
        };
        let left = &self.num * &complement(&self.den);
        let right = &rhs.num * &complement(&rhs.den);
        let num = if negate { &left - &right } else { &left + &right };
        let den = lcm.into_iter().map(|(f, e)| (f.clone(), e)).collect();
        Self::normalized(num, den)
    }

    fn mul_impl(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut den = self.den.clone();
        den.extend(rhs.den.iter().cloned());
        Self::normalized(&self.num * &rhs.num, den)
    }

    /// Partial derivative with respect to variable `v` (quotient rule applied
    /// factor-by-factor, each multiplicity rising by one).
    pub fn derivative(&self, v: usize) -> Self {
        if self.den.is_empty() {
            return Self::from_poly(self.num.derivative(v));
        }
        let mut den_product = LaurentPoly::one();
        for (f, _) in &self.den {
            den_product = &den_product * f;
        }
        // sum over j of e_j * f_j' * prod_{k != j} f_k
        let mut log_term = LaurentPoly::zero();
        for (j, (fj, ej)) in self.den.iter().enumerate() {
            let dfj = fj.derivative(v);
            if dfj.is_zero() {
                continue;
            }
            let mut others = LaurentPoly::one();
            for (k, (fk, _)) in self.den.iter().enumerate() {
                if k != j {
                    others = &others * fk;
                }
            }
            let e = Rat::from_integer(BigInt::from(*ej));
            log_term = &log_term + &(&dfj * &others).scale(&e);
        }
        let num = &(&self.num.derivative(v) * &den_product) - &(&self.num * &log_term);
        let den = self
            .den
            .iter()
            .map(|(f, e)| (f.clone(), e + 1))
            .collect();
        Self::normalized(num, den)
    }

    /// Substitutes an exact constant for variable `v`; fails if a denominator
    /// factor vanishes there.
    pub fn substitute_var(&self, v: usize, c: &Rat) -> Result<Self> {
        let num = self.num.substitute_var(v, c)?;
        let mut den = Vec::with_capacity(self.den.len());
        for (f, e) in &self.den {
            let g = f.substitute_var(v, c)?;
            if g.is_zero() {
                return Err(Error::DivisionByZero(format!(
                    "substituting variable {v} hits a pole of {self}"
                )));
            }
            den.push((g, *e));
        }
        Ok(Self::normalized(num, den))
    }

    pub fn eval_rat(&self, values: &[Rat]) -> Result<Rat> {
        let mut acc = self.num.eval_rat(values)?;
        for (f, e) in &self.den {
            let d = f.eval_rat(values)?;
            if d.is_zero() {
                return Err(Error::DivisionByZero(format!(
                    "denominator factor {} vanishes at the evaluation point",
                    f
                )));
            }
            acc /= rat_pow_u(&d, *e);
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, values: &[f64]) -> Result<f64> {
        let mut acc = self.num.eval_f64(values);
        for (f, e) in &self.den {
            let d = f.eval_f64(values);
            if d == 0.0 {
                return Err(Error::DivisionByZero(format!(
                    "denominator factor {} vanishes at the evaluation point",
                    f
                )));
            }
            acc /= d.powi(*e as i32);
        }
        Ok(acc)
    }

    /// Evaluates with values in any scalar domain; with `K = RationalFunction`
    /// this composes rational functions.
    pub fn eval_gen<K: Scalar>(&self, values: &[K]) -> Result<K> {
        let mut acc = self.num.eval_gen(values)?;
        for (f, e) in &self.den {
            let d = f.eval_gen(values)?;
            acc = acc.try_div(&d.powi_checked(i64::from(*e))?)?;
        }
        Ok(acc)
    }

    /// Largest variable index appearing anywhere, plus one.
    pub fn vars_present(&self) -> usize {
        let mut n = self.num.vars_present();
        for (f, _) in &self.den {
            n = n.max(f.vars_present());
        }
        n
    }
}

/// Strips constants, monomial content, and the leading coefficient out of a
/// denominator factor, compensating in `num`; returns the normalized factor,
/// or `None` if it was a unit.
fn absorb_units(num: &mut LaurentPoly, f: LaurentPoly, e: u32) -> Option<LaurentPoly> {
    let mut f = f;
    let shift = f.min_exponents();
    if shift.iter().any(|&x| x != 0) {
        let neg: Vec<i32> = shift.iter().map(|&x| -x).collect();
        f = f.mul_monomial(&neg, &Rat::one());
        // 1 / (t^m g)^e = t^{-e m} / g^e
        let comp: Vec<i32> = shift.iter().map(|&x| -(e as i32) * x).collect();
        *num = num.mul_monomial(&comp, &Rat::one());
    }
    if let Some(c) = f.as_constant() {
        *num = num.scale(&rat_pow_u(&c, e).recip());
        return None;
    }
    let lead = f.leading().expect("non-constant factor").1.clone();
    if !lead.is_one() {
        f = f.scale(&lead.recip());
        *num = num.scale(&rat_pow_u(&lead, e).recip());
    }
    Some(f)
}

impl PartialEq for RationalFunction {
    fn eq(&self, other: &Self) -> bool {
        self.add_signed(other, true).is_zero()
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        let den = self
            .den
            .iter()
            .map(|(g, e)| {
                if *e == 1 {
                    format!("({g})")
                } else {
                    format!("({g})^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*");
        write!(f, "({})/{}", self.num, den)
    }
}

impl Zero for RationalFunction {
    fn zero() -> Self {
        RationalFunction::zero()
    }
    fn is_zero(&self) -> bool {
        RationalFunction::is_zero(self)
    }
}

impl One for RationalFunction {
    fn one() -> Self {
        RationalFunction::one()
    }
}

macro_rules! ratfun_binop {
    ($trait:ident, $method:ident, $impl_fn:expr) => {
        impl $trait<&RationalFunction> for &RationalFunction {
            type Output = RationalFunction;
            fn $method(self, rhs: &RationalFunction) -> RationalFunction {
                #[allow(clippy::redundant_closure_call)]
                ($impl_fn)(self, rhs)
            }
        }
        impl $trait<RationalFunction> for RationalFunction {
            type Output = RationalFunction;
            fn $method(self, rhs: RationalFunction) -> RationalFunction {
                $trait::$method(&self, &rhs)
            }
        }
        impl $trait<&RationalFunction> for RationalFunction {
            type Output = RationalFunction;
            fn $method(self, rhs: &RationalFunction) -> RationalFunction {
                $trait::$method(&self, rhs)
            }
        }
        impl $trait<RationalFunction> for &RationalFunction {
            type Output = RationalFunction;
            fn $method(self, rhs: RationalFunction) -> RationalFunction {
                $trait::$method(self, &rhs)
            }
        }
    };
}

ratfun_binop!(Add, add, |a: &RationalFunction, b: &RationalFunction| a
    .add_signed(b, false));
ratfun_binop!(Sub, sub, |a: &RationalFunction, b: &RationalFunction| a
    .add_signed(b, true));
ratfun_binop!(Mul, mul, |a: &RationalFunction, b: &RationalFunction| a
    .mul_impl(b));

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Neg for RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        -&self
    }
}
