//! Sparse multivariate Laurent polynomials over arbitrary-precision rationals.
//!
//! Exponent vectors are packed into a single `u128` (eight 16-bit lanes, one
//! per variable, each storing the exponent plus a bias), so term keys compare,
//! hash, and combine in a few machine operations instead of heap traffic. The
//! packed integer order coincides with lexicographic order on the exponents
//! with `t0` most significant, which makes iteration order canonical and every
//! operation deterministic. Negative exponents are first-class.
//!
//! Limits imposed by the packing: at most [`MAX_VARS`] variables and exponents
//! within +/-32767. Infallible constructors panic past those limits; the text
//! parser reports a proper error. Both bounds are far beyond what the grids in
//! this crate produce, but they are validated at the input boundary.

use num::{BigInt, BigRational, Signed, Zero};
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Arbitrary-precision rational scalar. Always stored reduced with positive
/// denominator (guaranteed by the `num` crate).
pub type Rat = BigRational;

/// Maximum number of distinct variables a polynomial may involve.
pub const MAX_VARS: usize = 8;

const LANE_BITS: u32 = 16;
const BIAS: i64 = 1 << 15;
const LANE_MASK: u128 = 0xFFFF;
/// All eight lanes holding the biased exponent zero.
const ZERO_BITS: u128 = 0x8000_8000_8000_8000_8000_8000_8000_8000;

/// Packed exponent vector: lane `v` stores `exponent_v + 32768` as `u16`, with
/// variable 0 in the most significant lane so that numeric order on the `u128`
/// equals lexicographic order on the exponent vectors.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub(crate) struct Key(u128);

impl Key {
    pub(crate) const ZERO: Key = Key(ZERO_BITS);

    #[inline]
    fn lane_shift(v: usize) -> u32 {
        debug_assert!(v < MAX_VARS);
        (MAX_VARS - 1 - v) as u32 * LANE_BITS
    }

    #[inline]
    pub(crate) fn exp(self, v: usize) -> i32 {
        if v >= MAX_VARS {
            return 0;
        }
        ((self.0 >> Self::lane_shift(v)) & LANE_MASK) as i32 - BIAS as i32
    }

    pub(crate) fn try_encode(exps: &[i32]) -> Option<Key> {
        if exps.len() > MAX_VARS && exps[MAX_VARS..].iter().any(|&e| e != 0) {
            return None;
        }
        let mut bits = ZERO_BITS;
        for (v, &e) in exps.iter().take(MAX_VARS).enumerate() {
            if e.unsigned_abs() > 0x7FFF {
                return None;
            }
            let sh = Self::lane_shift(v);
            bits = (bits & !(LANE_MASK << sh)) | ((((e as i64) + BIAS) as u128) << sh);
        }
        Some(Key(bits))
    }

    pub(crate) fn encode(exps: &[i32]) -> Key {
        Self::try_encode(exps).unwrap_or_else(|| {
            panic!(
                "exponent vector {exps:?} outside the supported range \
                 (at most {MAX_VARS} variables, exponents within +/-32767)"
            )
        })
    }

    pub(crate) fn decode(self) -> Vec<i32> {
        let mut out: Vec<i32> = (0..MAX_VARS).map(|v| self.exp(v)).collect();
        while out.last() == Some(&0) {
            out.pop();
        }
        out
    }

    #[inline]
    fn combine(self, rhs: Key, sign: i64) -> Key {
        let mut bits = 0u128;
        for v in 0..MAX_VARS {
            let e = self.exp(v) as i64 + sign * rhs.exp(v) as i64;
            debug_assert!(e.unsigned_abs() <= 0x7FFF, "exponent overflow");
            bits |= (((e + BIAS) as u128) & LANE_MASK) << Self::lane_shift(v);
        }
        Key(bits)
    }

    #[inline]
    pub(crate) fn add(self, rhs: Key) -> Key {
        self.combine(rhs, 1)
    }

    #[inline]
    pub(crate) fn sub(self, rhs: Key) -> Key {
        self.combine(rhs, -1)
    }

    #[inline]
    pub(crate) fn with_lane(self, v: usize, e: i32) -> Key {
        let sh = Self::lane_shift(v);
        Key((self.0 & !(LANE_MASK << sh)) | ((((e as i64) + BIAS) as u128) << sh))
    }

    pub(crate) fn total_degree(self) -> i64 {
        (0..MAX_VARS).map(|v| self.exp(v) as i64).sum()
    }

    pub(crate) fn vars_present(self) -> usize {
        (0..MAX_VARS)
            .rev()
            .find(|&v| self.exp(v) != 0)
            .map_or(0, |v| v + 1)
    }

    pub(crate) fn any_negative(self) -> bool {
        (0..MAX_VARS).any(|v| self.exp(v) < 0)
    }
}

/// A sparse Laurent polynomial with rational coefficients.
///
/// Invariants: no zero coefficients are stored, so equal polynomials have
/// identical representations and `is_zero` is a structural check.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<Key, Rat>,
}

impl LaurentPoly {
    /// The zero polynomial.
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    /// The constant polynomial 1.
    pub fn one() -> Self {
        Self::constant(Rat::from_integer(BigInt::from(1)))
    }

    /// A constant polynomial.
    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Key::ZERO, c);
        }
        LaurentPoly { terms }
    }

    /// The single variable `x_v`.
    pub fn var(v: usize) -> Self {
        Self::monomial_pow(v, 1, Rat::from_integer(BigInt::from(1)))
    }

    /// The monomial `c * x_v^e`.
    pub fn monomial_pow(v: usize, e: i32, c: Rat) -> Self {
        assert!(v < MAX_VARS, "variable index {v} exceeds the supported {MAX_VARS}");
        Self::monomial_key(Key::ZERO.with_lane(v, e), c)
    }

    /// The monomial `c * x^key`.
    pub fn monomial(key: Vec<i32>, c: Rat) -> Self {
        Self::monomial_key(Key::encode(&key), c)
    }

    fn monomial_key(key: Key, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(key, c);
        }
        LaurentPoly { terms }
    }

    /// Builds a polynomial from (exponent, coefficient) pairs, summing duplicates.
    pub fn from_terms<I: IntoIterator<Item = (Vec<i32>, Rat)>>(iter: I) -> Self {
        let mut out = LaurentPoly::zero();
        for (key, c) in iter {
            out.add_term(Key::encode(&key), c);
        }
        out
    }

    fn add_term(&mut self, key: Key, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// True if this is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True if this is a constant (possibly zero).
    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|&k| k == Key::ZERO)
    }

    /// The constant value if this polynomial is constant.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_zero() {
            Some(Rat::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    /// Number of stored terms.
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterates terms in canonical (lexicographic) key order, decoding each
    /// exponent vector (trailing zeros trimmed).
    pub fn terms(&self) -> impl Iterator<Item = (Vec<i32>, &Rat)> {
        self.terms.iter().map(|(k, c)| (k.decode(), c))
    }

    /// Smallest variable count that covers every exponent present.
    pub fn vars_present(&self) -> usize {
        self.terms.keys().map(|k| k.vars_present()).max().unwrap_or(0)
    }

    /// Componentwise minimum exponent over all terms, length `vars_present()`.
    /// Zero polynomial gives an empty vector.
    pub fn min_exponents(&self) -> Vec<i32> {
        let n = self.vars_present();
        let mut min = vec![i32::MAX; n];
        for key in self.terms.keys() {
            for (v, m) in min.iter_mut().enumerate() {
                *m = (*m).min(key.exp(v));
            }
        }
        for m in &mut min {
            if *m == i32::MAX {
                *m = 0;
            }
        }
        min
    }

    /// Multiplies by the monomial `c * x^key` (a unit of the Laurent ring).
    pub fn mul_monomial(&self, key: &[i32], c: &Rat) -> Self {
        let shift = Key::encode(key);
        let mut terms = BTreeMap::new();
        for (&k, v) in &self.terms {
            let prod = v * c;
            if !prod.is_zero() {
                terms.insert(k.add(shift), prod);
            }
        }
        LaurentPoly { terms }
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return LaurentPoly::zero();
        }
        let terms = self.terms.iter().map(|(&k, v)| (k, v * c)).collect();
        LaurentPoly { terms }
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, e: u32) -> Self {
        let mut out = LaurentPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = &out * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        out
    }

    /// Partial derivative with respect to variable `v`.
    pub fn derivative(&self, v: usize) -> Self {
        if v >= MAX_VARS {
            return LaurentPoly::zero();
        }
        let mut out = LaurentPoly::zero();
        for (&key, c) in &self.terms {
            let e = key.exp(v);
            if e == 0 {
                continue;
            }
            out.add_term(
                key.with_lane(v, e - 1),
                c * Rat::from_integer(BigInt::from(e)),
            );
        }
        out
    }

    /// The Euler operator `sum_v x_v d/dx_v`: each term is scaled by its total
    /// degree, so homogeneous polynomials of degree d are eigenvectors.
    pub fn euler_apply(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .filter_map(|(&k, c)| {
                let d = k.total_degree();
                if d == 0 {
                    None
                } else {
                    Some((k, c * Rat::from_integer(BigInt::from(d))))
                }
            })
            .collect();
        LaurentPoly { terms }
    }

    /// Total degree of each term if all terms share it (the zero polynomial is
    /// homogeneous of every degree; reported as Some(0)).
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|k| k.total_degree());
        let first = match it.next() {
            None => return Some(0),
            Some(d) => d,
        };
        it.all(|d: i64| d == first).then_some(first)
    }

    /// Hirota bilinear derivative `D_v f.g = df/dx_v * g - f * dg/dx_v`.
    pub fn hirota(v: usize, f: &LaurentPoly, g: &LaurentPoly) -> LaurentPoly {
        &(&f.derivative(v) * g) - &(f * &g.derivative(v))
    }

    /// Double Hirota derivative `D_v D_w f.g`
    /// `= f_vw g - f_v g_w - f_w g_v + f g_vw` (subscripts are partials).
    pub fn hirota2(v: usize, w: usize, f: &LaurentPoly, g: &LaurentPoly) -> LaurentPoly {
        let fv = f.derivative(v);
        let fw = f.derivative(w);
        let gv = g.derivative(v);
        let gw = g.derivative(w);
        let a = &(&fv.derivative(w) * g) + &(f * &gv.derivative(w));
        let b = &(&fv * &gw) + &(&fw * &gv);
        &a - &b
    }

    /// Specializes variable `v` to the rational value `c` (which must be nonzero
    /// if any term has a negative exponent in `v`).
    pub fn substitute_var(&self, v: usize, c: &Rat) -> Result<Self> {
        if v >= MAX_VARS {
            return Ok(self.clone());
        }
        let mut out = LaurentPoly::zero();
        for (&key, coeff) in &self.terms {
            let e = key.exp(v);
            let factor = rat_pow(c, e)?;
            out.add_term(key.with_lane(v, 0), coeff * factor);
        }
        Ok(out)
    }

    /// Evaluates at rational values, one per variable index; `values` must cover
    /// `vars_present()`.
    pub fn eval_rat(&self, values: &[Rat]) -> Result<Rat> {
        if values.len() < self.vars_present() {
            return Err(Error::invalid(format!(
                "evaluation needs {} values, got {}",
                self.vars_present(),
                values.len()
            )));
        }
        let mut sum = Rat::zero();
        for (&key, c) in &self.terms {
            let mut term = c.clone();
            for (v, value) in values.iter().enumerate().take(MAX_VARS) {
                let e = key.exp(v);
                if e != 0 {
                    term *= rat_pow(value, e)?;
                }
            }
            sum += term;
        }
        Ok(sum)
    }

    /// Evaluates at floating-point values.
    pub fn eval_f64(&self, values: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (&key, c) in &self.terms {
            let mut term = c.to_f64().unwrap_or(f64::NAN);
            for (v, value) in values.iter().enumerate().take(MAX_VARS) {
                let e = key.exp(v);
                if e != 0 {
                    term *= value.powi(e);
                }
            }
            sum += term;
        }
        sum
    }

    /// Evaluates with values in any scalar field (used to substitute rational
    /// functions for variables).
    pub fn eval_gen<K: super::Scalar>(&self, values: &[K]) -> Result<K> {
        let mut sum = K::zero();
        for (&key, c) in &self.terms {
            let mut term = K::from_rat(c);
            for v in 0..key.vars_present() {
                let e = key.exp(v);
                if e != 0 {
                    let val = values.get(v).ok_or_else(|| {
                        Error::invalid(format!("evaluation needs value for variable {v}"))
                    })?;
                    term = term * val.powi_checked(e.into())?;
                }
            }
            sum = sum + term;
        }
        Ok(sum)
    }

    /// The lexicographically largest term (leading in the canonical order).
    pub fn leading(&self) -> Option<(Vec<i32>, &Rat)> {
        self.terms.last_key_value().map(|(k, c)| (k.decode(), c))
    }

    /// Exact division: `Some(q)` with `self = q * rhs` if `rhs` divides `self`
    /// in the Laurent ring, else `None`.
    pub fn exact_div(&self, rhs: &LaurentPoly) -> Option<LaurentPoly> {
        if rhs.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(LaurentPoly::zero());
        }
        // Shift both to ordinary polynomials (monomials are units).
        let ma = self.min_exponents();
        let mb = rhs.min_exponents();
        let neg = |v: &[i32]| v.iter().map(|&e| -e).collect::<Vec<_>>();
        let one = Rat::from_integer(BigInt::from(1));
        let a = self.mul_monomial(&neg(&ma), &one);
        let b = rhs.mul_monomial(&neg(&mb), &one);
        let (&lead_key, lead_coeff) = b.terms.last_key_value().expect("nonzero divisor");
        let lead_coeff = lead_coeff.clone();
        let mut r = a;
        let mut q = LaurentPoly::zero();
        while let Some((&rk, rc)) = r.terms.last_key_value() {
            let t_key = rk.sub(lead_key);
            if t_key.any_negative() {
                return None;
            }
            let t = Self::monomial_key(t_key, rc / &lead_coeff);
            r = &r - &(&t * &b);
            q = &q + &t;
        }
        // Undo the monomial shifts: self = x^{ma - mb} * (a/b) * rhs.
        let shift: Vec<i32> = (0..ma.len().max(mb.len()))
            .map(|v| {
                ma.get(v).copied().unwrap_or(0) - mb.get(v).copied().unwrap_or(0)
            })
            .collect();
        Some(q.mul_monomial(&shift, &one))
    }

    /// Renders with the given variable names.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (key, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let mut factors: Vec<String> = Vec::new();
            let one = mag == Rat::from_integer(BigInt::from(1));
            let key = key.decode();
            if !one || key.iter().all(|&e| e == 0) {
                factors.push(mag.to_string());
            }
            for (v, &e) in key.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = names
                    .get(v)
                    .cloned()
                    .unwrap_or_else(|| format!("x{v}"));
                if e == 1 {
                    factors.push(name);
                } else {
                    factors.push(format!("{name}^{e}"));
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    /// Default variable names t0, t1, ... used by the canonical text form.
    pub fn default_names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i}")).collect()
    }

    /// Parses the canonical text form produced by `Display` (variables t0, t1, ...).
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, &|name| {
            name.strip_prefix('t')
                .and_then(|d| d.parse::<usize>().ok())
        })
    }

    /// Parses with a custom variable-name resolver.
    pub fn parse_with(text: &str, resolve: &dyn Fn(&str) -> Option<usize>) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::Parse("empty polynomial text".into()));
        }
        if text == "0" {
            return Ok(LaurentPoly::zero());
        }
        // Split into signed terms at top-level + and -. A '-' directly after '^'
        // is an exponent sign; a sign before any term content negates the term.
        fn flush(
            term: &mut String,
            sign: i64,
            out: &mut LaurentPoly,
            resolve: &dyn Fn(&str) -> Option<usize>,
        ) -> Result<()> {
            if term.trim().is_empty() {
                return Err(Error::Parse("dangling sign or separator".into()));
            }
            let (key, coeff) = parse_term(term.trim(), resolve)?;
            let key = Key::try_encode(&key).ok_or_else(|| {
                Error::Parse(format!(
                    "exponent vector {key:?} outside the supported range"
                ))
            })?;
            out.add_term(key, coeff * Rat::from_integer(BigInt::from(sign)));
            term.clear();
            Ok(())
        }
        let mut out = LaurentPoly::zero();
        let mut term = String::new();
        let mut sign = 1i64;
        for ch in text.chars() {
            match ch {
                '+' | '-' => {
                    if term.trim_end().ends_with('^') {
                        term.push(ch);
                    } else if term.trim().is_empty() {
                        if ch == '-' {
                            sign = -sign;
                        }
                    } else {
                        flush(&mut term, sign, &mut out, resolve)?;
                        sign = if ch == '-' { -1 } else { 1 };
                    }
                }
                _ => term.push(ch),
            }
        }
        flush(&mut term, sign, &mut out, resolve)?;
        Ok(out)
    }
}

fn parse_term(
    text: &str,
    resolve: &dyn Fn(&str) -> Option<usize>,
) -> Result<(Vec<i32>, Rat)> {
    let mut coeff = Rat::from_integer(BigInt::from(1));
    let mut key: Vec<i32> = Vec::new();
    for factor in text.split('*') {
        let factor = factor.trim();
        if factor.is_empty() {
            return Err(Error::Parse(format!("empty factor in term '{text}'")));
        }
        if factor.chars().next().unwrap().is_ascii_digit() {
            coeff *= super::rat_from_str(factor)?;
            continue;
        }
        let (name, exp) = match factor.split_once('^') {
            Some((n, e)) => {
                let exp: i32 = e
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent '{e}'")))?;
                (n, exp)
            }
            None => (factor, 1),
        };
        let v = resolve(name)
            .ok_or_else(|| Error::Parse(format!("unknown variable '{name}'")))?;
        if key.len() <= v {
            key.resize(v + 1, 0);
        }
        key[v] += exp;
    }
    Ok((key, coeff))
}

fn rat_pow(base: &Rat, e: i32) -> Result<Rat> {
    if e == 0 {
        return Ok(Rat::from_integer(BigInt::from(1)));
    }
    if base.is_zero() && e < 0 {
        return Err(Error::DivisionByZero(
            "negative power of zero in evaluation".into(),
        ));
    }
    Ok(num_traits::Pow::pow(base.clone(), e))
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = Self::default_names(self.vars_present());
        write!(f, "{}", self.display_with(&names))
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.add_term(k, c.clone());
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.add_term(k, -c.clone());
        }
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        // Iterate the smaller operand outermost for better map locality.
        let (outer, inner) = if self.terms.len() <= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = LaurentPoly::zero();
        for (&ka, ca) in &outer.terms {
            for (&kb, cb) in &inner.terms {
                out.add_term(ka.add(kb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        let terms = self
            .terms
            .iter()
            .map(|(&k, c)| (k, -c.clone()))
            .collect();
        LaurentPoly { terms }
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for LaurentPoly {
            type Output = LaurentPoly;
            fn $method(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

/// Determinant of a square matrix of Laurent polynomials, by Laplace expansion
/// with memoization over column subsets (division-free, exact in the ring).
pub fn det_poly(rows: &[Vec<LaurentPoly>]) -> LaurentPoly {
    let n = rows.len();
    assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
    if n == 0 {
        return LaurentPoly::one();
    }
    assert!(n <= 20, "determinant size {n} too large for subset expansion");
    use std::collections::HashMap;
    // minors[mask] = det of the last popcount(mask) rows restricted to columns in mask.
    let mut minors: HashMap<u32, LaurentPoly> = HashMap::new();
    minors.insert(0, LaurentPoly::one());
    let full: u32 = (1 << n) - 1;
    for mask in 1..=full {
        let k = mask.count_ones() as usize;
        let row = n - k;
        let mut det = LaurentPoly::zero();
        let mut sign = true; // + for the first chosen column
        for col in 0..n {
            if mask & (1 << col) == 0 {
                continue;
            }
            let sub = minors
                .get(&(mask & !(1 << col)))
                .expect("smaller minors already computed");
            let entry = &rows[row][col];
            if !entry.is_zero() && !sub.is_zero() {
                let prod = entry * sub;
                det = if sign { &det + &prod } else { &det - &prod };
            }
            sign = !sign;
        }
        minors.insert(mask, det);
    }
    minors.remove(&full).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, rat_int};

    fn t(v: usize) -> LaurentPoly {
        LaurentPoly::var(v)
    }

    #[test]
    fn key_pack_round_trip_and_order() {
        for exps in [
            vec![],
            vec![1],
            vec![0, -3],
            vec![-2, 5, 0, 7],
            vec![32767, -32767],
        ] {
            assert_eq!(Key::encode(&exps).decode(), {
                let mut e = exps.clone();
                while e.last() == Some(&0) {
                    e.pop();
                }
                e
            });
        }
        // Packed order is lex order with t0 most significant.
        assert!(Key::encode(&[1]) > Key::encode(&[0, 99]));
        assert!(Key::encode(&[2, -1]) > Key::encode(&[2, -2]));
        assert!(Key::encode(&[-1]) < Key::encode(&[]));
        assert!(Key::try_encode(&[40000]).is_none());
        assert!(Key::try_encode(&[0; 9]).is_some());
        assert!(Key::try_encode(&[0, 0, 0, 0, 0, 0, 0, 0, 1]).is_none());
        // Key arithmetic matches vector arithmetic.
        let a = Key::encode(&[3, -2, 1]);
        let b = Key::encode(&[-1, 4]);
        assert_eq!(a.add(b).decode(), vec![2, 2, 1]);
        assert_eq!(a.sub(b).decode(), vec![4, -6, 1]);
        assert_eq!(a.total_degree(), 2);
        assert_eq!(a.vars_present(), 3);
    }

    #[test]
    fn arithmetic_basics() {
        let p = &(&t(0) + &t(1)) * &(&t(0) - &t(1));
        let q = &(&t(0) * &t(0)) - &(&t(1) * &t(1));
        assert_eq!(p, q);
        assert!((&p - &q).is_zero());
    }

    #[test]
    fn negative_exponents() {
        let p = LaurentPoly::monomial(vec![-1, 2], rat(3, 2));
        assert_eq!(p.to_string(), "3/2*t0^-1*t1^2");
        let inv = LaurentPoly::monomial(vec![1, -2], rat(2, 3));
        assert_eq!(&p * &inv, LaurentPoly::one());
    }

    #[test]
    fn derivative_and_euler() {
        // d/dt0 (t0^-2 t1) = -2 t0^-3 t1
        let p = LaurentPoly::monomial(vec![-2, 1], rat_int(1));
        assert_eq!(
            p.derivative(0),
            LaurentPoly::monomial(vec![-3, 1], rat_int(-2))
        );
        // Euler scales by total degree (-1 here).
        assert_eq!(p.euler_apply(), p.scale(&rat_int(-1)));
        assert_eq!(p.homogeneous_degree(), Some(-1));
        let mixed = &p + &t(0);
        assert_eq!(mixed.homogeneous_degree(), None);
    }

    #[test]
    fn hirota_antisymmetry() {
        let f = &(&t(0) * &t(0)) + &t(1);
        let g = &t(0) - &LaurentPoly::one();
        let d = LaurentPoly::hirota(0, &f, &g);
        let d_rev = LaurentPoly::hirota(0, &g, &f);
        assert_eq!(d, -&d_rev);
        // D f.f = 0
        assert!(LaurentPoly::hirota(1, &f, &f).is_zero());
    }

    #[test]
    fn display_round_trip() {
        let p = LaurentPoly::from_terms(vec![
            (vec![2, -1], rat(3, 2)),
            (vec![1], rat_int(-1)),
            (vec![], rat_int(2)),
        ]);
        let s = p.to_string();
        assert_eq!(s, "2 - t0 + 3/2*t0^2*t1^-1");
        assert_eq!(LaurentPoly::parse(&s).unwrap(), p);
        assert_eq!(LaurentPoly::parse("0").unwrap(), LaurentPoly::zero());
        assert_eq!(
            LaurentPoly::parse("3/2*t0^2*t1^-1").unwrap(),
            LaurentPoly::monomial(vec![2, -1], rat(3, 2))
        );
        // Negative-exponent terms sort below the constant term.
        let q = LaurentPoly::from_terms(vec![(vec![-1], rat_int(1)), (vec![], rat_int(2))]);
        assert_eq!(q.to_string(), "t0^-1 + 2");
        assert_eq!(LaurentPoly::parse("t0^-1 + 2").unwrap(), q);
    }

    #[test]
    fn exact_division() {
        let a = &(&t(0) + &t(1)) * &(&(&t(0) * &t(0)) + &t(1));
        let q = a.exact_div(&(&t(0) + &t(1))).unwrap();
        assert_eq!(q, &(&t(0) * &t(0)) + &t(1));
        assert!(a.exact_div(&(&t(0) - &t(1))).is_none());
        // Laurent units divide everything.
        let m = LaurentPoly::monomial(vec![-3, 1], rat(7, 5));
        let q2 = a.exact_div(&m).unwrap();
        assert_eq!(&q2 * &m, a);
    }

    #[test]
    fn evaluation() {
        let p = LaurentPoly::from_terms(vec![(vec![1, -1], rat_int(2)), (vec![], rat_int(1))]);
        let v = [rat_int(3), rat(1, 2)];
        assert_eq!(p.eval_rat(&v).unwrap(), rat_int(13));
        assert!((p.eval_f64(&[3.0, 0.5]) - 13.0).abs() < 1e-12);
        assert!(p.eval_rat(&[rat_int(1), rat_int(0)]).is_err());
    }

    #[test]
    fn substitute_variable() {
        // 4 t0^-2 t1 + t0 at t0 = 2 gives t1 + 2.
        let p = LaurentPoly::from_terms(vec![(vec![-2, 1], rat_int(4)), (vec![1], rat_int(1))]);
        let q = p.substitute_var(0, &rat_int(2)).unwrap();
        assert_eq!(q, &t(1) + &LaurentPoly::constant(rat_int(2)));
    }

    #[test]
    fn determinant_matches_cofactor() {
        let m = vec![
            vec![t(0), LaurentPoly::one(), LaurentPoly::zero()],
            vec![LaurentPoly::one(), t(0), LaurentPoly::one()],
            vec![LaurentPoly::zero(), LaurentPoly::one(), t(0)],
        ];
        // Tridiagonal determinant: t0^3 - 2 t0.
        let det = det_poly(&m);
        let expect = &(&t(0) * &(&t(0) * &t(0))) - &t(0).scale(&rat_int(2));
        assert_eq!(det, expect);
    }

    #[test]
    fn ring_axioms_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let random_poly = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut p = LaurentPoly::zero();
            for _ in 0..rng.random_range(0..5usize) {
                let key = vec![rng.random_range(-3..=3i32), rng.random_range(-3..=3i32)];
                let c = rat(rng.random_range(-5..=5i64), rng.random_range(1..=4i64));
                p = &p + &LaurentPoly::monomial(key, c);
            }
            p
        };
        for _ in 0..1000 {
            let a = random_poly(&mut rng);
            let b = random_poly(&mut rng);
            let c = random_poly(&mut rng);
            assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            assert_eq!(&a + &b, &b + &a);
            assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            assert_eq!(&a * &b, &b * &a);
            assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            assert!((&a - &a).is_zero());
            assert_eq!(&a * &LaurentPoly::one(), a);
        }
    }

    #[test]
    fn derivation_property_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                LaurentPoly::from_terms((0..3).map(|_| {
                    (
                        vec![rng.random_range(-2..=2i32), rng.random_range(-2..=2i32)],
                        rat(rng.random_range(-4..=4i64), 1),
                    )
                }))
            };
            let f = mk(&mut rng);
            let g = mk(&mut rng);
            for v in 0..2 {
                // Leibniz rule.
                assert_eq!(
                    (&f * &g).derivative(v),
                    &(&f.derivative(v) * &g) + &(&f * &g.derivative(v))
                );
            }
            // Euler operator is a derivation as well.
            assert_eq!(
                (&f * &g).euler_apply(),
                &(&f.euler_apply() * &g) + &(&f * &g.euler_apply())
            );
        }
    }
}
