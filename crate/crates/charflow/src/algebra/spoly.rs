//! Sparse polynomials with coefficients in an arbitrary scalar field.
//!
//! [`LaurentPoly`] is specialized to rational coefficients; this type carries
//! the same packed-key term layout but lets the coefficients live in any
//! [`Scalar`] — in practice rational functions of the independent variables,
//! so that one polynomial can mix a symbolic phase-space part (the variables
//! here) with symbolic coefficient data (inside the scalars).

use std::collections::BTreeMap;
use std::fmt;

use super::laurent::Key;
use super::scalar::Scalar;
use super::Rat;
use crate::error::Result;

/// Sparse polynomial in up to 8 variables with `K` coefficients. Zero
/// coefficients are never stored, so equality is structural.
#[derive(Clone, PartialEq, Debug)]
pub struct SparsePoly<K: Scalar> {
    terms: BTreeMap<Key, K>,
}

impl<K: Scalar> SparsePoly<K> {
    pub fn zero() -> Self {
        SparsePoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(K::one())
    }

    pub fn constant(c: K) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Key::ZERO, c);
        }
        SparsePoly { terms }
    }

    pub fn var(v: usize) -> Self {
        Self::monomial(&{
            let mut key = vec![0i32; v + 1];
            key[v] = 1;
            key
        }, K::one())
    }

    pub fn monomial(key: &[i32], c: K) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Key::encode(key), c);
        }
        SparsePoly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<i32>, K)>>(iter: I) -> Self {
        let mut out = Self::zero();
        for (key, c) in iter {
            out.add_term(Key::encode(&key), c);
        }
        out
    }

    fn add_term(&mut self, key: Key, c: K) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Vec<i32>, &K)> {
        self.terms.iter().map(|(k, c)| (k.decode(), c))
    }

    pub fn as_constant(&self) -> Option<K> {
        if self.is_zero() {
            Some(K::zero())
        } else if self.terms.len() == 1 && self.terms.keys().all(|&k| k == Key::ZERO) {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn vars_present(&self) -> usize {
        self.terms.keys().map(|k| k.vars_present()).max().unwrap_or(0)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.add_term(k, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.add_term(k, K::zero() - c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(&k, c)| (k, K::zero() - c.clone()))
            .collect();
        SparsePoly { terms }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let (outer, inner) = if self.terms.len() <= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = Self::zero();
        for (&ka, ca) in &outer.terms {
            for (&kb, cb) in &inner.terms {
                out.add_term(ka.add(kb), ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &K) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut out = Self::zero();
        for (&k, v) in &self.terms {
            out.add_term(k, v.clone() * c.clone());
        }
        out
    }

    pub fn map_coeffs<K2: Scalar>(&self, f: &dyn Fn(&K) -> Result<K2>) -> Result<SparsePoly<K2>> {
        let mut out = SparsePoly::zero();
        for (&k, c) in &self.terms {
            out.add_term(k, f(c)?);
        }
        Ok(out)
    }

    pub fn derivative(&self, v: usize) -> Self {
        let mut out = Self::zero();
        for (&key, c) in &self.terms {
            let e = key.exp(v);
            if e == 0 {
                continue;
            }
            let factor = K::from_rat(&Rat::from_integer(e.into()));
            out.add_term(key.with_lane(v, e - 1), c.clone() * factor);
        }
        out
    }

    /// Evaluates at values in a possibly different scalar field; `lift` maps
    /// each coefficient into the target field.
    pub fn eval<K2: Scalar>(
        &self,
        values: &[K2],
        lift: &dyn Fn(&K) -> Result<K2>,
    ) -> Result<K2> {
        let mut sum = K2::zero();
        for (&key, c) in &self.terms {
            let mut term = lift(c)?;
            for (v, value) in values.iter().enumerate().take(key.vars_present()) {
                let e = key.exp(v);
                if e != 0 {
                    term = term * value.powi_checked(e.into())?;
                }
            }
            if key.vars_present() > values.len() {
                return Err(crate::error::Error::invalid(format!(
                    "evaluation needs {} values, got {}",
                    key.vars_present(),
                    values.len()
                )));
            }
            sum = sum + term;
        }
        Ok(sum)
    }

    /// Evaluates with values in the coefficient field itself.
    pub fn eval_same(&self, values: &[K]) -> Result<K> {
        self.eval(values, &|c| Ok(c.clone()))
    }

    pub fn display_with(&self, names: &[String]) -> String
    where
        K: fmt::Display,
    {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (key, c) in self.terms() {
            let mut factors = vec![format!("({c})")];
            for (v, &e) in key.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = names.get(v).cloned().unwrap_or_else(|| format!("x{v}"));
                if e == 1 {
                    factors.push(name);
                } else {
                    factors.push(format!("{name}^{e}"));
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}
