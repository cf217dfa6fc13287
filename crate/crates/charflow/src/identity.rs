//! Exact residual checks for the relations a character grid satisfies:
//! quadratic exchange, Hirota-derivative contiguity, Euler homogeneity, the
//! Toda equation, and the three families of shift-difference equations with
//! rational-function coefficients.
//!
//! Every check computes a symbolic residual (a Laurent polynomial or rational
//! function of the deformation variables) that must vanish identically; no
//! numerical evaluation is involved. Residuals are reported term-by-term so a
//! failure pinpoints the offending monomials.

use serde::Serialize;
use serde_json::json;
use std::time::Instant;

use crate::algebra::{LaurentPoly, Rat, RationalFunction};
use crate::character::GridFamily;
use crate::error::{Error, Result};

/// Outcome of one identity check, serializable for reports.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    /// Stable name of the identity family.
    pub id: String,
    /// Indices pinning down the instance (cell, variable indices, shift sets).
    pub indices: serde_json::Value,
    /// True when the residual vanished identically.
    pub pass: bool,
    /// Number of monomials in the residual (0 on pass).
    pub residual_terms: usize,
    /// Wall-clock time spent on this check.
    pub timing_ms: u128,
}

impl IdentityReport {
    fn from_poly(id: &str, indices: serde_json::Value, residual: &LaurentPoly, t0: Instant) -> Self {
        IdentityReport {
            id: id.to_string(),
            indices,
            pass: residual.is_zero(),
            residual_terms: residual.num_terms(),
            timing_ms: t0.elapsed().as_millis(),
        }
    }

    fn from_ratfun(
        id: &str,
        indices: serde_json::Value,
        residual: &RationalFunction,
        t0: Instant,
    ) -> Self {
        IdentityReport {
            id: id.to_string(),
            indices,
            pass: residual.is_zero(),
            residual_terms: residual.num().num_terms(),
            timing_ms: t0.elapsed().as_millis(),
        }
    }
}

/// True when every report passed.
pub fn all_pass(reports: &[IdentityReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

fn unit_offset(nvars: usize, entries: &[(usize, i64)]) -> Vec<i64> {
    let mut v = vec![0i64; nvars];
    for &(i, d) in entries {
        v[i] += d;
    }
    v
}

fn down_offset(nvars: usize, set: &[usize]) -> Vec<i64> {
    let mut v = vec![0i64; nvars];
    for &k in set {
        v[k] -= 1;
    }
    v
}

/// Quadratic exchange relation at cell (m, n) for variables i != j:
/// `(t_i - t_j) s_{m,n} s_{m+1,n+1}^{+i,+j}
///  - t_i s_{m+1,n}^{+i} s_{m,n+1}^{+j} + t_j s_{m+1,n}^{+j} s_{m,n+1}^{+i}`
/// where superscripts add 1 to the indicated theta parameter.
pub fn pair_exchange_residual(
    family: &GridFamily,
    m: i64,
    n: i64,
    i: usize,
    j: usize,
) -> LaurentPoly {
    let nv = family.spec().num_vars();
    assert!(i != j && i < nv && j < nv, "need distinct variables");
    let base = family.base();
    let up_i = family.shifted(&unit_offset(nv, &[(i, 1)]));
    let up_j = family.shifted(&unit_offset(nv, &[(j, 1)]));
    let up_ij = family.shifted(&unit_offset(nv, &[(i, 1), (j, 1)]));
    let ti = LaurentPoly::var(i);
    let tj = LaurentPoly::var(j);
    let lhs = &(&ti - &tj) * &(base.sigma(m, n) * up_ij.sigma(m + 1, n + 1));
    let rhs = &(&ti * &(up_i.sigma(m + 1, n) * up_j.sigma(m, n + 1)))
        - &(&tj * &(up_j.sigma(m + 1, n) * up_i.sigma(m, n + 1)));
    &lhs - &rhs
}

/// Hirota-derivative contiguity at cell (m, n) for variable i:
/// `(t_i D_i + theta_i) s_{m+1,n} . s_{m,n+1}
///  - theta_i s_{m,n}^{-i} s_{m+1,n+1}^{+i}`.
pub fn hirota_shift_residual(family: &GridFamily, m: i64, n: i64, i: usize) -> LaurentPoly {
    let nv = family.spec().num_vars();
    assert!(i < nv);
    let theta_i = family.spec().theta()[i].clone();
    let base = family.base();
    let down_i = family.shifted(&unit_offset(nv, &[(i, -1)]));
    let up_i = family.shifted(&unit_offset(nv, &[(i, 1)]));
    let f = base.sigma(m + 1, n);
    let g = base.sigma(m, n + 1);
    let d = LaurentPoly::hirota(i, f, g);
    let lhs = &(&LaurentPoly::var(i) * &d) + &(f * g).scale(&theta_i);
    let rhs = (down_i.sigma(m, n) * up_i.sigma(m + 1, n + 1)).scale(&theta_i);
    &lhs - &rhs
}

/// Mixed-shift Hirota relation at cell (m, n) for i != j:
/// `((t_j - t_i) D_i + theta_i) s_{m,n}^{-j} . s_{m+1,n}
///  - theta_i s_{m,n}^{-i} s_{m+1,n}^{+i,-j}`.
pub fn mixed_shift_residual(
    family: &GridFamily,
    m: i64,
    n: i64,
    i: usize,
    j: usize,
) -> LaurentPoly {
    let nv = family.spec().num_vars();
    assert!(i != j && i < nv && j < nv, "need distinct variables");
    let theta_i = family.spec().theta()[i].clone();
    let base = family.base();
    let down_j = family.shifted(&unit_offset(nv, &[(j, -1)]));
    let down_i = family.shifted(&unit_offset(nv, &[(i, -1)]));
    let up_i_down_j = family.shifted(&unit_offset(nv, &[(i, 1), (j, -1)]));
    let f = down_j.sigma(m, n);
    let g = base.sigma(m + 1, n);
    let d = LaurentPoly::hirota(i, f, g);
    let lhs = &(&(&LaurentPoly::var(j) - &LaurentPoly::var(i)) * &d) + &(f * g).scale(&theta_i);
    let rhs = (down_i.sigma(m, n) * up_i_down_j.sigma(m + 1, n)).scale(&theta_i);
    &lhs - &rhs
}

/// Euler homogeneity at cell (m, n): `sum_i t_i d/dt_i s_{m,n} - d_{m,n} s_{m,n}`.
pub fn homogeneity_residual(family: &GridFamily, m: i64, n: i64) -> LaurentPoly {
    let grid = family.base();
    let d = Rat::from_integer(grid.degree(m, n).into());
    &grid.sigma(m, n).euler_apply() - &grid.sigma(m, n).scale(&d)
}

/// Toda equation at cell (m, n) for i != j, in denominator-cleared form:
/// `(t_i - t_j)^2 D_i D_j s.s + 2 theta_i theta_j s^2
///  - 2 theta_i theta_j s^{+i,-j} s^{-i,+j}` with `s = s_{m,n}`.
pub fn toda_residual(family: &GridFamily, m: i64, n: i64, i: usize, j: usize) -> LaurentPoly {
    let nv = family.spec().num_vars();
    assert!(i != j && i < nv && j < nv, "need distinct variables");
    let theta = family.spec().theta();
    let c = Rat::from_integer(2.into()) * &theta[i] * &theta[j];
    let base = family.base();
    let up_i_down_j = family.shifted(&unit_offset(nv, &[(i, 1), (j, -1)]));
    let down_i_up_j = family.shifted(&unit_offset(nv, &[(i, -1), (j, 1)]));
    let s = base.sigma(m, n);
    let diff = &LaurentPoly::var(i) - &LaurentPoly::var(j);
    let lhs = &(&diff * &diff) * &LaurentPoly::hirota2(i, j, s, s);
    let rhs = &(s * s).scale(&-c.clone())
        + &(up_i_down_j.sigma(m, n) * down_i_up_j.sigma(m, n)).scale(&c);
    &lhs - &rhs
}

fn validate_sets(nv: usize, set_i: &[usize], set_j: &[usize]) -> Result<()> {
    for &k in set_i.iter().chain(set_j) {
        if k >= nv {
            return Err(Error::invalid(format!(
                "shift index {k} exceeds variable count {nv}"
            )));
        }
    }
    if set_i.iter().any(|a| set_j.contains(a)) {
        return Err(Error::invalid("shift sets must be disjoint"));
    }
    let mut seen = set_i.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != set_i.len() {
        return Err(Error::invalid("duplicate index in shift set"));
    }
    Ok(())
}

/// Product of down-shifted cells: `T_K(s_cell)` pulled from the family cache.
fn shifted_cell(family: &GridFamily, set: &[usize], m: i64, n: i64) -> LaurentPoly {
    let nv = family.spec().num_vars();
    family.shifted(&down_offset(nv, set)).sigma(m, n).clone()
}

/// Diagonal shift-difference relation with base cell `(m0, n0)` and reach
/// `(m, n)`, for disjoint index sets I, J with |I| - |J| = m + n + 2:
/// `sum_{i in I} t_i^n [prod_{j in J} (t_i - t_j) / prod_{j in I\i} (t_i - t_j)]
///    T_{I\i}(s_{m0,n0}) T_{J+i}(s_{m0+m,n0+n})`.
pub fn difference_diagonal_residual(
    family: &GridFamily,
    base: (i64, i64),
    m: i64,
    n: i64,
    set_i: &[usize],
    set_j: &[usize],
) -> Result<RationalFunction> {
    let nv = family.spec().num_vars();
    validate_sets(nv, set_i, set_j)?;
    if m < 0 || n < 0 || set_i.len() as i64 - set_j.len() as i64 != m + n + 2 {
        return Err(Error::invalid(format!(
            "diagonal relation needs |I| - |J| = m + n + 2 with m, n >= 0; \
             got |I|={}, |J|={}, m={m}, n={n}",
            set_i.len(),
            set_j.len()
        )));
    }
    let (m0, n0) = base;
    let mut sum = RationalFunction::zero();
    for &i in set_i {
        let rest: Vec<usize> = set_i.iter().copied().filter(|&a| a != i).collect();
        let mut num = LaurentPoly::monomial_pow(i, n as i32, Rat::from_integer(1.into()));
        for &j in set_j {
            num = &num * &(&LaurentPoly::var(i) - &LaurentPoly::var(j));
        }
        let mut coeff = RationalFunction::from_poly(num);
        for &j in &rest {
            coeff = coeff.div_nonzero(&RationalFunction::from_poly(
                &LaurentPoly::var(i) - &LaurentPoly::var(j),
            ));
        }
        let mut with_i = set_j.to_vec();
        with_i.push(i);
        let prod = &shifted_cell(family, &rest, m0, n0)
            * &shifted_cell(family, &with_i, m0 + m, n0 + n);
        sum = &sum + &(&coeff * &RationalFunction::from_poly(prod));
    }
    Ok(sum)
}

/// Row shift-difference relation with base cell `(m0, n0)`: for disjoint I, J
/// with |I| - |J| = n + 1,
/// `T_I(s_{m0,n0}) T_J(s_{m0+1,n0+n})
///  - sum_{i in I} [prod_{j in J} (1 - t_j/t_i) / prod_{j in I\i} (1 - t_j/t_i)]
///      T_{I\i}(s_{m0+1,n0}) T_{J+i}(s_{m0,n0+n})`.
pub fn difference_row_residual(
    family: &GridFamily,
    base: (i64, i64),
    n: i64,
    set_i: &[usize],
    set_j: &[usize],
) -> Result<RationalFunction> {
    difference_split_residual(family, base, n, set_i, set_j, true)
}

/// Column shift-difference relation with base cell `(m0, n0)`: for disjoint
/// I, J with |I| - |J| = m + 1,
/// `T_I(s_{m0,n0}) T_J(s_{m0+m,n0+1})
///  - sum_{i in I} [prod_{j in J} (1 - t_i/t_j) / prod_{j in I\i} (1 - t_i/t_j)]
///      T_{I\i}(s_{m0,n0+1}) T_{J+i}(s_{m0+m,n0})`.
pub fn difference_column_residual(
    family: &GridFamily,
    base: (i64, i64),
    m: i64,
    set_i: &[usize],
    set_j: &[usize],
) -> Result<RationalFunction> {
    difference_split_residual(family, base, m, set_i, set_j, false)
}

fn difference_split_residual(
    family: &GridFamily,
    base: (i64, i64),
    reach: i64,
    set_i: &[usize],
    set_j: &[usize],
    row: bool,
) -> Result<RationalFunction> {
    let nv = family.spec().num_vars();
    validate_sets(nv, set_i, set_j)?;
    if reach < 0 || set_i.len() as i64 - set_j.len() as i64 != reach + 1 {
        return Err(Error::invalid(format!(
            "split relation needs |I| - |J| = reach + 1 with reach >= 0; \
             got |I|={}, |J|={}, reach={reach}",
            set_i.len(),
            set_j.len()
        )));
    }
    let (m0, n0) = base;
    // (1 - t_j/t_i) for the row form; (1 - t_i/t_j) for the column form.
    let ratio_term = |i: usize, j: usize| -> LaurentPoly {
        let (a, b) = if row { (j, i) } else { (i, j) };
        &LaurentPoly::one() - &LaurentPoly::monomial(
            {
                let mut key = vec![0i32; a.max(b) + 1];
                key[a] += 1;
                key[b] -= 1;
                key
            },
            Rat::from_integer(1.into()),
        )
    };
    let (far, near_first, near_second) = if row {
        ((m0 + 1, n0 + reach), (m0 + 1, n0), (m0, n0 + reach))
    } else {
        ((m0 + reach, n0 + 1), (m0, n0 + 1), (m0 + reach, n0))
    };
    let lhs = &shifted_cell(family, set_i, m0, n0) * &shifted_cell(family, set_j, far.0, far.1);
    let mut sum = RationalFunction::from_poly(lhs);
    for &i in set_i {
        let rest: Vec<usize> = set_i.iter().copied().filter(|&a| a != i).collect();
        let mut num = LaurentPoly::one();
        for &j in set_j {
            num = &num * &ratio_term(i, j);
        }
        let mut coeff = RationalFunction::from_poly(num);
        for &j in &rest {
            coeff = coeff.div_nonzero(&RationalFunction::from_poly(ratio_term(i, j)));
        }
        let mut with_i = set_j.to_vec();
        with_i.push(i);
        let prod = &shifted_cell(family, &rest, near_first.0, near_first.1)
            * &shifted_cell(family, &with_i, near_second.0, near_second.1);
        sum = &sum - &(&coeff * &RationalFunction::from_poly(prod));
    }
    Ok(sum)
}

/// Runs the exchange, contiguity, homogeneity, and Toda checks over every base
/// cell of the fundamental domain and every applicable variable combination.
pub fn verify_bilinear_system(family: &GridFamily) -> Vec<IdentityReport> {
    let l = family.spec().l() as i64;
    let nv = family.spec().num_vars();
    let mut out = Vec::new();
    for m in 0..l {
        for n in 0..l {
            let t0 = Instant::now();
            let r = homogeneity_residual(family, m, n);
            out.push(IdentityReport::from_poly(
                "euler-homogeneity",
                json!({"m": m, "n": n}),
                &r,
                t0,
            ));
            for i in 0..nv {
                let t0 = Instant::now();
                let r = hirota_shift_residual(family, m, n, i);
                out.push(IdentityReport::from_poly(
                    "hirota-shift",
                    json!({"m": m, "n": n, "i": i}),
                    &r,
                    t0,
                ));
                for j in 0..nv {
                    if j == i {
                        continue;
                    }
                    let t0 = Instant::now();
                    let r = mixed_shift_residual(family, m, n, i, j);
                    out.push(IdentityReport::from_poly(
                        "mixed-shift",
                        json!({"m": m, "n": n, "i": i, "j": j}),
                        &r,
                        t0,
                    ));
                    if i < j {
                        let t0 = Instant::now();
                        let r = pair_exchange_residual(family, m, n, i, j);
                        out.push(IdentityReport::from_poly(
                            "pair-exchange",
                            json!({"m": m, "n": n, "i": i, "j": j}),
                            &r,
                            t0,
                        ));
                        let t0 = Instant::now();
                        let r = toda_residual(family, m, n, i, j);
                        out.push(IdentityReport::from_poly(
                            "toda",
                            json!({"m": m, "n": n, "i": i, "j": j}),
                            &r,
                            t0,
                        ));
                    }
                }
            }
        }
    }
    out
}

fn subsets(universe: usize) -> Vec<Vec<usize>> {
    (0..(1u32 << universe))
        .map(|mask| (0..universe).filter(|&k| mask & (1 << k) != 0).collect())
        .collect()
}

/// Runs all three shift-difference families over every base cell and every
/// admissible pair of disjoint index sets.
pub fn verify_difference_system(family: &GridFamily) -> Vec<IdentityReport> {
    let l = family.spec().l() as i64;
    let nv = family.spec().num_vars();
    let mut out = Vec::new();
    for set_i in subsets(nv) {
        if set_i.is_empty() {
            continue;
        }
        for set_j in subsets(nv) {
            if set_i.iter().any(|a| set_j.contains(a)) {
                continue;
            }
            let excess = set_i.len() as i64 - set_j.len() as i64;
            if excess < 1 {
                continue;
            }
            for m0 in 0..l {
                for n0 in 0..l {
                    // Diagonal family: every split m + n = excess - 2.
                    if excess >= 2 {
                        for m in 0..=(excess - 2) {
                            let n = excess - 2 - m;
                            let t0 = Instant::now();
                            let r = difference_diagonal_residual(
                                family,
                                (m0, n0),
                                m,
                                n,
                                &set_i,
                                &set_j,
                            )
                            .expect("admissible instance");
                            out.push(IdentityReport::from_ratfun(
                                "difference-diagonal",
                                json!({"base": [m0, n0], "m": m, "n": n,
                                       "I": set_i, "J": set_j}),
                                &r,
                                t0,
                            ));
                        }
                    }
                    // Row and column families: reach = excess - 1.
                    let reach = excess - 1;
                    let t0 = Instant::now();
                    let r = difference_row_residual(family, (m0, n0), reach, &set_i, &set_j)
                        .expect("admissible instance");
                    out.push(IdentityReport::from_ratfun(
                        "difference-row",
                        json!({"base": [m0, n0], "n": reach, "I": set_i, "J": set_j}),
                        &r,
                        t0,
                    ));
                    let t0 = Instant::now();
                    let r = difference_column_residual(family, (m0, n0), reach, &set_i, &set_j)
                        .expect("admissible instance");
                    out.push(IdentityReport::from_ratfun(
                        "difference-column",
                        json!({"base": [m0, n0], "m": reach, "I": set_i, "J": set_j}),
                        &r,
                        t0,
                    ));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::character::GridSpec;

    fn small_family() -> GridFamily {
        // L = 2 grid whose cells are s_{0,n} = th_0 t_0 + th_1 t_1, s_{1,n} = 1.
        let spec = GridSpec::new(
            vec![rat(3, 2), rat(-2, 3)],
            vec![0, 1],
            vec![0, 0],
        )
        .unwrap();
        GridFamily::new(spec)
    }

    fn l3_family() -> GridFamily {
        let spec = GridSpec::new(
            vec![rat(5, 3), rat(-3, 4)],
            vec![0, 1, 1],
            vec![0, 0, 1],
        )
        .unwrap();
        GridFamily::new(spec)
    }

    #[test]
    fn bilinear_system_on_small_grid() {
        let family = small_family();
        let reports = verify_bilinear_system(&family);
        assert!(!reports.is_empty());
        for r in &reports {
            assert!(r.pass, "failed: {} {:?} ({} terms)", r.id, r.indices, r.residual_terms);
        }
    }

    #[test]
    fn bilinear_system_on_period_three_grid() {
        let family = l3_family();
        let reports = verify_bilinear_system(&family);
        for r in &reports {
            assert!(r.pass, "failed: {} {:?}", r.id, r.indices);
        }
    }

    #[test]
    fn difference_system_on_small_grid() {
        let family = small_family();
        let reports = verify_difference_system(&family);
        assert!(!reports.is_empty());
        for r in &reports {
            assert!(r.pass, "failed: {} {:?}", r.id, r.indices);
        }
    }

    #[test]
    fn difference_system_on_period_three_grid() {
        let family = l3_family();
        let reports = verify_difference_system(&family);
        for r in &reports {
            assert!(r.pass, "failed: {} {:?}", r.id, r.indices);
        }
    }

    #[test]
    fn toda_sides_are_individually_nonzero() {
        // Guards against a vacuous 0 = 0 check: on the small grid the double
        // Hirota derivative of s_{0,0} with itself is -2 th_0 th_1 != 0.
        let family = small_family();
        let s = family.base().sigma(0, 0).clone();
        let dd = LaurentPoly::hirota2(0, 1, &s, &s);
        assert!(!dd.is_zero());
        assert_eq!(dd.as_constant(), Some(rat(3, 2) * rat(-2, 3) * rat(-2, 1)));
    }

    #[test]
    fn pair_exchange_is_antisymmetric() {
        let family = l3_family();
        let a = pair_exchange_residual(&family, 0, 1, 0, 1);
        let b = pair_exchange_residual(&family, 0, 1, 1, 0);
        assert_eq!(a, -&b);
    }

    #[test]
    fn difference_relations_reject_bad_shapes() {
        let family = small_family();
        // Cardinality mismatch.
        assert!(difference_diagonal_residual(&family, (0, 0), 0, 0, &[0], &[]).is_err());
        // Overlapping index sets.
        assert!(difference_row_residual(&family, (0, 0), 0, &[0], &[0]).is_err());
        // Out-of-range variable.
        assert!(difference_column_residual(&family, (0, 0), 0, &[5], &[]).is_err());
    }

    #[test]
    fn report_serialization_shape() {
        let family = small_family();
        let reports = verify_bilinear_system(&family);
        let v = serde_json::to_value(&reports[0]).unwrap();
        for key in ["id", "indices", "pass", "residual_terms", "timing_ms"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
