//! Nonlinear dependent variables carried by a character grid: the
//! multiplicative ratios f, the logarithmic-derivative combinations g, the
//! auxiliary pair U, V, and the canonical coordinates q, p.
//!
//! Everything here is an exact rational function of the deformation variables
//! t_0..t_N. The residual methods return symbolic expressions that vanish
//! identically when the grid satisfies the governing differential system; a
//! nonzero residual is a proof of failure, not a numerical artifact.

use serde_json::json;
use std::time::Instant;

use crate::algebra::{rat_int, LaurentPoly, Rat, RationalFunction};
use crate::character::GridFamily;
use crate::error::Result;
use crate::identity::IdentityReport;

/// View of a grid family exposing the derived nonlinear variables.
pub struct SigmaPhase<'f> {
    family: &'f GridFamily,
}

impl<'f> SigmaPhase<'f> {
    pub fn new(family: &'f GridFamily) -> Result<Self> {
        family.base().require_nonzero()?;
        Ok(SigmaPhase { family })
    }

    pub fn family(&self) -> &GridFamily {
        self.family
    }

    fn num_vars(&self) -> usize {
        self.family.spec().num_vars()
    }

    pub fn l(&self) -> usize {
        self.family.spec().l()
    }

    fn theta(&self, i: usize) -> Rat {
        self.family.spec().theta()[i].clone()
    }

    /// Grid cell with theta shifted by `base` plus the listed increments.
    fn cell(&self, base: &[i64], extra: &[(usize, i64)], m: i64, n: i64) -> LaurentPoly {
        let mut off = if base.is_empty() {
            vec![0i64; self.num_vars()]
        } else {
            base.to_vec()
        };
        for &(k, d) in extra {
            off[k] += d;
        }
        self.family.shifted(&off).sigma(m, n).clone()
    }

    /// The ratio `f^(i)_{m,n}` at theta shifted by `base`.
    pub fn f_at(&self, i: usize, m: i64, n: i64, base: &[i64]) -> Result<RationalFunction> {
        let num = &self.cell(base, &[(i, 1)], m, n - 1) * &self.cell(base, &[], m - 1, n - 1);
        let den = &self.cell(base, &[(i, 1)], m - 1, n) * &self.cell(base, &[], m, n - 2);
        RationalFunction::from_ratio(num, den)
    }

    pub fn f(&self, i: usize, m: i64, n: i64) -> Result<RationalFunction> {
        self.f_at(i, m, n, &[])
    }

    /// `g^(i)_{m,n}` through the theta-shift formula
    /// `theta_i s_{m-1,n-1}^{-i} s_{m,n}^{+i} / (s_{m,n-1} s_{m-1,n})`.
    pub fn g_at(&self, i: usize, m: i64, n: i64, base: &[i64]) -> Result<RationalFunction> {
        let num = &self.cell(base, &[(i, -1)], m - 1, n - 1) * &self.cell(base, &[(i, 1)], m, n);
        let den = &self.cell(base, &[], m, n - 1) * &self.cell(base, &[], m - 1, n);
        let mut theta = self.theta(i);
        if let Some(&delta) = base.get(i) {
            theta += Rat::from_integer(delta.into());
        }
        Ok(RationalFunction::from_ratio(num, den)?.scale(&theta))
    }

    pub fn g(&self, i: usize, m: i64, n: i64) -> Result<RationalFunction> {
        self.g_at(i, m, n, &[])
    }

    /// `g^(i)_{m,n}` through the Hirota-derivative formula
    /// `t_i D_i s_{m,n-1}.s_{m-1,n} / (s_{m,n-1} s_{m-1,n}) + theta_i`.
    pub fn g_from_hirota(&self, i: usize, m: i64, n: i64) -> Result<RationalFunction> {
        let a = self.cell(&[], &[], m, n - 1);
        let b = self.cell(&[], &[], m - 1, n);
        let num = &LaurentPoly::var(i) * &LaurentPoly::hirota(i, &a, &b);
        let den = &a * &b;
        let ratio = RationalFunction::from_ratio(num, den)?;
        Ok(&ratio + &RationalFunction::constant(self.theta(i)))
    }

    /// Auxiliary `U^(i,j)_{m,n}` from its defining cell formula.
    pub fn u(&self, i: usize, j: usize, m: i64, n: i64) -> Result<RationalFunction> {
        assert!(i != j, "need distinct variables");
        let num = &self.cell(&[], &[(i, -1), (j, 1)], m, n - 1) * &self.cell(&[], &[(i, 1)], m, n);
        let den = &self.cell(&[], &[], m, n - 1) * &self.cell(&[], &[(j, 1)], m, n);
        let ratio = RationalFunction::from_ratio(num, den)?;
        let prefactor = RationalFunction::from_ratio(
            LaurentPoly::var(j).scale(&self.theta(i)),
            &LaurentPoly::var(i) - &LaurentPoly::var(j),
        )?;
        Ok(&prefactor * &ratio)
    }

    /// Auxiliary `V^(i,j)_{m,n}` from its defining cell formula.
    pub fn v(&self, i: usize, j: usize, m: i64, n: i64) -> Result<RationalFunction> {
        assert!(i != j, "need distinct variables");
        let num = &self.cell(&[], &[(i, -1), (j, 1)], m - 1, n) * &self.cell(&[], &[(i, 1)], m, n);
        let den = &self.cell(&[], &[], m - 1, n) * &self.cell(&[], &[(j, 1)], m, n);
        let ratio = RationalFunction::from_ratio(num, den)?;
        let prefactor = RationalFunction::from_ratio(
            LaurentPoly::var(i).scale(&self.theta(i)),
            &LaurentPoly::var(i) - &LaurentPoly::var(j),
        )?;
        Ok(&prefactor * &ratio)
    }

    /// `U^(i,j)_{m,n}` reconstructed from f and g alone by unwinding the
    /// antidiagonal recursion over one period.
    pub fn u_from_fg(&self, i: usize, j: usize, m: i64, n: i64) -> Result<RationalFunction> {
        self.uv_from_fg(i, j, m, n, false)
    }

    /// `V^(i,j)_{m,n}` reconstructed from f and g alone.
    pub fn v_from_fg(&self, i: usize, j: usize, m: i64, n: i64) -> Result<RationalFunction> {
        self.uv_from_fg(i, j, m, n, true)
    }

    fn uv_from_fg(
        &self,
        i: usize,
        j: usize,
        m: i64,
        n: i64,
        is_v: bool,
    ) -> Result<RationalFunction> {
        let l = self.l() as i64;
        // 1 / ((t_i/t_j)^L - 1)
        let tl = |v: usize| LaurentPoly::monomial_pow(v, l as i32, rat_int(1));
        let prefactor = RationalFunction::from_ratio(tl(j), &tl(i) - &tl(j))?;
        let mut sum = RationalFunction::zero();
        for b in 1..=l {
            let g = if is_v {
                self.g(i, m - b, n + b)?
            } else {
                self.g(i, m - b + 1, n + b - 1)?
            };
            let mut term = g;
            let a_range = if is_v { 0..b } else { 1..b };
            for a in a_range {
                let (fm, fn_) = if is_v {
                    (m - a, n + a + 1)
                } else {
                    (m - a + 1, n + a)
                };
                let fi = &RationalFunction::var(i) * &self.f(i, fm, fn_)?;
                let fj = &RationalFunction::var(j) * &self.f(j, fm, fn_)?;
                term = &term * &fi.div_nonzero(&fj);
            }
            sum = &sum + &term;
        }
        Ok(&prefactor * &sum)
    }

    /// The constant `kappa_{m,n} = d_{m,n-1} - d_{m-1,n} + sum theta`.
    pub fn kappa_cell(&self, m: i64, n: i64) -> Rat {
        let grid = self.family.base();
        Rat::from_integer((grid.degree(m, n - 1) - grid.degree(m - 1, n)).into())
            + self.family.spec().theta_sum()
    }

    /// Canonical coordinate `q_n^(i)`; index 0 in either slot gives 1.
    pub fn q(&self, i: usize, n: i64) -> Result<RationalFunction> {
        // (t_i/t_0)^n s_{n,-n}^{+i} s_{0,0}^{+0} / (s_{0,0}^{+i} s_{n,-n}^{+0})
        let mono = LaurentPoly::from_terms(vec![(
            {
                let mut key = vec![0i32; i + 1];
                key[0] -= n as i32;
                key[i] += n as i32;
                key
            },
            rat_int(1),
        )]);
        let num = &self.cell(&[], &[(i, 1)], n, -n) * &self.cell(&[], &[(0, 1)], 0, 0);
        let den = &self.cell(&[], &[(0, 1)], n, -n) * &self.cell(&[], &[(i, 1)], 0, 0);
        Ok(&RationalFunction::from_poly(mono) * &RationalFunction::from_ratio(num, den)?)
    }

    /// Canonical momentum `p_n^(i) = g^(i)_{n,-n} / (L q_n^(i))`.
    pub fn p(&self, i: usize, n: i64) -> Result<RationalFunction> {
        let l = Rat::from_integer((self.l() as i64).into());
        let g = self.g(i, n, -n)?;
        let q = self.q(i, n)?;
        Ok(g.div_nonzero(&q).scale(&l.recip()))
    }
}

/// Residuals of the closed differential system satisfied by f and g at cell
/// (m, n): the t_i-flow of f, the cross t_j-flow of f, and both flows of g.
pub fn g_system_residuals(
    phase: &SigmaPhase,
    m: i64,
    n: i64,
) -> Result<Vec<(String, serde_json::Value, RationalFunction)>> {
    let nv = phase.num_vars();
    let mut out = Vec::new();
    for i in 0..nv {
        let f_mn = phase.f(i, m, n)?;
        let g_low = phase.g(i, m, n - 1)?;
        // t_i df/dt_i = (kappa_{m,n} - g^(i)_{m,n-1}
        //               + sum_{j != i} (U^(j,i)_{m-1,n} - V^(j,i)_{m,n-1})) f^(i)_{m,n}
        let mut coeff =
            &RationalFunction::constant(phase.kappa_cell(m, n)) - &g_low;
        for j in 0..nv {
            if j == i {
                continue;
            }
            coeff = &coeff + &(&phase.u(j, i, m - 1, n)? - &phase.v(j, i, m, n - 1)?);
        }
        let lhs = &RationalFunction::var(i) * &f_mn.derivative(i);
        out.push((
            "flow-f-own".to_string(),
            json!({"m": m, "n": n, "i": i}),
            &lhs - &(&coeff * &f_mn),
        ));
        // Cross flows: t_j df^(i)/dt_j = (-g^(j)_{m,n-1} - U^(j,i)_{m-1,n}
        //                                 + V^(j,i)_{m,n-1}) f^(i)_{m,n}
        for j in 0..nv {
            if j == i {
                continue;
            }
            let coeff = &(&phase.v(j, i, m, n - 1)? - &phase.u(j, i, m - 1, n)?)
                - &phase.g(j, m, n - 1)?;
            let lhs = &RationalFunction::var(j) * &f_mn.derivative(j);
            out.push((
                "flow-f-cross".to_string(),
                json!({"m": m, "n": n, "i": i, "j": j}),
                &lhs - &(&coeff * &f_mn),
            ));
        }
        // t_i dg^(i)/dt_i = -sum_{j != i} (U^(i,j) g^(j) + V^(j,i) g^(i)) at (m,n)
        let g_mn = phase.g(i, m, n)?;
        let mut rhs = RationalFunction::zero();
        for j in 0..nv {
            if j == i {
                continue;
            }
            rhs = &rhs
                - &(&(&phase.u(i, j, m, n)? * &phase.g(j, m, n)?)
                    + &(&phase.v(j, i, m, n)? * &g_mn));
        }
        let lhs = &RationalFunction::var(i) * &g_mn.derivative(i);
        out.push((
            "flow-g-own".to_string(),
            json!({"m": m, "n": n, "i": i}),
            &lhs - &rhs,
        ));
        // t_j dg^(i)/dt_j = U^(i,j) g^(j) + V^(j,i) g^(i) at (m,n)
        for j in 0..nv {
            if j == i {
                continue;
            }
            let rhs = &(&phase.u(i, j, m, n)? * &phase.g(j, m, n)?)
                + &(&phase.v(j, i, m, n)? * &g_mn);
            let lhs = &RationalFunction::var(j) * &g_mn.derivative(j);
            out.push((
                "flow-g-cross".to_string(),
                json!({"m": m, "n": n, "i": i, "j": j}),
                &lhs - &rhs,
            ));
        }
    }
    Ok(out)
}

/// Residuals of the antidiagonal conservation laws at cell (m, n):
/// `prod_{j=1..L} f^(i)_{m+j,n-j} = 1` and `sum_{j=1..L} g^(i)_{m+j,n-j} = L theta_i`.
pub fn conservation_residuals(
    phase: &SigmaPhase,
    m: i64,
    n: i64,
) -> Result<Vec<(String, serde_json::Value, RationalFunction)>> {
    let l = phase.l() as i64;
    let mut out = Vec::new();
    for i in 0..phase.num_vars() {
        let mut prod = RationalFunction::one();
        let mut sum = RationalFunction::zero();
        for j in 1..=l {
            prod = &prod * &phase.f(i, m + j, n - j)?;
            sum = &sum + &phase.g(i, m + j, n - j)?;
        }
        out.push((
            "conservation-f".to_string(),
            json!({"m": m, "n": n, "i": i}),
            &prod - &RationalFunction::one(),
        ));
        let target = Rat::from_integer(l.into()) * phase.theta(i);
        out.push((
            "conservation-g".to_string(),
            json!({"m": m, "n": n, "i": i}),
            &sum - &RationalFunction::constant(target),
        ));
    }
    Ok(out)
}

/// Residual of the parameter identity `sum_i g^(i)_{m,n} = kappa_{m,n}`.
pub fn kappa_identity_residual(phase: &SigmaPhase, m: i64, n: i64) -> Result<RationalFunction> {
    let mut sum = RationalFunction::zero();
    for i in 0..phase.num_vars() {
        sum = &sum + &phase.g(i, m, n)?;
    }
    Ok(&sum - &RationalFunction::constant(phase.kappa_cell(m, n)))
}

/// Residuals of the linear relations tying U, V to f and g at cell (m, n),
/// plus agreement of the antidiagonal-unwound forms with the cell formulas.
pub fn uv_relation_residuals(
    phase: &SigmaPhase,
    m: i64,
    n: i64,
) -> Result<Vec<(String, serde_json::Value, RationalFunction)>> {
    let nv = phase.num_vars();
    let mut out = Vec::new();
    for i in 0..nv {
        for j in 0..nv {
            if j == i {
                continue;
            }
            let idx = json!({"m": m, "n": n, "i": i, "j": j});
            let u = phase.u(i, j, m, n)?;
            let v = phase.v(i, j, m, n)?;
            // V - U = g^(i)_{m,n}
            out.push((
                "uv-difference".to_string(),
                idx.clone(),
                &(&v - &u) - &phase.g(i, m, n)?,
            ));
            // U_{m-1,n} t_i f^(i)_{m,n} = V_{m,n-1} t_j f^(j)_{m,n}
            let lhs = &(&phase.u(i, j, m - 1, n)? * &RationalFunction::var(i))
                * &phase.f(i, m, n)?;
            let rhs = &(&phase.v(i, j, m, n - 1)? * &RationalFunction::var(j))
                * &phase.f(j, m, n)?;
            out.push(("uv-ratio".to_string(), idx.clone(), &lhs - &rhs));
            // V_{m,n-1} - U_{m-1,n} = g^(i)_{m,n} at theta_j + 1
            let shift_j: Vec<i64> = (0..nv).map(|k| i64::from(k == j)).collect();
            out.push((
                "uv-shifted-difference".to_string(),
                idx.clone(),
                &(&phase.v(i, j, m, n - 1)? - &phase.u(i, j, m - 1, n)?)
                    - &phase.g_at(i, m, n, &shift_j)?,
            ));
            // U_{m,n} t_i f^(i)_{m,n}(theta_i - 1) = V_{m,n} t_j f^(j)_{m,n}(theta_i - 1)
            let shift_i: Vec<i64> = (0..nv).map(|k| -i64::from(k == i)).collect();
            let lhs = &(&u * &RationalFunction::var(i)) * &phase.f_at(i, m, n, &shift_i)?;
            let rhs = &(&v * &RationalFunction::var(j)) * &phase.f_at(j, m, n, &shift_i)?;
            out.push(("uv-shifted-ratio".to_string(), idx.clone(), &lhs - &rhs));
            // Unwound forms agree with the cell formulas.
            out.push((
                "u-recursion".to_string(),
                idx.clone(),
                &u - &phase.u_from_fg(i, j, m, n)?,
            ));
            out.push((
                "v-recursion".to_string(),
                idx,
                &v - &phase.v_from_fg(i, j, m, n)?,
            ));
        }
    }
    Ok(out)
}

/// Runs the full derived-variable certification over every base cell: the
/// closed f,g system, the conservation laws, the parameter identity, and the
/// U,V relations.
pub fn verify_flow_system(family: &GridFamily) -> Result<Vec<IdentityReport>> {
    let phase = SigmaPhase::new(family)?;
    let l = family.spec().l() as i64;
    let mut out = Vec::new();
    let mut push = |id: String, indices: serde_json::Value, r: RationalFunction, t0: Instant| {
        out.push(IdentityReport {
            id,
            indices,
            pass: r.is_zero(),
            residual_terms: r.num().num_terms(),
            timing_ms: t0.elapsed().as_millis(),
        });
    };
    for m in 0..l {
        for n in 0..l {
            let t0 = Instant::now();
            for (id, idx, r) in g_system_residuals(&phase, m, n)? {
                push(id, idx, r, t0);
            }
            let t0 = Instant::now();
            for (id, idx, r) in conservation_residuals(&phase, m, n)? {
                push(id, idx, r, t0);
            }
            let t0 = Instant::now();
            let r = kappa_identity_residual(&phase, m, n)?;
            push("kappa-identity".to_string(), json!({"m": m, "n": n}), r, t0);
            let t0 = Instant::now();
            for (id, idx, r) in uv_relation_residuals(&phase, m, n)? {
                push(id, idx, r, t0);
            }
        }
    }
    Ok(out)
}


#[cfg(test)]
trait ScaleByL {
    fn scale_by_l(self, l: i64) -> Rat;
}

#[cfg(test)]
impl ScaleByL for Rat {
    fn scale_by_l(self, l: i64) -> Rat {
        self / Rat::from_integer(l.into())
    }
}
