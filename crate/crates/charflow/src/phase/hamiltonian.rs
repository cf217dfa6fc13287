//! Polynomial Hamiltonians for the reduced deformation flows.
//!
//! The phase space has canonical coordinates q_n^(i), p_n^(i) with
//! 1 <= n <= L-1 and 1 <= i <= N; each independent variable s_i drives one
//! flow with Hamiltonian H_i, polynomial in the canonical variables with
//! coefficients rational in s_1..s_N. Boundary symbols are eliminated through
//! q_n^(0) = q_0^(i) = 1, p_n^(0) = kappa_n - sum_i q_n^(i) p_n^(i), and
//! p_0^(i) = theta_i - sum_n q_n^(i) p_n^(i), so H_i is an honest polynomial
//! in the 2N(L-1) coordinates.

use serde_json::json;
use std::time::Instant;

use crate::algebra::{rat_int, LaurentPoly, Rat, RationalFunction, SparsePoly, MAX_VARS};
use crate::character::CanonicalParams;
use crate::error::{Error, Result};
use crate::identity::IdentityReport;
use crate::phase::SigmaPhase;

/// Symbolic polynomial in the canonical coordinates, coefficients rational in s.
pub type PhasePoly = SparsePoly<RationalFunction>;

/// Index bookkeeping for the canonical coordinates of a given system size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonicalChart {
    l: usize,
    n: usize,
}

impl CanonicalChart {
    pub fn new(l: usize, n: usize) -> Result<Self> {
        if l < 2 || n < 1 {
            return Err(Error::invalid(format!(
                "canonical chart needs period >= 2 and at least one variable; got ({l}, {n})"
            )));
        }
        let dim = 2 * n * (l - 1);
        if dim > MAX_VARS {
            return Err(Error::invalid(format!(
                "symbolic canonical layer supports at most {MAX_VARS} coordinates; \
                 ({l}, {n}) needs {dim}"
            )));
        }
        Ok(CanonicalChart { l, n })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of canonical coordinates, 2N(L-1).
    pub fn dim(&self) -> usize {
        2 * self.n * (self.l - 1)
    }

    /// Variable index of q_slot^(i); slot in 1..L-1, i in 1..N.
    pub fn q_index(&self, slot: usize, i: usize) -> usize {
        assert!((1..self.l).contains(&slot) && (1..=self.n).contains(&i));
        (slot - 1) * self.n + (i - 1)
    }

    /// Variable index of p_slot^(i).
    pub fn p_index(&self, slot: usize, i: usize) -> usize {
        self.n * (self.l - 1) + self.q_index(slot, i)
    }

    /// Column names in storage order: all q then all p, slot-major.
    pub fn var_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim());
        for sym in ["q", "p"] {
            for slot in 1..self.l {
                for i in 1..=self.n {
                    names.push(format!("{sym}_{slot}_{i}"));
                }
            }
        }
        names
    }

    /// Symbolic q_slot^(i) with boundary slots eliminated.
    pub fn ext_q(&self, i: usize, slot: usize) -> PhasePoly {
        if i == 0 || slot == 0 {
            PhasePoly::one()
        } else {
            PhasePoly::var(self.q_index(slot, i))
        }
    }

    /// Symbolic p_slot^(i) with boundary slots eliminated using the given
    /// parameter values.
    pub fn ext_p(&self, params: &CanonicalParams, i: usize, slot: usize) -> PhasePoly {
        match (i, slot) {
            (1.., 1..) => PhasePoly::var(self.p_index(slot, i)),
            (0, 1..) => {
                // kappa_slot - sum_{i >= 1} q_slot^(i) p_slot^(i)
                let mut out =
                    PhasePoly::constant(RationalFunction::constant(params.kappa_at(slot as i64)));
                for i in 1..=self.n {
                    out = out.sub(&self.qp_product(i, slot));
                }
                out
            }
            (1.., 0) => {
                // theta_i - sum_{slot >= 1} q_slot^(i) p_slot^(i)
                let mut out =
                    PhasePoly::constant(RationalFunction::constant(params.theta()[i].clone()));
                for slot in 1..self.l {
                    out = out.sub(&self.qp_product(i, slot));
                }
                out
            }
            (0, 0) => {
                // kappa_0 - sum_{i >= 1} p_0^(i); agrees with the row rule
                // theta_0 - sum_{slot >= 1} p_slot^(0) by the parameter sum rules.
                let mut out =
                    PhasePoly::constant(RationalFunction::constant(params.kappa_at(0)));
                for i in 1..=self.n {
                    out = out.sub(&self.ext_p(params, i, 0));
                }
                out
            }
        }
    }

    fn qp_product(&self, i: usize, slot: usize) -> PhasePoly {
        PhasePoly::var(self.q_index(slot, i)).mul(&PhasePoly::var(self.p_index(slot, i)))
    }
}

/// `s_j` as a rational function in the s-variable space (s_0 = 1).
pub fn s_symbol(j: usize) -> RationalFunction {
    if j == 0 {
        RationalFunction::one()
    } else {
        RationalFunction::var(j - 1)
    }
}

/// The Hamiltonians of one system size together with their partial derivatives.
pub struct HamiltonianSystem {
    chart: CanonicalChart,
    params: CanonicalParams,
    /// h[i-1] = H_i as a polynomial in the canonical coordinates.
    h: Vec<PhasePoly>,
    /// dh_dvar[i-1][v] = dH_i / d(coordinate v).
    dh_dvar: Vec<Vec<PhasePoly>>,
}

impl HamiltonianSystem {
    pub fn new(params: CanonicalParams) -> Result<Self> {
        let chart = CanonicalChart::new(params.l(), params.n())?;
        let mut h = Vec::with_capacity(chart.n());
        for i in 1..=chart.n() {
            h.push(build_h(&chart, &params, i)?);
        }
        let dh_dvar = h
            .iter()
            .map(|hi| (0..chart.dim()).map(|v| hi.derivative(v)).collect())
            .collect();
        Ok(HamiltonianSystem { chart, params, h, dh_dvar })
    }

    pub fn chart(&self) -> &CanonicalChart {
        &self.chart
    }

    pub fn params(&self) -> &CanonicalParams {
        &self.params
    }

    /// H_i for i in 1..=N.
    pub fn h(&self, i: usize) -> &PhasePoly {
        &self.h[i - 1]
    }

    /// dH_i/dq_slot^(j).
    pub fn dh_dq(&self, i: usize, slot: usize, j: usize) -> &PhasePoly {
        &self.dh_dvar[i - 1][self.chart.q_index(slot, j)]
    }

    /// dH_i/dp_slot^(j).
    pub fn dh_dp(&self, i: usize, slot: usize, j: usize) -> &PhasePoly {
        &self.dh_dvar[i - 1][self.chart.p_index(slot, j)]
    }

    /// Evaluates any phase polynomial at rational s and state values.
    pub fn eval_rat(&self, poly: &PhasePoly, svals: &[Rat], state: &[Rat]) -> Result<Rat> {
        poly.eval(state, &|c| c.eval_rat(svals))
    }

    /// Evaluates at float s and state values.
    pub fn eval_f64(&self, poly: &PhasePoly, svals: &[f64], state: &[f64]) -> Result<f64> {
        poly.eval(state, &|c| c.eval_f64(svals))
    }

    /// Time derivative of the state along the s_i flow at a float point:
    /// dq/ds_i = dH_i/dp, dp/ds_i = -dH_i/dq.
    pub fn flow_f64(&self, i: usize, svals: &[f64], state: &[f64]) -> Result<Vec<f64>> {
        let half = self.chart.dim() / 2;
        let mut out = vec![0.0; self.chart.dim()];
        for v in 0..half {
            // coordinate v is a q; its conjugate momentum has index half + v
            out[v] = self.eval_f64(&self.dh_dvar[i - 1][half + v], svals, state)?;
            out[half + v] = -self.eval_f64(&self.dh_dvar[i - 1][v], svals, state)?;
        }
        Ok(out)
    }

    /// Substitutes the similarity solution from a character grid into the
    /// canonical equations and returns one report per equation: the residual
    /// `d(coordinate)/ds_j - (+-) dH_j/d(conjugate)` as an exact rational
    /// function of the deformation variables, which must vanish.
    pub fn canonical_residuals(&self, phase: &SigmaPhase) -> Result<Vec<IdentityReport>> {
        let l = self.chart.l();
        let nn = self.chart.n();
        let nvars_t = nn + 1;
        // Lift of s-space coefficients: s_k is the ratio power (t_k/t_0)^L,
        // which keeps s_0 = 1 automatic.
        let t_powers: Vec<RationalFunction> = (1..nvars_t)
            .map(|k| {
                let mut key = vec![0i32; k + 1];
                key[0] = -(l as i32);
                key[k] = l as i32;
                RationalFunction::from_poly(LaurentPoly::monomial(key, rat_int(1)))
            })
            .collect();
        // Canonical state as rational functions of t.
        let mut state = Vec::with_capacity(self.chart.dim());
        for sym in 0..2 {
            for slot in 1..l {
                for i in 1..=nn {
                    state.push(if sym == 0 {
                        phase.q(i, slot as i64)?
                    } else {
                        phase.p(i, slot as i64)?
                    });
                }
            }
        }
        let lift = |c: &RationalFunction| c.eval_gen(&t_powers);
        let mut out = Vec::new();
        for j in 1..=nn {
            // d/ds_j = (t_0^L / (L t_j^{L-1})) d/dt_j on t-space functions.
            let ds = |x: &RationalFunction| -> RationalFunction {
                let mut key = vec![0i32; j + 1];
                key[0] = l as i32;
                key[j] = 1 - l as i32;
                let scale = RationalFunction::from_poly(LaurentPoly::monomial(
                    key,
                    Rat::new(1.into(), (l as i64).into()),
                ));
                &scale * &x.derivative(j)
            };
            for slot in 1..l {
                for i in 1..=nn {
                    let t0 = Instant::now();
                    let qi = self.chart.q_index(slot, i);
                    let pi = self.chart.p_index(slot, i);
                    let rhs_q = self.dh_dvar[j - 1][pi].eval(&state, &lift)?;
                    let r_q = &ds(&state[qi]) - &rhs_q;
                    out.push(IdentityReport {
                        id: "canonical-flow-q".to_string(),
                        indices: json!({"j": j, "slot": slot, "i": i}),
                        pass: r_q.is_zero(),
                        residual_terms: r_q.num().num_terms(),
                        timing_ms: t0.elapsed().as_millis(),
                    });
                    let t0 = Instant::now();
                    let rhs_p = self.dh_dvar[j - 1][qi].eval(&state, &lift)?;
                    let r_p = &ds(&state[pi]) + &rhs_p;
                    out.push(IdentityReport {
                        id: "canonical-flow-p".to_string(),
                        indices: json!({"j": j, "slot": slot, "i": i}),
                        pass: r_p.is_zero(),
                        residual_terms: r_p.num().num_terms(),
                        timing_ms: t0.elapsed().as_millis(),
                    });
                }
            }
        }
        Ok(out)
    }

    /// The double sum `sum_{m,n} q_m^(i) p_m^(j) q_n^(j) p_n^(i)` over the full
    /// period, which equals the trace of the product of the two rank-one
    /// residue matrices.
    pub fn trace_pair(&self, i: usize, j: usize) -> PhasePoly {
        trace_pair(&self.chart, &self.params, i, j)
    }
}

fn trace_pair(chart: &CanonicalChart, params: &CanonicalParams, i: usize, j: usize) -> PhasePoly {
    let mut out = PhasePoly::zero();
    for m in 0..chart.l() {
        for n in 0..chart.l() {
            let term = chart
                .ext_q(i, m)
                .mul(&chart.ext_p(params, j, m))
                .mul(&chart.ext_q(j, n))
                .mul(&chart.ext_p(params, i, n));
            out = out.add(&term);
        }
    }
    out
}

fn build_h(chart: &CanonicalChart, params: &CanonicalParams, i: usize) -> Result<PhasePoly> {
    let l = chart.l();
    let n_vars = chart.n();
    // sum_n e_n q_n^(i) p_n^(i)
    let mut si_h = PhasePoly::zero();
    for slot in 0..l {
        let term = chart
            .ext_q(i, slot)
            .mul(&chart.ext_p(params, i, slot))
            .scale(&RationalFunction::constant(params.e_at(slot as i64)));
        si_h = si_h.add(&term);
    }
    // sum_{j=0..N} sum_{m<n} q_m^(i) p_m^(j) q_n^(j) p_n^(i)
    for j in 0..=n_vars {
        for m in 0..l {
            for n in (m + 1)..l {
                let term = chart
                    .ext_q(i, m)
                    .mul(&chart.ext_p(params, j, m))
                    .mul(&chart.ext_q(j, n))
                    .mul(&chart.ext_p(params, i, n));
                si_h = si_h.add(&term);
            }
        }
    }
    // sum_{j != i} s_j/(s_i - s_j) * (full double sum)
    for j in 0..=n_vars {
        if j == i {
            continue;
        }
        let denom = &s_symbol(i) - &s_symbol(j);
        if denom.is_zero() {
            return Err(Error::invalid("coincident deformation variables"));
        }
        let factor = s_symbol(j).div_nonzero(&denom);
        si_h = si_h.add(&trace_pair(chart, params, i, j).scale(&factor));
    }
    // H_i = (s_i H_i) / s_i
    let inv_si = RationalFunction::from_poly(LaurentPoly::monomial_pow(i - 1, -1, rat_int(1)));
    Ok(si_h.scale(&inv_si))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::character::{GridFamily, GridSpec};
    use crate::identity::all_pass;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params_21() -> CanonicalParams {
        // e = (1/2, 0), kappa = (kappa_0, kappa_1), generic rational values.
        CanonicalParams::new(
            vec![rat(1, 2), rat(0, 1)],
            vec![rat(11, 12), rat(-1, 12)],
            vec![rat(3, 2), rat(-2, 3)],
        )
        .unwrap()
    }

    #[test]
    fn chart_indexing_round_trip() {
        let chart = CanonicalChart::new(3, 1).unwrap();
        assert_eq!(chart.dim(), 4);
        assert_eq!(chart.var_names(), vec!["q_1_1", "q_2_1", "p_1_1", "p_2_1"]);
        assert_eq!(chart.q_index(1, 1), 0);
        assert_eq!(chart.q_index(2, 1), 1);
        assert_eq!(chart.p_index(1, 1), 2);
        assert!(CanonicalChart::new(4, 2).is_err());
    }

    #[test]
    fn extended_entries_satisfy_sum_rules() {
        let chart = CanonicalChart::new(2, 2).unwrap();
        let params = CanonicalParams::new(
            vec![rat(1, 2), rat(0, 1)],
            vec![rat(5, 4), rat(-3, 4)],
            vec![rat(1, 3), rat(-5, 6), rat(1, 1)],
        )
        .unwrap();
        // Row rule: sum_slot q_slot^(i) p_slot^(i) = theta_i for every i.
        for i in 0..=2 {
            let mut sum = PhasePoly::zero();
            for slot in 0..2 {
                sum = sum.add(&chart.ext_q(i, slot).mul(&chart.ext_p(&params, i, slot)));
            }
            let expect = PhasePoly::constant(RationalFunction::constant(
                params.theta()[i].clone(),
            ));
            assert_eq!(sum, expect, "row sum at i={i}");
        }
        // Column rule: sum_i q_slot^(i) p_slot^(i) = kappa_slot.
        for slot in 0..2 {
            let mut sum = PhasePoly::zero();
            for i in 0..=2 {
                sum = sum.add(&chart.ext_q(i, slot).mul(&chart.ext_p(&params, i, slot)));
            }
            let expect = PhasePoly::constant(RationalFunction::constant(
                params.kappa_at(slot as i64),
            ));
            assert_eq!(sum, expect, "column sum at slot={slot}");
        }
    }

    #[test]
    fn hamiltonian_at_phase_origin() {
        // With all coordinates zero, only boundary terms survive:
        // H = e_0 theta_1 / s + (kappa_0 - theta_1) theta_1 / (s (s - 1)).
        let params = params_21();
        let sys = HamiltonianSystem::new(params.clone()).unwrap();
        let origin = vec![Rat::from_integer(0.into()); 2];
        let theta1 = params.theta()[1].clone();
        let e0 = params.e_at(0);
        let k0 = params.kappa_at(0);
        for sv in [rat(7, 3), rat(-5, 2), rat(9, 4)] {
            let got = sys.eval_rat(sys.h(1), &[sv.clone()], &origin).unwrap();
            let expect = e0.clone() * &theta1 / &sv
                + (k0.clone() - &theta1) * &theta1
                    / (sv.clone() * (sv - Rat::from_integer(1.into())));
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn mixed_s_derivatives_are_symmetric() {
        // (d/ds_j) H_i = (d/ds_i) H_j = trace_pair(i,j) / (s_i - s_j)^2,
        // differentiating only the explicit s-dependence.
        let params = CanonicalParams::new(
            vec![rat(1, 2), rat(0, 1)],
            vec![rat(5, 4), rat(-3, 4)],
            vec![rat(1, 3), rat(-5, 6), rat(1, 1)],
        )
        .unwrap();
        let sys = HamiltonianSystem::new(params).unwrap();
        let d12 = sys.h(1).map_coeffs(&|c| Ok(c.derivative(1))).unwrap();
        let d21 = sys.h(2).map_coeffs(&|c| Ok(c.derivative(0))).unwrap();
        assert_eq!(d12, d21);
        let diff = &s_symbol(1) - &s_symbol(2);
        let factor = RationalFunction::one().div_nonzero(&(&diff * &diff));
        let expect = sys.trace_pair(1, 2).scale(&factor);
        assert_eq!(d12, expect);
    }

    #[test]
    fn canonical_equations_hold_on_grid_solution() {
        let specs = [
            GridSpec::new(vec![rat(3, 2), rat(-2, 3)], vec![0, 1], vec![0, 0]).unwrap(),
            GridSpec::new(vec![rat(5, 3), rat(-3, 4)], vec![0, 1, 1], vec![0, 0, 1]).unwrap(),
            GridSpec::new(vec![rat(1, 3), rat(-5, 6), rat(1, 1)], vec![0, 1], vec![0, 0])
                .unwrap(),
        ];
        for spec in specs {
            let label = format!("L={} N={}", spec.l(), spec.n());
            let family = GridFamily::new(spec);
            let phase = SigmaPhase::new(&family).unwrap();
            let params = CanonicalParams::from_grid(&family.base());
            let sys = HamiltonianSystem::new(params).unwrap();
            let reports = sys.canonical_residuals(&phase).unwrap();
            assert!(!reports.is_empty());
            for r in &reports {
                assert!(
                    r.pass,
                    "{label} failed: {} {:?} ({} terms)",
                    r.id, r.indices, r.residual_terms
                );
            }
            assert!(all_pass(&reports));
        }
    }

    #[test]
    fn float_partials_match_central_differences() {
        let sys = HamiltonianSystem::new(params_21()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(131);
        for _ in 0..20 {
            let svals = [1.7 + rng.random_range(0.0..1.0)];
            let state: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            for v in 0..2 {
                let h_step = 1e-6;
                let mut hi = state.clone();
                let mut lo = state.clone();
                hi[v] += h_step;
                lo[v] -= h_step;
                let num = (sys.eval_f64(sys.h(1), &svals, &hi).unwrap()
                    - sys.eval_f64(sys.h(1), &svals, &lo).unwrap())
                    / (2.0 * h_step);
                let sym = sys
                    .eval_f64(&sys.dh_dvar[0][v], &svals, &state)
                    .unwrap();
                assert!(
                    (num - sym).abs() < 1e-6 * (1.0 + sym.abs()),
                    "partial {v}: {num} vs {sym}"
                );
            }
        }
    }
}
