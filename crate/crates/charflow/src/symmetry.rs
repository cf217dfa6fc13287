//! Birational symmetries of the coupled Hamiltonian systems.
//!
//! The systems of one size (L, N) admit a group of birational canonical
//! transformations acting simultaneously on the parameters (e, kappa, theta)
//! and on the coordinates q_n^(i), p_n^(i), generated by
//!
//! * reflections `r_n` and `r'_n` (n mod L) realizing two commuting affine
//!   Weyl groups of type A_{L-1}^(1) on the root variables
//!   a_n = e_{n+1} - e_n and b_n = e_{L-n} - e_{L-n-1} - kappa_{L-n} +
//!   kappa_{L-n-1},
//! * a rotation `pi` of order L and an involution `rho` exchanging the two
//!   root systems (together the Dynkin diagram automorphisms),
//! * integer shifts `eta_i` lowering theta_i by one,
//! * permutations `zeta_ij` of the theta parameters, including the index 0,
//! * a reversal `iota` negating every theta,
//! * and, for N = 1 only, an extra involution `phi`.
//!
//! Each generator acts on the honest coordinates (1 <= n <= L-1,
//! 1 <= i <= N); where the published formulas touch boundary or shifted
//! entries these are expanded through the extended conventions
//! q_{n+L}^(i) = s_i q_n^(i), p_{n+L}^(i) = p_n^(i) / s_i, q_n^(0) =
//! q_0^(i) = 1, and the row/column sum rules for the remaining p entries.
//! Every transformation is exact over any scalar domain; evaluation on the
//! indeterminacy locus reports which denominator vanished instead of
//! panicking.
//!
//! Two certificates accompany the group action: [`check_relations`] verifies
//! the defining relations at random rational points, and
//! [`transport_solution`] applies a word to a character-grid solution and
//! re-certifies the canonical equations for the transformed parameters.
//!
//! One normalization note: the N = 1 involution `phi` maps the e-list to
//! values whose sum differs from the fixed normalization sum e_n = (L-1)/2.
//! Because a uniform shift e_n -> e_n + c changes each Hamiltonian only by
//! the constant c⋅theta_i/s_i (by the row sum rule), it does not affect the
//! flows, so `phi` is followed by the unique uniform e-shift restoring the
//! normalization; the transported solutions are certified against the
//! renormalized parameters.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::algebra::{rat_int, rat_to_f64, LaurentPoly, Mat, Rat, RationalFunction, Scalar};
use crate::character::{CanonicalParams, GridFamily};
use crate::error::{Error, Result};
use crate::identity::IdentityReport;
use crate::phase::{CanonicalChart, HamiltonianSystem, SigmaPhase};
use crate::sample;

/// One generator of the symmetry group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generator {
    /// Reflection `r_n`, n taken mod L.
    R(usize),
    /// Reflection `r'_n` of the second root system.
    RPrime(usize),
    /// Rotation of order L.
    Pi,
    /// Involution exchanging the two root systems.
    Rho,
    /// Integer shift lowering theta_i by one.
    Eta(usize),
    /// Exchange of theta_i and theta_j (0 allowed on either side).
    Zeta(usize, usize),
    /// Reversal negating every theta.
    Iota,
    /// Extra involution, defined only for N = 1.
    Phi,
}

impl Generator {
    /// Parses one token: `r3`, `r0'`, `pi`, `rho`, `eta2`, `zeta01`, `iota`,
    /// `phi`.
    pub fn parse(token: &str) -> Result<Self> {
        let t = token.trim();
        match t {
            "pi" => return Ok(Generator::Pi),
            "rho" => return Ok(Generator::Rho),
            "iota" => return Ok(Generator::Iota),
            "phi" => return Ok(Generator::Phi),
            _ => {}
        }
        if let Some(rest) = t.strip_prefix("zeta") {
            let digits: Vec<char> = rest.chars().collect();
            if digits.len() == 2 && digits.iter().all(|c| c.is_ascii_digit()) {
                let i = digits[0].to_digit(10).unwrap() as usize;
                let j = digits[1].to_digit(10).unwrap() as usize;
                if i == j {
                    return Err(Error::Parse(format!(
                        "zeta needs two distinct indices, got {t:?}"
                    )));
                }
                return Ok(Generator::Zeta(i, j));
            }
            return Err(Error::Parse(format!(
                "expected zeta<i><j> with two single-digit indices, got {t:?}"
            )));
        }
        if let Some(rest) = t.strip_prefix("eta") {
            if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()) {
                return Ok(Generator::Eta(rest.parse().unwrap()));
            }
            return Err(Error::Parse(format!("expected eta<i>, got {t:?}")));
        }
        if let Some(rest) = t.strip_prefix('r') {
            let (digits, prime) = match rest.strip_suffix('\'') {
                Some(d) => (d, true),
                None => (rest, false),
            };
            if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
                let n = digits.parse().unwrap();
                return Ok(if prime {
                    Generator::RPrime(n)
                } else {
                    Generator::R(n)
                });
            }
        }
        Err(Error::Parse(format!("unknown symmetry generator {t:?}")))
    }

    /// The token form accepted by [`Generator::parse`].
    pub fn name(&self) -> String {
        match self {
            Generator::R(n) => format!("r{n}"),
            Generator::RPrime(n) => format!("r{n}'"),
            Generator::Pi => "pi".to_string(),
            Generator::Rho => "rho".to_string(),
            Generator::Eta(i) => format!("eta{i}"),
            Generator::Zeta(i, j) => format!("zeta{i}{j}"),
            Generator::Iota => "iota".to_string(),
            Generator::Phi => "phi".to_string(),
        }
    }

    /// Checks the index ranges against a system size.
    pub fn validate(&self, l: usize, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        match self {
            Generator::R(k) | Generator::RPrime(k) if *k >= l => {
                bad(format!("{} needs index < L = {l}", self.name()))
            }
            Generator::Eta(i) if *i > n => {
                bad(format!("{} needs index <= N = {n}", self.name()))
            }
            Generator::Zeta(i, j) if *i > n || *j > n => {
                bad(format!("{} needs indices <= N = {n}", self.name()))
            }
            Generator::Phi if n != 1 => {
                bad(format!("phi is defined only for N = 1 systems, got N = {n}"))
            }
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

/// A composite of generators. The list is written left to right but applied
/// right to left, matching composition order: `r1,pi` means apply `pi` first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryWord(pub Vec<Generator>);

impl SymmetryWord {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(SymmetryWord(Vec::new()));
        }
        let gens = text
            .split(',')
            .map(Generator::parse)
            .collect::<Result<Vec<_>>>()?;
        Ok(SymmetryWord(gens))
    }

    pub fn generators(&self) -> &[Generator] {
        &self.0
    }

    pub fn validate(&self, l: usize, n: usize) -> Result<()> {
        self.0.iter().try_for_each(|g| g.validate(l, n))
    }
}

impl std::fmt::Display for SymmetryWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<String> = self.0.iter().map(Generator::name).collect();
        f.write_str(&names.join(","))
    }
}

/// Root coordinates of the parameter space: the two simple-root lists and the
/// theta vector. Both root lists sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RootParams {
    pub a: Vec<Rat>,
    pub b: Vec<Rat>,
    pub theta: Vec<Rat>,
}

impl RootParams {
    pub fn from_canonical(params: &CanonicalParams) -> Self {
        let l = params.l() as i64;
        RootParams {
            a: (0..l).map(|n| params.alpha_at(n)).collect(),
            b: (0..l).map(|n| params.beta_at(n)).collect(),
            theta: params.theta().to_vec(),
        }
    }

    pub fn a_sum(&self) -> Rat {
        self.a.iter().fold(rat_int(0), |acc, v| acc + v)
    }

    pub fn b_sum(&self) -> Rat {
        self.b.iter().fold(rat_int(0), |acc, v| acc + v)
    }

    pub fn to_json(&self) -> serde_json::Value {
        use crate::algebra::rat_to_string;
        json!({
            "a": self.a.iter().map(rat_to_string).collect::<Vec<_>>(),
            "b": self.b.iter().map(rat_to_string).collect::<Vec<_>>(),
            "theta": self.theta.iter().map(rat_to_string).collect::<Vec<_>>(),
        })
    }
}

/// Action of one generator on the parameters alone.
pub fn apply_params(gen: &Generator, params: &CanonicalParams) -> Result<CanonicalParams> {
    gen.validate(params.l(), params.n())?;
    let l = params.l();
    let li = l as i64;
    let inv_l = Rat::new(1.into(), li.into());
    let mut e: Vec<Rat> = params.e_list().to_vec();
    let mut kappa: Vec<Rat> = params.kappa_list().to_vec();
    let mut theta: Vec<Rat> = params.theta().to_vec();
    match gen {
        Generator::R(n) => {
            let a = params.alpha_at(*n as i64);
            let hi = *n % l;
            let lo = (*n + 1) % l;
            e[hi] = &e[hi] + &a;
            e[lo] = &e[lo] - &a;
            kappa[hi] = &kappa[hi] + &a;
            kappa[lo] = &kappa[lo] - &a;
        }
        Generator::RPrime(n) => {
            let b = params.beta_at(*n as i64);
            let hi = (l - (*n % l)) % l;
            let lo = (2 * l - *n % l - 1) % l;
            kappa[hi] = &kappa[hi] + &b;
            kappa[lo] = &kappa[lo] - &b;
        }
        Generator::Pi => {
            for m in 0..l {
                e[m] = params.e_at(m as i64 + 1) - &inv_l;
                kappa[m] = params.kappa_at(m as i64 + 1);
            }
        }
        Generator::Rho => {
            let shift = params.theta_sum() * &inv_l - rat_int(1);
            for m in 0..l {
                let rev = li - m as i64;
                e[m] = params.kappa_at(rev) - params.e_at(rev) - &shift;
                kappa[m] = params.kappa_at(rev);
            }
        }
        Generator::Eta(i) => {
            for m in 0..l {
                let prev = params.e_at(m as i64 - 1);
                e[m] = &prev + &inv_l;
                kappa[m] = params.kappa_at(m as i64) - params.e_at(m as i64) + prev;
            }
            theta[*i] = &theta[*i] - rat_int(1);
        }
        Generator::Zeta(i, j) => {
            theta.swap(*i, *j);
        }
        Generator::Iota => {
            for m in 0..l {
                let rev = li - m as i64;
                e[m] = rat_int(1) - params.e_at(rev);
                kappa[m] = -params.kappa_at(rev);
            }
            for t in theta.iter_mut() {
                *t = -t.clone();
            }
        }
        Generator::Phi => {
            let k0 = params.kappa_at(0);
            e[0] = &k0 - params.e_at(0) - rat_int(1);
            for m in 1..l {
                e[m] = -params.e_at(li - m as i64);
                kappa[m] = -params.kappa_at(li - m as i64);
            }
            // Restore the e-sum normalization by the flow-neutral uniform
            // shift (see the module notes).
            let target = Rat::new((li - 1).into(), 2.into());
            let have: Rat = e.iter().fold(rat_int(0), |acc, v| acc + v);
            let c = (target - have) * &inv_l;
            for v in e.iter_mut() {
                *v = &*v + &c;
            }
            for t in theta.iter_mut() {
                *t = &k0 - &*t;
            }
        }
    }
    CanonicalParams::new(e, kappa, theta)
}

/// Parameter action of a whole word (rightmost generator first).
pub fn word_params(word: &SymmetryWord, params: &CanonicalParams) -> Result<CanonicalParams> {
    let mut out = params.clone();
    for gen in word.0.iter().rev() {
        out = apply_params(gen, &out)?;
    }
    Ok(out)
}

/// Extended-coordinate view of a phase point: base-window values plus the
/// quasi-periodic continuation in both directions.
struct ExtState<K: Scalar> {
    l: usize,
    n: usize,
    chart: CanonicalChart,
    /// s_0 = 1 followed by the deformation values.
    s: Vec<K>,
    /// q values on the base window, rows i = 0..=N, slots 0..L-1.
    q0: Vec<Vec<K>>,
    /// p values on the base window, boundary entries derived from the sum rules.
    p0: Vec<Vec<K>>,
}

impl<K: Scalar> ExtState<K> {
    fn new(params: &CanonicalParams, svals: &[K], state: &[K]) -> Result<Self> {
        let l = params.l();
        let n = params.n();
        let chart = CanonicalChart::new(l, n)?;
        if svals.len() != n {
            return Err(Error::invalid(format!(
                "expected {n} deformation values, got {}",
                svals.len()
            )));
        }
        if state.len() != chart.dim() {
            return Err(Error::invalid(format!(
                "expected {} coordinates, got {}",
                chart.dim(),
                state.len()
            )));
        }
        let mut s = Vec::with_capacity(n + 1);
        s.push(K::one());
        s.extend(svals.iter().cloned());
        let mut q0 = vec![vec![K::one(); l]; n + 1];
        for (i, row) in q0.iter_mut().enumerate().skip(1) {
            for (slot, cell) in row.iter_mut().enumerate().skip(1) {
                *cell = state[chart.q_index(slot, i)].clone();
            }
        }
        let mut p0 = vec![vec![K::zero(); l]; n + 1];
        for i in 1..=n {
            let mut acc = K::from_rat(&params.theta()[i]);
            for slot in 1..l {
                let pv = state[chart.p_index(slot, i)].clone();
                acc = acc - q0[i][slot].clone() * pv.clone();
                p0[i][slot] = pv;
            }
            p0[i][0] = acc;
        }
        for slot in 1..l {
            let mut acc = K::from_rat(&params.kappa_at(slot as i64));
            for i in 1..=n {
                acc = acc - q0[i][slot].clone() * p0[i][slot].clone();
            }
            p0[0][slot] = acc;
        }
        let mut acc = K::from_rat(&params.kappa_at(0));
        for i in 1..=n {
            acc = acc - p0[i][0].clone();
        }
        p0[0][0] = acc;
        Ok(ExtState { l, n, chart, s, q0, p0 })
    }

    fn s_at(&self, i: usize) -> &K {
        &self.s[i]
    }

    /// q_idx^(i) with q_{idx+L} = s_i q_idx.
    fn q(&self, i: usize, idx: i64) -> Result<K> {
        let l = self.l as i64;
        let k = idx.div_euclid(l);
        let base = self.q0[i][idx.rem_euclid(l) as usize].clone();
        if k == 0 {
            Ok(base)
        } else {
            Ok(self.s[i].powi_checked(k)? * base)
        }
    }

    /// p_idx^(i) with p_{idx+L} = p_idx / s_i.
    fn p(&self, i: usize, idx: i64) -> Result<K> {
        let l = self.l as i64;
        let k = idx.div_euclid(l);
        let base = self.p0[i][idx.rem_euclid(l) as usize].clone();
        if k == 0 {
            Ok(base)
        } else {
            Ok(self.s[i].powi_checked(-k)? * base)
        }
    }

    /// sum_{j=0}^{N} q_{qi}^(j) p_{pi}^(j) at extended indices.
    fn qp_cross(&self, qi: i64, pi: i64) -> Result<K> {
        let mut acc = K::zero();
        for j in 0..=self.n {
            acc = acc + self.q(j, qi)? * self.p(j, pi)?;
        }
        Ok(acc)
    }
}

/// Division reporting an indeterminacy with the generator and denominator names.
fn guarded_div<K: Scalar>(gen: &Generator, num: K, den: &K, what: &str) -> Result<K> {
    if den.is_zero() {
        return Err(Error::Indeterminate {
            generator: gen.name(),
            denominator: what.to_string(),
        });
    }
    num.try_div(den)
}

fn guarded_inv<K: Scalar>(gen: &Generator, den: &K, what: &str) -> Result<K> {
    guarded_div(gen, K::one(), den, what)
}

/// Applies one generator to (parameters, deformation values, coordinates).
pub fn apply<K: Scalar>(
    gen: &Generator,
    params: &CanonicalParams,
    svals: &[K],
    state: &[K],
) -> Result<(CanonicalParams, Vec<K>, Vec<K>)> {
    gen.validate(params.l(), params.n())?;
    let ext = ExtState::new(params, svals, state)?;
    let new_params = apply_params(gen, params)?;
    let chart = ext.chart;
    let l = ext.l;
    let nn = ext.n;
    let mut sv = svals.to_vec();
    let mut st = state.to_vec();
    match gen {
        Generator::R(idx) => {
            let n = *idx % l;
            if n == 0 {
                // a_0-reflection through the boundary window.
                let a = K::from_rat(&params.alpha_at(0));
                let s_sum = ext.qp_cross(1, 0)?;
                let d_p = a.clone() + s_sum.clone();
                for i in 1..=nn {
                    let q1 = ext.q(i, 1)?;
                    let d_q = a.clone() * q1.clone() + s_sum.clone();
                    let num = a.clone() * (q1 - K::one());
                    let fq = K::one()
                        - guarded_div(gen, num.clone(), &d_q, "a_0 q_1^(i) + sum_j q_1^(j) p_0^(j)")?;
                    let fp = K::one()
                        + guarded_div(gen, num, &d_p, "a_0 + sum_j q_1^(j) p_0^(j)")?;
                    for slot in 1..l {
                        st[chart.q_index(slot, i)] = ext.q(i, slot as i64)? * fq.clone();
                    }
                    for slot in 2..l {
                        st[chart.p_index(slot, i)] = ext.p(i, slot as i64)? * fp.clone();
                    }
                    let shift = guarded_div(
                        gen,
                        a.clone() * ext.p(i, 0)?,
                        &s_sum,
                        "sum_j q_1^(j) p_0^(j)",
                    )?;
                    st[chart.p_index(1, i)] = (ext.p(i, 1)? - shift) * fp;
                }
            } else {
                let a = K::from_rat(&params.alpha_at(n as i64));
                let s_sum = ext.qp_cross(n as i64 + 1, n as i64)?;
                let d1 = a.clone() + s_sum.clone();
                for i in 1..=nn {
                    let qn = ext.q(i, n as i64)?;
                    let qn1 = ext.q(i, n as i64 + 1)?;
                    let pn = ext.p(i, n as i64)?;
                    st[chart.q_index(n, i)] = qn.clone()
                        + guarded_div(
                            gen,
                            a.clone() * (qn1 - qn),
                            &d1,
                            "a_n + sum_j q_{n+1}^(j) p_n^(j)",
                        )?;
                    st[chart.p_index(n, i)] = pn.clone()
                        + guarded_div(
                            gen,
                            a.clone() * pn.clone(),
                            &s_sum,
                            "sum_j q_{n+1}^(j) p_n^(j)",
                        )?;
                    if n + 1 < l {
                        st[chart.p_index(n + 1, i)] = ext.p(i, n as i64 + 1)?
                            - guarded_div(gen, a.clone() * pn, &s_sum, "sum_j q_{n+1}^(j) p_n^(j)")?;
                    }
                }
            }
        }
        Generator::RPrime(idx) => {
            let n = *idx % l;
            if n == 0 {
                let b = K::from_rat(&params.beta_at(0));
                let mut s_sum = K::zero();
                for j in 0..=nn {
                    s_sum = s_sum + ext.q(j, -1)? * ext.p(j, 0)?;
                }
                let d_p = b.clone() + s_sum.clone();
                for i in 1..=nn {
                    let qm = ext.q(i, -1)?;
                    let d_q = b.clone() * qm.clone() + s_sum.clone();
                    let num = b.clone() * (qm - K::one());
                    let fq = K::one()
                        - guarded_div(
                            gen,
                            num.clone(),
                            &d_q,
                            "b_0 q_{-1}^(i) + sum_j q_{-1}^(j) p_0^(j)",
                        )?;
                    let fp = K::one()
                        + guarded_div(gen, num, &d_p, "b_0 + sum_j q_{-1}^(j) p_0^(j)")?;
                    for slot in 1..l {
                        st[chart.q_index(slot, i)] = ext.q(i, slot as i64)? * fq.clone();
                    }
                    for slot in 1..l - 1 {
                        st[chart.p_index(slot, i)] = ext.p(i, slot as i64)? * fp.clone();
                    }
                    let shift = guarded_div(
                        gen,
                        b.clone() * ext.p(i, 0)?,
                        &s_sum,
                        "sum_j q_{-1}^(j) p_0^(j)",
                    )?;
                    let inner = ext.p(i, -1)? - shift;
                    st[chart.p_index(l - 1, i)] =
                        guarded_inv(gen, ext.s_at(i), "s_i")? * inner * fp;
                }
            } else {
                let upper = l - n; // acted q/p slot
                let lower = l - n - 1;
                let b = K::from_rat(&params.beta_at(n as i64));
                let s_sum = ext.qp_cross(lower as i64, upper as i64)?;
                let d1 = b.clone() + s_sum.clone();
                for i in 1..=nn {
                    let qa = ext.q(i, upper as i64)?;
                    let qb = ext.q(i, lower as i64)?;
                    let pa = ext.p(i, upper as i64)?;
                    st[chart.q_index(upper, i)] = qa.clone()
                        + guarded_div(
                            gen,
                            b.clone() * (qb - qa),
                            &d1,
                            "b_n + sum_j q_{L-n-1}^(j) p_{L-n}^(j)",
                        )?;
                    st[chart.p_index(upper, i)] = pa.clone()
                        + guarded_div(
                            gen,
                            b.clone() * pa.clone(),
                            &s_sum,
                            "sum_j q_{L-n-1}^(j) p_{L-n}^(j)",
                        )?;
                    if lower >= 1 {
                        st[chart.p_index(lower, i)] = ext.p(i, lower as i64)?
                            - guarded_div(
                                gen,
                                b.clone() * pa,
                                &s_sum,
                                "sum_j q_{L-n-1}^(j) p_{L-n}^(j)",
                            )?;
                    }
                }
            }
        }
        Generator::Pi => {
            for i in 1..=nn {
                let q1 = ext.q(i, 1)?;
                for slot in 1..l {
                    st[chart.q_index(slot, i)] =
                        guarded_div(gen, ext.q(i, slot as i64 + 1)?, &q1, "q_1^(i)")?;
                    st[chart.p_index(slot, i)] = ext.p(i, slot as i64 + 1)? * q1.clone();
                }
            }
        }
        Generator::Rho => {
            for i in 1..=nn {
                let si = ext.s_at(i).clone();
                let si_inv = guarded_inv(gen, &si, "s_i")?;
                sv[i - 1] = si_inv.clone();
                for slot in 1..l {
                    let rev = (l - slot) as i64;
                    st[chart.q_index(slot, i)] = ext.q(i, rev)? * si_inv.clone();
                    st[chart.p_index(slot, i)] = ext.p(i, rev)? * si.clone();
                }
            }
        }
        Generator::Eta(i) => {
            let i = *i;
            // Window sums of p^(i) and p^(i) q^(j) over L consecutive
            // extended positions below the given index.
            let psum = |top: i64| -> Result<K> {
                let mut acc = K::zero();
                for m in 1..=l as i64 {
                    acc = acc + ext.p(i, top - m)?;
                }
                Ok(acc)
            };
            let qsum = |j: usize, top: i64| -> Result<K> {
                let mut acc = K::zero();
                for m in 1..=l as i64 {
                    acc = acc + ext.p(i, top - m)? * ext.q(j, top - m)?;
                }
                Ok(acc)
            };
            let psum_base = psum(0)?;
            let mut qsum_base = Vec::with_capacity(nn + 1);
            for j in 0..=nn {
                qsum_base.push(qsum(j, 0)?);
            }
            let eta_q = |j: usize, top: i64| -> Result<K> {
                let num = psum_base.clone() * qsum(j, top)?;
                let den = psum(top)? * qsum_base[j].clone();
                guarded_div(gen, num, &den, "window sums of p^(i) and p^(i) q^(j)")
            };
            for slot in 1..l {
                let t = slot as i64;
                // eta(q_n^(j) p_n^(j)) for every j != i, keeping the product
                // form that avoids dividing by eta(q_n^(j)).
                let mut cross = K::zero();
                for j in (0..=nn).filter(|j| *j != i) {
                    let factor = guarded_div(
                        gen,
                        ext.s_at(j).clone(),
                        &(ext.s_at(i).clone() - ext.s_at(j).clone()),
                        "s_i - s_j",
                    )?;
                    let ratio_hi = guarded_div(gen, ext.p(j, t)?, &ext.p(i, t)?, "p_n^(i)")?;
                    let ratio_lo =
                        guarded_div(gen, ext.p(j, t - 1)?, &ext.p(i, t - 1)?, "p_{n-1}^(i)")?;
                    let qp_image = factor * (ratio_hi - ratio_lo) * qsum(j, t)?;
                    if j >= 1 {
                        let qi = eta_q(j, t)?;
                        st[chart.p_index(slot, j)] =
                            guarded_div(gen, qp_image.clone(), &qi, "transformed q_n^(j)")?;
                        st[chart.q_index(slot, j)] = qi;
                    }
                    cross = cross + qp_image;
                }
                if i >= 1 {
                    let qi = eta_q(i, t)?;
                    let target = K::from_rat(
                        &(params.kappa_at(t) - params.e_at(t) + params.e_at(t - 1)),
                    );
                    st[chart.p_index(slot, i)] =
                        guarded_div(gen, target - cross, &qi, "transformed q_n^(i)")?;
                    st[chart.q_index(slot, i)] = qi;
                }
            }
        }
        Generator::Zeta(i, j) => {
            let (i, j) = (*i, *j);
            if i >= 1 && j >= 1 {
                sv.swap(i - 1, j - 1);
                for slot in 1..l {
                    st.swap(chart.q_index(slot, i), chart.q_index(slot, j));
                    st.swap(chart.p_index(slot, i), chart.p_index(slot, j));
                }
            } else {
                // Exchange with index 0 renormalizes the deformation values.
                let i = i.max(j);
                let si = ext.s_at(i).clone();
                let si_inv = guarded_inv(gen, &si, "s_i")?;
                for k in 1..=nn {
                    sv[k - 1] = if k == i {
                        si_inv.clone()
                    } else {
                        ext.s_at(k).clone() * si_inv.clone()
                    };
                }
                for slot in 1..l {
                    let t = slot as i64;
                    let qi = ext.q(i, t)?;
                    let p_zero = ext.p(0, t)?;
                    for k in 1..=nn {
                        if k == i {
                            st[chart.p_index(slot, k)] = qi.clone() * p_zero.clone();
                            st[chart.q_index(slot, k)] = guarded_inv(gen, &qi, "q_n^(i)")?;
                        } else {
                            st[chart.q_index(slot, k)] =
                                guarded_div(gen, ext.q(k, t)?, &qi, "q_n^(i)")?;
                            st[chart.p_index(slot, k)] = qi.clone() * ext.p(k, t)?;
                        }
                    }
                }
            }
        }
        Generator::Iota => {
            let p00 = ext.p(0, 0)?;
            for i in 1..=nn {
                let si = ext.s_at(i).clone();
                let pi0 = ext.p(i, 0)?;
                for slot in 1..l {
                    let rev = (l - slot) as i64;
                    let p0r = ext.p(0, rev)?;
                    let num_q = si.clone() * ext.p(i, rev)? * p00.clone();
                    let den_q = p0r.clone() * pi0.clone();
                    st[chart.q_index(slot, i)] =
                        guarded_div(gen, num_q, &den_q, "p_{L-n}^(0) p_0^(i)")?;
                    let num_p = -(ext.q(i, rev)? * pi0.clone() * p0r);
                    let den_p = si.clone() * p00.clone();
                    st[chart.p_index(slot, i)] =
                        guarded_div(gen, num_p, &den_p, "s_i p_0^(0)")?;
                }
            }
        }
        Generator::Phi => {
            let s = ext.s_at(1).clone();
            for slot in 1..l {
                let rev = (l - slot) as i64;
                let qv = ext.q(1, rev)?;
                let pv = ext.p(1, rev)?;
                let kap = K::from_rat(&params.kappa_at(rev));
                let gap = kap - qv.clone() * pv.clone();
                st[chart.q_index(slot, 1)] = guarded_div(
                    gen,
                    -(s.clone() * pv),
                    &gap,
                    "kappa_{L-n} - q_{L-n} p_{L-n}",
                )?;
                st[chart.p_index(slot, 1)] = guarded_div(gen, qv * gap, &s, "s")?;
            }
        }
    }
    Ok((new_params, sv, st))
}

/// Applies a word right to left.
pub fn apply_word<K: Scalar>(
    word: &SymmetryWord,
    params: &CanonicalParams,
    svals: &[K],
    state: &[K],
) -> Result<(CanonicalParams, Vec<K>, Vec<K>)> {
    let mut out = (params.clone(), svals.to_vec(), state.to_vec());
    for gen in word.0.iter().rev() {
        out = apply(gen, &out.0, &out.1, &out.2)?;
    }
    Ok(out)
}

/// The defining relations of the generator set acting on a system of period L:
/// pairs of words whose actions must agree.
pub fn relation_list(l: usize) -> Vec<(String, SymmetryWord, SymmetryWord)> {
    use Generator::{Pi, R, RPrime, Rho};
    let word = |gens: Vec<Generator>| SymmetryWord(gens);
    let mut rels = Vec::new();
    for k in 0..l {
        rels.push((
            format!("r{k} r{k} = 1"),
            word(vec![R(k), R(k)]),
            word(vec![]),
        ));
        rels.push((
            format!("r{k}' r{k}' = 1"),
            word(vec![RPrime(k), RPrime(k)]),
            word(vec![]),
        ));
        let up = (k + 1) % l;
        let down = (k + l - 1) % l;
        // The conjugation relations are stated here in point-action order
        // (rightmost factor acts first); written as substitutions on the
        // coordinate symbols the same relations read with the indices stepped
        // the other way, since composing substitutions reverses the
        // composition of point maps. For L = 2 the two readings coincide.
        rels.push((
            format!("pi r{k} = r{down} pi"),
            word(vec![Pi, R(k)]),
            word(vec![R(down), Pi]),
        ));
        rels.push((
            format!("pi r{k}' = r{up}' pi"),
            word(vec![Pi, RPrime(k)]),
            word(vec![RPrime(up), Pi]),
        ));
        rels.push((
            format!("rho r{k} = r{k}' rho"),
            word(vec![Rho, R(k)]),
            word(vec![RPrime(k), Rho]),
        ));
        for m in 0..l {
            rels.push((
                format!("r{k} r{m}' = r{m}' r{k}"),
                word(vec![R(k), RPrime(m)]),
                word(vec![RPrime(m), R(k)]),
            ));
        }
        if l >= 3 {
            rels.push((
                format!("(r{k} r{up})^3 = 1"),
                word(vec![R(k), R(up), R(k), R(up), R(k), R(up)]),
                word(vec![]),
            ));
            rels.push((
                format!("(r{k}' r{up}')^3 = 1"),
                word(vec![
                    RPrime(k),
                    RPrime(up),
                    RPrime(k),
                    RPrime(up),
                    RPrime(k),
                    RPrime(up),
                ]),
                word(vec![]),
            ));
        }
    }
    rels.push((
        format!("pi^{l} = 1"),
        SymmetryWord(vec![Pi; l]),
        SymmetryWord(vec![]),
    ));
    rels.push((
        "rho rho = 1".to_string(),
        SymmetryWord(vec![Rho, Rho]),
        SymmetryWord(vec![]),
    ));
    rels
}

/// Verifies every defining relation at `trials` random rational points of the
/// given system size; points on an indeterminacy locus are resampled.
pub fn check_relations(l: usize, n: usize, trials: usize, seed: u64) -> Result<Vec<IdentityReport>> {
    let chart = CanonicalChart::new(l, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (name, lhs, rhs) in relation_list(l) {
        let t0 = Instant::now();
        let mut failures = 0usize;
        for _ in 0..trials {
            // Resample until both sides of the relation are defined.
            let mut attempts = 0;
            let (left, right) = loop {
                attempts += 1;
                if attempts > 200 {
                    return Err(Error::invalid(format!(
                        "could not sample a point off the indeterminacy locus for {name}"
                    )));
                }
                let params = sample::random_params(&mut rng, l, n)?;
                let svals = sample::random_svals(&mut rng, n);
                let state = sample::random_state(&mut rng, chart.dim());
                let a = apply_word(&lhs, &params, &svals, &state);
                let b = apply_word(&rhs, &params, &svals, &state);
                match (a, b) {
                    (Ok(a), Ok(b)) => break (a, b),
                    (Err(Error::Indeterminate { .. }), _)
                    | (_, Err(Error::Indeterminate { .. }))
                    | (Err(Error::DivisionByZero(_)), _)
                    | (_, Err(Error::DivisionByZero(_))) => continue,
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                }
            };
            if left != right {
                failures += 1;
            }
        }
        out.push(IdentityReport {
            id: "symmetry-relation".to_string(),
            indices: json!({"relation": name, "l": l, "n": n, "trials": trials}),
            pass: failures == 0,
            residual_terms: failures,
            timing_ms: t0.elapsed().as_millis(),
        });
    }
    Ok(out)
}

/// The similarity solution of a character grid as curves in the independent
/// variables: parameters, deformation values s_k = (t_k/t_0)^L, and the
/// canonical coordinates in chart order.
pub fn grid_curve(
    family: &GridFamily,
) -> Result<(CanonicalParams, Vec<RationalFunction>, Vec<RationalFunction>)> {
    let phase = SigmaPhase::new(family)?;
    let params = CanonicalParams::from_grid(&family.base());
    let l = params.l();
    let nn = params.n();
    let svals: Vec<RationalFunction> = (1..=nn)
        .map(|k| {
            let mut key = vec![0i32; k + 1];
            key[0] = -(l as i32);
            key[k] = l as i32;
            RationalFunction::from_poly(LaurentPoly::monomial(key, rat_int(1)))
        })
        .collect();
    let mut state = Vec::with_capacity(2 * nn * (l - 1));
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
    Ok((params, svals, state))
}

/// Certifies that a curve (s(t), x(t)) satisfies the canonical equations of
/// the given parameters: for each flow, d(coordinate)/ds_j is computed through
/// the inverse Jacobian of the deformation values with respect to t_1..t_N
/// (t_0 held fixed) and compared with the Hamiltonian vector field. All
/// residuals are exact rational functions that must vanish.
pub fn certify_curve(
    params: &CanonicalParams,
    svals: &[RationalFunction],
    state: &[RationalFunction],
) -> Result<Vec<IdentityReport>> {
    let sys = HamiltonianSystem::new(params.clone())?;
    let chart = *sys.chart();
    let nn = chart.n();
    if svals.len() != nn || state.len() != chart.dim() {
        return Err(Error::invalid("curve has the wrong number of components"));
    }
    let jac = Mat::from_fn(nn, nn, |j, k| svals[j].derivative(k + 1));
    let jinv = jac.inverse().map_err(|_| {
        Error::invalid("deformation values are degenerate in the independent variables")
    })?;
    let lift = |c: &RationalFunction| c.eval_gen(svals);
    let mut out = Vec::new();
    for j in 1..=nn {
        let ds = |x: &RationalFunction| -> RationalFunction {
            let mut acc = RationalFunction::zero();
            for k in 1..=nn {
                acc = &acc + &(&jinv[(k - 1, j - 1)] * &x.derivative(k));
            }
            acc
        };
        for slot in 1..chart.l() {
            for i in 1..=nn {
                let t0 = Instant::now();
                let rhs_q = sys.dh_dp(j, slot, i).eval(state, &lift)?;
                let r_q = &ds(&state[chart.q_index(slot, i)]) - &rhs_q;
                out.push(IdentityReport {
                    id: "transport-flow-q".to_string(),
                    indices: json!({"j": j, "slot": slot, "i": i}),
                    pass: r_q.is_zero(),
                    residual_terms: r_q.num().num_terms(),
                    timing_ms: t0.elapsed().as_millis(),
                });
                let t0 = Instant::now();
                let rhs_p = sys.dh_dq(j, slot, i).eval(state, &lift)?;
                let r_p = &ds(&state[chart.p_index(slot, i)]) + &rhs_p;
                out.push(IdentityReport {
                    id: "transport-flow-p".to_string(),
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

/// A word applied to a character-grid solution, with the canonical equations
/// re-certified for the transformed parameters.
pub struct TransportedSolution {
    pub params: CanonicalParams,
    pub svals: Vec<RationalFunction>,
    pub state: Vec<RationalFunction>,
    pub reports: Vec<IdentityReport>,
}

/// Applies a symmetry word to the similarity solution of a grid and certifies
/// that the image satisfies the canonical equations of the transformed
/// parameters.
pub fn transport_solution(
    word: &SymmetryWord,
    family: &GridFamily,
) -> Result<TransportedSolution> {
    let (params, svals, state) = grid_curve(family)?;
    word.validate(params.l(), params.n())?;
    let (new_params, new_svals, new_state) = apply_word(word, &params, &svals, &state)?;
    let reports = certify_curve(&new_params, &new_svals, &new_state)?;
    Ok(TransportedSolution {
        params: new_params,
        svals: new_svals,
        state: new_state,
        reports,
    })
}

/// Maximum entry of |J^T O J - O| where J is the Jacobian of the coordinate
/// map of `word` at a float point and O is the canonical symplectic form.
/// Near zero certifies that the map is a canonical transformation at that
/// point.
///
/// The float point is rationalized (every `f64` is an exact binary fraction)
/// and the map is differentiated exactly in symbolic coordinates before the
/// identity is checked in floating point, so the residual reflects the map
/// itself rather than finite-difference conditioning near its poles.
pub fn symplectic_residual(
    word: &SymmetryWord,
    params: &CanonicalParams,
    svals: &[f64],
    state: &[f64],
) -> Result<f64> {
    let chart = CanonicalChart::new(params.l(), params.n())?;
    let dim = chart.dim();
    if state.len() != dim {
        return Err(Error::invalid("state has the wrong dimension"));
    }
    let half = dim / 2;
    let rationalize = |x: f64| -> Result<Rat> {
        Rat::from_float(x).ok_or_else(|| Error::invalid("non-finite float input"))
    };
    let sv: Vec<RationalFunction> = svals
        .iter()
        .map(|x| Ok(RationalFunction::constant(rationalize(*x)?)))
        .collect::<Result<_>>()?;
    let xs: Vec<RationalFunction> = (0..dim).map(RationalFunction::var).collect();
    let (_, _, image) = apply_word(word, params, &sv, &xs)?;
    let point: Vec<Rat> = state
        .iter()
        .map(|x| rationalize(*x))
        .collect::<Result<_>>()?;
    let mut jac = vec![vec![0.0f64; dim]; dim];
    for (a, component) in image.iter().enumerate() {
        for b in 0..dim {
            jac[a][b] = rat_to_f64(&component.derivative(b).eval_rat(&point)?);
        }
    }
    // omega(u, v) = sum_v u_q v_p - u_p v_q over canonical pairs (v, half+v).
    let omega = |a: usize, b: usize| -> f64 {
        if b == a + half {
            1.0
        } else if a == b + half {
            -1.0
        } else {
            0.0
        }
    };
    let mut worst = 0.0f64;
    for a in 0..dim {
        for b in 0..dim {
            // (J^T O J)[a][b] = sum_{u,v} J[u][a] O[u][v] J[v][b]
            let mut acc = 0.0;
            for u in 0..dim {
                for v in 0..dim {
                    let o = omega(u, v);
                    if o != 0.0 {
                        acc += jac[u][a] * o * jac[v][b];
                    }
                }
            }
            worst = worst.max((acc - omega(a, b)).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, MAX_VARS};
    use crate::character::GridSpec;
    use crate::identity::all_pass;
    use num::Zero;
    use rand::Rng;

    fn word_of(text: &str) -> SymmetryWord {
        SymmetryWord::parse(text).unwrap()
    }

    fn family_21() -> GridFamily {
        GridFamily::new(
            GridSpec::new(vec![rat(3, 2), rat(-2, 3)], vec![0, 1], vec![0, 0]).unwrap(),
        )
    }

    fn family_22() -> GridFamily {
        GridFamily::new(
            GridSpec::new(vec![rat(1, 3), rat(-5, 6), rat(1, 1)], vec![0, 1], vec![0, 0])
                .unwrap(),
        )
    }

    #[test]
    fn words_parse_and_validate() {
        let word = word_of("r1,r0',pi,rho,eta2,zeta01,iota,phi");
        assert_eq!(
            word.generators(),
            &[
                Generator::R(1),
                Generator::RPrime(0),
                Generator::Pi,
                Generator::Rho,
                Generator::Eta(2),
                Generator::Zeta(0, 1),
                Generator::Iota,
                Generator::Phi,
            ]
        );
        assert_eq!(word.to_string(), "r1,r0',pi,rho,eta2,zeta01,iota,phi");
        for bad in ["r", "zeta0", "zeta011", "zeta00", "eta", "xyz", "r1''"] {
            assert!(Generator::parse(bad).is_err(), "{bad} should not parse");
        }
        // Range validation against a system size.
        assert!(Generator::R(2).validate(2, 1).is_err());
        assert!(Generator::Eta(2).validate(2, 1).is_err());
        assert!(Generator::Zeta(0, 2).validate(2, 1).is_err());
        assert!(Generator::Phi.validate(2, 2).is_err());
        assert!(Generator::Phi.validate(3, 1).is_ok());
        // Empty word is the identity.
        assert_eq!(word_of("").generators().len(), 0);
    }

    #[test]
    fn words_compose_right_to_left() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = sample::random_params(&mut rng, 2, 1).unwrap();
        let svals = sample::random_svals(&mut rng, 1);
        let state = sample::random_state(&mut rng, 2);
        let composite = apply_word(&word_of("pi,r1"), &params, &svals, &state).unwrap();
        let (p1, s1, x1) = apply(&Generator::R(1), &params, &svals, &state).unwrap();
        let manual = apply(&Generator::Pi, &p1, &s1, &x1).unwrap();
        assert_eq!(composite, manual);
        // Not the same as the reverse order for a non-commuting pair.
        let reversed = apply_word(&word_of("r1,pi"), &params, &svals, &state).unwrap();
        assert_ne!(composite, reversed);
    }

    #[test]
    fn parameter_maps_preserve_sum_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (l, n) in [(2usize, 1usize), (3, 1), (3, 2)] {
            for _ in 0..10 {
                let params = sample::random_params(&mut rng, l, n).unwrap();
                let mut gens = vec![
                    Generator::Pi,
                    Generator::Rho,
                    Generator::Iota,
                    Generator::Eta(0),
                    Generator::Eta(n),
                    Generator::Zeta(0, 1),
                ];
                for k in 0..l {
                    gens.push(Generator::R(k));
                    gens.push(Generator::RPrime(k));
                }
                if n == 1 {
                    gens.push(Generator::Phi);
                }
                for gen in gens {
                    // CanonicalParams::new re-validates both sum rules.
                    let out = apply_params(&gen, &params).unwrap();
                    let roots = RootParams::from_canonical(&out);
                    assert_eq!(roots.a_sum(), rat_int(1), "{gen} root sum a");
                    assert_eq!(roots.b_sum(), rat_int(1), "{gen} root sum b");
                }
            }
        }
    }

    #[test]
    fn parameter_maps_match_root_translation_table() {
        // The root-variable form of each parameter action: reflections act as
        // affine Weyl reflections, pi and eta rotate the root lists, rho
        // exchanges them. These must agree with the e/kappa actions above.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for (l, n) in [(2usize, 1usize), (3, 1), (4, 1), (3, 2)] {
            for _ in 0..5 {
                let params = sample::random_params(&mut rng, l, n).unwrap();
                let r = RootParams::from_canonical(&params);
                let image = |gen: &Generator| {
                    RootParams::from_canonical(&apply_params(gen, &params).unwrap())
                };
                for k in 0..l {
                    let got = image(&Generator::R(k));
                    let mut want = r.clone();
                    want.a[k] = -r.a[k].clone();
                    want.a[(k + 1) % l] = &want.a[(k + 1) % l] + &r.a[k];
                    want.a[(k + l - 1) % l] = &want.a[(k + l - 1) % l] + &r.a[k];
                    assert_eq!(got, want, "r{k} at L={l}");
                    let got = image(&Generator::RPrime(k));
                    let mut want = r.clone();
                    want.b[k] = -r.b[k].clone();
                    want.b[(k + 1) % l] = &want.b[(k + 1) % l] + &r.b[k];
                    want.b[(k + l - 1) % l] = &want.b[(k + l - 1) % l] + &r.b[k];
                    assert_eq!(got, want, "r{k}' at L={l}");
                }
                let got = image(&Generator::Pi);
                let mut want = r.clone();
                for m in 0..l {
                    want.a[m] = r.a[(m + 1) % l].clone();
                    want.b[m] = r.b[(m + l - 1) % l].clone();
                }
                assert_eq!(got, want, "pi at L={l}");
                let got = image(&Generator::Rho);
                let want = RootParams {
                    a: r.b.clone(),
                    b: r.a.clone(),
                    theta: r.theta.clone(),
                };
                assert_eq!(got, want, "rho at L={l}");
                let got = image(&Generator::Eta(0));
                let mut want = r.clone();
                for m in 0..l {
                    want.a[m] = r.a[(m + l - 1) % l].clone();
                }
                want.theta[0] = &r.theta[0] - rat_int(1);
                assert_eq!(got, want, "eta0 at L={l}");
                // The reversal: the e/kappa action induces index reversal
                // around L-1-n on both root lists together with theta
                // negation. (A one-step rotation of this reversal would not
                // be an involution consistent with the e-action.)
                let got = image(&Generator::Iota);
                let mut want = r.clone();
                for m in 0..l {
                    want.a[m] = r.a[l - 1 - m].clone();
                    want.b[m] = r.b[l - 1 - m].clone();
                }
                want.theta = r.theta.iter().map(|t| -t.clone()).collect();
                assert_eq!(got, want, "iota at L={l}");
            }
        }
    }

    #[test]
    fn eta_and_phi_shift_parameters_as_stated() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let params = sample::random_params(&mut rng, 2, 1).unwrap();
        let out = apply_params(&Generator::Eta(1), &params).unwrap();
        assert_eq!(out.theta()[1], &params.theta()[1] - rat_int(1));
        assert_eq!(out.theta()[0], params.theta()[0]);
        // phi reflects both thetas through kappa_0/2 and keeps kappa_0.
        let out = apply_params(&Generator::Phi, &params).unwrap();
        let k0 = params.kappa_at(0);
        assert_eq!(out.theta()[1], &k0 - &params.theta()[1]);
        assert_eq!(out.theta()[0], &k0 - &params.theta()[0]);
        assert_eq!(out.kappa_at(0), k0);
    }

    #[test]
    fn relations_hold_at_random_rational_points() {
        for (l, n, trials, seed) in [(2usize, 1usize, 3usize, 41u64), (3, 1, 2, 43)] {
            let reports = check_relations(l, n, trials, seed).unwrap();
            assert!(!reports.is_empty());
            for r in &reports {
                assert!(r.pass, "failed relation: {:?}", r.indices);
            }
            assert!(all_pass(&reports));
        }
    }

    #[test]
    fn grid_curves_certify_without_transformation() {
        let (params, svals, state) = grid_curve(&family_21()).unwrap();
        let reports = certify_curve(&params, &svals, &state).unwrap();
        assert_eq!(reports.len(), 2);
        assert!(all_pass(&reports));
    }

    #[test]
    fn generators_transport_grid_solutions() {
        let family = family_21();
        let (params, _, _) = grid_curve(&family).unwrap();
        for text in [
            "r0", "r1", "r0'", "r1'", "pi", "rho", "eta0", "eta1", "zeta01", "iota", "phi",
        ] {
            let word = word_of(text);
            let moved = transport_solution(&word, &family).unwrap();
            for r in &moved.reports {
                assert!(
                    r.pass,
                    "{text} transport failed: {:?} ({} terms)",
                    r.indices, r.residual_terms
                );
            }
        }
        // Parameter bookkeeping on two named cases.
        let eta = transport_solution(&word_of("eta1"), &family).unwrap();
        assert_eq!(eta.params.theta()[1], &params.theta()[1] - rat_int(1));
        let phi = transport_solution(&word_of("phi"), &family).unwrap();
        assert_eq!(phi.params.theta()[1], params.kappa_at(0) - &params.theta()[1]);
    }

    #[test]
    fn involutive_word_returns_the_original_solution() {
        let family = family_21();
        let (params, svals, state) = grid_curve(&family).unwrap();
        let moved = transport_solution(&word_of("r1,r1"), &family).unwrap();
        assert_eq!(moved.params, params);
        assert_eq!(moved.svals, svals);
        assert_eq!(moved.state, state);
        assert!(all_pass(&moved.reports));
    }

    #[test]
    fn transport_on_two_variable_system() {
        let family = family_22();
        for text in ["zeta12", "eta1"] {
            let moved = transport_solution(&word_of(text), &family).unwrap();
            for r in &moved.reports {
                assert!(
                    r.pass,
                    "{text} transport failed on (2,2): {:?} ({} terms)",
                    r.indices, r.residual_terms
                );
            }
        }
    }

    #[test]
    fn extended_entries_transform_consistently() {
        // Where the published maps touch derived entries (p_0, p_L, q_L), the
        // honest-coordinate action must reproduce them through the sum rules.
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for _ in 0..20 {
            let params = sample::random_params(&mut rng, 2, 1).unwrap();
            let svals = sample::random_svals(&mut rng, 1);
            let state = sample::random_state(&mut rng, 2);
            let ext = match ExtState::new(&params, &svals, &state) {
                Ok(e) => e,
                Err(_) => continue,
            };
            // r_1 with L=2 also moves p_2 = p_0/s; its image must be
            // p_2 - a_1 p_1 / S with S = sum_j q_2^(j) p_1^(j).
            let s_sum = ext.qp_cross(2, 1).unwrap();
            if s_sum.is_zero() {
                continue;
            }
            let a = params.alpha_at(1);
            if (a.clone() + s_sum.clone()).is_zero() {
                continue;
            }
            if let Ok((np, nsv, nst)) = apply(&Generator::R(1), &params, &svals, &state) {
                let next = ExtState::new(&np, &nsv, &nst).unwrap();
                let want = ext.p(1, 2).unwrap()
                    - (a * ext.p(1, 1).unwrap()).try_div(&s_sum).unwrap();
                assert_eq!(next.p(1, 2).unwrap(), want, "r1 image of p_2");
            }
            // pi moves p_0 to p_1 q_1.
            if !state[0].is_zero() {
                let (np, nsv, nst) = apply(&Generator::Pi, &params, &svals, &state).unwrap();
                let next = ExtState::new(&np, &nsv, &nst).unwrap();
                let want = ext.p(1, 1).unwrap() * ext.q(1, 1).unwrap();
                assert_eq!(next.p(1, 0).unwrap(), want, "pi image of p_0");
            }
        }
    }

    #[test]
    fn symplectic_jacobians_are_canonical() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let params = sample::random_params(&mut rng, 2, 1).unwrap();
        let words = [
            "r0", "r1", "r0'", "r1'", "pi", "rho", "eta0", "eta1", "zeta01", "iota", "phi",
        ];
        for text in words {
            let word = word_of(text);
            let mut checked = 0;
            while checked < 3 {
                let svals = [1.0 + rat_to_f64(&sample::random_nonzero_rat(&mut rng)).abs()];
                let state: Vec<f64> =
                    (0..2).map(|_| rng.random_range(0.25..1.75)).collect();
                match symplectic_residual(&word, &params, &svals, &state) {
                    Ok(residual) => {
                        assert!(
                            residual <= 1e-8,
                            "{text}: symplectic residual {residual:.3e}"
                        );
                        checked += 1;
                    }
                    Err(Error::Indeterminate { .. }) | Err(Error::DivisionByZero(_)) => continue,
                    Err(e) => panic!("{text}: {e}"),
                }
            }
        }
    }

    #[test]
    fn indeterminate_points_name_the_denominator() {
        // L=2, N=1: the r1 denominator S = kappa_1 - q_1 p_1 + s p_1
        // vanishes at q_1 = p_1 = 1, s = 1 - kappa_1 + q_1 p_1 ... choose
        // kappa_1 = 1/2 so s = 1/2 works.
        let params = CanonicalParams::new(
            vec![rat(1, 4), rat(1, 4)],
            vec![rat(1, 3), rat(1, 2)],
            vec![rat(1, 2), rat(1, 3)],
        )
        .unwrap();
        let svals = vec![rat(1, 2)];
        let state = vec![rat_int(1), rat_int(1)];
        let err = apply(&Generator::R(1), &params, &svals, &state).unwrap_err();
        match err {
            Error::Indeterminate { generator, denominator } => {
                assert_eq!(generator, "r1");
                assert!(denominator.contains("sum"), "{denominator}");
            }
            other => panic!("expected indeterminacy, got {other}"),
        }
        // phi: kappa_1 - q_1 p_1 = 0.
        let state = vec![rat_int(1), rat(1, 2)];
        let err = apply(&Generator::Phi, &params, &svals, &state).unwrap_err();
        match err {
            Error::Indeterminate { generator, denominator } => {
                assert_eq!(generator, "phi");
                assert!(denominator.contains("kappa"), "{denominator}");
            }
            other => panic!("expected indeterminacy, got {other}"),
        }
    }

    #[test]
    fn chart_capacity_covers_supported_sizes() {
        // The relation checks allocate a chart; the largest advertised size
        // must fit the packed-key budget.
        for (l, n) in [(2usize, 1usize), (2, 2), (3, 1), (3, 2), (4, 1)] {
            let chart = CanonicalChart::new(l, n).unwrap();
            assert!(chart.dim() <= MAX_VARS);
        }
    }
}
