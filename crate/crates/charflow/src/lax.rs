//! The Fuchsian linear problem attached to a character grid and its
//! monodromy-preserving deformation.
//!
//! A grid of size L with N+1 deformation variables carries an L x L linear
//! system in a spectral variable z,
//!
//! ```text
//!   dY/dz = A(z) Y,   A(z) = sum_{k=0}^{N+1} A_k / (z - u_k),   u_k = t_k^{-L},  u_{N+1} = 0,
//! ```
//!
//! whose residue matrices are assembled from the grid ratios f and g. The
//! residues A_0..A_N have rank one and factor as column-times-row products
//! with pairing -theta_i; A_{N+1} is upper triangular with the exponents e_n
//! on its diagonal; the residue at infinity A_{N+2} = -(A_0 + ... + A_{N+1})
//! is lower triangular with diagonal kappa_n - e_n. Deformation along u_i is
//! generated by a companion matrix B_i, and compatibility of the z-equation
//! with all the deformation equations (zero curvature) is certified here as
//! an exact rational-function identity.
//!
//! Two gauges are provided.
//!
//! * The sigma gauge ([`SigmaLax`]) takes entries directly from the grid, as
//!   exact rational functions of t_0..t_N (and z for the z-dependent
//!   matrices). This is the gauge in which the deformation matrices B_i are
//!   defined, so all zero-curvature and residue-wise deformation residuals
//!   live here.
//! * The canonical-point gauge ([`PointLax`]) differs by conjugation with the
//!   diagonal matrix of row-factor entries of A_0, which normalizes the row
//!   factor of A_0 to (1,..,1). Its entries are polynomial in the canonical
//!   coordinates (q, p), so it can be evaluated on any phase-space point over
//!   any scalar domain; only conjugation-invariant quantities (traces,
//!   characteristic polynomials, ranks) are compared in this gauge. The trace
//!   pairings recover the polynomial Hamiltonians: H_i = -K_i / s_i^2 with
//!   K_i the quadratic residue pairing sum.
//!
//! The residue-wise deformation system is certified in the covariant form
//!
//! ```text
//!   dA_k/du_i - [E_i, A_k] = [A_i, A_k]/(u_i - u_k)   (k != i),
//!   dA_i/du_i - [E_i, A_i] = -sum_{k != i} [A_i, A_k]/(u_i - u_k),
//! ```
//!
//! where E_i = B_i(z -> infinity) is the constant part of the companion
//! matrix. This is equivalent to zero curvature for the B_i built here. The
//! plain form (without the [E_i, .] term) is also computed and reported: it
//! acquires the exact obstruction [E_i, A_k], which vanishes only when E_i is
//! scalar, and the obstruction is part of the report rather than hidden.

use serde_json::json;
use std::time::Instant;

use crate::algebra::{
    rat, rat_int, rat_to_string, LaurentPoly, Mat, Rat, RationalFunction, Scalar,
};
use crate::character::CanonicalParams;
use crate::error::{Error, Result};
use crate::identity::IdentityReport;
use crate::phase::gvars::SigmaPhase;
use crate::phase::hamiltonian::CanonicalChart;

/// `t_k^e` as a rational function of the deformation variables.
fn t_pow(k: usize, e: i32) -> RationalFunction {
    RationalFunction::from_poly(LaurentPoly::monomial_pow(k, e, rat_int(1)))
}

/// Monic polynomial with the given roots, ascending coefficients
/// `[c_0, .., c_{n-1}, 1]`.
fn poly_from_roots(roots: &[Rat]) -> Vec<Rat> {
    let mut coeffs = vec![rat_int(1)];
    for r in roots {
        let mut next = vec![rat_int(0); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= &(r * c);
        }
        coeffs = next;
    }
    coeffs
}

fn report_mat(
    id: &str,
    indices: serde_json::Value,
    residual: &Mat<RationalFunction>,
    t0: Instant,
) -> IdentityReport {
    let terms: usize = residual
        .entries()
        .map(|(_, _, h)| h.num().num_terms())
        .sum();
    IdentityReport {
        id: id.to_string(),
        indices,
        pass: residual.is_zero(),
        residual_terms: terms,
        timing_ms: t0.elapsed().as_millis(),
    }
}

fn report_scalars<K: Scalar>(
    id: &str,
    indices: serde_json::Value,
    residuals: &[K],
    t0: Instant,
) -> IdentityReport {
    IdentityReport {
        id: id.to_string(),
        indices,
        pass: residuals.iter().all(K::is_zero),
        residual_terms: residuals.iter().filter(|r| !r.is_zero()).count(),
        timing_ms: t0.elapsed().as_millis(),
    }
}

fn mat_json<K: Scalar>(m: &Mat<K>) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.rows())
            .map(|i| {
                serde_json::Value::Array(
                    (0..m.cols())
                        .map(|j| serde_json::Value::String(m[(i, j)].describe()))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Table of local exponents of the z-equation, one column per singular point.
#[derive(Clone, Debug)]
pub struct RiemannScheme {
    /// `(location, exponents)` pairs: each `u_i`, then `0`, then `infinity`.
    pub columns: Vec<(String, Vec<Rat>)>,
}

impl RiemannScheme {
    /// Sum of all L(N+3) local exponents; zero for a consistent scheme.
    pub fn exponent_sum(&self) -> Rat {
        let mut acc = rat_int(0);
        for (_, exps) in &self.columns {
            for e in exps {
                acc += e;
            }
        }
        acc
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.columns
                .iter()
                .map(|(loc, exps)| {
                    json!({
                        "location": loc,
                        "exponents": exps.iter().map(|e| rat_to_string(e)).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        )
    }
}

/// The exponent table determined by the canonical parameters: `(-theta_i,
/// 0^{L-1})` at each finite pole `u_i`, `(e_n)` at z = 0, `(kappa_n - e_n)`
/// at z = infinity.
pub fn riemann_scheme(params: &CanonicalParams) -> RiemannScheme {
    let l = params.l();
    let mut columns = Vec::with_capacity(params.n() + 3);
    for (i, th) in params.theta().iter().enumerate() {
        let mut exps = vec![rat_int(0); l];
        exps[0] = -th.clone();
        columns.push((format!("u_{i}"), exps));
    }
    columns.push((
        "0".to_string(),
        (0..l).map(|m| params.e_at(m as i64)).collect(),
    ));
    columns.push((
        "infinity".to_string(),
        (0..l)
            .map(|m| params.kappa_at(m as i64) - params.e_at(m as i64))
            .collect(),
    ));
    RiemannScheme { columns }
}

/// The partition tuple describing the eigenvalue multiplicities of the
/// residues: `(L-1, 1)` at each of the N+1 movable poles, `(1^L)` at 0 and at
/// infinity.
pub fn spectral_type(l: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(n + 3);
    for _ in 0..=n {
        if l >= 2 {
            out.push(vec![l - 1, 1]);
        } else {
            out.push(vec![1]);
        }
    }
    out.push(vec![1; l]);
    out.push(vec![1; l]);
    out
}

/// Number of accessory parameters of a Fuchsian system with the given
/// spectral type: `(m-2) L^2 - sum of squared multiplicities + 2` for `m`
/// singular points on a rank-L system.
pub fn accessory_count(partitions: &[Vec<usize>]) -> Result<i64> {
    if partitions.len() < 3 {
        return Err(Error::invalid(
            "a spectral type needs at least three singular points",
        ));
    }
    let l: usize = partitions[0].iter().sum();
    if l == 0 {
        return Err(Error::invalid("empty partition in a spectral type"));
    }
    for p in partitions {
        if p.is_empty() || p.contains(&0) {
            return Err(Error::invalid("every partition part must be positive"));
        }
        if p.iter().sum::<usize>() != l {
            return Err(Error::invalid(format!(
                "all partitions must sum to the same matrix size {l}"
            )));
        }
    }
    let m = partitions.len() as i64;
    let l = l as i64;
    let sq: i64 = partitions
        .iter()
        .flat_map(|p| p.iter().map(|&x| (x * x) as i64))
        .sum();
    Ok((m - 2) * l * l - sq + 2)
}

/// Shared structural certification of a residue list over any exact scalar
/// domain: rank-one minors, trace pairings, characteristic polynomials,
/// triangularity of the two distinguished residues, and the exponent-sum
/// relations. `factors` supplies the column/row factorization of A_0..A_N
/// when the caller has one.
fn residue_structure_reports<K: Scalar>(
    l: usize,
    n: usize,
    params: &CanonicalParams,
    a: &[Mat<K>],
    gauge: &str,
    factors: Option<(&[Vec<K>], &[Vec<K>])>,
) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    let g = |extra: serde_json::Value| {
        let mut v = extra;
        v["gauge"] = json!(gauge);
        v
    };

    for i in 0..=n {
        // Every 2x2 minor of a rank-one matrix vanishes.
        let t0 = Instant::now();
        let mut minors = Vec::new();
        for m1 in 0..l {
            for m2 in m1 + 1..l {
                for c1 in 0..l {
                    for c2 in c1 + 1..l {
                        let det = a[i][(m1, c1)].clone() * a[i][(m2, c2)].clone()
                            - a[i][(m1, c2)].clone() * a[i][(m2, c1)].clone();
                        minors.push(det);
                    }
                }
            }
        }
        out.push(report_scalars(
            "residue-rank-one",
            g(json!({"i": i})),
            &minors,
            t0,
        ));

        if let Some((col, row)) = factors {
            let t0 = Instant::now();
            let mut diffs = Vec::new();
            for m in 0..l {
                for c in 0..l {
                    diffs.push(a[i][(m, c)].clone() - col[i][m].clone() * row[i][c].clone());
                }
            }
            out.push(report_scalars(
                "residue-factorization",
                g(json!({"i": i})),
                &diffs,
                t0,
            ));

            // Row-times-column pairing equals -theta_i.
            let t0 = Instant::now();
            let mut pairing = K::from_rat(&params.theta()[i]);
            for m in 0..l {
                pairing = pairing + row[i][m].clone() * col[i][m].clone();
            }
            out.push(report_scalars(
                "residue-pairing",
                g(json!({"i": i})),
                &[pairing],
                t0,
            ));
        }

        // char(A_i) = lambda^{L-1} (lambda + theta_i).
        let t0 = Instant::now();
        let mut roots = vec![rat_int(0); l];
        roots[0] = -params.theta()[i].clone();
        let expected = poly_from_roots(&roots);
        let diffs: Vec<K> = a[i]
            .char_poly()?
            .iter()
            .zip(&expected)
            .map(|(c, e)| c.clone() - K::from_rat(e))
            .collect();
        out.push(report_scalars(
            "scheme-residue-pole",
            g(json!({"i": i})),
            &diffs,
            t0,
        ));
    }

    // Residue at z = 0: upper triangular, exponents e_n on the diagonal.
    let t0 = Instant::now();
    let mut diffs = Vec::new();
    for m in 0..l {
        for c in 0..l {
            if m > c {
                diffs.push(a[n + 1][(m, c)].clone());
            } else if m == c {
                diffs.push(a[n + 1][(m, c)].clone() - K::from_rat(&params.e_at(m as i64)));
            }
        }
    }
    out.push(report_scalars(
        "residue-zero-triangular",
        g(json!({})),
        &diffs,
        t0,
    ));
    let t0 = Instant::now();
    let roots: Vec<Rat> = (0..l).map(|m| params.e_at(m as i64)).collect();
    let expected = poly_from_roots(&roots);
    let diffs: Vec<K> = a[n + 1]
        .char_poly()?
        .iter()
        .zip(&expected)
        .map(|(c, e)| c.clone() - K::from_rat(e))
        .collect();
    out.push(report_scalars("scheme-zero", g(json!({})), &diffs, t0));

    // Residue at infinity: minus the sum of the others, lower triangular,
    // exponents kappa_n - e_n on the diagonal.
    let t0 = Instant::now();
    let mut total = Mat::<K>::zeros(l, l);
    for ak in a.iter().take(n + 3) {
        total = total.add(ak);
    }
    let sums: Vec<K> = total.entries().map(|(_, _, v)| v.clone()).collect();
    out.push(report_scalars("residue-sum-zero", g(json!({})), &sums, t0));

    let t0 = Instant::now();
    let mut diffs = Vec::new();
    for m in 0..l {
        for c in 0..l {
            if m < c {
                diffs.push(a[n + 2][(m, c)].clone());
            } else if m == c {
                let expect = params.kappa_at(m as i64) - params.e_at(m as i64);
                diffs.push(a[n + 2][(m, c)].clone() - K::from_rat(&expect));
            }
        }
    }
    out.push(report_scalars(
        "residue-infinity-triangular",
        g(json!({})),
        &diffs,
        t0,
    ));
    let t0 = Instant::now();
    let roots: Vec<Rat> = (0..l)
        .map(|m| params.kappa_at(m as i64) - params.e_at(m as i64))
        .collect();
    let expected = poly_from_roots(&roots);
    let diffs: Vec<K> = a[n + 2]
        .char_poly()?
        .iter()
        .zip(&expected)
        .map(|(c, e)| c.clone() - K::from_rat(e))
        .collect();
    out.push(report_scalars("scheme-infinity", g(json!({})), &diffs, t0));

    // Exponent relations: sum e_n = (L-1)/2, sum kappa_n = sum theta_i, and
    // the global exponent sum of the scheme vanishes.
    let t0 = Instant::now();
    let mut e_sum = rat(-((l as i64) - 1), 2);
    for m in 0..l {
        e_sum += params.e_at(m as i64);
    }
    out.push(report_scalars(
        "scheme-relation-zero",
        g(json!({})),
        &[K::from_rat(&e_sum)],
        t0,
    ));
    let t0 = Instant::now();
    let mut k_sum = -params.theta_sum();
    for m in 0..l {
        k_sum += params.kappa_at(m as i64);
    }
    out.push(report_scalars(
        "scheme-relation-theta",
        g(json!({})),
        &[K::from_rat(&k_sum)],
        t0,
    ));
    let t0 = Instant::now();
    let total = riemann_scheme(params).exponent_sum();
    out.push(report_scalars(
        "scheme-exponent-sum",
        g(json!({})),
        &[K::from_rat(&total)],
        t0,
    ));
    Ok(out)
}

/// The linear problem in the sigma gauge: residues and companion matrices as
/// exact rational functions of t_0..t_N, with z as one extra variable.
pub struct SigmaLax {
    l: usize,
    n: usize,
    params: CanonicalParams,
    /// a[k] = A_k for k = 0..=N+2.
    a: Vec<Mat<RationalFunction>>,
    /// v[i] = the matrix of chain products v^{(i)}; entry (m, c) carries the
    /// offset b = ((c - m - 1) mod L) + 1, so the diagonal holds the
    /// full-period product.
    v: Vec<Mat<RationalFunction>>,
    /// Column factors of the rank-one residues.
    col: Vec<Vec<RationalFunction>>,
    /// Row factors; row[i][0] = 1.
    row: Vec<Vec<RationalFunction>>,
}

impl SigmaLax {
    pub fn new(phase: &SigmaPhase) -> Result<Self> {
        let l = phase.l();
        let n = phase.family().spec().n();
        let params = CanonicalParams::from_grid(&phase.family().base());

        let v_entry = |i: usize, m: i64, b: usize| -> Result<RationalFunction> {
            let mut out = phase.g(i, m, -m)?.scale(&rat(1, l as i64));
            for a in 1..=b as i64 {
                let fac = RationalFunction::var(i) * phase.f(i, m + a, -m - a + 1)?;
                out = out * fac;
            }
            Ok(out)
        };
        let mut v = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let mut rows = Vec::with_capacity(l);
            for m in 0..l {
                let mut row = Vec::with_capacity(l);
                for c in 0..l {
                    let b = ((c + l - m - 1) % l) + 1;
                    row.push(v_entry(i, m as i64, b)?);
                }
                rows.push(row);
            }
            v.push(Mat::from_rows(rows));
        }

        let mut a: Vec<Mat<RationalFunction>> = Vec::with_capacity(n + 3);
        for (i, vi) in v.iter().enumerate() {
            let ui = t_pow(i, -(l as i32));
            a.push(Mat::from_fn(l, l, |m, c| {
                if m < c {
                    -vi[(m, c)].clone()
                } else {
                    -(ui.clone() * vi[(m, c)].clone())
                }
            }));
        }
        a.push(Mat::from_fn(l, l, |m, c| {
            if m < c {
                let mut w = RationalFunction::zero();
                for vi in &v {
                    w = w + vi[(m, c)].clone();
                }
                w
            } else if m == c {
                RationalFunction::constant(params.e_at(m as i64))
            } else {
                RationalFunction::zero()
            }
        }));
        let mut minus_sum = Mat::zeros(l, l);
        for ak in &a {
            minus_sum = minus_sum.sub(ak);
        }
        a.push(minus_sum);

        let mut col = Vec::with_capacity(n + 1);
        let mut row = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let mut c_vec = vec![RationalFunction::one()];
            for m in 1..l {
                let step = RationalFunction::var(i) * phase.f(i, m as i64, -(m as i64) + 1)?;
                c_vec.push(c_vec[m - 1].clone() * step);
            }
            let mut b_vec = Vec::with_capacity(l);
            for m in 0..l {
                let num = phase.g(i, m as i64, -(m as i64))?.scale(&rat(-1, l as i64));
                b_vec.push(num.div_nonzero(&c_vec[m]));
            }
            col.push(b_vec);
            row.push(c_vec);
        }

        Ok(SigmaLax {
            l,
            n,
            params,
            a,
            v,
            col,
            row,
        })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> &CanonicalParams {
        &self.params
    }

    /// A_k for k = 0..=N+2.
    pub fn residue(&self, k: usize) -> &Mat<RationalFunction> {
        &self.a[k]
    }

    pub fn residue_count(&self) -> usize {
        self.n + 3
    }

    /// Chain-product matrix v^{(i)}.
    pub fn v_matrix(&self, i: usize) -> &Mat<RationalFunction> {
        &self.v[i]
    }

    pub fn column_factor(&self, i: usize) -> &[RationalFunction] {
        &self.col[i]
    }

    pub fn row_factor(&self, i: usize) -> &[RationalFunction] {
        &self.row[i]
    }

    /// Pole location u_k as a rational function of t (zero for k = N+1).
    pub fn pole(&self, k: usize) -> RationalFunction {
        if k == self.n + 1 {
            RationalFunction::zero()
        } else {
            t_pow(k, -(self.l as i32))
        }
    }

    /// `z - u_k` as a Laurent polynomial; the z variable has index N+1.
    fn z_minus_u(&self, k: usize) -> LaurentPoly {
        let zv = LaurentPoly::var(self.n + 1);
        if k == self.n + 1 {
            zv
        } else {
            &zv - &LaurentPoly::monomial_pow(k, -(self.l as i32), rat_int(1))
        }
    }

    /// The full connection matrix A(z).
    pub fn connection(&self) -> Result<Mat<RationalFunction>> {
        let mut out = Mat::zeros(self.l, self.l);
        for k in 0..=self.n + 1 {
            let pole = RationalFunction::from_ratio(LaurentPoly::one(), self.z_minus_u(k))?;
            out = out.add(&self.a[k].map(|h| h.clone() * pole.clone()));
        }
        Ok(out)
    }

    /// The constant (z -> infinity) part of the companion matrix B_i:
    /// `theta_i/(L u_i)` on the diagonal plus the strictly lower part of
    /// v^{(i)}.
    pub fn twist(&self, i: usize) -> Mat<RationalFunction> {
        let diag = RationalFunction::from_poly(LaurentPoly::monomial_pow(
            i,
            self.l as i32,
            self.params.theta()[i].clone() * rat(1, self.l as i64),
        ));
        Mat::from_fn(self.l, self.l, |m, c| {
            if m == c {
                diag.clone()
            } else if m > c {
                self.v[i][(m, c)].clone()
            } else {
                RationalFunction::zero()
            }
        })
    }

    /// Companion matrix B_i of the u_i-deformation, in its displayed
    /// three-part form: `diag(theta_i/(L u_i) - v_{n,n})` plus `1/(z - u_i)`
    /// times the strictly upper part of v^{(i)} plus `z/(z - u_i)` times the
    /// lower-plus-diagonal part.
    pub fn deformation_matrix(&self, i: usize) -> Result<Mat<RationalFunction>> {
        let den = self.z_minus_u(i);
        let pole = RationalFunction::from_ratio(LaurentPoly::one(), den.clone())?;
        let zpole = RationalFunction::from_ratio(LaurentPoly::var(self.n + 1), den)?;
        let diag = RationalFunction::from_poly(LaurentPoly::monomial_pow(
            i,
            self.l as i32,
            self.params.theta()[i].clone() * rat(1, self.l as i64),
        ));
        let mut rows = Vec::with_capacity(self.l);
        for m in 0..self.l {
            let mut row = Vec::with_capacity(self.l);
            for c in 0..self.l {
                let vmc = self.v[i][(m, c)].clone();
                let entry = if m < c {
                    pole.clone() * vmc
                } else if m > c {
                    zpole.clone() * vmc
                } else {
                    diag.clone() - vmc.clone() + zpole.clone() * vmc
                };
                row.push(entry);
            }
            rows.push(row);
        }
        Ok(Mat::from_rows(rows))
    }

    /// Derivative with respect to u_i = t_i^{-L}, applied through the chain
    /// rule d/du_i = -(t_i^{L+1}/L) d/dt_i.
    fn d_wrt_u(&self, h: &RationalFunction, i: usize) -> RationalFunction {
        let scale = RationalFunction::from_poly(LaurentPoly::monomial_pow(
            i,
            self.l as i32 + 1,
            rat(-1, self.l as i64),
        ));
        h.derivative(i) * scale
    }

    /// `[A_i, A_k] / (u_i - u_k)`.
    fn pair_term(&self, i: usize, k: usize) -> Mat<RationalFunction> {
        let mut diff = LaurentPoly::monomial_pow(i, -(self.l as i32), rat_int(1));
        if k != self.n + 1 {
            diff = &diff - &LaurentPoly::monomial_pow(k, -(self.l as i32), rat_int(1));
        }
        let diff = RationalFunction::from_poly(diff);
        Mat::commutator(&self.a[i], &self.a[k]).map(|h| h.div_nonzero(&diff))
    }

    /// Full zero-curvature residual `dA/du_i - dB_i/dz - [B_i, A]` as a
    /// matrix of rational functions in (t, z); identically zero on solution
    /// grids.
    pub fn zero_curvature_residual(&self, i: usize) -> Result<Mat<RationalFunction>> {
        let az = self.connection()?;
        let bi = self.deformation_matrix(i)?;
        let da = az.map(|h| self.d_wrt_u(h, i));
        let db = bi.map(|h| h.derivative(self.n + 1));
        Ok(da.sub(&db).sub(&Mat::commutator(&bi, &az)))
    }

    /// Float evaluation of the zero-curvature combination at a numeric point,
    /// assembling the four ingredients independently before combining them;
    /// returns the max-abs entry. `tvals` lists t_0..t_N.
    pub fn zero_curvature_float(&self, i: usize, tvals: &[f64], zval: f64) -> Result<f64> {
        if tvals.len() != self.n + 1 {
            return Err(Error::invalid(format!(
                "expected {} deformation values, got {}",
                self.n + 1,
                tvals.len()
            )));
        }
        let mut point = tvals.to_vec();
        point.push(zval);
        let ev = |m: &Mat<RationalFunction>| -> Result<Mat<f64>> {
            m.try_map(|h| h.eval_f64(&point))
        };
        let az = ev(&self.connection()?)?;
        let bi_sym = self.deformation_matrix(i)?;
        let bi = ev(&bi_sym)?;
        let da = ev(&self.connection()?.map(|h| self.d_wrt_u(h, i)))?;
        let db = ev(&bi_sym.map(|h| h.derivative(self.n + 1)))?;
        let r = da.sub(&db).sub(&Mat::commutator(&bi, &az));
        Ok(r.entries().fold(0.0, |acc, (_, _, v)| acc.max(v.abs())))
    }

    /// Residue-wise deformation residual for the u_i-flow acting on A_k.
    /// With `covariant` set, the derivative is corrected by `[E_i, .]` with
    /// E_i the constant part of B_i; this form is equivalent to zero
    /// curvature. The plain form (`covariant = false`) is the textbook
    /// display, which for these matrices differs by the exact obstruction
    /// `[E_i, A_k]`.
    pub fn schlesinger_residual(
        &self,
        i: usize,
        k: usize,
        covariant: bool,
    ) -> Mat<RationalFunction> {
        let mut out = self.a[k].map(|h| self.d_wrt_u(h, i));
        if covariant {
            out = out.sub(&Mat::commutator(&self.twist(i), &self.a[k]));
        }
        if k == i {
            for j in 0..=self.n + 1 {
                if j != i {
                    out = out.add(&self.pair_term(i, j));
                }
            }
        } else {
            out = out.sub(&self.pair_term(i, k));
        }
        out
    }

    /// Zero-curvature and covariant residue-wise residuals for every
    /// deformation direction; all must pass on a solution grid.
    pub fn deformation_reports(&self) -> Result<Vec<IdentityReport>> {
        let mut out = Vec::new();
        for i in 0..=self.n {
            let t0 = Instant::now();
            let r = self.zero_curvature_residual(i)?;
            out.push(report_mat("zero-curvature", json!({"i": i}), &r, t0));
            for k in 0..=self.n + 1 {
                let t0 = Instant::now();
                let r = self.schlesinger_residual(i, k, true);
                out.push(report_mat(
                    "schlesinger-covariant",
                    json!({"i": i, "k": k}),
                    &r,
                    t0,
                ));
            }
        }
        Ok(out)
    }

    /// The plain residue-wise residuals, reported as measured. These carry
    /// the obstruction `[E_i, A_k]` and are expected to fail whenever E_i is
    /// not scalar; they are exposed so the discrepancy is visible, not
    /// certified.
    pub fn schlesinger_plain_reports(&self) -> Vec<IdentityReport> {
        let mut out = Vec::new();
        for i in 0..=self.n {
            for k in 0..=self.n + 1 {
                let t0 = Instant::now();
                let r = self.schlesinger_residual(i, k, false);
                out.push(report_mat(
                    "schlesinger-plain",
                    json!({"i": i, "k": k}),
                    &r,
                    t0,
                ));
            }
        }
        out
    }

    /// Rank, factorization, pairing, characteristic-polynomial, triangularity
    /// and exponent-relation checks.
    pub fn structure_reports(&self) -> Result<Vec<IdentityReport>> {
        residue_structure_reports(
            self.l,
            self.n,
            &self.params,
            &self.a,
            "sigma",
            Some((&self.col, &self.row)),
        )
    }

    pub fn riemann_scheme(&self) -> RiemannScheme {
        riemann_scheme(&self.params)
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        let mut b = Vec::with_capacity(self.n + 1);
        for i in 0..=self.n {
            b.push(mat_json(&self.deformation_matrix(i)?));
        }
        Ok(json!({
            "gauge": "sigma",
            "l": self.l,
            "n": self.n,
            "u": (0..=self.n + 1).map(|k| self.pole(k).describe()).collect::<Vec<_>>(),
            "a": self.a.iter().map(mat_json).collect::<Vec<_>>(),
            "b": b,
        }))
    }
}

/// The linear problem evaluated on a phase-space point in the
/// canonical-point gauge, over any scalar domain.
pub struct PointLax<K: Scalar> {
    l: usize,
    n: usize,
    params: CanonicalParams,
    /// a[k] = A_k for k = 0..=N+2.
    a: Vec<Mat<K>>,
    /// u_0..u_{N+1} with u_k = 1/s_k and u_{N+1} = 0.
    u: Vec<K>,
    /// s_0 = 1 followed by the supplied deformation values.
    s: Vec<K>,
    col: Vec<Vec<K>>,
    row: Vec<Vec<K>>,
}

/// Builds the residue matrices from canonical coordinates: A_i is the outer
/// product of the column `(-p_n^{(i)})_n` with the row `(q_n^{(i)})_n` using
/// the boundary-extended entries, A_{N+1} has diagonal e_n and upper entries
/// `sum_j p_m^{(j)} q_c^{(j)}`, and A_{N+2} closes the residue sum to zero.
pub fn lax_from_point<K: Scalar>(
    params: &CanonicalParams,
    svals: &[K],
    state: &[K],
) -> Result<PointLax<K>> {
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

    let q = |i: usize, slot: usize| -> K {
        if i == 0 || slot == 0 {
            K::one()
        } else {
            state[chart.q_index(slot, i)].clone()
        }
    };
    let mut p = vec![vec![K::zero(); l]; n + 1];
    for i in 1..=n {
        for slot in 1..l {
            p[i][slot] = state[chart.p_index(slot, i)].clone();
        }
        let mut acc = K::from_rat(&params.theta()[i]);
        for slot in 1..l {
            acc = acc - q(i, slot) * p[i][slot].clone();
        }
        p[i][0] = acc;
    }
    for slot in 1..l {
        let mut acc = K::from_rat(&params.kappa_at(slot as i64));
        for i in 1..=n {
            acc = acc - q(i, slot) * p[i][slot].clone();
        }
        p[0][slot] = acc;
    }
    let mut acc = K::from_rat(&params.kappa_at(0));
    for i in 1..=n {
        acc = acc - p[i][0].clone();
    }
    p[0][0] = acc;

    let mut a = Vec::with_capacity(n + 3);
    let mut col = Vec::with_capacity(n + 1);
    let mut row = Vec::with_capacity(n + 1);
    for (i, pi) in p.iter().enumerate() {
        let b_vec: Vec<K> = (0..l).map(|slot| -pi[slot].clone()).collect();
        let c_vec: Vec<K> = (0..l).map(|slot| q(i, slot)).collect();
        a.push(Mat::outer(&b_vec, &c_vec));
        col.push(b_vec);
        row.push(c_vec);
    }
    a.push(Mat::from_fn(l, l, |m, c| {
        if m < c {
            let mut w = K::zero();
            for (j, pj) in p.iter().enumerate() {
                w = w + pj[m].clone() * q(j, c);
            }
            w
        } else if m == c {
            K::from_rat(&params.e_at(m as i64))
        } else {
            K::zero()
        }
    }));
    let mut minus_sum = Mat::zeros(l, l);
    for ak in &a {
        minus_sum = minus_sum.sub(ak);
    }
    a.push(minus_sum);

    let mut s = vec![K::one()];
    s.extend(svals.iter().cloned());
    let mut u = Vec::with_capacity(n + 2);
    for sk in &s {
        u.push(sk.try_inv()?);
    }
    u.push(K::zero());

    Ok(PointLax {
        l,
        n,
        params: params.clone(),
        a,
        u,
        s,
        col,
        row,
    })
}

impl<K: Scalar> PointLax<K> {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> &CanonicalParams {
        &self.params
    }

    /// A_k for k = 0..=N+2.
    pub fn residue(&self, k: usize) -> &Mat<K> {
        &self.a[k]
    }

    pub fn residue_count(&self) -> usize {
        self.n + 3
    }

    /// Pole location u_k, k = 0..=N+1.
    pub fn pole(&self, k: usize) -> &K {
        &self.u[k]
    }

    /// `tr(A_i A_j)`.
    pub fn trace_pair(&self, i: usize, j: usize) -> K {
        self.a[i].matmul(&self.a[j]).trace()
    }

    /// Quadratic residue pairing at the pole u_i:
    /// `K_i = sum_{k != i} tr(A_i A_k)/(u_i - u_k)` over k = 0..=N+1.
    pub fn k_hamiltonian(&self, i: usize) -> Result<K> {
        let mut acc = K::zero();
        for k in 0..=self.n + 1 {
            if k == i {
                continue;
            }
            let diff = self.u[i].clone() - self.u[k].clone();
            acc = acc + self.trace_pair(i, k).try_div(&diff)?;
        }
        Ok(acc)
    }

    /// The Hamiltonian value recovered from traces: `H_i = -K_i / s_i^2`,
    /// i = 1..=N.
    pub fn h_trace(&self, i: usize) -> Result<K> {
        assert!(
            (1..=self.n).contains(&i),
            "trace Hamiltonian index out of range"
        );
        let s2 = self.s[i].clone() * self.s[i].clone();
        Ok(-(self.k_hamiltonian(i)?.try_div(&s2)?))
    }

    /// Structural certification; meaningful over exact scalar domains, where
    /// zero tests are exact.
    pub fn structure_reports(&self) -> Result<Vec<IdentityReport>> {
        residue_structure_reports(
            self.l,
            self.n,
            &self.params,
            &self.a,
            "point",
            Some((&self.col, &self.row)),
        )
    }

    pub fn riemann_scheme(&self) -> RiemannScheme {
        riemann_scheme(&self.params)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "gauge": "point",
            "l": self.l,
            "n": self.n,
            "u": self.u.iter().map(K::describe).collect::<Vec<_>>(),
            "a": self.a.iter().map(mat_json).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::character::{GridFamily, GridSpec};
    use crate::phase::hamiltonian::HamiltonianSystem;
    use crate::phase::reductions::hamiltonian_in_phase_space;
    use crate::phase::PhasePoly;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn family(theta: Vec<Rat>, nu: Vec<i64>, nu_prime: Vec<i64>) -> GridFamily {
        GridFamily::new(GridSpec::new(theta, nu, nu_prime).unwrap())
    }

    fn sigma_lax(fam: &GridFamily) -> SigmaLax {
        let phase = SigmaPhase::new(fam).unwrap();
        SigmaLax::new(&phase).unwrap()
    }

    #[test]
    fn constant_grid_residues_match_closed_forms() {
        // On the constant grid every sigma is 1, so f = 1, g = theta_i and
        // the chain products collapse to v_{m,c} = (theta_i/L) t_i^b.
        let fam = family(vec![rat(3, 2), rat(-2, 3)], vec![0, 0], vec![0, 0]);
        let lax = sigma_lax(&fam);
        for i in 0..=1 {
            let th = lax.params().theta()[i].clone();
            let half = th.clone() * rat(1, 2);
            // v off-diagonal: (theta_i/2) t_i; diagonal: (theta_i/2) t_i^2.
            for m in 0..2 {
                for c in 0..2 {
                    let e = if m == c { 2 } else { 1 };
                    let expect =
                        RationalFunction::from_poly(LaurentPoly::monomial_pow(i, e, half.clone()));
                    assert_eq!(lax.v_matrix(i)[(m, c)], expect, "v[{i}] entry ({m},{c})");
                }
            }
            // A_i = -(theta_i/2) [[1, t_i], [t_i^{-1}, 1]].
            for m in 0..2 {
                for c in 0..2 {
                    let e = if m < c { 1 } else if m > c { -1 } else { 0 };
                    let expect = RationalFunction::from_poly(LaurentPoly::monomial_pow(
                        i,
                        e,
                        -half.clone(),
                    ));
                    assert_eq!(lax.residue(i)[(m, c)], expect, "A_{i} entry ({m},{c})");
                }
            }
            assert_eq!(lax.residue(i).trace(), RationalFunction::constant(-th));
        }
        // Exponents: e = (0, 1/2), kappa_n = (theta_0 + theta_1)/2.
        assert_eq!(lax.params().e_at(0), rat(0, 1));
        assert_eq!(lax.params().e_at(1), rat(1, 2));
        let kappa = (rat(3, 2) + rat(-2, 3)) * rat(1, 2);
        assert_eq!(lax.params().kappa_at(0), kappa);
        // Residue at z = 0: diag(e) plus the summed upper chain entries.
        let w01 = lax.residue(2)[(0, 1)].clone();
        let expect = RationalFunction::from_poly(
            &LaurentPoly::monomial_pow(0, 1, rat(3, 4)) + &LaurentPoly::monomial_pow(1, 1, rat(-1, 3)),
        );
        assert_eq!(w01, expect);
        // Residue at infinity: lower triangular with diagonal kappa_n - e_n.
        assert!(lax.residue(3)[(0, 1)].is_zero());
        assert_eq!(
            lax.residue(3)[(0, 0)],
            RationalFunction::constant(kappa.clone())
        );
        assert_eq!(
            lax.residue(3)[(1, 1)],
            RationalFunction::constant(kappa - rat(1, 2))
        );
    }

    #[test]
    fn structure_reports_pass_on_rational_grids() {
        let fams = [
            family(vec![rat(3, 2), rat(-2, 3)], vec![0, 1], vec![0, 0]),
            family(vec![rat(5, 3), rat(-3, 4)], vec![0, 1, 1], vec![0, 0, 1]),
            family(vec![rat(1, 3), rat(-5, 6), rat(1, 1)], vec![0, 1], vec![0, 0]),
        ];
        for fam in &fams {
            let lax = sigma_lax(fam);
            for report in lax.structure_reports().unwrap() {
                assert!(
                    report.pass,
                    "sigma-gauge {} failed on (L,N)=({},{}): {} terms",
                    report.id,
                    lax.l(),
                    lax.n(),
                    report.residual_terms
                );
            }
        }
    }

    #[test]
    fn deformation_matrix_is_pole_term_plus_twist() {
        let fam = family(vec![rat(3, 2), rat(-2, 3)], vec![0, 1], vec![0, 0]);
        let lax = sigma_lax(&fam);
        for i in 0..=1 {
            let bi = lax.deformation_matrix(i).unwrap();
            let pole = RationalFunction::from_ratio(LaurentPoly::one(), lax.z_minus_u(i)).unwrap();
            let alt = lax
                .residue(i)
                .map(|h| -(h.clone() * pole.clone()))
                .add(&lax.twist(i));
            assert_eq!(bi, alt, "three-part display vs pole + constant, i = {i}");
        }
    }

    #[test]
    fn zero_curvature_vanishes_identically() {
        let fams = [
            family(vec![rat(3, 2), rat(-2, 3)], vec![0, 0], vec![0, 0]),
            family(vec![rat(3, 2), rat(-2, 3)], vec![0, 1], vec![0, 0]),
            family(vec![rat(1, 3), rat(-5, 6), rat(1, 1)], vec![0, 1], vec![0, 0]),
        ];
        for fam in &fams {
            let lax = sigma_lax(fam);
            for i in 0..=lax.n() {
                let r = lax.zero_curvature_residual(i).unwrap();
                assert!(
                    r.is_zero(),
                    "zero-curvature residual nonzero for i = {i} on (L,N)=({},{})",
                    lax.l(),
                    lax.n()
                );
            }
            // Float spot-check assembles the pieces numerically.
            let tvals: Vec<f64> = (0..=lax.n()).map(|k| 1.3 + 0.4 * k as f64).collect();
            let norm = lax.zero_curvature_float(0, &tvals, 0.7).unwrap();
            assert!(norm < 1e-12, "float residual {norm}");
        }
    }

    #[test]
    fn covariant_residue_flow_holds_and_plain_form_obstructs() {
        let fam = family(vec![rat(3, 2), rat(-2, 3)], vec![0, 1], vec![0, 0]);
        let lax = sigma_lax(&fam);
        for report in lax.deformation_reports().unwrap() {
            assert!(report.pass, "{} {:?} failed", report.id, report.indices);
        }
        // The plain display differs from the covariant one exactly by the
        // commutator with the constant part of B_i.
        let mut any_obstruction = false;
        for i in 0..=lax.n() {
            for k in 0..=lax.n() + 1 {
                let plain = lax.schlesinger_residual(i, k, false);
                let obstruction = Mat::commutator(&lax.twist(i), &lax.residue(k));
                assert_eq!(plain, obstruction, "plain residual vs obstruction ({i},{k})");
                if !obstruction.is_zero() {
                    any_obstruction = true;
                }
            }
        }
        assert!(
            any_obstruction,
            "expected at least one nonvanishing plain-form obstruction"
        );
        let plain = lax.schlesinger_plain_reports();
        assert!(plain.iter().any(|r| !r.pass));
    }

    #[test]
    fn point_gauge_traces_give_hamiltonians_symbolically() {
        for (theta, nu, nup) in [
            (vec![rat(3, 2), rat(-2, 3)], vec![0, 1], vec![0, 0]),
            (vec![rat(5, 3), rat(-3, 4)], vec![0, 1, 1], vec![0, 0, 1]),
            (vec![rat(1, 3), rat(-5, 6), rat(1, 1)], vec![0, 1], vec![0, 0]),
        ] {
            let fam = family(theta, nu, nup);
            let params = CanonicalParams::from_grid(&fam.base());
            let sys = HamiltonianSystem::new(params.clone()).unwrap();
            let chart = sys.chart();
            let dim = chart.dim();
            let n = chart.n();
            // Combined space: coordinates at 0..dim, deformation variables after.
            let state: Vec<RationalFunction> = (0..dim).map(RationalFunction::var).collect();
            let svals: Vec<RationalFunction> =
                (0..n).map(|k| RationalFunction::var(dim + k)).collect();
            let plax = lax_from_point(&params, &svals, &state).unwrap();

            let lift = |poly: &PhasePoly| -> RationalFunction {
                let renames: Vec<RationalFunction> =
                    (0..n).map(|k| RationalFunction::var(dim + k)).collect();
                poly.eval(&state, &|c| c.eval_gen(&renames)).unwrap()
            };

            // Pairing traces against the explicit double sums, including the
            // boundary-extended entries.
            for i in 0..=n {
                for j in 0..=n {
                    let mut expect = PhasePoly::zero();
                    for m in 0..plax.l() {
                        for nn in 0..plax.l() {
                            let term = chart
                                .ext_q(i, m)
                                .mul(&chart.ext_p(&params, j, m))
                                .mul(&chart.ext_q(j, nn))
                                .mul(&chart.ext_p(&params, i, nn));
                            expect = expect.add(&term);
                        }
                    }
                    assert_eq!(
                        plax.trace_pair(i, j),
                        lift(&expect),
                        "trace pairing ({i},{j})"
                    );
                }
                // tr(A_i A_i) telescopes to theta_i^2.
                let th = RationalFunction::constant(
                    params.theta()[i].clone() * params.theta()[i].clone(),
                );
                assert_eq!(plax.trace_pair(i, i), th, "squared trace {i}");
            }
            // Pairing with the z = 0 residue.
            for i in 0..=n {
                let mut expect = PhasePoly::zero();
                for m in 0..plax.l() {
                    let e = PhasePoly::constant(RationalFunction::constant(params.e_at(m as i64)));
                    expect = expect.sub(
                        &e.mul(&chart.ext_q(i, m)).mul(&chart.ext_p(&params, i, m)),
                    );
                }
                for j in 0..=n {
                    for m in 0..plax.l() {
                        for nn in m + 1..plax.l() {
                            let term = chart
                                .ext_q(i, m)
                                .mul(&chart.ext_p(&params, j, m))
                                .mul(&chart.ext_q(j, nn))
                                .mul(&chart.ext_p(&params, i, nn));
                            expect = expect.sub(&term);
                        }
                    }
                }
                assert_eq!(
                    plax.trace_pair(i, n + 1),
                    lift(&expect),
                    "trace pairing ({i}, zero residue)"
                );
            }
            // The trace Hamiltonian reproduces the polynomial one identically.
            for i in 1..=n {
                let lhs = plax.h_trace(i).unwrap();
                let rhs = hamiltonian_in_phase_space(&sys, i).unwrap();
                assert_eq!(lhs, rhs, "H_{i} from traces");
            }
        }
    }

    #[test]
    fn trace_hamiltonian_matches_at_rational_points() {
        let fam = family(vec![rat(3, 2), rat(-2, 3)], vec![0, 1], vec![0, 0]);
        let params = CanonicalParams::from_grid(&fam.base());
        let sys = HamiltonianSystem::new(params.clone()).unwrap();
        // Origin oracle: both sides equal e_0 theta_1/s + (kappa_0 - theta_1) theta_1/(s(s-1)).
        let th = params.theta()[1].clone();
        let shift = (params.kappa_at(0) - th.clone()) * th.clone();
        for sv in [rat(7, 3), rat(-4, 5), rat(9, 2)] {
            let state = vec![rat_int(0), rat_int(0)];
            let plax = lax_from_point(&params, &[sv.clone()], &state).unwrap();
            let got = plax.h_trace(1).unwrap();
            let expect = params.e_at(0) * th.clone() / sv.clone()
                + shift.clone() / (sv.clone() * (sv.clone() - rat_int(1)));
            assert_eq!(got, expect);
            assert_eq!(sys.eval_rat(sys.h(1), &[sv.clone()], &state).unwrap(), expect);
        }
        // Random rational points.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let state: Vec<Rat> = (0..2).map(|_| rat(rng.random_range(-9..10), 4)).collect();
            let sv = rat(rng.random_range(2..40), 7);
            let plax = lax_from_point(&params, &[sv.clone()], &state).unwrap();
            assert_eq!(
                plax.h_trace(1).unwrap(),
                sys.eval_rat(sys.h(1), &[sv.clone()], &state).unwrap()
            );
        }
    }

    #[test]
    fn point_gauge_structure_reports_pass() {
        let fam = family(vec![rat(1, 3), rat(-5, 6), rat(1, 1)], vec![0, 1], vec![0, 0]);
        let params = CanonicalParams::from_grid(&fam.base());
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let state: Vec<Rat> = (0..4).map(|_| rat(rng.random_range(-9..10), 5)).collect();
        let svals = vec![rat(5, 2), rat(-7, 3)];
        let plax = lax_from_point(&params, &svals, &state).unwrap();
        for report in plax.structure_reports().unwrap() {
            assert!(report.pass, "point-gauge {} failed", report.id);
        }
        assert_eq!(plax.pole(0), &rat_int(1));
        assert_eq!(plax.pole(3), &rat_int(0));
    }

    #[test]
    fn gauge_conjugation_preserves_traces() {
        // Same grid, both gauges: traces of residue products agree exactly as
        // rational functions of t, because the gauges differ by diagonal
        // conjugation.
        let fam = family(vec![rat(3, 2), rat(-2, 3)], vec![0, 1], vec![0, 0]);
        let phase = SigmaPhase::new(&fam).unwrap();
        let lax = SigmaLax::new(&phase).unwrap();
        let params = CanonicalParams::from_grid(&fam.base());
        let l = params.l();
        let state = vec![
            phase.q(1, 1).unwrap(),
            phase.p(1, 1).unwrap(),
        ];
        // s_i = (t_i/t_0)^L.
        let svals = vec![RationalFunction::from_poly(LaurentPoly::from_terms(vec![(
            {
                let mut key = vec![0i32; 2];
                key[0] = -(l as i32);
                key[1] = l as i32;
                key
            },
            rat_int(1),
        )]))];
        let plax = lax_from_point(&params, &svals, &state).unwrap();
        for i in 0..plax.residue_count() {
            for j in 0..plax.residue_count() {
                let sigma_trace = lax.residue(i).matmul(lax.residue(j)).trace();
                assert_eq!(
                    plax.trace_pair(i, j),
                    sigma_trace,
                    "trace pairing ({i},{j}) across gauges"
                );
            }
        }
    }

    #[test]
    fn accessory_parameter_count_examples() {
        // The standard spectral type gives 2N(L-1).
        assert_eq!(accessory_count(&spectral_type(2, 1)).unwrap(), 2);
        assert_eq!(accessory_count(&spectral_type(3, 2)).unwrap(), 8);
        assert_eq!(accessory_count(&spectral_type(4, 1)).unwrap(), 6);
        for (l, n) in [(2, 1), (2, 2), (3, 1), (3, 2), (4, 1)] {
            assert_eq!(
                accessory_count(&spectral_type(l, n)).unwrap(),
                2 * (n as i64) * (l as i64 - 1)
            );
        }
        // Four generic rank-2 points.
        assert_eq!(
            accessory_count(&[vec![1, 1], vec![1, 1], vec![1, 1], vec![1, 1]]).unwrap(),
            2
        );
        assert!(accessory_count(&[vec![1, 1], vec![2]]).is_err());
        assert!(accessory_count(&[vec![1, 1], vec![2], vec![3]]).is_err());
        assert!(accessory_count(&[vec![1, 1], vec![2], vec![0, 2]]).is_err());
    }

    #[test]
    fn riemann_scheme_lists_exponents() {
        let fam = family(vec![rat(5, 3), rat(-3, 4)], vec![0, 1, 1], vec![0, 0, 1]);
        let lax = sigma_lax(&fam);
        let scheme = lax.riemann_scheme();
        assert_eq!(scheme.columns.len(), 4);
        assert_eq!(scheme.columns[0].0, "u_0");
        assert_eq!(scheme.columns[0].1[0], rat(-5, 3));
        assert_eq!(scheme.columns[1].1[0], rat(3, 4));
        assert_eq!(scheme.columns[2].0, "0");
        assert_eq!(scheme.columns[3].0, "infinity");
        assert_eq!(scheme.exponent_sum(), rat_int(0));
        let js = scheme.to_json();
        assert_eq!(js.as_array().unwrap().len(), 4);
        let lax_js = lax.to_json().unwrap();
        assert_eq!(lax_js["gauge"], "sigma");
        assert_eq!(lax_js["a"].as_array().unwrap().len(), 4);
        assert_eq!(lax_js["b"].as_array().unwrap().len(), 2);
    }
}
