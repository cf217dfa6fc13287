//! Universal characters, their power-sum substitution, and periodic
//! tau-function grids.
//!
//! The universal character of a pair of partitions (lambda, mu) is the
//! determinant of twisted Jacobi-Trudi type
//!
//! ```text
//! S_[lambda,mu] = det M,   M a (l + l') x (l + l') matrix with
//!   M[i][j] = ht_{mu_{l'-i+1} + i - j}   for rows i = 1..l'
//!   M[i][j] = h_{lambda_{i-l'} - i + j}  for rows i = l'+1..l'+l
//! ```
//!
//! where `h_n` and `ht_n` are the complete homogeneous functions of the `x`
//! and `y` variables. This crate works after the similarity substitution
//!
//! ```text
//! x_n = (1/n) sum_i theta_i t_i^n,    y_n = (1/n) sum_i theta_i t_i^-n,
//! ```
//!
//! so every character becomes an exact Laurent polynomial in t_0..t_N,
//! homogeneous of degree |lambda| - |mu|.
//!
//! A [`SigmaGrid`] is the doubly periodic array `sigma_{m,n} =
//! S_[lambda(nu(m)), lambda(nu'(n))]` attached to a pair of integer vectors of
//! length L: row m uses the L-core of the shift chain nu(m), column n the
//! L-core of nu'(n), and both directions repeat with period L. These grids
//! are the tau functions of the Schlesinger-type system: the degree table
//! carries the parameters (e_n, kappa_n) of the isomonodromic side, and
//! shifting theta by integer vectors yields the adjacent grids the bilinear
//! identities couple. [`GridFamily`] memoizes those shifted grids.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use num_traits::Zero;
use serde_json::json;

use crate::algebra::{det_poly, rat_to_string, LaurentPoly, Rat};
use crate::error::{Error, Result};
use crate::partition::{CoreIndex, Partition};

/// Everything needed to build one tau-function grid: parameters theta and the
/// two length-L integer vectors indexing the row and column core chains.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    theta: Vec<Rat>,
    nu: CoreIndex,
    nu_prime: CoreIndex,
}

impl GridSpec {
    pub fn new(theta: Vec<Rat>, nu: Vec<i64>, nu_prime: Vec<i64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::invalid("at least one theta parameter is required"));
        }
        if theta.len() > crate::algebra::MAX_VARS {
            return Err(Error::invalid(format!(
                "at most {} independent variables are supported, got {}",
                crate::algebra::MAX_VARS,
                theta.len()
            )));
        }
        if nu.len() != nu_prime.len() {
            return Err(Error::invalid(format!(
                "row and column index vectors must share the period: {} vs {}",
                nu.len(),
                nu_prime.len()
            )));
        }
        Ok(GridSpec {
            theta,
            nu: CoreIndex::new(nu)?,
            nu_prime: CoreIndex::new(nu_prime)?,
        })
    }

    /// The grid period L.
    pub fn l(&self) -> usize {
        self.nu.l()
    }

    /// The index N of the last independent variable t_N.
    pub fn n(&self) -> usize {
        self.theta.len() - 1
    }

    /// Number of independent variables, N + 1.
    pub fn num_vars(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[Rat] {
        &self.theta
    }

    pub fn theta_sum(&self) -> Rat {
        self.theta.iter().fold(Rat::zero(), |acc, v| acc + v)
    }

    pub fn nu(&self) -> &CoreIndex {
        &self.nu
    }

    pub fn nu_prime(&self) -> &CoreIndex {
        &self.nu_prime
    }

    /// The spec with theta replaced by theta + offset (component-wise).
    pub fn theta_shifted(&self, offset: &[i64]) -> GridSpec {
        assert_eq!(
            offset.len(),
            self.theta.len(),
            "theta offset must have one entry per variable"
        );
        let theta = self
            .theta
            .iter()
            .zip(offset)
            .map(|(v, &o)| v + Rat::from_integer(o.into()))
            .collect();
        GridSpec {
            theta,
            nu: self.nu.clone(),
            nu_prime: self.nu_prime.clone(),
        }
    }
}

/// The power sum `sum_i theta_i t_i^k` as a Laurent polynomial; `k` may be
/// negative.
fn power_sum(theta: &[Rat], k: i32) -> LaurentPoly {
    let mut acc = LaurentPoly::zero();
    for (i, c) in theta.iter().enumerate() {
        if !c.is_zero() {
            acc = &acc + &LaurentPoly::monomial_pow(i, k, c.clone());
        }
    }
    acc
}

/// The substituted complete homogeneous functions `h_0..h_max` (for
/// `direction = +1`) or `ht_0..ht_max` (for `direction = -1`), computed by the
/// Newton recurrence `n h_n = sum_{k=1}^n p_k h_{n-k}` with
/// `p_k = sum_i theta_i t_i^{direction*k}`.
fn homogeneous_table(theta: &[Rat], direction: i32, max: usize) -> Vec<LaurentPoly> {
    debug_assert!(direction == 1 || direction == -1);
    let mut h = Vec::with_capacity(max + 1);
    h.push(LaurentPoly::one());
    let p: Vec<LaurentPoly> = (1..=max as i32)
        .map(|k| power_sum(theta, direction * k))
        .collect();
    for n in 1..=max {
        let mut acc = LaurentPoly::zero();
        for k in 1..=n {
            acc = &acc + &(&p[k - 1] * &h[n - k]);
        }
        h.push(acc.scale(&Rat::new(1.into(), (n as i64).into())));
    }
    h
}

fn table_entry(table: &[LaurentPoly], index: i64) -> LaurentPoly {
    if index < 0 {
        LaurentPoly::zero()
    } else {
        table[index as usize].clone()
    }
}

/// The twisted Jacobi-Trudi determinant over precomputed tables.
fn jt_determinant(
    lambda: &Partition,
    mu: &Partition,
    h: &[LaurentPoly],
    ht: &[LaurentPoly],
) -> LaurentPoly {
    let l = lambda.len();
    let lp = mu.len();
    let size = l + lp;
    if size == 0 {
        return LaurentPoly::one();
    }
    let mut rows = Vec::with_capacity(size);
    for i in 1..=size {
        let mut row = Vec::with_capacity(size);
        for j in 1..=size {
            let entry = if i <= lp {
                // mirrored column of mu, in the y-variables
                let part = mu.part(lp - i) as i64;
                table_entry(ht, part + i as i64 - j as i64)
            } else {
                let part = lambda.part(i - lp - 1) as i64;
                table_entry(h, part - i as i64 + j as i64)
            };
            row.push(entry);
        }
        rows.push(row);
    }
    det_poly(&rows)
}

/// Largest homogeneous-function index the determinant for (lambda, mu) can
/// reach in either table.
fn jt_max_index(lambda: &Partition, mu: &Partition) -> usize {
    let size = lambda.len() + mu.len();
    let x = lambda.part(0) + size;
    let y = mu.part(0) + size;
    x.max(y)
}

/// The substituted universal character `S_[lambda,mu]` as an exact Laurent
/// polynomial in t_0..t_N; homogeneous of degree `|lambda| - |mu|`.
pub fn universal_character(lambda: &Partition, mu: &Partition, theta: &[Rat]) -> LaurentPoly {
    let max = jt_max_index(lambda, mu);
    let h = homogeneous_table(theta, 1, max);
    let ht = homogeneous_table(theta, -1, max);
    jt_determinant(lambda, mu, &h, &ht)
}

/// A doubly (L,L)-periodic grid of substituted universal characters together
/// with its degree table.
#[derive(Clone, Debug)]
pub struct SigmaGrid {
    spec: GridSpec,
    /// Row-major L*L window: cell (m, n) at index m*L + n.
    cells: Vec<LaurentPoly>,
    /// d_{m,n} = |lambda(nu(m))| - |lambda(nu'(n))| over the same window.
    degrees: Vec<i64>,
}

impl SigmaGrid {
    /// Builds the full period window. Cells that vanish identically are kept
    /// (the bilinear layer tolerates them); call [`SigmaGrid::require_nonzero`]
    /// before forming ratio variables.
    pub fn build(spec: GridSpec) -> Self {
        let l = spec.l();
        let row_cores: Vec<Partition> = (0..l as i64)
            .map(|m| spec.nu.shifted(m).to_core_partition())
            .collect();
        let col_cores: Vec<Partition> = (0..l as i64)
            .map(|n| spec.nu_prime.shifted(n).to_core_partition())
            .collect();
        let max = row_cores
            .iter()
            .flat_map(|lam| col_cores.iter().map(move |mu| jt_max_index(lam, mu)))
            .max()
            .unwrap_or(0);
        let h = homogeneous_table(&spec.theta, 1, max);
        let ht = homogeneous_table(&spec.theta, -1, max);
        let mut cells = Vec::with_capacity(l * l);
        let mut degrees = Vec::with_capacity(l * l);
        for lam in &row_cores {
            for mu in &col_cores {
                cells.push(jt_determinant(lam, mu, &h, &ht));
                degrees.push(lam.weight() as i64 - mu.weight() as i64);
            }
        }
        SigmaGrid {
            spec,
            cells,
            degrees,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn l(&self) -> usize {
        self.spec.l()
    }

    fn slot(&self, m: i64, n: i64) -> usize {
        let l = self.l() as i64;
        (m.rem_euclid(l) * l + n.rem_euclid(l)) as usize
    }

    /// The cell sigma_{m,n}; both indices wrap with period L.
    pub fn sigma(&self, m: i64, n: i64) -> &LaurentPoly {
        &self.cells[self.slot(m, n)]
    }

    /// The homogeneity degree d_{m,n}; periodic in both indices.
    pub fn degree(&self, m: i64, n: i64) -> i64 {
        self.degrees[self.slot(m, n)]
    }

    /// Window positions (m, n) in 0..L whose cell vanishes identically.
    pub fn zero_cells(&self) -> Vec<(usize, usize)> {
        let l = self.l();
        (0..l * l)
            .filter(|&k| self.cells[k].is_zero())
            .map(|k| (k / l, k % l))
            .collect()
    }

    /// Fails with a diagnostic if any cell in the window vanishes identically,
    /// which happens only for resonant parameter choices and makes the ratio
    /// variables of the nonlinear system undefined.
    pub fn require_nonzero(&self) -> Result<()> {
        if let Some((m, n)) = self.zero_cells().first().copied() {
            return Err(Error::ZeroSigmaCell {
                m,
                n,
                theta: self
                    .spec
                    .theta
                    .iter()
                    .map(rat_to_string)
                    .collect::<Vec<_>>()
                    .join(","),
                hint: "a grid cell vanishes identically; this indicates resonant \
                       parameters (for example an integer theta component), so pick \
                       parameters off the resonance locus"
                    .into(),
            });
        }
        Ok(())
    }

    /// Returns a copy with the window cell at (m, n) multiplied by `factor`.
    /// A single tampered cell breaks the bilinear and flow identities, so
    /// negative-control runs use this to prove the checks reject bad data.
    pub fn with_scaled_cell(&self, m: i64, n: i64, factor: &Rat) -> SigmaGrid {
        let mut out = self.clone();
        let slot = out.slot(m, n);
        out.cells[slot] = out.cells[slot].scale(factor);
        out
    }

    /// JSON with the spec, the degree table, and every cell in canonical text
    /// form; suitable for report embedding.
    pub fn to_json(&self) -> serde_json::Value {
        let l = self.l();
        let degrees: Vec<Vec<i64>> = (0..l)
            .map(|m| (0..l).map(|n| self.degrees[m * l + n]).collect())
            .collect();
        let sigma: Vec<Vec<String>> = (0..l)
            .map(|m| (0..l).map(|n| self.cells[m * l + n].to_string()).collect())
            .collect();
        json!({
            "L": l,
            "N": self.spec.n(),
            "theta": self.spec.theta.iter().map(rat_to_string).collect::<Vec<_>>(),
            "nu": self.spec.nu.components(),
            "nu_prime": self.spec.nu_prime.components(),
            "degrees": degrees,
            "sigma": sigma,
        })
    }
}

/// A memoized family of grids sharing one base spec and differing by integer
/// shifts of theta; the bilinear identities relate up to four members at once.
pub struct GridFamily {
    base: GridSpec,
    cache: RefCell<BTreeMap<Vec<i64>, Rc<SigmaGrid>>>,
}

impl GridFamily {
    pub fn new(base: GridSpec) -> Self {
        GridFamily {
            base,
            cache: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.base
    }

    /// The grid at theta + offset, built on first use.
    pub fn shifted(&self, offset: &[i64]) -> Rc<SigmaGrid> {
        assert_eq!(offset.len(), self.base.num_vars());
        if let Some(hit) = self.cache.borrow().get(offset) {
            return Rc::clone(hit);
        }
        let grid = Rc::new(SigmaGrid::build(self.base.theta_shifted(offset)));
        self.cache
            .borrow_mut()
            .insert(offset.to_vec(), Rc::clone(&grid));
        grid
    }

    /// The unshifted grid.
    pub fn base(&self) -> Rc<SigmaGrid> {
        let zeros = vec![0; self.base.num_vars()];
        self.shifted(&zeros)
    }

    /// Number of distinct grids built so far.
    pub fn cached_count(&self) -> usize {
        self.cache.borrow().len()
    }

    /// Replaces the cached unshifted grid; shifted members are rebuilt
    /// honestly. Negative-control runs install a tampered grid here and then
    /// expect the identity suite to fail.
    pub fn override_base(&self, grid: SigmaGrid) {
        let zeros = vec![0; self.base.num_vars()];
        self.cache.borrow_mut().insert(zeros, Rc::new(grid));
    }
}

/// Canonical parameters of the Hamiltonian form: the exponent lists
/// `e_0..e_{L-1}` and `kappa_0..kappa_{L-1}` together with theta. Index
/// access extends affinely: `e_{n+L} = e_n + 1`, `kappa_{n+L} = kappa_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalParams {
    e: Vec<Rat>,
    kappa: Vec<Rat>,
    theta: Vec<Rat>,
}

impl CanonicalParams {
    /// Validates the two exponent sum rules: `sum e_n = (L-1)/2` and
    /// `sum kappa_n = sum theta_i`; both are preserved by every symmetry.
    pub fn new(e: Vec<Rat>, kappa: Vec<Rat>, theta: Vec<Rat>) -> Result<Self> {
        if e.len() != kappa.len() || e.len() < 2 {
            return Err(Error::invalid(
                "exponent lists must share a length of at least 2",
            ));
        }
        let l = e.len() as i64;
        let e_sum: Rat = e.iter().fold(Rat::zero(), |a, v| a + v);
        if e_sum != Rat::new((l - 1).into(), 2.into()) {
            return Err(Error::invalid(format!(
                "sum of e_n must be (L-1)/2, got {}",
                rat_to_string(&e_sum)
            )));
        }
        let k_sum: Rat = kappa.iter().fold(Rat::zero(), |a, v| a + v);
        let t_sum: Rat = theta.iter().fold(Rat::zero(), |a, v| a + v);
        if k_sum != t_sum {
            return Err(Error::invalid(format!(
                "sum of kappa_n must equal sum of theta_i: {} vs {}",
                rat_to_string(&k_sum),
                rat_to_string(&t_sum)
            )));
        }
        Ok(CanonicalParams { e, kappa, theta })
    }

    /// Derives the parameters of a grid from its degree table:
    /// `e_n = (d_{n,-n-1} - d_{n-1,-n-1} + n) / L` and
    /// `kappa_n = (d_{n,-n-1} - d_{n-1,-n} + sum theta) / L`.
    pub fn from_grid(grid: &SigmaGrid) -> Self {
        let l = grid.l() as i64;
        let theta_sum = grid.spec().theta_sum();
        let mut e = Vec::with_capacity(l as usize);
        let mut kappa = Vec::with_capacity(l as usize);
        for n in 0..l {
            let d_a = grid.degree(n, -n - 1);
            let e_n = Rat::new((d_a - grid.degree(n - 1, -n - 1) + n).into(), l.into());
            let k_n = (Rat::from_integer((d_a - grid.degree(n - 1, -n)).into()) + &theta_sum)
                / Rat::from_integer(l.into());
            e.push(e_n);
            kappa.push(k_n);
        }
        CanonicalParams {
            e,
            kappa,
            theta: grid.spec().theta().to_vec(),
        }
    }

    pub fn l(&self) -> usize {
        self.e.len()
    }

    /// Index N of the last theta.
    pub fn n(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn theta(&self) -> &[Rat] {
        &self.theta
    }

    pub fn theta_sum(&self) -> Rat {
        self.theta.iter().fold(Rat::zero(), |a, v| a + v)
    }

    pub fn e_list(&self) -> &[Rat] {
        &self.e
    }

    pub fn kappa_list(&self) -> &[Rat] {
        &self.kappa
    }

    /// `e_n` for any integer n via `e_{n+L} = e_n + 1`.
    pub fn e_at(&self, n: i64) -> Rat {
        let l = self.l() as i64;
        let q = n.div_euclid(l);
        &self.e[n.rem_euclid(l) as usize] + Rat::from_integer(q.into())
    }

    /// `kappa_n` for any integer n via `kappa_{n+L} = kappa_n`.
    pub fn kappa_at(&self, n: i64) -> Rat {
        let l = self.l() as i64;
        self.kappa[n.rem_euclid(l) as usize].clone()
    }

    /// Root parameter of the row reflection chain: `a_n = e_{n+1} - e_n`.
    pub fn alpha_at(&self, n: i64) -> Rat {
        self.e_at(n + 1) - self.e_at(n)
    }

    /// Root parameter of the column reflection chain:
    /// `b_n = e_{L-n} - e_{L-n-1} - kappa_{L-n} + kappa_{L-n-1}`.
    pub fn beta_at(&self, n: i64) -> Rat {
        let l = self.l() as i64;
        self.e_at(l - n) - self.e_at(l - n - 1) - self.kappa_at(l - n) + self.kappa_at(l - n - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, rat_int};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn partition(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    /// x_k = (1/k) sum_i theta_i t_i^k as a Laurent polynomial.
    fn x_sub(theta: &[Rat], k: i32) -> LaurentPoly {
        power_sum(theta, k).scale(&rat(1, i64::from(k.abs())))
    }

    #[test]
    fn characters_match_closed_forms() {
        for theta in [
            vec![rat(1, 2), rat(-1, 3)],
            vec![rat(2, 5), rat(3, 7), rat(-5, 2)],
        ] {
            let x1 = x_sub(&theta, 1);
            let x3 = x_sub(&theta, 3);
            let y1 = x_sub(&theta, -1);
            let empty = Partition::empty();
            assert_eq!(
                universal_character(&empty, &empty, &theta),
                LaurentPoly::one()
            );
            assert_eq!(universal_character(&partition(&[1]), &empty, &theta), x1);
            assert_eq!(
                universal_character(&empty, &partition(&[1]), &theta),
                y1.clone()
            );
            // S_[(1),(1)] = x1 y1 - 1
            assert_eq!(
                universal_character(&partition(&[1]), &partition(&[1]), &theta),
                &(&x1 * &y1) - &LaurentPoly::one()
            );
            // S_[(2,1),(1)] = y1 (x1^3/3 - x3) - x1^2
            let cubic = &x1.pow(3).scale(&rat(1, 3)) - &x3;
            assert_eq!(
                universal_character(&partition(&[2, 1]), &partition(&[1]), &theta),
                &(&y1 * &cubic) - &x1.pow(2)
            );
        }
    }

    #[test]
    fn schur_specialization_single_variable() {
        // With one variable, h_n = binom(theta + n - 1, n) t^n, so the Schur
        // function of a single row is that multiple of t^n.
        let theta = vec![rat(1, 2)];
        let s2 = universal_character(&partition(&[2]), &Partition::empty(), &theta);
        // h_2 = theta(theta+1)/2 t^2 = (1/2)(3/2)/2 = 3/8
        assert_eq!(s2, LaurentPoly::monomial_pow(0, 2, rat(3, 8)));
        // Column (1,1): e_2 = theta(theta-1)/2 = -1/8 t^2.
        let s11 = universal_character(&partition(&[1, 1]), &Partition::empty(), &theta);
        assert_eq!(s11, LaurentPoly::monomial_pow(0, 2, rat(-1, 8)));
    }

    fn sample_spec() -> GridSpec {
        GridSpec::new(
            vec![rat(1, 2), rat(-1, 3)],
            vec![0, 1],
            vec![0, 0],
        )
        .unwrap()
    }

    #[test]
    fn small_grid_cells() {
        let grid = SigmaGrid::build(sample_spec());
        let theta = [rat(1, 2), rat(-1, 3)];
        let x1 = x_sub(&theta, 1);
        let y1 = x_sub(&theta, -1);
        // Row 0 carries the core (1), row 1 the empty core; the column chain
        // nu' = (0,0) keeps the empty partition at every n.
        assert_eq!(grid.sigma(0, 0), &x1);
        assert_eq!(grid.sigma(1, 0), &LaurentPoly::one());
        assert_eq!(grid.sigma(0, 1), &x1);
        assert_eq!(grid.degree(0, 5), 1);
        assert_eq!(grid.degree(1, -7), 0);
        // Periodicity in both directions.
        assert_eq!(grid.sigma(2, -3), grid.sigma(0, 1));
        assert!(grid.zero_cells().is_empty());
        assert!(grid.require_nonzero().is_ok());
        let _ = y1;
    }

    #[test]
    fn grid_cells_are_homogeneous_of_table_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        for _ in 0..6 {
            let l = rng.random_range(2..4usize);
            let nu: Vec<i64> = (0..l).map(|_| rng.random_range(-1..2)).collect();
            let nup: Vec<i64> = (0..l).map(|_| rng.random_range(-1..2)).collect();
            let theta = vec![rat(1, 2), rat(2, 3)];
            let spec = GridSpec::new(theta, nu, nup).unwrap();
            let grid = SigmaGrid::build(spec);
            for m in 0..l as i64 {
                for n in 0..l as i64 {
                    let cell = grid.sigma(m, n);
                    assert!(
                        !cell.is_zero(),
                        "cell ({m},{n}) vanished for generic parameters"
                    );
                    assert_eq!(
                        cell.homogeneous_degree(),
                        Some(grid.degree(m, n)),
                        "degree mismatch at ({m},{n})"
                    );
                }
            }
        }
    }

    #[test]
    fn degree_differences_follow_the_core_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(93);
        for _ in 0..12 {
            let l = rng.random_range(2..5usize);
            let nu = CoreIndex::new((0..l).map(|_| rng.random_range(-2..3)).collect()).unwrap();
            let nup = CoreIndex::new((0..l).map(|_| rng.random_range(-2..3)).collect()).unwrap();
            for m in -3..4i64 {
                for n in -3..4i64 {
                    // d_{m,n} - d_{m-1,n} = L nu_m - |nu| with cyclic component.
                    let lhs = nu.core_weight_at(m) - nu.core_weight_at(m - 1);
                    assert_eq!(lhs, l as i64 * nu.component_cyclic(m) - nu.total());
                    // d_{m,n} - d_{m,n-1} = -L nu'_n + |nu'|.
                    let rhs = -(nup.core_weight_at(n) - nup.core_weight_at(n - 1));
                    assert_eq!(rhs, -(l as i64) * nup.component_cyclic(n) + nup.total());
                }
            }
        }
    }

    #[test]
    fn canonical_parameters_of_small_grid() {
        let grid = SigmaGrid::build(sample_spec());
        let params = CanonicalParams::from_grid(&grid);
        let theta_sum = rat(1, 6); // 1/2 - 1/3
        assert_eq!(params.e_list(), &[rat(1, 2), rat_int(0)]);
        assert_eq!(
            params.kappa_list(),
            &[
                (Rat::from_integer(1.into()) + &theta_sum) / Rat::from_integer(2.into()),
                (&theta_sum - Rat::from_integer(1.into())) / Rat::from_integer(2.into()),
            ]
        );
        // Affine extension.
        assert_eq!(params.e_at(2), rat(3, 2));
        assert_eq!(params.e_at(-1), rat_int(-1));
        assert_eq!(params.kappa_at(5), params.kappa_at(1));
        // Root parameter sums are both 1.
        let a_sum: Rat = (0..2).map(|n| params.alpha_at(n)).fold(Rat::zero(), |s, v| s + v);
        let b_sum: Rat = (0..2).map(|n| params.beta_at(n)).fold(Rat::zero(), |s, v| s + v);
        assert_eq!(a_sum, rat_int(1));
        assert_eq!(b_sum, rat_int(1));
    }

    #[test]
    fn parameter_sum_rules_hold_for_random_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..10 {
            let l = rng.random_range(2..5usize);
            let nvars = rng.random_range(1..4usize);
            let theta: Vec<Rat> = (0..nvars)
                .map(|_| rat(rng.random_range(-7..8), rng.random_range(2..5)))
                .collect();
            let nu: Vec<i64> = (0..l).map(|_| rng.random_range(-1..2)).collect();
            let nup: Vec<i64> = (0..l).map(|_| rng.random_range(-1..2)).collect();
            let spec = GridSpec::new(theta.clone(), nu, nup).unwrap();
            let grid = SigmaGrid::build(spec);
            let params = CanonicalParams::from_grid(&grid);
            // The constructor validation encodes both sum rules.
            let rebuilt = CanonicalParams::new(
                params.e_list().to_vec(),
                params.kappa_list().to_vec(),
                theta,
            );
            assert!(rebuilt.is_ok(), "{rebuilt:?}");
            // kappa_n also equals the scaled grid parameter at cell (n, -n):
            // kappa_{n,-n}/L with kappa_{m,n} = L(nu_m + nu'_n) - |nu| - |nu'| + sum theta.
            let l64 = l as i64;
            for n in 0..l64 {
                let spec = grid.spec();
                let big = Rat::from_integer(
                    (l64 * (spec.nu().component_cyclic(n) + spec.nu_prime().component_cyclic(-n))
                        - spec.nu().total()
                        - spec.nu_prime().total())
                    .into(),
                ) + spec.theta_sum();
                assert_eq!(
                    params.kappa_at(n),
                    big / Rat::from_integer(l64.into()),
                    "kappa mismatch at {n}"
                );
            }
        }
    }

    #[test]
    fn zero_cell_diagnostics() {
        // theta = (1) with a single variable makes S_[(1),(1)] = theta^2 - 1
        // vanish identically.
        let spec = GridSpec::new(vec![rat_int(1)], vec![0, 1], vec![0, 1]).unwrap();
        let grid = SigmaGrid::build(spec);
        assert!(!grid.zero_cells().is_empty());
        let err = grid.require_nonzero().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("resonant"), "unexpected message: {msg}");
    }

    #[test]
    fn family_cache_reuses_grids() {
        let family = GridFamily::new(sample_spec());
        let a = family.shifted(&[1, 0]);
        let b = family.shifted(&[1, 0]);
        assert!(Rc::ptr_eq(&a, &b));
        assert_eq!(family.cached_count(), 1);
        let base = family.base();
        assert_eq!(family.cached_count(), 2);
        // The shifted grid really is the grid of the shifted spec.
        let direct = SigmaGrid::build(sample_spec().theta_shifted(&[1, 0]));
        assert_eq!(a.sigma(0, 0), direct.sigma(0, 0));
        let _ = base;
    }

    #[test]
    fn grid_json_shape() {
        let grid = SigmaGrid::build(sample_spec());
        let v = grid.to_json();
        assert_eq!(v["L"], 2);
        assert_eq!(v["N"], 1);
        assert_eq!(v["theta"][0], "1/2");
        assert_eq!(v["nu"][1], 1);
        assert_eq!(v["degrees"][0][0], 1);
        let cell = v["sigma"][1][0].as_str().unwrap();
        assert_eq!(cell, "1");
    }
}
