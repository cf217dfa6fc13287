//! Partitions, Maya diagrams, and L-core partitions indexed by integer vectors.
//!
//! A Maya diagram is a cofinite-below subset of the integers: all integers below some
//! level are present, plus finitely many "particles" above it. Reading the gaps of a
//! Maya diagram from the top produces a partition, and conversely a partition plus a
//! charge determines a Maya diagram.
//!
//! An integer vector nu of length L >= 2 determines the Maya diagram
//!
//! ```text
//!   M(nu) = union_{j=1..L} { L*k + j : k < nu_j },
//! ```
//!
//! whose partition lambda(nu) is an L-core: no cell of its Young diagram has hook
//! length divisible by L. Shifting every component of nu by the same integer leaves
//! lambda(nu) unchanged, which is what makes the downstream character grids
//! (L,L)-periodic.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// An integer partition: weakly decreasing positive parts, trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Creates a partition, trimming trailing zeros.
    ///
    /// Returns an error if the parts are not weakly decreasing.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if !parts.windows(2).all(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "partition parts must be weakly decreasing, got {parts:?}"
            )));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition { parts })
    }

    /// The empty partition.
    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    /// The parts, with no trailing zeros.
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// The i-th part (0-based), zero beyond the last row.
    pub fn part(&self, i: usize) -> usize {
        self.parts.get(i).copied().unwrap_or(0)
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    /// True for the empty partition.
    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Sum of the parts.
    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    /// The conjugate partition (columns of the Young diagram).
    pub fn conjugate(&self) -> Partition {
        let cols = self.part(0);
        let parts = (0..cols)
            .map(|j| self.parts.iter().filter(|&&p| p > j).count())
            .collect();
        Partition { parts }
    }

    /// Hook lengths of every cell, row by row: the hook of cell (i, j) counts the
    /// cells to its right, below it, and itself.
    pub fn hook_lengths(&self) -> Vec<Vec<usize>> {
        let conj = self.conjugate();
        self.parts
            .iter()
            .enumerate()
            .map(|(i, &row)| {
                (0..row)
                    .map(|j| row - j + conj.part(j) - i - 1)
                    .collect()
            })
            .collect()
    }

    /// True if no hook length is divisible by `l`.
    pub fn is_core(&self, l: usize) -> bool {
        self.hook_lengths()
            .iter()
            .flatten()
            .all(|&h| h % l != 0)
    }

    /// The charge-zero Maya diagram of this partition, with particles at
    /// `part(i) - i - 1` for every row index i >= 0.
    pub fn to_maya(&self) -> MayaDiagram {
        let head: Vec<i64> = self
            .parts
            .iter()
            .enumerate()
            .map(|(i, &p)| p as i64 - i as i64 - 1)
            .collect();
        let offset = -(self.parts.len() as i64) - 1;
        MayaDiagram::new(offset, head)
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition{:?}", self.parts)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// A cofinite-below subset of the integers: every integer `<= offset` is present,
/// together with the finitely many `head` elements, all `> offset + 1`.
///
/// The representation is normalized: `offset` is the largest integer whose entire
/// lower ray is contained in the set, so `offset + 1` is never in the set and the
/// head is sorted strictly increasing.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MayaDiagram {
    offset: i64,
    head: Vec<i64>,
}

impl MayaDiagram {
    /// Builds the diagram containing `{ x : x <= offset }` together with `head`,
    /// normalizing the representation.
    pub fn new(offset: i64, head: Vec<i64>) -> Self {
        let mut head: Vec<i64> = head.into_iter().filter(|&x| x > offset).collect();
        head.sort_unstable();
        head.dedup();
        let mut offset = offset;
        while head.first() == Some(&(offset + 1)) {
            head.remove(0);
            offset += 1;
        }
        MayaDiagram { offset, head }
    }

    /// Largest integer whose whole lower ray lies in the set.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// The finitely many elements above the offset, sorted increasing.
    pub fn head(&self) -> &[i64] {
        &self.head
    }

    /// Membership test.
    pub fn contains(&self, x: i64) -> bool {
        x <= self.offset || self.head.binary_search(&x).is_ok()
    }

    /// The partition read off the diagram: with the elements enumerated in
    /// decreasing order m_1 > m_2 > ..., the i-th part is
    /// `sum_{j >= i} (m_j - m_{j+1} - 1)`, which is eventually zero.
    pub fn to_partition(&self) -> Partition {
        // Elements above the offset contribute m_1..m_h; below them the diagram is
        // the unbroken ray ending at `offset`, so row h+1 onward is empty.
        let h = self.head.len();
        let parts: Vec<usize> = self
            .head
            .iter()
            .rev()
            .enumerate()
            .map(|(idx, &m)| {
                // idx-th largest element (0-based): lambda = m - offset + idx - h.
                (m - self.offset + idx as i64 - h as i64) as usize
            })
            .collect();
        Partition::new(parts).expect("maya gap counts are weakly decreasing")
    }
}

impl fmt::Debug for MayaDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Maya(..<={}; {:?})", self.offset, self.head)
    }
}

/// An integer vector nu of length L >= 2 indexing an L-core partition.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoreIndex {
    nu: Vec<i64>,
}

impl CoreIndex {
    /// Wraps the vector; L = nu.len() must be at least 2.
    pub fn new(nu: Vec<i64>) -> Result<Self> {
        if nu.len() < 2 {
            return Err(Error::invalid(format!(
                "core index needs length >= 2, got {}",
                nu.len()
            )));
        }
        Ok(CoreIndex { nu })
    }

    /// The modulus L.
    pub fn l(&self) -> usize {
        self.nu.len()
    }

    /// The components nu_1..nu_L (0-based slice).
    pub fn components(&self) -> &[i64] {
        &self.nu
    }

    /// Sum of the components.
    pub fn total(&self) -> i64 {
        self.nu.iter().sum()
    }

    /// The component incremented on the step `m-1 -> m` of the shift chain:
    /// nu_m with 1-based index read cyclically, so `component_cyclic(1)` is
    /// the first component and `component_cyclic(0)` the last.
    pub fn component_cyclic(&self, m: i64) -> i64 {
        let l = self.l() as i64;
        self.nu[(m - 1).rem_euclid(l) as usize]
    }

    /// The shifted vector nu(m): one is added to the first `m mod L` components and
    /// `floor(m / L)` to all of them, so `shifted(m + L)` differs from `shifted(m)`
    /// by the all-ones vector and indexes the same core.
    pub fn shifted(&self, m: i64) -> CoreIndex {
        let l = self.l() as i64;
        let q = m.div_euclid(l);
        let r = m.rem_euclid(l) as usize;
        let nu = self
            .nu
            .iter()
            .enumerate()
            .map(|(j, &v)| v + q + i64::from(j < r))
            .collect();
        CoreIndex { nu }
    }

    /// The Maya diagram `union_j { L*k + j : k < nu_j }`.
    pub fn to_maya(&self) -> MayaDiagram {
        let l = self.l() as i64;
        let min = *self.nu.iter().min().unwrap();
        let max = *self.nu.iter().max().unwrap();
        // Everything at or below L*(min-1)+1 is in the set; collect explicitly above.
        let offset = l * (min - 1) + 1;
        let head: Vec<i64> = (offset + 1..=l * max)
            .filter(|&x| {
                let j = (x - 1).rem_euclid(l); // 0-based residue class index
                let k = (x - 1 - j) / l; // x = L*k + (j+1)
                k < self.nu[j as usize]
            })
            .collect();
        MayaDiagram::new(offset, head)
    }

    /// The L-core partition lambda(nu).
    pub fn to_core_partition(&self) -> Partition {
        self.to_maya().to_partition()
    }

    /// Weight |lambda(nu(m))| of the core at grid row m; the degree grid of a
    /// character array is built from differences of these.
    pub fn core_weight_at(&self, m: i64) -> i64 {
        self.shifted(m).to_core_partition().weight() as i64
    }
}

impl fmt::Debug for CoreIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CoreIndex{:?}", self.nu)
    }
}

impl fmt::Display for CoreIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.nu.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn rejects_increasing_parts() {
        assert!(Partition::new(vec![1, 2]).is_err());
    }

    #[test]
    fn trims_trailing_zeros() {
        assert_eq!(pt(&[3, 1, 0, 0]), pt(&[3, 1]));
    }

    #[test]
    fn hooks_of_two_one() {
        let hooks: Vec<usize> = pt(&[2, 1]).hook_lengths().into_iter().flatten().collect();
        assert_eq!(hooks, vec![3, 1, 1]);
    }

    #[test]
    fn maya_of_zero_one_mod_two() {
        let nu = CoreIndex::new(vec![0, 1]).unwrap();
        let maya = nu.to_maya();
        assert_eq!(maya.offset(), 0);
        assert_eq!(maya.head(), &[2]);
        assert_eq!(nu.to_core_partition(), pt(&[1]));
    }

    #[test]
    fn staircases_from_zero_n() {
        for n in 0..6i64 {
            let nu = CoreIndex::new(vec![0, n]).unwrap();
            let expect: Vec<usize> = (1..=n as usize).rev().collect();
            assert_eq!(nu.to_core_partition(), pt(&expect));
        }
    }

    #[test]
    fn trivial_core_mod_three() {
        let nu = CoreIndex::new(vec![1, 0, 0]).unwrap();
        assert_eq!(nu.to_core_partition(), Partition::empty());
    }

    #[test]
    fn shifted_wraps_periodically() {
        let nu = CoreIndex::new(vec![0, 1, -1]).unwrap();
        assert_eq!(
            nu.shifted(4).components(),
            &[2, 2, 0],
            "m=4 adds 1 to the first component and 1 everywhere"
        );
        // Stepping backward removes marks from the last component first.
        assert_eq!(nu.shifted(-1).components(), &[0, 1, -2]);
        for m in -4..=4 {
            assert_eq!(
                nu.shifted(m + 3).to_core_partition(),
                nu.shifted(m).to_core_partition()
            );
        }
    }

    #[test]
    fn cores_have_no_divisible_hooks() {
        for l in 2..=5usize {
            let range = -2i64..=2;
            // All nu vectors with entries in [-2, 2] would be 5^l; sample the full
            // cube for l <= 3 and a lattice slice beyond.
            let mut stack = vec![Vec::new()];
            while let Some(v) = stack.pop() {
                if v.len() == l {
                    let nu = CoreIndex::new(v).unwrap();
                    let lam = nu.to_core_partition();
                    assert!(lam.is_core(l), "lambda({nu}) = {lam} has an {l}-hook");
                    continue;
                }
                let step = if l <= 3 { 1 } else { 2 };
                let mut x = *range.start();
                while x <= *range.end() {
                    let mut w = v.clone();
                    w.push(x);
                    stack.push(w);
                    x += step;
                }
            }
        }
    }

    #[test]
    fn constant_shift_fixes_core() {
        for l in 2..=4usize {
            let nu = CoreIndex::new((0..l as i64).map(|j| (j * j) % 3 - 1).collect()).unwrap();
            let base = nu.to_core_partition();
            for k in [-2i64, -1, 1, 3] {
                let shifted =
                    CoreIndex::new(nu.components().iter().map(|v| v + k).collect()).unwrap();
                assert_eq!(shifted.to_core_partition(), base);
            }
        }
    }

    #[test]
    fn partition_maya_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9e3779b9);
        for _ in 0..100 {
            let mut parts: Vec<usize> = (0..rng.random_range(0..6usize))
                .map(|_| rng.random_range(1..=7usize))
                .collect();
            parts.sort_unstable_by(|a, b| b.cmp(a));
            while parts.iter().sum::<usize>() > 20 {
                parts.pop();
            }
            let lam = Partition::new(parts).unwrap();
            assert_eq!(lam.to_maya().to_partition(), lam);
        }
    }

    #[test]
    fn maya_normalization() {
        // Head touching the ray gets absorbed into the offset.
        let m = MayaDiagram::new(0, vec![1, 2, 5]);
        assert_eq!(m.offset(), 2);
        assert_eq!(m.head(), &[5]);
        assert!(m.contains(-10) && m.contains(5) && !m.contains(3));
    }

    #[test]
    fn serde_shapes() {
        let lam = pt(&[2, 1]);
        assert_eq!(serde_json::to_string(&lam).unwrap(), "[2,1]");
        let nu = CoreIndex::new(vec![0, -1, 2]).unwrap();
        assert_eq!(serde_json::to_string(&nu).unwrap(), "[0,-1,2]");
        let back: CoreIndex = serde_json::from_str("[0,-1,2]").unwrap();
        assert_eq!(back, nu);
    }
}
