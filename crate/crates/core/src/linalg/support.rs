use serde::{Deserialize, Serialize};

use super::matrix::{CVector, C64};
use crate::error::{Error, Result};

/// Sorted set of column indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    /// Validates that `indices` are strictly increasing and below `n`.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedSupport);
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::IndexOutOfBounds {
                    index: last,
                    len: n,
                });
            }
        }
        Ok(Self(indices))
    }

    /// Sorts and deduplicates arbitrary indices, then validates against `n`.
    pub fn from_unsorted<I: IntoIterator<Item = usize>>(indices: I, n: usize) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self::new(v, n)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.0, &other.0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        SupportSet(out)
    }

    pub fn difference(&self, other: &SupportSet) -> SupportSet {
        SupportSet(self.iter().filter(|&k| !other.contains(k)).collect())
    }

    /// Complement within `[0, n)`.
    pub fn complement(&self, n: usize) -> SupportSet {
        SupportSet((0..n).filter(|&k| !self.contains(k)).collect())
    }

    pub fn insert(&mut self, index: usize) {
        if let Err(pos) = self.0.binary_search(&index) {
            self.0.insert(pos, index);
        }
    }
}

impl<'a> IntoIterator for &'a SupportSet {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Vector of length `len` that is zero outside `support`.
///
/// Serialized as `{len, support, values}` with each value written as
/// `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalRepr", into = "SignalRepr")]
pub struct SparseSignal {
    len: usize,
    support: SupportSet,
    values: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct SignalRepr {
    len: usize,
    support: Vec<usize>,
    values: Vec<[f64; 2]>,
}

impl From<SparseSignal> for SignalRepr {
    fn from(x: SparseSignal) -> Self {
        Self {
            len: x.len,
            support: x.support.0,
            values: x.values.iter().map(|v| [v.re, v.im]).collect(),
        }
    }
}

impl TryFrom<SignalRepr> for SparseSignal {
    type Error = Error;

    fn try_from(r: SignalRepr) -> Result<Self> {
        let support = SupportSet::new(r.support, r.len)?;
        let values = r.values.iter().map(|v| C64::new(v[0], v[1])).collect();
        SparseSignal::new(r.len, support, values)
    }
}

impl SparseSignal {
    pub fn new(len: usize, support: SupportSet, values: Vec<C64>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} support indices but {} values",
                support.len(),
                values.len()
            )));
        }
        if let Some(&last) = support.as_slice().last() {
            if last >= len {
                return Err(Error::IndexOutOfBounds { index: last, len });
            }
        }
        Ok(Self {
            len,
            support,
            values,
        })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            support: SupportSet::empty(),
            values: Vec::new(),
        }
    }

    /// Keeps the entries of a dense vector that lie on `support`.
    pub fn restrict(x: &CVector, support: &SupportSet) -> Result<Self> {
        let values = support
            .iter()
            .map(|k| {
                x.get(k).copied().ok_or(Error::IndexOutOfBounds {
                    index: k,
                    len: x.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(x.len(), support.clone(), values)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn get(&self, index: usize) -> C64 {
        match self.support.as_slice().binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Number of entries that are exactly nonzero.
    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|v| v.norm_sqr() > 0.0).count()
    }

    /// Indices whose value is exactly nonzero.
    pub fn nonzero_support(&self) -> SupportSet {
        SupportSet(
            self.support
                .iter()
                .zip(&self.values)
                .filter(|(_, v)| v.norm_sqr() > 0.0)
                .map(|(k, _)| k)
                .collect(),
        )
    }

    pub fn to_dense(&self) -> CVector {
        let mut x = CVector::zeros(self.len);
        for (k, v) in self.support.iter().zip(&self.values) {
            x[k] = *v;
        }
        x
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Euclidean distance to another signal of the same length.
    pub fn distance(&self, other: &SparseSignal) -> f64 {
        (self.to_dense() - other.to_dense()).norm()
    }
}

/// Best `s`-term approximation: keeps the `s` entries of largest magnitude.
///
/// Equal magnitudes are resolved in favour of the lowest index, so the
/// returned support always has exactly `s` indices (some values may be zero
/// when `x` has fewer than `s` nonzeros).
pub fn hard_threshold(x: &CVector, s: usize) -> Result<SparseSignal> {
    let n = x.len();
    if s == 0 || s > n {
        return Err(Error::InvalidSparsity { s, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps lower indices first among equal magnitudes
    order.sort_by(|&a, &b| x[b].norm_sqr().total_cmp(&x[a].norm_sqr()));
    let mut kept = order[..s].to_vec();
    kept.sort_unstable();
    let values = kept.iter().map(|&k| x[k]).collect();
    Ok(SparseSignal {
        len: n,
        support: SupportSet(kept),
        values,
    })
}

/// Coordinate projection: zeroes every entry outside `support`.
pub fn coordinate_project(x: &CVector, support: &SupportSet) -> Result<CVector> {
    Ok(SparseSignal::restrict(x, support)?.to_dense())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_vector;
    use proptest::prelude::*;

    fn re(v: &CVector) -> Vec<f64> {
        v.iter().map(|z| z.re).collect()
    }

    #[test]
    fn threshold_keeps_two_largest() {
        let x = real_vector(&[3.0, -5.0, 1.0, 0.0]);
        let h = hard_threshold(&x, 2).unwrap();
        assert_eq!(re(&h.to_dense()), vec![3.0, -5.0, 0.0, 0.0]);
        assert_eq!(h.support().as_slice(), &[0, 1]);
    }

    #[test]
    fn threshold_tie_goes_to_lowest_index() {
        let x = real_vector(&[2.0, -2.0]);
        assert_eq!(
            re(&hard_threshold(&x, 1).unwrap().to_dense()),
            vec![2.0, 0.0]
        );
    }

    #[test]
    fn threshold_identity_when_sparse_enough() {
        let x = real_vector(&[0.0, 4.0, 0.0, -1.0, 0.0]);
        for s in 2..=5 {
            assert_eq!(hard_threshold(&x, s).unwrap().to_dense(), x);
        }
    }

    #[test]
    fn threshold_rejects_bad_sparsity() {
        let x = real_vector(&[1.0, 2.0]);
        assert!(matches!(
            hard_threshold(&x, 3),
            Err(Error::InvalidSparsity { s: 3, n: 2 })
        ));
        assert!(hard_threshold(&x, 0).is_err());
    }

    #[test]
    fn coordinate_projection_cases() {
        let x = real_vector(&[1.0, 2.0, 3.0]);
        let j = SupportSet::new(vec![0, 2], 3).unwrap();
        assert_eq!(
            re(&coordinate_project(&x, &j).unwrap()),
            vec![1.0, 0.0, 3.0]
        );
        assert_eq!(
            re(&coordinate_project(&x, &SupportSet::empty()).unwrap()),
            vec![0.0; 3]
        );
        assert_eq!(coordinate_project(&x, &SupportSet::full(3)).unwrap(), x);
        let bad = SupportSet::new(vec![5], 10).unwrap();
        assert!(matches!(
            coordinate_project(&x, &bad),
            Err(Error::IndexOutOfBounds { index: 5, len: 3 })
        ));
    }

    #[test]
    fn support_validation() {
        assert!(SupportSet::new(vec![1, 1], 3).is_err());
        assert!(SupportSet::new(vec![2, 1], 3).is_err());
        assert!(SupportSet::new(vec![0, 3], 3).is_err());
        let a = SupportSet::new(vec![0, 2, 5], 6).unwrap();
        let b = SupportSet::new(vec![1, 2], 6).unwrap();
        assert_eq!(a.union(&b).as_slice(), &[0, 1, 2, 5]);
        assert_eq!(a.difference(&b).as_slice(), &[0, 5]);
        assert_eq!(a.complement(6).as_slice(), &[1, 3, 4]);
    }

    fn subsets(n: usize, s: usize) -> Vec<Vec<usize>> {
        fn rec(start: usize, n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == s {
                out.push(cur.clone());
                return;
            }
            for k in start..n {
                cur.push(k);
                rec(k + 1, n, s, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, n, s, &mut Vec::new(), &mut out);
        out
    }

    proptest! {
        #[test]
        fn threshold_is_best_s_term(values in proptest::collection::vec(-10.0f64..10.0, 1..=9), s_frac in 0.0f64..1.0) {
            let n = values.len();
            let s = 1 + ((n - 1) as f64 * s_frac) as usize;
            let x = real_vector(&values);
            let h = hard_threshold(&x, s).unwrap();
            let err = (&x - h.to_dense()).norm();
            // best s-sparse approximation error on a support J is the energy off J
            for j in subsets(n, s) {
                let off: f64 = (0..n).filter(|k| !j.contains(k)).map(|k| values[k] * values[k]).sum();
                prop_assert!(err <= off.sqrt() + 1e-12);
            }
            let kept_min = h.values().iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
            for k in 0..n {
                if !h.support().contains(k) {
                    prop_assert!(values[k].abs() <= kept_min);
                }
            }
        }

        #[test]
        fn threshold_permutation_equivariant(values in proptest::collection::vec(-10.0f64..10.0, 2..=8), seed in 0u64..1000) {
            // distinct magnitudes with probability one, so the tie-break never fires
            let n = values.len();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut state = seed;
            for i in (1..n).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (state >> 33) as usize % (i + 1));
            }
            let x = real_vector(&values);
            let px = real_vector(&perm.iter().map(|&p| values[p]).collect::<Vec<_>>());
            let s = n / 2;
            let h = hard_threshold(&x, s).unwrap().to_dense();
            let ph = hard_threshold(&px, s).unwrap().to_dense();
            for (i, &p) in perm.iter().enumerate() {
                prop_assert_eq!(ph[i], h[p]);
            }
        }
    }
}
