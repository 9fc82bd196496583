use std::collections::BTreeSet;

use serde::Serialize;

use super::FinProbError;

/// Absolute tolerance used throughout the finite-probability checks.
pub const TOL: f64 = 1e-12;

/// Outcomes `0..size` with nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteProbSpace {
    weights: Vec<f64>,
}

impl FiniteProbSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self, FinProbError> {
        if weights.is_empty() {
            return Err(FinProbError::InvalidWeights("sample space is empty".into()));
        }
        if let Some(i) = weights.iter().position(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(FinProbError::InvalidWeights(format!(
                "weight {i} is {}",
                weights[i]
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > TOL {
            return Err(FinProbError::InvalidWeights(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self { weights })
    }

    pub fn uniform(size: usize) -> Result<Self, FinProbError> {
        if size == 0 {
            return Err(FinProbError::InvalidWeights("sample space is empty".into()));
        }
        Ok(Self {
            weights: vec![1.0 / size as f64; size],
        })
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn prob(&self, event: &Event) -> Result<f64, FinProbError> {
        if let Some(&i) = event.members.iter().next_back() {
            if i >= self.size() {
                return Err(FinProbError::LengthMismatch {
                    expected: self.size(),
                    got: i + 1,
                });
            }
        }
        Ok(event.members.iter().map(|&i| self.weights[i]).sum())
    }

    pub(crate) fn check_len(&self, x: &RandomVar) -> Result<(), FinProbError> {
        if x.len() != self.size() {
            return Err(FinProbError::LengthMismatch {
                expected: self.size(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// A real-valued map on the outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomVar {
    values: Vec<f64>,
}

impl RandomVar {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(size: usize, c: f64) -> Self {
        Self {
            values: vec![c; size],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination; panics if lengths differ.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(
            self.len(),
            other.len(),
            "random variables live on different spaces"
        );
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.zip_with(other, |a, b| (a - b).abs())
            .values
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// A finite σ-algebra, given by its atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    block_of: Vec<usize>,
    block_count: usize,
}

impl Partition {
    pub fn new(block_of: Vec<usize>, block_count: usize) -> Result<Self, FinProbError> {
        if block_count == 0 {
            return Err(FinProbError::InvalidPartition("no blocks".into()));
        }
        let mut seen = vec![false; block_count];
        for (i, &b) in block_of.iter().enumerate() {
            if b >= block_count {
                return Err(FinProbError::InvalidPartition(format!(
                    "outcome {i} assigned to block {b} of {block_count}"
                )));
            }
            seen[b] = true;
        }
        if let Some(b) = seen.iter().position(|s| !s) {
            return Err(FinProbError::InvalidPartition(format!(
                "block {b} is empty"
            )));
        }
        Ok(Self {
            block_of,
            block_count,
        })
    }

    /// Groups outcomes by key; blocks are numbered in order of first appearance.
    pub fn from_keys<K: Ord + Clone>(keys: &[K]) -> Self {
        let mut ids = std::collections::BTreeMap::new();
        let block_of = keys
            .iter()
            .map(|k| {
                let next = ids.len();
                *ids.entry(k.clone()).or_insert(next)
            })
            .collect();
        Self {
            block_of,
            block_count: ids.len(),
        }
    }

    pub fn trivial(size: usize) -> Self {
        Self {
            block_of: vec![0; size],
            block_count: 1,
        }
    }

    pub fn discrete(size: usize) -> Self {
        Self {
            block_of: (0..size).collect(),
            block_count: size,
        }
    }

    pub fn size(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn block_of(&self) -> &[usize] {
        &self.block_of
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.block_count];
        for (i, &b) in self.block_of.iter().enumerate() {
            out[b].push(i);
        }
        out
    }

    /// True iff every block of `self` lies inside one block of `coarse`.
    pub fn refines(&self, coarse: &Partition) -> bool {
        if self.size() != coarse.size() {
            return false;
        }
        let mut parent = vec![usize::MAX; self.block_count];
        for (&fine, &c) in self.block_of.iter().zip(&coarse.block_of) {
            if parent[fine] == usize::MAX {
                parent[fine] = c;
            } else if parent[fine] != c {
                return false;
            }
        }
        true
    }

    pub fn event(&self, block: usize) -> Event {
        Event::new(
            self.block_of
                .iter()
                .enumerate()
                .filter(|(_, &b)| b == block)
                .map(|(i, _)| i),
        )
    }

    pub(crate) fn check_len(&self, x: &RandomVar) -> Result<(), FinProbError> {
        if x.len() != self.size() {
            return Err(FinProbError::LengthMismatch {
                expected: self.size(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Increasing sequence of σ-algebras.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Filtration {
    levels: Vec<Partition>,
}

impl Filtration {
    pub fn new(levels: Vec<Partition>) -> Result<Self, FinProbError> {
        for (k, w) in levels.windows(2).enumerate() {
            if !w[1].refines(&w[0]) {
                return Err(FinProbError::NotRefinement {
                    detail: format!("level {} does not refine level {k}", k + 1),
                });
            }
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[Partition] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> Option<&Partition> {
        self.levels.get(k)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Event {
    members: BTreeSet<usize>,
}

impl Event {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        Self {
            members: members.into_iter().collect(),
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn indicator(&self, size: usize) -> RandomVar {
        RandomVar::new(
            (0..size)
                .map(|i| if self.contains(i) { 1.0 } else { 0.0 })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_must_be_a_distribution() {
        assert!(FiniteProbSpace::new(vec![0.5, 0.5]).is_ok());
        assert!(FiniteProbSpace::new(vec![0.5, 0.6]).is_err());
        assert!(FiniteProbSpace::new(vec![1.5, -0.5]).is_err());
        assert!(FiniteProbSpace::new(vec![]).is_err());
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![0, 1, 1], 2).is_ok());
        assert!(Partition::new(vec![0, 2], 2).is_err());
        assert!(Partition::new(vec![0, 0], 2).is_err());
        let p = Partition::from_keys(&["b", "a", "b"]);
        assert_eq!(p.block_of(), &[0, 1, 0]);
        assert_eq!(p.blocks(), vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn refinement_and_filtration() {
        let coarse = Partition::new(vec![0, 0, 1, 1], 2).unwrap();
        let fine = Partition::discrete(4);
        let crossing = Partition::new(vec![0, 1, 1, 0], 2).unwrap();
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(!crossing.refines(&coarse));
        assert!(Filtration::new(vec![Partition::trivial(4), coarse.clone(), fine]).is_ok());
        assert!(Filtration::new(vec![coarse, crossing]).is_err());
    }

    #[test]
    fn event_probability() {
        let sp = FiniteProbSpace::new(vec![0.25, 0.25, 0.5]).unwrap();
        assert_eq!(sp.prob(&Event::new([0, 2])).unwrap(), 0.75);
        assert!(sp.prob(&Event::new([3])).is_err());
    }
}
