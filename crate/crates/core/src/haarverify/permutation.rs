use itertools::Itertools;

use crate::error::{Error, Result};

/// A permutation of `{0, …, T−1}` in one-line notation: `i ↦ image[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &i in &image {
            if i >= image.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter(format!("{image:?} is not a bijection")));
            }
        }
        Ok(Self { image })
    }

    pub fn identity(size: usize) -> Self {
        Self {
            image: (0..size).collect(),
        }
    }

    pub fn transposition(size: usize, a: usize, b: usize) -> Result<Self> {
        if a >= size || b >= size {
            return Err(Error::InvalidParameter(format!("({a} {b}) outside 0..{size}")));
        }
        let mut image: Vec<usize> = (0..size).collect();
        image.swap(a, b);
        Ok(Self { image })
    }

    pub fn size(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.size() != other.size() {
            return Err(Error::Shape(format!("cannot compose S_{} with S_{}", self.size(), other.size())));
        }
        Ok(Self {
            image: other.image.iter().map(|&i| self.image[i]).collect(),
        })
    }

    pub fn inverse(&self) -> Self {
        let mut image = vec![0; self.size()];
        for (i, &j) in self.image.iter().enumerate() {
            image[j] = i;
        }
        Self { image }
    }

    /// Number of cycles, fixed points included.
    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.size()];
        let mut cycles = 0;
        for start in 0..self.size() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.image[i];
            }
        }
        cycles
    }
}

pub fn cycle_count(p: &Permutation) -> usize {
    p.cycle_count()
}

/// All of `S_T` in lexicographic order of the image table.
pub fn all_permutations(size: usize) -> Vec<Permutation> {
    (0..size)
        .permutations(size)
        .map(|image| Permutation { image })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cycle_examples() {
        assert_eq!(Permutation::identity(5).cycle_count(), 5);
        assert_eq!(Permutation::transposition(3, 0, 2).unwrap().cycle_count(), 2);
        assert_eq!(Permutation::new(vec![1, 2, 0]).unwrap().cycle_count(), 1);
        assert_eq!(Permutation::identity(0).cycle_count(), 0);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert!(Permutation::transposition(2, 0, 2).is_err());
    }

    #[test]
    fn enumeration_sizes_and_cycle_distribution() {
        assert_eq!(all_permutations(0).len(), 1);
        assert_eq!(all_permutations(4).len(), 24);
        // unsigned Stirling numbers of the first kind, n = 4: 6, 11, 6, 1
        let mut by_cycles = [0; 5];
        for p in all_permutations(4) {
            by_cycles[p.cycle_count()] += 1;
        }
        assert_eq!(by_cycles, [0, 6, 11, 6, 1]);
    }

    #[test]
    fn compose_applies_right_first() {
        let a = Permutation::new(vec![1, 2, 0]).unwrap();
        let b = Permutation::transposition(3, 0, 1).unwrap();
        let ab = a.compose(&b).unwrap();
        for i in 0..3 {
            assert_eq!(ab.apply(i), a.apply(b.apply(i)));
        }
    }

    proptest! {
        #[test]
        fn group_laws(seed in 0usize..720, other in 0usize..720) {
            let all = all_permutations(6);
            let p = &all[seed];
            let q = &all[other];
            prop_assert_eq!(p.compose(&p.inverse()).unwrap(), Permutation::identity(6));
            prop_assert_eq!(p.inverse().cycle_count(), p.cycle_count());
            // conjugation preserves cycle type
            let conj = q.compose(p).unwrap().compose(&q.inverse()).unwrap();
            prop_assert_eq!(conj.cycle_count(), p.cycle_count());
        }
    }
}
