// SPDX-License-Identifier: Apache-2.0

//! Permutations of `[N]` with `N = 2^n`, the hidden functions behind every
//! oracle in this crate.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest qubit count a `Permutation` may carry. `2^n` images must fit in
/// memory; 26 bits is already half a gigabyte of `usize`s.
pub const MAX_PERMUTATION_QUBITS: usize = 26;

/// A bijection on `[2^n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    n: usize,
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(n: usize, images: Vec<usize>) -> Result<Self> {
        check_qubits(n)?;
        let size = 1usize << n;
        if images.len() != size {
            return Err(Error::NotABijection { n });
        }
        let mut seen = alloc::vec![false; size];
        for &y in &images {
            if y >= size || seen[y] {
                return Err(Error::NotABijection { n });
            }
            seen[y] = true;
        }
        Ok(Permutation { n, images })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Ok(Permutation {
            n,
            images: (0..1usize << n).collect(),
        })
    }

    /// Qubit count `n`.
    pub fn qubits(&self) -> usize {
        self.n
    }

    /// Domain size `N = 2^n`.
    pub fn size(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = alloc::vec![0; self.images.len()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y] = x;
        }
        Permutation {
            n: self.n,
            images: inv,
        }
    }

    /// `self ∘ other`, i.e. `x ↦ self(other(x))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.n != other.n {
            return Err(Error::WidthMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(Permutation {
            n: self.n,
            images: other.images.iter().map(|&y| self.images[y]).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(x, &y)| x == y)
    }

    /// `π⁻¹(y)` by linear scan, for callers that do not keep the inverse.
    pub fn preimage(&self, y: usize) -> usize {
        self.images
            .iter()
            .position(|&v| v == y)
            .expect("a permutation hits every value")
    }

    pub fn fixed_points(&self) -> impl Iterator<Item = usize> + '_ {
        self.images
            .iter()
            .enumerate()
            .filter(|(x, &y)| *x == y)
            .map(|(x, _)| x)
    }

    pub fn has_fixed_point(&self) -> bool {
        self.fixed_points().next().is_some()
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::ZeroQubits);
    }
    if n > MAX_PERMUTATION_QUBITS {
        return Err(Error::WidthCapExceeded {
            width: n,
            cap: MAX_PERMUTATION_QUBITS,
        });
    }
    Ok(())
}

/// Deterministic generator used by every seeded routine in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed number `index` of an independent family keyed by `seed`: the first
/// word of ChaCha stream `index`. Lets parallel jobs draw reproducible seeds
/// regardless of scheduling order.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut rng = seeded_rng(seed);
    rng.set_stream(index);
    rng.gen()
}

/// Uniformly random permutation of `[2^n]` (Fisher–Yates over a seeded
/// ChaCha stream).
pub fn sample_uniform(n: usize, seed: u64) -> Result<Permutation> {
    let mut rng = seeded_rng(seed);
    sample_uniform_with(n, &mut rng)
}

pub fn sample_uniform_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Permutation> {
    let mut p = Permutation::identity(n)?;
    p.images.shuffle(rng);
    Ok(p)
}

/// A PermInvGarb instance: a permutation `f` of `[N²]` (so `2n` qubits)
/// whose preimage of 0 lies in `[N]` exactly when `answer` is true.
///
/// `[N]` is read as `{0, …, N-1}`; a preimage equal to `N` is a no-instance.
/// The instance is uniform over all permutations meeting the constraint: a
/// uniform permutation gets its zero moved to a uniformly chosen allowed
/// position by a single transposition.
pub fn sample_garb_instance(n: usize, answer: bool, seed: u64) -> Result<Permutation> {
    check_qubits(n)?;
    let mut rng = seeded_rng(seed);
    let mut f = sample_uniform_with(2 * n, &mut rng)?;
    let half = 1usize << n;
    let full = 1usize << (2 * n);
    let position = if answer {
        rng.gen_range(0..half)
    } else {
        rng.gen_range(half..full)
    };
    let current = f.preimage(0);
    f.images.swap(position, current);
    Ok(f)
}

/// The PermInvGarb label of `f` for parameter `n`: whether `f⁻¹(0) < 2^n`.
pub fn garb_label(f: &Permutation, n: usize) -> bool {
    f.preimage(0) < (1usize << n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;
    use alloc::vec;

    #[test]
    fn rejects_non_bijections() {
        assert_eq!(
            Permutation::new(1, vec![0, 0]),
            Err(Error::NotABijection { n: 1 })
        );
        assert!(Permutation::new(2, vec![0, 1, 2]).is_err());
        assert!(Permutation::new(1, vec![0, 2]).is_err());
        assert_eq!(Permutation::new(0, vec![0]), Err(Error::ZeroQubits));
    }

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        let seeds: Vec<u64> = (0..64).map(|i| derive_seed(5, i)).collect();
        assert_eq!(seeds, (0..64).map(|i| derive_seed(5, i)).collect::<Vec<_>>());
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
        assert_ne!(derive_seed(5, 0), derive_seed(6, 0));
    }

    #[test]
    fn inverse_of_identity_and_swap() {
        let id = Permutation::identity(2).unwrap();
        assert_eq!(id.inverse(), id);
        let swap = Permutation::new(1, vec![1, 0]).unwrap();
        assert_eq!(swap.inverse(), swap);
    }

    #[test]
    fn compose_with_inverse_is_identity_for_seed_7() {
        let p = sample_uniform(4, 7).unwrap();
        let q = p.compose(&p.inverse()).unwrap();
        for x in 0..16 {
            assert_eq!(q.apply(x), x);
            assert_eq!(p.inverse().apply(p.apply(x)), x);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_uniform(5, 11).unwrap(), sample_uniform(5, 11).unwrap());
        assert_ne!(sample_uniform(5, 11).unwrap(), sample_uniform(5, 12).unwrap());
        assert_eq!(sample_uniform(0, 1), Err(Error::ZeroQubits));
    }

    #[test]
    fn one_qubit_samples_are_one_of_two() {
        for seed in 0..20 {
            let p = sample_uniform(1, seed).unwrap();
            assert!(p.images() == [0, 1] || p.images() == [1, 0]);
        }
    }

    #[test]
    fn two_qubit_sampling_is_uniform_over_all_24() {
        let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut rng = seeded_rng(2024);
        for _ in 0..24_000 {
            let p = sample_uniform_with(2, &mut rng).unwrap();
            *counts.entry(p.images().to_vec()).or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        for (images, count) in counts {
            assert!(
                (850..=1150).contains(&count),
                "{images:?} appeared {count} times"
            );
        }
    }

    #[test]
    fn garb_instances_respect_the_promise() {
        for seed in 0..10 {
            let yes = sample_garb_instance(1, true, seed).unwrap();
            assert_eq!(yes.qubits(), 2);
            assert!(yes.preimage(0) < 2);
        }
        let no = sample_garb_instance(2, false, 3).unwrap();
        assert!((4..16).contains(&no.preimage(0)));
    }

    #[test]
    fn garb_label_reconstruction() {
        let mut rng = seeded_rng(99);
        for i in 0..1000u64 {
            let answer = rng.gen_bool(0.5);
            let f = sample_garb_instance(2, answer, i).unwrap();
            assert_eq!(garb_label(&f, 2), answer);
        }
    }

    proptest::proptest! {
        #[test]
        fn inverse_is_an_involution(n in 1usize..7, seed in proptest::prelude::any::<u64>()) {
            let p = sample_uniform(n, seed).unwrap();
            proptest::prop_assert_eq!(p.inverse().inverse(), p.clone());
            let mut sorted = p.images().to_vec();
            sorted.sort_unstable();
            proptest::prop_assert_eq!(sorted, (0..1usize << n).collect::<Vec<_>>());
        }
    }
}
