//! Symmetric group `S_k` acting on `(C^d)^{⊗k}` by permuting tensor factors.
//!
//! `P_d(σ)` sends `|i_1 … i_k⟩` to `|i_{σ⁻¹(1)} … i_{σ⁻¹(k)}⟩`, so `σ ↦ P_d(σ)`
//! is a homomorphism and `compose(a, b)` (apply `b` first) maps to `P_d(a)P_d(b)`.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::overlap::{InnerProductMatrix, Scalar};
use crate::{Error, Result};

pub const DEFAULT_K_MAX: usize = 8;

/// A permutation in one-line notation: `image[i] = σ(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    image: Vec<usize>,
}

/// `nu[j-1]` counts cycles of length `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CycleType {
    pub nu: Vec<usize>,
}

impl CycleType {
    pub fn from_lengths(k: usize, lengths: impl IntoIterator<Item = usize>) -> Self {
        let mut nu = vec![0; k];
        for len in lengths {
            nu[len - 1] += 1;
        }
        CycleType { nu }
    }

    /// Total number of cycles, `‖ν‖₁`.
    pub fn num_cycles(&self) -> usize {
        self.nu.iter().sum()
    }

    pub fn order(&self) -> usize {
        self.nu.iter().enumerate().map(|(j, n)| (j + 1) * n).sum()
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(image: Vec<usize>) -> Result<Self> {
        Permutation::new(image)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.image
    }
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let k = image.len();
        let mut seen = vec![false; k];
        for &x in &image {
            if x >= k || seen[x] {
                return Err(Error::InvalidArgument(format!(
                    "{image:?} is not a permutation of 0..{k}"
                )));
            }
            seen[x] = true;
        }
        Ok(Permutation { image })
    }

    pub fn identity(k: usize) -> Self {
        Permutation {
            image: (0..k).collect(),
        }
    }

    /// Builds a permutation from disjoint cycles; unlisted points are fixed.
    pub fn from_cycles(k: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut image: Vec<usize> = (0..k).collect();
        let mut touched = vec![false; k];
        for cycle in cycles {
            for (pos, &x) in cycle.iter().enumerate() {
                if x >= k || touched[x] {
                    return Err(Error::InvalidArgument(format!("bad cycle list {cycles:?}")));
                }
                touched[x] = true;
                image[x] = cycle[(pos + 1) % cycle.len()];
            }
        }
        Ok(Permutation { image })
    }

    /// Transposition of `a` and `b` in `S_k`.
    pub fn transposition(k: usize, a: usize, b: usize) -> Result<Self> {
        Self::from_cycles(k, &[&[a, b]])
    }

    pub fn k(&self) -> usize {
        self.image.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.k()];
        for (i, &x) in self.image.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { image: inv }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        compose(self, other)
    }

    /// Canonical cycles: each starts at its minimum, sorted by minimum.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let k = self.k();
        let mut seen = vec![false; k];
        let mut out = Vec::new();
        for start in 0..k {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x);
                x = self.image[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_type(&self) -> CycleType {
        CycleType::from_lengths(self.k(), self.cycles().iter().map(Vec::len))
    }

    pub fn num_cycles(&self) -> usize {
        self.cycles().len()
    }

    /// `Tr[P_d(σ)] = d^{#cycles}`.
    pub fn character(&self, d: u64) -> BigUint {
        BigUint::from(d).pow(self.num_cycles() as u32)
    }

    pub fn is_involution(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &x)| self.image[x] == i)
    }

    pub fn is_fixed_point_free(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &x)| i != x)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        let nontrivial: Vec<_> = cycles.iter().filter(|c| c.len() > 1).collect();
        if nontrivial.is_empty() {
            return f.write_str("e");
        }
        for c in nontrivial {
            let parts: Vec<String> = c.iter().map(usize::to_string).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

/// `a ∘ b`: apply `b`, then `a`.
pub fn compose(a: &Permutation, b: &Permutation) -> Result<Permutation> {
    if a.k() != b.k() {
        return Err(Error::OrderMismatch {
            left: a.k(),
            right: b.k(),
        });
    }
    Ok(Permutation {
        image: b.image.iter().map(|&x| a.image[x]).collect(),
    })
}

pub fn cycle_decomposition(p: &Permutation) -> Vec<Vec<usize>> {
    p.cycles()
}

pub fn character(p: &Permutation, d: u64) -> BigUint {
    p.character(d)
}

/// All of `S_k` in lexicographic one-line order.
pub fn enumerate_group(k: usize) -> Result<Vec<Permutation>> {
    enumerate_group_with_limit(k, DEFAULT_K_MAX)
}

pub fn enumerate_group_with_limit(k: usize, k_max: usize) -> Result<Vec<Permutation>> {
    if k > k_max {
        return Err(Error::Capacity {
            what: "permutation order k",
            requested: k,
            limit: k_max,
        });
    }
    let mut current: Vec<usize> = (0..k).collect();
    let mut out = vec![Permutation {
        image: current.clone(),
    }];
    while next_lexicographic(&mut current) {
        out.push(Permutation {
            image: current.clone(),
        });
    }
    Ok(out)
}

fn next_lexicographic(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Fixed-point-free involutions of `S_k` (perfect matchings of `k` points).
pub fn enumerate_pairings(k: usize) -> Result<Vec<Permutation>> {
    if k % 2 == 1 {
        return Err(Error::InvalidOrder {
            k,
            reason: "pairings need an even number of points",
        });
    }
    let mut out = Vec::new();
    crate::pairings::for_each_pairing(k, |pairs| {
        let mut image = vec![0; k];
        for &(a, b) in pairs {
            image[a] = b;
            image[b] = a;
        }
        out.push(Permutation { image });
    });
    Ok(out)
}

/// `Tr[(ρ_{a(0)} ⊗ … ⊗ ρ_{a(k-1)}) P_d(σ)]` as a product of cyclic inner products.
///
/// Each cycle `(c_1 … c_r)` of σ contributes `Tr[ρ_{c_r} ⋯ ρ_{c_1}]`, i.e.
/// `∏_l G[a(σ(l))][a(l)]` over its points.
pub fn trace_state_product<T: Scalar>(
    p: &Permutation,
    g: &InnerProductMatrix<T>,
    assignment: &[usize],
) -> Result<T> {
    if assignment.len() != p.k() {
        return Err(Error::OrderMismatch {
            left: p.k(),
            right: assignment.len(),
        });
    }
    for &a in assignment {
        g.check_index(a)?;
    }
    let mut acc = T::one();
    for (l, &target) in p.image.iter().enumerate() {
        let a = assignment[target];
        let b = assignment[l];
        if a != b {
            acc = acc * g.get(a, b).clone();
        }
    }
    Ok(acc)
}
