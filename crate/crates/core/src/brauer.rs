//! Brauer algebra `𝔅_k(d)`: perfect matchings of `2k` points.
//!
//! Points `0..k` are the bottom (bra) row and `k..2k` the top (ket) row.
//! `F_d(s) = Σ |i_k … i_{2k-1}⟩⟨i_0 … i_{k-1}| ∏_{{p,q} ∈ s} δ(i_p, i_q)`.
//! A permutation σ embeds as the pairs `{l, k + σ(l)}`.

use std::ops::Mul;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::overlap::{InnerProductMatrix, Scalar};
use crate::perm::{CycleType, Permutation};
use crate::{Error, Result};

pub const DEFAULT_K_MAX: usize = 6;

pub type BrauerCycleType = CycleType;

/// A Brauer diagram stored as its partner map (`partner[p]` is paired with `p`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "PairList", into = "PairList")]
pub struct PairPartition {
    k: usize,
    partner: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PairList {
    k: usize,
    pairs: Vec<(usize, usize)>,
}

impl TryFrom<PairList> for PairPartition {
    type Error = Error;
    fn try_from(list: PairList) -> Result<Self> {
        PairPartition::from_pairs(list.k, &list.pairs)
    }
}

impl From<PairPartition> for PairList {
    fn from(s: PairPartition) -> Self {
        PairList {
            k: s.k,
            pairs: s.pairs(),
        }
    }
}

impl PairPartition {
    pub fn from_pairs(k: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = 2 * k;
        if pairs.len() != k {
            return Err(Error::InvalidArgument(format!(
                "{} pairs given, a Brauer diagram of order {k} needs {k}",
                pairs.len()
            )));
        }
        let mut partner = vec![usize::MAX; n];
        for &(a, b) in pairs {
            if a >= n || b >= n || a == b || partner[a] != usize::MAX || partner[b] != usize::MAX {
                return Err(Error::InvalidArgument(format!(
                    "{pairs:?} is not a perfect matching of 0..{n}"
                )));
            }
            partner[a] = b;
            partner[b] = a;
        }
        Ok(PairPartition { k, partner })
    }

    pub fn identity(k: usize) -> Self {
        Self::from_permutation(&Permutation::identity(k))
    }

    pub fn from_permutation(p: &Permutation) -> Self {
        let k = p.k();
        let mut partner = vec![0; 2 * k];
        for l in 0..k {
            let t = k + p.apply(l);
            partner[l] = t;
            partner[t] = l;
        }
        PairPartition { k, partner }
    }

    /// `SWAP` on two factors.
    pub fn swap() -> Self {
        Self::from_pairs(2, &[(0, 3), (1, 2)]).expect("valid")
    }

    /// The unnormalized projector onto the maximally entangled state of two factors.
    pub fn pi() -> Self {
        Self::from_pairs(2, &[(0, 1), (2, 3)]).expect("valid")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn partner(&self, p: usize) -> usize {
        self.partner[p]
    }

    /// Sorted pair list, min point first.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..2 * self.k)
            .filter(|&p| p < self.partner[p])
            .map(|p| (p, self.partner[p]))
            .collect()
    }

    /// True when every pair joins the bottom and top rows.
    pub fn is_permutation(&self) -> bool {
        (0..self.k).all(|p| self.partner[p] >= self.k)
    }

    pub fn as_permutation(&self) -> Option<Permutation> {
        if !self.is_permutation() {
            return None;
        }
        Permutation::new((0..self.k).map(|l| self.partner[l] - self.k).collect()).ok()
    }

    fn bar(&self, p: usize) -> usize {
        (p + self.k) % (2 * self.k)
    }

    /// Exchange the two rows.
    pub fn transpose(&self) -> Self {
        let n = 2 * self.k;
        let mut partner = vec![0; n];
        for p in 0..n {
            partner[self.bar(p)] = self.bar(self.partner[p]);
        }
        PairPartition { k: self.k, partner }
    }

    /// Composition `F(self)·F(other) = d^loops · F(result)`.
    pub fn compose(&self, other: &PairPartition) -> Result<(PairPartition, usize)> {
        brauer_compose(self, other)
    }

    /// Cycles obtained by alternating pair edges and row-crossing edges
    /// `p ↔ p ± k`. Each starts at its minimum point and leaves through its pair edge.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = 2 * self.k;
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut p = start;
            loop {
                let q = self.partner[p];
                seen[p] = true;
                seen[q] = true;
                cycle.push(p);
                cycle.push(q);
                p = self.bar(q);
                if p == start {
                    break;
                }
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_type(&self) -> BrauerCycleType {
        CycleType::from_lengths(self.k, self.cycles().iter().map(|c| c.len() / 2))
    }

    pub fn num_cycles(&self) -> usize {
        self.cycles().len()
    }

    /// `Tr[F_d(s)] = d^{#cycles}`.
    pub fn character(&self, d: u64) -> BigUint {
        BigUint::from(d).pow(self.num_cycles() as u32)
    }

    /// `Tr[F_d(s) O^{⊗k}]` for traceless, symmetric `O` with `O² = 1`.
    pub fn trace_obs_power(&self, d: u64) -> BigUint {
        trace_obs_power(self, d)
    }
}

/// All `(2k-1)!!` diagrams, lexicographic in the sorted pair list.
pub fn enumerate_brauer(k: usize) -> Result<Vec<PairPartition>> {
    enumerate_brauer_with_limit(k, DEFAULT_K_MAX)
}

pub fn enumerate_brauer_with_limit(k: usize, k_max: usize) -> Result<Vec<PairPartition>> {
    if k > k_max {
        return Err(Error::Capacity {
            what: "Brauer order k",
            requested: k,
            limit: k_max,
        });
    }
    let mut out = Vec::new();
    crate::pairings::for_each_pairing(2 * k, |pairs| {
        out.push(PairPartition::from_pairs(k, pairs).expect("generated matching"));
    });
    Ok(out)
}

pub fn transpose(s: &PairPartition) -> PairPartition {
    s.transpose()
}

pub fn brauer_cycles(s: &PairPartition) -> (Vec<Vec<usize>>, BrauerCycleType) {
    (s.cycles(), s.cycle_type())
}

/// Stacks `b` below `a`: the top row of `b` is glued to the bottom row of `a`.
/// Returns the reduced diagram and the number of closed loops formed in the
/// glued middle row.
pub fn brauer_compose(a: &PairPartition, b: &PairPartition) -> Result<(PairPartition, usize)> {
    if a.k != b.k {
        return Err(Error::OrderMismatch {
            left: a.k,
            right: b.k,
        });
    }
    let k = a.k;
    // Walk state: (in_a, point). Middle points are b's top row = a's bottom row.
    let mut middle_seen = vec![false; k];
    let mut partner = vec![usize::MAX; 2 * k];

    let outer_of = |in_a: bool, p: usize| -> Option<usize> {
        match (in_a, p < k) {
            (false, true) => Some(p),
            (true, false) => Some(p),
            _ => None,
        }
    };

    for start in 0..2 * k {
        if partner[start] != usize::MAX {
            continue;
        }
        // Result bottom row belongs to b, top row to a.
        let (mut in_a, mut p) = if start < k { (false, start) } else { (true, start) };
        let end = loop {
            let q = if in_a { a.partner[p] } else { b.partner[p] };
            if let Some(o) = outer_of(in_a, q) {
                break o;
            }
            // q is a middle point; cross to the other diagram.
            let j = if in_a { q } else { q - k };
            middle_seen[j] = true;
            if in_a {
                in_a = false;
                p = j + k;
            } else {
                in_a = true;
                p = j;
            }
        };
        partner[start] = end;
        partner[end] = start;
    }

    let mut loops = 0;
    for j0 in 0..k {
        if middle_seen[j0] {
            continue;
        }
        loops += 1;
        let mut j = j0;
        loop {
            middle_seen[j] = true;
            // Leave through b from its top point j + k; arrive at another top point.
            let q = b.partner[j + k];
            debug_assert!(q >= k);
            let jm = q - k;
            middle_seen[jm] = true;
            // Then through a from its bottom point jm.
            let r = a.partner[jm];
            debug_assert!(r < k);
            j = r;
            if j == j0 {
                break;
            }
        }
    }
    Ok((PairPartition { k, partner }, loops))
}

/// `Tr[F_d(s) O^{⊗k}]`: `d^r` if all `r` cycles have even length, else 0.
pub fn trace_obs_power(s: &PairPartition, d: u64) -> BigUint {
    trace_cycle_product(s, |len| {
        if len % 2 == 0 {
            BigUint::from(d)
        } else {
            BigUint::ZERO
        }
    })
}

/// `Tr[F_d(s) O^{⊗k}]` for a general symmetric `O`, given `power_trace(L) = Tr[O^L]`.
pub fn trace_cycle_product<T: Clone + One + Mul<Output = T>>(
    s: &PairPartition,
    power_trace: impl Fn(usize) -> T,
) -> T {
    s.cycles()
        .iter()
        .fold(T::one(), |acc, c| acc * power_trace(c.len() / 2))
}

/// `Tr[(ρ_{a(0)} ⊗ … ⊗ ρ_{a(k-1)}) F_d(s)]` for real states: the product of
/// `⟨ψ|ψ'⟩` over all pairs, where point `p` carries state `a(p mod k)`.
pub fn trace_state_product_brauer<T: Scalar>(
    s: &PairPartition,
    g: &InnerProductMatrix<T>,
    assignment: &[usize],
) -> Result<T> {
    if !g.is_real() {
        return Err(Error::RealStatesRequired);
    }
    let k = s.k;
    if assignment.len() != k {
        return Err(Error::OrderMismatch {
            left: k,
            right: assignment.len(),
        });
    }
    for &a in assignment {
        g.check_index(a)?;
    }
    let mut acc = T::one();
    for (p, q) in s.pairs() {
        let (x, y) = (assignment[p % k], assignment[q % k]);
        if x != y {
            acc = acc * g.get(x, y).clone();
        }
    }
    Ok(acc)
}
