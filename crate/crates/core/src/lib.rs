//! Output moments of Haar-random quantum neural networks.
//!
//! The model is `C(ρ) = Tr[U ρ U† O]` with `U` Haar-distributed on `U(d)` or
//! `O(d)` and `O` a Pauli string. The crate provides:
//!
//! * exact finite-`d` moments through the Weingarten calculus
//!   ([`exact`], built on [`perm`] and [`brauer`]),
//! * the asymptotic Gaussian-process description ([`gp_moments`]),
//! * Monte Carlo sampling ([`haar`]) and streaming statistics ([`empirics`]),
//! * GP posterior inference ([`gp_inference`]) and tail bounds ([`tails`]).
//!
//! Indices are 0-based everywhere.

pub mod brauer;
pub mod cli;
pub mod empirics;
pub mod error;
pub mod exact;
pub mod gp_inference;
pub mod gp_moments;
pub mod haar;
pub mod overlap;
pub mod perm;
pub mod tails;

mod pairings;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};

/// Compact group the network unitary is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Unitary,
    Orthogonal,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::Unitary, Group::Orthogonal];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Unitary => "unitary",
            Group::Orthogonal => "orthogonal",
        }
    }

    /// Variance multiplier relative to the unitary group (1 or 2).
    pub fn variance_factor(self) -> u32 {
        match self {
            Group::Unitary => 1,
            Group::Orthogonal => 2,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unitary" | "u" => Ok(Group::Unitary),
            "orthogonal" | "o" => Ok(Group::Orthogonal),
            other => Err(Error::InvalidArgument(format!("unknown group '{other}'"))),
        }
    }
}
