use std::fmt;

use rand::{Rng, RngExt};

/// Opaque 128-bit contact token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenId(u128);

impl TokenId {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        TokenId(rng.random())
    }

    pub const fn from_raw(raw: u128) -> Self {
        TokenId(raw)
    }

    pub fn raw(self) -> u128 {
        self.0
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

/// Per-day anonymous device label used in score reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pseudonym(u64);

impl Pseudonym {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Pseudonym(rng.random())
    }

    pub const fn from_raw(raw: u64) -> Self {
        Pseudonym(raw)
    }

    pub fn raw(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Pseudonym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{:016x}", self.0)
    }
}
