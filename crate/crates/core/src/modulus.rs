use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Modulus `k` of the residue ring Z_k. Residues are stored as `u8`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Modulus(u8);

impl Modulus {
    /// Largest supported modulus.
    pub const MAX: u32 = 64;

    pub fn new(k: u32) -> Result<Self> {
        if !(2..=Self::MAX).contains(&k) {
            return Err(Error::InvalidInput(format!(
                "modulus k={k} outside [2, {}]",
                Self::MAX
            )));
        }
        Ok(Self(k as u8))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn contains(self, x: u8) -> bool {
        x < self.0
    }

    pub fn reduce(self, x: u64) -> u8 {
        (x % self.0 as u64) as u8
    }

    pub fn add(self, a: u8, b: u8) -> u8 {
        ((a as u16 + b as u16) % self.0 as u16) as u8
    }

    pub fn sub(self, a: u8, b: u8) -> u8 {
        ((a as u16 + self.0 as u16 - b as u16 % self.0 as u16) % self.0 as u16) as u8
    }

    pub fn sum<I: IntoIterator<Item = u8>>(self, it: I) -> u8 {
        let s: u64 = it.into_iter().map(u64::from).sum();
        self.reduce(s)
    }

    /// Uniform draw from Z_k.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> u8 {
        rng.gen_range(0..self.0)
    }
}

impl TryFrom<u32> for Modulus {
    type Error = Error;

    fn try_from(k: u32) -> Result<Self> {
        Self::new(k)
    }
}

impl From<Modulus> for u32 {
    fn from(k: Modulus) -> u32 {
        k.0 as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(Modulus::new(1).is_err());
        assert!(Modulus::new(65).is_err());
        assert!(Modulus::new(64).is_ok());
    }

    #[test]
    fn arithmetic_wraps() {
        let k = Modulus::new(5).unwrap();
        assert_eq!(k.add(3, 4), 2);
        assert_eq!(k.sub(1, 3), 3);
        assert_eq!(k.sum([4, 4, 4]), 2);
        let k = Modulus::new(64).unwrap();
        assert_eq!(k.add(63, 63), 62);
        assert_eq!(k.sub(0, 63), 1);
    }
}
