//! Scalar arithmetic in the prime field F_p.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated prime modulus. Coefficients are stored as `u8`, so `p <= 251`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrimeModulus(u32);

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeModulus {
    pub fn new(p: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p > 251 {
            return Err(Error::ModulusTooLarge(p));
        }
        Ok(PrimeModulus(p))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn reduce(self, n: u64) -> u8 {
        (n % self.0 as u64) as u8
    }

    pub fn add(self, a: u8, b: u8) -> u8 {
        ((a as u32 + b as u32) % self.0) as u8
    }

    pub fn sub(self, a: u8, b: u8) -> u8 {
        ((a as u32 + self.0 - b as u32) % self.0) as u8
    }

    pub fn neg(self, a: u8) -> u8 {
        if a == 0 {
            0
        } else {
            (self.0 - a as u32) as u8
        }
    }

    pub fn mul(self, a: u8, b: u8) -> u8 {
        ((a as u32 * b as u32) % self.0) as u8
    }

    pub fn pow(self, a: u8, mut e: u32) -> u8 {
        let mut base = a % self.0 as u8;
        let mut acc = 1u8;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat; `a` must be nonzero mod p.
    pub fn inv(self, a: u8) -> u8 {
        debug_assert!(!a.is_multiple_of(self.0 as u8), "inverse of zero");
        self.pow(a, self.0 - 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        assert!(PrimeModulus::new(2).is_ok());
        assert!(PrimeModulus::new(3).is_ok());
        assert!(PrimeModulus::new(251).is_ok());
        assert!(matches!(PrimeModulus::new(1), Err(Error::NotPrime(1))));
        assert!(matches!(PrimeModulus::new(4), Err(Error::NotPrime(4))));
        assert!(matches!(PrimeModulus::new(0), Err(Error::NotPrime(0))));
        assert!(matches!(
            PrimeModulus::new(257),
            Err(Error::ModulusTooLarge(257))
        ));
    }

    #[test]
    fn field_ops() {
        let p = PrimeModulus::new(5).unwrap();
        assert_eq!(p.add(3, 4), 2);
        assert_eq!(p.sub(1, 3), 3);
        assert_eq!(p.neg(0), 0);
        assert_eq!(p.mul(3, 4), 2);
        for a in 1..5u8 {
            assert_eq!(p.mul(a, p.inv(a)), 1);
        }
        assert_eq!(p.pow(2, 0), 1);
        assert_eq!(p.pow(2, 4), 1);
    }
}
