use std::fmt;

use crate::error::OverflowError;

/// Exact nonnegative weight. All arithmetic on weights is checked: an
/// overflow surfaces as an error, never as a silent wraparound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(u64);

impl Weight {
    pub const ZERO: Weight = Weight(0);
    pub const ONE: Weight = Weight(1);

    pub fn new(value: u64) -> Weight {
        Weight(value)
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_add(self, other: Weight) -> Result<Weight, OverflowError> {
        self.0
            .checked_add(other.0)
            .map(Weight)
            .ok_or(OverflowError)
    }

    pub fn checked_mul(self, other: Weight) -> Result<Weight, OverflowError> {
        self.0
            .checked_mul(other.0)
            .map(Weight)
            .ok_or(OverflowError)
    }

    /// Sum with overflow checking.
    pub fn checked_sum<I: IntoIterator<Item = Weight>>(iter: I) -> Result<Weight, OverflowError> {
        let mut acc = Weight::ZERO;
        for w in iter {
            acc = acc.checked_add(w)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for Weight {
    fn from(value: u64) -> Weight {
        Weight(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checked_add_rejects_overflow() {
        let big = Weight::new(u64::MAX);
        assert!(big.checked_add(Weight::ONE).is_err());
        assert_eq!(big.checked_add(Weight::ZERO).unwrap(), big);
    }

    #[test]
    fn checked_sum_accumulates() {
        let ws = [1u64, 2, 3, 4].map(Weight::new);
        assert_eq!(Weight::checked_sum(ws).unwrap(), Weight::new(10));
    }
}
