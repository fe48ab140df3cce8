//! Signed power-of-two coefficients, the only arc labels a shift-and-add
//! graph is allowed to carry.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LccError, Result};

/// Exponents outside this window would not map to a normal double.
const HARD_EXP_LIMIT: i32 = 1000;

/// Returns `2^e` exactly by assembling the IEEE-754 bit pattern.
///
/// Exact for every `e` that yields a normal double; larger magnitudes
/// saturate to `inf`/`0.0`.
#[inline]
pub fn pow2(e: i32) -> f64 {
    if (-1022..=1023).contains(&e) {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e > 1023 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// `floor(log2(|x|))` read off the exponent field. `x` must be finite and nonzero.
pub(crate) fn floor_log2(x: f64) -> i32 {
    let bits = x.abs().to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    if biased == 0 {
        // subnormal: normalise by scaling up
        return floor_log2(x * pow2(64)) - 64;
    }
    biased - 1023
}

/// True when `|x|` is an exact power of two.
pub(crate) fn is_pow2(x: f64) -> bool {
    let bits = x.abs().to_bits();
    let biased = (bits >> 52) & 0x7ff;
    biased != 0 && bits & ((1u64 << 52) - 1) == 0
}

/// Inclusive bounds on the exponent of a [`ShiftCoefficient`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i32, i32)", into = "(i32, i32)")]
pub struct ExponentRange {
    min: i32,
    max: i32,
}

impl ExponentRange {
    pub const DEFAULT: ExponentRange = ExponentRange { min: -63, max: 63 };

    pub fn new(min: i32, max: i32) -> Result<Self> {
        if min > max || min < -HARD_EXP_LIMIT || max > HARD_EXP_LIMIT {
            return Err(LccError::InvalidExponentRange { min, max });
        }
        Ok(ExponentRange { min, max })
    }

    pub fn min(&self) -> i32 {
        self.min
    }

    pub fn max(&self) -> i32 {
        self.max
    }

    pub fn contains(&self, e: i32) -> bool {
        (self.min..=self.max).contains(&e)
    }

    pub fn clamp(&self, e: i32) -> i32 {
        e.clamp(self.min, self.max)
    }

    /// Number of distinct exponents.
    pub fn len(&self) -> usize {
        (self.max - self.min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.min..=self.max
    }
}

impl Default for ExponentRange {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl TryFrom<(i32, i32)> for ExponentRange {
    type Error = LccError;
    fn try_from((min, max): (i32, i32)) -> Result<Self> {
        ExponentRange::new(min, max)
    }
}

impl From<ExponentRange> for (i32, i32) {
    fn from(r: ExponentRange) -> Self {
        (r.min, r.max)
    }
}

/// The exact value `sign * 2^exp`. Zero has no representation; a missing
/// term stands for it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ShiftCoefficient {
    negative: bool,
    exp: i32,
}

impl ShiftCoefficient {
    pub const ONE: ShiftCoefficient = ShiftCoefficient {
        negative: false,
        exp: 0,
    };

    pub fn positive(exp: i32) -> Self {
        ShiftCoefficient {
            negative: false,
            exp,
        }
    }

    pub fn negative(exp: i32) -> Self {
        ShiftCoefficient {
            negative: true,
            exp,
        }
    }

    /// `sign` must be `+1` or `-1`.
    pub fn from_sign(sign: i32, exp: i32) -> Result<Self> {
        match sign {
            1 => Ok(Self::positive(exp)),
            -1 => Ok(Self::negative(exp)),
            _ => Err(LccError::Config(format!("sign must be +1 or -1, got {sign}"))),
        }
    }

    /// Checked construction against a range.
    pub fn new_in(negative: bool, exp: i32, range: ExponentRange) -> Result<Self> {
        if !range.contains(exp) {
            return Err(LccError::ExponentOutOfRange {
                exp,
                min: range.min(),
                max: range.max(),
            });
        }
        Ok(ShiftCoefficient { negative, exp })
    }

    pub fn exponent(&self) -> i32 {
        self.exp
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn sign(&self) -> i32 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn value(&self) -> f64 {
        self.apply(1.0)
    }

    /// `x * sign * 2^exp`; the multiply is by an exact power of two.
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        let scaled = x * pow2(self.exp);
        if self.negative {
            -scaled
        } else {
            scaled
        }
    }

    pub fn shifted(&self, by: i32) -> Self {
        ShiftCoefficient {
            negative: self.negative,
            exp: self.exp + by,
        }
    }

    pub fn negated(&self) -> Self {
        ShiftCoefficient {
            negative: !self.negative,
            exp: self.exp,
        }
    }

    /// Tie-break order among coefficients of equal error: smaller exponent
    /// first, then positive before negative.
    pub fn tie_order(&self, other: &Self) -> Ordering {
        self.exp
            .cmp(&other.exp)
            .then(self.negative.cmp(&other.negative))
    }
}

impl fmt::Display for ShiftCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.negative { '-' } else { '+' };
        write!(f, "{s}2^{}", self.exp)
    }
}
