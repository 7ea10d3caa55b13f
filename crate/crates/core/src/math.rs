//! Floating-point helpers shared by the numeric modules.
//!
//! Transcendental functions go through `libm` so results are bit-identical
//! across platforms and independent of the host C library.

pub use libm::{ceil, exp, floor, log, log10, pow, sqrt};

pub const SQRT_2: f64 = core::f64::consts::SQRT_2;
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Neumaier-compensated accumulator.
///
/// Sums are formed sequentially in the order values are pushed, so callers
/// that need order-independence must push in a canonical order.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl core::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<KahanSum>().total()
}

pub(crate) fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Converts the exact fraction `num / den` to the nearest `f64` reachable by
/// one division after reducing to lowest terms.
pub(crate) fn ratio_to_f64(num: u128, den: u128) -> f64 {
    debug_assert!(den != 0);
    if num == 0 {
        return 0.0;
    }
    let g = gcd_u128(num, den);
    (num / g) as f64 / (den / g) as f64
}

/// Round half away from zero.
#[inline]
pub fn round_half_up(v: f64) -> f64 {
    if v >= 0.0 {
        floor(v + 0.5)
    } else {
        -floor(-v + 0.5)
    }
}
