//! Complementary error function.
//!
//! Rational approximations from the SunPro/FreeBSD `s_erf.c` family, split
//! into four intervals of `|x|`:
//!
//! * `[0, 0.84375)`: `erf(x) = x + x*P(x^2)/Q(x^2)`, `erfc = 1 - erf` (rearranged above 1/4)
//! * `[0.84375, 1.25)`: expansion about 1, `erfc(x) = (1 - c) - P1(s)/Q1(s)` with `s = x - 1`
//! * `[1.25, 1/0.35)` and `[1/0.35, 28)`: `erfc(x) = exp(-x^2 - 0.5625 + R(z)/S(z)) / x`
//!   with `z = 1/x^2`; `-x^2` is split as `-t^2 + (t - x)(t + x)` where `t` is
//!   `x` truncated to 32 significant bits, so the exponent stays exact
//! * `x >= 28`: underflows to 0
//!
//! Each rational approximant is accurate to better than `2^-57`; the result is
//! within about one ulp in relative terms across the whole range, including
//! the far tail.

#![allow(clippy::excessive_precision)]

use crate::math::exp;

const ERX: f64 = 8.45062911510467529297e-01;
const EFX: f64 = 1.28379167095512586316e-01;

const PP: [f64; 5] = [
    1.28379167095512558561e-01,
    -3.25042107247001499370e-01,
    -2.84817495755985104766e-02,
    -5.77027029648944159157e-03,
    -2.37630166566501626084e-05,
];
const QQ: [f64; 5] = [
    3.97917223959155352819e-01,
    6.50222499887672944485e-02,
    5.08130628187576562776e-03,
    1.32494738004321644526e-04,
    -3.96022827877536812320e-06,
];

const PA: [f64; 7] = [
    -2.36211856075265944077e-03,
    4.14856118683748331666e-01,
    -3.72207876035701323847e-01,
    3.18346619901161753674e-01,
    -1.10894694282396677476e-01,
    3.54783043256182359371e-02,
    -2.16637559486879084300e-03,
];
const QA: [f64; 6] = [
    1.06420880400844228286e-01,
    5.40397917702171048937e-01,
    7.18286544141962662868e-02,
    1.26171219808761642112e-01,
    1.36370839120290507362e-02,
    1.19844998467991074170e-02,
];

const RA: [f64; 8] = [
    -9.86494403484714822705e-03,
    -6.93858572707181764372e-01,
    -1.05586262253232909814e+01,
    -6.23753324503260060396e+01,
    -1.62396669462573470355e+02,
    -1.84605092906711035994e+02,
    -8.12874355063065934246e+01,
    -9.81432934416914548592e+00,
];
const SA: [f64; 8] = [
    1.96512716674392571292e+01,
    1.37657754143519042600e+02,
    4.34565877475229228821e+02,
    6.45387271733267880336e+02,
    4.29008140027567833386e+02,
    1.08635005541779435134e+02,
    6.57024977031928170135e+00,
    -6.04244152148580987438e-02,
];

const RB: [f64; 7] = [
    -9.86494292470009928597e-03,
    -7.99283237680523006574e-01,
    -1.77579549177547519889e+01,
    -1.60636384855821916062e+02,
    -6.37566443368389627722e+02,
    -1.02509513161107724954e+03,
    -4.83519191608651397019e+02,
];
const SB: [f64; 7] = [
    3.03380607434824582924e+01,
    3.25792512996573918826e+02,
    1.53672958608443695994e+03,
    3.19985821950859553908e+03,
    2.55305040643316442583e+03,
    4.74528541206955367215e+02,
    -2.24409524465858183362e+01,
];

/// `c0 + z*(c1 + z*(c2 + ...))`
#[inline]
fn horner(z: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
}

/// `1 + z*(c0 + z*(c1 + ...))`
#[inline]
fn horner1(z: f64, coeffs: &[f64]) -> f64 {
    1.0 + z * horner(z, coeffs)
}

/// `erfc(x) * x * exp(x^2)` style tail evaluation for `1.25 <= x < 28`.
fn erfc_tail(x: f64) -> f64 {
    let z = 1.0 / (x * x);
    let (r, s) = if x < 1.0 / 0.35 { (horner(z, &RA), horner1(z, &SA)) } else { (horner(z, &RB), horner1(z, &SB)) };
    let t = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
    exp(-t * t - 0.5625) * exp((t - x) * (t + x) + r / s) / x
}

/// Complementary error function `erfc(x) = 1 - erf(x)`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 2.0;
    }
    let ax = x.abs();
    if ax < 0.84375 {
        if ax < 1.0 / (1u64 << 56) as f64 {
            return 1.0 - x;
        }
        let z = x * x;
        let y = horner(z, &PP) / horner1(z, &QQ);
        if x < 0.25 {
            return 1.0 - (x + x * y);
        }
        return 0.5 - ((x - 0.5) + x * y);
    }
    if ax < 1.25 {
        let s = ax - 1.0;
        let pq = horner(s, &PA) / horner1(s, &QA);
        return if x >= 0.0 { 1.0 - ERX - pq } else { 1.0 + ERX + pq };
    }
    if x >= 28.0 {
        return 0.0;
    }
    if x <= -6.0 {
        return 2.0;
    }
    let tail = erfc_tail(ax);
    if x > 0.0 {
        tail
    } else {
        2.0 - tail
    }
}

/// Error function, via the same approximants.
pub fn erf(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 0.84375 {
        if ax < 1.0 / (1u64 << 28) as f64 {
            return x + EFX * x;
        }
        let z = x * x;
        return x + x * (horner(z, &PP) / horner1(z, &QQ));
    }
    1.0 - erfc(x)
}
