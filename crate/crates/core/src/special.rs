//! Normal quantile and inverse error function.
//!
//! The quantile starts from Wichura's AS 241 rational approximation and is
//! polished with two Halley steps against `erfc`, giving about 1e-14
//! relative accuracy down to tail probabilities near the smallest normal `f64`.
//! Tails are always evaluated from the small probability directly so that
//! `1 - p` never loses digits.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    133.141_667_891_784_377_45,
    1_971.590_950_306_551_442_7,
    13_731.693_765_509_461_125,
    45_921.953_931_549_871_457,
    67_265.770_927_008_700_853,
    33_430.575_583_588_128_105,
    2_509.080_928_730_122_672_7,
];
const B: [f64; 8] = [
    1.0,
    42.313_330_701_600_911_252,
    687.187_007_492_057_908_3,
    5_394.196_021_424_751_107_7,
    21_213.794_301_586_595_867,
    39_307.895_800_092_710_61,
    28_729.085_735_721_942_674,
    5_226.495_278_852_545_925,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    0.241_780_725_177_450_611_77,
    0.022_723_844_989_269_184_583_3,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    0.689_767_334_985_100_004_55,
    0.148_103_976_427_480_074_59,
    0.015_198_666_563_616_457_196_6,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    0.296_560_571_828_504_891_23,
    0.026_532_189_526_576_123_093,
    0.001_242_660_947_388_078_438_6,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    0.599_832_206_555_887_937_69,
    0.136_929_880_922_735_805_31,
    0.014_875_361_290_850_614_852_5,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

/// AS 241 initial estimate for the lower-tail quantile, `0 < p <= 0.5`.
fn initial_lower(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = (-p.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    -x
}

/// Quantile for `0 < p <= 0.5`, refined by two Halley steps.
fn lower_quantile(p: f64) -> f64 {
    let mut z = initial_lower(p);
    for _ in 0..2 {
        let pdf = normal_pdf(z);
        if pdf == 0.0 {
            break;
        }
        let t = (normal_cdf(z) - p) / pdf;
        z -= t / (1.0 + 0.5 * z * t);
    }
    z
}

/// Standard normal quantile `√2 erf⁻¹(2p - 1)` for `0 < p < 1`.
pub fn probit(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("probit needs 0 < p < 1, got {p}")));
    }
    Ok(if p <= 0.5 {
        lower_quantile(p)
    } else {
        -lower_quantile(1.0 - p)
    })
}

/// `z` with upper-tail probability `P(Z > z) = tail`, accurate for tiny tails.
pub fn upper_tail_quantile(tail: f64) -> Result<f64> {
    if !(tail > 0.0 && tail < 1.0) {
        return Err(Error::invalid(format!("tail probability must lie in (0,1), got {tail}")));
    }
    Ok(-probit(tail)?)
}

/// Inverse error function on `(-1, 1)`.
pub fn erf_inv(x: f64) -> Result<f64> {
    if !(x > -1.0 && x < 1.0) {
        return Err(Error::invalid(format!("erf_inv needs -1 < x < 1, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let y = upper_tail_quantile(0.5 * (1.0 - x.abs()))? / SQRT_2;
    Ok(y.copysign(x))
}

/// Inverse complementary error function on `(0, 2)`.
pub fn erfc_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 2.0) {
        return Err(Error::invalid(format!("erfc_inv needs 0 < y < 2, got {y}")));
    }
    Ok(if y <= 1.0 {
        upper_tail_quantile(0.5 * y)? / SQRT_2
    } else {
        -upper_tail_quantile(0.5 * (2.0 - y))? / SQRT_2
    })
}

/// Leading-order tail form `erf⁻¹(x) ≈ √(-ln(1 - x²))`, valid for `x` near one.
pub fn erf_inv_tail_approx(x: f64) -> f64 {
    (-(1.0 - x * x).ln()).sqrt()
}
