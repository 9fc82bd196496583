//! Counter-based random draws keyed by `(seed, step, lane)`.
//!
//! Every draw is a pure function of its key, so skipping or reordering
//! draws in one lane never shifts another.

pub const LANE_NOISE: u64 = 0;
pub const LANE_NOISE_AUX: u64 = 1;
pub const LANE_ADAPTED: u64 = 2;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
pub fn hash_key(seed: u64, step: u64, lane: u64) -> u64 {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    let a = mix64(seed.wrapping_add(GOLDEN));
    let b = mix64(
        a ^ step
            .wrapping_mul(GOLDEN)
            .wrapping_add(0x632b_e59b_d9b4_e019),
    );
    mix64(
        b ^ lane
            .wrapping_mul(0xd6e8_feb8_6659_fd93)
            .wrapping_add(GOLDEN),
    )
}

/// Maps the 52 high bits to the open interval (0, 1).
#[inline]
pub fn to_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

#[inline]
pub fn uniform(seed: u64, step: u64, lane: u64) -> f64 {
    to_unit(hash_key(seed, step, lane))
}

#[inline]
pub fn std_normal(seed: u64, step: u64, lane: u64) -> f64 {
    inv_norm_cdf(uniform(seed, step, lane))
}

/// Standard normal quantile, Wichura's AS 241 (PPND16), relative accuracy
/// about 1e-16.
pub fn inv_norm_cdf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "probability {p} outside (0, 1)");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let z = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -z
    } else {
        z
    }
}

#[inline]
fn poly(c: &[f64; 8], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

const A: [f64; 8] = [
    3.387_132_872_796_366_5,
    1.331_416_678_917_843_8e2,
    1.971_590_950_306_551_3e3,
    1.373_169_376_550_946e4,
    4.592_195_393_154_987e4,
    6.726_577_092_700_87e4,
    3.343_057_558_358_813e4,
    2.509_080_928_730_122_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091e1,
    6.871_870_074_920_579e2,
    5.394_196_021_424_751e3,
    2.121_379_430_158_659_7e4,
    3.930_789_580_009_271e4,
    2.872_908_573_572_194_3e4,
    5.226_495_278_852_545e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_546,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    2.417_807_251_774_506e-1,
    2.272_384_498_926_918_4e-2,
    7.745_450_142_783_414e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    6.897_673_349_851e-1,
    1.481_039_764_274_800_8e-1,
    1.519_866_656_361_645_7e-2,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    2.965_605_718_285_048_7e-1,
    2.653_218_952_657_612_4e-2,
    1.242_660_947_388_078_4e-3,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_88e-1,
    1.369_298_809_227_358e-1,
    1.487_536_129_085_061_5e-2,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_8e-15,
];

#[cfg(test)]
mod tests {
    use super::*;

    fn norm_cdf(x: f64) -> f64 {
        // Φ by composite Simpson on [−12, x]; independent of the quantile code.
        let lo = -12.0;
        let m = 20_000;
        let h = (x - lo) / m as f64;
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = pdf(lo) + pdf(x);
        for k in 1..m {
            let t = lo + k as f64 * h;
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * pdf(t);
        }
        s * h / 3.0
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-10, 1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.975, 0.999_999] {
            let x = inv_norm_cdf(p);
            let back = norm_cdf(x);
            assert!(
                (back - p).abs() < 1e-10 * p.max(1e-3),
                "p={p} x={x} back={back}"
            );
        }
        assert_eq!(inv_norm_cdf(0.5), 0.0);
        assert!((inv_norm_cdf(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
    }

    #[test]
    fn quantile_is_odd() {
        for &p in &[0.5f64.powi(27), 0.031_25, 0.25, 0.375] {
            assert_eq!(inv_norm_cdf(p), -inv_norm_cdf(1.0 - p));
        }
    }

    #[test]
    fn draws_are_keyed_and_open() {
        assert_eq!(uniform(1, 2, 3), uniform(1, 2, 3));
        assert_ne!(uniform(1, 2, 3), uniform(1, 2, 4));
        assert_ne!(uniform(1, 2, 3), uniform(1, 3, 3));
        assert_ne!(uniform(1, 2, 3), uniform(2, 2, 3));
        assert!(to_unit(0) > 0.0 && to_unit(u64::MAX) < 1.0);
    }

    #[test]
    fn moments_look_right() {
        let n = 200_000u64;
        let (mut s1, mut s2, mut u1) = (0.0, 0.0, 0.0);
        for k in 0..n {
            let z = std_normal(42, k, LANE_NOISE);
            s1 += z;
            s2 += z * z;
            u1 += uniform(42, k, LANE_ADAPTED);
        }
        let nf = n as f64;
        assert!((s1 / nf).abs() < 0.01);
        assert!((s2 / nf - 1.0).abs() < 0.015);
        assert!((u1 / nf - 0.5).abs() < 0.003);
    }
}
