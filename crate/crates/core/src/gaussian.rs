//! Standard normal density, distribution function and quantile.
//!
//! The distribution function follows W. J. Cody's rational Chebyshev
//! approximations (the `ANORM` routine), which carry close to full double
//! precision in both tails. The quantile starts from Acklam's rational
//! approximation and is polished with Halley steps on the distribution
//! function implemented here, so that `normal_cdf(normal_quantile(p))`
//! reproduces `p` to within a few ulps.
//!
//! Beyond `|z| > 38` the lower tail underflows double precision; the
//! distribution function returns exactly `0.0` or `1.0` there.

use serde::Serialize;

use crate::error::{finite, out_of_range, Result};

/// 1/sqrt(2*pi)
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_94;

/// Past this magnitude the lower tail is below the smallest subnormal.
pub const TAIL_CUTOFF: f64 = 38.0;

/// A standardized quantity, in standard-deviation units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct ZScore(f64);

impl ZScore {
    pub fn new(value: f64) -> Result<Self> {
        finite("z", value).map(ZScore)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            out_of_range("probability", value, "0 <= p <= 1")
        }
    }

    /// Only for values that are probabilities by construction.
    pub(crate) fn clamped(value: f64) -> Self {
        Probability(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Probability(1.0 - self.0)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Φ(z).
pub fn normal_cdf(z: ZScore) -> Probability {
    Probability::clamped(cdf(z.0))
}

/// Φ⁻¹(p) for `0 < p < 1`.
pub fn normal_quantile(p: Probability) -> Result<ZScore> {
    let p = p.value();
    if p <= 0.0 || p >= 1.0 {
        return out_of_range("p", p, "0 < p < 1");
    }
    Ok(ZScore(quantile(p)))
}

/// Standard normal density.
pub fn normal_pdf(z: ZScore) -> f64 {
    pdf(z.0)
}

pub(crate) fn pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

const A: [f64; 5] = [
    2.235_252_035_460_683_928_7e0,
    1.610_282_310_685_558_788_1e2,
    1.067_689_485_460_370_958_2e3,
    1.815_498_125_334_356_124_9e4,
    6.568_233_791_820_744_911_3e-2,
];
const B: [f64; 4] = [
    4.720_258_190_468_824_187_0e1,
    9.760_985_517_377_766_932_2e2,
    1.026_093_220_861_897_820_5e4,
    4.550_778_933_502_672_995_6e4,
];
const C: [f64; 9] = [
    3.989_415_120_881_346_676_4e-1,
    8.883_149_794_388_375_941_2e0,
    9.350_665_613_217_785_597_9e1,
    5.972_702_763_948_002_622_6e2,
    2.494_537_585_290_372_671_1e3,
    6.848_190_450_536_282_332_6e3,
    1.160_265_143_764_735_012_4e4,
    9.842_714_838_383_978_021_8e3,
    1.076_557_677_372_019_231_7e-8,
];
const D: [f64; 8] = [
    2.226_668_804_432_811_569_1e1,
    2.353_879_017_826_249_986_1e2,
    1.519_377_599_407_554_805_0e3,
    6.485_558_298_266_760_755_0e3,
    1.861_557_164_088_509_809_1e4,
    3.490_095_272_114_597_726_6e4,
    3.891_200_328_609_327_141_1e4,
    1.968_542_967_685_999_072_7e4,
];
const P: [f64; 6] = [
    2.158_985_340_579_569_9e-1,
    1.274_011_611_602_473_639e-1,
    2.223_527_787_064_980_7e-2,
    1.421_619_193_227_893_466e-3,
    2.911_287_495_116_879_2e-5,
    2.307_344_176_494_017_303e-2,
];
const Q: [f64; 5] = [
    1.284_260_096_144_911_21e0,
    4.682_382_124_808_651_18e-1,
    6.598_813_786_892_855_15e-2,
    3.782_396_332_027_582_44e-3,
    7.297_515_550_839_662_05e-5,
];

/// Returns `(Φ(x), 1 − Φ(x))`, each with small relative error.
pub(crate) fn cdf_pair(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if x < -TAIL_CUTOFF {
        return (0.0, 1.0);
    }
    if x > TAIL_CUTOFF {
        return (1.0, 0.0);
    }

    let y = x.abs();
    if y <= 0.662_91 {
        let xsq = if y > f64::EPSILON * 0.5 { x * x } else { 0.0 };
        let mut num = A[4] * xsq;
        let mut den = xsq;
        for i in 0..3 {
            num = (num + A[i]) * xsq;
            den = (den + B[i]) * xsq;
        }
        let t = x * (num + A[3]) / (den + B[3]);
        return (0.5 + t, 0.5 - t);
    }

    let tail = if y <= 32f64.sqrt() {
        let mut num = C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + C[i]) * y;
            den = (den + D[i]) * y;
        }
        (num + C[7]) / (den + D[7])
    } else {
        let xsq = 1.0 / (x * x);
        let mut num = P[5] * xsq;
        let mut den = xsq;
        for i in 0..4 {
            num = (num + P[i]) * xsq;
            den = (den + Q[i]) * xsq;
        }
        let r = xsq * (num + P[4]) / (den + Q[4]);
        (FRAC_1_SQRT_2PI - r) / y
    };
    // exp(-y²/2) split so the rounding of y² does not leak into the tail
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    let tail = (-ysq * ysq * 0.5).exp() * (-del * 0.5).exp() * tail;

    if x > 0.0 {
        (1.0 - tail, tail)
    } else {
        (tail, 1.0 - tail)
    }
}

pub(crate) fn cdf(x: f64) -> f64 {
    cdf_pair(x).0
}

/// Upper tail 1 − Φ(x) without cancellation.
pub(crate) fn sf(x: f64) -> f64 {
    cdf_pair(x).1
}

/// Acklam's rational approximation, relative error about 1.15e-9.
fn quantile_initial(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Lower-half quantile, `0 < p <= 0.5`.
fn quantile_lower(p: f64) -> f64 {
    let mut x = quantile_initial(p);
    for _ in 0..2 {
        let density = pdf(x);
        if x < -TAIL_CUTOFF + 0.5 || density == 0.0 {
            break;
        }
        let u = (cdf(x) - p) / density;
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Unchecked quantile for `0 < p < 1`.
pub(crate) fn quantile(p: f64) -> f64 {
    if p <= 0.5 {
        quantile_lower(p)
    } else {
        // 1 - p is exact for p in [0.5, 1]
        -quantile_lower(1.0 - p)
    }
}
