//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use ehrelay::model::{db_to_linear, lambdas_from_geometry, NetworkGeometry};
use ehrelay::SystemParams;

pub const EULER: f64 = 0.577_215_664_901_532_860_6;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature on a finite interval.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    for _ in 0..2000 {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.abs().max(1e-300) {
            break;
        }
        let worst = (0..parts.len())
            .max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3))
            .unwrap();
        let (a, b, _, _) = parts.swap_remove(worst);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(&mut f, a, m);
        let (v2, e2) = gk15(&mut f, m, b);
        parts.push((a, m, v1, e1));
        parts.push((m, b, v2, e2));
    }
    parts.iter().map(|p| p.2).sum()
}

/// E1 by its power series, summed from the smallest term up. For x ≤ 2.
pub fn e1_series(x: f64) -> f64 {
    let mut terms = Vec::new();
    let mut t = 1.0;
    for k in 1..200 {
        t *= -x / k as f64;
        terms.push(t / k as f64);
        if t.abs() < 1e-30 {
            break;
        }
    }
    let tail: f64 = terms.iter().rev().sum();
    -EULER - x.ln() - tail
}

/// E1 by backward evaluation of its continued fraction at fixed depth.
/// For x ≥ 1.
pub fn e1_cf(x: f64) -> f64 {
    // E1(x) = e^{-x} / (x + 1/(1 + 1/(x + 2/(1 + 2/(x + ...)))))
    let mut tail = x;
    for n in (1..=4000).rev() {
        let nf = n as f64;
        tail = x + nf / (1.0 + nf / tail);
    }
    (-x).exp() / tail
}

pub fn e1_oracle(x: f64) -> f64 {
    if x <= 1.5 {
        e1_series(x)
    } else {
        e1_cf(x)
    }
}

/// Ei by its series of positive terms, scaled by e^{-x} to avoid overflow.
pub fn ei_series(x: f64) -> f64 {
    let mut t = (-x).exp();
    let mut sum = 0.0;
    let mut k = 1.0;
    loop {
        t *= x / k;
        sum += t / k;
        if k > x && t / k < 1e-20 * sum {
            break;
        }
        k += 1.0;
    }
    EULER + x.ln() + sum * x.exp()
}

/// Log-spaced grid of `n` points over [lo, hi].
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

/// Reference operating point: collinear relay, d_sd = d_sp = d_rp = 3,
/// epsilon = 4, eta = 0.7, I/N0 in dB.
pub fn scenario(d_sr: f64, rho: f64, i_db: f64, rs: f64) -> SystemParams {
    let geo = NetworkGeometry::collinear(d_sr, 3.0, 3.0, 3.0, 4.0).unwrap();
    SystemParams::new(lambdas_from_geometry(&geo), 0.7, rho, db_to_linear(i_db), rs).unwrap()
}

/// `Pr(A + B < g)` for independent exponentials with rates `mu`, `nu`.
pub fn hypoexp_cdf(mu: f64, nu: f64, g: f64) -> f64 {
    1.0 - (-mu * g).exp() - mu * conv_kernel(mu, nu, g)
}

/// `∫_0^g e^{-mu y} e^{-nu (g - y)} dy`.
pub fn conv_kernel(mu: f64, nu: f64, g: f64) -> f64 {
    let d = nu - mu;
    if (d * g).abs() < 1e-6 {
        let m = 0.5 * (mu + nu);
        g * (-m * g).exp() * (1.0 + (d * g).powi(2) / 24.0)
    } else {
        ((-mu * g).exp() - (-nu * g).exp()) / d
    }
}

/// Maps `u ∈ (0, 1)` to `lo + Exp(rate)`.
fn exp_quantile(u: f64, rate: f64) -> f64 {
    -(-u).ln_1p() / rate
}

/// Expectation over the source power `P_s = I / g_sp` and over `h_sr`
/// restricted to relay decoding, of `f(p_s, hp)` where `hp` is the
/// harvested power. Two nested quadratures on the unit square.
pub fn expect_decoded<F: Fn(f64, f64) -> f64>(sys: &SystemParams, f: F, tol: f64) -> f64 {
    let l = sys.links;
    let g = sys.gamma_th();
    let beta = sys.beta();
    integrate(
        |u| {
            let p_s = sys.i_over_no / exp_quantile(u, l.lambda_sp);
            let h0 = g / ((1.0 - sys.rho) * p_s);
            let decode = (-l.lambda_sr * h0).exp();
            if decode == 0.0 {
                return 0.0;
            }
            decode * integrate(|v| f(p_s, beta * p_s * (h0 + exp_quantile(v, l.lambda_sr))), 0.0, 1.0, tol)
        },
        0.0,
        1.0,
        tol,
    )
}

/// Exact `Pr(Γd < γth, Γr ≥ γth)` with an uncapped relay.
pub fn p3_uncapped_quad(sys: &SystemParams) -> f64 {
    let l = sys.links;
    let g = sys.gamma_th();
    expect_decoded(sys, |p_s, hp| hypoexp_cdf(l.lambda_sd / p_s, l.lambda_rd / hp, g), 1e-10)
}

/// The bracket that multiplies the cap weight:
/// `E[1{decoded} e^{-λrp I / hp} ∫_0^γ e^{-λrd (γ - y) / hp} f_Γd1(y) dy]`.
pub fn capped_bracket_quad(sys: &SystemParams) -> f64 {
    let l = sys.links;
    let g = sys.gamma_th();
    let i = sys.i_over_no;
    expect_decoded(
        sys,
        |p_s, hp| {
            let mu = l.lambda_sd / p_s;
            (-l.lambda_rp * i / hp).exp() * mu * conv_kernel(mu, l.lambda_rd / hp, g)
        },
        1e-10,
    )
}

/// Exact `p3` with the relay power cap, by three nested quadratures: the
/// uncapped value plus the outage added when the cap binds.
pub fn p3_exact_quad(sys: &SystemParams) -> f64 {
    let l = sys.links;
    let g = sys.gamma_th();
    let i = sys.i_over_no;
    let extra = expect_decoded(
        sys,
        |p_s, hp| {
            let mu = l.lambda_sd / p_s;
            let g0 = i / hp;
            let cap_prob = (-l.lambda_rp * g0).exp();
            if cap_prob == 0.0 {
                return 0.0;
            }
            let base = conv_kernel(mu, l.lambda_rd / hp, g);
            cap_prob
                * integrate(
                    |w| {
                        let p_r = i / (g0 + exp_quantile(w, l.lambda_rp));
                        mu * (base - conv_kernel(mu, l.lambda_rd / p_r, g))
                    },
                    0.0,
                    1.0,
                    1e-8,
                )
        },
        1e-8,
    );
    p3_uncapped_quad(sys) + extra
}
