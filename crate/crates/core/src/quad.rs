//! One-dimensional quadrature and root bracketing used by the closed forms.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd-indexed Kronrod nodes (XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_DEPTH: u32 = 60;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (left, el) = gk15(f, a, m);
    let (right, er) = gk15(f, m, b);
    let sum = left + right;
    if depth >= MAX_DEPTH || el + er <= tol || (sum - whole).abs() <= 1e-3 * tol {
        return sum;
    }
    adapt(f, a, m, left, 0.5 * tol, depth + 1) + adapt(f, m, b, right, 0.5 * tol, depth + 1)
}

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, err) = gk15(&f, a, b);
    if err <= 1e-3 * tol {
        return whole;
    }
    adapt(&f, a, b, whole, tol, 0)
}

/// `∫_c^1 (1 - t²)^p dt` for `c ∈ [-1, 1]` and `p > -1`.
///
/// The endpoint `t = 1` is desingularised with `1 - t = u^q`, which turns the
/// `(1 - t)^p` factor into a polynomial-like weight for every admissible `p`.
pub fn sech_tail(c: f64, p: f64) -> f64 {
    debug_assert!(p > -1.0);
    let c = c.clamp(-1.0, 1.0);
    if c < 0.0 {
        // ∫_{-|c|}^1 = 2∫_0^1 - ∫_{|c|}^1 by evenness of the integrand
        return 2.0 * tail_nonneg(0.0, p) - tail_nonneg(-c, p);
    }
    tail_nonneg(c, p)
}

fn tail_nonneg(c: f64, p: f64) -> f64 {
    if c >= 1.0 {
        return 0.0;
    }
    let q = if p >= 1.0 { 1.0 } else { 2.0 / (p + 1.0) };
    let upper = (1.0 - c).powf(1.0 / q);
    let expo = q * (p + 1.0) - 1.0;
    let integrand = |u: f64| {
        if u <= 0.0 {
            return if expo == 0.0 { q * 2f64.powf(p) } else { 0.0 };
        }
        q * u.powf(expo) * (2.0 - u.powf(q)).powf(p)
    };
    integrate(integrand, 0.0, upper, 1e-14)
}

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping once the
/// bracket is narrower than `tol`. Returns `None` when the endpoints do not
/// bracket a root.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..400 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
