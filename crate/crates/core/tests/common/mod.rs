//! Test-side oracles, independent of the library's own quadrature.
#![allow(dead_code)]

use std::f64::consts::PI;

use fracsteady::{
    assemble_operator, build_grid, harvesting_profile, principal_eigenpair, torsion_function, EigenPair, Grid,
    GridFunction, Interval, ModelParams, OperatorMatrix, Order, ProfileKind, Tolerances,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tanh–sinh quadrature on `[a, b]`. Nodes are placed through the logistic
/// form `a + (b - a) / (1 + exp(-π sinh t))`, so points crowd towards both
/// endpoints without ever landing on them.
pub fn tanh_sinh(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let step = 1.0 / 128.0;
    let width = b - a;
    let mut sum = 0.0;
    let mut k = -(4.5 / step) as i64;
    while (k as f64) * step <= 4.5 {
        let t = k as f64 * step;
        let u = PI * t.sinh();
        // offset from a: width / (1 + e^{-u}); weight from the derivative
        let from_a = width / (1.0 + (-u).exp());
        let w = width * PI * t.cosh() / (4.0 * (u / 2.0).cosh().powi(2));
        if from_a > 0.0 && from_a < width && w.is_finite() && w > 0.0 {
            sum += w * f(a + from_a);
        }
        k += 1;
    }
    sum * step
}

/// `∫_0^∞ (1 - cos t) t^{-1-2s} dt`, via integration by parts as
/// `(1/2s) ∫_0^∞ sin t · t^{-2s} dt`, the latter summed over half-periods
/// and accelerated with repeated averaging of the alternating partial sums.
pub fn cosine_integral(s: f64) -> f64 {
    let q = 2.0 * s;
    let mut partial = Vec::new();
    // t = y^k with k = 1/(2 - q) removes the t^{1-q} singularity at the origin
    let k = 1.0 / (2.0 - q);
    let mut acc = tanh_sinh(0.0, 1.0, |y| {
        let t = y.powf(k);
        let sinc = if t < 1e-8 { 1.0 - t * t / 6.0 } else { t.sin() / t };
        k * sinc
    });
    acc += tanh_sinh(1.0, PI, |t| t.sin() * t.powf(-q));
    partial.push(acc);
    for k in 1..40 {
        let lo = k as f64 * PI;
        acc += tanh_sinh(lo, lo + PI, |t| t.sin() * t.powf(-q));
        partial.push(acc);
    }
    // Euler-style acceleration: average neighbouring partial sums repeatedly.
    let mut row = partial[partial.len() - 24..].to_vec();
    while row.len() > 1 {
        row = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    row[0] / q
}

/// Oracle for `C(1, s) = 1 / (2 ∫_0^∞ (1 - cos t) t^{-1-2s} dt)`.
pub fn c_oracle(s: f64) -> f64 {
    1.0 / (2.0 * cosine_integral(s))
}

/// Closed form `s 4^s Γ(1/2 + s) / (√π Γ(1 - s))`, with a Lanczos gamma
/// kept on the test side.
pub fn c_closed_form(s: f64) -> f64 {
    s * 4f64.powf(s) * gamma(0.5 + s) / (PI.sqrt() * gamma(1.0 - s))
}

pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// `(-Δ)^s (1 - x²)_+^s` at `x = 0` by direct quadrature of the singular
/// integral; the torsion constant is its reciprocal.
pub fn unit_torsion_load(s: f64) -> f64 {
    // 2u(0) - u(t) - u(-t) = -2 expm1(s ln(1 - t²)) inside, 2 outside
    let inner = tanh_sinh(0.0, 1.0, |t| -2.0 * (s * (-t * t).ln_1p()).exp_m1() * t.powf(-1.0 - 2.0 * s));
    let outer = 2.0 / (2.0 * s);
    c_closed_form(s) * (inner + outer)
}

/// `(-Δ)^s u` at `x` for the polynomial bump `u(y) = (r² - y²)^4` on
/// `|y| < r` (zero outside), by quadrature of the symmetric form. While both
/// `x ± t` stay in the support the second difference is expanded exactly in
/// powers of `t` to avoid cancellation.
pub fn bump_laplacian(x: f64, r: f64, s: f64) -> f64 {
    let u = |y: f64| if y.abs() < r { (r * r - y * y).powi(4) } else { 0.0 };
    // coefficients of (r² - y²)^4 in powers of y
    let r2 = r * r;
    let coeff = [r2.powi(4), 0.0, -4.0 * r2.powi(3), 0.0, 6.0 * r2 * r2, 0.0, -4.0 * r2, 0.0, 1.0];
    let deriv = |k: usize, y: f64| -> f64 {
        let mut v = 0.0;
        for (j, c) in coeff.iter().enumerate().skip(k) {
            let mut f = 1.0;
            for m in 0..k {
                f *= (j - m) as f64;
            }
            v += c * f * y.powi((j - k) as i32);
        }
        v
    };
    let p = 1.0 + 2.0 * s;
    let inside = r - x.abs();
    let mut total = 0.0;
    if inside > 0.0 {
        total += tanh_sinh(0.0, inside, |t| {
            // -2 Σ_{k≥1} u^{(2k)}(x) t^{2k} / (2k)!
            let mut d = 0.0;
            let mut fact = 1.0;
            for k in 1..=4 {
                fact *= ((2 * k - 1) * 2 * k) as f64;
                d -= 2.0 * deriv(2 * k, x) * t.powi(2 * k as i32) / fact;
            }
            d * t.powf(-p)
        });
    }
    let mut breaks = vec![inside.max(0.0), r + x.abs()];
    breaks.dedup();
    for w in breaks.windows(2) {
        total += tanh_sinh(w[0], w[1], |t| (2.0 * u(x) - u(x + t) - u(x - t)) * t.powf(-p));
    }
    total += 2.0 * u(x) * (r + x.abs()).powf(-2.0 * s) / (2.0 * s);
    c_closed_form(s) * total
}

/// Dense copy of the operator for nalgebra.
pub fn to_nalgebra(a: &OperatorMatrix) -> nalgebra::DMatrix<f64> {
    let m = a.matrix();
    nalgebra::DMatrix::from_fn(m.dim(), m.dim(), |i, j| m.get(i, j))
}

pub fn unit_grid(n: usize) -> Grid {
    build_grid(Interval::new(-1.0, 1.0).unwrap(), n).unwrap()
}

pub fn operator(n: usize, s: f64) -> OperatorMatrix {
    assemble_operator(&unit_grid(n), Order::new(s).unwrap()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_function(grid: Grid, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> GridFunction {
    let v = (0..grid.len()).map(|_| rng.gen_range(lo..hi)).collect();
    GridFunction::new(grid, v).unwrap()
}

/// Operator, eigenpair, torsion function and base parameters on (-1, 1).
pub struct Problem {
    pub a: OperatorMatrix,
    pub eig: EigenPair,
    pub e: GridFunction,
    pub base: ModelParams,
}

pub fn problem(n: usize, s: f64, lambda_factor: f64) -> Problem {
    let a = operator(n, s);
    let tol = Tolerances::default();
    let eig = principal_eigenpair(&a, &tol).unwrap();
    let e = torsion_function(&a).unwrap();
    let h = harvesting_profile(a.grid(), &ProfileKind::Sine).unwrap();
    let base = ModelParams::new(lambda_factor * eig.lambda1, 1.0, 1.0, 0.0, Order::new(s).unwrap(), h).unwrap();
    Problem { a, eig, e, base }
}
