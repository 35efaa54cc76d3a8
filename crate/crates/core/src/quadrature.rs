//! Closed-form power-kernel moments and Gauss–Legendre rules.

use crate::scalar::Real;

/// `∫_lo^hi t^(-q) dt` for `0 < lo < hi`.
///
/// Written as `lo^(1-q) * expm1((1-q) ln(hi/lo)) / (1-q)` so the logarithmic
/// limit at `q = 1` is reached continuously instead of through cancellation.
pub fn power_integral<T: Real>(q: T, lo: T, hi: T) -> T {
    debug_assert!(lo > T::zero() && hi >= lo);
    let log_ratio = (hi / lo).ln();
    let r = T::one() - q;
    if r == T::zero() {
        return log_ratio;
    }
    lo.powf(r) * (r * log_ratio).exp_m1() / r
}

/// `∫_lo^∞ t^(-q) dt` for `q > 1`.
pub fn power_tail<T: Real>(q: T, lo: T) -> T {
    debug_assert!(q > T::one());
    lo.powf(T::one() - q) / (q - T::one())
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let n = order;
        let nf = T::from_usize_lossy(n);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let half = n.div_ceil(2);
        for i in 0..half {
            // Tricomi initial guess for the i-th largest root
            let k = T::from_usize_lossy(i) + T::lit(0.75);
            let mut x = (T::PI() * k / (nf + T::lit(0.5))).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d.is_finite() { d } else { dp };
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = x;
            weights[i] = w;
            nodes[n - 1 - i] = -x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    /// Applies the rule on `[lo, hi]`.
    pub fn integrate(&self, lo: T, hi: T, f: impl Fn(T) -> T) -> T {
        let mid = (lo + hi) / T::lit(2.0);
        let half = (hi - lo) / T::lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| *w * f(mid + half * *x))
            .sum::<T>()
            * half
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_usize_lossy(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}
