//! Summation of `beta F = 1/2 sum_{n in Z} g(zeta_n)`, `zeta_n = 2 pi n / beta`.
//!
//! The terms `n = 0 .. N-1` are summed explicitly (compensated). The tail
//! `sum_{n >= N} g(zeta_n)` is replaced by its integral plus Gregory end
//! corrections; the integral runs over `u = N/n in (0, 1]` with
//! Gauss-Legendre panels. The explicit range always reaches well past the
//! largest frequency of the summand, so the tail is smooth and small.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{positive, Error, Result};

/// A function whose Matsubara sum gives `beta F`.
pub trait MatsubaraSummand: Sync {
    /// `g(zeta)`; the `n` and `-n` terms are both `g(zeta_n)`.
    fn log_term(&self, zeta: f64) -> Result<f64>;

    /// Largest frequency on which `g` varies; the explicit sum extends past
    /// a fixed multiple of it.
    fn frequency_scale(&self) -> f64;
}

/// Inverse temperature together with the truncation policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatsubaraGrid {
    beta: f64,
    rel_tol: f64,
    n_max_cap: u64,
}

pub const DEFAULT_REL_TOL: f64 = 1e-12;
pub const DEFAULT_N_MAX_CAP: u64 = 10_000_000;

/// Explicit terms always cover `zeta <= CUTOFF_MULTIPLE * frequency_scale`.
const CUTOFF_MULTIPLE: f64 = 16.0;
const MIN_EXPLICIT_TERMS: u64 = 64;

/// Gregory end-correction weights for forward differences at the tail start.
const GREGORY: [f64; 6] = [
    1.0 / 12.0,
    1.0 / 24.0,
    19.0 / 720.0,
    3.0 / 160.0,
    863.0 / 60480.0,
    275.0 / 24192.0,
];

impl MatsubaraGrid {
    pub fn new(beta: f64) -> Result<Self> {
        positive("beta", beta)?;
        Ok(Self {
            beta,
            rel_tol: DEFAULT_REL_TOL,
            n_max_cap: DEFAULT_N_MAX_CAP,
        })
    }

    pub fn from_temperature(temperature: f64) -> Result<Self> {
        positive("T", temperature)?;
        Self::new(1.0 / temperature)
    }

    pub fn with_tolerance(mut self, rel_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
            return Err(Error::Domain {
                name: "rel_tol",
                value: rel_tol,
                reason: "must lie in (0, 1e-3]",
            });
        }
        self.rel_tol = rel_tol;
        Ok(self)
    }

    pub fn with_cap(mut self, n_max_cap: u64) -> Result<Self> {
        if n_max_cap < MIN_EXPLICIT_TERMS {
            return Err(Error::Domain {
                name: "n_max_cap",
                value: n_max_cap as f64,
                reason: "must be at least 64",
            });
        }
        self.n_max_cap = n_max_cap;
        Ok(self)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn n_max_cap(&self) -> u64 {
        self.n_max_cap
    }

    pub fn frequency(&self, n: i64) -> f64 {
        2.0 * PI * n as f64 / self.beta
    }

    /// Initial explicit-term count for a summand.
    pub fn initial_terms(&self, summand: &impl MatsubaraSummand) -> u64 {
        let cutoff = CUTOFF_MULTIPLE * summand.frequency_scale();
        let n = (cutoff * self.beta / (2.0 * PI)).ceil();
        if n.is_finite() {
            (n as u64).max(MIN_EXPLICIT_TERMS)
        } else {
            self.n_max_cap
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumOutcome {
    /// `beta F`
    pub value: f64,
    /// Number of explicitly summed non-negative frequencies.
    pub explicit_terms: u64,
    /// Contribution of `n >= explicit_terms` (both signs of `n`).
    pub tail: f64,
    /// Estimated error of `tail`.
    pub tail_error: f64,
}

/// Adaptive sum: grows the explicit range until the tail error estimate is
/// below `rel_tol * |beta F|`.
pub fn sum_log_terms(summand: &impl MatsubaraSummand, grid: &MatsubaraGrid) -> Result<SumOutcome> {
    let mut n = grid.initial_terms(summand).min(grid.n_max_cap);
    loop {
        let out = sum_with_cutoff(summand, grid.beta, n)?;
        if out.tail_error <= grid.rel_tol * out.value.abs() || out.tail_error == 0.0 {
            return Ok(out);
        }
        if n >= grid.n_max_cap {
            return Err(Error::NonConvergence {
                n_max: grid.n_max_cap,
                tail_bound: out.tail_error,
            });
        }
        n = (n * 4).min(grid.n_max_cap);
    }
}

/// Sum with a fixed number of explicit terms. A smooth function of `beta`
/// for fixed `explicit_terms`, which is what the finite-difference
/// derivatives rely on.
pub fn sum_with_cutoff(summand: &impl MatsubaraSummand, beta: f64, explicit_terms: u64) -> Result<SumOutcome> {
    let step = 2.0 * PI / beta;
    let f = |n: f64| summand.log_term(step * n);

    let mut acc = NeumaierSum::new(0.5 * f(0.0)?);
    for n in 1..explicit_terms {
        acc.add(f(n as f64)?);
    }

    let start = explicit_terms as f64;
    let mut samples = [0.0; GREGORY.len() + 1];
    for (k, v) in samples.iter_mut().enumerate() {
        *v = f(start + k as f64)?;
    }
    let mut tail = 0.5 * samples[0];
    let mut diffs = samples;
    let mut last_correction = 0.0;
    for (order, weight) in GREGORY.iter().enumerate() {
        for i in 0..diffs.len() - order - 1 {
            diffs[i] = diffs[i + 1] - diffs[i];
        }
        let sign = if order % 2 == 0 { -1.0 } else { 1.0 };
        last_correction = sign * weight * diffs[0];
        tail += last_correction;
    }

    let integrand = |u: f64| -> Result<f64> { Ok(f(start / u)? * start / (u * u)) };
    let coarse = gauss_integrate(&integrand, gauss_legendre_32())?;
    let fine = gauss_integrate(&integrand, gauss_legendre_64())?;
    tail += fine;

    acc.add(tail);
    Ok(SumOutcome {
        value: acc.total(),
        explicit_terms,
        tail,
        tail_error: last_correction.abs() + (fine - coarse).abs(),
    })
}

/// Integral over (0, 1] on two equal panels.
fn gauss_integrate(f: &impl Fn(f64) -> Result<f64>, rule: &GaussRule) -> Result<f64> {
    let mut total = 0.0;
    for (lo, hi) in [(0.0, 0.5), (0.5, 1.0)] {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            total += w * half * f(mid + half * x)?;
        }
    }
    Ok(total)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Newton iteration on `P_n` from the Tricomi initial guesses.
    pub fn legendre(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gauss_legendre_32() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::legendre(32))
}

fn gauss_legendre_64() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::legendre(64))
}

/// Kahan-Babuska-Neumaier compensated summation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub(crate) fn new(initial: f64) -> Self {
        Self {
            sum: initial,
            compensation: 0.0,
        }
    }

    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// `g = ln((w^2 + z^2)/(w0^2 + z^2))`; paired sum is `2 ln(sinh(bw/2)/sinh(bw0/2))`.
    struct SingleMode {
        w: f64,
        w0: f64,
    }

    impl MatsubaraSummand for SingleMode {
        fn log_term(&self, zeta: f64) -> Result<f64> {
            let z2 = zeta * zeta;
            Ok(((self.w * self.w - self.w0 * self.w0) / (self.w0 * self.w0 + z2)).ln_1p())
        }

        fn frequency_scale(&self) -> f64 {
            self.w.max(self.w0)
        }
    }

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        let rule = GaussRule::legendre(32);
        let weight_sum: f64 = rule.weights.iter().sum();
        assert_relative_eq!(weight_sum, 2.0, max_relative = 1e-14);
        let x62: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(62)).sum();
        assert_relative_eq!(x62, 2.0 / 63.0, max_relative = 1e-12);
    }

    #[test]
    fn gregory_tail_of_inverse_fourth_power() {
        struct Quartic;
        impl MatsubaraSummand for Quartic {
            fn log_term(&self, zeta: f64) -> Result<f64> {
                Ok(if zeta == 0.0 { 0.0 } else { zeta.powi(-4) })
            }
            fn frequency_scale(&self) -> f64 {
                0.0
            }
        }
        // beta = 2 pi: zeta_n = n, sum_{n>=1} n^-4 = pi^4/90
        let out = sum_with_cutoff(&Quartic, 2.0 * PI, 64).unwrap();
        assert_relative_eq!(out.value, PI.powi(4) / 90.0, max_relative = 1e-14);
    }

    #[test]
    fn single_mode_identity() {
        for (w, w0, t) in [(1.0, 0.5, 0.01), (1.0, 2.0, 0.3), (3.0, 0.2, 7.0), (0.4, 0.41, 100.0)] {
            let grid = MatsubaraGrid::from_temperature(t).unwrap();
            let sum = sum_log_terms(&SingleMode { w, w0 }, &grid).unwrap().value;
            let b = 1.0 / t;
            let exact = (b * w / 2.0).sinh().ln() - (b * w0 / 2.0).sinh().ln();
            // sum_log_terms returns half the full sum
            assert_relative_eq!(2.0 * sum, 2.0 * exact, max_relative = 1e-11);
        }
    }

    #[test]
    fn cap_triggers_non_convergence() {
        struct Slow;
        impl MatsubaraSummand for Slow {
            fn log_term(&self, zeta: f64) -> Result<f64> {
                Ok(-1.0 / (1.0 + zeta).sqrt())
            }
            fn frequency_scale(&self) -> f64 {
                1.0
            }
        }
        let grid = MatsubaraGrid::new(1.0).unwrap().with_cap(64).unwrap();
        assert!(matches!(
            sum_log_terms(&Slow, &grid),
            Err(Error::NonConvergence { n_max: 64, .. })
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(MatsubaraGrid::new(0.0).is_err());
        assert!(MatsubaraGrid::from_temperature(-1.0).is_err());
        let grid = MatsubaraGrid::new(1.0).unwrap();
        assert!(grid.with_tolerance(1e-2).is_err());
        assert!(grid.with_tolerance(0.0).is_err());
        assert_relative_eq!(grid.frequency(3), 6.0 * PI);
    }

    #[test]
    fn neumaier_recovers_small_addends() {
        let mut s = NeumaierSum::new(1.0);
        for _ in 0..1000 {
            s.add(1e-17);
        }
        s.add(-1.0);
        assert_relative_eq!(s.total(), 1e-14, max_relative = 1e-10);
    }
}
