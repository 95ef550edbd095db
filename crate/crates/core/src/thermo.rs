//! Interaction free energy, internal energy and entropy from Matsubara sums.
//!
//! `U = d(beta F)/d beta` and `S = -dF/dT` are both taken by central
//! differences with Richardson extrapolation, at a fixed number of explicit
//! Matsubara terms so the differenced function is smooth. The identity
//! `S = (U - F)/T` then serves as a consistency check.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{positive, Error, Result};
use crate::matsubara::{sum_log_terms, sum_with_cutoff, MatsubaraGrid, MatsubaraSummand};
use crate::model::{d_factors, StableModel};

/// Relative finite-difference step in `T` and `beta`.
pub const DERIVATIVE_STEP: f64 = 1e-4;

/// Bisection stops once the bracket is narrower than this fraction of `T`.
pub const INTERVAL_REL_WIDTH: f64 = 1e-4;

/// Roundoff amplification assumed when deciding whether a computed entropy
/// is distinguishable from zero.
const NOISE_FACTOR: f64 = 256.0;

impl MatsubaraSummand for StableModel {
    fn log_term(&self, zeta: f64) -> Result<f64> {
        Ok(d_factors(self, zeta)?.log_interaction_factor())
    }

    fn frequency_scale(&self) -> f64 {
        self.model().frequency_scale()
    }
}

/// Truncation settings shared by every temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumOptions {
    pub rel_tol: f64,
    pub n_max_cap: u64,
}

impl Default for SumOptions {
    fn default() -> Self {
        Self {
            rel_tol: crate::matsubara::DEFAULT_REL_TOL,
            n_max_cap: crate::matsubara::DEFAULT_N_MAX_CAP,
        }
    }
}

impl SumOptions {
    pub fn grid(&self, temperature: f64) -> Result<MatsubaraGrid> {
        MatsubaraGrid::from_temperature(temperature)?
            .with_tolerance(self.rel_tol)?
            .with_cap(self.n_max_cap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoPoint {
    #[serde(rename = "T")]
    pub temperature: f64,
    #[serde(rename = "F")]
    pub free_energy: f64,
    #[serde(rename = "U")]
    pub internal_energy: f64,
    #[serde(rename = "S")]
    pub entropy: f64,
    /// Size below which `entropy` cannot be told apart from zero.
    #[serde(skip)]
    pub entropy_noise: f64,
}

impl ThermoPoint {
    pub fn is_entropy_negative(&self) -> bool {
        self.entropy < -self.entropy_noise
    }
}

/// `F = (beta F)/beta` with `beta F = 1/2 sum_n ln(interaction_factor(zeta_n))`.
pub fn interaction_free_energy(summand: &impl MatsubaraSummand, temperature: f64, opts: &SumOptions) -> Result<f64> {
    let grid = opts.grid(temperature)?;
    Ok(sum_log_terms(summand, &grid)?.value * temperature)
}

/// `U = d(beta F)/d beta`.
pub fn internal_energy(summand: &impl MatsubaraSummand, temperature: f64, opts: &SumOptions) -> Result<f64> {
    Ok(evaluate(summand, temperature, opts)?.internal_energy)
}

/// `S = -dF/dT`.
pub fn entropy(summand: &impl MatsubaraSummand, temperature: f64, opts: &SumOptions) -> Result<f64> {
    Ok(evaluate(summand, temperature, opts)?.entropy)
}

/// `(T, F, U, S)` at one temperature.
pub fn evaluate(summand: &impl MatsubaraSummand, temperature: f64, opts: &SumOptions) -> Result<ThermoPoint> {
    positive("T", temperature)?;
    let grid = opts.grid(temperature)?;
    let centre = sum_log_terms(summand, &grid)?;
    let n = centre.explicit_terms;
    let beta = grid.beta();
    let beta_f = |b: f64| sum_with_cutoff(summand, b, n).map(|o| o.value);
    let free = |t: f64| beta_f(1.0 / t).map(|bf| bf * t);

    let free_energy = centre.value * temperature;

    let (du, _) = richardson(&beta_f, beta, DERIVATIVE_STEP * beta)?;
    let (df, f_mag) = richardson(&free, temperature, DERIVATIVE_STEP * temperature)?;

    let h = DERIVATIVE_STEP * temperature;
    let noise = NOISE_FACTOR * f64::EPSILON * f_mag.max(free_energy.abs()) / h;

    Ok(ThermoPoint {
        temperature,
        free_energy,
        internal_energy: du,
        entropy: -df,
        entropy_noise: noise,
    })
}

/// Central difference at steps `h` and `h/2`, combined to cancel the
/// `O(h^2)` term. Also returns the largest `|f|` seen.
fn richardson(f: &impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<(f64, f64)> {
    let (p1, m1) = (f(x + h)?, f(x - h)?);
    let (p2, m2) = (f(x + h / 2.0)?, f(x - h / 2.0)?);
    let d1 = (p1 - m1) / (2.0 * h);
    let d2 = (p2 - m2) / h;
    let mag = [p1, m1, p2, m2].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(((4.0 * d2 - d1) / 3.0, mag))
}

/// Sampled thermodynamics over a temperature grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermoCurve {
    pub rows: Vec<ThermoPoint>,
    pub intervals: Vec<NegativeEntropyInterval>,
}

/// A temperature range on which `S < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativeEntropyInterval {
    pub t_lo: f64,
    pub t_hi: f64,
    /// The lower end is the first grid point, not a located sign change.
    pub open_lo: bool,
    /// The upper end is the last grid point, not a located sign change.
    pub open_hi: bool,
}

/// Evaluates every temperature (in parallel) and locates negative-entropy intervals.
pub fn sweep<M: MatsubaraSummand>(summand: &M, temperatures: &[f64], opts: &SumOptions) -> Result<ThermoCurve> {
    if let Some(w) = temperatures.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Domain {
            name: "T_grid",
            value: w[1],
            reason: "temperatures must be strictly ascending",
        });
    }
    let rows = temperatures
        .par_iter()
        .map(|&t| {
            evaluate(summand, t, opts).map_err(|e| Error::AtTemperature {
                temperature: t,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let intervals = negative_entropy_intervals(&rows, |t| evaluate(summand, t, opts))?;
    Ok(ThermoCurve { rows, intervals })
}

/// Runs of grid points with `S < 0`, with each interior end refined by
/// bisection on the sign of `S(T)`.
pub fn negative_entropy_intervals(
    rows: &[ThermoPoint],
    entropy_at: impl Fn(f64) -> Result<ThermoPoint>,
) -> Result<Vec<NegativeEntropyInterval>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        if !rows[i].is_entropy_negative() {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < rows.len() && rows[i + 1].is_entropy_negative() {
            i += 1;
        }
        let end = i;
        let (t_lo, open_lo) = if start == 0 {
            (rows[0].temperature, true)
        } else {
            (
                bisect_sign_change(&entropy_at, rows[start - 1].temperature, rows[start].temperature)?,
                false,
            )
        };
        let (t_hi, open_hi) = if end + 1 == rows.len() {
            (rows[end].temperature, true)
        } else {
            (
                bisect_sign_change(&entropy_at, rows[end].temperature, rows[end + 1].temperature)?,
                false,
            )
        };
        out.push(NegativeEntropyInterval {
            t_lo,
            t_hi,
            open_lo,
            open_hi,
        });
        i += 1;
    }
    Ok(out)
}

/// Midpoint of the final bracket between `lo` and `hi`, which have
/// opposite entropy signs.
fn bisect_sign_change(entropy_at: &impl Fn(f64) -> Result<ThermoPoint>, lo: f64, hi: f64) -> Result<f64> {
    let lo_negative = entropy_at(lo)?.is_entropy_negative();
    let (mut a, mut b) = (lo, hi);
    while b - a > INTERVAL_REL_WIDTH * b {
        let mid = 0.5 * (a + b);
        if entropy_at(mid)?.is_entropy_negative() == lo_negative {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// `n` temperatures from `t_min` to `t_max`, log- or linearly spaced.
pub fn temperature_grid(t_min: f64, t_max: f64, points: usize, logarithmic: bool) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![t_min],
        _ => {
            let last = (points - 1) as f64;
            (0..points)
                .map(|i| {
                    let x = i as f64 / last;
                    if i + 1 == points {
                        t_max
                    } else if logarithmic {
                        t_min * (t_max / t_min).powf(x)
                    } else {
                        t_min + (t_max - t_min) * x
                    }
                })
                .collect()
        }
    }
}
