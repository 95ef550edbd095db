//! Exact normal-mode spectra and mode-sum free energies.
//!
//! This is the ground truth the Matsubara sums are checked against. TM
//! spectra come from the symmetric stiffness matrix. TE spectra are the
//! roots in `s = zeta^2 = -omega^2` of the characteristic polynomial,
//! assembled from linear factors `(a_i + s)` and found through the
//! companion matrix.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelKind, OscillatorModel, Polarization};
use crate::poly::Poly;

/// Imaginary-part tolerance for accepting polynomial roots as real.
const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSpectrum {
    pub kind: ModelKind,
    /// Eigenfrequencies of the coupled system, ascending.
    pub coupled: Vec<f64>,
    /// Uncoupled frequencies `sqrt(a_i)`, ascending.
    pub reference: Vec<f64>,
}

/// Which oscillators are kept when a subsystem spectrum is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Full,
    FirstOnly,
    SecondOnly,
    MediatorsOnly,
}

/// Spectra of the full model and of the three subsystems needed to isolate
/// the induced interaction: `F_12m - F_1m - F_2m + F_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsystemSpectra {
    pub full: ModeSpectrum,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub mediators: Vec<f64>,
}

pub fn mode_spectrum(model: &OscillatorModel) -> Result<ModeSpectrum> {
    let coupled = frequencies(model, Subsystem::Full)?;
    let mut reference: Vec<f64> = [model.a1(), model.a2()]
        .into_iter()
        .chain(model.mediators().iter().map(|m| m.a))
        .map(f64::sqrt)
        .collect();
    reference.sort_by(f64::total_cmp);
    Ok(ModeSpectrum {
        kind: model.kind(),
        coupled,
        reference,
    })
}

pub fn subsystem_spectra(model: &OscillatorModel) -> Result<SubsystemSpectra> {
    Ok(SubsystemSpectra {
        full: mode_spectrum(model)?,
        first: frequencies(model, Subsystem::FirstOnly)?,
        second: frequencies(model, Subsystem::SecondOnly)?,
        mediators: frequencies(model, Subsystem::MediatorsOnly)?,
    })
}

/// Eigenfrequencies of a subsystem; fails if any squared frequency is not positive.
pub fn frequencies(model: &OscillatorModel, subsystem: Subsystem) -> Result<Vec<f64>> {
    let squared = squared_frequencies(model, subsystem)?;
    if let Some(&root) = squared.iter().find(|&&w2| w2 <= 0.0) {
        return Err(Error::Unstable { root });
    }
    Ok(squared.into_iter().map(f64::sqrt).collect())
}

/// Squared eigenfrequencies, ascending, without any sign check.
pub fn squared_frequencies(model: &OscillatorModel, subsystem: Subsystem) -> Result<Vec<f64>> {
    let mut w2 = match model.polarization() {
        Polarization::Tm => tm_squared_frequencies(model, subsystem),
        Polarization::Te => te_squared_frequencies(model, subsystem)?,
    };
    w2.sort_by(f64::total_cmp);
    Ok(w2)
}

fn kept_primaries(subsystem: Subsystem) -> &'static [usize] {
    match subsystem {
        Subsystem::Full => &[0, 1],
        Subsystem::FirstOnly => &[0],
        Subsystem::SecondOnly => &[1],
        Subsystem::MediatorsOnly => &[],
    }
}

fn tm_squared_frequencies(model: &OscillatorModel, subsystem: Subsystem) -> Vec<f64> {
    let full = model.stiffness_matrix();
    let keep: Vec<usize> = kept_primaries(subsystem)
        .iter()
        .copied()
        .chain(2..model.dimension())
        .collect();
    let sub = full.select_rows(&keep).select_columns(&keep);
    SymmetricEigen::new(sub).eigenvalues.iter().copied().collect()
}

/// TE roots. Structural degeneracies are split off exactly before the
/// companion step: mediators sharing a squared frequency act as one mediator
/// with the pooled `sum c^2` plus decoupled copies, uncoupled mediators are
/// free, and equal primaries carry a free antisymmetric mode.
fn te_squared_frequencies(model: &OscillatorModel, subsystem: Subsystem) -> Result<Vec<f64>> {
    let mut free: Vec<f64> = Vec::new();

    // (a, sum of c^2) per distinct mediator frequency
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    for m in model.mediators() {
        match pooled.iter_mut().find(|(a, _)| *a == m.a) {
            Some(entry) => {
                entry.1 += m.c * m.c;
                free.push(m.a);
            }
            None => pooled.push((m.a, m.c * m.c)),
        }
    }
    let mut coupled_meds = Vec::with_capacity(pooled.len());
    for (a, c2) in pooled {
        if c2 == 0.0 {
            free.push(a);
        } else {
            coupled_meds.push((a, c2));
        }
    }

    let primaries: Vec<f64> = kept_primaries(subsystem)
        .iter()
        .map(|&j| if j == 0 { model.a1() } else { model.a2() })
        .collect();

    // Q(s) = P(s) * prod A_i + s * W(s) * sum_i c_i^2 prod_{l != i} A_l,
    // P = product of primary responses, W = sum_j (prod_{j' != j} A_j') / a_j.
    let (prim_prod, weight) = match primaries.as_slice() {
        [] => (Poly::constant(1.0), Poly::constant(0.0)),
        [a] => (Poly::linear(*a), Poly::constant(1.0 / a)),
        [a1, a2] if a1 == a2 => {
            free.push(*a1);
            (Poly::linear(*a1), Poly::constant(2.0 / a1))
        }
        [a1, a2] => (
            Poly::linear(*a1).mul(&Poly::linear(*a2)),
            Poly::linear(*a2)
                .scale(1.0 / a1)
                .add(&Poly::linear(*a1).scale(1.0 / a2)),
        ),
        _ => unreachable!("at most two primaries"),
    };

    let meds_prod = Poly::from_linear_factors(coupled_meds.iter().map(|(a, _)| *a));
    let mut coupling = Poly::constant(0.0);
    for (i, (_, c2)) in coupled_meds.iter().enumerate() {
        let others = Poly::from_linear_factors(
            coupled_meds
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != i)
                .map(|(_, (a, _))| *a),
        );
        coupling = coupling.add(&others.scale(*c2));
    }
    let s_poly = Poly::new(vec![0.0, 1.0]);
    let q = prim_prod.mul(&meds_prod).add(&s_poly.mul(&weight).mul(&coupling));

    let mut w2: Vec<f64> = q.real_roots(IMAG_TOL)?.into_iter().map(|s| -s).collect();
    w2.extend(free);
    Ok(w2)
}

/// Quantum free energy of independent modes,
/// `sum_k [omega_k/2 + T ln(1 - exp(-omega_k/T))]`; zero-point sum at `T = 0`.
pub fn exact_free_energy(omegas: &[f64], temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    let mut total = 0.0;
    for &w in omegas {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::Domain {
                name: "omega",
                value: w,
                reason: "mode frequencies must be positive",
            });
        }
        total += w / 2.0;
        if temperature > 0.0 {
            total += temperature * (-(-w / temperature).exp_m1()).ln();
        }
    }
    Ok(total)
}

/// Classical free energy `sum_k T ln(omega_k / T)` (one classical
/// oscillator per mode, `hbar = 1`).
pub fn classical_free_energy(omegas: &[f64], temperature: f64) -> Result<f64> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Domain {
            name: "T",
            value: temperature,
            reason: "classical limit needs T > 0",
        });
    }
    Ok(omegas.iter().map(|w| temperature * (w / temperature).ln()).sum())
}

fn check_temperature(temperature: f64) -> Result<()> {
    if temperature >= 0.0 && temperature.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "T",
            value: temperature,
            reason: "must be finite and >= 0",
        })
    }
}

/// Induced interaction free energy from exact mode sums,
/// `F(1,2,m) - F(1,m) - F(2,m) + F(m)`. This is the quantity whose Matsubara
/// form is half the sum of `ln(interaction_factor)`.
///
/// Once every `omega / T` is at most one, the four sums cancel to many
/// digits, so the combination is instead expanded in even powers of
/// `omega / T` and each order is cancelled through exact power sums of the
/// squared frequencies.
pub fn oracle_interaction_free_energy(spectra: &SubsystemSpectra, temperature: f64) -> Result<f64> {
    let w_max = spectra.full.coupled.last().copied().unwrap_or(0.0);
    if temperature > 0.0 && w_max <= temperature {
        return high_temperature_interaction(spectra, temperature);
    }
    Ok(exact_free_energy(&spectra.full.coupled, temperature)?
        - exact_free_energy(&spectra.first, temperature)?
        - exact_free_energy(&spectra.second, temperature)?
        + exact_free_energy(&spectra.mediators, temperature)?)
}

/// Taylor coefficients of `ln(sinh(x/2) / (x/2))` in `x^2k`,
/// `B_2k / (2k (2k)!)`, k = 1..16.
const LN_SINHC_COEFFS: [f64; 16] = [
    0.041666666666666664,
    -0.00034722222222222224,
    5.5114638447971785e-06,
    -1.033399470899471e-07,
    2.08767569878681e-09,
    -4.403491782239578e-11,
    9.55895466477477e-13,
    -2.1185501852016142e-14,
    4.770034475709914e-16,
    -1.087434349279031e-17,
    2.5040921947091955e-19,
    -5.814360285755218e-21,
    1.3595027075497952e-22,
    -3.1976847953705525e-24,
    7.559841507792277e-26,
    -1.7952470840225633e-27,
];

/// Per mode, `F = T ln(omega / T) + T ln(sinh(x/2) / (x/2))` with
/// `x = omega / T`. The logarithms combine into half the log of the static
/// determinant ratio, which is exactly one for TE coupling. The `x^2` order
/// is skipped: its power sum is a signed sum of stiffness traces, which
/// cancel identically, and eigenvalue roundoff there would dominate.
fn high_temperature_interaction(spectra: &SubsystemSpectra, temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    let signed: [(f64, &[f64]); 4] = [
        (1.0, &spectra.full.coupled),
        (-1.0, &spectra.first),
        (-1.0, &spectra.second),
        (1.0, &spectra.mediators),
    ];
    let log_det_ratio = match spectra.full.kind.polarization() {
        Polarization::Te => 0.0,
        Polarization::Tm => signed
            .iter()
            .map(|(sign, ws)| sign * ws.iter().map(|w| 2.0 * w.ln()).sum::<f64>())
            .sum(),
    };
    let inv_t2 = 1.0 / (temperature * temperature);
    let mut series = 0.0;
    for (k, b) in LN_SINHC_COEFFS.iter().enumerate().skip(1) {
        let power_sum: f64 = signed
            .iter()
            .map(|(sign, ws)| sign * ws.iter().map(|w| (w * w * inv_t2).powi(k as i32 + 1)).sum::<f64>())
            .sum();
        series += b * power_sum;
    }
    Ok(temperature * (0.5 * log_det_ratio + series))
}

/// Total coupling free energy, coupled minus uncoupled mode sums. Unlike
/// [`oracle_interaction_free_energy`] this includes each primary's
/// self-interaction through the mediators.
pub fn oracle_coupling_free_energy(spectrum: &ModeSpectrum, temperature: f64) -> Result<f64> {
    Ok(exact_free_energy(&spectrum.coupled, temperature)? - exact_free_energy(&spectrum.reference, temperature)?)
}

/// Classical counterpart of [`oracle_interaction_free_energy`].
pub fn classical_interaction_free_energy(spectra: &SubsystemSpectra, temperature: f64) -> Result<f64> {
    Ok(classical_free_energy(&spectra.full.coupled, temperature)?
        - classical_free_energy(&spectra.first, temperature)?
        - classical_free_energy(&spectra.second, temperature)?
        + classical_free_energy(&spectra.mediators, temperature)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{q_determinant_direct, Mediator};
    use approx::assert_relative_eq;

    #[test]
    fn tm3_spectrum_matches_antisymmetric_mode_analysis() {
        let model = OscillatorModel::tm3(1.0, 1.0, 1.0, 0.3).unwrap();
        let spec = mode_spectrum(&model).unwrap();
        let w2: Vec<f64> = spec.coupled.iter().map(|w| w * w).collect();
        let root2 = 2f64.sqrt();
        for (got, want) in w2.iter().zip([1.0 - 0.3 * root2, 1.0, 1.0 + 0.3 * root2]) {
            assert_relative_eq!(*got, want, max_relative = 1e-14);
        }
        assert_eq!(spec.reference, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn te3_spectrum_roots_and_vieta() {
        let model = OscillatorModel::te3(1.0, 1.0, 1.0, 0.3).unwrap();
        let w2: Vec<f64> = mode_spectrum(&model).unwrap().coupled.iter().map(|w| w * w).collect();
        // (1+s)(s^2 + 2.18 s + 1)
        let expected = [0.656_295_031_155_971_2, 1.0, 1.523_704_968_844_028_8];
        for (got, want) in w2.iter().zip(expected) {
            assert_relative_eq!(*got, want, max_relative = 1e-13);
        }
        let product: f64 = w2.iter().product();
        assert_relative_eq!(product, q_determinant_direct(&model, 0.0), max_relative = 1e-12);
    }

    #[test]
    fn uncoupled_spectrum_equals_reference() {
        for pol in [Polarization::Tm, Polarization::Te] {
            let model = OscillatorModel::bath(
                pol,
                1.0,
                1.0,
                vec![
                    Mediator::new(1.0, 0.0),
                    Mediator::new(2.0, 0.0),
                    Mediator::new(2.0, 0.0),
                ],
            )
            .unwrap();
            let spec = mode_spectrum(&model).unwrap();
            for (c, r) in spec.coupled.iter().zip(&spec.reference) {
                assert_relative_eq!(*c, *r, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn te_degenerate_mediators_split_exactly() {
        let model = OscillatorModel::bath(
            Polarization::Te,
            0.8,
            1.4,
            vec![
                Mediator::new(2.0, 0.3),
                Mediator::new(2.0, 0.4),
                Mediator::new(3.0, 0.2),
            ],
        )
        .unwrap();
        let w2 = squared_frequencies(&model, Subsystem::Full).unwrap();
        let via_matrix = SymmetricEigen::new(model.stiffness_matrix()).eigenvalues;
        let mut via_matrix: Vec<f64> = via_matrix.iter().copied().collect();
        via_matrix.sort_by(f64::total_cmp);
        for (a, b) in w2.iter().zip(&via_matrix) {
            assert_relative_eq!(*a, *b, max_relative = 1e-12);
        }
    }

    #[test]
    fn unstable_tm3_names_negative_root() {
        let model = OscillatorModel::tm3(1.0, 1.0, 1.0, 0.8).unwrap();
        match mode_spectrum(&model) {
            Err(Error::Unstable { root }) => assert!(root < 0.0),
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn exact_free_energy_examples() {
        assert_eq!(exact_free_energy(&[1.0], 0.0).unwrap(), 0.5);
        // 2 ln(2 sinh(1/2)); series check below
        let f = exact_free_energy(&[1.0, 1.0], 1.0).unwrap();
        assert_relative_eq!(f, 0.082_649_709_225_836_22, max_relative = 1e-14);
        let sinh_series: f64 = (0..12)
            .map(|k| 0.5f64.powi(2 * k + 1) / (1..=(2 * k + 1)).map(f64::from).product::<f64>())
            .sum();
        assert_relative_eq!(f, 2.0 * (2.0 * sinh_series).ln(), max_relative = 1e-14);
    }

    #[test]
    fn exact_free_energy_high_temperature_is_classical() {
        let t = 1e4;
        let f = exact_free_energy(&[1.0], t).unwrap();
        // T ln(w/T) + O(w^2/T)
        assert_relative_eq!(f, -t * t.ln(), max_relative = 1e-8);
    }

    #[test]
    fn exact_free_energy_rejects_bad_input() {
        assert!(exact_free_energy(&[1.0], -1.0).is_err());
        assert!(exact_free_energy(&[0.0], 1.0).is_err());
    }

    #[test]
    fn coupling_free_energy_at_zero_temperature() {
        let model = OscillatorModel::tm3(1.0, 1.0, 1.0, 0.3).unwrap();
        let spectra = subsystem_spectra(&model).unwrap();
        let total = oracle_coupling_free_energy(&spectra.full, 0.0).unwrap();
        assert_relative_eq!(total, -0.023_901_000_458_011_52, max_relative = 1e-12);
        let induced = oracle_interaction_free_energy(&spectra, 0.0).unwrap();
        assert_relative_eq!(induced, -7.364_520_912_250_448e-4, max_relative = 1e-10);
    }

    #[test]
    fn uncoupled_interaction_vanishes() {
        let model = OscillatorModel::te3(1.0, 2.0, 3.0, 0.0).unwrap();
        let spectra = subsystem_spectra(&model).unwrap();
        for t in [0.0, 0.5, 10.0] {
            let f = oracle_interaction_free_energy(&spectra, t).unwrap();
            assert!(f.abs() < 1e-14 * t.max(1.0), "{f}");
        }
    }

    #[test]
    fn te_classical_interaction_vanishes() {
        let model = OscillatorModel::te3(1.0, 1.3, 0.9, 0.4).unwrap();
        let spectra = subsystem_spectra(&model).unwrap();
        let f = oracle_interaction_free_energy(&spectra, 1e3).unwrap();
        assert!(f.abs() < 1e-6, "{f}");
        let classical = classical_interaction_free_energy(&spectra, 1e3).unwrap();
        assert!(classical.abs() < 1e-13 * 1e3, "{classical}");
    }

    #[test]
    fn high_temperature_branch_survives_cancellation() {
        // reference from a 60-digit mode sum
        let spectra = subsystem_spectra(&OscillatorModel::te3(1.0, 1.0, 1.0, 0.1).unwrap()).unwrap();
        let f = oracle_interaction_free_energy(&spectra, 50.0).unwrap();
        assert_relative_eq!(f, -5.55534286249743e-13, max_relative = 1e-12);
    }

    #[test]
    fn high_temperature_branch_is_continuous() {
        for model in [
            OscillatorModel::tm3(1.0, 1.5, 0.8, 0.3).unwrap(),
            OscillatorModel::te3(1.0, 1.5, 0.8, 0.3).unwrap(),
        ] {
            let spectra = subsystem_spectra(&model).unwrap();
            let t = *spectra.full.coupled.last().unwrap();
            let series = high_temperature_interaction(&spectra, t).unwrap();
            let direct = exact_free_energy(&spectra.full.coupled, t).unwrap()
                - exact_free_energy(&spectra.first, t).unwrap()
                - exact_free_energy(&spectra.second, t).unwrap()
                + exact_free_energy(&spectra.mediators, t).unwrap();
            assert_relative_eq!(series, direct, max_relative = 1e-9);
        }
    }
}
