//! Retarded dipole-dipole kernels and the free energy of a polarizable pair.
//!
//! Units `c = 1`, so `tau = zeta r`. The kernel tensor between two dipoles is
//! `psi_D (3 r r - 1) - psi_Delta 1`, which equals minus the free Green's
//! dyadic; its eigenvalues are the longitudinal `2 psi_D - psi_Delta` (once)
//! and transverse `-psi_D - psi_Delta` (twice). The sign of the `psi_Delta`
//! channel is the one that reproduces the Casimir-Polder coefficient
//! `23/(4 pi)`. Contact terms proportional to `delta(r)` are dropped since
//! `r > 0`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::matsubara::MatsubaraSummand;
use crate::model::{d_factors, ModelKind, OscillatorModel};
use crate::thermo::{self, SumOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValues {
    pub psi_dk: f64,
    pub psi_delta: f64,
    /// Along the separation axis.
    pub longitudinal: f64,
    /// Either of the two perpendicular axes.
    pub transverse: f64,
}

/// `psi_D = -(e^-tau / r^3)(1 + tau + tau^2/3)`, `psi_Delta = -(2 e^-tau / 3 r^3) tau^2`.
pub fn kernels(r: f64, zeta: f64) -> Result<KernelValues> {
    positive("r", r)?;
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return Err(Error::Domain {
            name: "zeta",
            value: zeta,
            reason: "must be finite and >= 0",
        });
    }
    let tau = zeta * r;
    let decay = (-tau).exp() / (r * r * r);
    let psi_dk = -decay * (1.0 + tau + tau * tau / 3.0);
    let psi_delta = -decay * 2.0 * tau * tau / 3.0;
    Ok(KernelValues {
        psi_dk,
        psi_delta,
        longitudinal: 2.0 * psi_dk - psi_delta,
        transverse: -psi_dk - psi_delta,
    })
}

/// Two isotropic oscillating dipoles, `alpha_j(zeta) = g_j / (a_j + zeta^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipolePair {
    pub g1: f64,
    pub g2: f64,
    pub a1: f64,
    pub a2: f64,
    pub r: f64,
}

impl DipolePair {
    pub fn new(g1: f64, g2: f64, a1: f64, a2: f64, r: f64) -> Result<Self> {
        for (name, v) in [("g1", g1), ("g2", g2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain {
                    name,
                    value: v,
                    reason: "must be finite and >= 0",
                });
            }
        }
        positive("a1", a1)?;
        positive("a2", a2)?;
        positive("r", r)?;
        let pair = Self { g1, g2, a1, a2, r };
        // |alpha psi| is largest in the static limit
        pair.check_convergent(0.0)?;
        Ok(pair)
    }

    pub fn with_separation(&self, r: f64) -> Result<Self> {
        Self::new(self.g1, self.g2, self.a1, self.a2, r)
    }

    /// `(alpha_1(zeta), alpha_2(zeta))`
    pub fn polarizabilities(&self, zeta: f64) -> (f64, f64) {
        let s = zeta * zeta;
        (self.g1 / (self.a1 + s), self.g2 / (self.a2 + s))
    }

    fn check_convergent(&self, zeta: f64) -> Result<()> {
        let k = kernels(self.r, zeta)?;
        let (al1, al2) = self.polarizabilities(zeta);
        let alpha = (al1 * al2).sqrt();
        let product = alpha * k.longitudinal.abs().max(k.transverse.abs());
        if product >= 1.0 {
            return Err(Error::DipoleUnstable { zeta, product });
        }
        Ok(())
    }
}

impl MatsubaraSummand for DipolePair {
    /// `ln(1 - a1 a2 psi_par^2) + 2 ln(1 - a1 a2 psi_perp^2)`
    fn log_term(&self, zeta: f64) -> Result<f64> {
        let k = kernels(self.r, zeta)?;
        let (al1, al2) = self.polarizabilities(zeta);
        let aa = al1 * al2;
        let par = aa * k.longitudinal * k.longitudinal;
        let perp = aa * k.transverse * k.transverse;
        if par >= 1.0 || perp >= 1.0 {
            return Err(Error::DipoleUnstable {
                zeta,
                product: par.max(perp).sqrt(),
            });
        }
        Ok((-par).ln_1p() + 2.0 * (-perp).ln_1p())
    }

    fn frequency_scale(&self) -> f64 {
        self.a1.sqrt().max(self.a2.sqrt()).max(1.0 / self.r)
    }
}

/// Casimir free energy of the pair at temperature `T > 0`.
pub fn pair_free_energy(pair: &DipolePair, temperature: f64, opts: &SumOptions) -> Result<f64> {
    thermo::interaction_free_energy(pair, temperature, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub points: usize,
    /// `max |alpha_K psi_K - D/(1-D)|` over frequencies and both oscillators.
    pub max_deviation: f64,
    /// `max |psi_K - mediator sum|`, the mode-sum form of the interaction.
    pub max_mode_sum_deviation: f64,
}

/// Checks that the dressed polarizability `1/(A_j (1 - D_j))` times the
/// induced interaction `A_j D_j` reproduces `D_j / (1 - D_j)`, and that
/// `A_j D_j` is the mediator sum `sum c_i^2/A_i` (TM) or
/// `-(zeta^2/a_j) sum c_i^2/A_i` (TE).
pub fn correspondence_check(model: &OscillatorModel, zetas: &[f64]) -> Result<CorrespondenceReport> {
    if !matches!(model.kind(), ModelKind::Tm3 | ModelKind::Te3) {
        return Err(Error::InvalidModel("correspondence check takes tm3 or te3".into()));
    }
    if model.a1() != model.a2() {
        return Err(Error::InvalidModel(
            "correspondence check needs equal oscillators".into(),
        ));
    }
    let mut max_deviation = 0.0f64;
    let mut max_mode_sum_deviation = 0.0f64;
    for &zeta in zetas {
        let q = d_factors(model, zeta)?;
        let s = zeta * zeta;
        let bath: f64 = model.mediators().iter().map(|m| m.c * m.c / (m.a + s)).sum();
        for (a, d) in [(model.a1(), q.d1), (model.a2(), q.d2)] {
            let big_a = a + s;
            let alpha = 1.0 / (big_a * (1.0 - d));
            let psi = big_a * d;
            let scattering = d / (1.0 - d);
            max_deviation = max_deviation.max((alpha * psi - scattering).abs());
            let mode_sum = match model.kind() {
                ModelKind::Te3 => -s * bath / a,
                _ => bath,
            };
            max_mode_sum_deviation = max_mode_sum_deviation.max((psi - mode_sum).abs());
        }
    }
    Ok(CorrespondenceReport {
        points: zetas.len(),
        max_deviation,
        max_mode_sum_deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DyadicReport {
    /// Largest componentwise deviation, in units of `1/r^3`.
    pub max_deviation: f64,
}

/// Free Green's dyadic at imaginary frequency,
/// `[(3 rr - 1)(1 + |zeta| r + zeta^2 r^2/3) - (2/3) zeta^2 r^2 1] e^{-|zeta| r} / r^3`.
pub fn green_dyadic(direction: &Vector3<f64>, r: f64, zeta: f64) -> Matrix3<f64> {
    let u = direction.normalize();
    let x = zeta.abs() * r;
    let rr = u * u.transpose();
    let decay = (-x).exp() / (r * r * r);
    ((rr * 3.0 - Matrix3::identity()) * (1.0 + x + x * x / 3.0) - Matrix3::identity() * (2.0 / 3.0 * x * x)) * decay
}

/// The dipole kernel tensor `psi_D (3 rr - 1) - psi_Delta 1`.
pub fn kernel_tensor(direction: &Vector3<f64>, r: f64, zeta: f64) -> Result<Matrix3<f64>> {
    let k = kernels(r, zeta)?;
    let u = direction.normalize();
    let rr = u * u.transpose();
    Ok((rr * 3.0 - Matrix3::identity()) * k.psi_dk - Matrix3::identity() * k.psi_delta)
}

/// Compares the closed-form Green's dyadic with the kernel tensor. The two
/// agree with overall factor -1: `kernel = -Gamma_0`. Checks the full 3x3
/// tensor along an oblique axis and the longitudinal/transverse eigenvalues.
pub fn dyadic_decomposition_check(r: f64, zeta: f64) -> Result<DyadicReport> {
    let k = kernels(r, zeta)?;
    let scale = r * r * r;
    let direction = Vector3::new(1.0, 2.0, 2.0);
    let gamma = green_dyadic(&direction, r, zeta);
    let tensor = kernel_tensor(&direction, r, zeta)?;
    let mut max_deviation = (tensor + gamma).abs().max() * scale;

    let u = direction.normalize();
    // a unit vector perpendicular to u
    let t = Vector3::new(2.0, -1.0, 0.0).normalize();
    let gamma_par = u.dot(&(gamma * u));
    let gamma_perp = t.dot(&(gamma * t));
    max_deviation = max_deviation
        .max((k.longitudinal + gamma_par).abs() * scale)
        .max((k.transverse + gamma_perp).abs() * scale);
    Ok(DyadicReport { max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_examples() {
        let k = kernels(2.0, 0.0).unwrap();
        assert_eq!(k.psi_dk, -0.125);
        assert_eq!(k.psi_delta, 0.0);
        assert_eq!(k.longitudinal, -0.25);
        assert_eq!(k.transverse, 0.125);

        let k = kernels(1.0, 1.0).unwrap();
        assert_relative_eq!(k.psi_dk, -0.858_385_362_733_365_4, max_relative = 1e-14);
        assert_relative_eq!(k.psi_delta, -0.245_252_960_780_961_55, max_relative = 1e-14);

        // e^-50 (1 + 50 + 2500/3) ~ 1.7e-19
        let k = kernels(1.0, 50.0).unwrap();
        assert!(k.psi_dk.abs() < 2e-19 && k.psi_delta.abs() < 4e-19);
        let k = kernels(1.0, 60.0).unwrap();
        assert!(k.psi_dk.abs() < 1e-20 && k.psi_delta.abs() < 1e-20);
    }

    #[test]
    fn kernel_domain() {
        assert!(kernels(0.0, 1.0).is_err());
        assert!(kernels(-1.0, 1.0).is_err());
        assert!(kernels(1.0, -0.5).is_err());
    }

    #[test]
    fn static_term_of_a_pair() {
        let pair = DipolePair::new(0.1, 0.1, 1.0, 1.0, 2.0).unwrap();
        let k = kernels(2.0, 0.0).unwrap();
        let aa = 0.01;
        let longitudinal = 0.5 * (-(aa * k.longitudinal * k.longitudinal)).ln_1p();
        assert_relative_eq!(longitudinal, -3.125_976_969_591_872e-4, max_relative = 1e-12);
        let full = 0.5 * pair.log_term(0.0).unwrap();
        let transverse = (-(aa * 0.125 * 0.125)).ln_1p();
        assert_relative_eq!(full, longitudinal + transverse, max_relative = 1e-14);
    }

    #[test]
    fn free_energy_is_negative_and_vanishes_without_coupling() {
        let opts = SumOptions::default();
        let pair = DipolePair::new(1.0, 0.5, 1.0, 2.0, 3.0).unwrap();
        assert!(pair_free_energy(&pair, 0.2, &opts).unwrap() < 0.0);
        let silent = DipolePair::new(0.0, 1.0, 1.0, 1.0, 3.0).unwrap();
        assert_eq!(pair_free_energy(&silent, 0.2, &opts).unwrap(), 0.0);
    }

    #[test]
    fn retarded_limit_has_casimir_polder_coefficient() {
        // alpha(0) = 1; r >> 1/sqrt(a) and r << 1/(2 pi T)
        let r = 100.0;
        let pair = DipolePair::new(1.0, 1.0, 1.0, 1.0, r).unwrap();
        let f = pair_free_energy(&pair, 1e-5, &SumOptions::default()).unwrap();
        let casimir_polder = -23.0 / (4.0 * std::f64::consts::PI * r.powi(7));
        assert_relative_eq!(f, casimir_polder, max_relative = 1e-2);
    }

    #[test]
    fn unstable_pair_is_rejected() {
        assert!(matches!(
            DipolePair::new(10.0, 10.0, 1.0, 1.0, 1.0),
            Err(Error::DipoleUnstable { .. })
        ));
    }

    #[test]
    fn correspondence_examples() {
        let tm = OscillatorModel::tm3(1.0, 1.0, 1.0, 0.3).unwrap();
        let q = d_factors(&tm, 1.0).unwrap();
        assert_relative_eq!(q.d1 / (1.0 - q.d1), 0.023_017_902_813_299_23, max_relative = 1e-14);
        let te = OscillatorModel::te3(1.0, 1.0, 1.0, 0.3).unwrap();
        let q = d_factors(&te, 1.0).unwrap();
        assert_relative_eq!(q.d1 / (1.0 - q.d1), -0.022_004_889_975_550_12, max_relative = 1e-14);

        let grid: Vec<f64> = (0..=100).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 100.0)).collect();
        for model in [tm, te] {
            let report = correspondence_check(&model, &grid).unwrap();
            assert!(report.max_deviation < 1e-14);
            assert!(report.max_mode_sum_deviation < 1e-14);
        }
        let uncoupled = OscillatorModel::tm3(1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(
            correspondence_check(&uncoupled, &[0.0, 1.0]).unwrap().max_deviation,
            0.0
        );
    }

    #[test]
    fn correspondence_requires_equal_oscillators() {
        let model = OscillatorModel::tm3(1.0, 2.0, 1.0, 0.3).unwrap();
        assert!(correspondence_check(&model, &[1.0]).is_err());
    }

    #[test]
    fn dyadic_examples() {
        // static transverse: kernel 1/r^3, dyadic -1/r^3
        let r = 1.7;
        let g = green_dyadic(&Vector3::z(), r, 0.0);
        assert_relative_eq!(g[(0, 0)], -1.0 / r.powi(3), max_relative = 1e-14);
        assert_relative_eq!(
            kernels(r, 0.0).unwrap().transverse,
            1.0 / r.powi(3),
            max_relative = 1e-14
        );

        let dev = dyadic_decomposition_check(1.0, 1.0).unwrap().max_deviation;
        assert!(dev < 1e-14, "{dev}");
        let far = green_dyadic(&Vector3::x(), 1.0, 60.0);
        assert!(far.abs().max() < 1e-20);
        assert!(kernel_tensor(&Vector3::x(), 1.0, 60.0).unwrap().abs().max() < 1e-20);
    }
}
