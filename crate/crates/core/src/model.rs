//! Oscillator models and the per-frequency interaction algebra.
//!
//! Two primary oscillators (squared frequencies `a1`, `a2`) never touch
//! directly; they couple through one or more mediating oscillators with
//! shared couplings `c_i`. In the coordinate-coupled (TM) variant the
//! interaction is `c_i x_j x_i`. In the momentum-coupled (TE) variant the
//! primaries are written in the momentum representation, which adds the
//! `c_i c_l / a_j` block to the mediator stiffness.
//!
//! Everything here is a pure function of the model and an imaginary
//! frequency `zeta`; units have `hbar = k_B = m = 1`.

use std::ops::Deref;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result};
use crate::spectrum::{self, SubsystemSpectra};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Tm3,
    Te3,
    TmBath,
    TeBath,
}

/// Coupling type of the primaries to the mediators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    /// Coordinate coupling.
    Tm,
    /// Momentum coupling.
    Te,
}

impl ModelKind {
    pub fn polarization(self) -> Polarization {
        match self {
            ModelKind::Tm3 | ModelKind::TmBath => Polarization::Tm,
            ModelKind::Te3 | ModelKind::TeBath => Polarization::Te,
        }
    }

    pub fn is_bath(self) -> bool {
        matches!(self, ModelKind::TmBath | ModelKind::TeBath)
    }

    pub fn bath(polarization: Polarization) -> Self {
        match polarization {
            Polarization::Tm => ModelKind::TmBath,
            Polarization::Te => ModelKind::TeBath,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Tm3 => "tm3",
            ModelKind::Te3 => "te3",
            ModelKind::TmBath => "tm_bath",
            ModelKind::TeBath => "te_bath",
        }
    }
}

/// A mediating oscillator: squared frequency and coupling to both primaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mediator {
    pub a: f64,
    pub c: f64,
}

impl Mediator {
    pub fn new(a: f64, c: f64) -> Self {
        Self { a, c }
    }
}

/// A structurally well-formed oscillator model.
///
/// Construction checks positivity and mediator counts only; use
/// [`validate_stability`] to obtain a [`StableModel`] for thermodynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorModel {
    kind: ModelKind,
    a1: f64,
    a2: f64,
    mediators: Vec<Mediator>,
}

impl OscillatorModel {
    pub fn new(kind: ModelKind, a1: f64, a2: f64, mediators: Vec<Mediator>) -> Result<Self> {
        positive("a1", a1)?;
        positive("a2", a2)?;
        if mediators.is_empty() {
            return Err(Error::InvalidModel("mediator list is empty".into()));
        }
        if !kind.is_bath() && mediators.len() != 1 {
            return Err(Error::InvalidModel(format!(
                "{} takes exactly one mediator, got {}",
                kind.name(),
                mediators.len()
            )));
        }
        for m in &mediators {
            positive("mediator a", m.a)?;
            finite("mediator c", m.c)?;
        }
        Ok(Self {
            kind,
            a1,
            a2,
            mediators,
        })
    }

    pub fn tm3(a1: f64, a2: f64, a3: f64, c: f64) -> Result<Self> {
        Self::new(ModelKind::Tm3, a1, a2, vec![Mediator::new(a3, c)])
    }

    pub fn te3(a1: f64, a2: f64, a3: f64, c: f64) -> Result<Self> {
        Self::new(ModelKind::Te3, a1, a2, vec![Mediator::new(a3, c)])
    }

    pub fn bath(polarization: Polarization, a1: f64, a2: f64, mediators: Vec<Mediator>) -> Result<Self> {
        Self::new(ModelKind::bath(polarization), a1, a2, mediators)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn polarization(&self) -> Polarization {
        self.kind.polarization()
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn mediators(&self) -> &[Mediator] {
        &self.mediators
    }

    /// Number of oscillators, `2 + M`.
    pub fn dimension(&self) -> usize {
        2 + self.mediators.len()
    }

    pub fn is_uncoupled(&self) -> bool {
        self.mediators.iter().all(|m| m.c == 0.0)
    }

    /// `mu = 1/a1 + 1/a2`, the weight of the mediator-mediator block in the TE model.
    pub(crate) fn te_mu(&self) -> f64 {
        1.0 / self.a1 + 1.0 / self.a2
    }

    /// Static (`zeta = 0`) stiffness matrix. The direct determinant at `zeta`
    /// is `det(K + zeta^2 I)`.
    ///
    /// Index 0 and 1 are the primaries, 2.. the mediators.
    pub fn stiffness_matrix(&self) -> DMatrix<f64> {
        let n = self.dimension();
        let mut k = DMatrix::zeros(n, n);
        k[(0, 0)] = self.a1;
        k[(1, 1)] = self.a2;
        let mu = match self.polarization() {
            Polarization::Tm => 0.0,
            Polarization::Te => self.te_mu(),
        };
        for (i, mi) in self.mediators.iter().enumerate() {
            let ii = 2 + i;
            k[(0, ii)] = mi.c;
            k[(ii, 0)] = mi.c;
            k[(1, ii)] = mi.c;
            k[(ii, 1)] = mi.c;
            k[(ii, ii)] = mi.a;
            for (l, ml) in self.mediators.iter().enumerate() {
                k[(ii, 2 + l)] += mi.c * ml.c * mu;
            }
        }
        k
    }

    /// Largest squared frequency scale, a Gershgorin bound on the stiffness
    /// matrix. Used to place Matsubara cutoffs.
    pub fn frequency_scale(&self) -> f64 {
        let k = self.stiffness_matrix();
        let bound = k
            .row_iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| if i == j { *v } else { v.abs() })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        bound.sqrt()
    }
}

/// `A = a + zeta^2` at one imaginary frequency.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ResponseFactor(f64);

impl ResponseFactor {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn response_factor(a: f64, zeta: f64) -> Result<ResponseFactor> {
    finite("a", a)?;
    finite("zeta", zeta)?;
    Ok(ResponseFactor(a + zeta * zeta))
}

/// Per-frequency interaction data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionQuantities {
    pub d1: f64,
    pub d2: f64,
    /// `1 - D1 D2 / ((1 - D1)(1 - D2))`
    pub interaction_factor: f64,
    /// `(1 - D1, 1 - D2)`
    pub self_factors: (f64, f64),
}

impl InteractionQuantities {
    /// Scattering amplitudes `t_j = D_j / (1 - D_j)`.
    pub fn scattering(&self) -> (f64, f64) {
        (self.d1 / self.self_factors.0, self.d2 / self.self_factors.1)
    }

    /// `ln(interaction_factor)` without cancellation for weak coupling.
    pub fn log_interaction_factor(&self) -> f64 {
        let (t1, t2) = self.scattering();
        // + 0.0 turns the -0.0 of an exactly vanishing product into +0.0
        (-(t1 * t2)).ln_1p() + 0.0
    }
}

/// `D_1`, `D_2` and the interaction factor of the model at `zeta`.
///
/// TM: `D_j = (1/A_j) sum_i c_i^2/A_i`.
/// TE: `D_j = -(zeta^2/(a_j A_j)) sum_i c_i^2/A_i`, which vanishes at `zeta = 0`.
pub fn d_factors(model: &OscillatorModel, zeta: f64) -> Result<InteractionQuantities> {
    finite("zeta", zeta)?;
    let s = zeta * zeta;
    let bath_sum: f64 = model.mediators.iter().map(|m| m.c * m.c / (m.a + s)).sum();
    let big_a1 = model.a1 + s;
    let big_a2 = model.a2 + s;
    let (d1, d2) = match model.polarization() {
        Polarization::Tm => (bath_sum / big_a1, bath_sum / big_a2),
        // `+ 0.0` maps the -0.0 of the zero mode to +0.0.
        Polarization::Te => (
            -(s * bath_sum) / (model.a1 * big_a1) + 0.0,
            -(s * bath_sum) / (model.a2 * big_a2) + 0.0,
        ),
    };
    for (index, d) in [(1, d1), (2, d2)] {
        if d == 1.0 {
            return Err(Error::SingularSelfFactor { index, zeta });
        }
    }
    let self_factors = (1.0 - d1, 1.0 - d2);
    let interaction_factor = 1.0 - d1 * d2 / (self_factors.0 * self_factors.1);
    Ok(InteractionQuantities {
        d1,
        d2,
        interaction_factor,
        self_factors,
    })
}

/// `1 - t1 t2` with `t_j = D_j/(1 - D_j)`; the multiple-scattering form of
/// the interaction factor.
pub fn scattering_form_factor(d1: f64, d2: f64) -> Result<f64> {
    for (index, d) in [(1, d1), (2, d2)] {
        if d == 1.0 {
            return Err(Error::SingularSelfFactor { index, zeta: f64::NAN });
        }
    }
    let t1 = d1 / (1.0 - d1);
    let t2 = d2 / (1.0 - d2);
    Ok(1.0 - t1 * t2)
}

/// Full `(2+M) x (2+M)` determinant `det(K + zeta^2 I)`, evaluated without
/// using the factorized form. Cofactor expansion up to 8x8 (M <= 6), LU above.
pub fn q_determinant_direct(model: &OscillatorModel, zeta: f64) -> f64 {
    let mut m = model.stiffness_matrix();
    let s = zeta * zeta;
    for i in 0..m.nrows() {
        m[(i, i)] += s;
    }
    if m.nrows() <= 8 {
        cofactor_determinant(&m)
    } else {
        m.lu().determinant()
    }
}

/// `A1 A2 (1-D1)(1-D2) * interaction_factor * prod_i A_i`.
pub fn q_determinant_factored(model: &OscillatorModel, zeta: f64) -> Result<f64> {
    let q = d_factors(model, zeta)?;
    let s = zeta * zeta;
    let bath: f64 = model.mediators.iter().map(|m| m.a + s).product();
    Ok((model.a1 + s) * (model.a2 + s) * q.self_factors.0 * q.self_factors.1 * q.interaction_factor * bath)
}

fn cofactor_determinant(m: &DMatrix<f64>) -> f64 {
    let cols: Vec<usize> = (0..m.ncols()).collect();
    laplace(m, 0, &cols)
}

fn laplace(m: &DMatrix<f64>, row: usize, cols: &[usize]) -> f64 {
    match cols.len() {
        0 => 1.0,
        1 => m[(row, cols[0])],
        2 => m[(row, cols[0])] * m[(row + 1, cols[1])] - m[(row, cols[1])] * m[(row + 1, cols[0])],
        _ => {
            let mut total = 0.0;
            let mut sign = 1.0;
            let mut rest = Vec::with_capacity(cols.len() - 1);
            for (k, &col) in cols.iter().enumerate() {
                let entry = m[(row, col)];
                if entry != 0.0 {
                    rest.clear();
                    rest.extend(cols.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, c)| *c));
                    total += sign * entry * laplace(m, row + 1, &rest);
                }
                sign = -sign;
            }
            total
        }
    }
}

/// A model whose coupled spectrum is strictly positive. Carries the exact
/// spectra of the full system and of its subsystems.
#[derive(Debug, Clone)]
pub struct StableModel {
    model: OscillatorModel,
    spectra: SubsystemSpectra,
}

impl StableModel {
    pub fn model(&self) -> &OscillatorModel {
        &self.model
    }

    pub fn spectra(&self) -> &SubsystemSpectra {
        &self.spectra
    }

    pub fn into_inner(self) -> OscillatorModel {
        self.model
    }
}

impl Deref for StableModel {
    type Target = OscillatorModel;

    fn deref(&self) -> &OscillatorModel {
        &self.model
    }
}

/// Accepts the model iff every squared eigenfrequency of the coupled system
/// (and of the subsystems with one primary removed) is strictly positive.
pub fn validate_stability(model: OscillatorModel) -> Result<StableModel> {
    let spectra = spectrum::subsystem_spectra(&model)?;
    Ok(StableModel { model, spectra })
}

/// Deterministic bath of plane-wave-like mediators: `a_i = k_i^2` on the
/// uniform grid `k_i = i * k_max / n`, `i = 1..=n`, with `c_i^2 = lambda^2 dk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathGenerator {
    pub n: usize,
    pub k_max: f64,
    pub lambda: f64,
}

impl BathGenerator {
    pub fn mediators(&self) -> Result<Vec<Mediator>> {
        if self.n == 0 {
            return Err(Error::InvalidModel("bath needs at least one mode".into()));
        }
        positive("k_max", self.k_max)?;
        finite("lambda", self.lambda)?;
        let dk = self.k_max / self.n as f64;
        let c = self.lambda * dk.sqrt();
        Ok((1..=self.n)
            .map(|i| {
                let k = i as f64 * dk;
                Mediator::new(k * k, c)
            })
            .collect())
    }

    pub fn model(&self, polarization: Polarization, a1: f64, a2: f64) -> Result<OscillatorModel> {
        OscillatorModel::bath(polarization, a1, a2, self.mediators()?)
    }
}
