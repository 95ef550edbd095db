//! Turns a normalized config into a computed table.

use casimir_core::dipole::{pair_free_energy, DipolePair};
use casimir_core::thermo::{sweep, temperature_grid};
use casimir_core::{
    validate_stability, BathGenerator, Mediator, OscillatorModel, Polarization, SumOptions, ThermoCurve,
};

use crate::config::{Kind, ModelConfig, RunConfig};
use crate::error::CliError;

/// Result of a run: either a thermodynamic curve over temperature or a
/// free-energy profile over separation.
#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Thermal(ThermoCurve),
    /// `(r, F)` rows of a dipole distance sweep.
    Distance(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub model: ModelConfig,
    pub table: Table,
}

pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    let opts = SumOptions {
        rel_tol: config.tolerances.rel_tol.expect("normalized"),
        n_max_cap: config.tolerances.n_max_cap.expect("normalized"),
    };
    let s = &config.sweep;
    let points = s.points.expect("normalized");
    let m = &config.model;
    let table = match config.kind() {
        Kind::Dipole if s.is_distance_sweep() => {
            let t = s.t.expect("normalized");
            let radii = temperature_grid(
                s.r_min.expect("normalized"),
                s.r_max.expect("normalized"),
                points,
                s.logarithmic(),
            );
            let mut rows = Vec::with_capacity(radii.len());
            for r in radii {
                let pair = dipole_pair(m, r)?;
                let f = pair_free_energy(&pair, t, &opts)
                    .map_err(|e| CliError::from_core(e, "sweep.r_min").with_value(r))?;
                rows.push((r, f));
            }
            Table::Distance(rows)
        }
        kind => {
            let temps = temperature_grid(
                s.t_min.expect("normalized"),
                s.t_max.expect("normalized"),
                points,
                s.logarithmic(),
            );
            let curve = if kind == Kind::Dipole {
                let pair = dipole_pair(m, m.r.expect("normalized"))?;
                sweep(&pair, &temps, &opts).map_err(|e| CliError::from_core(e, "model.r"))?
            } else {
                let key = stability_key(m);
                let model = oscillator_model(m).map_err(|e| CliError::from_core(e, key))?;
                let stable = validate_stability(model).map_err(|e| CliError::from_core(e, key))?;
                sweep(&stable, &temps, &opts).map_err(|e| CliError::from_core(e, key))?
            };
            Table::Thermal(curve)
        }
    };
    Ok(Report {
        model: config.model.clone(),
        table,
    })
}

fn dipole_pair(m: &ModelConfig, r: f64) -> Result<DipolePair, CliError> {
    let key = if m.r.is_some() { "model.r" } else { "sweep.r_min" };
    DipolePair::new(
        m.g1.expect("normalized"),
        m.g2.expect("normalized"),
        m.a1.expect("normalized"),
        m.a2.expect("normalized"),
        r,
    )
    .map_err(|e| CliError::from_core(e, key).with_value(r))
}

/// Config entry blamed when the model turns out unstable.
fn stability_key(m: &ModelConfig) -> &'static str {
    if m.generator.is_some() {
        "model.generator"
    } else if m.mediators.is_some() {
        "model.mediators"
    } else {
        "model.c"
    }
}

fn oscillator_model(m: &ModelConfig) -> casimir_core::Result<OscillatorModel> {
    let a1 = m.a1.expect("normalized");
    let a2 = m.a2.expect("normalized");
    let bath_mediators = || -> casimir_core::Result<Vec<Mediator>> {
        match (&m.mediators, &m.generator) {
            (Some(meds), _) => Ok(meds.iter().map(|x| Mediator::new(x.a, x.c)).collect()),
            (None, Some(g)) => BathGenerator {
                n: g.n,
                k_max: g.k_max,
                lambda: g.lambda,
            }
            .mediators(),
            (None, None) => unreachable!("normalized bath has mediators or a generator"),
        }
    };
    match m.kind.expect("normalized") {
        Kind::Tm3 => OscillatorModel::tm3(a1, a2, m.a3.expect("normalized"), m.c.expect("normalized")),
        Kind::Te3 => OscillatorModel::te3(a1, a2, m.a3.expect("normalized"), m.c.expect("normalized")),
        Kind::TmBath => OscillatorModel::bath(Polarization::Tm, a1, a2, bath_mediators()?),
        Kind::TeBath => OscillatorModel::bath(Polarization::Te, a1, a2, bath_mediators()?),
        Kind::Dipole => unreachable!("dipoles are not oscillator models"),
    }
}
