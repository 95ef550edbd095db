use casimir_core::thermo::interaction_free_energy;
use casimir_core::{
    d_factors, q_determinant_direct, q_determinant_factored, validate_stability, Mediator, ModelKind, OscillatorModel,
    SumOptions,
};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = ModelKind> {
    prop_oneof![
        Just(ModelKind::Tm3),
        Just(ModelKind::Te3),
        Just(ModelKind::TmBath),
        Just(ModelKind::TeBath),
    ]
}

fn model() -> impl Strategy<Value = OscillatorModel> {
    (
        kind(),
        0.2..4.0f64,
        0.2..4.0f64,
        prop::collection::vec((0.2..4.0f64, -0.5..0.5f64), 1..5),
    )
        .prop_map(|(kind, a1, a2, meds)| {
            let meds: Vec<Mediator> = meds.into_iter().map(|(a, c)| Mediator::new(a, c)).collect();
            let meds = if kind.is_bath() { meds } else { meds[..1].to_vec() };
            OscillatorModel::new(kind, a1, a2, meds).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interaction_factor_lies_in_unit_interval(m in model(), zeta in 0.0..20.0f64) {
        prop_assume!(validate_stability(m.clone()).is_ok());
        let q = d_factors(&m, zeta).unwrap();
        prop_assert!(q.interaction_factor > 0.0 && q.interaction_factor <= 1.0);
        prop_assert!(q.log_interaction_factor() <= 0.0);
    }

    #[test]
    fn determinant_factorizes(m in model(), zeta in 0.0..20.0f64) {
        prop_assume!(validate_stability(m.clone()).is_ok());
        let direct = q_determinant_direct(&m, zeta);
        let factored = q_determinant_factored(&m, zeta).unwrap();
        prop_assert!((direct - factored).abs() <= 1e-12 * direct.abs());
    }

    #[test]
    fn free_energy_is_attractive(m in model(), log_t in -1.0..1.5f64) {
        let Ok(stable) = validate_stability(m) else { return Ok(()) };
        let f = interaction_free_energy(&stable, 10f64.powf(log_t), &SumOptions::default()).unwrap();
        prop_assert!(f <= 0.0, "F = {}", f);
    }
}
