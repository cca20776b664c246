use proptest::prelude::*;

use bailfund::simulate::{simulate_with, ReturnFactor, SimOptions};
use bailfund::{generate_stream, simulate, EventStream, ModelKind, ModelParams, ScalingSpec};

#[test]
fn scenario_round_trip_reproduces_paths() {
    let params = ModelParams::example1();
    let stream = generate_stream(&params, ScalingSpec::unit(), 42, 30.0).unwrap();
    let text = stream.to_scenario();
    let again = EventStream::from_scenario(&text, stream.horizon).unwrap();
    for kind in ModelKind::ALL {
        let a = simulate(kind, &params, &stream);
        let b = simulate(kind, &params, &again);
        assert_eq!(a.path, b.path, "{kind}");
    }
}

#[test]
fn example_table_file_parses() {
    let text = include_str!("../../../scenarios/example_table.events");
    let stream = EventStream::from_scenario(text, 6.0).unwrap();
    assert_eq!(stream, EventStream::returns_counterexample());
}

#[test]
fn literal_return_factor_breaks_identity_somewhere() {
    let params = ModelParams::example1();
    let opts = SimOptions { skorokhod_return_factor: ReturnFactor::P };
    let broken = (0..50u64).any(|seed| {
        let stream = generate_stream(&params, ScalingSpec::unit(), seed, 50.0).unwrap();
        let reflected = simulate(ModelKind::InfReturns, &params, &stream).path.skorokhod_map();
        let literal = simulate_with(ModelKind::SkorokhodReturns, &params, &stream, &opts).path;
        reflected.max_relative_deviation(&literal).unwrap() > 1e-6
    });
    assert!(broken);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn accounting_closes(seed in any::<u64>(), eta in 1.0f64..20.0) {
        let params = ModelParams::example2_blocking();
        let stream = generate_stream(&params, ScalingSpec::new(eta).unwrap(), seed, 20.0).unwrap();
        for kind in ModelKind::ALL {
            let r = simulate(kind, &params, &stream);
            prop_assert!(r.accounting_residual(params.m0).abs() <= 1e-9 * (1.0 + r.totals.donated));
        }
    }

    #[test]
    fn reflecting_models_stay_nonnegative(seed in any::<u64>()) {
        let params = ModelParams::example2_infinite();
        let stream = generate_stream(&params, ScalingSpec::unit(), seed, 50.0).unwrap();
        for kind in [ModelKind::BlockingReturns, ModelKind::PartialReturns, ModelKind::SkorokhodReturns,
                     ModelKind::BlockingNr, ModelKind::PartialNr, ModelKind::SkorokhodNr] {
            let r = simulate(kind, &params, &stream);
            prop_assert!(r.path.min_value() >= -1e-12, "{kind}");
        }
    }
}
