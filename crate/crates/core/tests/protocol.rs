use hubqc_core::protocol::*;
use hubqc_core::rng::seeded;

#[test]
fn honest_random_circuits_accept_with_exact_output() {
    for seed in 0..100u64 {
        let c = random_circuit(2, 10, &mut seeded(seed ^ 0xabc));
        let cfg = SessionConfig {
            input: InputSpec::Basis { index: (seed % 4) as usize },
            ..Default::default()
        };
        let r = run_session_with(&c, &AdversaryPolicy::Honest, seed, &cfg).unwrap();
        assert!(r.verdict.is_accept(), "seed {seed}: {:?}", r.verdict);
        assert!(r.fidelity.unwrap() > 1.0 - 1e-9, "seed {seed}: {} {}", r.fidelity.unwrap(), c.to_json());
    }
}

#[test]
fn every_axis_order_and_superposed_inputs() {
    use hubqc_core::mbqc::random_state;
    use hubqc_core::AxisOrder;
    for order in [AxisOrder::ZYZ, AxisOrder::ZXZ, AxisOrder::YXY] {
        for seed in 0..30u64 {
            let mut rng = seeded(seed + 500);
            let c = random_circuit(2, 10, &mut rng);
            let input = random_state(2, &mut rng).unwrap();
            let cfg = SessionConfig {
                plan: PlanConfig {
                    axis_order: order,
                    traps_per_block: None,
                },
                input: InputSpec::Amplitudes {
                    amplitudes: input.amplitudes().to_vec(),
                },
                ..Default::default()
            };
            let r = run_session_with(&c, &AdversaryPolicy::Honest, seed, &cfg).unwrap();
            assert!(r.verdict.is_accept(), "{order} seed {seed}");
            assert!(r.fidelity.unwrap() > 1.0 - 1e-9, "{order} seed {seed}: {}", r.fidelity.unwrap());
        }
    }
}
