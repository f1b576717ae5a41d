use neuroenergy::cells::{self, CellState, CurrentBreakdown, GATE_EPS, GATE_SLOTS};
use neuroenergy::energetics;
use neuroenergy::format::sig6;
use neuroenergy::integrator::{self, Protocol, SpikeTrain, Trace};
use neuroenergy::kinetics;
use proptest::prelude::*;

fn state(v: f64, gates: [f64; GATE_SLOTS]) -> CellState {
    CellState { v, gates }
}

fn gates() -> impl Strategy<Value = [f64; GATE_SLOTS]> {
    prop::array::uniform6(0.0..=1.0f64)
}

proptest! {
    #[test]
    fn channel_energy_is_non_negative(id in 1u32..=10, v in -120.0..80.0f64, g in gates()) {
        let p = cells::registry(id).unwrap();
        prop_assert!(energetics::channel_energy_rate(&state(v, g), &p) >= 0.0);
    }

    #[test]
    fn energy_rate_forms_agree(id in 1u32..=10, v in -120.0..80.0f64, g in gates(), i in -20.0..20.0f64) {
        let p = cells::registry(id).unwrap();
        let s = state(v, g);
        let direct = energetics::total_energy_rate(&s, &p, i);
        let (battery, scale) = energetics::battery_energy_rate(&s, &p, i);
        prop_assert!((direct - battery).abs() <= 1e-12 * scale.max(direct.abs()).max(1.0));
    }

    #[test]
    fn currents_sum_to_total(id in 1u32..=10, v in -120.0..80.0f64, g in gates()) {
        let p = cells::registry(id).unwrap();
        let c = cells::ionic_currents(&state(v, g), &p);
        let sum = c.leak + c.na + c.k + c.m + c.l + c.t;
        prop_assert!((c.total() - sum).abs() <= 1e-12 * (1.0 + sum.abs()));
    }

    #[test]
    fn rates_are_finite_and_non_negative(v in -150.0..100.0f64, vt in -70.0..-50.0f64) {
        use kinetics::{Family, GateForm, GateId};
        for family in [Family::Neocortical, Family::ThalamicRelay, Family::HippocampalInterneuron] {
            for gate in [GateId::M, GateId::H, GateId::N, GateId::P, GateId::Q, GateId::R] {
                if kinetics::gate_form(family, gate) == Some(GateForm::AlphaBeta) {
                    let (a, b) = kinetics::rate_pair(family, gate, v, vt).unwrap();
                    prop_assert!(a.is_finite() && a >= 0.0 && b.is_finite() && b >= 0.0);
                }
            }
        }
    }

    #[test]
    fn exprel_inv_near_zero(u in -1e-3..1e-3f64) {
        let exact = if u == 0.0 { 1.0 } else { u / u.exp_m1() };
        prop_assert!((kinetics::exprel_inv(u) - exact).abs() < 1e-9);
    }

    #[test]
    fn temperature_factor_is_monotone(a in 0.1..49.9f64, b in 0.1..49.9f64) {
        let (ka, kb) = (kinetics::temperature_factor(a).unwrap(), kinetics::temperature_factor(b).unwrap());
        prop_assert!(ka > 0.0 && kb > 0.0);
        prop_assert_eq!(a < b, ka < kb);
    }

    #[test]
    fn decomposition_partitions_sodium_load(
        na in prop::collection::vec(-50.0..5.0f64, 2..200),
        k in prop::collection::vec(-5.0..50.0f64, 200),
        spikes in 1usize..5,
    ) {
        let p = cells::registry(1).unwrap();
        let n = na.len();
        let proto = Protocol { i_stim: 0.0, temperature: 36.0, duration: (n - 1) as f64 * 0.01, dt: 0.01, transient: 0.0 };
        let currents = (0..n)
            .map(|i| CurrentBreakdown { na: na[i], k: k[i], ..Default::default() })
            .collect();
        let trace = Trace::from_parts(&p, &proto, vec![CellState::default(); n], currents);
        let train = SpikeTrain { times: vec![0.0; spikes], window_start: 0.0, window_end: proto.duration };
        let q_na = energetics::sodium_load(&trace, &train).unwrap();
        let (q_min, q_ov) = energetics::overlap_decomposition(&trace, &train).unwrap();
        prop_assert!(q_min >= 0.0 && q_ov >= 0.0);
        prop_assert!((q_min + q_ov - q_na).abs() <= 1e-9 * q_na.max(1e-12));
    }

    #[test]
    fn sig6_keeps_six_digits(x in -1e12..1e12f64) {
        let back: f64 = sig6(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-6 * x.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gates_stay_in_bounds(id in 1u32..=10, stim in 0.0..15.0f64, temp in 20.0..40.0f64) {
        let p = cells::registry(id).unwrap();
        let proto = Protocol { duration: 100.0, ..Protocol::new(stim, temp) };
        let trace = integrator::integrate(&p, &proto).unwrap();
        let slots: Vec<usize> = p.gates().iter().filter_map(|&g| cells::gate_slot(p.family, g)).collect();
        for s in &trace.states {
            for &i in &slots {
                prop_assert!((-GATE_EPS..=1.0 + GATE_EPS).contains(&s.gates[i]), "gate {} = {}", i, s.gates[i]);
            }
        }
    }

    #[test]
    fn streaming_and_trace_reports_agree(id in 1u32..=10, stim in 3.0..12.0f64, temp in 25.0..40.0f64) {
        let p = cells::registry(id).unwrap();
        let proto = Protocol { duration: 200.0, ..Protocol::new(stim, temp) };
        let analysis = energetics::Analysis::default();
        let trace = integrator::integrate(&p, &proto).unwrap();
        let from_trace = energetics::report_from_trace(&trace, &analysis);
        let streamed = energetics::report_for(&p, &proto, &analysis);
        match (from_trace, streamed) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.spike_count, b.spike_count);
                for (x, y) in [(a.q_na, b.q_na), (a.q_k, b.q_k), (a.q_min, b.q_min), (a.ionic_energy, b.ionic_energy)] {
                    prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
                }
            }
            (a, b) => prop_assert_eq!(a.err(), b.err()),
        }
    }
}
