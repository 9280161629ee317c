mod common;

use std::collections::HashSet;

use artemis_core::data::Feature;
use artemis_sim::{Collector, MissionConfig, World};
use common::*;
use proptest::prelude::*;

fn field() -> impl Strategy<Value = artemis_sim::Scenario> {
    (
        prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 0..12),
        prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 1..4),
        any::<u64>(),
    )
        .prop_map(|(vs, rs, seed)| {
            let victims = vs.iter().enumerate().map(|(i, (x, y))| victim(&format!("v{i}"), *x, *y)).collect();
            let robots = rs.iter().enumerate().map(|(i, (x, y))| robot(&format!("r{i}"), *x, *y)).collect();
            let mut s = scenario(victims, robots);
            s.seed = seed;
            s.sensor_noise = artemis_core::data::NoiseSigmas {
                o2_sat: 4.0,
                heart_rate: 8.0,
                ..artemis_core::data::NoiseSigmas::zero()
            };
            s
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn claims_stay_exclusive_and_nothing_is_reported_twice(s in field()) {
        let mut world = World::new(&s);
        let model = rules();
        let mut seen = HashSet::new();
        for _ in 0..3000 {
            for r in world.step(1.0, &model) {
                prop_assert!(seen.insert(r.victim_id.clone()), "{} reported twice", r.victim_id);
                for f in Feature::ALL {
                    prop_assert!(f.in_bounds(r.vitals.get(f)));
                }
            }
            let targets: Vec<&str> = world.robots().iter().filter_map(|r| r.mode.target()).collect();
            let unique: HashSet<&str> = targets.iter().copied().collect();
            prop_assert_eq!(unique.len(), targets.len());
            prop_assert!(seen.len() <= s.victims.len());
            if world.all_reported() {
                break;
            }
        }
        prop_assert_eq!(seen.len(), s.victims.len());
    }

    #[test]
    fn missions_replay_identically(s in field()) {
        let run = || artemis_sim::run_mission(&s, &rules(), &mut Collector::default(), &MissionConfig::default()).unwrap();
        prop_assert_eq!(run().to_jsonl(), run().to_jsonl());
    }
}
