use dirtask_core::agent::{run_trial, Policy, RandomPolicy, TrialConfig, TrialOutcome, TurnResult};
use dirtask_core::scenario::{reference_scenario, respond, Action, Family, Question, Role, Rules};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Replaying the applied actions of a log reproduces its counters and
    /// outcome.
    #[test]
    fn logs_replay(seed in any::<u64>(), fam in 0usize..7, max_steps in 1u32..15) {
        let sc = reference_scenario(Family::ALL[fam]);
        let mut p = RandomPolicy::new(seed);
        let cfg = TrialConfig { max_steps, ..TrialConfig::default() };
        let log = run_trial(&sc, &mut p, &cfg).unwrap();
        prop_assert_eq!(log.steps as usize, log.turns.len());
        prop_assert!(log.steps <= max_steps);
        let mut state = sc.initial.clone();
        let mut asks = 0;
        for t in &log.turns {
            let a = t.action.clone();
            match (&t.result, a) {
                (TurnResult::Applied, Some(a)) => {
                    if let Action::Ask { question } = &a {
                        asks += 1;
                        let ans = respond(&state.observation_of(Role::Director), question, &sc);
                        prop_assert!(t.feedback.contains(&ans.text));
                    }
                    state = state.apply(&a, Rules::RUNTIME).unwrap();
                }
                (TurnResult::Rejected { .. }, Some(a)) => {
                    prop_assert!(state.apply(&a, Rules::RUNTIME).is_err());
                }
                (r, a) => prop_assert!(false, "unexpected turn {:?} {:?}", r, a),
            }
        }
        prop_assert_eq!(asks, log.asks);
        prop_assert_eq!(state.holding.clone(), log.first_take.clone());
        let want = match &log.first_take {
            Some(i) if *i == sc.target => TrialOutcome::Success,
            Some(_) => TrialOutcome::WrongTakeFirst,
            None => TrialOutcome::StepLimit,
        };
        prop_assert_eq!(log.outcome, want);
    }

    #[test]
    fn same_seed_same_log(seed in any::<u64>()) {
        let sc = reference_scenario(Family::Far);
        let run = |p: &mut dyn Policy| run_trial(&sc, p, &TrialConfig::default()).unwrap();
        prop_assert_eq!(run(&mut RandomPolicy::new(seed)), run(&mut RandomPolicy::new(seed)));
    }
}

#[test]
fn director_answers_are_stable() {
    for fam in Family::ALL {
        let sc = reference_scenario(fam);
        let view = sc.initial.observation_of(Role::Director);
        for q in [Question::Which, Question::AtLocation(0), Question::AtLocation(2)] {
            assert_eq!(respond(&view, &q, &sc), respond(&view, &q, &sc));
        }
    }
}

mod aggregation {
    use dirtask_core::agent::{run_trial, RandomPolicy};
    use dirtask_core::eval::{aggregate, Cell, Condition, Metric, TrialRecord};
    use dirtask_core::scenario::{reference_scenario, Family};
    use proptest::prelude::*;

    fn records(seed: u64) -> Vec<TrialRecord> {
        let mut out = Vec::new();
        for (ci, condition) in [Condition::EXAMPLE_TYPES[0], Condition::NoExamples].into_iter().enumerate() {
            for family in Family::ALL {
                for trial in 0..3u32 {
                    let s = seed ^ ((ci as u64) << 40) ^ ((family as u64) << 20) ^ trial as u64;
                    let log = run_trial(&reference_scenario(family), &mut RandomPolicy::new(s), &Default::default()).unwrap();
                    out.push(TrialRecord { cell: Cell { condition, family }, trial, seed: s, log });
                }
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn permutation_invariant(seed in any::<u64>(), perm in any::<u64>()) {
            let recs = records(seed);
            let mut shuffled = recs.clone();
            let mut state = perm;
            for i in (1..shuffled.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (state >> 33) as usize % (i + 1));
            }
            let conds = [Condition::EXAMPLE_TYPES[0], Condition::NoExamples];
            for m in Metric::ALL {
                prop_assert_eq!(aggregate(&recs, &conds, &Family::ALL, m), aggregate(&shuffled, &conds, &Family::ALL, m));
            }
        }
    }
}
