use cascade_core::adversary::CorruptionSchedule;
use cascade_core::harness::{run_experiment_with_threads, AdversaryConfig, ExperimentSpec};
use cascade_core::policy::{pbe_update, FixedList, InstanceStats};
use cascade_core::rng;
use cascade_core::*;
use proptest::prelude::*;
use rand::Rng;

fn spec(source: ModelSource, items: usize, positions: usize, horizon: u64, policies: Vec<PolicyConfig>) -> ExperimentSpec {
    ExperimentSpec {
        name: None,
        environment: EnvironmentConfig {
            items,
            positions,
            horizon,
            seed: 9,
            source,
        },
        adversary: AdversaryConfig::default(),
        policies,
        trials: 2,
        regret_mode: RegretMode::Expected,
        output: None,
        log_every: None,
    }
}

#[test]
fn realized_regret_averages_to_expected() {
    let model = AttractionModel::new(vec![0.7, 0.5, 0.3, 0.2, 0.1]).unwrap();
    let optimal = optimal_list(&model, 2).unwrap();
    let shown = RecList::from_indices(&[3, 1], 5).unwrap();
    let mut env = Environment::new(model.clone(), rng::stream(4, rng::FEEDBACK_STREAM)).track_optimal(optimal);
    let n = 1_000_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let fb = env.sample_round(&shown);
        let r = regret_increment(&shown, &fb, &model, 2, RegretMode::Realized).unwrap();
        sum += r;
        sq += r * r;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    let fb = env.sample_round(&shown);
    let expected = regret_increment(&shown, &fb, &model, 2, RegretMode::Expected).unwrap();
    assert!((mean - expected).abs() <= 3.0 * se, "{mean} vs {expected} (se {se})");
}

#[test]
fn never_active_schedule_matches_no_attack() {
    let policies = vec![PolicyConfig::new(Algorithm::Ucb1), PolicyConfig::new(Algorithm::Rac)];
    let mut none = spec(ModelSource::Synthetic { low: 0.0, high: 0.5 }, 10, 2, 5000, policies);
    let mut idle = none.clone();
    idle.adversary.schedule = CorruptionSchedule::Periodic { t1: 0, t2: 7 };
    none.adversary.schedule = CorruptionSchedule::None;
    let a = run_experiment_with_threads(&none, 1).unwrap().to_csv();
    let b = run_experiment_with_threads(&idle, 1).unwrap().to_csv();
    assert_eq!(a, b);
}

#[test]
fn inactive_rounds_pass_feedback_through() {
    let mut s = spec(
        ModelSource::Synthetic { low: 0.0, high: 0.5 },
        10,
        3,
        4000,
        vec![PolicyConfig::new(Algorithm::Rkc)],
    );
    s.adversary.schedule = CorruptionSchedule::Periodic { t1: 100, t2: 300 };
    let trial = s.trial(0).unwrap();
    let mut policy = trial.build_policy(&s.policies[0]).unwrap();
    let target = trial.adversary().target();
    let mut attacked = 0;
    trial
        .run_observed(policy.as_mut(), |ev| {
            let fb = ev.feedback;
            let active = (ev.round - 1) % 400 < 100;
            if !active {
                assert_eq!(fb.attractions(), fb.corrupted_attractions());
                assert_eq!(fb.click_index(), fb.corrupted_click_index());
                assert_eq!(ev.magnitude, 0);
            } else if let Some(c) = fb.click_index() {
                let clicked = ev.decision.list.get(c).unwrap();
                assert_eq!(ev.magnitude == 1, clicked != target);
                attacked += ev.magnitude as u32;
            }
        })
        .unwrap();
    assert!(attacked > 0);
}

#[test]
fn policies_in_one_trial_share_the_feedback_stream() {
    let s = spec(ModelSource::Synthetic { low: 0.1, high: 0.9 }, 8, 3, 3000, vec![]);
    let trial = s.trial(1).unwrap();
    let list = RecList::from_indices(&[5, 0, 2], 8).unwrap();
    let collect = || {
        let mut policy = FixedList::new(list.clone());
        let mut seen = Vec::new();
        trial
            .run_observed(&mut policy, |ev| seen.push(ev.feedback.attractions().to_vec()))
            .unwrap();
        seen
    };
    assert_eq!(collect(), collect());
}

#[test]
fn ucb1_regret_is_sublinear() {
    let horizon = 50_000;
    let mut s = spec(
        ModelSource::Gap {
            optimal: 0.4,
            suboptimal: 0.1,
        },
        8,
        2,
        horizon,
        vec![PolicyConfig::new(Algorithm::Ucb1)],
    );
    s.trials = 10;
    s.log_every = Some(horizon / 2);
    let rec = run_experiment_with_threads(&s, 1).unwrap();
    let good = (0..10u64)
        .filter(|&trial| {
            let at = |t: u64| {
                rec.rows
                    .iter()
                    .find(|r| r.trial == trial && r.t == t)
                    .unwrap()
                    .cum_regret
            };
            at(horizon) - at(horizon / 2) < at(horizon / 2)
        })
        .count();
    assert!(good >= 9, "only {good}/10 trials sub-linear");
}

#[test]
fn rows_are_ordered_and_sized() {
    let mut s = spec(
        ModelSource::Synthetic { low: 0.0, high: 0.5 },
        6,
        2,
        1000,
        vec![PolicyConfig::new(Algorithm::Klucb), PolicyConfig::new(Algorithm::Ucbv)],
    );
    s.log_every = Some(300);
    let rec = run_experiment_with_threads(&s, 2).unwrap();
    // t = 0, 300, 600, 900, 1000 per (policy, trial)
    assert_eq!(rec.rows.len(), 2 * 2 * 5);
    assert_eq!(rec.rows[0].policy, "klucb");
    assert_eq!(rec.rows.last().unwrap().policy, "ucbv");
    let ts: Vec<u64> = rec.rows[..5].iter().map(|r| r.t).collect();
    assert_eq!(ts, [0, 300, 600, 900, 1000]);
}

proptest! {
    #[test]
    fn update_never_touches_items_after_the_click(
        seed in any::<u64>(),
        click in proptest::option::of(0usize..4),
        guarded in any::<bool>(),
    ) {
        let mut r = rng::stream(seed, 0);
        let mut stats = InstanceStats::new(9, 4);
        for _ in 0..30 {
            stats.record(ItemId(r.random_range(0..9)), r.random_bool(0.3));
        }
        let mut ix: Vec<usize> = (0..9).collect();
        for i in 0..4 {
            let j = r.random_range(i..9);
            ix.swap(i, j);
        }
        let list = RecList::from_indices(&ix[..4], 9).unwrap();
        let before: Vec<u64> = (0..9).map(|i| stats.plays(ItemId(i))).collect();
        pbe_update(&mut stats, &list, click, guarded);
        let last = click.unwrap_or(3);
        for (pos, item) in list.items().iter().enumerate() {
            let delta = stats.plays(*item) - before[item.0];
            prop_assert_eq!(delta, u64::from(pos <= last));
        }
    }
}
