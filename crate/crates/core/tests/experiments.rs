use lowdeg::experiment::{run, ExperimentConfig, EXPERIMENTS};
use lowdeg::{Error, Verdict};
use serde_json::json;

fn small(name: &str) -> ExperimentConfig {
    let c = ExperimentConfig::new(name, 99);
    match name {
        "special-sumset" => c.with_trials(3000).with_params(json!({"chunk": 1000})),
        "interpolating-rank" => c.with_params(json!({"n_max": 6})),
        "moment-identity" => c.with_trials(5),
        "bias-concentration" => c.with_trials(50).with_params(json!({"n": 10})),
        "random-function-sumset" => c.with_trials(3).with_params(json!({"pairs": 10})),
        _ => c.with_trials(8),
    }
}

#[test]
fn every_experiment_runs_and_reproduces() {
    for name in EXPERIMENTS {
        let first = run(&small(name)).unwrap();
        assert_eq!(&first.experiment, name);
        assert!(!first.rows.is_empty(), "{name}");
        assert!(!first.verdicts.is_empty(), "{name}");
        let mut threads = small(name);
        threads.workers = Some(1);
        let single = run(&threads).unwrap();
        assert_eq!(single.without_timing(), first.without_timing(), "{name}");
        let again = run(&first.config()).unwrap();
        assert_eq!(again.without_timing(), first.without_timing(), "{name}");
    }
}

#[test]
fn moment_identity_example_passes() {
    let c = ExperimentConfig::new("moment-identity", 1)
        .with_trials(1)
        .with_params(json!({"n": 2, "d_max": 2, "t_values": [2]}));
    let r = run(&c).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.rows.iter().all(|row| row["equal"] == true));
}

#[test]
fn configuration_errors() {
    assert!(matches!(
        run(&ExperimentConfig::new("no-such-thing", 1)),
        Err(Error::InvalidParameter(_))
    ));
    assert!(run(&ExperimentConfig::new("dichotomy", 1).with_trials(0)).is_err());
    let bad = ExperimentConfig::new("dichotomy", 1).with_params(json!({"n_maximum": 3}));
    assert!(matches!(run(&bad), Err(Error::Parse { .. })));
    assert!(ExperimentConfig::from_json(r#"{"experiment": "dichotomy"}"#).is_err());
    let parsed =
        ExperimentConfig::from_json(r#"{"experiment": "dichotomy", "seed": 4, "trials": 2}"#)
            .unwrap();
    assert_eq!(parsed.trials, Some(2));
}

#[test]
fn failing_threshold_is_a_verdict_not_an_error() {
    let c = ExperimentConfig::new("disperser-attack", 3)
        .with_trials(2)
        .with_params(json!({"n": 4, "t": 2, "budget": 0}));
    let r = run(&c).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
}

#[test]
fn csv_layout() {
    let r = run(&small("cw-shifts")).unwrap();
    let csv = r.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0]
        .split(',')
        .all(|c| c.chars().all(|ch| ch.is_ascii_lowercase() || ch == '_')));
    assert_eq!(
        lines.iter().filter(|l| !l.starts_with('#')).count(),
        1 + r.rows.len()
    );
    let tail: Vec<&&str> = lines.iter().skip(1 + r.rows.len()).collect();
    assert!(tail.iter().all(|l| l.starts_with('#')));
    assert!(tail.last().unwrap().starts_with("# verdict,pass"));
}
