//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use lowdeg::experiment::{run, ExperimentConfig, ExperimentReport};
use serde_json::json;

const SEED: u64 = 20_240_601;

struct Criterion {
    id: u32,
    name: &'static str,
    config: ExperimentConfig,
    limit: Duration,
}

fn criteria() -> Vec<Criterion> {
    let c = |id, name, experiment: &str, trials: u64, params: serde_json::Value, secs| Criterion {
        id,
        name,
        config: ExperimentConfig::new(experiment, SEED)
            .with_trials(trials)
            .with_params(params),
        limit: Duration::from_secs(secs),
    };
    vec![
        c(
            1,
            "moment identity",
            "moment-identity",
            50,
            json!({"n": 2, "max_support": 4, "d_max": 2, "t_values": [1, 2, 3], "random_n": 3}),
            60,
        ),
        c(
            2,
            "interpolating-set rank",
            "interpolating-rank",
            1,
            json!({"n_max": 10, "d_max": 3}),
            30,
        ),
        c(
            3,
            "rank monotonicity under linear maps",
            "rank-monotonicity",
            1000,
            json!({"n_max": 8, "m_max": 8, "d_max": 3}),
            60,
        ),
        c(
            4,
            "high-rank subsets",
            "high-rank-subsets",
            1000,
            json!({"n": 8, "size": 32, "m": 4, "d": 2, "map_trials": 50, "min_success_rate": 0.99}),
            120,
        ),
        c(
            5,
            "special sumset sampler",
            "special-sumset",
            1_000_000,
            json!({"n": 6, "m": 6, "d": 2, "max_marginal_tv": 0.2}),
            300,
        ),
        c(
            6,
            "bias concentration",
            "bias-concentration",
            2000,
            json!({"n": 14, "d": 2, "max_fraction": 0.01}),
            300,
        ),
        c(
            7,
            "degree-4 two-source extractor",
            "two-source-degree",
            100,
            json!({"n": 3, "r": 33, "max_degree": 4}),
            60,
        ),
        c(
            8,
            "seeded extractor structure",
            "seeded-structure",
            100,
            json!({"n": 8, "t": 3, "degrees": [1, 2], "anf_n": 4}),
            180,
        ),
        c(
            9,
            "energy partition",
            "energy-partition",
            200,
            json!({"k": 8, "ell": 5, "t": 7, "ambient": 10, "retries": 100, "min_success_rate": 0.99}),
            180,
        ),
        c(
            10,
            "shift counts on zero sets",
            "cw-shifts",
            200,
            json!({"n_max": 12, "d_max": 3, "t_max": 4}),
            180,
        ),
        c(
            11,
            "disperser attack",
            "disperser-attack",
            100,
            json!({"n": 8, "d": 2, "t": 2}),
            300,
        ),
        c(
            12,
            "inner-product dichotomy",
            "dichotomy",
            500,
            json!({"n_max": 6}),
            30,
        ),
        c(
            13,
            "variety reduction",
            "variety-reduction",
            100,
            json!({"n_max": 10, "t_max": 20, "d": 2, "max_mean_attempts": 2.0}),
            120,
        ),
    ]
}

fn summary(r: &ExperimentReport) -> String {
    r.verdicts
        .iter()
        .map(|c| {
            format!(
                "{}={} ({})",
                c.name,
                if c.verdict.passed() { "ok" } else { "FAIL" },
                c.detail
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn main() -> ExitCode {
    let suite = Instant::now();
    let mut failed = 0;
    let mut reports = Vec::new();
    for c in criteria() {
        let start = Instant::now();
        let result = run(&c.config);
        let elapsed = start.elapsed();
        let (pass, detail) = match &result {
            Ok(r) => (r.verdict.passed() && elapsed <= c.limit, summary(r)),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "criterion {:>2} {:<40} {}  {:.1}s/{}s  {detail}",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
        failed += u32::from(!pass);
        if let Ok(r) = result {
            reports.push((c.config, r));
        }
    }

    let start = Instant::now();
    let mut differing = Vec::new();
    for (config, first) in &reports {
        match run(config) {
            Ok(again)
                if again.without_timing() == first.without_timing()
                    && again.to_csv() == first.to_csv() => {}
            _ => differing.push(config.experiment.clone()),
        }
    }
    let pass =
        differing.is_empty() && reports.len() == 13 && suite.elapsed() <= Duration::from_secs(1800);
    println!(
        "criterion 14 {:<40} {}  {:.1}s  re-ran {} reports, differing: {:?}; suite {:.1}s of 1800s",
        "reproducibility",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64(),
        reports.len(),
        differing,
        suite.elapsed().as_secs_f64()
    );
    failed += u32::from(!pass);

    let spot = ExperimentConfig::new("random-function-sumset", SEED);
    match run(&spot) {
        Ok(r) => println!(
            "invariant    {:<40} {}  (not counted)  {}",
            "random-function sumset spot-check",
            if r.verdict.passed() { "PASS" } else { "FAIL" },
            summary(&r)
        ),
        Err(e) => println!("invariant    random-function sumset spot-check error: {e}"),
    }

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
