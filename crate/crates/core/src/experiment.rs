//! Seeded batch experiments with JSON and CSV reports.
//!
//! Trial `i` of an experiment draws from `derived(seed, i)` and results are
//! collected in trial order, so a report depends on the configuration and
//! seed only. Randomness shared by all trials comes from
//! `derived(seed, SETUP_STREAM)`.

use std::collections::HashSet;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::anf::{anf_from_truth_table, sample_poly, MonomialOrder, Polynomial};
use crate::bias::{bias_of_distribution, bias_uniform, moment_lhs, moment_rhs, Verdict};
use crate::codes::{johnson_check, measured_epsilon, CodeView};
use crate::constructions::{
    build_seeded, build_two_source, eval_seeded, left_degree, right_degree, seeded_truth_table,
    two_source_degree,
};
use crate::error::{Error, Result};
use crate::exact::to_f64;
use crate::gf2::{binom_sum_usize, hamming_ball, sample_uniform_matrix, BitVector};
use crate::oracles::{
    additive_energy, cw_shift_count, dichotomy_check, disperser_attack, energy_partition,
    random_independent, sample_vanishing_poly, AttackWitness,
};
use crate::ranklab::{eval_rank, find_high_rank_subsets, special_sumset_sampler, MapAcceptance};
use crate::rng::{derived, Stream};
use crate::sources::{support_of, variety_reduce, Distribution, Source};

/// Stream index reserved for randomness shared by all trials.
pub const SETUP_STREAM: u64 = u64::MAX;

/// Every experiment name accepted by [`run`].
pub const EXPERIMENTS: &[&str] = &[
    "moment-identity",
    "interpolating-rank",
    "rank-monotonicity",
    "high-rank-subsets",
    "special-sumset",
    "bias-concentration",
    "two-source-degree",
    "seeded-structure",
    "energy-partition",
    "cw-shifts",
    "disperser-attack",
    "dichotomy",
    "variety-reduction",
    "random-function-sumset",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    /// Defaults per experiment when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Thread count; the machine's parallelism when absent. Does not
    /// affect results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub params: Value,
}

impl ExperimentConfig {
    pub fn new(experiment: &str, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            seed,
            trials: None,
            workers: None,
            params: Value::Object(Map::new()),
        }
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = Some(trials);
        self
    }

    pub fn with_params(mut self, params: Value) -> Self {
        self.params = params;
        self
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::parse("experiment config", e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub trials: u64,
    /// Parameters after defaults were applied.
    pub params: Value,
    pub rows: Vec<Map<String, Value>>,
    pub aggregates: Map<String, Value>,
    pub verdicts: Vec<Check>,
    pub verdict: Verdict,
    pub wall_time_ms: u64,
}

impl ExperimentReport {
    /// A configuration that reproduces this report.
    pub fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            experiment: self.experiment.clone(),
            seed: self.seed,
            trials: Some(self.trials),
            workers: None,
            params: self.params.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per trial under a header of column names, then `#` lines
    /// with the aggregates, each check, and the overall verdict.
    pub fn to_csv(&self) -> String {
        let columns: Vec<&String> = {
            let mut seen = Vec::new();
            for row in &self.rows {
                for k in row.keys() {
                    if !seen.contains(&k) {
                        seen.push(k);
                    }
                }
            }
            seen.sort();
            seen
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        if !columns.is_empty() {
            w.write_record(&columns).expect("in-memory write");
            for row in &self.rows {
                w.write_record(
                    columns
                        .iter()
                        .map(|c| row.get(*c).map(cell).unwrap_or_default()),
                )
                .expect("in-memory write");
            }
        }
        let mut out = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
        let mut tail = csv::WriterBuilder::new()
            .flexible(true)
            .from_writer(Vec::new());
        for (k, v) in &self.aggregates {
            tail.write_record([format!("# {k}"), cell(v)])
                .expect("in-memory write");
        }
        for c in &self.verdicts {
            tail.write_record([
                format!("# check {}", c.name),
                verdict_str(c.verdict).to_string(),
                c.detail.clone(),
            ])
            .expect("in-memory write");
        }
        tail.write_record([
            "# verdict".to_string(),
            verdict_str(self.verdict).to_string(),
            String::new(),
        ])
        .expect("in-memory write");
        out.push_str(
            &String::from_utf8(tail.into_inner().expect("in-memory flush")).expect("utf-8"),
        );
        out
    }

    /// The JSON report without its wall-time field.
    pub fn without_timing(&self) -> String {
        let mut r = self.clone();
        r.wall_time_ms = 0;
        r.to_json()
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    if v.passed() {
        "pass"
    } else {
        "fail"
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn default_trials(name: &str) -> u64 {
    match name {
        "moment-identity" => 50,
        "interpolating-rank" => 1,
        "rank-monotonicity" => 1000,
        "high-rank-subsets" => 1000,
        "special-sumset" => 1_000_000,
        "bias-concentration" => 2000,
        "two-source-degree"
        | "seeded-structure"
        | "disperser-attack"
        | "variety-reduction"
        | "random-function-sumset" => 100,
        "energy-partition" | "cw-shifts" => 200,
        "dichotomy" => 500,
        _ => 1,
    }
}

struct Ctx {
    seed: u64,
    trials: u64,
}

impl Ctx {
    fn setup(&self) -> Stream {
        derived(self.seed, SETUP_STREAM)
    }

    /// Runs `f(i, stream_i)` for every trial, in trial order.
    fn trials<T: Send>(&self, f: impl Fn(u64, &mut Stream) -> Result<T> + Sync) -> Result<Vec<T>> {
        (0..self.trials)
            .into_par_iter()
            .map(|i| f(i, &mut derived(self.seed, i)))
            .collect()
    }
}

struct Outcome {
    rows: Vec<Map<String, Value>>,
    aggregates: Map<String, Value>,
    verdicts: Vec<Check>,
}

impl Outcome {
    fn new(rows: Vec<Value>) -> Self {
        Self {
            rows: rows
                .into_iter()
                .map(|v| match v {
                    Value::Object(m) => m,
                    _ => unreachable!("rows are objects"),
                })
                .collect(),
            aggregates: Map::new(),
            verdicts: Vec::new(),
        }
    }

    fn aggregate(&mut self, key: &str, v: impl Into<Value>) {
        self.aggregates.insert(key.to_string(), v.into());
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.verdicts.push(Check {
            name: name.to_string(),
            verdict: Verdict::from_bool(pass),
            detail,
        });
    }
}

fn parse_params<P: DeserializeOwned + Serialize>(v: &Value) -> Result<(P, Value)> {
    let v = if v.is_null() {
        Value::Object(Map::new())
    } else {
        v.clone()
    };
    let p: P = serde_json::from_value(v).map_err(|e| Error::parse("params", e.to_string()))?;
    let echo = serde_json::to_value(&p).expect("params serialize");
    Ok((p, echo))
}

/// Runs a configured experiment on a pool of `workers` threads.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if !EXPERIMENTS.contains(&config.experiment.as_str()) {
        return Err(Error::InvalidParameter(format!(
            "unknown experiment `{}`; expected one of {}",
            config.experiment,
            EXPERIMENTS.join(", ")
        )));
    }
    let trials = config
        .trials
        .unwrap_or_else(|| default_trials(&config.experiment));
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if config.workers == Some(0) {
        return Err(Error::InvalidParameter("workers must be at least 1".into()));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let ctx = Ctx {
        seed: config.seed,
        trials,
    };
    let start = Instant::now();
    let (params, outcome) = pool.install(|| dispatch(&config.experiment, &config.params, &ctx))?;
    let verdict = Verdict::from_bool(outcome.verdicts.iter().all(|c| c.verdict.passed()));
    Ok(ExperimentReport {
        experiment: config.experiment.clone(),
        seed: config.seed,
        trials,
        params,
        rows: outcome.rows,
        aggregates: outcome.aggregates,
        verdicts: outcome.verdicts,
        verdict,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

fn dispatch(name: &str, params: &Value, ctx: &Ctx) -> Result<(Value, Outcome)> {
    macro_rules! go {
        ($f:ident) => {{
            let (p, echo) = parse_params(params)?;
            Ok((echo, $f(&p, ctx)?))
        }};
    }
    match name {
        "moment-identity" => go!(moment_identity),
        "interpolating-rank" => go!(interpolating_rank),
        "rank-monotonicity" => go!(rank_monotonicity),
        "high-rank-subsets" => go!(high_rank_subsets),
        "special-sumset" => go!(special_sumset),
        "bias-concentration" => go!(bias_concentration),
        "two-source-degree" => go!(two_source),
        "seeded-structure" => go!(seeded_structure),
        "energy-partition" => go!(energy),
        "cw-shifts" => go!(cw_shifts),
        "disperser-attack" => go!(disperser),
        "dichotomy" => go!(dichotomy),
        "variety-reduction" => go!(variety_reduction),
        "random-function-sumset" => go!(random_function_sumset),
        _ => unreachable!("checked by run"),
    }
}

/// `size` distinct uniform points of `F_2^n`, sorted.
pub fn random_subset(n: usize, size: usize, rng: &mut Stream) -> Result<Vec<BitVector>> {
    if n < 64 && size as u64 > 1u64 << n {
        return Err(Error::InvalidParameter(format!(
            "{size} distinct points do not fit in F_2^{n}"
        )));
    }
    let mut s = HashSet::with_capacity(size);
    while s.len() < size {
        s.insert(BitVector::random(n, rng));
    }
    let mut v: Vec<BitVector> = s.into_iter().collect();
    v.sort();
    Ok(v)
}

fn all_points(n: usize) -> Vec<BitVector> {
    (0..1u64 << n).map(|x| BitVector::from_u64(n, x)).collect()
}

fn set_string(v: &[BitVector]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn rate(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MomentParams {
    /// Every flat source over `F_2^n` with support size `<= max_support`.
    n: usize,
    max_support: usize,
    d_max: usize,
    t_values: Vec<u32>,
    /// Dimension of the `trials` random flat sources.
    random_n: usize,
}

impl Default for MomentParams {
    fn default() -> Self {
        Self {
            n: 2,
            max_support: 4,
            d_max: 2,
            t_values: vec![1, 2, 3],
            random_n: 3,
        }
    }
}

fn moment_identity(p: &MomentParams, ctx: &Ctx) -> Result<Outcome> {
    if p.n > 4 {
        return Err(Error::budget(
            "flat-source enumeration dimension",
            p.n as u128,
            4,
        ));
    }
    let points = all_points(p.n);
    let mut sources: Vec<Vec<BitVector>> = (1u64..1 << points.len())
        .filter(|m| m.count_ones() as usize <= p.max_support)
        .map(|m| {
            points
                .iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect();
    let exhaustive = sources.len();
    let random: Vec<Vec<BitVector>> = ctx.trials(|_, rng| loop {
        let s: Vec<BitVector> = all_points(p.random_n)
            .into_iter()
            .filter(|_| rng.gen::<bool>())
            .collect();
        if !s.is_empty() {
            return Ok(s);
        }
    })?;
    sources.extend(random);
    let rows: Vec<Value> = sources
        .par_iter()
        .enumerate()
        .map(|(i, support)| {
            let n = support[0].len();
            let s = Source::flat(n, support.clone())?;
            let mut rows = Vec::new();
            for d in 0..=p.d_max {
                for &t in &p.t_values {
                    let (lhs, rhs) = (moment_lhs(&s, n, d, t)?, moment_rhs(&s, n, d, t)?);
                    rows.push(json!({
                        "source": i,
                        "kind": if i < exhaustive { "exhaustive" } else { "random" },
                        "support": set_string(support),
                        "d": d,
                        "t": t,
                        "lhs": lhs.to_string(),
                        "rhs": rhs.to_string(),
                        "equal": lhs == rhs,
                    }));
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mismatches = rows.iter().filter(|r| r["equal"] == false).count();
    let mut o = Outcome::new(rows);
    o.aggregate("sources", sources.len());
    o.aggregate("comparisons", o.rows.len());
    o.aggregate("mismatches", mismatches);
    o.check(
        "moment_identity_exact",
        mismatches == 0,
        format!("{mismatches} mismatches"),
    );
    Ok(o)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct InterpolatingParams {
    n_max: usize,
    d_max: usize,
}

impl Default for InterpolatingParams {
    fn default() -> Self {
        Self {
            n_max: 10,
            d_max: 3,
        }
    }
}

fn interpolating_rank(p: &InterpolatingParams, _ctx: &Ctx) -> Result<Outcome> {
    let cases: Vec<(usize, usize)> = (1..=p.n_max)
        .flat_map(|n| (0..=n.min(p.d_max)).map(move |d| (n, d)))
        .collect();
    let rows: Vec<Value> = cases
        .par_iter()
        .map(|&(n, d)| {
            let rank = eval_rank(&hamming_ball(n, d), d)?.rank;
            let expected = binom_sum_usize(n, d).expect("small");
            Ok(json!({"n": n, "d": d, "rank": rank, "expected": expected, "equal": rank == expected}))
        })
        .collect::<Result<_>>()?;
    let bad = rows.iter().filter(|r| r["equal"] == false).count();
    let mut o = Outcome::new(rows);
    o.aggregate("cases", cases.len());
    o.aggregate("mismatches", bad);
    o.check(
        "ball_rank_equals_binom_sum",
        bad == 0,
        format!("{bad} mismatches over {} cases", cases.len()),
    );
    Ok(o)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MonotonicityParams {
    n_max: usize,
    m_max: usize,
    d_max: usize,
    max_set: usize,
}

impl Default for MonotonicityParams {
    fn default() -> Self {
        Self {
            n_max: 8,
            m_max: 8,
            d_max: 3,
            max_set: 64,
        }
    }
}

fn rank_monotonicity(p: &MonotonicityParams, ctx: &Ctx) -> Result<Outcome> {
    let rows = ctx.trials(|i, rng| {
        let n = rng.gen_range(1..=p.n_max);
        let m = rng.gen_range(1..=p.m_max);
        let d = rng.gen_range(1..=p.d_max);
        let size = rng.gen_range(1..=p.max_set.min(1 << n));
        let s = random_subset(n, size, rng)?;
        let l = sample_uniform_matrix(m, n, rng);
        let mut image: Vec<BitVector> = s.iter().map(|x| l.mul_vec(x)).collect::<Result<_>>()?;
        image.sort();
        image.dedup();
        let (rs, rl) = (eval_rank(&s, d)?.rank, eval_rank(&image, d)?.rank);
        Ok(json!({"trial": i, "n": n, "m": m, "d": d, "size": size, "rank_s": rs, "rank_image": rl, "ok": rs >= rl}))
    })?;
    let bad = rows.iter().filter(|r| r["ok"] == false).count();
    let mut o = Outcome::new(rows);
    o.aggregate("violations", bad);
    o.check("rank_non_increasing", bad == 0, format!("{bad} violations"));
    Ok(o)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct HighRankParams {
    n: usize,
    size: usize,
    m: usize,
    d: usize,
    map_trials: u64,
    acceptance: MapAcceptance,
    min_success_rate: f64,
}

impl Default for HighRankParams {
    fn default() -> Self {
        Self {
            n: 8,
            size: 32,
            m: 4,
            d: 2,
            map_trials: 50,
            acceptance: MapAcceptance::BallCover,
            min_success_rate: 0.99,
        }
    }
}

fn high_rank_subsets(p: &HighRankParams, ctx: &Ctx) -> Result<Outcome> {
    let target = binom_sum_usize(p.m, p.d).expect("small");
    let ball = binom_sum_usize(p.m, p.d / 2).expect("small");
    let rows = ctx.trials(|i, rng| {
        let a = random_subset(p.n, p.size, rng)?;
        let b = random_subset(p.n, p.size, rng)?;
        Ok(match find_high_rank_subsets(&a, &b, p.d, p.m, p.map_trials, p.acceptance, rng) {
            Ok(h) => {
                let verified = h.certificate.verify()?;
                json!({
                    "trial": i,
                    "success": true,
                    "attempts": h.attempts,
                    "rank": h.certificate.rank,
                    "a_prime": h.a_prime.len(),
                    "b_prime": h.b_prime.len(),
                    "certified": verified && h.certificate.rank >= target && h.a_prime.len() == ball && h.b_prime.len() == ball,
                    "error": "",
                })
            }
            Err(e @ (Error::RetriesExhausted { .. } | Error::Precondition(_))) => json!({
                "trial": i, "success": false, "attempts": p.map_trials, "rank": 0,
                "a_prime": 0, "b_prime": 0, "certified": false, "error": e.to_string(),
            }),
            Err(e) => return Err(e),
        })
    })?;
    let successes = rows.iter().filter(|r| r["success"] == true).count();
    let uncertified = rows
        .iter()
        .filter(|r| r["success"] == true && r["certified"] == false)
        .count();
    let success_rate = rate(successes, rows.len());
    let mut o = Outcome::new(rows);
    o.aggregate("target_rank", target);
    o.aggregate("subset_size", ball);
    o.aggregate("success_rate", success_rate);
    o.aggregate("uncertified_successes", uncertified);
    o.check(
        "success_rate",
        success_rate >= p.min_success_rate,
        format!("{success_rate} >= {}", p.min_success_rate),
    );
    o.check(
        "certified_rank",
        uncertified == 0,
        format!("{uncertified} successes without a valid certificate"),
    );
    Ok(o)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SpecialSumsetParams {
    n: usize,
    m: usize,
    d: usize,
    /// Support size of the flat sources `X` and `Y`; `2^n` is uniform.
    support_size: usize,
    map_trials: u64,
    chunk: u64,
    max_marginal_tv: f64,
    max_mixture_tv: f64,
}

impl Default for SpecialSumsetParams {
    fn default() -> Self {
        Self {
            n: 6,
            m: 6,
            d: 2,
            support_size: 64,
            map_trials: 1000,
            chunk: 1 << 14,
            max_marginal_tv: 0.2,
            max_mixture_tv: 0.15,
        }
    }
}

/// Plug-in distance between empirical counts over `F_2^n` (indexed by
/// integer) and a reference distribution.
fn plug_in_tv(counts: &[u64], reference: &Distribution) -> f64 {
    let total: u64 = counts.iter().sum();
    let n = reference.n();
    let mut tv = 0.0;
    for (x, &c) in counts.iter().enumerate() {
        let q = to_f64(&reference.probability(&BitVector::from_u64(n, x as u64)));
        tv += (c as f64 / total as f64 - q).abs();
    }
    tv / 2.0
}

fn special_sumset(p: &SpecialSumsetParams, ctx: &Ctx) -> Result<Outcome> {
    if p.n > 16 || p.chunk == 0 {
        return Err(Error::InvalidParameter(
            "need n <= 16 and chunk >= 1".into(),
        ));
    }
    let mut setup = ctx.setup();
    let (xs, ys) = if p.support_size as u64 == 1u64 << p.n {
        (all_points(p.n), all_points(p.n))
    } else {
        (
            random_subset(p.n, p.support_size, &mut setup)?,
            random_subset(p.n, p.support_size, &mut setup)?,
        )
    };
    let (x, y) = (Source::flat(p.n, xs)?, Source::flat(p.n, ys)?);
    let chunks = ctx.trials.div_ceil(p.chunk);
    let size = 1usize << p.n;
    let per_chunk: Vec<(Value, [Vec<u64>; 3])> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = derived(ctx.seed, c);
            let draws = p.chunk.min(ctx.trials - c * p.chunk);
            let mut hist = [vec![0u64; size], vec![0u64; size], vec![0u64; size]];
            let (mut failures, mut map_attempts, mut x_size, mut y_size) =
                (0u64, 0u64, 0usize, 0usize);
            for _ in 0..draws {
                match special_sumset_sampler(&x, &y, p.d, p.m, p.map_trials, &mut rng) {
                    Ok(draw) => {
                        if !draw.full_rank {
                            failures += 1;
                        }
                        map_attempts += draw.map_attempts;
                        (x_size, y_size) = (draw.x_star.len(), draw.y_star.len());
                        for v in &draw.x_star {
                            hist[0][v.to_u64() as usize] += 1;
                        }
                        for v in &draw.y_star {
                            hist[1][v.to_u64() as usize] += 1;
                        }
                        for a in &draw.x_star {
                            for b in &draw.y_star {
                                hist[2][a.xor(b).to_u64() as usize] += 1;
                            }
                        }
                    }
                    Err(Error::Precondition(_)) => failures += 1,
                    Err(e) => return Err(e),
                }
            }
            let row = json!({
                "chunk": c, "draws": draws, "full_rank_failures": failures,
                "mean_map_attempts": map_attempts as f64 / draws as f64,
                "x_star_size": x_size, "y_star_size": y_size,
            });
            Ok((row, hist))
        })
        .collect::<Result<_>>()?;
    let mut totals = [vec![0u64; size], vec![0u64; size], vec![0u64; size]];
    let mut rows = Vec::new();
    for (row, hist) in per_chunk {
        rows.push(row);
        for (t, h) in totals.iter_mut().zip(&hist) {
            t.iter_mut().zip(h).for_each(|(a, b)| *a += b);
        }
    }
    let uniform = Distribution::uniform_over(p.n, all_points(p.n))?;
    let sum = support_of(&Source::sumset(x, y)?)?;
    let (tv_x, tv_y, tv_w) = (
        plug_in_tv(&totals[0], &uniform),
        plug_in_tv(&totals[1], &uniform),
        plug_in_tv(&totals[2], &sum),
    );
    let failures: u64 = rows
        .iter()
        .map(|r| r["full_rank_failures"].as_u64().unwrap_or(0))
        .sum();
    let mut o = Outcome::new(rows);
    o.aggregate("draws", ctx.trials);
    o.aggregate("full_rank_failures", failures);
    o.aggregate("tv_x_star_uniform", tv_x);
    o.aggregate("tv_y_star_uniform", tv_y);
    o.aggregate("tv_w_star_sumset", tv_w);
    o.check(
        "every_draw_full_rank",
        failures == 0,
        format!("{failures} failing draws"),
    );
    o.check(
        "x_star_marginal",
        tv_x <= p.max_marginal_tv,
        format!("{tv_x} <= {}", p.max_marginal_tv),
    );
    o.check(
        "y_star_marginal",
        tv_y <= p.max_marginal_tv,
        format!("{tv_y} <= {}", p.max_marginal_tv),
    );
    o.check(
        "w_star_mixture",
        tv_w <= p.max_mixture_tv,
        format!("{tv_w} <= {}", p.max_mixture_tv),
    );
    Ok(o)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BiasParams {
    n: usize,
    d: usize,
    max_fraction: f64,
}

impl Default for BiasParams {
    fn default() -> Self {
        Self {
            n: 14,
            d: 2,
            max_fraction: 0.01,
        }
    }
}

fn bias_concentration(p: &BiasParams, ctx: &Ctx) -> Result<Outcome> {
    if p.d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    let threshold = (-(p.n as f64) / (4.0 * p.d as f64)).exp2();
    let rows = ctx.trials(|i, rng| {
        let f = sample_poly(p.n, p.d, rng)?;
        let b = bias_uniform(&f)?;
        let abs = to_f64(&b.abs());
        Ok(json!({"trial": i, "bias": b.to_string(), "abs_bias": abs, "exceeds": abs > threshold}))
    })?;
    let exceed = rows.iter().filter(|r| r["exceeds"] == true).count();
    let max = rows
        .iter()
        .filter_map(|r| r["abs_bias"].as_f64())
        .fold(0.0, f64::max);
    let fraction = rate(exceed, rows.len());
    let mut o = Outcome::new(rows);
    o.aggregate("threshold", threshold);
    o.aggregate("fraction_exceeding", fraction);
    o.aggregate("max_abs_bias", max);
    o.check(
        "tail_fraction",
        fraction <= p.max_fraction,
        format!("{fraction} <= {}", p.max_fraction),
    );
    Ok(o)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TwoSourceParams {
    n: usize,
    r: usize,
    max_degree: usize,
}

impl Default for TwoSourceParams {
    fn default() -> Self {
        Self {
            n: 3,
            r: 33,
            max_degree: 4,
        }
    }
}

fn two_source(p: &TwoSourceParams, ctx: &Ctx) -> Result<Outcome> {
    let rows = ctx.trials(|i, rng| {
        let seed: u64 = rng.gen();
        let desc = build_two_source(p.n, Some(p.r), seed)?;
        let degree = two_source_degree(&desc)?;
        Ok(json!({"trial": i, "build_seed": seed, "degree": degree, "ok": degree <= p.max_degree}))
    })?;
    let bad = rows.iter().filter(|r| r["ok"] == false).count();
    let max = rows
        .iter()
        .filter_map(|r| r["degree"].as_u64())
        .max()
        .unwrap_or(0);
    let mut o = Outcome::new(rows);
    o.aggregate("max_degree_seen", max);
    o.check(
        "degree_bound",
        bad == 0,
        format!("{bad} instances above degree {}", p.max_degree),
    );
    Ok(o)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SeededParams {
    n: usize,
    t: usize,
    degrees: Vec<usize>,
    /// Message length of the instance whose full ANF is computed.
    anf_n: usize,
}

impl Default for SeededParams {
    fn default() -> Self {
        Self {
            n: 8,
            t: 3,
            degrees: vec![1, 2],
            anf_n: 4,
        }
    }
}

fn seeded_structure(p: &SeededParams, ctx: &Ctx) -> Result<Outcome> {
    let rows: Vec<Vec<Value>> = ctx.trials(|i, rng| {
        let seed: u64 = rng.gen();
        let mut rows = Vec::new();
        for &d in &p.degrees {
            let desc = build_seeded(p.n, p.t, d, seed)?;
            let mut linear = true;
            for y in 0..1u64 << p.t {
                let yv = BitVector::from_u64(p.t, y);
                let g = BitVector::from_bits(
                    (0..p.n)
                        .map(|j| eval_seeded(&desc, &BitVector::unit(p.n, j), &yv))
                        .collect::<Result<Vec<_>>>()?,
                );
                for x in 0..1u64 << p.n {
                    let xv = BitVector::from_u64(p.n, x);
                    linear &= eval_seeded(&desc, &xv, &yv)? == g.dot(&xv);
                }
            }
            let small = build_seeded(p.anf_n, p.t, d, seed)?;
            let f = anf_from_truth_table(&seeded_truth_table(&small)?)?;
            let (ld, rd) = (left_degree(&f, p.anf_n), right_degree(&f, p.anf_n));
            let code = CodeView::new(desc.code_generator()?)?;
            let eps = measured_epsilon(&code)?;
            let j = johnson_check(&code, &eps)?;
            rows.push(json!({
                "trial": i, "build_seed": seed, "d": d, "linear_in_x": linear,
                "anf_left_degree": ld, "anf_right_degree": rd,
                "epsilon": eps.to_string(), "johnson_distance": j.max_distance,
                "max_list_size": j.max_list_size, "johnson_pass": j.verdict.passed(),
                "ok": linear && ld <= 1 && rd <= d && j.verdict.passed(),
            }));
        }
        Ok(rows)
    })?;
    let rows: Vec<Value> = rows.into_iter().flatten().collect();
    let count = |k: &str| rows.iter().filter(|r| r[k] == false).count();
    let (nonlinear, johnson) = (count("linear_in_x"), count("johnson_pass"));
    let right = rows
        .iter()
        .filter(|r| {
            r["anf_right_degree"].as_u64() > r["d"].as_u64()
                || r["anf_left_degree"].as_u64() > Some(1)
        })
        .count();
    let mut o = Outcome::new(rows);
    o.aggregate("nonlinear_instances", nonlinear);
    o.aggregate("degree_violations", right);
    o.aggregate("johnson_failures", johnson);
    o.check(
        "left_degree_one",
        nonlinear == 0,
        format!("{nonlinear} instances not linear in x"),
    );
    o.check(
        "right_degree",
        right == 0,
        format!("{right} ANF degree violations"),
    );
    o.check(
        "johnson",
        johnson == 0,
        format!("{johnson} Johnson failures"),
    );
    Ok(o)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EnergyParams {
    k: usize,
    ell: usize,
    t: usize,
    ambient: usize,
    retries: u64,
    min_success_rate: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            k: 8,
            ell: 5,
            t: 7,
            ambient: 10,
            retries: 100,
            min_success_rate: 0.99,
        }
    }
}

fn energy(p: &EnergyParams, ctx: &Ctx) -> Result<Outcome> {
    let cap = (p.ell * p.ell) as u128 * (1u128 << (2 * (p.k - p.t.min(p.k))));
    let rows = ctx.trials(|i, rng| {
        let x = random_subset(p.ambient, 1 << p.k, rng)?;
        let y = random_subset(p.ambient, 1 << p.k, rng)?;
        Ok(match energy_partition(&x, &y, p.t, p.ell, rng, p.retries) {
            Ok(part) => {
                let mut max_energy = 0u128;
                for a in &part.x_parts {
                    for b in &part.y_parts {
                        max_energy = max_energy.max(additive_energy(a, b)?.to_u128().expect("bounded"));
                    }
                }
                let mut xs = part.x_parts.concat();
                xs.sort();
                let mut ys = part.y_parts.concat();
                ys.sort();
                let sizes = part.x_parts.iter().chain(&part.y_parts).all(|q| q.len() == 1 << (p.k - p.t));
                json!({
                    "trial": i, "success": true, "retries_used": part.retries_used, "max_fiber": part.max_fiber,
                    "max_pair_energy": max_energy.to_string(), "cap_ok": max_energy <= cap,
                    "partition_ok": xs == x && ys == y && sizes,
                })
            }
            Err(Error::RetriesExhausted { .. }) => json!({
                "trial": i, "success": false, "retries_used": p.retries, "max_fiber": 0,
                "max_pair_energy": "", "cap_ok": true, "partition_ok": true,
            }),
            Err(e) => return Err(e),
        })
    })?;
    let successes = rows.iter().filter(|r| r["success"] == true).count();
    let broken = rows
        .iter()
        .filter(|r| r["cap_ok"] == false || r["partition_ok"] == false)
        .count();
    let success_rate = rate(successes, rows.len());
    let mut o = Outcome::new(rows);
    o.aggregate("energy_cap", cap.to_string());
    o.aggregate("success_rate", success_rate);
    o.check(
        "success_rate",
        success_rate >= p.min_success_rate,
        format!("{success_rate} >= {}", p.min_success_rate),
    );
    o.check(
        "energy_cap_reverified",
        broken == 0,
        format!("{broken} partitions failing re-verification"),
    );
    Ok(o)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CwParams {
    n_min: usize,
    n_max: usize,
    d_max: usize,
    t_max: usize,
}

impl Default for CwParams {
    fn default() -> Self {
        Self {
            n_min: 4,
            n_max: 12,
            d_max: 3,
            t_max: 4,
        }
    }
}

fn cw_shifts(p: &CwParams, ctx: &Ctx) -> Result<Outcome> {
    let rows = ctx.trials(|i, rng| {
        let n = rng.gen_range(p.n_min.max(1)..=p.n_max);
        let d = rng.gen_range(1..=p.d_max);
        let t = rng.gen_range(1..=p.t_max.min(n));
        let basis = random_independent(n, t, rng)?;
        let f = sample_vanishing_poly(n, d, &basis, rng)?;
        let r = cw_shift_count(&f, &basis)?;
        Ok(json!({
            "trial": i, "n": n, "d": d, "t": t, "degree": f.degree(), "count": r.count,
            "bound_exponent": r.bound_exponent, "pass": r.verdict.passed(),
        }))
    })?;
    let bad = rows.iter().filter(|r| r["pass"] == false).count();
    let mut o = Outcome::new(rows);
    o.aggregate("failures", bad);
    o.check(
        "shift_count_bound",
        bad == 0,
        format!("{bad} trials below the bound"),
    );
    Ok(o)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DisperserParams {
    n: usize,
    d: usize,
    t: usize,
    budget: u64,
}

impl Default for DisperserParams {
    fn default() -> Self {
        Self {
            n: 8,
            d: 2,
            t: 2,
            budget: 200,
        }
    }
}

/// Re-checks a witness by evaluating the polynomials themselves, after a
/// JSON round trip.
fn reverify_disperser(family: &[Polynomial], w: &AttackWitness) -> Result<bool> {
    let w = AttackWitness::from_json(&w.to_json())?;
    let Some(value) = w.value else {
        return Ok(false);
    };
    for y in &w.b {
        let f = &family[y.to_u64() as usize];
        for x in &w.a {
            if f.evaluate(x)? != value {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn disperser(p: &DisperserParams, ctx: &Ctx) -> Result<Outcome> {
    let rows = ctx.trials(|i, rng| {
        let family: Vec<Polynomial> = (0..1u64 << p.n).map(|_| sample_poly(p.n, p.d, rng)).collect::<Result<_>>()?;
        let (_, tables) = crate::oracles::family_tables(&family)?;
        Ok(match disperser_attack(&tables, p.n, p.t, p.budget, rng) {
            Ok(w) => {
                let complete = w.params.get("complete") == Some(&Value::Bool(true));
                json!({
                    "trial": i, "witness": true, "complete": complete, "x_size": w.a.len(), "y_size": w.b.len(),
                    "value": w.value, "verified": w.verified, "reverified": reverify_disperser(&family, &w)?,
                })
            }
            Err(Error::RetriesExhausted { .. }) => json!({
                "trial": i, "witness": false, "complete": false, "x_size": 0, "y_size": 0,
                "value": null, "verified": false, "reverified": false,
            }),
            Err(e) => return Err(e),
        })
    })?;
    let witnesses = rows.iter().filter(|r| r["witness"] == true).count();
    let bad = rows
        .iter()
        .filter(|r| r["witness"] == true && (r["verified"] == false || r["reverified"] == false))
        .count();
    let complete = rows.iter().filter(|r| r["complete"] == true).count();
    let success_rate = rate(complete, rows.len());
    let mut o = Outcome::new(rows);
    o.aggregate("witnesses", witnesses);
    o.aggregate("success_rate", success_rate);
    o.check(
        "witnesses_verify",
        bad == 0,
        format!("{bad} witnesses failing re-verification"),
    );
    o.check(
        "some_success",
        complete >= 1,
        format!("{complete} full-size witnesses"),
    );
    Ok(o)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DichotomyParams {
    n_max: usize,
    max_draws: u64,
}

impl Default for DichotomyParams {
    fn default() -> Self {
        Self {
            n_max: 6,
            max_draws: 100_000,
        }
    }
}

fn dichotomy(p: &DichotomyParams, ctx: &Ctx) -> Result<Outcome> {
    if p.n_max < 2 {
        return Err(Error::InvalidParameter("n_max must be at least 2".into()));
    }
    let rows = ctx.trials(|i, rng| {
        for _ in 0..p.max_draws {
            let n = rng.gen_range(2..=p.n_max);
            let a = random_subset(n, rng.gen_range(1..=1 << n), rng)?;
            let b = random_subset(n, rng.gen_range(1..=1 << n), rng)?;
            let r = dichotomy_check(&a, &b)?;
            if r.dim_a + r.dim_b > n + 1 {
                return Ok(json!({
                    "trial": i, "n": n, "dim_a": r.dim_a, "dim_b": r.dim_b,
                    "values": r.values.iter().map(|&v| if v { "1" } else { "0" }).collect::<Vec<_>>().join(""),
                    "ok": r.values == [false, true],
                }));
            }
        }
        Err(Error::RetriesExhausted {
            what: "pair with large dimensions",
            attempts: p.max_draws,
        })
    })?;
    let bad = rows.iter().filter(|r| r["ok"] == false).count();
    let mut o = Outcome::new(rows);
    o.aggregate("violations", bad);
    o.check(
        "both_values",
        bad == 0,
        format!("{bad} pairs missing a value"),
    );
    Ok(o)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct VarietyParams {
    n_max: usize,
    t_max: usize,
    d: usize,
    budget: u64,
    max_mean_attempts: f64,
}

impl Default for VarietyParams {
    fn default() -> Self {
        Self {
            n_max: 10,
            t_max: 20,
            d: 2,
            budget: 1000,
            max_mean_attempts: 2.0,
        }
    }
}

fn common_zeros(polys: &[Polynomial], n: usize) -> Vec<u64> {
    (0..1u64 << n)
        .filter(|&x| polys.iter().all(|p| !p.evaluate_u64(x)))
        .collect()
}

fn variety_reduction(p: &VarietyParams, ctx: &Ctx) -> Result<Outcome> {
    let rows = ctx.trials(|i, rng| {
        let n = rng.gen_range(1..=p.n_max);
        let t = rng.gen_range(1..=p.t_max);
        let polys: Vec<Polynomial> = (0..t)
            .map(|_| sample_poly(n, p.d.min(n), rng))
            .collect::<Result<_>>()?;
        let red = variety_reduce(&polys, rng, p.budget)?;
        let (before, after) = (common_zeros(&polys, n), common_zeros(&red.polys, n));
        Ok(json!({
            "trial": i, "n": n, "t": t, "output_polys": red.polys.len(), "attempts": red.attempts,
            "variety_size": before.len(), "equal": before == after,
        }))
    })?;
    let bad = rows.iter().filter(|r| r["equal"] == false).count();
    let mean = rows
        .iter()
        .filter_map(|r| r["attempts"].as_u64())
        .sum::<u64>() as f64
        / rows.len() as f64;
    let mut o = Outcome::new(rows);
    o.aggregate("mean_attempts", mean);
    o.aggregate("mismatches", bad);
    o.check(
        "variety_preserved",
        bad == 0,
        format!("{bad} systems with a changed zero set"),
    );
    o.check(
        "mean_attempts",
        mean <= p.max_mean_attempts,
        format!("{mean} <= {}", p.max_mean_attempts),
    );
    Ok(o)
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RandomFunctionParams {
    n: usize,
    k: usize,
    pairs: usize,
    max_bias: f64,
    /// Pairs are redrawn until `E(X, Y) <= energy_factor · |X| |Y|`.
    energy_factor: u64,
    min_rate: f64,
}

impl Default for RandomFunctionParams {
    fn default() -> Self {
        Self {
            n: 8,
            k: 4,
            pairs: 100,
            max_bias: 0.25,
            energy_factor: 16,
            min_rate: 0.95,
        }
    }
}

fn random_function_sumset(p: &RandomFunctionParams, ctx: &Ctx) -> Result<Outcome> {
    if p.n > 20 || p.k > p.n {
        return Err(Error::InvalidParameter("need k <= n <= 20".into()));
    }
    let order = MonomialOrder::shared(p.n, p.n)?;
    let rows = ctx.trials(|i, rng| {
        let table = BitVector::random(1 << p.n, rng);
        let f = anf_from_truth_table(&table)?.recast(&order)?;
        let size = 1usize << p.k;
        let mut worst = BigRational::default();
        let mut redraws = 0u64;
        for _ in 0..p.pairs {
            let (x, y) = loop {
                let (x, y) = (random_subset(p.n, size, rng)?, random_subset(p.n, size, rng)?);
                let e = additive_energy(&x, &y)?;
                if e <= (p.energy_factor * (size * size) as u64).into() {
                    break (x, y);
                }
                redraws += 1;
            };
            let dist = support_of(&Source::sumset(Source::flat(p.n, x)?, Source::flat(p.n, y)?)?)?;
            let b = bias_of_distribution(&f, &dist)?.abs();
            if b > worst {
                worst = b;
            }
        }
        let max = to_f64(&worst);
        Ok(json!({"trial": i, "max_abs_bias": max, "energy_redraws": redraws, "ok": max <= p.max_bias}))
    })?;
    let good = rows.iter().filter(|r| r["ok"] == true).count();
    let pass_rate = rate(good, rows.len());
    let mut o = Outcome::new(rows);
    o.aggregate("pass_rate", pass_rate);
    o.check(
        "pass_rate",
        pass_rate >= p.min_rate,
        format!("{pass_rate} >= {}", p.min_rate),
    );
    Ok(o)
}
