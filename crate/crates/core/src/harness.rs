//! Benchmark problems, seeded sweeps and first-hitting statistics.
//!
//! Every `(problem, run)` pair gets one seed shared by all algorithms; the
//! training set and the algorithm draw from separate ChaCha streams of it.
//! A run is executed once and its trajectory read off at every tolerance.

use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::HarnessError;
use crate::expr::OperatorSet;
use crate::ftg::{run_ftg, FtgConfig};
use crate::gp::{run_gp, GpConfig};
use crate::hilbert::DataSet;

pub const TRAINING_POINTS: usize = 20;

/// `10⁰, 10⁻¹, …, 10⁻⁸`
pub fn tolerance_grid() -> Vec<f64> {
    (0..=8).map(|e| 10f64.powi(-e)).collect()
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub name: &'static str,
    /// Closed form as an s-expression over `x0`.
    pub expression: &'static str,
    pub bounds: (f64, f64),
    pub target: fn(f64) -> f64,
    pub n_points: usize,
}

impl ProblemSpec {
    pub fn operator_set(&self) -> OperatorSet<f64> {
        OperatorSet::conventional()
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> DataSet<f64> {
        let f = self.target;
        DataSet::sample(vec![self.bounds], self.n_points, |x| f(x[0]), rng).expect("valid bounds")
    }
}

fn spec(name: &'static str, expression: &'static str, bounds: (f64, f64), target: fn(f64) -> f64) -> ProblemSpec {
    ProblemSpec { name, expression, bounds, target, n_points: TRAINING_POINTS }
}

pub fn load_problems() -> Vec<ProblemSpec> {
    let u = (-1.0, 1.0);
    vec![
        spec("koza1", "(+ (* (* x0 x0) (* x0 x0)) (+ (* (* x0 x0) x0) (+ (* x0 x0) x0)))", u, |x| {
            x.powi(4) + x.powi(3) + x.powi(2) + x
        }),
        spec("koza2", "(+ (- (* (* x0 x0) (* (* x0 x0) x0)) (* 2 (* (* x0 x0) x0))) x0)", u, |x| {
            x.powi(5) - 2.0 * x.powi(3) + x
        }),
        spec(
            "koza3",
            "(+ (- (* (* (* x0 x0) (* x0 x0)) (* x0 x0)) (* 2 (* (* x0 x0) (* x0 x0)))) (* x0 x0))",
            u,
            |x| x.powi(6) - 2.0 * x.powi(4) + x.powi(2),
        ),
        spec(
            "nguyen3",
            "(* x0 (+ 1 (* x0 (+ 1 (* x0 (+ 1 (* x0 (+ 1 x0))))))))",
            u,
            |x| x.powi(5) + x.powi(4) + x.powi(3) + x.powi(2) + x,
        ),
        spec(
            "nguyen4",
            "(* x0 (+ 1 (* x0 (+ 1 (* x0 (+ 1 (* x0 (+ 1 (* x0 (+ 1 x0))))))))))",
            u,
            |x| x.powi(6) + x.powi(5) + x.powi(4) + x.powi(3) + x.powi(2) + x,
        ),
        spec("nguyen5", "(- (* (sin (* x0 x0)) (cos x0)) 1)", u, |x| (x * x).sin() * x.cos() - 1.0),
        spec("nguyen6", "(+ (sin x0) (sin (+ x0 (* x0 x0))))", u, |x| x.sin() + (x + x * x).sin()),
        spec("nguyen7", "(+ (ln (+ x0 1)) (ln (+ (* x0 x0) 1)))", (0.0, 2.0), |x| (x + 1.0).ln() + (x * x + 1.0).ln()),
        spec("nguyen8", "", (0.0, 4.0), f64::sqrt),
    ]
}

pub fn find_problem(name: &str) -> Result<ProblemSpec, HarnessError> {
    load_problems()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| HarnessError::UnknownProblem(name.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "ftg")]
    Ftg,
    #[serde(rename = "gp11")]
    Gp11,
    #[serde(rename = "gp1l")]
    Gp1l,
    #[serde(rename = "canonical")]
    Canonical,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Ftg, Algorithm::Gp11, Algorithm::Gp1l, Algorithm::Canonical];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ftg => "ftg",
            Algorithm::Gp11 => "gp11",
            Algorithm::Gp1l => "gp1l",
            Algorithm::Canonical => "canonical",
        }
    }

    pub fn gp_config(self) -> Option<GpConfig> {
        match self {
            Algorithm::Ftg => None,
            Algorithm::Gp11 => Some(GpConfig::one_plus_one()),
            Algorithm::Gp1l => Some(GpConfig::one_plus_lambda(500)),
            Algorithm::Canonical => Some(GpConfig::canonical()),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| HarnessError::UnknownAlgorithm(s.into()))
    }
}

/// Seed of run `run` on problem `problem`, independent of the algorithm.
pub fn derive_seed(master: u64, problem: usize, run: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((problem as u64) << 32) | run as u64);
    rng.next_u64()
}

pub fn dataset_rng(run_seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    rng.set_stream(0);
    rng
}

pub fn algorithm_rng(run_seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    rng.set_stream(1);
    rng
}

/// `inf`, `-inf`, `nan` or the shortest round-tripping decimal.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        x.to_string()
    }
}

pub fn parse_f64(s: &str) -> Result<f64, HarnessError> {
    match s.trim() {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        t => t.parse().map_err(|_| HarnessError::Invalid(format!("not a number: `{t}`"))),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrStr<N> {
    Num(N),
    Str(String),
}

mod inf_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&fmt_f64(*x))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match NumOrStr::<f64>::deserialize(d)? {
            NumOrStr::Num(x) => Ok(x),
            NumOrStr::Str(s) => parse_f64(&s).map_err(serde::de::Error::custom),
        }
    }
}

mod inf_fe {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Option<u64>], s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            match x {
                Some(n) => seq.serialize_element(n)?,
                None => seq.serialize_element("inf")?,
            }
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<u64>>, D::Error> {
        Vec::<NumOrStr<u64>>::deserialize(d)?
            .into_iter()
            .map(|x| match x {
                NumOrStr::Num(n) => Ok(Some(n)),
                NumOrStr::Str(s) if s == "inf" => Ok(None),
                NumOrStr::Str(s) => Err(serde::de::Error::custom(format!("bad FE value `{s}`"))),
            })
            .collect()
    }
}

/// One run of one algorithm on one problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub algorithm: Algorithm,
    pub run: usize,
    pub seed: u64,
    pub budget: u64,
    pub tolerances: Vec<f64>,
    /// First-hitting FE per tolerance; `None` (serialized `inf`) for a miss.
    #[serde(with = "inf_fe")]
    pub fe: Vec<Option<u64>>,
    #[serde(with = "inf_f64")]
    pub final_loss: f64,
    pub total_fe: u64,
    pub termination: String,
    pub model: String,
}

fn first_hits(trace: &[(u64, f64)], grid: &[f64]) -> Vec<Option<u64>> {
    grid.iter()
        .map(|&tol| trace.iter().find(|(_, loss)| *loss < tol).map(|(fe, _)| *fe))
        .collect()
}

/// Runs `algorithm` once on a fresh training set drawn from `seed`.
pub fn run_single(
    problem: &ProblemSpec,
    algorithm: Algorithm,
    run: usize,
    seed: u64,
    budget: u64,
    grid: &[f64],
) -> RunRecord {
    let data = problem.sample(&mut dataset_rng(seed));
    let mut rng = algorithm_rng(seed);
    let opset = problem.operator_set();
    let smallest = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let (trace, final_loss, total_fe, termination, model) = match algorithm.gp_config() {
        None => {
            let config = FtgConfig { budget, stop_below: Some(smallest), ..FtgConfig::default() };
            let r = run_ftg(&data, &opset, &config, &mut rng);
            let trace: Vec<_> = r.loss_trace.iter().map(|p| (p.traversals, p.loss)).collect();
            let term = serde_json::to_value(r.termination).ok().and_then(|v| v.as_str().map(String::from));
            (trace, r.final_loss, r.traversals, term.unwrap_or_default(), r.model.to_string())
        }
        Some(mut config) => {
            config.budget = budget;
            config.stop_below = Some(smallest);
            let r = run_gp(&data, &opset, &config, &mut rng);
            let trace: Vec<_> = r.trace.iter().map(|g| (g.fe, g.best_loss)).collect();
            let term = serde_json::to_value(r.termination).ok().and_then(|v| v.as_str().map(String::from));
            (trace, r.best.loss, r.fe, term.unwrap_or_default(), r.best.tree.to_string())
        }
    };
    RunRecord {
        problem: problem.name.into(),
        algorithm,
        run,
        seed,
        budget,
        tolerances: grid.to_vec(),
        fe: first_hits(&trace, grid),
        final_loss,
        total_fe,
        termination,
        model,
    }
}

/// All `(problem, algorithm, run)` triples, in parallel, in a fixed order.
pub fn run_sweep(
    problems: &[ProblemSpec],
    algorithms: &[Algorithm],
    runs: usize,
    budget: u64,
    master_seed: u64,
    grid: &[f64],
) -> Vec<RunRecord> {
    let all = load_problems();
    let jobs: Vec<(&ProblemSpec, usize, Algorithm, usize)> = problems
        .iter()
        .flat_map(|p| {
            // problem index in the full table, so seeds do not depend on the selection
            let pi = all.iter().position(|q| q.name == p.name).unwrap_or(usize::MAX >> 32);
            algorithms.iter().flat_map(move |&a| (0..runs).map(move |r| (p, pi, a, r)))
        })
        .collect();
    jobs.par_iter()
        .map(|&(p, pi, a, r)| run_single(p, a, r, derive_seed(master_seed, pi, r), budget, grid))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub problem: String,
    pub algorithm: Algorithm,
    pub tolerance: f64,
    pub mean_fe: f64,
    pub sd: f64,
    pub sem: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Percent of all runs.
    pub success_rate: f64,
}

/// Linear interpolation between closest ranks of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::INFINITY,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * q;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

/// Statistics of successful FE values out of `total` runs.
pub fn cell_stats(successes: &[f64], total: usize) -> (f64, f64, f64, f64, f64, f64, f64) {
    let n = successes.len();
    let rate = if total == 0 { 0.0 } else { 100.0 * n as f64 / total as f64 };
    if n == 0 {
        let inf = f64::INFINITY;
        return (inf, 0.0, 0.0, inf, inf, inf, rate);
    }
    let mut xs = successes.to_vec();
    xs.sort_by(f64::total_cmp);
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let sem = sd / (n as f64).sqrt();
    (mean, sd, sem, quantile(&xs, 0.25), quantile(&xs, 0.5), quantile(&xs, 0.75), rate)
}

/// One row per `(problem, algorithm, tolerance)` in first-appearance order.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateStats> {
    let mut keys: Vec<(String, Algorithm)> = Vec::new();
    for r in records {
        let k = (r.problem.clone(), r.algorithm);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut out = Vec::new();
    for (problem, algorithm) in keys {
        let group: Vec<&RunRecord> = records.iter().filter(|r| r.problem == problem && r.algorithm == algorithm).collect();
        let grid = &group[0].tolerances;
        for (t, &tolerance) in grid.iter().enumerate() {
            let hits: Vec<f64> = group.iter().filter_map(|r| r.fe.get(t).copied().flatten()).map(|x| x as f64).collect();
            let (mean_fe, sd, sem, q1, median, q3, success_rate) = cell_stats(&hits, group.len());
            out.push(AggregateStats {
                problem: problem.clone(),
                algorithm,
                tolerance,
                mean_fe,
                sd,
                sem,
                q1,
                median,
                q3,
                success_rate,
            });
        }
    }
    out
}

pub const STATS_HEADER: [&str; 10] =
    ["problem", "algorithm", "tolerance", "mean_fe", "sd", "sem", "q1", "median", "q3", "success_rate"];

pub fn write_stats_csv<W: io::Write>(stats: &[AggregateStats], writer: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(STATS_HEADER)?;
    for s in stats {
        let mut row = vec![s.problem.clone(), s.algorithm.name().to_string()];
        row.extend(
            [s.tolerance, s.mean_fe, s.sd, s.sem, s.q1, s.median, s.q3, s.success_rate].map(fmt_f64),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_stats_csv<R: io::Read>(reader: R) -> Result<Vec<AggregateStats>, HarnessError> {
    let mut r = csv::Reader::from_reader(reader);
    if r.headers()?.iter().ne(STATS_HEADER) {
        return Err(HarnessError::Invalid("unexpected stats header".into()));
    }
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let f = |i: usize| parse_f64(&row[i]);
        out.push(AggregateStats {
            problem: row[0].to_string(),
            algorithm: row[1].parse()?,
            tolerance: f(2)?,
            mean_fe: f(3)?,
            sd: f(4)?,
            sem: f(5)?,
            q1: f(6)?,
            median: f(7)?,
            q3: f(8)?,
            success_rate: f(9)?,
        });
    }
    Ok(out)
}

pub fn write_records_json<W: io::Write>(records: &[RunRecord], writer: W) -> Result<(), HarnessError> {
    let mut w = io::BufWriter::new(writer);
    serde_json::to_writer_pretty(&mut w, records)?;
    io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

pub fn read_records_json<R: io::Read>(reader: R) -> Result<Vec<RunRecord>, HarnessError> {
    Ok(serde_json::from_reader(io::BufReader::new(reader))?)
}

/// FTG against the best GP baseline at one `(problem, tolerance)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatCell {
    pub problem: String,
    pub tolerance: f64,
    /// FTG success rate minus the highest GP success rate, in percentage points.
    pub success_diff: f64,
    /// FTG median over the lowest GP median; NaN when FTG never succeeded.
    pub median_ratio: f64,
}

pub fn heatmap_delta(stats: &[AggregateStats]) -> Vec<HeatCell> {
    let mut out = Vec::new();
    for ftg in stats.iter().filter(|s| s.algorithm == Algorithm::Ftg) {
        let gp: Vec<&AggregateStats> = stats
            .iter()
            .filter(|s| s.algorithm != Algorithm::Ftg && s.problem == ftg.problem && s.tolerance == ftg.tolerance)
            .collect();
        if gp.is_empty() {
            continue;
        }
        let best_rate = gp.iter().map(|s| s.success_rate).fold(f64::NEG_INFINITY, f64::max);
        let best_median = gp.iter().map(|s| s.median).fold(f64::INFINITY, f64::min);
        let median_ratio = if ftg.median.is_finite() { ftg.median / best_median } else { f64::NAN };
        out.push(HeatCell {
            problem: ftg.problem.clone(),
            tolerance: ftg.tolerance,
            success_diff: ftg.success_rate - best_rate,
            median_ratio,
        });
    }
    out
}

pub fn write_heatmap_csv<W: io::Write>(cells: &[HeatCell], writer: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["problem", "tolerance", "success_diff", "median_ratio"])?;
    for c in cells {
        w.write_record([c.problem.clone(), fmt_f64(c.tolerance), fmt_f64(c.success_diff), fmt_f64(c.median_ratio)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `records.json` and `stats.csv` into `dir`.
pub fn save_sweep(records: &[RunRecord], dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    write_records_json(records, std::fs::File::create(dir.join("records.json"))?)?;
    write_stats_csv(&aggregate(records), std::fs::File::create(dir.join("stats.csv"))?)?;
    Ok(())
}
