//! Benchmark roster, suite runner and report emission.

pub mod generators;

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Circuit;
use crate::compile::{compile, CompileOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("no simple {d}-regular graph on {n} vertices")]
    InfeasibleGraph { n: usize, d: usize },
    #[error("invalid benchmark: {0}")]
    InvalidSpec(String),
    #[error("unknown suite {0}")]
    UnknownSuite(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "name")]
pub enum BenchmarkSpec {
    Adder,
    Shor,
    Qaoa {
        n: usize,
        d: usize,
        p: usize,
        seed: u64,
    },
    Qft {
        n: usize,
    },
    /// All-ones secret.
    Bv {
        n: usize,
    },
    Ising {
        n: usize,
        steps: usize,
    },
    Cat {
        n: usize,
    },
    RandomRegular {
        n: usize,
        d: usize,
        seed: u64,
    },
}

impl BenchmarkSpec {
    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkSpec::Adder => "Adder",
            BenchmarkSpec::Shor => "Shor",
            BenchmarkSpec::Qaoa { .. } => "QAOA",
            BenchmarkSpec::Qft { .. } => "QFT",
            BenchmarkSpec::Bv { .. } => "BV",
            BenchmarkSpec::Ising { .. } => "Ising",
            BenchmarkSpec::Cat { .. } => "Cat",
            BenchmarkSpec::RandomRegular { .. } => "RandomRegular",
        }
    }

    pub fn n_qubits(&self) -> usize {
        match *self {
            BenchmarkSpec::Adder => 4,
            BenchmarkSpec::Shor => 5,
            BenchmarkSpec::Qaoa { n, .. }
            | BenchmarkSpec::Qft { n }
            | BenchmarkSpec::Bv { n }
            | BenchmarkSpec::Ising { n, .. }
            | BenchmarkSpec::Cat { n }
            | BenchmarkSpec::RandomRegular { n, .. } => n,
        }
    }

    /// Two-qubit gate count implied by the construction.
    pub fn expected_cz(&self) -> usize {
        match *self {
            BenchmarkSpec::Adder => 10,
            BenchmarkSpec::Shor => 17,
            BenchmarkSpec::Qaoa { n, d, p, .. } => 2 * p * n * d / 2,
            BenchmarkSpec::Qft { n } => n * (n - 1) + 3 * (n / 2),
            BenchmarkSpec::Bv { n } => n - 1,
            BenchmarkSpec::Ising { n, steps } => 2 * steps * n.saturating_sub(1),
            BenchmarkSpec::Cat { n } => n.saturating_sub(1),
            BenchmarkSpec::RandomRegular { n, d, .. } => n * d / 2,
        }
    }

    pub fn is_randomized(&self) -> bool {
        matches!(
            self,
            BenchmarkSpec::Qaoa { .. } | BenchmarkSpec::RandomRegular { .. }
        )
    }

    /// Same spec with its graph seed replaced (no-op for fixed circuits).
    pub fn with_seed(&self, seed: u64) -> Self {
        match *self {
            BenchmarkSpec::Qaoa { n, d, p, .. } => BenchmarkSpec::Qaoa { n, d, p, seed },
            BenchmarkSpec::RandomRegular { n, d, .. } => {
                BenchmarkSpec::RandomRegular { n, d, seed }
            }
            ref other => other.clone(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            BenchmarkSpec::Qaoa { n, d, p, .. } => format!("QAOA(n={n},d={d},p={p})"),
            BenchmarkSpec::Ising { n, steps } => format!("Ising(n={n},steps={steps})"),
            BenchmarkSpec::RandomRegular { n, d, .. } => format!("RandomRegular(n={n},d={d})"),
            other => format!("{}({})", other.name(), other.n_qubits()),
        }
    }
}

pub fn generate_benchmark(spec: &BenchmarkSpec) -> Result<Circuit, BenchError> {
    let c = match *spec {
        BenchmarkSpec::Adder => generators::adder4(),
        BenchmarkSpec::Shor => generators::shor5(),
        BenchmarkSpec::Qaoa { n, d, p, seed } => generators::qaoa(n, d, p, seed)?,
        BenchmarkSpec::Qft { n } => generators::qft(n),
        BenchmarkSpec::Bv { n } => {
            generators::bernstein_vazirani(n, &vec![true; n.saturating_sub(1)])?
        }
        BenchmarkSpec::Ising { n, steps } => generators::ising(n, steps),
        BenchmarkSpec::Cat { n } => generators::cat(n),
        BenchmarkSpec::RandomRegular { n, d, seed } => generators::random_regular(n, d, seed)?,
    };
    Ok(c)
}

/// The seven standard benchmarks: Adder, Shor, QAOA, QFT, BV, Ising and Cat.
pub fn table1() -> Vec<BenchmarkSpec> {
    vec![
        BenchmarkSpec::Adder,
        BenchmarkSpec::Shor,
        BenchmarkSpec::Qaoa {
            n: 6,
            d: 3,
            p: 3,
            seed: 0,
        },
        BenchmarkSpec::Qft { n: 10 },
        BenchmarkSpec::Bv { n: 14 },
        BenchmarkSpec::Ising { n: 26, steps: 1 },
        BenchmarkSpec::Cat { n: 35 },
    ]
}

/// Random 3-regular circuits for n = 10, 20, …, 100.
pub fn scaling() -> Vec<BenchmarkSpec> {
    (1..=10)
        .map(|k| BenchmarkSpec::RandomRegular {
            n: 10 * k,
            d: 3,
            seed: 0,
        })
        .collect()
}

/// The standard suite plus one 100-qubit, 200-gate random 4-regular circuit.
pub fn stress() -> Vec<BenchmarkSpec> {
    let mut specs = table1();
    specs.push(BenchmarkSpec::RandomRegular {
        n: 100,
        d: 4,
        seed: 0,
    });
    specs
}

pub fn suite(name: &str) -> Result<Vec<BenchmarkSpec>, BenchError> {
    match name {
        "table1" => Ok(table1()),
        "scaling" => Ok(scaling()),
        "stress" => Ok(stress()),
        other => Err(BenchError::UnknownSuite(other.into())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub spec: BenchmarkSpec,
    pub seed: u64,
    pub n_qubits: usize,
    pub cz: usize,
    pub stages: usize,
    pub batches: usize,
    pub n_trans: usize,
    pub n_res: usize,
    pub total_time_us: f64,
    pub fidelity: f64,
    pub terms: Vec<(String, f64)>,
    pub compile_ms: f64,
    /// The annealed placement could not be routed and the greedy one was used.
    pub fell_back: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub label: String,
    pub runs: usize,
    pub mean_fidelity: f64,
    /// Sample standard deviation; zero for a single run.
    pub stddev_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SuiteResult {
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
}

fn run_one(spec: &BenchmarkSpec, seed: u64, options: &CompileOptions) -> RunRecord {
    let spec = spec.with_seed(seed);
    let mut record = RunRecord {
        spec: spec.clone(),
        seed,
        n_qubits: spec.n_qubits(),
        cz: 0,
        stages: 0,
        batches: 0,
        n_trans: 0,
        n_res: 0,
        total_time_us: 0.0,
        fidelity: 0.0,
        terms: Vec::new(),
        compile_ms: 0.0,
        fell_back: false,
        error: None,
    };
    let circuit = match generate_benchmark(&spec) {
        Ok(c) => c,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    record.cz = circuit.cz_count();
    let mut opts = options.clone();
    opts.sa.seed = options.sa.seed.wrapping_add(seed);
    let start = Instant::now();
    let result = compile(&circuit, &opts);
    record.compile_ms = start.elapsed().as_secs_f64() * 1e3;
    match result {
        Ok(out) => {
            let c = &out.schedule.counters;
            record.stages = c.n_stages;
            record.batches = c.n_batches;
            record.n_trans = c.n_trans;
            record.n_res = c.n_res;
            record.total_time_us = out.schedule.total_time_us;
            record.fidelity = out.fidelity.total;
            record.fell_back = out.anneal.as_ref().is_some_and(|a| a.fell_back);
            record.terms = out
                .fidelity
                .terms()
                .iter()
                .map(|&(k, v)| (k.to_string(), v))
                .collect();
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Compiles every spec once per seed. Fixed circuits vary only the anneal
/// seed. Failures are recorded and the suite continues.
pub fn run_suite(specs: &[BenchmarkSpec], options: &CompileOptions, seeds: &[u64]) -> SuiteResult {
    let jobs: Vec<(usize, u64)> = (0..specs.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let records: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(i, s)| run_one(&specs[i], s, options))
        .collect();
    let aggregates = specs
        .iter()
        .enumerate()
        .filter_map(|(i, spec)| {
            let fids: Vec<f64> = records
                .iter()
                .zip(&jobs)
                .filter(|(r, &(j, _))| j == i && r.error.is_none())
                .map(|(r, _)| r.fidelity)
                .collect();
            if fids.is_empty() {
                return None;
            }
            let (mean, std) = mean_std(&fids);
            Some(Aggregate {
                label: spec.label(),
                runs: fids.len(),
                mean_fidelity: mean,
                stddev_fidelity: std,
            })
        })
        .collect();
    SuiteResult {
        records,
        aggregates,
    }
}

impl SuiteResult {
    /// Long-format rows `benchmark,n_qubits,seed,term,value`.
    pub fn plot_csv(&self) -> String {
        let mut out = String::from("benchmark,n_qubits,seed,term,value\n");
        for r in self.records.iter().filter(|r| r.error.is_none()) {
            for (term, v) in &r.terms {
                out.push_str(&format!(
                    "{},{},{},{},{:.12e}\n",
                    r.spec.name(),
                    r.n_qubits,
                    r.seed,
                    term,
                    v
                ));
            }
        }
        out
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<28} {:>4} {:>5} {:>6} {:>7} {:>7} {:>5} {:>12} {:>10} {:>10}",
            "benchmark",
            "seed",
            "cz",
            "stages",
            "batches",
            "N_trans",
            "N_res",
            "time_us",
            "fidelity",
            "ms"
        )?;
        for r in &self.records {
            match &r.error {
                Some(e) => writeln!(f, "{:<28} {:>4} error: {e}", r.spec.label(), r.seed)?,
                None => writeln!(
                    f,
                    "{:<28} {:>4} {:>5} {:>6} {:>7} {:>7} {:>5} {:>12.1} {:>10.6} {:>10.1}",
                    r.spec.label(),
                    r.seed,
                    r.cz,
                    r.stages,
                    r.batches,
                    r.n_trans,
                    r.n_res,
                    r.total_time_us,
                    r.fidelity,
                    r.compile_ms
                )?,
            }
        }
        if !self.aggregates.is_empty() {
            writeln!(f)?;
            for a in &self.aggregates {
                writeln!(
                    f,
                    "{:<28} runs {:>3}  fidelity {:.6} ± {:.6}",
                    a.label, a.runs, a.mean_fidelity, a.stddev_fidelity
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateDag;
    use crate::scheduler::asap_schedule;

    #[test]
    fn declared_counts_match() {
        for spec in table1() {
            let c = generate_benchmark(&spec).unwrap();
            assert_eq!(c.n_qubits, spec.n_qubits(), "{}", spec.label());
            assert_eq!(c.cz_count(), spec.expected_cz(), "{}", spec.label());
            c.validate().unwrap();
        }
    }

    #[test]
    fn k4_is_the_only_cubic_graph_on_four() {
        let c = generate_benchmark(&BenchmarkSpec::RandomRegular {
            n: 4,
            d: 3,
            seed: 9,
        })
        .unwrap();
        assert_eq!(c.cz_count(), 6);
        let mut pairs: Vec<(usize, usize)> = c
            .gates
            .iter()
            .filter_map(|g| g.pair())
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn odd_degree_sum_is_rejected() {
        assert_eq!(
            generators::random_regular_graph(5, 3, 0),
            Err(BenchError::InfeasibleGraph { n: 5, d: 3 })
        );
    }

    #[test]
    fn ising_has_four_stages() {
        let c = generate_benchmark(&BenchmarkSpec::Ising { n: 26, steps: 1 }).unwrap();
        let plan = asap_schedule(&c, &GateDag::build(&c));
        assert_eq!(plan.len(), 4);
    }

    #[test]
    fn empty_suite_is_empty() {
        let r = run_suite(&[], &CompileOptions::default(), &[0]);
        assert!(r.records.is_empty());
        assert_eq!(r.plot_csv(), "benchmark,n_qubits,seed,term,value\n");
    }

    #[test]
    fn sample_stddev() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
