use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::models::ModelSpec;
use crate::num::Real;
use crate::pricing::{price_pathwise, McConfig, PriceEstimate};
use crate::symmetry::BarrierContract;

/// Default ceiling on `steps × trials` before a warning is logged; roughly
/// the full published benchmark budget.
pub const DEFAULT_PATH_STEP_LIMIT: u128 = 250_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchmarkOptions {
    pub seed: u64,
    pub workers: usize,
    pub path_step_limit: u128,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        Self {
            seed: McConfig::default().seed,
            workers: 0,
            path_step_limit: DEFAULT_PATH_STEP_LIMIT,
        }
    }
}

/// One line of the benchmark store.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub model_hash: String,
    pub contract_hash: String,
    pub steps: usize,
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl fmt::Display for BenchmarkRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `{:?}` keeps the shortest representation that round-trips
        write!(
            f,
            "{},{},{},{},{},{:?},{:?},{}",
            self.model_hash,
            self.contract_hash,
            self.steps,
            self.trials,
            self.seed,
            self.mean,
            self.stderr,
            self.timestamp
        )
    }
}

impl FromStr for BenchmarkRecord {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let f: Vec<&str> = s.trim().split(',').collect();
        if f.len() != 8 {
            return Err(format!("expected 8 fields, found {}", f.len()));
        }
        fn num<X: FromStr>(s: &str, what: &str) -> Result<X, String> {
            s.parse().map_err(|_| format!("bad {what} `{s}`"))
        }
        Ok(Self {
            model_hash: f[0].to_string(),
            contract_hash: f[1].to_string(),
            steps: num(f[2], "n")?,
            trials: num(f[3], "M")?,
            seed: num(f[4], "seed")?,
            mean: num(f[5], "mean")?,
            stderr: num(f[6], "stderr")?,
            timestamp: num(f[7], "timestamp")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark<T> {
    pub estimate: PriceEstimate<T>,
    pub record: BenchmarkRecord,
    /// The requested budget was above the configured limit.
    pub over_budget: bool,
}

fn short_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn model_hash<T: Real>(model: &ModelSpec<T>) -> String {
    short_hash(&format!("{model:?}"))
}

pub fn contract_hash<T: Real>(contract: &BarrierContract<T>) -> String {
    short_hash(&format!("{contract:?}"))
}

/// High-budget path-wise estimate, stamped for the store.
pub fn make_benchmark<T: Real>(
    model: &ModelSpec<T>,
    contract: &BarrierContract<T>,
    steps: usize,
    trials: u64,
    opts: &BenchmarkOptions,
) -> Result<Benchmark<T>, HarnessError> {
    let budget = steps as u128 * trials as u128;
    let over_budget = budget > opts.path_step_limit;
    if over_budget {
        log::warn!(
            "benchmark budget {steps} steps x {trials} paths exceeds the limit of {} path-steps",
            opts.path_step_limit
        );
    }
    let cfg = McConfig::new(steps, trials, opts.seed).with_workers(opts.workers);
    let estimate = price_pathwise(model, contract, &cfg)?;
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let record = BenchmarkRecord {
        model_hash: model_hash(model),
        contract_hash: contract_hash(contract),
        steps,
        trials,
        seed: opts.seed,
        mean: estimate.mean.as_f64(),
        stderr: estimate.stderr.as_f64(),
        timestamp,
    };
    Ok(Benchmark {
        estimate,
        record,
        over_budget,
    })
}

/// Flat file of benchmark records, one per line. Blank lines and lines
/// starting with `#` are skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkStore {
    path: PathBuf,
}

impl BenchmarkStore {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, record: &BenchmarkRecord) -> Result<(), HarnessError> {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        writeln!(f, "{record}")?;
        Ok(())
    }

    /// Every record in file order; a missing file is an empty store.
    pub fn load(&self) -> Result<Vec<BenchmarkRecord>, HarnessError> {
        let f = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut out = Vec::new();
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            out.push(t.parse().map_err(|reason| HarnessError::Store {
                line: i + 1,
                reason,
            })?);
        }
        Ok(out)
    }

    /// Most recently appended record for the model/contract pair.
    pub fn latest(
        &self,
        model_hash: &str,
        contract_hash: &str,
    ) -> Result<Option<BenchmarkRecord>, HarnessError> {
        Ok(self
            .load()?
            .into_iter()
            .rev()
            .find(|r| r.model_hash == model_hash && r.contract_hash == contract_hash))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Model1D, SvModel};

    fn cev() -> ModelSpec<f64> {
        Model1D::cev(100.0, 0.0, 0.45, 0.75).unwrap().into()
    }

    #[test]
    fn zero_vol_is_deterministic() {
        let m: ModelSpec<f64> = Model1D::black_scholes(100.0, 0.0, 0.0).unwrap().into();
        let c = BarrierContract::down_and_out(95.0, 90.0, 1.0);
        let b = make_benchmark(&m, &c, 50, 1000, &BenchmarkOptions::default()).unwrap();
        assert_eq!(b.estimate.mean, 5.0);
        assert_eq!(b.estimate.stderr, 0.0);
        assert!(!b.over_budget);
    }

    #[test]
    fn budget_guard_flags_but_runs() {
        let c = BarrierContract::down_and_out(95.0, 90.0, 1.0);
        let opts = BenchmarkOptions {
            path_step_limit: 100,
            ..Default::default()
        };
        let b = make_benchmark(&cev(), &c, 10, 20, &opts).unwrap();
        assert!(b.over_budget);
        assert_eq!(b.estimate.trials, 20);
    }

    #[test]
    fn hashes_identify_inputs() {
        let c = BarrierContract::down_and_out(95.0, 90.0, 1.0);
        assert_eq!(model_hash(&cev()), model_hash(&cev()));
        assert_eq!(model_hash(&cev()).len(), 16);
        let h: ModelSpec<f64> = SvModel::heston(100.0, 0.03, 0.0, 1.0, 0.03, 0.03, -0.7)
            .unwrap()
            .into();
        assert_ne!(model_hash(&cev()), model_hash(&h));
        assert_ne!(
            contract_hash(&c),
            contract_hash(&BarrierContract::down_and_out(95.0, 90.0, 2.0))
        );
    }

    #[test]
    fn store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = BenchmarkStore::new(dir.path().join("bench.csv"));
        assert!(store.load().unwrap().is_empty());
        let c = BarrierContract::down_and_out(95.0, 90.0, 1.0);
        let a = make_benchmark(&cev(), &c, 20, 2000, &BenchmarkOptions::default()).unwrap();
        let opts = BenchmarkOptions {
            seed: 7,
            ..Default::default()
        };
        let b = make_benchmark(&cev(), &c, 20, 2000, &opts).unwrap();
        store.append(&a.record).unwrap();
        store.append(&b.record).unwrap();
        let all = store.load().unwrap();
        assert_eq!(all, vec![a.record.clone(), b.record.clone()]);
        assert_eq!(all[0].mean.to_bits(), a.estimate.mean.to_bits());
        let latest = store
            .latest(&model_hash(&cev()), &contract_hash(&c))
            .unwrap()
            .unwrap();
        assert_eq!(latest.seed, 7);
        assert!(store.latest("x", "y").unwrap().is_none());
    }

    #[test]
    fn malformed_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bench.csv");
        std::fs::write(&path, "# header\nabc,def,10,100,1,8.0,0.1,0\nbroken\n").unwrap();
        match BenchmarkStore::new(&path).load() {
            Err(HarnessError::Store { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
