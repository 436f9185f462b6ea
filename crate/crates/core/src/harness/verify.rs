use std::fmt;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};

use crate::engine::{
    run_batch, simulate_terminal, simulate_trajectory, MomentsN, PathStream, TimeGrid,
};
use crate::models::{coefficients_1d, coefficients_sv, CoefficientSet, Model1D, SvModel};
use crate::pricing::{bachelier_barrier_exact, norm_cdf, price_pcs, McConfig};
use crate::symmetry::{
    fold_argument, fold_double, reflect_payoff_single, symmetrize_single, BarrierContract,
    SymmetrizedCoefficients,
};

const TOL: f64 = 1e-12;
const BARRIER: f64 = 90.0;
const LOWER: f64 = 85.0;
const WIDTH: f64 = 30.0;

/// Sample sizes of the property suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyBudget {
    pub coefficient_points: usize,
    pub fold_points: usize,
    pub coupled_paths: u64,
    pub apcs_trials: u64,
    pub oracle_trials: u64,
    pub oracle_steps: usize,
    pub workers: usize,
    pub seed: u64,
}

impl VerifyBudget {
    pub fn full() -> Self {
        Self {
            coefficient_points: 100_000,
            fold_points: 10_000,
            coupled_paths: 1_000,
            apcs_trials: 1_000_000,
            oracle_trials: 1_000_000,
            oracle_steps: 200,
            workers: 0,
            seed: 20_240_601,
        }
    }

    /// Small sizes for smoke tests.
    pub fn quick() -> Self {
        Self {
            coefficient_points: 2_000,
            fold_points: 1_000,
            coupled_paths: 100,
            apcs_trials: 20_000,
            oracle_trials: 20_000,
            oracle_steps: 50,
            ..Self::full()
        }
    }
}

impl Default for VerifyBudget {
    fn default() -> Self {
        Self::full()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {}: {}", c.name, c.detail)?;
        }
        let n_ok = self.checks.iter().filter(|c| c.passed).count();
        write!(f, "{n_ok}/{} checks passed", self.checks.len())
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

fn one_d_models() -> Vec<(&'static str, CoefficientSet<f64>)> {
    let ms = [
        ("black-scholes", Model1D::black_scholes(100.0, 0.02, 0.3)),
        ("cev", Model1D::cev(100.0, 0.02, 0.45, 0.75)),
        ("arithmetic-bm", Model1D::arithmetic_bm(100.0, 10.0)),
    ];
    ms.into_iter()
        .map(|(n, m)| (n, coefficients_1d(&m.expect("valid")).expect("valid")))
        .collect()
}

fn sv_models() -> Vec<(&'static str, CoefficientSet<f64>)> {
    let ms = [
        (
            "heston",
            SvModel::heston(100.0, 0.03, 0.02, 1.0, 0.03, 0.03, -0.7),
        ),
        (
            "lambda-sabr",
            SvModel::lambda_sabr(100.0, 0.5, 0.02, 1.0, 0.03, 0.3, -0.7, 0.75),
        ),
    ];
    ms.into_iter()
        .map(|(n, m)| (n, coefficients_sv(&m.expect("valid")).expect("valid")))
        .collect()
}

/// Counts violations of `pred` over `points` draws of `(x, v)`.
fn count_violations(
    rng: &mut ChaCha8Rng,
    points: usize,
    x_range: (f64, f64),
    mut pred: impl FnMut(f64, f64) -> bool,
) -> usize {
    let xs = Uniform::new(x_range.0, x_range.1).expect("valid range");
    let vs = Uniform::new(0.0, 1.0).expect("valid range");
    (0..points)
        .filter(|_| {
            let (x, v) = (xs.sample(rng), vs.sample(rng));
            !pred(x, v)
        })
        .count()
}

fn check_single_symmetry(report: &mut VerifyReport, b: &VerifyBudget) {
    let mut rng = ChaCha8Rng::seed_from_u64(b.seed);
    let k = BARRIER;
    let mut bad = 0;
    let mut total = 0;
    for (_, c) in one_d_models() {
        let s = symmetrize_single(c, k);
        bad += count_violations(&mut rng, b.coefficient_points, (k - 60.0, k + 60.0), |x, _| {
            let y = 2.0 * k - x;
            x == k || (close(s.sigma_x(x, 0.0), s.sigma_x(y, 0.0)) && close(s.mu_x(x, 0.0), -s.mu_x(y, 0.0)))
        });
        total += b.coefficient_points;
    }
    report.push(
        "single-barrier 1-D symmetry",
        bad == 0,
        format!("{bad} of {total} points violate sigma even / mu odd about K"),
    );

    let (mut bad, mut total) = (0, 0);
    for (_, c) in sv_models() {
        let s = symmetrize_single(c, k);
        bad += count_violations(&mut rng, b.coefficient_points, (k - 60.0, k + 60.0), |x, v| {
            let y = 2.0 * k - x;
            x == k || (close(s.sigma_x(x, v), -s.sigma_x(y, v)) && close(s.mu_x(x, v), -s.mu_x(y, v)))
        });
        total += b.coefficient_points;
    }
    report.push(
        "single-barrier stochastic-volatility antisymmetry",
        bad == 0,
        format!("{bad} of {total} points violate sigma and mu odd about K"),
    );
}

fn folded_models() -> Vec<SymmetrizedCoefficients<f64>> {
    one_d_models()
        .into_iter()
        .chain(sv_models())
        .map(|(_, c)| fold_double(c, LOWER, WIDTH).expect("positive width"))
        .collect()
}

fn check_periodicity(report: &mut VerifyReport, b: &VerifyBudget) {
    let mut rng = ChaCha8Rng::seed_from_u64(b.seed ^ 1);
    let (k, w) = (LOWER, WIDTH);
    let (mut bad, mut total) = (0, 0);
    for f in folded_models() {
        bad += count_violations(&mut rng, b.coefficient_points, (k - 10.0 * w, k + 10.0 * w), |x, v| {
            let p = x + 2.0 * w;
            let r = 2.0 * k - x;
            close(f.sigma_x(x, v), f.sigma_x(p, v))
                && close(f.mu_x(x, v), f.mu_x(p, v))
                && close(f.sigma_x(x, v), -f.sigma_x(r, v))
                && close(f.mu_x(x, v), -f.mu_x(r, v))
        });
        total += b.coefficient_points;
    }
    report.push(
        "corridor periodicity and antisymmetry",
        bad == 0,
        format!("{bad} of {total} points violate period 2K' or oddness about K"),
    );
}

/// Partial sum of the reflection series over `n ∈ [-50, 50]`.
fn series(c: impl Fn(f64) -> f64, k: f64, w: f64, x: f64) -> f64 {
    let mut acc = 0.0;
    for n in -50i64..=50 {
        let shift = (2 * n) as f64 * w;
        if k + shift <= x && x < k + ((2 * n + 1) as f64) * w {
            acc += c(x - shift);
        }
        if k + ((2 * n - 1) as f64) * w <= x && x < k + shift {
            acc -= c(2.0 * k - (x - shift));
        }
    }
    acc
}

fn check_fold_series(report: &mut VerifyReport, b: &VerifyBudget) {
    let mut rng = ChaCha8Rng::seed_from_u64(b.seed ^ 2);
    let (k, w) = (LOWER, WIDTH);
    let (mut bad, mut out_of_band, mut total) = (0, 0, 0);
    for f in folded_models() {
        let base = f.base;
        bad += count_violations(&mut rng, b.fold_points, (k - 40.0 * w, k + 40.0 * w), |x, v| {
            let (y, _) = fold_argument(x, k, w);
            if !(k <= y && y <= k + w) {
                out_of_band += 1;
            }
            f.sigma_x(x, v) == series(|z| base.sigma_x(z, v), k, w, x)
                && f.mu_x(x, v) == series(|z| base.mu_x(z, v), k, w, x)
        });
        total += b.fold_points;
    }
    report.push(
        "corridor fold equals reflection series",
        bad == 0 && out_of_band == 0,
        format!("{bad} of {total} points differ, {out_of_band} folded outside [K, K+K']"),
    );
}

fn check_payoff_reflection(report: &mut VerifyReport, b: &VerifyBudget) {
    let mut rng = ChaCha8Rng::seed_from_u64(b.seed ^ 3);
    let k = BARRIER;
    let call = |y: f64| (y - 95.0f64).max(0.0);
    let bad = count_violations(&mut rng, b.coefficient_points, (k - 60.0, k + 60.0), |x, _| {
        close(
            reflect_payoff_single(call, k, x),
            -reflect_payoff_single(call, k, 2.0 * k - x),
        )
    });
    let at_barrier = reflect_payoff_single(call, k, k) == 0.0;
    report.push(
        "reflected payoff antisymmetry",
        bad == 0 && at_barrier,
        format!(
            "{bad} of {} points violate oddness about K, zero at K: {at_barrier}",
            b.coefficient_points
        ),
    );
}

fn check_unit_elasticity(report: &mut VerifyReport, b: &VerifyBudget) {
    let mut rng = ChaCha8Rng::seed_from_u64(b.seed ^ 4);
    let bs = coefficients_1d(&Model1D::black_scholes(100.0, 0.02, 0.3).expect("valid")).expect("valid");
    let cev = coefficients_1d(&Model1D::cev(100.0, 0.02, 0.3, 1.0).expect("valid")).expect("valid");
    let bad = count_violations(&mut rng, b.coefficient_points, (-50.0, 400.0), |x, _| {
        bs.sigma_x(x, 0.0).to_bits() == cev.sigma_x(x, 0.0).to_bits()
            && bs.mu_x(x, 0.0).to_bits() == cev.mu_x(x, 0.0).to_bits()
    });
    report.push(
        "unit-elasticity CEV equals Black-Scholes",
        bad == 0,
        format!("{bad} of {} points differ bitwise", b.coefficient_points),
    );
}

fn check_coupled_paths(report: &mut VerifyReport, b: &VerifyBudget) {
    let base = coefficients_1d(&Model1D::black_scholes(100.0, 0.02, 0.5).expect("valid")).expect("valid");
    let sym = symmetrize_single(base, BARRIER);
    let grid = TimeGrid::new(1.0, 100).expect("valid grid");
    let (mut agree, mut crossed) = (0u64, 0u64);
    for i in 0..b.coupled_paths {
        let s = PathStream::new(b.seed, i);
        let (Ok(p), Ok(q)) = (
            simulate_trajectory(&base, 100.0, None, &grid, &mut s.normals()),
            simulate_trajectory(&sym, 100.0, None, &grid, &mut s.normals()),
        ) else {
            continue;
        };
        let mut same = true;
        for (a, c) in p.iter().zip(&q) {
            if a.0.to_bits() != c.0.to_bits() {
                same = false;
                break;
            }
            if a.0 <= BARRIER {
                crossed += 1;
                break;
            }
        }
        agree += same as u64;
    }
    report.push(
        "coupled paths identical until the barrier",
        agree == b.coupled_paths,
        format!(
            "{agree}/{} paths agree ({crossed} reached the barrier)",
            b.coupled_paths
        ),
    );
}

fn check_apcs(report: &mut VerifyReport, b: &VerifyBudget) {
    let k = BARRIER;
    let base = coefficients_1d(&Model1D::black_scholes(k, 0.0, 0.2).expect("valid")).expect("valid");
    let sym = symmetrize_single(base, k);
    let grid = TimeGrid::new(1.0, 100).expect("valid grid");
    let odd = |g: fn(f64) -> f64, u: f64| g(u) - g(-u);
    let stats: Result<MomentsN<f64, 3>, _> = run_batch(b.apcs_trials, b.workers, |i| {
        let mut src = PathStream::new(b.seed ^ 5, i).normals();
        let u = simulate_terminal(&sym, k, None, &grid, &mut src)?.x - k;
        Ok([
            odd(|u| u.max(0.0), u),
            odd(|u| u * u * u, u),
            odd(f64::sin, u),
        ])
    });
    let names = ["u+", "u^3", "sin(u)"];
    match stats {
        Ok(MomentsN(ms)) => {
            for (name, m) in names.iter().zip(ms) {
                let z = m.mean / m.stderr();
                report.push(
                    &format!("put-call symmetry statistic {name}"),
                    z.abs() < 3.0,
                    format!("mean {:.4e}, stderr {:.4e}, |z| = {:.3}", m.mean, m.stderr(), z.abs()),
                );
            }
        }
        Err(e) => report.push("put-call symmetry statistics", false, e.to_string()),
    }
}

fn check_bachelier_oracle(report: &mut VerifyReport, b: &VerifyBudget) {
    let model = Model1D::arithmetic_bm(100.0, 10.0).expect("valid").into();
    let contract = BarrierContract::down_and_out(95.0, BARRIER, 1.0);
    let exact = bachelier_barrier_exact(100.0, 95.0, BARRIER, 10.0, 1.0);
    let cfg = McConfig::new(b.oracle_steps, b.oracle_trials, b.seed ^ 6).with_workers(b.workers);
    let name = "symmetrization on arithmetic Brownian motion matches closed form";
    match (price_pcs(&model, &contract, &cfg), exact) {
        (Ok(est), Ok(exact)) => {
            let z = (est.mean - exact) / est.stderr;
            report.push(
                name,
                z.abs() < 3.0,
                format!(
                    "estimate {:.6} ± {:.6}, exact {exact:.6}, |z| = {:.3}",
                    est.mean,
                    est.stderr,
                    z.abs()
                ),
            );
        }
        (Err(e), _) | (_, Err(e)) => report.push(name, false, e.to_string()),
    }
}

fn check_norm_cdf(report: &mut VerifyReport) {
    // 25-digit reference values
    const REF: [(f64, f64); 5] = [
        (-5.0, 2.866515718791939116737523e-7),
        (-1.0, 0.1586552539314570514147675),
        (0.25, 0.5987063256829237242408538),
        (1.5, 0.933192798731141933995506),
        (4.0, 0.9999683287581668800787462),
    ];
    let accurate = REF
        .iter()
        .all(|&(z, p)| (norm_cdf(z) - p).abs() <= 1e-12 * p.max(1e-3));
    let grid: Vec<f64> = (-800..=800).map(|i| i as f64 * 0.01).collect();
    let symmetric = grid
        .iter()
        .all(|&z| (norm_cdf(z) + norm_cdf(-z) - 1.0).abs() <= 1e-15);
    let monotone = grid.windows(2).all(|w| norm_cdf(w[0]) <= norm_cdf(w[1]));
    let half = norm_cdf(0.0) == 0.5;
    report.push(
        "normal CDF accuracy and symmetry",
        accurate && symmetric && monotone && half,
        format!("reference {accurate}, symmetry {symmetric}, monotone {monotone}, center {half}"),
    );
}

/// Runs every invariant check and reports each outcome with its statistic.
pub fn verify_properties(budget: &VerifyBudget) -> VerifyReport {
    let mut report = VerifyReport::default();
    check_single_symmetry(&mut report, budget);
    check_periodicity(&mut report, budget);
    check_fold_series(&mut report, budget);
    check_payoff_reflection(&mut report, budget);
    check_unit_elasticity(&mut report, budget);
    check_coupled_paths(&mut report, budget);
    check_apcs(&mut report, budget);
    check_bachelier_oracle(&mut report, budget);
    check_norm_cdf(&mut report);
    report
}
