//! Timing harness for the decision and `k*` paths on random patterns.

use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::decide::{check_graph, kstar_graph};
use crate::error::{Error, Result};
use crate::flow::{build_small_network, max_flow_integral};
use crate::graph::{reachability_check, to_digraph};
use crate::pattern::{random_pattern, SparsityPattern};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub density: f64,
    pub k: u64,
    pub q: u64,
    pub seed: u64,
    /// Timed batches per measurement; the fastest batch is reported.
    pub batches: usize,
    /// Minimum wall time of one batch; short operations are repeated.
    pub min_batch: Duration,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![50, 100, 200, 400],
            density: 0.05,
            k: 1,
            q: 3,
            seed: 1,
            batches: 5,
            min_batch: Duration::from_millis(5),
        }
    }
}

/// Seconds per call for one size.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub edges: usize,
    pub build: f64,
    pub maxflow: f64,
    pub check: f64,
    pub kstar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slopes of log(time) against log(n).
    pub slope_build: f64,
    pub slope_maxflow: f64,
    pub slope_check: f64,
    pub slope_kstar: f64,
}

impl BenchReport {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "n": r.n, "m": r.m, "edges": r.edges,
                    "build_s": r.build, "maxflow_s": r.maxflow,
                    "check_s": r.check, "kstar_s": r.kstar,
                })
            })
            .collect();
        json!({
            "rows": rows,
            "slopes": {
                "build": self.slope_build,
                "maxflow": self.slope_maxflow,
                "check": self.slope_check,
                "kstar": self.slope_kstar,
            }
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:>6} {:>5} {:>8} {:>12} {:>12} {:>12} {:>12}\n",
            "n", "m", "edges", "build_s", "maxflow_s", "check_s", "kstar_s"
        );
        for r in &self.rows {
            s += &format!(
                "{:>6} {:>5} {:>8} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}\n",
                r.n, r.m, r.edges, r.build, r.maxflow, r.check, r.kstar
            );
        }
        s += &format!(
            "slopes: build {:.2}, maxflow {:.2}, check {:.2}, kstar {:.2}\n",
            self.slope_build, self.slope_maxflow, self.slope_check, self.slope_kstar
        );
        s
    }
}

/// Fastest per-call time over `batches` batches of at least `min_batch` each.
fn time_per_call<T>(cfg: &BenchConfig, mut f: impl FnMut() -> Result<T>) -> Result<f64> {
    let mut reps = 1usize;
    loop {
        let start = Instant::now();
        for _ in 0..reps {
            std::hint::black_box(f()?);
        }
        if start.elapsed() >= cfg.min_batch || reps >= 1 << 20 {
            break;
        }
        reps *= 2;
    }
    let mut best = f64::INFINITY;
    for _ in 0..cfg.batches.max(1) {
        let start = Instant::now();
        for _ in 0..reps {
            std::hint::black_box(f()?);
        }
        best = best.min(start.elapsed().as_secs_f64() / reps as f64);
    }
    Ok(best)
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Attempts per size when drawing a pattern that passes the reachability check.
pub const MAX_DRAWS: u64 = 1_000;

/// First pattern in the seed sequence `seed, seed+1, …` whose state nodes are
/// all reachable from some input, so that the flow path actually runs. Falls
/// back to the first draw when none of `MAX_DRAWS` qualifies (tiny sparse sizes).
fn reachable_pattern(n: usize, m: usize, density: f64, seed: u64) -> Result<SparsityPattern> {
    let first = random_pattern(n, m, density, seed)?;
    if reachability_check(&to_digraph(&first)).is_empty() {
        return Ok(first);
    }
    for draw in 1..MAX_DRAWS {
        let p = random_pattern(n, m, density, seed.wrapping_add(draw))?;
        if reachability_check(&to_digraph(&p)).is_empty() {
            return Ok(p);
        }
    }
    Ok(first)
}

/// Time network construction, one max-flow, a full check at `(k, q)` and the
/// `k*` search on one random pattern per size (`m = max(1, n/10)`). Patterns
/// are redrawn until one passes the reachability check; otherwise the check
/// would return after a linear-time search and the timings would not measure
/// the flow path.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.sizes.len() < 2 {
        return Err(Error::Domain("bench needs at least two sizes".into()));
    }
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let m = (n / 10).max(1);
        let p = reachable_pattern(n, m, cfg.density, cfg.seed.wrapping_add((n as u64) << 20))?;
        let g = to_digraph(&p);
        let net = build_small_network(&g, cfg.k, cfg.q, false)?;
        rows.push(BenchRow {
            n,
            m,
            edges: g.edge_count(),
            build: time_per_call(cfg, || build_small_network(&g, cfg.k, cfg.q, false))?,
            maxflow: time_per_call(cfg, || Ok(max_flow_integral(&net)))?,
            check: time_per_call(cfg, || check_graph(&g, cfg.k, cfg.q))?,
            kstar: time_per_call(cfg, || kstar_graph(&g))?,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let col = |f: fn(&BenchRow) -> f64| loglog_slope(&xs, &rows.iter().map(f).collect::<Vec<_>>());
    Ok(BenchReport {
        slope_build: col(|r| r.build),
        slope_maxflow: col(|r| r.maxflow),
        slope_check: col(|r| r.check),
        slope_kstar: col(|r| r.kstar),
        rows,
    })
}
