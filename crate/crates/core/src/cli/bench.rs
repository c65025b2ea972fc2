use std::time::{Duration, Instant};

use clap::Args;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::with_thread_limit;
use crate::error::{Error, Result};
use crate::ops::{ewma_direct, EwSpec, Ewma};
use crate::tensor::{Shape, Tensor};
use crate::transform::{seeded_rng, split_seed, Unroller};

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub rows: usize,
    #[arg(long, default_value_t = 10)]
    pub cols: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub const SPOT_CHECKS: usize = 100;
pub const SPOT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: usize,
    pub cols: usize,
    /// Time spent in the streamed EWMA only.
    pub elapsed: Duration,
    pub cells_per_sec: f64,
    pub spot_checks: usize,
    pub max_abs_error: f64,
    /// Row and column of one output cell, for inspection.
    pub sample: (usize, usize, f64),
}

impl BenchReport {
    pub fn passed(&self) -> bool {
        self.max_abs_error <= SPOT_TOLERANCE
    }
}

fn alloc(len: usize) -> Result<Vec<f64>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len)
        .map_err(|e| Error::Resource(format!("cannot allocate {len} values: {e}")))?;
    Ok(v)
}

/// Seeded standard-normal data, one independent stream per column.
fn generate(rows: usize, cols: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    (0..cols)
        .into_par_iter()
        .map(|c| {
            let mut col = alloc(rows)?;
            let mut rng = seeded_rng(split_seed(seed, &format!("column{c}")));
            col.extend((0..rows).map(|_| rng.sample::<f64, _>(StandardNormal)));
            Ok(col)
        })
        .collect()
}

/// Generates a `rows x cols` frame, streams EWMA over every column in
/// parallel and checks [`SPOT_CHECKS`] random cells against the direct
/// weighted sum.
pub fn run_bench(rows: usize, cols: usize, alpha: f64, seed: u64) -> Result<BenchReport> {
    if rows == 0 || cols == 0 {
        return Err(Error::param("rows and cols must be at least 1"));
    }
    rows.checked_mul(cols)
        .and_then(|n| n.checked_mul(2 * size_of::<f64>()))
        .filter(|&bytes| bytes <= isize::MAX as usize)
        .ok_or_else(|| Error::Resource(format!("{rows} x {cols} frame does not fit in memory")))?;
    let spec = EwSpec::new(alpha)?;
    let ewma = Ewma::new(spec);

    let input = generate(rows, cols, seed)?;
    let mut output = (0..cols).map(|_| alloc(rows)).collect::<Result<Vec<_>>>()?;

    let start = Instant::now();
    input
        .par_iter()
        .zip(output.par_iter_mut())
        .try_for_each(|(col, out)| -> Result<()> {
            let mut driver = Unroller::new(&ewma, seed, Shape::Scalar)?;
            for &v in col {
                out.push(driver.step(&Tensor::scalar(v))?.as_scalar()?);
            }
            Ok(())
        })?;
    let elapsed = start.elapsed();

    let mut rng = seeded_rng(split_seed(seed, "spot"));
    let cells: Vec<(usize, usize)> = (0..SPOT_CHECKS)
        .map(|_| (rng.random_range(0..rows), rng.random_range(0..cols)))
        .collect();
    let max_abs_error = cells
        .par_iter()
        .map(|&(r, c)| {
            let want = ewma_direct(&input[c][..=r], &spec);
            let got = output[c][r];
            if want.is_nan() && got.is_nan() {
                0.0
            } else {
                let e = (want - got).abs();
                if e.is_nan() {
                    f64::INFINITY
                } else {
                    e
                }
            }
        })
        .reduce(|| 0.0, f64::max);

    let (r, c) = cells[0];
    Ok(BenchReport {
        rows,
        cols,
        elapsed,
        cells_per_sec: (rows * cols) as f64 / elapsed.as_secs_f64().max(1e-9),
        spot_checks: SPOT_CHECKS,
        max_abs_error,
        sample: (r, c, output[c][r]),
    })
}

pub(super) fn run(args: &BenchArgs) -> Result<()> {
    let report = with_thread_limit(|| run_bench(args.rows, args.cols, args.alpha, args.seed))?;
    println!(
        "ewma alpha={} rows={} cols={} elapsed={:.3}s throughput={:.0} cells/s",
        args.alpha,
        report.rows,
        report.cols,
        report.elapsed.as_secs_f64(),
        report.cells_per_sec
    );
    println!(
        "spot-check {} cells: max abs error {:e} ({})",
        report.spot_checks,
        report.max_abs_error,
        if report.passed() { "pass" } else { "FAIL" }
    );
    if report.passed() {
        Ok(())
    } else {
        Err(Error::Numeric(format!(
            "spot-check error {:e} exceeds {SPOT_TOLERANCE:e}",
            report.max_abs_error
        )))
    }
}
