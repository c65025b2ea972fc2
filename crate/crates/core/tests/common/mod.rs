//! Brute-force reference implementations shared by the integration tests.
//!
//! Each oracle recomputes its answer from the raw prefix with explicit
//! loops and shares no code with the library. The catalog at the end lists
//! library operators for contract-level checks.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use streamloop::sync::{Mode, Slot, StreamSpec};
use streamloop::timecodec::TimestampNs;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Values uniform in [-10, 10] with roughly `nan_rate` of them NaN.
pub fn random_series(rng: &mut ChaCha8Rng, len: usize, nan_rate: f64) -> Vec<f64> {
    (0..len)
        .map(|_| {
            if rng.random::<f64>() < nan_rate {
                f64::NAN
            } else {
                rng.random_range(-10.0..10.0)
            }
        })
        .collect()
}

/// Equal bits, or both NaN.
pub fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

pub fn same_slice(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(&x, &y)| same(x, y))
}

/// Both NaN, or within `tol`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a.is_nan() && b.is_nan()) || (a - b).abs() <= tol
}

// ---------------------------------------------------------------------------
// Exponentially weighted statistics

#[derive(Debug, Clone, Copy)]
pub struct EwPoint {
    pub mean_x: f64,
    pub mean_y: f64,
    pub cov: f64,
}

/// EW mean of `x` and debiased EW covariance of `(x, y)` at every step.
///
/// Keeps one explicit weight per past observation and re-sums all of them
/// at each step. Weights age by `1 - alpha` per step (per observation with
/// `ignore_na`); new observations enter with weight 1 (`adjust`) or
/// `alpha` followed by renormalization to unit total (no `adjust`). A step
/// whose pair is incomplete is missing; without `adjust` and `ignore_na`
/// such a step reports NaN.
pub fn ew_oracle(pairs: &[(f64, f64)], alpha: f64, adjust: bool, ignore_na: bool) -> Vec<EwPoint> {
    let nan = EwPoint {
        mean_x: f64::NAN,
        mean_y: f64::NAN,
        cov: f64::NAN,
    };
    let mut obs: Vec<(f64, f64, f64)> = Vec::new(); // (weight, x, y)
    let mut out = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        let observed = !x.is_nan() && !y.is_nan();
        if obs.is_empty() {
            if observed {
                obs.push((1.0, x, y));
                out.push(EwPoint {
                    mean_x: x,
                    mean_y: y,
                    cov: f64::NAN,
                });
            } else {
                out.push(nan);
            }
            continue;
        }
        if observed || !ignore_na {
            for o in obs.iter_mut() {
                o.0 *= 1.0 - alpha;
            }
        }
        if observed {
            obs.push((if adjust { 1.0 } else { alpha }, x, y));
            if !adjust {
                let total: f64 = obs.iter().map(|o| o.0).sum();
                for o in obs.iter_mut() {
                    o.0 /= total;
                }
            }
        } else if !adjust && !ignore_na {
            out.push(nan);
            continue;
        }
        let sw: f64 = obs.iter().map(|o| o.0).sum();
        let mx = obs.iter().map(|o| o.0 * o.1).sum::<f64>() / sw;
        let my = obs.iter().map(|o| o.0 * o.2).sum::<f64>() / sw;
        // sum w - sum w^2 / sum w, without subtracting: each weight times
        // the sum of all the others, from prefix and suffix sums
        let mut suffix = vec![0.0; obs.len() + 1];
        for i in (0..obs.len()).rev() {
            suffix[i] = suffix[i + 1] + obs[i].0;
        }
        let mut prefix = 0.0;
        let mut cross = 0.0;
        for (i, o) in obs.iter().enumerate() {
            cross += o.0 * (prefix + suffix[i + 1]);
            prefix += o.0;
        }
        let den = cross / sw;
        let cov = if obs.len() < 2 || den <= 0.0 {
            f64::NAN
        } else {
            obs.iter().map(|o| o.0 * (o.1 - mx) * (o.2 - my)).sum::<f64>() / den
        };
        out.push(EwPoint {
            mean_x: mx,
            mean_y: my,
            cov,
        });
    }
    out
}

pub fn ewma_oracle(xs: &[f64], alpha: f64, adjust: bool, ignore_na: bool) -> Vec<f64> {
    let pairs: Vec<_> = xs.iter().map(|&x| (x, x)).collect();
    ew_oracle(&pairs, alpha, adjust, ignore_na)
        .iter()
        .map(|p| p.mean_x)
        .collect()
}

pub fn ewmvar_oracle(xs: &[f64], alpha: f64, adjust: bool, ignore_na: bool) -> Vec<f64> {
    let pairs: Vec<_> = xs.iter().map(|&x| (x, x)).collect();
    ew_oracle(&pairs, alpha, adjust, ignore_na)
        .iter()
        .map(|p| p.cov)
        .collect()
}

pub fn ewmcov_oracle(pairs: &[(f64, f64)], alpha: f64, adjust: bool, ignore_na: bool) -> Vec<f64> {
    ew_oracle(pairs, alpha, adjust, ignore_na)
        .iter()
        .map(|p| p.cov)
        .collect()
}

// ---------------------------------------------------------------------------
// Exact operators

pub fn at(xs: &[f64], t: usize, back: usize) -> f64 {
    if back > t {
        f64::NAN
    } else {
        xs[t - back]
    }
}

pub fn buffer_oracle(xs: &[f64], n: usize) -> Vec<Vec<f64>> {
    (0..xs.len())
        .map(|t| (0..n).rev().map(|back| at(xs, t, back)).collect())
        .collect()
}

pub fn lag_oracle(xs: &[f64], k: usize) -> Vec<f64> {
    (0..xs.len()).map(|t| at(xs, t, k)).collect()
}

pub fn diff_oracle(xs: &[f64], k: usize) -> Vec<f64> {
    (0..xs.len()).map(|t| xs[t] - at(xs, t, k)).collect()
}

pub fn pct_change_oracle(xs: &[f64], k: usize) -> Vec<f64> {
    (0..xs.len())
        .map(|t| {
            let base = at(xs, t, k);
            if base == 0.0 {
                f64::NAN
            } else {
                xs[t] / base - 1.0
            }
        })
        .collect()
}

/// Mean of the non-NaN values among the last `length` inputs, summed
/// oldest first.
pub fn rolling_mean_oracle(xs: &[f64], length: usize, min_periods: usize) -> Vec<f64> {
    (0..xs.len())
        .map(|t| {
            let lo = (t + 1).saturating_sub(length);
            let mut sum = 0.0;
            let mut count = 0;
            for &v in &xs[lo..=t] {
                if !v.is_nan() {
                    sum += v;
                    count += 1;
                }
            }
            if count >= min_periods {
                sum / count as f64
            } else {
                f64::NAN
            }
        })
        .collect()
}

/// `inner` is re-run from scratch over the event payloads seen so far; the
/// output holds its last value, or `initial` before the first event.
pub fn update_on_event_oracle(
    events: &[bool],
    xs: &[f64],
    initial: f64,
    inner: impl Fn(&[f64]) -> Vec<f64>,
) -> Vec<f64> {
    (0..xs.len())
        .map(|t| {
            let seen: Vec<f64> = (0..=t).filter(|&i| events[i]).map(|i| xs[i]).collect();
            inner(&seen).last().copied().unwrap_or(initial)
        })
        .collect()
}

/// `[open, high, low, close]` recomputed from the start of each segment.
/// The first step always starts a segment; high/low skip NaN.
pub fn ohlc_oracle(xs: &[f64], resets: &[bool]) -> Vec<[f64; 4]> {
    (0..xs.len())
        .map(|t| {
            let start = (0..=t).rev().find(|&i| i == 0 || resets[i]).unwrap();
            let seg = &xs[start..=t];
            let finite: Vec<f64> = seg.iter().copied().filter(|v| !v.is_nan()).collect();
            let high = finite.iter().copied().reduce(f64::max).unwrap_or(f64::NAN);
            let low = finite.iter().copied().reduce(f64::min).unwrap_or(f64::NAN);
            [seg[0], high, low, xs[t]]
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Synchronization

/// Index of the newest event with `ts + latency <= now`, by full scan.
pub fn ffill_oracle(secondary: &[i64], latency: i64, now: i64) -> Option<usize> {
    (0..secondary.len())
        .filter(|&i| secondary[i] as i128 + latency as i128 <= now as i128)
        .max()
}

/// Indices with `prev < ts + latency <= now` (`prev` = -inf at step 0),
/// by full scan.
pub fn window_events_oracle(secondary: &[i64], latency: i64, prev: Option<i64>, now: i64) -> Vec<usize> {
    (0..secondary.len())
        .filter(|&i| {
            let v = secondary[i] as i128 + latency as i128;
            v <= now as i128 && prev.is_none_or(|p| v > p as i128)
        })
        .collect()
}

/// Random trace instance: strictly increasing local stamps, non-decreasing
/// secondary stamps (ties allowed), latency and mode.
pub fn random_sync_instance(r: &mut ChaCha8Rng) -> (Vec<i64>, StreamSpec) {
    let n_local = r.random_range(1..40);
    let n_sec = r.random_range(0..60);
    let base: i64 = r.random_range(-1000..1000);
    let mut local = Vec::with_capacity(n_local);
    let mut t = base;
    for _ in 0..n_local {
        t += r.random_range(1..8);
        local.push(t);
    }
    let mut sec = Vec::with_capacity(n_sec);
    let mut s = base + r.random_range(-10..10);
    for _ in 0..n_sec {
        s += r.random_range(0..6);
        sec.push(s);
    }
    let latency = if r.random::<f64>() < 0.3 {
        0
    } else {
        r.random_range(0..15)
    };
    let mode = if r.random::<bool>() {
        Mode::ForwardFill
    } else {
        Mode::Window(r.random_range(1..5))
    };
    let spec = StreamSpec {
        name: "s".into(),
        timestamps: sec.into_iter().map(TimestampNs).collect(),
        latency_ns: latency,
        mode,
    };
    (local, spec)
}

/// Checks one traced stream against full-scan oracles: causality, ffill
/// maximality, exact window contents, and that windows partition the
/// admissible events with only the oldest dropped.
pub fn check_stream_schedule(local: &[i64], spec: &StreamSpec, slots: &[Slot]) -> Result<(), String> {
    let sec: Vec<i64> = spec.timestamps.iter().map(|t| t.0).collect();
    let lat = spec.latency_ns;
    if slots.len() != local.len() {
        return Err(format!("{} slots for {} steps", slots.len(), local.len()));
    }
    let visible = |i: usize, now: i64| sec[i] as i128 + lat as i128 <= now as i128;
    let mut claimed = vec![0usize; sec.len()];
    for (t, slot) in slots.iter().enumerate() {
        let now = local[t];
        match (spec.mode, *slot) {
            (Mode::ForwardFill, Slot::Ffill(got)) => {
                if let Some(i) = got {
                    if !visible(i, now) {
                        return Err(format!("step {t}: index {i} is from the future"));
                    }
                }
                let want = ffill_oracle(&sec, lat, now);
                if got != want {
                    return Err(format!("step {t}: ffill {got:?}, oracle {want:?}"));
                }
            }
            (
                Mode::Window(n),
                Slot::Window {
                    start,
                    end,
                    pad,
                    overflow,
                },
            ) => {
                let prev = if t == 0 { None } else { Some(local[t - 1]) };
                let events = window_events_oracle(&sec, lat, prev, now);
                for i in &events {
                    claimed[*i] += 1;
                }
                let keep = events.len().min(n);
                let want: Vec<usize> = events[events.len() - keep..].to_vec();
                let got: Vec<usize> = (start..end).collect();
                if got != want {
                    return Err(format!("step {t}: window {got:?}, oracle {want:?}"));
                }
                if got.iter().any(|&i| !visible(i, now)) {
                    return Err(format!("step {t}: window reads the future"));
                }
                if pad != n - keep || overflow != events.len() - keep {
                    return Err(format!(
                        "step {t}: pad {pad} overflow {overflow} for {} events",
                        events.len()
                    ));
                }
            }
            (mode, slot) => return Err(format!("step {t}: slot {slot:?} for mode {mode}")),
        }
    }
    if let Mode::Window(_) = spec.mode {
        let last = *local.last().unwrap();
        for (i, &c) in claimed.iter().enumerate() {
            let want = visible(i, last) as usize;
            if c != want {
                return Err(format!("event {i} claimed {c} times, expected {want}"));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Online regression

/// Explicit SGD loop for the flipping-regression experiment. `inputs` are
/// `[x_1..x_d, noise]` rows and `w_star` the initial true weights.
/// Returns per-step `(loss, weights acted with)`.
pub fn sgd_oracle(inputs: &[Vec<f64>], w_star: &[f64], flip_step: usize, lr: f64) -> Vec<(f64, Vec<f64>)> {
    let d = w_star.len();
    let mut star = w_star.to_vec();
    let mut w = vec![0.0; d];
    let mut out = Vec::with_capacity(inputs.len());
    for (t, row) in inputs.iter().enumerate() {
        if t == flip_step {
            for s in star.iter_mut() {
                *s = -*s;
            }
        }
        let x = &row[..d];
        let mut y = 0.0;
        for i in 0..d {
            y += star[i] * x[i];
        }
        y += row[d];
        let mut pred = 0.0;
        for i in 0..d {
            pred += w[i] * x[i];
        }
        let err = pred - y;
        out.push((err * err, w.clone()));
        for i in 0..d {
            w[i] -= lr * (2.0 * err * x[i]);
        }
    }
    out
}

/// Runs [`sgd_oracle`] on the experiment's own inputs. The initial true
/// weights are redrawn from the environment's seed stream.
pub fn regression_oracle(config: &RegressionConfig) -> (Vec<f64>, Vec<(f64, Vec<f64>)>) {
    let mut r = seeded_rng(split_seed(config.seed, "env"));
    let w_star: Vec<f64> = (0..config.dims).map(|_| r.random_range(-1.0..=1.0)).collect();
    let inputs: Vec<Vec<f64>> = regression_inputs(config)
        .rows()
        .iter()
        .map(|t| t.data().to_vec())
        .collect();
    let trace = sgd_oracle(&inputs, &w_star, config.flip_step, config.learning_rate);
    (w_star, trace)
}

/// Central finite-difference gradient of `w -> loss(predict(w, x), y)`.
pub fn numeric_grad<M: SupervisedModel>(m: &M, w: &[f64], x: &[f64], y: f64, h: f64) -> Vec<f64> {
    (0..w.len())
        .map(|i| {
            let mut up = w.to_vec();
            let mut dn = w.to_vec();
            up[i] += h;
            dn[i] -= h;
            (m.loss(m.predict(&up, x), y) - m.loss(m.predict(&dn, x), y)) / (2.0 * h)
        })
        .collect()
}

/// `|g - fd| / max(|g|, |fd|, 1e-8)` over the whole vector.
pub fn grad_rel_error<M: SupervisedModel>(m: &M, w: &[f64], x: &[f64], y: f64) -> f64 {
    let g = m.grad(w, x, y);
    let fd = numeric_grad(m, w, x, y, 1e-6);
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(&g).max(norm(&fd)).max(1e-8)
}

/// Random point `(w, x, y)` with entries in `[-2, 2]`; `y` is a 0/1 label
/// for classification models.
pub fn random_grad_point(r: &mut ChaCha8Rng, d: usize, label: bool) -> (Vec<f64>, Vec<f64>, f64) {
    let w = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
    let x = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
    let y = if label {
        (r.random::<bool>()) as u8 as f64
    } else {
        r.random_range(-2.0..2.0)
    };
    (w, x, y)
}

// ---------------------------------------------------------------------------
// Operator catalog for contract-level checks

use streamloop::learn::{
    regression_inputs, regression_loop, LinearSquared, LogisticCrossEntropy, OnlineSupervisedLearner,
    RegressionConfig, SupervisedModel,
};
use streamloop::ops::{
    Buffer, Diff, EwSpec, EwmCov, EwmVar, Ewma, Lag, PctChange, RollingMean, TrailingOhlc, UpdateOnEvent,
    WindowSpec,
};
use streamloop::transform::{chain, seeded_rng, split_seed, BoxedTransform, Identity};
use streamloop::{Sequence, Tensor};

type Generator = Box<dyn Fn(&mut ChaCha8Rng, usize) -> Sequence>;

pub struct Case {
    pub name: String,
    pub transform: BoxedTransform,
    pub input: Generator,
}

fn scalars() -> Generator {
    Box::new(|r, n| Sequence::from_scalars(&random_series(r, n, 0.1)))
}

fn vectors(width: usize, nan_rate: f64) -> Generator {
    Box::new(move |r, n| {
        Sequence::from_rows(
            (0..n)
                .map(|_| Tensor::vector(random_series(r, width, nan_rate)))
                .collect(),
        )
    })
}

/// `[flag, value]` rows with flags set about a third of the time.
fn flagged() -> Generator {
    Box::new(|r, n| {
        let xs = random_series(r, n, 0.1);
        Sequence::from_rows(
            xs.into_iter()
                .map(|x| Tensor::vector(vec![if r.random::<f64>() < 0.3 { 1.0 } else { 0.0 }, x]))
                .collect(),
        )
    })
}

/// `[x_1..x_d, y]` rows from a fixed linear target.
fn regression_rows(d: usize, logistic: bool) -> Generator {
    Box::new(move |r, n| {
        Sequence::from_rows(
            (0..n)
                .map(|_| {
                    let mut row: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
                    let s: f64 = row.iter().enumerate().map(|(i, x)| (i as f64 - 1.0) * x).sum();
                    row.push(if logistic { (s > 0.0) as u8 as f64 } else { s });
                    Tensor::vector(row)
                })
                .collect(),
        )
    })
}

fn case(name: &str, transform: BoxedTransform, input: Generator) -> Case {
    Case {
        name: name.to_string(),
        transform,
        input,
    }
}

/// Every shipped operator, configured with representative parameters.
pub fn catalog() -> Vec<Case> {
    let mut cases = vec![
        case("identity", Box::new(Identity), scalars()),
        case("buffer3", Box::new(Buffer::new(3).unwrap()), scalars()),
        case("lag2", Box::new(Lag::new(2).unwrap()), vectors(2, 0.1)),
        case("diff1", Box::new(Diff::new(1).unwrap()), scalars()),
        case("pct_change3", Box::new(PctChange::new(3).unwrap()), scalars()),
        case(
            "rolling_mean5",
            Box::new(RollingMean::new(WindowSpec::with_min_periods(5, 2).unwrap())),
            vectors(3, 0.2),
        ),
        case(
            "update_on_event",
            Box::new(UpdateOnEvent::new(
                RollingMean::new(WindowSpec::with_min_periods(3, 1).unwrap()),
                Tensor::scalar(f64::NAN),
            )),
            flagged(),
        ),
        case("trailing_ohlc", Box::new(TrailingOhlc::new()), flagged()),
        case(
            "chain",
            chain(vec![
                Box::new(Diff::new(1).unwrap()),
                Box::new(Ewma::new(EwSpec::new(0.3).unwrap())),
                Box::new(Buffer::new(2).unwrap()),
            ]),
            scalars(),
        ),
        case(
            "learner_linear",
            Box::new(OnlineSupervisedLearner::new(LinearSquared, 0.05, vec![0.0; 3]).unwrap()),
            regression_rows(3, false),
        ),
        case(
            "learner_logistic",
            Box::new(OnlineSupervisedLearner::new(LogisticCrossEntropy, 0.5, vec![0.1; 2]).unwrap()),
            regression_rows(2, true),
        ),
        case(
            "regression_loop",
            Box::new(
                regression_loop(&RegressionConfig {
                    steps: 1000,
                    flip_step: 40,
                    ..Default::default()
                })
                .unwrap(),
            ),
            vectors(4, 0.0),
        ),
    ];
    for alpha in [0.2, 1.0] {
        for adjust in [true, false] {
            for ignore_na in [true, false] {
                let spec = EwSpec::with_flags(alpha, adjust, ignore_na).unwrap();
                let tag = format!("a{alpha}_adj{}_ign{}", adjust as u8, ignore_na as u8);
                cases.push(case(&format!("ewma_{tag}"), Box::new(Ewma::new(spec)), scalars()));
                cases.push(case(
                    &format!("ewmvar_{tag}"),
                    Box::new(EwmVar::new(spec)),
                    vectors(2, 0.1),
                ));
                cases.push(case(
                    &format!("ewmcov_{tag}"),
                    Box::new(EwmCov::new(spec)),
                    vectors(2, 0.1),
                ));
            }
        }
    }
    cases
}
