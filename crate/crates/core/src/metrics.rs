//! Accuracy and latency metrics between predictive distributions.

use std::f64::consts::PI;
use std::sync::Mutex;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::predictive::PredictiveDistribution;

/// Variance floor applied before evaluating log densities.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Reference values closer to zero than this make a relative metric undefined.
pub const RELATIVE_GUARD: f64 = 1e-9;

/// Serializes timed regions across the whole process.
static TIMING_TOKEN: Mutex<()> = Mutex::new(());

pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    Ok((sq / a.len() as f64).sqrt())
}

/// `KL(N(mu1, var1) ‖ N(mu2, var2))`.
pub fn gaussian_kl(mu1: f64, var1: f64, mu2: f64, var2: f64) -> Result<f64> {
    for v in [var1, var2] {
        if !(v > 0.0) {
            return Err(Error::NonPositiveVariance(v));
        }
    }
    let kl = 0.5 * (var2 / var1).ln() + (var1 + (mu1 - mu2).powi(2)) / (2.0 * var2) - 0.5;
    Ok(kl.max(0.0))
}

/// Pointwise KL of `candidate` against `reference`, with both variances
/// floored at [`VARIANCE_FLOOR`].
pub fn pointwise_kl(
    candidate: &PredictiveDistribution,
    reference: &PredictiveDistribution,
) -> Result<Vec<f64>> {
    if candidate.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: candidate.len(),
            right: reference.len(),
        });
    }
    let floor = |v: f64| v.max(VARIANCE_FLOOR);
    (0..candidate.len())
        .map(|t| {
            gaussian_kl(
                candidate.means[t],
                floor(candidate.variances[t]),
                reference.means[t],
                floor(reference.variances[t]),
            )
        })
        .collect()
}

/// Mean over points of `KL(candidate ‖ reference)`.
pub fn mean_kl(
    candidate: &PredictiveDistribution,
    reference: &PredictiveDistribution,
) -> Result<f64> {
    let kl = pointwise_kl(candidate, reference)?;
    if kl.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(kl.iter().sum::<f64>() / kl.len() as f64)
}

/// Mean negative log density of `targets` under `pred`.
pub fn nlpd(pred: &PredictiveDistribution, targets: &[f64]) -> Result<f64> {
    if pred.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: targets.len(),
        });
    }
    if targets.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut floored = 0usize;
    let total: f64 = pred
        .means
        .iter()
        .zip(&pred.variances)
        .zip(targets)
        .map(|((mu, v), y)| {
            let v = if *v < VARIANCE_FLOOR {
                floored += 1;
                VARIANCE_FLOOR
            } else {
                *v
            };
            0.5 * (2.0 * PI * v).ln() + (y - mu).powi(2) / (2.0 * v)
        })
        .sum();
    if floored > 0 {
        log::warn!("nlpd: floored {floored} variances at {VARIANCE_FLOOR:e}");
    }
    Ok(total / targets.len() as f64)
}

/// `approx / full`, or `None` when `full` is too close to zero.
pub fn relative_metric(approx: f64, full: f64) -> Option<f64> {
    if full.abs() < RELATIVE_GUARD || !full.is_finite() || !approx.is_finite() {
        return None;
    }
    Some(approx / full)
}

/// Median of a non-empty sample.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs `task` once untimed, then `repetitions` times under a monotonic
/// clock, holding the process-wide timing token throughout. Returns the
/// median duration in seconds and the last result.
pub fn time_predict<T, F>(repetitions: usize, mut task: F) -> (f64, T)
where
    F: FnMut() -> T,
{
    assert!(repetitions >= 1, "need at least one timed repetition");
    let _token = TIMING_TOKEN.lock().unwrap_or_else(|e| e.into_inner());
    let mut last = task();
    let mut durations = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        last = std::hint::black_box(task());
        durations.push(start.elapsed().as_secs_f64());
    }
    (median(&durations), last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    fn pred(means: Vec<f64>, variances: Vec<f64>) -> PredictiveDistribution {
        PredictiveDistribution {
            means,
            variances,
            latency_seconds: None,
        }
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[1.0, 2.0], &[2.0, 4.0]).unwrap() - 2.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(
            rmse(&[1.0, 5.0], &[2.0, 4.0]).unwrap(),
            rmse(&[2.0, 4.0], &[1.0, 5.0]).unwrap()
        );
        assert!(matches!(rmse(&[], &[]), Err(Error::EmptyInput)));
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(gaussian_kl(0.3, 1.2, 0.3, 1.2).unwrap(), 0.0);
        assert!((gaussian_kl(0.0, 1.0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(
            (gaussian_kl(0.0, 2.0, 0.0, 1.0).unwrap() - 0.153_426_409_720_027_35).abs() < 1e-15
        );
        assert!(gaussian_kl(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(gaussian_kl(0.0, 1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn nlpd_examples() {
        let v = 1.0 / (2.0 * PI);
        assert!(nlpd(&pred(vec![0.4], vec![v]), &[0.4]).unwrap().abs() < 1e-15);
        let unit = nlpd(&pred(vec![0.0], vec![1.0]), &[0.0]).unwrap();
        assert!((unit - 0.918_938_533_204_672_7).abs() < 1e-15);
        let mut prev = unit;
        for shift in [0.1, 0.5, 1.0, 3.0] {
            let n = nlpd(&pred(vec![0.0], vec![1.0]), &[shift]).unwrap();
            assert!(n > prev);
            prev = n;
        }
        assert!(nlpd(&pred(vec![0.0], vec![1.0]), &[0.0, 1.0]).is_err());
        // zero variance is floored rather than producing infinities
        assert!(nlpd(&pred(vec![0.0], vec![0.0]), &[0.0])
            .unwrap()
            .is_finite());
    }

    #[test]
    fn relative_examples() {
        assert_eq!(relative_metric(3.0, 3.0), Some(1.0));
        assert_eq!(relative_metric(4.0, 2.0), Some(2.0));
        assert_eq!(relative_metric(-1.0, -2.0), Some(0.5));
        assert_eq!(relative_metric(1.0, 0.0), None);
        assert_eq!(relative_metric(1.0, 5e-10), None);
    }

    #[test]
    fn median_definition() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn timing_noop_and_median() {
        let (t, _) = time_predict(5, || ());
        assert!(t < 1e-3);

        // run 0 is the warm-up; timed runs sleep 3, 1, 2 ms
        let plan = [0u64, 3, 1, 2];
        let mut k = 0;
        let (t, _) = time_predict(3, || {
            std::thread::sleep(Duration::from_millis(plan[k] * 10));
            k += 1;
        });
        assert!((0.019..0.029).contains(&t), "{t}");
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn kl_nonnegative(m1 in -5.0..5.0f64, v1 in 1e-3..10.0f64, m2 in -5.0..5.0f64, v2 in 1e-3..10.0f64) {
                prop_assert!(gaussian_kl(m1, v1, m2, v2).unwrap() >= 0.0);
                prop_assert!(gaussian_kl(m1, v1, m1, v1).unwrap() <= 1e-12);
            }

            #[test]
            fn nlpd_minimized_at_target(y in -3.0..3.0f64, v in 1e-2..5.0f64, d in -2.0..2.0f64) {
                let at = |mu: f64| nlpd(&PredictiveDistribution { means: vec![mu], variances: vec![v], latency_seconds: None }, &[y]).unwrap();
                prop_assert!(at(y) <= at(y + d));
            }

            #[test]
            fn relative_identity(x in prop_oneof![-1e6..-1e-6f64, 1e-6..1e6f64]) {
                prop_assert_eq!(relative_metric(x, x), Some(1.0));
            }
        }
    }
}
