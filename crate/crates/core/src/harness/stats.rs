//! Summary statistics.

use super::HarnessError;

/// Mean and two standard errors (sample standard deviation, `n − 1` divisor).
pub fn summarize(values: &[f64]) -> Result<(f64, f64), HarnessError> {
    let n = values.len();
    if n < 2 {
        return Err(HarnessError::Stats(format!("need at least 2 values, got {n}")));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, 2.0 * var.sqrt() / (n as f64).sqrt()))
}

/// Cross-simulation mean of each episode's reward. Entry `i` averages over the
/// series that reached episode `i`; the result has `count` entries, with NaN
/// where no series got that far.
pub fn episode_means(series: &[Vec<f64>], count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let (sum, n) = series
                .iter()
                .filter_map(|s| s.get(i))
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            if n == 0 {
                f64::NAN
            } else {
                sum / n as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_summaries() {
        assert_eq!(summarize(&[1.0, 1.0, 1.0, 1.0]).unwrap(), (1.0, 0.0));
        let (m, se) = summarize(&[0.0, 2.0]).unwrap();
        assert_eq!(m, 1.0);
        assert!((se - 2.0).abs() < 1e-12);
        assert!(summarize(&[3.0]).is_err());
    }

    #[test]
    fn ragged_episode_means() {
        let m = episode_means(&[vec![1.0, 3.0], vec![3.0]], 3);
        assert_eq!(m[..2], [2.0, 3.0]);
        assert!(m[2].is_nan());
    }
}
