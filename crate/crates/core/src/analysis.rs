//! Post-processing of sampled signals: oscillation frequency and peaks.

use std::f64::consts::TAU;

/// Direction of a mean crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edge {
    Rising,
    Falling,
}

fn mean_crossings(times: &[f64], values: &[f64]) -> Vec<(f64, Edge)> {
    assert_eq!(times.len(), values.len(), "times and values must align");
    if values.is_empty() {
        return Vec::new();
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut out = Vec::new();
    for i in 1..values.len() {
        let (v0, v1) = (values[i - 1] - mean, values[i] - mean);
        let edge = if v0 < 0.0 && v1 >= 0.0 {
            Edge::Rising
        } else if v0 > 0.0 && v1 <= 0.0 {
            Edge::Falling
        } else {
            continue;
        };
        // skip the sample sitting exactly on the mean; it was counted already
        if v0 == 0.0 {
            continue;
        }
        let frac = v0 / (v0 - v1);
        out.push((times[i - 1] + frac * (times[i] - times[i - 1]), edge));
    }
    out
}

/// Number of crossings of the signal through its sample mean.
pub fn crossing_count(times: &[f64], values: &[f64]) -> usize {
    mean_crossings(times, values).len()
}

/// Dominant angular frequency of a sampled signal from its mean crossings.
///
/// Crossing instants are located by linear interpolation. The period is the
/// mean spacing of same-direction crossings, averaged over rising and
/// falling edges, which cancels the bias of an off-centre mean. Returns
/// `None` when fewer than two crossings of either direction exist.
///
/// Only meaningful for a signal with one clearly dominant tone; strongly
/// modulated signals yield the rate of their mean crossings.
pub fn dominant_frequency(times: &[f64], values: &[f64]) -> Option<f64> {
    let crossings = mean_crossings(times, values);
    let period_of = |edge: Edge| {
        let ts: Vec<f64> = crossings.iter().filter(|c| c.1 == edge).map(|c| c.0).collect();
        (ts.len() >= 2).then(|| (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64)
    };
    let periods: Vec<f64> = [Edge::Rising, Edge::Falling]
        .into_iter()
        .filter_map(period_of)
        .collect();
    if periods.is_empty() {
        return None;
    }
    let period = periods.iter().sum::<f64>() / periods.len() as f64;
    Some(TAU / period)
}

/// Interior local maxima `(index, value)`; plateaus report their first sample.
pub fn local_maxima(values: &[f64]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < values.len() {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < values.len() && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < values.len() && values[j + 1] < values[i] {
                out.push((i, values[i]));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// `(min, max)` of a non-empty slice.
pub fn extrema(values: &[f64]) -> Option<(f64, f64)> {
    let first = *values.first()?;
    Some(values.iter().fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(f: impl Fn(f64) -> f64, t_end: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let ts: Vec<f64> = (0..=n).map(|k| t_end * k as f64 / n as f64).collect();
        let vs = ts.iter().map(|&t| f(t)).collect();
        (ts, vs)
    }

    #[test]
    fn pure_tone_frequency() {
        for w in [0.5, 1.0, 2.0, 2.0f64.sqrt()] {
            let (ts, vs) = sample(|t| (w * t).cos().powi(2), 20.0, 20_000);
            let est = dominant_frequency(&ts, &vs).unwrap();
            assert!((est - 2.0 * w).abs() < 1e-7 * w, "{w}: {est}");
        }
    }

    #[test]
    fn offset_does_not_bias() {
        let (ts, vs) = sample(|t| 0.3 + (1.7 * t + 0.4).sin(), 13.3, 13_300);
        assert!((dominant_frequency(&ts, &vs).unwrap() - 1.7).abs() < 1e-7);
    }

    #[test]
    fn flat_signal_has_no_frequency() {
        let (ts, vs) = sample(|_| 1.0, 10.0, 100);
        assert_eq!(dominant_frequency(&ts, &vs), None);
        assert_eq!(crossing_count(&ts, &vs), 0);
    }

    #[test]
    fn maxima_and_extrema() {
        let v = [0.0, 1.0, 0.5, 0.5, 2.0, 2.0, 1.0, 3.0];
        assert_eq!(local_maxima(&v), vec![(1, 1.0), (4, 2.0)]);
        assert_eq!(extrema(&v), Some((0.0, 3.0)));
        assert_eq!(extrema(&[]), None);
    }
}
