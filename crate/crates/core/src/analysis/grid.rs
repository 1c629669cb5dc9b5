use crate::error::{Error, Result};

/// `start, start + step, ...` up to `stop`, which is included when the last
/// step lands within half a step of it.
///
/// Nodes are computed as `start + k * step` so that rounding does not
/// accumulate.
pub fn axis(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::InvalidParameter(
            "grid bounds must be finite".to_string(),
        ));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "grid step must be positive, got {step}"
        )));
    }
    if stop < start {
        return Err(Error::InvalidParameter(format!(
            "grid stop {stop} lies below start {start}"
        )));
    }
    let count = ((stop - start) / step + 0.5).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(Error::InvalidParameter(format!(
            "grid would have {count} nodes"
        )));
    }
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

/// `n` logarithmically spaced values from `min` to `max`, endpoints exact.
pub fn log_axis(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "log grid needs 0 < min < max, got [{min}, {max}]"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(
            "log grid needs at least two points".to_string(),
        ));
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..n)
        .map(|k| match k {
            0 => min,
            k if k == n - 1 => max,
            k => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_within_half_step() {
        assert_eq!(
            axis(0.0, 1.0, 0.25).unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(axis(0.0, 1.1, 0.25).unwrap().len(), 5);
        assert_eq!(axis(0.0, 1.15, 0.25).unwrap().len(), 6);
        let a = axis(0.5, 3.0, 0.05).unwrap();
        assert_eq!(a.len(), 51);
        assert!((a[50] - 3.0).abs() < 1e-12);
        assert_eq!(axis(2.0, 2.0, 0.1).unwrap(), vec![2.0]);
    }

    #[test]
    fn bad_axes() {
        assert!(axis(0.0, 1.0, 0.0).is_err());
        assert!(axis(1.0, 0.0, 0.1).is_err());
        assert!(axis(0.0, f64::NAN, 0.1).is_err());
        assert!(log_axis(0.0, 1.0, 5).is_err());
        assert!(log_axis(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn log_spacing() {
        let v = log_axis(20.0, 200.0, 12).unwrap();
        assert_eq!(v[0], 20.0);
        assert_eq!(v[11], 200.0);
        let r = v[1] / v[0];
        for w in v.windows(2) {
            assert!((w[1] / w[0] - r).abs() < 1e-12);
        }
    }
}
