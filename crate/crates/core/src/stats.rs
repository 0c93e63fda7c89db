//! Small descriptive-statistics helpers shared by segment summaries and analytics.

/// Linear-interpolation quantile between order statistics (Hyndman–Fan type 7)
/// of an ascending slice. `q` in [0, 1].
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Count, mean, sample standard deviation and the five-number summary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Describe {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator); `None` below two values.
    pub std: Option<f64>,
    pub min: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub max: f64,
}

impl Describe {
    /// `None` for empty input. Sorts `values` in place.
    pub fn of(values: &mut [f64]) -> Option<Describe> {
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = (n > 1).then(|| {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        });
        let q = |p| quantile_sorted(values, p).expect("non-empty");
        Some(Describe { count: n, mean, std, min: values[0], q25: q(0.25), q50: q(0.5), q75: q(0.75), max: values[n - 1] })
    }

    /// Applies a linear unit conversion to every location/scale field.
    pub fn scaled(&self, k: f64) -> Describe {
        Describe {
            count: self.count,
            mean: self.mean * k,
            std: self.std.map(|s| s * k),
            min: self.min * k,
            q25: self.q25 * k,
            q50: self.q50 * k,
            q75: self.q75 * k,
            max: self.max * k,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.5), Some(2.5));
        assert_eq!(quantile_sorted(&v, 0.25), Some(1.75));
        assert_eq!(quantile_sorted(&v, 1.0), Some(4.0));
        assert_eq!(quantile_sorted(&[], 0.5), None);
    }

    #[test]
    fn singleton_describe() {
        let d = Describe::of(&mut [7.0]).unwrap();
        assert_eq!((d.min, d.q25, d.q50, d.q75, d.max, d.mean), (7.0, 7.0, 7.0, 7.0, 7.0, 7.0));
        assert_eq!(d.std, None);
    }
}
