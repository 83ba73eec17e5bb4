use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A `T x n` multivariate series with a known bounded value domain
/// `[0, domain_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Matrix,
    channel_names: Vec<String>,
    domain_max: f64,
}

impl TimeSeries {
    pub fn new(values: Matrix, channel_names: Vec<String>, domain_max: f64) -> Result<Self> {
        if values.rows() == 0 || values.cols() == 0 {
            return Err(Error::InsufficientData(format!(
                "series needs T >= 1 and n >= 1, got {}x{}",
                values.rows(),
                values.cols()
            )));
        }
        if channel_names.len() != values.cols() {
            return Err(Error::Dimension(format!(
                "{} channel names for {} channels",
                channel_names.len(),
                values.cols()
            )));
        }
        if !values.is_finite() {
            return Err(Error::Numeric("series contains non-finite values".into()));
        }
        Ok(Self {
            values,
            channel_names,
            domain_max,
        })
    }

    /// Single-channel convenience constructor.
    pub fn univariate(values: Vec<f64>, name: &str, domain_max: f64) -> Result<Self> {
        Self::new(Matrix::column(values), vec![name.to_string()], domain_max)
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn domain_max(&self) -> f64 {
        self.domain_max
    }

    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.rows() == 0
    }

    pub fn channels(&self) -> usize {
        self.values.cols()
    }

    /// Values of one channel in time order.
    pub fn channel(&self, c: usize) -> Vec<f64> {
        (0..self.len()).map(|t| self.values.get(t, c)).collect()
    }

    /// Rows `start..end` as a new series with the same metadata.
    pub fn slice(&self, start: usize, end: usize) -> Result<TimeSeries> {
        TimeSeries::new(
            self.values.slice_rows(start, end)?,
            self.channel_names.clone(),
            self.domain_max,
        )
    }
}

/// Everything needed to map normalized values back to native units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleRecord {
    pub domain_max: f64,
    pub clipped_high: usize,
    pub clipped_low: usize,
}

impl ScaleRecord {
    pub fn clipped(&self) -> usize {
        self.clipped_high + self.clipped_low
    }

    pub fn to_native(&self, value: f64) -> f64 {
        value * self.domain_max
    }

    pub fn to_normalized(&self, value: f64) -> f64 {
        value / self.domain_max
    }
}

/// Divides by `domain_max` and clips to `[0, 1]`, counting clipped entries.
pub fn normalize(series: &TimeSeries) -> Result<(TimeSeries, ScaleRecord)> {
    let domain_max = series.domain_max;
    if !(domain_max > 0.0) || !domain_max.is_finite() {
        return Err(Error::Config(format!(
            "domain_max must be a positive finite number, got {domain_max}"
        )));
    }
    let mut record = ScaleRecord {
        domain_max,
        clipped_high: 0,
        clipped_low: 0,
    };
    let scaled = series.values.map(|v| v / domain_max);
    let mut data = scaled.into_vec();
    for v in &mut data {
        if *v > 1.0 {
            *v = 1.0;
            record.clipped_high += 1;
        } else if *v < 0.0 {
            *v = 0.0;
            record.clipped_low += 1;
        }
    }
    let values = Matrix::from_vec(series.len(), series.channels(), data)?;
    let normalized = TimeSeries::new(values, series.channel_names.clone(), 1.0)?;
    Ok((normalized, record))
}

/// Inverse of [`normalize`] for unclipped entries.
pub fn denormalize(series: &TimeSeries, record: &ScaleRecord) -> Result<TimeSeries> {
    TimeSeries::new(
        series.values.map(|v| v * record.domain_max),
        series.channel_names.clone(),
        record.domain_max,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scales_by_domain_max() {
        let s = TimeSeries::univariate(vec![250.0, 0.0, 500.0], "traffic", 500.0).unwrap();
        let (n, rec) = normalize(&s).unwrap();
        assert_eq!(n.values().as_slice(), &[0.5, 0.0, 1.0]);
        assert_eq!(rec.clipped(), 0);
    }

    #[test]
    fn clips_and_counts() {
        let s = TimeSeries::univariate(vec![600.0, 100.0, -5.0, 700.0], "x", 500.0).unwrap();
        let (n, rec) = normalize(&s).unwrap();
        assert_eq!(n.values().as_slice(), &[1.0, 0.2, 0.0, 1.0]);
        // brute-force count of out-of-range raw values
        let expected_high = s.values().as_slice().iter().filter(|&&v| v > 500.0).count();
        let expected_low = s.values().as_slice().iter().filter(|&&v| v < 0.0).count();
        assert_eq!(rec.clipped_high, expected_high);
        assert_eq!(rec.clipped_low, expected_low);
        assert_eq!(rec.clipped(), 3);
    }

    #[test]
    fn rejects_non_positive_domain() {
        let s = TimeSeries::univariate(vec![1.0], "x", 0.0).unwrap();
        assert!(matches!(normalize(&s), Err(Error::Config(_))));
        let s = TimeSeries::univariate(vec![1.0], "x", -3.0).unwrap();
        assert!(normalize(&s).is_err());
    }

    #[test]
    fn rejects_empty_and_mismatched() {
        assert!(TimeSeries::univariate(vec![], "x", 1.0).is_err());
        assert!(TimeSeries::new(Matrix::zeros(3, 2), vec!["a".into()], 1.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_within_domain(
            domain_max in 0.01f64..1e4,
            fracs in proptest::collection::vec(0.0f64..=1.0, 1..64),
        ) {
            let raw: Vec<f64> = fracs.iter().map(|f| f * domain_max).collect();
            let s = TimeSeries::univariate(raw.clone(), "x", domain_max).unwrap();
            let (n, rec) = normalize(&s).unwrap();
            prop_assert!(n.values().as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
            let back = denormalize(&n, &rec).unwrap();
            for (a, b) in back.values().as_slice().iter().zip(&raw) {
                prop_assert!((a - b).abs() <= 1e-12 * domain_max.max(1.0));
            }
        }
    }
}
