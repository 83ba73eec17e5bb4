use crate::data::TimeSeries;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowConfig {
    /// History length `w`.
    pub window: usize,
    /// Forecast horizon `tau`.
    pub horizon: usize,
    pub stride: usize,
}

impl WindowConfig {
    pub fn new(window: usize, horizon: usize, stride: usize) -> Result<Self> {
        if window == 0 || horizon == 0 || stride == 0 {
            return Err(Error::Config(format!(
                "window ({window}), horizon ({horizon}) and stride ({stride}) must all be >= 1"
            )));
        }
        Ok(Self {
            window,
            horizon,
            stride,
        })
    }

    pub fn span(&self) -> usize {
        self.window + self.horizon
    }
}

/// One supervised pair: `history` holds rows `t_origin - w .. t_origin`,
/// `target` rows `t_origin .. t_origin + tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    pub history: Matrix,
    pub target: Matrix,
    pub t_origin: usize,
}

/// Slides a window over the series; origins are `w, w + stride, ...` with
/// the whole target inside the series.
pub fn make_windows(series: &TimeSeries, cfg: &WindowConfig) -> Result<Vec<WindowSample>> {
    let t_len = series.len();
    if t_len < cfg.span() {
        return Err(Error::InsufficientData(format!(
            "series of length {t_len} is shorter than window {} + horizon {}",
            cfg.window, cfg.horizon
        )));
    }
    let values = series.values();
    let count = (t_len - cfg.span()) / cfg.stride + 1;
    (0..count)
        .map(|i| {
            let t = cfg.window + i * cfg.stride;
            Ok(WindowSample {
                history: values.slice_rows(t - cfg.window, t)?,
                target: values.slice_rows(t, t + cfg.horizon)?,
                t_origin: t,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitSpec {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        for (name, f) in [("train", train), ("val", val), ("test", test)] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Split(format!(
                    "{name} fraction {f} is outside (0, 1)"
                )));
            }
        }
        if (train + val + test - 1.0).abs() > 1e-9 {
            return Err(Error::Split(format!(
                "fractions sum to {}, expected 1",
                train + val + test
            )));
        }
        Ok(Self { train, val, test })
    }

    /// 66/17/17.
    pub fn standard() -> Self {
        Self {
            train: 0.66,
            val: 0.17,
            test: 0.17,
        }
    }

    /// Partition sizes for `total` items: floor for train and val, the rest
    /// goes to test.
    pub fn sizes(&self, total: usize) -> (usize, usize, usize) {
        // the epsilon absorbs representation error such as 0.29 * 100 = 28.999...
        let n_train = (self.train * total as f64 + 1e-9).floor() as usize;
        let n_val = (self.val * total as f64 + 1e-9).floor() as usize;
        let n_train = n_train.min(total);
        let n_val = n_val.min(total - n_train);
        (n_train, n_val, total - n_train - n_val)
    }
}

#[derive(Debug, Clone)]
pub struct Splits<T> {
    pub train: Vec<T>,
    pub val: Vec<T>,
    pub test: Vec<T>,
}

/// Contiguous chronological train/val/test partition.
pub fn chrono_split(
    mut samples: Vec<WindowSample>,
    spec: &SplitSpec,
) -> Result<Splits<WindowSample>> {
    if samples.is_empty() {
        return Err(Error::Split("no samples to split".into()));
    }
    samples.sort_by_key(|s| s.t_origin);
    let (n_train, n_val, _) = spec.sizes(samples.len());
    if n_train == 0 {
        return Err(Error::Split(format!(
            "train fraction {} of {} samples is empty",
            spec.train,
            samples.len()
        )));
    }
    if n_val == 0 {
        return Err(Error::Split(format!(
            "validation fraction {} of {} samples is empty; early stopping needs validation data",
            spec.val,
            samples.len()
        )));
    }
    let test = samples.split_off(n_train + n_val);
    let val = samples.split_off(n_train);
    Ok(Splits {
        train: samples,
        val,
        test,
    })
}
