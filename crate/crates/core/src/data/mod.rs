//! Series containers, sliding windows, splits, normalization and data sources.

mod csv_io;
mod series;
pub mod synth;
mod windows;

pub use csv_io::{load_csv, read_csv, write_csv};
pub use series::{denormalize, normalize, ScaleRecord, TimeSeries};
pub use synth::{generate_synthds, generate_synthds_trace, SynthTrace};
pub use windows::{chrono_split, make_windows, SplitSpec, Splits, WindowConfig, WindowSample};
