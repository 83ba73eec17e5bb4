//! Generates the synthetic four-hypothesis trace, prints a summary and
//! writes it as CSV.
//!
//! ```text
//! cargo run --example synthds_generate -- [out.csv]
//! ```

use intervalcast::data::synth::{SynthTrace, HYPOTHESES, SEGMENT_LEN};
use intervalcast::data::{generate_synthds_trace, write_csv};

fn main() -> intervalcast::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "synthds.csv".into());

    let clean = generate_synthds_trace(7, 0.0)?;
    let noisy = generate_synthds_trace(7, 0.05)?;

    let mut counts = [0usize; HYPOTHESES];
    for &k in &clean.classes {
        counts[k] += 1;
    }
    println!(
        "{} steps, {} blocks, classes per hypothesis {:?}",
        clean.series.len(),
        clean.classes.len(),
        counts
    );

    // first output segment, clean vs noisy
    let start = SynthTrace::output_start(0);
    let a = clean.series.channel(0);
    let b = noisy.series.channel(0);
    println!("block 0 is hypothesis k={}", clean.classes[0]);
    for n in (0..SEGMENT_LEN).step_by(6) {
        println!(
            "  n={:2}  clean {:.3}  noisy {:.3}",
            n + 1,
            a[start + n],
            b[start + n]
        );
    }

    write_csv(&noisy.series, &path)?;
    println!("wrote {path}");
    Ok(())
}
