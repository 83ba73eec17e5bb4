//! Reads a multichannel CSV, crops channels, normalizes by a domain maximum
//! and slices it into windows.

use intervalcast::data::{make_windows, normalize, read_csv, WindowConfig};

const TRACE: &str = "\
beam0,beam1,beam2
12,40,7
18,35,9
25,55,11
31,80,10
22,62,8
15,45,6
";

fn main() -> intervalcast::Result<()> {
    let series = read_csv(TRACE.as_bytes(), 2, 60.0)?;
    println!(
        "{} steps x {} channels: {:?}",
        series.len(),
        series.channels(),
        series.channel_names()
    );

    let (unit, record) = normalize(&series)?;
    println!("clipped above the domain: {}", record.clipped());
    for t in 0..unit.len() {
        println!("  t={t}  {:?}", unit.values().row(t));
    }

    let windows = make_windows(&unit, &WindowConfig::new(3, 2, 1)?)?;
    for w in &windows {
        println!(
            "origin {}: history {}x{}, target {:?}",
            w.t_origin,
            w.history.rows(),
            w.history.cols(),
            w.target.as_slice()
        );
    }

    // a malformed body cell is reported with its location
    match read_csv("a,b\n1,x\n".as_bytes(), 2, 1.0) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
