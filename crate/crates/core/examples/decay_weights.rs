//! Soft interval membership: how the decay rate shapes per-entry weights
//! around the cell [0, 0.25], and how a whole target is weighted.

use intervalcast::interval::{decay_weight, target_weight, DecayRate};
use intervalcast::{Interval, Matrix};

fn main() -> intervalcast::Result<()> {
    let cell = Interval::new(0.0, 0.25)?;
    let rates = [
        DecayRate::Finite(0.0),
        DecayRate::Finite(37.0),
        DecayRate::Finite(50.0),
        DecayRate::Finite(100.0),
        DecayRate::Infinite,
    ];

    print!("    y ");
    for r in &rates {
        print!("{:>10}", format!("nu={r}"));
    }
    println!();
    for i in 0..=10 {
        let y = i as f64 * 0.05;
        print!("{y:5.2} ");
        for &r in &rates {
            print!("{:10.4}", decay_weight(y, &cell, r));
        }
        println!();
    }

    // nu = 37 puts the weight at ~1% on the midpoint of the next cell
    println!(
        "d(0.375) at nu=37: {:.4}",
        decay_weight(0.375, &cell, DecayRate::Finite(37.0))
    );

    let target = Matrix::column(vec![0.1, 0.2, 0.3]);
    for r in [DecayRate::Finite(10.0), DecayRate::Infinite] {
        println!(
            "target {:?} weight at nu={r}: {:.4}",
            target.as_slice(),
            target_weight(&target, &cell, r)
        );
    }
    Ok(())
}
