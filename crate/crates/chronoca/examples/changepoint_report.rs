//! End-to-end changepoint detection on a synthetic three-regime series.
//!
//! ```bash
//! cargo run --example changepoint_report
//! ```

use chronoca::{analyze, boundaries_from_partition, cluster_sequence, ContingencyTable};
use nalgebra::DMatrix;

/// 36 months over 6 attributes with regime shifts after months 12 and 24:
/// each regime concentrates its mass on a different attribute pair.
fn synthetic_series() -> (Vec<String>, DMatrix<f64>) {
    let labels: Vec<String> = (0..36)
        .map(|t| format!("{}-{:02}", 2000 + t / 12, 1 + t % 12))
        .collect();
    let counts = DMatrix::from_fn(36, 6, |t, j| {
        let regime = t / 12;
        let base = if j / 2 == regime { 60.0 } else { 10.0 };
        // deterministic wobble, small next to the regime shifts
        base * (1.0 + 0.03 * ((3 * t + 7 * j) as f64).sin())
    });
    (labels, counts)
}

fn main() -> chronoca::Result<()> {
    let (labels, counts) = synthetic_series();
    let cols = (0..6).map(|j| format!("a{j}")).collect();
    let (table, _) = ContingencyTable::new(labels, cols, counts)?;

    let model = analyze(&table)?;
    println!(
        "{} factors, {:.1}% of inertia on the first two",
        model.n_factors(),
        100.0 * model.explained_ratio(model.n_factors().min(2))?
    );

    let dend = cluster_sequence(&model.row_points())?;

    // the same hierarchy read at several scales
    for k in [2, 3, 6] {
        let report = dend.changepoints(k)?;
        println!("k = {k}:");
        for b in &report.boundaries {
            println!(
                "  change between {} and {} (height {:.4})",
                table.row_labels()[b.position - 1],
                table.row_labels()[b.position],
                b.height
            );
        }
    }

    // partitions and boundary positions tell one story
    let partition = dend.cut(3)?;
    let positions = boundaries_from_partition(&partition);
    println!("k = 3 partition boundaries at positions {positions:?}");
    assert_eq!(positions, vec![12, 24]);
    Ok(())
}
